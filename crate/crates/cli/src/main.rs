//! `calculus`: symbolic and numerical calculus from the command line.
//!
//! Output is one JSON document on stdout, or human-readable tables with
//! `--pretty`. Usage errors exit with 2, evaluation errors with 1.

mod literal;

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use calculus::deriv::{derivative_numeric, derivative_symbolic, FdOptions, Order, Target};
use calculus::integrate::{integral, Bound, Integrand, IntegralRequest, IntegrationMethod};
use calculus::matrix::{mxdet, mxinv, mxprod};
use calculus::ode::{solve_ode, time_grid, Method, OdeProblem, Rhs};
use calculus::ops::{self, Coordinates};
use calculus::series::{hermite, partitions, taylor, HermiteRequest, SeriesResult};
use calculus::tensor::{contraction, cross, delta, dot, einstein, epsilon, inner, kron, outer};
use calculus::{Binding, Expr, Tensor};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Calc(#[from] calculus::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

#[derive(Parser)]
#[command(name = "calculus", version, about = "Symbolic and numerical calculus in arbitrary dimensions")]
struct Cli {
    /// Print human-readable tables instead of JSON
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derivatives, symbolic or by finite differences
    Derive(DeriveArgs),
    /// Multivariate Taylor series
    Taylor(TaylorArgs),
    /// Multivariate Hermite polynomials
    Hermite(HermiteArgs),
    /// Integer partitions
    Partitions(PartitionArgs),
    /// Einstein summation over named indices
    Einstein {
        #[arg(required = true)]
        tensors: Vec<String>,
    },
    /// Sum over repeated index names within one tensor
    Contract {
        tensor: String,
        /// Keep each repeated index as a diagonal axis
        #[arg(long)]
        keep: bool,
    },
    /// Levi-Civita symbol
    Epsilon { n: usize },
    /// Generalized Kronecker delta
    Delta { n: usize, p: usize },
    /// Generalized cross product of n-1 vectors in n dimensions
    Cross {
        #[arg(required = true)]
        vectors: Vec<String>,
    },
    /// Determinant
    Det { matrix: String },
    /// Inverse
    Inv { matrix: String },
    /// Matrix product
    Matmul { a: String, b: String },
    /// Sum of elementwise products
    Inner { a: String, b: String },
    /// Contraction of the trailing axes of `a` with `b`
    Dot { a: String, b: String },
    /// Outer product
    Outer { a: String, b: String },
    /// Kronecker product
    Kron { a: String, b: String },
    /// Fixed-step ODE solver
    Ode(OdeArgs),
    /// Gradient
    #[command(alias = "gradient")]
    Grad(OpArgs),
    /// Jacobian matrix
    Jacobian(OpArgs),
    /// Hessian (Cartesian only)
    Hessian(OpArgs),
    /// Divergence over the last axis
    #[command(alias = "divergence")]
    Div(OpArgs),
    /// Curl over the last axis
    Curl(OpArgs),
    /// Laplacian
    Laplacian(OpArgs),
    /// Multidimensional integral
    Integrate(IntegrateArgs),
}

#[derive(Args)]
struct DeriveArgs {
    /// Function: expression or tensor literal
    #[arg(long)]
    f: String,
    /// Variables, comma separated
    #[arg(long)]
    vars: String,
    /// `2`, `1,2` or `x=1,y=2`
    #[arg(long, default_value = "1")]
    order: String,
    /// Point, e.g. `x=1,y=2`
    #[arg(long)]
    at: Option<String>,
    /// Use finite differences at `--at` instead of symbolic rules
    #[arg(long)]
    numeric: bool,
    #[arg(long, default_value_t = calculus::deriv::DEFAULT_ACCURACY)]
    accuracy: u32,
}

#[derive(Args)]
struct TaylorArgs {
    #[arg(long)]
    f: String,
    #[arg(long)]
    vars: String,
    /// Expansion point, e.g. `x=0,y=1`
    #[arg(long)]
    center: String,
    #[arg(long, default_value_t = 1)]
    order: u32,
    /// Coefficients by finite differences
    #[arg(long)]
    numeric: bool,
    #[arg(long, default_value_t = calculus::deriv::DEFAULT_ACCURACY)]
    accuracy: u32,
}

#[derive(Args)]
struct HermiteArgs {
    #[arg(long)]
    degree: u32,
    /// Row-major covariance, e.g. `1,0;0,1`; identity by default
    #[arg(long)]
    sigma: Option<String>,
    /// Variable names; `x` or `x1,x2,...` by default
    #[arg(long)]
    vars: Option<String>,
}

#[derive(Args)]
struct PartitionArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    length: usize,
    /// Pad with zeros to exactly `length` parts
    #[arg(long)]
    fill: bool,
    /// Include every distinct permutation
    #[arg(long)]
    perm: bool,
    /// Only partitions of exactly `n`; `false` includes every total up to `n`
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    equal: bool,
}

#[derive(Args)]
struct OdeArgs {
    /// Right-hand sides, one per state, comma separated
    #[arg(long)]
    f: String,
    /// State names
    #[arg(long)]
    vars: String,
    /// Initial state
    #[arg(long)]
    init: String,
    /// Grid `a:b:h`
    #[arg(long)]
    times: String,
    #[arg(long, default_value = "t")]
    timevar: String,
    #[arg(long, default_value = "rk4")]
    method: String,
    /// Write gnuplot-ready columns to this file
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct OpArgs {
    /// Field: expression or tensor literal
    #[arg(long)]
    f: String,
    #[arg(long)]
    vars: String,
    /// System name or comma-separated scale factors
    #[arg(long, default_value = "cartesian")]
    coords: String,
    /// Evaluate at this point
    #[arg(long)]
    at: Option<String>,
}

#[derive(Args)]
struct IntegrateArgs {
    /// Integrand expression
    #[arg(long)]
    f: String,
    /// `x=lo:hi` ranges or `x=value` fixed variables, comma separated
    #[arg(long)]
    bounds: String,
    #[arg(long, default_value = "cartesian")]
    coords: String,
    /// `adaptive` or `monte-carlo`
    #[arg(long)]
    method: Option<String>,
    /// Monte Carlo seed; `CALC_SEED` applies when absent
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Relative tolerance for the adaptive method
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    max_evals: Option<usize>,
    /// Write the weighted integrand along the first integrated variable
    #[arg(long)]
    plot: Option<PathBuf>,
}

/// Command output: a JSON document and its human-readable rendering.
struct Output {
    json: Value,
    pretty: String,
}

fn record(t: &Tensor) -> Value {
    serde_json::to_value(t).expect("tensor records serialize")
}

fn tensor_out(t: Tensor) -> Output {
    Output {
        json: json!({ "result": record(&t) }),
        pretty: t.to_string(),
    }
}

fn vars_of(text: &str) -> Vec<String> {
    literal::list(text)
}

fn refs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn series_json(s: &SeriesResult) -> Value {
    let terms: Vec<Value> = s
        .terms
        .iter()
        .map(|t| json!({ "label": t.label, "coefficient": t.coefficient, "degree": t.degree.as_slice() }))
        .collect();
    json!({
        "expression": s.expression.to_string(),
        "order": s.order,
        "variables": s.variables,
        "center": s.center,
        "terms": terms,
    })
}

fn series_pretty(s: &SeriesResult) -> String {
    let mut out = format!("{}\n", s.expression);
    let width = s.terms.iter().map(|t| t.label.len()).max().unwrap_or(0);
    for t in &s.terms {
        let _ = writeln!(out, "  {:<width$}  {}", t.label, t.coefficient);
    }
    out.trim_end().to_string()
}

fn derive(a: &DeriveArgs) -> Result<Output, CliError> {
    let f = literal::tensor(&a.f)?;
    let vars = vars_of(&a.vars);
    let order: Order = a.order.parse()?;
    let at = a.at.as_deref().map(literal::binding).transpose()?;
    let t = if a.numeric {
        let at = at.ok_or_else(|| CliError::Usage("--numeric needs --at".into()))?;
        let opts = FdOptions {
            accuracy: a.accuracy,
            steps: None,
        };
        derivative_numeric(Target::Expr(&f), &refs(&vars), &order, &at, &opts)?
    } else {
        derivative_symbolic(&f, &refs(&vars), &order, at.as_ref())?
    };
    Ok(tensor_out(t))
}

fn taylor_cmd(a: &TaylorArgs) -> Result<Output, CliError> {
    let f = literal::tensor(&a.f)?;
    let vars = vars_of(&a.vars);
    let center = literal::binding(&a.center)?;
    let method = if a.numeric {
        calculus::series::Method::Numeric(FdOptions {
            accuracy: a.accuracy,
            steps: None,
        })
    } else {
        calculus::series::Method::Symbolic
    };
    let s = taylor(Target::Expr(&f), &refs(&vars), &center, a.order, &method)?;
    Ok(Output {
        json: series_json(&s),
        pretty: series_pretty(&s),
    })
}

fn hermite_cmd(a: &HermiteArgs) -> Result<Output, CliError> {
    let sigma: Vec<Vec<f64>> = match &a.sigma {
        Some(s) => literal::matrix_rows(s)?
            .iter()
            .map(|r| r.iter().map(|v| literal::number(v)).collect())
            .collect::<Result<_, _>>()?,
        None => {
            let d = a.vars.as_deref().map_or(1, |v| vars_of(v).len());
            (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
        }
    };
    let variables = match &a.vars {
        Some(v) => vars_of(v),
        None if sigma.len() == 1 => vec!["x".to_string()],
        None => (1..=sigma.len()).map(|i| format!("x{i}")).collect(),
    };
    let polys = hermite(&HermiteRequest {
        degree: a.degree,
        sigma,
        variables,
    })?;
    let mut items = Vec::new();
    let mut pretty = String::new();
    for (k, s) in &polys {
        let mut v = series_json(s);
        v["index"] = json!(k.as_slice());
        items.push(v);
        let _ = writeln!(pretty, "H[{k}] = {}", s.expression);
    }
    Ok(Output {
        json: json!({ "polynomials": items }),
        pretty: pretty.trim_end().to_string(),
    })
}

fn partitions_cmd(a: &PartitionArgs) -> Result<Output, CliError> {
    let ps = partitions(a.n, a.length, a.fill, a.perm, a.equal)?;
    let rows: Vec<&[u32]> = ps.iter().map(|p| p.as_slice()).collect();
    let pretty = ps.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("\n");
    Ok(Output {
        json: json!({ "partitions": rows }),
        pretty,
    })
}

fn ode_cmd(a: &OdeArgs) -> Result<Output, CliError> {
    let rhs = literal::list(&a.f).iter().map(|s| s.parse::<Expr>()).collect::<Result<_, _>>()?;
    let (t0, t1, h) = literal::times(&a.times)?;
    let p = OdeProblem {
        rhs: Rhs::Symbolic(rhs),
        names: vars_of(&a.vars),
        initial: literal::numbers(&a.init)?,
        times: time_grid(t0, t1, h)?,
        timevar: a.timevar.clone(),
        method: a.method.parse::<Method>()?,
    };
    let s = solve_ode(&p)?;
    if let Some(path) = &a.plot {
        let mut data = format!("# {} {}\n", a.timevar, s.names.join(" "));
        for (t, row) in s.times.iter().zip(&s.states) {
            let cols: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(data, "{t:e} {}", cols.join(" "));
        }
        fs::write(path, data)?;
    }
    Ok(Output {
        json: json!({ "timevar": a.timevar, "names": s.names, "times": s.times, "states": s.states }),
        pretty: s.to_csv(&a.timevar)?.trim_end().to_string(),
    })
}

fn op_cmd(a: &OpArgs, which: &str) -> Result<Output, CliError> {
    let f = literal::tensor(&a.f)?;
    let vars = vars_of(&a.vars);
    let vars = refs(&vars);
    let coords: Coordinates = a.coords.parse()?;
    let at = a.at.as_deref().map(literal::binding).transpose()?;
    let op = match which {
        "grad" => ops::gradient,
        "jacobian" => ops::jacobian,
        "hessian" => ops::hessian,
        "div" => ops::divergence,
        "curl" => ops::curl,
        _ => ops::laplacian,
    };
    Ok(tensor_out(op(Target::Expr(&f), &vars, &coords, at.as_ref())?))
}

fn integrate_cmd(a: &IntegrateArgs) -> Result<Output, CliError> {
    let f: Expr = a.f.parse()?;
    let coords: Coordinates = a.coords.parse()?;
    let bounds = literal::bounds(&a.bounds)?;
    let mut req = IntegralRequest::new(Integrand::Expr(f.clone()), bounds.clone()).coords(coords.clone());
    if let Some(m) = &a.method {
        req.method = Some(m.parse::<IntegrationMethod>()?);
    }
    let env_seed = match std::env::var("CALC_SEED") {
        Ok(s) => Some(s.trim().parse::<u64>().map_err(|_| CliError::Usage(format!("CALC_SEED `{s}` is not an integer")))?),
        Err(_) => None,
    };
    if let Some(seed) = a.seed.or(env_seed) {
        req.seed = seed;
    }
    if let Some(n) = a.samples {
        req.samples = n;
    }
    if let Some(t) = a.tol {
        req.rel_tol = t;
    }
    if let Some(t) = a.abs_tol {
        req.abs_tol = t;
    }
    if let Some(n) = a.max_evals {
        req.max_evals = n;
    }
    let r = integral(&req)?;
    if let Some(path) = &a.plot {
        fs::write(path, integrand_profile(&f, &coords, &bounds)?)?;
    }
    let pretty = format!(
        "value:       {}\nerror:       {:e}\nevaluations: {}\nmethod:      {}\nconverged:   {}{}",
        r.value,
        r.error,
        r.evaluations,
        r.method,
        r.converged,
        r.seed.map_or(String::new(), |s| format!("\nseed:        {s}"))
    );
    Ok(Output {
        json: json!({
            "value": r.value,
            "error": r.error,
            "evaluations": r.evaluations,
            "method": r.method.name(),
            "converged": r.converged,
            "seed": r.seed,
        }),
        pretty,
    })
}

/// `J·f` along the first integrated variable, others at their midpoints.
fn integrand_profile(f: &Expr, coords: &Coordinates, bounds: &[(String, Bound)]) -> Result<String, CliError> {
    let names: Vec<&str> = bounds.iter().map(|(n, _)| n.as_str()).collect();
    let j = coords.system(&names)?.jacobian();
    let mut env = Binding::new();
    let mut axis = None;
    for (k, (n, b)) in bounds.iter().enumerate() {
        match *b {
            Bound::Range(lo, hi) => {
                env.set(n.clone(), 0.5 * (lo + hi));
                axis.get_or_insert((k, lo, hi));
            }
            Bound::Fixed(v) => env.set(n.clone(), v),
        }
    }
    let (k, lo, hi) = axis.ok_or_else(|| CliError::Usage("nothing to plot".into()))?;
    let mut out = format!("# {} J*f\n", names[k]);
    let steps = 200;
    for i in 1..steps {
        let x = lo + (hi - lo) * i as f64 / steps as f64;
        env.set(names[k], x);
        let v = j.evaluate(&env)? * f.evaluate(&env)?;
        let _ = writeln!(out, "{x:e} {v:e}");
    }
    Ok(out)
}

fn pair(a: &str, b: &str) -> Result<(Tensor, Tensor), CliError> {
    Ok((literal::tensor(a)?, literal::tensor(b)?))
}

fn run(cmd: &Command) -> Result<Output, CliError> {
    Ok(match cmd {
        Command::Derive(a) => derive(a)?,
        Command::Taylor(a) => taylor_cmd(a)?,
        Command::Hermite(a) => hermite_cmd(a)?,
        Command::Partitions(a) => partitions_cmd(a)?,
        Command::Einstein { tensors } => {
            let ts = tensors.iter().map(|t| literal::tensor(t)).collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<&Tensor> = ts.iter().collect();
            tensor_out(einstein(&refs)?)
        }
        Command::Contract { tensor, keep } => tensor_out(contraction(&literal::tensor(tensor)?, !keep)?),
        Command::Epsilon { n } => tensor_out(epsilon(*n)?),
        Command::Delta { n, p } => tensor_out(delta(*n, *p)?),
        Command::Cross { vectors } => {
            let vs = vectors.iter().map(|t| literal::tensor(t)).collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<&Tensor> = vs.iter().collect();
            tensor_out(cross(&refs)?)
        }
        Command::Det { matrix } => tensor_out(Tensor::scalar(mxdet(&literal::tensor(matrix)?)?)),
        Command::Inv { matrix } => tensor_out(mxinv(&literal::tensor(matrix)?)?),
        Command::Matmul { a, b } => {
            let (a, b) = pair(a, b)?;
            tensor_out(mxprod(&a, &b)?)
        }
        Command::Inner { a, b } => {
            let (a, b) = pair(a, b)?;
            tensor_out(Tensor::scalar(inner(&a, &b)?))
        }
        Command::Dot { a, b } => {
            let (a, b) = pair(a, b)?;
            tensor_out(dot(&a, &b)?)
        }
        Command::Outer { a, b } => {
            let (a, b) = pair(a, b)?;
            tensor_out(outer(&a, &b)?)
        }
        Command::Kron { a, b } => {
            let (a, b) = pair(a, b)?;
            tensor_out(kron(&a, &b)?)
        }
        Command::Ode(a) => ode_cmd(a)?,
        Command::Grad(a) => op_cmd(a, "grad")?,
        Command::Jacobian(a) => op_cmd(a, "jacobian")?,
        Command::Hessian(a) => op_cmd(a, "hessian")?,
        Command::Div(a) => op_cmd(a, "div")?,
        Command::Curl(a) => op_cmd(a, "curl")?,
        Command::Laplacian(a) => op_cmd(a, "laplacian")?,
        Command::Integrate(a) => integrate_cmd(a)?,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(out) => {
            if cli.pretty {
                println!("{}", out.pretty);
            } else {
                println!("{}", out.json);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => 2,
                _ => 1,
            })
        }
    }
}
