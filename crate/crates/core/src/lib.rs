//! Numerical and symbolic calculus in arbitrary dimensions.

pub mod error;
pub mod expr;
pub mod integrate;
pub mod deriv;
pub mod matrix;
pub mod ode;
pub mod ops;
pub mod series;
pub mod tensor;

pub use error::{Error, Result};
pub use expr::{Binding, Expr};
pub use tensor::{Scalar, Tensor};
