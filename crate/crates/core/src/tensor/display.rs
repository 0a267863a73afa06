use std::fmt;

use super::Tensor;

fn write_matrix(f: &mut fmt::Formatter<'_>, cells: &[String], nrow: usize, ncol: usize) -> fmt::Result {
    let row_labels: Vec<String> = (1..=nrow).map(|i| format!("[{i},]")).collect();
    let label_w = row_labels.iter().map(String::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..ncol)
        .map(|j| {
            let head = format!("[,{}]", j + 1).len();
            (0..nrow).map(|i| cells[i + nrow * j].len()).max().unwrap_or(0).max(head)
        })
        .collect();
    write!(f, "{:label_w$}", "")?;
    for (j, w) in widths.iter().enumerate() {
        write!(f, " {:>w$}", format!("[,{}]", j + 1))?;
    }
    for (i, label) in row_labels.iter().enumerate() {
        write!(f, "\n{label:<label_w$}")?;
        for (j, w) in widths.iter().enumerate() {
            write!(f, " {:>w$}", cells[i + nrow * j])?;
        }
    }
    Ok(())
}

pub(super) fn write_tensor(f: &mut fmt::Formatter<'_>, t: &Tensor) -> fmt::Result {
    let cells: Vec<String> = t.data().iter().map(ToString::to_string).collect();
    let e = t.extents();
    match e.len() {
        0 => write!(f, "{}", cells[0]),
        1 => write!(f, "[1] {}", cells.join(" ")),
        2 => write_matrix(f, &cells, e[0], e[1]),
        _ => {
            let slice = e[0] * e[1];
            let outer = &e[2..];
            let mut idx = vec![0; outer.len()];
            let mut start = 0;
            loop {
                if start > 0 {
                    writeln!(f, "\n")?;
                }
                let label: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
                writeln!(f, ", , {}\n", label.join(", "))?;
                write_matrix(f, &cells[start..start + slice], e[0], e[1])?;
                start += slice;
                if !super::next_index(&mut idx, outer) {
                    break;
                }
            }
            Ok(())
        }
    }
}
