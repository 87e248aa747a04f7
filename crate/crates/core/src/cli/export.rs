use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::problems::{ProblemSpec, DENSE_LIMIT};

/// The plain-text bundle written by [`export_problem`].
#[derive(Debug, Clone)]
pub struct ExportedProblem {
    pub spec: String,
    pub a: DenseMatrix,
    pub x_true: Vec<f64>,
    pub b_exact: Vec<f64>,
    pub b: Vec<f64>,
    pub e: Vec<f64>,
}

/// 17 significant digits, enough to reproduce every `f64` exactly.
fn number(x: f64) -> String {
    format!("{x:.16e}")
}

fn vector_text(v: &[f64]) -> String {
    let mut out = String::with_capacity(v.len() * 24);
    for x in v {
        out.push_str(&number(*x));
        out.push('\n');
    }
    out
}

/// Writes `A.txt` (one row per line), `x_true.txt`, `b_exact.txt`, `b.txt`,
/// `e.txt` and `problem.txt` into `dir`. Refuses sizes above the dense limit.
pub fn export_problem(spec: &ProblemSpec, dir: &Path) -> Result<()> {
    spec.validate()?;
    let n = spec.dimension();
    if n > DENSE_LIMIT {
        let field = if spec.name == "deblur_2d" {
            "problem.side"
        } else {
            "problem.n"
        };
        return Err(Error::Config {
            field: field.into(),
            message: format!("dense export is limited to n <= {DENSE_LIMIT}, got {n}"),
        });
    }
    let p = spec.build()?;
    let a = p.dense_matrix()?;
    fs::create_dir_all(dir)?;
    let mut text = String::with_capacity(a.rows() * a.cols() * 24);
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            if j > 0 {
                text.push(' ');
            }
            let _ = write!(text, "{}", number(a[(i, j)]));
        }
        text.push('\n');
    }
    fs::write(dir.join("A.txt"), text)?;
    fs::write(dir.join("x_true.txt"), vector_text(&p.x_true))?;
    fs::write(dir.join("b_exact.txt"), vector_text(&p.b_exact))?;
    fs::write(dir.join("b.txt"), vector_text(&p.b))?;
    fs::write(dir.join("e.txt"), vector_text(&p.e))?;
    fs::write(dir.join("problem.txt"), format!("{spec}\n"))?;
    Ok(())
}

fn parse_numbers(path: &Path, line: &str) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|t| {
            t.parse().map_err(|_| {
                std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("{}: cannot parse `{t}`", path.display()),
                )
                .into()
            })
        })
        .collect()
}

fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    parse_numbers(path, &text)
}

/// Reads a bundle written by [`export_problem`].
pub fn load_exported(dir: &Path) -> Result<ExportedProblem> {
    let a_path = dir.join("A.txt");
    let text = fs::read_to_string(&a_path)?;
    let rows = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse_numbers(&a_path, l))
        .collect::<Result<Vec<_>>>()?;
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != n) {
        return Err(std::io::Error::new(std::io::ErrorKind::InvalidData, "ragged rows in A.txt").into());
    }
    let a = DenseMatrix::from_fn(m, n, |i, j| rows[i][j]);
    Ok(ExportedProblem {
        spec: fs::read_to_string(dir.join("problem.txt"))?.trim().to_string(),
        a,
        x_true: read_vector(&dir.join("x_true.txt"))?,
        b_exact: read_vector(&dir.join("b_exact.txt"))?,
        b: read_vector(&dir.join("b.txt"))?,
        e: read_vector(&dir.join("e.txt"))?,
    })
}
