use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;

use super::config::{Experiment, IntervalPreset, SolverKind, SolverPlan};
use crate::analysis::{bound_report, filter_factor_series, projected_singular_values};
use crate::chop::{run_under_precision, ChopContext, ChopSolver};
use crate::error::Result;
use crate::hybrid::{hybrid_solve, HybridOptions};
use crate::krylov::DecompositionKind;
use crate::linalg::{jacobi_svd, vector, Svd};
use crate::problems::TestProblem;
use crate::solvers::{
    chebyshev_semi_iteration, krylov_solve, landweber, landweber_step, residual_norm, richardson, richardson_step,
    ChebyshevInterval, IterationHistory, SolveOptions, SpectralBounds,
};

/// Shortest representation that parses back to the same `f64`; `nan`, `inf`, `-inf` otherwise.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:?}")
    }
}

fn opt_number(x: Option<f64>) -> String {
    format_number(x.unwrap_or(f64::NAN))
}

/// Outcome of one solver inside an experiment.
#[derive(Debug, Clone)]
pub struct SolverSummary {
    pub label: String,
    pub iterations: usize,
    pub stop_reason: String,
    /// Relative error of the selected (or last) iterate.
    pub relative_error: f64,
}

/// Builds the problem, runs every solver and writes the requested CSV files.
pub fn run_experiment(exp: &Experiment) -> Result<Vec<SolverSummary>> {
    let problem = exp.problem.build()?;
    fs::create_dir_all(&exp.output_dir)?;
    let bounds: OnceLock<Result<SpectralBounds>> = OnceLock::new();
    let mut runs = Vec::with_capacity(exp.solvers.len());
    for plan in &exp.solvers {
        let history = run_solver(plan, &problem, exp, &bounds)?;
        fs::write(
            exp.output_dir.join(format!("history_{}.csv", plan.label)),
            history_csv(&history, &problem),
        )?;
        runs.push((plan, history));
    }
    if exp.outputs.filters || exp.outputs.singvals {
        let svd = jacobi_svd(&problem.dense_matrix()?)?;
        if exp.outputs.filters {
            for (plan, history) in &runs {
                fs::write(
                    exp.output_dir.join(format!("filters_{}.csv", plan.label)),
                    filters_csv(history, &svd, &problem.b)?,
                )?;
            }
        }
        if exp.outputs.singvals {
            let sigma = problem
                .singular_values
                .clone()
                .unwrap_or_else(|| svd.singular_values.clone());
            fs::write(exp.output_dir.join("singvals.csv"), singvals_csv(&sigma, &runs)?)?;
        }
    }
    if exp.outputs.bounds {
        fs::write(exp.output_dir.join("bounds.csv"), bounds_csv(&problem, exp.max_iters)?)?;
    }
    Ok(runs
        .into_iter()
        .map(|(plan, h)| SolverSummary {
            label: plan.label.clone(),
            iterations: h.len(),
            stop_reason: h.stop_reason.to_string(),
            relative_error: h.selected_record().and_then(|r| r.relative_error).unwrap_or(f64::NAN),
        })
        .collect())
}

fn run_solver(
    plan: &SolverPlan,
    problem: &TestProblem,
    exp: &Experiment,
    bounds: &OnceLock<Result<SpectralBounds>>,
) -> Result<IterationHistory> {
    let op = problem.operator.as_ref();
    let b = &problem.b;
    let opts = SolveOptions::new(exp.max_iters).with_x_true(problem.x_true.clone());
    let spectral = || -> Result<SpectralBounds> {
        match bounds.get_or_init(|| SpectralBounds::from_operator(op)) {
            Ok(s) => Ok(*s),
            Err(e) => Err(crate::error::invalid("spectral bounds", e.to_string())),
        }
    };
    match plan.kind {
        SolverKind::Krylov(kind) => match exp.precision {
            Some(fmt) => {
                let solver = match kind {
                    DecompositionKind::Arnoldi => ChopSolver::Gmres,
                    _ => ChopSolver::Cmrh,
                };
                run_under_precision(solver, problem, &ChopContext::new(fmt), &opts)
            }
            None => krylov_solve(kind, op, b, &opts),
        },
        SolverKind::Hybrid { kind, rule, stopping } => {
            let mut h = HybridOptions::new(opts).with_stopping(exp.tol, exp.window);
            if !stopping {
                h = h.without_stopping();
            }
            hybrid_solve(kind, op, b, &h, rule)
        }
        SolverKind::Landweber(omega) => {
            let w = match omega {
                Some(w) => w,
                None => landweber_step(&spectral()?),
            };
            landweber(op, b, w, &opts)
        }
        SolverKind::Richardson(omega) => {
            let w = match omega {
                Some(w) => w,
                None => richardson_step(&spectral()?),
            };
            richardson(op, b, w, &opts)
        }
        SolverKind::Chebyshev(preset) => {
            let s = spectral()?;
            let interval = match preset {
                IntervalPreset::Narrow => ChebyshevInterval::narrow(&s)?,
                IntervalPreset::Full => ChebyshevInterval::full(&s)?,
            };
            chebyshev_semi_iteration(op, b, interval, &opts)
        }
    }
}

/// `iter, residual_norm, quasi_residual_norm, rel_error, lambda, ghat, stop_reason`;
/// row 0 is the initial guess, the stop reason sits on the final row.
pub fn history_csv(history: &IterationHistory, problem: &TestProblem) -> String {
    let mut out = String::from("iter,residual_norm,quasi_residual_norm,rel_error,lambda,ghat,stop_reason\n");
    let x0 = &history.x0;
    let last = history.len();
    let reason = |i: usize| if i == last { history.stop_reason.as_str() } else { "" };
    let _ = writeln!(
        out,
        "0,{},nan,{},nan,nan,{}",
        format_number(residual_norm(problem.operator.as_ref(), &problem.b, x0)),
        format_number(vector::relative_error(x0, &problem.x_true)),
        reason(0)
    );
    for (i, r) in history.records.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.iter,
            format_number(r.residual_norm),
            opt_number(r.quasi_residual_norm),
            opt_number(r.relative_error),
            opt_number(r.lambda),
            opt_number(r.ghat),
            reason(i + 1)
        );
    }
    out
}

/// Long format: `iter, index, sigma, factor, masked`.
pub fn filters_csv(history: &IterationHistory, svd: &Svd, b: &[f64]) -> Result<String> {
    let mut out = String::from("iter,index,sigma,factor,masked\n");
    for table in filter_factor_series(history, svd, b)? {
        for (i, (f, m)) in table.factors.iter().zip(&table.masked).enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                table.iteration,
                i + 1,
                format_number(svd.singular_values[i]),
                format_number(*f),
                u8::from(*m)
            );
        }
    }
    Ok(out)
}

/// `j, sigma_a`, then the singular values of each solver's final `H_{k+1,k}`.
fn singvals_csv(sigma: &[f64], runs: &[(&SolverPlan, IterationHistory)]) -> Result<String> {
    let mut columns = Vec::new();
    for (plan, h) in runs {
        if let Some(d) = &h.decomposition {
            if d.steps() > 0 {
                columns.push((plan.label.as_str(), projected_singular_values(d)?));
            }
        }
    }
    let mut out = String::from("j,sigma_a");
    for (label, _) in &columns {
        let _ = write!(out, ",sigma_h_{label}");
    }
    out.push('\n');
    for (j, s) in sigma.iter().enumerate() {
        let _ = write!(out, "{},{}", j + 1, format_number(*s));
        for (_, values) in &columns {
            let _ = write!(out, ",{}", opt_number(values.get(j).copied()));
        }
        out.push('\n');
    }
    Ok(out)
}

fn bounds_csv(problem: &TestProblem, k_max: usize) -> Result<String> {
    let mut out = String::from("k,gmres_residual,cmrh_residual,kappa_r,lower_margin,upper_margin\n");
    for r in bound_report(problem, k_max)? {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.k,
            format_number(r.gmres),
            format_number(r.cmrh),
            format_number(r.kappa_r),
            format_number(r.lower_margin()),
            format_number(r.upper_margin())
        );
    }
    Ok(out)
}

/// Reads a history CSV back as `(header, rows)`; used by tests and examples.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_roundtrip() {
        for x in [0.1, 1.0, -2.5e-300, 1e22, f64::MIN_POSITIVE, 123456.789, 0.0] {
            assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_number(f64::NAN), "nan");
        assert_eq!(format_number(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_number(1e-7), "1e-7");
    }
}
