use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::chop::PrecisionFormat;
use crate::error::{Error, Result};
use crate::hybrid::{ParamRule, DEFAULT_STOP_TOL, DEFAULT_STOP_WINDOW};
use crate::krylov::DecompositionKind;
use crate::problems::{ProblemSpec, DENSE_LIMIT};

pub const SOLVER_NAMES: [&str; 8] = [
    "cmrh",
    "cmrh_unpivoted",
    "gmres",
    "hcmrh",
    "hybrid_gmres",
    "landweber",
    "richardson",
    "chebyshev",
];

/// An experiment file as written on disk (TOML).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub solvers: Vec<SolverConfig>,
    /// Directory for the CSV files, relative to the config file.
    pub output_dir: PathBuf,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// `gcv`, `optimal` or `fixed` (then `lambda` is required); default for hybrid solvers.
    pub param_rule: Option<String>,
    pub lambda: Option<f64>,
    /// Simulated precision for CMRH / GMRES: a preset name or `e<E>m<M>`.
    pub precision: Option<String>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub name: String,
    /// File-name label; defaults to the solver name.
    pub label: Option<String>,
    pub param_rule: Option<String>,
    pub lambda: Option<f64>,
    /// Apply the `Ĝ` stopping rule; default on for the GCV rule only.
    pub gcv_stopping: Option<bool>,
    /// Step length for Landweber / Richardson.
    pub omega: Option<f64>,
    /// `full` (default) or `narrow`, for Chebyshev.
    pub interval: Option<String>,
}

/// Extra tables beyond the per-solver histories.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default)]
    pub filters: bool,
    #[serde(default)]
    pub singvals: bool,
    #[serde(default)]
    pub bounds: bool,
}

fn default_max_iters() -> usize {
    30
}

fn default_tol() -> f64 {
    DEFAULT_STOP_TOL
}

fn default_window() -> usize {
    DEFAULT_STOP_WINDOW
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalPreset {
    Narrow,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverKind {
    Krylov(DecompositionKind),
    Hybrid {
        kind: DecompositionKind,
        rule: ParamRule,
        stopping: bool,
    },
    Landweber(Option<f64>),
    Richardson(Option<f64>),
    Chebyshev(IntervalPreset),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverPlan {
    pub label: String,
    pub kind: SolverKind,
}

/// A validated experiment, ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub problem: ProblemSpec,
    pub solvers: Vec<SolverPlan>,
    pub output_dir: PathBuf,
    pub max_iters: usize,
    pub precision: Option<PrecisionFormat>,
    pub tol: f64,
    pub window: usize,
    pub outputs: OutputsConfig,
}

fn config_error(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

fn parse_rule(field: &str, rule: &str, lambda: Option<f64>) -> Result<ParamRule> {
    match rule {
        "gcv" => Ok(ParamRule::Gcv),
        "optimal" => Ok(ParamRule::Optimal),
        "fixed" => match lambda {
            Some(l) if l >= 0.0 && l.is_finite() => Ok(ParamRule::Fixed(l)),
            Some(l) => Err(config_error(
                field.replace("param_rule", "lambda"),
                format!("must be finite and >= 0, got {l}"),
            )),
            None => Err(config_error(
                field.replace("param_rule", "lambda"),
                "required by the fixed rule",
            )),
        },
        other => Err(config_error(
            field,
            format!("unknown rule `{other}` (gcv, optimal, fixed)"),
        )),
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let msg = e.to_string();
            config_error("config", msg.trim_end())
        })
    }

    /// Reads and parses a file; I/O failures count as config errors.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config { field, message } => config_error(field, format!("{}: {message}", path.display())),
            other => other,
        })
    }

    /// Resolves names and checks every field. `base` anchors a relative `output_dir`.
    pub fn validate(&self, base: &Path) -> Result<Experiment> {
        self.problem.validate()?;
        if self.max_iters == 0 {
            return Err(config_error("max_iters", "must be at least 1"));
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(config_error("tol", "must be finite and >= 0"));
        }
        if self.window == 0 {
            return Err(config_error("window", "must be at least 1"));
        }
        if self.solvers.is_empty() {
            return Err(config_error("solvers", "at least one solver is required"));
        }
        let precision = match &self.precision {
            Some(p) => Some(
                p.parse::<PrecisionFormat>()
                    .map_err(|e| config_error("precision", e.to_string()))?,
            ),
            None => None,
        };
        let n = self.problem.dimension();
        let size_field = if self.problem.name == "deblur_2d" {
            "problem.side"
        } else {
            "problem.n"
        };
        let dense_needed = self.outputs.filters || self.outputs.singvals || self.outputs.bounds;
        if dense_needed && n > DENSE_LIMIT {
            return Err(config_error(
                "outputs",
                format!("filters, singvals and bounds need a dense SVD; n = {n} exceeds {DENSE_LIMIT}"),
            ));
        }
        let global_rule = self.param_rule.as_deref().unwrap_or("gcv");
        parse_rule("param_rule", global_rule, self.lambda)?;

        let mut solvers: Vec<SolverPlan> = Vec::new();
        for (i, s) in self.solvers.iter().enumerate() {
            let field = |key: &str| format!("solvers[{i}].{key}");
            let kind = match s.name.as_str() {
                "cmrh" => SolverKind::Krylov(DecompositionKind::HessenbergPivoted),
                "cmrh_unpivoted" => SolverKind::Krylov(DecompositionKind::Hessenberg),
                "gmres" => SolverKind::Krylov(DecompositionKind::Arnoldi),
                "hcmrh" | "hybrid_gmres" => {
                    let rule = match &s.param_rule {
                        Some(r) => parse_rule(&field("param_rule"), r, s.lambda.or(self.lambda))?,
                        None => parse_rule("param_rule", global_rule, s.lambda.or(self.lambda))?,
                    };
                    SolverKind::Hybrid {
                        kind: if s.name == "hcmrh" {
                            DecompositionKind::HessenbergPivoted
                        } else {
                            DecompositionKind::Arnoldi
                        },
                        rule,
                        stopping: s.gcv_stopping.unwrap_or(rule == ParamRule::Gcv),
                    }
                }
                "landweber" => SolverKind::Landweber(s.omega),
                "richardson" => SolverKind::Richardson(s.omega),
                "chebyshev" => SolverKind::Chebyshev(match s.interval.as_deref() {
                    Some("narrow") => IntervalPreset::Narrow,
                    None | Some("full") => IntervalPreset::Full,
                    Some(other) => {
                        return Err(config_error(
                            field("interval"),
                            format!("unknown interval `{other}` (narrow, full)"),
                        ))
                    }
                }),
                other => {
                    return Err(config_error(
                        field("name"),
                        format!("unknown solver `{other}` (expected one of {})", SOLVER_NAMES.join(", ")),
                    ))
                }
            };
            let hybrid = matches!(kind, SolverKind::Hybrid { .. });
            if !hybrid {
                for (key, set) in [
                    ("param_rule", s.param_rule.is_some()),
                    ("lambda", s.lambda.is_some()),
                    ("gcv_stopping", s.gcv_stopping.is_some()),
                ] {
                    if set {
                        return Err(config_error(field(key), format!("not an option of {}", s.name)));
                    }
                }
            }
            if s.omega.is_some() && !matches!(kind, SolverKind::Landweber(_) | SolverKind::Richardson(_)) {
                return Err(config_error(field("omega"), format!("not an option of {}", s.name)));
            }
            if let Some(w) = s.omega {
                if !w.is_finite() {
                    return Err(config_error(field("omega"), "must be finite"));
                }
            }
            if s.interval.is_some() && !matches!(kind, SolverKind::Chebyshev(_)) {
                return Err(config_error(field("interval"), format!("not an option of {}", s.name)));
            }
            let needs_bounds = matches!(
                kind,
                SolverKind::Landweber(None) | SolverKind::Richardson(None) | SolverKind::Chebyshev(_)
            );
            if needs_bounds && n > DENSE_LIMIT {
                return Err(config_error(
                    size_field,
                    format!(
                        "{} needs spectral bounds from a dense SVD; n = {n} exceeds {DENSE_LIMIT}",
                        s.name
                    ),
                ));
            }
            if precision.is_some() && !matches!(s.name.as_str(), "cmrh" | "gmres") {
                return Err(config_error(
                    field("name"),
                    format!("`{}` cannot run in simulated precision (cmrh, gmres)", s.name),
                ));
            }
            let label = s.label.clone().unwrap_or_else(|| s.name.clone());
            if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(config_error(field("label"), "use letters, digits, `_` and `-` only"));
            }
            if solvers.iter().any(|p| p.label == label) {
                return Err(config_error(
                    field(if s.label.is_some() { "label" } else { "name" }),
                    format!("duplicate label `{label}`; set distinct `label`s"),
                ));
            }
            solvers.push(SolverPlan { label, kind });
        }
        Ok(Experiment {
            problem: self.problem.clone(),
            solvers,
            output_dir: base.join(&self.output_dir),
            max_iters: self.max_iters,
            precision,
            tol: self.tol,
            window: self.window,
            outputs: self.outputs,
        })
    }
}
