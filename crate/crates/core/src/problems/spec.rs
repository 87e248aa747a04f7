use serde::Deserialize;

use super::{deblur_2d, deriv2, dorr, heat, modified_spectra, shaw, spectra, TestProblem, PROBLEM_NAMES};
use crate::error::{Error, Result};
use crate::operators::Boundary;

/// Problem name plus parameters, as written in configs or as
/// `name:key=value,...` on the command line.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub name: String,
    pub n: Option<usize>,
    pub side: Option<usize>,
    pub sigma: Option<f64>,
    pub c: Option<f64>,
    pub kappa: Option<f64>,
    pub theta: Option<f64>,
    pub boundary: Option<String>,
    #[serde(default)]
    pub nl: f64,
    #[serde(default)]
    pub seed: u64,
}

fn config_error(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

impl ProblemSpec {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Self::default()
        }
    }

    /// Parses `shaw:n=32,nl=1e-2,seed=1`.
    pub fn parse(text: &str) -> Result<Self> {
        let (name, params) = match text.split_once(':') {
            Some((name, params)) => (name.trim(), params),
            None => (text.trim(), ""),
        };
        let mut spec = Self::new(name);
        for pair in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| config_error("problem", format!("expected key=value, got `{pair}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let field = format!("problem.{key}");
            let bad = |e: &dyn std::fmt::Display| config_error(&field, format!("cannot parse `{value}`: {e}"));
            match key {
                "n" => spec.n = Some(value.parse().map_err(|e| bad(&e))?),
                "side" => spec.side = Some(value.parse().map_err(|e| bad(&e))?),
                "sigma" => spec.sigma = Some(value.parse().map_err(|e| bad(&e))?),
                "c" => spec.c = Some(value.parse().map_err(|e| bad(&e))?),
                "kappa" => spec.kappa = Some(value.parse().map_err(|e| bad(&e))?),
                "theta" => spec.theta = Some(value.parse().map_err(|e| bad(&e))?),
                "boundary" => spec.boundary = Some(value.to_string()),
                "nl" => spec.nl = value.parse().map_err(|e| bad(&e))?,
                "seed" => spec.seed = value.parse().map_err(|e| bad(&e))?,
                _ => return Err(config_error(&field, "unknown parameter")),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Checks names and parameter applicability without building anything.
    pub fn validate(&self) -> Result<()> {
        if !PROBLEM_NAMES.contains(&self.name.as_str()) {
            return Err(config_error(
                "problem.name",
                format!(
                    "unknown problem `{}` (expected one of {})",
                    self.name,
                    PROBLEM_NAMES.join(", ")
                ),
            ));
        }
        let allowed: &[&str] = match self.name.as_str() {
            "spectra" => &["n", "sigma"],
            "modified_spectra" => &["n", "c"],
            "shaw" | "deriv2" => &["n"],
            "heat" => &["n", "kappa"],
            "dorr" => &["n", "theta"],
            _ => &["side", "sigma", "boundary"],
        };
        let present = [
            ("n", self.n.is_some()),
            ("side", self.side.is_some()),
            ("sigma", self.sigma.is_some()),
            ("c", self.c.is_some()),
            ("kappa", self.kappa.is_some()),
            ("theta", self.theta.is_some()),
            ("boundary", self.boundary.is_some()),
        ];
        for (key, set) in present {
            if set && !allowed.contains(&key) {
                return Err(config_error(
                    &format!("problem.{key}"),
                    format!("not a parameter of {}", self.name),
                ));
            }
        }
        if !(self.nl >= 0.0 && self.nl.is_finite()) {
            return Err(config_error("problem.nl", "noise level must be finite and >= 0"));
        }
        if let Some(b) = &self.boundary {
            b.parse::<Boundary>()
                .map_err(|_| config_error("problem.boundary", format!("unknown boundary `{b}` (zero, reflexive)")))?;
        }
        // generator preconditions, so that bad values surface as config errors
        let (size_key, size) = if self.name == "deblur_2d" {
            ("problem.side", self.side.unwrap_or(32))
        } else {
            ("problem.n", self.n.unwrap_or(64))
        };
        if size < 8 {
            return Err(config_error(size_key, format!("must be at least 8, got {size}")));
        }
        if self.name == "shaw" && !size.is_multiple_of(2) {
            return Err(config_error(size_key, format!("shaw needs an even size, got {size}")));
        }
        if self.name == "modified_spectra" && size > super::DENSE_LIMIT {
            return Err(config_error(
                size_key,
                format!(
                    "modified_spectra is built from a dense SVD, n <= {} required",
                    super::DENSE_LIMIT
                ),
            ));
        }
        for (key, value) in [("sigma", self.sigma), ("kappa", self.kappa), ("theta", self.theta)] {
            if let Some(v) = value {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(config_error(
                        &format!("problem.{key}"),
                        format!("must be positive, got {v}"),
                    ));
                }
            }
        }
        if let Some(c) = self.c {
            if !(c < 0.0 && c.is_finite()) {
                return Err(config_error("problem.c", format!("must be negative, got {c}")));
            }
        }
        Ok(())
    }

    /// Size of the unknown vector.
    pub fn dimension(&self) -> usize {
        match self.name.as_str() {
            "deblur_2d" => self.side.unwrap_or(32).pow(2),
            _ => self.n.unwrap_or(64),
        }
    }

    /// Builds the problem, noise included.
    pub fn build(&self) -> Result<TestProblem> {
        self.validate()?;
        let n = self.n.unwrap_or(64);
        let problem = match self.name.as_str() {
            "spectra" => spectra(n, self.sigma.unwrap_or(2.0))?,
            "modified_spectra" => modified_spectra(n, self.c.unwrap_or(-2.0))?,
            "shaw" => shaw(n)?,
            "deriv2" => deriv2(n)?,
            "heat" => heat(n, self.kappa.unwrap_or(1.0))?,
            "dorr" => dorr(n, self.theta.unwrap_or(0.01))?,
            _ => {
                let boundary = match &self.boundary {
                    Some(b) => b.parse()?,
                    None => Boundary::Zero,
                };
                deblur_2d(self.side.unwrap_or(32), self.sigma.unwrap_or(2.0), 0.0, 0, boundary)?
            }
        };
        problem.with_noise(self.nl, self.seed)
    }
}

impl std::fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name)?;
        let mut parts = Vec::new();
        if let Some(v) = self.n {
            parts.push(format!("n={v}"));
        }
        if let Some(v) = self.side {
            parts.push(format!("side={v}"));
        }
        if let Some(v) = self.sigma {
            parts.push(format!("sigma={v}"));
        }
        if let Some(v) = self.c {
            parts.push(format!("c={v}"));
        }
        if let Some(v) = self.kappa {
            parts.push(format!("kappa={v}"));
        }
        if let Some(v) = self.theta {
            parts.push(format!("theta={v}"));
        }
        if let Some(v) = &self.boundary {
            parts.push(format!("boundary={v}"));
        }
        parts.push(format!("nl={}", self.nl));
        parts.push(format!("seed={}", self.seed));
        write!(f, ":{}", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_roundtrips() {
        let spec = ProblemSpec::parse("shaw:n=32,nl=1e-2,seed=1").unwrap();
        assert_eq!(spec.name, "shaw");
        assert_eq!(spec.n, Some(32));
        assert_eq!(spec.nl, 1e-2);
        assert_eq!(spec.seed, 1);
        assert_eq!(ProblemSpec::parse(&spec.to_string()).unwrap(), spec);
        assert_eq!(ProblemSpec::parse("deriv2").unwrap().dimension(), 64);
    }

    #[test]
    fn reports_offending_field() {
        let field = |text: &str| match ProblemSpec::parse(text) {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected config error, got {other:?}"),
        };
        assert_eq!(field("blur:n=3"), "problem.name");
        assert_eq!(field("shaw:side=3"), "problem.side");
        assert_eq!(field("shaw:n=x"), "problem.n");
        assert_eq!(field("shaw:foo=1"), "problem.foo");
        assert_eq!(field("deblur_2d:boundary=periodic"), "problem.boundary");
        assert_eq!(field("shaw:nl=-1"), "problem.nl");
        assert_eq!(field("shaw:n=33"), "problem.n");
        assert_eq!(field("deriv2:n=4"), "problem.n");
        assert_eq!(field("deblur_2d:side=4"), "problem.side");
        assert_eq!(field("modified_spectra:n=4096"), "problem.n");
        assert_eq!(field("modified_spectra:c=0.5"), "problem.c");
        assert_eq!(field("heat:kappa=0"), "problem.kappa");
        assert_eq!(field("spectra:sigma=-1"), "problem.sigma");
    }

    #[test]
    fn builds_every_problem() {
        for name in PROBLEM_NAMES {
            let mut spec = ProblemSpec::new(name);
            if name == "deblur_2d" {
                spec.side = Some(8);
            } else {
                spec.n = Some(16);
            }
            spec.nl = 1e-2;
            let p = spec.build().unwrap();
            assert_eq!(p.n(), spec.dimension());
            assert_eq!(p.noise_level, 1e-2);
        }
    }
}
