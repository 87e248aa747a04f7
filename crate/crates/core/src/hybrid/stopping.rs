use crate::error::{invalid, Result};
use crate::solvers::StopReason;

pub const DEFAULT_STOP_TOL: f64 = 1e-6;
pub const DEFAULT_STOP_WINDOW: usize = 5;

/// Which stopping rule fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// `|Ĝ(k+1) − Ĝ(k)| / Ĝ(1) < tol`; the current iterate is selected.
    Flat,
    /// The running minimum of `Ĝ` is `window` iterations old; the minimizer is selected.
    Window,
}

impl From<StopRule> for StopReason {
    fn from(rule: StopRule) -> Self {
        match rule {
            StopRule::Flat => StopReason::GcvFlat,
            StopRule::Window => StopReason::GcvWindow,
        }
    }
}

/// Sequence of `Ĝ(k)` values and the parameters of the stopping rule.
#[derive(Debug, Clone)]
pub struct StoppingState {
    values: Vec<f64>,
    tol: f64,
    window: usize,
}

impl Default for StoppingState {
    fn default() -> Self {
        Self {
            values: Vec::new(),
            tol: DEFAULT_STOP_TOL,
            window: DEFAULT_STOP_WINDOW,
        }
    }
}

impl StoppingState {
    pub fn new(tol: f64, window: usize) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(invalid("tol", format!("must be positive, got {tol}")));
        }
        if window == 0 {
            return Err(invalid("window", "must be at least 1"));
        }
        Ok(Self {
            values: Vec::new(),
            tol,
            window,
        })
    }

    pub fn push(&mut self, ghat: f64) {
        self.values.push(ghat);
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn window(&self) -> usize {
        self.window
    }

    /// Zero-based index of the smallest recorded value (first on ties).
    pub fn argmin(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &v) in self.values.iter().enumerate() {
            if best.is_none_or(|b| v < self.values[b]) {
                best = Some(i);
            }
        }
        best
    }

    /// Evaluates both rules on the values recorded so far; the flat rule wins ties.
    pub fn should_stop(&self) -> Option<StopRule> {
        let m = self.values.len();
        if m < 2 {
            return None;
        }
        let first = self.values[0];
        let diff = (self.values[m - 1] - self.values[m - 2]).abs();
        let flat = if first == 0.0 {
            diff == 0.0
        } else {
            diff / first.abs() < self.tol
        };
        if flat {
            return Some(StopRule::Flat);
        }
        let best = self.argmin()?;
        if m - 1 - best >= self.window {
            return Some(StopRule::Window);
        }
        None
    }

    /// Index of the iterate a fired rule selects.
    pub fn selected(&self, rule: StopRule) -> usize {
        match rule {
            StopRule::Flat => self.values.len() - 1,
            StopRule::Window => self.argmin().unwrap_or(0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feed(values: &[f64], tol: f64, window: usize) -> Option<(usize, StopRule)> {
        let mut s = StoppingState::new(tol, window).unwrap();
        for (i, &v) in values.iter().enumerate() {
            s.push(v);
            if let Some(rule) = s.should_stop() {
                return Some((i + 1, rule));
            }
        }
        None
    }

    #[test]
    fn constant_sequence_is_flat_at_second_value() {
        assert_eq!(feed(&[1.0, 1.0, 1.0], 1e-6, 5), Some((2, StopRule::Flat)));
    }

    #[test]
    fn decreasing_sequence_never_stops_on_window() {
        let values: Vec<f64> = (0..50).map(|i| 1.0 / (1.0 + i as f64)).collect();
        assert_eq!(feed(&values, 1e-12, 3), None);
    }

    #[test]
    fn window_fires_after_stale_minimum() {
        let mut s = StoppingState::new(1e-6, 3).unwrap();
        let values = [1.0, 0.5, 0.6, 0.7, 0.8];
        for (i, &v) in values.iter().enumerate() {
            s.push(v);
            let fired = s.should_stop();
            if i < 4 {
                assert_eq!(fired, None, "fired early at value {}", i + 1);
            } else {
                assert_eq!(fired, Some(StopRule::Window));
                assert_eq!(s.selected(StopRule::Window), 1);
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(StoppingState::new(0.0, 3).is_err());
        assert!(StoppingState::new(1e-6, 0).is_err());
    }
}
