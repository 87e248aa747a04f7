use crate::krylov::KrylovDecomposition;

/// Why an iteration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIters,
    Breakdown,
    /// `|Ĝ(k+1) − Ĝ(k)| / Ĝ(1)` fell below the tolerance.
    GcvFlat,
    /// The running minimum of `Ĝ` did not improve within the window.
    GcvWindow,
    /// A norm evaluated in simulated precision underflowed to zero.
    NormUnderflow,
    /// A norm evaluated in simulated precision overflowed or became NaN.
    NormOverflow,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::MaxIters => "max_iters",
            StopReason::Breakdown => "breakdown",
            StopReason::GcvFlat => "gcv_flat",
            StopReason::GcvWindow => "gcv_window",
            StopReason::NormUnderflow => "norm_underflow",
            StopReason::NormOverflow => "norm_overflow",
        }
    }

    /// True for terminations caused by arithmetic failure rather than by a rule.
    pub fn is_abnormal(self) -> bool {
        matches!(self, StopReason::NormUnderflow | StopReason::NormOverflow)
    }
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// State after iteration `iter`.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    /// One-based iteration index `k`.
    pub iter: usize,
    /// `x_k`, absent in lean mode.
    pub x: Option<Vec<f64>>,
    /// Coefficients `y_k` with `x_k = x₀ + B_k y_k` (Krylov methods only).
    pub coefficients: Option<Vec<f64>>,
    /// `‖b − A x_k‖`.
    pub residual_norm: f64,
    /// `‖β e₁ − H y_k‖` (Krylov methods only).
    pub quasi_residual_norm: Option<f64>,
    pub relative_error: Option<f64>,
    pub lambda: Option<f64>,
    pub ghat: Option<f64>,
}

impl IterationRecord {
    pub(crate) fn new(iter: usize, residual_norm: f64) -> Self {
        Self {
            iter,
            x: None,
            coefficients: None,
            residual_norm,
            quasi_residual_norm: None,
            relative_error: None,
            lambda: None,
            ghat: None,
        }
    }
}

/// Per-iteration records of one solve.
#[derive(Debug, Clone)]
pub struct IterationHistory {
    pub method: &'static str,
    pub records: Vec<IterationRecord>,
    pub stop_reason: StopReason,
    /// Index into `records` of the iterate chosen by a stopping rule.
    pub selected: Option<usize>,
    pub x0: Vec<f64>,
    /// Krylov decomposition behind the iterates, kept for lean-mode reconstruction.
    pub decomposition: Option<KrylovDecomposition>,
}

impl IterationHistory {
    pub(crate) fn new(method: &'static str, x0: Vec<f64>) -> Self {
        Self {
            method,
            records: Vec::new(),
            stop_reason: StopReason::MaxIters,
            selected: None,
            x0,
            decomposition: None,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// The iterate selected by a stopping rule, or the last one.
    pub fn selected_record(&self) -> Option<&IterationRecord> {
        match self.selected {
            Some(i) => self.records.get(i),
            None => self.records.last(),
        }
    }

    pub fn residual_norms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.residual_norm).collect()
    }

    /// Relative errors, NaN where no reference solution was given.
    pub fn relative_errors(&self) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| r.relative_error.unwrap_or(f64::NAN))
            .collect()
    }

    /// `x_k` for record index `i`, rebuilt from the coefficients in lean mode.
    pub fn solution(&self, i: usize) -> Option<Vec<f64>> {
        let rec = self.records.get(i)?;
        if let Some(x) = &rec.x {
            return Some(x.clone());
        }
        let d = self.decomposition.as_ref()?;
        let y = rec.coefficients.as_ref()?;
        Some(d.combine(&self.x0, y))
    }
}
