//! Simulated low-precision arithmetic.
//!
//! Values live in `f64` but every kernel result is rounded into a narrower
//! binary format after each scalar operation, accumulating left to right.

mod solvers;

pub use solvers::{arnoldi_diagonal_report, run_under_precision, ChopSolver, DiagonalReport};

use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{invalid, Error, Result};
use crate::linalg::DenseMatrix;
use crate::operators::LinearOperator;

/// A binary floating-point format with a hidden leading bit and
/// round-to-nearest, ties-to-even.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecisionFormat {
    exponent_bits: u32,
    fraction_bits: u32,
    subnormals: bool,
}

impl PrecisionFormat {
    /// IEEE binary16.
    pub const HALF: Self = Self::preset(5, 10);
    /// 5 exponent bits, 2 fraction bits.
    pub const Q52: Self = Self::preset(5, 2);
    /// 4 exponent bits, 3 fraction bits.
    pub const Q43: Self = Self::preset(4, 3);
    /// bfloat16.
    pub const BFLOAT: Self = Self::preset(8, 7);
    pub const SINGLE: Self = Self::preset(8, 23);
    pub const DOUBLE: Self = Self::preset(11, 52);

    const fn preset(exponent_bits: u32, fraction_bits: u32) -> Self {
        Self {
            exponent_bits,
            fraction_bits,
            subnormals: true,
        }
    }

    /// Custom format; it must fit inside `f64`.
    pub fn new(exponent_bits: u32, fraction_bits: u32) -> Result<Self> {
        if !(2..=11).contains(&exponent_bits) {
            return Err(invalid(
                "exponent_bits",
                format!("must be in 2..=11, got {exponent_bits}"),
            ));
        }
        if !(1..=52).contains(&fraction_bits) {
            return Err(invalid(
                "significand_bits",
                format!("must be in 1..=52, got {fraction_bits}"),
            ));
        }
        Ok(Self::preset(exponent_bits, fraction_bits))
    }

    pub fn with_subnormals(mut self, on: bool) -> Self {
        self.subnormals = on;
        self
    }

    pub fn exponent_bits(&self) -> u32 {
        self.exponent_bits
    }

    /// Explicit fraction bits (precision minus one).
    pub fn significand_bits(&self) -> u32 {
        self.fraction_bits
    }

    pub fn subnormals(&self) -> bool {
        self.subnormals
    }

    pub fn emax(&self) -> i32 {
        (1 << (self.exponent_bits - 1)) - 1
    }

    pub fn emin(&self) -> i32 {
        1 - self.emax()
    }

    /// Largest finite value `2^emax (2 − 2^−f)`.
    pub fn max_value(&self) -> f64 {
        pow2(self.emax()) * (2.0 - pow2(-(self.fraction_bits as i32)))
    }

    pub fn min_normal(&self) -> f64 {
        pow2(self.emin())
    }

    /// Smallest positive value, subnormal if enabled.
    pub fn min_positive(&self) -> f64 {
        if self.subnormals {
            pow2(self.emin() - self.fraction_bits as i32)
        } else {
            self.min_normal()
        }
    }

    /// `2^−(f+1)`.
    pub fn unit_roundoff(&self) -> f64 {
        pow2(-(self.fraction_bits as i32) - 1)
    }
}

impl FromStr for PrecisionFormat {
    type Err = Error;

    /// A preset name or `e<exp>m<frac>`, e.g. `e5m2`.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half" => Ok(Self::HALF),
            "q52" => Ok(Self::Q52),
            "q43" => Ok(Self::Q43),
            "bfloat" => Ok(Self::BFLOAT),
            "single" => Ok(Self::SINGLE),
            "double" => Ok(Self::DOUBLE),
            _ => {
                let custom = s
                    .strip_prefix('e')
                    .and_then(|r| r.split_once('m'))
                    .and_then(|(e, m)| Some((e.parse().ok()?, m.parse().ok()?)));
                match custom {
                    Some((e, m)) => Self::new(e, m),
                    None => Err(invalid(
                        "precision",
                        format!("unknown format `{s}` (half, q52, q43, bfloat, single, double or e<E>m<M>)"),
                    )),
                }
            }
        }
    }
}

impl std::fmt::Display for PrecisionFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "e{}m{}", self.exponent_bits, self.fraction_bits)
    }
}

/// Exact `2^k` for `k` in the `f64` range, subnormals included.
fn pow2(k: i32) -> f64 {
    if k >= -1022 {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else {
        f64::from_bits(1u64 << (k + 1074))
    }
}

/// Rounds `x` to the nearest value of `fmt`, ties to even. Values past the
/// overflow threshold become infinite, values below half the smallest
/// positive number become signed zero.
pub fn chop(x: f64, fmt: PrecisionFormat) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let biased = ((x.to_bits() >> 52) & 0x7ff) as i32;
    let mut e = biased - 1023;
    if fmt.subnormals {
        e = e.max(fmt.emin());
    }
    let ulp = pow2(e - fmt.fraction_bits as i32);
    let y = (x / ulp).round_ties_even() * ulp;
    if y.abs() > fmt.max_value() {
        f64::INFINITY.copysign(x)
    } else if !fmt.subnormals && y.abs() < fmt.min_normal() {
        0.0f64.copysign(x)
    } else {
        y
    }
}

/// How `chopped_matvec` treats the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatvecMode {
    /// Apply the operator in double and round each output entry.
    #[default]
    RoundResult,
    /// Round the matrix entries and every product and partial sum; dense operators only.
    PerOperation,
}

/// Snapshot of kernel invocations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct KernelCounts {
    pub norm2: u64,
    pub dot: u64,
    pub axpy: u64,
    pub matvec: u64,
    pub scale: u64,
}

/// Format plus kernel-call accounting.
#[derive(Debug, Default)]
pub struct ChopContext {
    format: Option<PrecisionFormat>,
    mode: MatvecMode,
    norm2: AtomicU64,
    dot: AtomicU64,
    axpy: AtomicU64,
    matvec: AtomicU64,
    scale: AtomicU64,
}

impl ChopContext {
    pub fn new(format: PrecisionFormat) -> Self {
        Self {
            format: Some(format),
            ..Self::default()
        }
    }

    pub fn with_matvec_mode(mut self, mode: MatvecMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn format(&self) -> PrecisionFormat {
        self.format.unwrap_or(PrecisionFormat::DOUBLE)
    }

    pub fn matvec_mode(&self) -> MatvecMode {
        self.mode
    }

    pub fn round(&self, x: f64) -> f64 {
        chop(x, self.format())
    }

    pub fn round_vec(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|&v| self.round(v)).collect()
    }

    pub fn counts(&self) -> KernelCounts {
        KernelCounts {
            norm2: self.norm2.load(Ordering::Relaxed),
            dot: self.dot.load(Ordering::Relaxed),
            axpy: self.axpy.load(Ordering::Relaxed),
            matvec: self.matvec.load(Ordering::Relaxed),
            scale: self.scale.load(Ordering::Relaxed),
        }
    }

    pub fn reset_counts(&self) {
        for c in [&self.norm2, &self.dot, &self.axpy, &self.matvec, &self.scale] {
            c.store(0, Ordering::Relaxed);
        }
    }

    fn bump(counter: &AtomicU64) {
        counter.fetch_add(1, Ordering::Relaxed);
    }
}

/// `chop(√(Σ chop(v_i²)))` with each partial sum chopped.
pub fn chopped_norm2(v: &[f64], ctx: &ChopContext) -> f64 {
    ChopContext::bump(&ctx.norm2);
    let mut sum = 0.0;
    for &x in v {
        let x = ctx.round(x);
        sum = ctx.round(sum + ctx.round(x * x));
    }
    ctx.round(sum.sqrt())
}

/// `Σ chop(x_i y_i)` with each partial sum chopped.
pub fn chopped_dot(x: &[f64], y: &[f64], ctx: &ChopContext) -> f64 {
    ChopContext::bump(&ctx.dot);
    x.iter().zip(y).fold(0.0, |acc, (&a, &b)| {
        ctx.round(acc + ctx.round(ctx.round(a) * ctx.round(b)))
    })
}

/// `chop(y + chop(α x))` entrywise.
pub fn chopped_axpy(alpha: f64, x: &[f64], y: &[f64], ctx: &ChopContext) -> Vec<f64> {
    ChopContext::bump(&ctx.axpy);
    let alpha = ctx.round(alpha);
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| ctx.round(ctx.round(yi) + ctx.round(alpha * ctx.round(xi))))
        .collect()
}

/// `chop(x_i / d)` entrywise.
pub fn chopped_div(x: &[f64], d: f64, ctx: &ChopContext) -> Vec<f64> {
    ChopContext::bump(&ctx.scale);
    let d = ctx.round(d);
    x.iter().map(|&v| ctx.round(ctx.round(v) / d)).collect()
}

/// Matrix–vector product with every multiply and add chopped, row sums accumulated in column order.
pub fn chopped_dense_matvec(m: &DenseMatrix, x: &[f64], ctx: &ChopContext) -> Result<Vec<f64>> {
    crate::error::check_len("x", m.cols(), x.len())?;
    ChopContext::bump(&ctx.matvec);
    let xc = ctx.round_vec(x);
    Ok((0..m.rows())
        .map(|i| (0..m.cols()).fold(0.0, |acc, j| ctx.round(acc + ctx.round(ctx.round(m[(i, j)]) * xc[j]))))
        .collect())
}

/// Operator application according to the context's [`MatvecMode`].
pub fn chopped_matvec(op: &dyn LinearOperator, x: &[f64], ctx: &ChopContext) -> Result<Vec<f64>> {
    match ctx.mode {
        MatvecMode::PerOperation => {
            let m = op.as_dense().ok_or(Error::InvalidParameter {
                name: "matvec_mode",
                reason: "per-operation rounding needs a dense operator".into(),
            })?;
            chopped_dense_matvec(m, x, ctx)
        }
        MatvecMode::RoundResult => {
            crate::error::check_len("x", op.ncols(), x.len())?;
            ChopContext::bump(&ctx.matvec);
            Ok(ctx.round_vec(&op.apply(&ctx.round_vec(x))))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::from_dense;
    use proptest::prelude::*;

    const FORMATS: [PrecisionFormat; 6] = [
        PrecisionFormat::HALF,
        PrecisionFormat::Q52,
        PrecisionFormat::Q43,
        PrecisionFormat::BFLOAT,
        PrecisionFormat::SINGLE,
        PrecisionFormat::DOUBLE,
    ];

    #[test]
    fn format_constants() {
        let h = PrecisionFormat::HALF;
        assert_eq!((h.emax(), h.emin()), (15, -14));
        assert_eq!(h.max_value(), 65504.0);
        assert_eq!(h.min_positive(), 2f64.powi(-24));
        assert_eq!(h.unit_roundoff(), 2f64.powi(-11));
        assert_eq!(PrecisionFormat::Q43.max_value(), 240.0);
        assert_eq!(PrecisionFormat::Q52.max_value(), 57344.0);
        assert_eq!(PrecisionFormat::Q52.min_positive(), 2f64.powi(-16));
        assert_eq!(PrecisionFormat::DOUBLE.max_value(), f64::MAX);
        assert_eq!(PrecisionFormat::SINGLE.max_value(), f32::MAX as f64);
        assert_eq!(pow2(-1074), f64::from_bits(1));
    }

    #[test]
    fn parses_names() {
        assert_eq!("q52".parse::<PrecisionFormat>().unwrap(), PrecisionFormat::Q52);
        assert_eq!("e5m10".parse::<PrecisionFormat>().unwrap(), PrecisionFormat::HALF);
        assert!("e1m3".parse::<PrecisionFormat>().is_err());
        assert!("quad".parse::<PrecisionFormat>().is_err());
    }

    #[test]
    fn half_rounding_examples() {
        let h = PrecisionFormat::HALF;
        assert_eq!(chop(1.0 + 2f64.powi(-11), h), 1.0);
        // the next tie rounds up to the even neighbour
        assert_eq!(chop(1.0 + 3.0 * 2f64.powi(-11), h), 1.0 + 2f64.powi(-9));
        assert_eq!(chop(65520.0, h), f64::INFINITY);
        assert_eq!(chop(-65520.0, h), f64::NEG_INFINITY);
        assert_eq!(chop(65519.0, h), 65504.0);
        assert_eq!(chop(2f64.powi(-25), h), 0.0);
        assert_eq!(chop(1.5 * 2f64.powi(-25), h), 2f64.powi(-24));
        assert!(chop(-1e-30, h).is_sign_negative());
        for f in FORMATS {
            assert_eq!(chop(0.0, f), 0.0);
        }
    }

    #[test]
    fn matches_hardware_single() {
        let mut x = 0.1f64;
        for _ in 0..1000 {
            assert_eq!(chop(x, PrecisionFormat::SINGLE), x as f32 as f64, "{x}");
            x = x * 1.37 + 1e-3;
            if x > 1e30 {
                x = 1e-30;
            }
        }
        assert_eq!(chop(1e-45, PrecisionFormat::SINGLE), 1e-45f32 as f64);
    }

    #[test]
    fn flush_without_subnormals() {
        let f = PrecisionFormat::HALF.with_subnormals(false);
        assert_eq!(chop(2f64.powi(-20), f), 0.0);
        assert_eq!(chop(2f64.powi(-14), f), 2f64.powi(-14));
    }

    #[test]
    fn norm_examples() {
        for f in FORMATS {
            let ctx = ChopContext::new(f);
            assert_eq!(chopped_norm2(&[1.0, 0.0, 0.0], &ctx), 1.0);
        }
        let ctx = ChopContext::new(PrecisionFormat::Q52);
        // squares below half the smallest subnormal 2^-16 vanish
        assert_eq!(chopped_norm2(&vec![2f64.powi(-9); 1000], &ctx), 0.0);
        let ctx = ChopContext::new(PrecisionFormat::Q43);
        assert_eq!(chopped_norm2(&vec![3.5; 100], &ctx), f64::INFINITY);
    }

    #[test]
    fn dot_trace() {
        let ctx = ChopContext::new(PrecisionFormat::HALF);
        let (x, y) = ([1.0 / 3.0, 0.7], [3.0, 1.1]);
        let h = |v: f64| chop(v, PrecisionFormat::HALF);
        let p1 = h(h(x[0]) * h(y[0]));
        let p2 = h(h(x[1]) * h(y[1]));
        assert_eq!(chopped_dot(&x, &y, &ctx), h(h(0.0 + p1) + p2));
        assert_eq!(ctx.counts().dot, 1);
    }

    #[test]
    fn identity_matvec_is_chop() {
        let ctx = ChopContext::new(PrecisionFormat::Q43).with_matvec_mode(MatvecMode::PerOperation);
        let op = from_dense(DenseMatrix::identity(4)).unwrap();
        let x = [0.3, -1.7, 100.0, 1e-3];
        let y = chopped_matvec(&op, &x, &ctx).unwrap();
        assert_eq!(y, ctx.round_vec(&x));
        assert_eq!(ctx.counts().matvec, 1);
    }

    #[test]
    fn double_kernels_are_exact() {
        let ctx = ChopContext::new(PrecisionFormat::DOUBLE).with_matvec_mode(MatvecMode::PerOperation);
        let m = DenseMatrix::from_fn(5, 5, |i, j| 1.0 / (i + j + 1) as f64);
        let x: Vec<f64> = (0..5).map(|i| (i as f64).sin()).collect();
        let exact = m.matvec(&x);
        let y = chopped_matvec(&from_dense(m).unwrap(), &x, &ctx).unwrap();
        for (a, b) in y.iter().zip(&exact) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
        let n = chopped_norm2(&x, &ctx);
        assert!((n - crate::linalg::vector::norm2(&x)).abs() < 1e-15);
        let d = chopped_dot(&x, &exact, &ctx);
        assert!((d - crate::linalg::vector::dot(&x, &exact)).abs() < 1e-15);
        let z = chopped_axpy(0.5, &x, &exact, &ctx);
        assert!(z
            .iter()
            .zip(x.iter().zip(&exact))
            .all(|(z, (a, b))| (z - (b + 0.5 * a)).abs() < 1e-15));
        let c = ctx.counts();
        assert_eq!((c.norm2, c.dot, c.axpy, c.matvec), (1, 1, 1, 1));
        ctx.reset_counts();
        assert_eq!(ctx.counts(), KernelCounts::default());
    }

    #[test]
    fn per_operation_needs_dense() {
        let ctx = ChopContext::new(PrecisionFormat::HALF).with_matvec_mode(MatvecMode::PerOperation);
        let op = crate::operators::EntryOperator::new(3, 3, |i, j| (i + j) as f64);
        assert!(chopped_matvec(&op, &[1.0; 3], &ctx).is_err());
    }

    fn any_format() -> impl Strategy<Value = PrecisionFormat> {
        (0..FORMATS.len()).prop_map(|i| FORMATS[i])
    }

    fn any_value() -> impl Strategy<Value = f64> {
        prop_oneof![
            -1e6..1e6f64,
            -1e-4..1e-4f64,
            (-40i32..40, -1.0..1.0f64).prop_map(|(e, m)| m * 2f64.powi(e)),
        ]
    }

    proptest! {
        #[test]
        fn chop_is_idempotent(x in any_value(), f in any_format()) {
            let y = chop(x, f);
            prop_assert_eq!(chop(y, f).to_bits(), y.to_bits());
        }

        #[test]
        fn chop_is_monotone(a in any_value(), b in any_value(), f in any_format()) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(chop(lo, f) <= chop(hi, f));
        }

        #[test]
        fn chop_is_nearest(x in -1e4..1e4f64, f in any_format()) {
            let y = chop(x, f);
            prop_assume!(y.is_finite());
            // no representable neighbour is closer
            let ulp = pow2(((y.abs().max(f.min_normal()).log2().floor()) as i32) - f.significand_bits() as i32);
            prop_assert!((x - y).abs() <= ulp);
        }

        #[test]
        fn double_is_identity(x in any::<f64>()) {
            prop_assume!(x.is_finite());
            prop_assert_eq!(chop(x, PrecisionFormat::DOUBLE).to_bits(), x.to_bits());
        }
    }
}
