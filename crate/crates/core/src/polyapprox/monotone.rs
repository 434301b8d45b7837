use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::poly::{compose_affine, truncated_maclaurin, Poly};
use crate::error::{LabError, Result};

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type Local = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Largest precision the builder will attempt.
pub const MAX_PRECISION_BITS: u32 = 16_384;

/// A continuous nondecreasing map of `[0, A]` onto `[0, 1]` with its
/// Lipschitz data and target accuracy.
#[derive(Clone)]
pub struct MonotoneSpec {
    label: String,
    f: Scalar,
    a: f64,
    l: f64,
    eps: f64,
    local: Local,
}

impl fmt::Debug for MonotoneSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneSpec")
            .field("label", &self.label)
            .field("a", &self.a)
            .field("l", &self.l)
            .field("eps", &self.eps)
            .finish_non_exhaustive()
    }
}

impl MonotoneSpec {
    /// `local_lipschitz(x, δ)` must return the steepest slope of `f` among
    /// points whose values lie within `δ` of `f(x)`.
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        a: f64,
        l: f64,
        eps: f64,
        local_lipschitz: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() || !(l > 0.0) || !l.is_finite() {
            return Err(LabError::Validation(format!("need A > 0 and L > 0, got A={a}, L={l}")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(LabError::Validation(format!("eps must lie in (0, 1), got {eps}")));
        }
        let spec = Self { label: label.into(), f: Arc::new(f), a, l, eps, local: Arc::new(local_lipschitz) };
        if spec.f(0.0).abs() > 1e-9 || (spec.f(a) - 1.0).abs() > 1e-9 {
            return Err(LabError::Validation(format!(
                "f must map [0, A] onto [0, 1]: f(0) = {}, f(A) = {}",
                spec.f(0.0),
                spec.f(a)
            )));
        }
        let mut prev = spec.f(0.0);
        for i in 0..=200 {
            let x = a * i as f64 / 200.0;
            let y = spec.f(x);
            if y < prev - 1e-12 {
                return Err(LabError::Validation(format!("f decreases near x = {x}")));
            }
            prev = y;
            let lx = spec.local_lipschitz(x, eps);
            if !(lx <= l * (1.0 + 1e-12)) {
                return Err(LabError::Validation(format!("local Lipschitz constant {lx} at x = {x} exceeds L = {l}")));
            }
        }
        Ok(spec)
    }

    /// `x ↦ x^p` on `[0, 1]`, `p >= 1`.
    pub fn power(p: f64, eps: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(LabError::Validation(format!("power needs p >= 1, got {p}")));
        }
        Self::new(
            format!("x^{p}"),
            move |x| x.max(0.0).powf(p),
            1.0,
            p,
            eps,
            move |x, d| {
                let b = (x.max(0.0).powf(p) + d).min(1.0).powf(1.0 / p);
                p * b.powf(p - 1.0)
            },
        )
    }

    /// Piecewise-linear interpolation of `knots`, which must start at `(0, 0)`,
    /// end at `(A, 1)`, and be nondecreasing in both coordinates.
    pub fn ramp(knots: Vec<(f64, f64)>, eps: f64) -> Result<Self> {
        if knots.len() < 2 {
            return Err(LabError::Validation("ramp needs at least two knots".into()));
        }
        if knots.windows(2).any(|w| !(w[1].0 > w[0].0) || w[1].1 < w[0].1) {
            return Err(LabError::Validation("ramp knots must increase in x and not decrease in y".into()));
        }
        let a = knots[knots.len() - 1].0;
        let slopes: Vec<(f64, f64, f64)> =
            knots.windows(2).map(|w| (w[0].1, w[1].1, (w[1].1 - w[0].1) / (w[1].0 - w[0].0))).collect();
        let l = slopes.iter().map(|s| s.2).fold(0.0, f64::max);
        let k1 = knots.clone();
        let f = move |x: f64| {
            let x = x.clamp(0.0, a);
            let i = k1.windows(2).position(|w| x <= w[1].0).unwrap_or(k1.len() - 2);
            let (x0, y0) = k1[i];
            let (x1, y1) = k1[i + 1];
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        };
        let f2 = f.clone();
        let local = move |x: f64, d: f64| {
            let y = f2(x);
            slopes.iter().filter(|s| s.1 >= y - d && s.0 <= y + d).map(|s| s.2).fold(0.0, f64::max)
        };
        Self::new(format!("ramp{knots:?}"), f, a, l.max(f64::MIN_POSITIVE), eps, local)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn f(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn local_lipschitz(&self, x: f64, smoothing: f64) -> f64 {
        (self.local)(x, smoothing)
    }

    /// Smallest `x` with `f(x) >= y`, by bisection to 1e−12 or better.
    pub fn inverse(&self, y: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, self.a);
        for _ in 0..200 {
            if hi - lo <= 1e-15 * self.a.max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.f(mid) >= y {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    fn log_factor(&self) -> f64 {
        (self.eps.powi(-2)).ln().sqrt()
    }

    /// `m = (2L/ε) √(ln ε^{−2})`.
    pub fn slope(&self) -> f64 {
        2.0 * self.l / self.eps * self.log_factor()
    }

    /// `m_x` built from the `δ`-smoothed local constant at `x`.
    pub fn local_slope(&self, x: f64, smoothing: f64) -> f64 {
        2.0 * self.local_lipschitz(x, smoothing) / self.eps * self.log_factor()
    }

    /// Least odd `n` with `m A <= ε^{1/n} √n / 2`.
    pub fn series_order(&self) -> usize {
        let target = self.slope() * self.a;
        let mut n = 1usize;
        while target > self.eps.powf(1.0 / n as f64) * (n as f64).sqrt() / 2.0 {
            n += 2;
        }
        n
    }

    /// Mantissa bits the builder needs: the composed coefficients reach about
    /// `e^{(m(1+A))²}` while the result is `O(1)`.
    pub fn required_precision_bits(&self) -> u64 {
        let m = self.slope();
        let degree = 2 * self.series_order() + 1;
        let cancel = (m * (1.0 + self.a)).powi(2) * std::f64::consts::LOG2_E;
        cancel.ceil() as u64 + 2 * ((degree + 1) as f64).log2().ceil() as u64 + 64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuildReport {
    pub label: String,
    pub eps: f64,
    pub a: f64,
    /// Number of range slabs `t = ⌈1/ε⌉`.
    pub slabs: usize,
    /// Height of the last slab, which may be shorter than `ε`.
    pub last_slab: f64,
    pub n: usize,
    pub degree: usize,
    pub m: f64,
    /// `p_0 = 0, …, p_t = A`.
    pub breakpoints: Vec<f64>,
    /// `m_1, …, m_{t−1}`.
    pub m_i: Vec<f64>,
    pub precision_bits: u32,
    pub required_precision_bits: u64,
    /// `ln α(poly)`.
    pub alpha_ln: f64,
    /// `2 ((A+1) m)²`, the log of the `α` bound.
    pub alpha_bound_ln: f64,
}

/// Assembles `ε Σ_{i=1}^{t−1} p_n(m_i (x − p_i))`.
pub fn build_monotone_approx(spec: &MonotoneSpec, precision_bits: u32) -> Result<(Poly, BuildReport)> {
    let required = spec.required_precision_bits();
    if (precision_bits as u64) < required {
        return Err(LabError::Precision(format!(
            "{} at eps = {} needs precision_bits >= {required}, got {precision_bits}",
            spec.label, spec.eps
        )));
    }
    let eps = spec.eps;
    let slabs = (1.0 / eps - 1e-12).ceil() as usize;
    let mut breakpoints = vec![0.0];
    breakpoints.extend((1..slabs).map(|i| spec.inverse(i as f64 * eps)));
    breakpoints.push(spec.a);
    let m = spec.slope();
    let m_i: Vec<f64> = breakpoints[1..slabs].iter().map(|&q| spec.local_slope(q, eps / 2.0)).collect();
    let n = spec.series_order();
    let pn = truncated_maclaurin(n, precision_bits)?;
    let mut sum = Poly::zero(precision_bits);
    for (&q, &mi) in breakpoints[1..slabs].iter().zip(&m_i) {
        if mi > 0.0 {
            sum = sum.add(&compose_affine(&pn, mi, q)?);
        }
    }
    let poly = sum.scale_f64(eps);
    let report = BuildReport {
        label: spec.label.clone(),
        eps,
        a: spec.a,
        slabs,
        last_slab: 1.0 - (slabs - 1) as f64 * eps,
        n,
        degree: poly.degree(),
        m,
        breakpoints,
        m_i,
        precision_bits,
        required_precision_bits: required,
        alpha_ln: poly.alpha_ln(),
        alpha_bound_ln: 2.0 * ((spec.a + 1.0) * m).powi(2),
    };
    Ok((poly, report))
}

/// Worst-case margins of the construction's guarantees on a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuaranteeCheck {
    pub points: usize,
    /// `min (f − poly + 2ε)`; nonnegative when the lower side holds.
    pub lower_margin: f64,
    /// `min (poly + 3ε − f)`.
    pub upper_margin: f64,
    /// `min (poly′ + m ε²)`; positive when the derivative floor holds.
    pub derivative_floor_margin: f64,
    /// `min (ε m_x + m ε² − poly′)`.
    pub derivative_ceiling_margin: f64,
    pub max_abs_error: f64,
    pub alpha_ok: bool,
}

impl GuaranteeCheck {
    pub fn sandwich_ok(&self) -> bool {
        self.lower_margin >= 0.0 && self.upper_margin >= 0.0
    }

    pub fn derivative_ok(&self) -> bool {
        self.derivative_floor_margin > 0.0 && self.derivative_ceiling_margin > 0.0
    }

    pub fn all_ok(&self) -> bool {
        self.sandwich_ok() && self.derivative_ok() && self.alpha_ok
    }
}

/// One grid node of a guarantee check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuaranteeSample {
    pub x: f64,
    pub f: f64,
    pub value: f64,
    pub derivative: f64,
    /// `ε m_x + m ε²`.
    pub derivative_ceiling: f64,
}

/// Evaluates `poly` and `poly′` on `points` equally spaced nodes of `[0, A]`.
pub fn sample_guarantees(
    poly: &Poly,
    spec: &MonotoneSpec,
    report: &BuildReport,
    points: usize,
) -> (Vec<GuaranteeSample>, GuaranteeCheck) {
    use rayon::prelude::*;
    let eps = spec.eps;
    let slack = report.m * eps * eps;
    let samples: Vec<GuaranteeSample> = (0..points)
        .into_par_iter()
        .map(|i| {
            let x = spec.a * i as f64 / (points - 1).max(1) as f64;
            let (value, derivative) = poly.eval_with_derivative(x);
            GuaranteeSample {
                x,
                f: spec.f(x),
                value,
                derivative,
                derivative_ceiling: eps * spec.local_slope(x, eps) + slack,
            }
        })
        .collect();
    let mut out = GuaranteeCheck {
        points,
        lower_margin: f64::INFINITY,
        upper_margin: f64::INFINITY,
        derivative_floor_margin: f64::INFINITY,
        derivative_ceiling_margin: f64::INFINITY,
        max_abs_error: 0.0,
        alpha_ok: report.alpha_ln <= report.alpha_bound_ln,
    };
    for s in &samples {
        out.lower_margin = out.lower_margin.min(s.f - s.value + 2.0 * eps);
        out.upper_margin = out.upper_margin.min(s.value + 3.0 * eps - s.f);
        out.derivative_floor_margin = out.derivative_floor_margin.min(s.derivative + slack);
        out.derivative_ceiling_margin = out.derivative_ceiling_margin.min(s.derivative_ceiling - s.derivative);
        out.max_abs_error = out.max_abs_error.max((s.value - s.f).abs());
    }
    (samples, out)
}

/// Worst-case margins of [`sample_guarantees`].
pub fn check_guarantees(poly: &Poly, spec: &MonotoneSpec, report: &BuildReport, points: usize) -> GuaranteeCheck {
    sample_guarantees(poly, spec, report, points).1
}

/// `x^p` on `[0, 1]` with `ε = k^{−p}`, for `p ∈ [1, 1.1]`.
///
/// Fails with a precision error when the build would need more than
/// [`MAX_PRECISION_BITS`], naming the largest `k` that still fits.
pub fn xp_spec(k: usize, p: f64) -> Result<MonotoneSpec> {
    if k < 2 {
        return Err(LabError::Validation(format!("k must be >= 2, got {k}")));
    }
    if !(1.0..=1.1).contains(&p) {
        return Err(LabError::Validation(format!("p must lie in [1, 1.1], got {p}")));
    }
    let spec = MonotoneSpec::power(p, (k as f64).powf(-p))?;
    let need = spec.required_precision_bits();
    if need > MAX_PRECISION_BITS as u64 {
        let feasible = (2..k)
            .rev()
            .find(|&kk| {
                MonotoneSpec::power(p, (kk as f64).powf(-p))
                    .map(|s| s.required_precision_bits() <= MAX_PRECISION_BITS as u64)
                    .unwrap_or(false)
            })
            .unwrap_or(1);
        return Err(LabError::Precision(format!(
            "k = {k} at p = {p} needs precision_bits >= {need} (limit {MAX_PRECISION_BITS}); largest feasible k is {feasible}"
        )));
    }
    Ok(spec)
}

/// `2^9 p³ k^{2p} ln k`.
pub fn xp_degree_bound(k: usize, p: f64) -> f64 {
    let k = k as f64;
    512.0 * p.powi(3) * k.powf(2.0 * p) * k.ln()
}

/// One of the three derivative regimes for the `x^p` approximant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeRegime {
    pub lo: f64,
    pub hi: f64,
    pub bound: f64,
    pub max_derivative: f64,
    pub samples: usize,
}

impl DerivativeRegime {
    pub fn holds(&self) -> bool {
        self.max_derivative <= self.bound
    }
}

/// Splits `[0, 1]` at `j k^{2/(3p)−1}` and `5 j k^{1/p−1}` and pairs each
/// piece with its derivative ceiling.
pub fn derivative_regime_bounds(k: usize, p: f64, j: f64) -> [(f64, f64, f64); 3] {
    let kf = k as f64;
    let root = (2.0 * p * kf.ln()).sqrt();
    let b1 = (j * kf.powf(2.0 / (3.0 * p) - 1.0)).min(1.0);
    let b2 = (5.0 * j * kf.powf(1.0 / p - 1.0)).clamp(b1, 1.0);
    [
        (0.0, b1, 4.0 * p * (j + 1.0).powf(p - 1.0) * root * kf.powf(5.0 / 3.0 - 2.0 / (3.0 * p) - p)),
        (b1, b2, 4.0 * p * (5.0 * j).powf(p - 1.0) * root * kf.powf(2.0 - p - 1.0 / p)),
        (b2, 1.0, 4.0 * p * root),
    ]
}

/// Largest `poly′` within each regime on a uniform grid of `points` nodes.
pub fn check_derivative_regimes(poly: &Poly, k: usize, p: f64, j: f64, points: usize) -> Vec<DerivativeRegime> {
    use rayon::prelude::*;
    let derivs: Vec<(f64, f64)> = (0..points)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / (points - 1).max(1) as f64;
            (x, poly.eval_with_derivative(x).1)
        })
        .collect();
    derivative_regime_bounds(k, p, j)
        .iter()
        .enumerate()
        .map(|(r, &(lo, hi, bound))| {
            let inside: Vec<f64> = derivs
                .iter()
                .filter(|(x, _)| if r == 0 { *x <= hi } else { *x > lo && *x <= hi })
                .map(|d| d.1)
                .collect();
            DerivativeRegime {
                lo,
                hi,
                bound,
                max_derivative: inside.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                samples: inside.len(),
            }
        })
        .collect()
}
