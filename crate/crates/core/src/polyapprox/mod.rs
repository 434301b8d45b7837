//! Polynomial approximation of monotone functions through a smoothed step:
//! step → `½ + ½ erf` → truncated Maclaurin series → sum of shifted copies.

pub mod bigfloat;
mod monotone;
mod poly;

pub use bigfloat::BigFloat;
pub use monotone::{
    build_monotone_approx, check_derivative_regimes, check_guarantees, derivative_regime_bounds, xp_degree_bound,
    sample_guarantees, xp_spec, BuildReport, DerivativeRegime, GuaranteeCheck, GuaranteeSample, MonotoneSpec,
    MAX_PRECISION_BITS,
};
pub use poly::{compose_affine, decimal_digits, trace_poly_functional, truncated_maclaurin, Poly, PolyRecord};

use bigfloat::inv_sqrt_pi;

/// Unit step with `s(0) = ½`.
pub fn heaviside(x: f64) -> f64 {
    if x < 0.0 {
        0.0
    } else if x > 0.0 {
        1.0
    } else {
        0.5
    }
}

/// `Φ(x) = ½ + ½ erf(x)` to `precision_bits` bits.
///
/// Sums the Maclaurin series with enough guard bits to absorb its
/// cancellation, about `x² log₂ e` for large `|x|`.
pub fn sigmoid(x: f64, precision_bits: u32) -> BigFloat {
    let guard = (x * x * std::f64::consts::LOG2_E).ceil() as u32 + 64;
    let work = precision_bits + guard;
    let xb = BigFloat::from_f64(x, work).expect("finite argument");
    let x2 = xb.mul(&xb);
    // term_i = x^{2i+1} / i!
    let mut term = xb.clone();
    let mut sum = BigFloat::zero(work);
    let stop = -(work as f64) - 8.0;
    let mut i: u64 = 0;
    loop {
        let t = term.div_u64(2 * i + 1);
        sum = if i % 2 == 0 { sum.add(&t) } else { sum.sub(&t) };
        i += 1;
        term = term.mul(&x2).div_u64(i);
        if term.is_zero() || (i as f64 > x * x && term.log2_abs() < stop) {
            break;
        }
    }
    let half = BigFloat::one(work).div_u64(2);
    half.add(&sum.mul(&inv_sqrt_pi(work))).with_prec(precision_bits)
}

/// `Φ(x)` rounded to `f64`.
pub fn sigmoid_f64(x: f64) -> f64 {
    if x.abs() > 40.0 {
        return heaviside(x);
    }
    sigmoid(x, 64).to_f64()
}
