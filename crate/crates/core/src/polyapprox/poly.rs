use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::bigfloat::{inv_sqrt_pi, BigFloat};
use crate::error::{LabError, Result};
use crate::linalg::{squared_singular_values, C64};

/// Real polynomial with arbitrary-precision coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<BigFloat>,
    precision_bits: u32,
    alpha: BigFloat,
}

/// JSON form of a [`Poly`]. Coefficients are decimal strings with enough
/// significant digits to reproduce every mantissa bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyRecord {
    pub degree: usize,
    pub precision_bits: u32,
    pub coeffs: Vec<String>,
}

impl Poly {
    pub fn new(coeffs: Vec<BigFloat>, precision_bits: u32) -> Self {
        let mut coeffs: Vec<BigFloat> = coeffs.into_iter().map(|c| c.with_prec(precision_bits)).collect();
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        let alpha = coeffs.iter().fold(BigFloat::zero(precision_bits), |acc, c| acc.add(&c.abs()));
        Self { coeffs, precision_bits, alpha }
    }

    pub fn from_f64(coeffs: &[f64], precision_bits: u32) -> Result<Self> {
        let c = coeffs.iter().map(|&x| BigFloat::from_f64(x, precision_bits)).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(c, precision_bits))
    }

    pub fn zero(precision_bits: u32) -> Self {
        Self::new(Vec::new(), precision_bits)
    }

    pub fn coeffs(&self) -> &[BigFloat] {
        &self.coeffs
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    /// Sum of absolute values of the coefficients.
    pub fn alpha(&self) -> &BigFloat {
        &self.alpha
    }

    /// `ln α`, finite even when `α` overflows `f64`.
    pub fn alpha_ln(&self) -> f64 {
        self.alpha.log2_abs() * std::f64::consts::LN_2
    }

    pub fn eval(&self, x: &BigFloat) -> BigFloat {
        let mut acc = BigFloat::zero(self.precision_bits);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    /// Horner evaluation at an `f64` point; rounding happens in working precision.
    pub fn eval_big_f64(&self, x: f64) -> BigFloat {
        let mut acc = BigFloat::zero(self.precision_bits);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul_f64(x).add(c);
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.eval_big_f64(x).to_f64()
    }

    /// Value and first derivative at `x` in one Horner pass.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut acc = BigFloat::zero(self.precision_bits);
        let mut dacc = BigFloat::zero(self.precision_bits);
        for c in self.coeffs.iter().rev() {
            dacc = dacc.mul_f64(x).add(&acc);
            acc = acc.mul_f64(x).add(c);
        }
        (acc.to_f64(), dacc.to_f64())
    }

    pub fn derivative(&self) -> Poly {
        let c = self.coeffs.iter().enumerate().skip(1).map(|(j, c)| c.mul_f64(j as f64)).collect();
        Poly::new(c, self.precision_bits)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = BigFloat::zero(self.precision_bits);
        let c = (0..n)
            .map(|j| self.coeffs.get(j).unwrap_or(&zero).add(other.coeffs.get(j).unwrap_or(&zero)))
            .collect();
        Poly::new(c, self.precision_bits)
    }

    pub fn scale_f64(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c.mul_f64(s)).collect(), self.precision_bits)
    }

    pub fn to_record(&self) -> PolyRecord {
        let digits = decimal_digits(self.precision_bits);
        PolyRecord {
            degree: self.degree(),
            precision_bits: self.precision_bits,
            coeffs: self.coeffs.iter().map(|c| c.to_sci_string(digits)).collect(),
        }
    }

    pub fn from_record(rec: &PolyRecord) -> Result<Self> {
        let coeffs = rec
            .coeffs
            .iter()
            .map(|s| BigFloat::parse(s, rec.precision_bits))
            .collect::<Result<Vec<_>>>()?;
        let p = Poly::new(coeffs, rec.precision_bits);
        if p.degree() != rec.degree {
            return Err(LabError::Serialization(format!(
                "record declares degree {} but has {} coefficients",
                rec.degree,
                rec.coeffs.len()
            )));
        }
        Ok(p)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_record())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_record(&serde_json::from_str(s)?)
    }
}

/// Significant decimal digits that pin down a `bits`-bit mantissa.
pub fn decimal_digits(bits: u32) -> usize {
    (bits as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2
}

/// `p_n(x) = ½ + (1/√π) Σ_{i=0}^{n} (−1)^i x^{2i+1} / (i! (2i+1))`, `n` odd.
pub fn truncated_maclaurin(n: usize, precision_bits: u32) -> Result<Poly> {
    if n % 2 == 0 {
        return Err(LabError::Domain(format!("truncation order must be odd, got {n}")));
    }
    let work = precision_bits + 32;
    let mut coeffs = vec![BigFloat::zero(work); 2 * n + 2];
    coeffs[0] = BigFloat::one(work).div_u64(2);
    // inv_fact = 1/(√π · i!)
    let mut inv_fact = inv_sqrt_pi(work);
    for i in 0..=n {
        if i > 0 {
            inv_fact = inv_fact.div_u64(i as u64);
        }
        let c = inv_fact.div_u64(2 * i as u64 + 1);
        coeffs[2 * i + 1] = if i % 2 == 0 { c } else { c.neg() };
    }
    Ok(Poly::new(coeffs, precision_bits))
}

/// `log2` of a bound on the coefficients produced by [`compose_affine`].
fn composed_magnitude_log2(poly: &Poly, m: f64, q: f64) -> f64 {
    let r = (m.abs() * (1.0 + q.abs())).max(f64::MIN_POSITIVE).log2();
    let terms: Vec<f64> =
        poly.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(j, c)| c.log2_abs() + j as f64 * r).collect();
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + terms.iter().map(|t| (t - top).exp2()).sum::<f64>().log2()
}

/// Coefficients of `x ↦ poly(m (x − q))`.
///
/// Scales by powers of `m`, then shifts by `q` with synthetic division. Fails
/// when the intermediate coefficients would swamp the mantissa width.
pub fn compose_affine(poly: &Poly, m: f64, q: f64) -> Result<Poly> {
    if !(m > 0.0) || !m.is_finite() || !q.is_finite() {
        return Err(LabError::Domain(format!("compose_affine needs m > 0 and finite q, got m={m}, q={q}")));
    }
    let prec = poly.precision_bits;
    let magnitude = composed_magnitude_log2(poly, m, q);
    if magnitude > prec as f64 - 64.0 {
        let need = (magnitude + 64.0 + 2.0 * ((poly.coeffs.len() + 1) as f64).log2()).ceil() as u64;
        return Err(LabError::Precision(format!(
            "composition coefficients reach 2^{magnitude:.0}; rebuild with precision_bits >= {need}"
        )));
    }
    let mut c: Vec<BigFloat> = Vec::with_capacity(poly.coeffs.len());
    let mut power = BigFloat::one(prec);
    for a in &poly.coeffs {
        c.push(a.mul(&power));
        power = power.mul_f64(m);
    }
    let n = c.len();
    if q != 0.0 && n > 1 {
        let s = -q;
        for i in 0..n - 1 {
            for j in (i..n - 1).rev() {
                c[j] = c[j].add(&c[j + 1].mul_f64(s));
            }
        }
    }
    Ok(Poly::new(c, prec))
}

/// `Σ_i poly(b_i²)` over the singular values `b_i` of a unit-Frobenius `M`.
pub fn trace_poly_functional(m: &DMatrix<C64>, poly: &Poly) -> Result<f64> {
    let fro = m.norm();
    if (fro - 1.0).abs() > 1e-10 {
        return Err(LabError::Validation(format!("matrix has Frobenius norm {fro}, expected 1")));
    }
    let total = squared_singular_values(m)
        .into_iter()
        .fold(BigFloat::zero(poly.precision_bits), |acc, b2| acc.add(&poly.eval_big_f64(b2)));
    Ok(total.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn maclaurin_low_order() {
        assert!(matches!(truncated_maclaurin(2, 64), Err(LabError::Domain(_))));
        let p1 = truncated_maclaurin(1, 128).unwrap();
        assert_eq!(p1.degree(), 3);
        let s = 1.0 / std::f64::consts::PI.sqrt();
        for x in [-1.0, 0.3, 2.0] {
            let expected = 0.5 + (x - x * x * x / 3.0) * s;
            assert!((p1.eval_f64(x) - expected).abs() < 1e-15);
        }
        for n in [1, 3, 11] {
            assert_eq!(truncated_maclaurin(n, 128).unwrap().eval_f64(0.0), 0.5);
        }
    }

    #[test]
    fn affine_identity_and_degree() {
        let p = truncated_maclaurin(5, 128).unwrap();
        assert_eq!(compose_affine(&p, 1.0, 0.0).unwrap(), p);
        assert_eq!(compose_affine(&p, 2.5, 0.3).unwrap().degree(), p.degree());
        assert!(compose_affine(&p, 0.0, 0.3).is_err());
    }

    #[test]
    fn affine_matches_direct_evaluation() {
        let prec = 256;
        let p = truncated_maclaurin(11, prec).unwrap();
        let c = compose_affine(&p, 2.0, 0.5).unwrap();
        let mut rng = crate::sampling::RngSeed::new(5, 0).rng();
        for _ in 0..100 {
            let x: f64 = rng.random_range(-1.0..2.0);
            let arg = BigFloat::from_f64(x, prec).unwrap().sub(&BigFloat::from_f64(0.5, prec).unwrap()).mul_f64(2.0);
            let direct = p.eval(&arg);
            let diff = c.eval_big_f64(x).sub(&direct);
            assert!(diff.is_zero() || diff.log2_abs() < -(prec as f64) / 2.0);
        }
    }

    #[test]
    fn too_little_precision() {
        let p = truncated_maclaurin(201, 64).unwrap();
        assert!(matches!(compose_affine(&p, 20.0, 1.0), Err(LabError::Precision(_))));
    }

    #[test]
    fn json_round_trip() {
        let p = compose_affine(&truncated_maclaurin(7, 192).unwrap(), 3.0, 0.25).unwrap();
        let back = Poly::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(back, p);
        assert_eq!(Poly::zero(64).alpha().to_f64(), 0.0);
    }

    #[test]
    fn trace_of_identity_poly() {
        let x = Poly::from_f64(&[0.0, 1.0], 128).unwrap();
        let mut m = DMatrix::<C64>::zeros(2, 4);
        m[(0, 0)] = C64::new(0.6, 0.0);
        m[(1, 3)] = C64::new(0.0, 0.8);
        assert!((trace_poly_functional(&m, &x).unwrap() - 1.0).abs() < 1e-14);
        let bad = m.scale(2.0);
        assert!(trace_poly_functional(&bad, &x).is_err());
    }
}
