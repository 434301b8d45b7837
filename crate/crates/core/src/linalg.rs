//! Dense complex linear algebra: reshaping between `C^k ⊗ C^d` and
//! `k × d` matrices, partial traces, Schatten norms and entropies.
//!
//! Vectors in `C^k ⊗ C^d` are indexed as `i * d + j` for the product basis
//! element `e_i ⊗ e_j`; [`op_reshape`] sends that coefficient to entry
//! `(i, j)` of a `k × d` matrix.

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{LabError, Result};

pub type C64 = Complex<f64>;

pub const UNIT_NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const EIGEN_FLOOR: f64 = -1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as exact zeros inside logarithms.
pub const EIGEN_CLAMP: f64 = 1e-12;

/// Logarithm base used for every entropy in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    /// Base 2 (bits). The default.
    Bits,
    /// Natural logarithm (nats).
    Nats,
}

impl Default for LogBase {
    fn default() -> Self {
        LogBase::Bits
    }
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Bits => x.log2(),
            LogBase::Nats => x.ln(),
        }
    }

    /// Converts a quantity measured in nats into this base.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::Bits => nats / std::f64::consts::LN_2,
            LogBase::Nats => nats,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogBase::Bits => "bits",
            LogBase::Nats => "nats",
        }
    }
}

/// Dense complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(LabError::Shape("matrix dimensions must be positive".into()));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LabError::Validation("matrix has non-finite entries".into()));
        }
        Ok(Self(m))
    }

    /// Builds a matrix from entries listed row by row.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(LabError::Shape(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(rows, cols, entries))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn conjugate(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖U†U − 𝟙‖_F`; zero for an exact isometry.
    pub fn isometry_defect(&self) -> f64 {
        let gram = self.0.adjoint() * &self.0;
        let n = gram.nrows();
        (gram - DMatrix::<C64>::identity(n, n))
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Row-major flattening, the inverse of [`op_reshape`].
    pub fn vec(&self) -> DVector<C64> {
        let (r, c) = self.0.shape();
        DVector::from_fn(r * c, |idx, _| self.0[(idx / c, idx % c)])
    }
}

/// Unit vector in `C^n` (ℓ2 norm within `1e-12` of one).
#[derive(Debug, Clone, PartialEq)]
pub struct UnitVector(DVector<C64>);

impl UnitVector {
    pub fn new(v: DVector<C64>) -> Result<Self> {
        if v.is_empty() {
            return Err(LabError::Shape("unit vector of dimension 0".into()));
        }
        let norm = v.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(LabError::Validation(format!(
                "vector norm {norm} is not within {UNIT_NORM_TOL:e} of 1"
            )));
        }
        Ok(Self(v))
    }

    /// Rescales a nonzero vector onto the unit sphere.
    pub fn normalize(v: DVector<C64>) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(LabError::Domain("cannot normalize a zero vector".into()));
        }
        Self::new(v.unscale(norm))
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(LabError::Shape(format!("basis index {index} out of range for dim {dim}")));
        }
        let mut v = DVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Ok(Self(v))
    }

    /// Uniformly distributed point of the unit sphere of `C^dim`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        Self(random_unit_vector(dim, rng))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn into_vector(self) -> DVector<C64> {
        self.0
    }

    pub fn conjugate(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    /// Tensor product `self ⊗ other`, indexed `i * other.dim() + j`.
    pub fn kron(&self, other: &UnitVector) -> UnitVector {
        let (a, b) = (self.dim(), other.dim());
        Self(DVector::from_fn(a * b, |idx, _| self.0[idx / b] * other.0[idx % b]))
    }
}

/// Uniform sample from the unit sphere of `C^dim` via normalized complex Gaussians.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<C64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| {
            C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
        });
        let norm = v.norm();
        if norm > 0.0 {
            return v.unscale(norm);
        }
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(DMatrix<C64>);

impl DensityMatrix {
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(LabError::Shape(format!(
                "density matrix must be square and nonempty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let mut asym = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                asym = asym.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if !asym.is_finite() || asym > HERMITIAN_TOL {
            return Err(LabError::Validation(format!(
                "matrix is not Hermitian (max asymmetry {asym:e})"
            )));
        }
        let herm = hermitian_part(&m);
        let trace: f64 = (0..n).map(|i| herm[(i, i)].re).sum();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(LabError::Validation(format!("trace {trace} differs from 1")));
        }
        let min_eig = hermitian_eigenvalues(&herm)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min_eig < EIGEN_FLOOR {
            return Err(LabError::Validation(format!(
                "matrix has negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self(herm))
    }

    pub fn pure(x: &UnitVector) -> Self {
        let v = x.as_vector();
        Self(v * v.adjoint())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim).unscale(dim as f64))
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_iterator(
            probs.len(),
            probs.iter().map(|&p| C64::new(p, 0.0)),
        )))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.0[(i, i)].re).sum()
    }

    pub fn conjugate(&self) -> Self {
        Self(self.0.map(|z| z.conj()))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e = hermitian_eigenvalues(&self.0);
        e.sort_by(|a, b| a.total_cmp(b));
        e
    }
}

/// `(M + M†) / 2`.
pub fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).unscale(2.0)
}

/// Eigenvalues of a Hermitian matrix (unordered).
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 2 {
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = m[(0, 1)].norm();
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        return vec![mid - rad, mid + rad];
    }
    m.clone().symmetric_eigenvalues().iter().copied().collect()
}

/// `op_{d→k}`: reshape `x ∈ C^k ⊗ C^d` into the `k × d` matrix of its coefficients.
pub fn op_reshape(x: &UnitVector, k: usize, d: usize) -> Result<ComplexMatrix> {
    if k == 0 || d == 0 || x.dim() != k * d {
        return Err(LabError::Shape(format!(
            "cannot reshape a vector of dim {} into {k}x{d}",
            x.dim()
        )));
    }
    Ok(ComplexMatrix(reshape(x.as_vector().as_slice(), k, d)))
}

/// Unchecked row-major reshape of a coefficient slice of length `k * d`.
pub fn reshape(x: &[C64], k: usize, d: usize) -> DMatrix<C64> {
    debug_assert_eq!(x.len(), k * d);
    DMatrix::from_row_slice(k, d, x)
}

/// `Tr_{C^d}` of an operator on `C^k ⊗ C^d`.
pub fn partial_trace_second(rho: &DensityMatrix, k: usize, d: usize) -> Result<DensityMatrix> {
    if rho.dim() != k * d {
        return Err(LabError::Shape(format!(
            "state of dim {} is not on C^{k} ⊗ C^{d}",
            rho.dim()
        )));
    }
    Ok(DensityMatrix(hermitian_part(&partial_trace_raw(rho.as_matrix(), k, d))))
}

pub(crate) fn partial_trace_raw(m: &DMatrix<C64>, k: usize, d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(k, k, |i, j| {
        (0..d).map(|a| m[(i * d + a, j * d + a)]).sum::<C64>()
    })
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Squared singular values of a wide matrix, taken from the eigenvalues of `M M†`
/// (descending, clamped at zero).
pub fn squared_singular_values(m: &DMatrix<C64>) -> Vec<f64> {
    let gram = hermitian_part(&(m * m.adjoint()));
    let mut e: Vec<f64> = hermitian_eigenvalues(&gram).into_iter().map(|x| x.max(0.0)).collect();
    e.sort_by(|a, b| b.total_cmp(a));
    e
}

/// ℓp norm of a vector of singular values; `p = ∞` gives the maximum.
pub fn lp_of_singular_values(s: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return s.iter().copied().fold(0.0, f64::max);
    }
    let max = s.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    max * s.iter().map(|&x| (x / max).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Schatten p-norm, `p ∈ [1, ∞]` (pass `f64::INFINITY` for the operator norm).
pub fn schatten_norm(m: &ComplexMatrix, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(LabError::Domain(format!("Schatten norm needs p >= 1, got {p}")));
    }
    if p == 2.0 {
        return Ok(m.frobenius_norm());
    }
    Ok(lp_of_singular_values(&singular_values(m.as_matrix()), p))
}

/// Shannon entropy of a spectrum, with eigenvalues below [`EIGEN_CLAMP`] dropped.
pub fn entropy_of_spectrum(eigs: &[f64], base: LogBase) -> f64 {
    let nats: f64 = eigs
        .iter()
        .filter(|&&l| l > EIGEN_CLAMP)
        .map(|&l| -l * l.ln())
        .sum();
    base.from_nats(nats).max(0.0)
}

/// Rényi entropy of a spectrum, `p > 1`.
pub fn renyi_of_spectrum(eigs: &[f64], p: f64, base: LogBase) -> f64 {
    let s: f64 = eigs.iter().filter(|&&l| l > EIGEN_CLAMP).map(|&l| l.powf(p)).sum();
    (base.log(s) / (1.0 - p)).max(0.0)
}

pub fn von_neumann_entropy(rho: &DensityMatrix, base: LogBase) -> f64 {
    entropy_of_spectrum(&hermitian_eigenvalues(rho.as_matrix()), base)
}

/// `S_p(ρ) = log(Tr ρ^p) / (1 − p)` for `p > 1`.
pub fn renyi_entropy(rho: &DensityMatrix, p: f64, base: LogBase) -> Result<f64> {
    if !(p > 1.0) {
        return Err(LabError::Domain(format!(
            "Rényi entropy needs p > 1 (use the von Neumann entropy at p = 1), got {p}"
        )));
    }
    Ok(renyi_of_spectrum(&hermitian_eigenvalues(rho.as_matrix()), p, base))
}

/// Rényi entropy for `p >= 1`, with `p = 1` meaning von Neumann.
pub fn entropy_p(rho: &DensityMatrix, p: f64, base: LogBase) -> Result<f64> {
    if p == 1.0 {
        Ok(von_neumann_entropy(rho, base))
    } else {
        renyi_entropy(rho, p, base)
    }
}

/// Kronecker product.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn reshape_basis_vector() {
        let x = UnitVector::basis(4, 0).unwrap();
        let m = op_reshape(&x, 2, 2).unwrap();
        let expected = ComplexMatrix::from_row_major(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        assert_eq!(m, expected);
    }

    #[test]
    fn reshape_round_trip_by_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = UnitVector::random(6, &mut rng);
        let m = op_reshape(&x, 2, 3).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(m.get(i, j), x.as_vector()[i * 3 + j]);
            }
        }
        assert_eq!(&m.vec(), x.as_vector());
        assert!((m.frobenius_norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reshape_shape_error() {
        let x = UnitVector::basis(6, 0).unwrap();
        assert!(matches!(op_reshape(&x, 4, 2), Err(LabError::Shape(_))));
    }

    #[test]
    fn partial_trace_examples() {
        let e0 = UnitVector::basis(2, 0).unwrap();
        let rho = DensityMatrix::pure(&e0.kron(&e0));
        let out = partial_trace_second(&rho, 2, 2).unwrap();
        assert_eq!(out, DensityMatrix::pure(&e0));

        let s = 0.5f64.sqrt();
        let bell = UnitVector::new(DVector::from_vec(vec![c(s), c(0.0), c(0.0), c(s)])).unwrap();
        let out = partial_trace_second(&DensityMatrix::pure(&bell), 2, 2).unwrap();
        assert!((out.as_matrix() - DensityMatrix::maximally_mixed(2).as_matrix()).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_matches_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = UnitVector::random(6, &mut rng);
        let out = partial_trace_second(&DensityMatrix::pure(&x), 2, 3).unwrap();
        let v = x.as_vector();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..3 {
                    acc += v[i * 3 + a] * v[j * 3 + a].conj();
                }
                assert!((out.as_matrix()[(i, j)] - acc).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn schatten_identity_and_rank_one() {
        let id = ComplexMatrix::identity(3);
        for p in [1.0, 1.5, 2.0, 3.0] {
            assert!((schatten_norm(&id, p).unwrap() - 3f64.powf(1.0 / p)).abs() < 1e-12);
        }
        assert!((schatten_norm(&id, f64::INFINITY).unwrap() - 1.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = UnitVector::random(4, &mut rng);
        let rank_one = ComplexMatrix::new(x.as_vector() * x.as_vector().adjoint()).unwrap();
        for p in [1.0, 2.0, 4.0, f64::INFINITY] {
            assert!((schatten_norm(&rank_one, p).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(matches!(schatten_norm(&id, 0.5), Err(LabError::Domain(_))));
    }

    #[test]
    fn frobenius_against_entry_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v = random_unit_vector(15, &mut rng).scale(3.0);
        let m = ComplexMatrix::new(reshape(v.as_slice(), 3, 5)).unwrap();
        let direct: f64 = v.iter().map(|z| z.re * z.re + z.im * z.im).sum::<f64>().sqrt();
        let via_svd = lp_of_singular_values(&singular_values(m.as_matrix()), 2.0);
        assert!((schatten_norm(&m, 2.0).unwrap() - direct).abs() < 1e-12);
        assert!((via_svd - direct).abs() < 1e-12);
    }

    #[test]
    fn entropies() {
        let mixed = DensityMatrix::maximally_mixed(4);
        assert!((von_neumann_entropy(&mixed, LogBase::Bits) - 2.0).abs() < 1e-12);
        assert!((von_neumann_entropy(&mixed, LogBase::Nats) - 4f64.ln()).abs() < 1e-12);
        assert!((renyi_entropy(&mixed, 3.0, LogBase::Bits).unwrap() - 2.0).abs() < 1e-12);

        let pure = DensityMatrix::pure(&UnitVector::basis(3, 1).unwrap());
        assert!(von_neumann_entropy(&pure, LogBase::Bits).abs() < 1e-12);
        assert!(renyi_entropy(&pure, 2.0, LogBase::Bits).unwrap().abs() < 1e-12);

        // -(0.5 log 0.5 + 2 * 0.25 log 0.25) = 0.5 + 1.0
        let rho = DensityMatrix::diagonal(&[0.5, 0.25, 0.25]).unwrap();
        assert!((von_neumann_entropy(&rho, LogBase::Bits) - 1.5).abs() < 1e-12);

        let half = DensityMatrix::diagonal(&[0.5, 0.5]).unwrap();
        assert!((renyi_entropy(&half, 2.0, LogBase::Bits).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(renyi_entropy(&half, 1.0, LogBase::Bits), Err(LabError::Domain(_))));
    }

    #[test]
    fn renyi_norm_form() {
        let rho = DensityMatrix::diagonal(&[0.6, 0.3, 0.1]).unwrap();
        let p = 2.5;
        let norm = schatten_norm(&ComplexMatrix::new(rho.as_matrix().clone()).unwrap(), p).unwrap();
        let alt = -(p / (p - 1.0)) * norm.log2();
        assert!((renyi_entropy(&rho, p, LogBase::Bits).unwrap() - alt).abs() < 1e-12);
    }

    #[test]
    fn density_validation() {
        let bad_trace = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.7), c(0.7)]));
        assert!(matches!(DensityMatrix::new(bad_trace), Err(LabError::Validation(_))));
        let negative = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.1), c(-0.1)]));
        assert!(matches!(DensityMatrix::new(negative), Err(LabError::Validation(_))));
        let mut non_herm = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.5), c(0.5)]));
        non_herm[(0, 1)] = c(0.1);
        assert!(matches!(DensityMatrix::new(non_herm), Err(LabError::Validation(_))));
        assert!(UnitVector::new(DVector::from_vec(vec![c(1.0), c(1.0)])).is_err());
        assert!(ComplexMatrix::from_row_major(1, 1, &[C64::new(f64::NAN, 0.0)]).is_err());
    }
}
