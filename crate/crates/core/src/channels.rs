//! Channels `Φ(ρ) = Tr_{C^d}(V ρ V†)` defined by an isometry `V: C^m → C^k ⊗ C^d`,
//! their minimum output entropies and `1 → p` norms, and the two sides of the
//! additivity comparison for `Φ ⊗ Φ̄`.
//!
//! Every optimizer result carries a [`BoundDirection`]: a feasible input only
//! ever certifies a lower bound on a maximum (or an upper bound on a minimum).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::{
    entropy_of_spectrum, hermitian_eigenvalues, hermitian_part, partial_trace_raw, renyi_of_spectrum,
    ComplexMatrix, DensityMatrix, LogBase, UnitVector, C64,
};
use crate::sampling::RngSeed;
use crate::sphere::{nelder_mead, projected_gradient_ascent};

pub const ISOMETRY_TOL: f64 = 1e-10;

/// Which side of the true extremum a reported number lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundDirection {
    /// The true quantity is at least this value.
    Lower,
    /// The true quantity is at most this value.
    Upper,
    Exact,
    /// Lower estimate of a maximum that enters a formula with a negative sign,
    /// so the derived number over-estimates the formula's true value.
    UpperEstimate,
    /// Built from bounds on opposite sides; no guaranteed direction.
    Indefinite,
}

/// Multi-start projected gradient settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub step_init: f64,
    pub grad_tol: f64,
    pub seed: RngSeed,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { restarts: 8, max_iters: 500, step_init: 0.5, grad_tol: 1e-9, seed: RngSeed::new(0, 0) }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: RngSeed) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(LabError::Validation("restarts and max_iters must be >= 1".into()));
        }
        if !(self.grad_tol > 0.0) || !(self.step_init > 0.0) {
            return Err(LabError::Validation("grad_tol and step_init must be positive".into()));
        }
        Ok(())
    }
}

/// Best point found by the optimizer.
#[derive(Debug, Clone)]
pub struct OptimumEstimate {
    pub value: f64,
    pub arg: UnitVector,
    pub direction: BoundDirection,
    /// True when the restart that produced `value` met the gradient tolerance.
    pub converged: bool,
    pub restarts_converged: usize,
}

/// Smooth functionals of the output state that the optimizer can ascend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputObjective {
    /// `Tr ρ^p`, `p > 1`.
    PowerTrace(f64),
    /// `Tr ρ ln ρ` (negative von Neumann entropy in nats).
    NegativeEntropy,
    /// `‖ρ − 𝟙/k‖₂²`.
    PurityDeviation,
}

impl OutputObjective {
    /// Value and derivative `D = ∂F/∂ρ` (Hermitian) at `ρ`.
    fn value_and_derivative(self, rho: &DMatrix<C64>) -> (f64, DMatrix<C64>) {
        let k = rho.nrows();
        match self {
            OutputObjective::PurityDeviation => {
                let dev = rho - DMatrix::<C64>::identity(k, k).unscale(k as f64);
                let v = dev.iter().map(|z| z.norm_sqr()).sum();
                (v, dev.scale(2.0))
            }
            OutputObjective::PowerTrace(p) => {
                let eig = rho.clone().symmetric_eigen();
                let lam: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
                let v = lam.iter().map(|l| l.powf(p)).sum();
                let w: Vec<f64> = lam.iter().map(|l| p * l.powf(p - 1.0)).collect();
                (v, spectral(&eig.eigenvectors, &w))
            }
            OutputObjective::NegativeEntropy => {
                let eig = rho.clone().symmetric_eigen();
                let lam: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
                let v = lam.iter().filter(|&&l| l > 0.0).map(|l| l * l.ln()).sum();
                let w: Vec<f64> = lam.iter().map(|l| l.max(1e-15).ln() + 1.0).collect();
                (v, spectral(&eig.eigenvectors, &w))
            }
        }
    }
}

fn spectral(q: &DMatrix<C64>, w: &[f64]) -> DMatrix<C64> {
    let mut scaled = q.clone();
    for (j, &wj) in w.iter().enumerate() {
        for i in 0..q.nrows() {
            scaled[(i, j)] *= wj;
        }
    }
    scaled * q.adjoint()
}

/// Channel induced by a subspace of `C^k ⊗ C^d`, stored as an isometry `V` (`kd × m`).
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceChannel {
    k: usize,
    d: usize,
    v: DMatrix<C64>,
}

impl SubspaceChannel {
    pub fn from_isometry(v: ComplexMatrix, k: usize, d: usize) -> Result<Self> {
        if k == 0 || d == 0 || v.rows() != k * d {
            return Err(LabError::Shape(format!(
                "isometry has {} rows, expected k*d = {}",
                v.rows(),
                k * d
            )));
        }
        if v.cols() > k * d {
            return Err(LabError::Shape("input dimension exceeds k*d".into()));
        }
        let defect = v.isometry_defect();
        if defect > ISOMETRY_TOL {
            return Err(LabError::Validation(format!("V†V deviates from identity by {defect:e}")));
        }
        Ok(Self { k, d, v: v.into_matrix() })
    }

    /// Span of the first `m` columns of a unitary on `C^k ⊗ C^d`.
    pub fn from_unitary(u: &ComplexMatrix, k: usize, d: usize, m: usize) -> Result<Self> {
        let n = k * d;
        if u.rows() != n || u.cols() != n {
            return Err(LabError::Shape(format!(
                "unitary is {}x{}, expected {n}x{n}",
                u.rows(),
                u.cols()
            )));
        }
        if m == 0 || m > n {
            return Err(LabError::Shape(format!("m = {m} must lie in 1..={n}")));
        }
        let defect = u.isometry_defect();
        if defect > ISOMETRY_TOL {
            return Err(LabError::Validation(format!("matrix is not unitary (defect {defect:e})")));
        }
        Ok(Self { k, d, v: u.as_matrix().columns(0, m).into_owned() })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.v.ncols()
    }

    pub fn isometry(&self) -> &DMatrix<C64> {
        &self.v
    }

    /// The channel `Φ̄` with entrywise-conjugated isometry.
    pub fn conjugate(&self) -> Self {
        Self { k: self.k, d: self.d, v: self.v.map(|z| z.conj()) }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.m() {
            return Err(LabError::Shape(format!(
                "input state has dim {}, channel expects {}",
                rho.dim(),
                self.m()
            )));
        }
        let big = &self.v * rho.as_matrix() * self.v.adjoint();
        DensityMatrix::new(hermitian_part(&partial_trace_raw(&big, self.k, self.d)))
    }

    /// `op_{d→k}(Vx)` for a coefficient vector `x ∈ C^m`.
    pub fn output_factor(&self, x: &DVector<C64>) -> DMatrix<C64> {
        let y = &self.v * x;
        DMatrix::from_row_slice(self.k, self.d, y.as_slice())
    }

    /// `Φ(|x⟩⟨x|) = A A†` with `A = op_{d→k}(Vx)`.
    pub fn pure_output(&self, x: &DVector<C64>) -> DMatrix<C64> {
        let a = self.output_factor(x);
        hermitian_part(&(&a * a.adjoint()))
    }

    /// Value and Euclidean gradient of `x ↦ F(Φ(|x⟩⟨x|))`, without normalizing `x`.
    ///
    /// The gradient is `2 V† vec(D A)` where `D = ∂F/∂ρ`.
    pub fn objective_gradient(&self, objective: OutputObjective, x: &DVector<C64>) -> (f64, DVector<C64>) {
        let a = self.output_factor(x);
        let rho = hermitian_part(&(&a * a.adjoint()));
        let (value, deriv) = objective.value_and_derivative(&rho);
        let da = deriv * a;
        let flat = DVector::from_fn(self.k * self.d, |idx, _| da[(idx / self.d, idx % self.d)]);
        (value, (self.v.adjoint() * flat).scale(2.0))
    }

    fn maximize(&self, objective: OutputObjective, cfg: &OptimizerConfig) -> Result<(f64, DVector<C64>, bool, usize)> {
        cfg.validate()?;
        let m = self.m();
        if m == 1 {
            let x = DVector::from_element(1, C64::new(1.0, 0.0));
            let (v, _) = self.objective_gradient(objective, &x);
            return Ok((v, x, true, cfg.restarts));
        }
        let runs: Vec<_> = (0..cfg.restarts as u64)
            .into_par_iter()
            .map(|r| {
                let x0 = crate::linalg::random_unit_vector(m, &mut cfg.seed.substream(r).rng());
                projected_gradient_ascent(
                    |x| self.objective_gradient(objective, x),
                    x0,
                    cfg.max_iters,
                    cfg.step_init,
                    cfg.grad_tol,
                )
            })
            .collect();
        let converged = runs.iter().filter(|r| r.converged).count();
        let best = runs
            .into_iter()
            .reduce(|a, b| if b.value > a.value { b } else { a })
            .expect("restarts >= 1");
        Ok((best.value, best.x, best.converged, converged))
    }

    /// Lower bound on `‖Φ‖_{1→p} = max_x ‖op(Vx)‖_{2p}^2`, `p > 1`.
    pub fn one_to_p_norm_estimate(&self, p: f64, cfg: &OptimizerConfig) -> Result<OptimumEstimate> {
        if !(p > 1.0) {
            return Err(LabError::Domain(format!("1→p norm needs p > 1, got {p}")));
        }
        let (tr, x, converged, rc) = self.maximize(OutputObjective::PowerTrace(p), cfg)?;
        Ok(OptimumEstimate {
            value: tr.max(0.0).powf(1.0 / p),
            arg: UnitVector::normalize(x)?,
            direction: if self.m() == 1 { BoundDirection::Exact } else { BoundDirection::Lower },
            converged,
            restarts_converged: rc,
        })
    }

    /// Upper bound on `S_p^min(Φ)` for `p >= 1` (`p = 1` is von Neumann).
    pub fn min_output_entropy_estimate(&self, p: f64, cfg: &OptimizerConfig, base: LogBase) -> Result<OptimumEstimate> {
        if !(p >= 1.0) {
            return Err(LabError::Domain(format!("minimum output entropy needs p >= 1, got {p}")));
        }
        let objective = if p == 1.0 { OutputObjective::NegativeEntropy } else { OutputObjective::PowerTrace(p) };
        let (_, x, converged, rc) = self.maximize(objective, cfg)?;
        let arg = UnitVector::normalize(x)?;
        let value = self.output_entropy(arg.as_vector(), p, base);
        Ok(OptimumEstimate {
            value,
            arg,
            direction: if self.m() == 1 { BoundDirection::Exact } else { BoundDirection::Upper },
            converged,
            restarts_converged: rc,
        })
    }

    /// `S_p(Φ(|x⟩⟨x|))` for a unit `x`.
    pub fn output_entropy(&self, x: &DVector<C64>, p: f64, base: LogBase) -> f64 {
        let eigs = hermitian_eigenvalues(&self.pure_output(x));
        if p == 1.0 {
            entropy_of_spectrum(&eigs, base)
        } else {
            renyi_of_spectrum(&eigs, p, base)
        }
    }

    /// Evaluates `log k − k · max_x ‖op(x) op(x)† − 𝟙/k‖₂²` with the maximum
    /// replaced by the optimizer's best value.
    pub fn asw_lower_bound(&self, cfg: &OptimizerConfig, base: LogBase) -> Result<AswBound> {
        let (max_f2, x, converged, _) = self.maximize(OutputObjective::PurityDeviation, cfg)?;
        let k = self.k as f64;
        Ok(AswBound {
            bound: base.log(k) - k * max_f2,
            max_f2,
            arg: UnitVector::normalize(x)?,
            max_f2_direction: if self.m() == 1 { BoundDirection::Exact } else { BoundDirection::Lower },
            bound_direction: if self.m() == 1 { BoundDirection::Exact } else { BoundDirection::UpperEstimate },
            converged,
        })
    }

    /// Brute-force minimum output entropy over a deterministic equal-area grid
    /// of the input Bloch sphere (`m <= 2`), followed by a Nelder–Mead polish
    /// of the ten best grid points. `grid` is the number of levels per angle.
    pub fn grid_min_output_entropy(&self, p: f64, base: LogBase, grid: usize) -> Result<GridCertificate> {
        if !(p >= 1.0) {
            return Err(LabError::Domain(format!("entropy order must be >= 1, got {p}")));
        }
        let m = self.m();
        if m > 2 {
            return Err(LabError::guard("m", format!("grid certification supports m <= 2, got {m}")));
        }
        if m == 1 {
            let x = DVector::from_element(1, C64::new(1.0, 0.0));
            return Ok(GridCertificate {
                value: self.output_entropy(&x, p, base),
                arg: UnitVector::normalize(x)?,
                points: 1,
            });
        }
        let grid = grid.max(2);
        let entropy_at = |theta: f64, phi: f64| -> f64 {
            let x = bloch_point(theta, phi);
            self.output_entropy(&x, p, base)
        };
        let rows: Vec<Vec<(f64, f64, f64)>> = (0..grid)
            .into_par_iter()
            .map(|a| {
                let cos_theta = 1.0 - 2.0 * (a as f64 + 0.5) / grid as f64;
                let theta = cos_theta.clamp(-1.0, 1.0).acos();
                let mut best: Vec<(f64, f64, f64)> = Vec::with_capacity(11);
                for b in 0..grid {
                    let phi = 2.0 * std::f64::consts::PI * b as f64 / grid as f64;
                    let v = entropy_at(theta, phi);
                    push_best(&mut best, (v, theta, phi), 10);
                }
                best
            })
            .collect();
        let mut best = Vec::with_capacity(11);
        for row in rows {
            for cand in row {
                push_best(&mut best, cand, 10);
            }
        }
        let step = std::f64::consts::PI / grid as f64;
        let mut winner = best[0];
        for &(_, theta, phi) in &best {
            let polished = nelder_mead(|q| entropy_at(q[0], q[1]), &[theta, phi], step, 400, 1e-15);
            if polished.value < winner.0 {
                winner = (polished.value, polished.point[0], polished.point[1]);
            }
        }
        Ok(GridCertificate {
            value: winner.0,
            arg: UnitVector::normalize(bloch_point(winner.1, winner.2))?,
            points: grid * grid,
        })
    }

    /// `(Φ ⊗ Φ̄)(|φ⟩⟨φ|)` for the maximally entangled `|φ⟩ = m^{-1/2} Σ |ii⟩`,
    /// as a `k² × k²` matrix on `C^k ⊗ C^k`.
    pub fn conjugate_pair_output(&self) -> DMatrix<C64> {
        let (k, d, m) = (self.k, self.d, self.m());
        let mut y = DMatrix::<C64>::zeros(k * k, d * d);
        for i in 0..m {
            let mi = DMatrix::from_row_slice(k, d, self.v.column(i).clone_owned().as_slice());
            y += mi.kronecker(&mi.map(|z| z.conj()));
        }
        y.unscale_mut((m as f64).sqrt());
        hermitian_part(&(&y * y.adjoint()))
    }

    /// Evaluates the maximally-entangled witness for `Φ ⊗ Φ̄`.
    ///
    /// `lambda_max >= m/(kd)` holds for every isometry; `hypothesis_m_le_d`
    /// records whether the entropy estimate's `m <= d` setting applies.
    pub fn hayden_winter_certificate(&self, p: f64, base: LogBase) -> Result<HaydenWinterCertificate> {
        if !(p >= 1.0) {
            return Err(LabError::Domain(format!("entropy order must be >= 1, got {p}")));
        }
        if self.k > 8 {
            return Err(LabError::guard("k", format!("k^2 x k^2 witness supported for k <= 8, got {}", self.k)));
        }
        let out = self.conjugate_pair_output();
        let eigs = hermitian_eigenvalues(&out);
        let lambda_max = eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let trace: f64 = (0..out.nrows()).map(|i| out[(i, i)].re).sum();
        let s_min_upper = if p == 1.0 { entropy_of_spectrum(&eigs, base) } else { renyi_of_spectrum(&eigs, p, base) };
        Ok(HaydenWinterCertificate {
            lambda_max,
            threshold: self.m() as f64 / (self.k * self.d) as f64,
            s_min_upper,
            norm_lower: lambda_max,
            output_trace: trace,
            p,
            hypothesis_m_le_d: self.m() <= self.d,
        })
    }

    /// Compares `S_min(Φ ⊗ Φ̄)` (upper bound from the witness) with
    /// `S_min(Φ) + S_min(Φ̄) = 2 S_min(Φ)` (optimizer upper bound, plus a grid
    /// value when `m <= 2`).
    pub fn additivity_gap_report(&self, p: f64, cfg: &OptimizerConfig, base: LogBase) -> Result<AdditivityGap> {
        let cert = self.hayden_winter_certificate(p, base)?;
        let single = self.min_output_entropy_estimate(p, cfg, base)?;
        let rhs = 2.0 * single.value;
        let rhs_grid = if self.m() <= 2 {
            Some(2.0 * self.grid_min_output_entropy(p, base, 1000)?.value)
        } else {
            None
        };
        Ok(AdditivityGap {
            p,
            lhs_upper: cert.s_min_upper,
            lhs_direction: BoundDirection::Upper,
            rhs,
            rhs_direction: BoundDirection::Upper,
            rhs_grid,
            gap: rhs - cert.s_min_upper,
            apparent_violation: rhs - cert.s_min_upper > 0.0,
            lambda_max: cert.lambda_max,
            threshold: cert.threshold,
        })
    }
}

fn bloch_point(theta: f64, phi: f64) -> DVector<C64> {
    let (s, c) = (0.5 * theta).sin_cos();
    DVector::from_vec(vec![C64::new(c, 0.0), C64::from_polar(s, phi)])
}

fn push_best(best: &mut Vec<(f64, f64, f64)>, cand: (f64, f64, f64), keep: usize) {
    let pos = best.partition_point(|b| b.0 <= cand.0);
    if pos < keep {
        best.insert(pos, cand);
        best.truncate(keep);
    }
}

#[derive(Debug, Clone)]
pub struct AswBound {
    /// `log k − k · max_f2`.
    pub bound: f64,
    pub max_f2: f64,
    pub arg: UnitVector,
    pub max_f2_direction: BoundDirection,
    pub bound_direction: BoundDirection,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct GridCertificate {
    pub value: f64,
    pub arg: UnitVector,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HaydenWinterCertificate {
    pub lambda_max: f64,
    /// `m / (k d)`.
    pub threshold: f64,
    /// Output entropy of the witness; an upper bound on `S_p^min(Φ ⊗ Φ̄)`.
    pub s_min_upper: f64,
    /// Lower bound on `‖Φ ⊗ Φ̄‖_{1→p}` for every `p > 1`.
    pub norm_lower: f64,
    pub output_trace: f64,
    pub p: f64,
    pub hypothesis_m_le_d: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdditivityGap {
    pub p: f64,
    pub lhs_upper: f64,
    pub lhs_direction: BoundDirection,
    pub rhs: f64,
    pub rhs_direction: BoundDirection,
    /// Twice the grid minimum, available when `m <= 2`. Also an upper bound.
    pub rhs_grid: Option<f64>,
    /// `rhs − lhs_upper`.
    pub gap: f64,
    /// `gap > 0`. Never a certificate: both sides are upper bounds, so a
    /// violation would need a lower bound on `S_min(Φ)`, which is not computed.
    pub apparent_violation: bool,
    pub lambda_max: f64,
    pub threshold: f64,
}
