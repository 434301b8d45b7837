//! Random unitaries: Haar samples, brickwork local random circuits, and
//! design-quality diagnostics against exact low-degree Haar moments.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::linalg::{ComplexMatrix, C64};

pub const UNITARITY_TOL: f64 = 1e-10;

/// Seed plus stream selector for a ChaCha20 generator.
///
/// Equal `(seed, stream_id)` pairs reproduce the same sample sequence bit for bit.
/// Parallel Monte Carlo derives one child stream per sample with [`RngSeed::substream`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngSeed {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Independent child stream `index` of this stream.
    pub fn substream(&self, index: u64) -> RngSeed {
        RngSeed {
            seed: splitmix64(self.seed ^ splitmix64(self.stream_id.wrapping_add(0x5851_F42D_4C95_7F2D))),
            stream_id: index,
        }
    }
}

/// Haar unitary by complex Ginibre matrix + QR, with the phases of `diag(R)`
/// folded back into `Q` so the result is exactly Haar distributed.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let z = DMatrix::from_fn(dim, dim, |_, _| {
        C64::new(
            rng.sample::<f64, _>(StandardNormal) * scale,
            rng.sample::<f64, _>(StandardNormal) * scale,
        )
    });
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let norm = rjj.norm();
        if norm > 0.0 {
            let phase = rjj / norm;
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

pub fn sample_haar(dim: usize, seed: &RngSeed) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(LabError::Domain("Haar sampling needs dim >= 1".into()));
    }
    ComplexMatrix::new(haar_unitary(dim, &mut seed.rng()))
}

fn qubit_count(dim: usize) -> Result<u32> {
    if dim < 4 || !dim.is_power_of_two() {
        return Err(LabError::Domain(format!(
            "brickwork circuits need dim = 2^q with q >= 2, got {dim}"
        )));
    }
    Ok(dim.trailing_zeros())
}

/// Brickwork circuit on `q` qubits: layer `l` applies independent Haar
/// two-qubit gates to pairs `(s, s+1)` with `s ≡ l (mod 2)`. Qubit 0 is the
/// most significant tensor factor.
pub fn brickwork_unitary<R: Rng + ?Sized>(qubits: u32, depth: usize, rng: &mut R) -> DMatrix<C64> {
    let dim = 1usize << qubits;
    let mut u = DMatrix::<C64>::identity(dim, dim);
    for layer in 0..depth {
        let start = (layer % 2) as u32;
        if start + 1 >= qubits {
            continue;
        }
        let mut op = DMatrix::<C64>::identity(1usize << start, 1usize << start);
        let mut s = start;
        while s + 1 < qubits {
            op = op.kronecker(&haar_unitary(4, rng));
            s += 2;
        }
        let rest = qubits - s;
        if rest > 0 {
            op = op.kronecker(&DMatrix::<C64>::identity(1usize << rest, 1usize << rest));
        }
        u = op * u;
    }
    u
}

pub fn sample_brickwork(dim: usize, depth: usize, seed: &RngSeed) -> Result<ComplexMatrix> {
    let q = qubit_count(dim)?;
    if depth == 0 {
        return Err(LabError::Domain("brickwork depth must be >= 1".into()));
    }
    ComplexMatrix::new(brickwork_unitary(q, depth, &mut seed.rng()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum SamplerMode {
    Haar,
    Brickwork { depth: usize },
    /// Always returns the identity. A deliberately bad design used as a
    /// deterministic counterexample in diagnostics.
    Identity,
}

/// Immutable description of a unitary ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignSampler {
    pub dim: usize,
    pub mode: SamplerMode,
    /// Declared design order; metadata only.
    pub target_t: usize,
}

impl DesignSampler {
    pub fn haar(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::Domain("sampler dim must be >= 1".into()));
        }
        Ok(Self { dim, mode: SamplerMode::Haar, target_t: 1 })
    }

    pub fn brickwork(dim: usize, depth: usize) -> Result<Self> {
        qubit_count(dim)?;
        if depth == 0 {
            return Err(LabError::Domain("brickwork depth must be >= 1".into()));
        }
        Ok(Self { dim, mode: SamplerMode::Brickwork { depth }, target_t: 1 })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::Domain("sampler dim must be >= 1".into()));
        }
        Ok(Self { dim, mode: SamplerMode::Identity, target_t: 1 })
    }

    pub fn with_target_t(mut self, t: usize) -> Self {
        self.target_t = t;
        self
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> DMatrix<C64> {
        match self.mode {
            SamplerMode::Haar => haar_unitary(self.dim, rng),
            SamplerMode::Brickwork { depth } => {
                brickwork_unitary(self.dim.trailing_zeros(), depth, rng)
            }
            SamplerMode::Identity => DMatrix::identity(self.dim, self.dim),
        }
    }

    pub fn sample(&self, seed: &RngSeed) -> ComplexMatrix {
        ComplexMatrix::new(self.sample_with(&mut seed.rng())).expect("unitary samples are finite")
    }
}

/// Product of `t` unconjugated and `t` conjugated entries of a matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalancedMonomial {
    conjugated: Vec<(usize, usize)>,
    unconjugated: Vec<(usize, usize)>,
}

impl BalancedMonomial {
    pub fn new(unconjugated: Vec<(usize, usize)>, conjugated: Vec<(usize, usize)>) -> Result<Self> {
        if unconjugated.len() != conjugated.len() {
            return Err(LabError::Validation(format!(
                "monomial of degree ({}, {}) is not balanced",
                conjugated.len(),
                unconjugated.len()
            )));
        }
        Ok(Self { conjugated, unconjugated })
    }

    /// `|u_{ij}|^2`.
    pub fn abs_sq(i: usize, j: usize) -> Self {
        Self { conjugated: vec![(i, j)], unconjugated: vec![(i, j)] }
    }

    pub fn degree(&self) -> usize {
        self.unconjugated.len()
    }

    pub fn conjugated(&self) -> &[(usize, usize)] {
        &self.conjugated
    }

    pub fn unconjugated(&self) -> &[(usize, usize)] {
        &self.unconjugated
    }

    fn max_index(&self) -> usize {
        self.conjugated
            .iter()
            .chain(&self.unconjugated)
            .map(|&(i, j)| i.max(j))
            .max()
            .unwrap_or(0)
    }

    pub fn evaluate(&self, u: &DMatrix<C64>) -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        for &(i, j) in &self.unconjugated {
            acc *= u[(i, j)];
        }
        for &(i, j) in &self.conjugated {
            acc *= u[(i, j)].conj();
        }
        acc
    }
}

/// Exact `E_Haar[M(U)]` for balanced monomials of degree `t <= 2` on `U(dim)`,
/// from the Weingarten function of `S_1` and `S_2`.
pub fn haar_moment_exact(monomial: &BalancedMonomial, dim: usize) -> Result<C64> {
    let t = monomial.degree();
    if t > 2 {
        return Err(LabError::UnsupportedDegree(t));
    }
    if dim == 0 || (t > 0 && monomial.max_index() >= dim) {
        return Err(LabError::Shape(format!("monomial indices exceed dim {dim}")));
    }
    let u = monomial.unconjugated();
    let c = monomial.conjugated();
    let d = dim as f64;
    let value = match t {
        0 => 1.0,
        1 => {
            if u[0] == c[0] {
                1.0 / d
            } else {
                0.0
            }
        }
        _ => {
            if dim < 2 {
                return Err(LabError::Domain("degree-2 Weingarten moments need dim >= 2".into()));
            }
            let wg_id = 1.0 / (d * d - 1.0);
            let wg_swap = -1.0 / (d * (d * d - 1.0));
            let perms: [[usize; 2]; 2] = [[0, 1], [1, 0]];
            let mut acc = 0.0;
            for (si, sigma) in perms.iter().enumerate() {
                let rows_match = (0..2).all(|a| u[a].0 == c[sigma[a]].0);
                if !rows_match {
                    continue;
                }
                for (ti, tau) in perms.iter().enumerate() {
                    let cols_match = (0..2).all(|a| u[a].1 == c[tau[a]].1);
                    if cols_match {
                        acc += if si == ti { wg_id } else { wg_swap };
                    }
                }
            }
            acc
        }
    };
    Ok(C64::new(value, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentDeviation {
    pub estimate: C64,
    pub haar_value: C64,
    pub deviation: f64,
    pub mc_stderr: f64,
    /// `deviation · d^t`: the smallest ε for which this monomial meets the
    /// ε-approximate design inequality `|E_ν M − E_Haar M| ≤ ε / d^t`.
    pub implied_eps: f64,
}

pub fn design_moment_deviation(
    sampler: &DesignSampler,
    monomial: &BalancedMonomial,
    n_samples: usize,
    seed: &RngSeed,
) -> Result<MomentDeviation> {
    if n_samples < 100 {
        return Err(LabError::Domain(format!("need at least 100 samples, got {n_samples}")));
    }
    let haar_value = haar_moment_exact(monomial, sampler.dim)?;
    let values: Vec<C64> = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| monomial.evaluate(&sampler.sample_with(&mut seed.substream(i).rng())))
        .collect();
    let n = n_samples as f64;
    let mean = values.iter().sum::<C64>() / n;
    let var = values.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
    let deviation = (mean - haar_value).norm();
    Ok(MomentDeviation {
        estimate: mean,
        haar_value,
        deviation,
        mc_stderr: (var / n).sqrt(),
        implied_eps: deviation * (sampler.dim as f64).powi(monomial.degree() as i32),
    })
}

/// Per-pair values `|Tr(U†V)|^2` for independent `U, V` from the sampler.
pub fn trace_overlap_samples(sampler: &DesignSampler, n_pairs: usize, seed: &RngSeed) -> Vec<f64> {
    (0..n_pairs as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.substream(i).rng();
            let u = sampler.sample_with(&mut rng);
            let v = sampler.sample_with(&mut rng);
            let tr: C64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            tr.norm_sqr()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FramePotential {
    pub t: usize,
    pub estimate: f64,
    pub stderr: f64,
    /// `t!`, the Haar value for `dim >= t`.
    pub haar_value: f64,
}

pub fn factorial(t: usize) -> f64 {
    (1..=t).map(|i| i as f64).product()
}

/// Frame potential estimate from precomputed `|Tr(U†V)|^2` samples.
pub fn frame_potential_from_overlaps(overlaps: &[f64], t: usize) -> FramePotential {
    let n = overlaps.len() as f64;
    let vals: Vec<f64> = overlaps.iter().map(|x| x.powi(t as i32)).collect();
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    FramePotential { t, estimate: mean, stderr: (var / n).sqrt(), haar_value: factorial(t) }
}

/// Monte Carlo estimate of `E_{U,V} |Tr(U†V)|^{2t}`.
pub fn frame_potential(
    sampler: &DesignSampler,
    t: usize,
    n_pairs: usize,
    seed: &RngSeed,
) -> Result<FramePotential> {
    if !(1..=3).contains(&t) {
        return Err(LabError::Domain(format!("frame potential supports t in 1..=3, got {t}")));
    }
    if n_pairs < 1000 {
        return Err(LabError::Domain(format!("need at least 1000 pairs, got {n_pairs}")));
    }
    Ok(frame_potential_from_overlaps(&trace_overlap_samples(sampler, n_pairs, seed), t))
}
