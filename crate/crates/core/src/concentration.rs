//! Covering nets on complex unit spheres, Levy-type tail bounds and their
//! Monte Carlo counterparts, the chaining union bound, layer sets, and the
//! supremum deviation of a function over a fixed subspace.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::BoundDirection;
use crate::error::{LabError, Result};
use crate::linalg::{random_unit_vector, singular_values, C64};
use crate::sampling::RngSeed;
use crate::sphere::{from_real_normalized, nelder_mead, to_real};

pub const MAX_NET_DIM: usize = 4;
pub const MIN_NET_EPS: f64 = 0.3;
pub const MAX_SCAN_DIM: usize = 16;
pub const AUDIT_POINTS: usize = 10_000;
/// Seed of the fixed covering-audit set.
pub const AUDIT_SEED: RngSeed = RngSeed { seed: 0x00a0_d175_e700, stream_id: 0 };

/// Finite `eps`-net of the unit sphere in `C^dim`.
#[derive(Debug, Clone)]
pub struct EpsNet {
    dim: usize,
    eps: f64,
    points: Vec<DVector<C64>>,
}

impl EpsNet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn points(&self) -> &[DVector<C64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(3/eps)^{2 dim}`.
    pub fn cardinality_cap(dim: usize, eps: f64) -> f64 {
        (3.0 / eps).powi(2 * dim as i32)
    }

    pub fn distance_to_net(&self, x: &DVector<C64>) -> f64 {
        self.points.iter().map(|p| (p - x).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Largest distance from any of `n` seeded audit points to the net.
    pub fn covering_radius_on(&self, n: usize, seed: &RngSeed) -> f64 {
        audit_points(self.dim, n, seed)
            .par_iter()
            .map(|x| self.distance_to_net(x))
            .reduce(|| 0.0, f64::max)
    }

    pub fn passes_audit(&self) -> bool {
        self.covering_radius_on(AUDIT_POINTS, &AUDIT_SEED) <= self.eps
    }
}

pub fn audit_points(dim: usize, n: usize, seed: &RngSeed) -> Vec<DVector<C64>> {
    let mut rng = seed.rng();
    (0..n).map(|_| random_unit_vector(dim, &mut rng)).collect()
}

/// Greedy maximal separated set of random candidates.
///
/// Candidates are accepted when farther than `r` from every net point, with
/// `r` slightly below `eps` so that the packing bound `(1 + 2/r)^{2 dim}` stays
/// under `(3/eps)^{2 dim}`. Sampling stops after `patience` consecutive
/// rejections; the fixed audit set is then swept as a last candidate pool, so
/// the result is maximal on it.
pub fn greedy_eps_net<R: Rng + ?Sized>(dim: usize, eps: f64, patience: usize, rng: &mut R) -> Result<EpsNet> {
    if dim == 0 {
        return Err(LabError::Shape("net dimension must be positive".into()));
    }
    if dim > MAX_NET_DIM {
        return Err(LabError::guard("dim", format!("nets support complex dim <= {MAX_NET_DIM}, got {dim}")));
    }
    if !(eps >= MIN_NET_EPS) {
        return Err(LabError::guard("eps", format!("nets need eps >= {MIN_NET_EPS}, got {eps}")));
    }
    let mut points: Vec<DVector<C64>> = Vec::new();
    if eps >= 2.0 {
        let mut e = DVector::zeros(dim);
        e[0] = C64::new(1.0, 0.0);
        points.push(e);
        return Ok(EpsNet { dim, eps, points });
    }
    let r = eps.min((0.9 * eps).max(2.0 * eps / (3.0 - eps)));
    let far = |pts: &[DVector<C64>], x: &DVector<C64>| pts.iter().all(|p| (p - x).norm() > r);
    let mut misses = 0;
    while misses < patience {
        let x = random_unit_vector(dim, rng);
        if far(&points, &x) {
            points.push(x);
            misses = 0;
        } else {
            misses += 1;
        }
    }
    for x in audit_points(dim, AUDIT_POINTS, &AUDIT_SEED) {
        if far(&points, &x) {
            points.push(x);
        }
    }
    let cap = EpsNet::cardinality_cap(dim, eps);
    if points.len() as f64 > cap {
        return Err(LabError::Validation(format!(
            "net of {} points exceeds the cap {cap}",
            points.len()
        )));
    }
    Ok(EpsNet { dim, eps, points })
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(LabError::Domain(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

/// `2 exp(−n λ² / (4 L²))`, clamped to `[0, 1]`.
pub fn levy_tail_bound(n: usize, l: f64, lambda: f64) -> Result<f64> {
    if n == 0 {
        return Err(LabError::Domain("n must be >= 1".into()));
    }
    check_positive("L", l)?;
    check_positive("lambda", lambda)?;
    Ok((2.0 * (-(n as f64) * lambda * lambda / (4.0 * l * l)).exp()).min(1.0))
}

/// `2 exp(−λ² n / (8 L² ‖x − y‖²))`, clamped to `[0, 1]`.
pub fn pairwise_tail_bound(n: usize, l: f64, lambda: f64, dist: f64) -> Result<f64> {
    if n == 0 {
        return Err(LabError::Domain("n must be >= 1".into()));
    }
    check_positive("L", l)?;
    check_positive("lambda", lambda)?;
    check_positive("dist", dist)?;
    let ratio = lambda / dist;
    Ok((2.0 * (-ratio * ratio * n as f64 / (8.0 * l * l)).exp()).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub prob: f64,
    pub mean: f64,
    pub stderr: f64,
}

const TAIL_CHUNKS: usize = 16;

/// `f` at `count` uniform points of the unit sphere of `C^n`, in a fixed
/// order that does not depend on the thread count.
pub fn sphere_samples<F>(f: &F, n: usize, count: usize, seed: &RngSeed) -> Vec<f64>
where
    F: Fn(&DVector<C64>) -> f64 + Sync,
{
    let per = count.div_ceil(TAIL_CHUNKS);
    (0..TAIL_CHUNKS)
        .into_par_iter()
        .flat_map_iter(|c| {
            let take = per.min(count.saturating_sub(c * per));
            let mut rng = seed.substream(c as u64).rng();
            (0..take).map(move |_| f(&random_unit_vector(n, &mut rng))).collect::<Vec<_>>()
        })
        .collect()
}

/// Monte Carlo estimate of `Pr(|f − E f| ≥ λ)` for uniform `x` on the unit
/// sphere of `C^n`. The mean comes from one half of the samples and the tail
/// frequency from the other.
pub fn empirical_tail<F>(f: F, n: usize, lambda: f64, n_samples: usize, seed: &RngSeed) -> Result<TailEstimate>
where
    F: Fn(&DVector<C64>) -> f64 + Sync,
{
    if n_samples < 1000 {
        return Err(LabError::Validation(format!("n_samples must be >= 1000, got {n_samples}")));
    }
    if n == 0 {
        return Err(LabError::Shape("n must be >= 1".into()));
    }
    let half = n_samples / 2;
    let mean_vals = sphere_samples(&f, n, half, &seed.substream(0));
    let mean = mean_vals.iter().sum::<f64>() / half as f64;
    let tail_vals = sphere_samples(&f, n, n_samples - half, &seed.substream(1));
    let hits = tail_vals.iter().filter(|v| (*v - mean).abs() >= lambda).count();
    let m = tail_vals.len() as f64;
    let prob = hits as f64 / m;
    Ok(TailEstimate { prob, mean, stderr: (prob * (1.0 - prob) / m).sqrt() })
}

/// Mean of `f` over the unit sphere of `C^n`, with its standard error.
pub fn sphere_mean<F>(f: F, n: usize, n_samples: usize, seed: &RngSeed) -> (f64, f64)
where
    F: Fn(&DVector<C64>) -> f64 + Sync,
{
    let vals = sphere_samples(&f, n, n_samples, seed);
    mean_stderr(&vals)
}

pub fn mean_stderr(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    if vals.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

type LevelFn = Box<dyn Fn(i64) -> f64 + Send + Sync>;

/// Inputs of the chaining union bound.
pub struct ChainingParams {
    pub l1: f64,
    pub lambda: f64,
    pub radius: f64,
    pub c: f64,
    p_fn: LevelFn,
    net_sizes: LevelFn,
}

impl std::fmt::Debug for ChainingParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChainingParams")
            .field("l1", &self.l1)
            .field("lambda", &self.lambda)
            .field("radius", &self.radius)
            .field("c", &self.c)
            .finish_non_exhaustive()
    }
}

/// `i0` with `radius ∈ (2^{−i0−1}, 2^{−i0}]`.
pub fn level_of_radius(radius: f64) -> i64 {
    let mut i0 = (-radius.log2()).floor() as i64;
    while radius > 2f64.powi(-i0 as i32) {
        i0 -= 1;
    }
    while radius <= 2f64.powi(-(i0 as i32) - 1) {
        i0 += 1;
    }
    i0
}

/// `Σ_{i > i0} √(|i| p(i)) / 2^i` by partial sums, with a geometric bound on
/// the tail. Fails when the terms do not decay geometrically.
pub fn chaining_constant(p_fn: &dyn Fn(i64) -> f64, i0: i64) -> Result<f64> {
    let term = |i: i64| ((i.unsigned_abs() as f64) * p_fn(i)).sqrt() / 2f64.powi(i as i32);
    let mut sum = 0.0;
    let mut i = i0 + 1;
    let last = i0 + 400;
    while i <= last {
        let t = term(i);
        if !t.is_finite() || t < 0.0 {
            return Err(LabError::Validation(format!("chaining term at i = {i} is {t}")));
        }
        sum += t;
        i += 1;
    }
    let ratio = (last - 20..last).map(|j| term(j + 1) / term(j).max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
    let tail = if term(last) == 0.0 { 0.0 } else { term(last) * ratio / (1.0 - ratio) };
    if !(ratio < 1.0) || !(tail < 1e-6) {
        return Err(LabError::Validation(format!("chaining sum does not converge (ratio {ratio})")));
    }
    Ok(sum + tail)
}

impl ChainingParams {
    /// Computes `C` from `p_fn`.
    pub fn new(
        l1: f64,
        lambda: f64,
        radius: f64,
        p_fn: impl Fn(i64) -> f64 + Send + Sync + 'static,
        net_sizes: impl Fn(i64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        check_positive("L1", l1)?;
        check_positive("lambda", lambda)?;
        check_positive("radius", radius)?;
        let c = chaining_constant(&p_fn, level_of_radius(radius))?;
        Ok(Self { l1, lambda, radius, c, p_fn: Box::new(p_fn), net_sizes: Box::new(net_sizes) })
    }

    /// Uses a caller-supplied `C`, which must match the computed sum within 1e−6.
    pub fn with_c(mut self, c: f64) -> Result<Self> {
        if (c - self.c).abs() > 1e-6 {
            return Err(LabError::Validation(format!("C = {c} but the chaining sum is {}", self.c)));
        }
        self.c = c;
        Ok(self)
    }

    pub fn i0(&self) -> i64 {
        level_of_radius(self.radius)
    }

    pub fn i1(&self) -> i64 {
        self.i0().max((2.0 * self.l1 / self.lambda).log2().ceil() as i64)
    }

    pub fn threshold(&self, i: i64) -> f64 {
        self.lambda * ((i.unsigned_abs() as f64) * (self.p_fn)(i)).sqrt() / (4.0 * self.c * 2f64.powi(i as i32))
    }

    pub fn net_size(&self, i: i64) -> f64 {
        (self.net_sizes)(i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainingLevel {
    pub i: i64,
    pub threshold: f64,
    pub pair_tail: f64,
    pub net_pairs: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainingOutcome {
    pub i0: i64,
    pub i1: i64,
    pub per_level: Vec<ChainingLevel>,
    pub total: f64,
}

/// `Σ_{i=i0+1}^{i1+1} N(i−1) N(i) · pair_tail(i, threshold_i)`.
pub fn chaining_bound(cp: &ChainingParams, pair_tail: impl Fn(i64, f64) -> f64) -> ChainingOutcome {
    let (i0, i1) = (cp.i0(), cp.i1());
    let per_level: Vec<ChainingLevel> = (i0 + 1..=i1 + 1)
        .map(|i| {
            let threshold = cp.threshold(i);
            let tail = pair_tail(i, threshold);
            let net_pairs = cp.net_size(i - 1) * cp.net_size(i);
            ChainingLevel { i, threshold, pair_tail: tail, net_pairs, contribution: net_pairs * tail }
        })
        .collect();
    let total = per_level.iter().map(|l| l.contribution).sum();
    ChainingOutcome { i0, i1, per_level, total }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerFamily {
    /// Operator-norm layers, restricted function `‖M‖_∞`.
    Step2OpNorm,
    /// Operator-norm layers, restricted function `‖MM† − 𝟙/k‖₂`.
    Step2Fro,
    /// Schatten-`2p` layers.
    Renyi2p,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub k: usize,
    pub j: usize,
    pub family: LayerFamily,
    pub p: Option<f64>,
}

impl LayerSpec {
    pub fn new(k: usize, j: usize, family: LayerFamily, p: Option<f64>) -> Result<Self> {
        if k < 2 || j == 0 {
            return Err(LabError::Validation(format!("layer spec needs k >= 2 and j >= 1, got k={k}, j={j}")));
        }
        match (family, p) {
            (LayerFamily::Renyi2p, Some(p)) if p > 1.0 && p.is_finite() => {}
            (LayerFamily::Renyi2p, _) => {
                return Err(LabError::Validation("renyi_2p layers need a finite p > 1".into()))
            }
            (_, Some(_)) => return Err(LabError::Validation("step2 layers take no p".into())),
            (_, None) => {}
        }
        Ok(Self { k, j, family, p })
    }

    fn check_index(i: i64) -> Result<()> {
        if i < 0 {
            return Err(LabError::Domain(format!("layer index must be >= 0, got {i}")));
        }
        Ok(())
    }

    /// Norm bound defining layer `i`.
    pub fn threshold(&self, i: i64) -> Result<f64> {
        Self::check_index(i)?;
        let (k, j, i) = (self.k as f64, self.j as f64, i as f64);
        Ok(match self.family {
            LayerFamily::Step2OpNorm | LayerFamily::Step2Fro => 2.0 * (j * (i + 3.0) / k).sqrt(),
            LayerFamily::Renyi2p => {
                let p = self.p.expect("checked in new");
                2.0 * (i + 3.0).sqrt() * k.powf(1.0 / (2.0 * p) - 0.5)
            }
        })
    }

    /// Lipschitz constant of the restricted function on layer `i`.
    pub fn lipschitz(&self, i: i64) -> Result<f64> {
        Self::check_index(i)?;
        let k = self.k as f64;
        Ok(match self.family {
            LayerFamily::Step2OpNorm => 1.0,
            LayerFamily::Step2Fro => 2.0 * self.threshold(i)?,
            LayerFamily::Renyi2p => {
                let p = self.p.expect("checked in new");
                2f64.powf(4.0 * p + 3.0)
                    * p.powf(1.5)
                    * k.ln().sqrt()
                    * k.powf(5.0 / 3.0 - p - 2.0 / (3.0 * p))
                    * (i as f64 + 4.0).powf(p - 0.5)
            }
        })
    }

    /// The norm compared against [`LayerSpec::threshold`].
    pub fn layer_norm(&self, m: &DMatrix<C64>) -> f64 {
        let s = singular_values(m);
        match self.family {
            LayerFamily::Step2OpNorm | LayerFamily::Step2Fro => s.first().copied().unwrap_or(0.0),
            LayerFamily::Renyi2p => crate::linalg::lp_of_singular_values(&s, 2.0 * self.p.expect("checked in new")),
        }
    }
}

/// Whether a unit-Frobenius `k × k²` matrix lies in layer `Ω_i`.
pub fn layer_membership(m: &DMatrix<C64>, spec: &LayerSpec, i: i64) -> Result<bool> {
    if m.nrows() != spec.k || m.ncols() != spec.k * spec.k {
        return Err(LabError::Shape(format!(
            "expected {}x{} matrix, got {}x{}",
            spec.k,
            spec.k * spec.k,
            m.nrows(),
            m.ncols()
        )));
    }
    let fro = m.norm();
    if (fro - 1.0).abs() > 1e-10 {
        return Err(LabError::Validation(format!("matrix has Frobenius norm {fro}, expected 1")));
    }
    Ok(spec.layer_norm(m) <= spec.threshold(i)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupVariationConfig {
    pub eps: f64,
    /// Ambient sphere samples for the reference mean.
    pub mean_samples: usize,
    /// Random subspace points used when the subspace is too large for a net.
    pub cloud_points: usize,
    pub polish_starts: usize,
    pub seed: RngSeed,
}

impl Default for SupVariationConfig {
    fn default() -> Self {
        Self { eps: 0.5, mean_samples: 4000, cloud_points: 4096, polish_starts: 10, seed: RngSeed::new(0, 0) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMethod {
    Net,
    RandomCloud,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupVariation {
    /// Largest `|f − mean_ref|` found on the subspace sphere; a lower estimate.
    pub sup_dev: f64,
    pub direction: BoundDirection,
    pub mean_ref: f64,
    pub mean_stderr: f64,
    pub method: ScanMethod,
    pub points_examined: usize,
}

/// Scans the unit sphere of the column span of `basis` (an `N × m` isometry)
/// for the largest deviation of `f` from its ambient Haar mean.
///
/// Subspaces with `m <= 4` are scanned on an `eps`-net, larger ones (up to 16)
/// on a seeded random cloud. The best points are polished by Nelder–Mead.
pub fn subspace_sup_variation<F>(f: F, basis: &DMatrix<C64>, cfg: &SupVariationConfig) -> Result<SupVariation>
where
    F: Fn(&DVector<C64>) -> f64 + Sync,
{
    let (ambient, m) = basis.shape();
    if m == 0 || m > ambient {
        return Err(LabError::Shape(format!("basis is {ambient}x{m}")));
    }
    if m > MAX_SCAN_DIM {
        return Err(LabError::guard("m", format!("subspace scans support dim <= {MAX_SCAN_DIM}, got {m}")));
    }
    if !(cfg.eps >= MIN_NET_EPS) {
        return Err(LabError::guard("eps", format!("subspace scans need eps >= {MIN_NET_EPS}, got {}", cfg.eps)));
    }
    if cfg.mean_samples < 2 {
        return Err(LabError::Validation("mean_samples must be >= 2".into()));
    }
    let (mean_ref, mean_stderr) = sphere_mean(&f, ambient, cfg.mean_samples, &cfg.seed.substream(0));

    let (coords, method) = if m <= MAX_NET_DIM {
        let net = greedy_eps_net(m, cfg.eps, 200, &mut cfg.seed.substream(1).rng())?;
        (net.points, ScanMethod::Net)
    } else {
        let mut rng = cfg.seed.substream(1).rng();
        ((0..cfg.cloud_points).map(|_| random_unit_vector(m, &mut rng)).collect(), ScanMethod::RandomCloud)
    };
    let dev = |y: &DVector<C64>| (f(&(basis * y)) - mean_ref).abs();
    let mut scored: Vec<(f64, usize)> = coords.par_iter().enumerate().map(|(i, y)| (dev(y), i)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut best = scored.first().map(|s| s.0).unwrap_or(0.0);
    for &(_, idx) in scored.iter().take(cfg.polish_starts) {
        let start = to_real(&coords[idx]);
        let out = nelder_mead(|q| -dev(&from_real_normalized(q)), &start, 0.1, 200 * start.len(), 1e-12);
        best = best.max(-out.value);
    }
    Ok(SupVariation {
        sup_dev: best,
        direction: BoundDirection::Lower,
        mean_ref,
        mean_stderr,
        method,
        points_examined: coords.len(),
    })
}

/// `‖op(x)‖_∞` for `x ∈ C^{k·d}` reshaped to `k × d`.
pub fn reshaped_op_norm(x: &DVector<C64>, k: usize) -> f64 {
    let a = crate::linalg::reshape(x.as_slice(), k, x.len() / k);
    singular_values(&a).first().copied().unwrap_or(0.0)
}

/// `‖op(x) op(x)† − 𝟙/k‖₂` for `x ∈ C^{k·d}` reshaped to `k × d`.
pub fn reshaped_purity_deviation(x: &DVector<C64>, k: usize) -> f64 {
    let a = crate::linalg::reshape(x.as_slice(), k, x.len() / k);
    let dev = &a * a.adjoint() - DMatrix::<C64>::identity(k, k).unscale(k as f64);
    dev.norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_net() {
        let net = greedy_eps_net(1, 2.0, 10, &mut RngSeed::new(0, 0).rng()).unwrap();
        assert_eq!(net.len(), 1);
        assert!(net.passes_audit());
    }

    #[test]
    fn net_guards() {
        let mut rng = RngSeed::new(0, 0).rng();
        assert!(matches!(greedy_eps_net(5, 0.5, 10, &mut rng), Err(LabError::Guard { param: "dim", .. })));
        assert!(matches!(greedy_eps_net(2, 0.2, 10, &mut rng), Err(LabError::Guard { param: "eps", .. })));
    }

    #[test]
    fn circle_net_cap() {
        let net = greedy_eps_net(1, 0.5, 500, &mut RngSeed::new(4, 0).rng()).unwrap();
        assert!(net.len() <= 36);
        assert!(net.passes_audit());
        assert!(net.covering_radius_on(AUDIT_POINTS, &RngSeed::new(99, 3)) <= 0.5);
    }

    #[test]
    fn levy_examples() {
        let b = levy_tail_bound(64, 1.0, 1.0).unwrap();
        assert!((b - 2.0 * (-16f64).exp()).abs() < 1e-20);
        assert_eq!(levy_tail_bound(64, 1.0, 1e-9).unwrap(), 1.0);
        let doubled = levy_tail_bound(100, 2.0, 0.5).unwrap();
        assert!((doubled - 2.0 * (-100.0 * 0.25 / 16.0f64).exp()).abs() < 1e-15);
        assert!(levy_tail_bound(64, 0.0, 1.0).is_err());
    }

    #[test]
    fn pairwise_examples() {
        let b = pairwise_tail_bound(8, 1.0, 1.0, 1.0).unwrap();
        assert!((b - 2.0 * (-1f64).exp()).abs() < 1e-15);
        assert_eq!(pairwise_tail_bound(8, 1.0, 1.0, 1e-6).unwrap(), 0.0);
        let a = pairwise_tail_bound(50, 1.3, 0.4, 0.7).unwrap();
        let b = pairwise_tail_bound(50, 1.3, 0.8, 1.4).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert!(pairwise_tail_bound(8, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn constant_tail_is_zero() {
        let t = empirical_tail(|_| 3.0, 8, 0.1, 1000, &RngSeed::new(1, 0)).unwrap();
        assert_eq!(t.prob, 0.0);
        assert_eq!(t.mean, 3.0);
        assert!(empirical_tail(|_| 3.0, 8, 0.1, 999, &RngSeed::new(1, 0)).is_err());
    }

    #[test]
    fn radius_levels() {
        assert_eq!(level_of_radius(1.0), 0);
        assert_eq!(level_of_radius(0.5), 1);
        assert_eq!(level_of_radius(0.7), 0);
        assert_eq!(level_of_radius(2.0), -1);
        assert_eq!(level_of_radius(0.26), 1);
    }

    #[test]
    fn chaining_levels() {
        let cp = ChainingParams::new(2.0, 1.0, 1.0, |_| 1.0, |_| 1.0).unwrap();
        assert_eq!(cp.i0(), 0);
        assert_eq!(cp.i1(), 2);
        let oracle: f64 = (1..2000).map(|i| (i as f64).sqrt() / 2f64.powi(i)).sum();
        assert!((cp.c - oracle).abs() < 1e-12);
        assert!(ChainingParams::new(2.0, 1.0, 1.0, |_| 1.0, |_| 1.0).unwrap().with_c(1.0).is_err());
        assert!(ChainingParams::new(2.0, 1.0, 1.0, |i| 8f64.powi(i as i32), |_| 1.0).is_err());
    }

    #[test]
    fn layer_spec_mismatch() {
        assert!(LayerSpec::new(4, 1, LayerFamily::Renyi2p, None).is_err());
        assert!(LayerSpec::new(4, 1, LayerFamily::Step2OpNorm, Some(1.5)).is_err());
        let s = LayerSpec::new(4, 1, LayerFamily::Step2OpNorm, None).unwrap();
        assert!((s.threshold(1).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn orthogonal_subspace_variation() {
        let mut basis = DMatrix::<C64>::zeros(8, 2);
        basis[(1, 0)] = C64::new(1.0, 0.0);
        basis[(2, 1)] = C64::new(1.0, 0.0);
        let cfg = SupVariationConfig::default();
        let out = subspace_sup_variation(|x| x[0].norm(), &basis, &cfg).unwrap();
        assert!((out.sup_dev - out.mean_ref).abs() < 1e-15);
        let flat = subspace_sup_variation(|_| 1.0, &basis, &cfg).unwrap();
        assert_eq!(flat.sup_dev, 0.0);
    }
}
