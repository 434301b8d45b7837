use holevo_lab::concentration::{
    chaining_bound, greedy_eps_net, layer_membership, level_of_radius, pairwise_tail_bound, reshaped_op_norm,
    sphere_mean, subspace_sup_variation, ChainingParams, LayerFamily, LayerSpec, SupVariationConfig,
};
use holevo_lab::linalg::{random_unit_vector, reshape, C64};
use holevo_lab::sampling::RngSeed;
use nalgebra::{DMatrix, DVector};

const C_UNIT_P: f64 = 1.3472537527357502;

/// `Σ_{i>=1} √i / 2^i` summed far past double precision.
fn unit_p_constant() -> f64 {
    (1..200).map(|i| (i as f64).sqrt() / 2f64.powi(i)).sum()
}

fn unit_chaining(dim: usize) -> ChainingParams {
    ChainingParams::new(1.0, 0.5, 1.0, |_| 1.0, move |i| {
        if i <= 0 {
            1.0
        } else {
            (3.0 * 2f64.powi(i as i32)).powi(2 * dim as i32)
        }
    })
    .unwrap()
}

/// The finite union-bound sum written out by hand.
fn chaining_oracle(dim: usize, n: f64) -> f64 {
    let c = unit_p_constant();
    let net = |i: i32| if i <= 0 { 1.0 } else { (3.0 * 2f64.powi(i)).powi(2 * dim as i32) };
    (1..=3)
        .map(|i: i32| {
            let thr = 0.5 * (i as f64).sqrt() / (4.0 * c * 2f64.powi(i));
            let dist = 2f64.powi(-i + 2);
            let tail = (2.0 * (-thr * thr * n / (8.0 * dist * dist)).exp()).min(1.0);
            net(i - 1) * net(i) * tail
        })
        .sum()
}

#[test]
fn chaining_constant_and_levels() {
    assert!((unit_p_constant() - C_UNIT_P).abs() < 1e-15);
    let cp = unit_chaining(1).with_c(C_UNIT_P).unwrap();
    assert_eq!(cp.i0(), 0);
    assert_eq!(level_of_radius(1.0), 0);
    // ⌈log2(2·L1/λ)⌉ with L1 = 1, λ = 0.5
    assert_eq!(cp.i1(), 2);
}

#[test]
fn chaining_totals_match_hand_sum() {
    for (dim, n) in [(1usize, 1e4), (1, 1e5), (2, 1e5), (2, 1e6)] {
        let cp = unit_chaining(dim);
        let out = chaining_bound(&cp, |i, thr| pairwise_tail_bound(n as usize, 1.0, thr, 2f64.powi(-i as i32 + 2)).unwrap());
        let oracle = chaining_oracle(dim, n);
        assert!((out.total - oracle).abs() <= 1e-9 * oracle.max(1e-300), "dim={dim} n={n}: {} vs {oracle}", out.total);
        assert_eq!(out.per_level.len(), 3);
    }
    // informative only from n = 1e5 on with one complex dimension
    let at = |n: usize| {
        chaining_bound(&unit_chaining(1), |i, thr| pairwise_tail_bound(n, 1.0, thr, 2f64.powi(-i as i32 + 2)).unwrap())
            .total
    };
    assert!(at(10_000) > 1.0);
    assert!(at(100_000) < 1.0);
}

#[test]
fn layer_examples() {
    let spec = LayerSpec::new(4, 1, LayerFamily::Step2OpNorm, None).unwrap();
    assert!((spec.threshold(1).unwrap() - 2.0).abs() < 1e-15);
    let rank_one = |k: usize| {
        let mut m = DMatrix::<C64>::zeros(k, k * k);
        m[(0, 0)] = C64::new(1.0, 0.0);
        m
    };
    assert!(layer_membership(&rank_one(4), &spec, 1).unwrap());
    // 2√(j(i+3)/k) < 1 once k > 4(i+3)j
    let spec17 = LayerSpec::new(17, 1, LayerFamily::Step2OpNorm, None).unwrap();
    assert!(!layer_membership(&rank_one(17), &spec17, 1).unwrap());
    let spec16 = LayerSpec::new(16, 1, LayerFamily::Step2OpNorm, None).unwrap();
    assert!(layer_membership(&rank_one(16), &spec16, 1).unwrap());
    assert!(layer_membership(&rank_one(3), &LayerSpec::new(4, 1, LayerFamily::Step2Fro, None).unwrap(), 0).is_err());
    assert!(LayerSpec::new(4, 1, LayerFamily::Renyi2p, Some(1.05)).unwrap().threshold(0).unwrap() > 0.0);
}

#[test]
fn haar_matrices_sit_in_first_layer() {
    let k = 8;
    let spec = LayerSpec::new(k, 4, LayerFamily::Step2OpNorm, None).unwrap();
    let mut rng = RngSeed::new(12, 0).rng();
    let hits = (0..1000)
        .filter(|_| {
            let x = random_unit_vector(k * k * k, &mut rng);
            layer_membership(&reshape(x.as_slice(), k, k * k), &spec, 1).unwrap()
        })
        .count();
    assert!(hits >= 990, "{hits}");
}

#[test]
fn opnorm_mean_on_small_cube() {
    let (mean, se) = sphere_mean(|x: &DVector<C64>| reshaped_op_norm(x, 4), 64, 2000, &RngSeed::new(13, 0));
    assert!(mean + 3.0 * se < 1.0);
}

#[test]
fn constant_function_has_no_variation() {
    let basis = DMatrix::<C64>::identity(8, 3);
    let cfg = SupVariationConfig { mean_samples: 1000, ..SupVariationConfig::default() };
    let out = subspace_sup_variation(|_: &DVector<C64>| 0.25, &basis, &cfg).unwrap();
    assert_eq!(out.sup_dev, 0.0);
}

#[test]
fn subspace_dimension_guard() {
    let basis = DMatrix::<C64>::identity(40, 17);
    let err = subspace_sup_variation(|_: &DVector<C64>| 0.0, &basis, &SupVariationConfig::default());
    assert!(err.is_err());
}

/// Infimal-convolution extension `ĥ(x) = min_y f(y) + L |x − y|` over a net.
fn extend<'a>(net: &'a [DVector<C64>], vals: &'a [f64], l: f64) -> impl Fn(&DVector<C64>) -> f64 + 'a {
    move |x| net.iter().zip(vals).map(|(y, v)| v + l * (x - y).norm()).fold(f64::INFINITY, f64::min)
}

#[test]
fn lipschitz_extension_from_a_net() {
    let net = greedy_eps_net(2, 0.5, 200, &mut RngSeed::new(14, 0).rng()).unwrap();
    let f = |x: &DVector<C64>| x[0].norm();
    let vals: Vec<f64> = net.points().iter().map(f).collect();
    let h = extend(net.points(), &vals, 1.0);
    for (y, v) in net.points().iter().zip(&vals) {
        assert!((h(y) - v).abs() < 1e-15);
    }
    let mut rng = RngSeed::new(15, 0).rng();
    let probes: Vec<DVector<C64>> = (0..200).map(|_| random_unit_vector(2, &mut rng)).collect();
    let all: Vec<&DVector<C64>> = net.points().iter().chain(&probes).collect();
    for a in &all {
        for b in &all {
            assert!((h(a) - h(b)).abs() <= (*a - *b).norm() + 1e-12);
        }
    }
}
