use holevo_lab::linalg::{
    renyi_entropy, schatten_norm, von_neumann_entropy, ComplexMatrix, DensityMatrix, LogBase, UnitVector, C64,
};
use holevo_lab::sampling::{
    design_moment_deviation, frame_potential, haar_moment_exact, haar_unitary, BalancedMonomial, DesignSampler,
    RngSeed,
};
use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

fn random_state(dim: usize, rank: usize, seed: u64) -> DensityMatrix {
    let mut rng = RngSeed::new(seed, 0).rng();
    let mut rho = DMatrix::<C64>::zeros(dim, dim);
    let weights: Vec<f64> = (0..rank).map(|i| 1.0 + i as f64).collect();
    let total: f64 = weights.iter().sum();
    for w in weights {
        let x = UnitVector::random(dim, &mut rng);
        let v = x.as_vector();
        rho += v * v.adjoint() * C64::new(w / total, 0.0);
    }
    DensityMatrix::new(rho).unwrap()
}

#[test]
fn renyi_approaches_von_neumann() {
    for seed in 0..5 {
        let rho = random_state(4, 3, seed);
        let s = von_neumann_entropy(&rho, LogBase::Bits);
        let gaps: Vec<f64> = [0.1, 0.01, 0.001]
            .iter()
            .map(|d| (renyi_entropy(&rho, 1.0 + d, LogBase::Bits).unwrap() - s).abs())
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
        assert!(gaps[2] < 1e-2);
    }
}

#[test]
fn schatten_of_random_matrix_matches_entry_sum() {
    let mut rng = RngSeed::new(5, 0).rng();
    let m = DMatrix::<C64>::from_fn(3, 5, |_, _| {
        C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    let direct: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let cm = ComplexMatrix::new(m).unwrap();
    assert!((schatten_norm(&cm, 2.0).unwrap() - direct).abs() < 1e-12);
    assert!(schatten_norm(&cm, 0.5).is_err());
}

/// `E|u_11|^4` on U(2) by quadrature: `|u_11| = cos θ` with density `sin 2θ`.
#[test]
fn fourth_moment_by_quadrature() {
    let n = 20_000;
    let h = std::f64::consts::FRAC_PI_2 / n as f64;
    let g = |t: f64| t.cos().powi(4) * (2.0 * t).sin();
    let mut s = g(0.0) + g(std::f64::consts::FRAC_PI_2);
    for i in 1..n {
        s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let quad = s * h / 3.0;
    let mono = BalancedMonomial::new(vec![(0, 0), (0, 0)], vec![(0, 0), (0, 0)]).unwrap();
    let exact = haar_moment_exact(&mono, 2).unwrap();
    assert!((quad - exact.re).abs() < 1e-10, "{quad} vs {exact}");
    assert!((exact.re - 1.0 / 3.0).abs() < 1e-15);
}

/// Two-sample KS test of `|<e1, W U e1>|^2` against `|<e1, U e1>|^2`.
#[test]
fn haar_left_invariance() {
    let n = 10_000;
    let w = haar_unitary(3, &mut RngSeed::new(77, 0).rng());
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut rng = RngSeed::new(78, 0).rng();
    for _ in 0..n {
        a.push(haar_unitary(3, &mut rng)[(0, 0)].norm_sqr());
        let u = haar_unitary(3, &mut rng);
        b.push((&w * u)[(0, 0)].norm_sqr());
    }
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut ks) = (0, 0, 0.0f64);
    while i < n && j < n {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        ks = ks.max((i as f64 - j as f64).abs() / n as f64);
    }
    let critical = 1.628 * (2.0 / n as f64).sqrt();
    assert!(ks < critical, "KS {ks} vs {critical}");
}

#[test]
fn unitarity_both_modes() {
    let haar = DesignSampler::haar(8).unwrap();
    let brick = DesignSampler::brickwork(8, 5).unwrap();
    for i in 0..1000u64 {
        for s in [&haar, &brick] {
            let u = s.sample(&RngSeed::new(9, i)).into_matrix();
            let defect = (u.adjoint() * &u - DMatrix::<C64>::identity(8, 8)).norm();
            assert!(defect <= 1e-10);
        }
    }
}

#[test]
fn haar_moment_deviation_is_statistical() {
    let s = DesignSampler::haar(3).unwrap();
    let dev = design_moment_deviation(&s, &BalancedMonomial::abs_sq(0, 0), 5000, &RngSeed::new(1, 1)).unwrap();
    assert!(dev.deviation <= 3.0 * dev.mc_stderr);
}

#[test]
fn two_qubit_brickwork_first_moment() {
    let s = DesignSampler::brickwork(4, 8).unwrap();
    let dev = design_moment_deviation(&s, &BalancedMonomial::abs_sq(0, 0), 100_000, &RngSeed::new(2, 0)).unwrap();
    assert!(dev.deviation <= 3.0 * dev.mc_stderr + 1e-3, "{dev:?}");
}

#[test]
fn haar_frame_potentials() {
    let s = DesignSampler::haar(4).unwrap();
    for t in [1, 2] {
        let fp = frame_potential(&s, t, 5000, &RngSeed::new(3, t as u64)).unwrap();
        assert!((fp.estimate - fp.haar_value).abs() <= 3.0 * fp.stderr, "{fp:?}");
    }
}

#[test]
fn brickwork_frame_potential_trend() {
    for t in [1usize, 2] {
        let mut prev: Option<(f64, f64)> = None;
        for depth in [1usize, 2, 4, 8, 16] {
            let s = DesignSampler::brickwork(8, depth).unwrap();
            let fp = frame_potential(&s, t, 4000, &RngSeed::new(4, depth as u64)).unwrap();
            if let Some((e, se)) = prev {
                assert!(fp.estimate <= e + 3.0 * (se * se + fp.stderr * fp.stderr).sqrt(), "t={t} depth={depth}");
            }
            prev = Some((fp.estimate, fp.stderr));
        }
        let (last, se) = prev.unwrap();
        assert!((last - [1.0, 2.0][t - 1]).abs() <= 3.0 * se);
    }
}
