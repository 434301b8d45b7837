use holevo_lab::linalg::{random_unit_vector, reshape, C64};
use holevo_lab::polyapprox::{
    build_monotone_approx, check_derivative_regimes, check_guarantees, compose_affine, sigmoid, sigmoid_f64,
    trace_poly_functional, truncated_maclaurin, xp_degree_bound, xp_spec, BigFloat, MonotoneSpec, Poly,
};
use holevo_lab::sampling::RngSeed;
use nalgebra::DMatrix;

#[test]
fn sigmoid_tail_and_symmetry() {
    assert!(sigmoid_f64(2.2) > 0.99);
    let bits = 256;
    let mut rng = RngSeed::new(1, 0).rng();
    use rand::Rng;
    for _ in 0..100 {
        let x: f64 = rng.random_range(-6.0..6.0);
        let s = sigmoid(x, bits).add(&sigmoid(-x, bits)).sub(&BigFloat::one(bits));
        assert!(s.is_zero() || s.log2_abs() < -(bits as f64) + 8.0, "{}", s.log2_abs());
    }
}

#[test]
fn maclaurin_lies_below_sigmoid_on_its_range() {
    let p11 = truncated_maclaurin(11, 256).unwrap();
    for i in 1..=400 {
        let x = 11f64.sqrt() * i as f64 / 400.0;
        let gap = sigmoid(x, 256).sub(&p11.eval_big_f64(x));
        assert_eq!(gap.signum(), 1, "x={x}");
    }
    assert_eq!(p11.eval_f64(0.0), 0.5);
}

#[test]
fn alpha_dominates_value_at_imaginary_unit() {
    // p_n(i) = ½ + (i/√π) Σ 1/(i!(2i+1)), so |p_n(i)| < α(p_n) strictly
    for n in [1usize, 5, 11] {
        let p = truncated_maclaurin(n, 128).unwrap();
        let s: f64 = (0..=n).map(|j| 1.0 / ((1..=j).product::<usize>() as f64 * (2 * j + 1) as f64)).sum();
        let at_i = (0.25 + s * s / std::f64::consts::PI).sqrt();
        let alpha = p.alpha().to_f64();
        assert!(at_i < alpha && alpha <= 0.5 + std::f64::consts::E / std::f64::consts::PI.sqrt());
    }
    assert_eq!(Poly::zero(64).alpha().to_f64(), 0.0);
}

#[test]
fn composition_at_random_points() {
    let bits = 512;
    let p = truncated_maclaurin(11, bits).unwrap();
    let c = compose_affine(&p, 2.0, 0.5).unwrap();
    assert!(c.alpha_ln() <= 32.0);
    let mut rng = RngSeed::new(2, 0).rng();
    use rand::Rng;
    for _ in 0..100 {
        let x: f64 = rng.random_range(-1.0..2.0);
        let z = BigFloat::from_f64(x, bits).unwrap().sub(&BigFloat::from_f64(0.5, bits).unwrap()).mul_f64(2.0);
        let d = c.eval_big_f64(x).sub(&p.eval(&z));
        assert!(d.is_zero() || d.log2_abs() < -(bits as f64) / 2.0);
    }
}

/// Least odd `n` with `m A <= ε^{1/n} √n / 2`, by plain scan.
fn least_odd_n(m: f64, a: f64, eps: f64) -> usize {
    (1..).step_by(2).find(|&n| m * a <= eps.powf(1.0 / n as f64) * (n as f64).sqrt() / 2.0).unwrap()
}

#[test]
fn square_target_constants() {
    let spec = MonotoneSpec::power(2.0, 0.5).unwrap();
    let m = 8.0 * 4f64.ln().sqrt();
    assert!((spec.slope() - m).abs() < 1e-12 && (m - 9.42).abs() < 0.01);
    assert_eq!(spec.series_order(), least_odd_n(m, 1.0, 0.5));
}

#[test]
fn ramps_are_sandwiched() {
    for (knots, eps) in [
        (vec![(0.0, 0.0), (0.3, 0.1), (0.6, 0.8), (1.0, 1.0)], 0.5),
        (vec![(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)], 0.25),
        (vec![(0.0, 0.0), (1.0, 0.2), (2.0, 1.0)], 0.5),
    ] {
        let spec = MonotoneSpec::ramp(knots, eps).unwrap();
        let bits = (spec.required_precision_bits() as u32).max(2048);
        let (poly, rep) = build_monotone_approx(&spec, bits).unwrap();
        let check = check_guarantees(&poly, &spec, &rep, 10_000);
        assert!(check.all_ok(), "{check:?}");
    }
}

#[test]
fn precision_doubling_is_stable() {
    let spec = MonotoneSpec::power(1.0, 0.5).unwrap();
    let (a, _) = build_monotone_approx(&spec, 2048).unwrap();
    let (b, _) = build_monotone_approx(&spec, 4096).unwrap();
    for i in 0..=50 {
        let x = i as f64 / 50.0;
        let d = a.eval_big_f64(x).sub(&b.eval_big_f64(x).with_prec(2048));
        assert!(d.is_zero() || d.log2_abs() < -1024.0, "x={x}: 2^{}", d.log2_abs());
    }
}

#[test]
fn xp_envelope_at_k3() {
    let spec = xp_spec(3, 1.1).unwrap();
    let bits = (spec.required_precision_bits() as u32).max(4096);
    let (poly, rep) = build_monotone_approx(&spec, bits).unwrap();
    let eps = 3f64.powf(-1.1);
    for i in 0..1000 {
        let x = i as f64 / 999.0;
        assert!((poly.eval_f64(x) - x.powf(1.1)).abs() <= 3.0 * eps);
    }
    assert!((rep.degree as f64) <= xp_degree_bound(3, 1.1));
    assert!((rep.degree as f64) <= 512.0 * 1.1f64.powi(3) * 3f64.powf(2.2) * 3f64.ln());
    let regimes = check_derivative_regimes(&poly, 3, 1.1, 1.0, 2000);
    assert!(regimes.iter().all(|r| r.holds()), "{regimes:?}");
}

#[test]
fn p_to_one_limit_is_flat() {
    let spec = xp_spec(2, 1.0).unwrap();
    for x in [0.0, 0.3, 0.9] {
        assert_eq!(spec.local_lipschitz(x, spec.eps()), 1.0);
    }
}

#[test]
fn trace_functional_matches_svd_oracle() {
    let mut rng = RngSeed::new(3, 0).rng();
    let k = 3;
    let polys = [
        truncated_maclaurin(11, 256).unwrap(),
        Poly::from_f64(&[0.1, -0.4, 2.0, 0.0, -1.5, 0.25], 256).unwrap(),
    ];
    for _ in 0..20 {
        let x = random_unit_vector(k * k * k, &mut rng);
        let m = reshape(x.as_slice(), k, k * k);
        let sv = m.clone().svd(false, false).singular_values;
        for p in &polys {
            let oracle: f64 = sv.iter().map(|s| p.eval_f64(s * s)).sum();
            assert!((trace_poly_functional(&m, p).unwrap() - oracle).abs() < 1e-8);
        }
    }
}

#[test]
fn trace_functional_sandwiches_power_trace() {
    let k = 3;
    let p = 1.1;
    let spec = MonotoneSpec::power(p, 0.5).unwrap();
    let (poly, _) = build_monotone_approx(&spec, 2048).unwrap();
    let eps = spec.eps();
    let mut rng = RngSeed::new(4, 0).rng();
    for _ in 0..20 {
        let x = random_unit_vector(k * k * k, &mut rng);
        let m = reshape(x.as_slice(), k, k * k);
        let mm: DMatrix<C64> = &m * m.adjoint();
        let direct: f64 = mm.symmetric_eigenvalues().iter().map(|l| l.max(0.0).powf(p)).sum();
        let t = trace_poly_functional(&m, &poly).unwrap();
        assert!(t - 2.0 * k as f64 * eps <= direct && direct <= t + 3.0 * k as f64 * eps);
    }
}

#[test]
fn json_preserves_every_bit() {
    let spec = MonotoneSpec::power(2.0, 0.5).unwrap();
    let (poly, _) = build_monotone_approx(&spec, 2048).unwrap();
    let back = Poly::from_json(&poly.to_json().unwrap()).unwrap();
    assert_eq!(back, poly);
}
