use rayon::prelude::*;
use serde_json::json;

use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{BoundLabel, Cell};
use crate::channels::{BoundDirection, OptimizerConfig, SubspaceChannel};
use crate::concentration::{
    levy_tail_bound, reshaped_op_norm, reshaped_purity_deviation, sphere_samples, subspace_sup_variation,
    SupVariationConfig,
};
use crate::error::{LabError, Result};
use crate::linalg::ComplexMatrix;
use crate::polyapprox::{
    build_monotone_approx, check_derivative_regimes, sample_guarantees, xp_degree_bound, xp_spec, MonotoneSpec,
};
use crate::sampling::{
    design_moment_deviation, frame_potential_from_overlaps, haar_unitary, trace_overlap_samples, BalancedMonomial,
    DesignSampler,
};

pub(crate) struct RunOutput {
    pub columns: Vec<String>,
    pub records: Vec<Vec<Cell>>,
    pub metric: &'static str,
    pub bounds: Vec<BoundLabel>,
    pub details: serde_json::Value,
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn guard(ok: bool, param: &'static str, reason: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(LabError::guard(param, reason()))
    }
}

fn samples_or(cfg: &ExperimentConfig, default: usize) -> Result<usize> {
    let n = cfg.n_samples.unwrap_or(default);
    if n == 0 {
        return Err(LabError::Validation("n_samples must be >= 1".into()));
    }
    Ok(n)
}

pub(crate) fn dispatch(cfg: &ExperimentConfig) -> Result<RunOutput> {
    match cfg.experiment {
        ExperimentKind::HaarOpnormMean | ExperimentKind::HaarFroMean => haar_mean(cfg),
        ExperimentKind::HaydenWinter => hayden_winter(cfg),
        ExperimentKind::DesignQuality => design_quality(cfg),
        ExperimentKind::LevyTails => levy_tails(cfg),
        ExperimentKind::SubspaceVariation => subspace_variation(cfg),
        ExperimentKind::PolyEnvelope => poly_envelope(cfg),
        ExperimentKind::AdditivityGap => additivity_gap(cfg),
    }
}

fn haar_mean(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let k = cfg.need(cfg.k, "k")?;
    guard((2..=32).contains(&k), "k", || format!("k must lie in 2..=32, got {k}"))?;
    let n = samples_or(cfg, 1000)?;
    let opnorm = cfg.experiment == ExperimentKind::HaarOpnormMean;
    let f = move |x: &nalgebra::DVector<crate::linalg::C64>| {
        if opnorm {
            reshaped_op_norm(x, k)
        } else {
            reshaped_purity_deviation(x, k)
        }
    };
    let values = sphere_samples(&f, k * k * k, n, &cfg.rng_seed());
    let records = values.iter().enumerate().map(|(i, &v)| vec![Cell::from(i), Cell::from(v)]).collect();
    let kf = k as f64;
    let (bounds, details) = if opnorm {
        let b = 2.0 / kf.sqrt();
        (
            vec![BoundLabel::new("mean of ||M||_inf is below 2 k^(-1/2)", b, BoundDirection::Upper)],
            json!({ "k": k, "threshold": b }),
        )
    } else {
        (Vec::new(), json!({ "k": k, "mean_times_k": values.iter().sum::<f64>() / n as f64 * kf }))
    };
    Ok(RunOutput { columns: cols(&["sample", "value"]), records, metric: "value", bounds, details })
}

fn channel_guards(k: usize, d: usize, m: usize) -> Result<()> {
    guard((2..=8).contains(&k), "k", || format!("k must lie in 2..=8, got {k}"))?;
    guard(d >= 1 && k * d <= 1024, "d", || format!("k*d must be <= 1024, got {}", k * d))?;
    guard(m >= 1 && m <= k * d, "m", || format!("m must lie in 1..={}, got {m}", k * d))
}

fn random_channel(k: usize, d: usize, m: usize, seed: &crate::sampling::RngSeed) -> Result<SubspaceChannel> {
    let u = ComplexMatrix::new(haar_unitary(k * d, &mut seed.rng()))?;
    SubspaceChannel::from_unitary(&u, k, d, m)
}

fn hayden_winter(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (k, d, m) = (cfg.need(cfg.k, "k")?, cfg.need(cfg.d, "d")?, cfg.need(cfg.m, "m")?);
    channel_guards(k, d, m)?;
    let p = cfg.p.unwrap_or(1.0);
    let n = samples_or(cfg, 50)?;
    let seed = cfg.rng_seed();
    let certs: Vec<_> = (0..n as u64)
        .into_par_iter()
        .map(|i| random_channel(k, d, m, &seed.substream(i))?.hayden_winter_certificate(p, cfg.log_base))
        .collect::<Result<_>>()?;
    let records = certs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            vec![
                i.into(),
                c.lambda_max.into(),
                c.threshold.into(),
                (c.lambda_max - c.threshold).into(),
                c.s_min_upper.into(),
                c.output_trace.into(),
            ]
        })
        .collect();
    let threshold = m as f64 / (k * d) as f64;
    let min_margin = certs.iter().map(|c| c.lambda_max - c.threshold).fold(f64::INFINITY, f64::min);
    Ok(RunOutput {
        columns: cols(&["sample", "lambda_max", "threshold", "margin", "s_min_upper", "output_trace"]),
        records,
        metric: "lambda_max",
        bounds: vec![
            BoundLabel::new("lambda_max is at least m/(kd)", threshold, BoundDirection::Lower),
            BoundLabel::new("s_min_upper bounds S_p^min of the product channel", f64::NAN, BoundDirection::Upper),
        ],
        details: json!({
            "p": p,
            "all_above_threshold": min_margin >= -1e-12,
            "min_margin": min_margin,
            "hypothesis_m_le_d": m <= d,
        }),
    })
}

fn design_quality(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let d = cfg.need(cfg.d, "d")?;
    guard(d <= 64, "d", || format!("design-quality supports d <= 64, got {d}"))?;
    let t = cfg.t.unwrap_or(2);
    if !(1..=3).contains(&t) {
        return Err(LabError::Domain(format!("frame potential supports t in 1..=3, got {t}")));
    }
    let n = samples_or(cfg, 10_000)?;
    let sampler = match cfg.depth {
        Some(depth) => DesignSampler::brickwork(d, depth)?,
        None => DesignSampler::haar(d)?,
    };
    let seed = cfg.rng_seed();
    let overlaps = trace_overlap_samples(&sampler, n, &seed.substream(0));
    let fp = frame_potential_from_overlaps(&overlaps, t);
    let moment = design_moment_deviation(&sampler, &BalancedMonomial::abs_sq(0, 0), n.max(100), &seed.substream(1))?;
    let records = overlaps
        .iter()
        .enumerate()
        .map(|(i, &o)| vec![i.into(), o.into(), o.powi(t as i32).into()])
        .collect();
    Ok(RunOutput {
        columns: cols(&["sample", "overlap_sq", "overlap_pow_t"]),
        records,
        metric: "overlap_pow_t",
        bounds: vec![BoundLabel::new(
            "Haar frame potential t!, a lower bound for every ensemble",
            fp.haar_value,
            BoundDirection::Lower,
        )],
        details: json!({
            "sampler": match cfg.depth { Some(_) => "brickwork", None => "haar" },
            "depth": cfg.depth,
            "t": t,
            "frame_potential": fp,
            "z_score": (fp.estimate - fp.haar_value) / fp.stderr,
            "moment_abs_sq_00": {
                "estimate": moment.estimate.re,
                "haar_value": moment.haar_value.re,
                "deviation": moment.deviation,
                "mc_stderr": moment.mc_stderr,
                "implied_eps": moment.implied_eps,
            },
        }),
    })
}

fn levy_tails(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let n = cfg.need(cfg.d, "d")?;
    guard((1..=4096).contains(&n), "d", || format!("sphere dimension must lie in 1..=4096, got {n}"))?;
    let lambda = cfg.need(cfg.lambda, "lambda")?;
    let samples = samples_or(cfg, 10_000)?;
    if samples < 1000 {
        return Err(LabError::Validation(format!("n_samples must be >= 1000, got {samples}")));
    }
    let f = |x: &nalgebra::DVector<crate::linalg::C64>| x[0].norm();
    let seed = cfg.rng_seed();
    // same halves and streams as `empirical_tail`
    let half = samples / 2;
    let mean_vals = sphere_samples(&f, n, half, &seed.substream(0));
    let mean = mean_vals.iter().sum::<f64>() / half as f64;
    let tail_vals = sphere_samples(&f, n, samples - half, &seed.substream(1));
    let mut records: Vec<Vec<Cell>> = Vec::with_capacity(samples);
    for (i, &v) in mean_vals.iter().enumerate() {
        records.push(vec![i.into(), "mean".into(), v.into(), Cell::Null, Cell::Null]);
    }
    let mut hits = 0usize;
    for (i, &v) in tail_vals.iter().enumerate() {
        let dev = (v - mean).abs();
        let hit = dev >= lambda;
        hits += hit as usize;
        records.push(vec![(half + i).into(), "tail".into(), v.into(), dev.into(), (hit as usize as f64).into()]);
    }
    let bound = levy_tail_bound(n, 1.0, lambda)?;
    let prob = hits as f64 / tail_vals.len() as f64;
    let stderr = (prob * (1.0 - prob) / tail_vals.len() as f64).sqrt();
    Ok(RunOutput {
        columns: cols(&["sample", "half", "value", "deviation", "exceeds"]),
        records,
        metric: "exceeds",
        bounds: vec![BoundLabel::new("tail probability is at most the Levy bound", bound, BoundDirection::Upper)],
        details: json!({
            "n": n,
            "lambda": lambda,
            "lipschitz": 1.0,
            "mean_estimate": mean,
            "tail_probability": prob,
            "tail_stderr": stderr,
            "within_bound_plus_3_stderr": prob <= bound + 3.0 * stderr,
        }),
    })
}

fn subspace_variation(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let k = cfg.need(cfg.k, "k")?;
    let m = cfg.need(cfg.m, "m")?;
    let d = cfg.d.unwrap_or(k * k);
    guard(k >= 2 && k * d <= 1024, "d", || format!("k*d must be <= 1024, got {}", k * d))?;
    guard(m <= 16 && m <= k * d, "m", || format!("subspace dimension must be <= 16, got {m}"))?;
    let eps = cfg.eps.unwrap_or(0.5);
    let n = samples_or(cfg, 100)?;
    let sampler = match cfg.depth {
        Some(depth) => DesignSampler::brickwork(k * d, depth)?,
        None => DesignSampler::haar(k * d)?,
    };
    let seed = cfg.rng_seed();
    let sv_cfg = SupVariationConfig { eps, seed: seed.substream(u64::MAX), ..SupVariationConfig::default() };
    let f = move |x: &nalgebra::DVector<crate::linalg::C64>| reshaped_purity_deviation(x, k);
    let results: Vec<_> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let u = sampler.sample_with(&mut seed.substream(i).rng());
            let basis = u.columns(0, m).into_owned();
            subspace_sup_variation(f, &basis, &sv_cfg)
        })
        .collect::<Result<_>>()?;
    let records = results
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let method = serde_json::to_value(r.method).ok().and_then(|v| v.as_str().map(String::from));
            vec![
                i.into(),
                r.sup_dev.into(),
                r.mean_ref.into(),
                r.mean_stderr.into(),
                Cell::Text(method.unwrap_or_default()),
                r.points_examined.into(),
            ]
        })
        .collect();
    Ok(RunOutput {
        columns: cols(&["sample", "sup_dev", "mean_ref", "mean_stderr", "method", "points"]),
        records,
        metric: "sup_dev",
        bounds: vec![BoundLabel::new("sup_dev underestimates the true supremum", f64::NAN, BoundDirection::Lower)],
        details: json!({
            "k": k, "d": d, "m": m, "eps": eps,
            "sampler": match cfg.depth { Some(_) => "brickwork", None => "haar" },
            "depth": cfg.depth,
        }),
    })
}

fn poly_envelope(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let p = cfg.need(cfg.p, "p")?;
    let spec = match cfg.k {
        Some(k) => xp_spec(k, p)?,
        None => MonotoneSpec::power(p, cfg.eps.unwrap_or(0.5))?,
    };
    let required = spec.required_precision_bits();
    let bits = match cfg.precision_bits {
        Some(b) => b,
        None => u32::try_from(required.max(2048)).map_err(|_| LabError::Precision("precision overflow".into()))?,
    };
    let points = samples_or(cfg, 10_000)?.max(2);
    let (poly, report) = build_monotone_approx(&spec, bits)?;
    let (samples, check) = sample_guarantees(&poly, &spec, &report, points);
    let eps = spec.eps();
    let records = samples
        .iter()
        .map(|s| {
            vec![
                s.x.into(),
                s.f.into(),
                s.value.into(),
                s.derivative.into(),
                (s.f - s.value + 2.0 * eps).into(),
                (s.value + 3.0 * eps - s.f).into(),
                (s.derivative_ceiling - s.derivative).into(),
                (s.value - s.f).abs().into(),
            ]
        })
        .collect();
    let regimes = match (cfg.k, cfg.j) {
        (Some(k), Some(j)) => Some(check_derivative_regimes(&poly, k, p, j, points)),
        _ => None,
    };
    Ok(RunOutput {
        columns: cols(&[
            "x",
            "f",
            "poly",
            "derivative",
            "lower_margin",
            "upper_margin",
            "derivative_ceiling_margin",
            "abs_error",
        ]),
        records,
        metric: "abs_error",
        bounds: vec![
            BoundLabel::new("poly - f is at most 2 eps", 2.0 * eps, BoundDirection::Upper),
            BoundLabel::new("f - poly is at most 3 eps", 3.0 * eps, BoundDirection::Upper),
            BoundLabel::new("ln alpha is at most 2((A+1)m)^2", report.alpha_bound_ln, BoundDirection::Upper),
        ],
        details: json!({
            "build": report,
            "check": check,
            "sandwich_ok": check.sandwich_ok(),
            "derivative_ok": check.derivative_ok(),
            "regimes": regimes,
            "degree_bound": cfg.k.map(|k| xp_degree_bound(k, p)),
        }),
    })
}

fn additivity_gap(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (k, d, m) = (cfg.need(cfg.k, "k")?, cfg.need(cfg.d, "d")?, cfg.need(cfg.m, "m")?);
    channel_guards(k, d, m)?;
    let p = cfg.p.unwrap_or(1.0);
    let n = samples_or(cfg, 5)?;
    let seed = cfg.rng_seed();
    let base = cfg.log_base;
    let two_log_k = 2.0 * base.log(k as f64);
    let gaps: Vec<_> = (0..n as u64)
        .map(|i| {
            let ch = random_channel(k, d, m, &seed.substream(i))?;
            let opt = OptimizerConfig {
                restarts: cfg.restarts.unwrap_or(8),
                seed: seed.substream(i).substream(1),
                ..OptimizerConfig::default()
            };
            ch.additivity_gap_report(p, &opt, base)
        })
        .collect::<Result<_>>()?;
    let records = gaps
        .iter()
        .enumerate()
        .map(|(i, g)| {
            vec![
                i.into(),
                k.into(),
                d.into(),
                m.into(),
                g.lhs_upper.into(),
                g.rhs.into(),
                g.rhs_grid.into(),
                g.gap.into(),
                g.apparent_violation.into(),
                g.lambda_max.into(),
                (two_log_k - g.lhs_upper).into(),
                (two_log_k - g.rhs).into(),
            ]
        })
        .collect();
    let max_gap = gaps.iter().map(|g| g.gap).fold(f64::NEG_INFINITY, f64::max);
    Ok(RunOutput {
        columns: cols(&[
            "sample",
            "k",
            "d",
            "m",
            "lhs_upper",
            "rhs",
            "rhs_grid",
            "gap",
            "apparent_violation",
            "lambda_max",
            "lhs_deficit",
            "rhs_deficit",
        ]),
        records,
        metric: "gap",
        bounds: vec![
            BoundLabel::new("lhs_upper bounds S_min of the conjugate-pair product", f64::NAN, BoundDirection::Upper),
            BoundLabel::new("rhs bounds twice the single-copy S_min", f64::NAN, BoundDirection::Upper),
            BoundLabel::new(
                "gap = rhs - lhs_upper; positive values are apparent only, not certified",
                0.0,
                BoundDirection::Indefinite,
            ),
        ],
        details: json!({
            "p": p,
            "max_gap": max_gap,
            "no_apparent_violation": max_gap <= 0.0,
            "two_log_k": two_log_k,
            "note": "strict additivity violations need k far beyond this scale; the table records the trend only",
        }),
    })
}
