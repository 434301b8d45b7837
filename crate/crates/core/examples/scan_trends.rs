//! Parameter scans through the experiment runner: Frobenius mean decay in
//! `k`, the additivity gap along `(k, k², k²/2)`, and subspace variation for
//! Haar vs shallow brickwork bases.
//!
//! `cargo run --example scan_trends -- [out_dir]`

use std::path::PathBuf;

use holevo_lab::experiments::{self, log_log_slope, ExperimentConfig, ExperimentKind};

fn main() -> holevo_lab::error::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "scan-out".into()));

    let ks = [4usize, 6, 8];
    let fro: Vec<ExperimentConfig> = ks
        .iter()
        .map(|&k| {
            let mut c = ExperimentConfig::new(ExperimentKind::HaarFroMean, out.join(format!("fro-k{k}.json")));
            (c.k, c.n_samples) = (Some(k), Some(500));
            c
        })
        .collect();
    let (_, reports) = experiments::scan(&fro, true, &out.join("fro-index.json"))?;
    let means: Vec<f64> = reports.iter().flatten().map(|r| r.summary.mean).collect();
    let xs: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let shown: Vec<String> = means.iter().map(|m| format!("{m:.4e}")).collect();
    println!("E||MM* - 1/k||_2 over k = {ks:?}: [{}], log-log slope {:.3}", shown.join(", "), log_log_slope(&xs, &means));

    let gap: Vec<ExperimentConfig> = [2usize, 3, 4]
        .iter()
        .map(|&k| {
            let mut c = ExperimentConfig::new(ExperimentKind::AdditivityGap, out.join(format!("gap-k{k}.json")));
            (c.k, c.d, c.m, c.n_samples, c.restarts) = (Some(k), Some(k * k), Some((k * k / 2).max(2)), Some(2), Some(4));
            c
        })
        .collect();
    let (idx, reports) = experiments::scan(&gap, false, &out.join("gap-index.json"))?;
    for (e, r) in idx.entries.iter().zip(&reports) {
        match r {
            Some(r) => println!("{}: max gap {:.4}", e.out_path.display(), r.details["max_gap"]),
            None => println!("{}: failed: {}", e.out_path.display(), e.error.as_deref().unwrap_or("")),
        }
    }

    for depth in [None, Some(2), Some(8)] {
        let mut c = ExperimentConfig::new(
            ExperimentKind::SubspaceVariation,
            out.join(format!("sv-{}.json", depth.map_or("haar".into(), |d: usize| format!("bw{d}")))),
        );
        (c.k, c.d, c.m, c.n_samples, c.depth) = (Some(2), Some(4), Some(2), Some(10), depth);
        let r = experiments::run(&c)?;
        println!("subspace variation, {:?}: mean sup deviation {:.4}", depth.map_or("haar".into(), |d| format!("brickwork depth {d}")), r.summary.mean);
    }
    Ok(())
}
