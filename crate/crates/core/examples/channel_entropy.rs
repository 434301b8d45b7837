//! Minimum output entropy of a random subspace channel, three ways.
//!
//! `cargo run --example channel_entropy -- [k d m seed]`

use holevo_lab::channels::{OptimizerConfig, SubspaceChannel};
use holevo_lab::linalg::LogBase;
use holevo_lab::sampling::{sample_haar, RngSeed};

fn main() -> holevo_lab::error::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let [k, d, m, seed] = match args[..] {
        [k, d, m, s] => [k, d, m, s],
        _ => [2, 4, 2, 1],
    };
    let (k, d, m) = (k as usize, d as usize, m as usize);
    let u = sample_haar(k * d, &RngSeed::new(seed, 0))?;
    let ch = SubspaceChannel::from_unitary(&u, k, d, m)?;
    let cfg = OptimizerConfig::with_seed(RngSeed::new(seed, 1));

    println!("channel C^{m} -> M_{k}, environment C^{d}");
    for p in [1.0, 2.0, 4.0] {
        let est = ch.min_output_entropy_estimate(p, &cfg, LogBase::Bits)?;
        print!("  S_min^p  p={p:<3}  {:.6} bits ({:?}, converged {})", est.value, est.direction, est.converged);
        if m <= 2 {
            let grid = ch.grid_min_output_entropy(p, LogBase::Bits, 200)?;
            print!("   grid {:.6}", grid.value);
        }
        println!();
    }
    let norm = ch.one_to_p_norm_estimate(2.0, &cfg)?;
    println!("  ||Phi||_(1->2) >= {:.6}", norm.value);

    let asw = ch.asw_lower_bound(&cfg, LogBase::Bits)?;
    println!("  log k - k max||.||_2^2 = {:.6} ({:?})", asw.bound, asw.bound_direction);

    let hw = ch.hayden_winter_certificate(1.0, LogBase::Bits)?;
    println!(
        "  conjugate pair: lambda_max {:.5} vs m/(kd) {:.5}, S_min(pair) <= {:.5}",
        hw.lambda_max, hw.threshold, hw.s_min_upper
    );
    let gap = ch.additivity_gap_report(1.0, &cfg, LogBase::Bits)?;
    println!(
        "  pair upper {:.5} - twice single {:.5} = {:.5} (violation flagged: {})",
        gap.lhs_upper, gap.rhs, gap.gap, gap.apparent_violation
    );
    Ok(())
}
