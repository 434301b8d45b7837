//! Haar vs brickwork circuits: second moments and frame potentials.
//!
//! `cargo run --example designs`

use holevo_lab::sampling::{design_moment_deviation, frame_potential, BalancedMonomial, DesignSampler, RngSeed};

fn main() -> holevo_lab::error::Result<()> {
    let dim = 8;
    let seed = RngSeed::new(42, 0);
    let haar = DesignSampler::haar(dim)?;
    let mono = BalancedMonomial::abs_sq(0, 0);

    println!("dim {dim}, E|U_00|^2 (Haar value 1/{dim})");
    let dev = design_moment_deviation(&haar, &mono, 4000, &seed)?;
    println!("  haar       dev {:.2e}  se {:.2e}", dev.deviation, dev.mc_stderr);

    println!("\n{:>6} {:>12} {:>12} {:>12}", "depth", "FP t=1", "FP t=2", "dev |U00|^2");
    for depth in [1, 2, 4, 8, 16] {
        let s = DesignSampler::brickwork(dim, depth)?;
        let f1 = frame_potential(&s, 1, 2000, &seed.substream(depth as u64))?;
        let f2 = frame_potential(&s, 2, 2000, &seed.substream(100 + depth as u64))?;
        let dev = design_moment_deviation(&s, &mono, 2000, &seed.substream(200 + depth as u64))?;
        println!("{depth:>6} {:>12.4} {:>12.4} {:>12.2e}", f1.estimate, f2.estimate, dev.deviation);
    }
    let f2 = frame_potential(&haar, 2, 2000, &seed.substream(999))?;
    println!("{:>6} {:>12} {:>12.4}   (t! = {})", "haar", "", f2.estimate, f2.haar_value);
    Ok(())
}
