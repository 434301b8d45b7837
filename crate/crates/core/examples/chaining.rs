//! The multiscale union bound for a function with unit Lipschitz profile,
//! across sample sizes and dimensions.
//!
//! `cargo run --example chaining`

use holevo_lab::concentration::{chaining_bound, pairwise_tail_bound, ChainingParams};

fn main() -> holevo_lab::error::Result<()> {
    for dim in [1usize, 2] {
        let cp = ChainingParams::new(1.0, 0.5, 1.0, |_| 1.0, move |i| {
            if i <= 0 {
                1.0
            } else {
                (3.0 * 2f64.powi(i as i32)).powi(2 * dim as i32)
            }
        })?;
        println!("dim {dim}: levels {}..={}, first threshold {:.5}", cp.i0() + 1, cp.i1() + 1, cp.threshold(cp.i0() + 1));
        for n in [10_000usize, 100_000, 1_000_000] {
            let out = chaining_bound(&cp, |i, thr| {
                pairwise_tail_bound(n, 1.0, thr, 2f64.powi(-i as i32 + 2)).expect("positive inputs")
            });
            let levels: Vec<String> = out.per_level.iter().map(|l| format!("{:.3e}", l.contribution)).collect();
            println!("  n {n:>8}: total {:>12.4e}  [{}]", out.total, levels.join(", "));
        }
    }
    Ok(())
}
