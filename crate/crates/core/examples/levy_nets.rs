//! Empirical tails of a Lipschitz function on the sphere against the
//! concentration bound, and a greedy net with its covering audit.
//!
//! `cargo run --example levy_nets`

use holevo_lab::concentration::{empirical_tail, greedy_eps_net, levy_tail_bound, reshaped_op_norm, EpsNet};
use holevo_lab::sampling::RngSeed;

fn main() -> holevo_lab::error::Result<()> {
    let k = 4;
    let n = k * k * k;
    let seed = RngSeed::new(7, 0);
    println!("f(x) = ||op(x)||_inf on C^{n} (1-Lipschitz)");
    println!("{:>8} {:>12} {:>12}", "lambda", "P(|f-Ef|>l)", "bound");
    for lambda in [0.05, 0.1, 0.2, 0.3] {
        let tail = empirical_tail(|x: &_| reshaped_op_norm(x, k), n, lambda, 20_000, &seed)?;
        println!("{lambda:>8} {:>12.5} {:>12.5}", tail.prob, levy_tail_bound(n, 1.0, lambda)?);
    }

    println!("\ngreedy nets on the sphere of C^2");
    for eps in [0.8, 0.5, 0.3] {
        let net = greedy_eps_net(2, eps, 500, &mut RngSeed::new(8, 0).rng())?;
        println!(
            "  eps {eps}: {} points (cap {:.0}), audited radius {:.3}, passes {}",
            net.len(),
            EpsNet::cardinality_cap(2, eps),
            net.covering_radius_on(5000, &RngSeed::new(9, 0)),
            net.passes_audit()
        );
    }
    Ok(())
}
