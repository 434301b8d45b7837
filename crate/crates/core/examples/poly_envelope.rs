//! Monotone polynomial approximation of `x^p` on `[0, 1]`, checked on a grid
//! and saved as exact JSON.
//!
//! `cargo run --example poly_envelope -- [p eps]`. Degree grows fast as `eps`
//! shrinks: `1.5 0.2` takes about a minute.

use holevo_lab::polyapprox::{build_monotone_approx, check_guarantees, MonotoneSpec, Poly};

fn main() -> holevo_lab::error::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("number")).collect();
    let (p, eps) = match args[..] {
        [p, e] => (p, e),
        _ => (1.5, 0.5),
    };
    let spec = MonotoneSpec::power(p, eps)?;
    let bits = (spec.required_precision_bits() as u32).max(2048);
    let (poly, rep) = build_monotone_approx(&spec, bits)?;
    println!(
        "x^{p}, eps {eps}: {} slabs, series order {}, degree {}, slope {:.3}, {} bits",
        rep.slabs, rep.n, rep.degree, rep.m, rep.precision_bits
    );
    println!("ln alpha = {:.2} (bound {:.2})", rep.alpha_ln, rep.alpha_bound_ln);

    let check = check_guarantees(&poly, &spec, &rep, 2000);
    println!("sandwich ok {}, derivative ok {}", check.sandwich_ok(), check.derivative_ok());
    for x in [0.0, 0.25, 0.5, 0.75, 1.0] {
        println!("  x {x:<5} f {:.5}  poly {:.5}", spec.f(x), poly.eval_f64(x));
    }

    let json = poly.to_json()?;
    assert_eq!(Poly::from_json(&json)?, poly);
    println!("json: {} bytes, round trip exact", json.len());
    Ok(())
}
