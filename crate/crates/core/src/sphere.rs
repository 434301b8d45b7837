//! Local optimizers used on unit spheres: projected gradient ascent with
//! backtracking, and a derivative-free Nelder–Mead polish.

use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;

use crate::linalg::C64;

#[derive(Debug, Clone)]
pub struct AscentOutcome {
    pub x: DVector<C64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximizes `f` over the unit sphere of `C^m`.
///
/// `f` returns the value and the Euclidean gradient, packed as a complex
/// vector whose real and imaginary parts are the partial derivatives with
/// respect to `Re x_i` and `Im x_i`. Steps follow the tangent component
/// along great circles; the step angle doubles after an accepted Armijo step
/// and halves after a rejected one, capped at a quarter turn.
pub fn projected_gradient_ascent<F>(
    f: F,
    x0: DVector<C64>,
    max_iters: usize,
    step_init: f64,
    grad_tol: f64,
) -> AscentOutcome
where
    F: Fn(&DVector<C64>) -> (f64, DVector<C64>),
{
    let mut x = x0.unscale(x0.norm());
    let (mut value, mut grad) = f(&x);
    let mut angle = step_init.min(FRAC_PI_2);
    let mut iterations = 0;
    let mut converged = false;
    let mut stalls = 0;
    while iterations < max_iters {
        let radial = x.dotc(&grad).re;
        let tangent = &grad - x.scale(radial);
        let gnorm = tangent.norm();
        if gnorm < grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let dir = tangent.unscale(gnorm);
        let mut accepted = false;
        while angle > 1e-16 {
            let (s, c) = angle.sin_cos();
            let trial = x.scale(c) + dir.scale(s);
            let trial = trial.unscale(trial.norm());
            let (tv, tg) = f(&trial);
            if tv >= value + 1e-4 * angle * gnorm {
                // gains at rounding level mean the gradient is only noise
                if tv - value <= 8.0 * f64::EPSILON * value.abs().max(1.0) {
                    stalls += 1;
                } else {
                    stalls = 0;
                }
                x = trial;
                value = tv;
                grad = tg;
                angle = (angle * 2.0).min(FRAC_PI_2);
                accepted = true;
                break;
            }
            angle *= 0.5;
        }
        if !accepted || stalls >= 20 {
            // no ascent possible at machine resolution
            converged = gnorm < grad_tol.sqrt();
            break;
        }
    }
    AscentOutcome { x, value, iterations, converged }
}

#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Nelder–Mead minimization of `f: R^n → R` from `start` with initial edge `scale`.
pub fn nelder_mead<F>(f: F, start: &[f64], scale: f64, max_evals: usize, ftol: f64) -> SimplexOutcome
where
    F: Fn(&[f64]) -> f64,
{
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += scale;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    let mut evals = n + 1;

    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    };

    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if (values[n] - values[0]).abs() <= ftol * (values[0].abs() + ftol) {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflected = lerp(&centroid, &worst, -1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < values[0] {
            let expanded = lerp(&centroid, &worst, -2.0);
            let fe = f(&expanded);
            evals += 1;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let (contracted, fc) = if fr < values[n] {
                let c = lerp(&centroid, &worst, -0.5);
                let v = f(&c);
                (c, v)
            } else {
                let c = lerp(&centroid, &worst, 0.5);
                let v = f(&c);
                (c, v)
            };
            evals += 1;
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    simplex[i] = lerp(&best, &simplex[i], 0.5);
                    values[i] = f(&simplex[i]);
                }
                evals += n;
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    SimplexOutcome { point: simplex[best].clone(), value: values[best], evaluations: evals }
}

/// Packs a complex vector as `[re_0, im_0, re_1, im_1, ...]`.
pub fn to_real(x: &DVector<C64>) -> Vec<f64> {
    x.iter().flat_map(|z| [z.re, z.im]).collect()
}

/// Inverse of [`to_real`], normalized onto the unit sphere (zero maps to `e_1`).
pub fn from_real_normalized(p: &[f64]) -> DVector<C64> {
    let v = DVector::from_fn(p.len() / 2, |i, _| C64::new(p[2 * i], p[2 * i + 1]));
    let n = v.norm();
    if n > 0.0 {
        v.unscale(n)
    } else {
        let mut e = DVector::zeros(v.len());
        e[0] = C64::new(1.0, 0.0);
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nelder_mead_rosenbrock() {
        let f = |p: &[f64]| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2);
        let out = nelder_mead(f, &[-1.2, 1.0], 0.5, 5000, 1e-14);
        assert!((out.point[0] - 1.0).abs() < 1e-4 && (out.point[1] - 1.0).abs() < 1e-4, "{out:?}");
    }

    #[test]
    fn ascent_finds_top_eigenvector() {
        // maximize x† H x for diagonal H: the optimum is the top eigenvalue 3
        let h = [1.0, 3.0, 2.0];
        let f = |x: &DVector<C64>| {
            let v: f64 = x.iter().zip(h).map(|(z, w)| w * z.norm_sqr()).sum();
            let g = DVector::from_fn(3, |i, _| x[i].scale(2.0 * h[i]));
            (v, g)
        };
        let x0 = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.2, 0.1), C64::new(0.5, 0.0)]);
        let out = projected_gradient_ascent(f, x0, 1000, 0.5, 1e-10);
        assert!(out.converged, "{out:?}");
        assert!((out.value - 3.0).abs() < 1e-12);
    }
}
