//! Derivative-free local search and sphere sampling used by the coherence extremizers.

use std::f64::consts::PI;

/// Points on the unit sphere as `(theta, phi)`, spread by the golden-angle spiral.
pub fn fibonacci_sphere(n: usize) -> Vec<(f64, f64)> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            (z.clamp(-1.0, 1.0).acos(), (golden * k as f64).rem_euclid(2.0 * PI))
        })
        .collect()
}

/// Central-difference gradient with step `h`.
pub fn central_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            probe[k] = x[k] + h;
            let up = f(&probe);
            probe[k] = x[k] - h;
            let down = f(&probe);
            probe[k] = x[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Minimizes `f` from `x0` with an axis-aligned initial simplex of edge `step`.
///
/// Stops when the spread of simplex values falls below `ftol` or after `max_iter` iterations.
pub fn nelder_mead(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    ftol: f64,
    max_iter: usize,
) -> NelderMeadResult {
    let n = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for k in 0..n {
        let mut v = x0.to_vec();
        v[k] += step;
        let fv = f(&v);
        simplex.push((v, fv));
    }
    let along = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
    };
    let mut iterations = 0;
    while iterations < max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if (simplex[n].1 - simplex[0].1).abs() <= ftol {
            break;
        }
        iterations += 1;
        let mut centroid = vec![0.0; n];
        for (v, _) in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let reflected = along(&centroid, &worst.0, -1.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = along(&centroid, &worst.0, -2.0);
            let fe = f(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let (target, ft) = if fr < worst.1 { (&reflected, fr) } else { (&worst.0, worst.1) };
            let contracted = along(&centroid, target, 0.5);
            let fc = f(&contracted);
            if fc < ft {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let v = along(&best, &entry.0, 0.5);
                    let fv = f(&v);
                    *entry = (v, fv);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    NelderMeadResult { x, value, iterations }
}
