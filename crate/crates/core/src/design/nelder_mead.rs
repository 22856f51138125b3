//! Bounded Nelder-Mead simplex minimization (reflection 1, expansion 2,
//! contraction 0.5, shrink 0.5). Candidate points are clamped into the box;
//! the run is fully deterministic given its starting point.

#[derive(Clone, Copy, Debug)]
pub struct NelderMeadOptions {
    pub max_iters: usize,
    /// Stop when the simplex function spread falls below this.
    pub ftol: f64,
    /// Stop when the simplex diameter falls below this.
    pub xtol: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_iters: 600,
            ftol: 1e-12,
            xtol: 1e-12,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
}

fn clamp(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, (lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(*lo, *hi);
    }
}

/// Minimizes `f` from `x0` with per-coordinate initial steps.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    init_step: &[f64],
    bounds: &[(f64, f64)],
    opts: NelderMeadOptions,
) -> NelderMeadResult {
    let dim = x0.len();
    assert!(dim > 0 && init_step.len() == dim && bounds.len() == dim);
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        f(x)
    };

    // initial simplex: x0 plus one step along each coordinate
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(dim + 1);
    let mut origin = x0.to_vec();
    clamp(&mut origin, bounds);
    let f0 = eval(&origin);
    simplex.push((f0, origin.clone()));
    for i in 0..dim {
        let mut v = origin.clone();
        let span = bounds[i].1 - bounds[i].0;
        let mut step = init_step[i];
        if v[i] + step > bounds[i].1 || v[i] + step < bounds[i].0 {
            step = -step;
        }
        v[i] = (v[i] + step).clamp(bounds[i].0, bounds[i].1);
        if (v[i] - origin[i]).abs() < 1e-15 * span.max(1.0) {
            v[i] = (origin[i] + 0.25 * span).clamp(bounds[i].0, bounds[i].1);
        }
        let fv = eval(&v);
        simplex.push((fv, v));
    }

    let mut iterations = 0usize;
    let mut converged = false;
    while iterations < opts.max_iters {
        iterations += 1;
        simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
        let best = simplex[0].0;
        let worst = simplex[dim].0;
        let spread = (worst - best).abs();
        let diameter = simplex
            .iter()
            .skip(1)
            .map(|(_, v)| {
                v.iter()
                    .zip(&simplex[0].1)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        if spread < opts.ftol || diameter < opts.xtol {
            converged = true;
            break;
        }

        // centroid of all but the worst
        let mut centroid = vec![0.0; dim];
        for (_, v) in simplex.iter().take(dim) {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / dim as f64;
            }
        }
        let worst_x = simplex[dim].1.clone();
        let second_worst = simplex[dim - 1].0;

        let mut reflected: Vec<f64> = centroid
            .iter()
            .zip(&worst_x)
            .map(|(c, w)| c + (c - w))
            .collect();
        clamp(&mut reflected, bounds);
        let f_r = eval(&reflected);

        if f_r < simplex[0].0 {
            // try expanding further
            let mut expanded: Vec<f64> = centroid
                .iter()
                .zip(&worst_x)
                .map(|(c, w)| c + 2.0 * (c - w))
                .collect();
            clamp(&mut expanded, bounds);
            let f_e = eval(&expanded);
            simplex[dim] = if f_e < f_r { (f_e, expanded) } else { (f_r, reflected) };
            continue;
        }
        if f_r < second_worst {
            simplex[dim] = (f_r, reflected);
            continue;
        }

        let (f_anchor, anchor) = if f_r < simplex[dim].0 {
            (f_r, reflected.clone())
        } else {
            (simplex[dim].0, worst_x.clone())
        };
        let mut contracted: Vec<f64> = centroid
            .iter()
            .zip(&anchor)
            .map(|(c, a)| c + 0.5 * (a - c))
            .collect();
        clamp(&mut contracted, bounds);
        let f_c = eval(&contracted);
        if f_c < f_anchor {
            simplex[dim] = (f_c, contracted);
            continue;
        }

        // shrink toward the best vertex
        let best_x = simplex[0].1.clone();
        for entry in simplex.iter_mut().skip(1) {
            let mut v: Vec<f64> = best_x
                .iter()
                .zip(&entry.1)
                .map(|(b, x)| b + 0.5 * (x - b))
                .collect();
            clamp(&mut v, bounds);
            let fv = eval(&v);
            *entry = (fv, v);
        }
    }

    simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (f_best, x_best) = simplex.swap_remove(0);
    NelderMeadResult {
        x: x_best,
        f: f_best,
        evaluations,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let target = [0.3, -1.2, 2.0];
        let f = |x: &[f64]| {
            x.iter()
                .zip(&target)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
        };
        let bounds = [(-5.0, 5.0); 3];
        let res = minimize(
            f,
            &[1.0, 1.0, -1.0],
            &[0.5, 0.5, 0.5],
            &bounds,
            NelderMeadOptions {
                max_iters: 2000,
                ..Default::default()
            },
        );
        assert!(res.converged);
        for (a, b) in res.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-5, "{:?}", res.x);
        }
    }

    #[test]
    fn respects_bounds() {
        // unconstrained minimum at -2, boxed to [-1, 5]
        let f = |x: &[f64]| (x[0] + 2.0).powi(2);
        let res = minimize(
            f,
            &[3.0],
            &[0.8],
            &[(-1.0, 5.0)],
            NelderMeadOptions::default(),
        );
        assert!((res.x[0] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn rosenbrock_descends() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let res = minimize(
            f,
            &[-1.2, 1.0],
            &[0.3, 0.3],
            &[(-3.0, 3.0), (-3.0, 3.0)],
            NelderMeadOptions {
                max_iters: 5000,
                ..Default::default()
            },
        );
        assert!(res.f < 1e-8, "f = {}", res.f);
    }
}
