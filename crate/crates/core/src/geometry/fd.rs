//! Finite-difference weights on arbitrary nodes (Fornberg's recurrence) and
//! derivative estimates of uniformly sampled vector series.

use nalgebra::DVector;

/// Weights w such that `f^(m)(x0) ~= sum_k w[k] f(xs[k])`.
pub fn fd_weights(x0: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    assert!(n > m, "need more than m nodes for an m-th derivative");
    // Fornberg, Math. Comp. 51 (1988): c[j][k] over derivative orders j.
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c[m].clone()
}

/// Stencil width giving at least fourth-order accuracy for the m-th
/// derivative, kept odd so interior stencils are centered.
pub fn stencil_width(m: usize) -> usize {
    let mut w = m + 4;
    if w % 2 == 0 {
        w += 1;
    }
    w
}

// Weights in units of the grid spacing, evaluated at offset `pos` inside a
// window of `w` nodes; exact node arithmetic, scaled by h^-m afterwards.
fn window_weights(pos: usize, w: usize, h: f64, m: usize) -> Vec<f64> {
    let xs: Vec<f64> = (0..w).map(|j| j as f64).collect();
    let mut weights = fd_weights(pos as f64, &xs, m);
    let scale = h.powi(m as i32);
    for v in &mut weights {
        *v /= scale;
    }
    weights
}

/// m-th derivative of a uniformly sampled vector series at every sample,
/// fourth-order accurate; stencils shift one-sided near the ends.
pub fn derivative_samples(points: &[DVector<f64>], h: f64, m: usize) -> Vec<DVector<f64>> {
    let n = points.len();
    let dim = points[0].len();
    let w = stencil_width(m).min(n);
    assert!(w > m, "series too short for derivative order {m}");
    let half = w / 2;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let start = k.saturating_sub(half).min(n - w);
        let weights = window_weights(k - start, w, h, m);
        let mut acc = DVector::<f64>::zeros(dim);
        for (j, wj) in weights.iter().enumerate() {
            acc += &points[start + j] * *wj;
        }
        out.push(acc);
    }
    out
}

/// m-th derivative of a scalar series, same stencil policy.
pub fn derivative_scalar_samples(values: &[f64], h: f64, m: usize) -> Vec<f64> {
    let n = values.len();
    let w = stencil_width(m).min(n);
    assert!(w > m, "series too short for derivative order {m}");
    let half = w / 2;
    (0..n)
        .map(|k| {
            let start = k.saturating_sub(half).min(n - w);
            let weights = window_weights(k - start, w, h, m);
            weights
                .iter()
                .enumerate()
                .map(|(j, wj)| wj * values[start + j])
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_central_weights() {
        let xs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let w = fd_weights(0.0, &xs, 1);
        let want = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        let w2 = fd_weights(0.0, &xs, 2);
        let want2 = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w2.iter().zip(want2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn derivatives_of_smooth_series() {
        let h = 0.01;
        let n = 200;
        let f = |t: f64| (1.3 * t).sin() * (0.4 * t).cosh();
        let values: Vec<f64> = (0..n).map(|k| f(k as f64 * h)).collect();
        let d1 = derivative_scalar_samples(&values, h, 1);
        let d3 = derivative_scalar_samples(&values, h, 3);
        let fd = |t: f64, m: usize| {
            // reference by dense high-order central differences on a fine grid
            let hh = 1e-3;
            match m {
                1 => (f(t + hh) - f(t - hh)) / (2.0 * hh),
                3 => (f(t + 2.0 * hh) - 2.0 * f(t + hh) + 2.0 * f(t - hh) - f(t - 2.0 * hh))
                    / (2.0 * hh.powi(3)),
                _ => unreachable!(),
            }
        };
        for k in [0usize, 3, 50, 120, 197, 199] {
            let t = k as f64 * h;
            assert!((d1[k] - fd(t, 1)).abs() < 1e-6, "d1 at {k}");
            assert!((d3[k] - fd(t, 3)).abs() < 1e-3, "d3 at {k}");
        }
    }
}
