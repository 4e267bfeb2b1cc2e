//! Proximal maps used by the minimizer.

/// Threshold `t` with `Σ (y_i - t)_+ = a` for nonnegative `y` and `a > 0`.
/// Callers guarantee `Σ y_i > a`, so `t > 0`.
///
/// Condat's expected-linear-time simplex projection.
pub fn simplex_threshold(y: &[f64], a: f64) -> f64 {
    debug_assert!(a > 0.0 && !y.is_empty());
    let mut v: Vec<f64> = Vec::with_capacity(64);
    let mut pending: Vec<f64> = Vec::new();
    v.push(y[0]);
    let mut rho = y[0] - a;
    for &yn in &y[1..] {
        if yn > rho {
            rho += (yn - rho) / (v.len() + 1) as f64;
            if rho > yn - a {
                v.push(yn);
            } else {
                pending.append(&mut v);
                v.push(yn);
                rho = yn - a;
            }
        }
    }
    for &yp in &pending {
        if yp > rho {
            v.push(yp);
            rho += (yp - rho) / v.len() as f64;
        }
    }
    loop {
        let before = v.len();
        let mut i = 0;
        while i < v.len() {
            let yi = v[i];
            if yi <= rho {
                v.swap_remove(i);
                rho += (rho - yi) / v.len() as f64;
            } else {
                i += 1;
            }
        }
        if v.len() == before {
            break;
        }
    }
    rho
}

/// Prox of `σ · max_x |q(x)|_2` applied in place to the component arrays:
/// magnitudes above the level `t` solving `Σ (|q| - t)_+ = σ` are clipped
/// to `t`; everything vanishes when `Σ |q| <= σ`.
pub fn prox_max_norm(q: &mut [Vec<f64>], sigma: f64, mag: &mut Vec<f64>) {
    let n = q[0].len();
    mag.clear();
    mag.resize(n, 0.0);
    mag.iter_mut().for_each(|m| *m = 0.0);
    for c in q.iter() {
        for (m, x) in mag.iter_mut().zip(c) {
            *m += x * x;
        }
    }
    mag.iter_mut().for_each(|m| *m = m.sqrt());
    let total = crate::sum::pairwise_sum(mag);
    if total <= sigma {
        q.iter_mut().for_each(|c| c.iter_mut().for_each(|x| *x = 0.0));
        return;
    }
    let t = simplex_threshold(mag, sigma);
    for c in q.iter_mut() {
        for (x, &m) in c.iter_mut().zip(mag.iter()) {
            if m > t {
                *x *= t / m;
            }
        }
    }
}

/// Prox of `κ ||x||_2`: `x · max(0, 1 - κ/||x||)` in place.
pub fn block_shrink(x: &mut [f64], kappa: f64) {
    let norm = crate::sum::pairwise_sum_map(x, |v| v * v).sqrt();
    let s = if norm > kappa { 1.0 - kappa / norm } else { 0.0 };
    x.iter_mut().for_each(|v| *v *= s);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sort_threshold(y: &[f64], a: f64) -> f64 {
        let mut s = y.to_vec();
        s.sort_by(|x, y| y.total_cmp(x));
        let mut cs = 0.0;
        let mut t = 0.0;
        for (k, &v) in s.iter().enumerate() {
            cs += v;
            let cand = (cs - a) / (k + 1) as f64;
            if v > cand {
                t = cand;
            }
        }
        t
    }

    #[test]
    fn matches_sort_oracle() {
        let y = [0.3, 2.0, 1.1, 0.0, 0.7, 2.0, 0.05];
        for a in [0.01, 0.5, 1.0, 3.0, 5.9] {
            let t = simplex_threshold(&y, a);
            assert!((t - sort_threshold(&y, a)).abs() < 1e-14);
            let s: f64 = y.iter().map(|v| (v - t).max(0.0)).sum();
            assert!((s - a).abs() < 1e-13);
        }
    }

    #[test]
    fn prox_clips_or_zeroes() {
        let mut q = vec![vec![3.0, 0.0, 0.5], vec![4.0, 1.0, 0.0]];
        let mut mag = Vec::new();
        prox_max_norm(&mut q, 1.0, &mut mag);
        // magnitudes 5, 1, 0.5: level t = 4
        assert!((q[0][0] - 2.4).abs() < 1e-14 && (q[1][0] - 3.2).abs() < 1e-14);
        assert_eq!((q[0][1], q[1][1], q[0][2]), (0.0, 1.0, 0.5));
        let mut small = vec![vec![0.1, -0.2]];
        prox_max_norm(&mut small, 1.0, &mut mag);
        assert_eq!(small[0], vec![0.0, 0.0]);
    }

    #[test]
    fn shrink() {
        let mut x = vec![3.0, 4.0];
        block_shrink(&mut x, 1.0);
        assert!((x[0] - 2.4).abs() < 1e-15 && (x[1] - 3.2).abs() < 1e-15);
        block_shrink(&mut x, 10.0);
        assert_eq!(x, vec![0.0, 0.0]);
    }
}
