//! Orthant probabilities P[Y > 0] for possibly degenerate Gaussian vectors.
//!
//! The recursion conditions on one coordinate and integrates the remaining
//! orthant probability against the normal density. Every integrand is
//! non-negative, so tiny tail probabilities keep their relative accuracy.

use crate::numeric::quad::integrate;
use crate::numeric::special::{norm_cdf, norm_interval, phi};

/// Conditional variance below this fraction of the original one is treated as zero.
const DEGENERATE: f64 = 1e-10;
/// Beyond |t| = 38.5 the standard normal density underflows relative to any useful value.
const T_MAX: f64 = 38.5;

#[derive(Clone, Copy, Debug)]
pub struct OrthantOpts {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for OrthantOpts {
    fn default() -> Self {
        OrthantOpts { rel_tol: 1e-12, abs_tol: 1e-300, max_depth: 24 }
    }
}

/// P[Y_j > 0 for all j] with Y ~ N(mean, cov), cov positive semidefinite.
pub fn orthant(mean: &[f64], cov: &[Vec<f64>], opts: &OrthantOpts) -> f64 {
    let base: Vec<f64> = (0..mean.len()).map(|j| cov[j][j]).collect();
    rec(mean, cov, &base, opts)
}

fn rec(m: &[f64], c: &[Vec<f64>], base: &[f64], o: &OrthantOpts) -> f64 {
    let n = m.len();
    let mut idx = Vec::with_capacity(n);
    for j in 0..n {
        if c[j][j] <= DEGENERATE * base[j] || c[j][j] <= 0.0 {
            if m[j] > 0.0 {
                continue;
            }
            return 0.0;
        }
        idx.push(j);
    }
    match idx.len() {
        0 => return 1.0,
        1 => {
            let j = idx[0];
            return norm_cdf(m[j] / c[j][j].sqrt());
        }
        _ => {}
    }
    // pivot on the coordinate with the largest relative variance
    let p = *idx
        .iter()
        .max_by(|&&a, &&b| (c[a][a] / base[a]).partial_cmp(&(c[b][b] / base[b])).unwrap().then(b.cmp(&a)))
        .unwrap();
    let sp = c[p][p].sqrt();
    let mut t_lo = -m[p] / sp;
    let mut t_hi = f64::INFINITY;
    let rest: Vec<usize> = idx.iter().copied().filter(|&j| j != p).collect();
    let mut live = Vec::new();
    let mut slope = Vec::new();
    for &j in &rest {
        let beta = c[j][p] / c[p][p];
        let cv = c[j][j] - c[j][p] * c[j][p] / c[p][p];
        let k = beta * sp;
        if cv <= DEGENERATE * base[j] {
            // Y_j = m_j + k t exactly
            if k.abs() <= 1e-14 * (1.0 + m[j].abs()) {
                if m[j] <= 0.0 {
                    return 0.0;
                }
            } else if k > 0.0 {
                t_lo = t_lo.max(-m[j] / k);
            } else {
                t_hi = t_hi.min(-m[j] / k);
            }
        } else {
            live.push(j);
            slope.push(k);
        }
    }
    if t_hi <= t_lo {
        return 0.0;
    }
    if live.is_empty() {
        return norm_interval(t_lo, t_hi);
    }
    let r = live.len();
    let mut cc = vec![vec![0.0; r]; r];
    for (a, &ja) in live.iter().enumerate() {
        for (b, &jb) in live.iter().enumerate() {
            cc[a][b] = c[ja][jb] - c[ja][p] * c[jb][p] / c[p][p];
        }
    }
    let sub_base: Vec<f64> = live.iter().map(|&j| base[j]).collect();
    let m0: Vec<f64> = live.iter().map(|&j| m[j]).collect();
    if r == 1 {
        let s = cc[0][0].sqrt();
        let (a, k) = (m0[0], slope[0]);
        return integrate_weighted(|t| norm_cdf((a + k * t) / s), t_lo, t_hi, o);
    }
    let mut mm = vec![0.0; r];
    integrate_weighted(
        |t| {
            for a in 0..r {
                mm[a] = m0[a] + slope[a] * t;
            }
            rec(&mm, &cc, &sub_base, o)
        },
        t_lo,
        t_hi,
        o,
    )
}

/// ∫_lo^hi φ(t) g(t) dt for 0 ≤ g ≤ 1, to relative accuracy.
fn integrate_weighted<G: FnMut(f64) -> f64>(mut g: G, lo: f64, hi: f64, o: &OrthantOpts) -> f64 {
    let lo = lo.max(-T_MAX);
    let hi = hi.min(T_MAX);
    if hi <= lo {
        return 0.0;
    }
    // unit pieces aligned to the integers
    let mut cuts = vec![lo];
    let mut k = lo.floor() + 1.0;
    while k < hi {
        cuts.push(k);
        k += 1.0;
    }
    cuts.push(hi);
    let mut pieces: Vec<(f64, f64, f64)> =
        cuts.windows(2).map(|w| (w[0], w[1], norm_interval(w[0], w[1]))).collect();
    // largest density mass first; ties keep positional order
    pieces.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then(a.0.partial_cmp(&b.0).unwrap()));
    // mass still ahead of each piece, summed from the small end so deep tails do not cancel
    let mut ahead = vec![0.0; pieces.len() + 1];
    for i in (0..pieces.len()).rev() {
        ahead[i] = ahead[i + 1] + pieces[i].2;
    }
    let mut acc = 0.0;
    for (i, &(a, b, bound)) in pieces.iter().enumerate() {
        if acc > 0.0 && ahead[i] <= o.rel_tol * acc {
            break;
        }
        if bound == 0.0 {
            continue;
        }
        let abs_tol = o.abs_tol.max(0.01 * o.rel_tol * acc);
        let r = integrate(|t| phi(t) * g(t), a, b, abs_tol, o.rel_tol, o.max_depth);
        acc += r.value.max(0.0);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::special::norm_sf;

    #[test]
    fn independent_product() {
        let c = vec![vec![1.0, 0.0], vec![0.0, 4.0]];
        let p = orthant(&[0.3, -1.0], &c, &OrthantOpts::default());
        let expect = norm_cdf(0.3) * norm_cdf(-0.5);
        assert!((p - expect).abs() < 1e-14);
    }

    #[test]
    fn centered_bivariate() {
        let rho: f64 = -0.6;
        let c = vec![vec![1.0, rho], vec![rho, 1.0]];
        let p = orthant(&[0.0, 0.0], &c, &OrthantOpts::default());
        let expect = 0.25 + rho.asin() / (2.0 * std::f64::consts::PI);
        assert!((p - expect).abs() < 1e-13, "{p} {expect}");
    }

    #[test]
    fn far_tail_relative_accuracy() {
        // strongly negatively correlated, both far in the tail
        let rho: f64 = -0.5;
        let c = vec![vec![1.0, rho], vec![rho, 1.0]];
        let p = orthant(&[-12.0, -12.0], &c, &OrthantOpts::default());
        // P[Z1 > 12, Z2 > 12] ≤ P[Z1 > 12]
        assert!(p > 0.0 && p < norm_sf(12.0) * norm_sf(12.0));
        let p2 = orthant(&[-12.0, -12.0], &c, &OrthantOpts { rel_tol: 1e-14, ..Default::default() });
        assert!(((p - p2) / p2).abs() < 1e-10);
    }

    #[test]
    fn perfectly_correlated() {
        // Y2 = −2 Y1 + 1
        let c = vec![vec![1.0, -2.0], vec![-2.0, 4.0]];
        let p = orthant(&[0.0, 1.0], &c, &OrthantOpts::default());
        // 0 < Y1 < ½
        assert!((p - norm_interval(0.0, 0.5)).abs() < 1e-14);
        let z = vec![vec![0.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(orthant(&[-1.0, 3.0], &z, &OrthantOpts::default()), 0.0);
        assert!((orthant(&[1.0, 0.0], &z, &OrthantOpts::default()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn deep_tail_is_smooth_in_the_mean() {
        // the mass sits several pieces past the densest one; dropping it made the result jump
        let c = vec![vec![1.4323944878270578, 0.954929658551372], vec![0.954929658551372, 1.5915494309189535]];
        let o = OrthantOpts::default();
        let at = |t: f64| orthant(&[-9.667190806025037 + 0.5 * 0.7978845608 * t, -20.032186294939187 + 0.7978845608 * t], &c, &o);
        let mut prev = at(6.2039933);
        for i in 1..40 {
            let g = at(6.2039933 + i as f64 * 1e-8);
            assert!(((g - prev) / g).abs() < 2e-7, "{i}: {prev:e} -> {g:e}");
            prev = g;
        }
    }
}
