//! Oracles written against the defining integrals, sharing no numerics with the library.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::OnceLock;

const GL_N: usize = 20;

fn gl_nodes() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = GL_N;
        let mut x = vec![0.0; n];
        let mut w = vec![0.0; n];
        for i in 0..n {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                    break;
                }
            }
            x[i] = z;
        }
        (x, w)
    })
}

fn gl(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = gl_nodes();
    let (c, h) = ((a + b) / 2.0, (b - a) / 2.0);
    h * x.iter().zip(w).map(|(xi, wi)| wi * f(c + h * xi)).sum::<f64>()
}

/// Adaptive Gauss–Legendre on [a, b].
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = (a + b) / 2.0;
        let (l, r) = (gl(f, a, m), gl(f, m, b));
        // relative floor: below it the comparison only sees rounding noise
        if depth == 0 || (l + r - whole).abs() <= tol.max(1e-15 * (l.abs() + r.abs())) {
            return l + r;
        }
        rec(f, a, m, l, tol / 2.0, depth - 1) + rec(f, m, b, r, tol / 2.0, depth - 1)
    }
    rec(f, a, b, gl(f, a, b), tol, 20)
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

fn cholesky(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                assert!(d > 0.0, "not positive definite");
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    l
}

pub fn inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| r.iter().copied().chain((0..n).map(|j| if i == j { 1.0 } else { 0.0 })).collect())
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| m[x][c].abs().partial_cmp(&m[y][c].abs()).unwrap()).unwrap();
        m.swap(p, c);
        let d = m[c][c];
        m[c].iter_mut().for_each(|x| *x /= d);
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                let row = m[c].clone();
                m[r].iter_mut().zip(row).for_each(|(x, y)| *x -= f * y);
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &[f64]) -> Vec<f64> {
    let n = dot(v, v).sqrt();
    v.iter().map(|x| x / n).collect()
}

/// ∫₀^∞ r^{k−1} (2π)^{−k/2} exp(−|rθ − m|²/2) dr with b = ⟨θ, m⟩ and |m|² = mm.
fn radial(k: usize, b: f64, mm: f64) -> f64 {
    let j0 = (2.0 * PI).sqrt() * norm_cdf(b);
    let e = (-b * b / 2.0).exp();
    let j = match k {
        1 => j0,
        2 => b * j0 + e,
        3 => (1.0 + b * b) * j0 + b * e,
        _ => unreachable!(),
    };
    (-(mm - b * b) / 2.0).exp() * j / (2.0 * PI).powf(k as f64 / 2.0)
}

/// The normalised convolution of ∏ sgn⟨·, w_j⟩ with exp(4π q(· − v)) over span E,
/// given the (negative definite) Gram matrix G of E and the pairings μ_j = ⟨v, w_j⟩.
///
/// Whitening turns the density into a standard Gaussian centred at m; the sign
/// product is constant on the simplicial sectors cut out by the walls, so the
/// integral is a sum over sectors of a radial closed form integrated over a
/// spherical simplex.
pub fn smoothed_sign_direct(g: &[Vec<f64>], mu: &[f64]) -> f64 {
    let k = g.len();
    assert!((1..=3).contains(&k));
    let a: Vec<Vec<f64>> = g.iter().map(|r| r.iter().map(|x| -4.0 * PI * x).collect()).collect();
    let l = cholesky(&a);
    let ginv = inverse(g);
    let c0: Vec<f64> = ginv.iter().map(|r| dot(r, mu)).collect();
    // m = Lᵀ c₀
    let m: Vec<f64> = (0..k).map(|i| (0..k).map(|j| l[j][i] * c0[j]).sum()).collect();
    let mm = dot(&m, &m);
    // sign of ⟨v', w_j⟩ is the sign of n_j · y with n_j = −(row j of L)
    let nmat: Vec<Vec<f64>> = l.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
    let ninv = inverse(&nmat);
    let col = |j: usize| -> Vec<f64> { (0..k).map(|i| ninv[i][j]).collect() };
    let mut total = 0.0;
    for mask in 0..(1u32 << k) {
        let sig: Vec<f64> = (0..k).map(|j| if mask & (1 << j) != 0 { -1.0 } else { 1.0 }).collect();
        let sign: f64 = sig.iter().product();
        let rays: Vec<Vec<f64>> = (0..k).map(|j| normalize(&col(j).iter().map(|x| x * sig[j]).collect::<Vec<_>>())).collect();
        let part = match k {
            1 => radial(1, rays[0][0] * m[0], mm),
            2 => {
                let phi0 = rays[0][1].atan2(rays[0][0]);
                let cross = rays[0][0] * rays[1][1] - rays[0][1] * rays[1][0];
                let delta = cross.atan2(dot(&rays[0], &rays[1]));
                let f = |p: f64| radial(2, p.cos() * m[0] + p.sin() * m[1], mm);
                integrate(&f, phi0, phi0 + delta, 1e-12) * delta.signum()
            }
            _ => {
                let (u0, u1, u2) = (&rays[0], &rays[1], &rays[2]);
                let d10: Vec<f64> = (0..3).map(|i| u1[i] - u0[i]).collect();
                let d21: Vec<f64> = (0..3).map(|i| u2[i] - u1[i]).collect();
                let inner = |s: f64| {
                    let f = |t: f64| {
                        let p: Vec<f64> = (0..3).map(|i| u0[i] + s * d10[i] + s * t * d21[i]).collect();
                        let ps: Vec<f64> = (0..3).map(|i| d10[i] + t * d21[i]).collect();
                        let pt: Vec<f64> = d21.iter().map(|x| s * x).collect();
                        let det = p[0] * (ps[1] * pt[2] - ps[2] * pt[1]) - p[1] * (ps[0] * pt[2] - ps[2] * pt[0])
                            + p[2] * (ps[0] * pt[1] - ps[1] * pt[0]);
                        let n = dot(&p, &p).sqrt();
                        radial(3, dot(&p, &m) / n, mm) * det.abs() / (n * n * n)
                    };
                    integrate(&f, 0.0, 1.0, 1e-11)
                };
                integrate(&inner, 0.0, 1.0, 1e-10)
            }
        };
        total += sign * part;
    }
    total
}

/// E[sgn X · sgn(ρ − kX)] for X ~ N(m, s²), by splitting at the sign changes.
pub fn degenerate_pair(m: f64, s: f64, rho: f64, k: f64) -> f64 {
    let p = |a: f64, b: f64| norm_cdf((b - m) / s) - norm_cdf((a - m) / s);
    let c = rho / k;
    let (lo, hi) = if c < 0.0 { (c, 0.0) } else { (0.0, c) };
    // product of signs is −1 left of lo and right of hi (for k > 0), +1 in between
    let inf = f64::INFINITY;
    -p(-inf, lo) + p(lo, hi) - p(hi, inf)
}

pub const RUNNING_GRAM: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]];
pub const RUNNING_WALLS: [[f64; 3]; 3] = [[0.0, 0.0, -1.0], [1.0, 1.0, 2.0], [-1.0, -2.0, -2.0]];

pub fn ip(m: &[[f64; 3]; 3], a: &[f64], b: &[f64]) -> f64 {
    (0..3).map(|i| (0..3).map(|j| a[i] * m[i][j] * b[j]).sum::<f64>()).sum()
}

/// Smoothed face indicator of the running example: ¼(1 + Σ_pairs ŝgn_pair).
/// The pair {w₀, w₁} spans a degenerate plane with radical (1,1,0) = w₁ + 2w₀,
/// smoothed as the limit of definite spans.
pub fn running_direct(v: &[f64]) -> f64 {
    let g = &RUNNING_GRAM;
    let w = RUNNING_WALLS;
    let mut total = 1.0;
    for (i, j) in [(0, 2), (1, 2)] {
        let gram = vec![vec![ip(g, &w[i], &w[i]), ip(g, &w[i], &w[j])], vec![ip(g, &w[j], &w[i]), ip(g, &w[j], &w[j])]];
        total += smoothed_sign_direct(&gram, &[ip(g, v, &w[i]), ip(g, v, &w[j])]);
    }
    let rho = ip(g, v, &[1.0, 1.0, 0.0]);
    let s0 = (-ip(g, &w[0], &w[0]) / (4.0 * PI)).sqrt();
    total += degenerate_pair(ip(g, v, &w[0]), s0, rho, 2.0);
    total / 4.0
}

/// Deterministic RNG for test sampling.
pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
