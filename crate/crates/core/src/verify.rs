//! Numerical checks of the transformation laws, the Vignéras equation and
//! the running example.

use crate::error::{Error, Result};
use crate::gerf::{self, ConeSmoother, QuadratureConfig};
use crate::linalg::{self, QVec};
use crate::numeric::quad::integrate;
use crate::numeric::special::{norm_cdf, norm_interval, phi};
use crate::problem::Problem;
use crate::quadspace::{Lattice, QuadSpace};
use crate::theta::{self, JacobiPoint, ThetaValue, TruncationPolicy};
use crate::weil::{build_weil, e_rational, Generator, WeilRep};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub max_abs_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// per-component absolute errors
    pub details: Vec<f64>,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(name: &str, details: Vec<f64>, tolerance: f64, notes: Vec<String>) -> Self {
        let max_abs_error = details.iter().copied().fold(0.0, f64::max);
        let finite = details.iter().all(|x| x.is_finite());
        CheckReport {
            name: name.to_string(),
            max_abs_error,
            tolerance,
            passed: finite && max_abs_error <= tolerance,
            details,
            notes,
        }
    }
}

fn tol_from(floor: f64, a: &ThetaValue, b: &ThetaValue) -> (f64, String) {
    let tails = a.tail_estimate + b.tail_estimate;
    let t = floor.max(10.0 * tails);
    let why = if t > floor { format!("tolerance 10·(tails {tails:e})") } else { format!("tolerance floor {floor:e}") };
    (t, why)
}

fn errors(a: &[Complex64], b: &[Complex64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).collect()
}

/// The completed theta series of the problem at a point.
pub fn theta_of(p: &Problem, sm: &ConeSmoother, pt: &JacobiPoint, policy: &TruncationPolicy) -> Result<ThetaValue> {
    theta::theta_hat_smoother(&p.lattice, &p.walls, sm, pt, policy)
}

/// φ(τ+1, z) = ρ(T) φ(τ, z).
pub fn check_t(p: &Problem, pt: &JacobiPoint, policy: &TruncationPolicy, floor: f64) -> Result<CheckReport> {
    let sm = p.smoother()?;
    let w = build_weil(&p.lattice);
    let shifted = JacobiPoint::new(pt.tau + 1.0, pt.z.clone())?;
    let lhs = theta_of(p, &sm, &shifted, policy)?;
    let base = theta_of(p, &sm, pt, policy)?;
    let rhs = w.apply(Generator::T, &base.components)?;
    let (tol, why) = tol_from(floor, &lhs, &base);
    let mut notes = vec![why];
    if !p.lattice.is_even() {
        notes.push("odd lattice: q is not integral on L, so ρ(T) is not the action of τ ↦ τ+1".into());
    }
    Ok(CheckReport::new("T", errors(&lhs.components, &rhs), tol, notes))
}

/// Characteristic vector c ∈ L^∨ with ⟨x, x⟩ ≡ ⟨x, c⟩ mod 2 for x ∈ L.
pub fn characteristic_vector(l: &Lattice) -> QVec {
    let m = l.space().gram();
    let diag: QVec = (0..l.dim()).map(|i| m.get(i, i).clone()).collect();
    m.inverse().expect("nondegenerate").mul_vec(&diag)
}

/// φ_γ(τ+1, z) = e(q(γ) − ⟨γ,c⟩/2) φ_γ(τ, z + c/2); valid for odd and even lattices.
pub fn check_t_characteristic(p: &Problem, pt: &JacobiPoint, policy: &TruncationPolicy, floor: f64) -> Result<CheckReport> {
    let sm = p.smoother()?;
    let sp = p.lattice.space();
    let c = characteristic_vector(&p.lattice);
    let cf = linalg::qvec_to_f64(&c);
    let shifted = JacobiPoint::new(pt.tau + 1.0, pt.z.clone())?;
    let moved = JacobiPoint::new(pt.tau, pt.z.iter().zip(&cf).map(|(z, c)| z + c / 2.0).collect())?;
    let lhs = theta_of(p, &sm, &shifted, policy)?;
    let base = theta_of(p, &sm, &moved, policy)?;
    let disc = p.lattice.discriminant_group();
    let half = linalg::qfrac(1, 2);
    let rhs: Vec<Complex64> = disc
        .coset_reps
        .iter()
        .zip(&base.components)
        .map(|(g, x)| {
            let ph = sp.quad(g).expect("dim") - sp.bilinear(g, &c).expect("dim") * half.clone();
            e_rational(&ph) * x
        })
        .collect();
    let (tol, why) = tol_from(floor, &lhs, &base);
    Ok(CheckReport::new("T-characteristic", errors(&lhs.components, &rhs), tol, vec![why]))
}

fn q_complex(sp: &QuadSpace, z: &[Complex64]) -> Complex64 {
    let g = sp.gram_f64();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..z.len() {
        for j in 0..z.len() {
            s += z[i] * g[i][j] * z[j];
        }
    }
    s * 0.5
}

fn e_c(x: Complex64) -> Complex64 {
    (Complex64::new(0.0, 2.0 * PI) * x).exp()
}

/// Sides of the S law, with ρ(S) scaled by `phase` (1 for the plain law).
fn s_sides(p: &Problem, pt: &JacobiPoint, policy: &TruncationPolicy, w: &WeilRep, phase: Complex64) -> Result<(ThetaValue, ThetaValue, Vec<Complex64>)> {
    let sm = p.smoother()?;
    let tau = pt.tau;
    let inv = -1.0 / tau;
    let zt: Vec<Complex64> = pt.z.iter().map(|z| z / tau).collect();
    let lhs = theta_of(p, &sm, &JacobiPoint::new(inv, zt)?, policy)?;
    let base = theta_of(p, &sm, pt, policy)?;
    let n = p.lattice.dim() as i32;
    // (√τ)^{2k} with 2k = dim V, principal branch
    let factor = tau.sqrt().powi(n) * e_c(q_complex(p.lattice.space(), &pt.z) / tau) * phase;
    let scaled: Vec<Complex64> = base.components.iter().map(|x| x * factor).collect();
    let rhs = w.apply(Generator::S, &scaled)?;
    Ok((lhs, base, rhs))
}

/// φ(−1/τ, z/τ) = ρ(S) (√τ)^{2k} e(q(z)/τ) φ(τ, z) with 2k = d⁺ + d⁻.
pub fn check_s(p: &Problem, pt: &JacobiPoint, policy: &TruncationPolicy, floor: f64) -> Result<CheckReport> {
    let w = build_weil(&p.lattice);
    let (lhs, base, rhs) = s_sides(p, pt, policy, &w, Complex64::new(1.0, 0.0))?;
    let (tol, why) = tol_from(floor, &lhs, &base);
    let mut notes = vec![why, format!("sigma_L = [{:.17e}, {:.17e}]", w.sigma_l.re, w.sigma_l.im)];
    let ratio: Vec<String> = lhs.components.iter().zip(&rhs).map(|(a, b)| format!("{:.6}", a / b)).collect();
    notes.push(format!("lhs/rhs per component: {}", ratio.join(", ")));
    Ok(CheckReport::new("S", errors(&lhs.components, &rhs), tol, notes))
}

/// e(−(d⁺ − d⁻)/8), the Gauss sum constant predicted by the signature.
pub fn signature_phase(l: &Lattice) -> Complex64 {
    let (dp, dm) = l.space().signature();
    e_rational(&linalg::qfrac(-(dp as i64 - dm as i64), 8))
}

/// The S law with σ_L replaced by e(−(d⁺ − d⁻)/8). For even lattices the two agree.
pub fn check_s_signature_phase(p: &Problem, pt: &JacobiPoint, policy: &TruncationPolicy, floor: f64) -> Result<CheckReport> {
    let w = build_weil(&p.lattice);
    let phase = signature_phase(&p.lattice) / w.sigma_l;
    let (lhs, base, rhs) = s_sides(p, pt, policy, &w, phase)?;
    let (tol, why) = tol_from(floor, &lhs, &base);
    Ok(CheckReport::new("S-signature-phase", errors(&lhs.components, &rhs), tol, vec![why]))
}

/// φ(τ, z + λτ + μ) = e(−q(λ)τ − ⟨z, λ⟩) φ(τ, z) for λ, μ ∈ L.
pub fn check_elliptic(p: &Problem, pt: &JacobiPoint, lambda: &[i64], mu: &[i64], policy: &TruncationPolicy, floor: f64) -> Result<CheckReport> {
    let n = p.lattice.dim();
    if lambda.len() != n || mu.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: lambda.len().min(mu.len()) });
    }
    let sm = p.smoother()?;
    let sp = p.lattice.space();
    let lf: Vec<f64> = lambda.iter().map(|&x| x as f64).collect();
    let z2: Vec<Complex64> = (0..n).map(|i| pt.z[i] + pt.tau * lf[i] + mu[i] as f64).collect();
    let lhs = theta_of(p, &sm, &JacobiPoint::new(pt.tau, z2)?, policy)?;
    let base = theta_of(p, &sm, pt, policy)?;
    let ql = sp.quad_f(&lf);
    let g = sp.gram_f64();
    let zl: Complex64 = (0..n).map(|i| (0..n).map(|j| pt.z[i] * g[i][j] * lf[j]).sum::<Complex64>()).sum();
    let factor = e_c(-(pt.tau * ql + zl));
    let rhs: Vec<Complex64> = base.components.iter().map(|x| x * factor).collect();
    let (tol, why) = tol_from(floor, &lhs, &base);
    Ok(CheckReport::new("elliptic", errors(&lhs.components, &rhs), tol, vec![why]))
}

/// Kernel-level Vignéras residual at the arguments √y(l + v/y) of the largest terms.
pub fn check_vigneras_theta(p: &Problem, pt: &JacobiPoint, radius: i64, n_terms: usize, h: f64, tol: f64) -> Result<CheckReport> {
    let sm = p.smoother()?;
    let sp = p.lattice.space();
    let n = p.lattice.dim();
    let y = pt.y();
    let shift = pt.shift();
    let v = pt.v();
    let mut cands: Vec<(f64, Vec<f64>)> = Vec::new();
    for rep in p.lattice.discriminant_group().coset_reps {
        let rf = linalg::qvec_to_f64(&rep);
        let mut k = vec![-radius; n];
        'outer: loop {
            let l: Vec<f64> = (0..n).map(|i| rf[i] + k[i] as f64).collect();
            let x: Vec<f64> = (0..n).map(|i| (l[i] + shift[i]) * y.sqrt()).collect();
            let re = -2.0 * PI * (sp.quad_f(&l) * y + sp.bilinear_f(&v, &l));
            let w = sm.eval(&x);
            if w != 0.0 {
                cands.push((w.abs().ln() + re, x));
            }
            let mut i = n;
            loop {
                if i == 0 {
                    break 'outer;
                }
                i -= 1;
                if k[i] < radius {
                    k[i] += 1;
                    break;
                }
                k[i] = -radius;
            }
        }
    }
    cands.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut details = Vec::new();
    let mut skipped = 0;
    for (_, x) in &cands {
        if details.len() >= n_terms {
            break;
        }
        match gerf::vigneras_residual_smoother(&sm, sp, x, h) {
            Ok(r) => details.push(r.abs()),
            Err(Error::TooCloseToWall) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let notes = vec![format!("{} dominant terms, {skipped} skipped near walls", details.len())];
    Ok(CheckReport::new("vigneras", details, tol, notes))
}

/// E[sgn⟨X,a⟩ sgn⟨X,b⟩] for X ~ N(c, Σ) in ℝ², by conditioning on X₁ and
/// integrating the closed-form inner expectation.
fn gauss_sign_pair(a: [f64; 2], b: [f64; 2], c: [f64; 2], s: [[f64; 2]; 2]) -> f64 {
    let s11 = s[0][0];
    let beta = s[1][0] / s11;
    let cv = (s[1][1] - s[1][0] * s[1][0] / s11).max(0.0);
    let sd = cv.sqrt();
    let inner = |x1: f64| -> f64 {
        let m2 = c[1] + beta * (x1 - c[0]);
        // sgn(α x1 + β X2) for X2 ~ N(m2, cv)
        let one = |f: [f64; 2]| -> Option<(f64, f64)> {
            if f[1] == 0.0 {
                None
            } else {
                Some((f[1].signum(), -f[0] * x1 / f[1]))
            }
        };
        let fixed = |f: [f64; 2]| (f[0] * x1).signum();
        match (one(a), one(b)) {
            (Some((sa, ta)), Some((sb, tb))) => {
                let (lo, hi) = if ta < tb { (ta, tb) } else { (tb, ta) };
                let between = if sd == 0.0 {
                    if m2 > lo && m2 < hi { 1.0 } else { 0.0 }
                } else {
                    norm_interval((lo - m2) / sd, (hi - m2) / sd)
                };
                sa * sb * (1.0 - 2.0 * between)
            }
            (Some((sa, ta)), None) => fixed(b) * sa * (1.0 - 2.0 * norm_cdf((ta - m2) / sd)),
            (None, Some((sb, tb))) => fixed(a) * sb * (1.0 - 2.0 * norm_cdf((tb - m2) / sd)),
            (None, None) => fixed(a) * fixed(b),
        }
    };
    let s1 = s11.sqrt();
    let lo = c[0] - 12.0 * s1;
    let hi = c[0] + 12.0 * s1;
    let mut cuts = vec![lo];
    if lo < 0.0 && 0.0 < hi {
        cuts.push(0.0);
    }
    cuts.push(hi);
    cuts.windows(2)
        .map(|w| integrate(|x| inner(x) * phi((x - c[0]) / s1) / s1, w[0], w[1], 1e-14, 1e-13, 30).value)
        .sum()
}

/// E[sgn X sgn(ρ − k X)] for X ~ N(m, s²).
fn gauss_sign_degenerate(m: f64, s: f64, rho: f64, k: f64) -> f64 {
    let mut cuts = vec![m - 12.0 * s, m + 12.0 * s];
    for t in [0.0, rho / k] {
        if t > cuts[0] && t < cuts[cuts.len() - 1] {
            cuts.push(t);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let f = |x: f64| x.signum() * (rho - k * x).signum() * phi((x - m) / s) / s;
    cuts.windows(2).map(|w| integrate(f, w[0], w[1], 1e-15, 1e-13, 30).value).sum()
}

fn running_space() -> QuadSpace {
    QuadSpace::from_i64(&[vec![1, 0, 0], vec![0, -1, 0], vec![0, 0, -1]]).expect("valid")
}

/// Oracle for ŝgn⁺ of the running example: ¼(1 + Σ over the three wall pairs
/// of the smoothed pair sign), each pair integrated directly on its span.
pub fn running_example_direct(v: &[f64]) -> f64 {
    let sp = running_space();
    let ip = |a: &[f64], b: &[f64]| sp.bilinear_f(a, b);
    let w = [[0.0, 0.0, -1.0], [1.0, 1.0, 2.0], [-1.0, -2.0, -2.0]];
    let mut total = 1.0;
    for (i, j) in [(0, 2), (1, 2)] {
        let (a, b) = (w[i], w[j]);
        let g = [[ip(&a, &a), ip(&a, &b)], [ip(&b, &a), ip(&b, &b)]];
        let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        let gi = [[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]];
        let r = [ip(v, &a), ip(v, &b)];
        // coordinates of the projection of v onto span{a, b}
        let c = [gi[0][0] * r[0] + gi[0][1] * r[1], gi[1][0] * r[0] + gi[1][1] * r[1]];
        // density ∝ exp(4π q(x a + y b − proj)), i.e. covariance −G⁻¹/(4π)
        let s = [[-gi[0][0] / (4.0 * PI), -gi[0][1] / (4.0 * PI)], [-gi[1][0] / (4.0 * PI), -gi[1][1] / (4.0 * PI)]];
        // ⟨x a + y b, a⟩ = g₀₀ x + g₀₁ y
        total += gauss_sign_pair(g[0], g[1], c, s);
    }
    // {w₀, w₁}: w₁ = r − 2w₀ with r = (1,1,0) isotropic and orthogonal to both,
    // so ⟨·, r⟩ is frozen at ⟨v, r⟩ while ⟨·, w₀⟩ ~ N(⟨v, w₀⟩, 1/(4π))
    let rho = ip(v, &[1.0, 1.0, 0.0]);
    let s0 = (-ip(&w[0], &w[0]) / (4.0 * PI)).sqrt();
    total += gauss_sign_degenerate(ip(v, &w[0]), s0, rho, 2.0);
    total / 4.0
}

/// The displayed closed formula for the running example, read literally
/// (the ṽᵢ taken as their scalar coordinates).
pub fn running_example_literal(v: &[f64]) -> f64 {
    let t1 = v[2];
    let t2 = (v[1] + 2.0 * v[2] - v[0]) / 4.0;
    let t3 = (2.0 * v[1] + 2.0 * v[2] - v[0]) / 7.0;
    // √3 ∫ sgn(L₁) sgn(L₂) exp(−π Δᵀ A Δ) = √3 / √det A · E[...]
    let term = |a: [f64; 2], b: [f64; 2], quad: [[f64; 2]; 2], c: [f64; 2]| -> f64 {
        let am = [[4.0 * quad[0][0], 4.0 * quad[0][1]], [4.0 * quad[1][0], 4.0 * quad[1][1]]];
        let det = am[0][0] * am[1][1] - am[0][1] * am[1][0];
        let inv = [[am[1][1] / det, -am[0][1] / det], [-am[1][0] / det, am[0][0] / det]];
        let s = [[inv[0][0] / (2.0 * PI), inv[0][1] / (2.0 * PI)], [inv[1][0] / (2.0 * PI), inv[1][1] / (2.0 * PI)]];
        3f64.sqrt() / det.sqrt() * gauss_sign_pair(a, b, c, s)
    };
    0.5 + term([4.0, 5.0], [5.0, 7.0], [[4.0, 5.0], [5.0, 7.0]], [t1, t3])
        + term([1.0, 2.0], [2.0, 7.0], [[1.0, 2.0], [2.0, 7.0]], [t2, t3])
}

/// (oracle, pipeline) values of ŝgn⁺ for the running example.
pub fn running_example_oracle(v: &[f64], cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let p = Problem::example("running").expect("built in");
    if v.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: v.len() });
    }
    let pipe = gerf::sgn_hat_cone(&p.walls, &p.poly, v, cfg)?;
    Ok((running_example_direct(v), pipe))
}

/// Pipeline/oracle agreement on a deterministic sample of points.
pub fn check_running_example(points: &[Vec<f64>], cfg: &QuadratureConfig, tol: f64) -> Result<CheckReport> {
    let mut details = Vec::with_capacity(points.len());
    let mut lit = 0.0f64;
    for v in points {
        let (o, p) = running_example_oracle(v, cfg)?;
        details.push((o - p).abs());
        lit = lit.max((running_example_literal(v) - p).abs());
    }
    let notes = vec![format!("literal closed formula deviates by up to {lit:e}")];
    Ok(CheckReport::new("example", details, tol, notes))
}

/// Deterministic points in the box [−r, r]³ (a fixed low-discrepancy sequence).
pub fn box_points(count: usize, dim: usize, r: f64) -> Vec<Vec<f64>> {
    const PRIMES: [f64; 6] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0];
    (1..=count)
        .map(|i| {
            (0..dim)
                .map(|d| {
                    // radical inverse in base PRIMES[d]
                    let (mut f, mut x, mut k) = (1.0, 0.0, i);
                    let b = PRIMES[d % 6];
                    while k > 0 {
                        f /= b;
                        x += f * (k as f64 % b);
                        k = (k as f64 / b).floor() as usize;
                    }
                    (2.0 * x - 1.0) * r
                })
                .collect()
        })
        .collect()
}

/// Runs every check of the named kind list; reports come back in input order.
pub fn run_checks(p: &Problem, checks: &[String], policy: &TruncationPolicy, floor: f64) -> Result<Vec<CheckReport>> {
    let pt = p.point()?.clone();
    let n = p.lattice.dim();
    let mut out = Vec::new();
    for c in checks {
        let r = match c.as_str() {
            "T" => check_t(p, &pt, policy, floor)?,
            "T-characteristic" => check_t_characteristic(p, &pt, policy, floor)?,
            "S" => check_s(p, &pt, policy, floor)?,
            "S-signature-phase" => check_s_signature_phase(p, &pt, policy, floor)?,
            "elliptic" => {
                let lambda: Vec<i64> = (0..n).map(|i| if i == 0 { 1 } else { 0 }).collect();
                let mu: Vec<i64> = (0..n).map(|i| if i + 1 == n { 1 } else { 0 }).collect();
                check_elliptic(p, &pt, &lambda, &mu, policy, floor)?
            }
            "vigneras" => check_vigneras_theta(p, &pt, 4, 20, 1e-3, 1e-4)?,
            "example" => check_running_example(&box_points(50, 3, 3.0), &p.cfg, 1e-7)?,
            other => return Err(Error::Validation(format!("--checks: unknown check {other:?}"))),
        };
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn control_lattice_laws() {
        let p = Problem::example("control-posdef").unwrap();
        let pt = JacobiPoint::new(Complex64::new(0.1, 0.9), vec![Complex64::new(0.2, 0.1)]).unwrap();
        let pol = TruncationPolicy::fixed(12);
        for r in [
            check_t(&p, &pt, &pol, 1e-10).unwrap(),
            check_s(&p, &pt, &pol, 1e-10).unwrap(),
            check_elliptic(&p, &pt, &[1], &[-2], &pol, 1e-10).unwrap(),
        ] {
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn gauss_sign_pair_independent_case() {
        // independent coordinates: E[sgn X] E[sgn Y]
        let e = gauss_sign_pair([1.0, 0.0], [0.0, 1.0], [0.3, -0.2], [[1.0, 0.0], [0.0, 0.25]]);
        let expect = (2.0 * norm_cdf(0.3) - 1.0) * (2.0 * norm_cdf(-0.4) - 1.0);
        assert!((e - expect).abs() < 1e-12, "{e} {expect}");
    }

    #[test]
    fn oracle_deep_interior() {
        // (4,1,1) pairs positively with all three walls? ⟨v,w⟩ = (1, 4−1−2, −4+2+2) has a zero; use (6.5,3,1)
        let v = [6.5 * 3.0, 9.0, 3.0];
        let (o, p) = running_example_oracle(&v, &QuadratureConfig::default()).unwrap();
        assert!((o - 1.0).abs() < 1e-4 && (p - 1.0).abs() < 1e-4, "{o} {p}");
    }
}
