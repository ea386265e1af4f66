//! Theta series over L^∨ weighted by cone membership, sign polynomials or
//! their smoothings.

use crate::cone::{self, Membership, SignPolynomial, WallSet};
use crate::error::{Error, Result};
use crate::gerf::{ConeSmoother, QuadratureConfig};
use crate::linalg::{self, smith, QVec, ZMat, Q};
use crate::numeric::sum::{ComplexSum, NeumaierSum};
use crate::quadspace::Lattice;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use std::f64::consts::PI;

/// Terms whose magnitude bound falls below e^{LN_CUTOFF} are skipped.
const LN_CUTOFF: f64 = -92.0;

#[derive(Clone, Debug, PartialEq)]
pub struct JacobiPoint {
    pub tau: Complex64,
    pub z: Vec<Complex64>,
}

impl JacobiPoint {
    pub fn new(tau: Complex64, z: Vec<Complex64>) -> Result<Self> {
        if !(tau.im > 0.0) {
            return Err(Error::Validation("Im(tau) must be positive".into()));
        }
        Ok(JacobiPoint { tau, z })
    }
    pub fn y(&self) -> f64 {
        self.tau.im
    }
    pub fn u(&self) -> Vec<f64> {
        self.z.iter().map(|c| c.re).collect()
    }
    pub fn v(&self) -> Vec<f64> {
        self.z.iter().map(|c| c.im).collect()
    }
    /// v / y
    pub fn shift(&self) -> Vec<f64> {
        self.z.iter().map(|c| c.im / self.tau.im).collect()
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct TruncationPolicy {
    pub term_tol: f64,
    pub initial_radius: usize,
    pub max_radius: usize,
    pub doubling: bool,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { term_tol: 1e-9, initial_radius: 8, max_radius: 64, doubling: true }
    }
}

impl TruncationPolicy {
    pub fn fixed(radius: usize) -> Self {
        TruncationPolicy { initial_radius: radius, max_radius: radius.max(1), doubling: false, ..Default::default() }
    }
}

fn ser_complex_vec<S: Serializer>(v: &[Complex64], s: S) -> std::result::Result<S::Ok, S::Error> {
    let pairs: Vec<[f64; 2]> = v.iter().map(|c| [c.re, c.im]).collect();
    pairs.serialize(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaValue {
    #[serde(serialize_with = "ser_complex_vec")]
    pub components: Vec<Complex64>,
    pub terms_used: usize,
    pub tail_estimate: f64,
    pub radius: usize,
    pub warnings: Vec<String>,
}

impl ThetaValue {
    pub fn max_diff(&self, other: &ThetaValue) -> f64 {
        self.components.iter().zip(&other.components).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Result of the singular-set predicate.
#[derive(Clone, Debug, Serialize)]
pub struct SingularInfo {
    /// f64::INFINITY when no isotropic edge constrains the point
    pub distance: f64,
    pub edge: Vec<usize>,
    pub generator: Vec<String>,
}

/// Generators of L^∨ ∩ U for the rational span U of the given vectors.
pub fn dual_lattice_generators(l: &Lattice, basis: &[QVec]) -> Vec<QVec> {
    if basis.is_empty() {
        return vec![];
    }
    let m = l.space().gram();
    let n = l.dim();
    // x = m⁻¹ k lies in U iff k ∈ m U; saturate m U ∩ ℤⁿ
    let cols: Vec<QVec> = basis.iter().map(|b| m.mul_vec(b)).collect();
    let mut z = ZMat::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        let den = c.iter().fold(num_bigint::BigInt::one(), |acc, x| acc.lcm(x.denom()));
        for i in 0..n {
            *z.at(i, j) = (&c[i] * Q::from_integer(den.clone())).to_integer();
        }
    }
    let (u, d, _v) = smith(&z);
    let rank = (0..n.min(cols.len())).filter(|&i| !d.get(i, i).is_zero()).count();
    let uinv = u.to_qmat().inverse().expect("unimodular");
    let minv = m.inverse().expect("nondegenerate");
    (0..rank).map(|j| minv.mul_vec(&uinv.col(j))).collect()
}

/// Distance of (τ, z) to the set where some isotropic edge produces a pole.
pub fn singular_set_distance(l: &Lattice, w: &WallSet, pt: &JacobiPoint) -> Result<SingularInfo> {
    let shift = pt.shift();
    let mut best = SingularInfo { distance: f64::INFINITY, edge: vec![], generator: vec![] };
    for e in cone::edges(w).into_iter().filter(|e| e.is_isotropic) {
        if !e.is_rational {
            return Err(Error::NonRationalEdge(e.subset));
        }
        for g in dual_lattice_generators(l, &e.radical) {
            // ⟨L^∨, g⟩ = c ℤ with c the gcd of the coordinates of g
            let c = g.iter().filter(|x| !x.is_zero()).fold(Q::zero(), |acc, x| rat_gcd(&acc, &x.abs()));
            // ℤ + cℤ = (1/den c) ℤ
            let step = if c.is_zero() { 1.0 } else { 1.0 / linalg::q_to_f64(&Q::from_integer(c.denom().clone())) };
            let gf = linalg::qvec_to_f64(&g);
            let t = l.space().bilinear_f(&shift, &gf);
            let d = linalg::dist_to_lattice(t, step);
            if d < best.distance {
                best = SingularInfo { distance: d, edge: e.subset.clone(), generator: g.iter().map(linalg::fmt_q).collect() };
            }
        }
    }
    Ok(best)
}

fn rat_gcd(a: &Q, b: &Q) -> Q {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    let den = a.denom().lcm(b.denom());
    let an = (a * Q::from_integer(den.clone())).to_integer();
    let bn = (b * Q::from_integer(den.clone())).to_integer();
    Q::new(an.gcd(&bn), den)
}

/// The weight attached to each lattice point.
pub enum Kernel<'a> {
    /// 1 on the closed cone C ∪ −C
    Cone(&'a WallSet),
    /// sgn_C⁺(l + v/y)
    Sign(&'a WallSet, Vec<(Vec<usize>, f64)>),
    /// ŝgn_C⁺(√y (l + v/y))
    Hat(&'a ConeSmoother),
    /// constant 1 (the full space)
    One,
}

#[derive(Default, Clone)]
struct Shells {
    sums: Vec<Vec<ComplexSum>>,
    abs: Vec<NeumaierSum>,
    terms: usize,
}

impl Shells {
    fn new(ncos: usize, r: usize) -> Self {
        Shells { sums: vec![vec![ComplexSum::default(); r + 1]; ncos], abs: vec![NeumaierSum::new(); r + 1], terms: 0 }
    }
    fn merge(&mut self, o: &Shells) {
        for (a, b) in self.sums.iter_mut().zip(&o.sums) {
            for (x, y) in a.iter_mut().zip(b) {
                x.merge(y);
            }
        }
        for (x, y) in self.abs.iter_mut().zip(&o.abs) {
            x.add(y.value());
        }
        self.terms += o.terms;
    }
}

struct Ctx<'a> {
    l: &'a Lattice,
    kernel: &'a Kernel<'a>,
    reps: Vec<Vec<f64>>,
    y: f64,
    x: f64,
    u: Vec<f64>,
    v: Vec<f64>,
    shift: Vec<f64>,
}

impl Ctx<'_> {
    fn weight_and_ln(&self, xp: &[f64], re: f64) -> Result<Option<f64>> {
        Ok(match self.kernel {
            Kernel::One => Some(1.0),
            Kernel::Cone(w) => (cone::membership(w, xp) != Membership::Outside).then_some(1.0),
            Kernel::Sign(w, terms) => {
                let s: Vec<f64> = w.pairings(xp).iter().map(|&p| cone::sign_f(p)).collect();
                let val: f64 = terms.iter().map(|(e, a)| a * e.iter().map(|&j| s[j]).product::<f64>()).sum();
                (val != 0.0).then_some(val)
            }
            Kernel::Hat(sm) => {
                let sy = self.y.sqrt();
                let xs: Vec<f64> = xp.iter().map(|c| c * sy).collect();
                let lnb = sm.ln_correction_bound(&xs);
                // cheap magnitude bound before any quadrature
                let ln_mag = (sm.weight_bound() + lnb.exp()).ln();
                if ln_mag + re < LN_CUTOFF {
                    return Ok(None);
                }
                let (b, c, lost) = if lnb + re < LN_CUTOFF { (sm.eval_split(&xs).0, 0.0, 0.0) } else { sm.eval_parts(&xs) };
                if b == 0.0 && lnb + re < LN_CUTOFF {
                    return Ok(None);
                }
                // an underflowed probability times a huge Gaussian factor is not negligible
                if lost > 0.0 && lost.ln() + re > LN_CUTOFF {
                    return Err(Error::NonFinite);
                }
                let w = b + c;
                (w != 0.0).then_some(w)
            }
        })
    }

    /// Shells r_lo < k ≤ r_hi of one slab (coset, first coordinate fixed).
    fn slab(&self, coset: usize, k0: i64, r_lo: Option<usize>, r_hi: usize, ncos: usize) -> Result<Shells> {
        let n = self.l.dim();
        let rep = &self.reps[coset];
        let space = self.l.space();
        let mut out = Shells::new(ncos, r_hi);
        let rh = r_hi as f64;
        let ranges: Vec<(i64, i64)> = (0..n)
            .map(|i| {
                let off = rep[i] + self.shift[i];
                ((-rh - off).ceil() as i64, (rh - off).floor() as i64)
            })
            .collect();
        let mut k = vec![0i64; n];
        k[0] = k0;
        for i in 1..n {
            k[i] = ranges[i].0;
        }
        if (1..n).any(|i| ranges[i].0 > ranges[i].1) {
            return Ok(out);
        }
        let mut lv = vec![0.0; n];
        let mut xp = vec![0.0; n];
        loop {
            for i in 0..n {
                lv[i] = rep[i] + k[i] as f64;
                xp[i] = lv[i] + self.shift[i];
            }
            let norm = xp.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            let shell = norm.ceil().max(0.0) as usize;
            if r_lo.is_none_or(|r| shell > r) && shell <= r_hi {
                let ql = space.quad_f(&lv);
                let re = -2.0 * PI * (ql * self.y + dotf(&self.v, &lv, space));
                let im = 2.0 * PI * (ql * self.x + dotf(&self.u, &lv, space));
                if let Some(w) = self.weight_and_ln(&xp, re)? {
                    let ln = w.abs().ln() + re;
                    if ln > 709.0 {
                        return Err(Error::NonFinite);
                    }
                    if ln > LN_CUTOFF - 654.0 {
                        let mag = ln.exp() * w.signum();
                        let term = Complex64::from_polar(mag, im);
                        out.sums[coset][shell].add(term);
                        out.abs[shell].add(mag.abs());
                        out.terms += 1;
                    }
                }
            }
            // advance the odometer over coordinates 1..n (last fastest)
            let mut i = n - 1;
            loop {
                if i == 0 {
                    return Ok(out);
                }
                if k[i] < ranges[i].1 {
                    k[i] += 1;
                    break;
                }
                k[i] = ranges[i].0;
                i -= 1;
            }
        }
    }
}

fn dotf(a: &[f64], l: &[f64], space: &crate::quadspace::QuadSpace) -> f64 {
    space.bilinear_f(a, l)
}

/// Shell sums for r_lo < shell ≤ r_hi (all shells up to r_hi when r_lo is None), in a fixed order.
fn shell_sums(l: &Lattice, kernel: &Kernel, pt: &JacobiPoint, r_lo: Option<usize>, r_hi: usize) -> Result<Shells> {
    let disc = l.discriminant_group();
    let reps: Vec<Vec<f64>> = disc.coset_reps.iter().map(|r| linalg::qvec_to_f64(r)).collect();
    let ncos = reps.len();
    let ctx = Ctx {
        l,
        kernel,
        reps,
        y: pt.y(),
        x: pt.tau.re,
        u: pt.u(),
        v: pt.v(),
        shift: pt.shift(),
    };
    let rh = r_hi as f64;
    let mut jobs = Vec::new();
    for c in 0..ncos {
        let off = ctx.reps[c][0] + ctx.shift[0];
        let lo = (-rh - off).ceil() as i64;
        let hi = (rh - off).floor() as i64;
        for k0 in lo..=hi {
            jobs.push((c, k0));
        }
    }
    let parts: Vec<Result<Shells>> = jobs.par_iter().map(|&(c, k0)| ctx.slab(c, k0, r_lo, r_hi, ncos)).collect();
    let mut total = Shells::new(ncos, r_hi);
    for p in parts {
        total.merge(&p?);
    }
    Ok(total)
}

fn assemble(sh: &Shells, radius: usize) -> (Vec<Complex64>, f64) {
    let comps = sh
        .sums
        .iter()
        .map(|per| {
            let mut acc = ComplexSum::default();
            for s in per.iter().take(radius + 1) {
                acc.merge(s);
            }
            acc.value()
        })
        .collect();
    let a = |k: usize| sh.abs.get(k).map_or(0.0, |x| x.value());
    let last = a(radius);
    let prev = if radius > 0 { a(radius - 1) } else { 0.0 };
    let tail = if last == 0.0 {
        0.0
    } else if prev > 0.0 && last < prev {
        let r = last / prev;
        last * r / (1.0 - r)
    } else {
        last * radius.max(1) as f64
    };
    (comps, tail)
}

fn grow(total: &mut Shells, extra: Shells) {
    let r_new = extra.abs.len() - 1;
    for (a, b) in total.sums.iter_mut().zip(extra.sums) {
        a.resize(r_new + 1, ComplexSum::default());
        for (k, s) in b.into_iter().enumerate() {
            if k >= a.len() {
                break;
            }
            a[k].merge(&s);
        }
    }
    total.abs.resize(r_new + 1, NeumaierSum::new());
    for (k, s) in extra.abs.into_iter().enumerate() {
        total.abs[k].add(s.value());
    }
    total.terms += extra.terms;
}

/// Generic truncated evaluation following the policy.
pub fn theta_with_kernel(l: &Lattice, kernel: &Kernel, pt: &JacobiPoint, policy: &TruncationPolicy) -> Result<ThetaValue> {
    if pt.z.len() != l.dim() {
        return Err(Error::DimensionMismatch { expected: l.dim(), got: pt.z.len() });
    }
    if policy.initial_radius == 0 || !(policy.term_tol > 0.0) {
        return Err(Error::Validation("radius and term_tol must be positive".into()));
    }
    let mut r = policy.initial_radius;
    let mut total = shell_sums(l, kernel, pt, None, r)?;
    total.sums.iter_mut().for_each(|s| s.resize(r + 1, ComplexSum::default()));
    let (mut comps, mut tail) = assemble(&total, r);
    let mut warnings = Vec::new();
    if policy.doubling {
        let mut last_change = 0.0f64;
        loop {
            let r2 = 2 * r;
            if r2 > policy.max_radius {
                // an empty outer shell (e.g. from underflow) must not hide a large last doubling step
                let change = tail.max(last_change);
                if change > policy.term_tol {
                    return Err(Error::TruncationNotConverged { radius: r, change });
                }
                break;
            }
            let extra = shell_sums(l, kernel, pt, Some(r), r2)?;
            grow(&mut total, extra);
            let (c2, t2) = assemble(&total, r2);
            let change = comps.iter().zip(&c2).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            comps = c2;
            tail = t2;
            r = r2;
            last_change = change;
            if change <= policy.term_tol {
                break;
            }
        }
    }
    if comps.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if tail > policy.term_tol {
        warnings.push(format!("tail estimate {tail:e} exceeds term_tol"));
    }
    Ok(ThetaValue { components: comps, terms_used: total.terms, tail_estimate: tail, radius: r, warnings })
}

fn preflight(l: &Lattice, w: &WallSet, pt: &JacobiPoint) -> Result<Vec<String>> {
    let rep = cone::validate(w, l);
    if !rep.passed() {
        return Err(Error::Validation(rep.failures.join("; ")));
    }
    let s = singular_set_distance(l, w, pt)?;
    if s.distance <= 1e-12 {
        return Err(Error::OnSingularSet { edge: s.edge, generator: s.generator });
    }
    let mut warn = Vec::new();
    if s.distance < 0.01 {
        warn.push(format!("near the singular set (distance {:e}); convergence may be slow", s.distance));
    }
    Ok(warn)
}

/// Σ over l ∈ L^∨ with l + v/y in the closed cone.
pub fn theta_cone(l: &Lattice, w: &WallSet, pt: &JacobiPoint, policy: &TruncationPolicy) -> Result<ThetaValue> {
    let warn = preflight(l, w, pt)?;
    let mut t = theta_with_kernel(l, &Kernel::Cone(w), pt, policy)?;
    t.warnings.extend(warn);
    Ok(t)
}

pub fn theta_sign(l: &Lattice, w: &WallSet, p: &SignPolynomial, pt: &JacobiPoint, policy: &TruncationPolicy) -> Result<ThetaValue> {
    let warn = preflight(l, w, pt)?;
    let mut t = theta_with_kernel(l, &Kernel::Sign(w, p.terms_f64()), pt, policy)?;
    t.warnings.extend(warn);
    Ok(t)
}

pub fn theta_hat(
    l: &Lattice,
    w: &WallSet,
    p: &SignPolynomial,
    pt: &JacobiPoint,
    policy: &TruncationPolicy,
    cfg: &QuadratureConfig,
) -> Result<ThetaValue> {
    let sm = ConeSmoother::new(w, p, cfg)?;
    theta_hat_smoother(l, w, &sm, pt, policy)
}

pub fn theta_hat_smoother(l: &Lattice, w: &WallSet, sm: &ConeSmoother, pt: &JacobiPoint, policy: &TruncationPolicy) -> Result<ThetaValue> {
    let warn = preflight(l, w, pt)?;
    let mut t = theta_with_kernel(l, &Kernel::Hat(sm), pt, policy)?;
    t.warnings.extend(warn);
    Ok(t)
}

/// Classical theta series of a positive definite lattice (kernel ≡ 1).
pub fn theta_classical(l: &Lattice, pt: &JacobiPoint, policy: &TruncationPolicy) -> Result<ThetaValue> {
    if l.space().d_minus() != 0 {
        return Err(Error::Validation("classical theta needs a positive definite lattice".into()));
    }
    theta_with_kernel(l, &Kernel::One, pt, policy)
}

/// Terms of theta_sign and theta_cone that differ, at radius r (for diagnostics).
pub fn boundary_points(l: &Lattice, w: &WallSet, p: &SignPolynomial, pt: &JacobiPoint, r: i64) -> Vec<(QVec, Membership, Q)> {
    let n = l.dim();
    let shift: Vec<Q> = pt.shift().iter().map(|x| Q::from_float(*x).unwrap_or_else(Q::zero)).collect();
    let mut out = Vec::new();
    for rep in l.discriminant_group().coset_reps {
        let mut k = vec![-r; n];
        'points: loop {
            let lv: QVec = rep.iter().zip(&k).map(|(a, b)| a + Q::from_integer((*b).into())).collect();
            let xp: QVec = lv.iter().zip(&shift).map(|(a, b)| a + b).collect();
            let m = cone::membership_exact(w, &xp);
            let s = p.eval_exact(w, &xp);
            let cone_w = if m == Membership::Outside { Q::zero() } else { Q::one() };
            if cone_w != s {
                out.push((lv, m, s));
            }
            let mut i = n;
            loop {
                if i == 0 {
                    break 'points;
                }
                i -= 1;
                if k[i] < r {
                    k[i] += 1;
                    break;
                }
                k[i] = -r;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classical_theta_at_i() {
        let (l, _) = examples::control_posdef();
        let pt = JacobiPoint::new(c(0.0, 1.0), vec![c(0.0, 0.0)]).unwrap();
        let t = theta_classical(&l, &pt, &TruncationPolicy::fixed(8)).unwrap();
        let e = (-2.0 * PI).exp();
        let expect0: f64 = 1.0 + 2.0 * e + 2.0 * e.powi(4) + 2.0 * e.powi(9);
        assert!((t.components[0].re - expect0).abs() < 1e-15);
        // the ½ coset: Σ exp(−2π (n+½)²)
        let expect1: f64 = (-20..20).map(|n| (-2.0 * PI * (n as f64 + 0.5).powi(2)).exp()).sum();
        assert!((t.components[1].re - expect1).abs() < 1e-15);
    }

    #[test]
    fn singular_distance_running() {
        let (l, w) = examples::running();
        let pt = JacobiPoint::new(c(0.0, 1.0), vec![c(0.1, 0.3), c(0.0, 0.1), c(0.2, 0.2)]).unwrap();
        let s = singular_set_distance(&l, &w, &pt).unwrap();
        assert!((s.distance - 0.2).abs() < 1e-12);
        let z0 = JacobiPoint::new(c(0.0, 1.0), vec![c(0.0, 0.0); 3]).unwrap();
        assert_eq!(singular_set_distance(&l, &w, &z0).unwrap().distance, 0.0);
        assert!(matches!(theta_cone(&l, &w, &z0, &TruncationPolicy::fixed(4)), Err(Error::OnSingularSet { .. })));
        let (lp, wp) = examples::control_posdef();
        let p = JacobiPoint::new(c(0.0, 1.0), vec![c(0.0, 0.0)]).unwrap();
        assert!(singular_set_distance(&lp, &wp, &p).unwrap().distance.is_infinite());
    }

    #[test]
    fn cone_equals_sign_off_boundary() {
        let (l, w) = examples::running();
        let p = cone::face_indicator(&w);
        let pt = JacobiPoint::new(c(0.0, 1.0), vec![c(0.0, 0.31), c(0.0, 0.07), c(0.0, 0.13)]).unwrap();
        let a = theta_cone(&l, &w, &pt, &TruncationPolicy::fixed(8)).unwrap();
        let b = theta_sign(&l, &w, &p, &pt, &TruncationPolicy::fixed(8)).unwrap();
        // no lattice point of this shifted lattice lies on a wall
        assert!(boundary_points(&l, &w, &p, &pt, 4).iter().all(|(_, m, _)| *m == Membership::OnBoundary));
        assert!(a.max_diff(&b) < 1e-12);
    }

    #[test]
    fn boundary_points_visit_every_coset() {
        // the running cone on 2·L_ex: with shift ½ in the last coordinate only the cosets
        // with last coordinate ½ reach the wall x₃ = 0
        let l = Lattice::from_i64(&[vec![2, 0, 0], vec![0, -2, 0], vec![0, 0, -2]]).unwrap();
        let w = WallSet::from_i64(l.space(), &[vec![0, 0, -1], vec![1, 1, 2], vec![-1, -2, -2]], cone::ConeKind::Tetrahedral, vec![]).unwrap();
        let p = cone::face_indicator(&w);
        let pt = JacobiPoint::new(c(0.0, 1.0), vec![c(0.0, 0.2), c(0.0, 0.15), c(0.0, 0.5)]).unwrap();
        let b = boundary_points(&l, &w, &p, &pt, 3);
        assert!(!b.is_empty());
        assert!(b.iter().all(|(lv, m, _)| lv[2] == crate::linalg::qfrac(-1, 2) && *m == Membership::OnBoundary));
    }
}
