//! Generalized error functions: smoothed signs and smoothed sector volumes.
//!
//! For a set E of walls with negative semidefinite span, the Gaussian
//! V' ~ exp(4π q(· − v)) on span E is pushed forward to the pairing
//! coordinates X_j = ⟨V', w_j⟩, which are jointly normal with mean
//! ⟨v, w_j⟩ and covariance −⟨w_i, w_j⟩/(4π). Then
//! ŝgn_E(v) = E[∏ sgn X_j] and v̂ol_E(v) = P[every X_j has the sign opposite to ⟨v, w_j⟩].
//! Isotropic directions of a semidefinite span have zero variance, so the
//! corresponding coordinates are deterministic.

pub mod orthant;

use crate::cone::{SignPolynomial, WallSet};
use crate::error::{Error, Result};
use crate::linalg::{self, inertia, QMat, QVec};
use crate::numeric::special::{ln_norm_sf, norm_sf};
use crate::quadspace::QuadSpace;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use orthant::{orthant, OrthantOpts};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
    pub mc_check_samples: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { abs_tol: 1e-10, rel_tol: 1e-12, max_depth: 24, mc_check_samples: 0 }
    }
}

impl QuadratureConfig {
    fn opts(&self) -> OrthantOpts {
        // orthant tails are computed to relative accuracy; abs_tol bounds the final error
        OrthantOpts { rel_tol: self.rel_tol.min(self.abs_tol), abs_tol: 1e-300, max_depth: self.max_depth }
    }
}

/// How to smooth a sign product whose span is degenerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SemidefiniteRule {
    /// Degenerate Gaussian in pairing coordinates (continuous limit of definite spans).
    #[default]
    Limit,
    /// Smooth the non-isotropic walls on the quotient by the radical, keep isotropic signs.
    Quotient,
}

/// A finite set of vectors with negative semidefinite span.
#[derive(Clone, Debug)]
pub struct NegDefFrame {
    pub vectors: Vec<QVec>,
    pub gram_e: QMat,
    pub radical_basis: Vec<QVec>,
    /// indices with ⟨w, w⟩ = 0
    pub e0: Vec<usize>,
    functionals: Vec<Vec<f64>>,
    cov: Vec<Vec<f64>>,
}

impl NegDefFrame {
    pub fn new(space: &QuadSpace, vectors: Vec<QVec>) -> Result<Self> {
        for w in &vectors {
            if w.len() != space.dim() {
                return Err(Error::DimensionMismatch { expected: space.dim(), got: w.len() });
            }
        }
        let gram_e = space.gram_of(&vectors);
        let (p, _, _) = inertia(&gram_e);
        if p > 0 {
            return Err(Error::SpanNotNegativeSemidefinite);
        }
        let radical_basis = crate::cone::span_radical(space, &vectors);
        let e0 = (0..vectors.len()).filter(|&i| gram_e.get(i, i).is_zero()).collect();
        let functionals = vectors.iter().map(|w| linalg::qvec_to_f64(&space.functional(w))).collect();
        let g = gram_e.to_f64();
        let cov = g.iter().map(|r| r.iter().map(|x| -x / (4.0 * PI)).collect()).collect();
        Ok(NegDefFrame { vectors, gram_e, radical_basis, e0, functionals, cov })
    }

    pub fn from_i64(space: &QuadSpace, vectors: &[Vec<i64>]) -> Result<Self> {
        Self::new(space, vectors.iter().map(|v| linalg::qvec_from_i64(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }
    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn is_definite(&self) -> bool {
        self.radical_basis.is_empty() && QMat::from_rows(&self.vectors).rank() == self.vectors.len()
    }

    /// Pairings ⟨v, w_j⟩.
    pub fn means(&self, v: &[f64]) -> Vec<f64> {
        self.functionals.iter().map(|f| f.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// Covariance −⟨w_i, w_j⟩/(4π) of the pairing coordinates.
    pub fn covariance(&self) -> &[Vec<f64>] {
        &self.cov
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        let n = self.functionals.first().map_or(v.len(), |f| f.len());
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
        Ok(())
    }
}

fn tie_sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// sgn_E(v) = ∏ sgn⟨v, w⟩ with sgn(0) = 0.
pub fn sgn_e(frame: &NegDefFrame, v: &[f64]) -> i8 {
    frame.means(v).iter().map(|&m| crate::cone::sign_f(m) as i8).product()
}

/// P[s_j X_j < 0 for j in idx] for given signs s and means μ.
fn flipped_probability(cov: &[Vec<f64>], idx: &[usize], mu: &[f64], s: &[f64], o: &OrthantOpts) -> f64 {
    let k = idx.len();
    let mean: Vec<f64> = idx.iter().map(|&j| -s[j] * mu[j]).collect();
    let mut c = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            c[a][b] = s[idx[a]] * s[idx[b]] * cov[idx[a]][idx[b]];
        }
    }
    orthant(&mean, &c, o)
}

/// P[X_j flipped for j ∈ flip, X_j not flipped for j ∈ keep].
fn pattern_probability(cov: &[Vec<f64>], flip: &[usize], keep: &[usize], mu: &[f64], s: &[f64], o: &OrthantOpts) -> f64 {
    let idx: Vec<usize> = flip.iter().chain(keep).copied().collect();
    let sigma: Vec<f64> = flip.iter().map(|&j| -s[j]).chain(keep.iter().map(|&j| s[j])).collect();
    let mean: Vec<f64> = idx.iter().zip(&sigma).map(|(&j, g)| g * mu[j]).collect();
    let k = idx.len();
    let mut c = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in 0..k {
            c[a][b] = sigma[a] * sigma[b] * cov[idx[a]][idx[b]];
        }
    }
    orthant(&mean, &c, o)
}

fn bits(mask: u32) -> Vec<usize> {
    (0..32).filter(|j| mask & (1 << j) != 0).collect()
}

/// Smoothed volume of the sector opposite to v; ties on a wall count as the positive side.
pub fn vol_hat(frame: &NegDefFrame, v: &[f64], cfg: &QuadratureConfig) -> Result<f64> {
    frame.check_len(v)?;
    if frame.len() > 4 {
        return Err(Error::UnsupportedDimension(frame.len()));
    }
    if frame.is_empty() {
        return Ok(1.0);
    }
    let mu = frame.means(v);
    let s: Vec<f64> = mu.iter().map(|&m| tie_sign(m)).collect();
    let idx: Vec<usize> = (0..frame.len()).collect();
    Ok(flipped_probability(&frame.cov, &idx, &mu, &s, &cfg.opts()))
}

/// ŝgn_E(v) through ŝgn_E = sgn_E(v) Σ_{E'⊆E} (−2)^{|E'|} v̂ol_{E'}(v).
pub fn sgn_hat(frame: &NegDefFrame, v: &[f64], cfg: &QuadratureConfig) -> Result<f64> {
    sgn_hat_with(frame, v, cfg, SemidefiniteRule::Limit)
}

pub fn sgn_hat_with(frame: &NegDefFrame, v: &[f64], cfg: &QuadratureConfig, rule: SemidefiniteRule) -> Result<f64> {
    frame.check_len(v)?;
    let n = frame.len();
    if n > 4 {
        return Err(Error::UnsupportedDimension(n));
    }
    let mut mu = frame.means(v);
    if rule == SemidefiniteRule::Quotient && !frame.is_definite() {
        return Ok(sgn_hat_quotient(frame, &mut mu, cfg));
    }
    Ok(decomposed(&frame.cov, &mu, cfg))
}

fn decomposed(cov: &[Vec<f64>], mu: &[f64], cfg: &QuadratureConfig) -> f64 {
    let n = mu.len();
    let s: Vec<f64> = mu.iter().map(|&m| tie_sign(m)).collect();
    let sgn: f64 = s.iter().product();
    let o = cfg.opts();
    let mut acc = crate::numeric::sum::NeumaierSum::new();
    acc.add(1.0);
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        let p = flipped_probability(cov, &idx, mu, &s, &o);
        acc.add((-2.0f64).powi(idx.len() as i32) * p);
    }
    sgn * acc.value()
}

/// The quotient construction: isotropic walls keep their exact sign, the
/// remaining walls are smoothed on span E modulo its radical, anchored at the
/// pairings projected onto the range of the Gram matrix.
fn sgn_hat_quotient(frame: &NegDefFrame, mu: &mut [f64], cfg: &QuadratureConfig) -> f64 {
    let n = frame.len();
    let minus: Vec<usize> = (0..n).filter(|i| !frame.e0.contains(i)).collect();
    let iso: f64 = frame.e0.iter().map(|&i| crate::cone::sign_f(mu[i])).product();
    if minus.is_empty() {
        return iso;
    }
    // project μ onto range(G) restricted to E⁻: μ' = G G⁺ μ
    let g = frame.gram_e.principal(&minus);
    let gf = g.to_f64();
    let kernel: Vec<Vec<f64>> = g.kernel().iter().map(|k| linalg::qvec_to_f64(k)).collect();
    let mut m: Vec<f64> = minus.iter().map(|&i| mu[i]).collect();
    // remove components along ker G (range(G) = ker(G)^⊥ for symmetric G)
    let ortho = gram_schmidt(&kernel);
    for k in &ortho {
        let d: f64 = k.iter().zip(&m).map(|(a, b)| a * b).sum();
        for (x, y) in m.iter_mut().zip(k) {
            *x -= d * y;
        }
    }
    let _ = gf;
    let cov: Vec<Vec<f64>> = minus.iter().map(|&i| minus.iter().map(|&j| frame.cov[i][j]).collect()).collect();
    iso * decomposed(&cov, &m, cfg)
}

fn gram_schmidt(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for u in &out {
            let d: f64 = u.iter().zip(&w).map(|(a, b)| a * b).sum();
            for (x, y) in w.iter_mut().zip(u) {
                *x -= d * y;
            }
        }
        let nrm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 1e-12 {
            out.push(w.iter().map(|x| x / nrm).collect());
        }
    }
    out
}

/// E[∏ sgn X_j] expanded over orthant probabilities of all subsets.
pub fn sgn_hat_orthant(frame: &NegDefFrame, v: &[f64], cfg: &QuadratureConfig) -> Result<f64> {
    frame.check_len(v)?;
    let n = frame.len();
    if n > 4 {
        return Err(Error::UnsupportedDimension(n));
    }
    let mu = frame.means(v);
    let ones = vec![-1.0; n];
    let o = cfg.opts();
    let mut acc = crate::numeric::sum::NeumaierSum::new();
    for mask in 0u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        // P[X_S > 0] = P[−X_j < 0 for j in S]
        let p = if idx.is_empty() { 1.0 } else { flipped_probability(&frame.cov, &idx, &mu, &ones, &o) };
        let sign = if (n - idx.len()).is_multiple_of(2) { 1.0 } else { -1.0 };
        acc.add(sign * 2f64.powi(idx.len() as i32) * p);
    }
    Ok(acc.value())
}

/// a₀(m) = (−1)^m, a_n(m) = a_{n−1}(m) − C(m, n−1) a_{n−1}(n−1).
pub fn a_coeff(n: usize, m: usize) -> Result<BigInt> {
    if n > m {
        return Err(Error::OutOfRange(format!("a_{n}({m}) needs n ≤ m")));
    }
    // table[k][j] = a_k(j) for k ≤ j ≤ m
    let mut prev: Vec<BigInt> = (0..=m).map(|j| if j % 2 == 0 { BigInt::from(1) } else { BigInt::from(-1) }).collect();
    for k in 1..=n {
        let diag = prev[k - 1].clone();
        let mut cur = vec![BigInt::zero(); m + 1];
        for j in k..=m {
            cur[j] = &prev[j] - binom(j, k - 1) * &diag;
        }
        prev = cur;
    }
    Ok(prev[m].clone())
}

fn binom(n: usize, k: usize) -> BigInt {
    let mut r = BigInt::from(1);
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

struct SubFrame {
    idx: Vec<usize>,
    /// indices into the polynomial's term list whose set contains idx
    supersets: Vec<usize>,
    factor: f64,
}

/// ŝgn_C⁺ = Σ a_E ŝgn_E evaluated by regrouping the sector decomposition:
///
/// ŝgn_C⁺(x) = sgn*_C⁺(x) + Σ_{E'≠∅} (−2)^{|E'|} v̂ol_{E'}(x) Σ_{E⊇E'} a_E sgn*_E(x),
///
/// where sgn* breaks ties towards +. The inner sums are exact, so the
/// correction keeps its relative accuracy far from the cone.
pub struct ConeSmoother {
    terms: Vec<(Vec<usize>, f64)>,
    subs: Vec<SubFrame>,
    functionals: Vec<Vec<f64>>,
    cov: Vec<Vec<f64>>,
    sd: Vec<f64>,
    rule: SemidefiniteRule,
    /// terms evaluated separately under the quotient rule
    quotient_terms: Vec<(NegDefFrame, f64)>,
    opts: OrthantOpts,
    cfg: QuadratureConfig,
    radical_functionals: Vec<Vec<f64>>,
    /// semidefinite[mask]: the walls in mask have a negative semidefinite Gram matrix
    semidefinite: Vec<bool>,
}

impl ConeSmoother {
    pub fn new(walls: &WallSet, poly: &SignPolynomial, cfg: &QuadratureConfig) -> Result<Self> {
        Self::with_rule(walls, poly, cfg, SemidefiniteRule::Limit)
    }

    pub fn with_rule(walls: &WallSet, poly: &SignPolynomial, cfg: &QuadratureConfig, rule: SemidefiniteRule) -> Result<Self> {
        let space = walls.space();
        let all = NegDefFrame::new(space, vec![])?;
        let _ = all;
        let mut terms = Vec::new();
        let mut quotient_terms = Vec::new();
        let mut radical_functionals = Vec::new();
        for (e, a) in poly.terms_f64() {
            if e.len() > 4 {
                return Err(Error::UnsupportedDimension(e.len()));
            }
            let frame = NegDefFrame::new(space, e.iter().map(|&i| walls.walls()[i].clone()).collect())?;
            for r in &frame.radical_basis {
                radical_functionals.push(linalg::qvec_to_f64(&space.functional(r)));
            }
            if rule == SemidefiniteRule::Quotient && !frame.is_definite() {
                quotient_terms.push((frame, a));
            } else {
                terms.push((e, a));
            }
        }
        let nw = walls.len();
        let g = space.gram_of(walls.walls()).to_f64();
        let cov: Vec<Vec<f64>> = g.iter().map(|r| r.iter().map(|x| -x / (4.0 * PI)).collect()).collect();
        let sd = (0..nw).map(|j| cov[j][j].max(0.0).sqrt()).collect();
        if nw > 16 {
            return Err(Error::UnsupportedDimension(nw));
        }
        let semidefinite = (0u32..(1 << nw))
            .map(|mask| {
                let ws: Vec<QVec> = bits(mask).iter().map(|&j| walls.walls()[j].clone()).collect();
                ws.is_empty() || inertia(&space.gram_of(&ws)).0 == 0
            })
            .collect();
        let mut subs: Vec<SubFrame> = Vec::new();
        for mask in 1u32..(1 << nw) {
            let idx: Vec<usize> = (0..nw).filter(|j| mask & (1 << j) != 0).collect();
            let supersets: Vec<usize> = terms
                .iter()
                .enumerate()
                .filter(|(_, (e, _))| idx.iter().all(|j| e.contains(j)))
                .map(|(t, _)| t)
                .collect();
            if supersets.is_empty() {
                continue;
            }
            subs.push(SubFrame { factor: (-2f64).powi(idx.len() as i32), idx, supersets });
        }
        Ok(ConeSmoother {
            terms,
            subs,
            functionals: walls.functionals_f64().to_vec(),
            cov,
            sd,
            rule,
            quotient_terms,
            opts: cfg.opts(),
            cfg: *cfg,
            radical_functionals,
            semidefinite,
        })
    }

    pub fn rule(&self) -> SemidefiniteRule {
        self.rule
    }

    /// Functionals ⟨·, r⟩ for radical vectors r of degenerate spans; ŝgn_C⁺ jumps across their kernels.
    pub fn radical_functionals(&self) -> &[Vec<f64>] {
        &self.radical_functionals
    }

    fn pairings(&self, x: &[f64]) -> Vec<f64> {
        self.functionals.iter().map(|f| f.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    fn term_signs(&self, s: &[f64]) -> Vec<f64> {
        self.terms.iter().map(|(e, a)| a * e.iter().map(|&j| s[j]).product::<f64>()).collect()
    }

    /// ln of an upper bound for |ŝgn_C⁺(x) − sgn*_C⁺(x)|; −∞ when the correction vanishes.
    pub fn ln_correction_bound(&self, x: &[f64]) -> f64 {
        let mu = self.pairings(x);
        let s: Vec<f64> = mu.iter().map(|&m| tie_sign(m)).collect();
        self.ln_bound_from(&mu, &s, &self.term_signs(&s))
    }

    fn ln_bound_from(&self, mu: &[f64], s: &[f64], ts: &[f64]) -> f64 {
        let _ = s;
        let ln_single: Vec<f64> = mu
            .iter()
            .zip(&self.sd)
            .map(|(&m, &sd)| {
                if sd == 0.0 {
                    if m == 0.0 {
                        0.0
                    } else {
                        f64::NEG_INFINITY
                    }
                } else {
                    ln_norm_sf(m.abs() / sd)
                }
            })
            .collect();
        let mut parts: Vec<f64> = Vec::new();
        for sub in &self.subs {
            let c: f64 = sub.supersets.iter().map(|&t| ts[t]).sum();
            if c == 0.0 {
                continue;
            }
            let lmin = sub.idx.iter().map(|&j| ln_single[j]).fold(f64::INFINITY, f64::min);
            parts.push(lmin + (sub.factor.abs() * c.abs()).ln());
        }
        for (_, a) in &self.quotient_terms {
            parts.push(a.abs().ln() + 2f64.ln());
        }
        log_sum_exp(&parts)
    }

    /// (sgn*_C⁺(x), ŝgn_C⁺(x) − sgn*_C⁺(x)).
    pub fn eval_split(&self, x: &[f64]) -> (f64, f64) {
        let (b, c, _) = self.eval_parts(x);
        (b, c)
    }

    /// Like `eval_split`, plus an upper bound on the magnitude lost to
    /// probabilities below the smallest normal double.
    pub fn eval_parts(&self, x: &[f64]) -> (f64, f64, f64) {
        let mu = self.pairings(x);
        let s: Vec<f64> = mu.iter().map(|&m| tie_sign(m)).collect();
        let ts = self.term_signs(&s);
        let base: f64 = ts.iter().sum();
        // terms k·P[A flipped, N not flipped]; start from k_{E'} = (−2)^{|E'|} c_{E'}
        let mut terms: Vec<(f64, u32, u32, Option<f64>)> = Vec::new();
        for sub in &self.subs {
            let c: f64 = sub.supersets.iter().map(|&t| ts[t]).sum();
            if c != 0.0 {
                let mask = sub.idx.iter().fold(0u32, |m, &j| m | (1 << j));
                terms.push((sub.factor * c, mask, 0, None));
            }
        }
        terms.sort_by_key(|t| (t.1.count_ones(), t.1));
        self.merge_cancelling(&mut terms, &mu, &s);
        let mut corr = crate::numeric::sum::NeumaierSum::new();
        let mut lost = 0.0;
        for (k, a, n, p) in terms {
            if k == 0.0 {
                continue;
            }
            let p = p.unwrap_or_else(|| pattern_probability(&self.cov, &bits(a), &bits(n), &mu, &s, &self.opts));
            if p < f64::MIN_POSITIVE {
                lost += k.abs() * f64::MIN_POSITIVE;
            }
            corr.add(k * p);
        }
        for (frame, a) in &self.quotient_terms {
            let mut m = frame.means(x);
            corr.add(a * sgn_hat_quotient(frame, &mut m, &self.cfg));
        }
        (base, corr.value(), lost)
    }

    /// Rewrites k·P_A − k·P_{A∪{j}} as k·P[A flipped, j not flipped].
    ///
    /// Both probabilities can be far larger than their difference when
    /// flipping A almost forces X_j to flip as well; the merged event keeps
    /// its relative accuracy. Among several partners the smallest merged
    /// probability wins.
    fn merge_cancelling(&self, terms: &mut [(f64, u32, u32, Option<f64>)], mu: &[f64], s: &[f64]) {
        let nw = self.functionals.len();
        loop {
            let mut changed = false;
            for i in 0..terms.len() {
                let (k, a, n, _) = terms[i];
                if k == 0.0 {
                    continue;
                }
                let mut best: Option<(usize, u32, f64)> = None;
                for j in 0..nw {
                    let bit = 1u32 << j;
                    if (a | n) & bit != 0 || !self.semidefinite[(a | n | bit) as usize] {
                        continue;
                    }
                    let Some(t) = terms.iter().position(|t| t.1 == a | bit && t.2 == n && t.0 != 0.0 && (t.0 + k).abs() <= 1e-12 * k.abs())
                    else {
                        continue;
                    };
                    let p = pattern_probability(&self.cov, &bits(a), &bits(n | bit), mu, s, &self.opts);
                    if best.is_none_or(|b| p < b.2) {
                        best = Some((t, bit, p));
                    }
                }
                if let Some((t, bit, p)) = best {
                    terms[t].0 = 0.0;
                    terms[i] = (k, a, n | bit, Some(p));
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let (b, c) = self.eval_split(x);
        b + c
    }

    /// Upper bound on |ŝgn_C⁺| given by Σ |a_E|.
    pub fn weight_bound(&self) -> f64 {
        self.terms.iter().map(|(_, a)| a.abs()).sum::<f64>() + self.quotient_terms.iter().map(|(_, a)| a.abs()).sum::<f64>()
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// ŝgn_C⁺(v) = Σ a_E ŝgn_E(v).
pub fn sgn_hat_cone(walls: &WallSet, poly: &SignPolynomial, v: &[f64], cfg: &QuadratureConfig) -> Result<f64> {
    if v.len() != walls.space().dim() {
        return Err(Error::DimensionMismatch { expected: walls.space().dim(), got: v.len() });
    }
    Ok(ConeSmoother::new(walls, poly, cfg)?.eval(v))
}

const D1: [(f64, f64); 4] = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];
const D2: [(f64, f64); 5] = [(-2.0, -1.0 / 12.0), (-1.0, 16.0 / 12.0), (0.0, -30.0 / 12.0), (1.0, 16.0 / 12.0), (2.0, -1.0 / 12.0)];

/// Fourth-order finite differences of Euler and Laplace operators:
/// returns (E f, Δ f) with E = Σ v_i ∂_i and Δ = Σ (m⁻¹)_{ij} ∂_i ∂_j.
pub fn euler_laplace<F: Fn(&[f64]) -> f64>(f: F, gram_inv: &[Vec<f64>], v: &[f64], h: f64) -> (f64, f64) {
    let n = v.len();
    let at = |shifts: &[(usize, f64)]| {
        let mut x = v.to_vec();
        for &(i, d) in shifts {
            x[i] += d * h;
        }
        f(&x)
    };
    let mut grad = vec![0.0; n];
    for (i, g) in grad.iter_mut().enumerate() {
        *g = D1.iter().map(|&(a, c)| c * at(&[(i, a)])).sum::<f64>() / h;
    }
    let mut lap = 0.0;
    for i in 0..n {
        for j in i..n {
            let gij = gram_inv[i][j];
            if gij == 0.0 {
                continue;
            }
            let d = if i == j {
                D2.iter().map(|&(a, c)| c * at(&[(i, a)])).sum::<f64>() / (h * h)
            } else {
                let mut s = 0.0;
                for &(a, ca) in &D1 {
                    for &(b, cb) in &D1 {
                        s += ca * cb * at(&[(i, a), (j, b)]);
                    }
                }
                s / (h * h)
            };
            lap += if i == j { gij * d } else { 2.0 * gij * d };
        }
    }
    let euler = v.iter().zip(&grad).map(|(a, b)| a * b).sum();
    (euler, lap)
}

/// Δh/(4π) − E h for h = ŝgn_C⁺ at v (zero when the Vignéras equation holds with k₀ = 0).
pub fn vigneras_residual(walls: &WallSet, poly: &SignPolynomial, v: &[f64], h: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let sm = ConeSmoother::new(walls, poly, cfg)?;
    vigneras_residual_smoother(&sm, walls.space(), v, h)
}

pub fn vigneras_residual_smoother(sm: &ConeSmoother, space: &QuadSpace, v: &[f64], h: f64) -> Result<f64> {
    let (e, l) = euler_laplace_checked(sm, space, v, h)?;
    Ok(l / (4.0 * PI) - e)
}

/// Euler and Laplace terms of ŝgn_C⁺ at v, refusing points near a jump.
pub fn euler_laplace_checked(sm: &ConeSmoother, space: &QuadSpace, v: &[f64], h: f64) -> Result<(f64, f64)> {
    if v.len() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: v.len() });
    }
    for f in sm.radical_functionals() {
        let nrm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
        let d = f.iter().zip(v).map(|(a, b)| a * b).sum::<f64>().abs() / nrm;
        if d <= 2.0 * h * 2f64.sqrt() * v.len() as f64 {
            return Err(Error::TooCloseToWall);
        }
    }
    Ok(euler_laplace(|x| sm.eval(x), space.gram_inv_f64(), v, h))
}

/// One row of a degeneration table.
#[derive(Clone, Debug, Serialize)]
pub struct DegenerationRow {
    pub t: f64,
    pub vol: f64,
    pub vol_bound: f64,
    pub sgn_diff: f64,
    pub sgn_diff_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegenerationReport {
    pub rows: Vec<DegenerationRow>,
    pub max_vol_ratio: f64,
    pub max_diff_ratio: f64,
    pub bounded: bool,
    pub no_decay_expected: bool,
}

/// Tabulate v̂ol_{E(t)} and |ŝgn_{E(t)} − ŝgn_{E(0)}| for E(t) = E ∪ {w0 + t·w1}
/// against exp(4π⟨w,v⟩²/(4q(w))) and exp(π⟨w,v⟩²/(4q(w))).
pub fn degeneration_check(
    space: &QuadSpace,
    base: &[QVec],
    w0: &QVec,
    w1: &QVec,
    v: &[f64],
    t_grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<DegenerationReport> {
    let wt = |t: f64| -> Vec<f64> {
        w0.iter().zip(w1).map(|(a, b)| linalg::q_to_f64(a) + t * linalg::q_to_f64(b)).collect()
    };
    let mut e0 = base.to_vec();
    e0.push(w0.clone());
    let f0 = NegDefFrame::new(space, e0)?;
    let s0 = sgn_hat(&f0, v, cfg)?;
    let w0f = linalg::qvec_to_f64(w0);
    let no_decay_expected = space.bilinear_f(v, &w0f).abs() < 1e-12;
    let mut rows = Vec::new();
    for &t in t_grid {
        let w = wt(t);
        // the frame for E(t) is built in floating point: scale to keep exactness where possible
        let cov_vecs: Vec<Vec<f64>> = base.iter().map(|b| linalg::qvec_to_f64(b)).chain(std::iter::once(w.clone())).collect();
        let k = cov_vecs.len();
        let mut cov = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in 0..k {
                cov[i][j] = -space.bilinear_f(&cov_vecs[i], &cov_vecs[j]) / (4.0 * PI);
            }
        }
        let qw = space.quad_f(&w);
        if !(qw < 0.0) || !positive_definite(&cov) {
            return Err(Error::FamilyNotNegative(t));
        }
        let mu: Vec<f64> = cov_vecs.iter().map(|c| space.bilinear_f(v, c)).collect();
        let s: Vec<f64> = mu.iter().map(|&m| tie_sign(m)).collect();
        let idx: Vec<usize> = (0..k).collect();
        let vol = flipped_probability(&cov, &idx, &mu, &s, &cfg.opts());
        let st = decomposed(&cov, &mu, cfg);
        let pw = space.bilinear_f(&w, v);
        rows.push(DegenerationRow {
            t,
            vol,
            vol_bound: (4.0 * PI * pw * pw / (4.0 * qw)).exp(),
            sgn_diff: (st - s0).abs(),
            sgn_diff_bound: (PI * pw * pw / (4.0 * qw)).exp(),
        });
    }
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else if a == 0.0 { 0.0 } else { f64::INFINITY };
    let max_vol_ratio = rows.iter().map(|r| ratio(r.vol, r.vol_bound)).fold(0.0, f64::max);
    let max_diff_ratio = rows.iter().map(|r| ratio(r.sgn_diff, r.sgn_diff_bound)).fold(0.0, f64::max);
    let bounded = max_vol_ratio.is_finite() && max_diff_ratio.is_finite() && max_vol_ratio <= 1.0 && max_diff_ratio <= 2.0;
    Ok(DegenerationReport { rows, max_vol_ratio, max_diff_ratio, bounded, no_decay_expected })
}

fn positive_definite(c: &[Vec<f64>]) -> bool {
    // Cholesky attempt
    let n = c.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = c[i][i] - s;
                if d <= 1e-14 * c[i][i].abs().max(1e-300) {
                    return false;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (c[i][j] - s) / l[j][j];
            }
        }
    }
    true
}

/// Distance from v to the nearest wall hyperplane w^⊥, measured in √(−q) on span E.
pub fn wall_distance(frame: &NegDefFrame, v: &[f64]) -> f64 {
    let mu = frame.means(v);
    (0..frame.len())
        .map(|j| {
            let g = linalg::q_to_f64(frame.gram_e.get(j, j));
            if g == 0.0 {
                f64::INFINITY
            } else {
                mu[j].abs() / (-2.0 * g).sqrt()
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Single-wall flip probability, used for quick bounds.
pub fn single_flip(frame: &NegDefFrame, v: &[f64], j: usize) -> f64 {
    let mu = frame.means(v);
    let sd = frame.cov[j][j].sqrt();
    if sd == 0.0 {
        return if mu[j] == 0.0 { 1.0 } else { 0.0 };
    }
    norm_sf(mu[j].abs() / sd)
}

/// Is the Gram determinant of the frame nonzero and negative definite?
pub fn is_negative_definite(frame: &NegDefFrame) -> bool {
    let (p, n, z) = inertia(&frame.gram_e);
    p == 0 && z == 0 && n == frame.len()
}
