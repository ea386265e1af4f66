//! Polyhedral cones given by walls, their edges and face indicators.

use crate::error::{Error, Result};
use crate::linalg::{self, dot, inertia, q, q_to_f64, QMat, QVec, Q};
use crate::quadspace::{Lattice, QuadSpace};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeKind {
    Tetrahedral,
    Cubical,
}

/// Walls of the cone C(W) ∪ −C(W).
#[derive(Clone, Debug)]
pub struct WallSet {
    space: QuadSpace,
    walls: Vec<QVec>,
    kind: ConeKind,
    pairs: Vec<(usize, usize)>,
    functionals: Vec<QVec>,
    functionals_f: Vec<Vec<f64>>,
}

fn positive_multiple(a: &[Q], b: &[Q]) -> bool {
    let Some(i) = a.iter().position(|x| !x.is_zero()) else { return false };
    if b[i].is_zero() {
        return false;
    }
    let r = &b[i] / &a[i];
    r.is_positive() && a.iter().zip(b).all(|(x, y)| &(x * &r) == y)
}

impl WallSet {
    pub fn new(space: &QuadSpace, walls: Vec<QVec>, kind: ConeKind, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let n = space.dim();
        let dm = space.d_minus();
        for (i, w) in walls.iter().enumerate() {
            if w.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: w.len() });
            }
            if w.iter().all(|x| x.is_zero()) {
                return Err(Error::InvalidWalls(format!("wall {i} is zero")));
            }
            for (j, u) in walls.iter().enumerate().take(i) {
                if positive_multiple(u, w) {
                    return Err(Error::InvalidWalls(format!("wall {i} is a positive multiple of wall {j}")));
                }
            }
        }
        match kind {
            ConeKind::Tetrahedral => {
                if walls.len() != 1 + dm {
                    return Err(Error::InvalidWalls(format!(
                        "tetrahedral cone needs {} walls, got {}",
                        1 + dm,
                        walls.len()
                    )));
                }
            }
            ConeKind::Cubical => {
                if walls.len() != 2 * dm || pairs.len() != dm {
                    return Err(Error::InvalidWalls(format!(
                        "cubical cone needs {} walls in {} pairs",
                        2 * dm,
                        dm
                    )));
                }
                let mut seen = vec![false; walls.len()];
                for &(a, b) in &pairs {
                    for k in [a, b] {
                        if k >= walls.len() || seen[k] {
                            return Err(Error::InvalidWalls("pairing must cover every wall once".into()));
                        }
                        seen[k] = true;
                    }
                }
            }
        }
        let functionals: Vec<QVec> = walls.iter().map(|w| space.functional(w)).collect();
        let functionals_f = functionals.iter().map(|f| linalg::qvec_to_f64(f)).collect();
        Ok(WallSet { space: space.clone(), walls, kind, pairs, functionals, functionals_f })
    }

    pub fn from_i64(space: &QuadSpace, walls: &[Vec<i64>], kind: ConeKind, pairs: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(space, walls.iter().map(|w| linalg::qvec_from_i64(w)).collect(), kind, pairs)
    }

    pub fn space(&self) -> &QuadSpace {
        &self.space
    }
    pub fn walls(&self) -> &[QVec] {
        &self.walls
    }
    pub fn kind(&self) -> ConeKind {
        self.kind
    }
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
    pub fn len(&self) -> usize {
        self.walls.len()
    }
    pub fn is_empty(&self) -> bool {
        self.walls.is_empty()
    }

    /// ⟨v, w_i⟩ for every wall, in floating point.
    pub fn pairings(&self, v: &[f64]) -> Vec<f64> {
        self.functionals_f.iter().map(|f| f.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn pairings_exact(&self, v: &[Q]) -> Vec<Q> {
        self.functionals.iter().map(|f| dot(f, v)).collect()
    }

    pub fn functionals_f64(&self) -> &[Vec<f64>] {
        &self.functionals_f
    }

    fn subset_walls(&self, e: &[usize]) -> Vec<QVec> {
        e.iter().map(|&i| self.walls[i].clone()).collect()
    }

    /// A point with ⟨v, w⟩ > 0 for all walls, if one exists.
    pub fn interior_point(&self) -> Option<QVec> {
        strictly_feasible(&self.functionals, self.space.dim())
    }
}

/// Fourier–Motzkin search for x with F x ≥ 1 row-wise.
fn strictly_feasible(rows: &[QVec], n: usize) -> Option<QVec> {
    // constraint: a·x ≥ b
    let mut systems: Vec<Vec<(QVec, Q)>> = vec![rows.iter().map(|r| (r.clone(), Q::one())).collect()];
    for k in (0..n).rev() {
        let cur = systems.last().unwrap();
        let (mut pos, mut neg, mut zero) = (vec![], vec![], vec![]);
        for c in cur {
            if c.0[k].is_positive() {
                pos.push(c.clone());
            } else if c.0[k].is_negative() {
                neg.push(c.clone());
            } else {
                zero.push(c.clone());
            }
        }
        let mut next = zero;
        for p in &pos {
            for m in &neg {
                // p/p_k − m/m_k  (m_k < 0) eliminates x_k
                let fp = Q::one() / &p.0[k];
                let fm = -(Q::one() / &m.0[k]);
                let a: QVec = p.0.iter().zip(&m.0).map(|(x, y)| x * &fp + y * &fm).collect();
                let b = &p.1 * &fp + &m.1 * &fm;
                next.push((a, b));
            }
        }
        // drop exact duplicates to keep the system small
        next.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
        next.dedup();
        systems.push(next);
    }
    if systems.last().unwrap().iter().any(|c| c.1.is_positive()) {
        return None;
    }
    // back substitution, x_0 first
    let mut x = vec![Q::zero(); n];
    for k in 0..n {
        let sys = &systems[n - 1 - k];
        let (mut lo, mut hi): (Option<Q>, Option<Q>) = (None, None);
        for (a, b) in sys {
            let rest = (0..k).fold(b.clone(), |acc, j| acc - &a[j] * &x[j]);
            if a[k].is_positive() {
                let t = rest / &a[k];
                lo = Some(lo.map_or(t.clone(), |l: Q| l.max(t)));
            } else if a[k].is_negative() {
                let t = rest / &a[k];
                hi = Some(hi.map_or(t.clone(), |h: Q| h.min(t)));
            }
        }
        x[k] = match (lo, hi) {
            (Some(l), Some(h)) => (l + h) / q(2),
            (Some(l), None) => l + Q::one(),
            (None, Some(h)) => h - Q::one(),
            (None, None) => Q::zero(),
        };
    }
    Some(x)
}

/// An edge E ⊆ W with its classification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub subset: Vec<usize>,
    pub is_isotropic: bool,
    pub is_rational: bool,
    /// Basis of the radical of span E (its maximal totally isotropic part when semidefinite).
    #[serde(skip)]
    pub radical: Vec<QVec>,
}

fn subsets_of_size(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Basis of the orthogonal complement of `ws` in the space.
fn orth_complement(space: &QuadSpace, ws: &[QVec]) -> Vec<QVec> {
    if ws.is_empty() {
        return (0..space.dim())
            .map(|i| (0..space.dim()).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
            .collect();
    }
    let f: Vec<QVec> = ws.iter().map(|w| space.functional(w)).collect();
    QMat::from_rows(&f).kernel()
}

/// Radical of the form restricted to span(ws), as vectors in V.
pub fn span_radical(space: &QuadSpace, ws: &[QVec]) -> Vec<QVec> {
    if ws.is_empty() {
        return vec![];
    }
    let g = space.gram_of(ws);
    g.kernel()
        .into_iter()
        .map(|c| {
            let mut v = vec![Q::zero(); space.dim()];
            for (ci, w) in c.iter().zip(ws) {
                for (o, wi) in v.iter_mut().zip(w) {
                    *o += ci * wi;
                }
            }
            v
        })
        .filter(|v| v.iter().any(|x| !x.is_zero()))
        .collect()
}

fn is_rational_square(x: &Q) -> bool {
    if x.is_negative() {
        return false;
    }
    let n = x.numer();
    let d = x.denom();
    let sn = n.sqrt();
    let sd = d.sqrt();
    &(&sn * &sn) == n && &(&sd * &sd) == d
}

/// Whether the real and rational Witt indices of span(ws) agree.
/// `None` when the anisotropic rational part is too large to decide here.
fn witt_rational(space: &QuadSpace, ws: &[QVec]) -> Option<bool> {
    if ws.is_empty() {
        return Some(true);
    }
    let g = space.gram_of(ws);
    let (p, n, _z) = inertia(&g);
    if p == 0 || n == 0 {
        // semidefinite: the maximal totally isotropic subspace is the rational radical
        return Some(true);
    }
    // nondegenerate quotient: diagonalize and inspect
    let basis = QMat::from_rows(ws).rref();
    let rk = basis.1.len();
    let rows: Vec<QVec> = (0..rk).map(|i| basis.0.row(i)).collect();
    let g = space.gram_of(&rows);
    let rad = g.kernel();
    let nondeg_dim = rk - rad.len();
    if nondeg_dim == 2 {
        // binary form a x² + b xy + c y² is isotropic over ℚ iff −det is a square
        let comp = complement_rows(&g, &rad);
        let h = g_sub(&g, &comp);
        let det = h.det();
        return Some(is_rational_square(&(-det)));
    }
    let _ = (p, n);
    None
}

fn complement_rows(g: &QMat, rad: &[QVec]) -> Vec<QVec> {
    // pick standard basis vectors completing the radical
    let n = g.rows;
    let mut chosen: Vec<QVec> = rad.to_vec();
    let mut comp = Vec::new();
    for i in 0..n {
        let e: QVec = (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect();
        let mut trial = chosen.clone();
        trial.push(e.clone());
        if QMat::from_rows(&trial).rank() == trial.len() {
            chosen.push(e.clone());
            comp.push(e);
        }
    }
    comp
}

fn g_sub(g: &QMat, vs: &[QVec]) -> QMat {
    let k = vs.len();
    let mut h = QMat::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            h.set(i, j, dot(&vs[i], &g.mul_vec(&vs[j])));
        }
    }
    h
}

pub fn edges(w: &WallSet) -> Vec<Edge> {
    let dm = w.space.d_minus();
    let subsets: Vec<Vec<usize>> = match w.kind {
        ConeKind::Tetrahedral => subsets_of_size(w.len(), dm),
        ConeKind::Cubical => {
            let mut out = vec![vec![]];
            for &(a, b) in &w.pairs {
                out = out
                    .into_iter()
                    .flat_map(|s| {
                        let mut s1 = s.clone();
                        s1.push(a);
                        let mut s2 = s;
                        s2.push(b);
                        [s1, s2]
                    })
                    .collect();
            }
            for s in &mut out {
                s.sort_unstable();
            }
            out.sort();
            out
        }
    };
    subsets
        .into_iter()
        .map(|subset| {
            let ws = w.subset_walls(&subset);
            let perp = orth_complement(&w.space, &ws);
            let is_isotropic = if perp.is_empty() {
                false
            } else {
                let (p, n, z) = inertia(&w.space.gram_of(&perp));
                z > 0 || (p > 0 && n > 0)
            };
            let is_rational = witt_rational(&w.space, &ws).unwrap_or(false);
            let radical = span_radical(&w.space, &ws);
            Edge { subset, is_isotropic, is_rational, radical }
        })
        .collect()
}

/// Certificate returned by the non-negativity test.
#[derive(Clone, Debug, Serialize)]
pub struct NonNegativity {
    pub non_negative: bool,
    /// false when the answer comes from sampling
    pub exact: bool,
    /// a cone vector with q < 0 when not non-negative
    pub witness: Option<Vec<f64>>,
}

/// Largest number of walls handled by the exact copositivity enumeration.
pub const EXACT_COPOSITIVE_MAX: usize = 10;

/// Exact copositivity of a symmetric matrix; returns a witness x ≥ 0 with xᵀMx < 0 otherwise.
pub fn copositive(m: &QMat) -> std::result::Result<(), QVec> {
    let k = m.rows;
    for mask in 1u32..(1u32 << k) {
        let idx: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let sub = m.principal(&idx);
        let Some(inv) = sub.inverse() else { continue };
        let ones = vec![Q::one(); idx.len()];
        let y = inv.mul_vec(&ones);
        if y.iter().all(|x| x.is_negative()) {
            let mut x = vec![Q::zero(); k];
            for (a, &i) in idx.iter().enumerate() {
                x[i] = -y[a].clone();
            }
            return Err(x);
        }
    }
    Ok(())
}

/// q(v) ≥ 0 on {v : ⟨v, w⟩ ≥ 0 for w in ws}.
fn polyhedral_non_negative(space: &QuadSpace, ws: &[QVec], seed: u64) -> NonNegativity {
    let n = space.dim();
    let f: Vec<QVec> = ws.iter().map(|w| space.functional(w)).collect();
    let fm = QMat::from_rows(&f);
    let k = ws.len();
    if fm.rank() == k && k <= EXACT_COPOSITIVE_MAX {
        // v = B t + K u with F B = I, F K = 0
        let fft = fm.mul(&fm.transpose());
        let b = fm.transpose().mul(&fft.inverse().expect("full row rank"));
        let kern = fm.kernel();
        let gram = space.gram();
        let a = b.transpose().mul(gram).mul(&b);
        if kern.is_empty() {
            return match copositive(&a) {
                Ok(()) => NonNegativity { non_negative: true, exact: true, witness: None },
                Err(x) => NonNegativity {
                    non_negative: false,
                    exact: true,
                    witness: Some(linalg::qvec_to_f64(&b.mul_vec(&x))),
                },
            };
        }
        let kmat = QMat::from_rows(&kern).transpose();
        let c = kmat.transpose().mul(gram).mul(&kmat);
        let bm = b.transpose().mul(gram).mul(&kmat);
        let (_p, neg, _z) = inertia(&c);
        if neg > 0 {
            // a negative direction inside the lineality space
            let w = negative_vector(&c);
            return NonNegativity {
                non_negative: false,
                exact: true,
                witness: Some(linalg::qvec_to_f64(&kmat.mul_vec(&w))),
            };
        }
        // null directions of C must not couple to t
        for nv in c.kernel() {
            let coupling = bm.mul_vec(&nv);
            if let Some(j) = coupling.iter().position(|x| !x.is_zero()) {
                let lam = -(q(1) + a.get(j, j).abs()) / &coupling[j];
                let mut t = vec![Q::zero(); k];
                t[j] = Q::one();
                let mut v = b.mul_vec(&t);
                let kv = kmat.mul_vec(&nv);
                for (o, x) in v.iter_mut().zip(&kv) {
                    *o += &lam * x;
                }
                return NonNegativity { non_negative: false, exact: true, witness: Some(linalg::qvec_to_f64(&v)) };
            }
        }
        // restrict to a complement of ker C, where C is positive definite
        let cn = c.kernel();
        let comp = complement_rows(&c, &cn);
        let cmat = QMat::from_rows(&comp).transpose();
        let c2 = cmat.transpose().mul(&c).mul(&cmat);
        let bm2 = bm.mul(&cmat);
        let c2inv = c2.inverse().expect("positive definite block");
        let schur = {
            let t = bm2.mul(&c2inv).mul(&bm2.transpose());
            let mut s = a.clone();
            for (x, y) in s.data.iter_mut().zip(&t.data) {
                *x -= y;
            }
            s
        };
        return match copositive(&schur) {
            Ok(()) => NonNegativity { non_negative: true, exact: true, witness: None },
            Err(x) => {
                let u2 = c2inv.mul_vec(&bm2.transpose().mul_vec(&x));
                let u = cmat.mul_vec(&u2);
                let mut v = b.mul_vec(&x);
                let ku = kmat.mul_vec(&u);
                for (o, y) in v.iter_mut().zip(&ku) {
                    *o -= y;
                }
                NonNegativity { non_negative: false, exact: true, witness: Some(linalg::qvec_to_f64(&v)) }
            }
        };
    }
    // heuristic: sample the cone
    let ff: Vec<Vec<f64>> = f.iter().map(|r| linalg::qvec_to_f64(r)).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Option<(f64, Vec<f64>)> = None;
    for _ in 0..200_000 {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let inside = ff.iter().all(|r| r.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() >= 0.0);
        if !inside {
            continue;
        }
        let nrm: f64 = v.iter().map(|x| x * x).sum();
        let val = space.quad_f(&v) / nrm;
        if worst.as_ref().is_none_or(|w| val < w.0) {
            worst = Some((val, v));
        }
    }
    match worst {
        Some((val, v)) if val < -1e-12 => NonNegativity { non_negative: false, exact: false, witness: Some(v) },
        _ => NonNegativity { non_negative: true, exact: false, witness: None },
    }
}

fn negative_vector(c: &QMat) -> QVec {
    let n = c.rows;
    for i in 0..n {
        if c.get(i, i).is_negative() {
            let mut e = vec![Q::zero(); n];
            e[i] = Q::one();
            return e;
        }
    }
    for i in 0..n {
        for j in 0..n {
            for s in [1i64, -1] {
                let mut e = vec![Q::zero(); n];
                e[i] = Q::one();
                e[j] += q(s);
                if dot(&e, &c.mul_vec(&e)).is_negative() {
                    return e;
                }
            }
        }
    }
    // fall back to a congruence-diagonalization search over small integer vectors
    let mut e = vec![Q::zero(); n];
    for a in -3i64..=3 {
        for i in 0..n {
            e[i] = q(a + i as i64);
        }
        if dot(&e, &c.mul_vec(&e)).is_negative() {
            return e;
        }
    }
    e
}

pub fn is_non_negative(w: &WallSet) -> NonNegativity {
    if w.space.d_minus() == 0 {
        return NonNegativity { non_negative: true, exact: true, witness: None };
    }
    match w.kind {
        ConeKind::Tetrahedral => polyhedral_non_negative(&w.space, &w.walls, 7),
        ConeKind::Cubical => {
            // the cube consists of the regions where each pair has equal signs
            let dm = w.pairs.len();
            for mask in 0..(1u32 << dm) {
                let mut ws = Vec::new();
                for (i, &(a, b)) in w.pairs.iter().enumerate() {
                    let s = if mask & (1 << i) != 0 { -1 } else { 1 };
                    for k in [a, b] {
                        ws.push(w.walls[k].iter().map(|x| x * q(s)).collect::<QVec>());
                    }
                }
                let r = polyhedral_non_negative(&w.space, &ws, 7 + mask as u64);
                if !r.non_negative || !r.exact {
                    return r;
                }
            }
            NonNegativity { non_negative: true, exact: true, witness: None }
        }
    }
}

/// E(W)⁰, the isotropic edges; requires a non-negative cone.
pub fn isotropic_locus(w: &WallSet) -> Result<Vec<Edge>> {
    let nn = is_non_negative(w);
    if !nn.non_negative {
        return Err(Error::ConeNotNonNegative(nn.witness.unwrap_or_default()));
    }
    Ok(edges(w).into_iter().filter(|e| e.is_isotropic).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub non_degenerate: bool,
    pub non_negative: bool,
    pub non_negative_exact: bool,
    pub semidefinite: bool,
    pub rational: bool,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.non_degenerate && self.non_negative && self.semidefinite && self.rational
    }
}

pub fn validate(w: &WallSet, l: &Lattice) -> ValidationReport {
    let mut failures = Vec::new();
    if l.dim() != w.space.dim() {
        failures.push("lattice and wall dimensions differ".to_string());
    }
    let non_degenerate = w.interior_point().is_some();
    if !non_degenerate {
        failures.push("non_degenerate: no strictly interior point".into());
    }
    let nn = is_non_negative(w);
    if !nn.non_negative {
        failures.push(format!("non_negative: witness {:?}", nn.witness));
    }
    let poly = face_indicator(w);
    let mut semidefinite = true;
    for e in poly.terms.keys() {
        let (p, _, _) = inertia(&w.space.gram_of(&w.subset_walls(e)));
        if p > 0 {
            semidefinite = false;
            failures.push(format!("semidefinite: span of walls {e:?} is not negative semidefinite"));
        }
    }
    let mut rational = true;
    for e in edges(w).into_iter().filter(|e| e.is_isotropic) {
        if !e.is_rational {
            rational = false;
            failures.push(format!("rational: isotropic edge {:?} is not rational", e.subset));
        }
    }
    ValidationReport {
        non_degenerate,
        non_negative: nn.non_negative,
        non_negative_exact: nn.exact,
        semidefinite,
        rational,
        failures,
    }
}

/// Σ a_E sgn_E over subsets E of the walls (stored as sorted index lists).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignPolynomial {
    pub terms: BTreeMap<Vec<usize>, Q>,
    pub n_walls: usize,
}

impl SignPolynomial {
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|k| k.len()).max().unwrap_or(0)
    }

    /// Evaluate at a sign vector s ∈ {−1,0,1}^W.
    pub fn eval_signs(&self, s: &[i8]) -> Q {
        let mut acc = Q::zero();
        for (e, a) in &self.terms {
            let p: i64 = e.iter().map(|&i| s[i] as i64).product();
            if p != 0 {
                acc += a * q(p);
            }
        }
        acc
    }

    pub fn eval_signs_f(&self, s: &[f64]) -> f64 {
        self.terms.iter().map(|(e, a)| q_to_f64(a) * e.iter().map(|&i| s[i]).product::<f64>()).sum()
    }

    pub fn eval_exact(&self, w: &WallSet, v: &[Q]) -> Q {
        let s: Vec<i8> = w.pairings_exact(v).iter().map(sign_q).collect();
        self.eval_signs(&s)
    }

    pub fn eval(&self, w: &WallSet, v: &[f64]) -> f64 {
        let s: Vec<f64> = w.pairings(v).iter().map(|&x| sign_f(x)).collect();
        self.eval_signs_f(&s)
    }

    /// Coefficient list with f64 values, for hot loops.
    pub fn terms_f64(&self) -> Vec<(Vec<usize>, f64)> {
        self.terms.iter().map(|(e, a)| (e.clone(), q_to_f64(a))).collect()
    }
}

pub fn sign_q(x: &Q) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

pub fn sign_f(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn pow2(k: i64) -> Q {
    if k >= 0 {
        Q::from_integer(BigInt::one() << k as usize)
    } else {
        Q::new(BigInt::one(), BigInt::one() << (-k) as usize)
    }
}

/// Tetrahedral indicator: 2^{1−n} Σ_{|S| ≡ n−1 mod 2} s_S with n = #W.
///
/// This is the multilinear polynomial equal to 1 when all signs agree
/// (the common sign raised to the power n−1) and 0 when they disagree.
pub fn face_indicator_tetrahedral(w: &WallSet) -> SignPolynomial {
    let n = w.len();
    let c = pow2(1 - n as i64);
    let mut terms = BTreeMap::new();
    for k in 0..=n {
        if (k + 1) % 2 != n % 2 {
            continue;
        }
        for s in subsets_of_size(n, k) {
            terms.insert(s, c.clone());
        }
    }
    SignPolynomial { terms, n_walls: n }
}

/// Cubical indicator: 2^{−d⁻} ∏_{pairs} (s_w + s_w').
pub fn face_indicator_cubical(w: &WallSet) -> SignPolynomial {
    let dm = w.pairs.len();
    let c = pow2(-(dm as i64));
    let mut terms = BTreeMap::new();
    for mask in 0..(1u32 << dm) {
        let mut e: Vec<usize> =
            w.pairs.iter().enumerate().map(|(i, &(a, b))| if mask & (1 << i) != 0 { b } else { a }).collect();
        e.sort_unstable();
        *terms.entry(e).or_insert_with(Q::zero) += c.clone();
    }
    SignPolynomial { terms, n_walls: w.len() }
}

pub fn face_indicator(w: &WallSet) -> SignPolynomial {
    match w.kind {
        ConeKind::Tetrahedral => face_indicator_tetrahedral(w),
        ConeKind::Cubical => face_indicator_cubical(w),
    }
}

/// Multiply out a product of linear sign factors modulo s² = 1.
/// Each factor is a list of (wall index, coefficient); the constant term uses `None`.
pub fn expand_sign_product(factors: &[Vec<(Option<usize>, Q)>], n_walls: usize) -> SignPolynomial {
    let mut acc: BTreeMap<Vec<usize>, Q> = BTreeMap::new();
    acc.insert(vec![], Q::one());
    for f in factors {
        let mut next: BTreeMap<Vec<usize>, Q> = BTreeMap::new();
        for (mono, a) in &acc {
            for (idx, c) in f {
                let mut m = mono.clone();
                if let Some(i) = idx {
                    // s_i² = 1
                    if let Some(p) = m.iter().position(|x| x == i) {
                        m.remove(p);
                    } else {
                        m.push(*i);
                        m.sort_unstable();
                    }
                }
                *next.entry(m).or_insert_with(Q::zero) += a * c;
            }
        }
        acc = next;
    }
    acc.retain(|_, a| !a.is_zero());
    SignPolynomial { terms: acc, n_walls }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    InInterior,
    OnBoundary,
    Outside,
}

fn classify(w: &WallSet, s: &[i8]) -> Membership {
    match w.kind {
        ConeKind::Tetrahedral => {
            let pos = s.iter().any(|&x| x > 0);
            let neg = s.iter().any(|&x| x < 0);
            let zero = s.contains(&0);
            if pos && neg {
                Membership::Outside
            } else if zero {
                Membership::OnBoundary
            } else {
                Membership::InInterior
            }
        }
        ConeKind::Cubical => {
            let mut boundary = false;
            for &(a, b) in &w.pairs {
                let p = s[a] * s[b];
                if p < 0 {
                    return Membership::Outside;
                }
                if p == 0 {
                    boundary = true;
                }
            }
            if boundary {
                Membership::OnBoundary
            } else {
                Membership::InInterior
            }
        }
    }
}

pub fn membership(w: &WallSet, v: &[f64]) -> Membership {
    let s: Vec<i8> = w.pairings(v).iter().map(|&x| sign_f(x) as i8).collect();
    classify(w, &s)
}

pub fn membership_exact(w: &WallSet, v: &[Q]) -> Membership {
    let s: Vec<i8> = w.pairings_exact(v).iter().map(sign_q).collect();
    classify(w, &s)
}

/// Sign vector of a point, exact.
pub fn signs_exact(w: &WallSet, v: &[Q]) -> Vec<i8> {
    w.pairings_exact(v).iter().map(sign_q).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples;

    #[test]
    fn running_example_edges() {
        let (_, w) = examples::running();
        let es = edges(&w);
        assert_eq!(es.len(), 3);
        let iso: Vec<_> = es.iter().filter(|e| e.is_isotropic).map(|e| e.subset.clone()).collect();
        assert_eq!(iso, vec![vec![0, 1]]);
        let r = &es[0].radical[0];
        assert!(r[0] == r[1] && r[2].is_zero() && !r[0].is_zero());
    }

    #[test]
    fn running_example_is_valid() {
        let (l, w) = examples::running();
        let rep = validate(&w, &l);
        assert!(rep.passed(), "{:?}", rep.failures);
        assert!(rep.non_negative_exact);
    }

    #[test]
    fn literal_wall_vectors_give_indefinite_cone() {
        let (l, _) = examples::running();
        let w = WallSet::from_i64(l.space(), &[vec![0, 0, 1], vec![1, 1, 2], vec![1, 2, 2]], ConeKind::Tetrahedral, vec![])
            .unwrap();
        let nn = is_non_negative(&w);
        assert!(!nn.non_negative);
        let x = nn.witness.unwrap();
        assert!(l.space().quad_f(&x) < 0.0);
    }

    #[test]
    fn negative_ray_detected() {
        // the cone 0 ≤ l₁, 0 ≤ l₃, l₁ ≤ l₂ contains (0,1,0) with q = −½
        let (l, _) = examples::running();
        let w = WallSet::from_i64(l.space(), &[vec![1, 0, 0], vec![0, 0, -1], vec![-1, -1, 0]], ConeKind::Tetrahedral, vec![])
            .unwrap();
        let nn = is_non_negative(&w);
        assert!(!nn.non_negative && nn.exact);
        let x = nn.witness.unwrap();
        assert!(l.space().quad_f(&x) < 0.0);
        assert_eq!(membership(&w, &[0.0, 1.0, 0.0]), Membership::OnBoundary);
    }

    #[test]
    fn positive_definite_is_non_negative() {
        let l = Lattice::from_i64(&[vec![2]]).unwrap();
        let w = WallSet::from_i64(l.space(), &[vec![1]], ConeKind::Tetrahedral, vec![]).unwrap();
        assert!(is_non_negative(&w).non_negative);
        assert!(isotropic_locus(&w).unwrap().is_empty());
        let es = edges(&w);
        assert_eq!(es.len(), 1);
        assert!(es[0].subset.is_empty() && !es[0].is_isotropic);
    }

    #[test]
    fn running_example_indicator_matches_pair_expansion() {
        let (_, w) = examples::running();
        let p = face_indicator_tetrahedral(&w);
        let mut expect = BTreeMap::new();
        for e in [vec![], vec![0, 1], vec![0, 2], vec![1, 2]] {
            expect.insert(e, linalg::qfrac(1, 4));
        }
        assert_eq!(p.terms, expect);
        // product of pair sums (s_i + s_j)/2 over pairs, times the overall sign
        let h = linalg::qfrac(1, 2);
        let f = |a: usize, b: usize| vec![(Some(a), h.clone()), (Some(b), h.clone())];
        let prod = expand_sign_product(&[f(0, 1), f(0, 2), f(1, 2)], 3);
        // that product equals (s1 s2 s3)·indicator off the walls
        for s in sign_vectors(3).into_iter().filter(|s| !s.contains(&0)) {
            let lhs = prod.eval_signs(&s);
            let sgn: i64 = s.iter().map(|&x| x as i64).product();
            assert_eq!(lhs, p.eval_signs(&s) * q(sgn));
        }
    }

    fn sign_vectors(n: usize) -> Vec<Vec<i8>> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out.into_iter().flat_map(|s| [-1i8, 0, 1].map(|x| { let mut t = s.clone(); t.push(x); t })).collect();
        }
        out
    }

    #[test]
    fn membership_examples() {
        let (_, w) = examples::running();
        assert_eq!(membership(&w, &[3.0, 1.0, 1.0]), Membership::OnBoundary);
        assert_eq!(membership(&w, &[0.0, 0.0, 0.0]), Membership::OnBoundary);
        assert_eq!(membership(&w, &[6.5, 3.0, 1.0]), Membership::InInterior);
        assert_eq!(membership(&w, &[-6.5, -3.0, -1.0]), Membership::InInterior);
        assert_eq!(membership(&w, &[4.0, 1.0, 1.0]), membership(&w, &[-4.0, -1.0, -1.0]));
    }

    #[test]
    fn cubical_indicator() {
        let (_, w) = examples::appell_lerch();
        let p = face_indicator_cubical(&w);
        assert_eq!(p.terms.len(), 2);
        assert!(p.terms.values().all(|a| *a == linalg::qfrac(1, 2)));
        assert_eq!(p, face_indicator_tetrahedral(&WallSet::new(w.space(), w.walls().to_vec(), ConeKind::Tetrahedral, vec![]).unwrap()));
        let l = Lattice::from_i64(&[vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, -1, 0], vec![0, 0, 0, -1]]).unwrap();
        let ws = vec![vec![0, 0, 1, 0], vec![1, 0, 2, 0], vec![0, 0, 0, 1], vec![0, 1, 0, 2]];
        let c = WallSet::from_i64(l.space(), &ws, ConeKind::Cubical, vec![(0, 1), (2, 3)]).unwrap();
        let p = face_indicator_cubical(&c);
        let keys: Vec<_> = p.terms.keys().cloned().collect();
        assert_eq!(keys, vec![vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3]]);
        assert_eq!(p.eval_signs(&[1, 1, 1, 1]), q(1));
    }

    #[test]
    fn appell_lerch_edges() {
        let (l, w) = examples::appell_lerch();
        let es = edges(&w);
        assert_eq!(es.len(), 2);
        // l₁ = 0 is the isotropic line; l₂ = 0 carries q(1,0) = ½
        assert!(es[0].is_isotropic);
        assert!(!es[1].is_isotropic);
        assert!(validate(&w, &l).passed());
    }

    #[test]
    fn indefinite_edge_span_fails_semidefinite() {
        // signature (2,2); two walls spanning a hyperbolic plane
        let l = Lattice::from_i64(&[vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, -1, 0], vec![0, 0, 0, -1]]).unwrap();
        let w = WallSet::from_i64(
            l.space(),
            &[vec![1, 0, 1, 0], vec![0, 0, 1, 0], vec![0, 0, 0, 1]],
            ConeKind::Tetrahedral,
            vec![],
        )
        .unwrap();
        let rep = validate(&w, &l);
        assert!(!rep.semidefinite);
    }

    #[test]
    fn irrational_isotropic_edge() {
        // q = ½(x² − 2y²) ⊕ ... has real but no rational isotropic vectors
        let l = Lattice::from_i64(&[vec![1, 0, 0, 0], vec![0, -2, 0, 0], vec![0, 0, 1, 0], vec![0, 0, 0, -1]]).unwrap();
        let w = WallSet::from_i64(
            l.space(),
            &[vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 0, 1]],
            ConeKind::Tetrahedral,
            vec![],
        )
        .unwrap();
        let es = edges(&w);
        let e = es.iter().find(|e| e.subset == vec![0, 1]).unwrap();
        assert!(!e.is_rational);
    }

    #[test]
    fn rejects_bad_walls() {
        let (l, _) = examples::running();
        let r = WallSet::from_i64(l.space(), &[vec![0, 0, 1], vec![0, 0, 2], vec![1, 2, 2]], ConeKind::Tetrahedral, vec![]);
        assert!(r.is_err());
        let r = WallSet::from_i64(l.space(), &[vec![0, 0, 0], vec![1, 1, 2], vec![1, 2, 2]], ConeKind::Tetrahedral, vec![]);
        assert!(r.is_err());
    }
}
