//! Rational quadratic spaces, integral lattices and discriminant groups.

use crate::error::{Error, Result};
use crate::linalg::{self, dot, inertia, q_to_f64, smith, QMat, QVec, ZMat, Q};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// A rational quadratic space with q(v) = ½ vᵀ m v.
#[derive(Clone, Debug)]
pub struct QuadSpace {
    gram: QMat,
    gram_f: Vec<Vec<f64>>,
    gram_inv_f: Vec<Vec<f64>>,
    signature: (usize, usize),
}

/// Exact inertia of a nondegenerate symmetric matrix.
pub fn signature(gram: &QMat) -> Result<(usize, usize)> {
    if !gram.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let (p, n, z) = inertia(gram);
    if z > 0 {
        return Err(Error::DegenerateForm);
    }
    Ok((p, n))
}

impl QuadSpace {
    pub fn new(gram: QMat) -> Result<Self> {
        let signature = signature(&gram)?;
        let inv = gram.inverse().ok_or(Error::DegenerateForm)?;
        Ok(QuadSpace { gram_f: gram.to_f64(), gram_inv_f: inv.to_f64(), gram, signature })
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(QMat::from_i64(rows))
    }

    pub fn dim(&self) -> usize {
        self.gram.rows
    }
    pub fn gram(&self) -> &QMat {
        &self.gram
    }
    pub fn gram_f64(&self) -> &[Vec<f64>] {
        &self.gram_f
    }
    pub fn gram_inv_f64(&self) -> &[Vec<f64>] {
        &self.gram_inv_f
    }
    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }
    pub fn d_plus(&self) -> usize {
        self.signature.0
    }
    pub fn d_minus(&self) -> usize {
        self.signature.1
    }

    fn check(&self, v: usize) -> Result<()> {
        if v != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v });
        }
        Ok(())
    }

    /// The linear functional ⟨·, w⟩ as a row vector m w.
    pub fn functional(&self, w: &[Q]) -> QVec {
        self.gram.mul_vec(w)
    }

    pub fn bilinear(&self, v: &[Q], w: &[Q]) -> Result<Q> {
        self.check(v.len())?;
        self.check(w.len())?;
        Ok(dot(v, &self.gram.mul_vec(w)))
    }

    pub fn quad(&self, v: &[Q]) -> Result<Q> {
        Ok(self.bilinear(v, v)? / Q::from_integer(BigInt::from(2)))
    }

    pub fn bilinear_f(&self, v: &[f64], w: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.dim());
        let mut s = 0.0;
        for (i, vi) in v.iter().enumerate() {
            let row = &self.gram_f[i];
            let mut t = 0.0;
            for (j, wj) in w.iter().enumerate() {
                t += row[j] * wj;
            }
            s += vi * t;
        }
        s
    }

    pub fn quad_f(&self, v: &[f64]) -> f64 {
        0.5 * self.bilinear_f(v, v)
    }

    /// Gram matrix (⟨w_i, w_j⟩) of a list of vectors.
    pub fn gram_of(&self, ws: &[QVec]) -> QMat {
        let k = ws.len();
        let mut g = QMat::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                g.set(i, j, dot(&ws[i], &self.gram.mul_vec(&ws[j])));
            }
        }
        g
    }

    /// Orthogonal projection onto span W (exact).
    pub fn project_exact(&self, v: &[Q], ws: &[QVec]) -> Result<QVec> {
        self.check(v.len())?;
        if ws.is_empty() {
            return Ok(vec![Q::zero(); self.dim()]);
        }
        let g = self.gram_of(ws);
        let rhs: Vec<Q> = ws.iter().map(|w| dot(v, &self.gram.mul_vec(w))).collect();
        let c = g.solve(&rhs).ok_or(Error::DegenerateSpan)?;
        let mut out = vec![Q::zero(); self.dim()];
        for (ci, w) in c.iter().zip(ws) {
            for (o, wi) in out.iter_mut().zip(w) {
                *o += ci * wi;
            }
        }
        Ok(out)
    }

    /// Orthogonal projection of a real vector onto span W.
    pub fn project(&self, v: &[f64], ws: &[QVec]) -> Result<Vec<f64>> {
        self.check(v.len())?;
        if ws.is_empty() {
            return Ok(vec![0.0; self.dim()]);
        }
        let g = self.gram_of(ws);
        let ginv = g.inverse().ok_or(Error::DegenerateSpan)?.to_f64();
        let wf: Vec<Vec<f64>> = ws.iter().map(|w| linalg::qvec_to_f64(w)).collect();
        let rhs: Vec<f64> = wf.iter().map(|w| self.bilinear_f(v, w)).collect();
        let mut out = vec![0.0; self.dim()];
        for (i, w) in wf.iter().enumerate() {
            let ci: f64 = ginv[i].iter().zip(&rhs).map(|(a, b)| a * b).sum();
            for (o, wi) in out.iter_mut().zip(w) {
                *o += ci * wi;
            }
        }
        Ok(out)
    }
}

/// The integral lattice ℤⁿ inside a quadratic space.
#[derive(Clone, Debug)]
pub struct Lattice {
    space: QuadSpace,
}

impl Lattice {
    pub fn new(space: QuadSpace) -> Result<Self> {
        let g = space.gram();
        for i in 0..g.rows {
            for j in 0..g.cols {
                if !g.get(i, j).is_integer() {
                    return Err(Error::NotIntegral(i, j));
                }
            }
        }
        Ok(Lattice { space })
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(QuadSpace::from_i64(rows)?)
    }

    pub fn space(&self) -> &QuadSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn is_even(&self) -> bool {
        let g = self.space.gram();
        let two = BigInt::from(2);
        (0..g.rows).all(|i| (g.get(i, i).numer() % &two).is_zero())
    }

    pub fn discriminant_group(&self) -> DiscriminantGroup {
        discriminant_group(self)
    }
}

/// Coset representatives of L^∨/L, reduced into [0,1)ⁿ.
#[derive(Clone, Debug)]
pub struct DiscriminantGroup {
    pub coset_reps: Vec<QVec>,
    pub orders: Vec<BigInt>,
}

impl DiscriminantGroup {
    pub fn len(&self) -> usize {
        self.coset_reps.len()
    }
    pub fn is_empty(&self) -> bool {
        self.coset_reps.is_empty()
    }

    /// Index of the coset containing `x` (x must lie in L^∨).
    pub fn index_of(&self, x: &[Q]) -> Option<usize> {
        let r: QVec = x.iter().map(linalg::frac).collect();
        self.coset_reps.iter().position(|c| *c == r)
    }
}

pub fn discriminant_group(l: &Lattice) -> DiscriminantGroup {
    let g = l.space().gram();
    let n = g.rows;
    let mut z = ZMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            *z.at(i, j) = g.get(i, j).to_integer();
        }
    }
    // U m V = D, hence m⁻¹ = V D⁻¹ U, and L^∨/L is spanned by the columns of V D⁻¹.
    let (_u, d, v) = smith(&z);
    let orders: Vec<BigInt> = (0..n).map(|i| d.get(i, i).clone()).collect();
    let vq = v.to_qmat();
    let mut reps: Vec<QVec> = vec![vec![Q::zero(); n]];
    for (k, dk) in orders.iter().enumerate() {
        if dk.is_one() {
            continue;
        }
        let dk_usize: usize = dk.try_into().expect("elementary divisor too large");
        let gen: QVec = vq.col(k).iter().map(|x| x / Q::from_integer(dk.clone())).collect();
        let mut next = Vec::with_capacity(reps.len() * dk_usize);
        for r in &reps {
            for t in 0..dk_usize {
                let tq = Q::from_integer(BigInt::from(t));
                let e: QVec = r.iter().zip(&gen).map(|(a, b)| linalg::frac(&(a + b * &tq))).collect();
                next.push(e);
            }
        }
        reps = next;
    }
    reps.sort();
    reps.dedup();
    DiscriminantGroup { coset_reps: reps, orders: orders.into_iter().filter(|d| !d.is_one()).collect() }
}

/// |det m| as a float, for reporting.
pub fn abs_det(space: &QuadSpace) -> f64 {
    q_to_f64(&space.gram().det().abs())
}
