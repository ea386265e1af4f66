//! Small dense exact linear algebra over `BigRational` / `BigInt`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;
pub type QVec = Vec<Q>;

/// Row-major square or rectangular rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Q>,
}

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qfrac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_to_f64(x: &Q) -> f64 {
    // to_f64 on BigRational handles large numerators and denominators
    x.to_f64().unwrap_or_else(|| {
        let n = x.numer().to_f64().unwrap_or(f64::NAN);
        let d = x.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// "p/q", or just "p" for integers.
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn qvec_to_f64(v: &[Q]) -> Vec<f64> {
    v.iter().map(q_to_f64).collect()
}

pub fn qvec_from_i64(v: &[i64]) -> QVec {
    v.iter().map(|&x| q(x)).collect()
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

impl QMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMat { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Q::one());
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Q>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix");
            data.extend(row.iter().cloned());
        }
        QMat { rows: r, cols: c, data }
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let rr: Vec<Vec<Q>> = rows.iter().map(|r| qvec_from_i64(r)).collect();
        Self::from_rows(&rr)
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Q) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> QVec {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> QVec {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn mul_vec(&self, v: &[Q]) -> QVec {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(&self.data[i * self.cols..(i + 1) * self.cols], v)).collect()
    }

    pub fn mul(&self, o: &QMat) -> QMat {
        assert_eq!(self.cols, o.rows);
        let mut r = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut s = Q::zero();
                for k in 0..self.cols {
                    s += self.get(i, k) * o.get(k, j);
                }
                r.set(i, j, s);
            }
        }
        r
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| q_to_f64(self.get(i, j))).collect())
            .collect()
    }

    /// Reduced row echelon form; returns (rref, pivot columns).
    pub fn rref(&self) -> (QMat, Vec<usize>) {
        let mut a = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..a.cols {
            if r == a.rows {
                break;
            }
            let Some(p) = (r..a.rows).find(|&i| !a.get(i, c).is_zero()) else { continue };
            if p != r {
                for j in 0..a.cols {
                    a.data.swap(p * a.cols + j, r * a.cols + j);
                }
            }
            let inv = Q::one() / a.get(r, c).clone();
            for j in 0..a.cols {
                let x = a.get(r, j) * &inv;
                a.set(r, j, x);
            }
            for i in 0..a.rows {
                if i != r && !a.get(i, c).is_zero() {
                    let f = a.get(i, c).clone();
                    for j in 0..a.cols {
                        let x = a.get(i, j) - &f * a.get(r, j);
                        a.set(i, j, x);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (a, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel {x : A x = 0}.
    pub fn kernel(&self) -> Vec<QVec> {
        let (r, piv) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !piv.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![Q::zero(); self.cols];
                x[f] = Q::one();
                for (i, &p) in piv.iter().enumerate() {
                    x[p] = -r.get(i, f).clone();
                }
                x
            })
            .collect()
    }

    pub fn det(&self) -> Q {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Q::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !a.get(i, c).is_zero()) else { return Q::zero() };
            if p != c {
                for j in 0..n {
                    a.data.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            let piv = a.get(c, c).clone();
            det *= &piv;
            for i in c + 1..n {
                if a.get(i, c).is_zero() {
                    continue;
                }
                let f = a.get(i, c) / &piv;
                for j in c..n {
                    let x = a.get(i, j) - &f * a.get(c, j);
                    a.set(i, j, x);
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<QMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Q::one());
        }
        let (r, piv) = aug.rref();
        if piv.len() < n || piv[n - 1] != n - 1 {
            return None;
        }
        let mut inv = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.get(i, n + j).clone());
            }
        }
        Some(inv)
    }

    /// Solve A x = b for square nonsingular A.
    pub fn solve(&self, b: &[Q]) -> Option<QVec> {
        self.inverse().map(|inv| inv.mul_vec(b))
    }

    pub fn principal(&self, idx: &[usize]) -> QMat {
        let mut m = Self::zeros(idx.len(), idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m.set(a, b, self.get(i, j).clone());
            }
        }
        m
    }
}

/// Inertia (positive, negative, zero) of a symmetric rational matrix by
/// congruence diagonalization.
pub fn inertia(m: &QMat) -> (usize, usize, usize) {
    assert!(m.is_symmetric(), "inertia needs a symmetric matrix");
    let mut a = m.clone();
    let n = a.rows;
    let (mut p, mut neg) = (0, 0);
    let mut active: Vec<usize> = (0..n).collect();
    while !active.is_empty() {
        let diag = active.iter().copied().find(|&i| !a.get(i, i).is_zero());
        let piv = match diag {
            Some(i) => i,
            None => {
                // all diagonal entries vanish; look for an off-diagonal pair
                let mut pair = None;
                'o: for &i in &active {
                    for &j in &active {
                        if i != j && !a.get(i, j).is_zero() {
                            pair = Some((i, j));
                            break 'o;
                        }
                    }
                }
                let Some((i, j)) = pair else { break };
                // e_i <- e_i + e_j makes the (i,i) entry 2 a_ij
                for &k in &active {
                    let x = a.get(i, k) + a.get(j, k);
                    a.set(i, k, x);
                }
                for &k in &active {
                    let x = a.get(k, i) + a.get(k, j);
                    a.set(k, i, x);
                }
                i
            }
        };
        let d = a.get(piv, piv).clone();
        if d.is_positive() {
            p += 1;
        } else {
            neg += 1;
        }
        active.retain(|&k| k != piv);
        for &i in &active {
            let f = a.get(i, piv) / &d;
            if f.is_zero() {
                continue;
            }
            for &j in &active {
                let x = a.get(i, j) - &f * a.get(piv, j);
                a.set(i, j, x);
            }
        }
        for &i in &active {
            a.set(i, piv, Q::zero());
            a.set(piv, i, Q::zero());
        }
    }
    (p, neg, n - p - neg)
}

/// Integer matrix helpers (Smith normal form) on `BigInt`.
#[derive(Clone, Debug)]
pub struct ZMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<BigInt>,
}

impl ZMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ZMat { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }
    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }
    pub fn at(&mut self, i: usize, j: usize) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
    fn swap_cols(&mut self, a: usize, b: usize) {
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }
    /// row_a += f * row_b
    fn add_row(&mut self, a: usize, b: usize, f: &BigInt) {
        for j in 0..self.cols {
            let x = self.get(b, j) * f;
            *self.at(a, j) += x;
        }
    }
    fn add_col(&mut self, a: usize, b: usize, f: &BigInt) {
        for i in 0..self.rows {
            let x = self.get(i, b) * f;
            *self.at(i, a) += x;
        }
    }
    pub fn to_qmat(&self) -> QMat {
        QMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| Q::from_integer(x.clone())).collect(),
        }
    }
}

/// Smith normal form: returns (U, D, V) with U A V = D diagonal, U and V
/// unimodular, diagonal entries non-negative and dividing each other.
pub fn smith(a: &ZMat) -> (ZMat, ZMat, ZMat) {
    let (m, n) = (a.rows, a.cols);
    let mut d = a.clone();
    let mut u = ZMat::identity(m);
    let mut v = ZMat::identity(n);
    let mut t = 0;
    while t < m.min(n) {
        // pick the smallest nonzero entry in the trailing block as pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                let x = d.get(i, j);
                if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < d.get(bi, bj).abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        d.swap_rows(t, pi);
        u.swap_rows(t, pi);
        d.swap_cols(t, pj);
        v.swap_cols(t, pj);
        let mut clean = true;
        for i in t + 1..m {
            let qt = d.get(i, t).div_floor(d.get(t, t));
            if !qt.is_zero() {
                let f = -qt;
                d.add_row(i, t, &f);
                u.add_row(i, t, &f);
            }
            if !d.get(i, t).is_zero() {
                clean = false;
            }
        }
        for j in t + 1..n {
            let qt = d.get(t, j).div_floor(d.get(t, t));
            if !qt.is_zero() {
                let f = -qt;
                d.add_col(j, t, &f);
                v.add_col(j, t, &f);
            }
            if !d.get(t, j).is_zero() {
                clean = false;
            }
        }
        if !clean {
            continue;
        }
        // enforce divisibility of the trailing block
        let mut bad = None;
        'o: for i in t + 1..m {
            for j in t + 1..n {
                if !(d.get(i, j) % d.get(t, t)).is_zero() {
                    bad = Some(i);
                    break 'o;
                }
            }
        }
        if let Some(i) = bad {
            let one = BigInt::one();
            d.add_row(t, i, &one);
            u.add_row(t, i, &one);
            continue;
        }
        if d.get(t, t).is_negative() {
            for j in 0..n {
                let x = -d.get(t, j).clone();
                *d.at(t, j) = x;
            }
            for j in 0..m {
                let x = -u.get(t, j).clone();
                *u.at(t, j) = x;
            }
        }
        t += 1;
    }
    (u, d, v)
}

/// Reduce a rational number into [0, 1).
pub fn frac(x: &Q) -> Q {
    x - x.floor()
}

/// Distance of a real number to the lattice `step`·ℤ.
pub fn dist_to_lattice(x: f64, step: f64) -> f64 {
    let r = x / step;
    (r - r.round()).abs() * step
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inertia_of_lorentzian() {
        let m = QMat::from_i64(&[vec![1, 0, 0], vec![0, -1, 0], vec![0, 0, -1]]);
        assert_eq!(inertia(&m), (1, 2, 0));
        let h = QMat::from_i64(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(inertia(&h), (1, 1, 0));
        let z = QMat::from_i64(&[vec![-1, -1], vec![-1, -1]]);
        assert_eq!(inertia(&z), (0, 1, 1));
    }

    #[test]
    fn smith_diagonalizes() {
        let mut a = ZMat::zeros(2, 2);
        *a.at(0, 0) = 2.into();
        *a.at(0, 1) = 4.into();
        *a.at(1, 0) = 6.into();
        *a.at(1, 1) = 8.into();
        let (u, d, v) = smith(&a);
        let prod = u.to_qmat().mul(&a.to_qmat()).mul(&v.to_qmat());
        assert_eq!(prod, d.to_qmat());
        assert_eq!(d.get(0, 0), &BigInt::from(2));
        assert_eq!(d.get(1, 1), &BigInt::from(4));
        assert!(u.to_qmat().det().abs() == q(1));
    }

    #[test]
    fn kernel_and_inverse() {
        let m = QMat::from_i64(&[vec![1, 1, 0], vec![0, 0, 1]]);
        let k = m.kernel();
        assert_eq!(k.len(), 1);
        assert!(m.mul_vec(&k[0]).iter().all(|x| x.is_zero()));
        let s = QMat::from_i64(&[vec![2, 1], vec![1, 1]]);
        let inv = s.inverse().unwrap();
        assert_eq!(s.mul(&inv), QMat::identity(2));
    }
}
