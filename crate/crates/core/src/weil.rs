//! The Weil representation on ℂ[L^∨/L] at the generators T and S.

use crate::error::{Error, Result};
use crate::linalg::{self, frac, Q};
use crate::quadspace::{DiscriminantGroup, Lattice};
use num_complex::Complex64;
use std::f64::consts::PI;

/// e(x) = exp(2πi x) for a rational x, reduced mod 1 first.
pub fn e_rational(x: &Q) -> Complex64 {
    let r = linalg::q_to_f64(&frac(x));
    Complex64::from_polar(1.0, 2.0 * PI * r)
}

#[derive(Clone, Debug)]
pub struct WeilRep {
    pub disc: DiscriminantGroup,
    pub rho_t: Vec<Complex64>,
    pub rho_s: Vec<Vec<Complex64>>,
    pub rho_s_inv: Vec<Vec<Complex64>>,
    pub sigma_l: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    T,
    TInv,
    S,
    SInv,
}

/// For odd lattices q is only defined mod ½ on the discriminant group, so with a nontrivial
/// group the phases depend on the stored representatives and ρ(S) need not be unitary.
pub fn build_weil(l: &Lattice) -> WeilRep {
    let disc = l.discriminant_group();
    let sp = l.space();
    let n = disc.len();
    let qs: Vec<Q> = disc.coset_reps.iter().map(|g| sp.quad(g).expect("dimension")).collect();
    let rho_t: Vec<Complex64> = qs.iter().map(e_rational).collect();
    let sqrt_d = (n as f64).sqrt();
    let sigma_l = qs.iter().map(|x| e_rational(&-x.clone())).sum::<Complex64>() / sqrt_d;
    let mut rho_s = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (a, ga) in disc.coset_reps.iter().enumerate() {
        for (b, gb) in disc.coset_reps.iter().enumerate() {
            let pairing = sp.bilinear(ga, gb).expect("dimension");
            rho_s[a][b] = sigma_l / sqrt_d * e_rational(&-pairing);
        }
    }
    let rho_s_inv = invert(&rho_s).expect("rho_S is invertible for a nondegenerate lattice");
    WeilRep { disc, rho_t, rho_s, rho_s_inv, sigma_l }
}

fn invert(m: &[Vec<Complex64>]) -> Option<Vec<Vec<Complex64>>> {
    let n = m.len();
    let mut a: Vec<Vec<Complex64>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].norm().partial_cmp(&a[y][c].norm()).unwrap())?;
        if a[p][c].norm() < 1e-300 {
            return None;
        }
        a.swap(p, c);
        let inv = 1.0 / a[c][c];
        for x in a[c].iter_mut() {
            *x *= inv;
        }
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                if f.norm() != 0.0 {
                    let row_c = a[c].clone();
                    for (x, y) in a[r].iter_mut().zip(row_c) {
                        *x -= f * y;
                    }
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

impl WeilRep {
    pub fn dim(&self) -> usize {
        self.rho_t.len()
    }

    pub fn apply(&self, gen: Generator, vec: &[Complex64]) -> Result<Vec<Complex64>> {
        if vec.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: vec.len() });
        }
        let mat = |m: &Vec<Vec<Complex64>>| -> Vec<Complex64> {
            // (ρ x)_δ = Σ_γ M[δ][γ] x_γ
            m.iter().map(|row| row.iter().zip(vec).map(|(a, b)| a * b).sum()).collect()
        };
        Ok(match gen {
            Generator::T => self.rho_t.iter().zip(vec).map(|(a, b)| a * b).collect(),
            Generator::TInv => self.rho_t.iter().zip(vec).map(|(a, b)| a.conj() * b).collect(),
            Generator::S => mat(&self.rho_s),
            Generator::SInv => mat(&self.rho_s_inv),
        })
    }

    /// max |(ρ_S^* ρ_S − I)_{ij}|.
    pub fn unitarity_defect_s(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let s: Complex64 = (0..n).map(|k| self.rho_s[k][i].conj() * self.rho_s[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    pub fn unitarity_defect_t(&self) -> f64 {
        self.rho_t.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rank_one_even() {
        let l = Lattice::from_i64(&[vec![2]]).unwrap();
        let w = build_weil(&l);
        assert_eq!(w.dim(), 2);
        assert!((w.rho_t[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((w.rho_t[1] - c(0.0, 1.0)).norm() < 1e-15);
        assert!((w.sigma_l - Complex64::from_polar(1.0, -PI / 4.0)).norm() < 1e-15);
        let img = w.apply(Generator::S, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let expect = Complex64::from_polar(1.0, -PI / 4.0) / 2f64.sqrt();
        assert!((img[0] - expect).norm() < 1e-15 && (img[1] - expect).norm() < 1e-15);
        assert!(w.unitarity_defect_s() < 1e-14);
    }

    #[test]
    fn unimodular_is_trivial() {
        let l = Lattice::from_i64(&[vec![1, 0, 0], vec![0, -1, 0], vec![0, 0, -1]]).unwrap();
        let w = build_weil(&l);
        assert_eq!(w.dim(), 1);
        assert!((w.rho_t[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((w.sigma_l - c(1.0, 0.0)).norm() < 1e-15);
        assert!((w.rho_s[0][0] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn inverses() {
        let l = Lattice::from_i64(&[vec![2, 1], vec![1, 4]]).unwrap();
        let w = build_weil(&l);
        let x: Vec<Complex64> = (0..w.dim()).map(|i| c(i as f64 * 0.3 - 1.0, 0.7 - 0.1 * i as f64)).collect();
        for (g, h) in [(Generator::T, Generator::TInv), (Generator::S, Generator::SInv)] {
            let y = w.apply(h, &w.apply(g, &x).unwrap()).unwrap();
            assert!(x.iter().zip(&y).all(|(a, b)| (a - b).norm() < 1e-13));
        }
    }
}
