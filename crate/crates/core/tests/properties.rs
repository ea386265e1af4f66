mod common;

use indeftheta::cone::{face_indicator_tetrahedral, membership};
use indeftheta::gerf::{self, NegDefFrame};
use indeftheta::theta::JacobiPoint;
use indeftheta::verify;
use indeftheta::*;
use num_complex::Complex64;
use num_traits::Signed;
use proptest::prelude::*;
use proptest::test_runner::FileFailurePersistence;

/// Shrunk failures are kept next to this file.
fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: Some(Box::new(FileFailurePersistence::WithSource("proptest-regressions"))),
        ..ProptestConfig::default()
    }
}

const NEG_GRAM: [[i64; 3]; 3] = [[-2, 1, 0], [1, -4, 1], [0, 1, -2]];

fn neg_space() -> QuadSpace {
    QuadSpace::from_i64(&NEG_GRAM.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

/// Up to three integer vectors spanning a definite subspace of the negative definite space.
fn frame_strategy() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..=3)
        .prop_flat_map(|k| prop::collection::vec(prop::collection::vec(-2i64..=2, 3), k))
        .prop_filter("independent", |ws| NegDefFrame::from_i64(&neg_space(), ws).map(|f| f.is_definite()).unwrap_or(false))
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 3)
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn face_indicator_matches_membership(v in prop::collection::vec(-5.0f64..5.0, 3)) {
        let (_, w) = indeftheta::examples::running();
        let pairings = w.pairings(&v);
        prop_assume!(pairings.iter().all(|x| x.abs() > 1e-9));
        let p = face_indicator_tetrahedral(&w);
        let want = match membership(&w, &v) {
            Membership::InInterior => 1.0,
            _ => 0.0,
        };
        prop_assert!((p.eval(&w, &v) - want).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn smoothed_sign_is_bounded_and_has_parity(ws in frame_strategy(), v in point()) {
        let frame = NegDefFrame::from_i64(&neg_space(), &ws).unwrap();
        let cfg = QuadratureConfig::default();
        let a = gerf::sgn_hat(&frame, &v, &cfg).unwrap();
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let b = gerf::sgn_hat(&frame, &neg, &cfg).unwrap();
        let parity = if ws.len() % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!(a.abs() <= 1.0 + 1e-12);
        prop_assert!((b - parity * a).abs() < 1e-10, "{a} {b}");
    }

    #[test]
    fn decomposition_matches_orthant_expansion(ws in frame_strategy(), v in point()) {
        let frame = NegDefFrame::from_i64(&neg_space(), &ws).unwrap();
        let cfg = QuadratureConfig::default();
        let a = gerf::sgn_hat(&frame, &v, &cfg).unwrap();
        let b = gerf::sgn_hat_orthant(&frame, &v, &cfg).unwrap();
        prop_assert!((a - b).abs() < 1e-9, "{a} {b}");
    }

    #[test]
    fn far_from_the_walls_the_smoothing_is_the_sign(ws in frame_strategy(), v in point()) {
        let frame = NegDefFrame::from_i64(&neg_space(), &ws).unwrap();
        let d = gerf::wall_distance(&frame, &v);
        prop_assume!(d > 1e-3);
        let scale = 3.0 / d;
        let far: Vec<f64> = v.iter().map(|x| x * scale).collect();
        let s = gerf::sgn_e(&frame, &far) as f64;
        let h = gerf::sgn_hat(&frame, &far, &QuadratureConfig::default()).unwrap();
        prop_assert!((h - s).abs() < 1e-12, "{h} {s}");
    }
}

/// Even diagonal: on odd lattices q is only defined mod ½ on the discriminant group,
/// so the Gauss sum depends on the coset representatives and need not have modulus 1.
fn even_gram() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..=3)
        .prop_flat_map(|n| prop::collection::vec(-4i64..=4, n * (n + 1) / 2).prop_map(move |t| (n, t)))
        .prop_map(|(n, t)| {
            let mut g = vec![vec![0i64; n]; n];
            let mut k = 0;
            for i in 0..n {
                for j in i..n {
                    let x = if i == j { 2 * t[k] } else { t[k] };
                    g[i][j] = x;
                    g[j][i] = x;
                    k += 1;
                }
            }
            g
        })
        .prop_filter("nondegenerate", |g| Lattice::from_i64(g).is_ok())
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn weil_representation_is_unitary(g in even_gram()) {
        let w = build_weil(&Lattice::from_i64(&g).unwrap());
        prop_assert!(w.unitarity_defect_s() < 1e-12);
        prop_assert!(w.unitarity_defect_t() < 1e-12);
    }

    #[test]
    fn discriminant_order_is_the_determinant(g in even_gram()) {
        let l = Lattice::from_i64(&g).unwrap();
        let det = l.space().gram().det();
        prop_assert!(det.is_integer());
        let n = l.discriminant_group().len();
        prop_assert_eq!(num_bigint::BigInt::from(n), det.numer().abs());
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn control_lattice_satisfies_the_elliptic_law(
        x in -0.5f64..0.5, y in 0.05f64..0.4, lam in -2i64..=2, mu in -2i64..=2,
    ) {
        let p = Problem::example("control-posdef").unwrap();
        let tau = Complex64::new(0.1, 0.9);
        let z = Complex64::new(x, y);
        let policy = TruncationPolicy::fixed(32);
        let pt = JacobiPoint::new(tau, vec![z]).unwrap();
        let r = verify::check_elliptic(&p, &pt, &[lam], &[mu], &policy, 0.0).unwrap();
        // the shifted series grows like exp(2π|λ| Im z'), so the error is judged relative to it
        let shifted = JacobiPoint::new(tau, vec![z + tau * lam as f64 + mu as f64]).unwrap();
        let scale = verify::theta_of(&p, &p.smoother().unwrap(), &shifted, &policy).unwrap().components.iter().map(|c| c.norm()).fold(1.0, f64::max);
        prop_assert!(r.max_abs_error <= 1e-13 * scale, "{} vs scale {scale:e}", r.max_abs_error);
    }
}

/// The two-wall smoothing at the origin is (2/π) arcsin of the wall correlation.
#[test]
fn pair_at_origin_is_arcsine_of_correlation() {
    let (l, _) = indeftheta::examples::running();
    let frame = NegDefFrame::from_i64(l.space(), &[vec![0, 0, -1], vec![-1, -2, -2]]).unwrap();
    let got = gerf::sgn_hat_orthant(&frame, &[0.0; 3], &QuadratureConfig::default()).unwrap();
    // ⟨w0,w0⟩ = −1, ⟨w2,w2⟩ = −7, ⟨w0,w2⟩ = −2
    let want = 2.0 / std::f64::consts::PI * (2.0 / 7f64.sqrt()).asin();
    assert!((got - want).abs() < 1e-12, "{got} {want}");
}

/// Frozen values of ŝgn for C_ex, cross-checked against the two-integral oracle in tests/common.
#[test]
fn running_example_golden_values() {
    let p = Problem::example("running").unwrap();
    let sm = p.smoother().unwrap();
    let cases: [([f64; 3], f64); 3] = [
        ([0.5, 1.0, 0.0], -9.418_109_536_094_01e-5),
        ([1.3, -0.2, 0.4], 2.836_255_882_944_452e-2),
        ([-0.7, 0.35, 1.1], 3.027_329_495_974_84e-7),
    ];
    for (v, want) in cases {
        let got = sm.eval(&v);
        assert!((got - want).abs() < 1e-9, "{v:?}: {got} vs {want}");
        assert!((common::running_direct(&v) - want).abs() < 1e-13);
    }
}
