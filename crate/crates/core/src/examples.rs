//! Built-in lattices and cones.

use crate::cone::{ConeKind, WallSet};
use crate::quadspace::Lattice;

/// L = ℤ³ with q(l) = ½(l₁² − l₂² − l₃²) and the cone cut out by
/// l₃ ≥ 0, l₁ − l₂ − 2l₃ ≥ 0, 2l₂ + 2l₃ − l₁ ≥ 0 (and its negative).
///
/// The walls are oriented so that ⟨l, w⟩ equals those three functionals.
pub fn running() -> (Lattice, WallSet) {
    let l = Lattice::from_i64(&[vec![1, 0, 0], vec![0, -1, 0], vec![0, 0, -1]]).expect("valid lattice");
    let w = WallSet::from_i64(
        l.space(),
        &[vec![0, 0, -1], vec![1, 1, 2], vec![-1, -2, -2]],
        ConeKind::Tetrahedral,
        vec![],
    )
    .expect("valid walls");
    (l, w)
}

/// Gram ((1,1),(1,0)) with the cone {l₁, l₂ ≥ 0} ∪ {l₁, l₂ ≤ 0}.
pub fn appell_lerch() -> (Lattice, WallSet) {
    let l = Lattice::from_i64(&[vec![1, 1], vec![1, 0]]).expect("valid lattice");
    // ⟨l, (0,1)⟩ = l₁ and ⟨l, (1,−1)⟩ = l₂
    let w = WallSet::from_i64(l.space(), &[vec![0, 1], vec![1, -1]], ConeKind::Cubical, vec![(0, 1)])
        .expect("valid walls");
    (l, w)
}

/// The positive definite lattice ℤ with q(l) = l²; the cone is all of V.
pub fn control_posdef() -> (Lattice, WallSet) {
    let l = Lattice::from_i64(&[vec![2]]).expect("valid lattice");
    let w = WallSet::from_i64(l.space(), &[vec![1]], ConeKind::Tetrahedral, vec![]).expect("valid walls");
    (l, w)
}

pub fn by_name(name: &str) -> Option<(Lattice, WallSet)> {
    match name {
        "running" => Some(running()),
        "appell-lerch" => Some(appell_lerch()),
        "control-posdef" => Some(control_posdef()),
        _ => None,
    }
}
