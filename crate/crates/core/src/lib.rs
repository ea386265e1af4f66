//! Indefinite theta series attached to polyhedral cones, their smoothed
//! kernels and the checks of their modular behaviour.

pub mod cone;
pub mod error;
pub mod examples;
pub mod gerf;
pub mod linalg;
pub mod numeric;
pub mod problem;
pub mod quadspace;
pub mod theta;
pub mod verify;
pub mod weil;

pub use cone::{ConeKind, Membership, SignPolynomial, WallSet};
pub use error::{Error, Result};
pub use gerf::{ConeSmoother, NegDefFrame, QuadratureConfig, SemidefiniteRule};
pub use quadspace::{DiscriminantGroup, Lattice, QuadSpace};
pub use theta::{JacobiPoint, ThetaValue, TruncationPolicy};
pub use weil::{build_weil, Generator, WeilRep};
pub use problem::{Problem, ProblemSpec};
pub use verify::CheckReport;
