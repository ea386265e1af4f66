//! JSON problem specifications and the built-in named problems.

use crate::cone::{self, ConeKind, SignPolynomial, WallSet};
use crate::error::{Error, Result};
use crate::examples;
use crate::gerf::{ConeSmoother, QuadratureConfig, SemidefiniteRule};
use crate::linalg::{QMat, Q};
use crate::quadspace::{Lattice, QuadSpace};
use crate::theta::{JacobiPoint, TruncationPolicy};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// A Gram entry: an integer, a float (taken exactly) or a "p/q" string.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum GramEntry {
    Int(i64),
    Float(f64),
    Ratio(String),
}

impl From<i64> for GramEntry {
    fn from(x: i64) -> Self {
        GramEntry::Int(x)
    }
}

impl GramEntry {
    fn to_q(&self, i: usize, j: usize) -> Result<Q> {
        let bad = |msg: String| Error::Parse { path: format!("gram[{i}][{j}]"), msg };
        match self {
            GramEntry::Int(x) => Ok(Q::from_integer((*x).into())),
            GramEntry::Float(x) => Q::from_float(*x).ok_or_else(|| bad(format!("{x} is not finite"))),
            GramEntry::Ratio(s) => s.trim().parse::<Q>().map_err(|e| bad(format!("{s:?}: {e}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConeSpec {
    pub kind: ConeKindSpec,
    pub walls: Vec<Vec<i64>>,
    #[serde(default)]
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ConeKindSpec {
    Tetrahedral,
    Cubical,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub tau: [f64; 2],
    pub z: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub gram: Vec<Vec<GramEntry>>,
    pub cone: ConeSpec,
    #[serde(default)]
    pub point: Option<PointSpec>,
    #[serde(default)]
    pub policy: TruncationPolicy,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub semidefinite_rule: SemidefiniteRule,
}

/// A fully validated problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub lattice: Lattice,
    pub walls: WallSet,
    pub poly: SignPolynomial,
    pub point: Option<JacobiPoint>,
    pub policy: TruncationPolicy,
    pub cfg: QuadratureConfig,
    pub rule: SemidefiniteRule,
}

impl ProblemSpec {
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            path: format!("{origin}:{}", e.path()),
            msg: e.inner().to_string(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse { path: path.display().to_string(), msg: e.to_string() })?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn lattice(&self) -> Result<Lattice> {
        let n = self.gram.len();
        if n == 0 || self.gram.iter().any(|r| r.len() != n) {
            return Err(Error::Validation("gram: must be a non-empty square matrix".into()));
        }
        let rows = self
            .gram
            .iter()
            .enumerate()
            .map(|(i, r)| r.iter().enumerate().map(|(j, x)| x.to_q(i, j)).collect::<Result<Vec<Q>>>())
            .collect::<Result<Vec<_>>>()?;
        Lattice::new(QuadSpace::new(QMat::from_rows(&rows))?)
    }

    pub fn build(&self) -> Result<Problem> {
        let lattice = self.lattice()?;
        let kind = match self.cone.kind {
            ConeKindSpec::Tetrahedral => ConeKind::Tetrahedral,
            ConeKindSpec::Cubical => ConeKind::Cubical,
        };
        let walls = WallSet::from_i64(lattice.space(), &self.cone.walls, kind, self.cone.pairs.clone())?;
        let point = match &self.point {
            None => None,
            Some(p) => {
                if p.z.len() != lattice.dim() {
                    return Err(Error::DimensionMismatch { expected: lattice.dim(), got: p.z.len() });
                }
                let z = p.z.iter().map(|c| Complex64::new(c[0], c[1])).collect();
                Some(JacobiPoint::new(Complex64::new(p.tau[0], p.tau[1]), z)?)
            }
        };
        if !(self.policy.term_tol > 0.0) || self.policy.initial_radius == 0 || self.policy.max_radius == 0 {
            return Err(Error::Validation("policy: term_tol and radii must be positive".into()));
        }
        let poly = cone::face_indicator(&walls);
        Ok(Problem { lattice, walls, poly, point, policy: self.policy, cfg: self.quadrature, rule: self.semidefinite_rule })
    }

    /// The spec of a built-in named problem.
    pub fn example(name: &str) -> Option<Self> {
        let (gram, kind, walls, pairs, z): (Vec<Vec<i64>>, _, Vec<Vec<i64>>, Vec<(usize, usize)>, Vec<[f64; 2]>) = match name {
            "running" => (
                vec![vec![1, 0, 0], vec![0, -1, 0], vec![0, 0, -1]],
                ConeKindSpec::Tetrahedral,
                vec![vec![0, 0, -1], vec![1, 1, 2], vec![-1, -2, -2]],
                vec![],
                vec![[0.0, 0.3], [0.0, 0.1], [0.0, 0.2]],
            ),
            "appell-lerch" => (
                vec![vec![1, 1], vec![1, 0]],
                ConeKindSpec::Cubical,
                vec![vec![0, 1], vec![1, -1]],
                vec![(0, 1)],
                vec![[0.0, 0.3], [0.0, 0.2]],
            ),
            "control-posdef" => (vec![vec![2]], ConeKindSpec::Tetrahedral, vec![vec![1]], vec![], vec![[0.0, 0.0]]),
            _ => return None,
        };
        debug_assert!(examples::by_name(name).is_some());
        Some(ProblemSpec {
            gram: gram.into_iter().map(|r| r.into_iter().map(GramEntry::from).collect()).collect(),
            cone: ConeSpec { kind, walls, pairs },
            point: Some(PointSpec { tau: [0.0, 1.0], z }),
            policy: TruncationPolicy::default(),
            quadrature: QuadratureConfig::default(),
            semidefinite_rule: SemidefiniteRule::Limit,
        })
    }
}

impl Problem {
    pub fn example(name: &str) -> Option<Self> {
        ProblemSpec::example(name).map(|s| s.build().expect("built-in problems are valid"))
    }

    pub fn smoother(&self) -> Result<ConeSmoother> {
        ConeSmoother::with_rule(&self.walls, &self.poly, &self.cfg, self.rule)
    }

    /// Structural checks on the cone; failures are reported as validation errors.
    pub fn validate(&self) -> Result<cone::ValidationReport> {
        let r = cone::validate(&self.walls, &self.lattice);
        if r.passed() {
            Ok(r)
        } else {
            Err(Error::Validation(format!("cone: {}", r.failures.join("; "))))
        }
    }

    pub fn point(&self) -> Result<&JacobiPoint> {
        self.point.as_ref().ok_or_else(|| Error::Validation("the problem has no evaluation point".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples_build() {
        for name in ["running", "appell-lerch", "control-posdef"] {
            let p = Problem::example(name).unwrap();
            assert!(p.point.is_some());
        }
        assert!(ProblemSpec::example("nope").is_none());
    }

    #[test]
    fn parse_errors_carry_paths() {
        let text = r#"{"gram": [[1]], "cone": {"kind": "conical", "walls": [[1]]}}"#;
        match ProblemSpec::from_json(text, "x.json") {
            Err(Error::Parse { path, .. }) => assert!(path.contains("cone.kind"), "{path}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn roundtrip() {
        let s = ProblemSpec::example("running").unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(ProblemSpec::from_json(&text, "-").unwrap(), s);
    }

    #[test]
    fn gram_entries() {
        let text = r#"{"gram": [[2, "1/2"], [0.5, 4]], "cone": {"kind": "tetrahedral", "walls": [[1,0]]}}"#;
        let s = ProblemSpec::from_json(text, "-").unwrap();
        assert!(matches!(s.lattice(), Err(Error::NotIntegral(0, 1))));
        let text = r#"{"gram": [[2, 1]], "cone": {"kind": "tetrahedral", "walls": [[1,0]]}}"#;
        assert!(matches!(ProblemSpec::from_json(text, "-").unwrap().lattice(), Err(Error::Validation(_))));
    }

    #[test]
    fn zero_gram_is_degenerate() {
        let text = r#"{"gram": [[0,0],[0,0]], "cone": {"kind": "tetrahedral", "walls": [[1,0]]}}"#;
        let s = ProblemSpec::from_json(text, "-").unwrap();
        assert!(matches!(s.build(), Err(Error::DegenerateForm)));
    }
}
