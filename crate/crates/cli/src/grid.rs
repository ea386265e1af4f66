//! `--grid` axis specs: one comma-separated entry per coordinate, each either a
//! fixed value `x` or a range `lo:hi:n` with n ≥ 2 evenly spaced samples.

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub axes: Vec<Vec<f64>>,
}

impl Grid {
    pub fn parse(spec: &str, dim: usize) -> Result<Grid, String> {
        let mut axes = Vec::new();
        for (i, part) in spec.split(',').enumerate() {
            let p: Vec<&str> = part.trim().split(':').collect();
            let f = |s: &str| -> Result<f64, String> {
                let x: f64 = s.trim().parse().map_err(|_| format!("axis {i}: {s:?} is not a number"))?;
                if x.is_finite() {
                    Ok(x)
                } else {
                    Err(format!("axis {i}: {s:?} is not finite"))
                }
            };
            let axis = match p.as_slice() {
                [x] => vec![f(x)?],
                [lo, hi, n] => {
                    let (lo, hi) = (f(lo)?, f(hi)?);
                    let n: usize = n.trim().parse().map_err(|_| format!("axis {i}: {n:?} is not a count"))?;
                    if n < 2 || lo >= hi {
                        return Err(format!("axis {i}: need lo < hi and at least 2 samples"));
                    }
                    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
                }
                _ => return Err(format!("axis {i}: expected x or lo:hi:n, got {part:?}")),
            };
            axes.push(axis);
        }
        if axes.len() != dim {
            return Err(format!("{} axes given for a {dim}-dimensional lattice", axes.len()));
        }
        Ok(Grid { axes })
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    /// Points in row-major order (last axis fastest).
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![]];
        for axis in &self.axes {
            out = out.into_iter().flat_map(|p| axis.iter().map(move |&x| [p.clone(), vec![x]].concat())).collect();
        }
        out
    }
}
