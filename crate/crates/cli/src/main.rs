mod grid;
mod render;

use clap::{Args, Parser, Subcommand};
use indeftheta::linalg::fmt_q;
use indeftheta::theta::{self, SingularInfo};
use indeftheta::verify::{self, CheckReport};
use indeftheta::{build_weil, Error, Problem, ProblemSpec, ThetaValue, TruncationPolicy};
use num_complex::Complex64;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "indeftheta", version, about = "Indefinite theta series on polyhedral cones")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate theta_sign, theta_hat and theta_cone at the spec's point.
    Eval(Common),
    /// Tabulate the sign function and its smoothing on a grid (CSV).
    Gerf {
        #[command(flatten)]
        common: Common,
        /// One entry per coordinate: a value or lo:hi:n
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
    },
    /// Run transformation-law and consistency checks.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated: T, T-characteristic, S, S-signature-phase, elliptic, vigneras, example
        #[arg(long, default_value = "T,S,elliptic")]
        checks: String,
        /// Smallest tolerance a check is held to
        #[arg(long, default_value_t = 1e-5)]
        floor: f64,
    },
    /// Print the Weil representation of the lattice.
    DumpWeil(Common),
}

#[derive(Args)]
struct Common {
    /// Problem spec (JSON)
    #[arg(long, conflicts_with = "example", required_unless_present = "example")]
    spec: Option<PathBuf>,
    /// Built-in problem: running, appell-lerch, control-posdef
    #[arg(long)]
    example: Option<String>,
    /// Fixed truncation radius (disables doubling)
    #[arg(long)]
    radius: Option<usize>,
    /// Truncation tolerance on the tail estimate
    #[arg(long)]
    tol: Option<f64>,
    /// Write the result here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

/// An error tagged with the flag or input it came from.
struct Failure {
    source: String,
    err: Error,
}

impl Failure {
    fn new(source: impl Into<String>, err: Error) -> Self {
        Failure { source: source.into(), err }
    }

    fn code(&self) -> u8 {
        match self.err {
            Error::OnSingularSet { .. } => 3,
            Error::Parse { .. }
            | Error::DegenerateForm
            | Error::NotSymmetric
            | Error::NotIntegral(..)
            | Error::DimensionMismatch { .. }
            | Error::DegenerateSpan
            | Error::InvalidWalls(_)
            | Error::ConeNotNonNegative(_)
            | Error::NonRationalEdge(_)
            | Error::Validation(_) => 2,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, Failure>;

impl Common {
    fn origin(&self) -> String {
        match (&self.spec, &self.example) {
            (Some(p), _) => format!("--spec {}", p.display()),
            (None, Some(n)) => format!("--example {n}"),
            _ => unreachable!("clap enforces one of --spec/--example"),
        }
    }

    fn problem_spec(&self) -> CliResult<ProblemSpec> {
        let mut spec = match (&self.spec, &self.example) {
            (Some(p), _) => ProblemSpec::from_file(p).map_err(|e| Failure::new(self.origin(), e))?,
            (None, Some(n)) => ProblemSpec::example(n).ok_or_else(|| {
                Failure::new(
                    "--example",
                    Error::Validation(format!("unknown example {n:?} (running, appell-lerch, control-posdef)")),
                )
            })?,
            _ => unreachable!(),
        };
        if let Some(r) = self.radius {
            if r == 0 {
                return Err(Failure::new("--radius", Error::Validation("must be positive".into())));
            }
            spec.policy = TruncationPolicy { term_tol: spec.policy.term_tol, ..TruncationPolicy::fixed(r) };
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(Failure::new("--tol", Error::Validation("must be positive".into())));
            }
            spec.policy.term_tol = t;
        }
        Ok(spec)
    }

    fn problem(&self) -> CliResult<Problem> {
        let p = self.problem_spec()?.build().map_err(|e| Failure::new(self.origin(), e))?;
        p.validate().map_err(|e| Failure::new(self.origin(), e))?;
        Ok(p)
    }

    fn emit(&self, text: &str) -> CliResult<()> {
        match &self.out {
            None => {
                print!("{text}");
                Ok(())
            }
            Some(path) => std::fs::write(path, text)
                .map_err(|e| Failure::new("--out", Error::Validation(format!("{}: {e}", path.display())))),
        }
    }
}

fn complex_vec(v: &[Complex64]) -> Value {
    json!(v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())
}

fn singular_check(p: &Problem, origin: &str) -> CliResult<SingularInfo> {
    let pt = p.point().map_err(|e| Failure::new(origin, e))?;
    let s = theta::singular_set_distance(&p.lattice, &p.walls, pt).map_err(|e| Failure::new(origin, e))?;
    if s.distance <= 1e-12 {
        return Err(Failure::new(origin, Error::OnSingularSet { edge: s.edge, generator: s.generator }));
    }
    Ok(s)
}

fn cmd_eval(c: &Common) -> CliResult<u8> {
    let origin = c.origin();
    let p = c.problem()?;
    let singular = singular_check(&p, &origin)?;
    let pt = p.point().map_err(|e| Failure::new(&origin, e))?;
    let sm = p.smoother().map_err(|e| Failure::new(&origin, e))?;
    let series: [(&str, indeftheta::Result<ThetaValue>); 3] = [
        ("theta_sign", theta::theta_sign(&p.lattice, &p.walls, &p.poly, pt, &p.policy)),
        ("theta_hat", theta::theta_hat_smoother(&p.lattice, &p.walls, &sm, pt, &p.policy)),
        ("theta_cone", theta::theta_cone(&p.lattice, &p.walls, pt, &p.policy)),
    ];
    let mut out = serde_json::Map::new();
    let mut failed = false;
    for (name, r) in &series {
        let v = match r {
            Ok(t) => serde_json::to_value(t).expect("serializable"),
            Err(e) => {
                failed = true;
                json!({ "error": e.to_string() })
            }
        };
        out.insert(name.to_string(), v);
    }
    let diff = |a: usize, b: usize| -> Value {
        match (&series[a].1, &series[b].1) {
            (Ok(x), Ok(y)) => {
                complex_vec(&x.components.iter().zip(&y.components).map(|(u, w)| u - w).collect::<Vec<_>>())
            }
            _ => Value::Null,
        }
    };
    out.insert(
        "differences".into(),
        json!({ "hat_minus_sign": diff(1, 0), "hat_minus_cone": diff(1, 2), "sign_minus_cone": diff(0, 2) }),
    );
    out.insert("point".into(), json!({ "tau": [pt.tau.re, pt.tau.im], "z": complex_vec(&pt.z) }));
    out.insert("singular_set".into(), serde_json::to_value(&singular).expect("serializable"));
    out.insert("policy".into(), serde_json::to_value(p.policy).expect("serializable"));
    c.emit(&render::json(&Value::Object(out)))?;
    Ok(if failed { 1 } else { 0 })
}

fn cmd_gerf(c: &Common, grid: &str) -> CliResult<u8> {
    let origin = c.origin();
    let p = c.problem()?;
    let g = grid::Grid::parse(grid, p.lattice.dim()).map_err(|m| Failure::new("--grid", Error::Validation(m)))?;
    if g.len() > 4_000_000 {
        return Err(Failure::new("--grid", Error::Validation(format!("{} points is too many", g.len()))));
    }
    let sm = p.smoother().map_err(|e| Failure::new(&origin, e))?;
    let d = p.lattice.dim();
    let mut text: String = (1..=d).map(|i| format!("v{i},")).collect();
    text.push_str("sgn,sgn_hat,diff\n");
    for v in g.points() {
        let s = p.poly.eval(&p.walls, &v);
        let h = sm.eval(&v);
        let row: Vec<String> = v.iter().chain([s, h, h - s].iter()).map(|x| render::num(*x)).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    c.emit(&text)?;
    Ok(0)
}

const CHECKS: [&str; 7] = ["T", "T-characteristic", "S", "S-signature-phase", "elliptic", "vigneras", "example"];

fn cmd_verify(c: &Common, checks: &str, floor: f64) -> CliResult<u8> {
    let origin = c.origin();
    let names: Vec<String> = checks.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    if names.is_empty() {
        return Err(Failure::new("--checks", Error::Validation("no checks given".into())));
    }
    if let Some(bad) = names.iter().find(|n| !CHECKS.contains(&n.as_str())) {
        return Err(Failure::new(
            "--checks",
            Error::Validation(format!("unknown check {bad:?}; known: {}", CHECKS.join(","))),
        ));
    }
    if !(floor >= 0.0) {
        return Err(Failure::new("--floor", Error::Validation("must be non-negative".into())));
    }
    let p = c.problem()?;
    singular_check(&p, &origin)?;
    let mut reports = Vec::new();
    for n in &names {
        match verify::run_checks(&p, std::slice::from_ref(n), &p.policy, floor) {
            Ok(mut r) => reports.append(&mut r),
            // a transformed point may hit the singular set even when the input point does not
            Err(e) => reports.push(CheckReport::new(n, vec![f64::INFINITY], floor, vec![format!("error: {e}")])),
        }
    }
    let passed = reports.iter().all(|r| r.passed);
    c.emit(&render::json(&json!({ "passed": passed, "checks": reports })))?;
    Ok(if passed { 0 } else { 1 })
}

fn cmd_dump_weil(c: &Common) -> CliResult<u8> {
    let l = c.problem_spec()?.lattice().map_err(|e| Failure::new(c.origin(), e))?;
    let w = build_weil(&l);
    let reps: Vec<Vec<String>> = w.disc.coset_reps.iter().map(|g| g.iter().map(fmt_q).collect()).collect();
    let orders: Vec<String> = w.disc.orders.iter().map(|o| o.to_string()).collect();
    let out = json!({
        "discriminant_group": { "coset_reps": reps, "orders": orders },
        "rho_T": complex_vec(&w.rho_t),
        "rho_S": w.rho_s.iter().map(|r| complex_vec(r)).collect::<Vec<_>>(),
        "sigma_L": [w.sigma_l.re, w.sigma_l.im],
        "unitarity_defect": { "T": w.unitarity_defect_t(), "S": w.unitarity_defect_s() },
    });
    c.emit(&render::json(&out))?;
    Ok(0)
}

fn init_threads() -> CliResult<()> {
    if let Ok(s) = std::env::var("INDEFTHETA_THREADS") {
        let n: usize = s
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::new("INDEFTHETA_THREADS", Error::Validation(format!("{s:?} is not a positive integer"))))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::new("INDEFTHETA_THREADS", Error::Validation(e.to_string())))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<u8> {
    init_threads()?;
    match &cli.cmd {
        Cmd::Eval(c) => cmd_eval(c),
        Cmd::Gerf { common, grid } => cmd_gerf(common, grid),
        Cmd::Verify { common, checks, floor } => cmd_verify(common, checks, *floor),
        Cmd::DumpWeil(c) => cmd_dump_weil(c),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}: {}", f.source, f.err);
            ExitCode::from(f.code())
        }
    }
}
