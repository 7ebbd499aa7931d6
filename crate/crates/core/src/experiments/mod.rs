//! Experiment specs, the replicate scheduler and the CSV / JSON-lines writers.
//!
//! A spec is a `key = value` text file, `#` starting a comment. Lists are
//! comma separated. Every spec names a `kind` and carries a `seed` (or gets
//! one from the command line); the remaining keys depend on the kind:
//!
//! | kind | keys |
//! |---|---|
//! | `lambda_c_bisect` | `n`, `replicates`, `lo`, `hi`, `tol` |
//! | `crossing_curve` | `n`, `lambda` (list), `replicates` |
//! | `noise_curve` | `n`, `lambda`, `epsilon` (list), `replicates`, `mode`, `p` |
//! | `variance_across_B` | `n` (list), `p`, `lambda`, `outer`, `inner` |
//! | `revealment_scan` | `n` (list), `p`, `lambda`, `replicates`, `seeds` |
//! | `one_arm_scan` | `ell` (list), `p`, `lambda`, `replicates`, `seeds` |
//! | `ns_exponent_sweep` | `alpha` (list), `n` (list), `lambda`, `replicates` |
//! | `discretization_check` | `a`, `b`, `delta`, `p`, `lambda`, `replicates` |
//! | `oracle_suite` | none |
//!
//! `lambda = auto` replaces the intensity by a bisection estimate, tuned by
//! `lambda_n`, `lambda_replicates`, `lo`, `hi` and `tol`.

mod estimators;
mod oracle_suite;
mod stats;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::{Map, Value};

pub use estimators::*;
pub use oracle_suite::{oracle_suite, OracleCheck};
pub use stats::*;

use crate::discretize::{coupled_crossing_compare, Lattice};
use crate::error::{Error, Result};
use crate::sampling::RngStream;

/// Sub-stream tag reserved for `lambda = auto`.
const LAMBDA_TAG: u64 = 0xA0;
/// Sub-stream tag of the experiment proper.
const RUN_TAG: u64 = 0xB0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentKind {
    LambdaCBisect,
    CrossingCurve,
    NoiseCurve,
    VarianceAcrossB,
    RevealmentScan,
    OneArmScan,
    NsExponentSweep,
    DiscretizationCheck,
    OracleSuite,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::LambdaCBisect,
        ExperimentKind::CrossingCurve,
        ExperimentKind::NoiseCurve,
        ExperimentKind::VarianceAcrossB,
        ExperimentKind::RevealmentScan,
        ExperimentKind::OneArmScan,
        ExperimentKind::NsExponentSweep,
        ExperimentKind::DiscretizationCheck,
        ExperimentKind::OracleSuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::LambdaCBisect => "lambda_c_bisect",
            ExperimentKind::CrossingCurve => "crossing_curve",
            ExperimentKind::NoiseCurve => "noise_curve",
            ExperimentKind::VarianceAcrossB => "variance_across_B",
            ExperimentKind::RevealmentScan => "revealment_scan",
            ExperimentKind::OneArmScan => "one_arm_scan",
            ExperimentKind::NsExponentSweep => "ns_exponent_sweep",
            ExperimentKind::DiscretizationCheck => "discretization_check",
            ExperimentKind::OracleSuite => "oracle_suite",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::LambdaCBisect => &["n", "replicates", "lo", "hi", "tol"],
            ExperimentKind::CrossingCurve => &["n", "lambda", "replicates"],
            ExperimentKind::NoiseCurve => &["n", "lambda", "epsilon", "replicates", "mode", "p"],
            ExperimentKind::VarianceAcrossB => &["n", "p", "lambda", "outer", "inner"],
            ExperimentKind::RevealmentScan => &["n", "p", "lambda", "replicates", "seeds"],
            ExperimentKind::OneArmScan => &["ell", "p", "lambda", "replicates", "seeds"],
            ExperimentKind::NsExponentSweep => &["alpha", "n", "lambda", "replicates"],
            ExperimentKind::DiscretizationCheck => &["a", "b", "delta", "p", "lambda", "replicates"],
            ExperimentKind::OracleSuite => &[],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown experiment kind {s:?}")))
    }
}

const AUTO_KEYS: [&str; 5] = ["lambda_n", "lambda_replicates", "lo", "hi", "tol"];

/// Parsed but not yet validated spec.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub seed: Option<u64>,
    values: BTreeMap<String, (usize, String)>,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, seed: Option<u64>) -> Self {
        ExperimentSpec {
            kind,
            seed,
            values: BTreeMap::new(),
        }
    }

    /// Sets `key = value` as if read from a file.
    pub fn with(mut self, key: &str, value: &str) -> Self {
        self.values.insert(key.to_string(), (0, value.to_string()));
        self
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::read(text.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(BufReader::new(file))
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut kind = None;
        let mut seed = None;
        let mut values = BTreeMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::io("<spec>", e))?;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("expected `key = value`, got {body:?}"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let parse_err = |msg: String| Error::Parse { line: line_no, msg };
            match key {
                "kind" => kind = Some(value.parse::<ExperimentKind>().map_err(|e| parse_err(e.to_string()))?),
                "seed" => {
                    seed = Some(value.parse::<u64>().map_err(|_| parse_err(format!("bad seed {value:?}")))?)
                }
                _ => {
                    if values.insert(key.to_string(), (line_no, value.to_string())).is_some() {
                        return Err(parse_err(format!("duplicate key {key:?}")));
                    }
                }
            }
        }
        let kind = kind.ok_or_else(|| Error::Parse {
            line: 0,
            msg: "missing `kind`".into(),
        })?;
        Ok(ExperimentSpec { kind, seed, values })
    }

    fn raw(&self, key: &str) -> Result<&(usize, String)> {
        self.values
            .get(key)
            .ok_or_else(|| Error::invalid(format!("{} needs `{key}`", self.kind)))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<T> {
        let (line, v) = self.raw(key)?;
        v.parse().map_err(|_| Error::Parse {
            line: *line,
            msg: format!("cannot read `{key}` from {v:?}"),
        })
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        if self.values.contains_key(key) {
            self.get(key)
        } else {
            Ok(default)
        }
    }

    fn list(&self, key: &str) -> Result<Vec<f64>> {
        let (line, v) = self.raw(key)?;
        let out = v
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Parse {
                line: *line,
                msg: format!("cannot read `{key}` as a list of numbers: {v:?}"),
            })?;
        if out.is_empty() {
            return Err(Error::invalid(format!("`{key}` is empty")));
        }
        Ok(out)
    }

    fn lambda(&self) -> Result<Intensity> {
        match self.raw("lambda")?.1.as_str() {
            "auto" => Ok(Intensity::Auto(AutoLambda {
                n: self.get_or("lambda_n", 20.0)?,
                replicates: self.get_or("lambda_replicates", 2000)?,
                lo: self.get_or("lo", 0.05)?,
                hi: self.get_or("hi", 1.5)?,
                tol: self.get_or("tol", 1e-4)?,
            })),
            _ => Ok(Intensity::Fixed(self.get("lambda")?)),
        }
    }

    /// Typed, validated parameters; fails before any sampling.
    pub fn plan(&self, seed_override: Option<u64>) -> Result<Plan> {
        let seed = seed_override
            .or(self.seed)
            .ok_or_else(|| Error::invalid("a seed is required (spec `seed` or --seed)"))?;
        let auto = self.values.get("lambda").is_some_and(|(_, v)| v == "auto");
        for key in self.values.keys() {
            let allowed = self.kind.keys().contains(&key.as_str()) || (auto && AUTO_KEYS.contains(&key.as_str()));
            if !allowed {
                let (line, _) = self.values[key];
                return Err(Error::Parse {
                    line,
                    msg: format!("key `{key}` is not used by {}", self.kind),
                });
            }
        }
        let job = match self.kind {
            ExperimentKind::LambdaCBisect => Job::LambdaC {
                n: self.get("n")?,
                replicates: self.get("replicates")?,
                lo: self.get_or("lo", 0.05)?,
                hi: self.get_or("hi", 1.5)?,
                tol: self.get_or("tol", 1e-4)?,
            },
            ExperimentKind::CrossingCurve => Job::CrossingCurve {
                n: self.get("n")?,
                lambdas: self.list("lambda")?,
                replicates: self.get("replicates")?,
            },
            ExperimentKind::NoiseCurve => {
                let mode = match self.get_or("mode", "continuum".to_string())?.as_str() {
                    "continuum" => NoiseMode::Continuum,
                    "two_stage" => NoiseMode::TwoStage { p: self.get("p")? },
                    other => return Err(Error::invalid(format!("unknown mode {other:?}"))),
                };
                Job::NoiseCurve {
                    n: self.get("n")?,
                    lambda: self.lambda()?,
                    epsilons: self.list("epsilon")?,
                    replicates: self.get("replicates")?,
                    mode,
                }
            }
            ExperimentKind::VarianceAcrossB => Job::VarianceAcrossB {
                n_grid: self.list("n")?,
                p: self.get("p")?,
                lambda: self.lambda()?,
                outer: self.get("outer")?,
                inner: self.get("inner")?,
            },
            ExperimentKind::RevealmentScan => Job::Revealment {
                n_grid: self.list("n")?,
                p: self.get("p")?,
                lambda: self.lambda()?,
                replicates: self.get("replicates")?,
                seeds: self.get("seeds")?,
            },
            ExperimentKind::OneArmScan => Job::OneArm {
                ells: self.list("ell")?,
                p: self.get("p")?,
                lambda: self.lambda()?,
                replicates: self.get("replicates")?,
                seeds: self.get("seeds")?,
            },
            ExperimentKind::NsExponentSweep => Job::NsSweep {
                alphas: self.list("alpha")?,
                n_grid: self.list("n")?,
                lambda: self.lambda()?,
                replicates: self.get("replicates")?,
            },
            ExperimentKind::DiscretizationCheck => Job::Discretization {
                a: self.get("a")?,
                b: self.get("b")?,
                delta: self.get("delta")?,
                p: self.get("p")?,
                lambda: self.lambda()?,
                replicates: self.get("replicates")?,
            },
            ExperimentKind::OracleSuite => Job::OracleSuite,
        };
        let plan = Plan { kind: self.kind, seed, job };
        plan.validate()?;
        Ok(plan)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AutoLambda {
    pub n: f64,
    pub replicates: usize,
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Intensity {
    Fixed(f64),
    Auto(AutoLambda),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Job {
    LambdaC { n: f64, replicates: usize, lo: f64, hi: f64, tol: f64 },
    CrossingCurve { n: f64, lambdas: Vec<f64>, replicates: usize },
    NoiseCurve { n: f64, lambda: Intensity, epsilons: Vec<f64>, replicates: usize, mode: NoiseMode },
    VarianceAcrossB { n_grid: Vec<f64>, p: f64, lambda: Intensity, outer: usize, inner: usize },
    Revealment { n_grid: Vec<f64>, p: f64, lambda: Intensity, replicates: usize, seeds: usize },
    OneArm { ells: Vec<f64>, p: f64, lambda: Intensity, replicates: usize, seeds: usize },
    NsSweep { alphas: Vec<f64>, n_grid: Vec<f64>, lambda: Intensity, replicates: usize },
    Discretization { a: f64, b: f64, delta: f64, p: f64, lambda: Intensity, replicates: usize },
    OracleSuite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub job: Job,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("`{name}` must be positive, got {v}")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<()> {
    if v >= min {
        Ok(())
    } else {
        Err(Error::invalid(format!("`{name}` must be at least {min}, got {v}")))
    }
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("`{name}` must lie in (0, 1), got {v}")))
    }
}

fn density(v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("`p` must lie in (0, 1], got {v}")))
    }
}

impl Intensity {
    fn validate(&self) -> Result<()> {
        match *self {
            Intensity::Fixed(l) => positive("lambda", l),
            Intensity::Auto(a) => {
                positive("lambda_n", a.n)?;
                at_least("lambda_replicates", a.replicates, 1)?;
                positive("lo", a.lo)?;
                positive("tol", a.tol)?;
                if a.hi <= a.lo {
                    return Err(Error::invalid("`hi` must exceed `lo`"));
                }
                Ok(())
            }
        }
    }

    fn resolve(&self, seed: u64) -> Result<f64> {
        match *self {
            Intensity::Fixed(l) => Ok(l),
            Intensity::Auto(a) => {
                let stream = RngStream::new(seed, 0).child(LAMBDA_TAG);
                Ok(estimate_lambda_c(a.n, a.replicates, (a.lo, a.hi), a.tol, stream)?.lambda)
            }
        }
    }
}

impl Plan {
    fn validate(&self) -> Result<()> {
        let grid = |name: &str, v: &[f64]| v.iter().try_for_each(|&x| positive(name, x));
        match &self.job {
            Job::LambdaC { n, replicates, lo, hi, tol } => {
                positive("n", *n)?;
                at_least("replicates", *replicates, 1)?;
                Intensity::Auto(AutoLambda { n: *n, replicates: *replicates, lo: *lo, hi: *hi, tol: *tol }).validate()
            }
            Job::CrossingCurve { n, lambdas, replicates } => {
                positive("n", *n)?;
                grid("lambda", lambdas)?;
                at_least("replicates", *replicates, 1)
            }
            Job::NoiseCurve { n, lambda, epsilons, replicates, mode } => {
                positive("n", *n)?;
                lambda.validate()?;
                at_least("replicates", *replicates, 1)?;
                for &e in epsilons {
                    if !(0.0..=1.0).contains(&e) {
                        return Err(Error::invalid(format!("`epsilon` must lie in [0, 1], got {e}")));
                    }
                    if let NoiseMode::TwoStage { p } = mode {
                        open_unit("p", *p)?;
                        crate::noise::epsilon_prime(e, *p)?;
                    }
                }
                Ok(())
            }
            Job::VarianceAcrossB { n_grid, p, lambda, outer, inner } => {
                grid("n", n_grid)?;
                density(*p)?;
                lambda.validate()?;
                at_least("outer", *outer, 2)?;
                at_least("inner", *inner, 2)
            }
            Job::Revealment { n_grid, p, lambda, replicates, seeds } | Job::OneArm { ells: n_grid, p, lambda, replicates, seeds } => {
                grid("n", n_grid)?;
                density(*p)?;
                lambda.validate()?;
                at_least("replicates", *replicates, 1)?;
                at_least("seeds", *seeds, 1)
            }
            Job::NsSweep { alphas, n_grid, lambda, replicates } => {
                grid("n", n_grid)?;
                if alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
                    return Err(Error::invalid("`alpha` values must be non-negative"));
                }
                lambda.validate()?;
                at_least("replicates", *replicates, 1)
            }
            Job::Discretization { a, b, delta, p, lambda, replicates } => {
                Lattice::new(*a, *b, *delta)?;
                density(*p)?;
                lambda.validate()?;
                at_least("replicates", *replicates, 1)
            }
            Job::OracleSuite => Ok(()),
        }
    }
}

/// One output cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}
impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}
impl From<&f64> for Cell {
    fn from(v: &f64) -> Self {
        Cell::Float(*v)
    }
}
impl From<&usize> for Cell {
    fn from(v: &usize) -> Self {
        Cell::Int(*v as i64)
    }
}
impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}
impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => u8::from(*b).to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

/// A result table; the seed column is added on output.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, seed: u64, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "seed,{}", self.header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(out, "{seed},{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, seed: u64, out: &mut W) -> std::io::Result<()> {
        for row in &self.rows {
            let mut obj = Map::new();
            obj.insert("seed".into(), Value::from(seed));
            for (k, c) in self.header.iter().zip(row) {
                obj.insert(k.clone(), c.json());
            }
            writeln!(out, "{}", Value::Object(obj))?;
        }
        Ok(())
    }
}

const ESTIMATE_COLS: [&str; 4] = ["estimate", "stderr", "ci_low", "ci_high"];

fn estimate_cells(e: &Estimate) -> [Cell; 5] {
    [e.estimate.into(), e.stderr.into(), e.ci_low.into(), e.ci_high.into(), e.replicates.into()]
}

fn header_with_estimate(prefix: &[&str], name: &str) -> Vec<String> {
    let mut h: Vec<String> = prefix.iter().map(|s| s.to_string()).collect();
    h.extend(ESTIMATE_COLS.iter().map(|c| format!("{name}_{c}")));
    h.push("replicates".into());
    h
}

/// Results of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub table: Table,
    /// `false` only when an oracle check failed.
    pub passed: bool,
}

impl RunOutput {
    pub fn csv_name(&self) -> String {
        format!("{}.csv", self.kind)
    }

    pub fn jsonl_name(&self) -> String {
        format!("{}.jsonl", self.kind)
    }

    /// Writes `<kind>.csv` and `<kind>.jsonl` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv = dir.join(self.csv_name());
        let jsonl = dir.join(self.jsonl_name());
        let mut buf = Vec::new();
        self.table.write_csv(self.seed, &mut buf).expect("write to memory");
        fs::write(&csv, &buf).map_err(|e| Error::io(&csv, e))?;
        buf.clear();
        self.table.write_jsonl(self.seed, &mut buf).expect("write to memory");
        fs::write(&jsonl, &buf).map_err(|e| Error::io(&jsonl, e))?;
        Ok(vec![csv, jsonl])
    }
}

/// Executes a validated plan on the current rayon pool.
pub fn execute(plan: &Plan) -> Result<RunOutput> {
    let stream = RngStream::new(plan.seed, 0).child(RUN_TAG);
    let mut passed = true;
    let table = match &plan.job {
        Job::LambdaC { n, replicates, lo, hi, tol } => {
            let est = estimate_lambda_c(*n, *replicates, (*lo, *hi), *tol, stream)?;
            let mut t = Table::new(&["n", "lambda_c", "ci_low", "ci_high", "replicates", "lo", "hi", "probes"]);
            t.push(vec![
                est.n.into(),
                est.lambda.into(),
                est.ci_low.into(),
                est.ci_high.into(),
                est.replicates.into(),
                lo.into(),
                hi.into(),
                est.probes.len().into(),
            ]);
            t
        }
        Job::CrossingCurve { n, lambdas, replicates } => {
            let mut t = Table {
                header: header_with_estimate(&["n", "lambda"], "crossing"),
                rows: Vec::new(),
            };
            for (l, e) in crossing_curve(*n, lambdas, *replicates, stream)? {
                let mut row = vec![n.into(), l.into()];
                row.extend(estimate_cells(&e));
                t.push(row);
            }
            t
        }
        Job::NoiseCurve { n, lambda, epsilons, replicates, mode } => {
            let lambda = lambda.resolve(plan.seed)?;
            let mut header = header_with_estimate(&["n", "lambda", "epsilon", "mode"], "covariance");
            header.extend(["crossing_estimate", "mean_size_before", "mean_size_after", "mean_common"].map(String::from));
            let mut t = Table { header, rows: Vec::new() };
            let mode_name = match mode {
                NoiseMode::Continuum => "continuum",
                NoiseMode::TwoStage { .. } => "two_stage",
            };
            for (k, &eps) in epsilons.iter().enumerate() {
                let e = noise_covariance(*n, lambda, eps, *replicates, *mode, stream.child(k as u64))?;
                let mut row = vec![n.into(), lambda.into(), eps.into(), mode_name.into()];
                row.extend(estimate_cells(&e.covariance));
                row.extend([
                    e.crossing.estimate.into(),
                    e.size_before.estimate.into(),
                    e.size_after.estimate.into(),
                    e.common.estimate.into(),
                ]);
                t.push(row);
            }
            t
        }
        Job::VarianceAcrossB { n_grid, p, lambda, outer, inner } => {
            let lambda = lambda.resolve(plan.seed)?;
            let mut header = header_with_estimate(&["n", "p", "lambda", "outer", "inner"], "variance");
            header.extend(["raw_variance", "mean_probability"].map(String::from));
            let mut t = Table { header, rows: Vec::new() };
            for (k, &n) in n_grid.iter().enumerate() {
                let v = variance_across_b(n, *p, lambda, *outer, *inner, stream.child(k as u64))?;
                let mut row = vec![n.into(), p.into(), lambda.into(), outer.into(), inner.into()];
                row.extend(estimate_cells(&v.variance));
                row.extend([v.raw_variance.into(), v.mean_probability.estimate.into()]);
                t.push(row);
            }
            t
        }
        Job::Revealment { n_grid, p, lambda, replicates, seeds } => {
            let lambda = lambda.resolve(plan.seed)?;
            let rows = revealment_scan(n_grid, *p, lambda / p, *replicates, *seeds, stream)?;
            let mut t = Table::new(&["n", "p", "lambda", "seed_index", "b_points", "region_points", "max_revealment", "replicates"]);
            for r in rows {
                t.push(vec![
                    r.n.into(),
                    p.into(),
                    lambda.into(),
                    r.seed_index.into(),
                    r.b_points.into(),
                    r.region_points.into(),
                    r.max_revealment.into(),
                    replicates.into(),
                ]);
            }
            t
        }
        Job::OneArm { ells, p, lambda, replicates, seeds } => {
            let lambda = lambda.resolve(plan.seed)?;
            let mut t = Table {
                header: header_with_estimate(&["ell", "p", "lambda", "seed_index"], "one_arm"),
                rows: Vec::new(),
            };
            for r in one_arm_scan(ells, *p, lambda, *replicates, *seeds, stream)? {
                let mut row = vec![r.ell.into(), p.into(), lambda.into(), r.seed_index.into()];
                row.extend(estimate_cells(&r.probability));
                t.push(row);
            }
            t
        }
        Job::NsSweep { alphas, n_grid, lambda, replicates } => {
            let lambda = lambda.resolve(plan.seed)?;
            let (rows, summary) = ns_exponent_sweep(alphas, n_grid, lambda, *replicates, stream)?;
            let mut header = header_with_estimate(&["alpha", "n", "epsilon", "lambda"], "covariance");
            header.push("consistent_with_decay".into());
            let mut t = Table { header, rows: Vec::new() };
            for r in rows {
                let flag = summary.iter().find(|s| s.alpha == r.alpha).is_some_and(|s| s.consistent_with_decay);
                let mut row = vec![r.alpha.into(), r.n.into(), r.epsilon.into(), lambda.into()];
                row.extend(estimate_cells(&r.covariance));
                row.push(flag.into());
                t.push(row);
            }
            t
        }
        Job::Discretization { a, b, delta, p, lambda, replicates } => {
            let lambda = lambda.resolve(plan.seed)?;
            let lattice = Lattice::new(*a, *b, *delta)?;
            let r = coupled_crossing_compare(lambda, *p, &lattice, *replicates, stream)?;
            let mut t = Table::new(&[
                "a", "b", "delta", "p", "lambda", "q", "replicates", "disagreements", "bad_events", "shared_cell",
                "near_tangent", "near_boundary", "unexplained_disagreements", "graph_mismatches", "bad_event_rate",
                "sqrt_delta",
            ]);
            t.push(vec![
                a.into(),
                b.into(),
                delta.into(),
                p.into(),
                lambda.into(),
                r.q.into(),
                r.replicates.into(),
                r.disagreements.into(),
                r.bad_events.into(),
                r.shared_cell.into(),
                r.near_tangent.into(),
                r.near_boundary.into(),
                r.unexplained_disagreements.into(),
                r.graph_mismatches.into(),
                r.bad_event_rate().into(),
                delta.sqrt().into(),
            ]);
            t
        }
        Job::OracleSuite => {
            let checks = oracle_suite(plan.seed)?;
            let mut t = Table::new(&["check", "module", "cases", "failures", "passed"]);
            for c in &checks {
                passed &= c.passed();
                t.push(vec![c.name.into(), c.module.into(), c.cases.into(), c.failures.into(), c.passed().into()]);
            }
            t
        }
    };
    Ok(RunOutput {
        kind: plan.kind,
        seed: plan.seed,
        table,
        passed,
    })
}

/// Runs `plan` on a dedicated pool of `threads` workers (0 = rayon default).
pub fn execute_with_threads(plan: &Plan, threads: usize) -> Result<RunOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("cannot build thread pool: {e}")))?;
    pool.install(|| execute(plan))
}

/// Validates `spec`, runs it and writes the tables into `out_dir`.
pub fn run(spec: &ExperimentSpec, seed: Option<u64>, threads: usize, out_dir: &Path) -> Result<RunOutput> {
    let plan = spec.plan(seed)?;
    let out = execute_with_threads(&plan, threads)?;
    out.write(out_dir)?;
    Ok(out)
}
