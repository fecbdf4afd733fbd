//! Seeded Monte Carlo scans over two-qubit states with deterministic CSV output.
//!
//! Sample `i` of a random scan draws from stream `i` of the scan seed, so
//! rows are independent of thread count and scheduling.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deficits::{twoqubit_deficit, zeroway_deficit};
use crate::enttools::relative_entropy_of_entanglement;
use crate::error::{Error, Result};
use crate::measure::OptimizerConfig;
use crate::qmat::DensityMatrix;
use crate::states::{isotropic, random_state, RngSeed};

pub const CSV_HEADER: &str =
    "id,seed,I_M,Delta_zeroway,Delta_oneway,Delta_twoqubit,Delta_c,E_r,E_r_flag,runtime_ms";

/// How the `E_r` column was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErFlag {
    /// PPT state, `E_r = 0` exactly.
    Exact,
    /// Separable-ansatz minimum; an upper bound on `E_r`.
    Bound,
    /// Ansatz restarts disagreed; still an upper bound.
    Unconverged,
    /// Not computed; the column is empty.
    Skipped,
}

impl ErFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            ErFlag::Exact => "exact",
            ErFlag::Bound => "bound",
            ErFlag::Unconverged => "unconverged",
            ErFlag::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub id: String,
    pub seed: u64,
    pub i_m: f64,
    pub delta_zeroway: f64,
    /// A→B direction.
    pub delta_oneway: f64,
    pub delta_twoqubit: f64,
    pub delta_c: f64,
    pub e_r: Option<f64>,
    pub e_r_flag: ErFlag,
    /// Zero unless timing was requested, so default output is byte-stable.
    pub runtime_ms: f64,
}

impl ScanRecord {
    pub fn csv_line(&self) -> String {
        let e_r = self.e_r.map(format_sig).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.id,
            self.seed,
            format_sig(self.i_m),
            format_sig(self.delta_zeroway),
            format_sig(self.delta_oneway),
            format_sig(self.delta_twoqubit),
            format_sig(self.delta_c),
            e_r,
            self.e_r_flag.as_str(),
            format_sig(self.runtime_ms),
        )
    }
}

/// Plain decimal with 12 significant digits; `-0` prints as `0`.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    // rounding can carry into the next decade
    let exp = if (x.abs() / 10f64.powi(exp)) >= 9.999_999_999_995 { exp + 1 } else { exp };
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// Hilbert–Schmidt random two-qubit states.
    Random { n: usize },
    /// Two-qubit isotropic states at the listed weights.
    Isotropic { lambdas: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    pub family: Family,
    pub seed: u64,
    pub optimizer: OptimizerConfig,
    pub with_er: bool,
    pub timing: bool,
    /// `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl ScanOptions {
    pub fn random(n: usize, seed: u64) -> Self {
        Self {
            family: Family::Random { n },
            seed,
            optimizer: OptimizerConfig::default(),
            with_er: true,
            timing: false,
            threads: None,
        }
    }
}

/// Parses `start:stop:step` (inclusive of `stop` up to rounding).
pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidParameter(format!("range `{spec}`: {e}")))?;
    let [start, stop, step] = parts[..] else {
        return Err(Error::InvalidParameter(format!("range `{spec}` is not start:stop:step")));
    };
    if !(step > 0.0) || stop < start {
        return Err(Error::InvalidParameter(format!("range `{spec}` is empty")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| start + step * k as f64).collect())
}

pub fn evaluate(id: String, seed: u64, rho: &DensityMatrix, opts: &ScanOptions) -> Result<ScanRecord> {
    let start = Instant::now();
    let zero = zeroway_deficit(rho, &opts.optimizer)?;
    let two = twoqubit_deficit(rho, &opts.optimizer)?;
    let companion = |name: &str| {
        two.companions.get(name).copied().ok_or_else(|| {
            Error::PostCheck(format!("two-qubit report lacks companion {name}"))
        })
    };
    let (e_r, e_r_flag) = if opts.with_er {
        let est = relative_entropy_of_entanglement(rho)?;
        let flag = match (est.ppt, est.converged) {
            (true, _) => ErFlag::Exact,
            (false, true) => ErFlag::Bound,
            (false, false) => ErFlag::Unconverged,
        };
        (Some(est.value), flag)
    } else {
        (None, ErFlag::Skipped)
    };
    let runtime_ms = if opts.timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
    Ok(ScanRecord {
        id,
        seed,
        i_m: companion("I_M")?,
        delta_zeroway: zero.value,
        delta_oneway: companion("Delta_oneway_AB")?,
        delta_twoqubit: two.value,
        delta_c: companion("Delta_c")?,
        e_r,
        e_r_flag,
        runtime_ms,
    })
}

fn run_all(opts: &ScanOptions) -> Result<Vec<ScanRecord>> {
    match &opts.family {
        Family::Random { n } => (0..*n as u64)
            .into_par_iter()
            .map(|i| {
                let rho = random_state(&[2, 2], RngSeed::new(opts.seed, i));
                evaluate(format!("rand-{i}"), opts.seed, &rho, opts)
            })
            .collect(),
        Family::Isotropic { lambdas } => lambdas
            .par_iter()
            .enumerate()
            .map(|(i, &l)| {
                let rho = isotropic(l, 2)?;
                evaluate(format!("iso-{i}"), opts.seed, &rho, opts)
            })
            .collect(),
    }
}

/// Evaluates every sample; output order is sample order.
pub fn run(opts: &ScanOptions) -> Result<Vec<ScanRecord>> {
    match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(|| run_all(opts)),
        None => run_all(opts),
    }
}

pub fn write_csv<W: Write>(out: &mut W, records: &[ScanRecord]) -> std::io::Result<()> {
    let mut buf = String::with_capacity(64 * (records.len() + 1));
    buf.push_str(CSV_HEADER);
    buf.push('\n');
    for r in records {
        let _ = writeln!(buf, "{}", r.csv_line());
    }
    out.write_all(buf.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub count: usize,
    /// `max(Δ∅ - I_M)`; `-inf` for an empty scan.
    pub max_excess: f64,
    /// Share of samples with `Δ∅ > 0.95·I_M` among those with `I_M > 1e-9`.
    pub near_saturation_fraction: f64,
    pub max_ratio: f64,
}

pub fn summarize(records: &[ScanRecord]) -> ScanSummary {
    let max_excess = records
        .iter()
        .map(|r| r.delta_zeroway - r.i_m)
        .fold(f64::NEG_INFINITY, f64::max);
    let correlated: Vec<&ScanRecord> = records.iter().filter(|r| r.i_m > 1e-9).collect();
    let near = correlated
        .iter()
        .filter(|r| r.delta_zeroway > 0.95 * r.i_m)
        .count();
    let max_ratio = correlated
        .iter()
        .map(|r| r.delta_zeroway / r.i_m)
        .fold(0.0, f64::max);
    ScanSummary {
        count: records.len(),
        max_excess,
        near_saturation_fraction: if correlated.is_empty() {
            0.0
        } else {
            near as f64 / correlated.len() as f64
        },
        max_ratio,
    }
}

impl std::fmt::Display for ScanSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "samples {} max(Delta_zeroway - I_M) {} fraction(Delta_zeroway > 0.95 I_M) {} max ratio {}",
            self.count,
            format_sig(self.max_excess),
            format_sig(self.near_saturation_fraction),
            format_sig(self.max_ratio)
        )
    }
}

/// Upper envelope of the scatter: the largest `Δ∅` among samples with
/// `I_M ≤ x`, or `None` below the smallest sampled `I_M`.
pub fn envelope_at(records: &[ScanRecord], x: f64) -> Option<f64> {
    records
        .iter()
        .filter(|r| r.i_m <= x)
        .map(|r| r.delta_zeroway)
        .reduce(f64::max)
}
