//! Closed-LOCC protocols: local unitaries, local complete dephasing, and
//! sending dephased subsystems. Execution keeps an entropy ledger.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enttools::{relative_entropy_of_entanglement, ER_TOL};
use crate::error::{Error, Result};
use crate::measure::{dephase, BlochBasis, LocalBasis};
use crate::qmat::{
    embed_operator, partial_trace, permute_factors, unitarity_deviation, von_neumann_entropy,
    CMatrix, DensityMatrix,
};

/// Entropy changes below this magnitude are numerical noise.
pub const LEDGER_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub enum CloccStep {
    /// `unitary` acts on `factors` (ascending, all owned by `party`).
    LocalUnitary {
        party: String,
        factors: Vec<usize>,
        unitary: CMatrix,
    },
    /// Complete dephasing of each listed factor in its basis.
    Dephase {
        party: String,
        bases: Vec<LocalBasis>,
    },
    /// Ownership transfer; the factors must already be dephased in their
    /// channel basis or the executor dephases them first.
    Send {
        from: String,
        to: String,
        factors: Vec<usize>,
    },
}

impl CloccStep {
    fn party(&self) -> &str {
        match self {
            CloccStep::LocalUnitary { party, .. } | CloccStep::Dephase { party, .. } => party,
            CloccStep::Send { from, .. } => from,
        }
    }

    fn factors(&self) -> Vec<usize> {
        match self {
            CloccStep::LocalUnitary { factors, .. } | CloccStep::Send { factors, .. } => {
                factors.clone()
            }
            CloccStep::Dephase { bases, .. } => bases.iter().map(LocalBasis::factor).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CloccProtocol {
    /// Initial owner of every factor.
    pub parties: BTreeMap<String, Vec<usize>>,
    pub steps: Vec<CloccStep>,
}

/// Default party names `A, B, C, …` for factors `0, 1, 2, …`.
pub fn party_name(factor: usize) -> String {
    if factor < 26 {
        ((b'A' + factor as u8) as char).to_string()
    } else {
        format!("P{factor}")
    }
}

impl CloccProtocol {
    /// One party per factor, named `A, B, C, …`.
    pub fn one_party_per_factor(num_factors: usize, steps: Vec<CloccStep>) -> Self {
        Self {
            parties: (0..num_factors).map(|f| (party_name(f), vec![f])).collect(),
            steps,
        }
    }

    fn owners(&self, num_factors: usize) -> Result<Vec<String>> {
        let mut owner: Vec<Option<String>> = vec![None; num_factors];
        for (party, factors) in &self.parties {
            for &f in factors {
                if f >= num_factors {
                    return Err(Error::InvalidFactor {
                        index: f,
                        count: num_factors,
                    });
                }
                if owner[f].replace(party.clone()).is_some() {
                    return Err(Error::Ownership(format!("factor {f} has two owners")));
                }
            }
        }
        owner
            .into_iter()
            .enumerate()
            .map(|(f, o)| o.ok_or_else(|| Error::Ownership(format!("factor {f} has no owner"))))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub step: usize,
    pub kind: String,
    pub party: String,
    pub factors: Vec<usize>,
    /// Dephasing added by the executor ahead of a send.
    pub auto_inserted: bool,
    pub entropy_after: f64,
    pub delta_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyLedger {
    pub initial_entropy: f64,
    pub entries: Vec<LedgerEntry>,
    pub cumulative_delta_s: f64,
    pub final_ownership: BTreeMap<String, Vec<usize>>,
    pub final_local_entropies: BTreeMap<String, f64>,
    /// `N - Σ_party S(ρ_party)`; parties holding nothing contribute 0.
    pub localized_information: f64,
}

/// Per-factor execution state: owner and the basis the factor was last dephased in.
struct Tracker {
    owner: Vec<String>,
    channel: Vec<CMatrix>,
}

fn check_owned(tracker: &Tracker, party: &str, factors: &[usize]) -> Result<()> {
    for &f in factors {
        let Some(owner) = tracker.owner.get(f) else {
            return Err(Error::InvalidFactor {
                index: f,
                count: tracker.owner.len(),
            });
        };
        if owner != party {
            return Err(Error::Ownership(format!(
                "{party} acts on factor {f} held by {owner}"
            )));
        }
    }
    Ok(())
}

fn is_dephased(rho: &DensityMatrix, basis: &LocalBasis) -> Result<bool> {
    Ok(dephase(rho, basis)?.max_abs_diff(rho) <= LEDGER_TOL)
}

fn ownership_map(owner: &[String], parties: impl Iterator<Item = String>) -> BTreeMap<String, Vec<usize>> {
    let mut map: BTreeMap<String, Vec<usize>> = parties.map(|p| (p, Vec::new())).collect();
    for (f, o) in owner.iter().enumerate() {
        map.entry(o.clone()).or_default().push(f);
    }
    map
}

fn local_entropies(rho: &DensityMatrix, map: &BTreeMap<String, Vec<usize>>) -> Result<BTreeMap<String, f64>> {
    map.iter()
        .map(|(p, fs)| {
            let s = if fs.is_empty() {
                0.0
            } else {
                von_neumann_entropy(&partial_trace(rho, fs)?)
            };
            Ok((p.clone(), s))
        })
        .collect()
}

/// Runs the protocol step by step.
///
/// A send carries factors through a dephasing channel in the basis the factor
/// was last dephased in (computational initially; local unitaries rotate it).
/// If the factor is not diagonal in that basis, a dephasing step is inserted
/// and charged to the sender.
pub fn execute(rho: &DensityMatrix, protocol: &CloccProtocol) -> Result<(DensityMatrix, EntropyLedger)> {
    execute_with(rho, protocol, |_, _| Ok(()))
}

fn execute_with<F>(
    rho: &DensityMatrix,
    protocol: &CloccProtocol,
    mut after_step: F,
) -> Result<(DensityMatrix, EntropyLedger)>
where
    F: FnMut(&DensityMatrix, &Tracker) -> Result<()>,
{
    let dims = rho.dims().to_vec();
    let mut tracker = Tracker {
        owner: protocol.owners(dims.len())?,
        channel: dims.iter().map(|&d| CMatrix::identity(d, d)).collect(),
    };
    let initial = von_neumann_entropy(rho);
    let mut state = rho.clone();
    let mut entropy = initial;
    let mut entries = Vec::new();
    after_step(&state, &tracker)?;

    let record = |state: &DensityMatrix,
                      entropy: &mut f64,
                      entries: &mut Vec<LedgerEntry>,
                      step: usize,
                      kind: &str,
                      party: &str,
                      factors: Vec<usize>,
                      auto: bool|
     -> Result<()> {
        let s = von_neumann_entropy(state);
        let delta = s - *entropy;
        if delta < -LEDGER_TOL {
            return Err(Error::PostCheck(format!(
                "step {step} ({kind}) lowered the entropy by {}",
                -delta
            )));
        }
        *entropy = s;
        entries.push(LedgerEntry {
            step,
            kind: kind.to_string(),
            party: party.to_string(),
            factors,
            auto_inserted: auto,
            entropy_after: s,
            delta_s: delta,
        });
        Ok(())
    };

    for (k, step) in protocol.steps.iter().enumerate() {
        check_owned(&tracker, step.party(), &step.factors())?;
        match step {
            CloccStep::LocalUnitary { factors, unitary, .. } => {
                let mut sorted = factors.clone();
                sorted.sort_unstable();
                if sorted != *factors {
                    return Err(Error::InvalidParameter("unitary factors must be ascending".into()));
                }
                let side: usize = factors.iter().map(|&f| dims[f]).product();
                if unitary.nrows() != side || unitarity_deviation(unitary) > 1e-10 {
                    return Err(Error::DimensionMismatch(format!(
                        "unitary of size {} for factors {factors:?}",
                        unitary.nrows()
                    )));
                }
                let w = embed_operator(&dims, factors, unitary)?;
                state = state.conjugate(&w)?;
                if let [f] = factors[..] {
                    tracker.channel[f] = unitary * &tracker.channel[f];
                } else {
                    // a joint unitary leaves no product channel frame
                    for &f in factors {
                        tracker.channel[f] = CMatrix::identity(dims[f], dims[f]);
                    }
                }
                record(&state, &mut entropy, &mut entries, k, "unitary", step.party(), factors.clone(), false)?;
            }
            CloccStep::Dephase { bases, .. } => {
                for b in bases {
                    state = dephase(&state, b)?;
                    tracker.channel[b.factor()] = b.vectors().clone();
                }
                record(&state, &mut entropy, &mut entries, k, "dephase", step.party(), step.factors(), false)?;
            }
            CloccStep::Send { from, to, factors } => {
                let mut missing = Vec::new();
                for &f in factors {
                    let basis = LocalBasis::new(f, tracker.channel[f].clone())?;
                    if !is_dephased(&state, &basis)? {
                        missing.push(basis);
                    }
                }
                if !missing.is_empty() {
                    let fs = missing.iter().map(LocalBasis::factor).collect();
                    for b in &missing {
                        state = dephase(&state, b)?;
                    }
                    record(&state, &mut entropy, &mut entries, k, "dephase", from, fs, true)?;
                }
                for &f in factors {
                    tracker.owner[f] = to.clone();
                }
                record(&state, &mut entropy, &mut entries, k, "send", from, factors.clone(), false)?;
            }
        }
        after_step(&state, &tracker)?;
    }

    let parties = protocol
        .parties
        .keys()
        .cloned()
        .chain(protocol.steps.iter().filter_map(|s| match s {
            CloccStep::Send { to, .. } => Some(to.clone()),
            _ => None,
        }));
    let final_ownership = ownership_map(&tracker.owner, parties);
    let final_local_entropies = local_entropies(&state, &final_ownership)?;
    let n_bits = (state.dim() as f64).log2();
    let localized = n_bits - final_local_entropies.values().sum::<f64>();
    let ledger = EntropyLedger {
        initial_entropy: initial,
        cumulative_delta_s: entropy - initial,
        entries,
        final_ownership,
        final_local_entropies,
        localized_information: localized,
    };
    Ok((state, ledger))
}

/// `f = E_r + S` at one stage of a protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FStage {
    /// `None` for the initial state, else the step index.
    pub step: Option<usize>,
    pub entropy: f64,
    /// Across the current two-party split; `None` when the split is not 2⊗2 or 2⊗3.
    pub e_r: Option<f64>,
    pub f: Option<f64>,
}

/// `E_r` across the current ownership split, when the holders form a single
/// party (`0`) or a 2⊗2 / 2⊗3 pair.
fn stage_er(rho: &DensityMatrix, owner: &[String]) -> Result<Option<f64>> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (f, o) in owner.iter().enumerate() {
        groups.entry(o.as_str()).or_default().push(f);
    }
    match groups.len() {
        1 => Ok(Some(0.0)),
        2 => {
            let sides: Vec<&Vec<usize>> = groups.values().collect();
            let order: Vec<usize> = sides[0].iter().chain(sides[1].iter()).copied().collect();
            let dims = rho.dims();
            let da: usize = sides[0].iter().map(|&f| dims[f]).product();
            let db: usize = sides[1].iter().map(|&f| dims[f]).product();
            if !matches!((da, db), (2, 2) | (2, 3) | (3, 2)) {
                return Ok(None);
            }
            let p = permute_factors(rho, &order)?;
            let merged = DensityMatrix::from_parts_unchecked(vec![da, db], p.matrix().clone());
            Ok(Some(relative_entropy_of_entanglement(&merged)?.value))
        }
        _ => Ok(None),
    }
}

/// Evaluates `f = E_r + S` after every step and checks it never decreases
/// by more than `ER_TOL` across the stages where `E_r` is available.
pub fn verify_f_monotone(rho: &DensityMatrix, protocol: &CloccProtocol) -> Result<Vec<FStage>> {
    let mut stages: Vec<FStage> = Vec::new();
    execute_with(rho, protocol, |state, tracker| {
        let e_r = stage_er(state, &tracker.owner)?;
        let entropy = von_neumann_entropy(state);
        stages.push(FStage {
            step: stages.len().checked_sub(1),
            entropy,
            e_r,
            f: e_r.map(|e| e + entropy),
        });
        Ok(())
    })?;
    let mut last: Option<f64> = None;
    for st in &stages {
        if let Some(f) = st.f {
            if let Some(prev) = last {
                if f < prev - ER_TOL {
                    return Err(Error::PostCheck(format!(
                        "f dropped from {prev} to {f} at step {:?}",
                        st.step
                    )));
                }
            }
            last = Some(f);
        }
    }
    Ok(stages)
}

/// Protocol-space resolution for [`brute_force_deficit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BruteForceConfig {
    /// Grid points per angle at every zoom level.
    pub points: usize,
    /// Number of zoom levels; each shrinks the window around the best cell.
    pub levels: usize,
    /// 1: single-round protocols; 2: also both parties dephasing before one sends.
    pub depth: usize,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        Self {
            points: 16,
            levels: 8,
            depth: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BruteForceResult {
    /// Smallest entropy production found.
    pub value: f64,
    pub protocol: CloccProtocol,
    pub evaluated: usize,
}

fn bloch(factor: usize, angles: &[f64]) -> LocalBasis {
    BlochBasis::new(angles[0], angles[1]).to_local(factor)
}

/// Two-qubit protocols parameterized by Bloch angles, two per dephasing.
fn protocol_family(kind: usize, x: &[f64]) -> CloccProtocol {
    let (a, b) = ("A".to_string(), "B".to_string());
    let steps = match kind {
        // A dephases and sends to B
        0 => vec![
            CloccStep::Dephase { party: a.clone(), bases: vec![bloch(0, &x[0..2])] },
            CloccStep::Send { from: a, to: b, factors: vec![0] },
        ],
        1 => vec![
            CloccStep::Dephase { party: b.clone(), bases: vec![bloch(1, &x[0..2])] },
            CloccStep::Send { from: b, to: a, factors: vec![1] },
        ],
        // A dephases, then B dephases, then A sends
        2 => vec![
            CloccStep::Dephase { party: a.clone(), bases: vec![bloch(0, &x[0..2])] },
            CloccStep::Dephase { party: b.clone(), bases: vec![bloch(1, &x[2..4])] },
            CloccStep::Send { from: a, to: b, factors: vec![0] },
        ],
        _ => vec![
            CloccStep::Dephase { party: b.clone(), bases: vec![bloch(1, &x[0..2])] },
            CloccStep::Dephase { party: a.clone(), bases: vec![bloch(0, &x[2..4])] },
            CloccStep::Send { from: b, to: a, factors: vec![1] },
        ],
    };
    CloccProtocol::one_party_per_factor(2, steps)
}

/// Zooming grid over one protocol family: `(best ΔS, kind, angles, evaluations)`.
fn search_family(rho: &DensityMatrix, kind: usize, config: &BruteForceConfig) -> Result<(f64, usize, Vec<f64>, usize)> {
    let mut evaluated = 0usize;
    let n_angles = if kind < 2 { 2 } else { 4 };
    // coarser grid for the 4-angle families keeps the count bounded
    let points = if n_angles == 2 { config.points } else { config.points.div_ceil(2).max(3) };
    let mut lo: Vec<f64> = (0..n_angles).map(|_| 0.0).collect();
    let mut hi: Vec<f64> = (0..n_angles).map(|i| if i % 2 == 0 { PI } else { 2.0 * PI }).collect();
    let mut kind_best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..config.levels {
        let axes: Vec<Vec<f64>> = (0..n_angles)
            .map(|i| {
                (0..points)
                    .map(|k| lo[i] + (hi[i] - lo[i]) * k as f64 / (points - 1) as f64)
                    .collect()
            })
            .collect();
        let total = points.pow(n_angles as u32);
        for idx in 0..total {
            let mut rem = idx;
            let x: Vec<f64> = axes
                .iter()
                .map(|ax| {
                    let v = ax[rem % points];
                    rem /= points;
                    v
                })
                .collect();
            let (_, ledger) = execute(rho, &protocol_family(kind, &x))?;
            evaluated += 1;
            let v = ledger.cumulative_delta_s;
            if kind_best.as_ref().is_none_or(|(b, _)| v < *b) {
                kind_best = Some((v, x));
            }
        }
        let (_, center) = kind_best.as_ref().expect("grid nonempty");
        for i in 0..n_angles {
            let half = (hi[i] - lo[i]) / (points - 1) as f64 * 1.5;
            lo[i] = center[i] - half;
            hi[i] = center[i] + half;
        }
    }
    let (v, x) = kind_best.expect("grid nonempty");
    Ok((v, kind, x, evaluated))
}

/// Independent oracle for the two-qubit deficit: minimum entropy production
/// over enumerated protocols, each run through [`execute`], found by a
/// zooming grid over the dephasing angles.
pub fn brute_force_deficit(rho: &DensityMatrix, config: &BruteForceConfig) -> Result<BruteForceResult> {
    if rho.dims() != [2, 2] {
        return Err(Error::UnsupportedDimension(format!(
            "brute-force deficit needs two qubits, got {:?}",
            rho.dims()
        )));
    }
    if config.points < 3 || config.levels == 0 || !(1..=2).contains(&config.depth) {
        return Err(Error::InvalidParameter(format!("brute-force config {config:?}")));
    }
    let kinds: &[usize] = if config.depth == 1 { &[0, 1] } else { &[0, 1, 2, 3] };
    // families are independent; the reduction keeps family order on ties
    let per_family: Vec<(f64, usize, Vec<f64>, usize)> = kinds
        .par_iter()
        .map(|&kind| search_family(rho, kind, config))
        .collect::<Result<_>>()?;
    let evaluated = per_family.iter().map(|f| f.3).sum();
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    for (v, kind, x, _) in per_family {
        if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
            best = Some((v, kind, x));
        }
    }
    let (value, kind, x) = best.expect("at least one family");
    Ok(BruteForceResult {
        value,
        protocol: protocol_family(kind, &x),
        evaluated,
    })
}

/// JSON protocol step: `{kind, party, to?, factors, angles?, unitary?}`.
/// `angles` holds one angle list per factor (Bloch `[θ, φ]` for qubits,
/// Givens angles otherwise); omitted angles mean the computational basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub kind: String,
    pub party: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<String>,
    pub factors: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<Vec<f64>>>,
    /// Row-major real and imaginary parts of an explicit unitary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<MatrixRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixRecord {
    fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.re.len();
        if self.im.len() != n || self.re.iter().chain(&self.im).any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch("unitary re/im must be square and equal size".into()));
        }
        Ok(CMatrix::from_fn(n, n, |i, j| crate::qmat::c(self.re[i][j], self.im[i][j])))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parties: Option<BTreeMap<String, Vec<usize>>>,
    pub steps: Vec<StepRecord>,
}

impl ProtocolFile {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::InvalidParameter(format!("protocol JSON: {e}")))
    }

    /// Builds the protocol against a state with factor dimensions `dims`.
    pub fn to_protocol(&self, dims: &[usize]) -> Result<CloccProtocol> {
        let mut steps = Vec::with_capacity(self.steps.len());
        let local = |factors: &[usize], angles: &Option<Vec<Vec<f64>>>| -> Result<Vec<LocalBasis>> {
            factors
                .iter()
                .enumerate()
                .map(|(k, &f)| {
                    let d = *dims.get(f).ok_or(Error::InvalidFactor { index: f, count: dims.len() })?;
                    match angles.as_ref().and_then(|a| a.get(k)) {
                        Some(a) => LocalBasis::from_angles(f, d, a),
                        None => Ok(LocalBasis::computational(f, d)),
                    }
                })
                .collect()
        };
        for rec in &self.steps {
            let step = match rec.kind.as_str() {
                "dephase" => CloccStep::Dephase {
                    party: rec.party.clone(),
                    bases: local(&rec.factors, &rec.angles)?,
                },
                "send" => CloccStep::Send {
                    from: rec.party.clone(),
                    to: rec
                        .to
                        .clone()
                        .ok_or_else(|| Error::InvalidParameter("send step needs `to`".into()))?,
                    factors: rec.factors.clone(),
                },
                "unitary" => {
                    let unitary = match (&rec.unitary, &rec.angles) {
                        (Some(m), _) => m.to_matrix()?,
                        (None, Some(_)) => {
                            let bases = local(&rec.factors, &rec.angles)?;
                            let mut u = bases[0].vectors().clone();
                            for b in &bases[1..] {
                                u = u.kronecker(b.vectors());
                            }
                            u
                        }
                        (None, None) => {
                            return Err(Error::InvalidParameter(
                                "unitary step needs `unitary` or `angles`".into(),
                            ))
                        }
                    };
                    CloccStep::LocalUnitary {
                        party: rec.party.clone(),
                        factors: rec.factors.clone(),
                        unitary,
                    }
                }
                other => {
                    return Err(Error::InvalidParameter(format!("unknown step kind `{other}`")))
                }
            };
            steps.push(step);
        }
        let parties = match &self.parties {
            Some(p) => p.clone(),
            None => (0..dims.len()).map(|f| (party_name(f), vec![f])).collect(),
        };
        Ok(CloccProtocol { parties, steps })
    }
}
