//! Information deficits and their classical counterparts.
//!
//! Optimizer-based quantities minimize (or maximize) over projective local
//! bases with [`crate::measure`]; closed forms are provided for the named
//! families and double as oracles in the tests.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{
    conditional_entropy_terms, condition, optimize_product_bases, optimize_single_basis,
    product_distribution, BasisOptimum, BlochBasis, Goal, LocalBasis, OptimizerConfig, Seeds,
    NULL_OUTCOME,
};
use crate::optim::{nelder_mead, SimplexOptions};
use crate::qmat::{
    binary_entropy_clamped, c, partial_trace, shannon_entropy, von_neumann_entropy, CMatrix,
    DensityMatrix, PureState,
};
use crate::states::{acin_state, aharonov, ghz, AcinParams, BellWeights};

/// Tolerance for the identities asserted as post-checks.
pub const IDENTITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Quantity {
    I,
    #[serde(rename = "I_LO")]
    ILocal,
    #[serde(rename = "I_l_oneway")]
    IlOneway,
    #[serde(rename = "I_l_zeroway")]
    IlZeroway,
    #[serde(rename = "I_l")]
    Il,
    #[serde(rename = "Delta_oneway")]
    DeltaOneway,
    #[serde(rename = "Delta_zeroway")]
    DeltaZeroway,
    #[serde(rename = "Delta_twoqubit")]
    DeltaTwoqubit,
    #[serde(rename = "Delta")]
    Delta,
    #[serde(rename = "Delta_c")]
    DeltaC,
    #[serde(rename = "Delta_cl_oneway")]
    DeltaClOneway,
    #[serde(rename = "C_HV")]
    CHv,
    #[serde(rename = "C_zero")]
    CZero,
    #[serde(rename = "I_M")]
    IM,
    #[serde(rename = "discord")]
    Discord,
    #[serde(rename = "E_r")]
    Er,
    #[serde(rename = "E_r_pc")]
    ErPc,
}

impl Quantity {
    pub const ALL: [Quantity; 17] = [
        Quantity::I,
        Quantity::ILocal,
        Quantity::IlOneway,
        Quantity::IlZeroway,
        Quantity::Il,
        Quantity::DeltaOneway,
        Quantity::DeltaZeroway,
        Quantity::DeltaTwoqubit,
        Quantity::Delta,
        Quantity::DeltaC,
        Quantity::DeltaClOneway,
        Quantity::CHv,
        Quantity::CZero,
        Quantity::IM,
        Quantity::Discord,
        Quantity::Er,
        Quantity::ErPc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::I => "I",
            Quantity::ILocal => "I_LO",
            Quantity::IlOneway => "I_l_oneway",
            Quantity::IlZeroway => "I_l_zeroway",
            Quantity::Il => "I_l",
            Quantity::DeltaOneway => "Delta_oneway",
            Quantity::DeltaZeroway => "Delta_zeroway",
            Quantity::DeltaTwoqubit => "Delta_twoqubit",
            Quantity::Delta => "Delta",
            Quantity::DeltaC => "Delta_c",
            Quantity::DeltaClOneway => "Delta_cl_oneway",
            Quantity::CHv => "C_HV",
            Quantity::CZero => "C_zero",
            Quantity::IM => "I_M",
            Quantity::Discord => "discord",
            Quantity::Er => "E_r",
            Quantity::ErPc => "E_r_pc",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .iter()
            .copied()
            .find(|q| q.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown quantity `{s}`")))
    }
}

/// Which party measures (and sends) in a one-way protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Direction {
    #[default]
    #[serde(rename = "A->B")]
    AToB,
    #[serde(rename = "B->A")]
    BToA,
}

impl Direction {
    pub fn sender(self) -> usize {
        match self {
            Direction::AToB => 0,
            Direction::BToA => 1,
        }
    }

    pub fn receiver(self) -> usize {
        1 - self.sender()
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A->B" | "AB" | "A" => Ok(Direction::AToB),
            "B->A" | "BA" | "B" => Ok(Direction::BToA),
            _ => Err(Error::InvalidParameter(format!("unknown direction `{s}`"))),
        }
    }
}

/// How a reported value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Closed form or finite formula with no optimization.
    Exact,
    /// Extremum found by the basis optimizer.
    Optimizer,
    /// Rigorous upper or lower bound; see `bound`.
    Bound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Upper,
    Lower,
}

/// Serializable record of a local basis; columns of `re + i im` are the kets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisRecord {
    pub factor: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bloch: Option<BlochBasis>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&LocalBasis> for BasisRecord {
    fn from(b: &LocalBasis) -> Self {
        let v = b.vectors();
        let d = b.dim();
        Self {
            factor: b.factor(),
            bloch: (d == 2).then(|| BlochBasis::from_vector(&b.vector(0))),
            re: (0..d).map(|i| (0..d).map(|j| v[(i, j)].re).collect()).collect(),
            im: (0..d).map(|i| (0..d).map(|j| v[(i, j)].im).collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub evaluations: usize,
    pub converged: bool,
    pub grid_value: f64,
    pub near_optimal_cells: usize,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub co_optimal: Vec<Vec<BasisRecord>>,
}

impl From<&BasisOptimum> for Diagnostics {
    fn from(o: &BasisOptimum) -> Self {
        Self {
            evaluations: o.evaluations,
            converged: o.converged,
            grid_value: o.grid_value,
            near_optimal_cells: o.near_optimal_cells,
            co_optimal: o
                .co_optimal
                .iter()
                .map(|bs| bs.iter().map(BasisRecord::from).collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficitReport {
    pub quantity: Quantity,
    pub value: f64,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound: Option<BoundKind>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub direction: Option<Direction>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub bases: Vec<BasisRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diagnostics: Option<Diagnostics>,
    /// Derived values (I, I_M, I_l, ...) keyed by quantity name.
    pub companions: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
}

impl DeficitReport {
    pub fn exact(quantity: Quantity, value: f64) -> Self {
        Self {
            quantity,
            value,
            provenance: Provenance::Exact,
            bound: None,
            direction: None,
            bases: Vec::new(),
            diagnostics: None,
            companions: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    fn optimized(quantity: Quantity, value: f64, opt: &BasisOptimum) -> Self {
        let mut r = Self::exact(quantity, value);
        r.provenance = Provenance::Optimizer;
        r.bases = opt.bases.iter().map(BasisRecord::from).collect();
        r.diagnostics = Some(Diagnostics::from(opt));
        if !opt.converged {
            r.warnings
                .push("refinement hit its iteration cap before the tolerance".into());
        }
        r
    }

    pub fn with_companion(mut self, name: &str, value: f64) -> Self {
        self.companions.insert(name.to_string(), value);
        self
    }

    pub fn converged(&self) -> bool {
        self.diagnostics.as_ref().is_none_or(|d| d.converged)
    }
}

fn require_bipartite(rho: &DensityMatrix) -> Result<()> {
    if rho.num_factors() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "expected a bipartite state, got {} factors",
            rho.num_factors()
        )));
    }
    Ok(())
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dims() != [2, 2] {
        return Err(Error::UnsupportedDimension(format!(
            "two-qubit quantity on dims {:?}",
            rho.dims()
        )));
    }
    Ok(())
}

fn marginal_entropies(rho: &DensityMatrix) -> Vec<f64> {
    (0..rho.num_factors())
        .map(|f| von_neumann_entropy(&partial_trace(rho, &[f]).expect("factor in range")))
        .collect()
}

/// `N = log2 d` for the whole system.
fn total_bits(rho: &DensityMatrix) -> f64 {
    (rho.dim() as f64).log2()
}

/// `I_M = S(ρ_A) + S(ρ_B) - S(ρ_AB)`.
pub fn mutual_information(rho: &DensityMatrix) -> Result<f64> {
    require_bipartite(rho)?;
    let m = marginal_entropies(rho);
    Ok(m[0] + m[1] - von_neumann_entropy(rho))
}

/// `I_LO = N - Σ_f S(ρ_f)`, every factor counted as one party.
pub fn local_information(rho: &DensityMatrix) -> f64 {
    total_bits(rho) - marginal_entropies(rho).iter().sum::<f64>()
}

/// Pauli-frame description `ρ = ¼(I + a·σ⊗I + I⊗b·σ + Σ T_ij σ_i⊗σ_j)` of a
/// two-qubit state; gives allocation-free objectives for qubit pairs.
#[derive(Debug, Clone, Copy)]
pub(crate) struct QubitPair {
    a: [f64; 3],
    b: [f64; 3],
    t: [[f64; 3]; 3],
}

fn pauli(k: usize) -> CMatrix {
    let z = c(0.0, 0.0);
    let o = c(1.0, 0.0);
    match k {
        0 => CMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        1 => CMatrix::from_row_slice(2, 2, &[z, c(0.0, -1.0), c(0.0, 1.0), z]),
        _ => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

fn dot(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

fn norm(u: &[f64; 3]) -> f64 {
    dot(u, u).sqrt()
}

/// Bloch vector of the first ket of a qubit basis.
pub(crate) fn bloch_vector(b: &LocalBasis) -> [f64; 3] {
    let x = b.vectors()[(0, 0)];
    let y = b.vectors()[(1, 0)];
    let xy = x.conj() * y;
    [2.0 * xy.re, 2.0 * xy.im, x.norm_sqr() - y.norm_sqr()]
}

/// Entropy of a qubit state with Bloch vector length `r`.
fn qubit_entropy(r: f64) -> f64 {
    binary_entropy_clamped((1.0 + r.min(1.0)) / 2.0)
}

impl QubitPair {
    pub(crate) fn new(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let id = CMatrix::identity(2, 2);
        let expect = |op: CMatrix| (m * op).trace().re;
        let mut q = QubitPair {
            a: [0.0; 3],
            b: [0.0; 3],
            t: [[0.0; 3]; 3],
        };
        for i in 0..3 {
            q.a[i] = expect(pauli(i).kronecker(&id));
            q.b[i] = expect(id.kronecker(&pauli(i)));
            for j in 0..3 {
                q.t[i][j] = expect(pauli(i).kronecker(&pauli(j)));
            }
        }
        q
    }

    /// Same state with the parties exchanged.
    pub(crate) fn swapped(&self) -> Self {
        let mut t = [[0.0; 3]; 3];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.t[j][i];
            }
        }
        QubitPair {
            a: self.b,
            b: self.a,
            t,
        }
    }

    /// `(p_±, |r_±|)`: outcome probabilities of measuring `±m` on A and the
    /// Bloch lengths of B's conditional states.
    fn conditionals(&self, m: &[f64; 3]) -> [(f64, f64); 2] {
        let am = dot(&self.a, m);
        let mut tm = [0.0; 3];
        for (j, v) in tm.iter_mut().enumerate() {
            *v = (0..3).map(|i| m[i] * self.t[i][j]).sum();
        }
        let mut out = [(0.0, 0.0); 2];
        for (k, s) in [1.0, -1.0].into_iter().enumerate() {
            let p = 0.5 * (1.0 + s * am);
            let r = if p > NULL_OUTCOME {
                let v = [
                    self.b[0] + s * tm[0],
                    self.b[1] + s * tm[1],
                    self.b[2] + s * tm[2],
                ];
                norm(&v) / (2.0 * p)
            } else {
                0.0
            };
            out[k] = (p.max(0.0), r);
        }
        out
    }

    /// `H(p) + Σ p_± S(ρ_B^±)` for a measurement on A along `m`.
    pub(crate) fn post_dephasing_entropy(&self, m: &[f64; 3]) -> f64 {
        let [(p0, r0), (p1, r1)] = self.conditionals(m);
        shannon_entropy(&[p0, p1]) + p0 * qubit_entropy(r0) + p1 * qubit_entropy(r1)
    }

    /// `S(ρ_B) - Σ p_± S(ρ_B^±)`.
    pub(crate) fn receiver_gain(&self, m: &[f64; 3]) -> f64 {
        let [(p0, r0), (p1, r1)] = self.conditionals(m);
        qubit_entropy(norm(&self.b)) - p0 * qubit_entropy(r0) - p1 * qubit_entropy(r1)
    }

    /// Joint distribution of measuring `±m` on A and `±n` on B.
    pub(crate) fn product_distribution(&self, m: &[f64; 3], n: &[f64; 3]) -> [f64; 4] {
        let am = dot(&self.a, m);
        let bn = dot(&self.b, n);
        let mut mtn = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                mtn += m[i] * self.t[i][j] * n[j];
            }
        }
        let p = |s: f64, t: f64| (0.25 * (1.0 + s * am + t * bn + s * t * mtn)).max(0.0);
        [p(1.0, 1.0), p(1.0, -1.0), p(-1.0, 1.0), p(-1.0, -1.0)]
    }
}

pub(crate) fn marginal_eigenbasis(rho: &DensityMatrix, factor: usize) -> LocalBasis {
    let m = partial_trace(rho, &[factor]).expect("factor in range");
    LocalBasis::eigenbasis(factor, m.matrix())
}

/// Minimizes `H(p) + Σ p_i S(ρ_i)` over bases on `sender`.
pub(crate) fn minimize_post_dephasing(
    rho: &DensityMatrix,
    sender: usize,
    config: &OptimizerConfig,
) -> Result<BasisOptimum> {
    let seeds = Seeds {
        bases: vec![
            vec![marginal_eigenbasis(rho, sender)],
            vec![LocalBasis::computational(sender, rho.dims()[sender])],
        ],
    };
    if rho.dims() == [2, 2] {
        let q = QubitPair::new(rho);
        let q = if sender == 0 { q } else { q.swapped() };
        optimize_single_basis(
            rho,
            sender,
            |b| q.post_dephasing_entropy(&bloch_vector(b)),
            Goal::Minimize,
            config,
            &seeds,
        )
    } else {
        optimize_single_basis(
            rho,
            sender,
            |b| conditional_entropy_terms(rho, b).0,
            Goal::Minimize,
            config,
            &seeds,
        )
    }
}

/// One-way deficit `Δ→ = min_{P} [H(p) + Σ p_i S(ρ_B^i)] - S(ρ_AB)`.
///
/// Companion `I_l_oneway = N - min_{P}[...]`.
pub fn oneway_deficit(
    rho: &DensityMatrix,
    direction: Direction,
    config: &OptimizerConfig,
) -> Result<DeficitReport> {
    require_bipartite(rho)?;
    let opt = minimize_post_dephasing(rho, direction.sender(), config)?;
    let s = von_neumann_entropy(rho);
    let mut r = DeficitReport::optimized(Quantity::DeltaOneway, opt.value - s, &opt)
        .with_companion("I_l_oneway", total_bits(rho) - opt.value)
        .with_companion("I", total_bits(rho) - s)
        .with_companion("S", s);
    r.direction = Some(direction);
    Ok(r)
}

/// Single-copy two-qubit deficit: the better of the two one-way directions.
pub fn twoqubit_deficit(rho: &DensityMatrix, config: &OptimizerConfig) -> Result<DeficitReport> {
    require_two_qubits(rho)?;
    let ab = oneway_deficit(rho, Direction::AToB, config)?;
    let ba = oneway_deficit(rho, Direction::BToA, config)?;
    let (va, vb) = (ab.value, ba.value);
    let mut best = if vb < va { ba } else { ab };
    best.quantity = Quantity::DeltaTwoqubit;
    let s = best.companions["S"];
    let i_l = total_bits(rho) - s - best.value;
    let im = mutual_information(rho)?;
    Ok(best
        .with_companion("Delta_oneway_AB", va)
        .with_companion("Delta_oneway_BA", vb)
        .with_companion("I_l", i_l)
        .with_companion("I_M", im)
        .with_companion("Delta_c", im - va.min(vb)))
}

/// Product-basis objectives for both factors of a bipartite state.
fn optimize_both<F>(
    rho: &DensityMatrix,
    objective: F,
    goal: Goal,
    config: &OptimizerConfig,
) -> Result<BasisOptimum>
where
    F: Fn(&[LocalBasis]) -> f64,
{
    let seeds = Seeds {
        bases: vec![
            vec![marginal_eigenbasis(rho, 0), marginal_eigenbasis(rho, 1)],
            vec![
                LocalBasis::computational(0, rho.dims()[0]),
                LocalBasis::computational(1, rho.dims()[1]),
            ],
        ],
    };
    optimize_product_bases(rho, &[0, 1], objective, goal, config, &seeds)
}

/// `S` of the doubly dephased state for every product basis pair.
fn minimize_double_dephasing(rho: &DensityMatrix, config: &OptimizerConfig) -> Result<BasisOptimum> {
    if rho.dims() == [2, 2] {
        let q = QubitPair::new(rho);
        optimize_both(
            rho,
            |b| shannon_entropy(&q.product_distribution(&bloch_vector(&b[0]), &bloch_vector(&b[1]))),
            Goal::Minimize,
            config,
        )
    } else {
        optimize_both(
            rho,
            |b| shannon_entropy(&product_distribution(rho, b).expect("bases match")),
            Goal::Minimize,
            config,
        )
    }
}

/// Zero-way deficit `Δ∅ = min_{P⊗Q} S(ρ'') - S(ρ)`, where `ρ''` is dephased on
/// both sides before any communication. The classical correlations left in `ρ''`
/// are then concentrated for free, so `I_l_zeroway = N - min S(ρ'')`.
pub fn zeroway_deficit(rho: &DensityMatrix, config: &OptimizerConfig) -> Result<DeficitReport> {
    require_bipartite(rho)?;
    let opt = minimize_double_dephasing(rho, config)?;
    let s = von_neumann_entropy(rho);
    Ok(DeficitReport::optimized(Quantity::DeltaZeroway, opt.value - s, &opt)
        .with_companion("I_l_zeroway", total_bits(rho) - opt.value)
        .with_companion("I", total_bits(rho) - s)
        .with_companion("S", s))
}

/// `Δ = 1 + H(p1 + p2) - S(ρ)` with `p1, p2` the two largest Bell weights.
pub fn bell_deficit_closed_form(w: &BellWeights) -> f64 {
    let mut p = w.weights();
    p.sort_by(|a, b| b.total_cmp(a));
    1.0 + binary_entropy_clamped(p[0] + p[1]) - shannon_entropy(&p)
}

/// `Δ∅ = 1 + H(p_max) - S(ρ)` with `p_max = (1 + max|t_ii|)/2`.
pub fn bell_zeroway_closed_form(w: &BellWeights) -> f64 {
    let t_max = w
        .correlations()
        .iter()
        .map(|t| t.abs())
        .fold(0.0, f64::max);
    1.0 + binary_entropy_clamped(0.5 * (1.0 + t_max)) - shannon_entropy(&w.weights())
}

/// `Δ→ = log2 d + S_cond - S(ρ_iso)`; `S_cond` is the entropy of Bob's
/// conditional state after Alice measures the computational basis.
pub fn isotropic_deficit(lambda: f64, d: usize) -> Result<f64> {
    crate::states::isotropic(lambda, d)?;
    let df = d as f64;
    let n = df * df;
    let top = lambda + (1.0 - lambda) / df;
    let rest = (1.0 - lambda) / df;
    let s_cond = shannon_entropy(&[top])
        + (d - 1) as f64 * shannon_entropy(&[rest]);
    let glob_top = lambda + (1.0 - lambda) / n;
    let glob_rest = (1.0 - lambda) / n;
    let s = shannon_entropy(&[glob_top]) + (n - 1.0) * shannon_entropy(&[glob_rest]);
    Ok(df.log2() + s_cond - s)
}

/// A pure state split into the factors in `cut` and the rest.
#[derive(Debug, Clone)]
pub struct PureDeficitInput {
    pub state: PureState,
    pub cut: Vec<usize>,
}

/// `Δ(|ψ⟩) = S(ρ_cut)`, the entanglement entropy across the cut.
pub fn pure_state_deficit(input: &PureDeficitInput) -> Result<f64> {
    let n = input.state.dims().len();
    let mut cut = input.cut.clone();
    cut.sort_unstable();
    cut.dedup();
    if cut.is_empty() || cut.len() >= n {
        return Err(Error::InvalidParameter(
            "cut must leave factors on both sides".into(),
        ));
    }
    if let Some(&f) = cut.iter().find(|&&f| f >= n) {
        return Err(Error::InvalidFactor { index: f, count: n });
    }
    Ok(von_neumann_entropy(&partial_trace(
        &input.state.to_density(),
        &cut,
    )?))
}

/// `(I, I_l, Δ)` for an `n`-party pure family, with how `I_l` was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultipartyQuantities {
    pub parties: usize,
    pub information: f64,
    pub localisable: f64,
    pub deficit: f64,
    /// `S(ρ_1)`: entropy of one party, a lower bound on `Δ` for pure states.
    pub single_party_entropy: f64,
    pub provenance: Provenance,
}

/// Shannon entropy of the computational-basis distribution of a pure state.
fn computational_shannon(psi: &PureState) -> f64 {
    let p: Vec<f64> = psi.amplitudes().iter().map(|a| a.norm_sqr()).collect();
    shannon_entropy(&p)
}

/// Reduced state of factor 0 of a pure state, computed without forming `|ψ⟩⟨ψ|`.
fn first_party_entropy(psi: &PureState) -> f64 {
    let d0 = psi.dims()[0];
    let rest = psi.amplitudes().len() / d0;
    let m = CMatrix::from_fn(d0, rest, |i, j| psi.amplitudes()[i * rest + j]);
    crate::qmat::matrix_entropy(&(&m * m.adjoint()))
}

/// Everyone dephases in the computational basis and sends to one party, whose
/// final entropy is the Shannon entropy of the amplitudes' moduli.
fn concentrate_computational(psi: &PureState) -> (f64, f64, f64) {
    let n_bits = (psi.amplitudes().len() as f64).log2();
    let produced = computational_shannon(psi);
    (n_bits, n_bits - produced, produced)
}

/// Generalized GHZ `Σ_k |k…k⟩/√n` on `n` parties of dimension `n`:
/// `I = n log2 n`, `I_l = (n-1) log2 n`, `Δ = log2 n`.
pub fn ghz_quantities(n: usize) -> Result<MultipartyQuantities> {
    if !(2..=7).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "GHZ quantities supported for 2 <= n <= 7, got {n}"
        )));
    }
    let psi = ghz(n, n)?;
    let (i, il, delta) = concentrate_computational(&psi);
    let s1 = first_party_entropy(&psi);
    Ok(MultipartyQuantities {
        parties: n,
        information: i,
        localisable: il,
        deficit: delta,
        single_party_entropy: s1,
        // the protocol meets the single-party lower bound Δ ≥ S(ρ_1)
        provenance: if (delta - s1).abs() < 1e-12 {
            Provenance::Exact
        } else {
            Provenance::Bound
        },
    })
}

/// Aharonov state on `n` parties. `I = n log2 n`; `I_l` is what the sequential
/// protocol (each party in turn dephases and passes everything on) actually
/// localizes, `n log2 n - log2 n!`, a lower bound on the optimum.
pub fn aharonov_quantities(n: usize) -> Result<MultipartyQuantities> {
    let psi = aharonov(n)?;
    let (i, il, delta) = concentrate_computational(&psi);
    let s1 = first_party_entropy(&psi);
    Ok(MultipartyQuantities {
        parties: n,
        information: i,
        localisable: il,
        deficit: delta,
        single_party_entropy: s1,
        provenance: if (delta - s1).abs() < 1e-12 {
            Provenance::Exact
        } else {
            Provenance::Bound
        },
    })
}

/// `I_l^{xy}` of the W state for Alice's basis with `|x|² = x2`.
pub fn w_localisable_closed_form(x2: f64) -> f64 {
    let x2 = x2.clamp(0.0, 1.0);
    let p1 = (1.0 + x2) / 3.0;
    let p2 = (2.0 - x2) / 3.0;
    let r1 = (-3.0 * x2 * x2 + 2.0 * x2 + 1.0).max(0.0).sqrt() / (2.0 + 2.0 * x2);
    let r2 = (4.0 * x2 - 3.0 * x2 * x2).max(0.0).sqrt() / (4.0 - 2.0 * x2);
    3.0 - binary_entropy_clamped(p1)
        - p1 * binary_entropy_clamped(0.5 + r1)
        - p2 * binary_entropy_clamped(0.5 + r2)
}

/// Local maxima of the W closed form over `x² ∈ [0, 1]`: `(x², value)` pairs
/// within `tol` of the global maximum.
pub fn w_closed_form_optima(tol: f64) -> Vec<(f64, f64)> {
    const N: usize = 2000;
    let f = |x: f64| w_localisable_closed_form(x);
    let vals: Vec<f64> = (0..=N).map(|k| f(k as f64 / N as f64)).collect();
    let opts = SimplexOptions {
        max_iterations: 500,
        value_tolerance: 1e-15,
        step_tolerance: 1e-10,
        initial_step: 0.5 / N as f64,
    };
    let mut optima: Vec<(f64, f64)> = Vec::new();
    for k in 0..=N {
        let left = if k == 0 { f64::NEG_INFINITY } else { vals[k - 1] };
        let right = if k == N { f64::NEG_INFINITY } else { vals[k + 1] };
        if vals[k] >= left && vals[k] > right {
            let r = nelder_mead(
                |x| -f(x[0].clamp(0.0, 1.0)),
                &[k as f64 / N as f64],
                &opts,
            );
            optima.push((r.x[0].clamp(0.0, 1.0), -r.value));
        }
    }
    let best = optima.iter().map(|o| o.1).fold(f64::NEG_INFINITY, f64::max);
    optima.retain(|o| best - o.1 <= tol);
    optima
}

/// Localisable information of a three-qubit state in the Acín form when Alice
/// measures first and Bob and Charlie then localize their conditional pure
/// state: `sup_{x,y} [3 - H(p) - p S(ρ_B^1) - (1-p) S(ρ_B^2)]`.
pub fn acin_localisable(p: &AcinParams, config: &OptimizerConfig) -> Result<DeficitReport> {
    let rho = acin_state(p).to_density();
    let objective = |b: &LocalBasis| -> f64 {
        let ens = condition(&rho, b).expect("basis on a qubit factor");
        let mut cost = shannon_entropy(&ens.probabilities());
        for o in &ens.outcomes {
            if let Some(s) = &o.state {
                // conditional BC state is pure: its deficit is S(ρ_B)
                cost += o.probability
                    * von_neumann_entropy(&partial_trace(s, &[0]).expect("two factors"));
            }
        }
        3.0 - cost
    };
    let seeds = Seeds {
        bases: vec![vec![LocalBasis::computational(0, 2)]],
    };
    let opt = optimize_single_basis(&rho, 0, objective, Goal::Maximize, config, &seeds)?;
    let x2 = BlochBasis::from_vector(&opt.bases[0].vector(0)).x_squared();
    let mut r = DeficitReport::optimized(Quantity::Il, opt.value, &opt)
        .with_companion("x_squared", x2)
        .with_companion("I", 3.0)
        .with_companion("Delta", 3.0 - opt.value);
    r.direction = Some(Direction::AToB);
    Ok(r)
}

/// W-state localisable information from the Acín optimizer, with the closed
/// form as an independent check. Companions list every optimal `x²` (of
/// `|e_1⟩`; the relabeled basis has `1 - x²`).
pub fn w_localisable(config: &OptimizerConfig) -> Result<DeficitReport> {
    let mut r = acin_localisable(&AcinParams::w_state(), config)?;
    let optima = w_closed_form_optima(1e-9);
    let closed = optima.iter().map(|o| o.1).fold(f64::NEG_INFINITY, f64::max);
    r = r.with_companion("closed_form_max", closed);
    for (k, (x2, _)) in optima.iter().enumerate() {
        r = r.with_companion(&format!("closed_form_x_squared_{k}"), *x2);
    }
    let mut optimizer_x2: Vec<f64> = Vec::new();
    for bases in r.diagnostics.iter().flat_map(|d| &d.co_optimal) {
        if let Some(bb) = bases[0].bloch {
            for x2 in [bb.x_squared(), 1.0 - bb.x_squared()] {
                if optimizer_x2.iter().all(|v| (v - x2).abs() > 1e-4) {
                    optimizer_x2.push(x2);
                }
            }
        }
    }
    optimizer_x2.sort_by(f64::total_cmp);
    for (k, x2) in optimizer_x2.iter().enumerate() {
        r = r.with_companion(&format!("optimizer_x_squared_{k}"), *x2);
    }
    if (closed - r.value).abs() > 1e-6 {
        r.warnings.push(format!(
            "closed form maximum {closed} differs from optimizer {}",
            r.value
        ));
    }
    Ok(r)
}

/// `Δ_c = I_l - I_LO`. For two qubits `I_l` is exact; otherwise the one-way
/// optimum gives a lower bound on `I_l` and hence on `Δ_c`.
pub fn classical_deficit(rho: &DensityMatrix, config: &OptimizerConfig) -> Result<DeficitReport> {
    require_bipartite(rho)?;
    let (delta, exact) = if rho.dims() == [2, 2] {
        (twoqubit_deficit(rho, config)?.value, true)
    } else {
        let ab = oneway_deficit(rho, Direction::AToB, config)?.value;
        let ba = oneway_deficit(rho, Direction::BToA, config)?.value;
        (ab.min(ba), false)
    };
    let s = von_neumann_entropy(rho);
    let i_l = total_bits(rho) - s - delta;
    let i_lo = local_information(rho);
    let dc = i_l - i_lo;
    let im = mutual_information(rho)?;
    if (dc + delta - im).abs() > IDENTITY_TOL {
        return Err(Error::PostCheck(format!(
            "Delta_c + Delta = {} but I_M = {im}",
            dc + delta
        )));
    }
    let mut r = DeficitReport::exact(Quantity::DeltaC, dc)
        .with_companion("I_l", i_l)
        .with_companion("I_LO", i_lo)
        .with_companion("Delta", delta)
        .with_companion("I_M", im);
    r.provenance = if exact {
        Provenance::Optimizer
    } else {
        r.bound = Some(BoundKind::Lower);
        Provenance::Bound
    };
    Ok(r)
}

/// `C_HV = max_{P} [S(ρ_B) - Σ p_i S(ρ_B^i)]` over projective bases of the sender.
pub fn henderson_vedral(
    rho: &DensityMatrix,
    direction: Direction,
    config: &OptimizerConfig,
) -> Result<DeficitReport> {
    require_bipartite(rho)?;
    let sender = direction.sender();
    let s_recv = von_neumann_entropy(&partial_trace(rho, &[direction.receiver()])?);
    let seeds = Seeds {
        bases: vec![
            vec![marginal_eigenbasis(rho, sender)],
            vec![LocalBasis::computational(sender, rho.dims()[sender])],
        ],
    };
    let opt = if rho.dims() == [2, 2] {
        let q = QubitPair::new(rho);
        let q = if sender == 0 { q } else { q.swapped() };
        optimize_single_basis(
            rho,
            sender,
            |b| q.receiver_gain(&bloch_vector(b)),
            Goal::Maximize,
            config,
            &seeds,
        )?
    } else {
        optimize_single_basis(
            rho,
            sender,
            |b| s_recv - conditional_entropy_terms(rho, b).2,
            Goal::Maximize,
            config,
            &seeds,
        )?
    };
    let mut r = DeficitReport::optimized(Quantity::CHv, opt.value, &opt);
    r.direction = Some(direction);
    Ok(r)
}

/// `Δ_cl→ = max_{P} [S(ρ_A) - S(ρ'_A)] + [S(ρ_B) - Σ p_i S(ρ_B^i)]`, which
/// equals `I_M - Δ→`. Checked against `Δ_cl→ ≤ C_HV`.
pub fn oneway_classical_deficit(
    rho: &DensityMatrix,
    direction: Direction,
    config: &OptimizerConfig,
) -> Result<DeficitReport> {
    require_bipartite(rho)?;
    let m = marginal_entropies(rho);
    let opt = minimize_post_dephasing(rho, direction.sender(), config)?;
    let value = m[0] + m[1] - opt.value;
    let hv = henderson_vedral(rho, direction, config)?;
    if value > hv.value + IDENTITY_TOL {
        return Err(Error::PostCheck(format!(
            "Delta_cl_oneway {value} exceeds C_HV {}",
            hv.value
        )));
    }
    let mut r = DeficitReport::optimized(Quantity::DeltaClOneway, value, &opt)
        .with_companion("C_HV", hv.value);
    r.direction = Some(direction);
    Ok(r)
}

/// `C∅ = max_{P⊗Q} I_M(ρ'')` over local complete dephasings of both sides.
pub fn zeroway_classical(rho: &DensityMatrix, config: &OptimizerConfig) -> Result<DeficitReport> {
    require_bipartite(rho)?;
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    let mutual = |p: &[f64]| -> f64 {
        let pa: Vec<f64> = (0..da).map(|i| (0..db).map(|j| p[i * db + j]).sum()).collect();
        let pb: Vec<f64> = (0..db).map(|j| (0..da).map(|i| p[i * db + j]).sum()).collect();
        shannon_entropy(&pa) + shannon_entropy(&pb) - shannon_entropy(p)
    };
    let opt = if rho.dims() == [2, 2] {
        let q = QubitPair::new(rho);
        optimize_both(
            rho,
            |b| mutual(&q.product_distribution(&bloch_vector(&b[0]), &bloch_vector(&b[1]))),
            Goal::Maximize,
            config,
        )?
    } else {
        optimize_both(
            rho,
            |b| mutual(&product_distribution(rho, b).expect("bases match")),
            Goal::Maximize,
            config,
        )?
    };
    Ok(DeficitReport::optimized(Quantity::CZero, opt.value, &opt))
}

/// Discord for a fixed measurement: `H(p) + Σ p_i S(ρ_i) - S(ρ_AB)`.
pub fn quantum_discord(rho: &DensityMatrix, measurement: &LocalBasis) -> Result<f64> {
    require_bipartite(rho)?;
    let ens = condition(rho, measurement)?;
    Ok(shannon_entropy(&ens.probabilities()) + ens.average_entropy() - von_neumann_entropy(rho))
}

/// Discord minimized over projective measurements on the sender. Evaluated
/// through [`quantum_discord`] rather than the fast qubit path, so it serves as
/// an independent check on [`oneway_deficit`].
pub fn min_discord(
    rho: &DensityMatrix,
    direction: Direction,
    config: &OptimizerConfig,
) -> Result<DeficitReport> {
    require_bipartite(rho)?;
    let sender = direction.sender();
    let seeds = Seeds {
        bases: vec![
            vec![marginal_eigenbasis(rho, sender)],
            vec![LocalBasis::computational(sender, rho.dims()[sender])],
        ],
    };
    let opt = optimize_single_basis(
        rho,
        sender,
        |b| quantum_discord(rho, b).expect("basis on the sender"),
        Goal::Minimize,
        config,
        &seeds,
    )?;
    let mut r = DeficitReport::optimized(Quantity::Discord, opt.value, &opt);
    r.direction = Some(direction);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{dephase, dephase_all, post_dephasing_entropy};
    use crate::qmat::information;
    use crate::states::{
        bb84_mixture, bell_mixture, isotropic, mfs_state, random_state, rho_cc, singlet, w_state,
        RngSeed,
    };
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn cfg() -> OptimizerConfig {
        OptimizerConfig::default()
    }

    fn product_pure() -> DensityMatrix {
        DensityMatrix::diagonal(vec![2, 2], &[0.0, 1.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn quantity_names_round_trip() {
        for q in Quantity::ALL {
            assert_eq!(q.name().parse::<Quantity>().unwrap(), q);
            let json = serde_json::to_string(&q).unwrap();
            assert_eq!(json, format!("\"{}\"", q.name()));
        }
        assert!("nonsense".parse::<Quantity>().is_err());
    }

    #[test]
    fn mutual_and_local_information() {
        let s = singlet().to_density();
        assert_abs_diff_eq!(mutual_information(&s).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(local_information(&s), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mutual_information(&product_pure()).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(local_information(&product_pure()), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(mutual_information(&mfs_state()).unwrap(), 0.5, epsilon = 1e-12);
        let mixed = DensityMatrix::maximally_mixed(vec![2, 2]);
        assert_abs_diff_eq!(local_information(&mixed), 0.0, epsilon = 1e-12);
        let tri = DensityMatrix::maximally_mixed(vec![2, 2, 2]);
        assert!(mutual_information(&tri).is_err());
    }

    #[test]
    fn qubit_pair_paths_match_generic_routes() {
        for s in 0..20 {
            let rho = random_state(&[2, 2], RngSeed::new(100, s));
            let q = QubitPair::new(&rho);
            let th = 0.3 + 0.13 * s as f64;
            let ph = 0.7 * s as f64;
            let ba = BlochBasis::new(th, ph).to_local(0);
            let bb = BlochBasis::new(PI - 0.5 * th, 2.0 * ph).to_local(1);
            assert_abs_diff_eq!(
                q.post_dephasing_entropy(&bloch_vector(&ba)),
                post_dephasing_entropy(&rho, &ba).unwrap(),
                epsilon = 1e-10
            );
            assert_abs_diff_eq!(
                q.swapped().post_dephasing_entropy(&bloch_vector(&bb)),
                post_dephasing_entropy(&rho, &bb).unwrap(),
                epsilon = 1e-10
            );
            let fast = q.product_distribution(&bloch_vector(&ba), &bloch_vector(&bb));
            let slow = product_distribution(&rho, &[ba.clone(), bb.clone()]).unwrap();
            for k in 0..4 {
                assert_abs_diff_eq!(fast[k], slow[k], epsilon = 1e-12);
            }
            let s_dd = von_neumann_entropy(&dephase_all(&rho, &[ba.clone(), bb]).unwrap());
            assert_abs_diff_eq!(shannon_entropy(&fast), s_dd, epsilon = 1e-9);
            let ens = condition(&rho, &ba).unwrap();
            let sb = von_neumann_entropy(&partial_trace(&rho, &[1]).unwrap());
            assert_abs_diff_eq!(
                q.receiver_gain(&bloch_vector(&ba)),
                sb - ens.average_entropy(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn singlet_deficits() {
        let s = singlet().to_density();
        let r = oneway_deficit(&s, Direction::AToB, &cfg()).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.companions["I_l_oneway"], 1.0, epsilon = 1e-9);
        let r = twoqubit_deficit(&s, &cfg()).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.companions["I_l"], 1.0, epsilon = 1e-9);
        let r = zeroway_deficit(&s, &cfg()).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.companions["I_l_zeroway"], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn mfs_deficits() {
        let rho = mfs_state();
        let r = oneway_deficit(&rho, Direction::AToB, &cfg()).unwrap();
        assert_abs_diff_eq!(r.companions["I_l_oneway"], 0.75 * 3f64.log2() - 1.0, epsilon = 1e-9);
        let theta = r.bases[0].bloch.unwrap().theta;
        assert_abs_diff_eq!(theta, PI / 2.0, epsilon = 1e-3);
        let r = twoqubit_deficit(&rho, &cfg()).unwrap();
        assert_abs_diff_eq!(r.value, 0.311278124459133, epsilon = 1e-9);
        assert_abs_diff_eq!(r.value, information(&rho) - r.companions["I_l"], epsilon = 1e-12);
    }

    #[test]
    fn classically_correlated_has_no_deficit() {
        let cc = rho_cc();
        assert_abs_diff_eq!(oneway_deficit(&cc, Direction::AToB, &cfg()).unwrap().value, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(zeroway_deficit(&cc, &cfg()).unwrap().value, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn bb84_has_zeroway_deficit() {
        let rho = bb84_mixture([0.4, 0.3, 0.2, 0.1]).unwrap();
        let r = zeroway_deficit(&rho, &cfg()).unwrap();
        assert!(r.value > 1e-3, "{}", r.value);
    }

    #[test]
    fn bell_closed_forms() {
        let w = |p| BellWeights::new(p).unwrap();
        assert_abs_diff_eq!(bell_deficit_closed_form(&w([0.0, 0.0, 0.0, 1.0])), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            bell_deficit_closed_form(&w([0.5, 0.25, 0.125, 0.125])),
            0.0612781244591,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            bell_deficit_closed_form(&w([0.7, 0.1, 0.1, 0.1])),
            0.365148445440,
            epsilon = 1e-11
        );
        assert_abs_diff_eq!(
            bell_zeroway_closed_form(&w([0.7, 0.1, 0.1, 0.1])),
            0.365148445440,
            epsilon = 1e-11
        );
        assert_abs_diff_eq!(bell_zeroway_closed_form(&w([0.0, 0.0, 0.0, 1.0])), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bell_zeroway_closed_form(&w([0.25; 4])), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bell_closed_forms_match_optimizers() {
        for s in 0..10 {
            let w = BellWeights::random(RngSeed::new(5, s));
            let rho = bell_mixture(&w);
            let two = twoqubit_deficit(&rho, &cfg()).unwrap().value;
            assert_abs_diff_eq!(two, bell_deficit_closed_form(&w), epsilon = 1e-6);
            let zero = zeroway_deficit(&rho, &cfg()).unwrap().value;
            assert_abs_diff_eq!(zero, bell_zeroway_closed_form(&w), epsilon = 1e-6);
        }
    }

    #[test]
    fn isotropic_formula() {
        assert_abs_diff_eq!(isotropic_deficit(1.0, 2).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(isotropic_deficit(1.0, 3).unwrap(), 3f64.log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(isotropic_deficit(0.0, 2).unwrap(), 0.0, epsilon = 1e-12);
        for &(l, d) in &[(0.5, 2), (0.3, 2), (0.6, 3)] {
            let rho = isotropic(l, d).unwrap();
            let r = oneway_deficit(&rho, Direction::AToB, &cfg()).unwrap();
            assert_abs_diff_eq!(r.value, isotropic_deficit(l, d).unwrap(), epsilon = 1e-6);
        }
        let rho = isotropic(0.5, 2).unwrap();
        let z = zeroway_deficit(&rho, &cfg()).unwrap().value;
        assert_abs_diff_eq!(z, isotropic_deficit(0.5, 2).unwrap(), epsilon = 1e-6);
        assert!(isotropic_deficit(1.5, 2).is_err());
    }

    #[test]
    fn pure_state_deficit_examples() {
        let input = |state: PureState, cut| PureDeficitInput { state, cut };
        assert_abs_diff_eq!(pure_state_deficit(&input(singlet(), vec![0])).unwrap(), 1.0, epsilon = 1e-12);
        let prod = PureState::basis(vec![2, 2], 1).unwrap();
        assert_abs_diff_eq!(pure_state_deficit(&input(prod, vec![1])).unwrap(), 0.0, epsilon = 1e-12);
        let g = ghz(3, 2).unwrap();
        assert_abs_diff_eq!(pure_state_deficit(&input(g.clone(), vec![0])).unwrap(), 1.0, epsilon = 1e-12);
        assert!(pure_state_deficit(&input(g.clone(), vec![])).is_err());
        assert!(pure_state_deficit(&input(g, vec![0, 1, 2])).is_err());
    }

    #[test]
    fn ghz_family() {
        let q = ghz_quantities(2).unwrap();
        assert_abs_diff_eq!(q.information, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q.localisable, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q.deficit, 1.0, epsilon = 1e-12);
        let q = ghz_quantities(4).unwrap();
        assert_abs_diff_eq!(q.deficit, 2.0, epsilon = 1e-12);
        assert_eq!(q.provenance, Provenance::Exact);
        // log2(n)/n peaks at n = 3 and decreases from there on
        let mut last = f64::INFINITY;
        for n in 3..=7 {
            let q = ghz_quantities(n).unwrap();
            assert_abs_diff_eq!(q.deficit, (n as f64).log2(), epsilon = 1e-12);
            assert!(q.deficit / (n as f64) < last);
            last = q.deficit / n as f64;
        }
        assert!(ghz_quantities(3).unwrap().deficit / 3.0 > ghz_quantities(2).unwrap().deficit / 2.0);
    }

    #[test]
    fn aharonov_family() {
        let q = aharonov_quantities(2).unwrap();
        assert_abs_diff_eq!(q.deficit, 1.0, epsilon = 1e-12);
        let q = aharonov_quantities(3).unwrap();
        assert_abs_diff_eq!(q.information, 3.0 * 3f64.log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(q.deficit, 6f64.log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(q.single_party_entropy, 3f64.log2(), epsilon = 1e-12);
        assert_eq!(q.provenance, Provenance::Bound);
    }

    #[test]
    fn w_closed_form_values() {
        assert_abs_diff_eq!(w_localisable_closed_form(1.0 / 3.0), 1.4502621529, epsilon = 1e-9);
        assert_abs_diff_eq!(w_localisable_closed_form(2.0 / 3.0), 1.4502621529, epsilon = 1e-9);
        assert_abs_diff_eq!(w_localisable_closed_form(1.0), 1.415037, epsilon = 1e-6);
        assert!(w_localisable_closed_form(0.5) < 1.45026 - 1e-5);
        let optima = w_closed_form_optima(1e-9);
        assert_eq!(optima.len(), 2);
        assert_abs_diff_eq!(optima[0].0, 1.0 / 3.0, epsilon = 1e-5);
        assert_abs_diff_eq!(optima[1].0, 2.0 / 3.0, epsilon = 1e-5);
    }

    #[test]
    fn w_closed_form_matches_direct_evaluation() {
        let rho = w_state().to_density();
        for k in 0..=10 {
            let theta = PI * k as f64 / 10.0;
            let b = BlochBasis::new(theta, 0.4).to_local(0);
            let ens = condition(&rho, &b).unwrap();
            let mut cost = shannon_entropy(&ens.probabilities());
            for o in &ens.outcomes {
                if let Some(s) = &o.state {
                    cost += o.probability * von_neumann_entropy(&partial_trace(s, &[0]).unwrap());
                }
            }
            let x2 = BlochBasis::new(theta, 0.4).x_squared();
            assert_abs_diff_eq!(3.0 - cost, w_localisable_closed_form(x2), epsilon = 1e-9);
        }
    }

    #[test]
    fn acin_examples() {
        let r = acin_localisable(&AcinParams::ghz(), &cfg()).unwrap();
        assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-9);
        let prod = AcinParams::new(c(1.0, 0.0), 0.0, 0.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(acin_localisable(&prod, &cfg()).unwrap().value, 3.0, epsilon = 1e-9);
        let w = w_localisable(&cfg()).unwrap();
        assert_abs_diff_eq!(w.value, 1.45026, epsilon = 1e-4);
        assert!(w.warnings.is_empty(), "{:?}", w.warnings);
    }

    #[test]
    fn classical_quantities() {
        let s = singlet().to_density();
        let cc = rho_cc();
        let prod = product_pure();
        let r = classical_deficit(&s, &cfg()).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(classical_deficit(&prod, &cfg()).unwrap().value, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(
            classical_deficit(&mfs_state(), &cfg()).unwrap().value,
            0.188721875540867,
            epsilon = 1e-9
        );
        for (rho, hv) in [(&cc, 1.0), (&prod, 0.0), (&s, 1.0)] {
            let r = henderson_vedral(rho, Direction::AToB, &cfg()).unwrap();
            assert_abs_diff_eq!(r.value, hv, epsilon = 1e-9);
            let z = zeroway_classical(rho, &cfg()).unwrap();
            assert_abs_diff_eq!(z.value, hv, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(
            oneway_classical_deficit(&cc, Direction::AToB, &cfg()).unwrap().value,
            1.0,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            oneway_classical_deficit(&s, Direction::AToB, &cfg()).unwrap().value,
            1.0,
            epsilon = 1e-9
        );
        let m = oneway_classical_deficit(&mfs_state(), Direction::AToB, &cfg()).unwrap();
        assert!(m.value <= m.companions["C_HV"] + 1e-8);
    }

    #[test]
    fn discord_examples() {
        let cc = rho_cc();
        assert_abs_diff_eq!(
            quantum_discord(&cc, &LocalBasis::computational(0, 2)).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        let s = singlet().to_density();
        let b = BlochBasis::new(0.9, 0.3).to_local(0);
        assert_abs_diff_eq!(quantum_discord(&s, &b).unwrap(), 1.0, epsilon = 1e-12);
        let rho = mfs_state();
        let d = min_discord(&rho, Direction::AToB, &cfg()).unwrap();
        let o = oneway_deficit(&rho, Direction::AToB, &cfg()).unwrap();
        assert_abs_diff_eq!(d.value, o.value, epsilon = 1e-8);
    }

    #[test]
    fn report_serializes() {
        let r = oneway_deficit(&mfs_state(), Direction::AToB, &cfg()).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["quantity"], "Delta_oneway");
        assert_eq!(json["provenance"], "optimizer");
        assert_eq!(json["direction"], "A->B");
        assert!(json["diagnostics"]["converged"].as_bool().unwrap());
        let back: DeficitReport = serde_json::from_value(json).unwrap();
        assert_eq!(back.value, r.value);
    }

    #[test]
    fn deficits_on_qutrit_qubit() {
        let rho = random_state(&[3, 2], RngSeed::new(9, 0));
        let fast = OptimizerConfig {
            grid_points_per_angle: 8,
            ..cfg()
        };
        let ab = oneway_deficit(&rho, Direction::AToB, &fast).unwrap().value;
        let ba = oneway_deficit(&rho, Direction::BToA, &fast).unwrap().value;
        let zero = zeroway_deficit(&rho, &fast).unwrap().value;
        let im = mutual_information(&rho).unwrap();
        assert!(ab >= -1e-9 && ba >= -1e-9);
        assert!(zero >= ab.min(ba) - 1e-7);
        assert!(zero <= im + 1e-9);
        assert!(twoqubit_deficit(&rho, &fast).is_err());
        let dc = classical_deficit(&rho, &fast).unwrap();
        assert_eq!(dc.provenance, Provenance::Bound);
        let deph = dephase(&rho, &LocalBasis::computational(0, 3)).unwrap();
        assert!(von_neumann_entropy(&deph) >= von_neumann_entropy(&rho) - 1e-12);
    }
}
