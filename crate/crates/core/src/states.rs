//! Named states and seeded random sampling.
//!
//! Bell-basis order is fixed everywhere as `(φ⁺, φ⁻, ψ⁺, ψ⁻)`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{c, CMatrix, CVector, DensityMatrix, PureState, C64};

const WEIGHT_TOL: f64 = 1e-12;

fn check_distribution(p: &[f64], what: &str) -> Result<()> {
    if p.iter().any(|&x| x < -WEIGHT_TOL || !x.is_finite()) {
        return Err(Error::InvalidParameter(format!("{what}: negative weight in {p:?}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::InvalidParameter(format!("{what}: weights sum to {sum}")));
    }
    Ok(())
}

/// Weights of a Bell-diagonal state, in `(φ⁺, φ⁻, ψ⁺, ψ⁻)` order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellWeights {
    p: [f64; 4],
}

impl BellWeights {
    pub fn new(p: [f64; 4]) -> Result<Self> {
        check_distribution(&p, "Bell weights")?;
        Ok(Self { p })
    }

    pub fn weights(&self) -> [f64; 4] {
        self.p
    }

    /// Correlation coefficients `t_ii = tr(σ_i ⊗ σ_i ρ)`.
    pub fn correlations(&self) -> [f64; 3] {
        let [p1, p2, p3, p4] = self.p;
        [p1 - p2 + p3 - p4, -p1 + p2 + p3 - p4, p1 + p2 - p3 - p4]
    }

    /// Uniformly distributed weights on the simplex.
    pub fn random(seed: RngSeed) -> Self {
        let mut rng = seed.rng();
        let mut e = [0.0; 4];
        for x in &mut e {
            let u: f64 = rng.random();
            *x = -(1.0 - u).ln();
        }
        let s: f64 = e.iter().sum();
        Self {
            p: [e[0] / s, e[1] / s, e[2] / s, e[3] / s],
        }
    }
}

/// Coefficients of `a|000⟩ + b|010⟩ + c|100⟩ + d|001⟩ + e|111⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcinParams {
    pub a: C64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl AcinParams {
    pub fn new(a: C64, b: f64, c: f64, d: f64, e: f64) -> Result<Self> {
        let norm = a.norm_sqr() + b * b + c * c + d * d + e * e;
        if (norm - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidParameter(format!(
                "Acin coefficients have squared norm {norm}"
            )));
        }
        Ok(Self { a, b, c, d, e })
    }

    pub fn w_state() -> Self {
        let s = 1.0 / 3f64.sqrt();
        Self {
            a: c(0.0, 0.0),
            b: s,
            c: s,
            d: s,
            e: 0.0,
        }
    }

    pub fn ghz() -> Self {
        Self {
            a: c(FRAC_1_SQRT_2, 0.0),
            b: 0.0,
            c: 0.0,
            d: 0.0,
            e: FRAC_1_SQRT_2,
        }
    }
}

/// Seed plus stream index for a counter-based generator. Equal pairs give
/// bit-identical samples; different streams are independent sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn ket(amps: &[f64]) -> CVector {
    CVector::from_iterator(amps.len(), amps.iter().map(|&x| c(x, 0.0)))
}

/// Bell state by index in `(φ⁺, φ⁻, ψ⁺, ψ⁻)` order.
pub fn bell_state(index: usize) -> PureState {
    let s = FRAC_1_SQRT_2;
    let (amps, label) = match index {
        0 => ([s, 0.0, 0.0, s], "phi+"),
        1 => ([s, 0.0, 0.0, -s], "phi-"),
        2 => ([0.0, s, s, 0.0], "psi+"),
        _ => ([0.0, s, -s, 0.0], "psi-"),
    };
    PureState::normalized(vec![2, 2], ket(&amps))
        .expect("Bell states are normalized")
        .with_label(label)
}

pub fn singlet() -> PureState {
    bell_state(3)
}

pub fn phi_plus() -> PureState {
    bell_state(0)
}

/// `p1 P_φ⁺ + p2 P_φ⁻ + p3 P_ψ⁺ + p4 P_ψ⁻`.
pub fn bell_mixture(w: &BellWeights) -> DensityMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (k, &p) in w.p.iter().enumerate() {
        m += bell_state(k).to_density().matrix() * c(p, 0.0);
    }
    DensityMatrix::from_parts_unchecked(vec![2, 2], m).with_label("bell-mixture")
}

/// `¼|00⟩⟨00| + ¼|11⟩⟨11| + ½|ψ⁻⟩⟨ψ⁻|`: separable, yet not fully localisable.
pub fn mfs_state() -> DensityMatrix {
    let mut m = singlet().to_density().matrix() * c(0.5, 0.0);
    m[(0, 0)] += c(0.25, 0.0);
    m[(3, 3)] += c(0.25, 0.0);
    DensityMatrix::from_parts_unchecked(vec![2, 2], m).with_label("mfs")
}

/// Maximally entangled `Σ_k |kk⟩ / √d`.
pub fn maximally_entangled(d: usize) -> PureState {
    let mut v = CVector::zeros(d * d);
    for k in 0..d {
        v[k * d + k] = c(1.0 / (d as f64).sqrt(), 0.0);
    }
    PureState::new(vec![d, d], v).expect("normalized")
}

/// `λ |φ_max⟩⟨φ_max| + (1-λ) I/d²`, positive for `λ ∈ [-1/(d²-1), 1]`.
pub fn isotropic(lambda: f64, d: usize) -> Result<DensityMatrix> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!("isotropic dimension {d}")));
    }
    let lower = -1.0 / ((d * d - 1) as f64);
    if !(lower - 1e-12..=1.0 + 1e-12).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "isotropic lambda {lambda} outside [{lower}, 1]"
        )));
    }
    let n = d * d;
    let proj = maximally_entangled(d).to_density();
    let m = proj.matrix() * c(lambda, 0.0)
        + CMatrix::identity(n, n) * c((1.0 - lambda) / n as f64, 0.0);
    Ok(DensityMatrix::from_parts_unchecked(vec![d, d], m).with_label(format!("iso:{lambda},{d}")))
}

/// `Σ_{k<local_dim} |k k … k⟩ / √local_dim` on `n_parties` factors.
pub fn ghz(n_parties: usize, local_dim: usize) -> Result<PureState> {
    if n_parties < 2 || local_dim < 2 {
        return Err(Error::InvalidParameter(format!(
            "GHZ needs at least 2 parties and local dim 2, got {n_parties}, {local_dim}"
        )));
    }
    let n = local_dim.pow(n_parties as u32);
    let mut v = CVector::zeros(n);
    // |kk…k⟩ sits at k·(1 + d + d² + …)
    let step: usize = (0..n_parties).map(|p| local_dim.pow(p as u32)).sum();
    for k in 0..local_dim {
        v[k * step] = c(1.0 / (local_dim as f64).sqrt(), 0.0);
    }
    Ok(PureState::new(vec![local_dim; n_parties], v)?.with_label(format!("ghz:{n_parties}")))
}

pub fn w_state() -> PureState {
    let s = 1.0 / 3f64.sqrt();
    let mut v = CVector::zeros(8);
    v[4] = c(s, 0.0);
    v[2] = c(s, 0.0);
    v[1] = c(s, 0.0);
    PureState::new(vec![2, 2, 2], v).expect("normalized").with_label("w")
}

fn permutation_sign(perm: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Totally antisymmetric state of `n` parties with local dimension `n`.
pub fn aharonov(n: usize) -> Result<PureState> {
    if !(2..=5).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "Aharonov state supported for 2 <= n <= 5, got {n}"
        )));
    }
    let total = n.pow(n as u32);
    let factorial: usize = (1..=n).product();
    let amp = 1.0 / (factorial as f64).sqrt();
    let mut v = CVector::zeros(total);
    for perm in (0..n).permutations(n) {
        let index = perm.iter().fold(0usize, |acc, &a| acc * n + a);
        v[index] = c(permutation_sign(&perm) * amp, 0.0);
    }
    Ok(PureState::new(vec![n; n], v)?.with_label(format!("aharonov:{n}")))
}

pub fn acin_state(p: &AcinParams) -> PureState {
    let mut v = CVector::zeros(8);
    v[0] = p.a;
    v[2] = c(p.b, 0.0);
    v[4] = c(p.c, 0.0);
    v[1] = c(p.d, 0.0);
    v[7] = c(p.e, 0.0);
    PureState::normalized(vec![2, 2, 2], v)
        .expect("AcinParams are normalized")
        .with_label("acin")
}

/// Mixture of `|0⟩|0⟩, |0⟩|1⟩, |1⟩|+⟩, |1⟩|−⟩` with weights `q`.
pub fn bb84_mixture(q: [f64; 4]) -> Result<DensityMatrix> {
    check_distribution(&q, "BB84 weights")?;
    let s = FRAC_1_SQRT_2;
    let vectors = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, s, s],
        [0.0, 0.0, s, -s],
    ];
    let mut m = CMatrix::zeros(4, 4);
    for (w, amps) in q.iter().zip(vectors.iter()) {
        let v = ket(amps);
        m += &v * v.adjoint() * c(*w, 0.0);
    }
    Ok(DensityMatrix::from_parts_unchecked(vec![2, 2], m).with_label("bb84"))
}

/// The nine product vectors of the 3⊗3 "sausage" basis, each as (Alice, Bob).
pub fn sausage_basis() -> Vec<(CVector, CVector)> {
    let s = FRAC_1_SQRT_2;
    let e = |k: usize| {
        let mut v = [0.0; 3];
        v[k] = 1.0;
        ket(&v)
    };
    let plus = |a: usize, b: usize, sign: f64| {
        let mut v = [0.0; 3];
        v[a] = s;
        v[b] = sign * s;
        ket(&v)
    };
    vec![
        (plus(0, 1, 1.0), e(2)),
        (plus(0, 1, -1.0), e(2)),
        (e(0), plus(0, 1, 1.0)),
        (e(0), plus(0, 1, -1.0)),
        (plus(1, 2, 1.0), e(0)),
        (plus(1, 2, -1.0), e(0)),
        (e(1), e(1)),
        (e(2), e(2)),
        (e(2), e(1)),
    ]
}

/// State diagonal in the sausage basis with weights `q`.
pub fn sausage_mixture(q: [f64; 9]) -> Result<DensityMatrix> {
    check_distribution(&q, "sausage weights")?;
    let mut m = CMatrix::zeros(9, 9);
    for (w, (a, b)) in q.iter().zip(sausage_basis()) {
        let v = a.kronecker(&b);
        m += &v * v.adjoint() * c(*w, 0.0);
    }
    Ok(DensityMatrix::from_parts_unchecked(vec![3, 3], m).with_label("sausage"))
}

/// `Σ_ij p_ij |a_i⟩⟨a_i| ⊗ |b_j⟩⟨b_j|` for bases given as matrix columns.
pub fn classically_correlated(
    p: &DMatrix<f64>,
    basis_a: &CMatrix,
    basis_b: &CMatrix,
) -> Result<DensityMatrix> {
    let (da, db) = (basis_a.ncols(), basis_b.ncols());
    if p.nrows() != da || p.ncols() != db || basis_a.nrows() != da || basis_b.nrows() != db {
        return Err(Error::DimensionMismatch(format!(
            "probabilities {}x{} vs bases {da}, {db}",
            p.nrows(),
            p.ncols()
        )));
    }
    let flat: Vec<f64> = p.iter().copied().collect();
    check_distribution(&flat, "classical correlations")?;
    let n = da * db;
    let mut m = CMatrix::zeros(n, n);
    for i in 0..da {
        for j in 0..db {
            let v = basis_a.column(i).kronecker(&basis_b.column(j));
            m += &v * v.adjoint() * c(p[(i, j)], 0.0);
        }
    }
    Ok(DensityMatrix::new(vec![da, db], m)?.with_label("classical"))
}

/// `(|00⟩⟨00| + |11⟩⟨11|)/2`.
pub fn rho_cc() -> DensityMatrix {
    DensityMatrix::diagonal(vec![2, 2], &[0.5, 0.0, 0.0, 0.5])
        .expect("valid")
        .with_label("cc")
}

/// `Σ_ij a_ij |ii⟩⟨jj|` for a PSD unit-trace coefficient matrix `a`.
pub fn maximally_correlated(a: &CMatrix) -> Result<DensityMatrix> {
    let d = a.nrows();
    if a.ncols() != d {
        return Err(Error::DimensionMismatch("coefficient matrix not square".into()));
    }
    // validates positivity and trace of the coefficients themselves
    DensityMatrix::new(vec![d], a.clone())?;
    let mut m = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = a[(i, j)];
        }
    }
    Ok(DensityMatrix::from_parts_unchecked(vec![d, d], m).with_label("max-correlated"))
}

fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

/// Hilbert–Schmidt random state: `G G† / tr(G G†)` with square complex Ginibre `G`.
pub fn random_state(dims: &[usize], seed: RngSeed) -> DensityMatrix {
    let mut rng = seed.rng();
    random_state_from(dims, &mut rng)
}

pub fn random_state_from(dims: &[usize], rng: &mut impl Rng) -> DensityMatrix {
    let n: usize = dims.iter().product();
    let g = gaussian_matrix(rng, n, n);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    DensityMatrix::from_parts_unchecked(dims.to_vec(), w / c(tr, 0.0))
}

/// Haar-random pure state.
pub fn random_pure_state(dims: &[usize], rng: &mut impl Rng) -> PureState {
    let n: usize = dims.iter().product();
    let g = gaussian_matrix(rng, n, 1);
    PureState::normalized(dims.to_vec(), g.column(0).into_owned()).expect("nonzero")
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = gaussian_matrix(rng, d, d);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// JSON state exchange format: `{dims, re, im, label}` with row-major matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    #[serde(default)]
    pub label: Option<String>,
}

impl StateFile {
    pub fn from_state(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let n = m.nrows();
        let rows = |f: fn(&C64) -> f64| {
            (0..n)
                .map(|i| (0..n).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            dims: rho.dims().to_vec(),
            re: rows(|z| z.re),
            im: rows(|z| z.im),
            label: rho.label().map(str::to_owned),
        }
    }

    pub fn to_state(&self) -> Result<DensityMatrix> {
        let n = self.re.len();
        if self.im.len() != n
            || self.re.iter().chain(self.im.iter()).any(|row| row.len() != n)
        {
            return Err(Error::StateFile(format!(
                "re/im must both be {n}x{n} matrices"
            )));
        }
        let m = CMatrix::from_fn(n, n, |i, j| c(self.re[i][j], self.im[i][j]));
        let rho = DensityMatrix::new(self.dims.clone(), m)?;
        Ok(match &self.label {
            Some(l) => rho.with_label(l.clone()),
            None => rho,
        })
    }

    pub fn read(path: &Path) -> Result<DensityMatrix> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::StateFile(format!("{}: {e}", path.display())))?;
        let file: StateFile = serde_json::from_str(&text)
            .map_err(|e| Error::StateFile(format!("{}: {e}", path.display())))?;
        file.to_state()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("state file serializes")
    }
}
