//! Local complete dephasing, conditioning on projective outcomes, and the
//! grid + simplex optimizer over local measurement bases.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{halton, nelder_mead, SimplexOptions};
use crate::qmat::{
    c, embed_local, entropy_of_spectrum, hermitian_eigen, hermitian_eigenvalues, shannon_entropy,
    strides, unitarity_deviation, CMatrix, CVector, DensityMatrix,
};

/// Probabilities at or below this are treated as impossible outcomes.
pub const NULL_OUTCOME: f64 = 1e-12;

/// Orthonormal basis on one tensor factor; the columns of `vectors` are the basis kets.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalBasis {
    factor: usize,
    vectors: CMatrix,
}

impl LocalBasis {
    pub fn new(factor: usize, vectors: CMatrix) -> Result<Self> {
        if vectors.nrows() != vectors.ncols() {
            return Err(Error::IncompleteBasis(f64::INFINITY));
        }
        let dev = unitarity_deviation(&vectors);
        if dev > 1e-10 {
            return Err(Error::IncompleteBasis(dev));
        }
        Ok(Self { factor, vectors })
    }

    pub fn computational(factor: usize, dim: usize) -> Self {
        Self {
            factor,
            vectors: CMatrix::identity(dim, dim),
        }
    }

    /// Eigenbasis of a Hermitian operator on the factor (descending eigenvalues).
    pub fn eigenbasis(factor: usize, operator: &CMatrix) -> Self {
        Self {
            factor,
            vectors: hermitian_eigen(operator).eigenvectors,
        }
    }

    /// Basis from the angle vector used by the optimizer: `(θ, φ)` Bloch angles
    /// for a qubit, `d(d-1)` Givens angles otherwise.
    pub fn from_angles(factor: usize, dim: usize, angles: &[f64]) -> Result<Self> {
        if angles.len() != angle_count(dim) {
            return Err(Error::InvalidParameter(format!(
                "{} angles for factor dimension {dim}",
                angles.len()
            )));
        }
        if dim == 2 {
            return Ok(BlochBasis::new(angles[0], angles[1]).to_local(factor));
        }
        Ok(Self {
            factor,
            vectors: givens_unitary(dim, angles),
        })
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn vectors(&self) -> &CMatrix {
        &self.vectors
    }

    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.column(k).into_owned()
    }

    /// Same basis on another factor.
    pub fn on_factor(&self, factor: usize) -> Self {
        Self {
            factor,
            vectors: self.vectors.clone(),
        }
    }

    /// `1 - mean_k max_l |⟨e_k|f_l⟩|²`: zero iff the two bases define the same
    /// measurement (up to labels and phases).
    pub fn distance(&self, other: &LocalBasis) -> f64 {
        let g = self.vectors.adjoint() * &other.vectors;
        let d = g.nrows();
        let mean = (0..d)
            .map(|k| (0..d).map(|l| g[(k, l)].norm_sqr()).fold(0.0, f64::max))
            .sum::<f64>()
            / d as f64;
        1.0 - mean
    }
}

/// Qubit basis `{cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩, e^{-iφ} sin(θ/2)|0⟩ - cos(θ/2)|1⟩}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochBasis {
    pub theta: f64,
    pub phi: f64,
}

impl BlochBasis {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    /// Recovers angles (θ ∈ [0, π], φ ∈ [0, 2π)) from a qubit ket.
    pub fn from_vector(v: &CVector) -> Self {
        let x = v[0];
        let y = v[1];
        let theta = 2.0 * x.norm().clamp(0.0, 1.0).acos();
        let phi = if y.norm() < 1e-15 || x.norm() < 1e-15 {
            0.0
        } else {
            (y.arg() - x.arg()).rem_euclid(2.0 * PI)
        };
        Self { theta, phi }
    }

    /// `|x|²` for the first basis vector `x|0⟩ + y|1⟩`.
    pub fn x_squared(&self) -> f64 {
        (self.theta / 2.0).cos().powi(2)
    }

    pub fn to_local(&self, factor: usize) -> LocalBasis {
        let (x, s) = ((self.theta / 2.0).cos(), (self.theta / 2.0).sin());
        let y = c(self.phi.cos(), self.phi.sin()) * s;
        let vectors =
            CMatrix::from_row_slice(2, 2, &[c(x, 0.0), y.conj(), y, c(-x, 0.0)]);
        LocalBasis { factor, vectors }
    }
}

/// Number of optimizer angles for a factor of dimension `dim`.
pub fn angle_count(dim: usize) -> usize {
    if dim == 2 {
        2
    } else {
        dim * (dim - 1)
    }
}

/// Product of complex Givens rotations over every pair `(j, k)`, each with a
/// mixing angle θ and phase φ.
fn givens_unitary(dim: usize, angles: &[f64]) -> CMatrix {
    let mut u = CMatrix::identity(dim, dim);
    let mut a = angles.iter();
    for j in 0..dim {
        for k in j + 1..dim {
            let theta = *a.next().expect("angle count checked");
            let phi = *a.next().expect("angle count checked");
            let (co, si) = (theta.cos(), theta.sin());
            let e = c(phi.cos(), phi.sin());
            // u <- u · G_jk
            for r in 0..dim {
                let (uj, uk) = (u[(r, j)], u[(r, k)]);
                u[(r, j)] = uj * co + uk * e * si;
                u[(r, k)] = -uj * e.conj() * si + uk * co;
            }
        }
    }
    u
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub grid_points_per_angle: usize,
    pub refine_iterations: usize,
    pub tolerance: f64,
    pub restarts: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid_points_per_angle: 24,
            refine_iterations: 200,
            tolerance: 1e-8,
            restarts: 8,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points_per_angle < 2
            || self.refine_iterations == 0
            || self.restarts == 0
            || !(self.tolerance > 0.0)
        {
            return Err(Error::InvalidParameter(format!(
                "optimizer config must be positive (grid >= 2): {self:?}"
            )));
        }
        Ok(())
    }
}

/// One outcome of a local projective measurement.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub probability: f64,
    /// Normalized state of the remaining factors; `None` for null outcomes.
    pub state: Option<DensityMatrix>,
}

#[derive(Debug, Clone)]
pub struct ConditionalEnsemble {
    pub outcomes: Vec<Outcome>,
}

impl ConditionalEnsemble {
    pub fn probabilities(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.probability).collect()
    }

    /// `Σ_i p_i S(ρ_i)`, null outcomes contribute nothing.
    pub fn average_entropy(&self) -> f64 {
        self.outcomes
            .iter()
            .filter_map(|o| {
                o.state
                    .as_ref()
                    .map(|s| o.probability * entropy_of_spectrum(&s.eigenvalues()))
            })
            .sum()
    }
}

fn check_basis(rho: &DensityMatrix, basis: &LocalBasis) -> Result<()> {
    let dims = rho.dims();
    if basis.factor >= dims.len() {
        return Err(Error::InvalidFactor {
            index: basis.factor,
            count: dims.len(),
        });
    }
    if dims[basis.factor] != basis.dim() {
        return Err(Error::DimensionMismatch(format!(
            "basis of dim {} on factor {} of dim {}",
            basis.dim(),
            basis.factor,
            dims[basis.factor]
        )));
    }
    Ok(())
}

/// `Σ_i (P_i ⊗ I) ρ (P_i ⊗ I)` for the projectors of `basis` on its factor.
pub fn dephase(rho: &DensityMatrix, basis: &LocalBasis) -> Result<DensityMatrix> {
    check_basis(rho, basis)?;
    let dims = rho.dims();
    let w = embed_local(dims, basis.factor, &basis.vectors)?;
    let mut rotated = w.adjoint() * rho.matrix() * &w;
    let st = strides(dims)[basis.factor];
    let d = dims[basis.factor];
    let n = rho.dim();
    for i in 0..n {
        for j in 0..n {
            if (i / st) % d != (j / st) % d {
                rotated[(i, j)] = c(0.0, 0.0);
            }
        }
    }
    let out = &w * rotated * w.adjoint();
    Ok(DensityMatrix::from_parts_unchecked(dims.to_vec(), out))
}

/// Dephases each listed basis in turn (bases on distinct factors commute).
pub fn dephase_all(rho: &DensityMatrix, bases: &[LocalBasis]) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    for b in bases {
        out = dephase(&out, b)?;
    }
    Ok(out)
}

/// Unnormalized `⟨e|ρ|e⟩` on the remaining factors, for a ket `e` on `factor`.
fn project_out(rho: &DensityMatrix, factor: usize, e: &CVector) -> CMatrix {
    let dims = rho.dims();
    let st = strides(dims);
    let d = dims[factor];
    let rest: Vec<usize> = (0..dims.len()).filter(|&f| f != factor).collect();
    let mut rest_off = vec![0usize];
    for &f in &rest {
        let mut next = Vec::with_capacity(rest_off.len() * dims[f]);
        for &o in &rest_off {
            for a in 0..dims[f] {
                next.push(o + a * st[f]);
            }
        }
        rest_off = next;
    }
    let m = rho.matrix();
    let r = rest_off.len();
    CMatrix::from_fn(r, r, |i, j| {
        let mut acc = c(0.0, 0.0);
        for a in 0..d {
            let ea = e[a].conj();
            if ea.norm_sqr() == 0.0 {
                continue;
            }
            for b in 0..d {
                acc += ea * e[b] * m[(rest_off[i] + a * st[factor], rest_off[j] + b * st[factor])];
            }
        }
        acc
    })
}

/// Outcome probabilities and normalized conditional states of the other factors.
pub fn condition(rho: &DensityMatrix, basis: &LocalBasis) -> Result<ConditionalEnsemble> {
    check_basis(rho, basis)?;
    let dims = rho.dims();
    let mut rest_dims: Vec<usize> = dims
        .iter()
        .enumerate()
        .filter(|&(f, _)| f != basis.factor)
        .map(|(_, &d)| d)
        .collect();
    if rest_dims.is_empty() {
        rest_dims.push(1);
    }
    let outcomes = (0..basis.dim())
        .map(|k| {
            let m = project_out(rho, basis.factor, &basis.vector(k));
            let p = m.trace().re;
            if p <= NULL_OUTCOME {
                Outcome {
                    probability: p.max(0.0),
                    state: None,
                }
            } else {
                Outcome {
                    probability: p,
                    state: Some(DensityMatrix::from_parts_unchecked(
                        rest_dims.clone(),
                        m / c(p, 0.0),
                    )),
                }
            }
        })
        .collect();
    Ok(ConditionalEnsemble { outcomes })
}

/// `H({p_i}) + Σ_i p_i S(ρ_i)`: the entropy of the state after dephasing `basis`.
pub fn post_dephasing_entropy(rho: &DensityMatrix, basis: &LocalBasis) -> Result<f64> {
    check_basis(rho, basis)?;
    Ok(conditional_entropy_terms(rho, basis).0)
}

/// `(H(p) + Σ p_i S(ρ_i), H(p), Σ p_i S(ρ_i))` without building state objects.
pub(crate) fn conditional_entropy_terms(rho: &DensityMatrix, basis: &LocalBasis) -> (f64, f64, f64) {
    let mut probs = Vec::with_capacity(basis.dim());
    let mut avg = 0.0;
    for k in 0..basis.dim() {
        let m = project_out(rho, basis.factor, &basis.vector(k));
        let p = m.trace().re;
        probs.push(p.max(0.0));
        if p > NULL_OUTCOME {
            avg += p * entropy_of_spectrum(&hermitian_eigenvalues(&(m / c(p, 0.0))));
        }
    }
    let h = shannon_entropy(&probs);
    (h + avg, h, avg)
}

/// Joint outcome distribution of measuring one basis on every factor
/// (`bases` must cover all factors, in factor order).
pub fn product_distribution(rho: &DensityMatrix, bases: &[LocalBasis]) -> Result<Vec<f64>> {
    if bases.len() != rho.num_factors() {
        return Err(Error::InvalidParameter(
            "product distribution needs one basis per factor".into(),
        ));
    }
    for (f, b) in bases.iter().enumerate() {
        if b.factor != f {
            return Err(Error::InvalidParameter("bases must be in factor order".into()));
        }
        check_basis(rho, b)?;
    }
    let mut full = bases[0].vectors.clone();
    for b in &bases[1..] {
        full = full.kronecker(&b.vectors);
    }
    Ok(crate::qmat::distribution_in_basis(rho.matrix(), &full))
}

/// Whether the objective is minimized or maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Goal {
    Minimize,
    Maximize,
}

impl Goal {
    fn sign(self) -> f64 {
        match self {
            Goal::Minimize => 1.0,
            Goal::Maximize => -1.0,
        }
    }

    /// True when `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        self.sign() * a < self.sign() * b
    }
}

/// Result of a basis optimization.
#[derive(Debug, Clone)]
pub struct BasisOptimum {
    pub value: f64,
    /// One basis per optimized factor, in the order requested.
    pub bases: Vec<LocalBasis>,
    /// Optimizer angles per factor for `bases` (empty when a non-qubit seed won).
    pub angles: Vec<Vec<f64>>,
    /// Best value found by the grid scan alone.
    pub grid_value: f64,
    pub evaluations: usize,
    /// Every refinement that ran met its stopping tolerance.
    pub converged: bool,
    /// Number of grid cells whose value is within `tolerance` of the best value.
    pub near_optimal_cells: usize,
    /// Distinct refined optima within `tolerance` of the best value.
    pub co_optimal: Vec<Vec<LocalBasis>>,
}

/// Extra starting points for the refinement stage.
#[derive(Debug, Clone, Default)]
pub struct Seeds {
    /// Each entry holds one basis per optimized factor. Qubit seeds start a
    /// refinement; other seeds are evaluated as they are.
    pub bases: Vec<Vec<LocalBasis>>,
}

fn bloch_angles(b: &LocalBasis) -> Vec<f64> {
    let bb = BlochBasis::from_vector(&b.vector(0));
    vec![bb.theta, bb.phi]
}

/// Grid candidates for one factor.
fn factor_candidates(dim: usize, points: usize, product: bool) -> Vec<Vec<f64>> {
    if dim == 2 {
        // a basis and its relabeling (θ, φ) -> (π-θ, φ+π) coincide, so joint
        // scans only need the upper hemisphere
        let (theta_max, n_theta) = if product {
            (PI / 2.0, (points - 1) / 2 + 1)
        } else {
            (PI, points)
        };
        let mut out = Vec::new();
        for i in 0..n_theta {
            let theta = theta_max * i as f64 / (n_theta - 1).max(1) as f64;
            if i == 0 {
                out.push(vec![0.0, 0.0]);
                continue;
            }
            for j in 0..points {
                out.push(vec![theta, 2.0 * PI * j as f64 / points as f64]);
            }
        }
        return out;
    }
    let m = angle_count(dim);
    let count = if product { points * 4 } else { points * points };
    (0..count)
        .map(|i| {
            halton(i, m)
                .iter()
                .enumerate()
                .map(|(k, &u)| if k % 2 == 0 { u * PI / 2.0 } else { u * 2.0 * PI })
                .collect()
        })
        .collect()
}

const JOINT_GRID_CAP: usize = 20_000;

fn decode(dims: &[usize], factors: &[usize], flat: &[f64]) -> Vec<LocalBasis> {
    let mut out = Vec::with_capacity(factors.len());
    let mut offset = 0;
    for &f in factors {
        let m = angle_count(dims[f]);
        out.push(
            LocalBasis::from_angles(f, dims[f], &flat[offset..offset + m])
                .expect("angle counts match"),
        );
        offset += m;
    }
    out
}

fn joint_distance(a: &[LocalBasis], b: &[LocalBasis]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.distance(y)).sum()
}

/// Grid scan over every combination of per-factor candidates followed by
/// Nelder–Mead refinement from the best few distinct cells.
pub fn optimize_product_bases<F>(
    rho: &DensityMatrix,
    factors: &[usize],
    objective: F,
    goal: Goal,
    config: &OptimizerConfig,
    seeds: &Seeds,
) -> Result<BasisOptimum>
where
    F: Fn(&[LocalBasis]) -> f64,
{
    config.validate()?;
    let dims = rho.dims();
    if factors.is_empty() {
        return Err(Error::InvalidParameter("no factors to optimize".into()));
    }
    for &f in factors {
        if f >= dims.len() {
            return Err(Error::InvalidFactor {
                index: f,
                count: dims.len(),
            });
        }
        if dims[f] < 2 || dims[f] > 4 {
            return Err(Error::UnsupportedDimension(format!(
                "basis optimization supports factor dimensions 2..=4, factor {f} has {}",
                dims[f]
            )));
        }
    }
    let product = factors.len() > 1;
    let per_factor: Vec<Vec<Vec<f64>>> = factors
        .iter()
        .map(|&f| factor_candidates(dims[f], config.grid_points_per_angle, product))
        .collect();
    let total_angles: usize = factors.iter().map(|&f| angle_count(dims[f])).sum();
    let joint_size: usize = per_factor.iter().map(Vec::len).product();

    let grid: Vec<Vec<f64>> = if joint_size <= JOINT_GRID_CAP {
        let mut acc: Vec<Vec<f64>> = vec![vec![]];
        for cands in &per_factor {
            let mut next = Vec::with_capacity(acc.len() * cands.len());
            for prefix in &acc {
                for c in cands {
                    let mut v = prefix.clone();
                    v.extend_from_slice(c);
                    next.push(v);
                }
            }
            acc = next;
        }
        acc
    } else {
        let count = config.grid_points_per_angle.pow(2) * 4;
        (0..count)
            .map(|i| {
                let mut v = Vec::with_capacity(total_angles);
                let u = halton(i, total_angles);
                let mut k = 0;
                for &f in factors {
                    for j in 0..angle_count(dims[f]) {
                        let scale = match (dims[f], j % 2) {
                            (2, 0) => PI,
                            (_, 0) => PI / 2.0,
                            _ => 2.0 * PI,
                        };
                        v.push(u[k] * scale);
                        k += 1;
                    }
                }
                v
            })
            .collect()
    };

    let eval = |flat: &[f64]| objective(&decode(dims, factors, flat));
    let mut evaluations = 0usize;
    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(grid.len());
    for (i, point) in grid.iter().enumerate() {
        let v = eval(point);
        evaluations += 1;
        scored.push((if v.is_nan() { f64::INFINITY } else { goal.sign() * v }, i));
    }
    // scan order breaks ties
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let grid_best = scored[0].0;
    let near_optimal_cells = scored
        .iter()
        .take_while(|(v, _)| *v - grid_best <= config.tolerance)
        .count();

    let mut starts: Vec<Vec<f64>> = Vec::new();
    // seeds without an angle representation are only evaluated, not refined
    let mut direct: Option<(f64, Vec<LocalBasis>)> = None;
    for seed in &seeds.bases {
        if seed.len() != factors.len()
            || seed.iter().zip(factors).any(|(b, &f)| b.factor != f || b.dim() != dims[f])
        {
            return Err(Error::InvalidParameter("seed bases do not match the optimized factors".into()));
        }
        if seed.iter().all(|b| b.dim() == 2) {
            starts.push(seed.iter().flat_map(bloch_angles).collect());
        } else {
            let v = goal.sign() * objective(seed);
            evaluations += 1;
            if direct.as_ref().is_none_or(|(best, _)| v < *best) {
                direct = Some((v, seed.clone()));
            }
        }
    }
    let mut chosen: Vec<Vec<LocalBasis>> = Vec::new();
    let mut grid_starts = Vec::new();
    for &(_, i) in &scored {
        if grid_starts.len() >= config.restarts {
            break;
        }
        let b = decode(dims, factors, &grid[i]);
        if chosen.iter().all(|o| joint_distance(o, &b) > 0.02) {
            chosen.push(b);
            grid_starts.push(grid[i].clone());
        }
    }
    starts.extend(grid_starts);

    let spacing = PI / (config.grid_points_per_angle - 1) as f64;
    let opts = SimplexOptions {
        max_iterations: config.refine_iterations * (total_angles / 2).max(1),
        value_tolerance: config.tolerance * 1e-3,
        step_tolerance: config.tolerance.sqrt() * 1e-2,
        initial_step: spacing / 2.0,
    };
    let mut refined: Vec<(f64, Vec<f64>)> = Vec::with_capacity(starts.len());
    let mut converged = true;
    for s in &starts {
        let r = nelder_mead(|x| goal.sign() * eval(x), s, &opts);
        evaluations += r.evaluations;
        converged &= r.converged;
        refined.push((r.value, r.x));
    }
    refined.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (best_signed, best_x) = refined[0].clone();
    let (best_signed, best_x) = if grid_best < best_signed {
        (grid_best, grid[scored[0].1].clone())
    } else {
        (best_signed, best_x)
    };

    let mut co_optimal: Vec<Vec<LocalBasis>> = Vec::new();
    for (v, x) in &refined {
        if *v - best_signed > config.tolerance.max(1e-9) {
            continue;
        }
        let b = decode(dims, factors, x);
        if co_optimal.iter().all(|o| joint_distance(o, &b) > 1e-4) {
            co_optimal.push(b);
        }
    }

    let mut bases = decode(dims, factors, &best_x);
    let mut angles = Vec::with_capacity(factors.len());
    let mut offset = 0;
    for &f in factors {
        let m = angle_count(dims[f]);
        angles.push(best_x[offset..offset + m].to_vec());
        offset += m;
    }
    let mut best_signed = best_signed;
    if let Some((v, seed)) = direct {
        if v < best_signed {
            best_signed = v;
            bases = seed;
            angles = vec![Vec::new(); factors.len()];
            co_optimal.insert(0, bases.clone());
        }
    }
    Ok(BasisOptimum {
        value: goal.sign() * best_signed,
        bases,
        angles,
        grid_value: goal.sign() * grid_best,
        evaluations,
        converged,
        near_optimal_cells,
        co_optimal,
    })
}

/// Optimizes one local basis on `factor`.
pub fn optimize_single_basis<F>(
    rho: &DensityMatrix,
    factor: usize,
    objective: F,
    goal: Goal,
    config: &OptimizerConfig,
    seeds: &Seeds,
) -> Result<BasisOptimum>
where
    F: Fn(&LocalBasis) -> f64,
{
    optimize_product_bases(rho, &[factor], |b| objective(&b[0]), goal, config, seeds)
}
