//! Dense complex Hermitian linear algebra and the entropy functionals.
//!
//! Every quantity in this crate is measured in bits. All entropies go through a
//! single kernel, the Hermitian eigendecomposition in [`hermitian_eigen`] (or its
//! eigenvalue-only variant), so that values computed along different routes
//! agree to rounding.
//!
//! Tensor factors are ordered with factor 0 most significant, i.e. the basis
//! ket `|a b c⟩` of a space with dims `[da, db, dc]` sits at row
//! `(a * db + b) * dc + c`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance for the Hermiticity, trace and positivity invariants.
pub const STATE_TOL: f64 = 1e-10;
/// Eigenvalues of `sigma` below this count as outside its support.
pub const SUPPORT_EIGEN_TOL: f64 = 1e-12;
/// Weight of `rho` on the kernel of `sigma` above which relative entropy is infinite.
pub const SUPPORT_WEIGHT_TOL: f64 = 1e-9;

const LN2: f64 = std::f64::consts::LN_2;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub(crate) fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln() / LN2
    }
}

/// Quantum state on a tensor product of finite-dimensional spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    entries: CMatrix,
    label: Option<String>,
}

/// Normalized state vector with its tensor-factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amplitudes: CVector,
    label: Option<String>,
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl Spectrum {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.eigenvalues.len();
        let mut scaled = self.eigenvectors.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            for i in 0..n {
                scaled[(i, j)] *= lambda;
            }
        }
        &scaled * self.eigenvectors.adjoint()
    }
}

fn check_dims(dims: &[usize], side: usize) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(Error::DimensionMismatch(format!("invalid dims {dims:?}")));
    }
    let total: usize = dims.iter().product();
    if total != side {
        return Err(Error::DimensionMismatch(format!(
            "dims {dims:?} give {total}, matrix side is {side}"
        )));
    }
    Ok(())
}

/// Largest absolute entry of `m - m†`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Largest absolute entry of `u† u - I`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let g = u.adjoint() * u;
    let n = g.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - c(target, 0.0)).norm());
        }
    }
    worst
}

/// Full eigendecomposition of a Hermitian matrix (only the lower triangle is trusted).
pub fn hermitian_eigen(m: &CMatrix) -> Spectrum {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Spectrum {
        eigenvalues,
        eigenvectors,
    }
}

/// Eigenvalues of a Hermitian matrix, sorted descending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Entropy in bits of a spectrum; entries are clipped to `[0, 1]`.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    let s: f64 = eigenvalues
        .iter()
        .map(|&l| -xlog2x(l.clamp(0.0, 1.0)))
        .sum();
    s.max(0.0)
}

/// Von Neumann entropy of an arbitrary PSD unit-trace Hermitian matrix.
pub fn matrix_entropy(m: &CMatrix) -> f64 {
    entropy_of_spectrum(&hermitian_eigenvalues(m))
}

/// Shannon entropy in bits of a probability vector (`0 log 0 = 0`).
pub fn shannon_entropy(probabilities: &[f64]) -> f64 {
    let s: f64 = probabilities.iter().map(|&p| -xlog2x(p.max(0.0))).sum();
    s.max(0.0)
}

/// `H(p) = -p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&p) || p.is_nan() {
        return Err(Error::ProbabilityOutOfRange(p));
    }
    let p = p.clamp(0.0, 1.0);
    Ok(-xlog2x(p) - xlog2x(1.0 - p))
}

pub(crate) fn binary_entropy_clamped(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    -xlog2x(p) - xlog2x(1.0 - p)
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity (all at [`STATE_TOL`]).
    pub fn new(dims: Vec<usize>, entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        check_dims(&dims, entries.nrows())?;
        let dev = hermiticity_deviation(&entries);
        if dev > STATE_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::TraceDeviation(tr.re));
        }
        let min = hermitian_eigenvalues(&entries)
            .last()
            .copied()
            .unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::NegativeEigenvalue(min));
        }
        Ok(Self {
            dims,
            entries,
            label: None,
        })
    }

    /// Construction for matrices that are valid states by construction
    /// (partial traces, dephasings, mixtures). Symmetrizes away rounding.
    pub(crate) fn from_parts_unchecked(dims: Vec<usize>, entries: CMatrix) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), entries.nrows());
        let herm = (&entries + entries.adjoint()) * c(0.5, 0.0);
        Self {
            dims,
            entries: herm,
            label: None,
        }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        let entries = CMatrix::identity(n, n) * c(1.0 / n as f64, 0.0);
        Self {
            dims,
            entries,
            label: None,
        }
    }

    /// Diagonal state `Σ p_k |k⟩⟨k|` in the computational basis.
    pub fn diagonal(dims: Vec<usize>, probabilities: &[f64]) -> Result<Self> {
        let entries = CMatrix::from_diagonal(&CVector::from_iterator(
            probabilities.len(),
            probabilities.iter().map(|&p| c(p, 0.0)),
        ));
        Self::new(dims, entries)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn num_factors(&self) -> usize {
        self.dims.len()
    }

    pub fn spectrum(&self) -> Spectrum {
        hermitian_eigen(&self.entries)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.entries)
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    /// `U ρ U†` for a unitary on the full space.
    pub fn conjugate(&self, unitary: &CMatrix) -> Result<Self> {
        if unitary.nrows() != self.dim() || unitary.ncols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "unitary is {}x{}, state side {}",
                unitary.nrows(),
                unitary.ncols(),
                self.dim()
            )));
        }
        let out = unitary * &self.entries * unitary.adjoint();
        Ok(Self::from_parts_unchecked(self.dims.clone(), out))
    }

    /// Convex combination `Σ w_k ρ_k` of states sharing dims.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        let dims = first.1.dims.clone();
        let n = first.1.dim();
        let mut acc = CMatrix::zeros(n, n);
        for (w, rho) in parts {
            if rho.dims != dims {
                return Err(Error::DimensionMismatch("mixture components differ".into()));
            }
            acc += rho.matrix() * c(*w, 0.0);
        }
        Self::new(dims, acc)
    }

    /// Max absolute entry difference.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.entries - &other.entries)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Trace distance `½‖ρ - σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> f64 {
        let diff = &self.entries - &other.entries;
        0.5 * hermitian_eigenvalues(&diff)
            .iter()
            .map(|l| l.abs())
            .sum::<f64>()
    }
}

impl PureState {
    pub fn new(dims: Vec<usize>, amplitudes: CVector) -> Result<Self> {
        check_dims(&dims, amplitudes.len())?;
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self {
            dims,
            amplitudes,
            label: None,
        })
    }

    /// Normalizes the given amplitudes first.
    pub fn normalized(dims: Vec<usize>, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized(0.0));
        }
        Self::new(dims, amplitudes / c(norm, 0.0))
    }

    /// Computational basis ket `|k⟩` (flat index).
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let n: usize = dims.iter().product();
        if index >= n {
            return Err(Error::InvalidParameter(format!("basis index {index} >= {n}")));
        }
        let mut v = CVector::zeros(n);
        v[index] = c(1.0, 0.0);
        Self::new(dims, v)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn to_density(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix {
            dims: self.dims.clone(),
            entries: m,
            label: self.label.clone(),
        }
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        PureState {
            dims,
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
            label: None,
        }
    }

    /// `|⟨self|other⟩|`.
    pub fn overlap(&self, other: &PureState) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm()
    }
}

/// Mixed-radix strides for `dims` (factor 0 most significant).
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Flat-index offsets of every configuration of the chosen factors.
fn subsystem_offsets(dims: &[usize], factors: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut offsets = vec![0usize];
    for &f in factors {
        let mut next = Vec::with_capacity(offsets.len() * dims[f]);
        for &o in &offsets {
            for a in 0..dims[f] {
                next.push(o + a * st[f]);
            }
        }
        offsets = next;
    }
    offsets
}

/// `⟨i|M|j⟩` entries of `m` after tracing out every factor not in `keep`.
pub(crate) fn partial_trace_matrix(m: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
    let traced: Vec<usize> = (0..dims.len()).filter(|f| !keep.contains(f)).collect();
    let kept_off = subsystem_offsets(dims, keep);
    let traced_off = subsystem_offsets(dims, &traced);
    let n = kept_off.len();
    CMatrix::from_fn(n, n, |i, j| {
        traced_off
            .iter()
            .map(|&t| m[(kept_off[i] + t, kept_off[j] + t)])
            .sum()
    })
}

fn check_factor(dims: &[usize], factor: usize) -> Result<()> {
    if factor >= dims.len() {
        return Err(Error::InvalidFactor {
            index: factor,
            count: dims.len(),
        });
    }
    Ok(())
}

/// Reduced state on the factors in `keep` (sorted, duplicates removed).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::EmptyKeep);
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    for &f in &keep {
        check_factor(&rho.dims, f)?;
    }
    if keep.len() == rho.dims.len() {
        return Ok(rho.clone());
    }
    let out = partial_trace_matrix(&rho.entries, &rho.dims, &keep);
    let dims = keep.iter().map(|&f| rho.dims[f]).collect();
    Ok(DensityMatrix::from_parts_unchecked(dims, out))
}

/// Kronecker product; dims concatenate.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    DensityMatrix {
        dims,
        entries: a.entries.kronecker(&b.entries),
        label: None,
    }
}

/// Reorders tensor factors: factor `k` of the result is factor `order[k]` of `rho`.
pub fn permute_factors(rho: &DensityMatrix, order: &[usize]) -> Result<DensityMatrix> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..rho.dims.len()).collect::<Vec<_>>() {
        return Err(Error::InvalidParameter(format!(
            "{order:?} is not a permutation of {} factors",
            rho.dims.len()
        )));
    }
    let old = subsystem_offsets(&rho.dims, order);
    let n = old.len();
    let m = CMatrix::from_fn(n, n, |i, j| rho.entries[(old[i], old[j])]);
    let dims = order.iter().map(|&f| rho.dims[f]).collect();
    Ok(DensityMatrix::from_parts_unchecked(dims, m))
}

/// `S(ρ) = -tr ρ log2 ρ`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&rho.eigenvalues())
}

/// `I(ρ) = log2 d - S(ρ)` with `d` the total dimension.
pub fn information(rho: &DensityMatrix) -> f64 {
    (rho.dim() as f64).log2() - von_neumann_entropy(rho)
}

/// `S(ρ|σ) = tr ρ log2 ρ - tr ρ log2 σ`, evaluated in the eigenbasis of `σ`.
/// Returns `f64::INFINITY` when the support of `ρ` is not inside that of `σ`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "relative entropy of {} vs {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(relative_entropy_matrices(rho.matrix(), sigma.matrix()))
}

pub(crate) fn relative_entropy_matrices(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let neg_s = -matrix_entropy(rho);
    let spec = hermitian_eigen(sigma);
    let mut cross = 0.0;
    for (k, &s) in spec.eigenvalues.iter().enumerate() {
        let v = spec.eigenvectors.column(k);
        let weight = (v.adjoint() * rho * v)[(0, 0)].re;
        if s < SUPPORT_EIGEN_TOL {
            if weight > SUPPORT_WEIGHT_TOL {
                return f64::INFINITY;
            }
            continue;
        }
        cross += weight * s.log2();
    }
    (neg_s - cross).max(0.0)
}

/// Probability distribution `p_i = ⟨ψ_i|ρ|ψ_i⟩` over the columns of `basis`.
pub(crate) fn distribution_in_basis(rho: &CMatrix, basis: &CMatrix) -> Vec<f64> {
    (0..basis.ncols())
        .map(|k| {
            let v = basis.column(k);
            (v.adjoint() * rho * v)[(0, 0)].re
        })
        .collect()
}

/// Shannon entropy of the diagonal of `ρ` in a complete orthonormal basis
/// given as the columns of `basis`.
pub fn shannon_in_basis(rho: &DensityMatrix, basis: &CMatrix) -> Result<f64> {
    if basis.nrows() != rho.dim() || basis.ncols() != rho.dim() {
        return Err(Error::IncompleteBasis(f64::INFINITY));
    }
    let dev = unitarity_deviation(basis);
    if dev > 1e-9 {
        return Err(Error::IncompleteBasis(dev));
    }
    Ok(shannon_entropy(&distribution_in_basis(rho.matrix(), basis)))
}

/// Transpose on the indices of one factor. The result is Hermitian with unit
/// trace but need not be positive.
pub fn partial_transpose(rho: &DensityMatrix, factor: usize) -> Result<CMatrix> {
    check_factor(&rho.dims, factor)?;
    Ok(partial_transpose_matrix(&rho.entries, &rho.dims, factor))
}

pub(crate) fn partial_transpose_matrix(m: &CMatrix, dims: &[usize], factor: usize) -> CMatrix {
    let st = strides(dims)[factor];
    let d = dims[factor];
    let n = m.nrows();
    CMatrix::from_fn(n, n, |i, j| {
        let di = (i / st) % d;
        let dj = (j / st) % d;
        let ii = i - di * st + dj * st;
        let jj = j - dj * st + di * st;
        m[(ii, jj)]
    })
}

/// Operator acting as `u` on one factor and identity elsewhere.
pub fn embed_local(dims: &[usize], factor: usize, u: &CMatrix) -> Result<CMatrix> {
    check_factor(dims, factor)?;
    if u.nrows() != dims[factor] || u.ncols() != dims[factor] {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, factor {factor} has dim {}",
            u.nrows(),
            u.ncols(),
            dims[factor]
        )));
    }
    let before: usize = dims[..factor].iter().product();
    let after: usize = dims[factor + 1..].iter().product();
    let left = CMatrix::identity(before, before).kronecker(u);
    Ok(left.kronecker(&CMatrix::identity(after, after)))
}

/// Operator acting as `u` on a set of factors (in ascending order, `u` on their
/// joint space in that order) and identity elsewhere.
pub fn embed_operator(dims: &[usize], factors: &[usize], u: &CMatrix) -> Result<CMatrix> {
    let mut sorted = factors.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != factors.len() || sorted != factors {
        return Err(Error::InvalidParameter(
            "operator factors must be ascending and distinct".into(),
        ));
    }
    for &f in factors {
        check_factor(dims, f)?;
    }
    let sub: usize = factors.iter().map(|&f| dims[f]).product();
    if u.nrows() != sub || u.ncols() != sub {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, factors span {sub}",
            u.nrows(),
            u.ncols()
        )));
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|f| !factors.contains(f)).collect();
    let sub_off = subsystem_offsets(dims, factors);
    let rest_off = subsystem_offsets(dims, &rest);
    let n: usize = dims.iter().product();
    let mut out = CMatrix::zeros(n, n);
    for &r in &rest_off {
        for (a, &oa) in sub_off.iter().enumerate() {
            for (b, &ob) in sub_off.iter().enumerate() {
                out[(oa + r, ob + r)] = u[(a, b)];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permute_factors_swaps_tensor_order() {
        let a = DensityMatrix::diagonal(vec![2], &[0.9, 0.1]).unwrap();
        let b = DensityMatrix::diagonal(vec![3], &[0.5, 0.3, 0.2]).unwrap();
        let ab = tensor(&a, &b);
        let ba = permute_factors(&ab, &[1, 0]).unwrap();
        assert_eq!(ba.dims(), &[3, 2]);
        assert!(ba.max_abs_diff(&tensor(&b, &a)) < 1e-15);
        assert!(permute_factors(&ab, &[0, 0]).is_err());
    }
    use approx::assert_abs_diff_eq;

    fn ket(v: &[f64]) -> CVector {
        CVector::from_iterator(v.len(), v.iter().map(|&x| c(x, 0.0)))
    }

    fn proj(dims: Vec<usize>, v: &[f64]) -> DensityMatrix {
        PureState::normalized(dims, ket(v)).unwrap().to_density()
    }

    #[test]
    fn entropy_examples() {
        let mixed = DensityMatrix::maximally_mixed(vec![2]);
        assert_abs_diff_eq!(von_neumann_entropy(&mixed), 1.0, epsilon = 1e-12);
        let pure = proj(vec![2, 2], &[1.0, 0.3, -0.2, 0.5]);
        assert_abs_diff_eq!(von_neumann_entropy(&pure), 0.0, epsilon = 1e-9);
        let d = DensityMatrix::diagonal(vec![2, 2], &[0.5, 0.25, 0.125, 0.125]).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&d), 1.75, epsilon = 1e-12);
    }

    #[test]
    fn information_is_dimension_dependent() {
        let singlet = proj(vec![2, 2], &[0.0, 1.0, -1.0, 0.0]);
        assert_abs_diff_eq!(information(&singlet), 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(
            information(&DensityMatrix::maximally_mixed(vec![2, 2])),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let mut m = CMatrix::identity(2, 2) * c(0.5, 0.0);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(
            DensityMatrix::new(vec![2], m),
            Err(Error::NotHermitian(_))
        ));
        let m = CMatrix::identity(2, 2) * c(0.6, 0.0);
        assert!(matches!(
            DensityMatrix::new(vec![2], m),
            Err(Error::TraceDeviation(_))
        ));
        let m = CMatrix::from_diagonal(&ket(&[1.1, -0.1]));
        assert!(matches!(
            DensityMatrix::new(vec![2], m),
            Err(Error::NegativeEigenvalue(_))
        ));
        let m = CMatrix::identity(4, 4) * c(0.25, 0.0);
        assert!(DensityMatrix::new(vec![2, 3], m).is_err());
    }

    #[test]
    fn partial_trace_examples() {
        let phi = proj(vec![2, 2], &[1.0, 0.0, 0.0, 1.0]);
        let a = partial_trace(&phi, &[0]).unwrap();
        assert!(a.max_abs_diff(&DensityMatrix::maximally_mixed(vec![2])) < 1e-12);
        assert!(matches!(partial_trace(&phi, &[]), Err(Error::EmptyKeep)));
        assert_eq!(partial_trace(&phi, &[0, 1]).unwrap(), phi);
        assert!(partial_trace(&phi, &[2]).is_err());
    }

    #[test]
    fn partial_trace_keeps_factor_order() {
        let a = proj(vec![2], &[1.0, 0.0]);
        let b = proj(vec![3], &[0.0, 1.0, 1.0]);
        let cc = DensityMatrix::maximally_mixed(vec![2]);
        let abc = tensor(&tensor(&a, &b), &cc);
        let ac = partial_trace(&abc, &[2, 0]).unwrap();
        assert_eq!(ac.dims(), &[2, 2]);
        assert!(ac.max_abs_diff(&tensor(&a, &cc)) < 1e-12);
        let bb = partial_trace(&abc, &[1]).unwrap();
        assert!(bb.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn tensor_examples() {
        let h = DensityMatrix::maximally_mixed(vec![2]);
        let hh = tensor(&h, &h);
        assert!(hh.max_abs_diff(&DensityMatrix::maximally_mixed(vec![2, 2])) < 1e-15);
        let z = proj(vec![2], &[1.0, 0.0]);
        let o = proj(vec![2], &[0.0, 1.0]);
        let zo = tensor(&z, &o);
        assert_eq!(zo.dims(), &[2, 2]);
        assert!(zo.max_abs_diff(&proj(vec![2, 2], &[0.0, 1.0, 0.0, 0.0])) < 1e-15);
    }

    #[test]
    fn relative_entropy_examples() {
        let rho = DensityMatrix::diagonal(vec![2], &[0.7, 0.3]).unwrap();
        assert_abs_diff_eq!(relative_entropy(&rho, &rho).unwrap(), 0.0, epsilon = 1e-12);
        let zero = proj(vec![2], &[1.0, 0.0]);
        let one = proj(vec![2], &[0.0, 1.0]);
        let h = DensityMatrix::maximally_mixed(vec![2]);
        assert_abs_diff_eq!(relative_entropy(&zero, &h).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(relative_entropy(&zero, &one).unwrap(), f64::INFINITY);
        assert_abs_diff_eq!(relative_entropy(&zero, &zero).unwrap(), 0.0, epsilon = 1e-12);
        assert!(relative_entropy(&zero, &DensityMatrix::maximally_mixed(vec![2, 2])).is_err());
    }

    #[test]
    fn shannon_in_basis_examples() {
        let zero = proj(vec![2], &[1.0, 0.0]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let pm = CMatrix::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]);
        assert_abs_diff_eq!(shannon_in_basis(&zero, &pm).unwrap(), 1.0, epsilon = 1e-12);
        let h = DensityMatrix::maximally_mixed(vec![2]);
        assert_abs_diff_eq!(shannon_in_basis(&h, &pm).unwrap(), 1.0, epsilon = 1e-12);
        let d = DensityMatrix::diagonal(vec![2], &[0.9, 0.1]).unwrap();
        let id = CMatrix::identity(2, 2);
        assert_abs_diff_eq!(
            shannon_in_basis(&d, &id).unwrap(),
            von_neumann_entropy(&d),
            epsilon = 1e-12
        );
        let incomplete = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(shannon_in_basis(&d, &incomplete).is_err());
    }

    #[test]
    fn binary_entropy_examples() {
        assert_abs_diff_eq!(binary_entropy(0.5).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(binary_entropy(0.0).unwrap(), 0.0, epsilon = 1e-15);
        // -(3/4) log2 (3/4) - (1/4) log2 (1/4)
        let direct = -0.75 * 0.75f64.log2() - 0.25 * 0.25f64.log2();
        assert_abs_diff_eq!(binary_entropy(0.75).unwrap(), direct, epsilon = 1e-15);
        assert_abs_diff_eq!(binary_entropy(0.75).unwrap(), 0.811278, epsilon = 1e-6);
        assert!(binary_entropy(1.1).is_err());
        assert!(binary_entropy(-1e-6).is_err());
        assert!(binary_entropy(1.0 + 1e-13).is_ok());
    }

    #[test]
    fn partial_transpose_of_phi_plus() {
        let phi = proj(vec![2, 2], &[1.0, 0.0, 0.0, 1.0]);
        let pt = partial_transpose(&phi, 1).unwrap();
        let ev = hermitian_eigenvalues(&pt);
        let expected = [0.5, 0.5, 0.5, -0.5];
        for (a, b) in ev.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        let pt0 = partial_transpose(&phi, 0).unwrap();
        assert_abs_diff_eq!(hermitian_eigenvalues(&pt0)[3], -0.5, epsilon = 1e-12);
    }

    #[test]
    fn partial_transpose_of_product_keeps_spectrum() {
        let a = DensityMatrix::new(
            vec![2],
            CMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.4, 0.0)]),
        )
        .unwrap();
        let b = DensityMatrix::diagonal(vec![3], &[0.5, 0.3, 0.2]).unwrap();
        let ab = tensor(&a, &b);
        let before = ab.eigenvalues();
        let after = hermitian_eigenvalues(&partial_transpose(&ab, 0).unwrap());
        for (x, y) in before.iter().zip(&after) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-12);
        }
    }

    #[test]
    fn spectrum_reconstructs() {
        let rho = DensityMatrix::new(
            vec![2],
            CMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.4, 0.0)]),
        )
        .unwrap();
        let sp = rho.spectrum();
        assert!(sp.eigenvalues[0] >= sp.eigenvalues[1]);
        assert_abs_diff_eq!(sp.eigenvalues.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        let back = sp.reconstruct();
        let err = (&back - rho.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-9);
    }

    #[test]
    fn embed_operator_matches_kron() {
        let dims = [2, 3, 2];
        let x = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let direct = embed_local(&dims, 2, &x).unwrap();
        let general = embed_operator(&dims, &[2], &x).unwrap();
        assert!((direct - general).iter().all(|z| z.norm() < 1e-15));
        let xx = x.kronecker(&x);
        let both = embed_operator(&dims, &[0, 2], &xx).unwrap();
        let expected = x
            .kronecker(&CMatrix::identity(3, 3))
            .kronecker(&x);
        assert!((both - expected).iter().all(|z| z.norm() < 1e-15));
    }
}
