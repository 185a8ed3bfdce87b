//! Labeled composite Hilbert spaces and dense complex operator algebra.
//!
//! All operators are dense matrices over a composite space built from
//! two-level and truncated-Fock factors. The basis conventions are fixed
//! globally: two-level factors are ordered (ground, excited); Fock factors
//! are |0⟩..|N−1⟩ ascending; factor 0 is the leftmost (slowest-varying)
//! Kronecker index.

use ndarray::linalg::kron;
use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Default Fock truncation used by Hamiltonian builders when the caller
/// does not specify one. All scenarios of interest are sub-single-photon
/// on average; the truncation-adequacy check in the evolution engine
/// guards against this being too small.
pub const DEFAULT_FOCK_TRUNCATION: usize = 10;

/// Population allowed in the highest Fock level of any mode during an
/// evolution before the run is aborted with a "raise truncation" error.
pub const TRUNCATION_POPULATION_LIMIT: f64 = 1e-6;

/// One tensor factor of a composite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    /// A two-level system, basis ordered (ground, excited).
    TwoLevel,
    /// A bosonic mode truncated to the Fock states |0⟩..|N−1⟩ (N ≥ 1).
    FockMode(usize),
}

impl Factor {
    pub fn dim(&self) -> usize {
        match *self {
            Factor::TwoLevel => 2,
            Factor::FockMode(n) => n,
        }
    }

    fn kind_name(&self) -> &'static str {
        match *self {
            Factor::TwoLevel => "two-level",
            Factor::FockMode(_) => "Fock-mode",
        }
    }
}

/// An ordered list of tensor factors. The order is fixed at construction
/// and shared by every operator built on the space; operators on different
/// spaces cannot be combined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertSpace {
    factors: Vec<Factor>,
}

impl HilbertSpace {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidInput {
                name: "factors".into(),
                reason: "a Hilbert space needs at least one factor".into(),
            });
        }
        for (i, f) in factors.iter().enumerate() {
            if let Factor::FockMode(n) = f {
                if *n < 1 {
                    return Err(Error::InvalidInput {
                        name: format!("factor {i}"),
                        reason: "Fock truncation must be >= 1".into(),
                    });
                }
            }
        }
        Ok(Self { factors })
    }

    /// Two-level system ⊗ one Fock mode: the Jaynes–Cummings state space.
    pub fn two_level_with_mode(n_fock: usize) -> Result<Self> {
        Self::new(vec![Factor::TwoLevel, Factor::FockMode(n_fock)])
    }

    /// A single Fock mode (empty-cavity problems).
    pub fn single_mode(n_fock: usize) -> Result<Self> {
        Self::new(vec![Factor::FockMode(n_fock)])
    }

    /// A bare two-level system.
    pub fn two_level() -> Self {
        Self {
            factors: vec![Factor::TwoLevel],
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim()).product()
    }

    /// Composite basis index of the product state with the given per-factor
    /// indices (factor 0 slowest).
    pub fn basis_index(&self, indices: &[usize]) -> Result<usize> {
        if indices.len() != self.factors.len() {
            return Err(Error::InvalidInput {
                name: "indices".into(),
                reason: format!(
                    "expected {} per-factor indices, got {}",
                    self.factors.len(),
                    indices.len()
                ),
            });
        }
        let mut idx = 0usize;
        for (f, &i) in self.factors.iter().zip(indices) {
            if i >= f.dim() {
                return Err(Error::InvalidInput {
                    name: "indices".into(),
                    reason: format!("index {} out of range for factor of dim {}", i, f.dim()),
                });
            }
            idx = idx * f.dim() + i;
        }
        Ok(idx)
    }

    fn check_factor(&self, index: usize) -> Result<Factor> {
        self.factors
            .get(index)
            .copied()
            .ok_or(Error::FactorOutOfRange {
                index,
                len: self.factors.len(),
            })
    }

    /// Indices of all Fock-mode factors, in order.
    pub fn fock_factor_indices(&self) -> Vec<usize> {
        self.factors
            .iter()
            .enumerate()
            .filter_map(|(i, f)| matches!(f, Factor::FockMode(_)).then_some(i))
            .collect()
    }

    /// Indices of all two-level factors, in order.
    pub fn two_level_factor_indices(&self) -> Vec<usize> {
        self.factors
            .iter()
            .enumerate()
            .filter_map(|(i, f)| matches!(f, Factor::TwoLevel).then_some(i))
            .collect()
    }
}

fn identity(dim: usize) -> Array2<C64> {
    Array2::from_diag(&Array1::from_elem(dim, C64::new(1.0, 0.0)))
}

/// A dense operator tied to a specific [`HilbertSpace`].
#[derive(Debug, Clone)]
pub struct QOperator {
    space: HilbertSpace,
    matrix: Array2<C64>,
}

impl QOperator {
    /// Wrap a raw matrix; its dimension must match the space.
    pub fn from_matrix(space: HilbertSpace, matrix: Array2<C64>) -> Result<Self> {
        let d = space.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidInput {
                name: "matrix".into(),
                reason: format!(
                    "shape {}x{} does not match space dimension {}",
                    matrix.nrows(),
                    matrix.ncols(),
                    d
                ),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: HilbertSpace) -> Self {
        let d = space.total_dim();
        Self {
            space,
            matrix: identity(d),
        }
    }

    pub fn zero(space: HilbertSpace) -> Self {
        let d = space.total_dim();
        Self {
            space,
            matrix: Array2::zeros((d, d)),
        }
    }

    /// Embed a single-factor operator into the composite space by Kronecker
    /// products with identities on every other factor.
    fn embed(space: &HilbertSpace, factor_index: usize, small: &Array2<C64>) -> QOperator {
        let mut m: Option<Array2<C64>> = None;
        for (i, f) in space.factors().iter().enumerate() {
            let block = if i == factor_index {
                small.clone()
            } else {
                identity(f.dim())
            };
            m = Some(match m {
                None => block,
                Some(acc) => kron(&acc, &block),
            });
        }
        QOperator {
            space: space.clone(),
            matrix: m.expect("space has at least one factor"),
        }
    }

    /// Annihilation operator `a` of the Fock mode at `mode_index`, embedded
    /// in the composite space. On the mode factor, a[k−1, k] = √k.
    pub fn annihilation(space: &HilbertSpace, mode_index: usize) -> Result<Self> {
        let f = space.check_factor(mode_index)?;
        let n = match f {
            Factor::FockMode(n) => n,
            Factor::TwoLevel => {
                return Err(Error::WrongFactorKind {
                    index: mode_index,
                    expected: "Fock-mode",
                    found: f.kind_name(),
                })
            }
        };
        let mut a = Array2::zeros((n, n));
        for k in 1..n {
            a[[k - 1, k]] = C64::new((k as f64).sqrt(), 0.0);
        }
        Ok(Self::embed(space, mode_index, &a))
    }

    /// Creation operator `a†` of the Fock mode at `mode_index`.
    pub fn creation(space: &HilbertSpace, mode_index: usize) -> Result<Self> {
        Ok(Self::annihilation(space, mode_index)?.dagger())
    }

    /// Number operator `a†a` of the Fock mode at `mode_index`.
    pub fn number(space: &HilbertSpace, mode_index: usize) -> Result<Self> {
        let a = Self::annihilation(space, mode_index)?;
        a.dagger().matmul(&a)
    }

    /// Lowering operator σ− of the two-level factor at `tls_index`, with
    /// σ−|e⟩ = |g⟩ and σ−|g⟩ = 0 in the (ground, excited) basis order.
    pub fn lowering(space: &HilbertSpace, tls_index: usize) -> Result<Self> {
        let f = space.check_factor(tls_index)?;
        if !matches!(f, Factor::TwoLevel) {
            return Err(Error::WrongFactorKind {
                index: tls_index,
                expected: "two-level",
                found: f.kind_name(),
            });
        }
        let mut s = Array2::zeros((2, 2));
        s[[0, 1]] = C64::new(1.0, 0.0);
        Ok(Self::embed(space, tls_index, &s))
    }

    /// Raising operator σ+ (adjoint of [`QOperator::lowering`]).
    pub fn raising(space: &HilbertSpace, tls_index: usize) -> Result<Self> {
        Ok(Self::lowering(space, tls_index)?.dagger())
    }

    /// σ_z = σ+σ− − σ−σ+ (eigenvalues ±1, excited state at +1).
    pub fn sigma_z(space: &HilbertSpace, tls_index: usize) -> Result<Self> {
        let sm = Self::lowering(space, tls_index)?;
        let sp = sm.dagger();
        sp.matmul(&sm)?.sub(&sm.matmul(&sp)?)
    }

    /// Excited-state projector σ+σ− = |e⟩⟨e|.
    pub fn excited_projector(space: &HilbertSpace, tls_index: usize) -> Result<Self> {
        let sm = Self::lowering(space, tls_index)?;
        sm.dagger().matmul(&sm)
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn check_same_space(&self, other: &Self, what: &str) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(format!(
                "{what}: operators live on different spaces ({:?} vs {:?})",
                self.space.factors(),
                other.space.factors()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other, "add")?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other, "sub")?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.mapv(|x| c * x),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other, "matmul")?;
        Ok(Self {
            space: self.space.clone(),
            matrix: self.matrix.dot(&other.matrix),
        })
    }

    pub fn dagger(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.t().mapv(|x| x.conj()),
        }
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diag().sum()
    }

    /// max |M − M†| over all entries.
    pub fn max_nonhermiticity(&self) -> f64 {
        let d = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                dev = dev.max((self.matrix[[i, j]] - self.matrix[[j, i]].conj()).norm());
            }
        }
        dev
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0f64, |m, x| m.max(x.norm()))
    }

    /// Hermiticity check relative to the operator's own scale:
    /// max |M − M†| ≤ tol · max|M|.
    pub fn check_hermitian(&self, rel_tol: f64) -> Result<()> {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let dev = self.max_nonhermiticity();
        if dev > rel_tol * scale {
            return Err(Error::NotHermitian {
                dev,
                tol: rel_tol * scale,
            });
        }
        Ok(())
    }

    /// Eigenvalues of a Hermitian operator, ascending.
    pub fn eigvalsh(&self) -> Result<Vec<f64>> {
        let (vals, _) = self.matrix.eigh(UPLO::Lower)?;
        Ok(vals.to_vec())
    }

    /// Eigendecomposition of a Hermitian operator: (eigenvalues ascending,
    /// eigenvectors as columns).
    pub fn eigh(&self) -> Result<(Vec<f64>, Array2<C64>)> {
        let (vals, vecs) = self.matrix.eigh(UPLO::Lower)?;
        Ok((vals.to_vec(), vecs))
    }
}

/// Σ cᵢ·Opᵢ over operators sharing one space.
pub fn compose(ops: &[&QOperator], coefficients: &[C64]) -> Result<QOperator> {
    if ops.is_empty() || ops.len() != coefficients.len() {
        return Err(Error::InvalidInput {
            name: "compose".into(),
            reason: format!(
                "need equal nonzero counts of operators and coefficients, got {} and {}",
                ops.len(),
                coefficients.len()
            ),
        });
    }
    let mut acc = ops[0].scaled(coefficients[0]);
    for (op, &c) in ops[1..].iter().zip(&coefficients[1..]) {
        acc = acc.add(&op.scaled(c))?;
    }
    Ok(acc)
}

/// A density matrix tied to a [`HilbertSpace`].
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: Array2<C64>,
}

/// Tolerances for the density-matrix invariants, as enforced after every
/// evolution step: |trace − 1|, max |ρ − ρ†|, and the most negative
/// eigenvalue allowed.
#[derive(Debug, Clone, Copy)]
pub struct DensityTolerances {
    pub trace: f64,
    pub hermiticity: f64,
    pub negativity: f64,
}

impl Default for DensityTolerances {
    fn default() -> Self {
        Self {
            trace: 1e-9,
            hermiticity: 1e-9,
            negativity: 1e-8,
        }
    }
}

impl DensityMatrix {
    pub fn from_matrix(space: HilbertSpace, matrix: Array2<C64>) -> Result<Self> {
        let d = space.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidInput {
                name: "matrix".into(),
                reason: format!(
                    "shape {}x{} does not match space dimension {}",
                    matrix.nrows(),
                    matrix.ncols(),
                    d
                ),
            });
        }
        Ok(Self { space, matrix })
    }

    /// Pure state |ψ⟩⟨ψ| from a (normalized) amplitude vector.
    pub fn pure(space: HilbertSpace, psi: &Array1<C64>) -> Result<Self> {
        let d = space.total_dim();
        if psi.len() != d {
            return Err(Error::InvalidInput {
                name: "psi".into(),
                reason: format!("length {} does not match space dimension {}", psi.len(), d),
            });
        }
        let norm2: f64 = psi.iter().map(|x| x.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput {
                name: "psi".into(),
                reason: format!("state vector norm² = {norm2}, expected 1"),
            });
        }
        let mut m = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                m[[i, j]] = psi[i] * psi[j].conj();
            }
        }
        Ok(Self { space, matrix: m })
    }

    /// Projector onto a product basis state, e.g. |e, 0⟩⟨e, 0|.
    pub fn basis_projector(space: HilbertSpace, indices: &[usize]) -> Result<Self> {
        let idx = space.basis_index(indices)?;
        let d = space.total_dim();
        let mut m = Array2::zeros((d, d));
        m[[idx, idx]] = C64::new(1.0, 0.0);
        Ok(Self { space, matrix: m })
    }

    /// All factors in their ground/vacuum state.
    pub fn vacuum(space: HilbertSpace) -> Self {
        let d = space.total_dim();
        let mut m = Array2::zeros((d, d));
        m[[0, 0]] = C64::new(1.0, 0.0);
        Self { space, matrix: m }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diag().sum()
    }

    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ_ij ρ_ij ρ_ji
        let d = self.matrix.nrows();
        let mut p = C64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                p += self.matrix[[i, j]] * self.matrix[[j, i]];
            }
        }
        p.re
    }

    /// Diagonal population of a composite basis state.
    pub fn population(&self, indices: &[usize]) -> Result<f64> {
        let idx = self.space.basis_index(indices)?;
        Ok(self.matrix[[idx, idx]].re)
    }

    /// Total population in level `level` of the Fock mode at `mode_index`,
    /// summed over all other factors. Used by the truncation-adequacy check.
    pub fn fock_level_population(&self, mode_index: usize, level: usize) -> Result<f64> {
        let f = self.space.check_factor(mode_index)?;
        let n = match f {
            Factor::FockMode(n) => n,
            Factor::TwoLevel => {
                return Err(Error::WrongFactorKind {
                    index: mode_index,
                    expected: "Fock-mode",
                    found: f.kind_name(),
                })
            }
        };
        if level >= n {
            return Err(Error::InvalidInput {
                name: "level".into(),
                reason: format!("level {level} out of range for truncation {n}"),
            });
        }
        // Stride arithmetic: index of the mode factor within the composite
        // ordering (factor 0 slowest).
        let dims: Vec<usize> = self.space.factors().iter().map(|f| f.dim()).collect();
        let mut pop = 0.0;
        for idx in 0..self.space.total_dim() {
            let mut rem = idx;
            for (fi, &dim) in dims.iter().enumerate().rev() {
                let this = rem % dim;
                rem /= dim;
                if fi == mode_index {
                    if this == level {
                        pop += self.matrix[[idx, idx]].re;
                    }
                    break;
                }
            }
        }
        Ok(pop)
    }

    /// Hermitian eigenvalues of ρ, ascending.
    pub fn eigvalsh(&self) -> Result<Vec<f64>> {
        let (vals, _) = self.matrix.eigh(UPLO::Lower)?;
        Ok(vals.to_vec())
    }

    /// Trace distance ½‖ρ − σ‖₁.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch("trace_distance".into()));
        }
        let diff = &self.matrix - &other.matrix;
        let (vals, _) = diff.eigh(UPLO::Lower)?;
        Ok(0.5 * vals.iter().map(|v| v.abs()).sum::<f64>())
    }

    /// Enforce the density-matrix invariants: unit trace, hermiticity, and
    /// numerical positivity.
    pub fn validate(&self, tol: &DensityTolerances) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tol.trace || tr.im.abs() > tol.trace {
            return Err(Error::InvalidDensityMatrix(format!(
                "trace = {:.12e} + {:.3e}i deviates from 1 beyond {:.1e}",
                tr.re, tr.im, tol.trace
            )));
        }
        let d = self.matrix.nrows();
        let mut herm_dev: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                herm_dev =
                    herm_dev.max((self.matrix[[i, j]] - self.matrix[[j, i]].conj()).norm());
            }
        }
        if herm_dev > tol.hermiticity {
            return Err(Error::InvalidDensityMatrix(format!(
                "max |rho - rho†| = {herm_dev:.3e} beyond {:.1e}",
                tol.hermiticity
            )));
        }
        let vals = self.eigvalsh()?;
        if let Some(&min) = vals.first() {
            if min < -tol.negativity {
                return Err(Error::InvalidDensityMatrix(format!(
                    "minimum eigenvalue {min:.3e} below -{:.1e}",
                    tol.negativity
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn annihilation_lowest_truncation() {
        let sp = HilbertSpace::single_mode(2).unwrap();
        let a = QOperator::annihilation(&sp, 0).unwrap();
        assert_eq!(a.matrix()[[0, 1]], c(1.0, 0.0));
        assert_eq!(a.matrix()[[0, 0]], c(0.0, 0.0));
        assert_eq!(a.matrix()[[1, 0]], c(0.0, 0.0));
        assert_eq!(a.matrix()[[1, 1]], c(0.0, 0.0));
        let n = QOperator::number(&sp, 0).unwrap();
        let vals = n.eigvalsh().unwrap();
        assert_abs_diff_eq!(vals[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn number_operator_diagonal() {
        let sp = HilbertSpace::single_mode(4).unwrap();
        let n = QOperator::number(&sp, 0).unwrap();
        for k in 0..4 {
            assert_abs_diff_eq!(n.matrix()[[k, k]].re, k as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn truncated_commutation_relation() {
        // [a, a†] = I − N |N−1⟩⟨N−1| on truncation N, checked entrywise.
        let n = 6;
        let sp = HilbertSpace::single_mode(n).unwrap();
        let a = QOperator::annihilation(&sp, 0).unwrap();
        let comm = a.commutator(&a.dagger()).unwrap();
        let mut expected = Array2::<C64>::eye(n);
        expected[[n - 1, n - 1]] = c(1.0 - n as f64, 0.0);
        for i in 0..n {
            for j in 0..n {
                assert!((comm.matrix()[[i, j]] - expected[[i, j]]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn lowering_projector_and_sigma_z() {
        let sp = HilbertSpace::two_level();
        let sm = QOperator::lowering(&sp, 0).unwrap();
        let proj = sm.dagger().matmul(&sm).unwrap();
        // |e⟩⟨e| is idempotent
        let proj2 = proj.matmul(&proj).unwrap();
        assert!(proj2.sub(&proj).unwrap().max_abs() < 1e-14);
        assert_abs_diff_eq!(proj.matrix()[[1, 1]].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(proj.matrix()[[0, 0]].re, 0.0, epsilon = 1e-14);

        let sz = QOperator::sigma_z(&sp, 0).unwrap();
        let vals = sz.eigvalsh().unwrap();
        assert_abs_diff_eq!(vals[0], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn embedded_product_equals_kron_product() {
        // (σ− ⊗ I)(I ⊗ a†) = σ− ⊗ a† entrywise on TwoLevel ⊗ Fock(3).
        let sp = HilbertSpace::two_level_with_mode(3).unwrap();
        let sm = QOperator::lowering(&sp, 0).unwrap();
        let adag = QOperator::creation(&sp, 1).unwrap();
        let prod = sm.matmul(&adag).unwrap();

        let mut sm_small = Array2::<C64>::zeros((2, 2));
        sm_small[[0, 1]] = c(1.0, 0.0);
        let mut ad_small = Array2::<C64>::zeros((3, 3));
        for k in 1..3 {
            ad_small[[k, k - 1]] = c((k as f64).sqrt(), 0.0);
        }
        let expected = kron(&sm_small, &ad_small);
        for i in 0..6 {
            for j in 0..6 {
                assert!((prod.matrix()[[i, j]] - expected[[i, j]]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn embedding_commutes_with_multiplication() {
        // embed(A)·embed(B) = embed(A·B) for single-factor operators.
        let sp = HilbertSpace::new(vec![
            Factor::TwoLevel,
            Factor::FockMode(4),
            Factor::FockMode(3),
        ])
        .unwrap();
        let a = QOperator::annihilation(&sp, 1).unwrap();
        let ad = QOperator::creation(&sp, 1).unwrap();
        let lhs = a.matmul(&ad).unwrap();
        // a·a† on the bare factor, embedded afterwards
        let mut small = Array2::<C64>::zeros((4, 4));
        for k in 1..4 {
            small[[k - 1, k]] = c((k as f64).sqrt(), 0.0);
        }
        let prod_small = small.dot(&small.t().mapv(|x: C64| x.conj()));
        let rhs = QOperator::embed(&sp, 1, &prod_small);
        assert!(lhs.sub(&rhs).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn trace_of_embedded_operator() {
        let sp = HilbertSpace::new(vec![
            Factor::TwoLevel,
            Factor::FockMode(5),
            Factor::FockMode(3),
        ])
        .unwrap();
        let n_op = QOperator::number(&sp, 1).unwrap();
        // trace on the factor = 0+1+2+3+4 = 10; other dims product = 2*3 = 6
        assert_abs_diff_eq!(n_op.trace().re, 10.0 * 6.0, epsilon = 1e-9);
    }

    #[test]
    fn nilpotency() {
        let n = 5;
        let sp = HilbertSpace::single_mode(n).unwrap();
        let a = QOperator::annihilation(&sp, 0).unwrap();
        let mut p = a.clone();
        for _ in 1..n {
            p = p.matmul(&a).unwrap();
        }
        assert!(p.max_abs() < 1e-14);

        let sp2 = HilbertSpace::two_level();
        let sm = QOperator::lowering(&sp2, 0).unwrap();
        assert!(sm.matmul(&sm).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn compose_trivial_cases() {
        let sp = HilbertSpace::single_mode(3).unwrap();
        let a = QOperator::annihilation(&sp, 0).unwrap();
        let zero = compose(&[&a, &a], &[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert!(zero.max_abs() < 1e-15);

        let id = QOperator::identity(sp.clone());
        let half = compose(&[&id, &id], &[c(0.5, 0.0), c(0.5, 0.0)]).unwrap();
        assert!(half.sub(&id).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn wrong_factor_kind_errors() {
        let sp = HilbertSpace::two_level_with_mode(3).unwrap();
        assert!(matches!(
            QOperator::annihilation(&sp, 0),
            Err(Error::WrongFactorKind { .. })
        ));
        assert!(matches!(
            QOperator::lowering(&sp, 1),
            Err(Error::WrongFactorKind { .. })
        ));
        assert!(matches!(
            QOperator::annihilation(&sp, 7),
            Err(Error::FactorOutOfRange { .. })
        ));
    }

    #[test]
    fn space_mismatch_is_hard_error() {
        let sp1 = HilbertSpace::single_mode(3).unwrap();
        let sp2 = HilbertSpace::single_mode(4).unwrap();
        let a1 = QOperator::annihilation(&sp1, 0).unwrap();
        let a2 = QOperator::annihilation(&sp2, 0).unwrap();
        assert!(matches!(a1.add(&a2), Err(Error::SpaceMismatch(_))));
        assert!(matches!(
            compose(&[&a1, &a2], &[c(1.0, 0.0), c(1.0, 0.0)]),
            Err(Error::SpaceMismatch(_))
        ));
    }

    #[test]
    fn density_matrix_validation() {
        let sp = HilbertSpace::two_level_with_mode(3).unwrap();
        let rho = DensityMatrix::basis_projector(sp.clone(), &[1, 0]).unwrap();
        rho.validate(&DensityTolerances::default()).unwrap();
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-12);

        let bad = DensityMatrix::from_matrix(
            sp,
            Array2::from_elem((6, 6), c(0.5, 0.0)),
        )
        .unwrap();
        assert!(bad.validate(&DensityTolerances::default()).is_err());
    }

    proptest! {
        #[test]
        fn hermitian_combination_stays_hermitian(c1 in -10.0f64..10.0, c2 in -10.0f64..10.0) {
            // Real combinations of the quadratures x = a+a† and p = i(a−a†).
            let sp = HilbertSpace::single_mode(8).unwrap();
            let a = QOperator::annihilation(&sp, 0).unwrap();
            let x = a.add(&a.dagger()).unwrap();
            let p = a.sub(&a.dagger()).unwrap().scaled(c(0.0, 1.0));
            let h = compose(&[&x, &p], &[c(c1, 0.0), c(c2, 0.0)]).unwrap();
            prop_assert!(h.max_nonhermiticity() <= 1e-14 * h.max_abs().max(1.0));
        }
    }
}
