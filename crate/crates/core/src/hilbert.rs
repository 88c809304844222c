//! Truncated Fock-space linear algebra for one or two bosonic modes.
//!
//! Two-mode index ordering: the mode-1 occupation varies slowest, so the basis
//! state `|m1, m2⟩` sits at `m1 * n_max + m2`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

pub type C64 = Complex64;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;
pub const NORM_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FockBasis {
    n_max: usize,
    n_modes: usize,
}

impl FockBasis {
    /// Number states `0..n_max` on each of `n_modes` modes.
    pub fn new(n_max: usize, n_modes: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::BasisTooSmall { n_max });
        }
        if !(1..=2).contains(&n_modes) {
            return Err(Error::InvalidModeCount(n_modes));
        }
        Ok(Self { n_max, n_modes })
    }

    pub fn single(n_max: usize) -> Result<Self> {
        Self::new(n_max, 1)
    }

    pub fn two_mode(n_max: usize) -> Result<Self> {
        Self::new(n_max, 2)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        self.n_max.pow(self.n_modes as u32)
    }

    pub fn is_two_mode(&self) -> bool {
        self.n_modes == 2
    }

    /// The single-mode factor of this basis.
    pub fn factor(&self) -> FockBasis {
        FockBasis {
            n_max: self.n_max,
            n_modes: 1,
        }
    }

    /// Index of `|m1, m2⟩` (two modes) or `|m1⟩` (one mode; `m2` must be 0).
    #[inline]
    pub fn index(&self, m1: usize, m2: usize) -> usize {
        debug_assert!(m1 < self.n_max && m2 < self.n_max);
        if self.n_modes == 1 {
            debug_assert_eq!(m2, 0);
            m1
        } else {
            m1 * self.n_max + m2
        }
    }

    /// Occupations `(m1, m2)` of basis state `idx` (`m2 = 0` for one mode).
    #[inline]
    pub fn occupations(&self, idx: usize) -> (usize, usize) {
        if self.n_modes == 1 {
            (idx, 0)
        } else {
            (idx / self.n_max, idx % self.n_max)
        }
    }

    #[inline]
    pub fn occupation(&self, idx: usize, mode: usize) -> usize {
        let (m1, m2) = self.occupations(idx);
        if mode == 0 {
            m1
        } else {
            m2
        }
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            Err(Error::ModeIndexOutOfRange {
                mode,
                n_modes: self.n_modes,
            })
        } else {
            Ok(())
        }
    }
}

/// Truncation that keeps the two-mode squeezed vacuum tail beyond the cut
/// below ~1e-6: `ceil(8 sinh²r + 10)`.
pub fn recommended_n_max(r: f64) -> usize {
    let s = r.sinh();
    (8.0 * s * s + 10.0).ceil() as usize
}

/// Sparse annihilation operator on `mode`, embedded with identity on the other.
pub fn ladder(basis: FockBasis, mode: usize) -> Result<SparseOperator> {
    basis.check_mode(mode)?;
    let dim = basis.dim();
    let mut entries = Vec::with_capacity(dim);
    for col in 0..dim {
        let (m1, m2) = basis.occupations(col);
        let m = if mode == 0 { m1 } else { m2 };
        if m == 0 {
            continue;
        }
        let row = if mode == 0 {
            basis.index(m1 - 1, m2)
        } else {
            basis.index(m1, m2 - 1)
        };
        entries.push((row, col, (m as f64).sqrt()));
    }
    Ok(SparseOperator::new(dim, entries))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeOperator {
    basis: FockBasis,
    elements: DMatrix<C64>,
}

impl ModeOperator {
    pub fn new(basis: FockBasis, elements: DMatrix<C64>) -> Result<Self> {
        let d = basis.dim();
        if elements.nrows() != d || elements.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: elements.nrows().max(elements.ncols()),
            });
        }
        Ok(Self { basis, elements })
    }

    pub fn identity(basis: FockBasis) -> Self {
        Self {
            basis,
            elements: DMatrix::identity(basis.dim(), basis.dim()),
        }
    }

    pub fn from_sparse(basis: FockBasis, op: &SparseOperator) -> Self {
        Self {
            basis,
            elements: op.to_dense(),
        }
    }

    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    pub fn elements(&self) -> &DMatrix<C64> {
        &self.elements
    }

    pub fn into_elements(self) -> DMatrix<C64> {
        self.elements
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self {
            basis: self.basis,
            elements: self.elements.adjoint(),
        }
    }

    /// Matrix product `self · rhs`.
    pub fn compose(&self, rhs: &ModeOperator) -> Result<Self> {
        self.same_basis(rhs)?;
        Ok(Self {
            basis: self.basis,
            elements: &self.elements * &rhs.elements,
        })
    }

    pub fn add(&self, rhs: &ModeOperator) -> Result<Self> {
        self.same_basis(rhs)?;
        Ok(Self {
            basis: self.basis,
            elements: &self.elements + &rhs.elements,
        })
    }

    pub fn sub(&self, rhs: &ModeOperator) -> Result<Self> {
        self.same_basis(rhs)?;
        Ok(Self {
            basis: self.basis,
            elements: &self.elements - &rhs.elements,
        })
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            basis: self.basis,
            elements: &self.elements * c,
        }
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        if self.basis != state.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(PureState {
            basis: self.basis,
            amplitudes: &self.elements * &state.amplitudes,
        })
    }

    /// Largest elementwise deviation between two operators on the same basis.
    pub fn max_abs_diff(&self, rhs: &ModeOperator) -> Result<f64> {
        self.same_basis(rhs)?;
        Ok(max_abs(&(&self.elements - &rhs.elements)))
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs(&(&self.elements - self.elements.adjoint()))
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_residual(&self) -> f64 {
        let d = self.basis.dim();
        max_abs(&(self.elements.adjoint() * &self.elements - DMatrix::<C64>::identity(d, d)))
    }

    /// Matrix exponential.
    ///
    /// The sparsity pattern is split into connected blocks first; each block
    /// goes through nalgebra's scaling-and-squaring Padé exponential.
    pub fn expm(&self) -> Self {
        Self {
            basis: self.basis,
            elements: block_expm(&self.elements),
        }
    }

    /// Embed a single-mode operator on `mode` of a two-mode basis.
    pub fn embed(single: &ModeOperator, target: FockBasis, mode: usize) -> Result<Self> {
        target.check_mode(mode)?;
        if single.basis.n_modes != 1 || single.basis.n_max != target.n_max {
            return Err(Error::BasisMismatch);
        }
        if target.n_modes == 1 {
            return Ok(single.clone());
        }
        let n = target.n_max;
        let id = DMatrix::<C64>::identity(n, n);
        let elements = if mode == 0 {
            single.elements.kronecker(&id)
        } else {
            id.kronecker(&single.elements)
        };
        Ok(Self {
            basis: target,
            elements,
        })
    }

    fn same_basis(&self, rhs: &ModeOperator) -> Result<()> {
        if self.basis == rhs.basis {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }
}

/// Annihilation operator `b` on `mode`: `⟨m−1|b|m⟩ = √m`.
pub fn annihilation_op(basis: FockBasis, mode: usize) -> Result<ModeOperator> {
    Ok(ModeOperator::from_sparse(basis, &ladder(basis, mode)?))
}

pub fn creation_op(basis: FockBasis, mode: usize) -> Result<ModeOperator> {
    Ok(ModeOperator::from_sparse(basis, &ladder(basis, mode)?.adjoint()))
}

/// `b†b` on `mode`.
pub fn number_op(basis: FockBasis, mode: usize) -> Result<ModeOperator> {
    let b = ladder(basis, mode)?;
    Ok(ModeOperator::from_sparse(basis, &b.adjoint().compose(&b)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    basis: FockBasis,
    amplitudes: DVector<C64>,
}

impl PureState {
    pub fn new(basis: FockBasis, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::param("amplitudes", "non-finite entry"));
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn vacuum(basis: FockBasis) -> Self {
        Self::fock(basis, 0, 0)
    }

    /// `|m1⟩` or `|m1, m2⟩`.
    pub fn fock(basis: FockBasis, m1: usize, m2: usize) -> Self {
        let mut amplitudes = DVector::zeros(basis.dim());
        amplitudes[basis.index(m1, m2)] = ONE;
        Self { basis, amplitudes }
    }

    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) {
            return Err(Error::param("amplitudes", "zero norm"));
        }
        Ok(Self {
            basis: self.basis,
            amplitudes: self.amplitudes.unscale(n),
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            basis: self.basis,
            elements: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    basis: FockBasis,
    elements: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates shape, finiteness and Hermiticity (within [`HERMITIAN_TOL`]).
    /// Positivity is checked separately by [`DensityMatrix::min_eigenvalue`].
    pub fn new(basis: FockBasis, elements: DMatrix<C64>) -> Result<Self> {
        let d = basis.dim();
        if elements.nrows() != d || elements.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: elements.nrows().max(elements.ncols()),
            });
        }
        if elements.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::param("rho", "non-finite entry"));
        }
        let rho = Self { basis, elements };
        let dev = rho.hermiticity_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(rho)
    }

    pub(crate) fn from_raw(basis: FockBasis, elements: DMatrix<C64>) -> Self {
        Self { basis, elements }
    }

    pub fn vacuum(basis: FockBasis) -> Self {
        PureState::vacuum(basis).to_density()
    }

    /// Single-mode thermal state with geometric populations `n̄^m/(1+n̄)^{m+1}`,
    /// cut at `n_max` and renormalized.
    pub fn thermal(basis: FockBasis, nbar: f64) -> Result<Self> {
        if basis.n_modes != 1 {
            return Err(Error::InvalidModeCount(basis.n_modes));
        }
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return Err(Error::param("nbar", "must be finite and >= 0"));
        }
        let ratio = nbar / (1.0 + nbar);
        let mut elements = DMatrix::zeros(basis.dim(), basis.dim());
        let mut p = 1.0 / (1.0 + nbar);
        for m in 0..basis.n_max {
            elements[(m, m)] = C64::new(p, 0.0);
            p *= ratio;
        }
        let rho = Self { basis, elements };
        rho.normalized()
    }

    /// `ρ₁ ⊗ ρ₂` for two single-mode states of equal truncation.
    pub fn product(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<Self> {
        if rho1.basis.n_modes != 1 || rho1.basis != rho2.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(Self {
            basis: FockBasis::two_mode(rho1.basis.n_max)?,
            elements: rho1.elements.kronecker(&rho2.elements),
        })
    }

    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    pub fn elements(&self) -> &DMatrix<C64> {
        &self.elements
    }

    pub fn trace(&self) -> C64 {
        self.elements.trace()
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace().re;
        if !(t > 0.0) {
            return Err(Error::param("rho", "non-positive trace"));
        }
        Ok(Self {
            basis: self.basis,
            elements: self.elements.unscale(t),
        })
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.elements.nrows();
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                dev = dev.max((self.elements[(i, j)] - self.elements[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ_ij ρ_ij ρ_ji = Σ |ρ_ij|² for Hermitian ρ
        self.elements.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `Tr(ρ · op)`.
    pub fn expectation(&self, op: &ModeOperator) -> Result<C64> {
        if self.basis != op.basis {
            return Err(Error::BasisMismatch);
        }
        let d = self.basis.dim();
        let mut acc = ZERO;
        for i in 0..d {
            for j in 0..d {
                acc += self.elements[(i, j)] * op.elements[(j, i)];
            }
        }
        Ok(acc)
    }

    /// `Tr(ρ · op)` for a sparse operator on the same space.
    pub fn expectation_sparse(&self, op: &SparseOperator) -> Result<C64> {
        if op.dim() != self.basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                found: op.dim(),
            });
        }
        Ok(op.trace_against(&self.elements))
    }

    /// Reduced state of `keep_mode` (0 or 1).
    pub fn partial_trace(&self, keep_mode: usize) -> Result<DensityMatrix> {
        if self.basis.n_modes != 2 {
            return Err(Error::NotTwoMode);
        }
        self.basis.check_mode(keep_mode)?;
        let n = self.basis.n_max;
        let mut out = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                let mut acc = ZERO;
                for s in 0..n {
                    let (i, j) = if keep_mode == 0 {
                        (self.basis.index(a, s), self.basis.index(b, s))
                    } else {
                        (self.basis.index(s, a), self.basis.index(s, b))
                    };
                    acc += self.elements[(i, j)];
                }
                out[(a, b)] = acc;
            }
        }
        Ok(DensityMatrix {
            basis: self.basis.factor(),
            elements: out,
        })
    }

    /// Smallest eigenvalue of the Hermitian part.
    ///
    /// Block structure of the nonzero pattern is exploited, so states confined
    /// to a fixed `m1 − m2` sector stay cheap at large truncations.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.elements + self.elements.adjoint()).scale(0.5);
        let mut min = f64::INFINITY;
        for block in connected_blocks(&herm) {
            let sub = extract(&herm, &block);
            let ev = sub.symmetric_eigenvalues();
            for v in ev.iter() {
                min = min.min(*v);
            }
        }
        min
    }

    /// Largest total population, over modes, in the top `fraction` of Fock
    /// levels (at least one level).
    pub fn tail_population(&self, fraction: f64) -> f64 {
        let n = self.basis.n_max;
        let levels = ((fraction * n as f64).ceil() as usize).clamp(1, n);
        let cut = n - levels;
        let mut worst: f64 = 0.0;
        for mode in 0..self.basis.n_modes {
            let p: f64 = (0..self.basis.dim())
                .filter(|&i| self.basis.occupation(i, mode) >= cut)
                .map(|i| self.elements[(i, i)].re)
                .sum();
            worst = worst.max(p);
        }
        worst
    }
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Connected components of the (symmetrized) nonzero pattern of `m`.
pub(crate) fn connected_blocks(m: &DMatrix<C64>) -> Vec<Vec<usize>> {
    let d = m.nrows();
    let mut parent: Vec<usize> = (0..d).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for j in 0..d {
        for i in 0..d {
            if i != j && m[(i, j)] != ZERO {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; d];
    for i in 0..d {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

fn extract(m: &DMatrix<C64>, idx: &[usize]) -> DMatrix<C64> {
    DMatrix::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])])
}

pub(crate) fn block_expm(m: &DMatrix<C64>) -> DMatrix<C64> {
    let d = m.nrows();
    let mut out = DMatrix::zeros(d, d);
    for block in connected_blocks(m) {
        let e = extract(m, &block).exp();
        for (a, &i) in block.iter().enumerate() {
            for (b, &j) in block.iter().enumerate() {
                out[(i, j)] = e[(a, b)];
            }
        }
    }
    out
}
