//! Target states and phase-space tools: the two-mode squeezed vacuum, the
//! squeezing unitary, displacement and parity operators, and Wigner functions.
//!
//! Wigner variables are `q = Q/2`, `p = P/2` with `α = q + ip`, i.e.
//! `W(α₁, α₂) = (2/π)² Tr[ρ D₁(α₁)D₂(α₂) Π₁Π₂ D₂†(α₂)D₁†(α₁)]`, normalized
//! to one over `dq₁dp₁dq₂dp₂`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hilbert::{ladder, DensityMatrix, FockBasis, ModeOperator, PureState, C64};
use crate::par::{self, Execution};

/// Population in the top 10% of Fock levels above which phase-space results
/// are flagged as truncation-limited.
pub const TRUNCATION_WARN_POPULATION: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TmssSpec {
    r: f64,
}

impl TmssSpec {
    pub fn new(r: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::param("r", "squeeze parameter must be finite and >= 0"));
        }
        Ok(Self { r })
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

/// Untruncated amplitude of `|m, m⟩`: `(−tanh r)^m / cosh r`.
pub fn tmss_coefficient(spec: TmssSpec, m: usize) -> f64 {
    (-spec.r.tanh()).powi(m as i32) / spec.r.cosh()
}

/// Two-mode squeezed vacuum on a truncated basis, renormalized.
pub fn tmss_fock(spec: TmssSpec, basis: FockBasis) -> Result<PureState> {
    if !basis.is_two_mode() {
        return Err(Error::NotTwoMode);
    }
    let mut amps = DVector::zeros(basis.dim());
    for m in 0..basis.n_max() {
        amps[basis.index(m, m)] = C64::new(tmss_coefficient(spec, m), 0.0);
    }
    PureState::new(basis, amps)?.normalized()
}

/// `S(r) = exp[r(b₁b₂ − b₁†b₂†)]` on the truncated two-mode space.
pub fn squeeze_unitary(spec: TmssSpec, basis: FockBasis) -> Result<ModeOperator> {
    if !basis.is_two_mode() {
        return Err(Error::NotTwoMode);
    }
    let b1 = ladder(basis, 0)?;
    let b2 = ladder(basis, 1)?;
    let pair = b1.compose(&b2);
    let gen = ModeOperator::from_sparse(basis, &pair)
        .sub(&ModeOperator::from_sparse(basis, &pair.adjoint()))?
        .scale(C64::new(spec.r, 0.0));
    Ok(gen.expm())
}

/// `D(α) = exp(αb† − α*b)` on `mode`, exponentiated in the truncated space.
pub fn displacement_op(alpha: C64, basis: FockBasis, mode: usize) -> Result<ModeOperator> {
    basis.check_mode(mode)?;
    let single = basis.factor();
    let b = ModeOperator::from_sparse(single, &ladder(single, 0)?);
    let gen = b.adjoint().scale(alpha).sub(&b.scale(alpha.conj()))?;
    ModeOperator::embed(&gen.expm(), basis, mode)
}

/// Parity `(−1)^m` of the occupation of `mode`.
pub fn parity_op(basis: FockBasis, mode: usize) -> Result<ModeOperator> {
    basis.check_mode(mode)?;
    let d = basis.dim();
    let diag = DVector::from_fn(d, |i, _| {
        let m = basis.occupation(i, mode);
        C64::new(if m % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
    });
    ModeOperator::new(basis, DMatrix::from_diagonal(&diag))
}

/// `⟨m|D(β)|n⟩` for `m, n < n` of the untruncated displacement operator,
/// from the associated-Laguerre closed form.
pub fn displacement_elements(beta: C64, n: usize) -> DMatrix<C64> {
    let x = beta.norm_sqr();
    if x == 0.0 {
        return DMatrix::identity(n, n);
    }
    let ln_abs = beta.norm().ln();
    let theta = beta.arg();
    let mut ln_fact = vec![0.0; n + 1];
    for k in 1..=n {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    let mut out = DMatrix::zeros(n, n);
    for lo in 0..n {
        for hi in lo..n {
            let k = hi - lo;
            let lag = laguerre(lo, k as f64, x);
            let mag = (0.5 * (ln_fact[lo] - ln_fact[hi]) + k as f64 * ln_abs - 0.5 * x).exp() * lag;
            // ⟨hi|D|lo⟩ carries β^k, ⟨lo|D|hi⟩ carries (−β*)^k
            out[(hi, lo)] = C64::from_polar(mag, k as f64 * theta);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            out[(lo, hi)] = C64::from_polar(sign * mag, -(k as f64) * theta);
        }
    }
    out
}

/// Generalized Laguerre polynomial `L_n^{(a)}(x)` by upward recurrence.
fn laguerre(n: usize, a: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + a - x) * cur - (jf + a) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Single-mode displaced parity `D(α)ΠD†(α) = D(2α)Π`, untruncated matrix
/// elements restricted to `n` levels.
pub fn displaced_parity_kernel(alpha: C64, n: usize) -> DMatrix<C64> {
    let mut k = displacement_elements(alpha * 2.0, n);
    for col in (1..n).step_by(2) {
        for row in 0..n {
            k[(row, col)] = -k[(row, col)];
        }
    }
    k
}

/// `Tr[ρ (K₁ ⊗ K₂)]` for single-mode kernels on a two-mode state.
pub(crate) fn contract_two_mode(rho: &DensityMatrix, k1: &DMatrix<C64>, k2: &DMatrix<C64>) -> C64 {
    let basis = rho.basis();
    let n = basis.n_max();
    let e = rho.elements();
    let mut total = C64::new(0.0, 0.0);
    for m1 in 0..n {
        for n1 in 0..n {
            let a = k1[(m1, n1)];
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            let mut inner = C64::new(0.0, 0.0);
            for m2 in 0..n {
                let col = basis.index(m1, m2);
                for n2 in 0..n {
                    inner += e[(basis.index(n1, n2), col)] * k2[(m2, n2)];
                }
            }
            total += a * inner;
        }
    }
    total
}

/// `⟨D₁(α)D₂(β) Π₁Π₂ D₂†(β)D₁†(α)⟩` for a two-mode state.
pub fn displaced_parity_expectation(rho: &DensityMatrix, alpha: C64, beta: C64) -> Result<f64> {
    if !rho.basis().is_two_mode() {
        return Err(Error::NotTwoMode);
    }
    let n = rho.basis().n_max();
    let v = contract_two_mode(
        rho,
        &displaced_parity_kernel(alpha, n),
        &displaced_parity_kernel(beta, n),
    );
    Ok(v.re)
}

/// Same as [`displaced_parity_expectation`] for a pure state, in `O(n³)`.
pub fn displaced_parity_expectation_pure(psi: &PureState, alpha: C64, beta: C64) -> Result<f64> {
    let basis = psi.basis();
    if !basis.is_two_mode() {
        return Err(Error::NotTwoMode);
    }
    let n = basis.n_max();
    // Ψ[m1, m2] = ψ(m1·n + m2); ⟨ψ|K₁⊗K₂|ψ⟩ = Tr(Ψ† K₁ Ψ K₂ᵀ)
    let psi_mat = DMatrix::from_fn(n, n, |i, j| psi.amplitudes()[basis.index(i, j)]);
    let k1 = displaced_parity_kernel(alpha, n);
    let k2 = displaced_parity_kernel(beta, n);
    let t = psi_mat.adjoint() * k1 * &psi_mat * k2.transpose();
    Ok(t.trace().re)
}

/// Closed-form Wigner function of the two-mode squeezed vacuum.
pub fn wigner_analytic(spec: TmssSpec, q1: f64, p1: f64, q2: f64, p2: f64) -> f64 {
    let e2r = (2.0 * spec.r).exp();
    let squeezed = (q1 + q2).powi(2) + (p1 - p2).powi(2);
    let anti = (q1 - q2).powi(2) + (p1 + p2).powi(2);
    4.0 / (PI * PI) * (-squeezed * e2r).exp() * (-anti / e2r).exp()
}

/// Product grid over `(q₁, p₁, q₂, p₂)`; `values` is indexed with `q₁`
/// slowest and `p₂` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    pub q1: Vec<f64>,
    pub p1: Vec<f64>,
    pub q2: Vec<f64>,
    pub p2: Vec<f64>,
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn new(q1: Vec<f64>, p1: Vec<f64>, q2: Vec<f64>, p2: Vec<f64>) -> Self {
        let len = q1.len() * p1.len() * q2.len() * p2.len();
        Self {
            q1,
            p1,
            q2,
            p2,
            values: vec![0.0; len],
        }
    }

    /// Same `n`-point axis on all four coordinates.
    pub fn cube(axis: &[f64]) -> Self {
        Self::new(axis.to_vec(), axis.to_vec(), axis.to_vec(), axis.to_vec())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coordinates of flat point `idx`.
    pub fn point(&self, idx: usize) -> [f64; 4] {
        let (a, b, c, d) = self.split(idx);
        [self.q1[a], self.p1[b], self.q2[c], self.p2[d]]
    }

    fn split(&self, idx: usize) -> (usize, usize, usize, usize) {
        let d = idx % self.p2.len();
        let rest = idx / self.p2.len();
        let c = rest % self.q2.len();
        let rest = rest / self.q2.len();
        let b = rest % self.p1.len();
        let a = rest / self.p1.len();
        (a, b, c, d)
    }
}

pub fn wigner_analytic_grid(spec: TmssSpec, grid: &WignerGrid, exec: Execution) -> WignerGrid {
    let values = par::map_range(grid.len(), exec, |i| {
        let [q1, p1, q2, p2] = grid.point(i);
        wigner_analytic(spec, q1, p1, q2, p2)
    });
    WignerGrid {
        values,
        ..grid.clone()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WignerResult {
    pub grid: WignerGrid,
    pub truncation_warning: Option<String>,
}

/// Wigner function of a two-mode density matrix on `grid`.
pub fn wigner_from_density(rho: &DensityMatrix, grid: &WignerGrid, exec: Execution) -> Result<WignerResult> {
    let basis = rho.basis();
    if !basis.is_two_mode() {
        return Err(Error::NotTwoMode);
    }
    let n = basis.n_max();
    let kernels = |qs: &[f64], ps: &[f64]| -> Vec<DMatrix<C64>> {
        par::map_range(qs.len() * ps.len(), exec, |i| {
            let (q, p) = (qs[i / ps.len()], ps[i % ps.len()]);
            displaced_parity_kernel(C64::new(q, p), n)
        })
    };
    let k1 = kernels(&grid.q1, &grid.p1);
    let k2 = kernels(&grid.q2, &grid.p2);
    let norm = 4.0 / (PI * PI);
    let values = par::map_range(grid.len(), exec, |i| {
        let (a, b, c, d) = grid.split(i);
        let v = contract_two_mode(rho, &k1[a * grid.p1.len() + b], &k2[c * grid.p2.len() + d]);
        norm * v.re
    });
    let tail = rho.tail_population(0.1);
    let truncation_warning = (tail > TRUNCATION_WARN_POPULATION).then(|| {
        let msg = format!("population {tail:.3e} in the top 10% of Fock levels; Wigner values may be truncation-limited");
        log::warn!("{msg}");
        msg
    });
    Ok(WignerResult {
        grid: WignerGrid {
            values,
            ..grid.clone()
        },
        truncation_warning,
    })
}
