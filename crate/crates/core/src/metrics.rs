//! Entanglement and nonlocality diagnostics.
//!
//! Displaced-parity correlations follow the phase-space convention of
//! [`crate::states`]: `E(α, β) = (π²/4) W(α, β)`. The CHSH combination is
//! `B = E(α₁,β₁) + E(α₁,β₂) + E(α₂,β₁) − E(α₂,β₂)`, bounded by 2 for local
//! hidden-variable models.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::CovarianceState;
use crate::hilbert::{number_op, DensityMatrix, FockBasis, PureState, C64};
use crate::par::{self, Execution};
use crate::states::{
    displaced_parity_expectation, displaced_parity_kernel, tmss_fock, TmssSpec, TRUNCATION_WARN_POPULATION,
};

/// Default bound on displacement magnitudes accepted by parity measurements.
pub const MAX_DISPLACEMENT: f64 = 3.0;

/// Vacuum level of `Var(Q₁+Q₂) + Var(P₁−P₂)`; lower values certify
/// entanglement.
pub const EPR_SEPARABLE_BOUND: f64 = 4.0;

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity(rho: &DensityMatrix, target: &PureState) -> Result<f64> {
    if rho.basis() != target.basis() {
        return Err(Error::BasisMismatch);
    }
    let v = target.amplitudes();
    let f = (v.adjoint() * rho.elements() * v)[(0, 0)].re;
    Ok(f.clamp(0.0, 1.0))
}

/// `⟨b†b⟩` of one mode.
pub fn mean_phonon(rho: &DensityMatrix, mode: usize) -> Result<f64> {
    let n = number_op(rho.basis(), mode)?;
    Ok(rho.expectation(&n)?.re.max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EprCriterion {
    pub value: f64,
    pub entangled: bool,
}

/// Sum criterion `Var(Q₁+Q₂) + Var(P₁−P₂) < 4`.
pub fn epr_criterion(var_sum_q: f64, var_diff_p: f64) -> Result<EprCriterion> {
    if !(var_sum_q >= 0.0) || !(var_diff_p >= 0.0) {
        return Err(Error::param("variance", "must be >= 0"));
    }
    let value = var_sum_q + var_diff_p;
    Ok(EprCriterion {
        value,
        entangled: value < EPR_SEPARABLE_BOUND,
    })
}

fn check_displacement(name: &'static str, z: C64, bound: f64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::param(name, "must be finite"));
    }
    if z.norm() > bound {
        return Err(Error::param(name, format!("|{name}| = {} exceeds {bound}", z.norm())));
    }
    Ok(())
}

fn warn_truncation(rho: &DensityMatrix) {
    let tail = rho.tail_population(0.1);
    if tail > TRUNCATION_WARN_POPULATION {
        log::warn!("population {tail:.3e} in the top 10% of Fock levels; parity correlations may be truncation-limited");
    }
}

/// `E(α, β) = ⟨D₁(α)D₂(β) Π₁Π₂ D₂†(β)D₁†(α)⟩`.
pub fn parity_correlation(rho: &DensityMatrix, alpha: C64, beta: C64) -> Result<f64> {
    check_displacement("alpha", alpha, MAX_DISPLACEMENT)?;
    check_displacement("beta", beta, MAX_DISPLACEMENT)?;
    warn_truncation(rho);
    displaced_parity_expectation(rho, alpha, beta)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellSettings {
    alpha1: C64,
    alpha2: C64,
    beta1: C64,
    beta2: C64,
}

impl BellSettings {
    pub fn new(alpha1: C64, alpha2: C64, beta1: C64, beta2: C64) -> Result<Self> {
        Self::with_bound(alpha1, alpha2, beta1, beta2, MAX_DISPLACEMENT)
    }

    pub fn with_bound(alpha1: C64, alpha2: C64, beta1: C64, beta2: C64, bound: f64) -> Result<Self> {
        check_displacement("alpha1", alpha1, bound)?;
        check_displacement("alpha2", alpha2, bound)?;
        check_displacement("beta1", beta1, bound)?;
        check_displacement("beta2", beta2, bound)?;
        Ok(Self {
            alpha1,
            alpha2,
            beta1,
            beta2,
        })
    }

    /// `α₁ = β₁ = 0`, `α₂ = √J`, `β₂ = sign·√J`.
    pub fn one_parameter(j: f64, beta_sign: f64) -> Result<Self> {
        if !(j >= 0.0) {
            return Err(Error::param("J", "must be >= 0"));
        }
        let s = j.sqrt();
        let zero = C64::new(0.0, 0.0);
        Self::new(zero, C64::new(s, 0.0), zero, C64::new(beta_sign.signum() * s, 0.0))
    }

    pub fn alpha1(&self) -> C64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> C64 {
        self.alpha2
    }

    pub fn beta1(&self) -> C64 {
        self.beta1
    }

    pub fn beta2(&self) -> C64 {
        self.beta2
    }

    /// All four settings multiplied by `e^{iφ}`.
    pub fn rotated(&self, phi: f64) -> Self {
        let u = C64::from_polar(1.0, phi);
        Self {
            alpha1: self.alpha1 * u,
            alpha2: self.alpha2 * u,
            beta1: self.beta1 * u,
            beta2: self.beta2 * u,
        }
    }
}

pub fn chsh_value(rho: &DensityMatrix, s: &BellSettings) -> Result<f64> {
    warn_truncation(rho);
    let e = |a, b| displaced_parity_expectation(rho, a, b);
    Ok(e(s.alpha1, s.beta1)? + e(s.alpha1, s.beta2)? + e(s.alpha2, s.beta1)? - e(s.alpha2, s.beta2)?)
}

/// CHSH value of a pure state, `O(n³)` per correlator.
pub fn chsh_value_pure(psi: &PureState, s: &BellSettings) -> Result<f64> {
    let basis = psi.basis();
    if !basis.is_two_mode() {
        return Err(Error::NotTwoMode);
    }
    let n = basis.n_max();
    let psi_mat = DMatrix::from_fn(n, n, |i, j| psi.amplitudes()[basis.index(i, j)]);
    let ka = [displaced_parity_kernel(s.alpha1, n), displaced_parity_kernel(s.alpha2, n)];
    let kb = [displaced_parity_kernel(s.beta1, n), displaced_parity_kernel(s.beta2, n)];
    // Tr(Ψ† K₁ Ψ K₂ᵀ)
    let left: Vec<DMatrix<C64>> = ka.iter().map(|k| psi_mat.adjoint() * k * &psi_mat).collect();
    let e = |i: usize, j: usize| (&left[i] * kb[j].transpose()).trace().re;
    Ok(e(0, 0) + e(0, 1) + e(1, 0) - e(1, 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BellState {
    Tmss,
    Vacuum,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BellSweepSpec {
    pub r_values: Vec<f64>,
    pub j_values: Vec<f64>,
    /// Sign of `β₂` relative to `α₂`.
    pub beta_sign: f64,
    pub n_max: usize,
    pub state: BellState,
}

impl Default for BellSweepSpec {
    /// `r ∈ {0.1, …, 1.2}` in steps of 0.1, `J ∈ {0.01, …, 0.5}` in steps of
    /// 0.01, `β₂ = +√J`, 40 levels per mode.
    fn default() -> Self {
        Self {
            r_values: (1..=12).map(|k| k as f64 / 10.0).collect(),
            j_values: (1..=50).map(|k| k as f64 / 100.0).collect(),
            beta_sign: 1.0,
            n_max: 40,
            state: BellState::Tmss,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BellRow {
    pub r: f64,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "B")]
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BellSweepResult {
    pub rows: Vec<BellRow>,
    pub max: BellRow,
}

/// CHSH value over the `(r, J)` grid with one-parameter settings; rows are
/// ordered with `r` slowest.
pub fn bell_sweep(spec: &BellSweepSpec, exec: Execution) -> Result<BellSweepResult> {
    if spec.r_values.is_empty() || spec.j_values.is_empty() {
        return Err(Error::param("grid", "r and J grids must be non-empty"));
    }
    if spec.j_values.iter().any(|j| !(*j >= 0.0) || *j > MAX_DISPLACEMENT.powi(2)) {
        return Err(Error::param("J", "values must lie in [0, 9] so that |√J| stays within the displacement bound"));
    }
    if !(spec.beta_sign == 1.0 || spec.beta_sign == -1.0) {
        return Err(Error::param("beta_sign", "must be +1 or -1"));
    }
    let basis = FockBasis::two_mode(spec.n_max)?;
    let states: Vec<PureState> = spec
        .r_values
        .iter()
        .map(|&r| match spec.state {
            BellState::Tmss => tmss_fock(TmssSpec::new(r)?, basis),
            BellState::Vacuum => Ok(PureState::vacuum(basis)),
        })
        .collect::<Result<_>>()?;
    for (psi, r) in states.iter().zip(&spec.r_values) {
        warn_truncation_pure(psi, *r);
    }
    let nj = spec.j_values.len();
    let rows = par::map_range(spec.r_values.len() * nj, exec, |i| -> Result<BellRow> {
        let (ri, ji) = (i / nj, i % nj);
        let j = spec.j_values[ji];
        let settings = BellSettings::one_parameter(j, spec.beta_sign)?;
        Ok(BellRow {
            r: spec.r_values[ri],
            j,
            b: chsh_value_pure(&states[ri], &settings)?,
        })
    });
    let rows: Vec<BellRow> = rows.into_iter().collect::<Result<_>>()?;
    let max = *rows
        .iter()
        .max_by(|a, b| a.b.partial_cmp(&b.b).unwrap())
        .unwrap();
    Ok(BellSweepResult { rows, max })
}

fn warn_truncation_pure(psi: &PureState, r: f64) {
    let basis = psi.basis();
    let cut = basis.n_max() - (basis.n_max() as f64 * 0.1).ceil() as usize;
    let tail: f64 = (0..basis.dim())
        .filter(|&i| basis.occupation(i, 0) >= cut)
        .map(|i| psi.amplitudes()[i].norm_sqr())
        .sum();
    if tail > TRUNCATION_WARN_POPULATION {
        log::warn!("r = {r}: population {tail:.3e} in the top 10% of Fock levels");
    }
}

/// Base-2 logarithmic negativity from the smallest symplectic eigenvalue of
/// the partially transposed covariance.
pub fn log_negativity(state: &CovarianceState) -> Result<f64> {
    if state.n_modes() != 2 {
        return Err(Error::NotTwoMode);
    }
    if !state.is_physical() {
        return Err(Error::Unphysical(format!(
            "covariance violates the uncertainty relation (margin {:.3e})",
            state.physicality_margin()
        )));
    }
    let s = state.cov();
    let block = |r: usize, c: usize| s[(r, c)] * s[(r + 1, c + 1)] - s[(r, c + 1)] * s[(r + 1, c)];
    let (det_a, det_b, det_c) = (block(0, 0), block(2, 2), block(0, 2));
    // partial transposition flips the sign of det C
    let delta = det_a + det_b - 2.0 * det_c;
    let det = s.determinant();
    let disc = (delta * delta - 4.0 * det).max(0.0);
    let nu_sq = (delta - disc.sqrt()) / 2.0;
    let nu = nu_sq.max(0.0).sqrt();
    Ok((-nu.log2()).max(0.0))
}
