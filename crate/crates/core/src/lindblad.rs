//! Two-mode master equation for the motional modes driven by correlated
//! (squeezed) noise:
//!
//! ```text
//! dρ/dt = Σ_j Γ(N+1) D[b_j]ρ + ΓN D[b_j†]ρ
//!       + 2ΓM (b₁ρb₂ + b₂ρb₁ − b₁b₂ρ − ρb₁b₂)
//!       + 2ΓM (b₁†ρb₂† + b₂†ρb₁† − b₁†b₂†ρ − ρb₁†b₂†)
//! ```
//!
//! with `D[L]ρ = 2LρL† − L†Lρ − ρL†L`. An optional heating channel adds
//! `h(n_th+1) D[b_j] + h·n_th D[b_j†]` with `n_th = 1` on both modes.
//!
//! The generator conserves the charge `(m₁−m₂) − (k₁−k₂)` of a matrix element
//! `|m₁m₂⟩⟨k₁k₂|`, so it is stored one charge sector at a time.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::blocktri::BlockTridiagonal;
use crate::error::{Error, Result};
use crate::gaussian::{epr_variances, CovarianceState, SecondMoments};
use crate::hilbert::{ladder, DensityMatrix, FockBasis, PureState, C64, POSITIVITY_TOL};
use crate::nopa::NopaParams;
use crate::par::Execution;
use crate::sparse::{CsrMatrix, SparseOperator};

/// Thermal occupation of the optional heating reservoir.
pub const HEATING_OCCUPATION: f64 = 1.0;

/// Default generator-residual target for steady states (Frobenius norm).
pub const STEADY_STATE_TOL: f64 = 1e-8;

/// Population of the top Fock level above which a steady state is flagged.
pub const TOP_LEVEL_WARN: f64 = 1e-4;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LindbladModel {
    gamma: f64,
    n_param: f64,
    m_param: f64,
    heating_rate: f64,
}

impl LindbladModel {
    /// Requires `Γ > 0`, `N ≥ 0` and `0 ≤ M ≤ √(N(N+1))`.
    pub fn new(gamma: f64, n_param: f64, m_param: f64) -> Result<Self> {
        let model = Self {
            gamma,
            n_param,
            m_param,
            heating_rate: 0.0,
        };
        model.validate()?;
        Ok(model)
    }

    /// Bath parameters taken from the amplifier in the white-noise limit.
    pub fn from_nopa(nopa: &NopaParams, gamma: f64) -> Result<Self> {
        let (n, m) = nopa.effective_n_m();
        // M = √(N(N+1)) up to rounding; clamp onto the physical boundary
        let m = m.min((n * (n + 1.0)).sqrt());
        Self::new(gamma, n, m)
    }

    /// Both sites must share one coupling rate.
    pub fn from_site_rates(gamma_1: f64, gamma_2: f64, n_param: f64, m_param: f64) -> Result<Self> {
        if gamma_1 != gamma_2 {
            return Err(Error::param(
                "gamma",
                format!("unequal site rates ({gamma_1} vs {gamma_2}) are not supported"),
            ));
        }
        Self::new(gamma_1, n_param, m_param)
    }

    pub fn with_heating(mut self, heating_rate: f64) -> Result<Self> {
        self.heating_rate = heating_rate;
        self.validate()?;
        Ok(self)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_param(&self) -> f64 {
        self.n_param
    }

    pub fn m_param(&self) -> f64 {
        self.m_param
    }

    pub fn heating_rate(&self) -> f64 {
        self.heating_rate
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::param("gamma", "must be finite and > 0"));
        }
        if !(self.n_param >= 0.0) || !self.n_param.is_finite() {
            return Err(Error::param("n", "must be finite and >= 0"));
        }
        let bound = (self.n_param * (self.n_param + 1.0)).sqrt();
        if !(self.m_param >= 0.0) || self.m_param > bound * (1.0 + 1e-12) {
            return Err(Error::Unphysical(format!(
                "M = {} outside [0, sqrt(N(N+1))] = [0, {bound}]",
                self.m_param
            )));
        }
        if !(self.heating_rate >= 0.0) || !self.heating_rate.is_finite() {
            return Err(Error::param("heating_rate", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// `(m₁−m₂) − (k₁−k₂)` of the element `|row⟩⟨col|`.
#[inline]
pub fn element_charge(basis: FockBasis, row: usize, col: usize) -> i64 {
    let (m1, m2) = basis.occupations(row);
    let (k1, k2) = basis.occupations(col);
    (m1 as i64 - m2 as i64) - (k1 as i64 - k2 as i64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sector {
    Full,
    Charge(i64),
}

/// One `c · A ρ B` contribution to the generator.
struct Term {
    coeff: f64,
    left: SparseOperator,
    right: SparseOperator,
}

fn generator_terms(model: &LindbladModel, basis: FockBasis) -> Result<Vec<Term>> {
    let d = basis.dim();
    let id = SparseOperator::identity(d);
    let b = [ladder(basis, 0)?, ladder(basis, 1)?];
    let bd = [b[0].adjoint(), b[1].adjoint()];
    let (g, n, m, h) = (model.gamma, model.n_param, model.m_param, model.heating_rate);
    let down = g * (n + 1.0) + h * (HEATING_OCCUPATION + 1.0);
    let up = g * n + h * HEATING_OCCUPATION;

    let mut terms = Vec::new();
    let mut push = |coeff: f64, left: &SparseOperator, right: &SparseOperator| {
        if coeff != 0.0 {
            terms.push(Term {
                coeff,
                left: left.clone(),
                right: right.clone(),
            });
        }
    };
    for j in 0..2 {
        let nb = bd[j].compose(&b[j]);
        let bbd = b[j].compose(&bd[j]);
        push(2.0 * down, &b[j], &bd[j]);
        push(-down, &nb, &id);
        push(-down, &id, &nb);
        push(2.0 * up, &bd[j], &b[j]);
        push(-up, &bbd, &id);
        push(-up, &id, &bbd);
    }
    let c = 2.0 * g * m;
    let pair = b[0].compose(&b[1]);
    let pair_d = pair.adjoint();
    push(c, &b[0], &b[1]);
    push(c, &b[1], &b[0]);
    push(-c, &pair, &id);
    push(-c, &id, &pair);
    push(c, &bd[0], &bd[1]);
    push(c, &bd[1], &bd[0]);
    push(-c, &pair_d, &id);
    push(-c, &id, &pair_d);
    Ok(terms)
}

/// Generator restricted to one charge sector (or the whole space), acting on
/// row-major vectorized density matrices.
#[derive(Clone, Debug)]
pub struct Superoperator {
    basis: FockBasis,
    sector: Sector,
    /// Row-major flat index `row·d + col` of every coordinate.
    elements: Vec<usize>,
    matrix: CsrMatrix,
}

impl Superoperator {
    pub fn basis(&self) -> FockBasis {
        self.basis
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// `(row, col)` of coordinate `pos`.
    pub fn element(&self, pos: usize) -> (usize, usize) {
        let d = self.basis.dim();
        (self.elements[pos] / d, self.elements[pos] % d)
    }

    pub fn vectorize(&self, rho: &DensityMatrix) -> Vec<C64> {
        let e = rho.elements();
        (0..self.len())
            .map(|p| {
                let (r, c) = self.element(p);
                e[(r, c)]
            })
            .collect()
    }

    /// Dense matrix with the sector coordinates filled in, zeros elsewhere.
    pub fn devectorize(&self, v: &[C64]) -> DMatrix<C64> {
        let d = self.basis.dim();
        let mut m = DMatrix::zeros(d, d);
        self.scatter_into(v, &mut m);
        m
    }

    fn scatter_into(&self, v: &[C64], m: &mut DMatrix<C64>) {
        for (p, &z) in v.iter().enumerate() {
            let (r, c) = self.element(p);
            m[(r, c)] = z;
        }
    }

    pub fn apply(&self, v: &[C64], exec: Execution) -> Vec<C64> {
        self.matrix.mul_vec(v, exec)
    }

    /// `L(ρ)`, keeping only the part of `ρ` inside this sector.
    pub fn apply_to_density(&self, rho: &DensityMatrix) -> Result<DMatrix<C64>> {
        if rho.basis() != self.basis {
            return Err(Error::BasisMismatch);
        }
        let out = self.apply(&self.vectorize(rho), Execution::default());
        Ok(self.devectorize(&out))
    }

    /// `‖L(ρ)‖_F` restricted to this sector.
    pub fn residual_norm(&self, rho: &DensityMatrix) -> Result<f64> {
        if rho.basis() != self.basis {
            return Err(Error::BasisMismatch);
        }
        let out = self.apply(&self.vectorize(rho), Execution::default());
        Ok(out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
    }

    /// Largest entry of `tᵀL`, where `t` is the vectorized trace functional.
    pub fn trace_row_residual(&self) -> f64 {
        let t: Vec<f64> = (0..self.len())
            .map(|p| {
                let (r, c) = self.element(p);
                if r == c {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        self.matrix
            .left_mul_real(&t)
            .iter()
            .fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        self.matrix.to_dense()
    }
}

/// Full generator on every charge sector. Memory grows as `n_max⁴`; large
/// truncations should use [`build_sector`].
pub fn build_superoperator(model: &LindbladModel, basis: FockBasis) -> Result<Superoperator> {
    build(model, basis, Sector::Full)
}

pub fn build_sector(model: &LindbladModel, basis: FockBasis, charge: i64) -> Result<Superoperator> {
    build(model, basis, Sector::Charge(charge))
}

fn build(model: &LindbladModel, basis: FockBasis, sector: Sector) -> Result<Superoperator> {
    if !basis.is_two_mode() {
        return Err(Error::NotTwoMode);
    }
    model.validate()?;
    let d = basis.dim();
    let elements: Vec<usize> = match sector {
        Sector::Full => (0..d * d).collect(),
        Sector::Charge(q) => (0..d * d)
            .filter(|&e| element_charge(basis, e / d, e % d) == q)
            .collect(),
    };
    let mut lookup = vec![u32::MAX; d * d];
    for (p, &e) in elements.iter().enumerate() {
        lookup[e] = p as u32;
    }

    let terms = generator_terms(model, basis)?;
    let mut triplets = Vec::with_capacity(elements.len() * terms.len());
    for term in &terms {
        let left_cols = term.left.by_column();
        let right_rows = term.right.by_row();
        for (col_pos, &e) in elements.iter().enumerate() {
            let (j, l) = (e / d, e % d);
            // (AρB)_{ik} ∋ A_{ij} ρ_{jl} B_{lk}
            for &(i, a) in &left_cols[j] {
                for &(k, bv) in &right_rows[l] {
                    let row = lookup[i * d + k];
                    debug_assert!(row != u32::MAX, "generator left its charge sector");
                    triplets.push((row as usize, col_pos, term.coeff * a * bv));
                }
            }
        }
    }
    let n = elements.len();
    Ok(Superoperator {
        basis,
        sector,
        elements,
        matrix: CsrMatrix::from_triplets(n, n, triplets),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub keep_states: bool,
    pub max_steps: usize,
    pub exec: Execution,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
            keep_states: true,
            max_steps: 2_000_000,
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentRecord {
    pub t: f64,
    pub n1: f64,
    pub n2: f64,
    pub re_b1b2: f64,
    pub im_b1b2: f64,
    pub var_sum_q: f64,
    pub var_diff_p: f64,
    pub purity: f64,
    pub trace: f64,
}

impl MomentRecord {
    pub fn from_density(t: f64, rho: &DensityMatrix) -> Result<Self> {
        let mom = SecondMoments::from_density(rho)?;
        let cov = CovarianceState::from_moments(&mom);
        let (var_sum_q, var_diff_p) = epr_variances(&cov)?;
        Ok(Self {
            t,
            n1: mom.n[0],
            n2: mom.n[1],
            re_b1b2: mom.b1b2.re,
            im_b1b2: mom.b1b2.im,
            var_sum_q,
            var_diff_p,
            purity: purity(rho),
            trace: rho.trace().re,
        })
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    /// Empty when states were not requested.
    pub states: Vec<DensityMatrix>,
    pub moments: Vec<MomentRecord>,
}

pub fn evolve(rho0: &DensityMatrix, model: &LindbladModel, times: &[f64]) -> Result<EvolutionResult> {
    evolve_with(rho0, model, times, &EvolveOptions::default())
}

/// Integrate from `ρ(0) = rho0` and report `ρ(t)` at each requested time.
pub fn evolve_with(
    rho0: &DensityMatrix,
    model: &LindbladModel,
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<EvolutionResult> {
    let basis = rho0.basis();
    if !basis.is_two_mode() {
        return Err(Error::NotTwoMode);
    }
    model.validate()?;
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::param("times", "must be finite and >= 0"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("times", "must be strictly increasing"));
    }

    let d = basis.dim();
    let e = rho0.elements();
    let mut charges = BTreeSet::new();
    for c in 0..d {
        for r in 0..d {
            if e[(r, c)] != ZERO {
                charges.insert(element_charge(basis, r, c));
            }
        }
    }

    let mut frames: Vec<DMatrix<C64>> = vec![DMatrix::zeros(d, d); times.len()];
    for q in charges {
        let op = build_sector(model, basis, q)?;
        let y0 = op.vectorize(rho0);
        let traj = integrate(op.matrix(), &y0, times, opts)?;
        for (frame, v) in frames.iter_mut().zip(traj) {
            op.scatter_into(&v, frame);
        }
    }

    let mut states = Vec::new();
    let mut moments = Vec::with_capacity(times.len());
    for (&t, frame) in times.iter().zip(frames) {
        let rho = DensityMatrix::from_raw(basis, frame);
        moments.push(MomentRecord::from_density(t, &rho)?);
        if opts.keep_states {
            states.push(rho);
        }
    }
    Ok(EvolutionResult {
        times: times.to_vec(),
        states,
        moments,
    })
}

// Dormand–Prince 5(4) tableau
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive Dormand–Prince integration of `dy/dt = A y`, stopping exactly on
/// every requested output time.
fn integrate(a: &CsrMatrix, y0: &[C64], times: &[f64], opts: &EvolveOptions) -> Result<Vec<Vec<C64>>> {
    let n = y0.len();
    let exec = opts.exec;
    let mut out = Vec::with_capacity(times.len());
    let mut y = y0.to_vec();
    let mut t = 0.0;

    // crude spectral scale for the first step
    let row_scale = (0..a.n_rows())
        .map(|i| a.row(i).map(|(_, v)| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(1e-300);
    let mut h = 0.5 / row_scale;

    let mut k1 = a.mul_vec(&y, exec);
    let mut k2 = vec![ZERO; n];
    let mut k3 = vec![ZERO; n];
    let mut k4 = vec![ZERO; n];
    let mut k5 = vec![ZERO; n];
    let mut k6 = vec![ZERO; n];
    let mut k7 = vec![ZERO; n];
    let mut stage = vec![ZERO; n];
    let mut y_new = vec![ZERO; n];
    let mut steps = 0usize;

    for &t_out in times {
        while t < t_out {
            let remaining = t_out - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };

            for i in 0..n {
                stage[i] = y[i] + k1[i] * (step * A21);
            }
            a.mul_vec_into(&stage, &mut k2, exec);
            for i in 0..n {
                stage[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * step;
            }
            a.mul_vec_into(&stage, &mut k3, exec);
            for i in 0..n {
                stage[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * step;
            }
            a.mul_vec_into(&stage, &mut k4, exec);
            for i in 0..n {
                stage[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * step;
            }
            a.mul_vec_into(&stage, &mut k5, exec);
            for i in 0..n {
                stage[i] = y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * step;
            }
            a.mul_vec_into(&stage, &mut k6, exec);
            for i in 0..n {
                y_new[i] = y[i] + (k1[i] * B1 + k3[i] * B3 + k4[i] * B4 + k5[i] * B5 + k6[i] * B6) * step;
            }
            a.mul_vec_into(&y_new, &mut k7, exec);

            let mut err_sq = 0.0;
            for i in 0..n {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * step;
                let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                err_sq += (e.norm() / sc).powi(2);
            }
            let err = (err_sq / n.max(1) as f64).sqrt();

            steps += 1;
            if steps > opts.max_steps || !err.is_finite() {
                return Err(Error::IntegratorFailure { t, residual: err });
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                t = if last { t_out } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                if !last {
                    h = step * factor;
                }
            } else {
                h = step * factor;
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::IntegratorFailure { t, residual: err });
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// `Tr(ρ²)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyStateMethod {
    /// Shifted inverse iteration, falling back to long-time integration.
    Auto,
    InverseIteration,
    LongTimeIntegration,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyStateOptions {
    pub method: SteadyStateMethod,
    /// Target for `‖L(ρ)‖_F` of the trace-one result.
    pub tol: f64,
    /// Shift, in units of `Γ`, used by inverse iteration.
    pub shift: f64,
    pub max_iterations: usize,
    /// Integration horizon, in units of `1/Γ`, for the fallback.
    pub horizon: f64,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self {
            method: SteadyStateMethod::Auto,
            tol: STEADY_STATE_TOL,
            shift: 1e-4,
            max_iterations: 30,
            horizon: 20.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SteadyStateReport {
    pub state: DensityMatrix,
    pub residual: f64,
    pub method: SteadyStateMethod,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

pub fn steady_state(model: &LindbladModel, basis: FockBasis) -> Result<SteadyStateReport> {
    steady_state_with(model, basis, &SteadyStateOptions::default())
}

pub fn steady_state_with(
    model: &LindbladModel,
    basis: FockBasis,
    opts: &SteadyStateOptions,
) -> Result<SteadyStateReport> {
    if !basis.is_two_mode() {
        return Err(Error::NotTwoMode);
    }
    model.validate()?;
    // the steady state is charge-neutral, swap- and transpose-symmetric
    let op = build_sector(model, basis, 0)?;
    let mut report = match opts.method {
        SteadyStateMethod::InverseIteration => inverse_iteration(&op, model, opts)?,
        SteadyStateMethod::LongTimeIntegration => long_time(&op, model, basis, opts)?,
        SteadyStateMethod::Auto => match inverse_iteration(&op, model, opts) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("inverse iteration failed ({e}); integrating to t = {}/Γ", opts.horizon);
                long_time(&op, model, basis, opts)?
            }
        },
    };

    let min_ev = report.state.min_eigenvalue();
    if min_ev < -POSITIVITY_TOL {
        report
            .warnings
            .push(format!("steady state has negative eigenvalue {min_ev:.3e}"));
    }
    let top = report.state.tail_population(0.0);
    if top > TOP_LEVEL_WARN {
        let msg = format!("top Fock level holds population {top:.3e}; increase n_max");
        log::warn!("{msg}");
        report.warnings.push(msg);
    }
    Ok(report)
}

fn finish(op: &Superoperator, v: Vec<C64>) -> Result<(DensityMatrix, f64)> {
    let m = op.devectorize(&v);
    let rho = DensityMatrix::from_raw(op.basis(), m).normalized()?;
    let rho = DensityMatrix::new(op.basis(), rho.elements().clone())?;
    let residual = op.residual_norm(&rho)?;
    Ok((rho, residual))
}

struct Orbits {
    /// Orbit id of every sector coordinate.
    of: Vec<usize>,
    /// Representative coordinate of every orbit.
    rep: Vec<usize>,
    /// Block offsets over orbit ids, one block per excitation level.
    offsets: Vec<usize>,
}

/// Group charge-neutral coordinates into orbits under the mode swap and the
/// transpose, ordered by excitation level `(m₁+m₂+k₁+k₂)/2`.
fn orbits(op: &Superoperator) -> Orbits {
    let basis = op.basis();
    let d = basis.dim();
    let flat = |m1: usize, m2: usize, k1: usize, k2: usize| basis.index(m1, m2) * d + basis.index(k1, k2);
    let mut keyed: Vec<(usize, usize, usize)> = Vec::with_capacity(op.len());
    for p in 0..op.len() {
        let (r, c) = op.element(p);
        let (m1, m2) = basis.occupations(r);
        let (k1, k2) = basis.occupations(c);
        let rep = [
            flat(m1, m2, k1, k2),
            flat(k1, k2, m1, m2),
            flat(m2, m1, k2, k1),
            flat(k2, k1, m2, m1),
        ]
        .into_iter()
        .min()
        .unwrap();
        keyed.push(((m1 + m2 + k1 + k2) / 2, rep, p));
    }
    let mut order = keyed.clone();
    order.sort_unstable();
    let pos_of_flat = |f: usize| op.elements.binary_search(&f).expect("orbit image inside sector");

    let mut of = vec![usize::MAX; op.len()];
    let mut rep = Vec::new();
    let mut offsets = vec![0];
    let mut current_level = 0;
    let mut last_rep = usize::MAX;
    for &(level, r, p) in &order {
        if r != last_rep {
            while level > current_level {
                offsets.push(rep.len());
                current_level += 1;
            }
            rep.push(pos_of_flat(r));
            last_rep = r;
        }
        of[p] = rep.len() - 1;
    }
    offsets.push(rep.len());
    Orbits { of, rep, offsets }
}

fn inverse_iteration(op: &Superoperator, model: &LindbladModel, opts: &SteadyStateOptions) -> Result<SteadyStateReport> {
    let orb = orbits(op);
    let n_orb = orb.rep.len();
    // reduced generator on orbit indicator vectors
    let mut trip = Vec::with_capacity(op.matrix().nnz() / 2);
    for (o, &p) in orb.rep.iter().enumerate() {
        for (c, v) in op.matrix().row(p) {
            trip.push((o, orb.of[c], v));
        }
    }
    let reduced = CsrMatrix::from_triplets(n_orb, n_orb, trip);
    let solver = BlockTridiagonal::factor(&reduced, orb.offsets.clone(), opts.shift * model.gamma())?;

    let expand = |x: &[f64]| -> Vec<C64> { orb.of.iter().map(|&o| C64::new(x[o], 0.0)).collect() };
    let diagonal: Vec<usize> = (0..op.len())
        .filter(|&p| {
            let (r, c) = op.element(p);
            r == c
        })
        .map(|p| orb.of[p])
        .collect();
    let mut x = vec![1.0 / n_orb as f64; n_orb];
    let mut best = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        let y = solver.solve(&x)?;
        // the iterate flips sign every step (eigenvalue −σ), so fix the
        // normalization through the trace
        let tr: f64 = diagonal.iter().map(|&o| y[o]).sum();
        if !tr.is_finite() || tr.abs() < f64::MIN_POSITIVE {
            return Err(Error::NonConvergence {
                what: "inverse iteration",
                residual: best,
            });
        }
        x = y.iter().map(|v| v / tr).collect();
        let (state, residual) = finish(op, expand(&x))?;
        if residual < opts.tol {
            return Ok(SteadyStateReport {
                state,
                residual,
                method: SteadyStateMethod::InverseIteration,
                iterations: it,
                warnings: Vec::new(),
            });
        }
        if residual > 0.5 * best && it > 3 {
            return Err(Error::NonConvergence {
                what: "inverse iteration",
                residual,
            });
        }
        best = best.min(residual);
    }
    Err(Error::NonConvergence {
        what: "inverse iteration",
        residual: best,
    })
}

fn long_time(
    op: &Superoperator,
    model: &LindbladModel,
    basis: FockBasis,
    opts: &SteadyStateOptions,
) -> Result<SteadyStateReport> {
    let rho0 = PureState::vacuum(basis).to_density();
    let y0 = op.vectorize(&rho0);
    let t_end = opts.horizon / model.gamma();
    let evo = EvolveOptions {
        keep_states: false,
        ..EvolveOptions::default()
    };
    let mut traj = integrate(op.matrix(), &y0, &[t_end], &evo)?;
    let (state, residual) = finish(op, traj.pop().unwrap())?;
    if residual >= opts.tol {
        return Err(Error::NonConvergence {
            what: "long-time integration",
            residual,
        });
    }
    Ok(SteadyStateReport {
        state,
        residual,
        method: SteadyStateMethod::LongTimeIntegration,
        iterations: 1,
        warnings: Vec::new(),
    })
}

/// Two smallest singular values of the full generator (dense; small bases
/// only). A gap between them signals a unique steady state.
pub fn null_space_gap(model: &LindbladModel, basis: FockBasis) -> Result<(f64, f64)> {
    let op = build_superoperator(model, basis)?;
    let mut sv: Vec<f64> = op.to_dense().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok((sv[0], sv[1]))
}
