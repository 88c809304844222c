//! First- and second-moment dynamics of linear bosonic systems.
//!
//! Quadratures are ordered `Q₁, P₁, …, Q_n, P_n`; the covariance matrix is
//! `Σ_ij = ⟨{R_i, R_j}⟩/2 − ⟨R_i⟩⟨R_j⟩`, equal to the identity for vacuum.
//! Moments obey `dμ/dt = Aμ` and `dΣ/dt = AΣ + ΣAᵀ + D`.

use nalgebra::{DMatrix, DVector, Schur};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{ladder, DensityMatrix, C64};
use crate::lindblad::{LindbladModel, HEATING_OCCUPATION};
use crate::nopa::NopaParams;
use crate::par::{self, Execution};

pub const SYMMETRY_TOL: f64 = 1e-12;
pub const PHYSICALITY_TOL: f64 = 1e-8;
pub const LYAPUNOV_TOL: f64 = 1e-10;

/// Raw two-mode moments of `b₁`, `b₂`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondMoments {
    /// `⟨b_j⟩`
    pub b: [C64; 2],
    /// `⟨b_j²⟩`
    pub bb: [C64; 2],
    /// `⟨b_j†b_j⟩`
    pub n: [f64; 2],
    /// `⟨b₁b₂⟩`
    pub b1b2: C64,
    /// `⟨b₁†b₂⟩`
    pub b1d_b2: C64,
}

impl SecondMoments {
    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        let basis = rho.basis();
        if !basis.is_two_mode() {
            return Err(Error::NotTwoMode);
        }
        let b = [ladder(basis, 0)?, ladder(basis, 1)?];
        let bd = [b[0].adjoint(), b[1].adjoint()];
        let ev = |op: &crate::sparse::SparseOperator| rho.expectation_sparse(op);
        Ok(Self {
            b: [ev(&b[0])?, ev(&b[1])?],
            bb: [ev(&b[0].compose(&b[0]))?, ev(&b[1].compose(&b[1]))?],
            n: [ev(&bd[0].compose(&b[0]))?.re, ev(&bd[1].compose(&b[1]))?.re],
            b1b2: ev(&b[0].compose(&b[1]))?,
            b1d_b2: ev(&bd[0].compose(&b[1]))?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl CovarianceState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::param("mean", "length must be a positive even number"));
        }
        if cov.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: cov.nrows(),
            });
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(Error::param("cov", "non-finite entry"));
        }
        let asym = (&cov - cov.transpose()).amax();
        if asym > SYMMETRY_TOL * cov.amax().max(1.0) {
            return Err(Error::param("cov", format!("not symmetric (deviation {asym:.3e})")));
        }
        let state = Self { mean, cov };
        if !state.is_physical() {
            return Err(Error::Unphysical(format!(
                "covariance violates the uncertainty relation (min eigenvalue of cov + iΩ = {:.3e})",
                state.physicality_margin()
            )));
        }
        Ok(state)
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            mean: DVector::zeros(2 * n_modes),
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    pub(crate) fn from_raw(mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        Self { mean, cov }
    }

    pub fn from_moments(m: &SecondMoments) -> Self {
        let mean = DVector::from_vec(vec![
            2.0 * m.b[0].re,
            2.0 * m.b[0].im,
            2.0 * m.b[1].re,
            2.0 * m.b[1].im,
        ]);
        let mut s = DMatrix::zeros(4, 4);
        for j in 0..2 {
            let (q, p) = (2 * j, 2 * j + 1);
            s[(q, q)] = 2.0 * m.bb[j].re + 2.0 * m.n[j] + 1.0;
            s[(p, p)] = -2.0 * m.bb[j].re + 2.0 * m.n[j] + 1.0;
            s[(q, p)] = 2.0 * m.bb[j].im;
            s[(p, q)] = s[(q, p)];
        }
        let (x, y) = (m.b1b2, m.b1d_b2);
        s[(0, 2)] = 2.0 * x.re + 2.0 * y.re;
        s[(1, 3)] = -2.0 * x.re + 2.0 * y.re;
        s[(0, 3)] = 2.0 * x.im + 2.0 * y.im;
        s[(1, 2)] = 2.0 * x.im - 2.0 * y.im;
        for (i, k) in [(0, 2), (1, 3), (0, 3), (1, 2)] {
            s[(k, i)] = s[(i, k)];
        }
        let s = s - &mean * mean.transpose();
        Self { mean, cov: s }
    }

    /// Moments of a truncated-Fock two-mode state.
    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        Ok(Self::from_moments(&SecondMoments::from_density(rho)?))
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Smallest eigenvalue of `Σ + iΩ`.
    pub fn physicality_margin(&self) -> f64 {
        let dim = self.cov.nrows();
        let h = DMatrix::from_fn(dim, dim, |i, j| {
            let omega = if i / 2 != j / 2 {
                0.0
            } else if i % 2 == 0 && j == i + 1 {
                1.0
            } else if i % 2 == 1 && i == j + 1 {
                -1.0
            } else {
                0.0
            };
            C64::new(self.cov[(i, j)], omega)
        });
        h.symmetric_eigenvalues().min()
    }

    pub fn is_physical(&self) -> bool {
        self.physicality_margin() >= -PHYSICALITY_TOL
    }

    /// `1/√det Σ`.
    pub fn purity(&self) -> f64 {
        1.0 / self.cov.determinant().sqrt()
    }

    /// Reduced state of the listed modes, in the given order.
    pub fn select_modes(&self, modes: &[usize]) -> Result<Self> {
        let n = self.n_modes();
        if let Some(&bad) = modes.iter().find(|&&m| m >= n) {
            return Err(Error::ModeIndexOutOfRange { mode: bad, n_modes: n });
        }
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        let mean = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i]));
        let cov = DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.cov[(idx[a], idx[b])]);
        Ok(Self { mean, cov })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftDiffusion {
    drift: DMatrix<f64>,
    diffusion: DMatrix<f64>,
}

impl DriftDiffusion {
    pub fn new(drift: DMatrix<f64>, diffusion: DMatrix<f64>) -> Result<Self> {
        let dim = drift.nrows();
        if dim == 0 || dim % 2 != 0 || drift.ncols() != dim {
            return Err(Error::param("drift", "must be square with even dimension"));
        }
        if diffusion.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: diffusion.nrows(),
            });
        }
        let asym = (&diffusion - diffusion.transpose()).amax();
        if asym > SYMMETRY_TOL * diffusion.amax().max(1.0) {
            return Err(Error::param("diffusion", "not symmetric"));
        }
        let min = diffusion.clone().symmetric_eigenvalues().min();
        if min < -PHYSICALITY_TOL * diffusion.amax().max(1.0) {
            return Err(Error::param(
                "diffusion",
                format!("not positive semidefinite (eigenvalue {min:.3e})"),
            ));
        }
        Ok(Self { drift, diffusion })
    }

    pub fn dim(&self) -> usize {
        self.drift.nrows()
    }

    pub fn drift(&self) -> &DMatrix<f64> {
        &self.drift
    }

    pub fn diffusion(&self) -> &DMatrix<f64> {
        &self.diffusion
    }

    /// Error carrying the eigenvalue of `A` with the largest real part if it
    /// is not strictly negative.
    pub fn check_hurwitz(&self) -> Result<()> {
        let n = self.dim();
        let worst = Schur::try_new(self.drift.clone(), f64::EPSILON, 1000 * n).map(|s| {
            s.complex_eigenvalues()
                .iter()
                .copied()
                .max_by(|a, b| a.re.partial_cmp(&b.re).unwrap())
                .unwrap()
        });
        match worst {
            Some(w) if w.re < 0.0 => Ok(()),
            Some(w) => Err(Error::NonHurwitz { re: w.re, im: w.im }),
            // Lyapunov criterion: A is Hurwitz iff AX + XAᵀ = −I has a
            // positive-definite solution
            None => {
                let x = lyapunov(&self.drift, &DMatrix::identity(n, n));
                let min = x.map(|x| x.symmetric_eigenvalues().min()).unwrap_or(f64::NAN);
                if min > 0.0 {
                    Ok(())
                } else {
                    Err(Error::NonHurwitz { re: f64::NAN, im: f64::NAN })
                }
            }
        }
    }
}

/// Solution of `AΣ + ΣAᵀ + D = 0` by the Kronecker-product linear system.
fn lyapunov(a: &DMatrix<f64>, d: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    // column-major vec: vec(AΣ) = (I⊗A) vec Σ, vec(ΣAᵀ) = (A⊗I) vec Σ
    let k = id.kronecker(a) + a.kronecker(&id);
    let rhs = DVector::from_iterator(n * n, d.iter().map(|v| -v));
    let x = k.lu().solve(&rhs)?;
    let sigma = DMatrix::from_column_slice(n, n, x.as_slice());
    Some((&sigma + sigma.transpose()) * 0.5)
}

/// Moment equations of the two-mode master equation.
pub fn model_from_lindblad(model: &LindbladModel) -> Result<DriftDiffusion> {
    model.validate()?;
    let (g, n, m, h) = (model.gamma(), model.n_param(), model.m_param(), model.heating_rate());
    let drift = DMatrix::identity(4, 4) * -(g + h);
    let mut d = DMatrix::identity(4, 4) * (2.0 * g * (2.0 * n + 1.0) + 2.0 * h * (2.0 * HEATING_OCCUPATION + 1.0));
    d[(0, 2)] = -4.0 * g * m;
    d[(2, 0)] = -4.0 * g * m;
    d[(1, 3)] = 4.0 * g * m;
    d[(3, 1)] = 4.0 * g * m;
    DriftDiffusion::new(drift, d)
}

/// Solve `AΣ + ΣAᵀ + D = 0` (zero mean).
pub fn steady_covariance(dd: &DriftDiffusion) -> Result<CovarianceState> {
    dd.check_hurwitz()?;
    let n = dd.dim();
    let a = &dd.drift;
    let sigma = lyapunov(a, &dd.diffusion).ok_or(Error::Singular("Lyapunov operator"))?;
    let residual = (a * &sigma + &sigma * a.transpose() + &dd.diffusion).norm();
    let scale = dd.diffusion.norm().max(1.0);
    if residual > LYAPUNOV_TOL * scale {
        return Err(Error::NonConvergence {
            what: "Lyapunov solve",
            residual,
        });
    }
    Ok(CovarianceState::from_raw(DVector::zeros(n), sigma))
}

/// Exact propagation over time `t` using Van Loan's block exponential.
pub fn evolve_covariance(state: &CovarianceState, dd: &DriftDiffusion, t: f64) -> Result<CovarianceState> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::param("t", "must be finite and >= 0"));
    }
    let n = dd.dim();
    if state.mean.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: state.mean.len(),
        });
    }
    if t == 0.0 {
        return Ok(state.clone());
    }
    let mut big = DMatrix::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(&(-&dd.drift * t));
    big.view_mut((0, n), (n, n)).copy_from(&(&dd.diffusion * t));
    big.view_mut((n, n), (n, n)).copy_from(&(dd.drift.transpose() * t));
    let e = big.exp();
    let phi = e.view((n, n), (n, n)).transpose();
    let q = &phi * e.view((0, n), (n, n));
    let cov = &phi * &state.cov * phi.transpose() + q;
    let cov = (&cov + cov.transpose()) * 0.5;
    let mean = &phi * &state.mean;
    Ok(CovarianceState::from_raw(mean, cov))
}

/// Amplifier modes `c₁, c₂` feeding atom modes `b₁, b₂` without back-action.
pub fn cascade_model(nopa: &NopaParams, gamma: f64) -> Result<DriftDiffusion> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::param("gamma", "must be finite and > 0"));
    }
    let (k, e) = (nopa.kappa_c(), nopa.epsilon());
    let mut a = DMatrix::zeros(8, 8);
    // c block: Q_c1 ← −ε Q_c2, P_c1 ← +ε P_c2 and symmetric
    for j in 0..4 {
        a[(j, j)] = -k;
    }
    a[(0, 2)] = -e;
    a[(2, 0)] = -e;
    a[(1, 3)] = e;
    a[(3, 1)] = e;
    let feed = (4.0 * k * gamma).sqrt();
    for j in 0..4 {
        a[(4 + j, 4 + j)] = -gamma;
        a[(4 + j, j)] = feed;
    }
    // the same input noise drives the amplifier and, after reflection, the atoms
    let mut d = DMatrix::zeros(8, 8);
    let cross = -2.0 * (k * gamma).sqrt();
    for j in 0..4 {
        d[(j, j)] = 2.0 * k;
        d[(4 + j, 4 + j)] = 2.0 * gamma;
        d[(j, 4 + j)] = cross;
        d[(4 + j, j)] = cross;
    }
    DriftDiffusion::new(a, d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CascadeRow {
    pub kappa_over_gamma: f64,
    pub var_sum_q: f64,
    pub var_sum_q_whitenoise: f64,
    pub rel_error: f64,
}

/// Motional `Var(Q₁+Q₂)` of the cascaded model against the white-noise
/// prediction for each bandwidth ratio `κ_c/Γ`.
pub fn cascade_sweep(nopa: &NopaParams, kappa_over_gamma: &[f64], exec: Execution) -> Result<Vec<CascadeRow>> {
    let (n, m) = nopa.effective_n_m();
    let white = 2.0 * (1.0 + 2.0 * n - 2.0 * m);
    let rows = par::map_range(kappa_over_gamma.len(), exec, |i| -> Result<CascadeRow> {
        let ratio = kappa_over_gamma[i];
        if !(ratio > 0.0) || !ratio.is_finite() {
            return Err(Error::param("kappa_over_gamma", "must be finite and > 0"));
        }
        let dd = cascade_model(nopa, nopa.kappa_c() / ratio)?;
        let atoms = steady_covariance(&dd)?.select_modes(&[2, 3])?;
        let (var_sum_q, _) = epr_variances(&atoms)?;
        Ok(CascadeRow {
            kappa_over_gamma: ratio,
            var_sum_q,
            var_sum_q_whitenoise: white,
            rel_error: (var_sum_q - white).abs() / white,
        })
    });
    rows.into_iter().collect()
}

/// Rate governing the collective modes `B = K^{−1/2} Σ_j b^{(j)}` of `K`
/// atoms per site: the two-mode model applies unchanged with `Γ → KΓ`.
pub fn collective_mode_map(k_atoms: usize, gamma: f64) -> Result<f64> {
    if k_atoms == 0 {
        return Err(Error::param("k", "must be >= 1"));
    }
    Ok(k_atoms as f64 * gamma)
}

/// `(Var(Q₁+Q₂), Var(P₁−P₂))`.
pub fn epr_variances(state: &CovarianceState) -> Result<(f64, f64)> {
    if state.n_modes() != 2 {
        return Err(Error::NotTwoMode);
    }
    let s = &state.cov;
    Ok((
        s[(0, 0)] + s[(2, 2)] + 2.0 * s[(0, 2)],
        s[(1, 1)] + s[(3, 3)] - 2.0 * s[(1, 3)],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_mode(ratio: f64, gamma: f64) -> (LindbladModel, DriftDiffusion) {
        let m = LindbladModel::from_nopa(&NopaParams::from_ratio(ratio).unwrap(), gamma).unwrap();
        let dd = model_from_lindblad(&m).unwrap();
        (m, dd)
    }

    #[test]
    fn vacuum_diffusion_balance() {
        let (_, dd) = two_mode(0.0, 0.7);
        assert_eq!(dd.diffusion(), &(DMatrix::identity(4, 4) * 1.4));
        let s = steady_covariance(&dd).unwrap();
        assert!((s.cov() - DMatrix::identity(4, 4)).amax() < 1e-14);
    }

    #[test]
    fn steady_epr_values() {
        let (_, dd) = two_mode(0.5, 1.0);
        let s = steady_covariance(&dd).unwrap();
        let (sq, dp) = epr_variances(&s).unwrap();
        assert!((sq - 2.0 / 9.0).abs() < 1e-12);
        assert!((dp - 2.0 / 9.0).abs() < 1e-12);
        let c = s.cov();
        let anti = c[(0, 0)] + c[(2, 2)] - 2.0 * c[(0, 2)];
        assert!((anti - 18.0).abs() < 1e-11);
        assert!((sq * anti - 4.0).abs() < 1e-11);
        assert!((s.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn closed_form_steady_state() {
        let m = LindbladModel::new(0.3, 0.8, 0.6).unwrap();
        let s = steady_covariance(&model_from_lindblad(&m).unwrap()).unwrap();
        let c = s.cov();
        for j in 0..4 {
            assert!((c[(j, j)] - 2.6).abs() < 1e-12);
        }
        assert!((c[(0, 2)] + 1.2).abs() < 1e-12);
        assert!((c[(1, 3)] - 1.2).abs() < 1e-12);
        assert!(c[(0, 1)].abs() < 1e-12 && c[(0, 3)].abs() < 1e-12);
    }

    #[test]
    fn lyapunov_trivial_and_non_hurwitz() {
        let dd = DriftDiffusion::new(-DMatrix::identity(2, 2), DMatrix::identity(2, 2) * 2.0).unwrap();
        let s = steady_covariance(&dd).unwrap();
        assert!((s.cov() - DMatrix::identity(2, 2)).amax() < 1e-14);

        let mut a = -DMatrix::identity(2, 2);
        a[(1, 1)] = 0.5;
        let dd = DriftDiffusion::new(a, DMatrix::identity(2, 2)).unwrap();
        match steady_covariance(&dd) {
            Err(Error::NonHurwitz { re, .. }) => assert!((re - 0.5).abs() < 1e-12),
            other => panic!("expected NonHurwitz, got {other:?}"),
        }
    }

    #[test]
    fn relaxation_from_vacuum() {
        let (m, dd) = two_mode(0.3, 0.9);
        let n = m.n_param();
        let vac = CovarianceState::vacuum(2);
        assert_eq!(evolve_covariance(&vac, &dd, 0.0).unwrap(), vac);
        for t in [0.1, 0.5, 2.0] {
            let s = evolve_covariance(&vac, &dd, t).unwrap();
            let expect = 1.0 + 2.0 * n * (1.0 - (-2.0 * 0.9 * t).exp());
            assert!((s.cov()[(0, 0)] - expect).abs() < 1e-10 * expect);
        }
        let late = evolve_covariance(&vac, &dd, 20.0 / 0.9).unwrap();
        let ss = steady_covariance(&dd).unwrap();
        assert!((late.cov() - ss.cov()).amax() < 1e-8);
    }

    #[test]
    fn thermal_moments_from_fock() {
        let basis = crate::hilbert::FockBasis::two_mode(30).unwrap();
        let single = crate::hilbert::FockBasis::single(30).unwrap();
        let th = DensityMatrix::thermal(single, 0.4).unwrap();
        let rho = DensityMatrix::product(&th, &th).unwrap();
        assert_eq!(rho.basis(), basis);
        let c = CovarianceState::from_density(&rho).unwrap();
        assert!((c.cov() - DMatrix::identity(4, 4) * 1.8).amax() < 1e-8);
        assert!((c.purity() - 1.0 / 1.8f64.powi(2)).abs() < 1e-8);
    }

    #[test]
    fn physicality_check() {
        assert!(CovarianceState::new(DVector::zeros(2), DMatrix::identity(2, 2) * 0.5).is_err());
        assert!(CovarianceState::new(DVector::zeros(2), DMatrix::identity(2, 2)).is_ok());
        let mut bad = DMatrix::identity(2, 2);
        bad[(0, 1)] = 0.1;
        assert!(CovarianceState::new(DVector::zeros(2), bad).is_err());
    }

    #[test]
    fn cascade_structure() {
        let nopa = NopaParams::from_ratio(0.5).unwrap();
        let dd = cascade_model(&nopa, 0.01).unwrap();
        for i in 0..4 {
            for j in 4..8 {
                assert_eq!(dd.drift()[(i, j)], 0.0);
            }
        }
        let vac = steady_covariance(&cascade_model(&NopaParams::from_ratio(0.0).unwrap(), 0.3).unwrap()).unwrap();
        assert!((vac.cov() - DMatrix::identity(8, 8)).amax() < 1e-12);
    }

    #[test]
    fn cascade_approaches_white_noise_linearly() {
        let nopa = NopaParams::from_ratio(0.5).unwrap();
        let rows = cascade_sweep(&nopa, &[10.0, 100.0, 1000.0, 10000.0], Execution::Sequential).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].rel_error < w[0].rel_error);
            let slope = (w[1].rel_error / w[0].rel_error).log10();
            assert!((slope + 1.0).abs() < 0.1, "slope {slope}");
        }
        assert!(rows[2].rel_error < 1e-2);
    }

    #[test]
    fn collective_map() {
        assert_eq!(collective_mode_map(1, 0.25).unwrap(), 0.25);
        assert!((collective_mode_map(4, 0.1).unwrap() - 0.4).abs() < 1e-15);
        assert!(collective_mode_map(0, 1.0).is_err());
        let nopa = NopaParams::from_ratio(0.4).unwrap();
        let base = steady_covariance(&model_from_lindblad(&LindbladModel::from_nopa(&nopa, 0.1).unwrap()).unwrap()).unwrap();
        for k in [2, 5, 17] {
            let g = collective_mode_map(k, 0.1).unwrap();
            let s = steady_covariance(&model_from_lindblad(&LindbladModel::from_nopa(&nopa, g).unwrap()).unwrap()).unwrap();
            assert!((s.cov() - base.cov()).amax() < 1e-12);
        }
    }

    #[test]
    fn epr_variance_vacuum_and_trend() {
        assert_eq!(epr_variances(&CovarianceState::vacuum(2)).unwrap(), (2.0, 2.0));
        assert!(epr_variances(&CovarianceState::vacuum(3)).is_err());
        let mut last = f64::INFINITY;
        for k in 0..10 {
            let (_, dd) = two_mode(k as f64 / 10.0, 1.0);
            let (v, _) = epr_variances(&steady_covariance(&dd).unwrap()).unwrap();
            assert!(v < last);
            last = v;
        }
    }

    proptest! {
        #[test]
        fn evolution_preserves_physicality(
            ratio in 0.0f64..0.9,
            gamma in 0.05f64..3.0,
            heat in 0.0f64..1.0,
            t in 0.0f64..5.0,
            sq in -1.0f64..1.0,
        ) {
            let m = LindbladModel::from_nopa(&NopaParams::from_ratio(ratio).unwrap(), gamma)
                .unwrap()
                .with_heating(heat)
                .unwrap();
            let dd = model_from_lindblad(&m).unwrap();
            // squeezed single-mode product start
            let mut cov = DMatrix::identity(4, 4);
            cov[(0, 0)] = sq.exp();
            cov[(1, 1)] = (-sq).exp();
            let start = CovarianceState::new(DVector::zeros(4), cov).unwrap();
            let s = evolve_covariance(&start, &dd, t).unwrap();
            prop_assert!(s.is_physical());
        }

        #[test]
        fn pure_steady_state_balance(ratio in 0.0f64..0.95) {
            let (_, dd) = two_mode(ratio, 1.0);
            let c = steady_covariance(&dd).unwrap();
            let (sq, _) = epr_variances(&c).unwrap();
            let m = c.cov();
            let anti = m[(0, 0)] + m[(2, 2)] - 2.0 * m[(0, 2)];
            prop_assert!((sq * anti - 4.0).abs() < 1e-8 * anti.max(1.0));
        }
    }
}
