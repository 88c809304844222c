//! Below-threshold nondegenerate parametric amplifier as a two-beam source.
//!
//! Both output quadrature combinations `X₁+X₂` and `Y₁−Y₂` are filtered by the
//! same transfer function `T(ω) = (κ−ε+iω)/(κ+ε−iω)`; their variances are
//! reported relative to vacuum.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::C64;
use crate::par::{self, Execution};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NopaParams {
    epsilon: f64,
    kappa_c: f64,
}

impl NopaParams {
    /// Requires `0 ≤ ε < κ_c`; threshold itself is rejected since `N`, `M`
    /// and `r` all diverge there.
    pub fn new(epsilon: f64, kappa_c: f64) -> Result<Self> {
        if !(kappa_c > 0.0) || !kappa_c.is_finite() {
            return Err(Error::param("kappa_c", "must be finite and > 0"));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::param("epsilon", "must be finite and >= 0"));
        }
        if epsilon >= kappa_c {
            return Err(Error::param(
                "epsilon",
                format!("below-threshold operation requires epsilon < kappa_c ({epsilon} >= {kappa_c})"),
            ));
        }
        Ok(Self { epsilon, kappa_c })
    }

    /// Parameters with `κ_c = 1` and pump `ε = ratio·κ_c`.
    pub fn from_ratio(ratio: f64) -> Result<Self> {
        Self::new(ratio, 1.0)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kappa_c(&self) -> f64 {
        self.kappa_c
    }

    pub fn transfer_function(&self, omega: f64) -> C64 {
        let (k, e) = (self.kappa_c, self.epsilon);
        C64::new(k - e, omega) / C64::new(k + e, -omega)
    }

    /// Bath parameters `(N, M)` seen by the atoms in the white-noise limit.
    pub fn effective_n_m(&self) -> (f64, f64) {
        let (k, e) = (self.kappa_c, self.epsilon);
        let d = (k * k - e * e).powi(2);
        let n = 4.0 * e * e * k * k / d;
        let m = 2.0 * k * e * (k * k + e * e) / d;
        (n, m)
    }

    /// `r = arcsinh(√N)`, so `cosh r = √(N+1)`, `sinh r = √N`.
    pub fn squeeze_parameter(&self) -> f64 {
        self.effective_n_m().0.sqrt().asinh()
    }

    pub fn squeezing_spectra(&self, omega_grid: &[f64], exec: Execution) -> SpectrumTable {
        let values = par::map_range(omega_grid.len(), exec, |i| {
            self.transfer_function(omega_grid[i]).norm_sqr()
        });
        SpectrumTable {
            omega: omega_grid.to_vec(),
            sum_x_variance: values.clone(),
            diff_y_variance: values,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumTable {
    pub omega: Vec<f64>,
    pub sum_x_variance: Vec<f64>,
    pub diff_y_variance: Vec<f64>,
}

impl SpectrumTable {
    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}
