//! Validity conditions of the adiabatically eliminated atom–cavity model,
//! evaluated for concrete experimental parameters.
//!
//! Every "≫" condition becomes a ratio compared with a threshold: pass when
//! `ratio ≥ threshold`, warn when `ratio ≥ threshold/3`, fail otherwise.
//! Rates are in s⁻¹ and `t_decoherence` in seconds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 10.0;

/// Expected band for `Γ` in s⁻¹ (tens to hundreds of kHz).
pub const GAMMA_BAND: (f64, f64) = (1e4, 1e6);

/// Names of the checks, in report order.
pub const CHECK_NAMES: [&str; 10] = [
    "detuning_vs_drive",
    "detuning_vs_coupling",
    "detuning_vs_trap",
    "trap_vs_cavity_decay",
    "cavity_decay_vs_effective_drive",
    "white_noise",
    "lamb_dicke_refined",
    "decoherence_budget",
    "cooperativity",
    "gamma_band",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentParams {
    pub g0: f64,
    pub kappa_a: f64,
    pub gamma_atom: f64,
    pub delta_big: f64,
    pub eta_x: f64,
    pub e_laser: f64,
    pub nu_x: f64,
    pub kappa_c: f64,
    pub t_decoherence: f64,
    /// Transverse trap frequencies and laser phase; accepted, not used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_z: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_l: Option<f64>,
}

impl ExperimentParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("g0", self.g0),
            ("kappa_a", self.kappa_a),
            ("gamma_atom", self.gamma_atom),
            ("delta_big", self.delta_big),
            ("e_laser", self.e_laser),
            ("nu_x", self.nu_x),
            ("kappa_c", self.kappa_c),
            ("t_decoherence", self.t_decoherence),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, "must be finite and > 0"));
            }
        }
        if !(self.eta_x > 0.0 && self.eta_x < 1.0) {
            return Err(Error::param("eta_x", "must lie in (0, 1)"));
        }
        Ok(())
    }

    /// `g₀η_xE_L/Δ`, the effective drive of the cavity-assisted sideband.
    pub fn effective_drive(&self) -> f64 {
        self.g0 * self.eta_x * self.e_laser / self.delta_big
    }
}

/// `Γ = (g₀η_xE_L/Δ)²/κ_a`.
pub fn coupling_rate(p: &ExperimentParams) -> f64 {
    p.effective_drive().powi(2) / p.kappa_a
}

/// `C₁ = g₀²/(κ_a γ)`.
pub fn cooperativity(p: &ExperimentParams) -> f64 {
    p.g0 * p.g0 / (p.kappa_a * p.gamma_atom)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Warn,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub ratio: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub gamma_eff: f64,
    pub c1: f64,
    pub checks: Vec<Check>,
}

impl FeasibilityReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Worst verdict over all checks.
    pub fn overall(&self) -> Verdict {
        self.checks.iter().map(|c| c.verdict).max_by_key(|v| *v as u8).unwrap_or(Verdict::Pass)
    }
}

fn grade(ratio: f64, threshold: f64) -> Verdict {
    // absorb rounding when a ratio sits exactly on a band edge
    let slack = 1.0 - 1e-12;
    if ratio >= threshold * slack {
        Verdict::Pass
    } else if ratio >= threshold / 3.0 * slack {
        Verdict::Warn
    } else {
        Verdict::Fail
    }
}

pub fn check_all(p: &ExperimentParams, r: f64, threshold: f64) -> Result<FeasibilityReport> {
    p.validate()?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::param("r", "must be finite and >= 0"));
    }
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(Error::param("threshold", "must be finite and > 0"));
    }
    let gamma = coupling_rate(p);
    let c1 = cooperativity(p);
    let ratio_check = |name: &'static str, ratio: f64, detail: String| Check {
        name,
        ratio,
        threshold,
        verdict: grade(ratio, threshold),
        detail,
    };
    let mut checks = vec![
        ratio_check("detuning_vs_drive", p.delta_big / p.e_laser, "Δ ≫ E_L".into()),
        ratio_check("detuning_vs_coupling", p.delta_big / p.g0, "Δ ≫ g₀".into()),
        ratio_check("detuning_vs_trap", p.delta_big / p.nu_x, "Δ ≫ ν_x = δ".into()),
        ratio_check("trap_vs_cavity_decay", p.nu_x / p.kappa_a, "ν_x ≫ κ_a".into()),
        ratio_check(
            "cavity_decay_vs_effective_drive",
            p.kappa_a / p.effective_drive(),
            "κ_a ≫ g₀η_xE_L/Δ".into(),
        ),
        ratio_check("white_noise", p.kappa_c / gamma, "κ_c ≫ Γ".into()),
        ratio_check(
            "lamb_dicke_refined",
            1.0 / (p.eta_x * r.cosh()),
            format!("η_x cosh r = {:.4} ≪ 1", p.eta_x * r.cosh()),
        ),
        ratio_check("decoherence_budget", p.t_decoherence * gamma, "t_decoherence ≫ 1/Γ".into()),
        ratio_check("cooperativity", c1, "C₁ ≫ 1".into()),
    ];
    let in_band = gamma >= GAMMA_BAND.0 && gamma < GAMMA_BAND.1;
    checks.push(Check {
        name: "gamma_band",
        ratio: gamma,
        threshold: GAMMA_BAND.0,
        verdict: if in_band { Verdict::Pass } else { Verdict::Warn },
        detail: format!("Γ = {gamma:.4e} s⁻¹ expected in [{:.0e}, {:.0e})", GAMMA_BAND.0, GAMMA_BAND.1),
    });
    Ok(FeasibilityReport {
        gamma_eff: gamma,
        c1,
        checks,
    })
}
