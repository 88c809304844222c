//! One function per subcommand. Each validates its configuration, runs the
//! computation in memory and returns the rendered outputs; nothing touches
//! the filesystem here.

use serde::Serialize;
use serde_json::json;

use eprsim::feasibility::{check_all, DEFAULT_THRESHOLD};
use eprsim::gaussian::{cascade_sweep, epr_variances, CovarianceState};
use eprsim::hilbert::{recommended_n_max, DensityMatrix, FockBasis, PureState};
use eprsim::lindblad::{evolve_with, steady_state_with, EvolveOptions, LindbladModel, SteadyStateMethod, SteadyStateOptions};
use eprsim::metrics::{bell_sweep, epr_criterion, fidelity, mean_phonon, BellState, BellSweepSpec};
use eprsim::states::{tmss_fock, wigner_analytic_grid, wigner_from_density, TmssSpec, WignerGrid};
use eprsim::Execution;

use crate::config::{BellStateChoice, ScenarioConfig, SteadyMethodChoice, WignerSource};
use crate::error::CliError;
use crate::output::{csv, json_string};

/// Rendered results of one command.
pub struct Outputs {
    /// CSV or JSON written to `--out` (stdout when absent).
    pub primary: String,
    /// Optional metadata, written to `--meta` when given.
    pub meta: Option<serde_json::Value>,
    /// Printed to stderr when `--meta` is absent.
    pub summary: Option<String>,
    /// Density-matrix dump for `--density-out`.
    pub density_csv: Option<String>,
}

impl Outputs {
    fn primary(primary: String) -> Self {
        Self {
            primary,
            meta: None,
            summary: None,
            density_csv: None,
        }
    }
}

pub struct RunOptions {
    pub n_max: Option<usize>,
    pub exec: Execution,
}

fn core(block: &str) -> impl Fn(eprsim::Error) -> CliError + '_ {
    move |e| CliError::from_core(block, e)
}

fn model_json(model: &LindbladModel) -> serde_json::Value {
    json!({
        "gamma": model.gamma(),
        "n": model.n_param(),
        "m": model.m_param(),
        "heating_rate": model.heating_rate(),
        "heating_occupation": eprsim::lindblad::HEATING_OCCUPATION,
    })
}

fn model_r(model: &LindbladModel) -> f64 {
    model.n_param().sqrt().asinh()
}

pub fn nopa_spectrum(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Outputs, CliError> {
    let nopa = cfg.require_nopa()?;
    let block = cfg
        .spectrum
        .as_ref()
        .ok_or_else(|| CliError::config("spectrum", "block is required for this command"))?;
    let omega = block.omega.resolve("spectrum.omega")?;
    let table = nopa.squeezing_spectra(&omega, opts.exec);
    let rows = (0..table.len()).map(|i| vec![table.omega[i], table.sum_x_variance[i], table.diff_y_variance[i]]);
    Ok(Outputs::primary(csv(&["omega_over_kappa", "sum_x_var", "diff_y_var"], rows)))
}

#[derive(Serialize)]
struct EprJson {
    value: f64,
    entangled: bool,
}

pub fn steady_state(cfg: &ScenarioConfig, opts: &RunOptions, want_density: bool) -> Result<Outputs, CliError> {
    let model = cfg.model()?;
    let r = model_r(&model);
    let n_max = cfg.n_max(opts.n_max, recommended_n_max(r));
    let basis = FockBasis::two_mode(n_max).map_err(core("basis"))?;
    let mut ss_opts = SteadyStateOptions::default();
    if let Some(block) = &cfg.steady_state {
        if let Some(m) = block.method {
            ss_opts.method = match m {
                SteadyMethodChoice::Auto => SteadyStateMethod::Auto,
                SteadyMethodChoice::InverseIteration => SteadyStateMethod::InverseIteration,
                SteadyMethodChoice::LongTimeIntegration => SteadyStateMethod::LongTimeIntegration,
            };
        }
        if let Some(tol) = block.tol {
            if !(tol > 0.0) {
                return Err(CliError::config("steady_state.tol", "must be > 0"));
            }
            ss_opts.tol = tol;
        }
    }
    let report = steady_state_with(&model, basis, &ss_opts).map_err(core("steady_state"))?;
    let rho = &report.state;
    let target = tmss_fock(TmssSpec::new(r).map_err(core("model"))?, basis).map_err(core("model"))?;
    let cov = CovarianceState::from_density(rho).map_err(core("steady_state"))?;
    let (var_sum_q, var_diff_p) = epr_variances(&cov).map_err(core("steady_state"))?;
    let crit = epr_criterion(var_sum_q.max(0.0), var_diff_p.max(0.0)).map_err(core("steady_state"))?;
    let value = json!({
        "command": "steady-state",
        "n_max": n_max,
        "model": model_json(&model),
        "r": r,
        "fidelity_to_tmss": fidelity(rho, &target).map_err(core("steady_state"))?,
        "purity": rho.purity(),
        "mean_phonon": [
            mean_phonon(rho, 0).map_err(core("steady_state"))?,
            mean_phonon(rho, 1).map_err(core("steady_state"))?,
        ],
        "var_sum_q": var_sum_q,
        "var_diff_p": var_diff_p,
        "epr_criterion": EprJson { value: crit.value, entangled: crit.entangled },
        "residual": report.residual,
        "method": report.method,
        "iterations": report.iterations,
        "warnings": report.warnings,
    });
    for w in &report.warnings {
        log::warn!("{w}");
    }
    let density_csv = want_density.then(|| {
        let d = basis.dim();
        let e = rho.elements();
        let rows = (0..d * d)
            .map(|k| (k / d, k % d))
            .filter(|&(i, j)| e[(i, j)].norm() > 0.0)
            .map(|(i, j)| {
                let (m1, m2) = basis.occupations(i);
                let (k1, k2) = basis.occupations(j);
                vec![m1 as f64, m2 as f64, k1 as f64, k2 as f64, e[(i, j)].re, e[(i, j)].im]
            });
        csv(&["m1", "m2", "k1", "k2", "re", "im"], rows)
    });
    Ok(Outputs {
        primary: json_string(&value),
        meta: None,
        summary: None,
        density_csv,
    })
}

pub fn evolve(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Outputs, CliError> {
    let model = cfg.model()?;
    let block = cfg
        .time
        .as_ref()
        .ok_or_else(|| CliError::config("time", "block is required for this command"))?;
    let times = block.t.resolve("time.t")?;
    let n_max = cfg.n_max(opts.n_max, recommended_n_max(model_r(&model)));
    let basis = FockBasis::two_mode(n_max).map_err(core("basis"))?;
    let evo = EvolveOptions {
        keep_states: false,
        exec: opts.exec,
        ..EvolveOptions::default()
    };
    let res = if times.is_empty() {
        Vec::new()
    } else {
        evolve_with(&DensityMatrix::vacuum(basis), &model, &times, &evo)
            .map_err(core("time"))?
            .moments
    };
    let rows = res
        .iter()
        .map(|m| vec![m.t, m.n1, m.n2, m.re_b1b2, m.im_b1b2, m.var_sum_q, m.var_diff_p, m.purity]);
    let meta = json!({
        "command": "evolve",
        "n_max": n_max,
        "model": model_json(&model),
        "initial_state": "vacuum",
        "max_trace_error": res.iter().map(|m| (m.trace - 1.0).abs()).fold(0.0, f64::max),
    });
    Ok(Outputs {
        primary: csv(
            &["t", "n1", "n2", "re_b1b2", "im_b1b2", "var_sum_q", "var_diff_p", "purity"],
            rows,
        ),
        meta: Some(meta),
        summary: None,
        density_csv: None,
    })
}

pub fn wigner(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Outputs, CliError> {
    let block = cfg
        .wigner
        .as_ref()
        .ok_or_else(|| CliError::config("wigner", "block is required for this command"))?;
    let axis = |name: &str, own: &Option<crate::config::AxisSpec>| -> Result<Vec<f64>, CliError> {
        match (own, &block.axis) {
            (Some(a), _) => a.resolve(&format!("wigner.{name}")),
            (None, Some(a)) => a.resolve("wigner.axis"),
            (None, None) => Err(CliError::config(&format!("wigner.{name}"), "no axis given (set `axis` or per-coordinate axes)")),
        }
    };
    let grid = WignerGrid::new(
        axis("q1", &block.q1)?,
        axis("p1", &block.p1)?,
        axis("q2", &block.q2)?,
        axis("p2", &block.p2)?,
    );

    let model = match block.source {
        WignerSource::SteadyState => Some(cfg.model()?),
        _ => None,
    };
    let r = match block.source {
        WignerSource::Vacuum => 0.0,
        _ => match (block.r, &model, cfg.nopa()?) {
            (Some(r), _, _) => r,
            (None, Some(m), _) => model_r(m),
            (None, None, Some(nopa)) => nopa.squeeze_parameter(),
            (None, None, None) => return Err(CliError::config("wigner.r", "missing (and no nopa block to derive it)")),
        },
    };
    let spec = TmssSpec::new(r).map_err(core("wigner"))?;
    let n_max = cfg.n_max(opts.n_max, recommended_n_max(r).max(20));
    let basis = FockBasis::two_mode(n_max).map_err(core("basis"))?;

    let analytic = wigner_analytic_grid(spec, &grid, opts.exec);
    let rho = match block.source {
        WignerSource::Tmss => Some(tmss_fock(spec, basis).map_err(core("wigner"))?.to_density()),
        WignerSource::Vacuum => Some(PureState::vacuum(basis).to_density()),
        WignerSource::SteadyState => {
            let report = steady_state_with(model.as_ref().unwrap(), basis, &SteadyStateOptions::default())
                .map_err(core("steady_state"))?;
            Some(report.state)
        }
        WignerSource::None => None,
    };
    let from_rho = match &rho {
        Some(rho) => Some(wigner_from_density(rho, &grid, opts.exec).map_err(core("wigner"))?),
        None => None,
    };

    let mut header = vec!["q1", "p1", "q2", "p2", "w_analytic"];
    if from_rho.is_some() {
        header.push("w_from_rho");
    }
    let rows = (0..grid.len()).map(|i| {
        let mut row = grid.point(i).to_vec();
        row.push(analytic.values[i]);
        if let Some(w) = &from_rho {
            row.push(w.grid.values[i]);
        }
        row
    });
    let primary = csv(&header, rows);

    let max_dev = from_rho.as_ref().map(|w| {
        w.grid
            .values
            .iter()
            .zip(&analytic.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    });
    let warning = from_rho.as_ref().and_then(|w| w.truncation_warning.clone());
    if let Some(w) = &warning {
        eprintln!("warning: {w}");
    }
    let meta = json!({
        "command": "wigner",
        "r": r,
        "n_max": n_max,
        "source": format!("{:?}", block.source).to_lowercase(),
        "points": grid.len(),
        "max_abs_deviation": max_dev,
        "truncation_warning": warning,
    });
    Ok(Outputs {
        primary,
        meta: Some(meta),
        summary: None,
        density_csv: None,
    })
}

pub fn bell(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Outputs, CliError> {
    let mut spec = BellSweepSpec::default();
    if let Some(b) = &cfg.bell {
        if let Some(r) = &b.r {
            spec.r_values = r.resolve("bell.r")?;
        }
        if let Some(j) = &b.j {
            spec.j_values = j.resolve("bell.J")?;
        }
        if let Some(s) = b.beta_sign {
            spec.beta_sign = s;
        }
        if let Some(state) = b.state {
            spec.state = match state {
                BellStateChoice::Tmss => BellState::Tmss,
                BellStateChoice::Vacuum => BellState::Vacuum,
            };
        }
    }
    spec.n_max = cfg.n_max(opts.n_max, spec.n_max);
    let res = bell_sweep(&spec, opts.exec).map_err(core("bell"))?;
    let rows = res.rows.iter().map(|row| vec![row.r, row.j, row.b]);
    let primary = csv(&["r", "J", "B"], rows);
    let meta = json!({
        "command": "bell-sweep",
        "state": spec.state,
        "n_max": spec.n_max,
        "beta_sign": spec.beta_sign,
        "settings": "alpha1 = beta1 = 0, alpha2 = sqrt(J), beta2 = beta_sign * sqrt(J)",
        "points": res.rows.len(),
        "max": { "B": res.max.b, "r": res.max.r, "J": res.max.j },
        "violation": res.max.b > 2.0,
    });
    let summary = format!(
        "max B = {:.10} at r = {}, J = {} ({})",
        res.max.b,
        res.max.r,
        res.max.j,
        if res.max.b > 2.0 { "violation" } else { "no violation" }
    );
    Ok(Outputs {
        primary,
        meta: Some(meta),
        summary: Some(summary),
        density_csv: None,
    })
}

pub fn feasibility(cfg: &ScenarioConfig) -> Result<Outputs, CliError> {
    let params = cfg
        .experiment
        .as_ref()
        .ok_or_else(|| CliError::config("experiment", "block is required for this command"))?;
    let block = cfg.feasibility.clone().unwrap_or_default();
    let r = match (block.r, cfg.nopa()?) {
        (Some(r), _) => r,
        (None, Some(nopa)) => nopa.squeeze_parameter(),
        (None, None) => 0.0,
    };
    let threshold = block.threshold.unwrap_or(DEFAULT_THRESHOLD);
    let report = check_all(params, r, threshold).map_err(|e| match e {
        eprsim::Error::InvalidParameter { name, reason } if name == "r" || name == "threshold" => {
            CliError::config(&format!("feasibility.{name}"), reason)
        }
        e => CliError::from_core("experiment", e),
    })?;
    Ok(Outputs::primary(json_string(&report)))
}

pub fn cascade(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Outputs, CliError> {
    let nopa = cfg.require_nopa()?;
    let ratios = cfg
        .cascade
        .as_ref()
        .map(|c| c.kappa_over_gamma.clone())
        .unwrap_or_else(|| vec![10.0, 100.0, 1000.0, 10000.0]);
    let rows = cascade_sweep(&nopa, &ratios, opts.exec).map_err(core("cascade"))?;
    let out = rows
        .iter()
        .map(|r| vec![r.kappa_over_gamma, r.var_sum_q, r.var_sum_q_whitenoise, r.rel_error]);
    Ok(Outputs::primary(csv(
        &["kappa_over_gamma", "var_sum_q", "var_sum_q_whitenoise", "rel_error"],
        out,
    )))
}
