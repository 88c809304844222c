//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any failed.
//!
//!     cargo test -p eprsim-cli --test acceptance

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use eprsim::gaussian::{cascade_sweep, epr_variances, evolve_covariance, model_from_lindblad, steady_covariance, CovarianceState};
use eprsim::feasibility::{check_all, coupling_rate, cooperativity, ExperimentParams, Verdict};
use eprsim::hilbert::{DensityMatrix, FockBasis};
use eprsim::lindblad::{evolve, steady_state, LindbladModel};
use eprsim::metrics::{epr_criterion, fidelity, mean_phonon};
use eprsim::nopa::NopaParams;
use eprsim::states::{tmss_fock, wigner_analytic, wigner_from_density, TmssSpec, WignerGrid};
use eprsim::Execution;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn core<T>(r: eprsim::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn pump_grid() -> Vec<f64> {
    (1..=19).map(|k| 0.05 * k as f64).collect()
}

fn identities() -> Outcome {
    let start = Instant::now();
    let mut worst_m = 0.0f64;
    let mut worst_root = 0.0f64;
    for x in pump_grid() {
        let (n, m) = core(NopaParams::from_ratio(x))?.effective_n_m();
        // relative: M² reaches ~1.5e5 at the top of the grid
        worst_m = worst_m.max((m * m - n * (n + 1.0)).abs() / (m * m).max(1.0));
        worst_root = worst_root.max(((n + 1.0).sqrt() - n.sqrt() - (1.0 - x) / (1.0 + x)).abs());
    }
    let elapsed = start.elapsed();
    ensure(worst_m <= 1e-12, format!("M^2 vs N(N+1): {worst_m:.3e}"))?;
    ensure(worst_root <= 1e-12, format!("sqrt identity: {worst_root:.3e}"))?;
    ensure(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!("max dev {worst_m:.1e} / {worst_root:.1e}, {elapsed:?}"))
}

fn steady_reproduction() -> Outcome {
    let start = Instant::now();
    let nopa = core(NopaParams::from_ratio(0.5))?;
    let model = core(LindbladModel::from_nopa(&nopa, 1.0))?;
    let basis = core(FockBasis::two_mode(40))?;
    let report = core(steady_state(&model, basis))?;
    let target = core(tmss_fock(core(TmssSpec::new(3f64.ln()))?, basis))?;
    let f = core(fidelity(&report.state, &target))?;
    let purity = report.state.purity();
    let n1 = core(mean_phonon(&report.state, 0))?;
    let n2 = core(mean_phonon(&report.state, 1))?;
    let elapsed = start.elapsed();
    ensure(f > 0.999, format!("fidelity {f}"))?;
    ensure(purity > 0.998, format!("purity {purity}"))?;
    for n in [n1, n2] {
        ensure((n - 16.0 / 9.0).abs() < 1e-3, format!("mean phonon {n}"))?;
    }
    ensure(elapsed < Duration::from_secs(300), format!("took {elapsed:?}"))?;
    Ok(format!("F={f:.7} purity={purity:.7} n={n1:.6}, {elapsed:?}"))
}

fn epr_chain() -> Outcome {
    for x in pump_grid() {
        let nopa = core(NopaParams::from_ratio(x))?;
        let r = nopa.squeeze_parameter();
        let model = core(LindbladModel::from_nopa(&nopa, 1.0))?;
        let cov = core(steady_covariance(&core(model_from_lindblad(&model))?))?;
        let (s, d) = core(epr_variances(&cov))?;
        let expected = 2.0 * (-2.0 * r).exp();
        ensure(
            (s - expected).abs() <= 1e-10 && (d - expected).abs() <= 1e-10,
            format!("eps={x}: ({s}, {d}) vs {expected}"),
        )?;
        ensure(core(epr_criterion(s, d))?.entangled, format!("eps={x}: not entangled"))?;
    }
    let nopa = core(NopaParams::from_ratio(0.5))?;
    let model = core(LindbladModel::from_nopa(&nopa, 1.0))?;
    let report = core(steady_state(&model, core(FockBasis::two_mode(40))?))?;
    let (s, d) = core(epr_variances(&core(CovarianceState::from_density(&report.state))?))?;
    let dev = (s - 2.0 / 9.0).abs().max((d - 2.0 / 9.0).abs());
    ensure(dev < 1e-3, format!("Fock-space variances ({s}, {d})"))?;
    Ok(format!("Gaussian exact over 19 pumps, Fock dev {dev:.1e}"))
}

fn relaxation() -> Outcome {
    let nopa = core(NopaParams::from_ratio(0.5))?;
    let model = core(LindbladModel::from_nopa(&nopa, 1.0))?;
    let (n, m) = (model.n_param(), model.m_param());
    let times: Vec<f64> = (0..=20).map(|k| 0.25 * k as f64).collect();
    // the transient state has a heavier Fock tail than the steady state;
    // n_max = 40 leaves ~3e-6 on ⟨b₁b₂⟩ near Γt = 1.5
    let basis = core(FockBasis::two_mode(50))?;
    let fock = core(evolve(&DensityMatrix::vacuum(basis), &model, &times))?;
    let dd = core(model_from_lindblad(&model))?;
    let vac = CovarianceState::vacuum(2);
    let (mut worst_fock, mut worst_gauss, mut worst_cross) = (0.0f64, 0.0f64, 0.0f64);
    for (k, &t) in times.iter().enumerate() {
        let growth = 1.0 - (-2.0 * t).exp();
        let exact = (n * growth, -m * growth);
        let mom = &fock.moments[k];
        let fock_vals = (mom.n1, mom.re_b1b2, mom.n2, mom.im_b1b2);
        let v = core(evolve_covariance(&vac, &dd, t))?;
        let c = v.cov();
        // Q = b + b†, P = -i(b - b†), vacuum variance 1
        let g_n1 = (c[(0, 0)] + c[(1, 1)] - 2.0) / 4.0;
        let g_re = (c[(0, 2)] - c[(1, 3)]) / 4.0;
        let g_im = (c[(0, 3)] + c[(1, 2)]) / 4.0;
        worst_fock = worst_fock
            .max((fock_vals.0 - exact.0).abs())
            .max((fock_vals.2 - exact.0).abs())
            .max((fock_vals.1 - exact.1).abs())
            .max(fock_vals.3.abs());
        worst_gauss = worst_gauss.max((g_n1 - exact.0).abs()).max((g_re - exact.1).abs()).max(g_im.abs());
        worst_cross = worst_cross.max((g_n1 - fock_vals.0).abs()).max((g_re - fock_vals.1).abs());
    }
    ensure(worst_fock < 1e-6, format!("Lindblad vs closed form {worst_fock:.3e}"))?;
    ensure(worst_gauss < 1e-6, format!("covariance vs closed form {worst_gauss:.3e}"))?;
    ensure(worst_cross < 1e-6, format!("Lindblad vs covariance {worst_cross:.3e}"))?;
    Ok(format!(
        "dev Lindblad {worst_fock:.1e}, covariance {worst_gauss:.1e}, cross {worst_cross:.1e}"
    ))
}

fn wigner_consistency() -> Outcome {
    let spec = core(TmssSpec::new(0.5))?;
    let axis: Vec<f64> = (0..5).map(|k| -2.0 + k as f64).collect();
    let grid = WignerGrid::cube(&axis);
    let rho = core(tmss_fock(spec, core(FockBasis::two_mode(30))?))?.to_density();
    let from_rho = core(wigner_from_density(&rho, &grid, Execution::default()))?;
    let dev = (0..grid.len())
        .map(|i| {
            let [q1, p1, q2, p2] = grid.point(i);
            (from_rho.grid.values[i] - wigner_analytic(spec, q1, p1, q2, p2)).abs()
        })
        .fold(0.0, f64::max);
    ensure(dev < 1e-3, format!("max |w_analytic - w_from_rho| = {dev:.3e}"))?;

    // composite Simpson on [-L, L]^4
    let (l, steps) = (4.5, 60usize);
    let h = 2.0 * l / steps as f64;
    let nodes: Vec<(f64, f64)> = (0..=steps)
        .map(|k| {
            let w = if k == 0 || k == steps { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            (-l + h * k as f64, w * h / 3.0)
        })
        .collect();
    let mut total = 0.0;
    for &(q1, w1) in &nodes {
        for &(p1, w2) in &nodes {
            for &(q2, w3) in &nodes {
                for &(p2, w4) in &nodes {
                    total += w1 * w2 * w3 * w4 * wigner_analytic(spec, q1, p1, q2, p2);
                }
            }
        }
    }
    ensure((total - 1.0).abs() < 1e-3, format!("normalization {total}"))?;
    Ok(format!("max dev {dev:.1e}, integral {total:.9}"))
}

fn spectra() -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..20 {
        let x = 0.04 + 0.045 * k as f64;
        let omega = -3.0 + 0.31 * k as f64;
        let nopa = core(NopaParams::from_ratio(x))?;
        let t = nopa.squeezing_spectra(&[omega], Execution::Sequential);
        let exact = ((1.0 - x).powi(2) + omega * omega) / ((1.0 + x).powi(2) + omega * omega);
        worst = worst
            .max((t.sum_x_variance[0] - exact).abs())
            .max((t.diff_y_variance[0] - exact).abs());
    }
    ensure(worst <= 1e-12, format!("rational form dev {worst:.3e}"))?;
    let mut prev = f64::INFINITY;
    for d in [1e-1, 1e-2, 1e-3, 1e-4, 1e-6] {
        let t = core(NopaParams::from_ratio(1.0 - d))?.squeezing_spectra(&[0.0], Execution::Sequential);
        let v = t.sum_x_variance[0].max(t.diff_y_variance[0]);
        ensure(v < prev && v <= d * d, format!("eps = 1 - {d}: {v}"))?;
        prev = v;
    }
    Ok(format!("20 spot checks dev {worst:.1e}, {prev:.1e} at eps = 1 - 1e-6"))
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_eprsim")
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(bin()).args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn bell_violation() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let meta = dir.path().join("meta.json");
    let cfg = repo_root().join("configs/bell_sweep.json");
    run_cli(&["bell-sweep", "--config", cfg.to_str().unwrap(), "--meta", meta.to_str().unwrap()])?;
    let got: serde_json::Value = serde_json::from_slice(&std::fs::read(&meta).unwrap()).unwrap();
    let golden: serde_json::Value = serde_json::from_str(include_str!("golden/bell_sweep_default.json")).unwrap();
    let b = got["max"]["B"].as_f64().unwrap();
    ensure(b > 2.0, format!("max B = {b}"))?;
    ensure(
        (b - golden["max"]["B"].as_f64().unwrap()).abs() <= golden["tolerance"].as_f64().unwrap()
            && got["max"]["r"] == golden["max"]["r"]
            && got["max"]["J"] == golden["max"]["J"],
        format!("maximum {} differs from golden {}", got["max"], golden["max"]),
    )?;

    let vac = run_cli(&["bell-sweep", "--config", repo_root().join("configs/bell_vacuum.json").to_str().unwrap()])?;
    let vmax = String::from_utf8(vac)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap().abs())
        .fold(0.0, f64::max);
    ensure(vmax <= 2.0 + 1e-9, format!("vacuum max |B| = {vmax}"))?;
    Ok(format!(
        "max B = {b:.10} at r = {}, J = {} (golden match); vacuum max {vmax:.6}",
        got["max"]["r"], got["max"]["J"]
    ))
}

fn white_noise_limit() -> Outcome {
    let nopa = core(NopaParams::from_ratio(0.5))?;
    let rows = core(cascade_sweep(&nopa, &[10.0, 100.0, 1000.0], Execution::default()))?;
    for w in rows.windows(2) {
        ensure(
            w[1].rel_error < w[0].rel_error,
            format!("rel_error not decreasing: {} -> {}", w[0].rel_error, w[1].rel_error),
        )?;
    }
    // least squares of ln(err) against ln(Γ/κ_c)
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| ((1.0 / r.kappa_over_gamma).ln(), r.rel_error.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = sxy * sxy / (sxx * syy);
    ensure(r2 > 0.99, format!("R^2 = {r2}"))?;
    ensure((slope - 1.0).abs() < 0.1, format!("log-log slope {slope}"))?;
    Ok(format!("errors {:.2e} {:.2e} {:.2e}, slope {slope:.4}, R^2 {r2:.6}", rows[0].rel_error, rows[1].rel_error, rows[2].rel_error))
}

fn feasibility_arithmetic() -> Outcome {
    let kappa_a = 1.0e6f64;
    let gamma_atom = 2.0e6;
    let mut p = ExperimentParams {
        g0: (70.0 * kappa_a * gamma_atom).sqrt(),
        kappa_a,
        gamma_atom,
        delta_big: 1.0e10,
        eta_x: 0.05,
        e_laser: 1.0e8,
        nu_x: 1.0e8,
        kappa_c: 1.0e9,
        t_decoherence: 1.0,
        nu_y: None,
        nu_z: None,
        phi_l: None,
    };
    let c1 = cooperativity(&p);
    ensure((c1 - 70.0).abs() <= 1e-9 * 70.0, format!("C1 = {c1}"))?;
    // choose E_L so that g₀η_xE_L/Δ = 0.1κ_a
    p.e_laser = 0.1 * kappa_a * p.delta_big / (p.g0 * p.eta_x);
    let gamma = coupling_rate(&p);
    ensure((gamma - 0.01 * kappa_a).abs() <= 1e-9 * kappa_a, format!("Gamma = {gamma}"))?;

    let r = 0.8f64;
    let report = core(check_all(&p, r, 10.0))?;
    let ld = report.check("lamb_dicke_refined").ok_or("missing Lamb-Dicke check")?;
    let expected = 1.0 / (p.eta_x * r.cosh());
    ensure((ld.ratio - expected).abs() <= 1e-12 * expected, format!("Lamb-Dicke ratio {}", ld.ratio))?;
    p.eta_x = 0.05 / r.cosh();
    let ld = core(check_all(&p, r, 10.0))?.check("lamb_dicke_refined").cloned().unwrap();
    ensure(ld.verdict == Verdict::Pass, format!("eta cosh r = 0.05 gives {:?}", ld.verdict))?;
    Ok(format!("C1 = {c1:.9}, Gamma/kappa_a = {:.9}, Lamb-Dicke ratio {:.3}", gamma / kappa_a, ld.ratio))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let small = dir.path().join("small.json");
    std::fs::write(
        &small,
        r#"{
  "schema_version": 1,
  "nopa": { "epsilon": 0.3 },
  "model": { "gamma": 0.02, "heating_rate": 0.001 },
  "basis": { "n_max": 12 },
  "spectrum": { "omega": { "min": -4.0, "max": 4.0, "points": 33 } },
  "time": { "t": { "values": [0.0, 5.0, 20.0, 60.0] } },
  "wigner": { "r": 0.4, "source": "steady_state", "axis": { "min": -1.5, "max": 1.5, "points": 4 } },
  "bell": { "r": { "values": [0.3, 0.9] }, "J": { "min": 0.01, "max": 0.2, "points": 8 } },
  "cascade": { "kappa_over_gamma": [10.0, 100.0, 1000.0] }
}"#,
    )
    .unwrap();
    let small = small.to_str().unwrap().to_owned();
    let feas = repo_root().join("configs/feasibility.json").to_str().unwrap().to_owned();
    let jobs: [(&str, &str); 7] = [
        ("nopa-spectrum", &small),
        ("steady-state", &small),
        ("evolve", &small),
        ("wigner", &small),
        ("bell-sweep", &small),
        ("feasibility", &feas),
        ("cascade", &small),
    ];
    for (cmd, cfg) in jobs {
        let mut outputs = Vec::new();
        for workers in [None, Some("1"), Some("3"), Some("1")] {
            let mut args = vec![cmd, "--config", cfg];
            if let Some(w) = workers {
                args.extend(["--workers", w]);
            }
            outputs.push(run_cli(&args)?);
        }
        ensure(!outputs[0].is_empty(), format!("{cmd}: empty output"))?;
        ensure(outputs.iter().all(|o| *o == outputs[0]), format!("{cmd}: outputs differ across runs"))?;
    }
    Ok("7 commands x 4 runs (default, 1, 3, 1 workers) byte-identical".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 pump identities", identities),
        ("2 steady state vs TMSS", steady_reproduction),
        ("3 EPR variance chain", epr_chain),
        ("4 relaxation oracle", relaxation),
        ("5 Wigner consistency", wigner_consistency),
        ("6 amplifier spectra", spectra),
        ("7 Bell violation", bell_violation),
        ("8 white-noise limit", white_noise_limit),
        ("9 feasibility arithmetic", feasibility_arithmetic),
        ("10 determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let start = Instant::now();
        match f() {
            Ok(detail) => println!("PASS  {name:<26} {detail} [{:.2?}]", start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<26} {why} [{:.2?}]", start.elapsed());
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
