//! Fock-space dynamics against the covariance propagator, which is exact for
//! this quadratic model.

use eprsim::gaussian::{epr_variances, evolve_covariance, model_from_lindblad, steady_covariance, CovarianceState};
use eprsim::hilbert::{DensityMatrix, FockBasis};
use eprsim::lindblad::{evolve, steady_state, LindbladModel};
use eprsim::nopa::NopaParams;

fn models() -> Vec<(&'static str, LindbladModel)> {
    let pumped = |x: f64| LindbladModel::from_nopa(&NopaParams::from_ratio(x).unwrap(), 1.0).unwrap();
    vec![
        ("eps=0.1", pumped(0.1)),
        ("eps=0.25", pumped(0.25)),
        ("eps=0.25 heated", pumped(0.25).with_heating(0.1).unwrap()),
        ("thermal", LindbladModel::new(0.7, 0.3, 0.0).unwrap()),
        ("mixed bath", LindbladModel::new(1.3, 0.2, 0.3).unwrap()),
    ]
}

#[test]
fn trajectories_match_covariance_propagation() {
    let gamma_t = [0.0, 0.1, 1.0, 5.0, 20.0];
    let basis = FockBasis::two_mode(24).unwrap();
    for (name, model) in models() {
        let dd = model_from_lindblad(&model).unwrap();
        let times: Vec<f64> = gamma_t.iter().map(|x| x / model.gamma()).collect();
        let fock = evolve(&DensityMatrix::vacuum(basis), &model, &times).unwrap();
        for (k, (&t, &x)) in times.iter().zip(&gamma_t).enumerate() {
            let g = evolve_covariance(&CovarianceState::vacuum(2), &dd, t).unwrap();
            let f = CovarianceState::from_density(&fock.states[k]).unwrap();
            let dev = (g.cov() - f.cov()).amax();
            assert!(dev < 1e-6, "{name} at Γt={x}: covariance deviation {dev:.3e}");
            let (s, d) = epr_variances(&g).unwrap();
            assert!((s - fock.moments[k].var_sum_q).abs() < 1e-6, "{name} Γt={x}");
            assert!((d - fock.moments[k].var_diff_p).abs() < 1e-6, "{name} Γt={x}");
            assert!((fock.moments[k].trace - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn steady_states_match_lyapunov_solution() {
    let basis = FockBasis::two_mode(24).unwrap();
    for (name, model) in models() {
        let g = steady_covariance(&model_from_lindblad(&model).unwrap()).unwrap();
        let report = steady_state(&model, basis).unwrap();
        let f = CovarianceState::from_density(&report.state).unwrap();
        let dev = (g.cov() - f.cov()).amax();
        assert!(dev < 1e-6, "{name}: steady covariance deviation {dev:.3e}");
        assert!((g.purity() - report.state.purity()).abs() < 1e-6, "{name}: purity");
    }
}
