//! Sequential vs rayon execution of the data-parallel kernels.
//!
//!     cargo bench -p eprsim --bench sweeps
//!
//! Without the `parallel` feature both arms run the same loop.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use eprsim::hilbert::FockBasis;
use eprsim::lindblad::{build_sector, LindbladModel};
use eprsim::metrics::{bell_sweep, BellSweepSpec};
use eprsim::nopa::NopaParams;
use eprsim::states::{tmss_fock, wigner_analytic_grid, wigner_from_density, TmssSpec, WignerGrid};
use eprsim::{Execution, C64};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bell(c: &mut Criterion) {
    let mut group = c.benchmark_group("bell_sweep");
    group.sample_size(10);
    let spec = BellSweepSpec {
        r_values: vec![0.4, 0.8, 1.2],
        j_values: (1..=10).map(|k| 0.02 * k as f64).collect(),
        n_max: 30,
        ..BellSweepSpec::default()
    };
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "3x10 n30"), |b| b.iter(|| bell_sweep(black_box(&spec), exec).unwrap()));
    }
    group.finish();
}

fn wigner(c: &mut Criterion) {
    let mut group = c.benchmark_group("wigner");
    group.sample_size(10);
    let spec = TmssSpec::new(0.5).unwrap();
    let axis: Vec<f64> = (0..5).map(|k| -2.0 + k as f64).collect();
    let grid = WignerGrid::cube(&axis);
    let rho = tmss_fock(spec, FockBasis::two_mode(20).unwrap()).unwrap().to_density();
    let fine: Vec<f64> = (0..24).map(|k| -2.0 + k as f64 / 6.0).collect();
    let fine = WignerGrid::cube(&fine);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "from_rho 5^4 n20"), |b| {
            b.iter(|| wigner_from_density(black_box(&rho), &grid, exec).unwrap())
        });
        group.bench_function(BenchmarkId::new(name, "analytic 24^4"), |b| {
            b.iter(|| wigner_analytic_grid(spec, black_box(&fine), exec))
        });
    }
    group.finish();
}

fn generator(c: &mut Criterion) {
    let mut group = c.benchmark_group("generator_apply");
    let model = LindbladModel::from_nopa(&NopaParams::from_ratio(0.5).unwrap(), 1.0).unwrap();
    let sector = build_sector(&model, FockBasis::two_mode(40).unwrap(), 0).unwrap();
    let v: Vec<C64> = (0..sector.len()).map(|k| C64::new(1.0 / (1 + k) as f64, 0.0)).collect();
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, format!("q=0 n40 ({} rows)", sector.len())), |b| {
            b.iter(|| sector.apply(black_box(&v), exec))
        });
    }
    group.finish();
}

fn spectra(c: &mut Criterion) {
    let mut group = c.benchmark_group("nopa_spectra");
    let nopa = NopaParams::from_ratio(0.5).unwrap();
    let omega: Vec<f64> = (0..100_000).map(|k| -10.0 + 2e-4 * k as f64).collect();
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, "1e5 points"), |b| {
            b.iter(|| nopa.squeezing_spectra(black_box(&omega), exec))
        });
    }
    group.finish();
}

criterion_group!(benches, bell, wigner, generator, spectra);
criterion_main!(benches);
