use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fsi_core::models::{ModelSpec, PlateModel, Sampler};
use fsi_core::plate::{GalerkinBasis, PlateGrid};
use fsi_core::ExecMode;

// Monte Carlo sampling of the Lipschitz constant and the coercivity margin:
// the embarrassingly parallel part of every setup.
fn sampling(c: &mut Criterion) {
    let basis = GalerkinBasis::build(PlateGrid::unit_square(12).unwrap(), 4).unwrap();
    let mut group = c.benchmark_group("sampling");
    group.sample_size(10);
    for spec in [ModelSpec::default_kirchhoff(), ModelSpec::default_von_karman()] {
        let model = PlateModel::with_defaults(&spec, &basis).unwrap();
        for mode in [ExecMode::Sequential, ExecMode::Parallel] {
            let s = Sampler::new(&model, &basis, 7).with_mode(mode);
            group.bench_with_input(
                BenchmarkId::new(format!("{}/lipschitz", model.name()), format!("{mode:?}")),
                &s,
                |b, s| b.iter(|| s.estimate_lipschitz(3.0, 0.5, 400).unwrap()),
            );
            group.bench_with_input(
                BenchmarkId::new(format!("{}/coercivity", model.name()), format!("{mode:?}")),
                &s,
                |b, s| b.iter(|| s.check_coercivity(3.0, 400).unwrap()),
            );
        }
    }
    group.finish();
}

criterion_group!(benches, sampling);
criterion_main!(benches);
