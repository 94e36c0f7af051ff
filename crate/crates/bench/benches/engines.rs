use criterion::{black_box, criterion_group, criterion_main, Criterion};

use optodip::fit::{fit_dip, DipFitOptions};
use optodip::{CavityParams, Engine, NoiseBudget, Port};
use optodip_bench::{dip_fixture, low_band_grid};

fn budgets(c: &mut Criterion) {
    let params = CavityParams::nominal();
    let grid = low_band_grid();
    let opts = Default::default();
    let mut g = c.benchmark_group("budget_500pt");
    for (name, engine) in [
        ("exact", Engine::Exact),
        ("closed_form", Engine::ClosedForm),
    ] {
        g.bench_function(name, |b| {
            b.iter(|| {
                NoiseBudget::compute(black_box(&params), &grid, Port::Reflection, engine, &opts)
                    .unwrap()
            })
        });
    }
    g.finish();
}

fn dip_fit(c: &mut Criterion) {
    let data = dip_fixture(7);
    let opts = DipFitOptions::default();
    c.bench_function("fit_dip_301pt", |b| {
        b.iter(|| fit_dip(black_box(&data), &opts).unwrap())
    });
}

criterion_group!(benches, budgets, dip_fit);
criterion_main!(benches);
