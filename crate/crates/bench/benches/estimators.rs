use std::f64::consts::FRAC_PI_2;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use trawl_core::spectral::{periodogram, KernelEstimator};
use trawl_core::trawl::Simulator;
use trawl_core::whittle::{fit_whittle, local_whittle};
use trawl_core::{KernelSpec, SeedSpec, SimulationConfig, TimeSeries, TrawlModel, TrawlSequence, WhittleConfig};

const N: usize = 5000;

fn model(alpha: f64) -> TrawlModel {
    TrawlModel::new(SeedSpec::Poisson, TrawlSequence::power(10.0, alpha).unwrap()).unwrap()
}

fn sample(alpha: f64) -> TimeSeries {
    Simulator::new(&model(alpha), &SimulationConfig::new(N, 1))
        .unwrap()
        .sample_stream(0)
}

fn simulation(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate");
    for alpha in [1.1, 1.5, 1.9] {
        let sim = Simulator::new(&model(alpha), &SimulationConfig::new(N, 1)).unwrap();
        let mut stream = 0;
        g.bench_function(format!("poisson alpha={alpha} n={N}"), |b| {
            b.iter(|| {
                stream += 1;
                sim.sample_stream(stream)
            })
        });
    }
    g.finish();
}

fn estimators(c: &mut Criterion) {
    let x = sample(1.5);
    let p = periodogram(&x).unwrap();
    c.bench_function("periodogram n=5000", |b| b.iter(|| periodogram(black_box(&x)).unwrap()));
    c.bench_function("local_whittle m=100", |b| b.iter(|| local_whittle(black_box(&p), 100).unwrap()));

    let mut g = c.benchmark_group("fit_whittle");
    g.sample_size(10);
    for degree in [0, 2, 5] {
        let config = WhittleConfig::with_degree(degree);
        g.bench_function(format!("degree={degree}"), |b| b.iter(|| fit_whittle(black_box(&p), &config).unwrap()));
    }
    g.finish();

    let kernel = KernelSpec::default();
    c.bench_function("kernel estimator setup b=0.2", |b| {
        b.iter(|| KernelEstimator::new(&kernel, black_box(0.2), N).unwrap())
    });
    let est = KernelEstimator::new(&kernel, 0.2, N).unwrap();
    c.bench_function("kernel estimate b=0.2", |b| b.iter(|| est.estimate(black_box(&x), FRAC_PI_2).unwrap()));
}

criterion_group!(benches, simulation, estimators);
criterion_main!(benches);
