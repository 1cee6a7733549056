use std::hint::black_box;
use std::time::Duration;

use criterion::{BenchmarkId, Criterion, criterion_group, criterion_main};
use lacunary::constants;
use lacunary::counting::{self, CoeffTable};
use lacunary::density::Rational;
use lacunary::euler;
use lacunary::series;
use lacunary::{Execution, GradedForm, HeckeModule, ModuleConfig, Prime};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn products(c: &mut Criterion) {
    let p = Prime::new(13).unwrap();
    let mut g = c.benchmark_group("series");
    // dense by dense products are quadratic, so they stop at 10^5
    for prec in [10_000usize, 100_000] {
        let a = series::eisenstein(p, 4, prec).unwrap();
        let b = series::eisenstein(p, 6, prec).unwrap();
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(format!("mul/{name}"), prec), &prec, |bench, _| {
                bench.iter(|| series::mul_with(black_box(&a), black_box(&b), exec).unwrap())
            });
        }
    }
    for prec in [100_000usize, 1_000_000] {
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(format!("delta_power/{name}"), prec), &prec, |bench, &n| {
                bench.iter(|| series::delta_power_with(p, black_box(5), n, exec))
            });
        }
    }
    g.finish();
}

fn counts(c: &mut Criterion) {
    let t = CoeffTable::from_series(series::delta_power(Prime::new(7).unwrap(), 1, 1_000_000));
    let mut g = c.benchmark_group("counting");
    for (name, exec) in MODES {
        g.bench_function(name, |bench| bench.iter(|| counting::count(black_box(&t), &counting::DEFAULT_CHECKPOINTS, exec).unwrap()));
    }
    g.finish();
}

fn euler_products(c: &mut Criterion) {
    let beta = Rational::new(1, 2);
    let mut g = c.benchmark_group("euler");
    for (name, exec) in MODES {
        g.bench_function(name, |bench| {
            bench.iter(|| euler::euler_constant_with(&[1], 3, &beta, 1, black_box(1_000_000), exec).unwrap())
        });
    }
    g.finish();
}

fn square_full(c: &mut Criterion) {
    let p = Prime::new(3).unwrap();
    let f = GradedForm::new(series::delta_power(p, 2, 300), 24).unwrap();
    let m = HeckeModule::build(&f, &ModuleConfig::default()).unwrap();
    let seed = m.seed_vector();
    let mut g = c.benchmark_group("squarefull_orbit");
    for (name, exec) in MODES {
        g.bench_function(name, |bench| bench.iter(|| constants::squarefull_orbit(&m, &seed, black_box(10_000_000_000), exec).unwrap()));
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10).measurement_time(Duration::from_secs(3));
    targets = products, counts, euler_products, square_full
}
criterion_main!(benches);
