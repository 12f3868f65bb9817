use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reflectionless::experiments::{random_admissible, random_selector};
use reflectionless::extremal::brute_force_a_with;
use reflectionless::{nu_plus, par, reconstruct, rho_from_herglotz, CompactSet, Execution, ExtremalConfig, HerglotzRep};

const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn grid_sweep(c: &mut Criterion) {
    let set = CompactSet::new(vec![(-2.0, -0.5), (0.5, 2.0)]).unwrap();
    let mut group = c.benchmark_group("brute_force_grid_201");
    for exec in MODES {
        let cfg = ExtremalConfig {
            grid: 201,
            exec,
            ..ExtremalConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &cfg, |b, cfg| {
            b.iter(|| brute_force_a_with(&set, set.default_bound(), cfg).unwrap())
        });
    }
    group.finish();
}

fn sample_sweep(c: &mut Criterion) {
    let band = CompactSet::interval(-2.0, 2.0).unwrap();
    let seeds: Vec<u64> = (0..64).collect();
    let a0 = |&seed: &u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xi = random_admissible(&band, &mut rng).unwrap().xi;
        let rho = rho_from_herglotz(&HerglotzRep::new(xi)).unwrap();
        let f = random_selector(&rho, &band, &mut rng);
        reconstruct(&nu_plus(&rho, &band, &f).unwrap(), 5).unwrap().a0()
    };
    let mut group = c.benchmark_group("random_samples_64");
    group.sample_size(10);
    for exec in MODES {
        group.bench_function(format!("{exec:?}"), |b| b.iter(|| par::map(exec, &seeds, a0)));
    }
    group.finish();
}

criterion_group!(benches, grid_sweep, sample_sweep);
criterion_main!(benches);
