use criterion::{criterion_group, criterion_main, Criterion};
use genfam::{
    a_membership, lambda2_membership, run, solve_critical, DynamicsCandidate, MinkowskiSpace, OpticsModel, ParticleModel,
    SolverConfig, Suite, SuiteConfig,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn membership(c: &mut Criterion) {
    let cfg = SolverConfig::default().with_tolerance(1e-8);
    let particle = ParticleModel::new(MinkowskiSpace::standard(4), 1.0).unwrap();
    let sys = particle.systems(&SolverConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let w = particle.sample_member(&mut rng);
    let cand = DynamicsCandidate::Single(w.clone());

    c.bench_function("particle/lagrangian_membership", |b| {
        b.iter(|| a_membership(sys.lagrangian.object(), black_box(&cand), &[], &cfg).unwrap())
    });
    let seeds = particle.full_seeds(&w.q.0, &w.p.0, &w.qdot.0);
    c.bench_function("particle/legendre_transform_membership", |b| {
        b.iter(|| a_membership(sys.hamiltonian_full.object(), black_box(&cand), &seeds, &cfg).unwrap())
    });
    let seeds = particle.reduced_seeds(&w.qdot.0);
    c.bench_function("particle/reduced_membership", |b| {
        b.iter(|| a_membership(sys.hamiltonian_reduced.object(), black_box(&cand), &seeds, &cfg).unwrap())
    });

    let optics = OpticsModel::new(MinkowskiSpace::standard(4)).unwrap();
    let lag = optics.lagrangian();
    let (p, v) = optics.sample_lambda2(&mut rng, true);
    let seeds = optics.scalar_seeds(&p.p.0, &v.qdot.0);
    c.bench_function("optics/lambda2_membership", |b| {
        b.iter(|| lambda2_membership(&lag, black_box(&p), black_box(&v), &seeds, &cfg).unwrap())
    });
    let fam = optics.lagrangian_family();
    let base = [w.q.0.clone(), vec![-1.0, 0.6, 0.8, 0.0]].concat();
    c.bench_function("optics/solve_critical_timelike", |b| {
        b.iter(|| solve_critical(&fam, black_box(&base), &[1.0], &cfg).unwrap())
    });
}

fn suites(c: &mut Criterion) {
    let mut group = c.benchmark_group("suites");
    group.sample_size(10);
    for suite in [Suite::Bundles, Suite::Homogeneity, Suite::Legendre] {
        let cfg = SuiteConfig { suite, samples: Some(20), ..SuiteConfig::default() };
        group.bench_function(suite.name(), |b| b.iter(|| run(black_box(&cfg)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, membership, suites);
criterion_main!(benches);
