use std::hint::black_box;

use cbe_mom::jack::jack_eval;
use cbe_mom::montecarlo::{mom_mc, McConfig};
use cbe_mom::{mom_exact, psi, ArraySpec, MomOptions, RationalParam, Signature};
use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

fn dp(c: &mut Criterion) {
    let half = RationalParam::from_ratio(1, 2).unwrap();
    let mut g = c.benchmark_group("mom_exact");
    g.sample_size(10);
    for n in [4, 8] {
        let spec = ArraySpec::new(n, 2, 2).unwrap();
        g.bench_function(format!("N={n} k=2 q=2 delta=1/2"), |b| {
            b.iter(|| mom_exact(black_box(&spec), &half, &MomOptions::default()).unwrap())
        });
    }
    let spec = ArraySpec::new(200, 2, 1).unwrap();
    g.bench_function("N=200 k=2 q=1 delta=1", |b| {
        b.iter(|| {
            mom_exact(
                black_box(&spec),
                &RationalParam::schur(),
                &MomOptions::default(),
            )
            .unwrap()
        })
    });
    g.finish();
}

fn weights(c: &mut Criterion) {
    let mu = Signature::new(vec![9, 7, 4, 2, 1]).unwrap();
    let lambda = Signature::new(vec![10, 8, 6, 3, 1, 0]).unwrap();
    let d = RationalParam::from_ratio(2, 3).unwrap();
    c.bench_function("psi M=5", |b| {
        b.iter(|| psi(black_box(&mu), black_box(&lambda), &d).unwrap())
    });
}

fn jack(c: &mut Criterion) {
    let lambda = Signature::new(vec![4, 4, 0, 0]).unwrap();
    let points: Vec<Complex64> = [0.3, 1.1, 2.0, 4.4]
        .iter()
        .map(|&t| Complex64::from_polar(1.0, t))
        .collect();
    let d = RationalParam::from_ratio(1, 2).unwrap();
    c.bench_function("jack_eval (4,4,0,0)", |b| {
        b.iter(|| jack_eval(black_box(&lambda), black_box(&points), &d).unwrap())
    });
}

fn mcmc(c: &mut Criterion) {
    let spec = ArraySpec::new(8, 2, 1).unwrap();
    let cfg = McConfig {
        samples: 4000,
        burn_in: 100,
        ..McConfig::default()
    };
    let mut g = c.benchmark_group("mom_mc");
    g.sample_size(10);
    g.bench_function("N=8 k=2 q=1 beta=1", |b| {
        b.iter(|| mom_mc(black_box(&spec), 1.0, &cfg).unwrap())
    });
    g.finish();
}

criterion_group!(benches, dp, weights, jack, mcmc);
criterion_main!(benches);
