use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qds_core::hash::Scheme;
use qds_core::kgp::{rate_from_estimates, tptf_simulate, RateScheme, SimConfig};
use qds_core::par;
use qds_core::postproc::{toeplitz_pa_blocked, PaMatrixSpec};
use qds_core::protocol::simulate_forgery;
use qds_core::{BitString, ExecMode};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

const MODES: [(&str, ExecMode); 2] = [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)];

fn rate_sweep(c: &mut Criterion) {
    let distances: Vec<f64> = (0..=14).map(|k| 50.0 * k as f64).collect();
    let mut g = c.benchmark_group("rate_sweep");
    for (name, mode) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| {
                par::map(mode, &distances, |&d| {
                    let mut cfg = SimConfig::default();
                    cfg.channel.distance_km = d;
                    tptf_simulate(&cfg.channel, &cfg.tptf)
                        .map(|e| rate_from_estimates(&e, RateScheme::Gdh, 1e6, &cfg).rate_tps)
                        .unwrap_or(0.0)
                })
            })
        });
    }
    g.finish();
}

fn privacy_amplification(c: &mut Criterion) {
    let mut g = c.benchmark_group("toeplitz_pa");
    g.sample_size(10);
    for n in [1usize << 16, 1 << 18] {
        let input = BitString::random(n, &mut ChaCha20Rng::seed_from_u64(1));
        let spec = PaMatrixSpec::new(n * 29 / 100, n, 7).with_grid(10, 10);
        for (name, mode) in MODES {
            g.bench_with_input(BenchmarkId::new(name, n), &input, |b, input| {
                b.iter(|| toeplitz_pa_blocked(input, &spec, mode).unwrap())
            });
        }
    }
    g.finish();
}

fn forgery_attack(c: &mut Criterion) {
    let mut g = c.benchmark_group("forgery_attack");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_function(name, |b| b.iter(|| simulate_forgery(Scheme::Lfsr, 16, 1 << 12, 255, 2000, 3, mode).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, rate_sweep, privacy_amplification, forgery_attack);
criterion_main!(benches);
