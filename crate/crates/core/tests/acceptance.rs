//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//!
//! Checks marked `modeled` compare against published curves through the
//! full finite-size rate model; they are reported but do not fail the run.
//! Every other check does.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use qds_core::bounds::{epsilon_forgery, log2_epsilon_forgery};
use qds_core::gf::{count_irreducible_gf2, random_irreducible_gf2, Gf256Poly, Gf2Poly};
use qds_core::hash::{apply_columns, gdh_hash, lfsr_toeplitz_hash, toeplitz_matrix_explicit, GdhKey, LfsrKey, Scheme};
use qds_core::kgp::{fig6_ratio, optimized_otuh_rate, optimized_rate, KgpProtocol, RateScheme, SearchSettings, SimConfig};
use qds_core::postproc::{benchmark_postproc, cascade_correct, toeplitz_pa, toeplitz_pa_naive, BenchSettings, CascadeConfig};
use qds_core::protocol::{
    alice_sign, max_guess_budget, perfect_key_groups, receiver_verify, run_protocol, simulate_forgery, MemoryTransport,
};
use qds_core::{BitString, ExecMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

struct Check {
    what: String,
    ok: bool,
    modeled: bool,
}

#[derive(Default)]
struct Criterion {
    checks: Vec<Check>,
}

impl Criterion {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.checks.push(Check {
            what: what.into(),
            ok,
            modeled: false,
        });
    }

    fn modeled(&mut self, ok: bool, what: impl Into<String>) {
        self.checks.push(Check {
            what: what.into(),
            ok,
            modeled: true,
        });
    }
}

/// Random irreducible polynomial with a random state.
fn random_lfsr_key(n: usize, rng: &mut ChaCha20Rng) -> LfsrKey {
    let poly = random_irreducible_gf2(n, rng).unwrap();
    LfsrKey::new(poly, BitString::random(n, rng)).unwrap()
}

/// `M(x) x^d mod P(x)` by polynomial long division.
fn gdh_schoolbook(poly: &Gf256Poly, message: &BitString) -> BitString {
    let d = poly.degree().unwrap();
    let mut bytes = vec![0u8; d];
    bytes.extend(message.to_bytes());
    let r = Gf256Poly::from_bytes(&bytes).rem(poly).unwrap();
    BitString::from_bytes(&(0..d).map(|i| r.coeff(i).0).collect::<Vec<_>>())
}

fn hash_oracles() -> Criterion {
    let mut c = Criterion::default();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let mut mismatches = 0;
    for _ in 0..10_000 {
        let n = rng.gen_range(2..=16);
        let m = rng.gen_range(1..=256);
        let key = random_lfsr_key(n, &mut rng);
        let msg = BitString::random(m, &mut rng);
        let cols = toeplitz_matrix_explicit(&key, m).unwrap();
        if lfsr_toeplitz_hash(&key, &msg).unwrap() != apply_columns(&cols, &msg) {
            mismatches += 1;
        }
    }
    c.check(mismatches == 0, format!("lfsr vs explicit matrix: {mismatches}/10000 mismatches"));

    let mut mismatches = 0;
    for _ in 0..1_000 {
        let d = rng.gen_range(1..=8);
        let poly = qds_core::gf::random_irreducible_gf256(d, &mut rng).unwrap();
        let msg = BitString::random(rng.gen_range(1..=512), &mut rng);
        let key = GdhKey::new(poly.clone()).unwrap();
        if gdh_hash(&key, &msg) != gdh_schoolbook(&poly, &msg) {
            mismatches += 1;
        }
    }
    c.check(mismatches == 0, format!("gdh vs long division: {mismatches}/1000 mismatches"));
    c
}

fn divisibility_property() -> Criterion {
    let mut c = Criterion::default();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let (mut zero, mut perturbed_nonzero) = (0, 0);
    for _ in 0..500 {
        // an all-zero state (probability 2^-n) would hash everything to zero
        let n = rng.gen_range(16..=64);
        let key = random_lfsr_key(n, &mut rng);
        let q_len = rng.gen_range(1..=200);
        let q = Gf2Poly::from_bits(&BitString::random(q_len, &mut rng)).add(&Gf2Poly::monomial(q_len));
        let prod = key.poly().mul(&q);
        let len = prod.degree().unwrap() + 1;
        let mut msg = prod.to_bits(len);
        if lfsr_toeplitz_hash(&key, &msg).unwrap().is_zero() {
            zero += 1;
        }
        msg.flip(rng.gen_range(0..len));
        if !lfsr_toeplitz_hash(&key, &msg).unwrap().is_zero() {
            perturbed_nonzero += 1;
        }
    }
    c.check(zero == 500, format!("multiples of p hash to zero: {zero}/500"));
    c.check(perturbed_nonzero >= 499, format!("single-bit perturbation nonzero: {perturbed_nonzero}/500"));
    c
}

fn irreducible_by_trial_division(bits: u32) -> bool {
    let n = 31 - bits.leading_zeros();
    let target = Gf2Poly::from_u64(bits as u64);
    (2u64..(1u64 << (n / 2 + 1))).all(|d| !target.rem(&Gf2Poly::from_u64(d)).unwrap().is_zero())
}

fn irreducible_machinery() -> Criterion {
    let mut c = Criterion::default();
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let sets: Vec<BTreeSet<u32>> = (0..=16u32)
        .map(|n| {
            if n == 0 {
                return BTreeSet::new();
            }
            ((1u32 << n)..(1u32 << (n + 1))).filter(|&b| irreducible_by_trial_division(b)).collect()
        })
        .collect();
    let mut outside = 0;
    for i in 0..1_000 {
        let n = 1 + i % 16;
        let p = random_irreducible_gf2(n, &mut rng).unwrap();
        let bits = p.words()[0] as u32;
        if p.degree() != Some(n) || !sets[n].contains(&bits) {
            outside += 1;
        }
    }
    c.check(outside == 0, format!("draws outside the enumerated sets: {outside}/1000"));
    let counts_ok = (1..=12).all(|n| count_irreducible_gf2(n).unwrap() == sets[n].len() as u128);
    c.check(counts_ok, "counts match enumeration for n <= 12");
    // degree 2 meets the bound with equality (one irreducible, 2^1/2 = 1)
    let bound_ok = (1..=64usize).all(|n| {
        let count = count_irreducible_gf2(n).unwrap() as f64;
        let bound = 2f64.powi(n as i32 - 1) / n as f64;
        if n == 2 {
            count >= bound
        } else {
            count > bound
        }
    });
    c.check(bound_ok, "count > 2^(n-1)/n for n <= 64 (equality at n = 2)");
    c
}

fn attack_bounds() -> Criterion {
    let mut c = Criterion::default();
    let m = 1 << 12;
    for (scheme, n) in [(Scheme::Lfsr, 8), (Scheme::Lfsr, 12), (Scheme::Lfsr, 16), (Scheme::Gdh, 8), (Scheme::Gdh, 16)] {
        let budget = max_guess_budget(scheme, n, m);
        let stats = simulate_forgery(scheme, n, m, budget, 100_000, 40 + n as u64, ExecMode::Parallel).unwrap();
        let eps = epsilon_forgery(m as f64, n as f64, n, scheme).max().value();
        c.check(
            stats.rate() <= 2.0 * eps,
            format!("{scheme} n={n}: success {:.4e} vs eps {:.4e} ({} guesses)", stats.rate(), eps, stats.guesses),
        );
    }
    let m = (1u64 << 20) as f64;
    let ratio_exact = [10.0, 50.0, 321.5]
        .iter()
        .all(|&hn| log2_epsilon_forgery(m, hn, Scheme::Lfsr) - log2_epsilon_forgery(m, hn, Scheme::Gdh) == 3.0);
    c.check(ratio_exact, "lfsr/gdh epsilon ratio is exactly 8");
    c
}

fn rates() -> Criterion {
    let mut c = Criterion::default();
    let s = SearchSettings::default();
    let at = |d: f64| {
        let mut cfg = SimConfig::default();
        cfg.channel.distance_km = d;
        cfg
    };
    let far = optimized_rate(KgpProtocol::Tptf, RateScheme::Gdh, 1e6, &at(650.0), &s);
    c.modeled(
        far.feasible && (1e-3..=1e-1).contains(&far.rate_tps),
        format!("tptf-gdh at 650 km: {:.3e} tps, window [1e-3, 1e-1]", far.rate_tps),
    );
    let gdh = optimized_rate(KgpProtocol::Tptf, RateScheme::Gdh, 1e6, &at(300.0), &s);
    let single = optimized_rate(KgpProtocol::Bb84, RateScheme::SingleBit, 1e6, &at(300.0), &s);
    let gap = gdh.rate_tps / single.rate_tps;
    c.check(
        single.feasible && gap >= 1e7,
        format!("300 km gap tptf-gdh / bb84-single: {:.3e} / {:.3e} = {gap:.2e}", gdh.rate_tps, single.rate_tps),
    );
    c
}

fn scale_anchors() -> Criterion {
    let mut c = Criterion::default();
    let s = SearchSettings::default();
    let within = |x: f64, target: f64| (x / target - 1.0).abs() <= 0.2;
    for (n_pulses, target) in [(1e13, 1.695e8), (1e11, 1.267e6)] {
        let mut cfg = SimConfig::default();
        cfg.channel.distance_km = 400.0;
        cfg.channel.n_pulses = n_pulses;
        let p = optimized_otuh_rate(1e3, &cfg, &s);
        let est = p.estimates.expect("estimates at 400 km");
        c.check(within(est.n_z, target), format!("N={n_pulses:e}: n_Z {:.4e} vs {target:.4e}", est.n_z));
        if n_pulses == 1e13 {
            c.check(within(p.hn, 4.87e7), format!("N=1e13: key length {:.4e} vs 4.87e7", p.hn));
        }
    }
    c
}

fn postprocessing() -> Criterion {
    let mut c = Criterion::default();
    let n = 1_000_000;
    let mut residual = 0;
    let mut failures = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(700 + seed);
        let alice = BitString::random(n, &mut rng);
        let mut bob = alice.clone();
        for i in rand::seq::index::sample(&mut rng, n, n / 20) {
            bob.flip(i);
        }
        match cascade_correct(&alice, &bob, 0.05, 1e-11, &CascadeConfig::default(), &mut rng) {
            Ok(r) => residual += r.residual_mismatches + usize::from(r.corrected != alice),
            Err(_) => failures += 1,
        }
    }
    c.check(
        residual == 0 && failures == 0,
        format!("cascade at 5% on 1e6 bits, 20 seeds: {failures} failures, {residual} residual"),
    );

    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let input = BitString::random(1 << 12, &mut rng);
    let fast = toeplitz_pa(&input, 1 << 10, 99).unwrap();
    let naive = toeplitz_pa_naive(&input, 1 << 10, 99).unwrap();
    c.check(fast == naive, "toeplitz amplification matches the naive product at 2^12");

    let grid: Vec<usize> = (16..=22).step_by(2).map(|k| 1usize << k).collect();
    let rows = benchmark_postproc(&grid, &BenchSettings::default(), ExecMode::Parallel).unwrap();
    let ratios: Vec<f64> = rows.iter().map(|r| r.t_pa_ms / r.t_ec_ms).collect();
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.1}")).collect();
    c.check(
        ratios.last() > ratios.first(),
        format!("T_PA/T_EC over 2^16..2^22: [{}]", shown.join(", ")),
    );
    c
}

fn protocol_invariants() -> Criterion {
    let mut c = Criterion::default();
    let mut accepted = 0;
    let mut symmetric = 0;
    let mut refused = 0;
    let runs = 1_000;
    for i in 0..runs {
        let mut rng = ChaCha20Rng::seed_from_u64(9_000 + i as u64);
        let scheme = if i % 2 == 0 { Scheme::Lfsr } else { Scheme::Gdh };
        let n = 8 * rng.gen_range(2..=8);
        let [mut alice, bob, charlie] = perfect_key_groups(scheme, n, 2, &mut rng).unwrap();
        let msg = BitString::random(rng.gen_range(1..=2048), &mut rng);
        let t = run_protocol(&msg, 0, &mut alice, &bob, &charlie, &mut MemoryTransport::new(), &mut rng, None).unwrap();
        accepted += usize::from(t.both_accept());

        let packet = alice_sign(&msg, &mut alice, 1, &mut rng).unwrap();
        let (b, ch) = (bob.act(1).unwrap(), charlie.act(1).unwrap());
        let mut tampered = packet.clone();
        tampered.message.flip(rng.gen_range(0..msg.len()));
        symmetric += usize::from([&packet, &tampered].iter().all(|p| {
            receiver_verify(p, &b, &ch).unwrap() == receiver_verify(p, &ch, &b).unwrap()
        }));
        refused += usize::from(alice_sign(&msg, &mut alice, 0, &mut rng).is_err() && alice_sign(&msg, &mut alice, 1, &mut rng).is_err());
    }
    c.check(accepted == runs, format!("honest runs accepted: {accepted}/{runs}"));
    c.check(symmetric == runs, format!("bob/charlie verdicts agree: {symmetric}/{runs}"));
    c.check(refused == runs, format!("reuse refused: {refused}/{runs}"));

    let s = SearchSettings::default();
    let ratios: Vec<(f64, f64)> = (0..10)
        .map(|k| {
            let mut cfg = SimConfig::default();
            cfg.channel.distance_km = 50.0 * k as f64;
            (cfg.channel.distance_km, fig6_ratio(1e3, &cfg, &s))
        })
        .collect();
    let min = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    c.modeled(min > 0.8, format!("lfsr / privacy-amplified rate ratio below 500 km, N=1e13: min {min:.3}"));
    c
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Criterion); 8] = [
        ("hash oracle equivalence", hash_oracles),
        ("multiples of the key polynomial", divisibility_property),
        ("irreducible polynomials", irreducible_machinery),
        ("forgery attack vs bound", attack_bounds),
        ("signature rates", rates),
        ("key length anchors", scale_anchors),
        ("postprocessing", postprocessing),
        ("protocol invariants", protocol_invariants),
    ];
    let mut strict_failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let c = run();
        let pass = c.checks.iter().all(|k| k.ok);
        println!(
            "criterion {} {}: {name} ({:.1} s)",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        for k in &c.checks {
            let tag = match (k.ok, k.modeled) {
                (true, _) => "ok",
                (false, false) => "FAILED",
                (false, true) => "off-target (modeled)",
            };
            println!("    {tag}: {}", k.what);
            strict_failures += usize::from(!k.ok && !k.modeled);
        }
    }
    if strict_failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
