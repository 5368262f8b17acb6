//! Wall-clock comparison of error correction and privacy amplification.

use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::PostprocError;
use crate::par::{derive_seed, ExecMode};

use super::cascade::{cascade_correct, CascadeConfig};
use super::toeplitz::{toeplitz_pa_blocked, PaMatrixSpec};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSettings {
    pub qber: f64,
    /// Output length as a fraction of the input.
    pub pa_fraction: f64,
    pub pa_grid: (usize, usize),
    pub eps_cor: f64,
    pub seed: u64,
    /// Timed repetitions; the minimum is reported.
    pub reps: usize,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            // 39830 errors in 1.695e8 bits
            qber: 2.35e-4,
            pa_fraction: 0.29,
            pa_grid: (10, 10),
            eps_cor: 1e-11,
            seed: 0,
            reps: 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n_z: usize,
    pub errors_planted: usize,
    pub t_ec_ms: f64,
    pub t_pa_ms: f64,
    pub leaked_bits: usize,
}

pub const BENCH_CSV_HEADER: &str = "n_Z,errors_planted,T_EC_ms,T_PA_ms,leaked_bits";

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from(BENCH_CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{:.3},{:.3},{}\n",
            r.n_z, r.errors_planted, r.t_ec_ms, r.t_pa_ms, r.leaked_bits
        ));
    }
    s
}

/// Times Cascade and Toeplitz amplification on random keys of each size.
pub fn benchmark_postproc(grid: &[usize], s: &BenchSettings, mode: ExecMode) -> Result<Vec<BenchRow>, PostprocError> {
    let mut rows = Vec::with_capacity(grid.len());
    for (k, &n) in grid.iter().enumerate() {
        let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(s.seed, k as u64));
        let alice = BitString::random(n, &mut rng);
        let errors = ((s.qber * n as f64).round() as usize).clamp(usize::from(n > 0), n);
        let mut bob = alice.clone();
        for i in rand::seq::index::sample(&mut rng, n, errors) {
            bob.flip(i);
        }
        let qber = (errors as f64 / n.max(1) as f64).clamp(1e-6, 0.25);
        let mut t_ec = f64::INFINITY;
        let mut t_pa = f64::INFINITY;
        let mut leaked = 0;
        for _ in 0..s.reps.max(1) {
            let start = Instant::now();
            let r = cascade_correct(&alice, &bob, qber, s.eps_cor, &CascadeConfig::default(), &mut rng)?;
            t_ec = t_ec.min(start.elapsed().as_secs_f64() * 1e3);
            leaked = r.parity_bits_leaked;

            let l = (s.pa_fraction * n as f64) as usize;
            let spec = PaMatrixSpec::new(l, n, rng.next_u64()).with_grid(s.pa_grid.0, s.pa_grid.1);
            let start = Instant::now();
            let out = toeplitz_pa_blocked(&r.corrected, &spec, mode)?;
            t_pa = t_pa.min(start.elapsed().as_secs_f64() * 1e3);
            debug_assert_eq!(out.len(), l);
        }
        rows.push(BenchRow {
            n_z: n,
            errors_planted: errors,
            t_ec_ms: t_ec,
            t_pa_ms: t_pa,
            leaked_bits: leaked,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_smoke_and_format() {
        let rows = benchmark_postproc(&[256], &BenchSettings::default(), ExecMode::Sequential).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].errors_planted, 1);
        assert!(rows[0].t_ec_ms < 50.0 && rows[0].t_pa_ms < 50.0);
        let csv = bench_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(BENCH_CSV_HEADER));
        assert_eq!(lines.next().unwrap().split(',').count(), 5);
        assert_eq!(bench_csv(&[]), format!("{BENCH_CSV_HEADER}\n"));
    }
}
