//! Classical postprocessing used by the privacy-amplified comparison
//! scheme: Cascade reconciliation and Toeplitz privacy amplification.

pub mod bench;
pub mod cascade;
pub mod toeplitz;

pub use bench::{bench_csv, benchmark_postproc, BenchRow, BenchSettings, BENCH_CSV_HEADER};
pub use cascade::{cascade_correct, verification_bits, CascadeConfig, CorrectionReport};
pub use toeplitz::{toeplitz_pa, toeplitz_pa_blocked, toeplitz_pa_naive, PaMatrixSpec};
