//! Toeplitz-matrix privacy amplification, computed blockwise with FFT
//! convolutions.
//!
//! The `l x n` matrix has entries `T[i][j] = t[i - j + n - 1]` for a
//! generator `t` of `l + n - 1` seeded random bits, so `T x` is a slice of
//! the linear convolution `t * x` reduced mod 2.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::PostprocError;
use crate::par::{self, ExecMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaMatrixSpec {
    /// Output length.
    pub rows: usize,
    /// Input length.
    pub cols: usize,
    pub seed: u64,
    /// Row and column bands of the block grid.
    pub grid: (usize, usize),
}

impl PaMatrixSpec {
    pub fn new(rows: usize, cols: usize, seed: u64) -> Self {
        Self {
            rows,
            cols,
            seed,
            grid: (1, 1),
        }
    }

    pub fn with_grid(mut self, r: usize, c: usize) -> Self {
        self.grid = (r, c);
        self
    }

    pub fn validate(&self) -> Result<(), PostprocError> {
        if self.rows > self.cols {
            return Err(PostprocError::InvalidArgument(format!(
                "output length {} exceeds input length {}",
                self.rows, self.cols
            )));
        }
        if self.grid.0 == 0 || self.grid.1 == 0 {
            return Err(PostprocError::InvalidArgument("block grid must be nonempty".into()));
        }
        Ok(())
    }

    /// Generator bits; empty when the matrix is.
    pub fn generator(&self) -> BitString {
        if self.rows == 0 || self.cols == 0 {
            return BitString::zeros(0);
        }
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        BitString::random(self.rows + self.cols - 1, &mut rng)
    }
}

/// Splits `0..len` into `parts` near-equal bands.
fn bands(len: usize, parts: usize) -> Vec<(usize, usize)> {
    let parts = parts.min(len.max(1));
    (0..parts)
        .map(|k| (k * len / parts, (k + 1) * len / parts))
        .filter(|(a, b)| b > a)
        .collect()
}

/// `conv(g, x)[off..off + out_len] mod 2` by a real FFT convolution.
fn conv_mod2(g: &[f64], x: &[f64], off: usize, out_len: usize, planner: &mut FftPlanner<f64>) -> Vec<bool> {
    let size = (g.len() + x.len() - 1).next_power_of_two();
    let fft = planner.plan_fft_forward(size);
    let ifft = planner.plan_fft_inverse(size);
    let mut a: Vec<Complex<f64>> = g.iter().map(|&v| Complex::new(v, 0.0)).collect();
    a.resize(size, Complex::new(0.0, 0.0));
    let mut b: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    b.resize(size, Complex::new(0.0, 0.0));
    fft.process(&mut a);
    fft.process(&mut b);
    for (p, q) in a.iter_mut().zip(&b) {
        *p *= q;
    }
    ifft.process(&mut a);
    let scale = size as f64;
    a[off..off + out_len]
        .iter()
        .map(|c| ((c.re / scale).round() as i64) & 1 == 1)
        .collect()
}

/// Blockwise product with the grid of `spec`; blocks run in parallel when
/// `mode` allows.
pub fn toeplitz_pa_blocked(input: &BitString, spec: &PaMatrixSpec, mode: ExecMode) -> Result<BitString, PostprocError> {
    spec.validate()?;
    if input.len() != spec.cols {
        return Err(PostprocError::InvalidArgument(format!(
            "input has {} bits, matrix expects {}",
            input.len(),
            spec.cols
        )));
    }
    let (l, n) = (spec.rows, spec.cols);
    if l == 0 {
        return Ok(BitString::zeros(0));
    }
    let t = spec.generator();
    let rows = bands(l, spec.grid.0);
    let cols = bands(n, spec.grid.1);
    let blocks: Vec<((usize, usize), (usize, usize))> =
        rows.iter().flat_map(|&r| cols.iter().map(move |&c| (r, c))).collect();
    let partial = par::map(mode, &blocks, |&((i0, i1), (j0, j1))| {
        let (rb, cb) = (i1 - i0, j1 - j0);
        let base = i0 + n - j1;
        let g: Vec<f64> = (0..rb + cb - 1).map(|k| f64::from(u8::from(t.get(base + k)))).collect();
        let x: Vec<f64> = (j0..j1).map(|j| f64::from(u8::from(input.get(j)))).collect();
        let mut planner = FftPlanner::new();
        (i0, conv_mod2(&g, &x, cb - 1, rb, &mut planner))
    });
    let mut out = BitString::zeros(l);
    for (i0, bits) in partial {
        for (k, b) in bits.into_iter().enumerate() {
            if b {
                out.flip(i0 + k);
            }
        }
    }
    Ok(out)
}

/// Compresses `input` to `l` bits with the Toeplitz matrix drawn from
/// `seed`.
pub fn toeplitz_pa(input: &BitString, l: usize, seed: u64) -> Result<BitString, PostprocError> {
    toeplitz_pa_blocked(input, &PaMatrixSpec::new(l, input.len(), seed), ExecMode::Sequential)
}

/// Dense matrix-vector product, for testing.
pub fn toeplitz_pa_naive(input: &BitString, l: usize, seed: u64) -> Result<BitString, PostprocError> {
    let spec = PaMatrixSpec::new(l, input.len(), seed);
    spec.validate()?;
    let n = input.len();
    let t = spec.generator();
    Ok(BitString::from_bits((0..l).map(|i| {
        (0..n).fold(false, |acc, j| acc ^ (t.get(i + n - 1 - j) & input.get(j)))
    })))
}
