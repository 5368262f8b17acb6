//! Cascade reconciliation. Both parties live in one process; every parity
//! Alice would disclose is counted as leaked.

use std::time::{Duration, Instant};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::PostprocError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    /// First block size is `block_factor / qber`.
    pub block_factor: f64,
    /// Passes run before the first verification.
    pub scheduled_passes: usize,
    /// Give up after this many passes.
    pub max_passes: usize,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            block_factor: 0.73,
            scheduled_passes: 4,
            max_passes: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrectionReport {
    /// Bob's string after correction.
    pub corrected: BitString,
    pub residual_mismatches: usize,
    pub parity_bits_leaked: usize,
    pub passes: usize,
    /// Bits Bob flipped.
    pub corrections: usize,
    pub elapsed: Duration,
}

/// A pass reorders the string by the affine bijection
/// `j -> (a j + b) mod n` and cuts the result into blocks.
struct Pass {
    block: usize,
    a: u64,
    b: u64,
    /// Inverse of `a` mod `n`.
    a_inv: u64,
    /// Parity mismatch per block.
    odd: Vec<bool>,
}

impl Pass {
    fn position(&self, j: usize, n: u64) -> usize {
        ((self.a as u128 * j as u128 + self.b as u128) % n as u128) as usize
    }

    fn index(&self, p: usize, n: u64) -> usize {
        let shifted = (p as u64 + n - self.b) % n;
        ((self.a_inv as u128 * shifted as u128) % n as u128) as usize
    }
}

fn gcd(mut x: u64, mut y: u64) -> u64 {
    while y != 0 {
        (x, y) = (y, x % y);
    }
    x
}

fn mod_inverse(a: u64, n: u64) -> u64 {
    let (mut r0, mut r1) = (n as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    t0.rem_euclid(n as i128) as u64
}

struct State<'a> {
    alice: &'a [u8],
    bob: Vec<u8>,
    passes: Vec<Pass>,
    leaked: usize,
    corrections: usize,
}

impl State<'_> {
    fn n(&self) -> u64 {
        self.bob.len() as u64
    }

    fn add_pass<R: RngCore + ?Sized>(&mut self, block: usize, rng: &mut R) {
        let n = self.n();
        let (a, b) = if self.passes.is_empty() || n < 3 {
            (1, 0)
        } else {
            let a = loop {
                let a = 1 + rng.next_u64() % (n - 1);
                if gcd(a, n) == 1 {
                    break a;
                }
            };
            (a, rng.next_u64() % n)
        };
        let mut odd = vec![false; (n as usize).div_ceil(block)];
        // walk the string in order; the block index is the moving part
        let mut pos = b;
        for j in 0..n as usize {
            if self.alice[j] != self.bob[j] {
                let k = pos as usize / block;
                odd[k] = !odd[k];
            }
            pos += a;
            if pos >= n {
                pos -= n;
            }
        }
        self.leaked += odd.len();
        let p = self.passes.len();
        let mut queue: Vec<(usize, usize)> =
            odd.iter().enumerate().filter(|(_, &o)| o).map(|(k, _)| (p, k)).collect();
        self.passes.push(Pass {
            block,
            a,
            b,
            a_inv: mod_inverse(a, n),
            odd,
        });
        self.drain(&mut queue);
    }

    /// Corrects every odd block in `queue`, tracing each fix back through
    /// the earlier passes.
    fn drain(&mut self, queue: &mut Vec<(usize, usize)>) {
        let n = self.n();
        while let Some((p, k)) = queue.pop() {
            if !self.passes[p].odd[k] {
                continue;
            }
            let j = self.bisect(p, k);
            self.bob[j] ^= 1;
            self.corrections += 1;
            for (q, pass) in self.passes.iter_mut().enumerate() {
                let kk = pass.position(j, n) / pass.block;
                pass.odd[kk] = !pass.odd[kk];
                if pass.odd[kk] {
                    queue.push((q, kk));
                }
            }
        }
    }

    /// Binary search for one error inside an odd block.
    fn bisect(&mut self, p: usize, k: usize) -> usize {
        let n = self.n();
        let pass = &self.passes[p];
        let (mut lo, mut hi) = (k * pass.block, ((k + 1) * pass.block).min(n as usize));
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let mut j = pass.index(lo, n) as u64;
            let mut par = 0u8;
            for _ in lo..mid {
                par ^= self.alice[j as usize] ^ self.bob[j as usize];
                j += pass.a_inv;
                if j >= n {
                    j -= n;
                }
            }
            self.leaked += 1;
            if par == 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        pass.index(lo, n)
    }
}

/// Bits disclosed by the final equality check.
pub fn verification_bits(eps_cor: f64) -> usize {
    (1.0 / eps_cor).log2().ceil() as usize
}

pub fn cascade_correct<R: RngCore + ?Sized>(
    alice: &BitString,
    bob: &BitString,
    qber_estimate: f64,
    eps_cor: f64,
    cfg: &CascadeConfig,
    rng: &mut R,
) -> Result<CorrectionReport, PostprocError> {
    let start = Instant::now();
    if alice.len() != bob.len() {
        return Err(PostprocError::InvalidArgument(format!(
            "strings differ in length: {} vs {}",
            alice.len(),
            bob.len()
        )));
    }
    if !(qber_estimate > 0.0 && qber_estimate <= 0.25) {
        return Err(PostprocError::InvalidArgument(format!(
            "qber estimate {qber_estimate} outside (0, 0.25]"
        )));
    }
    if !(eps_cor > 0.0 && eps_cor < 1.0) {
        return Err(PostprocError::InvalidArgument(format!("eps_cor {eps_cor} outside (0, 1)")));
    }
    let n = alice.len();
    let a: Vec<u8> = alice.iter().map(u8::from).collect();
    let mut st = State {
        alice: &a,
        bob: bob.iter().map(u8::from).collect(),
        passes: Vec::new(),
        leaked: 0,
        corrections: 0,
    };
    let mut block = ((cfg.block_factor / qber_estimate).round() as usize).clamp(2, n.max(2));
    let mut done = n == 0;
    while !done && st.passes.len() < cfg.max_passes {
        st.add_pass(block, rng);
        block = (block * 2).min(n);
        if st.passes.len() >= cfg.scheduled_passes {
            st.leaked += verification_bits(eps_cor);
            done = st.bob == a;
        }
    }
    if n == 0 {
        st.leaked += verification_bits(eps_cor);
    }
    let residual = st.bob.iter().zip(&a).filter(|(x, y)| x != y).count();
    if residual > 0 {
        return Err(PostprocError::CorrectionFailed {
            passes: st.passes.len(),
            residual,
        });
    }
    Ok(CorrectionReport {
        corrected: BitString::from_bits(st.bob.iter().map(|&b| b == 1)),
        residual_mismatches: 0,
        parity_bits_leaked: st.leaked,
        passes: st.passes.len(),
        corrections: st.corrections,
        elapsed: start.elapsed(),
    })
}
