//! Irreducibility tests, counting, and random irreducible generation.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bits::BitString;
use crate::error::GfError;

use super::berlekamp_massey::{berlekamp_massey_gf2, berlekamp_massey_gf256};
use super::gf2::{gf2_gcd, ShiftedModulus};
use super::gf256::{gf256_gcd, Gf256, Gf256Poly};
use super::Gf2Poly;

/// Attempts before giving up when the random element lies in a subfield.
pub const MAX_GENERATION_ATTEMPTS: usize = 64;

pub(crate) fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's test: `x^(2^n) = x mod p` and `gcd(x^(2^(n/d)) - x, p) = 1` for
/// every prime `d | n`.
pub fn is_irreducible_gf2(p: &Gf2Poly) -> Result<bool, GfError> {
    let n = match p.degree() {
        None | Some(0) => {
            return Err(GfError::InvalidArgument(
                "irreducibility of a constant polynomial".into(),
            ))
        }
        Some(n) => n,
    };
    if n == 1 {
        return Ok(true);
    }
    if !p.coeff(0) {
        return Ok(false);
    }
    let checkpoints: Vec<usize> = prime_factors(n).into_iter().map(|d| n / d).collect();
    let modulus = ShiftedModulus::new(p);
    let x = Gf2Poly::x();
    let mut h = x.clone();
    for i in 1..=n {
        h = modulus.square_mod(&h);
        if checkpoints.contains(&i) && !gf2_gcd(&h.add(&x), p)?.is_one() {
            return Ok(false);
        }
    }
    Ok(h == x)
}

/// True when `p` has an irreducible factor of degree at most `k`.
fn has_small_factor_gf2(p: &Gf2Poly, k: usize) -> bool {
    let modulus = ShiftedModulus::new(p);
    let x = Gf2Poly::x();
    let mut h = x.clone();
    // any factor of degree j <= k divides x^(2^j) - x, hence the product
    let mut acc = Gf2Poly::one();
    for _ in 1..=k {
        h = modulus.square_mod(&h);
        acc = modulus.mul_mod(&acc, &h.add(&x));
    }
    !gf2_gcd(&acc, p).expect("nonzero modulus").is_one()
}

fn mobius(n: usize) -> i128 {
    let mut m = n;
    let mut sign = 1i128;
    let mut d = 2;
    while d * d <= m {
        if m.is_multiple_of(d) {
            m /= d;
            if m.is_multiple_of(d) {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if m > 1 {
        sign = -sign;
    }
    sign
}

/// Number of monic irreducible degree-`n` polynomials over GF(2).
pub fn count_irreducible_gf2(n: usize) -> Result<u128, GfError> {
    if !(1..=64).contains(&n) {
        return Err(GfError::InvalidArgument(format!(
            "degree {n} outside the supported range 1..=64"
        )));
    }
    let total: i128 = (1..=n)
        .filter(|d| n.is_multiple_of(*d))
        .map(|d| mobius(d) * (1i128 << (n / d)))
        .sum();
    Ok((total / n as i128) as u128)
}

fn bootstrap_cache<T: Clone + Send + 'static>(
    cell: &'static OnceLock<Mutex<HashMap<usize, T>>>,
    n: usize,
    search: impl FnOnce() -> T,
) -> T {
    let map = cell.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = map.lock().expect("cache lock").get(&n) {
        return p.clone();
    }
    let p = search();
    map.lock().expect("cache lock").insert(n, p.clone());
    p
}

/// A fixed irreducible polynomial of degree `n`: the first irreducible
/// trinomial `x^n + x^k + 1`, else the first pentanomial, in lexicographic
/// order of the middle exponents.
pub fn bootstrap_irreducible_gf2(n: usize) -> Result<Gf2Poly, GfError> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Gf2Poly>>> = OnceLock::new();
    if n == 0 {
        return Err(GfError::InvalidArgument("degree must be positive".into()));
    }
    if n == 1 {
        return Ok(Gf2Poly::x());
    }
    Ok(bootstrap_cache(&CACHE, n, || search_sparse_gf2(n)))
}

fn search_sparse_gf2(n: usize) -> Gf2Poly {
    let quick = (n / 2).min(16);
    let accept = |p: &Gf2Poly| {
        !has_small_factor_gf2(p, quick) && is_irreducible_gf2(p).expect("degree >= 2")
    };
    // Swan: every trinomial of degree 0 mod 8 is reducible
    let trinomials = if n.is_multiple_of(8) { 0 } else { n };
    for k in 1..trinomials {
        let p = Gf2Poly::from_exponents(&[n, k, 0]);
        if accept(&p) {
            return p;
        }
    }
    for a in 3..n {
        for b in 2..a {
            for c in 1..b {
                let p = Gf2Poly::from_exponents(&[n, a, b, c, 0]);
                if accept(&p) {
                    return p;
                }
            }
        }
    }
    unreachable!("every degree >= 2 has an irreducible trinomial or pentanomial up to tested sizes")
}

/// Uniformly random monic irreducible polynomial of degree `n`: the
/// minimal polynomial of a random element of GF(2)[x]/f(x).
pub fn random_irreducible_gf2<R: RngCore + ?Sized>(
    n: usize,
    rng: &mut R,
) -> Result<Gf2Poly, GfError> {
    if n == 0 {
        return Err(GfError::InvalidArgument("degree must be positive".into()));
    }
    let f = bootstrap_irreducible_gf2(n)?;
    let modulus = ShiftedModulus::new(&f);
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let g = Gf2Poly::from_bits(&BitString::random(n, rng));
        let mut seq = BitString::zeros(2 * n);
        let mut cur = Gf2Poly::one();
        for i in 0..2 * n {
            seq.set(i, cur.coeff(0));
            cur = modulus.mul_mod(&cur, &g);
        }
        let rec = berlekamp_massey_gf2(&seq)?;
        if rec.length == n {
            return Ok(rec.characteristic());
        }
    }
    Err(GfError::GenerationFailed {
        degree: n,
        attempts: MAX_GENERATION_ATTEMPTS,
    })
}

const Q_BITS: usize = 8;

/// `x^(256^k) mod p` for successive `k`, via eight squarings per step.
struct FrobeniusPowers<'a> {
    p: &'a Gf256Poly,
    h: Gf256Poly,
}

impl<'a> FrobeniusPowers<'a> {
    fn new(p: &'a Gf256Poly) -> Self {
        Self {
            p,
            h: Gf256Poly::x().rem(p).expect("nonzero"),
        }
    }

    fn advance(&mut self) -> &Gf256Poly {
        for _ in 0..Q_BITS {
            self.h = self.h.square().rem(self.p).expect("nonzero");
        }
        &self.h
    }
}

/// Rabin's test over GF(2^8) for a polynomial of degree `d >= 1`.
pub fn is_irreducible_gf256(p: &Gf256Poly) -> Result<bool, GfError> {
    let d = match p.degree() {
        None | Some(0) => {
            return Err(GfError::InvalidArgument(
                "irreducibility of a constant polynomial".into(),
            ))
        }
        Some(d) => d,
    };
    if d == 1 {
        return Ok(true);
    }
    let p = p.make_monic();
    if p.coeff(0).is_zero() {
        return Ok(false);
    }
    let checkpoints: Vec<usize> = prime_factors(d).into_iter().map(|r| d / r).collect();
    let x = Gf256Poly::x();
    let mut frob = FrobeniusPowers::new(&p);
    let mut last = Gf256Poly::zero();
    for k in 1..=d {
        let h = frob.advance().clone();
        if checkpoints.contains(&k) && !gf256_gcd(&h.add(&x), &p)?.is_one() {
            return Ok(false);
        }
        last = h;
    }
    Ok(last == x)
}

fn has_small_factor_gf256(p: &Gf256Poly, k: usize) -> bool {
    if (0..=255u8).any(|c| p.eval(Gf256(c)).is_zero()) {
        return true;
    }
    let x = Gf256Poly::x();
    let mut frob = FrobeniusPowers::new(p);
    for _ in 1..=k {
        let h = frob.advance().add(&x);
        if !gf256_gcd(&h, p).expect("nonzero").is_one() {
            return true;
        }
    }
    false
}

/// A fixed monic irreducible polynomial of degree `d` over GF(2^8): the
/// first irreducible candidate drawn from ChaCha20 seeded with `d`.
///
/// Sparse families are not used because some degrees have no irreducible
/// `x^d + c1 x + c0` or `x^d + x^(d-1) + c1 x + c0` (33 is one); a random
/// monic polynomial is irreducible with probability about `1/d`.
pub fn bootstrap_irreducible_gf256(d: usize) -> Result<Gf256Poly, GfError> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Gf256Poly>>> = OnceLock::new();
    if d == 0 {
        return Err(GfError::InvalidArgument("degree must be positive".into()));
    }
    if d == 1 {
        return Ok(Gf256Poly::x());
    }
    Ok(bootstrap_cache(&CACHE, d, || {
        let mut rng = ChaCha20Rng::seed_from_u64(d as u64);
        loop {
            let mut bytes = vec![0u8; d + 1];
            rng.fill_bytes(&mut bytes[..d]);
            bytes[d] = 1;
            let p = Gf256Poly::from_bytes(&bytes);
            // no factor of degree <= d/2 means irreducible; reducible
            // candidates usually exit after a few steps
            if !p.coeff(0).is_zero() && !has_small_factor_gf256(&p, d / 2) {
                return p;
            }
        }
    }))
}

/// Random monic irreducible polynomial of degree `d` over GF(2^8), the
/// minimal polynomial of a random element of GF(2^8)[x]/f(x).
pub fn random_irreducible_gf256<R: RngCore + ?Sized>(
    d: usize,
    rng: &mut R,
) -> Result<Gf256Poly, GfError> {
    if d == 0 {
        return Err(GfError::InvalidArgument("degree must be positive".into()));
    }
    let f = bootstrap_irreducible_gf256(d)?;
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let mut bytes = vec![0u8; d];
        rng.fill_bytes(&mut bytes);
        let g = Gf256Poly::from_bytes(&bytes);
        let mut seq = Vec::with_capacity(2 * d);
        let mut cur = Gf256Poly::one();
        for _ in 0..2 * d {
            seq.push(cur.coeff(0));
            cur = cur.mul(&g).rem(&f)?;
        }
        let (poly, l) = berlekamp_massey_gf256(&seq)?;
        if l == d {
            return Ok(poly);
        }
    }
    Err(GfError::GenerationFailed {
        degree: d,
        attempts: MAX_GENERATION_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(bits: u64) -> Gf2Poly {
        Gf2Poly::from_u64(bits)
    }

    /// Trial division by every polynomial of degree 1..=deg/2.
    fn irreducible_by_trial_division(bits: u64) -> bool {
        let n = 63 - bits.leading_zeros() as u64;
        let target = p(bits);
        (2u64..(1u64 << (n / 2 + 1))).all(|d| target.rem(&p(d)).unwrap() != Gf2Poly::zero())
    }

    #[test]
    fn spec_examples() {
        assert!(!is_irreducible_gf2(&p(0b101)).unwrap());
        assert!(is_irreducible_gf2(&p(0b1011)).unwrap());
        assert!(is_irreducible_gf2(&p(0b11111)).unwrap());
        assert!(is_irreducible_gf2(&Gf2Poly::one()).is_err());
    }

    #[test]
    fn rabin_agrees_with_trial_division_up_to_degree_twelve() {
        for bits in 2u64..(1 << 13) {
            assert_eq!(
                is_irreducible_gf2(&p(bits)).unwrap(),
                irreducible_by_trial_division(bits),
                "{}",
                p(bits)
            );
        }
    }

    #[test]
    fn counts_match_exhaustive_enumeration() {
        assert_eq!(count_irreducible_gf2(1).unwrap(), 2);
        assert_eq!(count_irreducible_gf2(3).unwrap(), 2);
        assert_eq!(count_irreducible_gf2(4).unwrap(), 3);
        for n in 1..=10usize {
            let exhaustive = ((1u64 << n)..(1u64 << (n + 1)))
                .filter(|&b| is_irreducible_gf2(&p(b)).unwrap())
                .count() as u128;
            assert_eq!(count_irreducible_gf2(n).unwrap(), exhaustive, "n={n}");
        }
        assert!(count_irreducible_gf2(0).is_err());
        assert!(count_irreducible_gf2(65).is_err());
    }

    #[test]
    fn degree_three_outputs_are_the_two_irreducible_cubics() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..50 {
            let q = random_irreducible_gf2(3, &mut rng).unwrap();
            assert!(q == p(0b1011) || q == p(0b1101), "{q}");
        }
    }

    #[test]
    fn bootstrap_polys_are_irreducible() {
        for n in [2, 8, 13, 64, 127, 128, 200] {
            let f = bootstrap_irreducible_gf2(n).unwrap();
            assert_eq!(f.degree(), Some(n));
            assert!(is_irreducible_gf2(&f).unwrap());
        }
        for d in (1..=17).chain([33, 74]) {
            let f = bootstrap_irreducible_gf256(d).unwrap();
            assert_eq!(f.degree(), Some(d));
            assert!(is_irreducible_gf256(&f).unwrap());
        }
    }

    #[test]
    fn gf256_degree_two_output_has_no_root() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        let q = random_irreducible_gf256(2, &mut rng).unwrap();
        assert!(q.is_monic());
        assert!((0..=255u8).all(|c| !q.eval(Gf256(c)).is_zero()));
    }

    #[test]
    fn gf256_degree_one_is_linear() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let q = random_irreducible_gf256(1, &mut rng).unwrap();
        assert_eq!(q.degree(), Some(1));
        assert!(q.is_monic());
    }
}
