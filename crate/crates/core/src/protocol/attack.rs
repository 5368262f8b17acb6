//! Forgery by guessing the signing polynomial.
//!
//! A hash with polynomial `p` maps every multiple of `p` to zero, so
//! `M xor D` with `p | D(x)` keeps the digest and therefore the signature.
//! Not knowing `p`, the attacker picks `g` distinct irreducible candidates
//! and uses `D(x) = x^f * prod p_i(x)`, which succeeds whenever the real
//! polynomial is among them. The signature and encrypted polynomial are
//! forwarded unchanged.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};

use rand::seq::index::sample;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bits::BitString;
use crate::error::ProtocolError;
use crate::gf::{
    is_irreducible_gf2, random_irreducible_gf2, random_irreducible_gf256, Gf256, Gf256Poly,
    Gf2Poly,
};
use crate::hash::{decode_gf256_poly, decode_gf2_poly, Scheme};
use crate::par::{self, ExecMode};

use super::keys::perfect_key_groups;
use super::packet::SignaturePacket;
use super::sign::{alice_sign, receiver_verify};

/// Largest number of distinct candidates whose product fits in `m` bits.
pub fn max_guess_budget(scheme: Scheme, n: usize, m: usize) -> usize {
    match scheme {
        Scheme::Lfsr => m.saturating_sub(1) / n,
        Scheme::Gdh => (m / 8).saturating_sub(1) / (n / 8),
    }
}

fn enumerated_gf2(n: usize) -> Option<Arc<Vec<Gf2Poly>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Gf2Poly>>>>> = OnceLock::new();
    if !(2..=16).contains(&n) {
        return None;
    }
    let map = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = map.lock().expect("cache lock");
    Some(
        map.entry(n)
            .or_insert_with(|| {
                let lo = 1u64 << n;
                Arc::new(
                    (lo..2 * lo)
                        .map(Gf2Poly::from_u64)
                        .filter(|p| is_irreducible_gf2(p).expect("degree >= 2"))
                        .collect(),
                )
            })
            .clone(),
    )
}

fn enumerated_gf256(d: usize) -> Option<Arc<Vec<Gf256Poly>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Gf256Poly>>>>> = OnceLock::new();
    if !(1..=2).contains(&d) {
        return None;
    }
    let map = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = map.lock().expect("cache lock");
    Some(
        map.entry(d)
            .or_insert_with(|| {
                let all: Vec<Gf256Poly> = if d == 1 {
                    (0..=255u8).map(|c| Gf256Poly::from_bytes(&[c, 1])).collect()
                } else {
                    // a quadratic is irreducible iff it has no root
                    (0..=255u8)
                        .flat_map(|c1| (1..=255u8).map(move |c0| Gf256Poly::from_bytes(&[c0, c1, 1])))
                        .filter(|p| (0..=255u8).all(|r| !p.eval(Gf256(r)).is_zero()))
                        .collect()
                };
                Arc::new(all)
            })
            .clone(),
    )
}

fn product_gf2(ps: &[Gf2Poly]) -> Gf2Poly {
    match ps.len() {
        0 => Gf2Poly::one(),
        1 => ps[0].clone(),
        k => product_gf2(&ps[..k / 2]).mul(&product_gf2(&ps[k / 2..])),
    }
}

fn product_gf256(ps: &[Gf256Poly]) -> Gf256Poly {
    match ps.len() {
        0 => Gf256Poly::one(),
        1 => ps[0].clone(),
        k => product_gf256(&ps[..k / 2]).mul(&product_gf256(&ps[k / 2..])),
    }
}

enum Pool {
    Gf2(Option<Arc<Vec<Gf2Poly>>>),
    Gf256(Option<Arc<Vec<Gf256Poly>>>),
}

/// Difference polynomial, as message-length bits.
enum Product {
    Gf2(Gf2Poly),
    Gf256(Gf256Poly),
}

/// A prepared attacker for fixed `(scheme, n, m, g)`.
pub struct ForgeryAttack {
    scheme: Scheme,
    n: usize,
    m: usize,
    budget: usize,
    pool: Pool,
    /// Product of the whole candidate set when the budget covers it.
    full: Option<BitString>,
}

impl ForgeryAttack {
    pub fn new(scheme: Scheme, n: usize, m: usize, budget: usize) -> Result<Self, ProtocolError> {
        if !scheme.supports_n(n) {
            return Err(ProtocolError::Inconsistent(format!(
                "group size {n} is not valid for {scheme}"
            )));
        }
        let cap = max_guess_budget(scheme, n, m);
        if budget > cap {
            return Err(ProtocolError::Inconsistent(format!(
                "budget {budget} exceeds the {cap} candidates that fit in {m} message bits"
            )));
        }
        if scheme == Scheme::Gdh && !m.is_multiple_of(8) {
            return Err(ProtocolError::Inconsistent(
                "division-hash attack needs a byte-aligned message".into(),
            ));
        }
        let pool = match scheme {
            Scheme::Lfsr => Pool::Gf2(enumerated_gf2(n)),
            Scheme::Gdh => Pool::Gf256(enumerated_gf256(n / 8)),
        };
        let mut attack = Self {
            scheme,
            n,
            m,
            budget,
            pool,
            full: None,
        };
        attack.full = match &attack.pool {
            Pool::Gf2(Some(all)) if budget >= all.len() => {
                Some(attack.spread(&Product::Gf2(product_gf2(all))))
            }
            Pool::Gf256(Some(all)) if budget >= all.len() => {
                Some(attack.spread(&Product::Gf256(product_gf256(all))))
            }
            _ => None,
        };
        Ok(attack)
    }

    /// Number of distinct candidates actually used.
    pub fn effective_guesses(&self) -> usize {
        match &self.pool {
            Pool::Gf2(Some(all)) => self.budget.min(all.len()),
            Pool::Gf256(Some(all)) => self.budget.min(all.len()),
            _ => self.budget,
        }
    }

    /// `x^f * D(x)` with the filler chosen so the top message bit (or
    /// byte) is set.
    fn spread(&self, d: &Product) -> BitString {
        match d {
            Product::Gf2(p) => {
                let deg = p.degree().expect("nonzero product");
                p.shl(self.m - 1 - deg).to_bits(self.m)
            }
            Product::Gf256(p) => {
                let deg = p.degree().expect("nonzero product");
                let bytes = self.m / 8;
                let mut coeffs = vec![0u8; bytes];
                let shift = bytes - 1 - deg;
                for (i, c) in p.coeffs().iter().enumerate() {
                    coeffs[i + shift] = c.0;
                }
                BitString::from_bytes(&coeffs)
            }
        }
    }

    fn difference<R: RngCore + ?Sized>(&self, rng: &mut R) -> Result<BitString, ProtocolError> {
        if let Some(full) = &self.full {
            return Ok(full.clone());
        }
        let g = self.budget;
        let product = match &self.pool {
            Pool::Gf2(Some(all)) => {
                let pick: Vec<Gf2Poly> = sample(rng, all.len(), g).iter().map(|i| all[i].clone()).collect();
                Product::Gf2(product_gf2(&pick))
            }
            Pool::Gf256(Some(all)) => {
                let pick: Vec<Gf256Poly> = sample(rng, all.len(), g).iter().map(|i| all[i].clone()).collect();
                Product::Gf256(product_gf256(&pick))
            }
            Pool::Gf2(None) => {
                let mut seen = HashSet::new();
                while seen.len() < g {
                    seen.insert(random_irreducible_gf2(self.n, rng)?);
                }
                Product::Gf2(product_gf2(&seen.into_iter().collect::<Vec<_>>()))
            }
            Pool::Gf256(None) => {
                let mut seen = HashSet::new();
                while seen.len() < g {
                    seen.insert(random_irreducible_gf256(self.n / 8, rng)?);
                }
                Product::Gf256(product_gf256(&seen.into_iter().collect::<Vec<_>>()))
            }
        };
        Ok(self.spread(&product))
    }

    /// Forged packet built from an honest one. With no guesses the attacker
    /// falls back to a random message change and a random signature.
    pub fn forge<R: RngCore + ?Sized>(
        &self,
        packet: &SignaturePacket,
        rng: &mut R,
    ) -> Result<SignaturePacket, ProtocolError> {
        self.check_packet(packet)?;
        let mut forged = packet.clone();
        if self.budget == 0 {
            let mut d = BitString::random(self.m, rng);
            if d.is_zero() {
                d.flip(0);
            }
            forged.message.xor_assign(&d);
            forged.sig = BitString::random(self.n, rng);
            return Ok(forged);
        }
        forged.message.xor_assign(&self.difference(rng)?);
        Ok(forged)
    }

    /// The constructive case: knowing the polynomial key `X_a` reveals the
    /// signing polynomial, so a multiple of it always verifies.
    pub fn forge_with_known_x(
        &self,
        packet: &SignaturePacket,
        x: &BitString,
    ) -> Result<SignaturePacket, ProtocolError> {
        self.check_packet(packet)?;
        let bits = packet.p.xor(x);
        let d = match self.scheme {
            Scheme::Lfsr => Product::Gf2(decode_gf2_poly(&bits)?),
            Scheme::Gdh => Product::Gf256(decode_gf256_poly(&bits)?),
        };
        let mut forged = packet.clone();
        forged.message.xor_assign(&self.spread(&d));
        Ok(forged)
    }

    fn check_packet(&self, packet: &SignaturePacket) -> Result<(), ProtocolError> {
        if packet.message.len() != self.m
            || packet.header.n as usize != self.n
            || packet.header.scheme != self.scheme
        {
            return Err(ProtocolError::Inconsistent(
                "packet does not match the prepared attack".into(),
            ));
        }
        Ok(())
    }
}

/// One-shot convenience wrapper around [`ForgeryAttack`].
pub fn forge_attack_guess_key<R: RngCore + ?Sized>(
    packet: &SignaturePacket,
    budget: usize,
    rng: &mut R,
) -> Result<SignaturePacket, ProtocolError> {
    let attack = ForgeryAttack::new(
        packet.header.scheme,
        packet.header.n as usize,
        packet.message.len(),
        budget,
    )?;
    attack.forge(packet, rng)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttackStats {
    pub trials: usize,
    pub successes: usize,
    pub guesses: usize,
}

impl AttackStats {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }
}

/// Monte-Carlo forgery rate with fresh perfect keys and a fresh random
/// message per trial. Trial `i` is seeded from `(seed, i)`, so results do
/// not depend on `mode`.
pub fn simulate_forgery(
    scheme: Scheme,
    n: usize,
    m: usize,
    budget: usize,
    trials: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<AttackStats, ProtocolError> {
    let attack = ForgeryAttack::new(scheme, n, m, budget)?;
    let outcomes = par::map_range(mode, trials, |i| -> Result<bool, ProtocolError> {
        let mut rng = ChaCha20Rng::seed_from_u64(par::derive_seed(seed, i as u64));
        let [mut alice, bob, charlie] = perfect_key_groups(scheme, n, 1, &mut rng)?;
        let message = BitString::random(m, &mut rng);
        let packet = alice_sign(&message, &mut alice, 0, &mut rng)?;
        let forged = attack.forge(&packet, &mut rng)?;
        // Bob is the forger; Charlie must be fooled using Bob's revealed share.
        let verdict = receiver_verify(&forged, &charlie.act(0)?, &bob.act(0)?)?;
        Ok(verdict.is_accept() && forged.message != packet.message)
    });
    let mut successes = 0;
    for o in outcomes {
        successes += o? as usize;
    }
    Ok(AttackStats {
        trials,
        successes,
        guesses: attack.effective_guesses(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_caps() {
        assert_eq!(max_guess_budget(Scheme::Lfsr, 16, 4096), 255);
        assert_eq!(max_guess_budget(Scheme::Gdh, 16, 4096), 255);
        assert!(ForgeryAttack::new(Scheme::Lfsr, 16, 4096, 256).is_err());
    }

    #[test]
    fn enumerations_have_known_sizes() {
        assert_eq!(enumerated_gf2(8).unwrap().len(), 30);
        assert_eq!(enumerated_gf2(12).unwrap().len(), 335);
        assert_eq!(enumerated_gf256(1).unwrap().len(), 256);
        assert_eq!(enumerated_gf256(2).unwrap().len(), (65536 - 256) / 2);
    }

    #[test]
    fn known_x_always_forges() {
        for scheme in [Scheme::Lfsr, Scheme::Gdh] {
            let mut rng = ChaCha20Rng::seed_from_u64(5);
            let attack = ForgeryAttack::new(scheme, 32, 512, 1).unwrap();
            for _ in 0..20 {
                let [mut alice, bob, charlie] = perfect_key_groups(scheme, 32, 1, &mut rng).unwrap();
                let x = alice.act(0).unwrap().x().clone();
                let packet =
                    alice_sign(&BitString::random(512, &mut rng), &mut alice, 0, &mut rng).unwrap();
                let forged = attack.forge_with_known_x(&packet, &x).unwrap();
                assert_ne!(forged.message, packet.message);
                let v = receiver_verify(&forged, &charlie.act(0).unwrap(), &bob.act(0).unwrap());
                assert!(v.unwrap().is_accept());
            }
        }
    }

    #[test]
    fn full_coverage_at_small_n_always_succeeds() {
        let s = simulate_forgery(Scheme::Lfsr, 8, 1024, 127, 50, 1, ExecMode::Sequential).unwrap();
        assert_eq!(s.guesses, 30);
        assert_eq!(s.successes, 50);
    }

    #[test]
    fn modes_agree() {
        let a = simulate_forgery(Scheme::Gdh, 16, 1024, 60, 200, 9, ExecMode::Sequential).unwrap();
        let b = simulate_forgery(Scheme::Gdh, 16, 1024, 60, 200, 9, ExecMode::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
