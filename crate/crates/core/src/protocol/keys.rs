//! Partitioning distilled raw keys into one-time key groups.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::ProtocolError;
use crate::hash::Scheme;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Alice,
    Bob,
    Charlie,
}

impl Role {
    pub fn wire_id(self) -> u8 {
        match self {
            Role::Alice => 0,
            Role::Bob => 1,
            Role::Charlie => 2,
        }
    }

    pub fn from_wire_id(id: u8) -> Option<Role> {
        match id {
            0 => Some(Role::Alice),
            1 => Some(Role::Bob),
            2 => Some(Role::Charlie),
            _ => None,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Alice => "alice",
            Role::Bob => "bob",
            Role::Charlie => "charlie",
        })
    }
}

impl FromStr for Role {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "alice" => Ok(Role::Alice),
            "bob" => Ok(Role::Bob),
            "charlie" => Ok(Role::Charlie),
            other => Err(format!("unknown role {other:?}")),
        }
    }
}

/// Distilled key shared by Alice and one counterpart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawKeyPair {
    pub alice_bits: BitString,
    pub counterpart_bits: BitString,
}

impl RawKeyPair {
    /// Both sides hold the same string (error correction succeeded).
    pub fn agreed(bits: BitString) -> Self {
        Self {
            alice_bits: bits.clone(),
            counterpart_bits: bits,
        }
    }

    pub fn len(&self) -> usize {
        self.alice_bits.len().min(self.counterpart_bits.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Published shuffle seeds, one per raw key; `None` keeps the order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationSeeds {
    pub bob: Option<u64>,
    pub charlie: Option<u64>,
}

/// Key strings for one signing act: `(X, Y, Z)` for LFSR, `(X, Y)` for GDH.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyAct {
    pub index: usize,
    pub role: Role,
    pub scheme: Scheme,
    pub n: usize,
    pub strings: Vec<BitString>,
}

impl KeyAct {
    pub fn x(&self) -> &BitString {
        &self.strings[0]
    }

    pub fn y(&self) -> &BitString {
        &self.strings[1]
    }

    pub fn z(&self) -> Option<&BitString> {
        self.strings.get(2)
    }

    /// `K = own xor received`, as formed by each receiver.
    pub fn combine(&self, other: &KeyAct) -> Result<Vec<BitString>, ProtocolError> {
        if self.scheme != other.scheme || self.n != other.n || self.index != other.index {
            return Err(ProtocolError::Inconsistent(format!(
                "cannot combine act {} ({}, n={}) with act {} ({}, n={})",
                self.index, self.scheme, self.n, other.index, other.scheme, other.n
            )));
        }
        if self.strings.len() != other.strings.len()
            || self
                .strings
                .iter()
                .chain(&other.strings)
                .any(|s| s.len() != self.n)
        {
            return Err(ProtocolError::Inconsistent("key string length mismatch".into()));
        }
        Ok(self
            .strings
            .iter()
            .zip(&other.strings)
            .map(|(a, b)| a.xor(b))
            .collect())
    }
}

/// One party's key groups with one-time consumption tracking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyGroups {
    scheme: Scheme,
    n: usize,
    role: Role,
    seeds: PermutationSeeds,
    acts: Vec<Vec<BitString>>,
    consumed: Vec<bool>,
}

impl KeyGroups {
    pub fn from_acts(
        scheme: Scheme,
        n: usize,
        role: Role,
        seeds: PermutationSeeds,
        acts: Vec<Vec<BitString>>,
    ) -> Result<Self, ProtocolError> {
        let c = scheme.strings_per_act();
        for a in &acts {
            if a.len() != c || a.iter().any(|s| s.len() != n) {
                return Err(ProtocolError::Inconsistent(format!(
                    "each act needs {c} strings of {n} bits"
                )));
            }
        }
        let consumed = vec![false; acts.len()];
        Ok(Self {
            scheme,
            n,
            role,
            seeds,
            acts,
            consumed,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn seeds(&self) -> PermutationSeeds {
        self.seeds
    }

    pub fn len(&self) -> usize {
        self.acts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.acts.is_empty()
    }

    pub fn is_consumed(&self, act: usize) -> bool {
        self.consumed.get(act).copied().unwrap_or(false)
    }

    pub fn mark_consumed(&mut self, act: usize) {
        if let Some(c) = self.consumed.get_mut(act) {
            *c = true;
        }
    }

    /// Read access without consuming (receivers reveal their share once
    /// per verification, which is tracked by the session).
    pub fn act(&self, act: usize) -> Result<KeyAct, ProtocolError> {
        let strings = self
            .acts
            .get(act)
            .ok_or(ProtocolError::NoSuchGroup { act })?
            .clone();
        Ok(KeyAct {
            index: act,
            role: self.role,
            scheme: self.scheme,
            n: self.n,
            strings,
        })
    }

    /// Takes an act for one-time use.
    pub fn consume(&mut self, act: usize) -> Result<KeyAct, ProtocolError> {
        let k = self.act(act)?;
        if self.consumed[act] {
            return Err(ProtocolError::OneTimeViolation { act });
        }
        self.consumed[act] = true;
        Ok(k)
    }

    pub fn raw_acts(&self) -> &[Vec<BitString>] {
        &self.acts
    }
}

/// Fisher-Yates shuffle of bit positions from a published seed.
pub fn permute_bits(bits: &BitString, seed: u64) -> BitString {
    let mut order: Vec<usize> = (0..bits.len()).collect();
    order.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
    BitString::from_bits(order.into_iter().map(|i| bits.get(i)))
}

fn prepare(raw: &RawKeyPair, seed: Option<u64>) -> (BitString, BitString) {
    let len = raw.len();
    let a = raw.alice_bits.slice(0, len);
    let c = raw.counterpart_bits.slice(0, len);
    match seed {
        Some(s) => (permute_bits(&a, s), permute_bits(&c, s)),
        None => (a, c),
    }
}

/// Splits the Alice–Bob and Alice–Charlie keys into per-act string tuples.
/// Returns groups for (Alice, Bob, Charlie); Alice's strings are the XOR of
/// her halves of both raw keys.
pub fn group_keys(
    bob: &RawKeyPair,
    charlie: &RawKeyPair,
    n: usize,
    scheme: Scheme,
    seeds: PermutationSeeds,
) -> Result<[KeyGroups; 3], ProtocolError> {
    if !scheme.supports_n(n) {
        return Err(ProtocolError::Inconsistent(format!(
            "group size {n} is not valid for {scheme}"
        )));
    }
    let c = scheme.strings_per_act();
    let per_act = c * n;
    let available = bob.len().min(charlie.len());
    let acts = available / per_act;
    if acts == 0 {
        return Err(ProtocolError::KeyExhausted {
            needed: per_act,
            available,
        });
    }
    let (ab, bb) = prepare(bob, seeds.bob);
    let (ac, cc) = prepare(charlie, seeds.charlie);
    let mut alice = Vec::with_capacity(acts);
    let mut bobs = Vec::with_capacity(acts);
    let mut charlies = Vec::with_capacity(acts);
    for k in 0..acts {
        let mut a_act = Vec::with_capacity(c);
        let mut b_act = Vec::with_capacity(c);
        let mut c_act = Vec::with_capacity(c);
        for j in 0..c {
            let start = k * per_act + j * n;
            let b = bb.slice(start, n);
            let ch = cc.slice(start, n);
            a_act.push(ab.slice(start, n).xor(&ac.slice(start, n)));
            b_act.push(b);
            c_act.push(ch);
        }
        alice.push(a_act);
        bobs.push(b_act);
        charlies.push(c_act);
    }
    Ok([
        KeyGroups::from_acts(scheme, n, Role::Alice, seeds, alice)?,
        KeyGroups::from_acts(scheme, n, Role::Bob, seeds, bobs)?,
        KeyGroups::from_acts(scheme, n, Role::Charlie, seeds, charlies)?,
    ])
}

/// Fresh uniformly random groups for all three parties (perfect keys).
pub fn perfect_key_groups<R: rand::RngCore + ?Sized>(
    scheme: Scheme,
    n: usize,
    acts: usize,
    rng: &mut R,
) -> Result<[KeyGroups; 3], ProtocolError> {
    let len = acts * scheme.strings_per_act() * n;
    let b = RawKeyPair::agreed(BitString::random(len, rng));
    let c = RawKeyPair::agreed(BitString::random(len, rng));
    group_keys(&b, &c, n, scheme, PermutationSeeds::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blocks(count: usize, n: usize) -> (Vec<BitString>, BitString) {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let v: Vec<BitString> = (0..count).map(|_| BitString::random(n, &mut rng)).collect();
        let cat = BitString::concat(&v);
        (v, cat)
    }

    #[test]
    fn lfsr_six_n_gives_two_acts() {
        let n = 16;
        let (_, raw) = blocks(6, n);
        let pair = RawKeyPair::agreed(raw);
        let g = group_keys(&pair, &pair, n, Scheme::Lfsr, PermutationSeeds::default()).unwrap();
        assert!(g.iter().all(|k| k.len() == 2));
    }

    #[test]
    fn gdh_two_n_gives_one_act() {
        let n = 16;
        let (_, raw) = blocks(2, n);
        let pair = RawKeyPair::agreed(raw);
        let g = group_keys(&pair, &pair, n, Scheme::Gdh, PermutationSeeds::default()).unwrap();
        assert!(g.iter().all(|k| k.len() == 1));
    }

    #[test]
    fn identity_permutation_preserves_blocks() {
        let n = 24;
        let (b_blocks, b_raw) = blocks(3, n);
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let c_raw = BitString::random(3 * n, &mut rng);
        let [alice, bob, charlie] = group_keys(
            &RawKeyPair::agreed(b_raw),
            &RawKeyPair::agreed(c_raw.clone()),
            n,
            Scheme::Lfsr,
            PermutationSeeds::default(),
        )
        .unwrap();
        let b = bob.act(0).unwrap();
        assert_eq!(b.strings, b_blocks);
        let c = charlie.act(0).unwrap();
        assert_eq!(c.strings[1], c_raw.slice(n, n));
        let a = alice.act(0).unwrap();
        for j in 0..3 {
            assert!(a.strings[j].xor(&b.strings[j]).xor(&c.strings[j]).is_zero());
        }
    }

    #[test]
    fn too_short_is_exhausted() {
        let pair = RawKeyPair::agreed(BitString::zeros(47));
        let err = group_keys(&pair, &pair, 16, Scheme::Lfsr, PermutationSeeds::default());
        assert!(matches!(err, Err(ProtocolError::KeyExhausted { needed: 48, .. })));
    }

    #[test]
    fn consume_is_one_time() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let [mut alice, _, _] = perfect_key_groups(Scheme::Gdh, 16, 2, &mut rng).unwrap();
        assert!(alice.consume(1).is_ok());
        assert_eq!(
            alice.consume(1),
            Err(ProtocolError::OneTimeViolation { act: 1 })
        );
        assert_eq!(alice.consume(2), Err(ProtocolError::NoSuchGroup { act: 2 }));
    }

    #[test]
    fn permutation_is_applied_to_both_sides() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let raw = BitString::random(64, &mut rng);
        let p = permute_bits(&raw, 99);
        assert_eq!(p.count_ones(), raw.count_ones());
        assert_ne!(p, raw);
        assert_eq!(permute_bits(&raw, 99), p);
    }
}
