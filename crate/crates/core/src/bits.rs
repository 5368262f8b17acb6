//! Packed bit strings.
//!
//! Bit `i` lives in word `i / 64` at position `i % 64`. Bytes map to bits
//! least-significant first, so byte `j` covers bits `8j..8j+8`. Unused bits
//! of the final word are always zero.

use std::fmt;

use rand::RngCore;

use crate::error::FormatError;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut s = Self {
            words: vec![u64::MAX; words_for(len)],
            len,
        };
        s.mask_tail();
        s
    }

    /// Builds a string from packed words; bits past `len` are cleared.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(words_for(len), 0);
        let mut s = Self { words, len };
        s.mask_tail();
        s
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut s = Self::default();
        for b in bits {
            s.push(b);
        }
        s
    }

    pub fn from_bytes(bytes: &[u8]) -> Self {
        Self::from_bytes_with_len(bytes, bytes.len() * 8)
    }

    /// Takes the first `len` bits of `bytes`; missing bytes read as zero.
    pub fn from_bytes_with_len(bytes: &[u8], len: usize) -> Self {
        let mut words = vec![0u64; words_for(len)];
        for (j, &b) in bytes.iter().enumerate().take(len.div_ceil(8)) {
            words[j / 8] |= (b as u64) << (8 * (j % 8));
        }
        Self::from_words(words, len)
    }

    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let words = (0..words_for(len)).map(|_| rng.next_u64()).collect();
        Self::from_words(words, len)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(
            i < self.len,
            "bit index {i} out of range for length {}",
            self.len
        );
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        self.len += 1;
        if bit {
            let i = self.len - 1;
            self.words[i / 64] |= 1u64 << (i % 64);
        }
    }

    pub fn extend_from(&mut self, other: &BitString) {
        if self.len.is_multiple_of(64) {
            self.words.extend_from_slice(&other.words);
            self.len += other.len;
            return;
        }
        for i in 0..other.len {
            self.push(other.get(i));
        }
    }

    pub fn concat<'a, I: IntoIterator<Item = &'a BitString>>(parts: I) -> BitString {
        let mut out = BitString::default();
        for p in parts {
            out.extend_from(p);
        }
        out
    }

    /// Copies `len` bits starting at `start`.
    pub fn slice(&self, start: usize, len: usize) -> BitString {
        assert!(start + len <= self.len, "slice out of range");
        let mut words = vec![0u64; words_for(len)];
        let shift = start % 64;
        let base = start / 64;
        for (k, w) in words.iter_mut().enumerate() {
            let lo = self.words.get(base + k).copied().unwrap_or(0);
            let hi = self.words.get(base + k + 1).copied().unwrap_or(0);
            *w = if shift == 0 {
                lo
            } else {
                (lo >> shift) | (hi << (64 - shift))
            };
        }
        BitString::from_words(words, len)
    }

    pub fn xor(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn xor_assign(&mut self, other: &BitString) {
        assert_eq!(self.len, other.len, "xor of unequal-length bit strings");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Bytes in little-endian bit order; the last byte is zero padded.
    pub fn to_bytes(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8);
        (0..nbytes)
            .map(|j| (self.words[j / 8] >> (8 * (j % 8))) as u8)
            .collect()
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(s: &str, len: usize) -> Result<BitString, FormatError> {
        let bytes = hex::decode(s.trim()).map_err(|e| FormatError::Hex(e.to_string()))?;
        if bytes.len() != len.div_ceil(8) {
            return Err(FormatError::Length {
                expected: len.div_ceil(8),
                found: bytes.len(),
            });
        }
        let s = BitString::from_bytes_with_len(&bytes, len);
        if s.to_bytes() != bytes {
            return Err(FormatError::Malformed("nonzero padding bits".into()));
        }
        Ok(s)
    }

    fn mask_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString[{}](", self.len)?;
        let shown = self.len.min(128);
        for i in 0..shown {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        if shown < self.len {
            f.write_str("...")?;
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn byte_layout_is_lsb_first() {
        let s = BitString::from_bytes(&[0b0000_0101, 0x80]);
        assert!(s.get(0));
        assert!(!s.get(1));
        assert!(s.get(2));
        assert!(s.get(15));
        assert_eq!(s.count_ones(), 3);
        assert_eq!(s.to_bytes(), vec![0b0000_0101, 0x80]);
    }

    #[test]
    fn slice_across_words() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let s = BitString::random(300, &mut rng);
        let t = s.slice(61, 130);
        for i in 0..130 {
            assert_eq!(t.get(i), s.get(61 + i));
        }
    }

    #[test]
    fn concat_matches_bitwise_push() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let a = BitString::random(70, &mut rng);
        let b = BitString::random(129, &mut rng);
        let c = BitString::concat([&a, &b]);
        assert_eq!(c.len(), 199);
        assert_eq!(c.slice(0, 70), a);
        assert_eq!(c.slice(70, 129), b);
    }

    #[test]
    fn hex_roundtrip_and_rejects_dirty_padding() {
        let s = BitString::from_bits([true, false, true, true, false]);
        let h = s.to_hex();
        assert_eq!(BitString::from_hex(&h, 5).unwrap(), s);
        assert!(BitString::from_hex("ff", 5).is_err());
        assert!(BitString::from_hex("0d0d", 5).is_err());
    }
}
