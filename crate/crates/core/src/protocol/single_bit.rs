//! Encoding overhead of the single-bit signature baseline.
//!
//! Single-bit schemes sign a message bit by bit, so an `n`-bit message is
//! first expanded into a prefix-free form of length
//! `h = n + floor(n/x) + 2x + 4`, where a `0` is inserted after every run
//! of `x` message bits and the framing costs `2x + 4`.

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EncodeLength {
    pub x_opt: usize,
    pub h: usize,
    pub efficiency: f64,
}

fn encoded(n: usize, x: usize) -> usize {
    n + n / x + 2 * x + 4
}

/// Smallest `h` over `x >= 1`; the first minimizing `x` is reported.
pub fn single_bit_encode_length(msg_bits: usize) -> EncodeLength {
    assert!(msg_bits >= 1, "message must contain at least one bit");
    // beyond x = n the floor term is 0 and h only grows
    let (x_opt, h) = (1..=msg_bits)
        .map(|x| (x, encoded(msg_bits, x)))
        .min_by_key(|&(x, h)| (h, x))
        .expect("nonempty range");
    EncodeLength {
        x_opt,
        h,
        efficiency: msg_bits as f64 / h as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thousand_bits() {
        let e = single_bit_encode_length(1000);
        assert_eq!(e.h, 1093);
        // the minimum is flat: x = 21..=24 all reach it
        assert_eq!(e.x_opt, 21);
        for x in 21..=24 {
            assert_eq!(encoded(1000, x), 1093);
        }
        assert!(encoded(1000, 20) > 1093 && encoded(1000, 25) > 1093);
    }

    #[test]
    fn one_bit() {
        let e = single_bit_encode_length(1);
        assert_eq!((e.x_opt, e.h), (1, 8));
    }

    #[test]
    fn efficiency_below_one() {
        for n in [1, 2, 7, 100, 4096, 99_999] {
            assert!(single_bit_encode_length(n).efficiency < 1.0);
        }
    }
}
