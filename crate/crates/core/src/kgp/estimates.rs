//! Finite-size outputs of a key generation run and their projection onto
//! an `n`-bit key group.

use serde::{Deserialize, Serialize};

use crate::bounds::{binary_entropy, min_entropy, LeakageParams};
use crate::error::KgpError;

use super::numerics::gamma_u_or_zero;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KgpProtocol {
    Tptf,
    Bb84,
    Sns,
    /// SNS followed by random pairing; only meaningful for single-bit
    /// signatures.
    SnsRp,
}

impl KgpProtocol {
    pub fn name(self) -> &'static str {
        match self {
            KgpProtocol::Tptf => "tptf",
            KgpProtocol::Bb84 => "bb84",
            KgpProtocol::Sns => "sns",
            KgpProtocol::SnsRp => "sns-rp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tptf" | "tp-tf" => Some(KgpProtocol::Tptf),
            "bb84" => Some(KgpProtocol::Bb84),
            "sns" => Some(KgpProtocol::Sns),
            "sns-rp" | "snsrp" => Some(KgpProtocol::SnsRp),
            _ => None,
        }
    }
}

/// Key material available to a single-bit signature scheme.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SingleBitKey {
    pub key_bits: f64,
    pub error_rate: f64,
    /// Bits unknown to the adversary in the whole key.
    pub unknown_bits: f64,
}

/// Estimates for one run. "Key basis" quantities carry a `_z` suffix even
/// for BB84, where the key is taken from the X basis; the `_x` fields then
/// hold the test basis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KgpEstimates {
    pub protocol: KgpProtocol,
    /// Sifted key bits.
    pub n_z: f64,
    /// Bit error rate of the key.
    pub e_z: f64,
    pub n_x: f64,
    pub m_x: f64,
    /// Lower bound on vacuum events in the key.
    pub s0_z: f64,
    /// Lower bound on single-photon (pair) events in the key.
    pub s11_z: f64,
    /// Lower bound on single-photon events in the test basis.
    pub s11_x: f64,
    /// Upper bound on the test-basis error rate of those events.
    pub e11_x: f64,
    /// Upper bound on the key phase error rate.
    pub phi11_z: f64,
    /// Error-correction efficiency charged against the key.
    pub f_ec: f64,
    pub eps_stat: f64,
    pub single_bit: SingleBitKey,
    /// Some intermediate bound went negative and was clamped.
    pub clamped: bool,
}

impl KgpEstimates {
    /// Whole-string min-entropy.
    pub fn h_total(&self) -> f64 {
        min_entropy(&self.leakage(self.s0_z, self.s11_z, self.phi11_z, self.n_z))
    }

    fn leakage(&self, s0: f64, s11: f64, phi: f64, n: f64) -> LeakageParams {
        LeakageParams {
            s0_zn: s0,
            s11_zn: s11,
            phi11_zn: phi.clamp(0.0, 0.5),
            n,
            f: self.f_ec,
            ez: self.e_z.clamp(0.0, 0.5),
        }
    }

    /// Min-entropy of an `n`-bit group, 0 when `n` exceeds the key.
    pub fn hn(&self, n: usize) -> f64 {
        match group_level_bounds(self, n, self.eps_stat) {
            Ok(g) => min_entropy(&self.leakage(g.s0_zn, g.s11_zn, g.phi11_zn, n as f64)),
            Err(_) => 0.0,
        }
    }

    pub fn is_usable(&self) -> bool {
        self.n_z >= 1.0 && self.n_z.is_finite()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupBounds {
    pub s0_zn: f64,
    pub s11_zn: f64,
    pub phi11_zn: f64,
}

/// Projects the whole-key bounds onto a random `n`-bit subset.
pub fn group_level_bounds(est: &KgpEstimates, n: usize, eps_stat: f64) -> Result<GroupBounds, KgpError> {
    let nz = est.n_z;
    let nf = n as f64;
    if n == 0 || nf > nz.floor() {
        return Err(KgpError::InvalidArgument(format!(
            "group size {n} outside [1, {}]",
            nz.floor()
        )));
    }
    let rest = nz - nf;
    let project = |s: f64| {
        let l = s / nz;
        if l <= 0.0 {
            return 0.0;
        }
        (nf * (l - gamma_u_or_zero(nf, rest, l, eps_stat))).clamp(0.0, nf)
    };
    let s0_zn = project(est.s0_z);
    let s11_zn = project(est.s11_z);
    let phi11_zn = if s11_zn <= 0.0 || est.phi11_z >= 0.5 {
        0.5
    } else {
        (est.phi11_z + gamma_u_or_zero(s11_zn, est.s11_z - s11_zn, est.phi11_z, eps_stat)).clamp(0.0, 0.5)
    };
    Ok(GroupBounds {
        s0_zn,
        s11_zn,
        phi11_zn,
    })
}

/// Per-bit unknown information used as a feasibility surrogate when no
/// group reaches the target.
pub fn per_bit_entropy(est: &KgpEstimates) -> f64 {
    if !est.is_usable() {
        return -1.0;
    }
    (est.s0_z + est.s11_z * (1.0 - binary_entropy(est.phi11_z.clamp(0.0, 0.5)))) / est.n_z
        - est.f_ec * binary_entropy(est.e_z.clamp(0.0, 0.5))
}

#[cfg(test)]
pub(crate) fn sample_estimates() -> KgpEstimates {
    KgpEstimates {
        protocol: KgpProtocol::Tptf,
        n_z: 1e8,
        e_z: 1e-3,
        n_x: 1e4,
        m_x: 10.0,
        s0_z: 1e4,
        s11_z: 4e7,
        s11_x: 5e3,
        e11_x: 0.01,
        phi11_z: 0.02,
        f_ec: 1.1,
        eps_stat: 5e-12,
        single_bit: SingleBitKey::default(),
        clamped: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_group_matches_whole_string() {
        let e = sample_estimates();
        let g = group_level_bounds(&e, 100_000_000, e.eps_stat).unwrap();
        assert_eq!(g.s0_zn, e.s0_z);
        assert_eq!(g.s11_zn, e.s11_z);
        assert_eq!(g.phi11_zn, e.phi11_z);
        assert!((e.hn(100_000_000) - e.h_total()).abs() < 1e-6 * e.h_total());
        assert!(group_level_bounds(&e, 100_000_001, e.eps_stat).is_err());
        assert!(group_level_bounds(&e, 0, e.eps_stat).is_err());
    }

    #[test]
    fn phase_bound_widens_as_groups_shrink() {
        let e = sample_estimates();
        let mut prev = 0.0;
        for n in [10_000_000usize, 1_000_000, 100_000, 10_000, 1000] {
            let g = group_level_bounds(&e, n, e.eps_stat).unwrap();
            let widening = (g.phi11_zn - e.phi11_z) / e.phi11_z;
            assert!(widening >= prev, "{n}: {widening} < {prev}");
            prev = widening;
            assert!(g.s0_zn + g.s11_zn <= n as f64);
        }
    }

    #[test]
    fn pinned_group_triple() {
        // closed-form evaluation of the three projections at 50 digits
        let e = sample_estimates();
        let g = group_level_bounds(&e, 1_000_000, e.eps_stat).unwrap();
        assert!((g.s0_zn - PIN.0).abs() < 1e-6, "{:?}", g);
        assert!((g.s11_zn - PIN.1).abs() < 1e-4, "{:?}", g);
        assert!((g.phi11_zn - PIN.2).abs() < 1e-12, "{:?}", g);
    }

    const PIN: (f64, f64, f64) = (5.602_631_529_501_673, 396_968.043_160_561_7, 0.021_485_035_939_085_9);
}
