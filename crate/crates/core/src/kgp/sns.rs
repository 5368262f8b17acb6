//! Sending-or-not-sending twin-field key generation and the random
//! pairing post-processing step.
//!
//! For SNS the `_x` estimate fields hold the X-window click count, the
//! phase-window error count, the untagged count and its phase error rate.

use std::f64::consts::PI;

use crate::bounds::binary_entropy;
use crate::error::KgpError;

use super::estimates::{KgpEstimates, KgpProtocol, SingleBitKey};
use super::numerics::{bessel_i0, inverse_binary_entropy, simpson, Chernoff};
use super::params::{ChannelParams, SnsSourceParams};

pub fn sns_simulate(ch: &ChannelParams, src: &SnsSourceParams) -> Result<KgpEstimates, KgpError> {
    ch.validate()?;
    src.validate()?;
    let eta = ch.transmittance(ch.distance_km / 2.0);
    let n = ch.n_pulses;
    let eps_stat = ch.eps_stat();
    let c = Chernoff::new(eps_stat);
    let SnsSourceParams {
        p_z,
        p_z0,
        p_0,
        p_1,
        mu1,
        mu2,
        mu_z,
        big_delta,
    } = *src;
    let p_2 = 1.0 - p_0 - p_1;
    let pd = ch.p_d;
    let ed = ch.e_d;
    let qz = 1.0 - p_z;

    // pulse counts per source pair
    let n00 = (qz * qz * p_0 * p_0 + 2.0 * qz * p_z * p_0 * p_z0) * n;
    let n01 = (qz * qz * p_0 * p_1 + qz * p_z * p_z0 * p_1) * n;
    let n02 = (qz * qz * p_2 * p_0 + qz * p_z * p_z0 * p_2) * n;
    let n_delta = big_delta / (2.0 * PI) * qz * qz * p_1 * p_1 * n;

    // one-detector clicks when a single user sends intensity k
    let single = |k: f64| 2.0 * ((1.0 - pd) * (-eta * k / 2.0).exp() - (1.0 - pd).powi(2) * (-eta * k).exp());
    let c00 = 2.0 * pd * (1.0 - pd) * n00;
    let c01 = single(mu1) * n01;
    let c02 = single(mu2) * n02;

    let half = big_delta / 2.0;
    let tail = (1.0 - pd).powi(2) * (-2.0 * eta * mu1).exp();
    let t_x = simpson(|d| (1.0 - pd) * (-2.0 * eta * mu1 * (d / 2.0).cos().powi(2)).exp(), -half, half)
        / big_delta
        - tail;
    let s_x = simpson(|d| (1.0 - pd) * (-2.0 * eta * mu1 * (d / 2.0).sin().powi(2)).exp(), -half, half)
        / big_delta
        - tail
        + t_x;
    let c_delta = (t_x * (1.0 - 2.0 * ed) + ed * s_x) * n_delta;

    let n_signal = 4.0 * n * p_z * p_z * p_z0 * (1.0 - p_z0)
        * ((1.0 - pd) * (-eta * mu_z / 2.0).exp() - (1.0 - pd).powi(2) * (-eta * mu_z).exp());
    let n_error = 2.0 * n * p_z * p_z * (1.0 - p_z0).powi(2)
        * ((1.0 - pd) * (-eta * mu_z).exp() * bessel_i0(eta * mu_z) - (1.0 - pd).powi(2) * (-2.0 * eta * mu_z).exp())
        + 2.0 * n * p_z * p_z * p_z0 * p_z0 * pd * (1.0 - pd);
    let n_t = n_signal + n_error;
    let e_z = if n_t > 0.0 { n_error / n_t } else { 0.5 };

    let s00_hi = c.expected_upper(c00) / n00;
    let s00_lo = c.expected_lower(c00) / n00;
    let s01_lo = c.expected_lower(c01) / n01;
    let s02_hi = c.expected_upper(c02) / n02;
    let s1 = (mu2 * mu2 * mu1.exp() * 2.0 * s01_lo
        - mu1 * mu1 * mu2.exp() * 2.0 * s02_hi
        - 2.0 * (mu2 * mu2 - mu1 * mu1) * s00_hi)
        / (2.0 * mu1 * mu2 * (mu2 - mu1));
    let mut clamped = s1 <= 0.0;
    let s1 = s1.max(0.0);
    let t_delta_hi = c.expected_upper(2.0 * c_delta) / (2.0 * n_delta);
    let e1 = if s1 > 0.0 {
        let e = (t_delta_hi - 0.5 * (-2.0 * mu1).exp() * s00_lo) / (2.0 * mu1 * (-2.0 * mu1).exp() * s1);
        if e > 0.5 {
            clamped = true;
        }
        e.clamp(0.0, 0.5)
    } else {
        0.5
    };
    let n1_exp = 2.0 * n * p_z * p_z * p_z0 * (1.0 - p_z0) * mu_z * (-mu_z).exp() * s1;
    let n1 = c.observed_lower(n1_exp).min(n_t);

    Ok(KgpEstimates {
        protocol: KgpProtocol::Sns,
        n_z: n_t,
        e_z,
        n_x: 2.0 * (c01 + c02) + c00,
        m_x: 2.0 * c_delta,
        s0_z: 0.0,
        s11_z: n1,
        s11_x: n1,
        e11_x: e1,
        phi11_z: e1,
        f_ec: 1.0,
        eps_stat,
        single_bit: SingleBitKey {
            key_bits: n_t,
            error_rate: e_z,
            unknown_bits: n1 * (1.0 - binary_entropy(e1)),
        },
        clamped,
    })
}

/// Unknown information per output bit after random pairing, with `delta`
/// the untagged fraction and `e` its phase error rate.
pub fn random_pairing_entropy(delta: f64, e: f64) -> f64 {
    let p1 = e * e + (1.0 - e) * (1.0 - e);
    let e1 = e * e / p1;
    let delta_p = delta * delta + 2.0 * delta * (1.0 - delta);
    delta_p - delta * delta * (p1 * binary_entropy(e1) + (1.0 - p1) * binary_entropy(0.5))
        - 2.0 * delta * (1.0 - delta) * binary_entropy(e)
}

/// Bit error rate after pairing.
pub fn paired_error_rate(e: f64) -> f64 {
    2.0 * e * (1.0 - e)
}

/// XORs random pairs of sifted SNS bits, halving the key and reshaping
/// its error and phase-error rates.
pub fn sns_random_pairing(est: &KgpEstimates) -> KgpEstimates {
    let delta = if est.n_z > 0.0 { (est.s11_z / est.n_z).clamp(0.0, 1.0) } else { 0.0 };
    let frac = random_pairing_entropy(delta, est.phi11_z).max(0.0);
    let delta_p = delta * delta + 2.0 * delta * (1.0 - delta);
    let pairs = est.n_z / 2.0;
    let e = paired_error_rate(est.e_z);
    // phase error rate that spreads the same entropy over the untagged pairs
    let phi = if delta_p > 0.0 {
        inverse_binary_entropy(((delta_p - frac) / delta_p).clamp(0.0, 1.0))
    } else {
        0.5
    };
    KgpEstimates {
        protocol: KgpProtocol::SnsRp,
        n_z: pairs,
        e_z: e,
        s11_z: delta_p * pairs,
        phi11_z: phi,
        single_bit: SingleBitKey {
            key_bits: pairs,
            error_rate: e,
            unknown_bits: pairs * frac,
        },
        ..*est
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_limits() {
        assert_eq!(paired_error_rate(0.0), 0.0);
        // error-free untagged bits: everything stays unknown
        assert_eq!(random_pairing_entropy(1.0, 0.0), 1.0);
        assert_eq!(random_pairing_entropy(0.0, 0.1), 0.0);
        let e: f64 = 0.0;
        let p1 = e * e + (1.0 - e) * (1.0 - e);
        assert_eq!(p1, 1.0);
        assert_eq!(e * e / p1, 0.0);
    }

    #[test]
    fn reasonable_at_moderate_distance() {
        let ch = ChannelParams::default().at_distance(200.0);
        let e = sns_simulate(&ch, &SnsSourceParams::default()).unwrap();
        assert!(e.n_z > 0.0 && e.s11_z > 0.0 && e.s11_z <= e.n_z, "{e:?}");
        assert!(e.phi11_z < 0.5 && e.e_z < 0.5, "{e:?}");
        let rp = sns_random_pairing(&e);
        assert_eq!(rp.n_z, e.n_z / 2.0);
        assert!(rp.single_bit.unknown_bits >= 0.0);
        assert!(rp.e_z > e.e_z);
    }

    #[test]
    fn dead_detectors() {
        let ch = ChannelParams {
            eta_d: 0.0,
            p_d: 0.0,
            ..ChannelParams::default()
        };
        let e = sns_simulate(&ch, &SnsSourceParams::default()).unwrap();
        assert_eq!(e.n_z, 0.0);
        assert_eq!(e.s11_z, 0.0);
    }
}
