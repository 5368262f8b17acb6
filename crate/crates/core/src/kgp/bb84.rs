//! Three-intensity decoy-state BB84 with finite-key bounds. The key comes
//! from the X basis and the phase error is estimated in Z.

use crate::bounds::binary_entropy;
use crate::error::KgpError;

use super::estimates::{KgpEstimates, KgpProtocol, SingleBitKey};
use super::numerics::gamma_u_or_zero;
use super::params::{Bb84SourceParams, ChannelParams};

struct BasisCounts {
    n: [f64; 3],
    m: [f64; 3],
}

/// Poisson weight of `j` photons averaged over the intensity choice.
fn tau(j: i32, mus: &[f64; 3], ps: &[f64; 3]) -> f64 {
    let fact: f64 = (1..=j).map(f64::from).product();
    mus.iter()
        .zip(ps)
        .map(|(&k, &p)| (-k).exp() * k.powi(j) * p / fact)
        .sum()
}

/// Hoeffding-widened per-intensity counts, rescaled by `e^k / p_k`.
fn widened(counts: &[f64; 3], mus: &[f64; 3], ps: &[f64; 3], eps_stat: f64) -> ([f64; 3], [f64; 3]) {
    let total: f64 = counts.iter().sum();
    let d = (total / 2.0 * (21.0 / eps_stat).ln()).sqrt();
    let mut plus = [0.0; 3];
    let mut minus = [0.0; 3];
    for i in 0..3 {
        let w = mus[i].exp() / ps[i];
        plus[i] = w * (counts[i] + d);
        minus[i] = w * (counts[i] - d);
    }
    (plus, minus)
}

/// Vacuum and single-photon lower bounds.
fn s0_s1(counts: &[f64; 3], src: &Bb84SourceParams, eps_stat: f64) -> (f64, f64) {
    let mus = [src.mu1, src.mu2, src.mu3];
    let ps = [src.p1, src.p2, src.p3()];
    let (np, nm) = widened(counts, &mus, &ps, eps_stat);
    let (mu1, mu2, mu3) = (src.mu1, src.mu2, src.mu3);
    let t0 = tau(0, &mus, &ps);
    let s0 = (t0 * (mu2 * nm[2] - mu3 * np[1]) / (mu2 - mu3)).max(0.0);
    let s1 = tau(1, &mus, &ps) * mu1
        * (nm[1] - np[2] - (mu2 * mu2 - mu3 * mu3) / (mu1 * mu1) * (np[0] - s0 / t0))
        / (mu1 * (mu2 - mu3) - mu2 * mu2 + mu3 * mu3);
    (s0, s1.max(0.0))
}

pub fn bb84_simulate(ch: &ChannelParams, src: &Bb84SourceParams) -> Result<KgpEstimates, KgpError> {
    ch.validate()?;
    src.validate()?;
    let eta = ch.transmittance(ch.distance_km);
    let eps_stat = ch.eps_stat();
    let mus = [src.mu1, src.mu2, src.mu3];
    let ps = [src.p1, src.p2, src.p3()];
    let pd = ch.p_d;
    let basis = |pb: f64| {
        let mut c = BasisCounts { n: [0.0; 3], m: [0.0; 3] };
        for i in 0..3 {
            let scale = ch.n_pulses * pb * pb * ps[i];
            c.n[i] = scale * (1.0 - (1.0 - pd).powi(2) * (-eta * mus[i]).exp());
            c.m[i] = scale * (ch.e_d * (1.0 - (-eta * mus[i]).exp()) + pd);
        }
        c
    };
    let x = basis(src.p_x);
    let z = basis(1.0 - src.p_x);
    let (s_x0, s_x1) = s0_s1(&x.n, src, eps_stat);
    let (_, s_z1) = s0_s1(&z.n, src, eps_stat);
    let (mp, mm) = widened(&z.m, &mus, &ps, eps_stat);
    let v_z1 = tau(1, &mus, &ps) * (mp[1] - mm[2]) / (src.mu2 - src.mu3);

    let n_key: f64 = x.n.iter().sum();
    let e_key = if n_key > 0.0 { x.m.iter().sum::<f64>() / n_key } else { 0.5 };
    let mut clamped = false;
    let (e_test, phi) = if s_z1 > 0.0 && s_x1 > 0.0 {
        let lam = v_z1 / s_z1;
        if lam < 0.0 {
            clamped = true;
        }
        let lam = lam.clamp(0.0, 0.5);
        let phi = if lam < 0.5 {
            (lam + gamma_u_or_zero(s_z1, s_x1, lam, eps_stat)).min(0.5)
        } else {
            0.5
        };
        (lam, phi)
    } else {
        clamped = true;
        (0.5, 0.5)
    };
    let s_x1 = s_x1.min(n_key);
    let s_x0 = s_x0.min(n_key - s_x1);
    Ok(KgpEstimates {
        protocol: KgpProtocol::Bb84,
        n_z: n_key,
        e_z: e_key,
        n_x: z.n.iter().sum(),
        m_x: z.m.iter().sum(),
        s0_z: s_x0,
        s11_z: s_x1,
        s11_x: s_z1,
        e11_x: e_test,
        phi11_z: phi,
        f_ec: 1.0,
        eps_stat,
        single_bit: SingleBitKey {
            key_bits: n_key,
            error_rate: e_key,
            unknown_bits: s_x0 + s_x1 * (1.0 - binary_entropy(phi)),
        },
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_channel_leaves_statistical_floor() {
        let ch = ChannelParams {
            alpha: 1e-9,
            e_d: 0.0,
            p_d: 0.0,
            eta_d: 1.0,
            ..ChannelParams::default()
        };
        let e = bb84_simulate(&ch, &Bb84SourceParams::default()).unwrap();
        assert_eq!(e.e_z, 0.0);
        // no errors at all: only the Hoeffding allowance remains
        assert!(e.phi11_z > 0.0 && e.phi11_z < 1e-3, "{e:?}");
    }

    #[test]
    fn vacuum_decoy_specialization() {
        // with a vacuum decoy the bound reduces to tau0 (n3 - d) / p3
        let src = Bb84SourceParams {
            mu3: 0.0,
            ..Bb84SourceParams::default()
        };
        // enough dark counts that the vacuum bound is not clamped
        let ch = ChannelParams {
            p_d: 1e-3,
            ..ChannelParams::default().at_distance(50.0)
        };
        let e = bb84_simulate(&ch, &src).unwrap();
        assert!(e.s0_z > 0.0);
        let mus = [src.mu1, src.mu2, 0.0];
        let ps = [src.p1, src.p2, src.p3()];
        let eta = ch.transmittance(50.0);
        let scale = ch.n_pulses * src.p_x * src.p_x;
        let n: Vec<f64> = (0..3)
            .map(|i| scale * ps[i] * (1.0 - (1.0 - ch.p_d).powi(2) * (-eta * mus[i]).exp()))
            .collect();
        let total: f64 = n.iter().sum();
        let d = (total / 2.0 * (21.0 / ch.eps_stat()).ln()).sqrt();
        let two_intensity = tau(0, &mus, &ps) * (n[2] - d) / ps[2];
        assert!((e.s0_z - two_intensity).abs() <= 1e-9 * two_intensity, "{} {}", e.s0_z, two_intensity);
    }

    #[test]
    fn rejects_bad_intensities() {
        let ch = ChannelParams::default();
        let bad = Bb84SourceParams {
            mu1: 0.1,
            mu2: 0.2,
            ..Bb84SourceParams::default()
        };
        assert!(bb84_simulate(&ch, &bad).is_err());
    }
}
