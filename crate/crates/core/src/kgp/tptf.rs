//! Two-photon twin-field key generation: gains from two-pulse
//! interference, Z-basis post-matching, X-basis phase slices and the decoy
//! bounds on single-photon pairs.

use std::f64::consts::PI;

use crate::error::KgpError;

use super::estimates::{KgpEstimates, KgpProtocol, SingleBitKey};
use super::numerics::{bessel_i0, gamma_u_or_zero, simpson, Chernoff};
use super::params::{ChannelParams, TptfSourceParams};

#[derive(Clone, Copy)]
enum Setting {
    Mu,
    Nu,
    /// Preserve vacuum.
    O,
    /// Declare vacuum.
    Oh,
}

struct Model<'a> {
    ch: &'a ChannelParams,
    src: &'a TptfSourceParams,
    eta: f64,
}

impl Model<'_> {
    fn intensity(&self, s: Setting) -> f64 {
        match s {
            Setting::Mu => self.src.mu,
            Setting::Nu => self.src.nu,
            Setting::O | Setting::Oh => 0.0,
        }
    }

    fn prob(&self, s: Setting) -> f64 {
        match s {
            Setting::Mu => self.src.p_mu,
            Setting::Nu => self.src.p_nu,
            Setting::O => self.src.p_o,
            Setting::Oh => self.src.p_oh(),
        }
    }

    /// Probability that a detector stays silent.
    fn y(&self, a: Setting, b: Setting) -> f64 {
        (-self.eta * (self.intensity(a) + self.intensity(b)) / 2.0).exp() * (1.0 - self.ch.p_d)
    }

    fn omega(&self, a: Setting, b: Setting) -> f64 {
        (self.eta * self.intensity(a) * self.eta * self.intensity(b)).sqrt()
    }

    /// One-detector click gain averaged over the random relative phase.
    fn gain(&self, a: Setting, b: Setting) -> f64 {
        let y = self.y(a, b);
        2.0 * y * (bessel_i0(self.omega(a, b)) - y)
    }

    fn count(&self, a: Setting, b: Setting) -> f64 {
        self.ch.n_pulses * self.prob(a) * self.prob(b) * self.gain(a, b)
    }
}

pub fn tptf_simulate(ch: &ChannelParams, src: &TptfSourceParams) -> Result<KgpEstimates, KgpError> {
    ch.validate()?;
    src.validate()?;
    use Setting::*;
    let m = Model {
        ch,
        src,
        eta: ch.transmittance(ch.distance_km / 2.0),
    };
    let n = ch.n_pulses;
    let eps_stat = ch.eps_stat();
    let c = Chernoff::new(eps_stat);
    let (mu, nu) = (src.mu, src.nu);
    let (p_mu, p_nu, p_o, p_oh) = (src.p_mu, src.p_nu, src.p_o, src.p_oh());
    let mut clamped = false;

    // Z basis after post-matching
    let x0 = m.count(O, Mu) + m.count(O, O);
    let x1 = m.count(Mu, O) + m.count(Mu, Mu);
    let x_max = x0.max(x1);
    if !(x_max > 0.0) {
        return Ok(empty(ch, eps_stat));
    }
    let n_c = m.count(O, Mu) * m.count(Mu, O) / x_max;
    let n_e = m.count(O, O) * m.count(Mu, Mu) / x_max;
    let n_z = n_c + n_e;
    let m_z = (1.0 - src.e_dz) * n_e + src.e_dz * n_c;
    let e_z = if n_z > 0.0 { m_z / n_z } else { 0.5 };

    // X basis: matched nu-nu pairs whose phase difference falls in the slice
    let y_nn = m.y(Nu, Nu);
    let w_nn = m.omega(Nu, Nu);
    let s_of = |t: f64| {
        let a = w_nn * t.cos();
        a.exp() + (-a).exp()
    };
    let q_theta = |t: f64| y_nn * (s_of(t) - 2.0 * y_nn);
    let (lo, hi) = (src.sigma, src.sigma + src.delta);
    let pref = n * p_nu * p_nu / PI;
    let n_x = pref * simpson(q_theta, lo, hi);
    let m_x = 2.0 * pref * simpson(|t| y_nn * ((1.0 - y_nn * y_nn) / (s_of(t) - 2.0 * y_nn) - y_nn), lo, hi);

    // decoy bounds on single-photon yields
    let x_doo = m.count(Oh, Oh) + m.count(Oh, O) + m.count(O, Oh);
    let p_doo = p_oh * p_oh + 2.0 * p_oh * p_o;
    let x_doo_lo = c.expected_lower(x_doo);
    let x_doo_hi = c.expected_upper(x_doo);
    let yield_bound = |x_onu: f64, x_ohmu: f64| {
        mu / (n * (mu * nu - nu * nu))
            * (nu.exp() * c.expected_lower(x_onu) / (p_o * p_nu)
                - nu * nu / (mu * mu) * mu.exp() * c.expected_upper(x_ohmu) / (p_oh * p_mu)
                - (mu * mu - nu * nu) / (mu * mu) * x_doo_hi / p_doo)
    };
    let mut y01 = yield_bound(m.count(O, Nu), m.count(Oh, Mu));
    let mut y10 = yield_bound(m.count(Nu, O), m.count(Mu, Oh));
    if y01 < 0.0 || y10 < 0.0 {
        clamped = true;
        y01 = y01.max(0.0);
        y10 = y10.max(0.0);
    }
    let z10 = n * p_mu * p_o * mu * (-mu).exp() * y10;
    let z01 = n * p_o * p_mu * mu * (-mu).exp() * y01;
    let s11_z_exp = z10 * z01 / x_max;

    let z00 = p_mu * p_o * (-mu).exp() * x_doo_lo / p_doo;
    let x_omu_lo = p_o * c.expected_lower(m.count(Oh, Mu)) / p_oh;
    let z0mu = p_mu * p_mu * (-mu).exp() * x_omu_lo / (p_o * p_mu);
    let x_oo_lo = p_o * p_o * x_doo_lo / p_doo;
    let s0_exp = x_omu_lo * z00 / x_max + x_oo_lo * z0mu / x_max;

    let q00_hi = x_doo_hi / (n * p_doo);
    let q00_lo = x_doo_lo / (n * p_doo);
    let s11_x_exp = pref * simpson(|t| 2.0 * nu * nu * (-4.0 * nu).exp() * y01 * y10 / q_theta(t), lo, hi);
    let vac = 2.0 * src.delta * n * p_nu * p_nu * (-2.0 * nu).exp() * q00_lo / PI;
    let n0000 = pref * simpson(|t| (-4.0 * nu).exp() * q00_hi * q00_hi / q_theta(t), lo, hi);
    let t11 = m_x - c.observed_lower(vac / 2.0) + c.observed_upper(n0000 / 2.0);

    let s11_x = c.observed_lower(s11_x_exp);
    let s11_z = c.observed_lower(s11_z_exp);
    let s0_z = c.observed_lower(s0_exp);
    let e11_x = if s11_x > 0.0 { (t11 / s11_x).clamp(0.0, 0.5) } else { 0.5 };
    let phi11_z = if s11_z > 0.0 && e11_x < 0.5 {
        (e11_x + gamma_u_or_zero(s11_z, s11_x, e11_x, eps_stat)).min(0.5)
    } else {
        0.5
    };
    if s11_z + s0_z > n_z {
        clamped = true;
    }
    let s11_z = s11_z.min(n_z);
    let s0_z = s0_z.min(n_z - s11_z);

    Ok(KgpEstimates {
        protocol: KgpProtocol::Tptf,
        n_z,
        e_z,
        n_x,
        m_x,
        s0_z,
        s11_z,
        s11_x,
        e11_x,
        phi11_z,
        f_ec: ch.f,
        eps_stat,
        single_bit: SingleBitKey {
            key_bits: n_z,
            error_rate: e_z,
            unknown_bits: s0_z + s11_z * (1.0 - crate::bounds::binary_entropy(phi11_z)),
        },
        clamped,
    })
}

pub(crate) fn empty(ch: &ChannelParams, eps_stat: f64) -> KgpEstimates {
    KgpEstimates {
        protocol: KgpProtocol::Tptf,
        n_z: 0.0,
        e_z: 0.5,
        n_x: 0.0,
        m_x: 0.0,
        s0_z: 0.0,
        s11_z: 0.0,
        s11_x: 0.0,
        e11_x: 0.5,
        phi11_z: 0.5,
        f_ec: ch.f,
        eps_stat,
        single_bit: SingleBitKey {
            key_bits: 0.0,
            error_rate: 0.5,
            unknown_bits: 0.0,
        },
        clamped: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_reference_model_at_300_km() {
        // optimum of the reference model for GDH, m = 1e6
        let ch = ChannelParams::default().at_distance(300.0);
        let src = TptfSourceParams {
            mu: 0.411_625_21,
            nu: 0.018_577_67,
            p_mu: 0.290_208_29,
            p_nu: 0.026_800_73,
            p_o: 0.682_501_96,
            ..TptfSourceParams::default()
        };
        let e = tptf_simulate(&ch, &src).unwrap();
        let close = |a: f64, b: f64, tol: f64| (a / b - 1.0).abs() < tol;
        assert!(close(e.n_z, 1.033e9, 1e-3), "{e:?}");
        assert!(close(e.e_z, 4.145e-5, 1e-3), "{e:?}");
        assert!(close(e.s11_z, 4.46e8, 1e-3), "{e:?}");
        assert!(close(e.s0_z, 1.251e4, 1e-3), "{e:?}");
        assert!(close(e.phi11_z, 0.01295, 2e-3), "{e:?}");
        assert!(close(e.n_x, 1.992e4, 1e-3), "{e:?}");
        assert!(close(e.m_x, 37.69, 1e-3), "{e:?}");
    }

    #[test]
    fn dead_detectors_see_nothing() {
        let ch = ChannelParams {
            eta_d: 0.0,
            p_d: 0.0,
            ..ChannelParams::default()
        };
        let e = tptf_simulate(&ch, &TptfSourceParams::default()).unwrap();
        assert_eq!(e.n_z, 0.0);
        assert_eq!(e.n_x, 0.0);
        assert_eq!(e.hn(1), 0.0);
    }

    #[test]
    fn bounds_are_ordered() {
        for km in [0.0, 200.0, 400.0, 600.0] {
            let e = tptf_simulate(&ChannelParams::default().at_distance(km), &TptfSourceParams::default()).unwrap();
            assert!(e.s0_z >= 0.0 && e.s11_z >= 0.0 && e.s0_z + e.s11_z <= e.n_z);
            assert!(e.e11_x <= e.phi11_z && e.phi11_z <= 0.5);
            assert!(e.m_x <= e.n_x);
        }
    }
}
