//! Channel and source parameters, with a flat `key=value` config format.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::STAT_SPLIT;
use crate::error::KgpError;

/// Detector, fiber and finite-size parameters shared by every protocol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub eta_d: f64,
    /// Dark counts per pulse.
    pub p_d: f64,
    pub e_d: f64,
    /// Total pulses sent.
    pub n_pulses: f64,
    /// Fiber loss in dB/km.
    pub alpha: f64,
    /// Error-correction efficiency.
    pub f: f64,
    /// Security bound.
    pub eps: f64,
    /// Distance between the signer and each receiver.
    pub distance_km: f64,
    pub repetition_hz: f64,
    /// Number of finite-size bounds `eps` is split across.
    pub stat_split: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            eta_d: 0.7,
            p_d: 1e-8,
            e_d: 0.02,
            n_pulses: 1e13,
            alpha: 0.165,
            f: 1.1,
            eps: 1e-10,
            distance_km: 0.0,
            repetition_hz: 1e9,
            stat_split: STAT_SPLIT,
        }
    }
}

impl ChannelParams {
    pub fn at_distance(mut self, km: f64) -> Self {
        self.distance_km = km;
        self
    }

    pub fn with_pulses(mut self, n: f64) -> Self {
        self.n_pulses = n;
        self
    }

    pub fn eps_stat(&self) -> f64 {
        self.eps / self.stat_split
    }

    /// Transmittance over `km` of fiber including the detector.
    pub fn transmittance(&self, km: f64) -> f64 {
        self.eta_d * 10f64.powf(-self.alpha * km / 10.0)
    }

    pub fn validate(&self) -> Result<(), KgpError> {
        let frac = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(KgpError::InvalidArgument(format!("{name} = {v} must lie in [0, 1]")))
            }
        };
        frac("eta_d", self.eta_d)?;
        frac("p_d", self.p_d)?;
        frac("e_d", self.e_d)?;
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(KgpError::InvalidArgument(format!("eps = {} must lie in (0, 1)", self.eps)));
        }
        if !(self.n_pulses >= 1.0) || !(self.alpha > 0.0) || !(self.f >= 1.0) {
            return Err(KgpError::InvalidArgument(
                "need N >= 1, alpha > 0 and f >= 1".into(),
            ));
        }
        if !(self.distance_km >= 0.0) || !(self.repetition_hz > 0.0) || !(self.stat_split >= 1.0) {
            return Err(KgpError::InvalidArgument(
                "need distance >= 0, repetition rate > 0 and stat_split >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Per-user intensities and their probabilities. The two vacuum settings
/// (preserve and declare) take the remaining probability.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TptfSourceParams {
    pub mu: f64,
    pub nu: f64,
    pub p_mu: f64,
    pub p_nu: f64,
    /// Preserve-vacuum probability; declare-vacuum gets `1 - p_mu - p_nu - p_o`.
    pub p_o: f64,
    /// Width of the phase slice kept in the X basis.
    pub delta: f64,
    /// Phase misalignment angle.
    pub sigma: f64,
    /// Misalignment error in the Z basis.
    pub e_dz: f64,
}

impl Default for TptfSourceParams {
    fn default() -> Self {
        Self {
            mu: 0.45,
            nu: 0.05,
            p_mu: 0.27,
            p_nu: 0.05,
            p_o: 0.67,
            delta: 0.1,
            sigma: 0.0,
            e_dz: 0.0,
        }
    }
}

impl TptfSourceParams {
    pub fn p_oh(&self) -> f64 {
        1.0 - self.p_mu - self.p_nu - self.p_o
    }

    pub fn validate(&self) -> Result<(), KgpError> {
        if !(self.mu > self.nu && self.nu > 0.0 && self.mu < 10.0) {
            return Err(KgpError::InvalidArgument(format!(
                "need mu > nu > 0, got mu = {}, nu = {}",
                self.mu, self.nu
            )));
        }
        if !(self.p_mu > 0.0 && self.p_nu > 0.0 && self.p_o > 0.0 && self.p_oh() > 0.0) {
            return Err(KgpError::InvalidArgument(
                "intensity probabilities must be positive and sum to 1".into(),
            ));
        }
        if !(self.delta > 0.0 && self.delta < PI) || !(0.0..=0.5).contains(&self.e_dz) {
            return Err(KgpError::InvalidArgument("need 0 < delta < pi and e_dz in [0, 0.5]".into()));
        }
        Ok(())
    }
}

/// Three-intensity decoy BB84 source. `p_x` is the probability of the X
/// basis, which carries the key.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bb84SourceParams {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub p1: f64,
    pub p2: f64,
    pub p_x: f64,
}

impl Default for Bb84SourceParams {
    fn default() -> Self {
        Self {
            mu1: 0.5,
            mu2: 0.1,
            mu3: 0.0002,
            p1: 0.6,
            p2: 0.2,
            p_x: 0.9,
        }
    }
}

impl Bb84SourceParams {
    pub fn p3(&self) -> f64 {
        1.0 - self.p1 - self.p2
    }

    pub fn validate(&self) -> Result<(), KgpError> {
        if !(self.p1 > 0.0 && self.p2 > 0.0 && self.p3() > 0.0 && self.p_x > 0.0 && self.p_x < 1.0) {
            return Err(KgpError::InvalidArgument("BB84 probabilities out of range".into()));
        }
        if !(3.0 > self.mu1 && self.mu1 > self.mu2 + self.mu3 && self.mu2 > self.mu3 && self.mu3 >= 0.0) {
            return Err(KgpError::InvalidArgument(
                "need 3 > mu1 > mu2 + mu3 and mu2 > mu3 >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Sending-or-not-sending source: Z windows are chosen with `p_z` and send
/// `mu_z` with probability `1 - p_z0`; X windows send vacuum, `mu1` or
/// `mu2` with `p_0`, `p_1` and the remainder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnsSourceParams {
    pub p_z: f64,
    pub p_z0: f64,
    pub p_0: f64,
    pub p_1: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu_z: f64,
    /// Phase window kept for the phase-error estimate.
    pub big_delta: f64,
}

impl Default for SnsSourceParams {
    fn default() -> Self {
        Self {
            p_z: 0.8,
            p_z0: 0.8,
            p_0: 0.3,
            p_1: 0.5,
            mu1: 0.1,
            mu2: 0.4,
            mu_z: 0.4,
            big_delta: 2.0 * PI / 16.0,
        }
    }
}

impl SnsSourceParams {
    pub fn validate(&self) -> Result<(), KgpError> {
        let open = |v: f64| v > 0.0 && v < 1.0;
        if !(open(self.p_z) && open(self.p_z0) && open(self.p_0) && open(self.p_1) && self.p_0 + self.p_1 < 1.0) {
            return Err(KgpError::InvalidArgument("SNS probabilities out of range".into()));
        }
        if !(self.mu2 > self.mu1 && self.mu1 > 0.0 && self.mu_z > 0.0 && self.mu2 < 10.0 && self.mu_z < 10.0) {
            return Err(KgpError::InvalidArgument("need mu2 > mu1 > 0 and mu_z > 0".into()));
        }
        if !(self.big_delta > 0.0 && self.big_delta < 2.0 * PI) {
            return Err(KgpError::InvalidArgument("phase window must lie in (0, 2 pi)".into()));
        }
        Ok(())
    }
}

/// Parses `key=value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, KgpError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| KgpError::InvalidArgument(format!("line {}: expected key=value", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn take<T: FromStr>(map: &mut BTreeMap<String, String>, key: &str, slot: &mut T) -> Result<(), KgpError> {
    if let Some(v) = map.remove(key) {
        *slot = v
            .parse()
            .map_err(|_| KgpError::InvalidArgument(format!("{key}: cannot parse {v:?}")))?;
    }
    Ok(())
}

/// Everything a config file can set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub channel: ChannelParams,
    pub tptf: TptfSourceParams,
    pub bb84: Bb84SourceParams,
    pub sns: SnsSourceParams,
}

impl SimConfig {
    /// Applies the entries of `map`, rejecting unknown keys.
    pub fn apply(&mut self, mut map: BTreeMap<String, String>) -> Result<(), KgpError> {
        let c = &mut self.channel;
        take(&mut map, "eta_d", &mut c.eta_d)?;
        take(&mut map, "p_d", &mut c.p_d)?;
        take(&mut map, "e_d", &mut c.e_d)?;
        take(&mut map, "N", &mut c.n_pulses)?;
        take(&mut map, "alpha", &mut c.alpha)?;
        take(&mut map, "f", &mut c.f)?;
        take(&mut map, "eps", &mut c.eps)?;
        take(&mut map, "distance_km", &mut c.distance_km)?;
        take(&mut map, "repetition_hz", &mut c.repetition_hz)?;
        take(&mut map, "stat_split", &mut c.stat_split)?;
        let t = &mut self.tptf;
        take(&mut map, "mu", &mut t.mu)?;
        take(&mut map, "nu", &mut t.nu)?;
        take(&mut map, "p_mu", &mut t.p_mu)?;
        take(&mut map, "p_nu", &mut t.p_nu)?;
        take(&mut map, "p_o", &mut t.p_o)?;
        take(&mut map, "delta", &mut t.delta)?;
        take(&mut map, "sigma", &mut t.sigma)?;
        take(&mut map, "e_dz", &mut t.e_dz)?;
        let b = &mut self.bb84;
        take(&mut map, "bb84.mu1", &mut b.mu1)?;
        take(&mut map, "bb84.mu2", &mut b.mu2)?;
        take(&mut map, "bb84.mu3", &mut b.mu3)?;
        take(&mut map, "bb84.p1", &mut b.p1)?;
        take(&mut map, "bb84.p2", &mut b.p2)?;
        take(&mut map, "bb84.p_x", &mut b.p_x)?;
        let s = &mut self.sns;
        take(&mut map, "sns.p_z", &mut s.p_z)?;
        take(&mut map, "sns.p_z0", &mut s.p_z0)?;
        take(&mut map, "sns.p_0", &mut s.p_0)?;
        take(&mut map, "sns.p_1", &mut s.p_1)?;
        take(&mut map, "sns.mu1", &mut s.mu1)?;
        take(&mut map, "sns.mu2", &mut s.mu2)?;
        take(&mut map, "sns.mu_z", &mut s.mu_z)?;
        take(&mut map, "sns.big_delta", &mut s.big_delta)?;
        if let Some(k) = map.keys().next() {
            return Err(KgpError::InvalidArgument(format!("unknown config key {k:?}")));
        }
        self.channel.validate()
    }

    pub fn from_text(text: &str) -> Result<Self, KgpError> {
        let mut cfg = Self::default();
        cfg.apply(parse_config(text)?)?;
        Ok(cfg)
    }
}
