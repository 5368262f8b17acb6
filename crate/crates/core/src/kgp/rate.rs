//! Signature rates for the hash schemes and the single-bit baseline, the
//! comparison key length of a privacy-amplified scheme, and per-distance
//! source optimization.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::bounds::{binary_entropy, epsilon_forgery, required_group_size};
use crate::error::KgpError;
use crate::hash::Scheme;
use crate::par::{self, ExecMode};

use super::bb84::bb84_simulate;
use super::estimates::{per_bit_entropy, KgpEstimates, KgpProtocol};
use super::numerics::inverse_binary_entropy;
use super::params::{Bb84SourceParams, SimConfig, SnsSourceParams, TptfSourceParams};
use super::sns::{sns_random_pairing, sns_simulate};
use super::tptf::tptf_simulate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RateScheme {
    Lfsr,
    Gdh,
    /// One signature per message bit.
    SingleBit,
}

impl RateScheme {
    pub fn name(self) -> &'static str {
        match self {
            RateScheme::Lfsr => "lfsr",
            RateScheme::Gdh => "gdh",
            RateScheme::SingleBit => "single-bit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lfsr" => Some(RateScheme::Lfsr),
            "gdh" => Some(RateScheme::Gdh),
            "single-bit" | "single" | "singlebit" => Some(RateScheme::SingleBit),
            _ => None,
        }
    }

    pub fn hash(self) -> Option<Scheme> {
        match self {
            RateScheme::Lfsr => Some(Scheme::Lfsr),
            RateScheme::Gdh => Some(Scheme::Gdh),
            RateScheme::SingleBit => None,
        }
    }
}

impl From<Scheme> for RateScheme {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Lfsr => RateScheme::Lfsr,
            Scheme::Gdh => RateScheme::Gdh,
        }
    }
}

/// Key strings consumed per signature.
pub fn strings_per_signature(scheme: Scheme) -> f64 {
    match scheme {
        Scheme::Lfsr => 3.0,
        Scheme::Gdh => 2.0,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub distance_km: f64,
    /// Group size for the hash schemes, signature length per bit value for
    /// the single-bit baseline.
    pub n_for_group: f64,
    /// Min-entropy of one group, or of the whole key for the baseline.
    pub hn: f64,
    pub rate_tps: f64,
    /// Forgery bound reached.
    pub epsilon: f64,
    pub feasible: bool,
    /// Optimized source parameters, in the order of [`source_vector`].
    pub source: Vec<f64>,
    pub estimates: Option<KgpEstimates>,
}

impl RatePoint {
    fn infeasible(distance_km: f64, est: Option<KgpEstimates>) -> Self {
        Self {
            distance_km,
            n_for_group: 0.0,
            hn: 0.0,
            rate_tps: 0.0,
            epsilon: 1.0,
            feasible: false,
            source: Vec::new(),
            estimates: est,
        }
    }
}

/// Signature length per bit value for the single-bit baseline. Receivers
/// accept below one third of the gap between the honest error rate and the
/// error rate any forger must make, and a Hoeffding bound over the whole
/// signature drives both failure modes below `eps`.
pub fn single_bit_signature_length(unknown_bits: f64, key_bits: f64, error_rate: f64, eps: f64) -> Option<f64> {
    if !(key_bits > 0.0) {
        return None;
    }
    let forger = inverse_binary_entropy((unknown_bits / key_bits).clamp(0.0, 1.0));
    let gap = forger - error_rate;
    if gap <= 0.0 {
        return None;
    }
    Some(36.0 * (2.0 / eps).ln() / (gap * gap))
}

/// Rate for fixed estimates: solves the group size for the hash schemes or
/// the signature length for the baseline.
pub fn rate_from_estimates(est: &KgpEstimates, scheme: RateScheme, m: f64, cfg: &SimConfig) -> RatePoint {
    let ch = &cfg.channel;
    let d = ch.distance_km;
    if !est.is_usable() || m < 1.0 {
        return RatePoint::infeasible(d, Some(*est));
    }
    let per_pulse = ch.repetition_hz / ch.n_pulses;
    match scheme.hash() {
        Some(hash) => {
            let c = strings_per_signature(hash);
            let n_max = (est.n_z / c).floor().min(u32::MAX as f64) as usize;
            let Ok(mut n) = required_group_size(m, ch.eps, hash, n_max, |n| est.hn(n)) else {
                return RatePoint::infeasible(d, Some(*est));
            };
            if hash == Scheme::Gdh {
                n = n.div_ceil(8) * 8;
                if n > n_max {
                    return RatePoint::infeasible(d, Some(*est));
                }
            }
            let hn = est.hn(n);
            RatePoint {
                distance_km: d,
                n_for_group: n as f64,
                hn,
                rate_tps: per_pulse * est.n_z / (c * n as f64),
                epsilon: epsilon_forgery(m, hn, n, hash).max().value(),
                feasible: true,
                source: Vec::new(),
                estimates: Some(*est),
            }
        }
        None => {
            let k = est.single_bit;
            let Some(len) = single_bit_signature_length(k.unknown_bits, k.key_bits, k.error_rate, ch.eps) else {
                return RatePoint::infeasible(d, Some(*est));
            };
            RatePoint {
                distance_km: d,
                n_for_group: len,
                hn: k.unknown_bits,
                rate_tps: per_pulse * k.key_bits / (2.0 * len * m),
                epsilon: ch.eps,
                feasible: true,
                source: Vec::new(),
                estimates: Some(*est),
            }
        }
    }
}

/// Key length after error correction and privacy amplification, clamped
/// at 0.
pub fn otuh_key_length(est: &KgpEstimates, eps_cor: f64, eps_pa: f64) -> f64 {
    let l = est.s0_z + est.s11_z * (1.0 - binary_entropy(est.phi11_z))
        - est.n_z * est.f_ec * binary_entropy(est.e_z)
        - (2.0 / eps_cor).log2()
        - 2.0 * (1.0 / (2.0 * eps_pa)).log2();
    l.max(0.0)
}

/// Perfect-key group size of the privacy-amplified scheme with LFSR
/// hashing.
pub fn otuh_group_size(m: f64, eps: f64) -> f64 {
    (m.log2() + 1.0 - eps.log2()).ceil()
}

pub fn otuh_rate(est: &KgpEstimates, m: f64, cfg: &SimConfig) -> f64 {
    let ch = &cfg.channel;
    let l = otuh_key_length(est, ch.eps / 10.0, ch.eps / 10.0);
    ch.repetition_hz / ch.n_pulses * l / (3.0 * otuh_group_size(m, ch.eps))
}

/// Source parameters of `protocol` taken from `cfg`, as a flat vector.
pub fn source_vector(protocol: KgpProtocol, cfg: &SimConfig) -> Vec<f64> {
    match protocol {
        KgpProtocol::Tptf => {
            let s = &cfg.tptf;
            vec![s.mu, s.nu, s.p_mu, s.p_nu, s.p_o]
        }
        KgpProtocol::Bb84 => {
            let s = &cfg.bb84;
            vec![s.mu1, s.mu2, s.mu3, s.p1, s.p2, s.p_x]
        }
        KgpProtocol::Sns | KgpProtocol::SnsRp => {
            let s = &cfg.sns;
            vec![s.p_z, s.p_z0, s.p_0, s.p_1, s.mu1, s.mu2, s.mu_z]
        }
    }
}

fn with_source(protocol: KgpProtocol, cfg: &SimConfig, x: &[f64]) -> SimConfig {
    let mut c = *cfg;
    match protocol {
        KgpProtocol::Tptf => {
            c.tptf = TptfSourceParams {
                mu: x[0],
                nu: x[1],
                p_mu: x[2],
                p_nu: x[3],
                p_o: x[4],
                ..cfg.tptf
            }
        }
        KgpProtocol::Bb84 => {
            c.bb84 = Bb84SourceParams {
                mu1: x[0],
                mu2: x[1],
                mu3: x[2],
                p1: x[3],
                p2: x[4],
                p_x: x[5],
            }
        }
        KgpProtocol::Sns | KgpProtocol::SnsRp => {
            c.sns = SnsSourceParams {
                p_z: x[0],
                p_z0: x[1],
                p_0: x[2],
                p_1: x[3],
                mu1: x[4],
                mu2: x[5],
                mu_z: x[6],
                ..cfg.sns
            }
        }
    }
    c
}

/// Runs the simulator of `protocol` on `cfg`.
pub fn simulate(protocol: KgpProtocol, cfg: &SimConfig) -> Result<KgpEstimates, KgpError> {
    match protocol {
        KgpProtocol::Tptf => tptf_simulate(&cfg.channel, &cfg.tptf),
        KgpProtocol::Bb84 => bb84_simulate(&cfg.channel, &cfg.bb84),
        KgpProtocol::Sns => sns_simulate(&cfg.channel, &cfg.sns),
        KgpProtocol::SnsRp => sns_simulate(&cfg.channel, &cfg.sns).map(|e| sns_random_pairing(&e)),
    }
}

fn starts(protocol: KgpProtocol) -> Vec<Vec<f64>> {
    match protocol {
        KgpProtocol::Tptf => vec![
            vec![0.45, 0.05, 0.27, 0.05, 0.68],
            vec![0.4, 0.1, 0.25, 0.2, 0.5],
            vec![0.8, 0.1, 0.3, 0.3, 0.35],
            vec![0.37, 0.1, 0.07, 0.5, 0.3],
        ],
        KgpProtocol::Bb84 => vec![
            vec![0.5, 0.1, 0.0002, 0.6, 0.2, 0.9],
            vec![0.4, 0.15, 0.001, 0.5, 0.3, 0.8],
        ],
        KgpProtocol::Sns | KgpProtocol::SnsRp => vec![
            vec![0.8, 0.8, 0.3, 0.5, 0.1, 0.4, 0.4],
            vec![0.6, 0.7, 0.4, 0.4, 0.05, 0.3, 0.3],
            vec![0.9, 0.85, 0.2, 0.6, 0.15, 0.5, 0.5],
        ],
    }
}

/// Settings of the derivative-free search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    /// Initial relative step.
    pub step: f64,
    pub min_step: f64,
    /// Objective evaluations per start.
    pub max_evals: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            step: 0.4,
            min_step: 1e-4,
            max_evals: 4000,
        }
    }
}

/// Maximizes `f` by coordinate moves `x_i (1 +- step)`, halving the step
/// whenever a full sweep brings no improvement. Once the step bottoms out
/// it is reset and the search restarted from the best point, until a
/// restart gains nothing.
pub fn coordinate_search(f: &dyn Fn(&[f64]) -> f64, start: &[f64], s: &SearchSettings) -> (Vec<f64>, f64) {
    let mut x = start.to_vec();
    let mut best = f(&x);
    let mut evals = 1;
    loop {
        let before = best;
        descend(f, &mut x, &mut best, &mut evals, s);
        if best <= before || evals >= s.max_evals {
            return (x, best);
        }
    }
}

fn descend(f: &dyn Fn(&[f64]) -> f64, x: &mut Vec<f64>, best: &mut f64, evals: &mut usize, s: &SearchSettings) {
    let mut step = s.step;
    while step >= s.min_step && *evals < s.max_evals {
        let mut improved = false;
        for i in 0..x.len() {
            for dir in [1.0, -1.0] {
                loop {
                    let mut y = x.clone();
                    y[i] *= 1.0 + dir * step;
                    let v = f(&y);
                    *evals += 1;
                    if v > *best {
                        *best = v;
                        *x = y;
                        improved = true;
                    } else {
                        break;
                    }
                    if *evals >= s.max_evals {
                        break;
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
}

/// What the optimizer maximizes for each scheme.
fn objective(protocol: KgpProtocol, scheme: RateScheme, m: f64, cfg: &SimConfig, x: &[f64]) -> f64 {
    let c = with_source(protocol, cfg, x);
    let Ok(est) = simulate(protocol, &c) else {
        return f64::NEG_INFINITY;
    };
    let p = rate_from_estimates(&est, scheme, m, &c);
    if p.feasible && p.rate_tps > 0.0 {
        return p.rate_tps.log10();
    }
    // below every feasible point, rising towards feasibility
    let surrogate = match scheme {
        RateScheme::SingleBit => {
            let k = est.single_bit;
            if k.key_bits > 0.0 {
                inverse_binary_entropy((k.unknown_bits / k.key_bits).clamp(0.0, 1.0)) - k.error_rate
            } else {
                -1.0
            }
        }
        _ => per_bit_entropy(&est),
    };
    -1000.0 + surrogate.max(-10.0)
}

fn otuh_objective(cfg: &SimConfig, m: f64, x: &[f64]) -> f64 {
    let c = with_source(KgpProtocol::Tptf, cfg, x);
    let Ok(est) = tptf_simulate(&c.channel, &c.tptf) else {
        return f64::NEG_INFINITY;
    };
    let r = otuh_rate(&est, m, &c);
    if r > 0.0 {
        r.log10()
    } else {
        -1000.0 + per_bit_entropy(&est).max(-10.0)
    }
}

fn best_of(f: &dyn Fn(&[f64]) -> f64, protocol: KgpProtocol, s: &SearchSettings) -> (Vec<f64>, f64) {
    starts(protocol)
        .iter()
        .map(|x0| coordinate_search(f, x0, s))
        .fold((Vec::new(), f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
}

type CacheKey = String;

fn cache() -> &'static Mutex<HashMap<CacheKey, RatePoint>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, RatePoint>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cache_key(tag: &str, protocol: KgpProtocol, scheme: &str, m: f64, cfg: &SimConfig, s: &SearchSettings) -> CacheKey {
    format!("{tag}|{}|{scheme}|{m:e}|{cfg:?}|{s:?}", protocol.name())
}

/// Rate at `cfg.channel.distance_km` with the source parameters optimized.
/// Results are memoized per process.
pub fn optimized_rate(protocol: KgpProtocol, scheme: RateScheme, m: f64, cfg: &SimConfig, s: &SearchSettings) -> RatePoint {
    let key = cache_key("rate", protocol, scheme.name(), m, cfg, s);
    if let Some(p) = cache().lock().expect("cache lock").get(&key) {
        return p.clone();
    }
    let f = |x: &[f64]| objective(protocol, scheme, m, cfg, x);
    let (x, _) = best_of(&f, protocol, s);
    let c = with_source(protocol, cfg, &x);
    let mut point = match simulate(protocol, &c) {
        Ok(est) => rate_from_estimates(&est, scheme, m, &c),
        Err(_) => RatePoint::infeasible(cfg.channel.distance_km, None),
    };
    point.source = x;
    cache().lock().expect("cache lock").insert(key, point.clone());
    point
}

/// Privacy-amplified comparison rate with TP-TF keys and LFSR hashing,
/// optimized separately.
pub fn optimized_otuh_rate(m: f64, cfg: &SimConfig, s: &SearchSettings) -> RatePoint {
    let key = cache_key("otuh", KgpProtocol::Tptf, "lfsr", m, cfg, s);
    if let Some(p) = cache().lock().expect("cache lock").get(&key) {
        return p.clone();
    }
    let f = |x: &[f64]| otuh_objective(cfg, m, x);
    let (x, _) = best_of(&f, KgpProtocol::Tptf, s);
    let c = with_source(KgpProtocol::Tptf, cfg, &x);
    let mut point = RatePoint::infeasible(cfg.channel.distance_km, None);
    if let Ok(est) = tptf_simulate(&c.channel, &c.tptf) {
        let l = otuh_key_length(&est, c.channel.eps / 10.0, c.channel.eps / 10.0);
        let n = otuh_group_size(m, c.channel.eps);
        let r = otuh_rate(&est, m, &c);
        point = RatePoint {
            distance_km: c.channel.distance_km,
            n_for_group: n,
            hn: l,
            rate_tps: r,
            epsilon: c.channel.eps,
            feasible: r > 0.0,
            source: x,
            estimates: Some(est),
        };
    }
    cache().lock().expect("cache lock").insert(key, point.clone());
    point
}

/// Ratio of the proposed LFSR rate to the privacy-amplified rate.
pub fn fig6_ratio(m: f64, cfg: &SimConfig, s: &SearchSettings) -> f64 {
    let a = optimized_rate(KgpProtocol::Tptf, RateScheme::Lfsr, m, cfg, s);
    let b = optimized_otuh_rate(m, cfg, s);
    if b.rate_tps > 0.0 {
        a.rate_tps / b.rate_tps
    } else {
        0.0
    }
}

/// One plotted curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub label: String,
    pub protocol: KgpProtocol,
    /// `None` selects the privacy-amplified comparison scheme.
    pub scheme: Option<RateScheme>,
    pub m: f64,
    pub n_pulses: f64,
}

impl Curve {
    pub fn new(protocol: KgpProtocol, scheme: RateScheme, m: f64, n_pulses: f64) -> Self {
        Self {
            label: format!("{}-{}", protocol.name(), scheme.name()),
            protocol,
            scheme: Some(scheme),
            m,
            n_pulses,
        }
    }
}

/// Curves and distance grid of a figure preset.
pub fn figure_preset(figure: u8) -> Result<(Vec<Curve>, Vec<f64>), KgpError> {
    use KgpProtocol::*;
    use RateScheme::*;
    let grid = |hi: f64, step: f64| (0..=(hi / step) as usize).map(|i| i as f64 * step).collect::<Vec<_>>();
    let six = |m: f64| {
        vec![
            Curve::new(Tptf, Gdh, m, 1e13),
            Curve::new(Bb84, Gdh, m, 1e13),
            Curve::new(Sns, Gdh, m, 1e13),
            Curve::new(Bb84, SingleBit, m, 1e13),
            Curve::new(Sns, SingleBit, m, 1e13),
            Curve::new(SnsRp, SingleBit, m, 1e13),
        ]
    };
    match figure {
        3 => Ok((six(1e3), grid(700.0, 50.0))),
        4 => Ok((six(1e6), grid(700.0, 50.0))),
        5 => Ok((
            [1e9, 1e11, 1e13]
                .iter()
                .map(|&n| Curve {
                    label: format!("tptf-gdh-N{n:e}"),
                    ..Curve::new(Tptf, Gdh, 1e6, n)
                })
                .collect(),
            grid(700.0, 50.0),
        )),
        6 => {
            let mut curves = Vec::new();
            for n in [1e13, 1e11] {
                curves.push(Curve {
                    label: format!("tptf-lfsr-N{n:e}"),
                    ..Curve::new(Tptf, Lfsr, 1e3, n)
                });
                curves.push(Curve {
                    label: format!("otuh-lfsr-N{n:e}"),
                    protocol: Tptf,
                    scheme: None,
                    m: 1e3,
                    n_pulses: n,
                });
            }
            Ok((curves, grid(600.0, 50.0)))
        }
        _ => Err(KgpError::InvalidArgument(format!("no preset for figure {figure}"))),
    }
}

/// Evaluates `curve` at each distance, in parallel when `mode` allows.
pub fn sweep(curve: &Curve, distances: &[f64], base: &SimConfig, s: &SearchSettings, mode: ExecMode) -> Vec<RatePoint> {
    par::map(mode, distances, |&d| {
        let mut cfg = *base;
        cfg.channel.distance_km = d;
        cfg.channel.n_pulses = curve.n_pulses;
        match curve.scheme {
            Some(scheme) => optimized_rate(curve.protocol, scheme, curve.m, &cfg, s),
            None => optimized_otuh_rate(curve.m, &cfg, s),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kgp::estimates::sample_estimates;

    #[test]
    fn gdh_to_lfsr_ratio_at_equal_n() {
        let e = sample_estimates();
        let cfg = SimConfig::default();
        let g = rate_from_estimates(&e, RateScheme::Gdh, 1e6, &cfg);
        let l = rate_from_estimates(&e, RateScheme::Lfsr, 1e6, &cfg);
        assert!(g.feasible && l.feasible);
        let ratio = (g.rate_tps * g.n_for_group) / (l.rate_tps * l.n_for_group);
        assert!((ratio - 1.5).abs() < 1e-12);
        assert_eq!(g.n_for_group as usize % 8, 0);
        assert!(g.epsilon <= cfg.channel.eps);
        assert!(l.epsilon <= cfg.channel.eps);
    }

    #[test]
    fn message_length_scaling() {
        let mut e = sample_estimates();
        e.single_bit.key_bits = e.n_z;
        e.single_bit.error_rate = e.e_z;
        e.single_bit.unknown_bits = 0.4 * e.n_z;
        let cfg = SimConfig::default();
        let h3 = rate_from_estimates(&e, RateScheme::Gdh, 1e3, &cfg).rate_tps;
        let h6 = rate_from_estimates(&e, RateScheme::Gdh, 1e6, &cfg).rate_tps;
        assert!(h3 / h6 < 2.0, "{h3} {h6}");
        let s3 = rate_from_estimates(&e, RateScheme::SingleBit, 1e3, &cfg).rate_tps;
        let s6 = rate_from_estimates(&e, RateScheme::SingleBit, 1e6, &cfg).rate_tps;
        assert!((s3 / s6 - 1e3).abs() < 1e-6);
    }

    #[test]
    fn key_length_penalty_grows_as_eps_pa_shrinks() {
        let e = sample_estimates();
        let a = otuh_key_length(&e, 1e-11, 1e-11);
        let b = otuh_key_length(&e, 1e-11, 1e-20);
        assert!(b < a);
        assert_eq!(otuh_group_size(1e3, 1e-10), 45.0);
    }

    #[test]
    fn coordinate_search_finds_quadratic_peak() {
        let f = |x: &[f64]| -(x[0] - 0.3).powi(2) - (x[1] - 2.0).powi(2);
        let (x, v) = coordinate_search(&f, &[1.0, 1.0], &SearchSettings::default());
        assert!((x[0] - 0.3).abs() < 1e-3 && (x[1] - 2.0).abs() < 1e-3, "{x:?} {v}");
    }

    #[test]
    fn presets_cover_all_figures() {
        assert_eq!(figure_preset(3).unwrap().0.len(), 6);
        assert_eq!(figure_preset(4).unwrap().0.len(), 6);
        assert_eq!(figure_preset(5).unwrap().0.len(), 3);
        assert_eq!(figure_preset(6).unwrap().0.len(), 4);
        assert!(figure_preset(7).is_err());
    }
}
