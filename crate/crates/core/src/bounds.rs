//! Security calculator: min-entropy of a key group, guessing and forgery
//! probabilities, the failure budget and the group-size solver.
//!
//! Probabilities that can underflow are carried as base-2 logarithms.

use std::fmt;

use crate::error::KgpError;
use crate::hash::Scheme;

/// Default channel failure probability `eps'` of the key exchange steps.
pub const DEFAULT_EPS_PRIME: f64 = 1e-11;
/// Default error-correction failure probability.
pub const DEFAULT_EPS_COR: f64 = 1e-11;
/// Number of finite-size deviation bounds the total failure probability is
/// split across.
pub const STAT_SPLIT: f64 = 20.0;

/// Per-use failure probability of each finite-size deviation bound.
pub fn eps_stat(eps_total: f64) -> f64 {
    eps_total / STAT_SPLIT
}

/// `H(p) = -p log2 p - (1-p) log2(1-p)`, with `H(0) = H(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Group-level leakage inputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeakageParams {
    /// Lower bound on vacuum events in the group.
    pub s0_zn: f64,
    /// Lower bound on single-photon-pair events in the group.
    pub s11_zn: f64,
    /// Upper bound on the phase error rate.
    pub phi11_zn: f64,
    pub n: f64,
    /// Error-correction efficiency.
    pub f: f64,
    /// Bit error rate.
    pub ez: f64,
}

impl LeakageParams {
    /// Leakage-free group of `n` bits.
    pub fn perfect(n: f64) -> Self {
        Self {
            s0_zn: n,
            s11_zn: 0.0,
            phi11_zn: 0.0,
            n,
            f: 1.0,
            ez: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), KgpError> {
        let bad = |m: &str| Err(KgpError::InvalidArgument(m.to_string()));
        if !(0.0..=0.5).contains(&self.phi11_zn) || !(0.0..=0.5).contains(&self.ez) {
            return bad("phase and bit error rates must lie in [0, 0.5]");
        }
        if self.s0_zn < 0.0 || self.s11_zn < 0.0 || self.s0_zn + self.s11_zn > self.n * (1.0 + 1e-12) {
            return bad("event bounds must be nonnegative and sum to at most n");
        }
        if self.f < 1.0 {
            return bad("error-correction efficiency must be at least 1");
        }
        Ok(())
    }
}

/// `s0 + s11 (1 - H(phi)) - n f H(Ez)`, clamped at 0.
pub fn min_entropy(p: &LeakageParams) -> f64 {
    let h = p.s0_zn + p.s11_zn * (1.0 - binary_entropy(p.phi11_zn))
        - p.n * p.f * binary_entropy(p.ez);
    h.max(0.0)
}

/// A probability stored as `log2(p)`, with `log2 <= 0`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Prob {
    pub log2: f64,
}

impl Prob {
    pub const ONE: Prob = Prob { log2: 0.0 };
    pub const ZERO: Prob = Prob {
        log2: f64::NEG_INFINITY,
    };

    pub fn from_log2(log2: f64) -> Self {
        Self { log2: log2.min(0.0) }
    }

    pub fn from_value(p: f64) -> Self {
        Self::from_log2(p.log2())
    }

    pub fn value(self) -> f64 {
        self.log2.exp2()
    }

    pub fn max(self, other: Prob) -> Prob {
        if other.log2 > self.log2 {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.value();
        if v > 0.0 {
            write!(f, "{v:.6e}")
        } else {
            write!(f, "2^{:.3}", self.log2)
        }
    }
}

/// `2^-Hn`; negative inputs are treated as 0.
pub fn guess_probability(hn: f64) -> Prob {
    Prob::from_log2(-hn.max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForgeryEpsilon {
    /// Substitution-attack bound from the hash family.
    pub analytic: Prob,
    /// Random-forgery floor `2^-n`.
    pub floor: Prob,
}

impl ForgeryEpsilon {
    pub fn max(&self) -> Prob {
        self.analytic.max(self.floor)
    }
}

/// `log2` of the analytic bound: `m 2^(1-Hn)` for LFSR, `m 2^(-2-Hn)` for
/// GDH. Not clamped.
pub fn log2_epsilon_forgery(m: f64, hn: f64, scheme: Scheme) -> f64 {
    let offset = match scheme {
        Scheme::Lfsr => 1.0,
        Scheme::Gdh => -2.0,
    };
    m.log2() + offset - hn.max(0.0)
}

pub fn epsilon_forgery(m: f64, hn: f64, n: usize, scheme: Scheme) -> ForgeryEpsilon {
    ForgeryEpsilon {
        analytic: Prob::from_log2(log2_epsilon_forgery(m, hn, scheme)),
        floor: Prob::from_log2(-(n as f64)),
    }
}

/// Smallest `n` in `[1, n_max]` with `eps_forgery(m, hn(n)) <= target`, by
/// bisection. `hn` must be nondecreasing in `n`.
pub fn required_group_size(
    m: f64,
    target_eps: f64,
    scheme: Scheme,
    n_max: usize,
    hn: impl Fn(usize) -> f64,
) -> Result<usize, KgpError> {
    if !(target_eps > 0.0 && target_eps < 1.0) {
        return Err(KgpError::InvalidArgument(format!(
            "target epsilon {target_eps} must lie in (0, 1)"
        )));
    }
    if m < 1.0 {
        return Err(KgpError::InvalidArgument("message must have at least one bit".into()));
    }
    let goal = target_eps.log2();
    let ok = |n: usize| log2_epsilon_forgery(m, hn(n), scheme) <= goal;
    if n_max == 0 || !ok(n_max) {
        return Err(KgpError::Infeasible(format!(
            "no group size up to {n_max} reaches epsilon {target_eps:e}"
        )));
    }
    let (mut lo, mut hi) = (0usize, n_max);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonBudget {
    pub eps_cor: f64,
    pub eps_prime: f64,
    pub eps_for: f64,
    pub eps_rob: f64,
    pub eps_rep: f64,
    pub eps_total: f64,
}

pub fn epsilon_budget(eps_cor: f64, eps_prime: f64, eps_for: f64) -> Result<EpsilonBudget, KgpError> {
    for (name, v) in [("eps_cor", eps_cor), ("eps_prime", eps_prime), ("eps_for", eps_for)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(KgpError::InvalidArgument(format!("{name} = {v} is not a probability")));
        }
    }
    let eps_rob = (2.0 * eps_cor + 2.0 * eps_prime).min(1.0);
    let eps_rep = (2.0 * eps_prime).min(1.0);
    Ok(EpsilonBudget {
        eps_cor,
        eps_prime,
        eps_for,
        eps_rob,
        eps_rep,
        eps_total: eps_rob.max(eps_rep).max(eps_for),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_limits() {
        assert_eq!(min_entropy(&LeakageParams::perfect(64.0)), 64.0);
        let p = LeakageParams {
            s0_zn: 0.0,
            s11_zn: 1000.0,
            phi11_zn: 0.5,
            n: 1000.0,
            f: 1.0,
            ez: 0.0,
        };
        assert_eq!(min_entropy(&p), 0.0);
    }

    #[test]
    fn mixed_case_matches_reference() {
        // reference value evaluated independently at high precision
        let p = LeakageParams {
            s0_zn: 100.0,
            s11_zn: 800.0,
            phi11_zn: 0.05,
            n: 1000.0,
            f: 1.1,
            ez: 0.01,
        };
        let expected = 100.0 + 800.0 * (1.0 - 0.286_396_957_115_956_1) - 1100.0 * 0.080_793_135_895_911_17;
        assert!((min_entropy(&p) - expected).abs() < 1e-9);
        assert!((min_entropy(&p) - 582.009_984_821_732_8).abs() < 1e-6);
    }

    #[test]
    fn forgery_exponents() {
        let m = (1u64 << 20) as f64;
        assert_eq!(epsilon_forgery(m, 50.0, 64, Scheme::Lfsr).analytic.log2, -29.0);
        assert_eq!(epsilon_forgery(m, 50.0, 64, Scheme::Gdh).analytic.log2, -32.0);
        assert_eq!(guess_probability(300.0).log2, -300.0);
        assert_eq!(guess_probability(1.0).value(), 0.5);
        assert_eq!(guess_probability(0.0).value(), 1.0);
    }

    #[test]
    fn perfect_key_group_size() {
        let n = required_group_size(1e6, 1e-10, Scheme::Gdh, 4096, |n| n as f64).unwrap();
        assert_eq!(n, 52);
        let n2 = required_group_size(2e6, 1e-10, Scheme::Gdh, 4096, |n| n as f64).unwrap();
        assert_eq!(n2, 53);
        assert!(required_group_size(1e6, 1e-10, Scheme::Gdh, 40, |n| n as f64).is_err());
    }

    #[test]
    fn budget_relations() {
        let b = epsilon_budget(1e-11, 1e-11, 1e-10).unwrap();
        assert_eq!(b.eps_total, 1e-10);
        assert_eq!(b.eps_rob, 4e-11);
        assert_eq!(b.eps_rep, 2e-11);
        let b = epsilon_budget(1e-11, 1e-11, 0.0).unwrap();
        assert_eq!(b.eps_total, b.eps_rob);
        let b = epsilon_budget(0.0, 0.0, 0.0).unwrap();
        assert_eq!(b.eps_total, 0.0);
    }
}
