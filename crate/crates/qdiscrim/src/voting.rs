//! Fixed-measurement majority voting: the single-copy Helstrom measurement
//! for the two mixed states is repeated on every copy and the plurality
//! outcome decides, with even-length ties split by a fair coin.
//!
//! Per-copy outcomes are i.i.d., so the error probability is a binomial tail
//! and decays with the classical Chernoff exponent.

use crate::helstrom;
use crate::states::{NoiseModel, SignalEnsemble};
use thiserror::Error;

/// Above this vote count the binomial tail is accumulated in log space.
const LOG_SPACE_THRESHOLD: u32 = 60;

#[derive(Debug, Error, PartialEq)]
pub enum VotingError {
    #[error("majority voting is implemented for equal priors only")]
    UnequalPriors,
}

/// A voting run: `n_copies` identical measurements, each correct with
/// probability `per_copy_success`; ties are split by a fair coin.
#[derive(Debug, Clone, Copy)]
pub struct VoteConfig {
    pub n_copies: u32,
    pub per_copy_success: f64,
}

impl VoteConfig {
    pub fn new(n_copies: u32, per_copy_success: f64) -> Self {
        assert!(n_copies >= 1);
        assert!(
            (0.5..=1.0).contains(&per_copy_success),
            "per-copy success must lie in [1/2, 1]"
        );
        Self {
            n_copies,
            per_copy_success,
        }
    }
}

/// Per-copy success probability of the mixed-state Helstrom measurement for
/// equal priors, `q = (1 + (2F-1) sin 2theta)/2`.
pub fn per_copy_q(ens: &SignalEnsemble, noise: &NoiseModel) -> Result<f64, VotingError> {
    if !ens.has_equal_priors() {
        return Err(VotingError::UnequalPriors);
    }
    let r = helstrom::optimal_measurement(
        0.5,
        &ens.mixed_state(0, noise),
        &ens.mixed_state(1, noise),
    );
    Ok(r.p_success)
}

/// Probability that the majority of `n` votes is correct:
/// `sum_{j > n/2} C(n,j) q^j (1-q)^(n-j)`, plus half the middle term for
/// even `n`.
pub fn majority_prob(cfg: &VoteConfig) -> f64 {
    1.0 - majority_error_ln(cfg).exp()
}

/// Natural log of the majority-vote failure probability, usable far below
/// the underflow threshold of [`majority_prob`].
pub fn majority_error_ln(cfg: &VoteConfig) -> f64 {
    let n = cfg.n_copies;
    let q = cfg.per_copy_success;
    if q >= 1.0 {
        return f64::NEG_INFINITY;
    }
    if n <= LOG_SPACE_THRESHOLD {
        // exact accumulation in linear space keeps small-n values bit-stable
        let mut err = 0.0;
        let mut coeff = 1.0f64; // C(n, j)
        for j in 0..=n / 2 {
            let term = coeff * q.powi(j as i32) * (1.0 - q).powi((n - j) as i32);
            if 2 * j < n {
                err += term;
            } else {
                err += 0.5 * term;
            }
            coeff = coeff * f64::from(n - j) / f64::from(j + 1);
        }
        return err.ln();
    }
    // log-space: ln C(n,j) by recurrence, tail by running log-sum-exp
    let ln_q = q.ln();
    let ln_p = (1.0 - q).ln();
    let mut ln_coeff = 0.0f64;
    let mut max_term = f64::NEG_INFINITY;
    let mut terms = Vec::with_capacity((n / 2 + 1) as usize);
    for j in 0..=n / 2 {
        let mut t = ln_coeff + f64::from(j) * ln_q + f64::from(n - j) * ln_p;
        if 2 * j == n {
            t += 0.5f64.ln();
        }
        max_term = max_term.max(t);
        terms.push(t);
        ln_coeff += (f64::from(n - j)).ln() - (f64::from(j + 1)).ln();
    }
    let sum: f64 = terms.iter().map(|t| (t - max_term).exp()).sum();
    max_term + sum.ln()
}

/// Classical Chernoff exponent for telling Bernoulli(q) from Bernoulli(1-q):
/// `-ln(2 sqrt(q(1-q)))` nats per copy. Returns `+inf` for `q = 1`.
pub fn chernoff_exponent(q: f64) -> f64 {
    assert!((0.5..=1.0).contains(&q));
    if q >= 1.0 {
        return f64::INFINITY;
    }
    -(2.0 * (q * (1.0 - q)).sqrt()).ln()
}

/// Least-squares slope of `-ln(majority error)` against `n` over odd vote
/// counts in `[n_lo, n_hi]`; converges to [`chernoff_exponent`].
pub fn fitted_exponent(q: f64, n_lo: u32, n_hi: u32) -> f64 {
    assert!(n_lo < n_hi);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let start = if n_lo % 2 == 1 { n_lo } else { n_lo + 1 };
    let mut n = start;
    while n <= n_hi {
        xs.push(f64::from(n));
        ys.push(majority_error_ln(&VoteConfig::new(n, q)));
        n += 2;
    }
    let len = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / len;
    let mean_y = ys.iter().sum::<f64>() / len;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        cov += (x - mean_x) * (y - mean_y);
        var += (x - mean_x) * (x - mean_x);
    }
    -cov / var
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    const TOL: f64 = 1e-12;
    const Q_SPOT: f64 = 0.889_711_431_702_997_4;

    #[test]
    fn per_copy_q_values() {
        let orth = SignalEnsemble::equal_priors(FRAC_PI_4).unwrap();
        assert!((per_copy_q(&orth, &NoiseModel::new(1.0).unwrap()).unwrap() - 1.0).abs() < TOL);

        let e = SignalEnsemble::equal_priors(FRAC_PI_6).unwrap();
        assert!((per_copy_q(&e, &NoiseModel::new(0.5).unwrap()).unwrap() - 0.5).abs() < TOL);
        let q = per_copy_q(&e, &NoiseModel::new(0.95).unwrap()).unwrap();
        assert!((q - Q_SPOT).abs() < 1e-12);

        let biased = SignalEnsemble::new(FRAC_PI_6, 0.6).unwrap();
        assert_eq!(
            per_copy_q(&biased, &NoiseModel::new(0.95).unwrap()),
            Err(VotingError::UnequalPriors)
        );
    }

    #[test]
    fn single_vote_is_the_per_copy_probability() {
        for q in [0.5, 0.7, Q_SPOT, 0.99] {
            assert!((majority_prob(&VoteConfig::new(1, q)) - q).abs() < TOL);
        }
    }

    #[test]
    fn fair_copies_stay_fair() {
        for n in [1u32, 2, 3, 10, 61, 500] {
            assert!((majority_prob(&VoteConfig::new(n, 0.5)) - 0.5).abs() < 1e-10);
        }
    }

    // Binomial enumeration oracle; the n = 3 value also equals q^2 (3 - 2q).
    #[test]
    fn small_vote_matches_enumeration() {
        let q = Q_SPOT;
        for n in 1..=12u32 {
            let mut oracle = 0.0;
            for pattern in 0u32..(1 << n) {
                let ones = pattern.count_ones();
                let p = q.powi(ones as i32) * (1.0 - q).powi((n - ones) as i32);
                oracle += match (2 * ones).cmp(&n) {
                    std::cmp::Ordering::Greater => p,
                    std::cmp::Ordering::Equal => 0.5 * p,
                    std::cmp::Ordering::Less => 0.0,
                };
            }
            let got = majority_prob(&VoteConfig::new(n, q));
            assert!((got - oracle).abs() < 1e-12, "n={n}");
        }
        let three = majority_prob(&VoteConfig::new(3, q));
        assert!((three - q * q * (3.0 - 2.0 * q)).abs() < 1e-12);
        assert!((three - 0.966_192_300_174_710_6).abs() < 1e-12);
    }

    #[test]
    fn log_space_is_continuous_at_the_threshold() {
        let q = 0.73f64;
        for n in [LOG_SPACE_THRESHOLD - 1, LOG_SPACE_THRESHOLD, LOG_SPACE_THRESHOLD + 1] {
            let exact = {
                let mut err = 0.0;
                let mut coeff = 1.0f64;
                for j in 0..=n / 2 {
                    let term = coeff * q.powi(j as i32) * (1.0 - q).powi((n - j) as i32);
                    err += if 2 * j < n { term } else { 0.5 * term };
                    coeff = coeff * f64::from(n - j) / f64::from(j + 1);
                }
                err
            };
            let got = majority_error_ln(&VoteConfig::new(n, q)).exp();
            assert!((got - exact).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn error_nonincreasing_in_odd_n_and_even_interleaving() {
        for q in [0.65, Q_SPOT, 0.99] {
            let err = |n| majority_error_ln(&VoteConfig::new(n, q)).exp();
            let mut n = 1u32;
            while n + 2 <= 41 {
                assert!(err(n + 2) <= err(n) + 1e-15, "q={q} n={n}");
                n += 2;
            }
            for m in 1..=20u32 {
                assert!(err(2 * m) >= err(2 * m + 1) - 1e-15, "q={q} m={m}");
            }
        }
    }

    #[test]
    fn chernoff_values() {
        assert!(chernoff_exponent(0.5).abs() < TOL);
        assert!((chernoff_exponent(Q_SPOT) - 0.467_609_370_879_837).abs() < 1e-12);
        assert!(chernoff_exponent(1.0).is_infinite());
        assert!(chernoff_exponent(0.999_999) > 6.0);
    }

    #[test]
    fn fitted_exponent_tracks_chernoff() {
        for q in [0.65, Q_SPOT] {
            let fitted = fitted_exponent(q, 201, 2001);
            let want = chernoff_exponent(q);
            assert!(
                (fitted - want).abs() / want < 0.02,
                "q={q}: fitted={fitted} chernoff={want}"
            );
        }
    }

    #[test]
    fn deep_tail_stays_finite_in_log_space() {
        let ln_err = majority_error_ln(&VoteConfig::new(2001, Q_SPOT));
        assert!(ln_err.is_finite());
        assert!(ln_err < -900.0);
    }
}
