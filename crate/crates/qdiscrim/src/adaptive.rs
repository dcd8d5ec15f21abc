//! The local-adaptive (Markovian) discrimination scheme: per-step optimal
//! measurement angles, exact success probabilities under preparation noise
//! via three mutually independent routes (closed form, one-step recursion,
//! chain DP), the many-copy limit, and the record-based improvements
//! (majority vote over the record, full-record Bayesian updating).
//!
//! The step-n basis is the eigenbasis of the posterior-weighted difference
//! of the two pure signal projectors. In closed form, with `u = 4 p0 p1`,
//! `c = cos^2 2theta` and `i` the previous outcome:
//!
//! ```text
//! cos 2phi_n = (-1)^i cos 2theta sqrt((1 - u c^(n-1)) / (1 - u c^n))
//! sin 2phi_n =        sin 2theta /    sqrt(1 - u c^n)
//! ```
//!
//! which solves the one-step optimality condition at every n and reproduces
//! the multiple-copy Helstrom bound for perfect preparation.

use crate::helstrom::{self, HelstromResult};
use crate::states::{one_minus_pow, sign, MeasBasis, NoiseModel, SignalEnsemble};
use thiserror::Error;

/// Largest record length enumerated exactly by [`bayes_full_record`].
pub const BAYES_ENUMERATION_CAP: u32 = 20;

const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum AdaptiveError {
    #[error("theta = 0 with equal priors: the adaptive basis is degenerate and the scheme carries no information")]
    DegenerateSignal,
    #[error("this route is only defined for equal priors; use the DP or Bayesian routes instead")]
    UnequalPriors,
    #[error("the limits theta -> 0 and F -> 1 do not commute; the asymptotic value is undefined at theta = 0, F = 1")]
    NonCommutingLimit,
    #[error("record length {n} exceeds the exact-enumeration cap {cap}; use the Monte Carlo route in `sim`")]
    EnumerationCapExceeded { n: u32, cap: u32 },
}

/// `1 - u * base^n`, computed without cancellation.
fn one_minus_weighted_pow(u: f64, base: f64, n: u32) -> f64 {
    (1.0 - u) + u * one_minus_pow(base, n)
}

/// Measurement basis for the nth copy given the previous outcome.
///
/// `prev` must be `None` exactly when `n == 1`; the first copy is measured in
/// the prior-weighted Helstrom eigenbasis of the two pure signal states.
pub fn markov_angle(
    n: u32,
    prev: Option<u8>,
    ens: &SignalEnsemble,
) -> Result<MeasBasis, AdaptiveError> {
    assert!(n >= 1, "step index starts at 1");
    assert_eq!(prev.is_none(), n == 1, "prev must be given iff n >= 2");
    if n == 1 {
        let r = helstrom::optimal_measurement(
            ens.prior0(),
            &ens.pure_state(0).projector(),
            &ens.pure_state(1).projector(),
        );
        if r.degenerate {
            return Err(AdaptiveError::DegenerateSignal);
        }
        return Ok(r.basis);
    }
    let prev = prev.expect("n >= 2");
    assert!(prev <= 1);
    let u = 4.0 * ens.prior0() * ens.prior1();
    let c = ens.overlap().powi(2);
    let denom = one_minus_weighted_pow(u, c, n);
    if denom <= DEGENERACY_TOL {
        return Err(AdaptiveError::DegenerateSignal);
    }
    let numer = one_minus_weighted_pow(u, c, n - 1);
    let cos2 = sign(prev) * ens.overlap() * (numer / denom).sqrt();
    let sin2 = (2.0 * ens.theta()).sin() / denom.sqrt();
    Ok(MeasBasis::new(0.5 * sin2.atan2(cos2)))
}

/// The Markovian measurement policy for a fixed ensemble and record length.
#[derive(Debug, Clone, Copy)]
pub struct AdaptivePolicy {
    pub n_copies: u32,
    pub ensemble: SignalEnsemble,
}

impl AdaptivePolicy {
    pub fn new(n_copies: u32, ensemble: SignalEnsemble) -> Self {
        assert!(n_copies >= 1);
        Self { n_copies, ensemble }
    }

    /// Basis for step `n`; depends only on `(n, prev)`.
    pub fn angle(&self, n: u32, prev: Option<u8>) -> Result<MeasBasis, AdaptiveError> {
        assert!(n <= self.n_copies);
        markov_angle(n, prev, &self.ensemble)
    }
}

/// Outcome probabilities `[P(0|k), P(1|k)]` for measuring the noisy state
/// `rho_k` in `basis`:
///
/// `P(i|k) = [1 + (2F-1)(-1)^i cos 2theta cos 2phi
///              + (2F-1)(-1)^(i+k) sin 2theta sin 2phi] / 2`.
pub fn outcome_prob(
    basis: &MeasBasis,
    k: u8,
    ens: &SignalEnsemble,
    noise: &NoiseModel,
) -> [f64; 2] {
    assert!(k <= 1);
    let t = noise.contrast();
    let two_theta = 2.0 * ens.theta();
    let p0 = 0.5
        * (1.0
            + t * two_theta.cos() * basis.cos2phi()
            + t * sign(k) * two_theta.sin() * basis.sin2phi());
    [p0, 1.0 - p0]
}

/// Per-hypothesis distribution over the last outcome of the adaptive chain.
///
/// `probs[k][i]` is the probability that step `step` produced outcome `i`
/// given that `|psi_k>` was prepared. Each row sums to 1.
#[derive(Debug, Clone)]
pub struct ChainDistribution {
    pub step: u32,
    pub probs: [[f64; 2]; 2],
}

impl ChainDistribution {
    /// Distribution after the first measurement.
    pub fn first(ens: &SignalEnsemble, noise: &NoiseModel) -> Result<Self, AdaptiveError> {
        let basis = markov_angle(1, None, ens)?;
        let mut probs = [[0.0; 2]; 2];
        for k in 0..2u8 {
            probs[k as usize] = outcome_prob(&basis, k, ens, noise);
        }
        Ok(Self { step: 1, probs })
    }

    /// Propagate one step of the chain.
    pub fn advance(&mut self, ens: &SignalEnsemble, noise: &NoiseModel) -> Result<(), AdaptiveError> {
        let n = self.step + 1;
        let bases = [
            markov_angle(n, Some(0), ens)?,
            markov_angle(n, Some(1), ens)?,
        ];
        for k in 0..2u8 {
            let mut next = [0.0; 2];
            for prev in 0..2usize {
                let pr = outcome_prob(&bases[prev], k, ens, noise);
                next[0] += self.probs[k as usize][prev] * pr[0];
                next[1] += self.probs[k as usize][prev] * pr[1];
            }
            self.probs[k as usize] = next;
        }
        self.step = n;
        Ok(())
    }

    pub fn is_normalised(&self, tol: f64) -> bool {
        self.probs
            .iter()
            .all(|row| (row[0] + row[1] - 1.0).abs() <= tol)
    }

    /// Success probability when the decision is the last outcome.
    pub fn final_outcome_success(&self, ens: &SignalEnsemble) -> f64 {
        ens.prior0() * self.probs[0][0] + ens.prior1() * self.probs[1][1]
    }
}

/// Exact success probability of the Markovian scheme (decision = final
/// outcome) by propagating the chain distribution. Supports general priors.
pub fn success_dp(
    n_copies: u32,
    ens: &SignalEnsemble,
    noise: &NoiseModel,
) -> Result<f64, AdaptiveError> {
    Ok(*success_dp_curve(n_copies, ens, noise)?
        .last()
        .expect("n_copies >= 1"))
}

/// Success probabilities for every record length `1..=n_max` in one pass.
pub fn success_dp_curve(
    n_max: u32,
    ens: &SignalEnsemble,
    noise: &NoiseModel,
) -> Result<Vec<f64>, AdaptiveError> {
    assert!(n_max >= 1);
    let mut chain = ChainDistribution::first(ens, noise)?;
    let mut out = Vec::with_capacity(n_max as usize);
    out.push(chain.final_outcome_success(ens));
    for _ in 2..=n_max {
        chain.advance(ens, noise)?;
        out.push(chain.final_outcome_success(ens));
    }
    Ok(out)
}

/// The geometric series entering the closed form,
/// `S_N = sum_{i=1}^{N} t^(N+1-i) (1 - t^(i-1)) c^(N-i)`.
///
/// Evaluated in the grouped two-fraction form away from vanishing
/// denominators, term by term otherwise.
pub(crate) fn s_series(n: u32, t: f64, c: f64) -> f64 {
    let d1 = 1.0 - t * c;
    let d2 = 1.0 - c;
    if d1 < 1e-8 || d2 < 1e-8 {
        let mut sum = 0.0;
        // running powers: t^(N+1-i) and c^(N-i)
        let mut t_pow = t; // i = N
        let mut c_pow = 1.0;
        for i in (1..=n).rev() {
            sum += t_pow * (1.0 - t.powi(i as i32 - 1)) * c_pow;
            t_pow *= t;
            c_pow *= c;
        }
        return sum;
    }
    t * (1.0 - (t * c).powi(n as i32)) / d1 - t.powi(n as i32) * (1.0 - c.powi(n as i32)) / d2
}

/// Closed-form success probability of the Markovian scheme for equal priors:
///
/// `P_N = [1 + (2F-1)^N sqrt(1 - c^N) + sin^2(2theta) S_N / sqrt(1 - c^N)] / 2`
///
/// with `c = cos^2 2theta`. At `theta = 0` the square root vanishes and the
/// continuity value 1/2 is returned.
pub fn success_closed(
    n_copies: u32,
    ens: &SignalEnsemble,
    noise: &NoiseModel,
) -> Result<f64, AdaptiveError> {
    assert!(n_copies >= 1);
    if !ens.has_equal_priors() {
        return Err(AdaptiveError::UnequalPriors);
    }
    let t = noise.contrast();
    let c = ens.overlap().powi(2);
    let root_sq = one_minus_pow(c, n_copies);
    if root_sq <= 0.0 {
        return Ok(0.5);
    }
    let root = root_sq.sqrt();
    let sin_sq = (2.0 * ens.theta()).sin().powi(2);
    Ok(0.5 * (1.0 + t.powi(n_copies as i32) * root + sin_sq / root * s_series(n_copies, t, c)))
}

/// Success probability by iterating the one-step recursion from the exact
/// single-copy value `P_1 = (1 + (2F-1) sin 2theta)/2`. Equal priors only.
pub fn success_recursion(
    n_copies: u32,
    ens: &SignalEnsemble,
    noise: &NoiseModel,
) -> Result<f64, AdaptiveError> {
    assert!(n_copies >= 1);
    if !ens.has_equal_priors() {
        return Err(AdaptiveError::UnequalPriors);
    }
    let t = noise.contrast();
    let c = ens.overlap().powi(2);
    if c >= 1.0 {
        return Ok(0.5);
    }
    let sin2 = (2.0 * ens.theta()).sin();
    let mut p = 0.5 * (1.0 + t * sin2);
    for n in 2..=n_copies {
        let here = one_minus_pow(c, n);
        let prev = one_minus_pow(c, n - 1);
        p = 0.5
            * (1.0
                + t * sin2 * sin2 / here.sqrt()
                + t * c * (prev / here).sqrt() * (2.0 * p - 1.0));
    }
    Ok(p)
}

/// The common many-copy limit of the adaptive and data-gathering schemes,
/// `1 - (1-F) / (1 - (2F-1) cos^2 2theta)`.
///
/// Undefined at `theta = 0, F = 1`, where the two limits do not commute.
pub fn asymptotic_limit(theta: f64, noise: &NoiseModel) -> Result<f64, AdaptiveError> {
    if theta == 0.0 && noise.fidelity() >= 1.0 {
        return Err(AdaptiveError::NonCommutingLimit);
    }
    let c = (2.0 * theta).cos().powi(2);
    Ok(1.0 - noise.infidelity() / (1.0 - noise.contrast() * c))
}

/// One step of the hypothesis-checking recursion that governs the many-copy
/// regime: `p' = F - c t + c t p` with `c = cos^2 2theta`, `t = 2F-1`.
/// Iteration converges geometrically to [`asymptotic_limit`].
pub fn hypothesis_check_step(p_prev: f64, theta: f64, noise: &NoiseModel) -> f64 {
    assert!((0.0..=1.0).contains(&p_prev));
    let ct = (2.0 * theta).cos().powi(2) * noise.contrast();
    noise.fidelity() - ct + ct * p_prev
}

/// Success probability when the decision is the majority bit of the full
/// adaptive record (ties split by a fair coin). Equal priors only.
///
/// DP over (step, last outcome, count of 1-outcomes); valid because the
/// chain is Markov in the last outcome.
pub fn record_majority_dp(
    n_copies: u32,
    ens: &SignalEnsemble,
    noise: &NoiseModel,
) -> Result<f64, AdaptiveError> {
    Ok(*record_majority_curve(n_copies, ens, noise)?
        .last()
        .expect("n_copies >= 1"))
}

/// Record-majority success for every record length `1..=n_max` in one pass.
pub fn record_majority_curve(
    n_max: u32,
    ens: &SignalEnsemble,
    noise: &NoiseModel,
) -> Result<Vec<f64>, AdaptiveError> {
    assert!(n_max >= 1);
    if !ens.has_equal_priors() {
        return Err(AdaptiveError::UnequalPriors);
    }
    let n_max = n_max as usize;
    let mut out = Vec::with_capacity(n_max);
    // joint[k][last][ones]
    let mut joint = [
        [vec![0.0; n_max + 1], vec![0.0; n_max + 1]],
        [vec![0.0; n_max + 1], vec![0.0; n_max + 1]],
    ];
    let basis1 = markov_angle(1, None, ens)?;
    for k in 0..2u8 {
        let pr = outcome_prob(&basis1, k, ens, noise);
        joint[k as usize][0][0] = pr[0];
        joint[k as usize][1][1] = pr[1];
    }
    out.push(majority_success(&joint, 1, ens));
    for n in 2..=n_max {
        let bases = [
            markov_angle(n as u32, Some(0), ens)?,
            markov_angle(n as u32, Some(1), ens)?,
        ];
        for k in 0..2u8 {
            let mut next = [vec![0.0; n_max + 1], vec![0.0; n_max + 1]];
            for prev in 0..2usize {
                let pr = outcome_prob(&bases[prev], k, ens, noise);
                for ones in 0..n {
                    let w = joint[k as usize][prev][ones];
                    if w == 0.0 {
                        continue;
                    }
                    next[0][ones] += w * pr[0];
                    next[1][ones + 1] += w * pr[1];
                }
            }
            joint[k as usize] = next;
        }
        out.push(majority_success(&joint, n, ens));
    }
    Ok(out)
}

fn majority_success(
    joint: &[[Vec<f64>; 2]; 2],
    n: usize,
    ens: &SignalEnsemble,
) -> f64 {
    let mut total = 0.0;
    for k in 0..2usize {
        let mut succ = 0.0;
        for last in 0..2usize {
            for (ones, &w) in joint[k][last].iter().enumerate().take(n + 1) {
                if w == 0.0 {
                    continue;
                }
                let credit = match (2 * ones).cmp(&n) {
                    std::cmp::Ordering::Less => f64::from(k == 0),
                    std::cmp::Ordering::Greater => f64::from(k == 1),
                    std::cmp::Ordering::Equal => 0.5,
                };
                succ += w * credit;
            }
        }
        total += ens.prior(k as u8) * succ;
    }
    total
}

/// Exact success probability of the full-record Bayesian scheme: at each step
/// the measurement is the eigenbasis of `P(0|x) rho0 - P(1|x) rho1` with
/// mixed-state likelihood posteriors, and the decision is the final posterior.
/// Evaluated by enumerating all `2^N` outcome branches; `n_copies` must not
/// exceed [`BAYES_ENUMERATION_CAP`].
pub fn bayes_full_record(
    n_copies: u32,
    ens: &SignalEnsemble,
    noise: &NoiseModel,
) -> Result<f64, AdaptiveError> {
    assert!(n_copies >= 1);
    if n_copies > BAYES_ENUMERATION_CAP {
        return Err(AdaptiveError::EnumerationCapExceeded {
            n: n_copies,
            cap: BAYES_ENUMERATION_CAP,
        });
    }
    let rho = [ens.mixed_state(0, noise), ens.mixed_state(1, noise)];
    let priors = [ens.prior0(), ens.prior1()];
    let mut total = 0.0;
    // (depth, P(x|0), P(x|1))
    let mut stack = vec![(0u32, 1.0f64, 1.0f64)];
    while let Some((depth, l0, l1)) = stack.pop() {
        let w0 = priors[0] * l0;
        let w1 = priors[1] * l1;
        let norm = w0 + w1;
        if norm < 1e-300 {
            continue;
        }
        if depth == n_copies {
            total += w0.max(w1);
            continue;
        }
        let m: HelstromResult = helstrom::optimal_measurement(w0 / norm, &rho[0], &rho[1]);
        let pr0 = rho[0].outcome_probs(&m.basis);
        let pr1 = rho[1].outcome_probs(&m.basis);
        stack.push((depth + 1, l0 * pr0.0, l1 * pr1.0));
        stack.push((depth + 1, l0 * pr0.1, l1 * pr1.1));
    }
    Ok(total)
}

/// Full-record Bayesian success for every `1..=n_max` (all within the cap).
pub fn bayes_curve(
    n_max: u32,
    ens: &SignalEnsemble,
    noise: &NoiseModel,
) -> Result<Vec<f64>, AdaptiveError> {
    (1..=n_max)
        .map(|n| bayes_full_record(n, ens, noise))
        .collect()
}
