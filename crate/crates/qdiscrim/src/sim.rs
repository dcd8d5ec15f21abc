//! Seeded Monte Carlo engine: samples full measurement trajectories for every
//! scheme and reports binomial estimates.
//!
//! Reproducibility contract: a [`TrialPlan`] determines the result bit for
//! bit, independent of the worker count. Trials are grouped into fixed-size
//! batches; batch `i` draws from ChaCha substream `i` of the plan seed, and
//! the merge is a sum of per-batch success counts, so any parallel schedule
//! produces the same aggregate.

use crate::adaptive::{self, AdaptiveError};
use crate::helstrom;
use crate::qdg::{self, QdgError};
use crate::states::{Density2, NoiseModel, SignalEnsemble};
use crate::voting::{self, VotingError};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const TRIALS_PER_BATCH: u64 = 8192;

/// Copies granted to a post-selected run, as a multiple of the chain length.
pub const POSTSELECT_BUDGET_FACTOR: u32 = 4;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("scheme `{0}` has no Monte Carlo sampler")]
    UnsupportedScheme(Scheme),
    #[error("trials must be at least 1")]
    ZeroTrials,
    #[error(transparent)]
    Adaptive(#[from] AdaptiveError),
    #[error(transparent)]
    Qdg(#[from] QdgError),
    #[error(transparent)]
    Voting(#[from] VotingError),
}

/// Stable scheme identifiers, shared by the CLI, the Monte Carlo engine and
/// every output file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Adaptive,
    AdaptiveMajority,
    Bayes,
    Qdg,
    QdgPostselect,
    Voting,
    HelstromPure,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::Adaptive,
        Scheme::AdaptiveMajority,
        Scheme::Bayes,
        Scheme::Qdg,
        Scheme::QdgPostselect,
        Scheme::Voting,
        Scheme::HelstromPure,
    ];

    pub fn token(&self) -> &'static str {
        match self {
            Scheme::Adaptive => "adaptive",
            Scheme::AdaptiveMajority => "adaptive-majority",
            Scheme::Bayes => "bayes",
            Scheme::Qdg => "qdg",
            Scheme::QdgPostselect => "qdg-postselect",
            Scheme::Voting => "voting",
            Scheme::HelstromPure => "helstrom-pure",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::ALL
            .iter()
            .find(|sch| sch.token() == s)
            .copied()
            .ok_or_else(|| {
                let valid: Vec<_> = Scheme::ALL.iter().map(Scheme::token).collect();
                format!("unknown scheme `{s}` (valid: {})", valid.join(", "))
            })
    }
}

/// Everything that determines a Monte Carlo result.
#[derive(Debug, Clone, Copy)]
pub struct TrialPlan {
    pub scheme: Scheme,
    pub ensemble: SignalEnsemble,
    pub noise: NoiseModel,
    pub n_copies: u32,
    pub trials: u64,
    pub seed: u64,
    /// Worker threads; 0 uses the default pool. Has no effect on the result.
    pub workers: usize,
}

/// Binomial estimate of a success probability.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Estimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub trials: u64,
}

/// Pass/fail comparison of an estimate against an exact reference.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Verdict {
    pub z: f64,
    pub pass: bool,
}

/// `z = (p_hat - reference)/std_err`, passing when `|z| <= k_sigma`.
pub fn compare(est: &Estimate, reference: f64, k_sigma: f64) -> Verdict {
    assert!(k_sigma > 0.0);
    let z = if est.std_err > 0.0 {
        (est.p_hat - reference) / est.std_err
    } else if est.p_hat == reference {
        0.0
    } else {
        f64::INFINITY
    };
    Verdict {
        z,
        pass: z.abs() <= k_sigma,
    }
}

/// Run the plan and return the success-rate estimate.
pub fn run(plan: &TrialPlan) -> Result<Estimate, SimError> {
    if plan.trials == 0 {
        return Err(SimError::ZeroTrials);
    }
    let sampler = Sampler::prepare(plan)?;
    let batches = plan.trials.div_ceil(TRIALS_PER_BATCH);
    let count_batch = |batch: u64| -> u64 {
        let lo = batch * TRIALS_PER_BATCH;
        let hi = (lo + TRIALS_PER_BATCH).min(plan.trials);
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
        rng.set_stream(batch);
        let mut wins = 0u64;
        for _ in lo..hi {
            wins += u64::from(sampler.sample(&mut rng));
        }
        wins
    };
    let successes: u64 = if plan.workers == 1 {
        (0..batches).map(count_batch).sum()
    } else if plan.workers == 0 {
        (0..batches).into_par_iter().map(count_batch).sum()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(plan.workers)
            .build()
            .expect("thread pool");
        pool.install(|| (0..batches).into_par_iter().map(count_batch).sum())
    };
    let p_hat = successes as f64 / plan.trials as f64;
    Ok(Estimate {
        p_hat,
        std_err: (p_hat * (1.0 - p_hat) / plan.trials as f64).sqrt(),
        trials: plan.trials,
    })
}

/// Exact reference value for a plan, where an exact route exists.
pub fn exact_reference(plan: &TrialPlan) -> Option<f64> {
    let (e, nm, n) = (&plan.ensemble, &plan.noise, plan.n_copies);
    match plan.scheme {
        Scheme::Adaptive => adaptive::success_dp(n, e, nm).ok(),
        Scheme::AdaptiveMajority => adaptive::record_majority_dp(n, e, nm).ok(),
        Scheme::Bayes => adaptive::bayes_full_record(n, e, nm).ok(),
        Scheme::Qdg => qdg::oracle_success(n, e, nm).ok(),
        Scheme::Voting => voting::per_copy_q(e, nm)
            .map(|q| voting::majority_prob(&voting::VoteConfig::new(n, q)))
            .ok(),
        Scheme::QdgPostselect | Scheme::HelstromPure => None,
    }
}

enum Sampler {
    /// Precomputed P(outcome 0 | step, prev, k) tables for the Markov chain;
    /// the decision is the final outcome or the record majority.
    Chain {
        p_first: [f64; 2],
        p_zero: Vec<[[f64; 2]; 2]>,
        prior1: f64,
        n: u32,
        majority: bool,
    },
    Bayes {
        rho: [Density2; 2],
        prior0: f64,
        n: u32,
    },
    QdgTrajectory {
        ensemble: SignalEnsemble,
        noise: NoiseModel,
        n: u32,
        postselect: bool,
    },
    Voting {
        q: f64,
        n: u32,
    },
}

impl Sampler {
    fn prepare(plan: &TrialPlan) -> Result<Self, SimError> {
        let e = plan.ensemble;
        let nm = plan.noise;
        let n = plan.n_copies;
        assert!(n >= 1);
        match plan.scheme {
            Scheme::Adaptive | Scheme::AdaptiveMajority => {
                let basis1 = adaptive::markov_angle(1, None, &e)?;
                let p_first = [
                    adaptive::outcome_prob(&basis1, 0, &e, &nm)[0],
                    adaptive::outcome_prob(&basis1, 1, &e, &nm)[0],
                ];
                let mut p_zero = Vec::with_capacity(n.saturating_sub(1) as usize);
                for step in 2..=n {
                    let mut table = [[0.0; 2]; 2];
                    for prev in 0..2u8 {
                        let basis = adaptive::markov_angle(step, Some(prev), &e)?;
                        for k in 0..2u8 {
                            table[prev as usize][k as usize] =
                                adaptive::outcome_prob(&basis, k, &e, &nm)[0];
                        }
                    }
                    p_zero.push(table);
                }
                Ok(Sampler::Chain {
                    p_first,
                    p_zero,
                    prior1: e.prior1(),
                    n,
                    majority: plan.scheme == Scheme::AdaptiveMajority,
                })
            }
            Scheme::Bayes => Ok(Sampler::Bayes {
                rho: [e.mixed_state(0, &nm), e.mixed_state(1, &nm)],
                prior0: e.prior0(),
                n,
            }),
            Scheme::Qdg | Scheme::QdgPostselect => {
                if !e.has_equal_priors() {
                    return Err(QdgError::UnequalPriors.into());
                }
                if n >= 2 {
                    qdg::build_unitary(2, e.theta())?;
                }
                Ok(Sampler::QdgTrajectory {
                    ensemble: e,
                    noise: nm,
                    n,
                    postselect: plan.scheme == Scheme::QdgPostselect,
                })
            }
            Scheme::Voting => {
                let q = voting::per_copy_q(&e, &nm)?;
                Ok(Sampler::Voting { q, n })
            }
            Scheme::HelstromPure => Err(SimError::UnsupportedScheme(plan.scheme)),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> bool {
        match self {
            Sampler::Chain {
                p_first,
                p_zero,
                prior1,
                n,
                majority,
            } => {
                let k = u8::from(rng.random_bool(*prior1));
                let mut outcome = u8::from(rng.random::<f64>() >= p_first[k as usize]);
                let mut ones = u32::from(outcome);
                for table in p_zero.iter().take(*n as usize - 1) {
                    let p0 = table[outcome as usize][k as usize];
                    outcome = u8::from(rng.random::<f64>() >= p0);
                    ones += u32::from(outcome);
                }
                if *majority {
                    let guess = match (2 * ones).cmp(n) {
                        std::cmp::Ordering::Greater => 1,
                        std::cmp::Ordering::Less => 0,
                        std::cmp::Ordering::Equal => u8::from(rng.random::<f64>() < 0.5),
                    };
                    guess == k
                } else {
                    outcome == k
                }
            }
            Sampler::Bayes { rho, prior0, n } => {
                let k = u8::from(rng.random_bool(1.0 - prior0));
                let mut post0 = *prior0;
                for _ in 0..*n {
                    let m = helstrom::optimal_measurement(post0, &rho[0], &rho[1]);
                    let pr_true = rho[k as usize].outcome_probs(&m.basis);
                    let outcome = rng.random::<f64>() >= pr_true.0;
                    let pr0 = rho[0].outcome_probs(&m.basis);
                    let pr1 = rho[1].outcome_probs(&m.basis);
                    let (l0, l1) = if outcome {
                        (pr0.1, pr1.1)
                    } else {
                        (pr0.0, pr1.0)
                    };
                    let w0 = post0 * l0;
                    let w1 = (1.0 - post0) * l1;
                    post0 = w0 / (w0 + w1);
                }
                let guess = u8::from(post0 < 0.5);
                guess == k
            }
            Sampler::QdgTrajectory {
                ensemble,
                noise,
                n,
                postselect,
            } => {
                if *postselect {
                    return qdg::postselect_run(
                        *n,
                        ensemble,
                        noise,
                        POSTSELECT_BUDGET_FACTOR * n,
                        rng,
                    )
                    .expect("preconditions checked in prepare")
                    .success;
                }
                let k = u8::from(rng.random_bool(0.5));
                let mut probe = ensemble.mixed_state(k, noise);
                for step in 2..=*n {
                    let joint = qdg::oracle_step_pretrace(&probe, step, ensemble, k, noise)
                        .expect("theta checked in prepare");
                    let p_bad = joint.resource_outcome_probs()[1];
                    let s = u8::from(rng.random::<f64>() < p_bad);
                    probe = match joint.conditional_probe(s) {
                        Some((rho, _)) => rho,
                        None => joint.probe_marginal(),
                    };
                }
                let half = 0.5_f64.sqrt();
                let omega_k = crate::states::PureState2 {
                    amp0: half,
                    amp1: if k == 0 { half } else { -half },
                };
                rng.random::<f64>() < probe.expectation(&omega_k)
            }
            Sampler::Voting { q, n } => {
                // each copy's outcome matches the prepared hypothesis w.p. q
                let mut correct = 0u32;
                for _ in 0..*n {
                    correct += u32::from(rng.random::<f64>() < *q);
                }
                match (2 * correct).cmp(n) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Less => false,
                    std::cmp::Ordering::Equal => rng.random::<f64>() < 0.5,
                }
            }
        }
    }
}
