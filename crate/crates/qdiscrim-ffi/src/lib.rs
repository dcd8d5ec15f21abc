//! C ABI over the qdiscrim engine, for binding from other languages.
//!
//! Conventions:
//! - every fallible call returns a [`QdStatus`] and writes results through
//!   out-pointers, which are touched only on `QD_OK`;
//! - a scenario (signal angle, preparation fidelity, priors) is an opaque
//!   handle created by [`qd_scenario_new`] and released by
//!   [`qd_scenario_free`];
//! - schemes are addressed by the same stable tokens as the CLI
//!   (`adaptive`, `adaptive-majority`, `bayes`, `qdg`, `qdg-postselect`,
//!   `voting`, `helstrom-pure`);
//! - panics never cross the boundary; they surface as `QD_ERR_INTERNAL`.
//!
//! The matching header lives in `include/qdiscrim.h` (generated with
//! cbindgen; see `cbindgen.toml`).

use qdiscrim::adaptive::{self, AdaptiveError};
use qdiscrim::helstrom;
use qdiscrim::qdg::{self, QdgError};
use qdiscrim::sim::{self, Scheme, TrialPlan};
use qdiscrim::states::{NoiseModel, SignalEnsemble, StateError};
use qdiscrim::voting::{self, VotingError};
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result codes for every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QdStatus {
    /// Success; out-parameters are valid.
    QdOk = 0,
    /// A parameter is outside its documented domain.
    QdErrInvalidArgument = 1,
    /// The configuration makes the scheme ill-defined (theta = 0 with equal
    /// priors, or the non-commuting theta -> 0 / F -> 1 limit).
    QdErrDegenerate = 2,
    /// The route does not support this configuration (unequal priors for a
    /// collective scheme, enumeration cap exceeded, no sampler).
    QdErrUnsupported = 3,
    /// A required pointer was null.
    QdErrNullPointer = 4,
    /// Unexpected internal failure.
    QdErrInternal = 5,
}

/// Opaque discrimination scenario: signal pair, priors and noise.
pub struct QdScenario {
    ensemble: SignalEnsemble,
    noise: NoiseModel,
}

/// Monte Carlo estimate of a success probability.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QdEstimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub trials: u64,
}

fn status_of_state(err: &StateError) -> QdStatus {
    let _ = err;
    QdStatus::QdErrInvalidArgument
}

fn status_of_adaptive(err: &AdaptiveError) -> QdStatus {
    match err {
        AdaptiveError::DegenerateSignal | AdaptiveError::NonCommutingLimit => {
            QdStatus::QdErrDegenerate
        }
        AdaptiveError::UnequalPriors | AdaptiveError::EnumerationCapExceeded { .. } => {
            QdStatus::QdErrUnsupported
        }
    }
}

fn status_of_qdg(err: &QdgError) -> QdStatus {
    match err {
        QdgError::IllDefinedProtocol => QdStatus::QdErrDegenerate,
        QdgError::UnequalPriors => QdStatus::QdErrUnsupported,
    }
}

fn status_of_voting(err: &VotingError) -> QdStatus {
    match err {
        VotingError::UnequalPriors => QdStatus::QdErrUnsupported,
    }
}

fn status_of_sim(err: &sim::SimError) -> QdStatus {
    match err {
        sim::SimError::UnsupportedScheme(_) => QdStatus::QdErrUnsupported,
        sim::SimError::ZeroTrials => QdStatus::QdErrInvalidArgument,
        sim::SimError::Adaptive(e) => status_of_adaptive(e),
        sim::SimError::Qdg(e) => status_of_qdg(e),
        sim::SimError::Voting(e) => status_of_voting(e),
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn qd_status_message(status: QdStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        QdStatus::QdOk => b"ok\0",
        QdStatus::QdErrInvalidArgument => b"a parameter is outside its domain\0",
        QdStatus::QdErrDegenerate => b"the configuration makes the scheme ill-defined\0",
        QdStatus::QdErrUnsupported => b"the route does not support this configuration\0",
        QdStatus::QdErrNullPointer => b"a required pointer was null\0",
        QdStatus::QdErrInternal => b"internal failure\0",
    };
    msg.as_ptr().cast()
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn qd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Create a scenario handle. `theta` in radians within `[0, pi/4]`,
/// `fidelity` in `[1/2, 1]`, `prior0` in `[0, 1]`.
///
/// # Safety
/// `out` must be a valid pointer; on `QD_OK` it receives a handle that must
/// be released with [`qd_scenario_free`].
#[no_mangle]
pub unsafe extern "C" fn qd_scenario_new(
    theta: f64,
    fidelity: f64,
    prior0: f64,
    out: *mut *mut QdScenario,
) -> QdStatus {
    if out.is_null() {
        return QdStatus::QdErrNullPointer;
    }
    let ensemble = match SignalEnsemble::new(theta, prior0) {
        Ok(e) => e,
        Err(e) => return status_of_state(&e),
    };
    let noise = match NoiseModel::new(fidelity) {
        Ok(n) => n,
        Err(e) => return status_of_state(&e),
    };
    let handle = Box::new(QdScenario { ensemble, noise });
    unsafe { out.write(Box::into_raw(handle)) };
    QdStatus::QdOk
}

/// Release a scenario handle. Null is ignored.
///
/// # Safety
/// `scenario` must be null or a pointer previously returned by
/// [`qd_scenario_new`] that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn qd_scenario_free(scenario: *mut QdScenario) {
    if !scenario.is_null() {
        drop(unsafe { Box::from_raw(scenario) });
    }
}

unsafe fn with_scenario<F>(
    scenario: *const QdScenario,
    out: *mut f64,
    eval: F,
) -> QdStatus
where
    F: FnOnce(&QdScenario) -> Result<f64, QdStatus>,
{
    if scenario.is_null() || out.is_null() {
        return QdStatus::QdErrNullPointer;
    }
    let scenario = unsafe { &*scenario };
    match catch_unwind(AssertUnwindSafe(|| eval(scenario))) {
        Ok(Ok(value)) => {
            unsafe { out.write(value) };
            QdStatus::QdOk
        }
        Ok(Err(status)) => status,
        Err(_) => QdStatus::QdErrInternal,
    }
}

fn scheme_success(s: &QdScenario, scheme: Scheme, n: u32) -> Result<f64, QdStatus> {
    if n == 0 {
        return Err(QdStatus::QdErrInvalidArgument);
    }
    match scheme {
        Scheme::Adaptive => {
            adaptive::success_dp(n, &s.ensemble, &s.noise).map_err(|e| status_of_adaptive(&e))
        }
        Scheme::AdaptiveMajority => adaptive::record_majority_dp(n, &s.ensemble, &s.noise)
            .map_err(|e| status_of_adaptive(&e)),
        Scheme::Bayes => adaptive::bayes_full_record(n, &s.ensemble, &s.noise)
            .map_err(|e| status_of_adaptive(&e)),
        Scheme::Qdg => {
            qdg::oracle_success(n, &s.ensemble, &s.noise).map_err(|e| status_of_qdg(&e))
        }
        Scheme::Voting => voting::per_copy_q(&s.ensemble, &s.noise)
            .map(|q| voting::majority_prob(&voting::VoteConfig::new(n, q)))
            .map_err(|e| status_of_voting(&e)),
        Scheme::HelstromPure => {
            helstrom::bound_pure_multi(&s.ensemble, n).map_err(|_| QdStatus::QdErrInvalidArgument)
        }
        Scheme::QdgPostselect => Err(QdStatus::QdErrUnsupported),
    }
}

unsafe fn parse_scheme(token: *const c_char) -> Result<Scheme, QdStatus> {
    if token.is_null() {
        return Err(QdStatus::QdErrNullPointer);
    }
    let token = unsafe { CStr::from_ptr(token) };
    token
        .to_str()
        .map_err(|_| QdStatus::QdErrInvalidArgument)?
        .parse()
        .map_err(|_| QdStatus::QdErrInvalidArgument)
}

/// Exact success probability of the local-adaptive scheme (decision on the
/// final outcome) with `n` copies.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qd_adaptive_success(
    scenario: *const QdScenario,
    n: u32,
    out: *mut f64,
) -> QdStatus {
    unsafe { with_scenario(scenario, out, |s| scheme_success(s, Scheme::Adaptive, n)) }
}

/// Exact success probability of the record-majority adaptive variant.
///
/// # Safety
/// As for [`qd_adaptive_success`].
#[no_mangle]
pub unsafe extern "C" fn qd_adaptive_majority_success(
    scenario: *const QdScenario,
    n: u32,
    out: *mut f64,
) -> QdStatus {
    unsafe {
        with_scenario(scenario, out, |s| {
            scheme_success(s, Scheme::AdaptiveMajority, n)
        })
    }
}

/// Exact success probability of the full-record Bayesian scheme
/// (enumeration-capped; large `n` returns `QD_ERR_UNSUPPORTED`).
///
/// # Safety
/// As for [`qd_adaptive_success`].
#[no_mangle]
pub unsafe extern "C" fn qd_bayes_success(
    scenario: *const QdScenario,
    n: u32,
    out: *mut f64,
) -> QdStatus {
    unsafe { with_scenario(scenario, out, |s| scheme_success(s, Scheme::Bayes, n)) }
}

/// Exact success probability of quantum data gathering (oracle route).
///
/// # Safety
/// As for [`qd_adaptive_success`].
#[no_mangle]
pub unsafe extern "C" fn qd_qdg_success(
    scenario: *const QdScenario,
    n: u32,
    out: *mut f64,
) -> QdStatus {
    unsafe { with_scenario(scenario, out, |s| scheme_success(s, Scheme::Qdg, n)) }
}

/// Exact success probability of fixed-measurement majority voting.
///
/// # Safety
/// As for [`qd_adaptive_success`].
#[no_mangle]
pub unsafe extern "C" fn qd_voting_success(
    scenario: *const QdScenario,
    n: u32,
    out: *mut f64,
) -> QdStatus {
    unsafe { with_scenario(scenario, out, |s| scheme_success(s, Scheme::Voting, n)) }
}

/// The `n`-copy Helstrom bound for the underlying pure states.
///
/// # Safety
/// As for [`qd_adaptive_success`].
#[no_mangle]
pub unsafe extern "C" fn qd_helstrom_pure_bound(
    scenario: *const QdScenario,
    n: u32,
    out: *mut f64,
) -> QdStatus {
    unsafe { with_scenario(scenario, out, |s| scheme_success(s, Scheme::HelstromPure, n)) }
}

/// The common many-copy success limit of the adaptive and data-gathering
/// schemes. Degenerate at theta = 0 with F = 1.
///
/// # Safety
/// As for [`qd_adaptive_success`].
#[no_mangle]
pub unsafe extern "C" fn qd_asymptotic_limit(
    scenario: *const QdScenario,
    out: *mut f64,
) -> QdStatus {
    unsafe {
        with_scenario(scenario, out, |s| {
            adaptive::asymptotic_limit(s.ensemble.theta(), &s.noise)
                .map_err(|e| status_of_adaptive(&e))
        })
    }
}

/// Classical Chernoff exponent (nats per copy) of the majority-voting error,
/// `+inf` when the per-copy measurement is perfect.
///
/// # Safety
/// As for [`qd_adaptive_success`].
#[no_mangle]
pub unsafe extern "C" fn qd_chernoff_exponent(
    scenario: *const QdScenario,
    out: *mut f64,
) -> QdStatus {
    unsafe {
        with_scenario(scenario, out, |s| {
            voting::per_copy_q(&s.ensemble, &s.noise)
                .map(voting::chernoff_exponent)
                .map_err(|e| status_of_voting(&e))
        })
    }
}

/// Fill `out_success[0..n_max]` with the exact success probabilities of the
/// scheme named by `scheme_token` for `N = 1..=n_max`. `len` is the capacity
/// of `out_success` and must be at least `n_max`.
///
/// # Safety
/// `scenario` must be a live handle, `scheme_token` a NUL-terminated string,
/// and `out_success` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn qd_scheme_curve(
    scenario: *const QdScenario,
    scheme_token: *const c_char,
    n_max: u32,
    out_success: *mut f64,
    len: usize,
) -> QdStatus {
    if scenario.is_null() || out_success.is_null() {
        return QdStatus::QdErrNullPointer;
    }
    if n_max == 0 || (len as u64) < u64::from(n_max) {
        return QdStatus::QdErrInvalidArgument;
    }
    let scheme = match unsafe { parse_scheme(scheme_token) } {
        Ok(s) => s,
        Err(status) => return status,
    };
    let s = unsafe { &*scenario };
    let result = catch_unwind(AssertUnwindSafe(|| -> Result<Vec<f64>, QdStatus> {
        match scheme {
            Scheme::Adaptive => adaptive::success_dp_curve(n_max, &s.ensemble, &s.noise)
                .map_err(|e| status_of_adaptive(&e)),
            Scheme::AdaptiveMajority => {
                adaptive::record_majority_curve(n_max, &s.ensemble, &s.noise)
                    .map_err(|e| status_of_adaptive(&e))
            }
            Scheme::Bayes => adaptive::bayes_curve(n_max, &s.ensemble, &s.noise)
                .map_err(|e| status_of_adaptive(&e)),
            Scheme::Qdg => qdg::oracle_success_curve(n_max, &s.ensemble, &s.noise)
                .map_err(|e| status_of_qdg(&e)),
            _ => (1..=n_max)
                .map(|n| scheme_success(s, scheme, n))
                .collect::<Result<Vec<f64>, QdStatus>>(),
        }
    }));
    match result {
        Ok(Ok(values)) => {
            for (i, v) in values.iter().enumerate() {
                unsafe { out_success.add(i).write(*v) };
            }
            QdStatus::QdOk
        }
        Ok(Err(status)) => status,
        Err(_) => QdStatus::QdErrInternal,
    }
}

/// Seeded Monte Carlo estimate for the scheme named by `scheme_token`.
/// Identical (seed, trials) produce identical estimates for any `workers`.
///
/// # Safety
/// `scenario` must be a live handle, `scheme_token` a NUL-terminated string,
/// and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qd_mc_estimate(
    scenario: *const QdScenario,
    scheme_token: *const c_char,
    n: u32,
    trials: u64,
    seed: u64,
    workers: u32,
    out: *mut QdEstimate,
) -> QdStatus {
    if scenario.is_null() || out.is_null() {
        return QdStatus::QdErrNullPointer;
    }
    if n == 0 {
        return QdStatus::QdErrInvalidArgument;
    }
    let scheme = match unsafe { parse_scheme(scheme_token) } {
        Ok(s) => s,
        Err(status) => return status,
    };
    let s = unsafe { &*scenario };
    let plan = TrialPlan {
        scheme,
        ensemble: s.ensemble,
        noise: s.noise,
        n_copies: n,
        trials,
        seed,
        workers: workers as usize,
    };
    match catch_unwind(AssertUnwindSafe(|| sim::run(&plan))) {
        Ok(Ok(est)) => {
            unsafe {
                out.write(QdEstimate {
                    p_hat: est.p_hat,
                    std_err: est.std_err,
                    trials: est.trials,
                })
            };
            QdStatus::QdOk
        }
        Ok(Err(e)) => status_of_sim(&e),
        Err(_) => QdStatus::QdErrInternal,
    }
}
