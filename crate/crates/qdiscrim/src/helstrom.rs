//! Helstrom (minimum-error) bounds and optimal projective measurements for
//! pairs of qubit states.
//!
//! The 2x2 eigenproblem is solved in closed form, so no linear-algebra
//! dependency is needed.

use crate::states::{Density2, MeasBasis, SignalEnsemble};
use thiserror::Error;

/// Degeneracy threshold for the weighted difference operator.
const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum HelstromError {
    #[error("n_copies must be at least 1")]
    ZeroCopies,
}

/// Result of the two-state minimum-error measurement.
#[derive(Debug, Clone, Copy)]
pub struct HelstromResult {
    pub p_success: f64,
    pub basis: MeasBasis,
    /// `outcome_map[i]` is the hypothesis guessed when outcome `i` fires.
    /// Outcome 0 is the eigenvector with the larger eigenvalue of
    /// `p0 rho0 - p1 rho1`; nonnegative eigenvalues map to hypothesis 0.
    pub outcome_map: [u8; 2],
    /// Set when the weighted difference operator vanishes and the basis is
    /// arbitrary; `p_success` is then `max(p0, p1)`.
    pub degenerate: bool,
}

/// Single-copy Helstrom bound for the pure signal pair,
/// `(1 + sqrt(1 - 4 p0 p1 cos^2 2theta))/2`.
pub fn bound_pure_single(ens: &SignalEnsemble) -> f64 {
    bound_pure_multi(ens, 1).expect("n_copies = 1")
}

/// N-copy Helstrom bound for the pure signal pair,
/// `(1 + sqrt(1 - 4 p0 p1 cos^(2N) 2theta))/2`.
pub fn bound_pure_multi(ens: &SignalEnsemble, n_copies: u32) -> Result<f64, HelstromError> {
    if n_copies == 0 {
        return Err(HelstromError::ZeroCopies);
    }
    let u = 4.0 * ens.prior0() * ens.prior1();
    let c = ens.overlap().powi(2);
    let inner = 1.0 - u * c.powi(n_copies as i32);
    Ok(0.5 * (1.0 + inner.max(0.0).sqrt()))
}

/// Optimal projective measurement to discriminate `rho0` (prior `p0`) from
/// `rho1` (prior `1 - p0`): the eigenbasis of `p0 rho0 - p1 rho1`, with
/// success `(1 + |lambda_+| + |lambda_-|)/2`.
pub fn optimal_measurement(p0: f64, rho0: &Density2, rho1: &Density2) -> HelstromResult {
    assert!((0.0..=1.0).contains(&p0), "prior out of range: {p0}");
    let p1 = 1.0 - p0;
    // Gamma = p0 rho0 - p1 rho1, decomposed as (d I + dx sigma_x + dz sigma_z)/2.
    let d = p0 - p1;
    let (x0, z0) = rho0.bloch();
    let (x1, z1) = rho1.bloch();
    let dx = p0 * x0 - p1 * x1;
    let dz = p0 * z0 - p1 * z1;
    let r = (dx * dx + dz * dz).sqrt();
    let lambda_plus = 0.5 * (d + r);
    let lambda_minus = 0.5 * (d - r);
    let p_success = 0.5 * (1.0 + lambda_plus.abs() + lambda_minus.abs());
    let degenerate = r < DEGENERACY_TOL;
    let basis = if degenerate {
        MeasBasis::new(0.0)
    } else {
        // |w0> at Bloch direction (dz, dx): cos 2phi = dz/r, sin 2phi = dx/r.
        MeasBasis::new(0.5 * dx.atan2(dz))
    };
    let guess = |lambda: f64| u8::from(lambda < 0.0);
    HelstromResult {
        p_success,
        basis,
        outcome_map: [guess(lambda_plus), guess(lambda_minus)],
        degenerate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::NoiseModel;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    const TOL: f64 = 1e-12;

    #[test]
    fn orthogonal_states_discriminate_perfectly() {
        for p0 in [0.2, 0.5, 0.9] {
            let ens = SignalEnsemble::new(FRAC_PI_4, p0).unwrap();
            assert!((bound_pure_single(&ens) - 1.0).abs() < TOL);
        }
    }

    #[test]
    fn identical_states_guess_the_likelier() {
        let ens = SignalEnsemble::new(0.0, 0.7).unwrap();
        assert!((bound_pure_single(&ens) - 0.7).abs() < TOL);
    }

    // Frozen from the trace-norm eigen-solve: (1 + sqrt(3)/2)/2.
    #[test]
    fn single_copy_spot_value() {
        let ens = SignalEnsemble::equal_priors(FRAC_PI_6).unwrap();
        assert!((bound_pure_single(&ens) - 0.933_012_701_892_219_3).abs() < 1e-12);
    }

    #[test]
    fn multi_copy_reduces_to_single_at_one() {
        let ens = SignalEnsemble::new(0.3, 0.6).unwrap();
        assert!((bound_pure_multi(&ens, 1).unwrap() - bound_pure_single(&ens)).abs() < TOL);
    }

    // 8x8 trace-norm oracle on |psi_k>^x3: for equal priors the two nonzero
    // eigenvalues of Delta are +/- sqrt(tr(Delta^2)/2), so the bound is
    // (1 + sqrt(2 tr(Delta^2)))/2. tr(Delta^2) is accumulated entrywise from
    // the explicit 8x8 matrix.
    #[test]
    fn multi_copy_three_matches_trace_norm_oracle() {
        let ens = SignalEnsemble::equal_priors(FRAC_PI_6).unwrap();
        let psi = [ens.pure_state(0), ens.pure_state(1)];
        let mut kron = [[0.0f64; 8]; 2];
        for (k, v) in psi.iter().enumerate() {
            let amps = [v.amp0, v.amp1];
            for i in 0..8 {
                kron[k][i] = amps[i >> 2 & 1] * amps[i >> 1 & 1] * amps[i & 1];
            }
        }
        let mut trace_sq = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                let delta_ij =
                    0.5 * kron[0][i] * kron[0][j] - 0.5 * kron[1][i] * kron[1][j];
                trace_sq += delta_ij * delta_ij;
            }
        }
        let oracle = 0.5 * (1.0 + (2.0 * trace_sq).sqrt());
        let got = bound_pure_multi(&ens, 3).unwrap();
        assert!((got - oracle).abs() < 1e-12);
        assert!((got - 0.996_078_370_824_610_8).abs() < 1e-12);
    }

    #[test]
    fn multi_copy_converges_to_one() {
        let ens = SignalEnsemble::equal_priors(FRAC_PI_6).unwrap();
        assert!((bound_pure_multi(&ens, 200).unwrap() - 1.0).abs() < TOL);
    }

    #[test]
    fn rejects_zero_copies() {
        let ens = SignalEnsemble::equal_priors(FRAC_PI_6).unwrap();
        assert_eq!(bound_pure_multi(&ens, 0), Err(HelstromError::ZeroCopies));
    }

    #[test]
    fn pure_states_equal_priors_match_single_copy_bound() {
        for theta in [0.1, FRAC_PI_6, 0.6] {
            let ens = SignalEnsemble::equal_priors(theta).unwrap();
            let r = optimal_measurement(
                0.5,
                &ens.pure_state(0).projector(),
                &ens.pure_state(1).projector(),
            );
            assert!((r.p_success - bound_pure_single(&ens)).abs() < TOL);
            assert!(!r.degenerate);
        }
    }

    #[test]
    fn indistinguishable_states_are_degenerate() {
        let mm = Density2::maximally_mixed();
        let r = optimal_measurement(0.5, &mm, &mm);
        assert!(r.degenerate);
        assert!((r.p_success - 0.5).abs() < TOL);
        assert_eq!(r.outcome_map, [0, 0]);

        let r = optimal_measurement(0.3, &mm, &mm);
        assert!(r.degenerate);
        assert!((r.p_success - 0.7).abs() < TOL);
        assert_eq!(r.outcome_map, [1, 1]);
    }

    // Eigen-solve spot value: equal priors, mixed states; the optimal basis
    // is unbiased (phi = pi/4) and the success is (1 + (2F-1) sin 2theta)/2.
    #[test]
    fn mixed_state_spot_value() {
        let ens = SignalEnsemble::equal_priors(FRAC_PI_6).unwrap();
        let noise = NoiseModel::new(0.95).unwrap();
        let r = optimal_measurement(
            0.5,
            &ens.mixed_state(0, &noise),
            &ens.mixed_state(1, &noise),
        );
        assert!((r.p_success - 0.889_711_431_702_997_4).abs() < 1e-12);
        assert!((r.basis.phi() - FRAC_PI_4).abs() < 1e-12);
        assert_eq!(r.outcome_map, [0, 1]);
    }

    // Equal priors: the optimal basis for the noisy pair does not depend on F.
    #[test]
    fn mixed_state_basis_independent_of_fidelity() {
        let ens = SignalEnsemble::equal_priors(FRAC_PI_6).unwrap();
        let mut phis = vec![];
        for f in [0.6, 0.8, 0.95, 0.999] {
            let noise = NoiseModel::new(f).unwrap();
            let r = optimal_measurement(
                0.5,
                &ens.mixed_state(0, &noise),
                &ens.mixed_state(1, &noise),
            );
            phis.push(r.basis.phi());
        }
        for w in phis.windows(2) {
            assert!((w[0] - w[1]).abs() < TOL);
        }
    }

    #[test]
    fn bound_nondecreasing_in_copies_and_angle() {
        let thetas = [0.0, 0.1, 0.2, 0.4, 0.6, FRAC_PI_4];
        for w in thetas.windows(2) {
            let lo = SignalEnsemble::equal_priors(w[0]).unwrap();
            let hi = SignalEnsemble::equal_priors(w[1]).unwrap();
            for n in [1u32, 2, 5, 20] {
                assert!(
                    bound_pure_multi(&hi, n).unwrap() >= bound_pure_multi(&lo, n).unwrap() - TOL
                );
                assert!(
                    bound_pure_multi(&lo, n + 1).unwrap()
                        >= bound_pure_multi(&lo, n).unwrap() - TOL
                );
            }
        }
    }

    fn fixed_basis_best_success(
        p0: f64,
        rho0: &Density2,
        rho1: &Density2,
        basis: &MeasBasis,
    ) -> f64 {
        let a = rho0.outcome_probs(basis);
        let b = rho1.outcome_probs(basis);
        (p0 * a.0).max((1.0 - p0) * b.0) + (p0 * a.1).max((1.0 - p0) * b.1)
    }

    proptest! {
        // Optimality against random projective bases.
        #[test]
        fn dominates_random_bases(
            theta in 0.0..FRAC_PI_4,
            fidelity in 0.5..1.0,
            p0 in 0.0..1.0,
            seed in 0u64..1000,
        ) {
            let ens = SignalEnsemble::equal_priors(theta).unwrap();
            let noise = NoiseModel::new(fidelity).unwrap();
            let rho0 = ens.mixed_state(0, &noise);
            let rho1 = ens.mixed_state(1, &noise);
            let best = optimal_measurement(p0, &rho0, &rho1).p_success;
            let mut phi = seed as f64;
            for _ in 0..64 {
                phi = (phi * 1.618_033_988_749_895 + 0.382).rem_euclid(std::f64::consts::PI);
                let s = fixed_basis_best_success(p0, &rho0, &rho1, &MeasBasis::new(phi));
                prop_assert!(best >= s - 1e-12);
            }
        }

        #[test]
        fn success_bounded_by_priors(
            theta in 0.0..FRAC_PI_4,
            fidelity in 0.5..1.0,
            p0 in 0.0..1.0,
        ) {
            let ens = SignalEnsemble::equal_priors(theta).unwrap();
            let noise = NoiseModel::new(fidelity).unwrap();
            let r = optimal_measurement(
                p0,
                &ens.mixed_state(0, &noise),
                &ens.mixed_state(1, &noise),
            );
            prop_assert!(r.p_success >= p0.max(1.0 - p0) - 1e-12);
            prop_assert!(r.p_success <= 1.0 + 1e-12);
        }
    }
}
