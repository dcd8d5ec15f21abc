//! Core algebra for qubit states confined to a single great circle of the
//! Bloch sphere: real-amplitude pure states, preparation-noise mixed states,
//! projective bases and 2x2 density-matrix utilities.
//!
//! Everything here is real: the two signal states and every state reachable
//! from them by great-circle noise have real amplitudes in the computational
//! basis, so complex arithmetic is never needed.

use thiserror::Error;

/// Absolute tolerance for normalisation, trace and positivity checks.
pub const STATE_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("theta must lie in [0, pi/4], got {0}")]
    ThetaOutOfRange(f64),
    #[error("prior must lie in [0, 1], got {0}")]
    PriorOutOfRange(f64),
    #[error("fidelity must lie in [1/2, 1], got {0}")]
    FidelityOutOfRange(f64),
    #[error("state ({0}, {1}) is not normalised")]
    NotNormalised(f64, f64),
    #[error("matrix is not a valid density operator: trace {trace}, min eigenvalue bound {min_eig}")]
    NotDensity { trace: f64, min_eig: f64 },
}

/// The signal pair: two pure states `cos(theta)|0> +/- sin(theta)|1>` prepared
/// with priors `p0`, `p1 = 1 - p0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalEnsemble {
    theta: f64,
    prior0: f64,
}

impl SignalEnsemble {
    /// `theta` in radians, `0 <= theta <= pi/4`; `prior0` in `[0, 1]`.
    pub fn new(theta: f64, prior0: f64) -> Result<Self, StateError> {
        if !(0.0..=std::f64::consts::FRAC_PI_4 + STATE_TOL).contains(&theta) {
            return Err(StateError::ThetaOutOfRange(theta));
        }
        if !(0.0..=1.0).contains(&prior0) {
            return Err(StateError::PriorOutOfRange(prior0));
        }
        Ok(Self { theta, prior0 })
    }

    /// Equal-prior ensemble at separation `theta`.
    pub fn equal_priors(theta: f64) -> Result<Self, StateError> {
        Self::new(theta, 0.5)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn prior0(&self) -> f64 {
        self.prior0
    }

    pub fn prior1(&self) -> f64 {
        1.0 - self.prior0
    }

    pub fn prior(&self, k: u8) -> f64 {
        if k == 0 {
            self.prior0()
        } else {
            self.prior1()
        }
    }

    pub fn has_equal_priors(&self) -> bool {
        (self.prior0 - 0.5).abs() < STATE_TOL
    }

    /// Overlap of the two signal states, `cos(2 theta)`.
    pub fn overlap(&self) -> f64 {
        (2.0 * self.theta).cos()
    }

    /// Signal state `|psi_k> = cos(theta)|0> + (-1)^k sin(theta)|1>`.
    pub fn pure_state(&self, k: u8) -> PureState2 {
        assert!(k <= 1);
        PureState2 {
            amp0: self.theta.cos(),
            amp1: sign(k) * self.theta.sin(),
        }
    }

    /// Orthogonal companion `|psi_k_perp>`, with the sign fixed so that
    /// `|psi~_k> = cos(d)|psi_k> - sin(d)|psi_k_perp>` holds verbatim for a
    /// displaced preparation at angle `theta + d`.
    pub fn pure_state_perp(&self, k: u8) -> PureState2 {
        assert!(k <= 1);
        PureState2 {
            amp0: self.theta.sin(),
            amp1: -sign(k) * self.theta.cos(),
        }
    }

    /// Signal state displaced by a noise angle `delta`:
    /// `cos(theta + delta)|0> + (-1)^k sin(theta + delta)|1>`.
    pub fn displaced_state(&self, k: u8, delta: f64) -> PureState2 {
        assert!(k <= 1);
        let a = self.theta + delta;
        PureState2 {
            amp0: a.cos(),
            amp1: sign(k) * a.sin(),
        }
    }

    /// Preparation-noise mixed state
    /// `rho_k = F |psi_k><psi_k| + (1-F) |psi_k_perp><psi_k_perp|`.
    pub fn mixed_state(&self, k: u8, noise: &NoiseModel) -> Density2 {
        let p = self.pure_state(k).projector();
        let q = self.pure_state_perp(k).projector();
        Density2 {
            m00: noise.fidelity() * p.m00 + noise.infidelity() * q.m00,
            m01: noise.fidelity() * p.m01 + noise.infidelity() * q.m01,
            m11: noise.fidelity() * p.m11 + noise.infidelity() * q.m11,
        }
    }
}

pub(crate) fn sign(k: u8) -> f64 {
    if k == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Great-circle preparation noise, parameterised by the fidelity alone.
///
/// The displacement distribution is never fixed beyond being symmetric; only
/// the moments `<cos^2 d> = F`, `<sin^2 d> = 1-F`, `<cos 2d> = 2F-1` and
/// `<sin 2d> = 0` enter any quantity of interest, so the model exposes
/// exactly those.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    fidelity: f64,
}

impl NoiseModel {
    pub fn new(fidelity: f64) -> Result<Self, StateError> {
        if !(0.5..=1.0).contains(&fidelity) {
            return Err(StateError::FidelityOutOfRange(fidelity));
        }
        Ok(Self { fidelity })
    }

    /// `<cos^2 d> = F`.
    pub fn fidelity(&self) -> f64 {
        self.fidelity
    }

    /// `<sin^2 d> = 1 - F`.
    pub fn infidelity(&self) -> f64 {
        1.0 - self.fidelity
    }

    /// `<cos 2d> = 2F - 1`, the factor by which noise shrinks every
    /// interference term.
    pub fn contrast(&self) -> f64 {
        2.0 * self.fidelity - 1.0
    }
}

/// A normalised real-amplitude qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState2 {
    pub amp0: f64,
    pub amp1: f64,
}

impl PureState2 {
    pub fn new(amp0: f64, amp1: f64) -> Result<Self, StateError> {
        if (amp0 * amp0 + amp1 * amp1 - 1.0).abs() > STATE_TOL {
            return Err(StateError::NotNormalised(amp0, amp1));
        }
        Ok(Self { amp0, amp1 })
    }

    /// State at polar angle `alpha`: `cos(alpha)|0> + sin(alpha)|1>`.
    pub fn from_angle(alpha: f64) -> Self {
        Self {
            amp0: alpha.cos(),
            amp1: alpha.sin(),
        }
    }

    pub fn overlap(&self, other: &PureState2) -> f64 {
        self.amp0 * other.amp0 + self.amp1 * other.amp1
    }

    /// An orthogonal state, `(amp1, -amp0)`. For the signal pair use
    /// [`SignalEnsemble::pure_state_perp`], which carries the k-dependent
    /// sign convention.
    pub fn orthogonal(&self) -> PureState2 {
        PureState2 {
            amp0: self.amp1,
            amp1: -self.amp0,
        }
    }

    pub fn projector(&self) -> Density2 {
        Density2 {
            m00: self.amp0 * self.amp0,
            m01: self.amp0 * self.amp1,
            m11: self.amp1 * self.amp1,
        }
    }
}

/// A real symmetric 2x2 density matrix (`m10 = m01`), unit trace, PSD.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Density2 {
    pub m00: f64,
    pub m01: f64,
    pub m11: f64,
}

impl Density2 {
    pub fn new(m00: f64, m01: f64, m11: f64) -> Result<Self, StateError> {
        let rho = Self { m00, m01, m11 };
        if !rho.is_valid(STATE_TOL) {
            return Err(StateError::NotDensity {
                trace: rho.trace(),
                min_eig: rho.min_eigenvalue(),
            });
        }
        Ok(rho)
    }

    pub fn maximally_mixed() -> Self {
        Self {
            m00: 0.5,
            m01: 0.0,
            m11: 0.5,
        }
    }

    pub fn trace(&self) -> f64 {
        self.m00 + self.m11
    }

    pub fn determinant(&self) -> f64 {
        self.m00 * self.m11 - self.m01 * self.m01
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let mean = 0.5 * self.trace();
        let r = ((0.5 * (self.m00 - self.m11)).powi(2) + self.m01 * self.m01).sqrt();
        mean - r
    }

    /// Unit trace and positive semidefinite, within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        (self.trace() - 1.0).abs() <= tol && self.m00 >= -tol && self.determinant() >= -tol
    }

    /// `<v| rho |v>`.
    pub fn expectation(&self, v: &PureState2) -> f64 {
        self.m00 * v.amp0 * v.amp0 + 2.0 * self.m01 * v.amp0 * v.amp1 + self.m11 * v.amp1 * v.amp1
    }

    /// `<u| rho |v>`.
    pub fn matrix_element(&self, u: &PureState2, v: &PureState2) -> f64 {
        u.amp0 * (self.m00 * v.amp0 + self.m01 * v.amp1)
            + u.amp1 * (self.m01 * v.amp0 + self.m11 * v.amp1)
    }

    /// Bloch components `(x, z)` in the great-circle plane:
    /// `rho = (I + x sigma_x + z sigma_z)/2`.
    pub fn bloch(&self) -> (f64, f64) {
        (2.0 * self.m01, self.m00 - self.m11)
    }

    /// Born-rule outcome probabilities in `basis`; the two components sum
    /// to the trace.
    pub fn outcome_probs(&self, basis: &MeasBasis) -> (f64, f64) {
        let (w0, w1) = basis.vectors();
        (self.expectation(&w0), self.expectation(&w1))
    }
}

/// A projective measurement basis on the great circle:
/// `|w0> = cos(phi)|0> + sin(phi)|1>`, `|w1> = sin(phi)|0> - cos(phi)|1>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasBasis {
    phi: f64,
}

impl MeasBasis {
    pub fn new(phi: f64) -> Self {
        Self { phi }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Basis angle doubled, as it enters every outcome probability.
    pub fn cos2phi(&self) -> f64 {
        (2.0 * self.phi).cos()
    }

    pub fn sin2phi(&self) -> f64 {
        (2.0 * self.phi).sin()
    }

    /// Basis whose `|w0>` points along `v`.
    pub fn from_vector(v: &PureState2) -> Self {
        Self {
            phi: v.amp1.atan2(v.amp0),
        }
    }

    pub fn vectors(&self) -> (PureState2, PureState2) {
        let (s, c) = self.phi.sin_cos();
        (
            PureState2 { amp0: c, amp1: s },
            PureState2 { amp0: s, amp1: -c },
        )
    }
}

/// `1 - base^n` evaluated without cancellation for `base` in `[0, 1]`.
pub(crate) fn one_minus_pow(base: f64, n: u32) -> f64 {
    if base <= 0.0 {
        return 1.0;
    }
    if base >= 1.0 {
        return 0.0;
    }
    -(f64::from(n) * base.ln()).exp_m1()
}
