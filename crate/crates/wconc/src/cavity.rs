//! One-sided quantum-dot cavity optics.
//!
//! Reflection off the cavity is spin-selective: a circularly polarized
//! photon sees the coupled ("hot") cavity when its polarization matches
//! the dipole transition allowed by the resident electron spin, and the
//! uncoupled ("cold") cavity otherwise. Near the `ω − ω_c = κ/2` operating
//! point the hot and cold reflections differ by a π/2 phase, which is the
//! whole working principle of the parity-check gate built on top.
//!
//! All rates and detunings are dimensionless, in units of the cavity decay
//! rate κ.

use num_complex::Complex64;
use thiserror::Error;

use crate::statevec::{QubitId, QubitKind, StateError, StateVector};

#[derive(Debug, Error, PartialEq)]
pub enum CavityError {
    #[error("kappa must be positive, got {0}")]
    NonPositiveKappa(f64),
    #[error("rate {name} must be non-negative, got {value}")]
    NegativeRate { name: &'static str, value: f64 },
    #[error("`{0}` is not a {1}")]
    WrongKind(String, &'static str),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Physical parameters of one QD-cavity system. Frequencies are detunings
/// relative to the probe in units of κ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    /// Coupling strength between the trion transition and the cavity mode.
    pub g: f64,
    /// Cavity decay rate (the reference unit; normally 1).
    pub kappa: f64,
    /// Side-leakage rate of the cavity.
    pub kappa_s: f64,
    /// Exciton dipole decay rate.
    pub gamma: f64,
    /// Probe frequency.
    pub omega: f64,
    /// Cavity mode frequency.
    pub omega_c: f64,
    /// Trion transition frequency.
    pub omega_x: f64,
}

impl CavityParams {
    /// Parameters at the protocol's operating point: `ω − ω_c = κ/2` and
    /// `ω_c = ω_X`, with κ = 1.
    pub fn at_operating_point(g: f64, kappa_s: f64, gamma: f64) -> Self {
        Self { g, kappa: 1.0, kappa_s, gamma, omega: 0.5, omega_c: 0.0, omega_x: 0.0 }
    }

    /// Operating-point parameters from the normalized coupling
    /// `g/(κ + κ_s)` and leakage ratio `κ_s/κ`.
    pub fn from_coupling_ratio(g_over_ks_plus_k: f64, ks_over_k: f64, gamma: f64) -> Self {
        Self::at_operating_point(g_over_ks_plus_k * (1.0 + ks_over_k), ks_over_k, gamma)
    }

    pub fn validate(&self) -> Result<(), CavityError> {
        if self.kappa <= 0.0 {
            return Err(CavityError::NonPositiveKappa(self.kappa));
        }
        for (name, value) in [("g", self.g), ("kappa_s", self.kappa_s), ("gamma", self.gamma)] {
            if value < 0.0 || !value.is_finite() {
                return Err(CavityError::NegativeRate { name, value });
            }
        }
        Ok(())
    }
}

/// Hot and cold reflection coefficients with their phases.
#[derive(Debug, Clone, Copy)]
pub struct ReflectionPair {
    pub r_hot: Complex64,
    pub r_cold: Complex64,
    /// `arg(r_hot)` in (−π, π].
    pub phi_hot: f64,
    /// `arg(r_cold)` in (−π, π].
    pub phi_cold: f64,
}

/// Steady-state reflection coefficients of the coupled and uncoupled
/// cavity under the weak-excitation condition.
pub fn reflection(params: &CavityParams) -> Result<ReflectionPair, CavityError> {
    params.validate()?;
    let d_x = Complex64::new(params.gamma / 2.0, params.omega_x - params.omega);
    let d_c = Complex64::new(
        (params.kappa + params.kappa_s) / 2.0,
        params.omega_c - params.omega,
    );
    let r_hot = 1.0 - params.kappa * d_x / (d_x * d_c + params.g * params.g);
    let r_cold = (d_c - params.kappa) / d_c;
    Ok(ReflectionPair { r_hot, r_cold, phi_hot: r_hot.arg(), phi_cold: r_cold.arg() })
}

/// Faraday rotation angle `θ_F = (φ_cold − φ_hot)/2` of the reflected
/// polarization; identical for both spin orientations.
pub fn faraday_rotation(params: &CavityParams) -> Result<f64, CavityError> {
    let r = reflection(params)?;
    Ok((r.phi_cold - r.phi_hot) / 2.0)
}

/// How a photon-cavity reflection is modeled.
#[derive(Debug, Clone)]
pub enum InteractionMode {
    /// Unit-modulus reflection with the idealized ±π/2 phase:
    /// `|L,↑⟩ → |L,↑⟩`, `|L,↓⟩ → i|L,↓⟩`, `|R,↑⟩ → i|R,↑⟩`, `|R,↓⟩ → |R,↓⟩`.
    Ideal,
    /// Each branch additionally damped by `|r_hot|` or `|r_cold|`; the state
    /// becomes sub-normalized and the lost norm is the photon-loss
    /// probability. Phases stay idealized.
    Lossy(CavityParams),
    /// Analysis toggle: multiply by the full complex reflection
    /// coefficients instead of magnitude times idealized phase. Note that
    /// at the standard operating point the cold branch then carries a
    /// phase near −π/2 rather than +π/2.
    LossyExact(CavityParams),
}

impl InteractionMode {
    /// Branch factors as `(cold, hot)` where cold applies to `(R,↑)` and
    /// `(L,↓)`, hot to `(L,↑)` and `(R,↓)`.
    fn branch_factors(&self) -> Result<(Complex64, Complex64), CavityError> {
        let i = Complex64::new(0.0, 1.0);
        match self {
            InteractionMode::Ideal => Ok((i, Complex64::new(1.0, 0.0))),
            InteractionMode::Lossy(p) => {
                let r = reflection(p)?;
                Ok((i * r.r_cold.norm(), Complex64::new(r.r_hot.norm(), 0.0)))
            }
            InteractionMode::LossyExact(p) => {
                let r = reflection(p)?;
                Ok((r.r_cold, r.r_hot))
            }
        }
    }
}

/// Reflect `photon` off the cavity holding `spin`. The interaction is
/// diagonal in the `{R, L} ⊗ {↑, ↓}` basis; in lossy modes the returned
/// state is sub-normalized and the norm never increases.
pub fn photon_spin_interact(
    state: &StateVector,
    photon: &QubitId,
    spin: &QubitId,
    mode: &InteractionMode,
) -> Result<StateVector, CavityError> {
    if photon.kind() != QubitKind::Photon {
        return Err(CavityError::WrongKind(photon.label().to_string(), "photon"));
    }
    if spin.kind() != QubitKind::Spin {
        return Err(CavityError::WrongKind(spin.label().to_string(), "spin"));
    }
    let p = state.position(photon)?;
    let s = state.position(spin)?;
    let (cold, hot) = mode.branch_factors()?;
    Ok(state.apply_diagonal(|idx| {
        let pb = (idx >> p) & 1;
        let sb = (idx >> s) & 1;
        // R↑ (0,0) and L↓ (1,1) see the uncoupled cavity
        if pb == sb {
            cold
        } else {
            hot
        }
    }))
}
