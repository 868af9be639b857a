//! The two-step entanglement concentration protocol.
//!
//! Starting from pairs of partially entangled three-photon inputs
//! `α|RRL⟩ + β|RLR⟩ + γ|LRR⟩`, step 1 runs the parity-check gate on the
//! two `c` photons: the odd herald (plus conditional measurements) leaves
//! one three-photon state `ν(β|RRL⟩ + β|RLR⟩ + γ|LRR⟩)`, the even herald
//! leaves two entangled photon pairs `μ(β|RL⟩ + γ|LR⟩)`. Step 2 pairs one
//! resource of each kind through a second gate: the odd herald distills
//! the standard W state, the even herald yields the squared-parameter
//! three-photon form that seeds the next round. Later rounds consume two
//! squared-parameter states per attempt.
//!
//! Three evaluation routes are provided and cross-check each other:
//! closed-form probability tables ([`closed_form`]), exact branch-tree
//! enumeration through the state-vector simulator ([`exact_table`]), and
//! seeded Monte Carlo ensembles ([`run_ensemble`]).

mod closed_form;
mod ensemble;
mod protocol;

pub use closed_form::{balanced_alpha, closed_form, ProbabilityTable};
pub use ensemble::{
    run_ensemble, run_ensemble_with, step2_checked, EnsembleOptions, ResourcePool, RoundLedger,
};
pub use protocol::{
    canonical_three_photon, canonical_two_photon, exact_table, recycle_round_enumerate,
    standard_w, step1_enumerate, step2_enumerate, w_input_pair, RecycleBranch, Step1Branch,
    Step1Discard, Step2Branch,
};

use num_complex::Complex64;
use thiserror::Error;

use crate::cavity::CavityError;
use crate::pcg::PcgError;
use crate::statevec::{QubitId, QubitKind, StateError, StateVector};

#[derive(Debug, Error)]
pub enum EcpError {
    #[error("coefficients have squared norm {0}, expected 1")]
    NotNormalized(f64),
    #[error("weights must be non-negative and finite")]
    BadWeights,
    #[error("beta² = {0} outside the feasible interval (0, 2/3]")]
    InfeasibleBetaSq(f64),
    #[error("{0} rounds requested, closed-form chain is capped at {1}")]
    TooManyRounds(u32, u32),
    #[error("state-vector pipeline is capped at {0} rounds")]
    PipelineRoundCap(u32),
    #[error("paired resources have generations {0} and {1}")]
    GenerationMismatch(u32, u32),
    #[error("need at least {0} input pairs")]
    TooFewPairs(u64),
    #[error("w-input labels must be three distinct photons")]
    BadLabels,
    #[error("state does not factor into the expected photon pairs")]
    NotAProductState,
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Gate(#[from] PcgError),
    #[error(transparent)]
    Cavity(#[from] CavityError),
}

/// Coefficients of the partially entangled three-photon input,
/// `|α|² + |β|² + |γ|² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WParams {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
}

impl WParams {
    pub fn new(alpha: Complex64, beta: Complex64, gamma: Complex64) -> Result<Self, EcpError> {
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
            return Err(EcpError::BadWeights);
        }
        let n = alpha.norm_sqr() + beta.norm_sqr() + gamma.norm_sqr();
        if (n - 1.0).abs() > 1e-9 {
            return Err(EcpError::NotNormalized(n));
        }
        Ok(Self { alpha, beta, gamma })
    }

    /// Real non-negative coefficients from squared weights.
    pub fn from_weights(alpha_sq: f64, beta_sq: f64, gamma_sq: f64) -> Result<Self, EcpError> {
        if [alpha_sq, beta_sq, gamma_sq].iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(EcpError::BadWeights);
        }
        Self::new(
            Complex64::new(alpha_sq.sqrt(), 0.0),
            Complex64::new(beta_sq.sqrt(), 0.0),
            Complex64::new(gamma_sq.sqrt(), 0.0),
        )
    }

    /// Squared moduli `(|α|², |β|², |γ|²)`.
    pub fn weights(&self) -> (f64, f64, f64) {
        (self.alpha.norm_sqr(), self.beta.norm_sqr(), self.gamma.norm_sqr())
    }
}

/// Build `α|RRL⟩ + β|RLR⟩ + γ|LRR⟩` on three photon labels.
pub fn make_w_input(w: &WParams, labels: [QubitId; 3]) -> Result<StateVector, EcpError> {
    if labels.iter().any(|q| q.kind() != QubitKind::Photon)
        || labels[0] == labels[1]
        || labels[1] == labels[2]
        || labels[0] == labels[2]
    {
        return Err(EcpError::BadLabels);
    }
    let qs = labels.to_vec();
    Ok(StateVector::from_terms(
        qs,
        &[
            (&[0, 0, 1], w.alpha),
            (&[0, 1, 0], w.beta),
            (&[1, 0, 0], w.gamma),
        ],
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels() -> [QubitId; 3] {
        [QubitId::photon("a"), QubitId::photon("b"), QubitId::photon("c")]
    }

    #[test]
    fn single_term_input() {
        let w = WParams::from_weights(1.0, 0.0, 0.0).unwrap();
        let s = make_w_input(&w, labels()).unwrap();
        assert!((s.amplitude(&[0, 0, 1]).unwrap().re - 1.0).abs() < 1e-12);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn standard_w_input() {
        let t = 1.0 / 3.0;
        let w = WParams::from_weights(t, t, t).unwrap();
        let s = make_w_input(&w, labels()).unwrap();
        let amp = 1.0 / 3.0f64.sqrt();
        for bits in [[0u8, 0, 1], [0, 1, 0], [1, 0, 0]] {
            assert!((s.amplitude(&bits).unwrap().re - amp).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_input_amplitudes() {
        let w = WParams::from_weights(0.5, 0.3, 0.2).unwrap();
        let s = make_w_input(&w, labels()).unwrap();
        assert!((s.amplitude(&[0, 0, 1]).unwrap().re - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unnormalized_and_bad_labels() {
        assert!(matches!(
            WParams::from_weights(0.5, 0.3, 0.3),
            Err(EcpError::NotNormalized(_))
        ));
        assert!(matches!(WParams::from_weights(-0.1, 0.6, 0.5), Err(EcpError::BadWeights)));
        let w = WParams::from_weights(0.5, 0.3, 0.2).unwrap();
        let dup = [QubitId::photon("a"), QubitId::photon("a"), QubitId::photon("c")];
        assert!(matches!(make_w_input(&w, dup), Err(EcpError::BadLabels)));
        let spin = [QubitId::photon("a"), QubitId::spin("s"), QubitId::photon("c")];
        assert!(matches!(make_w_input(&w, spin), Err(EcpError::BadLabels)));
    }

    #[test]
    fn complex_phases_are_accepted() {
        let w = WParams::new(
            Complex64::from_polar(0.5f64.sqrt(), 1.1),
            Complex64::from_polar(0.3f64.sqrt(), -0.4),
            Complex64::from_polar(0.2f64.sqrt(), 2.9),
        )
        .unwrap();
        let (a2, b2, g2) = w.weights();
        assert!((a2 - 0.5).abs() < 1e-12);
        assert!((b2 - 0.3).abs() < 1e-12);
        assert!((g2 - 0.2).abs() < 1e-12);
    }
}
