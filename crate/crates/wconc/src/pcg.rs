//! Spin-mediated parity-check gate on two photon polarizations.
//!
//! The gate reflects both signal photons and one probe photon off the same
//! QD-cavity, with a spin Hadamard between the signal and probe
//! reflections, then reads the probe out in the ±45° linear basis. The
//! probe outcome heralds the parity: the even herald leaves the signal
//! pair in `α|RR⟩ − β|LL⟩`, the odd herald in `α|RL⟩ + β|LR⟩`.
//!
//! Heralding convention: the even herald is perfectly correlated with spin
//! `↓`; under the idealized reflection phases its probe port is the
//! `(|L⟩ − i|R⟩)/√2` output, which the gate reports under the conventional
//! detector label [`ProbeState::Plus45`]. The spin itself is never read
//! out directly; it is traced out by projecting onto the heralded value.

use num_complex::Complex64;
use thiserror::Error;

use crate::cavity::{photon_spin_interact, reflection, CavityError, CavityParams, InteractionMode};
use crate::statevec::{hadamard, Amplitude, QubitId, QubitKind, StateError, StateVector};

const SPIN_LABEL: &str = "pcg_spin";
const PROBE_LABEL: &str = "pcg_probe";

#[derive(Debug, Error)]
pub enum PcgError {
    #[error("`{0}` is not a photon qubit")]
    NotAPhoton(String),
    #[error("the gate needs two distinct photons")]
    SamePhoton,
    #[error("labels `{SPIN_LABEL}`/`{PROBE_LABEL}` are reserved by the gate")]
    ReservedLabel,
    #[error("random draw {0} outside [0, 1)")]
    RandOutOfRange(f64),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Cavity(#[from] CavityError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Conventional detector label of the probe outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeState {
    Plus45,
    Minus45,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinOutcome {
    Up,
    Down,
}

/// Classical outcome of one gate run: the herald triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParityOutcome {
    pub parity: Parity,
    pub probe_state: ProbeState,
    pub spin_outcome: SpinOutcome,
}

impl ParityOutcome {
    pub fn even() -> Self {
        Self { parity: Parity::Even, probe_state: ProbeState::Plus45, spin_outcome: SpinOutcome::Down }
    }

    pub fn odd() -> Self {
        Self { parity: Parity::Odd, probe_state: ProbeState::Minus45, spin_outcome: SpinOutcome::Up }
    }
}

/// One heralded branch of the gate.
#[derive(Debug, Clone)]
pub struct GateResult {
    pub outcome: ParityOutcome,
    /// Herald probability for a normalized input. In lossy modes the two
    /// branch probabilities sum to the gate efficiency; the deficit is the
    /// photon-loss probability.
    pub probability: f64,
    /// Post-gate signal state (unit norm), spin and probe removed,
    /// spectator qubits untouched.
    pub collapsed: StateVector,
    /// Fraction of this branch's ideal probability that survives photon
    /// loss; exactly 1 in ideal mode.
    pub retained_norm: f64,
}

/// Result of a sampled gate run.
#[derive(Debug, Clone)]
pub enum GateSample {
    Heralded(GateResult),
    /// A photon was absorbed or leaked; no herald fired.
    Loss { probability: f64 },
}

/// Fidelity and efficiency figures of the gate at one parameter point.
#[derive(Debug, Clone, Copy)]
pub struct GateMetrics {
    pub fidelity_even: f64,
    pub fidelity_odd: f64,
    pub efficiency: f64,
}

/// Probe ports `(even, odd)` as single-qubit states in `(R, L)` components.
fn herald_ports(mode: &InteractionMode) -> ([Amplitude; 2], [Amplitude; 2]) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let minus = [Complex64::new(0.0, -s), Complex64::new(s, 0.0)]; // (|L⟩ - i|R⟩)/√2
    let plus = [Complex64::new(0.0, s), Complex64::new(s, 0.0)]; // (|L⟩ + i|R⟩)/√2
    match mode {
        // with the idealized +π/2 cold phase the even branch exits on the
        // (|L⟩ - i|R⟩)/√2 port; with exact phases (cold ≈ -π/2) the ports swap
        InteractionMode::Ideal | InteractionMode::Lossy(_) => (minus, plus),
        InteractionMode::LossyExact(_) => (plus, minus),
    }
}

/// Port-projected branch with the spin still in the register.
struct HeraldBranch {
    state: StateVector,
    /// Squared norm of the port projection relative to the input norm.
    weight: f64,
}

/// Run the reflect-reflect-Hadamard-reflect sequence and project the probe
/// onto the two herald ports. Returns `(even, odd)` branches, spin kept.
fn herald_branches(
    state: &StateVector,
    p1: &QubitId,
    p2: &QubitId,
    mode: &InteractionMode,
) -> Result<(HeraldBranch, HeraldBranch), PcgError> {
    for q in [p1, p2] {
        if q.kind() != QubitKind::Photon {
            return Err(PcgError::NotAPhoton(q.label().to_string()));
        }
    }
    if p1 == p2 {
        return Err(PcgError::SamePhoton);
    }
    if state.qubits().iter().any(|q| q.label() == SPIN_LABEL || q.label() == PROBE_LABEL) {
        return Err(PcgError::ReservedLabel);
    }
    let n_in = state.norm_sqr();
    if n_in <= 0.0 {
        return Err(PcgError::State(StateError::ZeroNorm));
    }
    let spin = QubitId::spin(SPIN_LABEL);
    let probe = QubitId::photon(PROBE_LABEL);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let half = Complex64::new(s, 0.0);
    let ancilla = StateVector::single(spin.clone(), half, half)?
        .tensor(&StateVector::single(probe.clone(), half, half)?)?;
    let mut joint = state.tensor(&ancilla)?;
    joint = photon_spin_interact(&joint, p1, &spin, mode)?;
    joint = photon_spin_interact(&joint, p2, &spin, mode)?;
    joint = joint.apply_single(&spin, &hadamard())?;
    joint = photon_spin_interact(&joint, &probe, &spin, mode)?;
    let (even_port, odd_port) = herald_ports(mode);
    let (even_state, even_w) = joint.project(&probe, even_port)?;
    let (odd_state, odd_w) = joint.project(&probe, odd_port)?;
    Ok((
        HeraldBranch { state: even_state, weight: even_w / n_in },
        HeraldBranch { state: odd_state, weight: odd_w / n_in },
    ))
}

/// Project the spin onto the heralded value, drop it, renormalize. A
/// branch that cannot fire keeps its (zero) projected state as is.
fn collapse_spin(branch: &HeraldBranch, parity: Parity) -> Result<StateVector, PcgError> {
    let spin = QubitId::spin(SPIN_LABEL);
    let onto = match parity {
        Parity::Even => [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)], // ↓
        Parity::Odd => [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],  // ↑
    };
    let (projected, w) = branch.state.project(&spin, onto)?;
    if w <= 1e-30 {
        return Ok(projected);
    }
    let inv = 1.0 / w.sqrt();
    Ok(projected.apply_diagonal(|_| Complex64::new(inv, 0.0)))
}

/// Gate efficiency at one parameter point: the fraction of the ideal
/// even-herald amplitude that survives the lossy gate,
/// `η = [(|r_h|² + |r₀|²)/2] · [(|r_h| + |r₀|)/2]`.
fn gate_efficiency(params: &CavityParams) -> Result<f64, CavityError> {
    let r = reflection(params)?;
    let (h, c) = (r.r_hot.norm(), r.r_cold.norm());
    Ok((h * h + c * c) / 2.0 * (h + c) / 2.0)
}

/// Enumerate both heralded branches of the gate. Returns exactly two
/// results, even first. In ideal mode the probabilities sum to 1; in lossy
/// modes they sum to the gate efficiency.
pub fn parity_check_enumerate(
    state: &StateVector,
    p1: &QubitId,
    p2: &QubitId,
    mode: &InteractionMode,
) -> Result<Vec<GateResult>, PcgError> {
    let (even, odd) = herald_branches(state, p1, p2, mode)?;
    let (p_even, p_odd, ret_even, ret_odd) = match mode {
        InteractionMode::Ideal => (even.weight, odd.weight, 1.0, 1.0),
        InteractionMode::Lossy(params) | InteractionMode::LossyExact(params) => {
            let (ideal_even, ideal_odd) =
                herald_branches(state, p1, p2, &InteractionMode::Ideal)?;
            let eta = gate_efficiency(params)?;
            let total = even.weight + odd.weight;
            let pe = eta * even.weight / total;
            let po = eta * odd.weight / total;
            let retained = |p: f64, ideal_w: f64| if ideal_w > 1e-30 { p / ideal_w } else { 1.0 };
            (pe, po, retained(pe, ideal_even.weight), retained(po, ideal_odd.weight))
        }
    };
    Ok(vec![
        GateResult {
            outcome: ParityOutcome::even(),
            probability: p_even,
            collapsed: collapse_spin(&even, Parity::Even)?,
            retained_norm: ret_even,
        },
        GateResult {
            outcome: ParityOutcome::odd(),
            probability: p_odd,
            collapsed: collapse_spin(&odd, Parity::Odd)?,
            retained_norm: ret_odd,
        },
    ])
}

/// Sample one gate run: draw against the cumulative branch probabilities,
/// even branch first. In lossy modes the remaining probability mass is an
/// explicit [`GateSample::Loss`].
pub fn parity_check_sample(
    state: &StateVector,
    p1: &QubitId,
    p2: &QubitId,
    mode: &InteractionMode,
    rand: f64,
) -> Result<GateSample, PcgError> {
    if !(0.0..1.0).contains(&rand) {
        return Err(PcgError::RandOutOfRange(rand));
    }
    let branches = parity_check_enumerate(state, p1, p2, mode)?;
    let mut cumulative = 0.0;
    for b in &branches {
        cumulative += b.probability;
        if rand < cumulative {
            return Ok(GateSample::Heralded(b.clone()));
        }
    }
    Ok(GateSample::Loss { probability: (1.0 - cumulative).max(0.0) })
}

/// Fidelity and efficiency of the gate on the canonical equal-superposition
/// input.
///
/// - `fidelity_even = (1 + |r₀|²)/2`: overlap of the even-herald state,
///   whose cold component is damped by `|r₀|²` relative to the hot one,
///   with the balanced target; the common hot-branch damping is accounted
///   in `efficiency` instead.
/// - `fidelity_odd`: state fidelity of the simulated odd herald (spin
///   kept) against the ideal odd branch. The odd branch damps both signal
///   components equally, so this stays near 1 until probe contamination
///   matters.
/// - `efficiency`: surviving fraction of the ideal even-herald amplitude,
///   `[(|r_h|² + |r₀|²)/2]·[(|r_h| + |r₀|)/2]`.
pub fn gate_metrics(params: &CavityParams) -> Result<GateMetrics, PcgError> {
    let r = reflection(params)?;
    let c = r.r_cold.norm();
    let fidelity_even = (1.0 + c * c) / 2.0;
    let efficiency = gate_efficiency(params)?;

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let half = Complex64::new(s, 0.0);
    let p1 = QubitId::photon("p1");
    let p2 = QubitId::photon("p2");
    let input = StateVector::single(p1.clone(), half, half)?
        .tensor(&StateVector::single(p2.clone(), half, half)?)?;
    let (_, lossy_odd) = herald_branches(&input, &p1, &p2, &InteractionMode::Lossy(*params))?;
    let (_, ideal_odd) = herald_branches(&input, &p1, &p2, &InteractionMode::Ideal)?;
    let fidelity_odd = lossy_odd.state.fidelity(&ideal_odd.state)?;
    Ok(GateMetrics { fidelity_even, fidelity_odd, efficiency })
}
