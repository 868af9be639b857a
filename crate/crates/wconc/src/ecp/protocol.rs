//! Exact branch enumeration of the protocol steps.
//!
//! Step 1 acts on six photons `a0 b0 c0 a1 b1 c1` (two copies of the
//! three-photon input), step 2 on `a0 b0 c0` plus a photon pair
//! `abar bbar`, and every later round on two copies of the squared-
//! parameter three-photon form. Branch probabilities are absolute
//! (relative to the unit-norm input), so each enumeration sums to 1 in
//! ideal mode and to the gate efficiency plus loss in lossy mode.
//!
//! Phase-flip fix-ups are decided from classical outcomes alone: the
//! odd-herald paths flip when the two Hadamard-basis measurements
//! disagree, the step-2 even path flips when they agree.

use num_complex::Complex64;

use super::closed_form::assemble_total;
use super::{EcpError, ProbabilityTable, WParams};
use crate::cavity::InteractionMode;
use crate::pcg::parity_check_enumerate;
use crate::statevec::{hadamard, sigma_z, Amplitude, QubitId, StateVector};

/// Branch weights below this are treated as exactly zero and skipped.
const TINY: f64 = 1e-30;

/// Rounds the state-vector pipeline supports; amplitudes carry
/// `β^(2^n)`-type parameters, which stop being meaningful in doubles
/// long before the closed-form chain cap.
pub(super) const PIPELINE_MAX_ROUNDS: u32 = 5;

fn ph(label: &str) -> QubitId {
    QubitId::photon(label)
}

fn outcome_vec(outcome: u8) -> [Amplitude; 2] {
    if outcome == 0 {
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
    } else {
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
    }
}

fn renormalized(state: StateVector, weight: f64) -> StateVector {
    let inv = 1.0 / weight.sqrt();
    state.apply_diagonal(|_| Complex64::new(inv, 0.0))
}

/// `ν(β|RRL⟩ + β|RLR⟩ + γ|LRR⟩)` on three photon labels.
pub fn canonical_three_photon(
    beta: Complex64,
    gamma: Complex64,
    labels: [QubitId; 3],
) -> Result<StateVector, EcpError> {
    let norm = (2.0 * beta.norm_sqr() + gamma.norm_sqr()).sqrt();
    if norm <= 0.0 {
        return Err(EcpError::BadWeights);
    }
    let qs = labels.to_vec();
    Ok(StateVector::from_terms(
        qs,
        &[
            (&[0, 0, 1], beta / norm),
            (&[0, 1, 0], beta / norm),
            (&[1, 0, 0], gamma / norm),
        ],
    )?)
}

/// `μ(β|RL⟩ + γ|LR⟩)` on two photon labels.
pub fn canonical_two_photon(
    beta: Complex64,
    gamma: Complex64,
    labels: [QubitId; 2],
) -> Result<StateVector, EcpError> {
    let norm = (beta.norm_sqr() + gamma.norm_sqr()).sqrt();
    if norm <= 0.0 {
        return Err(EcpError::BadWeights);
    }
    let qs = labels.to_vec();
    Ok(StateVector::from_terms(
        qs,
        &[(&[0, 1], beta / norm), (&[1, 0], gamma / norm)],
    )?)
}

/// The standard three-photon W state `(|RRL⟩ + |RLR⟩ + |LRR⟩)/√3`.
pub fn standard_w(labels: [QubitId; 3]) -> StateVector {
    let t = Complex64::new(1.0 / 3.0f64.sqrt(), 0.0);
    StateVector::from_terms(
        labels.to_vec(),
        &[(&[0, 0, 1], t), (&[0, 1, 0], t), (&[1, 0, 0], t)],
    )
    .expect("distinct labels")
}

/// Two copies of the three-photon input on labels `a0 b0 c0` / `a1 b1 c1`.
pub fn w_input_pair(w: &WParams) -> Result<StateVector, EcpError> {
    let first = super::make_w_input(w, [ph("a0"), ph("b0"), ph("c0")])?;
    let second = super::make_w_input(w, [ph("a1"), ph("b1"), ph("c1")])?;
    Ok(first.tensor(&second)?)
}

/// Why a step-1 sub-branch is unusable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step1Discard {
    /// Odd herald but the `a1` readout projected out the entangled part.
    OddRemnant,
    /// Even herald but both gate photons read `L` (the `α²` component).
    EvenRemnant,
}

/// One enumerated branch of step 1.
#[derive(Debug, Clone)]
pub enum Step1Branch {
    /// Odd herald, `a1 = R`, one Hadamard-basis outcome on `(b1, c1)`:
    /// a three-photon state on `a0 b0 c0`.
    ThreePhoton { state: StateVector, probability: f64, fixed_up: bool },
    /// Even herald, both gate photons read `R`: two entangled pairs on
    /// `(a0, b0)` and `(a1, b1)`.
    TwoPhotonPairs { first: StateVector, second: StateVector, probability: f64 },
    Discarded { probability: f64, reason: Step1Discard },
    /// Photon absorbed or leaked before heralding (lossy modes only).
    Loss { probability: f64 },
}

impl Step1Branch {
    pub fn probability(&self) -> f64 {
        match self {
            Step1Branch::ThreePhoton { probability, .. }
            | Step1Branch::TwoPhotonPairs { probability, .. }
            | Step1Branch::Discarded { probability, .. }
            | Step1Branch::Loss { probability } => *probability,
        }
    }
}

/// Split a four-photon product state into its two constituent pairs.
fn split_pairs(
    state: &StateVector,
    first: [QubitId; 2],
    second: [QubitId; 2],
) -> Result<(StateVector, StateVector), EcpError> {
    let pos = |q: &QubitId| state.position(q);
    let (f0, f1, s0, s1) = (pos(&first[0])?, pos(&first[1])?, pos(&second[0])?, pos(&second[1])?);
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    let n = state.num_qubits();
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        debug_assert!(idx < 1 << n);
        let i = ((idx >> f0) & 1) | (((idx >> f1) & 1) << 1);
        let j = ((idx >> s0) & 1) | (((idx >> s1) & 1) << 1);
        m[i][j] += amp;
    }
    let (mut bi, mut bj, mut best) = (0, 0, 0.0);
    for (i, row) in m.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if v.norm_sqr() > best {
                best = v.norm_sqr();
                bi = i;
                bj = j;
            }
        }
    }
    if best < TINY {
        return Err(EcpError::NotAProductState);
    }
    let u: Vec<Complex64> = (0..4).map(|i| m[i][bj]).collect();
    let v: Vec<Complex64> = (0..4).map(|j| m[bi][j] / m[bi][bj]).collect();
    for i in 0..4 {
        for j in 0..4 {
            if (m[i][j] - u[i] * v[j]).norm_sqr() > 1e-20 * best {
                return Err(EcpError::NotAProductState);
            }
        }
    }
    let build = |labels: [QubitId; 2], amps: &[Complex64]| -> Result<StateVector, EcpError> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let scaled: Vec<Complex64> = amps.iter().map(|a| a / norm).collect();
        Ok(StateVector::from_terms(
            labels.to_vec(),
            &[
                (&[0, 0], scaled[0]),
                (&[1, 0], scaled[1]),
                (&[0, 1], scaled[2]),
                (&[1, 1], scaled[3]),
            ],
        )?)
    };
    Ok((build(first, &u)?, build(second, &v)?))
}

/// Enumerate every branch of step 1 on a six-photon input pair.
pub fn step1_enumerate(
    pair: &StateVector,
    mode: &InteractionMode,
) -> Result<Vec<Step1Branch>, EcpError> {
    let gate = parity_check_enumerate(pair, &ph("c0"), &ph("c1"), mode)?;
    let (even, odd) = (&gate[0], &gate[1]);
    let mut out = Vec::new();

    if odd.probability > TINY {
        // a1 readout in {R, L}
        let (kept, w_r) = odd.collapsed.project(&ph("a1"), outcome_vec(0))?;
        if w_r > TINY {
            let kept = kept
                .apply_single(&ph("b1"), &hadamard())?
                .apply_single(&ph("c1"), &hadamard())?;
            for ob in 0..2u8 {
                let (sb, _) = kept.project(&ph("b1"), outcome_vec(ob))?;
                for oc in 0..2u8 {
                    let (sc, w) = sb.project(&ph("c1"), outcome_vec(oc))?;
                    if w < TINY {
                        continue;
                    }
                    let mut state = renormalized(sc, w);
                    let fixed_up = ob != oc;
                    if fixed_up {
                        state = state.apply_single(&ph("c0"), &sigma_z())?;
                    }
                    out.push(Step1Branch::ThreePhoton {
                        state,
                        probability: odd.probability * w,
                        fixed_up,
                    });
                }
            }
        }
        let (_, w_l) = odd.collapsed.project(&ph("a1"), outcome_vec(1))?;
        if w_l > TINY {
            out.push(Step1Branch::Discarded {
                probability: odd.probability * w_l,
                reason: Step1Discard::OddRemnant,
            });
        }
    }

    if even.probability > TINY {
        for oc0 in 0..2u8 {
            let (s0, _) = even.collapsed.project(&ph("c0"), outcome_vec(oc0))?;
            for oc1 in 0..2u8 {
                let (s1, w) = s0.project(&ph("c1"), outcome_vec(oc1))?;
                if w < TINY {
                    continue;
                }
                let probability = even.probability * w;
                if oc0 == 0 && oc1 == 0 {
                    let state = renormalized(s1, w);
                    let (first, second) = split_pairs(
                        &state,
                        [ph("a0"), ph("b0")],
                        [ph("a1"), ph("b1")],
                    )?;
                    out.push(Step1Branch::TwoPhotonPairs { first, second, probability });
                } else {
                    out.push(Step1Branch::Discarded {
                        probability,
                        reason: Step1Discard::EvenRemnant,
                    });
                }
            }
        }
    }

    let heralded = even.probability + odd.probability;
    if heralded < 1.0 - TINY.sqrt() {
        out.push(Step1Branch::Loss { probability: 1.0 - heralded });
    }
    Ok(out)
}

/// One enumerated branch of step 2.
#[derive(Debug, Clone)]
pub enum Step2Branch {
    /// Odd herald: the standard W state on `a0 b0 c0`.
    WSuccess { state: StateVector, probability: f64, fixed_up: bool },
    /// Even herald: squared-parameter three-photon state, the next
    /// round's resource.
    Recycled { state: StateVector, probability: f64, fixed_up: bool },
    Loss { probability: f64 },
}

impl Step2Branch {
    pub fn probability(&self) -> f64 {
        match self {
            Step2Branch::WSuccess { probability, .. }
            | Step2Branch::Recycled { probability, .. }
            | Step2Branch::Loss { probability } => *probability,
        }
    }
}

/// Enumerate step 2 on a three-photon resource (`a0 b0 c0`) and a
/// two-photon resource (`abar bbar`).
pub fn step2_enumerate(
    three: &StateVector,
    two: &StateVector,
    mode: &InteractionMode,
) -> Result<Vec<Step2Branch>, EcpError> {
    let joint = three.tensor(two)?;
    let gate = parity_check_enumerate(&joint, &ph("a0"), &ph("abar"), mode)?;
    let (even, odd) = (&gate[0], &gate[1]);
    let mut out = Vec::new();

    for (result, is_odd) in [(odd, true), (even, false)] {
        if result.probability < TINY {
            continue;
        }
        let kept = result
            .collapsed
            .apply_single(&ph("abar"), &hadamard())?
            .apply_single(&ph("bbar"), &hadamard())?;
        for oa in 0..2u8 {
            let (sa, _) = kept.project(&ph("abar"), outcome_vec(oa))?;
            for ob in 0..2u8 {
                let (sb, w) = sa.project(&ph("bbar"), outcome_vec(ob))?;
                if w < TINY {
                    continue;
                }
                let mut state = renormalized(sb, w);
                // odd path flips on disagreeing outcomes, even path on agreeing
                let fixed_up = if is_odd { oa != ob } else { oa == ob };
                if fixed_up {
                    state = state.apply_single(&ph("a0"), &sigma_z())?;
                }
                let probability = result.probability * w;
                out.push(if is_odd {
                    Step2Branch::WSuccess { state, probability, fixed_up }
                } else {
                    Step2Branch::Recycled { state, probability, fixed_up }
                });
            }
        }
    }
    let heralded = even.probability + odd.probability;
    if heralded < 1.0 - TINY.sqrt() {
        out.push(Step2Branch::Loss { probability: 1.0 - heralded });
    }
    Ok(out)
}

/// One enumerated branch of a recycling round (round index ≥ 2).
#[derive(Debug, Clone)]
pub enum RecycleBranch {
    /// Odd herald, `c1 = R`, one Hadamard-basis outcome on `(b1, a1)`.
    WSuccess { state: StateVector, probability: f64, fixed_up: bool },
    /// Even herald, twin-diagonal component: the next generation's
    /// squared-parameter state on `a0 b0 c0`.
    Recycled { state: StateVector, probability: f64 },
    Discarded { probability: f64 },
    Loss { probability: f64 },
}

impl RecycleBranch {
    pub fn probability(&self) -> f64 {
        match self {
            RecycleBranch::WSuccess { probability, .. }
            | RecycleBranch::Recycled { probability, .. }
            | RecycleBranch::Discarded { probability }
            | RecycleBranch::Loss { probability } => *probability,
        }
    }
}

/// Enumerate a recycling round on two squared-parameter states
/// (`a0 b0 c0` and `a1 b1 c1`). The parity gate runs on the two `a`
/// photons, which now carry the coefficient distinction; the even
/// herald's twin-diagonal component is kept as the next generation.
pub fn recycle_round_enumerate(
    pair: &StateVector,
    mode: &InteractionMode,
) -> Result<Vec<RecycleBranch>, EcpError> {
    let gate = parity_check_enumerate(pair, &ph("a0"), &ph("a1"), mode)?;
    let (even, odd) = (&gate[0], &gate[1]);
    let mut out = Vec::new();

    if odd.probability > TINY {
        let (kept, w_r) = odd.collapsed.project(&ph("c1"), outcome_vec(0))?;
        if w_r > TINY {
            let kept = kept
                .apply_single(&ph("b1"), &hadamard())?
                .apply_single(&ph("a1"), &hadamard())?;
            for ob in 0..2u8 {
                let (sb, _) = kept.project(&ph("b1"), outcome_vec(ob))?;
                for oa in 0..2u8 {
                    let (sa, w) = sb.project(&ph("a1"), outcome_vec(oa))?;
                    if w < TINY {
                        continue;
                    }
                    let mut state = renormalized(sa, w);
                    let fixed_up = ob != oa;
                    if fixed_up {
                        state = state.apply_single(&ph("a0"), &sigma_z())?;
                    }
                    out.push(RecycleBranch::WSuccess {
                        state,
                        probability: odd.probability * w,
                        fixed_up,
                    });
                }
            }
        }
        let (_, w_l) = odd.collapsed.project(&ph("c1"), outcome_vec(1))?;
        if w_l > TINY {
            out.push(RecycleBranch::Discarded { probability: odd.probability * w_l });
        }
    }

    if even.probability > TINY {
        // twin-diagonal projection: both copies on the same basis pattern
        let twin_bits: [[u8; 6]; 3] = [
            [0, 0, 1, 0, 0, 1],
            [0, 1, 0, 0, 1, 0],
            [1, 0, 0, 1, 0, 0],
        ];
        let mut amps = [Complex64::new(0.0, 0.0); 3];
        for (k, bits) in twin_bits.iter().enumerate() {
            // map to the register order of the collapsed state
            let order: Vec<u8> = even
                .collapsed
                .qubits()
                .iter()
                .map(|q| {
                    let idx = ["a0", "b0", "c0", "a1", "b1", "c1"]
                        .iter()
                        .position(|l| *l == q.label())
                        .expect("step labels");
                    bits[idx]
                })
                .collect();
            amps[k] = even.collapsed.amplitude(&order)?;
        }
        let w_twin: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if w_twin > TINY {
            let norm = w_twin.sqrt();
            // the gate's even herald flips the double-L component; undo it
            // with the same phase flip on a0 used everywhere else
            let state = StateVector::from_terms(
                vec![ph("a0"), ph("b0"), ph("c0")],
                &[
                    (&[0, 0, 1], amps[0] / norm),
                    (&[0, 1, 0], amps[1] / norm),
                    (&[1, 0, 0], -amps[2] / norm),
                ],
            )?;
            out.push(RecycleBranch::Recycled {
                state,
                probability: even.probability * w_twin,
            });
        }
        let w_rest = 1.0 - w_twin;
        if w_rest > TINY {
            out.push(RecycleBranch::Discarded { probability: even.probability * w_rest });
        }
    }

    let heralded = even.probability + odd.probability;
    if heralded < 1.0 - TINY.sqrt() {
        out.push(RecycleBranch::Loss { probability: 1.0 - heralded });
    }
    Ok(out)
}

fn relabel_second_copy(state: &StateVector) -> Result<StateVector, EcpError> {
    let mut s = state.clone();
    s.rename(&ph("a0"), ph("a1"))?;
    s.rename(&ph("b0"), ph("b1"))?;
    s.rename(&ph("c0"), ph("c1"))?;
    Ok(s)
}

/// Exact probability table evaluated by branch-tree enumeration through
/// the state-vector simulator, assembled with the same chain bookkeeping
/// as [`closed_form`](super::closed_form). Capped at 5 rounds, which is
/// as deep as generation parameters stay meaningful in the state vector.
pub fn exact_table(w: &WParams, n_rounds: u32) -> Result<ProbabilityTable, EcpError> {
    if !(1..=PIPELINE_MAX_ROUNDS).contains(&n_rounds) {
        return Err(EcpError::PipelineRoundCap(PIPELINE_MAX_ROUNDS));
    }
    let mode = InteractionMode::Ideal;
    let step1 = step1_enumerate(&w_input_pair(w)?, &mode)?;
    let mut p1o = 0.0;
    let mut p1e = 0.0;
    let mut three = None;
    let mut two = None;
    for b in &step1 {
        match b {
            Step1Branch::ThreePhoton { state, probability, .. } => {
                p1o += probability;
                three.get_or_insert_with(|| state.clone());
            }
            Step1Branch::TwoPhotonPairs { first, probability, .. } => {
                p1e += probability;
                two.get_or_insert_with(|| first.clone());
            }
            _ => {}
        }
    }
    let xi = p1o.min(p1e);

    // fall back to the canonical forms when a path has zero probability
    let three = match three {
        Some(s) => s,
        None => canonical_three_photon(w.beta, w.gamma, [ph("a0"), ph("b0"), ph("c0")])?,
    };
    let two = match two {
        Some(mut s) => {
            s.rename(&ph("a0"), ph("abar"))?;
            s.rename(&ph("b0"), ph("bbar"))?;
            s
        }
        None => canonical_two_photon(w.beta, w.gamma, [ph("abar"), ph("bbar")])?,
    };

    let step2 = step2_enumerate(&three, &two, &mode)?;
    let mut p1o_prime = 0.0;
    let mut p1e_prime = 0.0;
    let mut recycled = None;
    for b in &step2 {
        match b {
            Step2Branch::WSuccess { probability, .. } => p1o_prime += probability,
            Step2Branch::Recycled { state, probability, .. } => {
                p1e_prime += probability;
                recycled.get_or_insert_with(|| state.clone());
            }
            Step2Branch::Loss { .. } => {}
        }
    }

    let mut per_round = Vec::new();
    for _ in 2..=n_rounds {
        let (p_no, p_ne, next) = match &recycled {
            Some(state) => {
                let pair = state.tensor(&relabel_second_copy(state)?)?;
                let branches = recycle_round_enumerate(&pair, &mode)?;
                let mut p_no = 0.0;
                let mut p_ne = 0.0;
                let mut next = None;
                for b in &branches {
                    match b {
                        RecycleBranch::WSuccess { probability, .. } => p_no += probability,
                        RecycleBranch::Recycled { state, probability } => {
                            p_ne += probability;
                            next.get_or_insert_with(|| state.clone());
                        }
                        _ => {}
                    }
                }
                (p_no, p_ne, next)
            }
            None => (0.0, 0.0, None),
        };
        per_round.push((p_no, p_ne));
        recycled = next;
    }

    let total = assemble_total(xi, p1o_prime, p1e_prime, &per_round);
    Ok(ProbabilityTable { p1o, p1e, p1o_prime, p1e_prime, per_round, total, xi })
}
