//! Seeded Monte Carlo runs of the full concentration pipeline.
//!
//! Every attempt samples one branch of the corresponding exact
//! enumeration against its cumulative probabilities, using a dedicated
//! ChaCha stream derived from `(master seed, round, stage, attempt)`.
//! Outputs of one branch class are identical states, so pools carry one
//! representative per class with a multiplicity instead of a million
//! clones.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::protocol::{
    recycle_round_enumerate, step1_enumerate, step2_enumerate, w_input_pair, RecycleBranch,
    Step1Branch, Step2Branch, PIPELINE_MAX_ROUNDS,
};
use super::{EcpError, WParams};
use crate::cavity::InteractionMode;
use crate::statevec::{QubitId, StateVector};

/// Resources of one generation, as `(representative state, multiplicity)`
/// classes. Generation `g` states carry `β^(2^g)`-type parameters;
/// generation 0 re-uses the input `β`.
#[derive(Debug, Clone)]
pub struct ResourcePool {
    pub generation: u32,
    pub three_photon: Vec<(StateVector, u64)>,
    pub two_photon: Vec<(StateVector, u64)>,
}

impl ResourcePool {
    fn empty(generation: u32) -> Self {
        Self { generation, three_photon: Vec::new(), two_photon: Vec::new() }
    }

    fn three_total(&self) -> u64 {
        self.three_photon.iter().map(|(_, n)| n).sum()
    }
}

/// Step-2 enumeration that refuses resources from different generations.
pub fn step2_checked(
    three: &StateVector,
    three_generation: u32,
    two: &StateVector,
    two_generation: u32,
    mode: &InteractionMode,
) -> Result<Vec<Step2Branch>, EcpError> {
    if three_generation != two_generation {
        return Err(EcpError::GenerationMismatch(three_generation, two_generation));
    }
    step2_enumerate(three, two, mode)
}

/// Per-round bookkeeping of one ensemble run.
#[derive(Debug, Clone)]
pub struct RoundLedger {
    /// 1-based round index.
    pub round_index: u32,
    /// Resource states consumed by this round's gate attempts.
    pub consumed: u64,
    /// Pair attempts (step 1 in round 1, recycling attempts later).
    pub attempts: u64,
    /// Step-2 pairings performed (round 1 only).
    pub pairing_attempts: u64,
    /// Standard W states produced.
    pub successes: u64,
    /// Three-photon resources carried into the next round.
    pub recycled_three_photon: u64,
    /// Two-photon resources pooled this round (both pairs of an even
    /// herald are counted, whatever the pairing convention consumes).
    pub recycled_two_photon: u64,
    pub discarded: u64,
    pub losses: u64,
    /// Resources left unpaired when the binding pool ran out.
    pub surplus_three_photon: u64,
    pub surplus_two_photon: u64,
    /// Empirical branch frequencies of this round.
    pub empirical_probabilities: BTreeMap<String, f64>,
    /// Distinct success states observed (one per branch class).
    pub success_states: Vec<StateVector>,
}

impl RoundLedger {
    fn new(round_index: u32) -> Self {
        Self {
            round_index,
            consumed: 0,
            attempts: 0,
            pairing_attempts: 0,
            successes: 0,
            recycled_three_photon: 0,
            recycled_two_photon: 0,
            discarded: 0,
            losses: 0,
            surplus_three_photon: 0,
            surplus_two_photon: 0,
            empirical_probabilities: BTreeMap::new(),
            success_states: Vec::new(),
        }
    }
}

/// Ensemble knobs left open by the protocol description.
#[derive(Debug, Clone, Default)]
pub struct EnsembleOptions {
    /// Count both photon pairs of an even step-1 herald as pairable
    /// step-2 resources. The default counts one per herald, which is the
    /// accounting that realizes `ξ = min{p1o, p1e}` exactly.
    pub count_both_pairs: bool,
    /// Carry an odd leftover three-photon state into the next round's
    /// pool instead of dropping it as surplus. Off by default: resources
    /// are only ever paired within their own generation.
    pub cross_generation_pairing: bool,
}

fn stream_id(round: u32, stage: u32, attempt: u64) -> u64 {
    ((round as u64) << 56) | ((stage as u64) << 48) | attempt
}

fn draw(seed: u64, round: u32, stage: u32, attempt: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(round, stage, attempt));
    rng.gen::<f64>()
}

/// Walk a cumulative distribution; draws past the accumulated mass (float
/// dust, or the implicit tail) land on the last entry.
fn pick<T>(entries: &[(f64, T)], u: f64) -> &T {
    let mut acc = 0.0;
    for (p, t) in entries {
        acc += p;
        if u < acc {
            return t;
        }
    }
    &entries.last().expect("non-empty branch list").1
}

/// Run the full pipeline on `n_pairs` fresh input pairs for `n_rounds`
/// rounds with the default options.
pub fn run_ensemble(
    w: &WParams,
    n_pairs: u64,
    n_rounds: u32,
    mode: &InteractionMode,
    seed: u64,
) -> Result<Vec<RoundLedger>, EcpError> {
    run_ensemble_with(w, n_pairs, n_rounds, mode, seed, &EnsembleOptions::default())
}

pub fn run_ensemble_with(
    w: &WParams,
    n_pairs: u64,
    n_rounds: u32,
    mode: &InteractionMode,
    seed: u64,
    options: &EnsembleOptions,
) -> Result<Vec<RoundLedger>, EcpError> {
    if n_pairs < 2 {
        return Err(EcpError::TooFewPairs(2));
    }
    if !(1..=PIPELINE_MAX_ROUNDS).contains(&n_rounds) {
        return Err(EcpError::PipelineRoundCap(PIPELINE_MAX_ROUNDS));
    }

    let mut ledgers = Vec::new();
    let mut next_pool = ResourcePool::empty(1);
    let mut carried: Option<StateVector> = None;

    // ---- round 1: step 1 on fresh pairs, step 2 on the pooled outputs
    {
        let mut ledger = RoundLedger::new(1);
        ledger.attempts = n_pairs;
        ledger.consumed = 2 * n_pairs;

        let branches = step1_enumerate(&w_input_pair(w)?, mode)?;
        let table: Vec<(f64, &Step1Branch)> =
            branches.iter().map(|b| (b.probability(), b)).collect();

        let mut three_classes: Vec<(StateVector, u64)> = Vec::new();
        let mut two_classes: Vec<(StateVector, u64)> = Vec::new();
        let mut even_heralds = 0u64;
        for attempt in 0..n_pairs {
            match pick(&table, draw(seed, 1, 0, attempt)) {
                Step1Branch::ThreePhoton { state, .. } => {
                    bump(&mut three_classes, state);
                }
                Step1Branch::TwoPhotonPairs { first, second, .. } => {
                    even_heralds += 1;
                    bump(&mut two_classes, first);
                    bump(&mut two_classes, second);
                }
                Step1Branch::Discarded { .. } => ledger.discarded += 1,
                Step1Branch::Loss { .. } => ledger.losses += 1,
            }
        }
        let three_total: u64 = three_classes.iter().map(|(_, n)| n).sum();
        ledger.recycled_two_photon = 2 * even_heralds;
        ledger.empirical_probabilities.insert("p1o".into(), ratio(three_total, n_pairs));
        ledger.empirical_probabilities.insert("p1e".into(), ratio(even_heralds, n_pairs));

        let eligible_two = if options.count_both_pairs { 2 * even_heralds } else { even_heralds };
        let pairings = three_total.min(eligible_two);
        ledger.pairing_attempts = pairings;
        ledger.surplus_three_photon = three_total - pairings;
        ledger.surplus_two_photon = 2 * even_heralds - pairings;

        if pairings > 0 {
            let three_repr = &three_classes[0].0;
            let mut two_repr = two_classes[0].0.clone();
            relabel_pair(&mut two_repr)?;
            let branches2 = step2_checked(three_repr, 1, &two_repr, 1, mode)?;
            let table2: Vec<(f64, &Step2Branch)> =
                branches2.iter().map(|b| (b.probability(), b)).collect();
            for attempt in 0..pairings {
                match pick(&table2, draw(seed, 1, 1, attempt)) {
                    Step2Branch::WSuccess { state, .. } => {
                        ledger.successes += 1;
                        remember(&mut ledger.success_states, state);
                    }
                    Step2Branch::Recycled { state, .. } => {
                        bump(&mut next_pool.three_photon, state);
                    }
                    Step2Branch::Loss { .. } => ledger.losses += 1,
                }
            }
            ledger.empirical_probabilities.insert(
                "p1o_prime".into(),
                ratio(ledger.successes, pairings),
            );
            ledger.empirical_probabilities.insert(
                "p1e_prime".into(),
                ratio(next_pool.three_total(), pairings),
            );
        }
        ledger.recycled_three_photon = next_pool.three_total();
        ledger
            .empirical_probabilities
            .insert("success_rate".into(), ratio(ledger.successes, n_pairs));
        ledgers.push(ledger);
    }

    // ---- rounds 2..: pair squared-parameter states through the device
    for round in 2..=n_rounds {
        let mut ledger = RoundLedger::new(round);
        let mut pool = std::mem::replace(&mut next_pool, ResourcePool::empty(round));
        if let Some(extra) = carried.take() {
            bump(&mut pool.three_photon, &extra);
        }
        let total = pool.three_total();
        let attempts = total / 2;
        let leftover = total % 2;
        ledger.attempts = attempts;
        ledger.consumed = 2 * attempts;

        if leftover > 0 {
            if options.cross_generation_pairing {
                // carry the representative forward; it will pair with a
                // next-generation state
                carried = pool.three_photon.iter().find(|(_, n)| *n > 0).map(|(s, _)| s.clone());
            } else {
                ledger.surplus_three_photon = leftover;
            }
        }

        if attempts > 0 {
            let repr = &pool.three_photon[0].0;
            let mut second = repr.clone();
            relabel_copy(&mut second)?;
            let pair = repr.tensor(&second)?;
            let branches = recycle_round_enumerate(&pair, mode)?;
            let table: Vec<(f64, &RecycleBranch)> =
                branches.iter().map(|b| (b.probability(), b)).collect();
            for attempt in 0..attempts {
                match pick(&table, draw(seed, round, 0, attempt)) {
                    RecycleBranch::WSuccess { state, .. } => {
                        ledger.successes += 1;
                        remember(&mut ledger.success_states, state);
                    }
                    RecycleBranch::Recycled { state, .. } => {
                        bump(&mut next_pool.three_photon, state);
                    }
                    RecycleBranch::Discarded { .. } => ledger.discarded += 1,
                    RecycleBranch::Loss { .. } => ledger.losses += 1,
                }
            }
            ledger.empirical_probabilities.insert("p_no".into(), ratio(ledger.successes, attempts));
            ledger
                .empirical_probabilities
                .insert("p_ne".into(), ratio(next_pool.three_total(), attempts));
        }
        ledger.recycled_three_photon = next_pool.three_total();
        ledger
            .empirical_probabilities
            .insert("success_rate".into(), ratio(ledger.successes, attempts.max(1)));
        ledgers.push(ledger);
    }
    Ok(ledgers)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Add one instance of `state` to a class list, matching classes by
/// amplitude equality.
fn bump(classes: &mut Vec<(StateVector, u64)>, state: &StateVector) {
    for (repr, count) in classes.iter_mut() {
        if same_state(repr, state) {
            *count += 1;
            return;
        }
    }
    classes.push((state.clone(), 1));
}

fn remember(states: &mut Vec<StateVector>, state: &StateVector) {
    if !states.iter().any(|s| same_state(s, state)) {
        states.push(state.clone());
    }
}

fn same_state(a: &StateVector, b: &StateVector) -> bool {
    a.qubits() == b.qubits()
        && a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .all(|(x, y)| (x - y).norm_sqr() < 1e-24)
}

fn relabel_pair(two: &mut StateVector) -> Result<(), EcpError> {
    let labels: Vec<String> = two.qubits().iter().map(|q| q.label().to_string()).collect();
    for (old, new) in labels.iter().zip(["abar", "bbar"]) {
        two.rename(&QubitId::photon(old), QubitId::photon(new))?;
    }
    Ok(())
}

fn relabel_copy(state: &mut StateVector) -> Result<(), EcpError> {
    for (old, new) in [("a0", "a1"), ("b0", "b1"), ("c0", "c1")] {
        state.rename(&QubitId::photon(old), QubitId::photon(new))?;
    }
    Ok(())
}
