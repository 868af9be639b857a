//! Closed-form protocol probabilities.
//!
//! With `x_n = |β|^(2^n)` and `y_n = |γ|^(2^n)`, the round-n branch
//! probabilities are
//!
//! ```text
//! p_no = 3 x_n y_n / (2 x_n + y_n)²
//! p_ne = (2 x_{n+1} + y_{n+1}) / (2 x_n + y_n)²        (n ≥ 2)
//! ```
//!
//! and the cumulative yield is the chain
//! `ξ·[p'_1o + p'_1e·(p_2o + p_2e·(p_3o + …))]` with `ξ = min{p_1o, p_1e}`.
//! The generation parameters are carried as log-magnitudes so deep
//! recursion does not underflow.

use super::{EcpError, WParams};

/// Hard cap on the chain depth; `|β|^(2^30)` is far below any meaningful
/// contribution, so longer chains are rejected rather than silently
/// truncated.
pub const MAX_ROUNDS: u32 = 30;

/// Closed-form probabilities of the protocol for one parameter triple.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    /// Step-1 odd-herald path (three-photon output kept).
    pub p1o: f64,
    /// Step-1 even-herald path (two photon pairs kept).
    pub p1e: f64,
    /// Step-2 odd-herald path: standard W state.
    pub p1o_prime: f64,
    /// Step-2 even-herald path: squared-parameter recycling state.
    pub p1e_prime: f64,
    /// `(p_no, p_ne)` for rounds `n = 2..=n_rounds`.
    pub per_round: Vec<(f64, f64)>,
    /// Cumulative W-state yield truncated at `n_rounds`.
    pub total: f64,
    /// Binding resource rate `min{p1o, p1e}` pairing the two step-1 outputs.
    pub xi: f64,
}

/// Shared chain assembly: identical bookkeeping for the closed-form and
/// the exact branch-tree routes.
pub(super) fn assemble_total(
    xi: f64,
    p1o_prime: f64,
    p1e_prime: f64,
    per_round: &[(f64, f64)],
) -> f64 {
    let mut total = xi * p1o_prime;
    let mut chain = xi * p1e_prime;
    for (p_no, p_ne) in per_round {
        total += chain * p_no;
        chain *= p_ne;
    }
    total
}

/// Stable `ln(2·e^lx + e^ly)`.
fn log_sum(lx: f64, ly: f64) -> f64 {
    let two_lx = lx + std::f64::consts::LN_2;
    let m = two_lx.max(ly);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + ((two_lx - m).exp() + (ly - m).exp()).ln()
}

/// Round-n branch probabilities from log-magnitude generation parameters
/// `lx = ln x_n`, `ly = ln y_n`.
fn round_probabilities(lx: f64, ly: f64) -> (f64, f64) {
    let denom = 2.0 * log_sum(lx, ly);
    if denom == f64::NEG_INFINITY {
        // both parameters underflowed to zero: nothing left to distill
        return (0.0, 0.0);
    }
    let p_no = if lx == f64::NEG_INFINITY || ly == f64::NEG_INFINITY {
        0.0
    } else {
        3.0 * (lx + ly - denom).exp()
    };
    let p_ne = (log_sum(2.0 * lx, 2.0 * ly) - denom).exp();
    (p_no, p_ne)
}

/// Evaluate the closed-form probability table for `n_rounds ≥ 1`.
pub fn closed_form(w: &WParams, n_rounds: u32) -> Result<ProbabilityTable, EcpError> {
    if !(1..=MAX_ROUNDS).contains(&n_rounds) {
        return Err(EcpError::TooManyRounds(n_rounds, MAX_ROUNDS));
    }
    let (a2, b2, g2) = w.weights();
    let p1o = a2 * (g2 + 2.0 * b2);
    let p1e = (g2 + b2) * (g2 + b2);
    let den = (g2 + 2.0 * b2) * (g2 + b2);
    let (p1o_prime, p1e_prime) = if den > 0.0 {
        (
            3.0 * g2 * b2 / den,
            (g2 * g2 + 2.0 * b2 * b2) / den,
        )
    } else {
        // β = γ = 0: nothing to concentrate
        (0.0, 1.0)
    };
    let xi = p1o.min(p1e);

    let mut per_round = Vec::new();
    let mut lx = if b2 > 0.0 { b2.ln() } else { f64::NEG_INFINITY };
    let mut ly = if g2 > 0.0 { g2.ln() } else { f64::NEG_INFINITY };
    for _ in 2..=n_rounds {
        lx *= 2.0;
        ly *= 2.0;
        per_round.push(round_probabilities(lx, ly));
    }
    let total = assemble_total(xi, p1o_prime, p1e_prime, &per_round);
    Ok(ProbabilityTable { p1o, p1e, p1o_prime, p1e_prime, per_round, total, xi })
}

/// Real non-negative parameters satisfying the balanced condition
/// `p1o = p1e` at a given `β²`. With `b = β²` and `s = β² + γ²` the
/// condition reads `2s² + s(b − 1) − b = 0`, solved by
/// `s = [(1 − b) + √(b² + 6b + 1)]/4`; feasibility requires `s ≥ b`,
/// which bounds `b ≤ 2/3`.
pub fn balanced_alpha(beta_sq: f64) -> Result<WParams, EcpError> {
    if !(beta_sq > 0.0 && beta_sq <= 2.0 / 3.0 + 1e-12) {
        return Err(EcpError::InfeasibleBetaSq(beta_sq));
    }
    let b = beta_sq;
    let s = ((1.0 - b) + (b * b + 6.0 * b + 1.0).sqrt()) / 4.0;
    let gamma_sq = (s - b).max(0.0);
    let alpha_sq = 1.0 - s;
    WParams::from_weights(alpha_sq, b, gamma_sq)
}
