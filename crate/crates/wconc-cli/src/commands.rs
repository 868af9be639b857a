//! The five analysis commands. Each takes a resolved config and a sink;
//! output is deterministic byte-for-byte for a fixed config and seed.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wconc::cavity::CavityParams;
use wconc::ecp::{
    balanced_alpha, closed_form, exact_table, run_ensemble_with, EnsembleOptions, WParams,
};
use wconc::pcg::gate_metrics;
use wconc::InteractionMode;

use crate::CliError;

/// Format with 12 significant digits and a plain decimal point.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let exp = x.abs().log10().floor() as i32;
    let prec = (11 - exp).clamp(0, 40) as usize;
    format!("{:.*}", prec, x)
}

fn grid(min: f64, max: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step.is_finite() && step > 0.0) || !min.is_finite() || !max.is_finite() || max < min {
        return Err(CliError::Invalid(format!("bad grid [{min}, {max}] step {step}")));
    }
    let mut points = Vec::new();
    let mut i = 0u64;
    loop {
        let x = min + i as f64 * step;
        if x > max + step * 0.5 {
            break;
        }
        points.push(x.min(max));
        i += 1;
    }
    Ok(points)
}

#[derive(Debug, Clone)]
pub struct Fig5Config {
    pub beta_sq_min: f64,
    pub beta_sq_max: f64,
    pub beta_sq_step: f64,
}

impl Default for Fig5Config {
    fn default() -> Self {
        Self { beta_sq_min: 0.01, beta_sq_max: 0.66, beta_sq_step: 0.01 }
    }
}

/// Total success probability vs `β²` under the balanced condition
/// `p1o = p1e`, for one, two, and three rounds.
pub fn cmd_fig5(cfg: &Fig5Config, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "beta_sq,alpha_sq,gamma_sq,p_total_n1,p_total_n2,p_total_n3")?;
    for beta_sq in grid(cfg.beta_sq_min, cfg.beta_sq_max, cfg.beta_sq_step)? {
        match balanced_alpha(beta_sq) {
            Ok(w) => {
                let (a2, _, g2) = w.weights();
                let totals: Vec<String> = (1..=3)
                    .map(|n| closed_form(&w, n).map(|t| fmt_sig(t.total)))
                    .collect::<Result<_, _>>()?;
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    fmt_sig(beta_sq),
                    fmt_sig(a2),
                    fmt_sig(g2),
                    totals[0],
                    totals[1],
                    totals[2],
                )?;
            }
            // out-of-range grid point: flag the row, keep going
            Err(_) => writeln!(out, "{},nan,nan,nan,nan,nan", fmt_sig(beta_sq))?,
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Fig6Config {
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub ratio_step: f64,
    pub ks_min: f64,
    pub ks_max: f64,
    pub ks_step: f64,
    pub gamma: f64,
}

impl Default for Fig6Config {
    fn default() -> Self {
        Self {
            ratio_min: 0.5,
            ratio_max: 3.0,
            ratio_step: 0.05,
            ks_min: 0.0,
            ks_max: 1.0,
            ks_step: 0.02,
            gamma: 0.1,
        }
    }
}

/// Gate fidelity and efficiency over the coupling/leakage grid. Rows are
/// ordered by coupling ratio, then leakage.
pub fn cmd_fig6(cfg: &Fig6Config, out: &mut dyn Write) -> Result<(), CliError> {
    writeln!(out, "g_over_ks_plus_k,ks_over_k,fidelity_even,fidelity_odd,efficiency")?;
    for ratio in grid(cfg.ratio_min, cfg.ratio_max, cfg.ratio_step)? {
        for ks in grid(cfg.ks_min, cfg.ks_max, cfg.ks_step)? {
            let params = CavityParams::from_coupling_ratio(ratio, ks, cfg.gamma);
            let m = gate_metrics(&params)?;
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt_sig(ratio),
                fmt_sig(ks),
                fmt_sig(m.fidelity_even),
                fmt_sig(m.fidelity_odd),
                fmt_sig(m.efficiency),
            )?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct MetricsConfig {
    pub ratio: f64,
    pub ks: f64,
    pub gamma: f64,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self { ratio: 2.4, ks: 0.0, gamma: 0.1 }
    }
}

/// Three-line gate report at a single parameter point.
pub fn cmd_metrics(cfg: &MetricsConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let params = CavityParams::from_coupling_ratio(cfg.ratio, cfg.ks, cfg.gamma);
    let m = gate_metrics(&params)?;
    writeln!(out, "F_even = {}", fmt_sig(m.fidelity_even))?;
    writeln!(out, "F_odd  = {}", fmt_sig(m.fidelity_odd))?;
    writeln!(out, "eta    = {}", fmt_sig(m.efficiency))?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub alpha_sq: f64,
    pub beta_sq: f64,
    pub gamma_sq: f64,
    pub pairs: u64,
    pub rounds: u32,
    pub seed: u64,
    /// Cavity point for lossy mode; `None` runs ideal.
    pub lossy: Option<MetricsConfig>,
    pub count_both_pairs: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha_sq: 1.0 / 3.0,
            beta_sq: 1.0 / 3.0,
            gamma_sq: 1.0 / 3.0,
            pairs: 10_000,
            rounds: 1,
            seed: 1,
            lossy: None,
            count_both_pairs: false,
        }
    }
}

/// Monte Carlo ensemble run; one CSV row of ledger counts per round.
pub fn cmd_run(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let w = WParams::from_weights(cfg.alpha_sq, cfg.beta_sq, cfg.gamma_sq)?;
    let mode = match &cfg.lossy {
        None => InteractionMode::Ideal,
        Some(p) => {
            InteractionMode::Lossy(CavityParams::from_coupling_ratio(p.ratio, p.ks, p.gamma))
        }
    };
    let options = EnsembleOptions { count_both_pairs: cfg.count_both_pairs, ..Default::default() };
    let ledgers = run_ensemble_with(&w, cfg.pairs, cfg.rounds, &mode, cfg.seed, &options)?;
    writeln!(out, "round,consumed,successes,recycled3,recycled2,discarded,losses,empirical_p")?;
    for l in &ledgers {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            l.round_index,
            l.consumed,
            l.successes,
            l.recycled_three_photon,
            l.recycled_two_photon,
            l.discarded,
            l.losses,
            fmt_sig(l.empirical_probabilities.get("success_rate").copied().unwrap_or(0.0)),
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct CompareConfig {
    pub trials: u32,
    pub trajectories: u64,
    pub seed: u64,
    pub rounds: u32,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self { trials: 10, trajectories: 10_000, seed: 1, rounds: 3 }
    }
}

/// Outcome of `compare`: worst deviations over all trials.
#[derive(Debug, Clone, Copy)]
pub struct CompareOutcome {
    pub max_closed_vs_exact: f64,
    pub max_monte_carlo_z: f64,
}

impl CompareOutcome {
    pub fn passed(&self) -> bool {
        self.max_closed_vs_exact <= 1e-8 && self.max_monte_carlo_z <= 5.0
    }
}

/// Seeded random weight triple, kept away from the degenerate edges.
pub fn random_weights(rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    loop {
        let a: f64 = rng.gen();
        let b: f64 = rng.gen();
        let g: f64 = rng.gen();
        let s = a + b + g;
        let (a, b, g) = (a / s, b / s, g / s);
        if a.min(b).min(g) >= 0.02 {
            return (a, b, g);
        }
    }
}

/// Cross-validate closed form, exact enumeration, and Monte Carlo on
/// seeded random parameter triples.
pub fn cmd_compare(cfg: &CompareConfig, out: &mut dyn Write) -> Result<CompareOutcome, CliError> {
    if cfg.trajectories < 10_000 {
        return Err(CliError::Invalid(format!(
            "compare needs at least 10000 trajectories, got {}",
            cfg.trajectories
        )));
    }
    if cfg.rounds < 1 || cfg.rounds > 3 {
        return Err(CliError::Invalid("compare supports 1 to 3 rounds".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst_dev = 0.0f64;
    let mut worst_z = 0.0f64;
    for trial in 0..cfg.trials {
        let (a2, b2, g2) = random_weights(&mut rng);
        let w = WParams::from_weights(a2, b2, g2)?;
        let closed = closed_form(&w, cfg.rounds)?;
        let exact = exact_table(&w, cfg.rounds)?;
        let mut dev = [
            (closed.p1o - exact.p1o).abs(),
            (closed.p1e - exact.p1e).abs(),
            (closed.p1o_prime - exact.p1o_prime).abs(),
            (closed.p1e_prime - exact.p1e_prime).abs(),
        ]
        .into_iter()
        .fold(0.0f64, f64::max);
        for n in 1..=cfg.rounds {
            let tc = closed_form(&w, n)?.total;
            let te = exact_table(&w, n)?.total;
            dev = dev.max((tc - te).abs());
        }
        worst_dev = worst_dev.max(dev);

        let ledgers = run_ensemble_with(
            &w,
            cfg.trajectories,
            1,
            &InteractionMode::Ideal,
            cfg.seed ^ (trial as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
            &EnsembleOptions::default(),
        )?;
        let rate = ledgers[0].empirical_probabilities["success_rate"];
        let expected = closed_form(&w, 1)?.total;
        let sigma = (expected * (1.0 - expected) / cfg.trajectories as f64).sqrt();
        let z = if sigma > 0.0 { (rate - expected).abs() / sigma } else { 0.0 };
        worst_z = worst_z.max(z);

        writeln!(
            out,
            "trial {:>2}: weights=({}, {}, {})",
            trial + 1,
            fmt_sig(a2),
            fmt_sig(b2),
            fmt_sig(g2),
        )?;
        writeln!(
            out,
            "  closed    p1o={} p1e={} p1o'={} p1e'={} total={}",
            fmt_sig(closed.p1o),
            fmt_sig(closed.p1e),
            fmt_sig(closed.p1o_prime),
            fmt_sig(closed.p1e_prime),
            fmt_sig(closed.total),
        )?;
        writeln!(
            out,
            "  exact     p1o={} p1e={} p1o'={} p1e'={} total={}",
            fmt_sig(exact.p1o),
            fmt_sig(exact.p1e),
            fmt_sig(exact.p1o_prime),
            fmt_sig(exact.p1e_prime),
            fmt_sig(exact.total),
        )?;
        writeln!(
            out,
            "  monte carlo round-1 rate={} expected={} (z={:.2})",
            fmt_sig(rate),
            fmt_sig(expected),
            z,
        )?;
        writeln!(out, "  max closed-vs-exact deviation: {:.3e}", dev)?;
    }
    let outcome = CompareOutcome { max_closed_vs_exact: worst_dev, max_monte_carlo_z: worst_z };
    writeln!(
        out,
        "compare: {} ({} trials, max deviation {:.3e}, max |z| {:.2})",
        if outcome.passed() { "OK" } else { "FAILED" },
        cfg.trials,
        outcome.max_closed_vs_exact,
        outcome.max_monte_carlo_z,
    )?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0 / 6.0), "0.166666666667");
        assert_eq!(fmt_sig(2.4), "2.40000000000");
        assert_eq!(fmt_sig(f64::NAN), "nan");
    }

    #[test]
    fn grid_is_inclusive_and_validated() {
        let g = grid(0.01, 0.66, 0.01).unwrap();
        assert_eq!(g.len(), 66);
        assert!((g[0] - 0.01).abs() < 1e-12);
        assert!((g[65] - 0.66).abs() < 1e-9);
        assert!(grid(0.0, 1.0, 0.0).is_err());
        assert!(grid(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn fig5_default_shape() {
        let mut buf = Vec::new();
        cmd_fig5(&Fig5Config::default(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "beta_sq,alpha_sq,gamma_sq,p_total_n1,p_total_n2,p_total_n3");
        assert_eq!(lines.len(), 67);
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn fig5_flags_infeasible_rows() {
        let cfg = Fig5Config { beta_sq_min: 0.6, beta_sq_max: 0.7, beta_sq_step: 0.05 };
        let mut buf = Vec::new();
        cmd_fig5(&cfg, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().any(|l| l.contains("nan")), "{text}");
        assert!(text.lines().count() > 2);
    }

    #[test]
    fn metrics_three_lines() {
        let mut buf = Vec::new();
        cmd_metrics(&MetricsConfig::default(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("F_even = "));
        assert!(lines[1].starts_with("F_odd  = "));
        assert!(lines[2].starts_with("eta    = "));
    }

    #[test]
    fn run_csv_shape() {
        let cfg = RunConfig { pairs: 200, rounds: 2, ..Default::default() };
        let mut buf = Vec::new();
        cmd_run(&cfg, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "round,consumed,successes,recycled3,recycled2,discarded,losses,empirical_p"
        );
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,400,"));
    }

    #[test]
    fn compare_small_run_passes() {
        let cfg = CompareConfig { trials: 2, trajectories: 10_000, seed: 5, rounds: 2 };
        let mut buf = Vec::new();
        let outcome = cmd_compare(&cfg, &mut buf).unwrap();
        assert!(outcome.passed(), "{:?}", outcome);
        assert!(outcome.max_closed_vs_exact < 1e-10);
    }

    #[test]
    fn compare_validates_trajectories() {
        let cfg = CompareConfig { trajectories: 100, ..Default::default() };
        let mut buf = Vec::new();
        assert!(matches!(cmd_compare(&cfg, &mut buf), Err(CliError::Invalid(_))));
    }
}
