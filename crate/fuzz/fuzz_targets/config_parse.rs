#![no_main]

use libfuzzer_sys::fuzz_target;

// The config parser is the only surface that consumes untrusted text.
// Parsing must never panic, and every typed getter must fail cleanly on
// whatever key/value survives parsing.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = wconc_cli::config::parse_config(text) else {
        return;
    };
    for key in [
        "seed",
        "rounds",
        "trajectories",
        "pairs",
        "trials",
        "mode",
        "ratio",
        "ks",
        "gamma",
        "alpha_sq",
        "beta_sq",
        "gamma_sq",
        "beta_sq_min",
        "beta_sq_max",
        "beta_sq_step",
        "ratio_min",
        "ratio_max",
        "ratio_step",
        "ks_min",
        "ks_max",
        "ks_step",
        "count_both_pairs",
    ] {
        let _ = cfg.get(key);
        let _ = cfg.get_u32(key);
        let _ = cfg.get_u64(key);
        let _ = cfg.get_f64(key);
        let _ = cfg.get_bool(key);
    }
});
