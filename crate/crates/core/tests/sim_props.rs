//! Cross-model simulation properties at matched noise levels.

mod common;

use common::*;
use faid_core::alphabet::{FaultModel, NoiseParams};
use faid_core::sim::{run_ber, CodewordMode, TrialConfig};

#[test]
fn full_depth_noise_hurts_at_least_as_much_as_sign_preserving() {
    let code = tanner_code();
    let spec = spec_for("offset-ms");
    let trials = 20_000;
    for (i, alpha) in [0.02, 0.04].into_iter().enumerate() {
        let mut results = Vec::new();
        for model in [FaultModel::SignPreserving, FaultModel::FullDepth] {
            let cfg = TrialConfig {
                alpha,
                noise: NoiseParams::uniform(model, 0.02).unwrap(),
                max_iterations: 100,
                seed: 0x51 + i as u64,
                codeword_mode: CodewordMode::AllZero,
                early_stop: true,
            };
            results.push(run_ber(&code, &spec, &cfg, trials).unwrap());
        }
        let (sp, fd) = (&results[0], &results[1]);
        let sigma = (sp.stderr_ber_frame().powi(2) + fd.stderr_ber_frame().powi(2)).sqrt();
        assert!(
            fd.ber() >= sp.ber() - 3.0 * sigma,
            "alpha {alpha}: fd {} vs sp {}",
            fd.ber(),
            sp.ber()
        );
    }
}

#[test]
fn early_stopping_shortens_runs_below_threshold() {
    let code = tanner_code();
    let spec = spec_for("offset-ms");
    let base = TrialConfig {
        alpha: 0.02,
        noise: NoiseParams::uniform(FaultModel::SignPreserving, 0.02).unwrap(),
        max_iterations: 100,
        seed: 9,
        codeword_mode: CodewordMode::AllZero,
        early_stop: true,
    };
    let stopped = run_ber(&code, &spec, &base, 2000).unwrap();
    let full = run_ber(
        &code,
        &spec,
        &TrialConfig {
            early_stop: false,
            ..base
        },
        2000,
    )
    .unwrap();
    assert!(
        stopped.early_stops > 1800,
        "early stopping should fire below threshold"
    );
    assert!(stopped.total_iterations < full.total_iterations / 4);
}
