//! Microbenchmarks for the hot kernels: one density-evolution recursion,
//! a full DE run, and one fault-injected decode trial.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use faid_core::alphabet::{EnsembleSpec, FaultModel, MessageAlphabet, NoiseParams};
use faid_core::de::{de_iterate, DeOptions, DeRunner};
use faid_core::decoder::DecoderSpec;
use faid_core::lut::tables;
use faid_core::sim::code::random_regular_code;
use faid_core::sim::{noisy_decode, CodewordMode, TrialConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn oms_spec() -> DecoderSpec {
    let alphabet = MessageAlphabet::new(3, 1).unwrap();
    DecoderSpec::new(
        "offset-ms",
        tables::offset_min_sum(&alphabet).unwrap(),
        EnsembleSpec::new(3, 5).unwrap(),
    )
    .unwrap()
}

fn de_benches(c: &mut Criterion) {
    let spec = oms_spec();
    let noise = NoiseParams::uniform(FaultModel::SignPreserving, 1e-2).unwrap();

    c.bench_function("de_single_recursion", |b| {
        let mut runner = DeRunner::new(0.06, &spec, &noise).unwrap();
        b.iter(|| black_box(runner.step().unwrap()));
    });

    c.bench_function("de_full_run_alpha_06", |b| {
        let opts = DeOptions::default();
        b.iter(|| black_box(de_iterate(0.06, &spec, &noise, &opts).unwrap()));
    });
}

fn decode_benches(c: &mut Criterion) {
    let spec = oms_spec();
    let code = random_regular_code(155, 3, 5, 1).unwrap();
    let cfg = TrialConfig {
        alpha: 0.04,
        noise: NoiseParams::uniform(FaultModel::SignPreserving, 0.05).unwrap(),
        max_iterations: 100,
        seed: 1,
        codeword_mode: CodewordMode::AllZero,
        early_stop: true,
    };
    c.bench_function("noisy_decode_155", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut y = vec![1i8; code.n()];
        for v in y.iter_mut().step_by(25) {
            *v = -1;
        }
        b.iter(|| black_box(noisy_decode(&code, &y, &spec, &cfg, &mut rng).unwrap()));
    });
}

criterion_group!(benches, de_benches, decode_benches);
criterion_main!(benches);
