//! Finite-length fault-injected Monte Carlo simulation.
//!
//! Trials run a flooding-schedule decoder on a Tanner graph, corrupting
//! every CN output, VN output and APP value independently through the
//! configured transition matrix. Each trial draws from its own counter
//! stream `(seed, trial index)`, and all aggregation is over integer
//! counters, so results are bit-identical for any worker count.

pub mod code;

use crate::alphabet::{FaultModel, NoiseParams};
use crate::decoder::DecoderSpec;
use crate::fault::{FaultError, TransitionMatrix};
use code::ParityCheckCode;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Fault(#[from] FaultError),
    #[error("code has a variable of degree {got}, decoder expects {expected}")]
    DegreeMismatch { got: usize, expected: usize },
    #[error("received vector length {got}, code length {n}")]
    LengthMismatch { got: usize, n: usize },
    #[error("trial count must be at least 1")]
    NoTrials,
}

/// Codeword selection for a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodewordMode {
    AllZero,
    RandomCodeword,
}

/// Per-run simulation protocol.
#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub alpha: f64,
    pub noise: NoiseParams,
    pub max_iterations: u32,
    pub seed: u64,
    pub codeword_mode: CodewordMode,
    /// Halt a trial as soon as the (noisy) APP hard decision satisfies
    /// every parity check.
    pub early_stop: bool,
}

impl TrialConfig {
    pub fn new(alpha: f64, noise: NoiseParams, seed: u64) -> Self {
        Self {
            alpha,
            noise,
            max_iterations: 100,
            seed,
            codeword_mode: CodewordMode::AllZero,
            early_stop: true,
        }
    }
}

/// Bernoulli(p) event stream sampled by geometric skips: one uniform draw
/// per event instead of one per opportunity. Distributionally identical to
/// drawing every opportunity independently.
struct EventSkipper {
    ln_keep: f64, // ln(1 - p); NaN marks p = 0 (never fires), 0 marks p = 1
    skip: u64,
}

impl EventSkipper {
    fn new<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Self {
        let ln_keep = if p <= 0.0 {
            f64::NAN
        } else if p >= 1.0 {
            0.0
        } else {
            (1.0 - p).ln()
        };
        let mut s = Self { ln_keep, skip: 0 };
        s.reload(rng);
        s
    }

    fn reload<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        if self.ln_keep.is_nan() {
            self.skip = u64::MAX;
        } else if self.ln_keep == 0.0 {
            self.skip = 0;
        } else {
            let u: f64 = rng.gen(); // [0, 1)
            self.skip = ((1.0 - u).ln() / self.ln_keep) as u64;
        }
    }

    /// One opportunity; true when the event fires.
    #[inline]
    fn fires<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        if self.skip == 0 {
            self.reload(rng);
            true
        } else {
            self.skip -= 1;
            false
        }
    }
}

/// Per-unit fault sampler: corruption events arrive through an
/// [`EventSkipper`] at the matrix's uniform corruption rate, and the
/// corrupted value is drawn from the row conditioned on leaving the input.
struct UnitFaultSampler {
    skipper: EventSkipper,
    half_width: i32,
    /// Flattened per-input CDF over the `2w` corrupted outputs.
    cond_cdf: Vec<f64>,
    cond_out: Vec<i8>,
}

impl UnitFaultSampler {
    fn new<R: Rng + ?Sized>(
        model: FaultModel,
        p: f64,
        half_width: u32,
        rng: &mut R,
    ) -> Result<Option<Self>, FaultError> {
        if model == FaultModel::None || p == 0.0 {
            return Ok(None);
        }
        let pi = TransitionMatrix::for_model(model, p, half_width)?;
        let w = half_width as i32;
        let n = 2 * half_width as usize + 1;
        let mut cond_cdf = Vec::with_capacity(n * (n - 1));
        let mut cond_out = Vec::with_capacity(n * (n - 1));
        for k in -w..=w {
            let mut acc = 0.0;
            for m in -w..=w {
                if m == k {
                    continue;
                }
                acc += pi.entry(k, m) / p;
                cond_cdf.push(acc);
                cond_out.push(m as i8);
            }
        }
        Ok(Some(Self {
            skipper: EventSkipper::new(p, rng),
            half_width: w,
            cond_cdf,
            cond_out,
        }))
    }

    #[inline]
    fn corrupt<R: Rng + ?Sized>(&mut self, value: i8, rng: &mut R) -> i8 {
        if !self.skipper.fires(rng) {
            return value;
        }
        let n_off = 2 * self.half_width as usize;
        let base = (value as i32 + self.half_width) as usize * n_off;
        let u: f64 = rng.gen();
        let row = &self.cond_cdf[base..base + n_off];
        for (i, &c) in row.iter().enumerate() {
            if u < c {
                return self.cond_out[base + i];
            }
        }
        self.cond_out[base + n_off - 1]
    }
}

/// Wider-alphabet variant for APP values.
struct AppFaultSampler(Option<UnitFaultSampler>);

impl AppFaultSampler {
    #[inline]
    fn corrupt<R: Rng + ?Sized>(&mut self, value: i32, rng: &mut R) -> i32 {
        match self.0.as_mut() {
            // APP levels fit in i8 for every supported alphabet (s' <= 10)
            Some(s) => s.corrupt(value as i8, rng) as i32,
            None => value,
        }
    }
}

/// Read-only decode tables shared across trials.
struct DecodeEngine<'a> {
    code: &'a ParityCheckCode,
    noise: NoiseParams,
    /// `vnu_tbl[y][(a+s)*n + (b+s)]` for y in {-B: 0, +B: 1}.
    vnu_tbl: [Vec<i8>; 2],
    b: i8,
    s: u32,
    s_prime: u32,
}

impl<'a> DecodeEngine<'a> {
    fn new(
        code: &'a ParityCheckCode,
        spec: &'a DecoderSpec,
        noise: NoiseParams,
    ) -> Result<Self, SimError> {
        for v in 0..code.n() {
            let got = code.var_degree(v);
            if got != spec.ensemble.d_v as usize {
                return Err(SimError::DegreeMismatch {
                    got,
                    expected: spec.ensemble.d_v as usize,
                });
            }
        }
        let s = spec.alphabet().half_width();
        let n = spec.alphabet().size();
        let mut neg = vec![0i8; n * n];
        let mut pos = vec![0i8; n * n];
        let w = s as i32;
        for a in -w..=w {
            for b in -w..=w {
                let idx = (a + w) as usize * n + (b + w) as usize;
                neg[idx] = spec.lut.lookup_neg(a as i8, b as i8);
                pos[idx] = -spec.lut.lookup_neg(-a as i8, -b as i8);
            }
        }
        Ok(Self {
            code,
            noise,
            vnu_tbl: [neg, pos],
            b: spec.alphabet().channel_magnitude() as i8,
            s,
            s_prime: spec.app_alphabet.half_width(),
        })
    }

    #[inline]
    fn vnu(&self, a: i8, b: i8, y_pos: bool) -> i8 {
        let w = self.s as i32;
        let n = 2 * self.s as usize + 1;
        let idx = (a as i32 + w) as usize * n + (b as i32 + w) as usize;
        self.vnu_tbl[usize::from(y_pos)][idx]
    }
}

/// One decode attempt.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    pub estimate: Vec<u8>,
    pub iterations_run: u32,
    pub stopped_early: bool,
}

/// Decodes one received vector of channel values (`+/-B` per bit) with the
/// flooding schedule, corrupting messages through the configured fault
/// model: all CN outputs, then all VN outputs, then the APP values.
pub fn noisy_decode<R: Rng + ?Sized>(
    code: &ParityCheckCode,
    y: &[i8],
    spec: &DecoderSpec,
    cfg: &TrialConfig,
    rng: &mut R,
) -> Result<DecodeOutcome, SimError> {
    if y.len() != code.n() {
        return Err(SimError::LengthMismatch {
            got: y.len(),
            n: code.n(),
        });
    }
    let engine = DecodeEngine::new(code, spec, cfg.noise)?;
    let mut samplers = TrialSamplers::new(&engine, rng)?;
    Ok(decode_with_engine(&engine, y, cfg, &mut samplers, rng))
}

struct TrialSamplers {
    cn: Option<UnitFaultSampler>,
    vn: Option<UnitFaultSampler>,
    app: AppFaultSampler,
}

impl TrialSamplers {
    fn new<R: Rng + ?Sized>(engine: &DecodeEngine, rng: &mut R) -> Result<Self, SimError> {
        let noise = &engine.noise;
        Ok(Self {
            cn: UnitFaultSampler::new(noise.model, noise.p_c, engine.s, rng)?,
            vn: UnitFaultSampler::new(noise.model, noise.p_v, engine.s, rng)?,
            app: AppFaultSampler(UnitFaultSampler::new(
                noise.model,
                noise.p_a,
                engine.s_prime,
                rng,
            )?),
        })
    }
}

fn decode_with_engine<R: Rng + ?Sized>(
    engine: &DecodeEngine,
    y: &[i8],
    cfg: &TrialConfig,
    samplers: &mut TrialSamplers,
    rng: &mut R,
) -> DecodeOutcome {
    let code = engine.code;
    let e_total = code.edge_count();
    // initial VN-to-CN messages are the channel values themselves
    let mut v2c: Vec<i8> = (0..e_total).map(|e| y[code.edge_variable(e)]).collect();
    let mut c2v: Vec<i8> = vec![0; e_total];
    let mut estimate: Vec<u8> = vec![0; code.n()];
    let mut iterations_run = 0;

    for _ in 0..cfg.max_iterations {
        iterations_run += 1;

        // check-node pass: leave-one-out min-sum, then CN-output faults
        for c in 0..code.m() {
            let range = code.check_edges(c);
            let (start, end) = (range.start, range.end);
            let mut zeros = 0u32;
            let mut sign = 1i8;
            let mut min1 = i8::MAX;
            let mut min2 = i8::MAX;
            let mut argmin = usize::MAX;
            let mut zero_pos = usize::MAX;
            for e in start..end {
                let msg = v2c[e];
                if msg == 0 {
                    zeros += 1;
                    zero_pos = e;
                    continue;
                }
                if msg < 0 {
                    sign = -sign;
                }
                let mag = msg.abs();
                if mag < min1 {
                    min2 = min1;
                    min1 = mag;
                    argmin = e;
                } else if mag < min2 {
                    min2 = mag;
                }
            }
            for e in start..end {
                let out = match zeros {
                    0 => {
                        let mag = if e == argmin { min2 } else { min1 };
                        let s = if v2c[e] < 0 { -sign } else { sign };
                        if mag == i8::MAX {
                            // degree-one check: empty leave-one-out products
                            // cannot occur for d_c >= 2
                            0
                        } else {
                            s * mag
                        }
                    }
                    1 if e == zero_pos => sign * min1,
                    _ => 0,
                };
                c2v[e] = match samplers.cn.as_mut() {
                    Some(f) => f.corrupt(out, rng),
                    None => out,
                };
            }
        }

        // variable-node pass: next-round messages, then VN-output faults
        for v in 0..code.n() {
            let edges = code.variable_edges(v);
            let [e0, e1, e2] = [edges[0] as usize, edges[1] as usize, edges[2] as usize];
            let (m0, m1, m2) = (c2v[e0], c2v[e1], c2v[e2]);
            let y_pos = y[v] > 0;
            let outs = [
                engine.vnu(m1, m2, y_pos),
                engine.vnu(m0, m2, y_pos),
                engine.vnu(m0, m1, y_pos),
            ];
            for (slot, out) in [e0, e1, e2].into_iter().zip(outs) {
                v2c[slot] = match samplers.vn.as_mut() {
                    Some(f) => f.corrupt(out, rng),
                    None => out,
                };
            }
        }

        // APP pass: noisy a-posteriori values and hard decisions
        for v in 0..code.n() {
            let edges = code.variable_edges(v);
            let gamma: i32 =
                edges.iter().map(|&e| c2v[e as usize] as i32).sum::<i32>() + y[v] as i32;
            let gamma = samplers.app.corrupt(gamma, rng);
            estimate[v] = match gamma.signum() {
                1 => 0,
                -1 => 1,
                _ => u8::from(rng.gen::<f64>() >= 0.5),
            };
        }

        if cfg.early_stop && engine.code.syndrome_ok(&estimate) {
            return DecodeOutcome {
                estimate,
                iterations_run,
                stopped_early: true,
            };
        }
    }
    DecodeOutcome {
        estimate,
        iterations_run,
        stopped_early: false,
    }
}

/// Monte Carlo aggregates; counts are exact integers so that merging is
/// order-independent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BerResult {
    pub trials: u64,
    pub n: usize,
    pub bit_errors: u64,
    pub frame_errors: u64,
    /// Sum of squared per-frame bit-error counts (for frame-level standard
    /// errors).
    pub bit_errors_sq: u64,
    pub total_iterations: u64,
    pub early_stops: u64,
}

impl BerResult {
    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / (self.trials as f64 * self.n as f64)
    }

    pub fn fer(&self) -> f64 {
        self.frame_errors as f64 / self.trials as f64
    }

    /// Binomial standard error over all simulated bits.
    pub fn stderr_ber(&self) -> f64 {
        let p = self.ber();
        (p * (1.0 - p) / (self.trials as f64 * self.n as f64)).sqrt()
    }

    /// Standard error of the mean per-frame bit-error fraction; accounts
    /// for within-frame correlation.
    pub fn stderr_ber_frame(&self) -> f64 {
        let t = self.trials as f64;
        let mean = self.bit_errors as f64 / t;
        let var = (self.bit_errors_sq as f64 / t - mean * mean).max(0.0);
        (var / t).sqrt() / self.n as f64
    }
}

/// Runs independent decode trials and aggregates bit- and frame-error
/// counts. Trials are distributed over the current rayon pool; trial `t`
/// always draws from stream `(seed, t)`.
pub fn run_ber(
    code: &ParityCheckCode,
    spec: &DecoderSpec,
    cfg: &TrialConfig,
    trials: u64,
) -> Result<BerResult, SimError> {
    if trials == 0 {
        return Err(SimError::NoTrials);
    }
    let engine = DecodeEngine::new(code, spec, cfg.noise)?;
    let basis = match cfg.codeword_mode {
        CodewordMode::AllZero => None,
        CodewordMode::RandomCodeword => Some(code.codeword_basis()),
    };
    let words = code.n().div_ceil(64);

    let acc = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(t);
            // transmitted codeword
            let mut x = vec![0u64; words];
            if let Some(basis) = &basis {
                for row in basis {
                    if rng.gen::<bool>() {
                        for (xi, ri) in x.iter_mut().zip(row) {
                            *xi ^= ri;
                        }
                    }
                }
            }
            let bit = |x: &[u64], i: usize| (x[i / 64] >> (i % 64) & 1) as u8;
            // BSC: flip each transmitted bit with probability alpha
            let mut y: Vec<i8> = (0..code.n())
                .map(|i| if bit(&x, i) == 0 { engine.b } else { -engine.b })
                .collect();
            let mut flips = EventSkipper::new(cfg.alpha, &mut rng);
            for v in y.iter_mut() {
                if flips.fires(&mut rng) {
                    *v = -*v;
                }
            }
            let mut samplers = TrialSamplers::new(&engine, &mut rng).expect("validated");
            let out = decode_with_engine(&engine, &y, cfg, &mut samplers, &mut rng);
            let errors = out
                .estimate
                .iter()
                .enumerate()
                .filter(|(i, &e)| e != bit(&x, *i))
                .count() as u64;
            (
                errors,
                u64::from(errors > 0),
                errors * errors,
                out.iterations_run as u64,
                u64::from(out.stopped_early),
            )
        })
        .reduce(
            || (0, 0, 0, 0, 0),
            |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3, a.4 + b.4),
        );

    Ok(BerResult {
        trials,
        n: code.n(),
        bit_errors: acc.0,
        frame_errors: acc.1,
        bit_errors_sq: acc.2,
        total_iterations: acc.3,
        early_stops: acc.4,
    })
}

/// One sweep cell.
#[derive(Debug, Clone)]
pub struct BerRow {
    pub decoder: String,
    pub noise: NoiseParams,
    pub alpha: f64,
    pub result: BerResult,
}

/// Cross product of decoders and channel parameters.
pub fn ber_sweep(
    code: &ParityCheckCode,
    specs: &[DecoderSpec],
    cfg: &TrialConfig,
    alphas: &[f64],
    trials: u64,
) -> Result<Vec<BerRow>, SimError> {
    let mut rows = Vec::with_capacity(specs.len() * alphas.len());
    for spec in specs {
        for &alpha in alphas {
            let cell = TrialConfig {
                alpha,
                ..cfg.clone()
            };
            let result = run_ber(code, spec, &cell, trials)?;
            rows.push(BerRow {
                decoder: spec.name.clone(),
                noise: cfg.noise,
                alpha,
                result,
            });
        }
    }
    Ok(rows)
}

pub fn ber_csv(rows: &[BerRow]) -> String {
    let mut s = String::from(
        "decoder,model,pv,pc,pa,alpha,trials,bit_errors,frame_errors,ber,fer,stderr\n",
    );
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.decoder,
            r.noise.model,
            r.noise.p_v,
            r.noise.p_c,
            r.noise.p_a,
            r.alpha,
            r.result.trials,
            r.result.bit_errors,
            r.result.frame_errors,
            r.result.ber(),
            r.result.fer(),
            r.result.stderr_ber(),
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{EnsembleSpec, MessageAlphabet};
    use crate::lut::tables;

    fn tanner_like() -> ParityCheckCode {
        code::random_regular_code(155, 3, 5, 99).unwrap()
    }

    fn oms_spec() -> DecoderSpec {
        let alphabet = MessageAlphabet::new(3, 1).unwrap();
        DecoderSpec::new(
            "offset-ms",
            tables::offset_min_sum(&alphabet).unwrap(),
            EnsembleSpec::new(3, 5).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn clean_reception_stops_immediately() {
        let code = tanner_like();
        let spec = oms_spec();
        let cfg = TrialConfig::new(0.0, NoiseParams::noiseless(), 1);
        let y = vec![1i8; code.n()];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let out = noisy_decode(&code, &y, &spec, &cfg, &mut rng).unwrap();
        assert_eq!(out.estimate, vec![0u8; code.n()]);
        assert!(out.stopped_early);
        assert_eq!(out.iterations_run, 1);
    }

    #[test]
    fn single_flip_is_corrected() {
        let code = tanner_like();
        let spec = oms_spec();
        let cfg = TrialConfig::new(0.0, NoiseParams::noiseless(), 1);
        for flip in [0usize, 77, 154] {
            let mut y = vec![1i8; code.n()];
            y[flip] = -1;
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let out = noisy_decode(&code, &y, &spec, &cfg, &mut rng).unwrap();
            assert_eq!(out.estimate, vec![0u8; code.n()], "flip at {flip}");
            assert!(out.stopped_early);
        }
    }

    #[test]
    fn early_stop_implies_zero_syndrome() {
        let code = tanner_like();
        let spec = oms_spec();
        let cfg = TrialConfig {
            alpha: 0.05,
            noise: NoiseParams::sp(0.05, 0.05, 0.05).unwrap(),
            max_iterations: 30,
            seed: 11,
            codeword_mode: CodewordMode::AllZero,
            early_stop: true,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for trial in 0..50u64 {
            rng.set_stream(trial);
            let mut y = vec![1i8; code.n()];
            for v in y.iter_mut() {
                if rng.gen::<f64>() < cfg.alpha {
                    *v = -1;
                }
            }
            let mut trial_rng = ChaCha8Rng::seed_from_u64(7 + trial);
            let out = noisy_decode(&code, &y, &spec, &cfg, &mut trial_rng).unwrap();
            if out.stopped_early {
                assert!(code.syndrome_ok(&out.estimate));
            }
        }
    }

    #[test]
    fn zero_alpha_noiseless_gives_zero_ber() {
        let code = tanner_like();
        let spec = oms_spec();
        let cfg = TrialConfig::new(0.0, NoiseParams::noiseless(), 17);
        let res = run_ber(&code, &spec, &cfg, 200).unwrap();
        assert_eq!(res.bit_errors, 0);
        assert_eq!(res.frame_errors, 0);
        assert_eq!(res.early_stops, 200);
    }

    #[test]
    fn same_seed_is_bitwise_reproducible_across_pools() {
        let code = tanner_like();
        let spec = oms_spec();
        let mut cfg = TrialConfig::new(0.04, NoiseParams::sp(0.02, 0.02, 0.02).unwrap(), 3);
        cfg.max_iterations = 20;
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one.install(|| run_ber(&code, &spec, &cfg, 500)).unwrap();
        let b = four.install(|| run_ber(&code, &spec, &cfg, 500)).unwrap();
        assert_eq!(a, b);
        assert!(
            a.bit_errors > 0,
            "noise should cause some errors at alpha 0.04"
        );
    }

    #[test]
    fn degenerate_noise_flattens_performance() {
        // p_v = p_c = 1 makes messages effectively random
        let code = tanner_like();
        let spec = oms_spec();
        let cfg = TrialConfig {
            alpha: 0.03,
            noise: NoiseParams::fd(1.0, 1.0, 0.0).unwrap(),
            max_iterations: 20,
            seed: 3,
            codeword_mode: CodewordMode::AllZero,
            early_stop: true,
        };
        let res = run_ber(&code, &spec, &cfg, 200).unwrap();
        assert!(res.fer() > 0.9);
    }

    #[test]
    fn random_codeword_mode_is_exercised() {
        let code = tanner_like();
        let spec = oms_spec();
        let cfg = TrialConfig {
            alpha: 0.02,
            noise: NoiseParams::noiseless(),
            max_iterations: 50,
            seed: 21,
            codeword_mode: CodewordMode::RandomCodeword,
            early_stop: true,
        };
        let res = run_ber(&code, &spec, &cfg, 100).unwrap();
        // decodes most frames at this operating point
        assert!(res.fer() < 0.2, "fer = {}", res.fer());
    }

    #[test]
    fn skipper_matches_bernoulli_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in [0.01, 0.2, 0.7] {
            let mut sk = EventSkipper::new(p, &mut rng);
            let n = 200_000;
            let mut fires = 0u32;
            for _ in 0..n {
                if sk.fires(&mut rng) {
                    fires += 1;
                }
            }
            let freq = fires as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((freq - p).abs() < 5.0 * sigma, "p={p} freq={freq}");
        }
        let mut always = EventSkipper::new(1.0, &mut rng);
        assert!((0..100).all(|_| always.fires(&mut rng)));
        let mut never = EventSkipper::new(0.0, &mut rng);
        assert!((0..100).all(|_| !never.fires(&mut rng)));
    }
}
