//! Noisy density evolution over the BSC.
//!
//! One recursion alternates the exact CNU PMF update, the CN-output fault
//! matrix, the LUT-based VNU update, and the VN-output fault matrix; each
//! iteration additionally produces the APP PMF, applies the APP fault
//! matrix, and reads off the decoder error probability (half the mass at
//! zero plus the negative mass).

use crate::alphabet::{EnsembleSpec, FaultModel, NoiseParams};
use crate::decoder::{cnu2, DecoderSpec};
use crate::fault::{FaultError, TransitionMatrix};
use crate::lut::Lut;
use crate::pmf::{channel_pmf, channel_priors, MessagePmf, PmfError};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DeError {
    #[error(transparent)]
    Pmf(#[from] PmfError),
    #[error(transparent)]
    Fault(#[from] FaultError),
    #[error("numeric failure at iteration {iteration}: {source}")]
    Numeric { iteration: u32, source: PmfError },
}

/// Stopping and bookkeeping knobs for [`de_iterate`].
#[derive(Debug, Clone)]
pub struct DeOptions {
    pub max_iter: u32,
    /// Convergence tolerance on the per-iteration error probability.
    pub tol: f64,
    /// Consecutive sub-tolerance steps required to declare convergence.
    pub consecutive_hits: u32,
    pub record_trajectory: bool,
    /// Bail out early on a sustained period-two cycle; the run is reported
    /// exactly as a non-convergent run that exhausted `max_iter` would be.
    pub detect_oscillation: bool,
}

impl Default for DeOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            tol: 1e-10,
            consecutive_hits: 10,
            record_trajectory: false,
            detect_oscillation: true,
        }
    }
}

impl DeOptions {
    pub fn with_max_iter(mut self, max_iter: u32) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_trajectory(mut self) -> Self {
        self.record_trajectory = true;
        self
    }
}

/// State after one density-evolution iteration.
#[derive(Debug, Clone)]
pub struct DeState {
    pub iteration: u32,
    /// VN-to-CN message PMF after the VN fault matrix.
    pub q_noisy: MessagePmf,
    /// CN-to-VN message PMF after the CN fault matrix.
    pub r_noisy: MessagePmf,
    /// Error probability at this iteration.
    pub pe: f64,
}

/// Outcome of a density-evolution run.
#[derive(Debug, Clone, PartialEq)]
pub struct DeResult {
    pub converged: bool,
    /// Defined only when the per-iteration error probability converged.
    pub pe_infinity: Option<f64>,
    pub iterations_used: u32,
    pub trajectory: Option<Vec<f64>>,
}

/// Exact CNU PMF update for a degree-`d_c` check: the PMF of the min-sum
/// output of `d_c - 1` i.i.d. messages, computed by folding the two-input
/// update pairwise.
pub fn de_cnu_step(q_noisy: &MessagePmf, ensemble: &EnsembleSpec) -> MessagePmf {
    let mut r = q_noisy.clone();
    for _ in 0..ensemble.d_c.saturating_sub(2) {
        r = fold_cnu2(&r, q_noisy);
    }
    debug_assert!(r.validate().is_ok());
    r
}

fn fold_cnu2(a: &MessagePmf, b: &MessagePmf) -> MessagePmf {
    let w = a.half_width() as i32;
    let n = a.len();
    let mut out = vec![0.0; n];
    for (ka, &pa) in a.mass().iter().enumerate() {
        if pa == 0.0 {
            continue;
        }
        let la = (ka as i32 - w) as i8;
        for (kb, &pb) in b.mass().iter().enumerate() {
            let lb = (kb as i32 - w) as i8;
            out[(cnu2(la, lb) as i32 + w) as usize] += pa * pb;
        }
    }
    MessagePmf::from_unchecked(a.half_width(), out)
}

/// Exact VNU PMF update: channel-prior-weighted sum over all input pairs,
/// for both channel values.
pub fn de_vnu_step(
    r_noisy: &MessagePmf,
    channel: &MessagePmf,
    lut: &Lut,
    _ensemble: &EnsembleSpec,
) -> MessagePmf {
    let b = lut.alphabet().channel_magnitude();
    let (prior_neg, prior_pos) = channel_priors(channel, b);
    let w = r_noisy.half_width() as i32;
    let n = r_noisy.len();
    let mut out = vec![0.0; n];
    for (ka, &pa) in r_noisy.mass().iter().enumerate() {
        if pa == 0.0 {
            continue;
        }
        let la = (ka as i32 - w) as i8;
        for (kb, &pb) in r_noisy.mass().iter().enumerate() {
            let lb = (kb as i32 - w) as i8;
            let joint = pa * pb;
            out[(lut.lookup_neg(la, lb) as i32 + w) as usize] += prior_neg * joint;
            out[(-lut.lookup_neg(-la, -lb) as i32 + w) as usize] += prior_pos * joint;
        }
    }
    let out = MessagePmf::from_unchecked(r_noisy.half_width(), out);
    debug_assert!(out.validate().is_ok());
    out
}

/// Exact APP PMF update: the `d_v`-fold convolution of the noisy CN message
/// PMF, shifted by the channel value and weighted by the channel priors.
pub fn de_app_step(r_noisy: &MessagePmf, channel: &MessagePmf, spec: &DecoderSpec) -> MessagePmf {
    let b = spec.alphabet().channel_magnitude();
    let (prior_neg, prior_pos) = channel_priors(channel, b);
    let d_v = spec.ensemble.d_v as usize;
    // conv holds the PMF of the sum of i messages, on levels -i*s..=i*s
    let mut conv = r_noisy.mass().to_vec();
    for _ in 1..d_v {
        conv = convolve(&conv, r_noisy.mass());
    }
    let s_prime = spec.app_alphabet.half_width() as i32;
    let sum_w = (d_v as u32 * r_noisy.half_width()) as i32;
    let mut out = vec![0.0; spec.app_alphabet.size()];
    for (i, &p) in conv.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let level = i as i32 - sum_w;
        out[(level + b + s_prime) as usize] += prior_pos * p;
        out[(level - b + s_prime) as usize] += prior_neg * p;
    }
    let out = MessagePmf::from_unchecked(spec.app_alphabet.half_width(), out);
    debug_assert!(out.validate().is_ok());
    out
}

fn convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Fault matrices instantiated for a decoder and noise parameters.
#[derive(Debug, Clone)]
pub struct DeNoiseTables {
    pub pi_c: TransitionMatrix,
    pub pi_v: TransitionMatrix,
    pub pi_a: TransitionMatrix,
}

impl DeNoiseTables {
    pub fn new(spec: &DecoderSpec, noise: &NoiseParams) -> Result<Self, FaultError> {
        let s = spec.alphabet().half_width();
        let s_prime = spec.app_alphabet.half_width();
        Ok(Self {
            pi_c: TransitionMatrix::for_model(noise.model, noise.p_c, s)?,
            pi_v: TransitionMatrix::for_model(noise.model, noise.p_v, s)?,
            pi_a: TransitionMatrix::for_model(noise.model, noise.p_a, s_prime)?,
        })
    }
}

/// Step-wise density-evolution driver; [`de_iterate`] wraps it.
pub struct DeRunner {
    spec: DecoderSpec,
    channel: MessagePmf,
    tables: DeNoiseTables,
    state: DeState,
}

impl DeRunner {
    pub fn new(alpha: f64, spec: &DecoderSpec, noise: &NoiseParams) -> Result<Self, DeError> {
        let channel = channel_pmf(alpha, spec.alphabet())?;
        let tables = DeNoiseTables::new(spec, noise)?;
        let state = DeState {
            iteration: 0,
            // the initial message is the channel value itself, before any
            // faulty unit has touched it
            q_noisy: channel.clone(),
            r_noisy: MessagePmf::point_mass(spec.alphabet().half_width(), 0),
            pe: f64::NAN,
        };
        Ok(Self {
            spec: spec.clone(),
            channel,
            tables,
            state,
        })
    }

    pub fn state(&self) -> &DeState {
        &self.state
    }

    /// Runs one full recursion and returns the iteration's error probability.
    pub fn step(&mut self) -> Result<f64, DeError> {
        let ens = &self.spec.ensemble;
        let r = de_cnu_step(&self.state.q_noisy, ens);
        let mut r_noisy = self.tables.pi_c.apply(&r)?;
        r_noisy.renormalize();
        let q = de_vnu_step(&r_noisy, &self.channel, &self.spec.lut, ens);
        let mut q_noisy = self.tables.pi_v.apply(&q)?;
        q_noisy.renormalize();
        let q_app = de_app_step(&r_noisy, &self.channel, &self.spec);
        let mut q_app_noisy = self.tables.pi_a.apply(&q_app)?;
        q_app_noisy.renormalize();
        let iteration = self.state.iteration + 1;
        q_app_noisy
            .validate()
            .map_err(|source| DeError::Numeric { iteration, source })?;
        let pe = q_app_noisy.error_probability();
        self.state = DeState {
            iteration,
            q_noisy,
            r_noisy,
            pe,
        };
        Ok(pe)
    }
}

/// Runs density evolution until the error probability converges
/// (`|pe_l - pe_{l-1}| < tol` for `consecutive_hits` iterations in a row) or
/// the iteration budget runs out, in which case the limit is reported as
/// undefined (`converged = false`) rather than approximated.
pub fn de_iterate(
    alpha: f64,
    spec: &DecoderSpec,
    noise: &NoiseParams,
    opts: &DeOptions,
) -> Result<DeResult, DeError> {
    let mut runner = DeRunner::new(alpha, spec, noise)?;
    let mut trajectory = opts.record_trajectory.then(Vec::new);
    let mut prev: Option<f64> = None;
    let mut prev2: Option<f64> = None;
    let mut hits = 0u32;
    let mut cycle_hits = 0u32;
    for it in 1..=opts.max_iter {
        let pe = runner.step()?;
        if let Some(t) = trajectory.as_mut() {
            t.push(pe);
        }
        if let Some(p) = prev {
            if (pe - p).abs() < opts.tol {
                hits += 1;
                if hits >= opts.consecutive_hits {
                    return Ok(DeResult {
                        converged: true,
                        pe_infinity: Some(pe),
                        iterations_used: it,
                        trajectory,
                    });
                }
            } else {
                hits = 0;
            }
        }
        if opts.detect_oscillation && it >= 20 {
            // a sustained period-two cycle never satisfies the consecutive
            // criterion; stop burning the budget on it
            let cycling = match (prev2, prev) {
                (Some(p2), Some(p)) => (pe - p2).abs() < opts.tol && (pe - p).abs() >= opts.tol,
                _ => false,
            };
            if cycling {
                cycle_hits += 1;
                if cycle_hits >= 30 {
                    return Ok(DeResult {
                        converged: false,
                        pe_infinity: None,
                        iterations_used: it,
                        trajectory,
                    });
                }
            } else {
                cycle_hits = 0;
            }
        }
        prev2 = prev;
        prev = Some(pe);
    }
    Ok(DeResult {
        converged: false,
        pe_infinity: None,
        iterations_used: opts.max_iter,
        trajectory,
    })
}

/// Lower bound on the per-iteration error probability induced by APP-unit
/// faults: `p_a / (2 s')` for the SP model, `p_a / 2 + p_a / (4 s')` for the
/// FD model, zero for noiseless hardware.
pub fn prop1_lower_bound(noise: &NoiseParams, s_prime: u32) -> f64 {
    let sp = s_prime as f64;
    match noise.model {
        FaultModel::None => 0.0,
        FaultModel::SignPreserving => noise.p_a / (2.0 * sp),
        FaultModel::FullDepth => noise.p_a / 2.0 + noise.p_a / (4.0 * sp),
    }
}

/// Trajectory rows as CSV (`iteration,pe`).
pub fn trajectory_csv(trajectory: &[f64]) -> String {
    let mut s = String::from("iteration,pe\n");
    for (i, pe) in trajectory.iter().enumerate() {
        s.push_str(&format!("{},{}\n", i + 1, pe));
    }
    s
}
