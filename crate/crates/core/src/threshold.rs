//! Functional thresholds from sampled asymptotic error-probability curves.
//!
//! The asymptotic error probability `alpha -> Pe(alpha)` of a faulty decoder
//! is sampled on a grid, the transition point is located at the largest
//! local slope, and the transition is classified by how the maximum local
//! slope scales as the grid is refined around it: a genuine discontinuity
//! diverges like `1/step`, a smooth inflection saturates at the finite
//! derivative. Per the restated threshold definition, only a discontinuity
//! yields a nonzero functional threshold; a smooth transition reports zero.

use crate::alphabet::NoiseParams;
use crate::de::{de_iterate, DeError, DeOptions, DeResult};
use crate::decoder::DecoderSpec;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ThresholdError {
    #[error(transparent)]
    De(#[from] DeError),
    #[error("bad grid: lo {lo}, hi {hi}, step {step}")]
    BadGrid { lo: f64, hi: f64, step: f64 },
    #[error("bisection bracket does not straddle the threshold")]
    BadBracket,
}

/// A sampled `alpha -> Pe(alpha)` curve; non-convergent points are kept as
/// explicit gaps, never interpolated.
#[derive(Debug, Clone)]
pub struct PeCurve {
    pub grid: Vec<f64>,
    pub pe: Vec<Option<f64>>,
    pub grid_step: f64,
}

impl PeCurve {
    /// Largest grid point with defined `pe` strictly below the raw channel
    /// error rate (the useful-region boundary).
    pub fn useful_region_bound(&self) -> Option<f64> {
        self.grid
            .iter()
            .zip(&self.pe)
            .rev()
            .find(|(a, pe)| matches!(pe, Some(p) if *p < **a))
            .map(|(a, _)| *a)
    }

    /// Largest grid point with defined `pe` at or below `lambda`.
    pub fn target_ber_threshold(&self, lambda: f64) -> Option<f64> {
        self.grid
            .iter()
            .zip(&self.pe)
            .rev()
            .find(|(_, pe)| matches!(pe, Some(p) if *p <= lambda))
            .map(|(a, _)| *a)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("alpha,pe,defined\n");
        for (a, pe) in self.grid.iter().zip(&self.pe) {
            match pe {
                Some(p) => s.push_str(&format!("{a},{p},1\n")),
                None => s.push_str(&format!("{a},,0\n")),
            }
        }
        s
    }
}

/// Samples the asymptotic error probability on `[alpha_lo, alpha_hi]` with
/// the given step; one density-evolution run per grid point, evaluated
/// concurrently.
pub fn sample_pe_curve(
    spec: &DecoderSpec,
    noise: &NoiseParams,
    alpha_lo: f64,
    alpha_hi: f64,
    step: f64,
    de: &DeOptions,
) -> Result<PeCurve, ThresholdError> {
    if !(0.0..=0.5).contains(&alpha_lo) || !(alpha_lo..=0.5).contains(&alpha_hi) || step <= 0.0 {
        return Err(ThresholdError::BadGrid {
            lo: alpha_lo,
            hi: alpha_hi,
            step,
        });
    }
    let npts = ((alpha_hi - alpha_lo) / step).round() as usize + 1;
    let grid: Vec<f64> = (0..npts).map(|i| alpha_lo + i as f64 * step).collect();
    let pe = run_grid(spec, noise, &grid, de)?;
    Ok(PeCurve {
        grid,
        pe,
        grid_step: step,
    })
}

fn run_grid(
    spec: &DecoderSpec,
    noise: &NoiseParams,
    grid: &[f64],
    de: &DeOptions,
) -> Result<Vec<Option<f64>>, ThresholdError> {
    let results: Result<Vec<DeResult>, DeError> = grid
        .par_iter()
        .map(|&alpha| de_iterate(alpha.min(0.5), spec, noise, de))
        .collect();
    Ok(results?.into_iter().map(|r| r.pe_infinity).collect())
}

/// Local Lipschitz-constant estimates along a curve: symmetric finite
/// differences at interior points, one-sided at segment endpoints.
/// Undefined curve points break the profile into separate segments.
pub fn lipschitz_profile(curve: &PeCurve) -> Vec<Vec<(f64, f64)>> {
    let mut segments = Vec::new();
    let mut start = 0usize;
    let n = curve.pe.len();
    while start < n {
        while start < n && curve.pe[start].is_none() {
            start += 1;
        }
        let mut end = start;
        while end < n && curve.pe[end].is_some() {
            end += 1;
        }
        if end - start >= 2 {
            let seg: Vec<(f64, f64)> = (start..end)
                .map(|i| {
                    let slope = if i == start {
                        slope_between(curve, i, i + 1)
                    } else if i == end - 1 {
                        slope_between(curve, i - 1, i)
                    } else {
                        slope_between(curve, i - 1, i + 1)
                    };
                    (curve.grid[i], slope)
                })
                .collect();
            segments.push(seg);
        }
        start = end;
    }
    segments
}

fn slope_between(curve: &PeCurve, i: usize, j: usize) -> f64 {
    let pi = curve.pe[i].expect("defined");
    let pj = curve.pe[j].expect("defined");
    ((pj - pi) / (curve.grid[j] - curve.grid[i])).abs()
}

/// How the error-probability transition at the estimated threshold behaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionKind {
    /// The transition is a jump; the functional threshold sits at it.
    Discontinuity,
    /// The transition is smooth, so the restated functional threshold is
    /// zero.
    Inflection,
    /// Density evolution stops converging before any transition can be
    /// classified.
    Undefined,
}

impl TransitionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TransitionKind::Discontinuity => "DISCONTINUITY",
            TransitionKind::Inflection => "INFLECTION",
            TransitionKind::Undefined => "UNDEFINED",
        }
    }
}

impl std::fmt::Display for TransitionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Estimator knobs; the defaults match the values pinned by the acceptance
/// suite.
#[derive(Debug, Clone)]
pub struct ThresholdConfig {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub initial_step: f64,
    /// Grid-step shrink factor per refinement round.
    pub refinement_factor: f64,
    pub max_refinements: u32,
    /// A transition is a discontinuity when the max local slope grows by at
    /// least this factor per refinement round (checked as total growth over
    /// all rounds, which is robust to a single noisy round).
    pub divergence_ratio: f64,
    /// Refinement window half-size, in units of the initial step.
    pub window_steps: u32,
    /// Density-evolution budget for curve scans. Near-transition points
    /// converge slowly, so this is far above the plain DE default.
    pub de: DeOptions,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            alpha_lo: 0.0,
            alpha_hi: 0.5,
            initial_step: 1e-3,
            refinement_factor: 2.0,
            max_refinements: 3,
            divergence_ratio: 1.7,
            window_steps: 3,
            de: DeOptions::default().with_max_iter(60_000),
        }
    }
}

/// Functional-threshold estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    /// The transition location: the verified low-side grid point of a jump,
    /// the inflection point of a smooth transition, or the last grid point
    /// with defined `pe` when convergence fails first.
    pub alpha_star: f64,
    /// Restated functional threshold: `alpha_star` for a discontinuity,
    /// zero otherwise.
    pub alpha_bar: f64,
    pub kind: TransitionKind,
    /// Max local slope per refinement round (round 0 is the initial grid).
    pub lipschitz_estimates: Vec<f64>,
}

impl ThresholdReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("kind {}\n", self.kind));
        s.push_str(&format!("alpha_star {}\n", self.alpha_star));
        s.push_str(&format!("alpha_bar {}\n", self.alpha_bar));
        let slopes: Vec<String> = self
            .lipschitz_estimates
            .iter()
            .map(|v| v.to_string())
            .collect();
        s.push_str(&format!("max_local_slopes {}\n", slopes.join(" ")));
        s
    }
}

/// Estimates the functional threshold of a decoder under the given noise.
///
/// The curve is sampled on the configured grid; the transition candidate is
/// the largest local slope over the defined prefix. The grid is then
/// refined around the candidate `max_refinements` times. If the max local
/// slope keeps growing like `1/step` the transition is a discontinuity and
/// the threshold is the last grid point verified on the low side; if it
/// saturates the transition is an inflection and the restated threshold is
/// zero; if density evolution stops converging at or around the candidate
/// the report is `Undefined`.
pub fn functional_threshold(
    spec: &DecoderSpec,
    noise: &NoiseParams,
    cfg: &ThresholdConfig,
) -> Result<ThresholdReport, ThresholdError> {
    let step = cfg.initial_step;
    let curve = sample_pe_curve(spec, noise, cfg.alpha_lo, cfg.alpha_hi, step, &cfg.de)?;
    let first_undefined = curve.pe.iter().position(Option::is_none);
    let defined_end = first_undefined.unwrap_or(curve.pe.len()).saturating_sub(1);
    if defined_end < 2 {
        return Ok(ThresholdReport {
            alpha_star: 0.0,
            alpha_bar: 0.0,
            kind: TransitionKind::Undefined,
            lipschitz_estimates: Vec::new(),
        });
    }

    // transition candidate: largest symmetric-difference slope on the
    // defined prefix
    let mut cand = 0usize;
    let mut best = -1.0;
    for i in 0..=defined_end {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(defined_end);
        if lo == hi {
            continue;
        }
        let slope = slope_between(&curve, lo, hi);
        if slope > best {
            best = slope;
            cand = i;
        }
    }
    let cand_alpha = curve.grid[cand];

    let window = cfg.window_steps as f64 * step;
    let lo_w = (cand_alpha - window).max(cfg.alpha_lo);
    let hi_w = (cand_alpha + window).min(cfg.alpha_hi);

    // the candidate abuts the non-convergent region: condition (a) cuts the
    // threshold search before any transition is observable
    let prefix_cut = first_undefined.is_some();
    if prefix_cut && curve.grid[defined_end] - cand_alpha <= window {
        return Ok(ThresholdReport {
            alpha_star: curve.grid[defined_end],
            alpha_bar: 0.0,
            kind: TransitionKind::Undefined,
            lipschitz_estimates: Vec::new(),
        });
    }

    let mut maxes = Vec::with_capacity(cfg.max_refinements as usize + 1);
    let mut jump: Option<(f64, f64)> = None;
    let mut saw_undefined = false;
    let mut step_r = step;
    for round in 0..=cfg.max_refinements {
        if round > 0 {
            step_r /= cfg.refinement_factor;
        }
        let npts = ((hi_w - lo_w) / step_r).round() as usize + 1;
        let grid: Vec<f64> = (0..npts).map(|i| lo_w + i as f64 * step_r).collect();
        let pe = run_grid(spec, noise, &grid, &cfg.de)?;
        saw_undefined |= pe.iter().any(Option::is_none);
        let mut best = 0.0;
        let mut best_pair = None;
        let mut prev: Option<usize> = None;
        for (i, p) in pe.iter().enumerate() {
            if p.is_none() {
                continue;
            }
            if let Some(j) = prev {
                let slope = ((pe[i].unwrap() - pe[j].unwrap()) / (grid[i] - grid[j])).abs();
                if slope > best {
                    best = slope;
                    best_pair = Some((grid[j], grid[i]));
                }
            }
            prev = Some(i);
        }
        maxes.push(best);
        if let Some(pair) = best_pair {
            jump = Some(pair);
        }
    }

    if saw_undefined {
        return Ok(ThresholdReport {
            alpha_star: curve.grid[defined_end],
            alpha_bar: 0.0,
            kind: TransitionKind::Undefined,
            lipschitz_estimates: maxes,
        });
    }

    let total_growth = cfg.divergence_ratio.powi(cfg.max_refinements as i32);
    let diverges = maxes.first().copied().unwrap_or(0.0) > 0.0
        && maxes.last().copied().unwrap_or(0.0) >= total_growth * maxes[0];
    if diverges {
        // report the largest initial-grid point verified on the low side of
        // the jump
        let (left, _) = jump.expect("divergent slope implies a steepest pair");
        let alpha_star = (left / step + 1e-9).floor() * step;
        return Ok(ThresholdReport {
            alpha_star,
            alpha_bar: alpha_star,
            kind: TransitionKind::Discontinuity,
            lipschitz_estimates: maxes,
        });
    }
    if prefix_cut {
        return Ok(ThresholdReport {
            alpha_star: curve.grid[defined_end],
            alpha_bar: 0.0,
            kind: TransitionKind::Undefined,
            lipschitz_estimates: maxes,
        });
    }
    let alpha_star = jump.map(|(a, b)| 0.5 * (a + b)).unwrap_or(cand_alpha);
    Ok(ThresholdReport {
        alpha_star,
        alpha_bar: 0.0,
        kind: TransitionKind::Inflection,
        lipschitz_estimates: maxes,
    })
}

/// Largest grid point whose asymptotic error probability is defined and
/// strictly below the raw channel error rate.
pub fn useful_region_bound(
    spec: &DecoderSpec,
    noise: &NoiseParams,
    alpha_lo: f64,
    alpha_hi: f64,
    step: f64,
    de: &DeOptions,
) -> Result<Option<f64>, ThresholdError> {
    Ok(sample_pe_curve(spec, noise, alpha_lo, alpha_hi, step, de)?.useful_region_bound())
}

/// Largest grid point whose asymptotic error probability is defined and at
/// most `lambda`.
pub fn target_ber_threshold(
    spec: &DecoderSpec,
    noise: &NoiseParams,
    lambda: f64,
    alpha_lo: f64,
    alpha_hi: f64,
    step: f64,
    de: &DeOptions,
) -> Result<Option<f64>, ThresholdError> {
    Ok(sample_pe_curve(spec, noise, alpha_lo, alpha_hi, step, de)?.target_ber_threshold(lambda))
}

/// Classical noiseless density-evolution threshold by bisection on the
/// channel parameter: the largest `alpha` for which the error probability
/// converges to zero.
pub fn noiseless_threshold(spec: &DecoderSpec, tol: f64) -> Result<f64, ThresholdError> {
    let noise = NoiseParams::noiseless();
    let de = DeOptions::default().with_max_iter(20_000);
    let zero = |alpha: f64| -> Result<bool, ThresholdError> {
        let r = de_iterate(alpha, spec, &noise, &de)?;
        Ok(r.converged && r.pe_infinity.unwrap_or(1.0) <= 1e-9)
    };
    let (mut lo, mut hi) = (0.0, 0.5);
    if !zero(lo)? {
        return Err(ThresholdError::BadBracket);
    }
    if zero(hi)? {
        return Ok(hi);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if zero(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Which hardware-noise parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseAxis {
    Pv,
    Pc,
    Pa,
}

impl NoiseAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseAxis::Pv => "pv",
            NoiseAxis::Pc => "pc",
            NoiseAxis::Pa => "pa",
        }
    }

    pub fn apply(&self, base: &NoiseParams, value: f64) -> NoiseParams {
        let mut n = *base;
        match self {
            NoiseAxis::Pv => n.p_v = value,
            NoiseAxis::Pc => n.p_c = value,
            NoiseAxis::Pa => n.p_a = value,
        }
        n
    }
}

/// One functional-threshold estimate along a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: NoiseAxis,
    pub value: f64,
    pub alpha_bar: f64,
    pub alpha_star: f64,
    pub kind: TransitionKind,
}

/// One functional threshold per axis value, everything else fixed.
pub fn threshold_sweep(
    spec: &DecoderSpec,
    axis: NoiseAxis,
    fixed: &NoiseParams,
    values: &[f64],
    cfg: &ThresholdConfig,
) -> Result<Vec<SweepRow>, ThresholdError> {
    values
        .iter()
        .map(|&value| {
            let noise = axis.apply(fixed, value);
            let report = functional_threshold(spec, &noise, cfg)?;
            Ok(SweepRow {
                axis,
                value,
                alpha_bar: report.alpha_bar,
                alpha_star: report.alpha_star,
                kind: report.kind,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("axis,value,alpha_bar,kind\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.axis.as_str(),
            r.value,
            r.alpha_bar,
            r.kind
        ));
    }
    s
}
