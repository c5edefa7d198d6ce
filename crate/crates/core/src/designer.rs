//! Candidate-rule generation and robustness ranking.
//!
//! A candidate set comes either from exhaustive enumeration of all valid
//! two-input rules over a small alphabet (tractable for `s <= 2`; the
//! 7-level space holds 530,803,988 rules and is counted, not materialized)
//! or from rule files on disk. Ranking computes each rule's noiseless
//! threshold and its functional thresholds under both fault models and
//! orders by the discrepancy between them.

use crate::alphabet::{EnsembleSpec, FaultModel, MessageAlphabet, NoiseParams};
use crate::lut::{Lut, LutError};
use crate::threshold::{
    functional_threshold, noiseless_threshold, ThresholdConfig, ThresholdError, TransitionKind,
};
use rayon::prelude::*;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DesignerError {
    #[error(
        "exhaustive enumeration is tractable only for s <= 2 (the 7-level space holds \
         530803988 rules); ingest rule files instead"
    )]
    AlphabetTooLarge,
    #[error("enumeration requires d_v = 3, got {0}")]
    UnsupportedDegree(u32),
    #[error("no valid rules: {0:?}")]
    BadFiles(Vec<(PathBuf, LutError)>),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
    #[error("empty candidate set")]
    EmptySet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Enumerated,
    File,
}

/// A named collection of valid rules.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    pub rules: Vec<(String, Lut)>,
    pub provenance: Provenance,
}

/// Number of valid two-input rules (total, permutation-symmetric, monotone
/// tables) over the `2s+1`-level alphabet, by transfer-matrix counting over
/// upper-triangle rows.
pub fn count_valid_luts(s: u32) -> u64 {
    let n = 2 * s as usize + 1;
    // state: the previous triangle row (length n - i), values 0..n
    let mut states: HashMap<Vec<u8>, u64> = HashMap::new();
    let mut row = Vec::with_capacity(n);
    enumerate_rows(n, 0, 0, &mut row, &mut |r| {
        *states.entry(r.to_vec()).or_insert(0) += 1;
    });
    for i in 1..n {
        let len = n - i;
        let mut next: HashMap<Vec<u8>, u64> = HashMap::new();
        for (prev, count) in &states {
            let mut row = Vec::with_capacity(len);
            enumerate_successors(n, prev, len, 0, 0, &mut row, &mut |r| {
                *next.entry(r.to_vec()).or_insert(0) += count;
            });
        }
        states = next;
    }
    states.values().sum()
}

fn enumerate_rows(vals: usize, pos: usize, lo: u8, row: &mut Vec<u8>, f: &mut impl FnMut(&[u8])) {
    if pos == row.capacity() {
        f(row);
        return;
    }
    for v in lo..vals as u8 {
        row.push(v);
        enumerate_rows(vals, pos + 1, v, row, f);
        row.pop();
    }
}

fn enumerate_successors(
    vals: usize,
    prev: &[u8],
    len: usize,
    pos: usize,
    lo: u8,
    row: &mut Vec<u8>,
    f: &mut impl FnMut(&[u8]),
) {
    if pos == len {
        f(row);
        return;
    }
    // column constraint: this row starts one column later than the previous
    let floor = lo.max(prev[pos + 1]);
    for v in floor..vals as u8 {
        row.push(v);
        enumerate_successors(vals, prev, len, pos + 1, v, row, f);
        row.pop();
    }
}

/// All valid two-input rules over the alphabet, named by enumeration index.
/// Rejects `s = 3`: the full 7-level space is too large for a systematic
/// analysis, so larger alphabets go through [`ingest_luts`].
pub fn enumerate_valid_luts(
    alphabet: &MessageAlphabet,
    d_v: u32,
) -> Result<CandidateSet, DesignerError> {
    if d_v != 3 {
        return Err(DesignerError::UnsupportedDegree(d_v));
    }
    if alphabet.half_width() > 2 {
        return Err(DesignerError::AlphabetTooLarge);
    }
    let n = alphabet.size();
    let w = alphabet.half_width() as i32;
    let mut rules = Vec::new();
    let mut triangle: Vec<Vec<u8>> = Vec::with_capacity(n);
    fn rec(
        n: usize,
        w: i32,
        alphabet: &MessageAlphabet,
        triangle: &mut Vec<Vec<u8>>,
        rules: &mut Vec<(String, Lut)>,
    ) {
        let i = triangle.len();
        if i == n {
            let mut rows = vec![vec![0i32; n]; n];
            for (r, tri) in triangle.iter().enumerate() {
                for (k, &v) in tri.iter().enumerate() {
                    let c = r + k;
                    rows[r][c] = v as i32 - w;
                    rows[c][r] = v as i32 - w;
                }
            }
            let lut = Lut::from_rows(*alphabet, &rows).expect("construction preserves validity");
            rules.push((format!("enum-{:06}", rules.len()), lut));
            return;
        }
        let len = n - i;
        let mut row = Vec::with_capacity(len);
        fn fill(
            n: usize,
            w: i32,
            alphabet: &MessageAlphabet,
            triangle: &mut Vec<Vec<u8>>,
            rules: &mut Vec<(String, Lut)>,
            row: &mut Vec<u8>,
            len: usize,
            lo: u8,
        ) {
            if row.len() == len {
                triangle.push(row.clone());
                rec(n, w, alphabet, triangle, rules);
                triangle.pop();
                return;
            }
            let floor = if triangle.is_empty() {
                lo
            } else {
                lo.max(triangle.last().unwrap()[row.len() + 1])
            };
            for v in floor..n as u8 {
                row.push(v);
                fill(n, w, alphabet, triangle, rules, row, len, v);
                row.pop();
            }
        }
        fill(n, w, alphabet, triangle, rules, &mut row, len, 0);
    }
    rec(n, w, alphabet, &mut triangle, &mut rules);
    Ok(CandidateSet {
        rules,
        provenance: Provenance::Enumerated,
    })
}

/// Loads every `.lut` file in a directory (sorted by name); any file that
/// fails to parse or validate fails the whole ingest with per-file
/// diagnostics.
pub fn ingest_luts(dir: &Path) -> Result<CandidateSet, DesignerError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| DesignerError::Io(format!("{dir:?}: {e}")))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "lut").unwrap_or(false))
        .collect();
    paths.sort();
    let mut rules = Vec::new();
    let mut bad = Vec::new();
    for path in paths {
        match Lut::from_file(&path) {
            Ok(lut) => {
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                rules.push((name, lut));
            }
            Err(e) => bad.push((path, e)),
        }
    }
    if !bad.is_empty() {
        return Err(DesignerError::BadFiles(bad));
    }
    Ok(CandidateSet {
        rules,
        provenance: Provenance::File,
    })
}

/// Per-model threshold summary inside a [`RobustnessRecord`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelThreshold {
    /// Transition location (jump, inflection point, or end of the defined
    /// region), capped at the rule's noiseless threshold since hardware
    /// noise cannot improve a decoder; the quantity rules are ranked by.
    pub alpha_star: f64,
    /// Restated functional threshold (zero unless the transition is a
    /// discontinuity).
    pub alpha_bar: f64,
    pub kind: TransitionKind,
}

/// Robustness summary for one rule.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessRecord {
    pub name: String,
    pub noiseless_threshold: f64,
    pub sp: ModelThreshold,
    pub fd: ModelThreshold,
    /// `noiseless - alpha_star` per model; rules whose density evolution
    /// never converges have `alpha_star = 0` and therefore the maximal
    /// discrepancy, ranking them last.
    pub discrepancy_sp: f64,
    pub discrepancy_fd: f64,
}

impl RobustnessRecord {
    pub fn discrepancy(&self, model: FaultModel) -> f64 {
        match model {
            FaultModel::FullDepth => self.discrepancy_fd,
            _ => self.discrepancy_sp,
        }
    }
}

/// Computes noiseless and functional thresholds for every rule and sorts by
/// ascending discrepancy under `rank_by` (ties: higher noiseless threshold,
/// then name).
pub fn rank_candidates(
    set: &CandidateSet,
    ensemble: &EnsembleSpec,
    noise_sp: &NoiseParams,
    noise_fd: &NoiseParams,
    rank_by: FaultModel,
    cfg: &ThresholdConfig,
    bisection_tol: f64,
) -> Result<Vec<RobustnessRecord>, DesignerError> {
    if set.rules.is_empty() {
        return Err(DesignerError::EmptySet);
    }
    let mut records: Vec<RobustnessRecord> = set
        .rules
        .par_iter()
        .map(|(name, lut)| -> Result<RobustnessRecord, DesignerError> {
            let spec = crate::decoder::DecoderSpec::new(name.clone(), lut.clone(), *ensemble)
                .expect("enumerated and ingested rules are two-input");
            let noiseless = noiseless_threshold(&spec, bisection_tol)?;
            let sp_report = functional_threshold(&spec, noise_sp, cfg)?;
            let fd_report = functional_threshold(&spec, noise_fd, cfg)?;
            let sp = ModelThreshold {
                alpha_star: sp_report.alpha_star.min(noiseless),
                alpha_bar: sp_report.alpha_bar,
                kind: sp_report.kind,
            };
            let fd = ModelThreshold {
                alpha_star: fd_report.alpha_star.min(noiseless),
                alpha_bar: fd_report.alpha_bar,
                kind: fd_report.kind,
            };
            Ok(RobustnessRecord {
                name: name.clone(),
                noiseless_threshold: noiseless,
                sp,
                fd,
                discrepancy_sp: noiseless - sp.alpha_star,
                discrepancy_fd: noiseless - fd.alpha_star,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    records.sort_by(|a, b| {
        a.discrepancy(rank_by)
            .partial_cmp(&b.discrepancy(rank_by))
            .unwrap()
            .then(
                b.noiseless_threshold
                    .partial_cmp(&a.noiseless_threshold)
                    .unwrap(),
            )
            .then(a.name.cmp(&b.name))
    });
    Ok(records)
}

/// The most and least robust rules under a model: minimum and maximum
/// discrepancy, ties broken by name.
pub fn select_extremes(
    records: &[RobustnessRecord],
    model: FaultModel,
) -> Option<(String, String)> {
    if records.len() < 2 {
        return None;
    }
    let robust = records
        .iter()
        .min_by(|a, b| {
            a.discrepancy(model)
                .partial_cmp(&b.discrepancy(model))
                .unwrap()
                .then(a.name.cmp(&b.name))
        })
        .unwrap();
    let non_robust = records
        .iter()
        .max_by(|a, b| {
            a.discrepancy(model)
                .partial_cmp(&b.discrepancy(model))
                .unwrap()
                .then(b.name.cmp(&a.name))
        })
        .unwrap();
    Some((robust.name.clone(), non_robust.name.clone()))
}

pub fn rank_csv(records: &[RobustnessRecord]) -> String {
    let mut s = String::from(
        "name,noiseless,alpha_bar_sp,alpha_bar_fd,discrepancy_sp,discrepancy_fd,kind_sp,kind_fd,alpha_star_sp,alpha_star_fd\n",
    );
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.name,
            r.noiseless_threshold,
            r.sp.alpha_bar,
            r.fd.alpha_bar,
            r.discrepancy_sp,
            r.discrepancy_fd,
            r.sp.kind,
            r.fd.kind,
            r.sp.alpha_star,
            r.fd.alpha_star,
        ));
    }
    s
}
