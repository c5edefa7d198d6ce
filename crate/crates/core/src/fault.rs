//! Transient-fault models for the message-update units.
//!
//! The decomposition model attaches a row-stochastic transition matrix to
//! the output of each noiseless function. Two instances are provided: the
//! sign-preserving (SP) matrix, which corrupts magnitudes only, and the
//! full-depth (FD) matrix, the `(2s+1)`-ary symmetric channel. General
//! faulty functions that are not decomposable are represented as dense
//! conditional PMFs.

use crate::alphabet::FaultModel;
use crate::pmf::{MessagePmf, PMF_TOLERANCE};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FaultError {
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("alphabet half-width must be at least 1")]
    ZeroHalfWidth,
    #[error("matrix over half-width {matrix} applied to pmf over half-width {pmf}")]
    DimensionMismatch { matrix: u32, pmf: u32 },
    #[error("row {row} sums to {sum}, not 1")]
    NotRowStochastic { row: i32, sum: f64 },
}

/// A row-stochastic transition matrix over the levels `-w..=w`; entry
/// `(k, m)` is `Pr(output = m | input = k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    half_width: u32,
    entries: Vec<f64>,
    /// Per-row cumulative sums, for inverse-CDF sampling.
    row_cdf: Vec<f64>,
}

impl TransitionMatrix {
    fn from_entries(half_width: u32, entries: Vec<f64>) -> Result<Self, FaultError> {
        let n = 2 * half_width as usize + 1;
        debug_assert_eq!(entries.len(), n * n);
        for (row, chunk) in entries.chunks(n).enumerate() {
            let sum: f64 = chunk.iter().sum();
            if (sum - 1.0).abs() > PMF_TOLERANCE
                || chunk
                    .iter()
                    .any(|&p| !(0.0..=1.0 + PMF_TOLERANCE).contains(&p))
            {
                return Err(FaultError::NotRowStochastic {
                    row: row as i32 - half_width as i32,
                    sum,
                });
            }
        }
        let mut row_cdf = vec![0.0; n * n];
        for r in 0..n {
            let mut acc = 0.0;
            for c in 0..n {
                acc += entries[r * n + c];
                row_cdf[r * n + c] = acc;
            }
        }
        Ok(Self {
            half_width,
            entries,
            row_cdf,
        })
    }

    pub fn identity(half_width: u32) -> Self {
        let n = 2 * half_width as usize + 1;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self::from_entries(half_width, entries).expect("identity is stochastic")
    }

    /// Sign-preserving transfer matrix: diagonal `1 - p`; a nonzero level
    /// moves to zero or to another level of the same sign with probability
    /// `p/s` each; zero moves anywhere with probability `p/(2s)`; sign flips
    /// are impossible.
    pub fn sign_preserving(p: f64, s: u32) -> Result<Self, FaultError> {
        check_p_s(p, s)?;
        let w = s as i32;
        let n = 2 * s as usize + 1;
        let mut entries = vec![0.0; n * n];
        for k in -w..=w {
            for m in -w..=w {
                let e = if m == k {
                    1.0 - p
                } else if k == 0 {
                    p / (2.0 * s as f64)
                } else if m == 0 || (m > 0) == (k > 0) {
                    p / s as f64
                } else {
                    0.0
                };
                entries[(k + w) as usize * n + (m + w) as usize] = e;
            }
        }
        Self::from_entries(s, entries)
    }

    /// Full-depth transfer matrix: the `(2s+1)`-ary symmetric channel with
    /// diagonal `1 - p` and every off-diagonal entry `p/(2s)`.
    pub fn full_depth(p: f64, s: u32) -> Result<Self, FaultError> {
        check_p_s(p, s)?;
        let n = 2 * s as usize + 1;
        let off = p / (2.0 * s as f64);
        let mut entries = vec![off; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0 - p;
        }
        Self::from_entries(s, entries)
    }

    /// The matrix for a fault model at one unit ([`FaultModel::None`] gives
    /// the identity).
    pub fn for_model(model: FaultModel, p: f64, half_width: u32) -> Result<Self, FaultError> {
        match model {
            FaultModel::None => Ok(Self::identity(half_width)),
            FaultModel::SignPreserving => Self::sign_preserving(p, half_width),
            FaultModel::FullDepth => Self::full_depth(p, half_width),
        }
    }

    pub fn half_width(&self) -> u32 {
        self.half_width
    }

    pub fn size(&self) -> usize {
        2 * self.half_width as usize + 1
    }

    pub fn entry(&self, input: i32, output: i32) -> f64 {
        let w = self.half_width as i32;
        let n = self.size();
        self.entries[(input + w) as usize * n + (output + w) as usize]
    }

    /// Pushes a PMF through the matrix: `out_m = sum_k in_k * Pi[k, m]`.
    pub fn apply(&self, pmf: &MessagePmf) -> Result<MessagePmf, FaultError> {
        if pmf.half_width() != self.half_width {
            return Err(FaultError::DimensionMismatch {
                matrix: self.half_width,
                pmf: pmf.half_width(),
            });
        }
        let n = self.size();
        let mut out = vec![0.0; n];
        for (k, &mass) in pmf.mass().iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let row = &self.entries[k * n..(k + 1) * n];
            for (m, &e) in row.iter().enumerate() {
                out[m] += mass * e;
            }
        }
        Ok(MessagePmf::from_unchecked(self.half_width, out))
    }

    /// Draws an output level from the row of `value`.
    pub fn sample<R: Rng + ?Sized>(&self, value: i32, rng: &mut R) -> i32 {
        let w = self.half_width as i32;
        let n = self.size();
        let row = &self.row_cdf[(value + w) as usize * n..((value + w) as usize + 1) * n];
        let u: f64 = rng.gen();
        let mut idx = n - 1;
        for (i, &c) in row.iter().enumerate() {
            if u < c {
                idx = i;
                break;
            }
        }
        idx as i32 - w
    }

    pub fn to_csv(&self) -> String {
        let n = self.size();
        let mut s = String::new();
        for r in 0..n {
            let row: Vec<String> = (0..n)
                .map(|c| format!("{}", self.entries[r * n + c]))
                .collect();
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

fn check_p_s(p: f64, s: u32) -> Result<(), FaultError> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(FaultError::ProbabilityOutOfRange(p));
    }
    if s == 0 {
        return Err(FaultError::ZeroHalfWidth);
    }
    Ok(())
}

/// Which decoder kernel a faulty function replaces; fixes the symmetry
/// condition that applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultyKind {
    Vnu,
    Cnu,
    App,
}

/// A general memoryless faulty function: a dense conditional PMF
/// `P(output | inputs[, y])` over small alphabets.
///
/// Inputs range over the message levels `-w_in..=w_in`, outputs over
/// `-w_out..=w_out`. For VNU and APP kinds the condition also includes the
/// channel value `y` (index 0 for `-B`, 1 for `+B`).
#[derive(Debug, Clone)]
pub struct FaultyFunction {
    pub kind: FaultyKind,
    pub arity: usize,
    w_in: u32,
    w_out: u32,
    b: i32,
    /// `cond[(combo, y)][out]`, row-major; `y` dimension is 1 for CNU.
    cond: Vec<f64>,
}

impl FaultyFunction {
    fn n_in(&self) -> usize {
        2 * self.w_in as usize + 1
    }

    fn n_out(&self) -> usize {
        2 * self.w_out as usize + 1
    }

    fn y_dim(&self) -> usize {
        if self.kind == FaultyKind::Cnu {
            1
        } else {
            2
        }
    }

    fn combos(&self) -> usize {
        self.n_in().pow(self.arity as u32)
    }

    fn combo_index(&self, inputs: &[i8]) -> usize {
        let w = self.w_in as i32;
        let n = self.n_in();
        inputs
            .iter()
            .fold(0usize, |acc, &v| acc * n + (v as i32 + w) as usize)
    }

    fn combo_levels(&self, mut idx: usize) -> Vec<i8> {
        let w = self.w_in as i32;
        let n = self.n_in();
        let mut out = vec![0i8; self.arity];
        for slot in out.iter_mut().rev() {
            *slot = ((idx % n) as i32 - w) as i8;
            idx /= n;
        }
        out
    }

    fn row(&self, combo: usize, y_idx: usize) -> &[f64] {
        let n_out = self.n_out();
        let start = (combo * self.y_dim() + y_idx) * n_out;
        &self.cond[start..start + n_out]
    }

    /// Lifts a deterministic kernel to a (point-mass) faulty function.
    /// `f(inputs, y)` is called with `y = -B` and `+B` for VNU/APP kinds and
    /// ignored for CNU.
    pub fn from_deterministic(
        kind: FaultyKind,
        arity: usize,
        w_in: u32,
        w_out: u32,
        b: i32,
        f: impl Fn(&[i8], i8) -> i32,
    ) -> Self {
        let mut out = Self {
            kind,
            arity,
            w_in,
            w_out,
            b,
            cond: vec![
                0.0;
                (2 * w_in as usize + 1).pow(arity as u32)
                    * (if kind == FaultyKind::Cnu { 1 } else { 2 })
                    * (2 * w_out as usize + 1)
            ],
        };
        let n_out = out.n_out();
        let y_dim = out.y_dim();
        for combo in 0..out.combos() {
            let inputs = out.combo_levels(combo);
            for y_idx in 0..y_dim {
                let y = if y_idx == 0 { -b } else { b } as i8;
                let value = f(&inputs, y);
                let start = (combo * y_dim + y_idx) * n_out;
                out.cond[start + (value + w_out as i32) as usize] = 1.0;
            }
        }
        out
    }

    /// Composes with output noise: `P'(out | in) = sum_z P(z | in) Pi[z, out]`.
    pub fn with_output_noise(&self, pi: &TransitionMatrix) -> Result<Self, FaultError> {
        if pi.half_width() != self.w_out {
            return Err(FaultError::DimensionMismatch {
                matrix: pi.half_width(),
                pmf: self.w_out,
            });
        }
        let n_out = self.n_out();
        let mut cond = vec![0.0; self.cond.len()];
        for row_idx in 0..self.cond.len() / n_out {
            let src = &self.cond[row_idx * n_out..(row_idx + 1) * n_out];
            let dst = &mut cond[row_idx * n_out..(row_idx + 1) * n_out];
            for (z, &p) in src.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                for m in 0..n_out {
                    dst[m] +=
                        p * pi.entry(z as i32 - self.w_out as i32, m as i32 - self.w_out as i32);
                }
            }
        }
        Ok(Self {
            cond,
            ..self.clone()
        })
    }

    /// Conditional rows all sum to one.
    pub fn validate(&self) -> bool {
        let n_out = self.n_out();
        self.cond
            .chunks(n_out)
            .all(|row| (row.iter().sum::<f64>() - 1.0).abs() <= PMF_TOLERANCE)
    }

    /// Checks the symmetry condition for the function's kind, exhaustively
    /// over all input configurations:
    ///
    /// - VNU / APP: `P(out | in, y) = P(-out | -in, -y)`;
    /// - CNU: `P(out | a.in) = P(prod(a) * out | in)` for every sign vector
    ///   `a`.
    pub fn check_symmetry(&self) -> bool {
        let tol = PMF_TOLERANCE;
        let n_out = self.n_out();
        let w_out = self.w_out as i32;
        match self.kind {
            FaultyKind::Vnu | FaultyKind::App => {
                for combo in 0..self.combos() {
                    let inputs = self.combo_levels(combo);
                    let neg: Vec<i8> = inputs.iter().map(|&v| -v).collect();
                    let neg_combo = self.combo_index(&neg);
                    for y_idx in 0..2 {
                        let a = self.row(combo, y_idx);
                        let b = self.row(neg_combo, 1 - y_idx);
                        for out in 0..n_out {
                            let neg_out = (n_out - 1) - out;
                            if (a[out] - b[neg_out]).abs() > tol {
                                return false;
                            }
                        }
                    }
                }
                true
            }
            FaultyKind::Cnu => {
                for combo in 0..self.combos() {
                    let inputs = self.combo_levels(combo);
                    for mask in 0..(1u32 << self.arity) {
                        let mut flipped = inputs.clone();
                        let mut prod = 1i32;
                        for (i, v) in flipped.iter_mut().enumerate() {
                            if mask >> i & 1 == 1 {
                                *v = -*v;
                                prod = -prod;
                            }
                        }
                        let f_combo = self.combo_index(&flipped);
                        let a = self.row(f_combo, 0);
                        let b = self.row(combo, 0);
                        for out in 0..n_out {
                            let out_level = out as i32 - w_out;
                            let matched = (prod * out_level + w_out) as usize;
                            if (a[out] - b[matched]).abs() > tol {
                                return false;
                            }
                        }
                    }
                }
                true
            }
        }
    }
}

/// True when the conditional depends on its inputs only through
/// `phi(inputs, y)`: any two input tuples with the same image induce the
/// same output distribution.
pub fn check_decomposable(f: &FaultyFunction, phi: impl Fn(&[i8], i8) -> i32) -> bool {
    let n_out = f.n_out();
    let y_dim = f.y_dim();
    let b = f.b;
    for y_idx in 0..y_dim {
        let y = (if y_idx == 0 { -b } else { b }) as i8;
        let mut by_image: std::collections::HashMap<i32, usize> = std::collections::HashMap::new();
        for combo in 0..f.combos() {
            let inputs = f.combo_levels(combo);
            let image = phi(&inputs, y);
            match by_image.entry(image) {
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(combo);
                }
                std::collections::hash_map::Entry::Occupied(e) => {
                    let rep = f.row(*e.get(), y_idx);
                    let cur = f.row(combo, y_idx);
                    if rep
                        .iter()
                        .zip(cur)
                        .any(|(&x, &z)| (x - z).abs() > PMF_TOLERANCE)
                    {
                        return false;
                    }
                }
            }
        }
        for _ in 0..n_out {} // rows compared above
    }
    true
}

/// The two-input faulty minimum: `min` with probability `1 - p`, `max` with
/// probability `p`. Not decomposable into a deterministic map followed by
/// output noise.
pub fn faulty_min_fixture(p: f64, s: u32) -> Result<FaultyFunction, FaultError> {
    check_p_s(p, s)?;
    let base = FaultyFunction::from_deterministic(FaultyKind::Cnu, 2, s, s, 1, |m, _| {
        m[0].min(m[1]) as i32
    });
    let n_out = base.n_out();
    let w = s as i32;
    let mut f = base;
    for combo in 0..f.combos() {
        let inputs = f.combo_levels(combo);
        let (lo, hi) = (
            inputs[0].min(inputs[1]) as i32,
            inputs[0].max(inputs[1]) as i32,
        );
        let start = combo * n_out;
        for v in f.cond[start..start + n_out].iter_mut() {
            *v = 0.0;
        }
        f.cond[start + (lo + w) as usize] += 1.0 - p;
        f.cond[start + (hi + w) as usize] += p;
    }
    Ok(f)
}
