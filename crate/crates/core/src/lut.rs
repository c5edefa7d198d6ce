//! Variable-node update rules as lookup tables.
//!
//! A [`Lut`] stores the two-input VNU map for channel value `-B` only; the
//! `+B` half follows from odd symmetry. Valid rules are total, invariant
//! under permutation of their inputs, and non-decreasing in each argument.
//!
//! The text exchange format is one header line `s d_v` followed by
//! `2s+1` rows of `2s+1` signed level values giving `phi(row, col, -B)`,
//! rows and columns ordered from `-L_s` to `+L_s`.

use crate::alphabet::MessageAlphabet;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LutError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("table is {got} rows, expected {expected}")]
    BadShape { got: usize, expected: usize },
    #[error("unsupported alphabet: {0}")]
    Unsupported(String),
    #[error("invalid rule: {0:?}")]
    Invalid(Vec<Violation>),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Alphabet(#[from] crate::alphabet::AlphabetError),
}

/// A defect reported by [`Lut::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Output value outside the message alphabet.
    ValueOutOfAlphabet { row: i32, col: i32, value: i32 },
    /// `phi(a, b) != phi(b, a)`.
    PermutationAsymmetry {
        row: i32,
        col: i32,
        lhs: i32,
        rhs: i32,
    },
    /// Output decreases along a row as the column input grows.
    NonMonotone {
        row: i32,
        col: i32,
        next: i32,
        value: i32,
        next_value: i32,
    },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::ValueOutOfAlphabet { row, col, value } => {
                write!(f, "entry ({row}, {col}) = {value} is outside the alphabet")
            }
            Violation::PermutationAsymmetry { row, col, lhs, rhs } => {
                write!(f, "entry ({row}, {col}) = {lhs} but ({col}, {row}) = {rhs}")
            }
            Violation::NonMonotone {
                row,
                col,
                next,
                value,
                next_value,
            } => {
                write!(
                    f,
                    "row {row}: entry at column {col} is {value} but column {next} gives {next_value}"
                )
            }
        }
    }
}

/// A two-input VNU lookup table for channel value `-B`; the identity of a
/// 7-level FAID.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lut {
    alphabet: MessageAlphabet,
    d_v: u32,
    /// Row-major `(2s+1) x (2s+1)` table of output levels for `y = -B`.
    table: Vec<i8>,
}

impl Lut {
    /// Builds a rule from rows ordered `-L_s..=+L_s` and validates it.
    pub fn from_rows(alphabet: MessageAlphabet, rows: &[Vec<i32>]) -> Result<Self, LutError> {
        let n = alphabet.size();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(LutError::BadShape {
                got: rows.len(),
                expected: n,
            });
        }
        let table: Vec<i8> = rows.iter().flatten().map(|&v| v as i8).collect();
        let lut = Self {
            alphabet,
            d_v: 3,
            table,
        };
        let violations = lut.validate();
        if violations.is_empty() {
            Ok(lut)
        } else {
            Err(LutError::Invalid(violations))
        }
    }

    pub fn alphabet(&self) -> &MessageAlphabet {
        &self.alphabet
    }

    /// Table arity is `d_v - 1` inputs.
    pub fn d_v(&self) -> u32 {
        self.d_v
    }

    /// `phi(a, b, -B)`.
    #[inline]
    pub fn lookup_neg(&self, a: i8, b: i8) -> i8 {
        let n = self.alphabet.size();
        let w = self.alphabet.half_width() as i32;
        self.table[(a as i32 + w) as usize * n + (b as i32 + w) as usize]
    }

    /// `phi(a, b, y)` for either channel value; the `+B` half is
    /// `phi(a, b, +B) = -phi(-a, -b, -B)`.
    #[inline]
    pub fn lookup(&self, a: i8, b: i8, y: i8) -> i8 {
        debug_assert_eq!(y.unsigned_abs() as i32, self.alphabet.channel_magnitude());
        if y < 0 {
            self.lookup_neg(a, b)
        } else {
            -self.lookup_neg(-a, -b)
        }
    }

    /// Checks totality (value range), permutation symmetry, and
    /// monotonicity; odd symmetry holds by construction since only the `-B`
    /// half is stored. Returns every violation found.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let w = self.alphabet.half_width() as i32;
        let n = self.alphabet.size();
        let at = |i: usize, j: usize| self.table[i * n + j] as i32;
        for i in 0..n {
            for j in 0..n {
                let v = at(i, j);
                if v.unsigned_abs() > w as u32 {
                    out.push(Violation::ValueOutOfAlphabet {
                        row: i as i32 - w,
                        col: j as i32 - w,
                        value: v,
                    });
                }
                if j > i && at(i, j) != at(j, i) {
                    out.push(Violation::PermutationAsymmetry {
                        row: i as i32 - w,
                        col: j as i32 - w,
                        lhs: at(i, j),
                        rhs: at(j, i),
                    });
                }
                if j + 1 < n && at(i, j) > at(i, j + 1) {
                    out.push(Violation::NonMonotone {
                        row: i as i32 - w,
                        col: j as i32 - w,
                        next: j as i32 + 1 - w,
                        value: at(i, j),
                        next_value: at(i, j + 1),
                    });
                }
            }
        }
        out
    }

    /// Canonical text form (one header line, then the `-B` table).
    pub fn to_text(&self) -> String {
        let n = self.alphabet.size();
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.alphabet.half_width(), self.d_v);
        for i in 0..n {
            let row: Vec<String> = (0..n).map(|j| self.table[i * n + j].to_string()).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        s
    }

    /// Parses the text format. The alphabet is reconstructed with the
    /// canonical channel magnitude `B = 1`.
    pub fn from_text(text: &str) -> Result<Self, LutError> {
        let mut lines = text.lines().enumerate();
        let (lno, header) = lines.next().ok_or_else(|| LutError::Parse {
            line: 1,
            msg: "empty file".into(),
        })?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(LutError::Parse {
                line: lno + 1,
                msg: format!("header must be `s d_v`, got {header:?}"),
            });
        }
        let s: u32 = parts[0].parse().map_err(|_| LutError::Parse {
            line: lno + 1,
            msg: "bad half-width".into(),
        })?;
        let d_v: u32 = parts[1].parse().map_err(|_| LutError::Parse {
            line: lno + 1,
            msg: "bad d_v".into(),
        })?;
        if d_v != 3 {
            return Err(LutError::Unsupported(format!(
                "only d_v = 3 rules have two-input tables, got d_v = {d_v}"
            )));
        }
        let alphabet = MessageAlphabet::new(s, 1)?;
        let n = alphabet.size();
        let mut rows: Vec<Vec<i32>> = Vec::with_capacity(n);
        for _ in 0..n {
            let (lno, line) = lines.next().ok_or_else(|| LutError::Parse {
                line: 0,
                msg: format!("expected {n} table rows, file ends early"),
            })?;
            let row: Result<Vec<i32>, _> =
                line.split_whitespace().map(|t| t.parse::<i32>()).collect();
            let row = row.map_err(|e| LutError::Parse {
                line: lno + 1,
                msg: format!("bad level value: {e}"),
            })?;
            if row.len() != n {
                return Err(LutError::Parse {
                    line: lno + 1,
                    msg: format!("expected {n} values, got {}", row.len()),
                });
            }
            rows.push(row);
        }
        Self::from_rows(alphabet, &rows)
    }

    pub fn from_file(path: &Path) -> Result<Self, LutError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| LutError::Io(format!("{path:?}: {e}")))?;
        Self::from_text(&text)
    }

    pub fn write_file(&self, path: &Path) -> Result<(), LutError> {
        std::fs::write(path, self.to_text()).map_err(|e| LutError::Io(format!("{path:?}: {e}")))
    }
}

/// The published 7-level rules, plus the offset Min-Sum construction.
pub mod tables {
    use super::*;

    const OPT: [[i32; 7]; 7] = [
        [-3, -3, -3, -3, -3, -3, -1],
        [-3, -3, -3, -3, -2, -1, 1],
        [-3, -3, -2, -2, -1, -1, 1],
        [-3, -3, -2, -1, 0, 0, 1],
        [-3, -2, -1, 0, 0, 1, 2],
        [-3, -1, -1, 0, 1, 1, 3],
        [-1, 1, 1, 1, 2, 3, 3],
    ];

    const ROBUST_SP: [[i32; 7]; 7] = [
        [-3, -3, -3, -3, -3, -2, 0],
        [-3, -3, -3, -3, -2, -2, 1],
        [-3, -3, -3, -2, -1, -1, 1],
        [-3, -3, -2, -1, -1, 0, 1],
        [-3, -2, -1, -1, 0, 1, 2],
        [-2, -2, -1, 0, 1, 2, 2],
        [0, 1, 1, 1, 2, 2, 3],
    ];

    const NON_ROBUST_SP: [[i32; 7]; 7] = [
        [-3, -3, -3, -3, -3, -3, 0],
        [-3, -3, -3, -3, -2, 0, 2],
        [-3, -3, -2, -2, -1, 0, 2],
        [-3, -3, -2, -1, 0, 1, 3],
        [-3, -2, -1, 0, 0, 1, 3],
        [-3, 0, 0, 1, 1, 1, 3],
        [0, 2, 2, 3, 3, 3, 3],
    ];

    const ROBUST_FD: [[i32; 7]; 7] = [
        [-3, -3, -3, -3, -3, -1, 0],
        [-3, -3, -3, -3, -1, -1, 2],
        [-3, -3, -2, -2, -1, 0, 2],
        [-3, -3, -2, -1, 0, 0, 3],
        [-3, -1, -1, 0, 0, 1, 3],
        [-1, -1, 0, 0, 1, 1, 3],
        [0, 2, 2, 3, 3, 3, 3],
    ];

    const NON_ROBUST_FD: [[i32; 7]; 7] = [
        [-3, -3, -3, -3, -2, -2, 0],
        [-3, -3, -3, -3, -2, -1, 2],
        [-3, -3, -2, -2, -1, 0, 2],
        [-3, -3, -2, -1, 0, 0, 3],
        [-2, -2, -1, 0, 0, 1, 3],
        [-2, -1, 0, 0, 1, 1, 3],
        [0, 2, 2, 3, 3, 3, 3],
    ];

    fn from_const(rows: &[[i32; 7]; 7]) -> Lut {
        let alphabet = MessageAlphabet::new(3, 1).expect("7-level alphabet");
        let rows: Vec<Vec<i32>> = rows.iter().map(|r| r.to_vec()).collect();
        Lut::from_rows(alphabet, &rows).expect("published rule is valid")
    }

    /// The 7-level rule optimized for the error floor.
    pub fn opt() -> Lut {
        from_const(&OPT)
    }

    /// The rule selected for robustness to sign-preserving faults.
    pub fn robust_sp() -> Lut {
        from_const(&ROBUST_SP)
    }

    /// The rule selected as most fragile under sign-preserving faults.
    pub fn non_robust_sp() -> Lut {
        from_const(&NON_ROBUST_SP)
    }

    /// The rule selected for robustness to full-depth faults.
    pub fn robust_fd() -> Lut {
        from_const(&ROBUST_FD)
    }

    /// The rule selected as most fragile under full-depth faults.
    pub fn non_robust_fd() -> Lut {
        from_const(&NON_ROBUST_FD)
    }

    /// VNU of the 7-level (3-bit) offset Min-Sum decoder as a lookup table:
    /// `sign(t) * min(max(|t| - 1, 0), s)` with `t = a + b + 2y`.
    pub fn offset_min_sum(alphabet: &MessageAlphabet) -> Result<Lut, LutError> {
        if alphabet.half_width() != 3 {
            return Err(LutError::Unsupported(format!(
                "offset Min-Sum table is defined for the 7-level alphabet, got s = {}",
                alphabet.half_width()
            )));
        }
        let s = alphabet.half_width() as i32;
        let y = -alphabet.channel_magnitude();
        let rows: Vec<Vec<i32>> = alphabet
            .levels()
            .map(|a| {
                alphabet
                    .levels()
                    .map(|b| {
                        let t = a + b + 2 * y;
                        t.signum() * (t.abs() - 1).clamp(0, s)
                    })
                    .collect()
            })
            .collect();
        Lut::from_rows(*alphabet, &rows)
    }

    /// Builtin rules by CLI name.
    pub fn by_name(name: &str) -> Option<Lut> {
        let alphabet = MessageAlphabet::new(3, 1).ok()?;
        match name {
            "opt" => Some(opt()),
            "offset-ms" | "offset-min-sum" => offset_min_sum(&alphabet).ok(),
            "robust-sp" => Some(robust_sp()),
            "non-robust-sp" => Some(non_robust_sp()),
            "robust-fd" => Some(robust_fd()),
            "non-robust-fd" => Some(non_robust_fd()),
            _ => None,
        }
    }

    /// All six published rules with their CLI names.
    pub fn published() -> Vec<(&'static str, Lut)> {
        let alphabet = MessageAlphabet::new(3, 1).expect("7-level alphabet");
        vec![
            ("opt", opt()),
            ("offset-ms", offset_min_sum(&alphabet).expect("valid")),
            ("robust-sp", robust_sp()),
            ("non-robust-sp", non_robust_sp()),
            ("robust-fd", robust_fd()),
            ("non-robust-fd", non_robust_fd()),
        ]
    }
}
