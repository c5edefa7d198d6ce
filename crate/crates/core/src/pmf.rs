//! Probability mass functions over symmetric level alphabets.
//!
//! A [`MessagePmf`] is the state variable of density evolution. Every
//! constructor and transform keeps the invariant that entries are
//! nonnegative and sum to one within [`PMF_TOLERANCE`].

use crate::alphabet::{AppAlphabet, MessageAlphabet};
use thiserror::Error;

/// Mass-sum tolerance enforced on every PMF produced by the crate.
pub const PMF_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum PmfError {
    #[error("pmf entry {value} at level {level} outside [0, 1]")]
    EntryOutOfRange { level: i32, value: f64 },
    #[error("pmf mass sums to {0}, expected 1")]
    BadMassSum(f64),
    #[error("pmf length {got} does not match alphabet size {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("alphabet mismatch: half-widths {0} vs {1}")]
    AlphabetMismatch(u32, u32),
    #[error("channel parameter {0} outside [0, 0.5]")]
    ChannelParameterOutOfRange(f64),
}

/// A PMF over the integer levels `-w..=w` of a message or APP alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct MessagePmf {
    half_width: u32,
    mass: Vec<f64>,
}

impl MessagePmf {
    /// Validates and wraps a mass vector indexed lowest level first.
    pub fn new(half_width: u32, mass: Vec<f64>) -> Result<Self, PmfError> {
        let expected = 2 * half_width as usize + 1;
        if mass.len() != expected {
            return Err(PmfError::LengthMismatch {
                got: mass.len(),
                expected,
            });
        }
        let pmf = Self { half_width, mass };
        pmf.validate()?;
        Ok(pmf)
    }

    /// All mass on a single level.
    pub fn point_mass(half_width: u32, level: i32) -> Self {
        let mut mass = vec![0.0; 2 * half_width as usize + 1];
        mass[(level + half_width as i32) as usize] = 1.0;
        Self { half_width, mass }
    }

    pub fn uniform(half_width: u32) -> Self {
        let n = 2 * half_width as usize + 1;
        Self {
            half_width,
            mass: vec![1.0 / n as f64; n],
        }
    }

    pub(crate) fn from_unchecked(half_width: u32, mass: Vec<f64>) -> Self {
        debug_assert_eq!(mass.len(), 2 * half_width as usize + 1);
        Self { half_width, mass }
    }

    pub fn half_width(&self) -> u32 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn mass_at(&self, level: i32) -> f64 {
        self.mass[(level + self.half_width as i32) as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        let w = self.half_width as i32;
        self.mass
            .iter()
            .enumerate()
            .map(move |(i, &p)| (i as i32 - w, p))
    }

    /// Checks nonnegativity and unit mass within [`PMF_TOLERANCE`].
    pub fn validate(&self) -> Result<(), PmfError> {
        let w = self.half_width as i32;
        for (i, &p) in self.mass.iter().enumerate() {
            if !(0.0..=1.0 + PMF_TOLERANCE).contains(&p) || p.is_nan() {
                return Err(PmfError::EntryOutOfRange {
                    level: i as i32 - w,
                    value: p,
                });
            }
        }
        let sum: f64 = self.mass.iter().sum();
        if (sum - 1.0).abs() > PMF_TOLERANCE {
            return Err(PmfError::BadMassSum(sum));
        }
        Ok(())
    }

    /// Rescales so the mass sums to exactly one; suppresses floating-point
    /// drift across long DE runs.
    pub fn renormalize(&mut self) {
        let sum: f64 = self.mass.iter().sum();
        if sum > 0.0 {
            for p in &mut self.mass {
                *p /= sum;
            }
        }
    }

    /// Error probability read-off for an APP-alphabet PMF under the all-zero
    /// codeword convention: half the mass at zero plus all negative mass.
    pub fn error_probability(&self) -> f64 {
        let zero = self.half_width as usize;
        let neg: f64 = self.mass[..zero].iter().sum();
        neg + 0.5 * self.mass[zero]
    }
}

/// PMF of the channel value for a BSC with crossover probability `alpha`:
/// under the all-zero-codeword convention and the mapping `0 -> +B`, mass
/// `1 - alpha` at `+B` and `alpha` at `-B`.
pub fn channel_pmf(alpha: f64, alphabet: &MessageAlphabet) -> Result<MessagePmf, PmfError> {
    if !(0.0..=0.5).contains(&alpha) || alpha.is_nan() {
        return Err(PmfError::ChannelParameterOutOfRange(alpha));
    }
    let mut mass = vec![0.0; alphabet.size()];
    mass[alphabet.index_of(alphabet.channel_magnitude())] = 1.0 - alpha;
    mass[alphabet.index_of(-alphabet.channel_magnitude())] = alpha;
    Ok(MessagePmf::from_unchecked(alphabet.half_width(), mass))
}

/// Channel priors `(mass(-B), mass(+B))` extracted from a channel PMF.
pub(crate) fn channel_priors(channel: &MessagePmf, b: i32) -> (f64, f64) {
    (channel.mass_at(-b), channel.mass_at(b))
}

/// PMF over an APP alphabet (same representation, public alias for clarity).
pub fn app_pmf(alphabet: &AppAlphabet, mass: Vec<f64>) -> Result<MessagePmf, PmfError> {
    MessagePmf::new(alphabet.half_width(), mass)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha7() -> MessageAlphabet {
        MessageAlphabet::new(3, 1).unwrap()
    }

    #[test]
    fn channel_pmf_noiseless() {
        let p = channel_pmf(0.0, &alpha7()).unwrap();
        assert_eq!(p.mass_at(1), 1.0);
        assert_eq!(p.mass_at(-1), 0.0);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn channel_pmf_symmetric_saturation() {
        let p = channel_pmf(0.5, &alpha7()).unwrap();
        assert_eq!(p.mass_at(1), 0.5);
        assert_eq!(p.mass_at(-1), 0.5);
    }

    #[test]
    fn channel_pmf_direct_substitution() {
        let p = channel_pmf(0.06, &alpha7()).unwrap();
        assert!((p.mass_at(1) - 0.94).abs() < 1e-15);
        assert!((p.mass_at(-1) - 0.06).abs() < 1e-15);
    }

    #[test]
    fn channel_pmf_rejects_out_of_range() {
        assert!(channel_pmf(-0.01, &alpha7()).is_err());
        assert!(channel_pmf(0.51, &alpha7()).is_err());
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(MessagePmf::new(1, vec![0.5, 0.5, 0.1]).is_err());
        assert!(MessagePmf::new(1, vec![0.5, 0.6, -0.1]).is_err());
        assert!(MessagePmf::new(1, vec![0.2, 0.3, 0.5]).is_ok());
    }

    #[test]
    fn error_probability_counts_half_of_zero() {
        let pmf = MessagePmf::new(2, vec![0.1, 0.2, 0.4, 0.2, 0.1]).unwrap();
        assert!((pmf.error_probability() - (0.3 + 0.2)).abs() < 1e-15);
    }
}
