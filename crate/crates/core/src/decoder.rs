//! Noiseless decoder kernels: min-sum CNU, LUT-based VNU, APP computation
//! and hard decision.

use crate::alphabet::{AppAlphabet, EnsembleSpec, MessageAlphabet};
use crate::lut::Lut;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DecoderError {
    #[error("rule arity {lut_inputs} does not match ensemble d_v - 1 = {expected}")]
    ArityMismatch { lut_inputs: u32, expected: u32 },
}

/// Two-input min-sum check update; any zero input forces output zero, which
/// makes the sign of zero irrelevant.
#[inline]
pub fn cnu2(a: i8, b: i8) -> i8 {
    if a == 0 || b == 0 {
        return 0;
    }
    let mag = a.abs().min(b.abs());
    if (a > 0) == (b > 0) {
        mag
    } else {
        -mag
    }
}

/// Min-sum check update over `d_c - 1` incoming messages: product of signs
/// times the minimum magnitude.
pub fn cnu(incoming: &[i8]) -> i8 {
    incoming.iter().copied().fold(
        i8::MAX,
        |acc, m| {
            if acc == i8::MAX {
                m
            } else {
                cnu2(acc, m)
            }
        },
    )
}

/// LUT variable update over `d_v - 1 = 2` incoming messages and channel
/// value `y`.
#[inline]
pub fn vnu(lut: &Lut, incoming: &[i8], y: i8) -> i8 {
    debug_assert_eq!(incoming.len(), 2);
    lut.lookup(incoming[0], incoming[1], y)
}

/// APP computation: exact integer sum of all `d_v` incoming messages plus
/// the channel value, on the enlarged alphabet.
#[inline]
pub fn app(incoming: &[i8], y: i8) -> i32 {
    incoming.iter().map(|&m| m as i32).sum::<i32>() + y as i32
}

/// Hard decision from an APP value; ties at zero are broken by a uniform
/// draw, bit 0 with probability one half.
#[inline]
pub fn hard_decision(gamma: i32, rng_draw: f64) -> u8 {
    match gamma.signum() {
        1 => 0,
        -1 => 1,
        _ => u8::from(rng_draw >= 0.5),
    }
}

/// A fully specified decoder: rule, ensemble, and APP alphabet.
#[derive(Debug, Clone)]
pub struct DecoderSpec {
    pub name: String,
    pub lut: Lut,
    pub ensemble: EnsembleSpec,
    pub app_alphabet: AppAlphabet,
}

impl DecoderSpec {
    pub fn new(
        name: impl Into<String>,
        lut: Lut,
        ensemble: EnsembleSpec,
    ) -> Result<Self, DecoderError> {
        // stored tables are two-input, so the ensemble must be column-weight three
        if ensemble.d_v != 3 {
            return Err(DecoderError::ArityMismatch {
                lut_inputs: 2,
                expected: ensemble.d_v - 1,
            });
        }
        let app_alphabet = AppAlphabet::for_ensemble(lut.alphabet(), ensemble.d_v)
            .expect("ensemble degree already validated");
        Ok(Self {
            name: name.into(),
            lut,
            ensemble,
            app_alphabet,
        })
    }

    pub fn alphabet(&self) -> &MessageAlphabet {
        self.lut.alphabet()
    }
}
