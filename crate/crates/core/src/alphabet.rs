//! Message alphabets, code ensembles, and hardware-noise parameters.
//!
//! Messages live on the symmetric integer level set `{-s, ..., 0, ..., +s}`
//! (levels are `L_i = i` with channel magnitude `B`), and a-posteriori values
//! on the larger set `{-s', ..., +s'}` sized so that the APP sum can never
//! saturate.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AlphabetError {
    #[error("alphabet half-width must be at least 1")]
    ZeroHalfWidth,
    #[error("channel magnitude B must be at least 1")]
    ZeroChannelMagnitude,
    #[error("channel magnitude {b} exceeds the largest level {s}")]
    ChannelMagnitudeTooLarge { b: i32, s: u32 },
    #[error("node degree must be at least 2, got {0}")]
    DegreeTooSmall(u32),
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
}

/// The message level set `M = {-s, ..., -1, 0, 1, ..., s}` together with the
/// channel magnitude `B`; `N_s = 2s + 1` levels in total.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageAlphabet {
    s: u32,
    b: i32,
}

impl MessageAlphabet {
    /// Builds the alphabet with levels `-s..=s` and channel values `{-B, +B}`.
    pub fn new(s: u32, b: u32) -> Result<Self, AlphabetError> {
        if s == 0 {
            return Err(AlphabetError::ZeroHalfWidth);
        }
        if b == 0 {
            return Err(AlphabetError::ZeroChannelMagnitude);
        }
        if b > s {
            // channel values must themselves be message levels so that the
            // decoder can be initialized with them
            return Err(AlphabetError::ChannelMagnitudeTooLarge { b: b as i32, s });
        }
        Ok(Self { s, b: b as i32 })
    }

    pub fn half_width(&self) -> u32 {
        self.s
    }

    /// `N_s = 2s + 1`.
    pub fn size(&self) -> usize {
        2 * self.s as usize + 1
    }

    pub fn channel_magnitude(&self) -> i32 {
        self.b
    }

    pub fn levels(&self) -> impl Iterator<Item = i32> + '_ {
        -(self.s as i32)..=self.s as i32
    }

    pub fn contains(&self, level: i32) -> bool {
        level.unsigned_abs() <= self.s
    }

    /// Index of a level in `0..N_s` (levels are stored lowest first).
    pub fn index_of(&self, level: i32) -> usize {
        debug_assert!(self.contains(level));
        (level + self.s as i32) as usize
    }

    pub fn level_at(&self, index: usize) -> i32 {
        debug_assert!(index < self.size());
        index as i32 - self.s as i32
    }
}

/// The APP level set `{-s', ..., +s'}` with `s' = d_v * L_s + B`, large
/// enough that the sum of `d_v` messages plus the channel value never
/// saturates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AppAlphabet {
    s_prime: u32,
}

impl AppAlphabet {
    /// Sizes the APP alphabet for `d_v` incoming messages plus the channel
    /// value.
    pub fn for_ensemble(alphabet: &MessageAlphabet, d_v: u32) -> Result<Self, AlphabetError> {
        if d_v < 2 {
            return Err(AlphabetError::DegreeTooSmall(d_v));
        }
        Ok(Self {
            s_prime: d_v * alphabet.half_width() + alphabet.channel_magnitude() as u32,
        })
    }

    pub fn half_width(&self) -> u32 {
        self.s_prime
    }

    pub fn size(&self) -> usize {
        2 * self.s_prime as usize + 1
    }

    pub fn contains(&self, level: i32) -> bool {
        level.unsigned_abs() <= self.s_prime
    }

    pub fn levels(&self) -> impl Iterator<Item = i32> + '_ {
        -(self.s_prime as i32)..=self.s_prime as i32
    }
}

/// A regular `(d_v, d_c)` LDPC ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleSpec {
    pub d_v: u32,
    pub d_c: u32,
}

impl EnsembleSpec {
    pub fn new(d_v: u32, d_c: u32) -> Result<Self, AlphabetError> {
        if d_v < 2 {
            return Err(AlphabetError::DegreeTooSmall(d_v));
        }
        if d_c < 2 {
            return Err(AlphabetError::DegreeTooSmall(d_c));
        }
        Ok(Self { d_v, d_c })
    }
}

/// Transient-fault model attached to the message-update units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultModel {
    /// Noiseless hardware.
    None,
    /// Sign-preserving: corrupts magnitudes, never flips signs directly.
    SignPreserving,
    /// Full-depth: `(2s+1)`-ary symmetric corruption of the whole message.
    FullDepth,
}

impl FaultModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            FaultModel::None => "none",
            FaultModel::SignPreserving => "sp",
            FaultModel::FullDepth => "fd",
        }
    }
}

impl std::fmt::Display for FaultModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hardware noise levels `nu = (p_v, p_c, p_a)` at the outputs of the VNU,
/// CNU and APP units, under a given fault model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub model: FaultModel,
    pub p_v: f64,
    pub p_c: f64,
    pub p_a: f64,
}

impl NoiseParams {
    pub fn noiseless() -> Self {
        Self {
            model: FaultModel::None,
            p_v: 0.0,
            p_c: 0.0,
            p_a: 0.0,
        }
    }

    pub fn new(model: FaultModel, p_v: f64, p_c: f64, p_a: f64) -> Result<Self, AlphabetError> {
        if model == FaultModel::None {
            // NONE forces all probabilities to zero
            return Ok(Self::noiseless());
        }
        for p in [p_v, p_c, p_a] {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(AlphabetError::ProbabilityOutOfRange(p));
            }
        }
        Ok(Self {
            model,
            p_v,
            p_c,
            p_a,
        })
    }

    pub fn sp(p_v: f64, p_c: f64, p_a: f64) -> Result<Self, AlphabetError> {
        Self::new(FaultModel::SignPreserving, p_v, p_c, p_a)
    }

    pub fn fd(p_v: f64, p_c: f64, p_a: f64) -> Result<Self, AlphabetError> {
        Self::new(FaultModel::FullDepth, p_v, p_c, p_a)
    }

    /// Same probability at all three units.
    pub fn uniform(model: FaultModel, p: f64) -> Result<Self, AlphabetError> {
        Self::new(model, p, p, p)
    }

    pub fn is_noiseless(&self) -> bool {
        self.model == FaultModel::None
    }
}
