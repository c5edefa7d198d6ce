//! Finite alphabet iterative decoders (FAIDs) for regular LDPC codes on
//! faulty hardware.
//!
//! The crate provides, in rough dependency order:
//!
//! - [`alphabet`]: symmetric message alphabets, ensembles, and fault
//!   parameters shared by everything else;
//! - [`pmf`]: probability mass functions over those alphabets;
//! - [`lut`]: variable-node update rules as lookup tables, including the
//!   published 7-level rules and a text file format for rule exchange;
//! - [`decoder`]: the noiseless min-sum CNU, LUT-based VNU, APP computation
//!   and hard decision;
//! - [`fault`]: sign-preserving (SP) and full-depth (FD) transient-fault
//!   transition matrices, general conditional-PMF faulty functions, and
//!   symmetry / decomposability checks;
//! - [`de`]: the noisy density-evolution recursion and its per-iteration
//!   error probability;
//! - [`threshold`]: functional-threshold estimation from sampled
//!   error-probability curves, plus useful-region and target-BER thresholds;
//! - [`designer`]: enumeration and ingestion of candidate rules and their
//!   ranking by robustness to a fault model;
//! - [`sim`]: finite-length fault-injected Monte Carlo simulation on Tanner
//!   graphs (alist input, BER/FER estimation).

pub mod alphabet;
pub mod de;
pub mod decoder;
pub mod designer;
pub mod fault;
pub mod lut;
pub mod pmf;
pub mod sim;
pub mod threshold;

pub use alphabet::{AppAlphabet, EnsembleSpec, FaultModel, MessageAlphabet, NoiseParams};
pub use decoder::DecoderSpec;
pub use lut::Lut;
pub use pmf::MessagePmf;
