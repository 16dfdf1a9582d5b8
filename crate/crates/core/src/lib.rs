//! Differentially private streaming submodular maximization.
//!
//! Elements arrive once, in order. The maximizer keeps at most `k` elements
//! per guess of the optimum and releases one set under `(epsilon, delta)`
//! differential privacy with respect to the dataset the objective is built
//! from.

pub mod accounting;
pub mod data;
pub mod error;
pub mod experiment;
pub mod noise;
pub mod objectives;
pub mod streaming;
pub mod submodular;

pub use accounting::{budget_split, BudgetSplit, CompositionMode, NoiseFamily, PrivacyParams};
pub use error::{Error, Result};
pub use noise::{derive_seed, private_argmax, NoiseSource};
pub use objectives::{Coverage, KMedians};
pub use streaming::{pssm, GuessLadder, NoiseMode, PssmConfig, RunDiagnostics};
pub use submodular::{Element, Oracle};
