//! Named entity extraction driven by uncommon words.
//!
//! The pipeline has four parts:
//!
//! * [`induction`] learns which words hardly ever appear outside entities,
//! * [`lexicon`] holds word-level entity tokens, generic modifiers and
//!   trigger words,
//! * [`scheme`] maps tokens onto the constituent tag set `U`/`G`/`T`/`O`,
//!   both as input pre-tags and as CRF output labels,
//! * [`features`] and [`crf`] turn tagged sentences into a trained
//!   linear-chain CRF.
//!
//! [`corpus`] reads and writes CoNLL column files, [`eval`] scores entity
//! spans and [`analysis`] produces corpus statistics. [`pipeline`] wires
//! everything into a single trainable and serializable [`pipeline::UgtoModel`].

pub mod analysis;
pub mod cli;
pub mod corpus;
pub mod crf;
pub mod error;
pub mod eval;
pub mod features;
pub mod induction;
pub mod lexicon;
pub mod pipeline;
pub mod scheme;
mod util;

pub use error::{Error, Result};
