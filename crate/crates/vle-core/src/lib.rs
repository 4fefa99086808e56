//! Analysis core for student activity logs from a virtual learning environment.
//!
//! The crate turns day-level click records into weekly feature families and
//! runs three analyses on top of them:
//!
//! * [`bayes`]: per-content-type success tables and a naive Bayes model of
//!   the probability that a student fails the assignment of interest,
//! * [`guha`]: an ASSOC-style association miner over categorical activity
//!   attributes with 4ft-table quantifiers,
//! * [`markov`]: week-indexed transition models of activity states plus a
//!   scenario engine for zero/non-zero weekly activity patterns.
//!
//! [`discretize`] supplies the binnings shared by the miner and the Markov
//! state spaces, [`export`] renders models and reports as DOT graphs and CSV
//! tables, and [`datagen`] produces deterministic synthetic cohorts with
//! analytically known ground truth for verifying every estimator.
//!
//! The crate is `no_std` (with `alloc`); all file and process handling lives
//! in the companion `vle-miner` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bayes;
pub mod datagen;
pub mod discretize;
pub mod export;
pub mod features;
pub mod guha;
pub mod markov;
pub mod model;
pub mod rng;

pub use features::{Outcome, StudyWeek, WeekRange};
pub use model::{
    AssessmentRecord, ClickRecord, ContentType, Dataset, PresentationConfig, StudentId, Vocabulary,
};
