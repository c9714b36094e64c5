//! Vulnerability description characterization: corpus handling, text
//! features, six classifiers, cross-validated evaluation and rank tests.

pub mod classifiers;
pub mod corpus;
pub mod evaluation;
pub mod pipeline;
pub mod rng;
pub mod stats;
pub mod textprep;
