//! Conversation-thread analysis: arrival patterns, distinct-participant
//! densities, generative thread models, and length and re-entry prediction.
//!
//! Runnable walkthroughs live in `examples/` (`cargo run --release --example NAME`):
//!
//! | example | shows |
//! |---|---|
//! | `simulate_models` | urn and class-F densities, modes, bimodality gap |
//! | `exact_class_f` | exact class-F distribution against simulation |
//! | `synthetic_corpus` | corpus generation and JSON-lines round trip |
//! | `arrival_patterns` | pattern encoding and re-entry statistics |
//! | `delta_heatmap` | per-user distinct-participant heat map |
//! | `conditional_means` | length and re-entry conditioned on links, lag, opening |
//! | `text_distinctiveness` | language-model scores and elastic-net term selection |
//! | `length_prediction` | bagged trees against the positive-rate baseline |
//! | `reentry_prediction` | first-commenter re-entry task |
//! | `feature_selection` | stepwise forward selection |
//! | `cross_validation` | thread-grouped k-fold evaluation |
//!
//! The `threadlab` binary exposes the same pipeline; see [`cli`].

pub mod analysis;
pub mod cli;
pub mod corpus;
pub mod features;
pub mod genmodels;
pub mod learn;
pub mod patterns;
pub mod rng;
