//! Exact simulation of deterministic secure quantum communication.
//!
//! Two one-way protocols are modelled: one over pure, not necessarily
//! maximally, entangled two-qudit pairs and one over `d`-dimensional single
//! photons. Both check the channel with decoy photons and let the receiver
//! decode each dit after one classical announcement.
//!
//! - [`qudit`]: states, bases, unitaries and projective measurement
//! - [`sources`]: pair, decoy and single-photon preparation
//! - [`channel`]: loss, depolarization and intercept-resend attacks
//! - [`protocols`]: full two-party sessions with transcripts
//! - [`metrics`]: entropy, efficiency and attenuation
//! - [`harness`]: scenario configs, Monte Carlo runs and reports

pub mod channel;
pub mod harness;
pub mod metrics;
pub mod protocols;
pub mod qudit;
pub mod sources;

/// Random stream type used throughout the simulator.
pub type SimRng = rand_chacha::ChaCha8Rng;
