//! Temporal interference correlation for a link in a Poisson field of
//! ALOHA interferers under Rayleigh fading.
//!
//! The analytic side is organised around the diversity polynomial
//! `D_n(p, δ)`, which sets the exponent of the joint success probability of
//! `n` consecutive transmissions over a static interferer geometry. On top
//! of it sit conditional success and outage probabilities, the two-slot
//! joint SIR distribution with asymmetric thresholds, and local-delay
//! statistics. [`montecarlo`] simulates the same model directly and serves
//! as an independent check on every closed form.

pub mod config;
pub mod diversity;
pub mod error;
pub mod joint_stats;
pub mod local_delay;
pub mod montecarlo;
pub mod network;
pub mod quadrature;
pub mod roots;
pub mod specfun;
pub mod two_threshold;
pub mod xprec;

pub use config::ParamFile;
pub use diversity::{div_poly, DiversityEval, DiversityForm, Precision};
pub use error::{Error, Result};
pub use joint_stats::{JointSuccessResult, LinkModel};
pub use local_delay::{DelayModel, DistanceMode};
pub use montecarlo::{SimConfig, SimEstimate};
pub use network::{contention, Contention, NetworkParams};
pub use two_threshold::TwoThresholdSpec;
