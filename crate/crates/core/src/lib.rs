//! Downlink MU-MISO simulation under disco-IRS jamming.
//!
//! A disco IRS randomly re-phases its elements during each coherence
//! interval, so the channel the AP estimates in the pilot phase differs from
//! the one seen during data transmission. This crate models that aging,
//! its closed-form statistics, and a precoder that uses only those
//! statistics to suppress the resulting interference.
//!
//! ```
//! use antijam_core::dirs::{DirsCase, DirsProfile, JammerMode};
//! use antijam_core::stats::alpha_bar;
//!
//! let p = DirsProfile::one_bit(DirsCase::C1, JammerMode::Temporal);
//! assert!((alpha_bar(&p) - 0.91).abs() < 1e-12);
//! ```

pub mod channel;
pub mod config;
pub mod cplx;
pub mod dirs;
pub mod error;
pub mod estimate;
pub mod harness;
pub mod metrics;
pub mod precode;
pub mod scenario;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
