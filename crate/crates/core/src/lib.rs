//! Contrast loss and intensity compensation in Mach-Zehnder light-pulse
//! atom interferometers.
//!
//! A thermally expanding atom cloud samples an ever-larger portion of the
//! Gaussian Raman beam profile, so later pulses drive the ensemble with
//! increasingly inhomogeneous Rabi frequencies: pulse fidelity and fringe
//! contrast fall as the beam-to-cloud diameter ratio shrinks. This crate
//! models that loss and computes the per-pulse intensity factors that
//! restore most of it:
//!
//! * [`physics`]: two-level transfer matrices, Gaussian beam, cloud
//!   expansion law;
//! * [`quadrature`]: density-weighted radial averaging (adaptive Simpson);
//! * [`interferometer`]: pi/2-pi-pi/2 sequences, Rabi curves, fringes,
//!   contrast, parameter sweeps;
//! * [`compensation`]: per-pulse intensity factor optimization;
//! * [`montecarlo`]: trajectory-level Monte Carlo cross-check;
//! * [`scenario`]: the canonical parameter presets.
//!
//! ```
//! use mzfringe::interferometer::contrast;
//! use mzfringe::quadrature::RadialGrid;
//! use mzfringe::scenario::Preset;
//!
//! let grid = RadialGrid::default();
//! let c = contrast(&Preset::Normal.sequence(), &grid, None).unwrap();
//! assert!((c - 0.415).abs() < 0.015);
//! ```

pub mod compensation;
pub mod error;
pub mod interferometer;
pub mod montecarlo;
pub mod physics;
pub mod quadrature;
pub mod scenario;

pub use error::{Error, Result};
