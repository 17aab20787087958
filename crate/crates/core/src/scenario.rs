//! Reference parameter sets used throughout the tests and the CLI.

use std::f64::consts::PI;

use crate::interferometer::MzSequence;
use crate::physics::{AtomCloud, RamanBeam};

/// Nominal on-axis Rabi frequency, 2 pi x 25 kHz. Fidelities, factors, and
/// contrasts depend only on pulse areas and diameter ratios, so this sets
/// the absolute timescale without affecting any figure of merit.
pub const OMEGA_MAX0: f64 = 2.0 * PI * 25e3;

/// Initial cloud width shared by all presets (m).
pub const SIGMA0: f64 = 3e-3;

/// First-pulse firing time after release (s).
pub const T1: f64 = 0.13;

/// Pulse interval (s).
pub const INTERVAL: f64 = 0.26;

/// Canonical measurement situations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// 7 uK cloud, 20 mm beam.
    Normal,
    /// 3 uK cloud, 30 mm beam.
    Better,
    /// Expansion-free cloud under a beam 100x its width: every diameter
    /// ratio is pinned at 100.
    Ideal,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Normal => "normal",
            Preset::Better => "better",
            Preset::Ideal => "ideal",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "normal" => Some(Preset::Normal),
            "better" => Some(Preset::Better),
            "ideal" => Some(Preset::Ideal),
            _ => None,
        }
    }

    pub fn beam(self) -> RamanBeam {
        let width = match self {
            Preset::Normal => 20e-3,
            Preset::Better => 30e-3,
            Preset::Ideal => 100.0 * SIGMA0,
        };
        RamanBeam::new(width, OMEGA_MAX0).expect("preset parameters are valid")
    }

    pub fn cloud(self) -> AtomCloud {
        let temperature = match self {
            Preset::Normal => 7e-6,
            Preset::Better => 3e-6,
            Preset::Ideal => 0.0,
        };
        AtomCloud::rb87(SIGMA0, temperature).expect("preset parameters are valid")
    }

    /// The preset's nominal sequence at the standard timing.
    pub fn sequence(self) -> MzSequence {
        MzSequence::new(self.beam(), self.cloud(), T1, INTERVAL)
            .expect("preset parameters are valid")
    }
}
