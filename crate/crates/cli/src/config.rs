//! Configuration resolution: preset, then config file keys, then flags.
//!
//! The file format is JSON with explicit unit suffixes on the keys
//! (millimetres, microkelvin, milliseconds, kilohertz); everything is
//! stored internally in SI units. A compact, fully resolved copy is
//! embedded in every output artifact for provenance.

use std::path::Path;

use serde::{Deserialize, Serialize};

use mzfringe::compensation::CompensationMode;
use mzfringe::interferometer::MzSequence;
use mzfringe::montecarlo::{RNG_ALGORITHM, SHARD_SIZE};
use mzfringe::physics::{AtomCloud, LaserParams, RamanBeam, RB87_MASS};
use mzfringe::quadrature::{DetectionZone, RadialGrid};
use mzfringe::scenario::{Preset, INTERVAL, OMEGA_MAX0, SIGMA0, T1};

use crate::CliError;

const DEFAULT_MC_SAMPLES: usize = 200_000;
const DEFAULT_MC_SEED: u64 = 1;

/// On-disk configuration. Every field is optional; unset fields fall back
/// to the selected preset.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Option<String>,
    pub sigma0_mm: Option<f64>,
    pub temperature_uk: Option<f64>,
    pub mass_kg: Option<f64>,
    pub width_mm: Option<f64>,
    /// Peak two-photon Rabi frequency as omega_max / 2 pi, in kHz.
    pub rabi_khz: Option<f64>,
    /// Alternative to `rabi_khz`: derive the peak Rabi frequency from
    /// laser parameters. Setting both is an error.
    pub laser: Option<LaserConfig>,
    pub t1_ms: Option<f64>,
    pub interval_ms: Option<f64>,
    pub phases_rad: Option<[f64; 3]>,
    pub quadrature: Option<QuadratureConfig>,
    pub monte_carlo: Option<MonteCarloConfig>,
    pub detection: Option<DetectionConfig>,
    /// With `false`, compensation leaves the first pulse at gamma = 1.
    pub compensate_first_pulse: Option<bool>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserConfig {
    pub linewidth_mhz: f64,
    pub i_sat_w_m2: f64,
    pub power_mw: f64,
    pub detuning_ghz: f64,
}

#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub rho_max: Option<f64>,
    pub tolerance: Option<f64>,
    pub max_subdivisions: Option<usize>,
}

#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionConfig {
    pub rho_cut: f64,
    pub renormalize: Option<bool>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("cannot parse config {}: {e}", path.display())))
    }
}

/// Fully resolved run parameters (SI units), embedded verbatim in output
/// metadata.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub scenario: String,
    pub sigma0_m: f64,
    pub temperature_k: f64,
    pub mass_kg: f64,
    pub width_m: f64,
    pub omega_max_rad_s: f64,
    pub t1_s: f64,
    pub interval_s: f64,
    pub phases_rad: [f64; 3],
    pub quadrature: ResolvedQuadrature,
    pub detection: Option<ResolvedDetection>,
    pub monte_carlo: ResolvedMonteCarlo,
    pub compensate_first_pulse: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedQuadrature {
    pub rho_max: f64,
    pub tolerance: f64,
    pub max_subdivisions: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedDetection {
    pub rho_cut: f64,
    pub renormalize: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedMonteCarlo {
    pub samples: usize,
    pub seed: u64,
    pub rng: &'static str,
    pub shard_size: usize,
}

/// Flag-level overrides applied after the config file.
#[derive(Debug, Default, Clone, Copy)]
pub struct Overrides {
    pub mc_samples: Option<usize>,
    pub seed: Option<u64>,
}

pub fn resolve(
    scenario_flag: Option<&str>,
    file: Option<&ConfigFile>,
    overrides: Overrides,
) -> Result<Resolved, CliError> {
    let preset_name = scenario_flag
        .or(file.and_then(|f| f.scenario.as_deref()))
        .unwrap_or("normal");
    let preset = Preset::from_name(preset_name).ok_or_else(|| {
        CliError::Config(format!(
            "unknown scenario '{preset_name}' (expected normal, better, or ideal)"
        ))
    })?;

    let empty = ConfigFile::default();
    let file = file.unwrap_or(&empty);

    let sigma0 = file.sigma0_mm.map_or(SIGMA0, |v| v * 1e-3);
    let temperature = file
        .temperature_uk
        .map_or(preset.cloud().temperature(), |v| v * 1e-6);
    let mass = file.mass_kg.unwrap_or(RB87_MASS);
    let width = file.width_mm.map_or(preset.beam().width(), |v| v * 1e-3);

    if file.rabi_khz.is_some() && file.laser.is_some() {
        return Err(CliError::Config(
            "set either rabi_khz or laser parameters, not both".to_string(),
        ));
    }
    let omega_max = match (file.rabi_khz, file.laser) {
        (Some(khz), None) => 2.0 * std::f64::consts::PI * khz * 1e3,
        (None, Some(laser)) => RamanBeam::from_laser(
            &LaserParams {
                gamma_nat: 2.0 * std::f64::consts::PI * laser.linewidth_mhz * 1e6,
                i_sat: laser.i_sat_w_m2,
                p0: laser.power_mw * 1e-3,
                detuning_single: 2.0 * std::f64::consts::PI * laser.detuning_ghz * 1e9,
            },
            width,
        )?
        .omega_max(),
        (None, None) => OMEGA_MAX0,
        (Some(_), Some(_)) => unreachable!(),
    };

    let customized = file.sigma0_mm.is_some()
        || file.temperature_uk.is_some()
        || file.mass_kg.is_some()
        || file.width_mm.is_some()
        || file.rabi_khz.is_some()
        || file.laser.is_some()
        || file.t1_ms.is_some()
        || file.interval_ms.is_some()
        || file.phases_rad.is_some();
    let scenario = if customized {
        "custom".to_string()
    } else {
        preset.name().to_string()
    };

    let quad = file.quadrature.unwrap_or_default();
    let grid_defaults = RadialGrid::default();
    let quadrature = ResolvedQuadrature {
        rho_max: quad.rho_max.unwrap_or(grid_defaults.rho_max()),
        tolerance: quad.tolerance.unwrap_or(grid_defaults.tolerance()),
        max_subdivisions: quad
            .max_subdivisions
            .unwrap_or(grid_defaults.max_subdivisions()),
    };

    let mc = file.monte_carlo.unwrap_or_default();
    let monte_carlo = ResolvedMonteCarlo {
        samples: overrides
            .mc_samples
            .or(mc.samples)
            .unwrap_or(DEFAULT_MC_SAMPLES),
        seed: overrides.seed.or(mc.seed).unwrap_or(DEFAULT_MC_SEED),
        rng: RNG_ALGORITHM,
        shard_size: SHARD_SIZE,
    };

    Ok(Resolved {
        scenario,
        sigma0_m: sigma0,
        temperature_k: temperature,
        mass_kg: mass,
        width_m: width,
        omega_max_rad_s: omega_max,
        t1_s: file.t1_ms.map_or(T1, |v| v * 1e-3),
        interval_s: file.interval_ms.map_or(INTERVAL, |v| v * 1e-3),
        phases_rad: file.phases_rad.unwrap_or([0.0; 3]),
        quadrature,
        detection: file.detection.map(|d| ResolvedDetection {
            rho_cut: d.rho_cut,
            renormalize: d.renormalize.unwrap_or(true),
        }),
        monte_carlo,
        compensate_first_pulse: file.compensate_first_pulse.unwrap_or(true),
    })
}

impl Resolved {
    pub fn beam(&self) -> Result<RamanBeam, CliError> {
        Ok(RamanBeam::new(self.width_m, self.omega_max_rad_s)?)
    }

    pub fn cloud(&self) -> Result<AtomCloud, CliError> {
        Ok(AtomCloud::new(
            self.sigma0_m,
            self.temperature_k,
            self.mass_kg,
        )?)
    }

    pub fn sequence(&self) -> Result<MzSequence, CliError> {
        let seq = MzSequence::new(self.beam()?, self.cloud()?, self.t1_s, self.interval_s)?
            .with_phases(self.phases_rad);
        Ok(seq)
    }

    pub fn grid(&self) -> Result<RadialGrid, CliError> {
        Ok(RadialGrid::new(
            self.quadrature.rho_max,
            self.quadrature.tolerance,
            self.quadrature.max_subdivisions,
        )?)
    }

    pub fn detection_zone(&self) -> Result<Option<DetectionZone>, CliError> {
        match &self.detection {
            None => Ok(None),
            Some(d) => {
                let zone = DetectionZone::new(d.rho_cut)?;
                Ok(Some(if d.renormalize {
                    zone
                } else {
                    zone.without_renormalization()
                }))
            }
        }
    }

    pub fn compensation_mode(&self) -> CompensationMode {
        if self.compensate_first_pulse {
            CompensationMode::AllPulses
        } else {
            CompensationMode::SkipFirst
        }
    }

    /// Compact JSON used in the provenance comment of every artifact.
    pub fn metadata_json(&self) -> String {
        serde_json::to_string(self).expect("resolved config serializes")
    }
}
