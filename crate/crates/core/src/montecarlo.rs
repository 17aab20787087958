//! Trajectory-level Monte Carlo estimator.
//!
//! Independent cross-check of the quadrature model: atoms are drawn from
//! the full 6D phase-space distribution (isotropic Gaussians in position
//! and velocity), propagated ballistically, and each one sees the beam at
//! its true radius `r(t_i) = |(x0 + vx t_i, y0 + vy t_i)|` at every pulse.
//! No comoving-coordinate assumption enters, so the difference between
//! this estimate and the quadrature result measures that approximation.
//!
//! Sampling is sharded: shard `k` draws [`SHARD_SIZE`] atoms from its own
//! ChaCha8 stream (`set_stream(k)` on the seeded generator), shards run in
//! parallel on the current rayon pool, and the partial sums are reduced in
//! shard order. Results are therefore bit-identical for a given seed
//! regardless of worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interferometer::{sequence_transfer, MzSequence};
use crate::physics::AtomCloud;

/// Atoms per RNG stream. Fixed so that estimates do not depend on how the
/// shards are distributed over threads.
pub const SHARD_SIZE: usize = 8192;

/// Name of the RNG, recorded in output metadata so runs can be reproduced
/// elsewhere.
pub const RNG_ALGORITHM: &str = "chacha8";

/// One atom's initial phase-space coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceSample {
    pub x0: f64,
    pub y0: f64,
    pub z0: f64,
    pub vx0: f64,
    pub vy0: f64,
    pub vz0: f64,
}

impl PhaseSpaceSample {
    /// Distance from the (longitudinal) beam axis after free flight `t`.
    pub fn radius_at(&self, t: f64) -> f64 {
        (self.x0 + self.vx0 * t).hypot(self.y0 + self.vy0 * t)
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation divided by `sqrt(n_samples)`.
    pub std_error: f64,
    pub n_samples: usize,
}

impl McEstimate {
    /// Absolute difference from `reference` in units of the standard error.
    pub fn sigma_distance(&self, reference: f64) -> f64 {
        (self.mean - reference).abs() / self.std_error
    }
}

fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

fn draw_sample(rng: &mut ChaCha8Rng, pos: &Normal<f64>, vel: &Normal<f64>) -> PhaseSpaceSample {
    PhaseSpaceSample {
        x0: pos.sample(rng),
        y0: pos.sample(rng),
        z0: pos.sample(rng),
        vx0: vel.sample(rng),
        vy0: vel.sample(rng),
        vz0: vel.sample(rng),
    }
}

fn distributions(cloud: &AtomCloud) -> (Normal<f64>, Normal<f64>) {
    // zero-width distributions are fine (they sample the mean)
    let pos = Normal::new(0.0, cloud.sigma0()).expect("sigma0 validated");
    let vel = Normal::new(0.0, cloud.velocity_width()).expect("temperature validated");
    (pos, vel)
}

/// `n` independent draws from the cloud's phase-space distribution,
/// deterministic for a given seed.
pub fn sample_cloud(cloud: &AtomCloud, n: usize, rng_seed: u64) -> Result<Vec<PhaseSpaceSample>> {
    if n == 0 {
        return Err(Error::domain("need at least one sample".to_string()));
    }
    let (pos, vel) = distributions(cloud);
    let shards = n.div_ceil(SHARD_SIZE);
    let mut samples = Vec::with_capacity(n);
    for shard in 0..shards {
        let mut rng = shard_rng(rng_seed, shard as u64);
        let count = SHARD_SIZE.min(n - shard * SHARD_SIZE);
        for _ in 0..count {
            samples.push(draw_sample(&mut rng, &pos, &vel));
        }
    }
    Ok(samples)
}

/// Sharded mean of `per_atom` over `n` fresh draws. The reduction runs in
/// shard-index order, keeping the result independent of thread scheduling.
fn mc_mean<F>(cloud: &AtomCloud, n: usize, rng_seed: u64, per_atom: F) -> Result<McEstimate>
where
    F: Fn(&PhaseSpaceSample) -> f64 + Sync,
{
    if n == 0 {
        return Err(Error::domain("need at least one sample".to_string()));
    }
    let (pos, vel) = distributions(cloud);
    let shards = n.div_ceil(SHARD_SIZE);
    let partials: Vec<(f64, f64)> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = shard_rng(rng_seed, shard as u64);
            let count = SHARD_SIZE.min(n - shard * SHARD_SIZE);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..count {
                let value = per_atom(&draw_sample(&mut rng, &pos, &vel));
                sum += value;
                sum_sq += value * value;
            }
            (sum, sum_sq)
        })
        .collect();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for (s, q) in partials {
        sum += s;
        sum_sq += q;
    }
    let n_f = n as f64;
    let mean = sum / n_f;
    let variance = ((sum_sq - sum * sum / n_f) / (n_f - 1.0).max(1.0)).max(0.0);
    Ok(McEstimate {
        mean,
        std_error: (variance / n_f).sqrt(),
        n_samples: n,
    })
}

/// Monte Carlo estimate of the single-pulse transition probability for
/// pulse `pulse_index` of the sequence applied alone.
pub fn mc_single_pulse_p2(
    seq: &MzSequence,
    pulse_index: usize,
    n: usize,
    rng_seed: u64,
) -> Result<McEstimate> {
    if pulse_index >= 3 {
        return Err(Error::domain(format!(
            "pulse index must be 0..=2, got {pulse_index}"
        )));
    }
    let t = seq.firing_times()[pulse_index];
    let pulse = seq.pulses()[pulse_index];
    let beam = *seq.beam();
    mc_mean(seq.cloud(), n, rng_seed, move |atom| {
        let omega = pulse.gamma
            * beam
                .effective_rabi(atom.radius_at(t))
                .expect("radius is non-negative");
        let half_area = omega * pulse.duration / 2.0;
        half_area.sin().powi(2)
    })
}

/// Monte Carlo estimate of the three-pulse output probability at fringe
/// phase `phi3`. Resonant matrices as in the quadrature model; `vz0` is
/// drawn but does not enter the dynamics.
pub fn mc_three_pulse_p2(
    seq: &MzSequence,
    phi3: f64,
    n: usize,
    rng_seed: u64,
) -> Result<McEstimate> {
    let times = seq.firing_times();
    let pulses = *seq.pulses();
    let beam = *seq.beam();
    let durations = [pulses[0].duration, pulses[1].duration, pulses[2].duration];
    let phases = [pulses[0].phase, pulses[1].phase, phi3];
    mc_mean(seq.cloud(), n, rng_seed, move |atom| {
        let omega = |i: usize| {
            pulses[i].gamma
                * beam
                    .effective_rabi(atom.radius_at(times[i]))
                    .expect("radius is non-negative")
        };
        sequence_transfer([omega(0), omega(1), omega(2)], durations, phases)
            .expect("pulse parameters validated")
            .transition_probability()
    })
}

/// Monte Carlo fringe contrast from the two-point formula, with the
/// standard error propagated from both fringe extrema.
pub fn mc_contrast(seq: &MzSequence, n: usize, rng_seed: u64) -> Result<McEstimate> {
    let p_dark = mc_three_pulse_p2(seq, 0.0, n, rng_seed)?;
    let p_bright = mc_three_pulse_p2(seq, std::f64::consts::PI, n, rng_seed.wrapping_add(1))?;
    let total = p_bright.mean + p_dark.mean;
    if total == 0.0 {
        return Err(Error::domain(
            "fringe has zero mean population, contrast undefined".to_string(),
        ));
    }
    let contrast = (p_bright.mean - p_dark.mean) / total;
    // dC/dp_bright = 2 p_dark / total^2, dC/dp_dark = -2 p_bright / total^2
    let dc_bright = 2.0 * p_dark.mean / (total * total);
    let dc_dark = 2.0 * p_bright.mean / (total * total);
    let std_error =
        ((dc_bright * p_bright.std_error).powi(2) + (dc_dark * p_dark.std_error).powi(2)).sqrt();
    Ok(McEstimate {
        mean: contrast,
        std_error,
        n_samples: n,
    })
}
