//! Mach-Zehnder pulse sequences and their ensemble-averaged signals.
//!
//! The model is resonant (zero two-photon detuning) and effectively
//! one-dimensional: pulses are short against the expansion, so each atom
//! samples the beam at a frozen radius, and in coordinates normalized to
//! the running cloud width that radius is the same at every pulse (the
//! comoving-coordinate picture; see [`crate::montecarlo`] for the
//! trajectory-level check of this approximation). Longitudinal position
//! integrates out exactly for a transversely Gaussian beam, leaving the
//! radial average of [`crate::quadrature`].

use crate::compensation::{sequence_gammas, CompensationMode};
use crate::error::{Error, Result};
use crate::physics::{diameter_ratio, AtomCloud, PulseTransfer, RamanBeam};
use crate::quadrature::{radial_average, DetectionZone, RadialGrid};

/// One Raman pulse of the sequence: intensity factor `gamma` scaling the
/// peak Rabi frequency, square-pulse `duration`, and laser `phase`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanPulse {
    pub gamma: f64,
    pub duration: f64,
    pub phase: f64,
}

/// pi/2 - pi - pi/2 sequence fired at `t1`, `t1 + interval`,
/// `t1 + 2 interval` after release of the cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct MzSequence {
    beam: RamanBeam,
    cloud: AtomCloud,
    t1: f64,
    interval: f64,
    pulses: [RamanPulse; 3],
}

impl MzSequence {
    /// Nominal sequence: durations `pi/2 : pi : pi/2` in units of
    /// `1/omega_max`, unit intensity factors, zero phases.
    pub fn new(beam: RamanBeam, cloud: AtomCloud, t1: f64, interval: f64) -> Result<Self> {
        if t1 < 0.0 {
            return Err(Error::domain(format!(
                "first pulse time must be >= 0, got {t1}"
            )));
        }
        if interval < 0.0 {
            return Err(Error::domain(format!(
                "pulse interval must be >= 0, got {interval}"
            )));
        }
        let tau_pi = beam.tau_pi();
        let pulse = |duration| RamanPulse {
            gamma: 1.0,
            duration,
            phase: 0.0,
        };
        Ok(Self {
            beam,
            cloud,
            t1,
            interval,
            pulses: [pulse(tau_pi / 2.0), pulse(tau_pi), pulse(tau_pi / 2.0)],
        })
    }

    /// Replace the per-pulse intensity factors.
    pub fn with_gammas(mut self, gammas: [f64; 3]) -> Result<Self> {
        if gammas.iter().any(|&g| g <= 0.0) {
            return Err(Error::domain(format!(
                "intensity factors must be > 0, got {gammas:?}"
            )));
        }
        for (pulse, gamma) in self.pulses.iter_mut().zip(gammas) {
            pulse.gamma = gamma;
        }
        Ok(self)
    }

    /// Replace the per-pulse laser phases.
    pub fn with_phases(mut self, phases: [f64; 3]) -> Self {
        for (pulse, phase) in self.pulses.iter_mut().zip(phases) {
            pulse.phase = phase;
        }
        self
    }

    /// Replace the per-pulse durations.
    pub fn with_durations(mut self, durations: [f64; 3]) -> Result<Self> {
        if durations.iter().any(|&tau| tau < 0.0) {
            return Err(Error::domain(format!(
                "durations must be >= 0, got {durations:?}"
            )));
        }
        for (pulse, duration) in self.pulses.iter_mut().zip(durations) {
            pulse.duration = duration;
        }
        Ok(self)
    }

    /// Same sequence with a different pulse spacing.
    pub fn with_interval(mut self, interval: f64) -> Result<Self> {
        if interval < 0.0 {
            return Err(Error::domain(format!(
                "pulse interval must be >= 0, got {interval}"
            )));
        }
        self.interval = interval;
        Ok(self)
    }

    pub fn beam(&self) -> &RamanBeam {
        &self.beam
    }

    pub fn cloud(&self) -> &AtomCloud {
        &self.cloud
    }

    pub fn t1(&self) -> f64 {
        self.t1
    }

    pub fn interval(&self) -> f64 {
        self.interval
    }

    pub fn pulses(&self) -> &[RamanPulse; 3] {
        &self.pulses
    }

    /// Pulse firing times `[t1, t1 + T, t1 + 2T]`.
    pub fn firing_times(&self) -> [f64; 3] {
        [
            self.t1,
            self.t1 + self.interval,
            self.t1 + 2.0 * self.interval,
        ]
    }

    /// Beam-to-cloud diameter ratio `s_i = w / sigma(t_i)` at each pulse.
    pub fn diameter_ratios(&self) -> Result<[f64; 3]> {
        let [t1, t2, t3] = self.firing_times();
        Ok([
            diameter_ratio(&self.beam, &self.cloud, t1)?,
            diameter_ratio(&self.beam, &self.cloud, t2)?,
            diameter_ratio(&self.beam, &self.cloud, t3)?,
        ])
    }

    /// Effective Rabi frequency of pulse `i` at normalized radius `rho`,
    /// `gamma_i * omega_max * exp(-rho^2 / 2 s_i^2)`.
    fn omega_at(&self, index: usize, ratio: f64, rho: f64) -> f64 {
        self.pulses[index].gamma
            * self.beam.omega_max()
            * (-rho * rho / (2.0 * ratio * ratio)).exp()
    }
}

/// One full fringe: sampled output probabilities and the two-point
/// contrast extracted at `phi3 = 0` and `pi`.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeResult {
    /// `(phi3, P2)` samples over one fringe period.
    pub phi3_samples: Vec<(f64, f64)>,
    /// `(p_at_pi - p_at_0) / (p_at_pi + p_at_0)`.
    pub contrast: f64,
    pub p_at_0: f64,
    pub p_at_pi: f64,
}

/// Transfer matrix of a resonant three-pulse sequence with the given
/// per-pulse Rabi frequencies, durations, and phases.
pub fn sequence_transfer(
    omega_effs: [f64; 3],
    durations: [f64; 3],
    phases: [f64; 3],
) -> Result<PulseTransfer> {
    let mut total = PulseTransfer::identity();
    for i in 0..3 {
        let pulse = PulseTransfer::new(omega_effs[i], durations[i], 0.0, 0.0, phases[i])?;
        total = pulse.compose(&total);
    }
    Ok(total)
}

/// Ensemble-averaged transition probability of one resonant pulse of
/// duration `tau` and intensity factor `gamma` fired `t` after release:
/// the radial average of `sin^2(gamma omega_max e^{-rho^2/2s^2} tau / 2)`
/// with `s = w / sigma(t)`.
pub fn single_pulse_p2(
    beam: &RamanBeam,
    cloud: &AtomCloud,
    t: f64,
    tau: f64,
    gamma: f64,
    grid: &RadialGrid,
    detection: Option<&DetectionZone>,
) -> Result<f64> {
    if tau < 0.0 {
        return Err(Error::domain(format!(
            "pulse duration must be >= 0, got {tau}"
        )));
    }
    if gamma <= 0.0 {
        return Err(Error::domain(format!(
            "intensity factor must be > 0, got {gamma}"
        )));
    }
    let s = diameter_ratio(beam, cloud, t)?;
    let peak = gamma * beam.omega_max();
    radial_average(
        |rho| {
            let omega = peak * (-rho * rho / (2.0 * s * s)).exp();
            let half_area = omega * tau / 2.0;
            half_area.sin().powi(2)
        },
        grid,
        detection,
    )
}

/// Single-pulse transition probability sampled over a duration range
/// (a Rabi oscillation curve under inhomogeneous coupling).
#[allow(clippy::too_many_arguments)]
pub fn rabi_curve(
    beam: &RamanBeam,
    cloud: &AtomCloud,
    t: f64,
    tau_range: (f64, f64),
    n_points: usize,
    gamma: f64,
    grid: &RadialGrid,
    detection: Option<&DetectionZone>,
) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = tau_range;
    if !(0.0 <= lo && lo <= hi) {
        return Err(Error::domain(format!(
            "invalid duration range [{lo}, {hi}]"
        )));
    }
    if n_points < 2 {
        return Err(Error::domain(format!(
            "need at least 2 curve points, got {n_points}"
        )));
    }
    let step = (hi - lo) / (n_points - 1) as f64;
    (0..n_points)
        .map(|k| {
            let tau = lo + step * k as f64;
            Ok((
                tau,
                single_pulse_p2(beam, cloud, t, tau, gamma, grid, detection)?,
            ))
        })
        .collect()
}

/// pi-pulse fidelity: ensemble transfer at the nominal duration
/// `pi / omega_max`, with the compensation factor applied as an intensity
/// scaling only.
pub fn pi_fidelity(
    beam: &RamanBeam,
    cloud: &AtomCloud,
    t: f64,
    gamma: f64,
    grid: &RadialGrid,
    detection: Option<&DetectionZone>,
) -> Result<f64> {
    single_pulse_p2(beam, cloud, t, beam.tau_pi(), gamma, grid, detection)
}

/// Ensemble-averaged excited-state population after the full sequence,
/// with the third pulse's phase overridden by `phi3` (the scanned fringe
/// phase).
pub fn three_pulse_p2(
    seq: &MzSequence,
    phi3: f64,
    grid: &RadialGrid,
    detection: Option<&DetectionZone>,
) -> Result<f64> {
    let ratios = seq.diameter_ratios()?;
    let durations = [
        seq.pulses[0].duration,
        seq.pulses[1].duration,
        seq.pulses[2].duration,
    ];
    let phases = [seq.pulses[0].phase, seq.pulses[1].phase, phi3];
    radial_average(
        |rho| {
            let omegas = [
                seq.omega_at(0, ratios[0], rho),
                seq.omega_at(1, ratios[1], rho),
                seq.omega_at(2, ratios[2], rho),
            ];
            sequence_transfer(omegas, durations, phases)
                .expect("pulse parameters validated")
                .transition_probability()
        },
        grid,
        detection,
    )
}

/// Samples the fringe over `phi3` in `[0, 2 pi]` and extracts the
/// two-point contrast from the exact `phi3 = 0` and `pi` evaluations.
pub fn fringe_scan(
    seq: &MzSequence,
    n_points: usize,
    grid: &RadialGrid,
    detection: Option<&DetectionZone>,
) -> Result<FringeResult> {
    if n_points < 2 {
        return Err(Error::domain(format!(
            "need at least 2 fringe points, got {n_points}"
        )));
    }
    let step = 2.0 * std::f64::consts::PI / (n_points - 1) as f64;
    let phi3_samples = (0..n_points)
        .map(|k| {
            let phi = step * k as f64;
            Ok((phi, three_pulse_p2(seq, phi, grid, detection)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let p_at_0 = three_pulse_p2(seq, 0.0, grid, detection)?;
    let p_at_pi = three_pulse_p2(seq, std::f64::consts::PI, grid, detection)?;
    let total = p_at_pi + p_at_0;
    if total == 0.0 {
        return Err(Error::domain(
            "fringe has zero mean population, contrast undefined".to_string(),
        ));
    }
    Ok(FringeResult {
        phi3_samples,
        contrast: (p_at_pi - p_at_0) / total,
        p_at_0,
        p_at_pi,
    })
}

/// Fringe contrast from the two quadrature points of the interferometer
/// phase `phi1 - 2 phi2 + phi3`:
///
/// ```text
/// C = (P_bright - P_dark) / (P_bright + P_dark)
/// ```
///
/// where dark is the nominal fringe minimum `phi3 = 2 phi2 - phi1` and
/// bright the maximum half a period away. These are the exact extrema for
/// the default zero pulse phases (where this coincides with
/// [`FringeResult::contrast`]) and for any common offset `phi1 = phi2`;
/// for independently offset pulse phases the imperfect-mirror cross terms
/// move the fringe slightly, and [`fringe_scan`] should be used instead.
pub fn contrast(
    seq: &MzSequence,
    grid: &RadialGrid,
    detection: Option<&DetectionZone>,
) -> Result<f64> {
    let phi_dark = 2.0 * seq.pulses[1].phase - seq.pulses[0].phase;
    let p_dark = three_pulse_p2(seq, phi_dark, grid, detection)?;
    let p_bright = three_pulse_p2(seq, phi_dark + std::f64::consts::PI, grid, detection)?;
    let total = p_bright + p_dark;
    if total == 0.0 {
        return Err(Error::domain(
            "fringe has zero mean population, contrast undefined".to_string(),
        ));
    }
    Ok((p_bright - p_dark) / total)
}

/// Contrast as a function of the pulse interval `T`, holding everything
/// else in the template sequence fixed. With `compensated` set, the
/// intensity factors are re-optimized for every `T`; otherwise the
/// template's factors apply unchanged.
pub fn contrast_vs_interval(
    template: &MzSequence,
    t_range: (f64, f64),
    n_points: usize,
    compensated: Option<CompensationMode>,
    grid: &RadialGrid,
    detection: Option<&DetectionZone>,
) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = t_range;
    if !(0.0 <= lo && lo <= hi) {
        return Err(Error::domain(format!(
            "invalid interval range [{lo}, {hi}]"
        )));
    }
    if n_points < 2 {
        return Err(Error::domain(format!(
            "need at least 2 sweep points, got {n_points}"
        )));
    }
    let step = (hi - lo) / (n_points - 1) as f64;
    (0..n_points)
        .map(|k| {
            let interval = lo + step * k as f64;
            let mut seq = template.clone().with_interval(interval)?;
            if let Some(mode) = compensated {
                let gammas = sequence_gammas(&seq, mode, grid, detection)?;
                seq = seq.with_gammas(gammas)?;
            }
            Ok((interval, contrast(&seq, grid, detection)?))
        })
        .collect()
}

/// Factor by which single-shot phase sensitivity improves when the
/// contrast changes `c_before -> c_after` and the interval
/// `t_before -> t_after`, from `S proportional to 1 / (T^2 C)` at fixed
/// momentum transfer and atom number: `(c_after/c_before) (t_after/t_before)^2`.
pub fn relative_sensitivity_gain(
    c_before: f64,
    c_after: f64,
    t_before: f64,
    t_after: f64,
) -> Result<f64> {
    if c_before <= 0.0 || c_after <= 0.0 || t_before <= 0.0 || t_after <= 0.0 {
        return Err(Error::domain(format!(
            "sensitivity gain needs positive contrasts and intervals, got \
             ({c_before}, {c_after}, {t_before}, {t_after})"
        )));
    }
    Ok(c_after / c_before * (t_after / t_before).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const OMEGA: f64 = 2.0 * PI * 25e3;

    fn assert_close(x: f64, y: f64, tol: f64) {
        assert!((x - y).abs() <= tol, "{x} vs {y} (tol {tol})");
    }

    fn normal() -> MzSequence {
        let beam = RamanBeam::new(20e-3, OMEGA).unwrap();
        let cloud = AtomCloud::rb87(3e-3, 7e-6).unwrap();
        MzSequence::new(beam, cloud, 0.13, 0.26).unwrap()
    }

    fn better() -> MzSequence {
        let beam = RamanBeam::new(30e-3, OMEGA).unwrap();
        let cloud = AtomCloud::rb87(3e-3, 3e-6).unwrap();
        MzSequence::new(beam, cloud, 0.13, 0.26).unwrap()
    }

    /// Wide beam and cold cloud: every atom sees the peak intensity.
    fn ideal() -> MzSequence {
        let beam = RamanBeam::new(0.3, OMEGA).unwrap();
        let cloud = AtomCloud::rb87(3e-3, 0.0).unwrap();
        MzSequence::new(beam, cloud, 0.13, 0.26).unwrap()
    }

    #[test]
    fn nominal_durations_and_times() {
        let seq = normal();
        let tau_pi = PI / OMEGA;
        assert_close(seq.pulses()[0].duration, tau_pi / 2.0, 1e-18);
        assert_close(seq.pulses()[1].duration, tau_pi, 1e-18);
        assert_close(seq.pulses()[2].duration, tau_pi / 2.0, 1e-18);
        let [t1, t2, t3] = seq.firing_times();
        assert_close(t1, 0.13, 1e-15);
        assert_close(t2, 0.39, 1e-15);
        assert_close(t3, 0.65, 1e-15);
    }

    #[test]
    fn diameter_ratios_shrink_as_cloud_grows() {
        let [s1, s2, s3] = normal().diameter_ratios().unwrap();
        assert!(s1 > s2 && s2 > s3);
        assert_close(s1, 4.4, 0.05);
        assert_close(s2, 1.9, 0.05);
        assert_close(s3, 1.2, 0.05);
    }

    #[test]
    fn perfect_single_pulses() {
        let grid = RadialGrid::default();
        let seq = ideal();
        let (beam, cloud) = (seq.beam(), seq.cloud());
        let p = single_pulse_p2(beam, cloud, 0.13, beam.tau_pi(), 1.0, &grid, None).unwrap();
        assert_close(p, 1.0, 1e-6);
        let p = single_pulse_p2(beam, cloud, 0.13, 0.0, 1.0, &grid, None).unwrap();
        assert_close(p, 0.0, 1e-12);
    }

    #[test]
    fn pulse_transfer_degrades_with_expansion() {
        let grid = RadialGrid::default();
        let seq = normal();
        let (beam, cloud) = (seq.beam(), seq.cloud());
        let tau = beam.tau_pi();
        let at_t1 = single_pulse_p2(beam, cloud, 0.13, tau, 1.0, &grid, None).unwrap();
        let at_t2 = single_pulse_p2(beam, cloud, 0.39, tau, 1.0, &grid, None).unwrap();
        let at_t3 = single_pulse_p2(beam, cloud, 0.65, tau, 1.0, &grid, None).unwrap();
        assert!(at_t1 > at_t2 && at_t2 > at_t3);
        assert!(at_t1 < 1.0);
    }

    #[test]
    fn rabi_curve_damped_and_delayed() {
        let grid = RadialGrid::default();
        let seq = normal();
        let tau0 = seq.beam().tau_pi();
        // third pulse: strongly inhomogeneous coupling
        let curve = rabi_curve(
            seq.beam(),
            seq.cloud(),
            0.65,
            (0.0, 2.0 * tau0),
            201,
            1.0,
            &grid,
            None,
        )
        .unwrap();
        assert_close(curve[0].1, 0.0, 1e-12);
        let (peak_tau, peak_p) = curve
            .iter()
            .copied()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!(peak_p < 0.9);
        assert!(peak_tau > tau0);
    }

    #[test]
    fn ideal_fringe_is_sinusoidal() {
        let seq = ideal();
        let grid = RadialGrid::default();
        for phi in [0.0, PI / 3.0, PI / 2.0, PI, 1.7 * PI] {
            let p = three_pulse_p2(&seq, phi, &grid, None).unwrap();
            assert_close(p, (1.0 - phi.cos()) / 2.0, 1e-6);
        }
        assert_close(contrast(&seq, &grid, None).unwrap(), 1.0, 1e-6);
    }

    #[test]
    fn expansion_degrades_contrast() {
        let grid = RadialGrid::default();
        let c_normal = contrast(&normal(), &grid, None).unwrap();
        let c_better = contrast(&better(), &grid, None).unwrap();
        assert_close(c_normal, 0.415, 0.015);
        assert_close(c_better, 0.874, 0.015);
        assert!(c_normal < c_better);
    }

    #[test]
    fn fringe_scan_matches_pointwise_evaluations() {
        let grid = RadialGrid::default();
        let fringe = fringe_scan(&normal(), 9, &grid, None).unwrap();
        assert_eq!(fringe.phi3_samples.len(), 9);
        assert_close(fringe.phi3_samples[0].1, fringe.p_at_0, 1e-12);
        assert_close(fringe.phi3_samples[4].1, fringe.p_at_pi, 1e-9);
        let c = (fringe.p_at_pi - fringe.p_at_0) / (fringe.p_at_pi + fringe.p_at_0);
        assert_eq!(fringe.contrast, c);
        for (_, p) in &fringe.phi3_samples {
            assert!((0.0..=1.0).contains(p));
        }
    }

    #[test]
    fn common_phase_offset_shifts_the_fringe() {
        let grid = RadialGrid::default();
        let seq = normal();
        // phi1 = phi2 = psi translates the whole fringe by psi
        let psi = 0.7;
        let shifted = normal().with_phases([psi, psi, 0.0]);
        let c0 = contrast(&seq, &grid, None).unwrap();
        let c1 = contrast(&shifted, &grid, None).unwrap();
        assert_close(c0, c1, 1e-9);
        let p_ref = three_pulse_p2(&seq, 1.0, &grid, None).unwrap();
        let p_shift = three_pulse_p2(&shifted, 1.0 + psi, &grid, None).unwrap();
        assert_close(p_ref, p_shift, 1e-9);
    }

    #[test]
    fn scan_phase_overrides_stored_third_phase() {
        let grid = RadialGrid::default();
        let seq = normal();
        let stored = normal().with_phases([0.0, 0.0, 2.5]);
        let p_ref = three_pulse_p2(&seq, 1.3, &grid, None).unwrap();
        let p_stored = three_pulse_p2(&stored, 1.3, &grid, None).unwrap();
        assert_eq!(p_ref, p_stored);
    }

    #[test]
    fn contrast_sweep_monotone_uncompensated() {
        let grid = RadialGrid::default();
        let points = contrast_vs_interval(&normal(), (0.0, 0.4), 5, None, &grid, None).unwrap();
        assert_eq!(points.len(), 5);
        assert_close(points[0].0, 0.0, 1e-15);
        assert_close(points[4].0, 0.4, 1e-15);
        for pair in points.windows(2) {
            assert!(pair[1].1 <= pair[0].1 + 1e-9);
        }
    }

    #[test]
    fn sensitivity_gain_limits() {
        assert_close(
            relative_sensitivity_gain(0.4, 0.4, 0.26, 0.26).unwrap(),
            1.0,
            1e-15,
        );
        assert_close(
            relative_sensitivity_gain(0.4, 0.4, 0.26, 0.52).unwrap(),
            4.0,
            1e-12,
        );
        assert_close(
            relative_sensitivity_gain(0.415, 0.551, 0.26, 0.26).unwrap(),
            1.328,
            5e-4,
        );
        assert!(relative_sensitivity_gain(0.0, 0.5, 0.26, 0.26).is_err());
    }

    #[test]
    fn builders_validate() {
        assert!(normal().with_gammas([1.0, 0.0, 1.0]).is_err());
        assert!(normal().with_durations([1e-5, -1e-5, 1e-5]).is_err());
        assert!(normal().with_interval(-0.1).is_err());
        let beam = RamanBeam::new(20e-3, OMEGA).unwrap();
        let cloud = AtomCloud::rb87(3e-3, 7e-6).unwrap();
        assert!(MzSequence::new(beam, cloud, -0.1, 0.26).is_err());
        assert!(MzSequence::new(beam, cloud, 0.13, -0.26).is_err());
        assert!(single_pulse_p2(
            &beam,
            &cloud,
            0.13,
            -1e-6,
            1.0,
            &RadialGrid::default(),
            None
        )
        .is_err());
        assert!(rabi_curve(
            &beam,
            &cloud,
            0.13,
            (0.0, 1e-5),
            1,
            1.0,
            &RadialGrid::default(),
            None
        )
        .is_err());
    }

    #[test]
    fn zero_duration_sequence_stays_ground() {
        let grid = RadialGrid::default();
        let seq = normal().with_durations([0.0, 0.0, 0.0]).unwrap();
        let p = three_pulse_p2(&seq, 0.7, &grid, None).unwrap();
        assert_close(p, 0.0, 1e-12);
    }

    #[test]
    fn zero_interval_collapses_ratios() {
        let seq = normal().with_interval(0.0).unwrap();
        let [s1, s2, s3] = seq.diameter_ratios().unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s2, s3);
    }
}
