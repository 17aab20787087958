//! Per-pulse intensity compensation.
//!
//! As the cloud expands, the ensemble-averaged pulse area falls below its
//! on-axis value and the first maximum of the Rabi curve drifts to longer
//! durations. Keeping the timing fixed, the same correction can be applied
//! by scaling the drive intensity: for each pulse the factor `gamma_i`
//! maximizes the pi-pulse fidelity at that pulse's diameter ratio.

use crate::error::{Error, Result};
use crate::interferometer::{contrast, pi_fidelity, MzSequence};
use crate::physics::{AtomCloud, RamanBeam};
use crate::quadrature::{DetectionZone, RadialGrid};

/// Lower edge of the coarse scan; `gamma < 1` never helps an expanded cloud.
const SCAN_LO: f64 = 1.0;
/// Upper edge; the first fidelity peak sits well below this for any ratio
/// the model is meant for (the worst case among the stock scenarios is
/// about 1.37).
const SCAN_HI: f64 = 2.5;
/// Coarse grid points used to bracket the first peak before refinement.
const SCAN_POINTS: usize = 64;
/// Golden-section bracket width at which the search stops.
const GAMMA_TOL: f64 = 1e-4;

/// Which pulses receive an optimized intensity factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CompensationMode {
    /// Optimize all three pulses independently.
    #[default]
    AllPulses,
    /// Force `gamma_1 = 1` and optimize only the second and third pulses
    /// (the first pulse fires when the cloud is still small, so its factor
    /// is close to 1 anyway).
    SkipFirst,
}

/// Factors and figures of merit for one sequence, before and after
/// compensation.
#[derive(Debug, Clone, PartialEq)]
pub struct CompensationPlan {
    /// Per-pulse intensity factors, each >= 1.
    pub gammas: [f64; 3],
    /// pi-pulse fidelity at each firing time with `gamma = 1`.
    pub fidelity_before: [f64; 3],
    /// pi-pulse fidelity at each firing time with the optimized factor.
    pub fidelity_after: [f64; 3],
    pub contrast_before: f64,
    pub contrast_after: f64,
}

impl CompensationPlan {
    /// The template sequence with the plan's intensity factors applied
    /// (durations and phases unchanged).
    pub fn apply_to(&self, seq: MzSequence) -> Result<MzSequence> {
        seq.with_gammas(self.gammas)
    }
}

/// Intensity factor maximizing the pi-pulse fidelity for a pulse fired
/// `t` after release.
///
/// The fidelity as a function of `gamma` inherits the damped oscillations
/// of the Rabi curve, so a coarse scan first brackets the *first* local
/// maximum and golden-section refinement then pins it down. An ascent
/// running into the scan edge is an error rather than a clamped answer.
pub fn optimal_gamma(
    beam: &RamanBeam,
    cloud: &AtomCloud,
    t: f64,
    grid: &RadialGrid,
    detection: Option<&DetectionZone>,
) -> Result<f64> {
    let fidelity = |gamma: f64| pi_fidelity(beam, cloud, t, gamma, grid, detection);
    let step = (SCAN_HI - SCAN_LO) / (SCAN_POINTS - 1) as f64;
    let values = (0..SCAN_POINTS)
        .map(|k| fidelity(SCAN_LO + step * k as f64))
        .collect::<Result<Vec<_>>>()?;
    let Some(k) = first_interior_peak(&values) else {
        return Err(Error::Optimization(format!(
            "no fidelity maximum below gamma = {SCAN_HI} for a pulse at t = {t} s"
        )));
    };
    let a = SCAN_LO + step * k.saturating_sub(1) as f64;
    let b = SCAN_LO + step * (k + 1) as f64;
    let gamma = golden_max(fidelity, a, b, GAMMA_TOL)?;
    // the true optimum of the leftmost bracket can round below the scan edge
    Ok(gamma.max(1.0))
}

/// Per-pulse factors for a whole sequence.
pub fn sequence_gammas(
    seq: &MzSequence,
    mode: CompensationMode,
    grid: &RadialGrid,
    detection: Option<&DetectionZone>,
) -> Result<[f64; 3]> {
    let [t1, t2, t3] = seq.firing_times();
    let g1 = match mode {
        CompensationMode::AllPulses => optimal_gamma(seq.beam(), seq.cloud(), t1, grid, detection)?,
        CompensationMode::SkipFirst => 1.0,
    };
    Ok([
        g1,
        optimal_gamma(seq.beam(), seq.cloud(), t2, grid, detection)?,
        optimal_gamma(seq.beam(), seq.cloud(), t3, grid, detection)?,
    ])
}

/// Full compensation workflow for one sequence: optimize the factors and
/// report per-pulse fidelities and fringe contrast before and after. The
/// baseline is the template with unit factors; durations and phases are
/// taken from the template unchanged.
pub fn build_plan(
    seq: &MzSequence,
    mode: CompensationMode,
    grid: &RadialGrid,
    detection: Option<&DetectionZone>,
) -> Result<CompensationPlan> {
    let gammas = sequence_gammas(seq, mode, grid, detection)?;
    let times = seq.firing_times();
    let mut fidelity_before = [0.0; 3];
    let mut fidelity_after = [0.0; 3];
    for i in 0..3 {
        fidelity_before[i] = pi_fidelity(seq.beam(), seq.cloud(), times[i], 1.0, grid, detection)?;
        fidelity_after[i] = pi_fidelity(
            seq.beam(),
            seq.cloud(),
            times[i],
            gammas[i],
            grid,
            detection,
        )?;
    }
    let baseline = seq.clone().with_gammas([1.0; 3])?;
    let compensated = seq.clone().with_gammas(gammas)?;
    Ok(CompensationPlan {
        gammas,
        fidelity_before,
        fidelity_after,
        contrast_before: contrast(&baseline, grid, detection)?,
        contrast_after: contrast(&compensated, grid, detection)?,
    })
}

/// Index of the first sample that is no smaller than both neighbors.
/// `None` when the values still rise at the last sample, i.e. the peak
/// lies beyond the scanned window.
fn first_interior_peak(values: &[f64]) -> Option<usize> {
    (0..values.len()).find(|&k| {
        let rises_into = k == 0 || values[k - 1] <= values[k];
        let falls_off = k + 1 < values.len() && values[k] >= values[k + 1];
        rises_into && falls_off
    })
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of a unimodal function on `[a, b]`,
/// returning the abscissa once the bracket shrinks below `xtol`.
fn golden_max<F>(f: F, mut a: f64, mut b: f64, xtol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > xtol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
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

    #[test]
    fn golden_section_finds_parabola_peak() {
        let g = golden_max(|x| Ok(-(x - 1.3) * (x - 1.3)), 0.0, 3.0, 1e-6).unwrap();
        assert_close(g, 1.3, 1e-5);
    }

    #[test]
    fn factors_for_the_normal_sequence() {
        let grid = RadialGrid::default();
        let g = sequence_gammas(&normal(), CompensationMode::AllPulses, &grid, None).unwrap();
        assert_close(g[0], 1.051, 0.01);
        assert_close(g[1], 1.207, 0.01);
        assert_close(g[2], 1.373, 0.01);
    }

    #[test]
    fn factors_for_the_better_sequence() {
        let grid = RadialGrid::default();
        let g = sequence_gammas(&better(), CompensationMode::AllPulses, &grid, None).unwrap();
        assert_close(g[0], 1.019, 0.01);
        assert_close(g[1], 1.057, 0.01);
        assert_close(g[2], 1.127, 0.01);
    }

    #[test]
    fn homogeneous_beam_needs_no_compensation() {
        let grid = RadialGrid::default();
        let beam = RamanBeam::new(0.3, OMEGA).unwrap();
        let cloud = AtomCloud::rb87(3e-3, 0.0).unwrap();
        let g = optimal_gamma(&beam, &cloud, 0.65, &grid, None).unwrap();
        assert_close(g, 1.0, 1e-3);
        assert!(g >= 1.0);
    }

    #[test]
    fn factor_grows_with_expansion_time() {
        let grid = RadialGrid::default();
        let seq = normal();
        let mut last = 1.0;
        for t in [0.13, 0.39, 0.65, 1.0] {
            let g = optimal_gamma(seq.beam(), seq.cloud(), t, &grid, None).unwrap();
            assert!(g >= last, "gamma fell from {last} to {g} at t = {t}");
            last = g;
        }
    }

    #[test]
    fn compensation_raises_fidelity_and_contrast() {
        let grid = RadialGrid::default();
        let plan = build_plan(&normal(), CompensationMode::AllPulses, &grid, None).unwrap();
        for i in 0..3 {
            assert!(plan.fidelity_after[i] >= plan.fidelity_before[i] - 1e-9);
            assert!(plan.gammas[i] >= 1.0);
        }
        assert_close(plan.contrast_before, 0.415, 0.015);
        assert_close(plan.contrast_after, 0.551, 0.015);
    }

    #[test]
    fn skip_first_pins_gamma_one() {
        let grid = RadialGrid::default();
        let plan = build_plan(&normal(), CompensationMode::SkipFirst, &grid, None).unwrap();
        assert_eq!(plan.gammas[0], 1.0);
        assert!(plan.gammas[1] > 1.0 && plan.gammas[2] > plan.gammas[1]);
        let applied = plan.apply_to(normal()).unwrap();
        assert_eq!(applied.pulses()[1].gamma, plan.gammas[1]);
    }

    #[test]
    fn peak_bracketing() {
        assert_eq!(first_interior_peak(&[0.1, 0.4, 0.9, 0.5, 0.2]), Some(2));
        assert_eq!(first_interior_peak(&[0.9, 0.5, 0.2]), Some(0));
        // two peaks: the first one wins even if the second is higher
        assert_eq!(first_interior_peak(&[0.1, 0.6, 0.3, 0.8, 0.4]), Some(1));
        assert_eq!(first_interior_peak(&[0.2, 0.5, 0.5, 0.4]), Some(1));
        // still rising at the edge: no bracket, optimal_gamma turns this
        // into an optimization error
        assert_eq!(first_interior_peak(&[0.1, 0.2, 0.3, 0.4]), None);
    }
}
