//! Radial ensemble averaging over the cloud density.
//!
//! In beam-centered cylindrical coordinates normalized to the instantaneous
//! cloud width, the density weight is `rho * exp(-rho^2 / 2)` regardless of
//! expansion time, so one fixed quadrature serves every pulse configuration:
//!
//! ```text
//! <f> = int_0^R rho exp(-rho^2/2) f(rho) drho / int_0^R rho exp(-rho^2/2) drho
//! ```
//!
//! The denominator is `1 - exp(-R^2/2)` in closed form. The numerator is
//! evaluated by adaptive Simpson quadrature with Richardson correction.

use crate::error::{Error, Result};

/// Gaussian radial density weight `rho * exp(-rho^2 / 2)` in normalized
/// coordinates `rho = r / sigma(t)`.
pub fn radial_weight(rho: f64) -> f64 {
    rho * (-rho * rho / 2.0).exp()
}

/// Quadrature controls for [`radial_average`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    rho_max: f64,
    tolerance: f64,
    max_subdivisions: usize,
}

impl Default for RadialGrid {
    fn default() -> Self {
        Self {
            rho_max: 8.0,
            tolerance: 1e-9,
            max_subdivisions: 2000,
        }
    }
}

impl RadialGrid {
    /// `rho_max` must cover the Gaussian tail (>= 6, default 8, truncation
    /// error below 1e-14 of the total weight); `tolerance` is the absolute
    /// target for the numerator integral.
    pub fn new(rho_max: f64, tolerance: f64, max_subdivisions: usize) -> Result<Self> {
        if rho_max < 6.0 {
            return Err(Error::domain(format!(
                "rho_max must be >= 6 to capture the cloud, got {rho_max}"
            )));
        }
        if tolerance.is_nan() || tolerance <= 0.0 {
            return Err(Error::domain(format!(
                "tolerance must be > 0, got {tolerance}"
            )));
        }
        if max_subdivisions == 0 {
            return Err(Error::domain("max_subdivisions must be >= 1".to_string()));
        }
        Ok(Self {
            rho_max,
            tolerance,
            max_subdivisions,
        })
    }

    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn max_subdivisions(&self) -> usize {
        self.max_subdivisions
    }
}

/// Radial detection cutoff in normalized coordinates: atoms beyond
/// `rho_cut` do not reach the detector.
///
/// With `renormalize` set (the default) the average is conditioned on the
/// detected atoms; without it the missing atoms count as zero signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionZone {
    rho_cut: f64,
    renormalize: bool,
}

impl DetectionZone {
    pub fn new(rho_cut: f64) -> Result<Self> {
        if rho_cut.is_nan() || rho_cut <= 0.0 {
            return Err(Error::domain(format!(
                "detection cutoff must be > 0, got {rho_cut}"
            )));
        }
        Ok(Self {
            rho_cut,
            renormalize: true,
        })
    }

    pub fn without_renormalization(mut self) -> Self {
        self.renormalize = false;
        self
    }

    pub fn rho_cut(&self) -> f64 {
        self.rho_cut
    }

    pub fn renormalize(&self) -> bool {
        self.renormalize
    }
}

/// Density-weighted radial average of `f` over the cloud.
pub fn radial_average<F>(f: F, grid: &RadialGrid, detection: Option<&DetectionZone>) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let upper = match detection {
        Some(zone) => zone.rho_cut().min(grid.rho_max()),
        None => grid.rho_max(),
    };
    let numerator = integrate(
        |rho| radial_weight(rho) * f(rho),
        0.0,
        upper,
        grid.tolerance(),
        grid.max_subdivisions(),
    )?;
    let norm_radius = match detection {
        Some(zone) if zone.renormalize() => upper,
        _ => grid.rho_max(),
    };
    let denominator = 1.0 - (-norm_radius * norm_radius / 2.0).exp();
    Ok(numerator / denominator)
}

/// Panels the interval starts out divided into, before any adaptive
/// splitting. Guards against aliasing: a single Simpson estimate of an
/// oscillatory integrand can look converged purely by accident.
const INITIAL_PANELS: usize = 16;

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance
/// `tolerance`, spending at most `max_subdivisions` interval splits beyond
/// the fixed initial panelling.
pub fn integrate<F>(f: F, a: f64, b: f64, tolerance: f64, max_subdivisions: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a.is_nan() || b.is_nan() || b < a {
        return Err(Error::domain(format!(
            "invalid integration interval [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let width = (b - a) / INITIAL_PANELS as f64;
    let panel_tolerance = tolerance / INITIAL_PANELS as f64;
    let mut budget = max_subdivisions;
    let mut total = 0.0;
    let mut crude = 0.0;
    for k in 0..INITIAL_PANELS {
        let pa = a + width * k as f64;
        let pb = if k + 1 == INITIAL_PANELS {
            b
        } else {
            pa + width
        };
        let pm = 0.5 * (pa + pb);
        let (fa, fm, fb) = (f(pa), f(pm), f(pb));
        let whole = simpson(pa, pb, fa, fm, fb);
        crude += whole;
        match refine(
            &f,
            pa,
            pm,
            pb,
            fa,
            fm,
            fb,
            whole,
            panel_tolerance,
            &mut budget,
        ) {
            Ok(value) => total += value,
            Err(bound) => {
                return Err(Error::Integration {
                    estimate: crude,
                    error_bound: bound,
                    subdivisions: max_subdivisions,
                })
            }
        }
    }
    Ok(total)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

/// One level of bisection. The `15 eps` acceptance and `delta / 15`
/// correction follow from the Richardson extrapolation of Simpson's rule.
/// Returns the unmet error bound if the subdivision budget runs out.
#[allow(clippy::too_many_arguments)]
fn refine<F>(
    f: &F,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tolerance: f64,
    budget: &mut usize,
) -> std::result::Result<f64, f64>
where
    F: Fn(f64) -> f64,
{
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tolerance {
        return Ok(left + right + delta / 15.0);
    }
    if *budget == 0 {
        return Err(delta.abs() / 15.0);
    }
    *budget -= 1;
    let half = tolerance / 2.0;
    Ok(refine(f, a, lm, m, fa, flm, fm, left, half, budget)?
        + refine(f, m, rm, b, fm, frm, fb, right, half, budget)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(x: f64, y: f64, tol: f64) {
        assert!((x - y).abs() <= tol, "{x} vs {y} (tol {tol})");
    }

    #[test]
    fn integrates_polynomials_exactly() {
        // Simpson is exact through cubics.
        let v = integrate(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-12, 100).unwrap();
        assert_close(v, 2.0, 1e-12);
    }

    #[test]
    fn integrates_oscillatory_function() {
        let v = integrate(|x| (10.0 * x).sin(), 0.0, 1.0, 1e-10, 2000).unwrap();
        assert_close(v, (1.0 - (10.0f64).cos()) / 10.0, 1e-9);
    }

    #[test]
    fn constant_averages_to_one() {
        for rho_max in [6.0, 8.0, 12.0] {
            let grid = RadialGrid::new(rho_max, 1e-10, 2000).unwrap();
            assert_close(radial_average(|_| 1.0, &grid, None).unwrap(), 1.0, 1e-9);
        }
    }

    #[test]
    fn second_moment_of_weight() {
        // int rho^3 e^{-rho^2/2} / int rho e^{-rho^2/2} = 2 on [0, inf)
        let grid = RadialGrid::default();
        assert_close(
            radial_average(|rho| rho * rho, &grid, None).unwrap(),
            2.0,
            1e-8,
        );
    }

    #[test]
    fn gaussian_average() {
        // <e^{-rho^2/2}> = 1/2
        let grid = RadialGrid::default();
        let v = radial_average(|rho| (-rho * rho / 2.0).exp(), &grid, None).unwrap();
        assert_close(v, 0.5, 1e-9);
    }

    #[test]
    fn detection_zone_conditions_or_truncates() {
        let grid = RadialGrid::default();
        let zone = DetectionZone::new(1.0).unwrap();
        assert_close(
            radial_average(|_| 1.0, &grid, Some(&zone)).unwrap(),
            1.0,
            1e-9,
        );
        let raw = zone.without_renormalization();
        let expect = 1.0 - (-0.5f64).exp();
        assert_close(
            radial_average(|_| 1.0, &grid, Some(&raw)).unwrap(),
            expect,
            1e-9,
        );
    }

    #[test]
    fn wide_detection_zone_is_no_op() {
        let grid = RadialGrid::default();
        let zone = DetectionZone::new(50.0).unwrap();
        let with = radial_average(|rho| (rho).cos(), &grid, Some(&zone)).unwrap();
        let without = radial_average(|rho| (rho).cos(), &grid, None).unwrap();
        assert_close(with, without, 1e-12);
    }

    #[test]
    fn subdivision_budget_enforced() {
        let err = integrate(|x| (200.0 * x).sin().abs(), 0.0, 1.0, 1e-12, 3).unwrap_err();
        match err {
            Error::Integration {
                subdivisions,
                error_bound,
                ..
            } => {
                assert_eq!(subdivisions, 3);
                assert!(error_bound > 1e-12);
            }
            other => panic!("expected integration error, got {other:?}"),
        }
    }

    #[test]
    fn grid_validation() {
        assert!(RadialGrid::new(4.0, 1e-9, 2000).is_err());
        assert!(RadialGrid::new(8.0, 0.0, 2000).is_err());
        assert!(RadialGrid::new(8.0, 1e-9, 0).is_err());
        assert!(DetectionZone::new(0.0).is_err());
    }
}
