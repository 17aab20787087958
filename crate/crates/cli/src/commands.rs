//! Subcommand implementations. Each one builds a [`Table`] plus an
//! optional summary and hands both to the output layer.

use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::json;

use mzfringe::compensation::{build_plan, optimal_gamma, sequence_gammas, CompensationMode};
use mzfringe::interferometer::{
    contrast, fringe_scan, pi_fidelity, rabi_curve, relative_sensitivity_gain, three_pulse_p2,
    MzSequence,
};
use mzfringe::montecarlo::{mc_contrast, mc_single_pulse_p2};
use mzfringe::physics::{diameter_ratio, AtomCloud};
use mzfringe::scenario::Preset;

use crate::config::{self, Overrides, Resolved};
use crate::output::{num, render_csv, render_json, write_artifact, Table};
use crate::{CliError, Format, SweepKind};

pub struct Ctx {
    pub resolved: Resolved,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub compensated: bool,
    /// `--mc-samples` was given explicitly.
    pub mc_requested: bool,
    /// A scenario or config file was named on the command line.
    pub explicit_scenario: bool,
}

impl Ctx {
    /// Renders and writes the artifact. `comments` become extra `#` lines
    /// in CSV; `extra` become extra top-level JSON values.
    fn emit(
        &self,
        comments: &[String],
        extra: &[(&str, serde_json::Value)],
        table: &Table,
    ) -> Result<(), CliError> {
        let meta = self.resolved.metadata_json();
        let content = match self.format {
            Format::Csv => render_csv(&meta, comments, table),
            Format::Json => render_json(&meta, extra, table),
        };
        write_artifact(self.out.as_deref(), &content)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if n < 2 {
        return Err(CliError::Config(format!("need at least 2 points, got {n}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CliError::Config(format!("invalid axis range [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n).map(|k| lo + step * k as f64).collect())
}

/// Cloud size and beam/cloud diameter ratio over expansion time. Without
/// an explicit scenario this tabulates the normal and better scenarios
/// side by side; otherwise just the selected one.
pub fn expansion(ctx: &Ctx, t_max: f64, points: usize) -> Result<(), CliError> {
    let times = linspace(0.0, t_max, points)?;
    if ctx.explicit_scenario {
        let beam = ctx.resolved.beam()?;
        let cloud = ctx.resolved.cloud()?;
        let mut table = Table::new(&["t_s", "sigma_mm", "diameter_ratio"]);
        for &t in &times {
            let sigma = cloud.sigma(t)?;
            let ratio = diameter_ratio(&beam, &cloud, t)?;
            table.push(vec![num(t), num(sigma * 1e3), num(ratio)]);
        }
        return ctx.emit(&[], &[], &table);
    }

    let presets = [Preset::Normal, Preset::Better];
    let mut table = Table::new(&[
        "t_s",
        "sigma_normal_mm",
        "ratio_normal",
        "sigma_better_mm",
        "ratio_better",
    ]);
    for &t in &times {
        let mut row = vec![num(t)];
        for preset in presets {
            let cloud = preset.cloud();
            let sigma = cloud.sigma(t)?;
            let ratio = diameter_ratio(&preset.beam(), &cloud, t)?;
            row.push(num(sigma * 1e3));
            row.push(num(ratio));
        }
        table.push(row);
    }
    let better = config::resolve(Some("better"), None, Overrides::default())?;
    let comment = format!("config_better: {}", better.metadata_json());
    let extra_json: serde_json::Value =
        serde_json::from_str(&better.metadata_json()).expect("metadata is valid JSON");
    ctx.emit(&[comment], &[("config_better", extra_json)], &table)
}

/// Ensemble-averaged Rabi curves. Default: all three pulses of the
/// sequence; `--pulse` narrows to one, `--ratio` swaps in a frozen cloud
/// with the requested beam/cloud diameter ratio at t = 0.
pub fn rabi(
    ctx: &Ctx,
    pulse: Option<usize>,
    ratio: Option<f64>,
    tau_max: f64,
    points: usize,
) -> Result<(), CliError> {
    let beam = ctx.resolved.beam()?;
    let grid = ctx.resolved.grid()?;
    let zone = ctx.resolved.detection_zone()?;
    let detection = zone.as_ref();
    let tau0 = beam.tau_pi();
    if tau_max.is_nan() || tau_max <= 0.0 {
        return Err(CliError::Config(format!(
            "--tau-max must be > 0, got {tau_max}"
        )));
    }
    let range = (0.0, tau_max * tau0);

    // (label, cloud, firing time) per requested curve
    let curves: Vec<(String, AtomCloud, f64)> = match (pulse, ratio) {
        (Some(_), Some(_)) => unreachable!("clap rejects --pulse with --ratio"),
        (Some(i), None) => {
            if !(1..=3).contains(&i) {
                return Err(CliError::Config(format!("--pulse must be 1..=3, got {i}")));
            }
            let seq = ctx.resolved.sequence()?;
            let t = seq.firing_times()[i - 1];
            vec![(format!("p2_pulse{i}"), *seq.cloud(), t)]
        }
        (None, Some(s)) => {
            if s.is_nan() || s <= 0.0 {
                return Err(CliError::Config(format!("--ratio must be > 0, got {s}")));
            }
            // frozen cloud sized so the diameter ratio is exactly s now
            let frozen = AtomCloud::new(beam.width() / s, 0.0, ctx.resolved.mass_kg)?;
            vec![("p2".to_string(), frozen, 0.0)]
        }
        (None, None) => {
            let seq = ctx.resolved.sequence()?;
            seq.firing_times()
                .iter()
                .enumerate()
                .map(|(k, &t)| (format!("p2_pulse{}", k + 1), *seq.cloud(), t))
                .collect()
        }
    };

    let mut gammas = Vec::with_capacity(curves.len());
    for (_, cloud, t) in &curves {
        gammas.push(if ctx.compensated {
            optimal_gamma(&beam, cloud, *t, &grid, detection)?
        } else {
            1.0
        });
    }

    let mut sampled = Vec::with_capacity(curves.len());
    for ((_, cloud, t), &gamma) in curves.iter().zip(&gammas) {
        sampled.push(rabi_curve(
            &beam, cloud, *t, range, points, gamma, &grid, detection,
        )?);
    }

    let mut columns = vec!["tau_over_tau0".to_string()];
    columns.extend(curves.iter().map(|(label, _, _)| label.clone()));
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    for k in 0..points {
        let mut row = vec![num(sampled[0][k].0 / tau0)];
        row.extend(sampled.iter().map(|curve| num(curve[k].1)));
        table.push(row);
    }

    let ratios = curves
        .iter()
        .map(|(_, cloud, t)| diameter_ratio(&beam, cloud, *t))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = json!({
        "tau_pi_s": tau0,
        "firing_times_s": curves.iter().map(|(_, _, t)| *t).collect::<Vec<_>>(),
        "diameter_ratios": ratios,
        "gammas": gammas,
    });
    let comment = format!("summary: {summary}");
    ctx.emit(&[comment], &[("summary", summary.clone())], &table)
}

/// Builds the configured sequence, optionally compensated.
fn prepared_sequence(ctx: &Ctx) -> Result<(MzSequence, [f64; 3]), CliError> {
    let grid = ctx.resolved.grid()?;
    let zone = ctx.resolved.detection_zone()?;
    let seq = ctx.resolved.sequence()?;
    if ctx.compensated {
        let gammas = sequence_gammas(&seq, ctx.resolved.compensation_mode(), &grid, zone.as_ref())?;
        Ok((seq.with_gammas(gammas)?, gammas))
    } else {
        Ok((seq, [1.0; 3]))
    }
}

/// Fringe P2(phi3) over one full period, plus a contrast summary and an
/// optional Monte Carlo cross-check.
pub fn fringe(ctx: &Ctx, points: usize) -> Result<(), CliError> {
    let grid = ctx.resolved.grid()?;
    let zone = ctx.resolved.detection_zone()?;
    let (seq, gammas) = prepared_sequence(ctx)?;
    let result = fringe_scan(&seq, points, &grid, zone.as_ref())?;

    let mut table = Table::new(&["phi3_rad", "p2"]);
    for &(phi, p2) in &result.phi3_samples {
        table.push(vec![num(phi), num(p2)]);
    }

    let mut summary = json!({
        "contrast": result.contrast,
        "p_at_0": result.p_at_0,
        "p_at_pi": result.p_at_pi,
        "gammas": gammas,
    });
    if ctx.mc_requested {
        if zone.is_some() {
            return Err(CliError::Config(
                "the Monte Carlo model has no detection zone; drop --mc-samples or the \
                 detection config"
                    .to_string(),
            ));
        }
        let mc = ctx.resolved.monte_carlo.clone();
        let estimate = mc_contrast(&seq, mc.samples, mc.seed)?;
        summary["mc"] = json!({
            "contrast": estimate.mean,
            "std_error": estimate.std_error,
            "sigma_distance": estimate.sigma_distance(result.contrast),
            "samples": estimate.n_samples,
            "seed": mc.seed,
        });
    }

    let comment = format!("summary: {summary}");
    ctx.emit(&[comment], &[("summary", summary.clone())], &table)?;
    if ctx.out.is_some() {
        println!("{summary}");
    }
    Ok(())
}

/// Pulse fidelity or fringe contrast versus time, one row per axis point,
/// rows evaluated in parallel. `--compensated` appends a compensated
/// column next to the baseline instead of replacing it.
pub fn sweep(
    ctx: &Ctx,
    kind: SweepKind,
    from: Option<f64>,
    to: Option<f64>,
    points: usize,
) -> Result<(), CliError> {
    let (default_lo, default_hi) = match kind {
        SweepKind::FidelityVsT => (0.4, 1.6),
        SweepKind::ContrastVsT => (0.0, 0.4),
    };
    let lo = from.unwrap_or(default_lo);
    let hi = to.unwrap_or(default_hi);
    if lo < 0.0 {
        return Err(CliError::Config(format!(
            "sweep start must be >= 0, got {lo}"
        )));
    }
    let xs = linspace(lo, hi, points)?;

    let grid = ctx.resolved.grid()?;
    let zone = ctx.resolved.detection_zone()?;
    let detection = zone.as_ref();
    let mode = ctx.resolved.compensation_mode();

    let (columns, rows): (Vec<&str>, Vec<Vec<String>>) = match kind {
        SweepKind::FidelityVsT => {
            let beam = ctx.resolved.beam()?;
            let cloud = ctx.resolved.cloud()?;
            let rows = xs
                .par_iter()
                .map(|&t| {
                    let mut row = vec![num(t)];
                    row.push(num(pi_fidelity(&beam, &cloud, t, 1.0, &grid, detection)?));
                    if ctx.compensated {
                        let gamma = optimal_gamma(&beam, &cloud, t, &grid, detection)?;
                        row.push(num(pi_fidelity(&beam, &cloud, t, gamma, &grid, detection)?));
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let mut columns = vec!["t_s", "fidelity"];
            if ctx.compensated {
                columns.push("fidelity_compensated");
            }
            (columns, rows)
        }
        SweepKind::ContrastVsT => {
            let template = ctx.resolved.sequence()?;
            let rows = xs
                .par_iter()
                .map(|&interval| {
                    let seq = template.clone().with_interval(interval)?;
                    let mut row = vec![num(interval)];
                    row.push(num(contrast(&seq, &grid, detection)?));
                    if ctx.compensated {
                        let gammas = sequence_gammas(&seq, mode, &grid, detection)?;
                        let seq = seq.with_gammas(gammas)?;
                        row.push(num(contrast(&seq, &grid, detection)?));
                    }
                    Ok(row)
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let mut columns = vec!["interval_s", "contrast"];
            if ctx.compensated {
                columns.push("contrast_compensated");
            }
            (columns, rows)
        }
    };

    let mut table = Table::new(&columns);
    for row in rows {
        table.push(row);
    }
    ctx.emit(&[], &[], &table)
}

/// Compensation plan for the configured sequence: per-pulse factors,
/// fidelities, contrast before/after, and the implied sensitivity gain at
/// fixed timing.
pub fn plan(ctx: &Ctx) -> Result<(), CliError> {
    let grid = ctx.resolved.grid()?;
    let zone = ctx.resolved.detection_zone()?;
    let seq = ctx.resolved.sequence()?;
    let mode = ctx.resolved.compensation_mode();
    let plan = build_plan(&seq, mode, &grid, zone.as_ref())?;

    let gain = relative_sensitivity_gain(
        plan.contrast_before,
        plan.contrast_after,
        seq.interval().max(f64::MIN_POSITIVE),
        seq.interval().max(f64::MIN_POSITIVE),
    )
    .ok();

    let times = seq.firing_times();
    let ratios = seq.diameter_ratios()?;
    let summary = json!({
        "gammas": plan.gammas,
        "fidelity_before": plan.fidelity_before,
        "fidelity_after": plan.fidelity_after,
        "contrast_before": plan.contrast_before,
        "contrast_after": plan.contrast_after,
        "sensitivity_gain": gain,
        "firing_times_s": times,
        "diameter_ratios": ratios,
        "mode": match mode {
            CompensationMode::AllPulses => "all-pulses",
            CompensationMode::SkipFirst => "skip-first",
        },
    });

    let mut table = Table::new(&[
        "pulse",
        "t_fire_s",
        "diameter_ratio",
        "gamma",
        "fidelity_before",
        "fidelity_after",
    ]);
    for i in 0..3 {
        table.push(vec![
            format!("{}", i + 1),
            num(times[i]),
            num(ratios[i]),
            num(plan.gammas[i]),
            num(plan.fidelity_before[i]),
            num(plan.fidelity_after[i]),
        ]);
    }

    let comment = format!("summary: {summary}");
    ctx.emit(&[comment], &[("plan", summary.clone())], &table)?;
    if ctx.out.is_some() {
        println!("{summary}");
    }
    Ok(())
}

/// Quadrature vs Monte Carlo for the first pulse's transition probability
/// and the fringe contrast, one row per check.
pub fn mc_check(ctx: &Ctx) -> Result<(), CliError> {
    if ctx.resolved.detection.is_some() {
        return Err(CliError::Config(
            "the Monte Carlo model has no detection zone; remove detection from the config"
                .to_string(),
        ));
    }
    let grid = ctx.resolved.grid()?;
    let (seq, _) = prepared_sequence(ctx)?;
    let mc = ctx.resolved.monte_carlo.clone();

    let mut table = Table::new(&[
        "check",
        "quadrature",
        "mc_mean",
        "mc_std_error",
        "sigma_distance",
    ]);

    let first = seq.pulses()[0];
    let quad_p2 = mzfringe::interferometer::single_pulse_p2(
        seq.beam(),
        seq.cloud(),
        seq.firing_times()[0],
        first.duration,
        first.gamma,
        &grid,
        None,
    )?;
    let mc_p2 = mc_single_pulse_p2(&seq, 0, mc.samples, mc.seed)?;
    table.push(vec![
        "single_pulse_t1".to_string(),
        num(quad_p2),
        num(mc_p2.mean),
        num(mc_p2.std_error),
        num(mc_p2.sigma_distance(quad_p2)),
    ]);

    // same phi3 = 0 / pi convention as the sampled estimate
    let p_at_0 = three_pulse_p2(&seq, 0.0, &grid, None)?;
    let p_at_pi = three_pulse_p2(&seq, std::f64::consts::PI, &grid, None)?;
    let quad_contrast = (p_at_pi - p_at_0) / (p_at_pi + p_at_0);
    let mc_c = mc_contrast(&seq, mc.samples, mc.seed)?;
    table.push(vec![
        "three_pulse_contrast".to_string(),
        num(quad_contrast),
        num(mc_c.mean),
        num(mc_c.std_error),
        num(mc_c.sigma_distance(quad_contrast)),
    ]);

    ctx.emit(&[], &[], &table)
}
