//! The four canonical experiments. Each run validates every numeric
//! precondition before the first solve starts, executes independent solves
//! concurrently (thread count from `FBLAB_THREADS`, capped by the job
//! count), and then emits artifacts in a deterministic order, so identical
//! configurations produce byte-identical CSV and JSON files.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use fblab_core::exact::{curvature_ratio, HalfPlaneKind, HalfPlaneSpec};
use fblab_core::functionals::SmoothingParams;
use fblab_core::grid_field::{make_grid, sample, GridDomain, RegionMask, ScalarField};
use fblab_core::monotone::{
    audit, convergence_gap, default_slack, profile, unit_ball_volume, weiss, Cutoff,
    GraphVarifold, ProfileQuantity,
};
use fblab_core::solvers::{
    free_boundary, hausdorff_distance, solve_ac, solve_capillary, SolveParams, SolveResult,
};
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig, Source};
use crate::report::{line_chart, write_csv, write_json, write_text};
use crate::{fieldio, CliError};

/// What a finished run tells the operator: data rows written, warnings
/// raised (tolerance misses, non-converged solves), artifact paths.
#[derive(Debug)]
pub struct RunSummary {
    pub rows: usize,
    pub warnings: usize,
    pub artifacts: Vec<PathBuf>,
}

/// Runs the configured experiment, writing artifacts under `out_dir`.
pub fn run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary, CliError> {
    let grid = check_preconditions(config)?;
    std::fs::create_dir_all(out_dir)?;
    match config.experiment {
        Experiment::ExactValidate => exact_validate(config, &grid, out_dir),
        Experiment::MonotonicityAudit => monotonicity_audit(config, &grid, out_dir),
        Experiment::ThetaSweep => theta_sweep(config, &grid, out_dir),
        Experiment::CurvatureSweep => curvature_sweep(config, &grid, out_dir),
    }
}

/// Validates every grid-dependent numeric precondition up front.
fn check_preconditions(config: &ExperimentConfig) -> Result<GridDomain, CliError> {
    let grid = make_grid(config.dim, config.half_width, config.nodes_per_axis)?;
    let h = grid.spacing();
    let r_min = config.radii_list[0];
    let r_max = *config.radii_list.last().expect("radii_list is nonempty");
    if r_min < 8.0 * h {
        return Err(CliError::Precondition(format!(
            "smallest radius {r_min} is below 8h = {}; refine the grid or drop the radius",
            8.0 * h
        )));
    }
    for c in &config.centers {
        if config.dim == 1 && c[1] != 0.0 {
            return Err(CliError::Precondition(format!(
                "center ({}, {}) is off the base line of a one-dimensional grid",
                c[0], c[1]
            )));
        }
        grid.require_ball_inside(*c, r_max)?;
    }
    if config.window_radius > config.half_width {
        return Err(CliError::Precondition(format!(
            "window_radius {} exceeds the half-width {}",
            config.window_radius, config.half_width
        )));
    }
    for &theta in &config.theta_list {
        if theta > FRAC_PI_2 {
            return Err(CliError::Precondition(format!(
                "experiments model contact angles up to pi/2, got {theta}"
            )));
        }
        if config.experiment == Experiment::ThetaSweep && theta >= FRAC_PI_2 {
            return Err(CliError::Precondition(format!(
                "theta-sweep studies the degenerate limit and needs theta < pi/2, got {theta}"
            )));
        }
        if config.source.includes_solved() {
            // The widest smoothing of the capillary schedule must fit the cube.
            let params = SolveParams::for_capillary(&grid, theta)?;
            SmoothingParams::new(params.deltas[0], config.half_width)?;
        }
    }
    let runs_one_phase_solves = matches!(
        config.experiment,
        Experiment::MonotonicityAudit | Experiment::ThetaSweep
    );
    if config.source.includes_solved() && runs_one_phase_solves {
        // Ditto for the unscaled one-phase schedule.
        let params = SolveParams::for_grid(&grid);
        SmoothingParams::new(params.deltas[0], config.half_width)?;
    }
    Ok(grid)
}

/// Runs `f` over `inputs` on up to `FBLAB_THREADS` worker threads (default:
/// available parallelism), returning outputs in input order.
fn parallel_map<I: Sync, O: Send>(inputs: &[I], f: impl Fn(&I) -> O + Sync) -> Vec<O> {
    let available = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let workers = std::env::var("FBLAB_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(available)
        .min(inputs.len().max(1));
    if workers <= 1 {
        return inputs.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<O>>> = inputs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= inputs.len() {
                    break;
                }
                let out = f(&inputs[i]);
                *slots[i].lock().expect("result slot poisoned") = Some(out);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .expect("result slot poisoned")
                .expect("worker filled every slot")
        })
        .collect()
}

fn capillary_spec(theta: f64) -> Result<HalfPlaneSpec, CliError> {
    Ok(HalfPlaneSpec::new(
        HalfPlaneKind::Capillary { theta },
        [1.0, 0.0],
        0.0,
    )?)
}

fn bernoulli_spec() -> Result<HalfPlaneSpec, CliError> {
    Ok(HalfPlaneSpec::new(HalfPlaneKind::Bernoulli, [1.0, 0.0], 0.0)?)
}

fn solve_capillary_field(
    grid: &GridDomain,
    config: &ExperimentConfig,
    theta: f64,
) -> Result<SolveResult, fblab_core::Error> {
    let spec = HalfPlaneSpec::new(HalfPlaneKind::Capillary { theta }, [1.0, 0.0], 0.0)?;
    let boundary = spec.evaluate(grid)?;
    let mut params = SolveParams::for_capillary(grid, theta)?;
    params.max_iters = config.max_iters;
    params.grad_tol = config.grad_tol * spec.slope();
    solve_capillary(grid, &boundary, theta, &params)
}

fn solve_ac_field(
    grid: &GridDomain,
    config: &ExperimentConfig,
    boundary_slope: f64,
) -> Result<SolveResult, fblab_core::Error> {
    let boundary = sample(grid, |p| boundary_slope * (-p[0]).max(0.0))?;
    let mut params = SolveParams::for_grid(grid);
    params.max_iters = config.max_iters;
    params.grad_tol = config.grad_tol;
    solve_ac(grid, &boundary, &params)
}

fn sources_of(config: &ExperimentConfig) -> Vec<Source> {
    let mut out = Vec::new();
    if config.source.includes_exact() {
        out.push(Source::Exact);
    }
    if config.source.includes_solved() {
        out.push(Source::Solved);
    }
    out
}

/// exact-validate: closed-form half-planes against their analytic values.
fn exact_validate(
    config: &ExperimentConfig,
    grid: &GridDomain,
    out_dir: &Path,
) -> Result<RunSummary, CliError> {
    let n = grid.dim();
    let h = grid.spacing();
    let grid_n = config.nodes_per_axis;
    let mut warnings = 0usize;

    let mut density_rows = Vec::new();
    for &theta in &config.theta_list {
        let field = capillary_spec(theta)?.evaluate(grid)?;
        let varifold = GraphVarifold::new(&field, theta)?;
        let target = (1.0 - theta.cos()) / 2.0;
        for &center in &config.centers {
            for &r in &config.radii_list {
                let value = fblab_core::monotone::density_ratio(&varifold, center, r)?;
                let rel_err = ((value - target) / target).abs();
                let pass = rel_err <= config.density_tol;
                warnings += usize::from(!pass);
                density_rows.push(format!(
                    "Theta,{n},{theta},{},{},{r},{grid_n},{h},{value},{target},{rel_err},{},{pass}",
                    center[0], center[1], config.density_tol
                ));
            }
        }
    }

    let mut weiss_rows = Vec::new();
    let profile_field = bernoulli_spec()?.evaluate(grid)?;
    let target = unit_ball_volume(n)? / 2.0;
    for &center in &config.centers {
        for &r in &config.radii_list {
            let value = weiss(&profile_field, center, r)?;
            let rel_err = ((value - target) / target).abs();
            let pass = rel_err <= config.weiss_tol;
            warnings += usize::from(!pass);
            weiss_rows.push(format!(
                "W,{n},{},{},{r},{grid_n},{h},{value},{target},{rel_err},{},{pass}",
                center[0], center[1], config.weiss_tol
            ));
        }
    }

    let density_path = out_dir.join("density_table.csv");
    write_csv(
        &density_path,
        "quantity,n,theta,center_x,center_y,r,grid_n,h,value,target,rel_err,tol,pass",
        &density_rows,
    )?;
    let weiss_path = out_dir.join("weiss_table.csv");
    write_csv(
        &weiss_path,
        "quantity,n,center_x,center_y,r,grid_n,h,value,target,rel_err,tol,pass",
        &weiss_rows,
    )?;
    Ok(RunSummary {
        rows: density_rows.len() + weiss_rows.len(),
        warnings,
        artifacts: vec![density_path, weiss_path],
    })
}

/// monotonicity-audit: radial profiles of the four monotone quantities with
/// audit reports, on exact and/or solved fields.
fn monotonicity_audit(
    config: &ExperimentConfig,
    grid: &GridDomain,
    out_dir: &Path,
) -> Result<RunSummary, CliError> {
    let h = grid.spacing();
    let grid_n = config.nodes_per_axis;
    let r_min = config.radii_list[0];
    let cutoff = Cutoff::new(config.cutoff_eps)?;
    let omega = unit_ball_volume(grid.dim())?;
    let mut warnings = 0usize;
    let mut rows = Vec::new();
    let mut artifacts = Vec::new();

    // One solve per contact angle plus the angle-free one-phase solve, run
    // concurrently when the source asks for solved fields.
    let mut solved: Vec<(String, SolveResult)> = Vec::new();
    if config.source.includes_solved() {
        enum Job {
            Ac,
            Capillary(f64),
        }
        let mut jobs = vec![Job::Ac];
        jobs.extend(config.theta_list.iter().map(|&t| Job::Capillary(t)));
        let results = parallel_map(&jobs, |job| match job {
            Job::Ac => ("ac".to_string(), solve_ac_field(grid, config, 1.0)),
            Job::Capillary(theta) => (
                format!("capillary_theta{theta}"),
                solve_capillary_field(grid, config, *theta),
            ),
        });
        for (name, result) in results {
            let result = result?;
            warnings += usize::from(!result.converged);
            let path = out_dir.join(format!("field_{name}_solved.field"));
            fieldio::save_field(&path, &result.field)?;
            artifacts.push(path);
            solved.push((name, result));
        }
    }

    let solved_field = |name: &str| -> &ScalarField {
        &solved
            .iter()
            .find(|(n, _)| n == name)
            .expect("solved field prepared above")
            .1
            .field
    };

    let emit =
        |prof: &fblab_core::monotone::MonotoneProfile,
         source: Source,
         slack: f64,
         eps_hat: Option<f64>,
         center_index: usize,
         rows: &mut Vec<String>,
         warnings: &mut usize|
         -> Result<PathBuf, CliError> {
            let report = audit(prof, slack, eps_hat);
            *warnings += usize::from(!report.verdict);
            if let Some(check) = &report.hypothesis_check {
                *warnings += usize::from(!check.satisfied);
            }
            let theta_tag = prof
                .theta
                .map(|t| format!("_theta{t}"))
                .unwrap_or_default();
            let path = out_dir.join(format!(
                "audit_{}_{source}{theta_tag}_c{center_index}.json",
                prof.quantity
            ));
            write_json(&path, &report)?;
            for (&r, &value) in prof.radii.iter().zip(&prof.values) {
                let theta_column = prof.theta.map(|t| t.to_string()).unwrap_or_default();
                rows.push(format!(
                    "{},{source},{theta_column},{},{},{r},{value},{grid_n},{h},{slack}",
                    prof.quantity, prof.center[0], prof.center[1]
                ));
            }
            Ok(path)
        };

    for source in sources_of(config) {
        // Weiss profiles of the one-phase field (contact-angle free).
        let exact_profile_field;
        let profile_field = match source {
            Source::Exact | Source::Both => {
                exact_profile_field = bernoulli_spec()?.evaluate(grid)?;
                &exact_profile_field
            }
            Source::Solved => solved_field("ac"),
        };
        let w_slack = default_slack(omega / 2.0, h, r_min);
        for (k, &center) in config.centers.iter().enumerate() {
            let prof = profile(
                ProfileQuantity::Weiss(profile_field),
                center,
                &config.radii_list,
            )?;
            artifacts.push(emit(&prof, source, w_slack, None, k, &mut rows, &mut warnings)?);
            let prof = profile(
                ProfileQuantity::RegWeiss(profile_field, &cutoff),
                center,
                &config.radii_list,
            )?;
            artifacts.push(emit(&prof, source, w_slack, None, k, &mut rows, &mut warnings)?);
        }

        // Density profiles per contact angle.
        for &theta in &config.theta_list {
            let exact_height;
            let height = match source {
                Source::Exact | Source::Both => {
                    exact_height = capillary_spec(theta)?.evaluate(grid)?;
                    &exact_height
                }
                Source::Solved => solved_field(&format!("capillary_theta{theta}")),
            };
            let varifold = GraphVarifold::new(height, theta)?;
            let scale = (1.0 - theta.cos()) / 2.0;
            let slack = default_slack(scale, h, r_min);
            for (k, &center) in config.centers.iter().enumerate() {
                let prof = profile(
                    ProfileQuantity::Density(&varifold),
                    center,
                    &config.radii_list,
                )?;
                artifacts.push(emit(
                    &prof,
                    source,
                    slack,
                    Some(config.eps_hat),
                    k,
                    &mut rows,
                    &mut warnings,
                )?);
                let prof = profile(
                    ProfileQuantity::RegDensity(&varifold, &cutoff),
                    center,
                    &config.radii_list,
                )?;
                artifacts.push(emit(&prof, source, slack, None, k, &mut rows, &mut warnings)?);
            }
        }
    }

    let profiles_path = out_dir.join("profiles.csv");
    write_csv(
        &profiles_path,
        "quantity,source,theta,center_x,center_y,r,value,grid_n,h,slack",
        &rows,
    )?;
    artifacts.insert(0, profiles_path);
    Ok(RunSummary {
        rows: rows.len(),
        warnings,
        artifacts,
    })
}

#[derive(Serialize)]
struct ExponentFit {
    source: String,
    radius: f64,
    /// Least-squares slope of log(gap) against log(theta); `null` when a gap
    /// vanished or only one angle was swept.
    exponent: Option<f64>,
}

#[derive(Serialize)]
struct SweepSummary {
    experiment: String,
    grid_n: usize,
    h: f64,
    theta_list: Vec<f64>,
    fits: Vec<ExponentFit>,
}

fn fit_exponent(thetas: &[f64], gaps: &[f64]) -> Option<f64> {
    if thetas.len() < 2 || gaps.iter().any(|&g| g <= 0.0) {
        return None;
    }
    let xs: Vec<f64> = thetas.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// theta-sweep: matched capillary/one-phase pairs across contact angles;
/// convergence gaps, free-boundary distances, exponent fit, log-log chart.
fn theta_sweep(
    config: &ExperimentConfig,
    grid: &GridDomain,
    out_dir: &Path,
) -> Result<RunSummary, CliError> {
    let h = grid.spacing();
    let grid_n = config.nodes_per_axis;
    let omega = unit_ball_volume(grid.dim())?;
    let window = RegionMask::ball(grid, [0.0, 0.0], config.window_radius);
    let mut warnings = 0usize;

    // Solved pairs: the capillary problem at theta, and the one-phase
    // problem fed the rescaled trace (tan(theta)/theta) of the same data.
    let mut pairs: Vec<(f64, SolveResult, SolveResult)> = Vec::new();
    if config.source.includes_solved() {
        let jobs: Vec<(f64, bool)> = config
            .theta_list
            .iter()
            .flat_map(|&t| [(t, true), (t, false)])
            .collect();
        let results = parallel_map(&jobs, |&(theta, capillary)| {
            if capillary {
                solve_capillary_field(grid, config, theta)
            } else {
                solve_ac_field(grid, config, theta.tan() / theta)
            }
        });
        let mut iter = results.into_iter();
        for &theta in &config.theta_list {
            let cap = iter.next().expect("one capillary result per angle")?;
            let ac = iter.next().expect("one one-phase result per angle")?;
            warnings += usize::from(!cap.converged) + usize::from(!ac.converged);
            pairs.push((theta, cap, ac));
        }
    }

    let mut rows = Vec::new();
    // gap[(source, radius)] in emission order, for the summary fit and chart.
    let mut series: Vec<(Source, Vec<Vec<f64>>)> = Vec::new();
    for source in sources_of(config) {
        let mut per_radius: Vec<Vec<f64>> = vec![Vec::new(); config.radii_list.len()];
        for (ti, &theta) in config.theta_list.iter().enumerate() {
            let exact_height;
            let exact_profile;
            let (height, profile_field, cap_conv, ac_conv) = match source {
                Source::Exact | Source::Both => {
                    exact_height = capillary_spec(theta)?.evaluate(grid)?;
                    exact_profile = bernoulli_spec()?.evaluate(grid)?;
                    (&exact_height, &exact_profile, true, true)
                }
                Source::Solved => {
                    let (_, cap, ac) = &pairs[ti];
                    (&cap.field, &ac.field, cap.converged, ac.converged)
                }
            };
            let varifold = GraphVarifold::new(height, theta)?;
            let hausdorff = match hausdorff_distance(
                &free_boundary(height),
                &free_boundary(profile_field),
                &window,
            ) {
                Ok(d) => d,
                Err(_) => {
                    warnings += 1;
                    f64::NAN
                }
            };
            for (ri, &r) in config.radii_list.iter().enumerate() {
                for &center in &config.centers {
                    let gap = convergence_gap(&varifold, profile_field, center, r)?;
                    let scale = weiss(profile_field, center, r)? / (2.0 * omega);
                    let rel_gap = gap / scale;
                    if center == config.centers[0] {
                        per_radius[ri].push(gap);
                    }
                    rows.push(format!(
                        "{source},{theta},{},{},{r},{grid_n},{h},{gap},{rel_gap},{hausdorff},{cap_conv},{ac_conv}",
                        center[0], center[1]
                    ));
                }
            }
        }
        series.push((source, per_radius));
    }

    let gaps_path = out_dir.join("gaps.csv");
    write_csv(
        &gaps_path,
        "source,theta,center_x,center_y,r,grid_n,h,gap,rel_gap,hausdorff,cap_converged,ac_converged",
        &rows,
    )?;
    let mut artifacts = vec![gaps_path];

    let mut fits = Vec::new();
    for (source, per_radius) in &series {
        for (ri, gaps) in per_radius.iter().enumerate() {
            fits.push(ExponentFit {
                source: source.to_string(),
                radius: config.radii_list[ri],
                exponent: fit_exponent(&config.theta_list, gaps),
            });
        }
    }
    let summary_path = out_dir.join("sweep_summary.json");
    write_json(
        &summary_path,
        &SweepSummary {
            experiment: config.experiment.to_string(),
            grid_n,
            h,
            theta_list: config.theta_list.clone(),
            fits,
        },
    )?;
    artifacts.push(summary_path);

    // Log-log chart of the gap at the largest radius.
    for (source, per_radius) in &series {
        let gaps = per_radius.last().expect("radii_list is nonempty");
        let points: Vec<(f64, f64)> = config
            .theta_list
            .iter()
            .zip(gaps)
            .filter(|(_, &g)| g > 0.0)
            .map(|(&t, &g)| (t.log10(), g.log10()))
            .collect();
        let chart = line_chart(
            &format!("convergence gap vs contact angle ({source})"),
            "log10(theta)",
            "log10(gap)",
            &points,
        );
        let path = out_dir.join(format!("gap_vs_theta_{source}.svg"));
        write_text(&path, &chart)?;
        artifacts.push(path);
    }

    Ok(RunSummary {
        rows: rows.len(),
        warnings,
        artifacts,
    })
}

/// curvature-sweep: interface curvature ratios near the wetting line across
/// contact angles, on exact half-planes and (optionally) solved fields.
fn curvature_sweep(
    config: &ExperimentConfig,
    grid: &GridDomain,
    out_dir: &Path,
) -> Result<RunSummary, CliError> {
    let h = grid.spacing();
    let grid_n = config.nodes_per_axis;
    let window = RegionMask::ball(grid, [0.0, 0.0], config.window_radius);
    let mut warnings = 0usize;

    let solved: Vec<Option<SolveResult>> = if config.source.includes_solved() {
        let results = parallel_map(&config.theta_list, |&theta| {
            solve_capillary_field(grid, config, theta)
        });
        let mut out = Vec::new();
        for result in results {
            let result = result?;
            warnings += usize::from(!result.converged);
            out.push(Some(result));
        }
        out
    } else {
        config.theta_list.iter().map(|_| None).collect()
    };

    let mut ratio_of = |field: &ScalarField, theta: f64, near_band: f64| -> Result<f64, CliError> {
        match curvature_ratio(field, theta, near_band, &window) {
            Ok(v) => Ok(v),
            Err(fblab_core::Error::UndefinedRatio(_)) => {
                warnings += 1;
                Ok(f64::NAN)
            }
            Err(e) => Err(e.into()),
        }
    };

    let mut rows = Vec::new();
    let mut chart_points = Vec::new();
    for (ti, &theta) in config.theta_list.iter().enumerate() {
        let spec = capillary_spec(theta)?;
        let near_band = config.near_band_factor * spec.slope() * config.half_width;
        let exact_ratio = ratio_of(&spec.evaluate(grid)?, theta, near_band)?;
        let (solved_ratio, solved_converged) = match &solved[ti] {
            Some(result) => (
                ratio_of(&result.field, theta, near_band)?.to_string(),
                result.converged.to_string(),
            ),
            None => (String::new(), String::new()),
        };
        let chart_value = if solved_ratio.is_empty() {
            exact_ratio
        } else {
            solved_ratio.parse::<f64>().expect("formatted above")
        };
        if chart_value.is_finite() {
            chart_points.push((theta, chart_value));
        }
        rows.push(format!(
            "{theta},{near_band},{},{grid_n},{h},{exact_ratio},{solved_ratio},{solved_converged}",
            config.window_radius
        ));
    }

    let ratios_path = out_dir.join("ratios.csv");
    write_csv(
        &ratios_path,
        "theta,near_band,window_radius,grid_n,h,exact_ratio,solved_ratio,solved_converged",
        &rows,
    )?;
    let chart = line_chart(
        "curvature ratio vs contact angle",
        "theta",
        "sup |A| / sin(theta)",
        &chart_points,
    );
    let chart_path = out_dir.join("curvature_vs_theta.svg");
    write_text(&chart_path, &chart)?;

    Ok(RunSummary {
        rows: rows.len(),
        warnings,
        artifacts: vec![ratios_path, chart_path],
    })
}
