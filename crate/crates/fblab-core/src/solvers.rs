//! Projected-descent minimization of the two graph energies.
//!
//! Both problems are solved with the same engine: smoothed-indicator
//! continuation over a decreasing list of smoothing widths, projected
//! gradient descent with a monotone backtracking line search, and a
//! Barzilai-Borwein step proposal between iterations. The feasible set is
//! `{v >= 0, v = boundary data on the cube faces}`; the projection clamps at
//! zero and the energy gradients are zeroed on the Dirichlet nodes, so both
//! constraints hold exactly at every iterate.
//!
//! The smoothed indicator has vanishing derivative at zero, so the smoothed
//! minimizer flattens out below the value `delta` and carries a thin positive
//! tail of amplitude `O(delta^3 / d^2)` at distance `d` beyond the genuine
//! free boundary. After the last continuation stage the solver zeroes
//! interior nodes below `delta_last`, which removes both the tail and the
//! flattened transition layer. Above that level the smoothed profile follows
//! the sharp one, so the last kept node sits one spacing inside the sharp
//! free boundary for the default `delta_last = h`, and the zero-node
//! crossing rule of `free_boundary` then reports the boundary at the sharp
//! location.

use crate::error::{Error, Result};
use crate::functionals::{
    ac_energy_smoothed, accumulate_q_partials, capillary_energy_smoothed, node_q,
    zero_dirichlet, SmoothingParams,
};
use crate::grid_field::{GridDomain, Point, RegionMask, ScalarField};

/// Controls for the continuation solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveParams {
    /// Smoothing widths, strictly decreasing, each valid for the grid's cube.
    pub deltas: Vec<f64>,
    /// First trial step of every line search until a Barzilai-Borwein
    /// proposal is available.
    pub initial_step: f64,
    /// Multiplicative backtracking factor in (0, 1).
    pub backtrack: f64,
    /// Iteration cap per continuation stage.
    pub max_iters: usize,
    /// Sup-norm tolerance on the projected gradient.
    pub grad_tol: f64,
}

impl SolveParams {
    /// Default schedule for a grid: widths {4h, 2h, h}, conservative first
    /// step below the explicit stability limit of the Dirichlet term.
    pub fn for_grid(grid: &GridDomain) -> Self {
        let h = grid.spacing();
        SolveParams {
            deltas: vec![4.0 * h, 2.0 * h, h],
            initial_step: h * h / 16.0,
            backtrack: 0.5,
            // support retraction travels one node per O(delta^2 / h^2)
            // accepted steps, so long half-plane retractions need headroom;
            // converged stages stop at the tolerance long before the cap
            max_iters: 20_000,
            grad_tol: 1e-3,
        }
    }

    /// Capillary variant: the minimizer and its gradient both carry a factor
    /// `tan(theta)` relative to the unit-slope problem, so the smoothing
    /// widths and the gradient tolerance scale with it.
    pub fn for_capillary(grid: &GridDomain, theta: f64) -> Result<Self> {
        require_capillary_angle(theta)?;
        let slope = if theta == std::f64::consts::FRAC_PI_2 {
            1.0
        } else {
            theta.tan()
        };
        let mut p = Self::for_grid(grid);
        for d in &mut p.deltas {
            *d *= slope;
        }
        p.grad_tol *= slope;
        Ok(p)
    }

    fn validate(&self, grid: &GridDomain) -> Result<()> {
        if self.deltas.is_empty() {
            return Err(Error::InvalidParameter(
                "smoothing schedule must contain at least one width".into(),
            ));
        }
        for pair in self.deltas.windows(2) {
            if !(pair[1] < pair[0]) {
                return Err(Error::InvalidParameter(format!(
                    "smoothing widths must decrease strictly, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        for &d in &self.deltas {
            SmoothingParams::new(d, grid.half_width())?;
        }
        if !self.initial_step.is_finite() || self.initial_step <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "initial step must be positive, got {}",
                self.initial_step
            )));
        }
        if !self.backtrack.is_finite() || self.backtrack <= 0.0 || self.backtrack >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "backtracking factor must lie in (0, 1), got {}",
                self.backtrack
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "iteration cap must be at least 1".into(),
            ));
        }
        if !self.grad_tol.is_finite() || self.grad_tol <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gradient tolerance must be positive, got {}",
                self.grad_tol
            )));
        }
        Ok(())
    }
}

/// Output of a solve: the field plus convergence diagnostics.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub field: ScalarField,
    /// Accepted descent steps summed over all continuation stages.
    pub iterations: usize,
    /// Sup-norm of the projected gradient at the end of the last stage.
    pub final_gradient_norm: f64,
    /// Accepted objective values of the last continuation stage, starting
    /// with the stage's initial energy; nonincreasing up to 1e-12.
    pub energy_history: Vec<f64>,
    /// True when every stage met the gradient tolerance within its cap.
    pub converged: bool,
}

fn require_capillary_angle(theta: f64) -> Result<()> {
    if !theta.is_finite() || theta <= 0.0 || theta > std::f64::consts::FRAC_PI_2 {
        return Err(Error::InvalidParameter(format!(
            "contact angle must lie in (0, pi/2], got {theta}"
        )));
    }
    Ok(())
}

/// Dirichlet energy `h^n sum_i Q_i` with its exact gradient per unit `h^n`,
/// zeroed on Dirichlet nodes. Drives the harmonic-extension initialization.
fn dirichlet_energy_with_gradient(f: &ScalarField) -> Result<(f64, ScalarField)> {
    let grid = *f.grid();
    let vals = f.values();
    let hn = grid.spacing().powi(grid.dim() as i32);
    let mut energy = 0.0;
    let mut grad = vec![0.0; vals.len()];
    let coeff = vec![1.0; vals.len()];
    for idx in 0..vals.len() {
        energy += node_q(vals, &grid, idx);
    }
    accumulate_q_partials(vals, &grid, &coeff, &mut grad);
    zero_dirichlet(&grid, &mut grad);
    Ok((energy * hn, ScalarField::from_values(&grid, grad)?))
}

/// Starting iterate: boundary data on the faces, 200 projected-descent steps
/// on the Dirichlet energy inside (an approximate harmonic extension, which
/// the maximum principle keeps nonnegative for nonnegative data), clamped at
/// zero. The descent starts from the axis-wise linear interpolation of the
/// opposing face values, which already has the full support of the harmonic
/// extension; descent alone propagates boundary information only one node
/// per iteration, and starting with surplus support matters because the
/// smoothed-indicator stages retract it quickly while growing missing
/// support crosses the stiff indicator barrier one node per many iterations.
fn harmonic_init(
    grid: &GridDomain,
    boundary: &ScalarField,
    params: &SolveParams,
) -> Result<Vec<f64>> {
    boundary.require_same_grid(grid, "solve boundary data")?;
    let n = grid.nodes_per_axis();
    let span = 2.0 * grid.half_width();
    let face_value = |idx: usize| -> Result<f64> {
        let b = boundary.values()[idx];
        if b < 0.0 {
            let p = grid.node_point(idx);
            return Err(Error::InvalidParameter(format!(
                "boundary data must be nonnegative, got {b} at ({}, {})",
                p[0], p[1]
            )));
        }
        Ok(b)
    };
    let mut vals = vec![0.0; grid.node_count()];
    for idx in 0..vals.len() {
        if grid.is_boundary_node(idx) {
            vals[idx] = face_value(idx)?;
            continue;
        }
        let (ix, iy) = grid.unravel(idx);
        let mut sum = 0.0;
        for axis in 0..grid.dim() {
            let (pos, lo, hi) = match axis {
                0 => (ix, grid.flat(0, iy), grid.flat(n, iy)),
                _ => (iy, grid.flat(ix, 0), grid.flat(ix, n)),
            };
            let t = (grid.coord(pos) + grid.half_width()) / span;
            sum += face_value(lo)? * (1.0 - t) + face_value(hi)? * t;
        }
        vals[idx] = sum / grid.dim() as f64;
    }
    let init_params = SolveParams {
        deltas: params.deltas.clone(),
        initial_step: params.initial_step,
        backtrack: params.backtrack,
        max_iters: 200,
        grad_tol: 0.0,
    };
    run_stage(grid, &mut vals, &init_params, dirichlet_energy_with_gradient)?;
    for v in &mut vals {
        *v = v.max(0.0);
    }
    Ok(vals)
}

fn projected_gradient_sup(grid: &GridDomain, vals: &[f64], grad: &[f64]) -> f64 {
    let mut sup = 0.0f64;
    for idx in 0..vals.len() {
        if grid.is_boundary_node(idx) {
            continue;
        }
        let g = grad[idx];
        if vals[idx] <= 0.0 && g > 0.0 {
            continue;
        }
        sup = sup.max(g.abs());
    }
    sup
}

struct StageReport {
    iterations: usize,
    final_gradient_norm: f64,
    energies: Vec<f64>,
    converged: bool,
}

fn run_stage<F>(
    grid: &GridDomain,
    vals: &mut Vec<f64>,
    params: &SolveParams,
    eval: F,
) -> Result<StageReport>
where
    F: Fn(&ScalarField) -> Result<(f64, ScalarField)>,
{
    let field = ScalarField::from_values(grid, vals.clone())?;
    let (mut energy, mut grad_field) = eval(&field)?;
    let mut energies = vec![energy];
    let mut pg_norm = projected_gradient_sup(grid, vals, grad_field.values());
    let mut step = params.initial_step;
    let mut iterations = 0;
    while iterations < params.max_iters && pg_norm > params.grad_tol {
        let grad = grad_field.values();
        let mut s = step;
        let mut accepted = false;
        while s >= 1e-18 {
            let trial: Vec<f64> = (0..vals.len())
                .map(|i| (vals[i] - s * grad[i]).max(0.0))
                .collect();
            let trial_field = ScalarField::from_values(grid, trial.clone())?;
            let (trial_energy, trial_grad) = eval(&trial_field)?;
            if trial_energy <= energy + 1e-12 {
                let mut num = 0.0;
                let mut den = 0.0;
                for i in 0..vals.len() {
                    let dv = trial[i] - vals[i];
                    let dg = trial_grad.values()[i] - grad[i];
                    num += dv * dv;
                    den += dv * dg;
                }
                step = if den > 0.0 && (num / den).is_finite() {
                    (num / den).clamp(1e-12, 0.25)
                } else {
                    params.initial_step
                };
                *vals = trial;
                energy = trial_energy;
                grad_field = trial_grad;
                energies.push(energy);
                accepted = true;
                break;
            }
            s *= params.backtrack;
        }
        if !accepted {
            // the line search cannot decrease the objective any further
            break;
        }
        iterations += 1;
        pg_norm = projected_gradient_sup(grid, vals, grad_field.values());
    }
    Ok(StageReport {
        iterations,
        final_gradient_norm: pg_norm,
        energies,
        converged: pg_norm <= params.grad_tol,
    })
}

/// Removes the smoothing artifacts below the last indicator width: the
/// sub-`delta` transition layer (whose slope is depressed by the smoothing)
/// and the positive tail beyond it. Face nodes carry Dirichlet data and are
/// never touched.
fn trim_tail(grid: &GridDomain, vals: &mut [f64], threshold: f64) {
    for idx in 0..vals.len() {
        if !grid.is_boundary_node(idx) && vals[idx] < threshold {
            vals[idx] = 0.0;
        }
    }
}

fn run_schedule<E>(grid: &GridDomain, boundary: &ScalarField, params: &SolveParams, make_eval: E) -> Result<SolveResult>
where
    E: Fn(SmoothingParams) -> Box<dyn Fn(&ScalarField) -> Result<(f64, ScalarField)>>,
{
    params.validate(grid)?;
    let mut vals = harmonic_init(grid, boundary, params)?;
    let mut iterations = 0;
    let mut final_gradient_norm = f64::INFINITY;
    let mut energy_history = Vec::new();
    let mut converged = true;
    for &delta in &params.deltas {
        let smoothing = SmoothingParams::new(delta, grid.half_width())?;
        let report = run_stage(grid, &mut vals, params, make_eval(smoothing))?;
        iterations += report.iterations;
        final_gradient_norm = report.final_gradient_norm;
        energy_history = report.energies;
        converged &= report.converged;
    }
    trim_tail(grid, &mut vals, params.deltas.last().copied().unwrap_or(0.0));
    Ok(SolveResult {
        field: ScalarField::from_values(grid, vals)?,
        iterations,
        final_gradient_norm,
        energy_history,
        converged,
    })
}

/// Minimizes the smoothed Alt-Caffarelli energy over nonnegative fields with
/// the given Dirichlet face data, continued across the smoothing schedule.
pub fn solve_ac(
    grid: &GridDomain,
    boundary: &ScalarField,
    params: &SolveParams,
) -> Result<SolveResult> {
    let ones = RegionMask::ones(grid);
    run_schedule(grid, boundary, params, move |smoothing| {
        let region = ones.clone();
        Box::new(move |f| ac_energy_smoothed(f, smoothing, &region))
    })
}

/// Minimizes the smoothed capillary graph energy at contact angle
/// `theta` in (0, pi/2] over nonnegative fields with Dirichlet face data.
pub fn solve_capillary(
    grid: &GridDomain,
    boundary: &ScalarField,
    theta: f64,
    params: &SolveParams,
) -> Result<SolveResult> {
    require_capillary_angle(theta)?;
    let ones = RegionMask::ones(grid);
    run_schedule(grid, boundary, params, move |smoothing| {
        let region = ones.clone();
        Box::new(move |f| capillary_energy_smoothed(f, theta, smoothing, &region))
    })
}

/// Zero crossings of `f` along grid edges between positive and nonpositive
/// nodes, linearly interpolated. A positive node next to an exact zero puts
/// the crossing at the zero node. The list is sorted lexicographically and
/// deduplicated, so identical inputs give identical outputs.
pub fn free_boundary(f: &ScalarField) -> Vec<Point> {
    let grid = f.grid();
    let vals = f.values();
    let mut points: Vec<Point> = Vec::new();
    for idx in 0..vals.len() {
        for axis in 0..grid.dim() {
            let (_, fwd) = grid.axis_neighbors(idx, axis);
            let Some(next) = fwd else { continue };
            let a = vals[idx];
            let b = vals[next];
            let (pos, neg, pos_val, neg_val) = if a > 0.0 && b <= 0.0 {
                (idx, next, a, b)
            } else if b > 0.0 && a <= 0.0 {
                (next, idx, b, a)
            } else {
                continue;
            };
            let t = pos_val / (pos_val - neg_val);
            let p = grid.node_point(pos);
            let q = grid.node_point(neg);
            points.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    points.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    points.dedup_by(|a, b| a == b);
    points
}

/// Hausdorff distance between the window-restricted point sets: the larger
/// of the two directed sup-inf distances over `A` and `B` intersected with
/// the window.
pub fn hausdorff_distance(a: &[Point], b: &[Point], window: &RegionMask) -> Result<f64> {
    let keep = |set: &[Point]| -> Vec<Point> {
        set.iter().copied().filter(|&p| window.covers(p)).collect()
    };
    let a_in = keep(a);
    let b_in = keep(b);
    if a_in.is_empty() || b_in.is_empty() {
        return Err(Error::UndefinedDistance(format!(
            "window restriction leaves {} and {} points",
            a_in.len(),
            b_in.len()
        )));
    }
    let directed = |from: &[Point], to: &[Point]| -> f64 {
        from.iter()
            .map(|p| {
                to.iter()
                    .map(|q| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(directed(&a_in, &b_in).max(directed(&b_in, &a_in)))
}
