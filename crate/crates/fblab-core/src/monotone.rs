//! Monotone quantities for capillary graphs: the signed density ratio of the
//! associated varifold, the Weiss energy of a one-phase profile, their
//! cutoff-regularized versions, radial profiles, and audit reports.
//!
//! Throughout, a nonnegative graph `u` over the base cube together with a
//! contact angle `theta` induces the measure that weighs the interface
//! `{(y, u(y)) : u(y) > 0}` with surface area and the wetted base region
//! `{u > 0}` with the signed coefficient `-cos(theta)`. Balls are centered at
//! points of the base plane.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::cos_theta;
use crate::grid_field::{
    integrate, integrate_fn, positive_side_gradient, sphere_integral_fn, GridDomain, Point,
    RegionMask, ScalarField,
};

/// Volume of the unit ball in dimension `n` (the normalizer `omega_n`).
pub fn unit_ball_volume(dim: usize) -> Result<f64> {
    match dim {
        1 => Ok(2.0),
        2 => Ok(PI),
        3 => Ok(4.0 * PI / 3.0),
        _ => Err(Error::UnsupportedDimension(dim)),
    }
}

/// A nonnegative height field paired with a contact angle, carrying the
/// cached surface-measure factor `sqrt(1 + |Du|^2)` built from positive-side
/// differences.
#[derive(Debug, Clone)]
pub struct GraphVarifold {
    height: ScalarField,
    theta: f64,
    surface_factor: ScalarField,
    max_slope: f64,
}

impl GraphVarifold {
    /// Wraps a height field and a contact angle in `(0, pi)`.
    ///
    /// The height must be nonnegative up to a `1e-12` rounding allowance.
    pub fn new(height: &ScalarField, theta: f64) -> Result<Self> {
        if !theta.is_finite() || theta <= 0.0 || theta >= PI {
            return Err(Error::InvalidParameter(format!(
                "contact angle must lie in (0, pi), got {theta}"
            )));
        }
        if height.min_value() < -1e-12 {
            return Err(Error::ConstraintViolation(format!(
                "height field must be nonnegative, found minimum {}",
                height.min_value()
            )));
        }
        let grad = positive_side_gradient(height);
        let grid = height.grid();
        let mut factor = Vec::with_capacity(grid.node_count());
        let mut max_slope = 0.0f64;
        for idx in 0..grid.node_count() {
            let g = grad.at(idx);
            let s2 = g[0] * g[0] + g[1] * g[1];
            max_slope = max_slope.max(s2.sqrt());
            factor.push((1.0 + s2).sqrt());
        }
        let surface_factor =
            ScalarField::from_values(grid, factor).expect("surface factor values are finite");
        Ok(Self {
            height: height.clone(),
            theta,
            surface_factor,
            max_slope,
        })
    }

    pub fn height(&self) -> &ScalarField {
        &self.height
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Nodal field `sqrt(1 + |Du|^2)`; slopes at nodes just outside the
    /// positivity set are extrapolated from the positive side.
    pub fn surface_factor(&self) -> &ScalarField {
        &self.surface_factor
    }

    /// Estimated Lipschitz constant (largest nodal slope).
    pub fn lipschitz(&self) -> f64 {
        self.max_slope
    }
}

/// Smooth radial cutoff: identically one on `(-inf, 1-eps]`, identically zero
/// on `[1, inf)`, and a decreasing quintic ramp in between, so the derivative
/// is continuous, nonpositive, and integrates to exactly minus one.
#[derive(Debug, Clone, Copy)]
pub struct Cutoff {
    eps: f64,
}

impl Cutoff {
    /// Requires `eps` in the open interval `(0, 1/2)`.
    pub fn new(eps: f64) -> Result<Self> {
        if !eps.is_finite() || eps <= 0.0 || eps >= 0.5 {
            return Err(Error::InvalidParameter(format!(
                "cutoff width must lie in (0, 1/2), got {eps}"
            )));
        }
        Ok(Self { eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// The cutoff value `zeta(t)`.
    pub fn value(&self, t: f64) -> f64 {
        if t <= 1.0 - self.eps {
            1.0
        } else if t >= 1.0 {
            0.0
        } else {
            let s = (t - (1.0 - self.eps)) / self.eps;
            1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
        }
    }

    /// The derivative `zeta'(t)`; exactly zero outside `(1-eps, 1)`.
    pub fn derivative(&self, t: f64) -> f64 {
        if t <= 1.0 - self.eps || t >= 1.0 {
            0.0
        } else {
            let s = (t - (1.0 - self.eps)) / self.eps;
            -30.0 * s * s * (1.0 - s) * (1.0 - s) / self.eps
        }
    }
}

fn require_density_radius(grid: &GridDomain, r: f64) -> Result<()> {
    let floor = 8.0 * grid.spacing();
    if r < floor {
        return Err(Error::Resolution(format!(
            "radius {r} is below 8h = {floor}; refine the grid"
        )));
    }
    Ok(())
}

fn dist(p: Point, x: Point) -> f64 {
    let dx = p[0] - x[0];
    let dy = p[1] - x[1];
    (dx * dx + dy * dy).sqrt()
}

/// Partial-cell mask of the wetted flat ball `{u > 0} and {|y - x| < r}`.
///
/// The same mask weighs both the interface and the wet-area terms of the
/// density, so its cell-cutting errors enter those terms with the common
/// factor and largely cancel in the signed combination.
fn wet_ball_mask(u: &ScalarField, x: Point, r: f64) -> RegionMask {
    let rr = r * r;
    RegionMask::from_subcell_test(u.grid(), |p| {
        let dx = p[0] - x[0];
        let dy = p[1] - x[1];
        dx * dx + dy * dy < rr && u.interp(p) > 0.0
    })
}

/// Mass of the sliver `{u > 0, |y - x| < r, |y - x|^2 + u^2 >= r^2}` under the
/// surface measure: the wet region inside the flat ball whose lifted points
/// `(y, u(y))` already left the space ball.
///
/// Integrated in polar coordinates around `x`: each ray is scanned downward
/// from `rho = r` for the outermost crossing of `rho^2 + u^2 = r^2`, the
/// crossing is sharpened by bisection, and the remaining segment `[rho*, r]`
/// is integrated by composite Simpson panels no wider than one grid spacing.
/// Rays are assumed to cross the lifted sphere once, which holds for graphs
/// whose height grows no faster than linearly from the center — the cones and
/// near-cones this laboratory evaluates.
fn sliver_mass(v: &GraphVarifold, x: Point, r: f64) -> f64 {
    let grid = v.height.grid();
    let h = grid.spacing();
    let dim = grid.dim();
    let u = &v.height;
    let f = &v.surface_factor;

    let lifted_gap = |rho: f64, e: [f64; 2]| -> f64 {
        let p = [x[0] + rho * e[0], x[1] + rho * e[1]];
        let t = u.interp(p).max(0.0);
        rho * rho + t * t - r * r
    };
    let integrand = |rho: f64, e: [f64; 2]| -> f64 {
        let p = [x[0] + rho * e[0], x[1] + rho * e[1]];
        if u.interp(p) <= 0.0 {
            return 0.0;
        }
        let jacobian = if dim == 2 { rho } else { 1.0 };
        f.interp(p) * jacobian
    };

    let ray = |e: [f64; 2]| -> f64 {
        if lifted_gap(r, e) <= 0.0 {
            return 0.0;
        }
        let step = 0.5 * h;
        let mut hi = r;
        let mut lo = (r - step).max(0.0);
        let rho_star = loop {
            if lifted_gap(lo, e) <= 0.0 {
                let (mut a, mut b) = (lo, hi);
                for _ in 0..50 {
                    let mid = 0.5 * (a + b);
                    if lifted_gap(mid, e) <= 0.0 {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                break 0.5 * (a + b);
            }
            if lo == 0.0 {
                break 0.0;
            }
            hi = lo;
            lo = (lo - step).max(0.0);
        };
        let panels = (((r - rho_star) / h).ceil() as usize).max(1);
        let width = (r - rho_star) / panels as f64;
        let mut acc = 0.0;
        for j in 0..panels {
            let a = rho_star + j as f64 * width;
            let b = a + width;
            acc += width / 6.0
                * (integrand(a, e) + 4.0 * integrand(0.5 * (a + b), e) + integrand(b, e));
        }
        acc
    };

    match dim {
        1 => ray([1.0, 0.0]) + ray([-1.0, 0.0]),
        _ => {
            let m = ((TAU * r / h).ceil() as usize * 2).max(64);
            let mut acc = 0.0;
            for k in 0..m {
                let phi = TAU * (k as f64) / (m as f64);
                acc += ray([phi.cos(), phi.sin()]);
            }
            acc * TAU / (m as f64)
        }
    }
}

/// Interface mass inside the space ball: the cartesian integral of
/// `sqrt(1 + |Du|^2)` over the wetted flat ball minus the sliver whose lifted
/// points fall outside `B_r`.
fn interface_mass(v: &GraphVarifold, wet: &RegionMask, x: Point, r: f64) -> Result<f64> {
    Ok(integrate(&v.surface_factor, wet)? - sliver_mass(v, x, r))
}

/// Signed density ratio of the graph varifold over the ball `B_r(x)`:
///
/// `[ int_{u>0, |y-x|^2+u^2 < r^2} sqrt(1+|Du|^2) dy
///    - cos(theta) * |{u>0} centered ball| ] / (omega_n r^n)`.
///
/// Requires the ball to stay inside the cube and `r >= 8h`. On an exact
/// capillary half-plane the value is `(1 - cos(theta))/2` at every radius.
pub fn density_ratio(v: &GraphVarifold, x: Point, r: f64) -> Result<f64> {
    let grid = v.height.grid();
    grid.require_ball_inside(x, r)?;
    require_density_radius(grid, r)?;
    let wet = wet_ball_mask(&v.height, x, r);
    let interface = interface_mass(v, &wet, x, r)?;
    let omega = unit_ball_volume(grid.dim())?;
    let value = (interface - cos_theta(v.theta) * wet.measure()) / (omega * r.powi(grid.dim() as i32));
    Ok(value)
}

/// Density ratio of the complement configuration: the same interface viewed
/// with the complementary contact angle `pi - theta`, whose wetted base
/// region is the dry side `{u <= 0}` of the original graph.
///
/// Satisfies `complement = original + cos(theta)` up to quadrature, since the
/// wet and dry regions partition the flat ball.
pub fn complement_density_ratio(v: &GraphVarifold, x: Point, r: f64) -> Result<f64> {
    let grid = v.height.grid();
    grid.require_ball_inside(x, r)?;
    require_density_radius(grid, r)?;
    let wet = wet_ball_mask(&v.height, x, r);
    let interface = interface_mass(v, &wet, x, r)?;
    let rr = r * r;
    let u = &v.height;
    let dry = RegionMask::from_subcell_test(grid, |p| {
        let dx = p[0] - x[0];
        let dy = p[1] - x[1];
        dx * dx + dy * dy < rr && !(u.interp(p) > 0.0)
    });
    let omega = unit_ball_volume(grid.dim())?;
    let value =
        (interface - cos_theta(PI - v.theta) * dry.measure()) / (omega * r.powi(grid.dim() as i32));
    Ok(value)
}

/// Weiss energy of a one-phase profile over the ball `B_r(x)`:
///
/// `r^{-n} int_{{v>0} and B_r} (|Dv|^2 + 1) dy  -  r^{-n-1} int_{bdry B_r} v^2 dsigma`.
///
/// Gradients are positive-side differences; the sphere term squares the
/// multilinear interpolant. On an exact slope-one half-plane the value is
/// `omega_n / 2` at every radius.
pub fn weiss(v: &ScalarField, x: Point, r: f64) -> Result<f64> {
    let grid = v.grid();
    grid.require_ball_inside(x, r)?;
    require_density_radius(grid, r)?;
    let grad = positive_side_gradient(v);
    let rr = r * r;
    let mask = RegionMask::from_subcell_test(grid, |p| {
        let dx = p[0] - x[0];
        let dy = p[1] - x[1];
        dx * dx + dy * dy < rr && v.interp(p) > 0.0
    });
    let bulk = integrate_fn(grid, &mask, |idx, _| {
        let g = grad.at(idx);
        g[0] * g[0] + g[1] * g[1] + 1.0
    });
    let sphere = sphere_integral_fn(grid, x, r, |p| {
        let t = v.interp(p);
        t * t
    })?;
    let n = grid.dim() as i32;
    Ok(bulk / r.powi(n) - sphere / r.powi(n + 1))
}

/// Cutoff-regularized density: the sharp ball indicators are replaced by
/// `zeta(lifted/r)` on the interface term and `zeta(|y-x|/r)` on the wet
/// term, so the integrand vanishes smoothly at the ball boundary and no
/// sliver correction is needed.
pub fn reg_density(v: &GraphVarifold, zeta: &Cutoff, x: Point, r: f64) -> Result<f64> {
    let grid = v.height.grid();
    grid.require_ball_inside(x, r)?;
    require_density_radius(grid, r)?;
    let wet = wet_ball_mask(&v.height, x, r);
    let heights = v.height.values();
    let factors = v.surface_factor.values();
    let interface = integrate_fn(grid, &wet, |idx, p| {
        let t = heights[idx].max(0.0);
        let flat = dist(p, x);
        let lifted = (flat * flat + t * t).sqrt();
        zeta.value(lifted / r) * factors[idx]
    });
    let wet_term = integrate_fn(grid, &wet, |_, p| zeta.value(dist(p, x) / r));
    let omega = unit_ball_volume(grid.dim())?;
    Ok((interface - cos_theta(v.theta) * wet_term) / (omega * r.powi(grid.dim() as i32)))
}

/// Cutoff-regularized Weiss energy:
///
/// `r^{-n} int_{v>0} zeta(|y-x|/r) (|Dv|^2 + 1) dy
///  + r^{-n-1} int_{v>0} zeta'(|y-x|/r) v^2 / |y-x| dy`.
///
/// The derivative term replaces the sphere integral; its integrand is set to
/// zero wherever `zeta' = 0`, which removes the `1/|y-x|` singularity because
/// the support of `zeta'` stays at distance `(1-eps) r` from the center.
pub fn reg_weiss(v: &ScalarField, zeta: &Cutoff, x: Point, r: f64) -> Result<f64> {
    let grid = v.grid();
    grid.require_ball_inside(x, r)?;
    require_density_radius(grid, r)?;
    let grad = positive_side_gradient(v);
    let rr = r * r;
    let mask = RegionMask::from_subcell_test(grid, |p| {
        let dx = p[0] - x[0];
        let dy = p[1] - x[1];
        dx * dx + dy * dy < rr && v.interp(p) > 0.0
    });
    let vals = v.values();
    let bulk = integrate_fn(grid, &mask, |idx, p| {
        let g = grad.at(idx);
        zeta.value(dist(p, x) / r) * (g[0] * g[0] + g[1] * g[1] + 1.0)
    });
    let ramp = integrate_fn(grid, &mask, |idx, p| {
        let flat = dist(p, x);
        let slope = zeta.derivative(flat / r);
        if slope == 0.0 {
            0.0
        } else {
            slope * vals[idx] * vals[idx] / flat
        }
    });
    let n = grid.dim() as i32;
    Ok(bulk / r.powi(n) + ramp / r.powi(n + 1))
}

/// A quantity whose radial profile can be sampled.
#[derive(Clone, Copy)]
pub enum ProfileQuantity<'a> {
    /// Signed density ratio of a graph varifold.
    Density(&'a GraphVarifold),
    /// Density ratio of the complement configuration at angle `pi - theta`.
    ComplementDensity(&'a GraphVarifold),
    /// Weiss energy of a one-phase profile.
    Weiss(&'a ScalarField),
    /// Cutoff-regularized density.
    RegDensity(&'a GraphVarifold, &'a Cutoff),
    /// Cutoff-regularized Weiss energy.
    RegWeiss(&'a ScalarField, &'a Cutoff),
}

impl ProfileQuantity<'_> {
    fn tag(&self) -> &'static str {
        match self {
            ProfileQuantity::Density(_) => "Theta",
            ProfileQuantity::ComplementDensity(_) => "Theta_complement",
            ProfileQuantity::Weiss(_) => "W",
            ProfileQuantity::RegDensity(_, _) => "Theta_zeta",
            ProfileQuantity::RegWeiss(_, _) => "W_zeta",
        }
    }

    fn contact_angle(&self) -> Option<f64> {
        match self {
            ProfileQuantity::Density(v) | ProfileQuantity::RegDensity(v, _) => Some(v.theta()),
            ProfileQuantity::ComplementDensity(v) => Some(PI - v.theta()),
            _ => None,
        }
    }

    fn eval(&self, x: Point, r: f64) -> Result<f64> {
        match self {
            ProfileQuantity::Density(v) => density_ratio(v, x, r),
            ProfileQuantity::ComplementDensity(v) => complement_density_ratio(v, x, r),
            ProfileQuantity::Weiss(v) => weiss(v, x, r),
            ProfileQuantity::RegDensity(v, z) => reg_density(v, z, x, r),
            ProfileQuantity::RegWeiss(v, z) => reg_weiss(v, z, x, r),
        }
    }
}

/// A sampled radial profile `r -> Q(x, r)` of one monotone quantity.
#[derive(Debug, Clone)]
pub struct MonotoneProfile {
    /// Quantity tag: `"Theta"`, `"Theta_complement"`, `"W"`, `"Theta_zeta"`,
    /// or `"W_zeta"`.
    pub quantity: String,
    /// Contact angle for density quantities (`None` for Weiss quantities).
    pub theta: Option<f64>,
    pub center: Point,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

/// Samples a quantity over a strictly increasing list of radii.
pub fn profile(quantity: ProfileQuantity<'_>, center: Point, radii: &[f64]) -> Result<MonotoneProfile> {
    if radii.is_empty() {
        return Err(Error::InvalidParameter(
            "profile needs at least one radius".into(),
        ));
    }
    for pair in radii.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::InvalidParameter(format!(
                "profile radii must be strictly increasing, got {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    let values = radii
        .iter()
        .map(|&r| quantity.eval(center, r))
        .collect::<Result<Vec<f64>>>()?;
    Ok(MonotoneProfile {
        quantity: quantity.tag().to_string(),
        theta: quantity.contact_angle(),
        center,
        radii: radii.to_vec(),
        values,
    })
}

/// Default monotonicity slack for a profile: two percent of the quantity's
/// scale plus a discretization allowance `4h / r_min` that grows at small
/// radii.
pub fn default_slack(scale: f64, spacing: f64, r_min: f64) -> f64 {
    0.02 * scale + 4.0 * spacing / r_min
}

/// Outcome of the hypothesis check
/// `max_r Theta(x, r) + (cos theta)_- <= (1 + eps_hat) (1 - cos theta)/2`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct HypothesisCheck {
    pub theta: f64,
    pub eps_hat: f64,
    pub lhs_max: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// Monotonicity audit of one profile.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub quantity: String,
    pub center: [f64; 2],
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    /// True when every consecutive difference is at least `-slack`.
    pub verdict: bool,
    /// Largest decrease between consecutive values (zero if none decrease).
    pub max_violation: f64,
    /// Present when the profile carries a contact angle and `eps_hat` was
    /// supplied.
    pub hypothesis_check: Option<HypothesisCheck>,
}

/// Audits a profile for monotonicity up to `slack` and, when `eps_hat` is
/// supplied and the profile carries a contact angle, checks the density
/// smallness hypothesis `Theta + (cos theta)_- <= (1 + eps_hat)(1 - cos theta)/2`.
pub fn audit(profile: &MonotoneProfile, slack: f64, eps_hat: Option<f64>) -> AuditReport {
    let mut max_violation = 0.0f64;
    for pair in profile.values.windows(2) {
        max_violation = max_violation.max(pair[0] - pair[1]);
    }
    let hypothesis_check = match (eps_hat, profile.theta) {
        (Some(eps_hat), Some(theta)) => {
            let c = cos_theta(theta);
            let cos_minus = (-c).max(0.0);
            let sup = profile
                .values
                .iter()
                .fold(f64::NEG_INFINITY, |acc, &v| acc.max(v));
            let lhs_max = sup + cos_minus;
            let rhs = (1.0 + eps_hat) * (1.0 - c) / 2.0;
            Some(HypothesisCheck {
                theta,
                eps_hat,
                lhs_max,
                rhs,
                satisfied: lhs_max <= rhs,
            })
        }
        _ => None,
    };
    AuditReport {
        quantity: profile.quantity.clone(),
        center: profile.center,
        radii: profile.radii.clone(),
        values: profile.values.clone(),
        verdict: max_violation <= slack,
        max_violation,
        hypothesis_check,
    }
}

/// Gap between the rescaled density and the normalized Weiss energy:
///
/// `| theta^{-2} density_ratio(V, x, r)  -  weiss(v, x, r) / (2 omega_n) |`.
///
/// For the exact pair (capillary half-plane at angle `theta`, slope-one
/// half-plane) the gap is `theta^2/48 + O(theta^4)`, so it vanishes
/// quadratically as the contact angle degenerates.
pub fn convergence_gap(v: &GraphVarifold, profile: &ScalarField, x: Point, r: f64) -> Result<f64> {
    if v.height.grid() != profile.grid() {
        return Err(Error::GridMismatch(
            "convergence_gap: varifold and profile live on different grids".into(),
        ));
    }
    let theta = v.theta();
    let density = density_ratio(v, x, r)?;
    let w = weiss(profile, x, r)?;
    let omega = unit_ball_volume(profile.grid().dim())?;
    Ok((density / (theta * theta) - w / (2.0 * omega)).abs())
}
