//! The Alt-Caffarelli and capillary graph energies, their smoothed
//! differentiable surrogates, and the small-slope expansion gap.
//!
//! Sharp energies use the node-level indicator `[v > 0]` (Alt-Caffarelli) or
//! sub-cell positivity weights with the positive-side gradient (capillary),
//! so they are exact on piecewise-affine half-plane profiles up to quadrature
//! of the region boundary. Smoothed energies replace the indicator by a
//! quintic step `Phi_delta` and return their exact discrete gradient, which
//! at interior nodes with unit weights reduces to `-2 Lap_h v + Phi'(v)`.

use crate::error::{Error, Result};
use crate::grid_field::{
    gradient, integrate_fn, positive_side_gradient, GridDomain, RegionMask, ScalarField,
};

/// Width of the smooth positivity indicator used inside the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingParams {
    delta: f64,
}

impl SmoothingParams {
    /// `delta` must be positive and at most one tenth of the cube half-width,
    /// so the smoothing band never dominates the domain.
    pub fn new(delta: f64, half_width: f64) -> Result<Self> {
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "indicator width must be positive and finite, got {delta}"
            )));
        }
        if delta > 0.1 * half_width * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "indicator width {delta} exceeds 0.1 * half_width = {}",
                0.1 * half_width
            )));
        }
        Ok(SmoothingParams { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Quintic smoothstep approximation of the indicator `[v > 0]`: zero below 0,
/// one above `delta`, C^2 at both ends.
pub(crate) fn smooth_indicator(v: f64, delta: f64) -> f64 {
    if v <= 0.0 {
        0.0
    } else if v >= delta {
        1.0
    } else {
        let s = v / delta;
        s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
    }
}

pub(crate) fn smooth_indicator_prime(v: f64, delta: f64) -> f64 {
    if v <= 0.0 || v >= delta {
        0.0
    } else {
        let s = v / delta;
        30.0 * s * s * (1.0 - s) * (1.0 - s) / delta
    }
}

/// cos(theta) with the right angle treated exactly, so the wetting term of
/// the capillary energy vanishes identically at theta = pi/2.
pub(crate) fn cos_theta(theta: f64) -> f64 {
    if theta == std::f64::consts::FRAC_PI_2 {
        0.0
    } else {
        theta.cos()
    }
}

fn require_theta(theta: f64) -> Result<()> {
    if !theta.is_finite() || theta <= 0.0 || theta >= std::f64::consts::PI {
        return Err(Error::InvalidParameter(format!(
            "contact angle must lie in (0, pi), got {theta}"
        )));
    }
    Ok(())
}

fn require_nonnegative_on(u: &ScalarField, region: &RegionMask, what: &str) -> Result<()> {
    for (idx, &w) in region.weights().iter().enumerate() {
        if w > 0.0 && u.values()[idx] < -1e-12 {
            let p = u.grid().node_point(idx);
            return Err(Error::ConstraintViolation(format!(
                "{what}: negative height {} at node {idx} ({}, {})",
                u.values()[idx],
                p[0],
                p[1]
            )));
        }
    }
    Ok(())
}

/// The Alt-Caffarelli energy `integral over region of |Dv|^2 + [v > 0]`,
/// with the sharp node indicator.
pub fn ac_energy(v: &ScalarField, region: &RegionMask) -> Result<f64> {
    region.require_same_grid(v.grid(), "ac_energy")?;
    let grad = gradient(v);
    Ok(integrate_fn(v.grid(), region, |idx, _| {
        let g = grad.at(idx);
        let ind = if v.values()[idx] > 0.0 { 1.0 } else { 0.0 };
        g[0] * g[0] + g[1] * g[1] + ind
    }))
}

struct CapillaryScan {
    energy: f64,
    rescaled_dirichlet: f64,
    max_slope: f64,
}

/// One pass over `region ∩ {u > 0}` (sub-cell positivity weights,
/// positive-side gradient) accumulating both the capillary energy and the
/// rescaled Dirichlet integrand on identical nodes and weights, so their
/// difference is free of shared quadrature error.
fn capillary_scan(u: &ScalarField, theta: f64, region: &RegionMask) -> Result<CapillaryScan> {
    require_theta(theta)?;
    region.require_same_grid(u.grid(), "capillary energy")?;
    require_nonnegative_on(u, region, "capillary energy")?;
    let cos = cos_theta(theta);
    let posfrac = RegionMask::positive_set(u);
    let grad = positive_side_gradient(u);
    let grid = u.grid();
    let hn = grid.spacing().powi(grid.dim() as i32);
    let inv_theta2 = 1.0 / (theta * theta);
    let mut energy = 0.0;
    let mut dirichlet = 0.0;
    let mut max_slope: f64 = 0.0;
    for (idx, &wr) in region.weights().iter().enumerate() {
        let w = wr * posfrac.weight(idx);
        if w > 0.0 {
            let g = grad.at(idx);
            let g2 = g[0] * g[0] + g[1] * g[1];
            energy += w * ((1.0 + g2).sqrt() - cos);
            dirichlet += w * (inv_theta2 * g2 + 1.0);
            max_slope = max_slope.max(g2.sqrt());
        }
    }
    Ok(CapillaryScan {
        energy: energy * hn,
        rescaled_dirichlet: dirichlet * hn,
        max_slope,
    })
}

/// The capillary graph energy
/// `integral over region ∩ {u > 0} of sqrt(1 + |Du|^2) - cos(theta)`.
pub fn capillary_energy(u: &ScalarField, theta: f64, region: &RegionMask) -> Result<f64> {
    Ok(capillary_scan(u, theta, region)?.energy)
}

/// Normalized remainder of the small-slope expansion:
/// `|capillary_energy - (theta^2/2) * integral over {u>0} of
/// (theta^-2 |Du|^2 + 1)| / theta^3`. Both integrals share one quadrature, so
/// the returned value isolates the pointwise Taylor remainder.
pub fn expansion_gap(u: &ScalarField, theta: f64, region: &RegionMask) -> Result<f64> {
    let scan = capillary_scan(u, theta, region)?;
    if scan.max_slope > 10.0 * theta {
        return Err(Error::Precondition(format!(
            "expansion_gap requires max |Du| <= 10 theta; got {} at theta = {theta}",
            scan.max_slope
        )));
    }
    let theta2 = theta * theta;
    Ok((scan.energy - 0.5 * theta2 * scan.rescaled_dirichlet).abs() / (theta2 * theta))
}

/// Averaged one-sided squared differences at a node: per axis
/// `((d+)^2 + (d-)^2) / 2`, substituting the available difference on cube
/// faces. Equals `|Du|^2` exactly on affine fields.
pub(crate) fn node_q(values: &[f64], grid: &GridDomain, idx: usize) -> f64 {
    let h = grid.spacing();
    let mut q = 0.0;
    for axis in 0..grid.dim() {
        let (back, fwd) = grid.axis_neighbors(idx, axis);
        let db = back.map(|j| (values[j] - values[idx]) / h);
        let df = fwd.map(|j| (values[j] - values[idx]) / h);
        q += match (db, df) {
            (Some(b), Some(f)) => 0.5 * (b * b + f * f),
            (Some(b), None) => b * b,
            (None, Some(f)) => f * f,
            (None, None) => 0.0,
        };
    }
    q
}

/// Adds `coeff[i] * dQ_i/dv_k` to `out[k]` for every node pair, i.e. the
/// exact partial derivatives of `sum_i coeff_i Q_i` with respect to the node
/// values (without the `h^n` factor).
pub(crate) fn accumulate_q_partials(
    values: &[f64],
    grid: &GridDomain,
    coeff: &[f64],
    out: &mut [f64],
) {
    let s = 1.0 / (grid.spacing() * grid.spacing());
    for idx in 0..values.len() {
        let c = coeff[idx];
        if c == 0.0 {
            continue;
        }
        for axis in 0..grid.dim() {
            let (back, fwd) = grid.axis_neighbors(idx, axis);
            match (back, fwd) {
                (Some(b), Some(f)) => {
                    let df = (values[f] - values[idx]) * s;
                    let db = (values[b] - values[idx]) * s;
                    out[f] += c * df;
                    out[b] += c * db;
                    out[idx] -= c * (df + db);
                }
                (Some(b), None) => {
                    let db = (values[b] - values[idx]) * s;
                    out[b] += 2.0 * c * db;
                    out[idx] -= 2.0 * c * db;
                }
                (None, Some(f)) => {
                    let df = (values[f] - values[idx]) * s;
                    out[f] += 2.0 * c * df;
                    out[idx] -= 2.0 * c * df;
                }
                (None, None) => {}
            }
        }
    }
}

pub(crate) fn zero_dirichlet(grid: &GridDomain, grad: &mut [f64]) {
    for (idx, g) in grad.iter_mut().enumerate() {
        if grid.is_boundary_node(idx) {
            *g = 0.0;
        }
    }
}

/// Smoothed Alt-Caffarelli energy
/// `h^n sum_i w_i (Q_i + Phi_delta(v_i))` together with its exact discrete
/// gradient (per unit `h^n`), zeroed on Dirichlet nodes. At interior nodes
/// with unit weights the gradient is `-2 Lap_h v + Phi'_delta(v)`.
pub fn ac_energy_smoothed(
    v: &ScalarField,
    params: SmoothingParams,
    region: &RegionMask,
) -> Result<(f64, ScalarField)> {
    region.require_same_grid(v.grid(), "ac_energy_smoothed")?;
    let grid = *v.grid();
    let vals = v.values();
    let hn = grid.spacing().powi(grid.dim() as i32);
    let delta = params.delta();
    let mut energy = 0.0;
    let mut grad = vec![0.0; vals.len()];
    let mut coeff = vec![0.0; vals.len()];
    for idx in 0..vals.len() {
        let w = region.weight(idx);
        coeff[idx] = w;
        if w > 0.0 {
            energy += w * (node_q(vals, &grid, idx) + smooth_indicator(vals[idx], delta));
            grad[idx] += w * smooth_indicator_prime(vals[idx], delta);
        }
    }
    accumulate_q_partials(vals, &grid, &coeff, &mut grad);
    zero_dirichlet(&grid, &mut grad);
    Ok((energy * hn, ScalarField::from_values(&grid, grad)?))
}

/// Smoothed capillary energy
/// `h^n sum_i w_i (sqrt(1 + Q_i) - cos theta) Phi_delta(u_i)` with its exact
/// discrete gradient (per unit `h^n`), zeroed on Dirichlet nodes.
pub fn capillary_energy_smoothed(
    u: &ScalarField,
    theta: f64,
    params: SmoothingParams,
    region: &RegionMask,
) -> Result<(f64, ScalarField)> {
    require_theta(theta)?;
    region.require_same_grid(u.grid(), "capillary_energy_smoothed")?;
    require_nonnegative_on(u, region, "capillary_energy_smoothed")?;
    let grid = *u.grid();
    let vals = u.values();
    let hn = grid.spacing().powi(grid.dim() as i32);
    let delta = params.delta();
    let cos = cos_theta(theta);
    let mut energy = 0.0;
    let mut grad = vec![0.0; vals.len()];
    let mut coeff = vec![0.0; vals.len()];
    for idx in 0..vals.len() {
        let w = region.weight(idx);
        if w == 0.0 {
            continue;
        }
        let q = node_q(vals, &grid, idx);
        let root = (1.0 + q).sqrt();
        let phi = smooth_indicator(vals[idx], delta);
        energy += w * (root - cos) * phi;
        coeff[idx] = w * phi / (2.0 * root);
        grad[idx] += w * (root - cos) * smooth_indicator_prime(vals[idx], delta);
    }
    accumulate_q_partials(vals, &grid, &coeff, &mut grad);
    zero_dirichlet(&grid, &mut grad);
    Ok((energy * hn, ScalarField::from_values(&grid, grad)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_field::{make_grid, sample};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

    #[test]
    fn ac_energy_of_zero_field_vanishes() {
        let g = make_grid(2, 1.0, 32).unwrap();
        let v = sample(&g, |_| 0.0).unwrap();
        let region = RegionMask::ball(&g, [0.0, 0.0], 1.0);
        assert_eq!(ac_energy(&v, &region).unwrap(), 0.0);
    }

    #[test]
    fn ac_energy_of_halfplane_on_unit_disk() {
        let g = make_grid(2, 1.0, 256).unwrap();
        let v = sample(&g, |p| (-p[0]).max(0.0)).unwrap();
        let region = RegionMask::ball(&g, [0.0, 0.0], 1.0);
        let got = ac_energy(&v, &region).unwrap();
        assert!((got - PI).abs() < 0.01 * PI, "{got} vs {PI}");
    }

    #[test]
    fn ac_energy_of_constant_one() {
        let g = make_grid(2, 1.0, 256).unwrap();
        let v = sample(&g, |_| 1.0).unwrap();
        let region = RegionMask::ball(&g, [0.0, 0.0], 1.0);
        let got = ac_energy(&v, &region).unwrap();
        assert!((got - PI).abs() < 0.01 * PI, "{got} vs {PI}");
    }

    #[test]
    fn capillary_energy_halfplane_values() {
        let g = make_grid(2, 1.0, 256).unwrap();
        let region = RegionMask::ball(&g, [0.0, 0.0], 1.0);

        let zero = sample(&g, |_| 0.0).unwrap();
        assert_eq!(capillary_energy(&zero, FRAC_PI_3, &region).unwrap(), 0.0);

        // theta = pi/3: (sec - cos) * half-disk area = 1.5 * pi/2
        let t = FRAC_PI_3.tan();
        let u = sample(&g, |p| t * (-p[0]).max(0.0)).unwrap();
        let got = capillary_energy(&u, FRAC_PI_3, &region).unwrap();
        let target = 1.5 * PI / 2.0;
        assert!((got - target).abs() < 0.01 * target, "{got} vs {target}");

        // theta = pi/2: integrand sqrt(2), the cos term vanishes exactly
        let u = sample(&g, |p| (-p[0]).max(0.0)).unwrap();
        let got = capillary_energy(&u, FRAC_PI_2, &region).unwrap();
        let target = std::f64::consts::SQRT_2 * PI / 2.0;
        assert!((got - target).abs() < 0.01 * target, "{got} vs {target}");
    }

    #[test]
    fn capillary_energy_rejects_bad_inputs() {
        let g = make_grid(2, 1.0, 32).unwrap();
        let region = RegionMask::full(&g);
        let u = sample(&g, |p| -0.1 - p[0] * 0.0).unwrap();
        assert!(matches!(
            capillary_energy(&u, 0.3, &region),
            Err(Error::ConstraintViolation(_))
        ));
        let ok = sample(&g, |_| 0.5).unwrap();
        assert!(matches!(
            capillary_energy(&ok, 0.0, &region),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            capillary_energy(&ok, PI, &region),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn capillary_right_angle_equals_pure_area() {
        // cos term must vanish identically, not to within rounding
        let g = make_grid(2, 1.0, 64).unwrap();
        let region = RegionMask::ball(&g, [0.0, 0.0], 0.9);
        let u = sample(&g, |p| (0.2 - p[0]).max(0.0)).unwrap();
        let energy = capillary_energy(&u, FRAC_PI_2, &region).unwrap();
        let posfrac = RegionMask::positive_set(&u);
        let grad = positive_side_gradient(&u);
        let area = integrate_fn(&g, &region, |idx, _| {
            let gr = grad.at(idx);
            posfrac.weight(idx) * (1.0 + gr[0] * gr[0] + gr[1] * gr[1]).sqrt()
        });
        assert_eq!(energy, area);
    }

    #[test]
    fn smoothed_ac_equals_sharp_on_uniformly_positive_affine_field() {
        let g = make_grid(2, 1.0, 64).unwrap();
        let v = sample(&g, |p| p[0] + 3.0).unwrap(); // slope 1, v > 2 > delta
        let region = RegionMask::ball(&g, [0.0, 0.0], 0.8);
        let params = SmoothingParams::new(0.05, 1.0).unwrap();
        let (smoothed, _) = ac_energy_smoothed(&v, params, &region).unwrap();
        let sharp = ac_energy(&v, &region).unwrap();
        assert!(
            (smoothed - sharp).abs() < 1e-12,
            "{smoothed} vs {sharp}"
        );
    }

    #[test]
    fn smoothed_ac_zero_field() {
        let g = make_grid(2, 1.0, 32).unwrap();
        let v = sample(&g, |_| 0.0).unwrap();
        let params = SmoothingParams::new(0.05, 1.0).unwrap();
        let (e, dir) = ac_energy_smoothed(&v, params, &RegionMask::ones(&g)).unwrap();
        assert_eq!(e, 0.0);
        assert!(dir.values().iter().all(|&x| x == 0.0));
    }

    /// Deterministic pseudo-random interior node picker.
    fn lcg_nodes(grid: &GridDomain, count: usize, seed: u64) -> Vec<usize> {
        let mut state = seed;
        let mut nodes = Vec::new();
        while nodes.len() < count {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let idx = (state >> 33) as usize % grid.node_count();
            if !grid.is_boundary_node(idx) && !nodes.contains(&idx) {
                nodes.push(idx);
            }
        }
        nodes
    }

    fn finite_difference_check<E: Fn(&ScalarField) -> (f64, ScalarField)>(
        grid: &GridDomain,
        base: &ScalarField,
        eval: E,
    ) {
        let hn = grid.spacing().powi(grid.dim() as i32);
        let (_, dir) = eval(base);
        for &node in &lcg_nodes(grid, 5, 0x5eed) {
            let eps = 1e-6;
            let mut plus = base.values().to_vec();
            plus[node] += eps;
            let mut minus = base.values().to_vec();
            minus[node] -= eps;
            let ep = eval(&ScalarField::from_values(grid, plus).unwrap()).0;
            let em = eval(&ScalarField::from_values(grid, minus).unwrap()).0;
            let fd = (ep - em) / (2.0 * eps);
            let an = hn * dir.values()[node];
            let denom = fd.abs().max(an.abs()).max(1e-12);
            assert!(
                (fd - an).abs() / denom < 1e-5,
                "node {node}: finite difference {fd} vs analytic {an}"
            );
        }
    }

    #[test]
    fn ac_smoothed_gradient_matches_finite_differences() {
        let g = make_grid(2, 1.0, 128).unwrap();
        let params = SmoothingParams::new(0.05, 1.0).unwrap();
        let region = RegionMask::ones(&g);
        let v = sample(&g, |p| {
            (0.5 - (p[0] * p[0] + p[1] * p[1]).sqrt()).max(0.0) * 0.8 + 0.02
        })
        .unwrap();
        finite_difference_check(&g, &v, |f| ac_energy_smoothed(f, params, &region).unwrap());
    }

    #[test]
    fn capillary_smoothed_gradient_matches_finite_differences() {
        let g = make_grid(2, 1.0, 128).unwrap();
        let params = SmoothingParams::new(0.05, 1.0).unwrap();
        let region = RegionMask::ones(&g);
        let theta = 0.4;
        // keep u inside the active band of Phi so every partial is O(1)
        let u = sample(&g, |p| {
            0.4 * (0.3 - p[0]).max(0.0) + 0.03 + 0.01 * (3.0 * p[1]).sin()
        })
        .unwrap();
        finite_difference_check(&g, &u, |f| {
            capillary_energy_smoothed(f, theta, params, &region).unwrap()
        });
    }

    #[test]
    fn smoothed_energies_increase_toward_sharp_as_delta_shrinks() {
        let g = make_grid(2, 1.0, 128).unwrap();
        let v = sample(&g, |p| (0.5 - (p[0] * p[0] + p[1] * p[1]).sqrt()).max(0.0)).unwrap();
        let region = RegionMask::full(&g);
        let sharp = ac_energy(&v, &region).unwrap();
        let mut last = f64::NEG_INFINITY;
        for delta in [0.1, 0.05, 0.025] {
            let params = SmoothingParams::new(delta, 1.0).unwrap();
            let (e, _) = ac_energy_smoothed(&v, params, &region).unwrap();
            assert!(e >= last - 1e-12, "delta {delta}: {e} < {last}");
            // gap to the sharp energy is controlled by delta * perimeter
            let gap = sharp - e;
            assert!(
                gap.abs() < 2.0 * delta * PI + 0.05,
                "delta {delta}: gap {gap}"
            );
            last = e;
        }
    }

    #[test]
    fn expansion_gap_small_on_shallow_halfplane() {
        let g = make_grid(2, 1.0, 256).unwrap();
        let region = RegionMask::ball(&g, [0.0, 0.0], 1.0);
        let zero = sample(&g, |_| 0.0).unwrap();
        assert_eq!(expansion_gap(&zero, 0.1, &region).unwrap(), 0.0);

        let theta = 0.1;
        let u = sample(&g, |p| theta * (-p[0]).max(0.0)).unwrap();
        let gap = expansion_gap(&u, theta, &region).unwrap();
        assert!(gap <= 1.0, "normalized remainder {gap}");
        // analytic remainder: |sqrt(1+t^2) - cos t - t^2| * (pi/2) / t^3
        let analytic = ((1.0f64 + theta * theta).sqrt() - theta.cos() - theta * theta).abs()
            * (PI / 2.0)
            / theta.powi(3);
        assert!((gap - analytic).abs() < 0.1 * analytic + 1e-3, "{gap} vs {analytic}");
    }

    #[test]
    fn expansion_gap_stable_under_refinement() {
        let theta = 0.2;
        let mut gaps = Vec::new();
        for n in [128usize, 256] {
            let g = make_grid(2, 1.0, n).unwrap();
            let region = RegionMask::ball(&g, [0.0, 0.0], 1.0);
            let u = sample(&g, |p| theta * (-p[0]).max(0.0)).unwrap();
            gaps.push(expansion_gap(&u, theta, &region).unwrap());
        }
        let ratio = gaps[0] / gaps[1];
        assert!(ratio < 2.0 && ratio > 0.5, "gaps {gaps:?}");
    }

    #[test]
    fn expansion_gap_rejects_steep_fields() {
        let g = make_grid(2, 1.0, 64).unwrap();
        let region = RegionMask::ball(&g, [0.0, 0.0], 1.0);
        let theta = 0.05;
        let u = sample(&g, |p| (-p[0]).max(0.0)).unwrap(); // slope 1 = 20 theta
        assert!(matches!(
            expansion_gap(&u, theta, &region),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn smoothing_params_validation() {
        assert!(SmoothingParams::new(0.05, 1.0).is_ok());
        assert!(SmoothingParams::new(0.0, 1.0).is_err());
        assert!(SmoothingParams::new(0.2, 1.0).is_err());
        assert!(SmoothingParams::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn indicator_shape() {
        let d = 0.1;
        assert_eq!(smooth_indicator(-0.5, d), 0.0);
        assert_eq!(smooth_indicator(0.0, d), 0.0);
        assert_eq!(smooth_indicator(0.1, d), 1.0);
        assert_eq!(smooth_indicator(0.5, d), 1.0);
        assert!((smooth_indicator(0.05, d) - 0.5).abs() < 1e-12);
        assert_eq!(smooth_indicator_prime(0.0, d), 0.0);
        assert_eq!(smooth_indicator_prime(0.1, d), 0.0);
        assert!(smooth_indicator_prime(0.05, d) > 0.0);
    }
}
