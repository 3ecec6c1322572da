use super::domain::{GridDomain, Point};
use super::field::ScalarField;
use super::mask::RegionMask;
use crate::error::{Error, Result};

/// Bulk integral of a nodal field against a region mask:
/// `sum_i f_i w_i h^n`.
pub fn integrate(f: &ScalarField, mask: &RegionMask) -> Result<f64> {
    mask.require_same_grid(f.grid(), "integrate")?;
    Ok(integrate_fn(f.grid(), mask, |idx, _| f.values()[idx]))
}

/// Bulk integral of a fused integrand `g(node_index, node_point)` against a
/// region mask. Cells with zero weight are skipped, so `g` may be expensive.
pub fn integrate_fn<F: Fn(usize, Point) -> f64>(
    grid: &GridDomain,
    mask: &RegionMask,
    g: F,
) -> f64 {
    debug_assert_eq!(mask.grid(), grid);
    let hn = grid.spacing().powi(grid.dim() as i32);
    let mut acc = 0.0;
    for (idx, &w) in mask.weights().iter().enumerate() {
        if w > 0.0 {
            acc += w * g(idx, grid.node_point(idx));
        }
    }
    acc * hn
}

fn require_sphere(grid: &GridDomain, x: Point, r: f64) -> Result<()> {
    grid.require_ball_inside(x, r)?;
    if r < 4.0 * grid.spacing() {
        return Err(Error::Resolution(format!(
            "sphere radius {r} is below 4h = {}; refine the grid",
            4.0 * grid.spacing()
        )));
    }
    Ok(())
}

/// Integral of a sampler over the sphere `|y - x| = r`.
///
/// In dimension two the circle is sampled at `ceil(2 pi r / h)` equispaced
/// angles and integrated by the periodic trapezoid rule; in dimension one the
/// sphere is the two-point set `{x - r, x + r}` with counting measure.
pub fn sphere_integral_fn<F: Fn(Point) -> f64>(
    grid: &GridDomain,
    x: Point,
    r: f64,
    sampler: F,
) -> Result<f64> {
    require_sphere(grid, x, r)?;
    match grid.dim() {
        1 => Ok(sampler([x[0] - r, 0.0]) + sampler([x[0] + r, 0.0])),
        _ => {
            let m = (std::f64::consts::TAU * r / grid.spacing()).ceil() as usize;
            let mut acc = 0.0;
            for k in 0..m {
                let phi = std::f64::consts::TAU * (k as f64) / (m as f64);
                acc += sampler([x[0] + r * phi.cos(), x[1] + r * phi.sin()]);
            }
            Ok(acc * std::f64::consts::TAU * r / (m as f64))
        }
    }
}

/// Integral of the multilinear interpolant of `f` over the sphere
/// `|y - x| = r`. See [`sphere_integral_fn`] for the quadrature rule.
pub fn sphere_integral(f: &ScalarField, x: Point, r: f64) -> Result<f64> {
    sphere_integral_fn(f.grid(), x, r, |p| f.interp(p))
}
