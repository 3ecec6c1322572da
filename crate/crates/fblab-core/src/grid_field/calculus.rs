use super::domain::GridDomain;
use super::field::{MatrixField, ScalarField, VectorField};

/// Index bookkeeping for walking a node chain along one axis.
struct AxisWalk {
    stride: usize,
    pos: usize,
    last: usize,
}

fn axis_walk(grid: &GridDomain, idx: usize, axis: usize) -> AxisWalk {
    let (ix, iy) = grid.unravel(idx);
    match (grid.dim(), axis) {
        (1, _) => AxisWalk {
            stride: 1,
            pos: ix,
            last: grid.nodes_per_axis(),
        },
        (_, 0) => AxisWalk {
            stride: grid.side(),
            pos: ix,
            last: grid.nodes_per_axis(),
        },
        _ => AxisWalk {
            stride: 1,
            pos: iy,
            last: grid.nodes_per_axis(),
        },
    }
}

/// First derivative along `axis`: central differences at interior nodes,
/// one-sided second-order stencils on the cube faces.
fn axis_derivative(values: &[f64], grid: &GridDomain, axis: usize) -> Vec<f64> {
    let h = grid.spacing();
    let mut out = Vec::with_capacity(values.len());
    for idx in 0..values.len() {
        let w = axis_walk(grid, idx, axis);
        let s = w.stride;
        let d = if w.pos == 0 {
            (-3.0 * values[idx] + 4.0 * values[idx + s] - values[idx + 2 * s]) / (2.0 * h)
        } else if w.pos == w.last {
            (3.0 * values[idx] - 4.0 * values[idx - s] + values[idx - 2 * s]) / (2.0 * h)
        } else {
            (values[idx + s] - values[idx - s]) / (2.0 * h)
        };
        out.push(d);
    }
    out
}

/// Second derivative along `axis`: three-point second differences at interior
/// nodes, one-sided four-point stencils on the cube faces (both exact for
/// quadratics).
fn axis_second_derivative(values: &[f64], grid: &GridDomain, axis: usize) -> Vec<f64> {
    let h2 = grid.spacing() * grid.spacing();
    let mut out = Vec::with_capacity(values.len());
    for idx in 0..values.len() {
        let w = axis_walk(grid, idx, axis);
        let s = w.stride;
        let d = if w.pos == 0 {
            (2.0 * values[idx] - 5.0 * values[idx + s] + 4.0 * values[idx + 2 * s]
                - values[idx + 3 * s])
                / h2
        } else if w.pos == w.last {
            (2.0 * values[idx] - 5.0 * values[idx - s] + 4.0 * values[idx - 2 * s]
                - values[idx - 3 * s])
                / h2
        } else {
            (values[idx + s] - 2.0 * values[idx] + values[idx - s]) / h2
        };
        out.push(d);
    }
    out
}

/// Finite-difference gradient, second-order accurate up to the cube faces.
pub fn gradient(f: &ScalarField) -> VectorField {
    let grid = *f.grid();
    let mut out = VectorField::zeros(&grid);
    let dx = axis_derivative(f.values(), &grid, 0);
    if grid.dim() == 1 {
        for (idx, &d) in dx.iter().enumerate() {
            out.set(idx, [d, 0.0]);
        }
    } else {
        let dy = axis_derivative(f.values(), &grid, 1);
        for idx in 0..dx.len() {
            out.set(idx, [dx[idx], dy[idx]]);
        }
    }
    out
}

/// Finite-difference Hessian. Diagonal entries use direct second differences;
/// the mixed entry is the symmetrized derivative of the gradient components,
/// so the matrix is symmetric by construction and exact for quadratics.
pub fn hessian(f: &ScalarField) -> MatrixField {
    let grid = *f.grid();
    let mut out = MatrixField::zeros(&grid);
    let fxx = axis_second_derivative(f.values(), &grid, 0);
    if grid.dim() == 1 {
        for (idx, &d) in fxx.iter().enumerate() {
            out.set(idx, [[d, 0.0], [0.0, 0.0]]);
        }
        return out;
    }
    let fyy = axis_second_derivative(f.values(), &grid, 1);
    let gx = axis_derivative(f.values(), &grid, 0);
    let gy = axis_derivative(f.values(), &grid, 1);
    let gxy = axis_derivative(&gx, &grid, 1);
    let gyx = axis_derivative(&gy, &grid, 0);
    for idx in 0..fxx.len() {
        let mixed = 0.5 * (gxy[idx] + gyx[idx]);
        out.set(idx, [[fxx[idx], mixed], [mixed, fyy[idx]]]);
    }
    out
}

/// Derivative along `axis` that only trusts nodes where `f > 0`, so the kink
/// of a profile like `(a . y - b)_+` never pollutes the estimate taken from
/// its positive side.
///
/// At a positive node the stencil is central when both neighbours are
/// positive, otherwise one-sided into the positive run (second order when two
/// positive nodes are available). At a nonpositive node the slope of the
/// adjacent positive run is extrapolated; a node with no positive neighbours
/// along the axis reports zero.
fn axis_positive_derivative(values: &[f64], grid: &GridDomain, axis: usize) -> Vec<f64> {
    let h = grid.spacing();
    let mut out = Vec::with_capacity(values.len());
    for idx in 0..values.len() {
        let w = axis_walk(grid, idx, axis);
        let s = w.stride;
        let at = |off: isize| -> Option<f64> {
            let pos = w.pos as isize + off;
            if pos < 0 || pos > w.last as isize {
                return None;
            }
            Some(values[(idx as isize + off * s as isize) as usize])
        };
        let positive = |v: Option<f64>| v.is_some_and(|v| v > 0.0);
        let f0 = values[idx];
        let fwd1 = at(1);
        let fwd2 = at(2);
        let bwd1 = at(-1);
        let bwd2 = at(-2);
        let d = if f0 > 0.0 {
            match (positive(fwd1), positive(bwd1)) {
                (true, true) => (fwd1.unwrap() - bwd1.unwrap()) / (2.0 * h),
                (true, false) => {
                    if positive(fwd2) {
                        (-3.0 * f0 + 4.0 * fwd1.unwrap() - fwd2.unwrap()) / (2.0 * h)
                    } else {
                        (fwd1.unwrap() - f0) / h
                    }
                }
                (false, true) => {
                    if positive(bwd2) {
                        (3.0 * f0 - 4.0 * bwd1.unwrap() + bwd2.unwrap()) / (2.0 * h)
                    } else {
                        (f0 - bwd1.unwrap()) / h
                    }
                }
                (false, false) => 0.0,
            }
        } else if positive(fwd1) {
            if positive(fwd2) {
                (fwd2.unwrap() - fwd1.unwrap()) / h
            } else {
                (fwd1.unwrap() - f0) / h
            }
        } else if positive(bwd1) {
            if positive(bwd2) {
                (bwd1.unwrap() - bwd2.unwrap()) / h
            } else {
                (f0 - bwd1.unwrap()) / h
            }
        } else {
            0.0
        };
        out.push(d);
    }
    out
}

/// Gradient estimated from the positivity set of `f` only (see
/// [`axis_positive_derivative`] for the per-axis rules). Exact for profiles
/// that are affine on `{f > 0}` and vanish elsewhere.
pub fn positive_side_gradient(f: &ScalarField) -> VectorField {
    let grid = *f.grid();
    let mut out = VectorField::zeros(&grid);
    let dx = axis_positive_derivative(f.values(), &grid, 0);
    if grid.dim() == 1 {
        for (idx, &d) in dx.iter().enumerate() {
            out.set(idx, [d, 0.0]);
        }
    } else {
        let dy = axis_positive_derivative(f.values(), &grid, 1);
        for idx in 0..dx.len() {
            out.set(idx, [dx[idx], dy[idx]]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::domain::make_grid;
    use super::super::field::{sample, ScalarField};
    use super::*;

    #[test]
    fn gradient_exact_for_quadratics_everywhere() {
        let g = make_grid(2, 1.0, 16).unwrap();
        let f = sample(&g, |p| 0.5 * p[0] * p[0] - p[0] * p[1] + 2.0 * p[1]).unwrap();
        let grad = gradient(&f);
        for idx in 0..g.node_count() {
            let p = g.node_point(idx);
            let exact = [p[0] - p[1], -p[0] + 2.0];
            let got = grad.at(idx);
            assert!(
                (got[0] - exact[0]).abs() < 1e-10 && (got[1] - exact[1]).abs() < 1e-10,
                "node {idx}: {got:?} vs {exact:?}"
            );
        }
    }

    #[test]
    fn hessian_exact_for_quadratics_everywhere() {
        let g = make_grid(2, 1.0, 16).unwrap();
        let f = sample(&g, |p| {
            1.5 * p[0] * p[0] + 0.7 * p[0] * p[1] - 0.4 * p[1] * p[1]
        })
        .unwrap();
        let hess = hessian(&f);
        for idx in 0..g.node_count() {
            let m = hess.at(idx);
            assert!((m[0][0] - 3.0).abs() < 1e-9, "xx at {idx}: {}", m[0][0]);
            assert!((m[0][1] - 0.7).abs() < 1e-9, "xy at {idx}: {}", m[0][1]);
            assert!((m[1][0] - 0.7).abs() < 1e-9, "yx at {idx}: {}", m[1][0]);
            assert!((m[1][1] + 0.8).abs() < 1e-9, "yy at {idx}: {}", m[1][1]);
        }
    }

    #[test]
    fn gradient_one_dimensional() {
        let g = make_grid(1, 2.0, 32).unwrap();
        let f = sample(&g, |p| p[0] * p[0]).unwrap();
        let grad = gradient(&f);
        for idx in 0..g.node_count() {
            let p = g.node_point(idx);
            let got = grad.at(idx);
            assert!((got[0] - 2.0 * p[0]).abs() < 1e-10);
            assert_eq!(got[1], 0.0);
        }
    }

    #[test]
    fn positive_side_gradient_exact_on_truncated_plane() {
        // u = m * (0.3 - x)_+ : slope -m on the positive side, kink off-node.
        let g = make_grid(2, 1.0, 64).unwrap();
        let m = 0.75;
        let f = sample(&g, |p| m * (0.3 - p[0]).max(0.0)).unwrap();
        let grad = positive_side_gradient(&f);
        for idx in 0..g.node_count() {
            let p = g.node_point(idx);
            let got = grad.at(idx);
            // every cell overlapping the positivity set must see the true slope
            if p[0] < 0.3 + 0.5 * g.spacing() {
                assert!(
                    (got[0] + m).abs() < 1e-10,
                    "at x={}: {} vs {}",
                    p[0],
                    got[0],
                    -m
                );
                assert!(got[1].abs() < 1e-10);
            }
        }
    }

    #[test]
    fn positive_side_gradient_tilted_plane() {
        let g = make_grid(2, 1.0, 64).unwrap();
        let n = [0.6, -0.8];
        let f = sample(&g, |p| (p[0] * n[0] + p[1] * n[1] - 0.13).max(0.0)).unwrap();
        let grad = positive_side_gradient(&f);
        for idx in 0..g.node_count() {
            if f.values()[idx] > 0.0 {
                let got = grad.at(idx);
                assert!(
                    (got[0] - n[0]).abs() < 1e-9 && (got[1] - n[1]).abs() < 1e-9,
                    "node {idx}: {got:?}"
                );
            }
        }
    }

    #[test]
    fn isolated_positive_node_reports_zero_slope() {
        let g = make_grid(1, 1.0, 8).unwrap();
        let mut vals = vec![-1.0; g.node_count()];
        vals[4] = 1.0;
        let f = ScalarField::from_values(&g, vals).unwrap();
        let grad = positive_side_gradient(&f);
        assert_eq!(grad.at(4)[0], 0.0);
    }
}
