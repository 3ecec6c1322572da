use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A point of the base plane. For `dim == 1` the second coordinate is 0.
pub type Point = [f64; 2];

/// Uniform node-centered grid on the cube `[-L, L]^n`.
///
/// Nodes sit at coordinates `-L + i * h` per axis with `h = 2L / N`, so there
/// are `N + 1` nodes per axis and `(N + 1)^n` nodes total. Storage order is
/// row-major with the first axis outermost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    dim: usize,
    half_width: f64,
    nodes_per_axis: usize,
}

/// Builds a grid, validating dimension, extent and resolution.
pub fn make_grid(dim: usize, half_width: f64, nodes_per_axis: usize) -> Result<GridDomain> {
    GridDomain::new(dim, half_width, nodes_per_axis)
}

impl GridDomain {
    pub fn new(dim: usize, half_width: f64, nodes_per_axis: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if !half_width.is_finite() || half_width <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "half_width must be positive and finite, got {half_width}"
            )));
        }
        if nodes_per_axis < 8 {
            return Err(Error::InvalidParameter(format!(
                "nodes_per_axis must be at least 8, got {nodes_per_axis}"
            )));
        }
        Ok(GridDomain {
            dim,
            half_width,
            nodes_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Number of cells per axis (N); nodes per axis is N + 1.
    pub fn nodes_per_axis(&self) -> usize {
        self.nodes_per_axis
    }

    /// Grid spacing h = 2L / N.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.nodes_per_axis as f64
    }

    /// Nodes along one axis (N + 1).
    pub fn side(&self) -> usize {
        self.nodes_per_axis + 1
    }

    pub fn node_count(&self) -> usize {
        match self.dim {
            1 => self.side(),
            _ => self.side() * self.side(),
        }
    }

    /// Coordinate of the i-th node along an axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Splits a flat node index into per-axis indices (second is 0 in 1D).
    pub fn unravel(&self, idx: usize) -> (usize, usize) {
        match self.dim {
            1 => (idx, 0),
            _ => (idx / self.side(), idx % self.side()),
        }
    }

    pub fn flat(&self, ix: usize, iy: usize) -> usize {
        match self.dim {
            1 => ix,
            _ => ix * self.side() + iy,
        }
    }

    pub fn node_point(&self, idx: usize) -> Point {
        let (ix, iy) = self.unravel(idx);
        match self.dim {
            1 => [self.coord(ix), 0.0],
            _ => [self.coord(ix), self.coord(iy)],
        }
    }

    /// True if the point lies in the closed cube (second coordinate ignored in 1D).
    pub fn contains(&self, p: Point) -> bool {
        let l = self.half_width;
        let in_x = p[0] >= -l && p[0] <= l;
        match self.dim {
            1 => in_x,
            _ => in_x && p[1] >= -l && p[1] <= l,
        }
    }

    /// True for nodes on the cube boundary (the Dirichlet set of the solvers).
    pub fn is_boundary_node(&self, idx: usize) -> bool {
        let (ix, iy) = self.unravel(idx);
        let last = self.nodes_per_axis;
        match self.dim {
            1 => ix == 0 || ix == last,
            _ => ix == 0 || ix == last || iy == 0 || iy == last,
        }
    }

    /// Flat indices of the (backward, forward) neighbours of a node along an
    /// axis; `None` past the cube face.
    pub fn axis_neighbors(&self, idx: usize, axis: usize) -> (Option<usize>, Option<usize>) {
        let (ix, iy) = self.unravel(idx);
        let (pos, stride) = match (self.dim, axis) {
            (1, _) => (ix, 1),
            (_, 0) => (ix, self.side()),
            _ => (iy, 1),
        };
        let back = (pos > 0).then(|| idx - stride);
        let fwd = (pos < self.nodes_per_axis).then(|| idx + stride);
        (back, fwd)
    }

    /// Checks that the Euclidean ball `B_r(x)` stays inside the cube.
    pub fn require_ball_inside(&self, x: Point, r: f64) -> Result<()> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "radius must be positive and finite, got {r}"
            )));
        }
        let l = self.half_width;
        let eps = 1e-12 * l.max(1.0);
        for a in 0..self.dim {
            if x[a].abs() + r > l + eps {
                return Err(Error::Domain(format!(
                    "ball of radius {r} centered at ({}, {}) exits the cube [-{l}, {l}]^{}",
                    x[0], x[1], self.dim
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing_and_coords() {
        let g = make_grid(2, 1.0, 256).unwrap();
        assert_eq!(g.spacing(), 2.0 / 256.0);
        assert_eq!(g.node_count(), 257 * 257);
        assert_eq!(g.coord(0), -1.0);
        assert_eq!(g.coord(256), 1.0);
        // node 128 is the exact center
        assert_eq!(g.coord(128), 0.0);
    }

    #[test]
    fn grid_1d() {
        let g = make_grid(1, 2.0, 8).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.node_count(), 9);
        assert_eq!(g.node_point(4), [0.0, 0.0]);
        assert!(g.is_boundary_node(0));
        assert!(g.is_boundary_node(8));
        assert!(!g.is_boundary_node(3));
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(matches!(
            make_grid(3, 1.0, 64),
            Err(Error::UnsupportedDimension(3))
        ));
        assert!(make_grid(2, 0.0, 64).is_err());
        assert!(make_grid(2, 1.0, 7).is_err());
        assert!(make_grid(2, f64::NAN, 64).is_err());
    }

    #[test]
    fn ball_inside_check() {
        let g = make_grid(2, 1.0, 64).unwrap();
        assert!(g.require_ball_inside([0.0, 0.0], 1.0).is_ok());
        assert!(g.require_ball_inside([0.2, 0.0], 0.9).is_err());
        assert!(g.require_ball_inside([0.0, 0.0], -0.1).is_err());
    }

    #[test]
    fn flat_and_unravel_roundtrip() {
        let g = make_grid(2, 1.0, 16).unwrap();
        for idx in 0..g.node_count() {
            let (ix, iy) = g.unravel(idx);
            assert_eq!(g.flat(ix, iy), idx);
        }
    }

    #[test]
    fn axis_neighbors_respect_faces() {
        let g = make_grid(2, 1.0, 16).unwrap();
        let mid = g.flat(8, 8);
        assert_eq!(g.axis_neighbors(mid, 0), (Some(g.flat(7, 8)), Some(g.flat(9, 8))));
        assert_eq!(g.axis_neighbors(mid, 1), (Some(g.flat(8, 7)), Some(g.flat(8, 9))));
        let corner = g.flat(0, 0);
        assert_eq!(g.axis_neighbors(corner, 0), (None, Some(g.flat(1, 0))));
        assert_eq!(g.axis_neighbors(corner, 1), (None, Some(g.flat(0, 1))));
        let g1 = make_grid(1, 1.0, 8).unwrap();
        assert_eq!(g1.axis_neighbors(8, 0), (Some(7), None));
    }
}
