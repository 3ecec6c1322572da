use super::domain::{GridDomain, Point};
use super::field::ScalarField;
use crate::error::{Error, Result};

/// Per-node quadrature weights in `[0, 1]` obtained by sub-sampling each node
/// cell (the cube of side `h` centered at the node) on a `4^n` sub-grid.
///
/// A weight is the fraction of sub-sample points that belong to the region.
/// Sub-sample points falling outside the closed grid cube never belong, so
/// cells clipped by the cube edge carry fractional weights and
/// `RegionMask::full` integrates the cube to exactly `(2L)^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    grid: GridDomain,
    weights: Vec<f64>,
}

/// Sub-cell offsets along one axis, in units of `h`.
const SUB_OFFSETS: [f64; 4] = [-0.375, -0.125, 0.125, 0.375];

impl RegionMask {
    /// Builds a mask from a pointwise membership test, evaluated at the
    /// sub-sample points of every node cell.
    pub fn from_subcell_test<F: Fn(Point) -> bool>(grid: &GridDomain, test: F) -> Self {
        let h = grid.spacing();
        let mut weights = Vec::with_capacity(grid.node_count());
        match grid.dim() {
            1 => {
                for idx in 0..grid.node_count() {
                    let p = grid.node_point(idx);
                    let mut hits = 0u32;
                    for ox in SUB_OFFSETS {
                        let q = [p[0] + ox * h, 0.0];
                        if grid.contains(q) && test(q) {
                            hits += 1;
                        }
                    }
                    weights.push(f64::from(hits) / 4.0);
                }
            }
            _ => {
                for idx in 0..grid.node_count() {
                    let p = grid.node_point(idx);
                    let mut hits = 0u32;
                    for ox in SUB_OFFSETS {
                        for oy in SUB_OFFSETS {
                            let q = [p[0] + ox * h, p[1] + oy * h];
                            if grid.contains(q) && test(q) {
                                hits += 1;
                            }
                        }
                    }
                    weights.push(f64::from(hits) / 16.0);
                }
            }
        }
        RegionMask {
            grid: *grid,
            weights,
        }
    }

    /// The whole cube, with properly clipped boundary cells.
    pub fn full(grid: &GridDomain) -> Self {
        Self::from_subcell_test(grid, |_| true)
    }

    /// Uniform weight 1 at every node, face cells included. Unlike
    /// [`RegionMask::full`] this does not clip the cube edge; it is the
    /// algebraic weighting used by the solver surrogates, where face nodes
    /// are Dirichlet-pinned anyway.
    pub fn ones(grid: &GridDomain) -> Self {
        RegionMask {
            grid: *grid,
            weights: vec![1.0; grid.node_count()],
        }
    }

    /// Euclidean ball `B_r(x)` intersected with the base plane.
    pub fn ball(grid: &GridDomain, x: Point, r: f64) -> Self {
        Self::from_subcell_test(grid, |p| {
            let dx = p[0] - x[0];
            let dy = p[1] - x[1];
            dx * dx + dy * dy < r * r
        })
    }

    /// The open positivity set `{f > 0}`, resolved below node scale by
    /// multilinear interpolation of `f`.
    pub fn positive_set(f: &ScalarField) -> Self {
        Self::from_subcell_test(f.grid(), |p| f.interp(p) > 0.0)
    }

    pub fn grid(&self) -> &GridDomain {
        &self.grid
    }

    pub fn weight(&self, idx: usize) -> f64 {
        self.weights[idx]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Total measure `sum(w) * h^n`.
    pub fn measure(&self) -> f64 {
        let hn = self.grid.spacing().powi(self.grid.dim() as i32);
        self.weights.iter().sum::<f64>() * hn
    }

    pub fn is_empty(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0)
    }

    /// Membership test for scattered points: the weight of the cell
    /// containing the point must be at least 1/2.
    pub fn covers(&self, p: Point) -> bool {
        if !self.grid.contains(p) {
            return false;
        }
        let h = self.grid.spacing();
        let l = self.grid.half_width();
        let n = self.grid.nodes_per_axis();
        let nearest = |c: f64| -> usize { (((c + l) / h).round() as usize).min(n) };
        let ix = nearest(p[0]);
        let idx = match self.grid.dim() {
            1 => ix,
            _ => self.grid.flat(ix, nearest(p[1])),
        };
        self.weights[idx] >= 0.5
    }

    pub fn require_same_grid(&self, other: &GridDomain, what: &str) -> Result<()> {
        if self.grid != *other {
            return Err(Error::GridMismatch(format!(
                "{what}: mask and field live on different grids"
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::domain::make_grid;
    use super::super::field::sample;
    use super::*;

    #[test]
    fn full_mask_measures_the_cube() {
        let g = make_grid(2, 1.0, 64).unwrap();
        let m = RegionMask::full(&g);
        assert!((m.measure() - 4.0).abs() < 1e-12);
        // interior weight 1, edge weight 1/2, corner weight 1/4
        assert_eq!(m.weight(g.flat(32, 32)), 1.0);
        assert_eq!(m.weight(g.flat(0, 32)), 0.5);
        assert_eq!(m.weight(g.flat(0, 0)), 0.25);
    }

    #[test]
    fn ball_mask_area() {
        let g = make_grid(2, 1.0, 256).unwrap();
        let m = RegionMask::ball(&g, [0.0, 0.0], 0.8);
        let exact = std::f64::consts::PI * 0.64;
        assert!(
            (m.measure() - exact).abs() < 0.01 * exact,
            "disk area {} vs {}",
            m.measure(),
            exact
        );
    }

    #[test]
    fn half_plane_on_node_line_gets_half_weights() {
        let g = make_grid(2, 1.0, 32).unwrap();
        let f = sample(&g, |p| -p[0]).unwrap();
        let m = RegionMask::positive_set(&f);
        // the zero line sits exactly on nodes: their cells are half inside
        assert_eq!(m.weight(g.flat(16, 10)), 0.5);
        assert_eq!(m.weight(g.flat(15, 10)), 1.0);
        assert_eq!(m.weight(g.flat(17, 10)), 0.0);
    }

    #[test]
    fn empty_mask() {
        let g = make_grid(1, 1.0, 16).unwrap();
        let m = RegionMask::from_subcell_test(&g, |_| false);
        assert!(m.is_empty());
        assert_eq!(m.measure(), 0.0);
    }

    #[test]
    fn covers_uses_cell_weights() {
        let g = make_grid(2, 1.0, 64).unwrap();
        let m = RegionMask::ball(&g, [0.0, 0.0], 0.5);
        assert!(m.covers([0.0, 0.0]));
        assert!(m.covers([0.3, 0.3]));
        assert!(!m.covers([0.9, 0.0]));
        assert!(!m.covers([2.0, 0.0]));
    }
}
