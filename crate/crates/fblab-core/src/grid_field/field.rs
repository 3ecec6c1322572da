use super::domain::{GridDomain, Point};
use crate::error::{Error, Result};

/// Real-valued node field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridDomain,
    values: Vec<f64>,
}

/// Samples a closure at every node. Non-finite values are rejected with the
/// offending node named in the error.
pub fn sample<F: Fn(Point) -> f64>(grid: &GridDomain, f: F) -> Result<ScalarField> {
    let mut values = Vec::with_capacity(grid.node_count());
    for idx in 0..grid.node_count() {
        let p = grid.node_point(idx);
        let v = f(p);
        if !v.is_finite() {
            return Err(Error::NonFiniteSample {
                node: idx,
                y0: p[0],
                y1: p[1],
                value: v,
            });
        }
        values.push(v);
    }
    Ok(ScalarField { grid: *grid, values })
}

impl ScalarField {
    pub fn zeros(grid: &GridDomain) -> Self {
        ScalarField {
            grid: *grid,
            values: vec![0.0; grid.node_count()],
        }
    }

    pub fn from_values(grid: &GridDomain, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::GridMismatch(format!(
                "expected {} values for the grid, got {}",
                grid.node_count(),
                values.len()
            )));
        }
        Ok(ScalarField { grid: *grid, values })
    }

    pub fn grid(&self) -> &GridDomain {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.grid.flat(ix, iy)]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Multilinear interpolation at a point of the closed cube.
    ///
    /// The point is clamped to the cube by at most 1e-12 * L to absorb
    /// roundoff at the boundary; genuinely outside points are a caller bug
    /// and panic in debug builds.
    pub fn interp(&self, p: Point) -> f64 {
        let g = &self.grid;
        let l = g.half_width();
        let h = g.spacing();
        let n = g.nodes_per_axis();
        debug_assert!(
            p[0] >= -l - 1e-9 * l && p[0] <= l + 1e-9 * l,
            "interp outside cube: {p:?}"
        );
        let locate = |c: f64| -> (usize, f64) {
            let t = ((c + l) / h).clamp(0.0, n as f64);
            let mut i = t.floor() as usize;
            if i >= n {
                i = n - 1;
            }
            (i, t - i as f64)
        };
        let (ix, tx) = locate(p[0]);
        match g.dim() {
            1 => {
                let a = self.values[ix];
                let b = self.values[ix + 1];
                a + tx * (b - a)
            }
            _ => {
                debug_assert!(p[1] >= -l - 1e-9 * l && p[1] <= l + 1e-9 * l);
                let (iy, ty) = locate(p[1]);
                let f00 = self.get(ix, iy);
                let f01 = self.get(ix, iy + 1);
                let f10 = self.get(ix + 1, iy);
                let f11 = self.get(ix + 1, iy + 1);
                let a = f00 + tx * (f10 - f00);
                let b = f01 + tx * (f11 - f01);
                a + ty * (b - a)
            }
        }
    }

    pub fn require_same_grid(&self, other: &GridDomain, what: &str) -> Result<()> {
        if self.grid != *other {
            return Err(Error::GridMismatch(format!(
                "{what}: fields live on different grids"
            )));
        }
        Ok(())
    }
}

/// Vector-valued node field; the second component is 0 in 1D.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: GridDomain,
    comps: Vec<[f64; 2]>,
}

impl VectorField {
    pub fn zeros(grid: &GridDomain) -> Self {
        VectorField {
            grid: *grid,
            comps: vec![[0.0; 2]; grid.node_count()],
        }
    }

    pub fn grid(&self) -> &GridDomain {
        &self.grid
    }

    pub fn at(&self, idx: usize) -> [f64; 2] {
        self.comps[idx]
    }

    pub fn set(&mut self, idx: usize, v: [f64; 2]) {
        self.comps[idx] = v;
    }

    pub fn norm_at(&self, idx: usize) -> f64 {
        let v = self.comps[idx];
        (v[0] * v[0] + v[1] * v[1]).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        (0..self.comps.len())
            .map(|i| self.norm_at(i))
            .fold(0.0, f64::max)
    }
}

/// Symmetric-matrix-valued node field (second fundamental form ingredients).
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixField {
    grid: GridDomain,
    entries: Vec<[[f64; 2]; 2]>,
}

impl MatrixField {
    pub fn zeros(grid: &GridDomain) -> Self {
        MatrixField {
            grid: *grid,
            entries: vec![[[0.0; 2]; 2]; grid.node_count()],
        }
    }

    pub fn grid(&self) -> &GridDomain {
        &self.grid
    }

    pub fn at(&self, idx: usize) -> [[f64; 2]; 2] {
        self.entries[idx]
    }

    pub fn set(&mut self, idx: usize, m: [[f64; 2]; 2]) {
        self.entries[idx] = m;
    }
}

#[cfg(test)]
mod tests {
    use super::super::domain::make_grid;
    use super::*;

    #[test]
    fn sample_affine() {
        let g = make_grid(2, 1.0, 16).unwrap();
        let f = sample(&g, |p| 2.0 * p[0] - p[1] + 0.5).unwrap();
        assert_eq!(f.get(0, 0), 2.0 * -1.0 - -1.0 + 0.5);
        assert_eq!(f.get(16, 8), 2.0 * 1.0 - 0.0 + 0.5);
    }

    #[test]
    fn sample_rejects_non_finite() {
        let g = make_grid(1, 1.0, 8).unwrap();
        let err = sample(&g, |p| 1.0 / p[0]).unwrap_err();
        match err {
            Error::NonFiniteSample { node, y0, .. } => {
                assert_eq!(node, 4);
                assert_eq!(y0, 0.0);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn interp_reproduces_bilinear() {
        let g = make_grid(2, 1.0, 32).unwrap();
        let f = sample(&g, |p| 1.0 + 0.3 * p[0] - 0.7 * p[1] + 0.25 * p[0] * p[1]).unwrap();
        let probe = [0.137, -0.611];
        let expect = 1.0 + 0.3 * probe[0] - 0.7 * probe[1] + 0.25 * probe[0] * probe[1];
        assert!((f.interp(probe) - expect).abs() < 1e-14);
        // exact at nodes and at the cube corner
        assert_eq!(f.interp([1.0, 1.0]), f.get(32, 32));
    }

    #[test]
    fn interp_linear_1d() {
        let g = make_grid(1, 1.0, 8).unwrap();
        let f = sample(&g, |p| 3.0 * p[0]).unwrap();
        assert!((f.interp([0.1, 0.0]) - 0.3).abs() < 1e-15);
    }
}
