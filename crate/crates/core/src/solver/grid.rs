use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tensor grid on [0, r_rho] x [0, r_xn] with nodes
/// x_i = R sinh(grading * i / n) / sinh(grading); grading = 0 is uniform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub r_rho: f64,
    pub r_xn: f64,
    pub n_rho: usize,
    pub n_xn: usize,
    pub grading: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            r_rho: 8.0,
            r_xn: 8.0,
            n_rho: 160,
            n_xn: 160,
            grading: 6.5,
        }
    }
}

impl Grid {
    pub const MIN_CELLS: usize = 32;

    pub fn new(r_rho: f64, r_xn: f64, n_rho: usize, n_xn: usize, grading: f64) -> Result<Self> {
        let g = Self {
            r_rho,
            r_xn,
            n_rho,
            n_xn,
            grading,
        };
        g.validate()?;
        Ok(g)
    }

    /// Square grid with `n` cells per direction, otherwise default.
    pub fn with_cells(n: usize) -> Result<Self> {
        Self::new(8.0, 8.0, n, n, 6.5)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rho < Self::MIN_CELLS || self.n_xn < Self::MIN_CELLS {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {} cells per direction, got {} x {}",
                Self::MIN_CELLS,
                self.n_rho,
                self.n_xn
            )));
        }
        if !(self.r_rho > 0.0 && self.r_rho.is_finite() && self.r_xn > 0.0 && self.r_xn.is_finite())
        {
            return Err(Error::InvalidParameter(
                "truncation radii must be positive".into(),
            ));
        }
        if !(self.grading >= 0.0 && self.grading <= 30.0) {
            return Err(Error::InvalidParameter(format!(
                "grading {} outside [0, 30]",
                self.grading
            )));
        }
        // x_N = 0 must be representable; also guards the weight overflow
        if self.r_rho.hypot(self.r_xn) > 24.0 {
            return Err(Error::InvalidParameter(
                "truncation radius beyond 24 overflows the weight".into(),
            ));
        }
        Ok(())
    }

    fn axis(r: f64, n: usize, grading: f64) -> Vec<f64> {
        (0..=n)
            .map(|i| {
                let s = i as f64 / n as f64;
                if i == n {
                    r
                } else if grading == 0.0 {
                    r * s
                } else {
                    r * (grading * s).sinh() / grading.sinh()
                }
            })
            .collect()
    }

    pub fn rho_nodes(&self) -> Vec<f64> {
        Self::axis(self.r_rho, self.n_rho, self.grading)
    }

    pub fn xn_nodes(&self) -> Vec<f64> {
        Self::axis(self.r_xn, self.n_xn, self.grading)
    }

    pub fn node_count(&self) -> usize {
        (self.n_rho + 1) * (self.n_xn + 1)
    }

    /// Flat index of node (i, j); x_N varies fastest.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * (self.n_xn + 1) + j
    }

    /// Nodes on the outer truncation edges carry the Dirichlet condition.
    pub fn is_dirichlet(&self, i: usize, j: usize) -> bool {
        i == self.n_rho || j == self.n_xn
    }

    /// Same extents and grading with the cell counts scaled by `factor`.
    pub fn refined(&self, factor: f64) -> Result<Self> {
        let scale = |n: usize| ((n as f64) * factor).round() as usize;
        Self::new(
            self.r_rho,
            self.r_xn,
            scale(self.n_rho),
            scale(self.n_xn),
            self.grading,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_is_graded() {
        let g = Grid::default();
        let r = g.rho_nodes();
        assert_eq!(r.len(), 161);
        assert_eq!(r[0], 0.0);
        assert_eq!(r[160], 8.0);
        assert!(r[1] < 2e-3 && r[1] > 5e-4, "{}", r[1]);
        assert!(r.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn rejects_coarse_grids() {
        assert!(Grid::with_cells(31).is_err());
        assert!(Grid::new(8.0, 8.0, 64, 64, -1.0).is_err());
        assert!(Grid::new(30.0, 30.0, 64, 64, 1.0).is_err());
        assert!(Grid::with_cells(32).is_ok());
    }

    #[test]
    fn uniform_when_grading_zero() {
        let g = Grid::new(4.0, 2.0, 40, 40, 0.0).unwrap();
        assert!((g.rho_nodes()[10] - 1.0).abs() < 1e-15);
        assert!((g.xn_nodes()[10] - 0.5).abs() < 1e-15);
    }
}
