use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use crate::dim::Dimension;
use crate::error::{Error, Result};
use crate::landscape::FunctionalParams;

/// Nodal values u(rho_i, x_N,j), flat with x_N fastest. Zero on the outer
/// truncation edges; the line x_N = 0 is free.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisymField {
    pub values: Vec<f64>,
    pub grid: Grid,
    pub dim: Dimension,
}

impl AxisymField {
    pub fn zeros(grid: Grid, dim: Dimension) -> Self {
        Self {
            values: vec![0.0; grid.node_count()],
            grid,
            dim,
        }
    }

    /// Samples f at the nodes; Dirichlet nodes are set to zero.
    pub fn from_fn<F: FnMut(f64, f64) -> f64>(
        grid: Grid,
        dim: Dimension,
        mut f: F,
    ) -> Result<Self> {
        let rho = grid.rho_nodes();
        let xn = grid.xn_nodes();
        let mut values = Vec::with_capacity(grid.node_count());
        for (i, &r) in rho.iter().enumerate() {
            for (j, &z) in xn.iter().enumerate() {
                values.push(if grid.is_dirichlet(i, j) {
                    0.0
                } else {
                    f(r, z)
                });
            }
        }
        let field = Self { values, grid, dim };
        field.validate()?;
        Ok(field)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if self.values.len() != self.grid.node_count() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values, grid has {} nodes",
                self.values.len(),
                self.grid.node_count()
            )));
        }
        if let Some(k) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite field value at node {k}"
            )));
        }
        let g = &self.grid;
        for i in 0..=g.n_rho {
            for j in 0..=g.n_xn {
                if g.is_dirichlet(i, j) && self.values[g.index(i, j)] != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "field nonzero on outer edge at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| c * v).collect(),
            ..self.clone()
        }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-1.0)
    }

    /// Sum of 1 to 4 compactly supported C^2 bumps a (1 - d^2/s^2)_+^3 with
    /// random centres in [0, 3]^2, radii in [0.3, 2] and amplitudes in
    /// [-1, 1]. Supports stay inside |x| < 7.
    pub fn random_bumps<R: Rng>(grid: Grid, dim: Dimension, rng: &mut R) -> Result<Self> {
        let count = rng.random_range(1..=4);
        let bumps: Vec<(f64, f64, f64, f64)> = (0..count)
            .map(|_| {
                (
                    rng.random_range(0.0..3.0),
                    rng.random_range(0.0..3.0),
                    rng.random_range(0.3..2.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        Self::from_fn(grid, dim, |r, z| {
            bumps
                .iter()
                .map(|&(cr, cz, s, a)| {
                    let q = 1.0 - ((r - cr).powi(2) + (z - cz).powi(2)) / (s * s);
                    if q > 0.0 {
                        a * q * q * q
                    } else {
                        0.0
                    }
                })
                .sum()
        })
    }

    /// Bilinear interpolation onto another grid (zero outside this one).
    pub fn resample(&self, target: Grid) -> Result<Self> {
        let rho = self.grid.rho_nodes();
        let xn = self.grid.xn_nodes();
        let locate = |nodes: &[f64], x: f64| -> Option<(usize, f64)> {
            let last = *nodes.last()?;
            if x > last {
                return None;
            }
            let k = nodes.partition_point(|&v| v <= x).clamp(1, nodes.len() - 1) - 1;
            Some((k, (x - nodes[k]) / (nodes[k + 1] - nodes[k])))
        };
        Self::from_fn(target, self.dim, |r, z| {
            match (locate(&rho, r), locate(&xn, z)) {
                (Some((i, a)), Some((j, b))) => {
                    (1.0 - a) * (1.0 - b) * self.at(i, j)
                        + a * (1.0 - b) * self.at(i + 1, j)
                        + (1.0 - a) * b * self.at(i, j + 1)
                        + a * b * self.at(i + 1, j + 1)
                }
                _ => 0.0,
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
struct Sidecar {
    #[serde(rename = "N")]
    n: u32,
    lambda: f64,
    mu: f64,
    p: f64,
    grid: Grid,
}

fn sidecar_paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("txt"), stem.with_extension("json"))
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Checkpoint(format!("{}: {e}", path.display()))
}

/// Writes `stem.txt` (one row per rho node, values along x_N) and the
/// sidecar `stem.json` with {N, lambda, mu, p, grid}.
pub fn write_checkpoint(field: &AxisymField, fp: &FunctionalParams, stem: &Path) -> Result<()> {
    if fp.dim != field.dim {
        return Err(Error::InvalidParameter(
            "checkpoint parameters and field disagree on N".into(),
        ));
    }
    let (txt, json) = sidecar_paths(stem);
    let mut out = String::with_capacity(field.values.len() * 24);
    for row in field.values.chunks(field.grid.n_xn + 1) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    fs::write(&txt, out).map_err(|e| io_err(&txt, e))?;
    let meta = Sidecar {
        n: field.dim.n(),
        lambda: fp.lambda,
        mu: fp.mu,
        p: fp.p,
        grid: field.grid,
    };
    let text = serde_json::to_string_pretty(&meta).map_err(|e| io_err(&json, e))?;
    fs::write(&json, text).map_err(|e| io_err(&json, e))?;
    Ok(())
}

pub fn read_checkpoint(stem: &Path) -> Result<(AxisymField, FunctionalParams)> {
    let (txt, json) = sidecar_paths(stem);
    let meta: Sidecar =
        serde_json::from_str(&fs::read_to_string(&json).map_err(|e| io_err(&json, e))?)
            .map_err(|e| io_err(&json, e))?;
    let dim = Dimension::new(meta.n)?;
    let fp = FunctionalParams::new(dim, meta.lambda, meta.mu, meta.p)?;
    let body = fs::read_to_string(&txt).map_err(|e| io_err(&txt, e))?;
    let mut values = Vec::with_capacity(meta.grid.node_count());
    for (line_no, line) in body.lines().enumerate() {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| io_err(&txt, format!("line {}: {e}", line_no + 1)))?;
        if row.len() != meta.grid.n_xn + 1 {
            return Err(io_err(
                &txt,
                format!("line {} has {} values", line_no + 1, row.len()),
            ));
        }
        values.extend(row);
    }
    let field = AxisymField {
        values,
        grid: meta.grid,
        dim,
    };
    field.validate().map_err(|e| io_err(&txt, e))?;
    Ok((field, fp))
}
