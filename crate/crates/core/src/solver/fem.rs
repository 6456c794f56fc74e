//! Bilinear elements on the tensor grid with 3x3 Gauss quadrature in the
//! axisymmetric measure |S^{N-2}| rho^{N-2} drho dx_N.

use nalgebra::DVector;
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix, CsrMatrix};
use rayon::prelude::*;

use super::field::AxisymField;
use super::grid::Grid;
use crate::dim::Dimension;
use crate::error::{Error, Result};
use crate::special::sphere_area;

const GAUSS_X: [f64; 3] = [0.112_701_665_379_258_31, 0.5, 0.887_298_334_620_741_7];
const GAUSS_W: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// Deterministic pairwise sum.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Field data at one volume quadrature point. `w` includes the measure,
/// `k` is the weight K.
#[derive(Debug, Clone, Copy)]
pub struct VolumeSample {
    pub w: f64,
    pub k: f64,
    pub rho: f64,
    pub xn: f64,
    pub u: f64,
    pub u_rho: f64,
    pub u_xn: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct BoundarySample {
    pub w: f64,
    pub k: f64,
    pub rho: f64,
    pub u: f64,
}

/// Local corner order: (0,0), (1,0), (0,1), (1,1) in (rho, x_N).
fn shape(x: f64, y: f64) -> [f64; 4] {
    [(1.0 - x) * (1.0 - y), x * (1.0 - y), (1.0 - x) * y, x * y]
}

fn shape_dx(y: f64) -> [f64; 4] {
    [-(1.0 - y), 1.0 - y, -y, y]
}

fn shape_dy(x: f64) -> [f64; 4] {
    [-(1.0 - x), -x, 1.0 - x, x]
}

pub struct Discretization {
    pub grid: Grid,
    pub dim: Dimension,
    rho: Vec<f64>,
    xn: Vec<f64>,
    /// Per volume quadrature point (cell-major, 9 per cell).
    qw: Vec<f64>,
    qk: Vec<f64>,
    /// Per boundary quadrature point (3 per rho cell).
    bw: Vec<f64>,
    bk: Vec<f64>,
    /// Free index of every node, None on the Dirichlet edges.
    free_of: Vec<Option<usize>>,
    free_nodes: Vec<usize>,
    stiffness: CsrMatrix<f64>,
    weighted_mass: CsrMatrix<f64>,
    factor: CscCholesky<f64>,
}

impl std::fmt::Debug for Discretization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Discretization")
            .field("grid", &self.grid)
            .field("dim", &self.dim)
            .finish()
    }
}

impl Discretization {
    pub fn new(dim: Dimension, grid: Grid) -> Result<Self> {
        grid.validate()?;
        let rho = grid.rho_nodes();
        let xn = grid.xn_nodes();
        let (nr, nz) = (grid.n_rho, grid.n_xn);
        let area = sphere_area(dim.n() - 1);
        let m = dim.nf() - 2.0;

        let mut qw = Vec::with_capacity(nr * nz * 9);
        let mut qk = Vec::with_capacity(nr * nz * 9);
        for i in 0..nr {
            let hr = rho[i + 1] - rho[i];
            for j in 0..nz {
                let hz = xn[j + 1] - xn[j];
                for (a, &gx) in GAUSS_X.iter().enumerate() {
                    let r = rho[i] + hr * gx;
                    for (b, &gy) in GAUSS_X.iter().enumerate() {
                        let z = xn[j] + hz * gy;
                        qw.push(hr * hz * GAUSS_W[a] * GAUSS_W[b] * area * r.powf(m));
                        qk.push(((r * r + z * z) / 4.0).exp());
                    }
                }
            }
        }
        let mut bw = Vec::with_capacity(nr * 3);
        let mut bk = Vec::with_capacity(nr * 3);
        for i in 0..nr {
            let hr = rho[i + 1] - rho[i];
            for (a, &gx) in GAUSS_X.iter().enumerate() {
                let r = rho[i] + hr * gx;
                bw.push(hr * GAUSS_W[a] * area * r.powf(m));
                bk.push((r * r / 4.0).exp());
            }
        }

        let mut free_of = vec![None; grid.node_count()];
        let mut free_nodes = Vec::new();
        for i in 0..=nr {
            for j in 0..=nz {
                if !grid.is_dirichlet(i, j) {
                    free_of[grid.index(i, j)] = Some(free_nodes.len());
                    free_nodes.push(grid.index(i, j));
                }
            }
        }

        let mut disc = Self {
            grid,
            dim,
            rho,
            xn,
            qw,
            qk,
            bw,
            bk,
            free_of,
            free_nodes,
            stiffness: CsrMatrix::zeros(0, 0),
            weighted_mass: CsrMatrix::zeros(0, 0),
            factor: CscCholesky::factor(&CscMatrix::identity(1)).expect("identity factors"),
        };
        let (stiff, mass) = disc.assemble();
        let csc = CscMatrix::from(&stiff);
        disc.factor = CscCholesky::factor(&csc)
            .map_err(|e| Error::Factorization(format!("stiffness: {e}")))?;
        disc.stiffness = CsrMatrix::from(&stiff);
        disc.weighted_mass = CsrMatrix::from(&mass);
        Ok(disc)
    }

    fn corners(&self, i: usize, j: usize) -> [usize; 4] {
        let g = &self.grid;
        [
            g.index(i, j),
            g.index(i + 1, j),
            g.index(i, j + 1),
            g.index(i + 1, j + 1),
        ]
    }

    fn cell_sizes(&self, i: usize, j: usize) -> (f64, f64) {
        (self.rho[i + 1] - self.rho[i], self.xn[j + 1] - self.xn[j])
    }

    /// K-weighted stiffness and mass matrices over the free nodes.
    fn assemble(&self) -> (CooMatrix<f64>, CooMatrix<f64>) {
        let nf = self.free_nodes.len();
        let mut stiff = CooMatrix::new(nf, nf);
        let mut mass = CooMatrix::new(nf, nf);
        let nz = self.grid.n_xn;
        for i in 0..self.grid.n_rho {
            for j in 0..nz {
                let (hr, hz) = self.cell_sizes(i, j);
                let base = (i * nz + j) * 9;
                let mut ks = [[0.0; 4]; 4];
                let mut ms = [[0.0; 4]; 4];
                for (a, &gx) in GAUSS_X.iter().enumerate() {
                    for (b, &gy) in GAUSS_X.iter().enumerate() {
                        let q = base + a * 3 + b;
                        let wk = self.qw[q] * self.qk[q];
                        let n = shape(gx, gy);
                        let dx = shape_dx(gy);
                        let dy = shape_dy(gx);
                        for s in 0..4 {
                            for t in 0..4 {
                                ks[s][t] +=
                                    wk * (dx[s] * dx[t] / (hr * hr) + dy[s] * dy[t] / (hz * hz));
                                ms[s][t] += wk * n[s] * n[t];
                            }
                        }
                    }
                }
                let c = self.corners(i, j);
                for s in 0..4 {
                    let Some(fs) = self.free_of[c[s]] else {
                        continue;
                    };
                    for t in 0..4 {
                        let Some(ft) = self.free_of[c[t]] else {
                            continue;
                        };
                        stiff.push(fs, ft, ks[s][t]);
                        mass.push(fs, ft, ms[s][t]);
                    }
                }
            }
        }
        (stiff, mass)
    }

    pub fn free_count(&self) -> usize {
        self.free_nodes.len()
    }

    pub fn restrict(&self, u: &AxisymField) -> DVector<f64> {
        DVector::from_iterator(
            self.free_nodes.len(),
            self.free_nodes.iter().map(|&k| u.values[k]),
        )
    }

    pub fn extend(&self, v: &DVector<f64>) -> AxisymField {
        let mut f = AxisymField::zeros(self.grid, self.dim);
        for (s, &k) in self.free_nodes.iter().enumerate() {
            f.values[k] = v[s];
        }
        f
    }

    fn matvec(m: &CsrMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
        let rows: Vec<f64> = (0..m.nrows())
            .into_par_iter()
            .map(|r| {
                let row = m.row(r);
                row.col_indices()
                    .iter()
                    .zip(row.values())
                    .map(|(&c, &v)| v * x[c])
                    .sum()
            })
            .collect();
        DVector::from_vec(rows)
    }

    /// A x with A the K-weighted stiffness.
    pub fn stiffness_apply(&self, x: &DVector<f64>) -> DVector<f64> {
        Self::matvec(&self.stiffness, x)
    }

    pub fn weighted_mass_apply(&self, x: &DVector<f64>) -> DVector<f64> {
        Self::matvec(&self.weighted_mass, x)
    }

    /// A^{-1} b.
    pub fn stiffness_solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.factor.solve(b).column(0).into_owned()
    }

    /// (x, y)_A = x^T A y, summed pairwise.
    pub fn energy_inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        let ay = self.stiffness_apply(y);
        dot(x, &ay)
    }

    fn check(&self, u: &AxisymField) -> Result<()> {
        if u.grid != self.grid || u.dim != self.dim {
            return Err(Error::InvalidParameter(
                "field does not live on this discretisation".into(),
            ));
        }
        u.validate()
    }

    /// Sum over all volume quadrature points of f(sample).
    pub fn integrate<F>(&self, u: &AxisymField, f: F) -> Result<f64>
    where
        F: Fn(&VolumeSample) -> f64 + Sync,
    {
        self.check(u)?;
        Ok(self.integrate_unchecked(&u.values, f))
    }

    fn integrate_unchecked<F>(&self, u: &[f64], f: F) -> f64
    where
        F: Fn(&VolumeSample) -> f64 + Sync,
    {
        let nz = self.grid.n_xn;
        let cells: Vec<f64> = (0..self.grid.n_rho * nz)
            .into_par_iter()
            .map(|cell| {
                let (i, j) = (cell / nz, cell % nz);
                let c = self.corners(i, j);
                let v = [u[c[0]], u[c[1]], u[c[2]], u[c[3]]];
                let (hr, hz) = self.cell_sizes(i, j);
                let mut acc = 0.0;
                for (a, &gx) in GAUSS_X.iter().enumerate() {
                    for (b, &gy) in GAUSS_X.iter().enumerate() {
                        let q = cell * 9 + a * 3 + b;
                        let n = shape(gx, gy);
                        let dx = shape_dx(gy);
                        let dy = shape_dy(gx);
                        let s = VolumeSample {
                            w: self.qw[q],
                            k: self.qk[q],
                            rho: self.rho[i] + hr * gx,
                            xn: self.xn[j] + hz * gy,
                            u: (0..4).map(|t| v[t] * n[t]).sum(),
                            u_rho: (0..4).map(|t| v[t] * dx[t]).sum::<f64>() / hr,
                            u_xn: (0..4).map(|t| v[t] * dy[t]).sum::<f64>() / hz,
                        };
                        acc += f(&s);
                    }
                }
                acc
            })
            .collect();
        pairwise_sum(&cells)
    }

    /// Sum over the boundary quadrature points (x_N = 0) of g(sample).
    pub fn integrate_boundary<G>(&self, u: &AxisymField, g: G) -> Result<f64>
    where
        G: Fn(&BoundarySample) -> f64 + Sync,
    {
        self.check(u)?;
        let mut terms = Vec::with_capacity(self.bw.len());
        for i in 0..self.grid.n_rho {
            let (u0, u1) = (u.at(i, 0), u.at(i + 1, 0));
            let hr = self.rho[i + 1] - self.rho[i];
            for (a, &gx) in GAUSS_X.iter().enumerate() {
                let q = i * 3 + a;
                terms.push(g(&BoundarySample {
                    w: self.bw[q],
                    k: self.bk[q],
                    rho: self.rho[i] + hr * gx,
                    u: (1.0 - gx) * u0 + gx * u1,
                }));
            }
        }
        Ok(pairwise_sum(&terms))
    }

    /// Free-node vector b_s = sum_q w k phi(u_q) N_s(q) + sum_boundary w k psi(u) N_s.
    pub fn load<F, G>(&self, u: &AxisymField, phi: F, psi: G) -> Result<DVector<f64>>
    where
        F: Fn(f64) -> f64 + Sync,
        G: Fn(f64) -> f64,
    {
        self.check(u)?;
        let nz = self.grid.n_xn;
        let per_cell: Vec<[f64; 4]> = (0..self.grid.n_rho * nz)
            .into_par_iter()
            .map(|cell| {
                let (i, j) = (cell / nz, cell % nz);
                let c = self.corners(i, j);
                let v = [
                    u.values[c[0]],
                    u.values[c[1]],
                    u.values[c[2]],
                    u.values[c[3]],
                ];
                let mut out = [0.0; 4];
                if v.iter().all(|&x| x == 0.0) {
                    return out;
                }
                for (a, &gx) in GAUSS_X.iter().enumerate() {
                    for (b, &gy) in GAUSS_X.iter().enumerate() {
                        let q = cell * 9 + a * 3 + b;
                        let n = shape(gx, gy);
                        let uq: f64 = (0..4).map(|t| v[t] * n[t]).sum();
                        let s = self.qw[q] * self.qk[q] * phi(uq);
                        for t in 0..4 {
                            out[t] += s * n[t];
                        }
                    }
                }
                out
            })
            .collect();
        let mut b = DVector::zeros(self.free_nodes.len());
        for (cell, vals) in per_cell.iter().enumerate() {
            let c = self.corners(cell / nz, cell % nz);
            for t in 0..4 {
                if let Some(s) = self.free_of[c[t]] {
                    b[s] += vals[t];
                }
            }
        }
        for i in 0..self.grid.n_rho {
            let (u0, u1) = (u.at(i, 0), u.at(i + 1, 0));
            if u0 == 0.0 && u1 == 0.0 {
                continue;
            }
            let mut e = [0.0; 2];
            for (a, &gx) in GAUSS_X.iter().enumerate() {
                let q = i * 3 + a;
                let s = self.bw[q] * self.bk[q] * psi((1.0 - gx) * u0 + gx * u1);
                e[0] += s * (1.0 - gx);
                e[1] += s * gx;
            }
            for (t, node) in [self.grid.index(i, 0), self.grid.index(i + 1, 0)]
                .into_iter()
                .enumerate()
            {
                if let Some(s) = self.free_of[node] {
                    b[s] += e[t];
                }
            }
        }
        Ok(b)
    }
}

pub fn dot(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let terms: Vec<f64> = x.iter().zip(y.iter()).map(|(a, b)| a * b).collect();
    pairwise_sum(&terms)
}
