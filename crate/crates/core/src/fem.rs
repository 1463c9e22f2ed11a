//! Bounded-domain forward solver: 2D linear elasticity on the unit square
//! with Dirichlet data `u = eps_bar . x`, discretized with bilinear
//! quadrilateral elements on a structured node grid.
//!
//! The element stiffness splits into two geometry-only 8x8 matrices, one per
//! isotropic projector, so a heterogeneous element contributes
//! `2 kappa_e K_J + 2 mu_e K_K`. The linear system is solved matrix-free by
//! conjugate gradients with diagonal preconditioning.

use crate::error::{Error, Result};
use crate::field::{Grid, ScalarField, TensorField};
use crate::tensor::{Dim, SymTensor2};

/// Structured node grid over the unit square; `nx`, `ny` count nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundedGrid {
    nx: usize,
    ny: usize,
}

/// Local corner order within an element: counterclockwise from (-1, -1).
const CORNERS: [(f64, f64); 4] = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];

impl BoundedGrid {
    /// # Panics
    ///
    /// Panics unless both node counts are at least 2.
    pub fn new(nx: usize, ny: usize) -> Self {
        assert!(nx >= 2 && ny >= 2, "need at least 2 nodes per axis");
        Self { nx, ny }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn n_nodes(&self) -> usize {
        self.nx * self.ny
    }

    /// Element spacing along x; the domain is always `[0, 1] x [0, 1]`.
    pub fn hx(&self) -> f64 {
        1.0 / (self.nx - 1) as f64
    }

    pub fn hy(&self) -> f64 {
        1.0 / (self.ny - 1) as f64
    }

    pub fn node_flat(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn node_coords(&self, i: usize, j: usize) -> (f64, f64) {
        (i as f64 * self.hx(), j as f64 * self.hy())
    }

    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx - 1 || j == self.ny - 1
    }

    /// Periodic-style container grid indexed like the nodes.
    pub fn node_grid(&self) -> Grid {
        Grid::new2(self.nx, self.ny)
    }

    pub fn elem_grid(&self) -> Grid {
        Grid::new2(self.nx - 1, self.ny - 1)
    }

    /// Global node indices of element `(i, j)` in local corner order.
    fn elem_nodes(&self, i: usize, j: usize) -> [usize; 4] {
        [
            self.node_flat(i, j),
            self.node_flat(i + 1, j),
            self.node_flat(i + 1, j + 1),
            self.node_flat(i, j + 1),
        ]
    }
}

/// Nodal displacement vectors, two components per node, stored interleaved.
#[derive(Clone, Debug)]
pub struct DisplacementField {
    grid: BoundedGrid,
    values: Vec<f64>,
}

impl DisplacementField {
    pub fn grid(&self) -> BoundedGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> [f64; 2] {
        let n = self.grid.node_flat(i, j);
        [self.values[2 * n], self.values[2 * n + 1]]
    }
}

/// Output of [`solve_dirichlet`].
#[derive(Clone, Debug)]
pub struct FemSolution {
    pub displacement: DisplacementField,
    /// Strains averaged to the nodes; same grid as nodal modulus maps.
    pub nodal_strain: TensorField,
    /// Centroid strains, exact element averages for bilinear elements.
    pub element_strain: TensorField,
    pub iterations: usize,
    pub residual: f64,
}

type ElementMatrix = [[f64; 8]; 8];

/// Geometry-only element matrices, one per projector, for an `hx` by `hy`
/// rectangle: the element stiffness is `2 kappa K_J + 2 mu K_K`.
fn element_matrices(hx: f64, hy: f64) -> (ElementMatrix, ElementMatrix) {
    // Mandel matrices of the 2D projectors.
    let pj = [[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [0.0, 0.0, 0.0]];
    let pk = [[0.5, -0.5, 0.0], [-0.5, 0.5, 0.0], [0.0, 0.0, 1.0]];
    let mut kj = [[0.0; 8]; 8];
    let mut kk = [[0.0; 8]; 8];
    let g = 1.0 / 3f64.sqrt();
    let det = hx * hy / 4.0;
    let inv_sqrt2 = 1.0 / 2f64.sqrt();
    for &gx in &[-g, g] {
        for &gy in &[-g, g] {
            // Mandel strain-displacement matrix at this quadrature point.
            let mut b = [[0.0; 8]; 3];
            for (a, &(xa, ya)) in CORNERS.iter().enumerate() {
                let dndx = xa * (1.0 + ya * gy) / 4.0 * (2.0 / hx);
                let dndy = ya * (1.0 + xa * gx) / 4.0 * (2.0 / hy);
                b[0][2 * a] = dndx;
                b[1][2 * a + 1] = dndy;
                b[2][2 * a] = dndy * inv_sqrt2;
                b[2][2 * a + 1] = dndx * inv_sqrt2;
            }
            for (target, p) in [(&mut kj, &pj), (&mut kk, &pk)] {
                // target += det * B^T P B.
                let mut pb = [[0.0; 8]; 3];
                for m in 0..3 {
                    for c in 0..8 {
                        for n in 0..3 {
                            pb[m][c] += p[m][n] * b[n][c];
                        }
                    }
                }
                for r in 0..8 {
                    for c in 0..8 {
                        let mut acc = 0.0;
                        for m in 0..3 {
                            acc += b[m][r] * pb[m][c];
                        }
                        target[r][c] += det * acc;
                    }
                }
            }
        }
    }
    (kj, kk)
}

/// Per-element moduli from a map given either on the node grid (averaged
/// over the four corners) or directly on the element grid.
fn element_moduli(map: &ScalarField, grid: &BoundedGrid) -> Result<Vec<f64>> {
    let map_grid = map.grid();
    let shape = map_grid.shape();
    let (ex, ey) = (grid.nx - 1, grid.ny - 1);
    if shape == [grid.nx, grid.ny] {
        let mut out = Vec::with_capacity(ex * ey);
        for i in 0..ex {
            for j in 0..ey {
                let sum: f64 = grid.elem_nodes(i, j).iter().map(|&n| map.get(n)).sum();
                out.push(0.25 * sum);
            }
        }
        Ok(out)
    } else if shape == [ex, ey] {
        Ok(map.values().to_vec())
    } else {
        Err(Error::GridMismatch)
    }
}

struct Operator<'a> {
    grid: BoundedGrid,
    kappa_e: &'a [f64],
    mu_e: &'a [f64],
    kj: ElementMatrix,
    kk: ElementMatrix,
}

impl Operator<'_> {
    /// `out = K u` over all degrees of freedom, no boundary masking.
    fn apply(&self, u: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let (ex, ey) = (self.grid.nx - 1, self.grid.ny - 1);
        for i in 0..ex {
            for j in 0..ey {
                let e = i * ey + j;
                let nodes = self.grid.elem_nodes(i, j);
                let mut local = [0.0; 8];
                for (a, &n) in nodes.iter().enumerate() {
                    local[2 * a] = u[2 * n];
                    local[2 * a + 1] = u[2 * n + 1];
                }
                let (ck, cm) = (2.0 * self.kappa_e[e], 2.0 * self.mu_e[e]);
                let mut q = [0.0; 8];
                for r in 0..8 {
                    let mut acc = 0.0;
                    for c in 0..8 {
                        acc += (ck * self.kj[r][c] + cm * self.kk[r][c]) * local[c];
                    }
                    q[r] = acc;
                }
                for (a, &n) in nodes.iter().enumerate() {
                    out[2 * n] += q[2 * a];
                    out[2 * n + 1] += q[2 * a + 1];
                }
            }
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        let mut diag = vec![0.0; 2 * self.grid.n_nodes()];
        let (ex, ey) = (self.grid.nx - 1, self.grid.ny - 1);
        for i in 0..ex {
            for j in 0..ey {
                let e = i * ey + j;
                let nodes = self.grid.elem_nodes(i, j);
                let (ck, cm) = (2.0 * self.kappa_e[e], 2.0 * self.mu_e[e]);
                for (a, &n) in nodes.iter().enumerate() {
                    for comp in 0..2 {
                        let r = 2 * a + comp;
                        diag[2 * n + comp] += ck * self.kj[r][r] + cm * self.kk[r][r];
                    }
                }
            }
        }
        diag
    }
}

fn interior_mask(grid: &BoundedGrid) -> Vec<bool> {
    let mut mask = vec![false; 2 * grid.n_nodes()];
    for i in 1..grid.nx - 1 {
        for j in 1..grid.ny - 1 {
            let n = grid.node_flat(i, j);
            mask[2 * n] = true;
            mask[2 * n + 1] = true;
        }
    }
    mask
}

fn masked_dot(a: &[f64], b: &[f64], mask: &[bool]) -> f64 {
    a.iter()
        .zip(b)
        .zip(mask)
        .filter(|&(_, &m)| m)
        .map(|((&x, &y), _)| x * y)
        .sum()
}

const MAX_CG_ITERATIONS: usize = 20_000;

/// Solves the Dirichlet problem `div(L(x) : sym grad u) = 0` on the unit
/// square with `u = eps_bar . x` on the boundary, `L = 2 kappa J + 2 mu K`.
///
/// The modulus maps are interpreted as nodal; use [`solve_dirichlet_on`] to
/// pass element-grid maps. Returns displacements, centroid element strains
/// and node-averaged strains; the conjugate-gradient solve runs to relative
/// residual `tol`.
///
/// Errors: [`Error::UnsupportedDimension`] for non-2D input,
/// [`Error::GridMismatch`] for incompatible map shapes,
/// [`Error::NonPositiveModulus`], and [`Error::NotConverged`].
pub fn solve_dirichlet(
    kappa: &ScalarField,
    mu: &ScalarField,
    eps_bar: &SymTensor2,
    tol: f64,
) -> Result<FemSolution> {
    if kappa.grid().dim() != Dim::Two {
        return Err(Error::UnsupportedDimension(kappa.grid().dim().size()));
    }
    let kappa_grid = kappa.grid();
    let shape = kappa_grid.shape();
    solve_dirichlet_on(
        BoundedGrid::new(shape[0], shape[1]),
        kappa,
        mu,
        eps_bar,
        tol,
    )
}

/// [`solve_dirichlet`] with an explicit node grid, so modulus maps may live
/// on either the node grid (corner-averaged per element) or the element
/// grid (used as-is).
pub fn solve_dirichlet_on(
    grid: BoundedGrid,
    kappa: &ScalarField,
    mu: &ScalarField,
    eps_bar: &SymTensor2,
    tol: f64,
) -> Result<FemSolution> {
    if kappa.grid().dim() != Dim::Two || mu.grid().dim() != Dim::Two {
        return Err(Error::UnsupportedDimension(3));
    }
    if eps_bar.dim() != Dim::Two {
        return Err(Error::UnsupportedDimension(eps_bar.dim().size()));
    }
    if kappa.grid().shape() != mu.grid().shape() {
        return Err(Error::GridMismatch);
    }
    let kappa_e = element_moduli(kappa, &grid)?;
    let mu_e = element_moduli(mu, &grid)?;
    for &v in kappa_e.iter().chain(&mu_e) {
        if v <= 0.0 {
            return Err(Error::NonPositiveModulus(v));
        }
    }

    let (kj, kk) = element_matrices(grid.hx(), grid.hy());
    let op = Operator {
        grid,
        kappa_e: &kappa_e,
        mu_e: &mu_e,
        kj,
        kk,
    };
    let ndof = 2 * grid.n_nodes();
    let mask = interior_mask(&grid);

    // Boundary lift: exact Dirichlet values, zero in the interior.
    let mut u = vec![0.0; ndof];
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            if grid.is_boundary(i, j) {
                let (x, y) = grid.node_coords(i, j);
                let n = grid.node_flat(i, j);
                u[2 * n] = eps_bar.get(0, 0) * x + eps_bar.get(0, 1) * y;
                u[2 * n + 1] = eps_bar.get(0, 1) * x + eps_bar.get(1, 1) * y;
            }
        }
    }

    let mut b = vec![0.0; ndof];
    op.apply(&u, &mut b);
    for v in b.iter_mut() {
        *v = -*v;
    }
    let b_norm = masked_dot(&b, &b, &mask).sqrt();

    let mut iterations = 0;
    let mut residual = 0.0;
    if b_norm > 0.0 && mask.iter().any(|&m| m) {
        let diag = op.diagonal();
        let precond = |r: &[f64], z: &mut [f64]| {
            for (k, zk) in z.iter_mut().enumerate() {
                *zk = if mask[k] { r[k] / diag[k] } else { 0.0 };
            }
        };
        let mut x = vec![0.0; ndof];
        let mut r = b.clone();
        for (k, rk) in r.iter_mut().enumerate() {
            if !mask[k] {
                *rk = 0.0;
            }
        }
        let mut z = vec![0.0; ndof];
        precond(&r, &mut z);
        let mut p = z.clone();
        let mut rz = masked_dot(&r, &z, &mask);
        let mut ap = vec![0.0; ndof];
        let mut converged = false;
        while iterations < MAX_CG_ITERATIONS {
            op.apply(&p, &mut ap);
            for (k, apk) in ap.iter_mut().enumerate() {
                if !mask[k] {
                    *apk = 0.0;
                }
            }
            let alpha = rz / masked_dot(&p, &ap, &mask);
            for k in 0..ndof {
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            iterations += 1;
            residual = masked_dot(&r, &r, &mask).sqrt() / b_norm;
            if residual <= tol {
                converged = true;
                break;
            }
            precond(&r, &mut z);
            let rz_next = masked_dot(&r, &z, &mask);
            let beta = rz_next / rz;
            rz = rz_next;
            for k in 0..ndof {
                p[k] = z[k] + beta * p[k];
            }
        }
        if !converged {
            return Err(Error::NotConverged {
                iterations,
                residual,
            });
        }
        for k in 0..ndof {
            if mask[k] {
                u[k] += x[k];
            }
        }
    }

    let displacement = DisplacementField { grid, values: u };
    let element_strain = element_strains(&displacement);
    let nodal_strain = nodal_strains(&element_strain)?;
    Ok(FemSolution {
        displacement,
        nodal_strain,
        element_strain,
        iterations,
        residual,
    })
}

/// Centroid strain of every element; for bilinear shape functions the
/// centroid value equals the exact element average.
pub fn element_strains(displacement: &DisplacementField) -> TensorField {
    let grid = displacement.grid;
    let (ex, ey) = (grid.nx - 1, grid.ny - 1);
    let (hx, hy) = (grid.hx(), grid.hy());
    let mut out = TensorField::zeros(grid.elem_grid());
    for i in 0..ex {
        for j in 0..ey {
            let nodes = grid.elem_nodes(i, j);
            let mut e11 = 0.0;
            let mut e22 = 0.0;
            let mut cross = 0.0;
            for (a, &n) in nodes.iter().enumerate() {
                let (xa, ya) = CORNERS[a];
                let dndx = xa / (2.0 * hx);
                let dndy = ya / (2.0 * hy);
                let (u1, u2) = (displacement.values[2 * n], displacement.values[2 * n + 1]);
                e11 += dndx * u1;
                e22 += dndy * u2;
                cross += dndy * u1 + dndx * u2;
            }
            let mut t = SymTensor2::zero(Dim::Two);
            t.set(0, 0, e11);
            t.set(1, 1, e22);
            t.set(0, 1, 0.5 * cross);
            out.set(i * ey + j, &t);
        }
    }
    out
}

/// Averages element strains to nodes: 4 adjacent elements inside, 2 along
/// edges, 1 at corners.
///
/// Errors with [`Error::UnsupportedDimension`] for non-2D input.
pub fn nodal_strains(element_strains: &TensorField) -> Result<TensorField> {
    if element_strains.grid().dim() != Dim::Two {
        return Err(Error::UnsupportedDimension(
            element_strains.grid().dim().size(),
        ));
    }
    let egrid = element_strains.grid();
    let eshape = egrid.shape();
    let (ex, ey) = (eshape[0], eshape[1]);
    let grid = BoundedGrid::new(ex + 1, ey + 1);
    let mut out = TensorField::zeros(grid.node_grid());
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let mut sum = SymTensor2::zero(Dim::Two);
            let mut count = 0.0;
            for ei in i.saturating_sub(1)..=i.min(ex - 1) {
                for ej in j.saturating_sub(1)..=j.min(ey - 1) {
                    sum = sum + element_strains.get(ei * ey + ej);
                    count += 1.0;
                }
            }
            out.set(grid.node_flat(i, j), &(sum * (1.0 / count)));
        }
    }
    Ok(out)
}
