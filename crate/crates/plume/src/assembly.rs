//! Discrete fields and operator assembly for the lowest-order mixed pair:
//! piecewise-constant scalars and Raviart-Thomas fluxes with one signed
//! normal-flux coefficient per edge (in the global edge orientation).
//!
//! On a cell `T` the flux shape function attached to edge `e` (opposite
//! vertex `p`) is `u_e(x) = s (|e| / 2|T|) (x - p)` with `s` the cell's sign
//! for that edge; its normal component is 1 along its own edge and 0 along
//! the other two, and `div u_e = s |e| / |T|`. All mass-type integrands are
//! at most quadratic, so the 3-point edge-midpoint rule assembles them
//! exactly; the degree-5 rule is kept as the independent cross-check and
//! drives the projections.

use crate::mesh::{v2, Mesh};
use crate::quadrature::{self, TRI_DEGREE5};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("cell {cell}: weight {value} is not positive")]
    NonPositiveWeight { cell: usize, value: f64 },
    #[error("cell {cell}: tensor is not symmetric positive definite")]
    NonSpdTensor { cell: usize },
    #[error("{what}: expected {expected}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },
}

/// Small dense 2x2 helpers shared by assembly and the physics modules.
pub mod mat2 {
    pub type Mat2 = [[f64; 2]; 2];

    pub fn identity() -> Mat2 {
        [[1.0, 0.0], [0.0, 1.0]]
    }

    pub fn scale(a: f64) -> Mat2 {
        [[a, 0.0], [0.0, a]]
    }

    pub fn mul_vec(m: &Mat2, v: [f64; 2]) -> [f64; 2] {
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn trace(m: &Mat2) -> f64 {
        m[0][0] + m[1][1]
    }

    pub fn det(m: &Mat2) -> f64 {
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Symmetric (to roundoff) with positive leading minors.
    pub fn is_spd(m: &Mat2) -> bool {
        let scale = m[0][0].abs().max(m[1][1].abs()).max(m[0][1].abs()).max(1e-300);
        (m[0][1] - m[1][0]).abs() <= 1e-12 * scale && m[0][0] > 0.0 && det(m) > 0.0
    }

    pub fn inv(m: &Mat2) -> Mat2 {
        let d = det(m);
        [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]
    }
}

/// One value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct P0Field {
    pub values: Vec<f64>,
}

impl P0Field {
    pub fn zeros(mesh: &Mesh) -> Self {
        P0Field { values: vec![0.0; mesh.cells.len()] }
    }

    pub fn constant(mesh: &Mesh, value: f64) -> Self {
        P0Field { values: vec![value; mesh.cells.len()] }
    }

    pub fn l2_norm(&self, mesh: &Mesh) -> f64 {
        self.values
            .iter()
            .zip(&mesh.cells)
            .map(|(c, cell)| cell.area * c * c)
            .sum::<f64>()
            .sqrt()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// One value per vertex (used for postprocessed output fields).
#[derive(Debug, Clone, PartialEq)]
pub struct P1Field {
    pub values: Vec<f64>,
}

/// Div-conforming flux field: one signed normal-flux coefficient per edge,
/// in the global orientation of [`crate::mesh::Edge::normal`].
#[derive(Debug, Clone, PartialEq)]
pub struct RT0Field {
    pub coeffs: Vec<f64>,
}

impl RT0Field {
    pub fn zeros(mesh: &Mesh) -> Self {
        RT0Field { coeffs: vec![0.0; mesh.edges.len()] }
    }

    /// Evaluate the (affine) field inside `cell` at `x`.
    pub fn value_in_cell(&self, mesh: &Mesh, cell: usize, x: [f64; 2]) -> [f64; 2] {
        let c = &mesh.cells[cell];
        let mut out = [0.0; 2];
        for k in 0..3 {
            let e = &mesh.edges[c.edges[k]];
            let factor = self.coeffs[c.edges[k]] * c.signs[k] * e.length / (2.0 * c.area);
            let p = mesh.vertices[c.v[k]];
            out[0] += factor * (x[0] - p[0]);
            out[1] += factor * (x[1] - p[1]);
        }
        out
    }

    /// Cell-wise divergence (constant per cell): `sum_k s_k |e_k| V_k / |T|`.
    pub fn div_in_cell(&self, mesh: &Mesh, cell: usize) -> f64 {
        let c = &mesh.cells[cell];
        (0..3)
            .map(|k| c.signs[k] * mesh.edges[c.edges[k]].length * self.coeffs[c.edges[k]])
            .sum::<f64>()
            / c.area
    }

    /// Values at cell centroids, e.g. for output or frozen-velocity tensors.
    pub fn centroid_values(&self, mesh: &Mesh) -> Vec<[f64; 2]> {
        (0..mesh.cells.len())
            .map(|c| self.value_in_cell(mesh, c, mesh.cells[c].centroid))
            .collect()
    }

    /// Exact `L^inf` norm: the field is affine per cell, so the maximum of
    /// `|v|` is attained at a vertex of some cell.
    pub fn max_norm(&self, mesh: &Mesh) -> f64 {
        let mut m = 0.0f64;
        for (ci, cell) in mesh.cells.iter().enumerate() {
            for &vi in &cell.v {
                m = m.max(v2::norm(self.value_in_cell(mesh, ci, mesh.vertices[vi])));
            }
        }
        m
    }

    /// `L^2` norm; `|v_h|^2` is quadratic per cell, so edge midpoints are exact.
    pub fn l2_norm(&self, mesh: &Mesh) -> f64 {
        let mut acc = 0.0;
        for (ci, cell) in mesh.cells.iter().enumerate() {
            for k in 0..3 {
                let mid = mesh.edges[cell.edges[k]].midpoint;
                let v = self.value_in_cell(mesh, ci, mid);
                acc += cell.area / 3.0 * v2::dot(v, v);
            }
        }
        acc.sqrt()
    }
}

/// Triplet-based sparse matrix; duplicate entries add. Assembly order is
/// deterministic, which keeps every downstream factorization reproducible.
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        SparseMatrix { nrows, ncols, triplets: Vec::new() }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if value != 0.0 {
            self.triplets.push((row, col, value));
        }
    }

    pub fn triplets(&self) -> &[(usize, usize, f64)] {
        &self.triplets
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        let mut y = vec![0.0; self.nrows];
        for &(r, c, v) in &self.triplets {
            y[r] += v * x[c];
        }
        y
    }

    pub fn transpose_matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "transpose_matvec dimension mismatch");
        let mut y = vec![0.0; self.ncols];
        for &(r, c, v) in &self.triplets {
            y[c] += v * x[r];
        }
        y
    }

    /// Dense copy for small oracle checks.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.ncols]; self.nrows];
        for &(r, c, v) in &self.triplets {
            m[r][c] += v;
        }
        m
    }
}

/// Per-cell copies of one tensor.
pub fn uniform_tensors(mesh: &Mesh, t: mat2::Mat2) -> Vec<mat2::Mat2> {
    vec![t; mesh.cells.len()]
}

/// Weighted scalar mass matrix `M[T,T] = w_T |T|` (diagonal).
pub fn assemble_p0_mass(mesh: &Mesh, weight: &P0Field) -> Result<SparseMatrix, AssemblyError> {
    check_len("p0 mass weight", weight.values.len(), mesh.cells.len())?;
    let mut m = SparseMatrix::new(mesh.cells.len(), mesh.cells.len());
    for (ci, cell) in mesh.cells.iter().enumerate() {
        let w = weight.values[ci];
        if !(w > 0.0) {
            return Err(AssemblyError::NonPositiveWeight { cell: ci, value: w });
        }
        m.push(ci, ci, w * cell.area);
    }
    Ok(m)
}

/// Tensor-weighted flux mass matrix `A[e,f] = sum_T (W_T u_f, u_e)_T`,
/// assembled with the (exact) edge-midpoint rule.
pub fn assemble_rt0_weighted_mass(
    mesh: &Mesh,
    tensors: &[mat2::Mat2],
) -> Result<SparseMatrix, AssemblyError> {
    check_len("rt0 mass tensors", tensors.len(), mesh.cells.len())?;
    let mut m = SparseMatrix::new(mesh.edges.len(), mesh.edges.len());
    for (ci, cell) in mesh.cells.iter().enumerate() {
        let w = &tensors[ci];
        if !mat2::is_spd(w) {
            return Err(AssemblyError::NonSpdTensor { cell: ci });
        }
        // Basis values at the three edge midpoints.
        let mut basis = [[[0.0f64; 2]; 3]; 3]; // [quad point][local edge]
        for (q, bq) in basis.iter_mut().enumerate() {
            let mid = mesh.edges[cell.edges[q]].midpoint;
            for (k, b) in bq.iter_mut().enumerate() {
                let e = &mesh.edges[cell.edges[k]];
                let factor = cell.signs[k] * e.length / (2.0 * cell.area);
                let p = mesh.vertices[cell.v[k]];
                *b = [factor * (mid[0] - p[0]), factor * (mid[1] - p[1])];
            }
        }
        for k in 0..3 {
            for l in 0..3 {
                let mut val = 0.0;
                for bq in &basis {
                    val += v2::dot(mat2::mul_vec(w, bq[k]), bq[l]);
                }
                m.push(cell.edges[k], cell.edges[l], val * cell.area / 3.0);
            }
        }
    }
    Ok(m)
}

/// Divergence matrix `B[T,e] = (div u_e, 1)_T = s_{T,e} |e|`.
pub fn assemble_div(mesh: &Mesh) -> SparseMatrix {
    let mut b = SparseMatrix::new(mesh.cells.len(), mesh.edges.len());
    for (ci, cell) in mesh.cells.iter().enumerate() {
        for k in 0..3 {
            b.push(ci, cell.edges[k], cell.signs[k] * mesh.edges[cell.edges[k]].length);
        }
    }
    b
}

/// Tensor-weighted divergence `D[T,e] = (div(W_T u_e), 1)_T
/// = s_{T,e} (|e|/2) tr(W_T)` (the basis gradient is a multiple of I).
pub fn assemble_weighted_div(
    mesh: &Mesh,
    tensors: &[mat2::Mat2],
) -> Result<SparseMatrix, AssemblyError> {
    check_len("weighted div tensors", tensors.len(), mesh.cells.len())?;
    let mut d = SparseMatrix::new(mesh.cells.len(), mesh.edges.len());
    for (ci, cell) in mesh.cells.iter().enumerate() {
        let tr = mat2::trace(&tensors[ci]);
        for k in 0..3 {
            d.push(
                ci,
                cell.edges[k],
                cell.signs[k] * mesh.edges[cell.edges[k]].length / 2.0 * tr,
            );
        }
    }
    Ok(d)
}

/// Advective coupling `G[e,T] = (q_T 1_T, u_e) = s_{T,e} (|e|/2) q_T . (x_T - p_opp)`
/// with `x_T` the centroid (the basis integral is `s (|e|/2|T|) |T| (x_T - p)`).
pub fn assemble_vector_coupling(mesh: &Mesh, q: &[[f64; 2]]) -> Result<SparseMatrix, AssemblyError> {
    check_len("vector coupling cell vectors", q.len(), mesh.cells.len())?;
    let mut g = SparseMatrix::new(mesh.edges.len(), mesh.cells.len());
    for (ci, cell) in mesh.cells.iter().enumerate() {
        for k in 0..3 {
            let e = &mesh.edges[cell.edges[k]];
            let p = mesh.vertices[cell.v[k]];
            let moment = v2::sub(cell.centroid, p);
            g.push(cell.edges[k], ci, cell.signs[k] * e.length / 2.0 * v2::dot(q[ci], moment));
        }
    }
    Ok(g)
}

/// `L^2` projection onto cellwise constants: per-cell averages by the
/// degree-5 rule.
pub fn project_p0(mesh: &Mesh, mut f: impl FnMut([f64; 2]) -> f64) -> P0Field {
    let values = mesh
        .cells
        .iter()
        .map(|cell| {
            let (a, b, c) =
                (mesh.vertices[cell.v[0]], mesh.vertices[cell.v[1]], mesh.vertices[cell.v[2]]);
            quadrature::integrate_tri(&TRI_DEGREE5, a, b, c, &mut f) / cell.area
        })
        .collect();
    P0Field { values }
}

/// Flux interpolant: per-edge average normal flux `(1/|e|) int_e v . n ds`
/// by 3-point Gauss. Commutes with the divergence in the discrete sense:
/// `(div Pi_h v, 1)_T = int_T div v`.
pub fn project_rt0(mesh: &Mesh, mut v: impl FnMut([f64; 2]) -> [f64; 2]) -> RT0Field {
    let coeffs = mesh
        .edges
        .iter()
        .map(|e| {
            let (a, b) = (mesh.vertices[e.v.0], mesh.vertices[e.v.1]);
            quadrature::integrate_edge(a, b, |x| v2::dot(v(x), e.normal)) / e.length
        })
        .collect();
    RT0Field { coeffs }
}

/// Average of `f` along edge `e` (3-point Gauss), e.g. for boundary data.
pub fn edge_average(mesh: &Mesh, e: usize, mut f: impl FnMut([f64; 2]) -> f64) -> f64 {
    let edge = &mesh.edges[e];
    let (a, b) = (mesh.vertices[edge.v.0], mesh.vertices[edge.v.1]);
    quadrature::integrate_edge(a, b, &mut f) / edge.length
}

/// Area-weighted vertex averaging of a cell field (postprocessing only).
pub fn vertex_average(mesh: &Mesh, field: &P0Field) -> P1Field {
    let mut num = vec![0.0; mesh.vertices.len()];
    let mut den = vec![0.0; mesh.vertices.len()];
    for (ci, cell) in mesh.cells.iter().enumerate() {
        for &vi in &cell.v {
            num[vi] += cell.area * field.values[ci];
            den[vi] += cell.area;
        }
    }
    P1Field { values: num.iter().zip(&den).map(|(n, d)| n / d).collect() }
}

fn check_len(what: &'static str, got: usize, expected: usize) -> Result<(), AssemblyError> {
    if got == expected {
        Ok(())
    } else {
        Err(AssemblyError::DimensionMismatch { what, expected, got })
    }
}
