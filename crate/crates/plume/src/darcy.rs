//! Mixed discretization of the Darcy subproblem: find the flux `v` and head
//! `phi` with `kappa^{-1} v + grad phi = 0` and `div v = g`.
//!
//! The flux lives in the lowest-order div-conforming space, the head in
//! cellwise constants, and the pair solves the symmetric saddle system
//!
//! ```text
//! [ A   -B^T ] [ v   ]   [ -boundary head term ]
//! [ -B   0   ] [ phi ] = [ -(g, w)             ]
//! ```
//!
//! with `A` the `kappa^{-1}`-weighted flux mass matrix and `B` the divergence.
//! A zero head on the boundary is the natural condition (no constraint on the
//! flux space); prescribed head data only shifts the right-hand side. The
//! no-flow mode instead constrains boundary flux coefficients to zero and
//! pins the head's constant nullspace with a zero-mean multiplier, which
//! requires the source to have zero total integral.

use crate::assembly::{
    self, assemble_div, assemble_rt0_weighted_mass, mat2, P0Field, P1Field, RT0Field, SparseMatrix,
};
use crate::mesh::Mesh;
use crate::quadrature::{integrate_tri, TRI_DEGREE5};
use crate::solver::{self, SolverError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DarcyError {
    #[error(transparent)]
    Assembly(#[from] assembly::AssemblyError),
    #[error(transparent)]
    Mesh(#[from] crate::mesh::MeshError),
    #[error("linear solve failed: {0}")]
    Solver(#[from] SolverError),
    #[error("cell {cell}: permeability tensor is not symmetric positive definite")]
    NonSpdPermeability { cell: usize },
    #[error("no-flow problem needs a zero-mean source; integral of g is {integral:e}")]
    IncompatibleSource { integral: f64 },
    #[error("boundary head data is only meaningful with the prescribed-head mode")]
    BoundaryHeadWithNoFlow,
    #[error("{what}: expected {expected}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },
}

/// Boundary condition on the flow problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DarcyMode {
    /// Head prescribed on the whole boundary (zero unless boundary data is given).
    Dirichlet,
    /// No-flow: `v . n = 0` on the whole boundary; head pinned to zero mean.
    Neumann,
}

#[derive(Debug, Clone)]
pub struct DarcyProblem {
    /// Per-cell SPD permeability.
    pub kappa: Vec<mat2::Mat2>,
    /// Source, `div v = g`.
    pub g: P0Field,
    pub mode: DarcyMode,
    /// Optional per-edge averages of prescribed boundary head (only the
    /// boundary entries are read; interior entries are ignored). `None`
    /// means homogeneous data.
    pub boundary_head: Option<Vec<f64>>,
}

impl DarcyProblem {
    pub fn uniform(mesh: &Mesh, kappa: mat2::Mat2, g: P0Field, mode: DarcyMode) -> Self {
        DarcyProblem {
            kappa: assembly::uniform_tensors(mesh, kappa),
            g,
            mode,
            boundary_head: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DarcySolution {
    pub flux: RT0Field,
    pub head: P0Field,
    /// Flux evaluated at cell centroids (the frozen velocity for transport).
    pub cell_velocity: Vec<[f64; 2]>,
    /// Exact `L^inf` norm of the flux field.
    pub vmax: f64,
}

impl DarcySolution {
    /// All-zero solution (still water); useful as a transport input.
    pub fn zero(mesh: &Mesh) -> Self {
        DarcySolution {
            flux: RT0Field::zeros(mesh),
            head: P0Field::zeros(mesh),
            cell_velocity: vec![[0.0, 0.0]; mesh.cells.len()],
            vmax: 0.0,
        }
    }

    /// Vertex-averaged head for smooth output (postprocessing only).
    pub fn vertex_head(&self, mesh: &Mesh) -> P1Field {
        assembly::vertex_average(mesh, &self.head)
    }
}

/// Assemble and solve the mixed system.
pub fn solve(mesh: &Mesh, problem: &DarcyProblem) -> Result<DarcySolution, DarcyError> {
    let nc = mesh.cells.len();
    let ne = mesh.edges.len();
    if problem.kappa.len() != nc {
        return Err(DarcyError::DimensionMismatch {
            what: "kappa",
            expected: nc,
            got: problem.kappa.len(),
        });
    }
    if problem.g.values.len() != nc {
        return Err(DarcyError::DimensionMismatch {
            what: "g",
            expected: nc,
            got: problem.g.values.len(),
        });
    }
    if let Some(bh) = &problem.boundary_head {
        if problem.mode == DarcyMode::Neumann {
            return Err(DarcyError::BoundaryHeadWithNoFlow);
        }
        if bh.len() != ne {
            return Err(DarcyError::DimensionMismatch {
                what: "boundary_head",
                expected: ne,
                got: bh.len(),
            });
        }
    }

    let kappa_inv: Vec<mat2::Mat2> = problem
        .kappa
        .iter()
        .enumerate()
        .map(|(ci, k)| {
            if mat2::is_spd(k) {
                Ok(mat2::inv(k))
            } else {
                Err(DarcyError::NonSpdPermeability { cell: ci })
            }
        })
        .collect::<Result<_, _>>()?;

    let a = assemble_rt0_weighted_mass(mesh, &kappa_inv)?;
    let b = assemble_div(mesh);

    // Active flux unknowns: all edges, or interior edges in no-flow mode.
    let active: Vec<usize> = match problem.mode {
        DarcyMode::Dirichlet => (0..ne).collect(),
        DarcyMode::Neumann => (0..ne).filter(|&e| !mesh.edges[e].is_boundary()).collect(),
    };
    let mut active_index = vec![usize::MAX; ne];
    for (i, &e) in active.iter().enumerate() {
        active_index[e] = i;
    }
    let na = active.len();
    let pin_mean = problem.mode == DarcyMode::Neumann;
    let n = na + nc + usize::from(pin_mean);

    if pin_mean {
        let integral: f64 = mesh
            .cells
            .iter()
            .zip(&problem.g.values)
            .map(|(cell, g)| cell.area * g)
            .sum();
        let scale: f64 = mesh
            .cells
            .iter()
            .zip(&problem.g.values)
            .map(|(cell, g)| cell.area * g.abs())
            .sum();
        if integral.abs() > 1e-10 * scale.max(1.0) {
            return Err(DarcyError::IncompatibleSource { integral });
        }
    }

    let mut sys = SparseMatrix::new(n, n);
    for &(e, f, v) in a.triplets() {
        let (ia, ib) = (active_index[e], active_index[f]);
        if ia != usize::MAX && ib != usize::MAX {
            sys.push(ia, ib, v);
        }
    }
    for &(t, e, v) in b.triplets() {
        if active_index[e] != usize::MAX {
            sys.push(active_index[e], na + t, -v); // -B^T
            sys.push(na + t, active_index[e], -v); // -B
        }
    }
    if pin_mean {
        for (t, cell) in mesh.cells.iter().enumerate() {
            sys.push(na + t, n - 1, cell.area);
            sys.push(n - 1, na + t, cell.area);
        }
    }

    let mut rhs = vec![0.0; n];
    if let Some(bh) = &problem.boundary_head {
        for &e in &mesh.boundary_edges {
            // Natural boundary term: -(phi_D, u_e . n)_e = -|e| * average.
            rhs[active_index[e]] = -mesh.edges[e].length * bh[e];
        }
    }
    for (t, cell) in mesh.cells.iter().enumerate() {
        rhs[na + t] = -cell.area * problem.g.values[t];
    }

    let x = solver::solve(&sys, &rhs)?;

    let mut flux = RT0Field::zeros(mesh);
    for (i, &e) in active.iter().enumerate() {
        flux.coeffs[e] = x[i];
    }
    let head = P0Field { values: x[na..na + nc].to_vec() };
    let cell_velocity = flux.centroid_values(mesh);
    let vmax = flux.max_norm(mesh);
    Ok(DarcySolution { flux, head, cell_velocity, vmax })
}

/// A flow problem with known exact solution, for convergence studies.
#[derive(Debug, Clone, Copy)]
pub struct ManufacturedCase {
    pub name: &'static str,
    pub kappa: mat2::Mat2,
    pub phi: fn([f64; 2]) -> f64,
    pub velocity: fn([f64; 2]) -> [f64; 2],
    pub source: fn([f64; 2]) -> f64,
    /// Supply the trace of `phi` as boundary data (needed when it is nonzero).
    pub boundary_data: bool,
}

const PI: f64 = std::f64::consts::PI;

impl ManufacturedCase {
    /// `phi = sin(pi x) sin(pi y)`, `kappa = I`: `g = 2 pi^2 sin sin`, zero trace.
    pub fn sin_sin_identity() -> Self {
        ManufacturedCase {
            name: "sin-sin, isotropic",
            kappa: mat2::identity(),
            phi: |x| (PI * x[0]).sin() * (PI * x[1]).sin(),
            velocity: |x| {
                [
                    -PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
                    -PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
                ]
            },
            source: |x| 2.0 * PI * PI * (PI * x[0]).sin() * (PI * x[1]).sin(),
            boundary_data: false,
        }
    }

    /// Same head with `kappa = diag(2, 1)`: `g = 3 pi^2 sin sin`.
    pub fn sin_sin_anisotropic() -> Self {
        ManufacturedCase {
            name: "sin-sin, diag(2,1)",
            kappa: [[2.0, 0.0], [0.0, 1.0]],
            phi: |x| (PI * x[0]).sin() * (PI * x[1]).sin(),
            velocity: |x| {
                [
                    -2.0 * PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
                    -PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
                ]
            },
            source: |x| 3.0 * PI * PI * (PI * x[0]).sin() * (PI * x[1]).sin(),
            boundary_data: true, // trace is zero on the unit square, but keep the general path honest
        }
    }

    /// Linear head `phi = x + 2y`: constant velocity `(-1, -2)`, zero source.
    /// Both exact fields lie in the discrete spaces (patch test).
    pub fn linear_patch() -> Self {
        ManufacturedCase {
            name: "linear patch",
            kappa: mat2::identity(),
            phi: |x| x[0] + 2.0 * x[1],
            velocity: |_| [-1.0, -2.0],
            source: |_| 0.0,
            boundary_data: true,
        }
    }

    /// Assemble the discrete problem for this case on `mesh`.
    pub fn problem(&self, mesh: &Mesh) -> DarcyProblem {
        let g = assembly::project_p0(mesh, self.source);
        let boundary_head = self.boundary_data.then(|| {
            let mut bh = vec![0.0; mesh.edges.len()];
            for &e in &mesh.boundary_edges {
                bh[e] = assembly::edge_average(mesh, e, self.phi);
            }
            bh
        });
        DarcyProblem {
            kappa: assembly::uniform_tensors(mesh, self.kappa),
            g,
            mode: DarcyMode::Dirichlet,
            boundary_head,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StudyRow {
    pub n: usize,
    pub h: f64,
    /// Flux error against the exact field (degree-5 quadrature).
    pub err_v: f64,
    /// Flux error against the flux interpolant of the exact field.
    pub err_v_interp: f64,
    /// Head error against the exact field.
    pub err_phi: f64,
    /// Head error against the cell-average interpolant.
    pub err_phi_interp: f64,
    pub vmax: f64,
}

#[derive(Debug, Clone)]
pub struct StudyTable {
    pub case_name: &'static str,
    pub rows: Vec<StudyRow>,
    /// Observed orders between consecutive rows, from the exact-field errors.
    pub orders_v: Vec<f64>,
    pub orders_phi: Vec<f64>,
    /// False when an error sequence fails to decrease monotonically.
    pub monotone: bool,
}

impl StudyTable {
    pub fn render(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "case: {}", self.case_name);
        let _ = writeln!(
            s,
            "{:>5} {:>10} {:>12} {:>12} {:>12} {:>12} {:>9}",
            "n", "h", "err_v", "err_v_int", "err_phi", "err_phi_int", "vmax"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>5} {:>10.4e} {:>12.5e} {:>12.5e} {:>12.5e} {:>12.5e} {:>9.4}",
                r.n, r.h, r.err_v, r.err_v_interp, r.err_phi, r.err_phi_interp, r.vmax
            );
        }
        let fmt = |o: &[f64]| o.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(", ");
        let _ = writeln!(s, "orders (v): {}", fmt(&self.orders_v));
        let _ = writeln!(s, "orders (phi): {}", fmt(&self.orders_phi));
        if !self.monotone {
            let _ = writeln!(s, "warning: non-monotone error sequence");
        }
        s
    }
}

/// Solve `case` on a ladder of structured meshes and tabulate errors.
pub fn convergence_study(case: &ManufacturedCase, ns: &[usize]) -> Result<StudyTable, DarcyError> {
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let mesh = Mesh::structured_unit(n)?;
        let sol = solve(&mesh, &case.problem(&mesh))?;

        let mut err_v2 = 0.0;
        let mut err_phi2 = 0.0;
        for (ci, cell) in mesh.cells.iter().enumerate() {
            let (pa, pb, pc) =
                (mesh.vertices[cell.v[0]], mesh.vertices[cell.v[1]], mesh.vertices[cell.v[2]]);
            err_v2 += integrate_tri(&TRI_DEGREE5, pa, pb, pc, |x| {
                let d = crate::mesh::v2::sub((case.velocity)(x), sol.flux.value_in_cell(&mesh, ci, x));
                crate::mesh::v2::dot(d, d)
            });
            err_phi2 += integrate_tri(&TRI_DEGREE5, pa, pb, pc, |x| {
                ((case.phi)(x) - sol.head.values[ci]).powi(2)
            });
        }

        let v_interp = assembly::project_rt0(&mesh, case.velocity);
        let diff = RT0Field {
            coeffs: v_interp
                .coeffs
                .iter()
                .zip(&sol.flux.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        };
        let phi_interp = assembly::project_p0(&mesh, case.phi);
        let phi_diff = P0Field {
            values: phi_interp
                .values
                .iter()
                .zip(&sol.head.values)
                .map(|(a, b)| a - b)
                .collect(),
        };

        rows.push(StudyRow {
            n,
            h: mesh.h(),
            err_v: err_v2.sqrt(),
            err_v_interp: diff.l2_norm(&mesh),
            err_phi: err_phi2.sqrt(),
            err_phi_interp: phi_diff.l2_norm(&mesh),
            vmax: sol.vmax,
        });
    }

    let order = |e0: f64, e1: f64, h0: f64, h1: f64| (e0 / e1).ln() / (h0 / h1).ln();
    let mut orders_v = Vec::new();
    let mut orders_phi = Vec::new();
    let mut monotone = true;
    for w in rows.windows(2) {
        orders_v.push(order(w[0].err_v, w[1].err_v, w[0].h, w[1].h));
        orders_phi.push(order(w[0].err_phi, w[1].err_phi, w[0].h, w[1].h));
        monotone &= w[1].err_v <= w[0].err_v && w[1].err_phi <= w[0].err_phi;
    }
    Ok(StudyTable { case_name: case.name, rows, orders_v, orders_phi, monotone })
}
