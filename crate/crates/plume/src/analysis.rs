//! Discrete norms and trajectory diagnostics: the jump-based discrete H¹
//! norm, the norm-majorization ratio, piecewise-linear time interpolation,
//! error norms against closed forms or finer grids, and observed-order
//! tables for convergence studies.

use crate::assembly::{P0Field, RT0Field};
use crate::mesh::{v2, Mesh};
use crate::quadrature::{integrate_tri, TRI_DEGREE5};
use crate::transport::{TransportMode, TransportState};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("time {t} outside the trajectory range [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("{what}: expected {expected} entries, got {got}")]
    LengthMismatch { what: &'static str, expected: usize, got: usize },
    #[error("meshes do not nest: {0}")]
    MeshMismatch(String),
}

/// Jump seminorm `(sum_edges sigma (c_i - c_j)^2)^{1/2}`. Boundary edges
/// contribute `(c_i - 0)^2` in Dirichlet mode (ghost value zero) and are
/// omitted in Neumann mode, where the result is a seminorm vanishing
/// exactly on constants.
pub fn discrete_h1_norm(mesh: &Mesh, c: &P0Field, mode: TransportMode) -> f64 {
    debug_assert_eq!(c.values.len(), mesh.cells.len());
    let mut sum = 0.0;
    for edge in &mesh.edges {
        let ci = c.values[edge.cells.0];
        let jump = match edge.cells.1 {
            Some(other) => ci - c.values[other],
            None => match mode {
                TransportMode::Dirichlet => ci,
                TransportMode::Neumann => continue,
            },
        };
        sum += edge.sigma * jump * jump;
    }
    sum.sqrt()
}

#[derive(Debug, Clone, Copy)]
pub struct DiscreteNormReport {
    pub h1: f64,
    pub l2: f64,
    pub flux_l2: f64,
    /// `h1 / (flux_l2 + l2)`; absent when the denominator vanishes.
    pub ratio: Option<f64>,
}

pub fn norm_report(mesh: &Mesh, state: &TransportState, mode: TransportMode) -> DiscreteNormReport {
    let h1 = discrete_h1_norm(mesh, &state.c, mode);
    let l2 = state.c.l2_norm(mesh);
    let flux_l2 = state.vc.l2_norm(mesh);
    let denom = flux_l2 + l2;
    DiscreteNormReport {
        h1,
        l2,
        flux_l2,
        ratio: (denom > 0.0).then(|| h1 / denom),
    }
}

/// Largest ratio `||c||_{1,h} / (||vc|| + ||c||)` along a trajectory; `None`
/// when every state is identically zero. The discrete H¹ norm is controlled
/// by the right-hand side with a mesh-independent constant, so this maximum
/// should stay bounded under refinement.
pub fn check_majorization(
    mesh: &Mesh,
    states: &[TransportState],
    mode: TransportMode,
) -> Option<f64> {
    states
        .iter()
        .filter_map(|s| norm_report(mesh, s, mode).ratio)
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))))
}

/// Piecewise-linear interpolant through the stored states, evaluated at `t`:
/// on `(t_{n-1}, t_n]` it is the convex combination of the two neighbors.
/// States need not be uniformly spaced (cadence-sampled output works).
pub fn time_interpolant(
    states: &[TransportState],
    t: f64,
) -> Result<(P0Field, RT0Field), AnalysisError> {
    let (first, last) = match (states.first(), states.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(AnalysisError::EmptyTrajectory),
    };
    let tol = 1e-12 * last.time.abs().max(1.0);
    if t < first.time - tol || t > last.time + tol {
        return Err(AnalysisError::TimeOutOfRange { t, start: first.time, end: last.time });
    }
    let t = t.clamp(first.time, last.time);
    let i = states.partition_point(|s| s.time < t);
    if i == 0 {
        return Ok((first.c.clone(), first.vc.clone()));
    }
    let (a, b) = (&states[i - 1], &states[i]);
    let theta = (t - a.time) / (b.time - a.time);
    let lerp = |x: f64, y: f64| (1.0 - theta) * x + theta * y;
    Ok((
        P0Field {
            values: a.c.values.iter().zip(&b.c.values).map(|(&x, &y)| lerp(x, y)).collect(),
        },
        RT0Field {
            coeffs: a.vc.coeffs.iter().zip(&b.vc.coeffs).map(|(&x, &y)| lerp(x, y)).collect(),
        },
    ))
}

#[derive(Debug, Clone, Copy)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1: f64,
}

/// `L^2` and discrete-H¹ norms of `field - reference` on a shared mesh.
pub fn error_norms(
    mesh: &Mesh,
    field: &P0Field,
    reference: &P0Field,
    mode: TransportMode,
) -> Result<ErrorNorms, AnalysisError> {
    if field.values.len() != reference.values.len() || field.values.len() != mesh.cells.len() {
        return Err(AnalysisError::LengthMismatch {
            what: "error fields",
            expected: mesh.cells.len(),
            got: field.values.len().min(reference.values.len()),
        });
    }
    let diff = P0Field {
        values: field.values.iter().zip(&reference.values).map(|(a, b)| a - b).collect(),
    };
    Ok(ErrorNorms {
        l2: diff.l2_norm(mesh),
        h1: discrete_h1_norm(mesh, &diff, mode),
    })
}

/// Quadrature-based `L^2` distance between a cellwise-constant field and a
/// closed-form reference.
pub fn l2_error_vs_function(
    mesh: &Mesh,
    field: &P0Field,
    mut f: impl FnMut([f64; 2]) -> f64,
) -> f64 {
    let mut sum = 0.0;
    for (ci, cell) in mesh.cells.iter().enumerate() {
        let (a, b, c) =
            (mesh.vertices[cell.v[0]], mesh.vertices[cell.v[1]], mesh.vertices[cell.v[2]]);
        let value = field.values[ci];
        sum += integrate_tri(&TRI_DEGREE5, a, b, c, |x| (f(x) - value).powi(2));
    }
    sum.sqrt()
}

/// Observed convergence orders `log(e_k / e_{k+1}) / log(h_k / h_{k+1})`
/// between consecutive rows.
pub fn observed_orders(hs: &[f64], errors: &[f64]) -> Vec<f64> {
    assert_eq!(hs.len(), errors.len());
    hs.windows(2)
        .zip(errors.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub h: f64,
    pub tau: f64,
    /// One error per tracked norm, in table column order.
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub norms: Vec<String>,
    pub rows: Vec<ConvergenceRow>,
    /// `orders[k]` are the observed orders of norm column `k`.
    pub orders: Vec<Vec<f64>>,
}

impl ConvergenceTable {
    /// Build a table; rows must come with strictly decreasing `h` and one
    /// error per norm.
    pub fn new(norms: Vec<String>, rows: Vec<ConvergenceRow>) -> Result<Self, AnalysisError> {
        for row in &rows {
            if row.errors.len() != norms.len() {
                return Err(AnalysisError::LengthMismatch {
                    what: "convergence table row",
                    expected: norms.len(),
                    got: row.errors.len(),
                });
            }
        }
        if rows.windows(2).any(|w| w[1].h >= w[0].h) {
            return Err(AnalysisError::MeshMismatch(
                "convergence rows must have strictly decreasing h".into(),
            ));
        }
        let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let orders = (0..norms.len())
            .map(|k| {
                let errs: Vec<f64> = rows.iter().map(|r| r.errors[k]).collect();
                observed_orders(&hs, &errs)
            })
            .collect();
        Ok(ConvergenceTable { norms, rows, orders })
    }

    pub fn render(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = write!(s, "{:>10} {:>10}", "h", "tau");
        for n in &self.norms {
            let _ = write!(s, " {:>12} {:>7}", n, "order");
        }
        let _ = writeln!(s);
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(s, "{:>10.4e} {:>10.4e}", row.h, row.tau);
            for (k, e) in row.errors.iter().enumerate() {
                let _ = write!(s, " {:>12.5e}", e);
                if i == 0 {
                    let _ = write!(s, " {:>7}", "-");
                } else {
                    let _ = write!(s, " {:>7.3}", self.orders[k][i - 1]);
                }
            }
            let _ = writeln!(s);
        }
        s
    }
}

/// Uniform-bin point locator over a mesh's cells.
struct CellLocator {
    x0: f64,
    y0: f64,
    inv_dx: f64,
    inv_dy: f64,
    nx: usize,
    ny: usize,
    bins: Vec<Vec<usize>>,
}

impl CellLocator {
    fn new(mesh: &Mesh) -> Self {
        let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
        for v in &mesh.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let n = ((mesh.cells.len() as f64 / 2.0).sqrt().ceil() as usize).max(1);
        let (nx, ny) = (n, n);
        let dx = ((hi[0] - lo[0]) / nx as f64).max(f64::MIN_POSITIVE);
        let dy = ((hi[1] - lo[1]) / ny as f64).max(f64::MIN_POSITIVE);
        let mut bins = vec![Vec::new(); nx * ny];
        let clamp = |v: f64, n: usize| (v.max(0.0) as usize).min(n - 1);
        for (ci, cell) in mesh.cells.iter().enumerate() {
            let vs = cell.v.map(|v| mesh.vertices[v]);
            let bx0 = clamp(((vs.iter().map(|v| v[0]).fold(f64::MAX, f64::min)) - lo[0]) / dx, nx);
            let bx1 = clamp(((vs.iter().map(|v| v[0]).fold(f64::MIN, f64::max)) - lo[0]) / dx, nx);
            let by0 = clamp(((vs.iter().map(|v| v[1]).fold(f64::MAX, f64::min)) - lo[1]) / dy, ny);
            let by1 = clamp(((vs.iter().map(|v| v[1]).fold(f64::MIN, f64::max)) - lo[1]) / dy, ny);
            for by in by0..=by1 {
                for bx in bx0..=bx1 {
                    bins[by * nx + bx].push(ci);
                }
            }
        }
        CellLocator { x0: lo[0], y0: lo[1], inv_dx: 1.0 / dx, inv_dy: 1.0 / dy, nx, ny, bins }
    }

    fn locate(&self, mesh: &Mesh, p: [f64; 2]) -> Option<usize> {
        let bx = (((p[0] - self.x0) * self.inv_dx).max(0.0) as usize).min(self.nx - 1);
        let by = (((p[1] - self.y0) * self.inv_dy).max(0.0) as usize).min(self.ny - 1);
        self.bins[by * self.nx + bx]
            .iter()
            .copied()
            .find(|&ci| contains(mesh, ci, p))
    }
}

fn contains(mesh: &Mesh, ci: usize, p: [f64; 2]) -> bool {
    let cell = &mesh.cells[ci];
    let tol = -1e-10 * cell.area;
    // CCW orientation: all cross products nonnegative inside.
    (0..3).all(|k| {
        let a = mesh.vertices[cell.v[k]];
        let b = mesh.vertices[cell.v[(k + 1) % 3]];
        v2::cross(v2::sub(b, a), v2::sub(p, a)) >= tol
    })
}

/// Area-weighted restriction of a fine cellwise field onto a coarser nested
/// mesh (the `L^2` projection for nested cells). Each fine cell is assigned
/// by centroid location; coverage is checked cellwise, so non-nested meshes
/// are rejected rather than silently misweighted.
pub fn restrict_p0(
    fine_mesh: &Mesh,
    field: &P0Field,
    coarse_mesh: &Mesh,
) -> Result<P0Field, AnalysisError> {
    if field.values.len() != fine_mesh.cells.len() {
        return Err(AnalysisError::LengthMismatch {
            what: "fine field",
            expected: fine_mesh.cells.len(),
            got: field.values.len(),
        });
    }
    let locator = CellLocator::new(coarse_mesh);
    let nc = coarse_mesh.cells.len();
    let mut sums = vec![0.0; nc];
    let mut covered = vec![0.0; nc];
    for (fi, cell) in fine_mesh.cells.iter().enumerate() {
        let target = locator.locate(coarse_mesh, cell.centroid).ok_or_else(|| {
            AnalysisError::MeshMismatch(format!(
                "fine cell {fi} (centroid {:?}) lies outside the coarse mesh",
                cell.centroid
            ))
        })?;
        sums[target] += cell.area * field.values[fi];
        covered[target] += cell.area;
    }
    for (ci, cell) in coarse_mesh.cells.iter().enumerate() {
        if (covered[ci] - cell.area).abs() > 1e-8 * cell.area {
            return Err(AnalysisError::MeshMismatch(format!(
                "coarse cell {ci} covered by fine area {} but has area {}",
                covered[ci], cell.area
            )));
        }
    }
    Ok(P0Field {
        values: sums.iter().zip(&coarse_mesh.cells).map(|(s, c)| s / c.area).collect(),
    })
}
