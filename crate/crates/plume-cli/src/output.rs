//! Deterministic writers for run artifacts.
//!
//! Every byte of the CSV and VTK outputs is a pure function of the solver
//! results: floats are rendered with the shortest round-trippable decimal
//! form (`Display`), rows follow mesh index order, and files are written
//! atomically (temp file + rename) so readers never observe partial output.
//! Timings and other wall-clock facts belong in the run report, never in
//! these files.

use plume::assembly::{P0Field, RT0Field};
use plume::darcy::{DarcySolution, StudyTable};
use plume::mesh::Mesh;
use plume::transport::StabilityLedger;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

/// Write `content` to `path` atomically: stage in a temporary file in the
/// same directory, then rename over the destination.
pub fn atomic_write(path: &Path, content: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(content.as_bytes())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// `cell,x,y,c` — one row per cell, centroid coordinates.
pub fn concentration_csv(mesh: &Mesh, c: &P0Field) -> String {
    let mut s = String::from("cell,x,y,c\n");
    for (i, cell) in mesh.cells.iter().enumerate() {
        let _ = writeln!(s, "{i},{},{},{}", cell.centroid[0], cell.centroid[1], c.values[i]);
    }
    s
}

/// `edge,coefficient` — signed constant normal component per edge.
pub fn flux_csv(flux: &RT0Field) -> String {
    let mut s = String::from("edge,coefficient\n");
    for (i, v) in flux.coeffs.iter().enumerate() {
        let _ = writeln!(s, "{i},{v}");
    }
    s
}

/// `cell,x,y,head,vx,vy` — pressure head and centroid velocity per cell.
pub fn darcy_csv(mesh: &Mesh, sol: &DarcySolution) -> String {
    let mut s = String::from("cell,x,y,head,vx,vy\n");
    for (i, cell) in mesh.cells.iter().enumerate() {
        let _ = writeln!(
            s,
            "{i},{},{},{},{},{}",
            cell.centroid[0],
            cell.centroid[1],
            sol.head.values[i],
            sol.cell_velocity[i][0],
            sol.cell_velocity[i][1]
        );
    }
    s
}

/// `vertex,x,y,head` — area-weighted vertex average of the cell heads,
/// convenient for contour plotting.
pub fn vertex_head_csv(mesh: &Mesh, sol: &DarcySolution) -> String {
    let head = sol.vertex_head(mesh);
    let mut s = String::from("vertex,x,y,head\n");
    for (i, v) in mesh.vertices.iter().enumerate() {
        let _ = writeln!(s, "{i},{},{},{}", v[0], v[1], head.values[i]);
    }
    s
}

/// `step,time,c_l2,vc_l2,min_c` — one row per time step (step 0 included).
pub fn ledger_csv(ledger: &StabilityLedger) -> String {
    let mut s = String::from("step,time,c_l2,vc_l2,min_c\n");
    for r in &ledger.rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.step, r.time, r.c_l2, r.vc_l2, r.min_c);
    }
    s
}

/// Legacy-ASCII VTK unstructured grid with cellwise concentration and flux
/// vectors, loadable by ParaView and friends.
pub fn vtk_snapshot(mesh: &Mesh, title: &str, c: &P0Field, vc: &RT0Field) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{title}");
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{} {} 0", v[0], v[1]);
    }
    let _ = writeln!(s, "CELLS {} {}", mesh.cells.len(), 4 * mesh.cells.len());
    for cell in &mesh.cells {
        let _ = writeln!(s, "3 {} {} {}", cell.v[0], cell.v[1], cell.v[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.cells.len());
    for _ in &mesh.cells {
        let _ = writeln!(s, "5");
    }
    let _ = writeln!(s, "CELL_DATA {}", mesh.cells.len());
    let _ = writeln!(s, "SCALARS c double 1");
    let _ = writeln!(s, "LOOKUP_TABLE default");
    for v in &c.values {
        let _ = writeln!(s, "{v}");
    }
    let _ = writeln!(s, "VECTORS flux double");
    for (i, cell) in mesh.cells.iter().enumerate() {
        let v = vc.value_in_cell(mesh, i, cell.centroid);
        let _ = writeln!(s, "{} {} 0", v[0], v[1]);
    }
    s
}

/// Flow convergence ladder:
/// `case,n,h,err_v,err_v_interp,err_phi,err_phi_interp,vmax,order_v,order_phi`
/// (orders empty on each case's coarsest row).
pub fn study_csv(tables: &[StudyTable]) -> String {
    let mut s =
        String::from("case,n,h,err_v,err_v_interp,err_phi,err_phi_interp,vmax,order_v,order_phi\n");
    for t in tables {
        for (i, r) in t.rows.iter().enumerate() {
            let (ov, op) = if i == 0 {
                (String::new(), String::new())
            } else {
                (t.orders_v[i - 1].to_string(), t.orders_phi[i - 1].to_string())
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{ov},{op}",
                t.case_name, r.n, r.h, r.err_v, r.err_v_interp, r.err_phi, r.err_phi_interp, r.vmax
            );
        }
    }
    s
}
