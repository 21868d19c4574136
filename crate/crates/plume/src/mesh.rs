//! Conforming triangle meshes with the connectivity needed by lowest-order
//! mixed elements and finite-volume norms.
//!
//! Every edge carries a globally oriented unit normal (from the lower to the
//! higher adjacent cell index, outward on the boundary) so that one signed
//! flux coefficient per edge describes a div-conforming field without any
//! per-cell bookkeeping. Edges also carry the transmissibility distance
//! `d` between adjacent circumcenters and the ratio `sigma = length / d`
//! used by the discrete H1 norm; meshes whose circumcenters collide (the
//! structured right-triangle meshes do this across every diagonal) fall back
//! to centroid distances, and the rule that fired is recorded per edge.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

/// Relative threshold (times the mesh size h) below which the circumcenter
/// distance is considered degenerate and the centroid fallback fires.
pub const DISTANCE_FALLBACK_REL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid mesh parameter: {0}")]
    InvalidParam(String),
    #[error("cell {cell} is degenerate (zero area)")]
    DegenerateCell { cell: usize },
    #[error("cell {second} duplicates cell {first}")]
    DuplicateCell { first: usize, second: usize },
    #[error("edge ({a}, {b}) is shared by more than two cells (cell {cell})")]
    NonConformingEdge { a: usize, b: usize, cell: usize },
    #[error("vertex {vertex} has {count} boundary edges (expected 0 or 2)")]
    BrokenBoundary { vertex: usize, count: usize },
    #[error("vertex {vertex} is not referenced by any cell")]
    UnusedVertex { vertex: usize },
    #[error("edge ({a}, {b}) has zero transmissibility distance even after centroid fallback")]
    ZeroDistance { a: usize, b: usize },
}

/// Which distance entered `sigma = length / d` for an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceRule {
    Circumcenter,
    CentroidFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Endpoint vertex ids, lower id first.
    pub v: (usize, usize),
    /// Adjacent cells; lower cell id first, `None` on the boundary.
    pub cells: (usize, Option<usize>),
    pub length: f64,
    pub midpoint: [f64; 2],
    /// Unit normal pointing from `cells.0` into `cells.1` (outward on the boundary).
    pub normal: [f64; 2],
    /// Circumcenter distance between the adjacent cells (circumcenter-to-edge
    /// for boundary edges), with centroid fallback.
    pub d: f64,
    /// `length / d`, the finite-volume edge coefficient.
    pub sigma: f64,
    pub rule: DistanceRule,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.cells.1.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Vertex ids in counter-clockwise order.
    pub v: [usize; 3],
    /// `edges[k]` is the edge opposite `v[k]`.
    pub edges: [usize; 3],
    /// `signs[k]` is +1 when the global normal of `edges[k]` points out of this cell.
    pub signs: [f64; 3],
    pub area: f64,
    pub centroid: [f64; 2],
    pub circumcenter: [f64; 2],
    /// Longest edge length.
    pub diameter: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<Cell>,
    pub edges: Vec<Edge>,
    /// Ids of boundary edges, ascending.
    pub boundary_edges: Vec<usize>,
    h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshMetrics {
    /// Largest cell diameter.
    pub h: f64,
    /// Largest diameter over smallest inscribed-circle diameter.
    pub quasi_uniformity: f64,
    pub min_area: f64,
    pub total_area: f64,
    /// Number of edges whose distance used the centroid fallback.
    pub fallback_edges: usize,
}

impl Mesh {
    /// Largest cell diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn metrics(&self) -> MeshMetrics {
        let mut min_incircle = f64::INFINITY;
        let mut min_area = f64::INFINITY;
        let mut total_area = 0.0;
        for c in &self.cells {
            let perimeter: f64 = c.edges.iter().map(|&e| self.edges[e].length).sum();
            min_incircle = min_incircle.min(4.0 * c.area / perimeter);
            min_area = min_area.min(c.area);
            total_area += c.area;
        }
        MeshMetrics {
            h: self.h,
            quasi_uniformity: self.h / min_incircle,
            min_area,
            total_area,
            fallback_edges: self
                .edges
                .iter()
                .filter(|e| e.rule == DistanceRule::CentroidFallback)
                .count(),
        }
    }

    /// Build a mesh from raw vertices and cell vertex triples.
    ///
    /// Cells are re-oriented counter-clockwise if needed. Degenerate cells,
    /// duplicated cells, edges with more than two adjacent cells, broken
    /// boundary loops, and unreferenced vertices are rejected.
    pub fn from_cells(vertices: Vec<[f64; 2]>, cell_verts: Vec<[usize; 3]>) -> Result<Mesh, MeshError> {
        let nv = vertices.len();
        if nv < 3 || cell_verts.is_empty() {
            return Err(MeshError::InvalidParam(format!(
                "need at least 3 vertices and 1 cell, got {} vertices, {} cells",
                nv,
                cell_verts.len()
            )));
        }

        let mut referenced = vec![false; nv];
        let mut seen = BTreeMap::<[usize; 3], usize>::new();
        let mut cells = Vec::with_capacity(cell_verts.len());
        for (ci, &vs) in cell_verts.iter().enumerate() {
            let mut v = vs;
            for &vi in &v {
                if vi >= nv {
                    return Err(MeshError::InvalidParam(format!(
                        "cell {ci} references vertex {vi} (only {nv} vertices)"
                    )));
                }
            }
            if v[0] == v[1] || v[1] == v[2] || v[0] == v[2] {
                return Err(MeshError::DegenerateCell { cell: ci });
            }
            let mut key = v;
            key.sort_unstable();
            if let Some(&first) = seen.get(&key) {
                return Err(MeshError::DuplicateCell { first, second: ci });
            }
            seen.insert(key, ci);
            for &vi in &v {
                referenced[vi] = true;
            }

            let (a, b, c) = (vertices[v[0]], vertices[v[1]], vertices[v[2]]);
            let mut two_area = v2::cross(v2::sub(b, a), v2::sub(c, a));
            if two_area < 0.0 {
                v.swap(1, 2);
                two_area = -two_area;
            }
            let (a, b, c) = (vertices[v[0]], vertices[v[1]], vertices[v[2]]);
            let diameter = v2::norm(v2::sub(b, a))
                .max(v2::norm(v2::sub(c, b)))
                .max(v2::norm(v2::sub(a, c)));
            let area = 0.5 * two_area;
            if !(area > 1e-14 * diameter * diameter) {
                return Err(MeshError::DegenerateCell { cell: ci });
            }
            cells.push(Cell {
                v,
                edges: [usize::MAX; 3],
                signs: [0.0; 3],
                area,
                centroid: [
                    (a[0] + b[0] + c[0]) / 3.0,
                    (a[1] + b[1] + c[1]) / 3.0,
                ],
                circumcenter: circumcenter(a, b, c),
                diameter,
            });
        }
        if let Some(vertex) = referenced.iter().position(|r| !r) {
            return Err(MeshError::UnusedVertex { vertex });
        }

        // Edge table keyed by sorted endpoints; deterministic (BTreeMap) and
        // adjacent cells recorded in ascending cell order.
        let mut table = BTreeMap::<(usize, usize), Vec<(usize, usize)>>::new();
        for (ci, cell) in cells.iter().enumerate() {
            for k in 0..3 {
                let (p, q) = (cell.v[(k + 1) % 3], cell.v[(k + 2) % 3]);
                let key = (p.min(q), p.max(q));
                table.entry(key).or_default().push((ci, k));
            }
        }

        let mut edges = Vec::with_capacity(table.len());
        for (&(a, b), touching) in &table {
            if touching.len() > 2 {
                return Err(MeshError::NonConformingEdge { a, b, cell: touching[2].0 });
            }
            let eid = edges.len();
            let c0 = touching[0].0;
            let c1 = touching.get(1).map(|&(c, _)| c);
            for &(ci, k) in touching {
                cells[ci].edges[k] = eid;
                cells[ci].signs[k] = if ci == c0 { 1.0 } else { -1.0 };
            }
            let (pa, pb) = (vertices[a], vertices[b]);
            let t = v2::sub(pb, pa);
            let length = v2::norm(t);
            // Rotate the edge tangent and orient the normal out of the lower cell:
            // it must have a positive component along (midpoint - opposite vertex).
            let mut normal = [t[1] / length, -t[0] / length];
            let midpoint = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let opp = opposite_vertex(&cells[c0], a, b);
            if v2::dot(normal, v2::sub(midpoint, vertices[opp])) < 0.0 {
                normal = [-normal[0], -normal[1]];
            }
            edges.push(Edge {
                v: (a, b),
                cells: (c0, c1),
                length,
                midpoint,
                normal,
                d: 0.0,
                sigma: 0.0,
                rule: DistanceRule::Circumcenter,
            });
        }

        // Boundary must form closed loops: every vertex meets 0 or 2 boundary edges.
        let mut boundary_count = vec![0usize; nv];
        for e in edges.iter().filter(|e| e.is_boundary()) {
            boundary_count[e.v.0] += 1;
            boundary_count[e.v.1] += 1;
        }
        if let Some(vertex) = boundary_count.iter().position(|&c| c != 0 && c != 2) {
            return Err(MeshError::BrokenBoundary { vertex, count: boundary_count[vertex] });
        }

        let h = cells.iter().fold(0.0f64, |m, c| m.max(c.diameter));

        // Transmissibility distances, with the centroid fallback.
        for e in &mut edges {
            let c0 = &cells[e.cells.0];
            let (primary, fallback) = match e.cells.1 {
                Some(c1) => (
                    v2::norm(v2::sub(cells[c1].circumcenter, c0.circumcenter)),
                    v2::norm(v2::sub(cells[c1].centroid, c0.centroid)),
                ),
                None => (
                    point_line_distance(c0.circumcenter, vertices[e.v.0], vertices[e.v.1]),
                    point_line_distance(c0.centroid, vertices[e.v.0], vertices[e.v.1]),
                ),
            };
            if primary < DISTANCE_FALLBACK_REL * h {
                e.d = fallback;
                e.rule = DistanceRule::CentroidFallback;
            } else {
                e.d = primary;
                e.rule = DistanceRule::Circumcenter;
            }
            if !(e.d > 0.0) {
                return Err(MeshError::ZeroDistance { a: e.v.0, b: e.v.1 });
            }
            e.sigma = e.length / e.d;
        }

        let boundary_edges = edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_boundary())
            .map(|(i, _)| i)
            .collect();

        Ok(Mesh { vertices, cells, edges, boundary_edges, h })
    }

    /// Structured triangulation of the rectangle `[x0, x1] x [y0, y1]`:
    /// an n-by-n grid of squares, each split along the lower-left to
    /// upper-right diagonal. Yields 2n^2 cells, (n+1)^2 vertices, 3n^2 + 2n edges.
    pub fn structured(n: usize, rect: [f64; 4]) -> Result<Mesh, MeshError> {
        let [x0, y0, x1, y1] = rect;
        if n == 0 {
            return Err(MeshError::InvalidParam("structured mesh needs n >= 1".into()));
        }
        if !(x1 > x0 && y1 > y0) || !rect.iter().all(|v| v.is_finite()) {
            return Err(MeshError::InvalidParam(format!(
                "invalid rectangle [{x0}, {x1}] x [{y0}, {y1}]"
            )));
        }
        let m = n + 1;
        let mut vertices = Vec::with_capacity(m * m);
        for j in 0..m {
            for i in 0..m {
                vertices.push([
                    x0 + (x1 - x0) * i as f64 / n as f64,
                    y0 + (y1 - y0) * j as f64 / n as f64,
                ]);
            }
        }
        let at = |i: usize, j: usize| j * m + i;
        let mut cells = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                cells.push([at(i, j), at(i + 1, j), at(i + 1, j + 1)]);
                cells.push([at(i, j), at(i + 1, j + 1), at(i, j + 1)]);
            }
        }
        Mesh::from_cells(vertices, cells)
    }

    /// Structured triangulation of the unit square.
    pub fn structured_unit(n: usize) -> Result<Mesh, MeshError> {
        Mesh::structured(n, [0.0, 0.0, 1.0, 1.0])
    }

    /// Load a mesh from the plain-text format:
    ///
    /// ```text
    /// vertices <V> cells <C>
    /// x y          (V lines)
    /// i j k        (C lines, 0-based vertex ids)
    /// ```
    ///
    /// Blank lines are ignored; every error cites its 1-based line number.
    pub fn load(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| MeshError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Mesh::parse(&text)
    }

    /// Parse the text mesh format; see [`Mesh::load`].
    pub fn parse(text: &str) -> Result<Mesh, MeshError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines.next().ok_or(MeshError::Parse {
            line: 1,
            msg: "empty file; expected header `vertices <V> cells <C>`".into(),
        })?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        let (nv, nc) = match tokens.as_slice() {
            ["vertices", v, "cells", c] => {
                let nv = v.parse::<usize>().map_err(|_| MeshError::Parse {
                    line: hline,
                    msg: format!("invalid vertex count {v:?}"),
                })?;
                let nc = c.parse::<usize>().map_err(|_| MeshError::Parse {
                    line: hline,
                    msg: format!("invalid cell count {c:?}"),
                })?;
                (nv, nc)
            }
            _ => {
                return Err(MeshError::Parse {
                    line: hline,
                    msg: format!("expected header `vertices <V> cells <C>`, got {header:?}"),
                })
            }
        };

        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (line, text) = lines.next().ok_or(MeshError::Parse {
                line: hline,
                msg: format!("header promises {nv} vertices but the file ends early"),
            })?;
            let parts: Vec<&str> = text.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(MeshError::Parse {
                    line,
                    msg: format!("expected `x y`, got {} fields", parts.len()),
                });
            }
            let mut xy = [0.0; 2];
            for (slot, part) in xy.iter_mut().zip(&parts) {
                *slot = part.parse::<f64>().map_err(|_| MeshError::Parse {
                    line,
                    msg: format!("invalid coordinate {part:?}"),
                })?;
                if !slot.is_finite() {
                    return Err(MeshError::Parse {
                        line,
                        msg: format!("non-finite coordinate {part:?}"),
                    });
                }
            }
            vertices.push(xy);
        }

        let mut cell_verts = Vec::with_capacity(nc);
        let mut cell_lines = Vec::with_capacity(nc);
        for _ in 0..nc {
            let (line, text) = lines.next().ok_or(MeshError::Parse {
                line: hline,
                msg: format!("header promises {nc} cells but the file ends early"),
            })?;
            let parts: Vec<&str> = text.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(MeshError::Parse {
                    line,
                    msg: format!("expected `i j k`, got {} fields", parts.len()),
                });
            }
            let mut ijk = [0usize; 3];
            for (slot, part) in ijk.iter_mut().zip(&parts) {
                *slot = part.parse::<usize>().map_err(|_| MeshError::Parse {
                    line,
                    msg: format!("invalid vertex id {part:?}"),
                })?;
                if *slot >= nv {
                    return Err(MeshError::Parse {
                        line,
                        msg: format!("vertex id {slot} out of range (file declares {nv} vertices)"),
                    });
                }
            }
            cell_verts.push(ijk);
            cell_lines.push(line);
        }
        if let Some((line, _)) = lines.next() {
            return Err(MeshError::Parse {
                line,
                msg: "unexpected content after the last cell".into(),
            });
        }

        // Re-attach line numbers to whole-mesh validation failures.
        Mesh::from_cells(vertices, cell_verts).map_err(|err| match err {
            MeshError::DegenerateCell { cell } => MeshError::Parse {
                line: cell_lines[cell],
                msg: format!("cell {cell} is degenerate (zero area)"),
            },
            MeshError::DuplicateCell { first, second } => MeshError::Parse {
                line: cell_lines[second],
                msg: format!("cell {second} duplicates cell {first}"),
            },
            MeshError::NonConformingEdge { a, b, cell } => MeshError::Parse {
                line: cell_lines[cell],
                msg: format!("edge ({a}, {b}) is shared by more than two cells"),
            },
            other => other,
        })
    }

    /// Serialize to the text format accepted by [`Mesh::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "vertices {} cells {}", self.vertices.len(), self.cells.len());
        for v in &self.vertices {
            let _ = writeln!(out, "{} {}", v[0], v[1]);
        }
        for c in &self.cells {
            let _ = writeln!(out, "{} {} {}", c.v[0], c.v[1], c.v[2]);
        }
        out
    }

    /// Vertex of `cell` opposite local edge `k` (i.e. `v[k]`, by construction).
    pub fn opposite_vertex(&self, cell: usize, k: usize) -> [f64; 2] {
        self.vertices[self.cells[cell].v[k]]
    }
}

fn opposite_vertex(cell: &Cell, a: usize, b: usize) -> usize {
    *cell.v.iter().find(|&&v| v != a && v != b).expect("edge endpoints belong to cell")
}

/// Circumcenter of a nondegenerate triangle: the point equidistant from all
/// three vertices, found from the two perpendicular-bisector equations.
pub fn circumcenter(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> [f64; 2] {
    let ab = v2::sub(b, a);
    let ac = v2::sub(c, a);
    let det = 2.0 * v2::cross(ab, ac);
    let r1 = v2::dot(ab, ab);
    let r2 = v2::dot(ac, ac);
    [
        a[0] + (r1 * ac[1] - r2 * ab[1]) / det,
        a[1] + (r2 * ab[0] - r1 * ac[0]) / det,
    ]
}

fn point_line_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let t = v2::sub(b, a);
    v2::cross(t, v2::sub(p, a)).abs() / v2::norm(t)
}

/// Minimal 2-vector helpers shared by the geometry and assembly code.
pub mod v2 {
    #[inline]
    pub fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
        [a[0] - b[0], a[1] - b[1]]
    }
    #[inline]
    pub fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
        a[0] * b[0] + a[1] * b[1]
    }
    #[inline]
    pub fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
        a[0] * b[1] - a[1] * b[0]
    }
    #[inline]
    pub fn norm(a: [f64; 2]) -> f64 {
        dot(a, a).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn structured_counts_match_closed_forms() {
        for n in 1..=8 {
            let mesh = Mesh::structured_unit(n).unwrap();
            assert_eq!(mesh.cells.len(), 2 * n * n);
            assert_eq!(mesh.vertices.len(), (n + 1) * (n + 1));
            assert_eq!(mesh.edges.len(), 3 * n * n + 2 * n);
            // Euler characteristic of a disc: V - E + F = 1.
            let (v, e, f) = (mesh.vertices.len() as i64, mesh.edges.len() as i64, mesh.cells.len() as i64);
            assert_eq!(v - e + f, 1);
            assert_eq!(mesh.boundary_edges.len(), 4 * n);
        }
    }

    #[test]
    fn structured_area_sums_to_domain_area() {
        let mesh = Mesh::structured_unit(7).unwrap();
        let total: f64 = mesh.cells.iter().map(|c| c.area).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-12);

        let mesh = Mesh::structured(5, [-1.0, 2.0, 3.0, 5.0]).unwrap();
        let total: f64 = mesh.cells.iter().map(|c| c.area).sum();
        assert_relative_eq!(total, 12.0, epsilon = 1e-12);
    }

    #[test]
    fn structured_mesh_size() {
        // Cell diameter is the square diagonal: sqrt(2)/n.
        let mesh = Mesh::structured_unit(4).unwrap();
        assert_relative_eq!(mesh.h(), 2.0f64.sqrt() / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn circumcenter_known_values() {
        // Right isoceles triangle: circumcenter at the hypotenuse midpoint.
        let cc = circumcenter([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]);
        assert_relative_eq!(cc[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(cc[1], 0.5, epsilon = 1e-15);

        let cc = circumcenter([0.0, 0.0], [2.0, 0.0], [1.0, 1.0]);
        assert_relative_eq!(cc[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(cc[1], 0.0, epsilon = 1e-14);

        // Equilateral triangle: circumcenter = centroid.
        let (a, b, c) = ([0.0, 0.0], [1.0, 0.0], [0.5, 3.0f64.sqrt() / 2.0]);
        let cc = circumcenter(a, b, c);
        assert_relative_eq!(cc[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(cc[1], (a[1] + b[1] + c[1]) / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn circumcenter_is_equidistant_on_random_triangles() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut accepted = 0;
        while accepted < 200 {
            let p: Vec<[f64; 2]> = (0..3)
                .map(|_| [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)])
                .collect();
            let two_area = v2::cross(v2::sub(p[1], p[0]), v2::sub(p[2], p[0])).abs();
            if two_area < 1e-2 {
                continue; // skip nearly-degenerate draws
            }
            accepted += 1;
            let cc = circumcenter(p[0], p[1], p[2]);
            let r0 = v2::norm(v2::sub(cc, p[0]));
            let r1 = v2::norm(v2::sub(cc, p[1]));
            let r2 = v2::norm(v2::sub(cc, p[2]));
            assert!((r0 - r1).abs() < 1e-9 * r0.max(1.0), "{r0} vs {r1}");
            assert!((r0 - r2).abs() < 1e-9 * r0.max(1.0), "{r0} vs {r2}");
        }
    }

    #[test]
    fn normals_are_unit_and_follow_orientation_rule() {
        let mesh = Mesh::structured_unit(3).unwrap();
        for e in &mesh.edges {
            assert_relative_eq!(v2::norm(e.normal), 1.0, epsilon = 1e-14);
            let c0 = &mesh.cells[e.cells.0];
            match e.cells.1 {
                Some(c1) => {
                    // Lower cell id -> higher cell id.
                    let towards = v2::sub(mesh.cells[c1].centroid, c0.centroid);
                    assert!(v2::dot(e.normal, towards) > 0.0);
                }
                None => {
                    // Outward on the boundary.
                    let outward = v2::sub(e.midpoint, c0.centroid);
                    assert!(v2::dot(e.normal, outward) > 0.0);
                }
            }
        }
    }

    #[test]
    fn cell_signs_mark_outward_edges() {
        let mesh = Mesh::structured_unit(3).unwrap();
        for (ci, cell) in mesh.cells.iter().enumerate() {
            // Outward normals scaled by edge length sum to zero over a closed cell.
            let mut sum = [0.0; 2];
            for k in 0..3 {
                let e = &mesh.edges[cell.edges[k]];
                assert_eq!(cell.signs[k], if e.cells.0 == ci { 1.0 } else { -1.0 });
                sum[0] += cell.signs[k] * e.length * e.normal[0];
                sum[1] += cell.signs[k] * e.length * e.normal[1];
            }
            assert!(v2::norm(sum) < 1e-13, "cell {ci}: {sum:?}");
        }
    }

    #[test]
    fn opposite_vertex_pairing_holds() {
        let mesh = Mesh::structured_unit(2).unwrap();
        for cell in &mesh.cells {
            for k in 0..3 {
                let e = &mesh.edges[cell.edges[k]];
                assert!(e.v.0 != cell.v[k] && e.v.1 != cell.v[k]);
            }
        }
    }

    #[test]
    fn structured_edge_coefficients() {
        // Unit square, n = 2 (cell size 0.5). Diagonal edges: the two adjacent
        // circumcenters coincide at the shared hypotenuse midpoint, so the
        // centroid fallback fires and d = sqrt(2)/3 * s, sigma = 3. Interior
        // axis-aligned edges: circumcenter distance s, sigma = 1. Boundary
        // edges: circumcenter-to-edge distance s/2, sigma = 2.
        let mesh = Mesh::structured_unit(2).unwrap();
        let s = 0.5;
        for e in &mesh.edges {
            let diagonal = (e.length - s * 2.0f64.sqrt()).abs() < 1e-12;
            if diagonal {
                assert_eq!(e.rule, DistanceRule::CentroidFallback);
                assert_relative_eq!(e.d, s * 2.0f64.sqrt() / 3.0, epsilon = 1e-12);
                assert_relative_eq!(e.sigma, 3.0, epsilon = 1e-12);
            } else if e.is_boundary() {
                assert_eq!(e.rule, DistanceRule::Circumcenter);
                assert_relative_eq!(e.sigma, 2.0, epsilon = 1e-12);
            } else {
                assert_eq!(e.rule, DistanceRule::Circumcenter);
                assert_relative_eq!(e.sigma, 1.0, epsilon = 1e-12);
            }
        }
        // One diagonal per square: n^2 = 4 fallbacks.
        assert_eq!(mesh.metrics().fallback_edges, 4);
    }

    #[test]
    fn quasi_uniformity_of_structured_meshes_is_scale_free() {
        // Right isoceles cells: diameter sqrt(2) s, incircle diameter
        // 4 (s^2/2) / (s (2 + sqrt 2)), ratio 1 + sqrt 2 for every n and scale.
        for n in [1, 3, 6] {
            let qu = Mesh::structured_unit(n).unwrap().metrics().quasi_uniformity;
            assert_relative_eq!(qu, 1.0 + 2.0f64.sqrt(), epsilon = 1e-12);
        }
        let qu = Mesh::structured(4, [0.0, 0.0, 3.0, 3.0]).unwrap().metrics().quasi_uniformity;
        assert_relative_eq!(qu, 1.0 + 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn equilateral_cell_minimizes_quasi_uniformity() {
        let equilateral = Mesh::from_cells(
            vec![[0.0, 0.0], [1.0, 0.0], [0.5, 3.0f64.sqrt() / 2.0]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let qu_eq = equilateral.metrics().quasi_uniformity;
        assert_relative_eq!(qu_eq, 3.0f64.sqrt(), epsilon = 1e-12);

        for apex in [[0.5, 0.2], [0.1, 0.9], [0.5, 2.0]] {
            let other =
                Mesh::from_cells(vec![[0.0, 0.0], [1.0, 0.0], apex], vec![[0, 1, 2]]).unwrap();
            assert!(other.metrics().quasi_uniformity > qu_eq);
        }
    }

    #[test]
    fn cells_are_reoriented_ccw() {
        // Clockwise input triple gets swapped; the mesh is otherwise identical.
        let mesh =
            Mesh::from_cells(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 2, 1]]).unwrap();
        let c = &mesh.cells[0];
        let (a, b, cc) = (mesh.vertices[c.v[0]], mesh.vertices[c.v[1]], mesh.vertices[c.v[2]]);
        assert!(v2::cross(v2::sub(b, a), v2::sub(cc, a)) > 0.0);
        assert_relative_eq!(c.area, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn parse_round_trips_structured_mesh() {
        let built = Mesh::structured_unit(1).unwrap();
        let parsed = Mesh::parse(&built.to_text()).unwrap();
        assert_eq!(parsed, built);

        let built = Mesh::structured(3, [0.0, 0.0, 2.0, 1.0]).unwrap();
        let parsed = Mesh::parse(&built.to_text()).unwrap();
        assert_eq!(parsed, built);
    }

    #[test]
    fn parse_errors_cite_line_numbers() {
        let cases: &[(&str, usize, &str)] = &[
            ("bogus header\n", 1, "header"),
            ("vertices x cells 2\n", 1, "vertex count"),
            ("vertices 3 cells 1\n0 0\n1 zz\n0 1\n0 1 2\n", 3, "coordinate"),
            ("vertices 3 cells 1\n0 0\n1 0\n0 1\n0 1 9\n", 5, "out of range"),
            ("vertices 3 cells 1\n0 0\n1 0\n0 1\n0 1\n", 5, "fields"),
            ("vertices 3 cells 1\n0 0\n1 0\n0 1\n0 1 2\nleftover\n", 6, "unexpected content"),
            // Degenerate cell: collinear vertices, reported at its own line.
            ("vertices 4 cells 2\n0 0\n1 0\n2 0\n0 1\n0 1 3\n0 1 2\n", 7, "degenerate"),
        ];
        for (text, want_line, want_msg) in cases {
            match Mesh::parse(text) {
                Err(MeshError::Parse { line, msg }) => {
                    assert_eq!(line, *want_line, "input {text:?} -> {msg}");
                    assert!(
                        msg.to_lowercase().contains(want_msg),
                        "input {text:?}: message {msg:?} lacks {want_msg:?}"
                    );
                }
                other => panic!("input {text:?}: expected parse error, got {other:?}"),
            }
        }
    }

    #[test]
    fn duplicate_and_nonconforming_cells_rejected() {
        // Same cell twice (in rotated order).
        let text = "vertices 3 cells 2\n0 0\n1 0\n0 1\n0 1 2\n1 2 0\n";
        match Mesh::parse(text) {
            Err(MeshError::Parse { line, msg }) => {
                assert_eq!(line, 6);
                assert!(msg.contains("duplicates"));
            }
            other => panic!("{other:?}"),
        }

        // Three cells sharing one edge.
        let verts = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [-1.0, -1.0]];
        let cells = vec![[0, 1, 2], [1, 3, 2], [0, 2, 1]];
        match Mesh::from_cells(verts, cells) {
            Err(MeshError::DuplicateCell { .. }) => {}
            other => panic!("{other:?}"),
        }
        let verts = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [-1.0, 0.5]];
        let cells = vec![[0, 1, 2], [1, 3, 2], [0, 2, 4]];
        // Edge (0,2) has cells 0 and 2; add a third user of (0,2).
        let cells_bad = [cells.as_slice(), &[[0, 2, 3]]].concat();
        match Mesh::from_cells(verts, cells_bad) {
            Err(MeshError::NonConformingEdge { a: 0, b: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unused_vertex_rejected() {
        let verts = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [9.0, 9.0]];
        match Mesh::from_cells(verts, vec![[0, 1, 2]]) {
            Err(MeshError::UnusedVertex { vertex: 3 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hanging_node_breaks_boundary_loop() {
        // Cell (0,1,2) next to two half-cells sharing the midpoint of one of
        // its edges: vertex 3 hangs on edge (1,2) of cell 0.
        let verts = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.5], [1.0, 1.0]];
        let cells = vec![[0, 1, 2], [1, 4, 3], [3, 4, 2]];
        match Mesh::from_cells(verts, cells) {
            Err(MeshError::BrokenBoundary { .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
