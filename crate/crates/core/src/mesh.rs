//! Two-dimensional polygonal meshes: storage, generators for the unit-square
//! families, a line-oriented text format, and geometric queries.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Result, WgError};

pub type Point = [f64; 2];

/// Pressure boundary condition carried by a boundary edge. Displacement is
/// always clamped on the whole boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PressureBc {
    Dirichlet,
    Neumann,
}

/// A deduplicated mesh edge. `vertices` is stored with the lower index first,
/// which fixes the global orientation used by trace bases.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub vertices: [usize; 2],
    /// `(cell, local edge index)` for each incident cell, in discovery order.
    pub cells: Vec<(usize, usize)>,
    /// `None` for interior edges.
    pub pressure_bc: Option<PressureBc>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.cells.len() == 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    cell_edges: Vec<Vec<usize>>,
    areas: Vec<f64>,
    centroids: Vec<Point>,
    diameters: Vec<f64>,
    h: f64,
}

/// The three generated unit-square families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFamily {
    Triangular,
    Rectangular,
    Hybrid,
}

impl MeshFamily {
    pub fn generate(self, n: usize) -> Result<Mesh> {
        match self {
            MeshFamily::Triangular => generate_triangular(n),
            MeshFamily::Rectangular => generate_rectangular(n),
            MeshFamily::Hybrid => generate_hybrid(n),
        }
    }

    /// Mesh-size label used to index refinement levels: `sqrt(2)/n` for
    /// triangles, `1/n` for squares and the hybrid family.
    pub fn label(self, n: usize) -> f64 {
        match self {
            MeshFamily::Triangular => std::f64::consts::SQRT_2 / n as f64,
            MeshFamily::Rectangular | MeshFamily::Hybrid => 1.0 / n as f64,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MeshFamily::Triangular => "triangular",
            MeshFamily::Rectangular => "rectangular",
            MeshFamily::Hybrid => "hybrid",
        }
    }
}

impl std::str::FromStr for MeshFamily {
    type Err = WgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triangular" => Ok(MeshFamily::Triangular),
            "rectangular" => Ok(MeshFamily::Rectangular),
            "hybrid" => Ok(MeshFamily::Hybrid),
            other => Err(WgError::invalid(format!("unknown mesh family `{other}`"))),
        }
    }
}

fn signed_area(poly: &[Point]) -> f64 {
    let k = poly.len();
    let mut a = 0.0;
    for i in 0..k {
        let p = poly[i];
        let q = poly[(i + 1) % k];
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a
}

fn area_centroid(poly: &[Point]) -> Point {
    let k = poly.len();
    let a = signed_area(poly);
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..k {
        let p = poly[i];
        let q = poly[(i + 1) % k];
        let cross = p[0] * q[1] - q[0] * p[1];
        cx += (p[0] + q[0]) * cross;
        cy += (p[1] + q[1]) * cross;
    }
    [cx / (6.0 * a), cy / (6.0 * a)]
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Point, q: Point, r: Point| {
        orient(p, q, r) == 0.0
            && r[0] >= p[0].min(q[0])
            && r[0] <= p[0].max(q[0])
            && r[1] >= p[1].min(q[1])
            && r[1] <= p[1].max(q[1])
    };
    on(c, d, a) || on(c, d, b) || on(a, b, c) || on(a, b, d)
}

fn is_simple(poly: &[Point]) -> bool {
    let k = poly.len();
    for i in 0..k {
        for j in (i + 1)..k {
            // adjacent sides share a vertex by construction
            if j == i + 1 || (i == 0 && j == k - 1) {
                continue;
            }
            if segments_cross(poly[i], poly[(i + 1) % k], poly[j], poly[(j + 1) % k]) {
                return false;
            }
        }
    }
    true
}

impl Mesh {
    /// Builds a mesh from vertices and counterclockwise cell loops. Every
    /// boundary edge starts out with a Dirichlet pressure condition.
    pub fn new(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self> {
        let nv = vertices.len();
        let mut used = vec![false; nv];
        let mut areas = Vec::with_capacity(cells.len());
        let mut centroids = Vec::with_capacity(cells.len());
        let mut diameters = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(WgError::Geometry(format!("cell {c} has fewer than 3 vertices")));
            }
            if let Some(&bad) = cell.iter().find(|&&v| v >= nv) {
                return Err(WgError::invalid(format!(
                    "cell {c} references vertex {bad}, but only {nv} vertices exist"
                )));
            }
            let poly: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            if !is_simple(&poly) {
                return Err(WgError::Geometry(format!("cell {c} is not a simple polygon")));
            }
            let a = signed_area(&poly);
            if a <= 0.0 {
                return Err(WgError::Geometry(format!(
                    "cell {c} has non-positive signed area {a:e} (must be counterclockwise)"
                )));
            }
            let mut diam: f64 = 0.0;
            for i in 0..poly.len() {
                for j in (i + 1)..poly.len() {
                    let dx = poly[i][0] - poly[j][0];
                    let dy = poly[i][1] - poly[j][1];
                    diam = diam.max(dx.hypot(dy));
                }
            }
            for &v in cell {
                used[v] = true;
            }
            areas.push(a);
            centroids.push(area_centroid(&poly));
            diameters.push(diam);
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let k = cell.len();
            let mut local = Vec::with_capacity(k);
            for i in 0..k {
                let a = cell[i];
                let b = cell[(i + 1) % k];
                if a == b {
                    return Err(WgError::Geometry(format!("cell {c} repeats vertex {a}")));
                }
                let key = (a.min(b), a.max(b));
                let id = *lookup.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: [key.0, key.1],
                        cells: Vec::with_capacity(2),
                        pressure_bc: None,
                    });
                    edges.len() - 1
                });
                let e = &mut edges[id];
                if e.cells.len() == 2 {
                    return Err(WgError::Geometry(format!(
                        "edge ({}, {}) is shared by more than two cells",
                        key.0, key.1
                    )));
                }
                if let Some(&(oc, ol)) = e.cells.first() {
                    // the neighbour must traverse the shared edge in the opposite direction
                    let ocell = &cells[oc];
                    let oa = ocell[ol];
                    if oa == a {
                        return Err(WgError::Geometry(format!(
                            "cells {oc} and {c} traverse edge ({}, {}) in the same direction",
                            key.0, key.1
                        )));
                    }
                }
                e.cells.push((c, i));
                local.push(id);
            }
            cell_edges.push(local);
        }
        for e in edges.iter_mut() {
            if e.is_boundary() {
                e.pressure_bc = Some(PressureBc::Dirichlet);
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(WgError::invalid(format!("vertex {v} is not referenced by any cell")));
        }
        let h = diameters.iter().cloned().fold(0.0, f64::max);
        Ok(Mesh {
            vertices,
            cells,
            edges,
            cell_edges,
            areas,
            centroids,
            diameters,
            h,
        })
    }

    /// Returns a copy with the pressure condition of every boundary edge set
    /// by `rule(midpoint)`.
    pub fn with_pressure_bc(mut self, rule: impl Fn(Point) -> PressureBc) -> Self {
        for id in 0..self.edges.len() {
            if self.edges[id].is_boundary() {
                let m = self.edge_midpoint(id);
                self.edges[id].pressure_bc = Some(rule(m));
            }
        }
        self
    }

    /// Returns a copy whose cells are listed in `order` (a permutation of
    /// cell indices). Edge numbering is rebuilt; vertex data is untouched.
    pub fn permuted_cells(&self, order: &[usize]) -> Result<Self> {
        let cells = order.iter().map(|&c| self.cells[c].clone()).collect();
        let mut m = Mesh::new(self.vertices.clone(), cells)?;
        for id in 0..m.edges.len() {
            if m.edges[id].is_boundary() {
                let [a, b] = m.edges[id].vertices;
                let src = self.find_edge(a, b).expect("same vertex pairs");
                m.edges[id].pressure_bc = self.edges[src].pressure_bc;
            }
        }
        Ok(m)
    }

    pub fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        let key = [a.min(b), a.max(b)];
        self.edges.iter().position(|e| e.vertices == key)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Global edge ids of a cell, local edge `i` running from vertex `i` to `i + 1`.
    pub fn cell_edges(&self, cell: usize) -> &[usize] {
        &self.cell_edges[cell]
    }

    pub fn cell_polygon(&self, cell: usize) -> Vec<Point> {
        self.cells[cell].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_area(&self, cell: usize) -> f64 {
        self.areas[cell]
    }

    pub fn cell_centroid(&self, cell: usize) -> Point {
        self.centroids[cell]
    }

    /// h_K, the largest vertex-to-vertex distance of the cell.
    pub fn cell_diameter(&self, cell: usize) -> f64 {
        self.diameters[cell]
    }

    /// h = max h_K.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Endpoints in global orientation (lower vertex index first).
    pub fn edge_endpoints(&self, edge: usize) -> [Point; 2] {
        let [a, b] = self.edges[edge].vertices;
        [self.vertices[a], self.vertices[b]]
    }

    pub fn edge_length(&self, edge: usize) -> f64 {
        let [a, b] = self.edge_endpoints(edge);
        (b[0] - a[0]).hypot(b[1] - a[1])
    }

    pub fn edge_midpoint(&self, edge: usize) -> Point {
        let [a, b] = self.edge_endpoints(edge);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    /// Outward unit normal of local edge `local` of `cell`.
    pub fn outward_normal(&self, cell: usize, local: usize) -> Point {
        let cell_v = &self.cells[cell];
        let a = self.vertices[cell_v[local]];
        let b = self.vertices[cell_v[(local + 1) % cell_v.len()]];
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len = dx.hypot(dy);
        [dy / len, -dx / len]
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn boundary_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_boundary()).count()
    }

    /// Re-checks the structural invariants, returning the first violation.
    pub fn audit(&self) -> Result<()> {
        for (id, e) in self.edges.iter().enumerate() {
            match (e.cells.len(), e.pressure_bc) {
                (1, Some(_)) | (2, None) => {}
                (n, bc) => {
                    return Err(WgError::Geometry(format!(
                        "edge {id}: {n} incident cells with boundary tag {bc:?}"
                    )))
                }
            }
        }
        let sides: usize = self.cells.iter().map(|c| c.len()).sum();
        if 2 * self.edges.len() != sides + self.boundary_edge_count() {
            return Err(WgError::Geometry("edge count does not match cell sides".into()));
        }
        for c in 0..self.n_cells() {
            let mut s = [0.0, 0.0];
            for (l, &e) in self.cell_edges[c].iter().enumerate() {
                let n = self.outward_normal(c, l);
                let len = self.edge_length(e);
                s[0] += len * n[0];
                s[1] += len * n[1];
            }
            let scale = self.diameters[c];
            if s[0].abs() > 1e-12 * scale || s[1].abs() > 1e-12 * scale {
                return Err(WgError::Geometry(format!("cell {c}: normals do not close")));
            }
        }
        Ok(())
    }

    /// Parses the line-oriented mesh format:
    /// `nv nc`, then `nv` lines `x y`, then `nc` lines `k i1 .. ik`, then
    /// optional `btag i j TAG` lines with TAG one of `DU`, `DP`, `NP`.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (ln, header) = lines
            .next()
            .ok_or_else(|| WgError::parse(1, "missing `nv nc` header"))?;
        let head = parse_usizes(ln, header)?;
        if head.len() != 2 {
            return Err(WgError::parse(ln, "header must be `nv nc`"));
        }
        let (nv, nc) = (head[0], head[1]);

        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| WgError::parse(ln, "unexpected end of file in vertex block"))?;
            let xs: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| WgError::parse(ln, format!("bad coordinate: {e}")))?;
            if xs.len() != 2 {
                return Err(WgError::parse(ln, "vertex line must be `x y`"));
            }
            vertices.push([xs[0], xs[1]]);
        }

        let mut cells = Vec::with_capacity(nc);
        let mut cell_lines = Vec::with_capacity(nc);
        for _ in 0..nc {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| WgError::parse(ln, "unexpected end of file in cell block"))?;
            let ids = parse_usizes(ln, l)?;
            if ids.is_empty() || ids[0] + 1 != ids.len() {
                return Err(WgError::parse(ln, "cell line must be `k i1 .. ik`"));
            }
            if let Some(&bad) = ids[1..].iter().find(|&&v| v >= nv) {
                return Err(WgError::parse(
                    ln,
                    format!("vertex index {bad} out of range (nv = {nv})"),
                ));
            }
            cells.push(ids[1..].to_vec());
            cell_lines.push(ln);
        }

        let mut tags = Vec::new();
        for (ln, l) in lines {
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != 4 || toks[0] != "btag" {
                return Err(WgError::parse(ln, "expected `btag i j TAG`"));
            }
            let i: usize = toks[1]
                .parse()
                .map_err(|_| WgError::parse(ln, "bad vertex index"))?;
            let j: usize = toks[2]
                .parse()
                .map_err(|_| WgError::parse(ln, "bad vertex index"))?;
            let tag = match toks[3] {
                "DU" => None,
                "DP" => Some(PressureBc::Dirichlet),
                "NP" => Some(PressureBc::Neumann),
                t => return Err(WgError::parse(ln, format!("unknown tag `{t}`"))),
            };
            tags.push((ln, i, j, tag));
        }

        let mut mesh = Mesh::new(vertices, cells).map_err(|e| match e {
            WgError::Geometry(m) | WgError::InvalidArgument(m) => {
                // attach the cell line when the message names a cell
                let line = m
                    .strip_prefix("cell ")
                    .and_then(|r| r.split_whitespace().next())
                    .and_then(|c| c.parse::<usize>().ok())
                    .and_then(|c| cell_lines.get(c).copied())
                    .unwrap_or(1);
                WgError::parse(line, m)
            }
            other => other,
        })?;
        for (ln, i, j, tag) in tags {
            let id = mesh
                .find_edge(i, j)
                .ok_or_else(|| WgError::parse(ln, format!("({i}, {j}) is not an edge")))?;
            if !mesh.edges[id].is_boundary() {
                return Err(WgError::parse(ln, format!("({i}, {j}) is not a boundary edge")));
            }
            if let Some(bc) = tag {
                mesh.edges[id].pressure_bc = Some(bc);
            }
        }
        Ok(mesh)
    }

    /// Canonical text form: shortest round-trip coordinates, one cell per
    /// line, and a `btag` line for each Neumann pressure edge.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.vertices.len(), self.cells.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{:?} {:?}", v[0], v[1]);
        }
        for c in &self.cells {
            let _ = write!(s, "{}", c.len());
            for v in c {
                let _ = write!(s, " {v}");
            }
            s.push('\n');
        }
        for e in &self.edges {
            if e.pressure_bc == Some(PressureBc::Neumann) {
                let _ = writeln!(s, "btag {} {} NP", e.vertices[0], e.vertices[1]);
            }
        }
        s
    }
}

fn parse_usizes(line: usize, text: &str) -> Result<Vec<usize>> {
    text.split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| WgError::parse(line, format!("expected a non-negative integer, got `{t}`")))
        })
        .collect()
}

fn grid_vertices(n: usize) -> Vec<Point> {
    let mut v = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            v.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    v
}

fn square_corners(n: usize, i: usize, j: usize) -> [usize; 4] {
    let id = |i: usize, j: usize| j * (n + 1) + i;
    [id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]
}

/// `n x n` squares, each cut along its lower-left to upper-right diagonal.
pub fn generate_triangular(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(WgError::invalid("triangular mesh needs n >= 1"));
    }
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let [a, b, c, d] = square_corners(n, i, j);
            cells.push(vec![a, b, c]);
            cells.push(vec![a, c, d]);
        }
    }
    Mesh::new(grid_vertices(n), cells)
}

/// `n x n` axis-aligned squares.
pub fn generate_rectangular(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(WgError::invalid("rectangular mesh needs n >= 1"));
    }
    let mut cells = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            cells.push(square_corners(n, i, j).to_vec());
        }
    }
    Mesh::new(grid_vertices(n), cells)
}

/// Checkerboard triangle/quadrilateral mix: square `(i, j)` of the `n x n`
/// grid is cut into two triangles when `i + j` is even.
pub fn generate_hybrid(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(WgError::invalid("hybrid mesh needs N_h >= 1"));
    }
    let mut cells = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let [a, b, c, d] = square_corners(n, i, j);
            if (i + j) % 2 == 0 {
                cells.push(vec![a, b, c]);
                cells.push(vec![a, c, d]);
            } else {
                cells.push(vec![a, b, c, d]);
            }
        }
    }
    Mesh::new(grid_vertices(n), cells)
}

/// Four cells on the unit square: two triangles, a quadrilateral and a
/// pentagon around the interior vertex `(0.45, 0.55)`.
pub fn generate_mixed() -> Result<Mesh> {
    let vertices = vec![
        [0.0, 0.0],
        [0.5, 0.0],
        [1.0, 0.0],
        [1.0, 1.0],
        [0.5, 1.0],
        [0.0, 1.0],
        [0.0, 0.5],
        [0.45, 0.55],
    ];
    let cells = vec![vec![0, 1, 6], vec![1, 7, 6], vec![1, 2, 3, 4, 7], vec![6, 7, 4, 5]];
    Mesh::new(vertices, cells)
}

pub fn load_mesh(text: &str) -> Result<Mesh> {
    Mesh::from_text(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangular_counts() {
        let m = generate_triangular(1).unwrap();
        assert_eq!(m.n_cells(), 2);
        assert_eq!(m.n_edges(), 5);
        assert_eq!(m.h(), std::f64::consts::SQRT_2);

        let m = generate_triangular(2).unwrap();
        assert_eq!(m.n_cells(), 8);
        assert_eq!(m.h(), std::f64::consts::SQRT_2 / 2.0);
        assert!((m.total_area() - 1.0).abs() < 1e-12);

        let m = generate_triangular(8).unwrap();
        assert_eq!(m.h(), std::f64::consts::SQRT_2 / 8.0);
    }

    #[test]
    fn rectangular_counts() {
        let m = generate_rectangular(2).unwrap();
        assert_eq!(m.n_cells(), 4);
        assert_eq!(m.n_edges(), 12);
        assert_eq!(MeshFamily::Rectangular.label(4), 0.25);
        let m = generate_rectangular(3).unwrap();
        assert_eq!(m.n_cells(), 9);
        assert!((m.total_area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hybrid_counts() {
        let m = generate_hybrid(1).unwrap();
        assert_eq!(m.n_cells(), 2);
        let m = generate_hybrid(2).unwrap();
        assert_eq!(m.n_cells(), 6);
        let quads = m.cells().iter().filter(|c| c.len() == 4).count();
        assert_eq!(quads, 2);
        assert!((m.total_area() - 1.0).abs() < 1e-12);
        let m = generate_hybrid(4).unwrap();
        assert_eq!(m.n_cells(), 24);
        m.audit().unwrap();
    }

    #[test]
    fn zero_subdivisions_rejected() {
        assert!(matches!(generate_triangular(0), Err(WgError::InvalidArgument(_))));
        assert!(matches!(generate_rectangular(0), Err(WgError::InvalidArgument(_))));
        assert!(matches!(generate_hybrid(0), Err(WgError::InvalidArgument(_))));
    }

    #[test]
    fn normals_point_outward() {
        let m = generate_hybrid(3).unwrap();
        for c in 0..m.n_cells() {
            let poly = m.cell_polygon(c);
            let k = poly.len();
            for l in 0..k {
                let a = poly[l];
                let b = poly[(l + 1) % k];
                let len = (b[0] - a[0]).hypot(b[1] - a[1]);
                let t = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
                let rot = [t[1], -t[0]];
                let n = m.outward_normal(c, l);
                assert!((n[0] * rot[0] + n[1] * rot[1] - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn load_single_quad() {
        let text = "4 1\n0 0\n1 0\n1 1\n0 1\n4 0 1 2 3\n";
        let m = load_mesh(text).unwrap();
        assert_eq!(m.n_cells(), 1);
        assert_eq!(m.boundary_edge_count(), 4);
    }

    #[test]
    fn load_reports_bad_vertex_line() {
        let text = "# unit square\n4 1\n0 0\n1 0\n1 1\n0 1\n4 0 1 2 7\n";
        match load_mesh(text) {
            Err(WgError::Parse { line, message }) => {
                assert_eq!(line, 7);
                assert!(message.contains('7'));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_clockwise_and_bowtie() {
        let cw = "4 1\n0 0\n0 1\n1 1\n1 0\n4 0 1 2 3\n";
        assert!(matches!(load_mesh(cw), Err(WgError::Parse { line: 6, .. })));
        let bowtie = "4 1\n0 0\n1 1\n1 0\n0 1\n4 0 1 2 3\n";
        assert!(load_mesh(bowtie).is_err());
    }

    #[test]
    fn btag_sets_neumann() {
        let text = "4 1\n0 0\n1 0\n1 1\n0 1\n4 0 1 2 3\nbtag 1 2 NP\nbtag 0 1 DU\n";
        let m = load_mesh(text).unwrap();
        let e = m.find_edge(1, 2).unwrap();
        assert_eq!(m.edges()[e].pressure_bc, Some(PressureBc::Neumann));
        let e = m.find_edge(0, 1).unwrap();
        assert_eq!(m.edges()[e].pressure_bc, Some(PressureBc::Dirichlet));
        assert!(load_mesh("4 1\n0 0\n1 0\n1 1\n0 1\n4 0 1 2 3\nbtag 0 2 NP\n").is_err());
    }

    #[test]
    fn text_round_trip_is_canonical() {
        let m = generate_hybrid(3).unwrap().with_pressure_bc(|p| {
            if p[0] == 1.0 {
                PressureBc::Neumann
            } else {
                PressureBc::Dirichlet
            }
        });
        let text = m.to_text();
        let back = load_mesh(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_text(), text);
    }
}
