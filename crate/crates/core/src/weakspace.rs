//! Weak Galerkin function spaces: per-cell/per-edge local bases, degree of
//! freedom numbering, weak functions and the L² interpolant `Q_h`.

use nalgebra::DVector;

use crate::basis::{dim_cell, dim_edge, CellBasis, EdgeBasis, Projector};
use crate::error::{Result, WgError};
use crate::mesh::{Mesh, Point, PressureBc};
use crate::parallel::{par_map, Parallelism};
use crate::quadrature::{cell_rule, edge_rule, QuadratureRule};

/// Polynomial degrees for a given `j`: displacement `[P_{j+1}]^2 x [P_j(e)]^2`,
/// pressure `P_j x P_{j-1}(e)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Spaces {
    pub degree: usize,
}

impl Spaces {
    pub fn new(degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(WgError::Unsupported(
                "j = 0 leaves no pressure trace space P_{j-1}(e)".into(),
            ));
        }
        Ok(Self { degree })
    }

    /// Scalar cell basis size of the displacement interior.
    pub fn u_scalar(&self) -> usize {
        dim_cell(self.degree + 1)
    }

    pub fn u_interior(&self) -> usize {
        2 * self.u_scalar()
    }

    pub fn u_trace_scalar(&self) -> usize {
        dim_edge(self.degree)
    }

    pub fn u_trace(&self) -> usize {
        2 * self.u_trace_scalar()
    }

    pub fn p_interior(&self) -> usize {
        dim_cell(self.degree)
    }

    pub fn p_trace(&self) -> usize {
        dim_edge(self.degree - 1)
    }

    /// Test space of the pressure weak gradient, `[P_{j-1}]^2` (scalar size).
    pub fn grad_p_scalar(&self) -> usize {
        dim_cell(self.degree - 1)
    }

    /// Quadrature degree for element matrices.
    pub fn operator_quad_degree(&self) -> usize {
        2 * (self.degree + 1) + 2
    }

    /// Quadrature degree for loads and projections of non-polynomial data.
    pub fn rhs_quad_degree(&self) -> usize {
        2 * (self.degree + 1) + 4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Displacement,
    Pressure,
}

/// Local bases, rules and projectors of one cell.
#[derive(Debug, Clone)]
pub struct CellSpace {
    pub u_basis: CellBasis,
    pub p_basis: CellBasis,
    pub grad_p_basis: CellBasis,
    pub rule: QuadratureRule,
    pub u_projector: Projector,
    pub p_projector: Projector,
    pub grad_p_projector: Projector,
}

#[derive(Debug, Clone)]
pub struct EdgeSpace {
    pub u_basis: EdgeBasis,
    pub p_basis: EdgeBasis,
    pub rule: QuadratureRule,
    pub u_projector: Projector,
    pub p_projector: Projector,
}

/// Global numbering `[u interior | u free traces | p interior | p free traces]`.
/// Trace DOFs on Dirichlet edges are eliminated.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub spaces: Spaces,
    pub n_cells: usize,
    u_trace_start: Vec<Option<usize>>,
    p_trace_start: Vec<Option<usize>>,
    p_interior_start: usize,
    pub n_u: usize,
    pub n_p: usize,
    pub n_u_free_edges: usize,
    pub n_p_free_edges: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh, spaces: Spaces) -> Self {
        let nc = mesh.n_cells();
        let mut next = nc * spaces.u_interior();
        let mut u_trace_start = vec![None; mesh.n_edges()];
        let mut n_u_free_edges = 0;
        for (id, e) in mesh.edges().iter().enumerate() {
            if !e.is_boundary() {
                u_trace_start[id] = Some(next);
                next += spaces.u_trace();
                n_u_free_edges += 1;
            }
        }
        let n_u = next;
        let p_interior_start = next;
        next += nc * spaces.p_interior();
        let mut p_trace_start = vec![None; mesh.n_edges()];
        let mut n_p_free_edges = 0;
        for (id, e) in mesh.edges().iter().enumerate() {
            if e.pressure_bc != Some(PressureBc::Dirichlet) {
                p_trace_start[id] = Some(next);
                next += spaces.p_trace();
                n_p_free_edges += 1;
            }
        }
        let n_p = next - n_u;
        Self {
            spaces,
            n_cells: nc,
            u_trace_start,
            p_trace_start,
            p_interior_start,
            n_u,
            n_p,
            n_u_free_edges,
            n_p_free_edges,
        }
    }

    pub fn total(&self) -> usize {
        self.n_u + self.n_p
    }

    pub fn u_interior_start(&self, cell: usize) -> usize {
        cell * self.spaces.u_interior()
    }

    pub fn p_interior_start(&self, cell: usize) -> usize {
        self.p_interior_start + cell * self.spaces.p_interior()
    }

    pub fn u_trace_start(&self, edge: usize) -> Option<usize> {
        self.u_trace_start[edge]
    }

    pub fn p_trace_start(&self, edge: usize) -> Option<usize> {
        self.p_trace_start[edge]
    }

    /// Global index of each local displacement DOF of `cell`, `None` when
    /// constrained. Local order: interior (x then y component), then for
    /// each local edge its x and y trace coefficients.
    pub fn u_local(&self, mesh: &Mesh, cell: usize) -> Vec<Option<usize>> {
        let s = self.spaces;
        let mut out = Vec::with_capacity(s.u_interior() + mesh.cell_edges(cell).len() * s.u_trace());
        let start = self.u_interior_start(cell);
        out.extend((0..s.u_interior()).map(|i| Some(start + i)));
        for &e in mesh.cell_edges(cell) {
            match self.u_trace_start[e] {
                Some(t) => out.extend((0..s.u_trace()).map(|i| Some(t + i))),
                None => out.extend(std::iter::repeat_n(None, s.u_trace())),
            }
        }
        out
    }

    /// As [`DofMap::u_local`] for the pressure: interior then one block per edge.
    pub fn p_local(&self, mesh: &Mesh, cell: usize) -> Vec<Option<usize>> {
        let s = self.spaces;
        let mut out = Vec::with_capacity(s.p_interior() + mesh.cell_edges(cell).len() * s.p_trace());
        let start = self.p_interior_start(cell);
        out.extend((0..s.p_interior()).map(|i| Some(start + i)));
        for &e in mesh.cell_edges(cell) {
            match self.p_trace_start[e] {
                Some(t) => out.extend((0..s.p_trace()).map(|i| Some(t + i))),
                None => out.extend(std::iter::repeat_n(None, s.p_trace())),
            }
        }
        out
    }
}

/// Coefficients of `{v_0, v_b}` (or `{q_0, q_b}`) on every cell and edge.
/// Traces of constrained edges are stored and kept at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakFunction {
    pub kind: FieldKind,
    pub interior_dim: usize,
    pub trace_dim: usize,
    pub interior: Vec<f64>,
    pub trace: Vec<f64>,
}

impl WeakFunction {
    pub fn zeros(kind: FieldKind, spaces: Spaces, mesh: &Mesh) -> Self {
        let (interior_dim, trace_dim) = match kind {
            FieldKind::Displacement => (spaces.u_interior(), spaces.u_trace()),
            FieldKind::Pressure => (spaces.p_interior(), spaces.p_trace()),
        };
        Self {
            kind,
            interior_dim,
            trace_dim,
            interior: vec![0.0; interior_dim * mesh.n_cells()],
            trace: vec![0.0; trace_dim * mesh.n_edges()],
        }
    }

    pub fn cell_interior(&self, cell: usize) -> &[f64] {
        &self.interior[cell * self.interior_dim..(cell + 1) * self.interior_dim]
    }

    pub fn edge_trace(&self, edge: usize) -> &[f64] {
        &self.trace[edge * self.trace_dim..(edge + 1) * self.trace_dim]
    }

    /// Local coefficient vector in the layout of [`DofMap::u_local`] /
    /// [`DofMap::p_local`].
    pub fn local(&self, mesh: &Mesh, cell: usize) -> DVector<f64> {
        let edges = mesh.cell_edges(cell);
        let mut v = Vec::with_capacity(self.interior_dim + edges.len() * self.trace_dim);
        v.extend_from_slice(self.cell_interior(cell));
        for &e in edges {
            v.extend_from_slice(self.edge_trace(e));
        }
        DVector::from_vec(v)
    }

    fn trace_start(&self, dofs: &DofMap, edge: usize) -> Option<usize> {
        match self.kind {
            FieldKind::Displacement => dofs.u_trace_start(edge),
            FieldKind::Pressure => dofs.p_trace_start(edge),
        }
    }

    fn interior_start(&self, dofs: &DofMap, cell: usize) -> usize {
        match self.kind {
            FieldKind::Displacement => dofs.u_interior_start(cell),
            FieldKind::Pressure => dofs.p_interior_start(cell),
        }
    }

    /// Writes the free coefficients into a global vector.
    pub fn gather_into(&self, dofs: &DofMap, global: &mut [f64]) {
        for c in 0..dofs.n_cells {
            let s = self.interior_start(dofs, c);
            global[s..s + self.interior_dim].copy_from_slice(self.cell_interior(c));
        }
        for e in 0..self.trace.len() / self.trace_dim.max(1) {
            if let Some(s) = self.trace_start(dofs, e) {
                global[s..s + self.trace_dim].copy_from_slice(self.edge_trace(e));
            }
        }
    }

    /// Reads free coefficients from a global vector; constrained traces are zeroed.
    pub fn scatter_from(&mut self, dofs: &DofMap, global: &[f64]) {
        let (id, td) = (self.interior_dim, self.trace_dim);
        for c in 0..dofs.n_cells {
            let s = self.interior_start(dofs, c);
            self.interior[c * id..(c + 1) * id].copy_from_slice(&global[s..s + id]);
        }
        for e in 0..self.trace.len() / td.max(1) {
            match self.trace_start(dofs, e) {
                Some(s) => self.trace[e * td..(e + 1) * td].copy_from_slice(&global[s..s + td]),
                None => self.trace[e * td..(e + 1) * td].fill(0.0),
            }
        }
    }

    /// Zeroes traces on edges that carry no free DOFs.
    pub fn apply_constraints(&mut self, dofs: &DofMap) {
        let td = self.trace_dim;
        for e in 0..self.trace.len() / td.max(1) {
            if self.trace_start(dofs, e).is_none() {
                self.trace[e * td..(e + 1) * td].fill(0.0);
            }
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.interior.iter_mut().for_each(|x| *x *= a);
        self.trace.iter_mut().for_each(|x| *x *= a);
    }

    pub fn sub(&self, other: &WeakFunction) -> WeakFunction {
        let mut out = self.clone();
        out.interior
            .iter_mut()
            .zip(&other.interior)
            .for_each(|(a, b)| *a -= b);
        out.trace.iter_mut().zip(&other.trace).for_each(|(a, b)| *a -= b);
        out
    }
}

/// Mesh together with its spaces, DOF map and local caches.
#[derive(Debug, Clone)]
pub struct Discretization<'m> {
    pub mesh: &'m Mesh,
    pub spaces: Spaces,
    pub dofs: DofMap,
    pub cells: Vec<CellSpace>,
    pub edges: Vec<EdgeSpace>,
}

fn build_cell_space(mesh: &Mesh, spaces: Spaces, cell: usize) -> Result<CellSpace> {
    let j = spaces.degree;
    let poly = mesh.cell_polygon(cell);
    let center = mesh.cell_centroid(cell);
    let hk = mesh.cell_diameter(cell);
    let rule = cell_rule(&poly, spaces.operator_quad_degree())?;
    let rhs_rule = cell_rule(&poly, spaces.rhs_quad_degree())?;
    let u_basis = CellBasis::new(center, hk, j + 1);
    let p_basis = CellBasis::new(center, hk, j);
    let grad_p_basis = CellBasis::new(center, hk, j - 1);
    Ok(CellSpace {
        u_projector: Projector::new(&u_basis, rhs_rule.clone())?,
        p_projector: Projector::new(&p_basis, rhs_rule.clone())?,
        grad_p_projector: Projector::new(&grad_p_basis, rhs_rule)?,
        u_basis,
        p_basis,
        grad_p_basis,
        rule,
    })
}

fn build_edge_space(mesh: &Mesh, spaces: Spaces, edge: usize) -> Result<EdgeSpace> {
    let j = spaces.degree;
    let [a, b] = mesh.edge_endpoints(edge);
    let rule = edge_rule(a, b, spaces.rhs_quad_degree())?;
    let u_basis = EdgeBasis::new(a, b, j);
    let p_basis = EdgeBasis::new(a, b, j - 1);
    Ok(EdgeSpace {
        u_projector: Projector::new(&u_basis, rule.clone())?,
        p_projector: Projector::new(&p_basis, rule.clone())?,
        u_basis,
        p_basis,
        rule,
    })
}

/// Builds spaces, DOF map and local caches for polynomial degree `j`.
pub fn build_spaces(mesh: &Mesh, j: usize, par: Parallelism) -> Result<Discretization<'_>> {
    let spaces = Spaces::new(j)?;
    let dofs = DofMap::new(mesh, spaces);
    let cell_ids: Vec<usize> = (0..mesh.n_cells()).collect();
    let edge_ids: Vec<usize> = (0..mesh.n_edges()).collect();
    let cells = par_map(par, &cell_ids, |&c| build_cell_space(mesh, spaces, c))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let edges = par_map(par, &edge_ids, |&e| build_edge_space(mesh, spaces, e))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(Discretization {
        mesh,
        spaces,
        dofs,
        cells,
        edges,
    })
}

impl Discretization<'_> {
    /// `Q_h u = {Q_0 u, Q_b u}`; traces on constrained edges are set to zero.
    pub fn interpolate_displacement(&self, u: impl Fn(Point) -> [f64; 2]) -> WeakFunction {
        let mut w = self.project_displacement(u);
        w.apply_constraints(&self.dofs);
        w
    }

    /// `Q_h u` on every edge, ignoring boundary constraints.
    pub fn project_displacement(&self, u: impl Fn(Point) -> [f64; 2]) -> WeakFunction {
        let mut w = WeakFunction::zeros(FieldKind::Displacement, self.spaces, self.mesh);
        let ns = self.spaces.u_scalar();
        for (c, cs) in self.cells.iter().enumerate() {
            for comp in 0..2 {
                let coef = cs.u_projector.project(|p| u(p)[comp]);
                let base = c * w.interior_dim + comp * ns;
                w.interior[base..base + ns].copy_from_slice(coef.as_slice());
            }
        }
        let nt = self.spaces.u_trace_scalar();
        for (e, es) in self.edges.iter().enumerate() {
            for comp in 0..2 {
                let coef = es.u_projector.project(|p| u(p)[comp]);
                let base = e * w.trace_dim + comp * nt;
                w.trace[base..base + nt].copy_from_slice(coef.as_slice());
            }
        }
        w
    }

    /// `Q_h p = {Q_0 p, Q_b p}`; traces on Dirichlet edges are set to zero.
    pub fn interpolate_pressure(&self, p: impl Fn(Point) -> f64) -> WeakFunction {
        let mut w = self.project_pressure(p);
        w.apply_constraints(&self.dofs);
        w
    }

    /// `Q_h p` on every edge, ignoring boundary constraints.
    pub fn project_pressure(&self, p: impl Fn(Point) -> f64) -> WeakFunction {
        let mut w = WeakFunction::zeros(FieldKind::Pressure, self.spaces, self.mesh);
        for (c, cs) in self.cells.iter().enumerate() {
            let coef = cs.p_projector.project(&p);
            w.interior[c * w.interior_dim..(c + 1) * w.interior_dim]
                .copy_from_slice(coef.as_slice());
        }
        for (e, es) in self.edges.iter().enumerate() {
            let coef = es.p_projector.project(&p);
            w.trace[e * w.trace_dim..(e + 1) * w.trace_dim].copy_from_slice(coef.as_slice());
        }
        w
    }

    pub fn zero_displacement(&self) -> WeakFunction {
        WeakFunction::zeros(FieldKind::Displacement, self.spaces, self.mesh)
    }

    pub fn zero_pressure(&self) -> WeakFunction {
        WeakFunction::zeros(FieldKind::Pressure, self.spaces, self.mesh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::eval_combination;
    use crate::mesh::{generate_triangular, Mesh};

    #[test]
    fn single_triangle_counts() {
        let m = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![vec![0, 1, 2]]).unwrap();
        let d = DofMap::new(&m, Spaces::new(1).unwrap());
        assert_eq!(d.total(), 15);
        assert_eq!(d.n_u, 12);
    }

    #[test]
    fn two_by_two_triangles() {
        let m = generate_triangular(2).unwrap();
        let d = DofMap::new(&m, Spaces::new(1).unwrap());
        assert_eq!(d.n_u_free_edges, 8);
        assert_eq!(d.total(), 160);
    }

    #[test]
    fn degree_two_interior_size() {
        assert_eq!(Spaces::new(2).unwrap().u_interior(), 20);
        assert!(matches!(Spaces::new(0), Err(WgError::Unsupported(_))));
    }

    #[test]
    fn dof_conservation_with_neumann_edges() {
        let m = generate_triangular(3)
            .unwrap()
            .with_pressure_bc(|p| if p[1] == 0.0 { PressureBc::Neumann } else { PressureBc::Dirichlet });
        for j in 1..=2 {
            let s = Spaces::new(j).unwrap();
            let d = DofMap::new(&m, s);
            let interior = m.n_edges() - m.boundary_edge_count();
            let expected = m.n_cells() * (s.u_interior() + s.p_interior())
                + interior * s.u_trace()
                + (interior + 3) * s.p_trace();
            assert_eq!(d.total(), expected);
        }
    }

    #[test]
    fn linear_fields_are_reproduced() {
        let m = generate_triangular(2).unwrap();
        let disc = build_spaces(&m, 1, Parallelism::Sequential).unwrap();
        let u = |p: Point| [1.0 + 2.0 * p[0] - p[1], 0.5 * p[1]];
        let w = disc.interpolate_displacement(u);
        for (c, cs) in disc.cells.iter().enumerate() {
            let ns = disc.spaces.u_scalar();
            let loc = w.cell_interior(c);
            let x = m.cell_centroid(c);
            assert!((eval_combination(&cs.u_basis, &loc[..ns], x) - u(x)[0]).abs() < 1e-13);
            assert!((eval_combination(&cs.u_basis, &loc[ns..], x) - u(x)[1]).abs() < 1e-13);
        }
        for (e, es) in disc.edges.iter().enumerate() {
            let mid = m.edge_midpoint(e);
            let t = w.edge_trace(e);
            if m.edges()[e].is_boundary() {
                assert!(t.iter().all(|&x| x == 0.0));
            } else {
                assert!((eval_combination(&es.u_basis, &t[..2], mid) - u(mid)[0]).abs() < 1e-13);
            }
        }
        let z = disc.interpolate_pressure(|_| 0.0);
        assert!(z.interior.iter().chain(&z.trace).all(|&x| x == 0.0));
    }

    #[test]
    fn scatter_gather_round_trip() {
        let m = generate_triangular(3).unwrap();
        let disc = build_spaces(&m, 1, Parallelism::Sequential).unwrap();
        let global: Vec<f64> = (0..disc.dofs.total()).map(|i| (i as f64).sin()).collect();
        let mut u = disc.zero_displacement();
        let mut p = disc.zero_pressure();
        u.scatter_from(&disc.dofs, &global);
        p.scatter_from(&disc.dofs, &global);
        let mut back = vec![0.0; disc.dofs.total()];
        u.gather_into(&disc.dofs, &mut back);
        p.gather_into(&disc.dofs, &mut back);
        assert_eq!(back, global);
        // a shared edge reads the same coefficients from both sides
        for (e, edge) in m.edges().iter().enumerate() {
            if edge.cells.len() == 2 {
                let (c0, l0) = edge.cells[0];
                let (c1, l1) = edge.cells[1];
                let s = disc.spaces.u_interior();
                let t = disc.spaces.u_trace();
                let a = u.local(&m, c0);
                let b = u.local(&m, c1);
                assert_eq!(
                    a.as_slice()[s + l0 * t..s + (l0 + 1) * t],
                    b.as_slice()[s + l1 * t..s + (l1 + 1) * t]
                );
                assert_eq!(&a.as_slice()[s + l0 * t..s + (l0 + 1) * t], u.edge_trace(e));
            }
        }
    }
}
