//! Discrete weak divergence and weak gradients on each cell, stored as dense
//! matrices from local WG coefficients to polynomial coefficients.
//!
//! For a local displacement `v = {v_0, v_b}` the weak divergence solves
//! `(D v, psi)_K = -(v_0, grad psi)_K + <v_b . n, psi>_dK` for all `psi` in
//! `P_j(K)`. The matrix weak gradient is stored as four `P_j` blocks in the
//! order `d/dx v1, d/dy v1, d/dx v2, d/dy v2`; the pressure weak gradient as two
//! `P_{j-1}` blocks.

use nalgebra::{DMatrix, DVector};

use crate::basis::{tabulate, CellBasis, ScalarBasis};
use crate::error::Result;
use crate::mesh::Point;
use crate::parallel::{par_map, Parallelism};
use crate::quadrature::{cell_rule, edge_rule};
use crate::weakspace::{Discretization, WeakFunction};

#[derive(Debug, Clone)]
pub struct ElementOperators {
    pub cell: usize,
    /// Cell diameter.
    pub h: f64,
    pub area: f64,
    /// `P_j` coefficients of the weak divergence, `dim P_j x n_u_local`.
    pub div: DMatrix<f64>,
    /// `[P_j]^{2x2}` coefficients of the weak gradient, `4 dim P_j x n_u_local`.
    pub grad: DMatrix<f64>,
    /// `[P_{j-1}]^2` coefficients of the pressure weak gradient.
    pub grad_p: DMatrix<f64>,
    /// `Q_b v_0 - v_b` on each local edge, in the edge's `[P_j(e)]^2` basis.
    pub u_jumps: Vec<DMatrix<f64>>,
    /// `Q_b q_0 - q_b` on each local edge, in the `P_{j-1}(e)` basis.
    pub p_jumps: Vec<DMatrix<f64>>,
    /// Mass matrix of `P_j(K)`.
    pub mass_p: DMatrix<f64>,
    /// Mass matrix of `P_{j-1}(K)`.
    pub mass_grad_p: DMatrix<f64>,
    /// Scalar edge mass matrices of `P_j(e)` and `P_{j-1}(e)` per local edge.
    pub edge_mass_u: Vec<DMatrix<f64>>,
    pub edge_mass_p: Vec<DMatrix<f64>>,
}

/// Right-hand sides of the weak partial derivative `d_dir` from a scalar
/// interior basis and per-edge scalar trace bases into test space `test`:
/// `-(phi, d_dir psi)_K + <chi, psi n_dir>_dK`. Returns `(interior, traces)`.
fn weak_partial_rhs(
    disc: &Discretization<'_>,
    cell: usize,
    interior: &CellBasis,
    traces: &[&dyn ScalarBasis],
    test: &CellBasis,
    dir: usize,
) -> (DMatrix<f64>, Vec<DMatrix<f64>>) {
    let cs = &disc.cells[cell];
    let rule = &cs.rule;
    let n_test = test.dim();
    let vals = tabulate(interior, rule);
    let mut rhs_int = DMatrix::zeros(n_test, interior.dim());
    for (q, (&p, &w)) in rule.points.iter().zip(&rule.weights).enumerate() {
        let g = test.grad(p);
        for a in 0..n_test {
            let s = -w * g[a][dir];
            for b in 0..interior.dim() {
                rhs_int[(a, b)] += s * vals[(q, b)];
            }
        }
    }
    let mut rhs_tr = Vec::with_capacity(traces.len());
    for (l, (&e, tb)) in disc.mesh.cell_edges(cell).iter().zip(traces).enumerate() {
        let n = disc.mesh.outward_normal(cell, l);
        let er = &disc.edges[e].rule;
        let mut m = DMatrix::zeros(n_test, tb.dim());
        for (&p, &w) in er.points.iter().zip(&er.weights) {
            let psi = test.eval(p);
            let chi = tb.eval(p);
            for a in 0..n_test {
                for c in 0..tb.dim() {
                    m[(a, c)] += w * psi[a] * chi[c] * n[dir];
                }
            }
        }
        rhs_tr.push(m);
    }
    (rhs_int, rhs_tr)
}

fn solve_mass(mass: &DMatrix<f64>, rhs: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = nalgebra::Cholesky::new(mass.clone()).ok_or_else(|| {
        crate::error::WgError::Singular("local mass matrix is not positive definite".into())
    })?;
    Ok(chol.solve(&rhs))
}

impl ElementOperators {
    pub fn build(disc: &Discretization<'_>, cell: usize) -> Result<Self> {
        let s = disc.spaces;
        let mesh = disc.mesh;
        let cs = &disc.cells[cell];
        let edges = mesh.cell_edges(cell);
        let m = edges.len();
        let nus = s.u_scalar();
        let nut = s.u_trace_scalar();
        let nu = s.u_interior() + m * s.u_trace();
        let np = s.p_interior() + m * s.p_trace();
        let npsi = s.p_interior();
        let nzeta = s.grad_p_scalar();

        let mass_p = crate::basis::mass_matrix(&cs.p_basis, &cs.rule);
        let mass_grad_p = crate::basis::mass_matrix(&cs.grad_p_basis, &cs.rule);

        let u_traces: Vec<&dyn ScalarBasis> =
            edges.iter().map(|&e| &disc.edges[e].u_basis as &dyn ScalarBasis).collect();
        let p_traces: Vec<&dyn ScalarBasis> =
            edges.iter().map(|&e| &disc.edges[e].p_basis as &dyn ScalarBasis).collect();

        // displacement: divergence and gradient share the same directional pieces
        let mut div_rhs = DMatrix::zeros(npsi, nu);
        let mut grad_rhs = DMatrix::zeros(4 * npsi, nu);
        for dir in 0..2 {
            let (ri, rt) = weak_partial_rhs(disc, cell, &cs.u_basis, &u_traces, &cs.p_basis, dir);
            for comp in 0..2 {
                let row0 = (2 * comp + dir) * npsi;
                let col0 = comp * nus;
                grad_rhs
                    .view_mut((row0, col0), (npsi, nus))
                    .copy_from(&ri);
                for (l, r) in rt.iter().enumerate() {
                    let c = s.u_interior() + l * s.u_trace() + comp * nut;
                    grad_rhs.view_mut((row0, c), (npsi, nut)).copy_from(r);
                }
            }
            // divergence uses component `dir` differentiated in direction `dir`
            div_rhs
                .view_mut((0, dir * nus), (npsi, nus))
                .copy_from(&ri);
            for (l, r) in rt.iter().enumerate() {
                let c = s.u_interior() + l * s.u_trace() + dir * nut;
                div_rhs.view_mut((0, c), (npsi, nut)).copy_from(r);
            }
        }
        let div = solve_mass(&mass_p, div_rhs)?;
        let mut grad = DMatrix::zeros(4 * npsi, nu);
        for blk in 0..4 {
            let rhs = grad_rhs.rows(blk * npsi, npsi).into_owned();
            grad.rows_mut(blk * npsi, npsi)
                .copy_from(&solve_mass(&mass_p, rhs)?);
        }

        let mut grad_p = DMatrix::zeros(2 * nzeta, np);
        for dir in 0..2 {
            let (ri, rt) =
                weak_partial_rhs(disc, cell, &cs.p_basis, &p_traces, &cs.grad_p_basis, dir);
            let mut rhs = DMatrix::zeros(nzeta, np);
            rhs.view_mut((0, 0), (nzeta, s.p_interior())).copy_from(&ri);
            for (l, r) in rt.iter().enumerate() {
                let c = s.p_interior() + l * s.p_trace();
                rhs.view_mut((0, c), (nzeta, s.p_trace())).copy_from(r);
            }
            grad_p
                .rows_mut(dir * nzeta, nzeta)
                .copy_from(&solve_mass(&mass_grad_p, rhs)?);
        }

        let mut u_jumps = Vec::with_capacity(m);
        let mut p_jumps = Vec::with_capacity(m);
        let mut edge_mass_u = Vec::with_capacity(m);
        let mut edge_mass_p = Vec::with_capacity(m);
        for (l, &e) in edges.iter().enumerate() {
            let es = &disc.edges[e];
            let er = &es.rule;
            // Q_b of interior traces: M_e^{-1} <chi, phi>_e
            let chi_u = tabulate(&es.u_basis, er);
            let chi_p = tabulate(&es.p_basis, er);
            let phi_u = tabulate(&cs.u_basis, er);
            let phi_p = tabulate(&cs.p_basis, er);
            let pu = es
                .u_projector
                .solve_matrix(&crate::basis::weighted_gram(&chi_u, &phi_u, &er.weights));
            let pp = es
                .p_projector
                .solve_matrix(&crate::basis::weighted_gram(&chi_p, &phi_p, &er.weights));

            let mut ju = DMatrix::zeros(s.u_trace(), nu);
            for comp in 0..2 {
                ju.view_mut((comp * nut, comp * nus), (nut, nus)).copy_from(&pu);
                let c = s.u_interior() + l * s.u_trace() + comp * nut;
                for k in 0..nut {
                    ju[(comp * nut + k, c + k)] = -1.0;
                }
            }
            let mut jp = DMatrix::zeros(s.p_trace(), np);
            jp.view_mut((0, 0), (s.p_trace(), s.p_interior())).copy_from(&pp);
            let c = s.p_interior() + l * s.p_trace();
            for k in 0..s.p_trace() {
                jp[(k, c + k)] = -1.0;
            }
            u_jumps.push(ju);
            p_jumps.push(jp);
            edge_mass_u.push(es.u_projector.mass().clone());
            edge_mass_p.push(es.p_projector.mass().clone());
        }

        Ok(Self {
            cell,
            h: mesh.cell_diameter(cell),
            area: mesh.cell_area(cell),
            div,
            grad,
            grad_p,
            u_jumps,
            p_jumps,
            mass_p,
            mass_grad_p,
            edge_mass_u,
            edge_mass_p,
        })
    }

    pub fn n_u_local(&self) -> usize {
        self.div.ncols()
    }

    pub fn n_p_local(&self) -> usize {
        self.grad_p.ncols()
    }
}

/// Builds the operators of every cell.
pub fn build_element_ops(disc: &Discretization<'_>, par: Parallelism) -> Result<Vec<ElementOperators>> {
    let ids: Vec<usize> = (0..disc.mesh.n_cells()).collect();
    par_map(par, &ids, |&c| ElementOperators::build(disc, c))
        .into_iter()
        .collect()
}

/// Largest residual of the three defining identities over all unit local
/// DOFs and all test basis functions of `cell`. Both sides are re-evaluated
/// pointwise on fresh, higher-degree rules independent of the ones used to
/// build the operators.
pub fn defining_residual(disc: &Discretization<'_>, ops: &ElementOperators) -> Result<f64> {
    let s = disc.spaces;
    let mesh = disc.mesh;
    let cell = ops.cell;
    let cs = &disc.cells[cell];
    let deg = s.operator_quad_degree() + 3;
    let rule = cell_rule(&mesh.cell_polygon(cell), deg)?;
    let edges = mesh.cell_edges(cell);
    let nus = s.u_scalar();
    let nut = s.u_trace_scalar();
    let npsi = s.p_interior();
    let nzeta = s.grad_p_scalar();
    let eval_poly = |b: &CellBasis, c: &[f64], p: Point| -> f64 {
        b.eval(p).iter().zip(c).map(|(x, y)| x * y).sum()
    };
    let scale = |m: &DMatrix<f64>| m.abs().max().max(1.0);
    let mut worst: f64 = 0.0;

    let edge_rules: Vec<_> = edges
        .iter()
        .map(|&e| {
            let [a, b] = mesh.edge_endpoints(e);
            edge_rule(a, b, deg)
        })
        .collect::<Result<_>>()?;

    // displacement unit DOFs
    for dof in 0..ops.n_u_local() {
        let mut v = DVector::zeros(ops.n_u_local());
        v[dof] = 1.0;
        let interior = |p: Point| -> [f64; 2] {
            [
                eval_poly(&cs.u_basis, &v.as_slice()[..nus], p),
                eval_poly(&cs.u_basis, &v.as_slice()[nus..2 * nus], p),
            ]
        };
        let trace = |l: usize, p: Point| -> [f64; 2] {
            let base = s.u_interior() + l * s.u_trace();
            let tb = &disc.edges[edges[l]].u_basis;
            let chi = tb.eval(p);
            let c = v.as_slice();
            [
                (0..nut).map(|k| chi[k] * c[base + k]).sum(),
                (0..nut).map(|k| chi[k] * c[base + nut + k]).sum(),
            ]
        };
        let dv = &ops.div * &v;
        let gv = &ops.grad * &v;
        for a in 0..npsi {
            let lhs = rule.integrate(|p| eval_poly(&cs.p_basis, dv.as_slice(), p) * cs.p_basis.eval(p)[a]);
            let mut rhs = -rule.integrate(|p| {
                let g = cs.p_basis.grad(p)[a];
                let w = interior(p);
                w[0] * g[0] + w[1] * g[1]
            });
            for (l, er) in edge_rules.iter().enumerate() {
                let n = mesh.outward_normal(cell, l);
                rhs += er.integrate(|p| {
                    let t = trace(l, p);
                    (t[0] * n[0] + t[1] * n[1]) * cs.p_basis.eval(p)[a]
                });
            }
            worst = worst.max((lhs - rhs).abs() / scale(&ops.div));
            for comp in 0..2 {
                for dir in 0..2 {
                    let blk = 2 * comp + dir;
                    let coeffs = &gv.as_slice()[blk * npsi..(blk + 1) * npsi];
                    let lhs = rule.integrate(|p| eval_poly(&cs.p_basis, coeffs, p) * cs.p_basis.eval(p)[a]);
                    let mut rhs = -rule.integrate(|p| interior(p)[comp] * cs.p_basis.grad(p)[a][dir]);
                    for (l, er) in edge_rules.iter().enumerate() {
                        let n = mesh.outward_normal(cell, l);
                        rhs += er.integrate(|p| trace(l, p)[comp] * cs.p_basis.eval(p)[a] * n[dir]);
                    }
                    worst = worst.max((lhs - rhs).abs() / scale(&ops.grad));
                }
            }
        }
    }

    // pressure unit DOFs
    let npi = s.p_interior();
    for dof in 0..ops.n_p_local() {
        let mut q = DVector::zeros(ops.n_p_local());
        q[dof] = 1.0;
        let gq = &ops.grad_p * &q;
        for a in 0..nzeta {
            for dir in 0..2 {
                let coeffs = &gq.as_slice()[dir * nzeta..(dir + 1) * nzeta];
                let lhs = rule.integrate(|p| {
                    eval_poly(&cs.grad_p_basis, coeffs, p) * cs.grad_p_basis.eval(p)[a]
                });
                let mut rhs = -rule.integrate(|p| {
                    eval_poly(&cs.p_basis, &q.as_slice()[..npi], p) * cs.grad_p_basis.grad(p)[a][dir]
                });
                for (l, er) in edge_rules.iter().enumerate() {
                    let n = mesh.outward_normal(cell, l);
                    let base = npi + l * s.p_trace();
                    let tb = &disc.edges[edges[l]].p_basis;
                    rhs += er.integrate(|p| {
                        let chi = tb.eval(p);
                        let t: f64 = (0..s.p_trace()).map(|k| chi[k] * q[base + k]).sum();
                        t * cs.grad_p_basis.eval(p)[a] * n[dir]
                    });
                }
                worst = worst.max((lhs - rhs).abs() / scale(&ops.grad_p));
            }
        }
    }
    Ok(worst)
}

/// Cell-wise max-coefficient differences of the three commutation identities
/// `div_w Q_h v = Q_0 div v`, `grad_w Q_h v = Q_0 grad v` and
/// `grad_w Q_h q = Q_0 grad q`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CommutativityResiduals {
    pub divergence: f64,
    pub gradient: f64,
    pub pressure_gradient: f64,
}

impl CommutativityResiduals {
    pub fn max(&self) -> f64 {
        self.divergence.max(self.gradient).max(self.pressure_gradient)
    }
}

/// `v` is the displacement field with its Jacobian `grad_v[c][d] = d v_c / d x_d`;
/// `q` the pressure field with its gradient.
pub fn apply_commutativity_check(
    disc: &Discretization<'_>,
    ops: &[ElementOperators],
    v: impl Fn(Point) -> [f64; 2],
    grad_v: impl Fn(Point) -> [[f64; 2]; 2],
    q: impl Fn(Point) -> f64,
    grad_q: impl Fn(Point) -> [f64; 2],
) -> CommutativityResiduals {
    let qv: WeakFunction = disc.project_displacement(&v);
    let qq: WeakFunction = disc.project_pressure(&q);
    let mut r = CommutativityResiduals::default();
    let npsi = disc.spaces.p_interior();
    let nzeta = disc.spaces.grad_p_scalar();
    for op in ops {
        let cs = &disc.cells[op.cell];
        let lv = qv.local(disc.mesh, op.cell);
        let lq = qq.local(disc.mesh, op.cell);
        let dv = &op.div * &lv;
        let div_exact = cs.p_projector.project(|p| {
            let g = grad_v(p);
            g[0][0] + g[1][1]
        });
        r.divergence = r.divergence.max((dv - div_exact).abs().max());
        let gv = &op.grad * &lv;
        for comp in 0..2 {
            for dir in 0..2 {
                let blk = 2 * comp + dir;
                let exact = cs.p_projector.project(|p| grad_v(p)[comp][dir]);
                let got = gv.rows(blk * npsi, npsi);
                r.gradient = r.gradient.max((got - exact).abs().max());
            }
        }
        let gq = &op.grad_p * &lq;
        for dir in 0..2 {
            let exact = cs.grad_p_projector.project(|p| grad_q(p)[dir]);
            let got = gq.rows(dir * nzeta, nzeta);
            r.pressure_gradient = r.pressure_gradient.max((got - exact).abs().max());
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_hybrid, generate_triangular, Mesh};
    use crate::weakspace::build_spaces;

    fn reference_triangle() -> Mesh {
        Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![vec![0, 1, 2]]).unwrap()
    }

    #[test]
    fn divergence_of_linear_field() {
        let m = reference_triangle();
        let disc = build_spaces(&m, 1, Parallelism::Sequential).unwrap();
        let ops = build_element_ops(&disc, Parallelism::Sequential).unwrap();
        let v = disc.project_displacement(|p| [p[0], 0.0]);
        let d = &ops[0].div * v.local(&m, 0);
        assert!((d[0] - 1.0).abs() < 1e-12);
        assert!(d[1].abs() < 1e-12 && d[2].abs() < 1e-12);
    }

    #[test]
    fn pressure_gradient_of_linear_field() {
        let m = reference_triangle();
        let disc = build_spaces(&m, 1, Parallelism::Sequential).unwrap();
        let ops = build_element_ops(&disc, Parallelism::Sequential).unwrap();
        let q = disc.project_pressure(|p| p[0]);
        let g = &ops[0].grad_p * q.local(&m, 0);
        assert!((g[0] - 1.0).abs() < 1e-12);
        assert!(g[1].abs() < 1e-12);
    }

    #[test]
    fn constant_interior_with_zero_trace_is_a_boundary_term() {
        // v_0 = (1, 2), v_b = 0: (D v, psi) = -(v_0, grad psi); compute directly
        let m = generate_hybrid(2).unwrap();
        let disc = build_spaces(&m, 1, Parallelism::Sequential).unwrap();
        let ops = build_element_ops(&disc, Parallelism::Sequential).unwrap();
        let s = disc.spaces;
        for op in &ops {
            let cs = &disc.cells[op.cell];
            let mut v = DVector::zeros(op.n_u_local());
            v[0] = 1.0;
            v[s.u_scalar()] = 2.0;
            let d = &op.div * &v;
            let rule = cell_rule(&m.cell_polygon(op.cell), 6).unwrap();
            let rhs = DVector::from_iterator(
                s.p_interior(),
                (0..s.p_interior()).map(|a| {
                    -rule.integrate(|p| {
                        let g = cs.p_basis.grad(p)[a];
                        g[0] + 2.0 * g[1]
                    })
                }),
            );
            let expected = nalgebra::Cholesky::new(op.mass_p.clone()).unwrap().solve(&rhs);
            assert!((d - expected).abs().max() < 1e-11);
        }
    }

    #[test]
    fn constants_have_zero_weak_derivatives() {
        let m = generate_hybrid(2).unwrap();
        let disc = build_spaces(&m, 1, Parallelism::Sequential).unwrap();
        let ops = build_element_ops(&disc, Parallelism::Sequential).unwrap();
        let v = disc.project_displacement(|_| [3.0, -1.0]);
        let q = disc.project_pressure(|_| 3.0);
        for op in &ops {
            assert!((&op.div * v.local(&m, op.cell)).abs().max() < 1e-12);
            assert!((&op.grad * v.local(&m, op.cell)).abs().max() < 1e-12);
            assert!((&op.grad_p * q.local(&m, op.cell)).abs().max() < 1e-12);
        }
    }

    #[test]
    fn defining_equations_hold() {
        let m = generate_hybrid(2).unwrap();
        let disc = build_spaces(&m, 1, Parallelism::Sequential).unwrap();
        let ops = build_element_ops(&disc, Parallelism::Sequential).unwrap();
        for op in &ops {
            let r = defining_residual(&disc, op).unwrap();
            assert!(r < 1e-11, "cell {}: {r}", op.cell);
        }
    }

    #[test]
    fn commutativity_for_cubic_field() {
        let m = generate_triangular(3).unwrap();
        let disc = build_spaces(&m, 1, Parallelism::Sequential).unwrap();
        let ops = build_element_ops(&disc, Parallelism::Sequential).unwrap();
        let r = apply_commutativity_check(
            &disc,
            &ops,
            |p| [p[0] * p[0] * p[1], p[0] * p[1] * p[1]],
            |p| [[2.0 * p[0] * p[1], p[0] * p[0]], [p[1] * p[1], 2.0 * p[0] * p[1]]],
            |_| 3.0,
            |_| [0.0, 0.0],
        );
        assert!(r.max() < 1e-10, "{r:?}");
        assert!(r.pressure_gradient < 1e-13);
    }

    #[test]
    fn rebuilding_a_cell_is_bit_identical() {
        let m = generate_triangular(4).unwrap();
        let disc = build_spaces(&m, 1, Parallelism::Sequential).unwrap();
        let a = ElementOperators::build(&disc, 5).unwrap();
        let b = ElementOperators::build(&disc, 5).unwrap();
        assert_eq!(a.div, b.div);
        assert_eq!(a.grad, b.grad);
        assert_eq!(a.grad_p, b.grad_p);
    }
}
