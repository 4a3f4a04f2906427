//! Global assembly and solution of one backward Euler step.
//!
//! The second equation is multiplied by `-tau` so the step matrix is
//!
//! ```text
//! [  A_u        -B^T            ] [u^n]   [ F(t_n)                                      ]
//! [ -B    -(c0 M_p + tau A_p)  ] [p^n] = [ -tau G(t_n) - tau N(t_n) - c0 M_p p^{n-1} - B u^{n-1} ]
//! ```
//!
//! over free DOFs only. The history part of the right-hand side is stored as
//! one sparse operator acting on the previous global state.

use std::io::Write;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Side;

use crate::error::{Result, WgError};
use crate::forms::{load_neumann, load_p, load_u, Coefficients, LocalForms};
use crate::mesh::PressureBc;
use crate::parallel::{par_map, Parallelism};
use crate::problems::ProblemSpec;
use crate::weakspace::{Discretization, FieldKind, WeakFunction};

/// Compressed sparse row matrix with sorted, duplicate-free columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Duplicates are summed in input order, so the result depends only on
    /// the order of `entries`.
    pub fn from_triplets(nrows: usize, ncols: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            debug_assert!(r < nrows && c < ncols);
            if last == Some((r, c)) {
                *values.last_mut().expect("nonempty") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max |a_ij - a_ji| / max |a_ij|`.
    pub fn symmetry_defect(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// Rows and columns in `[r0, r1) x [c0, c1)`, re-indexed from zero.
    pub fn sub_block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> CsrMatrix {
        let mut t = Vec::new();
        for i in rows.clone() {
            for (j, v) in self.row(i) {
                if cols.contains(&j) {
                    t.push((i - rows.start, j - cols.start, v));
                }
            }
        }
        CsrMatrix::from_triplets(rows.len(), cols.len(), t)
    }

    pub fn to_faer(&self) -> Result<SparseColMat<usize, f64>> {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                t.push(Triplet::new(i, j, v));
            }
        }
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &t)
            .map_err(|e| WgError::invalid(format!("sparse matrix construction failed: {e:?}")))
    }

    /// Writes the matrix as `i j value` lines (0-based).
    pub fn write_coordinate(&self, out: &mut impl Write) -> std::io::Result<()> {
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                writeln!(out, "{i} {j} {v:e}")?;
            }
        }
        Ok(())
    }
}

/// Result of one linear solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    /// `||b - A x||_2 / ||b||_2` (zero when `b = 0`).
    pub relative_residual: f64,
    /// `||b - A x||_inf / (||A||_inf ||x||_inf + ||b||_inf)`.
    pub backward_error: f64,
    pub refinements: usize,
}

/// Step matrix over free DOFs, the history operator, and a cached factorization.
pub struct GlobalSystem {
    pub n_u: usize,
    pub n_p: usize,
    pub tau: f64,
    pub coeffs: Coefficients,
    pub matrix: CsrMatrix,
    /// Maps the previous global state to its right-hand-side contribution.
    pub history: CsrMatrix,
    norm_inf: f64,
    lu: Option<faer::sparse::linalg::solvers::Lu<usize, f64>>,
}

impl std::fmt::Debug for GlobalSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GlobalSystem")
            .field("n_u", &self.n_u)
            .field("n_p", &self.n_p)
            .field("tau", &self.tau)
            .field("nnz", &self.matrix.nnz())
            .field("factored", &self.lu.is_some())
            .finish()
    }
}

type Entries = Vec<(usize, usize, f64)>;

fn cell_entries(disc: &Discretization<'_>, lf: &LocalForms, tau: f64, c0: f64) -> (Entries, Entries) {
    let mesh = disc.mesh;
    let gu = disc.dofs.u_local(mesh, lf.cell);
    let gp = disc.dofs.p_local(mesh, lf.cell);
    let npi = disc.spaces.p_interior();
    let mut a = Vec::new();
    let mut h = Vec::new();
    for (i, ri) in gu.iter().enumerate() {
        let Some(ri) = *ri else { continue };
        for (j, cj) in gu.iter().enumerate() {
            if let Some(cj) = *cj {
                a.push((ri, cj, lf.au[(i, j)]));
            }
        }
    }
    for q in 0..npi {
        let rq = gp[q].expect("pressure interiors are free");
        for (j, cj) in gu.iter().enumerate() {
            if let Some(cj) = *cj {
                let v = -lf.b[(q, j)];
                a.push((rq, cj, v));
                a.push((cj, rq, v));
                h.push((rq, cj, v));
            }
        }
        for r in 0..npi {
            let rr = gp[r].expect("pressure interiors are free");
            let m = c0 * lf.mp[(q, r)];
            a.push((rq, rr, -m));
            h.push((rq, rr, -m));
        }
    }
    for (i, ri) in gp.iter().enumerate() {
        let Some(ri) = *ri else { continue };
        for (j, cj) in gp.iter().enumerate() {
            if let Some(cj) = *cj {
                a.push((ri, cj, -tau * lf.ap[(i, j)]));
            }
        }
    }
    (a, h)
}

/// Assembles the step matrix for time step `tau` and factors it.
pub fn assemble(
    disc: &Discretization<'_>,
    forms: &[LocalForms],
    coeffs: &Coefficients,
    tau: f64,
    par: Parallelism,
) -> Result<GlobalSystem> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(WgError::invalid(format!("time step must be positive, got {tau}")));
    }
    if forms.len() != disc.mesh.n_cells() {
        return Err(WgError::invalid(format!(
            "{} local forms for {} cells",
            forms.len(),
            disc.mesh.n_cells()
        )));
    }
    coeffs.validate()?;
    let n = disc.dofs.total();
    let parts = par_map(par, forms, |lf| cell_entries(disc, lf, tau, coeffs.c0));
    let total: usize = parts.iter().map(|(a, _)| a.len()).sum();
    let mut a = Vec::with_capacity(total);
    let mut h = Vec::new();
    for (pa, ph) in parts {
        a.extend(pa);
        h.extend(ph);
    }
    let matrix = CsrMatrix::from_triplets(n, n, a);
    let history = CsrMatrix::from_triplets(n, n, h);
    let mut sys = GlobalSystem {
        n_u: disc.dofs.n_u,
        n_p: disc.dofs.n_p,
        tau,
        coeffs: *coeffs,
        norm_inf: matrix.norm_inf(),
        matrix,
        history,
        lu: None,
    };
    sys.factorize()?;
    Ok(sys)
}

impl GlobalSystem {
    pub fn dim(&self) -> usize {
        self.n_u + self.n_p
    }

    pub fn factorize(&mut self) -> Result<()> {
        if self.lu.is_none() {
            let lu = self
                .matrix
                .to_faer()?
                .sp_lu()
                .map_err(|e| WgError::Singular(format!("step matrix LU failed: {e:?}")))?;
            self.lu = Some(lu);
        }
        Ok(())
    }

    /// The displacement block `A_u`.
    pub fn displacement_block(&self) -> CsrMatrix {
        self.matrix.sub_block(0..self.n_u, 0..self.n_u)
    }

    /// Sparse Cholesky of `A_u`; succeeds only if the block is positive definite.
    pub fn check_displacement_spd(&self) -> Result<()> {
        let au = self.displacement_block().to_faer()?;
        au.sp_cholesky(Side::Lower)
            .map(|_| ())
            .map_err(|e| WgError::Singular(format!("A_u is not positive definite: {e:?}")))
    }

    fn residual(&self, b: &[f64], x: &[f64]) -> Vec<f64> {
        let ax = self.matrix.matvec(x);
        b.iter().zip(ax).map(|(bi, ai)| bi - ai).collect()
    }

    /// Solves `A x = b` with up to three steps of iterative refinement.
    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, SolveReport)> {
        let n = self.dim();
        if b.len() != n {
            return Err(WgError::invalid(format!("rhs length {} != {n}", b.len())));
        }
        let lu = self
            .lu
            .as_ref()
            .ok_or_else(|| WgError::Singular("system is not factored".into()))?;
        let apply = |r: &[f64]| -> Vec<f64> {
            let rhs = faer::Mat::<f64>::from_fn(n, 1, |i, _| r[i]);
            let sol = lu.solve(&rhs);
            (0..n).map(|i| sol[(i, 0)]).collect()
        };
        let b_norm2 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let b_inf = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut x = apply(b);
        let mut r = self.residual(b, &x);
        let measure = |r: &[f64], x: &[f64]| -> (f64, f64) {
            let r2 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            let rinf = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let xinf = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let rel = if b_norm2 > 0.0 { r2 / b_norm2 } else { r2 };
            let denom = self.norm_inf * xinf + b_inf;
            let bwd = if denom > 0.0 { rinf / denom } else { rinf };
            (rel, bwd)
        };
        let (mut rel, mut bwd) = measure(&r, &x);
        let mut refinements = 0;
        while refinements < 3 && rel > 1e-14 && bwd > 1e-16 {
            let dx = apply(&r);
            let cand: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + d).collect();
            let rc = self.residual(b, &cand);
            let (rel_c, bwd_c) = measure(&rc, &cand);
            refinements += 1;
            if rel_c >= rel {
                break;
            }
            x = cand;
            r = rc;
            rel = rel_c;
            bwd = bwd_c;
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(WgError::Singular("non-finite solution".into()));
        }
        Ok((
            x,
            SolveReport {
                relative_residual: rel,
                backward_error: bwd,
                refinements,
            },
        ))
    }

    /// Writes the matrix in coordinate format plus a sidecar with the block sizes.
    pub fn dump(&self, matrix_out: &mut impl Write, sidecar: &mut impl Write) -> std::io::Result<()> {
        self.matrix.write_coordinate(matrix_out)?;
        writeln!(sidecar, "n_u {}", self.n_u)?;
        writeln!(sidecar, "n_p {}", self.n_p)?;
        writeln!(sidecar, "tau {:e}", self.tau)?;
        writeln!(sidecar, "nnz {}", self.matrix.nnz())
    }
}

/// Load part of the step right-hand side at time `t`:
/// `[F(t); -tau G(t) - tau N(t)]` in global DOF numbering.
pub fn assemble_loads(
    disc: &Discretization<'_>,
    problem: &ProblemSpec,
    t: f64,
    tau: f64,
    par: Parallelism,
) -> Vec<f64> {
    let mesh = disc.mesh;
    let ids: Vec<usize> = (0..mesh.n_cells()).collect();
    let s = disc.spaces;
    let locals = par_map(par, &ids, |&c| {
        let m = mesh.cell_edges(c).len();
        let fu = load_u(disc, c, s.u_interior() + m * s.u_trace(), |x| (problem.f)(x, t));
        let gp = load_p(disc, c, s.p_interior() + m * s.p_trace(), |x| (problem.g)(x, t));
        (fu, gp)
    });
    let mut rhs = vec![0.0; disc.dofs.total()];
    for (c, (fu, gp)) in locals.into_iter().enumerate() {
        let start = disc.dofs.u_interior_start(c);
        for i in 0..s.u_interior() {
            rhs[start + i] += fu[i];
        }
        let start = disc.dofs.p_interior_start(c);
        for i in 0..s.p_interior() {
            rhs[start + i] -= tau * gp[i];
        }
    }
    for (e, edge) in mesh.edges().iter().enumerate() {
        if edge.pressure_bc == Some(PressureBc::Neumann) {
            let start = disc.dofs.p_trace_start(e).expect("Neumann traces are free");
            let v = load_neumann(disc, e, |x, n| problem.gamma(x, n, t));
            for (k, vk) in v.iter().enumerate() {
                rhs[start + k] -= tau * vk;
            }
        }
    }
    rhs
}

/// Global state vector of a displacement/pressure pair.
pub fn gather_state(disc: &Discretization<'_>, u: &WeakFunction, p: &WeakFunction) -> Vec<f64> {
    let mut x = vec![0.0; disc.dofs.total()];
    u.gather_into(&disc.dofs, &mut x);
    p.gather_into(&disc.dofs, &mut x);
    x
}

/// Splits a global vector into a displacement/pressure pair; eliminated
/// traces are set to zero.
pub fn scatter_state(disc: &Discretization<'_>, x: &[f64]) -> (WeakFunction, WeakFunction) {
    let mut u = WeakFunction::zeros(FieldKind::Displacement, disc.spaces, disc.mesh);
    let mut p = WeakFunction::zeros(FieldKind::Pressure, disc.spaces, disc.mesh);
    u.scatter_from(&disc.dofs, x);
    p.scatter_from(&disc.dofs, x);
    (u, p)
}

/// One backward Euler step from `(u_prev, p_prev)` with loads at `t`.
pub fn solve_step(
    system: &GlobalSystem,
    disc: &Discretization<'_>,
    problem: &ProblemSpec,
    u_prev: &WeakFunction,
    p_prev: &WeakFunction,
    t: f64,
    par: Parallelism,
) -> Result<(WeakFunction, WeakFunction, SolveReport)> {
    let mut rhs = assemble_loads(disc, problem, t, system.tau, par);
    let prev = gather_state(disc, u_prev, p_prev);
    for (r, h) in rhs.iter_mut().zip(system.history.matvec(&prev)) {
        *r += h;
    }
    let (x, report) = system.solve(&rhs)?;
    let (u, p) = scatter_state(disc, &x);
    Ok((u, p, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::build_all_forms;
    use crate::mesh::{generate_hybrid, generate_triangular, Mesh};
    use crate::weakops::build_element_ops;
    use crate::weakspace::build_spaces;
    use std::sync::Arc;

    const SEQ: Parallelism = Parallelism::Sequential;

    fn system_for(m: &Mesh, c: Coefficients, tau: f64) -> (Discretization<'_>, Vec<LocalForms>, GlobalSystem) {
        let disc = build_spaces(m, 1, SEQ).unwrap();
        let ops = build_element_ops(&disc, SEQ).unwrap();
        let forms = build_all_forms(&ops, &c, SEQ).unwrap();
        let sys = assemble(&disc, &forms, &c, tau, SEQ).unwrap();
        (disc, forms, sys)
    }

    #[test]
    fn csr_sums_duplicates_and_multiplies() {
        let m = CsrMatrix::from_triplets(2, 3, vec![(1, 2, 1.0), (0, 0, 2.0), (1, 2, 0.5), (0, 1, -1.0)]);
        assert_eq!(m.nnz(), 3);
        assert_eq!(m.get(1, 2), 1.5);
        assert_eq!(m.get(1, 0), 0.0);
        assert_eq!(m.matvec(&[1.0, 2.0, 4.0]), vec![0.0, 6.0]);
    }

    #[test]
    fn dimension_and_symmetry() {
        let m = generate_triangular(2).unwrap();
        let (_, _, sys) = system_for(&m, Coefficients::default(), 0.5);
        assert_eq!(sys.dim(), 160);
        assert!(sys.matrix.symmetry_defect() < 1e-12);
        sys.check_displacement_spd().unwrap();
        assert!(sys.matrix.sub_block(0..sys.n_u, 0..sys.n_u).symmetry_defect() < 1e-14);
    }

    #[test]
    fn pressure_block_is_linear_in_tau() {
        let m = Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![vec![0, 1, 2], vec![0, 2, 3]],
        )
        .unwrap();
        let c = Coefficients::default();
        let (_, _, s1) = system_for(&m, c, 0.25);
        let (_, _, s2) = system_for(&m, c, 0.5);
        let (_, _, s0) = system_for(&m, Coefficients { c0: 0.0, ..c }, 0.25);
        let n = s1.dim();
        for i in s1.n_u..n {
            for j in s1.n_u..n {
                // -(c0 M + tau A_p): remove the mass part using the c0 = 0 system
                let t1 = s0.matrix.get(i, j);
                let mass = s1.matrix.get(i, j) - t1;
                let t2 = s2.matrix.get(i, j) - mass;
                assert!((t2 - 2.0 * t1).abs() < 1e-14 * t1.abs().max(1.0));
            }
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let m = generate_hybrid(2).unwrap();
        let c = Coefficients::default();
        let (disc, _, sys) = system_for(&m, c, 0.1);
        let pb = ProblemSpec::zero(c);
        let (u, p, r) = solve_step(&sys, &disc, &pb, &disc.zero_displacement(), &disc.zero_pressure(), 0.1, SEQ).unwrap();
        assert!(u.interior.iter().chain(&p.interior).all(|&v| v == 0.0));
        assert_eq!(r.relative_residual, 0.0);
    }

    #[test]
    fn constant_pressure_is_steady_with_neumann_boundary() {
        let m = generate_triangular(3).unwrap().with_pressure_bc(|_| PressureBc::Neumann);
        let c = Coefficients::default();
        let (disc, _, sys) = system_for(&m, c, 0.1);
        let pb = ProblemSpec::zero(c);
        let u0 = disc.zero_displacement();
        let p0 = disc.interpolate_pressure(|_| 2.5);
        let (u, p, r) = solve_step(&sys, &disc, &pb, &u0, &p0, 0.1, SEQ).unwrap();
        assert!(r.relative_residual < 1e-12);
        assert!(u.interior.iter().chain(&u.trace).all(|v| v.abs() < 1e-11));
        let d = p.sub(&p0);
        assert!(d.interior.iter().chain(&d.trace).all(|v| v.abs() < 1e-11));
    }

    #[test]
    fn linear_pressure_steady_state_is_exact() {
        // u = 0, p = x: f = grad p = (1, 0), g = 0, flux kappa n_x on Neumann sides
        let m = generate_hybrid(3).unwrap().with_pressure_bc(|x| {
            if x[0] < 1e-12 {
                PressureBc::Dirichlet
            } else {
                PressureBc::Neumann
            }
        });
        let c = Coefficients { lambda: 3.0, ..Default::default() };
        let (disc, _, sys) = system_for(&m, c, 0.05);
        let mut pb = ProblemSpec::zero(c);
        pb.p = Arc::new(|x, _| x[0]);
        pb.grad_p = Arc::new(|_, _| [1.0, 0.0]);
        pb.f = Arc::new(|_, _| [1.0, 0.0]);
        let p_exact = disc.interpolate_pressure(|x| x[0]);
        let (u, p, r) = solve_step(&sys, &disc, &pb, &disc.zero_displacement(), &p_exact, 0.05, SEQ).unwrap();
        assert!(r.relative_residual < 1e-10);
        assert!(u.interior.iter().chain(&u.trace).all(|v| v.abs() < 1e-9));
        let d = p.sub(&p_exact);
        assert!(d.interior.iter().chain(&d.trace).all(|v| v.abs() < 1e-9), "{d:?}");
    }

    #[test]
    fn permuted_cells_give_permuted_matrix() {
        let m = generate_hybrid(2).unwrap();
        let order: Vec<usize> = (0..m.n_cells()).rev().collect();
        let mp = m.permuted_cells(&order).unwrap();
        let c = Coefficients::default();
        let (d1, _, s1) = system_for(&m, c, 0.1);
        let (d2, _, s2) = system_for(&mp, c, 0.1);
        // permutation of DOFs induced by mapping interiors cell-by-cell and traces edge-by-edge
        let mut perm = vec![usize::MAX; d1.dofs.total()];
        for (new_c, &old_c) in order.iter().enumerate() {
            let a = d1.dofs.u_local(&m, old_c);
            let b = d2.dofs.u_local(&mp, new_c);
            let pa = d1.dofs.p_local(&m, old_c);
            let pb = d2.dofs.p_local(&mp, new_c);
            for (x, y) in a.iter().zip(&b).chain(pa.iter().zip(&pb)) {
                if let (Some(x), Some(y)) = (x, y) {
                    perm[*x] = *y;
                }
            }
        }
        assert!(perm.iter().all(|&p| p != usize::MAX));
        for i in 0..s1.dim() {
            for (j, v) in s1.matrix.row(i) {
                let w = s2.matrix.get(perm[i], perm[j]);
                assert!((v - w).abs() < 1e-13 * v.abs().max(1.0));
            }
        }
        assert_eq!(s1.matrix.nnz(), s2.matrix.nnz());
    }

    #[test]
    fn dump_format() {
        let m = generate_triangular(1).unwrap();
        let (_, _, sys) = system_for(&m, Coefficients::default(), 0.5);
        let mut a = Vec::new();
        let mut b = Vec::new();
        sys.dump(&mut a, &mut b).unwrap();
        let text = String::from_utf8(a).unwrap();
        assert_eq!(text.lines().count(), sys.matrix.nnz());
        let first: Vec<&str> = text.lines().next().unwrap().split(' ').collect();
        assert_eq!(first.len(), 3);
        assert!(String::from_utf8(b).unwrap().contains(&format!("n_u {}", sys.n_u)));
    }

    #[test]
    fn rejects_bad_tau() {
        let m = generate_triangular(1).unwrap();
        let disc = build_spaces(&m, 1, SEQ).unwrap();
        let ops = build_element_ops(&disc, SEQ).unwrap();
        let c = Coefficients::default();
        let forms = build_all_forms(&ops, &c, SEQ).unwrap();
        assert!(assemble(&disc, &forms, &c, 0.0, SEQ).is_err());
        assert!(assemble(&disc, &forms[..1], &c, 0.1, SEQ).is_err());
    }
}
