//! Element matrices of the bilinear forms `a_u`, `a_p`, `b`, the stabilizers
//! `s_u`, `s_p`, the storage mass `(c_0 p_0, q_0)`, and local load vectors.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, WgError};
use crate::mesh::{Point, PressureBc};
use crate::parallel::{par_map, Parallelism};
use crate::weakops::ElementOperators;
use crate::weakspace::{Discretization, WeakFunction};

/// Cell length `h_K` in the `h_K^{-1}` weight of the stabilizers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StabilizerScale {
    /// `h_K = |K|^{1/2}`.
    #[default]
    SqrtArea,
    /// `h_K = diam K`.
    Diameter,
}

impl StabilizerScale {
    pub fn length(self, ops: &ElementOperators) -> f64 {
        match self {
            StabilizerScale::SqrtArea => ops.area.sqrt(),
            StabilizerScale::Diameter => ops.h,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StabilizerScale::SqrtArea => "sqrt-area",
            StabilizerScale::Diameter => "diameter",
        }
    }
}

impl std::str::FromStr for StabilizerScale {
    type Err = WgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt-area" => Ok(StabilizerScale::SqrtArea),
            "diameter" => Ok(StabilizerScale::Diameter),
            _ => Err(WgError::invalid(format!("unknown stabilizer scale '{s}' (sqrt-area|diameter)"))),
        }
    }
}

/// Material coefficients of the Biot system (Biot–Willis constant fixed to 1)
/// and the stabilizer length scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub lambda: f64,
    pub mu: f64,
    pub kappa: f64,
    pub c0: f64,
    pub stabilizer: StabilizerScale,
}

impl Default for Coefficients {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            mu: 1.0,
            kappa: 1.0,
            c0: 1.0,
            stabilizer: StabilizerScale::default(),
        }
    }
}

impl Coefficients {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(WgError::invalid(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.kappa > 0.0) {
            return Err(WgError::invalid(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.lambda + self.mu > 0.0) || !self.lambda.is_finite() {
            return Err(WgError::invalid(format!(
                "lambda = {} gives a degenerate Lame pair (lambda + mu must be positive)",
                self.lambda
            )));
        }
        if !(self.c0 >= 0.0) {
            return Err(WgError::invalid(format!("c0 must be non-negative, got {}", self.c0)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LocalForms {
    pub cell: usize,
    /// `a_u` restricted to the cell, including `s_u`.
    pub au: DMatrix<f64>,
    /// `a_p` restricted to the cell, including `s_p`.
    pub ap: DMatrix<f64>,
    pub su: DMatrix<f64>,
    pub sp: DMatrix<f64>,
    /// `b(v, q) = q_0^T B v`, rows over pressure interior DOFs.
    pub b: DMatrix<f64>,
    /// Pressure interior mass matrix (without `c_0`).
    pub mp: DMatrix<f64>,
}

fn block_diag(m: &DMatrix<f64>, copies: usize) -> DMatrix<f64> {
    let n = m.nrows();
    let mut out = DMatrix::zeros(n * copies, n * copies);
    for k in 0..copies {
        out.view_mut((k * n, k * n), (n, n)).copy_from(m);
    }
    out
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

pub fn build_local_forms(ops: &ElementOperators, coeffs: &Coefficients) -> Result<LocalForms> {
    coeffs.validate()?;
    let inv_h = 1.0 / coeffs.stabilizer.length(ops);

    let mut su = DMatrix::zeros(ops.n_u_local(), ops.n_u_local());
    for (j, me) in ops.u_jumps.iter().zip(&ops.edge_mass_u) {
        su += j.transpose() * block_diag(me, 2) * j;
    }
    su *= inv_h;
    let mut sp = DMatrix::zeros(ops.n_p_local(), ops.n_p_local());
    for (j, me) in ops.p_jumps.iter().zip(&ops.edge_mass_p) {
        sp += j.transpose() * me * j;
    }
    sp *= inv_h;

    let div_part = ops.div.transpose() * &ops.mass_p * &ops.div;
    let grad_part = ops.grad.transpose() * block_diag(&ops.mass_p, 4) * &ops.grad;
    let mut au = div_part * (coeffs.lambda + coeffs.mu) + grad_part * coeffs.mu + &su;
    let mut ap = ops.grad_p.transpose() * block_diag(&ops.mass_grad_p, 2) * &ops.grad_p * coeffs.kappa + &sp;
    symmetrize(&mut au);
    symmetrize(&mut ap);
    symmetrize(&mut su);
    symmetrize(&mut sp);

    Ok(LocalForms {
        cell: ops.cell,
        au,
        ap,
        su,
        sp,
        b: &ops.mass_p * &ops.div,
        mp: ops.mass_p.clone(),
    })
}

pub fn build_all_forms(
    ops: &[ElementOperators],
    coeffs: &Coefficients,
    par: Parallelism,
) -> Result<Vec<LocalForms>> {
    par_map(par, ops, |op| build_local_forms(op, coeffs))
        .into_iter()
        .collect()
}

/// `(f, v_0)_K` in the local displacement layout.
pub fn load_u(disc: &Discretization<'_>, cell: usize, n_local: usize, f: impl Fn(Point) -> [f64; 2]) -> DVector<f64> {
    let cs = &disc.cells[cell];
    let ns = disc.spaces.u_scalar();
    let mut v = DVector::zeros(n_local);
    let fx = cs.u_projector.moments(|p| f(p)[0]);
    let fy = cs.u_projector.moments(|p| f(p)[1]);
    v.rows_mut(0, ns).copy_from(&fx);
    v.rows_mut(ns, ns).copy_from(&fy);
    v
}

/// `(g, q_0)_K` in the local pressure layout.
pub fn load_p(disc: &Discretization<'_>, cell: usize, n_local: usize, g: impl Fn(Point) -> f64) -> DVector<f64> {
    let cs = &disc.cells[cell];
    let mut v = DVector::zeros(n_local);
    let m = cs.p_projector.moments(g);
    v.rows_mut(0, m.len()).copy_from(&m);
    v
}

/// `<gamma, q_b>` on one Neumann edge, in the edge's `P_{j-1}(e)` basis.
/// `gamma` receives the point and the outward normal.
pub fn load_neumann(disc: &Discretization<'_>, edge: usize, gamma: impl Fn(Point, Point) -> f64) -> DVector<f64> {
    let e = &disc.mesh.edges()[edge];
    debug_assert_eq!(e.pressure_bc, Some(PressureBc::Neumann));
    let (cell, local) = e.cells[0];
    let n = disc.mesh.outward_normal(cell, local);
    disc.edges[edge].p_projector.moments(|p| gamma(p, n))
}

/// `|||v|||_V = a_u(v, v)^{1/2}`.
pub fn norm_triple_v(disc: &Discretization<'_>, forms: &[LocalForms], v: &WeakFunction) -> f64 {
    forms
        .iter()
        .map(|f| {
            let l = v.local(disc.mesh, f.cell);
            l.dot(&(&f.au * &l))
        })
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

/// `|||q|||_W = a_p(q, q)^{1/2}`.
pub fn norm_triple_w(disc: &Discretization<'_>, forms: &[LocalForms], q: &WeakFunction) -> f64 {
    forms
        .iter()
        .map(|f| {
            let l = q.local(disc.mesh, f.cell);
            l.dot(&(&f.ap * &l))
        })
        .sum::<f64>()
        .max(0.0)
        .sqrt()
}

/// `s_u(v, v)` summed over cells.
pub fn stabilizer_u(disc: &Discretization<'_>, forms: &[LocalForms], v: &WeakFunction) -> f64 {
    forms
        .iter()
        .map(|f| {
            let l = v.local(disc.mesh, f.cell);
            l.dot(&(&f.su * &l))
        })
        .sum()
}

/// `s_p(q, q)` summed over cells.
pub fn stabilizer_p(disc: &Discretization<'_>, forms: &[LocalForms], q: &WeakFunction) -> f64 {
    forms
        .iter()
        .map(|f| {
            let l = q.local(disc.mesh, f.cell);
            l.dot(&(&f.sp * &l))
        })
        .sum()
}

/// `sum_K (q_0, p_0)_K` of pressure interiors.
pub fn pressure_l2_sq(forms: &[LocalForms], q: &WeakFunction) -> f64 {
    forms
        .iter()
        .map(|f| {
            let c = DVector::from_column_slice(q.cell_interior(f.cell));
            c.dot(&(&f.mp * &c))
        })
        .sum()
}
