//! Scaled monomial bases on cells and edges, mass matrices and L² projections.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Result, WgError};
use crate::mesh::Point;
use crate::quadrature::QuadratureRule;

/// Dimension of P_j in two variables.
pub fn dim_cell(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

pub fn dim_edge(degree: usize) -> usize {
    degree + 1
}

/// Shape of a polynomial space; vector and matrix kinds are componentwise
/// copies of the scalar space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    CellScalar,
    CellVector,
    CellMatrix,
    EdgeScalar,
    EdgeVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolySpace {
    pub degree: usize,
    pub kind: SpaceKind,
}

impl PolySpace {
    pub fn new(degree: usize, kind: SpaceKind) -> Self {
        Self { degree, kind }
    }

    pub fn components(&self) -> usize {
        match self.kind {
            SpaceKind::CellScalar | SpaceKind::EdgeScalar => 1,
            SpaceKind::CellVector | SpaceKind::EdgeVector => 2,
            SpaceKind::CellMatrix => 4,
        }
    }

    pub fn scalar_dim(&self) -> usize {
        match self.kind {
            SpaceKind::EdgeScalar | SpaceKind::EdgeVector => dim_edge(self.degree),
            _ => dim_cell(self.degree),
        }
    }

    pub fn dim(&self) -> usize {
        self.components() * self.scalar_dim()
    }
}

/// Anything that evaluates a scalar polynomial basis at a point.
pub trait ScalarBasis {
    fn dim(&self) -> usize;
    fn eval_into(&self, p: Point, out: &mut [f64]);

    fn eval(&self, p: Point) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        self.eval_into(p, &mut v);
        v
    }
}

/// Monomials `((x - x_K)/h_K)^a ((y - y_K)/h_K)^b`, `a + b <= degree`, in
/// graded order (total degree, then increasing power of y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellBasis {
    pub center: Point,
    pub scale: f64,
    pub degree: usize,
}

impl CellBasis {
    pub fn new(center: Point, scale: f64, degree: usize) -> Self {
        Self {
            center,
            scale,
            degree,
        }
    }

    /// Exponent pairs `(a, b)` in basis order.
    pub fn exponents(degree: usize) -> Vec<(usize, usize)> {
        let mut e = Vec::with_capacity(dim_cell(degree));
        for d in 0..=degree {
            for b in 0..=d {
                e.push((d - b, b));
            }
        }
        e
    }

    fn local(&self, p: Point) -> (f64, f64) {
        (
            (p[0] - self.center[0]) / self.scale,
            (p[1] - self.center[1]) / self.scale,
        )
    }

    /// Gradient of every basis function at `p`.
    pub fn grad(&self, p: Point) -> Vec<[f64; 2]> {
        let (x, y) = self.local(p);
        let inv = 1.0 / self.scale;
        Self::exponents(self.degree)
            .into_iter()
            .map(|(a, b)| {
                let dx = if a == 0 {
                    0.0
                } else {
                    a as f64 * x.powi(a as i32 - 1) * y.powi(b as i32) * inv
                };
                let dy = if b == 0 {
                    0.0
                } else {
                    b as f64 * x.powi(a as i32) * y.powi(b as i32 - 1) * inv
                };
                [dx, dy]
            })
            .collect()
    }
}

impl ScalarBasis for CellBasis {
    fn dim(&self) -> usize {
        dim_cell(self.degree)
    }

    fn eval_into(&self, p: Point, out: &mut [f64]) {
        let (x, y) = self.local(p);
        let mut i = 0;
        for d in 0..=self.degree {
            for b in 0..=d {
                out[i] = x.powi((d - b) as i32) * y.powi(b as i32);
                i += 1;
            }
        }
    }
}

/// Powers of the scaled arclength coordinate `t = ((p - m) . t_e) / |e|`,
/// `t in [-1/2, 1/2]`, with `t_e` the global edge direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeBasis {
    pub midpoint: Point,
    pub tangent: Point,
    pub length: f64,
    pub degree: usize,
}

impl EdgeBasis {
    pub fn new(a: Point, b: Point, degree: usize) -> Self {
        let length = (b[0] - a[0]).hypot(b[1] - a[1]);
        Self {
            midpoint: [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])],
            tangent: [(b[0] - a[0]) / length, (b[1] - a[1]) / length],
            length,
            degree,
        }
    }
}

impl ScalarBasis for EdgeBasis {
    fn dim(&self) -> usize {
        dim_edge(self.degree)
    }

    fn eval_into(&self, p: Point, out: &mut [f64]) {
        let t = ((p[0] - self.midpoint[0]) * self.tangent[0]
            + (p[1] - self.midpoint[1]) * self.tangent[1])
            / self.length;
        let mut v = 1.0;
        for o in out.iter_mut().take(self.degree + 1) {
            *o = v;
            v *= t;
        }
    }
}

/// Basis values at every quadrature point, `rows = points`, `cols = basis`.
pub fn tabulate(basis: &impl ScalarBasis, rule: &QuadratureRule) -> DMatrix<f64> {
    let n = basis.dim();
    let mut t = DMatrix::zeros(rule.len(), n);
    let mut buf = vec![0.0; n];
    for (q, &p) in rule.points.iter().enumerate() {
        basis.eval_into(p, &mut buf);
        for (a, &v) in buf.iter().enumerate() {
            t[(q, a)] = v;
        }
    }
    t
}

/// `M_ab = sum_q w_q phi_a(x_q) phi_b(x_q)`.
pub fn mass_matrix(basis: &impl ScalarBasis, rule: &QuadratureRule) -> DMatrix<f64> {
    let t = tabulate(basis, rule);
    weighted_gram(&t, &t, &rule.weights)
}

/// `sum_q w_q A[q, a] B[q, b]`.
pub fn weighted_gram(a: &DMatrix<f64>, b: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let mut wa = a.clone();
    for (q, &wq) in w.iter().enumerate() {
        wa.row_mut(q).scale_mut(wq);
    }
    wa.transpose() * b
}

/// L² projection onto a scalar space: mass matrix factor plus the
/// quadrature tabulation used for right-hand sides.
#[derive(Debug, Clone)]
pub struct Projector {
    mass: DMatrix<f64>,
    factor: Cholesky<f64, Dyn>,
    table: DMatrix<f64>,
    rule: QuadratureRule,
}

impl Projector {
    pub fn new(basis: &impl ScalarBasis, rule: QuadratureRule) -> Result<Self> {
        let table = tabulate(basis, &rule);
        let mass = weighted_gram(&table, &table, &rule.weights);
        let factor = Cholesky::new(mass.clone())
            .ok_or_else(|| WgError::Singular("mass matrix is not positive definite".into()))?;
        Ok(Self {
            mass,
            factor,
            table,
            rule,
        })
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn dim(&self) -> usize {
        self.mass.nrows()
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Solves `M c = b`.
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.factor.solve(rhs)
    }

    pub fn solve_matrix(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.factor.solve(rhs)
    }

    /// Moments `(f, phi_a)` by the stored rule.
    pub fn moments(&self, f: impl Fn(Point) -> f64) -> DVector<f64> {
        let mut b = DVector::zeros(self.dim());
        for (q, (&p, &w)) in self.rule.points.iter().zip(&self.rule.weights).enumerate() {
            let fv = w * f(p);
            for a in 0..self.dim() {
                b[a] += fv * self.table[(q, a)];
            }
        }
        b
    }

    pub fn project(&self, f: impl Fn(Point) -> f64) -> DVector<f64> {
        self.solve(&self.moments(f))
    }
}

/// Evaluates `sum_a c_a phi_a(p)`.
pub fn eval_combination(basis: &impl ScalarBasis, coeffs: &[f64], p: Point) -> f64 {
    basis.eval(p).iter().zip(coeffs).map(|(a, b)| a * b).sum()
}
