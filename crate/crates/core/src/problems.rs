//! Manufactured Biot problems on the unit square and a finite-difference
//! residual check of their source terms.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::forms::Coefficients;
use crate::mesh::Point;

pub type ScalarField = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(Point, f64) -> [f64; 2] + Send + Sync>;
/// `J[c][d] = d v_c / d x_d`.
pub type JacobianField = Arc<dyn Fn(Point, f64) -> [[f64; 2]; 2] + Send + Sync>;

/// Exact fields, sources and coefficients of one problem. Boundary data are
/// homogeneous Dirichlet for `u` everywhere; on Neumann pressure edges the
/// flux `kappa grad p . n` is taken from `grad_p`.
#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub coeffs: Coefficients,
    pub u: VectorField,
    pub grad_u: JacobianField,
    pub p: ScalarField,
    pub grad_p: VectorField,
    pub f: VectorField,
    pub g: ScalarField,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("coeffs", &self.coeffs)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn u_at(&self, x: Point, t: f64) -> [f64; 2] {
        (self.u)(x, t)
    }

    pub fn p_at(&self, x: Point, t: f64) -> f64 {
        (self.p)(x, t)
    }

    pub fn gamma(&self, x: Point, n: Point, t: f64) -> f64 {
        let g = (self.grad_p)(x, t);
        self.coeffs.kappa * (g[0] * n[0] + g[1] * n[1])
    }

    /// Problem with every field and source identically zero.
    pub fn zero(coeffs: Coefficients) -> Self {
        Self {
            name: "zero".into(),
            coeffs,
            u: Arc::new(|_, _| [0.0; 2]),
            grad_u: Arc::new(|_, _| [[0.0; 2]; 2]),
            p: Arc::new(|_, _| 0.0),
            grad_p: Arc::new(|_, _| [0.0; 2]),
            f: Arc::new(|_, _| [0.0; 2]),
            g: Arc::new(|_, _| 0.0),
        }
    }
}

// 1D factors of the polynomial solution: a = x^2 (1-x)^2, b = x (1-x)(1-2x).
fn a0(z: f64) -> f64 {
    z * z * (1.0 - z) * (1.0 - z)
}
fn a1(z: f64) -> f64 {
    2.0 * z - 6.0 * z * z + 4.0 * z * z * z
}
fn a2(z: f64) -> f64 {
    2.0 - 12.0 * z + 12.0 * z * z
}
fn b0(z: f64) -> f64 {
    z - 3.0 * z * z + 2.0 * z * z * z
}
fn b1(z: f64) -> f64 {
    1.0 - 6.0 * z + 6.0 * z * z
}
fn b2(z: f64) -> f64 {
    -6.0 + 12.0 * z
}

/// Polynomial-in-space solution with `lambda = mu = kappa = c0 = 1`.
pub fn problem_poly() -> ProblemSpec {
    problem_poly_with(Coefficients::default()).expect("default coefficients are valid")
}

/// `u = (10 a(x) b(y) e^-t, -10 b(x) a(y) e^-2t)`, `p = 10 a(x) b(y) e^-3t`.
pub fn problem_poly_with(coeffs: Coefficients) -> Result<ProblemSpec> {
    coeffs.validate()?;
    let Coefficients { lambda, mu, kappa, c0, .. } = coeffs;
    let lm = lambda + mu;
    Ok(ProblemSpec {
        name: "poly".into(),
        coeffs,
        u: Arc::new(|[x, y], t| {
            [
                10.0 * a0(x) * b0(y) * (-t).exp(),
                -10.0 * b0(x) * a0(y) * (-2.0 * t).exp(),
            ]
        }),
        grad_u: Arc::new(|[x, y], t| {
            let e1 = 10.0 * (-t).exp();
            let e2 = -10.0 * (-2.0 * t).exp();
            [
                [e1 * a1(x) * b0(y), e1 * a0(x) * b1(y)],
                [e2 * b1(x) * a0(y), e2 * b0(x) * a1(y)],
            ]
        }),
        p: Arc::new(|[x, y], t| 10.0 * a0(x) * b0(y) * (-3.0 * t).exp()),
        grad_p: Arc::new(|[x, y], t| {
            let e = 10.0 * (-3.0 * t).exp();
            [e * a1(x) * b0(y), e * a0(x) * b1(y)]
        }),
        f: Arc::new(move |[x, y], t| {
            let e1 = 10.0 * (-t).exp();
            let e2 = 10.0 * (-2.0 * t).exp();
            let e3 = 10.0 * (-3.0 * t).exp();
            let f1 = -lm * (e1 * a2(x) * b0(y) - e2 * b1(x) * a1(y))
                - mu * e1 * (a2(x) * b0(y) + a0(x) * b2(y))
                + e3 * a1(x) * b0(y);
            let f2 = -lm * (e1 * a1(x) * b1(y) - e2 * b0(x) * a2(y))
                + mu * e2 * (b2(x) * a0(y) + b0(x) * a2(y))
                + e3 * a0(x) * b1(y);
            [f1, f2]
        }),
        g: Arc::new(move |[x, y], t| {
            let e1 = 10.0 * (-t).exp();
            let e2 = 10.0 * (-2.0 * t).exp();
            let e3 = 10.0 * (-3.0 * t).exp();
            -3.0 * c0 * e3 * a0(x) * b0(y) + (-e1 * a1(x) * b0(y) + 2.0 * e2 * b0(x) * a1(y))
                - kappa * e3 * (a2(x) * b0(y) + a0(x) * b2(y))
        }),
    })
}

/// Trigonometric solution with a divergence of size `1 / (mu + lambda)`,
/// `mu = kappa = c0 = 1`.
pub fn problem_locking(lambda: f64) -> Result<ProblemSpec> {
    problem_locking_with(Coefficients {
        lambda,
        ..Coefficients::default()
    })
}

pub fn problem_locking_with(coeffs: Coefficients) -> Result<ProblemSpec> {
    coeffs.validate()?;
    let Coefficients { lambda, mu, kappa, c0, .. } = coeffs;
    let l = 1.0 / (mu + lambda);
    Ok(ProblemSpec {
        name: "locking".into(),
        coeffs,
        u: Arc::new(move |[x, y], t| {
            let s = (PI * x).sin() * (PI * y).sin();
            let e = (-t).exp();
            [
                e * ((2.0 * PI * y).sin() * ((2.0 * PI * x).cos() - 1.0) + l * s),
                e * ((2.0 * PI * x).sin() * (1.0 - (2.0 * PI * y).cos()) + l * s),
            ]
        }),
        grad_u: Arc::new(move |[x, y], t| {
            let e = (-t).exp();
            let (sx, cx) = (PI * x).sin_cos();
            let (sy, cy) = (PI * y).sin_cos();
            let (s2x, c2x) = (2.0 * PI * x).sin_cos();
            let (s2y, c2y) = (2.0 * PI * y).sin_cos();
            [
                [
                    e * (-2.0 * PI * s2y * s2x + l * PI * cx * sy),
                    e * (2.0 * PI * c2y * (c2x - 1.0) + l * PI * sx * cy),
                ],
                [
                    e * (2.0 * PI * c2x * (1.0 - c2y) + l * PI * cx * sy),
                    e * (2.0 * PI * s2x * s2y + l * PI * sx * cy),
                ],
            ]
        }),
        p: Arc::new(|[x, y], t| (-t).exp() * (PI * x).sin() * (PI * y).sin()),
        grad_p: Arc::new(|[x, y], t| {
            let e = (-t).exp() * PI;
            [e * (PI * x).cos() * (PI * y).sin(), e * (PI * x).sin() * (PI * y).cos()]
        }),
        f: Arc::new(move |[x, y], t| {
            let e = (-t).exp();
            let pi2 = PI * PI;
            let (sx, cx) = (PI * x).sin_cos();
            let (sy, cy) = (PI * y).sin_cos();
            let s = sx * sy;
            let cc = cx * cy;
            let f1 = -pi2 * (cc - s)
                + 4.0 * mu * pi2 * (2.0 * PI * y).sin() * (2.0 * (2.0 * PI * x).cos() - 1.0)
                + 2.0 * mu * pi2 * l * s
                + PI * cx * sy;
            let f2 = -pi2 * (cc - s)
                - 4.0 * mu * pi2 * (2.0 * PI * x).sin() * (2.0 * (2.0 * PI * y).cos() - 1.0)
                + 2.0 * mu * pi2 * l * s
                + PI * sx * cy;
            [e * f1, e * f2]
        }),
        g: Arc::new(move |[x, y], t| {
            let e = (-t).exp();
            let s = (PI * x).sin() * (PI * y).sin();
            let div = l * PI * (PI * (x + y)).sin();
            e * (-c0 * s - div + 2.0 * kappa * PI * PI * s)
        }),
    })
}

/// Finite-difference residuals of one problem at `(x, t)`: the momentum
/// residual (two components), the mass residual, and the largest mismatch
/// between the supplied first derivatives and their difference quotients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdResidual {
    pub momentum: [f64; 2],
    pub mass: f64,
    pub derivatives: f64,
}

impl FdResidual {
    /// Largest residual with the momentum part divided by `max(1, lambda)`.
    /// Difference quotients of `(lambda + mu) grad div u` carry rounding
    /// errors of size `lambda eps / h^2`, which this scaling removes.
    pub fn scaled_max(&self, coeffs: &Coefficients) -> f64 {
        let s = coeffs.lambda.max(1.0);
        (self.momentum[0].abs() / s)
            .max(self.momentum[1].abs() / s)
            .max(self.mass.abs())
            .max(self.derivatives)
    }

    pub fn max(&self) -> f64 {
        self.momentum[0]
            .abs()
            .max(self.momentum[1].abs())
            .max(self.mass.abs())
            .max(self.derivatives)
    }
}

const D1: [(f64, f64); 4] = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];
const D2: [(f64, f64); 5] = [
    (-2.0, -1.0 / 12.0),
    (-1.0, 16.0 / 12.0),
    (0.0, -30.0 / 12.0),
    (1.0, 16.0 / 12.0),
    (2.0, -1.0 / 12.0),
];

/// Evaluates the PDE residuals using only `u`, `p`, `f`, `g` (and checks
/// `grad_u`, `grad_p`) with fourth-order central differences of step `h`.
pub fn fd_residual(problem: &ProblemSpec, x: Point, t: f64, h: f64) -> FdResidual {
    let u = |p: Point, t: f64| (problem.u)(p, t);
    let pr = |p: Point, t: f64| (problem.p)(p, t);
    let shift = |d: usize, s: f64| -> Point {
        let mut q = x;
        q[d] += s * h;
        q
    };
    let shift2 = |s: f64, r: f64| -> Point { [x[0] + s * h, x[1] + r * h] };

    // second derivatives of u components and p
    let d2 = |fun: &dyn Fn(Point) -> f64, d: usize| -> f64 {
        D2.iter().map(|&(s, c)| c * fun(shift(d, s))).sum::<f64>() / (h * h)
    };
    let dxy = |fun: &dyn Fn(Point) -> f64| -> f64 {
        let mut acc = 0.0;
        for &(s, cs) in &D1 {
            for &(r, cr) in &D1 {
                acc += cs * cr * fun(shift2(s, r));
            }
        }
        acc / (h * h)
    };
    let d1 = |fun: &dyn Fn(Point) -> f64, d: usize| -> f64 {
        D1.iter().map(|&(s, c)| c * fun(shift(d, s))).sum::<f64>() / h
    };

    let u1 = |p: Point| u(p, t)[0];
    let u2 = |p: Point| u(p, t)[1];
    let pp = |p: Point| pr(p, t);
    let u1xx = d2(&u1, 0);
    let u1yy = d2(&u1, 1);
    let u2xx = d2(&u2, 0);
    let u2yy = d2(&u2, 1);
    let u1xy = dxy(&u1);
    let u2xy = dxy(&u2);
    let Coefficients { lambda, mu, kappa, c0, .. } = problem.coeffs;
    let lm = lambda + mu;
    let f = (problem.f)(x, t);
    let grad_div = [u1xx + u2xy, u1xy + u2yy];
    let px = d1(&pp, 0);
    let py = d1(&pp, 1);
    let momentum = [
        -lm * grad_div[0] - mu * (u1xx + u1yy) + px - f[0],
        -lm * grad_div[1] - mu * (u2xx + u2yy) + py - f[1],
    ];

    // d/dt (c0 p + div u) - kappa lap p
    let storage = |s: f64| -> f64 {
        let tt = t + s * h;
        let div = d1(&|q| u(q, tt)[0], 0) + d1(&|q| u(q, tt)[1], 1);
        c0 * pr(x, tt) + div
    };
    let dt: f64 = D1.iter().map(|&(s, c)| c * storage(s)).sum::<f64>() / h;
    let lap_p = d2(&pp, 0) + d2(&pp, 1);
    let mass = dt - kappa * lap_p - (problem.g)(x, t);

    let gu = (problem.grad_u)(x, t);
    let gp = (problem.grad_p)(x, t);
    let mut derivatives: f64 = 0.0;
    for (c, comp) in [&u1 as &dyn Fn(Point) -> f64, &u2].into_iter().enumerate() {
        for d in 0..2 {
            derivatives = derivatives.max((d1(comp, d) - gu[c][d]).abs());
        }
    }
    derivatives = derivatives.max((px - gp[0]).abs()).max((py - gp[1]).abs());

    FdResidual {
        momentum,
        mass,
        derivatives,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_values_vanish() {
        for pb in [problem_poly(), problem_locking(1e4).unwrap()] {
            for s in [0.0, 0.13, 0.5, 0.77, 1.0] {
                for x in [[0.0, s], [1.0, s], [s, 0.0], [s, 1.0]] {
                    for t in [0.0, 0.4, 1.0] {
                        let u = pb.u_at(x, t);
                        assert!(u[0].abs() < 1e-14 && u[1].abs() < 1e-14, "{} {x:?}", pb.name);
                        assert!(pb.p_at(x, t).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn point_values() {
        assert_eq!(problem_poly().p_at([0.5, 0.5], 0.0), 0.0);
        assert!((problem_locking(1.0).unwrap().p_at([0.5, 0.5], 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_lame_rejected() {
        assert!(problem_locking(-1.0).is_err());
        assert!(problem_locking(-0.5).is_ok());
        assert!(problem_locking(-2.0).is_err());
        assert!(problem_locking(f64::INFINITY).is_err());
    }

    #[test]
    fn fd_residual_small() {
        for pb in [problem_poly(), problem_locking(1.0).unwrap()] {
            let r = fd_residual(&pb, [0.31, 0.62], 0.4, 1e-4);
            assert!(r.max() < 1e-6, "{}: {r:?}", pb.name);
        }
    }

    #[test]
    fn fd_residual_large_lambda() {
        for l in [1e4, 1e8] {
            let pb = problem_locking(l).unwrap();
            let r = fd_residual(&pb, [0.71, 0.22], 0.9, 1e-4);
            assert!(r.scaled_max(&pb.coeffs) < 1e-6, "{l}: {r:?}");
            assert!(r.mass.abs() < 1e-6);
        }
    }

    #[test]
    fn fd_residual_detects_wrong_source() {
        let mut pb = problem_poly();
        let f = pb.f.clone();
        pb.f = Arc::new(move |x, t| {
            let v = f(x, t);
            [v[0] + 1e-3, v[1]]
        });
        assert!(fd_residual(&pb, [0.3, 0.6], 0.2, 1e-4).max() > 5e-4);
    }
}
