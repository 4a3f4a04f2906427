//! Self-checks of the discretization: mesh audits, quadrature exactness,
//! weak-operator identities, projection commutativity and the algebraic
//! structure of the step matrix.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::forms::{build_all_forms, stabilizer_p, stabilizer_u, Coefficients};
use crate::mesh::{generate_hybrid, generate_mixed, generate_rectangular, generate_triangular, Mesh, MeshFamily, Point};
use crate::parallel::Parallelism;
use crate::quadrature::{cell_rule, gauss_legendre};
use crate::system::assemble;
use crate::weakops::{apply_commutativity_check, build_element_ops, defining_residual};
use crate::weakspace::build_spaces;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl CheckOutcome {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.value.is_finite() && self.value < self.tolerance
    }
}

/// Polynomial `sum c_ab x^a y^b` with `a + b <= degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub terms: Vec<(usize, usize, f64)>,
}

impl Polynomial {
    pub fn random(degree: usize, rng: &mut impl Rng) -> Self {
        let mut terms = Vec::new();
        for total in 0..=degree {
            for b in 0..=total {
                terms.push((total - b, b, rng.random_range(-1.0..1.0)));
            }
        }
        Self { terms }
    }

    pub fn eval(&self, p: Point) -> f64 {
        self.terms
            .iter()
            .map(|&(a, b, c)| c * p[0].powi(a as i32) * p[1].powi(b as i32))
            .sum()
    }

    pub fn grad(&self, p: Point) -> [f64; 2] {
        let mut g = [0.0; 2];
        for &(a, b, c) in &self.terms {
            if a > 0 {
                g[0] += c * a as f64 * p[0].powi(a as i32 - 1) * p[1].powi(b as i32);
            }
            if b > 0 {
                g[1] += c * b as f64 * p[0].powi(a as i32) * p[1].powi(b as i32 - 1);
            }
        }
        g
    }
}

/// `int_K x^a y^b` by the divergence theorem, `1/(a+1) oint x^{a+1} y^b dy`,
/// with Gauss–Legendre on each side.
pub fn polygon_moment(polygon: &[Point], a: usize, b: usize) -> f64 {
    let (x, w) = gauss_legendre((a + b + 3) / 2 + 1);
    let k = polygon.len();
    let mut acc = 0.0;
    for i in 0..k {
        let p = polygon[i];
        let q = polygon[(i + 1) % k];
        let dy = q[1] - p[1];
        for (&s, &ws) in x.iter().zip(&w) {
            let t = 0.5 * (s + 1.0);
            let xx = p[0] + t * (q[0] - p[0]);
            let yy = p[1] + t * (q[1] - p[1]);
            acc += 0.5 * ws * dy * xx.powi(a as i32 + 1) * yy.powi(b as i32);
        }
    }
    acc / (a + 1) as f64
}

pub fn sample_polygons() -> Vec<(&'static str, Vec<Point>)> {
    vec![
        ("square", vec![[0.1, 0.2], [0.6, 0.2], [0.6, 0.7], [0.1, 0.7]]),
        ("triangle", vec![[0.2, 0.1], [0.9, 0.3], [0.4, 0.8]]),
        ("pentagon", vec![[0.0, 0.0], [1.0, 0.1], [1.3, 0.8], [0.5, 1.2], [-0.2, 0.6]]),
    ]
}

/// Largest relative error of the cell rule of degree `q` on the monomials
/// of degree `<= q`, for `q` in `0..=max_degree`.
pub fn quadrature_exactness(max_degree: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (_, poly) in sample_polygons() {
        for q in 0..=max_degree {
            let rule = cell_rule(&poly, q)?;
            for total in 0..=q {
                for b in 0..=total {
                    let a = total - b;
                    let exact = polygon_moment(&poly, a, b);
                    let got = rule.integrate(|p| p[0].powi(a as i32) * p[1].powi(b as i32));
                    worst = worst.max((got - exact).abs() / exact.abs().max(1e-3));
                }
            }
        }
    }
    Ok(worst)
}

pub fn mesh_audits() -> f64 {
    let mut failures = 0usize;
    let mut meshes: Vec<Result<Mesh>> = Vec::new();
    for n in [1, 2, 3, 5, 8] {
        for fam in [MeshFamily::Triangular, MeshFamily::Rectangular, MeshFamily::Hybrid] {
            meshes.push(fam.generate(n));
        }
    }
    meshes.push(generate_mixed());
    for m in meshes {
        let ok = m.and_then(|m| {
            m.audit()?;
            if (m.total_area() - 1.0).abs() > 1e-13 {
                return Err(crate::WgError::Geometry("area does not sum to 1".into()));
            }
            Ok(())
        });
        if ok.is_err() {
            failures += 1;
        }
    }
    failures as f64
}

/// Largest defining-equation residual over every cell of `mesh`.
pub fn operator_residuals(mesh: &Mesh, degree: usize, par: Parallelism) -> Result<f64> {
    let disc = build_spaces(mesh, degree, par)?;
    let ops = build_element_ops(&disc, par)?;
    let mut worst: f64 = 0.0;
    for op in &ops {
        worst = worst.max(defining_residual(&disc, op)?);
    }
    Ok(worst)
}

/// Commutativity residuals for `count` random polynomial fields of degree
/// `<= degree + 3` on triangular, rectangular and hybrid meshes.
pub fn commutativity(count: usize, degree: usize, seed: u64, par: Parallelism) -> Result<f64> {
    let meshes = [generate_triangular(2)?, generate_rectangular(2)?, generate_hybrid(3)?];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for m in &meshes {
        let disc = build_spaces(m, degree, par)?;
        let ops = build_element_ops(&disc, par)?;
        for _ in 0..count {
            let deg = rng.random_range(0..=degree + 3);
            let v1 = Polynomial::random(deg, &mut rng);
            let v2 = Polynomial::random(deg, &mut rng);
            let q = Polynomial::random(deg, &mut rng);
            let r = apply_commutativity_check(
                &disc,
                &ops,
                |p| [v1.eval(p), v2.eval(p)],
                |p| [v1.grad(p), v2.grad(p)],
                |p| q.eval(p),
                |p| q.grad(p),
            );
            worst = worst.max(r.max());
        }
    }
    Ok(worst)
}

/// `max(s_u(Q_h v, Q_h v), s_p(Q_h q, Q_h q))` for random `v` in
/// `[P_{j+1}]^2`, `q` in `P_j`.
pub fn stabilizer_consistency(mesh: &Mesh, degree: usize, seed: u64, par: Parallelism) -> Result<f64> {
    let disc = build_spaces(mesh, degree, par)?;
    let ops = build_element_ops(&disc, par)?;
    let forms = build_all_forms(&ops, &Coefficients::default(), par)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let v1 = Polynomial::random(degree + 1, &mut rng);
        let v2 = Polynomial::random(degree + 1, &mut rng);
        let q = Polynomial::random(degree, &mut rng);
        let v = disc.project_displacement(|p| [v1.eval(p), v2.eval(p)]);
        let qh = disc.project_pressure(|p| q.eval(p));
        worst = worst
            .max(stabilizer_u(&disc, &forms, &v).abs())
            .max(stabilizer_p(&disc, &forms, &qh).abs());
    }
    Ok(worst)
}

/// Symmetry defect of the step matrix (infinite if `A_u` fails Cholesky).
pub fn algebraic_structure(mesh: &Mesh, coeffs: &Coefficients, tau: f64, par: Parallelism) -> Result<f64> {
    let disc = build_spaces(mesh, 1, par)?;
    let ops = build_element_ops(&disc, par)?;
    let forms = build_all_forms(&ops, coeffs, par)?;
    let sys = assemble(&disc, &forms, coeffs, tau, par)?;
    if sys.check_displacement_spd().is_err() {
        return Ok(f64::INFINITY);
    }
    Ok(sys.matrix.symmetry_defect())
}

/// Every gate with its tolerance.
pub fn run_all(par: Parallelism) -> Result<Vec<CheckOutcome>> {
    let mixed = generate_mixed()?;
    let tri4 = generate_triangular(4)?;
    Ok(vec![
        CheckOutcome::new("mesh audits (failures)", mesh_audits(), 0.5),
        CheckOutcome::new("quadrature exactness q <= 8", quadrature_exactness(8)?, 1e-13),
        CheckOutcome::new("weak operator residual (mixed mesh)", operator_residuals(&mixed, 1, par)?, 1e-11),
        CheckOutcome::new("weak operator residual j=2 (hybrid)", operator_residuals(&generate_hybrid(2)?, 2, par)?, 1e-11),
        CheckOutcome::new("projection commutativity", commutativity(50, 1, 2024, par)?, 1e-10),
        CheckOutcome::new("stabilizer consistency", stabilizer_consistency(&mixed, 1, 11, par)?, 1e-12),
        CheckOutcome::new(
            "step matrix symmetry / A_u Cholesky",
            algebraic_structure(&tri4, &Coefficients::default(), 0.125, par)?,
            1e-12,
        ),
    ])
}
