//! Quadrature on polygons (centroid fan of collapsed Gauss triangles) and on
//! straight edges (Gauss–Legendre).

use crate::error::{Result, WgError};
use crate::mesh::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }

    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        // refresh the derivative at the converged node
        let mut p0 = 1.0;
        let mut p1 = 0.0;
        for k in 0..n {
            let p2 = p1;
            p1 = p0;
            p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
        }
        if n > 0 {
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn triangle_rule_into(a: Point, b: Point, c: Point, degree: usize, out: &mut QuadratureRule) {
    // collapsed square: x = a + u (b - a) + v (1 - u) (c - a), Jacobian 2|T| (1 - u)
    let n = (degree + 3) / 2;
    let (gx, gw) = gauss_legendre(n.max(1));
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    for (&xu, &wu) in gx.iter().zip(&gw) {
        let u = 0.5 * (xu + 1.0);
        for (&xv, &wv) in gx.iter().zip(&gw) {
            let v = 0.5 * (xv + 1.0);
            let s = u;
            let t = v * (1.0 - u);
            out.points.push([
                a[0] + s * (b[0] - a[0]) + t * (c[0] - a[0]),
                a[1] + s * (b[1] - a[1]) + t * (c[1] - a[1]),
            ]);
            out.weights.push(0.25 * wu * wv * (1.0 - u) * det);
        }
    }
}

/// Rule exact for polynomials of total degree `<= degree` on a simple,
/// counterclockwise polygon. Polygons with more than three vertices are fanned
/// from the vertex average.
pub fn cell_rule(polygon: &[Point], degree: usize) -> Result<QuadratureRule> {
    let k = polygon.len();
    if k < 3 {
        return Err(WgError::Geometry("polygon needs at least 3 vertices".into()));
    }
    let mut area = 0.0;
    for i in 0..k {
        let p = polygon[i];
        let q = polygon[(i + 1) % k];
        area += 0.5 * (p[0] * q[1] - q[0] * p[1]);
    }
    let scale = polygon
        .iter()
        .map(|p| p[0].abs().max(p[1].abs()))
        .fold(1e-300, f64::max);
    if area <= 1e-14 * scale * scale {
        return Err(WgError::Geometry(format!("degenerate polygon (area {area:e})")));
    }
    let mut rule = QuadratureRule {
        points: Vec::new(),
        weights: Vec::new(),
    };
    if k == 3 {
        triangle_rule_into(polygon[0], polygon[1], polygon[2], degree, &mut rule);
    } else {
        let cx = polygon.iter().map(|p| p[0]).sum::<f64>() / k as f64;
        let cy = polygon.iter().map(|p| p[1]).sum::<f64>() / k as f64;
        for i in 0..k {
            triangle_rule_into([cx, cy], polygon[i], polygon[(i + 1) % k], degree, &mut rule);
        }
    }
    Ok(rule)
}

/// Gauss–Legendre rule with `ceil((degree + 1) / 2)` points on the segment `a`–`b`.
pub fn edge_rule(a: Point, b: Point, degree: usize) -> Result<QuadratureRule> {
    let len = (b[0] - a[0]).hypot(b[1] - a[1]);
    if len <= 0.0 {
        return Err(WgError::Geometry("zero-length edge".into()));
    }
    let n = (degree + 2) / 2;
    let (gx, gw) = gauss_legendre(n.max(1));
    let points = gx
        .iter()
        .map(|&x| {
            let s = 0.5 * (x + 1.0);
            [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
        })
        .collect();
    let weights = gw.iter().map(|&w| 0.5 * w * len).collect();
    Ok(QuadratureRule { points, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Vec<Point> {
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    }

    #[test]
    fn gauss_legendre_small_cases() {
        let (x, w) = gauss_legendre(1);
        assert_eq!(x, vec![0.0]);
        assert!((w[0] - 2.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
        let (_, w) = gauss_legendre(9);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn square_measure() {
        let r = cell_rule(&unit_square(), 0).unwrap();
        assert!((r.measure() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn triangle_first_moment() {
        let r = cell_rule(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], 1).unwrap();
        assert!((r.integrate(|p| p[0]) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn hexagon_against_subdivision() {
        let hex: Vec<Point> = (0..6)
            .map(|i| {
                let a = std::f64::consts::PI / 3.0 * i as f64;
                [a.cos(), a.sin()]
            })
            .collect();
        let f = |p: Point| p[0] * p[0] * p[1] * p[1];
        let exact_rule = cell_rule(&hex, 4).unwrap().integrate(f);
        // midpoint sums over a fine uniform subdivision of each fan triangle
        let m = 400;
        let mut reference = 0.0;
        for i in 0..6 {
            let (b, c) = (hex[i], hex[(i + 1) % 6]);
            let area = 0.5 * (b[0] * c[1] - c[0] * b[1]);
            let cell = area / (m * m) as f64;
            for r in 0..m {
                for s in 0..(m - r) {
                    let up = |u: f64, v: f64| [u * b[0] + v * c[0], u * b[1] + v * c[1]];
                    let (u, v) = (r as f64, s as f64);
                    let g = up((u + 1.0 / 3.0) / m as f64, (v + 1.0 / 3.0) / m as f64);
                    reference += cell * f(g);
                    if s + r + 1 < m {
                        let g = up((u + 2.0 / 3.0) / m as f64, (v + 2.0 / 3.0) / m as f64);
                        reference += cell * f(g);
                    }
                }
            }
        }
        assert!((exact_rule - reference).abs() < 1e-5, "{exact_rule} vs {reference}");
        // closed form for the regular unit hexagon: 7 sqrt(3) / 160
        assert!((exact_rule - 7.0 * 3f64.sqrt() / 160.0).abs() < 1e-13);
    }

    #[test]
    fn edge_moments() {
        let r = edge_rule([0.0, 0.0], [1.0, 0.0], 1).unwrap();
        assert!((r.integrate(|p| p[0]) - 0.5).abs() < 1e-15);
        let r = edge_rule([0.0, 0.0], [0.0, 2.0], 2).unwrap();
        assert!((r.integrate(|p| p[1] * p[1]) - 8.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn edge_rule_degree_seven() {
        // Legendre P7 on [-1, 1] integrates to 0, P7^0 * x^0 = 2; mix both
        let p7 = |x: f64| {
            (429.0 * x.powi(7) - 693.0 * x.powi(5) + 315.0 * x.powi(3) - 35.0 * x) / 16.0
        };
        let r = edge_rule([-1.0, 0.0], [1.0, 0.0], 7).unwrap();
        assert_eq!(r.len(), 4);
        let v = r.integrate(|p| 3.0 * p7(p[0]) + 2.0 + p[0].powi(6));
        assert!((v - (4.0 + 2.0 / 7.0)).abs() < 1e-14);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(cell_rule(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], 2).is_err());
        assert!(edge_rule([1.0, 1.0], [1.0, 1.0], 2).is_err());
    }
}
