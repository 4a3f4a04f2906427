//! Errors against projected exact solutions, observed orders, and report
//! output (CSV and plot data).

use std::fmt::Write as _;

use nalgebra::DVector;

use crate::forms::{norm_triple_v, norm_triple_w, pressure_l2_sq, LocalForms};
use crate::problems::ProblemSpec;
use crate::weakspace::{Discretization, WeakFunction};

/// `||Q_0 u - u_0||`, `|||Q_h u - u_h|||_V`, `||Q_0 p - p_0||`, `|||Q_h p - p_h|||_W`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorQuad {
    pub u_l2: f64,
    pub u_v: f64,
    pub p_l2: f64,
    pub p_w: f64,
}

impl ErrorQuad {
    pub fn as_array(&self) -> [f64; 4] {
        [self.u_l2, self.u_v, self.p_l2, self.p_w]
    }
}

pub const ERROR_NAMES: [&str; 4] = ["u_l2", "u_V", "p_l2", "p_W"];

/// `sum_K (e_0, e_0)_K` for the interior part of a displacement.
pub fn displacement_l2(disc: &Discretization<'_>, v: &WeakFunction) -> f64 {
    let ns = disc.spaces.u_scalar();
    let mut acc = 0.0;
    for (c, cs) in disc.cells.iter().enumerate() {
        let m = cs.u_projector.mass();
        let e = v.cell_interior(c);
        for comp in 0..2 {
            let x = DVector::from_column_slice(&e[comp * ns..(comp + 1) * ns]);
            acc += x.dot(&(m * &x));
        }
    }
    acc.max(0.0).sqrt()
}

/// Errors of `(u_h, p_h)` against `Q_h u(t)`, `Q_h p(t)`.
pub fn measure_errors(
    disc: &Discretization<'_>,
    forms: &[LocalForms],
    problem: &ProblemSpec,
    u_h: &WeakFunction,
    p_h: &WeakFunction,
    t: f64,
) -> ErrorQuad {
    let eu = disc.interpolate_displacement(|x| (problem.u)(x, t)).sub(u_h);
    let ep = disc.interpolate_pressure(|x| (problem.p)(x, t)).sub(p_h);
    ErrorQuad {
        u_l2: displacement_l2(disc, &eu),
        u_v: norm_triple_v(disc, forms, &eu),
        p_l2: pressure_l2_sq(forms, &ep).max(0.0).sqrt(),
        p_w: norm_triple_w(disc, forms, &ep),
    }
}

/// `log(e_prev / e) / log(h_prev / h)`, undefined when either error is zero
/// or the labels coincide.
pub fn observed_order(e_prev: f64, e: f64, h_prev: f64, h: f64) -> Option<f64> {
    if !(e_prev > 0.0 && e > 0.0 && h_prev > 0.0 && h > 0.0) || h_prev == h {
        return None;
    }
    let r = (e_prev / e).ln() / (h_prev / h).ln();
    r.is_finite().then_some(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    /// `n` (or `N_h`) of the mesh family.
    pub level: usize,
    /// Mesh label used for orders (`sqrt 2 / n`, `1 / n` or `1 / N_h`).
    pub h: f64,
    pub dofs: usize,
    pub errors: ErrorQuad,
    pub steps: usize,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub problem: String,
    pub mesh: String,
    pub lambda: f64,
    pub rows: Vec<LevelResult>,
}

/// Formats like C's `%.3E`: `1.762E-04`.
pub fn sci(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.3E}");
    let (mant, exp) = s.split_once('E').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mant}E{sign}{:02}", e.abs())
}

impl StudyReport {
    /// Orders between consecutive rows; the first row has none.
    pub fn orders(&self) -> Vec<[Option<f64>; 4]> {
        let mut out = Vec::with_capacity(self.rows.len());
        for (k, row) in self.rows.iter().enumerate() {
            if k == 0 {
                out.push([None; 4]);
                continue;
            }
            let prev = &self.rows[k - 1];
            let a = prev.errors.as_array();
            let b = row.errors.as_array();
            out.push(std::array::from_fn(|i| observed_order(a[i], b[i], prev.h, row.h)));
        }
        out
    }

    /// Orders of the last two rows.
    pub fn finest_orders(&self) -> [Option<f64>; 4] {
        self.orders().last().copied().unwrap_or([None; 4])
    }

    pub const CSV_HEADER: &'static str =
        "level,h,dofs,err_u_l2,ord_u_l2,err_u_V,ord_u_V,err_p_l2,ord_p_l2,err_p_W,ord_p_W";

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(Self::CSV_HEADER);
        s.push('\n');
        for (row, ord) in self.rows.iter().zip(self.orders()) {
            let _ = write!(s, "{},{},{}", row.level, sci(row.h), row.dofs);
            for (e, o) in row.errors.as_array().iter().zip(ord) {
                let o = o.map_or_else(|| "-".to_string(), |o| format!("{o:.4}"));
                let _ = write!(s, ",{},{}", sci(*e), o);
            }
            s.push('\n');
        }
        s
    }

    /// One block per error curve: a `# name` line, then `h error` pairs.
    pub fn plot_data(&self) -> String {
        let mut s = String::new();
        for (i, name) in ERROR_NAMES.iter().enumerate() {
            let _ = writeln!(s, "# {} {} lambda={} {}", self.problem, self.mesh, self.lambda, name);
            for row in &self.rows {
                let _ = writeln!(s, "{} {}", sci(row.h), sci(row.errors.as_array()[i]));
            }
            s.push('\n');
        }
        s
    }
}
