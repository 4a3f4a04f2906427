//! Study configuration (`key = value` text) and the level/λ sweep runner.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::analysis::{measure_errors, LevelResult, StudyReport};
use crate::error::{Result, WgError};
use crate::forms::{Coefficients, StabilizerScale};
use crate::mesh::{load_mesh, Mesh, MeshFamily};
use crate::parallel::{par_map, with_threads, Parallelism};
use crate::problems::{problem_locking_with, problem_poly_with, ProblemSpec};
use crate::stepper::{Stepper, TimeGrid};
use crate::weakspace::build_spaces;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Poly,
    Locking,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Poly => "poly",
            ProblemKind::Locking => "locking",
        }
    }

    pub fn build(self, coeffs: Coefficients) -> Result<ProblemSpec> {
        match self {
            ProblemKind::Poly => problem_poly_with(coeffs),
            ProblemKind::Locking => problem_locking_with(coeffs),
        }
    }
}

impl FromStr for ProblemKind {
    type Err = WgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poly" => Ok(ProblemKind::Poly),
            "locking" => Ok(ProblemKind::Locking),
            _ => Err(WgError::invalid(format!("unknown problem '{s}' (poly|locking)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Family(MeshFamily),
    File(PathBuf),
}

impl MeshSource {
    pub fn name(&self) -> String {
        match self {
            MeshSource::Family(f) => f.name().to_string(),
            MeshSource::File(p) => format!("file:{}", p.display()),
        }
    }
}

impl FromStr for MeshSource {
    type Err = WgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.strip_prefix("file:") {
            Some(p) if !p.is_empty() => Ok(MeshSource::File(PathBuf::from(p))),
            Some(_) => Err(WgError::invalid("file: mesh source needs a path")),
            None => Ok(MeshSource::Family(s.parse()?)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauRule {
    /// `tau = label^2`.
    H2,
    Fixed(f64),
}

impl TauRule {
    pub fn tau(self, label: f64) -> f64 {
        match self {
            TauRule::H2 => label * label,
            TauRule::Fixed(t) => t,
        }
    }

    pub fn name(self) -> String {
        match self {
            TauRule::H2 => "h2".into(),
            TauRule::Fixed(t) => format!("fixed:{t:?}"),
        }
    }
}

impl FromStr for TauRule {
    type Err = WgError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "h2" {
            return Ok(TauRule::H2);
        }
        let v = s
            .strip_prefix("fixed:")
            .ok_or_else(|| WgError::invalid(format!("unknown tau rule '{s}' (h2|fixed:<value>)")))?;
        let t: f64 = v
            .parse()
            .map_err(|_| WgError::invalid(format!("bad fixed time step '{v}'")))?;
        if !(t > 0.0) || !t.is_finite() {
            return Err(WgError::invalid(format!("fixed time step must be positive, got {t}")));
        }
        Ok(TauRule::Fixed(t))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub problem: ProblemKind,
    pub mesh: MeshSource,
    pub levels: Vec<usize>,
    pub degree: usize,
    pub lambdas: Vec<f64>,
    pub tau: TauRule,
    pub final_time: f64,
    pub mu: f64,
    pub kappa: f64,
    pub c0: f64,
    pub stabilizer: StabilizerScale,
    pub out: Option<PathBuf>,
    pub verbose: bool,
    /// Worker count; 0 uses the runtime default, 1 runs sequentially.
    pub threads: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::Poly,
            mesh: MeshSource::Family(MeshFamily::Triangular),
            levels: vec![2, 4, 8, 16],
            degree: 1,
            lambdas: vec![1.0],
            tau: TauRule::H2,
            final_time: 1.0,
            mu: 1.0,
            kappa: 1.0,
            c0: 1.0,
            stabilizer: StabilizerScale::default(),
            out: None,
            verbose: false,
            threads: 0,
        }
    }
}

pub fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|x| x.trim())
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.parse()
                .map_err(|_| WgError::invalid(format!("bad {what} entry '{x}'")))
        })
        .collect()
}

fn parse_num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| WgError::invalid(format!("bad {what} '{s}'")))
}

impl StudyConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "problem" => self.problem = v.parse()?,
            "mesh" => self.mesh = v.parse()?,
            "levels" => self.levels = parse_list(v, "level")?,
            "degree" => self.degree = parse_num(v, "degree")?,
            "lambdas" => self.lambdas = parse_list(v, "lambda")?,
            "tau" => self.tau = v.parse()?,
            "final_time" => self.final_time = parse_num(v, "final time")?,
            "mu" => self.mu = parse_num(v, "mu")?,
            "kappa" => self.kappa = parse_num(v, "kappa")?,
            "c0" => self.c0 = parse_num(v, "c0")?,
            "stabilizer" => self.stabilizer = v.parse()?,
            "out" => self.out = if v.is_empty() { None } else { Some(PathBuf::from(v)) },
            "verbose" => self.verbose = parse_num(v, "verbose flag")?,
            "threads" => self.threads = parse_num(v, "thread count")?,
            k => return Err(WgError::invalid(format!("unknown key '{k}'"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `key = value` lines on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| WgError::parse(i + 1, "expected 'key = value'"))?;
            self.set(k, v).map_err(|e| WgError::parse(i + 1, e.to_string()))?;
        }
        Ok(())
    }

    /// Canonical text form; `parse(to_text())` returns an equal config.
    pub fn to_text(&self) -> String {
        let join = |xs: Vec<String>| xs.join(",");
        let mut s = String::new();
        let _ = writeln!(s, "problem = {}", self.problem.name());
        let _ = writeln!(s, "mesh = {}", self.mesh.name());
        let _ = writeln!(s, "levels = {}", join(self.levels.iter().map(|l| l.to_string()).collect()));
        let _ = writeln!(s, "degree = {}", self.degree);
        let _ = writeln!(s, "lambdas = {}", join(self.lambdas.iter().map(|l| format!("{l:?}")).collect()));
        let _ = writeln!(s, "tau = {}", self.tau.name());
        let _ = writeln!(s, "final_time = {:?}", self.final_time);
        let _ = writeln!(s, "mu = {:?}", self.mu);
        let _ = writeln!(s, "kappa = {:?}", self.kappa);
        let _ = writeln!(s, "c0 = {:?}", self.c0);
        let _ = writeln!(s, "stabilizer = {}", self.stabilizer.name());
        let _ = writeln!(
            s,
            "out = {}",
            self.out.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
        );
        let _ = writeln!(s, "verbose = {}", self.verbose);
        let _ = writeln!(s, "threads = {}", self.threads);
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() && !matches!(self.mesh, MeshSource::File(_)) {
            return Err(WgError::invalid("levels must not be empty"));
        }
        if self.levels.contains(&0) {
            return Err(WgError::invalid("levels must be positive"));
        }
        if self.degree == 0 {
            return Err(WgError::invalid("degree must be at least 1"));
        }
        if self.lambdas.is_empty() {
            return Err(WgError::invalid("lambdas must not be empty"));
        }
        if let Some(l) = self.lambdas.iter().find(|&&l| !(l > 0.0) || !l.is_finite()) {
            return Err(WgError::invalid(format!("lambda must be positive, got {l}")));
        }
        if !(self.final_time > 0.0) || !self.final_time.is_finite() {
            return Err(WgError::invalid(format!("final time must be positive, got {}", self.final_time)));
        }
        self.coefficients(self.lambdas[0]).validate()
    }

    pub fn coefficients(&self, lambda: f64) -> Coefficients {
        Coefficients {
            lambda,
            mu: self.mu,
            kappa: self.kappa,
            c0: self.c0,
            stabilizer: self.stabilizer,
        }
    }

    pub fn parallelism(&self) -> Parallelism {
        Parallelism::from_threads(self.threads)
    }

    /// `(level, label, mesh)` for every level; a file mesh is one level
    /// labelled by its largest cell diameter.
    pub fn meshes(&self) -> Result<Vec<(usize, f64, Mesh)>> {
        match &self.mesh {
            MeshSource::Family(f) => self
                .levels
                .iter()
                .map(|&n| Ok((n, f.label(n), f.generate(n)?)))
                .collect(),
            MeshSource::File(p) => {
                let text = std::fs::read_to_string(p)?;
                let m = load_mesh(&text)?;
                Ok(vec![(0, m.h(), m)])
            }
        }
    }
}

/// Runs one level to the final time and measures the errors.
pub fn run_level(cfg: &StudyConfig, problem: &ProblemSpec, level: usize, label: f64, mesh: &Mesh) -> Result<LevelResult> {
    let par = cfg.parallelism();
    let disc = build_spaces(mesh, cfg.degree, par)?;
    let grid = TimeGrid::with_step(cfg.final_time, cfg.tau.tau(label))?;
    let mut stepper = Stepper::new(&disc, &problem.coeffs, grid, par)?;
    stepper.verbose = cfg.verbose;
    let st = stepper.run(problem)?;
    let errors = measure_errors(&disc, &stepper.forms, problem, &st.u, &st.p, st.time);
    Ok(LevelResult {
        level,
        h: label,
        dofs: disc.dofs.total(),
        errors,
        steps: grid.steps,
        max_residual: st.max_residual(),
    })
}

/// One report per λ, rows ordered by level. Levels run concurrently unless
/// the config asks for a single worker.
pub fn run_study(cfg: &StudyConfig) -> Result<Vec<StudyReport>> {
    cfg.validate()?;
    let meshes = cfg.meshes()?;
    let par = cfg.parallelism();
    with_threads(cfg.threads, || {
        cfg.lambdas
            .iter()
            .map(|&lambda| {
                let problem = cfg.problem.build(cfg.coefficients(lambda))?;
                let rows = par_map(par, &meshes, |(n, label, m)| {
                    run_level(cfg, &problem, *n, *label, m).map_err(|e| WgError::Level {
                        level: *n,
                        source: Box::new(e),
                    })
                })
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
                Ok(StudyReport {
                    problem: cfg.problem.name().into(),
                    mesh: cfg.mesh.name(),
                    lambda,
                    rows,
                })
            })
            .collect()
    })
}

/// `max / min` of each error across λ, per level (reports must share levels).
pub fn lambda_spread(reports: &[StudyReport]) -> Vec<(usize, [f64; 4])> {
    let Some(first) = reports.first() else {
        return Vec::new();
    };
    (0..first.rows.len())
        .map(|k| {
            let mut ratio = [0.0; 4];
            for (i, r) in ratio.iter_mut().enumerate() {
                let vals: Vec<f64> = reports.iter().map(|rep| rep.rows[k].errors.as_array()[i]).collect();
                let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
                let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
                *r = if lo > 0.0 { hi / lo } else { f64::INFINITY };
            }
            (first.rows[k].level, ratio)
        })
        .collect()
}

pub fn spread_summary(reports: &[StudyReport]) -> String {
    let mut s = String::from("level,ratio_u_l2,ratio_u_V,ratio_p_l2,ratio_p_W\n");
    for (level, r) in lambda_spread(reports) {
        let _ = writeln!(s, "{level},{:.4},{:.4},{:.4},{:.4}", r[0], r[1], r[2], r[3]);
    }
    s
}
