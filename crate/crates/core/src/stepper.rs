//! Backward Euler time stepping of the fully discrete scheme.

use crate::error::{Result, WgError};
use crate::forms::{build_all_forms, Coefficients, LocalForms};
use crate::parallel::Parallelism;
use crate::problems::ProblemSpec;
use crate::system::{assemble, solve_step, GlobalSystem, SolveReport};
use crate::weakops::{build_element_ops, ElementOperators};
use crate::weakspace::{Discretization, WeakFunction};

/// Uniform grid `t_n = n tau`, `tau = T / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub final_time: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(final_time: f64, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(WgError::invalid("time grid needs at least one step"));
        }
        if !(final_time > 0.0) || !final_time.is_finite() {
            return Err(WgError::invalid(format!("final time must be positive, got {final_time}")));
        }
        Ok(Self { final_time, steps })
    }

    /// Grid whose step is `tau`, rounded to the nearest whole number of steps.
    pub fn with_step(final_time: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(WgError::invalid(format!("time step must be positive, got {tau}")));
        }
        let n = (final_time / tau).round().max(1.0) as usize;
        Self::new(final_time, n)
    }

    pub fn tau(&self) -> f64 {
        self.final_time / self.steps as f64
    }

    /// `t_n`; the last level is exactly `T`.
    pub fn time(&self, n: usize) -> f64 {
        if n == self.steps {
            self.final_time
        } else {
            n as f64 * self.tau()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationState {
    pub u: WeakFunction,
    pub p: WeakFunction,
    pub step: usize,
    pub time: f64,
    /// One entry per completed step.
    pub reports: Vec<SolveReport>,
}

impl SimulationState {
    pub fn max_residual(&self) -> f64 {
        self.reports.iter().map(|r| r.relative_residual).fold(0.0, f64::max)
    }

    pub fn max_backward_error(&self) -> f64 {
        self.reports.iter().map(|r| r.backward_error).fold(0.0, f64::max)
    }
}

/// Element operators, local forms and the factored step matrix of one level.
pub struct Stepper<'d, 'm> {
    pub disc: &'d Discretization<'m>,
    pub ops: Vec<ElementOperators>,
    pub forms: Vec<LocalForms>,
    pub system: GlobalSystem,
    pub grid: TimeGrid,
    pub par: Parallelism,
    pub verbose: bool,
}

impl<'d, 'm> Stepper<'d, 'm> {
    pub fn new(disc: &'d Discretization<'m>, coeffs: &Coefficients, grid: TimeGrid, par: Parallelism) -> Result<Self> {
        let ops = build_element_ops(disc, par)?;
        let forms = build_all_forms(&ops, coeffs, par)?;
        let system = assemble(disc, &forms, coeffs, grid.tau(), par)?;
        Ok(Self {
            disc,
            ops,
            forms,
            system,
            grid,
            par,
            verbose: false,
        })
    }

    /// `(Q_h u^0, Q_h p^0)` with eliminated traces set to zero.
    pub fn initial_state(&self, problem: &ProblemSpec) -> SimulationState {
        SimulationState {
            u: self.disc.interpolate_displacement(|x| (problem.u)(x, 0.0)),
            p: self.disc.interpolate_pressure(|x| (problem.p)(x, 0.0)),
            step: 0,
            time: 0.0,
            reports: Vec::new(),
        }
    }

    /// Advances `state` by one step.
    pub fn step(&self, problem: &ProblemSpec, state: &mut SimulationState) -> Result<()> {
        let n = state.step + 1;
        if n > self.grid.steps {
            return Err(WgError::invalid("time grid exhausted"));
        }
        let t = self.grid.time(n);
        let (u, p, report) = solve_step(&self.system, self.disc, problem, &state.u, &state.p, t, self.par)
            .map_err(|e| WgError::Step {
                step: n,
                source: Box::new(e),
            })?;
        if self.verbose {
            eprintln!("{n} {t:.6e} {:.3e}", report.relative_residual);
        }
        state.u = u;
        state.p = p;
        state.step = n;
        state.time = t;
        state.reports.push(report);
        Ok(())
    }

    /// Runs the remaining steps, calling `observe` after each one.
    pub fn run_from(
        &self,
        problem: &ProblemSpec,
        mut state: SimulationState,
        mut observe: impl FnMut(&SimulationState),
    ) -> Result<SimulationState> {
        while state.step < self.grid.steps {
            self.step(problem, &mut state)?;
            observe(&state);
        }
        Ok(state)
    }

    pub fn run(&self, problem: &ProblemSpec) -> Result<SimulationState> {
        self.run_from(problem, self.initial_state(problem), |_| {})
    }
}

/// Discretization-level convenience: builds everything and runs to `T`.
pub fn run(
    problem: &ProblemSpec,
    disc: &Discretization<'_>,
    grid: TimeGrid,
    par: Parallelism,
    verbose: bool,
) -> Result<SimulationState> {
    let mut s = Stepper::new(disc, &problem.coeffs, grid, par)?;
    s.verbose = verbose;
    s.run(problem)
}
