//! Explicit time stepping of the integral fixed-point problem for the solute
//! concentrations.
//!
//! Every quadrature node `x_l` of the initial density is carried along its
//! discrete characteristic with the rates frozen at `C_k`; afterwards both
//! concentrations are recomputed from the mass balance
//!
//! ```text
//! V C_{i,k+1} = m_i(t_{k+1}) - rho_i * sum_l V_i(xi(l, k+1)) q0(x_l) w_l
//! ```
//!
//! One step costs `O(N_x)`, a full solve `O(N_x N_t)`.

use rayon::prelude::*;

use crate::characteristics::{composition_update, radius_root, CharacteristicField};
use crate::error::{Error, Result};
use crate::model::{
    component_volume, sphere_volume, ConcentrationPath, InitialDensity, Problem, Quadrature,
    ResolvedFeed, TimeGrid,
};

/// Nodes per reduction chunk. Partial sums are always combined in chunk
/// order, so results do not depend on the number of threads.
const CHUNK: usize = 4096;

/// What to do when the explicit update drives a concentration below zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NegativeConcentration {
    /// Keep going; rates are evaluated at `max(c, 0)`. A warning is logged.
    #[default]
    Clamp,
    /// Stop with [`Error::NegativeConcentration`].
    Abort,
}

/// Summation used for the particle-volume reductions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Summation {
    #[default]
    Ordered,
    /// Neumaier-compensated summation.
    Compensated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub negative: NegativeConcentration,
    pub summation: Summation,
    /// Worker threads; `0` or `1` runs sequentially.
    pub threads: usize,
    /// Recompute the discrete mass balance after every step.
    pub check_balance: bool,
    /// Keep the final characteristic field in the solution.
    pub keep_field: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            negative: NegativeConcentration::Clamp,
            summation: Summation::Ordered,
            threads: 1,
            check_balance: false,
            keep_field: false,
        }
    }
}

/// Solver state at time index `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub k: usize,
    pub field: CharacteristicField,
    pub concentration: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct EmomSolution {
    pub path: ConcentrationPath,
    pub feed: [ResolvedFeed; 2],
    /// Final characteristic field when [`SolverOptions::keep_field`] is set.
    pub field: Option<CharacteristicField>,
    /// Largest relative mass-balance residual seen, when checked.
    pub max_balance_residual: Option<f64>,
    /// Number of steps that produced a negative concentration.
    pub negative_steps: usize,
    pub first_negative_step: Option<usize>,
}

/// Fixed-point time stepper for one problem, quadrature and time grid.
pub struct EmomSolver<'a> {
    problem: &'a Problem,
    grid: &'a TimeGrid,
    points: &'a Quadrature,
    /// `q0(x_l) w_l`
    masses: Vec<f64>,
    feed: [ResolvedFeed; 2],
    options: SolverOptions,
    pool: Option<rayon::ThreadPool>,
}

impl<'a> EmomSolver<'a> {
    pub fn new(
        problem: &'a Problem,
        quadrature: &'a Quadrature,
        grid: &'a TimeGrid,
        options: SolverOptions,
    ) -> Result<Self> {
        problem.validate()?;
        if grid.is_empty() {
            return Err(Error::config("grids.time_steps", "empty time grid"));
        }
        let masses: Vec<f64> = quadrature
            .points
            .iter()
            .zip(&quadrature.weights)
            .map(|(x, w)| problem.initial.node_value(*x) * w)
            .collect();
        let pool = if options.threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(options.threads)
                    .build()
                    .map_err(|e| Error::config("run.threads", e.to_string()))?,
            )
        } else {
            None
        };
        let mut solver = Self {
            problem,
            grid,
            points: quadrature,
            masses,
            feed: [ResolvedFeed::Constant(0.0); 2],
            options,
            pool,
        };
        let initial = CharacteristicField::new(&quadrature.points, problem.law.exponent());
        let volumes = solver.particle_volumes(&initial);
        solver.feed = problem.process.resolve_feed(volumes);
        Ok(solver)
    }

    pub fn feed(&self) -> &[ResolvedFeed; 2] {
        &self.feed
    }

    /// `q0(x_l) w_l` of every node.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Initialization: nodes at their quadrature points and `C_{i,0}` from
    /// the mass balance.
    pub fn initialize(&self) -> Result<SolverState> {
        let field = CharacteristicField::new(&self.points.points, self.problem.law.exponent());
        let volumes = self.particle_volumes(&field);
        let concentration = self
            .problem
            .process
            .concentrations(&self.feed, 0.0, volumes);
        for (i, c) in concentration.iter().enumerate() {
            if !c.is_finite() || *c < 0.0 {
                return Err(Error::config(
                    format!("process.feed[{i}]"),
                    format!("infeasible initial mass balance: concentration {c}"),
                ));
            }
        }
        Ok(SolverState {
            k: 0,
            field,
            concentration,
        })
    }

    /// Advances `state` from `t_k` to `t_{k+1}`.
    pub fn step(&self, state: &mut SolverState) -> Result<()> {
        let k = state.k;
        if k + 1 >= self.grid.len() {
            return Err(Error::Domain(format!("no time step after index {k}")));
        }
        let dt = self.grid.step(k);
        let rates = self.problem.law.rates(state.concentration);
        let g1 = rates.g1 * dt;
        let total = rates.total() * dt;
        if !g1.is_finite() || !total.is_finite() {
            return Err(Error::Divergence { step: k });
        }
        let n = self.problem.law.exponent();
        let shift_old = (1.0 - n) * state.field.accumulated;
        let shift_new = (1.0 - n) * (state.field.accumulated + total);
        let compensated = self.options.summation == Summation::Compensated;

        let kernel = |composition: &mut [f64], base: &[f64], masses: &[f64]| -> [f64; 2] {
            let mut acc = [Accumulator::default(), Accumulator::default()];
            for ((f, b), m) in composition.iter_mut().zip(base).zip(masses) {
                *f = composition_update(*f, g1, total, b + shift_old);
                let s = b + shift_new;
                if !(s > 0.0) {
                    // flagged below through a non-finite sum
                    acc[0].add(f64::NAN, compensated);
                    continue;
                }
                let r = radius_root(s, n);
                let v = r * r * r * m;
                acc[0].add(v * *f, compensated);
                acc[1].add(v * (1.0 - *f), compensated);
            }
            [acc[0].value(), acc[1].value()]
        };

        let field = &mut state.field;
        let partials: Vec<[f64; 2]> = match &self.pool {
            Some(pool) => pool.install(|| {
                field
                    .composition
                    .par_chunks_mut(CHUNK)
                    .zip(field.base.par_chunks(CHUNK))
                    .zip(self.masses.par_chunks(CHUNK))
                    .map(|((f, b), m)| kernel(f, b, m))
                    .collect()
            }),
            None => field
                .composition
                .chunks_mut(CHUNK)
                .zip(field.base.chunks(CHUNK))
                .zip(self.masses.chunks(CHUNK))
                .map(|((f, b), m)| kernel(f, b, m))
                .collect(),
        };
        field.accumulated += total;
        let volumes = combine(&partials, compensated).map(|v| v * sphere_volume(1.0));
        if volumes.iter().any(|v| v.is_nan()) {
            let radicand = (0..field.len())
                .map(|l| field.shifted_power(l))
                .fold(f64::INFINITY, f64::min);
            return Err(Error::Step {
                step: k + 1,
                radicand,
            });
        }
        let t = self.grid.times()[k + 1];
        state.concentration = self.problem.process.concentrations(&self.feed, t, volumes);
        state.k = k + 1;
        if state.concentration.iter().any(|c| !c.is_finite()) {
            return Err(Error::Divergence { step: k + 1 });
        }
        if self.options.negative == NegativeConcentration::Abort {
            if let Some((i, c)) = state
                .concentration
                .iter()
                .enumerate()
                .find(|(_, c)| **c < 0.0)
            {
                return Err(Error::NegativeConcentration {
                    step: k + 1,
                    component: i,
                    value: *c,
                });
            }
        }
        Ok(())
    }

    /// Particle volumes `sum_l V_i(xi(l)) q0(x_l) w_l` of a field, with the
    /// solver's summation order.
    pub fn particle_volumes(&self, field: &CharacteristicField) -> [f64; 2] {
        let compensated = self.options.summation == Summation::Compensated;
        let partials: Vec<[f64; 2]> = (0..field.len())
            .collect::<Vec<_>>()
            .chunks(CHUNK)
            .map(|ls| {
                let mut acc = [Accumulator::default(), Accumulator::default()];
                for &l in ls {
                    let x = field.state(l);
                    let v = x.radius.powi(3) * self.masses[l];
                    acc[0].add(v * x.composition, compensated);
                    acc[1].add(v * (1.0 - x.composition), compensated);
                }
                [acc[0].value(), acc[1].value()]
            })
            .collect();
        combine(&partials, compensated).map(|v| v * sphere_volume(1.0))
    }

    /// Relative residual of `V C_{i,k} + rho_i sum V_i(xi) q0 w = m_i(t_k)`,
    /// recomputed node by node with [`component_volume`].
    pub fn balance_residual(&self, state: &SolverState) -> [f64; 2] {
        let process = &self.problem.process;
        let t = self.grid.times()[state.k];
        std::array::from_fn(|i| {
            let particles: f64 = (0..state.field.len())
                .map(|l| {
                    component_volume(i, state.field.state(l)).unwrap_or(f64::NAN) * self.masses[l]
                })
                .sum();
            let feed = self.feed[i].mass(t);
            let lhs =
                process.reactor_volume * state.concentration[i] + process.densities[i] * particles;
            (lhs - feed).abs() / feed.abs().max(f64::MIN_POSITIVE)
        })
    }

    pub fn solve(&self) -> Result<EmomSolution> {
        let mut state = self.initialize()?;
        let mut values = Vec::with_capacity(self.grid.len());
        values.push(state.concentration);
        let mut max_residual: Option<f64> = None;
        let mut track = |state: &SolverState| {
            if self.options.check_balance {
                let r = self.balance_residual(state);
                let worst = r[0].max(r[1]);
                max_residual = Some(max_residual.map_or(worst, |m: f64| m.max(worst)));
            }
        };
        track(&state);
        let mut negative_steps = 0;
        let mut first_negative_step = None;
        for _ in 1..self.grid.len() {
            self.step(&mut state)?;
            track(&state);
            if state.concentration.iter().any(|c| *c < 0.0) {
                if first_negative_step.is_none() {
                    log::warn!(
                        "concentration {:?} negative at step {}; rates are clamped",
                        state.concentration,
                        state.k
                    );
                    first_negative_step = Some(state.k);
                }
                negative_steps += 1;
            }
            values.push(state.concentration);
        }
        Ok(EmomSolution {
            path: ConcentrationPath::new(self.grid.clone(), values)?,
            feed: self.feed,
            field: self.options.keep_field.then_some(state.field),
            max_balance_residual: max_residual,
            negative_steps,
            first_negative_step,
        })
    }
}

/// Convenience wrapper around [`EmomSolver`].
pub fn solve(
    problem: &Problem,
    quadrature: &Quadrature,
    grid: &TimeGrid,
    options: SolverOptions,
) -> Result<EmomSolution> {
    EmomSolver::new(problem, quadrature, grid, options)?.solve()
}

/// Whether a problem carries a pointwise density (as opposed to a seed).
pub fn has_density(initial: &InitialDensity) -> bool {
    !initial.is_dirac()
}

#[derive(Debug, Default, Clone, Copy)]
struct Accumulator {
    sum: f64,
    compensation: f64,
}

impl Accumulator {
    #[inline]
    fn add(&mut self, value: f64, compensated: bool) {
        if compensated {
            let t = self.sum + value;
            if self.sum.abs() >= value.abs() {
                self.compensation += (self.sum - t) + value;
            } else {
                self.compensation += (value - t) + self.sum;
            }
            self.sum = t;
        } else {
            self.sum += value;
        }
    }

    fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

fn combine(partials: &[[f64; 2]], compensated: bool) -> [f64; 2] {
    let mut acc = [Accumulator::default(), Accumulator::default()];
    for p in partials {
        acc[0].add(p[0], compensated);
        acc[1].add(p[1], compensated);
    }
    [acc[0].value(), acc[1].value()]
}
