//! Finite-volume baseline on a rectangular grid over `[x_min, R_max] x [0, 1]`.
//!
//! Dimension-by-dimension (Godunov) splitting with the high-resolution flux
//!
//! ```text
//! F = u+ Q_{i-1} + u- Q_i + |u|/2 (1 - |u| dt/h) phi(theta) (Q_i - Q_{i-1})
//! ```
//!
//! and forward Euler in time. Boundary faces take zero inflow and first-order
//! upwind outflow. The concentrations are recomputed from the cell averages
//! after every step by midpoint quadrature.

use crate::error::{Error, Result};
use crate::model::{sphere_volume, ConcentrationPath, GrowthLaw, Problem, ResolvedFeed, TimeGrid};
use crate::solver::NegativeConcentration;

/// Time integration of the limited fluxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeScheme {
    /// Limited MUSCL face values with a forward Euler step; TVD for Courant
    /// numbers up to 1/2.
    #[default]
    ForwardEuler,
    /// Flux-limited Lax-Wendroff correction `(1 - |u| dt/h)`; TVD up to 1.
    LaxWendroff,
}

impl TimeScheme {
    /// Largest Courant number the scheme is stable for.
    pub fn max_courant(self) -> f64 {
        match self {
            TimeScheme::ForwardEuler => 0.5,
            TimeScheme::LaxWendroff => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Limiter {
    #[default]
    VanLeer,
    Minmod,
    /// No correction: first-order upwind.
    None,
}

impl Limiter {
    #[inline]
    fn phi(self, theta: f64) -> f64 {
        match self {
            Limiter::VanLeer => (theta + theta.abs()) / (1.0 + theta.abs()),
            Limiter::Minmod => theta.clamp(0.0, 1.0),
            Limiter::None => 0.0,
        }
    }
}

/// Cell averages on a uniform grid, stored row-major with the composition
/// index running fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FvmGrid {
    lower: [f64; 2],
    upper: [f64; 2],
    counts: [usize; 2],
    pub q: Vec<f64>,
}

impl FvmGrid {
    pub fn new(lower: [f64; 2], upper: [f64; 2], counts: [usize; 2]) -> Result<Self> {
        if counts[0] == 0 || counts[1] == 0 {
            return Err(Error::config(
                "grids.fvm_cells",
                "cell counts must be positive",
            ));
        }
        if !(upper[0] > lower[0] && upper[1] > lower[1]) {
            return Err(Error::Domain(format!(
                "empty grid domain {lower:?} .. {upper:?}"
            )));
        }
        Ok(Self {
            lower,
            upper,
            counts,
            q: vec![0.0; counts[0] * counts[1]],
        })
    }

    /// Grid over `[x_min, r_max] x [0, 1]` with `q0` sampled at the cell
    /// centers.
    pub fn from_initial(problem: &Problem, r_max: f64, counts: [usize; 2]) -> Result<Self> {
        if problem.initial.is_dirac() {
            return Err(Error::Domain(
                "the finite-volume baseline needs a pointwise initial density".into(),
            ));
        }
        let mut grid = Self::new([problem.process.x_min, 0.0], [r_max, 1.0], counts)?;
        for i in 0..counts[0] {
            for j in 0..counts[1] {
                let x = grid.cell_center(i, j);
                grid.q[i * counts[1] + j] = problem.initial.density(x);
            }
        }
        Ok(grid)
    }

    pub fn counts(&self) -> [usize; 2] {
        self.counts
    }

    pub fn lower(&self) -> [f64; 2] {
        self.lower
    }

    pub fn upper(&self) -> [f64; 2] {
        self.upper
    }

    pub fn width(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / self.counts[axis] as f64
    }

    pub fn center(&self, axis: usize, i: usize) -> f64 {
        self.lower[axis] + (i as f64 + 0.5) * self.width(axis)
    }

    /// Position of face `i` (face `0` is the lower boundary).
    pub fn face(&self, axis: usize, i: usize) -> f64 {
        self.lower[axis] + i as f64 * self.width(axis)
    }

    pub fn cell_center(&self, i: usize, j: usize) -> crate::model::DisperseState {
        crate::model::DisperseState::new(self.center(0, i), self.center(1, j))
    }

    pub fn cell_area(&self) -> f64 {
        self.width(0) * self.width(1)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.counts[1] + j]
    }

    pub fn total_number(&self) -> f64 {
        self.q.iter().sum::<f64>() * self.cell_area()
    }

    /// Midpoint quadrature of `sum_i V_i(x) q(x)`.
    pub fn particle_volumes(&self) -> [f64; 2] {
        let mut volumes = [0.0; 2];
        for i in 0..self.counts[0] {
            let v = sphere_volume(self.center(0, i));
            let row = &self.q[i * self.counts[1]..(i + 1) * self.counts[1]];
            for (j, q) in row.iter().enumerate() {
                let x2 = self.center(1, j);
                volumes[0] += v * x2 * q;
                volumes[1] += v * (1.0 - x2) * q;
            }
        }
        volumes.map(|s| s * self.cell_area())
    }

    /// Number-weighted mean radius and composition.
    pub fn centroid(&self) -> [f64; 2] {
        let (mut n, mut r, mut f) = (0.0, 0.0, 0.0);
        for i in 0..self.counts[0] {
            for j in 0..self.counts[1] {
                let q = self.value(i, j);
                n += q;
                r += q * self.center(0, i);
                f += q * self.center(1, j);
            }
        }
        [r / n, f / n]
    }

    /// Total variation of every line along `axis`.
    pub fn total_variation(&self, axis: usize) -> Vec<f64> {
        let [m1, m2] = self.counts;
        match axis {
            0 => (0..m2)
                .map(|j| {
                    (1..m1)
                        .map(|i| (self.value(i, j) - self.value(i - 1, j)).abs())
                        .sum()
                })
                .collect(),
            _ => (0..m1)
                .map(|i| {
                    (1..m2)
                        .map(|j| (self.value(i, j) - self.value(i, j - 1)).abs())
                        .sum()
                })
                .collect(),
        }
    }
}

/// Largest stable step `cfl / sum_axis(max|v_axis| / h_axis)` for given
/// speeds; infinite when both speeds vanish.
pub fn cfl_bound(max_speeds: [f64; 2], widths: [f64; 2], cfl: f64) -> f64 {
    let rate = max_speeds[0] / widths[0] + max_speeds[1] / widths[1];
    if rate > 0.0 {
        cfl / rate
    } else {
        f64::INFINITY
    }
}

/// Largest face speeds of both axes with rates frozen at `conc`.
pub fn max_speeds(grid: &FvmGrid, conc: [f64; 2], law: &GrowthLaw) -> [f64; 2] {
    let rates = law.rates(conc);
    let total = rates.total();
    let n = law.exponent();
    let radius = (0..=grid.counts[0])
        .map(|i| (total * grid.face(0, i).powf(n)).abs())
        .fold(0.0, f64::max);
    // v2 is affine in x2, so its extremes sit on the faces x2 = 0 and x2 = 1
    let reach = rates.g1.abs().max((rates.g1 - total).abs());
    let composition = (0..grid.counts[0])
        .map(|i| 3.0 * reach * grid.center(0, i).powf(n - 1.0))
        .fold(0.0, f64::max);
    [radius, composition]
}

/// CFL-limited step, capped at `remaining`.
pub fn cfl_dt(
    grid: &FvmGrid,
    conc: [f64; 2],
    law: &GrowthLaw,
    cfl: f64,
    remaining: f64,
) -> Result<f64> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::config(
            "run.cfl",
            format!("must lie in (0, 1], got {cfl}"),
        ));
    }
    let bound = cfl_bound(
        max_speeds(grid, conc, law),
        [grid.width(0), grid.width(1)],
        cfl,
    );
    Ok(bound.min(remaining))
}

/// Limited flux through an interior face with velocity `v` between the
/// cells `left` and `right`; `far_left` and `far_right` are the next cells
/// outward, if any.
#[inline]
#[allow(clippy::too_many_arguments)]
fn face_flux(
    v: f64,
    far_left: Option<f64>,
    left: f64,
    right: f64,
    far_right: Option<f64>,
    ratio: f64,
    scheme: TimeScheme,
    limiter: Limiter,
) -> f64 {
    let jump = right - left;
    let mut f = v.max(0.0) * left + v.min(0.0) * right;
    if jump != 0.0 {
        let upwind = if v >= 0.0 {
            far_left.map(|q| left - q)
        } else {
            far_right.map(|q| q - right)
        };
        if let Some(up) = upwind {
            let phi = limiter.phi(up / jump);
            let damping = match scheme {
                TimeScheme::ForwardEuler => 1.0,
                TimeScheme::LaxWendroff => 1.0 - v.abs() * ratio,
            };
            f += 0.5 * v.abs() * damping * phi * jump;
        }
    }
    f
}

/// Flux-limited update of one line of cells. `u[k]` is the velocity at face
/// `k`; faces `0` and `m` are boundaries. `flux` is scratch of length `m + 1`.
fn sweep_line(
    q: &mut [f64],
    u: &[f64],
    ratio: f64,
    scheme: TimeScheme,
    limiter: Limiter,
    flux: &mut [f64],
) {
    let m = q.len();
    // boundaries: zero inflow, upwind outflow
    flux[0] = u[0].min(0.0) * q[0];
    flux[m] = u[m].max(0.0) * q[m - 1];
    for k in 1..m {
        let far_left = (k >= 2).then(|| q[k - 2]);
        let far_right = (k + 1 < m).then(|| q[k + 1]);
        flux[k] = face_flux(
            u[k],
            far_left,
            q[k - 1],
            q[k],
            far_right,
            ratio,
            scheme,
            limiter,
        );
    }
    for k in 0..m {
        q[k] -= ratio * (flux[k + 1] - flux[k]);
    }
}

/// [`sweep_line`] applied to every column of a row-major `m1 x m2` array at
/// once, so that memory is walked row by row.
fn sweep_columns(
    q: &mut [f64],
    m2: usize,
    u: &[f64],
    ratio: f64,
    scheme: TimeScheme,
    limiter: Limiter,
    flux: &mut Vec<f64>,
) {
    let m1 = q.len() / m2;
    flux.clear();
    flux.resize((m1 + 1) * m2, 0.0);
    let row = |i: usize| &q[i * m2..(i + 1) * m2];
    for j in 0..m2 {
        flux[j] = u[0].min(0.0) * q[j];
        flux[m1 * m2 + j] = u[m1].max(0.0) * q[(m1 - 1) * m2 + j];
    }
    for k in 1..m1 {
        let (left, right) = (row(k - 1), row(k));
        let far_left = (k >= 2).then(|| row(k - 2));
        let far_right = (k + 1 < m1).then(|| row(k + 1));
        let out = &mut flux[k * m2..(k + 1) * m2];
        for j in 0..m2 {
            out[j] = face_flux(
                u[k],
                far_left.map(|r| r[j]),
                left[j],
                right[j],
                far_right.map(|r| r[j]),
                ratio,
                scheme,
                limiter,
            );
        }
    }
    for (i, cells) in q.chunks_mut(m2).enumerate() {
        let (lower, upper) = (
            &flux[i * m2..(i + 1) * m2],
            &flux[(i + 1) * m2..(i + 2) * m2],
        );
        for ((c, lo), up) in cells.iter_mut().zip(lower).zip(upper) {
            *c -= ratio * (up - lo);
        }
    }
}

/// One split step (radius sweep, then composition sweep) with velocities
/// frozen at `conc`.
pub fn fvm_step(
    grid: &mut FvmGrid,
    conc: [f64; 2],
    law: &GrowthLaw,
    dt: f64,
    scheme: TimeScheme,
    limiter: Limiter,
) -> Result<()> {
    if !(dt >= 0.0) {
        return Err(Error::Domain(format!(
            "time step must be nonnegative, got {dt}"
        )));
    }
    let bound = cfl_bound(
        max_speeds(grid, conc, law),
        [grid.width(0), grid.width(1)],
        scheme.max_courant(),
    );
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, bound });
    }
    if dt == 0.0 {
        return Ok(());
    }
    let [m1, m2] = grid.counts;
    let rates = law.rates(conc);
    let total = rates.total();
    let n = law.exponent();

    // radius sweep, one line per composition cell
    let u: Vec<f64> = (0..=m1).map(|i| total * grid.face(0, i).powf(n)).collect();
    let ratio = dt / grid.width(0);
    let mut flux = Vec::new();
    sweep_columns(&mut grid.q, m2, &u, ratio, scheme, limiter, &mut flux);

    // composition sweep, rows are contiguous
    let ratio = dt / grid.width(1);
    let faces: Vec<f64> = (0..=m2).map(|j| grid.face(1, j)).collect();
    let mut u = vec![0.0; m2 + 1];
    flux.resize(m2 + 1, 0.0);
    for i in 0..m1 {
        let scale = 3.0 * grid.center(0, i).powf(n - 1.0);
        for (v, x2) in u.iter_mut().zip(&faces) {
            *v = scale * (rates.g1 - total * x2);
        }
        sweep_line(
            &mut grid.q[i * m2..(i + 1) * m2],
            &u,
            ratio,
            scheme,
            limiter,
            &mut flux,
        );
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FvmOptions {
    /// Fraction of the scheme's stability limit used per step.
    pub cfl: f64,
    pub scheme: TimeScheme,
    pub limiter: Limiter,
    pub negative: NegativeConcentration,
    /// Upper radius of the grid; chosen by [`truncation_radius`] when unset.
    pub r_max: Option<f64>,
    /// Keep a copy of the grid every this many steps.
    pub snapshot_every: Option<usize>,
}

impl Default for FvmOptions {
    fn default() -> Self {
        Self {
            cfl: 0.9,
            scheme: TimeScheme::ForwardEuler,
            limiter: Limiter::VanLeer,
            negative: NegativeConcentration::Clamp,
            r_max: None,
            snapshot_every: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FvmSolution {
    pub path: ConcentrationPath,
    pub grid: FvmGrid,
    pub feed: [ResolvedFeed; 2],
    pub steps: usize,
    pub r_max: f64,
    /// `(time, grid)` pairs.
    pub snapshots: Vec<(f64, FvmGrid)>,
    pub negative_steps: usize,
}

impl FvmSolution {
    /// Degrees of freedom `steps * M1 * M2`.
    pub fn dof(&self) -> f64 {
        self.steps as f64 * (self.grid.counts[0] * self.grid.counts[1]) as f64
    }
}

/// Upper grid radius: 20% beyond the radius the largest initial particle
/// reaches at the horizon when growing with the initial rates.
pub fn truncation_radius(problem: &Problem) -> f64 {
    let n = problem.law.exponent();
    let largest = problem.initial.support_box().upper[0];
    let growth = problem
        .law
        .rates(problem.process.initial_concentrations)
        .total()
        * problem.process.horizon;
    let s = largest.powf(1.0 - n) + (1.0 - n) * growth;
    1.2 * s.max(0.0).powf(1.0 / (1.0 - n)).max(largest)
}

pub fn fvm_solve(
    problem: &Problem,
    counts: [usize; 2],
    options: &FvmOptions,
) -> Result<FvmSolution> {
    problem.validate()?;
    let r_max = options.r_max.unwrap_or_else(|| truncation_radius(problem));
    let mut grid = FvmGrid::from_initial(problem, r_max, counts)?;
    let process = &problem.process;
    let feed = process.resolve_feed(grid.particle_volumes());
    let mut conc = process.concentrations(&feed, 0.0, grid.particle_volumes());
    if conc.iter().any(|c| !c.is_finite() || *c < 0.0) {
        return Err(Error::config(
            "process.feed",
            format!("infeasible initial mass balance: concentrations {conc:?}"),
        ));
    }
    let horizon = process.horizon;
    let mut times = vec![0.0];
    let mut values = vec![conc];
    let mut snapshots = Vec::new();
    let mut negative_steps = 0;
    let mut t = 0.0;
    let mut steps = 0;
    while t < horizon {
        let remaining = horizon - t;
        let mut dt = cfl_dt(
            &grid,
            conc,
            &problem.law,
            options.cfl * options.scheme.max_courant(),
            remaining,
        )?;
        // avoid a sliver step at the end
        if remaining - dt < 1e-9 * horizon {
            dt = remaining;
        }
        if !(dt > 0.0) {
            return Err(Error::StepSizeUnderflow { t });
        }
        fvm_step(
            &mut grid,
            conc,
            &problem.law,
            dt,
            options.scheme,
            options.limiter,
        )?;
        steps += 1;
        t = if dt == remaining { horizon } else { t + dt };
        conc = process.concentrations(&feed, t, grid.particle_volumes());
        if conc.iter().any(|c| !c.is_finite()) {
            return Err(Error::Divergence { step: steps });
        }
        if let Some((i, c)) = conc.iter().enumerate().find(|(_, c)| **c < 0.0) {
            if options.negative == NegativeConcentration::Abort {
                return Err(Error::NegativeConcentration {
                    step: steps,
                    component: i,
                    value: *c,
                });
            }
            negative_steps += 1;
        }
        times.push(t);
        values.push(conc);
        if options
            .snapshot_every
            .is_some_and(|e| e > 0 && steps % e == 0)
        {
            snapshots.push((t, grid.clone()));
        }
    }
    if negative_steps > 0 {
        log::warn!("finite-volume run: {negative_steps} steps with negative concentration");
    }
    Ok(FvmSolution {
        path: ConcentrationPath::new(TimeGrid::from_times(times)?, values)?,
        grid,
        feed,
        steps,
        r_max,
        snapshots,
        negative_steps,
    })
}
