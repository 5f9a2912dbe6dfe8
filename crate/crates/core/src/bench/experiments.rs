//! Refinement, comparison and timing studies.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::fvm::{fvm_solve, FvmOptions};
use crate::model::{build_quadrature, ConcentrationPath, Problem, QuadratureRule, TimeGrid};
use crate::solver::{solve, EmomSolution, SolverOptions};

use super::fit::{fit_slope, SlopeFit};
use super::norms::{error_norms, ErrorNorms, Interpolation};

/// Error of one discretization level against the reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub method: String,
    /// Ladder parameter (`N_t` or `M`).
    pub level: usize,
    /// Time points (eMoM) or time steps plus one (FVM).
    pub time_points: usize,
    /// Quadrature nodes or grid cells.
    pub nodes: usize,
    pub dof: f64,
    /// Median wall-clock seconds of the solve.
    pub seconds: f64,
    pub norms: ErrorNorms,
}

impl ErrorRow {
    /// `sqrt(l2_c1^2 + l2_c2^2)`
    pub fn l2(&self) -> f64 {
        self.norms.l2[0].hypot(self.norms.l2[1])
    }

    pub fn linf(&self) -> f64 {
        self.norms.max_linf()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeRow {
    pub quantity: String,
    pub fit: SlopeFit,
    pub target: f64,
    pub tolerance: f64,
}

impl SlopeRow {
    pub fn pass(&self) -> bool {
        self.fit.within(self.target, self.tolerance)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimingRow {
    pub time_points: usize,
    pub nodes: usize,
    /// `N_x * N_t`
    pub work: f64,
    pub seconds: f64,
}

/// Runs `f` `repetitions` times; returns the last result and the median
/// wall-clock time in seconds.
pub fn median_time<T>(repetitions: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    let mut times = Vec::with_capacity(repetitions.max(1));
    let mut last = None;
    for _ in 0..repetitions.max(1) {
        let start = Instant::now();
        let value = f()?;
        times.push(start.elapsed().as_secs_f64());
        last = Some(value);
    }
    times.sort_by(f64::total_cmp);
    Ok((
        last.expect("at least one repetition"),
        times[times.len() / 2],
    ))
}

/// eMoM solve on `resolution` nodes and `time_points` uniform time points,
/// timed around the solve only.
pub fn timed_emom(
    problem: &Problem,
    resolution: [usize; 2],
    rule: QuadratureRule,
    time_points: usize,
    options: &SolverOptions,
    repetitions: usize,
) -> Result<(EmomSolution, f64)> {
    let quadrature = build_quadrature(&problem.initial, resolution, rule)?;
    let grid = TimeGrid::uniform(problem.process.horizon, time_points)?;
    median_time(repetitions, || {
        solve(problem, &quadrature, &grid, options.clone())
    })
}

/// Reference concentration path. With `extrapolate`, the first-order time
/// error is removed by Richardson extrapolation from `time_points` and
/// `2 time_points - 1` points (every second fine point is a coarse point).
pub fn reference_path(
    problem: &Problem,
    resolution: [usize; 2],
    rule: QuadratureRule,
    time_points: usize,
    extrapolate: bool,
    options: &SolverOptions,
) -> Result<ConcentrationPath> {
    reference_with_residual(problem, resolution, rule, time_points, extrapolate, options)
        .map(|(path, _)| path)
}

fn merge_residual(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn reference_with_residual(
    problem: &Problem,
    resolution: [usize; 2],
    rule: QuadratureRule,
    time_points: usize,
    extrapolate: bool,
    options: &SolverOptions,
) -> Result<(ConcentrationPath, Option<f64>)> {
    let (coarse, _) = timed_emom(problem, resolution, rule, time_points, options, 1)?;
    if !extrapolate {
        return Ok((coarse.path, coarse.max_balance_residual));
    }
    let (fine, _) = timed_emom(problem, resolution, rule, 2 * time_points - 1, options, 1)?;
    let residual = merge_residual(coarse.max_balance_residual, fine.max_balance_residual);
    let values = coarse
        .path
        .values()
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let f = fine.path.values()[2 * k];
            [2.0 * f[0] - c[0], 2.0 * f[1] - c[1]]
        })
        .collect();
    Ok((
        ConcentrationPath::new(coarse.path.grid().clone(), values)?,
        residual,
    ))
}

#[derive(Debug, Clone)]
pub struct StudyReport {
    pub rows: Vec<ErrorRow>,
    pub slopes: Vec<SlopeRow>,
    /// Matched-DoF pairs `(dof, emom error, fvm error)` of a comparison.
    pub matched: Vec<(f64, f64, f64)>,
    pub reference_seconds: f64,
    /// Largest relative mass-balance residual over all eMoM solves of the
    /// study, when balance checking is enabled.
    pub max_balance_residual: Option<f64>,
}

/// Temporal refinement at fixed quadrature: L-infinity and L2 errors against
/// a reference with `reference_time_points`.
#[allow(clippy::too_many_arguments)]
pub fn convergence_study(
    problem: &Problem,
    resolution: [usize; 2],
    rule: QuadratureRule,
    ladder: &[usize],
    reference_time_points: usize,
    extrapolate: bool,
    options: &SolverOptions,
    repetitions: usize,
) -> Result<StudyReport> {
    let start = Instant::now();
    let (reference, mut residual) = reference_with_residual(
        problem,
        resolution,
        rule,
        reference_time_points,
        extrapolate,
        options,
    )?;
    let reference_seconds = start.elapsed().as_secs_f64();
    let nodes = resolution[0] * resolution[1];
    let mut rows = Vec::with_capacity(ladder.len());
    for &points in ladder {
        let (sol, seconds) = timed_emom(problem, resolution, rule, points, options, repetitions)?;
        residual = merge_residual(residual, sol.max_balance_residual);
        let norms = error_norms(&sol.path, &reference, Interpolation::Linear)?;
        log::info!("N_t = {points}: L-inf {:.3e}", norms.max_linf());
        rows.push(ErrorRow {
            method: "emom".into(),
            level: points,
            time_points: points,
            nodes,
            dof: (points * nodes) as f64,
            seconds,
            norms,
        });
    }
    let linf: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.time_points as f64, r.linf()))
        .collect();
    let l2: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.time_points as f64, r.l2()))
        .collect();
    let slopes = vec![
        SlopeRow {
            quantity: "emom_linf_vs_time_points".into(),
            fit: fit_slope(&linf)?,
            target: -1.0,
            tolerance: 0.15,
        },
        SlopeRow {
            quantity: "emom_l2_vs_time_points".into(),
            fit: fit_slope(&l2)?,
            target: -1.0,
            tolerance: 0.15,
        },
    ];
    Ok(StudyReport {
        rows,
        slopes,
        matched: Vec::new(),
        reference_seconds,
        max_balance_residual: residual,
    })
}

/// Settings of an eMoM versus finite-volume comparison.
#[derive(Debug, Clone)]
pub struct CompareSettings {
    /// eMoM levels `M`: `M x M` nodes, `M^2` time points.
    pub emom_ladder: Vec<usize>,
    /// Finite-volume levels `M`: `M x M` cells.
    pub fvm_ladder: Vec<usize>,
    pub reference_resolution: [usize; 2],
    pub reference_time_points: usize,
    pub extrapolate: bool,
    pub rule: QuadratureRule,
    pub solver: SolverOptions,
    pub fvm: FvmOptions,
    pub repetitions: usize,
}

/// L2 concentration errors of both methods against a common eMoM reference,
/// as functions of the degrees of freedom.
pub fn compare_study(problem: &Problem, settings: &CompareSettings) -> Result<StudyReport> {
    let start = Instant::now();
    let (reference, mut residual) = reference_with_residual(
        problem,
        settings.reference_resolution,
        settings.rule,
        settings.reference_time_points,
        settings.extrapolate,
        &settings.solver,
    )?;
    let reference_seconds = start.elapsed().as_secs_f64();
    let mut rows = Vec::new();
    for &m in &settings.emom_ladder {
        let points = m * m;
        let (sol, seconds) = timed_emom(
            problem,
            [m, m],
            settings.rule,
            points,
            &settings.solver,
            settings.repetitions,
        )?;
        residual = merge_residual(residual, sol.max_balance_residual);
        let norms = error_norms(&sol.path, &reference, Interpolation::Linear)?;
        rows.push(ErrorRow {
            method: "emom".into(),
            level: m,
            time_points: points,
            nodes: m * m,
            dof: (points * m * m) as f64,
            seconds,
            norms,
        });
    }
    for &m in &settings.fvm_ladder {
        let (sol, seconds) = median_time(settings.repetitions, || {
            fvm_solve(problem, [m, m], &settings.fvm)
        })?;
        let norms = error_norms(&sol.path, &reference, Interpolation::Linear)?;
        rows.push(ErrorRow {
            method: "fvm".into(),
            level: m,
            time_points: sol.steps + 1,
            nodes: m * m,
            dof: sol.dof(),
            seconds,
            norms,
        });
    }
    let series = |method: &str| -> Vec<(f64, f64)> {
        rows.iter()
            .filter(|r| r.method == method)
            .map(|r| (r.dof, r.l2()))
            .collect()
    };
    let (emom, fvm) = (series("emom"), series("fvm"));
    let slopes = vec![
        SlopeRow {
            quantity: "emom_l2_vs_dof".into(),
            fit: fit_slope(&emom)?,
            target: -0.5,
            tolerance: 0.1,
        },
        SlopeRow {
            quantity: "fvm_l2_vs_dof".into(),
            fit: fit_slope(&fvm)?,
            target: -1.0 / 3.0,
            tolerance: 0.1,
        },
    ];
    Ok(StudyReport {
        matched: matched_dof(&emom, &fvm),
        rows,
        slopes,
        reference_seconds,
        max_balance_residual: residual,
    })
}

/// Log-log interpolation of a monotone-in-x series; `None` outside its range.
fn interpolate_loglog(series: &[(f64, f64)], x: f64) -> Option<f64> {
    let mut sorted = series.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let w = sorted.windows(2).find(|w| w[0].0 <= x && x <= w[1].0)?;
    let (x0, x1) = (w[0].0.ln(), w[1].0.ln());
    let (y0, y1) = (w[0].1.ln(), w[1].1.ln());
    let s = if x1 > x0 {
        (x.ln() - x0) / (x1 - x0)
    } else {
        0.0
    };
    Some((y0 + s * (y1 - y0)).exp())
}

/// Pairs `(dof, emom, fvm)` at every ladder point of either method that lies
/// inside the DoF range of the other.
pub fn matched_dof(emom: &[(f64, f64)], fvm: &[(f64, f64)]) -> Vec<(f64, f64, f64)> {
    let mut out: Vec<(f64, f64, f64)> = emom
        .iter()
        .filter_map(|&(d, e)| interpolate_loglog(fvm, d).map(|f| (d, e, f)))
        .chain(
            fvm.iter()
                .filter_map(|&(d, f)| interpolate_loglog(emom, d).map(|e| (d, e, f))),
        )
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Wall-clock time of eMoM solves for `(time_points, nodes per axis)` pairs
/// and the fitted slope against `N_x N_t`.
pub fn timing_study(
    problem: &Problem,
    sizes: &[(usize, usize)],
    rule: QuadratureRule,
    options: &SolverOptions,
    repetitions: usize,
) -> Result<(Vec<TimingRow>, SlopeRow)> {
    if sizes.is_empty() {
        return Err(Error::config("grids", "empty timing ladder"));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &(points, m) in sizes {
        let (_, seconds) = timed_emom(problem, [m, m], rule, points, options, repetitions)?;
        rows.push(TimingRow {
            time_points: points,
            nodes: m * m,
            work: (points * m * m) as f64,
            seconds,
        });
    }
    let fit = fit_slope(&rows.iter().map(|r| (r.work, r.seconds)).collect::<Vec<_>>())?;
    Ok((
        rows,
        SlopeRow {
            quantity: "seconds_vs_work".into(),
            fit,
            target: 1.0,
            tolerance: 0.2,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_three() {
        let mut calls = 0;
        let (v, t) = median_time(3, || {
            calls += 1;
            Ok(calls)
        })
        .unwrap();
        assert_eq!(v, 3);
        assert!(t >= 0.0);
    }

    #[test]
    fn loglog_interpolation_and_matching() {
        let emom: Vec<(f64, f64)> = [1e4f64, 1e5, 1e6]
            .iter()
            .map(|d| (*d, 1.0 / d.sqrt()))
            .collect();
        let fvm: Vec<(f64, f64)> = [3e4f64, 3e5, 3e6]
            .iter()
            .map(|d| (*d, d.powf(-1.0 / 3.0)))
            .collect();
        let v = interpolate_loglog(&emom, 1e5 * 10f64.sqrt()).unwrap();
        assert!((v - (1e5 * 10f64.sqrt()).powf(-0.5)).abs() < 1e-12);
        assert!(interpolate_loglog(&emom, 1e7).is_none());
        let matched = matched_dof(&emom, &fvm);
        assert_eq!(matched.len(), 4);
        assert!(matched.iter().all(|(_, e, f)| e < f));
    }

    #[test]
    fn small_convergence_study() {
        let problem = Problem::benchmark(5.0).unwrap();
        let report = convergence_study(
            &problem,
            [20, 20],
            QuadratureRule::Midpoint,
            &[11, 21, 41, 81],
            2001,
            true,
            &SolverOptions::default(),
            1,
        )
        .unwrap();
        assert_eq!(report.rows.len(), 4);
        assert!(report.rows.windows(2).all(|w| w[1].linf() < w[0].linf()));
        assert!(report.slopes[0].pass(), "{:?}", report.slopes[0]);
    }

    #[test]
    fn richardson_reference_beats_plain() {
        let problem = Problem::benchmark(5.0).unwrap();
        let opts = SolverOptions::default();
        let rule = QuadratureRule::Midpoint;
        let truth = reference_path(&problem, [20, 20], rule, 8001, true, &opts).unwrap();
        let plain = reference_path(&problem, [20, 20], rule, 201, false, &opts).unwrap();
        let extra = reference_path(&problem, [20, 20], rule, 201, true, &opts).unwrap();
        let e_plain = error_norms(&plain, &truth, Interpolation::Linear).unwrap();
        let e_extra = error_norms(&extra, &truth, Interpolation::Linear).unwrap();
        assert!(e_extra.max_linf() < 0.05 * e_plain.max_linf());
    }
}
