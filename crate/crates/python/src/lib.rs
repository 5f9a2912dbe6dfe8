//! Python module `emom_md`.

use emom::bench::{error_norms, ExperimentConfig, Interpolation};
use emom::characteristics::Characteristics;
use emom::fvm::{fvm_solve, FvmOptions};
use emom::model::{build_quadrature, ConcentrationPath, DisperseState, Problem, TimeGrid};
use emom::reconstruction::{moments, radial_composition, Reconstruction};
use emom::solver::solve;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: emom::Error) -> PyErr {
    if e.is_config() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

/// `(states, values, weights)`
type Snapshot = (Vec<(f64, f64)>, Vec<f64>, Vec<f64>);

/// Experiment configuration parsed from TOML.
#[pyclass(name = "Config", module = "emom_md", skip_from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: ExperimentConfig,
}

#[pymethods]
impl PyConfig {
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        ExperimentConfig::from_toml_str(text)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (ratio=5.0))]
    fn benchmark(ratio: f64) -> Self {
        Self {
            inner: ExperimentConfig::benchmark(ratio),
        }
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.inner.process.horizon
    }

    #[getter]
    fn time_points(&self) -> usize {
        self.inner.grids.time_points
    }

    #[setter]
    fn set_time_points(&mut self, n: usize) {
        self.inner.grids.time_points = n;
    }

    #[getter]
    fn quadrature(&self) -> (usize, usize) {
        (
            self.inner.grids.quadrature[0],
            self.inner.grids.quadrature[1],
        )
    }

    #[setter]
    fn set_quadrature(&mut self, m: (usize, usize)) {
        self.inner.grids.quadrature = [m.0, m.1];
    }

    #[getter]
    fn threads(&self) -> usize {
        self.inner.run.threads
    }

    #[setter]
    fn set_threads(&mut self, n: usize) {
        self.inner.run.threads = n;
    }

    /// eMoM solve on the configured grids.
    fn solve(&self, py: Python<'_>) -> PyResult<Solution> {
        let cfg = &self.inner;
        cfg.validate().map_err(to_py)?;
        let problem = cfg.problem().map_err(to_py)?;
        let path = py
            .detach(|| {
                let quad = build_quadrature(&problem.initial, cfg.grids.quadrature, cfg.rule())?;
                let grid = TimeGrid::uniform(problem.process.horizon, cfg.grids.time_points)?;
                solve(&problem, &quad, &grid, cfg.solver_options())
            })
            .map_err(to_py)?;
        Ok(Solution {
            problem,
            path: path.path,
            balance: path.max_balance_residual,
        })
    }

    /// Finite-volume solve on `cells` cells per axis.
    fn solve_fvm(&self, py: Python<'_>, cells: (usize, usize)) -> PyResult<Solution> {
        let problem = self.inner.problem().map_err(to_py)?;
        let options: FvmOptions = self.inner.fvm_options();
        let sol = py
            .detach(|| fvm_solve(&problem, [cells.0, cells.1], &options))
            .map_err(to_py)?;
        Ok(Solution {
            problem,
            path: sol.path,
            balance: None,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(horizon={}, time_points={}, quadrature={:?})",
            self.inner.process.horizon, self.inner.grids.time_points, self.inner.grids.quadrature
        )
    }
}

/// Concentration path of a solve together with its problem.
#[pyclass(module = "emom_md")]
struct Solution {
    problem: Problem,
    path: ConcentrationPath,
    balance: Option<f64>,
}

#[pymethods]
impl Solution {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.path.times().to_vec()
    }

    /// `[(c1, c2), ...]` at every time point.
    #[getter]
    fn concentrations(&self) -> Vec<(f64, f64)> {
        self.path.values().iter().map(|c| (c[0], c[1])).collect()
    }

    /// Largest relative mass-balance residual, when it was checked.
    #[getter]
    fn balance_residual(&self) -> Option<f64> {
        self.balance
    }

    /// `(linf, l2)` per component against `reference`, which may live on
    /// another time grid.
    fn error_norms(&self, reference: &Solution) -> PyResult<((f64, f64), (f64, f64))> {
        let n = error_norms(&self.path, &reference.path, Interpolation::Linear).map_err(to_py)?;
        Ok(((n.linf[0], n.linf[1]), (n.l2[0], n.l2[1])))
    }

    /// Discrete characteristic `xi(k, x, i)`.
    fn characteristic(&self, k: usize, x: (f64, f64), i: usize) -> PyResult<(f64, f64)> {
        let ch = Characteristics::new(&self.path, &self.problem.law, self.problem.process.x_min);
        let y = ch.map(k, DisperseState::new(x.0, x.1), i).map_err(to_py)?;
        Ok((y.radius, y.composition))
    }

    /// Density `q(t_k, x)` by backward evaluation.
    fn density(&self, k: usize, x: (f64, f64)) -> f64 {
        let rec = self.reconstruction();
        rec.q_backward(k, DisperseState::new(x.0, x.1))
    }

    /// `(states, values, weights)` of a backward snapshot at time index `k`.
    #[pyo3(signature = (k, resolution=(200, 200)))]
    fn snapshot(&self, py: Python<'_>, k: usize, resolution: (usize, usize)) -> PyResult<Snapshot> {
        let snap = py
            .detach(|| {
                let rec = self.reconstruction();
                rec.backward_snapshot(k, rec.forward_window(k)?, [resolution.0, resolution.1])
            })
            .map_err(to_py)?;
        Ok((
            snap.states
                .iter()
                .map(|x| (x.radius, x.composition))
                .collect(),
            snap.values,
            snap.weights,
        ))
    }

    /// Number, mean radius and mean composition at time index `k`.
    #[pyo3(signature = (k, resolution=(200, 200)))]
    fn moments(&self, k: usize, resolution: (usize, usize)) -> PyResult<(f64, f64, f64)> {
        let rec = self.reconstruction();
        let snap = rec
            .backward_snapshot(
                k,
                rec.forward_window(k).map_err(to_py)?,
                [resolution.0, resolution.1],
            )
            .map_err(to_py)?;
        let m = moments(&snap).map_err(to_py)?;
        Ok((m.number, m.mean_radius, m.mean_composition))
    }

    /// `(radii, fractions)` of the radial composition grown from `seed`.
    fn radial_profile(&self, seed: (f64, f64)) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let p = radial_composition(
            DisperseState::new(seed.0, seed.1),
            &self.path,
            &self.problem.law,
        )
        .map_err(to_py)?;
        Ok((p.radii, p.fractions))
    }

    fn __len__(&self) -> usize {
        self.path.len()
    }
}

impl Solution {
    fn reconstruction(&self) -> Reconstruction<'_> {
        Reconstruction::new(
            &self.path,
            &self.problem.law,
            &self.problem.initial,
            self.problem.process.x_min,
        )
    }
}

/// Solves the benchmark with the default solver options.
#[pyfunction]
#[pyo3(signature = (ratio=5.0, time_points=1001, nodes=100))]
fn benchmark(py: Python<'_>, ratio: f64, time_points: usize, nodes: usize) -> PyResult<Solution> {
    let mut cfg = ExperimentConfig::benchmark(ratio);
    cfg.grids.time_points = time_points;
    cfg.grids.quadrature = [nodes, nodes];
    PyConfig { inner: cfg }.solve(py)
}

#[pymodule]
#[pyo3(name = "emom_md")]
fn python_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(benchmark, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
