use crate::error::{Error, Result};

/// Strictly increasing time grid starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    /// `points` equally spaced instants on `[0, horizon]`. A single point is
    /// only allowed for a zero horizon.
    pub fn uniform(horizon: f64, points: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::config(
                "grids.time_steps",
                "need at least one time point",
            ));
        }
        if points == 1 {
            if horizon != 0.0 {
                return Err(Error::config(
                    "grids.time_steps",
                    "a positive horizon needs at least two time points",
                ));
            }
            return Ok(Self { times: vec![0.0] });
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::config("process.horizon", "must be positive"));
        }
        let last = (points - 1) as f64;
        let mut times: Vec<f64> = (0..points).map(|k| horizon * k as f64 / last).collect();
        times[points - 1] = horizon;
        Ok(Self { times })
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.first() != Some(&0.0) {
            return Err(Error::config("grids.times", "time grid must start at 0"));
        }
        if times
            .windows(2)
            .any(|w| !(w[1] > w[0]) || !w[1].is_finite())
        {
            return Err(Error::config(
                "grids.times",
                "time grid must be strictly increasing and finite",
            ));
        }
        Ok(Self { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// Step length `t_{k+1} - t_k`.
    #[inline]
    pub fn step(&self, k: usize) -> f64 {
        self.times[k + 1] - self.times[k]
    }
}

/// Solute concentrations `C_{i,k}` on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationPath {
    grid: TimeGrid,
    values: Vec<[f64; 2]>,
}

impl ConcentrationPath {
    pub fn new(grid: TimeGrid, values: Vec<[f64; 2]>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::IncompatibleGrids(format!(
                "{} time points but {} concentration values",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Path with the same concentration pair at every grid point.
    pub fn constant(grid: TimeGrid, value: [f64; 2]) -> Self {
        let values = vec![value; grid.len()];
        Self { grid, values }
    }

    /// Samples `f(t)` on the grid.
    pub fn sampled(grid: TimeGrid, f: impl Fn(f64) -> [f64; 2]) -> Self {
        let values = grid.times().iter().map(|&t| f(t)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    pub fn values(&self) -> &[[f64; 2]] {
        &self.values
    }

    pub fn component(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(move |c| c[i])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Piecewise-linear interpolation; clamps outside the grid.
    pub fn interpolate(&self, t: f64) -> [f64; 2] {
        let times = self.times();
        if t <= times[0] {
            return self.values[0];
        }
        let last = times.len() - 1;
        if t >= times[last] {
            return self.values[last];
        }
        let j = times.partition_point(|&s| s <= t);
        let (t0, t1) = (times[j - 1], times[j]);
        let w = (t - t0) / (t1 - t0);
        let (a, b) = (self.values[j - 1], self.values[j]);
        [a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])]
    }

    /// Value held on the interval containing `t`, i.e. the lower-endpoint
    /// sample used by the explicit scheme.
    pub fn piecewise_constant(&self, t: f64) -> [f64; 2] {
        let times = self.times();
        let j = times.partition_point(|&s| s <= t);
        self.values[j.saturating_sub(1)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_endpoints() {
        let g = TimeGrid::uniform(0.01, 11).unwrap();
        assert_eq!(g.times()[0], 0.0);
        assert_eq!(g.horizon(), 0.01);
        assert!(g.times().windows(2).all(|w| w[1] > w[0]));
        assert_eq!(TimeGrid::uniform(0.0, 1).unwrap().len(), 1);
        assert!(TimeGrid::uniform(1.0, 1).is_err());
    }

    #[test]
    fn rejects_non_monotone_grids() {
        assert!(TimeGrid::from_times(vec![0.0, 0.5, 0.5]).is_err());
        assert!(TimeGrid::from_times(vec![0.1, 0.5]).is_err());
        assert!(TimeGrid::from_times(vec![0.0, 0.2, 0.7]).is_ok());
    }

    #[test]
    fn interpolation() {
        let g = TimeGrid::from_times(vec![0.0, 1.0, 3.0]).unwrap();
        let p = ConcentrationPath::new(g, vec![[0.0, 1.0], [2.0, 1.0], [6.0, 0.0]]).unwrap();
        assert_eq!(p.interpolate(0.5), [1.0, 1.0]);
        assert_eq!(p.interpolate(2.0), [4.0, 0.5]);
        assert_eq!(p.interpolate(10.0), [6.0, 0.0]);
        assert_eq!(p.piecewise_constant(2.0), [2.0, 1.0]);
        assert_eq!(p.piecewise_constant(0.0), [0.0, 1.0]);
    }
}
