use crate::error::{Error, Result};
use crate::model::ConcentrationPath;

/// How the reference path is evaluated at the times of the compared path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    /// Every time point must also be a reference time point.
    #[default]
    Exact,
    /// Piecewise linear interpolation of the reference.
    Linear,
}

/// Per-component error norms of a concentration path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub linf: [f64; 2],
    pub l2: [f64; 2],
}

impl ErrorNorms {
    pub fn max_linf(&self) -> f64 {
        self.linf[0].max(self.linf[1])
    }

    pub fn max_l2(&self) -> f64 {
        self.l2[0].max(self.l2[1])
    }
}

/// Relative tolerance used to match time points in [`Interpolation::Exact`].
const TIME_MATCH: f64 = 1e-12;

/// L-infinity (over the grid of `path`) and L2 (trapezoidal in time) norms of
/// `path - reference`.
pub fn error_norms(
    path: &ConcentrationPath,
    reference: &ConcentrationPath,
    mode: Interpolation,
) -> Result<ErrorNorms> {
    let scale = reference.grid().horizon().abs().max(f64::MIN_POSITIVE);
    let (t_lo, t_hi) = (reference.times()[0], *reference.times().last().unwrap());
    let mut cursor = 0;
    let mut diffs = Vec::with_capacity(path.len());
    for (t, c) in path.times().iter().zip(path.values()) {
        if *t < t_lo - TIME_MATCH * scale || *t > t_hi + TIME_MATCH * scale {
            return Err(Error::IncompatibleGrids(format!(
                "time {t} lies outside the reference interval [{t_lo}, {t_hi}]"
            )));
        }
        let r = match mode {
            Interpolation::Linear => reference.interpolate(*t),
            Interpolation::Exact => {
                let times = reference.times();
                while cursor + 1 < times.len() && times[cursor] < *t - TIME_MATCH * scale {
                    cursor += 1;
                }
                if (times[cursor] - t).abs() > TIME_MATCH * scale {
                    return Err(Error::IncompatibleGrids(format!(
                        "time {t} is not a reference time point"
                    )));
                }
                reference.values()[cursor]
            }
        };
        diffs.push([c[0] - r[0], c[1] - r[1]]);
    }
    let mut norms = ErrorNorms {
        linf: [0.0; 2],
        l2: [0.0; 2],
    };
    for i in 0..2 {
        norms.linf[i] = diffs.iter().map(|d| d[i].abs()).fold(0.0, f64::max);
        let mut sum = 0.0;
        for (w, d) in path.times().windows(2).zip(diffs.windows(2)) {
            sum += 0.5 * (w[1] - w[0]) * (d[0][i] * d[0][i] + d[1][i] * d[1][i]);
        }
        norms.l2[i] = sum.sqrt();
    }
    Ok(norms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TimeGrid;
    use approx::assert_relative_eq;

    fn path(points: usize, f: impl Fn(f64) -> [f64; 2]) -> ConcentrationPath {
        ConcentrationPath::sampled(TimeGrid::uniform(0.5, points).unwrap(), f)
    }

    #[test]
    fn identical_paths() {
        let a = path(11, |t| [t, 1.0 - t]);
        let n = error_norms(&a, &a, Interpolation::Exact).unwrap();
        assert_eq!(n.linf, [0.0, 0.0]);
        assert_eq!(n.l2, [0.0, 0.0]);
    }

    #[test]
    fn constant_offset() {
        let eps = 1e-3;
        let a = path(11, |t| [t + eps, 2.0 - eps]);
        let b = path(21, |t| [t, 2.0]);
        let n = error_norms(&a, &b, Interpolation::Exact).unwrap();
        for i in 0..2 {
            assert_relative_eq!(n.linf[i], eps, max_relative = 1e-9);
            assert_relative_eq!(n.l2[i], eps * 0.5f64.sqrt(), max_relative = 1e-9);
        }
    }

    #[test]
    fn incompatible_grids() {
        let a = path(4, |t| [t, t]);
        let b = path(5, |t| [t, t]);
        assert!(matches!(
            error_norms(&a, &b, Interpolation::Exact),
            Err(Error::IncompatibleGrids(_))
        ));
        // linear data is reproduced by interpolation
        let n = error_norms(&a, &b, Interpolation::Linear).unwrap();
        assert!(n.max_linf() < 1e-15);
        let long = ConcentrationPath::sampled(TimeGrid::uniform(1.0, 5).unwrap(), |t| [t, t]);
        assert!(error_norms(&long, &b, Interpolation::Linear).is_err());
    }
}
