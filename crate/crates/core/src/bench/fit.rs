use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Least-squares line through `(log10 x, log10 y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Two-sided 95% confidence interval of the slope.
    pub ci_low: f64,
    pub ci_high: f64,
    pub r_squared: f64,
    pub points: usize,
}

impl SlopeFit {
    pub fn within(&self, target: f64, tolerance: f64) -> bool {
        (self.slope - target).abs() <= tolerance
    }
}

/// Fits `log y = a + b log x`. Needs at least three points with positive
/// coordinates and two distinct abscissae.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::DegenerateFit(format!(
            "log-log fit needs positive values, got {p:?}"
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.log10(), y.log10())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 1e-24) {
        return Err(Error::DegenerateFit("abscissae have no spread".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual: f64 = logs
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let dof = n - 2.0;
    let se = (residual / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::DegenerateFit(e.to_string()))?
        .inverse_cdf(0.975);
    let r_squared = if syy > 0.0 { 1.0 - residual / syy } else { 1.0 };
    Ok(SlopeFit {
        slope,
        intercept,
        ci_low: slope - t * se,
        ci_high: slope + t * se,
        r_squared,
        points: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_power_laws() {
        let xs = [1e2, 1e3, 1e4, 1e5];
        let fit = fit_slope(&xs.map(|x| (x, 1.0 / x))).unwrap();
        assert_relative_eq!(fit.slope, -1.0, epsilon = 1e-12);
        assert_relative_eq!(fit.ci_low, -1.0, epsilon = 1e-6);
        let fit = fit_slope(&xs.map(|x| (x, 3.0 * x.powf(-1.0 / 3.0)))).unwrap();
        assert_relative_eq!(fit.slope, -1.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(fit.intercept, 3f64.log10(), epsilon = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn noisy_fit_has_interval() {
        let pts = [(1.0, 1.0), (10.0, 0.12), (100.0, 0.009), (1000.0, 0.0011)];
        let fit = fit_slope(&pts).unwrap();
        assert!(fit.ci_low < fit.slope && fit.slope < fit.ci_high);
        assert!(fit.within(-1.0, 0.1));
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_slope(&[(1.0, 1.0), (2.0, 0.5)]).is_err());
        assert!(fit_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 0.1)]).is_err());
        assert!(fit_slope(&[(2.0, 1.0), (2.0, 0.5), (2.0, 0.1)]).is_err());
    }
}
