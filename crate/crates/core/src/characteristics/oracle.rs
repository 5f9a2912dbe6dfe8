//! Reference integrator for the characteristic ODE `dx/dt = G(c(t), x)`.
//!
//! Adaptive Dormand-Prince 5(4). Used by tests and convergence studies; the
//! solver itself never calls it.

use crate::error::{Error, Result};
use crate::model::{ConcentrationPath, DisperseState, GrowthLaw};

/// Concentrations driving the ODE.
#[derive(Clone, Copy)]
pub enum ConcentrationInput<'a> {
    /// Piecewise constant on the path's grid, holding the lower-endpoint
    /// value on each interval. Integration restarts at every grid point.
    Path(&'a ConcentrationPath),
    /// Arbitrary smooth function of time.
    Function(&'a dyn Fn(f64) -> [f64; 2]),
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// difference between the 5th and 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

type State = [f64; 2];

fn rhs(law: &GrowthLaw, c: [f64; 2], y: State) -> Result<State> {
    if !(y[0] > 0.0) {
        return Err(Error::Domain(format!(
            "characteristic reached nonpositive radius {}",
            y[0]
        )));
    }
    let rates = law.rates(c);
    let total = rates.total();
    let n = law.exponent();
    Ok([
        total * y[0].powf(n),
        3.0 * (rates.g1 - total * y[1]) * y[0].powf(n - 1.0),
    ])
}

fn axpy(y: State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = y;
    for (a, k) in terms {
        out[0] += h * a * k[0];
        out[1] += h * a * k[1];
    }
    out
}

/// Integrates one smooth segment from `t0` to `t1` (either direction).
fn integrate_segment(
    law: &GrowthLaw,
    conc: &dyn Fn(f64) -> [f64; 2],
    t0: f64,
    t1: f64,
    mut y: State,
    tol: f64,
) -> Result<State> {
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y);
    }
    let direction = span.signum();
    let mut t = t0;
    let mut h = span;
    let mut k1 = rhs(law, conc(t), y)?;
    loop {
        if (t1 - t) * direction <= 0.0 {
            return Ok(y);
        }
        let last = (t + h - t1) * direction >= 0.0;
        if last {
            h = t1 - t;
        }
        let k2 = rhs(law, conc(t + C2 * h), axpy(y, &[(A21, &k1)], h))?;
        let k3 = rhs(law, conc(t + C3 * h), axpy(y, &[(A31, &k1), (A32, &k2)], h))?;
        let k4 = rhs(
            law,
            conc(t + C4 * h),
            axpy(y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h),
        )?;
        let k5 = rhs(
            law,
            conc(t + C5 * h),
            axpy(y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
        )?;
        let k6 = rhs(
            law,
            conc(t + h),
            axpy(
                y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                h,
            ),
        )?;
        let y_new = axpy(
            y,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            h,
        );
        let k7 = rhs(law, conc(t + h), y_new)?;
        let mut err: f64 = 0.0;
        for d in 0..2 {
            let e =
                h * (E1 * k1[d] + E3 * k3[d] + E4 * k4[d] + E5 * k5[d] + E6 * k6[d] + E7 * k7[d]);
            let scale = tol + tol * y[d].abs().max(y_new[d].abs());
            err = err.max((e / scale).abs());
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + h };
            y = y_new;
            k1 = k7;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h.abs() <= 1e-15 * t.abs().max(span.abs()) {
            return Err(Error::StepSizeUnderflow { t });
        }
    }
}

/// Solves the characteristic ODE from `(t_start, x)` to `t_end` with local
/// tolerance `tol` (relative and absolute).
pub fn ode_oracle(
    t_start: f64,
    x: DisperseState,
    t_end: f64,
    concentration: ConcentrationInput<'_>,
    law: &GrowthLaw,
    tol: f64,
) -> Result<DisperseState> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut y = [x.radius, x.composition];
    match concentration {
        ConcentrationInput::Function(f) => {
            y = integrate_segment(law, f, t_start, t_end, y, tol)?;
        }
        ConcentrationInput::Path(path) => {
            let times = path.times();
            let (lo, hi) = (t_start.min(t_end), t_start.max(t_end));
            // breakpoints strictly inside the integration interval
            let mut marks: Vec<f64> = vec![lo];
            marks.extend(times.iter().copied().filter(|&t| t > lo && t < hi));
            marks.push(hi);
            let segments: Vec<(f64, f64)> = marks.windows(2).map(|w| (w[0], w[1])).collect();
            let ordered: Box<dyn Iterator<Item = (f64, f64)>> = if t_end >= t_start {
                Box::new(segments.into_iter())
            } else {
                Box::new(segments.into_iter().rev().map(|(a, b)| (b, a)))
            };
            for (a, b) in ordered {
                let c = path.piecewise_constant(0.5 * (a + b));
                y = integrate_segment(law, &|_| c, a, b, y, tol)?;
            }
        }
    }
    Ok(DisperseState::new(y[0], y[1]))
}
