//! Discrete characteristics of the growth field.
//!
//! With concentrations frozen on each interval `[t_l, t_{l+1})` the radius
//! sub-equation is solved exactly through the accumulated growth
//! `P_l = sum_{j<l} (G1 + G2)(C_j) (t_{j+1} - t_j)`:
//!
//! ```text
//! x1(k -> i)^(1-n) = x1^(1-n) + (1-n) (P_i - P_k)
//! ```
//!
//! and the composition is advanced with the exponential update
//! `x2' = (3 G1 dt / s + x2) exp(-3 (G1 + G2) dt / s)`, `s = x1^(1-n)`
//! evaluated at the start of the step. Evaluation with `k > i` runs the same
//! recursion backwards and inverts the forward map exactly.
//!
//! Time indices are zero-based throughout: index `0` is `t = 0`.

mod field;
pub mod oracle;

pub use field::CharacteristicField;
pub use oracle::{ode_oracle, ConcentrationInput};

use crate::error::{Error, Result};
use crate::model::{ConcentrationPath, DisperseState, GrowthLaw};

/// Slack allowed when classifying a backward composition as inside `[0, 1]`.
const COMPOSITION_SLACK: f64 = 1e-12;

/// `x^(1-n)` with shortcuts for the common exponents.
#[inline]
pub(crate) fn radius_power(x1: f64, n: f64) -> f64 {
    if n == 0.0 {
        x1
    } else if n == -1.0 {
        x1 * x1
    } else {
        x1.powf(1.0 - n)
    }
}

/// Inverse of [`radius_power`].
#[inline]
pub(crate) fn radius_root(s: f64, n: f64) -> f64 {
    if n == 0.0 {
        s
    } else if n == -1.0 {
        s.sqrt()
    } else {
        s.powf(1.0 / (1.0 - n))
    }
}

/// One step of the radius: `(x1^(1-n) + (1-n) * increment)^(1/(1-n))`, with
/// `increment = (G1 + G2) * dt`.
pub fn step_radius(x1: f64, total_increment: f64, n: f64) -> Result<f64> {
    if !(x1 > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {x1}")));
    }
    if n == 1.0 {
        return Err(Error::Domain("size exponent 1 has no closed form".into()));
    }
    let radicand = radius_power(x1, n) + (1.0 - n) * total_increment;
    if !(radicand > 0.0) {
        return Err(Error::Step { step: 0, radicand });
    }
    Ok(radius_root(radicand, n))
}

/// One step of the composition:
/// `(3 g1_increment / x1^(1-n) + x2) exp(-3 total_increment / x1^(1-n))`.
pub fn step_composition(x: DisperseState, g1_increment: f64, total_increment: f64, n: f64) -> f64 {
    composition_update(
        x.composition,
        g1_increment,
        total_increment,
        radius_power(x.radius, n),
    )
}

/// Composition update given `s = x1^(1-n)` at the start of the step.
///
/// For `0 <= g1_increment <= total_increment` the exact value stays in
/// `[0, 1]`; the result is clamped there so that rounding cannot push it out
/// by an ulp.
#[inline]
pub(crate) fn composition_update(x2: f64, g1_increment: f64, total_increment: f64, s: f64) -> f64 {
    let value = (3.0 * g1_increment / s + x2) * (-3.0 * total_increment / s).exp();
    if g1_increment >= 0.0 && total_increment >= g1_increment && (0.0..=1.0).contains(&x2) {
        value.clamp(0.0, 1.0)
    } else {
        value
    }
}

/// Radius ratio and exponential factor of the Jacobian determinant of a
/// discrete characteristic map `x -> xi(k, x, i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianFactor {
    /// `exp(3 sum_{l=k}^{i-1} (G1 + G2)_l dt_l / xi_1(k, x, l)^(1-n))`, with
    /// the sum negated when `k > i`.
    pub psi: f64,
    /// `xi_1(k, x, i) / x1`.
    pub radius_ratio: f64,
    /// Size exponent `n`.
    pub exponent: f64,
}

impl JacobianFactor {
    /// Determinant of the map, `radius_ratio^n / psi`.
    pub fn determinant(&self) -> f64 {
        self.radius_ratio.powf(self.exponent) / self.psi
    }

    /// Density factor `1 / determinant` of the push-forward.
    pub fn density_factor(&self) -> f64 {
        self.psi / self.radius_ratio.powf(self.exponent)
    }
}

/// Discrete characteristics generated by a concentration path.
#[derive(Debug, Clone)]
pub struct Characteristics {
    exponent: f64,
    x_min: f64,
    /// `G1(C_l) dt_l`
    g1: Vec<f64>,
    /// `(G1 + G2)(C_l) dt_l`
    total: Vec<f64>,
    /// `P_l`, length equals the number of time points.
    cumulative: Vec<f64>,
    times: Vec<f64>,
}

impl Characteristics {
    pub fn new(path: &ConcentrationPath, law: &GrowthLaw, x_min: f64) -> Self {
        let times = path.times().to_vec();
        let steps = times.len().saturating_sub(1);
        let mut g1 = Vec::with_capacity(steps);
        let mut total = Vec::with_capacity(steps);
        let mut cumulative = Vec::with_capacity(steps + 1);
        let mut acc = 0.0;
        cumulative.push(acc);
        for (k, c) in path.values().iter().take(steps).enumerate() {
            let dt = times[k + 1] - times[k];
            let rates = law.rates(*c);
            g1.push(rates.g1 * dt);
            total.push(rates.total() * dt);
            acc += rates.total() * dt;
            cumulative.push(acc);
        }
        Self {
            exponent: law.exponent(),
            x_min,
            g1,
            total,
            cumulative,
            times,
        }
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    /// Number of time points.
    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// `G1(C_l) dt_l` and `(G1 + G2)(C_l) dt_l` of step `l`.
    pub fn increments(&self, l: usize) -> (f64, f64) {
        (self.g1[l], self.total[l])
    }

    /// Accumulated growth `P_k`.
    pub fn accumulated(&self, k: usize) -> f64 {
        self.cumulative[k]
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.len() {
            return Err(Error::Domain(format!(
                "time index {index} is out of range for {} time points",
                self.len()
            )));
        }
        Ok(())
    }

    /// `xi_1(k, x, i)^(1-n)` for `base = x1^(1-n)`.
    #[inline]
    fn shifted_power(&self, base: f64, k: usize, i: usize) -> f64 {
        base + (1.0 - self.exponent) * (self.cumulative[i] - self.cumulative[k])
    }

    /// Radius component `xi_1(k, x1, i)`.
    pub fn radius(&self, k: usize, x1: f64, i: usize) -> Result<f64> {
        self.check_index(k)?;
        self.check_index(i)?;
        let s = self.shifted_power(radius_power(x1, self.exponent), k, i);
        if !(s > 0.0) {
            return Err(if i < k {
                Error::PreImageOutside
            } else {
                Error::Step {
                    step: i,
                    radicand: s,
                }
            });
        }
        let r = radius_root(s, self.exponent);
        if i < k && r < self.x_min {
            return Err(Error::PreImageOutside);
        }
        Ok(r)
    }

    /// The discrete characteristic `xi(k, x, i)`: state at time index `i` of
    /// the particle that is in state `x` at time index `k`.
    ///
    /// Backward evaluation (`i < k`) returns [`Error::PreImageOutside`] when
    /// the state has no ancestor in the state space.
    pub fn map(&self, k: usize, x: DisperseState, i: usize) -> Result<DisperseState> {
        self.map_with_jacobian(k, x, i).map(|(y, _)| y)
    }

    /// Jacobian factor of `x -> xi(k, x, i)`.
    pub fn jacobian_factor(&self, k: usize, x: DisperseState, i: usize) -> Result<JacobianFactor> {
        self.map_with_jacobian(k, x, i).map(|(_, j)| j)
    }

    /// Evaluates the characteristic and its Jacobian factor in one sweep.
    pub fn map_with_jacobian(
        &self,
        k: usize,
        x: DisperseState,
        i: usize,
    ) -> Result<(DisperseState, JacobianFactor)> {
        self.check_index(k)?;
        self.check_index(i)?;
        if !(x.radius > 0.0) {
            return Err(Error::Domain(format!(
                "radius must be positive, got {}",
                x.radius
            )));
        }
        let n = self.exponent;
        let base = radius_power(x.radius, n);
        let mut y = x.composition;
        let mut exponent_sum = 0.0;
        if k <= i {
            for l in k..i {
                let s = self.shifted_power(base, k, l);
                if !(s > 0.0) {
                    return Err(Error::Step {
                        step: l,
                        radicand: s,
                    });
                }
                y = composition_update(y, self.g1[l], self.total[l], s);
                exponent_sum += 3.0 * self.total[l] / s;
            }
        } else {
            for l in (i..k).rev() {
                let s = self.shifted_power(base, k, l);
                if !(s > 0.0) {
                    return Err(Error::PreImageOutside);
                }
                y = y * (3.0 * self.total[l] / s).exp() - 3.0 * self.g1[l] / s;
                exponent_sum -= 3.0 * self.total[l] / s;
            }
            if !(-COMPOSITION_SLACK..=1.0 + COMPOSITION_SLACK).contains(&y) {
                return Err(Error::PreImageOutside);
            }
            y = y.clamp(0.0, 1.0);
        }
        let radius = self.radius(k, x.radius, i)?;
        let factor = JacobianFactor {
            psi: exponent_sum.exp(),
            radius_ratio: radius / x.radius,
            exponent: n,
        };
        Ok((DisperseState::new(radius, y), factor))
    }

    /// Forward trajectory `xi(0, x, k)` for every time index `k`.
    pub fn trajectory(&self, x: DisperseState) -> Result<Vec<DisperseState>> {
        let n = self.exponent;
        let base = radius_power(x.radius, n);
        let mut out = Vec::with_capacity(self.len());
        let mut y = x.composition;
        out.push(x);
        for l in 0..self.len() - 1 {
            let s = self.shifted_power(base, 0, l);
            y = composition_update(y, self.g1[l], self.total[l], s);
            let s_next = self.shifted_power(base, 0, l + 1);
            if !(s_next > 0.0) {
                return Err(Error::Step {
                    step: l + 1,
                    radicand: s_next,
                });
            }
            out.push(DisperseState::new(radius_root(s_next, n), y));
        }
        Ok(out)
    }
}

/// `xi(k, x, i)` for a path and growth law; see [`Characteristics::map`].
pub fn xi_multi_step(
    k: usize,
    x: DisperseState,
    i: usize,
    path: &ConcentrationPath,
    law: &GrowthLaw,
    x_min: f64,
) -> Result<DisperseState> {
    Characteristics::new(path, law, x_min).map(k, x, i)
}

/// Jacobian factor of `x -> xi(k, x, i)`; see [`Characteristics::jacobian_factor`].
pub fn jacobian_factor(
    k: usize,
    x: DisperseState,
    i: usize,
    path: &ConcentrationPath,
    law: &GrowthLaw,
    x_min: f64,
) -> Result<JacobianFactor> {
    Characteristics::new(path, law, x_min).jacobian_factor(k, x, i)
}

#[cfg(test)]
mod tests;
