use super::DisperseState;
use crate::error::{Error, Result};

/// Concentration-to-rate map of a single species.
///
/// Negative concentrations are clamped to zero before evaluation, so an
/// explicit-Euler undershoot cannot flip the sign of a growth rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateLaw {
    /// `G(c) = coefficient * c`
    Linear { coefficient: f64 },
    /// `G(c) = coefficient * c^exponent`
    Power { coefficient: f64, exponent: f64 },
}

impl RateLaw {
    pub const ZERO: RateLaw = RateLaw::Linear { coefficient: 0.0 };

    pub const fn linear(coefficient: f64) -> Self {
        RateLaw::Linear { coefficient }
    }

    pub const fn power(coefficient: f64, exponent: f64) -> Self {
        RateLaw::Power {
            coefficient,
            exponent,
        }
    }

    #[inline]
    pub fn eval(&self, concentration: f64) -> f64 {
        let c = concentration.max(0.0);
        match *self {
            RateLaw::Linear { coefficient } => coefficient * c,
            RateLaw::Power {
                coefficient,
                exponent,
            } => coefficient * c.powf(exponent),
        }
    }

    pub fn coefficient(&self) -> f64 {
        match *self {
            RateLaw::Linear { coefficient } | RateLaw::Power { coefficient, .. } => coefficient,
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !self.coefficient().is_finite() {
            return Err(Error::config(
                format!("kinetics.{name}.coefficient"),
                "must be finite",
            ));
        }
        if let RateLaw::Power { exponent, .. } = *self {
            if !(exponent.is_finite() && exponent > 0.0) {
                return Err(Error::config(
                    format!("kinetics.{name}.exponent"),
                    "power-law exponent must be positive and finite",
                ));
            }
        }
        Ok(())
    }
}

/// Instantaneous growth rates `G1(c1)` and `G2(c2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub g1: f64,
    pub g2: f64,
}

impl Rates {
    #[inline]
    pub fn total(&self) -> f64 {
        self.g1 + self.g2
    }
}

/// Pair of species growth rates together with the size exponent `n`.
///
/// The radius grows as `(G1 + G2) x1^n`; `n = 1` is excluded because the
/// closed-form characteristics divide by `1 - n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthLaw {
    rate1: RateLaw,
    rate2: RateLaw,
    exponent: f64,
    nonnegative: bool,
}

impl GrowthLaw {
    /// Builds a law with nonnegative rates. Negative coefficients are
    /// rejected since the composition bound of the discrete update relies on
    /// them.
    pub fn new(rate1: RateLaw, rate2: RateLaw, exponent: f64) -> Result<Self> {
        let law = Self::allowing_negative_rates(rate1, rate2, exponent)?;
        for (name, rate) in [("rate1", rate1), ("rate2", rate2)] {
            if rate.coefficient() < 0.0 {
                return Err(Error::config(
                    format!("kinetics.{name}.coefficient"),
                    "negative growth rates require allow_negative_rates",
                ));
            }
        }
        Ok(law)
    }

    /// Like [`GrowthLaw::new`] but accepts negative coefficients. The
    /// composition of the discrete characteristics is then no longer
    /// guaranteed to stay in `[0, 1]`.
    pub fn allowing_negative_rates(rate1: RateLaw, rate2: RateLaw, exponent: f64) -> Result<Self> {
        rate1.validate("rate1")?;
        rate2.validate("rate2")?;
        if !exponent.is_finite() || exponent == 1.0 {
            return Err(Error::config(
                "kinetics.exponent",
                "size exponent must be finite and different from 1",
            ));
        }
        Ok(Self {
            rate1,
            rate2,
            exponent,
            nonnegative: rate1.coefficient() >= 0.0 && rate2.coefficient() >= 0.0,
        })
    }

    pub fn rate1(&self) -> RateLaw {
        self.rate1
    }

    pub fn rate2(&self) -> RateLaw {
        self.rate2
    }

    /// Size exponent `n`.
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Whether both rates are nonnegative for every concentration.
    pub fn has_nonnegative_rates(&self) -> bool {
        self.nonnegative
    }

    #[inline]
    pub fn rates(&self, concentration: [f64; 2]) -> Rates {
        Rates {
            g1: self.rate1.eval(concentration[0]),
            g2: self.rate2.eval(concentration[1]),
        }
    }

    /// Velocity `(dx1/dt, dx2/dt)` of the growth field at `x`.
    pub fn growth_field(&self, concentration: [f64; 2], x: DisperseState) -> Result<[f64; 2]> {
        growth_field(self, concentration, x)
    }
}

/// Growth vector field of the coprecipitation kinetics:
/// `((G1 + G2) x1^n, 3 (G1 - (G1 + G2) x2) x1^(n-1))`.
pub fn growth_field(
    law: &GrowthLaw,
    concentration: [f64; 2],
    x: DisperseState,
) -> Result<[f64; 2]> {
    if !(x.radius > 0.0) {
        return Err(Error::Domain(format!(
            "growth field needs a positive radius, got {}",
            x.radius
        )));
    }
    let rates = law.rates(concentration);
    if !rates.g1.is_finite() || !rates.g2.is_finite() {
        return Err(Error::Evaluation(format!(
            "non-finite growth rates {rates:?} at concentration {concentration:?}"
        )));
    }
    let total = rates.total();
    let n = law.exponent();
    let radial = total * x.radius.powf(n);
    let compositional = 3.0 * (rates.g1 - total * x.composition) * x.radius.powf(n - 1.0);
    Ok([radial, compositional])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn symmetric_rates_at_half_composition() {
        let law = GrowthLaw::new(RateLaw::linear(1.0), RateLaw::linear(1.0), 0.0).unwrap();
        let v = law
            .growth_field([1.0, 1.0], DisperseState::new(2.0, 0.5))
            .unwrap();
        assert_eq!(v, [2.0, 0.0]);
    }

    #[test]
    fn pure_component_stays_pure() {
        let law = GrowthLaw::new(RateLaw::linear(1.5), RateLaw::ZERO, -1.0).unwrap();
        let r: f64 = 0.3;
        let v = law
            .growth_field([0.7, 3.0], DisperseState::new(r, 1.0))
            .unwrap();
        assert_relative_eq!(v[0], 1.05 * r.powf(-1.0), max_relative = 1e-15);
        assert_eq!(v[1], 0.0);
    }

    #[test]
    fn benchmark_point() {
        let law = GrowthLaw::new(RateLaw::linear(1.0), RateLaw::linear(5.0), 0.0).unwrap();
        let v = law
            .growth_field([2.0, 2.0], DisperseState::new(0.1, 0.75))
            .unwrap();
        assert_relative_eq!(v[0], 12.0, max_relative = 1e-14);
        assert_relative_eq!(v[1], -210.0, max_relative = 1e-14);
    }

    #[test]
    fn benchmark_point_matches_trajectory_derivative() {
        // Central difference of the exact n = 0 trajectory with frozen rates:
        // x1(t) = x1 + G t, x2 solves a linear ODE integrated by RK4 at fine steps.
        let (g1, g) = (2.0, 12.0);
        let x0 = [0.1, 0.75];
        let rhs = |t: f64, x2: f64| 3.0 * (g1 - g * x2) / (x0[0] + g * t);
        let integrate = |t_end: f64| {
            let steps = 2000;
            let h = t_end / steps as f64;
            let mut x2 = x0[1];
            for i in 0..steps {
                let t = i as f64 * h;
                let k1 = rhs(t, x2);
                let k2 = rhs(t + h / 2.0, x2 + h / 2.0 * k1);
                let k3 = rhs(t + h / 2.0, x2 + h / 2.0 * k2);
                let k4 = rhs(t + h, x2 + h * k3);
                x2 += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            x2
        };
        let h = 1e-6;
        let slope = (integrate(h) - integrate(-h)) / (2.0 * h);
        assert_relative_eq!(slope, -210.0, max_relative = 1e-6);
    }

    #[test]
    fn rejects_nonpositive_radius() {
        let law = GrowthLaw::new(RateLaw::linear(1.0), RateLaw::linear(1.0), 0.0).unwrap();
        assert!(matches!(
            law.growth_field([1.0, 1.0], DisperseState::new(0.0, 0.5)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn rejects_non_finite_rates() {
        let law = GrowthLaw::new(RateLaw::power(1.0, 2.0), RateLaw::ZERO, 0.0).unwrap();
        assert!(matches!(
            law.growth_field([f64::INFINITY, 1.0], DisperseState::new(0.1, 0.5)),
            Err(Error::Evaluation(_))
        ));
    }

    #[test]
    fn rejects_unit_exponent_and_negative_rates() {
        assert!(GrowthLaw::new(RateLaw::linear(1.0), RateLaw::linear(1.0), 1.0).is_err());
        assert!(GrowthLaw::new(RateLaw::linear(-1.0), RateLaw::linear(1.0), 0.0).is_err());
        let law =
            GrowthLaw::allowing_negative_rates(RateLaw::linear(-1.0), RateLaw::linear(1.0), 0.0)
                .unwrap();
        assert!(!law.has_nonnegative_rates());
    }

    #[test]
    fn negative_concentrations_are_clamped() {
        assert_eq!(RateLaw::linear(3.0).eval(-1.0), 0.0);
        assert_eq!(RateLaw::power(3.0, 0.5).eval(-1.0), 0.0);
        assert_eq!(RateLaw::power(3.0, 2.0).eval(2.0), 12.0);
    }

    proptest! {
        #[test]
        fn composition_velocity_points_inward(
            k1 in 0.0f64..50.0, k2 in 0.0f64..50.0,
            c1 in 0.0f64..10.0, c2 in 0.0f64..10.0,
            r in 0.01f64..10.0, n in -2.0f64..0.9,
        ) {
            let law = GrowthLaw::new(RateLaw::linear(k1), RateLaw::linear(k2), n).unwrap();
            let at_zero = law.growth_field([c1, c2], DisperseState::new(r, 0.0)).unwrap();
            let at_one = law.growth_field([c1, c2], DisperseState::new(r, 1.0)).unwrap();
            prop_assert!(at_zero[1] >= 0.0);
            prop_assert!(at_one[1] <= 0.0);
            prop_assert!(at_zero[0] >= 0.0);
        }
    }
}
