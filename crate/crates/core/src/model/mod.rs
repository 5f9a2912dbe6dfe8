//! Domain model of the two-component coprecipitation process.
//!
//! A particle is described by its [`DisperseState`]: the radius `x1` and the
//! volume fraction `x2` of the first component. The state space is
//! `[x_min, inf) x [0, 1]`.

mod initial;
mod kinetics;
mod path;
mod process;
mod quadrature;

pub use initial::{InitialDensity, SupportBox};
pub use kinetics::{growth_field, GrowthLaw, RateLaw, Rates};
pub use path::{ConcentrationPath, TimeGrid};
pub use process::{component_volume, FeedMass, ProcessConfig, ResolvedFeed};
pub use quadrature::{build_quadrature, gauss_legendre, Quadrature, QuadratureRule};

use crate::error::{Error, Result};

/// Volume of a sphere of the given radius.
#[inline]
pub fn sphere_volume(radius: f64) -> f64 {
    4.0 / 3.0 * std::f64::consts::PI * radius * radius * radius
}

/// Radius and composition of a single particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisperseState {
    /// Particle radius `x1`.
    pub radius: f64,
    /// Volume fraction `x2` of component 1.
    pub composition: f64,
}

impl DisperseState {
    pub const fn new(radius: f64, composition: f64) -> Self {
        Self {
            radius,
            composition,
        }
    }

    pub fn is_admissible(&self, x_min: f64) -> bool {
        self.radius >= x_min && (0.0..=1.0).contains(&self.composition)
    }

    pub fn validate(&self, x_min: f64) -> Result<()> {
        if !self.radius.is_finite() || !self.composition.is_finite() {
            return Err(Error::Domain(format!("non-finite state {self:?}")));
        }
        if self.radius < x_min {
            return Err(Error::Domain(format!(
                "radius {} is below the minimal radius {x_min}",
                self.radius
            )));
        }
        if !(0.0..=1.0).contains(&self.composition) {
            return Err(Error::Domain(format!(
                "composition {} is outside [0, 1]",
                self.composition
            )));
        }
        Ok(())
    }
}

impl From<[f64; 2]> for DisperseState {
    fn from(x: [f64; 2]) -> Self {
        Self::new(x[0], x[1])
    }
}

/// Everything needed to pose the coupled problem: process parameters,
/// kinetics and the initial population.
#[derive(Debug, Clone)]
pub struct Problem {
    pub process: ProcessConfig,
    pub law: GrowthLaw,
    pub initial: InitialDensity,
}

impl Problem {
    pub fn new(process: ProcessConfig, law: GrowthLaw, initial: InitialDensity) -> Result<Self> {
        let problem = Self {
            process,
            law,
            initial,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        self.process.validate()?;
        self.initial.validate(self.process.x_min)
    }

    /// Benchmark setup used throughout the test suite: `G1(c) = c`,
    /// `G2(c) = ratio * c`, `n = 0`, unit reactor volume and densities,
    /// `c1(0) = c2(0) = 2`, the elliptic bump around `(0.1, 0.75)` with
    /// half-widths `(0.05, 0.25)` and horizon `T = 0.01`.
    pub fn benchmark(ratio: f64) -> Result<Self> {
        let process = ProcessConfig {
            reactor_volume: 1.0,
            densities: [1.0, 1.0],
            initial_concentrations: [2.0, 2.0],
            feed: [FeedMass::Calibrated, FeedMass::Calibrated],
            x_min: 0.05,
            horizon: 0.01,
            units: "dimensionless".into(),
        };
        let law = GrowthLaw::new(RateLaw::linear(1.0), RateLaw::linear(ratio), 0.0)?;
        let initial = InitialDensity::EllipticBump {
            center: [0.1, 0.75],
            half_widths: [0.05, 0.25],
        };
        Self::new(process, law, initial)
    }
}
