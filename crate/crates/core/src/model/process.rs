use super::{sphere_volume, DisperseState};
use crate::error::{Error, Result};

/// Total mass of a component fed into the reactor, `m_i(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeedMass {
    /// Constant in time and chosen such that the initial solute concentration
    /// equals the configured one for the discretisation at hand:
    /// `m_i = V c_i(0) + rho_i * sum_l V_i(x_l) q0(x_l) w_l`.
    Calibrated,
    /// Constant mass.
    Constant(f64),
    /// Semi-batch feed `m_i(t) = initial + rate * t`.
    Ramp { initial: f64, rate: f64 },
}

/// Feed schedule after calibration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolvedFeed {
    Constant(f64),
    Ramp { initial: f64, rate: f64 },
}

impl ResolvedFeed {
    #[inline]
    pub fn mass(&self, t: f64) -> f64 {
        match *self {
            ResolvedFeed::Constant(m) => m,
            ResolvedFeed::Ramp { initial, rate } => initial + rate * t,
        }
    }

    pub fn is_constant(&self) -> bool {
        match *self {
            ResolvedFeed::Constant(_) => true,
            ResolvedFeed::Ramp { rate, .. } => rate == 0.0,
        }
    }
}

/// Reactor and material parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessConfig {
    /// Reactor volume.
    pub reactor_volume: f64,
    /// Densities of the two components inside the particles.
    pub densities: [f64; 2],
    /// Solute concentrations at `t = 0`; used when a feed is calibrated.
    pub initial_concentrations: [f64; 2],
    pub feed: [FeedMass; 2],
    /// Minimal particle radius.
    pub x_min: f64,
    /// Final process time.
    pub horizon: f64,
    /// Free-text unit annotation; the solver itself is unit-agnostic.
    pub units: String,
}

impl ProcessConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |value: f64, path: &str| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(Error::config(
                    path,
                    format!("must be positive, got {value}"),
                ))
            }
        };
        positive(self.reactor_volume, "process.reactor_volume")?;
        positive(self.densities[0], "process.densities[0]")?;
        positive(self.densities[1], "process.densities[1]")?;
        positive(self.x_min, "process.x_min")?;
        positive(self.horizon, "process.horizon")?;
        for (i, c) in self.initial_concentrations.iter().enumerate() {
            if !c.is_finite() || *c < 0.0 {
                return Err(Error::config(
                    format!("process.initial_concentrations[{i}]"),
                    format!("must be nonnegative, got {c}"),
                ));
            }
        }
        Ok(())
    }

    /// Volume of component `component` (0 or 1) in a particle of state `x`.
    pub fn component_volume(&self, component: usize, x: DisperseState) -> Result<f64> {
        component_volume(component, x)
    }

    /// Turns the feed description into a time schedule. `particle_volumes`
    /// holds `sum_l V_i(x_l) q0(x_l) w_l` of the discretisation in use.
    pub fn resolve_feed(&self, particle_volumes: [f64; 2]) -> [ResolvedFeed; 2] {
        std::array::from_fn(|i| match self.feed[i] {
            FeedMass::Calibrated => ResolvedFeed::Constant(
                self.reactor_volume * self.initial_concentrations[i]
                    + self.densities[i] * particle_volumes[i],
            ),
            FeedMass::Constant(m) => ResolvedFeed::Constant(m),
            FeedMass::Ramp { initial, rate } => ResolvedFeed::Ramp { initial, rate },
        })
    }

    /// Solute concentrations `m_i(t)/V - rho_i/V * particle_volumes[i]`.
    #[inline]
    pub fn concentrations(
        &self,
        feed: &[ResolvedFeed; 2],
        t: f64,
        particle_volumes: [f64; 2],
    ) -> [f64; 2] {
        std::array::from_fn(|i| {
            feed[i].mass(t) / self.reactor_volume
                - self.densities[i] / self.reactor_volume * particle_volumes[i]
        })
    }
}

/// Both component volumes of a particle. The composition is clamped to
/// `[0, 1]` and negative radii give zero volume, so the maps vanish outside
/// the state space.
#[inline]
pub(crate) fn component_volumes(x: DisperseState) -> [f64; 2] {
    if x.radius <= 0.0 {
        return [0.0, 0.0];
    }
    let total = sphere_volume(x.radius);
    let f = x.composition.clamp(0.0, 1.0);
    [total * f, total * (1.0 - f)]
}

/// `V_1(x) = 4/3 pi x1^3 x2` and `V_2(x) = 4/3 pi x1^3 (1 - x2)`, with the
/// component selected by a zero-based index.
pub fn component_volume(component: usize, x: DisperseState) -> Result<f64> {
    match component {
        0 | 1 => Ok(component_volumes(x)[component]),
        _ => Err(Error::Domain(format!(
            "component index {component} is out of range (expected 0 or 1)"
        ))),
    }
}
