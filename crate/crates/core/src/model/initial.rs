use super::DisperseState;
use crate::error::{Error, Result};

/// Axis-aligned rectangle `[a1, b1] x [a2, b2]` in state space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportBox {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
}

impl SupportBox {
    pub const fn new(lower: [f64; 2], upper: [f64; 2]) -> Self {
        Self { lower, upper }
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn area(&self) -> f64 {
        self.width(0) * self.width(1)
    }

    pub fn is_empty(&self) -> bool {
        !(self.width(0) > 0.0 && self.width(1) > 0.0)
    }

    pub fn contains(&self, x: DisperseState) -> bool {
        (self.lower[0]..=self.upper[0]).contains(&x.radius)
            && (self.lower[1]..=self.upper[1]).contains(&x.composition)
    }
}

/// Initial number density `q0`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDensity {
    /// `max{1 - (x1 - c1)^2/d1^2 - (x2 - c2)^2/d2^2, 0}^2`, restricted to
    /// compositions in `[0, 1]`.
    EllipticBump {
        center: [f64; 2],
        half_widths: [f64; 2],
    },
    /// Constant value on a box.
    Uniform { support: SupportBox, value: f64 },
    /// Monodisperse seed of `count` particles at `location`. It has no
    /// pointwise density and is represented by a single weighted node.
    Dirac { location: DisperseState, count: f64 },
}

impl InitialDensity {
    /// Pointwise density. Zero outside the support box and for Dirac seeds.
    pub fn density(&self, x: DisperseState) -> f64 {
        match self {
            InitialDensity::EllipticBump {
                center,
                half_widths,
            } => {
                if !(0.0..=1.0).contains(&x.composition) {
                    return 0.0;
                }
                let u = (x.radius - center[0]) / half_widths[0];
                let v = (x.composition - center[1]) / half_widths[1];
                let s = 1.0 - u * u - v * v;
                if s > 0.0 {
                    s * s
                } else {
                    0.0
                }
            }
            InitialDensity::Uniform { support, value } => {
                if support.contains(x) {
                    *value
                } else {
                    0.0
                }
            }
            InitialDensity::Dirac { .. } => 0.0,
        }
    }

    /// Value multiplying the quadrature weight at a node: the density for
    /// regular data and 1 for a Dirac seed, whose weight carries the count.
    pub fn node_value(&self, x: DisperseState) -> f64 {
        match self {
            InitialDensity::Dirac { .. } => 1.0,
            other => other.density(x),
        }
    }

    pub fn is_dirac(&self) -> bool {
        matches!(self, InitialDensity::Dirac { .. })
    }

    /// Rectangle containing the support. For a Dirac seed it degenerates to
    /// the seed location.
    pub fn support_box(&self) -> SupportBox {
        match self {
            InitialDensity::EllipticBump {
                center,
                half_widths,
            } => SupportBox::new(
                [
                    center[0] - half_widths[0],
                    (center[1] - half_widths[1]).max(0.0),
                ],
                [
                    center[0] + half_widths[0],
                    (center[1] + half_widths[1]).min(1.0),
                ],
            ),
            InitialDensity::Uniform { support, .. } => *support,
            InitialDensity::Dirac { location, .. } => SupportBox::new(
                [location.radius, location.composition],
                [location.radius, location.composition],
            ),
        }
    }

    /// Exact total particle number, when the datum admits a closed form.
    pub fn total_number(&self) -> Option<f64> {
        match self {
            InitialDensity::EllipticBump {
                center,
                half_widths,
            } => {
                let inside = center[1] - half_widths[1] >= 0.0 && center[1] + half_widths[1] <= 1.0;
                // integral of (1 - r^2)^2 over the unit disc is pi/3
                inside.then(|| std::f64::consts::PI * half_widths[0] * half_widths[1] / 3.0)
            }
            InitialDensity::Uniform { support, value } => Some(support.area() * value),
            InitialDensity::Dirac { count, .. } => Some(*count),
        }
    }

    pub fn validate(&self, x_min: f64) -> Result<()> {
        match self {
            InitialDensity::EllipticBump { half_widths, .. } => {
                if !(half_widths[0] > 0.0 && half_widths[1] > 0.0) {
                    return Err(Error::config(
                        "initial_datum.half_widths",
                        "half-widths must be positive",
                    ));
                }
            }
            InitialDensity::Uniform { value, .. } => {
                if !(value.is_finite() && *value >= 0.0) {
                    return Err(Error::config(
                        "initial_datum.value",
                        "density must be nonnegative",
                    ));
                }
            }
            InitialDensity::Dirac { location, count } => {
                if !(count.is_finite() && *count > 0.0) {
                    return Err(Error::config(
                        "initial_datum.count",
                        "particle count must be positive",
                    ));
                }
                return location
                    .validate(x_min)
                    .map_err(|e| Error::config("initial_datum.location", e.to_string()));
            }
        }
        let support = self.support_box();
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        if support.lower[0] < x_min || support.lower[1] < 0.0 || support.upper[1] > 1.0 {
            return Err(Error::config(
                "initial_datum",
                format!(
                    "support {support:?} is not contained in the state space (x_min = {x_min})"
                ),
            ));
        }
        Ok(())
    }
}
