use super::{radius_power, radius_root};
use crate::model::DisperseState;

/// Current time slice of the characteristic states `xi(0, x_l, k)` of all
/// quadrature nodes.
///
/// Radii are kept as `x_l1^(1-n)` plus the accumulated growth shared by all
/// nodes, so repeated stepping never compounds rounding in the radius.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicField {
    exponent: f64,
    pub(crate) base: Vec<f64>,
    pub(crate) composition: Vec<f64>,
    pub(crate) accumulated: f64,
}

impl CharacteristicField {
    /// Field at `t = 0`: every node sits at its quadrature point.
    pub fn new(points: &[DisperseState], exponent: f64) -> Self {
        Self {
            exponent,
            base: points
                .iter()
                .map(|x| radius_power(x.radius, exponent))
                .collect(),
            composition: points.iter().map(|x| x.composition).collect(),
            accumulated: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Accumulated `sum (G1 + G2) dt` since `t = 0`.
    pub fn accumulated(&self) -> f64 {
        self.accumulated
    }

    /// `xi_1^(1-n)` of node `l`.
    #[inline]
    pub(crate) fn shifted_power(&self, l: usize) -> f64 {
        self.base[l] + (1.0 - self.exponent) * self.accumulated
    }

    pub fn state(&self, l: usize) -> DisperseState {
        DisperseState::new(
            radius_root(self.shifted_power(l), self.exponent),
            self.composition[l],
        )
    }

    pub fn states(&self) -> Vec<DisperseState> {
        (0..self.len()).map(|l| self.state(l)).collect()
    }
}
