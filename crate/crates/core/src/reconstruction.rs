//! Post-processing of a solved concentration path: the number density via the
//! backward and forward solution formulas, moments, and the radial
//! composition profile of single particles.

use rayon::prelude::*;

use crate::characteristics::Characteristics;
use crate::error::{Error, Result};
use crate::model::{
    component_volume, ConcentrationPath, DisperseState, GrowthLaw, InitialDensity, Quadrature,
    QuadratureRule, SupportBox,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvaluationMode {
    /// Backward characteristics from the nodes of a rectangular grid.
    Backward,
    /// Quadrature nodes of the initial datum pushed forward.
    Forward,
}

/// Number density at one time index.
///
/// `weights` turn the values into a quadrature: `sum q_j w_j` approximates the
/// particle number. Forward snapshots carry the mapped cell areas.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdSnapshot {
    pub time_index: usize,
    pub time: f64,
    pub mode: EvaluationMode,
    pub states: Vec<DisperseState>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PsdSnapshot {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentTable {
    pub number: f64,
    pub mean_radius: f64,
    pub mean_composition: f64,
    /// `sum V_i(x) q w` for both components.
    pub component_volumes: [f64; 2],
}

/// Composition deposited at each radius of a particle grown from a seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pub seed: DisperseState,
    pub final_index: usize,
    pub times: Vec<f64>,
    pub radii: Vec<f64>,
    pub fractions: Vec<f64>,
    /// Time points skipped because the total growth rate vanished there.
    pub undefined: usize,
}

/// Density evaluation for one concentration path.
#[derive(Debug, Clone)]
pub struct Reconstruction<'a> {
    characteristics: Characteristics,
    initial: &'a InitialDensity,
}

impl<'a> Reconstruction<'a> {
    pub fn new(
        path: &ConcentrationPath,
        law: &GrowthLaw,
        initial: &'a InitialDensity,
        x_min: f64,
    ) -> Self {
        Self {
            characteristics: Characteristics::new(path, law, x_min),
            initial,
        }
    }

    pub fn characteristics(&self) -> &Characteristics {
        &self.characteristics
    }

    fn time(&self, k: usize) -> Result<f64> {
        self.characteristics
            .times()
            .get(k)
            .copied()
            .ok_or_else(|| Error::Domain(format!("time index {k} is out of range")))
    }

    /// `q(t_k, x)` from the backward characteristic; zero when `x` has no
    /// ancestor in the state space or the ancestor lies outside `supp q0`.
    pub fn q_backward(&self, k: usize, x: DisperseState) -> f64 {
        if !x.is_admissible(self.characteristics.x_min()) {
            return 0.0;
        }
        match self.characteristics.map_with_jacobian(k, x, 0) {
            Ok((origin, jacobian)) => {
                let q0 = self.initial.density(origin);
                if q0 == 0.0 {
                    0.0
                } else {
                    q0 * jacobian.determinant()
                }
            }
            Err(_) => 0.0,
        }
    }

    /// Mapped state `xi(0, x, k)` and the pushed-forward density there.
    pub fn q_forward(&self, k: usize, x: DisperseState) -> Result<(DisperseState, f64)> {
        let (y, jacobian) = self.characteristics.map_with_jacobian(0, x, k)?;
        Ok((y, self.initial.density(x) * jacobian.density_factor()))
    }

    /// Backward evaluation on the midpoints of a `resolution` grid over
    /// `window`.
    pub fn backward_snapshot(
        &self,
        k: usize,
        window: SupportBox,
        resolution: [usize; 2],
    ) -> Result<PsdSnapshot> {
        if self.initial.is_dirac() {
            return Err(Error::Domain(
                "a Dirac seed has no pointwise density to reconstruct".into(),
            ));
        }
        let time = self.time(k)?;
        let grid = Quadrature::on_box(window, resolution, QuadratureRule::Midpoint)?;
        let values = grid
            .points
            .par_iter()
            .map(|x| self.q_backward(k, *x))
            .collect();
        Ok(PsdSnapshot {
            time_index: k,
            time,
            mode: EvaluationMode::Backward,
            states: grid.points,
            values,
            weights: grid.weights,
        })
    }

    /// Forward evaluation of the quadrature nodes of the initial datum.
    ///
    /// A Dirac seed yields a single node with value 1 and weight equal to the
    /// seed count.
    pub fn forward_snapshot(&self, k: usize, quadrature: &Quadrature) -> Result<PsdSnapshot> {
        let time = self.time(k)?;
        let mapped: Vec<(DisperseState, f64, f64)> = quadrature
            .points
            .par_iter()
            .zip(&quadrature.weights)
            .map(|(x, w)| {
                let (y, jacobian) = self.characteristics.map_with_jacobian(0, *x, k)?;
                Ok((
                    y,
                    self.initial.node_value(*x) * jacobian.density_factor(),
                    w * jacobian.determinant(),
                ))
            })
            .collect::<Result<_>>()?;
        let mut snapshot = PsdSnapshot {
            time_index: k,
            time,
            mode: EvaluationMode::Forward,
            states: Vec::with_capacity(mapped.len()),
            values: Vec::with_capacity(mapped.len()),
            weights: Vec::with_capacity(mapped.len()),
        };
        for (y, q, w) in mapped {
            snapshot.states.push(y);
            snapshot.values.push(q);
            snapshot.weights.push(w);
        }
        Ok(snapshot)
    }

    /// Bounding box of the forward image of `supp q0` at time index `k`.
    ///
    /// The radius map is monotone and independent of the composition, and
    /// the composition map is increasing in the initial composition, so the
    /// box is spanned by the images of the lower and upper composition edges.
    pub fn forward_window(&self, k: usize) -> Result<SupportBox> {
        let support = self.initial.support_box();
        let samples = 256;
        let mut lower = [f64::INFINITY; 2];
        let mut upper = [f64::NEG_INFINITY; 2];
        for j in 0..=samples {
            let x1 = support.lower[0] + support.width(0) * j as f64 / samples as f64;
            for x2 in [support.lower[1], support.upper[1]] {
                let y = self.characteristics.map(0, DisperseState::new(x1, x2), k)?;
                lower[0] = lower[0].min(y.radius);
                lower[1] = lower[1].min(y.composition);
                upper[0] = upper[0].max(y.radius);
                upper[1] = upper[1].max(y.composition);
            }
        }
        // the composition edge images are curves; leave a little room
        let pad = 0.01 * (upper[1] - lower[1]).max(1e-6);
        lower[1] = (lower[1] - pad).max(0.0);
        upper[1] = (upper[1] + pad).min(1.0);
        Ok(SupportBox::new(lower, upper))
    }
}

/// `q(t_k, x)` by the backward formula; see [`Reconstruction::q_backward`].
pub fn evaluate_q_backward(
    k: usize,
    x: DisperseState,
    path: &ConcentrationPath,
    law: &GrowthLaw,
    initial: &InitialDensity,
    x_min: f64,
) -> f64 {
    Reconstruction::new(path, law, initial, x_min).q_backward(k, x)
}

/// Forward image of `x` and density there; see [`Reconstruction::q_forward`].
pub fn evaluate_q_forward(
    k: usize,
    x: DisperseState,
    path: &ConcentrationPath,
    law: &GrowthLaw,
    initial: &InitialDensity,
    x_min: f64,
) -> Result<(DisperseState, f64)> {
    Reconstruction::new(path, law, initial, x_min).q_forward(k, x)
}

/// Number, mean radius, mean composition and component volumes of a
/// snapshot.
pub fn moments(snapshot: &PsdSnapshot) -> Result<MomentTable> {
    if snapshot.is_empty() {
        return Err(Error::EmptySnapshot);
    }
    let mut number = 0.0;
    let mut radius = 0.0;
    let mut composition = 0.0;
    let mut volumes = [0.0; 2];
    for ((x, q), w) in snapshot
        .states
        .iter()
        .zip(&snapshot.values)
        .zip(&snapshot.weights)
    {
        let mass = q * w;
        if mass == 0.0 {
            continue;
        }
        number += mass;
        radius += x.radius * mass;
        composition += x.composition * mass;
        for (i, v) in volumes.iter_mut().enumerate() {
            *v += component_volume(i, *x)? * mass;
        }
    }
    let mean = |s: f64| if number == 0.0 { 0.0 } else { s / number };
    Ok(MomentTable {
        number,
        mean_radius: mean(radius),
        mean_composition: mean(composition),
        component_volumes: volumes,
    })
}

/// Composition `G1 / (G1 + G2)` deposited at the radius `xi_1(0, seed, k)`,
/// for every time index of the path.
pub fn radial_composition(
    seed: DisperseState,
    path: &ConcentrationPath,
    law: &GrowthLaw,
) -> Result<RadialProfile> {
    if !(seed.radius > 0.0) {
        return Err(Error::Domain(format!(
            "seed radius must be positive, got {}",
            seed.radius
        )));
    }
    let characteristics = Characteristics::new(path, law, 0.0);
    let trajectory = characteristics.trajectory(seed)?;
    let mut profile = RadialProfile {
        seed,
        final_index: path.len() - 1,
        times: Vec::with_capacity(path.len()),
        radii: Vec::with_capacity(path.len()),
        fractions: Vec::with_capacity(path.len()),
        undefined: 0,
    };
    for ((t, c), x) in path.times().iter().zip(path.values()).zip(&trajectory) {
        let rates = law.rates(*c);
        let total = rates.total();
        if !(total > 0.0) {
            profile.undefined += 1;
            continue;
        }
        profile.times.push(*t);
        profile.radii.push(x.radius);
        profile.fractions.push((rates.g1 / total).clamp(0.0, 1.0));
    }
    if profile.undefined > 0 {
        log::warn!(
            "radial profile: {} time points with vanishing growth rate omitted",
            profile.undefined
        );
    }
    Ok(profile)
}
