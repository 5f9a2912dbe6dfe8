use super::{DisperseState, InitialDensity, SupportBox};
use crate::error::{Error, Result};

/// One-dimensional rule used along each axis of the tensor product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadratureRule {
    /// Composite midpoint rule (positive weights, second order).
    #[default]
    Midpoint,
    /// Single Gauss-Legendre panel per axis.
    GaussLegendre,
}

/// Nodes `x_l` and positive weights `w_l` over the support of `q0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub points: Vec<DisperseState>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Tensor-product rule with `resolution[axis]` nodes per axis.
    pub fn on_box(
        support: SupportBox,
        resolution: [usize; 2],
        rule: QuadratureRule,
    ) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        if resolution.contains(&0) {
            return Err(Error::config(
                "grids.quadrature",
                "resolution must be at least 1 per axis",
            ));
        }
        let axes: [(Vec<f64>, Vec<f64>); 2] = std::array::from_fn(|axis| {
            let (a, b) = (support.lower[axis], support.upper[axis]);
            match rule {
                QuadratureRule::Midpoint => midpoint(a, b, resolution[axis]),
                QuadratureRule::GaussLegendre => {
                    let (nodes, weights) = gauss_legendre(resolution[axis]);
                    let half = 0.5 * (b - a);
                    let mid = 0.5 * (a + b);
                    (
                        nodes.iter().map(|t| mid + half * t).collect(),
                        weights.iter().map(|w| half * w).collect(),
                    )
                }
            }
        });
        let n = resolution[0] * resolution[1];
        let mut points = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (x1, w1) in axes[0].0.iter().zip(&axes[0].1) {
            for (x2, w2) in axes[1].0.iter().zip(&axes[1].1) {
                points.push(DisperseState::new(*x1, *x2));
                weights.push(w1 * w2);
            }
        }
        Ok(Self { points, weights })
    }

    pub fn integrate(&self, mut f: impl FnMut(DisperseState) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| f(*x) * w)
            .sum()
    }
}

fn midpoint(a: f64, b: f64, m: usize) -> (Vec<f64>, Vec<f64>) {
    let h = (b - a) / m as f64;
    let nodes = (0..m).map(|i| a + (i as f64 + 0.5) * h).collect();
    (nodes, vec![h; m])
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut derivative = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_m(x), p0 = P_{m-1}(x)
            derivative = mf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / derivative;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if m == 1 {
            x = 0.0;
            derivative = 1.0;
        }
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * derivative * derivative);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// Tensor-product quadrature over the support of `q0`. A Dirac seed yields a
/// single node whose weight is the particle count.
pub fn build_quadrature(
    q0: &InitialDensity,
    resolution: [usize; 2],
    rule: QuadratureRule,
) -> Result<Quadrature> {
    if let InitialDensity::Dirac { location, count } = q0 {
        return Ok(Quadrature {
            points: vec![*location],
            weights: vec![*count],
        });
    }
    Quadrature::on_box(q0.support_box(), resolution, rule)
}
