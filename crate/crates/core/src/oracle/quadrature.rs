use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_NODES_PER_AXIS: usize = 64;
/// Upper bound on the total number of grid nodes.
pub const MAX_QUADRATURE_NODES: usize = 1 << 22;

/// Tensor-product trapezoidal grid in one or two dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub nodes: Vec<usize>,
}

impl QuadratureGrid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, nodes: Vec<usize>) -> Result<Self> {
        let g = Self { lower, upper, nodes };
        g.validate()?;
        Ok(g)
    }

    pub fn uniform(dim: usize, lo: f64, hi: f64, nodes: usize) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim], vec![nodes; dim])
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    fn validate(&self) -> Result<()> {
        let d = self.nodes.len();
        if d == 0 || self.lower.len() != d || self.upper.len() != d {
            return Err(Error::InvalidParameter("grid bounds and node counts must have equal length".into()));
        }
        if d > 2 {
            return Err(Error::CostCap(format!("quadrature limited to d ≤ 2, got d = {d}")));
        }
        for k in 0..d {
            if !(self.lower[k].is_finite() && self.upper[k].is_finite() && self.lower[k] < self.upper[k]) {
                return Err(Error::InvalidParameter(format!("bad bounds on axis {k}")));
            }
            if self.nodes[k] < MIN_NODES_PER_AXIS {
                return Err(Error::InvalidParameter(format!(
                    "axis {k} has {} nodes, need at least {MIN_NODES_PER_AXIS}",
                    self.nodes[k]
                )));
            }
        }
        let total = self.nodes.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n));
        match total {
            Some(t) if t <= MAX_QUADRATURE_NODES => Ok(()),
            _ => Err(Error::CostCap(format!("more than {MAX_QUADRATURE_NODES} quadrature nodes"))),
        }
    }

    /// Nodes and trapezoid weights of one axis.
    fn axis(&self, k: usize, n: usize) -> Vec<(f64, f64)> {
        let (lo, hi) = (self.lower[k], self.upper[k]);
        let h = (hi - lo) / (n - 1) as f64;
        (0..n)
            .map(|i| {
                let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
                (lo + i as f64 * h, w)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureEstimate {
    pub score: Vec<f64>,
    /// Largest coordinate change against the same rule at half resolution.
    pub error: f64,
}

/// `∇ log (p₀ * g_{σ²})(x)` by direct numerical convolution.
///
/// Uses `∇ log p_σ(x) = (E[y | x] − x) / σ²` with the posterior
/// `p₀(y) g_{σ²}(x − y)` integrated on the grid in the log domain.
pub fn quadrature_score<F>(log_density: F, sigma: f64, x: &[f64], grid: &QuadratureGrid) -> Result<QuadratureEstimate>
where
    F: Fn(&[f64]) -> f64,
{
    grid.validate()?;
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} must be positive")));
    }
    if x.len() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), got: x.len() });
    }
    let fine = integrate(&log_density, sigma, x, grid, &grid.nodes)?;
    let half: Vec<usize> = grid.nodes.iter().map(|n| n / 2).collect();
    let coarse = integrate(&log_density, sigma, x, grid, &half)?;
    let error = fine.iter().zip(&coarse).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(QuadratureEstimate { score: fine, error })
}

fn integrate<F>(log_density: &F, sigma: f64, x: &[f64], grid: &QuadratureGrid, nodes: &[usize]) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let d = grid.dim();
    let axes: Vec<Vec<(f64, f64)>> = (0..d).map(|k| grid.axis(k, nodes[k])).collect();
    let var2 = 2.0 * sigma * sigma;
    let mut points: Vec<(Vec<f64>, f64)> = Vec::with_capacity(nodes.iter().product());
    let mut push = |y: Vec<f64>, w: f64| {
        let sq: f64 = y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        let lw = log_density(&y) - sq / var2 + w.ln();
        points.push((y, lw));
    };
    if d == 1 {
        for &(y, w) in &axes[0] {
            push(vec![y], w);
        }
    } else {
        for &(y0, w0) in &axes[0] {
            for &(y1, w1) in &axes[1] {
                push(vec![y0, y1], w0 * w1);
            }
        }
    }
    let max = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::NonFinite("quadrature weights"));
    }
    let mut den = 0.0;
    let mut num = vec![0.0; d];
    for (y, lw) in &points {
        let w = (lw - max).exp();
        den += w;
        for k in 0..d {
            num[k] += w * (y[k] - x[k]);
        }
    }
    Ok(num.into_iter().map(|v| v / den / (sigma * sigma)).collect())
}
