use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::linalg;

/// A set that endpoints are expected to approach.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reference {
    /// Nearest of a finite set of points.
    Points { points: Vec<Vec<f64>> },
    /// Line through `origin` along `direction` (need not be unit length).
    Line { origin: Vec<f64>, direction: Vec<f64> },
    /// Closed segment from `a` to `b`.
    Segment { a: Vec<f64>, b: Vec<f64> },
    /// Circles in the plane of the first two coordinates; the nearest centre wins.
    Circles { centers: Vec<Vec<f64>>, radius: f64 },
}

impl Reference {
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            Reference::Points { points } => points
                .iter()
                .map(|p| linalg::dist(x, p))
                .fold(f64::INFINITY, f64::min),
            Reference::Line { origin, direction } => {
                let d = linalg::sub(x, origin);
                let u = linalg::scale(direction, 1.0 / linalg::norm(direction));
                let along = linalg::dot(&d, &u);
                let perp = linalg::dot(&d, &d) - along * along;
                perp.max(0.0).sqrt()
            }
            Reference::Segment { a, b } => {
                let ab = linalg::sub(b, a);
                let ax = linalg::sub(x, a);
                let len2 = linalg::dot(&ab, &ab);
                let s = if len2 > 0.0 { (linalg::dot(&ax, &ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
                let foot: Vec<f64> = a.iter().zip(&ab).map(|(ai, di)| ai + s * di).collect();
                linalg::dist(x, &foot)
            }
            Reference::Circles { centers, radius } => {
                let off_plane: f64 = x[2..].iter().map(|v| v * v).sum();
                let rho = centers
                    .iter()
                    .map(|c| ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min);
                ((rho - radius).powi(2) + off_plane).sqrt()
            }
        }
    }
}

/// Root mean square of `reference.distance` over `points`.
pub fn rms_distance(reference: &Reference, points: &[Vec<f64>]) -> f64 {
    let n = points.len() as f64;
    (points.iter().map(|p| reference.distance(p).powi(2)).sum::<f64>() / n).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetrics {
    pub seed: u64,
    pub endpoint: Vec<f64>,
    pub distances: Vec<f64>,
    /// `‖x_{i+1} − x_i‖` per step; empty without history.
    pub step_norms: Vec<f64>,
    pub max_step_norm: Option<f64>,
}

pub fn trajectory_metrics(traj: &Trajectory, references: &[Reference]) -> TrajectoryMetrics {
    let step_norms: Vec<f64> = traj.iterates.windows(2).map(|w| linalg::dist(&w[0], &w[1])).collect();
    let max_step_norm = step_norms.iter().copied().reduce(f64::max);
    TrajectoryMetrics {
        seed: traj.seed,
        endpoint: traj.endpoint.clone(),
        distances: references.iter().map(|r| r.distance(&traj.endpoint)).collect(),
        step_norms,
        max_step_norm,
    }
}

/// Per-coordinate mean and sample standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: usize,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Moments {
    pub fn of(points: &[Vec<f64>]) -> Self {
        let count = points.len();
        let d = points.first().map_or(0, Vec::len);
        let mut mean = vec![0.0; d];
        for p in points {
            for (m, v) in mean.iter_mut().zip(p) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= count.max(1) as f64;
        }
        let mut var = vec![0.0; d];
        for p in points {
            for ((s, v), m) in var.iter_mut().zip(p).zip(&mean) {
                *s += (v - m).powi(2);
            }
        }
        let std = var
            .into_iter()
            .map(|s| if count > 1 { (s / (count - 1) as f64).sqrt() } else { 0.0 })
            .collect();
        Self { count, mean, std }
    }
}

/// Endpoints grouped by nearest basin centre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinSummary {
    pub center: Vec<f64>,
    pub moments: Moments,
}

pub fn nearest_index(centers: &[Vec<f64>], x: &[f64]) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, c) in centers.iter().enumerate() {
        let d = linalg::dist(c, x);
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}

pub fn basin_summaries(centers: &[Vec<f64>], points: &[Vec<f64>]) -> Vec<BasinSummary> {
    let mut groups: Vec<Vec<Vec<f64>>> = vec![Vec::new(); centers.len()];
    for p in points {
        groups[nearest_index(centers, p)].push(p.clone());
    }
    centers
        .iter()
        .zip(groups)
        .map(|(c, g)| BasinSummary { center: c.clone(), moments: Moments::of(&g) })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub overall: Moments,
    pub basins: Vec<BasinSummary>,
    /// RMS distance of endpoints to each supplied reference.
    pub reference_rms: Vec<f64>,
}

pub fn batch_summary(points: &[Vec<f64>], centers: &[Vec<f64>], references: &[Reference]) -> BatchSummary {
    BatchSummary {
        overall: Moments::of(points),
        basins: if centers.is_empty() { Vec::new() } else { basin_summaries(centers, points) },
        reference_rms: references.iter().map(|r| rms_distance(r, points)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_to_axis_line() {
        let r = Reference::Line { origin: vec![0.0, 0.0], direction: vec![2.0, 0.0] };
        assert!((r.distance(&[3.0, 4.0]) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn distance_to_circle() {
        let r = Reference::Circles { centers: vec![vec![0.0, 0.0]], radius: 10.0 };
        assert!(r.distance(&[6.0, 8.0]).abs() < 1e-15);
        assert!((r.distance(&[0.0, 0.0]) - 10.0).abs() < 1e-15);
        let far = Reference::Circles { centers: vec![vec![0.0, 0.0], vec![30.0, 0.0]], radius: 10.0 };
        assert!((far.distance(&[31.0, 0.0]) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn distance_to_segment_and_points() {
        let s = Reference::Segment { a: vec![0.0, 0.0], b: vec![1.0, 0.0] };
        assert!((s.distance(&[2.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!((s.distance(&[0.5, -0.25]) - 0.25).abs() < 1e-15);
        let p = Reference::Points { points: vec![vec![0.0], vec![10.0]] };
        assert_eq!(p.distance(&[7.0]), 3.0);
    }

    #[test]
    fn summary_matches_direct_recomputation() {
        let pts: Vec<Vec<f64>> = (0..50).map(|i| vec![(i as f64 * 0.37).sin(), i as f64 * 0.1]).collect();
        let m = Moments::of(&pts);
        for k in 0..2 {
            let mean = pts.iter().map(|p| p[k]).sum::<f64>() / 50.0;
            let var = pts.iter().map(|p| (p[k] - mean).powi(2)).sum::<f64>() / 49.0;
            assert!((m.mean[k] - mean).abs() < 1e-14);
            assert!((m.std[k] - var.sqrt()).abs() < 1e-14);
        }
        let b = basin_summaries(&[vec![-1.0, 0.0], vec![1.0, 5.0]], &pts);
        assert_eq!(b[0].moments.count + b[1].moments.count, 50);
    }
}
