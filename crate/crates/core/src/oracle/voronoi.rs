use crate::models::TIE_TOLERANCE;

/// Atoms tied for nearest to `x` and the limit weights `z_i`.
///
/// A direct scan: an interior point gets weight one on its unique nearest
/// atom, a boundary point shares the weight among the tied atoms in
/// proportion to `c_i`, every other atom gets zero.
pub fn voronoi_brute(weights: &[f64], atoms: &[Vec<f64>], x: &[f64]) -> (Vec<usize>, Vec<f64>) {
    assert!(!atoms.is_empty(), "need at least one atom");
    let mut dists = Vec::with_capacity(atoms.len());
    for a in atoms {
        let mut sq = 0.0;
        for (ai, xi) in a.iter().zip(x) {
            sq += (ai - xi) * (ai - xi);
        }
        dists.push(sq.sqrt());
    }
    let mut min = f64::INFINITY;
    for &d in &dists {
        if d < min {
            min = d;
        }
    }
    let norm_x = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = TIE_TOLERANCE * (1.0 + norm_x);
    let mut nearest = Vec::new();
    for (i, &d) in dists.iter().enumerate() {
        if d - min <= tol {
            nearest.push(i);
        }
    }
    let total: f64 = nearest.iter().map(|&i| weights[i]).sum();
    let mut z = vec![0.0; atoms.len()];
    for &i in &nearest {
        z[i] = if nearest.len() == 1 { 1.0 } else { weights[i] / total };
    }
    (nearest, z)
}
