//! Small dense-vector helpers used throughout the crate.
//!
//! Dimensions stay in the hundreds at desk scale, so plain `Vec<f64>` keeps
//! the code auditable without pulling in a linear-algebra crate.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `y += s * x`, in place.
pub fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

/// Euclidean projection onto the ball of radius `radius` around `center`.
pub fn project_ball(x: &[f64], center: &[f64], radius: f64) -> Vec<f64> {
    let d = distance(x, center);
    if d <= radius || !radius.is_finite() {
        return x.to_vec();
    }
    let t = radius / d;
    center
        .iter()
        .zip(x)
        .map(|(c, xi)| c + t * (xi - c))
        .collect()
}

pub fn unit_vector(dim: usize, coord: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[coord] = 1.0;
    e
}
