//! Hyperboloid (Minkowski) model of n-dimensional hyperbolic space: the
//! upper sheet of `t^2 - sum x_i^2 = 1` with distance
//! `d(p, q) = arccosh(-<p, q>_M)` for the Minkowski form
//! `<p, q>_M = -p_0 q_0 + sum p_i q_i`.

use crate::error::{Error, Result};

pub(crate) fn minkowski(p: &[f64], q: &[f64]) -> f64 {
    let spatial: f64 = p[1..].iter().zip(&q[1..]).map(|(a, b)| a * b).sum();
    spatial - p[0] * q[0]
}

/// Time coordinate from spatial coordinates.
pub(crate) fn lift(spatial: &[f64]) -> Vec<f64> {
    let s: f64 = spatial.iter().map(|x| x * x).sum();
    let mut coords = Vec::with_capacity(spatial.len() + 1);
    coords.push((1.0 + s).sqrt());
    coords.extend_from_slice(spatial);
    coords
}

/// Re-solve the sheet equation for the time coordinate after ambient
/// arithmetic, so points never drift off the manifold.
pub(crate) fn reproject(coords: &mut [f64]) {
    let s: f64 = coords[1..].iter().map(|x| x * x).sum();
    coords[0] = (1.0 + s).sqrt();
}

pub(crate) fn validate(dim: usize, coords: &[f64]) -> Result<()> {
    if coords.len() != dim + 1 {
        return Err(Error::InvalidPoint(format!(
            "expected {} ambient coordinates, got {}",
            dim + 1,
            coords.len()
        )));
    }
    if !coords.iter().all(|c| c.is_finite()) {
        return Err(Error::InvalidPoint("non-finite coordinate".into()));
    }
    let t = coords[0];
    if t < 1.0 - 1e-9 {
        return Err(Error::InvalidPoint(format!("time coordinate {t} below 1")));
    }
    let residual = minkowski(coords, coords) + 1.0;
    if residual.abs() > 1e-9 * (t * t).max(1.0) {
        return Err(Error::InvalidPoint(format!(
            "off-manifold point, constraint residual {residual:e}"
        )));
    }
    Ok(())
}

/// Computed as `2 asinh(|p - q|_M / 2)`, which is algebraically identical to
/// `arccosh(-<p, q>_M)` but stays accurate for nearly coincident points where
/// the arccosh form loses half the significant digits.
pub(crate) fn distance(p: &[f64], q: &[f64]) -> f64 {
    let mut s2 = 0.0;
    for i in 1..p.len() {
        let d = p[i] - q[i];
        s2 += d * d;
    }
    let dt = p[0] - q[0];
    s2 -= dt * dt;
    // Differences of sheet points are spacelike; clamp rounding noise.
    2.0 * (0.5 * s2.max(0.0).sqrt()).asinh()
}

pub(crate) fn geodesic(p: &[f64], q: &[f64], lambda: f64) -> Vec<f64> {
    let t = distance(p, q);
    let mut out = vec![0.0; p.len()];
    if t < 1e-8 {
        for i in 0..p.len() {
            out[i] = (1.0 - lambda) * p[i] + lambda * q[i];
        }
    } else {
        let s = t.sinh();
        let a = ((1.0 - lambda) * t).sinh() / s;
        let b = (lambda * t).sinh() / s;
        for i in 0..p.len() {
            out[i] = a * p[i] + b * q[i];
        }
    }
    reproject(&mut out);
    out
}

/// Exponential map: `u` is an ambient tangent vector at `p`
/// (`<p, u>_M = 0`), and the result lies at distance `|u|_M` from `p`.
pub(crate) fn exp_map(p: &[f64], u: &[f64]) -> Vec<f64> {
    let norm2 = minkowski(u, u);
    let norm = norm2.max(0.0).sqrt();
    let mut out = vec![0.0; p.len()];
    if norm < 1e-300 {
        out.copy_from_slice(p);
    } else {
        let c = norm.cosh();
        let s = norm.sinh() / norm;
        for i in 0..p.len() {
            out[i] = c * p[i] + s * u[i];
        }
    }
    reproject(&mut out);
    out
}

/// Exponential map at the origin `(1, 0, .., 0)` written in spatial tangent
/// coordinates.
pub(crate) fn exp_at_origin(tangent: &[f64]) -> Vec<f64> {
    let norm: f64 = tangent.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut coords = Vec::with_capacity(tangent.len() + 1);
    if norm < 1e-300 {
        coords.push(1.0);
        coords.extend_from_slice(tangent);
    } else {
        let s = norm.sinh() / norm;
        coords.push(norm.cosh());
        coords.extend(tangent.iter().map(|x| s * x));
    }
    reproject(&mut coords);
    coords
}

/// Minkowski-orthonormal basis of the tangent space at `p`, built by
/// projecting the ambient spatial axes and Gram-Schmidt with pivoting.
pub(crate) fn tangent_basis(p: &[f64]) -> Vec<Vec<f64>> {
    let n = p.len() - 1;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    for axis in 1..=n {
        let mut v = vec![0.0; p.len()];
        v[axis] = 1.0;
        // Tangent projection: v + <v, p>_M p, using <p, p>_M = -1.
        let vp = minkowski(&v, p);
        for i in 0..v.len() {
            v[i] += vp * p[i];
        }
        for b in &basis {
            let c = minkowski(&v, b);
            for i in 0..v.len() {
                v[i] -= c * b[i];
            }
        }
        let norm = minkowski(&v, &v).max(0.0).sqrt();
        if norm > 1e-12 {
            for x in &mut v {
                *x /= norm;
            }
            basis.push(v);
        }
    }
    debug_assert_eq!(basis.len(), n, "degenerate tangent basis");
    basis
}
