pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt()
}

// (1-lambda)*a + lambda*b keeps both endpoints exact and makes
// W(x,y,lambda) == W(y,x,1-lambda) bitwise.
pub(crate) fn geodesic(a: &[f64], b: &[f64], lambda: f64) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(p, q)| (1.0 - lambda) * p + lambda * q)
        .collect()
}
