//! Randomized geometry checkers. Each check samples point tuples, evaluates
//! one defining (in)equality of a hyperbolic or CAT(0) space, and reports the
//! worst violation found. Violations are normalized by `max(1, magnitudes)`
//! so the single report tolerance reads as a relative slack at any scale.

use super::{Geometry, Point, RandomSampler, SpaceHandle};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct CheckLine {
    pub name: String,
    pub samples: usize,
    pub max_violation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub checks: Vec<CheckLine>,
    pub seed: u64,
    pub tolerance: f64,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

struct Worst {
    name: &'static str,
    max: f64,
}

impl Worst {
    fn new(name: &'static str) -> Self {
        Worst {
            name,
            max: f64::NEG_INFINITY,
        }
    }

    /// `excess` is violation when positive; `scale` the magnitude of the
    /// quantities compared.
    fn record(&mut self, excess: f64, scale: f64) {
        let v = excess / scale.max(1.0);
        if v > self.max {
            self.max = v;
        }
    }

    fn line(&self, samples: usize, tol: f64) -> CheckLine {
        CheckLine {
            name: self.name.to_string(),
            samples,
            max_violation: self.max,
            pass: self.max <= tol,
        }
    }
}

/// Checks the four hyperbolic-space axioms for the geodesic map `W`:
/// the convexity inequality (W1), affine parameterization (W2), endpoint
/// symmetry (W3), and joint convexity in both arguments (W4). (W2) and (W3)
/// are equalities; the others are one-sided.
pub fn check_hyperbolic_axioms<G: Geometry + ?Sized>(
    space: &G,
    sampler: &mut RandomSampler,
    n: usize,
    tol: f64,
) -> Result<AxiomReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    let mut w1 = Worst::new("W1 convexity of the metric");
    let mut w2 = Worst::new("W2 affine parameterization");
    let mut w3 = Worst::new("W3 endpoint symmetry");
    let mut w4 = Worst::new("W4 joint convexity");
    let seed = sampler.seed();

    for _ in 0..n {
        let x = space.sample(sampler);
        let y = space.sample(sampler);
        let z = space.sample(sampler);
        let w = space.sample(sampler);
        let la = sampler.uniform01();
        let lb = sampler.uniform01();

        let gab = space.geodesic(&x, &y, la)?;

        let lhs = space.distance(&gab, &z)?;
        let dxz = space.distance(&x, &z)?;
        let dyz = space.distance(&y, &z)?;
        let rhs = (1.0 - la) * dxz + la * dyz;
        w1.record(lhs - rhs, lhs.abs().max(rhs.abs()));

        let gab2 = space.geodesic(&x, &y, lb)?;
        let lhs = space.distance(&gab, &gab2)?;
        let rhs = (la - lb).abs() * space.distance(&x, &y)?;
        w2.record((lhs - rhs).abs(), lhs.abs().max(rhs.abs()));

        let mirrored = space.geodesic(&y, &x, 1.0 - la)?;
        let gap = space.distance(&gab, &mirrored)?;
        w3.record(gap, space.distance(&x, &y)?);

        let gzw = space.geodesic(&z, &w, la)?;
        let lhs = space.distance(&gab, &gzw)?;
        let rhs = (1.0 - la) * dxz + la * space.distance(&y, &w)?;
        w4.record(lhs - rhs, lhs.abs().max(rhs.abs()));
    }

    Ok(AxiomReport {
        checks: vec![w1.line(n, tol), w2.line(n, tol), w3.line(n, tol), w4.line(n, tol)],
        seed,
        tolerance: tol,
    })
}

/// Checks the CAT(0) inequalities: the midpoint and general-parameter
/// comparison inequalities for squared distances, Cauchy-Schwarz for the
/// quasi-linearization form, and the squared-distance splitting identity
/// `d^2(x,y) = d^2(x,z) + d^2(z,y) + 2<xz, zy>` (an equality).
pub fn check_cat0<G: Geometry + ?Sized>(
    space: &G,
    sampler: &mut RandomSampler,
    n: usize,
    tol: f64,
) -> Result<AxiomReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    let mut cn_mid = Worst::new("CN midpoint inequality");
    let mut cn_gen = Worst::new("CN general-parameter inequality");
    let mut cs = Worst::new("Cauchy-Schwarz for quasilin");
    let mut ident = Worst::new("squared-distance splitting identity");
    let seed = sampler.seed();

    for _ in 0..n {
        let x = space.sample(sampler);
        let y = space.sample(sampler);
        let z = space.sample(sampler);
        let u = space.sample(sampler);
        let v = space.sample(sampler);
        let la = sampler.uniform01();

        let dxy2 = {
            let d = space.distance(&x, &y)?;
            d * d
        };
        let dxz2 = {
            let d = space.distance(&x, &z)?;
            d * d
        };
        let dyz2 = {
            let d = space.distance(&y, &z)?;
            d * d
        };

        let mid = space.geodesic(&x, &y, 0.5)?;
        let dmz = space.distance(&mid, &z)?;
        let rhs = 0.5 * dxz2 + 0.5 * dyz2 - 0.25 * dxy2;
        cn_mid.record(dmz * dmz - rhs, (dmz * dmz).abs().max(rhs.abs()));

        let g = space.geodesic(&x, &y, la)?;
        let dgz = space.distance(&g, &z)?;
        let rhs = (1.0 - la) * dxz2 + la * dyz2 - la * (1.0 - la) * dxy2;
        cn_gen.record(dgz * dgz - rhs, (dgz * dgz).abs().max(rhs.abs()));

        let q = space.quasilin(&x, &y, &u, &v)?;
        let bound = space.distance(&x, &y)? * space.distance(&u, &v)?;
        cs.record(q - bound, q.abs().max(bound.abs()));

        let split = dxz2 + dyz2 + 2.0 * space.quasilin(&x, &z, &z, &y)?;
        ident.record((dxy2 - split).abs(), dxy2.abs().max(split.abs()));
    }

    Ok(AxiomReport {
        checks: vec![
            cn_mid.line(n, tol),
            cn_gen.line(n, tol),
            cs.line(n, tol),
            ident.line(n, tol),
        ],
        seed,
        tolerance: tol,
    })
}

/// Checker-validation fixture: same metric as the wrapped space, but the
/// geodesic parameter is warped to `lambda^2`. Endpoints stay fixed, so only
/// the parameterization laws (W2, and the CN inequalities through the
/// midpoint) can expose the bug.
pub struct BrokenGeodesic(pub SpaceHandle);

impl Geometry for BrokenGeodesic {
    fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.0.distance(x, y)
    }

    fn geodesic(&self, x: &Point, y: &Point, lambda: f64) -> Result<Point> {
        self.0.geodesic(x, y, lambda * lambda)
    }

    fn sample(&self, sampler: &mut RandomSampler) -> Point {
        sampler.sample(&self.0)
    }

    fn label(&self) -> String {
        format!("broken-geodesic over {}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::TreeSpace;

    fn spaces() -> Vec<SpaceHandle> {
        vec![
            SpaceHandle::euclidean(2).unwrap(),
            SpaceHandle::euclidean(3).unwrap(),
            SpaceHandle::hyperboloid(2).unwrap(),
            SpaceHandle::tree(TreeSpace::small_path()),
            SpaceHandle::tree(TreeSpace::small_branched()),
            SpaceHandle::product(vec![
                SpaceHandle::euclidean(1).unwrap(),
                SpaceHandle::tree(TreeSpace::small_path()),
            ])
            .unwrap(),
        ]
    }

    #[test]
    fn model_spaces_pass_axioms() {
        for space in spaces() {
            let mut s = RandomSampler::new(42);
            let report = check_hyperbolic_axioms(&space, &mut s, 2000, 1e-8).unwrap();
            assert!(report.all_pass(), "{}: {:?}", space, report.checks);
        }
    }

    #[test]
    fn model_spaces_pass_cat0() {
        for space in spaces() {
            let mut s = RandomSampler::new(43);
            let report = check_cat0(&space, &mut s, 2000, 1e-8).unwrap();
            assert!(report.all_pass(), "{}: {:?}", space, report.checks);
        }
    }

    #[test]
    fn broken_geodesic_fails_affine_parameterization() {
        let broken = BrokenGeodesic(SpaceHandle::euclidean(2).unwrap());
        let mut s = RandomSampler::new(42);
        let report = check_hyperbolic_axioms(&broken, &mut s, 500, 1e-8).unwrap();
        assert!(!report.all_pass());
        let w2 = report
            .checks
            .iter()
            .find(|c| c.name.starts_with("W2"))
            .unwrap();
        assert!(!w2.pass, "warped parameterization must break W2");
        assert!(w2.max_violation > 1e-3);
    }

    #[test]
    fn broken_geodesic_fails_cat0() {
        let broken = BrokenGeodesic(SpaceHandle::euclidean(2).unwrap());
        let mut s = RandomSampler::new(42);
        let report = check_cat0(&broken, &mut s, 500, 1e-8).unwrap();
        assert!(!report.all_pass());
    }

    #[test]
    fn zero_samples_is_an_error() {
        let space = SpaceHandle::euclidean(1).unwrap();
        let mut s = RandomSampler::new(1);
        assert!(check_hyperbolic_axioms(&space, &mut s, 0, 1e-8).is_err());
    }
}
