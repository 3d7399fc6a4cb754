//! Seeded point sampling. Identical seeds produce identical point streams,
//! which the determinism guarantees of the checkers and the suite rely on.

use super::{hyperboloid_exp_at_origin, Point, SpaceHandle};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub struct RandomSampler {
    seed: u64,
    scale: f64,
    rng: ChaCha8Rng,
}

impl RandomSampler {
    pub fn new(seed: u64) -> Self {
        Self::with_scale(seed, 1.0)
    }

    /// `scale` sets the dispersion on the unbounded models: the coordinate
    /// standard deviation in Euclidean space and the tangent standard
    /// deviation on the hyperboloid. Tree sampling is uniform regardless.
    pub fn with_scale(seed: u64, scale: f64) -> Self {
        RandomSampler {
            seed,
            scale,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample(&mut self, space: &SpaceHandle) -> Point {
        match space {
            SpaceHandle::Euclidean(n) => {
                let coords: Vec<f64> = (0..*n)
                    .map(|_| self.scale * self.rng.sample::<f64, _>(StandardNormal))
                    .collect();
                Point::Euclidean { coords }
            }
            SpaceHandle::Hyperboloid(n) => {
                let tangent: Vec<f64> = (0..*n)
                    .map(|_| self.scale * self.rng.sample::<f64, _>(StandardNormal))
                    .collect();
                Point::Hyperboloid {
                    coords: hyperboloid_exp_at_origin(&tangent),
                }
            }
            SpaceHandle::Tree(t) => {
                let edge = self.rng.gen_range(0..t.num_edges());
                let offset = self.rng.gen_range(0.0..1.0) * t.edge(edge).len;
                Point::Tree { edge, offset }
            }
            SpaceHandle::Product(cs) => {
                Point::Product {
                    components: cs.iter().map(|c| self.sample(c)).collect(),
                }
            }
        }
    }

    /// Sample restricted to the closed ball around `center`: rejection first,
    /// then a deterministic pull toward the center along the geodesic.
    pub fn sample_in_ball(&mut self, space: &SpaceHandle, center: &Point, radius: f64) -> Point {
        for _ in 0..64 {
            let p = self.sample(space);
            let d = space
                .distance_unchecked(center, &p);
            if d <= radius {
                return p;
            }
        }
        let p = self.sample(space);
        let d = space.distance_unchecked(center, &p);
        if d <= radius {
            return p;
        }
        let lambda = (radius * self.uniform01() / d).min(1.0);
        space.geodesic_unchecked(center, &p, lambda)
    }

    pub fn uniform01(&mut self) -> f64 {
        self.rng.gen_range(0.0..1.0)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        if hi > lo {
            self.rng.gen_range(lo..hi)
        } else {
            lo
        }
    }
}
