//! Property tests for the geometric primitives across every model space:
//! the quasi-linearization algebra, the splitting identity, geodesic
//! reparameterization, Cauchy-Schwarz, and the midpoint inequality.

use proptest::prelude::*;
use sqprox_core::{parse_space, Point, RandomSampler, SpaceHandle};

fn spaces() -> Vec<SpaceHandle> {
    [
        "euclidean:1",
        "euclidean:2",
        "euclidean:3",
        "hyperboloid:2",
        "tree:path",
        "tree:branched",
        "product:euclidean:1+tree:path",
    ]
    .iter()
    .map(|d| parse_space(d).unwrap())
    .collect()
}

fn draw(space: &SpaceHandle, seed: u64, n: usize) -> Vec<Point> {
    let mut sampler = RandomSampler::new(seed);
    (0..n).map(|_| sampler.sample(space)).collect()
}

proptest! {
    #[test]
    fn quasilin_of_a_pair_with_itself_is_the_squared_distance(seed in any::<u64>()) {
        for space in spaces() {
            let p = draw(&space, seed, 2);
            let d = space.distance(&p[0], &p[1]).unwrap();
            let q = space.quasilin(&p[0], &p[1], &p[0], &p[1]).unwrap();
            prop_assert!((q - d * d).abs() <= 1e-9 * (1.0 + d * d), "{space}: {q} vs {}", d * d);
        }
    }

    #[test]
    fn quasilin_is_symmetric_under_pair_swap(seed in any::<u64>()) {
        for space in spaces() {
            let p = draw(&space, seed, 4);
            let a = space.quasilin(&p[0], &p[1], &p[2], &p[3]).unwrap();
            let b = space.quasilin(&p[2], &p[3], &p[0], &p[1]).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "{space}: {a} vs {b}");
        }
    }

    #[test]
    fn quasilin_flips_sign_when_a_pair_reverses(seed in any::<u64>()) {
        for space in spaces() {
            let p = draw(&space, seed, 4);
            let a = space.quasilin(&p[0], &p[1], &p[2], &p[3]).unwrap();
            let b = space.quasilin(&p[1], &p[0], &p[2], &p[3]).unwrap();
            prop_assert!((a + b).abs() <= 1e-9 * (1.0 + a.abs()), "{space}: {a} vs {b}");
        }
    }

    #[test]
    fn quasilin_is_additive_in_the_second_pair(seed in any::<u64>()) {
        for space in spaces() {
            let p = draw(&space, seed, 5);
            let uv = space.quasilin(&p[0], &p[1], &p[2], &p[3]).unwrap();
            let vw = space.quasilin(&p[0], &p[1], &p[3], &p[4]).unwrap();
            let uw = space.quasilin(&p[0], &p[1], &p[2], &p[4]).unwrap();
            prop_assert!((uv + vw - uw).abs() <= 1e-9 * (1.0 + uw.abs()), "{space}");
        }
    }

    #[test]
    fn any_midpoint_splits_the_squared_distance(seed in any::<u64>()) {
        // d^2(x,y) = d^2(x,z) + d^2(z,y) + 2 <xz, zy> for every z, in every
        // metric space; it is an algebraic identity of the four distances.
        for space in spaces() {
            let p = draw(&space, seed, 3);
            let lhs = space.distance(&p[0], &p[1]).unwrap().powi(2);
            let rhs = space.distance(&p[0], &p[2]).unwrap().powi(2)
                + space.distance(&p[2], &p[1]).unwrap().powi(2)
                + 2.0 * space.quasilin(&p[0], &p[2], &p[2], &p[1]).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs), "{space}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn geodesic_parameters_rescale_the_distance(
        seed in any::<u64>(),
        lam in 0.0..=1.0f64,
        mu in 0.0..=1.0f64,
    ) {
        for space in spaces() {
            let p = draw(&space, seed, 2);
            let d = space.distance(&p[0], &p[1]).unwrap();
            let a = space.geodesic(&p[0], &p[1], lam).unwrap();
            let b = space.geodesic(&p[0], &p[1], mu).unwrap();
            let got = space.distance(&a, &b).unwrap();
            let want = (lam - mu).abs() * d;
            prop_assert!((got - want).abs() <= 1e-9 * (1.0 + d), "{space}: {got} vs {want}");
        }
    }

    #[test]
    fn quasilin_obeys_cauchy_schwarz(seed in any::<u64>()) {
        for space in spaces() {
            let p = draw(&space, seed, 4);
            let q = space.quasilin(&p[0], &p[1], &p[2], &p[3]).unwrap();
            let bound = space.distance(&p[0], &p[1]).unwrap() * space.distance(&p[2], &p[3]).unwrap();
            prop_assert!(q <= bound + 1e-9 * (1.0 + bound), "{space}: {q} > {bound}");
        }
    }

    #[test]
    fn midpoints_satisfy_the_cn_inequality(seed in any::<u64>()) {
        for space in spaces() {
            let p = draw(&space, seed, 3);
            let m = space.geodesic(&p[0], &p[1], 0.5).unwrap();
            let lhs = space.distance(&m, &p[2]).unwrap().powi(2);
            let rhs = 0.5 * space.distance(&p[0], &p[2]).unwrap().powi(2)
                + 0.5 * space.distance(&p[1], &p[2]).unwrap().powi(2)
                - 0.25 * space.distance(&p[0], &p[1]).unwrap().powi(2);
            prop_assert!(lhs <= rhs + 1e-9 * (1.0 + rhs.abs()), "{space}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn euclidean_quasilin_is_the_dot_product(seed in any::<u64>()) {
        for dim in [1usize, 2, 3] {
            let space = SpaceHandle::euclidean(dim).unwrap();
            let p = draw(&space, seed, 4);
            let coords = |q: &Point| match q {
                Point::Euclidean { coords } => coords.clone(),
                _ => unreachable!(),
            };
            let (x, y, u, v) = (coords(&p[0]), coords(&p[1]), coords(&p[2]), coords(&p[3]));
            let dot: f64 = (0..dim).map(|i| (y[i] - x[i]) * (v[i] - u[i])).sum();
            let q = space.quasilin(&p[0], &p[1], &p[2], &p[3]).unwrap();
            prop_assert!((q - dot).abs() <= 1e-9 * (1.0 + dot.abs()));
        }
    }
}
