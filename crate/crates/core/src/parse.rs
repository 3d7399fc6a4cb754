//! Text descriptors for spaces, objectives, and point literals. The CLI and
//! the config format both resolve through here.
//!
//! Spaces: `euclidean:N`, `hyperboloid:N`, `tree:path`, `tree:branched`,
//! `tree:@FILE` (edge-list description file), `product:A+B+..` with
//! non-product components.
//!
//! Objectives: `quadratic:a=0.5,c=1,1`, `dist:c=0,0`, `sqrtnorm:R=5`,
//! `maxcombo:k=1,R=5`, `concave:gamma=1`. Omitted centers default to the
//! space origin, omitted radii to 5.
//!
//! Point literals: comma-separated coordinates for Euclidean points,
//! spatial or ambient coordinates for hyperboloid points, `v<id>` or
//! `<edge>,<offset>` for tree points, and `;`-separated component literals
//! for product points.

use std::fs;

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::space::{Point, SpaceHandle, TreeSpace};

pub fn parse_space(desc: &str) -> Result<SpaceHandle> {
    let desc = desc.trim();
    let (head, rest) = desc.split_once(':').unwrap_or((desc, ""));
    match head {
        "euclidean" => SpaceHandle::euclidean(parse_dim(rest)?),
        "hyperboloid" => SpaceHandle::hyperboloid(parse_dim(rest)?),
        "tree" => match rest {
            "path" => Ok(SpaceHandle::tree(TreeSpace::small_path())),
            "branched" => Ok(SpaceHandle::tree(TreeSpace::small_branched())),
            _ => match rest.strip_prefix('@') {
                Some(path) => {
                    let text = fs::read_to_string(path)?;
                    Ok(SpaceHandle::tree(TreeSpace::from_description(&text)?))
                }
                None => Err(Error::UnknownDescriptor(desc.into())),
            },
        },
        "product" => {
            let components = rest
                .split('+')
                .map(parse_space)
                .collect::<Result<Vec<_>>>()?;
            if components.iter().any(|c| matches!(c, SpaceHandle::Product(_))) {
                return Err(Error::UnknownDescriptor(format!(
                    "{desc} (product components must not themselves be products)"
                )));
            }
            SpaceHandle::product(components)
        }
        _ => Err(Error::UnknownDescriptor(desc.into())),
    }
}

pub fn parse_point(space: &SpaceHandle, text: &str) -> Result<Point> {
    let text = text.trim();
    match space {
        SpaceHandle::Euclidean(n) => {
            let coords = parse_floats(text)?;
            if coords.len() != *n {
                return Err(Error::InvalidPoint(format!(
                    "expected {n} coordinates, got {} in `{text}`",
                    coords.len()
                )));
            }
            Ok(Point::euclidean(coords))
        }
        SpaceHandle::Hyperboloid(n) => {
            let coords = parse_floats(text)?;
            if coords.len() == *n {
                Ok(Point::hyperboloid_spatial(&coords))
            } else if coords.len() == n + 1 {
                let p = Point::Hyperboloid { coords };
                space.validate_point(&p)?;
                Ok(p)
            } else {
                Err(Error::InvalidPoint(format!(
                    "expected {n} spatial or {} ambient coordinates, got {} in `{text}`",
                    n + 1,
                    coords.len()
                )))
            }
        }
        SpaceHandle::Tree(tree) => {
            if let Some(id) = text.strip_prefix('v') {
                let vertex: usize = id.trim().parse().map_err(|_| {
                    Error::InvalidPoint(format!("bad vertex id in `{text}`"))
                })?;
                if vertex >= tree.num_vertices() {
                    return Err(Error::InvalidPoint(format!(
                        "vertex {vertex} out of range (tree has {} vertices)",
                        tree.num_vertices()
                    )));
                }
                return Ok(tree.vertex_point(vertex));
            }
            let (edge, offset) = text.split_once(',').ok_or_else(|| {
                Error::InvalidPoint(format!(
                    "tree points are `v<id>` or `<edge>,<offset>`, got `{text}`"
                ))
            })?;
            let edge: usize = edge.trim().parse().map_err(|_| {
                Error::InvalidPoint(format!("bad edge index in `{text}`"))
            })?;
            tree.point_on_edge(edge, parse_float(offset)?)
        }
        SpaceHandle::Product(components) => {
            let parts: Vec<&str> = text.split(';').collect();
            if parts.len() != components.len() {
                return Err(Error::InvalidPoint(format!(
                    "expected {} `;`-separated components, got {} in `{text}`",
                    components.len(),
                    parts.len()
                )));
            }
            let points = components
                .iter()
                .zip(parts)
                .map(|(c, p)| parse_point(c, p))
                .collect::<Result<Vec<_>>>()?;
            Ok(Point::product(points))
        }
    }
}

/// Inverse of `parse_point`: a literal that parses back to the same point.
/// Hyperboloid points print ambient coordinates.
pub fn point_literal(p: &Point) -> String {
    match p {
        Point::Euclidean { coords } | Point::Hyperboloid { coords } => join_floats(coords),
        Point::Tree { edge, offset } => format!("{edge},{offset}"),
        Point::Product { components } => components
            .iter()
            .map(point_literal)
            .collect::<Vec<_>>()
            .join(";"),
    }
}

pub fn parse_objective(space: &SpaceHandle, desc: &str) -> Result<Objective> {
    let desc = desc.trim();
    let (head, rest) = desc.split_once(':').unwrap_or((desc, ""));
    let mut args = Args::split(rest)?;
    let f = match head {
        "quadratic" => {
            let weight = args.take_float("a")?.unwrap_or(1.0);
            let center = args.take_point("c", space)?;
            Objective::quadratic(space.clone(), weight, center)
        }
        "dist" => {
            let center = args.take_point("c", space)?;
            let radius = args.take_float("R")?.unwrap_or(DEFAULT_RADIUS);
            Objective::dist_to(space.clone(), center, radius)
        }
        "sqrtnorm" => {
            let center = args.take_point("c", space)?;
            let radius = args.take_float("R")?.unwrap_or(DEFAULT_RADIUS);
            Objective::sqrt_dist(space.clone(), center, radius)
        }
        "maxcombo" => {
            let k = args.take_float("k")?.unwrap_or(1.0);
            let center = args.take_point("c", space)?;
            let radius = args.take_float("R")?.unwrap_or(DEFAULT_RADIUS);
            Objective::max_combo(space.clone(), k, center, radius)
        }
        "concave" => {
            let gamma = args.take_float("gamma")?.unwrap_or(1.0);
            let center = args.take_point("c", space)?;
            Objective::neg_quadratic(space.clone(), center, gamma)
        }
        _ => return Err(Error::UnknownDescriptor(desc.into())),
    };
    args.finish(desc)?;
    f
}

const DEFAULT_RADIUS: f64 = 5.0;

/// Key=value fragments split on commas. A fragment without `=` continues
/// the previous value, so vector literals keep their commas:
/// `a=0.5,c=1,1` parses as `a -> 0.5`, `c -> 1,1`.
struct Args(Vec<(String, String)>);

impl Args {
    fn split(text: &str) -> Result<Args> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        if text.trim().is_empty() {
            return Ok(Args(pairs));
        }
        for frag in text.split(',') {
            match frag.split_once('=') {
                Some((k, v)) => pairs.push((k.trim().to_string(), v.trim().to_string())),
                None => match pairs.last_mut() {
                    Some((_, v)) => {
                        v.push(',');
                        v.push_str(frag.trim());
                    }
                    None => {
                        return Err(Error::InvalidParameter(format!(
                            "expected key=value, got `{frag}`"
                        )))
                    }
                },
            }
        }
        Ok(Args(pairs))
    }

    fn take(&mut self, key: &str) -> Option<String> {
        let idx = self.0.iter().position(|(k, _)| k == key)?;
        Some(self.0.remove(idx).1)
    }

    fn take_float(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|v| parse_float(&v)).transpose()
    }

    fn take_point(&mut self, key: &str, space: &SpaceHandle) -> Result<Point> {
        match self.take(key) {
            Some(v) => parse_point(space, &v),
            None => Ok(space.origin()),
        }
    }

    fn finish(self, desc: &str) -> Result<()> {
        match self.0.first() {
            None => Ok(()),
            Some((k, _)) => Err(Error::InvalidParameter(format!(
                "unknown or repeated key `{k}` in `{desc}`"
            ))),
        }
    }
}

fn parse_dim(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("expected a dimension, got `{s}`")))
}

fn parse_float(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("expected a number, got `{s}`")))?;
    if !v.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "expected a finite number, got `{s}`"
        )));
    }
    Ok(v)
}

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_float).collect()
}

fn join_floats(coords: &[f64]) -> String {
    coords
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{catalog, ObjectiveKind};
    use crate::space::RandomSampler;

    #[test]
    fn space_descriptors_resolve() {
        assert_eq!(parse_space("euclidean:2").unwrap(), SpaceHandle::euclidean(2).unwrap());
        assert_eq!(
            parse_space("hyperboloid:2").unwrap(),
            SpaceHandle::hyperboloid(2).unwrap()
        );
        let path = parse_space("tree:path").unwrap();
        let SpaceHandle::Tree(t) = &path else { panic!() };
        assert_eq!(t.num_vertices(), 3);
        let prod = parse_space("product:euclidean:1+tree:path").unwrap();
        let SpaceHandle::Product(cs) = &prod else { panic!() };
        assert_eq!(cs.len(), 2);
        assert!(matches!(parse_space("poincare:2"), Err(Error::UnknownDescriptor(_))));
        assert!(matches!(parse_space("tree:starfish"), Err(Error::UnknownDescriptor(_))));
        assert!(matches!(
            parse_space("product:product:euclidean:1+euclidean:1+euclidean:1"),
            Err(Error::UnknownDescriptor(_))
        ));
        assert!(parse_space("euclidean:0").is_err());
    }

    #[test]
    fn tree_description_files_load() {
        let dir = std::env::temp_dir().join(format!("sqprox-parse-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let file = dir.join("y.tree");
        fs::write(&file, "tree 4\n0 1 1.0\n1 2 2.0\n1 3 2.0\n").unwrap();
        let space = parse_space(&format!("tree:@{}", file.display())).unwrap();
        let SpaceHandle::Tree(t) = &space else { panic!() };
        assert_eq!(t.num_vertices(), 4);
        assert_eq!(t.num_edges(), 3);
        assert!(parse_space("tree:@/no/such/file.tree").is_err());
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn point_literals_cover_every_space_form() {
        let e2 = SpaceHandle::euclidean(2).unwrap();
        assert_eq!(
            parse_point(&e2, "1, -0.5").unwrap(),
            Point::euclidean([1.0, -0.5])
        );
        assert!(parse_point(&e2, "1").is_err());
        assert!(parse_point(&e2, "1,nope").is_err());

        let h2 = SpaceHandle::hyperboloid(2).unwrap();
        let spatial = parse_point(&h2, "0.4,0.3").unwrap();
        let ambient = parse_point(&h2, &point_literal(&spatial)).unwrap();
        assert_eq!(spatial, ambient);
        assert!(parse_point(&h2, "2,0,0").is_err());

        let tree = parse_space("tree:path").unwrap();
        let SpaceHandle::Tree(t) = &tree else { panic!() };
        assert_eq!(parse_point(&tree, "v1").unwrap(), t.vertex_point(1));
        assert_eq!(
            parse_point(&tree, "1,0.5").unwrap(),
            t.point_on_edge(1, 0.5).unwrap()
        );
        assert!(parse_point(&tree, "v9").is_err());
        assert!(parse_point(&tree, "1,99").is_err());

        let prod = parse_space("product:euclidean:1+tree:path").unwrap();
        let p = parse_point(&prod, "0.5; v2").unwrap();
        let Point::Product { components } = &p else { panic!() };
        assert_eq!(components.len(), 2);
        assert!(parse_point(&prod, "0.5").is_err());
    }

    #[test]
    fn literals_round_trip_on_random_points() {
        for desc in [
            "euclidean:3",
            "hyperboloid:2",
            "tree:branched",
            "product:euclidean:2+tree:path",
        ] {
            let space = parse_space(desc).unwrap();
            let mut sampler = RandomSampler::new(11);
            for _ in 0..50 {
                let p = sampler.sample(&space);
                let q = parse_point(&space, &point_literal(&p)).unwrap();
                assert!(
                    space.distance(&p, &q).unwrap() < 1e-12,
                    "{desc}: {p:?} vs {q:?}"
                );
            }
        }
    }

    #[test]
    fn objective_descriptors_resolve_with_defaults() {
        let e2 = SpaceHandle::euclidean(2).unwrap();
        let f = parse_objective(&e2, "quadratic:a=0.5,c=1,1").unwrap();
        assert_eq!(f.gamma(), 1.0);
        assert_eq!(f.known_minimizer().unwrap(), &Point::euclidean([1.0, 1.0]));

        let f = parse_objective(&e2, "dist:c=0,0").unwrap();
        assert_eq!(f.ball().unwrap().radius, 5.0);
        assert!(f.gamma() > 0.0);

        let f = parse_objective(&e2, "sqrtnorm:R=5").unwrap();
        assert_eq!(f.known_minimizer().unwrap(), &e2.origin());
        assert!(matches!(f.kind(), ObjectiveKind::SqrtDist { .. }));

        let f = parse_objective(&e2, "maxcombo:k=1,R=5").unwrap();
        assert!(matches!(f.kind(), ObjectiveKind::MaxCombo { k, .. } if *k == 1.0));

        let f = parse_objective(&e2, "concave:gamma=2").unwrap();
        assert_eq!(f.gamma(), 2.0);
        assert!(f.known_minimizer().is_none());
    }

    #[test]
    fn objective_descriptor_errors_name_the_problem() {
        let e1 = SpaceHandle::euclidean(1).unwrap();
        assert!(matches!(
            parse_objective(&e1, "entropy:T=3"),
            Err(Error::UnknownDescriptor(_))
        ));
        assert!(matches!(
            parse_objective(&e1, "quadratic:b=1"),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            parse_objective(&e1, "quadratic:a=1,a=2"),
            Err(Error::InvalidParameter(_))
        ));
        assert!(parse_objective(&e1, "quadratic:a=zero").is_err());
        assert!(parse_objective(&e1, "quadratic:0.5").is_err());
    }

    #[test]
    fn generated_descriptors_parse_back_to_the_same_objective() {
        for entry in catalog() {
            let f = &entry.objective;
            let g = parse_objective(&entry.space, f.descriptor()).unwrap();
            assert_eq!(g.gamma(), f.gamma(), "{}", f.descriptor());
            assert_eq!(g.descriptor(), f.descriptor());
            let xstar = f.known_minimizer().unwrap();
            assert!(entry.space.distance(g.known_minimizer().unwrap(), xstar).unwrap() < 1e-12);
        }
    }
}
