//! Model spaces and their shared geometric operations.
//!
//! Every space here is a geodesic metric space `(X, d, W)` where
//! `W(x, y, lambda)` is the point a fraction `lambda` of the way along the
//! unique geodesic from `x` to `y`. The supported models are Euclidean space,
//! the hyperboloid model of hyperbolic space, finite weighted metric trees,
//! and finite products of these (product metric `d^2 = sum d_i^2`).

mod euclidean;
mod hyperboloid;
mod tree;

pub mod checks;
pub mod sampler;

pub use checks::{check_cat0, check_hyperbolic_axioms, AxiomReport, BrokenGeodesic, CheckLine};
pub use sampler::RandomSampler;
pub use tree::{TreeEdge, TreeSpace};

use crate::error::{Error, Result};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// A point in one of the model spaces.
///
/// Hyperboloid points store ambient coordinates `(t, x_1, .., x_n)` with
/// `t^2 - sum x_i^2 = 1`, `t >= 1`. Tree points are an edge index plus an
/// arc-length offset from the edge's first endpoint, in `[0, len]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Point {
    Euclidean { coords: Vec<f64> },
    Hyperboloid { coords: Vec<f64> },
    Tree { edge: usize, offset: f64 },
    Product { components: Vec<Point> },
}

impl Point {
    pub fn euclidean(coords: impl Into<Vec<f64>>) -> Self {
        Point::Euclidean {
            coords: coords.into(),
        }
    }

    /// Hyperboloid point from spatial coordinates; the time coordinate is
    /// solved from the sheet equation.
    pub fn hyperboloid_spatial(spatial: &[f64]) -> Self {
        Point::Hyperboloid {
            coords: hyperboloid::lift(spatial),
        }
    }

    pub fn product(components: Vec<Point>) -> Self {
        Point::Product { components }
    }
}

/// Handle to a model space. Cheap to clone; trees share their distance
/// tables through an `Arc`.
#[derive(Clone, Debug, PartialEq)]
pub enum SpaceHandle {
    Euclidean(usize),
    Hyperboloid(usize),
    Tree(Arc<TreeSpace>),
    Product(Vec<SpaceHandle>),
}

impl fmt::Display for SpaceHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceHandle::Euclidean(n) => write!(f, "euclidean({n})"),
            SpaceHandle::Hyperboloid(n) => write!(f, "hyperboloid({n})"),
            SpaceHandle::Tree(t) => write!(f, "tree({}v/{}e)", t.num_vertices(), t.num_edges()),
            SpaceHandle::Product(cs) => {
                write!(f, "product(")?;
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " x ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl SpaceHandle {
    pub fn euclidean(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("euclidean dimension must be >= 1".into()));
        }
        Ok(SpaceHandle::Euclidean(dim))
    }

    pub fn hyperboloid(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("hyperboloid dimension must be >= 1".into()));
        }
        Ok(SpaceHandle::Hyperboloid(dim))
    }

    pub fn tree(tree: TreeSpace) -> Self {
        SpaceHandle::Tree(Arc::new(tree))
    }

    pub fn product(components: Vec<SpaceHandle>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("product space needs >= 1 component".into()));
        }
        Ok(SpaceHandle::Product(components))
    }

    /// Canonical base point: the origin for Euclidean and hyperboloid models,
    /// vertex 0 for trees, componentwise for products.
    pub fn origin(&self) -> Point {
        match self {
            SpaceHandle::Euclidean(n) => Point::euclidean(vec![0.0; *n]),
            SpaceHandle::Hyperboloid(n) => Point::hyperboloid_spatial(&vec![0.0; *n]),
            SpaceHandle::Tree(t) => t.vertex_point(0),
            SpaceHandle::Product(cs) => Point::product(cs.iter().map(|c| c.origin()).collect()),
        }
    }

    pub fn validate_point(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (SpaceHandle::Euclidean(n), Point::Euclidean { coords }) => {
                if coords.len() != *n {
                    return Err(Error::InvalidPoint(format!(
                        "expected {n} coordinates, got {}",
                        coords.len()
                    )));
                }
                if !coords.iter().all(|c| c.is_finite()) {
                    return Err(Error::InvalidPoint("non-finite coordinate".into()));
                }
                Ok(())
            }
            (SpaceHandle::Hyperboloid(n), Point::Hyperboloid { coords }) => {
                hyperboloid::validate(*n, coords)
            }
            (SpaceHandle::Tree(t), Point::Tree { edge, offset }) => t.validate(*edge, *offset),
            (SpaceHandle::Product(cs), Point::Product { components }) => {
                if components.len() != cs.len() {
                    return Err(Error::InvalidPoint(format!(
                        "expected {} components, got {}",
                        cs.len(),
                        components.len()
                    )));
                }
                for (c, p) in cs.iter().zip(components) {
                    c.validate_point(p)?;
                }
                Ok(())
            }
            _ => Err(Error::InvalidPoint(format!(
                "point kind does not match space {self}"
            ))),
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.validate_point(x)?;
        self.validate_point(y)?;
        Ok(self.distance_unchecked(x, y))
    }

    /// `W(x, y, lambda)`; errors unless `lambda` lies in `[0, 1]`.
    /// Endpoints are exact: `lambda = 0` returns `x`, `lambda = 1` returns `y`.
    pub fn geodesic(&self, x: &Point, y: &Point, lambda: f64) -> Result<Point> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!(
                "geodesic parameter {lambda} outside [0, 1]"
            )));
        }
        self.validate_point(x)?;
        self.validate_point(y)?;
        Ok(self.geodesic_unchecked(x, y, lambda))
    }

    /// Quasi-linearization form
    /// `<xy, uv> = (d^2(x,v) + d^2(y,u) - d^2(x,u) - d^2(y,v)) / 2`.
    /// In Euclidean space this is the inner product `(y - x) . (v - u)`.
    pub fn quasilin(&self, x: &Point, y: &Point, u: &Point, v: &Point) -> Result<f64> {
        for p in [x, y, u, v] {
            self.validate_point(p)?;
        }
        let dxv = self.distance_unchecked(x, v);
        let dyu = self.distance_unchecked(y, u);
        let dxu = self.distance_unchecked(x, u);
        let dyv = self.distance_unchecked(y, v);
        Ok(0.5 * (dxv * dxv + dyu * dyu - dxu * dxu - dyv * dyv))
    }

    pub(crate) fn distance_unchecked(&self, x: &Point, y: &Point) -> f64 {
        match (self, x, y) {
            (SpaceHandle::Euclidean(_), Point::Euclidean { coords: a }, Point::Euclidean { coords: b }) => {
                euclidean::distance(a, b)
            }
            (
                SpaceHandle::Hyperboloid(_),
                Point::Hyperboloid { coords: a },
                Point::Hyperboloid { coords: b },
            ) => hyperboloid::distance(a, b),
            (SpaceHandle::Tree(t), Point::Tree { edge: e1, offset: o1 }, Point::Tree { edge: e2, offset: o2 }) => {
                t.distance(*e1, *o1, *e2, *o2)
            }
            (
                SpaceHandle::Product(cs),
                Point::Product { components: a },
                Point::Product { components: b },
            ) => {
                let sq: f64 = cs
                    .iter()
                    .zip(a.iter().zip(b))
                    .map(|(c, (p, q))| {
                        let d = c.distance_unchecked(p, q);
                        d * d
                    })
                    .sum();
                sq.sqrt()
            }
            _ => unreachable!("validated points match the space"),
        }
    }

    pub(crate) fn geodesic_unchecked(&self, x: &Point, y: &Point, lambda: f64) -> Point {
        if lambda == 0.0 {
            return x.clone();
        }
        if lambda == 1.0 {
            return y.clone();
        }
        match (self, x, y) {
            (SpaceHandle::Euclidean(_), Point::Euclidean { coords: a }, Point::Euclidean { coords: b }) => {
                Point::Euclidean {
                    coords: euclidean::geodesic(a, b, lambda),
                }
            }
            (
                SpaceHandle::Hyperboloid(_),
                Point::Hyperboloid { coords: a },
                Point::Hyperboloid { coords: b },
            ) => Point::Hyperboloid {
                coords: hyperboloid::geodesic(a, b, lambda),
            },
            (SpaceHandle::Tree(t), Point::Tree { edge: e1, offset: o1 }, Point::Tree { edge: e2, offset: o2 }) => {
                t.geodesic(*e1, *o1, *e2, *o2, lambda)
            }
            (
                SpaceHandle::Product(cs),
                Point::Product { components: a },
                Point::Product { components: b },
            ) => Point::Product {
                components: cs
                    .iter()
                    .zip(a.iter().zip(b))
                    .map(|(c, (p, q))| c.geodesic_unchecked(p, q, lambda))
                    .collect(),
            },
            _ => unreachable!("validated points match the space"),
        }
    }
}

/// Metric-plus-geodesic interface used by the randomized checkers, so that
/// deliberately corrupted fixtures can be checked alongside real spaces.
pub trait Geometry {
    fn distance(&self, x: &Point, y: &Point) -> Result<f64>;
    fn geodesic(&self, x: &Point, y: &Point, lambda: f64) -> Result<Point>;
    fn sample(&self, sampler: &mut RandomSampler) -> Point;

    fn quasilin(&self, x: &Point, y: &Point, u: &Point, v: &Point) -> Result<f64> {
        let dxv = self.distance(x, v)?;
        let dyu = self.distance(y, u)?;
        let dxu = self.distance(x, u)?;
        let dyv = self.distance(y, v)?;
        Ok(0.5 * (dxv * dxv + dyu * dyu - dxu * dxu - dyv * dyv))
    }

    fn label(&self) -> String;
}

impl Geometry for SpaceHandle {
    fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        SpaceHandle::distance(self, x, y)
    }

    fn geodesic(&self, x: &Point, y: &Point, lambda: f64) -> Result<Point> {
        SpaceHandle::geodesic(self, x, y, lambda)
    }

    fn sample(&self, sampler: &mut RandomSampler) -> Point {
        sampler.sample(self)
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

pub(crate) use hyperboloid::{
    exp_at_origin as hyperboloid_exp_at_origin, exp_map as hyperboloid_exp,
    tangent_basis as hyperboloid_tangent_basis,
};
