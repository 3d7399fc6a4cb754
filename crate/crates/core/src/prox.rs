//! Proximal map solver. `prox` minimizes the composite
//!
//! `F(y) = f(y) + d^2(x, y) / (2 beta)`
//!
//! over a ball around `x` whose radius comes from the lower bound of `f`:
//! any `y` with `d(x, y) > sqrt(2 beta (f(x) - L))` has `F(y) > F(x)`, so
//! the minimizer never escapes that ball and a bounded search is exact in
//! principle. The solver itself is coarse sampling plus golden-section
//! refinement; `prox_oracle` is a deliberately dumb dense-grid argmin kept
//! as an independent cross-check.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::objective::{Ball, Objective};
use crate::space::{
    hyperboloid_exp, hyperboloid_tangent_basis, Point, SpaceHandle, TreeSpace,
};

/// Inner-solver budget. `coarse_points` is per axis (Euclidean and
/// hyperboloid-tangent grids) and per edge (trees); `refine_iters` is the
/// golden-section iteration count per searched segment.
#[derive(Clone, Debug)]
pub struct ProxParams {
    pub beta: f64,
    pub coarse_points: usize,
    pub refine_iters: usize,
    pub tol_inner: f64,
}

impl Default for ProxParams {
    fn default() -> Self {
        ProxParams {
            beta: 1.0,
            coarse_points: 33,
            refine_iters: 60,
            tol_inner: 1e-8,
        }
    }
}

impl ProxParams {
    pub fn with_beta(beta: f64) -> Self {
        ProxParams {
            beta,
            ..ProxParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if self.coarse_points < 3 {
            return Err(Error::InvalidParameter(format!(
                "coarse_points must be >= 3, got {}",
                self.coarse_points
            )));
        }
        if !(self.tol_inner > 0.0 && self.tol_inner.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tol_inner must be positive, got {}",
                self.tol_inner
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProxResult {
    pub point: Point,
    /// Composite value `f(point) + d^2(x, point) / (2 beta)`.
    pub objective: f64,
    pub search_radius: f64,
    pub evaluations: usize,
}

/// `sqrt(2 beta (f(x) - L))` with `L` the stored lower bound of `f`.
/// Every prox minimizer lies within this distance of `x`.
pub fn prox_search_radius(f: &Objective, beta: f64, x: &Point) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "beta must be positive, got {beta}"
        )));
    }
    let lower = f.lower_bound();
    if !lower.is_finite() {
        return Err(Error::PreconditionViolated(
            "prox search needs a finite lower bound on the objective".into(),
        ));
    }
    let fx = f.evaluate(x)?;
    Ok((2.0 * beta * (fx - lower).max(0.0)).sqrt())
}

/// Evaluation bookkeeping shared by the solver stages: every composite
/// evaluation funnels through `consider`, so the final answer is the best
/// point seen anywhere (coarse grid, every refinement segment, and `x`
/// itself), which guarantees both descent and determinism.
struct Search<'a> {
    space: &'a SpaceHandle,
    f: &'a Objective,
    x: &'a Point,
    inv_two_beta: f64,
    ball: Option<&'a Ball>,
    best: f64,
    best_point: Point,
    evaluations: usize,
}

impl<'a> Search<'a> {
    fn composite(&self, y: &Point) -> Result<f64> {
        let d = self.space.distance_unchecked(self.x, y);
        Ok(self.f.evaluate(y)? + d * d * self.inv_two_beta)
    }

    fn in_ball(&self, y: &Point) -> bool {
        match self.ball {
            Some(b) => self.space.distance_unchecked(y, &b.center) <= b.radius + 1e-12,
            None => true,
        }
    }

    /// Evaluates `y` (infinity if outside the domain ball) and folds it
    /// into the running argmin. Strict `<` keeps the first of exact ties.
    fn probe(&mut self, y: &Point) -> Result<f64> {
        if !self.in_ball(y) {
            return Ok(f64::INFINITY);
        }
        let v = self.composite(y)?;
        self.evaluations += 1;
        if v < self.best {
            self.best = v;
            self.best_point = y.clone();
        }
        Ok(v)
    }
}

/// Proximal map of `f` at `x`: coarse sampling of the search ball, then
/// golden-section refinement along geodesic segments through the incumbent
/// (multi-start from the best five coarse candidates, step halved each
/// sweep). Deterministic: candidates are generated and reduced in a fixed
/// order regardless of parallelism.
pub fn prox(space: &SpaceHandle, f: &Objective, params: &ProxParams, x: &Point) -> Result<ProxResult> {
    params.validate()?;
    if space != f.space() {
        return Err(Error::InvalidParameter(format!(
            "objective is bound to {}, prox was asked on {}",
            f.space(),
            space
        )));
    }
    space.validate_point(x)?;
    let radius = prox_search_radius(f, params.beta, x)?;
    let fx = f.evaluate(x)?;
    if radius <= 0.0 {
        // f(x) already attains the lower bound; x is its own prox point.
        return Ok(ProxResult {
            point: x.clone(),
            objective: fx,
            search_radius: 0.0,
            evaluations: 1,
        });
    }

    let mut search = Search {
        space,
        f,
        x,
        inv_two_beta: 0.5 / params.beta,
        ball: f.ball(),
        best: f64::INFINITY,
        best_point: x.clone(),
        evaluations: 0,
    };

    // Coarse stage. x goes first so ties at the ball boundary resolve to
    // "stay put" and the descent property F(xbar) <= f(x) is structural.
    let mut candidates = Vec::new();
    if search.in_ball(x) {
        candidates.push(x.clone());
    } else if let Some(b) = search.ball {
        // x outside the domain ball: seed with the center and the boundary
        // point toward x so the search starts inside.
        let d = space.distance_unchecked(&b.center, x);
        candidates.push(space.geodesic_unchecked(&b.center, x, (b.radius / d).min(1.0)));
        candidates.push(b.center.clone());
    }
    // A kink of f (a sqrt-of-distance cusp, say) can open a basin of the
    // composite narrower than any grid spacing. Kinks of the catalog shapes
    // sit at the minimizer of f, so probe it when it is known.
    if let Some(m) = f.known_minimizer() {
        candidates.push(m.clone());
    }
    let spacing = coarse_candidates(space, x, radius, params.coarse_points, &mut candidates);
    candidates.retain(|c| search.in_ball(c));
    if candidates.is_empty() {
        candidates.push(x.clone());
    }

    let values: Vec<f64> = if candidates.len() >= 4096 {
        // Parallel map keeps index order; the argmin below is sequential,
        // so the result is independent of thread scheduling.
        candidates
            .par_iter()
            .map(|c| search.composite(c))
            .collect::<Result<Vec<f64>>>()?
    } else {
        candidates
            .iter()
            .map(|c| search.composite(c))
            .collect::<Result<Vec<f64>>>()?
    };
    search.evaluations += values.len();
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap().then(i.cmp(&j)));
    for &i in &order {
        if values[i] < search.best {
            search.best = values[i];
            search.best_point = candidates[i].clone();
        }
    }

    // Refinement: multi-start from the best coarse candidates. The composite
    // of a merely quasiconvex f can be multimodal, so a single start can sit
    // in the wrong basin.
    let h0 = spacing.min(radius).max(radius * 1e-6);
    for &i in order.iter().take(5) {
        let mut incumbent = candidates[i].clone();
        let mut incumbent_value = values[i];
        let mut h = h0;
        for _ in 0..6 {
            let mut sweep_best = incumbent_value;
            let mut sweep_point: Option<Point> = None;
            for (a, b) in direction_segments(space, &incumbent, h) {
                let (v, p) = golden_section(&mut search, &a, &b, params.refine_iters)?;
                if v < sweep_best {
                    sweep_best = v;
                    sweep_point = Some(p);
                }
            }
            if let Some(p) = sweep_point {
                incumbent = p;
                incumbent_value = sweep_best;
            }
            h *= 0.5;
        }
    }

    // Value-based search cannot place the minimizer more precisely than the
    // band where the composite is flat to machine epsilon (width about
    // sqrt(ulp(F)/F''), far wider than ulp). A guarded parabolic fit along
    // each direction recovers the position of smooth minima to near machine
    // precision; kinked minima reject the fit through the value guard and
    // keep the golden-section answer.
    let mut point = search.best_point.clone();
    let mut value = search.best;
    let mut h = h0 / 64.0;
    for _ in 0..4 {
        for (a, b) in direction_segments(space, &point, h) {
            let f0 = search.probe(&a)?;
            let mid = space.geodesic_unchecked(&a, &b, 0.5);
            let f1 = search.probe(&mid)?;
            let f2 = search.probe(&b)?;
            if !(f0.is_finite() && f2.is_finite()) {
                continue;
            }
            // Parabola through t = 0, 1/2, 1; accept the vertex only when it
            // does not lose objective value beyond rounding noise.
            let curv = 2.0 * (f0 - 2.0 * f1 + f2);
            if !(curv > 0.0) {
                continue;
            }
            let slope = (f2 - f0) - curv;
            let t = (-slope / (2.0 * curv)).clamp(0.0, 1.0);
            let vertex = space.geodesic_unchecked(&a, &b, t);
            let v = search.probe(&vertex)?;
            if v <= value + 4.0 * f64::EPSILON * (1.0 + value.abs()) {
                point = vertex;
                value = value.min(v);
            }
        }
        h *= 0.5;
    }
    // Keep the polished position only while it still ties the global best.
    if value > search.best + 4.0 * f64::EPSILON * (1.0 + search.best.abs()) {
        point = search.best_point.clone();
    }
    let objective = search.composite(&point)?;

    Ok(ProxResult {
        point,
        objective,
        search_radius: radius,
        evaluations: search.evaluations,
    })
}

/// Golden-section minimization over the geodesic segment `[a, b]`.
/// Returns the best value and point among its own evaluations; the global
/// tracker inside `search` picks them up as well.
fn golden_section(
    search: &mut Search<'_>,
    a: &Point,
    b: &Point,
    iters: usize,
) -> Result<(f64, Point)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let space = search.space;
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    let mut t1 = hi - INV_PHI * (hi - lo);
    let mut t2 = lo + INV_PHI * (hi - lo);
    let mut p1 = space.geodesic_unchecked(a, b, t1);
    let mut p2 = space.geodesic_unchecked(a, b, t2);
    let mut f1 = search.probe(&p1)?;
    let mut f2 = search.probe(&p2)?;
    let mut best = if f1 <= f2 {
        (f1, p1.clone())
    } else {
        (f2, p2.clone())
    };
    for _ in 0..iters {
        if f1 <= f2 {
            hi = t2;
            t2 = t1;
            f2 = f1;
            p2 = p1;
            t1 = hi - INV_PHI * (hi - lo);
            p1 = space.geodesic_unchecked(a, b, t1);
            f1 = search.probe(&p1)?;
        } else {
            lo = t1;
            t1 = t2;
            f1 = f2;
            p1 = p2;
            t2 = lo + INV_PHI * (hi - lo);
            p2 = space.geodesic_unchecked(a, b, t2);
            f2 = search.probe(&p2)?;
        }
        if f1 < best.0 {
            best = (f1, p1.clone());
        }
        if f2 < best.0 {
            best = (f2, p2.clone());
        }
    }
    Ok(best)
}

/// Deterministic coarse candidates covering the ball of `radius` around
/// `x`; appends to `out` and returns the grid spacing used (the refinement
/// stage starts from one spacing). Candidates farther than the radius are
/// dropped: the minimizer provably lies inside.
fn coarse_candidates(
    space: &SpaceHandle,
    x: &Point,
    radius: f64,
    per_axis: usize,
    out: &mut Vec<Point>,
) -> f64 {
    let before = out.len();
    let spacing = raw_grid(space, x, radius, per_axis, out);
    // Order-preserving compaction keeps the scan order deterministic.
    let mut kept = before;
    for i in before..out.len() {
        if space.distance_unchecked(&out[i], x) <= radius + 1e-12 {
            out.swap(kept, i);
            kept += 1;
        }
    }
    out.truncate(kept);
    spacing
}

const COARSE_CAP: usize = 200_000;

fn raw_grid(
    space: &SpaceHandle,
    x: &Point,
    radius: f64,
    per_axis: usize,
    out: &mut Vec<Point>,
) -> f64 {
    match (space, x) {
        (SpaceHandle::Euclidean(dim), Point::Euclidean { coords }) => {
            let m = axis_count(per_axis, *dim);
            let spacing = 2.0 * radius / (m - 1) as f64;
            let mut idx = vec![0usize; *dim];
            loop {
                let point: Vec<f64> = coords
                    .iter()
                    .zip(&idx)
                    .map(|(c, &i)| c - radius + spacing * i as f64)
                    .collect();
                out.push(Point::Euclidean { coords: point });
                if !advance(&mut idx, m) {
                    break;
                }
            }
            spacing
        }
        (SpaceHandle::Hyperboloid(dim), Point::Hyperboloid { coords }) => {
            let m = axis_count(per_axis, *dim);
            let spacing = 2.0 * radius / (m - 1) as f64;
            let basis = hyperboloid_tangent_basis(coords);
            let mut idx = vec![0usize; *dim];
            loop {
                let mut u = vec![0.0; coords.len()];
                for (i, &step) in idx.iter().enumerate() {
                    let t = -radius + spacing * step as f64;
                    for (uc, bc) in u.iter_mut().zip(&basis[i]) {
                        *uc += t * bc;
                    }
                }
                out.push(Point::Hyperboloid {
                    coords: hyperboloid_exp(coords, &u),
                });
                if !advance(&mut idx, m) {
                    break;
                }
            }
            spacing
        }
        (SpaceHandle::Tree(tree), Point::Tree { .. }) => {
            let m = per_axis.max(3);
            let mut spacing = 0.0f64;
            for e in 0..tree.num_edges() {
                let len = tree.edge(e).len;
                spacing = spacing.max(len / (m - 1) as f64);
                for i in 0..m {
                    let offset = len * i as f64 / (m - 1) as f64;
                    out.push(
                        tree.point_on_edge(e, offset)
                            .expect("grid offsets stay within the edge"),
                    );
                }
            }
            spacing
        }
        (SpaceHandle::Product(components), Point::Product { components: xs }) => {
            let mut grids: Vec<Vec<Point>> = Vec::with_capacity(components.len());
            let mut spacing = 0.0f64;
            for (comp, xc) in components.iter().zip(xs) {
                let mut g = Vec::new();
                spacing = spacing.max(raw_grid(comp, xc, radius, per_axis, &mut g));
                grids.push(g);
            }
            // Cap the cartesian product by repeatedly thinning the largest
            // component grid (keeping first and last entries).
            loop {
                let total: usize = grids.iter().map(Vec::len).product();
                if total <= COARSE_CAP {
                    break;
                }
                let widest = grids
                    .iter()
                    .enumerate()
                    .max_by_key(|(_, g)| g.len())
                    .map(|(i, _)| i)
                    .unwrap();
                let g = &mut grids[widest];
                if g.len() <= 3 {
                    break;
                }
                let kept: Vec<Point> = g
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i % 2 == 0 || *i == g.len() - 1)
                    .map(|(_, p)| p.clone())
                    .collect();
                *g = kept;
            }
            let mut idx = vec![0usize; grids.len()];
            loop {
                out.push(Point::Product {
                    components: idx.iter().enumerate().map(|(c, &i)| grids[c][i].clone()).collect(),
                });
                if !advance_mixed(&mut idx, &grids) {
                    break;
                }
            }
            spacing
        }
        _ => unreachable!("validated point matches its space"),
    }
}

/// Points per axis, shrunk so the full grid stays under the cap; falls back
/// to 3 per axis for very high dimensions.
fn axis_count(per_axis: usize, dim: usize) -> usize {
    let mut m = per_axis.max(3);
    while m > 3 && (m as f64).powi(dim as i32) > COARSE_CAP as f64 {
        m = (m / 2).max(3);
    }
    m
}

fn advance(idx: &mut [usize], m: usize) -> bool {
    for i in idx.iter_mut() {
        *i += 1;
        if *i < m {
            return true;
        }
        *i = 0;
    }
    false
}

fn advance_mixed(idx: &mut [usize], grids: &[Vec<Point>]) -> bool {
    for (i, g) in idx.iter_mut().zip(grids) {
        *i += 1;
        if *i < g.len() {
            return true;
        }
        *i = 0;
    }
    false
}

/// Geodesic segments through `p` with arms of length about `h`, one per
/// independent direction of the space: coordinate axes in Euclidean space,
/// a Minkowski-orthonormal tangent frame on the hyperboloid, the directions
/// toward every vertex on a tree, and per-component segments on products.
fn direction_segments(space: &SpaceHandle, p: &Point, h: f64) -> Vec<(Point, Point)> {
    match (space, p) {
        (SpaceHandle::Euclidean(dim), Point::Euclidean { coords }) => (0..*dim)
            .map(|i| {
                let mut lo = coords.clone();
                let mut hi = coords.clone();
                lo[i] -= h;
                hi[i] += h;
                (Point::Euclidean { coords: lo }, Point::Euclidean { coords: hi })
            })
            .collect(),
        (SpaceHandle::Hyperboloid(dim), Point::Hyperboloid { coords }) => {
            let basis = hyperboloid_tangent_basis(coords);
            (0..*dim)
                .map(|i| {
                    let neg: Vec<f64> = basis[i].iter().map(|b| -h * b).collect();
                    let pos: Vec<f64> = basis[i].iter().map(|b| h * b).collect();
                    (
                        Point::Hyperboloid {
                            coords: hyperboloid_exp(coords, &neg),
                        },
                        Point::Hyperboloid {
                            coords: hyperboloid_exp(coords, &pos),
                        },
                    )
                })
                .collect()
        }
        (SpaceHandle::Tree(tree), Point::Tree { .. }) => tree_segments(tree, space, p, h),
        (SpaceHandle::Product(components), Point::Product { components: xs }) => {
            let mut segments = Vec::new();
            for (c, (comp, xc)) in components.iter().zip(xs).enumerate() {
                for (a, b) in direction_segments(comp, xc, h) {
                    let mut lo = xs.clone();
                    let mut hi = xs.clone();
                    lo[c] = a;
                    hi[c] = b;
                    segments.push((Point::Product { components: lo }, Point::Product { components: hi }));
                }
            }
            segments
        }
        _ => unreachable!("validated point matches its space"),
    }
}

/// Every geodesic leaving a tree point initially heads toward some vertex,
/// so arcs toward all vertices cover every direction.
fn tree_segments(tree: &TreeSpace, space: &SpaceHandle, p: &Point, h: f64) -> Vec<(Point, Point)> {
    let mut segments = Vec::new();
    for v in 0..tree.num_vertices() {
        let vp = tree.vertex_point(v);
        let d = space.distance_unchecked(p, &vp);
        if d <= 1e-15 {
            continue;
        }
        let arm = space.geodesic_unchecked(p, &vp, (h / d).min(1.0));
        segments.push((p.clone(), arm));
    }
    segments
}

/// Exhaustive argmin of the composite on a dense deterministic grid over
/// the search ball. No refinement, no randomness, nested under doubling of
/// `grid_density` (points sit at `i / density` fractions, so doubling only
/// adds points). Independent cross-check for `prox`; supports the small
/// spaces only.
pub fn prox_oracle(
    space: &SpaceHandle,
    f: &Objective,
    beta: f64,
    x: &Point,
    grid_density: usize,
) -> Result<ProxResult> {
    if grid_density < 10 {
        return Err(Error::InvalidParameter(format!(
            "oracle grid density must be >= 10, got {grid_density}"
        )));
    }
    if space != f.space() {
        return Err(Error::InvalidParameter(format!(
            "objective is bound to {}, oracle was asked on {}",
            f.space(),
            space
        )));
    }
    space.validate_point(x)?;
    let radius = prox_search_radius(f, beta, x)?;
    let fx = f.evaluate(x)?;
    if radius <= 0.0 {
        return Ok(ProxResult {
            point: x.clone(),
            objective: fx,
            search_radius: 0.0,
            evaluations: 1,
        });
    }

    let n = grid_density;
    let mut candidates: Vec<Point> = vec![x.clone()];
    match (space, x) {
        (SpaceHandle::Euclidean(1), Point::Euclidean { coords }) => {
            for i in 0..=n {
                let c = coords[0] - radius + 2.0 * radius * i as f64 / n as f64;
                candidates.push(Point::euclidean([c]));
            }
        }
        (SpaceHandle::Euclidean(2), Point::Euclidean { coords }) => {
            for i in 0..=n {
                for j in 0..=n {
                    candidates.push(Point::euclidean([
                        coords[0] - radius + 2.0 * radius * i as f64 / n as f64,
                        coords[1] - radius + 2.0 * radius * j as f64 / n as f64,
                    ]));
                }
            }
        }
        (SpaceHandle::Hyperboloid(1), Point::Hyperboloid { coords }) => {
            let basis = hyperboloid_tangent_basis(coords);
            for i in 1..=n {
                let t = radius * i as f64 / n as f64;
                for sign in [-1.0, 1.0] {
                    let u: Vec<f64> = basis[0].iter().map(|b| sign * t * b).collect();
                    candidates.push(Point::Hyperboloid {
                        coords: hyperboloid_exp(coords, &u),
                    });
                }
            }
        }
        (SpaceHandle::Hyperboloid(2), Point::Hyperboloid { coords }) => {
            // Polar tangent grid: different enumeration from the solver's
            // box grid on purpose.
            let basis = hyperboloid_tangent_basis(coords);
            let angles = 4 * n;
            for i in 1..=n {
                let t = radius * i as f64 / n as f64;
                for j in 0..angles {
                    let theta = 2.0 * std::f64::consts::PI * j as f64 / angles as f64;
                    let (s, c) = theta.sin_cos();
                    let u: Vec<f64> = basis[0]
                        .iter()
                        .zip(&basis[1])
                        .map(|(b1, b2)| t * (c * b1 + s * b2))
                        .collect();
                    candidates.push(Point::Hyperboloid {
                        coords: hyperboloid_exp(coords, &u),
                    });
                }
            }
        }
        (SpaceHandle::Tree(tree), Point::Tree { .. }) => {
            for e in 0..tree.num_edges() {
                let len = tree.edge(e).len;
                for i in 0..=n {
                    let offset = len * i as f64 / n as f64;
                    candidates.push(
                        tree.point_on_edge(e, offset)
                            .expect("grid offsets stay within the edge"),
                    );
                }
            }
        }
        _ => {
            return Err(Error::UnsupportedSpace(format!(
                "oracle supports euclidean(<=2), hyperboloid(<=2), and trees; got {space}"
            )))
        }
    }

    let inv_two_beta = 0.5 / beta;
    let mut best = f64::INFINITY;
    let mut best_point = x.clone();
    let mut evaluations = 0usize;
    for cand in candidates {
        if space.distance_unchecked(&cand, x) > radius + 1e-12 {
            continue;
        }
        if let Some(b) = f.ball() {
            if space.distance_unchecked(&cand, &b.center) > b.radius + 1e-12 {
                continue;
            }
        }
        let d = space.distance_unchecked(x, &cand);
        let v = f.evaluate(&cand)? + d * d * inv_two_beta;
        evaluations += 1;
        if v < best {
            best = v;
            best_point = cand;
        }
    }
    Ok(ProxResult {
        point: best_point,
        objective: best,
        search_radius: radius,
        evaluations,
    })
}

/// Slack in the prox characterization inequality at one probe `(y, lambda)`:
///
/// `max{f(y), f(xbar)} + (l/2)(l/beta - gamma + l gamma) d^2(y, xbar)
///  + (l/beta) <x xbar, xbar y> - f(xbar)`
///
/// Nonnegative (within solver tolerance) whenever `xbar` is a prox point of
/// `x`; `gamma` is taken from the objective.
pub fn prox_inequality_residual(
    space: &SpaceHandle,
    f: &Objective,
    beta: f64,
    x: &Point,
    xbar: &Point,
    y: &Point,
    lambda: f64,
) -> Result<f64> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "beta must be positive, got {beta}"
        )));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "lambda must lie in [0, 1], got {lambda}"
        )));
    }
    let gamma = f.gamma();
    let fy = f.evaluate(y)?;
    let fxbar = f.evaluate(xbar)?;
    let d = space.distance(y, xbar)?;
    let ql = space.quasilin(x, xbar, xbar, y)?;
    Ok(fy.max(fxbar)
        + 0.5 * lambda * (lambda / beta - gamma + lambda * gamma) * d * d
        + lambda / beta * ql
        - fxbar)
}

/// `d(x, prox(x))`. Zero exactly at minimizers of `f`, bounded away from
/// zero elsewhere (fixed points of the prox map are minimizers).
pub fn fixed_point_gap(
    space: &SpaceHandle,
    f: &Objective,
    params: &ProxParams,
    x: &Point,
) -> Result<f64> {
    let result = prox(space, f, params, x)?;
    space.distance(x, &result.point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Objective;
    use crate::space::RandomSampler;

    fn e1() -> SpaceHandle {
        SpaceHandle::euclidean(1).unwrap()
    }

    fn quadratic_r1() -> Objective {
        Objective::quadratic(e1(), 1.0, Point::euclidean([0.0])).unwrap()
    }

    #[test]
    fn search_radius_formula() {
        let s = SpaceHandle::euclidean(2).unwrap();
        let f = Objective::quadratic(s, 1.0, Point::euclidean([0.0, 0.0])).unwrap();
        let r = prox_search_radius(&f, 1.0, &Point::euclidean([1.0, 0.0])).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        // Doubling beta scales the radius by sqrt 2.
        let r2 = prox_search_radius(&f, 2.0, &Point::euclidean([1.0, 0.0])).unwrap();
        assert!((r2 - r * 2f64.sqrt()).abs() < 1e-12);
        // At the minimizer the radius collapses.
        let r0 = prox_search_radius(&f, 1.0, &Point::euclidean([0.0, 0.0])).unwrap();
        assert_eq!(r0, 0.0);
    }

    #[test]
    fn quadratic_prox_matches_closed_form() {
        let f = quadratic_r1();
        let params = ProxParams::default();
        let result = prox(&e1(), &f, &params, &Point::euclidean([3.0])).unwrap();
        // argmin y^2 + (y-3)^2/2 = 1; composite there is 1 + 2 = 3.
        let Point::Euclidean { coords } = &result.point else {
            panic!("euclidean point expected")
        };
        assert!((coords[0] - 1.0).abs() < 1e-9, "got {}", coords[0]);
        assert!((result.objective - 3.0).abs() < 1e-9);
        assert!(result.evaluations > 0);
        assert!((result.search_radius - 18f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn absolute_value_prox_is_the_soft_threshold() {
        let f = Objective::dist_to(e1(), Point::euclidean([0.0]), 5.0).unwrap();
        let params = ProxParams::default();
        let result = prox(&e1(), &f, &params, &Point::euclidean([3.0])).unwrap();
        let Point::Euclidean { coords } = &result.point else {
            panic!("euclidean point expected")
        };
        assert!((coords[0] - 2.0).abs() < 1e-7, "got {}", coords[0]);
    }

    #[test]
    fn prox_at_the_minimizer_stays_put() {
        let f = quadratic_r1();
        let result = prox(&e1(), &f, &ProxParams::default(), &Point::euclidean([0.0])).unwrap();
        assert_eq!(result.point, Point::euclidean([0.0]));
        assert_eq!(result.search_radius, 0.0);
    }

    #[test]
    fn prox_rejects_mismatched_space() {
        let f = quadratic_r1();
        let other = SpaceHandle::euclidean(2).unwrap();
        let err = prox(&other, &f, &ProxParams::default(), &Point::euclidean([0.0, 0.0]));
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn oracle_agrees_with_the_solver_on_r1() {
        let f = quadratic_r1();
        let x = Point::euclidean([3.0]);
        let solver = prox(&e1(), &f, &ProxParams::default(), &x).unwrap();
        let oracle = prox_oracle(&e1(), &f, 1.0, &x, 200).unwrap();
        assert!(solver.objective <= oracle.objective + 1e-8);
        let res = 2.0 * oracle.search_radius / 200.0;
        assert!(oracle.objective - solver.objective <= 3.0 * res + res * res);
    }

    #[test]
    fn oracle_is_monotone_under_density_doubling() {
        let s = SpaceHandle::euclidean(2).unwrap();
        let f = Objective::quadratic(s.clone(), 1.0, Point::euclidean([0.3, -0.2])).unwrap();
        let x = Point::euclidean([1.0, 1.0]);
        let coarse = prox_oracle(&s, &f, 0.7, &x, 16).unwrap();
        let fine = prox_oracle(&s, &f, 0.7, &x, 32).unwrap();
        assert!(fine.objective <= coarse.objective + 1e-15);
    }

    #[test]
    fn oracle_refuses_large_spaces_and_thin_grids() {
        let s3 = SpaceHandle::euclidean(3).unwrap();
        let f = Objective::quadratic(s3.clone(), 1.0, Point::euclidean([0.0, 0.0, 0.0])).unwrap();
        let x = Point::euclidean([1.0, 1.0, 1.0]);
        assert!(matches!(
            prox_oracle(&s3, &f, 1.0, &x, 20),
            Err(Error::UnsupportedSpace(_))
        ));
        let f1 = quadratic_r1();
        assert!(matches!(
            prox_oracle(&e1(), &f1, 1.0, &Point::euclidean([1.0]), 9),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn tree_prox_lands_on_the_path_toward_the_center()  {
        let tree = TreeSpace::small_path();
        let space = SpaceHandle::tree(tree.clone());
        let f = Objective::quadratic(space.clone(), 1.0, tree.vertex_point(2)).unwrap();
        let leaf = tree.vertex_point(0);
        let result = prox(&space, &f, &ProxParams::default(), &leaf).unwrap();
        // Path coordinate t from vertex 0: minimize (5-t)^2 + t^2/2, t* = 10/3.
        let t = space.distance(&leaf, &result.point).unwrap();
        assert!((t - 10.0 / 3.0).abs() < 1e-7, "got {t}");
        let oracle = prox_oracle(&space, &f, 1.0, &leaf, 100).unwrap();
        assert!(result.objective <= oracle.objective + 1e-8);
    }

    #[test]
    fn prox_inequality_residual_hand_value() {
        let f = quadratic_r1();
        let r = prox_inequality_residual(
            &e1(),
            &f,
            1.0,
            &Point::euclidean([3.0]),
            &Point::euclidean([1.0]),
            &Point::euclidean([0.0]),
            0.5,
        )
        .unwrap();
        assert!((r - 0.875).abs() < 1e-12, "got {r}");
    }

    #[test]
    fn prox_inequality_residual_degenerate_probes() {
        let f = quadratic_r1();
        let x = Point::euclidean([3.0]);
        let xbar = Point::euclidean([1.0]);
        // lambda = 0 leaves max{f(y), f(xbar)} - f(xbar) >= 0.
        let r0 = prox_inequality_residual(&e1(), &f, 1.0, &x, &xbar, &Point::euclidean([7.0]), 0.0)
            .unwrap();
        assert!(r0 >= 0.0);
        // y = xbar collapses every term.
        let req = prox_inequality_residual(&e1(), &f, 1.0, &x, &xbar, &xbar, 0.8).unwrap();
        assert_eq!(req, 0.0);
        assert!(matches!(
            prox_inequality_residual(&e1(), &f, 1.0, &x, &xbar, &xbar, 1.5),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn certified_prox_points_satisfy_the_inequality_under_sampling() {
        let f = quadratic_r1();
        let x = Point::euclidean([2.0]);
        let xbar = prox(&e1(), &f, &ProxParams::default(), &x).unwrap().point;
        let mut sampler = RandomSampler::with_scale(9, 3.0);
        for _ in 0..1000 {
            let y = sampler.sample(&e1());
            let lambda = sampler.uniform01();
            let r = prox_inequality_residual(&e1(), &f, 1.0, &x, &xbar, &y, lambda).unwrap();
            assert!(r >= -1e-6, "residual {r} at y={y:?} lambda={lambda}");
        }
    }

    #[test]
    fn fixed_point_gap_closed_form() {
        let f = quadratic_r1();
        // prox of x under f = y^2 with beta 1 is x/3; gap from x=1 is 2/3.
        let gap = fixed_point_gap(&e1(), &f, &ProxParams::default(), &Point::euclidean([1.0]))
            .unwrap();
        assert!((gap - 2.0 / 3.0).abs() < 1e-9, "got {gap}");
        let at_min = fixed_point_gap(&e1(), &f, &ProxParams::default(), &Point::euclidean([0.0]))
            .unwrap();
        assert!(at_min <= 1e-6);
    }

    #[test]
    fn composite_descends_from_the_base_point() {
        let s = SpaceHandle::euclidean(2).unwrap();
        let f = Objective::max_combo(s.clone(), 1.0, Point::euclidean([0.0, 0.0]), 5.0).unwrap();
        let mut sampler = RandomSampler::new(5);
        for _ in 0..25 {
            let x = f.sample_domain(&mut sampler);
            let beta = 0.2 + 2.0 * sampler.uniform01();
            let result = prox(&s, &f, &ProxParams::with_beta(beta), &x).unwrap();
            let fx = f.evaluate(&x).unwrap();
            assert!(result.objective <= fx + 1e-12);
            assert!(
                s.distance(&x, &result.point).unwrap() <= result.search_radius + 1e-9
            );
        }
    }
}
