//! The bundled invariant suite: geometry axioms on every registered space,
//! the strong-quasiconvexity check on every catalog entry, solver-vs-oracle
//! agreement on the oracle-sized fixtures, and one certified iteration run
//! per entry. Mutations inject a known bug so the checkers can prove they
//! still bite.

use clap::ValueEnum;
use sqprox_core::{
    catalog, certify, check_cat0, check_hyperbolic_axioms, parse_space, prox, prox_oracle,
    prox_search_radius, BrokenGeodesic, CatalogEntry, Geometry, Objective, ObjectiveKind, Point,
    ProxParams, RandomSampler, Result, Schedule, SpaceHandle, StopReason, StopRule, TreeSpace,
    run_ppa,
};

const EPS_GRID: [f64; 5] = [1.0, 0.3, 0.1, 0.03, 0.01];
const SLACK_TOL: f64 = 1e-6;
const ORACLE_DENSITY: usize = 40;
const ORACLE_DRAWS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mutation {
    /// Warp one space's geodesic parameterization.
    BrokenGeodesic,
    /// Add a concave objective claiming a positive modulus.
    ConcaveObjective,
    /// Corrupt an iterate of an otherwise valid trace before certifying.
    PerturbedTrace,
}

struct Tally {
    checks: usize,
    failed: usize,
}

impl Tally {
    fn record(&mut self, pass: bool) -> &'static str {
        self.checks += 1;
        if pass {
            "PASS"
        } else {
            self.failed += 1;
            "FAIL"
        }
    }
}

pub fn run_suite(seed: u64, samples: usize, tol: f64, mutate: Option<Mutation>) -> Result<bool> {
    let mut tally = Tally { checks: 0, failed: 0 };
    let entries = catalog();

    geometry_phase(seed, samples, tol, mutate, &mut tally)?;
    sqc_phase(seed, samples, tol, mutate, &entries, &mut tally)?;
    prox_phase(seed, &entries, &mut tally)?;
    iteration_phase(seed, mutate, &entries, &mut tally)?;

    println!(
        "suite: {} checks, {} failed (seed {seed}, samples {samples}, tol {tol:e})",
        tally.checks, tally.failed
    );
    Ok(tally.failed == 0)
}

const SPACES: [&str; 7] = [
    "euclidean:1",
    "euclidean:2",
    "euclidean:3",
    "hyperboloid:2",
    "tree:path",
    "tree:branched",
    "product:euclidean:1+tree:path",
];

fn geometry_phase(
    seed: u64,
    samples: usize,
    tol: f64,
    mutate: Option<Mutation>,
    tally: &mut Tally,
) -> Result<()> {
    for (i, desc) in SPACES.iter().enumerate() {
        let space = parse_space(desc)?;
        let broken;
        let geom: &dyn Geometry = if mutate == Some(Mutation::BrokenGeodesic) && i == 1 {
            broken = BrokenGeodesic(space.clone());
            &broken
        } else {
            &space
        };
        let mut sampler = RandomSampler::new(seed.wrapping_add(i as u64));
        let axioms = check_hyperbolic_axioms(geom, &mut sampler, samples, tol)?;
        let cat0 = check_cat0(geom, &mut sampler, samples, tol)?;
        let mut worst = f64::NEG_INFINITY;
        let mut all = true;
        for line in axioms.checks.iter().chain(&cat0.checks) {
            worst = worst.max(line.max_violation);
            if !line.pass {
                all = false;
                println!(
                    "geometry {} FAILED CHECK `{}`: max violation {:e} > tol {:e}",
                    geom.label(),
                    line.name,
                    line.max_violation,
                    tol
                );
            }
        }
        let verdict = tally.record(all);
        println!(
            "geometry {} {verdict} ({} checks, worst violation {:e})",
            geom.label(),
            axioms.checks.len() + cat0.checks.len(),
            worst
        );
    }
    Ok(())
}

fn sqc_phase(
    seed: u64,
    samples: usize,
    tol: f64,
    mutate: Option<Mutation>,
    entries: &[CatalogEntry],
    tally: &mut Tally,
) -> Result<()> {
    let mut injected = Vec::new();
    if mutate == Some(Mutation::ConcaveObjective) {
        let e2 = SpaceHandle::euclidean(2)?;
        let origin = e2.origin();
        injected.push(CatalogEntry {
            space: e2.clone(),
            objective: Objective::neg_quadratic(e2, origin, 1.0)?,
        });
    }
    for (i, entry) in entries.iter().chain(&injected).enumerate() {
        let mut sampler = RandomSampler::new(seed.wrapping_add(0x53_51_43).wrapping_add(i as u64));
        let report = entry.objective.check_sqc(&mut sampler, samples, tol)?;
        let verdict = tally.record(report.pass);
        println!(
            "sqc {} @ {} {verdict} (min residual {:e}, estimated gamma {})",
            entry.objective.descriptor(),
            entry.space,
            report.min_residual,
            report.estimated_gamma
        );
    }
    Ok(())
}

fn oracle_supported(space: &SpaceHandle) -> bool {
    matches!(
        space,
        SpaceHandle::Euclidean(1 | 2) | SpaceHandle::Tree(_) | SpaceHandle::Hyperboloid(1 | 2)
    )
}

/// Worst-case geodesic distance from any point of the search ball to the
/// oracle's nearest grid point.
fn oracle_offset(space: &SpaceHandle, tree: Option<&TreeSpace>, radius: f64, n: usize) -> f64 {
    let n = n as f64;
    match space {
        SpaceHandle::Euclidean(d) => radius / n * (*d as f64).sqrt(),
        SpaceHandle::Hyperboloid(1) => radius / (2.0 * n),
        SpaceHandle::Hyperboloid(_) => {
            radius / (2.0 * n) + radius.sinh() * std::f64::consts::PI / (4.0 * n)
        }
        SpaceHandle::Tree(_) => {
            let longest = tree
                .map(|t| t.edges().iter().map(|e| e.len).fold(0.0, f64::max))
                .unwrap_or(0.0);
            longest / (2.0 * n)
        }
        SpaceHandle::Product(_) => f64::INFINITY,
    }
}

/// Sound bound on how far the oracle's best value can sit above the true
/// prox minimum, given its grid offset `h`: modulus of continuity of the
/// objective plus that of the quadratic coupling term.
fn oracle_value_gap(f: &Objective, x: &Point, beta: f64, radius: f64, h: f64) -> f64 {
    let space = f.space();
    let objective_term = match f.kind() {
        ObjectiveKind::Quadratic { weight, center } => {
            let reach = space.distance(x, center).unwrap_or(0.0) + radius;
            weight * (2.0 * reach + h) * h
        }
        ObjectiveKind::DistTo { .. } => h,
        ObjectiveKind::SqrtDist { .. } => h.sqrt(),
        ObjectiveKind::MaxCombo { center, .. } => {
            let reach = space.distance(x, center).unwrap_or(0.0) + radius;
            h.sqrt().max((2.0 * reach + h) * h)
        }
        ObjectiveKind::NegQuadratic { .. } => f64::INFINITY,
    };
    objective_term + (2.0 * radius + h) * h / (2.0 * beta)
}

fn prox_phase(seed: u64, entries: &[CatalogEntry], tally: &mut Tally) -> Result<()> {
    for (i, entry) in entries.iter().enumerate() {
        if !oracle_supported(&entry.space) {
            continue;
        }
        let f = &entry.objective;
        let xstar = f.known_minimizer().unwrap();
        let tree = match &entry.space {
            SpaceHandle::Tree(t) => Some(t.as_ref()),
            _ => None,
        };
        let mut sampler = RandomSampler::new(seed.wrapping_add(0x0F_AC_1E).wrapping_add(i as u64));
        let mut worst_above = f64::NEG_INFINITY;
        let mut ok = true;
        for _ in 0..ORACLE_DRAWS {
            let mut x = f.sample_domain(&mut sampler);
            let d = entry.space.distance(&x, xstar)?;
            if d > 1.0 {
                x = entry.space.geodesic(xstar, &x, 1.0 / d)?;
            }
            let beta = sampler.uniform_in(0.25, 1.0);
            let params = ProxParams::with_beta(beta);
            let solved = prox(&entry.space, f, &params, &x)?;
            let oracle = prox_oracle(&entry.space, f, beta, &x, ORACLE_DENSITY)?;
            let radius = prox_search_radius(f, beta, &x)?;
            let h = oracle_offset(&entry.space, tree, radius, ORACLE_DENSITY);
            let gap = oracle_value_gap(f, &x, beta, radius, h);
            let above = solved.objective - oracle.objective;
            worst_above = worst_above.max(above);
            // The refined solver may never lose to the dense grid, and the
            // dense grid may trail the solver by at most its resolution.
            if above > 1e-6 || -above > gap + 1e-6 {
                ok = false;
            }
        }
        let verdict = tally.record(ok);
        println!(
            "prox {} @ {} {verdict} ({} draws, worst solver-minus-oracle {:e})",
            f.descriptor(),
            entry.space,
            ORACLE_DRAWS,
            worst_above
        );
    }
    Ok(())
}

fn iteration_phase(
    seed: u64,
    mutate: Option<Mutation>,
    entries: &[CatalogEntry],
    tally: &mut Tally,
) -> Result<()> {
    let schedule = Schedule::constant(1.0)?;
    let stop = StopRule {
        eps: 1e-6,
        max_iter: 10_000,
    };
    for (i, entry) in entries.iter().enumerate() {
        let f = &entry.objective;
        let space = &entry.space;
        let xstar = f.known_minimizer().unwrap();
        let mut sampler = RandomSampler::new(seed.wrapping_add(0x17_E8_47).wrapping_add(i as u64));
        let mut x0 = f.sample_domain(&mut sampler);
        let d = space.distance(&x0, xstar)?;
        if d > 2.0 {
            x0 = space.geodesic(xstar, &x0, 2.0 / d)?;
        }
        let trace = run_ppa(space, f, &x0, &schedule, &ProxParams::default(), &stop)?;
        let d0 = space.distance(&x0, xstar)?;
        let cert = certify(space, &trace, f, f.gamma(), 1.0, (d0 * d0).max(1e-12), &EPS_GRID)?;
        let worst_slack = trace
            .fejer_slack
            .as_ref()
            .unwrap()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
            .min(0.0);
        let converged = trace.stop_reason != StopReason::MaxIter;
        let ok = cert.all_ok() && worst_slack >= -SLACK_TOL && converged;
        let verdict = tally.record(ok);
        println!(
            "run {} @ {} {verdict} ({} steps, stop {:?}, worst slack {:e}, rate cert {})",
            f.descriptor(),
            space,
            trace.steps(),
            trace.stop_reason,
            worst_slack,
            if cert.all_ok() { "ok" } else { "violated" }
        );
    }

    if mutate == Some(Mutation::PerturbedTrace) {
        let space = SpaceHandle::euclidean(1)?;
        let f = Objective::quadratic(space.clone(), 1.0, Point::euclidean([0.0]))?;
        let mut trace = run_ppa(
            &space,
            &f,
            &Point::euclidean([1.0]),
            &schedule,
            &ProxParams::default(),
            &StopRule { eps: 1e-10, max_iter: 60 },
        )?;
        // Damage an iterate past phi(1) = 5; the certificate must notice.
        trace.iterates[8] = Point::euclidean([2.0]);
        trace.f_values[8] = 4.0;
        let cert = certify(&space, &trace, &f, f.gamma(), 1.0, 1.0, &EPS_GRID)?;
        let verdict = tally.record(cert.all_ok());
        println!("run quadratic:a=1,c=0 @ {space} (perturbed trace) {verdict}");
    }
    Ok(())
}
