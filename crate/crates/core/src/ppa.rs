//! The proximal point iteration `x^{k+1} in Prox_{c_k f}(x^k)`, its per-step
//! Fejer certification, the descent-witness scan, and the explicit
//! convergence-rate certificates
//!
//! `phi(eps) = ceil(4b / (eps^2 ((1 - l0) gamma c - l0)^2)) + 1`
//!
//! with `l0 = (1/2) gamma c / (1 + gamma c)` and `b >= d^2(x^0, x^*)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::prox::{prox, ProxParams};
use crate::space::{Point, SpaceHandle};

/// Step-size schedule (c_k). All produced values stay at or above
/// `c_lower`, the `c` entering the rate constants.
#[derive(Clone, Debug)]
pub struct Schedule {
    kind: ScheduleKind,
    c_lower: f64,
}

#[derive(Clone, Debug)]
enum ScheduleKind {
    Constant(f64),
    List(Vec<f64>),
    RandomIn { lo: f64, hi: f64, seed: u64 },
}

impl Schedule {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "schedule constant must be positive, got {c}"
            )));
        }
        Ok(Schedule {
            kind: ScheduleKind::Constant(c),
            c_lower: c,
        })
    }

    /// Explicit step list; iterations beyond the end repeat the last value,
    /// so the schedule never collapses to zero.
    pub fn list(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("schedule list must be non-empty".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "schedule value {i} must be positive, got {v}"
                )));
            }
        }
        let c_lower = values.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(Schedule {
            kind: ScheduleKind::List(values),
            c_lower,
        })
    }

    /// Independent draws from `[lo, hi]`, deterministic per index.
    pub fn random_in(lo: f64, hi: f64, seed: u64) -> Result<Self> {
        if !(lo > 0.0 && lo.is_finite() && hi >= lo && hi.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "random schedule needs 0 < lo <= hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Schedule {
            kind: ScheduleKind::RandomIn { lo, hi, seed },
            c_lower: lo,
        })
    }

    pub fn value(&self, k: usize) -> f64 {
        match &self.kind {
            ScheduleKind::Constant(c) => *c,
            ScheduleKind::List(values) => values[k.min(values.len() - 1)],
            ScheduleKind::RandomIn { lo, hi, seed } => {
                // Counter-mode draw: value k is a pure function of (seed, k),
                // independent of how many values were requested before.
                let mut rng = ChaCha8Rng::seed_from_u64(
                    seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
                );
                rng.gen_range(*lo..=*hi)
            }
        }
    }

    pub fn c_lower(&self) -> f64 {
        self.c_lower
    }
}

#[derive(Clone, Debug)]
pub struct StopRule {
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            eps: 1e-6,
            max_iter: 100_000,
        }
    }
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "stopping eps must be positive, got {}",
                self.eps
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EpsReached,
    MaxIter,
    Stalled,
}

/// Full record of one iteration run. `iterates` has one more entry than
/// `c_values`/`step_dists`; the distance and slack columns exist only when
/// the minimizer is known.
#[derive(Clone, Debug)]
pub struct PpaTrace {
    pub iterates: Vec<Point>,
    pub c_values: Vec<f64>,
    pub f_values: Vec<f64>,
    pub step_dists: Vec<f64>,
    pub dist_to_star: Option<Vec<f64>>,
    pub fejer_slack: Option<Vec<f64>>,
    pub stop_reason: StopReason,
}

impl PpaTrace {
    /// Number of proximal steps taken (iterate count minus one).
    pub fn steps(&self) -> usize {
        self.step_dists.len()
    }
}

/// Runs the iteration from `x0`, one prox solve per step with `beta = c_k`.
/// Stops on `step_dist < eps` (fixed points of the prox map are minimizers,
/// so small steps certify closeness), on `max_iter`, or when the composite
/// descent `f(x^k) - (f(x^{k+1}) + d^2/(2 c_k))` falls below `1e-14` of the
/// current objective scale -- the inner solver has no resolution left then.
pub fn run_ppa(
    space: &SpaceHandle,
    f: &Objective,
    x0: &Point,
    schedule: &Schedule,
    params: &ProxParams,
    stop: &StopRule,
) -> Result<PpaTrace> {
    stop.validate()?;
    params.validate()?;
    space.validate_point(x0)?;

    let mut iterates = vec![x0.clone()];
    let mut f_values = vec![f.evaluate(x0)?];
    let mut c_values = Vec::new();
    let mut step_dists = Vec::new();
    let mut stop_reason = StopReason::MaxIter;

    for k in 0..stop.max_iter {
        let ck = schedule.value(k);
        let step_params = ProxParams {
            beta: ck,
            ..params.clone()
        };
        let current = iterates.last().unwrap().clone();
        let result = prox(space, f, &step_params, &current)?;
        let step = space.distance(&current, &result.point)?;
        let f_now = *f_values.last().unwrap();
        let f_next = f.evaluate(&result.point)?;

        c_values.push(ck);
        step_dists.push(step);
        iterates.push(result.point);
        f_values.push(f_next);

        if step < stop.eps {
            stop_reason = StopReason::EpsReached;
            break;
        }
        // Relative stall test: an absolute threshold would misfire on both
        // tiny objective scales (never stalls) and huge ones (stalls at once).
        let descent = f_now - result.objective;
        if descent < 1e-14 * f_now.abs().max(result.objective.abs()) {
            stop_reason = StopReason::Stalled;
            break;
        }
    }

    let (dist_to_star, fejer_slack) = match f.known_minimizer() {
        Some(xstar) => {
            let dists: Vec<f64> = iterates
                .iter()
                .map(|x| space.distance_unchecked(x, xstar))
                .collect();
            let slacks = slacks_from_dists(&dists, &step_dists);
            (Some(dists), Some(slacks))
        }
        None => (None, None),
    };

    Ok(PpaTrace {
        iterates,
        c_values,
        f_values,
        step_dists,
        dist_to_star,
        fejer_slack,
        stop_reason,
    })
}

fn slacks_from_dists(dists: &[f64], steps: &[f64]) -> Vec<f64> {
    steps
        .iter()
        .enumerate()
        .map(|(k, &s)| dists[k] * dists[k] - s * s - dists[k + 1] * dists[k + 1])
        .collect()
}

/// Per-step slack in the Fejer inequality against `xstar`:
///
/// `slack_k = d^2(x^k, x*) - d^2(x^k, x^{k+1}) - d^2(x^{k+1}, x*)`.
///
/// Nonnegative (within inner-solver tolerance) for exact prox steps toward
/// the minimizer; one entry per step.
pub fn fejer_slacks(space: &SpaceHandle, trace: &PpaTrace, xstar: &Point) -> Result<Vec<f64>> {
    space.validate_point(xstar)?;
    let dists: Vec<f64> = trace
        .iterates
        .iter()
        .map(|x| space.distance_unchecked(x, xstar))
        .collect();
    Ok(slacks_from_dists(&dists, &trace.step_dists))
}

/// First index `k <= ceil(b / eps)` with `a[k] - a[k+1] < eps`. Exists for
/// every nonnegative sequence with `a[0] <= b`: if all early differences
/// were at least `eps`, the sequence would drop below zero.
pub fn descent_witness(a: &[f64], b: f64, eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if a.is_empty() {
        return Err(Error::PreconditionViolated("sequence is empty".into()));
    }
    for (i, &v) in a.iter().enumerate() {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::PreconditionViolated(format!(
                "sequence must be nonnegative, a[{i}] = {v}"
            )));
        }
    }
    if b < a[0] {
        return Err(Error::PreconditionViolated(format!(
            "bound b = {b} is below a[0] = {}",
            a[0]
        )));
    }
    let bound = (b / eps).ceil().min(usize::MAX as f64) as usize;
    let last = bound.min(a.len().saturating_sub(2));
    for k in 0..=last {
        if a[k] - a[k + 1] < eps {
            return Ok(k);
        }
    }
    Err(Error::PreconditionViolated(format!(
        "no witness up to index {bound}; the sequence is too short for the bound"
    )))
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn ceil_to_u64(v: f64) -> u64 {
    let c = v.ceil();
    if c >= u64::MAX as f64 {
        u64::MAX
    } else if c <= 0.0 {
        0
    } else {
        c as u64
    }
}

/// Guaranteed iteration count: every `k >= rate_phi(...)` has
/// `d(x^k, x*) < eps`. Computes `l0 = (1/2) gamma c / (1 + gamma c)` and
/// returns `ceil(4b / (eps^2 ((1 - l0) gamma c - l0)^2)) + 1`; the inner
/// margin equals `gamma c / 2`, so it is positive for every valid input.
pub fn rate_phi(gamma: f64, c: f64, b: f64, eps: f64) -> Result<u64> {
    let gamma = positive("gamma", gamma)?;
    let c = positive("c", c)?;
    let b = positive("b", b)?;
    let eps = positive("eps", eps)?;
    let gc = gamma * c;
    let lambda0 = 0.5 * gc / (1.0 + gc);
    let margin = (1.0 - lambda0) * gc - lambda0;
    Ok(ceil_to_u64(4.0 * b / (eps * eps * margin * margin)).saturating_add(1))
}

/// Value bound companion: every `k >= rate_phi_values(...)` has
/// `f(x^k) - min f < eps`. Definitionally `rate_phi(..., sqrt(2 c eps)) + 1`.
pub fn rate_phi_values(gamma: f64, c: f64, b: f64, eps: f64) -> Result<u64> {
    let c = positive("c", c)?;
    let eps = positive("eps", eps)?;
    Ok(rate_phi(gamma, c, b, (2.0 * c * eps).sqrt())?.saturating_add(1))
}

/// Rate certificate for one trace: for each epsilon, whether every in-trace
/// index at or past the computed bound actually satisfies the iterate and
/// value guarantees.
#[derive(Clone, Debug, Serialize)]
pub struct RateCertificate {
    pub gamma: f64,
    pub c: f64,
    pub b: f64,
    pub lambda0: f64,
    pub epsilon_grid: Vec<f64>,
    /// `rate_phi(gamma, c, b, eps)` per grid entry (iterate bound).
    pub phi_values: Vec<u64>,
    /// `rate_phi_values(gamma, c, b, eps)` per grid entry (value bound).
    pub value_phi_values: Vec<u64>,
    pub iterate_bound_ok: Vec<bool>,
    pub value_bound_ok: Vec<bool>,
}

impl RateCertificate {
    pub fn all_ok(&self) -> bool {
        self.iterate_bound_ok.iter().all(|&ok| ok) && self.value_bound_ok.iter().all(|&ok| ok)
    }
}

/// Checks both rate bounds over a trace, against the ground truth stored
/// in `f`. `b` must dominate `d^2(x^0, x*)`.
pub fn certify(
    space: &SpaceHandle,
    trace: &PpaTrace,
    f: &Objective,
    gamma: f64,
    c: f64,
    b: f64,
    eps_grid: &[f64],
) -> Result<RateCertificate> {
    let xstar = f.known_minimizer().ok_or(Error::MissingGroundTruth)?;
    let min_f = f.known_min().ok_or(Error::MissingGroundTruth)?;
    positive("gamma", gamma)?;
    positive("c", c)?;
    positive("b", b)?;
    if eps_grid.is_empty() {
        return Err(Error::InvalidParameter("epsilon grid must be non-empty".into()));
    }
    let d0 = space.distance(&trace.iterates[0], xstar)?;
    if b < d0 * d0 * (1.0 - 1e-12) {
        return Err(Error::PreconditionViolated(format!(
            "b = {b} does not dominate d^2(x0, x*) = {}",
            d0 * d0
        )));
    }

    let gc = gamma * c;
    let lambda0 = 0.5 * gc / (1.0 + gc);
    let mut phi_values = Vec::with_capacity(eps_grid.len());
    let mut value_phi_values = Vec::with_capacity(eps_grid.len());
    let mut iterate_bound_ok = Vec::with_capacity(eps_grid.len());
    let mut value_bound_ok = Vec::with_capacity(eps_grid.len());

    for &eps in eps_grid {
        let phi = rate_phi(gamma, c, b, eps)?;
        let phi_v = rate_phi_values(gamma, c, b, eps)?;
        let iterates_ok = trace
            .iterates
            .iter()
            .enumerate()
            .filter(|(k, _)| *k as u64 >= phi)
            .all(|(_, x)| space.distance_unchecked(x, xstar) < eps);
        let values_ok = trace
            .f_values
            .iter()
            .enumerate()
            .filter(|(k, _)| *k as u64 >= phi_v)
            .all(|(_, fv)| fv - min_f < eps);
        phi_values.push(phi);
        value_phi_values.push(phi_v);
        iterate_bound_ok.push(iterates_ok);
        value_bound_ok.push(values_ok);
    }

    Ok(RateCertificate {
        gamma,
        c,
        b,
        lambda0,
        epsilon_grid: eps_grid.to_vec(),
        phi_values,
        value_phi_values,
        iterate_bound_ok,
        value_bound_ok,
    })
}
