//! Experiment config files: flat `key = value` text, one pair per line,
//! `#` comments, dotted keys for the inner-solver block. Descriptors and
//! point literals use the library grammar. Example:
//!
//! ```text
//! space     = euclidean:2
//! objective = quadratic:a=0.5,c=1,1
//! x0        = 4,-2
//! c         = 1.0
//! eps       = 1e-8
//! inner.refine_iters = 60
//! ```

use std::collections::HashMap;
use std::path::PathBuf;

use sqprox_core::{
    parse_objective, parse_point, parse_space, Error, Objective, Point, ProxParams, Result,
    Schedule, SpaceHandle,
};

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub space: SpaceHandle,
    pub objective: Objective,
    pub x0: Point,
    pub schedule: Schedule,
    pub eps: f64,
    pub eps_grid: Vec<f64>,
    pub max_iter: usize,
    pub seed: u64,
    /// Fejer bound `b`; defaults to the measured `d^2(x0, x*)`.
    pub b: Option<f64>,
    pub inner: ProxParams,
    pub out_trace: Option<PathBuf>,
    pub out_cert: Option<PathBuf>,
}

const KNOWN_KEYS: &[&str] = &[
    "space",
    "objective",
    "gamma",
    "x0",
    "c",
    "schedule",
    "eps",
    "eps_grid",
    "max_iter",
    "seed",
    "b",
    "inner.coarse_points",
    "inner.refine_iters",
    "inner.tol_inner",
    "out_trace",
    "out_cert",
];

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut entries: HashMap<&str, (usize, &str)> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::parse(line_no, format!("expected `key = value`, got `{line}`")));
        };
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::parse(line_no, format!("unknown key `{key}`")));
        }
        if entries.insert(key, (line_no, value.trim())).is_some() {
            return Err(Error::parse(line_no, format!("duplicate key `{key}`")));
        }
    }

    let space = match entries.get("space") {
        Some(&(line, v)) => at_line(line, parse_space(v))?,
        None => return Err(missing("space")),
    };
    let mut objective = match entries.get("objective") {
        Some(&(line, v)) => at_line(line, parse_objective(&space, v))?,
        None => return Err(missing("objective")),
    };
    if let Some(&(line, v)) = entries.get("gamma") {
        objective = at_line(line, float(v).and_then(|g| objective.with_gamma(g)))?;
    }
    let x0 = match entries.get("x0") {
        Some(&(line, v)) => at_line(line, parse_point(&space, v))?,
        None => return Err(missing("x0")),
    };

    let seed = take(&entries, "seed", integer)?.unwrap_or(42);
    let schedule = match (entries.get("c"), entries.get("schedule")) {
        (Some(_), Some(&(line, _))) => {
            return Err(Error::parse(line, "both `c` and `schedule` given"))
        }
        (Some(&(line, v)), None) => at_line(line, float(v).and_then(Schedule::constant))?,
        (None, Some(&(line, v))) => at_line(line, schedule_literal(v, seed))?,
        (None, None) => return Err(missing("c")),
    };

    let mut inner = ProxParams::default();
    if let Some(v) = take(&entries, "inner.coarse_points", count)? {
        inner.coarse_points = v;
    }
    if let Some(v) = take(&entries, "inner.refine_iters", count)? {
        inner.refine_iters = v;
    }
    if let Some(v) = take(&entries, "inner.tol_inner", float)? {
        inner.tol_inner = v;
    }

    let cfg = RunConfig {
        space,
        objective,
        x0,
        schedule,
        eps: take(&entries, "eps", float)?.unwrap_or(1e-6),
        eps_grid: take(&entries, "eps_grid", float_list)?
            .unwrap_or_else(|| vec![1.0, 0.3, 0.1, 0.03, 0.01]),
        max_iter: take(&entries, "max_iter", count)?.unwrap_or(100_000),
        seed,
        b: take(&entries, "b", float)?,
        inner,
        out_trace: take(&entries, "out_trace", |v| Ok(PathBuf::from(v)))?,
        out_cert: take(&entries, "out_cert", |v| Ok(PathBuf::from(v)))?,
    };
    if !(cfg.eps > 0.0 && cfg.eps.is_finite()) {
        return Err(at_line_no(
            entries["eps"].0,
            format!("eps must be positive, got {}", cfg.eps),
        ));
    }
    if cfg.eps_grid.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(at_line_no(
            entries["eps_grid"].0,
            "eps_grid entries must be positive".into(),
        ));
    }
    cfg.inner.validate()?;
    Ok(cfg)
}

/// `constant:C`, `list:V1,V2,..` (repeats the last value), or `random:LO,HI`
/// (per-index draws seeded from the config seed).
fn schedule_literal(text: &str, seed: u64) -> Result<Schedule> {
    let (head, rest) = text.split_once(':').unwrap_or((text, ""));
    match head {
        "constant" => Schedule::constant(float(rest)?),
        "list" => Schedule::list(float_list(rest)?),
        "random" => {
            let vals = float_list(rest)?;
            if vals.len() != 2 {
                return Err(Error::InvalidParameter(format!(
                    "random schedule takes `lo,hi`, got `{rest}`"
                )));
            }
            Schedule::random_in(vals[0], vals[1], seed)
        }
        _ => Err(Error::UnknownDescriptor(format!("schedule `{text}`"))),
    }
}

fn take<T>(
    entries: &HashMap<&str, (usize, &str)>,
    key: &str,
    parse: impl FnOnce(&str) -> Result<T>,
) -> Result<Option<T>> {
    match entries.get(key) {
        None => Ok(None),
        Some(&(line, v)) => at_line(line, parse(v)).map(Some),
    }
}

/// Keeps descriptor errors as-is (they already name the offender); pins
/// everything else to the config line.
fn at_line<T>(line: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::UnknownDescriptor(_) | Error::Parse { .. } => e,
        other => at_line_no(line, other.to_string()),
    })
}

fn at_line_no(line: usize, msg: String) -> Error {
    Error::parse(line, msg)
}

fn missing(key: &str) -> Error {
    Error::InvalidParameter(format!("config is missing required key `{key}`"))
}

fn float(v: &str) -> Result<f64> {
    v.trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("expected a number, got `{v}`")))
}

fn float_list(v: &str) -> Result<Vec<f64>> {
    v.split(',').map(float).collect()
}

fn count(v: &str) -> Result<usize> {
    v.trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("expected a count, got `{v}`")))
}

fn integer(v: &str) -> Result<u64> {
    v.trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("expected an integer, got `{v}`")))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "space = euclidean:1\nobjective = quadratic:a=1,c=0\nx0 = 1\nc = 1\n";

    #[test]
    fn minimal_config_fills_documented_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.eps, 1e-6);
        assert_eq!(cfg.eps_grid, vec![1.0, 0.3, 0.1, 0.03, 0.01]);
        assert_eq!(cfg.max_iter, 100_000);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.schedule.c_lower(), 1.0);
        assert_eq!(cfg.inner.refine_iters, ProxParams::default().refine_iters);
        assert!(cfg.b.is_none());
        assert!(cfg.out_trace.is_none());
    }

    #[test]
    fn zero_step_size_is_rejected() {
        let text = MINIMAL.replace("c = 1", "c = 0");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("positive"), "{err}");
    }

    #[test]
    fn duplicate_keys_are_named_with_their_line() {
        let text = format!("{MINIMAL}c = 2\n");
        match parse_config(&text) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 5);
                assert!(msg.contains("duplicate key `c`"), "{msg}");
            }
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}momentum = 0.9\n");
        match parse_config(&text) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 5);
                assert!(msg.contains("unknown key `momentum`"), "{msg}");
            }
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = format!("# quadratic smoke run\n\n{MINIMAL}");
        assert!(parse_config(&text).is_ok());
    }

    #[test]
    fn dotted_keys_override_the_inner_solver() {
        let text = format!("{MINIMAL}inner.refine_iters = 10\ninner.coarse_points = 9\n");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.inner.refine_iters, 10);
        assert_eq!(cfg.inner.coarse_points, 9);
    }

    #[test]
    fn schedule_literals_resolve() {
        let text = MINIMAL.replace("c = 1", "schedule = list:2,0.5");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.schedule.value(0), 2.0);
        assert_eq!(cfg.schedule.value(5), 0.5);

        let text = MINIMAL.replace("c = 1", "schedule = random:0.5,2");
        let cfg = parse_config(&text).unwrap();
        assert!((0.5..=2.0).contains(&cfg.schedule.value(3)));

        let text = format!("{}schedule = constant:2\n", MINIMAL);
        assert!(parse_config(&text).is_err());

        let text = MINIMAL.replace("c = 1", "schedule = warmup:1");
        assert!(matches!(parse_config(&text), Err(Error::UnknownDescriptor(_))));
    }

    #[test]
    fn gamma_override_applies_to_the_objective() {
        let text = format!("{MINIMAL}gamma = 0.25\n");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.objective.gamma(), 0.25);
    }

    #[test]
    fn descriptor_errors_pass_through() {
        let text = MINIMAL.replace("euclidean:1", "banach:1");
        assert!(matches!(parse_config(&text), Err(Error::UnknownDescriptor(_))));
        let text = MINIMAL.replace("x0 = 1", "x0 = 1,2");
        assert!(matches!(parse_config(&text), Err(Error::Parse { line: 3, .. })));
    }
}
