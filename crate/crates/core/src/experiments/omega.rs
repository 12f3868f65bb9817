use serde::Serialize;

use super::{dr::run_dr_forward, fmt_f64, Check, ExperimentConfig, Plot, Report, Table};
use crate::error::{invalid, Result};
use crate::operators::{metric, CoefficientSource, HalfLineRestriction, JacobiCoefficients, Tail};

/// Coefficients of `S^n J` on `window` consecutive sites.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftWindow {
    pub shift: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub cluster: usize,
    pub distance_to_free: f64,
}

/// Finite-horizon stand-in for the ω-limit set: shifted windows grouped by
/// the coefficient metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaLimit {
    pub label: &'static str,
    pub start: i64,
    pub horizon: usize,
    pub window: usize,
    pub threshold: f64,
    pub windows: Vec<ShiftWindow>,
    /// Index of the first window of each cluster.
    pub representatives: Vec<usize>,
    /// Pairwise metric distances between the windows.
    pub distances: Vec<Vec<f64>>,
}

impl OmegaLimit {
    pub fn cluster_count(&self) -> usize {
        self.representatives.len()
    }
}

fn as_operator(a: &[f64], b: &[f64]) -> Result<JacobiCoefficients> {
    JacobiCoefficients::new(0, a.to_vec(), b.to_vec(), Tail::Free)
}

/// Windows of `S^n J` for `n = 0..horizon`, starting at site `start`, with
/// greedy clustering: a window joins the first cluster whose representative
/// lies within `threshold`, otherwise it opens a new one.
pub fn approximate_omega_limit<S: CoefficientSource + ?Sized>(
    j: &S,
    start: i64,
    horizon: usize,
    window: usize,
    threshold: f64,
) -> Result<OmegaLimit> {
    if horizon == 0 || window == 0 {
        return invalid("horizon and window must be positive");
    }
    if !(threshold >= 0.0) {
        return invalid("threshold must be nonnegative");
    }
    let free = as_operator(&vec![1.0; window], &vec![0.0; window])?;
    let mut windows = Vec::with_capacity(horizon);
    let mut ops = Vec::with_capacity(horizon);
    for shift in 0..horizon {
        let mut a = Vec::with_capacity(window);
        let mut b = Vec::with_capacity(window);
        for i in 0..window {
            let n = start + (shift + i) as i64;
            match (j.coeff_a(n), j.coeff_b(n)) {
                (Some(x), Some(y)) => {
                    a.push(x);
                    b.push(y);
                }
                _ => {
                    return invalid(format!(
                        "horizon {horizon} with window {window} needs site {n}, which the operator does not define"
                    ))
                }
            }
        }
        let op = as_operator(&a, &b)?;
        windows.push(ShiftWindow {
            shift,
            a,
            b,
            cluster: 0,
            distance_to_free: metric(&op, &free)?,
        });
        ops.push(op);
    }
    let mut distances = vec![vec![0.0; horizon]; horizon];
    for p in 0..horizon {
        for q in p + 1..horizon {
            let d = metric(&ops[p], &ops[q])?;
            distances[p][q] = d;
            distances[q][p] = d;
        }
    }
    let mut representatives: Vec<usize> = Vec::new();
    for p in 0..horizon {
        match representatives.iter().position(|&rep| distances[rep][p] <= threshold) {
            Some(c) => windows[p].cluster = c,
            None => {
                windows[p].cluster = representatives.len();
                representatives.push(p);
            }
        }
    }
    Ok(OmegaLimit {
        label: "approximation",
        start,
        horizon,
        window,
        threshold,
        windows,
        representatives,
        distances,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaReport {
    pub experiment: &'static str,
    /// `"config"` or `"dr"`.
    pub source: &'static str,
    pub limit: OmegaLimit,
    pub checks: Vec<Check>,
}

/// Clusters the configured operator, or the forward reconstruction when
/// none is given. For the reconstruction the windows must move toward the
/// free window.
pub fn run_omega(cfg: &ExperimentConfig) -> Result<OmegaReport> {
    cfg.validate()?;
    let o = &cfg.omega;
    let (source, limit) = match &o.operator {
        Some(op) => {
            let half = HalfLineRestriction::new(op.clone(), o.start);
            ("config", approximate_omega_limit(&half, o.start, o.horizon, o.window, o.threshold)?)
        }
        None => {
            let needed = o.start.max(1) as usize + o.horizon + o.window;
            let dr_cfg = ExperimentConfig {
                depth: Some(cfg.depth.unwrap_or(30).max(needed)),
                ..cfg.clone()
            };
            let dr = run_dr_forward(&dr_cfg)?;
            ("dr", approximate_omega_limit(&dr.coefficients, o.start, o.horizon, o.window, o.threshold)?)
        }
    };
    let mut checks = Vec::new();
    if source == "dr" {
        let first = limit.windows[0].distance_to_free;
        let last = limit.windows[limit.horizon - 1].distance_to_free;
        checks.push(Check::new(
            "windows approach the free window",
            last < first,
            format!("{first:e} -> {last:e}"),
        ));
    }
    Ok(OmegaReport {
        experiment: "omega",
        source,
        limit,
        checks,
    })
}

impl Report for OmegaReport {
    fn name(&self) -> &'static str {
        self.experiment
    }

    fn checks(&self) -> &[Check] {
        &self.checks
    }

    fn tables(&self) -> Vec<Table> {
        let mut t = Table::new("windows", &["shift", "cluster", "distance_to_free", "a", "b"]);
        let join = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";");
        for w in &self.limit.windows {
            t.push(vec![
                w.shift.to_string(),
                w.cluster.to_string(),
                fmt_f64(w.distance_to_free),
                join(&w.a),
                join(&w.b),
            ]);
        }
        let mut d = Table::new("distances", &["p", "q", "distance"]);
        for (p, row) in self.limit.distances.iter().enumerate() {
            for (q, x) in row.iter().enumerate().skip(p + 1) {
                d.push(vec![p.to_string(), q.to_string(), fmt_f64(*x)]);
            }
        }
        vec![t, d]
    }

    fn plots(&self) -> Vec<Plot> {
        vec![Plot::new(
            "omega_distance_to_free",
            "shift",
            "distance_to_free",
            self.limit
                .windows
                .iter()
                .map(|w| (w.shift as f64, w.distance_to_free))
                .collect(),
        )]
    }
}
