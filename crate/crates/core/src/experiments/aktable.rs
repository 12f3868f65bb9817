use serde::Serialize;

use super::{fmt_f64, Check, ExperimentConfig, Plot, Report, Table};
use crate::error::{invalid, Result};
use crate::extremal::{brute_force_a_with, minimize_a_with, ExtremalConfig, ExtremalReport};
use crate::gap_flow::CompactSet;

const ORACLE_TOL: f64 = 1e-4;
const CLOSED_FORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AkRow {
    #[serde(rename = "K")]
    pub k: CompactSet,
    pub extremal: ExtremalReport,
    pub brute_force: f64,
    pub delta: f64,
    /// `|K| / 4` for a single interval.
    pub closed_form: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AkTableReport {
    pub experiment: &'static str,
    pub grid: usize,
    pub oracle_grid: usize,
    pub rows: Vec<AkRow>,
    pub checks: Vec<Check>,
}

/// `A(K)` for every configured set with a brute-force grid cross-check and
/// the closed form on single intervals.
pub fn run_ak_table(cfg: &ExperimentConfig) -> Result<AkTableReport> {
    cfg.validate()?;
    if cfg.sets.is_empty() {
        return invalid("aktable needs at least one set");
    }
    let fine = ExtremalConfig {
        grid: cfg.grid,
        ..Default::default()
    };
    let coarse = ExtremalConfig {
        grid: cfg.oracle_grid,
        ..Default::default()
    };
    let mut rows = Vec::with_capacity(cfg.sets.len());
    for set in &cfg.sets {
        let r = set.default_bound();
        let extremal = minimize_a_with(set, r, &fine)?;
        let brute_force = brute_force_a_with(set, r, &coarse)?;
        let closed_form = match set.intervals() {
            [(c, d)] => Some((d - c) / 4.0),
            _ => None,
        };
        rows.push(AkRow {
            k: set.clone(),
            delta: (extremal.a - brute_force).abs(),
            extremal,
            brute_force,
            closed_form,
        });
    }

    let worst = rows.iter().map(|r| r.delta).fold(0.0, f64::max);
    let closed = rows
        .iter()
        .filter_map(|r| r.closed_form.map(|c| (r.extremal.a - c).abs()))
        .fold(0.0, f64::max);
    let checks = vec![
        Check::new(
            format!("minimizer within {ORACLE_TOL:e} of brute force"),
            worst < ORACLE_TOL,
            format!("max delta {worst:e}"),
        ),
        Check::new(
            format!("single intervals match |K|/4 within {CLOSED_FORM_TOL:e}"),
            closed < CLOSED_FORM_TOL,
            format!("max error {closed:e}"),
        ),
    ];
    Ok(AkTableReport {
        experiment: "aktable",
        grid: cfg.grid,
        oracle_grid: cfg.oracle_grid,
        rows,
        checks,
    })
}

fn describe(set: &CompactSet) -> String {
    set.intervals()
        .iter()
        .map(|(c, d)| format!("[{c},{d}]"))
        .collect::<Vec<_>>()
        .join("u")
}

impl Report for AkTableReport {
    fn name(&self) -> &'static str {
        self.experiment
    }

    fn checks(&self) -> &[Check] {
        &self.checks
    }

    fn tables(&self) -> Vec<Table> {
        let mut t = Table::new(
            "rows",
            &["K", "R_used", "A", "argmin", "near_minimal", "brute_force", "delta", "closed_form"],
        );
        for r in &self.rows {
            let argmin: Vec<String> = r.extremal.argmin.masses().iter().map(|g| fmt_f64(*g)).collect();
            t.push(vec![
                describe(&r.k),
                fmt_f64(r.extremal.r_used),
                fmt_f64(r.extremal.a),
                argmin.join(";"),
                r.extremal.near_minimal.len().to_string(),
                fmt_f64(r.brute_force),
                fmt_f64(r.delta),
                r.closed_form.map_or(String::new(), fmt_f64),
            ]);
        }
        vec![t]
    }

    fn plots(&self) -> Vec<Plot> {
        vec![Plot::new(
            "aktable_length_vs_a",
            "total_length",
            "A",
            self.rows.iter().map(|r| (r.k.total_length(), r.extremal.a)).collect(),
        )]
    }
}
