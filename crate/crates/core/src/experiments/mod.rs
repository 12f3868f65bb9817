//! Reproducible experiment runners and their artifacts.
//!
//! Every runner takes an [`ExperimentConfig`], returns a serializable report
//! with named checks, and can write its tables and plot data to a
//! directory. With a fixed seed the written files are byte-identical
//! between runs, whatever the execution mode.

mod aktable;
mod dr;
mod eval;
mod omega;
mod oracle;
mod sampling;
mod thm11;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gap_flow::CompactSet;
use crate::measures::Atom;
use crate::operators::JacobiCoefficients;
use crate::par::Execution;

pub use aktable::{run_ak_table, AkRow, AkTableReport};
pub use dr::{dr_measure, run_dr_forward, DrReport};
pub use eval::{run_eval, EvalConfig, EvalReport};
pub use omega::{approximate_omega_limit, run_omega, OmegaLimit, OmegaReport, ShiftWindow};
pub use oracle::{atom_family_xi, run_oracle, xi_mass_family, OracleReport, OracleRow};
pub use sampling::{random_admissible, random_selector, AdmissibleSample};
pub use thm11::{run_thm11, thm11_sample, SampleRow, Thm11Report};

/// Settings shared by all runners. Missing JSON fields take the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(rename = "K")]
    pub k: CompactSet,
    /// Bound of the Krein functions; `None` picks `max|K| + 1`.
    #[serde(rename = "R")]
    pub r: Option<f64>,
    pub seed: u64,
    pub samples: usize,
    /// Replays only these per-sample seeds instead of drawing new ones.
    pub sample_seeds: Option<Vec<u64>>,
    /// Coarse grid per gap for the minimizer.
    pub grid: usize,
    /// Grid per gap for the brute-force cross-check.
    pub oracle_grid: usize,
    /// Number of reconstructed coefficients `N`; `None` uses the runner's
    /// own default.
    #[serde(rename = "N")]
    pub depth: Option<usize>,
    /// Deviation window `L`.
    #[serde(rename = "L")]
    pub window: i64,
    pub eta: f64,
    pub oracle: OracleFamilies,
    pub dr: DrSettings,
    pub sets: Vec<CompactSet>,
    pub omega: OmegaSettings,
    pub eval: Option<EvalConfig>,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: String::new(),
            k: CompactSet::interval(-2.0, 2.0).expect("valid interval"),
            r: None,
            seed: 7,
            samples: 100,
            sample_seeds: None,
            grid: 33,
            oracle_grid: 401,
            depth: None,
            window: 5,
            eta: 1e-6,
            oracle: OracleFamilies::default(),
            dr: DrSettings::default(),
            sets: default_sets(),
            omega: OmegaSettings::default(),
            eval: None,
            out: None,
        }
    }
}

fn default_sets() -> Vec<CompactSet> {
    [
        vec![(-2.0, 2.0)],
        vec![(0.0, 4.0)],
        vec![(-1.0, 1.0)],
        vec![(-4.0, 4.0)],
        vec![(-2.0, -0.5), (0.5, 2.0)],
    ]
    .into_iter()
    .map(|iv| CompactSet::new(iv).expect("valid default set"))
    .collect()
}

/// Perturbation families of the oracle run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleFamilies {
    /// Widths `w` of the extra Krein mass `1/2` on `(2, 2 + w)`.
    pub xi_mass_widths: Vec<f64>,
    /// Masses `m` of an atom at 3 selected with `f = 1`.
    pub atom_masses: Vec<f64>,
    pub atom_position: f64,
    /// Targets `ε` with `a₀² = 1 + ε`, reached with the atom construction.
    pub epsilons: Vec<f64>,
    pub windows: Vec<i64>,
    /// Window on which the monotone trend is asserted.
    pub trend_window: i64,
}

impl Default for OracleFamilies {
    fn default() -> Self {
        OracleFamilies {
            xi_mass_widths: vec![0.4, 0.04, 0.004],
            atom_masses: vec![0.3, 0.03, 0.003],
            atom_position: 3.0,
            epsilons: vec![1e-1, 1e-2, 1e-3, 1e-4],
            windows: vec![2, 5, 10],
            trend_window: 5,
        }
    }
}

/// Measure and thresholds of the forward Denisov-Rakhmanov run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrSettings {
    pub atoms: Vec<Atom>,
    /// Overall factor applied to the measure; `a₀ = √scale` for no atoms.
    pub scale: f64,
    pub tail_threshold: f64,
    pub min_from: usize,
}

impl Default for DrSettings {
    fn default() -> Self {
        DrSettings {
            atoms: [2.5, 3.0, -2.7]
                .into_iter()
                .map(|position| Atom { position, mass: 0.3 })
                .collect(),
            scale: 1.0,
            tail_threshold: 0.05,
            min_from: 10,
        }
    }
}

/// Shift-window clustering settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OmegaSettings {
    /// Operator to analyse; `None` uses the forward reconstruction.
    pub operator: Option<JacobiCoefficients>,
    pub start: i64,
    pub horizon: usize,
    pub window: usize,
    pub threshold: f64,
}

impl Default for OmegaSettings {
    fn default() -> Self {
        OmegaSettings {
            operator: None,
            start: 1,
            horizon: 20,
            window: 8,
            threshold: 1e-3,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("samples", self.samples),
            ("grid", self.grid),
            ("oracle_grid", self.oracle_grid),
            ("omega.horizon", self.omega.horizon),
            ("omega.window", self.omega.window),
        ];
        for (name, v) in counts {
            if v == 0 {
                return invalid(format!("{name} must be positive"));
            }
        }
        if self.depth == Some(0) {
            return invalid("N must be positive");
        }
        if self.window <= 0 {
            return invalid("L must be positive");
        }
        if !(self.eta > 0.0) {
            return invalid("eta must be positive");
        }
        if let Some(r) = self.r {
            self.k.check_inside(r)?;
        }
        Ok(())
    }

    pub fn bound(&self) -> f64 {
        self.r.unwrap_or_else(|| self.k.default_bound())
    }
}

/// One named pass/fail assertion of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// A CSV table of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// Two-column plot data.
#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub name: String,
    pub x: String,
    pub y: String,
    pub points: Vec<(f64, f64)>,
}

impl Plot {
    pub fn new(name: &str, x: &str, y: &str, points: Vec<(f64, f64)>) -> Self {
        Plot {
            name: name.into(),
            x: x.into(),
            y: y.into(),
            points,
        }
    }
}

/// Common surface of the runner reports.
pub trait Report: Serialize {
    fn name(&self) -> &'static str;
    fn checks(&self) -> &[Check];
    fn tables(&self) -> Vec<Table>;
    fn plots(&self) -> Vec<Plot>;

    fn passed(&self) -> bool {
        self.checks().iter().all(|c| c.passed)
    }

    fn failures(&self) -> Vec<&Check> {
        self.checks().iter().filter(|c| !c.passed).collect()
    }
}

/// Output format of the main report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Formats a float so that it parses back to the same value.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::Io(format!("{}: {e}", path.display()))
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Io(format!("csv: {e}"));
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row).map_err(err)?;
    }
    w.into_inner().map_err(|e| Error::Io(format!("csv: {e}")))
}

/// Writes the report as `<name>.json`, or one `<name>_<table>.csv` per
/// table, plus a summary of the checks and `plot_<name>.csv` per figure.
/// Returns the written paths in order.
pub fn write_outputs<R: Report>(report: &R, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    let mut put = |file: String, bytes: Vec<u8>| -> Result<()> {
        let path = dir.join(file);
        fs::write(&path, bytes).map_err(io_err(&path))?;
        written.push(path);
        Ok(())
    };
    match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(report).map_err(|e| Error::Io(format!("json: {e}")))?;
            text.push('\n');
            put(format!("{}.json", report.name()), text.into_bytes())?;
        }
        Format::Csv => {
            for t in report.tables() {
                put(format!("{}_{}.csv", report.name(), t.name), csv_bytes(&t.header, &t.rows)?)?;
            }
            let rows: Vec<Vec<String>> = report
                .checks()
                .iter()
                .map(|c| vec![c.name.clone(), c.passed.to_string(), c.detail.clone()])
                .collect();
            let header = ["check", "passed", "detail"].map(String::from);
            put(format!("{}_checks.csv", report.name()), csv_bytes(&header, &rows)?)?;
        }
    }
    for p in report.plots() {
        let rows: Vec<Vec<String>> = p.points.iter().map(|&(x, y)| vec![fmt_f64(x), fmt_f64(y)]).collect();
        put(format!("plot_{}.csv", p.name), csv_bytes(&[p.x.clone(), p.y.clone()], &rows)?)?;
    }
    Ok(written)
}

/// Per-sample seeds derived from the run seed, or the replay list.
pub(crate) fn sample_seeds(cfg: &ExperimentConfig) -> Vec<u64> {
    use rand::{Rng, SeedableRng};
    if let Some(s) = &cfg.sample_seeds {
        return s.clone();
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.samples).map(|_| rng.random()).collect()
}

pub(crate) fn execution() -> Execution {
    Execution::default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_fill_missing_fields() {
        let cfg = ExperimentConfig::from_json(r#"{"seed": 3, "K": {"intervals": [[2.0, 6.0]]}}"#).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.samples, 100);
        assert_eq!(cfg.bound(), 7.0);
    }

    #[test]
    fn config_rejects_zero_counts_and_unknown_fields() {
        assert!(ExperimentConfig::from_json(r#"{"samples": 0}"#).unwrap_err().is_config());
        assert!(ExperimentConfig::from_json(r#"{"sampels": 3}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"R": 1.0}"#).is_err());
    }

    #[test]
    fn seeds_are_reproducible() {
        let cfg = ExperimentConfig {
            samples: 5,
            ..Default::default()
        };
        assert_eq!(sample_seeds(&cfg), sample_seeds(&cfg));
        let replay = ExperimentConfig {
            sample_seeds: Some(vec![11, 12]),
            ..cfg
        };
        assert_eq!(sample_seeds(&replay), vec![11, 12]);
    }

    #[test]
    fn floats_roundtrip_through_text() {
        for x in [0.1, 1.0 / 3.0, -2.5e-17, 1e300] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
