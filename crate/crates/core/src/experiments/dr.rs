use serde::Serialize;

use super::{fmt_f64, Check, DrSettings, ExperimentConfig, Plot, Report, Table};
use crate::error::{invalid, Error, Result};
use crate::gap_flow::CompactSet;
use crate::inverse::{reconstruct, verify_reconstruction, Reconstruction, ReconstructionReport};
use crate::krein::{xi_free, HerglotzRep};
use crate::measures::{nu_plus, rho_from_herglotz, FSelector, SpectralMeasure};

const DEFAULT_DEPTH: usize = 30;
const TREND_FROM: usize = 5;

/// Semicircle `ν₊⁽⁰⁾` plus the configured atoms off `[-2, 2]`, times the
/// configured scale.
pub fn dr_measure(s: &DrSettings) -> Result<SpectralMeasure> {
    if let Some(a) = s.atoms.iter().find(|a| a.position.abs() <= 2.0) {
        return invalid(format!("atom at {} is not off the band [-2, 2]", a.position));
    }
    let band = CompactSet::interval(-2.0, 2.0)?;
    let rho = rho_from_herglotz(&HerglotzRep::new(xi_free(2.0)?))?;
    let semicircle = nu_plus(&rho, &band, &FSelector::zero())?;
    semicircle.with_atoms(&s.atoms)?.scaled(s.scale)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DrReport {
    pub experiment: &'static str,
    #[serde(rename = "N")]
    pub depth: usize,
    pub settings: DrSettings,
    pub coefficients: Reconstruction,
    pub consistency: ReconstructionReport,
    /// `|a_n - 1| + |b_n|` for `n = 1..=N`.
    pub deviations: Vec<f64>,
    pub checks: Vec<Check>,
}

impl DrReport {
    /// `|a_n - 1| + |b_n|`.
    pub fn deviation(&self, n: usize) -> f64 {
        self.deviations[n - 1]
    }
}

/// Reconstructs `N` coefficients of the measure and checks that they
/// approach the free values: the deviation at `N` is below the one at 5
/// and below the threshold, and `a_n` stays above `1 - threshold` from
/// `min_from` on.
pub fn run_dr_forward(cfg: &ExperimentConfig) -> Result<DrReport> {
    cfg.validate()?;
    let s = &cfg.dr;
    let depth = cfg.depth.unwrap_or(DEFAULT_DEPTH);
    if depth < TREND_FROM.max(s.min_from) {
        return invalid(format!("N = {depth} is too small for the trend checks"));
    }
    let nu = dr_measure(s)?;
    let wrap = |e: Error| Error::Sample {
        seed: cfg.seed,
        input: serde_json::to_string(s).unwrap_or_default(),
        source: Box::new(e),
    };
    let rec = reconstruct(&nu, depth).map_err(wrap)?;
    let consistency = verify_reconstruction(&nu, &rec).map_err(wrap)?;
    let deviations: Vec<f64> = (1..=depth).map(|n| (rec.a[n] - 1.0).abs() + rec.b[n - 1].abs()).collect();

    let dev_n = deviations[depth - 1];
    let dev_5 = deviations[TREND_FROM - 1];
    let min_a = rec.a[s.min_from..=depth].iter().copied().fold(f64::INFINITY, f64::min);
    let checks = vec![
        Check::new(
            format!("deviation at {depth} below deviation at {TREND_FROM}"),
            dev_n < dev_5,
            format!("{dev_n:e} vs {dev_5:e}"),
        ),
        Check::new(
            format!("deviation at {depth} below {:?}", s.tail_threshold),
            dev_n < s.tail_threshold,
            format!("{dev_n:e}"),
        ),
        Check::new(
            format!("min a_n for n >= {} at least 1 - {:?}", s.min_from, s.tail_threshold),
            min_a >= 1.0 - s.tail_threshold,
            format!("{min_a}"),
        ),
    ];
    Ok(DrReport {
        experiment: "dr",
        depth,
        settings: s.clone(),
        coefficients: rec,
        consistency,
        deviations,
        checks,
    })
}

impl Report for DrReport {
    fn name(&self) -> &'static str {
        self.experiment
    }

    fn checks(&self) -> &[Check] {
        &self.checks
    }

    fn tables(&self) -> Vec<Table> {
        let mut t = Table::new("coefficients", &["n", "a_n", "b_n", "deviation"]);
        let rec = &self.coefficients;
        for n in 0..=self.depth {
            t.push(vec![
                n.to_string(),
                fmt_f64(rec.a[n]),
                if n == 0 { String::new() } else { fmt_f64(rec.b[n - 1]) },
                if n == 0 { String::new() } else { fmt_f64(self.deviation(n)) },
            ]);
        }
        vec![t]
    }

    fn plots(&self) -> Vec<Plot> {
        let rec = &self.coefficients;
        let n = |i: usize| i as f64;
        vec![
            Plot::new("dr_a", "n", "a_n", (0..=self.depth).map(|i| (n(i), rec.a[i])).collect()),
            Plot::new("dr_b", "n", "b_n", (1..=self.depth).map(|i| (n(i), rec.b[i - 1])).collect()),
            Plot::new(
                "dr_deviation",
                "n",
                "deviation",
                (1..=self.depth).map(|i| (n(i), self.deviation(i))).collect(),
            ),
        ]
    }
}
