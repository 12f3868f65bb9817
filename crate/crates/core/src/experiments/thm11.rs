use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::sampling::{random_admissible, random_selector};
use super::{execution, fmt_f64, sample_seeds, Check, ExperimentConfig, Plot, Report, Table};
use crate::error::{invalid, Error, Result};
use crate::extremal::minimize_a;
use crate::gap_flow::{flow_to_canonical, CompactSet};
use crate::inverse::{free_deviation, reconstruct};
use crate::krein::{HerglotzRep, StepFunction};
use crate::measures::{nu_plus, rho_from_herglotz, total_mass, FSelector};
use crate::par;

const LOWER_BOUND_TOL: f64 = 1e-6;
const RIGIDITY_SPREAD: f64 = 0.01;

/// Outcome of one `(ξ, f)` input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRow {
    pub index: usize,
    pub seed: u64,
    #[serde(rename = "R")]
    pub r: f64,
    pub a0: f64,
    pub mass: f64,
    pub deviation: f64,
    pub xi_distance: f64,
    pub f_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thm11Report {
    pub experiment: &'static str,
    #[serde(rename = "K")]
    pub k: CompactSet,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "N")]
    pub depth: usize,
    #[serde(rename = "L")]
    pub window: i64,
    pub seed: u64,
    pub samples: Vec<SampleRow>,
    pub min_a0: f64,
    /// Smallest `a₀ - A` over samples whose `ξ` or `f` is visibly away
    /// from the extremal input.
    pub delta0: Option<f64>,
    pub checks: Vec<Check>,
}

/// Reconstructs one input and measures it against the constants `(A, B)`.
pub fn thm11_sample(
    set: &CompactSet,
    xi: &StepFunction,
    f: &FSelector,
    depth: usize,
    window: i64,
    (a_ref, b_ref): (f64, f64),
) -> Result<SampleRow> {
    let rho = rho_from_herglotz(&HerglotzRep::new(xi.clone()))?;
    let nu = nu_plus(&rho, set, f)?;
    let base = total_mass(&nu_plus(&rho, set, &FSelector::zero())?)?;
    let rec = reconstruct(&nu, depth)?;
    let canonical = flow_to_canonical(xi, set)?;
    Ok(SampleRow {
        index: 0,
        seed: 0,
        r: xi.bound(),
        a0: rec.a0(),
        mass: rec.mass,
        deviation: free_deviation(&rec, a_ref, b_ref, window)?,
        xi_distance: xi.l1_distance(canonical.xi())?,
        f_mass: rec.mass - base,
    })
}

/// Random admissible inputs over a single interval `K = [B - 2A, B + 2A]`:
/// asserts `a₀ ≥ A - 1e-6` for every sample and records the gap `δ₀`
/// separating perturbed inputs from the extremal value.
pub fn run_thm11(cfg: &ExperimentConfig) -> Result<Thm11Report> {
    cfg.validate()?;
    let set = &cfg.k;
    if set.intervals().len() != 1 {
        return invalid("thm11 needs K to be a single interval");
    }
    let (lo, hi) = set.intervals()[0];
    let a = minimize_a(set, cfg.bound())?.a;
    let b = 0.5 * (lo + hi);
    let depth = cfg.depth.unwrap_or(cfg.window as usize);
    let seeds = sample_seeds(cfg);

    let results = par::map(execution(), &seeds, |&seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sample = random_admissible(set, &mut rng)?;
        let rho = rho_from_herglotz(&HerglotzRep::new(sample.xi.clone()))?;
        let f = random_selector(&rho, set, &mut rng);
        thm11_sample(set, &sample.xi, &f, depth, cfg.window, (a, b)).map_err(|e| Error::Sample {
            seed,
            input: serde_json::json!({ "xi": sample.xi, "f": f }).to_string(),
            source: Box::new(e),
        })
    });
    let mut samples = Vec::with_capacity(seeds.len());
    for (index, (row, &seed)) in results.into_iter().zip(&seeds).enumerate() {
        samples.push(SampleRow { index, seed, ..row? });
    }

    let min_a0 = samples.iter().map(|s| s.a0).fold(f64::INFINITY, f64::min);
    let below: Vec<u64> = samples
        .iter()
        .filter(|s| s.a0 < a - LOWER_BOUND_TOL)
        .map(|s| s.seed)
        .collect();
    let delta0 = samples
        .iter()
        .filter(|s| s.xi_distance > RIGIDITY_SPREAD || s.f_mass > RIGIDITY_SPREAD)
        .map(|s| s.a0 - a)
        .reduce(f64::min);
    let rigid_fail: Vec<u64> = samples
        .iter()
        .filter(|s| (s.xi_distance > RIGIDITY_SPREAD || s.f_mass > RIGIDITY_SPREAD) && s.a0 - a <= 1e-8)
        .map(|s| s.seed)
        .collect();
    let checks = vec![
        Check::new(
            "a0 >= A - 1e-6",
            below.is_empty(),
            if below.is_empty() {
                format!("min a0 = {min_a0}, A = {a}")
            } else {
                format!("failing seeds {below:?}")
            },
        ),
        Check::new(
            "perturbed inputs stay above A",
            rigid_fail.is_empty(),
            match (&delta0, rigid_fail.is_empty()) {
                (_, false) => format!("failing seeds {rigid_fail:?}"),
                (Some(d), true) => format!("delta0 = {d}"),
                (None, true) => "no perturbed samples".into(),
            },
        ),
    ];
    Ok(Thm11Report {
        experiment: "thm11",
        k: set.clone(),
        a,
        b,
        depth,
        window: cfg.window,
        seed: cfg.seed,
        samples,
        min_a0,
        delta0,
        checks,
    })
}

impl Report for Thm11Report {
    fn name(&self) -> &'static str {
        self.experiment
    }

    fn checks(&self) -> &[Check] {
        &self.checks
    }

    fn tables(&self) -> Vec<Table> {
        let mut t = Table::new(
            "samples",
            &["index", "seed", "R", "a0", "mass", "deviation", "xi_distance", "f_mass"],
        );
        for s in &self.samples {
            t.push(vec![
                s.index.to_string(),
                s.seed.to_string(),
                fmt_f64(s.r),
                fmt_f64(s.a0),
                fmt_f64(s.mass),
                fmt_f64(s.deviation),
                fmt_f64(s.xi_distance),
                fmt_f64(s.f_mass),
            ]);
        }
        vec![t]
    }

    fn plots(&self) -> Vec<Plot> {
        vec![
            Plot::new(
                "thm11_a0_vs_xi_distance",
                "xi_distance",
                "a0",
                self.samples.iter().map(|s| (s.xi_distance, s.a0)).collect(),
            ),
            Plot::new(
                "thm11_a0_vs_f_mass",
                "f_mass",
                "a0",
                self.samples.iter().map(|s| (s.f_mass, s.a0)).collect(),
            ),
        ]
    }
}
