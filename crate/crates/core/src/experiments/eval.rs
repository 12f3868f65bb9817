use serde::{Deserialize, Serialize};

use super::{fmt_f64, Check, ExperimentConfig, Plot, Report, Table};
use crate::error::{invalid, Result};
use crate::krein::{HerglotzRep, StepFunction};
use crate::measures::{rho_from_herglotz, total_mass, SpectralMeasure};
use crate::Complex64;

/// Ad-hoc evaluation request: `H` at complex points and boundary data at
/// real points for one Krein function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub xi: StepFunction,
    /// Points `[re, im]` off `[-R, R]`.
    #[serde(default)]
    pub z: Vec<[f64; 2]>,
    #[serde(default)]
    pub x: Vec<f64>,
    /// Also compare with the η-extrapolated boundary limit.
    #[serde(default)]
    pub eta: Option<f64>,
    /// Include the measure `ρ` of `H`.
    #[serde(default)]
    pub measure: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexValue {
    pub z: [f64; 2],
    pub value: Option<[f64; 2]>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealValue {
    pub x: f64,
    pub xi: f64,
    pub hilbert: Option<f64>,
    pub boundary: Option<[f64; 2]>,
    pub modulus: Option<f64>,
    pub limit: Option<[f64; 2]>,
    pub correction: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureSummary {
    pub total_mass: f64,
    pub measure: SpectralMeasure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub experiment: &'static str,
    pub complex: Vec<ComplexValue>,
    pub real: Vec<RealValue>,
    pub measure: Option<MeasureSummary>,
    pub checks: Vec<Check>,
}

fn pair(c: Complex64) -> [f64; 2] {
    [c.re, c.im]
}

fn real_point(rep: &HerglotzRep, x: f64, eta: Option<f64>) -> RealValue {
    let mut out = RealValue {
        x,
        xi: rep.xi.eval(x),
        hilbert: None,
        boundary: None,
        modulus: None,
        limit: None,
        correction: None,
        error: None,
    };
    let filled = (|| -> Result<()> {
        out.hilbert = Some(rep.xi.hilbert_transform(x)?);
        let h = rep.boundary_value(x)?;
        out.boundary = Some(pair(h));
        out.modulus = Some(h.norm());
        if let Some(eta) = eta {
            out.limit = Some(pair(rep.boundary_limit(x, eta)?));
        }
        if x.abs() < 2.0 {
            out.correction = Some(rep.correction_factor(x)?);
        }
        Ok(())
    })();
    if let Err(e) = filled {
        out.error = Some(e.to_string());
    }
    out
}

/// Evaluates the request in `cfg.eval`. Points where an evaluation is
/// undefined carry the error text instead of a value.
pub fn run_eval(cfg: &ExperimentConfig) -> Result<EvalReport> {
    let Some(req) = &cfg.eval else {
        return invalid("eval needs an \"eval\" object with at least \"xi\"");
    };
    if let Some(eta) = req.eta {
        if !(eta > 0.0) {
            return invalid("eval.eta must be positive");
        }
    }
    let rep = HerglotzRep::new(req.xi.clone());
    let complex = req
        .z
        .iter()
        .map(|&[re, im]| match rep.eval(Complex64::new(re, im)) {
            Ok(h) => ComplexValue {
                z: [re, im],
                value: Some(pair(h)),
                error: None,
            },
            Err(e) => ComplexValue {
                z: [re, im],
                value: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let real = req.x.iter().map(|&x| real_point(&rep, x, req.eta)).collect();
    let measure = if req.measure {
        let m = rho_from_herglotz(&rep)?;
        Some(MeasureSummary {
            total_mass: total_mass(&m)?,
            measure: m,
        })
    } else {
        None
    };
    Ok(EvalReport {
        experiment: "eval",
        complex,
        real,
        measure,
        checks: Vec::new(),
    })
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), fmt_f64)
}

impl Report for EvalReport {
    fn name(&self) -> &'static str {
        self.experiment
    }

    fn checks(&self) -> &[Check] {
        &self.checks
    }

    fn tables(&self) -> Vec<Table> {
        let mut c = Table::new("complex", &["re_z", "im_z", "re_H", "im_H", "error"]);
        for v in &self.complex {
            c.push(vec![
                fmt_f64(v.z[0]),
                fmt_f64(v.z[1]),
                opt(v.value.map(|p| p[0])),
                opt(v.value.map(|p| p[1])),
                v.error.clone().unwrap_or_default(),
            ]);
        }
        let mut r = Table::new(
            "real",
            &["x", "xi", "hilbert", "re_H", "im_H", "abs_H", "re_limit", "im_limit", "correction", "error"],
        );
        for v in &self.real {
            r.push(vec![
                fmt_f64(v.x),
                fmt_f64(v.xi),
                opt(v.hilbert),
                opt(v.boundary.map(|p| p[0])),
                opt(v.boundary.map(|p| p[1])),
                opt(v.modulus),
                opt(v.limit.map(|p| p[0])),
                opt(v.limit.map(|p| p[1])),
                opt(v.correction),
                v.error.clone().unwrap_or_default(),
            ]);
        }
        let mut tables = vec![c, r];
        if let Some(m) = &self.measure {
            let mut t = Table::new("atoms", &["position", "mass"]);
            for a in m.measure.atoms() {
                t.push(vec![fmt_f64(a.position), fmt_f64(a.mass)]);
            }
            tables.push(t);
        }
        tables
    }

    fn plots(&self) -> Vec<Plot> {
        vec![Plot::new(
            "eval_abs_h",
            "x",
            "abs_H",
            self.real
                .iter()
                .filter_map(|v| v.modulus.map(|m| (v.x, m)))
                .collect(),
        )]
    }
}
