//! The extremal constant `A(K) = min a₀` over the canonical class X(K).
//!
//! X(K) is parameterized by one jump mass per gap. For each parameter the
//! canonical Krein function determines `H`, and `a₀² = (1/2π) ∫_K |H(x)| dx`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gap_flow::{CanonicalKrein, CompactSet};
use crate::krein::{HerglotzRep, StepFunction};
use crate::par::{self, Execution};
use crate::quadrature::{integrate_arcsine, Adaptive};

/// One jump mass `g_j ∈ [0, |gap_j|]` per gap of `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GapJumps(pub Vec<f64>);

impl GapJumps {
    pub fn new(set: &CompactSet, masses: Vec<f64>) -> Result<Self> {
        let gaps = set.gaps();
        if gaps.len() != masses.len() {
            return invalid(format!("{} jump masses for {} gaps", masses.len(), gaps.len()));
        }
        for (&g, &(c, d)) in masses.iter().zip(&gaps) {
            if !(0.0..=d - c).contains(&g) {
                return invalid(format!("jump mass {g} outside [0, {}]", d - c));
            }
        }
        Ok(GapJumps(masses))
    }

    pub fn masses(&self) -> &[f64] {
        &self.0
    }
}

/// Settings for [`minimize_a_with`] and [`brute_force_a_with`].
#[derive(Debug, Clone, Copy)]
pub struct ExtremalConfig {
    pub grid: usize,
    pub refinement_tolerance: f64,
    pub gap_cap: usize,
    pub quadrature_rel_tol: f64,
    pub exec: Execution,
}

impl Default for ExtremalConfig {
    fn default() -> Self {
        ExtremalConfig {
            grid: 33,
            refinement_tolerance: 1e-10,
            gap_cap: 4,
            quadrature_rel_tol: 1e-12,
            exec: Execution::default(),
        }
    }
}

/// `(1/2π) ∫_K |H(x)| dx` for a Krein function that is 1/2 on `K`.
pub fn half_ac_mass_on(xi: &StepFunction, set: &CompactSet, rel_tol: f64) -> Result<f64> {
    let rep = HerglotzRep::new(xi.clone());
    let cfg = Adaptive::default().with_rel_tol(rel_tol);
    let mut total = 0.0;
    for &(c, d) in set.intervals() {
        // split at breakpoints of ξ inside the interval so every piece is smooth
        let mut cuts = vec![c, d];
        cuts.extend(xi.breakpoints().iter().copied().filter(|&x| x > c && x < d));
        cuts.sort_by(f64::total_cmp);
        for w in cuts.windows(2) {
            total += integrate_arcsine(|p| rep.modulus_located(&p), w[0], w[1], cfg)?.value;
        }
    }
    Ok(total / (2.0 * PI))
}

/// `a₀²` of the operator in R₀(K) with the given gap jumps.
pub fn objective(set: &CompactSet, jumps: &GapJumps, r: f64) -> Result<f64> {
    objective_with(set, jumps.masses(), r, ExtremalConfig::default().quadrature_rel_tol)
}

fn objective_with(set: &CompactSet, jumps: &[f64], r: f64, rel_tol: f64) -> Result<f64> {
    let xi = CanonicalKrein::from_jumps(set, r, jumps)?.into_xi();
    half_ac_mass_on(&xi, set, rel_tol)
}

/// Result of the `A(K)` minimization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalReport {
    #[serde(rename = "A")]
    pub a: f64,
    pub argmin: GapJumps,
    pub grid: usize,
    pub refinement_tolerance: f64,
    #[serde(rename = "R_used")]
    pub r_used: f64,
    /// Grid points whose objective is within 1e-8 of the grid minimum.
    pub near_minimal: Vec<GapJumps>,
}

fn grid_point(idx: usize, grid: usize, gaps: &[(f64, f64)]) -> Vec<f64> {
    let mut rem = idx;
    let mut out = vec![0.0; gaps.len()];
    for j in (0..gaps.len()).rev() {
        let i = rem % grid;
        rem /= grid;
        let (c, d) = gaps[j];
        out[j] = if i + 1 == grid {
            d - c
        } else {
            (d - c) * i as f64 / (grid - 1) as f64
        };
    }
    out
}

struct GridScan {
    values: Vec<f64>,
    best: usize,
}

fn scan_grid(set: &CompactSet, r: f64, cfg: &ExtremalConfig) -> Result<GridScan> {
    let gaps = set.gaps();
    if cfg.grid < 2 {
        return invalid("grid needs at least 2 points per gap");
    }
    let count = cfg.grid.checked_pow(gaps.len() as u32).ok_or(Error::GapCap {
        gaps: gaps.len(),
        cap: cfg.gap_cap,
    })?;
    let values = par::map_range(cfg.exec, count, |idx| {
        objective_with(set, &grid_point(idx, cfg.grid, &gaps), r, cfg.quadrature_rel_tol)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    // first strict minimum in lexicographic order
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    Ok(GridScan { values, best })
}

/// Exhaustive grid minimum of `a₀` (not squared).
pub fn brute_force_a(set: &CompactSet, r: f64, grid: usize) -> Result<f64> {
    brute_force_a_with(
        set,
        r,
        &ExtremalConfig {
            grid,
            ..ExtremalConfig::default()
        },
    )
}

pub fn brute_force_a_with(set: &CompactSet, r: f64, cfg: &ExtremalConfig) -> Result<f64> {
    set.check_inside(r)?;
    let scan = scan_grid(set, r, cfg)?;
    Ok(scan.values[scan.best].sqrt())
}

pub fn minimize_a(set: &CompactSet, r: f64) -> Result<ExtremalReport> {
    minimize_a_with(set, r, &ExtremalConfig::default())
}

/// Grid scan followed by cyclic coordinate-wise golden-section refinement.
pub fn minimize_a_with(set: &CompactSet, r: f64, cfg: &ExtremalConfig) -> Result<ExtremalReport> {
    set.check_inside(r)?;
    let gaps = set.gaps();
    if gaps.len() > cfg.gap_cap {
        return Err(Error::GapCap {
            gaps: gaps.len(),
            cap: cfg.gap_cap,
        });
    }
    let scan = scan_grid(set, r, cfg)?;
    let grid_min = scan.values[scan.best];
    let near_minimal = scan
        .values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v - grid_min <= 1e-8)
        .map(|(i, _)| GapJumps(grid_point(i, cfg.grid, &gaps)))
        .collect();

    let mut x = grid_point(scan.best, cfg.grid, &gaps);
    let mut fx = grid_min;
    let f = |p: &[f64]| objective_with(set, p, r, cfg.quadrature_rel_tol);
    for _cycle in 0..100 {
        let before = fx;
        for j in 0..gaps.len() {
            let width = gaps[j].1 - gaps[j].0;
            let h = width / (cfg.grid - 1) as f64;
            let lo = (x[j] - h).max(0.0);
            let hi = (x[j] + h).min(width);
            let mut trial = x.clone();
            let mut eval = |t: f64| {
                trial[j] = t;
                f(&trial)
            };
            let (t, ft) = golden_section(&mut eval, lo, hi, cfg.refinement_tolerance)?;
            if ft < fx {
                x[j] = t;
                fx = ft;
            }
        }
        if before - fx <= 1e-15 * before {
            break;
        }
    }
    Ok(ExtremalReport {
        a: fx.sqrt(),
        argmin: GapJumps(x),
        grid: cfg.grid,
        refinement_tolerance: cfg.refinement_tolerance,
        r_used: r,
        near_minimal,
    })
}

/// Golden-section search on `[lo, hi]`; the endpoints are also compared so
/// boundary minima are found exactly.
pub fn golden_section<F>(f: &mut F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let mut best = if fc <= fd { (c, fc) } else { (d, fd) };
    for end in [lo, hi] {
        let fe = f(end)?;
        if fe < best.1 {
            best = (end, fe);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_gap_objective_is_a_squared() {
        let k = CompactSet::interval(-2.0, 2.0).unwrap();
        let v = objective(&k, &GapJumps(vec![]), 2.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let k = CompactSet::constant_band(0.5, 3.0).unwrap();
        let v = objective(&k, &GapJumps(vec![]), 5.0).unwrap();
        assert!((v - 0.25).abs() < 1e-12);
    }

    #[test]
    fn golden_section_finds_parabola_minimum_and_boundaries() {
        let mut f = |x: f64| Ok((x - 0.3) * (x - 0.3));
        let (x, _) = golden_section(&mut f, 0.0, 1.0, 1e-10).unwrap();
        assert!((x - 0.3).abs() < 1e-9);
        let mut g = |x: f64| Ok(x);
        assert_eq!(golden_section(&mut g, 0.0, 1.0, 1e-10).unwrap().0, 0.0);
    }

    #[test]
    fn jumps_are_validated() {
        let k = CompactSet::new(vec![(-2.0, -0.5), (0.5, 2.0)]).unwrap();
        assert!(GapJumps::new(&k, vec![1.5]).is_err());
        assert!(GapJumps::new(&k, vec![0.5, 0.1]).is_err());
        assert!(GapJumps::new(&k, vec![0.5]).is_ok());
    }

    #[test]
    fn gap_cap_is_enforced() {
        let k = CompactSet::new(vec![(0.0, 1.0), (2.0, 3.0), (4.0, 5.0)]).unwrap();
        let cfg = ExtremalConfig {
            gap_cap: 1,
            ..ExtremalConfig::default()
        };
        assert!(matches!(minimize_a_with(&k, 6.0, &cfg), Err(Error::GapCap { .. })));
    }
}
