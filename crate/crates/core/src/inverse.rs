//! Half-line coefficients from a spectral measure.
//!
//! Indexing: `ν₊(ℝ) = a₀²`, and `ν₊ / a₀²` is the spectral measure of `δ₁`
//! for the operator on sites `n ≥ 1`. Its recurrence coefficients are
//! `(b₁, a₁, b₂, a₂, …)`.

use std::io::Write;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::linalg::{lanczos, Recurrence};
use crate::measures::{moments, quadrature_discretize, total_mass, SpectralMeasure};
use crate::operators::{CoefficientSource, HalfLineRestriction, JacobiCoefficients, Tail};

/// Discretization schedule for [`reconstruct_with`].
#[derive(Debug, Clone, Copy)]
pub struct ReconstructConfig {
    pub points_per_piece: usize,
    pub max_points_per_piece: usize,
}

impl Default for ReconstructConfig {
    fn default() -> Self {
        ReconstructConfig {
            points_per_piece: 400,
            max_points_per_piece: 3200,
        }
    }
}

/// Reconstructed half-line coefficients.
///
/// `a[n]` holds `a_n` for `n = 0..=N`; `b[n - 1]` holds `b_n` for
/// `n = 1..=N + 1`. `b₀` belongs to the left half line and is not
/// determined by `ν₊`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reconstruction {
    pub mass: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Nodes per ac piece of the discretization that succeeded.
    pub points_per_piece: usize,
}

impl Reconstruction {
    pub fn a0(&self) -> f64 {
        self.a[0]
    }

    pub fn depth(&self) -> usize {
        self.a.len() - 1
    }

    /// The operator on sites `1..=N` with a free tail beyond.
    pub fn half_line(&self) -> Result<HalfLineRestriction> {
        let n = self.depth();
        if n == 0 {
            return invalid("reconstruction has no coefficients beyond a0");
        }
        let base = JacobiCoefficients::new(1, self.a[1..].to_vec(), self.b[..n].to_vec(), Tail::Free)?;
        Ok(HalfLineRestriction::new(base, 1))
    }

    /// `⟨δ₁, T^k δ₁⟩` of the finite Jacobi matrix with diagonal `b₁..b_{N+1}`
    /// and off-diagonal `a₁..a_N`, for `k = 0..=k_max`.
    pub fn matrix_moments(&self, k_max: usize) -> Vec<f64> {
        let size = self.b.len();
        let mut v = vec![0.0; size];
        v[0] = 1.0;
        let mut out = Vec::with_capacity(k_max + 1);
        for _ in 0..=k_max {
            out.push(v[0]);
            let mut w = vec![0.0; size];
            for i in 0..size {
                w[i] += self.b[i] * v[i];
                if i + 1 < size {
                    w[i] += self.a[i + 1] * v[i + 1];
                    w[i + 1] += self.a[i + 1] * v[i];
                }
            }
            v = w;
        }
        out
    }

    /// Writes `n,a_n,b_n` rows; undefined entries are left empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
        w.write_record(["n", "a_n", "b_n"]).map_err(io)?;
        for n in 0..=self.b.len() {
            let a = self.a.get(n).map_or(String::new(), |x| format!("{x:.17e}"));
            let b = if n == 0 { String::new() } else { format!("{:.17e}", self.b[n - 1]) };
            w.write_record([n.to_string(), a, b]).map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
        Ok(())
    }
}

impl CoefficientSource for Reconstruction {
    fn coeff_a(&self, n: i64) -> Option<f64> {
        usize::try_from(n).ok().and_then(|i| self.a.get(i).copied())
    }
    fn coeff_b(&self, n: i64) -> Option<f64> {
        usize::try_from(n - 1).ok().and_then(|i| self.b.get(i).copied())
    }
}

/// Moment consistency report of a reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionReport {
    pub a0: f64,
    pub mass: f64,
    pub moments_checked: usize,
    pub max_moment_error: f64,
}

pub fn reconstruct(nu: &SpectralMeasure, depth: usize) -> Result<Reconstruction> {
    reconstruct_with(nu, depth, ReconstructConfig::default())
}

/// `a₀ = √ν₊(ℝ)`, then Lanczos on the discretized normalized measure for
/// `b₁..b_{N+1}` and `a₁..a_N`. A recurrence breakdown doubles the
/// discretization until the configured ceiling.
pub fn reconstruct_with(nu: &SpectralMeasure, depth: usize, cfg: ReconstructConfig) -> Result<Reconstruction> {
    if let Some(available) = nu.support_size() {
        if available < depth + 1 {
            return Err(Error::SupportTooSmall {
                available,
                needed: depth + 1,
            });
        }
    }
    let mass = total_mass(nu)?;
    if !(mass > 0.0) {
        return invalid("measure has no mass");
    }
    let normalized = nu.scaled(1.0 / mass)?;
    let mut points = cfg.points_per_piece.max(1);
    loop {
        match recurrence_of(&normalized, depth + 1, points) {
            Ok(rec) => {
                let mut a = Vec::with_capacity(depth + 1);
                a.push(mass.sqrt());
                a.extend_from_slice(&rec.off);
                return Ok(Reconstruction {
                    mass,
                    a,
                    b: rec.diag,
                    points_per_piece: points,
                });
            }
            Err(e @ Error::PositivityLoss { .. }) => {
                if nu.is_atomic() || points * 2 > cfg.max_points_per_piece {
                    return Err(e);
                }
                points *= 2;
            }
            Err(e) => return Err(e),
        }
    }
}

fn recurrence_of(probability: &SpectralMeasure, steps: usize, points: usize) -> Result<Recurrence> {
    let discrete = quadrature_discretize(probability, points)?;
    let atoms = discrete.atoms();
    let nodes: Vec<f64> = atoms.iter().map(|a| a.position).collect();
    let total: f64 = atoms.iter().map(|a| a.mass).sum();
    let weights: Vec<f64> = atoms.iter().map(|a| a.mass / total).collect();
    lanczos(&nodes, &weights, steps)
}

/// Compares the first `2N + 2` moments of `ν₊ / a₀²` with those of the
/// reconstructed finite Jacobi matrix. Errors are relative to
/// `max(1, sup|t|)^k`.
pub fn verify_reconstruction(nu: &SpectralMeasure, rec: &Reconstruction) -> Result<ReconstructionReport> {
    let k_max = 2 * rec.depth() + 1;
    let exact = moments(&nu.scaled(1.0 / rec.mass)?, k_max)?;
    let got = rec.matrix_moments(k_max);
    let radius = nu
        .atoms()
        .iter()
        .map(|a| a.position.abs())
        .chain(nu.ac_pieces().iter().flat_map(|p| [p.lo.abs(), p.hi.abs()]))
        .fold(1.0f64, f64::max);
    let max_moment_error = exact
        .iter()
        .zip(&got)
        .enumerate()
        .map(|(k, (e, g))| (e - g).abs() / radius.powi(k as i32))
        .fold(0.0, f64::max);
    Ok(ReconstructionReport {
        a0: rec.a0(),
        mass: rec.mass,
        moments_checked: k_max + 1,
        max_moment_error,
    })
}

/// `max_{|n| ≤ L} (|a_n - A| + |b_n - B|)` over the indices the source
/// defines.
pub fn free_deviation<S: CoefficientSource + ?Sized>(coeffs: &S, a_ref: f64, b_ref: f64, l: i64) -> Result<f64> {
    let mut worst: Option<f64> = None;
    for n in -l..=l {
        let a = coeffs.coeff_a(n);
        let b = coeffs.coeff_b(n);
        if a.is_none() && b.is_none() {
            continue;
        }
        let dev = a.map_or(0.0, |x| (x - a_ref).abs()) + b.map_or(0.0, |x| (x - b_ref).abs());
        worst = Some(worst.map_or(dev, |w: f64| w.max(dev)));
    }
    worst.ok_or_else(|| Error::InvalidInput("deviation window is empty".into()))
}
