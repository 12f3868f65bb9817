//! Whole-line and half-line Jacobi operators
//! `(Ju)_n = a_n u_{n+1} + a_{n-1} u_{n-1} + b_n u_n`.
//!
//! Coefficients are stored explicitly on a window `[n_lo, n_hi]` and
//! described by a free, constant or periodic tail outside it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gap_flow::CompactSet;
use crate::krein::richardson;

/// Coefficients outside the explicit window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Tail {
    /// `a ≡ 1`, `b ≡ 0`.
    Free,
    Constant { a: f64, b: f64 },
    /// `a_n = a[n mod p]`, `b_n = b[n mod p]`.
    Periodic { a: Vec<f64>, b: Vec<f64> },
}

impl Tail {
    fn validate(&self) -> Result<()> {
        match self {
            Tail::Free => Ok(()),
            Tail::Constant { a, b } => check_coeffs(&[*a], &[*b]),
            Tail::Periodic { a, b } => {
                if a.is_empty() || a.len() != b.len() {
                    return invalid("periodic tail needs equal, nonempty a and b blocks");
                }
                check_coeffs(a, b)
            }
        }
    }

    pub fn period(&self) -> usize {
        match self {
            Tail::Periodic { a, .. } => a.len(),
            _ => 1,
        }
    }

    pub fn at(&self, n: i64) -> (f64, f64) {
        match self {
            Tail::Free => (1.0, 0.0),
            Tail::Constant { a, b } => (*a, *b),
            Tail::Periodic { a, b } => {
                let i = n.rem_euclid(a.len() as i64) as usize;
                (a[i], b[i])
            }
        }
    }

    fn shifted(&self, k: i64) -> Tail {
        match self {
            Tail::Periodic { a, b } => {
                let p = a.len() as i64;
                let rot = |v: &Vec<f64>| (0..p).map(|i| v[(i + k).rem_euclid(p) as usize]).collect();
                Tail::Periodic { a: rot(a), b: rot(b) }
            }
            t => t.clone(),
        }
    }

    fn sup(&self) -> (f64, f64) {
        match self {
            Tail::Free => (1.0, 0.0),
            Tail::Constant { a, b } => (a.abs(), b.abs()),
            Tail::Periodic { a, b } => (
                a.iter().fold(0.0f64, |m, x| m.max(x.abs())),
                b.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            ),
        }
    }
}

fn check_coeffs(a: &[f64], b: &[f64]) -> Result<()> {
    if a.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return invalid("off-diagonal coefficients must be positive and finite");
    }
    if b.iter().any(|x| !x.is_finite()) {
        return invalid("diagonal coefficients must be finite");
    }
    Ok(())
}

/// Read access to coefficients that may only be known on part of ℤ.
pub trait CoefficientSource {
    fn coeff_a(&self, n: i64) -> Option<f64>;
    fn coeff_b(&self, n: i64) -> Option<f64>;
}

/// A bounded two-sided Jacobi operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JacobiJson", into = "JacobiJson")]
pub struct JacobiCoefficients {
    n_lo: i64,
    a: Vec<f64>,
    b: Vec<f64>,
    tail: Tail,
}

#[derive(Serialize, Deserialize)]
struct JacobiJson {
    n_lo: i64,
    n_hi: i64,
    a: Vec<f64>,
    b: Vec<f64>,
    tail: Tail,
}

impl TryFrom<JacobiJson> for JacobiCoefficients {
    type Error = Error;
    fn try_from(j: JacobiJson) -> Result<Self> {
        if j.n_hi < j.n_lo || (j.n_hi - j.n_lo + 1) as usize != j.a.len() {
            return invalid("window [n_lo, n_hi] does not match the coefficient lengths");
        }
        JacobiCoefficients::new(j.n_lo, j.a, j.b, j.tail)
    }
}

impl From<JacobiCoefficients> for JacobiJson {
    fn from(j: JacobiCoefficients) -> Self {
        JacobiJson {
            n_lo: j.n_lo,
            n_hi: j.n_hi(),
            a: j.a,
            b: j.b,
            tail: j.tail,
        }
    }
}

impl JacobiCoefficients {
    pub fn new(n_lo: i64, a: Vec<f64>, b: Vec<f64>, tail: Tail) -> Result<Self> {
        if a.is_empty() || a.len() != b.len() {
            return invalid("window needs equal, nonempty a and b");
        }
        check_coeffs(&a, &b)?;
        tail.validate()?;
        Ok(JacobiCoefficients { n_lo, a, b, tail })
    }

    /// The free operator `a ≡ 1`, `b ≡ 0`.
    pub fn free() -> Self {
        JacobiCoefficients {
            n_lo: 0,
            a: vec![1.0],
            b: vec![0.0],
            tail: Tail::Free,
        }
    }

    pub fn constant(a: f64, b: f64) -> Result<Self> {
        JacobiCoefficients::new(0, vec![a], vec![b], Tail::Constant { a, b })
    }

    pub fn periodic(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let tail = Tail::Periodic { a: a.clone(), b: b.clone() };
        JacobiCoefficients::new(0, a, b, tail)
    }

    pub fn n_lo(&self) -> i64 {
        self.n_lo
    }

    pub fn n_hi(&self) -> i64 {
        self.n_lo + self.a.len() as i64 - 1
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    fn in_window(&self, n: i64) -> Option<usize> {
        (n >= self.n_lo && n <= self.n_hi()).then(|| (n - self.n_lo) as usize)
    }

    pub fn a(&self, n: i64) -> f64 {
        match self.in_window(n) {
            Some(i) => self.a[i],
            None => self.tail.at(n).0,
        }
    }

    pub fn b(&self, n: i64) -> f64 {
        match self.in_window(n) {
            Some(i) => self.b[i],
            None => self.tail.at(n).1,
        }
    }

    /// Same operator with the explicit window widened to cover `[lo, hi]`.
    pub fn widened(&self, lo: i64, hi: i64) -> Self {
        let lo = lo.min(self.n_lo);
        let hi = hi.max(self.n_hi());
        JacobiCoefficients {
            n_lo: lo,
            a: (lo..=hi).map(|n| self.a(n)).collect(),
            b: (lo..=hi).map(|n| self.b(n)).collect(),
            tail: self.tail.clone(),
        }
    }

    /// Sets `(a_n, b_n)`, widening the window as needed.
    pub fn with_entry(&self, n: i64, a: f64, b: f64) -> Result<Self> {
        check_coeffs(&[a], &[b])?;
        let mut out = self.widened(n, n);
        let i = (n - out.n_lo) as usize;
        out.a[i] = a;
        out.b[i] = b;
        Ok(out)
    }

    /// `sup_n a_n` and `sup_n |b_n|`.
    pub fn sup(&self) -> (f64, f64) {
        let (ta, tb) = self.tail.sup();
        (
            self.a.iter().fold(ta, |m, x| m.max(*x)),
            self.b.iter().fold(tb, |m, x| m.max(x.abs())),
        )
    }

    /// Upper bound `2 sup a + sup |b|` on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        let (a, b) = self.sup();
        2.0 * a + b
    }
}

impl CoefficientSource for JacobiCoefficients {
    fn coeff_a(&self, n: i64) -> Option<f64> {
        Some(self.a(n))
    }
    fn coeff_b(&self, n: i64) -> Option<f64> {
        Some(self.b(n))
    }
}

/// `J₊`: the restriction of a whole-line operator to sites `n ≥ start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfLineRestriction {
    pub base: JacobiCoefficients,
    pub start: i64,
}

impl HalfLineRestriction {
    pub fn new(base: JacobiCoefficients, start: i64) -> Self {
        HalfLineRestriction { base, start }
    }

    /// Last site with explicitly stored coefficients.
    pub fn explicit_end(&self) -> i64 {
        self.base.n_hi()
    }

    /// Green function of `J₊` at its first site (the Weyl m-function).
    pub fn m_function(&self, z: Complex64) -> Result<Complex64> {
        check_upper(z)?;
        right_green(&self.base, self.start, z)
    }
}

impl CoefficientSource for HalfLineRestriction {
    fn coeff_a(&self, n: i64) -> Option<f64> {
        (n >= self.start).then(|| self.base.a(n))
    }
    fn coeff_b(&self, n: i64) -> Option<f64> {
        (n >= self.start).then(|| self.base.b(n))
    }
}

/// `(S^k J)`: `a'_n = a_{n+k}`, `b'_n = b_{n+k}`.
pub fn shift(j: &JacobiCoefficients, k: i64) -> JacobiCoefficients {
    JacobiCoefficients {
        n_lo: j.n_lo - k,
        a: j.a.clone(),
        b: j.b.clone(),
        tail: j.tail.shifted(k),
    }
}

/// Truncation settings for [`metric`].
#[derive(Debug, Clone, Copy)]
pub struct MetricConfig {
    pub tol: f64,
    pub index_cap: i64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            tol: 1e-14,
            index_cap: 2000,
        }
    }
}

/// `d(J, J') = Σ_n 2^{-|n|} (|a_n - a'_n| + |b_n - b'_n|)`.
pub fn metric(j1: &JacobiCoefficients, j2: &JacobiCoefficients) -> Result<f64> {
    metric_with(j1, j2, MetricConfig::default())
}

pub fn metric_with(j1: &JacobiCoefficients, j2: &JacobiCoefficients, cfg: MetricConfig) -> Result<f64> {
    let lo = j1.n_lo.min(j2.n_lo);
    let hi = j1.n_hi().max(j2.n_hi());
    let term = |n: i64| {
        0.5f64.powi(n.unsigned_abs().min(2000) as i32)
            * ((j1.a(n) - j2.a(n)).abs() + (j1.b(n) - j2.b(n)).abs())
    };
    if j1.tail == j2.tail {
        // terms outside the union of the windows vanish
        return Ok((lo..=hi).map(term).sum());
    }
    let (a1, b1) = j1.tail.sup();
    let (a2, b2) = j2.tail.sup();
    let d = a1 + a2 + b1 + b2;
    // Σ_{|n| > N} 2^{-|n|} d = 2 d 2^{-N}
    let needed = ((2.0 * d / cfg.tol).log2().ceil() as i64).max(0);
    let n = needed.max(lo.abs()).max(hi.abs());
    if n > cfg.index_cap {
        return Err(Error::MetricTolerance {
            tol: cfg.tol,
            cap: cfg.index_cap as usize,
        });
    }
    Ok((-n..=n).map(term).sum())
}

/// Settings for Green function evaluation.
#[derive(Debug, Clone, Copy)]
pub struct GreenConfig {
    /// Target entry error of the truncation method.
    pub tol: f64,
    /// Largest admissible half-width of the truncated matrix.
    pub max_truncation: usize,
}

impl Default for GreenConfig {
    fn default() -> Self {
        GreenConfig {
            tol: 1e-10,
            max_truncation: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreenMethod {
    /// Resolvent entry of a finite section `[n - N, n + N]`.
    Truncation,
    /// Half-line continued fractions closed by the periodic fixed point.
    ContinuedFraction,
}

fn check_upper(z: Complex64) -> Result<()> {
    if !(z.im > 0.0) || !z.re.is_finite() {
        return invalid(format!("Green functions need Im z > 0, got {z}"));
    }
    Ok(())
}

/// `g_n(z) = ⟨δ_n, (J - z)^{-1} δ_n⟩` by continued fractions.
pub fn green_diag(j: &JacobiCoefficients, n: i64, z: Complex64) -> Result<Complex64> {
    green_diag_with(j, n, z, GreenMethod::ContinuedFraction, &GreenConfig::default())
}

pub fn green_diag_with(
    j: &JacobiCoefficients,
    n: i64,
    z: Complex64,
    method: GreenMethod,
    cfg: &GreenConfig,
) -> Result<Complex64> {
    check_upper(z)?;
    match method {
        GreenMethod::Truncation => {
            let half_width = truncation_size(j, z, cfg)?;
            truncated_green(j, n, z, half_width)
        }
        GreenMethod::ContinuedFraction => {
            let rp = right_green(j, n + 1, z)?;
            let rm = left_green(j, n - 1, z)?;
            let an = j.a(n);
            let am = j.a(n - 1);
            Ok(1.0 / (j.b(n) - z - an * an * rp - am * am * rm))
        }
    }
}

/// Half-width `N` for which a Combes-Thomas estimate guarantees the
/// truncation error target.
///
/// With `μ = asinh(Im z / (4 sup a))` the conjugated operator satisfies
/// `‖e^{μX} J e^{-μX} - J‖ ≤ Im z / 2`, so `|G(m, k)| ≤ (2 / Im z) e^{-μ|m-k|}`
/// and cutting at distance `N` on both sides costs at most
/// `8 sup a e^{-μN} / (Im z)^2`.
pub fn truncation_size(j: &JacobiCoefficients, z: Complex64, cfg: &GreenConfig) -> Result<usize> {
    let (amax, _) = j.sup();
    let eta = z.im;
    let mu = (eta / (4.0 * amax)).asinh();
    let needed = ((8.0 * amax / (eta * eta * cfg.tol)).ln() / mu).ceil().max(1.0);
    if !(needed <= cfg.max_truncation as f64) {
        return Err(Error::TruncationCap {
            needed: if needed.is_finite() { needed as usize } else { usize::MAX },
            cap: cfg.max_truncation,
        });
    }
    Ok(needed as usize)
}

/// Solves `(J_N - z) x = δ_n` on the section `[n - N, n + N]` with the
/// Thomas algorithm and returns `x_n`.
pub fn truncated_green(j: &JacobiCoefficients, n: i64, z: Complex64, half_width: usize) -> Result<Complex64> {
    check_upper(z)?;
    let lo = n - half_width as i64;
    let size = 2 * half_width + 1;
    let centre = half_width;
    // forward elimination; pivots keep Im < 0 so they never vanish
    let mut c_prime = vec![Complex64::new(0.0, 0.0); size];
    let mut d_prime = vec![Complex64::new(0.0, 0.0); size];
    for i in 0..size {
        let site = lo + i as i64;
        let diag = Complex64::new(j.b(site), 0.0) - z;
        let rhs = if i == centre { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
        let (pivot, r) = if i == 0 {
            (diag, rhs)
        } else {
            let sub = j.a(site - 1);
            (diag - sub * c_prime[i - 1], rhs - sub * d_prime[i - 1])
        };
        c_prime[i] = j.a(site) / pivot;
        d_prime[i] = r / pivot;
    }
    let mut x = d_prime[size - 1];
    for i in (centre..size - 1).rev() {
        x = d_prime[i] - c_prime[i] * x;
    }
    Ok(x)
}

/// Fixed point in the upper half plane of the Möbius map `[[α, β], [γ, δ]]`.
fn mobius_fixed_point(m: [[Complex64; 2]; 2]) -> Result<Complex64> {
    let [[alpha, beta], [gamma, delta]] = m;
    let apply = |r: Complex64| (alpha * r + beta) / (gamma * r + delta);
    let candidates = if gamma.norm() == 0.0 {
        vec![beta / (delta - alpha)]
    } else {
        let disc = ((delta - alpha) * (delta - alpha) + 4.0 * beta * gamma).sqrt();
        vec![(alpha - delta + disc) / (2.0 * gamma), (alpha - delta - disc) / (2.0 * gamma)]
    };
    // the attracting fixed point maximizes |γ r + δ|
    let r = candidates
        .into_iter()
        .filter(|r| r.is_finite())
        .max_by(|x, y| (gamma * x + delta).norm().total_cmp(&(gamma * y + delta).norm()))
        .ok_or(Error::NoConvergence { residual: f64::INFINITY })?;
    let residual = (apply(r) - r).norm() / (1.0 + r.norm());
    if !(residual <= 1e-9) || !(r.im > 0.0) {
        return Err(Error::NoConvergence { residual });
    }
    Ok(r)
}

fn mat_mul(x: [[Complex64; 2]; 2], y: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    [
        [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
        [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
    ]
}

/// Green function at site `k` of the restriction to sites `≥ k`.
fn right_green(j: &JacobiCoefficients, k: i64, z: Complex64) -> Result<Complex64> {
    let start = k.max(j.n_hi() + 1);
    let p = j.tail.period() as i64;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut m = [[one, zero], [zero, one]];
    for s in start..start + p {
        let a = j.a(s);
        let step = [[zero, one], [Complex64::new(-a * a, 0.0), j.b(s) - z]];
        m = mat_mul(m, step);
    }
    let mut r = mobius_fixed_point(m)?;
    for s in (k..start).rev() {
        let a = j.a(s);
        r = 1.0 / (j.b(s) - z - a * a * r);
    }
    Ok(r)
}

/// Green function at site `k` of the restriction to sites `≤ k`.
fn left_green(j: &JacobiCoefficients, k: i64, z: Complex64) -> Result<Complex64> {
    let start = k.min(j.n_lo - 1);
    let p = j.tail.period() as i64;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut m = [[one, zero], [zero, one]];
    for s in ((start - p + 1)..=start).rev() {
        let a = j.a(s - 1);
        let step = [[zero, one], [Complex64::new(-a * a, 0.0), j.b(s) - z]];
        m = mat_mul(m, step);
    }
    let mut r = mobius_fixed_point(m)?;
    for s in (start + 1)..=k {
        let a = j.a(s - 1);
        r = 1.0 / (j.b(s) - z - a * a * r);
    }
    Ok(r)
}

/// Boundary value `g_n(t + i0)` by Richardson extrapolation over `(η, η/2)`.
pub fn green_boundary(j: &JacobiCoefficients, n: i64, t: f64, eta: f64) -> Result<Complex64> {
    richardson(|e| green_diag(j, n, Complex64::new(t, e)), eta)
}

/// Sampling settings for [`reflectionless_residual_with`].
#[derive(Debug, Clone, Copy)]
pub struct ResidualConfig {
    pub grid: usize,
    pub eta: f64,
    pub sites: (i64, i64),
}

/// `max |Re g_n(t + i0)|` over `grid` interior points per interval of `M`
/// and sites `-2..=2`.
pub fn reflectionless_residual(j: &JacobiCoefficients, set: &CompactSet, grid: usize, eta: f64) -> Result<f64> {
    reflectionless_residual_with(j, set, ResidualConfig { grid, eta, sites: (-2, 2) })
}

pub fn reflectionless_residual_with(j: &JacobiCoefficients, set: &CompactSet, cfg: ResidualConfig) -> Result<f64> {
    if cfg.grid == 0 || !(cfg.eta > 0.0) || cfg.sites.0 > cfg.sites.1 {
        return invalid("residual needs grid > 0, eta > 0 and a nonempty site range");
    }
    let mut worst = 0.0f64;
    for t in set.interior_samples(cfg.grid) {
        for n in cfg.sites.0..=cfg.sites.1 {
            worst = worst.max(green_boundary(j, n, t, cfg.eta)?.re.abs());
        }
    }
    Ok(worst)
}
