//! Piecewise-constant Krein functions and the exponential Herglotz
//! representation `H(z) = (z + R) exp(∫ ξ(t) / (t - z) dt)`.
//!
//! Because ξ is a step function every integral here is elementary: a piece
//! `(α, β)` with value `v` contributes the factor `((z - β) / (z - α))^v`
//! to `H(z)` and `v ln|(β - x) / (α - x)|` to the Hilbert transform.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::Located;

/// A step function on `[-R, R]` with values in `[0, 1]`.
///
/// Stored in canonical form: breakpoints strictly increasing and adjacent
/// pieces carrying distinct values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepFunctionJson", into = "StepFunctionJson")]
pub struct StepFunction {
    r: f64,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct StepFunctionJson {
    #[serde(rename = "R")]
    r: f64,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<StepFunctionJson> for StepFunction {
    type Error = Error;
    fn try_from(j: StepFunctionJson) -> Result<Self> {
        StepFunction::new(j.r, j.breakpoints, j.values)
    }
}

impl From<StepFunction> for StepFunctionJson {
    fn from(s: StepFunction) -> Self {
        StepFunctionJson {
            r: s.r,
            breakpoints: s.breakpoints,
            values: s.values,
        }
    }
}

/// One constant piece `(lo, hi)` of a step function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
}

impl Piece {
    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }
}

impl StepFunction {
    pub fn new(r: f64, breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return invalid(format!("domain bound R must be positive, got {r}"));
        }
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return invalid("need one more breakpoint than values and at least one piece");
        }
        if breakpoints[0] != -r || *breakpoints.last().unwrap() != r {
            return invalid("breakpoints must start at -R and end at R");
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return invalid("breakpoints must be strictly increasing");
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return invalid("Krein function values must lie in [0, 1]");
        }
        let mut out = StepFunction {
            r,
            breakpoints: vec![breakpoints[0]],
            values: Vec::with_capacity(values.len()),
        };
        for (i, &v) in values.iter().enumerate() {
            if out.values.last() == Some(&v) {
                *out.breakpoints.last_mut().unwrap() = breakpoints[i + 1];
            } else {
                out.values.push(v);
                out.breakpoints.push(breakpoints[i + 1]);
            }
        }
        Ok(out)
    }

    /// Builds a step function from contiguous pieces tiling `[-R, R]`.
    /// Pieces of zero length are dropped.
    pub fn from_pieces(r: f64, pieces: &[(f64, f64, f64)]) -> Result<Self> {
        let mut bps = vec![-r];
        let mut vals = Vec::new();
        for &(lo, hi, v) in pieces {
            if hi < lo {
                return invalid(format!("piece ({lo}, {hi}) is reversed"));
            }
            if lo != *bps.last().unwrap() {
                return invalid(format!("piece starting at {lo} leaves a hole or overlap"));
            }
            if hi > lo {
                bps.push(hi);
                vals.push(v);
            }
        }
        StepFunction::new(r, bps, vals)
    }

    /// The constant function `value` on `[-R, R]`.
    pub fn constant(r: f64, value: f64) -> Result<Self> {
        StepFunction::new(r, vec![-r, r], vec![value])
    }

    pub fn bound(&self) -> f64 {
        self.r
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn pieces(&self) -> impl Iterator<Item = Piece> + '_ {
        self.values.iter().enumerate().map(move |(i, &value)| Piece {
            lo: self.breakpoints[i],
            hi: self.breakpoints[i + 1],
            value,
        })
    }

    /// Value at `t`; right-continuous at breakpoints, zero outside `[-R, R)`.
    pub fn eval(&self, t: f64) -> f64 {
        if t < -self.r || t >= self.r {
            return 0.0;
        }
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        self.values[idx - 1]
    }

    /// Whether the function jumps at `x` (with the value taken as 0 outside
    /// `[-R, R]`). These are exactly the points where the Hilbert transform
    /// has a logarithmic singularity.
    pub fn jumps_at(&self, x: f64) -> bool {
        self.jump_weights().any(|(p, _)| p == x)
    }

    /// `(x_j, v_j - v_{j+1})` for every breakpoint with a nonzero jump, with
    /// the convention `v = 0` outside the domain.
    pub fn jump_weights(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let m = self.values.len();
        (0..=m).filter_map(move |j| {
            let left = if j == 0 { 0.0 } else { self.values[j - 1] };
            let right = if j == m { 0.0 } else { self.values[j] };
            let w = left - right;
            (w != 0.0).then(|| (self.breakpoints[j], w))
        })
    }

    /// Exact integral over `[lo, hi] ∩ [-R, R]`.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        self.pieces()
            .map(|p| {
                let a = p.lo.max(lo);
                let b = p.hi.min(hi);
                if b > a {
                    p.value * (b - a)
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Extends to `[-r2, r2]` with value 1 on the left and 0 on the right,
    /// which leaves `H` unchanged.
    pub fn extend_to(&self, r2: f64) -> Result<Self> {
        if r2 < self.r {
            return invalid(format!("cannot shrink domain from {} to {r2}", self.r));
        }
        if r2 == self.r {
            return Ok(self.clone());
        }
        let mut bps = Vec::with_capacity(self.breakpoints.len() + 2);
        let mut vals = Vec::with_capacity(self.values.len() + 2);
        bps.push(-r2);
        vals.push(1.0);
        bps.extend_from_slice(&self.breakpoints);
        vals.extend_from_slice(&self.values);
        vals.push(0.0);
        bps.push(r2);
        StepFunction::new(r2, bps, vals)
    }

    /// Replaces the function on `[lo, hi]` by `inner` pieces, which must tile
    /// `[lo, hi]`.
    pub fn splice(&self, lo: f64, hi: f64, inner: &[(f64, f64, f64)]) -> Result<Self> {
        if lo < -self.r || hi > self.r || lo > hi {
            return invalid(format!("splice range ({lo}, {hi}) leaves the domain"));
        }
        let mut pieces = Vec::new();
        for p in self.pieces() {
            if p.lo < lo {
                pieces.push((p.lo, p.hi.min(lo), p.value));
            }
        }
        pieces.extend_from_slice(inner);
        for p in self.pieces() {
            if p.hi > hi {
                pieces.push((p.lo.max(hi), p.hi, p.value));
            }
        }
        StepFunction::from_pieces(self.r, &pieces)
    }

    /// `∫ |self - other|` after extending both to the larger domain.
    pub fn l1_distance(&self, other: &StepFunction) -> Result<f64> {
        let r = self.r.max(other.r);
        let a = self.extend_to(r)?;
        let b = other.extend_to(r)?;
        let mut pts: Vec<f64> = a.breakpoints.iter().chain(&b.breakpoints).copied().collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        Ok(pts
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                (a.eval(mid) - b.eval(mid)).abs() * (w[1] - w[0])
            })
            .sum())
    }

    /// Principal-value Hilbert transform `∫_{-R}^{R} ξ(t) / (t - x) dt`.
    pub fn hilbert_transform(&self, x: f64) -> Result<f64> {
        if self.jumps_at(x) {
            return Err(Error::OnBreakpoint { x });
        }
        Ok(self.log_sum(x))
    }

    /// `Σ_j w_j ln|x_j - x|`, unchecked.
    #[inline]
    pub(crate) fn log_sum(&self, x: f64) -> f64 {
        let m = self.values.len();
        let mut acc = 0.0;
        let mut left = 0.0;
        for j in 0..=m {
            let right = if j == m { 0.0 } else { self.values[j] };
            let w = left - right;
            if w != 0.0 {
                acc += w * (self.breakpoints[j] - x).abs().ln();
            }
            left = right;
        }
        acc
    }
}

/// Krein function of the free Jacobi matrix on `[-R, R]`.
pub fn xi_free(r: f64) -> Result<StepFunction> {
    if !(r >= 2.0) {
        return invalid(format!("free Krein function needs R >= 2, got {r}"));
    }
    StepFunction::from_pieces(r, &[(-r, -2.0, 1.0), (-2.0, 2.0, 0.5), (2.0, r, 0.0)])
}

/// Principal-value Hilbert transform of a step function.
pub fn hilbert_transform(f: &StepFunction, x: f64) -> Result<f64> {
    f.hilbert_transform(x)
}

/// The Herglotz function `H` determined by a Krein function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HerglotzRep {
    pub xi: StepFunction,
}

impl HerglotzRep {
    pub fn new(xi: StepFunction) -> Self {
        HerglotzRep { xi }
    }

    pub fn bound(&self) -> f64 {
        self.xi.bound()
    }

    /// `H(z)` for `z` off `[-R, R]`, in closed form.
    ///
    /// For `Im z > 0` both `z - β` and `z - α` lie in the upper half plane
    /// with `arg(z - β) > arg(z - α)`, so the ratio stays in the upper half
    /// plane and the principal power is the correct branch. For real `z`
    /// outside `[α, β]` the ratio is positive.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let r = self.xi.bound();
        if z.im == 0.0 && z.re.abs() <= r {
            return Err(Error::OnSupport { re: z.re, im: z.im });
        }
        let mut exponent = Complex64::new(0.0, 0.0);
        for p in self.xi.pieces() {
            if p.value != 0.0 {
                exponent += p.value * ((z - p.hi) / (z - p.lo)).ln();
            }
        }
        Ok((z + r) * exponent.exp())
    }

    /// `H(x + i0) = |H(x)| e^{iπξ(x)}` with `|H(x)| = (x + R) e^{(Tξ)(x)}`.
    pub fn boundary_value(&self, x: f64) -> Result<Complex64> {
        let r = self.xi.bound();
        if !(x > -r && x < r) {
            return invalid(format!("boundary point {x} outside (-R, R)"));
        }
        if self.xi.breakpoints().contains(&x) {
            return Err(Error::OnBreakpoint { x });
        }
        let modulus = (x + r) * self.xi.log_sum(x).exp();
        Ok(Complex64::from_polar(modulus, PI * self.xi.eval(x)))
    }

    /// `|H(x)|` without domain checks; used inside quadrature loops.
    #[inline]
    pub(crate) fn modulus(&self, x: f64) -> f64 {
        (x + self.xi.bound()) * self.xi.log_sum(x).exp()
    }

    /// `|H(x)|` at a located point, with breakpoint distances measured from
    /// the nearer end of the enclosing interval.
    #[inline]
    pub(crate) fn modulus_located(&self, p: &Located) -> f64 {
        let acc: f64 = self
            .xi
            .jump_weights()
            .map(|(xj, w)| w * p.distance_to(xj).ln())
            .sum();
        p.distance_to(-self.xi.bound()) * acc.exp()
    }

    /// `H(x + i0)` estimated from the upper half plane by Richardson
    /// extrapolation over `(η, η/2)`.
    pub fn boundary_limit(&self, x: f64, eta: f64) -> Result<Complex64> {
        richardson(|e| self.eval(Complex64::new(x, e)), eta)
    }

    /// `|h(x)| = |H(x)| / |H_0(x)|` on `(-2, 2)`; requires ξ = 1/2 there.
    pub fn correction_factor(&self, x: f64) -> Result<f64> {
        let r = self.xi.bound();
        if r < 2.0 {
            return invalid("correction factor needs R >= 2");
        }
        if !(x > -2.0 && x < 2.0) {
            return invalid(format!("correction factor is defined on (-2, 2), got {x}"));
        }
        for p in self.xi.pieces() {
            if p.hi > -2.0 && p.lo < 2.0 && p.value != 0.5 {
                return Err(Error::NotReflectionless {
                    lo: p.lo.max(-2.0),
                    hi: p.hi.min(2.0),
                    value: p.value,
                });
            }
        }
        let log = |a: f64, b: f64| ((b - x) / (a - x)).abs().ln();
        let mut exponent = 0.0;
        for p in self.xi.pieces() {
            if p.lo < -2.0 {
                exponent += (p.value - 1.0) * log(p.lo, p.hi.min(-2.0));
            }
            if p.hi > 2.0 {
                exponent += p.value * log(p.lo.max(2.0), p.hi);
            }
        }
        Ok(exponent.exp())
    }
}

/// Two-point Richardson extrapolation `2 f(η/2) - f(η)` of a quantity with
/// an O(η) leading error.
pub fn richardson<F>(f: F, eta: f64) -> Result<Complex64>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let coarse = f(eta)?;
    let fine = f(0.5 * eta)?;
    Ok(2.0 * fine - coarse)
}

pub fn herglotz_eval(rep: &HerglotzRep, z: Complex64) -> Result<Complex64> {
    rep.eval(z)
}

pub fn boundary_value(rep: &HerglotzRep, x: f64) -> Result<Complex64> {
    rep.boundary_value(x)
}

pub fn correction_factor(rep: &HerglotzRep, x: f64) -> Result<f64> {
    rep.correction_factor(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn xi_free_shapes() {
        let two = xi_free(2.0).unwrap();
        assert_eq!(two.values(), &[0.5]);
        assert_eq!(two.breakpoints(), &[-2.0, 2.0]);
        let three = xi_free(3.0).unwrap();
        assert_eq!(three.values(), &[1.0, 0.5, 0.0]);
        assert_eq!(three.breakpoints(), &[-3.0, -2.0, 2.0, 3.0]);
        assert_eq!(three.eval(1.0), 0.5);
        assert!(xi_free(1.5).is_err());
    }

    #[test]
    fn canonical_form_merges_equal_neighbours() {
        let s = StepFunction::from_pieces(3.0, &[(-3.0, 0.0, 0.5), (0.0, 1.0, 0.5), (1.0, 3.0, 0.0)])
            .unwrap();
        assert_eq!(s.values(), &[0.5, 0.0]);
        assert_eq!(s.breakpoints(), &[-3.0, 1.0, 3.0]);
        assert!(StepFunction::new(1.0, vec![-1.0, 1.0], vec![1.5]).is_err());
        assert!(StepFunction::new(1.0, vec![-1.0, 0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn free_herglotz_values() {
        let h0 = HerglotzRep::new(xi_free(2.0).unwrap());
        let v = h0.eval(c(0.0, 2.0)).unwrap();
        assert!((v - c(0.0, 8f64.sqrt())).norm() < 1e-14);
        let v = h0.eval(c(3.0, 0.0)).unwrap();
        assert!((v - c(5f64.sqrt(), 0.0)).norm() < 1e-14);
        assert!(h0.eval(c(1.0, 0.0)).is_err());
    }

    #[test]
    fn full_piece_telescopes() {
        let rep = HerglotzRep::new(StepFunction::constant(3.0, 1.0).unwrap());
        let v = rep.eval(c(4.0, 0.0)).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn boundary_values_of_free_function() {
        let h0 = HerglotzRep::new(xi_free(2.0).unwrap());
        assert!((h0.boundary_value(0.0).unwrap() - c(0.0, 2.0)).norm() < 1e-14);
        assert!((h0.boundary_value(1.0).unwrap() - c(0.0, 3f64.sqrt())).norm() < 1e-14);
        let h3 = HerglotzRep::new(xi_free(3.0).unwrap());
        assert!((h3.boundary_value(2.5).unwrap() - c(1.5, 0.0)).norm() < 1e-14);
        assert!(matches!(h3.boundary_value(2.0), Err(Error::OnBreakpoint { .. })));
    }

    #[test]
    fn hilbert_transform_of_indicator() {
        let f = StepFunction::from_pieces(2.0, &[(-2.0, 0.0, 0.0), (0.0, 1.0, 1.0), (1.0, 2.0, 0.0)])
            .unwrap();
        assert!((f.hilbert_transform(2.0).unwrap() + 2f64.ln()).abs() < 1e-15);
        assert!(f.hilbert_transform(0.5).unwrap().abs() < 1e-15);
        assert!((f.hilbert_transform(-1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(matches!(f.hilbert_transform(1.0), Err(Error::OnBreakpoint { .. })));
    }

    #[test]
    fn correction_factor_examples() {
        let free = HerglotzRep::new(xi_free(3.0).unwrap());
        assert!((free.correction_factor(0.7).unwrap() - 1.0).abs() < 1e-15);

        let right = xi_free(2.5).unwrap().splice(2.0, 2.5, &[(2.0, 2.5, 0.5)]).unwrap();
        let h = HerglotzRep::new(right).correction_factor(0.0).unwrap();
        assert!((h - 1.25f64.sqrt()).abs() < 1e-14);

        let left = xi_free(3.0).unwrap().splice(-3.0, -2.0, &[(-3.0, -2.0, 0.0)]).unwrap();
        let h = HerglotzRep::new(left).correction_factor(0.0).unwrap();
        assert!((h - 1.5).abs() < 1e-14);

        let bad = xi_free(3.0).unwrap().splice(0.0, 1.0, &[(0.0, 1.0, 1.0)]).unwrap();
        assert!(matches!(
            HerglotzRep::new(bad).correction_factor(0.0),
            Err(Error::NotReflectionless { .. })
        ));
    }

    #[test]
    fn extension_leaves_h_unchanged() {
        let xi = xi_free(2.0).unwrap();
        let wide = xi.extend_to(5.0).unwrap();
        let z = c(0.3, 0.7);
        let a = HerglotzRep::new(xi).eval(z).unwrap();
        let b = HerglotzRep::new(wide).eval(z).unwrap();
        assert!((a - b).norm() < 1e-13);
    }

    #[test]
    fn json_shape() {
        let xi = xi_free(3.0).unwrap();
        let s = serde_json::to_string(&xi).unwrap();
        assert_eq!(s, r#"{"R":3.0,"breakpoints":[-3.0,-2.0,2.0,3.0],"values":[1.0,0.5,0.0]}"#);
        let back: StepFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, xi);
        assert!(serde_json::from_str::<StepFunction>(r#"{"R":1.0,"breakpoints":[-1.0,1.0],"values":[2.0]}"#).is_err());
    }
}
