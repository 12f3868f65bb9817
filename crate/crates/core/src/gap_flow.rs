//! Rearranging a Krein function into the canonical class X(K).
//!
//! Inside every bounded gap `(c, d)` of `K` the mass `g = ∫_c^d ξ` is pushed
//! against the right edge, giving `χ_{(d-g, d)}`; left of `K` the function is
//! set to 1 and right of `K` to 0. Each step lowers the Hilbert transform at
//! every point of `K`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::krein::StepFunction;

/// A finite union of disjoint closed intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CompactSetJson", into = "CompactSetJson")]
pub struct CompactSet {
    intervals: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct CompactSetJson {
    intervals: Vec<[f64; 2]>,
}

impl TryFrom<CompactSetJson> for CompactSet {
    type Error = Error;
    fn try_from(j: CompactSetJson) -> Result<Self> {
        CompactSet::new(j.intervals.into_iter().map(|[a, b]| (a, b)).collect())
    }
}

impl From<CompactSet> for CompactSetJson {
    fn from(k: CompactSet) -> Self {
        CompactSetJson {
            intervals: k.intervals.into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }
}

impl CompactSet {
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return invalid("compact set needs at least one interval");
        }
        if intervals
            .iter()
            .any(|&(c, d)| !(c.is_finite() && d.is_finite() && c < d))
        {
            return invalid("every interval must satisfy c < d");
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        if intervals.windows(2).any(|w| !(w[0].1 < w[1].0)) {
            return invalid("intervals must be disjoint with nonempty gaps between them");
        }
        Ok(CompactSet { intervals })
    }

    pub fn interval(c: f64, d: f64) -> Result<Self> {
        CompactSet::new(vec![(c, d)])
    }

    /// `[B - 2A, B + 2A]`, the spectrum of the constant-coefficient operator.
    pub fn constant_band(a: f64, b: f64) -> Result<Self> {
        CompactSet::interval(b - 2.0 * a, b + 2.0 * a)
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Bounded components of the complement, left to right.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        self.intervals.windows(2).map(|w| (w[0].1, w[1].0)).collect()
    }

    pub fn min(&self) -> f64 {
        self.intervals[0].0
    }

    pub fn max(&self) -> f64 {
        self.intervals[self.intervals.len() - 1].1
    }

    pub fn max_abs(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// `max|K| + 1`, the default domain bound.
    pub fn default_bound(&self) -> f64 {
        self.max_abs() + 1.0
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(c, d)| d - c).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(c, d)| c <= x && x <= d)
    }

    pub fn contains_interior(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(c, d)| c < x && x < d)
    }

    /// Length of `(lo, hi) ∩ K`.
    pub fn overlap(&self, lo: f64, hi: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&(c, d)| (d.min(hi) - c.max(lo)).max(0.0))
            .sum()
    }

    /// The image `alpha * K + beta` for `alpha > 0`.
    pub fn affine(&self, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return invalid("affine scale must be positive");
        }
        CompactSet::new(
            self.intervals
                .iter()
                .map(|&(c, d)| (alpha * c + beta, alpha * d + beta))
                .collect(),
        )
    }

    /// `per_interval` evenly spaced midpoints inside each interval.
    pub fn interior_samples(&self, per_interval: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(per_interval * self.intervals.len());
        for &(c, d) in &self.intervals {
            let h = (d - c) / per_interval as f64;
            out.extend((0..per_interval).map(|j| c + (j as f64 + 0.5) * h));
        }
        out
    }

    pub(crate) fn check_inside(&self, r: f64) -> Result<()> {
        if self.min() < -r || self.max() > r {
            return invalid(format!("K = [{}, {}] is not inside [-{r}, {r}]", self.min(), self.max()));
        }
        Ok(())
    }
}

/// A Krein function certified to lie in X(K).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalKrein {
    xi: StepFunction,
    set: CompactSet,
}

impl CanonicalKrein {
    pub fn new(xi: StepFunction, set: CompactSet) -> Result<Self> {
        if !is_canonical(&xi, &set) {
            return invalid("Krein function does not have the X(K) shape");
        }
        Ok(CanonicalKrein { xi, set })
    }

    /// The element of X(K) with mass `jumps[j]` packed against the right
    /// edge of gap `j`.
    pub fn from_jumps(set: &CompactSet, r: f64, jumps: &[f64]) -> Result<Self> {
        set.check_inside(r)?;
        let gaps = set.gaps();
        if jumps.len() != gaps.len() {
            return invalid(format!("{} jumps for {} gaps", jumps.len(), gaps.len()));
        }
        let mut pieces = vec![(-r, set.min(), 1.0)];
        for (j, &(c, d)) in set.intervals().iter().enumerate() {
            pieces.push((c, d, 0.5));
            if let Some(&(gc, gd)) = gaps.get(j) {
                let g = jumps[j];
                if !(0.0..=gd - gc).contains(&g) {
                    return invalid(format!("jump mass {g} outside [0, {}]", gd - gc));
                }
                let s = jump_point(gc, gd, g);
                pieces.push((gc, s, 0.0));
                pieces.push((s, gd, 1.0));
            }
        }
        pieces.push((set.max(), r, 0.0));
        let xi = StepFunction::from_pieces(r, &pieces)?;
        Ok(CanonicalKrein {
            xi,
            set: set.clone(),
        })
    }

    pub fn xi(&self) -> &StepFunction {
        &self.xi
    }

    pub fn into_xi(self) -> StepFunction {
        self.xi
    }

    pub fn set(&self) -> &CompactSet {
        &self.set
    }

    /// Mass in each gap, left to right.
    pub fn jumps(&self) -> Vec<f64> {
        self.set
            .gaps()
            .iter()
            .map(|&(c, d)| self.xi.integral(c, d))
            .collect()
    }
}

/// Location `d - g` of the up-jump, snapped to the gap edges when rounding
/// would leave a sliver.
fn jump_point(c: f64, d: f64, g: f64) -> f64 {
    let s = d - g;
    let eps = 8.0 * f64::EPSILON * c.abs().max(d.abs()).max(1.0);
    if s - c <= eps {
        c
    } else if d - s <= eps {
        d
    } else {
        s
    }
}

/// Replaces ξ on the gap `(c, d)` by `χ_{(d-g, d)}` with `g = ∫_c^d ξ`.
pub fn gap_modify(xi: &StepFunction, gap: (f64, f64)) -> Result<StepFunction> {
    let (c, d) = gap;
    let r = xi.bound();
    if !(c < d) || c < -r || d > r {
        return invalid(format!("gap ({c}, {d}) is not inside the domain [-{r}, {r}]"));
    }
    if already_packed(xi, c, d) {
        return Ok(xi.clone());
    }
    let g = xi.integral(c, d);
    let s = jump_point(c, d, g);
    xi.splice(c, d, &[(c, s, 0.0), (s, d, 1.0)])
}

/// Whether ξ on `(c, d)` is already zero followed by one.
fn already_packed(xi: &StepFunction, c: f64, d: f64) -> bool {
    let mut seen_one = false;
    for p in xi.pieces().filter(|p| p.hi > c && p.lo < d) {
        if p.value == 1.0 {
            seen_one = true;
        } else if p.value != 0.0 || seen_one {
            return false;
        }
    }
    true
}

/// Fails unless ξ is exactly 1/2 on every interval of `K`.
pub fn check_half_on(xi: &StepFunction, set: &CompactSet) -> Result<()> {
    set.check_inside(xi.bound())?;
    for p in xi.pieces() {
        if set.overlap(p.lo, p.hi) > 0.0 && p.value != 0.5 {
            let (lo, hi) = set
                .intervals()
                .iter()
                .find(|&&(c, d)| d.min(p.hi) > c.max(p.lo))
                .map(|&(c, d)| (c.max(p.lo), d.min(p.hi)))
                .unwrap();
            return Err(Error::NotReflectionless {
                lo,
                hi,
                value: p.value,
            });
        }
    }
    Ok(())
}

/// Every intermediate Krein function of the flow: the input, the function
/// with tails reset, then one entry per modified gap. The last entry lies in
/// X(K).
pub fn flow_steps(xi: &StepFunction, set: &CompactSet) -> Result<Vec<StepFunction>> {
    check_half_on(xi, set)?;
    let r = xi.bound();
    let mut steps = vec![xi.clone()];
    let mut cur = xi.clone();
    if set.min() > -r {
        cur = cur.splice(-r, set.min(), &[(-r, set.min(), 1.0)])?;
    }
    if set.max() < r {
        cur = cur.splice(set.max(), r, &[(set.max(), r, 0.0)])?;
    }
    steps.push(cur.clone());
    for gap in set.gaps() {
        cur = gap_modify(&cur, gap)?;
        steps.push(cur.clone());
    }
    Ok(steps)
}

pub fn flow_to_canonical(xi: &StepFunction, set: &CompactSet) -> Result<CanonicalKrein> {
    let mut steps = flow_steps(xi, set)?;
    let xi0 = steps.pop().expect("flow always has a final step");
    debug_assert!(is_canonical(&xi0, set));
    Ok(CanonicalKrein {
        xi: xi0,
        set: set.clone(),
    })
}

/// Whether ξ has exactly the X(K) shape.
pub fn is_canonical(xi: &StepFunction, set: &CompactSet) -> bool {
    let r = xi.bound();
    if set.min() < -r || set.max() > r {
        return false;
    }
    let gaps = set.gaps();
    let mut gap_state = vec![0.0f64; gaps.len()];
    for p in xi.pieces() {
        if p.lo < set.min() && p.value != 1.0 {
            return false;
        }
        if p.hi > set.max() && p.value != 0.0 {
            return false;
        }
        if set.overlap(p.lo, p.hi) > 0.0 && p.value != 0.5 {
            return false;
        }
        for (j, &(c, d)) in gaps.iter().enumerate() {
            if d.min(p.hi) > c.max(p.lo) {
                // inside a gap the values read 0 then 1, nondecreasing
                if !(p.value == 0.0 || p.value == 1.0) || p.value < gap_state[j] {
                    return false;
                }
                gap_state[j] = p.value;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krein::xi_free;

    #[test]
    fn compact_set_validation() {
        assert!(CompactSet::new(vec![]).is_err());
        assert!(CompactSet::new(vec![(0.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(CompactSet::new(vec![(1.0, 0.0)]).is_err());
        let k = CompactSet::new(vec![(1.0, 2.0), (-2.0, 0.0)]).unwrap();
        assert_eq!(k.gaps(), vec![(0.0, 1.0)]);
        assert_eq!(k.total_length(), 3.0);
        let j = serde_json::to_string(&k).unwrap();
        assert_eq!(j, r#"{"intervals":[[-2.0,0.0],[1.0,2.0]]}"#);
    }

    #[test]
    fn gap_modify_examples() {
        let xi = StepFunction::constant(2.0, 0.5).unwrap();
        let out = gap_modify(&xi, (0.0, 1.0)).unwrap();
        assert_eq!(out.eval(0.25), 0.0);
        assert_eq!(out.eval(0.75), 1.0);
        assert_eq!(out.breakpoints(), &[-2.0, 0.0, 0.5, 1.0, 2.0]);

        for v in [0.0, 1.0] {
            let xi = StepFunction::from_pieces(2.0, &[(-2.0, 0.0, 0.5), (0.0, 1.0, v), (1.0, 2.0, 0.5)])
                .unwrap();
            assert_eq!(gap_modify(&xi, (0.0, 1.0)).unwrap(), xi);
        }
    }

    #[test]
    fn flow_examples() {
        let k = CompactSet::interval(-2.0, 2.0).unwrap();
        let free = xi_free(2.0).unwrap();
        assert_eq!(flow_to_canonical(&free, &k).unwrap().xi(), &free);

        let half = StepFunction::constant(3.0, 0.5).unwrap();
        let out = flow_to_canonical(&half, &k).unwrap();
        assert_eq!(out.xi(), &xi_free(3.0).unwrap());

        let k2 = CompactSet::new(vec![(-2.0, 0.0), (1.0, 2.0)]).unwrap();
        let xi = StepFunction::from_pieces(
            3.0,
            &[(-3.0, -2.0, 0.5), (-2.0, 0.0, 0.5), (0.0, 1.0, 0.3), (1.0, 2.0, 0.5), (2.0, 3.0, 0.5)],
        )
        .unwrap();
        let out = flow_to_canonical(&xi, &k2).unwrap();
        assert_eq!(out.xi().values(), &[1.0, 0.5, 0.0, 1.0, 0.5, 0.0]);
        assert!((out.xi().breakpoints()[3] - 0.7).abs() < 1e-15);
        assert!((out.jumps()[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn flow_rejects_non_half_on_k() {
        let k = CompactSet::interval(-1.0, 1.0).unwrap();
        let xi = StepFunction::constant(2.0, 0.4).unwrap();
        assert!(matches!(flow_to_canonical(&xi, &k), Err(Error::NotReflectionless { .. })));
    }

    #[test]
    fn canonical_shape_checks() {
        let k = CompactSet::new(vec![(-2.0, 0.0), (1.0, 2.0)]).unwrap();
        let good = CanonicalKrein::from_jumps(&k, 3.0, &[0.4]).unwrap();
        assert!(is_canonical(good.xi(), &k));
        let gap_03 = good.xi().splice(0.0, 1.0, &[(0.0, 1.0, 0.3)]).unwrap();
        assert!(!is_canonical(&gap_03, &k));
        let left0 = good.xi().splice(-3.0, -2.0, &[(-3.0, -2.0, 0.0)]).unwrap();
        assert!(!is_canonical(&left0, &k));
        let down = good.xi().splice(0.0, 1.0, &[(0.0, 0.5, 1.0), (0.5, 1.0, 0.0)]).unwrap();
        assert!(!is_canonical(&down, &k));
        assert!(CanonicalKrein::from_jumps(&k, 3.0, &[1.5]).is_err());
    }
}
