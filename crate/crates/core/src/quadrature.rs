//! Gauss-Legendre rules and an adaptive panel integrator.
//!
//! Densities in this crate have square-root behaviour at band edges. The
//! arcsine substitution `t = mid + half * sin(theta)` turns those into smooth
//! integrands, after which Gauss-Legendre panels converge spectrally.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of an n-point rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Gauss-Legendre rule computed by Newton iteration on the Legendre
    /// three-term recurrence.
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussRule { nodes, weights }
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// The panel rule used by the adaptive integrator.
pub(crate) fn panel_rule() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::legendre(10))
}

/// Tolerances and budget for [`adaptive_panels`].
#[derive(Debug, Clone, Copy)]
pub struct Adaptive {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Adaptive {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_panels: 200_000,
        }
    }
}

impl Adaptive {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

/// One accepted panel of an adaptive partition.
#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub lo: f64,
    pub hi: f64,
    pub value: f64,
    pub error: f64,
}

/// Integral value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Bisects [a, b] until the 10-point rule on each panel agrees with the
/// composite rule on its halves. Panels come back left to right.
pub fn adaptive_panels<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    cfg: Adaptive,
) -> Result<Vec<Panel>> {
    let rule = panel_rule();
    let width = b - a;
    if width <= 0.0 {
        return Ok(Vec::new());
    }
    // scale for the relative tolerance: a coarse estimate of the L1 norm
    let coarse = GaussRule::legendre(24);
    let scale = coarse.integrate(|x| f(x).abs(), a, b).max(f64::MIN_POSITIVE);
    let budget = (cfg.rel_tol * scale).max(cfg.abs_tol);

    let mut out = Vec::new();
    let mut stack = vec![(a, b, rule.integrate(f, a, b))];
    let mut worst = 0.0f64;
    while let Some((lo, hi, whole)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(f, lo, mid);
        let right = rule.integrate(f, mid, hi);
        let err = (left + right - whole).abs();
        // rounding floor: relative noise of the panel value itself
        let noise = 64.0 * f64::EPSILON * (left.abs() + right.abs());
        let allowed = (budget * (hi - lo) / width).max(noise);
        if err <= allowed || (hi - lo) <= 1e-15 * width.max(1.0) {
            out.push(Panel {
                lo,
                hi: mid,
                value: left,
                error: 0.5 * err,
            });
            out.push(Panel {
                lo: mid,
                hi,
                value: right,
                error: 0.5 * err,
            });
        } else {
            worst = worst.max(err);
            if out.len() + stack.len() > cfg.max_panels {
                return Err(Error::QuadratureBudget {
                    panels: cfg.max_panels,
                    estimate: worst,
                });
            }
            stack.push((mid, hi, right));
            stack.push((lo, mid, left));
        }
    }
    Ok(out)
}

/// Adaptive integral of `f` over [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: Adaptive) -> Result<Estimate> {
    let panels = adaptive_panels(&f, a, b, cfg)?;
    Ok(sum_panels(&panels))
}

fn sum_panels(panels: &[Panel]) -> Estimate {
    let mut value = 0.0;
    let mut error = 0.0;
    for p in panels {
        value += p.value;
        error += p.error;
    }
    Estimate { value, error }
}

/// A point of `(lo, hi)` together with its distances to both ends, each
/// computed without cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Located {
    pub lo: f64,
    pub hi: f64,
    pub from_lo: f64,
    pub to_hi: f64,
}

impl Located {
    pub fn x(&self) -> f64 {
        if self.from_lo <= self.to_hi {
            self.lo + self.from_lo
        } else {
            self.hi - self.to_hi
        }
    }

    /// `|p - x|`, measured from whichever end is nearer to `x`.
    #[inline]
    pub fn distance_to(&self, p: f64) -> f64 {
        if self.from_lo <= self.to_hi {
            (self.from_lo - (p - self.lo)).abs()
        } else {
            ((p - self.hi) + self.to_hi).abs()
        }
    }
}

/// Maps theta in [-pi/2, pi/2] onto (lo, hi) with the arcsine substitution.
#[derive(Debug, Clone, Copy)]
pub struct ArcsineMap {
    lo: f64,
    hi: f64,
    half: f64,
}

impl ArcsineMap {
    pub fn new(lo: f64, hi: f64) -> Self {
        ArcsineMap {
            lo,
            hi,
            half: 0.5 * (hi - lo),
        }
    }

    /// `1 + sin θ = 2 sin²(θ/2 + π/4)` and `1 - sin θ = 2 cos²(θ/2 + π/4)`.
    pub fn locate(&self, theta: f64) -> Located {
        let phase = 0.5 * theta + 0.25 * std::f64::consts::PI;
        let (s, c) = phase.sin_cos();
        Located {
            lo: self.lo,
            hi: self.hi,
            from_lo: 2.0 * self.half * s * s,
            to_hi: 2.0 * self.half * c * c,
        }
    }

    pub fn point(&self, theta: f64) -> f64 {
        self.locate(theta).x()
    }

    pub fn jacobian(&self, theta: f64) -> f64 {
        self.half * theta.cos()
    }

    /// Pulls `f` back to the theta variable, including the Jacobian.
    pub fn pullback<'a, F: Fn(Located) -> f64 + 'a>(&'a self, f: F) -> impl Fn(f64) -> f64 + 'a {
        move |theta| {
            let j = self.jacobian(theta);
            if j <= 0.0 {
                0.0
            } else {
                f(self.locate(theta)) * j
            }
        }
    }

    pub const THETA_LO: f64 = -FRAC_PI_2;
    pub const THETA_HI: f64 = FRAC_PI_2;
}

/// Adaptive integral over (lo, hi) after the arcsine substitution. The
/// integrand receives the located point so it can form distances to the
/// interval ends accurately.
pub fn integrate_arcsine<F: Fn(Located) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    cfg: Adaptive,
) -> Result<Estimate> {
    let map = ArcsineMap::new(lo, hi);
    let g = map.pullback(f);
    integrate(g, ArcsineMap::THETA_LO, ArcsineMap::THETA_HI, cfg)
}
