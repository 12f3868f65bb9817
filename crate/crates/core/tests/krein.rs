mod common;

use common::step_function;
use proptest::prelude::*;
use reflectionless::krein::{hilbert_transform, richardson};
use reflectionless::quadrature::{integrate_arcsine, Adaptive, Located};
use reflectionless::{xi_free, Complex64, HerglotzRep, StepFunction};

/// Interior point of a random piece, away from both of its ends.
fn interior(xi: &StepFunction, pick: f64, frac: f64) -> f64 {
    let pieces: Vec<_> = xi.pieces().collect();
    let p = pieces[((pick * pieces.len() as f64) as usize).min(pieces.len() - 1)];
    p.lo + (0.05 + 0.9 * frac) * (p.hi - p.lo)
}

/// Value 1/2 on [-2, 2] and arbitrary values on a few pieces on each side.
fn band_with_gaps_outside() -> impl Strategy<Value = StepFunction> {
    let side = prop::collection::vec((0.05..1.0f64, 0.0..=1.0f64), 1..4);
    (2.5..5.0f64, side.clone(), side).prop_map(|(r, left, right)| {
        let cut = |parts: &[(f64, f64)]| -> Vec<(f64, f64)> {
            let total: f64 = parts.iter().map(|p| p.0).sum();
            let mut at = 0.0;
            parts
                .iter()
                .map(|&(len, v)| {
                    at += len / total * (r - 2.0);
                    (at, v)
                })
                .collect()
        };
        let mut pieces = Vec::new();
        let mut lo = -r;
        let left = cut(&left);
        for (i, &(at, v)) in left.iter().enumerate() {
            let hi = if i + 1 == left.len() { -2.0 } else { -r + at };
            pieces.push((lo, hi, v));
            lo = hi;
        }
        pieces.push((-2.0, 2.0, 0.5));
        let mut lo = 2.0;
        let right = cut(&right);
        for (i, &(at, v)) in right.iter().enumerate() {
            let hi = if i + 1 == right.len() { r } else { 2.0 + at };
            pieces.push((lo, hi, v));
            lo = hi;
        }
        StepFunction::from_pieces(r, &pieces).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn h_maps_upper_half_plane_to_itself(xi in step_function(), re in -8.0..8.0f64, im in 1e-3..10.0f64) {
        let h = HerglotzRep::new(xi).eval(Complex64::new(re, im)).unwrap();
        prop_assert!(h.im > 0.0, "{}", h);
    }

    #[test]
    fn modulus_identity_against_the_upper_limit(xi in step_function(), pick in 0.0..1.0f64, frac in 0.0..1.0f64) {
        let x = interior(&xi, pick, frac);
        let rep = HerglotzRep::new(xi.clone());
        let closed = rep.boundary_value(x).unwrap();
        let expect = (x + xi.bound()) * hilbert_transform(&xi, x).unwrap().exp();
        prop_assert!((closed.norm() - expect).abs() <= 1e-12 * expect);
        let limit = rep.boundary_limit(x, 1e-7).unwrap();
        prop_assert!((limit - closed).norm() <= 1e-6 * closed.norm().max(1e-3), "{} vs {}", limit, closed);
    }

    #[test]
    fn h_behaves_like_z_at_infinity(xi in step_function()) {
        let rep = HerglotzRep::new(xi);
        // y (H(iy) / iy - 1) settles to a constant
        let scaled = |y: f64| {
            let z = Complex64::new(0.0, y);
            (rep.eval(z).unwrap() / z - 1.0) * y
        };
        let (near, far) = (scaled(1e4), scaled(1e6));
        prop_assert!((near - far).norm() <= 1e-2 * far.norm().max(1.0), "{} vs {}", near, far);
    }

    #[test]
    fn correction_factor_is_at_least_one(xi in band_with_gaps_outside(), x in -1.99..1.99f64) {
        let rep = HerglotzRep::new(xi);
        let h = rep.correction_factor(x).unwrap();
        let ratio = rep.boundary_value(x).unwrap().norm() / (4.0 - x * x).sqrt();
        prop_assert!(h >= 1.0 - 1e-12, "{}", h);
        prop_assert!((h - ratio).abs() <= 1e-10 * ratio);
    }

    #[test]
    fn hilbert_transform_is_bounded_on_l2(a in step_function(), b in step_function()) {
        // ‖T d‖ = π ‖d‖ on the line; a window only sees part of the norm
        let r = a.bound().max(b.bound());
        let (a, b) = (a.extend_to(r).unwrap(), b.extend_to(r).unwrap());
        let mut bps: Vec<f64> = a.breakpoints().iter().chain(b.breakpoints()).copied().collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        let vals: Vec<f64> = bps.windows(2).map(|w| a.eval(0.5 * (w[0] + w[1])) - b.eval(0.5 * (w[0] + w[1]))).collect();
        let d_norm2: f64 = bps.windows(2).zip(&vals).map(|(w, v)| v * v * (w[1] - w[0])).sum();
        // jump of d at each breakpoint, with d = 0 outside
        let jumps: Vec<f64> = (0..bps.len())
            .map(|j| {
                let left = if j == 0 { 0.0 } else { vals[j - 1] };
                let right = vals.get(j).copied().unwrap_or(0.0);
                left - right
            })
            .collect();
        let td = |p: Located| -> f64 { bps.iter().zip(&jumps).map(|(&x, c)| c * p.distance_to(x).ln()).sum() };
        let mut nodes = vec![-40.0];
        nodes.extend(&bps);
        nodes.push(40.0);
        let cfg = Adaptive::default().with_rel_tol(1e-9);
        let t_norm2: f64 = nodes
            .windows(2)
            .map(|w| integrate_arcsine(|p| td(p).powi(2), w[0], w[1], cfg).unwrap().value)
            .sum();
        let pi2 = std::f64::consts::PI.powi(2);
        prop_assert!(t_norm2 <= pi2 * d_norm2 * (1.0 + 1e-7) + 1e-9, "{} vs {}", t_norm2, pi2 * d_norm2);
        prop_assert!(t_norm2 >= 0.8 * pi2 * d_norm2 - 1e-9);
    }
}

#[test]
fn free_function_is_the_square_root() {
    let rep = HerglotzRep::new(xi_free(3.0).unwrap());
    for (re, im) in [(0.0, 1.0), (1.5, 0.01), (-3.0, 2.0), (10.0, 0.5)] {
        let z = Complex64::new(re, im);
        let expect = (z * z - 4.0).sqrt();
        let expect = if expect.im > 0.0 { expect } else { -expect };
        let h = rep.eval(z).unwrap();
        assert!((h - expect).norm() < 1e-12 * expect.norm());
    }
}

#[test]
fn richardson_cancels_the_linear_term() {
    let est = richardson(|e| Ok(Complex64::new(2.0 + 3.0 * e, e * e)), 1e-2).unwrap();
    assert!((est - Complex64::new(2.0, 0.0)).norm() < 1e-4);
}
