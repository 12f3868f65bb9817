#![allow(dead_code)]

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reflectionless::experiments::{random_admissible, random_selector};
use reflectionless::measures::FSelector;
use reflectionless::{rho_from_herglotz, CompactSet, HerglotzRep, StepFunction};

/// Step function on `[-R, R]` with `R ∈ [2, 5]`, up to eight pieces and
/// values in `[0, 1]`.
pub fn step_function() -> impl Strategy<Value = StepFunction> {
    (2.0..5.0f64, prop::collection::vec((0.05..1.0f64, 0.0..=1.0f64), 1..8)).prop_map(|(r, raw)| {
        let total: f64 = raw.iter().map(|p| p.0).sum();
        let mut bps = vec![-r];
        let mut acc = -r;
        for (w, _) in &raw[..raw.len() - 1] {
            acc += 2.0 * r * w / total;
            bps.push(acc);
        }
        bps.push(r);
        let values = raw.iter().map(|p| p.1).collect();
        StepFunction::new(r, bps, values).unwrap()
    })
}

/// `gaps + 1` intervals spanning `[-3, 3]`; interval lengths and gaps are
/// at least 6/70 long.
pub fn compact_set(gaps: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = CompactSet> {
    gaps.prop_flat_map(|g| prop::collection::vec(0.1..1.0f64, 2 * g + 1))
        .prop_map(|steps| {
            let total: f64 = steps.iter().sum();
            let mut pts = vec![-3.0];
            let mut x = -3.0;
            for s in &steps {
                x += 6.0 * s / total;
                pts.push(x);
            }
            *pts.last_mut().unwrap() = 3.0;
            CompactSet::new(pts.chunks(2).map(|c| (c[0], c[1])).collect()).unwrap()
        })
}

/// A random admissible `ξ` over `set` and a random selection `f`.
pub fn admissible_with_f(set: &CompactSet, seed: u64) -> (StepFunction, FSelector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = random_admissible(set, &mut rng).unwrap();
    let rho = rho_from_herglotz(&HerglotzRep::new(s.xi.clone())).unwrap();
    let f = random_selector(&rho, set, &mut rng);
    (s.xi, f)
}

pub fn band() -> CompactSet {
    CompactSet::interval(-2.0, 2.0).unwrap()
}
