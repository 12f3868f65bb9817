use rand::Rng;
use serde::Serialize;

use crate::error::Result;
use crate::gap_flow::CompactSet;
use crate::krein::StepFunction;
use crate::measures::{FSelector, SpectralMeasure};

const VALUES: [f64; 3] = [0.0, 0.5, 1.0];
const MAX_OUTSIDE_PIECES: usize = 6;

/// A random admissible Krein function together with its bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibleSample {
    #[serde(rename = "R")]
    pub r: f64,
    pub xi: StepFunction,
}

/// Draws `ξ` equal to 1/2 on `K` with values in {0, 1/2, 1} elsewhere and
/// `max|K| < R ≤ max|K| + 2`. There are at most six pieces outside `K`
/// unless `K` has so many gaps that each region already needs its own.
pub fn random_admissible<G: Rng + ?Sized>(set: &CompactSet, rng: &mut G) -> Result<AdmissibleSample> {
    let r = set.max_abs() + rng.random_range(0.25..=2.0);
    let mut regions = Vec::new();
    if set.min() > -r {
        regions.push((-r, set.min()));
    }
    regions.extend(set.gaps());
    if set.max() < r {
        regions.push((set.max(), r));
    }
    let budget = MAX_OUTSIDE_PIECES.max(regions.len());
    let mut counts = vec![1usize; regions.len()];
    for _ in regions.len()..rng.random_range(regions.len()..=budget) {
        let i = rng.random_range(0..regions.len());
        counts[i] += 1;
    }

    let mut pieces: Vec<(f64, f64, f64)> = Vec::new();
    let mut outside = regions.iter().zip(&counts).peekable();
    let mut cursor = -r;
    for &(c, d) in set.intervals() {
        while let Some(&(&(lo, hi), &n)) = outside.peek() {
            if lo >= c {
                break;
            }
            push_region(&mut pieces, lo, hi, n, rng);
            cursor = hi;
            outside.next();
        }
        debug_assert_eq!(cursor, c);
        pieces.push((c, d, 0.5));
        cursor = d;
    }
    for (&(lo, hi), &n) in outside {
        push_region(&mut pieces, lo, hi, n, rng);
    }
    let xi = StepFunction::from_pieces(r, &pieces)?;
    Ok(AdmissibleSample { r, xi })
}

fn push_region<G: Rng + ?Sized>(pieces: &mut Vec<(f64, f64, f64)>, lo: f64, hi: f64, n: usize, rng: &mut G) {
    let min_len = 0.02 * (hi - lo);
    let mut cuts = Vec::new();
    for _ in 0..100 {
        cuts = (1..n).map(|_| rng.random_range(lo..hi)).collect();
        cuts.push(lo);
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        if cuts.windows(2).all(|w| w[1] - w[0] >= min_len) {
            break;
        }
        cuts = vec![lo, hi];
    }
    for w in cuts.windows(2) {
        pieces.push((w[0], w[1], VALUES[rng.random_range(0..VALUES.len())]));
    }
}

/// Random `f` off `K`: every ac piece and atom of `rho` gets 0 with
/// probability 1/3 and a uniform value in (0, 1] otherwise.
pub fn random_selector<G: Rng + ?Sized>(rho: &SpectralMeasure, set: &CompactSet, rng: &mut G) -> FSelector {
    let mut f = FSelector::constant(rho, set, 0.0);
    let draw = |rng: &mut G| {
        if rng.random_range(0..3) == 0 {
            0.0
        } else {
            1.0 - rng.random::<f64>()
        }
    };
    for i in &mut f.intervals {
        i.value = draw(rng);
    }
    for a in &mut f.atoms {
        a.weight = draw(rng);
    }
    f
}
