mod common;

use common::{admissible_with_f, band, compact_set};
use proptest::prelude::*;
use reflectionless::krein::hilbert_transform;
use reflectionless::{flow_steps, flow_to_canonical, gap_modify, is_canonical, CanonicalKrein, StepFunction};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_step_lowers_the_transform_on_the_set(set in compact_set(0..=3), seed in any::<u64>()) {
        let (xi, _) = admissible_with_f(&set, seed);
        let steps = flow_steps(&xi, &set).unwrap();
        prop_assert_eq!(steps.len(), set.gaps().len() + 2);
        let xs = set.interior_samples(7);
        for w in steps.windows(2) {
            let moved = w[0].l1_distance(&w[1]).unwrap() > 1e-12;
            for &x in &xs {
                let before = hilbert_transform(&w[0], x).unwrap();
                let after = hilbert_transform(&w[1], x).unwrap();
                prop_assert!(after <= before + 1e-12, "{} -> {} at {}", before, after, x);
                if moved {
                    prop_assert!(after < before, "no strict decrease at {}", x);
                }
            }
        }
    }

    #[test]
    fn flow_keeps_gap_masses(set in compact_set(1..=3), seed in any::<u64>()) {
        let (xi, _) = admissible_with_f(&set, seed);
        let canon = flow_to_canonical(&xi, &set).unwrap();
        for (&(c, d), g) in set.gaps().iter().zip(canon.jumps()) {
            prop_assert!((xi.integral(c, d) - g).abs() <= 1e-12 * (d - c));
        }
    }

    #[test]
    fn flow_lands_in_the_canonical_class_and_stays(set in compact_set(0..=3), seed in any::<u64>()) {
        let (xi, _) = admissible_with_f(&set, seed);
        let once = flow_to_canonical(&xi, &set).unwrap();
        prop_assert!(is_canonical(once.xi(), &set));
        let twice = flow_to_canonical(once.xi(), &set).unwrap();
        prop_assert_eq!(&once, &twice);
        let rebuilt = CanonicalKrein::from_jumps(&set, xi.bound(), &once.jumps()).unwrap();
        prop_assert!(rebuilt.xi().l1_distance(once.xi()).unwrap() <= 1e-12);
    }
}

#[test]
fn gap_modification_packs_mass_at_the_right_edge() {
    let xi = StepFunction::from_pieces(3.0, &[(-3.0, -1.0, 0.5), (-1.0, 0.0, 0.6), (0.0, 1.0, 0.2), (1.0, 3.0, 0.5)]).unwrap();
    let out = gap_modify(&xi, (-1.0, 1.0)).unwrap();
    let expect = [-3.0, -1.0, 0.2, 1.0, 3.0];
    assert!(out.breakpoints().iter().zip(expect).all(|(a, b)| (a - b).abs() < 1e-15));
    assert_eq!(out.values(), &[0.5, 0.0, 1.0, 0.5]);
}

#[test]
fn functions_that_are_not_half_on_the_set_are_rejected() {
    let xi = StepFunction::constant(3.0, 0.4).unwrap();
    assert!(flow_to_canonical(&xi, &band()).is_err());
    assert!(!is_canonical(&xi, &band()));
}
