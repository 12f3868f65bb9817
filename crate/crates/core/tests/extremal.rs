mod common;

use common::{admissible_with_f, compact_set};
use proptest::prelude::*;
use reflectionless::extremal::half_ac_mass_on;
use reflectionless::{flow_to_canonical, minimize_a, nu_plus, objective, reconstruct, rho_from_herglotz, CompactSet, GapJumps, HerglotzRep};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reconstructed_a0_never_beats_the_extremal_constant(set in compact_set(0..=1), seed in any::<u64>()) {
        let a = minimize_a(&set, set.default_bound()).unwrap().a;
        prop_assert!(a > 0.0);
        let (xi, f) = admissible_with_f(&set, seed);
        let rho = rho_from_herglotz(&HerglotzRep::new(xi)).unwrap();
        let nu = nu_plus(&rho, &set, &f).unwrap();
        let a0 = reconstruct(&nu, 1).unwrap().a0();
        prop_assert!(a0 >= a - 1e-6, "{} < {}", a0, a);
    }

    #[test]
    fn flow_never_raises_the_band_mass(set in compact_set(0..=3), seed in any::<u64>()) {
        let (xi, _) = admissible_with_f(&set, seed);
        let canon = flow_to_canonical(&xi, &set).unwrap();
        let before = half_ac_mass_on(&xi, &set, 1e-12).unwrap();
        let after = half_ac_mass_on(canon.xi(), &set, 1e-12).unwrap();
        prop_assert!(after <= before * (1.0 + 1e-10), "{} > {}", after, before);
    }

    #[test]
    fn extremal_constant_scales_with_the_set(set in compact_set(1..=1), alpha in 0.3..3.0f64, beta in -2.0..2.0f64) {
        let a = minimize_a(&set, set.default_bound()).unwrap().a;
        let moved = set.affine(alpha, beta).unwrap();
        let b = minimize_a(&moved, moved.default_bound()).unwrap().a;
        prop_assert!((b - alpha * a).abs() <= 1e-8 * b.max(1.0), "{} vs {}", b, alpha * a);
    }

    #[test]
    fn objective_does_not_depend_on_the_bound(set in compact_set(1..=2), raw in prop::collection::vec(0.0..=1.0f64, 2), extra in 0.1..5.0f64) {
        let masses = set.gaps().iter().zip(&raw).map(|(&(c, d), t)| t * (d - c)).collect();
        let jumps = GapJumps::new(&set, masses).unwrap();
        let r = set.default_bound();
        let near = objective(&set, &jumps, r).unwrap();
        let far = objective(&set, &jumps, r + extra).unwrap();
        prop_assert!((near - far).abs() <= 1e-9 * near, "{} vs {}", near, far);
    }
}

#[test]
fn intervals_give_a_quarter_of_their_length() {
    for (c, d) in [(-2.0, 2.0), (1.0, 5.0), (-5.0, 3.0)] {
        let set = CompactSet::interval(c, d).unwrap();
        let report = minimize_a(&set, set.default_bound()).unwrap();
        assert!((report.a - (d - c) / 4.0).abs() < 1e-8, "{}", report.a);
        assert!(report.argmin.masses().is_empty());
    }
}
