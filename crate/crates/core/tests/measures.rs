mod common;

use std::f64::consts::PI;

use common::{admissible_with_f, band, compact_set};
use proptest::prelude::*;
use reflectionless::measures::{moments, quadrature_discretize, total_mass, FSelector};
use reflectionless::{nu_plus, rho_from_herglotz, CanonicalKrein, Complex64, HerglotzRep};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn half_line_measure_is_dominated(set in compact_set(0..=2), seed in any::<u64>()) {
        let (xi, f) = admissible_with_f(&set, seed);
        let rho = rho_from_herglotz(&HerglotzRep::new(xi)).unwrap();
        let nu = nu_plus(&rho, &set, &f).unwrap();
        let zero = nu_plus(&rho, &set, &FSelector::zero()).unwrap();
        let (m_rho, m_nu, m_zero) = (total_mass(&rho).unwrap(), total_mass(&nu).unwrap(), total_mass(&zero).unwrap());
        prop_assert!(m_zero <= m_nu + 1e-12);
        prop_assert!(m_nu <= m_rho + 1e-12, "{} > {}", m_nu, m_rho);
    }

    #[test]
    fn density_on_the_band_factors_through_the_semicircle(seed in any::<u64>(), pick in 0.0..1.0f64) {
        let (xi, f) = admissible_with_f(&band(), seed);
        let rep = HerglotzRep::new(xi.clone());
        let rho = rho_from_herglotz(&rep).unwrap();
        let nu = nu_plus(&rho, &band(), &f).unwrap();
        let x = -1.98 + 3.96 * pick;
        let piece = nu.ac_pieces().iter().find(|p| p.lo < x && x < p.hi).unwrap();
        let semicircle = (4.0 - x * x).sqrt() / (2.0 * PI);
        let expect = rep.correction_factor(x).unwrap() * semicircle;
        prop_assert!((nu.density(piece, x) - expect).abs() <= 1e-10 * expect.max(1e-3));
    }

    #[test]
    fn atom_masses_match_the_pole_residue(set in compact_set(1..=3), raw in prop::collection::vec(0.05..0.95f64, 3)) {
        let jumps: Vec<f64> = set.gaps().iter().zip(&raw).map(|(&(c, d), t)| t * (d - c)).collect();
        let xi = CanonicalKrein::from_jumps(&set, set.default_bound(), &jumps).unwrap().into_xi();
        let rep = HerglotzRep::new(xi);
        let rho = rho_from_herglotz(&rep).unwrap();
        prop_assert_eq!(rho.atoms().len(), jumps.len());
        let eta = 1e-9;
        for atom in rho.atoms() {
            let h = rep.eval(Complex64::new(atom.position, eta)).unwrap();
            prop_assert!((eta * h.im - atom.mass).abs() <= 1e-6 * atom.mass.max(1.0), "{} vs {}", eta * h.im, atom.mass);
        }
    }

    #[test]
    fn discretization_keeps_low_moments(set in compact_set(0..=2), seed in any::<u64>()) {
        let (xi, f) = admissible_with_f(&set, seed);
        let rho = rho_from_herglotz(&HerglotzRep::new(xi)).unwrap();
        let nu = nu_plus(&rho, &set, &f).unwrap();
        let exact = moments(&nu, 4).unwrap();
        let discrete = moments(&quadrature_discretize(&nu, 40).unwrap(), 4).unwrap();
        for (k, (a, b)) in exact.iter().zip(&discrete).enumerate() {
            prop_assert!((a - b).abs() <= 1e-5 * exact[0] * 3f64.powi(k as i32), "moment {}: {} vs {}", k, a, b);
        }
    }
}

#[test]
fn free_measure_is_the_semicircle() {
    let rho = rho_from_herglotz(&HerglotzRep::new(reflectionless::xi_free(2.0).unwrap())).unwrap();
    let nu = nu_plus(&rho, &band(), &FSelector::zero()).unwrap();
    let m = moments(&nu, 6).unwrap();
    // Catalan numbers
    for (k, c) in [(0, 1.0), (2, 1.0), (4, 2.0), (6, 5.0)] {
        assert!((m[k] - c).abs() < 1e-10, "{k}: {}", m[k]);
    }
    for k in [1, 3, 5] {
        assert!(m[k].abs() < 1e-10);
    }
}
