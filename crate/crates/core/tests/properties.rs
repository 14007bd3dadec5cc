use std::f64::consts::PI;

use entsim::couplings::{gamma_cross, lambda_cross, sin_cos_integrals, Geometry};
use entsim::dynamics::{integrate, IntegrateOptions, SystemParams};
use entsim::oracle::amplitude::to_dynamic;
use entsim::oracle::{min_eigenvalue, to_matrix};
use entsim::pulses::{PulseFamily, PulseSpec};
use entsim::tomography::{concurrence, eof, reconstruct};
use entsim::RateSetF64;
use num_complex::Complex64 as C;
use proptest::prelude::*;

proptest! {
    #[test]
    fn collective_damping_bounded(delta in 1e-3..200.0f64, alpha in 0.0..PI, ga in 0.1..3.0f64, gb in 0.1..3.0f64) {
        let g = gamma_cross(ga, gb, delta, alpha).unwrap();
        prop_assert!(g.abs() <= (ga * gb).sqrt() * (1.0 + 1e-12));
    }

    #[test]
    fn rates_symmetric_in_labels(delta in 1e-3..50.0f64, alpha in 0.0..PI, ga in 0.1..3.0f64, gb in 0.1..3.0f64) {
        prop_assert_eq!(gamma_cross(ga, gb, delta, alpha).unwrap(), gamma_cross(gb, ga, delta, alpha).unwrap());
        prop_assert_eq!(lambda_cross(ga, gb, delta, alpha).unwrap(), lambda_cross(gb, ga, delta, alpha).unwrap());
    }

    #[test]
    fn si_bounded_ci_finite(x in 1e-6..1e3f64) {
        let (si, ci) = sin_cos_integrals(x).unwrap();
        prop_assert!(si > 0.0 && si < 1.852);
        prop_assert!(ci.is_finite());
    }

    #[test]
    fn eof_monotone(a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (el, eh) = (eof(lo).unwrap(), eof(hi).unwrap());
        prop_assert!(el <= eh + 1e-15);
        prop_assert!((0.0..=1.0).contains(&el) && (0.0..=1.0).contains(&eh));
    }

    #[test]
    fn single_excitation_states(r1 in -0.7..0.7f64, i1 in -0.7..0.7f64, r2 in -0.7..0.7f64, i2 in -0.7..0.7f64) {
        let a = [C::new(r1, i1), C::new(r2, i2)];
        prop_assume!(a[0].norm_sqr() + a[1].norm_sqr() <= 1.0);
        let s = to_dynamic(&a);
        let rho = reconstruct(&s).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-14);
        prop_assert!(min_eigenvalue(&to_matrix(&rho)) > -1e-14);
        let c = concurrence(&rho).unwrap();
        prop_assert!((c - 2.0 * (a[0] * a[1]).norm()).abs() < 1e-14);
    }

    #[test]
    fn rising_pulse_vanishes_after_edge(om in 0.05..50.0f64, t in 1e-12..100.0f64) {
        let p = PulseSpec::rising(om).unwrap();
        prop_assert_eq!(p.amplitude(t), 0.0);
        prop_assert!(p.amplitude(-t) > 0.0 || om * t > 1400.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Peak EoF stays in [0, 1] and the double-excitation population stays zero.
    #[test]
    fn trajectories_stay_physical(om in 0.3..8.0f64, r12 in 0.05..1.0f64, gaussian in any::<bool>()) {
        let geom = Geometry::new(r12, PI / 2.0);
        let rates: RateSetF64 = entsim::couplings::build_rates((1.0, 1.0), &geom, 1.0).unwrap();
        let family = if gaussian { PulseFamily::Gaussian } else { PulseFamily::Rising };
        let p = SystemParams::new(rates, PulseSpec::from_family(family, om).unwrap(), geom).unwrap();
        let tr = integrate(&p, &IntegrateOptions { samples: 300, ..Default::default() }).unwrap();
        for s in &tr.states {
            prop_assert!(s.double_excitation_defect().abs() < 1e-8);
            let c = concurrence(&reconstruct(s).unwrap()).unwrap();
            prop_assert!((0.0..=1.0).contains(&c));
        }
    }
}
