use liouville::bers::grid_io::{read_grid, write_grid};
use liouville::cli::output::sig15;
use liouville::cli::ExperimentSpec;
use liouville::currents::{liouville_box_measure, IdentityMap};
use liouville::engine::{eval_current, EvalParams};
use liouville::error::Error;
use liouville::holder::HolderFunction;
use liouville::metrics::check_punctured_disk_bound;
use liouville::projective::{GeodesicBox, MobiusTransform, Quadruple, SpherePoint, C64};
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = C64> {
    (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(a, b)| C64::new(a, b))
}

/// Four increasing reals with gaps of at least 0.05.
fn ordered_reals() -> impl Strategy<Value = [f64; 4]> {
    (-5.0..5.0f64, 0.05..3.0f64, 0.05..3.0f64, 0.05..3.0f64).prop_map(|(a, g1, g2, g3)| {
        [a, a + g1, a + g1 + g2, a + g1 + g2 + g3]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cross_ratio_is_mobius_invariant(a in complex(), b in complex(), c in complex(), d in complex(),
                                       m in prop::array::uniform4(complex())) {
        let q = Quadruple::from_complex(a, b, c, d);
        let g = MobiusTransform::new(m[0], m[1], m[2], m[3]);
        prop_assume!(q.is_ok() && g.is_ok());
        let (q, g) = (q.unwrap(), g.unwrap());
        let (x, y) = (q.cross_ratio(), q.map(&g).cross_ratio());
        prop_assert!((x - y).norm() <= 1e-9 * x.norm().max(1.0), "{x} vs {y}");
    }

    #[test]
    fn swapping_first_pair_inverts_cross_ratio(a in complex(), b in complex(), c in complex(), d in complex()) {
        let q = Quadruple::from_complex(a, b, c, d);
        prop_assume!(q.is_ok());
        let q = q.unwrap();
        let s = Quadruple::new(q.b, q.a, q.c, q.d).unwrap();
        let prod = q.cross_ratio() * s.cross_ratio();
        prop_assert!((prod - 1.0).norm() < 1e-9);
    }

    #[test]
    fn box_measure_is_additive(x in ordered_reals(), s in 0.05..0.95f64) {
        let m = x[0] + s * (x[1] - x[0]);
        let whole = GeodesicBox::from_reals(x[0], x[1], x[2], x[3]).unwrap();
        let left = GeodesicBox::from_reals(x[0], m, x[2], x[3]).unwrap();
        let right = GeodesicBox::from_reals(m, x[1], x[2], x[3]).unwrap();
        let sum = liouville_box_measure(&left).unwrap() + liouville_box_measure(&right).unwrap();
        prop_assert!((sum - liouville_box_measure(&whole).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn box_measure_is_mobius_invariant(x in ordered_reals(), e in prop::array::uniform4(-3.0..3.0f64)) {
        prop_assume!(e[0] * e[3] - e[1] * e[2] > 0.1);
        let g = MobiusTransform::from_real(e[0], e[1], e[2], e[3]).unwrap();
        let b = GeodesicBox::from_reals(x[0], x[1], x[2], x[3]).unwrap();
        let moved = b.map(&g).unwrap();
        let (u, v) = (liouville_box_measure(&b).unwrap(), liouville_box_measure(&moved).unwrap());
        prop_assert!((u - v).abs() <= 1e-9 * u.max(1.0));
    }

    #[test]
    fn bump_is_bounded_and_vanishes_outside(x in ordered_reals(), lambda in 0.1..1.0f64,
                                            u in -10.0..10.0f64, v in -10.0..10.0f64) {
        let b = GeodesicBox::from_reals(x[0], x[1], x[2], x[3]).unwrap();
        let xi = HolderFunction::bump(&b, lambda).unwrap();
        let val = xi.eval(&SpherePoint::real(u), &SpherePoint::real(v));
        prop_assert!(val.norm() <= 1.0 + 1e-12);
        let inside = (x[0]..=x[1]).contains(&u) && (x[2]..=x[3]).contains(&v);
        if !inside {
            prop_assert_eq!(val, C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn punctured_disk_inequality(beta in 0.05..0.95f64, r in 0.0..1.0f64, phi in 0.0..std::f64::consts::TAU) {
        let b1 = C64::new(beta, 0.0) + C64::from_polar(r * beta.min(1.0 - beta) * 0.9, phi);
        match check_punctured_disk_bound(beta, b1) {
            Ok(rep) => prop_assert!(rep.lhs <= rep.rhs, "{rep:?}"),
            Err(Error::RadiusExceeded { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn grid_files_round_trip(n in 1usize..6, seed in any::<u64>()) {
        let vals: Vec<C64> = (0..n * n).map(|k| C64::new((seed ^ k as u64) as f64, -(k as f64))).collect();
        let mut bytes = Vec::new();
        write_grid(&mut bytes, n, &vals).unwrap();
        let (m, back) = read_grid(&bytes[..]).unwrap();
        prop_assert_eq!(m, n);
        prop_assert_eq!(back, vals);
    }

    #[test]
    fn config_parser_never_panics(text in "(\\[[a-z]{1,8}\\]\n|[a-z_]{1,8} = [-0-9a-z.,]{0,12}\n|# .{0,10}\n){0,8}") {
        let _ = ExperimentSpec::parse(&text);
    }

    #[test]
    fn sig15_round_trips_to_fifteen_digits(x in -1e6..1e6f64) {
        let back: f64 = sig15(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-14 * x.abs().max(1e-300) * 10.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn step_boxes_give_log_cross_ratio(x in ordered_reals()) {
        let b = GeodesicBox::from_reals(x[0], x[1], x[2], x[3]).unwrap();
        let (v, _) = eval_current(&HolderFunction::indicator(&b), &MobiusTransform::identity(), &IdentityMap,
                                  &EvalParams::default()).unwrap();
        prop_assert!((v.re - liouville_box_measure(&b).unwrap()).abs() < 1e-12);
        prop_assert_eq!(v.im, 0.0);
    }
}
