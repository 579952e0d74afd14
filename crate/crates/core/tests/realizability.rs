use proptest::prelude::*;

use spraymom::drag::{step_evap_drag, CellState};
use spraymom::evaporation::{step_nemo_robust, truncation_error_even_orders, EvaporationLaw};
use spraymom::maxent::{moments_of_density, MaxEntDensity, MaxEntSettings};
use spraymom::moment_space::{canonical_to_moments, ExponentBasis, is_realizable, MomentVector, Realizability, DEFAULT_TOL};
use spraymom::transport::{advance_1d, courant, Boundary, Field1D, Order};

fn interior() -> impl Strategy<Value = MomentVector> {
    (1e-3f64..10.0, 0.02f64..0.98, 0.02f64..0.98, 0.02f64..0.98)
        .prop_map(|(m0, p1, p2, p3)| MomentVector::fractional(canonical_to_moments(m0, [p1, p2, p3])))
}

/// Moments of a random maximum-entropy density, so that the closure exists.
fn with_density() -> impl Strategy<Value = MomentVector> {
    (1e-3f64..10.0, -15.0f64..15.0, -15.0f64..15.0, -15.0f64..15.0).prop_map(|(m0, l1, l2, l3)| {
        let d = MaxEntDensity::new(ExponentBasis::Fractional, [0.0, l1, l2, l3]);
        let v = moments_of_density(&d, &ExponentBasis::Fractional.exponents(), (0.0, 1.0)).unwrap();
        MomentVector::fractional([v[0], v[1], v[2], v[3]]).scaled(m0 / v[0])
    })
}

fn realizable(m: &MomentVector) -> bool {
    m.is_finite() && is_realizable(m, DEFAULT_TOL) != Realizability::Outside
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn evaporation_keeps_moments_realizable(m in interior(), k in 0.0f64..2.0, dt in 1e-4f64..0.05, n_neg in 0usize..=2) {
        let r = step_nemo_robust(&m, &EvaporationLaw::d2(k), dt, n_neg, &MaxEntSettings::default(), None).unwrap();
        prop_assert!(realizable(&r.updated), "{:?} -> {:?}", m.values, r.updated.values);
        prop_assert!(r.updated.m0() <= m.m0() * (1.0 + 1e-12));
    }

    #[test]
    fn linear_law_keeps_moments_realizable(m in interior(), a in 0.0f64..1.0, b in 0.0f64..2.0, dt in 1e-4f64..0.05) {
        let r = step_nemo_robust(&m, &EvaporationLaw::Linear { a, b }, dt, 1, &MaxEntSettings::default(), None).unwrap();
        prop_assert!(realizable(&r.updated));
    }

    #[test]
    fn drag_keeps_state_realizable(
        m in interior(), k in 0.0f64..2.0, dt in 1e-4f64..0.05, theta in 0.01f64..10.0,
        u in -2.0f64..2.0, ug in -2.0f64..2.0,
    ) {
        let c = CellState::new(m, [u, -u], [ug, 0.5 * ug]);
        let out = step_evap_drag(&c, &EvaporationLaw::d2(k), theta, dt, 1).unwrap();
        prop_assert!(out.is_finite());
        prop_assert!(realizable(&out.moments));
        // Relaxation never overshoots the gas velocity.
        let (lo, hi) = (u.min(ug), u.max(ug));
        if out.moments.m0() > 0.0 {
            prop_assert!(out.velocity[0] >= lo - 1e-12 && out.velocity[0] <= hi + 1e-12);
        }
    }

    #[test]
    fn transport_keeps_cells_realizable(
        cells in prop::collection::vec((interior(), -1.0f64..1.0), 16),
        order in prop_oneof![Just(Order::First), Just(Order::Second)],
        cfl in 0.1f64..1.0,
    ) {
        let cells: Vec<CellState> = cells.into_iter().map(|(m, u)| CellState::new(m, [u, 0.0], [0.0; 2])).collect();
        let dx = 1.0 / 16.0;
        let f = Field1D::new(cells, dx, Boundary::Periodic).unwrap();
        let c1 = courant(&f.cells, dx, 1.0, 0);
        let g = advance_1d(&f, cfl / c1, order).unwrap();
        for c in &g.cells {
            prop_assert!(realizable(&c.moments), "{:?}", c.moments.values);
        }
        let (a, b) = (f.totals(), g.totals());
        for k in 0..6 {
            prop_assert!((a[k] - b[k]).abs() <= 1e-12 * a[..4].iter().fold(1.0f64, |x, y| x.max(y.abs())));
        }
    }

    #[test]
    fn even_orders_are_exact(m in with_density(), k in 0.1f64..2.0, dt in 1e-3f64..0.05, n_neg in 0usize..=2) {
        let e = truncation_error_even_orders(&m, &EvaporationLaw::d2(k), dt, n_neg).unwrap();
        prop_assert!(e[0].abs() <= 1e-12 * m.values[0], "{:?}", e);
        prop_assert!(e[2].abs() <= 1e-12 * m.values[0], "{:?}", e);
    }
}
