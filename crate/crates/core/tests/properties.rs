use helmstab::borninv::direction_pair;
use helmstab::csv::CsvTable;
use helmstab::nearboundary::{monotone_fourier_bound, NearBoundaryConfig};
use helmstab::nearfield::radial_solve;
use helmstab::numerics::{
    angular_fourier_coeffs, bump, disk_rect_area, near_boundary_bump, radial_fourier, AngularGrid, RadialProfile,
    RadialShape,
};
use helmstab::specfun;
use helmstab::Complex64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn direction_pairs_reproduce_xi(lambda in 1.0f64..60.0, frac in 0.0f64..0.999, phi in 0.0f64..6.283) {
        let rho = 2.0 * lambda * frac;
        let xi = [rho * phi.cos(), rho * phi.sin()];
        if let Ok(pairs) = direction_pair(xi, lambda) {
            for (t, o) in pairs {
                prop_assert!((t[0].hypot(t[1]) - 1.0).abs() < 1e-13);
                prop_assert!((o[0].hypot(o[1]) - 1.0).abs() < 1e-13);
                prop_assert!((lambda * (t[0] - o[0]) - xi[0]).abs() < 1e-12 * lambda);
                prop_assert!((lambda * (t[1] - o[1]) - xi[1]).abs() < 1e-12 * lambda);
            }
        }
    }

    #[test]
    fn bessel_three_term_recurrence(n in 1i64..60, x in 0.1f64..150.0) {
        let (a, b, c) = (specfun::bessel_j(n - 1, x).unwrap(), specfun::bessel_j(n, x).unwrap(), specfun::bessel_j(n + 1, x).unwrap());
        let scale = a.abs().max(c.abs()).max(b.abs() * 2.0 * n as f64 / x);
        prop_assert!((a + c - 2.0 * n as f64 / x * b).abs() <= 1e-10 * scale);
    }

    #[test]
    fn robin_condition_holds_for_random_bumps(center in 0.3f64..0.8, width in 0.05f64..0.2, amp in -5.0f64..5.0, lambda in 2.0f64..30.0, n in 0i64..80) {
        let q = bump(amp, center, width.min(center - 0.05).min(1.0 - center)).unwrap();
        let s = radial_solve(&q, lambda, n).unwrap();
        prop_assert!(s.robin_residual() <= 1e-9);
        let mirrored = radial_solve(&q, lambda, -n).unwrap();
        prop_assert_eq!(s.trace, mirrored.trace);
    }

    #[test]
    fn monotone_bound_dominates_random_shells(lambda in 10.0f64..60.0, a1 in 0.0f64..3.0, a2 in 0.0f64..3.0, rho in 0.0f64..600.0) {
        let cfg = NearBoundaryConfig::default();
        let inner = 1.0 - cfg.kappa / lambda;
        let mid = 0.5 * (inner + 1.0);
        let q = RadialProfile::new(vec![
            RadialShape::Layer { lo: inner, hi: mid, value: a1 },
            RadialShape::Layer { lo: mid, hi: 1.0, value: a2 },
        ]).unwrap();
        let b = monotone_fourier_bound(&q, &cfg, lambda, &[[rho, 0.0]]).unwrap();
        prop_assert!(b.oracle_abs[0] <= b.bound * (1.0 + 1e-12));
    }

    #[test]
    fn disk_cell_area_is_bounded(rho in 0.0f64..2.0, x0 in -1.5f64..1.5, y0 in -1.5f64..1.5, w in 0.001f64..0.5) {
        let a = disk_rect_area(rho, x0, x0 + w, y0, y0 + w);
        prop_assert!(a >= -1e-15 && a <= w * w * (1.0 + 1e-12));
        prop_assert!(a <= std::f64::consts::PI * rho * rho * (1.0 + 1e-12));
    }

    #[test]
    fn fourier_coefficients_recover_modes(k in -10i64..=10, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let g = AngularGrid::new(64).unwrap();
        let amp = Complex64::new(re, im);
        let samples: Vec<Complex64> = (0..64).map(|i| amp * Complex64::from_polar(1.0, k as f64 * g.angle(i))).collect();
        let c = angular_fourier_coeffs(&g, &samples, 20).unwrap();
        for (idx, v) in c.iter().enumerate() {
            let order = idx as i64 - 20;
            let want = if order == k { amp * 2.0 * std::f64::consts::PI } else { Complex64::new(0.0, 0.0) };
            prop_assert!((v - want).norm() < 1e-11);
        }
    }

    #[test]
    fn csv_numbers_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::ZERO) {
        let mut t = CsvTable::new(&["x"]);
        t.push_numbers(&[x]);
        let back: f64 = t.render().lines().nth(1).unwrap().parse().unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn radial_fourier_at_zero_is_mass(amp in 0.1f64..4.0, kappa in 0.5f64..4.0, lambda in 10.0f64..80.0) {
        let q = near_boundary_bump(kappa, lambda, amp).unwrap();
        let mass = 2.0 * std::f64::consts::PI * q.radial_moment();
        prop_assert!((radial_fourier(&q, 0.0).re - mass).abs() <= 1e-12 * mass);
    }
}
