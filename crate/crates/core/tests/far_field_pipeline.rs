use helmstab::borninv::{recover_fourier_band, stability_record, BandParams, BandSpec, BornSource, FnSource};
use helmstab::forward::{born_far_field, born_far_field_grid, far_field, integral_identity_check};
use helmstab::numerics::{bump, fourier_oracle, AngularGrid, CartesianGrid, GridPotential, Potential, RadialProfile};
use helmstab::Complex64;

fn weak(lambda: f64) -> GridPotential {
    let grid = CartesianGrid::resolving(lambda, 12.0, 0.5).unwrap();
    GridPotential::from_profile(&bump(0.1, 0.0, 0.5).unwrap(), grid).unwrap()
}

#[test]
fn closure_source_matches_born_source() {
    let q = Potential::Radial(bump(0.2, 0.0, 0.4).unwrap());
    let lambda = 5.0;
    let band = BandSpec::polar(lambda, &BandParams::default()).unwrap();
    let a = recover_fourier_band(&BornSource { q: &q, lambda }, &band).unwrap();
    let f = FnSource {
        lambda,
        f: |t: [f64; 2], o: [f64; 2]| born_far_field(&q, lambda, t[1].atan2(t[0]), o[1].atan2(o[0])),
    };
    let b = recover_fourier_band(&f, &band).unwrap();
    assert_eq!(a.values, b.values);
}

#[test]
fn stability_terms_scale_quadratically_with_born_data() {
    let lambda = 6.0;
    let dirs = AngularGrid::new(32).unwrap();
    let band = BandSpec::polar(lambda, &BandParams::default()).unwrap();
    let base = bump(0.1, 0.0, 0.5).unwrap();
    let zero = Potential::Radial(RadialProfile::zero());
    let record = |t: f64| {
        let q = Potential::Radial(base.scaled(t));
        let ff = born_far_field_grid(&q, lambda, &dirs, &dirs).unwrap();
        stability_record(&q, &zero, lambda, &band, ff.l2_norm_sq()).unwrap()
    };
    let (r1, r3) = (record(1.0), record(3.0));
    for (a, b) in [(r1.lhs, r3.lhs), (r1.data_term, r3.data_term), (r1.remainder_term, r3.remainder_term)] {
        assert!((b / a - 9.0).abs() < 1e-10, "{a} {b}");
    }
    assert!((r1.ratio - r3.ratio).abs() < 1e-10 * r1.ratio);
}

#[test]
fn band_estimates_are_nearly_hermitian() {
    let lambda = 6.0;
    let gp = weak(lambda);
    let dirs = AngularGrid::new(64).unwrap();
    let ff = far_field(&gp, lambda, &dirs, &dirs).unwrap();
    let params = BandParams { radial_nodes: 8, angular_nodes: 16, ..BandParams::default() };
    let band = BandSpec::polar(lambda, &params).unwrap();
    let est = recover_fourier_band(&ff, &band).unwrap();
    let oracle = fourier_oracle(&Potential::Grid(gp), &band.nodes).unwrap();
    let err = est.max_abs_difference(&oracle).unwrap();
    // angular nodes come in antipodal pairs: k and k + 8
    for (i, v) in est.values.iter().enumerate() {
        let j = i - i % 16 + (i % 16 + 8) % 16;
        assert!((v - est.values[j].conj()).norm() <= 2.0 * err + 1e-12);
    }
}

#[test]
fn integral_identity_holds_for_random_densities() {
    let lambda = 4.0;
    let grid = CartesianGrid::resolving(lambda, 12.0, 0.5).unwrap();
    let q1 = GridPotential::from_profile(&bump(1.0, 0.0, 0.5).unwrap(), grid).unwrap();
    let q2 = GridPotential::from_profile(&bump(0.3, 0.2, 0.2).unwrap(), grid).unwrap();
    let dirs = AngularGrid::new(16).unwrap();
    let g1: Vec<Complex64> = (0..16).map(|k| Complex64::new((k as f64 * 0.7).sin(), (k as f64).cos())).collect();
    let g2: Vec<Complex64> = (0..16).map(|k| Complex64::new(1.0 / (1.0 + k as f64), 0.3 * k as f64 - 2.0)).collect();
    let c = integral_identity_check(&q1, &q2, lambda, &dirs, &g1, &g2).unwrap();
    assert!(c.residual <= 1e-9 * c.lhs.norm(), "{c:?}");
}

#[test]
fn born_residual_shrinks_with_frequency() {
    let dirs = AngularGrid::new(32).unwrap();
    let res: Vec<f64> = [6.0, 12.0]
        .iter()
        .map(|&lambda| {
            let gp = weak(lambda);
            let ff = far_field(&gp, lambda, &dirs, &dirs).unwrap();
            let born = born_far_field_grid(&Potential::Grid(gp), lambda, &dirs, &dirs).unwrap();
            ff.difference(&born).unwrap().max_abs() / helmstab::specfun::far_field_coefficient(lambda).norm()
        })
        .collect();
    assert!(res[1] < 0.7 * res[0], "{res:?}");
}
