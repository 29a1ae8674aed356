use helmstab::nearboundary::{perturbation_norm, NearBoundaryConfig};
use helmstab::nearfield::{default_n_max, near_field_diag, operator_norm_diff, radial_solve};
use helmstab::numerics::{near_boundary_bump, RadialProfile};
use helmstab::specfun;

#[test]
fn energy_proxy_is_uniform_in_n() {
    let lambda = 20.0;
    let q = near_boundary_bump(2.0, lambda, 1.0).unwrap();
    let d = near_field_diag(&q, lambda, default_n_max(lambda)).unwrap();
    let worst = d.mu.iter().map(|m| lambda * m.norm()).fold(0.0, f64::max);
    assert!(worst < 2.0, "{worst}");
}

#[test]
fn diagonal_approaches_free_values() {
    let lambda = 20.0;
    let q = near_boundary_bump(2.0, lambda, 1.0).unwrap();
    let d = near_field_diag(&q, lambda, 200).unwrap();
    let gaps: Vec<f64> = [40i64, 80, 120, 160]
        .iter()
        .map(|&n| (d.get(n) - specfun::z_coeff(n, 1.0, lambda).unwrap().value).norm())
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn truncation_certificate_at_default_n_max() {
    for lambda in [20.0, 40.0] {
        let q1 = near_boundary_bump(2.0, lambda, 1.0).unwrap();
        let q2 = near_boundary_bump(2.0, lambda, 0.5).unwrap();
        let n_max = default_n_max(lambda);
        let nd = operator_norm_diff(&near_field_diag(&q1, lambda, n_max).unwrap(), &near_field_diag(&q2, lambda, n_max).unwrap()).unwrap();
        assert!(nd.tail <= 1e-3 * nd.norm, "{nd:?}");
        assert!(nd.argmax > 0 && (nd.argmax as usize) < n_max);
    }
}

#[test]
fn perturbation_respects_the_shell_bound() {
    let cfg = NearBoundaryConfig::default();
    let scaled: Vec<f64> = [20.0, 40.0]
        .iter()
        .map(|&lambda| {
            let q = near_boundary_bump(cfg.kappa, lambda, 1.0).unwrap();
            perturbation_norm(&q, lambda, (3.0 * lambda) as i64).unwrap() * lambda.powf(2.5)
        })
        .collect();
    assert!(scaled[1] <= scaled[0], "{scaled:?}");
}

#[test]
fn regular_at_the_origin() {
    let q = near_boundary_bump(2.0, 10.0, 1.0).unwrap();
    let s = radial_solve(&q, 10.0, 6).unwrap();
    let (a, b) = (s.value(0.01).unwrap().norm(), s.value(0.02).unwrap().norm());
    assert!((b / a / 64.0 - 1.0).abs() < 1e-2, "{}", b / a);
    assert_eq!(radial_solve(&RadialProfile::zero(), 10.0, 6).unwrap().value(0.0).unwrap().norm(), 0.0);
}
