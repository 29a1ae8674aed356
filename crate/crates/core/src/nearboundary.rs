//! Potentials concentrated in a thin shell at the boundary: mode
//! measurements, the Laplace-transform bound, the monotone Fourier bound and
//! the disk stability functional.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::borninv::StabilityRecord;
use crate::csv::CsvTable;
use crate::error::{Error, Result};
use crate::nearfield::{
    default_n_max, near_field_diag, operator_norm_diff, radial_quadrature, radial_solve, NearFieldDiag,
};
use crate::numerics::{
    laplace_oracle, panels, radial_fourier, FourierMethod, FourierSamples, GaussLegendre, RadialProfile,
};
use crate::specfun;

type C = Complex64;

/// Slack allowed when checking that a support lies in the boundary shell.
const SHELL_SLACK: f64 = 1e-12;
/// Most negative value still accepted as nonnegative.
const MONOTONE_FLOOR: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NearBoundaryConfig {
    pub kappa: f64,
    pub big_k: f64,
    pub lambda0: f64,
    /// Laplace evaluation point; defaults to `3 big_k lambda0`.
    #[serde(default)]
    pub zeta0: Option<f64>,
}

impl Default for NearBoundaryConfig {
    fn default() -> Self {
        NearBoundaryConfig { kappa: 2.0, big_k: 2.0, lambda0: 10.0, zeta0: None }
    }
}

impl NearBoundaryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) || !(self.big_k >= 1.0) || !(self.lambda0 > 0.0) {
            return Err(Error::Config(format!(
                "near-boundary parameters need kappa > 0, big_k >= 1, lambda0 > 0 (got {}, {}, {})",
                self.kappa, self.big_k, self.lambda0
            )));
        }
        if let Some(z) = self.zeta0 {
            if !(z > 0.0) {
                return Err(Error::Config(format!("zeta0 = {z} must be positive")));
            }
        }
        Ok(())
    }

    pub fn zeta0(&self) -> f64 {
        self.zeta0.unwrap_or(3.0 * self.big_k * self.lambda0)
    }

    /// Smallest admissible mode index `ceil(big_k lambda)`.
    pub fn mode_threshold(&self, lambda: f64) -> i64 {
        (self.big_k * lambda).ceil() as i64
    }

    /// Reject potentials not supported in `(1 - kappa/lambda, 1)`.
    pub fn check_shell(&self, q: &RadialProfile, lambda: f64) -> Result<()> {
        if q.is_zero() {
            return Ok(());
        }
        let (lo, hi) = q.support();
        let inner = 1.0 - self.kappa / lambda;
        if lo < inner - SHELL_SLACK || hi > 1.0 {
            return Err(Error::InvalidPotential(format!(
                "support [{lo}, {hi}] leaves the shell ({inner}, 1)"
            )));
        }
        Ok(())
    }
}

/// Both sides of the mode pairing for data `e^{i n theta}` and `e^{-i m theta}`,
/// with the perturbation norms that bound their difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMeasurement {
    pub lambda: f64,
    pub n: i64,
    pub m: i64,
    /// `2 pi delta_nm (mu1_n - mu2_n)`.
    pub boundary_value: C,
    /// `2 pi delta_nm int (Q1 - Q2) z_n z_m r dr`.
    pub volume_value: C,
    /// `|boundary_value + volume_value|`: the two sides have opposite signs.
    pub residual: f64,
    /// Cauchy–Schwarz bound on the neglected `v` terms.
    pub bound: f64,
    pub v1_norm: f64,
    pub v2_norm: f64,
}

fn check_lambda(d: &NearFieldDiag, lambda: f64) -> Result<()> {
    if d.lambda != lambda {
        return Err(Error::Mismatch(format!("diagonal at lambda = {} used at lambda = {lambda}", d.lambda)));
    }
    Ok(())
}

fn z_value(n: i64, r: f64, lambda: f64) -> Result<C> {
    if r == 0.0 {
        return Ok(C::new(0.0, 0.0));
    }
    Ok(specfun::z_coeff(n, r, lambda)?.value)
}

/// `(int_I |f|^2 r dr)^{1/2}` over the support interval `I` of the difference.
fn weighted_norm<F: Fn(f64) -> Result<f64>>(lo: f64, hi: f64, breaks: &[f64], k: f64, f: F) -> Result<f64> {
    Ok(radial_quadrature(lo, hi, breaks, k, |r| Ok(C::new(f(r)?.powi(2), 0.0)))?.re.sqrt())
}

#[allow(clippy::too_many_arguments)]
pub fn mode_measurement(
    d1: &NearFieldDiag,
    d2: &NearFieldDiag,
    q1: &RadialProfile,
    q2: &RadialProfile,
    cfg: &NearBoundaryConfig,
    lambda: f64,
    n: i64,
    m: i64,
) -> Result<ModeMeasurement> {
    cfg.validate()?;
    check_lambda(d1, lambda)?;
    check_lambda(d2, lambda)?;
    let threshold = cfg.mode_threshold(lambda);
    if n < threshold || m < threshold {
        return Err(Error::Threshold(format!("modes ({n}, {m}) below ceil(K lambda) = {threshold}")));
    }
    if lambda < cfg.lambda0 {
        return Err(Error::Threshold(format!("lambda = {lambda} below lambda0 = {}", cfg.lambda0)));
    }
    for (d, k) in [(d1, n), (d1, m), (d2, n), (d2, m)] {
        if k as usize > d.n_max {
            return Err(Error::Mismatch(format!("mode {k} beyond the diagonal truncation {}", d.n_max)));
        }
    }
    let zero = ModeMeasurement {
        lambda,
        n,
        m,
        boundary_value: C::new(0.0, 0.0),
        volume_value: C::new(0.0, 0.0),
        residual: 0.0,
        bound: 0.0,
        v1_norm: 0.0,
        v2_norm: 0.0,
    };
    let diff = q1.difference(q2);
    if n != m || diff.is_zero() {
        return Ok(zero);
    }
    let boundary_value = (d1.get(n) - d2.get(n)) * (2.0 * PI);
    let (lo, hi) = diff.support();
    let breaks = diff.breakpoints();
    let rate = lambda + n as f64 + 1.0;
    let integral = radial_quadrature(lo, hi, &breaks, rate, |r| {
        Ok(z_value(n, r, lambda)? * z_value(m, r, lambda)? * diff.eval(r))
    })?;
    let volume_value = integral * (2.0 * PI);
    let s1 = radial_solve(q1, lambda, n)?;
    let s2 = radial_solve(q2, lambda, m)?;
    let v1 = weighted_norm(lo, hi, &breaks, rate, |r| Ok(s1.perturbation(r)?.norm()))?;
    let v2 = weighted_norm(lo, hi, &breaks, rate, |r| Ok(s2.perturbation(r)?.norm()))?;
    let qz_n = weighted_norm(lo, hi, &breaks, rate, |r| Ok(diff.eval(r).abs() * z_value(n, r, lambda)?.norm()))?;
    let qz_m = weighted_norm(lo, hi, &breaks, rate, |r| Ok(diff.eval(r).abs() * z_value(m, r, lambda)?.norm()))?;
    let bound = 2.0 * PI * (qz_n * v2 + qz_m * v1 + diff.sup_norm() * v1 * v2);
    Ok(ModeMeasurement {
        boundary_value,
        volume_value,
        residual: (boundary_value + volume_value).norm(),
        bound,
        v1_norm: v1,
        v2_norm: v2,
        ..zero
    })
}

/// `||v_n||_{L^2(B)}` for the mode solution of `q`.
pub fn perturbation_norm(q: &RadialProfile, lambda: f64, n: i64) -> Result<f64> {
    radial_solve(q, lambda, n)?.perturbation_norm()
}

/// `C_{q1,q2} = max(|q1|, |q2|, |q1| |q2|)` in sup norms.
pub fn pair_constant(q1: &RadialProfile, q2: &RadialProfile) -> f64 {
    let (a, b) = (q1.sup_norm(), q2.sup_norm());
    a.max(b).max(a * b)
}

/// One row of a near-boundary experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearBoundaryRecord {
    pub lambda: f64,
    /// Laplace variable `t`, or the disk radius `K(lambda)`.
    pub t_or_k: f64,
    /// Laplace value, or the band integral.
    pub value: f64,
    pub nearfield_term: f64,
    pub remainder_term: f64,
    pub ratio: f64,
}

impl NearBoundaryRecord {
    pub fn csv_header() -> CsvTable {
        CsvTable::new(&["lambda", "t_or_Klambda", "laplace_or_lhs", "nearfield_term", "remainder_term", "ratio"])
    }

    pub fn push_to(&self, t: &mut CsvTable) {
        t.push_numbers(&[self.lambda, self.t_or_k, self.value, self.nearfield_term, self.remainder_term, self.ratio]);
    }
}

fn ratio(value: f64, denom: f64) -> f64 {
    if value == 0.0 {
        0.0
    } else {
        value / denom
    }
}

/// Laplace transform of the angular mean of `q1 - q2` against the near-field
/// distance. `t = n + m` with `n = floor(t/2)`, `m = ceil(t/2)`; for radial
/// potentials only the diagonal carries signal, so the value is taken from the
/// oracle at `t` directly.
#[allow(clippy::too_many_arguments)]
pub fn laplace_bound_check(
    d1: &NearFieldDiag,
    d2: &NearFieldDiag,
    q1: &RadialProfile,
    q2: &RadialProfile,
    cfg: &NearBoundaryConfig,
    lambda: f64,
    t: f64,
) -> Result<NearBoundaryRecord> {
    cfg.validate()?;
    check_lambda(d1, lambda)?;
    check_lambda(d2, lambda)?;
    let floor = 2.0 * cfg.big_k * lambda;
    if t < floor {
        return Err(Error::Threshold(format!("t = {t} below 2 K lambda = {floor}")));
    }
    let diff = q1.difference(q2);
    let value = 2.0 * PI * laplace_oracle(&diff, t);
    let nearfield_term = lambda * lambda * operator_norm_diff(d1, d2)?.norm;
    let remainder_term = pair_constant(q1, q2) / (lambda * lambda) * diff.sup_norm();
    Ok(NearBoundaryRecord {
        lambda,
        t_or_k: t,
        value,
        nearfield_term,
        remainder_term,
        ratio: ratio(value.abs(), nearfield_term + remainder_term),
    })
}

fn check_monotone(diff: &RadialProfile) -> Result<()> {
    let (min, at) = diff.min_value();
    if min < MONOTONE_FLOOR {
        return Err(Error::Monotonicity { min_value: min, at });
    }
    Ok(())
}

/// Frequency-independent bound on `|q^(xi)|` for a nonnegative shell potential.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneBound {
    pub bound: f64,
    /// The bound at every requested node.
    pub samples: FourierSamples,
    /// `|q^(xi)|` from the oracle at the same nodes.
    pub oracle_abs: Vec<f64>,
    /// Whether the bound dominates the oracle at every node.
    pub dominates: bool,
    /// `e^{zeta0 kappa / lambda} L(zeta0) / L(0)`.
    pub slack: f64,
}

pub fn monotone_fourier_bound(
    qdiff: &RadialProfile,
    cfg: &NearBoundaryConfig,
    lambda: f64,
    xis: &[[f64; 2]],
) -> Result<MonotoneBound> {
    cfg.validate()?;
    check_monotone(qdiff)?;
    cfg.check_shell(qdiff, lambda)?;
    let zeta0 = cfg.zeta0();
    let lz = laplace_oracle(qdiff, zeta0);
    let growth = (zeta0 * cfg.kappa / lambda).exp();
    let bound = 2.0 * PI * growth * lz;
    let l0 = laplace_oracle(qdiff, 0.0);
    let slack = if l0 == 0.0 { 1.0 } else { growth * lz / l0 };
    let oracle_abs: Vec<f64> = xis.iter().map(|x| radial_fourier(qdiff, x[0].hypot(x[1])).norm()).collect();
    let dominates = oracle_abs.iter().all(|&v| v <= bound);
    let samples = FourierSamples {
        method: FourierMethod::LaplaceMonotoneBound,
        lambda: Some(lambda),
        band_limit: None,
        nodes: xis.to_vec(),
        values: vec![C::new(bound, 0.0); xis.len()],
    };
    Ok(MonotoneBound { bound, samples, oracle_abs, dominates, slack })
}

/// `int_{|xi| <= K} |q1^ - q2^|^2 dxi` against the near-field data, with
/// `q1 >= q2`.
pub fn theorem_disk_record(
    q1: &RadialProfile,
    q2: &RadialProfile,
    cfg: &NearBoundaryConfig,
    lambda: f64,
    big_k_of_lambda: f64,
) -> Result<StabilityRecord> {
    cfg.validate()?;
    if big_k_of_lambda < lambda {
        return Err(Error::Threshold(format!("K(lambda) = {big_k_of_lambda} below lambda = {lambda}")));
    }
    let diff = q1.difference(q2);
    check_monotone(&diff)?;
    cfg.check_shell(q1, lambda)?;
    cfg.check_shell(q2, lambda)?;
    if diff.is_zero() {
        return Ok(StabilityRecord { lambda, lhs: 0.0, data_term: 0.0, remainder_term: 0.0, ratio: 0.0 });
    }
    let gl = GaussLegendre::new(16);
    let lhs: f64 = panels(0.0, big_k_of_lambda, &[], 1.0)
        .into_iter()
        .map(|(a, b)| gl.integrate(a, b, |rho| radial_fourier(&diff, rho).norm_sqr() * rho))
        .sum::<f64>()
        * 2.0 * PI;
    let n_max = default_n_max(lambda);
    let d1 = near_field_diag(q1, lambda, n_max)?;
    let d2 = near_field_diag(q2, lambda, n_max)?;
    let nd = operator_norm_diff(&d1, &d2)?.norm;
    let k2 = big_k_of_lambda * big_k_of_lambda;
    let l4 = lambda.powi(4);
    let data_term = k2 * l4 * nd * nd;
    let c = pair_constant(q1, q2);
    let remainder_term = k2 * c * c / l4 * diff.sup_norm().powi(2);
    Ok(StabilityRecord { lambda, lhs, data_term, remainder_term, ratio: ratio(lhs, data_term + remainder_term) })
}

/// Render Laplace or disk records in the shared near-boundary layout.
pub fn records_csv(records: &[NearBoundaryRecord]) -> CsvTable {
    let mut t = NearBoundaryRecord::csv_header();
    for r in records {
        r.push_to(&mut t);
    }
    t
}

/// Disk records share the near-boundary layout with `t_or_Klambda = K(lambda)`.
pub fn disk_record_row(rec: &StabilityRecord, big_k_of_lambda: f64) -> NearBoundaryRecord {
    NearBoundaryRecord {
        lambda: rec.lambda,
        t_or_k: big_k_of_lambda,
        value: rec.lhs,
        nearfield_term: rec.data_term,
        remainder_term: rec.remainder_term,
        ratio: rec.ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::near_boundary_bump;

    fn pair(lambda: f64) -> (RadialProfile, RadialProfile) {
        (near_boundary_bump(2.0, lambda, 1.0).unwrap(), near_boundary_bump(2.0, lambda, 0.5).unwrap())
    }

    #[test]
    fn orthogonality_and_identical_pairs() {
        let cfg = NearBoundaryConfig::default();
        let (q1, q2) = pair(20.0);
        let d1 = near_field_diag(&q1, 20.0, 130).unwrap();
        let d2 = near_field_diag(&q2, 20.0, 130).unwrap();
        let off = mode_measurement(&d1, &d2, &q1, &q2, &cfg, 20.0, 40, 41).unwrap();
        assert_eq!(off.boundary_value, C::new(0.0, 0.0));
        assert_eq!(off.volume_value, C::new(0.0, 0.0));
        let same = mode_measurement(&d1, &d1, &q1, &q1, &cfg, 20.0, 40, 40).unwrap();
        assert_eq!(same.residual, 0.0);
        assert!(matches!(mode_measurement(&d1, &d2, &q1, &q2, &cfg, 20.0, 39, 40), Err(Error::Threshold(_))));
    }

    #[test]
    fn mode_identity_within_bound() {
        let cfg = NearBoundaryConfig::default();
        let (q1, q2) = pair(20.0);
        let d1 = near_field_diag(&q1, 20.0, 60).unwrap();
        let d2 = near_field_diag(&q2, 20.0, 60).unwrap();
        let mm = mode_measurement(&d1, &d2, &q1, &q2, &cfg, 20.0, 40, 40).unwrap();
        assert!(mm.residual <= mm.bound, "{mm:?}");
        assert!(mm.residual < 0.5 * mm.volume_value.norm());
    }

    #[test]
    fn laplace_check_thresholds_and_sign() {
        let cfg = NearBoundaryConfig::default();
        let (q1, q2) = pair(20.0);
        let d1 = near_field_diag(&q1, 20.0, 40).unwrap();
        let d2 = near_field_diag(&q2, 20.0, 40).unwrap();
        assert!(matches!(laplace_bound_check(&d1, &d2, &q1, &q2, &cfg, 20.0, 79.0), Err(Error::Threshold(_))));
        let a = laplace_bound_check(&d1, &d2, &q1, &q2, &cfg, 20.0, 80.0).unwrap();
        let b = laplace_bound_check(&d1, &d2, &q1, &q2, &cfg, 20.0, 120.0).unwrap();
        assert!(a.value > b.value && b.value > 0.0);
        let same = laplace_bound_check(&d1, &d1, &q1, &q1, &cfg, 20.0, 80.0).unwrap();
        assert_eq!(same.value, 0.0);
    }

    #[test]
    fn monotone_bound_dominates_far_beyond_band() {
        let cfg = NearBoundaryConfig::default();
        let q = near_boundary_bump(2.0, 20.0, 1.0).unwrap();
        let xis: Vec<[f64; 2]> = (0..=40).map(|k| [k as f64 * 5.0, 0.0]).collect();
        let b = monotone_fourier_bound(&q, &cfg, 20.0, &xis).unwrap();
        assert!(b.dominates && b.slack >= 1.0);
        let zero = monotone_fourier_bound(&RadialProfile::zero(), &cfg, 20.0, &xis).unwrap();
        assert_eq!(zero.bound, 0.0);
        let neg = q.scaled(-1.0);
        assert!(matches!(monotone_fourier_bound(&neg, &cfg, 20.0, &xis), Err(Error::Monotonicity { .. })));
    }

    #[test]
    fn disk_record_rejects_small_k_and_orders() {
        let cfg = NearBoundaryConfig::default();
        let (q1, q2) = pair(20.0);
        assert!(matches!(theorem_disk_record(&q1, &q2, &cfg, 20.0, 19.0), Err(Error::Threshold(_))));
        assert!(matches!(theorem_disk_record(&q2, &q1, &cfg, 20.0, 40.0), Err(Error::Monotonicity { .. })));
        let r = theorem_disk_record(&q1, &q1, &cfg, 20.0, 40.0).unwrap();
        assert_eq!(r.lhs, 0.0);
    }
}
