//! Robin problem on the unit disk for radial potentials.
//!
//! For `Q(r)` the mode `n` solution `u_n(r) e^{i n theta}` solves
//! `u'' + u'/r + (lambda^2 - n^2/r^2 - Q) u = 0` with
//! `(d/dr - i lambda) u(1) = 1`. The potential-free core `[0, r_lo]` carries the
//! exact Bessel solution; the shell `[r_lo, 1]` is integrated with a
//! four-stage Gauss–Legendre collocation method (order 8) under step
//! doubling, with log-scale renormalization so large orders never overflow.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{Matrix4, SMatrix, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::csv::CsvTable;
use crate::error::{Error, Result};
use crate::forward::LsOperator;
use crate::numerics::{
    angular_fourier_coeffs, panels, AngularGrid, CartesianGrid, GaussLegendre, GridPotential, RadialProfile,
};
use crate::specfun;

type C = Complex64;

/// Relative local tolerance of the shell integrator.
pub const RADIAL_TOLERANCE: f64 = 1e-11;
const STEP_CAP: f64 = 0.1;
const MAX_STEPS: usize = 2_000_000;

struct Tableau {
    a: [[f64; 4]; 4],
    b: [f64; 4],
    c: [f64; 4],
}

fn tableau() -> &'static Tableau {
    static T: OnceLock<Tableau> = OnceLock::new();
    T.get_or_init(|| {
        let gl = GaussLegendre::new(4);
        let c: [f64; 4] = std::array::from_fn(|i| 0.5 * (1.0 + gl.nodes[i]));
        // sum_j a_ij c_j^k = c_i^{k+1} / (k + 1)
        let v = Matrix4::from_fn(|k, j| c[j].powi(k as i32));
        let lu = v.lu();
        let mut a = [[0.0; 4]; 4];
        for (i, row) in a.iter_mut().enumerate() {
            let rhs = Vector4::from_fn(|k, _| c[i].powi(k as i32 + 1) / (k as f64 + 1.0));
            let sol = lu.solve(&rhs).expect("Vandermonde matrix of distinct nodes is invertible");
            for j in 0..4 {
                row[j] = sol[j];
            }
        }
        let b: [f64; 4] = std::array::from_fn(|j| 0.5 * gl.weights[j]);
        Tableau { a, b, c }
    })
}

/// Coefficients of `y' = A(r) y` for `y = (U, U')`.
fn system(r: f64, lambda: f64, n2: f64, q: f64) -> [[f64; 2]; 2] {
    [[0.0, 1.0], [-(lambda * lambda - n2 / (r * r) - q), -1.0 / r]]
}

/// Transfer matrix of one collocation step from `r` to `r + h`.
fn step_matrix(q: &RadialProfile, lambda: f64, n2: f64, r: f64, h: f64) -> [[f64; 2]; 2] {
    let t = tableau();
    let mats: [[[f64; 2]; 2]; 4] = std::array::from_fn(|i| {
        let ri = r + t.c[i] * h;
        system(ri, lambda, n2, q.eval(ri))
    });
    let mut m = SMatrix::<f64, 8, 8>::identity();
    for i in 0..4 {
        for j in 0..4 {
            for p in 0..2 {
                for s in 0..2 {
                    m[(2 * i + p, 2 * j + s)] -= h * t.a[i][j] * mats[i][p][s];
                }
            }
        }
    }
    let mut rhs = SMatrix::<f64, 8, 2>::zeros();
    for i in 0..4 {
        for p in 0..2 {
            for s in 0..2 {
                rhs[(2 * i + p, s)] = mats[i][p][s];
            }
        }
    }
    let k = m.lu().solve(&rhs).unwrap_or_else(|| SMatrix::<f64, 8, 2>::from_element(f64::NAN));
    let mut out = [[1.0, 0.0], [0.0, 1.0]];
    for i in 0..4 {
        for p in 0..2 {
            for s in 0..2 {
                out[p][s] += h * t.b[i] * k[(2 * i + p, s)];
            }
        }
    }
    out
}

fn mat_vec(m: &[[f64; 2]; 2], y: [f64; 2]) -> [f64; 2] {
    [m[0][0] * y[0] + m[0][1] * y[1], m[1][0] * y[0] + m[1][1] * y[1]]
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Node {
    r: f64,
    u: f64,
    v: f64,
    /// `U''` as seen from the left and right of the node.
    w_left: f64,
    w_right: f64,
    ln_scale: f64,
}

/// Mode solution of the Robin problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    pub lambda: f64,
    pub n: u64,
    /// `u_n(1)`.
    pub trace: C,
    /// `u_n'(1)`.
    pub trace_derivative: C,
    core_end: f64,
    nodes: Vec<Node>,
    /// `U'(1) - i lambda U(1)` in the scale of the last node.
    denom: C,
    end_scale: f64,
    free: bool,
}

fn second_derivative(r: f64, u: f64, v: f64, lambda: f64, n2: f64, q: f64) -> f64 {
    -v / r - (lambda * lambda - n2 / (r * r) - q) * u
}

/// Solve the mode-`n` Robin problem for the radial potential `q`.
pub fn radial_solve(q: &RadialProfile, lambda: f64, n: i64) -> Result<RadialSolution> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("lambda = {lambda} must be positive")));
    }
    let m = n.unsigned_abs();
    if q.is_zero() {
        let z = specfun::z_coeff(m as i64, 1.0, lambda)?.value;
        let dz = specfun::z_coeff_dr(m as i64, 1.0, lambda)?.value;
        return Ok(RadialSolution {
            lambda,
            n: m,
            trace: z,
            trace_derivative: dz,
            core_end: 1.0,
            nodes: Vec::new(),
            denom: C::new(1.0, 0.0),
            end_scale: 0.0,
            free: true,
        });
    }
    let (r_lo, r_hi) = q.support();
    if !(r_lo > 0.0) {
        return Err(Error::InvalidPotential(format!(
            "radial solver needs a potential-free core, support starts at r = {r_lo}"
        )));
    }
    if r_hi > 1.0 {
        return Err(Error::InvalidPotential(format!("support reaches r = {r_hi} > 1")));
    }
    let n2 = (m * m) as f64;
    let (j, jp, s0) = specfun::bessel_j_and_prime_scaled(m, lambda * r_lo)?;
    let mut y = [j, lambda * jp];
    let kscale = |r: f64| lambda.max(m as f64 / r).max(q.sup_norm().sqrt()) + 1.0;
    let mut scale = s0;
    let norm0 = y[0].abs().max(y[1].abs() / kscale(r_lo));
    y = [y[0] / norm0, y[1] / norm0];
    scale += norm0.ln();

    let breaks = q.breakpoints();
    let mut cuts: Vec<f64> = breaks.into_iter().filter(|&b| b > r_lo && b < 1.0).collect();
    cuts.push(1.0);
    let mut nodes = Vec::new();
    let q_in = |r: f64, toward: f64| q.eval(r + toward);
    let mut r = r_lo;
    let mut h = 0.05 / kscale(r_lo);
    let mut steps = 0usize;
    let w0 = second_derivative(r, y[0], y[1], lambda, n2, q_in(r, 1e-13));
    nodes.push(Node { r, u: y[0], v: y[1], w_left: w0, w_right: w0, ln_scale: scale });
    for &end in &cuts {
        while r < end {
            let cap = STEP_CAP / kscale(r);
            h = h.min(cap).min(end - r);
            let last = end - r - h <= 1e-14 * end.max(1.0);
            if last {
                h = end - r;
            }
            let full = step_matrix(q, lambda, n2, r, h);
            let half1 = step_matrix(q, lambda, n2, r, 0.5 * h);
            let half2 = step_matrix(q, lambda, n2, r + 0.5 * h, 0.5 * h);
            let y_full = mat_vec(&full, y);
            let y_mid = mat_vec(&half1, y);
            let y_two = mat_vec(&half2, y_mid);
            let k_end = kscale(r + h);
            let mag = y_two[0].abs().max(y_two[1].abs() / k_end).max(1e-300);
            let err = ((y_two[0] - y_full[0]).abs().max((y_two[1] - y_full[1]).abs() / k_end)) / (mag * 255.0);
            if !err.is_finite() {
                return Err(Error::Stiffness { n: m as i64, lambda, detail: format!("non-finite step at r = {r}") });
            }
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Stiffness { n: m as i64, lambda, detail: "step limit exceeded".into() });
            }
            if err <= RADIAL_TOLERANCE {
                let rm = r + 0.5 * h;
                let re = r + h;
                let wm = second_derivative(rm, y_mid[0], y_mid[1], lambda, n2, q.eval(rm));
                nodes.push(Node { r: rm, u: y_mid[0], v: y_mid[1], w_left: wm, w_right: wm, ln_scale: scale });
                let wl = second_derivative(re, y_two[0], y_two[1], lambda, n2, q_in(re, -1e-13));
                let wr = second_derivative(re, y_two[0], y_two[1], lambda, n2, q_in(re, 1e-13));
                nodes.push(Node { r: re, u: y_two[0], v: y_two[1], w_left: wl, w_right: wr, ln_scale: scale });
                r = if last { end } else { re };
                // renormalize for the next step
                y = [y_two[0] / mag, y_two[1] / mag];
                scale += mag.ln();
                let grow = if err == 0.0 { 2.0 } else { (0.9 * (RADIAL_TOLERANCE / err).powf(1.0 / 9.0)).min(2.0) };
                h *= grow;
            } else {
                h *= (0.9 * (RADIAL_TOLERANCE / err).powf(1.0 / 9.0)).max(0.2);
                if h < 1e-14 * r.max(1.0) {
                    return Err(Error::Stiffness {
                        n: m as i64,
                        lambda,
                        detail: format!("step size underflow at r = {r}"),
                    });
                }
            }
        }
    }
    let last = nodes.last().expect("shell integration produced nodes");
    let denom = C::new(last.v, -lambda * last.u);
    let end_scale = last.ln_scale;
    let trace = C::new(last.u, 0.0) / denom;
    let trace_derivative = C::new(last.v, 0.0) / denom;
    Ok(RadialSolution { lambda, n: m, trace, trace_derivative, core_end: r_lo, nodes, denom, end_scale, free: false })
}

impl RadialSolution {
    /// `u_n(r)` for `r` in `[0, 1]`.
    pub fn value(&self, r: f64) -> Result<C> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain(format!("r = {r} outside [0, 1]")));
        }
        if self.free {
            if r == 0.0 {
                return Ok(if self.n == 0 { specfun::z_coeff(0, 1.0, self.lambda)?.value / specfun::bessel_j(0, self.lambda)? } else { C::new(0.0, 0.0) });
            }
            return Ok(specfun::z_coeff(self.n as i64, r, self.lambda)?.value);
        }
        if r <= self.core_end {
            let j = specfun::bessel_j_scaled(self.n as i64, self.lambda * r)?;
            if j.mantissa == 0.0 {
                return Ok(C::new(0.0, 0.0));
            }
            let ln_abs = j.ln_abs() - self.end_scale - self.denom.norm().ln();
            let phase = self.denom.conj() / self.denom.norm() * j.mantissa.signum();
            return Ok(phase * ln_abs.exp());
        }
        let k = self.nodes.partition_point(|nd| nd.r <= r).clamp(1, self.nodes.len() - 1);
        let (a, b) = (&self.nodes[k - 1], &self.nodes[k]);
        let d = b.r - a.r;
        let t = (r - a.r) / d;
        let rel = (b.ln_scale - a.ln_scale).exp();
        let (u0, v0, w0) = (a.u, a.v, a.w_right);
        let (u1, v1, w1) = (b.u * rel, b.v * rel, b.w_left * rel);
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let t5 = t4 * t;
        let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
        let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
        let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
        let h3 = 0.5 * (t3 - 2.0 * t4 + t5);
        let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
        let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
        let u = h0 * u0 + h1 * d * v0 + h2 * d * d * w0 + h3 * d * d * w1 + h4 * d * v1 + h5 * u1;
        let factor = (a.ln_scale - self.end_scale).exp();
        Ok(C::new(u * factor, 0.0) / self.denom)
    }

    /// `|(d/dr - i lambda) u(1) - 1|`.
    pub fn robin_residual(&self) -> f64 {
        (self.trace_derivative - C::new(0.0, self.lambda) * self.trace - 1.0).norm()
    }

    /// `v_n = u_n - z_n` at `r`.
    pub fn perturbation(&self, r: f64) -> Result<C> {
        let z = if r == 0.0 { C::new(0.0, 0.0) } else { specfun::z_coeff(self.n as i64, r, self.lambda)?.value };
        Ok(self.value(r)? - z)
    }

    /// `||v_n||_{L^2(B)}` with `v_n = u_n - z_n`.
    pub fn perturbation_norm(&self) -> Result<f64> {
        if self.free {
            return Ok(0.0);
        }
        let v = radial_quadrature(0.0, 1.0, &[self.core_end], self.rate(), |r| {
            Ok(C::new(self.perturbation(r)?.norm_sqr(), 0.0))
        })?;
        Ok((2.0 * PI * v.re).sqrt())
    }

    /// Effective oscillation/growth rate used to size quadrature panels.
    fn rate(&self) -> f64 {
        self.lambda + self.n as f64 + 1.0
    }
}

/// `int_lo^hi f(r) r dr` with panels aligned to `breaks`, sized for the rate `k`.
pub fn radial_quadrature<F: Fn(f64) -> Result<C>>(lo: f64, hi: f64, breaks: &[f64], k: f64, f: F) -> Result<C> {
    if hi <= lo {
        return Ok(C::new(0.0, 0.0));
    }
    let gl = GaussLegendre::new(16);
    let mut acc = C::new(0.0, 0.0);
    for (a, b) in panels(lo, hi, breaks, (1.0 / k).min(0.02)) {
        for (r, w) in gl.mapped(a, b) {
            acc += f(r)? * (w * r);
        }
    }
    Ok(acc)
}

/// Diagonal `mu_n`, `0 <= n <= n_max`, of the near-field operator.
#[derive(Debug, Clone, PartialEq)]
pub struct NearFieldDiag {
    pub lambda: f64,
    pub n_max: usize,
    pub mu: Vec<C>,
}

impl NearFieldDiag {
    /// `mu_n`, equal to `mu_{-n}`.
    pub fn get(&self, n: i64) -> C {
        self.mu[n.unsigned_abs() as usize]
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["lambda", "n", "re_mu", "im_mu"]);
        for n in -(self.n_max as i64)..=(self.n_max as i64) {
            let mu = self.get(n);
            t.push(vec![crate::csv::num(self.lambda), n.to_string(), crate::csv::num(mu.re), crate::csv::num(mu.im)]);
        }
        t
    }
}

/// Diagonal of the near-field operator of a radial potential.
pub fn near_field_diag(q: &RadialProfile, lambda: f64, n_max: usize) -> Result<NearFieldDiag> {
    let need = (2.0 * lambda).ceil() as usize;
    if n_max < need {
        return Err(Error::Domain(format!("n_max = {n_max} below ceil(2 lambda) = {need}")));
    }
    near_field_diag_unchecked(q, lambda, n_max)
}

fn near_field_diag_unchecked(q: &RadialProfile, lambda: f64, n_max: usize) -> Result<NearFieldDiag> {
    let mu = (0..=n_max)
        .into_par_iter()
        .map(|n| radial_solve(q, lambda, n as i64).map(|s| s.trace))
        .collect::<Result<Vec<C>>>()?;
    Ok(NearFieldDiag { lambda, n_max, mu })
}

/// Default truncation `ceil(12 lambda)`.
pub fn default_n_max(lambda: f64) -> usize {
    (12.0 * lambda).ceil() as usize
}

/// `sup_n |mu1_n - mu2_n|` with its argmax and the tail entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormDiff {
    pub norm: f64,
    pub argmax: i64,
    pub tail: f64,
}

pub fn operator_norm_diff(d1: &NearFieldDiag, d2: &NearFieldDiag) -> Result<NormDiff> {
    if d1.lambda != d2.lambda || d1.n_max != d2.n_max {
        return Err(Error::Mismatch(format!(
            "diagonals at (lambda, n_max) = ({}, {}) and ({}, {})",
            d1.lambda, d1.n_max, d2.lambda, d2.n_max
        )));
    }
    let mut best = NormDiff { norm: 0.0, argmax: 0, tail: 0.0 };
    for (n, (a, b)) in d1.mu.iter().zip(&d2.mu).enumerate() {
        let d = (a - b).norm();
        if d > best.norm {
            best.norm = d;
            best.argmax = n as i64;
        }
    }
    best.tail = (d1.mu[d1.n_max] - d2.mu[d2.n_max]).norm();
    Ok(best)
}

/// Both sides of `int (q1 - q2) u1 u2 = int f2 (N2 - N1) f1` for the mode data
/// `f1 = e^{i n theta}`, `f2 = e^{-i m theta}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenIdentity {
    pub volume: C,
    pub boundary: C,
    pub residual: f64,
    /// Absolute accuracy of the boundary side, set by the solver tolerance.
    pub floor: f64,
}

impl GreenIdentity {
    /// `residual / (1e-8 |volume| + floor)`; at most one when the identity
    /// holds to `1e-8` relative.
    pub fn normalized(&self) -> f64 {
        let scale = 1e-8 * self.volume.norm() + self.floor;
        if self.residual == 0.0 {
            0.0
        } else {
            self.residual / scale
        }
    }
}

pub fn green_identity_residual(q1: &RadialProfile, q2: &RadialProfile, lambda: f64, n: i64, m: i64) -> Result<GreenIdentity> {
    if n != m {
        // the angular factor int e^{i(n - m) theta} vanishes on both sides
        return Ok(GreenIdentity { volume: C::new(0.0, 0.0), boundary: C::new(0.0, 0.0), residual: 0.0, floor: 0.0 });
    }
    let s1 = radial_solve(q1, lambda, n)?;
    let s2 = radial_solve(q2, lambda, m)?;
    let diff = q1.difference(q2);
    let mut breaks = q1.breakpoints();
    breaks.extend(q2.breakpoints());
    let (lo, hi) = joint_support(q1, q2);
    let integral = radial_quadrature(lo, hi, &breaks, s1.rate(), |r| {
        Ok(s1.value(r)? * s2.value(r)? * diff.eval(r))
    })?;
    let volume = integral * (2.0 * PI);
    let boundary = (s2.trace - s1.trace) * (2.0 * PI);
    let floor = 2.0 * PI * RADIAL_TOLERANCE * (s1.trace.norm() + s2.trace.norm());
    Ok(GreenIdentity { volume, boundary, residual: (volume - boundary).norm(), floor })
}

fn joint_support(q1: &RadialProfile, q2: &RadialProfile) -> (f64, f64) {
    match (q1.is_zero(), q2.is_zero()) {
        (true, true) => (1.0, 1.0),
        (false, true) => q1.support(),
        (true, false) => q2.support(),
        (false, false) => {
            let (a, b) = q1.support();
            let (c, d) = q2.support();
            (a.min(c), b.max(d))
        }
    }
}

/// Discretization of the plane-wave probes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeSettings {
    /// Grid points per wavelength of the full-plane solves.
    pub points_per_wavelength: f64,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        ProbeSettings { points_per_wavelength: 12.0 }
    }
}

/// Number of boundary samples used to expand probe traces.
pub fn probe_boundary_points(lambda: f64) -> usize {
    let k = (1.5 * lambda).ceil() as usize + 32;
    2 * k + 2
}

/// Robin traces `(d/dr - i lambda) phi` of the full-plane solution of `q` on
/// the unit circle.
fn robin_trace(q: &RadialProfile, lambda: f64, dir: [f64; 2], circle: &AngularGrid, settings: &ProbeSettings) -> Result<Vec<C>> {
    let points: Vec<[f64; 2]> = (0..circle.size()).map(|k| circle.direction(k)).collect();
    let pairs: Vec<(C, C)> = if q.is_zero() {
        points
            .iter()
            .map(|x| {
                let e = C::from_polar(1.0, lambda * (dir[0] * x[0] + dir[1] * x[1]));
                (e, e * C::new(0.0, lambda * (dir[0] * x[0] + dir[1] * x[1])))
            })
            .collect()
    } else {
        let (_, hi) = q.support();
        if hi >= 1.0 {
            return Err(Error::InvalidPotential("probe potentials must vanish near the unit circle".into()));
        }
        let grid = CartesianGrid::resolving(lambda, settings.points_per_wavelength, hi)?;
        let gp = GridPotential::from_profile(q, grid)?;
        let op = LsOperator::new(&gp, lambda)?;
        let u = op.solve(dir)?;
        op.field_and_radial_derivative(&u, dir, &points)
    };
    Ok(pairs.into_iter().map(|(v, d)| d - C::new(0.0, lambda) * v).collect())
}

/// Leading-order estimate of `(q1 - q2)^(xi)` from near-field data, using the
/// plane-wave probes `theta1 + theta2 = -xi / lambda`.
pub fn probe_fourier_nearfield(
    q1: &RadialProfile,
    q2: &RadialProfile,
    lambda: f64,
    xi: [f64; 2],
    settings: &ProbeSettings,
) -> Result<C> {
    let norm = xi[0].hypot(xi[1]);
    if !(norm <= 2.0 * lambda) {
        return Err(Error::DegenerateBand { norm, limit: 2.0 * lambda });
    }
    if q1 == q2 {
        return Ok(C::new(0.0, 0.0));
    }
    let half = [-0.5 * xi[0] / lambda, -0.5 * xi[1] / lambda];
    let eta_len = (1.0 - half[0] * half[0] - half[1] * half[1]).max(0.0).sqrt();
    let perp = if norm > 0.0 { [-xi[1] / norm, xi[0] / norm] } else { [1.0, 0.0] };
    let theta1 = [half[0] + eta_len * perp[0], half[1] + eta_len * perp[1]];
    let theta2 = [half[0] - eta_len * perp[0], half[1] - eta_len * perp[1]];
    let circle = AngularGrid::new(probe_boundary_points(lambda))?;
    let k_max = circle.size() / 2 - 1;
    let f1 = robin_trace(q1, lambda, theta1, &circle, settings)?;
    let f2 = robin_trace(q2, lambda, theta2, &circle, settings)?;
    let c1 = angular_fourier_coeffs(&circle, &f1, k_max)?;
    let c2 = angular_fourier_coeffs(&circle, &f2, k_max)?;
    let d1 = near_field_diag_unchecked(q1, lambda, k_max)?;
    let d2 = near_field_diag_unchecked(q2, lambda, k_max)?;
    let mut acc = C::new(0.0, 0.0);
    for n in -(k_max as i64)..=(k_max as i64) {
        let idx = (n + k_max as i64) as usize;
        let neg = (k_max as i64 - n) as usize;
        acc += c1[idx] * (d1.get(n) - d2.get(n)) * c2[neg];
    }
    Ok(-acc / (2.0 * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{bump, near_boundary_bump, RadialShape};

    #[test]
    fn tableau_is_order_eight() {
        let t = tableau();
        for k in 0..8 {
            let s: f64 = (0..4).map(|j| t.b[j] * t.c[j].powi(k)).sum();
            assert!((s - 1.0 / (k as f64 + 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn free_case_is_exact() {
        let s = radial_solve(&RadialProfile::zero(), 5.0, 0).unwrap();
        let j = specfun::bessel_j(0, 5.0).unwrap();
        let jp = specfun::bessel_j_prime(0, 5.0).unwrap();
        let want = C::new(j, 0.0) / (5.0 * C::new(jp, -j));
        assert!((s.trace - want).norm() < 1e-15);
        assert!(s.robin_residual() < 1e-12);
    }

    #[test]
    fn shell_with_zero_value_matches_free_solution() {
        // a layer of value zero is dropped, so use a tiny layer and compare
        let q = RadialProfile::new(vec![RadialShape::Layer { lo: 0.5, hi: 0.9, value: 1e-14 }]).unwrap();
        for n in [0i64, 3, 30] {
            let s = radial_solve(&q, 12.0, n).unwrap();
            let z = specfun::z_coeff(n, 1.0, 12.0).unwrap().value;
            assert!((s.trace - z).norm() < 1e-10 * z.norm(), "n = {n}");
            let zr = specfun::z_coeff(n, 0.7, 12.0).unwrap().value;
            assert!((s.value(0.7).unwrap() - zr).norm() < 1e-9 * z.norm().max(zr.norm()), "n = {n}");
        }
    }

    #[test]
    fn constant_shell_matches_bessel_matching() {
        // Q = q0 on [a, 1]: exact solution alpha J_n(k r) + beta Y_n(k r) outside a
        let (lambda, q0, a, n) = (7.0, 10.0, 0.6, 2i64);
        let q = RadialProfile::new(vec![RadialShape::Layer { lo: a, hi: 1.0, value: q0 }]).unwrap();
        let s = radial_solve(&q, lambda, n).unwrap();
        let k = (lambda * lambda - q0).sqrt();
        let (u0, v0) = (specfun::bessel_j(n, lambda * a).unwrap(), lambda * specfun::bessel_j_prime(n, lambda * a).unwrap());
        let (ja, jpa) = (specfun::bessel_j(n, k * a).unwrap(), k * specfun::bessel_j_prime(n, k * a).unwrap());
        let (ya, ypa) = (specfun::bessel_y(n, k * a).unwrap(), k * specfun::bessel_y_prime(n, k * a).unwrap());
        let det = ja * ypa - jpa * ya;
        let alpha = (u0 * ypa - v0 * ya) / det;
        let beta = (ja * v0 - jpa * u0) / det;
        let u1 = alpha * specfun::bessel_j(n, k).unwrap() + beta * specfun::bessel_y(n, k).unwrap();
        let v1 = k * (alpha * specfun::bessel_j_prime(n, k).unwrap() + beta * specfun::bessel_y_prime(n, k).unwrap());
        let want = C::new(u1, 0.0) / C::new(v1, -lambda * u1);
        assert!((s.trace - want).norm() < 1e-10 * want.norm());
        assert!(s.robin_residual() < 1e-9);
    }

    #[test]
    fn rejects_support_touching_origin() {
        let q = bump(1.0, 0.0, 0.5).unwrap();
        assert!(matches!(radial_solve(&q, 5.0, 1), Err(Error::InvalidPotential(_))));
    }

    #[test]
    fn large_orders_do_not_underflow() {
        let q = near_boundary_bump(2.0, 20.0, 1.0).unwrap();
        let s = radial_solve(&q, 20.0, 200).unwrap();
        assert!(s.trace.norm() > 0.0 && s.trace.norm().is_finite());
        assert!(s.robin_residual() < 1e-9);
        let z = specfun::z_coeff(200, 1.0, 20.0).unwrap().value;
        assert!((s.trace - z).norm() < 0.1 * z.norm());
    }

    #[test]
    fn diag_symmetry_and_norm() {
        let q = near_boundary_bump(2.0, 10.0, 1.0).unwrap();
        let d = near_field_diag(&q, 10.0, 20).unwrap();
        assert_eq!(d.get(-7), d.get(7));
        let free = near_field_diag(&RadialProfile::zero(), 10.0, 20).unwrap();
        assert_eq!(operator_norm_diff(&d, &d).unwrap().norm, 0.0);
        let nd = operator_norm_diff(&d, &free).unwrap();
        assert!(nd.norm > 0.0 && nd.tail <= nd.norm);
        assert!(near_field_diag(&q, 10.0, 5).is_err());
        let other = near_field_diag(&q, 10.0, 21).unwrap();
        assert!(matches!(operator_norm_diff(&d, &other), Err(Error::Mismatch(_))));
    }

    #[test]
    fn green_identity_holds_for_modes() {
        let q1 = bump(2.0, 0.6, 0.3).unwrap();
        let q0 = RadialProfile::zero();
        let g = green_identity_residual(&q1, &q0, 10.0, 7, 7).unwrap();
        assert!(g.residual <= 1e-8 * g.volume.norm(), "{g:?}");
        assert!(g.normalized() <= 1.0);
        let same = green_identity_residual(&q1, &q1, 10.0, 7, 7).unwrap();
        assert!(same.residual <= 1e-10);
        let off = green_identity_residual(&q1, &q0, 10.0, 7, 3).unwrap();
        assert_eq!(off.residual, 0.0);
    }

    #[test]
    fn probe_of_identical_pair_is_zero() {
        let q = bump(1.0, 0.5, 0.3).unwrap();
        assert_eq!(probe_fourier_nearfield(&q, &q, 10.0, [0.0, 0.0], &ProbeSettings::default()).unwrap(), C::new(0.0, 0.0));
        assert!(probe_fourier_nearfield(&q, &RadialProfile::zero(), 10.0, [25.0, 0.0], &ProbeSettings::default()).is_err());
    }
}
