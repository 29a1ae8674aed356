//! Full-plane scattering by a compactly supported potential.
//!
//! The total field solves the Lippmann–Schwinger equation
//! `u(x) + int G(x - y) q(y) u(y) dy = e^{i lambda x . omega}` with the
//! outgoing kernel `G = (i/4) H0(lambda |x|)`. It is discretized on the
//! Cartesian nodes of the potential's grid (punctured trapezoid rule, exact
//! integral of `G` over the self cell) and solved by dense LU for small
//! supports or GMRES with FFT convolution otherwise.

use std::f64::consts::{FRAC_PI_4, PI};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::csv::{num, CsvTable};
use crate::error::{Error, Result};
use crate::linalg::{gmres, Convolver};
use crate::numerics::{fourier_oracle, AngularGrid, CartesianGrid, GaussLegendre, GridPotential, Potential};
use crate::specfun::{self, far_field_coefficient, scattering_matrix_factor};

type C = Complex64;

/// Supports up to this many nodes are solved by dense LU.
pub const DENSE_LIMIT: usize = 1500;
/// Relative residual demanded from the iterative solver.
pub const GMRES_TOLERANCE: f64 = 1e-12;

/// `int over [-h/2, h/2]^2 of G_lambda(x) dx`.
pub fn self_cell_integral(lambda: f64, h: f64) -> C {
    let gl = GaussLegendre::new(32);
    let i = C::new(0.0, 1.0);
    let tail = C::new(0.0, 2.0 / (PI * lambda * lambda));
    let sum: C = gl
        .mapped(0.0, FRAC_PI_4)
        .map(|(phi, w)| {
            let rho = 0.5 * h / phi.cos();
            let [_, j1, _, y1] = specfun::bessel_01(lambda * rho);
            let h1 = C::new(j1, y1);
            (h1 * (rho / lambda) + tail) * w
        })
        .sum();
    sum * 8.0 * 0.25 * i
}

/// Discrete Lippmann–Schwinger operator `I + K diag(q)` of one potential at one
/// frequency, restricted to the nodes where `q != 0`.
pub struct LsOperator {
    lambda: f64,
    grid: CartesianGrid,
    q: Vec<f64>,
    support: Vec<usize>,
    conv: Convolver,
    dense: Option<nalgebra::linalg::LU<C, nalgebra::Dyn, nalgebra::Dyn>>,
}

impl std::fmt::Debug for LsOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LsOperator")
            .field("lambda", &self.lambda)
            .field("grid", &self.grid)
            .field("unknowns", &self.support.len())
            .field("dense", &self.dense.is_some())
            .finish()
    }
}

/// Check that the grid resolves the wavelength with ten points.
pub fn check_resolution(grid: &CartesianGrid, lambda: f64) -> Result<()> {
    let limit = 2.0 * PI / (10.0 * lambda);
    let spacing = grid.spacing();
    if spacing > limit * (1.0 + 1e-12) {
        return Err(Error::Resolution { spacing, limit, lambda });
    }
    Ok(())
}

impl LsOperator {
    pub fn new(q: &GridPotential, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("lambda = {lambda} must be positive")));
        }
        let grid = *q.grid();
        check_resolution(&grid, lambda)?;
        let h = grid.spacing();
        let side = grid.side();
        // kernel depends on (|dx|, |dy|) only and is symmetric under swapping them
        let mut table = vec![C::new(0.0, 0.0); side * side];
        for dx in 0..side {
            for dy in 0..=dx {
                let v = if dx == 0 && dy == 0 {
                    self_cell_integral(lambda, h)
                } else {
                    specfun::green_kernel(lambda, h * (dx as f64).hypot(dy as f64)) * (h * h)
                };
                table[dx * side + dy] = v;
                table[dy * side + dx] = v;
            }
        }
        let lookup = |dx: i64, dy: i64| table[dx.unsigned_abs() as usize * side + dy.unsigned_abs() as usize];
        let conv = Convolver::new(side, lookup);
        let support: Vec<usize> = q.values().iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(k, _)| k).collect();
        let dense = if !support.is_empty() && support.len() <= DENSE_LIMIT {
            let n = support.len();
            let qv = q.values();
            let m = DMatrix::from_fn(n, n, |a, b| {
                let (ka, kb) = (support[a], support[b]);
                let dx = (ka % side) as i64 - (kb % side) as i64;
                let dy = (ka / side) as i64 - (kb / side) as i64;
                let k = lookup(dx, dy) * qv[kb];
                if a == b {
                    k + 1.0
                } else {
                    k
                }
            });
            let lu = m.lu();
            let diag = lu.u().diagonal();
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for d in diag.iter() {
                lo = lo.min(d.norm());
                hi = hi.max(d.norm());
            }
            let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
            if !(condition < 1e14) {
                return Err(Error::SingularSystem {
                    detail: format!("dense Lippmann–Schwinger matrix of size {n}"),
                    condition,
                });
            }
            Some(lu)
        } else {
            None
        };
        Ok(LsOperator { lambda, grid, q: q.values().to_vec(), support, conv, dense })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn grid(&self) -> &CartesianGrid {
        &self.grid
    }

    /// Grid indices of the unknowns.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn incident(&self, dir: [f64; 2], k: usize) -> C {
        let [x, y] = self.grid.node(k);
        C::from_polar(1.0, self.lambda * (dir[0] * x + dir[1] * y))
    }

    /// `K (q w)` on the full grid for `w` given on the support.
    fn potential_convolution(&self, w: &[C]) -> Vec<C> {
        let mut f = vec![C::new(0.0, 0.0); self.grid.len()];
        for (&k, &wk) in self.support.iter().zip(w) {
            f[k] = wk * self.q[k];
        }
        self.conv.apply(&f)
    }

    /// Apply `I + K diag(q)` restricted to the support.
    pub fn apply(&self, w: &[C]) -> Vec<C> {
        let kw = self.potential_convolution(w);
        self.support.iter().zip(w).map(|(&k, &wk)| wk + kw[k]).collect()
    }

    /// Total field on the support for a plane wave incident along `dir`.
    pub fn solve(&self, dir: [f64; 2]) -> Result<Vec<C>> {
        if self.support.is_empty() {
            return Ok(Vec::new());
        }
        let rhs: Vec<C> = self.support.iter().map(|&k| self.incident(dir, k)).collect();
        self.solve_rhs(&rhs)
    }

    /// Solve `(I + K q) u = rhs` on the support.
    pub fn solve_rhs(&self, rhs: &[C]) -> Result<Vec<C>> {
        if let Some(lu) = &self.dense {
            let b = DVector::from_column_slice(rhs);
            let x = lu.solve(&b).ok_or_else(|| Error::SingularSystem {
                detail: "LU solve failed".into(),
                condition: f64::INFINITY,
            })?;
            return Ok(x.iter().copied().collect());
        }
        let out = gmres(|w| self.apply(w), rhs, GMRES_TOLERANCE, 60, 3000)?;
        Ok(out.x)
    }

    /// Relative residual of a support solution.
    pub fn residual(&self, u: &[C], dir: [f64; 2]) -> f64 {
        let au = self.apply(u);
        let mut num2 = 0.0;
        let mut den2 = 0.0;
        for ((&k, a), _) in self.support.iter().zip(&au).zip(u) {
            let b = self.incident(dir, k);
            num2 += (a - b).norm_sqr();
            den2 += b.norm_sqr();
        }
        if den2 == 0.0 {
            0.0
        } else {
            (num2 / den2).sqrt()
        }
    }

    /// Extend a support solution to the whole grid.
    pub fn total_field(&self, u: &[C], dir: [f64; 2]) -> TotalField {
        let scattered: Vec<C> = if self.support.is_empty() {
            vec![C::new(0.0, 0.0); self.grid.len()]
        } else {
            self.potential_convolution(u).into_iter().map(|v| -v).collect()
        };
        let total = scattered.iter().enumerate().map(|(k, s)| self.incident(dir, k) + s).collect();
        TotalField { lambda: self.lambda, direction: dir, grid: self.grid, total, scattered }
    }

    /// Far-field amplitudes `a(theta_i, omega)` from a support solution.
    pub fn amplitudes(&self, u: &[C], theta: &AngularGrid) -> Vec<C> {
        let h = self.grid.spacing();
        let side = self.grid.side();
        let coef = -far_field_coefficient(self.lambda) * (h * h);
        let mut by_row: Vec<Vec<(usize, C)>> = vec![Vec::new(); side];
        for (&k, &uk) in self.support.iter().zip(u) {
            by_row[k / side].push((k % side, uk * self.q[k]));
        }
        (0..theta.size())
            .map(|i| {
                let d = theta.direction(i);
                let ex: Vec<C> =
                    (0..side).map(|c| C::from_polar(1.0, -self.lambda * d[0] * self.grid.coord(c))).collect();
                let mut acc = C::new(0.0, 0.0);
                for (r, row) in by_row.iter().enumerate() {
                    if row.is_empty() {
                        continue;
                    }
                    let s: C = row.iter().map(|&(c, v)| ex[c] * v).sum();
                    acc += s * C::from_polar(1.0, -self.lambda * d[1] * self.grid.coord(r));
                }
                acc * coef
            })
            .collect()
    }

    /// Field value and radial derivative at points off the support, from the
    /// integral representation.
    pub fn field_and_radial_derivative(&self, u: &[C], dir: [f64; 2], points: &[[f64; 2]]) -> Vec<(C, C)> {
        let h2 = self.grid.spacing().powi(2);
        let sources: Vec<([f64; 2], C)> =
            self.support.iter().zip(u).map(|(&k, &uk)| (self.grid.node(k), uk * self.q[k] * h2)).collect();
        let lambda = self.lambda;
        points
            .par_iter()
            .map(|&x| {
                let r = x[0].hypot(x[1]);
                let xhat = if r > 0.0 { [x[0] / r, x[1] / r] } else { [0.0, 0.0] };
                let inc = C::from_polar(1.0, lambda * (dir[0] * x[0] + dir[1] * x[1]));
                let dinc = inc * C::new(0.0, lambda * (dir[0] * xhat[0] + dir[1] * xhat[1]));
                let mut val = C::new(0.0, 0.0);
                let mut der = C::new(0.0, 0.0);
                for &(y, s) in &sources {
                    let d = [x[0] - y[0], x[1] - y[1]];
                    let dist = d[0].hypot(d[1]);
                    let [j0, j1, y0, y1] = specfun::bessel_01(lambda * dist);
                    let g = C::new(0.0, 0.25) * C::new(j0, y0);
                    let dg = C::new(0.0, -0.25 * lambda) * C::new(j1, y1) * ((d[0] * xhat[0] + d[1] * xhat[1]) / dist);
                    val += g * s;
                    der += dg * s;
                }
                (inc - val, dinc - der)
            })
            .collect()
    }
}

/// Total field of one plane-wave scattering problem on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalField {
    pub lambda: f64,
    pub direction: [f64; 2],
    pub grid: CartesianGrid,
    pub total: Vec<C>,
    pub scattered: Vec<C>,
}

impl TotalField {
    /// `L^2` norm of the scattered field over the disk of radius `radius`.
    pub fn scattered_l2(&self, radius: f64) -> f64 {
        let h = self.grid.spacing();
        let s: f64 = self
            .scattered
            .iter()
            .enumerate()
            .filter(|(k, _)| {
                let [x, y] = self.grid.node(*k);
                x.hypot(y) <= radius
            })
            .map(|(_, v)| v.norm_sqr())
            .sum();
        (s * h * h).sqrt()
    }
}

/// Solve the scattering problem for a plane wave incident along angle `omega`.
pub fn solve_ls(q: &GridPotential, lambda: f64, omega: f64) -> Result<TotalField> {
    let op = LsOperator::new(q, lambda)?;
    let dir = [omega.cos(), omega.sin()];
    let u = op.solve(dir)?;
    Ok(op.total_field(&u, dir))
}

/// Scattering amplitudes on an angular product grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FarField {
    pub lambda: f64,
    pub theta: AngularGrid,
    pub omega: AngularGrid,
    /// Row-major: `values[i * omega.size() + j] = a(theta_i, omega_j)`.
    pub values: Vec<C>,
}

impl FarField {
    pub fn zeros(lambda: f64, theta: AngularGrid, omega: AngularGrid) -> Self {
        FarField { lambda, theta, omega, values: vec![C::new(0.0, 0.0); theta.size() * omega.size()] }
    }

    pub fn get(&self, i: usize, j: usize) -> C {
        self.values[i * self.omega.size() + j]
    }

    /// `sum_ij w_i w_j |a_ij|^2`, the discrete `L^2(S x S)` norm squared.
    pub fn l2_norm_sq(&self) -> f64 {
        let w = self.theta.weight() * self.omega.weight();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * w
    }

    /// Entrywise difference; both fields must share grids and frequency.
    pub fn difference(&self, other: &FarField) -> Result<FarField> {
        if self.theta != other.theta || self.omega != other.omega || self.lambda != other.lambda {
            return Err(Error::GridMismatch("far fields on different grids or frequencies".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(FarField { values, ..self.clone() })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest deviation from depending on `theta - omega` only.
    pub fn rotation_defect(&self) -> Result<f64> {
        let n = self.theta.size();
        if self.omega.size() != n {
            return Err(Error::GridMismatch("rotation check needs equal grids".into()));
        }
        let mut worst = 0.0f64;
        for d in 0..n {
            let reference = self.get(d, 0);
            for j in 1..n {
                worst = worst.max((self.get((d + j) % n, j) - reference).norm());
            }
        }
        Ok(worst)
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["lambda", "theta", "omega", "re_a", "im_a"]);
        for i in 0..self.theta.size() {
            for j in 0..self.omega.size() {
                let a = self.get(i, j);
                t.push_numbers(&[self.lambda, self.theta.angle(i), self.omega.angle(j), a.re, a.im]);
            }
        }
        t
    }
}

/// Solve every incident direction of `omega` with a prepared operator.
pub fn solve_directions(op: &LsOperator, omega: &AngularGrid) -> Result<Vec<Vec<C>>> {
    (0..omega.size()).into_par_iter().map(|j| op.solve(omega.direction(j))).collect()
}

/// Far field from prepared solutions.
pub fn far_field_from_solutions(op: &LsOperator, solutions: &[Vec<C>], theta: &AngularGrid, omega: &AngularGrid) -> FarField {
    let columns: Vec<Vec<C>> = solutions.par_iter().map(|u| op.amplitudes(u, theta)).collect();
    let mut ff = FarField::zeros(op.lambda(), *theta, *omega);
    for (j, col) in columns.iter().enumerate() {
        for (i, &a) in col.iter().enumerate() {
            ff.values[i * omega.size() + j] = a;
        }
    }
    ff
}

/// Scattering amplitudes `a(theta_i, omega_j)` by quadrature of the solved fields.
pub fn far_field(q: &GridPotential, lambda: f64, theta: &AngularGrid, omega: &AngularGrid) -> Result<FarField> {
    let op = LsOperator::new(q, lambda)?;
    if q.is_zero() {
        return Ok(FarField::zeros(lambda, *theta, *omega));
    }
    let sols = solve_directions(&op, omega)?;
    Ok(far_field_from_solutions(&op, &sols, theta, omega))
}

/// Born approximation `-c(lambda) q^(lambda (theta - omega))` for direction angles.
pub fn born_far_field(q: &Potential, lambda: f64, theta: f64, omega: f64) -> Result<C> {
    let xi = [lambda * (theta.cos() - omega.cos()), lambda * (theta.sin() - omega.sin())];
    let f = fourier_oracle(q, &[xi])?;
    Ok(-far_field_coefficient(lambda) * f.values[0])
}

/// Born approximation on a product grid.
pub fn born_far_field_grid(q: &Potential, lambda: f64, theta: &AngularGrid, omega: &AngularGrid) -> Result<FarField> {
    let mut xis = Vec::with_capacity(theta.size() * omega.size());
    for i in 0..theta.size() {
        let t = theta.direction(i);
        for j in 0..omega.size() {
            let o = omega.direction(j);
            xis.push([lambda * (t[0] - o[0]), lambda * (t[1] - o[1])]);
        }
    }
    let chunks: Vec<Vec<C>> = xis
        .par_chunks(256)
        .map(|c| fourier_oracle(q, c).map(|f| f.values))
        .collect::<Result<Vec<_>>>()?;
    let c = -far_field_coefficient(lambda);
    let values = chunks.into_iter().flatten().map(|v| c * v).collect();
    Ok(FarField { lambda, theta: *theta, omega: *omega, values })
}

/// Discretized scattering matrix `S = I + (lambda i / 2 pi)^{1/2} A diag(w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringMatrixGrid {
    pub lambda: f64,
    pub size: usize,
    pub matrix: Vec<C>,
}

pub fn scattering_matrix(ff: &FarField) -> Result<ScatteringMatrixGrid> {
    if ff.theta != ff.omega {
        return Err(Error::GridMismatch(format!(
            "scattering matrix needs equal grids, got {} and {}",
            ff.theta.size(),
            ff.omega.size()
        )));
    }
    let n = ff.theta.size();
    let f = scattering_matrix_factor(ff.lambda) * ff.omega.weight();
    let mut matrix: Vec<C> = ff.values.iter().map(|a| a * f).collect();
    for i in 0..n {
        matrix[i * n + i] += 1.0;
    }
    Ok(ScatteringMatrixGrid { lambda: ff.lambda, size: n, matrix })
}

impl ScatteringMatrixGrid {
    pub fn get(&self, i: usize, j: usize) -> C {
        self.matrix[i * self.size + j]
    }

    /// `max |S* S - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.size;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut acc: C = (0..n).map(|k| self.get(k, i).conj() * self.get(k, j)).sum();
                if i == j {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    /// `max |S^T - P S P|` with `P` the antipodal permutation.
    pub fn reciprocity_defect(&self) -> f64 {
        let n = self.size;
        let p = |i: usize| (i + n / 2) % n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.get(j, i) - self.get(p(i), p(j))).norm());
            }
        }
        worst
    }
}

/// Exterior mode coefficients `s_n`, `n = 0..=n_max`, for `q0` on the disk of
/// radius `a`; the scattered field is `sum_n i^n s_n H_n(lambda r) e^{i n psi}`.
pub fn partial_wave_coefficients(q0: f64, a: f64, lambda: f64) -> Result<Vec<C>> {
    if !(lambda * lambda > q0) {
        return Err(Error::Domain(format!("partial waves need lambda^2 > q0, got lambda = {lambda}, q0 = {q0}")));
    }
    if !(a > 0.0) {
        return Err(Error::Domain(format!("radius a = {a} must be positive")));
    }
    let kappa = (lambda * lambda - q0).sqrt();
    let la = lambda * a;
    let n_max = (la + 8.0 * la.cbrt() + 20.0).ceil() as usize;
    if q0 == 0.0 {
        return Ok(vec![C::new(0.0, 0.0); n_max + 1]);
    }
    let jk = specfun::bessel_j_seq(n_max + 1, kappa * a)?;
    let jl = specfun::bessel_j_seq(n_max + 1, la)?;
    let yl = specfun::bessel_y_seq(n_max + 1, la)?;
    let deriv = |v: &[f64], n: usize| if n == 0 { -v[1] } else { 0.5 * (v[n - 1] - v[n + 1]) };
    Ok((0..=n_max)
        .map(|n| {
            let (jkn, djk) = (jk[n], deriv(&jk, n));
            let (jln, djl) = (jl[n], deriv(&jl, n));
            let hn = C::new(jl[n], yl[n]);
            let dh = C::new(djl, deriv(&yl, n));
            let num = kappa * djk * jln - lambda * jkn * djl;
            let den = hn * (kappa * djk) - dh * (lambda * jkn);
            -num / den
        })
        .collect())
}

/// Exact far field of the homogeneous disk by mode matching.
pub fn partial_wave_oracle(q0: f64, a: f64, lambda: f64, theta: &AngularGrid, omega: &AngularGrid) -> Result<FarField> {
    let s = partial_wave_coefficients(q0, a, lambda)?;
    let pref = C::from_polar((2.0 / (PI * lambda)).sqrt(), -FRAC_PI_4);
    let mut ff = FarField::zeros(lambda, *theta, *omega);
    for i in 0..theta.size() {
        for j in 0..omega.size() {
            let psi = theta.angle(i) - omega.angle(j);
            let mut acc = s[0];
            for (n, sn) in s.iter().enumerate().skip(1) {
                acc += sn * (2.0 * (n as f64 * psi).cos());
            }
            ff.values[i * omega.size() + j] = pref * acc;
        }
    }
    Ok(ff)
}

/// Exact total field inside the homogeneous disk at `x` for incidence angle `omega`.
pub fn partial_wave_interior_field(q0: f64, a: f64, lambda: f64, omega: f64, x: [f64; 2]) -> Result<C> {
    let s = partial_wave_coefficients(q0, a, lambda)?;
    let kappa = (lambda * lambda - q0).sqrt();
    let r = x[0].hypot(x[1]);
    if r > a {
        return Err(Error::Domain(format!("point at radius {r} is outside the disk of radius {a}")));
    }
    let psi = x[1].atan2(x[0]) - omega;
    let n_max = s.len() - 1;
    let jl = specfun::bessel_j_seq(n_max, lambda * a)?;
    let yl = specfun::bessel_y_seq(n_max, lambda * a)?;
    let jka = specfun::bessel_j_seq(n_max, kappa * a)?;
    let jkr = specfun::bessel_j_seq(n_max, kappa * r)?;
    let mut acc = C::new(0.0, 0.0);
    for n in 0..=n_max {
        let cn = (C::new(jl[n], 0.0) + s[n] * C::new(jl[n], yl[n])) / jka[n];
        let term = C::new(0.0, 1.0).powu(n as u32) * cn * jkr[n];
        acc += if n == 0 { term } else { term * (2.0 * (n as f64 * psi).cos()) };
    }
    Ok(acc)
}

/// Both sides of the far-field integral identity for Herglotz densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub lhs: C,
    pub rhs: C,
    pub residual: f64,
}

/// `int (q1 - q2) u1 u2 dx` against `-(1/c) int g2(-theta) ((A1 - A2) g1)(theta) d theta`,
/// where `u_j` is the Herglotz superposition of the solved fields of `q_j`.
pub fn integral_identity_check(
    q1: &GridPotential,
    q2: &GridPotential,
    lambda: f64,
    dirs: &AngularGrid,
    g1: &[C],
    g2: &[C],
) -> Result<IdentityCheck> {
    if q1.grid() != q2.grid() {
        return Err(Error::GridMismatch("identity check needs a shared Cartesian grid".into()));
    }
    if g1.len() != dirs.size() || g2.len() != dirs.size() {
        return Err(Error::Mismatch("densities must live on the direction grid".into()));
    }
    let op1 = LsOperator::new(q1, lambda)?;
    let op2 = LsOperator::new(q2, lambda)?;
    let w = dirs.weight();
    let herglotz = |op: &LsOperator, g: &[C]| -> Result<(Vec<C>, FarField)> {
        let sols = solve_directions(op, dirs)?;
        let mut acc = vec![C::new(0.0, 0.0); op.grid().len()];
        for (j, u) in sols.iter().enumerate() {
            let field = op.total_field(u, dirs.direction(j));
            for (a, t) in acc.iter_mut().zip(&field.total) {
                *a += t * g[j] * w;
            }
        }
        Ok((acc, far_field_from_solutions(op, &sols, dirs, dirs)))
    };
    let (u1, a1) = herglotz(&op1, g1)?;
    let (u2, a2) = herglotz(&op2, g2)?;
    let h = q1.grid().spacing();
    let lhs: C = q1
        .values()
        .iter()
        .zip(q2.values())
        .zip(u1.iter().zip(&u2))
        .map(|((a, b), (x, y))| x * y * (a - b))
        .sum::<C>()
        * (h * h);
    let n = dirs.size();
    let mut pairing = C::new(0.0, 0.0);
    for i in 0..n {
        let mut ag = C::new(0.0, 0.0);
        for j in 0..n {
            ag += (a1.get(i, j) - a2.get(i, j)) * g1[j] * w;
        }
        pairing += g2[dirs.negated(i)] * ag * w;
    }
    let rhs = -pairing / far_field_coefficient(lambda);
    Ok(IdentityCheck { lhs, rhs, residual: (lhs - rhs).norm() })
}

/// Records of a far field as CSV rows with a leading label column.
pub fn far_field_rows(label: &str, ff: &FarField) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for i in 0..ff.theta.size() {
        for j in 0..ff.omega.size() {
            let a = ff.get(i, j);
            rows.push(vec![
                label.to_string(),
                num(ff.lambda),
                num(ff.theta.angle(i)),
                num(ff.omega.angle(j)),
                num(a.re),
                num(a.im),
            ]);
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{bump, piecewise_constant, RadialProfile};

    fn disk_grid(side: usize, q0: f64, a: f64) -> GridPotential {
        let grid = CartesianGrid::with_side(side, a).unwrap();
        GridPotential::from_profile(&piecewise_constant(q0, a).unwrap(), grid).unwrap()
    }

    #[test]
    fn self_cell_matches_fine_quadrature() {
        // the cell integral minus the log singularity is smooth; compare with a
        // fine midpoint rule on the punctured cell plus the analytic log part
        let (lambda, h) = (4.0, 0.05);
        let exact = self_cell_integral(lambda, h);
        let n = 400;
        let d = h / n as f64;
        let mut acc = C::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let x = -0.5 * h + (i as f64 + 0.5) * d;
                let y = -0.5 * h + (j as f64 + 0.5) * d;
                acc += specfun::green_kernel(lambda, x.hypot(y)) * d * d;
            }
        }
        assert!((acc - exact).norm() / exact.norm() < 1e-4);
    }

    #[test]
    fn zero_potential_gives_plane_wave() {
        let q = disk_grid(21, 0.0, 0.5);
        let f = solve_ls(&q, 4.0, 0.3).unwrap();
        assert!(f.scattered.iter().all(|v| v.norm() == 0.0));
        let dirs = AngularGrid::new(8).unwrap();
        assert_eq!(far_field(&q, 4.0, &dirs, &dirs).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn rejects_coarse_grid() {
        let q = disk_grid(11, 1.0, 0.5);
        assert!(matches!(LsOperator::new(&q, 40.0), Err(Error::Resolution { .. })));
    }

    #[test]
    fn dense_and_iterative_paths_agree() {
        let q = disk_grid(41, 1.0, 0.5);
        let op = LsOperator::new(&q, 4.0).unwrap();
        assert!(op.dense.is_some());
        let dir = [0.6, 0.8];
        let ud = op.solve(dir).unwrap();
        let rhs: Vec<C> = op.support().iter().map(|&k| op.incident(dir, k)).collect();
        let ug = gmres(|w| op.apply(w), &rhs, 1e-13, 40, 500).unwrap().x;
        for (a, b) in ud.iter().zip(&ug) {
            assert!((a - b).norm() < 1e-10);
        }
        assert!(op.residual(&ud, dir) < 1e-10);
    }

    #[test]
    fn field_at_origin_matches_partial_waves() {
        let q = disk_grid(101, 1.0, 0.5);
        let f = solve_ls(&q, 4.0, 0.0).unwrap();
        let centre = f.total[(101 * 101) / 2];
        let exact = partial_wave_interior_field(1.0, 0.5, 4.0, 0.0, [0.0, 0.0]).unwrap();
        assert!((centre - exact).norm() / exact.norm() < 1e-3);
    }

    #[test]
    fn partial_wave_modes_are_unitary() {
        let s = partial_wave_coefficients(3.0, 0.5, 6.0).unwrap();
        for sn in &s {
            assert!(((C::new(1.0, 0.0) + sn * 2.0).norm() - 1.0).abs() < 1e-12);
        }
        assert!(partial_wave_coefficients(0.0, 0.5, 6.0).unwrap().iter().all(|v| v.norm() == 0.0));
        assert!(partial_wave_coefficients(40.0, 0.5, 6.0).is_err());
    }

    #[test]
    fn optical_theorem_for_partial_waves() {
        // forward amplitude and total cross section from the same modes
        let lambda = 5.0;
        let s = partial_wave_coefficients(2.0, 0.4, lambda).unwrap();
        let dirs = AngularGrid::new(64).unwrap();
        let ff = partial_wave_oracle(2.0, 0.4, lambda, &dirs, &dirs).unwrap();
        let forward = ff.get(0, 0);
        let total: f64 = (0..64).map(|i| ff.get(i, 0).norm_sqr()).sum::<f64>() * dirs.weight();
        // unitarity of S in the forward direction: 2 Re(f a(w, w)) = -|f|^2 int |a|^2 with f = (lambda i/2pi)^{1/2}
        let f = scattering_matrix_factor(lambda);
        let lhs = 2.0 * (f * forward).re;
        let rhs = -f.norm_sqr() * total;
        assert!((lhs - rhs).abs() < 1e-8 * rhs.abs());
        let modes: f64 = s.iter().enumerate().map(|(n, v)| if n == 0 { v.norm_sqr() } else { 2.0 * v.norm_sqr() }).sum();
        assert!((total - 4.0 / lambda * modes).abs() < 1e-8 * total);
    }

    #[test]
    fn scattering_matrix_of_zero_is_identity() {
        let dirs = AngularGrid::new(16).unwrap();
        let s = scattering_matrix(&FarField::zeros(3.0, dirs, dirs)).unwrap();
        assert_eq!(s.unitarity_defect(), 0.0);
        let other = AngularGrid::new(8).unwrap();
        assert!(matches!(scattering_matrix(&FarField::zeros(3.0, dirs, other)), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn partial_wave_scattering_matrix_is_unitary() {
        let dirs = AngularGrid::new(64).unwrap();
        let ff = partial_wave_oracle(1.0, 0.5, 4.0, &dirs, &dirs).unwrap();
        let s = scattering_matrix(&ff).unwrap();
        assert!(s.unitarity_defect() < 1e-12);
        assert!(s.reciprocity_defect() < 1e-12);
    }

    #[test]
    fn radial_far_field_is_rotation_invariant_and_reciprocal() {
        let q = disk_grid(121, 1.0, 0.5);
        let dirs = AngularGrid::new(16).unwrap();
        let ff = far_field(&q, 4.0, &dirs, &dirs).unwrap();
        assert!(ff.rotation_defect().unwrap() <= 1e-6);
        let s = scattering_matrix(&ff).unwrap();
        assert!(s.reciprocity_defect() < 1e-9);
    }

    #[test]
    fn born_forward_direction() {
        let p = bump(0.2, 0.0, 0.5).unwrap();
        let q = Potential::Radial(p.clone());
        let b = born_far_field(&q, 7.0, 0.4, 0.4).unwrap();
        let mass = 2.0 * PI * p.radial_moment();
        assert!((b - (-far_field_coefficient(7.0) * mass)).norm() < 1e-12);
        assert_eq!(born_far_field(&Potential::Radial(RadialProfile::zero()), 7.0, 0.1, 1.0).unwrap(), C::new(0.0, 0.0));
    }

    #[test]
    fn born_agrees_for_weak_potential() {
        let lambda = 10.0;
        let p = bump(0.05, 0.0, 0.5).unwrap();
        let grid = CartesianGrid::resolving(lambda, 12.0, 0.5).unwrap();
        let q = GridPotential::from_profile(&p, grid).unwrap();
        let dirs = AngularGrid::new(16).unwrap();
        let ff = far_field(&q, lambda, &dirs, &dirs).unwrap();
        let born = born_far_field_grid(&Potential::Radial(p.clone()), lambda, &dirs, &dirs).unwrap();
        let bound = 3.0 * lambda.powf(-1.5) * p.l2_norm().powi(2);
        assert!(ff.difference(&born).unwrap().max_abs() <= bound);
    }

    #[test]
    fn integral_identity_trivial_and_weak() {
        let lambda = 5.0;
        let grid = CartesianGrid::resolving(lambda, 12.0, 0.5).unwrap();
        let p = GridPotential::from_profile(&bump(0.3, 0.0, 0.5).unwrap(), grid).unwrap();
        let zero = GridPotential::from_profile(&RadialProfile::zero(), grid).unwrap();
        let dirs = AngularGrid::new(16).unwrap();
        let ones = vec![C::new(1.0, 0.0); 16];
        let same = integral_identity_check(&p, &p, lambda, &dirs, &ones, &ones).unwrap();
        assert!(same.residual <= 1e-8);
        let weak = integral_identity_check(&p, &zero, lambda, &dirs, &ones, &ones).unwrap();
        assert!(weak.residual <= 1e-4 * (weak.lhs.norm() + weak.rhs.norm()));
    }
}
