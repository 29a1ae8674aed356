//! Bessel, Hankel and derived special functions of integer order and real
//! argument.
//!
//! `J_n` is evaluated by its power series where the series is free of
//! cancellation (`x <= 5` or `x^2 <= 4(n+1)`) and by Miller's backward
//! recurrence otherwise. `Y_0`, `Y_1` come from the Neumann series over the
//! same backward sweep, higher orders of `Y` from forward recurrence. All
//! evaluation paths can carry a separate log-scale so that very small values
//! (large order, small argument) stay representable.
//!
//! Debye asymptotics are provided as cross-checks only; they never feed the
//! primary evaluation path.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest accepted `|n|`.
pub const MAX_ORDER: i64 = 1_000_000;
/// Largest accepted argument.
pub const MAX_ARGUMENT: f64 = 1.0e6;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE: f64 = 1.0e200;

/// A real number stored as `mantissa * exp(ln_scale)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub ln_scale: f64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled { mantissa: 0.0, ln_scale: 0.0 };

    pub fn new(value: f64) -> Self {
        Scaled { mantissa: value, ln_scale: 0.0 }
    }

    /// The represented value; underflows to zero and overflows to infinity.
    pub fn value(self) -> f64 {
        if self.mantissa == 0.0 {
            return 0.0;
        }
        self.mantissa.signum() * (self.mantissa.abs().ln() + self.ln_scale).exp()
    }

    /// `ln |value|` (negative infinity for an exact zero).
    pub fn ln_abs(self) -> f64 {
        self.mantissa.abs().ln() + self.ln_scale
    }

    /// Re-express in the scale `ln_scale` (mantissa may underflow).
    pub fn rescaled_to(self, ln_scale: f64) -> f64 {
        if self.mantissa == 0.0 {
            return 0.0;
        }
        self.mantissa * (self.ln_scale - ln_scale).exp()
    }

    fn neg(self) -> Self {
        Scaled { mantissa: -self.mantissa, ln_scale: self.ln_scale }
    }
}

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(257);
        t.push(0.0);
        let mut acc = 0.0;
        for k in 1..=256u32 {
            acc += f64::from(k).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln(n!)`, exact summation below 257 and Stirling's series above.
pub fn ln_factorial(n: u64) -> f64 {
    let table = ln_factorial_table();
    if (n as usize) < table.len() {
        return table[n as usize];
    }
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    x * x.ln() - x + 0.5 * (2.0 * PI * x).ln() + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

fn check_order(n: i64) -> Result<()> {
    if n.abs() > MAX_ORDER {
        return Err(Error::OutOfRange(format!("|n| = {} exceeds {}", n.abs(), MAX_ORDER)));
    }
    Ok(())
}

fn check_argument(x: f64, allow_zero: bool) -> Result<()> {
    if !x.is_finite() || x > MAX_ARGUMENT {
        return Err(Error::OutOfRange(format!("x = {x} outside [0, {MAX_ARGUMENT}]")));
    }
    if x < 0.0 || (!allow_zero && x == 0.0) {
        return Err(Error::Domain(format!(
            "x = {x} lies on the branch cut (-inf, 0]"
        )));
    }
    Ok(())
}

fn parity_sign(n: i64) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn use_series(m: u64, x: f64) -> bool {
    x <= 5.0 || x * x <= 4.0 * (m as f64 + 1.0)
}

/// Power series for `J_m(x)`, leading factor kept in log form.
fn j_series_scaled(m: u64, x: f64) -> Scaled {
    if x == 0.0 {
        return if m == 0 { Scaled::new(1.0) } else { Scaled::ZERO };
    }
    let half = 0.5 * x;
    let q = -half * half;
    let mf = m as f64;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= q / (k * (mf + k));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k > 2.0 {
            break;
        }
        k += 1.0;
        if k > 2000.0 {
            break;
        }
    }
    Scaled { mantissa: sum, ln_scale: mf * half.ln() - ln_factorial(m) }
}

fn miller_start(top: usize) -> usize {
    let mut start = top + 20 + (40.0 * top.max(1) as f64).sqrt() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    start
}

/// Miller backward recurrence for `J_0..=J_nmax` at `x > 0`.
fn miller_scaled(nmax: usize, x: f64) -> Vec<Scaled> {
    let start = miller_start(nmax.max(x.ceil() as usize));
    let mut out_m = vec![0.0; nmax + 1];
    let mut out_c = vec![0i32; nmax + 1];
    let mut c = 0i32;
    let mut jp1 = 0.0;
    let mut jk = 1.0;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        if k <= nmax {
            out_m[k] = jk;
            out_c[k] = c;
        }
        if k % 2 == 0 {
            norm += 2.0 * jk;
        }
        let jm1 = (2.0 * k as f64 / x) * jk - jp1;
        jp1 = jk;
        jk = jm1;
        if jk.abs() > RESCALE {
            jk /= RESCALE;
            jp1 /= RESCALE;
            norm /= RESCALE;
            c += 1;
        }
    }
    out_m[0] = jk;
    out_c[0] = c;
    norm += jk;
    let ln_big = RESCALE.ln();
    out_m
        .iter()
        .zip(&out_c)
        .map(|(&m, &ck)| Scaled { mantissa: m / norm, ln_scale: -f64::from(c - ck) * ln_big })
        .collect()
}

/// `(J_0, J_1, Y_0, Y_1)` at `x > 0` from one backward sweep and the
/// Neumann series for the second kind.
fn miller_neumann(x: f64) -> [f64; 4] {
    let start = miller_start(x.ceil() as usize);
    let sign = |h: usize| if h % 2 == 0 { 1.0 } else { -1.0 };
    let mut jp1 = 0.0;
    let mut jk = 1.0;
    let mut norm = 0.0;
    let mut a = 0.0;
    let mut b = 0.0;
    for k in (1..=start).rev() {
        if k % 2 == 0 {
            let h = k / 2;
            norm += 2.0 * jk;
            a += sign(h) * jk / h as f64;
        } else {
            let hp = (k + 1) / 2;
            b += sign(hp) * jk / hp as f64;
            if k >= 3 {
                let hm = (k - 1) / 2;
                b -= sign(hm) * jk / hm as f64;
            }
        }
        let jm1 = (2.0 * k as f64 / x) * jk - jp1;
        jp1 = jk;
        jk = jm1;
        if jk.abs() > RESCALE {
            jk /= RESCALE;
            jp1 /= RESCALE;
            norm /= RESCALE;
            a /= RESCALE;
            b /= RESCALE;
        }
    }
    norm += jk;
    let j0 = jk / norm;
    let j1 = jp1 / norm;
    let a = a / norm;
    let b = b / norm;
    let l = (0.5 * x).ln() + EULER_GAMMA;
    let y0 = (2.0 / PI) * l * j0 - (4.0 / PI) * a;
    let y1 = (2.0 / PI) * (l * j1 - j0 / x) + (2.0 / PI) * b;
    [j0, j1, y0, y1]
}

fn j_scaled_nonneg(m: u64, x: f64) -> Scaled {
    if use_series(m, x) {
        j_series_scaled(m, x)
    } else {
        miller_scaled(m as usize, x)[m as usize]
    }
}

/// `J_n(x)` with a separate log-scale.
pub fn bessel_j_scaled(n: i64, x: f64) -> Result<Scaled> {
    check_order(n)?;
    check_argument(x, true)?;
    let v = j_scaled_nonneg(n.unsigned_abs(), x);
    Ok(if n < 0 && parity_sign(n) < 0.0 { v.neg() } else { v })
}

/// `(J_m(x), J_{m+1}(x))` for `m >= 0`, each with its own log-scale.
pub fn bessel_j_pair_scaled(m: u64, x: f64) -> Result<(Scaled, Scaled)> {
    check_order(m as i64 + 1)?;
    check_argument(x, true)?;
    if use_series(m + 1, x) && use_series(m, x) {
        Ok((j_series_scaled(m, x), j_series_scaled(m + 1, x)))
    } else {
        let seq = miller_scaled(m as usize + 1, x);
        Ok((seq[m as usize], seq[m as usize + 1]))
    }
}

/// Bessel function of the first kind `J_n(x)`, `x >= 0`.
pub fn bessel_j(n: i64, x: f64) -> Result<f64> {
    Ok(bessel_j_scaled(n, x)?.value())
}

/// `J_0(x), ..., J_nmax(x)`.
pub fn bessel_j_seq(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_order(nmax as i64)?;
    check_argument(x, true)?;
    if x == 0.0 {
        let mut v = vec![0.0; nmax + 1];
        v[0] = 1.0;
        return Ok(v);
    }
    Ok(miller_scaled(nmax, x).into_iter().map(Scaled::value).collect())
}

/// `dJ_n/dx` by `J_n' = (J_{n-1} - J_{n+1})/2` (`J_0' = -J_1`).
pub fn bessel_j_prime(n: i64, x: f64) -> Result<f64> {
    check_order(n)?;
    check_argument(x, true)?;
    let m = n.unsigned_abs();
    let d = if m == 0 {
        -j_scaled_nonneg(1, x).value()
    } else {
        0.5 * (j_scaled_nonneg(m - 1, x).value() - j_scaled_nonneg(m + 1, x).value())
    };
    Ok(if n < 0 { parity_sign(n) * d } else { d })
}

/// `J_m(x)` and `J_m'(x)` expressed in one common log-scale.
fn j_and_prime_common(m: u64, x: f64) -> Result<(f64, f64, f64)> {
    let (jm, jm1) = bessel_j_pair_scaled(m, x)?;
    let scale = if jm.mantissa != 0.0 { jm.ln_scale } else { jm1.ln_scale };
    let a = jm.rescaled_to(scale);
    let b = jm1.rescaled_to(scale);
    // J_m' = (m/x) J_m - J_{m+1}
    let d = if x == 0.0 {
        if m == 1 {
            0.5
        } else {
            0.0
        }
    } else {
        (m as f64 / x) * a - b
    };
    Ok((a, d, scale))
}

/// `J_0, J_1, Y_0, Y_1` at `x > 0`, unchecked. Hot path for kernel tables.
pub fn bessel_01(x: f64) -> [f64; 4] {
    miller_neumann(x)
}

/// `Y_0(x), ..., Y_nmax(x)`, `x > 0`.
pub fn bessel_y_seq(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_order(nmax as i64)?;
    check_argument(x, false)?;
    let [_, _, y0, y1] = miller_neumann(x);
    let mut y = Vec::with_capacity(nmax + 1);
    y.push(y0);
    if nmax >= 1 {
        y.push(y1);
    }
    for k in 1..nmax {
        let next = (2.0 * k as f64 / x) * y[k] - y[k - 1];
        if !next.is_finite() {
            return Err(Error::Overflow(format!("Y_{}({x}) overflows", k + 1)));
        }
        y.push(next);
    }
    Ok(y)
}

/// Bessel function of the second kind `Y_n(x)`, `x > 0`.
pub fn bessel_y(n: i64, x: f64) -> Result<f64> {
    check_order(n)?;
    let m = n.unsigned_abs() as usize;
    let y = bessel_y_seq(m, x)?[m];
    Ok(if n < 0 { parity_sign(n) * y } else { y })
}

/// `dY_n/dx`.
pub fn bessel_y_prime(n: i64, x: f64) -> Result<f64> {
    check_order(n)?;
    let m = n.unsigned_abs() as usize;
    let y = bessel_y_seq(m + 1, x)?;
    let d = if m == 0 { -y[1] } else { 0.5 * (y[m - 1] - y[m + 1]) };
    Ok(if n < 0 { parity_sign(n) * d } else { d })
}

/// Hankel function of the first kind `H^(1)_n(x) = J_n(x) + i Y_n(x)`.
pub fn hankel1(n: i64, x: f64) -> Result<Complex64> {
    let y = bessel_y(n, x)?;
    let j = bessel_j(n, x)?;
    Ok(Complex64::new(j, y))
}

/// Derivative of `H^(1)_n`.
pub fn hankel1_prime(n: i64, x: f64) -> Result<Complex64> {
    Ok(Complex64::new(bessel_j_prime(n, x)?, bessel_y_prime(n, x)?))
}

/// Leading large-argument term `(2/(pi x))^{1/2} exp(i(x - n pi/2 - pi/4))`.
pub fn hankel1_leading(n: i64, x: f64) -> Complex64 {
    let phase = x - n as f64 * 0.5 * PI - FRAC_PI_4;
    Complex64::from_polar((2.0 / (PI * x)).sqrt(), phase)
}

/// Outgoing free-space Green function of `-Delta - lambda^2` at distance `d`.
/// Unchecked; see [`green2d`].
pub fn green_kernel(lambda: f64, d: f64) -> Complex64 {
    let [j0, _, y0, _] = miller_neumann(lambda * d);
    Complex64::new(0.0, 0.25) * Complex64::new(j0, y0)
}

/// `G_lambda(x, y) = (i/4) H^(1)_0(lambda |x - y|)`, the outgoing kernel with
/// `(-Delta - lambda^2) G = delta`.
pub fn green2d(lambda: f64, x: [f64; 2], y: [f64; 2]) -> Result<Complex64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda = {lambda} must be positive")));
    }
    let d = (x[0] - y[0]).hypot(x[1] - y[1]);
    if d == 0.0 {
        return Err(Error::Domain("green2d is singular at x = y".into()));
    }
    check_argument(lambda * d, false)?;
    Ok(green_kernel(lambda, d))
}

/// Coefficient `c(lambda)` in `G_lambda(x, y) ~ c e^{i lambda |x-y|} |x-y|^{-1/2}`.
///
/// Equals `-(1/(2 i lambda)) (lambda/(2 pi i))^{1/2}` on the principal branch.
pub fn far_field_coefficient(lambda: f64) -> Complex64 {
    let two_i_lambda = Complex64::new(0.0, 2.0 * lambda);
    let root = principal_sqrt(Complex64::new(lambda, 0.0) / Complex64::new(0.0, 2.0 * PI));
    -(root / two_i_lambda)
}

/// Normalisation `(lambda i / (2 pi))^{1/2}` of the scattering matrix.
pub fn scattering_matrix_factor(lambda: f64) -> Complex64 {
    principal_sqrt(Complex64::new(0.0, lambda / (2.0 * PI)))
}

/// Principal square root, shared by every branch-dependent constant.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    z.sqrt()
}

/// Debye parameters `(n, alpha)` with `cosh(alpha) = n / x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DebyeParams {
    pub n: u64,
    pub alpha: f64,
}

impl DebyeParams {
    pub fn new(n: u64, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("Debye order must be >= 1".into()));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha = {alpha} must be positive")));
        }
        Ok(DebyeParams { n, alpha })
    }

    /// Parameters for `J_n(x)` with `x < n`.
    pub fn from_argument(n: u64, x: f64) -> Result<Self> {
        if !(x > 0.0) || x >= n as f64 {
            return Err(Error::Domain(format!("Debye needs 0 < x < n, got x = {x}, n = {n}")));
        }
        Self::new(n, (n as f64 / x).acosh())
    }

    /// `n sech(alpha)`.
    pub fn argument(&self) -> f64 {
        self.n as f64 / self.alpha.cosh()
    }

    /// Exponent `alpha - tanh(alpha)` of the geometric decay in `n`.
    pub fn decay_rate(&self) -> f64 {
        self.alpha - self.alpha.tanh()
    }

    fn check_regime(&self) -> Result<()> {
        if self.alpha < 0.1 {
            return Err(Error::DebyeRegime { alpha: self.alpha });
        }
        Ok(())
    }
}

/// Leading Debye approximation `e^{-n(alpha - tanh alpha)} / (2 pi n tanh alpha)^{1/2}`
/// of `J_n(n sech alpha)`.
pub fn debye_j(params: DebyeParams) -> Result<f64> {
    params.check_regime()?;
    let n = params.n as f64;
    let t = params.alpha.tanh();
    Ok((-n * params.decay_rate()).exp() / (2.0 * PI * n * t).sqrt())
}

/// Leading Debye approximation of `J_n'(n sech alpha)`:
/// `(sinh(2 alpha)/(4 pi n))^{1/2} e^{-n(alpha - tanh alpha)}`.
pub fn debye_j_prime(params: DebyeParams) -> Result<f64> {
    params.check_regime()?;
    let n = params.n as f64;
    let s = (2.0 * params.alpha).sinh();
    Ok((s / (4.0 * PI * n)).sqrt() * (-n * params.decay_rate()).exp())
}

/// `z_n(r, lambda)` with the natural log of its modulus kept separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinCoefficient {
    /// The value; may underflow to zero when `ln_abs` is very negative.
    pub value: Complex64,
    pub ln_abs: f64,
}

/// Scaled Robin denominator `lambda (J_m'(lambda) - i J_m(lambda))` as
/// `(mantissa, ln_scale)`.
fn robin_denominator(m: u64, lambda: f64) -> Result<(Complex64, f64)> {
    let (j, jp, scale) = j_and_prime_common(m, lambda)?;
    let d = Complex64::new(lambda * jp, -lambda * j);
    if d.norm() == 0.0 || !d.norm().is_finite() {
        return Err(Error::SingularSystem {
            detail: format!("Robin denominator vanished for n = {m}, lambda = {lambda}"),
            condition: f64::INFINITY,
        });
    }
    Ok((d, scale))
}

/// `z_n(r, lambda) = J_|n|(lambda r) / (lambda (J_|n|'(lambda) - i J_|n|(lambda)))`.
pub fn z_coeff(n: i64, r: f64, lambda: f64) -> Result<RobinCoefficient> {
    check_order(n)?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Domain(format!("r = {r} outside (0, 1]")));
    }
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda = {lambda} must be positive")));
    }
    let m = n.unsigned_abs();
    let num = j_scaled_nonneg(m, lambda * r);
    let (den, den_scale) = robin_denominator(m, lambda)?;
    Ok(scaled_ratio(num, den, den_scale))
}

/// `d z_n / dr = lambda J_|n|'(lambda r) / (lambda (J' - i J)(lambda))`.
pub fn z_coeff_dr(n: i64, r: f64, lambda: f64) -> Result<RobinCoefficient> {
    check_order(n)?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::Domain(format!("r = {r} outside (0, 1]")));
    }
    let m = n.unsigned_abs();
    let (_, jp, scale) = j_and_prime_common(m, lambda * r)?;
    let num = Scaled { mantissa: lambda * jp, ln_scale: scale };
    let (den, den_scale) = robin_denominator(m, lambda)?;
    Ok(scaled_ratio(num, den, den_scale))
}

fn scaled_ratio(num: Scaled, den: Complex64, den_scale: f64) -> RobinCoefficient {
    if num.mantissa == 0.0 {
        return RobinCoefficient { value: Complex64::new(0.0, 0.0), ln_abs: f64::NEG_INFINITY };
    }
    let ln_abs = num.ln_abs() - den.norm().ln() - den_scale;
    let phase = Complex64::new(num.mantissa.signum(), 0.0) * den.conj() / den.norm();
    RobinCoefficient { value: phase * ln_abs.exp(), ln_abs }
}

/// Log-scaled pair `(J_m(x), J_m'(x))` sharing one scale, used by the radial solver.
pub fn bessel_j_and_prime_scaled(m: u64, x: f64) -> Result<(f64, f64, f64)> {
    j_and_prime_common(m, x)
}
