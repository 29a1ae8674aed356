//! Grids, quadrature rules, potentials and the direct-quadrature transform
//! oracles that every experiment compares against.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Split `[lo, hi]` at the given breakpoints and then into pieces no wider
/// than `max_width`.
pub fn panels(lo: f64, hi: f64, breakpoints: &[f64], max_width: f64) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&b| b > lo && b < hi).collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 0.0 {
            continue;
        }
        let pieces = ((b - a) / max_width).ceil().max(1.0) as usize;
        let step = (b - a) / pieces as f64;
        for k in 0..pieces {
            let pa = a + step * k as f64;
            let pb = if k + 1 == pieces { b } else { a + step * (k + 1) as f64 };
            out.push((pa, pb));
        }
    }
    out
}

/// Uniform grid of `size` directions on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngularGrid {
    size: usize,
}

impl AngularGrid {
    pub fn new(size: usize) -> Result<Self> {
        if size < 8 || size % 2 != 0 {
            return Err(Error::Domain(format!("angular grid size {size} must be even and >= 8")));
        }
        Ok(AngularGrid { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn angle(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.size as f64
    }

    /// Unit vector at node `i`, built from an exact trigonometric table so
    /// that negated nodes are exact negations.
    pub fn direction(&self, i: usize) -> [f64; 2] {
        let (c, s) = exact_cos_sin(i, self.size);
        [c, s]
    }

    pub fn weight(&self) -> f64 {
        2.0 * PI / self.size as f64
    }

    /// Index of the node at angle `theta_i + pi`.
    pub fn negated(&self, i: usize) -> usize {
        (i + self.size / 2) % self.size
    }
}

/// `cos(2 pi m / n)`, `sin(2 pi m / n)`; for even `n` the values at `m` and
/// `m + n/2` are exact negations of each other.
pub fn exact_cos_sin(m: usize, n: usize) -> (f64, f64) {
    let m = m % n;
    if n % 2 == 0 && m >= n / 2 {
        let (c, s) = base_cos_sin(m - n / 2, n);
        return (-c, -s);
    }
    base_cos_sin(m, n)
}

fn base_cos_sin(m: usize, n: usize) -> (f64, f64) {
    if m == 0 {
        return (1.0, 0.0);
    }
    if 4 * m == n {
        return (0.0, 1.0);
    }
    if 8 * m == n {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        return (r, r);
    }
    let t = 2.0 * PI * m as f64 / n as f64;
    (t.cos(), t.sin())
}

/// Trapezoid-rule Fourier coefficients `c_k = int f e^{-i k theta} d theta`
/// for `|k| <= k_max`, returned in order `k = -k_max ..= k_max`.
pub fn angular_fourier_coeffs(grid: &AngularGrid, samples: &[Complex64], k_max: usize) -> Result<Vec<Complex64>> {
    let n = grid.size();
    if samples.len() != n {
        return Err(Error::Mismatch(format!("{} samples for a grid of size {n}", samples.len())));
    }
    if k_max + 1 > n / 2 {
        return Err(Error::Domain(format!("k_max = {k_max} aliases on a grid of size {n}")));
    }
    let table: Vec<(f64, f64)> = (0..n).map(|m| exact_cos_sin(m, n)).collect();
    let w = grid.weight();
    let mut out = Vec::with_capacity(2 * k_max + 1);
    for k in -(k_max as i64)..=(k_max as i64) {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &f) in samples.iter().enumerate() {
            let idx = ((k * j as i64).rem_euclid(n as i64)) as usize;
            let (c, s) = table[idx];
            acc += f * Complex64::new(c, -s);
        }
        out.push(acc * w);
    }
    Ok(out)
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson).
#[derive(Debug, Clone, PartialEq)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::InvalidPotential("sampled profile needs >= 2 matching nodes".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPotential("sample nodes must be strictly increasing".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("sample values must be finite".into()));
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                if delta[k - 1] * delta[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
                }
            }
            d[0] = pchip_end(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = pchip_end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Pchip { x, y, d })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    /// Interpolated value; zero outside the node range (no extrapolation).
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t < self.x[0] || t > self.x[n - 1] {
            return 0.0;
        }
        let k = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p if p >= n => n - 2,
            p => p - 1,
        };
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }
}

fn pchip_end(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

/// Building block of a radial profile `Q(r)`.
#[derive(Debug, Clone, PartialEq)]
pub enum RadialShape {
    /// `value` on `[lo, hi]`, zero elsewhere.
    Layer { lo: f64, hi: f64, value: f64 },
    /// `amplitude * exp(1 - 1/(1 - s^2))`, `s = (r - center)/halfwidth`.
    Bump { center: f64, halfwidth: f64, amplitude: f64 },
    /// Monotone cubic interpolation of samples, zero outside the sample range.
    Sampled(Pchip),
}

impl RadialShape {
    fn eval(&self, r: f64) -> f64 {
        match self {
            RadialShape::Layer { lo, hi, value } => {
                if r >= *lo && r <= *hi {
                    *value
                } else {
                    0.0
                }
            }
            RadialShape::Bump { center, halfwidth, amplitude } => bump_value(r, *center, *halfwidth, *amplitude),
            RadialShape::Sampled(p) => p.eval(r),
        }
    }

    fn interval(&self) -> (f64, f64) {
        match self {
            RadialShape::Layer { lo, hi, .. } => (*lo, *hi),
            RadialShape::Bump { center, halfwidth, .. } => ((center - halfwidth).max(0.0), center + halfwidth),
            RadialShape::Sampled(p) => (p.nodes()[0], *p.nodes().last().unwrap()),
        }
    }

    fn is_trivial(&self) -> bool {
        match self {
            RadialShape::Layer { lo, hi, value } => *value == 0.0 || hi <= lo,
            RadialShape::Bump { amplitude, .. } => *amplitude == 0.0,
            RadialShape::Sampled(p) => p.values().iter().all(|&v| v == 0.0),
        }
    }

    fn scaled(&self, t: f64) -> RadialShape {
        match self {
            RadialShape::Layer { lo, hi, value } => RadialShape::Layer { lo: *lo, hi: *hi, value: value * t },
            RadialShape::Bump { center, halfwidth, amplitude } => {
                RadialShape::Bump { center: *center, halfwidth: *halfwidth, amplitude: amplitude * t }
            }
            RadialShape::Sampled(p) => RadialShape::Sampled(Pchip {
                x: p.x.clone(),
                y: p.y.iter().map(|v| v * t).collect(),
                d: p.d.iter().map(|v| v * t).collect(),
            }),
        }
    }
}

/// Smooth compactly supported bump.
pub fn bump_value(r: f64, center: f64, halfwidth: f64, amplitude: f64) -> f64 {
    let s = (r - center) / halfwidth;
    if s.abs() >= 1.0 {
        return 0.0;
    }
    amplitude * (1.0 - 1.0 / (1.0 - s * s)).exp()
}

/// A real radial potential `q(x) = Q(|x|)` on the unit disk, given as a sum
/// of shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    shapes: Vec<RadialShape>,
    sup_norm: f64,
}

impl RadialProfile {
    pub fn new(shapes: Vec<RadialShape>) -> Result<Self> {
        let shapes: Vec<RadialShape> = shapes.into_iter().filter(|s| !s.is_trivial()).collect();
        for s in &shapes {
            let (lo, hi) = s.interval();
            let params_ok = match s {
                RadialShape::Layer { value, .. } => value.is_finite(),
                RadialShape::Bump { center, halfwidth, amplitude } => {
                    center.is_finite() && *halfwidth > 0.0 && amplitude.is_finite()
                }
                RadialShape::Sampled(_) => true,
            };
            if !params_ok || !(lo >= 0.0) || !(hi <= 1.0) || !(lo <= hi) {
                return Err(Error::InvalidPotential(format!(
                    "shape support [{lo}, {hi}] escapes [0, 1] or has invalid parameters"
                )));
            }
        }
        let mut profile = RadialProfile { shapes, sup_norm: 0.0 };
        profile.sup_norm = profile.sample_extremes().1;
        Ok(profile)
    }

    pub fn zero() -> Self {
        RadialProfile { shapes: Vec::new(), sup_norm: 0.0 }
    }

    pub fn shapes(&self) -> &[RadialShape] {
        &self.shapes
    }

    pub fn is_zero(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.shapes.iter().map(|s| s.eval(r)).sum()
    }

    /// Smallest interval `[lo, hi]` containing every shape's support
    /// (`(1, 1)` for the zero profile).
    pub fn support(&self) -> (f64, f64) {
        if self.shapes.is_empty() {
            return (1.0, 1.0);
        }
        self.shapes.iter().map(RadialShape::interval).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (lo, hi)| {
            (a.min(lo), b.max(hi))
        })
    }

    /// Points where the profile or one of its derivatives may jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = Vec::new();
        for s in &self.shapes {
            let (lo, hi) = s.interval();
            b.push(lo);
            b.push(hi);
            match s {
                RadialShape::Bump { center, .. } if *center > 0.0 => b.push(*center),
                RadialShape::Sampled(p) => b.extend_from_slice(p.nodes()),
                _ => {}
            }
        }
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Whether the profile contains jump discontinuities.
    pub fn has_layers(&self) -> bool {
        self.shapes.iter().any(|s| matches!(s, RadialShape::Layer { .. }))
    }

    /// `sup |Q|`.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// `inf Q` over the unit interval.
    pub fn min_value(&self) -> (f64, f64) {
        let mut best = (0.0, 0.0);
        for r in self.sample_points() {
            let v = self.eval(r);
            if v < best.0 {
                best = (v, r);
            }
        }
        best
    }

    fn sample_points(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = (0..=20_000).map(|k| k as f64 / 20_000.0).collect();
        for b in self.breakpoints() {
            pts.push(b);
            pts.push((b - 1e-13).max(0.0));
            pts.push((b + 1e-13).min(1.0));
        }
        for s in &self.shapes {
            let (lo, hi) = s.interval();
            for k in 0..=2000 {
                pts.push(lo + (hi - lo) * k as f64 / 2000.0);
            }
        }
        pts
    }

    fn sample_extremes(&self) -> (f64, f64) {
        let mut sup: f64 = 0.0;
        let mut min: f64 = 0.0;
        for r in self.sample_points() {
            let v = self.eval(r);
            sup = sup.max(v.abs());
            min = min.min(v);
        }
        (min, sup)
    }

    pub fn scaled(&self, t: f64) -> RadialProfile {
        RadialProfile {
            shapes: if t == 0.0 { Vec::new() } else { self.shapes.iter().map(|s| s.scaled(t)).collect() },
            sup_norm: self.sup_norm * t.abs(),
        }
    }

    /// `self - other`.
    pub fn difference(&self, other: &RadialProfile) -> RadialProfile {
        let mut shapes = self.shapes.clone();
        shapes.extend(other.shapes.iter().map(|s| s.scaled(-1.0)));
        let mut p = RadialProfile { shapes, sup_norm: 0.0 };
        if p.shapes.len() == self.shapes.len() {
            p.sup_norm = self.sup_norm;
        } else if self.shapes.is_empty() {
            p.sup_norm = other.sup_norm;
        } else if self == other {
            p.shapes.clear();
        } else {
            p.sup_norm = p.sample_extremes().1;
        }
        p
    }

    /// `int_0^1 Q(r) r dr`.
    pub fn radial_moment(&self) -> f64 {
        laplace_oracle(self, 0.0)
    }

    /// Radial `L^2(r dr)` norm.
    pub fn l2_radial(&self) -> f64 {
        let (lo, hi) = self.support();
        if self.is_zero() {
            return 0.0;
        }
        let gl = GaussLegendre::new(16);
        panels(lo, hi, &self.breakpoints(), 0.02)
            .into_iter()
            .map(|(a, b)| gl.integrate(a, b, |r| self.eval(r).powi(2) * r))
            .sum::<f64>()
            .sqrt()
    }

    /// `L^2` norm of `q` on the plane.
    pub fn l2_norm(&self) -> f64 {
        (2.0 * PI).sqrt() * self.l2_radial()
    }
}

/// Uniform `(2N + 1)^2` node grid over `[-R, R]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianGrid {
    pub n_half: usize,
    pub radius: f64,
}

impl CartesianGrid {
    pub fn new(n_half: usize, radius: f64) -> Result<Self> {
        if n_half == 0 || !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!("invalid grid: N = {n_half}, R = {radius}")));
        }
        Ok(CartesianGrid { n_half, radius })
    }

    /// Grid with `side` nodes per axis (`side` odd).
    pub fn with_side(side: usize, radius: f64) -> Result<Self> {
        if side < 3 || side % 2 == 0 {
            return Err(Error::Domain(format!("grid side {side} must be odd and >= 3")));
        }
        Self::new((side - 1) / 2, radius)
    }

    /// Coarsest grid resolving `points_per_wavelength` at frequency `lambda`.
    pub fn resolving(lambda: f64, points_per_wavelength: f64, radius: f64) -> Result<Self> {
        let h = 2.0 * PI / (lambda * points_per_wavelength);
        Self::new((radius / h).ceil().max(1.0) as usize, radius)
    }

    pub fn side(&self) -> usize {
        2 * self.n_half + 1
    }

    pub fn len(&self) -> usize {
        self.side() * self.side()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.radius / self.n_half as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.radius + self.spacing() * i as f64
    }

    pub fn node(&self, k: usize) -> [f64; 2] {
        let side = self.side();
        [self.coord(k % side), self.coord(k / side)]
    }
}

/// A potential sampled on a Cartesian grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPotential {
    grid: CartesianGrid,
    values: Vec<f64>,
    support_radius: f64,
    bound_m: f64,
}

impl GridPotential {
    pub fn new(grid: CartesianGrid, values: Vec<f64>, support_radius: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidPotential(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("grid values must be finite".into()));
        }
        let half = 0.5 * grid.spacing();
        for (k, &v) in values.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let [x, y] = grid.node(k);
            let nearest = (x.abs() - half).max(0.0).hypot((y.abs() - half).max(0.0));
            if nearest >= support_radius {
                return Err(Error::InvalidPotential(format!(
                    "nonzero value at ({x}, {y}) outside the support radius {support_radius}"
                )));
            }
        }
        let bound_m = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(GridPotential { grid, values, support_radius, bound_m })
    }

    /// Sample a radial profile: smooth shapes pointwise, layers by exact cell
    /// averages.
    pub fn from_profile(profile: &RadialProfile, grid: CartesianGrid) -> Result<Self> {
        let h = grid.spacing();
        let mut values = vec![0.0; grid.len()];
        for (k, v) in values.iter_mut().enumerate() {
            let [x, y] = grid.node(k);
            let r = x.hypot(y);
            let mut acc = 0.0;
            for s in profile.shapes() {
                acc += match s {
                    RadialShape::Layer { lo, hi, value } => {
                        let (x0, x1, y0, y1) = (x - 0.5 * h, x + 0.5 * h, y - 0.5 * h, y + 0.5 * h);
                        let area = disk_rect_area(*hi, x0, x1, y0, y1) - disk_rect_area(*lo, x0, x1, y0, y1);
                        value * area / (h * h)
                    }
                    other => other.eval(r),
                };
            }
            *v = acc;
        }
        let support_radius = profile.support().1.max(f64::MIN_POSITIVE);
        Self::new(grid, values, support_radius)
    }

    pub fn grid(&self) -> &CartesianGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn bound_m(&self) -> f64 {
        self.bound_m
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Discrete `L^2` norm.
    pub fn l2_norm(&self) -> f64 {
        let h = self.grid.spacing();
        (self.values.iter().map(|v| v * v).sum::<f64>() * h * h).sqrt()
    }
}

/// A potential in either representation.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Radial(RadialProfile),
    Grid(GridPotential),
}

impl Potential {
    pub fn support_radius(&self) -> f64 {
        match self {
            Potential::Radial(p) => p.support().1,
            Potential::Grid(g) => g.support_radius(),
        }
    }

    pub fn bound_m(&self) -> f64 {
        match self {
            Potential::Radial(p) => p.sup_norm(),
            Potential::Grid(g) => g.bound_m(),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        match self {
            Potential::Radial(p) => p.l2_norm(),
            Potential::Grid(g) => g.l2_norm(),
        }
    }
}

fn segment_integral(rho: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        let x = x.clamp(-rho, rho);
        0.5 * (x * (rho * rho - x * x).max(0.0).sqrt() + rho * rho * (x / rho).asin())
    }
}

/// Area of `{|p| < rho, p_x <= x, p_y <= y}`.
fn disk_corner_area(rho: f64, x: f64, y: f64) -> f64 {
    if rho <= 0.0 || x <= -rho || y <= -rho {
        return 0.0;
    }
    let s = segment_integral(rho);
    let xc = x.min(rho);
    let full = |a: f64, b: f64| if b > a { 2.0 * (s(b) - s(a)) } else { 0.0 };
    let partial = |a: f64, b: f64| if b > a { y * (b - a) + s(b) - s(a) } else { 0.0 };
    if y >= rho {
        return full(-rho, xc);
    }
    let xs = (rho * rho - y * y).sqrt();
    let mid = partial(-xs, xc.min(xs));
    if y >= 0.0 {
        full(-rho, xc.min(-xs)) + mid + full(xs, xc)
    } else {
        mid
    }
}

/// Exact area of the disk of radius `rho` (centered at the origin)
/// intersected with the rectangle `[x0, x1] x [y0, y1]`.
pub fn disk_rect_area(rho: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    if rho <= 0.0 {
        return 0.0;
    }
    let nearest = (x0.max(0.0).max(-x1)).hypot(y0.max(0.0).max(-y1));
    if nearest >= rho {
        return 0.0;
    }
    let farthest = x0.abs().max(x1.abs()).hypot(y0.abs().max(y1.abs()));
    if farthest <= rho {
        return (x1 - x0) * (y1 - y0);
    }
    let a = disk_corner_area(rho, x1, y1) - disk_corner_area(rho, x0, y1) - disk_corner_area(rho, x1, y0)
        + disk_corner_area(rho, x0, y0);
    a.max(0.0)
}

/// Origin of a set of Fourier samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FourierMethod {
    Oracle,
    BornFar,
    NearfieldProbe,
    LaplaceMonotoneBound,
}

impl FourierMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            FourierMethod::Oracle => "oracle",
            FourierMethod::BornFar => "born-far",
            FourierMethod::NearfieldProbe => "nearfield-probe",
            FourierMethod::LaplaceMonotoneBound => "laplace-monotone-bound",
        }
    }
}

/// Values of (an estimate of) `q^(xi) = int q(x) e^{-i xi . x} dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSamples {
    pub method: FourierMethod,
    pub lambda: Option<f64>,
    pub band_limit: Option<f64>,
    pub nodes: Vec<[f64; 2]>,
    pub values: Vec<Complex64>,
}

impl FourierSamples {
    pub fn max_abs_difference(&self, other: &FourierSamples) -> Result<f64> {
        if self.nodes != other.nodes {
            return Err(Error::Mismatch("Fourier samples on different nodes".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

/// Largest frequency accepted by [`fourier_oracle`].
pub const MAX_FREQUENCY: f64 = 1.0e3;

/// Direct-quadrature Fourier transform of a potential.
pub fn fourier_oracle(q: &Potential, xis: &[[f64; 2]]) -> Result<FourierSamples> {
    for xi in xis {
        let n = xi[0].hypot(xi[1]);
        if !(n <= MAX_FREQUENCY) {
            return Err(Error::OutOfRange(format!("|xi| = {n} exceeds {MAX_FREQUENCY}")));
        }
    }
    let values = match q {
        Potential::Radial(p) => xis.iter().map(|xi| radial_fourier(p, xi[0].hypot(xi[1]))).collect(),
        Potential::Grid(g) => xis.iter().map(|xi| grid_fourier(g, *xi)).collect(),
    };
    Ok(FourierSamples { method: FourierMethod::Oracle, lambda: None, band_limit: None, nodes: xis.to_vec(), values })
}

/// `q^(xi) = 2 pi int Q(r) J_0(|xi| r) r dr` for a radial profile.
pub fn radial_fourier(p: &RadialProfile, rho: f64) -> Complex64 {
    if p.is_zero() {
        return Complex64::new(0.0, 0.0);
    }
    let (lo, hi) = p.support();
    let gl = GaussLegendre::new(20);
    let width = (2.0 / rho.max(1.0)).min(0.05);
    let sum: f64 = panels(lo, hi, &p.breakpoints(), width)
        .into_iter()
        .map(|(a, b)| {
            gl.integrate(a, b, |r| {
                let x = rho * r;
                let j0 = if x == 0.0 { 1.0 } else { specfun::bessel_01(x)[0] };
                p.eval(r) * j0 * r
            })
        })
        .sum();
    Complex64::new(2.0 * PI * sum, 0.0)
}

fn grid_fourier(g: &GridPotential, xi: [f64; 2]) -> Complex64 {
    let grid = g.grid();
    let h = grid.spacing();
    let side = grid.side();
    let ex: Vec<Complex64> = (0..side).map(|i| Complex64::from_polar(1.0, -xi[0] * grid.coord(i))).collect();
    let ey: Vec<Complex64> = (0..side).map(|i| Complex64::from_polar(1.0, -xi[1] * grid.coord(i))).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, row) in g.values().chunks(side).enumerate() {
        let mut r = Complex64::new(0.0, 0.0);
        for (i, &v) in row.iter().enumerate() {
            if v != 0.0 {
                r += ex[i] * v;
            }
        }
        acc += r * ey[j];
    }
    acc * (h * h)
}

/// `int_0^1 Q(r) e^{-t (1 - r)} r dr`.
pub fn laplace_oracle(q: &RadialProfile, t: f64) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let (lo, hi) = q.support();
    let gl = GaussLegendre::new(20);
    let width = (4.0 / t.max(1.0)).min(0.05);
    panels(lo, hi, &q.breakpoints(), width)
        .into_iter()
        .map(|(a, b)| gl.integrate(a, b, |r| q.eval(r) * (-t * (1.0 - r)).exp() * r))
        .sum()
}

/// Named potential families available to experiments and configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero {},
    /// `q0` on the disk of radius `a`.
    PiecewiseConstant { q0: f64, a: f64 },
    /// Smooth bump with peak `amplitude` at radius `center`.
    Bump { amplitude: f64, center: f64, halfwidth: f64 },
    /// Bump filling the shell `(1 - kappa/lambda, 1)`; `lambda` defaults to the
    /// frequency of the experiment.
    NearBoundary {
        kappa: f64,
        amplitude: f64,
        #[serde(default)]
        lambda: Option<f64>,
    },
    /// `count` concentric bumps with seeded random amplitudes in `[0, max_amplitude]`.
    RandomBumps { count: usize, max_amplitude: f64, seed: u64 },
}

impl PotentialSpec {
    /// Build the radial profile at operating frequency `lambda`.
    pub fn build(&self, lambda: f64) -> Result<RadialProfile> {
        match self {
            PotentialSpec::Zero {} => Ok(RadialProfile::zero()),
            PotentialSpec::PiecewiseConstant { q0, a } => piecewise_constant(*q0, *a),
            PotentialSpec::Bump { amplitude, center, halfwidth } => bump(*amplitude, *center, *halfwidth),
            PotentialSpec::NearBoundary { kappa, amplitude, lambda: fixed } => {
                near_boundary_bump(*kappa, fixed.unwrap_or(lambda), *amplitude)
            }
            PotentialSpec::RandomBumps { count, max_amplitude, seed } => random_bumps(*count, *max_amplitude, *seed),
        }
    }
}

/// `q0` on `[0, a]`.
pub fn piecewise_constant(q0: f64, a: f64) -> Result<RadialProfile> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidPotential(format!("radius a = {a} outside (0, 1]")));
    }
    RadialProfile::new(vec![RadialShape::Layer { lo: 0.0, hi: a, value: q0 }])
}

pub fn bump(amplitude: f64, center: f64, halfwidth: f64) -> Result<RadialProfile> {
    RadialProfile::new(vec![RadialShape::Bump { center, halfwidth, amplitude }])
}

/// Bump supported in `(1 - kappa/lambda, 1)`.
pub fn near_boundary_bump(kappa: f64, lambda: f64, amplitude: f64) -> Result<RadialProfile> {
    if !(kappa > 0.0 && lambda > 0.0 && kappa < lambda) {
        return Err(Error::InvalidPotential(format!("need 0 < kappa < lambda, got kappa = {kappa}, lambda = {lambda}")));
    }
    let w = 0.5 * kappa / lambda;
    bump(amplitude, 1.0 - w, w)
}

pub fn random_bumps(count: usize, max_amplitude: f64, seed: u64) -> Result<RadialProfile> {
    if count == 0 || count > 64 {
        return Err(Error::InvalidPotential(format!("bump count {count} outside 1..=64")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = 0.4 / count as f64;
    let shapes = (0..count)
        .map(|k| RadialShape::Bump {
            center: 0.1 + w * (2 * k + 1) as f64,
            halfwidth: w,
            amplitude: rng.gen_range(0.0..=max_amplitude),
        })
        .collect();
    RadialProfile::new(shapes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let gl = GaussLegendre::new(10);
        let v = gl.integrate(0.0, 2.0, |x| x.powi(19));
        assert!((v - 2f64.powi(20) / 20.0).abs() / v < 1e-13);
        assert!((gl.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn angular_grid_rules() {
        assert!(AngularGrid::new(7).is_err());
        assert!(AngularGrid::new(6).is_err());
        let g = AngularGrid::new(32).unwrap();
        assert!((g.weight() * 32.0 - 2.0 * PI).abs() < 1e-14);
        for i in 0..32 {
            let d = g.direction(i);
            let e = g.direction(g.negated(i));
            assert_eq!(d[0], -e[0]);
            assert_eq!(d[1], -e[1]);
            assert!((d[0].hypot(d[1]) - 1.0).abs() < 1e-15);
            assert!((d[0] - g.angle(i).cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn fourier_coefficient_examples() {
        let g = AngularGrid::new(32).unwrap();
        let f: Vec<Complex64> = (0..32).map(|i| Complex64::from_polar(1.0, 3.0 * g.angle(i))).collect();
        let c = angular_fourier_coeffs(&g, &f, 15).unwrap();
        for (idx, ck) in c.iter().enumerate() {
            let k = idx as i64 - 15;
            let want = if k == 3 { 2.0 * PI } else { 0.0 };
            assert!((ck - want).norm() < 1e-12, "k = {k}");
        }
        let ones = vec![Complex64::new(1.0, 0.0); 32];
        assert!((angular_fourier_coeffs(&g, &ones, 4).unwrap()[4] - 2.0 * PI).norm() < 1e-13);
        let cosf: Vec<Complex64> = (0..32).map(|i| Complex64::new(g.angle(i).cos(), 0.0)).collect();
        let c = angular_fourier_coeffs(&g, &cosf, 2).unwrap();
        assert!((c[1] - PI).norm() < 1e-13 && (c[3] - PI).norm() < 1e-13);
        assert!(angular_fourier_coeffs(&g, &ones, 16).is_err());
    }

    #[test]
    fn trapezoid_exact_below_grid_size() {
        let g = AngularGrid::new(24).unwrap();
        for k in -23i64..=23 {
            let s: Complex64 = (0..24).map(|i| Complex64::from_polar(g.weight(), k as f64 * g.angle(i))).sum();
            let want = if k == 0 { 2.0 * PI } else { 0.0 };
            assert!((s - want).norm() < 1e-13, "k = {k}");
        }
    }

    #[test]
    fn disk_rect_area_matches_known_cases() {
        assert!((disk_rect_area(1.0, -2.0, 2.0, -2.0, 2.0) - PI).abs() < 1e-14);
        assert!((disk_rect_area(1.0, 0.0, 2.0, 0.0, 2.0) - PI / 4.0).abs() < 1e-14);
        assert!((disk_rect_area(1.0, -0.1, 0.1, -0.1, 0.1) - 0.04).abs() < 1e-15);
        assert_eq!(disk_rect_area(1.0, 2.0, 3.0, 0.0, 1.0), 0.0);
        // half disk split by a horizontal line below the center
        let lower = disk_rect_area(1.0, -1.0, 1.0, -1.0, -0.5);
        let cap = (0.5f64).acos() - 0.5 * (1.0f64 - 0.25).sqrt();
        assert!((lower - cap).abs() < 1e-14);
    }

    #[test]
    fn disk_rect_area_against_monte_carlo_grid() {
        let (rho, x0, x1, y0, y1) = (0.7, 0.2, 0.65, -0.3, 0.55);
        let n = 2000;
        let mut count = 0usize;
        for i in 0..n {
            for j in 0..n {
                let x = x0 + (x1 - x0) * (i as f64 + 0.5) / n as f64;
                let y = y0 + (y1 - y0) * (j as f64 + 0.5) / n as f64;
                if x * x + y * y < rho * rho {
                    count += 1;
                }
            }
        }
        let approx = count as f64 / (n * n) as f64 * (x1 - x0) * (y1 - y0);
        assert!((disk_rect_area(rho, x0, x1, y0, y1) - approx).abs() < 1e-4);
    }

    #[test]
    fn pchip_is_monotone_and_interpolating() {
        let x = vec![0.0, 0.2, 0.5, 0.7, 1.0];
        let y = vec![0.0, 0.1, 0.9, 1.0, 1.0];
        let p = Pchip::new(x.clone(), y.clone()).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((p.eval(*a) - b).abs() < 1e-15);
        }
        let mut prev = -1.0;
        for k in 0..=1000 {
            let v = p.eval(k as f64 / 1000.0);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        assert_eq!(p.eval(1.5), 0.0);
    }

    #[test]
    fn builtin_examples() {
        let p = piecewise_constant(1.0, 0.5).unwrap();
        assert_eq!(p.sup_norm(), 1.0);
        assert_eq!(p.support(), (0.0, 0.5));
        let nb = near_boundary_bump(2.0, 20.0, 1.0).unwrap();
        let (lo, hi) = nb.support();
        assert!(lo >= 0.9 - 1e-15 && hi <= 1.0);
        assert!((nb.sup_norm() - 1.0).abs() < 1e-9);
        let b = bump(0.3, 0.5, 0.3).unwrap();
        assert!(b.radial_moment() > 0.0);
        assert!(bump(1.0, 0.9, 0.2).is_err());
        let r1 = random_bumps(3, 1.0, 7).unwrap();
        let r2 = random_bumps(3, 1.0, 7).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn spec_round_trip_and_unknown_fields() {
        let s: PotentialSpec = serde_json::from_str(r#"{"kind":"bump","amplitude":0.1,"center":0,"halfwidth":0.5}"#).unwrap();
        assert_eq!(s, PotentialSpec::Bump { amplitude: 0.1, center: 0.0, halfwidth: 0.5 });
        let bad = serde_json::from_str::<PotentialSpec>(r#"{"kind":"zero","extra":1}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn fourier_oracle_examples() {
        let zero = Potential::Radial(RadialProfile::zero());
        let f = fourier_oracle(&zero, &[[1.0, 2.0]]).unwrap();
        assert_eq!(f.values[0], Complex64::new(0.0, 0.0));
        let disk = Potential::Radial(piecewise_constant(1.0, 0.5).unwrap());
        let f = fourier_oracle(&disk, &[[0.0, 0.0], [3.0, 0.0]]).unwrap();
        assert!((f.values[0].re - PI * 0.25).abs() < 1e-12);
        let closed = 2.0 * PI * (0.5 / 3.0) * specfun::bessel_j(1, 1.5).unwrap();
        assert!((f.values[1].re - closed).abs() < 1e-12);
        assert!((closed - 0.584269744806638).abs() < 1e-12);
        assert!(fourier_oracle(&disk, &[[2e3, 0.0]]).is_err());
    }

    #[test]
    fn grid_fourier_agrees_with_radial_path() {
        let profile = bump(1.0, 0.0, 0.5).unwrap();
        let grid = CartesianGrid::with_side(401, 0.5).unwrap();
        let gp = Potential::Grid(GridPotential::from_profile(&profile, grid).unwrap());
        let rp = Potential::Radial(profile);
        let xis = [[0.0, 0.0], [4.0, 3.0], [-10.0, 2.0]];
        let a = fourier_oracle(&gp, &xis).unwrap();
        let b = fourier_oracle(&rp, &xis).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).norm() <= 1e-4 * y.norm().max(1e-3));
        }
    }

    #[test]
    fn cell_averaged_disk_has_exact_mass() {
        let profile = piecewise_constant(1.0, 0.37).unwrap();
        let grid = CartesianGrid::with_side(81, 0.4).unwrap();
        let gp = GridPotential::from_profile(&profile, grid).unwrap();
        let h = grid.spacing();
        let mass: f64 = gp.values().iter().sum::<f64>() * h * h;
        assert!((mass - PI * 0.37 * 0.37).abs() < 1e-12);
    }

    #[test]
    fn laplace_examples() {
        assert_eq!(laplace_oracle(&RadialProfile::zero(), 3.0), 0.0);
        let d = 0.1;
        let shell = RadialProfile::new(vec![RadialShape::Layer { lo: 1.0 - d, hi: 1.0, value: 1.0 }]).unwrap();
        assert!((laplace_oracle(&shell, 1e-12) - (d - d * d / 2.0)).abs() < 1e-12);
        let t: f64 = 40.0;
        let anti = |r: f64| (t * r - 1.0) * (-t * (1.0 - r)).exp() / (t * t);
        let want = anti(1.0) - anti(0.9);
        assert!((laplace_oracle(&shell, t) - want).abs() < 1e-10 * want);
        assert!((want - 0.0239743453993089).abs() < 1e-12);
    }
}
