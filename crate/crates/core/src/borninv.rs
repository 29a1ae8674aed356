//! Recovery of the low-frequency band of `q^` from scattering amplitudes and
//! the two sides of the far-field stability estimate.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::csv::{num, CsvTable};
use crate::error::{Error, Result};
use crate::forward::{born_far_field, FarField};
use crate::numerics::{fourier_oracle, FourierMethod, FourierSamples, GaussLegendre, Potential};
use crate::specfun::far_field_coefficient;

type C = Complex64;

/// Smallest admissible `|eta|` before a direction pair counts as degenerate.
pub const MIN_ETA: f64 = 1e-5;

/// The two direction pairs `(theta, omega)` with `lambda (theta - omega) = xi`,
/// one for each sense of `eta` perpendicular to `xi`.
pub fn direction_pair(xi: [f64; 2], lambda: f64) -> Result<[([f64; 2], [f64; 2]); 2]> {
    let norm = xi[0].hypot(xi[1]);
    let limit = 2.0 * lambda;
    if !(norm < limit) {
        return Err(Error::DegenerateBand { norm, limit });
    }
    let half = [0.5 * xi[0] / lambda, 0.5 * xi[1] / lambda];
    let h2 = half[0] * half[0] + half[1] * half[1];
    let r = (1.0 - h2).sqrt();
    if r < MIN_ETA {
        return Err(Error::DegenerateBand { norm, limit });
    }
    let perp = if norm > 0.0 { [-xi[1] / norm, xi[0] / norm] } else { [1.0, 0.0] };
    let pair = |s: f64| {
        let eta = [s * r * perp[0], s * r * perp[1]];
        ([eta[0] + half[0], eta[1] + half[1]], [eta[0] - half[0], eta[1] - half[1]])
    };
    Ok([pair(1.0), pair(-1.0)])
}

/// Polar quadrature nodes for the band `|xi| <= (2 - epsilon) lambda`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSpec {
    pub epsilon: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub nodes: Vec<[f64; 2]>,
    /// Polar quadrature weights matching `nodes`.
    pub weights: Vec<f64>,
}

/// Band parameters as they appear in experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandParams {
    pub epsilon: f64,
    pub alpha: f64,
    #[serde(default = "default_radial_nodes")]
    pub radial_nodes: usize,
    #[serde(default = "default_angular_nodes")]
    pub angular_nodes: usize,
}

fn default_radial_nodes() -> usize {
    24
}

fn default_angular_nodes() -> usize {
    32
}

impl Default for BandParams {
    fn default() -> Self {
        BandParams { epsilon: 0.2, alpha: 3.0, radial_nodes: default_radial_nodes(), angular_nodes: default_angular_nodes() }
    }
}

impl BandSpec {
    /// Gauss–Legendre in radius, uniform in angle.
    pub fn polar(lambda: f64, params: &BandParams) -> Result<Self> {
        let BandParams { epsilon, alpha, radial_nodes, angular_nodes } = *params;
        if !(epsilon > 0.0 && epsilon < 2.0) {
            return Err(Error::Domain(format!("band shrink epsilon = {epsilon} outside (0, 2)")));
        }
        if !(alpha > 2.0) {
            return Err(Error::Domain(format!("weight exponent alpha = {alpha} must exceed 2")));
        }
        if radial_nodes == 0 || angular_nodes == 0 || !(lambda > 0.0) {
            return Err(Error::Domain("band needs positive lambda and node counts".into()));
        }
        let gl = GaussLegendre::new(radial_nodes);
        let radius = (2.0 - epsilon) * lambda;
        let dphi = 2.0 * PI / angular_nodes as f64;
        let mut nodes = Vec::with_capacity(radial_nodes * angular_nodes);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for (rho, w) in gl.mapped(0.0, radius) {
            for k in 0..angular_nodes {
                let phi = dphi * k as f64;
                nodes.push([rho * phi.cos(), rho * phi.sin()]);
                weights.push(w * rho * dphi);
            }
        }
        Ok(BandSpec { epsilon, alpha, lambda, nodes, weights })
    }

    pub fn radius(&self) -> f64 {
        (2.0 - self.epsilon) * self.lambda
    }

    /// `<xi>^{-alpha}`.
    pub fn weight_factor(&self, xi: [f64; 2]) -> f64 {
        (1.0 + xi[0] * xi[0] + xi[1] * xi[1]).powf(-0.5 * self.alpha)
    }
}

/// Anything that can supply `a(theta, omega)` at one frequency.
pub trait AmplitudeSource: Sync {
    fn lambda(&self) -> f64;
    fn amplitude(&self, theta: [f64; 2], omega: [f64; 2]) -> Result<C>;
}

/// Born amplitudes of a known potential.
pub struct BornSource<'a> {
    pub q: &'a Potential,
    pub lambda: f64,
}

impl AmplitudeSource for BornSource<'_> {
    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn amplitude(&self, theta: [f64; 2], omega: [f64; 2]) -> Result<C> {
        born_far_field(self.q, self.lambda, theta[1].atan2(theta[0]), omega[1].atan2(omega[0]))
    }
}

/// Amplitudes from a closure.
pub struct FnSource<F> {
    pub lambda: f64,
    pub f: F,
}

impl<F: Fn([f64; 2], [f64; 2]) -> Result<C> + Sync> AmplitudeSource for FnSource<F> {
    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn amplitude(&self, theta: [f64; 2], omega: [f64; 2]) -> Result<C> {
        (self.f)(theta, omega)
    }
}

/// Periodic cardinal function of an even `n`-point grid.
fn cardinal(n: usize, t: f64) -> f64 {
    let half = 0.5 * t;
    let s = half.sin();
    if s.abs() < 1e-14 {
        return if half.cos() > 0.0 { 1.0 } else { ((n / 2) as f64 * t).cos().signum() };
    }
    (0.5 * n as f64 * t).sin() * half.cos() / (s * n as f64)
}

/// Tensor trigonometric interpolation of a sampled far field. Exact for
/// amplitudes band-limited below the grid's Nyquist order.
impl AmplitudeSource for FarField {
    fn lambda(&self) -> f64 {
        self.lambda
    }

    fn amplitude(&self, theta: [f64; 2], omega: [f64; 2]) -> Result<C> {
        let (nt, no) = (self.theta.size(), self.omega.size());
        let pt = theta[1].atan2(theta[0]);
        let po = omega[1].atan2(omega[0]);
        let wt: Vec<f64> = (0..nt).map(|i| cardinal(nt, pt - self.theta.angle(i))).collect();
        let wo: Vec<f64> = (0..no).map(|j| cardinal(no, po - self.omega.angle(j))).collect();
        let mut acc = C::new(0.0, 0.0);
        for (i, &a) in wt.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let row = &self.values[i * no..(i + 1) * no];
            let s: C = row.iter().zip(&wo).map(|(v, &b)| v * b).sum();
            acc += s * a;
        }
        Ok(acc)
    }
}

/// Leading-order estimate `q^(xi) ~ -a / c` at every band node, averaged over
/// both senses of `eta`.
pub fn recover_fourier_band(source: &dyn AmplitudeSource, band: &BandSpec) -> Result<FourierSamples> {
    let lambda = source.lambda();
    if lambda != band.lambda {
        return Err(Error::Mismatch(format!("band built for lambda = {}, data at {lambda}", band.lambda)));
    }
    let c = far_field_coefficient(lambda);
    let values = band
        .nodes
        .par_iter()
        .map(|&xi| {
            let pairs = direction_pair(xi, lambda)?;
            let mut acc = C::new(0.0, 0.0);
            for (theta, omega) in pairs {
                acc += source.amplitude(theta, omega)?;
            }
            Ok(-acc / (2.0 * c))
        })
        .collect::<Result<Vec<C>>>()?;
    Ok(FourierSamples {
        method: FourierMethod::BornFar,
        lambda: Some(lambda),
        band_limit: Some(band.radius()),
        nodes: band.nodes.clone(),
        values,
    })
}

/// Both sides of the far-field stability estimate at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityRecord {
    pub lambda: f64,
    pub lhs: f64,
    pub data_term: f64,
    pub remainder_term: f64,
    pub ratio: f64,
}

impl StabilityRecord {
    pub fn csv_header() -> CsvTable {
        CsvTable::new(&["lambda", "lhs", "data_term", "remainder_term", "ratio"])
    }

    pub fn push_to(&self, t: &mut CsvTable) {
        t.push_numbers(&[self.lambda, self.lhs, self.data_term, self.remainder_term, self.ratio]);
    }
}

/// `sup |q1 - q2|`, exact for radial pairs and grid pairs on a common grid.
pub fn sup_difference(q1: &Potential, q2: &Potential) -> Result<f64> {
    match (q1, q2) {
        (Potential::Radial(a), Potential::Radial(b)) => Ok(a.difference(b).sup_norm()),
        (Potential::Grid(a), Potential::Grid(b)) => {
            if a.grid() != b.grid() {
                return Err(Error::GridMismatch("potentials on different grids".into()));
            }
            Ok(a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
        }
        _ => Err(Error::Mismatch("sup difference between radial and grid potentials".into())),
    }
}

pub fn stability_record(q1: &Potential, q2: &Potential, lambda: f64, band: &BandSpec, ff_diff_norm_sq: f64) -> Result<StabilityRecord> {
    if band.lambda != lambda {
        return Err(Error::Mismatch(format!("band built for lambda = {}, record at {lambda}", band.lambda)));
    }
    let f1 = fourier_oracle(q1, &band.nodes)?;
    let f2 = fourier_oracle(q2, &band.nodes)?;
    // sequential sum in node order keeps the result reproducible
    let lhs: f64 = band
        .nodes
        .iter()
        .zip(&band.weights)
        .zip(f1.values.iter().zip(&f2.values))
        .map(|((&xi, &w), (a, b))| w * band.weight_factor(xi) * (a - b).norm_sqr())
        .sum();
    let data_term = lambda.powi(3) * ff_diff_norm_sq;
    let remainder_term = sup_difference(q1, q2)?.powi(2) / (lambda * lambda);
    let denom = data_term + remainder_term;
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / denom };
    Ok(StabilityRecord { lambda, lhs, data_term, remainder_term, ratio })
}

/// CSV of reconstructed samples: `xi_x, xi_y, re_qhat, im_qhat, method`.
pub fn fourier_samples_csv(samples: &FourierSamples) -> CsvTable {
    let mut t = CsvTable::new(&["xi_x", "xi_y", "re_qhat", "im_qhat", "method"]);
    for (xi, v) in samples.nodes.iter().zip(&samples.values) {
        t.push(vec![num(xi[0]), num(xi[1]), num(v.re), num(v.im), samples.method.tag().to_string()]);
    }
    t
}
