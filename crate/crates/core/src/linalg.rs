//! Restarted complex GMRES and FFT-based discrete convolution.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

type C = Complex64;

fn dot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Result of an iterative solve.
#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<C>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Restarted GMRES with modified Gram–Schmidt and Givens rotations.
///
/// Converges when `|b - A x| <= tol |b|`; reports the true residual.
pub fn gmres<F>(apply: F, b: &[C], tol: f64, restart: usize, max_iter: usize) -> Result<GmresOutcome>
where
    F: Fn(&[C]) -> Vec<C>,
{
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(GmresOutcome { x: vec![C::new(0.0, 0.0); n], iterations: 0, relative_residual: 0.0 });
    }
    let restart = restart.max(1).min(n.max(1));
    let mut x = vec![C::new(0.0, 0.0); n];
    let mut total = 0usize;
    loop {
        let ax = apply(&x);
        let r: Vec<C> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        let rel = beta / bnorm;
        if rel <= tol {
            return Ok(GmresOutcome { x, iterations: total, relative_residual: rel });
        }
        if total >= max_iter {
            return Err(Error::SingularSystem {
                detail: format!("GMRES stalled at relative residual {rel:.3e} after {total} iterations"),
                condition: f64::NAN,
            });
        }
        let mut basis: Vec<Vec<C>> = Vec::with_capacity(restart + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h = vec![vec![C::new(0.0, 0.0); restart]; restart + 1];
        let mut cs = vec![0.0f64; restart];
        let mut sn = vec![C::new(0.0, 0.0); restart];
        let mut g = vec![C::new(0.0, 0.0); restart + 1];
        g[0] = C::new(beta, 0.0);
        let mut k_used = 0;
        for k in 0..restart {
            let mut w = apply(&basis[k]);
            for (j, v) in basis.iter().enumerate() {
                let hij = dot(v, &w);
                h[j][k] = hij;
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= hij * vi;
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = C::new(hn, 0.0);
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j].conj() * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let (c, s, rr) = givens(h[k][k], h[k + 1][k]);
            cs[k] = c;
            sn[k] = s;
            h[k][k] = rr;
            h[k + 1][k] = C::new(0.0, 0.0);
            g[k + 1] = -s.conj() * g[k];
            g[k] *= c;
            total += 1;
            k_used = k + 1;
            if g[k + 1].norm() / bnorm <= 0.5 * tol || hn == 0.0 || total >= max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / hn).collect());
        }
        let mut y = vec![C::new(0.0, 0.0); k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in i + 1..k_used {
                acc -= h[i][j] * y[j];
            }
            if h[i][i].norm() == 0.0 {
                return Err(Error::SingularSystem {
                    detail: "GMRES Hessenberg breakdown".into(),
                    condition: f64::INFINITY,
                });
            }
            y[i] = acc / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, vi) in x.iter_mut().zip(&basis[j]) {
                *xi += yj * vi;
            }
        }
    }
}

fn givens(a: C, b: C) -> (f64, C, C) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, C::new(0.0, 0.0), a);
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn, C::new(bn, 0.0));
    }
    let r = an.hypot(bn);
    let c = an / r;
    let phase = a / an;
    let s = phase * b.conj() / r;
    (c, s, phase * r)
}

/// Smallest `m >= n` whose only prime factors are 2, 3 and 5.
pub fn next_smooth(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut k = m;
        for p in [2, 3, 5] {
            while k % p == 0 {
                k /= p;
            }
        }
        if k == 1 {
            return m;
        }
        m += 1;
    }
}

/// Aperiodic convolution of `side x side` arrays with a translation-invariant
/// kernel, by circulant embedding into an `m x m` periodic grid.
pub struct Convolver {
    side: usize,
    m: usize,
    kernel_hat: Vec<C>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Convolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Convolver").field("side", &self.side).field("m", &self.m).finish()
    }
}

impl Convolver {
    /// `kernel(dx, dy)` is sampled for offsets in `[-(side-1), side-1]^2`.
    pub fn new<K: Fn(i64, i64) -> C>(side: usize, kernel: K) -> Self {
        let m = next_smooth(2 * side - 1);
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let mut buf = vec![C::new(0.0, 0.0); m * m];
        let reach = side as i64 - 1;
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let iy = dy.rem_euclid(m as i64) as usize;
                let ix = dx.rem_euclid(m as i64) as usize;
                buf[iy * m + ix] = kernel(dx, dy);
            }
        }
        let mut conv = Convolver { side, m, kernel_hat: Vec::new(), fwd, inv };
        conv.forward(&mut buf);
        conv.kernel_hat = buf;
        conv
    }

    pub fn side(&self) -> usize {
        self.side
    }

    fn forward(&self, buf: &mut [C]) {
        self.fwd.process(buf);
        transpose(buf, self.m);
        self.fwd.process(buf);
    }

    fn inverse(&self, buf: &mut [C]) {
        self.inv.process(buf);
        transpose(buf, self.m);
        self.inv.process(buf);
    }

    /// `out_i = sum_j kernel(i - j) f_j` for row-major `side x side` input.
    pub fn apply(&self, f: &[C]) -> Vec<C> {
        let (s, m) = (self.side, self.m);
        assert_eq!(f.len(), s * s, "convolution input has the wrong size");
        let mut buf = vec![C::new(0.0, 0.0); m * m];
        for (row, chunk) in f.chunks(s).enumerate() {
            buf[row * m..row * m + s].copy_from_slice(chunk);
        }
        self.forward(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
            *b *= k;
        }
        self.inverse(&mut buf);
        let scale = 1.0 / (m * m) as f64;
        let mut out = Vec::with_capacity(s * s);
        for row in 0..s {
            out.extend(buf[row * m..row * m + s].iter().map(|v| v * scale));
        }
        out
    }
}

fn transpose(buf: &mut [C], m: usize) {
    for i in 0..m {
        for j in i + 1..m {
            buf.swap(i * m + j, j * m + i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_sizes() {
        assert_eq!(next_smooth(401), 405);
        assert_eq!(next_smooth(801), 810);
        assert_eq!(next_smooth(7), 8);
    }

    #[test]
    fn convolution_matches_direct_sum() {
        let side = 7;
        let kernel = |dx: i64, dy: i64| C::new((dx * 3 + dy) as f64, (dx * dy) as f64 * 0.5 - 1.0);
        let conv = Convolver::new(side, kernel);
        let f: Vec<C> = (0..side * side).map(|k| C::new((k as f64).sin(), (k as f64 * 0.3).cos())).collect();
        let out = conv.apply(&f);
        for i in 0..side * side {
            let (ix, iy) = ((i % side) as i64, (i / side) as i64);
            let mut want = C::new(0.0, 0.0);
            for j in 0..side * side {
                let (jx, jy) = ((j % side) as i64, (j / side) as i64);
                want += kernel(ix - jx, iy - jy) * f[j];
            }
            assert!((out[i] - want).norm() < 1e-10 * want.norm().max(1.0));
        }
    }

    #[test]
    fn gmres_solves_small_nonsymmetric_system() {
        let n = 30;
        let a = |i: usize, j: usize| {
            if i == j {
                C::new(3.0, 0.5)
            } else {
                C::new(((i * 7 + j * 3) % 5) as f64 * 0.02, -0.01 * (i as f64 - j as f64))
            }
        };
        let apply = |x: &[C]| (0..n).map(|i| (0..n).map(|j| a(i, j) * x[j]).sum()).collect::<Vec<C>>();
        let truth: Vec<C> = (0..n).map(|k| C::new(k as f64, 1.0 - k as f64 * 0.1)).collect();
        let b = apply(&truth);
        let out = gmres(apply, &b, 1e-13, 8, 500).unwrap();
        for (x, t) in out.x.iter().zip(&truth) {
            assert!((x - t).norm() < 1e-9);
        }
        assert!(out.relative_residual <= 1e-13);
    }
}
