//! Periodic FFT solver for `f_z̄ = μ f_z` on a square window.
//!
//! With `f = z + C ω` the equation becomes `ω = μ (1 + T ω)`, where `C`
//! inverts `∂_z̄` and `T = ∂_z C` is the Beurling transform. Both are
//! Fourier multipliers on the periodic grid; the zero mode of `ω` is
//! carried by an explicit `z̄` term. The result is normalized so that
//! `f(0) = 0` and `f(1) = 1`.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::BeltramiCoefficient;
use crate::projective::C64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// `N×N` nodes `-L/2 + k·L/N` in each coordinate; `N/L` must be an integer
/// so that `0` and `1` are nodes.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridSpec {
    pub n: usize,
    pub length: f64,
}

impl GridSpec {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        let per_unit = n as f64 / length;
        if n < 8 || n % 2 != 0 || !(length > 2.0) || (per_unit - per_unit.round()).abs() > 1e-9 {
            return Err(Error::ParameterOutOfRange(format!("grid N = {n}, L = {length}: N even, L > 2, N/L integral")));
        }
        Ok(GridSpec { n, length })
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn coordinate(&self, k: usize) -> f64 {
        -self.length / 2.0 + k as f64 * self.spacing()
    }

    /// Row `i` is the `y` index, column `j` the `x` index.
    pub fn node(&self, i: usize, j: usize) -> C64 {
        C64::new(self.coordinate(j), self.coordinate(i))
    }

    fn index_of(&self, x: f64) -> usize {
        ((x + self.length / 2.0) / self.spacing()).round() as usize
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GridMap {
    pub spec: GridSpec,
    /// Row-major normalized values.
    #[serde(skip)]
    pub values: Vec<C64>,
    /// `max |f_z̄ - μ f_z|` over nodes at least 3 from the border, with
    /// fourth-order differences.
    pub residual: f64,
    /// `max |ω_{k+1} - ω_k|` per iteration.
    pub updates: Vec<f64>,
    /// Least-squares `f ≈ a z + b` on the outer frame of the window.
    pub far_field: (C64, C64),
}

impl GridMap {
    pub fn value(&self, i: usize, j: usize) -> C64 {
        self.values[i * self.spec.n + j]
    }

    /// `max |f - g|` over nodes with `r_min ≤ |z| ≤ r_max`.
    pub fn max_deviation(&self, g: &dyn Fn(C64) -> C64, r_min: f64, r_max: f64) -> f64 {
        let n = self.spec.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let z = self.spec.node(i, j);
                let r = z.norm();
                if r >= r_min && r <= r_max {
                    worst = worst.max((self.value(i, j) - g(z)).norm());
                }
            }
        }
        worst
    }
}

/// Quintic smooth step: `0` for `s ≤ 0`, `1` for `s ≥ 1`, `C²` between.
pub fn smooth_step(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
}

/// `c` on `|z| ≤ radius - width/2`, zero beyond `radius + width/2`.
pub fn smoothed_disk_indicator(c: C64, radius: f64, width: f64) -> Result<BeltramiCoefficient> {
    if !(width > 0.0 && radius > width / 2.0) {
        return Err(Error::ParameterOutOfRange(format!("radius {radius}, width {width}")));
    }
    BeltramiCoefficient::new(move |z: C64| c * (1.0 - smooth_step((z.norm() - radius + width / 2.0) / width)), c.norm())
}

/// `(t/(t+2))·z/z̄`, cut off smoothly in `log|z|`: zero below `r_in.0`, full
/// from `r_in.1` to `r_out.0`, zero above `r_out.1`.
pub fn truncated_power(t: C64, r_in: (f64, f64), r_out: (f64, f64)) -> Result<BeltramiCoefficient> {
    if !(0.0 < r_in.0 && r_in.0 < r_in.1 && r_in.1 <= r_out.0 && r_out.0 < r_out.1) {
        return Err(Error::ParameterOutOfRange(format!("cut-off radii {r_in:?} {r_out:?}")));
    }
    let k = t / (t + 2.0);
    let (a0, a1) = (r_in.0.ln(), r_in.1.ln());
    let (b0, b1) = (r_out.0.ln(), r_out.1.ln());
    BeltramiCoefficient::new(
        move |z: C64| {
            let r = z.norm();
            if r == 0.0 {
                return ZERO;
            }
            let lr = r.ln();
            let chi = smooth_step((lr - a0) / (a1 - a0)) * (1.0 - smooth_step((lr - b0) / (b1 - b0)));
            k * z / z.conj() * chi
        },
        k.norm(),
    )
}

struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(n: usize) -> Self {
        let mut p = FftPlanner::new();
        Fft2 { n, fwd: p.plan_fft_forward(n), inv: p.plan_fft_inverse(n) }
    }

    fn transpose(&self, a: &mut [C64]) {
        let n = self.n;
        for i in 0..n {
            for j in i + 1..n {
                a.swap(i * n + j, j * n + i);
            }
        }
    }

    fn run(&self, a: &mut [C64], forward: bool) {
        let f = if forward { &self.fwd } else { &self.inv };
        f.process(a);
        self.transpose(a);
        f.process(a);
        self.transpose(a);
        if !forward {
            let s = 1.0 / (self.n * self.n) as f64;
            a.iter_mut().for_each(|v| *v *= s);
        }
    }
}

/// Angular wavenumbers in FFT order; the Nyquist entry is flagged.
fn wavenumbers(spec: &GridSpec) -> Vec<(f64, bool)> {
    let n = spec.n;
    let dk = std::f64::consts::TAU / spec.length;
    (0..n)
        .map(|k| {
            let m = if k <= n / 2 { k as i64 } else { k as i64 - n as i64 };
            (m as f64 * dk, k == n / 2)
        })
        .collect()
}

/// Beurling and Cauchy multipliers, zero on the constant and Nyquist modes.
fn multipliers(spec: &GridSpec) -> (Vec<C64>, Vec<C64>) {
    let n = spec.n;
    let ks = wavenumbers(spec);
    let mut t = vec![ZERO; n * n];
    let mut c = vec![ZERO; n * n];
    for (i, &(ky, ny)) in ks.iter().enumerate() {
        for (j, &(kx, nx)) in ks.iter().enumerate() {
            let den = C64::new(kx, ky);
            if ny || nx || den == ZERO {
                continue;
            }
            t[i * n + j] = C64::new(kx, -ky) / den;
            c[i * n + j] = 2.0 / (C64::new(0.0, 1.0) * den);
        }
    }
    (t, c)
}

/// Solves on the grid with at most `iterations` fixed-point steps, stopping
/// early once the update falls below `1e-14`.
pub fn solve_beltrami_grid(mu: &BeltramiCoefficient, spec: GridSpec, iterations: usize) -> Result<GridMap> {
    if mu.norm() > 0.5 {
        return Err(Error::ParameterOutOfRange(format!("‖μ‖ = {} exceeds 0.5", mu.norm())));
    }
    let n = spec.n;
    let fft = Fft2::new(n);
    let (tm, cm) = multipliers(&spec);
    let nodes: Vec<C64> = (0..n * n).map(|k| spec.node(k / n, k % n)).collect();
    let m: Vec<C64> = nodes.iter().map(|&z| mu.eval(z)).collect();
    let mut w = vec![ZERO; n * n];
    let mut buf = vec![ZERO; n * n];
    let mut updates = Vec::new();
    let mut rising = 0;
    for _ in 0..iterations {
        let mean = w.iter().sum::<C64>() / (n * n) as f64;
        for (b, v) in buf.iter_mut().zip(&w) {
            *b = v - mean;
        }
        fft.run(&mut buf, true);
        for (b, t) in buf.iter_mut().zip(&tm) {
            *b *= t;
        }
        fft.run(&mut buf, false);
        let mut diff = 0.0f64;
        for ((wk, b), mk) in w.iter_mut().zip(&buf).zip(&m) {
            let next = mk * (ONE + b);
            diff = diff.max((next - *wk).norm());
            *wk = next;
        }
        if let Some(&last) = updates.last() {
            rising = if diff > last { rising + 1 } else { 0 };
        }
        updates.push(diff);
        if rising >= 3 {
            return Err(Error::NonConvergence { iterations: updates.len(), residual: diff });
        }
        if diff < 1e-14 {
            break;
        }
    }
    let mean = w.iter().sum::<C64>() / (n * n) as f64;
    for (b, v) in buf.iter_mut().zip(&w) {
        *b = v - mean;
    }
    fft.run(&mut buf, true);
    for (b, c) in buf.iter_mut().zip(&cm) {
        *b *= c;
    }
    fft.run(&mut buf, false);
    let mut f: Vec<C64> = nodes.iter().zip(&buf).map(|(&z, &cw)| z + cw + mean * z.conj()).collect();
    let (i0, j1) = (spec.index_of(0.0), spec.index_of(1.0));
    let f0 = f[i0 * n + i0];
    let scale = f[i0 * n + j1] - f0;
    for v in f.iter_mut() {
        *v = (*v - f0) / scale;
    }
    let residual = fd_residual(&spec, &f, &m);
    let far_field = far_field_fit(&spec, &f);
    Ok(GridMap { spec, values: f, residual, updates, far_field })
}

fn fd_residual(spec: &GridSpec, f: &[C64], mu: &[C64]) -> f64 {
    let n = spec.n;
    let h = spec.spacing();
    let at = |i: usize, j: usize| f[i * n + j];
    let mut worst = 0.0f64;
    for i in 3..n - 3 {
        for j in 3..n - 3 {
            let fx = (-at(i, j + 2) + at(i, j + 1) * 8.0 - at(i, j - 1) * 8.0 + at(i, j - 2)) / (12.0 * h);
            let fy = (-at(i + 2, j) + at(i + 1, j) * 8.0 - at(i - 1, j) * 8.0 + at(i - 2, j)) / (12.0 * h);
            let iy = C64::new(0.0, 1.0) * fy;
            let (fz, fzb) = ((fx - iy) * 0.5, (fx + iy) * 0.5);
            worst = worst.max((fzb - mu[i * n + j] * fz).norm());
        }
    }
    worst
}

fn far_field_fit(spec: &GridSpec, f: &[C64]) -> (C64, C64) {
    let n = spec.n;
    let (lo, hi) = (2, n - 3);
    let mut pts = Vec::new();
    for k in lo..=hi {
        for (i, j) in [(lo, k), (hi, k), (k, lo), (k, hi)] {
            pts.push((spec.node(i, j), f[i * n + j]));
        }
    }
    // complex least squares for f ≈ a z + b
    let m = pts.len() as f64;
    let zm = pts.iter().map(|p| p.0).sum::<C64>() / m;
    let fm = pts.iter().map(|p| p.1).sum::<C64>() / m;
    let szz: f64 = pts.iter().map(|p| (p.0 - zm).norm_sqr()).sum();
    let szf: C64 = pts.iter().map(|p| (p.0 - zm).conj() * (p.1 - fm)).sum();
    let a = szf / szz;
    (a, fm - a * zm)
}
