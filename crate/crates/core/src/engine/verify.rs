//! Sampled checks of the estimates the evaluator relies on.
//!
//! Every procedure returns a report with one entry per sample; a failed
//! sample is a report entry, not an error.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::currents::{cell_measures, liouville_box_measure, partition_box, IdentityMap, PartitionScheme};
use crate::error::{Error, Result};
use crate::families::{conjugated_group, max_dilatation, FamilyMember, HolomorphicQCFamily};
use crate::holder::{HolderFunction, Z0};
use crate::metrics::{check_punctured_disk_bound, decay_bound, radius_r_beta};
use crate::projective::{bracket, from_zero_one_infinity, point_at_angle, GeodesicBox, MobiusTransform, Quadruple, SpherePoint, C64};

use super::{
    eval_derivative, eval_extension, family_point_derivative, fixes_boundary, regression_slope, series_levels,
    Deformation, DistributionHandle, EvalParams, Through,
};

pub const DEFAULT_SEED: u64 = 0x00c0_ffee;

/// Random Möbius images of `(1, 1 + σ, ∞, 0)` with `|σ|` log-uniform.
#[derive(Clone, Copy, Debug)]
pub struct QuadrupleSource {
    pub count: usize,
    pub s_min: f64,
    pub s_max: f64,
    /// Rotate `σ` off the real axis.
    pub complex: bool,
    pub seed: u64,
}

impl Default for QuadrupleSource {
    fn default() -> Self {
        QuadrupleSource { count: 10_000, s_min: 1e-6, s_max: 1e-3, complex: false, seed: DEFAULT_SEED }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SampledQuadruple {
    pub quadruple: Quadruple,
    /// `|cr - 1|` as computed from the corners.
    pub s: f64,
}

/// Three reals in `[-10, 10]`, pairwise at least `0.1` apart.
fn separated_reals(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let p: [f64; 3] = [rng.gen_range(-10.0..=10.0), rng.gen_range(-10.0..=10.0), rng.gen_range(-10.0..=10.0)];
        if (p[0] - p[1]).abs() >= 0.1 && (p[1] - p[2]).abs() >= 0.1 && (p[0] - p[2]).abs() >= 0.1 {
            return p;
        }
    }
}

impl QuadrupleSource {
    pub fn generate(&self) -> Result<Vec<SampledQuadruple>> {
        if !(self.s_min > 0.0 && self.s_min <= self.s_max && self.s_max < 1.0) {
            return Err(Error::ParameterOutOfRange(format!("|cr - 1| range [{}, {}]", self.s_min, self.s_max)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (lo, hi) = (self.s_min.ln(), self.s_max.ln());
        let mut out = Vec::with_capacity(self.count);
        while out.len() < self.count {
            let s = if lo == hi { self.s_min } else { rng.gen_range(lo..=hi).exp() };
            let phi = if self.complex {
                rng.gen_range(0.0..TAU)
            } else if rng.gen_bool(0.5) {
                0.0
            } else {
                PI
            };
            let sigma = C64::from_polar(s, phi);
            let [p, q, r] = separated_reals(&mut rng);
            let g = from_zero_one_infinity(&SpherePoint::real(p), &SpherePoint::real(q), &SpherePoint::real(r))?;
            let pts = [SpherePoint::ONE, SpherePoint::finite(C64::new(1.0, 0.0) + sigma), SpherePoint::INFINITY, SpherePoint::ZERO]
                .map(|x| g.apply(&x));
            let Ok(quadruple) = Quadruple::new(pts[0], pts[1], pts[2], pts[3]) else { continue };
            let s = quadruple.cross_ratio_minus_one().norm();
            if s > 0.0 && s < 1.0 {
                out.push(SampledQuadruple { quadruple, s });
            }
        }
        Ok(out)
    }
}

fn map_quadruple(fam: &HolomorphicQCFamily, t: C64, q: &Quadruple) -> [SpherePoint; 4] {
    q.points().map(|p| fam.map(t, &p))
}

fn cr_minus_one(p: &[SpherePoint; 4]) -> C64 {
    bracket(&p[0], &p[1]) * bracket(&p[2], &p[3]) / (bracket(&p[0], &p[3]) * bracket(&p[1], &p[2]))
}

#[derive(Clone, Debug, Serialize)]
pub struct DecaySample {
    pub t_re: f64,
    pub t_im: f64,
    pub k: f64,
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `ln(rhs / lhs)`; negative means a violation.
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentFit {
    pub t_re: f64,
    pub t_im: f64,
    pub k: f64,
    pub exponent: f64,
    pub required: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub samples: Vec<DecaySample>,
    pub fits: Vec<ExponentFit>,
    pub violations: usize,
    pub worst_margin: f64,
    pub pass: bool,
}

/// `|cr(f^t q) - 1| ≤ |cr(q) - 1|^{1/(K(t)+ε)}` for every `t` and sample.
pub fn verify_decay(fam: &HolomorphicQCFamily, ts: &[C64], source: &QuadrupleSource, eps: f64) -> Result<DecayReport> {
    let quads = source.generate()?;
    let mut samples = Vec::with_capacity(ts.len() * quads.len());
    let mut fits = Vec::new();
    for &t in ts {
        fam.check_parameter(t)?;
        let k = fam.dilatation(t);
        let rows: Vec<Result<DecaySample>> = quads
            .par_iter()
            .map(|sq| {
                let lhs = cr_minus_one(&map_quadruple(fam, t, &sq.quadruple)).norm();
                let rhs = decay_bound(sq.s, k, eps)?;
                let margin = if lhs == 0.0 { f64::INFINITY } else { (rhs / lhs).ln() };
                Ok(DecaySample { t_re: t.re, t_im: t.im, k, s: sq.s, lhs, rhs, margin })
            })
            .collect();
        let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
        let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.lhs > 0.0).map(|r| (r.s.ln(), r.lhs.ln())).collect();
        let required = 1.0 / (k + eps);
        let exponent = regression_slope(&pts).unwrap_or(f64::INFINITY);
        fits.push(ExponentFit { t_re: t.re, t_im: t.im, k, exponent, required, pass: exponent >= required });
        samples.extend(rows);
    }
    let violations = samples.iter().filter(|s| s.margin < 0.0).count();
    let worst_margin = samples.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min);
    let pass = violations == 0 && fits.iter().all(|f| f.pass);
    Ok(DecayReport { samples, fits, violations, worst_margin, pass })
}

/// `0`, and 8 points on each of the circles `|t| = r/2` and `|t| = r`.
pub fn disk_parameters(r: f64) -> Vec<C64> {
    let mut ts = vec![C64::new(0.0, 0.0)];
    for rad in [r / 2.0, r] {
        for k in 0..8 {
            ts.push(C64::from_polar(rad, TAU * k as f64 / 8.0));
        }
    }
    ts
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivativeSample {
    pub t_re: f64,
    pub t_im: f64,
    pub s: f64,
    /// `|d/dt cr(f^t q)|`.
    pub lhs: f64,
    /// `s^{1/(K_r+ε)} ln(1/s)`.
    pub rhs: f64,
    pub calibration: bool,
    /// `ln(C_fit·rhs / lhs)`.
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivativeReport {
    pub k_r: f64,
    pub max_calibration_ratio: f64,
    pub c_fit: f64,
    pub samples: Vec<DerivativeSample>,
    pub violations: usize,
    pub worst_margin: f64,
    pub pass: bool,
}

/// Safety factor applied to the largest calibration ratio.
pub const C_FIT_FACTOR: f64 = 2.0;

/// `d/dt cr(f^t(q))` from the corner derivatives.
pub fn cross_ratio_derivative(fam: &HolomorphicQCFamily, t: C64, q: &Quadruple) -> C64 {
    let m: Vec<(SpherePoint, SpherePoint)> = q.points().iter().map(|p| family_point_derivative(fam, t, p)).collect();
    let d = |x: usize, y: usize| {
        let b = bracket(&m[x].0, &m[y].0);
        ((bracket(&m[x].1, &m[y].0) + bracket(&m[x].0, &m[y].1)) / b, b)
    };
    let (dac, ac) = d(0, 2);
    let (dbd, bd) = d(1, 3);
    let (dad, ad) = d(0, 3);
    let (dbc, bc) = d(1, 2);
    ac * bd / (ad * bc) * (dac + dbd - dad - dbc)
}

/// `|d/dt cr| ≤ C_fit s^{1/(K_r+ε)} ln(1/s)` with `C_fit` frozen on the
/// even-indexed quadruples and checked on the odd ones.
pub fn verify_derivative_bound(
    fam: &HolomorphicQCFamily,
    r: f64,
    source: &QuadrupleSource,
    eps: f64,
) -> Result<DerivativeReport> {
    let k_r = max_dilatation(fam, r)?;
    let quads = source.generate()?;
    let ts = disk_parameters(r);
    let mut samples = Vec::with_capacity(ts.len() * quads.len());
    for &t in &ts {
        fam.check_parameter(t)?;
        let rows: Vec<DerivativeSample> = quads
            .par_iter()
            .enumerate()
            .map(|(k, sq)| {
                let lhs = cross_ratio_derivative(fam, t, &sq.quadruple).norm();
                let rhs = sq.s.powf(1.0 / (k_r + eps)) * (1.0 / sq.s).ln();
                DerivativeSample { t_re: t.re, t_im: t.im, s: sq.s, lhs, rhs, calibration: k % 2 == 0, margin: 0.0 }
            })
            .collect();
        samples.extend(rows);
    }
    let max_ratio = samples.iter().filter(|s| s.calibration).map(|s| s.lhs / s.rhs).fold(0.0, f64::max);
    let c_fit = C_FIT_FACTOR * max_ratio;
    for s in samples.iter_mut() {
        s.margin = if s.lhs == 0.0 { f64::INFINITY } else { (c_fit * s.rhs / s.lhs).ln() };
    }
    let held_out = || samples.iter().filter(|s| !s.calibration);
    let violations = held_out().filter(|s| s.margin < 0.0).count();
    let worst_margin = held_out().map(|s| s.margin).fold(f64::INFINITY, f64::min);
    Ok(DerivativeReport {
        k_r,
        max_calibration_ratio: max_ratio,
        c_fit,
        violations,
        worst_margin,
        pass: violations == 0,
        samples,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CircleSample {
    pub t_re: f64,
    pub t_im: f64,
    pub f_re: f64,
    pub f_im: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HolomorphyReport {
    pub f_center: C64,
    pub circle: Vec<CircleSample>,
    /// `|F(t0) - mean of F on the circle|`.
    pub mean_value_residual: f64,
    /// Central-difference estimate of `|∂F/∂t̄|` at `t0`.
    pub dbar_residual: f64,
    /// Derivative series at `t0`.
    pub derivative: C64,
    /// `(F(t0+h) - F(t0-h)) / 2h`.
    pub derivative_fd: C64,
    pub derivative_rel_error: f64,
    pub sup_abs: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Difference step for the `∂/∂t̄` and derivative checks.
pub const HOLOMORPHY_STEP: f64 = 1e-4;

pub fn verify_holomorphy(
    xi: &HolderFunction,
    fam: &HolomorphicQCFamily,
    t0: C64,
    radius: f64,
    m: usize,
    params: &EvalParams,
) -> Result<HolomorphyReport> {
    if m == 0 || !(radius > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("radius {radius}, {m} points")));
    }
    let id = MobiusTransform::identity();
    let f = |t: C64| eval_extension(xi, &id, fam, t, params).map(|(v, _)| v);
    let f_center = f(t0)?;
    let ts: Vec<C64> = (0..m).map(|k| t0 + C64::from_polar(radius, TAU * k as f64 / m as f64)).collect();
    let values = ts.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
    let mean = values.iter().sum::<C64>() / m as f64;
    let h = HOLOMORPHY_STEP;
    let (fp, fm) = (f(t0 + h)?, f(t0 - h)?);
    let (fip, fim) = (f(t0 + C64::new(0.0, h))?, f(t0 - C64::new(0.0, h))?);
    let dx = (fp - fm) / (2.0 * h);
    let dy = (fip - fim) / (2.0 * h);
    let dbar = ((dx + C64::new(0.0, 1.0) * dy) * 0.5).norm();
    let (derivative, _) = eval_derivative(xi, &id, fam, t0, params)?;
    let derivative_rel_error = (derivative - dx).norm() / derivative.norm().max(1e-300);
    let sup_abs = values.iter().map(|v| v.norm()).fold(f_center.norm(), f64::max);
    let threshold = 1e-6 * (1.0 + sup_abs);
    let mean_value_residual = (f_center - mean).norm();
    let circle = ts
        .iter()
        .zip(&values)
        .map(|(t, v)| CircleSample { t_re: t.re, t_im: t.im, f_re: v.re, f_im: v.im })
        .collect();
    Ok(HolomorphyReport {
        f_center,
        circle,
        mean_value_residual,
        dbar_residual: dbar,
        derivative,
        derivative_fd: dx,
        derivative_rel_error,
        sup_abs,
        threshold,
        pass: mean_value_residual <= threshold && dbar <= threshold,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RateReport {
    /// `(n, |I_{n+1} - I_n|)`.
    pub deltas: Vec<(u32, f64)>,
    /// Least-squares slope of `log₄ delta` against `n`.
    pub slope: f64,
    pub omega: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Allowance added to the theoretical rate.
pub const RATE_SLACK: f64 = 0.15;

/// Fits the decay of `|I_{n+1} - I_n|` for `n` in `first..=last`.
pub fn verify_rate(xi: &HolderFunction, deformation: &Deformation, first: u32, last: u32, guard: f64) -> Result<RateReport> {
    let count = last.saturating_sub(first) + 1;
    if last < first || count < 6 {
        return Err(Error::InsufficientLevels { needed: 6, got: count as usize });
    }
    let id = MobiusTransform::identity();
    let (trace, omega) = match deformation {
        Deformation::Identity => {
            let map = Through { gamma_inv: id, f: &IdentityMap };
            (series_levels(xi, &map, first..=last + 1, guard, false)?, 1.0)
        }
        Deformation::Family { fam, t } => {
            fam.check_parameter(*t)?;
            let member = FamilyMember { fam: fam.clone(), t: *t };
            let map = Through { gamma_inv: id, f: &member };
            let omega = if fixes_boundary(fam) { 1.0 } else { 1.0 / (fam.dilatation(*t) + 0.1) };
            (series_levels(xi, &map, first..=last + 1, guard, false).map_err(super::branch_to_neighborhood)?, omega)
        }
    };
    let deltas: Vec<(u32, f64)> = trace.levels[..trace.levels.len() - 1].iter().copied().zip(trace.deltas.iter().copied()).collect();
    let scale = trace.partial_sums.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let pts: Vec<(f64, f64)> =
        deltas.iter().filter(|(_, d)| *d > 1e-14 * scale).map(|&(n, d)| (n as f64, d.ln() / 4f64.ln())).collect();
    // fewer than two resolvable deltas means the series is exact
    let slope = if pts.len() < 2 { f64::NEG_INFINITY } else { regression_slope(&pts).unwrap_or(f64::NEG_INFINITY) };
    let bound = 1.0 - xi.lambda() / 2.0 - omega + RATE_SLACK;
    Ok(RateReport { deltas, slope, omega, bound, pass: slope <= bound })
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub w: C64,
    pub w_moved: C64,
    pub difference: f64,
    pub bound: f64,
    pub pass: bool,
}

/// `|W(ξ∘A) - W(ξ)| ≤ 2·tolerance` for a group element `A`.
pub fn verify_group_invariance(handle: &DistributionHandle, xi: &HolderFunction, a: &MobiusTransform) -> Result<InvarianceReport> {
    let group = handle
        .group
        .ok_or_else(|| Error::ParameterOutOfRange("invariance check needs a group".into()))?;
    if let Deformation::Family { fam, t } = &handle.deformation {
        if !fixes_boundary(fam) {
            conjugated_group(fam, *t, &group)?;
        }
    }
    let (w, _) = handle.evaluate(xi, &MobiusTransform::identity())?;
    let (w_moved, _) = handle.evaluate(xi, a)?;
    let difference = (w_moved - w).norm();
    let bound = 2.0 * handle.params.tolerance;
    Ok(InvarianceReport { w, w_moved, difference, bound, pass: difference <= bound })
}

/// Boxes with corners at sorted uniform angles, adjacent corners at least
/// `0.05` radians apart.
pub fn random_boxes(count: usize, seed: u64) -> Vec<GeodesicBox> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut th: [f64; 4] = [0.0; 4].map(|_| rng.gen_range(0.0..TAU));
        th.sort_by(f64::total_cmp);
        let gaps = [th[1] - th[0], th[2] - th[1], th[3] - th[2], th[0] + TAU - th[3]];
        if gaps.iter().any(|g| *g < 0.05) {
            continue;
        }
        let p = th.map(|t| point_at_angle(t, Z0));
        if let Ok(b) = GeodesicBox::new(p[0], p[1], p[2], p[3]) {
            out.push(b);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionSample {
    pub box_index: usize,
    pub level: u32,
    pub measure: f64,
    pub additivity_error: f64,
    pub max_cell: f64,
    /// `C(L)·4⁻ⁿ`.
    pub bound: f64,
    /// `ln(bound / max_cell)`.
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionReport {
    pub samples: Vec<PartitionSample>,
    pub worst_additivity: f64,
    pub worst_margin: f64,
    pub additivity_tolerance: f64,
    pub pass: bool,
}

/// Cell sums against the box measure and the per-cell bound, levels `0..=n_max`.
pub fn verify_partition(boxes: usize, n_max: u32, seed: u64, additivity_tolerance: f64) -> Result<PartitionReport> {
    let all = random_boxes(boxes, seed);
    let per_box: Vec<Result<Vec<PartitionSample>>> = all
        .par_iter()
        .enumerate()
        .map(|(k, b)| {
            let measure = liouville_box_measure(b)?;
            let mut rows = Vec::new();
            for n in 0..=n_max {
                let p = partition_box(b, n, PartitionScheme::NormalizedEuclidean)?;
                let cells = cell_measures(&p, &IdentityMap, f64::INFINITY)?;
                let mut sorted: Vec<f64> = cells.iter().map(|c| c.re).collect();
                let max_cell = sorted.iter().copied().fold(0.0, f64::max);
                sorted.sort_by(f64::total_cmp);
                let sum: f64 = sorted.iter().sum();
                let bound = p.bound_constant() * 4f64.powi(-(n as i32));
                rows.push(PartitionSample {
                    box_index: k,
                    level: n,
                    measure,
                    additivity_error: (sum - measure).abs(),
                    max_cell,
                    bound,
                    margin: (bound / max_cell).ln(),
                });
            }
            Ok(rows)
        })
        .collect();
    let mut samples = Vec::new();
    for r in per_box {
        samples.extend(r?);
    }
    let worst_additivity = samples.iter().map(|s| s.additivity_error).fold(0.0, f64::max);
    let worst_margin = samples.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min);
    Ok(PartitionReport {
        pass: worst_additivity <= additivity_tolerance && worst_margin >= 0.0,
        samples,
        worst_additivity,
        worst_margin,
        additivity_tolerance,
    })
}

/// `0.05, 0.10, …, 0.95`.
pub fn beta_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 * 0.05).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PuncturedSample {
    pub beta: f64,
    pub b1_re: f64,
    pub b1_im: f64,
    pub rho: f64,
    pub radius: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `ln(rhs / lhs)`.
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PuncturedDiskSweep {
    pub samples: Vec<PuncturedSample>,
    pub violations: usize,
    pub worst_margin: f64,
    pub pass: bool,
}

/// Samples `β₁` in the hyperbolic ball of radius `r(β)` about `β`, through
/// the universal cover `w ↦ e^{iw}`.
pub fn verify_punctured_disk(betas: &[f64], per_beta: usize, seed: u64) -> Result<PuncturedDiskSweep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(betas.len() * per_beta);
    for &beta in betas {
        let radius = radius_r_beta(beta)?;
        let y0 = (1.0 / beta).ln();
        let mut taken = 0;
        while taken < per_beta {
            let rho = radius * rng.gen_range(0.0..1.0f64);
            let dir = rng.gen_range(0.0..TAU);
            // point at distance rho from i, scaled to the lift i·y0 of β
            let z = C64::from_polar((rho / 2.0).tanh(), dir);
            let w = C64::new(0.0, 1.0) * (C64::new(1.0, 0.0) + z) / (C64::new(1.0, 0.0) - z) * y0;
            let b1 = (C64::new(0.0, 1.0) * w).exp();
            match check_punctured_disk_bound(beta, b1) {
                Ok(rep) => {
                    samples.push(PuncturedSample {
                        beta,
                        b1_re: b1.re,
                        b1_im: b1.im,
                        rho: rep.rho,
                        radius,
                        lhs: rep.lhs,
                        rhs: rep.rhs,
                        margin: (rep.rhs / rep.lhs).ln(),
                    });
                    taken += 1;
                }
                Err(Error::RadiusExceeded { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    let violations = samples.iter().filter(|s| !(s.lhs <= s.rhs)).count();
    let worst_margin = samples.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min);
    Ok(PuncturedDiskSweep { samples, violations, worst_margin, pass: violations == 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn source_hits_requested_range() {
        let src = QuadrupleSource { count: 200, ..QuadrupleSource::default() };
        let q = src.generate().unwrap();
        assert_eq!(q.len(), 200);
        for sq in &q {
            assert!(sq.s > 0.9e-6 && sq.s < 1.1e-3, "{}", sq.s);
        }
        let again = src.generate().unwrap();
        assert_eq!(q[17].s, again[17].s);
    }

    #[test]
    fn decay_example_quadruple() {
        let fam = HolomorphicQCFamily::power_stretch(1.5).unwrap();
        let q = Quadruple::from_reals(1.0, 1.0 + 1e-4, f64::INFINITY, 0.0).unwrap();
        let lhs = cr_minus_one(&map_quadruple(&fam, C64::new(1.0, 0.0), &q)).norm();
        assert_relative_eq!(lhs, (1.0f64 + 1e-4).powi(2) - 1.0, max_relative = 1e-9);
        assert!(lhs <= decay_bound(1e-4, 2.0, 0.1).unwrap());
    }

    #[test]
    fn decay_small_run() {
        let fam = HolomorphicQCFamily::power_stretch(1.5).unwrap();
        let src = QuadrupleSource { count: 300, ..QuadrupleSource::default() };
        let rep = verify_decay(&fam, &[C64::new(0.0, 0.0), C64::new(0.5, 0.0)], &src, 0.1).unwrap();
        assert!(rep.pass, "worst {}", rep.worst_margin);
        assert!(rep.fits[0].exponent > 0.99);
    }

    #[test]
    fn cross_ratio_derivative_closed_form() {
        let fam = HolomorphicQCFamily::power_stretch(1.0).unwrap();
        let s = 1e-3;
        let q = Quadruple::from_reals(1.0, 1.0 + s, f64::INFINITY, 0.0).unwrap();
        let d = cross_ratio_derivative(&fam, C64::new(0.0, 0.0), &q);
        assert_relative_eq!(d.norm(), (1.0 + s) * (1.0f64 + s).ln(), max_relative = 1e-9);
        let vert = HolomorphicQCFamily::vertical_stretch(1.0).unwrap();
        assert_eq!(cross_ratio_derivative(&vert, C64::new(0.2, 0.1), &q).norm(), 0.0);
    }

    #[test]
    fn derivative_bound_small_run() {
        let fam = HolomorphicQCFamily::power_stretch(1.0).unwrap();
        let src = QuadrupleSource { count: 200, ..QuadrupleSource::default() };
        let rep = verify_derivative_bound(&fam, 0.5, &src, 0.1).unwrap();
        assert_relative_eq!(rep.k_r, 2.0, epsilon = 1e-12);
        assert!(rep.pass, "{} violations", rep.violations);
    }

    #[test]
    fn partition_small_run() {
        let rep = verify_partition(5, 4, 3, 1e-10).unwrap();
        assert!(rep.pass, "{} {}", rep.worst_additivity, rep.worst_margin);
    }

    #[test]
    fn punctured_small_run() {
        let rep = verify_punctured_disk(&[0.1, 0.5, 0.9], 20, 1).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.samples.len(), 60);
    }

    #[test]
    fn rate_needs_six_levels() {
        let b = GeodesicBox::from_reals(0.0, 1.0, 2.0, 3.0).unwrap();
        let xi = HolderFunction::bump(&b, 1.0).unwrap();
        assert!(matches!(
            verify_rate(&xi, &Deformation::Identity, 2, 5, 0.5),
            Err(Error::InsufficientLevels { .. })
        ));
    }
}
