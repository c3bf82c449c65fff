//! Dyadic evaluation of the Liouville functional and its complexification.
//!
//! For a test function `ξ` on the box `[a,b]×[c,d]` and a boundary map
//! `F = f ∘ γ⁻¹`, level `n` of the series is
//!
//! ```text
//! I_n = Σ_{i,j=1}^{2ⁿ} ξ(a_i, c_j) · log cr(F(a_{i-1}), F(a_i), F(c_{j-1}), F(c_j))
//! ```
//!
//! over the normalized-euclidean partition of the box. Cells are summed in
//! fixed row-major order, rows in fixed blocks, so results do not depend
//! on the thread count.
//!
//! Raw partial sums of a Lipschitz test function converge like `2⁻ⁿ`. By
//! default the evaluator also forms `R_n = 2 I_n - I_{n-1}` and stops as
//! soon as that sequence settles; both sequences are kept in the trace.

pub mod oracle;
pub mod sampler;
pub mod verify;

use rayon::prelude::*;
use serde::Serialize;

use crate::currents::{
    cell_log, liouville_box_measure, partition_box, partition_constant, BoundaryMap, PartitionScheme, MAX_LEVEL, ZERO_MASS,
};
use crate::error::{Error, Result};
use crate::families::{FamilyKind, HolomorphicQCFamily};
use crate::holder::HolderFunction;
use crate::projective::{bracket, log1p_r, GeodesicBox, MobiusTransform, SpherePoint, C64};

pub use oracle::{quadrature_oracle, quadrature_oracle_with, OracleResult};
pub use sampler::{seminorm, Deformation, DistributionHandle, GammaSampler, SeminormEntry, SeminormReport};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Branch guard on `|cr - 1|` per cell, see [`guard_level`].
pub const BRANCH_GUARD: f64 = 0.5;

/// First level (at least 2) from which the guard is enforced: the level at
/// which the partition bound `C(L)·4⁻ⁿ` already keeps undeformed cells of
/// the box inside the guard disk. Coarser levels only require `Re cr > 0`.
pub fn guard_level(b: &GeodesicBox, guard: f64) -> u32 {
    let c = liouville_box_measure(b).map(partition_constant).unwrap_or(f64::INFINITY);
    let cap = (1.0 + guard).ln();
    let mut n = 2;
    while n < MAX_LEVEL && c * 4f64.powi(-(n as i32)) >= cap {
        n += 1;
    }
    n
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Acceleration {
    /// Stop on two consecutive raw deltas below tolerance.
    None,
    /// Also extrapolate with `R_n = 2 I_n - I_{n-1}`.
    Richardson,
}

#[derive(Clone, Copy, Debug)]
pub struct EvalParams {
    pub tolerance: f64,
    pub n_max: u32,
    pub lambda: f64,
    pub eps: f64,
    pub guard: f64,
    pub acceleration: Acceleration,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            tolerance: 1e-6,
            n_max: 12,
            lambda: 1.0,
            eps: 0.1,
            guard: BRANCH_GUARD,
            acceleration: Acceleration::Richardson,
        }
    }
}

impl EvalParams {
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn with_n_max(mut self, n: u32) -> Self {
        self.n_max = n;
        self
    }

    pub fn with_acceleration(mut self, a: Acceleration) -> Self {
        self.acceleration = a;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Tolerance,
    MaxLevel,
    BranchViolation,
}

/// Partial sums and convergence diagnostics of one evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct EvaluationTrace {
    /// Levels `n` of the stored partial sums, starting at 1.
    pub levels: Vec<u32>,
    /// `I_n`.
    pub partial_sums: Vec<C64>,
    /// `|I_n - I_{n-1}|` for every stored level after the first.
    pub deltas: Vec<f64>,
    /// `R_n = 2 I_n - I_{n-1}` for every stored level after the first.
    pub extrapolated: Vec<C64>,
    /// Geometric decay ratio fitted to the deltas.
    pub fitted_ratio: Option<f64>,
    pub termination: Termination,
    /// Returned value: `R_n` or `I_n` depending on which sequence settled.
    pub value: C64,
    /// Last difference of the sequence that produced `value`.
    pub error_estimate: f64,
}

impl EvaluationTrace {
    fn new() -> Self {
        EvaluationTrace {
            levels: Vec::new(),
            partial_sums: Vec::new(),
            deltas: Vec::new(),
            extrapolated: Vec::new(),
            fitted_ratio: None,
            termination: Termination::MaxLevel,
            value: ZERO,
            error_estimate: f64::INFINITY,
        }
    }

    pub fn last_level(&self) -> u32 {
        self.levels.last().copied().unwrap_or(0)
    }

    pub fn last_delta(&self) -> f64 {
        self.deltas.last().copied().unwrap_or(f64::NAN)
    }

    /// `(n, I_n, |I_n - I_{n-1}|)` rows; the first delta is `NaN`.
    pub fn rows(&self) -> Vec<(u32, C64, f64)> {
        self.levels
            .iter()
            .zip(self.partial_sums.iter())
            .enumerate()
            .map(|(k, (&n, &v))| (n, v, if k == 0 { f64::NAN } else { self.deltas[k - 1] }))
            .collect()
    }

    fn push(&mut self, n: u32, value: C64) {
        if let Some(&prev) = self.partial_sums.last() {
            self.deltas.push((value - prev).norm());
            self.extrapolated.push(value * 2.0 - prev);
        }
        self.levels.push(n);
        self.partial_sums.push(value);
        self.fitted_ratio = fit_ratio(&self.deltas);
    }
}

/// Least-squares ratio `q` in `delta_k ≈ C qᵏ` over the nonzero deltas.
pub fn fit_ratio(deltas: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = deltas
        .iter()
        .enumerate()
        .filter(|(_, d)| **d > 0.0 && d.is_finite())
        .map(|(k, d)| (k as f64, d.ln()))
        .collect();
    regression_slope(&pts).map(f64::exp)
}

pub(crate) fn regression_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Corner images with their parameter derivatives.
struct MappedCorners {
    a: Vec<SpherePoint>,
    c: Vec<SpherePoint>,
    da: Option<Vec<SpherePoint>>,
    dc: Option<Vec<SpherePoint>>,
}

/// Representative with the larger coordinate equal to 1, and the matching
/// derivative of that representative.
fn canonical(p: SpherePoint, dp: Option<SpherePoint>) -> (SpherePoint, Option<SpherePoint>) {
    if p.w.norm() >= p.z.norm() {
        let s = p.w;
        let q = SpherePoint { z: p.z / s, w: ONE };
        let dq = dp.map(|d| SpherePoint { z: d.z / s - p.z * d.w / (s * s), w: ZERO });
        (q, dq)
    } else {
        let s = p.z;
        let q = SpherePoint { z: ONE, w: p.w / s };
        let dq = dp.map(|d| SpherePoint { z: ZERO, w: d.w / s - p.w * d.z / (s * s) });
        (q, dq)
    }
}

/// Per-corner weights `ξ(a_i, c_j)`.
enum Weights {
    Separable(Vec<C64>, Vec<C64>),
    General(Vec<Option<f64>>, Vec<Option<f64>>),
}

impl Weights {
    fn build(xi: &HolderFunction, a: &[SpherePoint], c: &[SpherePoint]) -> Weights {
        let us: Vec<Option<f64>> = a.iter().map(|x| xi.u_of(x)).collect();
        let vs: Vec<Option<f64>> = c.iter().map(|y| xi.v_of(y)).collect();
        match xi.factors() {
            Some((p, q)) => Weights::Separable(
                us.iter().map(|u| u.map_or(ZERO, &p)).collect(),
                vs.iter().map(|v| v.map_or(ZERO, &q)).collect(),
            ),
            None => Weights::General(us, vs),
        }
    }

    #[inline]
    fn row(&self, i: usize) -> RowWeights<'_> {
        match self {
            Weights::Separable(x, y) => RowWeights::Separable(x[i], y),
            Weights::General(us, vs) => RowWeights::General(us[i], vs),
        }
    }
}

enum RowWeights<'a> {
    Separable(C64, &'a [C64]),
    General(Option<f64>, &'a [Option<f64>]),
}

impl RowWeights<'_> {
    #[inline]
    fn at(&self, xi: &HolderFunction, j: usize) -> C64 {
        match self {
            RowWeights::Separable(x, y) => x * y[j],
            RowWeights::General(u, vs) => match (u, vs[j]) {
                (Some(u), Some(v)) => xi.eval_uv(*u, v),
                _ => ZERO,
            },
        }
    }

    fn is_zero_row(&self) -> bool {
        match self {
            RowWeights::Separable(x, _) => *x == ZERO,
            RowWeights::General(u, _) => u.is_none(),
        }
    }
}

fn all_real(pts: &[SpherePoint]) -> bool {
    pts.iter().all(|p| p.z.im == 0.0 && p.w.im == 0.0)
}

const BLOCK_ROWS: usize = 32;

/// Level sum of `ξ(a_i,c_j) · log cr` (or its `t`-derivative).
fn level_sum(xi: &HolderFunction, level: u32, corners: &MappedCorners, w: &Weights, guard: f64, derivative: bool) -> Result<C64> {
    let guard = if level >= guard_level(xi.support(), guard) { guard } else { f64::INFINITY };
    let n = corners.a.len() - 1;
    let blocks: Vec<(usize, usize)> =
        (0..n.div_ceil(BLOCK_ROWS)).map(|b| (1 + b * BLOCK_ROWS, ((b + 1) * BLOCK_ROWS).min(n))).collect();
    let real = !derivative && all_real(&corners.a) && all_real(&corners.c);
    let sums: Vec<Result<C64>> = blocks
        .par_iter()
        .map(|&(lo, hi)| {
            if derivative {
                block_derivative(xi, level, corners, w, guard, lo, hi)
            } else if real {
                block_real(xi, level, corners, w, guard, lo, hi)
            } else {
                block_complex(xi, level, corners, w, guard, lo, hi)
            }
        })
        .collect();
    let mut total = ZERO;
    for s in sums {
        total += s?;
    }
    Ok(total)
}

fn block_real(
    xi: &HolderFunction,
    level: u32,
    m: &MappedCorners,
    w: &Weights,
    guard: f64,
    lo: usize,
    hi: usize,
) -> Result<C64> {
    let az: Vec<f64> = m.a.iter().map(|p| p.z.re).collect();
    let aw: Vec<f64> = m.a.iter().map(|p| p.w.re).collect();
    let cz: Vec<f64> = m.c.iter().map(|p| p.z.re).collect();
    let cw: Vec<f64> = m.c.iter().map(|p| p.w.re).collect();
    let n = m.c.len() - 1;
    let cd: Vec<f64> = (1..=n).map(|j| cz[j - 1] * cw[j] - cz[j] * cw[j - 1]).collect();
    let br = |i: usize, j: usize| az[i] * cw[j] - cz[j] * aw[i];
    let mut prev: Vec<f64> = (0..=n).map(|j| br(lo - 1, j)).collect();
    let mut cur = vec![0.0; n + 1];
    let g2 = guard * guard;
    let mut total = ZERO;
    for i in lo..=hi {
        for (j, c) in cur.iter_mut().enumerate() {
            *c = br(i, j);
        }
        let ab = az[i - 1] * aw[i] - az[i] * aw[i - 1];
        let row = w.row(i);
        let skip_logs = row.is_zero_row();
        let mut acc = ZERO;
        for j in 1..=n {
            let x = ab * cd[j - 1] / (prev[j] * cur[j - 1]);
            if x.abs() < ZERO_MASS {
                continue;
            }
            if !(1.0 + x > 0.0) || (level >= 2 && !(x * x < g2)) {
                return Err(Error::BranchViolation { level, i, j, re: 1.0 + x, im: 0.0 });
            }
            if skip_logs {
                continue;
            }
            let wt = row.at(xi, j);
            if wt != ZERO {
                acc += wt * log1p_r(x);
            }
        }
        total += acc;
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(total)
}

fn block_complex(
    xi: &HolderFunction,
    level: u32,
    m: &MappedCorners,
    w: &Weights,
    guard: f64,
    lo: usize,
    hi: usize,
) -> Result<C64> {
    let n = m.c.len() - 1;
    let cd: Vec<C64> = (1..=n).map(|j| bracket(&m.c[j - 1], &m.c[j])).collect();
    let mut prev: Vec<C64> = (0..=n).map(|j| bracket(&m.a[lo - 1], &m.c[j])).collect();
    let mut cur = vec![ZERO; n + 1];
    let mut total = ZERO;
    for i in lo..=hi {
        for (j, c) in cur.iter_mut().enumerate() {
            *c = bracket(&m.a[i], &m.c[j]);
        }
        let ab = bracket(&m.a[i - 1], &m.a[i]);
        let row = w.row(i);
        let mut acc = ZERO;
        for j in 1..=n {
            let x = ab * cd[j - 1] / (prev[j] * cur[j - 1]);
            let l = cell_log(x, level, i, j, guard)?;
            let wt = row.at(xi, j);
            if wt != ZERO {
                acc += wt * l;
            }
        }
        total += acc;
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(total)
}

fn block_derivative(
    xi: &HolderFunction,
    level: u32,
    m: &MappedCorners,
    w: &Weights,
    guard: f64,
    lo: usize,
    hi: usize,
) -> Result<C64> {
    let (da, dc) = match (&m.da, &m.dc) {
        (Some(a), Some(c)) => (a, c),
        _ => return Err(Error::UnsupportedFamily("derivative without corner derivatives")),
    };
    // log-derivative of a bracket: ([Ṗ,Q] + [P,Q̇]) / [P,Q]
    let dlog = |p: &SpherePoint, dp: &SpherePoint, q: &SpherePoint, dq: &SpherePoint| -> (C64, C64) {
        let b = bracket(p, q);
        (b, (bracket(dp, q) + bracket(p, dq)) / b)
    };
    let n = m.c.len() - 1;
    let cd: Vec<(C64, C64)> = (1..=n).map(|j| dlog(&m.c[j - 1], &dc[j - 1], &m.c[j], &dc[j])).collect();
    let mut prev: Vec<(C64, C64)> = (0..=n).map(|j| dlog(&m.a[lo - 1], &da[lo - 1], &m.c[j], &dc[j])).collect();
    let mut cur = vec![(ZERO, ZERO); n + 1];
    let mut total = ZERO;
    for i in lo..=hi {
        for (j, c) in cur.iter_mut().enumerate() {
            *c = dlog(&m.a[i], &da[i], &m.c[j], &dc[j]);
        }
        let ab = dlog(&m.a[i - 1], &da[i - 1], &m.a[i], &da[i]);
        let row = w.row(i);
        let mut acc = ZERO;
        for j in 1..=n {
            let x = ab.0 * cd[j - 1].0 / (prev[j].0 * cur[j - 1].0);
            // validates the branch exactly as the value series does
            cell_log(x, level, i, j, guard)?;
            if x.norm() < ZERO_MASS {
                continue;
            }
            let wt = row.at(xi, j);
            if wt == ZERO {
                continue;
            }
            // d/dt log(1 + x) = x (D_ab + D_cd - D_{a c'} - D_{a' c}) / (1 + x)
            let dx = x * (ab.1 + cd[j - 1].1 - prev[j].1 - cur[j - 1].1);
            acc += wt * dx / (ONE + x);
        }
        total += acc;
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(total)
}

/// How partition corners are carried to the sphere.
pub(crate) trait CornerMap: Sync {
    fn map(&self, p: &SpherePoint) -> (SpherePoint, Option<SpherePoint>);
}

pub(crate) struct Through<'a> {
    pub(crate) gamma_inv: MobiusTransform,
    pub(crate) f: &'a dyn BoundaryMap,
}

impl CornerMap for Through<'_> {
    fn map(&self, p: &SpherePoint) -> (SpherePoint, Option<SpherePoint>) {
        let q = self.gamma_inv.apply(p);
        self.f.apply_with_derivative(&q)
    }
}

/// Image of `p` under `f^t` with its `t`-derivative, canonically scaled.
/// Families without a closed form use Richardson-extrapolated central
/// differences with step `1e-4·min(r0, 1)`.
pub(crate) fn family_point_derivative(fam: &HolomorphicQCFamily, t: C64, p: &SpherePoint) -> (SpherePoint, SpherePoint) {
    if fam.has_closed_derivative() {
        let (q, dq) = fam.map_with_derivative(t, p);
        if let (q, Some(dq)) = canonical(q, dq) {
            return (q, dq);
        }
    }
    let h = 1e-4 * fam.r0().min(1.0);
    let (p0, _) = canonical(fam.map(t, p), None);
    let at = |s: f64| {
        let r = fam.map(t + s, p);
        if p0.w == ONE {
            r.z / r.w
        } else {
            r.w / r.z
        }
    };
    let d = |h: f64| (at(h) - at(-h)) / (2.0 * h);
    let rich = (d(h / 2.0) * 4.0 - d(h)) / 3.0;
    let dp = if p0.w == ONE { SpherePoint { z: rich, w: ZERO } } else { SpherePoint { z: ZERO, w: rich } };
    (p0, dp)
}

struct DifferencedFamily<'a> {
    gamma_inv: MobiusTransform,
    fam: &'a HolomorphicQCFamily,
    t: C64,
}

impl CornerMap for DifferencedFamily<'_> {
    fn map(&self, p: &SpherePoint) -> (SpherePoint, Option<SpherePoint>) {
        let (q, dq) = family_point_derivative(self.fam, self.t, &self.gamma_inv.apply(p));
        (q, Some(dq))
    }
}

fn corners_at_level(xi: &HolderFunction, level: u32, map: &dyn CornerMap, derivative: bool) -> Result<(MappedCorners, Weights)> {
    let part = partition_box(xi.support(), level, PartitionScheme::NormalizedEuclidean)?;
    let weights = Weights::build(xi, part.a_points(), part.c_points());
    let carry = |pts: &[SpherePoint]| -> (Vec<SpherePoint>, Option<Vec<SpherePoint>>) {
        let mut out = Vec::with_capacity(pts.len());
        let mut dout = Vec::with_capacity(pts.len());
        let mut have_d = derivative;
        for p in pts {
            let (q, dq) = map.map(p);
            let (q, dq) = canonical(q, dq);
            out.push(q);
            match dq {
                Some(d) => dout.push(d),
                None => have_d = false,
            }
        }
        (out, if have_d { Some(dout) } else { None })
    };
    let (a, da) = carry(part.a_points());
    let (c, dc) = carry(part.c_points());
    Ok((MappedCorners { a, c, da, dc }, weights))
}

/// Computes `I_n` for each level in `levels`, without termination.
pub(crate) fn series_levels(
    xi: &HolderFunction,
    map: &dyn CornerMap,
    levels: std::ops::RangeInclusive<u32>,
    guard: f64,
    derivative: bool,
) -> Result<EvaluationTrace> {
    let mut trace = EvaluationTrace::new();
    for n in levels {
        let (corners, w) = corners_at_level(xi, n, map, derivative)?;
        let s = level_sum(xi, n, &corners, &w, guard, derivative)?;
        trace.push(n, s);
    }
    trace.value = trace.partial_sums.last().copied().unwrap_or(ZERO);
    trace.error_estimate = trace.deltas.last().copied().unwrap_or(f64::INFINITY);
    Ok(trace)
}

/// Runs the series up to `n_max` with tolerance termination.
pub(crate) fn run_series(
    xi: &HolderFunction,
    map: &dyn CornerMap,
    params: &EvalParams,
    derivative: bool,
) -> Result<(C64, EvaluationTrace)> {
    if params.n_max < 2 || params.n_max > MAX_LEVEL {
        return Err(Error::ParameterOutOfRange(format!("n_max = {} not in [2, {MAX_LEVEL}]", params.n_max)));
    }
    let mut trace = EvaluationTrace::new();
    // the neighborhood check must run before any early stop
    let first_stop = guard_level(xi.support(), params.guard).min(params.n_max);
    for n in 1..=params.n_max {
        let (corners, w) = corners_at_level(xi, n, map, derivative)?;
        let s = match level_sum(xi, n, &corners, &w, params.guard, derivative) {
            Ok(s) => s,
            Err(e @ Error::BranchViolation { .. }) => {
                trace.termination = Termination::BranchViolation;
                return Err(e);
            }
            Err(e) => return Err(e),
        };
        trace.push(n, s);
        if n < first_stop {
            continue;
        }
        let k = trace.deltas.len();
        // two consecutive raw deltas below tolerance
        if k >= 2 && trace.deltas[k - 1] < params.tolerance && trace.deltas[k - 2] < params.tolerance {
            trace.termination = Termination::Tolerance;
            trace.value = s;
            trace.error_estimate = trace.deltas[k - 1];
            return Ok((s, trace));
        }
        // two consecutive extrapolated differences below tolerance
        if params.acceleration == Acceleration::Richardson && n >= 5 {
            let r = &trace.extrapolated;
            let m = r.len();
            let d = (r[m - 1] - r[m - 2]).norm();
            if d < params.tolerance && (r[m - 2] - r[m - 3]).norm() < params.tolerance {
                trace.termination = Termination::Tolerance;
                trace.value = r[r.len() - 1];
                trace.error_estimate = d;
                return Ok((trace.value, trace));
            }
        }
    }
    trace.termination = Termination::MaxLevel;
    match params.acceleration {
        Acceleration::Richardson if trace.extrapolated.len() >= 2 => {
            let r = &trace.extrapolated;
            trace.value = r[r.len() - 1];
            trace.error_estimate = (r[r.len() - 1] - r[r.len() - 2]).norm();
        }
        _ => {
            trace.value = *trace.partial_sums.last().expect("at least one level");
            trace.error_estimate = trace.last_delta();
        }
    }
    Err(Error::ToleranceNotReached(Box::new(trace)))
}

/// `𝓛(f)(ξ∘γ)` for a boundary map `f` preserving the real line.
pub fn eval_current(
    xi: &HolderFunction,
    gamma: &MobiusTransform,
    boundary_map: &dyn BoundaryMap,
    params: &EvalParams,
) -> Result<(C64, EvaluationTrace)> {
    let map = Through { gamma_inv: gamma.inverse(), f: boundary_map };
    run_series(xi, &map, params, false)
}

fn branch_to_neighborhood(e: Error) -> Error {
    match e {
        Error::BranchViolation { level, i, j, re, im } => Error::OutsideNeighborhood(format!(
            "cell ({i},{j}) at level {level} has cr = {re}{im:+}i outside the principal branch disk"
        )),
        other => other,
    }
}

/// `𝓛̂(f^t)(ξ∘γ)` for a holomorphic family at complex `t`.
pub fn eval_extension(
    xi: &HolderFunction,
    gamma: &MobiusTransform,
    fam: &HolomorphicQCFamily,
    t: C64,
    params: &EvalParams,
) -> Result<(C64, EvaluationTrace)> {
    fam.check_parameter(t)?;
    let member = crate::families::FamilyMember { fam: fam.clone(), t };
    let map = Through { gamma_inv: gamma.inverse(), f: &member };
    run_series(xi, &map, params, false).map_err(branch_to_neighborhood)
}

/// `d/dt 𝓛̂(f^t)(ξ∘γ)`: closed-form corner derivatives when the family
/// has them, otherwise differences with step `1e-4·r0`.
pub fn eval_derivative(
    xi: &HolderFunction,
    gamma: &MobiusTransform,
    fam: &HolomorphicQCFamily,
    t: C64,
    params: &EvalParams,
) -> Result<(C64, EvaluationTrace)> {
    fam.check_parameter(t)?;
    let gamma_inv = gamma.inverse();
    let out = if fam.has_closed_derivative() {
        let member = crate::families::FamilyMember { fam: fam.clone(), t };
        let map = Through { gamma_inv, f: &member };
        run_series(xi, &map, params, true)
    } else {
        let map = DifferencedFamily { gamma_inv, fam, t };
        run_series(xi, &map, params, true)
    };
    out.map_err(branch_to_neighborhood)
}

/// Whether a family leaves the boundary fixed pointwise for every `t`.
pub fn fixes_boundary(fam: &HolomorphicQCFamily) -> bool {
    match fam.kind() {
        FamilyKind::Identity | FamilyKind::VerticalStretch => true,
        FamilyKind::PowerStretch => false,
        FamilyKind::Composed(o, i) => fixes_boundary(o) && fixes_boundary(i),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::currents::IdentityMap;
    use crate::families::FamilyMember;
    use crate::projective::GeodesicBox;
    use approx::assert_relative_eq;

    fn unit_box() -> GeodesicBox {
        GeodesicBox::from_reals(0.0, 1.0, 2.0, 3.0).unwrap()
    }

    #[test]
    fn step_box_identity() {
        let xi = HolderFunction::indicator(&unit_box());
        let (v, tr) = eval_current(&xi, &MobiusTransform::identity(), &IdentityMap, &EvalParams::default()).unwrap();
        assert!((v - C64::new((4.0f64 / 3.0).ln(), 0.0)).norm() < 1e-12);
        assert_eq!(tr.termination, Termination::Tolerance);
    }

    #[test]
    fn step_box_power_stretch() {
        let xi = HolderFunction::indicator(&unit_box());
        let fam = HolomorphicQCFamily::power_stretch(1.5).unwrap();
        let f = FamilyMember { fam: fam.clone(), t: ONE };
        let (v, _) = eval_current(&xi, &MobiusTransform::identity(), &f, &EvalParams::default()).unwrap();
        assert!((v.re - (32.0f64 / 27.0).ln()).abs() < 1e-12);
        let t = C64::new(0.0, 0.1);
        let (v, _) = eval_extension(&xi, &MobiusTransform::identity(), &fam, t, &EvalParams::default()).unwrap();
        let u = (2f64.ln() * (ONE + t)).exp();
        let w = (3f64.ln() * (ONE + t)).exp();
        let want = (u * (w - 1.0) / (w * (u - 1.0))).ln();
        assert!((v - want).norm() < 1e-12, "{v} vs {want}");
    }

    #[test]
    fn derivative_spot_value() {
        let xi = HolderFunction::indicator(&unit_box());
        let fam = HolomorphicQCFamily::power_stretch(1.0).unwrap();
        let (d, _) = eval_derivative(&xi, &MobiusTransform::identity(), &fam, ZERO, &EvalParams::default()).unwrap();
        assert_relative_eq!(d.re, 0.5 * 3f64.ln() - 2f64.ln(), epsilon = 1e-12);
        assert!(d.im.abs() < 1e-14);
        let comp = HolomorphicQCFamily::composed(fam.clone(), HolomorphicQCFamily::vertical_stretch(1.0).unwrap()).unwrap();
        let (dc, _) = eval_derivative(&xi, &MobiusTransform::identity(), &comp, ZERO, &EvalParams::default()).unwrap();
        assert_relative_eq!(dc.re, d.re, epsilon = 1e-8);
    }

    #[test]
    fn bump_real_and_complex_paths_agree() {
        let xi = HolderFunction::bump(&unit_box(), 1.0).unwrap();
        let fam = HolomorphicQCFamily::power_stretch(1.0).unwrap();
        let t = C64::new(0.3, 0.0);
        let p = EvalParams::default().with_n_max(8);
        let f = FamilyMember { fam: fam.clone(), t };
        let real = eval_current(&xi, &MobiusTransform::identity(), &f, &p);
        let cplx = eval_extension(&xi, &MobiusTransform::identity(), &fam, t + C64::new(0.0, 1e-300), &p);
        let value = |r: Result<(C64, EvaluationTrace)>| match r {
            Ok((v, _)) => v,
            Err(Error::ToleranceNotReached(tr)) => tr.value,
            Err(e) => panic!("{e}"),
        };
        let (a, b) = (value(real), value(cplx));
        assert!((a - b).norm() < 1e-12, "{a} {b}");
    }

    #[test]
    fn trace_rows_and_ratio() {
        let xi = HolderFunction::bump(&unit_box(), 1.0).unwrap();
        let p = EvalParams::default().with_tolerance(1e-30).with_n_max(7);
        match eval_current(&xi, &MobiusTransform::identity(), &IdentityMap, &p) {
            Err(Error::ToleranceNotReached(tr)) => {
                assert_eq!(tr.levels, (1..=7).collect::<Vec<_>>());
                assert_eq!(tr.deltas.len(), 6);
                assert!(tr.rows()[0].2.is_nan());
                let q = tr.fitted_ratio.unwrap();
                assert!(q > 0.3 && q < 0.7, "ratio {q}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn branch_guard_reports_outside_neighborhood() {
        // a strong twist sends coarse cells far from 1
        let xi = HolderFunction::indicator(&GeodesicBox::from_reals(0.1, 0.5, 2.0, 10.0).unwrap());
        let fam = HolomorphicQCFamily::power_stretch(1.9).unwrap();
        let p = EvalParams { guard: 0.05, ..EvalParams::default() };
        let r = eval_extension(&xi, &MobiusTransform::identity(), &fam, C64::new(0.0, 1.8), &p);
        assert!(matches!(r, Err(Error::OutsideNeighborhood(_))), "{r:?}");
    }
}
