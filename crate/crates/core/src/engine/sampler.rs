//! Finite samples of `PSL₂(ℝ)` and the sampled seminorm.

use std::f64::consts::PI;

use serde::Serialize;

use crate::currents::IdentityMap;
use crate::error::{Error, Result};
use crate::families::{CyclicFuchsianGroup, HolomorphicQCFamily};
use crate::holder::{HolderFunction, Z0};
use crate::projective::{boundary_angle, from_zero_one_infinity, point_at_angle, MobiusTransform, SpherePoint, C64};

use super::{eval_current, eval_extension, EvalParams, EvaluationTrace};

/// All positively oriented triples of an `m`-point angle grid, each giving
/// the transform sending `(0, 1, ∞)` onto the triple. Grids for `m` and
/// `2m` are nested, so the sampled supremum is monotone along doublings.
#[derive(Clone, Copy, Debug)]
pub struct GammaSampler {
    m: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaSample {
    /// Grid indices of the images of `0, 1, ∞`.
    pub indices: [usize; 3],
    /// Angles of those images.
    pub angles: [f64; 3],
    #[serde(skip)]
    pub transform: MobiusTransform,
}

impl GammaSampler {
    pub fn new(m: usize) -> Result<Self> {
        if m < 4 || m % 4 != 0 {
            return Err(Error::ParameterOutOfRange(format!("resolution {m} must be a positive multiple of 4")));
        }
        Ok(GammaSampler { m })
    }

    pub fn resolution(&self) -> usize {
        self.m
    }

    pub fn grid(&self) -> Vec<SpherePoint> {
        (0..self.m).map(|k| self.point(k)).collect()
    }

    fn angle(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.m as f64
    }

    fn point(&self, k: usize) -> SpherePoint {
        // exact images for the three reference points
        if k == 0 {
            SpherePoint::INFINITY
        } else if 2 * k == self.m {
            SpherePoint::ZERO
        } else if 4 * k == 3 * self.m {
            SpherePoint::ONE
        } else {
            point_at_angle(self.angle(k), Z0)
        }
    }

    pub fn samples(&self) -> Vec<GammaSample> {
        let m = self.m;
        let pts = self.grid();
        let mut out = Vec::with_capacity(m * (m - 1) * (m - 2) / 2);
        for p in 0..m {
            for q in 0..m {
                for r in 0..m {
                    if p == q || q == r || p == r {
                        continue;
                    }
                    // counterclockwise p → q → r
                    if (q + m - p) % m >= (r + m - p) % m {
                        continue;
                    }
                    let transform = from_zero_one_infinity(&pts[p], &pts[q], &pts[r]).expect("distinct grid points");
                    out.push(GammaSample {
                        indices: [p, q, r],
                        angles: [self.angle(p), self.angle(q), self.angle(r)],
                        transform,
                    });
                }
            }
        }
        out
    }
}

/// The boundary map a distribution is built from.
#[derive(Clone, Debug)]
pub enum Deformation {
    Identity,
    Family { fam: HolomorphicQCFamily, t: C64 },
}

/// `𝓛̂(f)` restricted to test functions supported away from the fixed
/// points of the group.
#[derive(Clone, Debug)]
pub struct DistributionHandle {
    pub deformation: Deformation,
    pub group: Option<CyclicFuchsianGroup>,
    pub params: EvalParams,
}

impl DistributionHandle {
    pub fn new(deformation: Deformation, group: Option<CyclicFuchsianGroup>, params: EvalParams) -> Result<Self> {
        if let Deformation::Family { fam, t } = &deformation {
            fam.check_parameter(*t)?;
        }
        Ok(DistributionHandle { deformation, group, params })
    }

    /// Rejects supports meeting `0` or `∞` when a group is attached.
    pub fn check_support(&self, xi: &HolderFunction) -> Result<()> {
        if self.group.is_none() {
            return Ok(());
        }
        let q = xi.support().quadruple();
        for (x, y) in [(q.a, q.b), (q.c, q.d)] {
            let (tx, ty) = (boundary_angle(&x, Z0), boundary_angle(&y, Z0));
            let inside = |theta: f64| {
                let span = (ty - tx).rem_euclid(2.0 * PI);
                let off = (theta - tx).rem_euclid(2.0 * PI);
                off <= span
            };
            if inside(0.0) || inside(PI) {
                return Err(Error::ParameterOutOfRange(
                    "test function support meets a fixed point of the group".into(),
                ));
            }
        }
        Ok(())
    }

    /// `W(ξ∘γ)` with its trace.
    pub fn evaluate(&self, xi: &HolderFunction, gamma: &MobiusTransform) -> Result<(C64, EvaluationTrace)> {
        self.check_support(xi)?;
        match &self.deformation {
            Deformation::Identity => eval_current(xi, gamma, &IdentityMap, &self.params),
            Deformation::Family { fam, t } => eval_extension(xi, gamma, fam, *t, &self.params),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeminormEntry {
    pub sample: GammaSample,
    /// `|W(ξ∘γ)|` when the evaluation converged.
    pub value: Option<C64>,
    pub error: Option<String>,
    pub trace: Option<EvaluationTrace>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeminormReport {
    /// Sampled supremum of `|W(ξ∘γ)|` over converged evaluations.
    pub value: f64,
    pub argmax: Option<usize>,
    pub entries: Vec<SeminormEntry>,
    pub failures: usize,
}

/// `sup_γ |W(ξ∘γ)|` over the sampler's transforms. Evaluations that do not
/// converge are recorded but do not enter the supremum.
pub fn seminorm(handle: &DistributionHandle, xi: &HolderFunction, sampler: &GammaSampler) -> Result<SeminormReport> {
    handle.check_support(xi)?;
    let mut entries = Vec::new();
    let mut best = 0.0;
    let mut argmax = None;
    let mut failures = 0;
    for (k, sample) in sampler.samples().into_iter().enumerate() {
        match handle.evaluate(xi, &sample.transform) {
            Ok((v, tr)) => {
                if v.norm() > best || argmax.is_none() {
                    best = v.norm();
                    argmax = Some(k);
                }
                entries.push(SeminormEntry { sample, value: Some(v), error: None, trace: Some(tr) });
            }
            Err(Error::ToleranceNotReached(tr)) => {
                failures += 1;
                entries.push(SeminormEntry {
                    sample,
                    value: None,
                    error: Some("tolerance not reached".into()),
                    trace: Some(*tr),
                });
            }
            Err(e @ (Error::OutsideNeighborhood(_) | Error::BranchViolation { .. })) => {
                failures += 1;
                entries.push(SeminormEntry { sample, value: None, error: Some(e.to_string()), trace: None });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SeminormReport { value: best, argmax, entries, failures })
}
