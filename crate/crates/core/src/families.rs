//! Closed-form holomorphic families of quasiconformal maps fixing
//! `0, 1, ∞`, their Beltrami coefficients, and cyclic Fuchsian groups.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::projective::{MobiusTransform, SpherePoint, C64};

const ONE: C64 = C64::new(1.0, 0.0);
const ZERO: C64 = C64::new(0.0, 0.0);

type Evaluator = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// A measurable `μ` with `‖μ‖_∞ < 1`, given by a pointwise evaluator and
/// a reported norm that bounds every sampled value.
#[derive(Clone)]
pub struct BeltramiCoefficient {
    eval: Evaluator,
    norm: f64,
}

impl fmt::Debug for BeltramiCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BeltramiCoefficient").field("norm", &self.norm).finish()
    }
}

/// Log-polar probe grid: 100 radii in `[1e-3, 1e3]` times 100 angles.
pub fn probe_grid() -> Vec<C64> {
    let mut pts = Vec::with_capacity(10_000);
    for i in 0..100 {
        let r = 10f64.powf(-3.0 + 6.0 * i as f64 / 99.0);
        for j in 0..100 {
            let th = TAU * (j as f64 + 0.5) / 100.0;
            pts.push(C64::from_polar(r, th));
        }
    }
    pts
}

impl BeltramiCoefficient {
    /// Coefficient with a known norm; fails when `norm ≥ 1`.
    pub fn new<F>(eval: F, norm: f64) -> Result<Self>
    where
        F: Fn(C64) -> C64 + Send + Sync + 'static,
    {
        if !(norm < 1.0) {
            return Err(Error::NormOverflow(norm));
        }
        Ok(BeltramiCoefficient { eval: Arc::new(eval), norm })
    }

    /// Coefficient whose norm is the sampled sup over [`probe_grid`].
    pub fn sampled<F>(eval: F) -> Result<Self>
    where
        F: Fn(C64) -> C64 + Send + Sync + 'static,
    {
        let norm = probe_grid().into_iter().map(|z| eval(z).norm()).fold(0.0, f64::max);
        Self::new(eval, norm)
    }

    pub fn zero() -> Self {
        BeltramiCoefficient { eval: Arc::new(|_| ZERO), norm: 0.0 }
    }

    pub fn constant(c: C64) -> Result<Self> {
        Self::new(move |_| c, c.norm())
    }

    #[inline]
    pub fn eval(&self, z: C64) -> C64 {
        (self.eval)(z)
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn dilatation(&self) -> f64 {
        (1.0 + self.norm) / (1.0 - self.norm)
    }

    pub fn sampled_sup(&self) -> f64 {
        probe_grid().into_iter().map(|z| self.eval(z).norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: C64) -> Result<Self> {
        let inner = self.eval.clone();
        Self::new(move |z| s * inner(z), self.norm * s.norm())
    }
}

/// A map together with its Wirtinger derivatives, used for pullbacks.
pub trait PlaneMap: Send + Sync {
    fn map(&self, z: C64) -> C64;
    /// `(f_z, f_z̄)` at `z`.
    fn wirtinger(&self, z: C64) -> (C64, C64);
}

/// Beltrami coefficient of `g ∘ f` where `μ = μ_f` and `ν = μ_g`.
pub fn compose_beltrami(
    mu: &BeltramiCoefficient,
    nu_on_target: &BeltramiCoefficient,
    f_mu: Arc<dyn PlaneMap>,
) -> Result<BeltramiCoefficient> {
    let (a, b) = (mu.norm(), nu_on_target.norm());
    let bound = (a + b) / (1.0 + a * b);
    let m = mu.clone();
    let n = nu_on_target.clone();
    let eval = move |z: C64| {
        let (fz, _) = f_mu.wirtinger(z);
        let theta = if fz.norm() > 0.0 { fz.conj() / fz } else { ONE };
        let nf = n.eval(f_mu.map(z)) * theta;
        let mz = m.eval(z);
        (mz + nf) / (ONE + mz.conj() * nf)
    };
    let sampled = probe_grid().into_iter().map(&eval).map(|v| v.norm()).fold(0.0, f64::max);
    if !(sampled < 1.0) {
        return Err(Error::NormOverflow(sampled));
    }
    BeltramiCoefficient::new(eval, bound.max(sampled))
}

/// Extension to the lower half-plane by `μ(z) = conj μ(z̄)`.
pub fn reflect_extension(mu_upper: &BeltramiCoefficient) -> BeltramiCoefficient {
    let m = mu_upper.clone();
    BeltramiCoefficient {
        eval: Arc::new(move |z: C64| if z.im >= 0.0 { m.eval(z) } else { m.eval(z.conj()).conj() }),
        norm: mu_upper.norm(),
    }
}

#[derive(Clone, Debug)]
pub enum FamilyKind {
    Identity,
    PowerStretch,
    VerticalStretch,
    /// `outer^t ∘ inner^t`.
    Composed(Box<HolomorphicQCFamily>, Box<HolomorphicQCFamily>),
}

/// `t ↦ f^t`, a holomorphic family of quasiconformal maps of the sphere
/// fixing `0, 1, ∞`.
///
/// Power stretch: `f^t(z) = z|z|^t`, `μ = t/(t+2)·z/z̄`.
/// Vertical stretch: `x + iy ↦ x + (1+t)iy` on the closed upper
/// half-plane, the identity below; its boundary map is the identity.
/// Both need `Re t > -1` on top of `|t| < r0`.
#[derive(Clone, Debug)]
pub struct HolomorphicQCFamily {
    kind: FamilyKind,
    r0: f64,
}

impl HolomorphicQCFamily {
    pub fn identity() -> Self {
        HolomorphicQCFamily { kind: FamilyKind::Identity, r0: f64::INFINITY }
    }

    pub fn power_stretch(r0: f64) -> Result<Self> {
        Self::checked(FamilyKind::PowerStretch, r0)
    }

    pub fn vertical_stretch(r0: f64) -> Result<Self> {
        Self::checked(FamilyKind::VerticalStretch, r0)
    }

    pub fn composed(outer: HolomorphicQCFamily, inner: HolomorphicQCFamily) -> Result<Self> {
        let r0 = outer.r0.min(inner.r0);
        Self::checked(FamilyKind::Composed(Box::new(outer), Box::new(inner)), r0)
    }

    fn checked(kind: FamilyKind, r0: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0 < 2.0) {
            return Err(Error::ParameterOutOfRange(format!("r0 = {r0} not in (0, 2)")));
        }
        let fam = HolomorphicQCFamily { kind, r0 };
        for k in 0..8 {
            let t = C64::from_polar(0.5 * r0.min(1.0), TAU * k as f64 / 8.0);
            for (x, want) in [(SpherePoint::ZERO, SpherePoint::ZERO), (SpherePoint::ONE, SpherePoint::ONE)] {
                let y = fam.map(t, &x);
                if !y.projectively_eq(&want, 1e-12) {
                    return Err(Error::ParameterOutOfRange("family does not fix 0 and 1".into()));
                }
            }
            if !fam.map(t, &SpherePoint::INFINITY).is_infinity() {
                return Err(Error::ParameterOutOfRange("family does not fix infinity".into()));
            }
        }
        Ok(fam)
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn tag(&self) -> &'static str {
        match self.kind {
            FamilyKind::Identity => "identity",
            FamilyKind::PowerStretch => "power",
            FamilyKind::VerticalStretch => "vertical",
            FamilyKind::Composed(..) => "composed",
        }
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// Norm of `μ(t)`.
    pub fn mu_norm(&self, t: C64) -> f64 {
        match &self.kind {
            FamilyKind::Identity => 0.0,
            FamilyKind::PowerStretch | FamilyKind::VerticalStretch => (t / (t + 2.0)).norm(),
            FamilyKind::Composed(o, i) => {
                let (a, b) = (o.mu_norm(t), i.mu_norm(t));
                (a + b) / (1.0 + a * b)
            }
        }
    }

    /// Maximal dilatation of the single map `f^t`.
    pub fn dilatation(&self, t: C64) -> f64 {
        let k = self.mu_norm(t);
        (1.0 + k) / (1.0 - k)
    }

    /// `|t| < r0` and `‖μ(t)‖ < 1`.
    pub fn check_parameter(&self, t: C64) -> Result<()> {
        if !(t.norm() < self.r0) {
            return Err(Error::ParameterOutOfRange(format!("|t| = {} not below r0 = {}", t.norm(), self.r0)));
        }
        if !(self.mu_norm(t) < 1.0) {
            return Err(Error::ParameterOutOfRange(format!("t = {t} gives ‖μ‖ ≥ 1")));
        }
        if let FamilyKind::Composed(o, i) = &self.kind {
            o.check_parameter(t)?;
            i.check_parameter(t)?;
        }
        Ok(())
    }

    /// Beltrami coefficient `μ(t)`.
    pub fn beltrami(&self, t: C64) -> Result<BeltramiCoefficient> {
        self.check_parameter(t)?;
        match &self.kind {
            FamilyKind::Identity => Ok(BeltramiCoefficient::zero()),
            FamilyKind::PowerStretch => {
                let k = t / (t + 2.0);
                BeltramiCoefficient::new(
                    move |z: C64| if z.norm() == 0.0 { k } else { k * z / z.conj() },
                    k.norm(),
                )
            }
            FamilyKind::VerticalStretch => {
                let k = -t / (t + 2.0);
                BeltramiCoefficient::new(move |z: C64| if z.im >= 0.0 { k } else { ZERO }, k.norm())
            }
            FamilyKind::Composed(o, i) => {
                let mu = i.beltrami(t)?;
                let nu = o.beltrami(t)?;
                compose_beltrami(&mu, &nu, Arc::new(FamilyMember { fam: (**i).clone(), t }))
            }
        }
    }

    /// `f^t` on a finite point.
    pub fn map_c(&self, t: C64, z: C64) -> C64 {
        match &self.kind {
            FamilyKind::Identity => z,
            FamilyKind::PowerStretch => {
                let r = z.norm();
                if r == 0.0 {
                    z
                } else {
                    z * (t * r.ln()).exp()
                }
            }
            FamilyKind::VerticalStretch => {
                if z.im >= 0.0 {
                    C64::new(z.re, 0.0) + (ONE + t) * C64::new(0.0, z.im)
                } else {
                    z
                }
            }
            FamilyKind::Composed(o, i) => o.map_c(t, i.map_c(t, z)),
        }
    }

    /// `f^t` on the sphere; `∞` is fixed.
    pub fn map(&self, t: C64, p: &SpherePoint) -> SpherePoint {
        self.map_with_derivative(t, p).0
    }

    /// Image of `p` and, when available in closed form, the homogeneous
    /// `t`-derivative of that image representative.
    pub fn map_with_derivative(&self, t: C64, p: &SpherePoint) -> (SpherePoint, Option<SpherePoint>) {
        let zero_pt = SpherePoint { z: ZERO, w: ZERO };
        if p.is_infinity() {
            return (SpherePoint::INFINITY, self.has_closed_derivative().then_some(zero_pt));
        }
        match &self.kind {
            FamilyKind::Identity => (*p, Some(zero_pt)),
            FamilyKind::PowerStretch => {
                let v = p.z / p.w;
                let r = v.norm();
                if r == 0.0 {
                    return (SpherePoint::ZERO, Some(zero_pt));
                }
                let l = r.ln();
                if r >= 1.0 {
                    // (v, |v|^{-t}) avoids overflow for large |v|
                    let w = (-t * l).exp();
                    (SpherePoint { z: v, w }, Some(SpherePoint { z: ZERO, w: -l * w }))
                } else {
                    let z = v * (t * l).exp();
                    (SpherePoint { z, w: ONE }, Some(SpherePoint { z: l * z, w: ZERO }))
                }
            }
            FamilyKind::VerticalStretch => {
                let v = p.z / p.w;
                if v.im > 0.0 {
                    let z = self.map_c(t, v);
                    (SpherePoint::finite(z), Some(SpherePoint { z: C64::new(0.0, v.im), w: ZERO }))
                } else {
                    (SpherePoint::finite(v), Some(zero_pt))
                }
            }
            FamilyKind::Composed(o, i) => {
                let inner = i.map(t, p);
                (o.map(t, &inner), None)
            }
        }
    }

    pub fn has_closed_derivative(&self) -> bool {
        !matches!(self.kind, FamilyKind::Composed(..))
    }

    /// Wirtinger derivatives `(f_z, f_z̄)` of `f^t` at a finite point.
    pub fn wirtinger(&self, t: C64, z: C64) -> (C64, C64) {
        match &self.kind {
            FamilyKind::Identity => (ONE, ZERO),
            FamilyKind::PowerStretch => {
                let r = z.norm();
                if r == 0.0 {
                    return (ONE, ZERO);
                }
                let s = (t * r.ln()).exp();
                (s * (ONE + t * 0.5), s * t * 0.5 * z / z.conj())
            }
            FamilyKind::VerticalStretch => {
                if z.im >= 0.0 {
                    ((t + 2.0) * 0.5, -t * 0.5)
                } else {
                    (ONE, ZERO)
                }
            }
            FamilyKind::Composed(o, i) => {
                let (hz, hzb) = i.wirtinger(t, z);
                let (gw, gwb) = o.wirtinger(t, i.map_c(t, z));
                (gw * hz + gwb * hzb.conj(), gw * hzb + gwb * hz.conj())
            }
        }
    }
}

/// `f^t` for a fixed parameter, as a [`PlaneMap`].
#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub fam: HolomorphicQCFamily,
    pub t: C64,
}

impl PlaneMap for FamilyMember {
    fn map(&self, z: C64) -> C64 {
        self.fam.map_c(self.t, z)
    }

    fn wirtinger(&self, z: C64) -> (C64, C64) {
        self.fam.wirtinger(self.t, z)
    }
}

/// `sup_{|t| ≤ r} K(f^t)`: closed form `1/(1-r)` for the stretch families,
/// an angular sup of the composition bound otherwise.
pub fn max_dilatation(fam: &HolomorphicQCFamily, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < fam.r0()) {
        return Err(Error::ParameterOutOfRange(format!("r = {r} not in (0, r0 = {})", fam.r0())));
    }
    let grid = 4096;
    let mut sup = 1.0f64;
    for k in 0..grid {
        let t = C64::from_polar(r, TAU * k as f64 / grid as f64);
        let m = fam.mu_norm(t);
        if !(m < 1.0) {
            return Err(Error::ParameterOutOfRange(format!("‖μ(t)‖ ≥ 1 on |t| = {r}")));
        }
        sup = sup.max((1.0 + m) / (1.0 - m));
    }
    let closed = match fam.kind() {
        FamilyKind::Identity => Some(1.0),
        // |t/(t+2)| peaks at t = -r on the closed disk
        FamilyKind::PowerStretch | FamilyKind::VerticalStretch => Some(1.0 / (1.0 - r)),
        FamilyKind::Composed(..) => None,
    };
    Ok(closed.map_or(sup, |c| c.max(sup)))
}

/// The group generated by `z ↦ λ_g z`.
#[derive(Clone, Copy, Debug)]
pub struct CyclicFuchsianGroup {
    lambda_g: f64,
}

impl CyclicFuchsianGroup {
    pub fn new(lambda_g: f64) -> Result<Self> {
        if !(lambda_g > 1.0) || !lambda_g.is_finite() {
            return Err(Error::ParameterOutOfRange(format!("multiplier {lambda_g} must exceed 1")));
        }
        Ok(CyclicFuchsianGroup { lambda_g })
    }

    pub fn multiplier(&self) -> f64 {
        self.lambda_g
    }

    pub fn generator(&self) -> MobiusTransform {
        MobiusTransform::from_real(self.lambda_g, 0.0, 0.0, 1.0).expect("nonsingular")
    }

    pub fn element(&self, k: i32) -> MobiusTransform {
        MobiusTransform::from_real(self.lambda_g.powi(k), 0.0, 0.0, 1.0).expect("nonsingular")
    }
}

/// `g' = f^t ∘ g ∘ (f^t)^{-1}`, i.e. `z ↦ λ_g^{1+t} z` for the power family.
pub fn conjugated_group(
    fam: &HolomorphicQCFamily,
    t: C64,
    g: &CyclicFuchsianGroup,
) -> Result<MobiusTransform> {
    match fam.kind() {
        FamilyKind::Identity => Ok(g.generator()),
        FamilyKind::PowerStretch => {
            fam.check_parameter(t)?;
            let m = ((ONE + t) * g.multiplier().ln()).exp();
            MobiusTransform::scaling(m)
        }
        _ => Err(Error::UnsupportedFamily(fam.tag())),
    }
}
