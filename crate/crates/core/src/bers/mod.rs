//! Schwarzian derivatives, cusped forms and the Ahlfors–Weill section.

pub mod grid_io;
pub mod solver;

use std::f64::consts::{LN_2, TAU};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::families::{compose_beltrami, BeltramiCoefficient, PlaneMap};
use crate::projective::{MobiusTransform, C64};

pub use solver::{smooth_step, smoothed_disk_indicator, solve_beltrami_grid, truncated_power, GridMap, GridSpec};

/// Radius of the ball around a point on which the chart is defined.
pub const CHART_BALL_RADIUS: f64 = 0.5 * LN_2;
/// The chart image contains the ball of this radius.
pub const CHART_IMAGE_INNER: f64 = 2.0 / 3.0;
/// The chart image lies in the ball of this radius.
pub const CHART_IMAGE_OUTER: f64 = 2.0;
/// Forms with `‖φ‖_b` below this have an Ahlfors–Weill section.
pub const AHLFORS_WEILL_LIMIT: f64 = 0.5;
/// Largest `‖φ‖_b` accepted by [`translation_chart_pullback`].
pub const CHART_NORM_LIMIT: f64 = 0.45;

const STENCIL: usize = 16;

/// `S(f)(z) = f‴/f′ - (3/2)(f″/f′)²` from the first three derivatives.
pub fn schwarzian_from_derivatives(d1: C64, d2: C64, d3: C64) -> Result<C64> {
    if d1.norm() == 0.0 || !d1.is_finite() {
        return Err(Error::DerivativeVanishes(format!("f' = {d1}")));
    }
    let q = d2 / d1;
    Ok(d3 / d1 - q * q * 1.5)
}

/// First three derivatives from a 16-point circle of radius `r` about `z`.
pub fn circle_derivatives(f: &dyn Fn(C64) -> C64, z: C64, r: f64) -> Result<[C64; 3]> {
    let vals: Vec<C64> = (0..STENCIL).map(|j| f(z + C64::from_polar(r, TAU * j as f64 / STENCIL as f64))).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::OutOfDomain(format!("non-finite value within {r} of {z}")));
    }
    let coef = |k: usize| {
        let s: C64 = vals
            .iter()
            .enumerate()
            .map(|(j, v)| v * C64::from_polar(1.0, -TAU * (j * k) as f64 / STENCIL as f64))
            .sum();
        s / (STENCIL as f64 * r.powi(k as i32))
    };
    Ok([coef(1), coef(2) * 2.0, coef(3) * 6.0])
}

/// Default stencil radius `0.05·(1 + |z|)`.
pub fn default_step(z: C64) -> f64 {
    0.05 * (1.0 + z.norm())
}

/// Schwarzian derivative by a circle stencil; `h` defaults to [`default_step`].
pub fn schwarzian(f: &dyn Fn(C64) -> C64, z: C64, h: Option<f64>) -> Result<C64> {
    let r = h.unwrap_or_else(|| default_step(z));
    if !(r > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("step {r}")));
    }
    let [d1, d2, d3] = circle_derivatives(f, z, r)?;
    // relative to the local oscillation of f on the stencil
    let scale = (f(z + r) - f(z)).norm() / r + 1e-3 * f(z).norm() / r;
    if d1.norm() <= 1e-10 * scale {
        return Err(Error::DerivativeVanishes(format!("f' ≈ 0 at {z}")));
    }
    schwarzian_from_derivatives(d1, d2, d3)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HalfPlane {
    Upper,
    Lower,
}

impl HalfPlane {
    pub fn contains(self, z: C64) -> bool {
        match self {
            HalfPlane::Upper => z.im > 0.0,
            HalfPlane::Lower => z.im < 0.0,
        }
    }

    pub fn opposite(self) -> HalfPlane {
        match self {
            HalfPlane::Upper => HalfPlane::Lower,
            HalfPlane::Lower => HalfPlane::Upper,
        }
    }

    fn sign(self) -> f64 {
        match self {
            HalfPlane::Upper => 1.0,
            HalfPlane::Lower => -1.0,
        }
    }
}

/// Sample points for `sup |y²φ|`: `|y|` log-spaced over `[y_min, y_max]`,
/// `x = sinh(s)` with `s` uniform in `[-s_max, s_max]`.
#[derive(Clone, Copy, Debug)]
pub struct CuspGrid {
    pub y_points: usize,
    pub x_points: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub s_max: f64,
}

impl Default for CuspGrid {
    fn default() -> Self {
        CuspGrid { y_points: 121, x_points: 161, y_min: 1e-3, y_max: 1e3, s_max: 8.0 }
    }
}

impl CuspGrid {
    /// Halves both spacings; the old points are kept.
    pub fn refined(&self) -> CuspGrid {
        CuspGrid { y_points: 2 * self.y_points - 1, x_points: 2 * self.x_points - 1, ..*self }
    }

    pub fn points(&self, domain: HalfPlane) -> Vec<C64> {
        let (ly0, ly1) = (self.y_min.ln(), self.y_max.ln());
        let mut out = Vec::with_capacity(self.y_points * self.x_points);
        for i in 0..self.y_points {
            let y = (ly0 + (ly1 - ly0) * i as f64 / (self.y_points - 1) as f64).exp();
            for j in 0..self.x_points {
                let s = -self.s_max + 2.0 * self.s_max * j as f64 / (self.x_points - 1) as f64;
                out.push(C64::new(s.sinh(), domain.sign() * y));
            }
        }
        out
    }
}

type FormEval = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// A holomorphic `φ` on a half-plane with finite `‖φ‖_b = sup |y²φ|`.
#[derive(Clone)]
pub struct CuspedForm {
    eval: FormEval,
    domain: HalfPlane,
    norm: f64,
}

impl fmt::Debug for CuspedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CuspedForm").field("domain", &self.domain).field("norm", &self.norm).finish()
    }
}

/// Sampled `sup |y²φ(z)|`.
pub fn cusped_norm(phi: &CuspedForm, grid: &CuspGrid) -> f64 {
    grid.points(phi.domain)
        .into_iter()
        .map(|z| (z.im * z.im * phi.eval(z)).norm())
        .filter(|v| v.is_finite())
        .fold(0.0, f64::max)
}

impl CuspedForm {
    /// Form with its norm sampled on the default [`CuspGrid`].
    pub fn new<F>(f: F, domain: HalfPlane) -> Self
    where
        F: Fn(C64) -> C64 + Send + Sync + 'static,
    {
        let mut form = CuspedForm { eval: Arc::new(f), domain, norm: 0.0 };
        form.norm = cusped_norm(&form, &CuspGrid::default());
        form
    }

    pub fn zero(domain: HalfPlane) -> Self {
        CuspedForm { eval: Arc::new(|_| C64::new(0.0, 0.0)), domain, norm: 0.0 }
    }

    pub fn eval(&self, z: C64) -> C64 {
        (self.eval)(z)
    }

    pub fn domain(&self) -> HalfPlane {
        self.domain
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `αφ + βψ`; both forms must live on the same half-plane.
    pub fn combine(alpha: C64, phi: &CuspedForm, beta: C64, psi: &CuspedForm) -> Result<Self> {
        if phi.domain != psi.domain {
            return Err(Error::ParameterOutOfRange("forms on different half-planes".into()));
        }
        let (f, g) = (phi.eval.clone(), psi.eval.clone());
        Ok(CuspedForm::new(move |z| alpha * f(z) + beta * g(z), phi.domain))
    }

    pub fn scaled(&self, s: C64) -> Self {
        let f = self.eval.clone();
        CuspedForm { eval: Arc::new(move |z| s * f(z)), domain: self.domain, norm: self.norm * s.norm() }
    }

    /// `|φ(z0) - mean of φ over the circle |z - z0| = r|`.
    pub fn mean_value_residual(&self, z0: C64, r: f64, m: usize) -> f64 {
        let mean: C64 = (0..m).map(|k| self.eval(z0 + C64::from_polar(r, TAU * k as f64 / m as f64))).sum::<C64>() / m as f64;
        (self.eval(z0) - mean).norm()
    }
}

/// `φ(z) = Σ_{|k| ≤ k_max} φ₀(λᵏ z) λ^{2k}`, invariant under `z ↦ λz`.
pub fn poincare_series<F>(phi0: F, domain: HalfPlane, lambda_g: f64, k_max: i32) -> Result<CuspedForm>
where
    F: Fn(C64) -> C64 + Send + Sync + 'static,
{
    if !(lambda_g > 1.0) {
        return Err(Error::ParameterOutOfRange(format!("multiplier {lambda_g}")));
    }
    Ok(CuspedForm::new(
        move |z| (-k_max..=k_max).map(|k| phi0(z * lambda_g.powi(k)) * lambda_g.powi(2 * k)).sum(),
        domain,
    ))
}

/// `max |φ(gz) g′(z)² - φ(z)|` over `samples`.
pub fn equivariance_defect(phi: &CuspedForm, g: &MobiusTransform, samples: &[C64]) -> f64 {
    samples
        .iter()
        .map(|&z| {
            let gz = g.apply_c(z).value();
            let d = g.derivative(z);
            (phi.eval(gz) * d * d - phi.eval(z)).norm()
        })
        .fold(0.0, f64::max)
}

/// `η_φ(z) = -2y²φ(z̄)` on the half-plane opposite to `φ`'s, zero elsewhere.
#[derive(Clone, Debug)]
pub struct HarmonicBeltrami {
    form: CuspedForm,
}

impl HarmonicBeltrami {
    pub fn form(&self) -> &CuspedForm {
        &self.form
    }

    pub fn eval(&self, z: C64) -> C64 {
        if self.form.domain.opposite().contains(z) {
            self.form.eval(z.conj()) * (-2.0 * z.im * z.im)
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// `2‖φ‖_b`.
    pub fn norm(&self) -> f64 {
        2.0 * self.form.norm
    }

    pub fn to_beltrami(&self) -> Result<BeltramiCoefficient> {
        let h = self.clone();
        BeltramiCoefficient::new(move |z| h.eval(z), self.norm())
    }
}

pub fn ahlfors_weill(phi: &CuspedForm) -> Result<HarmonicBeltrami> {
    if !(phi.norm < AHLFORS_WEILL_LIMIT) {
        return Err(Error::NormTooLarge(phi.norm));
    }
    Ok(HarmonicBeltrami { form: phi.clone() })
}

/// Coefficient of `f^{η_φ} ∘ f^μ` in the translation chart at `[μ]`.
pub fn translation_chart_pullback(
    mu: &BeltramiCoefficient,
    f_mu: Arc<dyn PlaneMap>,
    phi: &CuspedForm,
) -> Result<BeltramiCoefficient> {
    if !(phi.norm <= CHART_NORM_LIMIT) {
        return Err(Error::NormTooLarge(phi.norm));
    }
    let eta = ahlfors_weill(phi)?.to_beltrami()?;
    compose_beltrami(mu, &eta, f_mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{FamilyMember, HolomorphicQCFamily};
    use crate::families::CyclicFuchsianGroup;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn schwarzian_examples() {
        let s = schwarzian(&|z: C64| z * z, c(0.0, 1.0), None).unwrap();
        assert!((s - c(1.5, 0.0)).norm() < 1e-9, "{s}");
        for z in [c(0.0, 0.0), c(1.0, -2.0), c(3.0, 0.5)] {
            let s = schwarzian(&|z: C64| z.exp(), z, None).unwrap();
            assert!((s + 0.5).norm() < 1e-9, "{s}");
        }
        let m = MobiusTransform::new(c(2.0, 1.0), c(0.0, 1.0), c(1.0, 0.0), c(3.0, 0.0)).unwrap();
        let s = schwarzian(&|z| m.apply_c(z).value(), c(0.5, 0.5), None).unwrap();
        assert!(s.norm() < 1e-8);
        assert!(matches!(schwarzian(&|_| c(1.0, 0.0), c(0.0, 0.0), None), Err(Error::DerivativeVanishes(_))));
    }

    #[test]
    fn schwarzian_mobius_invariance() {
        let m = MobiusTransform::new(c(1.0, 0.0), c(2.0, 0.0), c(0.5, 0.0), c(3.0, 0.0)).unwrap();
        let f = |z: C64| z.exp() + z * z * 0.1;
        let g = |z: C64| m.apply_c(f(z)).value();
        for z in [c(0.1, 0.2), c(-0.3, 0.4)] {
            let a = schwarzian(&f, z, Some(0.02)).unwrap();
            let b = schwarzian(&g, z, Some(0.02)).unwrap();
            assert!((a - b).norm() < 1e-7, "{a} {b}");
        }
    }

    #[test]
    fn cusped_norm_examples() {
        let phi = CuspedForm::new(|z| ONE / (z * z), HalfPlane::Lower);
        assert!((phi.norm() - 1.0).abs() < 1e-12);
        let phi = CuspedForm::new(|z| ONE / (z * z * 4.0), HalfPlane::Lower);
        assert!((phi.norm() - 0.25).abs() < 1e-12);
        assert_eq!(CuspedForm::zero(HalfPlane::Lower).norm(), 0.0);
        let g = CuspGrid { y_points: 31, x_points: 41, ..CuspGrid::default() };
        let bumpy = CuspedForm::new(|z| ONE / ((z - c(0.3, 0.0)) * (z - c(0.0, 0.7)) * 3.0), HalfPlane::Lower);
        assert!(cusped_norm(&bumpy, &g.refined()) >= cusped_norm(&bumpy, &g));
    }

    const ONE: C64 = C64::new(1.0, 0.0);

    #[test]
    fn ahlfors_weill_example_and_limits() {
        let phi = CuspedForm::new(|z| ONE / (z * z * 4.0), HalfPlane::Lower);
        let eta = ahlfors_weill(&phi).unwrap();
        assert!((eta.eval(c(0.0, 1.0)) - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(eta.eval(c(0.0, -1.0)), c(0.0, 0.0));
        assert!((eta.norm() - 0.5).abs() < 1e-12);
        let big = CuspedForm::new(|z| ONE / (z * z * 2.0), HalfPlane::Lower);
        assert!(matches!(ahlfors_weill(&big), Err(Error::NormTooLarge(_))));
        // linear in φ
        let psi = CuspedForm::new(|z| ONE / ((z - c(0.0, 1.0)).powi(2) * 8.0), HalfPlane::Lower);
        let sum = CuspedForm::combine(c(0.5, 0.0), &phi, c(0.0, 0.5), &psi).unwrap();
        let (e1, e2, e3) = (ahlfors_weill(&phi).unwrap(), ahlfors_weill(&psi).unwrap(), ahlfors_weill(&sum).unwrap());
        let z = c(0.3, 0.8);
        assert!((e3.eval(z) - e1.eval(z) * 0.5 - e2.eval(z) * c(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn poincare_series_equivariance() {
        let phi = poincare_series(|w| ONE / (w - c(0.0, 1.0)).powi(4), HalfPlane::Lower, 2.0, 60).unwrap();
        let g = CyclicFuchsianGroup::new(2.0).unwrap().generator();
        let samples: Vec<C64> = (0..50).map(|k| c((k as f64 * 0.37).sin() * 3.0, -0.1 - k as f64 * 0.05)).collect();
        assert!(equivariance_defect(&phi, &g, &samples) < 1e-6);
        assert!(phi.mean_value_residual(c(0.2, -1.0), 0.3, 64) < 1e-10);
        assert!(phi.norm().is_finite() && phi.norm() > 0.0);
    }

    #[test]
    fn translation_chart_examples() {
        let fam = HolomorphicQCFamily::power_stretch(1.0).unwrap();
        let t = c(0.2, 0.0);
        let mu = fam.beltrami(t).unwrap();
        let f: Arc<dyn PlaneMap> = Arc::new(FamilyMember { fam, t });
        let zero = CuspedForm::zero(HalfPlane::Lower);
        let same = translation_chart_pullback(&mu, f.clone(), &zero).unwrap();
        let z = c(0.4, 1.3);
        assert!((same.eval(z) - mu.eval(z)).norm() < 1e-15);
        let phi = CuspedForm::new(|z| ONE / (z * z * 4.0), HalfPlane::Lower);
        let moved = translation_chart_pullback(&mu, f.clone(), &phi).unwrap();
        assert!(moved.norm() < 1.0);
        let edge = CuspedForm::new(|z| ONE / (z * z) * 0.46, HalfPlane::Lower);
        assert!(matches!(translation_chart_pullback(&mu, f, &edge), Err(Error::NormTooLarge(_))));
    }
}
