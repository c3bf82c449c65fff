//! Points of the Riemann sphere in homogeneous coordinates, Möbius
//! transforms, cross-ratios and the angle metric on the boundary circle.
//!
//! A point is a pair `(z, w)` standing for `z / w`; infinity is `(1, 0)`.
//! Every formula below is written with brackets `[P, Q] = P.z Q.w - Q.z P.w`
//! so that infinity never shows up in raw arithmetic.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Relative size below which a bracket counts as zero.
pub const COINCIDENCE_TOL: f64 = 4.0 * f64::EPSILON;

/// Tolerance of the determinant normalization.
pub const DET_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpherePoint {
    pub z: C64,
    pub w: C64,
}

impl SpherePoint {
    pub const INFINITY: SpherePoint = SpherePoint { z: ONE, w: ZERO };
    pub const ZERO: SpherePoint = SpherePoint { z: ZERO, w: ONE };
    pub const ONE: SpherePoint = SpherePoint { z: ONE, w: ONE };

    pub fn new(z: C64, w: C64) -> Result<Self> {
        if z == ZERO && w == ZERO {
            return Err(Error::OutOfDomain("homogeneous pair (0, 0)".into()));
        }
        if !(z.re.is_finite() && z.im.is_finite() && w.re.is_finite() && w.im.is_finite()) {
            return Err(Error::OutOfDomain("non-finite homogeneous coordinate".into()));
        }
        Ok(SpherePoint { z, w })
    }

    pub fn finite(z: C64) -> Self {
        SpherePoint { z, w: ONE }
    }

    /// Real point; `f64::INFINITY` (either sign) maps to infinity.
    pub fn real(x: f64) -> Self {
        if x.is_infinite() {
            Self::INFINITY
        } else {
            SpherePoint { z: C64::new(x, 0.0), w: ONE }
        }
    }

    pub fn is_infinity(&self) -> bool {
        self.w == ZERO
    }

    /// `z / w`, or complex infinity for the point at infinity.
    pub fn value(&self) -> C64 {
        if self.is_infinity() {
            C64::new(f64::INFINITY, 0.0)
        } else {
            self.z / self.w
        }
    }

    pub fn to_finite(&self) -> Option<C64> {
        if self.is_infinity() {
            None
        } else {
            Some(self.z / self.w)
        }
    }

    /// Whether the point lies on the extended real line, up to `tol`
    /// relative to its homogeneous size.
    pub fn is_real(&self, tol: f64) -> bool {
        let cross = self.z * self.w.conj();
        cross.im.abs() <= tol * (self.z.norm_sqr() + self.w.norm_sqr())
    }

    /// Real value of a boundary point; infinity is `f64::INFINITY`.
    pub fn to_real(&self) -> Option<f64> {
        if !self.is_real(1e-12) {
            return None;
        }
        if self.is_infinity() {
            Some(f64::INFINITY)
        } else {
            Some((self.z / self.w).re)
        }
    }

    pub fn norm(&self) -> f64 {
        (self.z.norm_sqr() + self.w.norm_sqr()).sqrt()
    }

    /// Rescaled representative with `max(|z|, |w|) = 1`.
    pub fn normalized(&self) -> Self {
        let s = self.z.norm().max(self.w.norm());
        SpherePoint { z: self.z / s, w: self.w / s }
    }

    pub fn projectively_eq(&self, other: &SpherePoint, tol: f64) -> bool {
        bracket(self, other).norm() <= tol * self.norm() * other.norm()
    }

    /// Chordal distance on the Riemann sphere.
    pub fn chordal(&self, other: &SpherePoint) -> f64 {
        2.0 * bracket(self, other).norm() / (self.norm() * other.norm())
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinity() {
            write!(f, "inf")
        } else {
            let v = self.z / self.w;
            if v.im == 0.0 {
                write!(f, "{}", v.re)
            } else {
                write!(f, "{}", v)
            }
        }
    }
}

impl FromStr for SpherePoint {
    type Err = Error;

    /// Accepts reals, complex literals such as `1+2i` or `0.5i`, and `inf`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" | "-inf" | "∞" => return Ok(Self::INFINITY),
            _ => {}
        }
        if let Ok(x) = t.parse::<f64>() {
            if x.is_finite() {
                return Ok(Self::real(x));
            }
        }
        let c = parse_complex(t)?;
        SpherePoint::new(c, ONE)
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` (also with `j`).
pub fn parse_complex(s: &str) -> Result<C64> {
    let t = s.trim();
    let c = C64::from_str(t).map_err(|_| Error::Config(format!("cannot parse '{t}' as a number")))?;
    if !(c.re.is_finite() && c.im.is_finite()) {
        return Err(Error::Config(format!("non-finite number '{t}'")));
    }
    Ok(c)
}

/// `[P, Q] = P.z Q.w - Q.z P.w`; vanishes exactly when `P = Q` projectively.
#[inline]
pub fn bracket(p: &SpherePoint, q: &SpherePoint) -> C64 {
    p.z * q.w - q.z * p.w
}

fn coincide(p: &SpherePoint, q: &SpherePoint) -> bool {
    bracket(p, q).norm() <= COINCIDENCE_TOL * p.norm() * q.norm()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MobiusTransform {
    m: [C64; 4],
}

impl MobiusTransform {
    /// Builds `z ↦ (a z + b)/(c z + d)` and rescales to determinant 1.
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let det = a * d - b * c;
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if !(scale.is_finite()) || det.norm() <= 1e-300 || det.norm() <= 1e-14 * scale * scale {
            return Err(Error::OutOfDomain("singular matrix".into()));
        }
        let s = det.sqrt();
        let t = MobiusTransform { m: [a / s, b / s, c / s, d / s] };
        debug_assert!((t.det() - ONE).norm() <= DET_TOL * 16.0 * (1.0 + t.max_entry().powi(2)));
        Ok(t)
    }

    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(C64::new(a, 0.0), C64::new(b, 0.0), C64::new(c, 0.0), C64::new(d, 0.0))
    }

    pub fn identity() -> Self {
        MobiusTransform { m: [ONE, ZERO, ZERO, ONE] }
    }

    /// `z ↦ λ z`.
    pub fn scaling(lambda: C64) -> Result<Self> {
        Self::new(lambda, ZERO, ZERO, ONE)
    }

    pub fn translation(b: C64) -> Self {
        MobiusTransform { m: [ONE, b, ZERO, ONE] }
    }

    /// `z ↦ 1/z`.
    pub fn inversion() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO).expect("nonsingular")
    }

    pub fn entries(&self) -> [C64; 4] {
        self.m
    }

    pub fn det(&self) -> C64 {
        self.m[0] * self.m[3] - self.m[1] * self.m[2]
    }

    fn max_entry(&self) -> f64 {
        self.m.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    #[inline]
    pub fn apply(&self, p: &SpherePoint) -> SpherePoint {
        let [a, b, c, d] = self.m;
        SpherePoint { z: a * p.z + b * p.w, w: c * p.z + d * p.w }
    }

    pub fn apply_c(&self, z: C64) -> SpherePoint {
        self.apply(&SpherePoint::finite(z))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusTransform) -> MobiusTransform {
        let [a, b, c, d] = self.m;
        let [e, f, g, h] = other.m;
        let raw = [a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h];
        // product of det-1 matrices; renormalize against drift
        let det = raw[0] * raw[3] - raw[1] * raw[2];
        let s = det.sqrt();
        MobiusTransform { m: [raw[0] / s, raw[1] / s, raw[2] / s, raw[3] / s] }
    }

    pub fn inverse(&self) -> MobiusTransform {
        let [a, b, c, d] = self.m;
        MobiusTransform { m: [d, -b, -c, a] }
    }

    /// Complex derivative `1/(c z + d)^2` at a finite point.
    pub fn derivative(&self, z: C64) -> C64 {
        let q = self.m[2] * z + self.m[3];
        ONE / (q * q)
    }

    /// True when the matrix is a complex multiple of a real matrix,
    /// i.e. the transform preserves the extended real line.
    pub fn is_real(&self, tol: f64) -> bool {
        self.real_entries(tol).is_some()
    }

    /// Real representative `(a, b, c, d)` up to a common phase, if one
    /// exists; the determinant is then `±1`.
    pub fn real_entries(&self, tol: f64) -> Option<[f64; 4]> {
        let big = self.m.iter().copied().fold(ZERO, |acc, e| if e.norm() > acc.norm() { e } else { acc });
        let phase = big / big.norm();
        let scale = big.norm();
        let mut out = [0.0; 4];
        for (o, e) in out.iter_mut().zip(self.m.iter()) {
            let r = e * phase.conj();
            if r.im.abs() > tol * scale {
                return None;
            }
            *o = r.re;
        }
        Some(out)
    }

    pub fn approx_eq(&self, other: &MobiusTransform, tol: f64) -> bool {
        // projective equality: matrices agree up to sign
        let diff = |s: f64| {
            self.m.iter().zip(other.m.iter()).map(|(x, y)| (x - y * s).norm()).fold(0.0, f64::max)
        };
        diff(1.0).min(diff(-1.0)) <= tol
    }
}

impl fmt::Display for MobiusTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.m;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

/// The unique transform sending `(p, q, r)` to `(p2, q2, r2)`.
pub fn mobius_through(
    p: &SpherePoint,
    q: &SpherePoint,
    r: &SpherePoint,
    p2: &SpherePoint,
    q2: &SpherePoint,
    r2: &SpherePoint,
) -> Result<MobiusTransform> {
    let m1 = to_zero_one_infinity(p, q, r)?;
    let m2 = to_zero_one_infinity(p2, q2, r2)?;
    Ok(m2.inverse().compose(&m1))
}

/// Sends `(p, q, r)` to `(0, 1, ∞)`.
pub fn to_zero_one_infinity(p: &SpherePoint, q: &SpherePoint, r: &SpherePoint) -> Result<MobiusTransform> {
    if coincide(p, q) || coincide(q, r) || coincide(p, r) {
        return Err(Error::DegenerateTriple);
    }
    let k1 = bracket(q, r);
    let k2 = bracket(q, p);
    MobiusTransform::new(k1 * p.w, -k1 * p.z, k2 * r.w, -k2 * r.z).map_err(|_| Error::DegenerateTriple)
}

/// Sends `(0, 1, ∞)` to `(p, q, r)`.
pub fn from_zero_one_infinity(p: &SpherePoint, q: &SpherePoint, r: &SpherePoint) -> Result<MobiusTransform> {
    Ok(to_zero_one_infinity(p, q, r)?.inverse())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadruple {
    pub a: SpherePoint,
    pub b: SpherePoint,
    pub c: SpherePoint,
    pub d: SpherePoint,
}

impl Quadruple {
    pub fn new(a: SpherePoint, b: SpherePoint, c: SpherePoint, d: SpherePoint) -> Result<Self> {
        let q = Quadruple { a, b, c, d };
        let pts = q.points();
        for i in 0..4 {
            for j in i + 1..4 {
                if coincide(&pts[i], &pts[j]) {
                    return Err(Error::DegenerateQuadruple);
                }
            }
        }
        Ok(q)
    }

    pub fn from_reals(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(SpherePoint::real(a), SpherePoint::real(b), SpherePoint::real(c), SpherePoint::real(d))
    }

    pub fn from_complex(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        Self::new(SpherePoint::finite(a), SpherePoint::finite(b), SpherePoint::finite(c), SpherePoint::finite(d))
    }

    pub fn points(&self) -> [SpherePoint; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn map(&self, m: &MobiusTransform) -> Quadruple {
        Quadruple { a: m.apply(&self.a), b: m.apply(&self.b), c: m.apply(&self.c), d: m.apply(&self.d) }
    }

    pub fn cross_ratio(&self) -> C64 {
        cross_ratio_unchecked(&self.a, &self.b, &self.c, &self.d)
    }

    /// `cr - 1`, computed without cancellation.
    pub fn cross_ratio_minus_one(&self) -> C64 {
        cross_ratio_minus_one_unchecked(&self.a, &self.b, &self.c, &self.d)
    }

    /// Principal logarithm of the cross-ratio.
    pub fn log_cross_ratio(&self) -> C64 {
        log1p_c(self.cross_ratio_minus_one())
    }
}

/// `cr(a,b,c,d) = ((a-c)(b-d))/((a-d)(b-c))`.
pub fn cross_ratio(q: &Quadruple) -> Result<C64> {
    let checked = Quadruple::new(q.a, q.b, q.c, q.d)?;
    Ok(checked.cross_ratio())
}

#[inline]
pub fn cross_ratio_unchecked(a: &SpherePoint, b: &SpherePoint, c: &SpherePoint, d: &SpherePoint) -> C64 {
    (bracket(a, c) * bracket(b, d)) / (bracket(a, d) * bracket(b, c))
}

#[inline]
pub fn cross_ratio_minus_one_unchecked(a: &SpherePoint, b: &SpherePoint, c: &SpherePoint, d: &SpherePoint) -> C64 {
    (bracket(a, b) * bracket(c, d)) / (bracket(a, d) * bracket(b, c))
}

/// Principal `log(1 + w)`, accurate for small `|w|`.
#[inline]
pub fn log1p_c(w: C64) -> C64 {
    let n2 = w.norm_sqr();
    if n2 < 1e-6 {
        // alternating series, truncation below 1e-18 relative
        let mut term = w;
        let mut acc = w;
        for k in 2..=6 {
            term = -term * w;
            acc += term / k as f64;
        }
        return acc;
    }
    let re = 0.5 * (2.0 * w.re + n2).ln_1p();
    let im = w.im.atan2(1.0 + w.re);
    C64::new(re, im)
}

/// Real `ln(1 + x)` with the same small-argument series as [`log1p_c`].
#[inline]
pub fn log1p_r(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        let x4 = x2 * x2;
        x - x2 * 0.5 + x2 * x / 3.0 - x4 * 0.25 + x4 * x / 5.0 - x4 * x2 / 6.0
    } else {
        x.ln_1p()
    }
}

/// Sends `(a, c, d)` to `(1, ∞, 0)`; `b` then lands on the cross-ratio.
pub fn normalize_quadruple(q: &Quadruple) -> Result<(MobiusTransform, C64)> {
    let q = Quadruple::new(q.a, q.b, q.c, q.d)?;
    let cr = q.cross_ratio();
    let g = mobius_through(&q.a, &q.c, &q.d, &SpherePoint::ONE, &SpherePoint::INFINITY, &SpherePoint::ZERO)
        .map_err(|_| Error::DegenerateQuadruple)?;
    Ok((g, cr))
}

/// Four boundary points with `[a,b]` and `[c,d]` disjoint positively
/// oriented arcs of the extended real line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeodesicBox {
    pub a: SpherePoint,
    pub b: SpherePoint,
    pub c: SpherePoint,
    pub d: SpherePoint,
}

impl GeodesicBox {
    pub fn new(a: SpherePoint, b: SpherePoint, c: SpherePoint, d: SpherePoint) -> Result<Self> {
        for p in [&a, &b, &c, &d] {
            if !p.is_real(1e-12) {
                return Err(Error::DegenerateBox(format!("corner {p} is not on the real line")));
            }
        }
        let q = Quadruple::new(a, b, c, d)
            .map_err(|_| Error::DegenerateBox("two corners coincide".into()))?;
        let cr = q.cross_ratio();
        if cr.im.abs() > 1e-10 * (1.0 + cr.re.abs()) {
            return Err(Error::DegenerateBox("non-real cross-ratio".into()));
        }
        if !(cr.re > 1.0) {
            return Err(Error::NonPositiveMass(cr.re));
        }
        Ok(GeodesicBox { a, b, c, d })
    }

    pub fn from_reals(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(SpherePoint::real(a), SpherePoint::real(b), SpherePoint::real(c), SpherePoint::real(d))
    }

    pub fn quadruple(&self) -> Quadruple {
        Quadruple { a: self.a, b: self.b, c: self.c, d: self.d }
    }

    pub fn cross_ratio(&self) -> f64 {
        self.quadruple().cross_ratio().re
    }

    /// The same set of geodesics with the arcs swapped.
    pub fn swapped(&self) -> GeodesicBox {
        GeodesicBox { a: self.c, b: self.d, c: self.a, d: self.b }
    }

    pub fn map(&self, g: &MobiusTransform) -> Result<GeodesicBox> {
        GeodesicBox::new(g.apply(&self.a), g.apply(&self.b), g.apply(&self.c), g.apply(&self.d))
    }
}

/// Image of a boundary point on the unit circle, `(x - z0)/(x - conj z0)`.
pub fn cayley(x: &SpherePoint, z0: C64) -> C64 {
    let num = x.z - z0 * x.w;
    let den = x.z - z0.conj() * x.w;
    let u = num / den;
    u / u.norm()
}

/// Angle of a boundary point seen from `z0`, in `[0, 2π)`; increases
/// along the positive direction of the real line.
pub fn boundary_angle(x: &SpherePoint, z0: C64) -> f64 {
    let a = cayley(x, z0).arg();
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

/// Inverse of [`boundary_angle`].
pub fn point_at_angle(theta: f64, z0: C64) -> SpherePoint {
    let u = C64::from_polar(1.0, theta);
    // x - z0 = u (x - conj z0)  =>  x (1 - u) = z0 - u conj z0
    let num = z0 - u * z0.conj();
    let den = ONE - u;
    let mut p = SpherePoint { z: num, w: den };
    // the preimage is real; drop the rounding residue
    if p.is_infinity() || den.norm() < 1e-300 {
        return SpherePoint::INFINITY;
    }
    let v = p.z / p.w;
    p = SpherePoint::real(v.re);
    p
}

/// Angle between the geodesic rays from `z0` toward `x` and `y`, in `[0, π]`.
pub fn angle_distance(x: &SpherePoint, y: &SpherePoint, z0: C64) -> f64 {
    let ux = cayley(x, z0);
    let uy = cayley(y, z0);
    (ux * uy.conj()).arg().abs().min(PI)
}

/// Positive angular length from `x` to `y` along the positive direction.
pub fn arc_angle(x: &SpherePoint, y: &SpherePoint, z0: C64) -> f64 {
    let d = boundary_angle(y, z0) - boundary_angle(x, z0);
    if d < 0.0 {
        d + TAU
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn r(x: f64) -> SpherePoint {
        SpherePoint::real(x)
    }

    #[test]
    fn cross_ratio_examples() {
        let q = Quadruple::new(r(1.0), r(1.25), SpherePoint::INFINITY, r(0.0)).unwrap();
        assert_relative_eq!(q.cross_ratio().re, 1.25, epsilon = 1e-15);
        let q = Quadruple::from_reals(-1.0, 0.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(q.cross_ratio().re, 1.5, epsilon = 1e-15);
        let q = Quadruple::from_reals(0.0, 1.0, 2.0, 3.0).unwrap();
        assert_relative_eq!(q.cross_ratio().re, 4.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(q.log_cross_ratio().re, (4.0f64 / 3.0).ln(), epsilon = 1e-15);
    }

    #[test]
    fn degenerate_quadruple_rejected() {
        assert!(matches!(Quadruple::from_reals(0.0, 0.0, 1.0, 2.0), Err(Error::DegenerateQuadruple)));
        let p = SpherePoint::new(C64::new(2.0, 0.0), C64::new(2.0, 0.0)).unwrap();
        assert!(Quadruple::new(SpherePoint::ONE, p, r(3.0), r(4.0)).is_err());
    }

    #[test]
    fn apply_examples() {
        let p = SpherePoint::real(5.0);
        assert_eq!(MobiusTransform::identity().apply(&p).value(), C64::new(5.0, 0.0));
        let inv = MobiusTransform::inversion();
        assert!(inv.apply(&SpherePoint::INFINITY).projectively_eq(&SpherePoint::ZERO, 1e-15));
        let s = MobiusTransform::scaling(C64::new(2.0, 0.0)).unwrap();
        assert_relative_eq!(s.apply(&r(3.0)).value().re, 6.0, epsilon = 1e-14);
    }

    #[test]
    fn det_is_normalized() {
        let m = MobiusTransform::new(C64::new(3.0, 1.0), C64::new(-2.0, 0.5), C64::new(0.1, 0.0), C64::new(7.0, -2.0))
            .unwrap();
        assert!((m.det() - ONE).norm() < 1e-12);
        let m = MobiusTransform::from_real(0.0, 1.0, 1.0, 0.0).unwrap();
        assert!((m.det() - ONE).norm() < 1e-12);
        assert!(m.is_real(1e-12));
    }

    #[test]
    fn mobius_through_examples() {
        let (z, o, inf) = (SpherePoint::ZERO, SpherePoint::ONE, SpherePoint::INFINITY);
        let m = mobius_through(&z, &o, &inf, &z, &o, &inf).unwrap();
        assert!(m.approx_eq(&MobiusTransform::identity(), 1e-14));
        let m = mobius_through(&z, &o, &inf, &inf, &o, &z).unwrap();
        assert!(m.approx_eq(&MobiusTransform::inversion(), 1e-14));
        let m = mobius_through(&r(1.0), &r(2.0), &r(3.0), &z, &o, &inf).unwrap();
        assert!(m.apply(&r(1.0)).projectively_eq(&z, 1e-12));
        assert!(m.apply(&r(2.0)).projectively_eq(&o, 1e-12));
        assert!(m.apply(&r(3.0)).projectively_eq(&inf, 1e-12));
        let q = Quadruple::from_reals(1.0, 2.0, 3.0, 7.5).unwrap();
        assert_relative_eq!(q.map(&m).cross_ratio().re, q.cross_ratio().re, max_relative = 1e-13);
        assert!(matches!(mobius_through(&z, &z, &o, &z, &o, &inf), Err(Error::DegenerateTriple)));
    }

    #[test]
    fn normalize_quadruple_examples() {
        let q = Quadruple::new(r(1.0), r(1.5), SpherePoint::INFINITY, r(0.0)).unwrap();
        let (g, cr) = normalize_quadruple(&q).unwrap();
        assert!(g.approx_eq(&MobiusTransform::identity(), 1e-14));
        assert_relative_eq!(cr.re, 1.5);
        let q = Quadruple::from_reals(0.0, 1.0, 2.0, 3.0).unwrap();
        let (g, cr) = normalize_quadruple(&q).unwrap();
        assert_relative_eq!(g.apply(&q.b).value().re, 4.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(cr.re, 4.0 / 3.0, max_relative = 1e-14);
        assert!(g.is_real(1e-12));
    }

    #[test]
    fn angle_distance_examples() {
        let i = C64::new(0.0, 1.0);
        assert_relative_eq!(angle_distance(&r(0.0), &SpherePoint::INFINITY, i), PI, epsilon = 1e-15);
        assert_relative_eq!(angle_distance(&r(0.0), &r(1.0), i), PI / 2.0, epsilon = 1e-15);
        assert_eq!(angle_distance(&r(0.3), &r(0.3), i), 0.0);
        // positive direction of the real line is counterclockwise
        assert!(boundary_angle(&r(0.0), i) < boundary_angle(&r(1.0), i));
        for &x in &[-3.0, -0.2, 0.0, 0.7, 12.0] {
            let th = boundary_angle(&r(x), i);
            assert_relative_eq!(point_at_angle(th, i).value().re, x, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn box_validation() {
        assert!(GeodesicBox::from_reals(0.0, 1.0, 2.0, 3.0).is_ok());
        assert!(matches!(GeodesicBox::from_reals(0.0, 2.0, 1.0, 3.0), Err(Error::NonPositiveMass(_))));
        assert!(matches!(GeodesicBox::from_reals(0.0, 1.0, 3.0, 2.0), Err(Error::NonPositiveMass(_))));
        assert!(GeodesicBox::from_reals(2.0, 3.0, f64::INFINITY, -1.0).is_ok());
        let b = GeodesicBox::from_reals(0.0, 1.0, 2.0, 3.0).unwrap();
        assert_eq!(b.cross_ratio(), b.swapped().cross_ratio());
    }

    #[test]
    fn parse_points() {
        assert!("inf".parse::<SpherePoint>().unwrap().is_infinity());
        assert_eq!("1.5".parse::<SpherePoint>().unwrap().value(), C64::new(1.5, 0.0));
        assert_eq!("1+2i".parse::<SpherePoint>().unwrap().value(), C64::new(1.0, 2.0));
        assert!("abc".parse::<SpherePoint>().is_err());
    }

    #[test]
    fn log1p_matches_direct() {
        for w in [C64::new(1e-5, 2e-6), C64::new(0.3, -0.2), C64::new(-0.4, 0.1), C64::new(2.0, 5.0)] {
            let direct = (ONE + w).ln();
            assert!((log1p_c(w) - direct).norm() <= 1e-15 * (1.0 + direct.norm()));
        }
        assert_relative_eq!(log1p_r(1e-4), (1e-4f64).ln_1p(), max_relative = 1e-15);
    }
}
