//! Liouville measure of geodesic boxes and controlled dyadic partitions.
//!
//! A box `[a,b]×[c,d]` is moved by a real Möbius map onto
//! `[-1,0]×[c*,1]` with `c* = 1/(2 cr - 1)`. The default partition is
//! uniform in those coordinates, which gives every level-`n` cell a
//! measure of at most `(1-c*)/c*² · 4^{-n}`.

use crate::error::{Error, Result};
use crate::families::FamilyMember;
use crate::projective::{
    boundary_angle, bracket, log1p_c, log1p_r, mobius_through, point_at_angle, GeodesicBox, MobiusTransform,
    Quadruple, SpherePoint, C64,
};

/// Deepest partition level accepted by [`partition_box`].
pub const MAX_LEVEL: u32 = 16;

/// Cells with `|cr - 1|` below this carry no mass.
pub const ZERO_MASS: f64 = 1e-14;

/// A map of the boundary sphere applied to partition corners.
pub trait BoundaryMap: Sync {
    fn apply(&self, p: &SpherePoint) -> SpherePoint;

    /// Image plus its homogeneous derivative in the deformation parameter.
    fn apply_with_derivative(&self, p: &SpherePoint) -> (SpherePoint, Option<SpherePoint>) {
        (self.apply(p), None)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IdentityMap;

impl BoundaryMap for IdentityMap {
    fn apply(&self, p: &SpherePoint) -> SpherePoint {
        *p
    }

    fn apply_with_derivative(&self, p: &SpherePoint) -> (SpherePoint, Option<SpherePoint>) {
        (*p, Some(SpherePoint { z: C64::new(0.0, 0.0), w: C64::new(0.0, 0.0) }))
    }
}

impl BoundaryMap for MobiusTransform {
    fn apply(&self, p: &SpherePoint) -> SpherePoint {
        MobiusTransform::apply(self, p)
    }
}

impl BoundaryMap for FamilyMember {
    fn apply(&self, p: &SpherePoint) -> SpherePoint {
        self.fam.map(self.t, p)
    }

    fn apply_with_derivative(&self, p: &SpherePoint) -> (SpherePoint, Option<SpherePoint>) {
        self.fam.map_with_derivative(self.t, p)
    }
}

/// `log cr(a,b,c,d)` of a valid box.
pub fn liouville_box_measure(b: &GeodesicBox) -> Result<f64> {
    let w = b.quadruple().cross_ratio_minus_one();
    if !(w.re > 0.0) {
        return Err(Error::NonPositiveMass(1.0 + w.re));
    }
    Ok(log1p_r(w.re))
}

/// Real `γ` with `γ(a, b, d) = (-1, 0, 1)`, and `c* = γ(c)`.
pub fn normalize_box(b: &GeodesicBox) -> Result<(MobiusTransform, f64)> {
    let g = mobius_through(
        &b.a,
        &b.b,
        &b.d,
        &SpherePoint::real(-1.0),
        &SpherePoint::ZERO,
        &SpherePoint::ONE,
    )
    .map_err(|_| Error::DegenerateBox("corners coincide".into()))?;
    let cr = b.cross_ratio();
    if !(cr > 1.0) {
        return Err(Error::NonPositiveMass(cr));
    }
    Ok((g, 1.0 / (2.0 * cr - 1.0)))
}

/// `(1 - c*)/c*²` for a box of measure `l`.
pub fn partition_constant(l: f64) -> f64 {
    let c_star = 1.0 / (2.0 * l.exp() - 1.0);
    (1.0 - c_star) / (c_star * c_star)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PartitionScheme {
    /// Uniform in the coordinates of [`normalize_box`].
    NormalizedEuclidean,
    /// Equal angles seen from `z0`.
    AngleEqual { z0: C64 },
}

#[derive(Clone, Debug)]
pub struct BoxPartition {
    root: GeodesicBox,
    level: u32,
    a: Vec<SpherePoint>,
    c: Vec<SpherePoint>,
    scheme: PartitionScheme,
    gamma: MobiusTransform,
    c_star: f64,
}

/// Real homogeneous image of a real point under a real matrix.
fn real_image(m: &[f64; 4], x: f64) -> SpherePoint {
    let z = m[0] * x + m[1];
    let w = m[2] * x + m[3];
    SpherePoint { z: C64::new(z, 0.0), w: C64::new(w, 0.0) }
}

pub fn partition_box(b: &GeodesicBox, n: u32, scheme: PartitionScheme) -> Result<BoxPartition> {
    if n > MAX_LEVEL {
        return Err(Error::LevelTooDeep(n));
    }
    let (gamma, c_star) = normalize_box(b)?;
    let count = 1usize << n;
    let step = 1.0 / count as f64;
    let (mut a, mut c) = (Vec::with_capacity(count + 1), Vec::with_capacity(count + 1));
    match scheme {
        PartitionScheme::NormalizedEuclidean => {
            let inv = gamma
                .inverse()
                .real_entries(1e-12)
                .ok_or_else(|| Error::DegenerateBox("normalizing map is not real".into()))?;
            for i in 0..=count {
                a.push(real_image(&inv, -1.0 + i as f64 * step));
                c.push(real_image(&inv, c_star + (1.0 - c_star) * i as f64 * step));
            }
        }
        PartitionScheme::AngleEqual { z0 } => {
            for (out, from, to) in [(&mut a, &b.a, &b.b), (&mut c, &b.c, &b.d)] {
                let t0 = boundary_angle(from, z0);
                let mut len = boundary_angle(to, z0) - t0;
                if len <= 0.0 {
                    len += std::f64::consts::TAU;
                }
                for i in 0..=count {
                    out.push(point_at_angle(t0 + len * i as f64 * step, z0));
                }
            }
        }
    }
    a[0] = b.a;
    a[count] = b.b;
    c[0] = b.c;
    c[count] = b.d;
    Ok(BoxPartition { root: *b, level: n, a, c, scheme, gamma, c_star })
}

impl BoxPartition {
    pub fn root(&self) -> &GeodesicBox {
        &self.root
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn scheme(&self) -> PartitionScheme {
        self.scheme
    }

    pub fn a_points(&self) -> &[SpherePoint] {
        &self.a
    }

    pub fn c_points(&self) -> &[SpherePoint] {
        &self.c
    }

    pub fn intervals(&self) -> usize {
        self.a.len() - 1
    }

    pub fn cell_count(&self) -> usize {
        self.intervals() * self.intervals()
    }

    /// Normalizing map of the root box.
    pub fn gamma(&self) -> &MobiusTransform {
        &self.gamma
    }

    pub fn c_star(&self) -> f64 {
        self.c_star
    }

    /// `C(L) = (1 - c*)/c*²`.
    pub fn bound_constant(&self) -> f64 {
        (1.0 - self.c_star) / (self.c_star * self.c_star)
    }

    /// Cell `[a_{i-1}, a_i] × [c_{j-1}, c_j]`, `1 ≤ i, j ≤ 2ⁿ`.
    pub fn cell(&self, i: usize, j: usize) -> Quadruple {
        Quadruple { a: self.a[i - 1], b: self.a[i], c: self.c[j - 1], d: self.c[j] }
    }

    /// Normalized coordinates `(u, v) ∈ [-1,0]×[c*,1]` of a point pair.
    pub fn normalized_coords(&self, x: &SpherePoint, y: &SpherePoint) -> (f64, f64) {
        let u = self.gamma.apply(x).value().re;
        let v = self.gamma.apply(y).value().re;
        (u, v)
    }
}

/// `log cr` of every cell after mapping corners through `f`, in row-major
/// order `(i, j)`; `guard` bounds `|cr - 1|` from level 2 on.
pub fn cell_measures(p: &BoxPartition, f: &dyn BoundaryMap, guard: f64) -> Result<Vec<C64>> {
    let ma: Vec<SpherePoint> = p.a.iter().map(|x| f.apply(x)).collect();
    let mc: Vec<SpherePoint> = p.c.iter().map(|x| f.apply(x)).collect();
    let n = p.intervals();
    let mut out = Vec::with_capacity(n * n);
    for i in 1..=n {
        let ab = bracket(&ma[i - 1], &ma[i]);
        for j in 1..=n {
            let w = ab * bracket(&mc[j - 1], &mc[j]) / (bracket(&ma[i - 1], &mc[j]) * bracket(&ma[i], &mc[j - 1]));
            out.push(cell_log(w, p.level, i, j, guard)?);
        }
    }
    Ok(out)
}

/// Principal `log(1 + w)` for one cell, with the branch guard.
#[inline]
pub fn cell_log(w: C64, level: u32, i: usize, j: usize, guard: f64) -> Result<C64> {
    let n2 = w.norm_sqr();
    if n2 < ZERO_MASS * ZERO_MASS {
        return Ok(C64::new(0.0, 0.0));
    }
    if !(1.0 + w.re > 0.0) || (level >= 2 && !(n2 < guard * guard)) {
        return Err(Error::BranchViolation { level, i, j, re: 1.0 + w.re, im: w.im });
    }
    if w.im == 0.0 {
        return Ok(C64::new(log1p_r(w.re), 0.0));
    }
    Ok(log1p_c(w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::HolomorphicQCFamily;
    use approx::assert_relative_eq;

    #[test]
    fn box_measure_examples() {
        let b = GeodesicBox::from_reals(0.0, 1.0, 2.0, 3.0).unwrap();
        assert_relative_eq!(liouville_box_measure(&b).unwrap(), (4.0f64 / 3.0).ln(), epsilon = 1e-15);
        let b = GeodesicBox::from_reals(-1.0, 0.0, 0.5, 1.0).unwrap();
        assert_relative_eq!(liouville_box_measure(&b).unwrap(), 1.5f64.ln(), epsilon = 1e-15);
        let l = 0.7f64;
        let cs = 1.0 / (2.0 * l.exp() - 1.0);
        let b = GeodesicBox::from_reals(-1.0, 0.0, cs, 1.0).unwrap();
        assert_relative_eq!(liouville_box_measure(&b).unwrap(), l, epsilon = 1e-14);
    }

    #[test]
    fn normalize_examples() {
        let b = GeodesicBox::from_reals(0.0, 1.0, 2.0, 3.5).unwrap();
        let (g, cs) = normalize_box(&b).unwrap();
        assert!(g.is_real(1e-12));
        let img = b.map(&g).unwrap();
        assert!(img.c.projectively_eq(&SpherePoint::real(cs), 1e-13));
        assert_relative_eq!(liouville_box_measure(&img).unwrap(), liouville_box_measure(&b).unwrap(), epsilon = 1e-13);
        let b = GeodesicBox::from_reals(-1.0, 0.0, 0.5, 1.0).unwrap();
        let (g, cs) = normalize_box(&b).unwrap();
        assert_relative_eq!(cs, 0.5, epsilon = 1e-15);
        assert!(g.approx_eq(&MobiusTransform::identity(), 1e-14));
        let b = GeodesicBox::from_reals(-1.0, 0.0, 1.0 / 3.0, 1.0).unwrap();
        assert_relative_eq!(normalize_box(&b).unwrap().1, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn partition_examples() {
        let b = GeodesicBox::from_reals(-1.0, 0.0, 1.0 / 3.0, 1.0).unwrap();
        let p = partition_box(&b, 1, PartitionScheme::NormalizedEuclidean).unwrap();
        assert_relative_eq!(p.bound_constant(), 6.0, epsilon = 1e-13);
        let m = cell_measures(&p, &IdentityMap, 1.0).unwrap();
        // cell [-1,-1/2]×[1/3,2/3]
        assert_relative_eq!(m[0].re, (28.0f64 / 25.0).ln(), epsilon = 1e-14);
        assert!(m.iter().all(|x| x.re <= 6.0 / 4.0));
        let p0 = partition_box(&b, 0, PartitionScheme::NormalizedEuclidean).unwrap();
        let m0 = cell_measures(&p0, &IdentityMap, 1.0).unwrap();
        assert_relative_eq!(m0[0].re, 2f64.ln(), epsilon = 1e-15);
        assert!(matches!(partition_box(&b, 17, PartitionScheme::NormalizedEuclidean), Err(Error::LevelTooDeep(17))));
    }

    #[test]
    fn angle_scheme_symmetry() {
        let b = GeodesicBox::from_reals(-3.0, -1.0, 1.0, 3.0).unwrap();
        let z0 = C64::new(0.0, 1.0);
        let p = partition_box(&b, 3, PartitionScheme::AngleEqual { z0 }).unwrap();
        let n = p.intervals();
        for i in 0..=n {
            let x = p.a_points()[i].value().re;
            let y = p.c_points()[n - i].value().re;
            assert_relative_eq!(x, -y, epsilon = 1e-12);
        }
        let total: f64 = cell_measures(&p, &IdentityMap, 1.0).unwrap().iter().map(|c| c.re).sum();
        assert_relative_eq!(total, liouville_box_measure(&b).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn nesting_under_refinement() {
        let b = GeodesicBox::from_reals(2.0, 5.0, f64::INFINITY, -4.0).unwrap();
        let p = partition_box(&b, 4, PartitionScheme::NormalizedEuclidean).unwrap();
        let q = partition_box(&b, 5, PartitionScheme::NormalizedEuclidean).unwrap();
        for i in 0..=p.intervals() {
            assert!(p.a_points()[i].projectively_eq(&q.a_points()[2 * i], 1e-13));
            assert!(p.c_points()[i].projectively_eq(&q.c_points()[2 * i], 1e-13));
        }
    }

    #[test]
    fn power_stretch_cells() {
        let b = GeodesicBox::from_reals(0.0, 1.0, 2.0, 3.0).unwrap();
        let p = partition_box(&b, 0, PartitionScheme::NormalizedEuclidean).unwrap();
        let fam = HolomorphicQCFamily::power_stretch(1.5).unwrap();
        let f = FamilyMember { fam: fam.clone(), t: C64::new(1.0, 0.0) };
        let m = cell_measures(&p, &f, 1.0).unwrap();
        assert_relative_eq!(m[0].re, (32.0f64 / 27.0).ln(), epsilon = 1e-14);
        let p2 = partition_box(&b, 2, PartitionScheme::NormalizedEuclidean).unwrap();
        let f = FamilyMember { fam, t: C64::new(0.0, 0.1) };
        let m = cell_measures(&p2, &f, 1.0).unwrap();
        assert!(m.iter().any(|c| c.im != 0.0));
        let whole = f.apply(&b.a);
        let q = Quadruple::new(whole, f.apply(&b.b), f.apply(&b.c), f.apply(&b.d)).unwrap();
        let total: C64 = m.iter().sum();
        assert!((total - q.log_cross_ratio()).norm() < 1e-12);
    }
}
