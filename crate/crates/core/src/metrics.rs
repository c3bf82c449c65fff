//! Hyperbolic distances on the upper half-plane and the punctured disk,
//! the comparison density near a puncture of the twice-punctured plane,
//! and the decay bound for quasiconformal cross-ratio distortion.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::projective::C64;

/// Deck translates `z ↦ z + 2πk`, `|k| ≤ K_MAX`, searched by
/// [`dist_punctured_disk`].
pub const K_MAX: i32 = 8;

/// Default constant of the comparison density near 1.
pub const DEFAULT_C1: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricDomain {
    UpperHalfPlane,
    PuncturedDisk,
    TwicePuncturedLowerBound,
}

#[derive(Clone, Copy, Debug)]
pub struct MetricSample {
    pub location: C64,
    pub density: f64,
    pub domain: MetricDomain,
}

impl MetricSample {
    pub fn upper_half_plane(z: C64) -> Result<Self> {
        if !(z.im > 0.0) {
            return Err(Error::OutOfDomain(format!("{z} is not in the upper half-plane")));
        }
        Ok(MetricSample { location: z, density: 1.0 / z.im, domain: MetricDomain::UpperHalfPlane })
    }

    pub fn punctured_disk(z: C64) -> Result<Self> {
        let r = z.norm();
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::OutOfDomain(format!("{z} is not in the punctured disk")));
        }
        Ok(MetricSample { location: z, density: 1.0 / (r * (1.0 / r).ln()), domain: MetricDomain::PuncturedDisk })
    }

    pub fn twice_punctured_lower_bound(z: C64, c1: f64) -> Result<Self> {
        Ok(MetricSample {
            location: z,
            density: lower_bound_density_01(z, c1)?,
            domain: MetricDomain::TwicePuncturedLowerBound,
        })
    }
}

/// Hyperbolic distance on the upper half-plane (curvature -1).
pub fn dist_h(z1: C64, z2: C64) -> Result<f64> {
    if !(z1.im > 0.0) || !(z2.im > 0.0) {
        return Err(Error::OutOfDomain("point not in the upper half-plane".into()));
    }
    Ok(2.0 * ((z1 - z2).norm() / (2.0 * (z1.im * z2.im).sqrt())).asinh())
}

/// Lift of a punctured-disk point through `τ(z) = e^{iz}`.
pub fn lift_punctured(b: C64) -> C64 {
    C64::new(b.arg(), (1.0 / b.norm()).ln())
}

/// Complete hyperbolic distance on `0 < |z| < 1`.
pub fn dist_punctured_disk(b1: C64, b2: C64) -> Result<f64> {
    for b in [b1, b2] {
        let r = b.norm();
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::OutOfDomain(format!("{b} is not in the punctured disk")));
        }
    }
    let z1 = lift_punctured(b1);
    let z2 = lift_punctured(b2);
    let mut best = f64::INFINITY;
    for k in -K_MAX..=K_MAX {
        let d = dist_h(z1, z2 + C64::new(TAU * k as f64, 0.0))?;
        best = best.min(d);
    }
    Ok(best)
}

/// `arcsinh(π / (2 log(1/β)))`.
pub fn radius_r_beta(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::OutOfDomain(format!("beta = {beta} not in (0, 1)")));
    }
    Ok((PI / (2.0 * (1.0 / beta).ln())).asinh())
}

#[derive(Clone, Copy, Debug)]
pub struct PuncturedDiskReport {
    pub rho: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compares `|b1|` with `β^{exp(-ρ(β, b1))}` for `b1` within `r(β)` of `β`.
pub fn check_punctured_disk_bound(beta: f64, b1: C64) -> Result<PuncturedDiskReport> {
    let radius = radius_r_beta(beta)?;
    let rho = dist_punctured_disk(C64::new(beta, 0.0), b1)?;
    if rho >= radius {
        return Err(Error::RadiusExceeded { rho, radius });
    }
    let lhs = b1.norm();
    let rhs = beta.powf((-rho).exp());
    Ok(PuncturedDiskReport { rho, lhs, rhs, holds: lhs <= rhs })
}

/// Comparison density `C1 / (|z-1| log(1/|z-1|))` near the puncture 1.
pub fn lower_bound_density_01(z: C64, c1: f64) -> Result<f64> {
    let r = (z - 1.0).norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::OutOfDomain(format!("|z - 1| = {r} not in (0, 1)")));
    }
    if !(c1 > 0.0 && c1 <= 1.0) {
        return Err(Error::OutOfDomain(format!("C1 = {c1} not in (0, 1]")));
    }
    Ok(c1 / (r * (1.0 / r).ln()))
}

/// Arithmetic-geometric mean with the right choice of square roots.
fn agm(mut a: C64, mut b: C64) -> C64 {
    for _ in 0..64 {
        let a1 = (a + b) * 0.5;
        let mut b1 = (a * b).sqrt();
        if (a1 - b1).norm() > (a1 + b1).norm() {
            b1 = -b1;
        }
        a = a1;
        b = b1;
        if (a - b).norm() <= 1e-16 * a.norm() {
            break;
        }
    }
    a
}

/// Complete elliptic integral of the first kind, parameter `m = k²`.
pub fn elliptic_k(m: C64) -> C64 {
    elliptic_k_complement(C64::new(1.0, 0.0) - m)
}

/// `K(1 - m1)`, taking the complementary parameter directly.
fn elliptic_k_complement(m1: C64) -> C64 {
    C64::new(PI / 2.0, 0.0) / agm(C64::new(1.0, 0.0), m1.sqrt())
}

fn density_parts(z: C64, one_minus_z: C64) -> Result<f64> {
    if z.norm() == 0.0 || one_minus_z.norm() == 0.0 {
        return Err(Error::OutOfDomain("puncture".into()));
    }
    // K(1-z) conj K(z); the cut of K along (1, ∞) only moves imaginary parts
    let k1 = elliptic_k_complement(z);
    let k2 = elliptic_k_complement(one_minus_z);
    let re = (k1 * k2.conj()).re;
    Ok(PI / (4.0 * z.norm() * one_minus_z.norm() * re.abs()))
}

/// Density of the complete curvature -1 metric on `ℂ \ {0, 1}`.
pub fn density_01(z: C64) -> Result<f64> {
    density_parts(z, C64::new(1.0, 0.0) - z)
}

/// [`density_01`] at `1 + w`, accurate for tiny `w`.
pub fn density_01_near_one(w: C64) -> Result<f64> {
    density_parts(C64::new(1.0, 0.0) + w, -w)
}

/// Largest radius `r` on a decimal log grid such that the comparison
/// density stays below the true density for all sampled `0 < |z-1| ≤ r`.
pub fn validity_radius_01(c1: f64) -> f64 {
    let dirs = 16;
    let mut best = 0.0;
    // scan from tiny radii outward; stop at the first failure
    let mut k = 400;
    while k >= 1 {
        let r = 10f64.powf(-(k as f64) / 20.0);
        let mut ok = true;
        for j in 0..dirs {
            let w = C64::from_polar(r, TAU * j as f64 / dirs as f64);
            let lb = c1 / (r * (1.0 / r).ln());
            match density_01_near_one(w) {
                Ok(t) if lb <= t => {}
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        best = r;
        k -= 1;
    }
    best
}

/// `x^{1/(K+ε)}`: the distortion bound for `|cr - 1|` under a
/// `K`-quasiconformal map fixing `0, 1, ∞`.
pub fn decay_bound(cr_minus_1: f64, k: f64, eps: f64) -> Result<f64> {
    if !(cr_minus_1 >= 0.0 && cr_minus_1 < 1.0) {
        return Err(Error::OutOfDomain(format!("|cr - 1| = {cr_minus_1} not in [0, 1)")));
    }
    if !(k >= 1.0) || !(eps > 0.0) {
        return Err(Error::OutOfDomain(format!("K = {k}, eps = {eps}")));
    }
    Ok(cr_minus_1.powf(1.0 / (k + eps)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const I: C64 = C64::new(0.0, 1.0);

    #[test]
    fn upper_half_plane_distance() {
        assert_eq!(dist_h(I, I).unwrap(), 0.0);
        assert_relative_eq!(dist_h(I, I * std::f64::consts::E).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(dist_h(I, C64::new(1.0, 1.0)).unwrap(), 0.962423650119206, epsilon = 1e-12);
        assert!(dist_h(I, C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn punctured_disk_distance() {
        let b = C64::new(0.4, 0.2);
        assert!(dist_punctured_disk(b, b).unwrap().abs() < 1e-15);
        let e = std::f64::consts::E;
        let d = dist_punctured_disk(C64::new(1.0 / e, 0.0), C64::new((-e).exp(), 0.0)).unwrap();
        assert_relative_eq!(d, 1.0, epsilon = 1e-12);
        let beta: f64 = 0.3;
        let th = 1e-5;
        let d = dist_punctured_disk(C64::new(beta, 0.0), C64::from_polar(beta, th)).unwrap();
        assert_relative_eq!(d, th / (1.0 / beta).ln(), max_relative = 1e-6);
        // crossing the cut of arg
        let gap = std::f64::consts::TAU - 6.2;
        let d1 = dist_punctured_disk(C64::from_polar(0.5, 3.1), C64::from_polar(0.5, -3.1)).unwrap();
        let d2 = dist_punctured_disk(C64::from_polar(0.5, gap / 2.0), C64::from_polar(0.5, -gap / 2.0)).unwrap();
        assert_relative_eq!(d1, d2, max_relative = 1e-10);
    }

    #[test]
    fn radius_examples() {
        assert_relative_eq!(radius_r_beta((-PI / 2.0).exp()).unwrap(), 0.881373587019543, epsilon = 1e-12);
        assert_relative_eq!(radius_r_beta((-1.0f64).exp()).unwrap(), 1.233403117511217, epsilon = 1e-12);
        assert!(radius_r_beta(1e-300).unwrap() < 0.003);
        assert!(radius_r_beta(1.0).is_err());
    }

    #[test]
    fn punctured_disk_bound_examples() {
        let r = check_punctured_disk_bound(0.5, C64::new(0.5, 0.0)).unwrap();
        assert!(r.holds && (r.lhs - r.rhs).abs() < 1e-15);
        let e = std::f64::consts::E;
        let r = check_punctured_disk_bound(1.0 / e, C64::new((-e).exp(), 0.0)).unwrap();
        assert_relative_eq!(r.rho, 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.rhs, (-1.0 / e).exp(), epsilon = 1e-12);
        assert!(r.holds);
        assert!(check_punctured_disk_bound(0.5, C64::from_polar(0.5, 0.1)).unwrap().holds);
        assert!(matches!(
            check_punctured_disk_bound(0.5, C64::new(1e-6, 0.0)),
            Err(Error::RadiusExceeded { .. })
        ));
    }

    #[test]
    fn comparison_density_examples() {
        let e = std::f64::consts::E;
        let one = C64::new(1.0, 0.0);
        assert_relative_eq!(lower_bound_density_01(one + 1.0 / e, 1.0).unwrap(), e, epsilon = 1e-13);
        assert_relative_eq!(lower_bound_density_01(one + (-2.0f64).exp(), 1.0).unwrap(), e * e / 2.0, epsilon = 1e-12);
        let z = C64::new(1.1, 0.05);
        assert_relative_eq!(
            lower_bound_density_01(z, 0.45).unwrap() * 2.0,
            lower_bound_density_01(z, 0.9).unwrap(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn exact_density_asymptotics() {
        // density ~ 1/(|w| log(16/|w|)) as w = z - 1 → 0
        for w in [1e-3, 1e-6, 1e-9] {
            let d = density_01(C64::new(1.0 + w, 0.0)).unwrap();
            let asym = 1.0 / (w * (16.0 / w).ln());
            assert_relative_eq!(d, asym, max_relative = 1e-3);
        }
        // symmetric under z ↦ 1 - z and conjugation
        let z = C64::new(0.3, 0.7);
        let a = density_01(z).unwrap();
        assert_relative_eq!(a, density_01(C64::new(1.0, 0.0) - z).unwrap(), max_relative = 1e-12);
        assert_relative_eq!(a, density_01(z.conj()).unwrap(), max_relative = 1e-12);
        // across the cut of K on (1, ∞)
        let above = density_01(C64::new(3.0, 1e-12)).unwrap();
        let below = density_01(C64::new(3.0, -1e-12)).unwrap();
        assert_relative_eq!(above, below, max_relative = 1e-9);
    }

    #[test]
    fn validity_radius_is_tiny_for_default_c1() {
        let r = validity_radius_01(DEFAULT_C1);
        assert!(r > 1e-12 && r < 1e-10, "r = {r}");
        assert!(validity_radius_01(0.5) > 1e-3);
    }

    #[test]
    fn decay_bound_examples() {
        assert_relative_eq!(decay_bound(0.01, 1.0, 1e-12).unwrap(), 0.01, max_relative = 1e-10);
        assert_relative_eq!(decay_bound(1e-4, 2.0, 0.1).unwrap(), 0.012_451_970_847_350, max_relative = 1e-12);
        assert_eq!(decay_bound(0.0, 3.0, 0.1).unwrap(), 0.0);
        assert!(decay_bound(1e-3, 2.0, 0.1).unwrap() < decay_bound(1e-3, 3.0, 0.1).unwrap());
    }
}
