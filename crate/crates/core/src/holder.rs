//! Hölder test functions supported in a geodesic box, and their step
//! approximations on dyadic partitions.
//!
//! Functions are described in arc coordinates `(u, v) ∈ [0,1]²`: `u` is
//! the angle from `a` toward `b` seen from `z0 = i`, divided by the angle
//! of the whole arc, and likewise `v` on `[c, d]`. Distances between
//! geodesics are `max(d(x1,x2), d(y1,y2))` with `d` the angle distance.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::currents::{partition_box, BoxPartition, PartitionScheme};
use crate::error::{Error, Result};
use crate::projective::{angle_distance, arc_angle, boundary_angle, point_at_angle, GeodesicBox, SpherePoint, C64};

/// Deepest level accepted by [`step_approximation`].
pub const MAX_STEP_LEVEL: u32 = 12;

/// Reference point of the angle metric.
pub const Z0: C64 = C64::new(0.0, 1.0);

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

type UvFn = Arc<dyn Fn(f64, f64) -> C64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    /// `h(u) h(v)`, `h(u) = clamp(4 min(u, 1-u), 0, 1)^λ`.
    Bump,
    /// `(4u(1-u))^λ (4v(1-v))^λ`.
    Product,
    /// Bilinear interpolation of a table over `[0,1]²`, `rows` along `u`.
    Table { rows: usize, cols: usize, values: Arc<Vec<C64>> },
    /// Constant on the closed box; a step function, not Hölder.
    Indicator,
    Custom(UvFn),
    Combination(Vec<(C64, HolderFunction)>),
}

/// A test function supported in one geodesic box.
#[derive(Clone)]
pub struct HolderFunction {
    lambda: f64,
    constant: f64,
    support: GeodesicBox,
    scale: C64,
    shape: Shape,
    theta_a: f64,
    len_ab: f64,
    theta_c: f64,
    len_cd: f64,
}

impl fmt::Debug for HolderFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.shape {
            Shape::Bump => "bump",
            Shape::Product => "product",
            Shape::Table { .. } => "table",
            Shape::Indicator => "indicator",
            Shape::Custom(_) => "custom",
            Shape::Combination(_) => "combination",
        };
        f.debug_struct("HolderFunction")
            .field("kind", &kind)
            .field("lambda", &self.lambda)
            .field("constant", &self.constant)
            .field("scale", &self.scale)
            .finish()
    }
}

/// Arc coordinate of angle `theta` on an arc starting at `theta0`.
#[inline]
fn arc_coordinate(theta: f64, theta0: f64, len: f64) -> Option<f64> {
    let mut d = theta - theta0;
    if d < 0.0 {
        d += TAU;
    }
    if d > TAU - 1e-12 {
        return Some(0.0);
    }
    let u = d / len;
    if u <= 1.0 {
        Some(u)
    } else if u <= 1.0 + 1e-12 {
        Some(1.0)
    } else {
        None
    }
}

#[inline]
fn ramp(u: f64, lambda: f64) -> f64 {
    let r = (4.0 * u.min(1.0 - u)).clamp(0.0, 1.0);
    if lambda == 1.0 {
        r
    } else {
        r.powf(lambda)
    }
}

#[inline]
fn parabola(u: f64, lambda: f64) -> f64 {
    let r = (4.0 * u * (1.0 - u)).clamp(0.0, 1.0);
    if lambda == 1.0 {
        r
    } else {
        r.powf(lambda)
    }
}

impl HolderFunction {
    fn base(support: &GeodesicBox, lambda: f64, constant: f64, shape: Shape) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::ParameterOutOfRange(format!("exponent {lambda} not in (0, 1]")));
        }
        Ok(HolderFunction {
            lambda,
            constant,
            support: *support,
            scale: ONE,
            shape,
            theta_a: boundary_angle(&support.a, Z0),
            len_ab: arc_angle(&support.a, &support.b, Z0),
            theta_c: boundary_angle(&support.c, Z0),
            len_cd: arc_angle(&support.c, &support.d, Z0),
        })
    }

    /// Tensor bump with plateau 1 on the middle half of each arc.
    pub fn bump(support: &GeodesicBox, lambda: f64) -> Result<Self> {
        let mut f = Self::base(support, lambda, 0.0, Shape::Bump)?;
        f.constant = (4.0 / f.len_ab).powf(lambda) + (4.0 / f.len_cd).powf(lambda);
        Ok(f)
    }

    /// Tensor of `(4u(1-u))^λ` profiles, peak 1 at the center.
    pub fn product(support: &GeodesicBox, lambda: f64) -> Result<Self> {
        let mut f = Self::base(support, lambda, 0.0, Shape::Product)?;
        f.constant = (4.0 / f.len_ab).powf(lambda) + (4.0 / f.len_cd).powf(lambda);
        Ok(f)
    }

    /// Bilinear table over `[0,1]²`; `values[i * cols + j]` sits at
    /// `(i/(rows-1), j/(cols-1))`. The border must vanish.
    pub fn table(support: &GeodesicBox, lambda: f64, rows: usize, cols: usize, values: Vec<C64>) -> Result<Self> {
        if rows < 2 || cols < 2 || values.len() != rows * cols {
            return Err(Error::ParameterOutOfRange(format!(
                "table needs rows, cols ≥ 2 and rows·cols values, got {rows}×{cols} with {}",
                values.len()
            )));
        }
        for i in 0..rows {
            for j in 0..cols {
                let border = i == 0 || j == 0 || i == rows - 1 || j == cols - 1;
                if border && values[i * cols + j] != ZERO {
                    return Err(Error::ParameterOutOfRange("table border must be zero".into()));
                }
            }
        }
        let mut lu = 0.0f64;
        let mut lv = 0.0f64;
        let mut m = 0.0f64;
        for i in 0..rows {
            for j in 0..cols {
                let x = values[i * cols + j];
                m = m.max(x.norm());
                if i + 1 < rows {
                    lu = lu.max((values[(i + 1) * cols + j] - x).norm() * (rows - 1) as f64);
                }
                if j + 1 < cols {
                    lv = lv.max((values[i * cols + j + 1] - x).norm() * (cols - 1) as f64);
                }
            }
        }
        let mut f = Self::base(support, lambda, 0.0, Shape::Table { rows, cols, values: Arc::new(values) })?;
        let lip = lu / f.len_ab + lv / f.len_cd;
        // a bounded Lipschitz function is λ-Hölder with (2M)^{1-λ} L^λ
        f.constant = (2.0 * m).powf(1.0 - lambda) * lip.powf(lambda);
        Ok(f)
    }

    /// Constant `value` on the closed box: a step function, infinite
    /// Hölder constant.
    pub fn indicator(support: &GeodesicBox) -> Self {
        Self::base(support, 1.0, f64::INFINITY, Shape::Indicator).expect("exponent 1")
    }

    /// Arbitrary function of the arc coordinates with a declared constant.
    pub fn from_uv<F>(support: &GeodesicBox, lambda: f64, constant: f64, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> C64 + Send + Sync + 'static,
    {
        Self::base(support, lambda, constant, Shape::Custom(Arc::new(f)))
    }

    /// `α f + β g` for two functions on the same box.
    pub fn combine(alpha: C64, f: &HolderFunction, beta: C64, g: &HolderFunction) -> Result<Self> {
        if f.support != g.support {
            return Err(Error::ParameterOutOfRange("combined functions need the same support box".into()));
        }
        let lambda = f.lambda.min(g.lambda);
        let constant = alpha.norm() * f.holder_constant_at(lambda) + beta.norm() * g.holder_constant_at(lambda);
        Self::base(&f.support, lambda, constant, Shape::Combination(vec![(alpha, f.clone()), (beta, g.clone())]))
    }

    /// The function multiplied by `s`.
    pub fn scaled(&self, s: C64) -> Self {
        let mut f = self.clone();
        f.scale *= s;
        f.constant *= s.norm();
        f
    }

    /// Hölder constant for a smaller exponent, using that angle
    /// distances are at most π.
    fn holder_constant_at(&self, lambda: f64) -> f64 {
        self.constant * std::f64::consts::PI.powf(self.lambda - lambda)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Declared Hölder constant in the angle metric.
    pub fn holder_constant(&self) -> f64 {
        self.constant
    }

    pub fn support(&self) -> &GeodesicBox {
        &self.support
    }

    pub fn is_step(&self) -> bool {
        match &self.shape {
            Shape::Indicator => true,
            Shape::Combination(parts) => parts.iter().all(|(_, f)| f.is_step()),
            _ => false,
        }
    }

    /// Angular lengths of the two arcs.
    pub fn arc_lengths(&self) -> (f64, f64) {
        (self.len_ab, self.len_cd)
    }

    /// Coordinate `u` of a boundary point on `[a, b]`, if it lies there.
    #[inline]
    pub fn u_of(&self, x: &SpherePoint) -> Option<f64> {
        arc_coordinate(boundary_angle(x, Z0), self.theta_a, self.len_ab)
    }

    #[inline]
    pub fn v_of(&self, y: &SpherePoint) -> Option<f64> {
        arc_coordinate(boundary_angle(y, Z0), self.theta_c, self.len_cd)
    }

    /// Value at arc coordinates inside the box.
    pub fn eval_uv(&self, u: f64, v: f64) -> C64 {
        let raw = match &self.shape {
            Shape::Bump => C64::new(ramp(u, self.lambda) * ramp(v, self.lambda), 0.0),
            Shape::Product => C64::new(parabola(u, self.lambda) * parabola(v, self.lambda), 0.0),
            Shape::Table { rows, cols, values } => {
                let x = u * (*rows - 1) as f64;
                let y = v * (*cols - 1) as f64;
                let i = (x.floor() as usize).min(rows - 2);
                let j = (y.floor() as usize).min(cols - 2);
                let (fx, fy) = (x - i as f64, y - j as f64);
                let at = |p: usize, q: usize| values[p * cols + q];
                at(i, j) * ((1.0 - fx) * (1.0 - fy))
                    + at(i + 1, j) * (fx * (1.0 - fy))
                    + at(i, j + 1) * ((1.0 - fx) * fy)
                    + at(i + 1, j + 1) * (fx * fy)
            }
            Shape::Indicator => ONE,
            Shape::Custom(f) => f(u, v),
            Shape::Combination(parts) => parts.iter().map(|(s, f)| s * f.eval_uv(u, v)).sum(),
        };
        raw * self.scale
    }

    /// Separable factors `ξ = p(u) q(v)` when the shape has them.
    pub fn factors(&self) -> Option<(Box<dyn Fn(f64) -> C64 + '_>, Box<dyn Fn(f64) -> C64 + '_>)> {
        let lambda = self.lambda;
        let s = self.scale;
        match self.shape {
            Shape::Bump => Some((Box::new(move |u| s * ramp(u, lambda)), Box::new(move |v| C64::new(ramp(v, lambda), 0.0)))),
            Shape::Product => Some((
                Box::new(move |u| s * parabola(u, lambda)),
                Box::new(move |v| C64::new(parabola(v, lambda), 0.0)),
            )),
            Shape::Indicator => Some((Box::new(move |_| s), Box::new(|_| ONE))),
            _ => None,
        }
    }

    /// `ξ(x, y)`; zero off the support.
    pub fn eval(&self, x: &SpherePoint, y: &SpherePoint) -> C64 {
        match (self.u_of(x), self.v_of(y)) {
            (Some(u), Some(v)) => self.eval_uv(u, v),
            _ => ZERO,
        }
    }

    pub fn sup_norm_bound(&self) -> f64 {
        match &self.shape {
            Shape::Table { values, .. } => values.iter().map(|v| v.norm()).fold(0.0, f64::max) * self.scale.norm(),
            Shape::Custom(_) => f64::NAN,
            Shape::Combination(parts) => parts.iter().map(|(s, f)| s.norm() * f.sup_norm_bound()).sum(),
            _ => self.scale.norm(),
        }
    }
}

/// Distance between geodesics `(x1,y1)` and `(x2,y2)`.
pub fn geodesic_distance(x1: &SpherePoint, y1: &SpherePoint, x2: &SpherePoint, y2: &SpherePoint) -> f64 {
    angle_distance(x1, x2, Z0).max(angle_distance(y1, y2, Z0))
}

/// Default seed of [`holder_constant_estimate`].
pub const ESTIMATE_SEED: u64 = 0x5eed_401d;

/// Largest sampled Hölder quotient; half the pairs are near-diagonal
/// with separation in `[1e-6, 1e-1]`. Prefixes of the same pair stream
/// are used, so the estimate never decreases with `samples`.
pub fn holder_constant_estimate(f: &HolderFunction, samples: usize) -> f64 {
    holder_constant_estimate_seeded(f, samples, ESTIMATE_SEED)
}

pub fn holder_constant_estimate_seeded(f: &HolderFunction, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (la, lc) = f.arc_lengths();
    // angle windows slightly larger than the support
    let (ta, tc) = (f.theta_a - 0.05 * la, f.theta_c - 0.05 * lc);
    let (wa, wc) = (1.1 * la, 1.1 * lc);
    let mut best = 0.0f64;
    for k in 0..samples {
        let th1 = ta + wa * rng.gen::<f64>();
        let ph1 = tc + wc * rng.gen::<f64>();
        let (th2, ph2) = if k % 2 == 0 {
            let r = 10f64.powf(-6.0 + 5.0 * rng.gen::<f64>());
            let sa = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            let sc = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            match rng.gen_range(0..4) {
                0 => (th1 + sa * r, ph1),
                1 => (th1, ph1 + sc * r),
                2 => (th1 + sa * r, ph1 + sc * r),
                _ => (th1 + sa * r, ph1 + sc * r * rng.gen::<f64>()),
            }
        } else {
            (ta + wa * rng.gen::<f64>(), tc + wc * rng.gen::<f64>())
        };
        let (x1, y1) = (point_at_angle(th1, Z0), point_at_angle(ph1, Z0));
        let (x2, y2) = (point_at_angle(th2, Z0), point_at_angle(ph2, Z0));
        let d = geodesic_distance(&x1, &y1, &x2, &y2);
        if d <= 0.0 {
            continue;
        }
        let q = (f.eval(&x1, &y1) - f.eval(&x2, &y2)).norm() / d.powf(f.lambda());
        best = best.max(q);
    }
    best
}

/// `ξₙ`: on cell `(i, j)` the value `ξ(a_i, c_j)`.
#[derive(Clone, Debug)]
pub struct StepApproximation {
    source: HolderFunction,
    partition: BoxPartition,
}

pub fn step_approximation(f: &HolderFunction, n: u32) -> Result<StepApproximation> {
    if n > MAX_STEP_LEVEL {
        return Err(Error::LevelTooDeep(n));
    }
    let partition = partition_box(f.support(), n, PartitionScheme::NormalizedEuclidean)?;
    Ok(StepApproximation { source: f.clone(), partition })
}

impl StepApproximation {
    pub fn partition(&self) -> &BoxPartition {
        &self.partition
    }

    pub fn source(&self) -> &HolderFunction {
        &self.source
    }

    /// Value on cell `(i, j)`, `1 ≤ i, j ≤ 2ⁿ`.
    pub fn cell_value(&self, i: usize, j: usize) -> C64 {
        self.source.eval(&self.partition.a_points()[i], &self.partition.c_points()[j])
    }

    /// Cell containing `(x, y)`, if inside the box.
    pub fn locate(&self, x: &SpherePoint, y: &SpherePoint) -> Option<(usize, usize)> {
        self.source.u_of(x)?;
        self.source.v_of(y)?;
        let n = self.partition.intervals();
        let (u, v) = self.partition.normalized_coords(x, y);
        let cs = self.partition.c_star();
        let fi = ((u + 1.0) * n as f64 - 1e-9).ceil();
        let fj = ((v - cs) / (1.0 - cs) * n as f64 - 1e-9).ceil();
        let clamp = |f: f64| (f.max(1.0) as usize).min(n);
        Some((clamp(fi), clamp(fj)))
    }

    pub fn eval(&self, x: &SpherePoint, y: &SpherePoint) -> C64 {
        match self.locate(x, y) {
            Some((i, j)) => self.cell_value(i, j),
            None => ZERO,
        }
    }

    /// Largest cell diameter in the angle metric.
    pub fn max_cell_diameter(&self) -> f64 {
        let arcs = |pts: &[SpherePoint]| {
            pts.windows(2).map(|w| angle_distance(&w[0], &w[1], Z0)).fold(0.0, f64::max)
        };
        arcs(self.partition.a_points()).max(arcs(self.partition.c_points()))
    }

    /// `2ⁿ · max diam`: the partition's diameter constant.
    pub fn diameter_constant(&self) -> f64 {
        self.max_cell_diameter() * self.partition.intervals() as f64
    }

    /// `C · (max diam)^λ`.
    pub fn sup_error_bound(&self) -> f64 {
        self.source.holder_constant() * self.max_cell_diameter().powf(self.source.lambda())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_box() -> GeodesicBox {
        GeodesicBox::from_reals(0.0, 1.0, 2.0, 3.0).unwrap()
    }

    fn center(f: &HolderFunction) -> (SpherePoint, SpherePoint) {
        let (la, lc) = f.arc_lengths();
        (point_at_angle(f.theta_a + la / 2.0, Z0), point_at_angle(f.theta_c + lc / 2.0, Z0))
    }

    #[test]
    fn bump_examples() {
        let f = HolderFunction::bump(&unit_box(), 1.0).unwrap();
        let (x, y) = center(&f);
        assert_relative_eq!(f.eval(&x, &y).re, 1.0);
        assert_eq!(f.eval(&SpherePoint::real(-0.5), &y), ZERO);
        assert_eq!(f.eval(&x, &SpherePoint::real(5.0)), ZERO);
        let (la, lc) = f.arc_lengths();
        assert_relative_eq!(f.holder_constant(), 4.0 / la + 4.0 / lc, epsilon = 1e-12);
    }

    #[test]
    fn estimate_close_to_declared_constant() {
        let f = HolderFunction::bump(&unit_box(), 1.0).unwrap();
        let est = holder_constant_estimate(&f, 100_000);
        assert!(est <= f.holder_constant() * (1.0 + 1e-3));
        assert!(est >= 0.9 * f.holder_constant(), "{est} vs {}", f.holder_constant());
        let g = f.scaled(C64::new(2.0, 0.0));
        assert_relative_eq!(holder_constant_estimate(&g, 5_000), 2.0 * holder_constant_estimate(&f, 5_000), max_relative = 1e-9);
        assert!(holder_constant_estimate(&f, 2_000) <= holder_constant_estimate(&f, 4_000));
        let half = HolderFunction::bump(&unit_box(), 0.5).unwrap();
        assert!(holder_constant_estimate(&half, 20_000) <= half.holder_constant() * (1.0 + 1e-3));
    }

    #[test]
    fn indicator_is_constant_on_box() {
        let f = HolderFunction::indicator(&unit_box());
        assert!(f.is_step());
        for n in 0..4 {
            let s = step_approximation(&f, n).unwrap();
            let k = s.partition().intervals();
            for i in 1..=k {
                for j in 1..=k {
                    assert_eq!(s.cell_value(i, j), ONE);
                }
            }
        }
    }

    #[test]
    fn step_locate_and_bound() {
        let f = HolderFunction::bump(&GeodesicBox::from_reals(-2.0, 0.5, 1.0, 4.0).unwrap(), 1.0).unwrap();
        let s = step_approximation(&f, 5).unwrap();
        let p = s.partition();
        // upper corner of a cell lies in that cell
        for (i, j) in [(1, 1), (7, 20), (32, 32)] {
            let (x, y) = (&p.a_points()[i], &p.c_points()[j]);
            assert_eq!(s.locate(x, y), Some((i, j)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (la, lc) = f.arc_lengths();
        let bound = s.sup_error_bound();
        for _ in 0..2000 {
            let x = point_at_angle(f.theta_a + la * rng.gen::<f64>(), Z0);
            let y = point_at_angle(f.theta_c + lc * rng.gen::<f64>(), Z0);
            assert!((s.eval(&x, &y) - f.eval(&x, &y)).norm() <= bound * (1.0 + 1e-9));
        }
        assert!(matches!(step_approximation(&f, 13), Err(Error::LevelTooDeep(13))));
    }

    #[test]
    fn table_and_combination() {
        let b = unit_box();
        let mut vals = vec![ZERO; 9];
        vals[4] = C64::new(2.0, -1.0);
        let t = HolderFunction::table(&b, 1.0, 3, 3, vals).unwrap();
        assert_eq!(t.eval_uv(0.5, 0.5), C64::new(2.0, -1.0));
        assert_eq!(t.eval_uv(0.25, 0.5), C64::new(1.0, -0.5));
        assert!(holder_constant_estimate(&t, 20_000) <= t.holder_constant() * (1.0 + 1e-3));
        assert!(HolderFunction::table(&b, 1.0, 3, 3, vec![ONE; 9]).is_err());
        let f = HolderFunction::bump(&b, 1.0).unwrap();
        let g = HolderFunction::product(&b, 1.0).unwrap();
        let h = HolderFunction::combine(C64::new(2.0, 0.0), &f, C64::new(0.0, 1.0), &g).unwrap();
        let (x, y) = (SpherePoint::real(0.3), SpherePoint::real(2.6));
        let want = f.eval(&x, &y) * 2.0 + g.eval(&x, &y) * C64::new(0.0, 1.0);
        assert!((h.eval(&x, &y) - want).norm() < 1e-15);
        assert!(holder_constant_estimate(&h, 20_000) <= h.holder_constant() * (1.0 + 1e-3));
        let other = HolderFunction::bump(&GeodesicBox::from_reals(0.0, 1.0, 2.0, 4.0).unwrap(), 1.0).unwrap();
        assert!(HolderFunction::combine(ONE, &f, ONE, &other).is_err());
    }
}
