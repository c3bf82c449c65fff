//! Reference values of `∬ ξ(x,y) dx dy / (x-y)²` by adaptive cubature.
//!
//! The integral is taken in boundary-angle coordinates seen from `i`, where
//! the Liouville density becomes `dθ dφ / (4 sin²((θ-φ)/2))`. Rectangles
//! are refined with a tensor 7/15-point Gauss–Kronrod pair, worst first.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::holder::{HolderFunction, Z0};
use crate::projective::{arc_angle, boundary_angle, point_at_angle, C64};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
// Gauss weights on the odd Kronrod nodes 1, 3, 5, 7.
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Nodes and Kronrod/Gauss weights on `[-1, 1]`, 15 points.
fn rule() -> [(f64, f64, f64); 15] {
    let mut out = [(0.0, 0.0, 0.0); 15];
    for k in 0..7 {
        let wg = if k % 2 == 1 { WG[k / 2] } else { 0.0 };
        out[k] = (-XGK[k], WGK[k], wg);
        out[14 - k] = (XGK[k], WGK[k], wg);
    }
    out[7] = (0.0, WGK[7], WG[3]);
    out
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub value: C64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct Rect {
    t0: f64,
    t1: f64,
    p0: f64,
    p1: f64,
    value: C64,
    err: f64,
}

impl PartialEq for Rect {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Rect {}
impl PartialOrd for Rect {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Rect {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Default budget: 4·10⁷ integrand evaluations, absolute target `1e-11`.
pub fn quadrature_oracle(xi: &HolderFunction) -> Result<OracleResult> {
    quadrature_oracle_with(xi, 1e-11, 40_000_000)
}

pub fn quadrature_oracle_with(xi: &HolderFunction, tol: f64, max_evals: usize) -> Result<OracleResult> {
    let b = xi.support();
    let q = b.quadruple();
    let ta = boundary_angle(&q.a, Z0);
    let la = arc_angle(&q.a, &q.b, Z0);
    let tc = boundary_angle(&q.c, Z0);
    let lc = arc_angle(&q.c, &q.d, Z0);
    let rule = rule();
    let integrate = |t0: f64, t1: f64, p0: f64, p1: f64| -> Rect {
        let (ht, hp) = ((t1 - t0) / 2.0, (p1 - p0) / 2.0);
        let (mt, mp) = ((t1 + t0) / 2.0, (p1 + p0) / 2.0);
        let mut k = C64::new(0.0, 0.0);
        let mut g = C64::new(0.0, 0.0);
        for &(xt, wkt, wgt) in &rule {
            let th = mt + ht * xt;
            let x = point_at_angle(th, Z0);
            for &(xp, wkp, wgp) in &rule {
                let ph = mp + hp * xp;
                let y = point_at_angle(ph, Z0);
                let s = ((th - ph) / 2.0).sin();
                let v = xi.eval(&x, &y) / (4.0 * s * s);
                k += v * (wkt * wkp);
                if wgt != 0.0 && wgp != 0.0 {
                    g += v * (wgt * wgp);
                }
            }
        }
        let scale = ht * hp;
        Rect { t0, t1, p0, p1, value: k * scale, err: ((k - g) * scale).norm() }
    };
    let mut heap = BinaryHeap::new();
    let mut evals = 0usize;
    let split = 4;
    for a in 0..split {
        for c in 0..split {
            let (t0, t1) = (ta + la * a as f64 / split as f64, ta + la * (a + 1) as f64 / split as f64);
            let (p0, p1) = (tc + lc * c as f64 / split as f64, tc + lc * (c + 1) as f64 / split as f64);
            heap.push(integrate(t0, t1, p0, p1));
            evals += 225;
        }
    }
    let mut total_err: f64 = heap.iter().map(|r| r.err).sum();
    loop {
        if total_err <= tol {
            break;
        }
        if evals + 4 * 225 > max_evals {
            return Err(Error::QuadratureBudgetExceeded(total_err));
        }
        let r = heap.pop().expect("nonempty");
        let (tm, pm) = ((r.t0 + r.t1) / 2.0, (r.p0 + r.p1) / 2.0);
        total_err -= r.err;
        for q in [
            integrate(r.t0, tm, r.p0, pm),
            integrate(tm, r.t1, r.p0, pm),
            integrate(r.t0, tm, pm, r.p1),
            integrate(tm, r.t1, pm, r.p1),
        ] {
            total_err += q.err;
            heap.push(q);
        }
        evals += 4 * 225;
        // refresh against drift in the running sum
        if heap.len() % 4096 == 0 {
            total_err = heap.iter().map(|r| r.err).sum();
        }
    }
    // sum smallest contributions first
    let mut rects = heap.into_vec();
    rects.sort_by(|a, b| a.value.norm().total_cmp(&b.value.norm()));
    let value = rects.iter().fold(C64::new(0.0, 0.0), |s, r| s + r.value);
    let error_estimate = rects.iter().map(|r| r.err).sum();
    Ok(OracleResult { value, error_estimate, evaluations: evals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projective::GeodesicBox;

    #[test]
    fn step_box_measure() {
        let b = GeodesicBox::from_reals(0.0, 1.0, 2.0, 3.0).unwrap();
        let r = quadrature_oracle(&HolderFunction::indicator(&b)).unwrap();
        assert!((r.value.re - (4.0f64 / 3.0).ln()).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn budget_exhaustion() {
        let b = GeodesicBox::from_reals(0.0, 1.0, 1.001, 3.0).unwrap();
        let xi = HolderFunction::bump(&b, 0.3).unwrap();
        assert!(matches!(quadrature_oracle_with(&xi, 1e-14, 10_000), Err(Error::QuadratureBudgetExceeded(_))));
    }
}
