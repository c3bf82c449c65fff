//! Holomorphic families of quasiconformal maps fixing 0, 1 and ∞.

use liouville::families::{max_dilatation, HolomorphicQCFamily};
use liouville::metrics::decay_bound;
use liouville::projective::{Quadruple, SpherePoint, C64};

fn main() -> liouville::error::Result<()> {
    let power = HolomorphicQCFamily::power_stretch(1.5)?;
    let vertical = HolomorphicQCFamily::vertical_stretch(1.5)?;

    for t in [C64::new(0.25, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.5)] {
        println!("power t = {t}: K = {:.4}, |mu| = {:.4}", power.dilatation(t), power.mu_norm(t));
    }
    println!("sup K on |t| <= 0.5: {:.4}", max_dilatation(&power, 0.5)?);

    // a quadruple close to degenerate and its image
    let q = Quadruple::from_reals(0.0, 1e-4, 1.0, f64::MAX.sqrt())?;
    let s = q.cross_ratio_minus_one().norm();
    let t = C64::new(1.0, 0.0);
    let image = Quadruple::new(
        power.map(t, &q.a),
        power.map(t, &q.b),
        power.map(t, &q.c),
        power.map(t, &q.d),
    )?;
    let k = power.dilatation(t);
    println!("|cr - 1| = {s:.3e} -> {:.3e}, bound {:.3e}", image.cross_ratio_minus_one().norm(), decay_bound(s, k, 0.1)?);

    // the vertical stretch is the identity on the real line
    let x = SpherePoint::real(-2.5);
    println!("vertical f^t(-2.5) = {}", vertical.map(C64::new(0.3, 0.4), &x));
    println!("off the line: f^t(i) = {}", vertical.map_c(C64::new(0.3, 0.4), C64::new(0.0, 1.0)));
    Ok(())
}
