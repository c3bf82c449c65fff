//! Cross-ratios on the Riemann sphere and their invariance under Möbius maps.

use liouville::projective::{normalize_quadruple, MobiusTransform, Quadruple, SpherePoint, C64};

fn main() -> liouville::error::Result<()> {
    let q = Quadruple::from_reals(0.0, 1.0, 2.0, 3.0)?;
    println!("cr(0,1,2,3)      = {}", q.cross_ratio());
    println!("log cr           = {}", q.log_cross_ratio());

    let g = MobiusTransform::new(C64::new(1.0, 2.0), C64::new(-0.5, 0.0), C64::new(0.3, -1.0), C64::new(2.0, 0.0))?;
    let moved = q.map(&g);
    println!("after g          = {}", moved.cross_ratio());

    // send a, b, c to 0, 1, ∞; d lands on the cross-ratio coordinate
    let (m, x) = normalize_quadruple(&q)?;
    println!("normalized d     = {x} (map det {})", m.det());

    let with_inf = Quadruple::new(SpherePoint::real(1.0), SpherePoint::real(1.5), SpherePoint::INFINITY, SpherePoint::ZERO)?;
    println!("cr(1,1.5,inf,0)  = {}", with_inf.cross_ratio());

    match Quadruple::from_reals(0.0, 0.0, 1.0, 2.0) {
        Err(e) => println!("degenerate input: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
