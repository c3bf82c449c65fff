//! Schwarzian derivatives, cusped forms and the Ahlfors–Weill section.

use liouville::bers::{ahlfors_weill, equivariance_defect, poincare_series, schwarzian, CuspedForm, HalfPlane};
use liouville::families::CyclicFuchsianGroup;
use liouville::projective::C64;

fn main() -> liouville::error::Result<()> {
    let z = C64::new(0.3, 0.8);
    let s = schwarzian(&|w: C64| (w * 2.0).exp(), z, None)?;
    println!("S(e^(2z)) at {z} = {s:.10} (exact -2)");
    let s = schwarzian(&|w: C64| (w * 3.0 + 1.0) / (w - 2.0), z, None)?;
    println!("S(mobius) = {:.2e}", s.norm());

    // y²φ bounded on the lower half-plane
    let phi = CuspedForm::new(|w: C64| 0.1 / ((w - C64::new(0.0, 1.0)) * (w - C64::new(0.0, 1.0))), HalfPlane::Lower);
    println!("cusped norm of phi = {:.4}", phi.norm());
    let eta = ahlfors_weill(&phi)?;
    println!("harmonic Beltrami at {z}: {:.6}, norm {:.4}", eta.eval(z), eta.norm());

    let too_big = phi.scaled(C64::new(20.0, 0.0));
    println!("scaled by 20: {}", ahlfors_weill(&too_big).map(|_| "ok".to_string()).unwrap_or_else(|e| e.to_string()));

    // averaging over a cyclic group makes a form equivariant
    let g = CyclicFuchsianGroup::new(2.0)?;
    let avg = poincare_series(|w: C64| 0.05 / ((w - C64::new(1.0, 1.0)).powi(4)), HalfPlane::Lower, 2.0, 40)?;
    let samples = [C64::new(0.5, -0.5), C64::new(-1.0, -2.0), C64::new(3.0, -0.1)];
    println!("equivariance defect: {:.2e}", equivariance_defect(&avg, &g.generator(), &samples));
    Ok(())
}
