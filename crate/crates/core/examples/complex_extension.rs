//! The current pushed through a quasi-Fuchsian deformation, at complex t.

use liouville::engine::{eval_derivative, eval_extension, EvalParams};
use liouville::families::HolomorphicQCFamily;
use liouville::holder::HolderFunction;
use liouville::projective::{GeodesicBox, MobiusTransform, C64};

fn main() -> liouville::error::Result<()> {
    let b = GeodesicBox::from_reals(0.0, 1.0, 2.0, 3.0)?;
    let xi = HolderFunction::indicator(&b);
    let fam = HolomorphicQCFamily::power_stretch(1.5)?;
    let id = MobiusTransform::identity();
    let p = EvalParams::default();
    for t in [C64::new(0.0, 0.0), C64::new(0.1, 0.0), C64::new(0.0, 0.1), C64::new(0.3, -0.3)] {
        let (v, _) = eval_extension(&xi, &id, &fam, t, &p)?;
        let (d, _) = eval_derivative(&xi, &id, &fam, t, &p)?;
        println!("t = {t:<10} W = {v:.10}  dW/dt = {d:.10}");
    }
    println!("(1/2)log 3 - log 2 = {:.10}", 0.5 * 3f64.ln() - 2f64.ln());

    let smooth = HolderFunction::bump(&b, 1.0)?;
    let (v, tr) = eval_extension(&smooth, &id, &fam, C64::new(0.0, 0.2), &p)?;
    println!("bump at t = 0.2i: {v:.8} after {} levels", tr.last_level());
    Ok(())
}
