//! The harness checks as a library: decay, derivative bound and rate.

use liouville::engine::verify::{verify_decay, verify_derivative_bound, verify_rate, QuadrupleSource};
use liouville::engine::Deformation;
use liouville::families::HolomorphicQCFamily;
use liouville::holder::HolderFunction;
use liouville::projective::{GeodesicBox, C64};

fn main() -> liouville::error::Result<()> {
    let fam = HolomorphicQCFamily::power_stretch(1.5)?;
    let source = QuadrupleSource { count: 2000, ..QuadrupleSource::default() };

    let decay = verify_decay(&fam, &[C64::new(0.5, 0.0), C64::new(1.0, 0.0)], &source, 0.1)?;
    for f in &decay.fits {
        println!("decay K = {:.2}: exponent {:.4} (needs {:.4})", f.k, f.exponent, f.required);
    }
    println!("decay violations: {}", decay.violations);

    let d = verify_derivative_bound(&fam, 0.5, &source, 0.1)?;
    println!("derivative: K_r = {}, C_fit = {:.4}, held-out violations {}", d.k_r, d.c_fit, d.violations);

    let b = GeodesicBox::from_reals(0.0, 1.0, 2.0, 3.0)?;
    let rate = verify_rate(&HolderFunction::bump(&b, 1.0)?, &Deformation::Identity, 2, 8, 0.5)?;
    println!("rate: slope {:.4} against bound {:.4}", rate.slope, rate.bound);
    Ok(())
}
