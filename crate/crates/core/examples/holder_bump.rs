//! Hölder test functions on a box and their step approximations.

use liouville::holder::{holder_constant_estimate, step_approximation, HolderFunction};
use liouville::projective::{GeodesicBox, SpherePoint};

fn main() -> liouville::error::Result<()> {
    let b = GeodesicBox::from_reals(-1.0, 0.5, 2.0, 7.0)?;
    for lambda in [0.3, 0.6, 1.0] {
        let xi = HolderFunction::bump(&b, lambda)?;
        println!("bump lambda = {lambda}: declared constant {:.3}, sampled {:.3}", xi.holder_constant(), holder_constant_estimate(&xi, 20_000));
    }
    let xi = HolderFunction::bump(&b, 1.0)?;
    let (x, y) = (SpherePoint::real(-0.2), SpherePoint::real(4.0));
    for n in [1, 3, 5, 7] {
        let s = step_approximation(&xi, n)?;
        println!("n = {n}: xi = {:.6}, xi_n = {:.6}, sup error bound {:.3e}", xi.eval(&x, &y).re, s.eval(&x, &y).re, s.sup_error_bound());
    }
    Ok(())
}
