//! The distortion inequality `|β₁| ≤ β^{e^{-ρ}}` on the punctured disk.

use liouville::metrics::{check_punctured_disk_bound, dist_punctured_disk, radius_r_beta};
use liouville::projective::C64;

fn main() -> liouville::error::Result<()> {
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "beta", "r(beta)", "rho", "|b1|", "bound");
    for beta in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let r = radius_r_beta(beta)?;
        // a point most of the way to the edge of the admissible ball
        let mut b1 = C64::new(beta, 0.0);
        let step = C64::from_polar(0.01 * beta.min(1.0 - beta), 0.7);
        while dist_punctured_disk(C64::new(beta, 0.0), b1 + step)? < 0.9 * r {
            b1 += step;
        }
        let rep = check_punctured_disk_bound(beta, b1)?;
        println!("{beta:>6.2} {r:>10.4} {:>10.4} {:>10.6} {:>10.6}", rep.rho, rep.lhs, rep.rhs);
    }
    Ok(())
}
