//! The Liouville current of a bump function: partition series against cubature.

use liouville::currents::{liouville_box_measure, IdentityMap};
use liouville::engine::{eval_current, quadrature_oracle, EvalParams};
use liouville::holder::HolderFunction;
use liouville::projective::{GeodesicBox, MobiusTransform};

fn main() -> liouville::error::Result<()> {
    let b = GeodesicBox::from_reals(0.0, 1.0, 2.0, 3.0)?;
    let id = MobiusTransform::identity();

    let (step, _) = eval_current(&HolderFunction::indicator(&b), &id, &IdentityMap, &EvalParams::default())?;
    println!("indicator: {:.15} (log 4/3 = {:.15})", step.re, liouville_box_measure(&b)?);

    let xi = HolderFunction::bump(&b, 1.0)?;
    let (v, trace) = eval_current(&xi, &id, &IdentityMap, &EvalParams::default().with_tolerance(1e-7).with_n_max(14))?;
    for (n, s, d) in trace.rows() {
        println!("  n = {n:>2}  I_n = {:.12}  delta = {d:.3e}", s.re);
    }
    let oracle = quadrature_oracle(&xi)?;
    println!("series {:.12} ({:?}), cubature {:.12} ({} evaluations)", v.re, trace.termination, oracle.value.re, oracle.evaluations);
    Ok(())
}
