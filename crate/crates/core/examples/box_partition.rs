//! Dyadic partitions of a box of geodesics and their cell masses.

use liouville::currents::{cell_measures, liouville_box_measure, partition_box, partition_constant, IdentityMap, PartitionScheme};
use liouville::projective::GeodesicBox;

fn main() -> liouville::error::Result<()> {
    let b = GeodesicBox::from_reals(0.0, 1.0, 2.0, 3.0)?;
    let l = liouville_box_measure(&b)?;
    println!("box [0,1]x[2,3]: measure {l:.12}, C(L) = {:.6}", partition_constant(l));
    println!("C(log 2) = {}", partition_constant(2f64.ln()));
    println!("{:>3} {:>7} {:>16} {:>12} {:>12}", "n", "cells", "sum", "max cell", "C 4^-n");
    for n in 0..=6 {
        let p = partition_box(&b, n, PartitionScheme::NormalizedEuclidean)?;
        let cells = cell_measures(&p, &IdentityMap, f64::INFINITY)?;
        let sum: f64 = cells.iter().map(|c| c.re).sum();
        let max = cells.iter().map(|c| c.re).fold(0.0, f64::max);
        println!("{n:>3} {:>7} {sum:>16.12} {max:>12.3e} {:>12.3e}", p.cell_count(), p.bound_constant() * 4f64.powi(-(n as i32)));
    }
    Ok(())
}
