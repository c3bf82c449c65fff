//! Solving `f_z̄ = μ f_z` on a periodic grid.
//!
//! `cargo run --example beltrami_solver -- out.grid` also writes the solution.

use liouville::bers::grid_io::write_grid;
use liouville::bers::{smoothed_disk_indicator, solve_beltrami_grid, truncated_power, GridSpec};
use liouville::projective::C64;

fn main() -> liouville::error::Result<()> {
    let mu = smoothed_disk_indicator(C64::new(0.2, 0.0), 1.0, 0.4)?;
    let g = solve_beltrami_grid(&mu, GridSpec::new(256, 4.0)?, 60)?;
    println!("disk: {} iterations, residual {:.2e}", g.updates.len(), g.residual);
    println!("far field f ~ {:.4} z + {:.4}", g.far_field.0, g.far_field.1);

    // the radial stretch z|z|^t, cut off near 0 and ∞
    let t = 0.25;
    let mu = truncated_power(C64::new(t, 0.0), (0.1, 0.2), (5.0, 10.0))?;
    let g = solve_beltrami_grid(&mu, GridSpec::new(512, 16.0)?, 60)?;
    let dev = g.max_deviation(&|z: C64| z * z.norm().powf(t), 0.5, 2.0);
    println!("power: residual {:.2e}, max |f - z|z|^t| on 0.5 <= |z| <= 2: {dev:.2e}", g.residual);

    if let Some(path) = std::env::args().nth(1) {
        let n = g.spec.n;
        let values: Vec<C64> = (0..n * n).map(|k| g.value(k / n, k % n)).collect();
        write_grid(std::fs::File::create(&path)?, n, &values)?;
        println!("wrote {path}");
    }
    Ok(())
}
