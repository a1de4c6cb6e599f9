//! `F(phi(k x))` on `(0, 1)` against the half-ball integral of `f(phi')`.

use bvlsc::integrand::catalog;
use bvlsc::mesh::Domain;
use bvlsc::sequences::{limit_energy_check, Profile};

fn main() -> bvlsc::Result<()> {
    let f = catalog::negnorm(1, 1);
    for profile in [Profile::Hat, Profile::Skew, Profile::Trapezoid] {
        let r = limit_energy_check(&f, &profile, &Domain::unit_interval(), &[0.0, 0.0], 64, 1.0 / 32.0)?;
        println!("{profile:?}: half-ball integral {:+.4}", r.half_ball_integral);
        for row in &r.rows {
            println!("  k = {:2}  F = {:+.6}  gap {:.1e}", row.k, row.value, row.relative_gap);
        }
    }
    Ok(())
}
