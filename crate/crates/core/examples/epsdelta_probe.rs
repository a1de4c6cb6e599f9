//! Epsilon-delta probe at a corner of the unit square, where no half-ball form applies.

use bvlsc::integrand::catalog;
use bvlsc::mesh::{unit_square_mesh, Domain};
use bvlsc::qslb::{epsdelta_probe, EpsDeltaOptions};

fn main() -> bvlsc::Result<()> {
    let mesh = unit_square_mesh(8)?;
    let corner = [0.0, 0.0];
    println!("boundary kind at {corner:?}: {:?}", Domain::unit_square().boundary_point(&corner)?.kind);
    for f in [catalog::norm(1, 2), catalog::linear(&bvlsc::Mat::from_entries(1, 2, &[1.0, 1.0]))] {
        let r = epsdelta_probe(&f, &mesh, &corner, &EpsDeltaOptions::default())?;
        println!("{}: {:?}", f.tag(), r.verdict);
        for row in &r.rows {
            println!("  eps {} delta {}  minima {:?}  {:?}", row.eps, row.delta, row.minima, row.signature);
        }
    }
    Ok(())
}
