//! A half-ball violation at `x0 = 0` turned into a sequence with `F(u_n) < F(0)`.

use bvlsc::integrand::{catalog, RecessionFn};
use bvlsc::mesh::{build_mesh, Domain};
use bvlsc::qslb::{halfball_deficit, halfball_mesh, QslbOptions};
use bvlsc::sequences::{necessity_witness, DEFAULT_WITNESS_N};
use bvlsc::Mat;
use std::sync::Arc;

fn main() -> bvlsc::Result<()> {
    let domain = Domain::unit_interval();
    let f = catalog::linear(&Mat::scalar(1.0));
    let finf = RecessionFn::analytic(&f);
    let bp = domain.boundary_point(&[0.0, 0.0])?;
    let r = halfball_deficit(&finf, &bp, halfball_mesh(&bp, 1, 0.05)?, &QslbOptions::default())?;
    println!("half-ball quotient {:+.4}", r.deficit);
    let witness = r.witness.expect("violations carry a witness");
    let omega = Arc::new(build_mesh(&domain, 1.0 / 16.0)?);
    let cert = necessity_witness(&f, &finf, &domain, omega, &bp, &witness, r.deficit, &DEFAULT_WITNESS_N, 1e-6)?;
    for row in &cert.rows {
        println!("n = {:2}  F(u_n) - F(0) = {:+.4}", row.n, row.energy_gap);
    }
    println!("liminf {:+.4} <= threshold {:+.4}: {}", cert.liminf_estimate, cert.threshold, cert.holds);
    Ok(())
}
