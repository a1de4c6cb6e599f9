//! Half-ball quotient for three recession functions at the bottom edge of the unit square.

use bvlsc::integrand::{catalog, RecessionFn};
use bvlsc::mesh::Domain;
use bvlsc::qslb::{halfball_deficit, halfball_mesh, QslbOptions};
use std::time::Instant;

fn main() -> bvlsc::Result<()> {
    let bp = Domain::unit_square().boundary_point(&[0.5, 0.0])?;
    let (nu, t) = ([bp.normal[0], bp.normal[1]], [-bp.normal[1], bp.normal[0]]);
    let mesh = halfball_mesh(&bp, 2, 0.05)?;
    println!("normal {:?}, {} cells, h = {:.4}", bp.normal, mesh.num_cells(), mesh.h());
    let cases = [
        ("a⊗nu", catalog::boundary_null_lagrangian(&[2.0], &nu)),
        ("a⊗t", catalog::boundary_null_lagrangian(&[2.0], &t)),
        ("norm", catalog::norm(1, 2)),
    ];
    for (name, f) in cases {
        let start = Instant::now();
        let r = halfball_deficit(&RecessionFn::analytic(&f), &bp, mesh.clone(), &QslbOptions::default())?;
        println!("{name:6} deficit {:+.6}  C_inf {:.3}  {:?}  ({:.2?})", r.deficit, r.c_inf, r.verdict, start.elapsed());
    }
    Ok(())
}
