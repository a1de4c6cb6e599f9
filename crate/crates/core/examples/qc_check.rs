//! Quasiconvexity deficits on the clamped unit square for three integrands.

use bvlsc::integrand::catalog;
use bvlsc::qc::{qc_deficit, qc_mesh, QcOptions};
use bvlsc::Mat;

fn main() -> bvlsc::Result<()> {
    let mesh = qc_mesh(2, 4)?;
    let xi = Mat::from_entries(1, 2, &[0.5, 1.0]);
    let cases = [
        ("-|xi| at 0", catalog::negnorm(1, 2), Mat::zeros(1, 2)),
        ("area", catalog::area(1, 2), xi),
        ("linear", catalog::linear(&Mat::from_entries(1, 2, &[2.0, -1.0])), xi),
    ];
    for (name, f, xi) in cases {
        let r = qc_deficit(&f, &[0.5, 0.5], &xi, mesh.clone(), &QcOptions::default())?;
        println!("{name:11} deficit {:+.6}  {:?}", r.deficit, r.verdict);
        for row in &r.table {
            println!("    L = {:4}  {:+.6}  ({} iterations)", row.cap, row.deficit, row.iterations);
        }
        if let Some(w) = &r.witness {
            println!("    witness: {} vertices, max |grad| {:.3}", w.mesh.num_vertices(), w.max_gradient());
        }
    }
    Ok(())
}
