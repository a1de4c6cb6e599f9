//! `|G(mu_n) - G(lambda_n)|` along pairs with `|mu_n - lambda_n|(Omega) = 1/n`.

use bvlsc::bv::MatrixMeasure;
use bvlsc::functional::uniform_continuity_probe;
use bvlsc::integrand::{catalog, RecessionFn};
use bvlsc::mesh::unit_square_mesh;
use bvlsc::Mat;
use std::sync::Arc;

fn main() -> bvlsc::Result<()> {
    let mesh = Arc::new(unit_square_mesh(8)?);
    let xi = Mat::from_entries(1, 2, &[0.6, -0.3]);
    let eta = Mat::from_entries(1, 2, &[0.0, 1.0]);
    let pairs: Vec<_> = [1usize, 4, 16, 64]
        .iter()
        .map(|&n| {
            let mu = MatrixMeasure::uniform_density(mesh.clone(), &xi).with_atom([0.5, 0.5], &Mat::from_entries(1, 2, &[1.0, 0.0]));
            let lambda = MatrixMeasure::uniform_density(mesh.clone(), &(xi + eta.scale(1.0 / n as f64)))
                .with_atom([0.5, 0.5], &Mat::from_entries(1, 2, &[1.0, 0.0]));
            (n, mu, lambda)
        })
        .collect();
    let f = catalog::area(1, 2);
    let r = uniform_continuity_probe(&f, &RecessionFn::analytic(&f), &pairs, 0.05)?;
    for row in &r.rows {
        println!("n = {:2}  TV gap {:.4}  G gap {:.4}", row.n, row.tv_gap, row.g_gap);
    }
    println!("{:?}", r.verdict);
    Ok(())
}
