//! Meshes, boundary points and local patches `Omega ∩ B_delta(x0)`.

use bvlsc::mesh::{build_mesh, local_patch, Domain, PatchOptions};

fn main() -> bvlsc::Result<()> {
    let square = Domain::unit_square();
    let mesh = build_mesh(&square, 0.1)?;
    println!(
        "unit square: {} vertices, {} cells, h = {:.3}, area {:.12}",
        mesh.num_vertices(),
        mesh.num_cells(),
        mesh.h(),
        mesh.total_measure()
    );
    for x0 in [[0.5, 0.0], [0.0, 0.0], [1.0, 0.3]] {
        let bp = square.boundary_point(&x0)?;
        println!("  {x0:?}: {:?}, normal {:?}", bp.kind, bp.normal);
    }
    for delta in [0.4, 0.2, 0.1] {
        let p = local_patch(&mesh, &[0.5, 0.0], delta, PatchOptions::default())?;
        println!(
            "  patch delta = {delta}: {} cells, area {:.4} (half disk {:.4})",
            p.mesh.num_cells(),
            p.mesh.total_measure(),
            std::f64::consts::PI * delta * delta / 2.0
        );
    }
    let hb = build_mesh(&Domain::half_ball(&[0.0, -1.0]), 0.1)?;
    println!("half ball: {} cells, area {:.4} (exact {:.4})", hb.num_cells(), hb.total_measure(), std::f64::consts::FRAC_PI_2);
    Ok(())
}
