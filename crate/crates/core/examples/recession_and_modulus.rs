//! Recession estimates on the catalog and the sampled modulus `mu(t)`.

use bvlsc::integrand::{catalog, mu_table, recession_estimate, RecessionFn, DEFAULT_T_GRID};
use bvlsc::Mat;

fn main() -> bvlsc::Result<()> {
    let xi = Mat::from_entries(1, 2, &[3.0, -4.0]);
    let x = [0.3, 0.7];
    let fs = [catalog::area(1, 2), catalog::norm_sin(1, 2), catalog::linear(&Mat::from_entries(1, 2, &[1.0, 2.0]))];
    for f in &fs {
        let finf = RecessionFn::analytic(f);
        let est = recession_estimate(f, &x, &xi, &DEFAULT_T_GRID)?;
        println!("{:9} estimate {:.8}  analytic {:.8}  rate {:?}", f.tag(), est.value, finf.eval(&x, &xi), est.rate);
    }
    let grid = [0.0, 1.0, 10.0, 100.0, 1e3, 1e6];
    println!("\n{:>8} {:>12} {:>12}", "t", "mu sampled", "mu analytic");
    let area = &fs[0];
    for m in mu_table(area, &RecessionFn::analytic(area), &grid, &[x], 256, 0) {
        println!("{:>8.0e} {:>12.3e} {:>12.3e}", m.t, m.sampled, m.analytic.unwrap_or(f64::NAN));
    }
    Ok(())
}
