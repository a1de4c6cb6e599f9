//! `F(u) = Du(0, 1)` along `u_n = chi_(0, 1/n)`: every member costs -1, the limit costs 0.

use bvlsc::functional::eval_f;
use bvlsc::integrand::{catalog, RecessionFn};
use bvlsc::mesh::Domain;
use bvlsc::sequences::{empirical_liminf, generate, SequenceKind, SequenceSpec};
use bvlsc::Mat;

fn main() -> bvlsc::Result<()> {
    let f = catalog::linear(&Mat::scalar(1.0));
    let finf = RecessionFn::analytic(&f);
    for (label, a) in [("(0, 1)", 0.0), ("(-1, 1)", -1.0)] {
        let spec = SequenceSpec {
            kind: SequenceKind::JumpMigration { anchor: 0.0 },
            domain: Domain::Interval { a, b: 1.0 },
            h: 1.0 / 16.0,
            n_max: 32,
        };
        println!("domain {label}");
        for n in [1, 2, 4, 8, 32] {
            let v = eval_f(&f, &finf, &generate(&spec, n)?)?;
            println!("  n = {n:2}  F = {:+.3}  (bulk {:+.3}, singular {:+.3})", v.total, v.bulk, v.singular);
        }
        let r = empirical_liminf(&f, &finf, &spec, 32)?;
        println!("  liminf ~ {:+.3}, F(limit) = {:+.3}: {:?}", r.liminf_estimate, r.limit_value, r.verdict);
    }
    Ok(())
}
