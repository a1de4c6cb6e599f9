//! Local decomposition of `u_n = chi_(0, 1/n)` along the cover `{0} ∪ [1/8, 1]`.

use bvlsc::bv::{BvFunction, CompactSet};
use bvlsc::decompose::{local_decompose, verify_properties, CoverSpec};
use bvlsc::mesh::Domain;
use bvlsc::sequences::{generate, SequenceKind, SequenceSpec};

fn main() -> bvlsc::Result<()> {
    let spec =
        SequenceSpec { kind: SequenceKind::JumpMigration { anchor: 0.0 }, domain: Domain::unit_interval(), h: 1.0 / 32.0, n_max: 80 };
    let seq: Vec<BvFunction> = (1..=80).map(|n| generate(&spec, n)).collect::<bvlsc::Result<_>>()?;
    let cover = CoverSpec::new(vec![CompactSet::point(0.0, 0.0), CompactSet::interval(0.125, 1.0)]);
    let r = local_decompose(&seq, &cover, 32)?;
    println!("covers the domain: {} ({} vertices outside)", r.covers, r.uncovered_vertices);
    for m in r.members.iter().filter(|m| m.n.is_power_of_two()) {
        println!("n = {:2}  k = {:2}  coupling {:?}  component TV {:?}", m.n, m.k, m.coupling, m.component_tv);
    }
    let v = verify_properties(&r)?;
    println!("reassembly {:.1e}, (i) {}, (ii) {}", v.reassembly_error, v.property_i, v.property_ii);
    for st in &r.s_tables {
        let last = st.rows.last().unwrap();
        println!("S table for set {}: estimate {:.3e}, within 1/n: {}", st.set, last.estimate, last.within_bound);
    }
    Ok(())
}
