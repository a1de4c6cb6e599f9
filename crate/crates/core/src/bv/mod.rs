//! Discrete BV functions, their derivative measures, and measure diagnostics.

mod function;
mod measure;
mod ops;

pub use function::{Atom, BvFunction};
pub use measure::{Charge, ChargeSupport, CompactSet, MatrixMeasure, Region};
pub(crate) use ops::{abs_affine_1d, abs_affine_triangle};
pub use ops::{
    distance_cutoff, does_not_charge, l1_distance, weakstar_diagnostics, ChargeReport, ChargeVerdict, WeakStarReport, WeakStarVerdict,
    CHARGE_THRESHOLD,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;
    use crate::mesh::{interval_mesh, rectangle_mesh, unit_square_mesh, Mesh};
    use std::sync::Arc;

    fn unit(n: usize) -> Arc<Mesh> {
        Arc::new(interval_mesh(0.0, 1.0, n).unwrap())
    }

    fn jump_at(mesh: Arc<Mesh>, z: f64) -> BvFunction {
        BvFunction::piecewise_constant_1d(mesh, &[z], &[1.0, 0.0]).unwrap()
    }

    #[test]
    fn indicator_derivative_is_negative_atom() {
        let u = jump_at(unit(10), 0.25);
        let du = u.derivative();
        assert_eq!(du.charges().len(), 1);
        let ch = &du.charges()[0];
        assert_eq!(ch.support, ChargeSupport::Atom([0.25, 0.0]));
        assert_eq!(ch.value().get(0, 0), -1.0);
        assert_eq!(du.total_variation(None), 1.0);
        assert!(du.cell_masses().iter().all(|&m| m == 0.0));
    }

    #[test]
    fn affine_has_no_singular_part() {
        let mesh = Arc::new(unit_square_mesh(3).unwrap());
        let xi = Mat::from_rows(&[vec![1.0, -2.0]]).unwrap();
        let u = BvFunction::affine(mesh.clone(), &xi, &[0.5]);
        let du = u.derivative();
        assert!(du.charges().is_empty());
        for c in 0..mesh.num_cells() {
            assert!((*du.density(c) - xi).norm() < 1e-12);
        }
    }

    #[test]
    fn facet_charge_matches_distributional_pairing() {
        // two cells sharing the vertical edge x = 1
        let mesh = Arc::new(rectangle_mesh(0.0, 2.0, 0.0, 1.0, 2, 1).unwrap());
        let u = BvFunction::from_cell_fn(mesh.clone(), 2, |c, _| if mesh.centroid(c)[0] > 1.0 { vec![3.0, -1.0] } else { vec![0.0, 0.0] });
        let du = u.derivative();
        let vertical: Vec<_> = du
            .charges()
            .iter()
            .filter(|c| matches!(c.support, ChargeSupport::Facet(f) if mesh.facets()[f].normal[0].abs() > 0.5))
            .collect();
        assert_eq!(vertical.len(), 1);
        let v = vertical[0].value();
        // <Du, Phi> = -int u div Phi; for Phi = E_{i1}, pairing = jump_i * length
        let sign = mesh.facets()[match vertical[0].support {
            ChargeSupport::Facet(f) => f,
            _ => unreachable!(),
        }]
        .normal[0];
        assert!((v.get(0, 0) * sign - 3.0).abs() < 1e-12);
        assert!((v.get(1, 0) * sign + 1.0).abs() < 1e-12);
        assert!(v.get(0, 1).abs() < 1e-12);
    }

    #[test]
    fn charge_polar_recombines() {
        let u = jump_at(unit(8), 0.3).with_atom(0.6, vec![2.5]).unwrap();
        for ch in u.derivative().charges() {
            assert!((ch.polar.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cutoff_of_indicator() {
        let mesh = unit(8);
        let u = jump_at(mesh.clone(), 0.25);
        let phi: Vec<f64> = mesh.vertices().iter().map(|p| (1.0 - 2.0 * p[0]).max(0.0)).collect();
        let v = u.cutoff_multiply(&phi).unwrap();
        let dv = v.derivative();
        let atom = dv.charges().iter().find(|c| c.support == ChargeSupport::Atom([0.25, 0.0])).unwrap();
        assert!((atom.value().get(0, 0) + 0.5).abs() < 1e-12);
        // density u phi' = -2 on (0, 1/4), 0 beyond
        for c in 0..mesh.num_cells() {
            let x = mesh.centroid(c)[0];
            let expect = if x < 0.25 { -2.0 } else { 0.0 };
            assert!((dv.density(c).get(0, 0) - expect).abs() < 1e-12, "cell {c}");
        }
    }

    #[test]
    fn cutoff_identity_and_zero() {
        let mesh = unit(5);
        let u = jump_at(mesh.clone(), 0.37);
        let one = u.cutoff_multiply(&vec![1.0; mesh.num_vertices()]).unwrap();
        assert!(l1_distance(&one, &u).unwrap() < 1e-15);
        let zero = u.cutoff_multiply(&vec![0.0; mesh.num_vertices()]).unwrap();
        assert!(zero.atoms().is_empty());
        assert!(zero.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn charge_table_boundary_jump() {
        let mesh = unit(64);
        let seq: Vec<MatrixMeasure> = (1..=64).map(|n| jump_at(mesh.clone(), 1.0 / n as f64).derivative()).collect();
        let r = does_not_charge(&seq[1..], &CompactSet::point(0.0, 0.0), &[0.5, 0.1, 0.02], CHARGE_THRESHOLD).unwrap();
        assert!(r.table.iter().all(|t| t.1 == 1.0));
        assert_eq!(r.verdict, ChargeVerdict::ChargesK);
    }

    #[test]
    fn l1_and_weakstar_for_boundary_jump() {
        let mesh = unit(16);
        let zero = BvFunction::zeros(mesh.clone(), 1);
        let seq: Vec<BvFunction> = (1..=64).map(|n| jump_at(mesh.clone(), 1.0 / n as f64)).collect();
        for (i, u) in seq.iter().enumerate().skip(1) {
            assert!((l1_distance(u, &zero).unwrap() - 1.0 / (i + 1) as f64).abs() < 1e-14);
        }
        let r = weakstar_diagnostics(&seq[1..], &zero, 0.05).unwrap();
        assert_eq!(r.verdict, WeakStarVerdict::WeakStarPlausible);
        let tall: Vec<BvFunction> =
            (2..=64).map(|n| BvFunction::piecewise_constant_1d(mesh.clone(), &[1.0 / n as f64], &[n as f64, 0.0]).unwrap()).collect();
        let r = weakstar_diagnostics(&tall, &zero, 0.05).unwrap();
        assert_eq!(r.verdict, WeakStarVerdict::NotL1Converging);
    }

    #[test]
    fn abs_affine_triangle_sign_change() {
        // g = x - 1/2 on the unit right triangle: brute-force midpoint sum
        let p = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let exact = abs_affine_triangle(p, [-0.5, 0.5, -0.5]);
        let n = 400;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let (x, y) = ((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
                if x + y < 1.0 {
                    s += (x - 0.5).abs();
                }
            }
        }
        s /= (n * n) as f64;
        assert!((exact - s).abs() < 2e-3, "{exact} vs {s}");
    }
}
