use bvlsc::bv::{l1_distance, BvFunction, CompactSet};
use bvlsc::decompose::{local_decompose, verify_properties, CoverSpec};
use bvlsc::functional::eval_f;
use bvlsc::integrand::{catalog, Integrand, RecessionFn};
use bvlsc::mesh::{interval_mesh, rectangle_mesh, BoundaryKind, BoundaryPoint, Domain};
use bvlsc::minimize::SolverOptions;
use bvlsc::qc::{qc_deficit, qc_mesh, QcOptions};
use bvlsc::qslb::{halfball_deficit, halfball_mesh, QslbOptions};
use bvlsc::sequences::{generate, Profile, SequenceKind, SequenceSpec};
use bvlsc::verdict::{analyze, InteriorSamples, Overall, Scenario};
use bvlsc::{Mat, Point};
use proptest::prelude::*;
use std::sync::Arc;

fn quick() -> SolverOptions {
    SolverOptions { restarts: 2, max_iter: 200, ..Default::default() }
}

fn mat(rows: usize, cols: usize) -> impl Strategy<Value = Mat> {
    prop::collection::vec(-3.0..3.0f64, rows * cols).prop_map(move |e| Mat::from_entries(rows, cols, &e))
}

/// Piecewise-affine function on a uniform interval mesh with interior atoms.
fn bv_1d() -> impl Strategy<Value = BvFunction> {
    (4usize..24, prop::collection::vec(-2.0..2.0f64, 25), prop::collection::vec((0.05..0.95f64, -2.0..2.0f64), 0..4)).prop_map(
        |(n, vals, atoms)| {
            let mesh = Arc::new(interval_mesh(0.0, 1.0, n).unwrap());
            let mut u = BvFunction::from_vertex_values(mesh, 1, |v| vec![vals[v % vals.len()]]);
            for (x, j) in atoms {
                if j != 0.0 {
                    u = u.with_atom(x, vec![j]).unwrap();
                }
            }
            u
        },
    )
}

/// Cellwise affine, discontinuous across facets, on a small square mesh.
fn bv_2d() -> impl Strategy<Value = BvFunction> {
    (2usize..5, prop::collection::vec(-2.0..2.0f64, 3)).prop_map(|(n, c)| {
        let mesh = Arc::new(rectangle_mesh(0.0, 1.0, 0.0, 1.0, n, n).unwrap());
        BvFunction::from_cell_fn(mesh, 1, move |cell, p| vec![c[0] * p[0] + c[1] * p[1] + c[2] * (cell % 3) as f64])
    })
}

fn homogeneous_catalog(cols: usize) -> Vec<Integrand> {
    let mut t = vec![0.0; cols];
    t[cols - 1] = 1.0;
    vec![
        catalog::linear(&Mat::unit(1, cols, 0, 0)),
        catalog::norm(1, cols),
        catalog::negnorm(1, cols),
        catalog::boundary_null_lagrangian(&[1.0], &t),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cell_measures_tile_rectangles(nx in 1usize..12, ny in 1usize..12, w in 0.1..5.0f64, h in 0.1..5.0f64) {
        let mesh = rectangle_mesh(0.0, w, 0.0, h, nx, ny).unwrap();
        let sum: f64 = (0..mesh.num_cells()).map(|c| mesh.cell_measure(c)).sum();
        prop_assert!((sum - w * h).abs() <= 1e-10 * w * h);
    }

    #[test]
    fn derivative_is_linear_1d(u in bv_1d(), s in -3.0..3.0f64) {
        let v = u.scale(s).add_constant(&[0.3]);
        let lhs = u.add(&v).unwrap().derivative();
        let rhs = u.derivative().add(&v.derivative()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().total_variation(None) <= 1e-12 * (1.0 + lhs.total_variation(None)));
    }

    #[test]
    fn derivative_is_linear_2d(u in bv_2d(), s in -3.0..3.0f64) {
        let v = u.scale(s);
        let lhs = u.add(&v).unwrap().derivative();
        let rhs = u.derivative().add(&v.derivative()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().total_variation(None) <= 1e-12 * (1.0 + lhs.total_variation(None)));
    }

    #[test]
    fn total_variation_ignores_constants(u in bv_1d(), c in -5.0..5.0f64) {
        let a = u.derivative().total_variation(None);
        let b = u.add_constant(&[c]).derivative().total_variation(None);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
    }

    #[test]
    fn polar_parts_have_unit_norm(u in bv_2d()) {
        let du = u.derivative();
        for ch in du.charges() {
            prop_assert!((ch.polar.norm() - 1.0).abs() <= 1e-12);
            prop_assert!((ch.value().norm() - ch.mass).abs() <= 1e-12 * (1.0 + ch.mass));
        }
    }

    #[test]
    fn functional_splits_into_cells_and_charges(u in bv_1d()) {
        for f in catalog::basic(1, 1) {
            let v = eval_f(&f, &RecessionFn::analytic(&f), &u).unwrap();
            let parts: f64 = v.per_cell.iter().sum::<f64>() + v.per_charge.iter().sum::<f64>();
            prop_assert!((v.total - v.bulk - v.singular).abs() <= 1e-12 * (1.0 + v.total.abs()));
            prop_assert!((v.total - parts).abs() <= 1e-12 * (1.0 + v.total.abs()));
        }
    }

    #[test]
    fn homogeneous_functionals_scale(u in bv_2d(), alpha in 0.0..10.0f64) {
        for f in homogeneous_catalog(2) {
            let finf = RecessionFn::analytic(&f);
            let a = eval_f(&f, &finf, &u.scale(alpha)).unwrap().total;
            let b = alpha * eval_f(&f, &finf, &u).unwrap().total;
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn recession_is_one_homogeneous(xi in mat(2, 2), x in (0.0..1.0f64, 0.0..1.0f64)) {
        let x = [x.0, x.1];
        for f in catalog::basic(2, 2) {
            let finf = RecessionFn::analytic(&f);
            prop_assert_eq!(finf.eval(&x, &Mat::zeros(2, 2)), 0.0);
            for alpha in [0.0, 0.5, 2.0, 10.0] {
                let (a, b) = (finf.eval(&x, &xi.scale(alpha)), alpha * finf.eval(&x, &xi));
                prop_assert!((a - b).abs() <= 1e-10 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn deviation_is_bounded_by_modulus(xi in mat(1, 2), scale in 0.0..1e4f64, x in (0.0..1.0f64, 0.0..1.0f64)) {
        let x = [x.0, x.1];
        let xi = xi.scale(scale);
        let t = xi.norm();
        for f in catalog::basic(1, 2).into_iter().chain([catalog::area(1, 2), catalog::norm_sin(1, 2)]) {
            let finf = RecessionFn::analytic(&f);
            if let Some(mu) = f.mu_analytic(t, 2f64.sqrt()) {
                let gap = (f.eval(&x, &xi) - finf.eval(&x, &xi)).abs();
                prop_assert!(gap <= mu * (1.0 + t) + 4.0 * f64::EPSILON * (1.0 + t), "{}: {gap} > {mu} (1 + {t})", f.tag());
            }
        }
    }

    #[test]
    fn growth_bound_holds(xi in mat(2, 2), scale in 0.0..1e3f64) {
        let xi = xi.scale(scale);
        for f in catalog::basic(2, 2) {
            let c = f.growth(2f64.sqrt());
            prop_assert!(f.eval(&[0.4, 0.7], &xi).abs() <= c * (1.0 + xi.norm()) + 1e-12);
        }
    }

    #[test]
    fn jump_migration_has_unit_variation(n in 1usize..64, anchor in 0.0..0.5f64) {
        let spec = SequenceSpec { kind: SequenceKind::JumpMigration { anchor }, domain: Domain::Interval { a: 0.0, b: 1.0 }, h: 0.05, n_max: 64 };
        let u = generate(&spec, n).unwrap();
        let zero = BvFunction::zeros(u.mesh().clone(), 1);
        let expected_tv = if anchor == 0.0 && n == 1 { 0.0 } else if anchor == 0.0 || anchor + 1.0 / n as f64 >= 1.0 { 1.0 } else { 2.0 };
        prop_assert!((u.derivative().total_variation(None) - expected_tv).abs() <= 1e-12);
        let l1 = l1_distance(&u, &zero).unwrap();
        prop_assert!((l1 - (1.0 / n as f64).min(1.0 - anchor)).abs() <= 1e-12);
    }

    #[test]
    fn rescaling_preserves_gradient_mass(k in 1usize..64, which in 0usize..3) {
        let profile = [Profile::Hat, Profile::Trapezoid, Profile::Skew][which].clone();
        let spec = SequenceSpec {
            kind: SequenceKind::BoundaryRescale { profile: profile.clone(), x0: [0.0, 0.0] },
            domain: Domain::unit_interval(),
            h: 1.0 / 16.0,
            n_max: 64,
        };
        let f = catalog::norm(1, 1);
        let finf = RecessionFn::analytic(&f);
        let phi_k = eval_f(&f, &finf, &generate(&spec, k).unwrap()).unwrap().total;
        let mut ys: Vec<f64> = vec![0.0];
        ys.extend(profile.knots().iter().map(|k| k.0).filter(|y| *y > 0.0));
        let half: f64 = ys.windows(2).map(|w| (profile.eval(w[1]) - profile.eval(w[0])).abs()).sum();
        prop_assert!((phi_k - half).abs() <= 1e-12, "{phi_k} vs {half}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn qc_deficit_is_at_most_zero(xi in mat(1, 2)) {
        let opts = QcOptions { l_grid: vec![1.0, 4.0], solver: quick(), ..Default::default() };
        for f in [catalog::area(1, 2), catalog::negnorm(1, 2)] {
            let r = qc_deficit(&f, &[0.5, 0.5], &xi, qc_mesh(2, 3).unwrap(), &opts).unwrap();
            prop_assert!(r.deficit <= 1e-12);
            prop_assert!(r.table.windows(2).all(|w| w[1].deficit <= w[0].deficit + 1e-12));
        }
    }

    #[test]
    fn linear_shift_leaves_qc_deficit(xi in mat(1, 2), l in mat(1, 2)) {
        let opts = QcOptions { l_grid: vec![1.0], solver: quick(), ..Default::default() };
        let mesh = qc_mesh(2, 3).unwrap();
        let base = catalog::norm(1, 2);
        let shifted = Integrand::new(
            "norm+linear",
            1,
            2,
            bvlsc::integrand::Expr::Sum { terms: vec![bvlsc::integrand::Expr::Norm, bvlsc::integrand::Expr::Linear { m: l }] },
        ).unwrap();
        let a = qc_deficit(&base, &[0.5, 0.5], &xi, mesh.clone(), &opts).unwrap().deficit;
        let b = qc_deficit(&shifted, &[0.5, 0.5], &xi, mesh, &opts).unwrap().deficit;
        prop_assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    }

    #[test]
    fn halfball_quotient_is_bounded_and_homogeneous(a in -3.0..3.0f64, b in (-1.0..1.0f64, -1.0..1.0f64)) {
        prop_assume!(a.abs() > 1e-3);
        let bp = Domain::unit_square().boundary_point(&[0.5, 0.0]).unwrap();
        let f = catalog::boundary_null_lagrangian(&[a], &[b.0, b.1]);
        let finf = RecessionFn::analytic(&f);
        let r = halfball_deficit(&finf, &bp, halfball_mesh(&bp, 2, 0.2).unwrap(), &QslbOptions { solver: quick(), ..Default::default() }).unwrap();
        prop_assert!(r.deficit >= -r.c_inf - 1e-12 && r.deficit <= r.c_inf + 1e-12);
        if let Some(w) = &r.witness {
            let norm = catalog::norm(1, 2);
            let q = |s: f64| {
                let u = w.scaled(s).to_bv();
                eval_f(&f, &finf, &u).unwrap().total / eval_f(&norm, &RecessionFn::analytic(&norm), &u).unwrap().total
            };
            prop_assert!((q(1.0) - r.deficit).abs() <= 1e-10);
            prop_assert!((q(7.5) - q(1.0)).abs() <= 1e-8);
        }
    }

    #[test]
    fn halfball_quotient_is_rotation_equivariant(theta in 0.0..std::f64::consts::TAU, b in (-1.0..1.0f64, -1.0..1.0f64)) {
        let rot = |p: [f64; 2], t: f64| [t.cos() * p[0] - t.sin() * p[1], t.sin() * p[0] + t.cos() * p[1]];
        let deficit = |nu: [f64; 2], bvec: [f64; 2]| {
            let bp = BoundaryPoint { x0: [0.0, 0.0], normal: nu, kind: BoundaryKind::Flat };
            let f = catalog::boundary_null_lagrangian(&[1.0], &bvec);
            halfball_deficit(&RecessionFn::analytic(&f), &bp, halfball_mesh(&bp, 2, 0.2).unwrap(), &QslbOptions { solver: quick(), ..Default::default() })
                .unwrap()
                .deficit
        };
        let nu = [0.0, -1.0];
        let bvec = [b.0, b.1];
        let d0 = deficit(nu, bvec);
        let d1 = deficit(rot(nu, theta), rot(bvec, theta));
        prop_assert!((d0 - d1).abs() <= 2e-2 * (1.0 + d0.abs()), "{d0} vs {d1}");
    }

    #[test]
    fn more_restarts_never_raise_the_minimum(xi in mat(1, 1), r in 0usize..4) {
        let mesh = qc_mesh(1, 8).unwrap();
        let run = |restarts: usize| {
            let opts = QcOptions { l_grid: vec![1.0], solver: SolverOptions { restarts, max_iter: 100, ..Default::default() }, ..Default::default() };
            qc_deficit(&catalog::negnorm(1, 1), &[0.5, 0.0], &xi, mesh.clone(), &opts).unwrap().deficit
        };
        prop_assert!(run(r + 3) <= run(r) + 1e-15);
    }

    #[test]
    fn decomposition_reassembles_exactly(lo in 0.1..0.45f64, width in 0.05..0.4f64) {
        let spec = SequenceSpec { kind: SequenceKind::DecayingSine, domain: Domain::unit_interval(), h: 1.0 / 32.0, n_max: 60 };
        let seq: Vec<BvFunction> = (1..=60).map(|k| generate(&spec, k).unwrap()).collect();
        let cover = CoverSpec::new(vec![CompactSet::interval(lo, lo + width), CompactSet::interval(0.0, 1.0)]);
        let r = local_decompose(&seq, &cover, 8).unwrap();
        let v = verify_properties(&r).unwrap();
        prop_assert!(v.reassembly_error <= 1e-14);
        prop_assert!(v.property_i);
        prop_assert!(r.index_map.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn extra_samples_keep_a_violation(points in prop::collection::vec(0.05..0.95f64, 1..4)) {
        let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/example_1_2.json")).unwrap();
        let mut s = Scenario::from_json(&text).unwrap();
        let mut pts: Vec<Point> = s.interior_points();
        pts.extend(points.iter().map(|&x| [x, 0.0]));
        s.interior = InteriorSamples::Points(pts);
        prop_assert_eq!(analyze(&s).unwrap().overall, Overall::NotWlsc);
    }
}
