//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any criterion fails.

use bvlsc::bv::{BvFunction, CompactSet, MatrixMeasure};
use bvlsc::decompose::{local_decompose, verify_properties, CoverSpec};
use bvlsc::functional::{additivity_residual, eval_f, uniform_continuity_probe, ContinuityVerdict};
use bvlsc::integrand::{catalog, mu_table, random_matrix, recession_estimate, Integrand, RecessionFn, DEFAULT_T_GRID};
use bvlsc::mesh::{build_mesh, interval_mesh, unit_square_mesh, Domain};
use bvlsc::qc::{qc_deficit, qc_mesh, QcOptions, QcVerdict};
use bvlsc::qslb::{equivalence_harness, halfball_deficit, halfball_mesh, EquivalenceOptions, QslbOptions};
use bvlsc::report::to_json;
use bvlsc::sequences::{empirical_liminf, generate, limit_energy_check, LiminfVerdict, Profile, SequenceKind, SequenceSpec};
use bvlsc::verdict::{analyze, Overall, Scenario};
use bvlsc::{Mat, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

type Pairs = Vec<(usize, MatrixMeasure, MatrixMeasure)>;
type Criterion = fn() -> bvlsc::Result<Outcome>;
type PairBuilder = fn(&[usize]) -> bvlsc::Result<Pairs>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> bvlsc::Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn load(name: &str) -> Scenario {
    let text = std::fs::read_to_string(scenario_dir().join(name)).expect("bundled scenario");
    Scenario::from_json(&text).expect("valid scenario")
}

fn jump_spec(a: f64, b: f64, n_max: usize) -> SequenceSpec {
    SequenceSpec { kind: SequenceKind::JumpMigration { anchor: 0.0 }, domain: Domain::Interval { a, b }, h: 1.0 / 16.0, n_max }
}

/// u_n = chi_(0, 1/n) on (0, 1): F(u_n) = -1 for n >= 2, F(0) = 0, liminf violated,
/// half-ball deficit at 0 below -0.9, engine verdict not-wlsc with a witness.
fn criterion_1() -> bvlsc::Result<Outcome> {
    let start = Instant::now();
    let f = catalog::linear(&Mat::scalar(1.0));
    let finf = RecessionFn::analytic(&f);
    let spec = jump_spec(0.0, 1.0, 64);
    let mut worst: f64 = 0.0;
    for n in 2..=64 {
        worst = worst.max((eval_f(&f, &finf, &generate(&spec, n)?)?.total + 1.0).abs());
    }
    let u1 = eval_f(&f, &finf, &generate(&spec, 1)?)?.total;
    let zero = BvFunction::zeros(Arc::new(interval_mesh(0.0, 1.0, 16)?), 1);
    let f0 = eval_f(&f, &finf, &zero)?.total;
    let lim = empirical_liminf(&f, &finf, &spec, 64)?;
    let bp = Domain::unit_interval().boundary_point(&[0.0, 0.0])?;
    let hb = halfball_deficit(&finf, &bp, halfball_mesh(&bp, 1, 0.05)?, &QslbOptions::default())?;
    let v = analyze(&load("example_1_2.json"))?;
    let witness = v.violations.iter().any(|w| w.has_witness);
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-12
        && f0 == 0.0
        && lim.verdict == LiminfVerdict::LscViolatedEmpirically
        && hb.deficit <= -0.9
        && v.overall == Overall::NotWlsc
        && witness
        && elapsed < 5.0;
    outcome(
        pass,
        format!(
            "max|F(u_n)+1| n=2..64 = {worst:.1e}, F(u_1) = {u1}, F(0) = {f0}, liminf {:?}, halfball {:.4}, overall {:?}, witness {witness}, {elapsed:.2}s",
            lim.verdict, hb.deficit, v.overall
        ),
    )
}

/// Same sequence on (-1, 1): F(u_n) = 0 for n >= 2, liminf not violated.
fn criterion_2() -> bvlsc::Result<Outcome> {
    let f = catalog::linear(&Mat::scalar(1.0));
    let finf = RecessionFn::analytic(&f);
    let spec = jump_spec(-1.0, 1.0, 64);
    let mut worst: f64 = 0.0;
    for n in 2..=64 {
        worst = worst.max(eval_f(&f, &finf, &generate(&spec, n)?)?.total.abs());
    }
    let u1 = eval_f(&f, &finf, &generate(&spec, 1)?)?.total;
    let lim = empirical_liminf(&f, &finf, &spec, 64)?;
    let pass = worst <= 1e-12 && lim.verdict == LiminfVerdict::NotViolated;
    outcome(
        pass,
        format!("max|F(u_n)| n=2..64 = {worst:.1e}, F(u_1) = {u1} (jump at the boundary point 1 is not charged), liminf {:?}", lim.verdict),
    )
}

/// qc on the unit square, 1x2 gradients.
fn criterion_3() -> bvlsc::Result<Outcome> {
    let start = Instant::now();
    let x0 = [0.5, 0.5];
    let mesh = qc_mesh(2, 4)?;
    let opts = QcOptions::default();
    let neg = qc_deficit(&catalog::negnorm(1, 2), &x0, &Mat::zeros(1, 2), mesh.clone(), &opts)?;
    let neg_ok = neg.deficit < -0.5 * mesh.total_measure() && neg.verdict == QcVerdict::Violated && neg.witness.is_some();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xis: Vec<Mat> = (0..10).map(|_| random_matrix(1, 2, &mut rng).scale(rng.random_range(0.2..3.0))).collect();
    let mut convex_min = f64::INFINITY;
    for f in [catalog::norm(1, 2), catalog::area(1, 2)] {
        for xi in &xis {
            convex_min = convex_min.min(qc_deficit(&f, &x0, xi, mesh.clone(), &opts)?.deficit);
        }
    }
    let lin = qc_deficit(&catalog::linear(&Mat::from_entries(1, 2, &[0.7, -1.3])), &x0, &xis[0], mesh.clone(), &opts)?;
    let elapsed = start.elapsed().as_secs_f64();
    let pass = neg_ok && convex_min >= -1e-6 && lin.deficit.abs() <= 1e-8 && elapsed < 30.0;
    outcome(
        pass,
        format!(
            "negnorm {:.4} (|B| = {}), min over norm/area x 10 xi {convex_min:.2e}, linear {:.1e}, {elapsed:.2}s",
            neg.deficit,
            mesh.total_measure(),
            lin.deficit
        ),
    )
}

/// Half-ball quotients at the bottom edge of the unit square, h = 0.05.
fn criterion_4() -> bvlsc::Result<Outcome> {
    let bp = Domain::unit_square().boundary_point(&[0.5, 0.0])?;
    let nu = [bp.normal[0], bp.normal[1]];
    let t = [-nu[1], nu[0]];
    let a = [2.0];
    let mesh = halfball_mesh(&bp, 2, 0.05)?;
    let q = |f: &Integrand| halfball_deficit(&RecessionFn::analytic(f), &bp, mesh.clone(), &QslbOptions::default());
    let normal = q(&catalog::boundary_null_lagrangian(&a, &nu))?;
    let tangent = q(&catalog::boundary_null_lagrangian(&a, &t))?;
    let norm = q(&catalog::norm(1, 2))?;
    let threshold = -0.9 * 2.0;
    let pass = normal.deficit <= threshold && tangent.deficit.abs() <= 1e-3 && (norm.deficit - 1.0).abs() <= 1e-6;
    outcome(pass, format!("a⊗nu {:.4} (<= {threshold}), a⊗t {:.1e}, norm {:.8}", normal.deficit, tangent.deficit, norm.deficit))
}

/// Recession estimates against closed forms and the monotone mu table.
fn criterion_5() -> bvlsc::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fs = [catalog::area(2, 2), catalog::linear(&Mat::from_entries(2, 2, &[1.0, -2.0, 0.5, 3.0])), catalog::norm_sin(2, 2)];
    let mut worst: f64 = 0.0;
    for f in &fs {
        let finf = RecessionFn::analytic(f);
        for _ in 0..100 {
            let x = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];
            let xi = random_matrix(2, 2, &mut rng).scale(rng.random_range(0.1..5.0));
            let est = recession_estimate(f, &x, &xi, &DEFAULT_T_GRID)?;
            worst = worst.max((est.value - finf.eval(&x, &xi)).abs());
        }
    }
    let mut grid = vec![0.0];
    grid.extend(DEFAULT_T_GRID);
    let points: Vec<Point> = vec![[0.2, 0.3], [0.8, 0.5]];
    let mut mu_ok = true;
    let mut mu_last: f64 = 0.0;
    for f in &fs {
        let table = mu_table(f, &RecessionFn::analytic(f), &grid, &points, 256, 11);
        mu_ok &= table.windows(2).all(|w| w[1].sampled <= w[0].sampled);
        mu_last = mu_last.max(table.last().unwrap().sampled);
    }
    let pass = worst <= 1e-4 && mu_ok && mu_last < 1e-3;
    outcome(pass, format!("max |estimate - analytic| {worst:.1e} over 300 samples, mu non-increasing {mu_ok}, max mu(1e6) {mu_last:.1e}"))
}

/// Local decomposition of the boundary jump sequence and two synthetic sequences, n <= 64.
fn criterion_6() -> bvlsc::Result<Outcome> {
    let cases = [
        (
            "boundary-jump",
            SequenceKind::JumpMigration { anchor: 0.0 },
            vec![CompactSet::point(0.0, 0.0), CompactSet::interval(0.125, 1.0)],
            1.0 / 32.0,
        ),
        (
            "oscillating-tail",
            SequenceKind::OscillatingTail { start: 0.5 },
            vec![CompactSet::point(0.0, 0.0), CompactSet::interval(0.25, 1.0)],
            1.0 / 32.0,
        ),
        ("decaying-sine", SequenceKind::DecayingSine, vec![CompactSet::interval(0.4, 0.6), CompactSet::interval(0.0, 1.0)], 1.0 / 64.0),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, kind, sets, h) in cases {
        let spec = SequenceSpec { kind, domain: Domain::unit_interval(), h, n_max: 160 };
        let seq: Vec<BvFunction> = (1..=160).map(|k| generate(&spec, k)).collect::<bvlsc::Result<_>>()?;
        let r = local_decompose(&seq, &CoverSpec::new(sets), 64)?;
        let v = verify_properties(&r)?;
        let mut worst_res: f64 = 0.0;
        let mut decreasing = true;
        for f in catalog::basic(1, 1) {
            let finf = RecessionFn::analytic(&f);
            let res: Vec<f64> = [16usize, 32, 64]
                .iter()
                .map(|&n| {
                    let m = &r.members[n - 1];
                    let x = BvFunction::affine(m.member.mesh().clone(), &Mat::scalar(1.0), &[0.0]);
                    additivity_residual(&f, &finf, &x, &[(n, m.member.clone(), m.components.clone())], 1e-2)
                        .map(|a| a.rows[0].residual.abs())
                })
                .collect::<bvlsc::Result<_>>()?;
            decreasing &= res.windows(2).all(|w| w[1] <= w[0] + 1e-14);
            worst_res = worst_res.max(res[2]);
        }
        let charge_max = v.charges.iter().filter_map(|c| c.report.table.last().map(|r| r.1)).fold(0.0, f64::max);
        let ok = v.reassembly_error <= 1e-14 && v.property_i && v.property_ii && decreasing && worst_res < 1e-2;
        pass &= ok;
        parts.push(format!(
            "{name}: reassembly {:.0e}, (i) {} slack {:.1e}, (ii) {} tail charge {charge_max:.1e}, residual@64 {worst_res:.1e} decreasing {decreasing}",
            v.reassembly_error, v.property_i, v.max_slack, v.property_ii
        ));
    }
    outcome(pass, parts.join("; "))
}

/// Interior frozen-patch verdict against qc-at-0 of the recession function.
fn criterion_7() -> bvlsc::Result<Outcome> {
    let mesh = build_mesh(&Domain::unit_square(), 0.1)?;
    let domain = Domain::unit_square();
    let opts = EquivalenceOptions::default();
    let mut agree = 0;
    let mut total = 0;
    let mut misses = Vec::new();
    for f in catalog::basic(1, 2) {
        let finf = RecessionFn::analytic(&f);
        for x0 in [[0.5, 0.5], [0.35, 0.6]] {
            let r = equivalence_harness(&f, &finf, &domain, &mesh, &x0, &opts)?;
            let frozen = r.outcomes.iter().find(|o| o.form == "frozen").map(|o| o.verdict);
            let qc0 = r.outcomes.iter().find(|o| o.form == "qc-at-0").map(|o| o.verdict);
            total += 1;
            if frozen.is_some() && frozen == qc0 {
                agree += 1;
            } else {
                misses.push(format!("{}@{x0:?}", f.tag()));
            }
        }
    }
    outcome(
        agree == 12 && total == 12,
        format!(
            "{agree}/{total} agreements{}",
            if misses.is_empty() { String::new() } else { format!(", disagree: {}", misses.join(", ")) }
        ),
    )
}

fn pairs_density(n_grid: &[usize]) -> bvlsc::Result<Pairs> {
    let mesh = Arc::new(interval_mesh(0.0, 1.0, 16)?);
    let xi = Mat::scalar(0.8);
    Ok(n_grid
        .iter()
        .map(|&n| {
            let mu = MatrixMeasure::uniform_density(mesh.clone(), &xi);
            let la = MatrixMeasure::uniform_density(mesh.clone(), &Mat::scalar(0.8 + 1.0 / n as f64));
            (n, mu, la)
        })
        .collect())
}

fn pairs_atom(n_grid: &[usize]) -> bvlsc::Result<Pairs> {
    let mesh = Arc::new(interval_mesh(0.0, 1.0, 16)?);
    Ok(n_grid
        .iter()
        .map(|&n| {
            let base = MatrixMeasure::zero(mesh.clone(), 1);
            let mu = base.clone().with_atom([0.5, 0.0], &Mat::scalar(-1.0));
            let la = base.with_atom([0.5, 0.0], &Mat::scalar(-1.0 - 1.0 / n as f64));
            (n, mu, la)
        })
        .collect())
}

fn pairs_mixed(n_grid: &[usize]) -> bvlsc::Result<Pairs> {
    let mesh = Arc::new(unit_square_mesh(8)?);
    let xi = Mat::from_entries(1, 2, &[0.6, -0.3]);
    let eta = Mat::from_entries(1, 2, &[0.6, 0.8]);
    Ok(n_grid
        .iter()
        .map(|&n| {
            let mu = MatrixMeasure::uniform_density(mesh.clone(), &xi).with_atom([0.5, 0.5], &Mat::from_entries(1, 2, &[1.0, 0.0]));
            let la = MatrixMeasure::uniform_density(mesh.clone(), &(xi + eta.scale(1.0 / n as f64)))
                .with_atom([0.5, 0.5], &Mat::from_entries(1, 2, &[1.0, 0.0]));
            (n, mu, la)
        })
        .collect())
}

/// G-gap along three pairs with TV gap 1/n.
fn criterion_8() -> bvlsc::Result<Outcome> {
    let n_grid = [1usize, 2, 4, 8, 16, 32, 64];
    let mut pass = true;
    let mut parts = Vec::new();
    let builds: [(&str, PairBuilder, usize); 3] = [("density", pairs_density, 1), ("atom", pairs_atom, 1), ("mixed-2d", pairs_mixed, 2)];
    for (name, build, cols) in builds {
        let pairs = build(&n_grid)?;
        let mut worst: f64 = 0.0;
        for f in catalog::basic(1, cols) {
            let finf = RecessionFn::analytic(&f);
            let r = uniform_continuity_probe(&f, &finf, &pairs, 0.05)?;
            let decreasing = r.rows.windows(2).all(|w| w[1].g_gap <= w[0].g_gap + 1e-12);
            let tv_ok = r.rows.iter().all(|row| (row.tv_gap - 1.0 / row.n as f64).abs() <= 1e-12);
            let g64 = r.rows.last().unwrap().g_gap;
            pass &= g64 < 0.05 && decreasing && tv_ok && r.verdict == ContinuityVerdict::Consistent;
            worst = worst.max(g64);
        }
        parts.push(format!("{name}: max G-gap@64 {worst:.2e}"));
    }
    outcome(pass, parts.join("; "))
}

/// F(phi_k) against the half-ball integral on (0, 1) at x0 = 0.
fn criterion_9() -> bvlsc::Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, profile) in [("hat", Profile::Hat), ("skew", Profile::Skew)] {
        for f in [catalog::norm(1, 1), catalog::linear(&Mat::scalar(1.0))] {
            let r = limit_energy_check(&f, &profile, &Domain::unit_interval(), &[0.0, 0.0], 64, 1.0 / 64.0)?;
            pass &= r.gap_at_k_max <= 0.02;
            parts.push(format!("{name}/{}: {:.2e}", f.tag(), r.gap_at_k_max));
        }
    }
    outcome(pass, format!("relative gap at k = 64: {}", parts.join(", ")))
}

/// Every bundled scenario twice with the same seed.
fn criterion_10() -> bvlsc::Result<Outcome> {
    let mut names: Vec<String> = std::fs::read_dir(scenario_dir())?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".json"))
        .collect();
    names.sort();
    let mut same = 0;
    for n in &names {
        let s = load(n);
        if to_json(&analyze(&s)?)? == to_json(&analyze(&s)?)? {
            same += 1;
        }
    }
    outcome(same == names.len() && !names.is_empty(), format!("{same}/{} scenarios byte-identical", names.len()))
}

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("1 boundary jump", criterion_1),
        ("2 extended domain", criterion_2),
        ("3 qc check", criterion_3),
        ("4 half-ball quotient", criterion_4),
        ("5 recession and mu", criterion_5),
        ("6 local decomposition", criterion_6),
        ("7 interior equivalence", criterion_7),
        ("8 uniform continuity", criterion_8),
        ("9 limit energy", criterion_9),
        ("10 determinism", criterion_10),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("{} criterion {name}: {detail} [{:.2}s]", if pass { "PASS" } else { "FAIL" }, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
