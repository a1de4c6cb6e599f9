//! Quasi-sublinear growth from below at boundary points.
//!
//! Three forms are offered. The half-ball form minimizes the Rayleigh quotient
//! `int_D f^inf(x0, grad phi) / int_D |grad phi|` over fields vanishing on the
//! spherical part of the canonical half-ball `D`. The epsilon-delta probe minimizes
//! `int f + eps |grad v|` over patch fields at growing norm caps and looks for
//! linear decrease. The equivalence harness runs all applicable forms at one point.

use crate::error::{Error, Result};
use crate::integrand::RecessionFn;
use crate::integrand::{Integrand, Mode};
use crate::linalg::{dot2, Mat, Point};
use crate::mesh::{build_mesh, local_patch, BoundaryKind, BoundaryPoint, Domain, FacetTag, Mesh, PatchOptions};
use crate::minimize::{minimize_field, minimize_field_from, Constraint, Problem, SolveResult, SolverOptions, TestField};
use crate::qc::{qc_deficit, qc_mesh, QcOptions, QcVerdict};
use serde::Serialize;
use std::sync::Arc;

pub const DEFAULT_TOL: f64 = 1e-3;
pub const DEFAULT_R_GRID: [f64; 3] = [1.0, 10.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QslbVerdict {
    QslbPlausible,
    Violated,
}

#[derive(Debug, Clone, Serialize)]
pub struct QslbReport {
    pub x0: Point,
    pub normal: Point,
    pub kind: BoundaryKind,
    pub h: f64,
    /// Infimum estimate of the Rayleigh quotient.
    pub deficit: f64,
    /// `max_{|xi| = 1} |f^inf(x0, xi)|` over sampled directions and the witness gradients.
    pub c_inf: f64,
    pub tol: f64,
    pub verdict: QslbVerdict,
    pub low_confidence: bool,
    pub stationarity: f64,
    pub witness: Option<TestField>,
}

#[derive(Debug, Clone)]
pub struct QslbOptions {
    pub tol: f64,
    pub solver: SolverOptions,
    pub sphere_samples: usize,
}

impl Default for QslbOptions {
    fn default() -> Self {
        QslbOptions { tol: DEFAULT_TOL, solver: SolverOptions::default(), sphere_samples: 256 }
    }
}

/// Mesh of the half-ball `{ y in B_1 : y . nu < 0 }` for the normal at `bp`.
pub fn halfball_mesh(bp: &BoundaryPoint, dim: usize, h: f64) -> Result<Arc<Mesh>> {
    let normal: Vec<f64> = bp.normal[..dim].to_vec();
    Ok(Arc::new(build_mesh(&Domain::half_ball(&normal), h)?))
}

/// Minimizes `int f^inf(x0, grad phi) / int |grad phi|` over fields on `mesh`.
pub fn rayleigh_quotient(finf: &RecessionFn, x0: &Point, mesh: Arc<Mesh>, solver: &SolverOptions) -> Result<SolveResult> {
    let x = *x0;
    let density = move |_: &Point, xi: &Mat, delta: f64| finf.value_grad(&x, xi, delta);
    let (m, _) = finf.dims();
    let problem = Problem::new(mesh, m, &density, true);
    minimize_field(&problem, Constraint::Normalized, solver)
}

fn c_inf(finf: &RecessionFn, x0: &Point, witness: &TestField, samples: usize, seed: u64) -> f64 {
    let mut c = finf.sup_on_sphere(x0, samples, seed);
    for cell in 0..witness.mesh.num_cells() {
        let g = witness.gradient(cell);
        let n = g.norm();
        if n > 0.0 {
            c = c.max(finf.eval(x0, &g.scale(1.0 / n)).abs());
        }
    }
    c
}

/// Half-ball deficit at a flat or curved boundary point; corners are refused.
pub fn halfball_deficit(finf: &RecessionFn, bp: &BoundaryPoint, mesh: Arc<Mesh>, opts: &QslbOptions) -> Result<QslbReport> {
    if bp.kind == BoundaryKind::Corner {
        return Err(Error::Unsupported(format!("{:?} is a corner with no single normal; use the epsilon-delta probe", bp.x0)));
    }
    let (_, cols) = finf.dims();
    if mesh.dim() != cols {
        return Err(Error::DimensionMismatch(format!("recession function acts on {cols} columns, mesh has dimension {}", mesh.dim())));
    }
    let free: Vec<_> = mesh.facets().iter().filter(|f| f.tag == FacetTag::Free).collect();
    if free.is_empty() || free.iter().any(|f| dot2(&f.normal, &bp.normal) < 1.0 - 1e-9) {
        return Err(Error::PreconditionUnmet("mesh is not a half-ball with a free flat facet orthogonal to the normal".into()));
    }
    let r = rayleigh_quotient(finf, &bp.x0, mesh.clone(), &opts.solver)?;
    let c = c_inf(finf, &bp.x0, &r.witness, opts.sphere_samples, opts.solver.seed);
    let verdict = if r.value < -opts.tol { QslbVerdict::Violated } else { QslbVerdict::QslbPlausible };
    Ok(QslbReport {
        x0: bp.x0,
        normal: bp.normal,
        kind: bp.kind,
        h: mesh.h(),
        deficit: r.value,
        c_inf: c,
        tol: opts.tol,
        verdict,
        low_confidence: verdict == QslbVerdict::QslbPlausible && r.low_confidence,
        stationarity: r.stationarity,
        witness: (verdict == QslbVerdict::Violated).then_some(r.witness),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    /// `g = f(x0, .)`.
    Frozen,
    /// `f(x, .)` on the patch.
    Unfrozen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Signature {
    /// The minimum decreases in proportion to the cap: no finite constant exists.
    UnboundedBelow,
    Plateau,
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsDeltaRow {
    pub eps: f64,
    pub delta: f64,
    /// Minimum at each cap of `r_grid`.
    pub minima: Vec<f64>,
    /// Last over second-to-last minimum.
    pub growth_ratio: Option<f64>,
    pub signature: Signature,
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsDeltaReport {
    pub x0: Point,
    pub form: Form,
    pub r_grid: Vec<f64>,
    pub rows: Vec<EpsDeltaRow>,
    /// Violated when some `eps` is unbounded below at every `delta`.
    pub verdict: QslbVerdict,
}

#[derive(Debug, Clone)]
pub struct EpsDeltaOptions {
    pub eps_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
    pub form: Form,
    pub patch: PatchOptions,
    pub solver: SolverOptions,
}

impl Default for EpsDeltaOptions {
    fn default() -> Self {
        EpsDeltaOptions {
            eps_grid: vec![0.5],
            delta_grid: vec![0.5, 0.25],
            r_grid: DEFAULT_R_GRID.to_vec(),
            form: Form::Frozen,
            patch: PatchOptions::default(),
            solver: SolverOptions::default(),
        }
    }
}

/// Classifies minima on an increasing cap grid.
pub fn signature(r_grid: &[f64], minima: &[f64]) -> (Option<f64>, Signature) {
    let k = minima.len();
    if k < 2 {
        return (None, Signature::Plateau);
    }
    let (a, b) = (minima[k - 2], minima[k - 1]);
    let expected = r_grid[k - 1] / r_grid[k - 2];
    let ratio = if a < 0.0 { Some(b / a) } else { None };
    // proportional decrease: a tenfold cap must give at least ninefold the loss
    let unbounded = b < 0.0 && ratio.is_some_and(|r| r >= 0.9 * expected);
    (ratio, if unbounded { Signature::UnboundedBelow } else { Signature::Plateau })
}

/// Epsilon-delta probe on patches `Omega ∩ B_delta(x0)` of `mesh`.
pub fn epsdelta_probe(f: &Integrand, mesh: &Mesh, x0: &Point, opts: &EpsDeltaOptions) -> Result<EpsDeltaReport> {
    let positive = |g: &[f64]| !g.is_empty() && g.iter().all(|v| *v > 0.0 && v.is_finite());
    if !positive(&opts.eps_grid) || !positive(&opts.delta_grid) || !positive(&opts.r_grid) {
        return Err(Error::InvalidParams("epsilon, delta and cap grids must be non-empty and positive".into()));
    }
    let mut r_grid = opts.r_grid.clone();
    r_grid.sort_by(f64::total_cmp);
    let mut eps_desc = opts.eps_grid.clone();
    eps_desc.sort_by(|a, b| b.total_cmp(a));
    let (m, _) = f.dims();
    let x = *x0;
    let frozen = opts.form == Form::Frozen;
    let mut rows = Vec::new();
    for &delta in &opts.delta_grid {
        let patch = local_patch(mesh, x0, delta, opts.patch)?;
        let pmesh = Arc::new(patch.mesh);
        let mut prev_eps: Vec<Vec<f64>> = Vec::new();
        let mut delta_rows = Vec::new();
        for &eps in &eps_desc {
            let density = move |y: &Point, xi: &Mat, s: f64| {
                let at = if frozen { &x } else { y };
                let (v, g) = f.value_grad(at, xi, Mode { recession: false, smoothing: s });
                let r = (xi.dot(xi) + s * s).sqrt();
                if r > 0.0 {
                    (v + eps * (r - s), g + xi.scale(eps / r))
                } else {
                    (v, g)
                }
            };
            let problem = Problem::new(pmesh.clone(), m, &density, frozen || !f.depends_on_x());
            let mut minima = Vec::with_capacity(r_grid.len());
            let mut witnesses: Vec<Vec<f64>> = Vec::with_capacity(r_grid.len());
            for (i, &cap) in r_grid.iter().enumerate() {
                let mut warm = Vec::new();
                if let Some(w) = prev_eps.get(i) {
                    warm.push(w.clone());
                }
                if let Some(w) = witnesses.last() {
                    warm.push(w.clone());
                }
                let r = minimize_field_from(&problem, Constraint::TvCap { cap }, &opts.solver, &warm)?;
                minima.push(r.value);
                witnesses.push(r.witness.values);
            }
            let (growth_ratio, sig) = signature(&r_grid, &minima);
            delta_rows.push(EpsDeltaRow { eps, delta, minima, growth_ratio, signature: sig });
            prev_eps = witnesses;
        }
        delta_rows.reverse();
        rows.extend(delta_rows);
    }
    let violated = opts.eps_grid.iter().any(|&e| rows.iter().filter(|r| r.eps == e).all(|r| r.signature == Signature::UnboundedBelow));
    Ok(EpsDeltaReport {
        x0: *x0,
        form: opts.form,
        r_grid,
        rows,
        verdict: if violated { QslbVerdict::Violated } else { QslbVerdict::QslbPlausible },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FormOutcome {
    pub form: String,
    pub value: f64,
    pub verdict: QslbVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub x0: Point,
    pub interior: bool,
    pub outcomes: Vec<FormOutcome>,
    pub agree: bool,
}

#[derive(Debug, Clone)]
pub struct EquivalenceOptions {
    pub eps: f64,
    pub delta: f64,
    pub halfball_h: f64,
    pub qc_cells: usize,
    pub tol: f64,
    pub solver: SolverOptions,
}

impl Default for EquivalenceOptions {
    fn default() -> Self {
        EquivalenceOptions { eps: 0.1, delta: 0.25, halfball_h: 0.1, qc_cells: 4, tol: DEFAULT_TOL, solver: SolverOptions::default() }
    }
}

/// Frozen patch quotient for `f^inf(x0, .)` on `Omega ∩ B_delta(x0)`.
pub fn patch_quotient(finf: &RecessionFn, mesh: &Mesh, x0: &Point, delta: f64, solver: &SolverOptions) -> Result<SolveResult> {
    let patch = local_patch(mesh, x0, delta, PatchOptions::default())?;
    rayleigh_quotient(finf, x0, Arc::new(patch.mesh), solver)
}

/// Runs every applicable form of the condition at `x0` and compares verdicts.
pub fn equivalence_harness(
    f: &Integrand,
    finf: &RecessionFn,
    domain: &Domain,
    mesh: &Mesh,
    x0: &Point,
    opts: &EquivalenceOptions,
) -> Result<EquivalenceReport> {
    let boundary = domain.boundary_point(x0).ok();
    let interior = boundary.is_none();
    if interior && !domain.contains(x0) {
        return Err(Error::InvalidParams(format!("{x0:?} is outside the domain")));
    }
    if let Some(bp) = &boundary {
        match bp.kind {
            BoundaryKind::Flat => {}
            BoundaryKind::Curved => {
                return Err(Error::Unsupported("half-ball comparison at a curved boundary point needs boundary flattening".into()))
            }
            BoundaryKind::Corner => return Err(Error::Unsupported("half-ball comparison at a corner has no single normal".into())),
        }
    }
    let verdict = |v: f64| if v < -opts.tol { QslbVerdict::Violated } else { QslbVerdict::QslbPlausible };
    let mut outcomes = Vec::new();

    let frozen = patch_quotient(finf, mesh, x0, opts.delta, &opts.solver)?;
    outcomes.push(FormOutcome { form: "frozen".into(), value: frozen.value, verdict: verdict(frozen.value) });

    let probe = epsdelta_probe(
        f,
        mesh,
        x0,
        &EpsDeltaOptions {
            eps_grid: vec![opts.eps],
            delta_grid: vec![opts.delta],
            form: Form::Unfrozen,
            solver: opts.solver.clone(),
            ..Default::default()
        },
    )?;
    let last = probe.rows.iter().map(|r| *r.minima.last().unwrap_or(&0.0)).fold(f64::INFINITY, f64::min);
    outcomes.push(FormOutcome { form: "unfrozen".into(), value: last, verdict: probe.verdict });

    if let Some(bp) = &boundary {
        let hb = halfball_mesh(bp, mesh.dim(), opts.halfball_h)?;
        let r = halfball_deficit(finf, bp, hb, &QslbOptions { tol: opts.tol, solver: opts.solver.clone(), ..Default::default() })?;
        outcomes.push(FormOutcome { form: "halfball".into(), value: r.deficit, verdict: r.verdict });
    } else {
        let (rows, cols) = f.dims();
        let qopts = QcOptions { l_grid: vec![1.0], tol: Some(opts.tol), recession: true, solver: opts.solver.clone() };
        let r = qc_deficit(f, x0, &Mat::zeros(rows, cols), qc_mesh(cols, opts.qc_cells)?, &qopts)?;
        let v = match r.verdict {
            QcVerdict::Violated => QslbVerdict::Violated,
            QcVerdict::QcPlausible => QslbVerdict::QslbPlausible,
        };
        outcomes.push(FormOutcome { form: "qc-at-0".into(), value: r.deficit, verdict: v });
    }
    let agree = outcomes.windows(2).all(|w| w[0].verdict == w[1].verdict);
    Ok(EquivalenceReport { x0: *x0, interior, outcomes, agree })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::catalog;
    use crate::mesh::interval_mesh;

    fn quick() -> SolverOptions {
        SolverOptions { restarts: 2, max_iter: 200, ..Default::default() }
    }

    fn left_end() -> BoundaryPoint {
        Domain::unit_interval().boundary_point(&[0.0, 0.0]).unwrap()
    }

    #[test]
    fn boundary_jump_halfball_quotient() {
        let f = catalog::linear(&Mat::scalar(1.0));
        let finf = RecessionFn::analytic(&f);
        let bp = left_end();
        let mesh = halfball_mesh(&bp, 1, 0.05).unwrap();
        let r = halfball_deficit(&finf, &bp, mesh, &QslbOptions { solver: quick(), ..Default::default() }).unwrap();
        assert!((r.deficit + 1.0).abs() < 1e-9, "{}", r.deficit);
        assert_eq!(r.verdict, QslbVerdict::Violated);
        assert!(r.deficit >= -r.c_inf - 1e-12);
    }

    #[test]
    fn epsdelta_linear_is_unbounded() {
        let f = catalog::linear(&Mat::scalar(1.0));
        let mesh = interval_mesh(0.0, 1.0, 40).unwrap();
        let opts = EpsDeltaOptions { eps_grid: vec![0.5, 2.0], solver: quick(), ..Default::default() };
        let r = epsdelta_probe(&f, &mesh, &[0.0, 0.0], &opts).unwrap();
        assert_eq!(r.verdict, QslbVerdict::Violated);
        for row in &r.rows {
            if row.eps == 0.5 {
                assert_eq!(row.signature, Signature::UnboundedBelow);
                for (m, cap) in row.minima.iter().zip(&r.r_grid) {
                    assert!((m + 0.5 * cap).abs() < 1e-8 * cap, "{m} at {cap}");
                }
            } else {
                assert_eq!(row.signature, Signature::Plateau);
            }
        }
    }

    #[test]
    fn curved_point_is_refused_by_harness() {
        let f = catalog::norm(1, 2);
        let finf = RecessionFn::analytic(&f);
        let d = Domain::half_ball(&[0.0, -1.0]);
        let mesh = build_mesh(&d, 0.2).unwrap();
        let e = equivalence_harness(&f, &finf, &d, &mesh, &[0.6, 0.8], &EquivalenceOptions::default());
        assert!(matches!(e, Err(Error::Unsupported(_))));
    }
}
