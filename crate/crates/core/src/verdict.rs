//! Scenario configuration and the weak* lower semicontinuity verdict engine.

use crate::bv::BvFunction;
use crate::decompose::{local_decompose, verify_properties, CoverSpec, DecompositionResult, VerificationReport};
use crate::error::{Error, Result};
use crate::functional::{additivity_residual, AdditivityReport};
use crate::integrand::{
    catalog_get, mu_table, random_matrix, recession_estimate, Integrand, IntegrandSpec, MuEstimate, RecessionFn, DEFAULT_T_GRID,
};
use crate::linalg::{Mat, Point};
use crate::mesh::{build_mesh, BoundaryKind, Domain, Mesh};
use crate::minimize::SolverOptions;
use crate::qc::{qc_deficit, qc_mesh, QcOptions, QcReport, QcVerdict, DEFAULT_L_GRID};
use crate::qslb::{
    epsdelta_probe, equivalence_harness, halfball_deficit, halfball_mesh, EpsDeltaOptions, EpsDeltaReport, EquivalenceOptions,
    EquivalenceReport, QslbOptions, QslbReport, QslbVerdict, DEFAULT_TOL,
};
use crate::sequences::{
    empirical_liminf, generate, necessity_witness, LiminfReport, NecessityCertificate, SequenceSpec, DEFAULT_WITNESS_N,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use std::time::Instant;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InteriorSamples {
    Points(Vec<Point>),
    /// Quasi-random (Halton) points inside the domain.
    Count(usize),
}

impl Default for InteriorSamples {
    fn default() -> Self {
        InteriorSamples::Count(2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Checks {
    pub qc: bool,
    pub qslb: bool,
    pub equivalence: bool,
    pub sequences: bool,
    pub decomposition: bool,
    pub mu: bool,
}

impl Default for Checks {
    fn default() -> Self {
        Checks { qc: true, qslb: true, equivalence: false, sequences: false, decomposition: false, mu: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QcConfig {
    pub l_grid: Vec<f64>,
    /// Random matrices drawn from the ball of radius `xi_radius`.
    pub xi_random: usize,
    /// Random rank-one matrices `a ⊗ b` with `|a| = xi_radius`, `|b| = 1`.
    pub xi_rank_one: usize,
    pub xi_radius: f64,
    /// Subdivisions per side of the unit cell.
    pub mesh_n: usize,
    pub tol: Option<f64>,
}

impl Default for QcConfig {
    fn default() -> Self {
        QcConfig { l_grid: DEFAULT_L_GRID.to_vec(), xi_random: 2, xi_rank_one: 1, xi_radius: 2.0, mesh_n: 4, tol: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QslbConfig {
    /// Half-ball mesh size.
    pub h: f64,
    pub tol: f64,
    pub sphere_samples: usize,
    /// Extra mesh sizes for the deficit-vs-h table at flat boundary points.
    pub refinement: Vec<f64>,
}

impl Default for QslbConfig {
    fn default() -> Self {
        QslbConfig { h: 0.1, tol: DEFAULT_TOL, sphere_samples: 256, refinement: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionConfig {
    /// Generator of the sequence; its `n_max` is the prefix length.
    pub sequence: SequenceSpec,
    pub cover: CoverSpec,
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub domain: Domain,
    pub integrand: IntegrandSpec,
    /// Mesh size of the domain mesh (corner probes, necessity witnesses).
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub interior: InteriorSamples,
    /// Defaults to edge midpoints (polygons) or both endpoints (intervals).
    #[serde(default)]
    pub boundary: Option<Vec<Point>>,
    #[serde(default)]
    pub checks: Checks,
    #[serde(default)]
    pub qc: QcConfig,
    #[serde(default)]
    pub qslb: QslbConfig,
    #[serde(default)]
    pub sequences: Vec<SequenceSpec>,
    #[serde(default)]
    pub decomposition: Option<DecompositionConfig>,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub seed: u64,
}

fn default_h() -> f64 {
    0.1
}

impl Scenario {
    /// Parses a scenario; errors carry the line and column of the offending key.
    pub fn from_json(text: &str) -> Result<Scenario> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version)));
        }
        self.domain.validate().map_err(|e| Error::Config(e.to_string()))?;
        let f = catalog_get(&self.integrand).map_err(|e| Error::Config(e.to_string()))?;
        if f.dims().1 != self.domain.dim() {
            return Err(Error::Config(format!(
                "integrand acts on {}x{} matrices but the domain has dimension {}",
                f.dims().0,
                f.dims().1,
                self.domain.dim()
            )));
        }
        if !(self.h > 0.0) || !(self.qslb.h > 0.0) {
            return Err(Error::Config("mesh sizes must be positive".into()));
        }
        if let InteriorSamples::Points(ps) = &self.interior {
            if let Some(p) = ps.iter().find(|p| !self.domain.contains(p)) {
                return Err(Error::Config(format!("interior point {p:?} is not inside the domain")));
            }
        }
        if self.checks.sequences && self.sequences.is_empty() {
            return Err(Error::Config("checks.sequences is on but no sequences are given".into()));
        }
        if self.checks.decomposition && self.decomposition.is_none() {
            return Err(Error::Config("checks.decomposition is on but no decomposition block is given".into()));
        }
        Ok(())
    }

    pub fn integrand(&self) -> Result<Integrand> {
        catalog_get(&self.integrand)
    }

    pub fn solver(&self) -> SolverOptions {
        SolverOptions { seed: self.seed, ..self.solver.clone() }
    }

    pub fn interior_points(&self) -> Vec<Point> {
        match &self.interior {
            InteriorSamples::Points(ps) => ps.clone(),
            InteriorSamples::Count(n) => halton_points(&self.domain, *n),
        }
    }

    pub fn boundary_points(&self) -> Vec<Point> {
        self.boundary.clone().unwrap_or_else(|| self.domain.default_boundary_points())
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// First `n` Halton points (bases 2 and 3) of the bounding box that fall inside the domain.
pub fn halton_points(domain: &Domain, n: usize) -> Vec<Point> {
    let (lo, hi) = match domain {
        Domain::Interval { a, b } => ([*a, 0.0], [*b, 0.0]),
        Domain::Polygon { vertices } => {
            let fold = |f: fn(f64, f64) -> f64, init: f64, j: usize| vertices.iter().map(|v| v[j]).fold(init, f);
            (
                [fold(f64::min, f64::INFINITY, 0), fold(f64::min, f64::INFINITY, 1)],
                [fold(f64::max, f64::NEG_INFINITY, 0), fold(f64::max, f64::NEG_INFINITY, 1)],
            )
        }
        Domain::HalfBall { .. } => ([-1.0, -1.0], [1.0, 1.0]),
    };
    let dim = domain.dim();
    let mut out = Vec::with_capacity(n);
    let mut i = 1u64;
    while out.len() < n && i < 100_000 {
        let mut p = [lo[0] + (hi[0] - lo[0]) * radical_inverse(i, 2), 0.0];
        if dim == 2 {
            p[1] = lo[1] + (hi[1] - lo[1]) * radical_inverse(i, 3);
        }
        if domain.contains(&p) {
            out.push(p);
        }
        i += 1;
    }
    out
}

/// `0`, random matrices and random rank-one matrices.
pub fn xi_samples(rows: usize, cols: usize, cfg: &QcConfig, seed: u64) -> Vec<Mat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0c0ffee);
    let mut out = vec![Mat::zeros(rows, cols)];
    for _ in 0..cfg.xi_random {
        let m = random_matrix(rows, cols, &mut rng);
        let r = cfg.xi_radius * rng.random_range(0.1..1.0);
        out.push(m.scale(r / m.norm().max(1e-300)));
    }
    for _ in 0..cfg.xi_rank_one {
        let a = random_matrix(rows, 1, &mut rng);
        let b = random_matrix(1, cols, &mut rng);
        let av: Vec<f64> = (0..rows).map(|i| a.get(i, 0) * cfg.xi_radius / a.norm().max(1e-300)).collect();
        let bv: Vec<f64> = (0..cols).map(|j| b.get(0, j) / b.norm().max(1e-300)).collect();
        out.push(Mat::outer(&av, &bv));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Overall {
    NotWlsc,
    WlscPlausible,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    /// `qc`, `qslb` or `epsdelta`.
    pub check: String,
    pub index: usize,
    pub x0: Point,
    pub value: f64,
    pub has_witness: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorEntry {
    pub context: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementRow {
    pub x0: Point,
    pub h: f64,
    pub deficit: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdditivitySummary {
    pub integrand: String,
    pub report: AdditivityReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionSummary {
    pub result: DecompositionResult,
    pub verification: VerificationReport,
    pub additivity: AdditivityReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecessionRow {
    pub x0: Point,
    pub xi: Mat,
    pub estimate: Option<f64>,
    pub analytic: f64,
    pub rate: Option<f64>,
}

/// Wall-clock seconds per phase; kept out of `report.json` so reports are reproducible.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Timing {
    pub phases: Vec<(String, f64)>,
    pub total: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub schema_version: u32,
    pub name: String,
    pub overall: Overall,
    pub violations: Vec<Violation>,
    pub qc: Vec<QcReport>,
    pub qslb: Vec<QslbReport>,
    pub epsdelta: Vec<EpsDeltaReport>,
    pub equivalence: Vec<EquivalenceReport>,
    pub liminf: Vec<LiminfReport>,
    pub necessity: Vec<NecessityCertificate>,
    /// Whether every qslb violation with a certificate has a liminf below `F(0) - tol`.
    pub consistent: Option<bool>,
    pub refinement: Vec<RefinementRow>,
    pub decomposition: Option<DecompositionSummary>,
    pub recession: Vec<RecessionRow>,
    pub mu: Option<Vec<MuEstimate>>,
    pub errors: Vec<ErrorEntry>,
    /// The scenario with every default filled in.
    pub config: Scenario,
    #[serde(skip)]
    pub timing: Timing,
}

/// What to run; `analyze` is the full verdict, the others are single extras.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Analyze,
    Liminf,
    Decompose,
    Recession,
}

struct Clock {
    start: Instant,
    last: Instant,
    timing: Timing,
}

impl Clock {
    fn new() -> Self {
        let now = Instant::now();
        Clock { start: now, last: now, timing: Timing::default() }
    }

    fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.timing.phases.push((name.to_string(), (now - self.last).as_secs_f64()));
        self.last = now;
    }

    fn finish(mut self) -> Timing {
        self.timing.total = self.start.elapsed().as_secs_f64();
        self.timing
    }
}

/// Full verdict: qc at interior samples, qslb at boundary samples, plus toggled extras.
pub fn analyze(scenario: &Scenario) -> Result<Verdict> {
    run(scenario, Mode::Analyze)
}

pub fn run(scenario: &Scenario, mode: Mode) -> Result<Verdict> {
    scenario.validate()?;
    let f = scenario.integrand()?;
    let finf = RecessionFn::analytic(&f);
    let solver = scenario.solver();
    let mut clock = Clock::new();
    let mut v = Verdict {
        schema_version: SCHEMA_VERSION,
        name: scenario.name.clone(),
        overall: Overall::WlscPlausible,
        violations: Vec::new(),
        qc: Vec::new(),
        qslb: Vec::new(),
        epsdelta: Vec::new(),
        equivalence: Vec::new(),
        liminf: Vec::new(),
        necessity: Vec::new(),
        consistent: None,
        refinement: Vec::new(),
        decomposition: None,
        recession: Vec::new(),
        mu: None,
        errors: Vec::new(),
        config: scenario.clone(),
        timing: Timing::default(),
    };
    let interior = scenario.interior_points();
    let mut omega: Option<Arc<Mesh>> = None;
    let mut omega_mesh = |errors: &mut Vec<ErrorEntry>| -> Option<Arc<Mesh>> {
        if omega.is_none() {
            match build_mesh(&scenario.domain, scenario.h) {
                Ok(m) => omega = Some(Arc::new(m)),
                Err(e) => errors.push(entry("domain mesh", &e)),
            }
        }
        omega.clone()
    };
    let mut qslb_points = Vec::new();

    if mode == Mode::Analyze {
        if scenario.checks.qc {
            run_qc(scenario, &f, &interior, &solver, &mut v);
            clock.lap("qc");
        }
        if scenario.checks.qslb {
            qslb_points = run_qslb(scenario, &f, &finf, &solver, &mut v, &mut omega_mesh);
            clock.lap("qslb");
        }
        if scenario.checks.equivalence {
            if let Some(mesh) = omega_mesh(&mut v.errors) {
                let opts = EquivalenceOptions { tol: scenario.qslb.tol, solver: solver.clone(), ..Default::default() };
                let points: Vec<Point> = interior.iter().chain(&scenario.boundary_points()).copied().collect();
                let out: Vec<_> = points.par_iter().map(|x| equivalence_harness(&f, &finf, &scenario.domain, &mesh, x, &opts)).collect();
                for (x, r) in points.iter().zip(out) {
                    match r {
                        Ok(rep) => v.equivalence.push(rep),
                        Err(e) => v.errors.push(entry(&format!("equivalence at {x:?}"), &e)),
                    }
                }
            }
            clock.lap("equivalence");
        }
    }
    if matches!(mode, Mode::Analyze | Mode::Liminf) && (scenario.checks.sequences || mode == Mode::Liminf) {
        for (i, spec) in scenario.sequences.iter().enumerate() {
            match empirical_liminf(&f, &finf, spec, spec.n_max) {
                Ok(r) => v.liminf.push(r),
                Err(e) => v.errors.push(entry(&format!("sequence {i}"), &e)),
            }
        }
        if mode == Mode::Analyze {
            run_necessity(scenario, &f, &finf, &qslb_points, &mut v, &mut omega_mesh);
        }
        clock.lap("sequences");
    }
    if matches!(mode, Mode::Analyze | Mode::Decompose) && (scenario.checks.decomposition || mode == Mode::Decompose) {
        match &scenario.decomposition {
            Some(cfg) => match run_decomposition(cfg, &f, &finf) {
                Ok(s) => v.decomposition = Some(s),
                Err(e) => v.errors.push(entry("decomposition", &e)),
            },
            None => v.errors.push(entry("decomposition", &Error::Config("no decomposition block".into()))),
        }
        clock.lap("decomposition");
    }
    if mode == Mode::Recession || (mode == Mode::Analyze && scenario.checks.mu) {
        let (r, c) = f.dims();
        for x0 in &interior {
            for xi in xi_samples(r, c, &scenario.qc, scenario.seed) {
                let est = recession_estimate(&f, x0, &xi, &DEFAULT_T_GRID);
                if let Err(e) = &est {
                    v.errors.push(entry(&format!("recession at {x0:?}"), e));
                }
                let est = est.ok();
                v.recession.push(RecessionRow {
                    x0: *x0,
                    xi,
                    estimate: est.as_ref().map(|e| e.value),
                    analytic: f.recession(x0, &xi),
                    rate: est.and_then(|e| e.rate),
                });
            }
        }
        let mut grid = vec![0.0];
        grid.extend(DEFAULT_T_GRID);
        v.mu = Some(mu_table(&f, &finf, &grid, &interior, 256, scenario.seed));
        clock.lap("recession");
    }

    v.overall = overall(&v);
    v.consistent = consistency(&v);
    v.timing = clock.finish();
    Ok(v)
}

fn entry(context: &str, e: &Error) -> ErrorEntry {
    ErrorEntry { context: context.to_string(), message: e.to_string() }
}

fn run_qc(scenario: &Scenario, f: &Integrand, interior: &[Point], solver: &SolverOptions, v: &mut Verdict) {
    let (r, c) = f.dims();
    let mesh = match qc_mesh(c, scenario.qc.mesh_n) {
        Ok(m) => m,
        Err(e) => {
            v.errors.push(entry("qc mesh", &e));
            return;
        }
    };
    let opts = QcOptions { l_grid: scenario.qc.l_grid.clone(), tol: scenario.qc.tol, recession: false, solver: solver.clone() };
    let xis = xi_samples(r, c, &scenario.qc, scenario.seed);
    let jobs: Vec<(Point, Mat)> = interior.iter().flat_map(|x| xis.iter().map(move |xi| (*x, *xi))).collect();
    let out: Vec<Result<QcReport>> = jobs.par_iter().map(|(x, xi)| qc_deficit(f, x, xi, mesh.clone(), &opts)).collect();
    for ((x, _), r) in jobs.iter().zip(out) {
        match r {
            Ok(rep) => {
                if rep.verdict == QcVerdict::Violated {
                    v.violations.push(Violation {
                        check: "qc".into(),
                        index: v.qc.len(),
                        x0: *x,
                        value: rep.deficit,
                        has_witness: rep.witness.is_some(),
                    });
                }
                v.qc.push(rep);
            }
            Err(e) => v.errors.push(entry(&format!("qc at {x:?}"), &e)),
        }
    }
}

/// Runs the boundary checks; returns the indices into `v.qslb` of flat-point reports.
fn run_qslb(
    scenario: &Scenario,
    f: &Integrand,
    finf: &RecessionFn,
    solver: &SolverOptions,
    v: &mut Verdict,
    omega_mesh: &mut dyn FnMut(&mut Vec<ErrorEntry>) -> Option<Arc<Mesh>>,
) -> Vec<usize> {
    let dim = scenario.domain.dim();
    let opts = QslbOptions { tol: scenario.qslb.tol, solver: solver.clone(), sphere_samples: scenario.qslb.sphere_samples };
    let mut flat = Vec::new();
    let mut corners = Vec::new();
    for x in scenario.boundary_points() {
        match scenario.domain.boundary_point(&x) {
            Ok(bp) if bp.kind == BoundaryKind::Flat => flat.push(bp),
            Ok(bp) if bp.kind == BoundaryKind::Corner => corners.push(bp),
            Ok(bp) => v.errors.push(entry(&format!("qslb at {x:?}"), &Error::Unsupported(format!("{:?} boundary point", bp.kind)))),
            Err(e) => v.errors.push(entry(&format!("qslb at {x:?}"), &e)),
        }
    }
    let out: Vec<Result<QslbReport>> =
        flat.par_iter().map(|bp| halfball_mesh(bp, dim, scenario.qslb.h).and_then(|m| halfball_deficit(finf, bp, m, &opts))).collect();
    let mut idx = Vec::new();
    for (bp, r) in flat.iter().zip(out) {
        match r {
            Ok(rep) => {
                if rep.verdict == QslbVerdict::Violated {
                    v.violations.push(Violation {
                        check: "qslb".into(),
                        index: v.qslb.len(),
                        x0: bp.x0,
                        value: rep.deficit,
                        has_witness: rep.witness.is_some(),
                    });
                }
                idx.push(v.qslb.len());
                v.qslb.push(rep);
            }
            Err(e) => v.errors.push(entry(&format!("qslb at {:?}", bp.x0), &e)),
        }
    }
    for bp in &flat {
        for &h in &scenario.qslb.refinement {
            match halfball_mesh(bp, dim, h).and_then(|m| halfball_deficit(finf, bp, m, &opts)) {
                Ok(rep) => v.refinement.push(RefinementRow { x0: bp.x0, h, deficit: rep.deficit }),
                Err(e) => v.errors.push(entry(&format!("refinement at {:?}, h = {h}", bp.x0), &e)),
            }
        }
    }
    if !corners.is_empty() {
        if let Some(mesh) = omega_mesh(&mut v.errors) {
            let eo = EpsDeltaOptions { solver: solver.clone(), ..Default::default() };
            for bp in &corners {
                match epsdelta_probe(f, &mesh, &bp.x0, &eo) {
                    Ok(rep) => {
                        if rep.verdict == QslbVerdict::Violated {
                            let value = rep.rows.iter().flat_map(|r| r.minima.last()).fold(f64::INFINITY, |a, &b| a.min(b));
                            v.violations.push(Violation {
                                check: "epsdelta".into(),
                                index: v.epsdelta.len(),
                                x0: bp.x0,
                                value,
                                has_witness: false,
                            });
                        }
                        v.epsdelta.push(rep);
                    }
                    Err(e) => v.errors.push(entry(&format!("corner probe at {:?}", bp.x0), &e)),
                }
            }
        }
    }
    idx
}

fn run_necessity(
    scenario: &Scenario,
    f: &Integrand,
    finf: &RecessionFn,
    qslb_points: &[usize],
    v: &mut Verdict,
    omega_mesh: &mut dyn FnMut(&mut Vec<ErrorEntry>) -> Option<Arc<Mesh>>,
) {
    let violated: Vec<usize> = qslb_points.iter().copied().filter(|&i| v.qslb[i].verdict == QslbVerdict::Violated).collect();
    if violated.is_empty() {
        return;
    }
    let Some(mesh) = omega_mesh(&mut v.errors) else { return };
    for i in violated {
        let rep = &v.qslb[i];
        let Some(w) = &rep.witness else { continue };
        let bp = match scenario.domain.boundary_point(&rep.x0) {
            Ok(bp) => bp,
            Err(e) => {
                v.errors.push(entry("necessity witness", &e));
                continue;
            }
        };
        match necessity_witness(f, finf, &scenario.domain, mesh.clone(), &bp, w, rep.deficit, &DEFAULT_WITNESS_N, scenario.qslb.tol) {
            Ok(c) => v.necessity.push(c),
            Err(e) => v.errors.push(entry(&format!("necessity witness at {:?}", rep.x0), &e)),
        }
    }
}

fn run_decomposition(cfg: &DecompositionConfig, f: &Integrand, finf: &RecessionFn) -> Result<DecompositionSummary> {
    let seq: Vec<BvFunction> = (1..=cfg.sequence.n_max).into_par_iter().map(|k| generate(&cfg.sequence, k)).collect::<Result<_>>()?;
    let result = local_decompose(&seq, &cfg.cover, cfg.n_max)?;
    let verification = verify_properties(&result)?;
    let members: Vec<(usize, BvFunction, Vec<BvFunction>)> =
        result.members.iter().map(|m| (m.n, m.member.clone(), m.components.clone())).collect();
    let zero = |u: &BvFunction| BvFunction::zeros(u.mesh().clone(), u.m());
    let mut rows = Vec::with_capacity(members.len());
    for (n, u, parts) in &members {
        let r = additivity_residual(f, finf, &zero(u), &[(*n, u.clone(), parts.clone())], 1e-2)?;
        rows.extend(r.rows);
    }
    let last = rows.last().map(|r| r.residual.abs()).unwrap_or(0.0);
    let additivity = AdditivityReport {
        rows,
        threshold: 1e-2,
        verdict: if last < 1e-2 {
            crate::functional::AdditivityVerdict::Additive
        } else {
            crate::functional::AdditivityVerdict::NotAdditive
        },
    };
    Ok(DecompositionSummary { result, verification, additivity })
}

fn overall(v: &Verdict) -> Overall {
    if !v.violations.is_empty() {
        return Overall::NotWlsc;
    }
    let low = v.qc.iter().any(|r| r.low_confidence) || v.qslb.iter().any(|r| r.low_confidence);
    let checks_ran = !(v.qc.is_empty() && v.qslb.is_empty() && v.epsdelta.is_empty());
    if low || !v.errors.is_empty() || !checks_ran {
        Overall::Inconclusive
    } else {
        Overall::WlscPlausible
    }
}

fn consistency(v: &Verdict) -> Option<bool> {
    if v.necessity.is_empty() {
        return None;
    }
    Some(v.necessity.iter().all(|c| c.holds))
}
