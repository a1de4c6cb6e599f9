//! Multistart first-order minimizer over continuous piecewise-affine test fields.
//!
//! Objectives have the form `J(phi) = int g(x, grad phi) dx`. Constraints are
//! enforced by radial rescaling, which is a retraction onto each feasible set because
//! all of them are star-shaped around the zero field. In normalized mode the solver
//! minimizes `J(phi) / int |grad phi|` and rescales after every step.

use crate::error::{Error, Result};
use crate::linalg::{dist, dist_to_segment, Mat, Point};
use crate::mesh::{FacetTag, Mesh};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Continuous piecewise-affine field with values in `R^m`, zero at clamped vertices.
#[derive(Debug, Clone, Serialize)]
pub struct TestField {
    #[serde(skip)]
    pub mesh: Arc<Mesh>,
    pub m: usize,
    /// Vertex-major: entry `v * m + i`.
    pub values: Vec<f64>,
    pub clamped: Vec<usize>,
}

impl TestField {
    /// Gradient on cell `c`, an `m x dim` matrix.
    pub fn gradient(&self, c: usize) -> Mat {
        cell_gradient(&self.mesh, self.m, &self.values, c)
    }

    /// `int |grad phi|`.
    pub fn total_variation(&self) -> f64 {
        (0..self.mesh.num_cells()).map(|c| self.gradient(c).norm() * self.mesh.cell_measure(c)).sum()
    }

    pub fn max_gradient(&self) -> f64 {
        (0..self.mesh.num_cells()).map(|c| self.gradient(c).norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> TestField {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Converts to a BV function on the same mesh.
    pub fn to_bv(&self) -> crate::bv::BvFunction {
        let m = self.m;
        crate::bv::BvFunction::from_vertex_values(self.mesh.clone(), m, |v| self.values[v * m..(v + 1) * m].to_vec())
    }
}

fn cell_gradient(mesh: &Mesh, m: usize, phi: &[f64], c: usize) -> Mat {
    let d = mesh.dim();
    let g = mesh.basis_grads(c);
    let mut out = Mat::zeros(m, d);
    for (k, &v) in mesh.cell(c).iter().enumerate() {
        for i in 0..m {
            let val = phi[v * m + i];
            if val != 0.0 {
                for j in 0..d {
                    out.add_at(i, j, val * g[k][j]);
                }
            }
        }
    }
    out
}

/// Cell density `g(x, xi, smoothing) -> (value, d/dxi)`.
pub type Density<'a> = dyn Fn(&Point, &Mat, f64) -> (f64, Mat) + Sync + 'a;

/// A minimization problem over fields on `mesh` vanishing at `clamped` vertices.
pub struct Problem<'a> {
    pub mesh: Arc<Mesh>,
    pub m: usize,
    pub clamped: Vec<usize>,
    pub density: &'a Density<'a>,
    /// When true the density is evaluated once per cell at the centroid.
    pub x_free: bool,
}

impl<'a> Problem<'a> {
    /// Problem clamped on the vertices of the mesh's clamped facets.
    pub fn new(mesh: Arc<Mesh>, m: usize, density: &'a Density<'a>, x_free: bool) -> Self {
        let clamped = mesh.clamped_vertices();
        Problem { mesh, m, clamped, density, x_free }
    }

    pub fn field(&self, values: Vec<f64>) -> TestField {
        TestField { mesh: self.mesh.clone(), m: self.m, values, clamped: self.clamped.clone() }
    }

    /// `J(phi)` with the exact density.
    pub fn value(&self, phi: &[f64]) -> f64 {
        self.eval_cells(&self.grads(phi), 1.0, 0.0).j
    }

    fn grads(&self, phi: &[f64]) -> Vec<Mat> {
        (0..self.mesh.num_cells()).map(|c| cell_gradient(&self.mesh, self.m, phi, c)).collect()
    }

    /// Evaluates at the field whose cell gradients are `scale * grads`.
    fn eval_cells(&self, grads: &[Mat], scale: f64, delta: f64) -> Eval {
        let mesh = &*self.mesh;
        let (m, d) = (self.m, mesh.dim());
        let mut e =
            Eval { j: 0.0, dsm: 0.0, tv: 0.0, max_grad: 0.0, gj: Vec::with_capacity(grads.len()), gd: Vec::with_capacity(grads.len()) };
        for (c, g0) in grads.iter().enumerate() {
            let xi = g0.scale(scale);
            let area = mesh.cell_measure(c);
            let (val, gxi) = if self.x_free {
                let (v, g) = (self.density)(&mesh.centroid(c), &xi, delta);
                (v * area, g.scale(area))
            } else {
                let mut v = 0.0;
                let mut g = Mat::zeros(m, d);
                for (x, w) in mesh.quadrature(c, 2) {
                    let (a, b) = (self.density)(&x, &xi, delta);
                    v += w * a;
                    g += b.scale(w);
                }
                (v, g)
            };
            let nx = xi.norm();
            e.j += val;
            e.tv += nx * area;
            e.max_grad = e.max_grad.max(nx);
            let (ds, gds) = if delta > 0.0 {
                let r = (nx * nx + delta * delta).sqrt();
                (r - delta, xi.scale(area / r))
            } else if nx > 0.0 {
                (nx, xi.scale(area / nx))
            } else {
                (0.0, Mat::zeros(m, d))
            };
            e.dsm += ds * area;
            e.gj.push(gxi);
            e.gd.push(gds);
        }
        e
    }

    /// Vertex gradient of `sum_c G_c : grad phi_c`.
    fn scatter(&self, cell_mats: impl Iterator<Item = Mat>) -> Vec<f64> {
        let mesh = &*self.mesh;
        let (m, d) = (self.m, mesh.dim());
        let mut out = vec![0.0; mesh.num_vertices() * m];
        for (c, g) in cell_mats.enumerate() {
            let bg = mesh.basis_grads(c);
            for (k, &v) in mesh.cell(c).iter().enumerate() {
                for i in 0..m {
                    let mut a = 0.0;
                    for jj in 0..d {
                        a += g.get(i, jj) * bg[k][jj];
                    }
                    out[v * m + i] += a;
                }
            }
        }
        out
    }
}

struct Eval {
    j: f64,
    /// Smoothed `int |grad phi|`.
    dsm: f64,
    /// Exact `int |grad phi|`.
    tv: f64,
    max_grad: f64,
    /// Per-cell derivatives of the cell contributions to `j` and `dsm`.
    gj: Vec<Mat>,
    gd: Vec<Mat>,
}

/// Feasible set / objective mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    Free,
    /// `|grad phi| <= cap` on every cell.
    GradientCap {
        cap: f64,
    },
    /// `int |grad phi| <= cap`.
    TvCap {
        cap: f64,
    },
    /// Minimize `J / int |grad phi|`; witnesses are returned with `int |grad phi| = 1`.
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Backtracking line search with sufficient decrease.
    Armijo,
    /// Normalized steps `step0 / sqrt(k + 1)`.
    Diminishing,
}

fn default_restarts() -> usize {
    8
}
fn default_max_iter() -> usize {
    500
}
fn default_step_rule() -> StepRule {
    StepRule::Armijo
}
fn default_step0() -> f64 {
    0.1
}
fn default_smoothing() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3]
}
fn default_stationarity_tol() -> f64 {
    1e-3
}
fn default_true() -> bool {
    true
}

/// Solver settings; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOptions {
    /// Random Gaussian starts, in addition to the deterministic ones.
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    /// Iteration budget per start, split evenly over the smoothing stages.
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_step_rule")]
    pub step_rule: StepRule,
    #[serde(default = "default_step0")]
    pub step0: f64,
    /// Smoothing continuation; the exact objective is evaluated after the last stage.
    #[serde(default = "default_smoothing")]
    pub smoothing: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_stationarity_tol")]
    pub stationarity_tol: f64,
    /// Include rank-one and boundary-layer ramp starts.
    #[serde(default = "default_true")]
    pub ramps: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            restarts: default_restarts(),
            max_iter: default_max_iter(),
            step_rule: default_step_rule(),
            step0: default_step0(),
            smoothing: default_smoothing(),
            seed: 0,
            stationarity_tol: default_stationarity_tol(),
            ramps: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StartSummary {
    pub label: String,
    pub value: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    /// Exact objective at the witness (a quotient in normalized mode).
    pub value: f64,
    pub witness: TestField,
    pub iterations: usize,
    pub restarts_used: usize,
    pub best_start: usize,
    pub stationarity: f64,
    pub low_confidence: bool,
    pub seeds: Vec<u64>,
    pub starts: Vec<StartSummary>,
}

struct Runner<'p, 'a> {
    problem: &'p Problem<'a>,
    constraint: Constraint,
    opts: &'p SolverOptions,
    free: Vec<bool>,
}

struct State {
    phi: Vec<f64>,
    grads: Vec<Mat>,
    eval: Eval,
    value: f64,
}

impl<'p, 'a> Runner<'p, 'a> {
    fn objective(&self, e: &Eval) -> f64 {
        match self.constraint {
            Constraint::Normalized => {
                if e.dsm > 0.0 {
                    e.j / e.dsm
                } else {
                    f64::NAN
                }
            }
            _ => e.j,
        }
    }

    fn exact_objective(&self, grads: &[Mat]) -> f64 {
        let e = self.problem.eval_cells(grads, 1.0, 0.0);
        match self.constraint {
            Constraint::Normalized => e.j / e.tv,
            _ => e.j,
        }
    }

    fn gradient(&self, e: &Eval) -> Vec<f64> {
        let mut g = match self.constraint {
            Constraint::Normalized => {
                let q = e.j / e.dsm;
                let inv = 1.0 / e.dsm;
                self.problem.scatter(e.gj.iter().zip(&e.gd).map(|(a, b)| (*a - b.scale(q)).scale(inv)))
            }
            _ => self.problem.scatter(e.gj.iter().copied()),
        };
        for (x, &f) in g.iter_mut().zip(&self.free) {
            if !f {
                *x = 0.0;
            }
        }
        g
    }

    /// Radial factor that maps a field with these cell gradients into the feasible set.
    fn retraction_scale(&self, grads: &[Mat]) -> f64 {
        let mesh = &*self.problem.mesh;
        match self.constraint {
            Constraint::Free => 1.0,
            Constraint::GradientCap { cap } => {
                let mg = grads.iter().map(|g| g.norm()).fold(0.0, f64::max);
                if mg > cap {
                    cap / mg
                } else {
                    1.0
                }
            }
            Constraint::TvCap { .. } | Constraint::Normalized => {
                let tv: f64 = grads.iter().enumerate().map(|(c, g)| g.norm() * mesh.cell_measure(c)).sum();
                let target = if let Constraint::TvCap { cap } = self.constraint { cap } else { 1.0 };
                if tv > target || (self.constraint == Constraint::Normalized && tv > 0.0) {
                    target / tv
                } else {
                    1.0
                }
            }
        }
    }

    fn check(&self, v: f64, phi: &[f64]) -> Result<()> {
        if v.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite { value: v, snapshot: phi.to_vec() })
        }
    }

    fn state(&self, mut phi: Vec<f64>, delta: f64) -> State {
        for (x, &f) in phi.iter_mut().zip(&self.free) {
            if !f {
                *x = 0.0;
            }
        }
        let mut grads = self.problem.grads(&phi);
        let s = self.retraction_scale(&grads);
        if s != 1.0 {
            phi.iter_mut().for_each(|x| *x *= s);
            grads.iter_mut().for_each(|g| *g = g.scale(s));
        }
        let eval = self.problem.eval_cells(&grads, 1.0, delta);
        let value = self.objective(&eval);
        State { phi, grads, eval, value }
    }

    /// Trial point `R(phi - a g)` from cached cell gradients.
    fn trial(&self, st: &State, g: &[f64], gg: &[Mat], a: f64, delta: f64) -> State {
        let mut grads: Vec<Mat> = st.grads.iter().zip(gg).map(|(p, q)| *p - q.scale(a)).collect();
        let s = self.retraction_scale(&grads);
        let phi: Vec<f64> = st.phi.iter().zip(g).map(|(p, q)| s * (p - a * q)).collect();
        if s != 1.0 {
            grads.iter_mut().for_each(|x| *x = x.scale(s));
        }
        let eval = self.problem.eval_cells(&grads, 1.0, delta);
        let value = self.objective(&eval);
        State { phi, grads, eval, value }
    }

    /// One start: smoothing continuation, keeping the best exact value seen.
    fn run(&self, phi0: Vec<f64>) -> Result<RunOutcome> {
        let stages = self.opts.smoothing.len().max(1);
        let per_stage = (self.opts.max_iter / stages).max(1);
        let first = self.opts.smoothing.first().copied().unwrap_or(0.0);
        let mut st = self.state(phi0, first);
        let mut best_val = self.exact_objective(&st.grads);
        self.check(best_val, &st.phi)?;
        let mut best_phi = st.phi.clone();
        let mut iterations = 0;
        let mut stationarity = 0.0;
        let mut hit_cap = false;
        let scale = st.phi.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1e-3);
        let mut alpha = self.opts.step0 * scale;
        for &delta in &self.opts.smoothing {
            st.eval = self.problem.eval_cells(&st.grads, 1.0, delta);
            st.value = self.objective(&st.eval);
            self.check(st.value, &st.phi)?;
            let mut history = vec![st.value];
            let mut k = 0;
            let mut converged = false;
            while k < per_stage {
                k += 1;
                iterations += 1;
                let g = self.gradient(&st.eval);
                let gmax = g.iter().fold(0.0f64, |a, b| a.max(b.abs()));
                if gmax == 0.0 {
                    converged = true;
                    break;
                }
                let gg = self.problem.grads(&g);
                let next = match self.opts.step_rule {
                    StepRule::Armijo => {
                        let mut a = alpha.max(1e-12 * scale / gmax).min(1e6);
                        let mut accepted = None;
                        for _ in 0..50 {
                            let t = self.trial(&st, &g, &gg, a, delta);
                            let decrease: f64 = st.phi.iter().zip(&t.phi).zip(&g).map(|((p, q), r)| r * (p - q)).sum();
                            if t.value.is_finite() && decrease >= 0.0 && t.value <= st.value - 1e-4 * decrease {
                                accepted = Some(t);
                                break;
                            }
                            a *= 0.5;
                        }
                        match accepted {
                            Some(t) => {
                                alpha = 2.0 * a;
                                t
                            }
                            None => {
                                converged = true;
                                break;
                            }
                        }
                    }
                    StepRule::Diminishing => {
                        let gn = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                        let a = self.opts.step0 * scale / ((k as f64).sqrt() * gn);
                        self.trial(&st, &g, &gg, a, delta)
                    }
                };
                self.check(next.value, &next.phi)?;
                st = next;
                history.push(st.value);
                let n = history.len();
                let window = |w: usize| n > w && (history[n - 1 - w] - history[n - 1]).abs() <= 1e-10 * (1.0 + st.value.abs());
                if window(5) {
                    converged = true;
                    break;
                }
            }
            // gradient mapping at a small fixed step
            let g = self.gradient(&st.eval);
            let gg = self.problem.grads(&g);
            let t = 1e-3 * scale;
            let moved = self.trial(&st, &g, &gg, t, delta);
            stationarity = st.phi.iter().zip(&moved.phi).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() / t;
            hit_cap = !converged;
            let exact = self.exact_objective(&st.grads);
            self.check(exact, &st.phi)?;
            if exact < best_val {
                best_val = exact;
                best_phi = st.phi.clone();
            }
        }
        let low = hit_cap && stationarity > self.opts.stationarity_tol;
        Ok((best_val, best_phi, iterations, stationarity, low))
    }
}

/// Distance from each vertex to the boundary facets carrying `tag` (infinite if none).
fn facet_distance(mesh: &Mesh, tag: FacetTag) -> Vec<f64> {
    let segs: Vec<(Point, Point)> =
        mesh.facets().iter().filter(|f| f.tag == tag).map(|f| (mesh.vertices()[f.vertices[0]], mesh.vertices()[f.vertices[1]])).collect();
    mesh.vertices()
        .iter()
        .map(|p| {
            segs.iter().map(|(a, b)| if mesh.dim() == 1 { dist(p, a) } else { dist_to_segment(p, a, b) }).fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn deterministic_starts(problem: &Problem, normalized: bool, ramps: bool) -> Vec<(String, Vec<f64>)> {
    let mesh = &*problem.mesh;
    let (m, d, nv) = (problem.m, mesh.dim(), mesh.num_vertices());
    let mut out = Vec::new();
    if !normalized {
        out.push(("zero".to_string(), vec![0.0; nv * m]));
    }
    if !ramps {
        return out;
    }
    let dc = facet_distance(mesh, FacetTag::Clamped);
    let df = facet_distance(mesh, FacetTag::Free);
    let h = mesh.h();
    let mut center = [0.0; 2];
    for p in mesh.vertices() {
        center[0] += p[0] / nv as f64;
        center[1] += p[1] / nv as f64;
    }
    for i in 0..m {
        for j in 0..d {
            for s in [1.0, -1.0] {
                let mut phi = vec![0.0; nv * m];
                for v in 0..nv {
                    let cut = if dc[v].is_finite() { (dc[v] / (2.0 * h)).min(1.0) } else { 1.0 };
                    phi[v * m + i] = s * (mesh.vertices()[v][j] - center[j]) * cut;
                }
                out.push((format!("rank-one e{i}⊗e{j} {s:+}"), phi));
            }
        }
    }
    for i in 0..m {
        for w in [1.0, 0.25, 2.0 * h] {
            for s in [1.0, -1.0] {
                let mut phi = vec![0.0; nv * m];
                for v in 0..nv {
                    phi[v * m + i] = s * (dc[v] / w).min(1.0);
                }
                out.push((format!("layer e{i} w={w:.3} {s:+}"), phi));
            }
        }
        // concentrations on the free boundary
        if df.iter().any(|d| d.is_finite()) {
            for w in [0.25, 2.0 * h] {
                for s in [1.0, -1.0] {
                    let mut phi = vec![0.0; nv * m];
                    for v in 0..nv {
                        let cut = if dc[v].is_finite() { (dc[v] / (2.0 * h)).min(1.0) } else { 1.0 };
                        phi[v * m + i] = s * (1.0 - df[v] / w).max(0.0) * cut;
                    }
                    out.push((format!("free layer e{i} w={w:.3} {s:+}"), phi));
                }
            }
        }
    }
    out
}

fn normalize_tv(problem: &Problem, phi: &mut [f64]) -> bool {
    let tv = problem.eval_cells(&problem.grads(phi), 1.0, 0.0).tv;
    if tv > 0.0 && tv.is_finite() {
        phi.iter_mut().for_each(|x| *x /= tv);
        true
    } else {
        false
    }
}

/// Minimizes over all default starts.
/// `(value, field, iterations, stationarity, hit_cap)` of one start.
type RunOutcome = (f64, Vec<f64>, usize, f64, bool);

pub fn minimize_field(problem: &Problem, constraint: Constraint, opts: &SolverOptions) -> Result<SolveResult> {
    minimize_field_from(problem, constraint, opts, &[])
}

/// Minimizes over the default starts followed by `extra` initial fields.
pub fn minimize_field_from(problem: &Problem, constraint: Constraint, opts: &SolverOptions, extra: &[Vec<f64>]) -> Result<SolveResult> {
    let n = problem.mesh.num_vertices() * problem.m;
    if extra.iter().any(|e| e.len() != n) {
        return Err(Error::DimensionMismatch(format!("initial fields must have {n} entries")));
    }
    let normalized = constraint == Constraint::Normalized;
    let mut free = vec![true; n];
    for &v in &problem.clamped {
        for i in 0..problem.m {
            free[v * problem.m + i] = false;
        }
    }
    if !normalized {
        let z = problem.value(&vec![0.0; n]);
        if !z.is_finite() {
            return Err(Error::NonFinite { value: z, snapshot: vec![0.0; n] });
        }
    }
    let scale = match constraint {
        Constraint::TvCap { cap } => cap,
        _ => 1.0,
    };
    let mut starts: Vec<(String, Vec<f64>, u64)> = Vec::new();
    for (label, mut phi) in deterministic_starts(problem, normalized, opts.ramps) {
        if label == "zero" || normalize_tv(problem, &mut phi) {
            phi.iter_mut().for_each(|x| *x *= scale);
            starts.push((label, phi, 0));
        }
    }
    for r in 0..opts.restarts {
        let seed = opts.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(r as u64 + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut phi: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        for (x, &f) in phi.iter_mut().zip(&free) {
            if !f {
                *x = 0.0;
            }
        }
        if normalize_tv(problem, &mut phi) {
            phi.iter_mut().for_each(|x| *x *= scale);
            starts.push((format!("random {r}"), phi, seed));
        }
    }
    for (k, e) in extra.iter().enumerate() {
        starts.push((format!("given {k}"), e.clone(), 0));
    }
    if starts.is_empty() {
        return Err(Error::PreconditionUnmet("no admissible start: every free field is constant".into()));
    }
    let runner = Runner { problem, constraint, opts, free };
    let results: Vec<Result<RunOutcome>> = starts.par_iter().map(|(_, phi, _)| runner.run(phi.clone())).collect();
    let mut summaries = Vec::with_capacity(starts.len());
    let mut best: Option<(usize, f64, Vec<f64>, f64, bool)> = None;
    let mut total_iter = 0;
    for (idx, (r, (label, _, _))) in results.into_iter().zip(&starts).enumerate() {
        let (val, phi, it, st, low) = r?;
        total_iter += it;
        summaries.push(StartSummary { label: label.clone(), value: val, iterations: it });
        if best.as_ref().is_none_or(|b| val < b.1) {
            best = Some((idx, val, phi, st, low));
        }
    }
    let (best_start, value, phi, stationarity, low_confidence) = best.expect("at least one start");
    Ok(SolveResult {
        value,
        witness: problem.field(phi),
        iterations: total_iter,
        restarts_used: starts.len(),
        best_start,
        stationarity,
        low_confidence,
        seeds: starts.iter().map(|s| s.2).collect(),
        starts: summaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, unit_square_mesh, Domain};

    fn dirichlet(_: &Point, xi: &Mat, _: f64) -> (f64, Mat) {
        (xi.dot(xi), xi.scale(2.0))
    }

    fn negnorm(_: &Point, xi: &Mat, d: f64) -> (f64, Mat) {
        let r = (xi.dot(xi) + d * d).sqrt();
        if r == 0.0 {
            (0.0, *xi)
        } else {
            (-(r - d), xi.scale(-1.0 / r))
        }
    }

    fn derivative_1d(_: &Point, xi: &Mat, _: f64) -> (f64, Mat) {
        (xi.get(0, 0), Mat::scalar(1.0))
    }

    fn small_opts() -> SolverOptions {
        SolverOptions { restarts: 2, max_iter: 200, ..Default::default() }
    }

    #[test]
    fn dirichlet_energy_goes_to_zero() {
        let mut mesh = unit_square_mesh(4).unwrap();
        mesh.clamp_all_boundary();
        let p = Problem::new(Arc::new(mesh), 1, &dirichlet, true);
        let r = minimize_field(&p, Constraint::Free, &small_opts()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn normalized_negnorm_is_minus_one() {
        let mut mesh = unit_square_mesh(4).unwrap();
        mesh.clamp_all_boundary();
        let p = Problem::new(Arc::new(mesh), 1, &negnorm, true);
        let r = minimize_field(&p, Constraint::Normalized, &small_opts()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-12);
        assert!((r.witness.total_variation() - 1.0).abs() < 1e-12);
        for &v in &r.witness.clamped {
            assert_eq!(r.witness.values[v], 0.0);
        }
    }

    #[test]
    fn half_interval_ramp_quotient() {
        let mesh = build_mesh(&Domain::half_ball(&[-1.0]), 0.1).unwrap();
        let p = Problem::new(Arc::new(mesh), 1, &derivative_1d, true);
        let r = minimize_field(&p, Constraint::Normalized, &small_opts()).unwrap();
        assert!((r.value + 1.0).abs() < 1e-9, "{}", r.value);
        // monotone decreasing witness
        let w = &r.witness;
        let mut pts: Vec<(f64, f64)> = (0..w.mesh.num_vertices()).map(|v| (w.mesh.vertices()[v][0], w.values[v])).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!(pts.windows(2).all(|q| q[1].1 <= q[0].1 + 1e-12));
    }
}
