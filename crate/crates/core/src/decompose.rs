//! Local decomposition of a bounded sequence against a compact cover.
//!
//! For each index `n` a member `u_{k(n)}` is split with piecewise-affine cutoffs
//! `phi_n^j` (1 on `(K_j)_{1/(2n)}`, 0 outside `(K_j)_{1/n}`) applied one set at a
//! time; the last component is what remains. In 1D each member is first refined so
//! that cutoff breakpoints and atoms sit on mesh nodes, which makes the products exact.

use crate::bv::{
    abs_affine_1d, abs_affine_triangle, distance_cutoff, does_not_charge, BvFunction, ChargeReport, ChargeSupport, ChargeVerdict,
    CompactSet, MatrixMeasure, Region, CHARGE_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::functional::reassembly_error;
use crate::mesh::{interval_mesh_from_nodes, Mesh};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverSpec {
    pub sets: Vec<CompactSet>,
}

impl CoverSpec {
    pub fn new(sets: Vec<CompactSet>) -> Self {
        CoverSpec { sets }
    }

    /// Number of mesh vertices farther than `1e-12` from every set.
    pub fn uncovered_vertices(&self, mesh: &Mesh) -> usize {
        mesh.vertices().iter().filter(|p| self.sets.iter().all(|k| k.dist(p) > 1e-12)).count()
    }

    fn validate(&self) -> Result<()> {
        if self.sets.is_empty() {
            return Err(Error::Config("cover needs at least one compact set".into()));
        }
        Ok(())
    }
}

/// One decomposed member.
#[derive(Debug, Clone, Serialize)]
pub struct DecomposedMember {
    pub n: usize,
    /// 1-based index of the selected member.
    pub k: usize,
    /// `int |r ⊗ grad phi|` for every cutoff step.
    pub coupling: Vec<f64>,
    /// `sup |r| |grad phi|` for every cutoff step.
    pub sup_coupling: Vec<f64>,
    pub component_tv: Vec<f64>,
    /// The selected member on the refined mesh.
    #[serde(skip)]
    pub member: BvFunction,
    #[serde(skip)]
    pub components: Vec<BvFunction>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SRow {
    pub m: usize,
    /// `|D u_{k(n_max)}|((K)_{1/(2m)})`, the finite-prefix stand-in for `S_m`.
    pub estimate: f64,
    /// `max_{m <= n <= n_max} |estimate - |D u_{k(n)}|((K)_{1/(2m)})|`.
    pub sup_deviation: f64,
    /// Whether every deviation at index `n` stays below `1/n`.
    pub within_bound: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct STable {
    pub set: usize,
    pub rows: Vec<SRow>,
    pub non_monotone: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionResult {
    pub cover: CoverSpec,
    pub n_max: usize,
    pub index_map: Vec<usize>,
    pub members: Vec<DecomposedMember>,
    pub s_tables: Vec<STable>,
    pub covers: bool,
    pub uncovered_vertices: usize,
}

/// Splits `seq` (members `u_1, u_2, ...`) for `n = 1..=n_max`.
///
/// `k(n)` is the smallest index above `k(n-1)` whose couplings satisfy both
/// `int |r ⊗ grad phi| <= b` and `sup |r| |grad phi| <= b` at every cutoff step,
/// with `b = 1/(n (J-1))`.
pub fn local_decompose(seq: &[BvFunction], cover: &CoverSpec, n_max: usize) -> Result<DecompositionResult> {
    cover.validate()?;
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    if n_max == 0 {
        return Err(Error::Config("n_max must be positive".into()));
    }
    let steps = cover.sets.len() - 1;
    let mut members = Vec::with_capacity(n_max);
    let mut prev = 0usize;
    for n in 1..=n_max {
        let bound = if steps == 0 { f64::INFINITY } else { 1.0 / (n as f64 * steps as f64) };
        let mut achieved = f64::INFINITY;
        let mut chosen = None;
        for k in prev + 1..=seq.len() {
            let split = split_member(&seq[k - 1], cover, n)?;
            let worst = split.coupling.iter().chain(&split.sup_coupling).fold(0.0f64, |a, &b| a.max(b));
            if worst <= bound * (1.0 + 1e-12) {
                chosen = Some((k, split));
                break;
            }
            achieved = achieved.min(worst);
        }
        let Some((k, split)) = chosen else {
            return Err(Error::PrefixTooShort { n, required: bound, achieved });
        };
        prev = k;
        let component_tv = split.components.iter().map(|c| c.derivative().total_variation(None)).collect();
        members.push(DecomposedMember {
            n,
            k,
            coupling: split.coupling,
            sup_coupling: split.sup_coupling,
            component_tv,
            member: split.member,
            components: split.components,
        });
    }
    let s_tables = (0..steps).map(|j| s_table(&members, &cover.sets[j], j)).collect();
    let uncovered = members.iter().map(|m| cover.uncovered_vertices(m.member.mesh())).max().unwrap_or(0);
    Ok(DecompositionResult {
        cover: cover.clone(),
        n_max,
        index_map: members.iter().map(|m| m.k).collect(),
        members,
        s_tables,
        covers: uncovered == 0,
        uncovered_vertices: uncovered,
    })
}

struct Split {
    member: BvFunction,
    components: Vec<BvFunction>,
    coupling: Vec<f64>,
    sup_coupling: Vec<f64>,
}

fn split_member(u: &BvFunction, cover: &CoverSpec, n: usize) -> Result<Split> {
    let (inner, outer) = (0.5 / n as f64, 1.0 / n as f64);
    let steps = cover.sets.len() - 1;
    let member = if u.dim() == 1 {
        let mut extra: Vec<f64> = u.atoms().iter().map(|a| a.location).collect();
        for k in &cover.sets[..steps] {
            for d in [inner, outer] {
                for (a, b) in k.neighbourhood_1d(d) {
                    extra.extend([a, b]);
                }
            }
        }
        refine_1d(u, &extra)?
    } else {
        u.clone()
    };
    let mut rest = member.clone();
    let mut components = Vec::with_capacity(steps + 1);
    let mut coupling = Vec::with_capacity(steps);
    let mut sup_coupling = Vec::with_capacity(steps);
    for k in &cover.sets[..steps] {
        let phi = distance_cutoff(member.mesh(), k, inner, outer);
        let (int, sup) = cutoff_coupling(&rest, &phi);
        coupling.push(int);
        sup_coupling.push(sup);
        let part = rest.cutoff_multiply(&phi)?;
        rest = rest.sub(&part)?;
        components.push(part);
    }
    components.push(rest);
    Ok(Split { member, components, coupling, sup_coupling })
}

/// Same function on a 1D mesh whose nodes also include `extra` points inside the interval.
pub fn refine_1d(u: &BvFunction, extra: &[f64]) -> Result<BvFunction> {
    let mesh = u.mesh();
    if mesh.dim() != 1 {
        return Err(Error::DimensionMismatch("refinement is 1D only".into()));
    }
    let mut xs: Vec<f64> = mesh.vertices().iter().map(|p| p[0]).collect();
    xs.sort_by(f64::total_cmp);
    let (a, b) = (xs[0], xs[xs.len() - 1]);
    let tol = 1e-12 * (b - a);
    let mut added: Vec<f64> = extra
        .iter()
        .copied()
        .filter(|&x| x > a + tol && x < b - tol)
        .filter(|&x| {
            let i = xs.partition_point(|&y| y < x);
            let near = |j: usize| xs.get(j).is_some_and(|&y| (y - x).abs() <= tol);
            !(near(i) || (i > 0 && near(i - 1)))
        })
        .collect();
    if added.is_empty() {
        return Ok(u.clone());
    }
    added.sort_by(f64::total_cmp);
    added.dedup_by(|x, y| (*x - *y).abs() <= tol);
    xs.extend(added);
    xs.sort_by(f64::total_cmp);
    let fine = Arc::new(interval_mesh_from_nodes(&xs)?);
    let m = u.m();
    let coarse = mesh.clone();
    let mut starts: Vec<(f64, usize)> = (0..coarse.num_cells())
        .map(|c| (coarse.cell(c).iter().map(|&v| coarse.vertices()[v][0]).fold(f64::INFINITY, f64::min), c))
        .collect();
    starts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = BvFunction::from_cell_fn(fine.clone(), m, |c, p| {
        let mid = fine.centroid(c)[0];
        let old = starts[starts.partition_point(|s| s.0 < mid) - 1].1;
        let l = coarse.barycentric(old, p);
        (0..m).map(|i| l.iter().enumerate().map(|(k, w)| w * u.local_value(old, k, i)).sum()).collect()
    });
    for at in u.atoms() {
        out = out.with_atom(at.location, at.jump.clone())?;
    }
    Ok(out)
}

/// `(int |u| |grad phi|, sup |u| |grad phi|)` for a cutoff given by vertex values.
fn cutoff_coupling(u: &BvFunction, phi: &[f64]) -> (f64, f64) {
    let mesh = u.mesh();
    let d = mesh.dim();
    let m = u.m();
    let (mut int, mut sup) = (0.0, 0.0f64);
    for c in 0..mesh.num_cells() {
        let vs = mesh.cell(c);
        let g = mesh.basis_grads(c);
        let mut grad = [0.0; 2];
        for (k, &v) in vs.iter().enumerate() {
            for j in 0..d {
                grad[j] += phi[v] * g[k][j];
            }
        }
        let gn = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
        if gn == 0.0 {
            continue;
        }
        let vals: Vec<Vec<f64>> = (0..vs.len()).map(|k| vertex_value(u, c, k)).collect();
        let norms: Vec<f64> = vals.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
        sup = sup.max(norms.iter().fold(0.0f64, |a, &b| a.max(b)) * gn);
        let abs_int = if m == 1 {
            if d == 1 {
                abs_affine_1d(vals[0][0], vals[1][0], mesh.cell_measure(c))
            } else {
                let p = [mesh.vertices()[vs[0]], mesh.vertices()[vs[1]], mesh.vertices()[vs[2]]];
                abs_affine_triangle(p, [vals[0][0], vals[1][0], vals[2][0]])
            }
        } else {
            mesh.quadrature(c, 4).iter().map(|(p, w)| w * u.value_in_cell(c, p).iter().map(|x| x * x).sum::<f64>().sqrt()).sum()
        };
        int += abs_int * gn;
    }
    (int, sup)
}

/// Value at local vertex `k` of cell `c`, taking the in-cell limit of 1D step parts.
fn vertex_value(u: &BvFunction, c: usize, k: usize) -> Vec<f64> {
    let mesh = u.mesh();
    let mut v = if mesh.dim() == 1 { u.step_part(mesh.centroid(c)[0]) } else { vec![0.0; u.m()] };
    for (i, x) in v.iter_mut().enumerate() {
        *x += u.local_value(c, k, i);
    }
    v
}

fn s_table(members: &[DecomposedMember], k: &CompactSet, set: usize) -> STable {
    let n_max = members.len();
    let derivs: Vec<MatrixMeasure> = members.iter().map(|m| m.member.derivative()).collect();
    let mut rows = Vec::with_capacity(n_max);
    for m in 1..=n_max {
        let region = Region::Near { set: k.clone(), delta: 0.5 / m as f64 };
        let vals: Vec<f64> = derivs[m - 1..].iter().map(|mu| mu.total_variation(Some(&region))).collect();
        let estimate = *vals.last().unwrap();
        let devs: Vec<f64> = vals.iter().map(|v| (estimate - v).abs()).collect();
        let within_bound = devs.iter().enumerate().all(|(i, d)| *d <= 1.0 / (m + i) as f64 + 1e-12);
        rows.push(SRow { m, estimate, sup_deviation: devs.iter().fold(0.0, |a: f64, &b| a.max(b)), within_bound });
    }
    let non_monotone = rows.windows(2).any(|w| w[1].estimate > w[0].estimate + 1e-12);
    STable { set, rows, non_monotone }
}

/// Entities where `|D u_{j,n}|` exceeds `|D u_n| + |cell|/n` beyond rounding.
#[derive(Debug, Clone, Serialize)]
pub struct MassRow {
    pub n: usize,
    pub component: usize,
    /// Largest excess over `|D u_n| + |cell|/n` on any cell or charge (0 when none).
    pub slack: f64,
    pub flagged_cells: Vec<usize>,
    pub flagged_charges: Vec<usize>,
    pub support_ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChargeRow {
    pub component: usize,
    pub report: ChargeReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub reassembly_error: f64,
    pub reassembly_ok: bool,
    pub mass: Vec<MassRow>,
    pub property_i: bool,
    /// Largest recorded slack over all members and components.
    pub max_slack: f64,
    pub charges: Vec<ChargeRow>,
    pub property_ii: bool,
    pub holds: bool,
}

pub const REASSEMBLY_TOL: f64 = 1e-14;

/// Checks properties (i) and (ii) and exact reassembly; violations are listed, not raised.
pub fn verify_properties(result: &DecompositionResult) -> Result<VerificationReport> {
    let sets = &result.cover.sets;
    let mut reassembly = 0.0f64;
    let mut reassembly_ok = true;
    let mut mass = Vec::new();
    let mut max_slack = 0.0f64;
    for mem in &result.members {
        let err = reassembly_error(&mem.member, &mem.components)?;
        reassembly = reassembly.max(err);
        reassembly_ok &= err <= REASSEMBLY_TOL * (1.0 + mem.member.max_abs());
        let du = mem.member.derivative();
        for (j, comp) in mem.components.iter().enumerate() {
            let row = mass_row(mem.n, j, &du, &comp.derivative(), mem, sets);
            max_slack = max_slack.max(row.slack);
            mass.push(row);
        }
    }
    let property_i = mass.iter().all(|r| r.flagged_cells.is_empty() && r.flagged_charges.is_empty() && r.support_ok);
    let mut deltas = Vec::new();
    let mut d = 0.5;
    while d >= 1.0 / result.n_max as f64 - 1e-15 {
        deltas.push(d);
        d *= 0.5;
    }
    if deltas.is_empty() {
        deltas.push(0.5);
    }
    let mut charges = Vec::new();
    for j in 1..sets.len() {
        let k = CompactSet::Union { parts: sets[..j].to_vec() };
        let seq: Vec<MatrixMeasure> = result.members.iter().map(|m| m.components[j].derivative()).collect();
        let report = does_not_charge(&seq, &k, &deltas, CHARGE_THRESHOLD)?;
        charges.push(ChargeRow { component: j, report });
    }
    let property_ii = charges.iter().all(|c| c.report.verdict == ChargeVerdict::Tight);
    Ok(VerificationReport {
        reassembly_error: reassembly,
        reassembly_ok,
        mass,
        property_i,
        max_slack,
        charges,
        property_ii,
        holds: reassembly_ok && property_i && property_ii,
    })
}

fn mass_row(n: usize, j: usize, du: &MatrixMeasure, dc: &MatrixMeasure, mem: &DecomposedMember, sets: &[CompactSet]) -> MassRow {
    let mesh = du.mesh();
    let nf = n as f64;
    let round = |x: f64| 1e-12 * (1.0 + x);
    let mut slack = 0.0f64;
    let mut flagged_cells = Vec::new();
    for c in 0..mesh.num_cells() {
        let vol = mesh.cell_measure(c);
        let bound = du.density(c).norm() * vol + vol / nf;
        let excess = dc.density(c).norm() * vol - bound;
        if excess > 0.0 {
            slack = slack.max(excess);
            if excess > round(bound) {
                flagged_cells.push(c);
            }
        }
    }
    let mut flagged_charges = Vec::new();
    for (i, ch) in dc.charges().iter().enumerate() {
        let bound = du.charges().iter().filter(|d| same_support(&d.support, &ch.support)).map(|d| d.mass).sum::<f64>();
        let excess = ch.mass - bound;
        if excess > 0.0 {
            slack = slack.max(excess);
            if excess > round(bound) {
                flagged_charges.push(i);
            }
        }
    }
    MassRow { n, component: j, slack, flagged_cells, flagged_charges, support_ok: support_ok(mem, j, sets) }
}

fn same_support(a: &ChargeSupport, b: &ChargeSupport) -> bool {
    match (a, b) {
        (ChargeSupport::Atom(p), ChargeSupport::Atom(q)) => p == q,
        (ChargeSupport::Facet(f), ChargeSupport::Facet(g)) => f == g,
        _ => false,
    }
}

/// Vertexwise support inclusions of property (i).
fn support_ok(mem: &DecomposedMember, j: usize, sets: &[CompactSet]) -> bool {
    let comp = &mem.components[j];
    let mesh = comp.mesh();
    let nf = mem.n as f64;
    let tol = 1e-12;
    for c in 0..mesh.num_cells() {
        for (k, &v) in mesh.cell(c).iter().enumerate() {
            if vertex_value(comp, c, k).iter().all(|&x| x == 0.0) {
                continue;
            }
            if vertex_value(&mem.member, c, k).iter().all(|&x| x == 0.0) {
                return false;
            }
            let x = mesh.vertices()[v];
            if sets[j].dist(&x) >= 1.0 / nf + tol {
                return false;
            }
            if sets[..j].iter().any(|k| k.dist(&x) < 0.5 / nf - tol) {
                return false;
            }
        }
    }
    true
}
