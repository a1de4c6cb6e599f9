//! Weak*-converging test sequences and the empirical liminf estimator.
//!
//! Every generated sequence converges weakly* to zero. Members in 1D live on
//! interval meshes whose nodes include all kinks, so piecewise-affine members are
//! represented exactly; 2D members are nodal interpolants on a fixed mesh.

use crate::bv::{weakstar_diagnostics, BvFunction, WeakStarReport};
use crate::error::{Error, Result};
use crate::functional::eval_f;
use crate::integrand::{random_matrix, Integrand, RecessionFn};
use crate::linalg::Point;
use crate::mesh::{build_mesh, interval_mesh_from_nodes, BoundaryKind, BoundaryPoint, Domain, Mesh};
use crate::minimize::TestField;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Piecewise-affine profile supported in `[-1, 1]` (radial `p(|y|)` in 2D).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `1 - |y|`.
    Hat,
    /// 1 on `|y| < 1/2`, linear to 0 at `|y| = 1`.
    Trapezoid,
    /// Asymmetric: `-1` at `y = -1/2`, `1` at `y = 1/4`.
    Skew,
    Zero,
    /// Linear interpolation of `(y, value)` knots, zero outside.
    Knots(Vec<(f64, f64)>),
}

impl Profile {
    pub fn knots(&self) -> Vec<(f64, f64)> {
        match self {
            Profile::Hat => vec![(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)],
            Profile::Trapezoid => vec![(-1.0, 0.0), (-0.5, 1.0), (0.5, 1.0), (1.0, 0.0)],
            Profile::Skew => vec![(-1.0, 0.0), (-0.5, -1.0), (0.25, 1.0), (1.0, 0.0)],
            Profile::Zero => vec![(-1.0, 0.0), (1.0, 0.0)],
            Profile::Knots(k) => k.clone(),
        }
    }

    /// Checks that knots increase and the profile vanishes outside `(-1, 1)`.
    pub fn validate(&self) -> Result<()> {
        let k = self.knots();
        if k.len() < 2 || k.windows(2).any(|w| w[1].0 <= w[0].0) || k.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::InvalidParams("profile knots must be finite and strictly increasing".into()));
        }
        let (first, last) = (k[0], k[k.len() - 1]);
        let outside = k.iter().any(|&(y, v)| y.abs() > 1.0 && v != 0.0);
        if outside || first.1 != 0.0 || last.1 != 0.0 || first.0 < -1.0 - 1e-15 || last.0 > 1.0 + 1e-15 {
            return Err(Error::InvalidParams("profile must be supported in [-1, 1] and vanish at its end knots".into()));
        }
        Ok(())
    }

    pub fn eval(&self, y: f64) -> f64 {
        let k = self.knots();
        if y <= k[0].0 || y >= k[k.len() - 1].0 {
            return 0.0;
        }
        let i = k.partition_point(|p| p.0 <= y);
        let ((y0, v0), (y1, v1)) = (k[i - 1], k[i]);
        v0 + (v1 - v0) * (y - y0) / (y1 - y0)
    }

    /// Profile evaluated at `y` (1D) or radially at `|y|` (2D).
    pub fn eval_point(&self, y: &Point, dim: usize) -> f64 {
        if dim == 1 {
            self.eval(y[0])
        } else {
            self.eval((y[0] * y[0] + y[1] * y[1]).sqrt())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceKind {
    /// `chi_(anchor, anchor + 1/n)` on an interval.
    JumpMigration {
        #[serde(default)]
        anchor: f64,
    },
    /// `n^(N-1) phi(n (x - x0))` restricted to the domain.
    BoundaryRescale { profile: Profile, x0: Point },
    /// Sawtooth of slope `amplitude` and period `1/n` in `x_1`, cut off to zero in a
    /// boundary layer of width `1/n`.
    FixedTraceOscillation { amplitude: f64 },
    /// `c (1 - n dist(x, boundary))_+`, normalized to unit total variation.
    PureBoundaryConcentration,
    /// `sin(2 pi n (x_1 - start)) / n` for `x_1 >= start`, zero before.
    OscillatingTail { start: f64 },
    /// `sin(pi x_1) / n^2`.
    DecayingSine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    #[serde(rename = "generator")]
    pub kind: SequenceKind,
    pub domain: Domain,
    /// Background mesh size.
    pub h: f64,
    pub n_max: usize,
}

fn interval_of(domain: &Domain) -> Result<(f64, f64)> {
    match domain {
        Domain::Interval { a, b } => Ok((*a, *b)),
        _ => Err(Error::Unsupported("this sequence kind needs an interval domain".into())),
    }
}

/// Interval mesh with spacing at most `h` whose nodes include `extra` (clipped to `[a, b]`).
fn interval_mesh_with(a: f64, b: f64, h: f64, extra: &[f64]) -> Result<Arc<Mesh>> {
    let n = crate::mesh::cells_for(b - a, h);
    let mut xs: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    xs.extend(extra.iter().copied().filter(|x| *x > a && *x < b));
    xs.sort_by(f64::total_cmp);
    let tol = 1e-12 * (b - a);
    xs.dedup_by(|x, y| (*x - *y).abs() <= tol);
    Ok(Arc::new(interval_mesh_from_nodes(&xs)?))
}

/// Member `n` of the sequence.
pub fn generate(spec: &SequenceSpec, n: usize) -> Result<BvFunction> {
    if n == 0 || n > spec.n_max {
        return Err(Error::InvalidParams(format!("index {n} outside 1..={}", spec.n_max)));
    }
    spec.domain.validate()?;
    let nf = n as f64;
    let dim = spec.domain.dim();
    match &spec.kind {
        SequenceKind::JumpMigration { anchor } => {
            let (a, b) = interval_of(&spec.domain)?;
            if !(*anchor >= a && *anchor < b) {
                return Err(Error::InvalidParams(format!("anchor {anchor} outside [{a}, {b})")));
            }
            let end = anchor + 1.0 / nf;
            let mesh = interval_mesh_with(a, b, spec.h, &[*anchor])?;
            let mut breaks = Vec::new();
            let mut levels = vec![if *anchor > a { 0.0 } else { 1.0 }];
            if *anchor > a {
                breaks.push(*anchor);
                levels.push(1.0);
            }
            if end < b {
                breaks.push(end);
                levels.push(0.0);
            }
            BvFunction::piecewise_constant_1d(mesh, &breaks, &levels)
        }
        SequenceKind::BoundaryRescale { profile, x0 } => {
            profile.validate()?;
            let scale = nf.powi(dim as i32 - 1);
            let mesh = if dim == 1 {
                let (a, b) = interval_of(&spec.domain)?;
                let kinks: Vec<f64> = profile.knots().iter().map(|(y, _)| x0[0] + y / nf).collect();
                interval_mesh_with(a, b, spec.h, &kinks)?
            } else {
                Arc::new(build_mesh(&spec.domain, spec.h)?)
            };
            let x = *x0;
            Ok(BvFunction::from_vertex_fn(mesh, 1, move |p| {
                let y = [nf * (p[0] - x[0]), nf * (p[1] - x[1])];
                vec![scale * profile.eval_point(&y, dim)]
            }))
        }
        SequenceKind::FixedTraceOscillation { amplitude } => {
            let amp = *amplitude;
            let mesh = if dim == 1 {
                let (a, b) = interval_of(&spec.domain)?;
                let mut kinks: Vec<f64> = (0..=(2.0 * nf * (b - a)).ceil() as i64 + 1)
                    .map(|j| (2.0 * nf * a).floor() / (2.0 * nf) + j as f64 / (2.0 * nf))
                    .collect();
                kinks.extend([a + 1.0 / nf, b - 1.0 / nf]);
                interval_mesh_with(a, b, spec.h, &kinks)?
            } else {
                Arc::new(build_mesh(&spec.domain, spec.h)?)
            };
            let domain = spec.domain.clone();
            Ok(BvFunction::from_vertex_fn(mesh, 1, move |p| {
                let s = nf * p[0];
                let saw = (s - s.round()).abs() / nf;
                let cut = (nf * domain.dist_to_boundary(p)).min(1.0);
                vec![amp * saw * cut]
            }))
        }
        SequenceKind::PureBoundaryConcentration => {
            let mesh = if dim == 1 {
                let (a, b) = interval_of(&spec.domain)?;
                interval_mesh_with(a, b, spec.h, &[a + 1.0 / nf, b - 1.0 / nf])?
            } else {
                Arc::new(build_mesh(&spec.domain, spec.h)?)
            };
            let domain = spec.domain.clone();
            let raw = BvFunction::from_vertex_fn(mesh, 1, move |p| vec![(1.0 - nf * domain.dist_to_boundary(p)).max(0.0)]);
            let tv = raw.derivative().total_variation(None);
            if tv > 0.0 {
                Ok(raw.scale(1.0 / tv))
            } else {
                Ok(raw)
            }
        }
        SequenceKind::OscillatingTail { start } => {
            let s0 = *start;
            let mesh = if dim == 1 {
                let (a, b) = interval_of(&spec.domain)?;
                interval_mesh_with(a, b, spec.h.min(1.0 / (32.0 * nf)), &[s0])?
            } else {
                Arc::new(build_mesh(&spec.domain, spec.h)?)
            };
            Ok(BvFunction::from_vertex_fn(mesh, 1, move |p| {
                let t = (p[0] - s0).max(0.0);
                vec![(2.0 * std::f64::consts::PI * nf * t).sin() / nf]
            }))
        }
        SequenceKind::DecayingSine => {
            let mesh = match spec.domain {
                Domain::Interval { a, b } => interval_mesh_with(a, b, spec.h, &[])?,
                _ => Arc::new(build_mesh(&spec.domain, spec.h)?),
            };
            Ok(BvFunction::from_vertex_fn(mesh, 1, move |p| vec![(std::f64::consts::PI * p[0]).sin() / (nf * nf)]))
        }
    }
}

/// Radius `r_n` with the support of member `n` inside the `r_n`-neighbourhood of the
/// boundary, for boundary-concentrating kinds.
pub fn support_radius(spec: &SequenceSpec, n: usize) -> Option<f64> {
    match spec.kind {
        SequenceKind::PureBoundaryConcentration | SequenceKind::BoundaryRescale { .. } => Some(1.0 / n as f64),
        SequenceKind::JumpMigration { anchor } => match spec.domain {
            Domain::Interval { a, .. } if anchor == a => Some(1.0 / n as f64),
            _ => None,
        },
        SequenceKind::FixedTraceOscillation { .. } | SequenceKind::OscillatingTail { .. } | SequenceKind::DecayingSine => None,
    }
}

/// The weak* limit of every generated sequence: zero on a background mesh.
pub fn limit(spec: &SequenceSpec) -> Result<BvFunction> {
    let mesh = match spec.domain {
        Domain::Interval { a, b } => interval_mesh_with(a, b, spec.h, &[])?,
        _ => Arc::new(build_mesh(&spec.domain, spec.h)?),
    };
    Ok(BvFunction::zeros(mesh, 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiminfVerdict {
    LscViolatedEmpirically,
    NotViolated,
}

#[derive(Debug, Clone, Serialize)]
pub struct LiminfRow {
    pub n: usize,
    pub value: f64,
    /// `min_{m >= n} F(u_m)` over the computed prefix.
    pub tail_min: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LiminfReport {
    pub rows: Vec<LiminfRow>,
    pub limit_value: f64,
    /// Minimum over the second half of the prefix.
    pub liminf_estimate: f64,
    pub tol: f64,
    /// Every tail member lies below `F(limit) - tol`.
    pub stable_tail: bool,
    pub verdict: LiminfVerdict,
    pub weakstar: Option<WeakStarReport>,
}

/// Empirical liminf of `F` along `spec` compared with `F` at the weak* limit.
pub fn empirical_liminf(f: &Integrand, finf: &RecessionFn, spec: &SequenceSpec, n_max: usize) -> Result<LiminfReport> {
    if n_max < 8 {
        return Err(Error::PreconditionUnmet(format!("n_max = {n_max}, need at least 8")));
    }
    let spec = SequenceSpec { n_max: n_max.max(spec.n_max), ..spec.clone() };
    let members: Vec<BvFunction> = (1..=n_max).into_par_iter().map(|n| generate(&spec, n)).collect::<Result<_>>()?;
    let values: Vec<f64> = members.par_iter().map(|u| eval_f(f, finf, u).map(|v| v.total)).collect::<Result<_>>()?;
    let lim = limit(&spec)?;
    let limit_value = eval_f(f, finf, &lim)?.total;
    let tol = 1e-6 * (1.0 + limit_value.abs());
    summarize(&values, limit_value, tol, Some(weakstar_diagnostics(&members, &lim, 1e-2)?))
}

/// Liminf report from precomputed values `F(u_1), ..., F(u_n)`.
pub fn summarize(values: &[f64], limit_value: f64, tol: f64, weakstar: Option<WeakStarReport>) -> Result<LiminfReport> {
    if values.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut rows: Vec<LiminfRow> = values.iter().enumerate().map(|(i, &v)| LiminfRow { n: i + 1, value: v, tail_min: v }).collect();
    for i in (0..rows.len().saturating_sub(1)).rev() {
        rows[i].tail_min = rows[i].tail_min.min(rows[i + 1].tail_min);
    }
    let tail = &values[values.len() / 2..];
    let liminf_estimate = tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let stable_tail = tail.iter().all(|v| *v < limit_value - tol);
    let verdict =
        if liminf_estimate < limit_value - tol && stable_tail { LiminfVerdict::LscViolatedEmpirically } else { LiminfVerdict::NotViolated };
    Ok(LiminfReport { rows, limit_value, liminf_estimate, tol, stable_tail, verdict, weakstar })
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitEnergyRow {
    pub k: usize,
    pub value: f64,
    pub relative_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitEnergyReport {
    pub x0: Point,
    pub normal: Point,
    /// `int_{B_1 ∩ {nu . y < 0}} f(grad phi)`.
    pub half_ball_integral: f64,
    pub rows: Vec<LimitEnergyRow>,
    pub gap_at_k_max: f64,
}

fn relative_gap(value: f64, target: f64) -> f64 {
    let d = (value - target).abs();
    if target != 0.0 {
        d / target.abs()
    } else {
        d
    }
}

/// Checks `F(phi_k) -> int_{half ball} f(grad phi)` for a 1-homogeneous x-free `f`.
pub fn limit_energy_check(
    f: &Integrand,
    profile: &Profile,
    domain: &Domain,
    x0: &Point,
    k_max: usize,
    h: f64,
) -> Result<LimitEnergyReport> {
    profile.validate()?;
    let bp = domain.boundary_point(x0)?;
    if bp.kind != BoundaryKind::Flat {
        return Err(Error::Unsupported(format!("{x0:?} is not on a flat piece of the boundary")));
    }
    check_homogeneous(f)?;
    let finf = RecessionFn::analytic(f);
    let dim = domain.dim();
    let normal: Vec<f64> = bp.normal[..dim].to_vec();
    let hb_mesh = if dim == 1 {
        let s = -normal[0];
        let mut nodes: Vec<f64> = profile.knots().iter().map(|(y, _)| *y).filter(|y| s * y > 0.0 && y.abs() < 1.0).collect();
        nodes.extend([0.0, s]);
        let (lo, hi) = if s > 0.0 { (0.0, 1.0) } else { (-1.0, 0.0) };
        interval_mesh_with(lo, hi, h, &nodes)?
    } else {
        Arc::new(build_mesh(&Domain::half_ball(&normal), h)?)
    };
    let phi = BvFunction::from_vertex_fn(hb_mesh, 1, |p| vec![profile.eval_point(p, dim)]);
    let half_ball_integral = eval_f(f, &finf, &phi)?.total;
    let spec = SequenceSpec {
        kind: SequenceKind::BoundaryRescale { profile: profile.clone(), x0: bp.x0 },
        domain: domain.clone(),
        h,
        n_max: k_max,
    };
    let reach = domain.flat_radius(&bp.x0);
    let mut ks: Vec<usize> = (0..).map(|i| 1usize << i).take_while(|k| *k < k_max).collect();
    ks.push(k_max);
    ks.retain(|&k| 1.0 / k as f64 <= reach + 1e-12);
    if ks.is_empty() {
        return Err(Error::PreconditionUnmet("no rescaling index keeps the support on the flat boundary piece".into()));
    }
    let rows: Vec<LimitEnergyRow> = ks
        .par_iter()
        .map(|&k| {
            let value = eval_f(f, &finf, &generate(&spec, k)?)?.total;
            Ok(LimitEnergyRow { k, value, relative_gap: relative_gap(value, half_ball_integral) })
        })
        .collect::<Result<_>>()?;
    let gap_at_k_max = rows.last().map(|r| r.relative_gap).unwrap_or(f64::NAN);
    Ok(LimitEnergyReport { x0: bp.x0, normal: bp.normal, half_ball_integral, rows, gap_at_k_max })
}

fn check_homogeneous(f: &Integrand) -> Result<()> {
    if f.depends_on_x() {
        return Err(Error::PreconditionUnmet("integrand depends on x".into()));
    }
    let (r, c) = f.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..32 {
        let xi = random_matrix(r, c, &mut rng);
        for t in [0.5, 2.0, 10.0] {
            let (a, b) = (f.eval(&[0.0, 0.0], &xi.scale(t)), t * f.eval(&[0.0, 0.0], &xi));
            if (a - b).abs() > 1e-9 * (1.0 + b.abs()) {
                return Err(Error::PreconditionUnmet("integrand is not positively 1-homogeneous".into()));
            }
        }
    }
    Ok(())
}

/// Shrinking copies `x0 + y / n` of a half-ball witness, normalized in `W^{1,1}`.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessSequence {
    pub x0: Point,
    pub normal: Point,
    pub witness: TestField,
}

impl WitnessSequence {
    /// Member `n` on the mapped witness mesh (zero elsewhere in the domain).
    pub fn member(&self, n: usize) -> Result<BvFunction> {
        let s = 1.0 / n as f64;
        let x0 = self.x0;
        let mut mesh = (*self.witness.mesh).clone();
        mesh.map_rigid(|y| [x0[0] + s * y[0], x0[1] + s * y[1]])?;
        let mesh = Arc::new(mesh);
        let m = self.witness.m;
        let v = BvFunction::from_vertex_values(mesh.clone(), m, |i| self.witness.values[i * m..(i + 1) * m].to_vec());
        let l1 = crate::bv::l1_distance(&v, &BvFunction::zeros(mesh, m))?;
        let tv = v.derivative().total_variation(None);
        Ok(v.scale(1.0 / (l1 + tv)))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NecessityRow {
    pub n: usize,
    /// `F(u_n) - F(0)`.
    pub energy_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct NecessityCertificate {
    pub x0: Point,
    /// Size of the violation, minus the half-ball quotient.
    pub eps: f64,
    pub f_zero: f64,
    pub rows: Vec<NecessityRow>,
    pub liminf_estimate: f64,
    /// `F(0) - eps / 2 + tol`.
    pub threshold: f64,
    pub tol: f64,
    pub holds: bool,
    pub sequence: WitnessSequence,
}

pub const DEFAULT_WITNESS_N: [usize; 5] = [4, 8, 16, 32, 64];

/// Turns a half-ball violation into a sequence converging weakly* to zero along
/// which `F` stays below `F(0) - eps / 2`.
#[allow(clippy::too_many_arguments)]
pub fn necessity_witness(
    f: &Integrand,
    finf: &RecessionFn,
    domain: &Domain,
    omega: Arc<Mesh>,
    bp: &BoundaryPoint,
    witness: &TestField,
    quotient: f64,
    n_grid: &[usize],
    tol: f64,
) -> Result<NecessityCertificate> {
    if !(quotient < -tol) {
        return Err(Error::PreconditionUnmet(format!("no boundary violation to transfer (quotient {quotient})")));
    }
    if bp.kind == BoundaryKind::Corner {
        return Err(Error::Unsupported("necessity witness at a corner".into()));
    }
    let eps = -quotient;
    let m = witness.m;
    let f_zero = eval_f(f, finf, &BvFunction::zeros(omega, m))?.total;
    let seq = WitnessSequence { x0: bp.x0, normal: bp.normal, witness: witness.clone() };
    let reach = domain.flat_radius(&bp.x0);
    let ns: Vec<usize> = n_grid.iter().copied().filter(|&n| n > 0 && 1.0 / n as f64 <= reach + 1e-12).collect();
    if ns.is_empty() {
        return Err(Error::PreconditionUnmet("no scale keeps the rescaled witness inside the domain".into()));
    }
    let rows: Vec<NecessityRow> = ns
        .par_iter()
        .map(|&n| {
            let u = seq.member(n)?;
            let inside = eval_f(f, finf, &u)?.total;
            let zero = eval_f(f, finf, &BvFunction::zeros(u.mesh().clone(), m))?.total;
            Ok(NecessityRow { n, energy_gap: inside - zero })
        })
        .collect::<Result<_>>()?;
    let tail = &rows[rows.len() / 2..];
    let liminf_estimate = f_zero + tail.iter().map(|r| r.energy_gap).fold(f64::INFINITY, f64::min);
    let threshold = f_zero - eps / 2.0 + tol;
    let last = f_zero + rows[rows.len() - 1].energy_gap;
    let holds = liminf_estimate <= threshold && last <= threshold;
    if !holds {
        return Err(Error::WitnessNotTransferable { achieved: last - f_zero, required: -eps / 2.0 + tol });
    }
    Ok(NecessityCertificate { x0: bp.x0, eps, f_zero, rows, liminf_estimate, threshold, tol, holds, sequence: seq })
}
