use super::function::{same_mesh, BvFunction};
use super::measure::{CompactSet, MatrixMeasure, Region};
use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::mesh::Mesh;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargeVerdict {
    Tight,
    ChargesK,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChargeReport {
    /// `(delta, sup_n |Du_n|((K)_delta ∩ Omega))`, in the order of the delta grid.
    pub table: Vec<(f64, f64)>,
    pub threshold: f64,
    pub verdict: ChargeVerdict,
}

/// Default threshold below which the smallest-radius entry counts as vanishing.
pub const CHARGE_THRESHOLD: f64 = 1e-3;

/// Tabulates `sup_n |mu_n|((K)_delta)` over a decreasing radius grid.
pub fn does_not_charge(seq: &[MatrixMeasure], k: &CompactSet, deltas: &[f64], threshold: f64) -> Result<ChargeReport> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    if deltas.is_empty() || deltas.iter().any(|d| !(*d > 0.0)) || deltas.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::Config("radius grid must be positive and decreasing".into()));
    }
    let table: Vec<(f64, f64)> = deltas
        .iter()
        .map(|&d| {
            let region = Region::Near { set: k.clone(), delta: d };
            let sup = seq.iter().map(|mu| mu.total_variation(Some(&region))).fold(0.0, f64::max);
            (d, sup)
        })
        .collect();
    let decreasing = table.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);
    let last = table.last().map(|t| t.1).unwrap_or(0.0);
    let verdict = if decreasing && last < threshold { ChargeVerdict::Tight } else { ChargeVerdict::ChargesK };
    Ok(ChargeReport { table, threshold, verdict })
}

pub(crate) fn abs_affine_1d(ga: f64, gb: f64, len: f64) -> f64 {
    if ga * gb >= 0.0 {
        0.5 * (ga.abs() + gb.abs()) * len
    } else {
        0.5 * (ga * ga + gb * gb) / (ga.abs() + gb.abs()) * len
    }
}

/// `int |g|` over a triangle for affine `g` with vertex values `g`.
pub(crate) fn abs_affine_triangle(p: [Point; 3], g: [f64; 3]) -> f64 {
    let part = |sign: f64| -> f64 {
        let mut poly: Vec<(Point, f64)> = Vec::with_capacity(4);
        for i in 0..3 {
            let (pa, ga) = (p[i], sign * g[i]);
            let (pb, gb) = (p[(i + 1) % 3], sign * g[(i + 1) % 3]);
            if ga >= 0.0 {
                poly.push((pa, ga));
            }
            if (ga > 0.0 && gb < 0.0) || (ga < 0.0 && gb > 0.0) {
                let t = ga / (ga - gb);
                poly.push(([pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])], 0.0));
            }
        }
        let mut s = 0.0;
        for i in 1..poly.len().saturating_sub(1) {
            let (a, b, c) = (poly[0], poly[i], poly[i + 1]);
            let area = 0.5 * ((b.0[0] - a.0[0]) * (c.0[1] - a.0[1]) - (c.0[0] - a.0[0]) * (b.0[1] - a.0[1])).abs();
            s += area * (a.1 + b.1 + c.1) / 3.0;
        }
        s
    };
    part(1.0) + part(-1.0)
}

fn span(mesh: &Mesh) -> (f64, f64) {
    let xs = mesh.vertices().iter().map(|p| p[0]);
    (xs.clone().fold(f64::INFINITY, f64::min), xs.fold(f64::NEG_INFINITY, f64::max))
}

/// Euclidean `L^1` distance `int |u - v|`.
///
/// Exact in 1D for any pair of meshes of the same interval. In 2D both functions
/// must share the mesh, unless `v` vanishes identically.
pub fn l1_distance(u: &BvFunction, v: &BvFunction) -> Result<f64> {
    if u.m() != v.m() || u.dim() != v.dim() {
        return Err(Error::DimensionMismatch("L1 distance between functions of different shapes".into()));
    }
    if u.dim() == 1 {
        return l1_distance_1d(u, v);
    }
    let v_is_zero = v.values().iter().all(|&x| x == 0.0);
    if !v_is_zero && !same_mesh(u.mesh(), v.mesh()) {
        return Err(Error::DimensionMismatch("2D L1 distance needs a shared mesh".into()));
    }
    let mesh = u.mesh();
    let m = u.m();
    let mut total = 0.0;
    for c in 0..mesh.num_cells() {
        let vs = mesh.cell(c);
        let p = [mesh.vertices()[vs[0]], mesh.vertices()[vs[1]], mesh.vertices()[vs[2]]];
        if m == 1 {
            let g = [0, 1, 2].map(|k| u.local_value(c, k, 0) - if v_is_zero { 0.0 } else { v.local_value(c, k, 0) });
            total += abs_affine_triangle(p, g);
        } else {
            // Euclidean norm of a vector affine field: degree-5 quadrature on 4 subtriangles
            let diff = |k: usize, i: usize| u.local_value(c, k, i) - if v_is_zero { 0.0 } else { v.local_value(c, k, i) };
            let rule = crate::quadrature::triangle(5);
            let subs = [
                [[1.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.5, 0.0, 0.5]],
                [[0.5, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.5, 0.5]],
                [[0.5, 0.0, 0.5], [0.0, 0.5, 0.5], [0.0, 0.0, 1.0]],
                [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]],
            ];
            for s in subs {
                for (l, w) in &rule {
                    let mut bary = [0.0; 3];
                    for a in 0..3 {
                        for b in 0..3 {
                            bary[b] += l[a] * s[a][b];
                        }
                    }
                    let n2: f64 = (0..m).map(|i| (0..3).map(|k| bary[k] * diff(k, i)).sum::<f64>().powi(2)).sum();
                    total += w * 0.25 * mesh.cell_measure(c) * n2.sqrt();
                }
            }
        }
    }
    Ok(total)
}

fn l1_distance_1d(u: &BvFunction, v: &BvFunction) -> Result<f64> {
    let (a, b) = span(u.mesh());
    let (a2, b2) = span(v.mesh());
    if (a - a2).abs() > 1e-12 || (b - b2).abs() > 1e-12 {
        return Err(Error::DimensionMismatch("1D L1 distance needs the same interval".into()));
    }
    let mut pts: Vec<f64> = Vec::new();
    for w in [u, v] {
        pts.extend(w.mesh().vertices().iter().map(|p| p[0]));
        pts.extend(w.atoms().iter().map(|at| at.location));
    }
    pts.sort_by(|x, y| x.total_cmp(y));
    pts.dedup();
    let m = u.m();
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (l, r) = (w[0], w[1]);
        if r - l <= 0.0 {
            continue;
        }
        let mid = 0.5 * (l + r);
        let piece = |f: &BvFunction| -> (Vec<f64>, Vec<f64>) {
            let c = f.mesh().locate(&[mid, 0.0])[0];
            let val = f.value_in_cell(c, &[mid, 0.0]);
            let g = f.gradient(c);
            let left: Vec<f64> = (0..m).map(|i| val[i] + g.get(i, 0) * (l - mid)).collect();
            let right: Vec<f64> = (0..m).map(|i| val[i] + g.get(i, 0) * (r - mid)).collect();
            (left, right)
        };
        let (ul, ur) = piece(u);
        let (vl, vr) = piece(v);
        if m == 1 {
            total += abs_affine_1d(ul[0] - vl[0], ur[0] - vr[0], r - l);
        } else {
            let f = |t: f64| -> f64 {
                (0..m)
                    .map(|i| {
                        let d0 = ul[i] - vl[i];
                        let d1 = ur[i] - vr[i];
                        (d0 + (d1 - d0) * (t - l) / (r - l)).powi(2)
                    })
                    .sum::<f64>()
                    .sqrt()
            };
            total += crate::quadrature::integrate_1d(f, l, r, 4);
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeakStarVerdict {
    /// `L^1` distances vanish and variations stay bounded.
    WeakStarPlausible,
    NotL1Converging,
    UnboundedVariation,
}

#[derive(Debug, Clone, Serialize)]
pub struct WeakStarReport {
    pub l1_distances: Vec<f64>,
    pub total_variations: Vec<f64>,
    pub sup_total_variation: f64,
    pub threshold: f64,
    pub verdict: WeakStarVerdict,
}

/// Necessary conditions for `u_n -> u` weakly* in BV along a sequence prefix.
pub fn weakstar_diagnostics(seq: &[BvFunction], limit: &BvFunction, threshold: f64) -> Result<WeakStarReport> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let l1: Vec<f64> = seq.iter().map(|u| l1_distance(u, limit)).collect::<Result<_>>()?;
    let tv: Vec<f64> = seq.iter().map(|u| u.derivative().total_variation(None)).collect();
    let sup = tv.iter().cloned().fold(0.0, f64::max);
    let half = seq.len() / 2;
    let head = tv[..half.max(1)].iter().cloned().fold(0.0, f64::max);
    let tail = tv[half..].iter().cloned().fold(0.0, f64::max);
    let last = *l1.last().unwrap();
    let verdict = if last >= threshold {
        WeakStarVerdict::NotL1Converging
    } else if seq.len() > 1 && tail > 2.0 * head + 1e-9 {
        WeakStarVerdict::UnboundedVariation
    } else {
        WeakStarVerdict::WeakStarPlausible
    };
    Ok(WeakStarReport { l1_distances: l1, total_variations: tv, sup_total_variation: sup, threshold, verdict })
}

/// Piecewise-affine cutoff equal to 1 on `(K)_inner`, 0 outside `(K)_outer`,
/// as vertex values `clamp((outer - dist) / (outer - inner), 0, 1)`.
pub fn distance_cutoff(mesh: &Mesh, k: &CompactSet, inner: f64, outer: f64) -> Vec<f64> {
    mesh.vertices().iter().map(|p| ((outer - k.dist(p)) / (outer - inner)).clamp(0.0, 1.0)).collect()
}
