//! Localized neighbourhoods `Omega ∩ B_delta(x0)`.
//!
//! Boundary facets of a patch that lie on the original boundary keep the original
//! tag (free unless the source mesh clamped them); facets cut out by the ball are
//! clamped.

use super::{interval_mesh_from_nodes, refine_uniform, FacetTag, Mesh};
use crate::error::{Error, Result};
use crate::linalg::{dist, dist_to_segment, Point};
use std::collections::HashMap;

#[derive(Debug, Clone, Copy)]
pub struct PatchOptions {
    /// Uniform refinement levels applied to cells touching the ball before the
    /// centroid test (2D only; intervals are clipped exactly).
    pub refine_levels: usize,
}

impl Default for PatchOptions {
    fn default() -> Self {
        PatchOptions { refine_levels: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct Patch {
    pub mesh: Mesh,
    /// Source cell of every patch cell.
    pub parent_cells: Vec<usize>,
    /// `(source cell, child index)` of every patch cell; stable across radii at a fixed
    /// refinement level.
    pub keys: Vec<(usize, usize)>,
}

/// Submesh covering `Omega ∩ B_delta(x0)`.
pub fn local_patch(mesh: &Mesh, x0: &Point, delta: f64, opts: PatchOptions) -> Result<Patch> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::EmptyPatch { x0: *x0, delta });
    }
    if mesh.dim() == 1 {
        patch_1d(mesh, x0, delta)
    } else {
        patch_2d(mesh, x0, delta, opts)
    }
}

fn patch_1d(mesh: &Mesh, x0: &Point, delta: f64) -> Result<Patch> {
    let (lo, hi) = (x0[0] - delta, x0[0] + delta);
    let mut pieces: Vec<(f64, f64, usize)> = Vec::new();
    for c in 0..mesh.num_cells() {
        let vs = mesh.cell(c);
        let (a, b) = (mesh.vertices()[vs[0]][0], mesh.vertices()[vs[1]][0]);
        let (l, r) = (a.max(lo), b.min(hi));
        if r - l > 1e-12 * (b - a) {
            pieces.push((l, r, c));
        }
    }
    if pieces.is_empty() {
        return Err(Error::EmptyPatch { x0: *x0, delta });
    }
    pieces.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut nodes = vec![pieces[0].0];
    nodes.extend(pieces.iter().map(|p| p.1));
    let mut m = interval_mesh_from_nodes(&nodes)?;
    let source_tags: Vec<(f64, FacetTag)> = mesh.boundary_facets().map(|(_, f)| (mesh.vertices()[f.vertices[0]][0], f.tag)).collect();
    let tol = 1e-12 * mesh.h().max(1.0);
    let tags: Vec<(usize, FacetTag)> = m
        .boundary_facets()
        .map(|(fi, f)| {
            let x = m.vertices()[f.vertices[0]][0];
            let tag = source_tags.iter().find(|(y, _)| (x - y).abs() <= tol).map(|(_, t)| *t).unwrap_or(FacetTag::Clamped);
            (fi, tag)
        })
        .collect();
    for (fi, t) in tags {
        m.facets[fi].tag = t;
    }
    let parent_cells: Vec<usize> = pieces.iter().map(|p| p.2).collect();
    let keys = parent_cells.iter().map(|&c| (c, 0)).collect();
    Ok(Patch { mesh: m, parent_cells, keys })
}

fn patch_2d(mesh: &Mesh, x0: &Point, delta: f64, opts: PatchOptions) -> Result<Patch> {
    let touches = |c: usize| -> bool {
        let vs = mesh.cell(c);
        let p: Vec<Point> = vs.iter().map(|&v| mesh.vertices()[v]).collect();
        if mesh.locate(x0).contains(&c) {
            return true;
        }
        (0..3).any(|k| dist_to_segment(x0, &p[k], &p[(k + 1) % 3]) < delta)
    };
    let candidates: Vec<usize> = (0..mesh.num_cells()).filter(|&c| touches(c)).collect();
    let mut verts = mesh.vertices().to_vec();
    let mut cells: Vec<[usize; 3]> = candidates
        .iter()
        .map(|&c| {
            let v = mesh.cell(c);
            [v[0], v[1], v[2]]
        })
        .collect();
    let mut keys: Vec<(usize, usize)> = candidates.iter().map(|&c| (c, 0)).collect();
    for _ in 0..opts.refine_levels {
        let (v, c, parent) = refine_uniform(2, &verts, &cells);
        let mut counter: HashMap<usize, usize> = HashMap::new();
        keys = parent
            .iter()
            .map(|&p| {
                let k = counter.entry(p).or_insert(0);
                let key = (keys[p].0, keys[p].1 * 4 + *k);
                *k += 1;
                key
            })
            .collect();
        verts = v;
        cells = c;
    }
    let keep: Vec<usize> = (0..cells.len())
        .filter(|&i| {
            let c = cells[i];
            let g = [(verts[c[0]][0] + verts[c[1]][0] + verts[c[2]][0]) / 3.0, (verts[c[0]][1] + verts[c[1]][1] + verts[c[2]][1]) / 3.0];
            dist(&g, x0) < delta
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyPatch { x0: *x0, delta });
    }
    let mut remap: HashMap<usize, usize> = HashMap::new();
    let mut new_verts = Vec::new();
    let mut new_cells = Vec::with_capacity(keep.len());
    for &i in &keep {
        let mut c = [0usize; 3];
        for k in 0..3 {
            let v = cells[i][k];
            c[k] = *remap.entry(v).or_insert_with(|| {
                new_verts.push(verts[v]);
                new_verts.len() - 1
            });
        }
        new_cells.push(c);
    }
    let keys: Vec<(usize, usize)> = keep.iter().map(|&i| keys[i]).collect();
    let parent_cells: Vec<usize> = keys.iter().map(|k| k.0).collect();
    let mut m = Mesh::new(2, new_verts, new_cells)?;
    let tol = 1e-9 * mesh.h();
    let tags: Vec<(usize, FacetTag)> = m
        .boundary_facets()
        .map(|(fi, f)| {
            let mid = m.facet_midpoint(fi);
            let parent = parent_cells[f.minus];
            let tag = mesh
                .cell_facets(parent)
                .iter()
                .map(|&pf| &mesh.facets()[pf])
                .find(|pf| {
                    pf.plus.is_none() && {
                        let [a, b] = pf.vertices;
                        dist_to_segment(&mid, &mesh.vertices()[a], &mesh.vertices()[b]) <= tol
                    }
                })
                .map(|pf| pf.tag)
                .unwrap_or(FacetTag::Clamped);
            (fi, tag)
        })
        .collect();
    for (fi, t) in tags {
        m.facets[fi].tag = t;
    }
    Ok(Patch { mesh: m, parent_cells, keys })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, unit_square_mesh, Domain};

    #[test]
    fn interval_patch_at_left_end() {
        let m = build_mesh(&Domain::unit_interval(), 0.1).unwrap();
        let p = local_patch(&m, &[0.0, 0.0], 0.3, PatchOptions::default()).unwrap();
        assert!((p.mesh.total_measure() - 0.3).abs() < 1e-12);
        let mut tags: Vec<(f64, FacetTag)> = p.mesh.boundary_facets().map(|(_, f)| (p.mesh.vertices()[f.vertices[0]][0], f.tag)).collect();
        tags.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(tags[0], (0.0, FacetTag::Free));
        assert!((tags[1].0 - 0.3).abs() < 1e-12 && tags[1].1 == FacetTag::Clamped);
    }

    #[test]
    fn square_patch_is_half_disk() {
        let m = unit_square_mesh(40).unwrap();
        let x0 = [0.0, 0.5];
        let p = local_patch(&m, &x0, 0.2, PatchOptions::default()).unwrap();
        // sampled area of the half disk vs patch area
        let exact = std::f64::consts::PI * 0.04 / 2.0;
        assert!((p.mesh.total_measure() - exact).abs() < 0.05 * exact);
        for (fi, f) in p.mesh.boundary_facets() {
            let mid = p.mesh.facet_midpoint(fi);
            if f.tag == FacetTag::Free {
                assert!(mid[0].abs() < 1e-12);
            } else {
                assert!(mid[0] > 0.0);
                assert!((dist(&mid, &x0) - 0.2).abs() < 2.0 * m.h());
            }
        }
    }

    #[test]
    fn big_radius_gives_whole_mesh() {
        let m = unit_square_mesh(4).unwrap();
        let p = local_patch(&m, &[0.0, 0.5], 10.0, PatchOptions::default()).unwrap();
        assert!((p.mesh.total_measure() - 1.0).abs() < 1e-12);
        assert!(p.mesh.boundary_facets().all(|(_, f)| f.tag == FacetTag::Free));
    }

    #[test]
    fn far_point_is_empty() {
        let m = unit_square_mesh(4).unwrap();
        let r = local_patch(&m, &[5.0, 5.0], 0.1, PatchOptions::default());
        assert!(matches!(r, Err(Error::EmptyPatch { .. })));
    }
}
