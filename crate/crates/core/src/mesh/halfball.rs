//! Meshes of the canonical half-ball `D_nu`.
//!
//! Built in the frame `nu = e_1` from concentric half-rings joined by a merge
//! triangulation, then rotated. Ring end points sit exactly on the flat facet, so
//! no cell straddles it. The spherical part is clamped, the flat part free.

use super::{interval_mesh, FacetTag, Mesh};
use crate::error::{Error, Result};
use crate::linalg::{norm2, rotate, rotation_to, Point};
use std::f64::consts::PI;

pub(crate) fn mesh_half_ball(normal: &[f64], h_target: f64) -> Result<Mesh> {
    if normal.len() == 1 {
        let n = super::cells_for(1.0, h_target);
        let mut m = if normal[0] > 0.0 { interval_mesh(-1.0, 0.0, n)? } else { interval_mesh(0.0, 1.0, n)? };
        m.tag_boundary(|m, f| m.vertices()[m.facets()[f].vertices[0]][0].abs() > 0.5);
        return Ok(m);
    }
    let nu: Point = [normal[0], normal[1]];
    let mut spacing = h_target / 1.5;
    for _ in 0..20 {
        let mut m = canonical(spacing)?;
        if m.h() <= h_target {
            let r = rotation_to(&nu);
            m.map_rigid(|p| {
                let mut q = rotate(&r, p);
                // points on the flat facet stay exactly on it
                if p[0] == 0.0 {
                    q = [-nu[1] * p[1], nu[0] * p[1]];
                }
                q
            })?;
            return Ok(m);
        }
        spacing *= 0.9;
    }
    Err(Error::InvalidMesh(format!("could not mesh half-ball with h <= {h_target}")))
}

fn canonical(spacing: f64) -> Result<Mesh> {
    let rings = (1.0 / spacing).ceil() as usize;
    let mut vertices: Vec<Point> = vec![[0.0, 0.0]];
    // ring k: indices and angles
    let mut ring_ids: Vec<Vec<usize>> = Vec::with_capacity(rings);
    let mut ring_angles: Vec<Vec<f64>> = Vec::with_capacity(rings);
    for k in 1..=rings {
        let r = k as f64 / rings as f64;
        let segs = ((PI * r / spacing).ceil() as usize).max(2);
        let mut ids = Vec::with_capacity(segs + 1);
        let mut angles = Vec::with_capacity(segs + 1);
        for i in 0..=segs {
            let t = i as f64 / segs as f64;
            let theta = PI / 2.0 + PI * t;
            let p = if i == 0 {
                [0.0, r]
            } else if i == segs {
                [0.0, -r]
            } else {
                [r * theta.cos(), r * theta.sin()]
            };
            ids.push(vertices.len());
            vertices.push(p);
            angles.push(t);
        }
        ring_ids.push(ids);
        ring_angles.push(angles);
    }
    let mut cells: Vec<[usize; 3]> = Vec::new();
    for w in ring_ids[0].windows(2) {
        cells.push([0, w[0], w[1]]);
    }
    for k in 0..rings - 1 {
        let (ia, aa) = (&ring_ids[k], &ring_angles[k]);
        let (ib, ab) = (&ring_ids[k + 1], &ring_angles[k + 1]);
        let (mut i, mut j) = (0usize, 0usize);
        while i + 1 < ia.len() || j + 1 < ib.len() {
            let advance_inner = if i + 1 >= ia.len() {
                false
            } else if j + 1 >= ib.len() {
                true
            } else {
                aa[i + 1] <= ab[j + 1]
            };
            if advance_inner {
                cells.push([ia[i], ib[j], ia[i + 1]]);
                i += 1;
            } else {
                cells.push([ia[i], ib[j], ib[j + 1]]);
                j += 1;
            }
        }
    }
    let mut m = Mesh::new(2, vertices, cells)?;
    m.tag_boundary(|m, f| {
        let mid = m.facet_midpoint(f);
        // flat facets have midpoint on y_1 = 0; arc chords sit at radius ~ 1
        mid[0] != 0.0 && norm2(&mid) > 0.5
    });
    debug_assert!(m.facets().iter().all(|f| f.tag != FacetTag::Interior || f.plus.is_some()));
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot2;
    use crate::mesh::{build_mesh, Domain};

    #[test]
    fn flat_facet_on_hyperplane() {
        let m = build_mesh(&Domain::half_ball(&[1.0, 0.0]), 0.5).unwrap();
        assert!(m.h() <= 0.5);
        for (fi, f) in m.boundary_facets() {
            if f.tag == FacetTag::Free {
                for v in f.vertices {
                    assert_eq!(m.vertices()[v][0], 0.0);
                }
                assert!((f.normal[0] - 1.0).abs() < 1e-12, "facet {fi} normal {:?}", f.normal);
            } else {
                for v in f.vertices {
                    assert!((norm2(&m.vertices()[v]) - 1.0).abs() < 1e-12);
                }
            }
        }
        // no cell straddles the flat facet
        for c in 0..m.num_cells() {
            for &v in m.cell(c) {
                assert!(m.vertices()[v][0] <= 0.0);
            }
        }
    }

    #[test]
    fn rotated_mesh_matches_normal() {
        let nu = [0.6, -0.8];
        let m = build_mesh(&Domain::half_ball(&nu), 0.2).unwrap();
        assert!(m.h() <= 0.2 + 1e-12);
        for (_, f) in m.boundary_facets() {
            if f.tag == FacetTag::Free {
                assert!((f.normal[0] - nu[0]).abs() < 1e-12 && (f.normal[1] - nu[1]).abs() < 1e-12);
            }
        }
        // reflection across the flat facet lands in the complementary half-ball
        for p in m.vertices() {
            let s = dot2(p, &nu);
            let q = [p[0] - 2.0 * s * nu[0], p[1] - 2.0 * s * nu[1]];
            assert!(dot2(&q, &nu) >= -1e-12);
            assert!(norm2(&q) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn area_within_chord_error() {
        for h in [0.3, 0.1, 0.05] {
            let m = build_mesh(&Domain::half_ball(&[1.0, 0.0]), h).unwrap();
            let err = (m.total_measure() - PI / 2.0).abs();
            assert!(err <= PI * h * h, "h {h}: area error {err}");
        }
    }

    #[test]
    fn one_dimensional_half_ball() {
        let m = build_mesh(&Domain::half_ball(&[-1.0]), 0.25).unwrap();
        assert_eq!(m.num_cells(), 4);
        assert_eq!(m.clamped_vertices().len(), 1);
        let c = m.clamped_vertices()[0];
        assert_eq!(m.vertices()[c][0], 1.0);
    }
}
