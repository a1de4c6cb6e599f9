use super::{rectangle_mesh, refine_uniform, signed_area, Mesh};
use crate::error::{Error, Result};
use crate::linalg::Point;

pub(crate) fn mesh_polygon(vertices: &[Point], h_target: f64) -> Result<Mesh> {
    if let Some((x0, x1, y0, y1)) = axis_aligned_rectangle(vertices) {
        // right triangles with legs dx, dy have diameter sqrt(dx^2 + dy^2)
        let leg = h_target / std::f64::consts::SQRT_2;
        let nx = super::cells_for(x1 - x0, leg);
        let ny = super::cells_for(y1 - y0, leg);
        return rectangle_mesh(x0, x1, y0, y1, nx, ny);
    }
    let mut verts = vertices.to_vec();
    let mut cells = ear_clip(vertices)?;
    for _ in 0..30 {
        let m = Mesh::new(2, verts.clone(), cells.clone())?;
        if m.h() <= h_target {
            return Ok(m);
        }
        let (v, c, _) = refine_uniform(2, &verts, &cells);
        verts = v;
        cells = c;
    }
    Err(Error::InvalidMesh(format!("could not reach h <= {h_target}")))
}

fn axis_aligned_rectangle(v: &[Point]) -> Option<(f64, f64, f64, f64)> {
    if v.len() != 4 {
        return None;
    }
    let xs: Vec<f64> = v.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = v.iter().map(|p| p[1]).collect();
    let (x0, x1) = (xs.iter().cloned().fold(f64::INFINITY, f64::min), xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let (y0, y1) = (ys.iter().cloned().fold(f64::INFINITY, f64::min), ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let corners = [[x0, y0], [x1, y0], [x1, y1], [x0, y1]];
    if corners.iter().all(|c| v.contains(c)) {
        Some((x0, x1, y0, y1))
    } else {
        None
    }
}

/// Ear-clipping triangulation of a simple counter-clockwise polygon.
fn ear_clip(v: &[Point]) -> Result<Vec<[usize; 3]>> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    let mut out = Vec::with_capacity(v.len() - 2);
    while idx.len() > 3 {
        let n = idx.len();
        let mut found = None;
        for k in 0..n {
            let (a, b, c) = (idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]);
            if signed_area(&v[a], &v[b], &v[c]) <= 1e-14 {
                continue;
            }
            let blocked = idx.iter().any(|&p| p != a && p != b && p != c && in_triangle(&v[p], &v[a], &v[b], &v[c]));
            if !blocked {
                found = Some(k);
                break;
            }
        }
        let k = found.ok_or_else(|| Error::InvalidDomain("ear clipping failed; polygon not simple?".into()))?;
        let n = idx.len();
        out.push([idx[(k + n - 1) % n], idx[k], idx[(k + 1) % n]]);
        idx.remove(k);
    }
    out.push([idx[0], idx[1], idx[2]]);
    Ok(out)
}

fn in_triangle(p: &Point, a: &Point, b: &Point, c: &Point) -> bool {
    let d1 = signed_area(a, b, p);
    let d2 = signed_area(b, c, p);
    let d3 = signed_area(c, a, p);
    d1 >= -1e-14 && d2 >= -1e-14 && d3 >= -1e-14
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ear_clip_l_shape() {
        let v = vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [1.0, 1.0], [1.0, 2.0], [0.0, 2.0]];
        let t = ear_clip(&v).unwrap();
        assert_eq!(t.len(), 4);
        let area: f64 = t.iter().map(|c| signed_area(&v[c[0]], &v[c[1]], &v[c[2]])).sum();
        assert!((area - 3.0).abs() < 1e-12);
    }
}
