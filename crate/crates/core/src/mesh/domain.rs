use crate::error::{Error, Result};
use crate::linalg::{dist, dist_to_segment, dot2, norm2, Point};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A bounded open domain in one or two dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// The open interval `(a, b)`.
    Interval { a: f64, b: f64 },
    /// Interior of a simple, counter-clockwise vertex loop (last vertex not repeated).
    Polygon { vertices: Vec<Point> },
    /// `{ y in B_1(0) : y . normal < 0 }`; `normal` has length 1 (1D) or 2 (2D).
    HalfBall { normal: Vec<f64> },
}

/// How the boundary looks near a boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// On a straight piece of boundary with a single outward normal.
    Flat,
    /// A polygon corner (no single normal); the stored normal is the bisector.
    Corner,
    /// On a curved part of the boundary (the spherical part of a half-ball).
    Curved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub x0: Point,
    /// Unit outer normal at `x0`.
    pub normal: Point,
    pub kind: BoundaryKind,
}

impl Domain {
    pub fn unit_interval() -> Domain {
        Domain::Interval { a: 0.0, b: 1.0 }
    }

    pub fn unit_square() -> Domain {
        Domain::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]] }
    }

    pub fn half_ball(normal: &[f64]) -> Domain {
        Domain::HalfBall { normal: normal.to_vec() }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Polygon { .. } => 2,
            Domain::HalfBall { normal } => normal.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Domain::Interval { a, b } => {
                if !(a < b) || !a.is_finite() || !b.is_finite() {
                    return Err(Error::InvalidDomain(format!("interval needs a < b, got [{a}, {b}]")));
                }
            }
            Domain::Polygon { vertices } => {
                if vertices.len() < 3 {
                    return Err(Error::InvalidDomain("polygon needs at least 3 vertices".into()));
                }
                if polygon_signed_area(vertices) <= 0.0 {
                    return Err(Error::InvalidDomain("polygon must be positively oriented".into()));
                }
                let n = vertices.len();
                for i in 0..n {
                    for j in i + 1..n {
                        // skip adjacent edges
                        if j == i + 1 || (i == 0 && j == n - 1) {
                            continue;
                        }
                        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                        let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                        if segments_intersect(&a, &b, &c, &d) {
                            return Err(Error::InvalidDomain(format!("polygon edges {i} and {j} intersect")));
                        }
                    }
                }
            }
            Domain::HalfBall { normal } => {
                if !(1..=2).contains(&normal.len()) {
                    return Err(Error::InvalidDomain("half-ball normal must have 1 or 2 components".into()));
                }
                let len = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
                if (len - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidDomain(format!("half-ball normal must be a unit vector, |nu| = {len}")));
                }
            }
        }
        Ok(())
    }

    /// Lebesgue measure of the exact domain.
    pub fn measure(&self) -> f64 {
        match self {
            Domain::Interval { a, b } => b - a,
            Domain::Polygon { vertices } => polygon_signed_area(vertices),
            Domain::HalfBall { normal } => {
                if normal.len() == 1 {
                    1.0
                } else {
                    PI / 2.0
                }
            }
        }
    }

    pub(crate) fn estimated_cells(&self, h: f64) -> usize {
        let est = match self {
            Domain::Interval { a, b } => (b - a) / h,
            _ if self.dim() == 1 => 1.0 / h,
            _ => 4.0 * self.measure() / (h * h),
        };
        if est.is_finite() {
            est.ceil() as usize
        } else {
            usize::MAX
        }
    }

    fn normal_point(normal: &[f64]) -> Point {
        if normal.len() == 1 {
            [normal[0], 0.0]
        } else {
            [normal[0], normal[1]]
        }
    }

    /// Membership in the closure of the domain (tolerance 1e-12).
    pub fn contains(&self, p: &Point) -> bool {
        let tol = 1e-12;
        match self {
            Domain::Interval { a, b } => p[0] >= a - tol && p[0] <= b + tol,
            Domain::Polygon { vertices } => point_in_polygon(p, vertices) || self.dist_to_boundary(p) <= tol,
            Domain::HalfBall { normal } => {
                let nu = Self::normal_point(normal);
                norm2(p) <= 1.0 + tol && dot2(p, &nu) <= tol
            }
        }
    }

    /// Distance from `p` to the topological boundary.
    pub fn dist_to_boundary(&self, p: &Point) -> f64 {
        match self {
            Domain::Interval { a, b } => (p[0] - a).abs().min((p[0] - b).abs()),
            Domain::Polygon { vertices } => {
                let n = vertices.len();
                (0..n).map(|i| dist_to_segment(p, &vertices[i], &vertices[(i + 1) % n])).fold(f64::INFINITY, f64::min)
            }
            Domain::HalfBall { normal } => {
                let nu = Self::normal_point(normal);
                if normal.len() == 1 {
                    let y = p[0] * nu[0];
                    return (y).abs().min((y + 1.0).abs());
                }
                let flat_a = [-nu[1], nu[0]];
                let flat_b = [nu[1], -nu[0]];
                let d_flat = dist_to_segment(p, &flat_a, &flat_b);
                let r = norm2(p);
                let d_arc = if dot2(p, &nu) <= 0.0 || r == 0.0 { (r - 1.0).abs() } else { dist(p, &flat_a).min(dist(p, &flat_b)) };
                d_flat.min(d_arc)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Interval { a, b } => b - a,
            Domain::Polygon { vertices } => {
                let mut d: f64 = 0.0;
                for a in vertices {
                    for b in vertices {
                        d = d.max(dist(a, b));
                    }
                }
                d
            }
            Domain::HalfBall { normal } => {
                if normal.len() == 1 {
                    1.0
                } else {
                    2.0
                }
            }
        }
    }

    /// Largest `|x|` over the closure of the domain.
    pub fn radius(&self) -> f64 {
        match self {
            Domain::Interval { a, b } => a.abs().max(b.abs()),
            Domain::Polygon { vertices } => vertices.iter().map(norm2).fold(0.0, f64::max),
            Domain::HalfBall { .. } => 1.0,
        }
    }

    /// Classifies `x0` as a boundary point and computes its outer normal.
    pub fn boundary_point(&self, x0: &Point) -> Result<BoundaryPoint> {
        let tol = 1e-9 * self.diameter().max(1.0);
        match self {
            Domain::Interval { a, b } => {
                if (x0[0] - a).abs() <= tol {
                    Ok(BoundaryPoint { x0: [*a, 0.0], normal: [-1.0, 0.0], kind: BoundaryKind::Flat })
                } else if (x0[0] - b).abs() <= tol {
                    Ok(BoundaryPoint { x0: [*b, 0.0], normal: [1.0, 0.0], kind: BoundaryKind::Flat })
                } else {
                    Err(Error::NotOnBoundary(*x0))
                }
            }
            Domain::Polygon { vertices } => {
                let n = vertices.len();
                let on: Vec<usize> = (0..n).filter(|&i| dist_to_segment(x0, &vertices[i], &vertices[(i + 1) % n]) <= tol).collect();
                let edge_normal = |i: usize| {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    let len = dist(&a, &b);
                    [(b[1] - a[1]) / len, -(b[0] - a[0]) / len]
                };
                match on.len() {
                    0 => Err(Error::NotOnBoundary(*x0)),
                    1 => Ok(BoundaryPoint { x0: *x0, normal: edge_normal(on[0]), kind: BoundaryKind::Flat }),
                    _ => {
                        let (n1, n2) = (edge_normal(on[0]), edge_normal(on[1]));
                        if dot2(&n1, &n2) > 1.0 - 1e-12 {
                            Ok(BoundaryPoint { x0: *x0, normal: n1, kind: BoundaryKind::Flat })
                        } else {
                            let s = [n1[0] + n2[0], n1[1] + n2[1]];
                            let l = norm2(&s).max(1e-300);
                            Ok(BoundaryPoint { x0: *x0, normal: [s[0] / l, s[1] / l], kind: BoundaryKind::Corner })
                        }
                    }
                }
            }
            Domain::HalfBall { normal } => {
                let nu = Self::normal_point(normal);
                if normal.len() == 1 {
                    let y = x0[0];
                    if y.abs() <= tol {
                        return Ok(BoundaryPoint { x0: [0.0, 0.0], normal: nu, kind: BoundaryKind::Flat });
                    }
                    if (y + nu[0]).abs() <= tol {
                        return Ok(BoundaryPoint { x0: *x0, normal: [-nu[0], 0.0], kind: BoundaryKind::Flat });
                    }
                    return Err(Error::NotOnBoundary(*x0));
                }
                let r = norm2(x0);
                let on_flat = dot2(x0, &nu).abs() <= tol && r <= 1.0 + tol;
                let on_arc = (r - 1.0).abs() <= tol && dot2(x0, &nu) <= tol;
                match (on_flat, on_arc) {
                    (true, true) => {
                        let s = [nu[0] + x0[0], nu[1] + x0[1]];
                        let l = norm2(&s);
                        Ok(BoundaryPoint { x0: *x0, normal: [s[0] / l, s[1] / l], kind: BoundaryKind::Corner })
                    }
                    (true, false) => Ok(BoundaryPoint { x0: *x0, normal: nu, kind: BoundaryKind::Flat }),
                    (false, true) => Ok(BoundaryPoint { x0: *x0, normal: [x0[0] / r, x0[1] / r], kind: BoundaryKind::Curved }),
                    _ => Err(Error::NotOnBoundary(*x0)),
                }
            }
        }
    }

    /// Distance from `x0` to the nearest point where the boundary stops being flat
    /// (a corner or the start of a curved piece).
    pub fn flat_radius(&self, x0: &Point) -> f64 {
        match self {
            // the other endpoint is the only other boundary piece
            Domain::Interval { a, b } => b - a,
            Domain::Polygon { vertices } => {
                let n = vertices.len();
                let mut r = f64::INFINITY;
                for i in 0..n {
                    let prev = vertices[(i + n - 1) % n];
                    let next = vertices[(i + 1) % n];
                    let v = vertices[i];
                    let collinear = super::signed_area(&prev, &v, &next).abs() < 1e-14;
                    if !collinear {
                        r = r.min(dist(x0, &v));
                    }
                }
                r
            }
            Domain::HalfBall { normal } => {
                if normal.len() == 1 {
                    1.0
                } else {
                    1.0 - norm2(x0)
                }
            }
        }
    }

    /// Boundary sample points: edge midpoints for polygons, both endpoints for intervals,
    /// the flat-facet center for half-balls.
    pub fn default_boundary_points(&self) -> Vec<Point> {
        match self {
            Domain::Interval { a, b } => vec![[*a, 0.0], [*b, 0.0]],
            Domain::Polygon { vertices } => {
                let n = vertices.len();
                (0..n)
                    .map(|i| {
                        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                        [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]
                    })
                    .collect()
            }
            Domain::HalfBall { .. } => vec![[0.0, 0.0]],
        }
    }
}

pub(crate) fn polygon_signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
}

pub(crate) fn point_in_polygon(p: &Point, v: &[Point]) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0];
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn orient(a: &Point, b: &Point, c: &Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_intersect(a: &Point, b: &Point, c: &Point, d: &Point) -> bool {
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |p: &Point, q: &Point, r: &Point| {
        orient(p, q, r).abs() < 1e-14
            && r[0] >= p[0].min(q[0])
            && r[0] <= p[0].max(q[0])
            && r[1] >= p[1].min(q[1])
            && r[1] <= p[1].max(q[1])
    };
    on(c, d, a) || on(c, d, b) || on(a, b, c) || on(a, b, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Domain::Interval { a: 1.0, b: 0.0 }.validate().is_err());
        assert!(Domain::Polygon { vertices: vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]] }.validate().is_err());
        let bowtie = Domain::Polygon { vertices: vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]] };
        assert!(bowtie.validate().is_err());
        assert!(Domain::half_ball(&[0.6, 0.6]).validate().is_err());
        assert!(Domain::half_ball(&[0.6, 0.8]).validate().is_ok());
        assert!(Domain::unit_square().validate().is_ok());
    }

    #[test]
    fn boundary_points_of_square() {
        let d = Domain::unit_square();
        let b = d.boundary_point(&[0.0, 0.5]).unwrap();
        assert_eq!(b.kind, BoundaryKind::Flat);
        assert_eq!(b.normal, [-1.0, 0.0]);
        let c = d.boundary_point(&[1.0, 1.0]).unwrap();
        assert_eq!(c.kind, BoundaryKind::Corner);
        assert!(d.boundary_point(&[0.5, 0.5]).is_err());
    }

    #[test]
    fn boundary_points_of_half_ball() {
        let d = Domain::half_ball(&[1.0, 0.0]);
        assert_eq!(d.boundary_point(&[0.0, 0.3]).unwrap().kind, BoundaryKind::Flat);
        let arc = d.boundary_point(&[-1.0, 0.0]).unwrap();
        assert_eq!(arc.kind, BoundaryKind::Curved);
        assert_eq!(arc.normal, [-1.0, 0.0]);
        assert_eq!(d.boundary_point(&[0.0, 1.0]).unwrap().kind, BoundaryKind::Corner);
    }

    #[test]
    fn interval_boundary_normals() {
        let d = Domain::unit_interval();
        assert_eq!(d.boundary_point(&[0.0, 0.0]).unwrap().normal, [-1.0, 0.0]);
        assert_eq!(d.boundary_point(&[1.0, 0.0]).unwrap().normal, [1.0, 0.0]);
    }
}
