//! Gauss rules on the reference interval `[0, 1]` and the reference triangle.
//!
//! Weights are normalized to sum to one, so a rule integrates the cell *average*;
//! multiply by the cell measure to get the integral.

/// Gauss-Legendre rule exact for polynomials of degree `degree` on `[0, 1]`.
pub fn interval(degree: usize) -> Vec<(f64, f64)> {
    let npts = degree / 2 + 1;
    match npts {
        1 => vec![(0.5, 1.0)],
        2 => {
            let d = 0.5 / 3f64.sqrt();
            vec![(0.5 - d, 0.5), (0.5 + d, 0.5)]
        }
        3 => {
            let d = 0.5 * (0.6f64).sqrt();
            vec![(0.5 - d, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + d, 5.0 / 18.0)]
        }
        4 => {
            let a = (3.0 / 7.0 - 2.0 / 7.0 * (1.2f64).sqrt()).sqrt();
            let b = (3.0 / 7.0 + 2.0 / 7.0 * (1.2f64).sqrt()).sqrt();
            let wa = (18.0 + 30f64.sqrt()) / 36.0;
            let wb = (18.0 - 30f64.sqrt()) / 36.0;
            vec![(0.5 - 0.5 * b, 0.5 * wb), (0.5 - 0.5 * a, 0.5 * wa), (0.5 + 0.5 * a, 0.5 * wa), (0.5 + 0.5 * b, 0.5 * wb)]
        }
        _ => {
            let a = (5.0 - 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
            let b = (5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
            let wa = (322.0 + 13.0 * 70f64.sqrt()) / 900.0;
            let wb = (322.0 - 13.0 * 70f64.sqrt()) / 900.0;
            vec![
                (0.5 - 0.5 * b, 0.5 * wb),
                (0.5 - 0.5 * a, 0.5 * wa),
                (0.5, 0.5 * 128.0 / 225.0),
                (0.5 + 0.5 * a, 0.5 * wa),
                (0.5 + 0.5 * b, 0.5 * wb),
            ]
        }
    }
}

/// Symmetric triangle rule in barycentric coordinates, exact to `degree` (capped at 5).
pub fn triangle(degree: usize) -> Vec<([f64; 3], f64)> {
    match degree {
        0 | 1 => vec![([1.0 / 3.0; 3], 1.0)],
        2 => {
            let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
            vec![([a, b, b], 1.0 / 3.0), ([b, a, b], 1.0 / 3.0), ([b, b, a], 1.0 / 3.0)]
        }
        _ => {
            let (a1, b1, w1) = (0.059_715_871_789_770, 0.470_142_064_105_115, 0.132_394_152_788_506);
            let (a2, b2, w2) = (0.797_426_985_353_087, 0.101_286_507_323_456, 0.125_939_180_544_827);
            vec![
                ([1.0 / 3.0; 3], 0.225),
                ([a1, b1, b1], w1),
                ([b1, a1, b1], w1),
                ([b1, b1, a1], w1),
                ([a2, b2, b2], w2),
                ([b2, a2, b2], w2),
                ([b2, b2, a2], w2),
            ]
        }
    }
}

/// Composite Gauss-Legendre integral of `f` over `[a, b]` with `panels` panels.
pub fn integrate_1d(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let rule = interval(9);
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let x0 = a + p as f64 * h;
        for (t, w) in &rule {
            s += w * f(x0 + t * h);
        }
    }
    s * h
}
