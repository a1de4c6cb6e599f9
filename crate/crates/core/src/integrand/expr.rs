use crate::linalg::{Mat, Point};
use serde::{Deserialize, Serialize};

/// Expression tree for integrands `f(x, xi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Expr {
    /// `m : xi`.
    Linear {
        m: Mat,
    },
    /// `|xi|` (Frobenius).
    Norm,
    /// `sqrt(1 + |xi|^2)`.
    Area,
    /// `|xi| + sin |xi|`.
    NormSin,
    Const {
        value: f64,
    },
    Scale {
        factor: f64,
        inner: Box<Expr>,
    },
    /// `inner(xi + shift)`.
    Shift {
        shift: Mat,
        inner: Box<Expr>,
    },
    Sum {
        terms: Vec<Expr>,
    },
    /// `(c0 + c1 . x) inner(xi)`.
    Modulate {
        c0: f64,
        c1: Point,
        inner: Box<Expr>,
    },
}

/// Evaluation mode: the integrand itself or its recession function, with an optional
/// smoothing of the norm kink at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub recession: bool,
    pub smoothing: f64,
}

impl Mode {
    pub const EXACT: Mode = Mode { recession: false, smoothing: 0.0 };
    pub const RECESSION: Mode = Mode { recession: true, smoothing: 0.0 };
}

/// `(smoothed |xi|, d/dxi)`; exact at `delta = 0` with subgradient 0 at the origin.
fn smooth_norm(xi: &Mat, delta: f64) -> (f64, Mat) {
    let n2 = xi.dot(xi);
    if delta > 0.0 {
        let r = (n2 + delta * delta).sqrt();
        (r - delta, xi.scale(1.0 / r))
    } else {
        let r = n2.sqrt();
        if r == 0.0 {
            (0.0, Mat::zeros(xi.rows(), xi.cols()))
        } else {
            (r, xi.scale(1.0 / r))
        }
    }
}

impl Expr {
    pub fn value(&self, x: &Point, xi: &Mat, mode: Mode) -> f64 {
        match self {
            Expr::Linear { m } => m.dot(xi),
            Expr::Norm => {
                if mode.smoothing > 0.0 {
                    smooth_norm(xi, mode.smoothing).0
                } else {
                    xi.norm()
                }
            }
            Expr::Area => {
                if mode.recession {
                    smooth_norm(xi, mode.smoothing).0
                } else {
                    (1.0 + xi.dot(xi)).sqrt()
                }
            }
            Expr::NormSin => {
                let s = smooth_norm(xi, mode.smoothing).0;
                if mode.recession {
                    s
                } else {
                    s + s.sin()
                }
            }
            Expr::Const { value } => {
                if mode.recession {
                    0.0
                } else {
                    *value
                }
            }
            Expr::Scale { factor, inner } => factor * inner.value(x, xi, mode),
            Expr::Shift { shift, inner } => {
                if mode.recession {
                    inner.value(x, xi, mode)
                } else {
                    inner.value(x, &(*xi + *shift), mode)
                }
            }
            Expr::Sum { terms } => terms.iter().map(|t| t.value(x, xi, mode)).sum(),
            Expr::Modulate { c0, c1, inner } => (c0 + c1[0] * x[0] + c1[1] * x[1]) * inner.value(x, xi, mode),
        }
    }

    /// Value and gradient in `xi`.
    pub fn value_grad(&self, x: &Point, xi: &Mat, mode: Mode) -> (f64, Mat) {
        let zero = || Mat::zeros(xi.rows(), xi.cols());
        match self {
            Expr::Linear { m } => (m.dot(xi), *m),
            Expr::Norm => smooth_norm(xi, mode.smoothing),
            Expr::Area => {
                if mode.recession {
                    smooth_norm(xi, mode.smoothing)
                } else {
                    let r = (1.0 + xi.dot(xi)).sqrt();
                    (r, xi.scale(1.0 / r))
                }
            }
            Expr::NormSin => {
                let (s, g) = smooth_norm(xi, mode.smoothing);
                if mode.recession {
                    (s, g)
                } else {
                    (s + s.sin(), g.scale(1.0 + s.cos()))
                }
            }
            Expr::Const { value } => (if mode.recession { 0.0 } else { *value }, zero()),
            Expr::Scale { factor, inner } => {
                let (v, g) = inner.value_grad(x, xi, mode);
                (factor * v, g.scale(*factor))
            }
            Expr::Shift { shift, inner } => {
                if mode.recession {
                    inner.value_grad(x, xi, mode)
                } else {
                    inner.value_grad(x, &(*xi + *shift), mode)
                }
            }
            Expr::Sum { terms } => {
                let mut v = 0.0;
                let mut g = zero();
                for t in terms {
                    let (tv, tg) = t.value_grad(x, xi, mode);
                    v += tv;
                    g += tg;
                }
                (v, g)
            }
            Expr::Modulate { c0, c1, inner } => {
                let c = c0 + c1[0] * x[0] + c1[1] * x[1];
                let (v, g) = inner.value_grad(x, xi, mode);
                (c * v, g.scale(c))
            }
        }
    }

    /// Constant `C` with `|f(x, xi)| <= C (1 + |xi|)` for `|x| <= radius`.
    pub fn growth(&self, radius: f64) -> f64 {
        match self {
            Expr::Linear { m } => m.norm(),
            Expr::Norm | Expr::Area | Expr::NormSin => 1.0,
            Expr::Const { value } => value.abs(),
            Expr::Scale { factor, inner } => factor.abs() * inner.growth(radius),
            Expr::Shift { shift, inner } => inner.growth(radius) * (1.0 + shift.norm()),
            Expr::Sum { terms } => terms.iter().map(|t| t.growth(radius)).sum(),
            Expr::Modulate { c0, c1, inner } => (c0.abs() + (c1[0] * c1[0] + c1[1] * c1[1]).sqrt() * radius) * inner.growth(radius),
        }
    }

    /// Lipschitz constant in `xi`, uniformly in `x` with `|x| <= radius`.
    pub fn lipschitz(&self, radius: f64) -> f64 {
        match self {
            Expr::Linear { m } => m.norm(),
            Expr::Norm | Expr::Area => 1.0,
            Expr::NormSin => 2.0,
            Expr::Const { .. } => 0.0,
            Expr::Scale { factor, inner } => factor.abs() * inner.lipschitz(radius),
            Expr::Shift { inner, .. } => inner.lipschitz(radius),
            Expr::Sum { terms } => terms.iter().map(|t| t.lipschitz(radius)).sum(),
            Expr::Modulate { c0, c1, inner } => (c0.abs() + (c1[0] * c1[0] + c1[1] * c1[1]).sqrt() * radius) * inner.lipschitz(radius),
        }
    }

    pub fn depends_on_x(&self) -> bool {
        match self {
            Expr::Modulate { c1, inner, .. } => c1 != &[0.0, 0.0] || inner.depends_on_x(),
            Expr::Scale { inner, .. } | Expr::Shift { inner, .. } => inner.depends_on_x(),
            Expr::Sum { terms } => terms.iter().any(|t| t.depends_on_x()),
            _ => false,
        }
    }

    /// `sup_{x, |xi| >= t} |f - f^inf| / (1 + |xi|)` where it has a closed form
    /// (an upper bound for sums and modulated terms).
    pub fn mu(&self, t: f64, radius: f64) -> Option<f64> {
        match self {
            Expr::Linear { .. } | Expr::Norm => Some(0.0),
            // (sqrt(1+s^2) - s) / (1+s) is decreasing in s
            Expr::Area => Some(1.0 / (((1.0 + t * t).sqrt() + t) * (1.0 + t))),
            Expr::NormSin => {
                // |sin s| / (1+s) on [t, inf): the sup is attained on [t, t + pi]
                let k = 4096;
                let best = (0..=k)
                    .map(|i| {
                        let s = t + std::f64::consts::PI * i as f64 / k as f64;
                        s.sin().abs() / (1.0 + s)
                    })
                    .fold(0.0, f64::max);
                Some(best)
            }
            Expr::Const { value } => Some(value.abs() / (1.0 + t)),
            Expr::Scale { factor, inner } => inner.mu(t, radius).map(|m| factor.abs() * m),
            Expr::Shift { .. } => None,
            Expr::Sum { terms } => terms.iter().map(|e| e.mu(t, radius)).sum(),
            Expr::Modulate { c0, c1, inner } => {
                let c = c0.abs() + (c1[0] * c1[0] + c1[1] * c1[1]).sqrt() * radius;
                inner.mu(t, radius).map(|m| c * m)
            }
        }
    }

    /// True when `mu` is the exact modulus rather than an upper bound.
    pub fn mu_is_exact(&self) -> bool {
        match self {
            Expr::Linear { .. } | Expr::Norm | Expr::Area | Expr::NormSin | Expr::Const { .. } => true,
            Expr::Scale { inner, .. } => inner.mu_is_exact(),
            Expr::Modulate { c1, inner, .. } => c1 == &[0.0, 0.0] && inner.mu_is_exact(),
            _ => false,
        }
    }
}
