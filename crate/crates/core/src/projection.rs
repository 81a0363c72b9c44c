//! Euclidean projection onto the parabolic cone `{(z, w) : z² ≤ w·c0}` and
//! the supporting-hyperplane cut it yields.
//!
//! The foot point comes from the real root of a cubic in the Lagrange
//! multiplier, solved by Cardano's formula. [`projection_oracle`] computes
//! the same point by bisection along the boundary and exists for testing.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectionError {
    #[error("leading cubic coefficient is zero")]
    NotCubic,
    #[error("cut requested at a point that is already on the cone")]
    DegenerateCut,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConePoint {
    pub z: f64,
    pub w: f64,
    pub c0: f64,
}

impl ConePoint {
    pub fn new(z: f64, w: f64, c0: f64) -> Self {
        debug_assert!(c0 > 0.0, "c0 must be positive");
        Self { z, w, c0 }
    }

    /// `z² − w·c0`; positive outside the cone.
    pub fn excess(&self) -> f64 {
        self.z * self.z - self.w * self.c0
    }

    pub fn is_inside(&self) -> bool {
        self.excess() <= 0.0
    }

    pub fn dist2(&self, other: &ConePoint) -> f64 {
        (self.z - other.z).powi(2) + (self.w - other.w).powi(2)
    }
}

/// Excess above which a point counts as violating the cone.
pub fn violation_tolerance(c0: f64) -> f64 {
    1e-8 * c0.powi(2).max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CubicRoots {
    One(f64),
    /// Three real roots (with multiplicity), ascending.
    Three([f64; 3]),
}

impl CubicRoots {
    pub fn to_vec(self) -> Vec<f64> {
        match self {
            CubicRoots::One(r) => vec![r],
            CubicRoots::Three(r) => r.to_vec(),
        }
    }
}

/// Real roots of `aλ³ + bλ² + cλ + d`.
///
/// With one real root it is returned alone; when the discriminant
/// `Q³ + R²` is nonpositive all three come from the trigonometric form.
pub fn cardano_real_root(a: f64, b: f64, c: f64, d: f64) -> Result<CubicRoots, ProjectionError> {
    if a == 0.0 {
        return Err(ProjectionError::NotCubic);
    }
    let (b1, c1, d1) = (b / a, c / a, d / a);
    let q = (3.0 * c1 - b1 * b1) / 9.0;
    let r = (9.0 * b1 * c1 - 27.0 * d1 - 2.0 * b1.powi(3)) / 54.0;
    let disc = q.powi(3) + r * r;
    let shift = b1 / 3.0;
    let polish = |x: f64| newton_polish(a, b, c, d, x);

    if disc > 0.0 {
        // Take the cube root of the larger-magnitude term and recover the
        // other from S·T = −Q, which avoids cancellation.
        let s = (r + r.signum() * disc.sqrt()).cbrt();
        let s = if s == 0.0 { (2.0 * r).cbrt() } else { s };
        let t = if s == 0.0 { 0.0 } else { -q / s };
        return Ok(CubicRoots::One(polish(s + t - shift)));
    }
    if q == 0.0 {
        return Ok(CubicRoots::Three([-shift; 3]));
    }
    let m = 2.0 * (-q).sqrt();
    let theta = (r / (-q).powi(3).sqrt()).clamp(-1.0, 1.0).acos();
    let mut roots = [0, 1, 2].map(|k| polish(m * ((theta + 2.0 * PI * k as f64) / 3.0).cos() - shift));
    roots.sort_by(f64::total_cmp);
    Ok(CubicRoots::Three(roots))
}

/// A couple of Newton steps, kept only while they shrink the residual.
fn newton_polish(a: f64, b: f64, c: f64, d: f64, mut x: f64) -> f64 {
    let f = |x: f64| ((a * x + b) * x + c) * x + d;
    let df = |x: f64| (3.0 * a * x + 2.0 * b) * x + c;
    for _ in 0..3 {
        let fx = f(x);
        let slope = df(x);
        if fx == 0.0 || slope == 0.0 {
            break;
        }
        let next = x - fx / slope;
        if !next.is_finite() || f(next).abs() >= fx.abs() {
            break;
        }
        x = next;
    }
    x
}

/// Nearest point of the cone to `p`; points already inside come back unchanged.
pub fn project(p: ConePoint) -> ConePoint {
    if p.is_inside() {
        return p;
    }
    let ConePoint { z, w, c0 } = p;
    if z == 0.0 {
        // Outside with z = 0 means w < 0: the apex is nearest.
        return ConePoint::new(0.0, 0.0, c0);
    }
    let roots = cardano_real_root(
        4.0 * c0 * c0,
        4.0 * c0 * c0 + 4.0 * c0 * w,
        c0 * c0 + 4.0 * c0 * w,
        c0 * w - z * z,
    )
    .expect("c0 > 0 keeps the cubic nondegenerate");
    roots
        .to_vec()
        .into_iter()
        .filter(|&l| 1.0 + 2.0 * l > 0.0)
        .map(|l| ConePoint::new(z / (1.0 + 2.0 * l), w + l * c0, c0))
        .min_by(|x, y| p.dist2(x).total_cmp(&p.dist2(y)))
        .expect("an outside point has a root with 1 + 2λ > 0")
}

/// Projection by bisection on the stationarity condition along the boundary
/// `w = z²/c0`. Slow, simple, and independent of the cubic.
pub fn projection_oracle(p: ConePoint) -> ConePoint {
    if p.is_inside() {
        return p;
    }
    let ConePoint { z: zh, w: wh, c0 } = p;
    let on_boundary = |z: f64| ConePoint::new(z, z * z / c0, c0);
    // Half the derivative of the squared distance to (z, z²/c0).
    let g = |z: f64| 2.0 * z.powi(3) / (c0 * c0) + z * (1.0 - 2.0 * wh / c0) - zh;
    // The foot lies between the apex and ẑ.
    let (lo, hi) = if zh >= 0.0 { (0.0, zh) } else { (zh, 0.0) };
    let mut candidates = vec![on_boundary(lo), on_boundary(hi)];
    const GRID: usize = 256;
    let step = (hi - lo) / GRID as f64;
    for k in 0..GRID {
        let (mut a, mut b) = (lo + step * k as f64, lo + step * (k + 1) as f64);
        let (ga, gb) = (g(a), g(b));
        if ga == 0.0 {
            candidates.push(on_boundary(a));
        }
        if ga.signum() * gb.signum() >= 0.0 {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if g(mid).signum() == ga.signum() {
                a = mid;
            } else {
                b = mid;
            }
        }
        candidates.push(on_boundary(0.5 * (a + b)));
    }
    candidates
        .into_iter()
        .min_by(|x, y| p.dist2(x).total_cmp(&p.dist2(y)))
        .expect("endpoints are always candidates")
}

/// `a_z·z + a_w·w ≤ b` over one cone's `(z, w)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricCut {
    pub a_z: f64,
    pub a_w: f64,
    pub b: f64,
}

impl GeometricCut {
    /// `lhs − b`; positive when `(z, w)` violates the cut.
    pub fn violation(&self, z: f64, w: f64) -> f64 {
        self.a_z * z + self.a_w * w - self.b
    }
}

/// Supporting hyperplane at the foot `bar` separating `hat` from the cone.
pub fn geometric_cut(hat: ConePoint, bar: ConePoint) -> Result<GeometricCut, ProjectionError> {
    let a_z = hat.z - bar.z;
    let a_w = hat.w - bar.w;
    if a_z == 0.0 && a_w == 0.0 {
        return Err(ProjectionError::DegenerateCut);
    }
    Ok(GeometricCut {
        a_z,
        a_w,
        b: a_z * bar.z + a_w * bar.w,
    })
}
