//! Image ellipses and their 3x3 point-conic matrices.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Mat3, SymMat3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseObservation {
    pub center: [f64; 2],
    /// `(alpha, beta)` with `alpha >= beta > 0`.
    pub semi_axes: [f64; 2],
    /// Direction of the major axis, in `[0, pi)`.
    pub angle: f64,
}

impl EllipseObservation {
    /// Sorts the axes (rotating the angle when they are swapped) and wraps the angle.
    pub fn new(center: [f64; 2], semi_axes: [f64; 2], angle: f64) -> Result<Self> {
        let [mut a, mut b] = semi_axes;
        let mut angle = angle;
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::DegenerateEllipse);
        }
        if !center.iter().all(|c| c.is_finite()) || !angle.is_finite() {
            return Err(Error::InvalidInput("non-finite ellipse parameter".into()));
        }
        if b > a {
            std::mem::swap(&mut a, &mut b);
            angle += 0.5 * PI;
        }
        Ok(Self {
            center,
            semi_axes: [a, b],
            angle: wrap_angle(angle),
        })
    }

    /// `(p - c)^T M (p - c) = 1` as a homogeneous 3x3 matrix.
    pub fn to_conic(&self) -> Mat3 {
        let m = self.shape_matrix();
        let [cx, cy] = self.center;
        let mc = [m[0] * cx + m[1] * cy, m[1] * cx + m[2] * cy];
        let k = cx * mc[0] + cy * mc[1] - 1.0;
        Mat3::new(m[0], m[1], -mc[0], m[1], m[2], -mc[1], -mc[0], -mc[1], k)
    }

    /// Upper triangle `(m00, m01, m11)` of the 2x2 shape matrix.
    fn shape_matrix(&self) -> [f64; 3] {
        let (s, c) = self.angle.sin_cos();
        let ia = 1.0 / (self.semi_axes[0] * self.semi_axes[0]);
        let ib = 1.0 / (self.semi_axes[1] * self.semi_axes[1]);
        [
            c * c * ia + s * s * ib,
            c * s * (ia - ib),
            s * s * ia + c * c * ib,
        ]
    }

    /// Extracts ellipse parameters from a (possibly scaled, either sign) point conic.
    pub fn from_conic(conic: &Mat3) -> Result<Self> {
        let c = SymMat3::from_matrix(conic);
        let (a, b, d) = (c.xx, c.xy, c.yy);
        let det2 = a * d - b * b;
        if !(det2 > 0.0) {
            return Err(Error::DegenerateEllipse);
        }
        // center solves the 2x2 block against the linear terms
        let cx = -(d * c.xz - b * c.yz) / det2;
        let cy = -(-b * c.xz + a * c.yz) / det2;
        // (p - c)^T M (p - c) = r
        let r = a * cx * cx + 2.0 * b * cx * cy + d * cy * cy - c.zz;
        if !(r.is_finite() && r != 0.0) {
            return Err(Error::DegenerateEllipse);
        }
        let (a, b, d) = (a / r, b / r, d / r);
        if !(a > 0.0 && a * d - b * b > 0.0) {
            return Err(Error::DegenerateEllipse);
        }
        let (lo, hi, phi_hi) = sym2_eigen(a, b, d);
        // the smaller eigenvalue is the major axis, orthogonal to phi_hi
        Self::new(
            [cx, cy],
            [1.0 / lo.sqrt(), 1.0 / hi.sqrt()],
            phi_hi + 0.5 * PI,
        )
    }

    pub fn boundary_point(&self, t: f64) -> [f64; 2] {
        let (s, c) = self.angle.sin_cos();
        let (x, y) = (self.semi_axes[0] * t.cos(), self.semi_axes[1] * t.sin());
        [
            self.center[0] + c * x - s * y,
            self.center[1] + s * x + c * y,
        ]
    }
}

pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(PI);
    if w >= PI {
        0.0
    } else {
        w
    }
}

/// Eigenvalues of `[[a, b], [b, d]]` ascending, plus the direction angle of
/// the eigenvector of the larger one.
pub fn sym2_eigen(a: f64, b: f64, d: f64) -> (f64, f64, f64) {
    let mean = 0.5 * (a + d);
    let h = (0.5 * (a - d)).hypot(b);
    (mean - h, mean + h, 0.5 * (2.0 * b).atan2(a - d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conic_round_trip() {
        let e = EllipseObservation::new([3.0, -2.0], [5.0, 2.0], 0.7).unwrap();
        for scale in [1.0, -3.5, 1e-3] {
            let back = EllipseObservation::from_conic(&(e.to_conic() * scale)).unwrap();
            assert!((back.center[0] - 3.0).abs() < 1e-12);
            assert!((back.center[1] + 2.0).abs() < 1e-12);
            assert!((back.semi_axes[0] - 5.0).abs() < 1e-12);
            assert!((back.semi_axes[1] - 2.0).abs() < 1e-12);
            assert!((back.angle - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_points_on_conic() {
        let e = EllipseObservation::new([1.0, 2.0], [3.0, 1.5], 2.9).unwrap();
        let c = e.to_conic();
        for k in 0..32 {
            let p = e.boundary_point(k as f64 * 0.2);
            let x = nalgebra::Vector3::new(p[0], p[1], 1.0);
            assert!((x.dot(&(c * x))).abs() < 1e-12);
        }
    }

    #[test]
    fn normalization() {
        let e = EllipseObservation::new([0.0, 0.0], [1.0, 2.0], 0.0).unwrap();
        assert_eq!(e.semi_axes, [2.0, 1.0]);
        assert!((e.angle - 0.5 * PI).abs() < 1e-15);
        let e = EllipseObservation::new([0.0, 0.0], [2.0, 1.0], -0.25).unwrap();
        assert!((e.angle - (PI - 0.25)).abs() < 1e-15);
        assert!(EllipseObservation::new([0.0, 0.0], [2.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn hyperbola_rejected() {
        let c = Mat3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0);
        assert_eq!(
            EllipseObservation::from_conic(&c),
            Err(Error::DegenerateEllipse)
        );
        let imaginary = Mat3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert_eq!(
            EllipseObservation::from_conic(&imaginary),
            Err(Error::DegenerateEllipse)
        );
    }
}
