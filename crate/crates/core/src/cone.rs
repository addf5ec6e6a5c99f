//! Projection and backprojection cones and the cone alignment residual.

use crate::conic::EllipseObservation;
use crate::error::{Error, Result};
use crate::geometry::{ConeQuadric, Mat3, SymMat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        if !(fx > 0.0 && fy > 0.0) || !fx.is_finite() || !fy.is_finite() {
            return Err(Error::InvalidInput("focal lengths must be positive".into()));
        }
        if !cx.is_finite() || !cy.is_finite() {
            return Err(Error::InvalidInput("non-finite principal point".into()));
        }
        Ok(Self { fx, fy, cx, cy })
    }

    /// Normalized image plane: `fx = fy = 1`, principal point at the origin.
    pub fn normalized() -> Self {
        Self {
            fx: 1.0,
            fy: 1.0,
            cx: 0.0,
            cy: 0.0,
        }
    }

    pub fn matrix(&self) -> Mat3 {
        Mat3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    pub fn inverse_matrix(&self) -> Mat3 {
        Mat3::new(
            1.0 / self.fx,
            0.0,
            -self.cx / self.fx,
            0.0,
            1.0 / self.fy,
            -self.cy / self.fy,
            0.0,
            0.0,
            1.0,
        )
    }
}

/// `B = A d d^T A - (d^T A d - 1) A` with `d = E - C`.
pub fn projection_cone(a: &SymMat3, c: &Vec3, e: &Vec3) -> Result<ConeQuadric> {
    let delta = e - c;
    let s = a.quad(&delta);
    if !(s > 1.0 + 1e-12) {
        return Err(Error::CameraInsideEllipsoid(s));
    }
    let ad = a.mul_vec(&delta);
    let b = SymMat3::outer(&ad).sub(&a.scale(s - 1.0));
    ConeQuadric::new(*e, b)
}

/// Ellipse re-expressed on the plane `z = 1` of the camera frame.
pub fn ellipse_to_normalized(
    obs: &EllipseObservation,
    intr: &CameraIntrinsics,
) -> Result<EllipseObservation> {
    let k = intr.matrix();
    let conic = k.transpose() * obs.to_conic() * k;
    EllipseObservation::from_conic(&conic)
}

pub fn ellipse_from_normalized(
    obs: &EllipseObservation,
    intr: &CameraIntrinsics,
) -> Result<EllipseObservation> {
    let ki = intr.inverse_matrix();
    let conic = ki.transpose() * obs.to_conic() * ki;
    EllipseObservation::from_conic(&conic)
}

/// Cone through the camera center `E` and an ellipse with center `K`, unit
/// axes `U`, `V`, semi-axes `a`, `b`, lying in the plane of normal `N`.
///
/// `B' = S^T M S - Q`, `M = U U^T / a^2 + V V^T / b^2`, `W = N / N.(K - E)`,
/// `S = I - (K - E) W^T`, `Q = W W^T`.
pub fn backprojection_matrix(
    e: &Vec3,
    n: &Vec3,
    k: &Vec3,
    u: &Vec3,
    v: &Vec3,
    a: f64,
    b: f64,
) -> SymMat3 {
    let ke = k - e;
    let w = n / n.dot(&ke);
    let m = u * u.transpose() / (a * a) + v * v.transpose() / (b * b);
    let s = Mat3::identity() - ke * w.transpose();
    let q = w * w.transpose();
    SymMat3::from_matrix(&(s.transpose() * m * s - q))
}

/// Backprojection cone in the camera frame. The matrix keeps the scale of
/// the construction; it is never renormalized.
pub fn backprojection_cone(
    obs: &EllipseObservation,
    intr: &CameraIntrinsics,
) -> Result<ConeQuadric> {
    let en = ellipse_to_normalized(obs, intr)?;
    if !(en.semi_axes[1] >= 1e-12) {
        return Err(Error::DegenerateEllipse);
    }
    let (s, c) = en.angle.sin_cos();
    let u = Vec3::new(c, s, 0.0);
    let v = Vec3::new(-s, c, 0.0);
    let k = Vec3::new(en.center[0], en.center[1], 1.0);
    let bp = backprojection_matrix(
        &Vec3::zeros(),
        &Vec3::z(),
        &k,
        &u,
        &v,
        en.semi_axes[0],
        en.semi_axes[1],
    );
    ConeQuadric::new(Vec3::zeros(), bp)
}

/// One instance of `A d d^T A + mu A = sigma B'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentInstance {
    pub a: SymMat3,
    pub bprime: SymMat3,
    pub delta: Vec3,
    pub sigma: f64,
    pub mu: f64,
}

impl AlignmentInstance {
    /// `mu` is taken from its definition `1 - d^T A d`.
    pub fn new(a: SymMat3, bprime: SymMat3, delta: Vec3, sigma: f64) -> Self {
        let mu = 1.0 - a.quad(&delta);
        Self {
            a,
            bprime,
            delta,
            sigma,
            mu,
        }
    }

    fn lhs(&self) -> SymMat3 {
        let ad = self.a.mul_vec(&self.delta);
        SymMat3::outer(&ad).add(&self.a.scale(self.mu))
    }
}

/// `|A d d^T A + mu A - sigma B'|_F / |sigma B'|_F`
pub fn alignment_residual(inst: &AlignmentInstance) -> f64 {
    let rhs = inst.bprime.scale(inst.sigma);
    let den = rhs.norm();
    let num = inst.lhs().sub(&rhs).norm();
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

/// `|d d^T - A^-1 + (mu / sigma) B'^-1|_F / |A^-1|_F`
pub fn equivalent_residual(inst: &AlignmentInstance) -> Result<f64> {
    let det = inst.bprime.determinant();
    let scale = inst.bprime.norm();
    if !(det.abs() > 1e-14 * scale * scale * scale) {
        return Err(Error::SingularCone(det));
    }
    if inst.sigma == 0.0 {
        return Err(Error::InvalidInput("sigma must be nonzero".into()));
    }
    let bi = inst.bprime.inverse().ok_or(Error::SingularCone(det))?;
    let ai = inst
        .a
        .inverse()
        .ok_or_else(|| Error::InvalidInput("singular ellipsoid matrix".into()))?;
    let r = SymMat3::outer(&inst.delta)
        .sub(&ai)
        .add(&bi.scale(inst.mu / inst.sigma));
    Ok(r.norm() / ai.norm())
}
