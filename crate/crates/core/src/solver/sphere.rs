//! Sphere: the camera center lies on a sphere around the object and the
//! orientation about it is free.

use crate::decoupled::{chirality_ok, make_pose, PoseSolution};
use crate::error::{Error, Result};
use crate::geometry::{axis_rotation, complete_basis, ConeClass, ConeQuadric, Rotation3, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct SphereLocus {
    pub radius: f64,
    pub cone: ConeQuadric,
    pub sigma: f64,
    pub mu: f64,
    /// Distance from the sphere center to the camera center.
    pub dist: f64,
    /// Camera-frame cone axis, oriented from the sphere towards the camera.
    pub axis: Vec3,
    pub delta_cam: Vec3,
}

impl SphereLocus {
    pub fn new(radius: f64, cone: &ConeQuadric, cluster_tol: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::NonPositiveRadius(radius));
        }
        if !matches!(cone.class(cluster_tol), ConeClass::Circular { .. }) {
            return Err(Error::WrongClass);
        }
        let lambda = 1.0 / (radius * radius);
        let [b1, b2, bs] = cone.eigenvalues;
        let bd = 0.5 * (b1 + b2);
        let sigma = lambda / bs;
        let d2 = (1.0 - bd / bs) / lambda;
        if !(d2 > 0.0) {
            return Err(Error::NegativeRadicand(d2));
        }
        let mut axis = cone.axis();
        if !chirality_ok(&axis, &Vec3::z()) {
            axis = -axis;
        }
        let dist = d2.sqrt();
        Ok(Self {
            radius,
            cone: *cone,
            sigma,
            mu: 1.0 - lambda * d2,
            dist,
            axis,
            delta_cam: axis * dist,
        })
    }

    pub fn radii(&self) -> [f64; 3] {
        [self.radius; 3]
    }

    /// Pose for any `camR_ell`.
    pub fn pose(&self, r_cam_ell: &Rotation3) -> PoseSolution {
        make_pose(
            &self.radii(),
            &self.cone.matrix,
            r_cam_ell,
            &self.delta_cam,
            self.sigma,
        )
    }

    /// Sample `i` of `n`: camera center on a Fibonacci sphere, with a
    /// low-discrepancy twist about the viewing axis.
    pub fn sample(&self, i: usize, n: usize) -> PoseSolution {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
        let rho = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden * i as f64;
        let u = Vec3::new(rho * phi.cos(), rho * phi.sin(), z);
        let align = Rotation3::rotation_between(&u, &self.axis).unwrap_or_else(|| {
            let (p, _) = complete_basis(&u);
            axis_rotation(&p, std::f64::consts::PI)
        });
        let twist = std::f64::consts::TAU * (i as f64 * std::f64::consts::SQRT_2).fract();
        self.pose(&(axis_rotation(&self.axis, twist) * align))
    }

    pub fn nearest_pose(&self, target: &PoseSolution) -> PoseSolution {
        self.pose(&target.ellipsoid_in_camera())
    }
}
