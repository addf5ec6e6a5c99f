//! Spheroids: a unique `sigma`, finitely many camera centers up to a free
//! rotation about the revolution axis.

use crate::decoupled::{
    chirality_ok, ellipsoid_from_cone, frame_with_axis, make_pose, PoseSolution,
};
use crate::error::{Error, Result};
use crate::geometry::{
    axis_rotation, check_radii, classify_ellipsoid, radii_eigenvalues, ConeClass, ConeQuadric,
    EllipsoidClass, Rotation3, SymMat3, Vec3,
};
use crate::solver::feasible::{cone_frame_components, cube_root_ratio};

/// Axis and eigenvalues of a spheroid, `(single_axis, lambda_single, lambda_double, single_smaller)`.
fn spheroid_parts(radii: &[f64; 3], cluster_tol: f64) -> Result<(usize, f64, f64, bool)> {
    check_radii(radii)?;
    let EllipsoidClass::Spheroid {
        single_axis,
        single_smaller,
    } = classify_ellipsoid(radii, cluster_tol)
    else {
        return Err(Error::WrongClass);
    };
    let l = radii_eigenvalues(radii);
    let (i, j) = ((single_axis + 1) % 3, (single_axis + 2) % 3);
    Ok((
        single_axis,
        l[single_axis],
        0.5 * (l[i] + l[j]),
        single_smaller,
    ))
}

/// Rotation by `theta` about ellipsoid axis `axis`.
fn about_axis(axis: usize, theta: f64) -> Rotation3 {
    let mut e = Vec3::zeros();
    e[axis] = 1.0;
    axis_rotation(&e, theta)
}

/// The angle `theta` with `rep * about_axis(axis, theta)` closest to `target`.
fn free_angle(rep: &Rotation3, target: &Rotation3, axis: usize) -> f64 {
    let q = rep.inverse() * target;
    let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
    let q = q.matrix();
    // average of the two in-plane estimates
    (q[(v, u)] - q[(u, v)]).atan2(q[(u, u)] + q[(v, v)])
}

/// Spheroid with a non-circular cone: two tangent spheroids, each with a
/// continuum of camera orientations about its revolution axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpheroidNonCircularLocus {
    pub radii: [f64; 3],
    pub cone: ConeQuadric,
    pub single_axis: usize,
    pub sigma: f64,
    pub mu: f64,
    /// `delta` in the cone eigenbasis for the two spheroids.
    pub delta_cone: [Vec3; 2],
    pub delta_cam: [Vec3; 2],
    /// Spheroid matrix in the camera frame for each solution.
    pub a_cam: [SymMat3; 2],
    /// Representative `camR_ell`, indexed by `2 * solution + flip`.
    pub representatives: [Rotation3; 4],
}

impl SpheroidNonCircularLocus {
    pub fn new(radii: &[f64; 3], cone: &ConeQuadric, cluster_tol: f64) -> Result<Self> {
        let (single_axis, ls, ld, single_smaller) = spheroid_parts(radii, cluster_tol)?;
        if cone.class(cluster_tol) != ConeClass::NonCircularElliptic {
            return Err(Error::WrongClass);
        }
        let [b1, b2, b3] = cone.eigenvalues;
        let sigma = if single_smaller {
            ls * b1 / (b2 * b3)
        } else {
            ls * b2 / (b1 * b3)
        };
        let lambda_a = radii_eigenvalues(radii);
        let inv = cone.invariants();
        let d = cube_root_ratio(lambda_a, &inv);
        let ratio = sigma / d;
        if !(ratio > 0.0) {
            return Err(Error::NegativeRadicand(ratio));
        }
        let m = -ratio.sqrt();
        let mu = m * m * m;
        let scale = d * d * m * m;
        let zero = if single_smaller { 0 } else { 1 };
        let free = 1 - zero;
        let x = cone_frame_components(lambda_a, &inv, d).map(|p| p.eval(m) / scale);
        let tol = 1e-8 * (x[free].abs() + x[2].abs()).max(1.0 / ld);
        if x[free] < -tol || x[2] < -tol {
            return Err(Error::NegativeRadicand(x[free].min(x[2])));
        }
        let c = cone.eigenvectors;
        let mut delta_cone = [Vec3::zeros(); 2];
        let mut delta_cam = [Vec3::zeros(); 2];
        let mut a_cam = [SymMat3::identity(); 2];
        let mut representatives = [Rotation3::identity(); 4];
        for (j, sign) in [1.0, -1.0].into_iter().enumerate() {
            let mut dc = Vec3::zeros();
            dc[free] = sign * x[free].max(0.0).sqrt();
            dc[2] = x[2].max(0.0).sqrt();
            if !chirality_ok(&(c * dc), &Vec3::z()) {
                dc[2] = -dc[2];
            }
            let dcam = c * dc;
            let a = ellipsoid_from_cone(&cone.matrix, &dcam, sigma, mu);
            let (vals, vecs) = a.eigen();
            let k = (0..3)
                .min_by(|&p, &q| (vals[p] - ls).abs().total_cmp(&(vals[q] - ls).abs()))
                .unwrap();
            let rep = frame_with_axis(single_axis, &vecs.column(k).into_owned());
            representatives[2 * j] = rep;
            representatives[2 * j + 1] =
                rep * about_axis((single_axis + 1) % 3, std::f64::consts::PI);
            delta_cone[j] = dc;
            delta_cam[j] = dcam;
            a_cam[j] = a;
        }
        Ok(Self {
            radii: *radii,
            cone: *cone,
            single_axis,
            sigma,
            mu,
            delta_cone,
            delta_cam,
            a_cam,
            representatives,
        })
    }

    pub const BRANCHES: usize = 4;

    /// Pose on branch `2 * solution + flip` at free angle `theta`.
    pub fn pose(&self, branch: usize, theta: f64) -> PoseSolution {
        let r = self.representatives[branch] * about_axis(self.single_axis, theta);
        make_pose(
            &self.radii,
            &self.cone.matrix,
            &r,
            &self.delta_cam[branch / 2],
            self.sigma,
        )
    }

    /// Camera center in the ellipsoid frame on branch `branch` at angle `theta`.
    pub fn position(&self, branch: usize, theta: f64) -> Vec3 {
        let r = self.representatives[branch] * about_axis(self.single_axis, theta);
        r.inverse() * self.delta_cam[branch / 2]
    }

    /// Closest pose to `target` over all branches, with its branch and angle.
    pub fn nearest_pose(&self, target: &PoseSolution) -> (usize, f64, PoseSolution) {
        let r_target = target.ellipsoid_in_camera();
        (0..Self::BRANCHES)
            .map(|b| {
                let theta = free_angle(&self.representatives[b], &r_target, self.single_axis);
                (b, theta, self.pose(b, theta))
            })
            .min_by(|a, b| {
                super::triaxial::pose_distance(&a.2, target)
                    .total_cmp(&super::triaxial::pose_distance(&b.2, target))
            })
            .unwrap()
    }
}

/// Spheroid with a circular cone: the revolution axes coincide and the
/// camera sits on that axis on either side of the spheroid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpheroidCircularLocus {
    pub radii: [f64; 3],
    pub cone: ConeQuadric,
    pub single_axis: usize,
    pub sigma: f64,
    pub mu: f64,
    pub dist: f64,
    /// Camera-frame revolution axis, oriented towards the camera.
    pub axis: Vec3,
    pub delta_cam: Vec3,
    /// Representative `camR_ell`, indexed by flip.
    pub representatives: [Rotation3; 2],
}

impl SpheroidCircularLocus {
    pub fn new(radii: &[f64; 3], cone: &ConeQuadric, cluster_tol: f64) -> Result<Self> {
        let (single_axis, ls, ld, _) = spheroid_parts(radii, cluster_tol)?;
        if !matches!(cone.class(cluster_tol), ConeClass::Circular { .. }) {
            return Err(Error::WrongClass);
        }
        let [b1, b2, bs] = cone.eigenvalues;
        let bd = 0.5 * (b1 + b2);
        let sigma = ls / bs;
        let d2 = (1.0 - ls * bd / (ld * bs)) / ls;
        if !(d2 > 0.0) {
            return Err(Error::NegativeRadicand(d2));
        }
        let dist = d2.sqrt();
        let mut axis = cone.axis();
        if !chirality_ok(&axis, &Vec3::z()) {
            axis = -axis;
        }
        let delta_cam = axis * dist;
        let rep = frame_with_axis(single_axis, &axis);
        let flipped = rep * about_axis((single_axis + 1) % 3, std::f64::consts::PI);
        Ok(Self {
            radii: *radii,
            cone: *cone,
            single_axis,
            sigma,
            mu: 1.0 - ls * d2,
            dist,
            axis,
            delta_cam,
            representatives: [rep, flipped],
        })
    }

    pub const BRANCHES: usize = 2;

    /// The two camera centers in the ellipsoid frame, `+-dist` along the axis.
    pub fn positions(&self) -> [Vec3; 2] {
        self.representatives.map(|r| r.inverse() * self.delta_cam)
    }

    pub fn pose(&self, branch: usize, theta: f64) -> PoseSolution {
        let r = self.representatives[branch] * about_axis(self.single_axis, theta);
        make_pose(
            &self.radii,
            &self.cone.matrix,
            &r,
            &self.delta_cam,
            self.sigma,
        )
    }

    pub fn nearest_pose(&self, target: &PoseSolution) -> (usize, f64, PoseSolution) {
        let r_target = target.ellipsoid_in_camera();
        (0..Self::BRANCHES)
            .map(|b| {
                let theta = free_angle(&self.representatives[b], &r_target, self.single_axis);
                (b, theta, self.pose(b, theta))
            })
            .min_by(|a, b| {
                super::triaxial::pose_distance(&a.2, target)
                    .total_cmp(&super::triaxial::pose_distance(&b.2, target))
            })
            .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{backprojection_cone, CameraIntrinsics};
    use crate::geometry::{rotation_angle_between, rotation_from_euler_zyx, EllipsoidModel};
    use crate::spectral::sigma_from_distance;
    use crate::synth::{ground_truth_pose, project_ellipsoid, CameraPose};

    fn cone_for(model: &EllipsoidModel, camera: &CameraPose) -> ConeQuadric {
        let intr = CameraIntrinsics::new(700.0, 720.0, 310.0, 250.0).unwrap();
        backprojection_cone(&project_ellipsoid(model, camera, &intr).unwrap(), &intr).unwrap()
    }

    fn camera() -> CameraPose {
        CameraPose {
            rotation: rotation_from_euler_zyx(0.2, -0.1, 0.05),
            position: Vec3::new(1.0, -0.5, -14.0),
        }
    }

    fn check_round_trip(radii: [f64; 3], rot: Rotation3) {
        let model = EllipsoidModel::new(Vec3::new(-0.4, 0.6, 0.2), rot, radii).unwrap();
        let cam = camera();
        let cone = cone_for(&model, &cam);
        let locus = SpheroidNonCircularLocus::new(&radii, &cone, 1e-7).unwrap();
        let gt = ground_truth_pose(&model, &cam);
        // two distinct tangent spheroids
        assert!((locus.delta_cam[0] - locus.delta_cam[1]).norm() > 1e-6);
        for b in 0..4 {
            for k in 0..5 {
                let p = locus.pose(b, 1.3 * k as f64);
                assert!(p.residual <= 1e-8, "branch {b} residual {}", p.residual);
            }
        }
        let (_, _, best) = locus.nearest_pose(&gt);
        let e = (best.camera_position_in_ellipsoid_frame - gt.camera_position_in_ellipsoid_frame)
            .norm();
        assert!(e < 1e-7, "position error {e}");
        assert!(rotation_angle_between(&best.camera_rotation, &gt.camera_rotation) < 1e-7);
        // the center matches too
        let truth_center = -gt.delta_cam();
        assert!(locus
            .delta_cam
            .iter()
            .any(|d| (-d - truth_center).norm() < 1e-7));
        // unique sigma agrees with the distance relation
        let la = radii_eigenvalues(&radii);
        let inv = cone.invariants();
        let s = sigma_from_distance(
            locus.delta_cam[0].norm_squared(),
            radii.iter().map(|r| r * r).sum(),
            la[0] * la[1] * la[2],
            inv.trace_inv,
            inv.det,
        )
        .unwrap();
        assert!((s - locus.sigma).abs() <= 1e-9 * s.abs());
        // the opposite-signature cone describes the same geometry with -sigma
        let neg = ConeQuadric::new(cone.vertex, cone.matrix.scale(-1.0)).unwrap();
        let flipped = SpheroidNonCircularLocus::new(&radii, &neg, 1e-7).unwrap();
        assert!((flipped.sigma + locus.sigma).abs() <= 1e-9 * s.abs());
        for d in &flipped.delta_cam {
            assert!(locus.delta_cam.iter().any(|e| (d - e).norm() < 1e-8));
        }
        assert!(flipped.pose(0, 0.3).residual <= 1e-8);
    }

    #[test]
    fn prolate_and_oblate_round_trip() {
        let rot = rotation_from_euler_zyx(0.7, 0.5, -0.4);
        check_round_trip([2.0, 2.0, 5.0], rot);
        check_round_trip([5.0, 2.0, 5.0], rot);
        check_round_trip([1.0, 3.0, 3.0], rotation_from_euler_zyx(-1.1, 0.2, 0.9));
        check_round_trip([3.0, 1.0, 1.0], rotation_from_euler_zyx(2.1, -0.6, 0.3));
    }

    #[test]
    fn wrong_class_rejected() {
        let model =
            EllipsoidModel::new(Vec3::zeros(), Rotation3::identity(), [2.0, 2.0, 5.0]).unwrap();
        let cone = cone_for(&model, &camera());
        assert_eq!(
            SpheroidNonCircularLocus::new(&[1.0, 2.0, 3.0], &cone, 1e-7).unwrap_err(),
            Error::WrongClass
        );
    }

    #[test]
    fn circular_axial_view() {
        // a = b = 1, c = 2 seen along its axis from distance 4
        let radii = [1.0, 1.0, 2.0];
        let model =
            EllipsoidModel::new(Vec3::new(0.0, 0.0, 4.0), Rotation3::identity(), radii).unwrap();
        let cam = CameraPose::identity();
        let cone = cone_for(&model, &cam);
        let locus = SpheroidCircularLocus::new(&radii, &cone, 1e-7).unwrap();
        assert!((locus.dist - 4.0).abs() < 1e-10);
        assert!(locus.axis.cross(&Vec3::z()).norm() < 1e-10);
        let [p, q] = locus.positions();
        assert!((p + q).norm() < 1e-10 && (p.norm() - 4.0).abs() < 1e-10);
        for b in 0..2 {
            assert!(locus.pose(b, 0.8).residual <= 1e-10);
        }
        let gt = ground_truth_pose(&model, &cam);
        let (_, _, best) = locus.nearest_pose(&gt);
        assert!(
            (best.camera_position_in_ellipsoid_frame - gt.camera_position_in_ellipsoid_frame)
                .norm()
                < 1e-10
        );
    }
}
