//! Position from a known orientation, and orientation from a known position.

use crate::cone::{alignment_residual, AlignmentInstance};
use crate::error::{Error, Result};
use crate::geometry::{
    classify_ellipsoid, complete_basis, diag_matrix, radii_eigenvalues, ConeClass, ConeQuadric,
    EllipsoidClass, Mat3, Rotation3, SymMat3, Tolerances, Vec3,
};
use crate::spectral::{generalized_eigen, identify_sigma, mu_from_sigma, sigma_from_distance};

/// A camera pose relative to the ellipsoid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseSolution {
    /// `E_ell`, equal to `delta` expressed in the ellipsoid frame.
    pub camera_position_in_ellipsoid_frame: Vec3,
    /// Camera axes in the ellipsoid frame, `camR_ell^T`.
    pub camera_rotation: Rotation3,
    pub residual: f64,
}

impl PoseSolution {
    /// `camR_ell`
    pub fn ellipsoid_in_camera(&self) -> Rotation3 {
        self.camera_rotation.inverse()
    }

    /// `delta` in the camera frame.
    pub fn delta_cam(&self) -> Vec3 {
        self.ellipsoid_in_camera() * self.camera_position_in_ellipsoid_frame
    }
}

/// Alignment residual of a pose given the ellipsoid radii, the camera-frame
/// cone matrix and `sigma`. `mu` comes from its definition.
pub fn pose_residual(radii: &[f64; 3], bp_cam: &SymMat3, pose: &PoseSolution, sigma: f64) -> f64 {
    let a = diag_matrix(radii);
    let bp_ell = bp_cam.conjugate(pose.camera_rotation.matrix());
    alignment_residual(&AlignmentInstance::new(
        a,
        bp_ell,
        pose.camera_position_in_ellipsoid_frame,
        sigma,
    ))
}

/// Builds a pose from `camR_ell` and `delta_cam`, filling in the residual.
pub fn make_pose(
    radii: &[f64; 3],
    bp_cam: &SymMat3,
    r_cam_ell: &Rotation3,
    delta_cam: &Vec3,
    sigma: f64,
) -> PoseSolution {
    let camera_rotation = r_cam_ell.inverse();
    let mut pose = PoseSolution {
        camera_position_in_ellipsoid_frame: camera_rotation * delta_cam,
        camera_rotation,
        residual: 0.0,
    };
    pose.residual = pose_residual(radii, bp_cam, &pose, sigma);
    pose
}

/// Ellipsoid in front of the camera: the center `-delta_cam` has positive depth.
pub fn chirality_ok(delta_cam: &Vec3, n_cam: &Vec3) -> bool {
    delta_cam.dot(n_cam) < 0.0
}

/// `delta = k delta1`, `k^2 = tr(A^-1) - tr(B'^-1) / sigma2`, sign chosen so
/// that `delta1 . N < 0`.
pub fn position_from_orientation(
    radii: &[f64; 3],
    r_cam_ell: &Rotation3,
    bp_cam: &SymMat3,
    n_cam: &Vec3,
    tol: &Tolerances,
) -> Result<PoseSolution> {
    crate::geometry::check_radii(radii)?;
    let a_cam = diag_matrix(radii).conjugate(r_cam_ell.matrix());
    let pairs = generalized_eigen(&a_cam, bp_cam)?;
    let g = identify_sigma(&pairs, tol.ambiguity)?;
    let tr_a_inv: f64 = radii.iter().map(|r| r * r).sum();
    let bi = bp_cam
        .inverse()
        .ok_or(Error::SingularCone(bp_cam.determinant()))?;
    let k2 = tr_a_inv - bi.trace() / g.sigma2;
    if !(k2 >= 0.0) {
        return Err(Error::NegativeRadicandK(k2));
    }
    let mut delta = g.delta1 * k2.sqrt();
    if !chirality_ok(&delta, n_cam) {
        delta = -delta;
    }
    Ok(make_pose(radii, bp_cam, r_cam_ell, &delta, g.sigma1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrientationSymmetry {
    FourDiscrete,
    /// Free rotation about `free_axis`.
    AxialContinuum,
    /// Any rotation; `rotations` holds the identity.
    FullContinuum,
}

/// Candidate `camR_ell` rotations (ellipsoid axes expressed in the camera frame).
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationSet {
    pub rotations: Vec<Rotation3>,
    pub chirality_valid: Vec<bool>,
    pub poses: Vec<PoseSolution>,
    pub symmetry: OrientationSymmetry,
    /// Camera-frame axis of the continuum.
    pub free_axis: Option<Vec3>,
    pub sigma: f64,
    pub mu: f64,
}

impl OrientationSet {
    pub fn valid_rotations(&self) -> impl Iterator<Item = &Rotation3> {
        self.rotations
            .iter()
            .zip(&self.chirality_valid)
            .filter(|(_, &ok)| ok)
            .map(|(r, _)| r)
    }
}

/// `sigma` from the distance relation, `mu` from its link to `sigma`.
pub(crate) fn sigma_mu_from_distance(
    norm_delta_sq: f64,
    radii: &[f64; 3],
    cone: &ConeQuadric,
) -> Result<(f64, f64)> {
    let l = radii_eigenvalues(radii);
    let det_a = l[0] * l[1] * l[2];
    let tr_a_inv: f64 = radii.iter().map(|r| r * r).sum();
    let inv = cone.invariants();
    let sigma = sigma_from_distance(norm_delta_sq, tr_a_inv, det_a, inv.trace_inv, inv.det)?;
    if sigma == 0.0 {
        return Err(Error::InconsistentDistance);
    }
    let mu = mu_from_sigma(sigma, det_a, inv.det)?;
    Ok((sigma, mu))
}

/// `A = (sigma / mu) (B' - sigma B' d d^T B')`, the ellipsoid matrix in the
/// frame where `B'` and `d` are expressed.
pub fn ellipsoid_from_cone(bp: &SymMat3, delta: &Vec3, sigma: f64, mu: f64) -> SymMat3 {
    let bd = bp.mul_vec(delta);
    bp.sub(&SymMat3::outer(&bd).scale(sigma)).scale(sigma / mu)
}

/// `B' = (A d d^T A + mu A) / sigma`
pub fn cone_from_ellipsoid(a: &SymMat3, delta: &Vec3, sigma: f64, mu: f64) -> SymMat3 {
    let ad = a.mul_vec(delta);
    SymMat3::outer(&ad).add(&a.scale(mu)).scale(1.0 / sigma)
}

/// The four `diag(+-1)` sign patterns with determinant +1.
pub(crate) const PROPER_SIGNS: [[f64; 3]; 4] = [
    [1.0, 1.0, 1.0],
    [1.0, -1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
];

pub(crate) fn with_signs(m: &Mat3, s: &[f64; 3]) -> Mat3 {
    let mut out = *m;
    for (j, sj) in s.iter().enumerate() {
        out.column_mut(j).scale_mut(*sj);
    }
    out
}

/// Rotation whose column `axis` is `dir`, the others completing a right-handed frame.
pub(crate) fn frame_with_axis(axis: usize, dir: &Vec3) -> Rotation3 {
    let (u, v) = complete_basis(dir);
    let mut cols = [Vec3::zeros(); 3];
    cols[axis] = dir.normalize();
    cols[(axis + 1) % 3] = u;
    cols[(axis + 2) % 3] = v;
    Rotation3::from_matrix_unchecked(Mat3::from_columns(&cols))
}

/// Orientation from `delta` known in the camera frame: `A_cam` is rebuilt
/// and its eigenvectors give `camR_ell` up to the ellipsoid symmetries. All
/// candidates share the same ellipsoid center, so all satisfy chirality when
/// `delta_cam` does.
pub fn orientation_from_position_camera(
    delta_cam: &Vec3,
    radii: &[f64; 3],
    cone: &ConeQuadric,
    tol: &Tolerances,
) -> Result<OrientationSet> {
    crate::geometry::check_radii(radii)?;
    let (sigma, mu) = sigma_mu_from_distance(delta_cam.norm_squared(), radii, cone)?;
    let a_cam = ellipsoid_from_cone(&cone.matrix, delta_cam, sigma, mu);
    let (vals, vecs) = a_cam.eigen();
    let target = radii_eigenvalues(radii);
    if !(vals[0] > 0.0) {
        return Err(Error::InconsistentDistance);
    }
    let mut sorted = target;
    sorted.sort_by(|a, b| a.total_cmp(b));
    for (v, t) in vals.iter().zip(&sorted) {
        if (v - t).abs() > 1e-6 * t.abs() {
            return Err(Error::InconsistentDistance);
        }
    }
    let valid = chirality_ok(delta_cam, &Vec3::z());
    let pose = |r: &Rotation3| make_pose(radii, &cone.matrix, r, delta_cam, sigma);
    match classify_ellipsoid(radii, tol.cluster) {
        EllipsoidClass::Triaxial => {
            // column for ellipsoid axis i: eigenvector with the same rank as its eigenvalue
            let mut order = [0usize, 1, 2];
            order.sort_by(|&i, &j| target[i].total_cmp(&target[j]));
            let mut base = Mat3::zeros();
            for (rank, &axis) in order.iter().enumerate() {
                base.set_column(axis, &vecs.column(rank));
            }
            if base.determinant() < 0.0 {
                base.column_mut(0).neg_mut();
            }
            let rotations: Vec<Rotation3> = PROPER_SIGNS
                .iter()
                .map(|s| Rotation3::from_matrix_unchecked(with_signs(&base, s)))
                .collect();
            let poses = rotations.iter().map(pose).collect();
            Ok(OrientationSet {
                chirality_valid: vec![valid; 4],
                rotations,
                poses,
                symmetry: OrientationSymmetry::FourDiscrete,
                free_axis: None,
                sigma,
                mu,
            })
        }
        EllipsoidClass::Spheroid { single_axis, .. } => {
            let ls = target[single_axis];
            let k = (0..3)
                .min_by(|&i, &j| (vals[i] - ls).abs().total_cmp(&(vals[j] - ls).abs()))
                .unwrap();
            let axis = vecs.column(k).into_owned();
            let rep = frame_with_axis(single_axis, &axis);
            Ok(OrientationSet {
                poses: vec![pose(&rep)],
                rotations: vec![rep],
                chirality_valid: vec![valid],
                symmetry: OrientationSymmetry::AxialContinuum,
                free_axis: Some(axis),
                sigma,
                mu,
            })
        }
        EllipsoidClass::Sphere => {
            let rep = Rotation3::identity();
            Ok(OrientationSet {
                poses: vec![pose(&rep)],
                rotations: vec![rep],
                chirality_valid: vec![valid],
                symmetry: OrientationSymmetry::FullContinuum,
                free_axis: None,
                sigma,
                mu,
            })
        }
    }
}

/// Orientation from `delta` known in the ellipsoid frame: `B'_ell` is rebuilt
/// and matched against the observed cone's eigenvectors. Of the four proper
/// sign choices, those placing the ellipsoid behind the camera are flagged.
pub fn orientation_from_position_ellipsoid(
    delta_ell: &Vec3,
    radii: &[f64; 3],
    cone: &ConeQuadric,
    tol: &Tolerances,
) -> Result<OrientationSet> {
    crate::geometry::check_radii(radii)?;
    let (sigma, mu) = sigma_mu_from_distance(delta_ell.norm_squared(), radii, cone)?;
    let bp_ell = cone_from_ellipsoid(&diag_matrix(radii), delta_ell, sigma, mu);
    let cone_ell = ConeQuadric::new(*delta_ell, bp_ell)?;
    let c = cone.eigenvectors.matrix();
    let e = cone_ell.eigenvectors.matrix();
    let pose = |r: &Rotation3| make_pose(radii, &cone.matrix, r, &(r * delta_ell), sigma);
    match cone.class(tol.cluster) {
        ConeClass::NonCircularElliptic => {
            let rotations: Vec<Rotation3> = PROPER_SIGNS
                .iter()
                .map(|s| Rotation3::from_matrix_unchecked(with_signs(c, s) * e.transpose()))
                .collect();
            let chirality_valid = rotations
                .iter()
                .map(|r| chirality_ok(&(r * delta_ell), &Vec3::z()))
                .collect();
            let poses = rotations.iter().map(pose).collect();
            Ok(OrientationSet {
                rotations,
                chirality_valid,
                poses,
                symmetry: OrientationSymmetry::FourDiscrete,
                free_axis: None,
                sigma,
                mu,
            })
        }
        ConeClass::Circular { .. } => {
            // only the cone axes need to agree; the flip keeps the ellipsoid in front
            let mut rep = Rotation3::from_matrix_unchecked(c * e.transpose());
            if !chirality_ok(&(rep * delta_ell), &Vec3::z()) {
                rep = Rotation3::from_matrix_unchecked(
                    with_signs(c, &[1.0, -1.0, -1.0]) * e.transpose(),
                );
            }
            let ok = chirality_ok(&(rep * delta_ell), &Vec3::z());
            Ok(OrientationSet {
                poses: vec![pose(&rep)],
                rotations: vec![rep],
                chirality_valid: vec![ok],
                symmetry: OrientationSymmetry::AxialContinuum,
                free_axis: Some(cone.axis()),
                sigma,
                mu,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{backprojection_cone, CameraIntrinsics};
    use crate::geometry::{
        axis_rotation, rotation_angle_between, rotation_from_euler_zyx, EllipsoidModel,
    };
    use crate::synth::{ellipsoid_in_camera, ground_truth_pose, project_ellipsoid, CameraPose};

    fn stability_scene() -> (EllipsoidModel, CameraPose) {
        let d = |x: f64| x.to_radians();
        let model = EllipsoidModel::new(Vec3::zeros(), Rotation3::identity(), [4.0, 2.0, 1.999999])
            .unwrap();
        let camera = CameraPose {
            rotation: rotation_from_euler_zyx(d(-45.0), d(10.0), d(10.0)),
            position: Vec3::new(-1.0, -1.0, -4.0),
        };
        (model, camera)
    }

    fn cone_of(model: &EllipsoidModel, camera: &CameraPose) -> ConeQuadric {
        let intr = CameraIntrinsics::normalized();
        let obs = project_ellipsoid(model, camera, &intr).unwrap();
        backprojection_cone(&obs, &intr).unwrap()
    }

    #[test]
    fn sphere_position() {
        let bp = SymMat3::from_diagonal([1.0, 1.0, -1.0 / 3.0]);
        let p = position_from_orientation(
            &[1.0; 3],
            &Rotation3::identity(),
            &bp,
            &Vec3::z(),
            &Tolerances::default(),
        )
        .unwrap();
        assert!((p.camera_position_in_ellipsoid_frame - Vec3::new(0.0, 0.0, -2.0)).norm() < 1e-12);
        assert!(p.residual < 1e-12);
    }

    #[test]
    fn stability_scene_position() {
        let (model, camera) = stability_scene();
        let cone = cone_of(&model, &camera);
        let gt = ground_truth_pose(&model, &camera);
        let (_, _, r_cam_ell) = ellipsoid_in_camera(&model, &camera);
        let p = position_from_orientation(
            &model.radii,
            &r_cam_ell,
            &cone.matrix,
            &Vec3::z(),
            &Tolerances::default(),
        )
        .unwrap();
        let err =
            (p.camera_position_in_ellipsoid_frame - gt.camera_position_in_ellipsoid_frame).norm();
        assert!(err < 1e-6, "{err}");
        assert!(p.residual < 1e-8);
    }

    #[test]
    fn sphere_orientation_is_free() {
        let bp = SymMat3::from_diagonal([1.0, 1.0, -1.0 / 3.0]);
        let cone = ConeQuadric::new(Vec3::zeros(), bp).unwrap();
        let set = orientation_from_position_camera(
            &Vec3::new(0.0, 0.0, -2.0),
            &[1.0; 3],
            &cone,
            &Tolerances::default(),
        )
        .unwrap();
        assert_eq!(set.symmetry, OrientationSymmetry::FullContinuum);
        for r in [
            rotation_from_euler_zyx(0.1, 2.0, -1.0),
            Rotation3::identity(),
        ] {
            let p = make_pose(&[1.0; 3], &bp, &r, &Vec3::new(0.0, 0.0, -2.0), set.sigma);
            assert!(p.residual < 1e-12);
        }
    }

    #[test]
    fn stability_scene_orientation() {
        let (model, camera) = stability_scene();
        let cone = cone_of(&model, &camera);
        let gt = ground_truth_pose(&model, &camera);
        let tol = Tolerances::default();
        let set =
            orientation_from_position_camera(&gt.delta_cam(), &model.radii, &cone, &tol).unwrap();
        assert_eq!(set.symmetry, OrientationSymmetry::FourDiscrete);
        let truth = gt.ellipsoid_in_camera();
        let best = set
            .rotations
            .iter()
            .map(|r| rotation_angle_between(r, &truth))
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-6, "{best}");
        assert!(set.poses.iter().all(|p| p.residual < 1e-8));

        let set = orientation_from_position_ellipsoid(
            &gt.camera_position_in_ellipsoid_frame,
            &model.radii,
            &cone,
            &tol,
        )
        .unwrap();
        assert_eq!(set.chirality_valid.iter().filter(|&&v| v).count(), 2);
        let best = set
            .valid_rotations()
            .map(|r| rotation_angle_between(r, &truth))
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-6, "{best}");
    }

    #[test]
    fn spheroid_continuum() {
        let model = EllipsoidModel::new(
            Vec3::new(0.4, -0.3, 9.0),
            rotation_from_euler_zyx(0.3, 1.0, -0.4),
            [2.0, 2.0, 5.0],
        )
        .unwrap();
        let camera = CameraPose::identity();
        let cone = cone_of(&model, &camera);
        let gt = ground_truth_pose(&model, &camera);
        let set = orientation_from_position_camera(
            &gt.delta_cam(),
            &model.radii,
            &cone,
            &Tolerances::default(),
        )
        .unwrap();
        assert_eq!(set.symmetry, OrientationSymmetry::AxialContinuum);
        let axis = set.free_axis.unwrap();
        let turned = axis_rotation(&axis, 37f64.to_radians()) * set.rotations[0];
        let p = make_pose(
            &model.radii,
            &cone.matrix,
            &turned,
            &gt.delta_cam(),
            set.sigma,
        );
        assert!(p.residual < 1e-8, "{}", p.residual);
    }
}
