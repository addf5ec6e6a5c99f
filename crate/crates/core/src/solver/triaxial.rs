//! Triaxial ellipsoid: a one-parameter family of poses indexed by `m`.

use crate::decoupled::{
    chirality_ok, cone_from_ellipsoid, make_pose, with_signs, PoseSolution, PROPER_SIGNS,
};
use crate::error::{Error, Result};
use crate::geometry::{
    check_radii, diag_matrix, radii_eigenvalues, rotation_angle_between, ConeQuadric, Rotation3,
    Vec3,
};
use crate::solver::feasible::{triaxial_feasible_m, FeasibleM};

/// Pose within the triaxial family: sign pattern of `delta_ell` (bit `i`
/// set means a negative `i`-th coordinate) and rotation index (0 when the
/// first cone-frame coordinate of `delta` is non-negative).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriaxialPose {
    pub pattern: usize,
    pub rotation_index: usize,
    pub pose: PoseSolution,
}

impl TriaxialPose {
    pub fn branch(&self) -> usize {
        2 * self.pattern + self.rotation_index
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriaxialLocus {
    pub radii: [f64; 3],
    pub cone: ConeQuadric,
    pub feasible: FeasibleM,
}

impl TriaxialLocus {
    pub fn new(radii: &[f64; 3], cone: &ConeQuadric, cluster_tol: f64) -> Result<Self> {
        check_radii(radii)?;
        let feasible =
            triaxial_feasible_m(radii_eigenvalues(radii), &cone.invariants(), cluster_tol)?;
        Ok(Self {
            radii: *radii,
            cone: *cone,
            feasible,
        })
    }

    pub fn d(&self) -> f64 {
        self.feasible.d
    }

    pub fn sigma_at(&self, m: f64) -> f64 {
        self.feasible.d * m * m
    }

    /// Squared ellipsoid-frame coordinates of `delta` at `m`; tiny negative
    /// values from rounding are clamped to zero.
    pub fn squared_components(&self, m: f64) -> Result<[f64; 3]> {
        let scale = self.radii.iter().map(|r| r * r).sum::<f64>().max(1.0);
        let x = self.feasible.components_at(m);
        if x.iter().any(|v| !(*v >= -1e-10 * scale)) {
            return Err(Error::InfeasibleM(m));
        }
        Ok(x.map(|v| v.max(0.0)))
    }

    /// The eight candidate camera centers in the ellipsoid frame, by sign pattern.
    pub fn positions_at(&self, m: f64) -> Result<[Vec3; 8]> {
        let x = self.squared_components(m)?.map(f64::sqrt);
        Ok(std::array::from_fn(|p| pattern_point(&x, p)))
    }

    /// Every chirality-valid pose at `m`, ordered by pattern then rotation index.
    pub fn poses_at(&self, m: f64) -> Result<Vec<TriaxialPose>> {
        let a = diag_matrix(&self.radii);
        let sigma = self.sigma_at(m);
        let mu = m * m * m;
        let c = self.cone.eigenvectors.matrix();
        let mut out = Vec::with_capacity(16);
        for (pattern, delta_ell) in self.positions_at(m)?.iter().enumerate() {
            let bp_ell = cone_from_ellipsoid(&a, delta_ell, sigma, mu);
            let Ok(cone_ell) = ConeQuadric::new(*delta_ell, bp_ell) else {
                continue;
            };
            let e = cone_ell.eigenvectors.matrix();
            let mut found: Vec<TriaxialPose> = PROPER_SIGNS
                .iter()
                .filter_map(|s| {
                    let r = Rotation3::from_matrix_unchecked(with_signs(c, s) * e.transpose());
                    let delta_cam = r * delta_ell;
                    if !chirality_ok(&delta_cam, &Vec3::z()) {
                        return None;
                    }
                    let first = c.column(0).dot(&delta_cam);
                    Some(TriaxialPose {
                        pattern,
                        rotation_index: usize::from(first < 0.0),
                        pose: make_pose(&self.radii, &self.cone.matrix, &r, &delta_cam, sigma),
                    })
                })
                .collect();
            found.sort_by_key(|p| p.rotation_index);
            out.extend(found);
        }
        Ok(out)
    }

    /// Pose of one branch at `m`, if present.
    pub fn branch_pose(&self, branch: usize, m: f64) -> Option<PoseSolution> {
        self.poses_at(m)
            .ok()?
            .into_iter()
            .find(|p| p.branch() == branch)
            .map(|p| p.pose)
    }

    /// `m` of a known pose, `(1 - delta^T A delta)^(1/3)`.
    pub fn m_of(&self, pose: &PoseSolution) -> f64 {
        let mu = 1.0 - diag_matrix(&self.radii).quad(&pose.camera_position_in_ellipsoid_frame);
        mu.cbrt()
    }

    /// Closest member of the family to `target`, searched at the target's
    /// own `m` clamped to the feasible set.
    pub fn nearest_pose(&self, target: &PoseSolution) -> Option<(f64, TriaxialPose)> {
        let m = self.feasible.clamp(self.m_of(target))?;
        let best = self.poses_at(m).ok()?.into_iter().min_by(|a, b| {
            pose_distance(&a.pose, target).total_cmp(&pose_distance(&b.pose, target))
        })?;
        Some((m, best))
    }
}

fn pattern_point(x: &[f64; 3], pattern: usize) -> Vec3 {
    Vec3::from_fn(|i, _| if pattern >> i & 1 == 1 { -x[i] } else { x[i] })
}

/// Position error plus rotation angle, used to pick the closest candidate.
pub fn pose_distance(a: &PoseSolution, b: &PoseSolution) -> f64 {
    (a.camera_position_in_ellipsoid_frame - b.camera_position_in_ellipsoid_frame).norm()
        + rotation_angle_between(&a.camera_rotation, &b.camera_rotation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{backprojection_cone, CameraIntrinsics};
    use crate::geometry::{rotation_from_euler_zyx, EllipsoidModel};
    use crate::synth::{ground_truth_pose, project_ellipsoid, CameraPose};

    fn scene(radii: [f64; 3]) -> (EllipsoidModel, CameraPose, CameraIntrinsics) {
        let model = EllipsoidModel::new(
            Vec3::new(0.3, -0.2, 0.1),
            rotation_from_euler_zyx(0.4, -0.3, 0.2),
            radii,
        )
        .unwrap();
        let camera = CameraPose {
            rotation: rotation_from_euler_zyx(0.1, 0.2, -0.1),
            position: Vec3::new(0.5, 0.4, -12.0),
        };
        (
            model,
            camera,
            CameraIntrinsics::new(800.0, 780.0, 320.0, 240.0).unwrap(),
        )
    }

    fn locus_of(
        model: &EllipsoidModel,
        camera: &CameraPose,
        intr: &CameraIntrinsics,
    ) -> TriaxialLocus {
        let obs = project_ellipsoid(model, camera, intr).unwrap();
        let cone = backprojection_cone(&obs, intr).unwrap();
        TriaxialLocus::new(&model.radii, &cone, 1e-7).unwrap()
    }

    #[test]
    fn ground_truth_m_is_feasible() {
        let (model, camera, intr) = scene([4.0, 2.0, 1.0]);
        let locus = locus_of(&model, &camera, &intr);
        let gt = ground_truth_pose(&model, &camera);
        assert!(locus.feasible.contains(locus.m_of(&gt), 1e-10));
    }

    #[test]
    fn sixteen_poses_contain_truth() {
        let (model, camera, intr) = scene([4.0, 2.0, 1.0]);
        let locus = locus_of(&model, &camera, &intr);
        let gt = ground_truth_pose(&model, &camera);
        let m = locus.m_of(&gt);
        let poses = locus.poses_at(m).unwrap();
        assert_eq!(poses.len(), 16);
        for p in &poses {
            assert!(p.pose.residual <= 1e-8, "residual {}", p.pose.residual);
        }
        let (_, best) = locus.nearest_pose(&gt).unwrap();
        let err = (best.pose.camera_position_in_ellipsoid_frame
            - gt.camera_position_in_ellipsoid_frame)
            .norm();
        assert!(err < 1e-7, "position error {err}");
        assert!(rotation_angle_between(&best.pose.camera_rotation, &gt.camera_rotation) < 1e-7);
    }

    #[test]
    fn positions_are_reflections() {
        let (model, camera, intr) = scene([3.0, 1.5, 0.7]);
        let locus = locus_of(&model, &camera, &intr);
        let &(lo, hi) = locus.feasible.intervals.first().unwrap();
        let p = locus.positions_at(0.5 * (lo + hi)).unwrap();
        for (k, pk) in p.iter().enumerate() {
            let q = Vec3::from_fn(|i, _| if k >> i & 1 == 1 { -p[0][i] } else { p[0][i] });
            assert!((q - pk).norm() < 1e-14);
        }
    }

    #[test]
    fn infeasible_m_rejected() {
        let (model, camera, intr) = scene([4.0, 2.0, 1.0]);
        let locus = locus_of(&model, &camera, &intr);
        let lo = locus.feasible.intervals[0].0;
        assert_eq!(
            locus.poses_at(lo - 1.0).unwrap_err(),
            Error::InfeasibleM(lo - 1.0)
        );
    }
}
