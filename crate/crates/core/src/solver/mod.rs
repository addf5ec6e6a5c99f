//! The full one-parameter solution and its dispatch by ellipsoid and cone class.

pub mod feasible;
pub mod sphere;
pub mod spheroid;
pub mod triaxial;

use std::f64::consts::TAU;

use crate::cone::{backprojection_cone, CameraIntrinsics};
use crate::conic::EllipseObservation;
use crate::decoupled::PoseSolution;
use crate::error::{Error, Result};
use crate::geometry::{classify_ellipsoid, ConeClass, ConeQuadric, EllipsoidClass, Tolerances};

pub use feasible::FeasibleM;
pub use sphere::SphereLocus;
pub use spheroid::{SpheroidCircularLocus, SpheroidNonCircularLocus};
pub use triaxial::{pose_distance, TriaxialLocus, TriaxialPose};

#[allow(clippy::large_enum_variant)]
#[derive(Debug, Clone, PartialEq)]
pub enum SolutionLocus {
    Triaxial(TriaxialLocus),
    SpheroidNonCircular(SpheroidNonCircularLocus),
    SpheroidCircular(SpheroidCircularLocus),
    Sphere(SphereLocus),
}

/// One pose of a locus. `param` is `m` for the triaxial case, the free
/// angle for spheroids and the sample index for the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocusSample {
    pub branch: usize,
    pub param: f64,
    pub pose: PoseSolution,
}

impl SolutionLocus {
    pub fn case_name(&self) -> &'static str {
        match self {
            SolutionLocus::Triaxial(_) => "triaxial",
            SolutionLocus::SpheroidNonCircular(_) => "spheroid-noncircular",
            SolutionLocus::SpheroidCircular(_) => "spheroid-circular",
            SolutionLocus::Sphere(_) => "sphere",
        }
    }

    pub fn radii(&self) -> [f64; 3] {
        match self {
            SolutionLocus::Triaxial(l) => l.radii,
            SolutionLocus::SpheroidNonCircular(l) => l.radii,
            SolutionLocus::SpheroidCircular(l) => l.radii,
            SolutionLocus::Sphere(l) => l.radii(),
        }
    }

    pub fn cone(&self) -> &ConeQuadric {
        match self {
            SolutionLocus::Triaxial(l) => &l.cone,
            SolutionLocus::SpheroidNonCircular(l) => &l.cone,
            SolutionLocus::SpheroidCircular(l) => &l.cone,
            SolutionLocus::Sphere(l) => &l.cone,
        }
    }

    /// `sigma`, which for the triaxial case depends on `m`.
    pub fn sigma(&self) -> Option<f64> {
        match self {
            SolutionLocus::Triaxial(_) => None,
            SolutionLocus::SpheroidNonCircular(l) => Some(l.sigma),
            SolutionLocus::SpheroidCircular(l) => Some(l.sigma),
            SolutionLocus::Sphere(l) => Some(l.sigma),
        }
    }

    pub fn branch_count(&self) -> usize {
        match self {
            SolutionLocus::Triaxial(_) => 16,
            SolutionLocus::SpheroidNonCircular(_) => SpheroidNonCircularLocus::BRANCHES,
            SolutionLocus::SpheroidCircular(_) => SpheroidCircularLocus::BRANCHES,
            SolutionLocus::Sphere(_) => 1,
        }
    }

    /// Pose on a one-parameter branch; `None` for the sphere, whose locus is
    /// two-dimensional in position, and for infeasible triaxial `m`.
    pub fn pose_at(&self, branch: usize, param: f64) -> Option<PoseSolution> {
        match self {
            SolutionLocus::Triaxial(l) => l.branch_pose(branch, param),
            SolutionLocus::SpheroidNonCircular(l) => Some(l.pose(branch, param)),
            SolutionLocus::SpheroidCircular(l) => Some(l.pose(branch, param)),
            SolutionLocus::Sphere(_) => None,
        }
    }

    /// Closest member to a known pose.
    pub fn nearest_pose(&self, target: &PoseSolution) -> Option<LocusSample> {
        match self {
            SolutionLocus::Triaxial(l) => l.nearest_pose(target).map(|(m, p)| LocusSample {
                branch: p.branch(),
                param: m,
                pose: p.pose,
            }),
            SolutionLocus::SpheroidNonCircular(l) => {
                let (branch, param, pose) = l.nearest_pose(target);
                Some(LocusSample {
                    branch,
                    param,
                    pose,
                })
            }
            SolutionLocus::SpheroidCircular(l) => {
                let (branch, param, pose) = l.nearest_pose(target);
                Some(LocusSample {
                    branch,
                    param,
                    pose,
                })
            }
            SolutionLocus::Sphere(l) => Some(LocusSample {
                branch: 0,
                param: f64::NAN,
                pose: l.nearest_pose(target),
            }),
        }
    }
}

/// Classifies both quadrics and builds the matching locus.
pub fn solve_with_cone(
    cone: &ConeQuadric,
    radii: &[f64; 3],
    tol: &Tolerances,
) -> Result<SolutionLocus> {
    crate::geometry::check_radii(radii)?;
    let ell = classify_ellipsoid(radii, tol.cluster);
    let cls = cone.class(tol.cluster);
    match (ell, cls) {
        (EllipsoidClass::Triaxial, ConeClass::Circular { .. })
        | (EllipsoidClass::Sphere, ConeClass::NonCircularElliptic) => {
            Err(Error::ImpossibleCoOccurrence {
                ellipsoid: ell.name(),
                cone: cls.name(),
            })
        }
        (EllipsoidClass::Triaxial, ConeClass::NonCircularElliptic) => Ok(SolutionLocus::Triaxial(
            TriaxialLocus::new(radii, cone, tol.cluster)?,
        )),
        (EllipsoidClass::Spheroid { .. }, ConeClass::NonCircularElliptic) => {
            Ok(SolutionLocus::SpheroidNonCircular(
                SpheroidNonCircularLocus::new(radii, cone, tol.cluster)?,
            ))
        }
        (EllipsoidClass::Spheroid { .. }, ConeClass::Circular { .. }) => Ok(
            SolutionLocus::SpheroidCircular(SpheroidCircularLocus::new(radii, cone, tol.cluster)?),
        ),
        (EllipsoidClass::Sphere, ConeClass::Circular { .. }) => {
            let r = (radii[0] + radii[1] + radii[2]) / 3.0;
            Ok(SolutionLocus::Sphere(SphereLocus::new(
                r,
                cone,
                tol.cluster,
            )?))
        }
    }
}

/// Locus of camera poses explaining `obs` for an ellipsoid with `radii`.
pub fn solve_p1e(
    obs: &EllipseObservation,
    intr: &CameraIntrinsics,
    radii: &[f64; 3],
    tol: &Tolerances,
) -> Result<SolutionLocus> {
    let cone = backprojection_cone(obs, intr)?;
    solve_with_cone(&cone, radii, tol)
}

/// Materializes `n` parameter values per branch: triaxial `m` uniformly by
/// arc length over the feasible intervals, spheroid angles uniformly on the
/// circle, sphere poses from a Fibonacci sequence.
pub fn sample_locus(locus: &SolutionLocus, n: usize) -> Result<Vec<LocusSample>> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "sample count must be at least 1".into(),
        ));
    }
    let angles = (0..n).map(|k| TAU * k as f64 / n as f64);
    match locus {
        SolutionLocus::Triaxial(l) => {
            if l.feasible.intervals.is_empty() {
                return Err(Error::EmptyLocus);
            }
            let len = l.feasible.total_length();
            let mut out = Vec::with_capacity(16 * n);
            for k in 0..n {
                let m = l
                    .feasible
                    .at_arc((k as f64 + 0.5) * len / n as f64)
                    .ok_or(Error::EmptyLocus)?;
                out.extend(l.poses_at(m)?.into_iter().map(|p| LocusSample {
                    branch: p.branch(),
                    param: m,
                    pose: p.pose,
                }));
            }
            Ok(out)
        }
        SolutionLocus::SpheroidNonCircular(l) => Ok((0..SpheroidNonCircularLocus::BRANCHES)
            .flat_map(|b| {
                angles.clone().map(move |t| LocusSample {
                    branch: b,
                    param: t,
                    pose: l.pose(b, t),
                })
            })
            .collect()),
        SolutionLocus::SpheroidCircular(l) => Ok((0..SpheroidCircularLocus::BRANCHES)
            .flat_map(|b| {
                angles.clone().map(move |t| LocusSample {
                    branch: b,
                    param: t,
                    pose: l.pose(b, t),
                })
            })
            .collect()),
        SolutionLocus::Sphere(l) => Ok((0..n)
            .map(|i| LocusSample {
                branch: 0,
                param: i as f64,
                pose: l.sample(i, n),
            })
            .collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rotation_from_euler_zyx, EllipsoidModel, Rotation3, SymMat3, Vec3};
    use crate::synth::{ground_truth_pose, project_ellipsoid, CameraPose};

    fn intr() -> CameraIntrinsics {
        CameraIntrinsics::new(800.0, 800.0, 320.0, 240.0).unwrap()
    }

    #[test]
    fn impossible_pairs() {
        let tol = Tolerances::default();
        let circle = EllipseObservation::new([320.0, 240.0], [50.0, 50.0], 0.0).unwrap();
        let e = solve_p1e(&circle, &intr(), &[1.0, 2.0, 3.0], &tol).unwrap_err();
        assert!(matches!(e, Error::ImpossibleCoOccurrence { .. }));
        let ellipse = EllipseObservation::new([300.0, 200.0], [80.0, 40.0], 0.3).unwrap();
        let e = solve_p1e(&ellipse, &intr(), &[1.0, 1.0, 1.0], &tol).unwrap_err();
        assert!(matches!(e, Error::ImpossibleCoOccurrence { .. }));
    }

    #[test]
    fn stability_scene_end_to_end() {
        let d = |x: f64| x.to_radians();
        let model = EllipsoidModel::new(Vec3::zeros(), Rotation3::identity(), [4.0, 2.0, 1.999999])
            .unwrap();
        let camera = CameraPose {
            rotation: rotation_from_euler_zyx(d(-45.0), d(10.0), d(10.0)),
            position: Vec3::new(-1.0, -1.0, -4.0),
        };
        let intr = CameraIntrinsics::normalized();
        let obs = project_ellipsoid(&model, &camera, &intr).unwrap();
        let locus = solve_p1e(&obs, &intr, &model.radii, &Tolerances::default()).unwrap();
        assert_eq!(locus.case_name(), "triaxial");
        let gt = ground_truth_pose(&model, &camera);
        let best = locus.nearest_pose(&gt).unwrap();
        let err = (best.pose.camera_position_in_ellipsoid_frame
            - gt.camera_position_in_ellipsoid_frame)
            .norm();
        assert!(err < 1e-5, "position error {err}");
        assert!(best.pose.residual < 1e-8, "residual {}", best.pose.residual);
    }

    #[test]
    fn sampling_residuals_and_counts() {
        let camera = CameraPose {
            rotation: rotation_from_euler_zyx(0.1, -0.1, 0.2),
            position: Vec3::new(0.2, 0.1, -10.0),
        };
        for radii in [[4.0, 2.0, 1.0], [2.0, 2.0, 5.0], [1.5, 1.5, 1.5]] {
            let model = EllipsoidModel::new(
                Vec3::new(0.5, -0.3, 0.0),
                rotation_from_euler_zyx(0.3, 0.4, 0.5),
                radii,
            )
            .unwrap();
            let obs = project_ellipsoid(&model, &camera, &intr()).unwrap();
            let locus = solve_p1e(&obs, &intr(), &radii, &Tolerances::default()).unwrap();
            let samples = sample_locus(&locus, 50).unwrap();
            let expected = match locus {
                SolutionLocus::Triaxial(_) => 16 * 50,
                SolutionLocus::Sphere(_) => 50,
                _ => locus.branch_count() * 50,
            };
            assert_eq!(samples.len(), expected, "{}", locus.case_name());
            for s in &samples {
                assert!(
                    s.pose.residual <= 1e-8,
                    "{} residual {}",
                    locus.case_name(),
                    s.pose.residual
                );
            }
            assert!(!sample_locus(&locus, 1).unwrap().is_empty());
            assert!(sample_locus(&locus, 0).is_err());
        }
    }

    #[test]
    fn sphere_samples_at_constant_distance() {
        let cone =
            ConeQuadric::new(Vec3::zeros(), SymMat3::from_diagonal([3.0, 3.0, -1.0])).unwrap();
        let locus = solve_with_cone(&cone, &[1.0, 1.0, 1.0], &Tolerances::default()).unwrap();
        for s in sample_locus(&locus, 100).unwrap() {
            assert!((s.pose.camera_position_in_ellipsoid_frame.norm() - 2.0).abs() < 1e-10);
        }
    }
}
