//! Ground-truth scenes, forward projection and observation noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::cone::CameraIntrinsics;
use crate::conic::EllipseObservation;
use crate::decoupled::PoseSolution;
use crate::error::{Error, Result};
use crate::geometry::{axis_rotation, EllipsoidModel, Rotation3, SymMat3, Vec3};

/// Camera-to-world rotation and camera center in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub rotation: Rotation3,
    pub position: Vec3,
}

impl CameraPose {
    pub fn identity() -> Self {
        Self {
            rotation: Rotation3::identity(),
            position: Vec3::zeros(),
        }
    }
}

/// Ellipsoid center and matrix in the camera frame, plus `camR_ell`.
pub fn ellipsoid_in_camera(
    model: &EllipsoidModel,
    camera: &CameraPose,
) -> (Vec3, SymMat3, Rotation3) {
    let rt = camera.rotation.inverse();
    let c = rt * (model.center - camera.position);
    let r_cam_ell = rt * model.rotation;
    let a = crate::geometry::diag_matrix(&model.radii).conjugate(r_cam_ell.matrix());
    (c, a, r_cam_ell)
}

/// The camera pose expressed in the ellipsoid frame.
pub fn ground_truth_pose(model: &EllipsoidModel, camera: &CameraPose) -> PoseSolution {
    let r_ell_w = model.rotation.inverse();
    PoseSolution {
        camera_position_in_ellipsoid_frame: r_ell_w * (camera.position - model.center),
        camera_rotation: r_ell_w * camera.rotation,
        residual: 0.0,
    }
}

/// Whether the ellipsoid lies strictly in front of the image plane and the
/// camera center is outside it.
pub fn visible(c_cam: &Vec3, a_cam: &SymMat3) -> bool {
    let Some(ai) = a_cam.inverse() else {
        return false;
    };
    // support of the ellipsoid along the optical axis
    let half_depth = ai.zz.max(0.0).sqrt();
    c_cam.z > half_depth && a_cam.quad(c_cam) > 1.0
}

/// Outline of the ellipsoid in the image, from the dual conic
/// `C* = A^-1 - C C^T` on the normalized plane.
pub fn project_ellipsoid(
    model: &EllipsoidModel,
    camera: &CameraPose,
    intr: &CameraIntrinsics,
) -> Result<EllipseObservation> {
    crate::geometry::check_radii(&model.radii)?;
    let (c, a, _) = ellipsoid_in_camera(model, camera);
    if !visible(&c, &a) {
        return Err(Error::BehindCamera);
    }
    let ai = a.inverse().ok_or(Error::BehindCamera)?;
    let dual = ai.sub(&SymMat3::outer(&c));
    let primal = dual.inverse().ok_or(Error::BehindCamera)?.to_matrix();
    let ki = intr.inverse_matrix();
    let conic = ki.transpose() * primal * ki;
    EllipseObservation::from_conic(&conic).map_err(|_| Error::BehindCamera)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeClass {
    Triaxial,
    Spheroid,
    Sphere,
    /// Spheroid seen along its revolution axis (circular cone).
    SpheroidOnAxis,
}

impl ShapeClass {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "triaxial" => Some(Self::Triaxial),
            "spheroid" => Some(Self::Spheroid),
            "sphere" => Some(Self::Sphere),
            "spheroid-axis" | "spheroid_on_axis" => Some(Self::SpheroidOnAxis),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub classes: Vec<ShapeClass>,
    pub radius_range: (f64, f64),
    pub distance_range: (f64, f64),
    /// Half-angle of the cone of view directions for object centers, radians.
    pub half_fov: f64,
    pub intrinsics: CameraIntrinsics,
    /// Smallest pairwise relative radius gap for non-repeated axes.
    pub min_radius_gap: f64,
}

impl SceneConfig {
    pub fn uniform(class: ShapeClass, objects: usize) -> Self {
        Self {
            classes: vec![class; objects],
            ..Self::default()
        }
    }
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            classes: vec![ShapeClass::Triaxial],
            radius_range: (0.2, 5.0),
            distance_range: (2.0, 20.0),
            half_fov: 25f64.to_radians(),
            intrinsics: CameraIntrinsics {
                fx: 800.0,
                fy: 800.0,
                cx: 320.0,
                cy: 240.0,
            },
            min_radius_gap: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub ellipsoids: Vec<EllipsoidModel>,
    pub classes: Vec<ShapeClass>,
    pub camera: CameraPose,
    pub intrinsics: CameraIntrinsics,
    pub seed: u64,
}

impl Scene {
    pub fn observations(&self) -> Result<Vec<EllipseObservation>> {
        self.ellipsoids
            .iter()
            .map(|m| project_ellipsoid(m, &self.camera, &self.intrinsics))
            .collect()
    }
}

pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation3 {
    let q: [f64; 4] = [0; 4].map(|_| StandardNormal.sample(rng));
    let q = nalgebra::Quaternion::new(q[0], q[1], q[2], q[3]);
    nalgebra::UnitQuaternion::from_quaternion(q).to_rotation_matrix()
}

fn random_radii<R: Rng + ?Sized>(
    rng: &mut R,
    class: ShapeClass,
    lo: f64,
    hi: f64,
    gap: f64,
) -> Option<[f64; 3]> {
    let mut draw = || lo * (hi / lo).powf(rng.random::<f64>());
    let apart = |a: f64, b: f64| (a - b).abs() / a.max(b) >= gap;
    for _ in 0..1000 {
        let r = match class {
            ShapeClass::Triaxial => {
                let r = [draw(), draw(), draw()];
                if !(apart(r[0], r[1]) && apart(r[0], r[2]) && apart(r[1], r[2])) {
                    continue;
                }
                r
            }
            ShapeClass::Spheroid | ShapeClass::SpheroidOnAxis => {
                let (a, c) = (draw(), draw());
                if !apart(a, c) {
                    continue;
                }
                [a, a, c]
            }
            ShapeClass::Sphere => {
                let a = draw();
                [a, a, a]
            }
        };
        return Some(r);
    }
    None
}

/// Deterministic in `seed`; every object is visible and exterior to the camera.
pub fn synth_scene(config: &SceneConfig, seed: u64) -> Result<Scene> {
    let (rlo, rhi) = config.radius_range;
    let (dlo, dhi) = config.distance_range;
    if !(rlo > 0.0 && rhi >= rlo && dlo > 0.0 && dhi >= dlo) {
        return Err(Error::ConfigError(
            "radius/distance ranges must be positive and ordered".into(),
        ));
    }
    if !(config.half_fov > 0.0 && config.half_fov < 1.4) {
        return Err(Error::ConfigError(
            "half field of view must be in (0, 1.4) rad".into(),
        ));
    }
    if config.classes.is_empty() {
        return Err(Error::ConfigError("no objects requested".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let camera = CameraPose {
        rotation: random_rotation(&mut rng),
        position: Vec3::new(
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(-5.0..5.0),
        ),
    };
    let mut ellipsoids = Vec::with_capacity(config.classes.len());
    for &class in &config.classes {
        let mut placed = None;
        for _ in 0..1000 {
            let dist = rng.random_range(dlo..=dhi);
            let cos_t = 1.0 - rng.random::<f64>() * (1.0 - config.half_fov.cos());
            let phi = rng.random::<f64>() * std::f64::consts::TAU;
            let sin_t = (1.0 - cos_t * cos_t).sqrt();
            let c_cam = Vec3::new(sin_t * phi.cos(), sin_t * phi.sin(), cos_t) * dist;
            // keep every radius well inside the distance so the object clears the image plane
            let cap = rhi.min(0.6 * c_cam.z);
            if cap < rlo {
                continue;
            }
            let Some(radii) = random_radii(&mut rng, class, rlo, cap, config.min_radius_gap) else {
                continue;
            };
            let r_cam_ell = match class {
                ShapeClass::SpheroidOnAxis => {
                    // revolution axis (index 2) along the line of sight
                    let z = c_cam.normalize();
                    let base = Rotation3::rotation_between(&Vec3::z(), &z)
                        .unwrap_or_else(|| axis_rotation(&Vec3::x(), std::f64::consts::PI));
                    base * axis_rotation(&Vec3::z(), rng.random::<f64>() * std::f64::consts::TAU)
                }
                _ => random_rotation(&mut rng),
            };
            let a_cam = crate::geometry::diag_matrix(&radii).conjugate(r_cam_ell.matrix());
            if !visible(&c_cam, &a_cam) {
                continue;
            }
            placed = Some(EllipsoidModel {
                center: camera.position + camera.rotation * c_cam,
                rotation: camera.rotation * r_cam_ell,
                radii,
            });
            break;
        }
        ellipsoids.push(placed.ok_or_else(|| {
            Error::ConfigError("could not place an object with the requested bounds".into())
        })?);
    }
    Ok(Scene {
        ellipsoids,
        classes: config.classes.clone(),
        camera,
        intrinsics: config.intrinsics,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Pixels, per coordinate.
    pub center_sigma: f64,
    /// Relative, per semi-axis.
    pub axes_sigma: f64,
    /// Radians.
    pub angle_sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = |s: f64| s >= 0.0 && s.is_finite();
        if ok(self.center_sigma) && ok(self.axes_sigma) && ok(self.angle_sigma) {
            Ok(())
        } else {
            Err(Error::ConfigError(
                "noise sigmas must be finite and non-negative".into(),
            ))
        }
    }
}

pub fn perturb_observation(
    obs: &EllipseObservation,
    spec: &NoiseSpec,
) -> Result<EllipseObservation> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    perturb_observation_with(obs, spec, &mut rng)
}

/// Same as [`perturb_observation`] but drawing from a caller-owned stream.
pub fn perturb_observation_with<R: Rng + ?Sized>(
    obs: &EllipseObservation,
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<EllipseObservation> {
    spec.validate()?;
    let mut g = |s: f64| -> f64 {
        if s == 0.0 {
            0.0
        } else {
            Normal::new(0.0, s).unwrap().sample(rng)
        }
    };
    let center = [
        obs.center[0] + g(spec.center_sigma),
        obs.center[1] + g(spec.center_sigma),
    ];
    let floor = 1e-9 * obs.semi_axes[0];
    let axes = [
        (obs.semi_axes[0] * (1.0 + g(spec.axes_sigma))).max(floor),
        (obs.semi_axes[1] * (1.0 + g(spec.axes_sigma))).max(floor),
    ];
    let angle = obs.angle + g(spec.angle_sigma);
    EllipseObservation::new(center, axes, angle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{classify_ellipsoid, rotation_from_euler_zyx, EllipsoidClass};

    #[test]
    fn axial_sphere_projects_to_circle() {
        let m =
            EllipsoidModel::new(Vec3::new(0.0, 0.0, 2.0), Rotation3::identity(), [1.0; 3]).unwrap();
        let e = project_ellipsoid(&m, &CameraPose::identity(), &CameraIntrinsics::normalized())
            .unwrap();
        let t = 30f64.to_radians().tan();
        assert!(e.center[0].abs() < 1e-15 && e.center[1].abs() < 1e-15);
        assert!((e.semi_axes[0] - t).abs() < 1e-12 && (e.semi_axes[1] - t).abs() < 1e-12);
    }

    #[test]
    fn receding_ellipsoid_shrinks() {
        let intr = CameraIntrinsics::normalized();
        let rot = rotation_from_euler_zyx(0.3, 0.4, 0.5);
        let mut prev = [f64::INFINITY; 2];
        for k in 0..20 {
            let z = 6.0 + k as f64;
            let m = EllipsoidModel::new(Vec3::new(0.0, 0.0, z), rot, [4.0, 2.0, 1.0]).unwrap();
            let e = project_ellipsoid(&m, &CameraPose::identity(), &intr).unwrap();
            assert!(e.semi_axes[0] < prev[0] && e.semi_axes[1] < prev[1]);
            prev = e.semi_axes;
        }
    }

    #[test]
    fn behind_camera_rejected() {
        let m = EllipsoidModel::new(Vec3::new(0.0, 0.0, -3.0), Rotation3::identity(), [1.0; 3])
            .unwrap();
        let r = project_ellipsoid(&m, &CameraPose::identity(), &CameraIntrinsics::normalized());
        assert_eq!(r, Err(Error::BehindCamera));
        // straddling the image plane
        let m =
            EllipsoidModel::new(Vec3::new(0.0, 0.0, 0.5), Rotation3::identity(), [1.0; 3]).unwrap();
        let r = project_ellipsoid(&m, &CameraPose::identity(), &CameraIntrinsics::normalized());
        assert_eq!(r, Err(Error::BehindCamera));
    }

    #[test]
    fn deterministic_scenes() {
        let cfg = SceneConfig::uniform(ShapeClass::Triaxial, 6);
        let a = synth_scene(&cfg, 0).unwrap();
        let b = synth_scene(&cfg, 0).unwrap();
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        assert_eq!(a.ellipsoids.len(), 6);
        let c = synth_scene(&cfg, 1).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sphere_mix_classifies() {
        let cfg = SceneConfig::uniform(ShapeClass::Sphere, 2);
        let s = synth_scene(&cfg, 3).unwrap();
        for m in &s.ellipsoids {
            assert_eq!(classify_ellipsoid(&m.radii, 1e-7), EllipsoidClass::Sphere);
        }
    }

    #[test]
    fn zero_noise_is_identity() {
        let obs = EllipseObservation::new([10.0, 20.0], [30.0, 12.0], 1.0).unwrap();
        let spec = NoiseSpec {
            center_sigma: 0.0,
            axes_sigma: 0.0,
            angle_sigma: 0.0,
            seed: 9,
        };
        assert_eq!(perturb_observation(&obs, &spec).unwrap(), obs);
        let bad = NoiseSpec {
            center_sigma: -1.0,
            ..spec
        };
        assert!(perturb_observation(&obs, &bad).is_err());
    }

    #[test]
    fn noise_is_seeded() {
        let obs = EllipseObservation::new([10.0, 20.0], [30.0, 12.0], 1.0).unwrap();
        let spec = NoiseSpec {
            center_sigma: 1.0,
            axes_sigma: 0.01,
            angle_sigma: 0.01,
            seed: 4,
        };
        assert_eq!(
            perturb_observation(&obs, &spec).unwrap(),
            perturb_observation(&obs, &spec).unwrap()
        );
    }
}
