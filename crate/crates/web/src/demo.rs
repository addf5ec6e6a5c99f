//! Target-independent logic behind the browser exports.

use serde::{Deserialize, Serialize};

use p1e_core::cone::{backprojection_cone, CameraIntrinsics};
use p1e_core::conic::EllipseObservation;
use p1e_core::geometry::{
    rotation_from_euler_zyx, EllipsoidModel, Mat3, Rotation3, Tolerances, Vec3,
};
use p1e_core::solver::{sample_locus as sample, solve_with_cone, SolutionLocus};
use p1e_core::synth::{project_ellipsoid, CameraPose};

/// Scene as set up on the page. The camera looks at the ellipsoid center.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct View {
    pub radii: [f64; 3],
    pub center: [f64; 3],
    /// Yaw, pitch, roll of the ellipsoid, degrees.
    pub euler_deg: [f64; 3],
    pub camera: [f64; 3],
    /// `fx, fy, cx, cy`.
    pub intrinsics: [f64; 4],
}

struct Setup {
    model: EllipsoidModel,
    camera: CameraPose,
    intr: CameraIntrinsics,
    obs: EllipseObservation,
}

fn look_at(eye: &Vec3, target: &Vec3) -> Result<Rotation3, String> {
    let z = (target - eye)
        .try_normalize(1e-12)
        .ok_or("camera sits on the ellipsoid center")?;
    let helper = if z.z.abs() < 0.9 {
        Vec3::z()
    } else {
        Vec3::x()
    };
    let x = z.cross(&helper).normalize();
    let y = z.cross(&x);
    Ok(Rotation3::from_matrix_unchecked(Mat3::from_columns(&[
        x, y, z,
    ])))
}

fn setup(view_json: &str) -> Result<Setup, String> {
    let v: View = serde_json::from_str(view_json).map_err(|e| e.to_string())?;
    let [yaw, pitch, roll] = v.euler_deg.map(f64::to_radians);
    let model = EllipsoidModel::new(
        Vec3::from(v.center),
        rotation_from_euler_zyx(yaw, pitch, roll),
        v.radii,
    )
    .map_err(|e| e.to_string())?;
    let eye = Vec3::from(v.camera);
    let camera = CameraPose {
        rotation: look_at(&eye, &model.center)?,
        position: eye,
    };
    let [fx, fy, cx, cy] = v.intrinsics;
    let intr = CameraIntrinsics::new(fx, fy, cx, cy).map_err(|e| e.to_string())?;
    let obs = project_ellipsoid(&model, &camera, &intr).map_err(|e| e.to_string())?;
    Ok(Setup {
        model,
        camera,
        intr,
        obs,
    })
}

fn solve(s: &Setup) -> Result<SolutionLocus, String> {
    let cone = backprojection_cone(&s.obs, &s.intr).map_err(|e| e.to_string())?;
    solve_with_cone(&cone, &s.model.radii, &Tolerances::default()).map_err(|e| e.to_string())
}

#[derive(Debug, Serialize)]
pub struct Projection {
    pub center: [f64; 2],
    pub semi_axes: [f64; 2],
    pub angle: f64,
    pub outline: Vec<[f64; 2]>,
}

pub fn project(view_json: &str, outline_points: usize) -> Result<String, String> {
    let s = setup(view_json)?;
    let n = outline_points.max(3);
    let outline = (0..n)
        .map(|k| {
            s.obs
                .boundary_point(std::f64::consts::TAU * k as f64 / n as f64)
        })
        .collect();
    let p = Projection {
        center: s.obs.center,
        semi_axes: s.obs.semi_axes,
        angle: s.obs.angle,
        outline,
    };
    Ok(serde_json::to_string(&p).expect("projection serializes"))
}

#[derive(Debug, Serialize)]
pub struct LocusView {
    pub case: &'static str,
    /// World camera centers, one list per branch, in parameter order.
    pub branches: Vec<Vec<[f64; 3]>>,
    pub center: [f64; 3],
    pub camera: [f64; 3],
}

pub fn sample_locus(view_json: &str, samples: usize) -> Result<String, String> {
    let s = setup(view_json)?;
    let locus = solve(&s)?;
    let mut branches = vec![Vec::new(); locus.branch_count()];
    for p in sample(&locus, samples).map_err(|e| e.to_string())? {
        let e = s.model.center + s.model.rotation * p.pose.camera_position_in_ellipsoid_frame;
        branches[p.branch].push(e.into());
    }
    let v = LocusView {
        case: locus.case_name(),
        branches,
        center: s.model.center.into(),
        camera: s.camera.position.into(),
    };
    Ok(serde_json::to_string(&v).expect("locus serializes"))
}

#[derive(Debug, Serialize)]
pub struct Curves {
    pub m: Vec<f64>,
    /// Squared ellipsoid-frame camera coordinates at each `m`.
    pub components: [Vec<f64>; 3],
    pub intervals: Vec<(f64, f64)>,
    /// `m` of the camera that produced the view.
    pub truth: f64,
}

pub fn feasibility_curves(view_json: &str, points: usize) -> Result<String, String> {
    let s = setup(view_json)?;
    let SolutionLocus::Triaxial(t) = solve(&s)? else {
        return Err("feasibility curves exist for triaxial ellipsoids only".into());
    };
    let truth = t.m_of(&p1e_core::synth::ground_truth_pose(&s.model, &s.camera));
    let lo = t
        .feasible
        .intervals
        .iter()
        .map(|iv| iv.0)
        .fold(truth, f64::min);
    let lo = 1.5 * lo.min(-1e-3);
    let n = points.max(2);
    let m: Vec<f64> = (0..n)
        .map(|k| lo * (1.0 - k as f64 / (n - 1) as f64))
        .collect();
    let components = [0, 1, 2].map(|i| {
        m.iter()
            .map(|&x| t.feasible.components[i].eval(x))
            .collect()
    });
    let c = Curves {
        m,
        components,
        intervals: t.feasible.intervals.clone(),
        truth,
    };
    Ok(serde_json::to_string(&c).expect("curves serialize"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    const VIEW: &str = r#"{"radii":[3,2,1],"center":[0,0,0],"euler_deg":[20,10,-5],
        "camera":[4,-6,9],"intrinsics":[800,800,320,240]}"#;

    #[test]
    fn projection_outline_is_on_ellipse() {
        let v: Value = serde_json::from_str(&project(VIEW, 64).unwrap()).unwrap();
        let c = [
            v["center"][0].as_f64().unwrap(),
            v["center"][1].as_f64().unwrap(),
        ];
        // the principal point is where the camera looks, i.e. the ellipsoid center
        assert!((c[0] - 320.0).abs() < 50.0 && (c[1] - 240.0).abs() < 50.0);
        let pts = v["outline"].as_array().unwrap();
        assert_eq!(pts.len(), 64);
        let obs = EllipseObservation::new(
            c,
            [
                v["semi_axes"][0].as_f64().unwrap(),
                v["semi_axes"][1].as_f64().unwrap(),
            ],
            v["angle"].as_f64().unwrap(),
        )
        .unwrap();
        let conic = obs.to_conic();
        for p in pts {
            let x = Vec3::new(p[0].as_f64().unwrap(), p[1].as_f64().unwrap(), 1.0);
            assert!((x.transpose() * conic * x)[0].abs() < 1e-6 * conic.norm());
        }
    }

    #[test]
    fn locus_passes_through_camera() {
        let v: Value = serde_json::from_str(&sample_locus(VIEW, 4000).unwrap()).unwrap();
        assert_eq!(v["case"], "triaxial");
        let branches = v["branches"].as_array().unwrap();
        assert_eq!(branches.len(), 16);
        let best = branches
            .iter()
            .flat_map(|b| b.as_array().unwrap())
            .map(|p| {
                let q = Vec3::new(
                    p[0].as_f64().unwrap(),
                    p[1].as_f64().unwrap(),
                    p[2].as_f64().unwrap(),
                );
                (q - Vec3::new(4.0, -6.0, 9.0)).norm()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(best < 0.05, "closest sample {best}");
    }

    #[test]
    fn curves_are_non_negative_inside_intervals() {
        let v: Value = serde_json::from_str(&feasibility_curves(VIEW, 500).unwrap()).unwrap();
        let m: Vec<f64> = v["m"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_f64().unwrap())
            .collect();
        let ivs: Vec<(f64, f64)> = v["intervals"]
            .as_array()
            .unwrap()
            .iter()
            .map(|iv| (iv[0].as_f64().unwrap(), iv[1].as_f64().unwrap()))
            .collect();
        let truth = v["truth"].as_f64().unwrap();
        assert!(ivs
            .iter()
            .any(|&(a, b)| a - 1e-9 <= truth && truth <= b + 1e-9));
        for (k, &x) in m.iter().enumerate() {
            let inside = ivs.iter().any(|&(a, b)| a < x && x < b);
            let all = (0..3).all(|i| v["components"][i][k].as_f64().unwrap() >= 0.0);
            if inside {
                assert!(all, "m {x}");
            }
        }
    }

    #[test]
    fn spheroid_has_no_curves_but_has_a_locus() {
        let view = VIEW.replace("[3,2,1]", "[2,2,1]");
        assert!(feasibility_curves(&view, 10).is_err());
        let v: Value = serde_json::from_str(&sample_locus(&view, 100).unwrap()).unwrap();
        assert_eq!(v["case"], "spheroid-noncircular");
        assert_eq!(v["branches"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn bad_views_are_errors() {
        assert!(project("{}", 10).is_err());
        assert!(project(&VIEW.replace("[4,-6,9]", "[0,0,0]"), 10).is_err());
        assert!(project(&VIEW.replace("[3,2,1]", "[3,-2,1]"), 10).is_err());
    }
}
