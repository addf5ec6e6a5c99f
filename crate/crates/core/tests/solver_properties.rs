use p1e_core::cone::{backprojection_cone, CameraIntrinsics};
use p1e_core::conic::EllipseObservation;
use p1e_core::cubic::Poly3;
use p1e_core::decoupled::PoseSolution;
use p1e_core::geometry::{
    diag_matrix, radii_eigenvalues, rotation_from_euler_zyx, ConeQuadric, EllipsoidModel,
    Rotation3, SymMat3, Tolerances, Vec3,
};
use p1e_core::solver::feasible::cone_frame_components;
use p1e_core::solver::{
    sample_locus, solve_p1e, SolutionLocus, SpheroidNonCircularLocus, TriaxialLocus,
};
use p1e_core::synth::{
    ground_truth_pose, project_ellipsoid, synth_scene, CameraPose, SceneConfig, ShapeClass,
};
use proptest::prelude::*;

fn triaxial_scene(seed: u64) -> (EllipsoidModel, CameraPose, CameraIntrinsics, TriaxialLocus) {
    let scene = synth_scene(&SceneConfig::uniform(ShapeClass::Triaxial, 1), seed).unwrap();
    let model = scene.ellipsoids[0];
    let obs = project_ellipsoid(&model, &scene.camera, &scene.intrinsics).unwrap();
    let cone = backprojection_cone(&obs, &scene.intrinsics).unwrap();
    let locus = TriaxialLocus::new(&model.radii, &cone, 1e-7).unwrap();
    (model, scene.camera, scene.intrinsics, locus)
}

/// World camera placing the ellipsoid so that its frame relation matches `pose`.
fn camera_from_pose(model: &EllipsoidModel, pose: &PoseSolution) -> CameraPose {
    CameraPose {
        rotation: model.rotation * pose.camera_rotation,
        position: model.center + model.rotation * pose.camera_position_in_ellipsoid_frame,
    }
}

fn ellipse_close(a: &EllipseObservation, b: &EllipseObservation, tol: f64) -> bool {
    let s = a.semi_axes[0];
    let center = (a.center[0] - b.center[0]).hypot(a.center[1] - b.center[1]) <= tol * s;
    let axes = (0..2).all(|i| (a.semi_axes[i] - b.semi_axes[i]).abs() <= tol * s);
    let elong = (a.semi_axes[0] - a.semi_axes[1]) / s;
    let mut dtheta = (a.angle - b.angle).rem_euclid(std::f64::consts::PI);
    dtheta = dtheta.min(std::f64::consts::PI - dtheta);
    center && axes && (elong < 1e-3 || dtheta * elong <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    // (d/m)(A^-1 - delta delta^T) has the spectrum of B'^-1 for feasible m
    #[test]
    fn feasible_m_reproduces_cone_spectrum(seed in 0u64..100_000, t in 0.01f64..0.99, pattern in 0usize..8) {
        let (model, _, _, locus) = triaxial_scene(seed);
        let &(lo, hi) = locus.feasible.intervals.first().unwrap();
        let m = lo + t * (hi - lo);
        let delta = locus.positions_at(m).unwrap()[pattern];
        let a_inv = diag_matrix(&model.radii).inverse().unwrap();
        let x = a_inv.sub(&SymMat3::outer(&delta)).scale(locus.d() / m);
        let (mut got, _) = x.eigen();
        let mut want = locus.cone.eigenvalues.map(|v| 1.0 / v);
        got.sort_by(|a, b| a.total_cmp(b));
        want.sort_by(|a, b| a.total_cmp(b));
        let scale = want.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for i in 0..3 {
            prop_assert!((got[i] - want[i]).abs() <= 1e-8 * scale, "{:?} vs {:?}", got, want);
        }
    }

    // every one of the sixteen poses projects the ellipsoid onto the observed ellipse
    #[test]
    fn sixteen_poses_reproject(seed in 0u64..100_000) {
        let (model, camera, intr, locus) = triaxial_scene(seed);
        let obs = project_ellipsoid(&model, &camera, &intr).unwrap();
        let gt = ground_truth_pose(&model, &camera);
        let poses = locus.poses_at(locus.m_of(&gt)).unwrap();
        prop_assert_eq!(poses.len(), 16);
        for p in &poses {
            prop_assert!(p.pose.residual <= 1e-8);
            let again = project_ellipsoid(&model, &camera_from_pose(&model, &p.pose), &intr).unwrap();
            prop_assert!(ellipse_close(&obs, &again, 1e-7), "{:?} vs {:?}", obs, again);
        }
    }

    // sampled triaxial poses all satisfy the alignment equation
    #[test]
    fn sampled_triaxial_residuals(seed in 0u64..100_000) {
        let (_, _, _, locus) = triaxial_scene(seed);
        for s in sample_locus(&SolutionLocus::Triaxial(locus), 25).unwrap() {
            prop_assert!(s.pose.residual <= 1e-8);
        }
    }
}

#[test]
fn ground_truth_m_inside_intervals_421() {
    let model = EllipsoidModel::new(
        Vec3::new(0.5, 0.2, 0.0),
        rotation_from_euler_zyx(0.3, 0.2, 0.1),
        [4.0, 2.0, 1.0],
    )
    .unwrap();
    let camera = CameraPose {
        rotation: rotation_from_euler_zyx(0.0, 0.1, 0.0),
        position: Vec3::new(0.0, 0.0, -15.0),
    };
    let intr = CameraIntrinsics::new(800.0, 800.0, 320.0, 240.0).unwrap();
    let obs = project_ellipsoid(&model, &camera, &intr).unwrap();
    let locus = solve_p1e(&obs, &intr, &model.radii, &Tolerances::default()).unwrap();
    let SolutionLocus::Triaxial(t) = &locus else {
        panic!("expected a triaxial locus");
    };
    let gt = ground_truth_pose(&model, &camera);
    assert!(t.feasible.contains(t.m_of(&gt), 1e-10));
    // a single sample lands in the middle of the feasible set
    let one = sample_locus(&locus, 1).unwrap();
    assert_eq!(one.len(), 16);
    let mid = t.feasible.at_arc(0.5 * t.feasible.total_length()).unwrap();
    assert!(one.iter().all(|s| s.param == mid));
}

#[test]
fn near_spheroid_intervals_collapse() {
    let model = EllipsoidModel::new(
        Vec3::new(0.3, -0.2, 0.1),
        rotation_from_euler_zyx(0.7, 0.5, -0.4),
        [2.0, 2.0, 5.0],
    )
    .unwrap();
    let camera = CameraPose {
        rotation: rotation_from_euler_zyx(0.2, -0.1, 0.05),
        position: Vec3::new(1.0, -0.5, -14.0),
    };
    let intr = CameraIntrinsics::new(800.0, 800.0, 320.0, 240.0).unwrap();
    let cone =
        backprojection_cone(&project_ellipsoid(&model, &camera, &intr).unwrap(), &intr).unwrap();
    let spheroid = SpheroidNonCircularLocus::new(&model.radii, &cone, 1e-7).unwrap();
    let m0 = spheroid.mu.cbrt();
    let mut last = f64::INFINITY;
    for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
        let t = TriaxialLocus::new(&[2.0, 2.0 + eps, 5.0], &cone, 1e-7).unwrap();
        let len = t.feasible.total_length();
        assert!(len < last, "length {len} did not shrink");
        last = len;
        let dist = t.feasible.clamp(m0).map(|m| (m - m0).abs()).unwrap();
        assert!(dist <= 10.0 * eps, "eps {eps}: distance {dist}");
    }
    assert!(last < 1e-3);
}

/// Builds a spheroid scene; `negate` flips the cone signature.
fn spheroid_cone(radii: [f64; 3], negate: bool) -> ConeQuadric {
    let model = EllipsoidModel::new(
        Vec3::new(0.2, 0.1, 0.0),
        rotation_from_euler_zyx(1.0, 0.6, 0.3),
        radii,
    )
    .unwrap();
    let camera = CameraPose {
        rotation: Rotation3::identity(),
        position: Vec3::new(0.5, -0.4, -16.0),
    };
    let intr = CameraIntrinsics::new(800.0, 800.0, 320.0, 240.0).unwrap();
    let cone =
        backprojection_cone(&project_ellipsoid(&model, &camera, &intr).unwrap(), &intr).unwrap();
    if negate {
        ConeQuadric::new(cone.vertex, cone.matrix.scale(-1.0)).unwrap()
    } else {
        cone
    }
}

// the four eigenvalue configurations: unique sigma, single feasible m, and the
// factored form of the three cone-frame polynomials
#[test]
fn spheroid_configurations() {
    for radii in [[2.0, 2.0, 5.0], [5.0, 5.0, 2.0]] {
        for negate in [false, true] {
            let cone = spheroid_cone(radii, negate);
            let locus = SpheroidNonCircularLocus::new(&radii, &cone, 1e-7).unwrap();
            let la = radii_eigenvalues(&radii);
            let (ls, ld) = (la[2], la[0]);
            let inv = cone.invariants();
            let d = p1e_core::solver::feasible::cube_root_ratio(la, &inv);
            let p: [Poly3; 3] = cone_frame_components(la, &inv, d);
            for (i, pi) in p.iter().enumerate() {
                let s = cone.eigenvalues[i] * d / ls;
                let dd = cone.eigenvalues[i] * d / ld;
                let size = pi.magnitude(s).max(pi.magnitude(dd));
                assert!(pi.eval(s).abs() <= 1e-10 * size, "simple root of P{i}");
                assert!(pi.eval(dd).abs() <= 1e-10 * size, "double root of P{i}");
                assert!(
                    pi.derivative(dd).abs() <= 1e-8 * size / dd.abs().max(1.0),
                    "P{i} not tangent"
                );
            }
            // the only non-negative point on a dense grid is the double root
            let m_unique = -(locus.sigma / d).sqrt();
            let lo = 3.0 * m_unique.min(-1.0);
            let mut feasible = Vec::new();
            for k in 0..10_000 {
                let m = lo * (k as f64 + 0.5) / 10_000.0;
                if p.iter().all(|q| q.eval(m) >= 0.0) {
                    feasible.push(m);
                }
            }
            let step = lo.abs() / 10_000.0;
            assert!(
                feasible.iter().all(|m| (m - m_unique).abs() <= step),
                "{radii:?} {negate}: {feasible:?}"
            );
            assert!(p
                .iter()
                .all(|q| q.eval(m_unique) >= -1e-10 * q.magnitude(m_unique)));
            // two spheroids, both consistent
            assert!((locus.delta_cam[0] - locus.delta_cam[1]).norm() > 1e-6);
            for b in 0..4 {
                assert!(locus.pose(b, 0.9).residual <= 1e-8);
            }
        }
    }
}

#[test]
fn circular_sphere_limit() {
    // a nearly spherical spheroid seen along its axis approaches the sphere distance
    let cone = ConeQuadric::new(Vec3::zeros(), SymMat3::from_diagonal([3.0, 3.0, -1.0])).unwrap();
    let tol = Tolerances::default();
    let sphere = p1e_core::solver::solve_with_cone(&cone, &[1.0; 3], &tol).unwrap();
    let SolutionLocus::Sphere(s) = sphere else {
        panic!()
    };
    for eps in [1e-3, 1e-5] {
        let l = p1e_core::solver::solve_with_cone(&cone, &[1.0, 1.0, 1.0 + eps], &tol).unwrap();
        let SolutionLocus::SpheroidCircular(c) = l else {
            panic!()
        };
        assert!((c.dist - s.dist).abs() <= 10.0 * eps);
    }
}
