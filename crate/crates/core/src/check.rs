//! Property suite over synthesized scenes, shared by the acceptance harness
//! and the command-line `check`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cone::{backprojection_cone, projection_cone, CameraIntrinsics};
use crate::decoupled::{
    orientation_from_position_ellipsoid, position_from_orientation, PoseSolution,
};
use crate::error::Result;
use crate::geometry::{
    diag_matrix, radii_eigenvalues, rotation_angle_between, rotation_from_euler_zyx,
    EllipsoidModel, Rotation3, SymMat3, Tolerances, Vec3,
};
use crate::intersect::{intersect_loci, PlacedLocus};
use crate::solver::feasible::{cone_frame_feasible_m, triaxial_feasible_m, FeasibleM};
use crate::solver::{sample_locus, solve_p1e, SolutionLocus};
use crate::spectral::{
    annihilator_residual, generalized_eigen, identify_sigma, mu_from_sigma, sigma_from_distance,
};
use crate::synth::{
    ellipsoid_in_camera, ground_truth_pose, perturb_observation_with, project_ellipsoid,
    random_rotation, synth_scene, CameraPose, NoiseSpec, SceneConfig, ShapeClass,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    /// Acceptance criterion number, if the check is one.
    pub criterion: Option<u8>,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        match self.criterion {
            Some(c) => write!(
                f,
                "[{tag}] {c} {}: {} ({:.2?})",
                self.name, self.detail, self.elapsed
            ),
            None => write!(
                f,
                "[{tag}] - {}: {} ({:.2?})",
                self.name, self.detail, self.elapsed
            ),
        }
    }
}

/// Scene counts; the full suite matches the acceptance criteria.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteSize {
    pub round_trip: usize,
    pub counts: usize,
    pub sphere: usize,
    pub spectral: usize,
    pub feasibility: usize,
    pub grid: usize,
    pub decoupling: usize,
    pub noisy: usize,
    pub intersect_samples: usize,
}

impl SuiteSize {
    pub fn full() -> Self {
        Self {
            round_trip: 1000,
            counts: 100,
            sphere: 100,
            spectral: 1000,
            feasibility: 100,
            grid: 10_000,
            decoupling: 1000,
            noisy: 200,
            intersect_samples: 1000,
        }
    }

    pub fn quick() -> Self {
        Self {
            round_trip: 60,
            counts: 20,
            sphere: 20,
            spectral: 200,
            feasibility: 20,
            grid: 10_000,
            decoupling: 100,
            noisy: 40,
            intersect_samples: 1000,
        }
    }
}

fn outcome(
    criterion: Option<u8>,
    name: &'static str,
    start: Instant,
    r: std::result::Result<String, String>,
) -> CheckOutcome {
    let (passed, detail) = match r {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    CheckOutcome {
        criterion,
        name,
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

/// Ellipsoid and camera of the numerical-stability scenario.
pub fn stability_scene() -> (EllipsoidModel, CameraPose, CameraIntrinsics) {
    let d = |x: f64| x.to_radians();
    let model = EllipsoidModel {
        center: Vec3::zeros(),
        rotation: Rotation3::identity(),
        radii: [4.0, 2.0, 1.999999],
    };
    let camera = CameraPose {
        rotation: rotation_from_euler_zyx(d(-45.0), d(10.0), d(10.0)),
        position: Vec3::new(-1.0, -1.0, -4.0),
    };
    (model, camera, CameraIntrinsics::normalized())
}

/// Position and rotation error of the locus member nearest the ground truth.
pub fn locus_error(locus: &SolutionLocus, gt: &PoseSolution) -> Option<(f64, f64, f64)> {
    let best = locus.nearest_pose(gt)?;
    let pos = (best.pose.camera_position_in_ellipsoid_frame
        - gt.camera_position_in_ellipsoid_frame)
        .norm();
    let rot = rotation_angle_between(&best.pose.camera_rotation, &gt.camera_rotation);
    Some((pos, rot, best.pose.residual))
}

pub fn check_stability() -> CheckOutcome {
    let start = Instant::now();
    let run = || -> std::result::Result<String, String> {
        let (model, camera, intr) = stability_scene();
        let obs = project_ellipsoid(&model, &camera, &intr).map_err(|e| e.to_string())?;
        let locus = solve_p1e(&obs, &intr, &model.radii, &Tolerances::default())
            .map_err(|e| e.to_string())?;
        if !matches!(locus, SolutionLocus::Triaxial(_)) {
            return Err(format!("dispatched to {}", locus.case_name()));
        }
        let gt = ground_truth_pose(&model, &camera);
        let (pos, _, res) = locus_error(&locus, &gt).ok_or("no pose near the ground truth")?;
        let elapsed = start.elapsed();
        let d = format!("position error {pos:.2e}, residual {res:.2e}, {elapsed:.2?}");
        if pos < 1e-5 && res < 1e-8 && elapsed < Duration::from_millis(100) {
            Ok(d)
        } else {
            Err(d)
        }
    };
    outcome(Some(1), "stability scenario", start, run())
}

/// Solves one object of a scene and measures the ground-truth fit.
fn round_trip_one(
    model: &EllipsoidModel,
    camera: &CameraPose,
    intr: &CameraIntrinsics,
) -> Result<(f64, f64, f64, SolutionLocus)> {
    let obs = project_ellipsoid(model, camera, intr)?;
    let locus = solve_p1e(&obs, intr, &model.radii, &Tolerances::default())?;
    let gt = ground_truth_pose(model, camera);
    let scale = gt.camera_position_in_ellipsoid_frame.norm();
    let (pos, _, res) = locus_error(&locus, &gt).ok_or(crate::Error::EmptyLocus)?;
    Ok((pos / scale, res, scale, locus))
}

pub fn check_round_trip(n: usize) -> CheckOutcome {
    let start = Instant::now();
    let mut worst_pos = 0.0f64;
    let mut worst_res = 0.0f64;
    let mut failures = Vec::new();
    for class in [
        ShapeClass::Triaxial,
        ShapeClass::Spheroid,
        ShapeClass::Sphere,
    ] {
        let cfg = SceneConfig::uniform(class, 1);
        for seed in 0..n as u64 {
            let scene = match synth_scene(&cfg, seed) {
                Ok(s) => s,
                Err(e) => {
                    failures.push(format!("{class:?} seed {seed}: {e}"));
                    continue;
                }
            };
            match round_trip_one(&scene.ellipsoids[0], &scene.camera, &scene.intrinsics) {
                Ok((pos, res, _, _)) => {
                    worst_pos = worst_pos.max(pos);
                    worst_res = worst_res.max(res);
                    if !(pos < 1e-6 && res < 1e-8) {
                        failures.push(format!(
                            "{class:?} seed {seed}: pos {pos:.2e} res {res:.2e}"
                        ));
                    }
                }
                Err(e) => failures.push(format!("{class:?} seed {seed}: {e}")),
            }
        }
    }
    let elapsed = start.elapsed();
    let mut detail = format!(
        "{} scenes, worst relative position error {worst_pos:.2e}, worst residual {worst_res:.2e}, {elapsed:.2?}",
        3 * n
    );
    if !failures.is_empty() {
        detail.push_str(&format!(
            "; {} failures, first: {}",
            failures.len(),
            failures[0]
        ));
    }
    let ok = failures.is_empty() && elapsed < Duration::from_secs(60);
    outcome(
        Some(2),
        "round trip",
        start,
        if ok { Ok(detail) } else { Err(detail) },
    )
}

fn distinct_points(points: &[Vec3], tol: f64) -> usize {
    let mut kept: Vec<Vec3> = Vec::new();
    for p in points {
        if kept.iter().all(|q| (q - p).norm() > tol) {
            kept.push(*p);
        }
    }
    kept.len()
}

pub fn check_counts(n: usize) -> CheckOutcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut tally = [0usize; 3];
    for (k, class) in [
        ShapeClass::Triaxial,
        ShapeClass::Spheroid,
        ShapeClass::SpheroidOnAxis,
    ]
    .into_iter()
    .enumerate()
    {
        let cfg = SceneConfig::uniform(class, 1);
        for seed in 0..n as u64 {
            let res = (|| -> Result<std::result::Result<(), String>> {
                let scene = synth_scene(&cfg, 10_000 + seed)?;
                let (_, _, _, locus) =
                    round_trip_one(&scene.ellipsoids[0], &scene.camera, &scene.intrinsics)?;
                let gt = ground_truth_pose(&scene.ellipsoids[0], &scene.camera);
                Ok(match (&locus, class) {
                    (SolutionLocus::Triaxial(l), ShapeClass::Triaxial) => {
                        let m = l.m_of(&gt);
                        let c = l.poses_at(m)?.len();
                        if c == 16 {
                            Ok(())
                        } else {
                            Err(format!("{c} poses"))
                        }
                    }
                    (SolutionLocus::SpheroidNonCircular(l), ShapeClass::Spheroid) => {
                        let c = distinct_points(&l.delta_cam, 1e-9 * l.delta_cam[0].norm());
                        if c == 2 {
                            Ok(())
                        } else {
                            Err(format!("{c} spheroids"))
                        }
                    }
                    (SolutionLocus::SpheroidCircular(l), ShapeClass::SpheroidOnAxis) => {
                        let c = distinct_points(&l.positions(), 1e-9 * l.dist);
                        if c == 2 {
                            Ok(())
                        } else {
                            Err(format!("{c} positions"))
                        }
                    }
                    (l, _) => Err(format!("dispatched to {}", l.case_name())),
                })
            })();
            match res {
                Ok(Ok(())) => tally[k] += 1,
                Ok(Err(e)) => failures.push(format!("{class:?} seed {seed}: {e}")),
                Err(e) => failures.push(format!("{class:?} seed {seed}: {e}")),
            }
        }
    }
    let mut detail = format!(
        "16 poses {}/{n}, 2 spheroids {}/{n}, 2 axial positions {}/{n}",
        tally[0], tally[1], tally[2]
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; first failure: {f}"));
    }
    outcome(
        Some(3),
        "solution counts",
        start,
        if failures.is_empty() {
            Ok(detail)
        } else {
            Err(detail)
        },
    )
}

pub fn check_sphere(n: usize) -> CheckOutcome {
    let start = Instant::now();
    let cfg = SceneConfig::uniform(ShapeClass::Sphere, 1);
    let mut worst = 0.0f64;
    let mut worst_sample = 0.0f64;
    let mut failures = Vec::new();
    for seed in 0..n as u64 {
        let res = (|| -> Result<(f64, f64)> {
            let scene = synth_scene(&cfg, 20_000 + seed)?;
            let model = &scene.ellipsoids[0];
            let obs = project_ellipsoid(model, &scene.camera, &scene.intrinsics)?;
            let locus = solve_p1e(
                &obs,
                &scene.intrinsics,
                &model.radii,
                &Tolerances::default(),
            )?;
            let SolutionLocus::Sphere(s) = &locus else {
                return Err(crate::Error::WrongClass);
            };
            // half-angle of the circular cone from its eigenvalues
            let [b1, b2, bs] = s.cone.eigenvalues;
            let tan2 = -bs / (0.5 * (b1 + b2));
            let half = tan2.sqrt().atan();
            let expected = s.radius / half.sin();
            let err = (s.dist - expected).abs() / expected;
            let mut on_sphere = 0.0f64;
            for p in sample_locus(&locus, 100)? {
                on_sphere = on_sphere
                    .max((p.pose.camera_position_in_ellipsoid_frame.norm() - s.dist).abs());
            }
            Ok((err, on_sphere))
        })();
        match res {
            Ok((e, o)) => {
                worst = worst.max(e);
                worst_sample = worst_sample.max(o);
                if !(e <= 1e-10 && o <= 1e-10) {
                    failures.push(format!("seed {seed}: {e:.2e} / {o:.2e}"));
                }
            }
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    let mut detail = format!(
        "{n} scenes, distance error {worst:.2e} (relative), sample deviation {worst_sample:.2e}"
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; first failure: {f}"));
    }
    outcome(
        Some(4),
        "sphere closed form",
        start,
        if failures.is_empty() {
            Ok(detail)
        } else {
            Err(detail)
        },
    )
}

/// A random exact instance `(A, B', delta, sigma)` of the alignment equation.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R) -> (SymMat3, SymMat3, Vec3, f64) {
    let radii = [0; 3].map(|_| 0.2 * 25f64.powf(rng.random::<f64>()));
    let a = diag_matrix(&radii).conjugate(random_rotation(rng).matrix());
    let dir = random_rotation(rng) * Vec3::z();
    let t = (1.2 + 10.0 * rng.random::<f64>()) / a.quad(&dir).sqrt();
    let delta = dir * t;
    let mut sigma = 0.1 * 100f64.powf(rng.random::<f64>());
    if rng.random::<bool>() {
        sigma = -sigma;
    }
    let mu = 1.0 - a.quad(&delta);
    let ad = a.mul_vec(&delta);
    let bp = SymMat3::outer(&ad).add(&a.scale(mu)).scale(1.0 / sigma);
    (a, bp, delta, sigma)
}

pub fn check_spectral(n: usize) -> CheckOutcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = [0.0f64; 4];
    let mut failures = Vec::new();
    for k in 0..n {
        let (a, bp, delta, sigma) = random_instance(&mut rng);
        let res = (|| -> Result<[f64; 4]> {
            let g = identify_sigma(
                &generalized_eigen(&a, &bp)?,
                Tolerances::default().ambiguity,
            )?;
            if !(g.sigma1 * g.sigma2 < 0.0) {
                return Err(crate::Error::InvalidInput(format!(
                    "sigma1 sigma2 = {}",
                    g.sigma1 * g.sigma2
                )));
            }
            let mu = 1.0 - a.quad(&delta);
            let ratio_err = (g.sigma1 / g.sigma2 - mu).abs() / mu.abs().max(1.0);
            let det_a = a.determinant();
            let det_bp = bp.determinant();
            let mu7 = mu_from_sigma(g.sigma1, det_a, det_bp)?;
            let e7 = (mu7 - mu).abs() / mu.abs();
            let tr_bp_inv = bp
                .inverse()
                .ok_or(crate::Error::SingularCone(det_bp))?
                .trace();
            let tr_a_inv = a
                .inverse()
                .ok_or(crate::Error::SingularCone(det_a))?
                .trace();
            let s8 = sigma_from_distance(delta.norm_squared(), tr_a_inv, det_a, tr_bp_inv, det_bp)?;
            let e8 = ((s8 - g.sigma1).abs() / g.sigma1.abs())
                .max((g.sigma1 - sigma).abs() / sigma.abs());
            let ann = annihilator_residual(&a, &bp, g.sigma1, mu);
            Ok([ratio_err, e7, e8, ann])
        })();
        match res {
            Ok(e) => {
                for i in 0..4 {
                    worst[i] = worst[i].max(e[i]);
                }
                if !(e[0] <= 1e-9 && e[1] <= 1e-8 && e[2] <= 1e-8 && e[3] <= 1e-8) {
                    failures.push(format!("instance {k}: {e:?}"));
                }
            }
            Err(e) => failures.push(format!("instance {k}: {e}")),
        }
    }
    let mut detail = format!(
        "{n} instances, mu ratio {:.1e}, mu-from-sigma {:.1e}, sigma-from-distance {:.1e}, annihilator {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; {} failures, first: {f}", failures.len()));
    }
    outcome(
        Some(5),
        "spectral identities",
        start,
        if failures.is_empty() {
            Ok(detail)
        } else {
            Err(detail)
        },
    )
}

/// Grid disagreements with the intervals, ignoring points within `tol` of an endpoint.
pub fn grid_disagreements(f: &FeasibleM, lo: f64, points: usize, tol: f64) -> usize {
    let endpoints: Vec<f64> = f.intervals.iter().flat_map(|&(a, b)| [a, b]).collect();
    (0..points)
        .map(|k| lo * (k as f64 + 0.5) / points as f64)
        .filter(|&m| {
            let grid = f.components_at(m).iter().all(|v| *v >= 0.0);
            grid != f.contains(m, 0.0) && endpoints.iter().all(|e| (e - m).abs() > tol)
        })
        .count()
}

fn same_intervals(a: &[(f64, f64)], b: &[(f64, f64)], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            (x.0 - y.0).abs() <= tol * x.0.abs().max(1.0)
                && (x.1 - y.1).abs() <= tol * x.1.abs().max(1.0)
        })
}

pub fn check_feasibility(n: usize, grid: usize) -> CheckOutcome {
    let start = Instant::now();
    let cfg = SceneConfig::uniform(ShapeClass::Triaxial, 1);
    let mut failures = Vec::new();
    let mut intervals_seen = 0usize;
    for seed in 0..n as u64 {
        let res = (|| -> Result<std::result::Result<usize, String>> {
            let scene = synth_scene(&cfg, 30_000 + seed)?;
            let model = &scene.ellipsoids[0];
            let obs = project_ellipsoid(model, &scene.camera, &scene.intrinsics)?;
            let cone = backprojection_cone(&obs, &scene.intrinsics)?;
            let la = radii_eigenvalues(&model.radii);
            let tol = Tolerances::default().cluster;
            let ell = triaxial_feasible_m(la, &cone.invariants(), tol)?;
            let cf = cone_frame_feasible_m(la, &cone.invariants(), tol)?;
            let roots = ell
                .components
                .iter()
                .flat_map(crate::cubic::verified_roots)
                .filter(|r| *r < 0.0)
                .fold(0.0f64, |a, r| a.min(r));
            let lo = 1.5 * roots.min(-1.0);
            let bad = grid_disagreements(&ell, lo, grid, 1e-9);
            if bad > 0 {
                return Ok(Err(format!("{bad} grid disagreements")));
            }
            if !same_intervals(&ell.intervals, &cf.intervals, 1e-9) {
                return Ok(Err(format!(
                    "frames differ: {:?} vs {:?}",
                    ell.intervals, cf.intervals
                )));
            }
            Ok(Ok(ell.intervals.len()))
        })();
        match res {
            Ok(Ok(k)) => intervals_seen += k,
            Ok(Err(e)) => failures.push(format!("seed {seed}: {e}")),
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    let mut detail = format!("{n} scenes, {grid}-point grids, {intervals_seen} intervals in total");
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; {} failures, first: {f}", failures.len()));
    }
    outcome(
        Some(6),
        "feasibility oracle",
        start,
        if failures.is_empty() {
            Ok(detail)
        } else {
            Err(detail)
        },
    )
}

pub fn check_intersection(samples: usize) -> CheckOutcome {
    let start = Instant::now();
    let run = || -> Result<std::result::Result<String, String>> {
        let scene = synth_scene(&SceneConfig::uniform(ShapeClass::Triaxial, 6), 0)?;
        let obs = scene.observations()?;
        let loci = scene
            .ellipsoids
            .iter()
            .zip(&obs)
            .map(|(m, o)| {
                Ok(PlacedLocus::new(
                    solve_p1e(o, &scene.intrinsics, &m.radii, &Tolerances::default())?,
                    m,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let r = intersect_loci(&loci, samples, 1e-4)?;
        let err = (r.estimate - scene.camera.position).norm();
        let d = format!("6 loci, spread {:.2e}, estimate error {err:.2e}", r.spread);
        Ok(if r.spread < 1e-4 && err < 1e-4 {
            Ok(d)
        } else {
            Err(d)
        })
    };
    let r = match run() {
        Ok(r) => r,
        Err(e) => Err(e.to_string()),
    };
    outcome(Some(7), "multi-object intersection", start, r)
}

/// Errors of the two decoupled solvers on one scene, optionally with noise.
fn decoupled_errors(
    model: &EllipsoidModel,
    camera: &CameraPose,
    intr: &CameraIntrinsics,
    noise: Option<(&NoiseSpec, &mut ChaCha8Rng)>,
) -> Result<(f64, f64)> {
    let mut obs = project_ellipsoid(model, camera, intr)?;
    if let Some((spec, rng)) = noise {
        let s = NoiseSpec {
            axes_sigma: spec.center_sigma / obs.semi_axes[0],
            angle_sigma: spec.center_sigma / obs.semi_axes[0],
            ..*spec
        };
        obs = perturb_observation_with(&obs, &s, rng)?;
    }
    let cone = backprojection_cone(&obs, intr)?;
    let tol = Tolerances::default();
    let gt = ground_truth_pose(model, camera);
    let (_, _, r_cam_ell) = ellipsoid_in_camera(model, camera);
    let p = position_from_orientation(&model.radii, &r_cam_ell, &cone.matrix, &Vec3::z(), &tol)?;
    let pos_err =
        (p.camera_position_in_ellipsoid_frame - gt.camera_position_in_ellipsoid_frame).norm();
    let set = orientation_from_position_ellipsoid(
        &gt.camera_position_in_ellipsoid_frame,
        &model.radii,
        &cone,
        &tol,
    )?;
    let rot_err = set
        .valid_rotations()
        .map(|r| rotation_angle_between(r, &r_cam_ell))
        .fold(f64::INFINITY, f64::min);
    Ok((pos_err, rot_err))
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    v[v.len() / 2]
}

pub fn check_decoupling(n: usize, noisy: usize) -> CheckOutcome {
    let start = Instant::now();
    let cfg = SceneConfig::uniform(ShapeClass::Triaxial, 1);
    let mut worst = (0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for seed in 0..n as u64 {
        let res = synth_scene(&cfg, 40_000 + seed)
            .and_then(|s| decoupled_errors(&s.ellipsoids[0], &s.camera, &s.intrinsics, None));
        match res {
            Ok((p, r)) => {
                worst = (worst.0.max(p), worst.1.max(r));
                if !(p < 1e-7 && r < 1e-6) {
                    failures.push(format!("seed {seed}: position {p:.2e}, rotation {r:.2e}"));
                }
            }
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    // 1 px noise: relative position error versus rotation error (radians)
    let spec = NoiseSpec {
        center_sigma: 1.0,
        axes_sigma: 0.0,
        angle_sigma: 0.0,
        seed: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (mut pos, mut rot) = (Vec::new(), Vec::new());
    let mut noisy_failures = 0usize;
    for seed in 0..noisy as u64 {
        let res = synth_scene(&cfg, 50_000 + seed).and_then(|s| {
            let scale = (s.camera.position - s.ellipsoids[0].center).norm();
            decoupled_errors(
                &s.ellipsoids[0],
                &s.camera,
                &s.intrinsics,
                Some((&spec, &mut rng)),
            )
            .map(|(p, r)| (p / scale, r))
        });
        match res {
            Ok((p, r)) => {
                pos.push(p);
                rot.push(r);
            }
            Err(_) => noisy_failures += 1,
        }
    }
    let (mp, mr) = (median(&mut pos), median(&mut rot));
    let mut detail = format!(
        "{n} scenes, worst position {:.2e}, worst rotation {:.2e}; with 1 px noise over {noisy} scenes: median relative position error {mp:.2e}, median rotation error {mr:.2e} rad, {noisy_failures} unsolved (reported only)",
        worst.0, worst.1
    );
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; {} failures, first: {f}", failures.len()));
    }
    outcome(
        Some(8),
        "decoupled solvers",
        start,
        if failures.is_empty() {
            Ok(detail)
        } else {
            Err(detail)
        },
    )
}

/// Projection cone in the camera frame equals `sigma` times the backprojection cone.
pub fn check_cone_proportionality(n: usize) -> CheckOutcome {
    let start = Instant::now();
    let cfg = SceneConfig::uniform(ShapeClass::Triaxial, 1);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for seed in 0..n as u64 {
        let res = (|| -> Result<f64> {
            let scene = synth_scene(&cfg, 60_000 + seed)?;
            let model = &scene.ellipsoids[0];
            let (c, a, _) = ellipsoid_in_camera(model, &scene.camera);
            let b = projection_cone(&a, &c, &Vec3::zeros())?;
            let obs = project_ellipsoid(model, &scene.camera, &scene.intrinsics)?;
            let bp = backprojection_cone(&obs, &scene.intrinsics)?;
            let g = identify_sigma(
                &generalized_eigen(&a, &bp.matrix)?,
                Tolerances::default().ambiguity,
            )?;
            // B = A d d^T A - (d^T A d - 1) A, so B = sigma B'
            Ok(b.matrix.sub(&bp.matrix.scale(g.sigma1)).norm() / b.matrix.norm())
        })();
        match res {
            Ok(e) => {
                worst = worst.max(e);
                if !(e <= 1e-9) {
                    failures.push(format!("seed {seed}: {e:.2e}"));
                }
            }
            Err(e) => failures.push(format!("seed {seed}: {e}")),
        }
    }
    let mut detail = format!("{n} scenes, worst relative mismatch {worst:.2e}");
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; first failure: {f}"));
    }
    outcome(
        None,
        "cone proportionality",
        start,
        if failures.is_empty() {
            Ok(detail)
        } else {
            Err(detail)
        },
    )
}

/// Every sampled pose of every locus satisfies the alignment equation.
pub fn check_sampled_residuals(n: usize) -> CheckOutcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for class in [
        ShapeClass::Triaxial,
        ShapeClass::Spheroid,
        ShapeClass::SpheroidOnAxis,
        ShapeClass::Sphere,
    ] {
        let cfg = SceneConfig::uniform(class, 1);
        for seed in 0..n as u64 {
            let res = (|| -> Result<f64> {
                let scene = synth_scene(&cfg, 70_000 + seed)?;
                let m = &scene.ellipsoids[0];
                let obs = project_ellipsoid(m, &scene.camera, &scene.intrinsics)?;
                let locus = solve_p1e(&obs, &scene.intrinsics, &m.radii, &Tolerances::default())?;
                Ok(sample_locus(&locus, 20)?
                    .iter()
                    .map(|s| s.pose.residual)
                    .fold(0.0f64, f64::max))
            })();
            match res {
                Ok(r) => {
                    worst = worst.max(r);
                    if !(r <= 1e-8) {
                        failures.push(format!("{class:?} seed {seed}: {r:.2e}"));
                    }
                }
                Err(e) => failures.push(format!("{class:?} seed {seed}: {e}")),
            }
        }
    }
    let mut detail = format!("{} loci, worst sampled residual {worst:.2e}", 4 * n);
    if let Some(f) = failures.first() {
        detail.push_str(&format!("; first failure: {f}"));
    }
    outcome(
        None,
        "sampled residuals",
        start,
        if failures.is_empty() {
            Ok(detail)
        } else {
            Err(detail)
        },
    )
}

/// The eight acceptance criteria in order.
pub fn acceptance_suite(size: &SuiteSize) -> Vec<CheckOutcome> {
    vec![
        check_stability(),
        check_round_trip(size.round_trip),
        check_counts(size.counts),
        check_sphere(size.sphere),
        check_spectral(size.spectral),
        check_feasibility(size.feasibility, size.grid),
        check_intersection(size.intersect_samples),
        check_decoupling(size.decoupling, size.noisy),
    ]
}

/// Acceptance criteria plus the extra invariants.
pub fn full_suite(size: &SuiteSize) -> Vec<CheckOutcome> {
    let mut out = acceptance_suite(size);
    out.push(check_cone_proportionality(size.counts));
    out.push(check_sampled_residuals(size.counts));
    out
}
