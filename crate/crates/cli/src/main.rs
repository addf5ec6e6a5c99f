//! `p1e`: solve, project, synthesize, intersect and self-check.
//!
//! Exit codes: 0 success, 1 any other failure, 2 impossible ellipsoid/cone
//! combination, 3 unreadable input or invalid invocation. Diagnostics go to
//! standard error only.

// negated comparisons are deliberate: NaN must fail every guard
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod locus_file;
mod scene_file;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use p1e_core::check::{full_suite, SuiteSize};
use p1e_core::geometry::Vec3;
use p1e_core::intersect::{intersect_loci, PlacedLocus};
use p1e_core::solver::sample_locus;
use p1e_core::synth::{
    ground_truth_pose, perturb_observation_with, project_ellipsoid, synth_scene, NoiseSpec,
    SceneConfig, ShapeClass,
};
use p1e_core::Error;

use locus_file::{LocusFile, LocusProblem, WriteOptions};
use scene_file::{ObservationRecord, SceneFile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid invocation: {0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::ImpossibleCoOccurrence { .. }) => 2,
            CliError::Parse(_) | CliError::Usage(_) => 3,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "p1e",
    version,
    about = "Camera pose loci from one ellipse and one known ellipsoid"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Relative gap below which two eigenvalues count as repeated.
    #[arg(long, global = true, default_value_t = 1e-7)]
    tol_cluster: f64,
    /// Largest alignment residual accepted in a locus file row.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_residual: f64,
    /// Parameter samples per locus branch.
    #[arg(long, global = true, default_value_t = 1000)]
    samples: usize,
    /// Seed for scene synthesis and observation noise.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Keep locus rows whose residual exceeds the tolerance.
    #[arg(long, global = true)]
    allow_noisy: bool,
    /// Also write rotations as row-major matrices.
    #[arg(long, global = true)]
    emit_matrix: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the pose locus of one object into a locus file.
    Solve {
        scene: PathBuf,
        /// Index of the ellipsoid and its observation.
        #[arg(long, default_value_t = 0)]
        object: usize,
        /// Output path; standard output if absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fill in the observations of a scene from its camera.
    Project {
        scene: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a random scene with observations.
    Synth {
        #[arg(long, default_value_t = 1)]
        objects: usize,
        /// triaxial, spheroid, sphere or spheroid-axis.
        #[arg(long, default_value = "triaxial")]
        class: String,
        /// Ellipse center noise, pixels.
        #[arg(long, default_value_t = 0.0)]
        center_noise: f64,
        /// Relative semi-axis noise.
        #[arg(long, default_value_t = 0.0)]
        axes_noise: f64,
        /// Ellipse angle noise, radians.
        #[arg(long, default_value_t = 0.0)]
        angle_noise: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Find the camera position shared by two or more loci.
    Intersect {
        #[arg(required = true, num_args = 2..)]
        loci: Vec<PathBuf>,
        /// Largest accepted distance from the estimate to any locus.
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
    },
    /// Run the invariant suite and print a pass/fail table.
    Check {
        /// Smaller scene counts.
        #[arg(long)]
        quick: bool,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("{name} must be positive, got {v}")))
    }
}

fn cmd_solve(
    g: &Global,
    scene_path: &Path,
    object: usize,
    output: Option<&Path>,
) -> Result<(), CliError> {
    let scene = SceneFile::parse(&read(scene_path)?)?;
    let model = scene.ellipsoid(object)?;
    let intr = scene.intrinsics()?;
    let camera = scene.camera()?;
    let obs = match (scene.observation(object)?, &camera) {
        (Some(o), _) => o,
        (None, Some(c)) => project_ellipsoid(&model, c, &intr)?,
        (None, None) => {
            return Err(CliError::Usage(
                "scene has neither observations nor a camera".into(),
            ))
        }
    };
    let problem = LocusProblem {
        object,
        intrinsics: scene.intrinsics,
        ellipsoid: scene.ellipsoids[object].clone(),
        observation: ObservationRecord::from(&obs),
        tol_cluster: g.tol_cluster,
    };
    let (model, locus) = problem.solve()?;
    let samples = sample_locus(&locus, g.samples)?;
    let nearest = camera.and_then(|c| locus.nearest_pose(&ground_truth_pose(&model, &c)));
    let opts = WriteOptions {
        tol_residual: g.tol_residual,
        allow_noisy: g.allow_noisy,
        emit_matrix: g.emit_matrix,
    };
    emit(
        output,
        &locus_file::render(&problem, &model, &locus, &samples, nearest.as_ref(), &opts)?,
    )
}

fn cmd_project(g: &Global, scene_path: &Path, output: Option<&Path>) -> Result<(), CliError> {
    let mut scene = SceneFile::parse(&read(scene_path)?)?;
    let camera = scene
        .camera()?
        .ok_or_else(|| CliError::Usage("projection needs a camera".into()))?;
    let intr = scene.intrinsics()?;
    let obs = (0..scene.ellipsoids.len())
        .map(|k| {
            Ok(ObservationRecord::from(&project_ellipsoid(
                &scene.ellipsoid(k)?,
                &camera,
                &intr,
            )?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    scene.observations = Some(obs);
    if g.emit_matrix {
        let to_matrix = |v: &mut Vec<f64>| -> Result<(), CliError> {
            let r = p1e_core::geometry::rotation_from_slice(v)
                .map_err(|e| CliError::Parse(e.to_string()))?;
            let m = r.matrix();
            *v = (0..9).map(|k| m[(k / 3, k % 3)]).collect();
            Ok(())
        };
        if let Some(c) = scene.camera.as_mut() {
            to_matrix(&mut c.rotation)?;
        }
        for e in &mut scene.ellipsoids {
            to_matrix(&mut e.rotation)?;
        }
    }
    emit(output, &scene.to_json())
}

fn cmd_synth(
    g: &Global,
    objects: usize,
    class: &str,
    noise: [f64; 3],
    output: Option<&Path>,
) -> Result<(), CliError> {
    if objects == 0 {
        return Err(CliError::Usage("--objects must be at least 1".into()));
    }
    let class = ShapeClass::parse(class)
        .ok_or_else(|| CliError::Usage(format!("unknown shape class {class:?}")))?;
    let scene = synth_scene(&SceneConfig::uniform(class, objects), g.seed)?;
    let spec = NoiseSpec {
        center_sigma: noise[0],
        axes_sigma: noise[1],
        angle_sigma: noise[2],
        seed: g.seed,
    };
    spec.validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut obs = scene.observations()?;
    if noise.iter().any(|&s| s > 0.0) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(spec.seed);
        obs = obs
            .iter()
            .map(|o| perturb_observation_with(o, &spec, &mut rng))
            .collect::<Result<_, _>>()?;
    }
    emit(
        output,
        &SceneFile::from_scene(&scene, Some(&obs), g.emit_matrix).to_json(),
    )
}

fn cmd_intersect(g: &Global, paths: &[PathBuf], tol: f64) -> Result<(), CliError> {
    check_positive("--tol", tol)?;
    let loci = paths
        .iter()
        .map(|p| {
            let f = LocusFile::parse(&read(p)?).map_err(|e| match e {
                CliError::Parse(m) => CliError::Parse(format!("{}: {m}", p.display())),
                other => other,
            })?;
            let (model, locus) = f.problem.solve()?;
            if locus.case_name() != f.case {
                return Err(CliError::Parse(format!(
                    "{}: header says {} but the problem solves as {}",
                    p.display(),
                    f.case,
                    locus.case_name()
                )));
            }
            Ok(PlacedLocus::new(locus, &model))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let x = intersect_loci(&loci, g.samples, tol)?;
    let fmt = |v: &Vec3| format!("{:.16e},{:.16e},{:.16e}", v.x, v.y, v.z);
    println!("estimate: {}", fmt(&x.estimate));
    println!("spread: {:.16e}", x.spread);
    let d = x
        .distances
        .iter()
        .map(|d| format!("{d:.16e}"))
        .collect::<Vec<_>>();
    println!("distances: {}", d.join(","));
    println!("degenerate: {}", x.degenerate);
    if x.degenerate {
        eprintln!("warning: several separated points fit all loci; the estimate is not unique");
    }
    Ok(())
}

fn cmd_check(quick: bool) -> Result<(), CliError> {
    let size = if quick {
        SuiteSize::quick()
    } else {
        SuiteSize::full()
    };
    let outcomes = full_suite(&size);
    for o in &outcomes {
        println!("{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!(
        "{} of {} checks passed",
        outcomes.len() - failed,
        outcomes.len()
    );
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} checks failed")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = &cli.global;
    check_positive("--tol-cluster", g.tol_cluster)?;
    check_positive("--tol-residual", g.tol_residual)?;
    if g.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    match &cli.command {
        Command::Solve {
            scene,
            object,
            output,
        } => cmd_solve(g, scene, *object, output.as_deref()),
        Command::Project { scene, output } => cmd_project(g, scene, output.as_deref()),
        Command::Synth {
            objects,
            class,
            center_noise,
            axes_noise,
            angle_noise,
            output,
        } => cmd_synth(
            g,
            *objects,
            class,
            [*center_noise, *axes_noise, *angle_noise],
            output.as_deref(),
        ),
        Command::Intersect { loci, tol } => cmd_intersect(g, loci, *tol),
        Command::Check { quick } => cmd_check(*quick),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            // help and version belong on standard output
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
