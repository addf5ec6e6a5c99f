//! Plain-text locus documents: a `#` header followed by comma-separated rows.
//!
//! The header carries the problem that produced the locus, so a reader can
//! rebuild it exactly instead of interpolating between rows.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use p1e_core::cone::CameraIntrinsics;
use p1e_core::conic::EllipseObservation;
use p1e_core::geometry::{rotation_to_quaternion, EllipsoidModel, Tolerances};
use p1e_core::solver::{solve_p1e, LocusSample, SolutionLocus};

use crate::scene_file::{EllipsoidRecord, IntrinsicsRecord, ObservationRecord};
use crate::CliError;

pub const MAGIC: &str = "# p1e-locus v1";
const PROBLEM_KEY: &str = "# problem: ";
/// Locus member closest to the scene camera, in row format.
const NEAREST_KEY: &str = "# nearest_to_camera: ";

/// Everything needed to rebuild a locus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocusProblem {
    pub object: usize,
    pub intrinsics: IntrinsicsRecord,
    pub ellipsoid: EllipsoidRecord,
    pub observation: ObservationRecord,
    pub tol_cluster: f64,
}

impl LocusProblem {
    pub fn model(&self) -> Result<EllipsoidModel, CliError> {
        let f = crate::scene_file::SceneFile {
            version: crate::scene_file::VERSION,
            intrinsics: self.intrinsics,
            camera: None,
            ellipsoids: vec![self.ellipsoid.clone()],
            observations: Some(vec![self.observation]),
        };
        f.ellipsoid(0)
    }

    pub fn solve(&self) -> Result<(EllipsoidModel, SolutionLocus), CliError> {
        let model = self.model()?;
        let i = self.intrinsics;
        let intr = CameraIntrinsics::new(i.fx, i.fy, i.cx, i.cy)
            .map_err(|e| CliError::Parse(e.to_string()))?;
        let o = self.observation;
        let obs = EllipseObservation::new(o.center, o.semi_axes, o.angle)
            .map_err(|e| CliError::Parse(e.to_string()))?;
        let tol = Tolerances {
            cluster: self.tol_cluster,
            ..Tolerances::default()
        };
        let locus = solve_p1e(&obs, &intr, &model.radii, &tol)?;
        Ok((model, locus))
    }
}

pub struct WriteOptions {
    pub tol_residual: f64,
    pub allow_noisy: bool,
    pub emit_matrix: bool,
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| sci(*x)).collect::<Vec<_>>().join(",")
}

/// Renders the locus. Rows are in the world frame of the problem's ellipsoid.
pub fn render(
    problem: &LocusProblem,
    model: &EllipsoidModel,
    locus: &SolutionLocus,
    samples: &[LocusSample],
    nearest: Option<&LocusSample>,
    opts: &WriteOptions,
) -> Result<String, CliError> {
    let mut out = String::new();
    let problem_json = serde_json::to_string(problem).expect("problem serializes");
    let mut columns = "m_or_angle,ex,ey,ez,qw,qx,qy,qz,residual".to_string();
    if opts.emit_matrix {
        columns.push_str(",r00,r01,r02,r10,r11,r12,r20,r21,r22");
    }
    writeln!(out, "{MAGIC}").unwrap();
    writeln!(out, "# case: {}", locus.case_name()).unwrap();
    writeln!(out, "{PROBLEM_KEY}{problem_json}").unwrap();
    match locus {
        SolutionLocus::Triaxial(t) => {
            let iv = t
                .feasible
                .intervals
                .iter()
                .map(|(a, b)| format!("[{},{}]", sci(*a), sci(*b)));
            writeln!(out, "# feasible_m: {}", iv.collect::<Vec<_>>().join(";")).unwrap();
        }
        other => {
            writeln!(out, "# sigma: {}", sci(other.sigma().expect("fixed sigma"))).unwrap();
        }
    }
    writeln!(out, "# branches: {}", locus.branch_count()).unwrap();
    writeln!(out, "# rows: {}", samples.len()).unwrap();
    writeln!(out, "# columns: {columns}").unwrap();
    let row = |what: &str, s: &LocusSample| -> Result<String, CliError> {
        if !(s.pose.residual <= opts.tol_residual) && !opts.allow_noisy {
            return Err(CliError::Failed(format!(
                "{what} has residual {:e} above {:e}; rerun with --allow-noisy to keep it",
                s.pose.residual, opts.tol_residual
            )));
        }
        let e = model.center + model.rotation * s.pose.camera_position_in_ellipsoid_frame;
        let r = model.rotation * s.pose.camera_rotation;
        let q = rotation_to_quaternion(&r);
        let mut row = vec![
            s.param,
            e.x,
            e.y,
            e.z,
            q[0],
            q[1],
            q[2],
            q[3],
            s.pose.residual,
        ];
        if opts.emit_matrix {
            let m = r.matrix();
            row.extend((0..9).map(|k| m[(k / 3, k % 3)]));
        }
        Ok(join(&row))
    };
    if let Some(n) = nearest {
        writeln!(
            out,
            "{NEAREST_KEY}{}",
            row("member nearest the scene camera", n)?
        )
        .unwrap();
    }
    for (k, s) in samples.iter().enumerate() {
        writeln!(out, "{}", row(&format!("row {k}"), s)?).unwrap();
    }
    Ok(out)
}

/// Parsed locus document.
#[derive(Debug, Clone, PartialEq)]
pub struct LocusFile {
    pub case: String,
    pub problem: LocusProblem,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl LocusFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = |msg: String| CliError::Parse(msg);
        let mut lines = text.lines();
        if lines.next() != Some(MAGIC) {
            return Err(bad("missing locus file header".into()));
        }
        let mut case = None;
        let mut problem = None;
        let mut columns = None;
        let mut rows = Vec::new();
        let mut declared_rows = None;
        for (n, line) in lines.enumerate() {
            if let Some(rest) = line.strip_prefix(PROBLEM_KEY) {
                problem = Some(
                    serde_json::from_str::<LocusProblem>(rest)
                        .map_err(|e| bad(format!("problem record: {e}")))?,
                );
            } else if let Some(rest) = line.strip_prefix("# case: ") {
                case = Some(rest.to_string());
            } else if let Some(rest) = line.strip_prefix("# columns: ") {
                columns = Some(rest.split(',').map(str::to_string).collect::<Vec<_>>());
            } else if let Some(rest) = line.strip_prefix("# rows: ") {
                declared_rows = Some(
                    rest.parse::<usize>()
                        .map_err(|e| bad(format!("row count: {e}")))?,
                );
            } else if line.starts_with('#') {
                continue;
            } else {
                let row = line
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| bad(format!("line {}: {e}", n + 2)))?;
                rows.push(row);
            }
        }
        let columns = columns.ok_or_else(|| bad("missing column list".into()))?;
        if let Some(r) = rows.iter().find(|r| r.len() != columns.len()) {
            return Err(bad(format!(
                "row has {} values, expected {}",
                r.len(),
                columns.len()
            )));
        }
        if declared_rows != Some(rows.len()) {
            return Err(bad(format!(
                "declared {declared_rows:?} rows, found {}",
                rows.len()
            )));
        }
        Ok(Self {
            case: case.ok_or_else(|| bad("missing case tag".into()))?,
            problem: problem.ok_or_else(|| bad("missing problem record".into()))?,
            columns,
            rows,
        })
    }
}
