//! JSON scene documents.

use serde::{Deserialize, Serialize};

use p1e_core::cone::CameraIntrinsics;
use p1e_core::conic::EllipseObservation;
use p1e_core::geometry::{
    rotation_from_slice, rotation_to_quaternion, EllipsoidModel, Rotation3, Vec3,
};
use p1e_core::synth::{CameraPose, Scene};

use crate::CliError;

pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub version: u32,
    pub intrinsics: IntrinsicsRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub camera: Option<CameraRecord>,
    pub ellipsoids: Vec<EllipsoidRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observations: Option<Vec<ObservationRecord>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntrinsicsRecord {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraRecord {
    /// Camera-to-world: 9 row-major numbers or a unit quaternion `w, x, y, z`.
    pub rotation: Vec<f64>,
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipsoidRecord {
    pub center: [f64; 3],
    pub radii: [f64; 3],
    /// Ellipsoid-to-world, same encodings as the camera rotation.
    pub rotation: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservationRecord {
    pub center: [f64; 2],
    pub semi_axes: [f64; 2],
    pub angle: f64,
}

fn rotation_record(r: &Rotation3, emit_matrix: bool) -> Vec<f64> {
    if emit_matrix {
        let m = r.matrix();
        (0..9).map(|k| m[(k / 3, k % 3)]).collect()
    } else {
        rotation_to_quaternion(r).to_vec()
    }
}

fn parse_rotation(v: &[f64], what: &str) -> Result<Rotation3, CliError> {
    rotation_from_slice(v).map_err(|e| CliError::Parse(format!("{what}: {e}")))
}

impl SceneFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let f: SceneFile =
            serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        if f.version != VERSION {
            return Err(CliError::Parse(format!(
                "unsupported scene version {}",
                f.version
            )));
        }
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scene serializes");
        s.push('\n');
        s
    }

    pub fn from_scene(
        scene: &Scene,
        observations: Option<&[EllipseObservation]>,
        emit_matrix: bool,
    ) -> Self {
        let i = scene.intrinsics;
        Self {
            version: VERSION,
            intrinsics: IntrinsicsRecord {
                fx: i.fx,
                fy: i.fy,
                cx: i.cx,
                cy: i.cy,
            },
            camera: Some(CameraRecord {
                rotation: rotation_record(&scene.camera.rotation, emit_matrix),
                position: scene.camera.position.into(),
            }),
            ellipsoids: scene
                .ellipsoids
                .iter()
                .map(|m| EllipsoidRecord {
                    center: m.center.into(),
                    radii: m.radii,
                    rotation: rotation_record(&m.rotation, emit_matrix),
                })
                .collect(),
            observations: observations.map(|o| o.iter().map(ObservationRecord::from).collect()),
        }
    }

    pub fn intrinsics(&self) -> Result<CameraIntrinsics, CliError> {
        let i = self.intrinsics;
        CameraIntrinsics::new(i.fx, i.fy, i.cx, i.cy)
            .map_err(|e| CliError::Parse(format!("intrinsics: {e}")))
    }

    pub fn camera(&self) -> Result<Option<CameraPose>, CliError> {
        self.camera
            .as_ref()
            .map(|c| {
                Ok(CameraPose {
                    rotation: parse_rotation(&c.rotation, "camera rotation")?,
                    position: Vec3::from(c.position),
                })
            })
            .transpose()
    }

    pub fn ellipsoid(&self, index: usize) -> Result<EllipsoidModel, CliError> {
        let e = self
            .ellipsoids
            .get(index)
            .ok_or_else(|| CliError::Usage(format!("no ellipsoid with index {index}")))?;
        let rotation = parse_rotation(&e.rotation, "ellipsoid rotation")?;
        EllipsoidModel::new(Vec3::from(e.center), rotation, e.radii)
            .map_err(|err| CliError::Parse(format!("ellipsoid {index}: {err}")))
    }

    pub fn observation(&self, index: usize) -> Result<Option<EllipseObservation>, CliError> {
        let Some(obs) = &self.observations else {
            return Ok(None);
        };
        let o = obs
            .get(index)
            .ok_or_else(|| CliError::Usage(format!("no observation with index {index}")))?;
        EllipseObservation::new(o.center, o.semi_axes, o.angle)
            .map(Some)
            .map_err(|e| CliError::Parse(format!("observation {index}: {e}")))
    }
}

impl From<&EllipseObservation> for ObservationRecord {
    fn from(o: &EllipseObservation) -> Self {
        Self {
            center: o.center,
            semi_axes: o.semi_axes,
            angle: o.angle,
        }
    }
}
