//! JSON scene descriptions for the synthetic terrain oracle: a camera
//! block plus a terrain block, frame size, and march parameters.
//!
//! ```json
//! {
//!   "camera": { "k": [fx,0,cx, 0,fy,cy, 0,0,1], "r": [9 reals], "t": [3 reals], "h": 1.65 },
//!   "width": 64, "height": 48,
//!   "terrain": { "kind": "ramp", "height": 1.65, "gradient": 0.05 },
//!   "max_depth": 120.0,
//!   "step": 0.01
//! }
//! ```
//!
//! `max_depth` may be omitted for plane and ramp terrains (no truncation);
//! marched terrains require it. `step` defaults to 0.01 m.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::camera::CameraModel;
use crate::error::{Error, Result};
use crate::oracle::{OracleScene, TerrainProfile};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneFile {
    pub camera: CameraBlock,
    pub width: usize,
    pub height: usize,
    pub terrain: TerrainBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_depth: Option<f64>,
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_step() -> f64 {
    0.01
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CameraBlock {
    /// Row-major 3×3 intrinsics.
    pub k: [f64; 9],
    /// Row-major 3×3 rotation.
    pub r: [f64; 9],
    /// Translation in meters.
    pub t: [f64; 3],
    /// Planar ground height in meters.
    pub h: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TerrainBlock {
    Plane {
        height: f64,
    },
    Ramp {
        height: f64,
        gradient: f64,
    },
    Sine {
        height: f64,
        amplitude: f64,
        wavelength: f64,
    },
}

impl SceneFile {
    pub fn from_json(text: &str, source: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::parse(format!("{source}:{}:{}: {e}", e.line(), e.column())))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serialization cannot fail")
    }

    pub fn to_scene<S: Scalar>(&self) -> Result<OracleScene<S>> {
        let cam = self.camera.to_camera()?;
        let terrain = match self.terrain {
            TerrainBlock::Plane { height } => TerrainProfile::Plane {
                height: S::of(height),
            },
            TerrainBlock::Ramp { height, gradient } => TerrainProfile::Ramp {
                height: S::of(height),
                gradient: S::of(gradient),
            },
            TerrainBlock::Sine {
                height,
                amplitude,
                wavelength,
            } => TerrainProfile::Sine {
                height: S::of(height),
                amplitude: S::of(amplitude),
                wavelength: S::of(wavelength),
            },
        };
        OracleScene::new(
            cam,
            terrain,
            self.width,
            self.height,
            self.max_depth.map(S::of),
            S::of(self.step),
        )
    }
}

impl CameraBlock {
    pub fn to_camera<S: Scalar>(&self) -> Result<CameraModel<S>> {
        let mut k = [[S::zero(); 3]; 3];
        let mut r = [[S::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                k[i][j] = S::of(self.k[3 * i + j]);
                r[i][j] = S::of(self.r[3 * i + j]);
            }
        }
        let t = [S::of(self.t[0]), S::of(self.t[1]), S::of(self.t[2])];
        CameraModel::new(k, r, t, S::of(self.h))
    }
}

pub fn load_scene_file(path: impl AsRef<Path>) -> Result<SceneFile> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    SceneFile::from_json(&text, &path.display().to_string())
}
