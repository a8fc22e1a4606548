//! TOML scene descriptions for the synthetic generators.
//!
//! ```toml
//! seed = 3
//! jitter = 0.1          # optional, fraction of the average edge length
//!
//! [generator]
//! kind = "wrinkledPlane"
//! nx = 32
//! ny = 32
//! edge = 1.0
//! amplitude = 0.3
//! wavelength = 4.0
//! axis = "x"
//! ```

use std::path::Path;

use drapegeom_core::scene::{self, CapsuleParams, ClothPatch, WrinkleAxis};
use drapegeom_core::TriMesh;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Location, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub generator: Generator,
    #[serde(default)]
    pub seed: u64,
    /// Uniform per-coordinate noise drawn from `seed`, as a fraction of the
    /// average edge length. Zero leaves the generator output untouched.
    #[serde(default)]
    pub jitter: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapsuleSpec {
    pub radius: f64,
    pub length: f64,
    pub resolution: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClothSpec {
    pub nx: usize,
    pub ny: usize,
    pub edge: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", deny_unknown_fields)]
pub enum Generator {
    PlaneGrid { nx: usize, ny: usize, edge: f64 },
    Icosphere { subdiv: usize, radius: f64 },
    #[serde(rename_all = "camelCase")]
    Cylinder { n_circ: usize, n_len: usize, radius: f64, length: f64 },
    Capsule(CapsuleSpec),
    WrinkledPlane { nx: usize, ny: usize, edge: f64, amplitude: f64, wavelength: f64, axis: Axis },
    CapsuleDrape { body: CapsuleSpec, cloth: ClothSpec, gap: f64 },
}

/// Generator output: one mesh, or a body and a cloth.
#[derive(Debug, Clone, PartialEq)]
pub enum Generated {
    Single(TriMesh),
    Drape { body: TriMesh, cloth: TriMesh },
}

impl SceneSpec {
    pub fn load(path: &Path) -> Result<SceneSpec> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SceneSpec::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<SceneSpec> {
        toml::from_str(text).map_err(|e| {
            let location = e.span().map_or(Location::Unknown, |s| {
                Location::Line(text[..s.start.min(text.len())].matches('\n').count() + 1)
            });
            Error::parse(path, location, e.message().to_string())
        })
    }

    pub fn generate(&self) -> Result<Generated> {
        if !(self.jitter >= 0.0) || !self.jitter.is_finite() {
            return Err(Error::Config("jitter must be finite and non-negative".into()));
        }
        let capsule = |c: &CapsuleSpec| CapsuleParams { radius: c.radius, length: c.length, resolution: c.resolution };
        let out = match &self.generator {
            Generator::PlaneGrid { nx, ny, edge } => Generated::Single(scene::plane_grid(*nx, *ny, *edge)?),
            Generator::Icosphere { subdiv, radius } => Generated::Single(scene::icosphere(*subdiv, *radius)?),
            Generator::Cylinder { n_circ, n_len, radius, length } => {
                Generated::Single(scene::cylinder(*n_circ, *n_len, *radius, *length)?)
            }
            Generator::Capsule(c) => Generated::Single(scene::capsule(capsule(c))?),
            Generator::WrinkledPlane { nx, ny, edge, amplitude, wavelength, axis } => {
                let axis = match axis {
                    Axis::X => WrinkleAxis::X,
                    Axis::Y => WrinkleAxis::Y,
                };
                Generated::Single(scene::wrinkled_plane(*nx, *ny, *edge, *amplitude, *wavelength, axis)?)
            }
            Generator::CapsuleDrape { body, cloth, gap } => {
                let patch = ClothPatch { nx: cloth.nx, ny: cloth.ny, edge: cloth.edge };
                let (body, cloth) = scene::capsule_drape(capsule(body), patch, *gap)?;
                Generated::Drape { body, cloth }
            }
        };
        if self.jitter == 0.0 {
            return Ok(out);
        }
        // the cloth and the body get independent noise streams
        let shake = |m: &TriMesh, salt: u64| scene::perturbed(m, self.jitter, self.seed ^ salt);
        Ok(match out {
            Generated::Single(m) => Generated::Single(shake(&m, 0)),
            Generated::Drape { body, cloth } => Generated::Drape { body: shake(&body, 0x9e37_79b9), cloth: shake(&cloth, 0) },
        })
    }
}
