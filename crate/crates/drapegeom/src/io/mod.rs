//! Mesh files: OBJ and binary little-endian PLY, plus CSV export of
//! per-vertex values.

pub mod csv;
pub mod obj;
pub mod ply;

use std::path::Path;

use drapegeom_core::TriMesh;

use crate::error::{Error, Location, Result};
pub use ply::Precision;

/// A named per-vertex scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub name: String,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        ScalarField { name: name.into(), values }
    }
}

#[derive(Debug, Clone)]
pub struct Loaded {
    pub mesh: TriMesh,
    /// Extra per-vertex PLY properties, in file order.
    pub fields: Vec<ScalarField>,
    /// Lossy conversions and ignored records.
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Obj,
    Ply,
}

impl Format {
    pub fn from_path(path: &Path) -> Result<Format> {
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("obj") => Ok(Format::Obj),
            Some("ply") => Ok(Format::Ply),
            _ => Err(Error::UnsupportedFeature {
                path: path.into(),
                message: "mesh files must end in .obj or .ply".into(),
            }),
        }
    }
}

pub fn load_mesh(path: &Path) -> Result<Loaded> {
    let format = Format::from_path(path)?;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let loaded = match format {
        Format::Obj => {
            let text = std::str::from_utf8(&bytes).map_err(|e| {
                Error::parse(path, Location::Offset(e.valid_up_to() as u64), "OBJ is not valid UTF-8")
            })?;
            obj::parse(text, path)
        }
        Format::Ply => ply::parse(&bytes, path),
    };
    // invalid connectivity is a property of the file, not of the request
    loaded.map_err(|e| match e {
        Error::Geometry(g) => Error::parse(path, Location::Unknown, g.to_string()),
        other => other,
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SaveOptions {
    pub precision: Precision,
    /// Field index whose values drive a PLY color ramp.
    pub color_by: Option<usize>,
}

/// Writes `mesh` in the format named by the extension. OBJ has no place for
/// fields, so they are dropped with a warning.
pub fn save_mesh(path: &Path, mesh: &TriMesh, fields: &[ScalarField], options: SaveOptions) -> Result<Vec<String>> {
    let mut warnings = Vec::new();
    let bytes = match Format::from_path(path)? {
        Format::Obj => {
            if !fields.is_empty() {
                warnings.push(format!("{}: OBJ cannot store per-vertex fields; {} dropped", path.display(), fields.len()));
            }
            obj::format(mesh).into_bytes()
        }
        Format::Ply => ply::encode(
            mesh,
            &ply::WriteOptions { precision: options.precision, fields, color_by: options.color_by },
        )?,
    };
    write_file(path, &bytes)?;
    Ok(warnings)
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
