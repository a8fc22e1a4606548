//! Wavefront OBJ: `v` and `f` records only, 1-based (or negative relative)
//! indices. Polygons are split into triangle fans.

use std::fmt::Write as _;
use std::path::Path;

use drapegeom_core::{TriMesh, Vec3};

use super::Loaded;
use crate::error::{Error, Location, Result};

pub fn parse(text: &str, path: &Path) -> Result<Loaded> {
    let mut positions = Vec::new();
    let mut triangles = Vec::new();
    let mut warnings = Vec::new();
    let mut polygons = 0usize;
    let mut materials = false;
    let mut skipped = std::collections::BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = line.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        match tag {
            "v" => {
                let mut c = [0.0; 3];
                for slot in c.iter_mut() {
                    let tok = tokens
                        .next()
                        .ok_or_else(|| Error::parse(path, Location::Line(line_no), "vertex needs three coordinates"))?;
                    *slot = tok
                        .parse::<f64>()
                        .map_err(|_| Error::parse(path, Location::Line(line_no), format!("bad coordinate `{tok}`")))?;
                }
                positions.push(Vec3::from_array(c));
            }
            "f" => {
                let mut face = Vec::new();
                for tok in tokens {
                    let head = tok.split('/').next().unwrap_or("");
                    let idx: i64 = head
                        .parse()
                        .map_err(|_| Error::parse(path, Location::Line(line_no), format!("bad face index `{tok}`")))?;
                    let resolved = if idx > 0 {
                        idx - 1
                    } else if idx < 0 {
                        positions.len() as i64 + idx
                    } else {
                        return Err(Error::parse(path, Location::Line(line_no), "face index 0 (OBJ indices start at 1)"));
                    };
                    if resolved < 0 || resolved as usize >= positions.len() {
                        return Err(Error::parse(
                            path,
                            Location::Line(line_no),
                            format!("face index {idx} refers to a vertex not yet defined"),
                        ));
                    }
                    face.push(resolved as usize);
                }
                if face.len() < 3 {
                    return Err(Error::parse(path, Location::Line(line_no), "face needs at least three vertices"));
                }
                if face.len() > 3 {
                    polygons += 1;
                }
                for k in 1..face.len() - 1 {
                    triangles.push([face[0], face[k], face[k + 1]]);
                }
            }
            "mtllib" | "usemtl" => materials = true,
            "vt" | "vn" | "vp" | "o" | "g" | "s" => {}
            other => {
                skipped.insert(other.to_string());
            }
        }
    }
    if polygons > 0 {
        warnings.push(format!("{}: triangulated {polygons} polygon(s) as fans", path.display()));
    }
    if materials {
        warnings.push(format!("{}: material statements ignored", path.display()));
    }
    if !skipped.is_empty() {
        let list: Vec<String> = skipped.into_iter().collect();
        warnings.push(format!("{}: ignored records: {}", path.display(), list.join(", ")));
    }
    let mesh = TriMesh::new(positions, triangles)?;
    Ok(Loaded { mesh, fields: Vec::new(), warnings })
}

/// Text with nine significant digits per coordinate.
pub fn format(mesh: &TriMesh) -> String {
    let mut out = String::with_capacity(mesh.vertex_count() * 48 + mesh.face_count() * 24);
    for p in mesh.positions() {
        let _ = writeln!(out, "v {:.8e} {:.8e} {:.8e}", p.x, p.y, p.z);
    }
    for t in mesh.triangles() {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}
