//! Per-vertex CSV: `vertex_index,x,y,z` followed by one column per value.

use std::fmt::Write as _;

use drapegeom_core::TriMesh;

use super::ScalarField;
use crate::error::{Error, Result};

/// Columns are written in the given order; non-finite values are written as
/// `NaN`, `inf` or `-inf`.
pub fn format(mesh: &TriMesh, columns: &[ScalarField]) -> Result<String> {
    let n = mesh.vertex_count();
    for c in columns {
        if c.values.len() != n {
            return Err(Error::Config(format!("column `{}` has {} values for {} vertices", c.name, c.values.len(), n)));
        }
        if c.name.contains([',', '\n', '"']) {
            return Err(Error::Config(format!("column name `{}` needs quoting", c.name)));
        }
    }
    let mut out = String::from("vertex_index,x,y,z");
    for c in columns {
        out.push(',');
        out.push_str(&c.name);
    }
    out.push('\n');
    for (i, p) in mesh.positions().iter().enumerate() {
        let _ = write!(out, "{i},{:?},{:?},{:?}", p.x, p.y, p.z);
        for c in columns {
            let _ = write!(out, ",{:?}", c.values[i]);
        }
        out.push('\n');
    }
    Ok(out)
}
