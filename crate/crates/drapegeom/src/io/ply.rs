//! Binary little-endian PLY with named per-vertex scalar properties and an
//! optional RGB color ramp.

use std::io::Write as _;
use std::path::Path;

use drapegeom_core::{TriMesh, Vec3};

use super::{Loaded, ScalarField};
use crate::error::{Error, Location, Result};

/// Position precision of written files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Precision {
    #[default]
    Double,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Scalar> {
        Some(match name {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug)]
enum Property {
    Scalar { name: String, ty: Scalar },
    List { name: String, count: Scalar, item: Scalar },
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
    base: usize,
    path: &'a Path,
}

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.pos + n > self.data.len() {
            return Err(Error::parse(self.path, Location::Offset((self.base + self.pos) as u64), "unexpected end of data"));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn scalar(&mut self, ty: Scalar) -> Result<f64> {
        let b = self.take(ty.size())?;
        Ok(ty.read(b))
    }

    fn offset(&self) -> u64 {
        (self.base + self.pos) as u64
    }
}

fn header_error(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::parse(path, Location::Line(line), msg)
}

pub fn parse(bytes: &[u8], path: &Path) -> Result<Loaded> {
    const END: &[u8] = b"end_header";
    let end = bytes
        .windows(END.len())
        .position(|w| w == END)
        .ok_or_else(|| Error::parse(path, Location::Unknown, "missing end_header"))?;
    let mut body_start = end + END.len();
    if bytes.get(body_start) == Some(&b'\r') {
        body_start += 1;
    }
    if bytes.get(body_start) != Some(&b'\n') {
        return Err(Error::parse(path, Location::Offset(body_start as u64), "end_header must end its line"));
    }
    body_start += 1;
    let header = std::str::from_utf8(&bytes[..end]).map_err(|_| Error::parse(path, Location::Unknown, "header is not text"))?;
    let mut elements: Vec<Element> = Vec::new();
    let mut lines = header.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(header_error(path, 1, "missing `ply` magic")),
    }
    let mut format_seen = false;
    for (i, line) in lines {
        let n = i + 1;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            [] => {}
            ["comment", ..] | ["obj_info", ..] => {}
            ["format", fmt, _version] => {
                if *fmt != "binary_little_endian" {
                    return Err(Error::UnsupportedFeature { path: path.into(), message: format!("PLY format `{fmt}`") });
                }
                format_seen = true;
            }
            ["element", name, count] => {
                let count = count.parse().map_err(|_| header_error(path, n, format!("bad element count `{count}`")))?;
                elements.push(Element { name: name.to_string(), count, properties: Vec::new() });
            }
            ["property", "list", count, item, name] => {
                let el = elements.last_mut().ok_or_else(|| header_error(path, n, "property before element"))?;
                let count = Scalar::parse(count).ok_or_else(|| header_error(path, n, format!("unknown type `{count}`")))?;
                let item = Scalar::parse(item).ok_or_else(|| header_error(path, n, format!("unknown type `{item}`")))?;
                el.properties.push(Property::List { name: name.to_string(), count, item });
            }
            ["property", ty, name] => {
                let el = elements.last_mut().ok_or_else(|| header_error(path, n, "property before element"))?;
                let ty = Scalar::parse(ty).ok_or_else(|| header_error(path, n, format!("unknown type `{ty}`")))?;
                el.properties.push(Property::Scalar { name: name.to_string(), ty });
            }
            _ => return Err(header_error(path, n, format!("unrecognized header line `{line}`"))),
        }
    }
    if !format_seen {
        return Err(Error::parse(path, Location::Unknown, "missing format line"));
    }

    let mut cur = Cursor { data: &bytes[body_start..], pos: 0, base: body_start, path };
    let mut positions = Vec::new();
    let mut fields: Vec<ScalarField> = Vec::new();
    let mut triangles = Vec::new();
    let mut warnings = Vec::new();
    let mut polygons = 0usize;
    for el in &elements {
        match el.name.as_str() {
            "vertex" => {
                let mut axis = [None; 3];
                for (k, p) in el.properties.iter().enumerate() {
                    if let Property::Scalar { name, .. } = p {
                        match name.as_str() {
                            "x" => axis[0] = Some(k),
                            "y" => axis[1] = Some(k),
                            "z" => axis[2] = Some(k),
                            "red" | "green" | "blue" | "alpha" => {}
                            _ => fields.push(ScalarField { name: name.clone(), values: Vec::with_capacity(el.count) }),
                        }
                    }
                }
                let axis = [axis[0], axis[1], axis[2]];
                if axis.iter().any(|a| a.is_none()) {
                    return Err(Error::parse(path, Location::Unknown, "vertex element needs x, y and z"));
                }
                let mut row = vec![0.0; el.properties.len()];
                for _ in 0..el.count {
                    for (k, p) in el.properties.iter().enumerate() {
                        row[k] = match p {
                            Property::Scalar { ty, .. } => cur.scalar(*ty)?,
                            Property::List { count, item, .. } => {
                                let n = cur.scalar(*count)? as usize;
                                cur.take(n * item.size())?;
                                0.0
                            }
                        };
                    }
                    positions.push(Vec3::new(row[axis[0].unwrap()], row[axis[1].unwrap()], row[axis[2].unwrap()]));
                    let mut f = 0;
                    for (k, p) in el.properties.iter().enumerate() {
                        if let Property::Scalar { name, .. } = p {
                            if !matches!(name.as_str(), "x" | "y" | "z" | "red" | "green" | "blue" | "alpha") {
                                fields[f].values.push(row[k]);
                                f += 1;
                            }
                        }
                    }
                }
            }
            "face" => {
                for _ in 0..el.count {
                    for p in &el.properties {
                        match p {
                            Property::List { name, count, item } if name == "vertex_indices" || name == "vertex_index" => {
                                let at = cur.offset();
                                let n = cur.scalar(*count)? as usize;
                                if n < 3 {
                                    return Err(Error::parse(path, Location::Offset(at), "face needs at least three vertices"));
                                }
                                let mut face = Vec::with_capacity(n);
                                for _ in 0..n {
                                    let v = cur.scalar(*item)?;
                                    if v < 0.0 {
                                        return Err(Error::parse(path, Location::Offset(at), "negative vertex index"));
                                    }
                                    face.push(v as usize);
                                }
                                if n > 3 {
                                    polygons += 1;
                                }
                                for k in 1..n - 1 {
                                    triangles.push([face[0], face[k], face[k + 1]]);
                                }
                            }
                            Property::List { count, item, .. } => {
                                let n = cur.scalar(*count)? as usize;
                                cur.take(n * item.size())?;
                            }
                            Property::Scalar { ty, .. } => {
                                cur.take(ty.size())?;
                            }
                        }
                    }
                }
            }
            other => {
                warnings.push(format!("{}: skipped element `{other}`", path.display()));
                for _ in 0..el.count {
                    for p in &el.properties {
                        match p {
                            Property::Scalar { ty, .. } => {
                                cur.take(ty.size())?;
                            }
                            Property::List { count, item, .. } => {
                                let n = cur.scalar(*count)? as usize;
                                cur.take(n * item.size())?;
                            }
                        }
                    }
                }
            }
        }
    }
    if polygons > 0 {
        warnings.push(format!("{}: triangulated {polygons} polygon(s) as fans", path.display()));
    }
    let mesh = TriMesh::new(positions, triangles)?;
    Ok(Loaded { mesh, fields, warnings })
}

/// Linear three-stop ramp (blue, light gray, red) over `[min, max]` of the
/// finite values; non-finite values are mid gray.
pub fn color_ramp(values: &[f64]) -> Vec<[u8; 3]> {
    let (lo, hi) = values
        .iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    const STOPS: [[f64; 3]; 3] = [[59.0, 76.0, 192.0], [221.0, 221.0, 221.0], [180.0, 4.0, 38.0]];
    values
        .iter()
        .map(|v| {
            if !v.is_finite() {
                return [128, 128, 128];
            }
            let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.5 };
            let (a, b, s) = if t < 0.5 { (STOPS[0], STOPS[1], 2.0 * t) } else { (STOPS[1], STOPS[2], 2.0 * t - 1.0) };
            [0, 1, 2].map(|c| (a[c] + (b[c] - a[c]) * s).round() as u8)
        })
        .collect()
}

/// Options of [`encode`].
#[derive(Debug, Clone, Default)]
pub struct WriteOptions<'a> {
    pub precision: Precision,
    pub fields: &'a [ScalarField],
    /// Index into `fields` whose values drive the color ramp.
    pub color_by: Option<usize>,
}

pub fn encode(mesh: &TriMesh, opts: &WriteOptions) -> Result<Vec<u8>> {
    let n = mesh.vertex_count();
    for f in opts.fields {
        if f.values.len() != n {
            return Err(Error::Config(format!("field `{}` has {} values for {} vertices", f.name, f.values.len(), n)));
        }
        if f.name.is_empty() || f.name.chars().any(|c| c.is_whitespace()) {
            return Err(Error::Config(format!("field name `{}` is not a PLY identifier", f.name)));
        }
    }
    let colors = match opts.color_by {
        Some(i) => Some(color_ramp(&opts.fields.get(i).ok_or_else(|| Error::Config("color field out of range".into()))?.values)),
        None => None,
    };
    let (pty, fty) = match opts.precision {
        Precision::Double => ("double", "double"),
        Precision::Single => ("float", "float"),
    };
    let mut out = Vec::new();
    let mut header = String::new();
    header.push_str("ply\nformat binary_little_endian 1.0\ncomment drapegeom\n");
    header.push_str(&format!("element vertex {n}\n"));
    for a in ["x", "y", "z"] {
        header.push_str(&format!("property {pty} {a}\n"));
    }
    for f in opts.fields {
        header.push_str(&format!("property {fty} {}\n", f.name));
    }
    if colors.is_some() {
        header.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    }
    header.push_str(&format!("element face {}\nproperty list uchar int vertex_indices\nend_header\n", mesh.face_count()));
    out.extend_from_slice(header.as_bytes());
    let put = |out: &mut Vec<u8>, v: f64| match opts.precision {
        Precision::Double => out.extend_from_slice(&v.to_le_bytes()),
        Precision::Single => out.extend_from_slice(&(v as f32).to_le_bytes()),
    };
    for (i, p) in mesh.positions().iter().enumerate() {
        put(&mut out, p.x);
        put(&mut out, p.y);
        put(&mut out, p.z);
        for f in opts.fields {
            put(&mut out, f.values[i]);
        }
        if let Some(c) = &colors {
            out.extend_from_slice(&c[i]);
        }
    }
    for t in mesh.triangles() {
        out.push(3);
        for &v in t {
            let v = i32::try_from(v).map_err(|_| Error::Config("vertex index exceeds PLY int range".into()))?;
            out.write_all(&v.to_le_bytes()).expect("writing to a vector");
        }
    }
    Ok(out)
}
