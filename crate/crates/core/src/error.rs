use core::fmt;

/// Errors raised by mesh construction, queries, losses and refinement.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A triangle references a vertex that does not exist.
    IndexOutOfRange { triangle: usize, index: usize, vertex_count: usize },
    /// A triangle repeats a vertex index.
    DegenerateTriangle { triangle: usize },
    /// A mesh needs at least one triangle.
    NoTriangles,
    NoEdges,
    EmptyPointSet,
    KTooLarge { k: usize, available: usize },
    VertexCountMismatch { expected: usize, found: usize },
    FaceCountMismatch { expected: usize, found: usize },
    TopologyMismatch,
    EmptyTwoRing,
    /// A loss term needs a body mesh that was not supplied.
    MissingBody,
    DegenerateBoundingBox { axis: usize },
    DegenerateScene { attempts: usize },
    NonFiniteLoss { step: usize },
    InvalidParameter(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::IndexOutOfRange { triangle, index, vertex_count } => write!(
                f,
                "triangle {triangle} references vertex {index}, but the mesh has {vertex_count} vertices"
            ),
            Error::DegenerateTriangle { triangle } => {
                write!(f, "triangle {triangle} repeats a vertex index")
            }
            Error::NoTriangles => f.write_str("mesh has no triangles"),
            Error::NoEdges => f.write_str("mesh has no edges"),
            Error::EmptyPointSet => f.write_str("point set is empty"),
            Error::KTooLarge { k, available } => {
                write!(f, "requested {k} neighbors but only {available} points exist")
            }
            Error::VertexCountMismatch { expected, found } => {
                write!(f, "vertex count mismatch: expected {expected}, found {found}")
            }
            Error::FaceCountMismatch { expected, found } => {
                write!(f, "face count mismatch: expected {expected}, found {found}")
            }
            Error::TopologyMismatch => f.write_str("meshes do not share the same triangle list"),
            Error::EmptyTwoRing => f.write_str("mesh has no vertex pairs at graph distance two"),
            Error::MissingBody => f.write_str("the interpenetration term needs a body mesh"),
            Error::DegenerateBoundingBox { axis } => {
                write!(f, "ground-truth bounding box has zero extent on axis {axis}")
            }
            Error::DegenerateScene { attempts } => {
                write!(f, "no non-degenerate scene found after {attempts} attempts")
            }
            Error::NonFiniteLoss { step } => write!(f, "loss became non-finite at step {step}"),
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;

impl core::error::Error for Error {}
