//! Geometry toolkit for garment draping: discrete curvature metrics,
//! physics-inspired draping losses with analytic gradients, evaluation
//! metrics, and gradient-descent mesh refinement.
//!
//! The crate is `no_std` and only needs `alloc`.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod curvature;
pub mod eigen;
pub mod grad;
pub mod error;
pub mod math;
pub mod losses;
pub mod mesh;
pub mod metrics;
pub mod refine;
pub mod scene;
pub mod spatial;

pub use error::{Error, Result};
pub use math::Vec3;
pub use mesh::TriMesh;
