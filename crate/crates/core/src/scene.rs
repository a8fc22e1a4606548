//! Deterministic synthetic meshes: grids, spheres, tubes, capsules, wrinkled
//! cloth and capsule/cloth draping pairs.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::{self, Vec3};
use crate::mesh::{average_edge_length, TriMesh};

/// Horizontal axis along which a wrinkled plane oscillates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WrinkleAxis {
    X,
    Y,
}

/// Parameters of a cloth patch wrapped around the cylindrical part of a
/// capsule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClothPatch {
    pub nx: usize,
    pub ny: usize,
    pub edge: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapsuleParams {
    pub radius: f64,
    pub length: f64,
    pub resolution: usize,
}

/// `nx × ny` vertices in the z = 0 plane, spacing `edge`, normals +z.
pub fn plane_grid(nx: usize, ny: usize, edge: f64) -> Result<TriMesh> {
    grid_with_height(nx, ny, edge, |_, _| 0.0)
}

/// Plane grid with `z = amplitude · sin(2π u / wavelength)`, `u` the chosen
/// horizontal coordinate.
pub fn wrinkled_plane(
    nx: usize,
    ny: usize,
    edge: f64,
    amplitude: f64,
    wavelength: f64,
    axis: WrinkleAxis,
) -> Result<TriMesh> {
    if amplitude < 0.0 {
        return Err(Error::InvalidParameter("amplitude must be non-negative"));
    }
    if !(wavelength > 0.0) {
        return Err(Error::InvalidParameter("wavelength must be positive"));
    }
    grid_with_height(nx, ny, edge, |x, y| {
        let u = match axis {
            WrinkleAxis::X => x,
            WrinkleAxis::Y => y,
        };
        amplitude * math::sin(2.0 * PI * u / wavelength)
    })
}

fn grid_with_height<F: Fn(f64, f64) -> f64>(nx: usize, ny: usize, edge: f64, height: F) -> Result<TriMesh> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidParameter("grid needs at least 2 vertices per side"));
    }
    if !(edge > 0.0) {
        return Err(Error::InvalidParameter("edge length must be positive"));
    }
    let mut positions = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let x = i as f64 * edge;
            let y = j as f64 * edge;
            positions.push(Vec3::new(x, y, height(x, y)));
        }
    }
    let mut triangles = Vec::with_capacity(2 * (nx - 1) * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let a = j * nx + i;
            let b = a + 1;
            let c = a + nx;
            let d = c + 1;
            triangles.push([a, b, d]);
            triangles.push([a, d, c]);
        }
    }
    TriMesh::new(positions, triangles)
}

/// Equilateral-triangle lattice in the z = 0 plane (rows offset by half an
/// edge), normals +z.
pub fn triangular_lattice(nx: usize, ny: usize, edge: f64) -> Result<TriMesh> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidParameter("lattice needs at least 2 vertices per side"));
    }
    let h = edge * math::sqrt(3.0) / 2.0;
    let mut positions = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let shift = if j % 2 == 1 { 0.5 * edge } else { 0.0 };
        for i in 0..nx {
            positions.push(Vec3::new(i as f64 * edge + shift, j as f64 * h, 0.0));
        }
    }
    let mut triangles = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let a = j * nx + i;
            let b = a + 1;
            let c = a + nx;
            let d = c + 1;
            if j % 2 == 0 {
                triangles.push([a, b, c]);
                triangles.push([b, d, c]);
            } else {
                triangles.push([a, d, c]);
                triangles.push([a, b, d]);
            }
        }
    }
    TriMesh::new(positions, triangles)
}

/// Subdivided icosahedron with every vertex at `radius` from the origin.
/// `subdiv` levels give `10·4^subdiv + 2` vertices.
pub fn icosphere(subdiv: usize, radius: f64) -> Result<TriMesh> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter("radius must be positive"));
    }
    let t = (1.0 + math::sqrt(5.0)) / 2.0;
    let mut positions: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|p| Vec3::from_array(*p))
    .collect();
    let mut triangles: Vec<[usize; 3]> = alloc::vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdiv {
        let mut midpoints: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for tri in &triangles {
            let mut mid = [0usize; 3];
            for c in 0..3 {
                let (a, b) = (tri[c], tri[(c + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mid[c] = *midpoints.entry(key).or_insert_with(|| {
                    positions.push((positions[a] + positions[b]) * 0.5);
                    positions.len() - 1
                });
            }
            next.push([tri[0], mid[0], mid[2]]);
            next.push([tri[1], mid[1], mid[0]]);
            next.push([tri[2], mid[2], mid[1]]);
            next.push([mid[0], mid[1], mid[2]]);
        }
        triangles = next;
    }
    for p in positions.iter_mut() {
        *p = *p * (radius / p.norm());
    }
    TriMesh::new(positions, triangles)
}

/// Open tube around the z axis, `n_circ` vertices per ring, `n_len` rings over
/// `length`. Alternate rings are rotated by half a step so triangles are
/// close to equilateral. Normals point away from the axis.
pub fn cylinder(n_circ: usize, n_len: usize, radius: f64, length: f64) -> Result<TriMesh> {
    if n_circ < 3 || n_len < 2 {
        return Err(Error::InvalidParameter("cylinder needs n_circ >= 3 and n_len >= 2"));
    }
    if !(radius > 0.0) || !(length > 0.0) {
        return Err(Error::InvalidParameter("cylinder radius and length must be positive"));
    }
    let step = 2.0 * PI / n_circ as f64;
    let mut positions = Vec::with_capacity(n_circ * n_len);
    for j in 0..n_len {
        let z = length * j as f64 / (n_len - 1) as f64;
        let offset = if j % 2 == 1 { 0.5 * step } else { 0.0 };
        for i in 0..n_circ {
            let theta = i as f64 * step + offset;
            positions.push(Vec3::new(radius * math::cos(theta), radius * math::sin(theta), z));
        }
    }
    let mut triangles = Vec::new();
    for j in 0..n_len - 1 {
        let lower = j * n_circ;
        let upper = lower + n_circ;
        for i in 0..n_circ {
            let i1 = (i + 1) % n_circ;
            if j % 2 == 0 {
                triangles.push([lower + i, lower + i1, upper + i]);
                triangles.push([upper + i, lower + i1, upper + i1]);
            } else {
                triangles.push([lower + i, upper + i1, upper + i]);
                triangles.push([lower + i, lower + i1, upper + i1]);
            }
        }
    }
    TriMesh::new(positions, triangles)
}

/// Closed capsule along the x axis: a cylinder of `length` capped by two
/// hemispheres of `radius`. `resolution` latitude rings per hemisphere,
/// `4·resolution` vertices per ring.
pub fn capsule(params: CapsuleParams) -> Result<TriMesh> {
    let CapsuleParams { radius, length, resolution } = params;
    if resolution < 2 {
        return Err(Error::InvalidParameter("capsule resolution must be at least 2"));
    }
    if !(radius > 0.0) || length < 0.0 {
        return Err(Error::InvalidParameter("capsule radius must be positive and length non-negative"));
    }
    let n_circ = 4 * resolution;
    let half = 0.5 * length;
    // (x, ring radius) from the +x pole towards the -x pole, poles excluded
    let mut rings: Vec<(f64, f64)> = Vec::new();
    for k in 1..=resolution {
        let phi = k as f64 * 0.5 * PI / resolution as f64;
        rings.push((half + radius * math::cos(phi), radius * math::sin(phi)));
    }
    if length > 0.0 {
        let spacing = 2.0 * PI * radius / n_circ as f64;
        let segments = ((length / spacing) + 0.5) as usize;
        let segments = segments.max(1);
        for s in 1..segments {
            rings.push((half - length * s as f64 / segments as f64, radius));
        }
        rings.push((-half, radius));
    }
    for k in (1..resolution).rev() {
        let phi = k as f64 * 0.5 * PI / resolution as f64;
        rings.push((-half - radius * math::cos(phi), radius * math::sin(phi)));
    }

    let mut positions = Vec::with_capacity(rings.len() * n_circ + 2);
    positions.push(Vec3::new(half + radius, 0.0, 0.0));
    for &(x, rho) in &rings {
        for i in 0..n_circ {
            let theta = 2.0 * PI * i as f64 / n_circ as f64;
            positions.push(Vec3::new(x, rho * math::cos(theta), rho * math::sin(theta)));
        }
    }
    let south = positions.len();
    positions.push(Vec3::new(-half - radius, 0.0, 0.0));

    let ring_start = |r: usize| 1 + r * n_circ;
    let mut triangles = Vec::new();
    for i in 0..n_circ {
        let i1 = (i + 1) % n_circ;
        triangles.push([0, ring_start(0) + i, ring_start(0) + i1]);
    }
    for r in 0..rings.len() - 1 {
        let a = ring_start(r);
        let b = ring_start(r + 1);
        for i in 0..n_circ {
            let i1 = (i + 1) % n_circ;
            triangles.push([a + i, b + i, a + i1]);
            triangles.push([a + i1, b + i, b + i1]);
        }
    }
    let last = ring_start(rings.len() - 1);
    for i in 0..n_circ {
        let i1 = (i + 1) % n_circ;
        triangles.push([south, last + i1, last + i]);
    }
    TriMesh::new(positions, triangles)
}

/// A capsule body and a cloth patch wrapped around its top at radius
/// `radius + gap`. A negative gap puts the cloth inside the body.
pub fn capsule_drape(body: CapsuleParams, cloth: ClothPatch, gap: f64) -> Result<(TriMesh, TriMesh)> {
    let body_mesh = capsule(body)?;
    let rho = body.radius + gap;
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter("gap pushes the cloth through the capsule axis"));
    }
    let flat = plane_grid(cloth.nx, cloth.ny, cloth.edge)?;
    let width = (cloth.nx - 1) as f64 * cloth.edge;
    let depth = (cloth.ny - 1) as f64 * cloth.edge;
    if depth > body.length {
        return Err(Error::InvalidParameter("cloth patch is longer than the capsule's cylinder"));
    }
    let cloth_mesh = flat.map_positions(|p| {
        // u runs around the tube, v along its axis
        let theta = 0.5 * PI + (p.x - 0.5 * width) / rho;
        let x = p.y - 0.5 * depth;
        Vec3::new(x, rho * math::cos(theta), rho * math::sin(theta))
    });
    Ok((body_mesh, cloth_mesh))
}

/// Copy of `mesh` with each coordinate displaced uniformly in
/// `[-fraction·ℓ, fraction·ℓ]`, ℓ the average edge length.
pub fn perturbed(mesh: &TriMesh, fraction: f64, seed: u64) -> TriMesh {
    let scale = fraction * average_edge_length(mesh).unwrap_or(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    mesh.map_positions(|p| {
        let d = Vec3::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        p + d * scale
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        let g = plane_grid(3, 3, 1.0).unwrap();
        assert_eq!(g.vertex_count(), 9);
        assert_eq!(g.face_count(), 8);
        assert!(crate::mesh::facet_normals(&g).normals.iter().all(|n| *n == Vec3::new(0.0, 0.0, 1.0)));
    }

    #[test]
    fn icosphere_counts_and_radius() {
        let s = icosphere(3, 1.0).unwrap();
        assert_eq!(s.vertex_count(), 642);
        assert!(s.positions().iter().all(|p| (p.norm() - 1.0).abs() <= 1e-12));
        assert!(s.validation().is_clean());
        assert_eq!(s.validation().boundary_edges, 0);
        // outward orientation
        let n = crate::mesh::facet_normals(&s);
        for f in 0..s.face_count() {
            let [a, b, c] = s.corners(f);
            assert!(n.normals[f].dot(a + b + c) > 0.0);
        }
    }

    #[test]
    fn flat_wrinkle_is_plane() {
        let w = wrinkled_plane(6, 5, 0.7, 0.0, 3.0, WrinkleAxis::X).unwrap();
        let p = plane_grid(6, 5, 0.7).unwrap();
        assert_eq!(w, p);
    }

    #[test]
    fn cylinder_and_capsule_are_outward_and_manifold() {
        let c = cylinder(16, 6, 2.0, 3.0).unwrap();
        let v = c.validation();
        assert!(v.zero_area_faces.is_empty());
        assert_eq!(v.inconsistent_orientation_edges, 0);
        assert_eq!(v.boundary_edges, 32);
        let n = crate::mesh::facet_normals(&c);
        for f in 0..c.face_count() {
            let [a, b, cc] = c.corners(f);
            let centroid = (a + b + cc) / 3.0;
            assert!(n.normals[f].dot(Vec3::new(centroid.x, centroid.y, 0.0)) > 0.0);
        }

        let cap = capsule(CapsuleParams { radius: 1.5, length: 4.0, resolution: 6 }).unwrap();
        let v = cap.validation();
        assert!(v.is_clean(), "{v:?}");
        assert_eq!(v.boundary_edges, 0);
        let n = crate::mesh::facet_normals(&cap);
        for f in 0..cap.face_count() {
            let [a, b, cc] = cap.corners(f);
            let centroid = (a + b + cc) / 3.0;
            let axis_point = Vec3::new(centroid.x.clamp(-2.0, 2.0), 0.0, 0.0);
            assert!(n.normals[f].dot(centroid - axis_point) > 0.0);
        }
    }

    #[test]
    fn drape_patch_sits_at_requested_radius() {
        let (body, cloth) = capsule_drape(
            CapsuleParams { radius: 3.0, length: 8.0, resolution: 8 },
            ClothPatch { nx: 5, ny: 5, edge: 0.5 },
            -0.5,
        )
        .unwrap();
        assert_eq!(cloth.vertex_count(), 25);
        for p in cloth.positions() {
            assert!((math::sqrt(p.y * p.y + p.z * p.z) - 2.5).abs() < 1e-12);
            assert!(p.z > 0.0);
        }
        // patch normals point away from the axis
        let n = crate::mesh::facet_normals(&cloth);
        let [a, _, _] = cloth.corners(0);
        assert!(n.normals[0].dot(Vec3::new(0.0, a.y, a.z)) > 0.0);
        assert!(body.vertex_count() > 100);
    }

    #[test]
    fn perturbation_is_deterministic() {
        let g = plane_grid(4, 4, 1.0).unwrap();
        assert_eq!(perturbed(&g, 0.1, 3), perturbed(&g, 0.1, 3));
        assert_ne!(perturbed(&g, 0.1, 3), perturbed(&g, 0.1, 4));
    }
}
