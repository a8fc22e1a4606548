//! Triangle meshes with validated topology, neighborhood tables, normals and
//! per-vertex areas.
//!
//! Positions are in centimeters. Triangles are counter-clockwise when seen
//! from the side their normal points to.

use alloc::collections::BTreeSet;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math::{self, Vec3};

/// Faces with `|e1 × e2| ≤ ZERO_AREA_FACTOR · ℓ²` (ℓ the average edge length)
/// count as zero-area.
pub const ZERO_AREA_FACTOR: f64 = 1e-12;

/// An undirected edge `a < b` and the faces that contain it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub faces: Vec<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.faces.len() == 1
    }

    pub fn is_manifold(&self) -> bool {
        self.faces.len() <= 2
    }
}

/// Topological warnings collected while building a mesh. None of these stop
/// construction.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationSummary {
    pub zero_area_faces: Vec<usize>,
    pub non_manifold_edges: usize,
    pub boundary_edges: usize,
    /// Interior manifold edges traversed in the same direction by both faces.
    pub inconsistent_orientation_edges: usize,
    pub isolated_vertices: usize,
}

impl ValidationSummary {
    pub fn is_clean(&self) -> bool {
        self.zero_area_faces.is_empty()
            && self.non_manifold_edges == 0
            && self.inconsistent_orientation_edges == 0
            && self.isolated_vertices == 0
    }
}

/// Connectivity derived from the triangle list. Shared between meshes that
/// only differ in vertex positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    vertex_count: usize,
    triangles: Vec<[usize; 3]>,
    one_ring: Vec<Vec<usize>>,
    vertex_faces: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    two_edge_pairs: Vec<(usize, usize)>,
    boundary: Vec<bool>,
    non_manifold_edges: usize,
    boundary_edges: usize,
    inconsistent_orientation_edges: usize,
    isolated_vertices: usize,
}

impl Topology {
    fn build(vertex_count: usize, triangles: Vec<[usize; 3]>) -> Result<Topology> {
        if triangles.is_empty() {
            return Err(Error::NoTriangles);
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &index in tri {
                if index >= vertex_count {
                    return Err(Error::IndexOutOfRange { triangle: t, index, vertex_count });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::DegenerateTriangle { triangle: t });
            }
        }

        let mut vertex_faces = vec![Vec::new(); vertex_count];
        // (min, max, face, forward) where forward means the face walks min -> max
        let mut half_edges: Vec<(usize, usize, usize, bool)> = Vec::with_capacity(3 * triangles.len());
        for (f, tri) in triangles.iter().enumerate() {
            for c in 0..3 {
                vertex_faces[tri[c]].push(f);
                let (u, v) = (tri[c], tri[(c + 1) % 3]);
                half_edges.push((u.min(v), u.max(v), f, u < v));
            }
        }
        half_edges.sort_unstable();

        let mut edges: Vec<Edge> = Vec::new();
        let mut non_manifold_edges = 0;
        let mut boundary_edges = 0;
        let mut inconsistent_orientation_edges = 0;
        let mut boundary = vec![false; vertex_count];
        let mut start = 0;
        while start < half_edges.len() {
            let (a, b, _, _) = half_edges[start];
            let mut end = start;
            while end < half_edges.len() && half_edges[end].0 == a && half_edges[end].1 == b {
                end += 1;
            }
            let group = &half_edges[start..end];
            match group.len() {
                1 => {
                    boundary_edges += 1;
                    boundary[a] = true;
                    boundary[b] = true;
                }
                2 => {
                    if group[0].3 == group[1].3 {
                        inconsistent_orientation_edges += 1;
                    }
                }
                _ => {
                    non_manifold_edges += 1;
                    boundary[a] = true;
                    boundary[b] = true;
                }
            }
            edges.push(Edge { a, b, faces: group.iter().map(|h| h.2).collect() });
            start = end;
        }

        let mut one_ring = vec![Vec::new(); vertex_count];
        for e in &edges {
            one_ring[e.a].push(e.b);
            one_ring[e.b].push(e.a);
        }
        for ring in one_ring.iter_mut() {
            ring.sort_unstable();
        }
        let mut isolated_vertices = 0;
        for (v, faces) in vertex_faces.iter().enumerate() {
            if faces.is_empty() {
                isolated_vertices += 1;
                boundary[v] = true;
            }
        }

        let mut pairs = BTreeSet::new();
        for ring in &one_ring {
            for (x, &i) in ring.iter().enumerate() {
                for &k in &ring[x + 1..] {
                    if one_ring[i].binary_search(&k).is_err() {
                        pairs.insert((i, k));
                    }
                }
            }
        }

        Ok(Topology {
            vertex_count,
            triangles,
            one_ring,
            vertex_faces,
            edges,
            two_edge_pairs: pairs.into_iter().collect(),
            boundary,
            non_manifold_edges,
            boundary_edges,
            inconsistent_orientation_edges,
            isolated_vertices,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Edge-connected neighbors of `v`, ascending.
    pub fn one_ring(&self, v: usize) -> &[usize] {
        &self.one_ring[v]
    }

    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    /// Unique edges sorted by `(a, b)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Unordered vertex pairs at graph distance exactly two, `i < k`.
    pub fn two_edge_pairs(&self) -> &[(usize, usize)] {
        &self.two_edge_pairs
    }

    /// True for vertices on a boundary or non-manifold edge, and for isolated
    /// vertices.
    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.one_ring[a].binary_search(&b).is_ok()
    }
}

/// Vertex positions plus shared, immutable topology.
#[derive(Debug, Clone)]
pub struct TriMesh {
    positions: Vec<Vec3>,
    topology: Arc<Topology>,
}

impl PartialEq for TriMesh {
    fn eq(&self, other: &Self) -> bool {
        self.positions == other.positions && self.same_topology(other)
    }
}

impl TriMesh {
    /// Builds a mesh and its adjacency. Rejects out-of-range indices and
    /// repeated indices; zero-area faces and non-manifold edges are reported
    /// by [`TriMesh::validation`].
    pub fn new(positions: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<TriMesh> {
        let topology = Topology::build(positions.len(), triangles)?;
        Ok(TriMesh { positions, topology: Arc::new(topology) })
    }

    /// Same topology, new positions.
    pub fn with_positions(&self, positions: Vec<Vec3>) -> Result<TriMesh> {
        if positions.len() != self.positions.len() {
            return Err(Error::VertexCountMismatch {
                expected: self.positions.len(),
                found: positions.len(),
            });
        }
        Ok(TriMesh { positions, topology: Arc::clone(&self.topology) })
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn position(&self, v: usize) -> Vec3 {
        self.positions[v]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        self.topology.triangles()
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn face_count(&self) -> usize {
        self.topology.triangles.len()
    }

    pub fn same_topology(&self, other: &TriMesh) -> bool {
        Arc::ptr_eq(&self.topology, &other.topology)
            || (self.topology.vertex_count == other.topology.vertex_count
                && self.topology.triangles == other.topology.triangles)
    }

    pub fn corners(&self, face: usize) -> [Vec3; 3] {
        let t = self.triangles()[face];
        [self.positions[t[0]], self.positions[t[1]], self.positions[t[2]]]
    }

    /// Unnormalized face normal `(p1 - p0) × (p2 - p0)`; its norm is twice the area.
    pub fn face_cross(&self, face: usize) -> Vec3 {
        let [p0, p1, p2] = self.corners(face);
        (p1 - p0).cross(p2 - p0)
    }

    pub fn face_area(&self, face: usize) -> f64 {
        0.5 * self.face_cross(face).norm()
    }

    pub fn total_area(&self) -> f64 {
        math::sum((0..self.face_count()).map(|f| self.face_area(f)))
    }

    /// Threshold on `|e1 × e2|` below which a face counts as zero-area.
    pub fn zero_area_threshold(&self) -> f64 {
        let l = average_edge_length(self).unwrap_or(0.0);
        ZERO_AREA_FACTOR * l * l
    }

    pub fn zero_area_faces(&self) -> Vec<usize> {
        let threshold = self.zero_area_threshold();
        (0..self.face_count()).filter(|&f| self.face_cross(f).norm() <= threshold).collect()
    }

    pub fn validation(&self) -> ValidationSummary {
        let t = &self.topology;
        ValidationSummary {
            zero_area_faces: self.zero_area_faces(),
            non_manifold_edges: t.non_manifold_edges,
            boundary_edges: t.boundary_edges,
            inconsistent_orientation_edges: t.inconsistent_orientation_edges,
            isolated_vertices: t.isolated_vertices,
        }
    }

    /// Copy with every triangle's winding reversed.
    pub fn flipped(&self) -> TriMesh {
        let triangles = self.triangles().iter().map(|t| [t[0], t[2], t[1]]).collect();
        TriMesh::new(self.positions.clone(), triangles).expect("flipping preserves validity")
    }

    /// Copy with every position mapped through `f`, sharing topology.
    pub fn map_positions<F: FnMut(Vec3) -> Vec3>(&self, f: F) -> TriMesh {
        TriMesh {
            positions: self.positions.iter().copied().map(f).collect(),
            topology: Arc::clone(&self.topology),
        }
    }
}

/// Interior angles of a triangle at its three corners, in radians.
pub fn triangle_angles(p: [Vec3; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for c in 0..3 {
        let u = p[(c + 1) % 3] - p[c];
        let v = p[(c + 2) % 3] - p[c];
        out[c] = math::atan2(u.cross(v).norm(), u.dot(v));
    }
    out
}

/// Mixed (Voronoi / obtuse-fallback) area of one triangle attributed to each
/// corner. Zero-area triangles contribute nothing.
pub fn triangle_mixed_areas(p: [Vec3; 3]) -> [f64; 3] {
    let cross = (p[1] - p[0]).cross(p[2] - p[0]);
    let twice_area = cross.norm();
    if twice_area == 0.0 {
        return [0.0; 3];
    }
    let area = 0.5 * twice_area;
    let mut dots = [0.0; 3];
    for c in 0..3 {
        let u = p[(c + 1) % 3] - p[c];
        let v = p[(c + 2) % 3] - p[c];
        dots[c] = u.dot(v);
    }
    if let Some(obtuse) = (0..3).find(|&c| dots[c] < 0.0) {
        let mut out = [area / 4.0; 3];
        out[obtuse] = area / 2.0;
        return out;
    }
    // cot at each corner = dot / |cross|, with |cross| shared by all corners
    let cot = [dots[0] / twice_area, dots[1] / twice_area, dots[2] / twice_area];
    let mut out = [0.0; 3];
    for c in 0..3 {
        let j = (c + 1) % 3;
        let k = (c + 2) % 3;
        let to_j = (p[j] - p[c]).norm_squared();
        let to_k = (p[k] - p[c]).norm_squared();
        out[c] = (to_j * cot[k] + to_k * cot[j]) / 8.0;
    }
    out
}

/// Per-face unit normals; zero-area faces get a zero vector and a flag.
#[derive(Debug, Clone, PartialEq)]
pub struct FacetNormals {
    pub normals: Vec<Vec3>,
    pub zero_area: Vec<bool>,
}

pub fn facet_normals(mesh: &TriMesh) -> FacetNormals {
    let threshold = mesh.zero_area_threshold();
    let mut normals = Vec::with_capacity(mesh.face_count());
    let mut zero_area = Vec::with_capacity(mesh.face_count());
    for f in 0..mesh.face_count() {
        let c = mesh.face_cross(f);
        let n = c.norm();
        if n <= threshold || n == 0.0 {
            normals.push(Vec3::ZERO);
            zero_area.push(true);
        } else {
            normals.push(c / n);
            zero_area.push(false);
        }
    }
    FacetNormals { normals, zero_area }
}

/// Angle-weighted vertex normals; isolated vertices (and vertices whose
/// incident faces cancel out) get a zero vector and a flag.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexNormals {
    pub normals: Vec<Vec3>,
    pub isolated: Vec<bool>,
}

pub fn vertex_normals(mesh: &TriMesh) -> VertexNormals {
    let faces = facet_normals(mesh);
    let mut acc = vec![Vec3::ZERO; mesh.vertex_count()];
    for (f, tri) in mesh.triangles().iter().enumerate() {
        if faces.zero_area[f] {
            continue;
        }
        let angles = triangle_angles(mesh.corners(f));
        for c in 0..3 {
            acc[tri[c]] += faces.normals[f] * angles[c];
        }
    }
    let mut isolated = vec![false; acc.len()];
    let normals = acc
        .iter()
        .enumerate()
        .map(|(v, n)| match n.try_normalize() {
            Some(u) => u,
            None => {
                isolated[v] = true;
                Vec3::ZERO
            }
        })
        .collect();
    VertexNormals { normals, isolated }
}

/// Mixed Voronoi area per vertex (cm²). Sums to the total surface area.
pub fn mixed_area(mesh: &TriMesh) -> Vec<f64> {
    let mut area = vec![0.0; mesh.vertex_count()];
    for (f, tri) in mesh.triangles().iter().enumerate() {
        let a = triangle_mixed_areas(mesh.corners(f));
        for c in 0..3 {
            area[tri[c]] += a[c];
        }
    }
    area
}

/// Mean length over unique edges (cm).
pub fn average_edge_length(mesh: &TriMesh) -> Result<f64> {
    let edges = mesh.topology().edges();
    if edges.is_empty() {
        return Err(Error::NoEdges);
    }
    let total = math::sum(edges.iter().map(|e| (mesh.position(e.a) - mesh.position(e.b)).norm()));
    Ok(total / edges.len() as f64)
}

/// One incident face of a vertex with the vertex's interior angle there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceCorner {
    pub face: usize,
    pub angle: f64,
}

/// One edge `(i, j)` of a vertex's one-ring with the angles opposite to it in
/// its (up to two) incident faces. `beta` is `None` on boundary edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingEdge {
    pub neighbor: usize,
    pub alpha: f64,
    pub beta: Option<f64>,
}

/// Position-dependent neighborhood data used by the curvature operators.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodTables {
    pub one_ring_edges: Vec<Vec<RingEdge>>,
    pub face_ring: Vec<Vec<FaceCorner>>,
    pub two_edge_pairs: Vec<(usize, usize)>,
}

impl NeighborhoodTables {
    pub fn build(mesh: &TriMesh) -> NeighborhoodTables {
        let topo = mesh.topology();
        let angles: Vec<[f64; 3]> =
            (0..mesh.face_count()).map(|f| triangle_angles(mesh.corners(f))).collect();

        let mut face_ring = vec![Vec::new(); mesh.vertex_count()];
        for (f, tri) in mesh.triangles().iter().enumerate() {
            for c in 0..3 {
                face_ring[tri[c]].push(FaceCorner { face: f, angle: angles[f][c] });
            }
        }

        let mut one_ring_edges = vec![Vec::new(); mesh.vertex_count()];
        for e in topo.edges() {
            let mut opposite = e.faces.iter().map(|&f| {
                let tri = mesh.triangles()[f];
                let c = (0..3).find(|&c| tri[c] != e.a && tri[c] != e.b).expect("triangle has 3 distinct corners");
                angles[f][c]
            });
            let alpha = opposite.next().unwrap_or(0.0);
            let beta = opposite.next();
            one_ring_edges[e.a].push(RingEdge { neighbor: e.b, alpha, beta });
            one_ring_edges[e.b].push(RingEdge { neighbor: e.a, alpha, beta });
        }
        for ring in one_ring_edges.iter_mut() {
            ring.sort_by_key(|r| r.neighbor);
        }

        NeighborhoodTables { one_ring_edges, face_ring, two_edge_pairs: topo.two_edge_pairs().to_vec() }
    }

    /// Sum of interior angles at `v` over its incident faces.
    pub fn angle_sum(&self, v: usize) -> f64 {
        math::sum(self.face_ring[v].iter().map(|c| c.angle))
    }
}

/// `2π` minus the angle sum; the angle deficit at an interior vertex.
pub fn angle_deficit(tables: &NeighborhoodTables, v: usize) -> f64 {
    2.0 * PI - tables.angle_sum(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene;

    fn tri(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> TriMesh {
        TriMesh::new(vec![Vec3::from_array(a), Vec3::from_array(b), Vec3::from_array(c)], vec![[0, 1, 2]])
            .unwrap()
    }

    fn tetrahedron() -> TriMesh {
        let p = vec![
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(1.0, -1.0, -1.0),
            Vec3::new(-1.0, 1.0, -1.0),
            Vec3::new(-1.0, -1.0, 1.0),
        ];
        TriMesh::new(p, vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]]).unwrap()
    }

    #[test]
    fn smallest_mesh() {
        let m = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert_eq!(m.vertex_count(), 3);
        assert_eq!(m.face_count(), 1);
        for v in 0..3 {
            assert_eq!(m.topology().one_ring(v).len(), 2);
            assert!(m.topology().is_boundary(v));
        }
        assert!(m.topology().two_edge_pairs().is_empty());
    }

    #[test]
    fn rejects_degenerate_and_out_of_range() {
        let p = vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)];
        assert_eq!(TriMesh::new(p.clone(), vec![[0, 0, 1]]), Err(Error::DegenerateTriangle { triangle: 0 }));
        assert_eq!(
            TriMesh::new(p.clone(), vec![[0, 1, 3]]),
            Err(Error::IndexOutOfRange { triangle: 0, index: 3, vertex_count: 3 })
        );
        assert_eq!(TriMesh::new(p, vec![]), Err(Error::NoTriangles));
    }

    #[test]
    fn tetrahedron_is_fully_connected() {
        let m = tetrahedron();
        for v in 0..4 {
            assert_eq!(m.topology().one_ring(v).len(), 3);
            assert!(!m.topology().is_boundary(v));
        }
        assert!(m.topology().two_edge_pairs().is_empty());
        assert!(m.validation().is_clean());
    }

    #[test]
    fn inconsistent_winding_is_reported_not_rejected() {
        let p = vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0), Vec3::new(1.0, 1.0, 0.0)];
        let m = TriMesh::new(p, vec![[0, 1, 2], [1, 2, 3]]).unwrap();
        assert_eq!(m.validation().inconsistent_orientation_edges, 1);
    }

    #[test]
    fn zero_area_and_non_manifold_are_warnings() {
        let p = vec![
            Vec3::ZERO,
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(2.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        let m = TriMesh::new(p, vec![[0, 1, 2], [0, 1, 3], [1, 0, 4], [0, 1, 5]]).unwrap();
        let v = m.validation();
        assert_eq!(v.zero_area_faces, vec![0]);
        assert_eq!(v.non_manifold_edges, 1);
        let normals = facet_normals(&m);
        assert!(normals.zero_area[0]);
        assert_eq!(normals.normals[0], Vec3::ZERO);
    }

    #[test]
    fn facet_normal_examples() {
        let m = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        assert_eq!(facet_normals(&m).normals[0], Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(facet_normals(&m.flipped()).normals[0], Vec3::new(0.0, 0.0, -1.0));

        let m = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 1.0]);
        let n = facet_normals(&m).normals[0];
        let s = 1.0 / 2f64.sqrt();
        assert!((n - Vec3::new(0.0, -s, s)).norm() < 1e-15);
    }

    #[test]
    fn vertex_normals_on_flat_grid_and_sphere() {
        let grid = scene::plane_grid(5, 5, 1.0).unwrap();
        let vn = vertex_normals(&grid);
        assert_eq!(vn.normals[12], Vec3::new(0.0, 0.0, 1.0));

        let sphere = scene::icosphere(3, 1.0).unwrap();
        let vn = vertex_normals(&sphere);
        let limit = math::cos(1f64.to_radians());
        for (v, n) in vn.normals.iter().enumerate() {
            let radial = sphere.position(v).try_normalize().unwrap();
            assert!(n.dot(radial) >= limit);
        }
    }

    #[test]
    fn cube_corner_normal_is_diagonal() {
        // unit cube, each face split into four triangles around its center
        let mut positions: Vec<Vec3> = Vec::new();
        for i in 0..8 {
            positions.push(Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64));
        }
        // faces as CCW (outward) corner loops
        let quads = [
            [0, 2, 3, 1], // z = 0
            [4, 5, 7, 6], // z = 1
            [0, 1, 5, 4], // y = 0
            [2, 6, 7, 3], // y = 1
            [0, 4, 6, 2], // x = 0
            [1, 3, 7, 5], // x = 1
        ];
        let mut triangles = Vec::new();
        for q in quads {
            let center = (positions[q[0]] + positions[q[1]] + positions[q[2]] + positions[q[3]]) * 0.25;
            let c = positions.len();
            positions.push(center);
            for k in 0..4 {
                triangles.push([q[k], q[(k + 1) % 4], c]);
            }
        }
        let cube = TriMesh::new(positions, triangles).unwrap();
        assert_eq!(cube.validation().inconsistent_orientation_edges, 0);
        let n = vertex_normals(&cube).normals[7];
        let d = 1.0 / 3f64.sqrt();
        assert!((n - Vec3::new(d, d, d)).norm() < 1e-6);
        let n0 = vertex_normals(&cube).normals[0];
        assert!((n0 + Vec3::new(d, d, d)).norm() < 1e-6);
    }

    #[test]
    fn mixed_area_examples() {
        let grid = scene::triangular_lattice(5, 5, 1.0).unwrap();
        let areas = mixed_area(&grid);
        let interior = (0..grid.vertex_count()).find(|&v| !grid.topology().is_boundary(v)).unwrap();
        assert_eq!(grid.topology().one_ring(interior).len(), 6);
        assert!((areas[interior] - 3f64.sqrt() / 2.0).abs() < 1e-12);

        let right = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        let a = mixed_area(&right);
        assert!((a[0] - 0.25).abs() < 1e-15);
        assert!((a[1] - 0.125).abs() < 1e-15);

        let obtuse = tri([0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [1.0, 0.2, 0.0]);
        let a = mixed_area(&obtuse);
        assert!((a[2] - 0.1).abs() < 1e-15);
        assert!((a[0] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn average_edge_length_examples() {
        let eq = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 3f64.sqrt() / 2.0, 0.0]);
        assert!((average_edge_length(&eq).unwrap() - 1.0).abs() < 1e-15);
        let r = tri([0.0, 0.0, 0.0], [3.0, 0.0, 0.0], [0.0, 4.0, 0.0]);
        assert_eq!(average_edge_length(&r).unwrap(), 4.0);
        let scaled = r.map_positions(|p| p * 2.5);
        assert_eq!(average_edge_length(&scaled).unwrap(), 10.0);
    }

    #[test]
    fn interior_angles_sum_to_pi() {
        let m = scene::perturbed(&scene::plane_grid(6, 6, 1.0).unwrap(), 0.3, 11);
        let tables = NeighborhoodTables::build(&m);
        for f in 0..m.face_count() {
            let s: f64 = tables
                .face_ring
                .iter()
                .flat_map(|ring| ring.iter())
                .filter(|c| c.face == f)
                .map(|c| c.angle)
                .sum();
            assert!((s - PI).abs() < 1e-9);
        }
        // each interior edge has both opposite angles
        for (v, ring) in tables.one_ring_edges.iter().enumerate() {
            for e in ring {
                let interior = !m.topology().is_boundary(v) || !m.topology().is_boundary(e.neighbor);
                if interior {
                    assert!(e.beta.is_some() || m.topology().is_boundary(v));
                }
            }
        }
    }

    #[test]
    fn adjacency_rebuild_is_identical() {
        let m = scene::icosphere(2, 1.0).unwrap();
        let rebuilt = TriMesh::new(m.positions().to_vec(), m.triangles().to_vec()).unwrap();
        assert_eq!(m.topology(), rebuilt.topology());
    }
}
