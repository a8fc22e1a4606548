//! Exact nearest-neighbor search over point sets, garment→body
//! correspondences, farthest-point downsampling and KNN feature pooling.
//!
//! Every query is exact. Ties in distance go to the lowest point index, so
//! results match a brute-force scan bit for bit.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::mesh::TriMesh;

/// Neighbors used by the local body-feature max-pooling.
pub const DEFAULT_POOLING_K: usize = 15;
/// Body point downsampling factor.
pub const DEFAULT_DOWNSAMPLE_FACTOR: usize = 10;
/// Neighborhood size for average-pooling features onto downsampled points.
pub const DEFAULT_AVERAGE_POOLING_K: usize = 16;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

#[derive(Debug, Clone)]
struct Bounds {
    min: Vec3,
    max: Vec3,
}

impl Bounds {
    fn distance_squared(&self, q: Vec3) -> f64 {
        let mut d = 0.0;
        for axis in 0..3 {
            let v = q.component(axis);
            let lo = self.min.component(axis);
            let hi = self.max.component(axis);
            let e = if v < lo {
                lo - v
            } else if v > hi {
                v - hi
            } else {
                0.0
            };
            d += e * e;
        }
        d
    }
}

/// k-d tree over a fixed point set.
#[derive(Debug, Clone)]
pub struct PointIndex {
    points: Vec<Vec3>,
    order: Vec<usize>,
    nodes: Vec<Node>,
    bounds: Vec<Bounds>,
}

#[inline]
fn key_less(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

impl PointIndex {
    pub fn new(points: Vec<Vec3>) -> Result<PointIndex> {
        if points.is_empty() {
            return Err(Error::EmptyPointSet);
        }
        let mut index = PointIndex {
            order: (0..points.len()).collect(),
            points,
            nodes: Vec::new(),
            bounds: Vec::new(),
        };
        let n = index.points.len();
        index.build(0, n);
        Ok(index)
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let mut min = self.points[self.order[start]];
        let mut max = min;
        for &i in &self.order[start..end] {
            let p = self.points[i];
            for axis in 0..3 {
                let v = p.component(axis);
                if v < min.component(axis) {
                    *min.component_mut(axis) = v;
                }
                if v > max.component(axis) {
                    *max.component_mut(axis) = v;
                }
            }
        }
        let id = self.nodes.len();
        self.bounds.push(Bounds { min, max });
        let extent = max - min;
        let axis = if extent.x >= extent.y && extent.x >= extent.z {
            0
        } else if extent.y >= extent.z {
            1
        } else {
            2
        };
        if end - start <= LEAF_SIZE || extent.component(axis) == 0.0 {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        self.nodes.push(Node::Leaf { start, end });
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a]
                .component(axis)
                .partial_cmp(&points[b].component(axis))
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        let value = self.points[self.order[mid]].component(axis);
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split { axis, value, left, right };
        id
    }

    /// The `k` nearest points to `query` in ascending `(distance, index)` order.
    pub fn knn(&self, query: Vec3, k: usize) -> Result<Vec<Neighbor>> {
        if k > self.points.len() {
            return Err(Error::KTooLarge { k, available: self.points.len() });
        }
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        if k > 0 {
            self.search(0, query, k, &mut best);
        }
        Ok(best
            .into_iter()
            .map(|(d2, index)| Neighbor { index, distance: crate::math::sqrt(d2) })
            .collect())
    }

    /// Index of the nearest point and its distance.
    pub fn nearest(&self, query: Vec3) -> Neighbor {
        self.knn(query, 1).expect("index is non-empty")[0]
    }

    fn search(&self, node: usize, q: Vec3, k: usize, best: &mut Vec<(f64, usize)>) {
        if best.len() == k && self.bounds[node].distance_squared(q) > best[k - 1].0 {
            return;
        }
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d2 = (self.points[i] - q).norm_squared();
                    let key = (d2, i);
                    if best.len() == k && !key_less(key, best[k - 1]) {
                        continue;
                    }
                    let pos = best.iter().position(|&b| key_less(key, b)).unwrap_or(best.len());
                    best.insert(pos, key);
                    best.truncate(k);
                }
            }
            Node::Split { axis, value, left, right } => {
                let (first, second) = if q.component(axis) < value { (left, right) } else { (right, left) };
                self.search(first, q, k, best);
                self.search(second, q, k, best);
            }
        }
    }
}

/// The `k` nearest points (the point itself included) of every point in a
/// set, in ascending `(distance, index)` order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnnTable {
    k: usize,
    neighbors: Vec<usize>,
}

impl KnnTable {
    pub fn build(points: &[Vec3], k: usize) -> Result<KnnTable> {
        if k == 0 {
            return Err(Error::InvalidParameter("neighborhood size must be at least 1"));
        }
        let index = PointIndex::new(points.to_vec())?;
        let mut neighbors = Vec::with_capacity(points.len() * k);
        for p in points {
            neighbors.extend(index.knn(*p, k)?.iter().map(|n| n.index));
        }
        Ok(KnnTable { k, neighbors })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.neighbors.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn of(&self, v: usize) -> &[usize] {
        &self.neighbors[v * self.k..(v + 1) * self.k]
    }
}

/// One nearest body vertex per garment vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceSet {
    /// `(garment_index, body_index)`, ordered by garment index.
    pub pairs: Vec<(usize, usize)>,
    pub distances: Vec<f64>,
}

impl CorrespondenceSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn body_index(&self, garment: usize) -> usize {
        self.pairs[garment].1
    }
}

/// Matches every garment position against `body_index`.
pub fn correspondences(garment: &[Vec3], body_index: &PointIndex) -> CorrespondenceSet {
    let mut pairs = Vec::with_capacity(garment.len());
    let mut distances = Vec::with_capacity(garment.len());
    for (g, p) in garment.iter().enumerate() {
        let n = body_index.nearest(*p);
        pairs.push((g, n.index));
        distances.push(n.distance);
    }
    CorrespondenceSet { pairs, distances }
}

pub fn nearest_correspondences(garment: &TriMesh, body: &TriMesh) -> Result<CorrespondenceSet> {
    let index = PointIndex::new(body.positions().to_vec())?;
    Ok(correspondences(garment.positions(), &index))
}

/// Farthest-point sampling seeded at index 0; keeps `⌈n / factor⌉` points.
/// Ties go to the lowest index.
pub fn downsample_points(points: &[Vec3], factor: usize) -> Result<Vec<usize>> {
    if factor == 0 {
        return Err(Error::InvalidParameter("downsampling factor must be at least 1"));
    }
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let count = points.len().div_ceil(factor);
    let mut selected = Vec::with_capacity(count);
    let mut min_d2 = vec![f64::INFINITY; points.len()];
    let mut current = 0;
    for _ in 0..count {
        selected.push(current);
        let c = points[current];
        for (i, p) in points.iter().enumerate() {
            let d2 = (*p - c).norm_squared();
            if d2 < min_d2[i] {
                min_d2[i] = d2;
            }
        }
        let mut next = 0;
        let mut far = -1.0;
        for (i, d2) in min_d2.iter().enumerate() {
            if *d2 > far {
                far = *d2;
                next = i;
            }
        }
        current = next;
    }
    Ok(selected)
}

/// Per-point feature rows of a common width.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    width: usize,
    data: Vec<f64>,
}

impl Features {
    pub fn new(width: usize, data: Vec<f64>) -> Result<Features> {
        if width == 0 || data.len() % width != 0 {
            return Err(Error::InvalidParameter("feature data is not a whole number of rows"));
        }
        Ok(Features { width, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Features> {
        let width = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidParameter("feature rows differ in width"));
        }
        Features::new(width, rows.concat())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> usize {
        self.data.len() / self.width
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }
}

fn pool<F: Fn(&mut [f64], &[f64])>(
    features: &Features,
    index: &PointIndex,
    queries: &[Vec3],
    k: usize,
    init: f64,
    fold: F,
) -> Result<Features> {
    if features.rows() != index.len() {
        return Err(Error::VertexCountMismatch { expected: index.len(), found: features.rows() });
    }
    if k == 0 {
        return Err(Error::InvalidParameter("pooling needs at least one neighbor"));
    }
    let mut out = Vec::with_capacity(queries.len() * features.width());
    for q in queries {
        let mut acc = vec![init; features.width()];
        for n in index.knn(*q, k)? {
            fold(&mut acc, features.row(n.index));
        }
        out.extend_from_slice(&acc);
    }
    Features::new(features.width(), out)
}

/// Component-wise max of the features of each query's `k` nearest points.
pub fn knn_max_pool(features: &Features, index: &PointIndex, queries: &[Vec3], k: usize) -> Result<Features> {
    pool(features, index, queries, k, f64::NEG_INFINITY, |acc, row| {
        for (a, v) in acc.iter_mut().zip(row) {
            if *v > *a {
                *a = *v;
            }
        }
    })
}

/// Component-wise mean of the features of each query's `k` nearest points.
pub fn knn_average_pool(features: &Features, index: &PointIndex, queries: &[Vec3], k: usize) -> Result<Features> {
    let mut pooled = pool(features, index, queries, k, 0.0, |acc, row| {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += *v;
        }
    })?;
    for v in pooled.data.iter_mut() {
        *v /= k as f64;
    }
    Ok(pooled)
}
