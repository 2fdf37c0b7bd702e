//! k-faces of the Vietoris-Rips and Čech complexes at a radius `r`.
//!
//! A `(k+1)`-tuple is a Rips face when all pairwise torus distances are at
//! most `2r` and a Čech face when the smallest ball enclosing its chart-lifted
//! vertices has radius at most `r`. Enumeration extends cliques of the
//! `2r`-neighbour graph in increasing vertex order, which produces every face
//! once and in lexicographic order; Čech faces are then filtered by the
//! miniball test.

use std::io::Write;
use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::geometry::miniball_radius_flat;
use crate::geometry::{within, Flavor, CHART_LIMIT};
use crate::geometry::torus::{lift_into, torus_dist_sq};
use crate::pointprocess::{GridIndex, PointSet};

/// Radii must stay below this so every face and its neighbourhood fit one chart.
pub const MAX_RADIUS: f64 = 0.0625;

/// A k-face: strictly increasing point ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex(Vec<usize>);

impl Simplex {
    /// Sorts the ids; rejects empty input and repeated ids.
    pub fn new(mut ids: Vec<usize>) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::Empty("simplex without vertices"));
        }
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("repeated vertex in {ids:?}")));
        }
        Ok(Simplex(ids))
    }

    pub fn k(&self) -> usize {
        self.0.len() - 1
    }

    pub fn ids(&self) -> &[usize] {
        &self.0
    }
}

pub(crate) fn check_radius(r: f64) -> Result<()> {
    if !(r > 0.0) {
        return Err(Error::invalid(format!("radius must be positive, got {r}")));
    }
    if r >= MAX_RADIUS {
        return Err(Error::chart(format!("radius {r} is not below {MAX_RADIUS}")));
    }
    Ok(())
}

fn check_ids(ps: &PointSet, ids: &[usize]) -> Result<()> {
    if ids.is_empty() {
        return Err(Error::Empty("simplex without vertices"));
    }
    for (a, &i) in ids.iter().enumerate() {
        if i >= ps.len() {
            return Err(Error::invalid(format!("point id {i} out of range ({} points)", ps.len())));
        }
        if ids[..a].contains(&i) {
            return Err(Error::invalid(format!("repeated vertex {i}")));
        }
    }
    Ok(())
}

/// Largest pairwise squared torus distance of the tuple.
fn max_pair_dist_sq(ps: &PointSet, ids: &[usize]) -> f64 {
    let mut m: f64 = 0.0;
    for (a, &i) in ids.iter().enumerate() {
        for &j in &ids[a + 1..] {
            m = m.max(torus_dist_sq(ps.point(i), ps.point(j)));
        }
    }
    m
}

/// Writes the vertices lifted into the chart of the first vertex.
pub(crate) fn lift_face(ps: &PointSet, ids: &[usize], out: &mut Vec<f64>) {
    let d = ps.dim();
    out.clear();
    out.resize(ids.len() * d, 0.0);
    let base = ps.point(ids[0]);
    for (slot, &i) in ids.iter().enumerate() {
        lift_into(base, ps.point(i), &mut out[slot * d..(slot + 1) * d]);
    }
}

/// Face indicator at radius `r`. Tuples with a pair at torus distance 1/4 or
/// more are never faces for admissible `r` and are reported as such.
pub fn is_simplex(ps: &PointSet, ids: &[usize], r: f64, flavor: Flavor) -> Result<bool> {
    check_radius(r)?;
    check_ids(ps, ids)?;
    let diam = max_pair_dist_sq(ps, ids).sqrt();
    if !within(diam, 2.0 * r) {
        return Ok(false);
    }
    Ok(match flavor {
        Flavor::Rips => true,
        Flavor::Cech => {
            let mut buf = Vec::new();
            lift_face(ps, ids, &mut buf);
            within(miniball_radius_flat(&buf, ps.dim()), r)
        }
    })
}

/// Smallest radius at which the tuple is a face.
pub fn simplex_birth_radius(ps: &PointSet, ids: &[usize], flavor: Flavor) -> Result<f64> {
    check_ids(ps, ids)?;
    let diam = max_pair_dist_sq(ps, ids).sqrt();
    if diam >= CHART_LIMIT {
        return Err(Error::chart(format!("tuple diameter {diam} does not fit one chart")));
    }
    Ok(birth_radius_unchecked(ps, ids, flavor, &mut Vec::new()))
}

pub(crate) fn birth_radius_unchecked(ps: &PointSet, ids: &[usize], flavor: Flavor, buf: &mut Vec<f64>) -> f64 {
    match flavor {
        Flavor::Rips => 0.5 * max_pair_dist_sq(ps, ids).sqrt(),
        Flavor::Cech => {
            lift_face(ps, ids, buf);
            miniball_radius_flat(buf, ps.dim())
        }
    }
}

/// For each point, the larger-id points within torus distance `radius`, ascending.
#[derive(Clone, Debug)]
pub struct NeighborGraph {
    starts: Vec<usize>,
    nbrs: Vec<usize>,
}

impl NeighborGraph {
    pub fn build(ps: &PointSet, idx: &GridIndex, radius: f64) -> Result<Self> {
        if idx.len() != ps.len() {
            return Err(Error::invalid("index was built for a different point set"));
        }
        let mut starts = Vec::with_capacity(ps.len() + 1);
        let mut nbrs = Vec::new();
        starts.push(0);
        for i in 0..ps.len() {
            let from = nbrs.len();
            idx.for_each_near(ps.point(i), radius, |j, _| {
                if j > i {
                    nbrs.push(j);
                }
                ControlFlow::<()>::Continue(())
            })?;
            nbrs[from..].sort_unstable();
            starts.push(nbrs.len());
        }
        Ok(NeighborGraph { starts, nbrs })
    }

    pub fn higher(&self, i: usize) -> &[usize] {
        &self.nbrs[self.starts[i]..self.starts[i + 1]]
    }

    pub fn n_points(&self) -> usize {
        self.starts.len() - 1
    }

    pub fn n_edges(&self) -> usize {
        self.nbrs.len()
    }
}

/// Calls `f` on every `(k+1)`-clique of `graph` in lexicographic order.
pub(crate) fn for_each_clique<B>(
    graph: &NeighborGraph,
    k: usize,
    mut f: impl FnMut(&[usize]) -> ControlFlow<B>,
) -> Option<B> {
    let mut clique = Vec::with_capacity(k + 1);
    let mut levels: Vec<Vec<usize>> = vec![Vec::new(); k + 1];
    for v in 0..graph.n_points() {
        clique.clear();
        clique.push(v);
        if k == 0 {
            if let ControlFlow::Break(b) = f(&clique) {
                return Some(b);
            }
            continue;
        }
        levels[0].clear();
        levels[0].extend_from_slice(graph.higher(v));
        if let ControlFlow::Break(b) = extend(graph, k, &mut clique, &mut levels, 0, &mut f) {
            return Some(b);
        }
    }
    None
}

fn extend<B>(
    graph: &NeighborGraph,
    k: usize,
    clique: &mut Vec<usize>,
    levels: &mut [Vec<usize>],
    depth: usize,
    f: &mut impl FnMut(&[usize]) -> ControlFlow<B>,
) -> ControlFlow<B> {
    let cands = std::mem::take(&mut levels[depth]);
    for (pos, &c) in cands.iter().enumerate() {
        clique.push(c);
        if clique.len() == k + 1 {
            f(clique)?;
        } else {
            let next = &mut levels[depth + 1];
            next.clear();
            intersect_sorted(&cands[pos + 1..], graph.higher(c), next);
            if next.len() + clique.len() > k {
                if let ControlFlow::Break(b) = extend(graph, k, clique, levels, depth + 1, f) {
                    clique.pop();
                    levels[depth] = cands;
                    return ControlFlow::Break(b);
                }
            }
        }
        clique.pop();
    }
    levels[depth] = cands;
    ControlFlow::Continue(())
}

fn intersect_sorted(a: &[usize], b: &[usize], out: &mut Vec<usize>) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

/// Calls `f(face, birth_radius)` for every k-face at radius `r`, in
/// lexicographic order, reusing a prebuilt `2r`-neighbour graph.
pub(crate) fn for_each_face<B>(
    ps: &PointSet,
    graph: &NeighborGraph,
    r: f64,
    k: usize,
    flavor: Flavor,
    mut f: impl FnMut(&[usize], f64) -> ControlFlow<B>,
) -> Option<B> {
    let mut buf = Vec::new();
    for_each_clique(graph, k, |ids| {
        let birth = birth_radius_unchecked(ps, ids, flavor, &mut buf);
        if within(birth, r) {
            f(ids, birth)
        } else {
            ControlFlow::Continue(())
        }
    })
}

/// The k-faces `S_k(X, r)` of one flavor, lexicographically sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSlice {
    pub flavor: Flavor,
    pub k: usize,
    pub r: f64,
    /// Number of points of the source configuration.
    pub n_points: usize,
    faces: Vec<usize>,
    /// `first[v]..first[v+1]`: positions of the faces whose smallest vertex is `v`.
    first: Vec<usize>,
}

impl ComplexSlice {
    pub fn len(&self) -> usize {
        self.faces.len() / (self.k + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn face(&self, i: usize) -> &[usize] {
        &self.faces[i * (self.k + 1)..(i + 1) * (self.k + 1)]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.faces.chunks_exact(self.k + 1)
    }

    pub fn simplices(&self) -> Vec<Simplex> {
        self.iter().map(|f| Simplex(f.to_vec())).collect()
    }

    /// Position of a sorted id tuple in the slice.
    pub fn position(&self, ids: &[usize]) -> Option<usize> {
        if ids.len() != self.k + 1 || ids[0] >= self.n_points {
            return None;
        }
        let (mut lo, mut hi) = (self.first[ids[0]], self.first[ids[0] + 1]);
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.face(mid).cmp(ids) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// One row per face under the header `v0,...,vk`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record((0..=self.k).map(|i| format!("v{i}")))?;
        for f in self.iter() {
            wr.write_record(f.iter().map(|v| v.to_string()))?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// All k-faces at radius `r`. The index must answer queries of radius `2r`.
pub fn enumerate_k_simplices(ps: &PointSet, idx: &GridIndex, r: f64, k: usize, flavor: Flavor) -> Result<ComplexSlice> {
    check_radius(r)?;
    let graph = NeighborGraph::build(ps, idx, 2.0 * r)?;
    Ok(slice_from_graph(ps, &graph, r, k, flavor))
}

pub(crate) fn slice_from_graph(ps: &PointSet, graph: &NeighborGraph, r: f64, k: usize, flavor: Flavor) -> ComplexSlice {
    let mut faces = Vec::new();
    for_each_face(ps, graph, r, k, flavor, |ids, _| {
        faces.extend_from_slice(ids);
        ControlFlow::<()>::Continue(())
    });
    let mut first = vec![0usize; ps.len() + 1];
    for f in faces.chunks_exact(k + 1) {
        first[f[0] + 1] += 1;
    }
    for v in 0..ps.len() {
        first[v + 1] += first[v];
    }
    ComplexSlice {
        flavor,
        k,
        r,
        n_points: ps.len(),
        faces,
        first,
    }
}
