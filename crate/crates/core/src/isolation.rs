//! Up/down connectivity between k-faces, isolated-face counts and component census.
//!
//! A face `σ` is isolated in `G^{p,q}` exactly when no other point of the
//! configuration lies in `Q^{p,q}(σ, r, r)`. Both routes are implemented: the
//! region test ([`is_isolated`]) and the explicit graph ([`build_conn_graph`]),
//! and the sweep code cross-checks them on every replicate.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::ops::ControlFlow;

use crate::complexes::{check_radius, for_each_face, lift_face, slice_from_graph, ComplexSlice, NeighborGraph, MAX_RADIUS};
use crate::error::{Error, Result};
use crate::geometry::torus::lift_into;
use crate::geometry::{dist, region_contains, within, wrap, Conn, Flavor, RegionSpec};
use crate::pointprocess::{build_index_with_support, GridIndex, PointSet};

/// Disjoint-set forest with union by size and path halving.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }

    /// Component size `L` → number of components of that size.
    pub fn size_histogram(&mut self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for x in 0..self.parent.len() {
            if self.find(x) == x {
                *hist.entry(self.size[x]).or_insert(0) += 1;
            }
        }
        hist
    }
}

/// `G^{p,q}_k(X, r)` with sorted adjacency lists.
#[derive(Clone, Debug)]
pub struct ConnGraph {
    pub nodes: ComplexSlice,
    pub conn: Conn,
    adjacency: Vec<Vec<usize>>,
}

impl ConnGraph {
    pub fn flavor(&self) -> Flavor {
        self.nodes.flavor
    }

    pub fn k(&self) -> usize {
        self.nodes.k
    }

    pub fn r(&self) -> f64 {
        self.nodes.r
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn isolated_count(&self) -> usize {
        self.adjacency.iter().filter(|a| a.is_empty()).count()
    }
}

fn check_conn(k: usize, conn: Conn) -> Result<()> {
    if conn == Conn::Down && k == 0 {
        return Err(Error::invalid("down-connectivity is undefined for k = 0"));
    }
    Ok(())
}

/// Reuses `idx` when it answers queries of radius `support`, otherwise builds
/// a fresh index with cells of side `cell`.
fn index_for<'a>(ps: &PointSet, idx: &'a GridIndex, cell: f64, support: f64) -> Result<Cow<'a, GridIndex>> {
    if idx.len() != ps.len() {
        return Err(Error::invalid("index was built for a different point set"));
    }
    if idx.support() >= support {
        Ok(Cow::Borrowed(idx))
    } else {
        Ok(Cow::Owned(build_index_with_support(ps, cell.min(0.124), support)?))
    }
}

/// Calls `f` with groups of slice positions that are pairwise adjacent; the
/// union of all groups' pairs is exactly the edge set of `G^{p,q}`.
///
/// Up: the k-subfaces of each (k+1)-face. Down: the k-faces sharing a
/// (k-1)-subface (any subset of a face is a face, so no further test).
fn for_each_group(ps: &PointSet, graph: &NeighborGraph, slice: &ComplexSlice, conn: Conn, mut f: impl FnMut(&[usize])) {
    let k = slice.k;
    let mut group = Vec::with_capacity(k + 2);
    let mut sub = Vec::with_capacity(k + 1);
    match conn {
        Conn::Up => {
            for_each_face(ps, graph, slice.r, k + 1, slice.flavor, |cof, _| {
                group.clear();
                for drop in 0..cof.len() {
                    sub.clear();
                    sub.extend(cof.iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, &v)| v));
                    // every subface of a face is a face at the same radius
                    group.push(slice.position(&sub).expect("subface missing from slice"));
                }
                f(&group);
                ControlFlow::<()>::Continue(())
            });
        }
        Conn::Down => {
            let mut keyed: Vec<(usize, usize)> = (0..slice.len()).flat_map(|i| (0..=k).map(move |drop| (i, drop))).collect();
            let key = |&(i, drop): &(usize, usize)| {
                slice
                    .face(i)
                    .iter()
                    .enumerate()
                    .filter(move |&(j, _)| j != drop)
                    .map(|(_, &v)| v)
            };
            keyed.sort_by(|a, b| key(a).cmp(key(b)));
            let mut start = 0;
            while start < keyed.len() {
                let mut end = start + 1;
                while end < keyed.len() && key(&keyed[end]).eq(key(&keyed[start])) {
                    end += 1;
                }
                group.clear();
                group.extend(keyed[start..end].iter().map(|&(i, _)| i));
                f(&group);
                start = end;
            }
        }
    }
}

/// Explicit connectivity graph on the faces of `slice`.
pub fn build_conn_graph(ps: &PointSet, idx: &GridIndex, slice: &ComplexSlice, conn: Conn) -> Result<ConnGraph> {
    check_conn(slice.k, conn)?;
    check_radius(slice.r)?;
    let idx = index_for(ps, idx, 2.0 * slice.r, 2.0 * slice.r)?;
    let graph = NeighborGraph::build(ps, &idx, 2.0 * slice.r)?;
    let mut adjacency = vec![Vec::new(); slice.len()];
    for_each_group(ps, &graph, slice, conn, |g| {
        for &a in g {
            for &b in g {
                if a != b {
                    adjacency[a].push(b);
                }
            }
        }
    });
    for a in &mut adjacency {
        a.sort_unstable();
        a.dedup();
    }
    Ok(ConnGraph {
        nodes: slice.clone(),
        conn,
        adjacency,
    })
}

/// Component size `L` → number of components with exactly `L` faces.
pub fn component_size_histogram(g: &ConnGraph) -> BTreeMap<usize, usize> {
    let mut uf = UnionFind::new(g.len());
    for (a, nb) in g.adjacency.iter().enumerate() {
        for &b in nb {
            uf.union(a, b);
        }
    }
    uf.size_histogram()
}

/// Face census without materialising edges.
#[derive(Clone, Debug, PartialEq)]
pub struct Census {
    pub faces: usize,
    pub isolated: usize,
    pub hist: BTreeMap<usize, usize>,
}

pub fn census(ps: &PointSet, idx: &GridIndex, r: f64, k: usize, flavor: Flavor, conn: Conn) -> Result<Census> {
    check_conn(k, conn)?;
    check_radius(r)?;
    let idx = index_for(ps, idx, 2.0 * r, 2.0 * r)?;
    let graph = NeighborGraph::build(ps, &idx, 2.0 * r)?;
    let slice = slice_from_graph(ps, &graph, r, k, flavor);
    let mut uf = UnionFind::new(slice.len());
    let mut linked = vec![false; slice.len()];
    for_each_group(ps, &graph, &slice, conn, |g| {
        if g.len() > 1 {
            for &a in g {
                linked[a] = true;
                uf.union(g[0], a);
            }
        }
    });
    Ok(Census {
        faces: slice.len(),
        isolated: linked.iter().filter(|l| !**l).count(),
        hist: uf.size_histogram(),
    })
}

/// Radius of a ball about the lifted centroid `c` containing `Q(face, s, s)`.
///
/// Up regions lie in every `B(x_j, 2s)`, down regions in the union of them.
fn candidate_radius(lifted: &[f64], c: &[f64], d: usize, s: f64, conn: Conn) -> f64 {
    let spread = lifted.chunks_exact(d).map(|x| dist(x, c));
    let off = match conn {
        Conn::Up => spread.fold(f64::INFINITY, f64::min),
        Conn::Down => spread.fold(0.0, f64::max),
    };
    off + 2.0 * s
}

/// Buffers reused across isolation tests of one flavor and connectivity.
struct IsoScratch {
    lifted: Vec<f64>,
    c: Vec<f64>,
    center: Vec<f64>,
    y: Vec<f64>,
    region: RegionSpec,
}

impl IsoScratch {
    fn new(d: usize, flavor: Flavor, conn: Conn) -> Result<Self> {
        Ok(IsoScratch {
            lifted: Vec::new(),
            c: vec![0.0; d],
            center: vec![0.0; d],
            y: vec![0.0; d],
            region: RegionSpec::from_flat(flavor, conn, d, vec![0.0; 2 * d], 1.0, 1.0)?,
        })
    }

    /// Isolation of `face` at radius `s`; the face must be a face at `s`.
    fn isolated_at(&mut self, ps: &PointSet, idx: &GridIndex, face: &[usize], s: f64) -> Result<bool> {
        let d = ps.dim();
        lift_face(ps, face, &mut self.lifted);
        self.c.iter_mut().for_each(|v| *v = 0.0);
        let w = 1.0 / face.len() as f64;
        for x in self.lifted.chunks_exact(d) {
            for i in 0..d {
                self.c[i] += x[i] * w;
            }
        }
        let radius = candidate_radius(&self.lifted, &self.c, d, s, self.region.conn);
        for i in 0..d {
            self.center[i] = wrap(self.c[i]);
        }
        self.region.reset(&self.lifted, s, s);
        let (c, y, region) = (&self.c, &mut self.y, &self.region);
        let hit = idx.for_each_near(&self.center, radius, |id, p| {
            if face.contains(&id) {
                return ControlFlow::Continue(());
            }
            lift_into(c, p, y);
            if region_contains(region, y) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        })?;
        Ok(hit.is_none())
    }
}

/// True iff no point outside `face` lies in `Q^{flavor,conn}(face, r, r)`.
pub fn is_isolated(ps: &PointSet, idx: &GridIndex, face: &[usize], r: f64, flavor: Flavor, conn: Conn) -> Result<bool> {
    check_conn(face.len().saturating_sub(1), conn)?;
    check_radius(r)?;
    let idx = index_for(ps, idx, 2.0 * r, 4.0 * r)?;
    IsoScratch::new(ps.dim(), flavor, conn)?.isolated_at(ps, &idx, face, r)
}

/// `J`: the number of isolated k-faces at radius `r`.
pub fn count_isolated(ps: &PointSet, idx: &GridIndex, r: f64, k: usize, flavor: Flavor, conn: Conn) -> Result<usize> {
    check_conn(k, conn)?;
    check_radius(r)?;
    let idx = index_for(ps, idx, 2.0 * r, 4.0 * r)?;
    let graph = NeighborGraph::build(ps, &idx, 2.0 * r)?;
    let mut scratch = IsoScratch::new(ps.dim(), flavor, conn)?;
    let mut count = 0usize;
    let mut err = None;
    for_each_face(ps, &graph, r, k, flavor, |face, _| match scratch.isolated_at(ps, &idx, face, r) {
        Ok(iso) => {
            count += iso as usize;
            ControlFlow::Continue(())
        }
        Err(e) => {
            err = Some(e);
            ControlFlow::Break(())
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(count),
    }
}

/// Upper end of the birth radii searched by [`count_isolated_star`].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StarCap {
    /// A multiple of the counting radius `r`.
    Factor(f64),
    /// A fixed radius, independent of `r`.
    Absolute(f64),
}

impl Default for StarCap {
    fn default() -> Self {
        StarCap::Factor(4.0)
    }
}

/// Caps are clamped below this so that `4 · cap` stays inside one chart.
pub const STAR_CAP_LIMIT: f64 = MAX_RADIUS * (1.0 - 1e-9);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StarCount {
    pub j: usize,
    pub j_star: usize,
    /// Effective cap after clamping.
    pub cap: f64,
    /// Tuples counted with birth radius in `(0.75 cap, cap]`; many of these
    /// suggest tuples beyond the cap are being missed.
    pub near_cap: usize,
}

/// `J*`: `J(r)` plus the tuples with birth radius `R` in `(r, cap]` that are
/// isolated at `R`. Regions grow with the radius, so a tuple is isolated at
/// some `s >= max(r, R)` iff it is isolated at `max(r, R)`.
pub fn count_isolated_star(
    ps: &PointSet,
    idx: &GridIndex,
    r: f64,
    k: usize,
    flavor: Flavor,
    conn: Conn,
    cap: StarCap,
) -> Result<StarCount> {
    let j = count_isolated(ps, idx, r, k, flavor, conn)?;
    let cap = match cap {
        StarCap::Factor(f) => f * r,
        StarCap::Absolute(a) => a,
    }
    .min(STAR_CAP_LIMIT);
    if !(cap > r) {
        return Ok(StarCount { j, j_star: j, cap, near_cap: 0 });
    }
    // cells stay at the counting scale so that queries scan rings nearest first
    let idx = index_for(ps, idx, 2.0 * r, 4.0 * cap)?;
    let mut scratch = IsoScratch::new(ps.dim(), flavor, conn)?;
    let (mut extra, mut near_cap) = (0usize, 0usize);
    let mut visit = |face: &[usize], birth: f64| -> ControlFlow<Error> {
        if within(birth, r) || !within(birth, cap) {
            return ControlFlow::Continue(());
        }
        match scratch.isolated_at(ps, &idx, face, birth) {
            Ok(iso) => {
                extra += iso as usize;
                near_cap += (iso && birth > 0.75 * cap) as usize;
                ControlFlow::Continue(())
            }
            Err(e) => ControlFlow::Break(e),
        }
    };
    let err = if k == 1 {
        // pairs stream straight from the index; no neighbour lists needed
        let mut err = None;
        for i in 0..ps.len() {
            let xi = ps.point(i);
            let b = idx.for_each_near(xi, 2.0 * cap, |j, p| {
                if j > i {
                    visit(&[i, j], 0.5 * crate::geometry::torus_dist_unchecked(xi, p))
                } else {
                    ControlFlow::Continue(())
                }
            })?;
            if b.is_some() {
                err = b;
                break;
            }
        }
        err
    } else {
        let graph = NeighborGraph::build(ps, &idx, 2.0 * cap)?;
        for_each_face(ps, &graph, cap, k, flavor, visit)
    };
    if let Some(e) = err {
        return Err(e);
    }
    Ok(StarCount {
        j,
        j_star: j + extra,
        cap,
        near_cap,
    })
}

/// One replicate's outputs. Skipped cells carry no counts.
#[derive(Clone, Debug, PartialEq)]
pub struct CountRecord {
    pub p: Flavor,
    pub q: Conn,
    pub k: usize,
    pub d: usize,
    pub n: f64,
    pub r: f64,
    pub j: Option<u64>,
    pub j_star: Option<u64>,
    pub comp_hist: Option<BTreeMap<usize, u64>>,
    pub replicate_id: u64,
    pub seed: u64,
}

pub const RECORD_HEADER: [&str; 11] = ["p", "q", "k", "d", "n", "r", "J", "J_star", "comp_hist", "replicate_id", "seed"];

impl CountRecord {
    pub fn is_skipped(&self) -> bool {
        self.comp_hist.is_none()
    }

    /// `J = comp_hist[1]` and `J* >= J`; skipped records pass trivially.
    pub fn validate(&self) -> Result<()> {
        if let (Some(j), Some(js), Some(h)) = (self.j, self.j_star, &self.comp_hist) {
            let singles = h.get(&1).copied().unwrap_or(0);
            if singles != j {
                return Err(Error::invalid(format!("J = {j} but comp_hist[1] = {singles}")));
            }
            if js < j {
                return Err(Error::invalid(format!("J* = {js} below J = {j}")));
            }
        }
        Ok(())
    }

    pub fn to_row(&self) -> Vec<String> {
        let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        vec![
            self.p.to_string(),
            self.q.to_string(),
            self.k.to_string(),
            self.d.to_string(),
            self.n.to_string(),
            self.r.to_string(),
            opt(self.j),
            opt(self.j_star),
            match &self.comp_hist {
                Some(h) => serde_json::to_string(h).expect("histogram serialises"),
                None => "skipped".into(),
            },
            self.replicate_id.to_string(),
            self.seed.to_string(),
        ]
    }

    pub fn from_row(row: &csv::StringRecord) -> Result<Self> {
        if row.len() != RECORD_HEADER.len() {
            return Err(Error::Parse(format!("expected {} fields, got {}", RECORD_HEADER.len(), row.len())));
        }
        fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
            s.trim().parse().map_err(|_| Error::Parse(format!("bad {what}: {s:?}")))
        }
        let opt = |s: &str, what: &str| -> Result<Option<u64>> {
            if s.trim().is_empty() {
                Ok(None)
            } else {
                num(s, what).map(Some)
            }
        };
        let comp_hist = match row[8].trim() {
            "skipped" => None,
            s => Some(serde_json::from_str(s).map_err(|e| Error::Parse(format!("bad comp_hist: {e}")))?),
        };
        Ok(CountRecord {
            p: row[0].parse()?,
            q: row[1].parse()?,
            k: num(&row[2], "k")?,
            d: num(&row[3], "d")?,
            n: num(&row[4], "n")?,
            r: num(&row[5], "r")?,
            j: opt(&row[6], "J")?,
            j_star: opt(&row[7], "J_star")?,
            comp_hist,
            replicate_id: num(&row[9], "replicate_id")?,
            seed: num(&row[10], "seed")?,
        })
    }
}

pub fn write_records<W: Write>(w: W, records: &[CountRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(RECORD_HEADER)?;
    for rec in records {
        wr.write_record(rec.to_row())?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(r: R) -> Result<Vec<CountRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    if rd.headers()?.iter().ne(RECORD_HEADER) {
        return Err(Error::Parse("unexpected record header".into()));
    }
    rd.records().map(|row| CountRecord::from_row(&row?)).collect()
}

/// Counts one realization: census, region-based `J` (cross-checked against
/// the census), and `J*`.
pub fn count_record(
    ps: &PointSet,
    r: f64,
    k: usize,
    flavor: Flavor,
    conn: Conn,
    cap: StarCap,
    replicate_id: u64,
) -> Result<(CountRecord, StarCount)> {
    check_conn(k, conn)?;
    check_radius(r)?;
    let idx = build_index_with_support(ps, (2.0 * r).min(0.124), 4.0 * r)?;
    let cen = census(ps, &idx, r, k, flavor, conn)?;
    let star = count_isolated_star(ps, &idx, r, k, flavor, conn, cap)?;
    if star.j != cen.isolated {
        return Err(Error::invalid(format!(
            "region test found {} isolated faces, connectivity graph {}",
            star.j, cen.isolated
        )));
    }
    let rec = CountRecord {
        p: flavor,
        q: conn,
        k,
        d: ps.dim(),
        n: ps.intensity_n,
        r,
        j: Some(star.j as u64),
        j_star: Some(star.j_star as u64),
        comp_hist: Some(cen.hist.iter().map(|(&l, &c)| (l, c as u64)).collect()),
        replicate_id,
        seed: ps.seed,
    };
    rec.validate()?;
    Ok((rec, star))
}
