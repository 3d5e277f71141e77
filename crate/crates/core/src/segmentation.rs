//! Slicing along saddle isolines into disk and annulus segments, and the
//! crochet-order DAG between them.
//!
//! Saddle values split the range of f into bands. A segment is a connected
//! component of one band; faces crossing a band level connect the segment
//! below to the segment above.

use std::collections::{BTreeSet, HashMap};

use crate::geodesic::GeodesicField;
use crate::isoline::Isoline;
use crate::mesh::TriangleMesh;
use crate::patch::{Origin, Patch};

/// Relative distance below which vertex values are snapped onto a level.
pub const SNAP_REL: f64 = 1e-6;
/// Relative offset of boundary-loop extraction from a level.
pub const LOOP_OFFSET_REL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct Segment {
    pub id: usize,
    pub band: usize,
    /// Extent of f over the segment.
    pub f_lo: f64,
    pub f_hi: f64,
    /// Faces assigned by the centroid rule. These partition the mesh.
    pub faces: Vec<usize>,
    /// Faces overlapping the segment's band component.
    pub support: Vec<usize>,
    pub patch: Patch,
    pub parents: Vec<usize>,
    pub children: Vec<usize>,
    pub contains_seed: bool,
    pub skipped: bool,
}

impl Segment {
    pub fn extent(&self) -> f64 {
        self.f_hi - self.f_lo
    }

    /// Isoline loops just inside the lower boundary.
    pub fn lower_loops(&self, f_max: f64) -> Vec<Isoline> {
        if self.contains_seed {
            return Vec::new();
        }
        let eps = LOOP_OFFSET_REL * f_max;
        self.patch.isolines(&self.patch.f, self.f_lo + eps)
    }

    /// Isoline loops just inside the upper boundary. Empty for segments containing a maximum.
    pub fn upper_loops(&self, f_max: f64) -> Vec<Isoline> {
        if !self.has_upper_boundary() {
            return Vec::new();
        }
        let eps = LOOP_OFFSET_REL * f_max;
        self.patch.isolines(&self.patch.f, self.f_hi - eps)
    }

    /// Whether the patch has boundary vertices at its top level.
    pub fn has_upper_boundary(&self) -> bool {
        (0..self.patch.n_vertices())
            .any(|v| self.patch.topology.is_boundary_vertex(v) && self.patch.f[v] == self.f_hi)
    }

    pub fn boundary_loop_count(&self) -> usize {
        self.patch.boundary_loops().len()
    }

    /// Patch vertex with the largest f.
    pub fn max_vertex(&self) -> usize {
        (0..self.patch.n_vertices())
            .max_by(|&a, &b| self.patch.f[a].total_cmp(&self.patch.f[b]).then(b.cmp(&a)))
            .expect("non-empty patch")
    }
}

#[derive(Debug, Clone)]
pub struct SegmentDag {
    pub segments: Vec<Segment>,
    pub edges: Vec<(usize, usize)>,
    /// Topological order (crochet order).
    pub order: Vec<usize>,
    /// Saddle levels separating the bands, ascending.
    pub levels: Vec<f64>,
    /// Row function with values near a level snapped onto it.
    pub f: Vec<f64>,
    pub f_max: f64,
}

impl SegmentDag {
    pub fn root(&self) -> usize {
        self.segments
            .iter()
            .position(|s| s.contains_seed)
            .expect("the seed lies in some segment")
    }

    pub fn active(&self) -> impl Iterator<Item = &Segment> {
        self.order
            .iter()
            .map(|&i| &self.segments[i])
            .filter(|s| !s.skipped)
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Deduplicated saddle values in ascending order.
pub fn saddle_levels(field: &GeodesicField) -> Vec<f64> {
    let tol = SNAP_REL * field.max_value();
    let mut levels: Vec<f64> = Vec::new();
    for &(v, _) in &field.critical.saddles {
        let x = field.values[v];
        if levels.last().is_none_or(|&l| x - l > tol) {
            levels.push(x);
        }
    }
    levels
}

pub fn segment_at_saddles(mesh: &TriangleMesh, field: &GeodesicField) -> SegmentDag {
    let levels = saddle_levels(field);
    let f_max = field.max_value();
    let tol = SNAP_REL * f_max;
    let f: Vec<f64> = field
        .values
        .iter()
        .map(|&x| {
            levels
                .iter()
                .copied()
                .find(|l| (x - l).abs() <= tol)
                .unwrap_or(x)
        })
        .collect();
    let nb = levels.len() + 1;
    let band_lo = |k: usize| {
        if k == 0 {
            f64::NEG_INFINITY
        } else {
            levels[k - 1]
        }
    };
    let band_hi = |k: usize| {
        if k == levels.len() {
            f64::INFINITY
        } else {
            levels[k]
        }
    };
    let overlaps = |lo: f64, hi: f64, k: usize| lo < band_hi(k) && hi > band_lo(k);

    let faces = mesh.faces();
    let range = |vs: &[usize]| {
        let lo = vs.iter().map(|&v| f[v]).fold(f64::INFINITY, f64::min);
        let hi = vs.iter().map(|&v| f[v]).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };

    // Pieces are (face, band) pairs with a two-dimensional overlap.
    let mut piece_id: HashMap<(usize, usize), usize> = HashMap::new();
    let mut pieces: Vec<(usize, usize)> = Vec::new();
    for (fi, tri) in faces.iter().enumerate() {
        let (lo, hi) = range(tri);
        for k in 0..nb {
            if overlaps(lo, hi, k) {
                piece_id.insert((fi, k), pieces.len());
                pieces.push((fi, k));
            }
        }
    }
    let mut uf = UnionFind((0..pieces.len()).collect());
    let topo = mesh.topology();
    for (fi, tri) in faces.iter().enumerate() {
        for k in 0..3 {
            let Some(h) = topo.twin(3 * fi + k) else {
                continue;
            };
            let g = h / 3;
            if g < fi {
                continue;
            }
            let (lo, hi) = range(&[tri[k], tri[(k + 1) % 3]]);
            for b in 0..nb {
                if overlaps(lo, hi, b) {
                    if let (Some(&p), Some(&q)) = (piece_id.get(&(fi, b)), piece_id.get(&(g, b))) {
                        uf.union(p, q);
                    }
                }
            }
        }
    }

    // Components ordered by (band, smallest face) become segment ids.
    let mut comp_key: HashMap<usize, (usize, usize)> = HashMap::new();
    for (i, &(fi, k)) in pieces.iter().enumerate() {
        let r = uf.find(i);
        let e = comp_key.entry(r).or_insert((k, fi));
        e.1 = e.1.min(fi);
    }
    let mut comps: Vec<(usize, (usize, usize))> = comp_key.into_iter().collect();
    comps.sort_by_key(|c| c.1);
    let seg_of_root: HashMap<usize, usize> =
        comps.iter().enumerate().map(|(i, c)| (c.0, i)).collect();
    let n_seg = comps.len();
    let mut support: Vec<Vec<usize>> = vec![Vec::new(); n_seg];
    let mut piece_seg = vec![0; pieces.len()];
    for (i, &(fi, _)) in pieces.iter().enumerate() {
        let s = seg_of_root[&uf.find(i)];
        piece_seg[i] = s;
        support[s].push(fi);
    }

    // Centroid rule for the face partition.
    let mut face_seg: Vec<Option<usize>> = vec![None; faces.len()];
    for (fi, tri) in faces.iter().enumerate() {
        let c = (f[tri[0]] + f[tri[1]] + f[tri[2]]) / 3.0;
        let k = levels.iter().filter(|&&l| l <= c).count();
        if let Some(&p) = piece_id.get(&(fi, k)) {
            face_seg[fi] = Some(piece_seg[p]);
        } else if let Some(k2) = (0..nb).find(|&k2| piece_id.contains_key(&(fi, k2))) {
            face_seg[fi] = Some(piece_seg[piece_id[&(fi, k2)]]);
        }
    }
    // Faces flat at a level take a neighbour's segment.
    while face_seg.iter().any(Option::is_none) {
        let mut changed = false;
        for fi in 0..faces.len() {
            if face_seg[fi].is_some() {
                continue;
            }
            for k in 0..3 {
                if let Some(h) = topo.twin(3 * fi + k) {
                    if let Some(s) = face_seg[h / 3] {
                        face_seg[fi] = Some(s);
                        changed = true;
                        break;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    // Faces straddling a level connect the segment below to the one above.
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (fi, tri) in faces.iter().enumerate() {
        let (lo, hi) = range(tri);
        for (k, &l) in levels.iter().enumerate() {
            if lo < l && l < hi {
                let below = piece_seg[piece_id[&(fi, k)]];
                let above = piece_seg[piece_id[&(fi, k + 1)]];
                edges.insert((below, above));
            }
        }
    }

    let mut segments = Vec::with_capacity(n_seg);
    for (s, &(_, (band, _))) in comps.iter().enumerate() {
        let mut sup = support[s].clone();
        sup.sort_unstable();
        sup.dedup();
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &fi in &sup {
            let (a, b) = range(&faces[fi]);
            lo = lo.min(a);
            hi = hi.max(b);
        }
        lo = lo.max(band_lo(band));
        hi = hi.min(band_hi(band));
        let patch = Patch::clip(mesh, &f, &sup, band_lo(band), band_hi(band));
        let contains_seed = patch
            .origin
            .iter()
            .any(|o| matches!(o, Origin::Vertex(v) if *v == field.seed));
        let parents = edges.iter().filter(|e| e.1 == s).map(|e| e.0).collect();
        let children = edges.iter().filter(|e| e.0 == s).map(|e| e.1).collect();
        segments.push(Segment {
            id: s,
            band,
            f_lo: lo,
            f_hi: hi,
            faces: (0..faces.len())
                .filter(|&fi| face_seg[fi] == Some(s))
                .collect(),
            support: sup,
            patch,
            parents,
            children,
            contains_seed,
            skipped: false,
        });
    }

    let edges: Vec<(usize, usize)> = edges.into_iter().collect();
    let order = topological_order(n_seg, &edges);
    SegmentDag {
        segments,
        edges,
        order,
        levels,
        f,
        f_max,
    }
}

/// Kahn's algorithm, always taking the smallest available id.
pub fn topological_order(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut indeg = vec![0; n];
    for &(_, t) in edges {
        indeg[t] += 1;
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(&v) = ready.iter().next() {
        ready.remove(&v);
        order.push(v);
        for &(s, t) in edges {
            if s == v {
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    ready.insert(t);
                }
            }
        }
    }
    assert_eq!(order.len(), n, "segment graph is acyclic");
    order
}

/// Marks segments thinner than `w` as skipped, together with every segment
/// reachable only through skipped ones. Returns the ids skipped by the cascade.
pub fn filter_thin_segments(dag: &mut SegmentDag, w: f64) -> Vec<usize> {
    let mut cascaded = Vec::new();
    for &s in &dag.order.clone() {
        let seg = &dag.segments[s];
        let thin = seg.extent() < w;
        let orphaned = !seg.contains_seed
            && !seg.parents.is_empty()
            && seg.parents.iter().all(|&p| dag.segments[p].skipped);
        if orphaned && !thin {
            log::warn!("segment {s} is reachable only through skipped segments; skipping it");
            cascaded.push(s);
        }
        dag.segments[s].skipped = thin || orphaned;
    }
    cascaded
}
