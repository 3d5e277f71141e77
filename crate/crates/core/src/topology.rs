//! Corner/half-edge incidence for indexed triangle lists, with or without boundary.
//!
//! Half-edge `3 * f + k` runs from `faces[f][k]` to `faces[f][(k + 1) % 3]`.

use std::collections::HashMap;

/// One face seen from one of its vertices. The face is `(vertex, next, prev)` in CCW order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Corner {
    pub face: usize,
    pub next: usize,
    pub prev: usize,
}

/// Faces around a vertex in CCW order. Open fans start and end on boundary edges.
#[derive(Debug, Clone, Default)]
pub struct Fan {
    pub corners: Vec<Corner>,
    pub closed: bool,
}

impl Fan {
    /// Ordered one-ring neighbours. An open fan also lists its last `prev` vertex.
    pub fn neighbors(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.corners.iter().map(|c| c.next).collect();
        if !self.closed {
            if let Some(last) = self.corners.last() {
                out.push(last.prev);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TopologyIssue {
    /// An undirected edge used by more than two faces.
    NonManifoldEdge(usize, usize),
    /// Two faces traverse an edge in the same direction.
    Orientation(usize, usize),
}

#[derive(Debug, Clone)]
pub struct Topology {
    twin: Vec<Option<usize>>,
    fans: Vec<Vec<Fan>>,
    edges: Vec<[usize; 2]>,
}

impl Topology {
    pub fn build(n_vertices: usize, faces: &[[usize; 3]]) -> Result<Self, TopologyIssue> {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.len() * 3);
        let mut undirected: HashMap<(usize, usize), u32> = HashMap::with_capacity(faces.len() * 2);
        for (f, tri) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let count = undirected.entry(key).or_insert(0);
                *count += 1;
                if *count > 2 {
                    return Err(TopologyIssue::NonManifoldEdge(key.0, key.1));
                }
                if directed.insert((a, b), 3 * f + k).is_some() {
                    return Err(TopologyIssue::Orientation(a, b));
                }
            }
        }

        let mut twin = vec![None; faces.len() * 3];
        let mut edges = Vec::with_capacity(undirected.len());
        for (f, tri) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let h = 3 * f + k;
                twin[h] = directed.get(&(b, a)).copied();
                if a < b || twin[h].is_none() {
                    edges.push([a.min(b), a.max(b)]);
                }
            }
        }
        edges.sort_unstable();

        let mut corners_of: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_vertices];
        for (f, tri) in faces.iter().enumerate() {
            for (k, &v) in tri.iter().enumerate() {
                corners_of[v].push((f, k));
            }
        }

        let mut fans = Vec::with_capacity(n_vertices);
        for corners in &corners_of {
            fans.push(group_fans(faces, &twin, corners));
        }

        Ok(Topology { twin, fans, edges })
    }

    pub fn twin(&self, half_edge: usize) -> Option<usize> {
        self.twin[half_edge]
    }

    /// All fans of a vertex. More than one fan means the vertex is pinched.
    pub fn fans(&self, v: usize) -> &[Fan] {
        &self.fans[v]
    }

    /// The single fan of a vertex (empty for isolated vertices).
    pub fn fan(&self, v: usize) -> &Fan {
        static EMPTY: Fan = Fan {
            corners: Vec::new(),
            closed: false,
        };
        self.fans[v].first().unwrap_or(&EMPTY)
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn n_vertices(&self) -> usize {
        self.fans.len()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.fans[v].iter().any(|fan| !fan.closed)
    }

    pub fn pinched_vertices(&self) -> Vec<usize> {
        (0..self.fans.len())
            .filter(|&v| self.fans[v].len() > 1)
            .collect()
    }

    pub fn boundary_half_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.twin.len()).filter(|&h| self.twin[h].is_none())
    }

    pub fn is_closed(&self) -> bool {
        self.twin.iter().all(Option::is_some)
    }

    /// Boundary loops as vertex cycles, each traversed along its half-edges.
    /// Requires a pinch-free topology.
    pub fn boundary_loops(&self, faces: &[[usize; 3]]) -> Vec<Vec<usize>> {
        let mut out_of: HashMap<usize, usize> = HashMap::new();
        for h in self.boundary_half_edges() {
            let (f, k) = (h / 3, h % 3);
            out_of.insert(faces[f][k], h);
        }
        let mut starts: Vec<usize> = self.boundary_half_edges().collect();
        starts.sort_unstable();
        let mut seen = vec![false; self.twin.len()];
        let mut loops = Vec::new();
        for start in starts {
            if seen[start] {
                continue;
            }
            let mut lp = Vec::new();
            let mut h = start;
            loop {
                seen[h] = true;
                let (f, k) = (h / 3, h % 3);
                lp.push(faces[f][k]);
                let end = faces[f][(k + 1) % 3];
                match out_of.get(&end) {
                    Some(&next) if !seen[next] => h = next,
                    _ => break,
                }
            }
            loops.push(lp);
        }
        loops
    }
}

fn corner_of(faces: &[[usize; 3]], f: usize, k: usize) -> Corner {
    Corner {
        face: f,
        next: faces[f][(k + 1) % 3],
        prev: faces[f][(k + 2) % 3],
    }
}

fn group_fans(
    faces: &[[usize; 3]],
    twin: &[Option<usize>],
    corners: &[(usize, usize)],
) -> Vec<Fan> {
    // CCW neighbour of corner (f, k): across the half-edge prev -> v.
    let ccw = |(f, k): (usize, usize)| -> Option<(usize, usize)> {
        twin[3 * f + (k + 2) % 3].map(|h| (h / 3, h % 3))
    };
    // CW neighbour: across the half-edge v -> next.
    let cw = |(f, k): (usize, usize)| -> Option<(usize, usize)> {
        twin[3 * f + k].map(|h| (h / 3, (h % 3 + 1) % 3))
    };

    let mut remaining: Vec<(usize, usize)> = corners.to_vec();
    remaining.sort_unstable();
    let mut used: HashMap<(usize, usize), bool> = remaining.iter().map(|&c| (c, false)).collect();
    let mut fans = Vec::new();
    for &seed in &remaining {
        if used[&seed] {
            continue;
        }
        let mut start = seed;
        let mut closed = false;
        loop {
            match cw(start) {
                Some(prev) if prev == seed => {
                    closed = true;
                    break;
                }
                Some(prev) => start = prev,
                None => break,
            }
        }
        let mut fan = Fan {
            corners: Vec::new(),
            closed,
        };
        let mut cur = start;
        loop {
            used.insert(cur, true);
            fan.corners.push(corner_of(faces, cur.0, cur.1));
            match ccw(cur) {
                Some(next) if next == start => break,
                Some(next) => cur = next,
                None => break,
            }
        }
        fans.push(fan);
    }
    fans
}
