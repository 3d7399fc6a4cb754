//! Finite weighted metric trees. A point lives on an edge at an arc-length
//! offset from the edge's first endpoint; the distance between two points is
//! the length of the unique path joining them, and geodesics walk that path.

use crate::error::{Error, Result};
use super::Point;

#[derive(Clone, Debug, PartialEq)]
pub struct TreeEdge {
    pub u: usize,
    pub v: usize,
    pub len: f64,
}

#[derive(Clone, Debug)]
pub struct TreeSpace {
    edges: Vec<TreeEdge>,
    /// vertex -> [(edge index, opposite vertex)]
    adjacency: Vec<Vec<(usize, usize)>>,
    /// All-pairs vertex distances.
    vdist: Vec<Vec<f64>>,
    /// next_hop[a][b] is the neighbor of `a` on the path to `b`.
    next_hop: Vec<Vec<usize>>,
}

impl PartialEq for TreeSpace {
    fn eq(&self, other: &Self) -> bool {
        self.edges == other.edges
    }
}

impl TreeSpace {
    pub fn new(num_vertices: usize, edges: Vec<TreeEdge>) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::InvalidParameter("tree needs >= 1 vertex".into()));
        }
        if edges.len() + 1 != num_vertices {
            return Err(Error::InvalidParameter(format!(
                "{num_vertices} vertices need exactly {} edges for a tree, got {}",
                num_vertices - 1,
                edges.len()
            )));
        }
        let mut adjacency = vec![Vec::new(); num_vertices];
        for (i, e) in edges.iter().enumerate() {
            if e.u >= num_vertices || e.v >= num_vertices {
                return Err(Error::InvalidParameter(format!(
                    "edge {}-{} references a vertex outside 0..{num_vertices}",
                    e.u, e.v
                )));
            }
            if e.u == e.v {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {}", e.u)));
            }
            if !(e.len > 0.0 && e.len.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "edge {}-{} has non-positive length {}",
                    e.u, e.v, e.len
                )));
            }
            adjacency[e.u].push((i, e.v));
            adjacency[e.v].push((i, e.u));
        }

        // Edge count is vertices - 1, so connectivity also rules out cycles.
        let mut vdist = vec![vec![f64::INFINITY; num_vertices]; num_vertices];
        let mut next_hop = vec![vec![usize::MAX; num_vertices]; num_vertices];
        for root in 0..num_vertices {
            vdist[root][root] = 0.0;
            next_hop[root][root] = root;
            let mut stack = vec![root];
            let mut seen = vec![false; num_vertices];
            seen[root] = true;
            while let Some(cur) = stack.pop() {
                for &(eid, nb) in &adjacency[cur] {
                    if !seen[nb] {
                        seen[nb] = true;
                        vdist[root][nb] = vdist[root][cur] + edges[eid].len;
                        next_hop[root][nb] = if cur == root { nb } else { next_hop[root][cur] };
                        stack.push(nb);
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::InvalidParameter("tree is not connected".into()));
            }
        }

        Ok(TreeSpace {
            edges,
            adjacency,
            vdist,
            next_hop,
        })
    }

    /// Parses the plain-text description format: a `tree <num_vertices>`
    /// header followed by one `u v length` line per edge. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn from_description(text: &str) -> Result<Self> {
        let mut num_vertices = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if num_vertices.is_none() {
                if fields.len() != 2 || fields[0] != "tree" {
                    return Err(Error::parse(line_no, "expected header `tree <num_vertices>`"));
                }
                let n: usize = fields[1]
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("bad vertex count `{}`", fields[1])))?;
                num_vertices = Some(n);
                continue;
            }
            if fields.len() != 3 {
                return Err(Error::parse(line_no, "expected `u v length`"));
            }
            let u: usize = fields[0]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad vertex id `{}`", fields[0])))?;
            let v: usize = fields[1]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad vertex id `{}`", fields[1])))?;
            let len: f64 = fields[2]
                .parse()
                .map_err(|_| Error::parse(line_no, format!("bad edge length `{}`", fields[2])))?;
            edges.push(TreeEdge { u, v, len });
        }
        let num_vertices =
            num_vertices.ok_or_else(|| Error::parse(1, "missing `tree <num_vertices>` header"))?;
        TreeSpace::new(num_vertices, edges)
    }

    /// Two-edge path fixture: vertices 0-1-2 with lengths 2 and 3.
    pub fn small_path() -> Self {
        TreeSpace::new(
            3,
            vec![
                TreeEdge { u: 0, v: 1, len: 2.0 },
                TreeEdge { u: 1, v: 2, len: 3.0 },
            ],
        )
        .expect("fixture is a valid tree")
    }

    /// Six-vertex fixture with a degree-3 branch vertex.
    pub fn small_branched() -> Self {
        TreeSpace::new(
            6,
            vec![
                TreeEdge { u: 0, v: 1, len: 1.0 },
                TreeEdge { u: 1, v: 2, len: 2.0 },
                TreeEdge { u: 1, v: 3, len: 1.5 },
                TreeEdge { u: 0, v: 4, len: 2.5 },
                TreeEdge { u: 4, v: 5, len: 1.0 },
            ],
        )
        .expect("fixture is a valid tree")
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, idx: usize) -> &TreeEdge {
        &self.edges[idx]
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn incident_edges(&self, vertex: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[vertex].iter().map(|&(eid, _)| eid)
    }

    pub(crate) fn validate(&self, edge: usize, offset: f64) -> Result<()> {
        if edge >= self.edges.len() {
            return Err(Error::InvalidPoint(format!(
                "edge index {edge} out of range (tree has {} edges)",
                self.edges.len()
            )));
        }
        let len = self.edges[edge].len;
        if !offset.is_finite() || !(0.0..=len).contains(&offset) {
            return Err(Error::InvalidPoint(format!(
                "offset {offset} outside [0, {len}] on edge {edge}"
            )));
        }
        Ok(())
    }

    /// Point at a vertex, in canonical form: the lowest-numbered incident
    /// edge carries it, with offset 0 or the edge length.
    pub fn vertex_point(&self, vertex: usize) -> Point {
        let &(eid, _) = self.adjacency[vertex]
            .iter()
            .min_by_key(|&&(eid, _)| eid)
            .expect("connected tree has no isolated vertices");
        if self.edges[eid].u == vertex {
            Point::Tree { edge: eid, offset: 0.0 }
        } else {
            Point::Tree {
                edge: eid,
                offset: self.edges[eid].len,
            }
        }
    }

    /// Validated constructor; offsets landing exactly on a vertex are
    /// rewritten to the canonical vertex form. Rounding spill of up to 1e-12
    /// beyond either end is clamped.
    pub fn point_on_edge(&self, edge: usize, offset: f64) -> Result<Point> {
        if edge >= self.edges.len() {
            return Err(Error::InvalidPoint(format!(
                "edge index {edge} out of range (tree has {} edges)",
                self.edges.len()
            )));
        }
        let len = self.edges[edge].len;
        let mut offset = offset;
        if (-1e-12..0.0).contains(&offset) {
            offset = 0.0;
        }
        if offset > len && offset <= len + 1e-12 {
            offset = len;
        }
        self.validate(edge, offset)?;
        Ok(self.canonical(edge, offset))
    }

    fn canonical(&self, edge: usize, offset: f64) -> Point {
        if offset == 0.0 {
            self.vertex_point(self.edges[edge].u)
        } else if offset == self.edges[edge].len {
            self.vertex_point(self.edges[edge].v)
        } else {
            Point::Tree { edge, offset }
        }
    }

    pub fn vertex_distance(&self, a: usize, b: usize) -> f64 {
        self.vdist[a][b]
    }

    fn edge_between(&self, a: usize, b: usize) -> usize {
        self.adjacency[a]
            .iter()
            .find(|&&(_, nb)| nb == b)
            .map(|&(eid, _)| eid)
            .expect("next_hop neighbors are adjacent")
    }

    /// The four ways out of one edge and into the other; exactly the minima
    /// are realizable path lengths, and the overall minimum is the geodesic.
    fn routes(&self, e1: usize, o1: f64, e2: usize, o2: f64) -> [(f64, usize, usize, f64, f64); 4] {
        let a = &self.edges[e1];
        let b = &self.edges[e2];
        let (du1, dv1) = (o1, a.len - o1);
        let (du2, dv2) = (o2, b.len - o2);
        [
            (du1 + self.vdist[a.u][b.u] + du2, a.u, b.u, du1, du2),
            (du1 + self.vdist[a.u][b.v] + dv2, a.u, b.v, du1, dv2),
            (dv1 + self.vdist[a.v][b.u] + du2, a.v, b.u, dv1, du2),
            (dv1 + self.vdist[a.v][b.v] + dv2, a.v, b.v, dv1, dv2),
        ]
    }

    pub(crate) fn distance(&self, e1: usize, o1: f64, e2: usize, o2: f64) -> f64 {
        if e1 == e2 {
            return (o1 - o2).abs();
        }
        self.routes(e1, o1, e2, o2)
            .iter()
            .map(|r| r.0)
            .fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn geodesic(&self, e1: usize, o1: f64, e2: usize, o2: f64, lambda: f64) -> Point {
        if e1 == e2 {
            let off = (1.0 - lambda) * o1 + lambda * o2;
            return self.canonical(e1, off.clamp(0.0, self.edges[e1].len));
        }
        let routes = self.routes(e1, o1, e2, o2);
        let &(total, exit, enter, seg1, _) = routes
            .iter()
            .min_by(|a, b| a.0.partial_cmp(&b.0).expect("lengths are finite"))
            .expect("four routes");
        let mut arc = lambda * total;

        if arc <= seg1 {
            let off = if exit == self.edges[e1].u { o1 - arc } else { o1 + arc };
            return self.canonical(e1, off.clamp(0.0, self.edges[e1].len));
        }
        arc -= seg1;

        let mut cur = exit;
        while cur != enter {
            let nxt = self.next_hop[cur][enter];
            let eid = self.edge_between(cur, nxt);
            let len = self.edges[eid].len;
            if arc <= len {
                let off = if self.edges[eid].u == cur { arc } else { len - arc };
                return self.canonical(eid, off.clamp(0.0, len));
            }
            arc -= len;
            cur = nxt;
        }

        let len = self.edges[e2].len;
        let off = if self.edges[e2].u == enter { arc } else { len - arc };
        self.canonical(e2, off.clamp(0.0, len))
    }
}
