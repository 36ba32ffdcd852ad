//! Conforming triangulations with uniform (red) and newest-vertex-bisection
//! refinement.
//!
//! Conventions used throughout the crate:
//!
//! * Triangles store their three vertex indices in counter-clockwise order.
//! * Local edge `i` of a triangle is the edge *opposite* local vertex `i`.
//! * Every triangle carries the local index of its *refinement edge*, the
//!   edge bisected by newest-vertex bisection.  Mesh builders assign the
//!   longest edge (the hypotenuse on right-isosceles meshes).
//! * Global edges are identified by their sorted vertex pair.  The stored
//!   unit normal of an interior edge is the tangent from the lower to the
//!   higher vertex index rotated by +90°; boundary normals point outward.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

/// A point in the plane.
pub type Point = [f64; 2];

#[derive(Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("triangle {0} has a repeated vertex")]
    RepeatedVertex(usize),
    #[error("triangle {tri} references vertex {vertex} out of range {nv}")]
    VertexOutOfRange { tri: usize, vertex: usize, nv: usize },
    #[error("triangle {0} has non-positive signed area (not counter-clockwise or degenerate)")]
    NotCcw(usize),
    #[error("edge {{{0}, {1}}} is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("edge {{{0}, {1}}} is traversed twice in the same direction (inconsistent orientation)")]
    InconsistentOrientation(usize, usize),
    #[error("refinement edge index {index} of triangle {tri} is not in 0..3")]
    BadRefinementEdge { tri: usize, index: usize },
    #[error("vertices {0} and {1} coincide")]
    DuplicateVertex(usize, usize),
    #[error("vertex {vertex} lies in the interior of edge {{{a}, {b}}} (hanging node)")]
    HangingNode { vertex: usize, a: usize, b: usize },
    #[error("boundary flag of vertex {0} does not match the mesh topology")]
    BoundaryFlagMismatch(usize),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFiniteVertex(usize),
    #[error("mesh has no triangles")]
    Empty,
}

/// A mesh edge: sorted vertex pair, adjacent triangles, unit normal.
#[derive(Clone, Debug)]
pub struct Edge {
    /// Vertex indices with `vertices[0] < vertices[1]`.
    pub vertices: [usize; 2],
    /// Adjacent triangle indices; `triangles[1] == usize::MAX` on the boundary.
    pub triangles: [usize; 2],
    /// Unit normal: rotation by +90° of the tangent towards the higher
    /// vertex index, flipped to point outward on boundary edges.
    pub normal: [f64; 2],
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.triangles[1] == usize::MAX
    }
}

/// A conforming triangulation of a polygonal domain.
#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Point>,
    boundary_vertex: Vec<bool>,
    triangles: Vec<[usize; 3]>,
    refinement_edge: Vec<u8>,
    edges: Vec<Edge>,
    tri_edges: Vec<[usize; 3]>,
    /// For refined meshes: index of each triangle's parent in the coarser mesh.
    parent: Option<Vec<usize>>,
}

impl Mesh {
    /// Builds a mesh from vertices, counter-clockwise triangles, and
    /// per-triangle refinement-edge local indices, deriving all topology.
    pub fn from_raw(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        refinement_edge: Vec<u8>,
    ) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        assert_eq!(triangles.len(), refinement_edge.len());
        let nv = vertices.len();
        for (v, p) in vertices.iter().enumerate() {
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(MeshError::NonFiniteVertex(v));
            }
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(MeshError::VertexOutOfRange { tri: t, vertex: v, nv });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::RepeatedVertex(t));
            }
            if signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]) <= 0.0 {
                return Err(MeshError::NotCcw(t));
            }
        }
        for (t, &r) in refinement_edge.iter().enumerate() {
            if r >= 3 {
                return Err(MeshError::BadRefinementEdge { tri: t, index: r as usize });
            }
        }

        // Gather edges; record traversal direction to check orientation.
        let mut edge_ids: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut directions: Vec<[bool; 2]> = Vec::new(); // seen low->high, seen high->low
        let mut tri_edges = vec![[usize::MAX; 3]; triangles.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for local in 0..3 {
                let a = tri[(local + 1) % 3];
                let b = tri[(local + 2) % 3];
                let key = [a.min(b), a.max(b)];
                let forward = a < b;
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: key,
                        triangles: [usize::MAX; 2],
                        normal: [0.0, 0.0],
                    });
                    directions.push([false, false]);
                    edges.len() - 1
                });
                let e = &mut edges[id];
                if e.triangles[0] == usize::MAX {
                    e.triangles[0] = t;
                } else if e.triangles[1] == usize::MAX {
                    e.triangles[1] = t;
                } else {
                    return Err(MeshError::NonManifoldEdge(key[0], key[1]));
                }
                let dir = &mut directions[id];
                let slot = if forward { 0 } else { 1 };
                if dir[slot] {
                    return Err(MeshError::InconsistentOrientation(key[0], key[1]));
                }
                dir[slot] = true;
                tri_edges[t][local] = id;
            }
        }

        // Normals and boundary vertices.
        let mut boundary_vertex = vec![false; nv];
        for e in &mut edges {
            let [a, b] = e.vertices;
            let t = [vertices[b][0] - vertices[a][0], vertices[b][1] - vertices[a][1]];
            let len = (t[0] * t[0] + t[1] * t[1]).sqrt();
            let mut normal = [-t[1] / len, t[0] / len];
            if e.is_boundary() {
                boundary_vertex[a] = true;
                boundary_vertex[b] = true;
                // flip towards the exterior: away from the adjacent triangle
                let tri = triangles[e.triangles[0]];
                let mid_t = [
                    (vertices[tri[0]][0] + vertices[tri[1]][0] + vertices[tri[2]][0]) / 3.0,
                    (vertices[tri[0]][1] + vertices[tri[1]][1] + vertices[tri[2]][1]) / 3.0,
                ];
                let mid_e = [
                    0.5 * (vertices[a][0] + vertices[b][0]),
                    0.5 * (vertices[a][1] + vertices[b][1]),
                ];
                if normal[0] * (mid_e[0] - mid_t[0]) + normal[1] * (mid_e[1] - mid_t[1]) < 0.0 {
                    normal = [-normal[0], -normal[1]];
                }
            }
            e.normal = normal;
        }

        Ok(Self {
            vertices,
            boundary_vertex,
            triangles,
            refinement_edge,
            edges,
            tri_edges,
            parent: None,
        })
    }

    // ------------------------------------------------------------------
    // Accessors
    // ------------------------------------------------------------------

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Global edge ids of triangle `t`; entry `i` is the edge opposite vertex `i`.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    pub fn refinement_edge(&self, t: usize) -> u8 {
        self.refinement_edge[t]
    }

    /// Coordinates of the three vertices of triangle `t`.
    pub fn triangle_coords(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Parent triangle indices in the mesh this one was refined from.
    pub fn parent_triangles(&self) -> Option<&[usize]> {
        self.parent.as_deref()
    }

    // ------------------------------------------------------------------
    // Geometry queries
    // ------------------------------------------------------------------

    pub fn tri_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(t);
        signed_area(a, b, c)
    }

    /// Diameter of triangle `t` (its longest edge).
    pub fn tri_diameter(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(t);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    pub fn tri_midpoint(&self, t: usize) -> Point {
        let [a, b, c] = self.triangle_coords(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn edge_midpoint(&self, e: usize) -> Point {
        let [a, b] = self.edges[e].vertices;
        [
            0.5 * (self.vertices[a][0] + self.vertices[b][0]),
            0.5 * (self.vertices[a][1] + self.vertices[b][1]),
        ]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.edges[e].vertices;
        dist(self.vertices[a], self.vertices[b])
    }

    /// Largest triangle diameter in the mesh.
    pub fn h_max(&self) -> f64 {
        (0..self.n_triangles())
            .map(|t| self.tri_diameter(t))
            .fold(0.0, f64::max)
    }

    /// For each vertex, the triangles containing it, in ascending order.
    pub fn vertex_triangle_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_vertices()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                adj[v].push(t);
            }
        }
        adj
    }

    // ------------------------------------------------------------------
    // Validation
    // ------------------------------------------------------------------

    /// Checks all structural invariants, including conformity (no vertex in
    /// the interior of another triangle's edge).  Quadratic fallbacks are
    /// avoided by bucketing vertices on a uniform grid.
    pub fn validate(&self) -> Result<(), MeshError> {
        // Re-derive the topology; any inconsistency surfaces here.
        let rebuilt = Mesh::from_raw(
            self.vertices.clone(),
            self.triangles.clone(),
            self.refinement_edge.clone(),
        )?;
        for (v, &flag) in rebuilt.boundary_vertex.iter().enumerate() {
            if flag != self.boundary_vertex[v] {
                return Err(MeshError::BoundaryFlagMismatch(v));
            }
        }

        // Duplicate vertices (only vertices referenced by triangles matter,
        // but duplicated coordinates are rejected outright).
        let mut order: Vec<usize> = (0..self.n_vertices()).collect();
        order.sort_by(|&i, &j| {
            self.vertices[i]
                .partial_cmp(&self.vertices[j])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for w in order.windows(2) {
            if self.vertices[w[0]] == self.vertices[w[1]] {
                return Err(MeshError::DuplicateVertex(w[0].min(w[1]), w[0].max(w[1])));
            }
        }

        // Hanging nodes: a vertex strictly inside an edge segment.
        let cell = self.h_max().max(f64::MIN_POSITIVE);
        let key = |p: Point| -> (i64, i64) { ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64) };
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for v in 0..self.n_vertices() {
            buckets.entry(key(self.vertices[v])).or_default().push(v);
        }
        for e in &self.edges {
            let [a, b] = e.vertices;
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let len2 = dist(pa, pb).powi(2);
            let (ka, kb) = (key(pa), key(pb));
            let (ilo, ihi) = (ka.0.min(kb.0) - 1, ka.0.max(kb.0) + 1);
            let (jlo, jhi) = (ka.1.min(kb.1) - 1, ka.1.max(kb.1) + 1);
            for i in ilo..=ihi {
                for j in jlo..=jhi {
                    let Some(cands) = buckets.get(&(i, j)) else { continue };
                    for &v in cands {
                        if v == a || v == b {
                            continue;
                        }
                        let p = self.vertices[v];
                        let cross = (pb[0] - pa[0]) * (p[1] - pa[1]) - (pb[1] - pa[1]) * (p[0] - pa[0]);
                        if cross.abs() > 1e-12 * len2 {
                            continue;
                        }
                        let tpar = ((p[0] - pa[0]) * (pb[0] - pa[0]) + (p[1] - pa[1]) * (pb[1] - pa[1])) / len2;
                        if tpar > 1e-12 && tpar < 1.0 - 1e-12 {
                            return Err(MeshError::HangingNode { vertex: v, a, b });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    // ------------------------------------------------------------------
    // Refinement
    // ------------------------------------------------------------------

    /// Red refinement: every triangle is split into four similar children
    /// through its edge midpoints.  Children take their longest edge as the
    /// refinement edge, so right-isosceles meshes stay bisection-compatible.
    pub fn uniform_refine(&self) -> Mesh {
        let nv = self.n_vertices();
        let mut vertices = self.vertices.clone();
        for e in 0..self.n_edges() {
            vertices.push(self.edge_midpoint(e));
        }
        let mid = |e: usize| nv + e;
        let mut triangles = Vec::with_capacity(4 * self.n_triangles());
        let mut parent = Vec::with_capacity(4 * self.n_triangles());
        for (t, tri) in self.triangles.iter().enumerate() {
            let [v0, v1, v2] = *tri;
            let e = self.tri_edges[t];
            let (m0, m1, m2) = (mid(e[0]), mid(e[1]), mid(e[2]));
            for child in [[v0, m2, m1], [m2, v1, m0], [m1, m0, v2], [m0, m1, m2]] {
                triangles.push(child);
                parent.push(t);
            }
        }
        let refinement_edge = triangles
            .iter()
            .map(|tri| longest_edge_local(&vertices, *tri))
            .collect();
        let mut mesh = Mesh::from_raw(vertices, triangles, refinement_edge)
            .expect("red refinement preserves validity");
        mesh.parent = Some(parent);
        mesh
    }

    /// Newest-vertex bisection of the marked triangles together with the
    /// minimal conforming closure.  Each triangle is bisected through its
    /// refinement edge; children inherit the parent's remaining edges as
    /// refinement edges (the edge opposite the newest vertex).
    pub fn nvb_refine(&self, marked: &[usize]) -> Mesh {
        // Phase 1: mark refinement edges, then close: any triangle with a
        // marked edge must also have its refinement edge marked.
        let mut edge_marked = vec![false; self.n_edges()];
        for &t in marked {
            edge_marked[self.tri_edges[t][self.refinement_edge[t] as usize]] = true;
        }
        loop {
            let mut changed = false;
            for t in 0..self.n_triangles() {
                let e = self.tri_edges[t];
                let r = e[self.refinement_edge[t] as usize];
                if !edge_marked[r] && e.iter().any(|&id| edge_marked[id]) {
                    edge_marked[r] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        // Phase 2: midpoint vertices for the marked edges.
        let mut vertices = self.vertices.clone();
        let mut edge_midpoint = vec![usize::MAX; self.n_edges()];
        for e in 0..self.n_edges() {
            if edge_marked[e] {
                edge_midpoint[e] = vertices.len();
                vertices.push(self.edge_midpoint(e));
            }
        }

        // Phase 3: bisect.  With the refinement edge between the first two
        // vertices of an ordered triple (p, q, r), the children are
        // (r, p, m) and (q, r, m), again with their refinement edges first.
        let mut triangles = Vec::new();
        let mut refinement_edge: Vec<u8> = Vec::new();
        let mut parent = Vec::new();
        let mut push = |tri: [usize; 3], r: u8, par: usize| {
            triangles.push(tri);
            refinement_edge.push(r);
            parent.push(par);
        };
        for (t, tri) in self.triangles.iter().enumerate() {
            let rl = self.refinement_edge[t] as usize;
            let e = self.tri_edges[t];
            let ref_edge = e[rl];
            if !edge_marked[ref_edge] {
                push(*tri, rl as u8, t);
                continue;
            }
            // Order so the refinement edge comes first: (p, q, r), cyclic, CCW.
            let p = tri[(rl + 1) % 3];
            let q = tri[(rl + 2) % 3];
            let r = tri[rl];
            let m = edge_midpoint[ref_edge];
            // Child edges {r, p} and {q, r} are full edges of the parent.
            let e_rp = e[(rl + 2) % 3];
            let e_qr = e[(rl + 1) % 3];
            for (child, inherited) in [([r, p, m], e_rp), ([q, r, m], e_qr)] {
                if edge_marked[inherited] {
                    let m2 = edge_midpoint[inherited];
                    let [cp, cq, cr] = child; // refinement edge {cp, cq}
                    push([cr, cp, m2], 2, t);
                    push([cq, cr, m2], 2, t);
                } else {
                    push(child, 2, t);
                }
            }
        }
        let mut mesh = Mesh::from_raw(vertices, triangles, refinement_edge)
            .expect("bisection with closure preserves validity");
        mesh.parent = Some(parent);
        mesh
    }

    // ------------------------------------------------------------------
    // Plain-text serialisation
    // ------------------------------------------------------------------

    /// Serialises the mesh in the plain-text exchange format:
    /// a header `nv nt`, then `nv` lines `x y b` (coordinates and boundary
    /// flag) and `nt` lines `i j k r` (vertex indices and refinement edge).
    /// Floats are written in shortest round-trip form, so dump → load → dump
    /// is byte-identical.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n_vertices(), self.n_triangles());
        for (v, p) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "{} {} {}", p[0], p[1], u8::from(self.boundary_vertex[v]));
        }
        for (t, tri) in self.triangles.iter().enumerate() {
            let _ = writeln!(
                out,
                "{} {} {} {}",
                tri[0], tri[1], tri[2], self.refinement_edge[t]
            );
        }
        out
    }

    /// Parses the plain-text format produced by [`Mesh::to_text`] and
    /// validates the result, including the stored boundary flags.
    pub fn parse_text(input: &str) -> Result<Mesh, MeshParseError> {
        let mut lines = input
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty());
        let (ln, header) = lines.next().ok_or(MeshParseError::MissingHeader)?;
        let mut it = header.split_whitespace();
        let nv: usize = parse_token(it.next(), ln, "vertex count")?;
        let nt: usize = parse_token(it.next(), ln, "triangle count")?;
        if it.next().is_some() {
            return Err(MeshParseError::TrailingTokens { line: ln + 1 });
        }

        let mut vertices = Vec::new();
        let mut flags = Vec::new();
        for _ in 0..nv {
            let (ln, line) = lines.next().ok_or(MeshParseError::UnexpectedEof {
                expected: "vertex line",
            })?;
            let mut it = line.split_whitespace();
            let x: f64 = parse_token(it.next(), ln, "x coordinate")?;
            let y: f64 = parse_token(it.next(), ln, "y coordinate")?;
            let b: u8 = parse_token(it.next(), ln, "boundary flag")?;
            if it.next().is_some() {
                return Err(MeshParseError::TrailingTokens { line: ln + 1 });
            }
            if !(x.is_finite() && y.is_finite()) {
                return Err(MeshParseError::NonFiniteCoordinate { line: ln + 1 });
            }
            if b > 1 {
                return Err(MeshParseError::BadBoundaryFlag { line: ln + 1 });
            }
            vertices.push([x, y]);
            flags.push(b == 1);
        }

        let mut triangles = Vec::new();
        let mut refinement = Vec::new();
        for _ in 0..nt {
            let (ln, line) = lines.next().ok_or(MeshParseError::UnexpectedEof {
                expected: "triangle line",
            })?;
            let mut it = line.split_whitespace();
            let i: usize = parse_token(it.next(), ln, "vertex index")?;
            let j: usize = parse_token(it.next(), ln, "vertex index")?;
            let k: usize = parse_token(it.next(), ln, "vertex index")?;
            let r: u8 = parse_token(it.next(), ln, "refinement edge")?;
            if it.next().is_some() {
                return Err(MeshParseError::TrailingTokens { line: ln + 1 });
            }
            triangles.push([i, j, k]);
            refinement.push(r);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(MeshParseError::TrailingTokens { line: ln + 1 });
        }

        let mesh = Mesh::from_raw(vertices, triangles, refinement)?;
        for (v, &flag) in flags.iter().enumerate() {
            if mesh.boundary_vertex[v] != flag {
                return Err(MeshError::BoundaryFlagMismatch(v).into());
            }
        }
        mesh.validate()?;
        Ok(mesh)
    }
}

#[derive(Debug, Error)]
pub enum MeshParseError {
    #[error("missing header line 'nv nt'")]
    MissingHeader,
    #[error("line {line}: expected {what}, found {found:?}")]
    BadToken {
        line: usize,
        what: &'static str,
        found: Option<String>,
    },
    #[error("line {line}: trailing tokens")]
    TrailingTokens { line: usize },
    #[error("unexpected end of input, expected {expected}")]
    UnexpectedEof { expected: &'static str },
    #[error("line {line}: non-finite coordinate")]
    NonFiniteCoordinate { line: usize },
    #[error("line {line}: boundary flag must be 0 or 1")]
    BadBoundaryFlag { line: usize },
    #[error(transparent)]
    Invalid(#[from] MeshError),
}

fn parse_token<T: std::str::FromStr>(
    tok: Option<&str>,
    line0: usize,
    what: &'static str,
) -> Result<T, MeshParseError> {
    let tok = tok.ok_or(MeshParseError::BadToken {
        line: line0 + 1,
        what,
        found: None,
    })?;
    tok.parse().map_err(|_| MeshParseError::BadToken {
        line: line0 + 1,
        what,
        found: Some(tok.to_owned()),
    })
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn longest_edge_local(vertices: &[Point], tri: [usize; 3]) -> u8 {
    let mut best = 0u8;
    let mut best_len = -1.0;
    for local in 0..3 {
        let a = vertices[tri[(local + 1) % 3]];
        let b = vertices[tri[(local + 2) % 3]];
        let len = dist(a, b);
        if len > best_len {
            best_len = len;
            best = local as u8;
        }
    }
    best
}

// ----------------------------------------------------------------------
// Builders
// ----------------------------------------------------------------------

/// Uniform right-isosceles triangulation of the square `(lo, hi)²` with
/// `n × n` subsquares, each split along its lower-left → upper-right
/// diagonal.  Produces `2 n²` triangles with hypotenuse refinement edges.
pub fn build_square_grid(lo: f64, hi: f64, n: usize) -> Mesh {
    assert!(n >= 1 && hi > lo);
    let h = (hi - lo) / n as f64;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([lo + i as f64 * h, lo + j as f64 * h]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10) = (idx(i, j), idx(i + 1, j));
            let (v01, v11) = (idx(i, j + 1), idx(i + 1, j + 1));
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    let refinement = triangles
        .iter()
        .map(|tri| longest_edge_local(&vertices, *tri))
        .collect();
    Mesh::from_raw(vertices, triangles, refinement).expect("square grid is valid")
}

/// Uniform triangulation of the square `(-w, w)²`.
pub fn build_square_mesh(halfwidth: f64, n_per_side: usize) -> Mesh {
    build_square_grid(-halfwidth, halfwidth, n_per_side)
}

/// Uniform triangulation of the unit square `(0, 1)²`.
pub fn build_unit_square_mesh(n_per_side: usize) -> Mesh {
    build_square_grid(0.0, 1.0, n_per_side)
}

/// Uniform triangulation of the L-shaped domain `(-w, w)² \ [0, w)²`
/// (the open upper-right quadrant removed).  `n_per_side` must be even so
/// the removed quadrant is resolved; produces `3 n² / 2` triangles.
pub fn build_lshape_mesh(halfwidth: f64, n_per_side: usize) -> Mesh {
    assert!(n_per_side >= 2 && n_per_side % 2 == 0, "need an even subdivision");
    let square = build_square_mesh(halfwidth, n_per_side);
    let keep: Vec<usize> = (0..square.n_triangles())
        .filter(|&t| {
            let m = square.tri_midpoint(t);
            !(m[0] > 0.0 && m[1] > 0.0)
        })
        .collect();
    // Compact the vertex list to the used subset, preserving order.
    let mut new_id = vec![usize::MAX; square.n_vertices()];
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    let mut refinement = Vec::new();
    for &t in &keep {
        let mut tri = square.triangle(t);
        for v in &mut tri {
            if new_id[*v] == usize::MAX {
                new_id[*v] = vertices.len();
                vertices.push(square.vertex(*v));
            }
            *v = new_id[*v];
        }
        triangles.push(tri);
        refinement.push(square.refinement_edge(t));
    }
    Mesh::from_raw(vertices, triangles, refinement).expect("L-shape mesh is valid")
}
