//! Finite element spaces: local shape functions and global dof numberings.
//!
//! All methods share four local building blocks on a triangle `T`:
//!
//! * the **hat functions** `λᵢ` (conforming P1),
//! * the **midpoint functions** `ψᵢ = 1 − 2λᵢ`, which are `1` at the
//!   midpoint of the edge opposite vertex `i` and `0` at the other two
//!   midpoints (Crouzeix–Raviart),
//! * the **quadratic bubble** `♭_T = 2 − C_T |x − mid(T)|²` with
//!   `C_T = 36 / (a² + b² + c²)` (squared edge lengths), normalised so its
//!   mean over `T` is `1` while its integral over every edge vanishes and
//!   its gradient is `L²`-orthogonal to constant gradients,
//! * the **P2 nodal functions** (vertex `λᵢ(2λᵢ − 1)`, edge `4λⱼλₖ`).
//!
//! Numberings eliminate Dirichlet dofs up front: boundary entities get the
//! sentinel [`CONSTRAINED`] and never enter the assembled systems.

use crate::bary::BaryPoly;
use crate::mesh::Mesh;

/// Sentinel for dofs removed by the homogeneous Dirichlet condition.
pub const CONSTRAINED: usize = usize::MAX;

/// Conforming P1 basis `[λ₀, λ₁, λ₂]` (vertex `i` ↦ function `i`).
pub fn p1_basis() -> [BaryPoly; 3] {
    [BaryPoly::lambda(0), BaryPoly::lambda(1), BaryPoly::lambda(2)]
}

/// Crouzeix–Raviart basis `[1 − 2λ₀, 1 − 2λ₁, 1 − 2λ₂]`; function `i`
/// belongs to the edge opposite vertex `i` (matching `Mesh::triangle_edges`).
pub fn cr_basis() -> [BaryPoly; 3] {
    let one = BaryPoly::constant(1.0);
    [
        one.sub(&BaryPoly::lambda(0).scale(2.0)),
        one.sub(&BaryPoly::lambda(1).scale(2.0)),
        one.sub(&BaryPoly::lambda(2).scale(2.0)),
    ]
}

/// P2 nodal basis: entries `0..3` are the vertex functions `λᵢ(2λᵢ − 1)`,
/// entries `3..6` the edge functions `4λⱼλₖ` for the edge opposite vertex
/// `i = entry − 3`.
pub fn p2_basis() -> [BaryPoly; 6] {
    let l: [BaryPoly; 3] = [BaryPoly::lambda(0), BaryPoly::lambda(1), BaryPoly::lambda(2)];
    [
        l[0].mul(&l[0].scale(2.0).sub(&BaryPoly::constant(1.0))),
        l[1].mul(&l[1].scale(2.0).sub(&BaryPoly::constant(1.0))),
        l[2].mul(&l[2].scale(2.0).sub(&BaryPoly::constant(1.0))),
        l[1].mul(&l[2]).scale(4.0),
        l[2].mul(&l[0]).scale(4.0),
        l[0].mul(&l[1]).scale(4.0),
    ]
}

/// The bubble's curvature coefficient `C_T = 36 / (a² + b² + c²)`.
pub fn bubble_constant(coords: [[f64; 2]; 3]) -> f64 {
    let mut sum_sq = 0.0;
    for i in 0..3 {
        let p = coords[(i + 1) % 3];
        let q = coords[(i + 2) % 3];
        sum_sq += (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
    }
    36.0 / sum_sq
}

/// The bubble `♭_T = 2 − C_T |x − mid(T)|²` in barycentric form.
///
/// With the centroid-translated vertices `P̃ᵢ = Pᵢ − mid(T)` one has
/// `x − mid(T) = Σᵢ λᵢ P̃ᵢ`, so `|x − mid(T)|² = Σᵢⱼ λᵢλⱼ (P̃ᵢ · P̃ⱼ)` —
/// translation-invariant and free of large-coordinate cancellation.
pub fn bubble(coords: [[f64; 2]; 3]) -> BaryPoly {
    let c = bubble_constant(coords);
    let mx = (coords[0][0] + coords[1][0] + coords[2][0]) / 3.0;
    let my = (coords[0][1] + coords[1][1] + coords[2][1]) / 3.0;
    let p: Vec<[f64; 2]> = coords.iter().map(|&v| [v[0] - mx, v[1] - my]).collect();
    let mut terms = vec![([0u8, 0, 0], 2.0)];
    for i in 0..3 {
        for j in 0..3 {
            let mut e = [0u8; 3];
            e[i] += 1;
            e[j] += 1;
            terms.push((e, -c * (p[i][0] * p[j][0] + p[i][1] * p[j][1])));
        }
    }
    BaryPoly::from_terms(terms)
}

/// Crouzeix–Raviart dof numbering: one dof per interior edge, in global
/// edge order; boundary edges are constrained.
pub struct CrSpace {
    pub edge_dof: Vec<usize>,
    pub n_dofs: usize,
}

impl CrSpace {
    pub fn new(mesh: &Mesh) -> Self {
        let mut edge_dof = vec![CONSTRAINED; mesh.n_edges()];
        let mut n = 0;
        for (id, slot) in edge_dof.iter_mut().enumerate() {
            if !mesh.edge(id).is_boundary() {
                *slot = n;
                n += 1;
            }
        }
        Self { edge_dof, n_dofs: n }
    }

    /// Global dofs of the three local midpoint functions of triangle `t`.
    pub fn local_dofs(&self, mesh: &Mesh, t: usize) -> [usize; 3] {
        let e = mesh.triangle_edges(t);
        [self.edge_dof[e[0]], self.edge_dof[e[1]], self.edge_dof[e[2]]]
    }
}

/// Enriched Crouzeix–Raviart numbering: the CR edge dofs first (identical
/// numbering to [`CrSpace`]), then one bubble dof per triangle.
pub struct EcrSpace {
    pub edge_dof: Vec<usize>,
    pub n_edge_dofs: usize,
    pub n_dofs: usize,
}

impl EcrSpace {
    pub fn new(mesh: &Mesh) -> Self {
        let cr = CrSpace::new(mesh);
        Self {
            n_dofs: cr.n_dofs + mesh.n_triangles(),
            n_edge_dofs: cr.n_dofs,
            edge_dof: cr.edge_dof,
        }
    }

    pub fn bubble_dof(&self, t: usize) -> usize {
        self.n_edge_dofs + t
    }

    /// Global dofs of the four local functions `[ψ₀, ψ₁, ψ₂, ♭]`.
    pub fn local_dofs(&self, mesh: &Mesh, t: usize) -> [usize; 4] {
        let e = mesh.triangle_edges(t);
        [
            self.edge_dof[e[0]],
            self.edge_dof[e[1]],
            self.edge_dof[e[2]],
            self.bubble_dof(t),
        ]
    }

    /// Splits a coefficient vector into its midpoint-interpolated CR part
    /// (numbered like [`CrSpace`]) and the per-triangle bubble part.  The
    /// bubble integrates to zero over every edge, so edge-mean interpolation
    /// onto CR simply drops it.
    pub fn split<'a>(&self, u: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        u.split_at(self.n_edge_dofs)
    }
}

/// Conforming P1 (Courant) numbering: one dof per interior vertex.
pub struct S1Space {
    pub vertex_dof: Vec<usize>,
    pub n_dofs: usize,
}

impl S1Space {
    pub fn new(mesh: &Mesh) -> Self {
        let mut vertex_dof = vec![CONSTRAINED; mesh.n_vertices()];
        let mut n = 0;
        for (v, slot) in vertex_dof.iter_mut().enumerate() {
            if !mesh.is_boundary_vertex(v) {
                *slot = n;
                n += 1;
            }
        }
        Self { vertex_dof, n_dofs: n }
    }

    pub fn local_dofs(&self, mesh: &Mesh, t: usize) -> [usize; 3] {
        let v = mesh.triangle(t);
        [
            self.vertex_dof[v[0]],
            self.vertex_dof[v[1]],
            self.vertex_dof[v[2]],
        ]
    }
}

/// Conforming P2 numbering: interior vertices first, then interior edge
/// midpoints.
pub struct S2Space {
    pub vertex_dof: Vec<usize>,
    pub edge_dof: Vec<usize>,
    pub n_vertex_dofs: usize,
    pub n_dofs: usize,
}

impl S2Space {
    pub fn new(mesh: &Mesh) -> Self {
        let s1 = S1Space::new(mesh);
        let mut edge_dof = vec![CONSTRAINED; mesh.n_edges()];
        let mut n = s1.n_dofs;
        for (id, slot) in edge_dof.iter_mut().enumerate() {
            if !mesh.edge(id).is_boundary() {
                *slot = n;
                n += 1;
            }
        }
        Self {
            vertex_dof: s1.vertex_dof,
            edge_dof,
            n_vertex_dofs: s1.n_dofs,
            n_dofs: n,
        }
    }

    /// Global dofs aligned with [`p2_basis`]: three vertex functions, then
    /// the edge functions for the edges opposite vertices `0, 1, 2`.
    pub fn local_dofs(&self, mesh: &Mesh, t: usize) -> [usize; 6] {
        let v = mesh.triangle(t);
        let e = mesh.triangle_edges(t);
        [
            self.vertex_dof[v[0]],
            self.vertex_dof[v[1]],
            self.vertex_dof[v[2]],
            self.edge_dof[e[0]],
            self.edge_dof[e[1]],
            self.edge_dof[e[2]],
        ]
    }
}

/// The extra-stabilised product space: a fully discontinuous part
/// (P1 ⊕ bubble, four dofs per triangle, numbered `4t + local`) paired with
/// an enriched CR part whose dofs follow at offset `4 · #triangles`.
pub struct EsSpace {
    pub ecr: EcrSpace,
    pub n_pw_dofs: usize,
    pub n_dofs: usize,
}

impl EsSpace {
    pub fn new(mesh: &Mesh) -> Self {
        let ecr = EcrSpace::new(mesh);
        let n_pw = 4 * mesh.n_triangles();
        Self {
            n_pw_dofs: n_pw,
            n_dofs: n_pw + ecr.n_dofs,
            ecr,
        }
    }

    /// Dofs of the four local discontinuous functions `[λ₀, λ₁, λ₂, ♭]`.
    pub fn pw_local_dofs(&self, t: usize) -> [usize; 4] {
        [4 * t, 4 * t + 1, 4 * t + 2, 4 * t + 3]
    }

    /// Dofs of the four local nonconforming functions `[ψ₀, ψ₁, ψ₂, ♭]`.
    pub fn nc_local_dofs(&self, mesh: &Mesh, t: usize) -> [usize; 4] {
        let inner = self.ecr.local_dofs(mesh, t);
        inner.map(|d| {
            if d == CONSTRAINED {
                CONSTRAINED
            } else {
                self.n_pw_dofs + d
            }
        })
    }

    /// Splits a coefficient vector into the discontinuous part (4 per
    /// triangle) and the nonconforming part (eCR numbering).
    pub fn split<'a>(&self, u: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        u.split_at(self.n_pw_dofs)
    }
}

/// Edge-mean interpolation into the Crouzeix–Raviart space: the coefficient
/// of each interior edge is the mean of `v` over that edge, taken from the
/// first adjacent triangle (single-valued whenever `v` has matching edge
/// means across edges, e.g. for any `H¹` function).  Boundary edges are
/// constrained, so `v` should have zero mean there for the interpolant to be
/// faithful near the boundary.
///
/// `v(t)` returns the local polynomial on triangle `t` in barycentric form.
pub fn interpolate_cr(
    mesh: &Mesh,
    space: &CrSpace,
    mut v: impl FnMut(usize) -> BaryPoly,
) -> Vec<f64> {
    let mut out = vec![0.0; space.n_dofs];
    for t in 0..mesh.n_triangles() {
        let poly = v(t);
        for (l, &e) in mesh.triangle_edges(t).iter().enumerate() {
            let dof = space.edge_dof[e];
            if dof != CONSTRAINED && mesh.edge(e).triangles[0] == t {
                out[dof] = poly.edge_mean(l);
            }
        }
    }
    out
}

/// Enriched edge-and-mean interpolation: edge coefficients as in
/// [`interpolate_cr`], plus a per-triangle bubble coefficient chosen so the
/// interpolant reproduces the mean of `v` over every triangle.  Since each
/// midpoint function has mean `1/3` over the triangle and the bubble has
/// mean `1`, the bubble coefficient is `∮_T v − (c₀ + c₁ + c₂)/3` with
/// constrained edge coefficients treated as zero.
pub fn interpolate_ecr(
    mesh: &Mesh,
    space: &EcrSpace,
    mut v: impl FnMut(usize) -> BaryPoly,
) -> Vec<f64> {
    let mut out = vec![0.0; space.n_dofs];
    for t in 0..mesh.n_triangles() {
        let poly = v(t);
        let mut mean_sum = 0.0;
        for (l, &e) in mesh.triangle_edges(t).iter().enumerate() {
            let dof = space.edge_dof[e];
            if dof != CONSTRAINED {
                let m = poly.edge_mean(l);
                mean_sum += m;
                if mesh.edge(e).triangles[0] == t {
                    out[dof] = m;
                }
            }
        }
        let area = mesh.tri_area(t);
        out[space.bubble_dof(t)] = poly.integral(area) / area - mean_sum / 3.0;
    }
    out
}

/// Per-vertex arithmetic means of the vertex traces of a Crouzeix–Raviart
/// field: at vertex `P`, each adjacent triangle contributes
/// `(c₀ + c₁ + c₂) − 2cᵢ` (its local polynomial evaluated at `P`, where `i`
/// is the local index of `P`), and the results are averaged with equal
/// weights.  Boundary vertices stay zero.
fn vertex_trace_means(mesh: &Mesh, cr: &CrSpace, u: &[f64]) -> Vec<f64> {
    let adj = mesh.vertex_triangle_adjacency();
    let mut out = vec![0.0; mesh.n_vertices()];
    for (v, slot) in out.iter_mut().enumerate() {
        if mesh.is_boundary_vertex(v) {
            continue;
        }
        let mut sum = 0.0;
        for &t in &adj[v] {
            let i = mesh
                .triangle(t)
                .iter()
                .position(|&w| w == v)
                .expect("adjacency lists only triangles containing the vertex");
            let c = cr
                .local_dofs(mesh, t)
                .map(|d| if d == CONSTRAINED { 0.0 } else { u[d] });
            sum += c[0] + c[1] + c[2] - 2.0 * c[i];
        }
        *slot = sum / adj[v].len() as f64;
    }
    out
}

/// Averages a Crouzeix–Raviart field into the conforming P1 space: interior
/// vertices receive the equal-weight mean of the adjacent vertex traces,
/// boundary vertices zero.  Reproduces any conforming P1 field exactly.
pub fn average_a1(mesh: &Mesh, cr: &CrSpace, s1: &S1Space, u: &[f64]) -> Vec<f64> {
    let traces = vertex_trace_means(mesh, cr, u);
    let mut out = vec![0.0; s1.n_dofs];
    for (v, &dof) in s1.vertex_dof.iter().enumerate() {
        if dof != CONSTRAINED {
            out[dof] = traces[v];
        }
    }
    out
}

/// Averages a Crouzeix–Raviart field into the conforming P2 space: vertex
/// values as in [`average_a1`], and each interior edge midpoint takes the CR
/// coefficient of that edge directly (the CR field is already single-valued
/// there).
pub fn average_a2(mesh: &Mesh, cr: &CrSpace, s2: &S2Space, u: &[f64]) -> Vec<f64> {
    let traces = vertex_trace_means(mesh, cr, u);
    let mut out = vec![0.0; s2.n_dofs];
    for (v, &dof) in s2.vertex_dof.iter().enumerate() {
        if dof != CONSTRAINED {
            out[dof] = traces[v];
        }
    }
    for (e, &dof) in s2.edge_dof.iter().enumerate() {
        if dof != CONSTRAINED {
            out[dof] = u[cr.edge_dof[e]];
        }
    }
    out
}
