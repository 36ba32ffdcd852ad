//! Guaranteed upper eigenvalue bounds from conforming candidate functions.
//!
//! Every continuous, piecewise-polynomial function that vanishes on the
//! boundary is admissible in the Rayleigh quotient of `−Δ + V`, so the Ritz
//! values of any family of such candidates bound the exact eigenvalues from
//! above: `μ_j ≥ λ_j` for `j = 1, …, rank`, where `rank` is the dimension
//! actually spanned.  No mesh-size or regularity assumption enters — the
//! bounds are certified as long as the forms are integrated exactly, which
//! they are here (all candidates are piecewise quadratics and the potential
//! is a polynomial per triangle).
//!
//! Candidates come from two sources:
//!
//! * conforming eigenfunctions (P1 or P2 coefficient vectors) used directly,
//! * nonconforming eigenfunctions pushed into the conforming spaces by the
//!   vertex-averaging maps [`crate::spaces::average_a1`] /
//!   [`crate::spaces::average_a2`].
//!
//! The module also quantifies how much averaging distorts an eigenfunction
//! family ([`averaging_defect_alpha`]): when the defect is small against
//! `λ_k^{-1/2}`, the averaged family is linearly independent and its Ritz
//! values genuinely cover the first `k` eigenvalues.

use faer::Mat;

use crate::assembly::ElementPotential;
use crate::bary::bary_gradients;
use crate::eigensolve::{dense_generalized_psd, EigenError};
use crate::mesh::Mesh;
use crate::spaces::{bubble_constant, p2_basis, CrSpace, EcrSpace, S1Space, S2Space, CONSTRAINED};

/// A globally continuous field given by finite element coefficients.
///
/// Both variants are piecewise quadratics, so a triangle restriction is
/// described exactly by its six nodal values
/// `[u(P₀), u(P₁), u(P₂), u(m₀), u(m₁), u(m₂)]` (vertices, then the midpoint
/// of the edge opposite each vertex) — the coefficient vector of
/// [`p2_basis`].
#[derive(Clone, Copy)]
pub enum ConformingFn<'a> {
    /// Conforming P1 coefficients in [`S1Space`] numbering.
    P1(&'a S1Space, &'a [f64]),
    /// Conforming P2 coefficients in [`S2Space`] numbering.
    P2(&'a S2Space, &'a [f64]),
}

impl ConformingFn<'_> {
    /// The six nodal values of the restriction to triangle `t`.
    pub fn local_p2_values(&self, mesh: &Mesh, t: usize) -> [f64; 6] {
        match self {
            ConformingFn::P1(space, u) => {
                let verts = mesh.triangle(t);
                let v = verts.map(|w| {
                    let d = space.vertex_dof[w];
                    if d == CONSTRAINED {
                        0.0
                    } else {
                        u[d]
                    }
                });
                // a P1 function is linear along each edge, so midpoint
                // values are endpoint means
                [
                    v[0],
                    v[1],
                    v[2],
                    0.5 * (v[1] + v[2]),
                    0.5 * (v[2] + v[0]),
                    0.5 * (v[0] + v[1]),
                ]
            }
            ConformingFn::P2(space, u) => space
                .local_dofs(mesh, t)
                .map(|d| if d == CONSTRAINED { 0.0 } else { u[d] }),
        }
    }
}

/// A field that may jump across edges but is a quadratic on every triangle,
/// again described per triangle by its six nodal values.
#[derive(Clone, Copy)]
pub enum PiecewiseFn<'a> {
    /// Midpoint (Crouzeix–Raviart) coefficients.
    Cr(&'a CrSpace, &'a [f64]),
    /// Enriched midpoint coefficients: edge part plus one bubble per triangle.
    Ecr(&'a EcrSpace, &'a [f64]),
    /// A conforming field viewed as a (continuous) piecewise quadratic.
    Conforming(ConformingFn<'a>),
}

impl PiecewiseFn<'_> {
    /// The six nodal values of the restriction to triangle `t`.
    pub fn local_p2_values(&self, mesh: &Mesh, t: usize) -> [f64; 6] {
        match self {
            PiecewiseFn::Cr(space, u) => {
                let c = space
                    .local_dofs(mesh, t)
                    .map(|d| if d == CONSTRAINED { 0.0 } else { u[d] });
                cr_nodal_values(c)
            }
            PiecewiseFn::Ecr(space, u) => {
                let dofs = space.local_dofs(mesh, t);
                let c = [dofs[0], dofs[1], dofs[2]]
                    .map(|d| if d == CONSTRAINED { 0.0 } else { u[d] });
                let mut vals = cr_nodal_values(c);
                let bub = bubble_nodal_values(mesh.triangle_coords(t));
                let cb = u[dofs[3]];
                for (v, b) in vals.iter_mut().zip(bub) {
                    *v += cb * b;
                }
                vals
            }
            PiecewiseFn::Conforming(f) => f.local_p2_values(mesh, t),
        }
    }
}

/// Nodal values of `Σ cᵢ ψᵢ` with `ψᵢ = 1 − 2λᵢ`: at vertex `Pᵢ` the three
/// midpoint functions contribute `(c₀ + c₁ + c₂) − 2cᵢ`, at midpoint `mᵢ`
/// only the own function is nonzero.
fn cr_nodal_values(c: [f64; 3]) -> [f64; 6] {
    let s = c[0] + c[1] + c[2];
    [s - 2.0 * c[0], s - 2.0 * c[1], s - 2.0 * c[2], c[0], c[1], c[2]]
}

/// Nodal values of the bubble `2 − C_T |x − mid(T)|²` from the triangle
/// coordinates alone.
fn bubble_nodal_values(coords: [[f64; 2]; 3]) -> [f64; 6] {
    let c = bubble_constant(coords);
    let mx = (coords[0][0] + coords[1][0] + coords[2][0]) / 3.0;
    let my = (coords[0][1] + coords[1][1] + coords[2][1]) / 3.0;
    let p = coords.map(|v| [v[0] - mx, v[1] - my]);
    let at = |d: [f64; 2]| 2.0 - c * (d[0] * d[0] + d[1] * d[1]);
    [
        at(p[0]),
        at(p[1]),
        at(p[2]),
        at([0.5 * (p[1][0] + p[2][0]), 0.5 * (p[1][1] + p[2][1])]),
        at([0.5 * (p[2][0] + p[0][0]), 0.5 * (p[2][1] + p[0][1])]),
        at([0.5 * (p[0][0] + p[1][0]), 0.5 * (p[0][1] + p[1][1])]),
    ]
}

/// Exact per-triangle energy and mass forms on the local quadratic space,
/// expressed in nodal coordinates: `a_local[t]` is the 6×6 matrix of
/// `∫_T ∇φᵢ·∇φⱼ + V φᵢφⱼ`, `b_local[t]` of `∫_T φᵢφⱼ`, for the nodal basis
/// of [`p2_basis`].  Built once per mesh/potential pair and reused across
/// all candidate families.
pub struct ConformingGramContext {
    pub a_local: Vec<[[f64; 6]; 6]>,
    pub b_local: Vec<[[f64; 6]; 6]>,
}

impl ConformingGramContext {
    pub fn new(mesh: &Mesh, potential: &ElementPotential) -> Self {
        let p2 = p2_basis();
        // pairwise products and their unit-area integrals are
        // triangle-independent in barycentric form
        let mut pair = Vec::with_capacity(21);
        let mut mass_unit = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in i..6 {
                let prod = p2[i].mul(&p2[j]);
                mass_unit[i][j] = prod.integral(1.0);
                mass_unit[j][i] = mass_unit[i][j];
                pair.push(prod);
            }
        }
        let n = mesh.n_triangles();
        let mut a_local = Vec::with_capacity(n);
        let mut b_local = Vec::with_capacity(n);
        for t in 0..n {
            let coords = mesh.triangle_coords(t);
            let g = bary_gradients(coords);
            let area = mesh.tri_area(t);
            let vpoly = potential.local_poly(mesh, t);
            let mut a = [[0.0; 6]; 6];
            let mut b = [[0.0; 6]; 6];
            let mut idx = 0;
            for i in 0..6 {
                for j in i..6 {
                    let mut entry = p2[i].stiffness_with(&p2[j], &g, area);
                    if let Some(v) = &vpoly {
                        entry += pair[idx].mul(v).integral(area);
                    }
                    a[i][j] = entry;
                    a[j][i] = entry;
                    b[i][j] = mass_unit[i][j] * area;
                    b[j][i] = b[i][j];
                    idx += 1;
                }
            }
            a_local.push(a);
            b_local.push(b);
        }
        Self { a_local, b_local }
    }
}

/// Rayleigh–Ritz matrices of a candidate family: `(A, B)` with
/// `A_jl = a(v_j, v_l)` (energy including the potential) and
/// `B_jl = (v_j, v_l)_{L²}`, accumulated triangle by triangle from the
/// context's local forms.
pub fn conforming_gram(
    mesh: &Mesh,
    ctx: &ConformingGramContext,
    candidates: &[ConformingFn],
) -> (Mat<f64>, Mat<f64>) {
    let k = candidates.len();
    let mut a = Mat::<f64>::zeros(k, k);
    let mut b = Mat::<f64>::zeros(k, k);
    let mut vals: Vec<[f64; 6]> = vec![[0.0; 6]; k];
    for t in 0..mesh.n_triangles() {
        for (j, cand) in candidates.iter().enumerate() {
            vals[j] = cand.local_p2_values(mesh, t);
        }
        let al = &ctx.a_local[t];
        let bl = &ctx.b_local[t];
        for j in 0..k {
            let mut sa = [0.0; 6];
            let mut sb = [0.0; 6];
            for (r, (sar, sbr)) in sa.iter_mut().zip(sb.iter_mut()).enumerate() {
                let mut acca = 0.0;
                let mut accb = 0.0;
                for c in 0..6 {
                    acca += al[r][c] * vals[j][c];
                    accb += bl[r][c] * vals[j][c];
                }
                *sar = acca;
                *sbr = accb;
            }
            for l in j..k {
                let mut da = 0.0;
                let mut db = 0.0;
                for r in 0..6 {
                    da += vals[l][r] * sa[r];
                    db += vals[l][r] * sb[r];
                }
                a[(j, l)] += da;
                b[(j, l)] += db;
            }
        }
    }
    for j in 0..k {
        for l in 0..j {
            a[(j, l)] = a[(l, j)];
            b[(j, l)] = b[(l, j)];
        }
    }
    (a, b)
}

/// Certified upper bounds from one candidate family.
#[derive(Clone, Debug)]
pub struct GubResult {
    /// Ritz values `μ₁ ≤ … ≤ μ_rank` of the family's span; `μ_j ≥ λ_j`.
    pub mu: Vec<f64>,
    /// How many leading eigenvalues the bounds cover (the span's dimension).
    pub k_available: usize,
    /// True when the family was linearly dependent, so fewer bounds than
    /// candidates came out.
    pub degenerate: bool,
}

/// Relative rank cutoff for detecting linearly dependent candidate families.
const GRAM_RANK_TOL: f64 = 1e-12;

/// Upper bounds from the full span of `candidates`.
pub fn gub_from_averaging(
    mesh: &Mesh,
    ctx: &ConformingGramContext,
    candidates: &[ConformingFn],
) -> Result<GubResult, EigenError> {
    let (a, b) = conforming_gram(mesh, ctx, candidates);
    gub_from_gram(&a, &b)
}

/// Upper bounds for every nested leading family: entry `k − 1` uses the span
/// of the first `k` candidates only.  One Gram assembly serves all `k`.
pub fn gub_nested(
    mesh: &Mesh,
    ctx: &ConformingGramContext,
    candidates: &[ConformingFn],
) -> Result<Vec<GubResult>, EigenError> {
    let (a, b) = conforming_gram(mesh, ctx, candidates);
    (1..=candidates.len())
        .map(|k| {
            gub_from_gram(
                &a.submatrix(0, 0, k, k).to_owned(),
                &b.submatrix(0, 0, k, k).to_owned(),
            )
        })
        .collect()
}

/// Ritz values of an explicitly assembled candidate pencil.
pub fn gub_from_gram(a: &Mat<f64>, b: &Mat<f64>) -> Result<GubResult, EigenError> {
    let sol = dense_generalized_psd(a, b, GRAM_RANK_TOL)?;
    Ok(GubResult {
        k_available: sol.rank,
        degenerate: sol.rank < a.nrows(),
        mu: sol.values,
    })
}

/// The averaging defect
/// `α = max { ‖v − Av‖_{L²} / ‖v‖_λ : v ∈ span(originals) }`,
/// where `Av` is the averaged image of `v` and `‖Σ yⱼuⱼ‖_λ² = Σ λⱼ yⱼ²` is
/// the discrete energy of the (b-orthonormal) eigenfunction expansion.
/// Computed as the largest eigenvalue of the defect Gram against
/// `diag(λ₁, …, λ_k)`.
pub fn averaging_defect_alpha(
    mesh: &Mesh,
    ctx: &ConformingGramContext,
    originals: &[PiecewiseFn],
    averaged: &[ConformingFn],
    lambda: &[f64],
) -> Result<f64, EigenError> {
    let k = originals.len();
    assert_eq!(averaged.len(), k, "one averaged image per original");
    assert_eq!(lambda.len(), k, "one eigenvalue per original");
    let mut c = Mat::<f64>::zeros(k, k);
    let mut defects: Vec<[f64; 6]> = vec![[0.0; 6]; k];
    for t in 0..mesh.n_triangles() {
        for j in 0..k {
            let orig = originals[j].local_p2_values(mesh, t);
            let avg = averaged[j].local_p2_values(mesh, t);
            for r in 0..6 {
                defects[j][r] = orig[r] - avg[r];
            }
        }
        let bl = &ctx.b_local[t];
        for j in 0..k {
            let mut s = [0.0; 6];
            for (r, slot) in s.iter_mut().enumerate() {
                let mut acc = 0.0;
                for col in 0..6 {
                    acc += bl[r][col] * defects[j][col];
                }
                *slot = acc;
            }
            for l in j..k {
                let mut d = 0.0;
                for r in 0..6 {
                    d += defects[l][r] * s[r];
                }
                c[(j, l)] += d;
            }
        }
    }
    for j in 0..k {
        for l in 0..j {
            c[(j, l)] = c[(l, j)];
        }
    }
    let mut d = Mat::<f64>::zeros(k, k);
    for (j, &l) in lambda.iter().enumerate() {
        assert!(l > 0.0, "eigenvalues must be positive");
        d[(j, j)] = l;
    }
    let sol = dense_generalized_psd(&c, &d, GRAM_RANK_TOL)?;
    Ok(sol.values.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// Whether a defect `α` is small enough (`α² λ < 1`, strictly) for the
/// averaged family to be linearly independent, so that its first `k` Ritz
/// values genuinely bound `λ₁, …, λ_k`.  Pass the `k`-th eigenvalue.
pub fn averaging_preserves_rank(alpha: f64, lambda_k: f64) -> bool {
    alpha * alpha * lambda_k < 1.0
}
