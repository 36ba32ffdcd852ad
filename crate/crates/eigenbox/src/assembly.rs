//! Assembly of the generalized eigenvalue pencils `A x = λ B x`.
//!
//! Every method discretises the form pair
//!
//! ```text
//! A(u, v) = Σ_T ∫_T ∇u·∇v dx  +  potential term,    B(u, v) = weighted L² pairing
//! ```
//!
//! with homogeneous Dirichlet dofs eliminated.  The methods differ in the
//! space and in which side applies the elementwise mean projection `Π₀`:
//!
//! | method | space            | potential term              | right-hand side        |
//! |--------|------------------|-----------------------------|------------------------|
//! | `cr`   | midpoint (CR)    | `(u, v)_V`                  | `(u, v)`               |
//! | `ecr`  | enriched CR      | `(u, v)_V`                  | `(u, v)`               |
//! | `mcr`  | enriched CR      | `(Π₀u, Π₀v)_V`              | `(u, v)`               |
//! | `rt`   | enriched CR      | `(Π₀u, Π₀v)_V`              | `(Π₀u, Π₀v)`           |
//! | `scr`  | discont. × eCR   | `(Π₀u_nc, Π₀v_nc)_V` + stab.| `(u_pw, v_pw)`         |
//! | `s1`   | Courant (P1)     | `(u, v)_V`                  | `(u, v)`               |
//!
//! `scr` adds the stabiliser `Σ_T w_T ∫_T (u_pw − u_nc)(v_pw − v_nc) dx`
//! with `w_T = κ⁻² h_T⁻²` (scaled by the diffusion infimum when an
//! elementwise diffusion coefficient is present), and its right-hand side
//! pairs only the discontinuous component, so the pencil has exactly
//! `dim(eCR)` infinite eigenvalues; `rt` likewise has rank `#triangles` on
//! the right and all other methods a definite right-hand side.
//!
//! All local integrals are closed-form polynomial integrals — no quadrature
//! error anywhere in the assembled matrices.

use faer::sparse::{SparseColMat, Triplet};
use thiserror::Error;

use crate::bary::{bary_gradients, BaryPoly};
use crate::bounds::ENRICHED_INTERP_CONST;
use crate::mesh::Mesh;
use crate::spaces::{bubble, cr_basis, p1_basis, CrSpace, EcrSpace, EsSpace, S1Space, CONSTRAINED};

/// Ensures every matrix operation in this crate runs on one thread, making
/// runs bit-for-bit reproducible.  Idempotent and cheap.
pub fn set_deterministic_parallelism() {
    faer::set_global_parallelism(faer::Par::Seq);
}

/// The discretisation methods exposed by the toolkit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Crouzeix–Raviart (midpoint-continuous affine).
    Cr,
    /// Bubble-enriched Crouzeix–Raviart.
    Ecr,
    /// Enriched CR with the mean-projected potential term.
    Mcr,
    /// Enriched CR with mean projections on both the potential and the
    /// right-hand side (the mixed / flux-equivalent variant).
    Rt,
    /// Extra-stabilised pairing of a fully discontinuous space with
    /// enriched CR.
    Scr,
    /// Conforming Courant (P1) elements.
    S1,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Cr,
        Method::Ecr,
        Method::Mcr,
        Method::Rt,
        Method::Scr,
        Method::S1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Cr => "cr",
            Method::Ecr => "ecr",
            Method::Mcr => "mcr",
            Method::Rt => "rt",
            Method::Scr => "scr",
            Method::S1 => "s1",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cr" => Some(Method::Cr),
            "ecr" => Some(Method::Ecr),
            "mcr" => Some(Method::Mcr),
            "rt" => Some(Method::Rt),
            "scr" => Some(Method::Scr),
            "s1" => Some(Method::S1),
            _ => None,
        }
    }

    /// True when the potential term only sees elementwise means, so the
    /// assembled problem coincides with the problem for `Π₀V`.
    pub fn projects_potential(self) -> bool {
        matches!(self, Method::Mcr | Method::Rt | Method::Scr)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// The potential as the assembly consumes it: exactly integrable per
/// triangle.
#[derive(Clone, Copy, Debug)]
pub enum ElementPotential<'a> {
    /// `V = 0`.
    Zero,
    /// `V(x) = |x|²/2`, integrated exactly as a quadratic polynomial.
    Harmonic,
    /// One constant per triangle (projected or tabulated potentials).
    Constants(&'a [f64]),
}

impl ElementPotential<'_> {
    /// The potential restricted to triangle `t` as a barycentric polynomial,
    /// or `None` when it vanishes.
    pub(crate) fn local_poly(&self, mesh: &Mesh, t: usize) -> Option<BaryPoly> {
        match self {
            ElementPotential::Zero => None,
            ElementPotential::Harmonic => {
                let p = mesh.triangle_coords(t);
                let mut terms = Vec::with_capacity(9);
                for i in 0..3 {
                    for j in 0..3 {
                        let mut e = [0u8; 3];
                        e[i] += 1;
                        e[j] += 1;
                        terms.push((e, 0.5 * (p[i][0] * p[j][0] + p[i][1] * p[j][1])));
                    }
                }
                Some(BaryPoly::from_terms(terms))
            }
            ElementPotential::Constants(v) => {
                if v[t] == 0.0 {
                    None
                } else {
                    Some(BaryPoly::constant(v[t]))
                }
            }
        }
    }

    /// `Π₀V` on triangle `t` (exact: the harmonic mean value comes from the
    /// squared edge midpoints).
    fn triangle_mean(&self, mesh: &Mesh, t: usize) -> f64 {
        match self {
            ElementPotential::Zero => 0.0,
            ElementPotential::Harmonic => {
                let e = mesh.triangle_edges(t);
                e.iter()
                    .map(|&id| {
                        let m = mesh.edge_midpoint(id);
                        m[0] * m[0] + m[1] * m[1]
                    })
                    .sum::<f64>()
                    / 6.0
            }
            ElementPotential::Constants(v) => v[t],
        }
    }

    fn check_len(&self, mesh: &Mesh) -> Result<(), AssembleError> {
        if let ElementPotential::Constants(v) = self {
            if v.len() != mesh.n_triangles() {
                return Err(AssembleError::PotentialLength {
                    got: v.len(),
                    want: mesh.n_triangles(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum AssembleError {
    #[error("potential table has {got} entries but the mesh has {want} triangles")]
    PotentialLength { got: usize, want: usize },
    #[error("diffusion table has {got} entries but the mesh has {want} triangles")]
    DiffusionLength { got: usize, want: usize },
    #[error("diffusion coefficients must be finite and positive")]
    BadDiffusion,
    #[error("sparse matrix construction failed: {0}")]
    Matrix(String),
}

/// An assembled symmetric pencil `A x = λ B x` with `A` positive definite
/// and `B` positive semidefinite of corank `n_infinite`.
pub struct Pencil {
    pub a: SparseColMat<usize, f64>,
    pub b: SparseColMat<usize, f64>,
    pub n_dofs: usize,
    /// Number of eigenvalues at `+∞` (the corank of `B`), known exactly
    /// from the structure of the right-hand form.
    pub n_infinite: usize,
}

struct Accumulator {
    n: usize,
    a: Vec<Triplet<usize, usize, f64>>,
    b: Vec<Triplet<usize, usize, f64>>,
}

impl Accumulator {
    fn new(n: usize, per_tri: usize, nt: usize) -> Self {
        Self {
            n,
            a: Vec::with_capacity(per_tri * nt),
            b: Vec::with_capacity(per_tri * nt),
        }
    }

    fn add_a(&mut self, row: usize, col: usize, v: f64) {
        if row != CONSTRAINED && col != CONSTRAINED && v != 0.0 {
            self.a.push(Triplet::new(row, col, v));
        }
    }

    fn add_b(&mut self, row: usize, col: usize, v: f64) {
        if row != CONSTRAINED && col != CONSTRAINED && v != 0.0 {
            self.b.push(Triplet::new(row, col, v));
        }
    }

    fn finish(self, n_infinite: usize) -> Result<Pencil, AssembleError> {
        let a = SparseColMat::try_new_from_triplets(self.n, self.n, &self.a)
            .map_err(|e| AssembleError::Matrix(format!("{e:?}")))?;
        let b = SparseColMat::try_new_from_triplets(self.n, self.n, &self.b)
            .map_err(|e| AssembleError::Matrix(format!("{e:?}")))?;
        Ok(Pencil {
            a,
            b,
            n_dofs: self.n,
            n_infinite,
        })
    }
}

/// Assembles the pencil for `method` on `mesh` with the given potential.
pub fn assemble(
    mesh: &Mesh,
    method: Method,
    v: &ElementPotential,
) -> Result<Pencil, AssembleError> {
    set_deterministic_parallelism();
    v.check_len(mesh)?;
    match method {
        Method::Cr => assemble_cr(mesh, v),
        Method::Ecr => assemble_ecr_family(mesh, v, false, false),
        Method::Mcr => assemble_ecr_family(mesh, v, true, false),
        Method::Rt => assemble_ecr_family(mesh, v, true, true),
        Method::Scr => assemble_scr(mesh, None, v),
        Method::S1 => assemble_s1(mesh, v),
    }
}

/// The extra-stabilised method for the diffusion operator
/// `−div(α∇u) + Vu` with elementwise-constant `α > 0`; the stabiliser
/// weight carries the factor `inf α`.
pub fn assemble_scr_diffusion(
    mesh: &Mesh,
    alpha: &[f64],
    v: &ElementPotential,
) -> Result<Pencil, AssembleError> {
    set_deterministic_parallelism();
    v.check_len(mesh)?;
    if alpha.len() != mesh.n_triangles() {
        return Err(AssembleError::DiffusionLength {
            got: alpha.len(),
            want: mesh.n_triangles(),
        });
    }
    if alpha.iter().any(|&a| !a.is_finite() || a <= 0.0) {
        return Err(AssembleError::BadDiffusion);
    }
    assemble_scr(mesh, Some(alpha), v)
}

fn assemble_cr(mesh: &Mesh, v: &ElementPotential) -> Result<Pencil, AssembleError> {
    let space = CrSpace::new(mesh);
    let psi = cr_basis();
    let mut acc = Accumulator::new(space.n_dofs, 9, mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let coords = mesh.triangle_coords(t);
        let area = mesh.tri_area(t);
        let g = bary_gradients(coords);
        let dofs = space.local_dofs(mesh, t);
        let vpoly = v.local_poly(mesh, t);
        for i in 0..3 {
            for j in i..3 {
                let mut a = psi[i].stiffness_with(&psi[j], &g, area);
                if let Some(ref vp) = vpoly {
                    a += psi[i].mul(&psi[j]).mul(vp).integral(area);
                }
                let b = psi[i].mass_with(&psi[j], area);
                acc.add_a(dofs[i], dofs[j], a);
                acc.add_b(dofs[i], dofs[j], b);
                if i != j {
                    acc.add_a(dofs[j], dofs[i], a);
                    acc.add_b(dofs[j], dofs[i], b);
                }
            }
        }
    }
    acc.finish(0)
}

fn assemble_ecr_family(
    mesh: &Mesh,
    v: &ElementPotential,
    project_potential: bool,
    project_rhs: bool,
) -> Result<Pencil, AssembleError> {
    let space = EcrSpace::new(mesh);
    let psi = cr_basis();
    let mut acc = Accumulator::new(space.n_dofs, 16, mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let coords = mesh.triangle_coords(t);
        let area = mesh.tri_area(t);
        let g = bary_gradients(coords);
        let dofs = space.local_dofs(mesh, t);
        let basis: [BaryPoly; 4] = [
            psi[0].clone(),
            psi[1].clone(),
            psi[2].clone(),
            bubble(coords),
        ];
        let means: [f64; 4] = core::array::from_fn(|i| basis[i].integral(area) / area);
        let vpoly = if project_potential {
            None
        } else {
            v.local_poly(mesh, t)
        };
        let vmean = if project_potential {
            v.triangle_mean(mesh, t)
        } else {
            0.0
        };
        for i in 0..4 {
            for j in i..4 {
                let mut a = basis[i].stiffness_with(&basis[j], &g, area);
                if let Some(ref vp) = vpoly {
                    a += basis[i].mul(&basis[j]).mul(vp).integral(area);
                }
                if project_potential {
                    a += vmean * area * means[i] * means[j];
                }
                let b = if project_rhs {
                    area * means[i] * means[j]
                } else {
                    basis[i].mass_with(&basis[j], area)
                };
                acc.add_a(dofs[i], dofs[j], a);
                acc.add_b(dofs[i], dofs[j], b);
                if i != j {
                    acc.add_a(dofs[j], dofs[i], a);
                    acc.add_b(dofs[j], dofs[i], b);
                }
            }
        }
    }
    let n_infinite = if project_rhs {
        space.n_dofs - mesh.n_triangles()
    } else {
        0
    };
    acc.finish(n_infinite)
}

fn assemble_scr(
    mesh: &Mesh,
    alpha: Option<&[f64]>,
    v: &ElementPotential,
) -> Result<Pencil, AssembleError> {
    let space = EsSpace::new(mesh);
    let psi = cr_basis();
    let hat = p1_basis();
    let alpha_min = alpha
        .map(|a| a.iter().copied().fold(f64::INFINITY, f64::min))
        .unwrap_or(1.0);
    let mut acc = Accumulator::new(space.n_dofs, 64, mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let coords = mesh.triangle_coords(t);
        let area = mesh.tri_area(t);
        let g = bary_gradients(coords);
        let h = mesh.tri_diameter(t);
        let w = alpha_min / (ENRICHED_INTERP_CONST * ENRICHED_INTERP_CONST * h * h);
        let diff = alpha.map(|a| a[t]).unwrap_or(1.0);
        let bub = bubble(coords);
        let pw: [BaryPoly; 4] = [hat[0].clone(), hat[1].clone(), hat[2].clone(), bub.clone()];
        let nc: [BaryPoly; 4] = [psi[0].clone(), psi[1].clone(), psi[2].clone(), bub];
        let pw_dofs = space.pw_local_dofs(t);
        let nc_dofs = space.nc_local_dofs(mesh, t);
        let nc_means: [f64; 4] = core::array::from_fn(|i| nc[i].integral(area) / area);
        let vmean = v.triangle_mean(mesh, t);
        // nc–nc block: diffusion stiffness + projected potential + stabiliser
        for i in 0..4 {
            for j in i..4 {
                let a = diff * nc[i].stiffness_with(&nc[j], &g, area)
                    + vmean * area * nc_means[i] * nc_means[j]
                    + w * nc[i].mass_with(&nc[j], area);
                acc.add_a(nc_dofs[i], nc_dofs[j], a);
                if i != j {
                    acc.add_a(nc_dofs[j], nc_dofs[i], a);
                }
            }
        }
        // pw–pw block: stabiliser on the left, the full mass on the right
        for i in 0..4 {
            for j in i..4 {
                let m = pw[i].mass_with(&pw[j], area);
                acc.add_a(pw_dofs[i], pw_dofs[j], w * m);
                acc.add_b(pw_dofs[i], pw_dofs[j], m);
                if i != j {
                    acc.add_a(pw_dofs[j], pw_dofs[i], w * m);
                    acc.add_b(pw_dofs[j], pw_dofs[i], m);
                }
            }
        }
        // pw–nc coupling from the stabiliser cross terms
        for i in 0..4 {
            for j in 0..4 {
                let m = pw[i].mass_with(&nc[j], area);
                acc.add_a(pw_dofs[i], nc_dofs[j], -w * m);
                acc.add_a(nc_dofs[j], pw_dofs[i], -w * m);
            }
        }
    }
    acc.finish(space.ecr.n_dofs)
}

fn assemble_s1(mesh: &Mesh, v: &ElementPotential) -> Result<Pencil, AssembleError> {
    let space = S1Space::new(mesh);
    let hat = p1_basis();
    let mut acc = Accumulator::new(space.n_dofs, 9, mesh.n_triangles());
    for t in 0..mesh.n_triangles() {
        let coords = mesh.triangle_coords(t);
        let area = mesh.tri_area(t);
        let g = bary_gradients(coords);
        let dofs = space.local_dofs(mesh, t);
        let vpoly = v.local_poly(mesh, t);
        for i in 0..3 {
            for j in i..3 {
                let mut a = hat[i].stiffness_with(&hat[j], &g, area);
                if let Some(ref vp) = vpoly {
                    a += hat[i].mul(&hat[j]).mul(vp).integral(area);
                }
                let b = hat[i].mass_with(&hat[j], area);
                acc.add_a(dofs[i], dofs[j], a);
                acc.add_b(dofs[i], dofs[j], b);
                if i != j {
                    acc.add_a(dofs[j], dofs[i], a);
                    acc.add_b(dofs[j], dofs[i], b);
                }
            }
        }
    }
    acc.finish(0)
}

/// Serialises a sparse matrix as deterministic coordinate text: a header
/// `rows cols nnz`, then one `row col value` line per stored entry in
/// column-major order, with 17 significant digits (round-trip exact).
pub fn coo_text(m: &SparseColMat<usize, f64>) -> String {
    let ncols = m.ncols();
    let mut nnz = 0usize;
    for j in 0..ncols {
        nnz += m.row_idx_of_col(j).count();
    }
    let mut out = String::with_capacity(32 + nnz * 32);
    out.push_str(&format!("{} {} {}\n", m.nrows(), ncols, nnz));
    for j in 0..ncols {
        for (i, v) in m.row_idx_of_col(j).zip(m.val_of_col(j)) {
            out.push_str(&format!("{} {} {:.16e}\n", i, j, v));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_square_mesh, build_unit_square_mesh};
    use crate::quadrature::TriangleRule;

    fn dense_of(m: &SparseColMat<usize, f64>) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; m.ncols()]; m.nrows()];
        for j in 0..m.ncols() {
            for (i, v) in m.row_idx_of_col(j).zip(m.val_of_col(j)) {
                d[i][j] += *v;
            }
        }
        d
    }

    fn assert_symmetric(m: &SparseColMat<usize, f64>) {
        let d = dense_of(m);
        let n = d.len();
        for i in 0..n {
            for j in 0..n {
                assert!(
                    (d[i][j] - d[j][i]).abs() <= 1e-12 * d[i][j].abs().max(1.0),
                    "asymmetry at ({i},{j}): {} vs {}",
                    d[i][j],
                    d[j][i]
                );
            }
        }
    }

    #[test]
    fn one_dof_laplacian_on_unit_square() {
        // Single interior edge (the diagonal): A = 8, B = 1/3, λ = 24.
        let mesh = build_unit_square_mesh(1);
        let p = assemble(&mesh, Method::Cr, &ElementPotential::Zero).unwrap();
        assert_eq!(p.n_dofs, 1);
        let a = dense_of(&p.a);
        let b = dense_of(&p.b);
        assert!((a[0][0] - 8.0).abs() < 1e-13);
        assert!((b[0][0] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.n_infinite, 0);
    }

    #[test]
    fn all_methods_produce_symmetric_pencils() {
        let mesh = build_square_mesh(8.0, 2);
        let pi0 = crate::potential::Potential::Harmonic
            .pi0_project(&mesh)
            .unwrap();
        for m in Method::ALL {
            let v = if m.projects_potential() {
                ElementPotential::Constants(&pi0)
            } else {
                ElementPotential::Harmonic
            };
            let p = assemble(&mesh, m, &v).unwrap();
            assert_symmetric(&p.a);
            assert_symmetric(&p.b);
        }
    }

    #[test]
    fn potential_entries_match_quadrature() {
        // independent check of the exact polynomial integration against a
        // high-order quadrature on an irregular mesh
        let text = "4 2\n-1.5 -0.25 1\n2 -0.5 1\n1.75 2 1\n-0.75 1.5 1\n0 1 2 0\n0 2 3 1\n";
        let mesh = crate::mesh::Mesh::parse_text(text).unwrap();
        let p = assemble(&mesh, Method::Cr, &ElementPotential::Harmonic).unwrap();
        assert_eq!(p.n_dofs, 1); // only the shared edge is interior
        let rule = TriangleRule::with_degree(12);
        let psi = cr_basis();
        let mut a_quad = 0.0;
        for t in 0..2 {
            let coords = mesh.triangle_coords(t);
            let area = mesh.tri_area(t);
            let g = crate::bary::bary_gradients(coords);
            // local index of the shared edge's function
            let dofs = CrSpace::new(&mesh).local_dofs(&mesh, t);
            let li = (0..3).find(|&i| dofs[i] != CONSTRAINED).unwrap();
            a_quad += psi[li].stiffness_with(&psi[li], &g, area);
            a_quad += area
                * rule.mean(coords, |x| {
                    let l = bary_at(coords, x);
                    let v = 0.5 * (x[0] * x[0] + x[1] * x[1]);
                    let s = psi[li].eval(l);
                    v * s * s
                });
        }
        let a = dense_of(&p.a)[0][0];
        assert!(
            (a - a_quad).abs() < 1e-12 * a.abs(),
            "assembled {a} vs quadrature {a_quad}"
        );
    }

    fn bary_at(coords: [[f64; 2]; 3], x: [f64; 2]) -> [f64; 3] {
        let g = crate::bary::bary_gradients(coords);
        let l1 = g[1][0] * (x[0] - coords[0][0]) + g[1][1] * (x[1] - coords[0][1]);
        let l2 = g[2][0] * (x[0] - coords[0][0]) + g[2][1] * (x[1] - coords[0][1]);
        [1.0 - l1 - l2, l1, l2]
    }

    #[test]
    fn projected_methods_share_the_left_side() {
        let mesh = build_square_mesh(8.0, 2);
        let pi0 = crate::potential::Potential::Harmonic
            .pi0_project(&mesh)
            .unwrap();
        let v = ElementPotential::Constants(&pi0);
        let mcr = assemble(&mesh, Method::Mcr, &v).unwrap();
        let rt = assemble(&mesh, Method::Rt, &v).unwrap();
        let am = dense_of(&mcr.a);
        let ar = dense_of(&rt.a);
        for i in 0..mcr.n_dofs {
            for j in 0..mcr.n_dofs {
                assert!((am[i][j] - ar[i][j]).abs() < 1e-12 * am[i][j].abs().max(1.0));
            }
        }
        // with V = 0 the projected and unprojected left sides coincide
        let e0 = assemble(&mesh, Method::Ecr, &ElementPotential::Zero).unwrap();
        let m0 = assemble(&mesh, Method::Mcr, &ElementPotential::Zero).unwrap();
        let de = dense_of(&e0.a);
        let dm = dense_of(&m0.a);
        for i in 0..e0.n_dofs {
            for j in 0..e0.n_dofs {
                assert!((de[i][j] - dm[i][j]).abs() < 1e-12 * de[i][j].abs().max(1.0));
            }
        }
    }

    #[test]
    fn infinite_eigenvalue_counts_follow_rank_structure() {
        let mesh = build_square_mesh(8.0, 2);
        let v = ElementPotential::Zero;
        let nt = mesh.n_triangles();
        assert_eq!(assemble(&mesh, Method::Cr, &v).unwrap().n_infinite, 0);
        assert_eq!(assemble(&mesh, Method::Ecr, &v).unwrap().n_infinite, 0);
        assert_eq!(assemble(&mesh, Method::Mcr, &v).unwrap().n_infinite, 0);
        let rt = assemble(&mesh, Method::Rt, &v).unwrap();
        assert_eq!(rt.n_infinite, rt.n_dofs - nt);
        let scr = assemble(&mesh, Method::Scr, &v).unwrap();
        assert_eq!(scr.n_infinite, scr.n_dofs - 4 * nt);
    }

    #[test]
    fn scr_right_side_touches_only_discontinuous_dofs() {
        let mesh = build_square_mesh(8.0, 2);
        let p = assemble(&mesh, Method::Scr, &ElementPotential::Zero).unwrap();
        let n_pw = 4 * mesh.n_triangles();
        let b = dense_of(&p.b);
        for i in 0..p.n_dofs {
            for j in 0..p.n_dofs {
                if (i >= n_pw || j >= n_pw) && b[i][j] != 0.0 {
                    panic!("right side couples nonconforming dof ({i},{j})");
                }
            }
        }
        assert_symmetric(&p.a);
    }

    #[test]
    fn scr_diffusion_scales_stabiliser_with_infimum() {
        let mesh = build_square_mesh(1.0, 1);
        let alpha = vec![2.0; mesh.n_triangles()];
        let base = assemble(&mesh, Method::Scr, &ElementPotential::Zero).unwrap();
        let scaled = assemble_scr_diffusion(&mesh, &alpha, &ElementPotential::Zero).unwrap();
        // uniform α = 2 doubles the whole left side (stiffness and the
        // stabiliser weight carry the same factor); the right side is equal
        let db = dense_of(&base.a);
        let ds = dense_of(&scaled.a);
        for i in 0..base.n_dofs {
            for j in 0..base.n_dofs {
                assert!(
                    (ds[i][j] - 2.0 * db[i][j]).abs() < 1e-12 * db[i][j].abs().max(1.0),
                    "({i},{j}): {} vs 2·{}",
                    ds[i][j],
                    db[i][j]
                );
            }
        }
        assert!(assemble_scr_diffusion(&mesh, &[1.0], &ElementPotential::Zero).is_err());
        assert!(
            assemble_scr_diffusion(&mesh, &vec![0.0; mesh.n_triangles()], &ElementPotential::Zero)
                .is_err()
        );
    }

    #[test]
    fn coo_text_roundtrips() {
        let mesh = build_unit_square_mesh(2);
        let p = assemble(&mesh, Method::Cr, &ElementPotential::Zero).unwrap();
        let text = coo_text(&p.a);
        let mut lines = text.lines();
        let header: Vec<usize> = lines
            .next()
            .unwrap()
            .split_whitespace()
            .map(|t| t.parse().unwrap())
            .collect();
        assert_eq!(header[0], p.n_dofs);
        assert_eq!(header[1], p.n_dofs);
        let mut entries = Vec::new();
        for line in lines {
            let t: Vec<&str> = line.split_whitespace().collect();
            entries.push((
                t[0].parse::<usize>().unwrap(),
                t[1].parse::<usize>().unwrap(),
                t[2].parse::<f64>().unwrap(),
            ));
        }
        assert_eq!(entries.len(), header[2]);
        let d = dense_of(&p.a);
        let mut rebuilt = vec![vec![0.0; p.n_dofs]; p.n_dofs];
        for (i, j, v) in entries {
            rebuilt[i][j] = v;
        }
        for i in 0..p.n_dofs {
            for j in 0..p.n_dofs {
                assert_eq!(d[i][j], rebuilt[i][j], "({i},{j})");
            }
        }
    }
}
