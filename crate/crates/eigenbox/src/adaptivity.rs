//! Residual error estimation and Dörfler marking for adaptive refinement.
//!
//! The estimator takes a midpoint (Crouzeix–Raviart) eigenpair `(λ, u)` and
//! charges each triangle with
//!
//! ```text
//! η²(T) = |T| · ‖(λ − V) u‖²_{L²(T)}
//!       + |T|^{1/2} · Σ_{F ⊂ ∂T} |F| · [∂u/∂τ]²_F
//! ```
//!
//! where `[∂u/∂τ]_F` is the jump of the tangential derivative across the
//! edge `F` (the normal component of the rotated gradient jump).  Since `u`
//! is affine per triangle the jump is a single number per edge; on boundary
//! edges the exact solution has zero tangential derivative, so the trace's
//! own tangential slope counts as the jump unless boundary edges are
//! explicitly excluded.  Both terms are integrated exactly.
//!
//! Marking selects a minimal set of triangles carrying at least a `θ`
//! fraction of the total estimated error (largest contributions first),
//! which steers newest-vertex bisection towards corners and localisation
//! regions.

use crate::assembly::ElementPotential;
use crate::bary::{bary_gradients, BaryPoly};
use crate::mesh::Mesh;
use crate::spaces::{cr_basis, CrSpace, CONSTRAINED};

/// Squared error indicators `η²(T)`, one per triangle, for the midpoint
/// eigenpair `(lambda, u)`.  With `include_boundary` the tangential slope of
/// the trace on boundary edges enters the jump term (the homogeneous
/// Dirichlet condition makes it a genuine residual); without, only interior
/// jumps count.
pub fn estimate(
    mesh: &Mesh,
    potential: &ElementPotential,
    lambda: f64,
    cr: &CrSpace,
    u: &[f64],
    include_boundary: bool,
) -> Vec<f64> {
    let n = mesh.n_triangles();
    let psi = cr_basis();

    // constant gradient of u on each triangle
    let mut grad = vec![[0.0; 2]; n];
    for (t, g_u) in grad.iter_mut().enumerate() {
        let g = bary_gradients(mesh.triangle_coords(t));
        let dofs = cr.local_dofs(mesh, t);
        for i in 0..3 {
            if dofs[i] != CONSTRAINED {
                let c = u[dofs[i]];
                // ∇ψᵢ = −2 ∇λᵢ
                g_u[0] -= 2.0 * c * g[i][0];
                g_u[1] -= 2.0 * c * g[i][1];
            }
        }
    }

    // edge jump contributions, accumulated onto both adjacent triangles
    let mut jump_sum = vec![0.0; n];
    for e in 0..mesh.n_edges() {
        let edge = mesh.edge(e);
        let p = mesh.vertex(edge.vertices[0]);
        let q = mesh.vertex(edge.vertices[1]);
        let len = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
        let tau = [(q[0] - p[0]) / len, (q[1] - p[1]) / len];
        let t0 = edge.triangles[0];
        let jump = if edge.is_boundary() {
            if !include_boundary {
                continue;
            }
            grad[t0][0] * tau[0] + grad[t0][1] * tau[1]
        } else {
            let t1 = edge.triangles[1];
            (grad[t0][0] - grad[t1][0]) * tau[0] + (grad[t0][1] - grad[t1][1]) * tau[1]
        };
        let contribution = len * jump * jump;
        jump_sum[t0] += contribution;
        if !edge.is_boundary() {
            jump_sum[edge.triangles[1]] += contribution;
        }
    }

    // volume residuals, exactly integrated: ((λ − V) u)² is a polynomial
    let mut eta = vec![0.0; n];
    for (t, eta_t) in eta.iter_mut().enumerate() {
        let area = mesh.tri_area(t);
        let dofs = cr.local_dofs(mesh, t);
        let mut u_poly = BaryPoly::zero();
        for i in 0..3 {
            if dofs[i] != CONSTRAINED {
                u_poly = u_poly.add(&psi[i].scale(u[dofs[i]]));
            }
        }
        let mut factor = BaryPoly::constant(lambda);
        if let Some(v) = potential.local_poly(mesh, t) {
            factor = factor.sub(&v);
        }
        let residual = factor.mul(&u_poly);
        let volume = residual.mul(&residual).integral(area);
        *eta_t = area * volume + area.sqrt() * jump_sum[t];
    }
    eta
}

/// Minimal Dörfler set: indices of the largest indicators whose sum first
/// reaches `theta` times the total (ties broken by index).  `theta = 1`
/// marks everything; a zero total marks nothing.
pub fn doerfler_mark(eta_sq: &[f64], theta: f64) -> Vec<usize> {
    assert!(
        theta > 0.0 && theta <= 1.0,
        "marking fraction must lie in (0, 1], got {theta}"
    );
    if theta == 1.0 {
        return (0..eta_sq.len()).collect();
    }
    let total: f64 = eta_sq.iter().sum();
    if total <= 0.0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..eta_sq.len()).collect();
    order.sort_by(|&a, &b| {
        eta_sq[b]
            .partial_cmp(&eta_sq[a])
            .expect("indicators must not be NaN")
            .then(a.cmp(&b))
    });
    let goal = theta * total;
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for &t in &order {
        marked.push(t);
        acc += eta_sq[t];
        if acc >= goal {
            break;
        }
    }
    marked.sort_unstable();
    marked
}
