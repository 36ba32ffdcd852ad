//! Guaranteed two-sided eigenvalue bounds for the 2D Schrödinger operator
//! `-Δu + Vu = λu` with homogeneous Dirichlet boundary conditions on
//! triangulated polygonal domains, `V ≥ 0` in `L^∞`.
//!
//! The toolkit discretises the eigenvalue problem with a family of
//! Crouzeix–Raviart-type nonconforming finite elements (plain,
//! bubble-enriched, projected, and extra-stabilised variants), turns the
//! discrete eigenvalues into *guaranteed lower bounds* (GLB) through explicit
//! post-processing formulas with known interpolation constants, and produces
//! *guaranteed upper bounds* (GUB) by averaging discrete eigenfunctions into
//! conforming finite element spaces and solving a small dense Rayleigh–Ritz
//! problem.  An adaptive loop driven by a residual-type error estimator
//! recovers optimal rates for eigenfunctions with corner singularities or
//! strong localisation (Anderson-type random potentials).
//!
//! Modules, bottom up:
//!
//! * [`bary`] — polynomials in barycentric coordinates with exact
//!   integration over triangles and edges.
//! * [`mesh`] — conforming triangulations, uniform (red) and
//!   newest-vertex-bisection refinement, plain-text serialisation.
//! * [`quadrature`] — exact-degree triangle and edge rules.
//! * [`potential`] — the potential zoo, elementwise suprema and piecewise
//!   constant projections.
//! * [`spaces`] — degree-of-freedom layouts, local bases (including the
//!   normalised quadratic bubble), interpolation and averaging operators.
//! * [`assembly`] — sparse stiffness/mass pairs for every discretisation.
//! * [`eigensolve`] — generalized symmetric eigensolver (dense
//!   Cholesky-congruence path and a blocked Krylov path for large systems).
//! * [`bounds`] — the guaranteed lower-bound formulas and their mesh
//!   parameters.
//! * [`gub`] — averaging-based guaranteed upper bounds.
//! * [`adaptivity`] — error estimator, Dörfler marking, adaptive loop.
//! * [`driver`] — benchmark configurations, CSV reporting, Aitken
//!   extrapolation; backs the `eigenbox` command-line interface.

pub mod adaptivity;
pub mod assembly;
pub mod bary;
pub mod bounds;
pub mod driver;
pub mod eigensolve;
pub mod gub;
pub mod mesh;
pub mod potential;
pub mod quadrature;
pub mod rng;
pub mod spaces;
