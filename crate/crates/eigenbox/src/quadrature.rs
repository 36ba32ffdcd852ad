//! Quadrature rules on triangles and edges with certified exactness degree.
//!
//! The triangle rule is a conical-product (Duffy) rule built from
//! Gauss–Legendre points, so its exactness degree is a theorem about the 1D
//! rule rather than a table lookup.  Points are stored in barycentric
//! coordinates and weights are normalised to sum to one, i.e. the rule
//! computes the *mean* of the integrand over the triangle; multiply by the
//! area to integrate.

use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[0, 1]`.
///
/// Weights sum to one (the rule computes means); exact for polynomials of
/// degree `2n - 1`.  Nodes are found by Newton iteration on the Legendre
/// recurrence, which is stable and accurate to machine precision for the
/// small `n` used here.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess for the i-th root of P_n on (-1, 1).
        let mut x: f64 = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and P_{n-1}(x) by the three-term recurrence.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = (n as f64) * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        // map (-1,1) -> (0,1); roots come in descending x, i.e. ascending here
        nodes[i] = 0.5 * (1.0 - x);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Quadrature rule on a triangle, stored in barycentric coordinates.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    /// Barycentric coordinates `(λ0, λ1, λ2)` of each point, each summing to 1.
    pub points: Vec<[f64; 3]>,
    /// Positive weights summing to 1 (mean-value normalisation).
    pub weights: Vec<f64>,
    /// Every polynomial of total degree `≤ degree` is integrated exactly.
    pub degree: usize,
}

impl TriangleRule {
    /// Conical-product rule exact for polynomials of total degree `degree`.
    pub fn with_degree(degree: usize) -> Self {
        // Duffy substitution x = u, y = v(1-u) on the reference triangle:
        // the u-integrand carries an extra factor (1-u), hence degree+1.
        let nu = (degree + 3) / 2; // 2*nu - 1 >= degree + 1
        let nv = (degree + 2) / 2; // 2*nv - 1 >= degree
        let (un, uw) = gauss_legendre_unit(nu);
        let (vn, vw) = gauss_legendre_unit(nv);
        let mut points = Vec::with_capacity(nu * nv);
        let mut weights = Vec::with_capacity(nu * nv);
        for i in 0..nu {
            for j in 0..nv {
                let x = un[i];
                let y = vn[j] * (1.0 - un[i]);
                points.push([1.0 - x - y, x, y]);
                // (1-u) Jacobian; factor 2 renormalises by the reference area 1/2.
                weights.push(2.0 * uw[i] * vw[j] * (1.0 - un[i]));
            }
        }
        Self {
            points,
            weights,
            degree,
        }
    }

    /// The default degree-10 rule used for potential terms.
    pub fn standard() -> &'static TriangleRule {
        static RULE: OnceLock<TriangleRule> = OnceLock::new();
        RULE.get_or_init(|| TriangleRule::with_degree(10))
    }

    /// Mean of `f` over the triangle with the given vertices.
    pub fn mean(&self, v: [[f64; 2]; 3], f: impl FnMut([f64; 2]) -> f64) -> f64 {
        let mut f = f;
        let mut acc = 0.0;
        for (p, w) in self.points.iter().zip(&self.weights) {
            let x = [
                p[0] * v[0][0] + p[1] * v[1][0] + p[2] * v[2][0],
                p[0] * v[0][1] + p[1] * v[1][1] + p[2] * v[2][1],
            ];
            acc += w * f(x);
        }
        acc
    }

    /// Integral of `f` over the triangle with the given vertices.
    pub fn integrate(&self, v: [[f64; 2]; 3], f: impl FnMut([f64; 2]) -> f64) -> f64 {
        let area = 0.5
            * ((v[1][0] - v[0][0]) * (v[2][1] - v[0][1])
                - (v[1][1] - v[0][1]) * (v[2][0] - v[0][0]))
                .abs();
        area * self.mean(v, f)
    }
}

/// Quadrature rule on the unit interval, used for edge means.
#[derive(Clone, Debug)]
pub struct EdgeRule {
    /// Points in `(0, 1)`.
    pub points: Vec<f64>,
    /// Positive weights summing to 1.
    pub weights: Vec<f64>,
    /// Exactness degree.
    pub degree: usize,
}

impl EdgeRule {
    pub fn with_degree(degree: usize) -> Self {
        let n = degree / 2 + 1; // 2n - 1 >= degree
        let (points, weights) = gauss_legendre_unit(n);
        Self {
            points,
            weights,
            degree,
        }
    }

    /// The default degree-11 rule used for edge means of interpolants.
    pub fn standard() -> &'static EdgeRule {
        static RULE: OnceLock<EdgeRule> = OnceLock::new();
        RULE.get_or_init(|| EdgeRule::with_degree(11))
    }

    /// Mean of `f` along the segment from `a` to `b`.
    pub fn mean(&self, a: [f64; 2], b: [f64; 2], f: impl FnMut([f64; 2]) -> f64) -> f64 {
        let mut f = f;
        let mut acc = 0.0;
        for (t, w) in self.points.iter().zip(&self.weights) {
            let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            acc += w * f(x);
        }
        acc
    }
}
