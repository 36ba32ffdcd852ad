//! Exact polynomial algebra in barycentric coordinates.
//!
//! Every local shape function used by the discretisations (hat functions,
//! their nonconforming counterparts, the quadratic bubble) is a polynomial
//! in the barycentric coordinates `(λ₁, λ₂, λ₃)` of the triangle.  Keeping
//! them symbolic makes every local matrix entry a closed-form integral:
//!
//! ```text
//! ∫_T λ₁^a λ₂^b λ₂^c dx = 2|T| · a! b! c! / (a + b + c + 2)!
//! ```
//!
//! so the assembly needs no quadrature at all and is exact to rounding.
//!
//! Gradients use the chain rule with the constant barycentric gradients
//! `∇λᵢ`, which [`bary_gradients`] computes from the vertex coordinates.

/// Polynomial in the three barycentric coordinates, stored as a sorted,
/// combined list of monomials `(exponents, coefficient)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BaryPoly {
    terms: Vec<([u8; 3], f64)>,
}

impl BaryPoly {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms(vec![([0, 0, 0], c)])
    }

    /// The barycentric coordinate `λᵢ` (`i ∈ {0, 1, 2}`).
    pub fn lambda(i: usize) -> Self {
        let mut e = [0u8; 3];
        e[i] = 1;
        Self::from_terms(vec![(e, 1.0)])
    }

    pub fn from_terms(terms: Vec<([u8; 3], f64)>) -> Self {
        let mut p = Self { terms };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        self.terms.sort_by_key(|&(e, _)| e);
        let mut out: Vec<([u8; 3], f64)> = Vec::with_capacity(self.terms.len());
        for &(e, c) in &self.terms {
            match out.last_mut() {
                Some((le, lc)) if *le == e => *lc += c,
                _ => out.push((e, c)),
            }
        }
        out.retain(|&(_, c)| c != 0.0);
        self.terms = out;
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        Self::from_terms(terms)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_terms(self.terms.iter().map(|&(e, c)| (e, c * s)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for &(ea, ca) in &self.terms {
            for &(eb, cb) in &other.terms {
                terms.push(([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], ca * cb));
            }
        }
        Self::from_terms(terms)
    }

    pub fn eval(&self, l: [f64; 3]) -> f64 {
        self.terms
            .iter()
            .map(|&(e, c)| {
                c * l[0].powi(e[0] as i32) * l[1].powi(e[1] as i32) * l[2].powi(e[2] as i32)
            })
            .sum()
    }

    /// Exact integral over a triangle of the given area.
    pub fn integral(&self, area: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(e, c)| {
                c * 2.0 * area * factorial(e[0]) * factorial(e[1]) * factorial(e[2])
                    / factorial(e[0] + e[1] + e[2] + 2)
            })
            .sum()
    }

    /// Exact mean over the edge opposite vertex `opp`, where `λ_opp = 0`
    /// and the other two coordinates trace out `(s, 1−s)`:
    /// `∫₀¹ s^a (1−s)^b ds = a! b! / (a+b+1)!`.
    pub fn edge_mean(&self, opp: usize) -> f64 {
        let j = (opp + 1) % 3;
        let k = (opp + 2) % 3;
        self.terms
            .iter()
            .filter(|&&(e, _)| e[opp] == 0)
            .map(|&(e, c)| c * factorial(e[j]) * factorial(e[k]) / factorial(e[j] + e[k] + 1))
            .sum()
    }

    /// Formal partial derivative `∂/∂λᵢ` (the three coordinates treated as
    /// independent; combined with the constant `∇λᵢ` this yields the true
    /// spatial gradient on the triangle).
    pub fn partial(&self, i: usize) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|&&(e, _)| e[i] > 0)
                .map(|&(e, c)| {
                    let mut d = e;
                    d[i] -= 1;
                    (d, c * e[i] as f64)
                })
                .collect(),
        )
    }

    /// Spatial gradient as a pair of barycentric polynomials, given the
    /// constant gradients `g[i] = ∇λᵢ` of the triangle.
    pub fn gradient(&self, g: &[[f64; 2]; 3]) -> [BaryPoly; 2] {
        let mut gx = BaryPoly::zero();
        let mut gy = BaryPoly::zero();
        for i in 0..3 {
            let d = self.partial(i);
            gx = gx.add(&d.scale(g[i][0]));
            gy = gy.add(&d.scale(g[i][1]));
        }
        [gx, gy]
    }

    /// `∫_T ∇self · ∇other dx` for the triangle with barycentric gradients
    /// `g` and the given area.
    pub fn stiffness_with(&self, other: &Self, g: &[[f64; 2]; 3], area: f64) -> f64 {
        let a = self.gradient(g);
        let b = other.gradient(g);
        a[0].mul(&b[0]).add(&a[1].mul(&b[1])).integral(area)
    }

    /// `∫_T self · other dx`.
    pub fn mass_with(&self, other: &Self, area: f64) -> f64 {
        self.mul(other).integral(area)
    }
}

fn factorial(n: u8) -> f64 {
    let mut f = 1.0;
    for k in 2..=n as u64 {
        f *= k as f64;
    }
    f
}

/// Constant gradients `∇λᵢ` of the barycentric coordinates of the CCW
/// triangle with the given vertex coordinates.
pub fn bary_gradients(coords: [[f64; 2]; 3]) -> [[f64; 2]; 3] {
    let area2 = (coords[1][0] - coords[0][0]) * (coords[2][1] - coords[0][1])
        - (coords[2][0] - coords[0][0]) * (coords[1][1] - coords[0][1]);
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let p = coords[(i + 1) % 3];
        let q = coords[(i + 2) % 3];
        // rotate (p − q) by −90°: (x, y) ↦ (y, −x)
        g[i] = [(p[1] - q[1]) / area2, (q[0] - p[0]) / area2];
    }
    g
}
