//! Potentials `V ≥ 0` of the Schrödinger operator and the two per-triangle
//! reductions the bounds need: the piecewise-constant `L²` projection `Π₀V`
//! and a certified elementwise upper bound for `ess sup_T V`.
//!
//! Built-in potentials:
//!
//! * **zero** — the pure Laplacian;
//! * **harmonic** — `|x|²/2`, smooth and convex;
//! * **lattice** — `(|x|²/2 − 16)₊ + ⌊30 + 10 sin(πx₁/2) sin(πx₂/2)⌋`,
//!   a bounded periodic trap lattice;
//! * **anderson** — piecewise constant on the 8×8 grid of `(0,1)²` with
//!   i.i.d. uniform integer values from `{0, …, 9999}`, shifted so the
//!   minimum is zero (the shift only translates the spectrum);
//! * **piecewise constant** — arbitrary per-triangle values tied to a mesh,
//!   e.g. loaded from a value file or produced by `Π₀`.

use std::fmt;

use thiserror::Error;

use crate::mesh::Mesh;
use crate::quadrature::TriangleRule;
use crate::rng::SplitMix64;

/// Side length of the Anderson grid on `(0,1)²`.
pub const ANDERSON_GRID: usize = 8;
/// Exclusive upper bound of the raw Anderson cell values.
pub const ANDERSON_VALUE_RANGE: u64 = 10_000;

/// A random piecewise-constant potential on the 8×8 grid of the unit square.
#[derive(Clone, Debug, PartialEq)]
pub struct AndersonField {
    /// Cell values in row-major order (`cell(i, j) = values[j * 8 + i]`,
    /// `i` along x), shifted so the minimum is exactly zero.
    values: Vec<f64>,
    seed: u64,
}

impl AndersonField {
    /// Samples the 64 cell values from the SplitMix64 stream for `seed`
    /// (row-major draw order, unbiased rejection sampling) and subtracts the
    /// minimum so `ess inf V = 0`.
    pub fn new(seed: u64) -> Self {
        let mut rng = SplitMix64::new(seed);
        let mut values: Vec<f64> = (0..ANDERSON_GRID * ANDERSON_GRID)
            .map(|_| rng.uniform_below(ANDERSON_VALUE_RANGE) as f64)
            .collect();
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        for v in &mut values {
            *v -= min;
        }
        Self { values, seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cell_value(&self, i: usize, j: usize) -> f64 {
        self.values[j * ANDERSON_GRID + i]
    }

    /// Value at a point of `(0,1)²` (cells are closed below, open above).
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let n = ANDERSON_GRID as f64;
        let i = ((x[0] * n).floor() as isize).clamp(0, ANDERSON_GRID as isize - 1) as usize;
        let j = ((x[1] * n).floor() as isize).clamp(0, ANDERSON_GRID as isize - 1) as usize;
        self.cell_value(i, j)
    }
}

/// A potential `V ≥ 0` on the computational domain.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    /// `V = 0`.
    Zero,
    /// `V(x) = |x|²/2`.
    Harmonic,
    /// `V(x) = (|x|²/2 − 16)₊ + ⌊30 + 10 sin(πx₁/2) sin(πx₂/2)⌋`.
    Lattice,
    /// Random checkerboard on the unit square.
    Anderson(AndersonField),
    /// One value per triangle of a specific mesh (same ordering).
    PiecewiseConstant(Vec<f64>),
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Zero => write!(f, "zero"),
            Potential::Harmonic => write!(f, "harmonic"),
            Potential::Lattice => write!(f, "lattice"),
            Potential::Anderson(a) => write!(f, "anderson(seed={})", a.seed),
            Potential::PiecewiseConstant(_) => write!(f, "piecewise-constant"),
        }
    }
}

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("piecewise-constant potential has {got} values but the mesh has {want} triangles")]
    LengthMismatch { got: usize, want: usize },
    #[error("potential values must be finite and non-negative (line {line}: {value})")]
    BadValue { line: usize, value: String },
    #[error("line {line}: expected one value per line")]
    TrailingTokens { line: usize },
    #[error("value file is empty")]
    Empty,
    #[error("piecewise-constant potentials have no pointwise evaluation; use per-triangle values")]
    NoPointwiseEval,
}

impl Potential {
    pub fn anderson(seed: u64) -> Self {
        Potential::Anderson(AndersonField::new(seed))
    }

    /// True if the potential is piecewise constant on every mesh triangle,
    /// which the projected discretisations require.
    pub fn is_piecewise_constant(&self) -> bool {
        matches!(self, Potential::Zero | Potential::PiecewiseConstant(_))
    }

    /// Pointwise value; defined for all kinds except per-triangle tables.
    pub fn eval(&self, x: [f64; 2]) -> Result<f64, PotentialError> {
        match self {
            Potential::Zero => Ok(0.0),
            Potential::Harmonic => Ok(harmonic(x)),
            Potential::Lattice => Ok(lattice(x)),
            Potential::Anderson(a) => Ok(a.eval(x)),
            Potential::PiecewiseConstant(_) => Err(PotentialError::NoPointwiseEval),
        }
    }

    /// The piecewise-constant `L²` projection `Π₀V`: the mean of `V` over
    /// each triangle.  Exact for the zero, harmonic (edge-midpoint rule),
    /// Anderson (cell-overlap areas), and per-triangle kinds; the lattice
    /// mean uses the degree-10 rule, whose error on the discontinuous floor
    /// term is accepted and documented.
    pub fn pi0_project(&self, mesh: &Mesh) -> Result<Vec<f64>, PotentialError> {
        let nt = mesh.n_triangles();
        match self {
            Potential::Zero => Ok(vec![0.0; nt]),
            Potential::Harmonic => Ok((0..nt)
                .map(|t| {
                    let e = mesh.triangle_edges(t);
                    let s: f64 = e
                        .iter()
                        .map(|&id| {
                            let m = mesh.edge_midpoint(id);
                            m[0] * m[0] + m[1] * m[1]
                        })
                        .sum();
                    s / 6.0
                })
                .collect()),
            Potential::Lattice => {
                let rule = TriangleRule::standard();
                Ok((0..nt)
                    .map(|t| rule.mean(mesh.triangle_coords(t), lattice))
                    .collect())
            }
            Potential::Anderson(a) => Ok((0..nt)
                .map(|t| {
                    let coords = mesh.triangle_coords(t);
                    let area = mesh.tri_area(t);
                    let mut acc = 0.0;
                    for (i, j, overlap) in cell_overlaps(coords) {
                        acc += a.cell_value(i, j) * overlap;
                    }
                    acc / area
                })
                .collect()),
            Potential::PiecewiseConstant(values) => {
                if values.len() != nt {
                    return Err(PotentialError::LengthMismatch {
                        got: values.len(),
                        want: nt,
                    });
                }
                Ok(values.clone())
            }
        }
    }

    /// A certified upper bound of `ess sup_T V` for every triangle:
    ///
    /// * zero / per-triangle: exact;
    /// * harmonic: exact (convex, so the maximum sits at a vertex);
    /// * lattice: vertex maximum of the convex smooth part plus the floor
    ///   term maximised over the bounding box (factorised sine ranges), an
    ///   upper bound that is exact once triangles resolve the lattice cells;
    /// * anderson: maximum cell value over all cells overlapping the
    ///   triangle with positive area (zero-measure contact cannot raise the
    ///   essential supremum).
    pub fn elementwise_sup(&self, mesh: &Mesh) -> Result<Vec<f64>, PotentialError> {
        let nt = mesh.n_triangles();
        match self {
            Potential::Zero => Ok(vec![0.0; nt]),
            Potential::Harmonic => Ok((0..nt)
                .map(|t| {
                    mesh.triangle_coords(t)
                        .iter()
                        .map(|&p| harmonic(p))
                        .fold(0.0, f64::max)
                })
                .collect()),
            Potential::Lattice => Ok((0..nt)
                .map(|t| {
                    let coords = mesh.triangle_coords(t);
                    let smooth = coords
                        .iter()
                        .map(|&p| (0.5 * (p[0] * p[0] + p[1] * p[1]) - 16.0).max(0.0))
                        .fold(0.0, f64::max);
                    let (x0, x1) = axis_range(coords.map(|p| p[0]));
                    let (y0, y1) = axis_range(coords.map(|p| p[1]));
                    let sx = half_sine_range(x0, x1);
                    let sy = half_sine_range(y0, y1);
                    let smax = [sx.0 * sy.0, sx.0 * sy.1, sx.1 * sy.0, sx.1 * sy.1]
                        .into_iter()
                        .fold(f64::NEG_INFINITY, f64::max);
                    smooth + (30.0 + 10.0 * smax).floor()
                })
                .collect()),
            Potential::Anderson(a) => Ok((0..nt)
                .map(|t| {
                    let coords = mesh.triangle_coords(t);
                    cell_overlaps(coords)
                        .into_iter()
                        .map(|(i, j, _)| a.cell_value(i, j))
                        .fold(0.0, f64::max)
                })
                .collect()),
            Potential::PiecewiseConstant(values) => {
                if values.len() != nt {
                    return Err(PotentialError::LengthMismatch {
                        got: values.len(),
                        want: nt,
                    });
                }
                Ok(values.clone())
            }
        }
    }

    /// Certified upper bound for `‖V‖_∞` over the whole mesh.
    pub fn global_sup_bound(&self, mesh: &Mesh) -> Result<f64, PotentialError> {
        Ok(self
            .elementwise_sup(mesh)?
            .into_iter()
            .fold(0.0, f64::max))
    }
}

fn harmonic(x: [f64; 2]) -> f64 {
    0.5 * (x[0] * x[0] + x[1] * x[1])
}

fn lattice(x: [f64; 2]) -> f64 {
    let smooth = (0.5 * (x[0] * x[0] + x[1] * x[1]) - 16.0).max(0.0);
    let s = (std::f64::consts::FRAC_PI_2 * x[0]).sin() * (std::f64::consts::FRAC_PI_2 * x[1]).sin();
    smooth + (30.0 + 10.0 * s).floor()
}

fn axis_range(v: [f64; 3]) -> (f64, f64) {
    (
        v.into_iter().fold(f64::INFINITY, f64::min),
        v.into_iter().fold(f64::NEG_INFINITY, f64::max),
    )
}

/// Range of `sin(πt/2)` over `[a, b]`: endpoint values plus the interior
/// critical points `t = 1 + 2k` where the sine is `±1`.
fn half_sine_range(a: f64, b: f64) -> (f64, f64) {
    let s = |t: f64| (std::f64::consts::FRAC_PI_2 * t).sin();
    let mut lo = s(a).min(s(b));
    let mut hi = s(a).max(s(b));
    let mut k = ((a - 1.0) / 2.0).ceil() as i64;
    loop {
        let t = 1.0 + 2.0 * k as f64;
        if t > b {
            break;
        }
        if t >= a {
            let v = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        k += 1;
    }
    (lo, hi)
}

/// Anderson cells overlapping a triangle with positive area, with the exact
/// overlap areas (Sutherland–Hodgman clipping against each cell).
fn cell_overlaps(coords: [[f64; 2]; 3]) -> Vec<(usize, usize, f64)> {
    let n = ANDERSON_GRID;
    let step = 1.0 / n as f64;
    let (x0, x1) = axis_range(coords.map(|p| p[0]));
    let (y0, y1) = axis_range(coords.map(|p| p[1]));
    let ilo = ((x0 / step).floor() as isize).clamp(0, n as isize - 1) as usize;
    let ihi = ((x1 / step).ceil() as isize).clamp(1, n as isize) as usize;
    let jlo = ((y0 / step).floor() as isize).clamp(0, n as isize - 1) as usize;
    let jhi = ((y1 / step).ceil() as isize).clamp(1, n as isize) as usize;
    let tri_area = polygon_area(&coords);
    let tol = 1e-14 * tri_area.max(f64::MIN_POSITIVE);
    let mut out = Vec::new();
    for j in jlo..jhi {
        for i in ilo..ihi {
            let cell = [
                i as f64 * step,
                (i + 1) as f64 * step,
                j as f64 * step,
                (j + 1) as f64 * step,
            ];
            let area = clip_area(&coords, cell);
            if area > tol {
                out.push((i, j, area));
            }
        }
    }
    out
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for k in 0..n {
        let p = poly[k];
        let q = poly[(k + 1) % n];
        acc += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * acc.abs()
}

/// Area of a convex polygon clipped to the axis-aligned box
/// `[xlo, xhi] × [ylo, yhi]` (given as `[xlo, xhi, ylo, yhi]`).
fn clip_area(poly: &[[f64; 2]; 3], cell: [f64; 4]) -> f64 {
    // signed distance >= 0 means "inside" for each of the four half-planes
    let planes: [Box<dyn Fn([f64; 2]) -> f64>; 4] = [
        Box::new(move |p| p[0] - cell[0]),
        Box::new(move |p| cell[1] - p[0]),
        Box::new(move |p| p[1] - cell[2]),
        Box::new(move |p| cell[3] - p[1]),
    ];
    let mut current: Vec<[f64; 2]> = poly.to_vec();
    for plane in &planes {
        if current.is_empty() {
            return 0.0;
        }
        let mut next = Vec::with_capacity(current.len() + 2);
        for k in 0..current.len() {
            let p = current[k];
            let q = current[(k + 1) % current.len()];
            let (dp, dq) = (plane(p), plane(q));
            if dp >= 0.0 {
                next.push(p);
            }
            if (dp > 0.0 && dq < 0.0) || (dp < 0.0 && dq > 0.0) {
                let t = dp / (dp - dq);
                next.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        current = next;
    }
    polygon_area(&current)
}

/// Parses a per-triangle value file: one finite, non-negative float per
/// line, in the triangle order of the accompanying mesh.
pub fn parse_values_text(input: &str) -> Result<Vec<f64>, PotentialError> {
    let mut values = Vec::new();
    for (ln, line) in input.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let tok = it.next().expect("non-empty line has a token");
        if it.next().is_some() {
            return Err(PotentialError::TrailingTokens { line: ln + 1 });
        }
        let v: f64 = tok.parse().map_err(|_| PotentialError::BadValue {
            line: ln + 1,
            value: tok.to_owned(),
        })?;
        if !v.is_finite() || v < 0.0 {
            return Err(PotentialError::BadValue {
                line: ln + 1,
                value: tok.to_owned(),
            });
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(PotentialError::Empty);
    }
    Ok(values)
}

/// Transfers per-triangle values to a refinement of the same mesh
/// (children inherit the parent's value).
pub fn transfer_piecewise_constant(values: &[f64], fine: &Mesh) -> Result<Vec<f64>, PotentialError> {
    let parent = fine
        .parent_triangles()
        .expect("transfer requires a refined mesh with a parent map");
    let max_parent = parent.iter().copied().max().unwrap_or(0);
    if max_parent >= values.len() {
        return Err(PotentialError::LengthMismatch {
            got: values.len(),
            want: max_parent + 1,
        });
    }
    Ok(parent.iter().map(|&p| values[p]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_square_mesh, build_unit_square_mesh};

    #[test]
    fn harmonic_pi0_matches_edge_midpoint_identity_and_quadrature() {
        let mesh = build_square_mesh(8.0, 4);
        let pi0 = Potential::Harmonic.pi0_project(&mesh).unwrap();
        let rule = TriangleRule::standard();
        for t in 0..mesh.n_triangles() {
            let oracle = rule.mean(mesh.triangle_coords(t), harmonic);
            assert!(
                (pi0[t] - oracle).abs() <= 1e-12 * oracle.max(1.0),
                "triangle {t}: {} vs {}",
                pi0[t],
                oracle
            );
        }
    }

    #[test]
    fn elementwise_sup_dominates_pi0_and_samples() {
        let mesh = build_square_mesh(8.0, 8);
        let rule = TriangleRule::standard();
        for pot in [
            Potential::Harmonic,
            Potential::Lattice,
        ] {
            let sup = pot.elementwise_sup(&mesh).unwrap();
            let pi0 = pot.pi0_project(&mesh).unwrap();
            for t in 0..mesh.n_triangles() {
                assert!(
                    sup[t] + 1e-9 >= pi0[t],
                    "{pot}: sup {} < mean {} on triangle {t}",
                    sup[t],
                    pi0[t]
                );
                // certification: the bound dominates the value at every
                // quadrature point of the triangle
                let coords = mesh.triangle_coords(t);
                for p in &rule.points {
                    let x = [
                        p[0] * coords[0][0] + p[1] * coords[1][0] + p[2] * coords[2][0],
                        p[0] * coords[0][1] + p[1] * coords[1][1] + p[2] * coords[2][1],
                    ];
                    let v = pot.eval(x).unwrap();
                    assert!(
                        sup[t] + 1e-12 >= v,
                        "{pot}: sup {} < value {v} at {x:?}",
                        sup[t]
                    );
                }
            }
        }
    }

    #[test]
    fn lattice_global_bound_reaches_published_magnitude() {
        // The trap part peaks at 48 on the corners and the floor term at 40,
        // so any sound per-triangle bound on coarse meshes reaches 88.
        let mesh = build_square_mesh(8.0, 8);
        let bound = Potential::Lattice.global_sup_bound(&mesh).unwrap();
        assert!(bound >= 88.0, "global bound {bound} < 88");
        // the bound stays certified: it never exceeds the sum of both parts' maxima
        assert!(bound <= 88.0 + 1e-12);
    }

    #[test]
    fn harmonic_bound_is_exact_vertex_max() {
        let mesh = build_square_mesh(8.0, 4);
        let bound = Potential::Harmonic.global_sup_bound(&mesh).unwrap();
        assert!((bound - 64.0).abs() < 1e-12);
    }

    #[test]
    fn anderson_sampling_is_deterministic_normalised_and_in_range() {
        let a = AndersonField::new(11);
        let b = AndersonField::new(11);
        assert_eq!(a, b);
        let c = AndersonField::new(12);
        assert_ne!(a, c);
        let min = (0..8)
            .flat_map(|j| (0..8).map(move |i| (i, j)))
            .map(|(i, j)| a.cell_value(i, j))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(min, 0.0);
        for j in 0..8 {
            for i in 0..8 {
                let v = a.cell_value(i, j);
                assert!((0.0..10_000.0).contains(&v));
                assert_eq!(v, v.floor(), "integer-valued after the shift");
            }
        }
    }

    #[test]
    fn anderson_pi0_on_aligned_mesh_restricts_cells() {
        // the 8-per-side unit-square mesh nests exactly in the 8x8 grid
        let mesh = build_unit_square_mesh(8);
        let pot = Potential::anderson(3);
        let pi0 = pot.pi0_project(&mesh).unwrap();
        let sup = pot.elementwise_sup(&mesh).unwrap();
        for t in 0..mesh.n_triangles() {
            let v = pot.eval(mesh.tri_midpoint(t)).unwrap();
            assert_eq!(pi0[t], v, "triangle {t} mean");
            assert_eq!(sup[t], v, "triangle {t} sup");
        }
    }

    #[test]
    fn anderson_pi0_on_misaligned_mesh_is_area_weighted() {
        // 4-per-side mesh: each triangle covers two cells of each row/column
        let mesh = build_unit_square_mesh(4);
        let pot = Potential::anderson(5);
        let pi0 = pot.pi0_project(&mesh).unwrap();
        let rule = TriangleRule::with_degree(14);
        for t in 0..mesh.n_triangles() {
            // quadrature is not exact for discontinuous integrands, but a
            // degree-14 rule on the sub-cells agrees since each quadrature
            // point evaluates the true field; compare against dense sampling
            let oracle = rule.mean(mesh.triangle_coords(t), |x| pot.eval(x).unwrap());
            // overlap integration is exact; sampling is not — loose tolerance
            assert!(
                (pi0[t] - oracle).abs() < 400.0,
                "triangle {t}: {} vs sampled {}",
                pi0[t],
                oracle
            );
            let sup = pot.elementwise_sup(&mesh).unwrap();
            assert!(sup[t] + 1e-9 >= pi0[t]);
        }
        // exactness check on one hand-computed triangle:
        // triangle ((0,0),(1/4,0),(1/4,1/4)) covers cells (0,0),(1,0),(1,1)
        // with areas 1/128, 3/128... verify total area accounting instead:
        let coords = mesh.triangle_coords(0);
        let overlaps = cell_overlaps(coords);
        let total: f64 = overlaps.iter().map(|&(_, _, a)| a).sum();
        assert!((total - mesh.tri_area(0)).abs() < 1e-15);
    }

    #[test]
    fn clip_area_hand_cases() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        // whole triangle inside a big box
        assert!((clip_area(&tri, [-1.0, 2.0, -1.0, 2.0]) - 0.5).abs() < 1e-15);
        // box covering the lower-left quarter: clip of the unit right
        // triangle to [0,.5]² keeps area 1/2 - 2*(1/8)... compute: the
        // triangle intersected with the square [0,.5]² is the square minus
        // the corner above x+y=1? no: x+y<=1 contains all of [0,.5]², so 0.25
        assert!((clip_area(&tri, [0.0, 0.5, 0.0, 0.5]) - 0.25).abs() < 1e-15);
        // disjoint box
        assert_eq!(clip_area(&tri, [2.0, 3.0, 2.0, 3.0]), 0.0);
        // half-plane cut through the middle
        assert!((clip_area(&tri, [0.0, 1.0, 0.0, 0.25]) - (0.25 * (1.0 + 0.75) / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn half_sine_range_cases() {
        let (lo, hi) = half_sine_range(0.0, 4.0); // full period: [-1, 1]
        assert_eq!((lo, hi), (-1.0, 1.0));
        let (lo, hi) = half_sine_range(0.0, 0.5); // monotone piece
        assert!((lo - 0.0).abs() < 1e-15 && (hi - (std::f64::consts::FRAC_PI_4).sin()) < 1e-15);
        let (lo, hi) = half_sine_range(6.0, 8.0); // contains t=7 where sin = -1
        assert_eq!(lo, -1.0);
        assert!(hi <= 1e-15);
    }

    #[test]
    fn value_file_roundtrip_and_validation() {
        let parsed = parse_values_text("1.5\n0\n\n2.25e3\n").unwrap();
        assert_eq!(parsed, vec![1.5, 0.0, 2250.0]);
        assert!(parse_values_text("").is_err());
        assert!(parse_values_text("-1.0").is_err());
        assert!(parse_values_text("nan").is_err());
        assert!(parse_values_text("inf").is_err());
        assert!(parse_values_text("1 2").is_err());
        assert!(parse_values_text("abc").is_err());
    }

    #[test]
    fn piecewise_constant_projection_and_transfer() {
        let mesh = build_square_mesh(1.0, 2);
        let values: Vec<f64> = (0..mesh.n_triangles()).map(|t| t as f64).collect();
        let pot = Potential::PiecewiseConstant(values.clone());
        assert_eq!(pot.pi0_project(&mesh).unwrap(), values);
        assert_eq!(pot.elementwise_sup(&mesh).unwrap(), values);
        let fine = mesh.uniform_refine();
        let fine_values = transfer_piecewise_constant(&values, &fine).unwrap();
        for (c, &p) in fine.parent_triangles().unwrap().iter().enumerate() {
            assert_eq!(fine_values[c], values[p]);
        }
        // wrong length errors
        let short = Potential::PiecewiseConstant(vec![1.0]);
        assert!(short.pi0_project(&mesh).is_err());
    }

    #[test]
    fn zero_potential_is_trivial() {
        let mesh = build_square_mesh(1.0, 1);
        assert_eq!(Potential::Zero.pi0_project(&mesh).unwrap(), vec![0.0, 0.0]);
        assert_eq!(Potential::Zero.global_sup_bound(&mesh).unwrap(), 0.0);
        assert!(Potential::Zero.is_piecewise_constant());
    }
}
