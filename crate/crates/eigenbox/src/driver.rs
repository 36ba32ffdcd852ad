//! Benchmark experiments: mesh hierarchies, per-level bound tables, CSV
//! reporting, and Aitken extrapolation.  This module is the engine behind
//! the `eigenbox` command-line interface.
//!
//! A [`run`] sweeps one configuration: it walks a mesh hierarchy (uniform
//! red refinement, or adaptive newest-vertex bisection steered by the
//! residual estimator), solves every requested discretisation per level,
//! post-processes eigenvalues into guaranteed lower bounds, averages
//! eigenfunctions into guaranteed upper bounds, and emits one
//! [`BoundReport`] per `(level, method, k)`.  All numeric output is
//! bit-for-bit reproducible for a fixed configuration; only the `seconds`
//! timing column varies between runs.
//!
//! ## Reference problems
//!
//! The projected discretisations (`mcr`, `rt`, `scr`) only ever see
//! elementwise potential means, so their rows — eigenvalues *and* bounds —
//! pertain to the reference problem with the projected potential `Π₀V`.
//! For the tabulated potentials (`lattice`, `anderson`) every method is
//! assembled from `Π₀V`, making all rows refer to that same piecewise
//! constant reference problem (exactly the original one once mesh cells
//! resolve the tabulation, e.g. the Anderson grid).  Upper bounds always
//! target the potential as assembled, which for the smooth `harmonic`
//! potential is the true `V` on every method.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use thiserror::Error;

use crate::adaptivity::{doerfler_mark, estimate};
use crate::assembly::{
    assemble, set_deterministic_parallelism, AssembleError, ElementPotential, Method,
};
use crate::bounds::{self, compute_params, BoundError, GlbParameters};
use crate::eigensolve::{solve_smallest, EigenError, SolveOptions, Spectrum};
use crate::gub::{gub_nested, ConformingFn, ConformingGramContext, GubResult};
use crate::mesh::{build_lshape_mesh, build_square_mesh, build_unit_square_mesh, Mesh};
use crate::potential::{Potential, PotentialError};
use crate::spaces::{average_a1, average_a2, CrSpace, EcrSpace, EsSpace, S1Space, S2Space};

/// The computational domains wired into the benchmark driver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// `(−8, 8)²`, coarsest mesh 4 cells per side (32 triangles).
    Square8,
    /// `(−8, 8)² \ [0, 8)²`, coarsest mesh 2 cells per side (6 triangles).
    Lshape8,
    /// `(0, 1)²`, coarsest mesh 8 cells per side (128 triangles), aligned
    /// with the 8×8 Anderson grid.
    UnitSquare,
}

impl Domain {
    pub const ALL: [Domain; 3] = [Domain::Square8, Domain::Lshape8, Domain::UnitSquare];

    pub fn name(self) -> &'static str {
        match self {
            Domain::Square8 => "square8",
            Domain::Lshape8 => "lshape8",
            Domain::UnitSquare => "unitsquare",
        }
    }

    pub fn parse(s: &str) -> Option<Domain> {
        match s.trim().to_ascii_lowercase().as_str() {
            "square8" => Some(Domain::Square8),
            "lshape8" => Some(Domain::Lshape8),
            "unitsquare" => Some(Domain::UnitSquare),
            _ => None,
        }
    }

    pub fn base_mesh(self) -> Mesh {
        match self {
            Domain::Square8 => build_square_mesh(8.0, 4),
            Domain::Lshape8 => build_lshape_mesh(8.0, 2),
            Domain::UnitSquare => build_unit_square_mesh(8),
        }
    }
}

/// Which potential a configuration asks for (the Anderson field is
/// materialised from the configured seed when the run starts).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PotentialSpec {
    Zero,
    Harmonic,
    Lattice,
    Anderson,
}

impl PotentialSpec {
    pub fn name(self) -> &'static str {
        match self {
            PotentialSpec::Zero => "zero",
            PotentialSpec::Harmonic => "harmonic",
            PotentialSpec::Lattice => "lattice",
            PotentialSpec::Anderson => "anderson",
        }
    }

    pub fn parse(s: &str) -> Option<PotentialSpec> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" => Some(PotentialSpec::Zero),
            "harmonic" => Some(PotentialSpec::Harmonic),
            "lattice" => Some(PotentialSpec::Lattice),
            "anderson" => Some(PotentialSpec::Anderson),
            _ => None,
        }
    }
}

/// One complete experiment description.  Defaults are a small smoke-test
/// sweep; the command line and config files override individual fields via
/// [`ExperimentConfig::set`].
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub domain: Domain,
    pub potential: PotentialSpec,
    /// Seed of the Anderson field (ignored by the other potentials).
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Eigenpairs requested per method and level.
    pub k: usize,
    /// Number of levels (uniform mode) or level cap (adaptive mode).
    pub levels: usize,
    pub adaptive: bool,
    /// Dörfler marking fraction.
    pub theta: f64,
    /// Adaptive budget: stop once the estimator method's space reaches this
    /// many dofs (`0` = no budget).
    pub max_dofs: usize,
    /// Count boundary-edge tangential slopes in the estimator.
    pub boundary_jumps: bool,
    /// The (nonconforming) discretisation whose first eigenpair drives
    /// adaptive refinement.
    pub estimator_method: Method,
    pub dense_threshold: usize,
    pub residual_tol: f64,
    pub solver_seed: u64,
    /// Write each level's mesh as a text file into this directory.
    pub dump_mesh: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            domain: Domain::UnitSquare,
            potential: PotentialSpec::Zero,
            seed: 1,
            methods: Method::ALL.to_vec(),
            k: 5,
            levels: 3,
            adaptive: false,
            theta: 0.5,
            max_dofs: 0,
            boundary_jumps: true,
            estimator_method: Method::Scr,
            dense_threshold: 2000,
            residual_tol: 1e-9,
            solver_seed: 0,
            dump_mesh: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    BadLine { line: usize },
    #[error("unknown configuration key `{key}`")]
    UnknownKey { key: String },
    #[error("invalid value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("at least one method is required")]
    NoMethods,
    #[error("`k` and `levels` must be at least 1")]
    EmptyRun,
    #[error("marking fraction must lie in (0, 1], got {theta}")]
    BadTheta { theta: f64 },
    #[error("the estimator needs a nonconforming method, not `{0}`")]
    ConformingEstimator(Method),
    #[error("the anderson potential lives on the unit square; use `domain = unitsquare`")]
    AndersonDomain,
}

impl ExperimentConfig {
    /// Parses a configuration file: one `key = value` per line, `#` starts
    /// a comment, blank lines are skipped.  Keys match [`Self::set`].
    pub fn parse_text(text: &str) -> Result<Self, ConfigError> {
        let mut config = ExperimentConfig::default();
        for (ln, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ConfigError::BadLine { line: ln + 1 })?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    /// Sets one configuration field from its textual form.  Keys:
    /// `domain`, `potential`, `seed`, `methods` (comma-separated), `k`,
    /// `levels`, `mode` (`uniform`/`adaptive`), `theta`, `max_dofs`,
    /// `boundary_jumps` (`true`/`false`), `estimator`, `dense_threshold`,
    /// `residual_tol`, `solver_seed`, `dump_mesh` (directory).
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::BadValue {
            key: key.to_owned(),
            value: value.to_owned(),
        };
        match key {
            "domain" => self.domain = Domain::parse(value).ok_or_else(bad)?,
            "potential" => self.potential = PotentialSpec::parse(value).ok_or_else(bad)?,
            "seed" => self.seed = value.parse().map_err(|_| bad())?,
            "methods" => {
                let mut methods = Vec::new();
                for part in value.split(',') {
                    let m = Method::parse(part).ok_or_else(bad)?;
                    if !methods.contains(&m) {
                        methods.push(m);
                    }
                }
                self.methods = methods;
            }
            "k" => self.k = value.parse().map_err(|_| bad())?,
            "levels" => self.levels = value.parse().map_err(|_| bad())?,
            "mode" => {
                self.adaptive = match value.to_ascii_lowercase().as_str() {
                    "uniform" => false,
                    "adaptive" => true,
                    _ => return Err(bad()),
                }
            }
            "theta" => self.theta = value.parse().map_err(|_| bad())?,
            "max_dofs" => self.max_dofs = value.parse().map_err(|_| bad())?,
            "boundary_jumps" => {
                self.boundary_jumps = match value.to_ascii_lowercase().as_str() {
                    "true" | "1" | "yes" => true,
                    "false" | "0" | "no" => false,
                    _ => return Err(bad()),
                }
            }
            "estimator" => self.estimator_method = Method::parse(value).ok_or_else(bad)?,
            "dense_threshold" => self.dense_threshold = value.parse().map_err(|_| bad())?,
            "residual_tol" => self.residual_tol = value.parse().map_err(|_| bad())?,
            "solver_seed" => self.solver_seed = value.parse().map_err(|_| bad())?,
            "dump_mesh" => self.dump_mesh = Some(PathBuf::from(value)),
            _ => {
                return Err(ConfigError::UnknownKey {
                    key: key.to_owned(),
                })
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.methods.is_empty() {
            return Err(ConfigError::NoMethods);
        }
        if self.k == 0 || self.levels == 0 {
            return Err(ConfigError::EmptyRun);
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(ConfigError::BadTheta { theta: self.theta });
        }
        if self.estimator_method == Method::S1 {
            return Err(ConfigError::ConformingEstimator(Method::S1));
        }
        if self.potential == PotentialSpec::Anderson && self.domain != Domain::UnitSquare {
            return Err(ConfigError::AndersonDomain);
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum DriverError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Assemble(#[from] AssembleError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error("failed to write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("line {line}: `{token}` is not a number")]
    BadSequenceValue { line: usize, token: String },
    #[error("need at least three values to extrapolate, got {0}")]
    SequenceTooShort(usize),
    #[error("sequence is not accelerable: the last second difference vanishes or overflows")]
    NotAccelerable,
}

/// One row of the report table: all bounds for eigenvalue index `k`
/// (1-based) of one method on one level.  `None` marks a column the method
/// does not produce, a precondition that fails, or an index beyond the
/// finite spectrum.
#[derive(Clone, Debug)]
pub struct BoundReport {
    pub level: usize,
    pub ntri: usize,
    pub method: Method,
    pub k: usize,
    pub lambda_h: Option<f64>,
    pub glb_cr: Option<f64>,
    pub glb_mu: Option<f64>,
    pub glb_ecr: Option<f64>,
    pub glb_ecr_s: Option<f64>,
    pub glb_rt: Option<f64>,
    pub glb_mcr: Option<f64>,
    pub glb_cecr: Option<f64>,
    pub glb_scr: Option<f64>,
    pub gub_a1: Option<f64>,
    pub gub_a2: Option<f64>,
    pub gub_ecr: Option<f64>,
    pub params: GlbParameters,
    pub seconds: f64,
}

/// The first eigenpair of the estimator method on the final mesh, as a
/// midpoint-space field (what the error estimator consumes).
#[derive(Clone, Debug)]
pub struct DrivingField {
    pub lambda: f64,
    pub cr_coeffs: Vec<f64>,
}

/// Everything a sweep produces: the report rows, one mesh per recorded
/// level, and (adaptive mode) the final driving eigenpair.
pub struct RunOutput {
    pub reports: Vec<BoundReport>,
    pub meshes: Vec<Mesh>,
    pub driving: Option<DrivingField>,
}

/// The CSV column order; [`render_csv`] writes exactly these.
pub const CSV_HEADER: &str = "level,ntri,method,k,lambda_h,glb_cr,glb_mu,glb_ecr,glb_ecr_s,\
glb_rt,glb_mcr,glb_cecr,glb_scr,gub_a1,gub_a2,gub_ecr,eps,epsp,epspp,delta,deltap,hmax,seconds";

fn push_cell(out: &mut String, v: Option<f64>) {
    if let Some(x) = v {
        write!(out, "{x}").expect("writing to a String cannot fail");
    }
    out.push(',');
}

/// Renders report rows in the fixed [`CSV_HEADER`] schema.  Empty cells are
/// columns without a value.  Every column except `seconds` is reproducible
/// bit-for-bit across runs of the same configuration.
pub fn render_csv(reports: &[BoundReport]) -> String {
    let mut out = String::with_capacity(128 * (reports.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in reports {
        write!(out, "{},{},{},{},", r.level, r.ntri, r.method, r.k)
            .expect("writing to a String cannot fail");
        for v in [
            r.lambda_h, r.glb_cr, r.glb_mu, r.glb_ecr, r.glb_ecr_s, r.glb_rt, r.glb_mcr,
            r.glb_cecr, r.glb_scr, r.gub_a1, r.gub_a2, r.gub_ecr,
        ] {
            push_cell(&mut out, v);
        }
        let p = &r.params;
        write!(
            out,
            "{},{},{},{},{},{},{:.3}\n",
            p.eps, p.epsp, p.epspp, p.delta, p.deltap, p.h_max, r.seconds
        )
        .expect("writing to a String cannot fail");
    }
    out
}

/// Aitken Δ² extrapolation of the last three terms:
/// `x̂ = x_n − (x_n − x_{n−1})² / (x_n − 2 x_{n−1} + x_{n−2})`.
/// Exact for geometric error decay; errors out when the second difference
/// is too small to divide by.
pub fn aitken(seq: &[f64]) -> Result<f64, DriverError> {
    if seq.len() < 3 {
        return Err(DriverError::SequenceTooShort(seq.len()));
    }
    let [a, b, c] = [seq[seq.len() - 3], seq[seq.len() - 2], seq[seq.len() - 1]];
    let d2 = c - 2.0 * b + a;
    let scale = a.abs().max(b.abs()).max(c.abs()).max(f64::MIN_POSITIVE);
    if d2.abs() <= 1e-14 * scale {
        return Err(DriverError::NotAccelerable);
    }
    let limit = c - (c - b) * (c - b) / d2;
    if !limit.is_finite() {
        // overflow in the differences of an extreme (if finite) sequence
        return Err(DriverError::NotAccelerable);
    }
    Ok(limit)
}

/// Parses a plain sequence file: one number per line, `#` comments and
/// blank lines allowed.
pub fn parse_sequence_text(text: &str) -> Result<Vec<f64>, DriverError> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| DriverError::BadSequenceValue {
            line: ln + 1,
            token: line.to_owned(),
        })?;
        if !v.is_finite() {
            return Err(DriverError::BadSequenceValue {
                line: ln + 1,
                token: line.to_owned(),
            });
        }
        out.push(v);
    }
    Ok(out)
}

/// Number of unknowns `method` has on `mesh` (without assembling).
pub fn method_dofs(mesh: &Mesh, method: Method) -> usize {
    match method {
        Method::Cr => CrSpace::new(mesh).n_dofs,
        Method::Ecr | Method::Mcr | Method::Rt => EcrSpace::new(mesh).n_dofs,
        Method::Scr => EsSpace::new(mesh).n_dofs,
        Method::S1 => S1Space::new(mesh).n_dofs,
    }
}

/// The midpoint-space part of one eigenvector column, in [`CrSpace`]
/// numbering — the common currency of the estimator and the averaging maps.
fn cr_part(mesh: &Mesh, method: Method, column: &[f64]) -> Vec<f64> {
    match method {
        Method::Cr => column.to_vec(),
        Method::Ecr | Method::Mcr | Method::Rt => {
            let ecr = EcrSpace::new(mesh);
            ecr.split(column).0.to_vec()
        }
        Method::Scr => {
            let es = EsSpace::new(mesh);
            let (_, nc) = es.split(column);
            es.ecr.split(nc).0.to_vec()
        }
        Method::S1 => panic!("conforming eigenvectors have no midpoint part"),
    }
}

fn column(m: &faer::Mat<f64>, j: usize) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

/// Reads `μ_k` off the nested family results: the bound for index `k`
/// exists when the first `k` candidates were linearly independent.
fn nested_mu(nested: &[GubResult], k: usize) -> Option<f64> {
    let g = nested.get(k - 1)?;
    if g.k_available == k {
        Some(g.mu[k - 1])
    } else {
        None
    }
}

struct LevelContext<'a> {
    /// Per-triangle means of the potential.
    pi0: &'a [f64],
    /// Certified per-triangle sups of the true potential.
    true_sup: &'a [f64],
    /// Whether every method is assembled from `Π₀V` (tabulated potentials).
    tabulated: bool,
    potential: &'a Potential,
}

impl LevelContext<'_> {
    /// The potential as assembled for `method` (see the module notes on
    /// reference problems).
    fn assembly_potential(&self, method: Method) -> ElementPotential<'_> {
        match self.potential {
            Potential::Zero => ElementPotential::Zero,
            Potential::Harmonic if self.tabulated => unreachable!("harmonic is not tabulated"),
            Potential::Harmonic => ElementPotential::Harmonic,
            _ => {
                let _ = method;
                ElementPotential::Constants(self.pi0)
            }
        }
    }

    /// True when the assembled potential for `method` is piecewise constant,
    /// the precondition of the closed-form enriched bound.
    fn assembled_pwconst(&self, method: Method) -> bool {
        let _ = method;
        matches!(self.potential, Potential::Zero) || self.tabulated
    }

    /// The potential the candidate (upper-bound) forms integrate: always the
    /// potential as given, independent of the method that produced the
    /// candidates.
    fn gub_potential(&self) -> ElementPotential<'_> {
        match self.potential {
            Potential::Zero => ElementPotential::Zero,
            Potential::Harmonic => ElementPotential::Harmonic,
            _ => ElementPotential::Constants(self.pi0),
        }
    }

    /// Per-triangle potential sup feeding the bound parameters of `method`:
    /// the projected methods bound the `Π₀V` reference problem, whose exact
    /// elementwise sup is the mean itself.
    fn sup_for(&self, method: Method) -> &[f64] {
        if self.tabulated || method.projects_potential() {
            self.pi0
        } else {
            self.true_sup
        }
    }
}

/// Runs one experiment sweep.  See the module docs for the semantics of the
/// produced rows.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput, DriverError> {
    config.validate()?;
    set_deterministic_parallelism();
    let potential = match config.potential {
        PotentialSpec::Zero => Potential::Zero,
        PotentialSpec::Harmonic => Potential::Harmonic,
        PotentialSpec::Lattice => Potential::Lattice,
        PotentialSpec::Anderson => Potential::anderson(config.seed),
    };
    let tabulated = matches!(potential, Potential::Lattice | Potential::Anderson(_));
    let solve_opts = SolveOptions {
        dense_threshold: config.dense_threshold,
        seed: config.solver_seed,
        residual_tol: config.residual_tol,
        ..SolveOptions::default()
    };

    let mut mesh = config.domain.base_mesh();
    let mut reports = Vec::new();
    let mut meshes = Vec::new();
    let mut driving: Option<DrivingField> = None;
    // previous level's midpoint-scheme lower bounds, indexed by k−1: the
    // reference eigenvalues of the μ-variant bound
    let mut prev_glb_cr: Vec<f64> = Vec::new();

    for level in 0..config.levels {
        let pi0 = potential.pi0_project(&mesh)?;
        let true_sup = potential.elementwise_sup(&mesh)?;
        let lc = LevelContext {
            pi0: &pi0,
            true_sup: &true_sup,
            tabulated,
            potential: &potential,
        };
        let gram_ctx = ConformingGramContext::new(&mesh, &lc.gub_potential());
        let s1 = S1Space::new(&mesh);
        let s2 = S2Space::new(&mesh);
        let cr_space = CrSpace::new(&mesh);
        let ntri = mesh.n_triangles();

        // reuse the estimator method's spectrum if it is also reported
        let mut estimator_spectrum: Option<Spectrum> = None;
        let mut next_glb_cr: Vec<f64> = Vec::new();

        for &method in &config.methods {
            let t0 = Instant::now();
            let apot = lc.assembly_potential(method);
            let pencil = assemble(&mesh, method, &apot)?;
            let finite = pencil.n_dofs - pencil.n_infinite;
            let k_eff = config.k.min(finite);
            let params = compute_params(&mesh, lc.sup_for(method))?;

            let spectrum = if k_eff == 0 {
                None
            } else {
                Some(solve_smallest(&pencil, k_eff, &solve_opts)?)
            };

            // guaranteed upper bounds from the eigenfunctions of this method
            let (gub_a1_nested, gub_a2_nested, gub_ecr_nested) = match &spectrum {
                None => (None, None, None),
                Some(spec) => match method {
                    Method::Cr => {
                        let a1: Vec<Vec<f64>> = (0..k_eff)
                            .map(|j| average_a1(&mesh, &cr_space, &s1, &column(&spec.eigenvectors, j)))
                            .collect();
                        let a2: Vec<Vec<f64>> = (0..k_eff)
                            .map(|j| average_a2(&mesh, &cr_space, &s2, &column(&spec.eigenvectors, j)))
                            .collect();
                        let c1: Vec<ConformingFn> =
                            a1.iter().map(|u| ConformingFn::P1(&s1, u)).collect();
                        let c2: Vec<ConformingFn> =
                            a2.iter().map(|u| ConformingFn::P2(&s2, u)).collect();
                        (
                            Some(gub_nested(&mesh, &gram_ctx, &c1)?),
                            Some(gub_nested(&mesh, &gram_ctx, &c2)?),
                            None,
                        )
                    }
                    Method::Ecr | Method::Mcr | Method::Rt | Method::Scr => {
                        let a1: Vec<Vec<f64>> = (0..k_eff)
                            .map(|j| {
                                let cr = cr_part(&mesh, method, &column(&spec.eigenvectors, j));
                                average_a1(&mesh, &cr_space, &s1, &cr)
                            })
                            .collect();
                        let c1: Vec<ConformingFn> =
                            a1.iter().map(|u| ConformingFn::P1(&s1, u)).collect();
                        (None, None, Some(gub_nested(&mesh, &gram_ctx, &c1)?))
                    }
                    Method::S1 => {
                        let coeffs: Vec<Vec<f64>> =
                            (0..k_eff).map(|j| column(&spec.eigenvectors, j)).collect();
                        let cands: Vec<ConformingFn> =
                            coeffs.iter().map(|u| ConformingFn::P1(&s1, u)).collect();
                        (Some(gub_nested(&mesh, &gram_ctx, &cands)?), None, None)
                    }
                },
            };

            let pwconst = lc.assembled_pwconst(method);
            let seconds = t0.elapsed().as_secs_f64();

            for k in 1..=config.k {
                let mut row = BoundReport {
                    level,
                    ntri,
                    method,
                    k,
                    lambda_h: None,
                    glb_cr: None,
                    glb_mu: None,
                    glb_ecr: None,
                    glb_ecr_s: None,
                    glb_rt: None,
                    glb_mcr: None,
                    glb_cecr: None,
                    glb_scr: None,
                    gub_a1: None,
                    gub_a2: None,
                    gub_ecr: None,
                    params,
                    seconds,
                };
                if let Some(spec) = &spectrum {
                    if k <= k_eff {
                        let lambda = spec.eigenvalues[k - 1];
                        row.lambda_h = Some(lambda);
                        match method {
                            Method::Cr => {
                                let glb = bounds::glb_cr(lambda, &params);
                                row.glb_cr = Some(glb);
                                // reference eigenvalue: the previous level's
                                // bound for the same index, clamped to λ so
                                // the variant formula always applies
                                let mu = prev_glb_cr
                                    .get(k - 1)
                                    .copied()
                                    .unwrap_or(lambda)
                                    .min(lambda);
                                row.glb_mu = Some(
                                    bounds::glb_mu(lambda, mu, &params)
                                        .expect("reference clamped to the target"),
                                );
                                next_glb_cr.push(glb);
                            }
                            Method::Ecr => {
                                row.glb_ecr_s = Some(bounds::glb_ecr_general(lambda, &params).0);
                                if pwconst {
                                    row.glb_ecr = Some(bounds::glb_ecr_pwconst(lambda, &params));
                                }
                            }
                            Method::Mcr => {
                                row.glb_mcr = Some(bounds::glb_mcr(lambda, &params));
                                row.glb_cecr = Some(bounds::glb_cecr(lambda, &params));
                            }
                            Method::Rt => {
                                row.glb_rt = Some(bounds::glb_rt(lambda, &params));
                            }
                            Method::Scr => {
                                row.glb_scr = Some(bounds::glb_scr(lambda, &params));
                            }
                            Method::S1 => {}
                        }
                        row.gub_a1 = gub_a1_nested.as_deref().and_then(|n| nested_mu(n, k));
                        row.gub_a2 = gub_a2_nested.as_deref().and_then(|n| nested_mu(n, k));
                        row.gub_ecr = gub_ecr_nested.as_deref().and_then(|n| nested_mu(n, k));
                    }
                }
                reports.push(row);
            }

            if method == config.estimator_method {
                if let Some(spec) = spectrum {
                    estimator_spectrum = Some(spec);
                }
            }
        }
        if !next_glb_cr.is_empty() {
            prev_glb_cr = next_glb_cr;
        }

        if let Some(dir) = &config.dump_mesh {
            std::fs::create_dir_all(dir).map_err(|source| DriverError::Io {
                path: dir.clone(),
                source,
            })?;
            let path = dir.join(format!("level_{level:02}.mesh"));
            std::fs::write(&path, mesh.to_text())
                .map_err(|source| DriverError::Io { path, source })?;
        }

        // adaptive mode: the driving eigenpair exists on every level,
        // including the last one recorded
        let driving_now = if config.adaptive {
            let spec = match estimator_spectrum {
                Some(s) => s,
                None => {
                    let apot = lc.assembly_potential(config.estimator_method);
                    let pencil = assemble(&mesh, config.estimator_method, &apot)?;
                    solve_smallest(&pencil, 1, &solve_opts)?
                }
            };
            let u_cr = cr_part(
                &mesh,
                config.estimator_method,
                &column(&spec.eigenvectors, 0),
            );
            driving = Some(DrivingField {
                lambda: spec.eigenvalues[0],
                cr_coeffs: u_cr,
            });
            driving.clone()
        } else {
            None
        };

        let last_level = level + 1 == config.levels;
        let budget_hit = config.adaptive
            && config.max_dofs > 0
            && method_dofs(&mesh, config.estimator_method) >= config.max_dofs;
        if last_level || budget_hit {
            meshes.push(mesh);
            break;
        }

        let next = if config.adaptive {
            let field = driving_now.expect("adaptive mode always solves the estimator");
            let epot = lc.assembly_potential(config.estimator_method);
            let eta = estimate(
                &mesh,
                &epot,
                field.lambda,
                &cr_space,
                &field.cr_coeffs,
                config.boundary_jumps,
            );
            let marked = doerfler_mark(&eta, config.theta);
            if marked.is_empty() {
                meshes.push(mesh);
                break;
            }
            mesh.nvb_refine(&marked)
        } else {
            mesh.uniform_refine()
        };
        meshes.push(std::mem::replace(&mut mesh, next));
    }

    Ok(RunOutput {
        reports,
        meshes,
        driving,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_overrides_and_rejections() {
        let text = "\
# unit-square sweep
domain = unitsquare
potential = anderson
seed = 7
methods = cr, scr
k = 3
levels = 2
mode = adaptive
theta = 0.6
max_dofs = 1000
boundary_jumps = false
estimator = cr
dense_threshold = 500
residual_tol = 1e-8
solver_seed = 4
";
        let c = ExperimentConfig::parse_text(text).unwrap();
        assert_eq!(c.domain, Domain::UnitSquare);
        assert_eq!(c.potential, PotentialSpec::Anderson);
        assert_eq!(c.seed, 7);
        assert_eq!(c.methods, vec![Method::Cr, Method::Scr]);
        assert_eq!((c.k, c.levels), (3, 2));
        assert!(c.adaptive);
        assert_eq!(c.theta, 0.6);
        assert_eq!(c.max_dofs, 1000);
        assert!(!c.boundary_jumps);
        assert_eq!(c.estimator_method, Method::Cr);
        assert_eq!(c.dense_threshold, 500);
        assert_eq!(c.residual_tol, 1e-8);
        assert_eq!(c.solver_seed, 4);
        c.validate().unwrap();

        assert!(matches!(
            ExperimentConfig::parse_text("bogus_key = 1"),
            Err(ConfigError::UnknownKey { .. })
        ));
        assert!(matches!(
            ExperimentConfig::parse_text("no equals sign"),
            Err(ConfigError::BadLine { line: 1 })
        ));
        assert!(matches!(
            ExperimentConfig::parse_text("k = many"),
            Err(ConfigError::BadValue { .. })
        ));

        // validation failures
        let mut c = ExperimentConfig::default();
        c.methods.clear();
        assert!(matches!(c.validate(), Err(ConfigError::NoMethods)));
        let mut c = ExperimentConfig::default();
        c.estimator_method = Method::S1;
        assert!(matches!(
            c.validate(),
            Err(ConfigError::ConformingEstimator(_))
        ));
        let mut c = ExperimentConfig::default();
        c.potential = PotentialSpec::Anderson;
        c.domain = Domain::Square8;
        assert!(matches!(c.validate(), Err(ConfigError::AndersonDomain)));
        let mut c = ExperimentConfig::default();
        c.theta = 0.0;
        assert!(matches!(c.validate(), Err(ConfigError::BadTheta { .. })));
    }

    #[test]
    fn aitken_is_exact_on_geometric_decay_and_guards_degeneracies() {
        // xₙ = 5 − 3·2⁻ⁿ converges geometrically; Δ² recovers the limit
        let seq: Vec<f64> = (0..5).map(|n| 5.0 - 3.0 * 0.5f64.powi(n)).collect();
        let hat = aitken(&seq).unwrap();
        assert!((hat - 5.0).abs() < 1e-12, "{hat}");
        // only the last three terms matter
        let tail = aitken(&seq[2..]).unwrap();
        assert!((hat - tail).abs() < 1e-12);

        assert!(matches!(
            aitken(&[1.0, 2.0]),
            Err(DriverError::SequenceTooShort(2))
        ));
        // linear growth has a vanishing second difference
        assert!(matches!(
            aitken(&[1.0, 2.0, 3.0]),
            Err(DriverError::NotAccelerable)
        ));
        assert!(matches!(
            aitken(&[4.0, 4.0, 4.0]),
            Err(DriverError::NotAccelerable)
        ));
    }

    #[test]
    fn sequence_files_parse_with_comments() {
        let seq = parse_sequence_text("1.5\n# note\n\n-2e-3 # trailing\n4\n").unwrap();
        assert_eq!(seq, vec![1.5, -2e-3, 4.0]);
        assert!(parse_sequence_text("abc").is_err());
        assert!(parse_sequence_text("nan").is_err());
        assert!(parse_sequence_text("").unwrap().is_empty());
    }

    #[test]
    fn smoke_run_produces_the_documented_table() {
        let mut config = ExperimentConfig::default();
        config.set("domain", "unitsquare").unwrap();
        config.set("potential", "zero").unwrap();
        config.set("methods", "cr,ecr,s1").unwrap();
        config.set("k", "2").unwrap();
        config.set("levels", "1").unwrap();
        let out = run(&config).unwrap();
        assert_eq!(out.reports.len(), 3 * 2);
        assert_eq!(out.meshes.len(), 1);
        assert!(out.driving.is_none());

        let pi2 = std::f64::consts::PI.powi(2);
        for row in &out.reports {
            assert_eq!(row.level, 0);
            assert_eq!(row.ntri, 128);
            let lambda = row.lambda_h.unwrap();
            match row.method {
                Method::Cr => {
                    let glb = row.glb_cr.unwrap();
                    let mu = row.glb_mu.unwrap();
                    // sandwich around the known square eigenvalues
                    let exact = [2.0 * pi2, 5.0 * pi2][row.k - 1];
                    assert!(glb <= exact && exact <= row.gub_a2.unwrap());
                    assert!(mu <= glb * (1.0 + 1e-13));
                    assert!(row.gub_a1.unwrap() >= exact);
                    assert!(row.glb_ecr.is_none() && row.gub_ecr.is_none());
                }
                Method::Ecr => {
                    // zero potential is piecewise constant: both forms fill
                    let s_form = row.glb_ecr_s.unwrap();
                    let closed = row.glb_ecr.unwrap();
                    assert!(s_form <= lambda && closed <= lambda);
                    assert!(row.gub_ecr.is_some());
                    assert!(row.glb_cr.is_none());
                }
                Method::S1 => {
                    // conforming eigenvalues are themselves upper bounds and
                    // the candidate machinery must reproduce them
                    let mu = row.gub_a1.unwrap();
                    assert!((mu - lambda).abs() < 1e-9 * lambda);
                    assert!(row.glb_cr.is_none() && row.glb_ecr_s.is_none());
                }
                _ => unreachable!("not requested"),
            }
            assert!(row.params.eps > 0.0 && row.params.delta == 0.0);
        }

        let csv = render_csv(&out.reports);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(lines.count(), 6);
        // a cr row fills lambda and the first two bound columns
        let first = csv.lines().nth(1).unwrap();
        let cells: Vec<&str> = first.split(',').collect();
        assert_eq!(cells.len(), 23);
        assert_eq!(cells[2], "cr");
        assert!(!cells[4].is_empty() && !cells[5].is_empty() && !cells[6].is_empty());
        assert!(cells[7].is_empty(), "no enriched bound on a cr row");
    }

    #[test]
    fn rows_beyond_the_finite_spectrum_stay_empty() {
        // the coarsest L-shape has no interior vertex at all
        let mut config = ExperimentConfig::default();
        config.set("domain", "lshape8").unwrap();
        config.set("methods", "s1").unwrap();
        config.set("k", "2").unwrap();
        config.set("levels", "1").unwrap();
        let out = run(&config).unwrap();
        assert_eq!(out.reports.len(), 2);
        for row in &out.reports {
            assert_eq!(row.ntri, 6);
            assert!(row.lambda_h.is_none());
            assert!(row.gub_a1.is_none());
            assert!(row.params.h_max > 0.0, "mesh data still recorded");
        }
        // the CSV keeps the schema with empty value cells
        let csv = render_csv(&out.reports);
        let cells: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(cells.len(), 23);
        assert!(cells[4].is_empty());
    }

    #[test]
    fn adaptive_runs_honour_the_dof_budget() {
        let mut config = ExperimentConfig::default();
        config.set("domain", "lshape8").unwrap();
        config.set("potential", "zero").unwrap();
        config.set("methods", "cr").unwrap();
        config.set("estimator", "cr").unwrap();
        config.set("mode", "adaptive").unwrap();
        config.set("k", "1").unwrap();
        config.set("levels", "40").unwrap();
        config.set("max_dofs", "400").unwrap();
        let out = run(&config).unwrap();
        let final_mesh = out.meshes.last().unwrap();
        let final_dofs = method_dofs(final_mesh, Method::Cr);
        assert!(final_dofs >= 400, "stopped only after the budget: {final_dofs}");
        let levels_run = out.reports.last().unwrap().level + 1;
        assert!(levels_run < 40, "the budget, not the cap, stopped the run");
        assert_eq!(out.meshes.len(), levels_run);
        // the level recorded before the final one was still under budget
        let prev = &out.meshes[out.meshes.len() - 2];
        assert!(method_dofs(prev, Method::Cr) < 400);
        let driving = out.driving.unwrap();
        assert_eq!(driving.cr_coeffs.len(), final_dofs);
        assert!(driving.lambda > 0.0);
        // adaptive levels grow the mesh monotonically
        for pair in out.meshes.windows(2) {
            assert!(pair[1].n_triangles() > pair[0].n_triangles());
        }
    }
}
