//! Symmetric generalized eigensolver for pencils `A x = λ B x` with `A`
//! positive definite and `B` positive semidefinite (possibly singular).
//!
//! The pencil is solved in reciprocal form `B y = μ A y`: the wanted
//! smallest finite `λ` are the largest `μ = 1/λ`, and the null space of `B`
//! maps to the harmless cluster `μ = 0` (the "infinite" eigenvalues of the
//! original pencil) instead of poisoning a shift-invert factorization.
//!
//! Two paths share this formulation:
//!
//! * a **dense** path (small pencils): congruence with the Cholesky factor
//!   of `A` reduces to a standard symmetric eigenproblem, solved completely;
//! * an **iterative** path: a block Krylov iteration with the operator
//!   `A⁻¹B`, orthonormalized in the `A` inner product (in which the
//!   operator is self-adjoint), with Rayleigh–Ritz extraction and thick
//!   restarts.  A sparse Cholesky factorization of `A` provides the solves.
//!
//! Both paths return `B`-orthonormal eigenvectors with a deterministic sign
//! convention, and the iterative path verifies true residuals before
//! accepting convergence.  All computations are single-threaded for
//! reproducibility.

use faer::linalg::solvers::Solve;
use faer::sparse::SparseColMat;
use faer::{Mat, MatRef, Side};
use thiserror::Error;

use crate::assembly::{set_deterministic_parallelism, Pencil};
use crate::rng::SplitMix64;

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Pencils up to this size are solved densely (complete, direct).
    pub dense_threshold: usize,
    /// Seed for the iterative path's starting block.
    pub seed: u64,
    /// Relative change of the wanted Ritz values that triggers a residual
    /// verification.
    pub value_tol: f64,
    /// Acceptance test for each returned pair: `‖Bx − μAx‖ ≤ tol·μ‖Ax‖`,
    /// equivalent to `‖Ax − λBx‖ ≤ tol·‖Ax‖`.
    pub residual_tol: f64,
    pub max_iters: usize,
    /// Basis-size cap for the iterative path; `0` picks an automatic cap
    /// from the block size.
    pub max_basis: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            dense_threshold: 2000,
            seed: 0,
            value_tol: 1e-11,
            residual_tol: 1e-9,
            max_iters: 600,
            max_basis: 0,
        }
    }
}

#[derive(Debug)]
pub struct Spectrum {
    /// The `k` smallest finite eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// `n × k`; column `j` is the eigenvector for `eigenvalues[j]`,
    /// normalized to `xᵀBx = 1` with its largest-magnitude entry positive.
    pub eigenvectors: Mat<f64>,
    /// Structural count of infinite eigenvalues (`dim − rank B`).
    pub n_infinite: usize,
}

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("requested {k} eigenpairs but the pencil has only {finite} finite eigenvalues")]
    TooManyWanted { k: usize, finite: usize },
    #[error("left-hand matrix is not positive definite")]
    NotSpd,
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error(
        "eigeniteration did not converge within {iters} iterations \
         ({converged} of {k} pairs met the residual test)"
    )]
    NoConvergence {
        iters: usize,
        converged: usize,
        k: usize,
    },
}

/// Densifies a sparse matrix (small problems and tests).
pub fn to_dense(sp: &SparseColMat<usize, f64>) -> Mat<f64> {
    let mut m = Mat::zeros(sp.nrows(), sp.ncols());
    for j in 0..sp.ncols() {
        for (i, v) in sp.row_idx_of_col(j).zip(sp.val_of_col(j)) {
            m[(i, j)] = *v;
        }
    }
    m
}

/// Computes the `k` smallest finite eigenpairs of the pencil.
pub fn solve_smallest(p: &Pencil, k: usize, opts: &SolveOptions) -> Result<Spectrum, EigenError> {
    set_deterministic_parallelism();
    let n = p.n_dofs;
    let finite = n - p.n_infinite;
    if k > finite {
        return Err(EigenError::TooManyWanted { k, finite });
    }
    if k == 0 {
        return Ok(Spectrum {
            eigenvalues: Vec::new(),
            eigenvectors: Mat::zeros(n, 0),
            n_infinite: p.n_infinite,
        });
    }
    if n <= opts.dense_threshold {
        solve_dense(p, k)
    } else {
        solve_iterative(p, k, opts)
    }
}

fn sparse_matvec(sp: &SparseColMat<usize, f64>, x: &Mat<f64>) -> Mat<f64> {
    sp * x
}

fn fix_sign(col: &mut Mat<f64>, j: usize) {
    let n = col.nrows();
    let mut imax = 0;
    let mut amax = 0.0f64;
    for i in 0..n {
        let a = col[(i, j)].abs();
        if a > amax {
            amax = a;
            imax = i;
        }
    }
    if col[(imax, j)] < 0.0 {
        for i in 0..n {
            col[(i, j)] = -col[(i, j)];
        }
    }
}

fn solve_dense(p: &Pencil, k: usize) -> Result<Spectrum, EigenError> {
    let n = p.n_dofs;
    let a = to_dense(&p.a);
    let b = to_dense(&p.b);
    let llt = a.llt(Side::Lower).map_err(|_| EigenError::NotSpd)?;
    let l = llt.L();

    // C = L⁻¹ B L⁻ᵀ via two triangular multi-RHS solves.
    let mut w = b.clone();
    l.solve_lower_triangular_in_place(&mut w);
    let mut c = w.transpose().to_owned();
    l.solve_lower_triangular_in_place(&mut c);

    let evd = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| EigenError::Factorization(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();

    // Eigenvalues of C ascend; the k largest are μ_1 ≥ … ≥ μ_k > 0.
    let mu_max = s[n - 1].max(0.0);
    let mu_floor = mu_max * 1e-14;
    let mut eigenvalues = Vec::with_capacity(k);
    let mut eigenvectors = Mat::zeros(n, k);
    for j in 0..k {
        let idx = n - 1 - j;
        let mu = s[idx];
        if !(mu > mu_floor) {
            return Err(EigenError::Factorization(format!(
                "numerical rank of the right-hand matrix ({j}) is below the requested count {k}"
            )));
        }
        eigenvalues.push(1.0 / mu);
        let mut x = Mat::zeros(n, 1);
        for i in 0..n {
            x[(i, 0)] = u[(i, idx)];
        }
        l.transpose().solve_upper_triangular_in_place(&mut x);
        // B-normalize (xᵀBx = μ by construction; recompute for robustness)
        let bx = sparse_matvec(&p.b, &x);
        let mut nb2 = 0.0;
        for i in 0..n {
            nb2 += x[(i, 0)] * bx[(i, 0)];
        }
        let scale = 1.0 / nb2.sqrt();
        for i in 0..n {
            eigenvectors[(i, j)] = x[(i, 0)] * scale;
        }
        fix_sign(&mut eigenvectors, j);
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
        n_infinite: p.n_infinite,
    })
}

/// A-inner-product Gram matrix `XᵀAY` computed with a premultiplied `AY`.
fn gram(x: MatRef<'_, f64>, ay: &Mat<f64>) -> Mat<f64> {
    x.transpose() * ay
}

fn solve_iterative(p: &Pencil, k: usize, opts: &SolveOptions) -> Result<Spectrum, EigenError> {
    let n = p.n_dofs;
    let block = (k + 2).clamp(3, 12);
    let max_basis = if opts.max_basis == 0 {
        (k + 3 * block + 32).min(n)
    } else {
        opts.max_basis.max(k + 2 * block + 4).min(n)
    };
    let keep_size = (k + block + 4).min(max_basis.saturating_sub(block)).max(k);

    let chol = p.a.sp_cholesky(Side::Lower).map_err(|_| EigenError::NotSpd)?;
    let apply = |x: &Mat<f64>| -> Mat<f64> {
        let bx = sparse_matvec(&p.b, x);
        chol.solve(&bx)
    };

    let mut rng = SplitMix64::new(opts.seed ^ 0x5eed_ba5e_0f_u64);
    let random_block = |rng: &mut SplitMix64, cols: usize| -> Mat<f64> {
        let mut z = Mat::zeros(n, cols);
        for j in 0..cols {
            for i in 0..n {
                z[(i, j)] = rng.uniform_symmetric();
            }
        }
        z
    };

    // Basis storage: Q holds m A-orthonormal columns; H = QᵀBQ.
    let mut q = Mat::<f64>::zeros(n, max_basis);
    let mut h = Mat::<f64>::zeros(max_basis, max_basis);
    let mut m = 0usize;

    // Start from one operator application of a random block, which projects
    // out the null space of B (where all infinite eigenvalues live).
    let mut z = apply(&random_block(&mut rng, block));

    let mut prev_wanted: Vec<f64> = Vec::new();
    let mut pair_ok = vec![false; k];
    let mut converged_count = 0usize;
    let mut last_iter = 0usize;

    for iter in 0..opts.max_iters {
        last_iter = iter;
        // --- expand: A-orthonormalize z against Q and internally ---
        let nb = a_orthonormalize(&p.a, q.as_ref().subcols(0, m), &mut z);
        if nb == 0 {
            // complete linear dependence: restart the block from fresh noise
            z = apply(&random_block(&mut rng, block));
            continue;
        }
        // append accepted columns
        for j in 0..nb {
            for i in 0..n {
                q[(i, m + j)] = z[(i, j)];
            }
        }
        // H updates: new rows/columns of QᵀBQ
        let znew = q.as_ref().subcols(m, nb).to_owned();
        let bz = sparse_matvec(&p.b, &znew);
        let hq = q.as_ref().subcols(0, m).transpose() * &bz; // m×nb
        let hz = znew.transpose() * &bz; // nb×nb
        for j in 0..nb {
            for i in 0..m {
                h[(i, m + j)] = hq[(i, j)];
                h[(m + j, i)] = hq[(i, j)];
            }
            for i in 0..nb {
                h[(m + i, m + j)] = hz[(i, j)];
            }
        }
        m += nb;

        // --- Rayleigh–Ritz ---
        let hm = h.as_ref().submatrix(0, 0, m, m).to_owned();
        let evd = hm
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| EigenError::Factorization(format!("{e:?}")))?;
        let s = evd.S().column_vector();
        let theta: Vec<f64> = (0..m).map(|i| s[i]).collect();
        let y = evd.U().to_owned();
        let theta_max = theta[m - 1].max(0.0);
        let positive = theta.iter().filter(|&&t| t > theta_max * 1e-12).count();

        if positive >= k {
            let wanted: Vec<f64> = (0..k).map(|j| theta[m - 1 - j]).collect();
            let stag = prev_wanted.len() == k
                && wanted
                    .iter()
                    .zip(&prev_wanted)
                    .all(|(a, b)| (a - b).abs() <= opts.value_tol * a.abs().max(1e-300));
            let periodic = iter % 4 == 3;
            if stag || periodic || m + block > max_basis {
                // --- residual verification on the wanted Ritz vectors ---
                let mut yw = Mat::zeros(m, k);
                for j in 0..k {
                    let idx = m - 1 - j;
                    for i in 0..m {
                        yw[(i, j)] = y[(i, idx)];
                    }
                }
                let x = q.as_ref().subcols(0, m) * &yw; // n×k
                let ax = sparse_matvec(&p.a, &x);
                let bx = sparse_matvec(&p.b, &x);
                converged_count = 0;
                for j in 0..k {
                    let mu = wanted[j];
                    let mut r2 = 0.0f64;
                    let mut ax2 = 0.0f64;
                    for i in 0..n {
                        let r = bx[(i, j)] - mu * ax[(i, j)];
                        r2 += r * r;
                        ax2 += ax[(i, j)] * ax[(i, j)];
                    }
                    pair_ok[j] = r2.sqrt() <= opts.residual_tol * mu * ax2.sqrt();
                    if pair_ok[j] {
                        converged_count += 1;
                    }
                }
                if converged_count == k {
                    // accept: B-normalize, fix signs, return ascending λ
                    let mut eigenvalues = Vec::with_capacity(k);
                    let mut eigenvectors = Mat::zeros(n, k);
                    for j in 0..k {
                        let mu = wanted[j];
                        eigenvalues.push(1.0 / mu);
                        let mut nb2 = 0.0;
                        for i in 0..n {
                            nb2 += x[(i, j)] * bx[(i, j)];
                        }
                        let scale = 1.0 / nb2.sqrt();
                        for i in 0..n {
                            eigenvectors[(i, j)] = x[(i, j)] * scale;
                        }
                        fix_sign(&mut eigenvectors, j);
                    }
                    return Ok(Spectrum {
                        eigenvalues,
                        eigenvectors,
                        n_infinite: p.n_infinite,
                    });
                }
            }
            prev_wanted = wanted;
        }

        // --- restart if the basis is full ---
        if m + block > max_basis {
            let keep = keep_size.min(m);
            let mut ykeep = Mat::zeros(m, keep);
            let mut tkeep = Vec::with_capacity(keep);
            for j in 0..keep {
                let idx = m - 1 - j;
                tkeep.push(theta[idx]);
                for i in 0..m {
                    ykeep[(i, j)] = y[(i, idx)];
                }
            }
            let qnew = q.as_ref().subcols(0, m) * &ykeep; // n×keep
            // refresh A-orthonormality against roundoff drift
            let aq = sparse_matvec(&p.a, &qnew);
            let g = gram(qnew.as_ref(), &aq);
            match g.llt(Side::Lower) {
                Ok(gllt) => {
                    // Qnew ← Qnew R⁻¹ with G = RᵀR: H ← R⁻ᵀ H R⁻¹ keeps H = QᵀBQ
                    let r = gllt.L().transpose().to_owned(); // upper
                    let mut qt = qnew.transpose().to_owned(); // keep×n
                    r.transpose().solve_lower_triangular_in_place(&mut qt);
                    let qn = qt.transpose().to_owned();
                    for j in 0..keep {
                        for i in 0..n {
                            q[(i, j)] = qn[(i, j)];
                        }
                    }
                    // H on the kept Ritz vectors is diag(θ); transform it
                    let mut hk = Mat::zeros(keep, keep);
                    for i in 0..keep {
                        hk[(i, i)] = tkeep[i];
                    }
                    // H ← R⁻ᵀ H R⁻¹: solve from both sides
                    let mut tmp = hk;
                    r.transpose().solve_lower_triangular_in_place(&mut tmp); // R⁻ᵀ H
                    let mut tmpt = tmp.transpose().to_owned();
                    r.transpose().solve_lower_triangular_in_place(&mut tmpt); // R⁻ᵀ (R⁻ᵀ H)ᵀ
                    let hnew = tmpt.transpose().to_owned();
                    for j in 0..keep {
                        for i in 0..keep {
                            h[(i, j)] = hnew[(i, j)];
                        }
                    }
                }
                Err(_) => {
                    // extremely ill-conditioned restart basis: keep as-is
                    for j in 0..keep {
                        for i in 0..n {
                            q[(i, j)] = qnew[(i, j)];
                        }
                    }
                    let mut hk = Mat::zeros(keep, keep);
                    for i in 0..keep {
                        hk[(i, i)] = tkeep[i];
                    }
                    for j in 0..keep {
                        for i in 0..keep {
                            h[(i, j)] = hk[(i, j)];
                        }
                    }
                }
            }
            m = keep;
            // rebuild the expansion block from the best current Ritz vectors
            let xw = q.as_ref().subcols(0, block.min(m)).to_owned();
            z = apply(&xw);
            prev_wanted.clear();
            continue;
        }

        // --- next expansion block: operator applied to the freshest
        // *unconverged* Ritz vectors (Krylov continuation); converged
        // directions are skipped so the block keeps making progress ---
        let take = block.min(m);
        let mut chosen: Vec<usize> = Vec::with_capacity(take);
        for j in 0..m {
            let unconverged = j >= k || !pair_ok[j];
            if unconverged {
                chosen.push(m - 1 - j);
                if chosen.len() == take {
                    break;
                }
            }
        }
        for j in 0..m {
            if chosen.len() == take {
                break;
            }
            let idx = m - 1 - j;
            if !chosen.contains(&idx) {
                chosen.push(idx);
            }
        }
        let mut yw = Mat::zeros(m, chosen.len());
        for (jj, &idx) in chosen.iter().enumerate() {
            for i in 0..m {
                yw[(i, jj)] = y[(i, idx)];
            }
        }
        let xw = q.as_ref().subcols(0, m) * &yw;
        z = apply(&xw);
    }

    Err(EigenError::NoConvergence {
        iters: last_iter + 1,
        converged: converged_count,
        k,
    })
}

/// Orthonormalizes the columns of `z` against `q` and internally, all in the
/// `A` inner product.  Returns the number of independent columns kept
/// (compacted to the front of `z`).  The Rayleigh–Ritz step relies on
/// `QᵀAQ = I` holding to near machine precision, so this routine iterates
/// projection + whitening until the combined Gram matrix verifies, dropping
/// directions that fall below the relative rank cutoff.
fn a_orthonormalize(
    a: &SparseColMat<usize, f64>,
    q: MatRef<'_, f64>,
    z: &mut Mat<f64>,
) -> usize {
    let n = z.nrows();
    let m = q.ncols();
    for _round in 0..4 {
        let nb = z.ncols();
        if nb == 0 {
            return 0;
        }
        // block Gram–Schmidt against Q
        if m > 0 {
            let az = a * &*z;
            let c = q.transpose() * &az; // m×nb
            let corr = q * &c; // n×nb
            for j in 0..nb {
                for i in 0..n {
                    z[(i, j)] -= corr[(i, j)];
                }
            }
        }
        // internal whitening via the Gram matrix eigendecomposition
        let az = a * &*z;
        let g = z.transpose() * &az; // nb×nb, PSD
        let Ok(evd) = g.self_adjoint_eigen(Side::Lower) else {
            return 0;
        };
        let s = evd.S().column_vector();
        let smax = s[nb - 1].max(0.0);
        if !(smax > 0.0) {
            return 0;
        }
        let tol = smax * 1e-8;
        let kept: Vec<usize> = (0..nb).filter(|&i| s[i] > tol).collect();
        let u = evd.U();
        let mut t = Mat::zeros(nb, kept.len());
        for (jj, &idx) in kept.iter().enumerate() {
            let scale = 1.0 / s[idx].sqrt();
            for i in 0..nb {
                t[(i, jj)] = u[(i, idx)] * scale;
            }
        }
        *z = &*z * &t;
        // verify: the new columns must be orthonormal and orthogonal to Q
        let kn = z.ncols();
        if kn == 0 {
            return 0;
        }
        let az = a * &*z;
        let gzz = z.transpose() * &az;
        let mut err = 0.0f64;
        for i in 0..kn {
            for j in 0..kn {
                let want = if i == j { 1.0 } else { 0.0 };
                err = err.max((gzz[(i, j)] - want).abs());
            }
        }
        if m > 0 {
            let gqz = q.transpose() * &az;
            for i in 0..m {
                for j in 0..kn {
                    err = err.max(gqz[(i, j)].abs());
                }
            }
        }
        if err < 1e-12 {
            return kn;
        }
    }
    // verification kept failing: reject the block rather than pollute Q
    0
}

/// Result of [`dense_generalized_psd`].
pub struct PsdSolve {
    /// Generalized eigenvalues on the detected range of `B`, ascending.
    pub values: Vec<f64>,
    /// `n × rank`, `B`-orthonormal columns spanning the solved subspace.
    pub vectors: Mat<f64>,
    /// Numerical rank of `B`.
    pub rank: usize,
}

/// Dense generalized symmetric eigensolve `A x = μ B x` for small pencils
/// where **both** sides may be only positive semidefinite.  The problem is
/// restricted to the numerical range of `B` (eigenvalues above
/// `rank_rel_tol · max(diag B)`), which is the natural setting for
/// Rayleigh–Ritz matrices built from possibly linearly dependent families.
pub fn dense_generalized_psd(
    a: &Mat<f64>,
    b: &Mat<f64>,
    rank_rel_tol: f64,
) -> Result<PsdSolve, EigenError> {
    set_deterministic_parallelism();
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    assert_eq!(b.nrows(), n);
    assert_eq!(b.ncols(), n);
    if n == 0 {
        return Ok(PsdSolve {
            values: Vec::new(),
            vectors: Mat::zeros(0, 0),
            rank: 0,
        });
    }
    let evd = b
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| EigenError::Factorization(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let mut diag_max = 0.0f64;
    for i in 0..n {
        diag_max = diag_max.max(b[(i, i)]);
    }
    let tol = diag_max * rank_rel_tol;
    let kept: Vec<usize> = (0..n).filter(|&i| s[i] > tol).collect();
    let rank = kept.len();
    if rank == 0 {
        return Ok(PsdSolve {
            values: Vec::new(),
            vectors: Mat::zeros(n, 0),
            rank: 0,
        });
    }
    let u = evd.U();
    let mut w = Mat::zeros(n, rank); // B-whitening basis
    for (jj, &idx) in kept.iter().enumerate() {
        let scale = 1.0 / s[idx].sqrt();
        for i in 0..n {
            w[(i, jj)] = u[(i, idx)] * scale;
        }
    }
    let aw = a * &w;
    let c = w.transpose() * &aw; // rank×rank
    let cev = c
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| EigenError::Factorization(format!("{e:?}")))?;
    let cs = cev.S().column_vector();
    let values: Vec<f64> = (0..rank).map(|i| cs[i]).collect();
    let vectors = &w * cev.U();
    Ok(PsdSolve {
        values,
        vectors,
        rank,
    })
}
