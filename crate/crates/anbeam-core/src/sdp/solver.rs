//! Primal-dual interior-point iteration on the real embedded form.
//!
//! Infeasible-start path following with a Mehrotra predictor-corrector step.
//! The cone is a product of real symmetric PSD blocks and a nonnegative
//! orthant (problem scalars plus inequality slacks). Each iteration forms the
//! dense Schur complement `M[i][j] = Tr(A_i X A_j S^-1) + sum_t a_it a_jt
//! w_t/z_t`, factors it once, and reuses the factorization for both the
//! affine and the corrected step. Steps are damped to a 0.98 fraction of the
//! distance to the cone boundary, taken separately for the primal and dual
//! variables.
//!
//! Termination: once primal residual, dual residual, and relative gap meet
//! the requested tolerances the iteration keeps polishing while the gap
//! improves, then returns the best iterate seen (smallest worst-case
//! measure). Divergence of `b . y` against a vanishing dual residual ray is
//! reported as primal infeasibility; the mirrored test on `C . X` as
//! unboundedness. Anything else that halts progress returns
//! `NumericalFailure` with the best iterate for diagnosis.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

#[allow(unused_imports)]
use num_traits::Float;

use super::embed::{RawOutcome, RealForm};
use super::{SolveOptions, SolveStatus};

const FRACTION_TO_BOUNDARY: f64 = 0.98;
/// Relative gap the polish phase aims for once the caller's tolerances hold.
const POLISH_GAP: f64 = 1e-11;
const MAX_POLISH_ROUNDS: usize = 12;
/// Certificate ratio for declaring infeasibility mid-run / at bailout.
const CERT_RATIO: f64 = 1e-8;
const CERT_RATIO_RELAXED: f64 = 1e-6;
const STALL_STEP: f64 = 1e-8;
const STALL_LIMIT: usize = 3;

#[derive(Clone)]
struct Iterate {
    x: Vec<DMatrix<f64>>,
    w: Vec<f64>,
    y: Vec<f64>,
    s: Vec<DMatrix<f64>>,
    z: Vec<f64>,
}

struct Measures {
    pinf: f64,
    dinf: f64,
    relgap: f64,
    score: f64,
}

/// `sum_pq a[p,q] u[q,p]`, i.e. `Tr(a u)` without forming the product.
fn trace_prod(a: &DMatrix<f64>, u: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for p in 0..n {
        for q in 0..n {
            acc += a[(p, q)] * u[(q, p)];
        }
    }
    acc
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = (m[(i, j)] + m[(j, i)]) / 2.0;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Cholesky with escalating diagonal shifts; `None` only on hopeless input.
fn chol_shifted(m: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(m.clone()) {
        return Some(c);
    }
    let n = m.nrows();
    let shift_base = (m.diagonal().amax()).max(1e-300);
    let mut shift = 1e-14 * shift_base;
    for _ in 0..4 {
        let shifted = m + DMatrix::identity(n, n) * shift;
        if let Some(c) = Cholesky::new(shifted) {
            return Some(c);
        }
        shift *= 1e3;
    }
    None
}

/// Largest `alpha` with `mat + alpha * delta` still PSD (`inf` if unbounded).
fn psd_maxstep(mat: &DMatrix<f64>, delta: &DMatrix<f64>) -> f64 {
    let chol = match chol_shifted(mat) {
        Some(c) => c,
        None => return 0.0,
    };
    let l = chol.l();
    let t1 = match l.solve_lower_triangular(delta) {
        Some(t) => t,
        None => return 0.0,
    };
    let mut wmat = match l.solve_lower_triangular(&t1.transpose()) {
        Some(t) => t,
        None => return 0.0,
    };
    symmetrize(&mut wmat);
    let lambda_min = wmat
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |acc, v| acc.min(*v));
    if lambda_min >= -1e-13 {
        f64::INFINITY
    } else {
        1.0 / (-lambda_min)
    }
}

fn orth_maxstep(w: &[f64], dw: &[f64]) -> f64 {
    let mut alpha = f64::INFINITY;
    for (wt, dt) in w.iter().zip(dw) {
        if *dt < 0.0 {
            alpha = alpha.min(-wt / dt);
        }
    }
    alpha
}

/// (primal infeasibility ratio, dual infeasibility ratio); smaller is a
/// stronger certificate. See module docs.
fn certificate_ratios(form: &RealForm, it: &Iterate) -> (f64, f64) {
    let bty: f64 = form.b.iter().zip(&it.y).map(|(b, y)| b * y).sum();
    let mut aty_max = 0.0f64;
    for (b, s) in it.s.iter().enumerate() {
        let mut acc = s.clone();
        for (i, row) in form.rows.iter().enumerate() {
            for (bi, coeff) in &row.blocks {
                if *bi == b {
                    acc += coeff * it.y[i];
                }
            }
        }
        aty_max = aty_max.max(max_abs(&acc));
    }
    for t in 0..form.c_orth.len() {
        let mut acc = it.z[t];
        for (i, row) in form.rows.iter().enumerate() {
            for (ti, a) in &row.orth {
                if *ti == t {
                    acc += a * it.y[i];
                }
            }
        }
        aty_max = aty_max.max(acc.abs());
    }
    let infeas = if bty > 1e-300 { aty_max / bty } else { f64::INFINITY };

    let cx: f64 = form
        .c_blocks
        .iter()
        .zip(&it.x)
        .map(|(c, x)| c.dot(x))
        .sum::<f64>()
        + form.c_orth.iter().zip(&it.w).map(|(c, w)| c * w).sum::<f64>();
    let mut ax_max = 0.0f64;
    for row in &form.rows {
        let mut acc = 0.0;
        for (bi, coeff) in &row.blocks {
            acc += coeff.dot(&it.x[*bi]);
        }
        for (ti, a) in &row.orth {
            acc += a * it.w[*ti];
        }
        ax_max = ax_max.max(acc.abs());
    }
    let unbounded = if cx < -1e-300 { ax_max / -cx } else { f64::INFINITY };
    (infeas, unbounded)
}

pub(crate) fn run(form: &RealForm, opts: &SolveOptions) -> RawOutcome {
    let m = form.rows.len();
    let nb = form.block_dims.len();
    let q = form.c_orth.len();
    let nu: f64 = form.block_dims.iter().sum::<usize>() as f64 + q as f64;
    let n_tot = nu;
    let b_max = form.b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let c_max = form
        .c_blocks
        .iter()
        .map(max_abs)
        .fold(0.0f64, f64::max)
        .max(form.c_orth.iter().fold(0.0f64, |acc, v| acc.max(v.abs())));

    // Index of constraints touching each block / orthant coordinate.
    let mut block_rows: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nb];
    let mut coord_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); q];
    for (i, row) in form.rows.iter().enumerate() {
        for (pos, (bi, _)) in row.blocks.iter().enumerate() {
            block_rows[*bi].push((i, pos));
        }
        for (ti, a) in &row.orth {
            coord_rows[*ti].push((i, *a));
        }
    }

    let xi_p = 10.0f64.max(n_tot.sqrt()).max(b_max);
    let xi_d = 10.0f64.max(n_tot.sqrt()).max(c_max);
    let mut it = Iterate {
        x: form
            .block_dims
            .iter()
            .map(|&d| DMatrix::identity(d, d) * xi_p)
            .collect(),
        w: vec![xi_p; q],
        y: vec![0.0; m],
        s: form
            .block_dims
            .iter()
            .map(|&d| DMatrix::identity(d, d) * xi_d)
            .collect(),
        z: vec![xi_d; q],
    };

    let mut best = it.clone();
    let mut best_score = f64::INFINITY;
    let mut best_meets_spec = false;
    let mut polish_rounds = 0usize;
    let mut prev_relgap = f64::INFINITY;
    let mut stall_count = 0usize;
    let mut iterations = 0usize;

    for iter in 0..opts.max_iterations {
        iterations = iter;

        // Residuals at the current point.
        let mut rd_blocks: Vec<DMatrix<f64>> = Vec::with_capacity(nb);
        for b in 0..nb {
            let mut rd = &form.c_blocks[b] - &it.s[b];
            for (i, pos) in &block_rows[b] {
                rd -= &form.rows[*i].blocks[*pos].1 * it.y[*i];
            }
            rd_blocks.push(rd);
        }
        let mut rd_orth = vec![0.0f64; q];
        for t in 0..q {
            let mut v = form.c_orth[t] - it.z[t];
            for (i, a) in &coord_rows[t] {
                v -= a * it.y[*i];
            }
            rd_orth[t] = v;
        }
        let mut ax = vec![0.0f64; m];
        for (i, row) in form.rows.iter().enumerate() {
            let mut acc = 0.0;
            for (bi, coeff) in &row.blocks {
                acc += coeff.dot(&it.x[*bi]);
            }
            for (ti, a) in &row.orth {
                acc += a * it.w[*ti];
            }
            ax[i] = acc;
        }
        let pinf = form
            .b
            .iter()
            .zip(&ax)
            .map(|(b, a)| (b - a).abs())
            .fold(0.0f64, f64::max)
            / (1.0 + b_max);
        let dinf = rd_blocks
            .iter()
            .map(max_abs)
            .fold(0.0f64, f64::max)
            .max(rd_orth.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
            / (1.0 + c_max);
        let pobj: f64 = form
            .c_blocks
            .iter()
            .zip(&it.x)
            .map(|(c, x)| c.dot(x))
            .sum::<f64>()
            + form.c_orth.iter().zip(&it.w).map(|(c, w)| c * w).sum::<f64>();
        let dobj: f64 = form.b.iter().zip(&it.y).map(|(b, y)| b * y).sum();
        let gap_inner: f64 = it
            .x
            .iter()
            .zip(&it.s)
            .map(|(x, s)| x.dot(s))
            .sum::<f64>()
            + it.w.iter().zip(&it.z).map(|(w, z)| w * z).sum::<f64>();
        let mu = gap_inner / nu;
        let relgap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let meas = Measures { pinf, dinf, relgap, score: pinf.max(dinf).max(relgap) };

        let meets_spec =
            meas.pinf <= opts.feas_tol && meas.dinf <= opts.feas_tol && meas.relgap <= opts.gap_tol;
        if meas.score < best_score {
            best_score = meas.score;
            best = it.clone();
            best_meets_spec = meets_spec;
        }

        if meets_spec {
            polish_rounds += 1;
            let improving = meas.relgap < prev_relgap * 0.7;
            if meas.relgap <= POLISH_GAP || polish_rounds >= MAX_POLISH_ROUNDS || !improving {
                return RawOutcome {
                    status: SolveStatus::Optimal,
                    x_blocks: best.x,
                    orth: best.w,
                    y: best.y,
                    s_blocks: best.s,
                    iterations: iterations + 1,
                };
            }
        }
        prev_relgap = meas.relgap;

        let (infeas_ratio, unbnd_ratio) = certificate_ratios(form, &it);
        if infeas_ratio <= CERT_RATIO {
            return finish(SolveStatus::Infeasible, it, iterations + 1);
        }
        if unbnd_ratio <= CERT_RATIO {
            return finish(SolveStatus::Unbounded, it, iterations + 1);
        }
        if mu <= 1e-300 {
            break;
        }

        // Factor the cone variables.
        let mut sinv: Vec<DMatrix<f64>> = Vec::with_capacity(nb);
        let mut factor_failed = false;
        for b in 0..nb {
            match chol_shifted(&it.s[b]) {
                Some(c) => sinv.push(c.inverse()),
                None => {
                    factor_failed = true;
                    break;
                }
            }
        }
        if factor_failed {
            break;
        }

        // Schur complement and constraint-side quantities.
        let mut m_mat = DMatrix::<f64>::zeros(m, m);
        let mut asinv = vec![0.0f64; m];
        let mut ard = vec![0.0f64; m];
        for b in 0..nb {
            let touching = &block_rows[b];
            if touching.is_empty() {
                continue;
            }
            let xrs = &it.x[b] * &rd_blocks[b] * &sinv[b];
            let u_mats: Vec<DMatrix<f64>> = touching
                .iter()
                .map(|(i, pos)| &it.x[b] * &form.rows[*i].blocks[*pos].1 * &sinv[b])
                .collect();
            for (ii, (i, pos_i)) in touching.iter().enumerate() {
                let a_i = &form.rows[*i].blocks[*pos_i].1;
                asinv[*i] += a_i.dot(&sinv[b]);
                ard[*i] += trace_prod(a_i, &xrs);
                for (jj, (j, _)) in touching.iter().enumerate().take(ii + 1) {
                    m_mat[(*i, *j)] += trace_prod(a_i, &u_mats[jj]);
                }
            }
        }
        for t in 0..q {
            let wz = it.w[t] / it.z[t];
            for (ii, (i, a_i)) in coord_rows[t].iter().enumerate() {
                asinv[*i] += a_i / it.z[t];
                ard[*i] += a_i * wz * rd_orth[t];
                for (j, a_j) in coord_rows[t].iter().take(ii + 1).map(|(j, a)| (*j, *a)) {
                    m_mat[(*i, j)] += a_i * a_j * wz;
                }
            }
        }
        for r in 0..m {
            for c in (r + 1)..m {
                m_mat[(r, c)] = m_mat[(c, r)];
            }
        }
        let chol_m = match chol_shifted(&m_mat) {
            Some(c) => c,
            None => {
                break;
            }
        };

        let solve_dy = |rhs: &[f64]| -> Vec<f64> {
            if rhs.is_empty() {
                return Vec::new();
            }
            chol_m.solve(&DVector::from_column_slice(rhs)).iter().copied().collect()
        };
        let dual_dirs = |dy: &[f64]| -> (Vec<DMatrix<f64>>, Vec<f64>) {
            let mut ds: Vec<DMatrix<f64>> = rd_blocks.clone();
            for b in 0..nb {
                for (i, pos) in &block_rows[b] {
                    ds[b] -= &form.rows[*i].blocks[*pos].1 * dy[*i];
                }
            }
            let mut dz = rd_orth.clone();
            for t in 0..q {
                for (i, a) in &coord_rows[t] {
                    dz[t] -= a * dy[*i];
                }
            }
            (ds, dz)
        };

        // Predictor (affine) direction.
        let rhs_aff: Vec<f64> = (0..m).map(|i| form.b[i] + ard[i]).collect();
        let dy_aff = solve_dy(&rhs_aff);
        let (ds_aff, dz_aff) = dual_dirs(&dy_aff);
        let mut dx_aff: Vec<DMatrix<f64>> = Vec::with_capacity(nb);
        for b in 0..nb {
            let mut d = -&it.x[b] - &it.x[b] * &ds_aff[b] * &sinv[b];
            symmetrize(&mut d);
            dx_aff.push(d);
        }
        let dw_aff: Vec<f64> = (0..q)
            .map(|t| -it.w[t] - it.w[t] / it.z[t] * dz_aff[t])
            .collect();

        let alpha_aff_p = (0..nb)
            .map(|b| psd_maxstep(&it.x[b], &dx_aff[b]))
            .fold(f64::INFINITY, f64::min)
            .min(orth_maxstep(&it.w, &dw_aff))
            .min(1.0);
        let alpha_aff_d = (0..nb)
            .map(|b| psd_maxstep(&it.s[b], &ds_aff[b]))
            .fold(f64::INFINITY, f64::min)
            .min(orth_maxstep(&it.z, &dz_aff))
            .min(1.0);
        let mut gap_aff = 0.0f64;
        for b in 0..nb {
            let xa = &it.x[b] + &dx_aff[b] * alpha_aff_p;
            let sa = &it.s[b] + &ds_aff[b] * alpha_aff_d;
            gap_aff += xa.dot(&sa);
        }
        for t in 0..q {
            gap_aff +=
                (it.w[t] + alpha_aff_p * dw_aff[t]) * (it.z[t] + alpha_aff_d * dz_aff[t]);
        }
        let mu_aff = (gap_aff / nu).max(0.0);
        let sigma = (mu_aff / mu).powi(3).clamp(1e-12, 1.0);
        let sigma_mu = sigma * mu;

        // Corrected direction.
        let g_blocks: Vec<DMatrix<f64>> = (0..nb)
            .map(|b| &dx_aff[b] * &ds_aff[b] * &sinv[b])
            .collect();
        let g_orth: Vec<f64> = (0..q).map(|t| dw_aff[t] * dz_aff[t] / it.z[t]).collect();
        let mut rhs: Vec<f64> = (0..m)
            .map(|i| form.b[i] - sigma_mu * asinv[i] + ard[i])
            .collect();
        for b in 0..nb {
            for (i, pos) in &block_rows[b] {
                rhs[*i] += trace_prod(&form.rows[*i].blocks[*pos].1, &g_blocks[b]);
            }
        }
        for t in 0..q {
            for (i, a) in &coord_rows[t] {
                rhs[*i] += a * g_orth[t];
            }
        }
        let dy = solve_dy(&rhs);
        let (ds, dz) = dual_dirs(&dy);
        let mut dx: Vec<DMatrix<f64>> = Vec::with_capacity(nb);
        for b in 0..nb {
            let mut d = &sinv[b] * sigma_mu
                - &it.x[b]
                - &it.x[b] * &ds[b] * &sinv[b]
                - &g_blocks[b];
            symmetrize(&mut d);
            dx.push(d);
        }
        let dw: Vec<f64> = (0..q)
            .map(|t| (sigma_mu - it.w[t] * it.z[t]) / it.z[t] - g_orth[t] - it.w[t] / it.z[t] * dz[t])
            .collect();

        let alpha_p = ((0..nb)
            .map(|b| psd_maxstep(&it.x[b], &dx[b]))
            .fold(f64::INFINITY, f64::min)
            .min(orth_maxstep(&it.w, &dw))
            * FRACTION_TO_BOUNDARY)
            .min(1.0);
        let alpha_d = ((0..nb)
            .map(|b| psd_maxstep(&it.s[b], &ds[b]))
            .fold(f64::INFINITY, f64::min)
            .min(orth_maxstep(&it.z, &dz))
            * FRACTION_TO_BOUNDARY)
            .min(1.0);

        if alpha_p.max(alpha_d) < STALL_STEP {
            stall_count += 1;
            if stall_count >= STALL_LIMIT {
                break;
            }
        } else {
            stall_count = 0;
        }

        for b in 0..nb {
            it.x[b] += &dx[b] * alpha_p;
            symmetrize(&mut it.x[b]);
            it.s[b] += &ds[b] * alpha_d;
            symmetrize(&mut it.s[b]);
        }
        for t in 0..q {
            it.w[t] += alpha_p * dw[t];
            it.z[t] += alpha_d * dz[t];
        }
        for (yi, dyi) in it.y.iter_mut().zip(&dy) {
            *yi += alpha_d * dyi;
        }

        let finite = it.x.iter().chain(&it.s).all(|mat| mat.iter().all(|v| v.is_finite()))
            && it.w.iter().chain(&it.z).chain(&it.y).all(|v| v.is_finite());
        if !finite {
            break;
        }
    }

    // Ran out of iterations or progress: classify from the best iterate.
    if best_meets_spec {
        return finish(SolveStatus::Optimal, best, iterations + 1);
    }
    let (infeas_ratio, unbnd_ratio) = certificate_ratios(form, &best);
    let status = if infeas_ratio <= CERT_RATIO_RELAXED {
        SolveStatus::Infeasible
    } else if unbnd_ratio <= CERT_RATIO_RELAXED {
        SolveStatus::Unbounded
    } else {
        SolveStatus::NumericalFailure
    };
    finish(status, best, iterations + 1)
}

fn finish(status: SolveStatus, it: Iterate, iterations: usize) -> RawOutcome {
    RawOutcome {
        status,
        x_blocks: it.x,
        orth: it.w,
        y: it.y,
        s_blocks: it.s,
        iterations,
    }
}
