//! Real embedding of complex Hermitian problems.
//!
//! A Hermitian coefficient `A = P + iQ` becomes the real symmetric matrix
//! `[[P, -Q], [Q, P]] / 2` of twice the dimension. The halving makes every
//! inner product `Tr(A X)` carry over unchanged, so right-hand sides, dual
//! multipliers, and objective values need no rescaling; only the dual slack
//! doubles on the way back. Inequalities gain one nonnegative slack variable
//! each, and every row is scaled by `1 / max(1, ||row||)` so the interior
//! point iteration sees data of comparable magnitude (duals are unscaled on
//! assembly).

use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use super::{residual_report, ResidualReport, SdpProblem, SdpSolution, Sense, SolveStatus};
use crate::linalg::HermitianMatrix;
use crate::C64;

pub(crate) struct RealRow {
    /// Sparse block coefficients: (block index, real symmetric matrix).
    pub blocks: Vec<(usize, DMatrix<f64>)>,
    /// Sparse orthant coefficients: (coordinate index, value).
    pub orth: Vec<(usize, f64)>,
}

pub(crate) struct RealForm {
    /// Real block dimensions (twice the complex ones).
    pub block_dims: Vec<usize>,
    pub c_blocks: Vec<DMatrix<f64>>,
    /// Orthant costs: problem scalars first, then one zero per slack.
    pub c_orth: Vec<f64>,
    pub n_scalars: usize,
    pub rows: Vec<RealRow>,
    pub b: Vec<f64>,
    /// Per-row scale factor applied to the data; original dual = factor * raw dual.
    pub row_scale: Vec<f64>,
    pub senses: Vec<Sense>,
}

fn embed_herm(h: &HermitianMatrix) -> DMatrix<f64> {
    let n = h.dim();
    let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h.get(i, j);
            let re = z.re / 2.0;
            let im = z.im / 2.0;
            m[(i, j)] = re;
            m[(i + n, j + n)] = re;
            m[(i, j + n)] = -im;
            m[(i + n, j)] = im;
        }
    }
    m
}

/// Inverse of [`embed_herm`] up to projection: averages the two real copies
/// and antisymmetrizes the imaginary part, which is exact for any real
/// matrix in the embedded subspace and an orthogonal projection otherwise.
fn backmap(m: &DMatrix<f64>, n: usize) -> HermitianMatrix {
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let re = (m[(i, j)] + m[(i + n, j + n)]) / 2.0;
            let im = (m[(i + n, j)] - m[(i, j + n)]) / 2.0;
            entries.push(C64::new(re, im));
        }
    }
    HermitianMatrix::projected(n, entries).expect("backmap entries are finite by construction")
}

impl RealForm {
    pub(crate) fn build(p: &SdpProblem) -> Self {
        let block_dims: Vec<usize> = (0..p.n_blocks()).map(|b| 2 * p.block_dim(b)).collect();
        let c_blocks: Vec<DMatrix<f64>> = (0..p.n_blocks())
            .map(|b| DMatrix::identity(block_dims[b], block_dims[b]) * (p.block_weight(b) / 2.0))
            .collect();

        let n_ineq = p
            .constraints()
            .iter()
            .filter(|c| c.sense != Sense::Eq)
            .count();
        let mut c_orth = Vec::with_capacity(p.n_scalars() + n_ineq);
        for s in 0..p.n_scalars() {
            c_orth.push(p.scalar_weight(s));
        }
        c_orth.extend(core::iter::repeat(0.0).take(n_ineq));

        let mut rows = Vec::with_capacity(p.n_constraints());
        let mut b = Vec::with_capacity(p.n_constraints());
        let mut row_scale = Vec::with_capacity(p.n_constraints());
        let mut senses = Vec::with_capacity(p.n_constraints());
        let mut next_slack = p.n_scalars();

        for c in p.constraints() {
            let mut blocks: Vec<(usize, DMatrix<f64>)> = c
                .block_terms
                .iter()
                .map(|(bi, coeff)| (*bi, embed_herm(coeff)))
                .collect();
            let mut orth: Vec<(usize, f64)> =
                c.scalar_terms.iter().map(|(si, coeff)| (*si, *coeff)).collect();

            let norm_sq: f64 = blocks
                .iter()
                .map(|(_, m)| m.iter().map(|v| v * v).sum::<f64>())
                .sum::<f64>()
                + orth.iter().map(|(_, a)| a * a).sum::<f64>();
            let scale = 1.0 / norm_sq.sqrt().max(1.0);
            for (_, m) in &mut blocks {
                *m *= scale;
            }
            for (_, a) in &mut orth {
                *a *= scale;
            }

            match c.sense {
                Sense::Ge => {
                    orth.push((next_slack, -1.0));
                    next_slack += 1;
                }
                Sense::Le => {
                    orth.push((next_slack, 1.0));
                    next_slack += 1;
                }
                Sense::Eq => {}
            }

            rows.push(RealRow { blocks, orth });
            b.push(c.rhs * scale);
            row_scale.push(scale);
            senses.push(c.sense);
        }

        RealForm {
            block_dims,
            c_blocks,
            c_orth,
            n_scalars: p.n_scalars(),
            rows,
            b,
            row_scale,
            senses,
        }
    }
}

pub(crate) struct RawOutcome {
    pub status: SolveStatus,
    pub x_blocks: Vec<DMatrix<f64>>,
    pub orth: Vec<f64>,
    pub y: Vec<f64>,
    pub s_blocks: Vec<DMatrix<f64>>,
    pub iterations: usize,
}

pub(crate) fn assemble(p: &SdpProblem, form: &RealForm, raw: RawOutcome) -> SdpSolution {
    let blocks: Vec<HermitianMatrix> = raw
        .x_blocks
        .iter()
        .enumerate()
        .map(|(b, x)| backmap(x, p.block_dim(b)))
        .collect();
    let dual_blocks: Vec<HermitianMatrix> = raw
        .s_blocks
        .iter()
        .enumerate()
        .map(|(b, s)| backmap(s, p.block_dim(b)).scaled(2.0))
        .collect();
    let scalars: Vec<f64> = raw.orth[..form.n_scalars].to_vec();

    let duals: Vec<f64> = raw
        .y
        .iter()
        .zip(&form.row_scale)
        .zip(&form.senses)
        .map(|((y, scale), sense)| {
            let unscaled = y * scale;
            match sense {
                Sense::Le => -unscaled,
                Sense::Eq | Sense::Ge => unscaled,
            }
        })
        .collect();

    let objective = if raw.status == SolveStatus::Optimal {
        p.objective_value(&blocks, &scalars)
    } else {
        f64::NAN
    };

    let mut sol = SdpSolution {
        status: raw.status,
        objective,
        blocks,
        scalars,
        duals,
        dual_blocks,
        iterations: raw.iterations,
        residuals: ResidualReport {
            max_primal_violation: f64::NAN,
            per_constraint_violation: Vec::new(),
            min_block_eig: f64::NAN,
            duality_gap: f64::NAN,
            max_complementarity: f64::NAN,
        },
    };
    sol.residuals = residual_report(p, &sol);
    sol
}
