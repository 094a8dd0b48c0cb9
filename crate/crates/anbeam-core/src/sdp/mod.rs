//! A small dense semidefinite-programming layer.
//!
//! Problems are stated over named complex Hermitian PSD blocks plus named
//! nonnegative real scalars:
//!
//! ```text
//! minimize    sum_b  c_b Tr(X_b)  +  sum_s  d_s u_s
//! subject to  sum_b Tr(A_ib X_b) + sum_s a_is u_s  (<=|=|>=)  rhs_i
//!             X_b >= 0 (PSD),  u_s >= 0
//! ```
//!
//! The solver embeds each complex block as a real symmetric block (doubling
//! its dimension), converts inequalities to equalities with slack variables,
//! and runs a primal-dual interior-point method with a predictor-corrector
//! step. That machinery is internal; callers see complex blocks in, complex
//! blocks out.
//!
//! Sizing assumptions: block dimensions in the tens and constraint counts in
//! the tens. Everything is dense and deterministic.
//!
//! Conventions worth pinning down:
//!
//! * `duals` carries one multiplier per constraint, sign-normalized so that
//!   a multiplier is `>= 0` for its inequality's natural direction (for `=`
//!   rows the raw value is reported). The dual objective is then
//!   `sum_i sign_i * duals[i] * rhs_i` with `sign_i = -1` for `<=` rows.
//! * `dual_blocks` is the solver's dual slack certificate `S_b`: at an
//!   optimum, `S_b ~ C_b - sum_i y_i A_ib >= 0` and `Tr(S_b X_b) ~ 0`.
//! * [`residual_report`] recomputes every figure of merit from the problem
//!   data and the returned iterate, so tests never have to trust the
//!   solver's own bookkeeping.

mod embed;
mod solver;

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{frob_inner, HermitianMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
    Ge,
}

/// One linear constraint. Terms reference blocks and scalars by index; a
/// block may appear at most once per constraint.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    pub sense: Sense,
    pub rhs: f64,
    pub block_terms: Vec<(usize, HermitianMatrix)>,
    pub scalar_terms: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdpError {
    #[error("problem has no variables")]
    NoVariables,
    #[error("constraint {name:?} references unknown variable index {index}")]
    UnknownIndex { name: String, index: usize },
    #[error("constraint {name:?} has a coefficient of dimension {got} for a block of dimension {want}")]
    BlockDimMismatch { name: String, want: usize, got: usize },
    #[error("constraint {name:?} contains non-finite data")]
    NonFinite { name: String },
    #[error("constraint {name:?} has no terms")]
    EmptyConstraint { name: String },
    #[error("constraint {name:?} repeats a variable")]
    RepeatedTerm { name: String },
    #[error("objective contains non-finite weights")]
    NonFiniteObjective,
}

/// Conic problem container; build with [`SdpProblem::new`] + `add_*`.
#[derive(Debug, Clone, Default)]
pub struct SdpProblem {
    block_names: Vec<String>,
    block_dims: Vec<usize>,
    obj_block_weights: Vec<f64>,
    scalar_names: Vec<String>,
    obj_scalar_weights: Vec<f64>,
    constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a PSD block of complex dimension `dim` whose trace enters the
    /// objective with weight `trace_weight`. Returns the block index.
    pub fn add_block(&mut self, name: &str, dim: usize, trace_weight: f64) -> usize {
        assert!(dim >= 1, "blocks must have dimension at least one");
        self.block_names.push(String::from(name));
        self.block_dims.push(dim);
        self.obj_block_weights.push(trace_weight);
        self.block_dims.len() - 1
    }

    /// Adds a nonnegative scalar with objective weight `weight`; returns its index.
    pub fn add_scalar(&mut self, name: &str, weight: f64) -> usize {
        self.scalar_names.push(String::from(name));
        self.obj_scalar_weights.push(weight);
        self.scalar_names.len() - 1
    }

    pub fn add_constraint(&mut self, c: Constraint) -> Result<usize, SdpError> {
        self.check_constraint(&c)?;
        self.constraints.push(c);
        Ok(self.constraints.len() - 1)
    }

    fn check_constraint(&self, c: &Constraint) -> Result<(), SdpError> {
        let name = || c.name.clone();
        if c.block_terms.is_empty() && c.scalar_terms.is_empty() {
            return Err(SdpError::EmptyConstraint { name: name() });
        }
        if !c.rhs.is_finite() {
            return Err(SdpError::NonFinite { name: name() });
        }
        let mut seen_blocks = alloc::vec![false; self.block_dims.len()];
        for (b, coeff) in &c.block_terms {
            let dim = *self
                .block_dims
                .get(*b)
                .ok_or_else(|| SdpError::UnknownIndex { name: name(), index: *b })?;
            if coeff.dim() != dim {
                return Err(SdpError::BlockDimMismatch { name: name(), want: dim, got: coeff.dim() });
            }
            if core::mem::replace(&mut seen_blocks[*b], true) {
                return Err(SdpError::RepeatedTerm { name: name() });
            }
        }
        let mut seen_scalars = alloc::vec![false; self.scalar_names.len()];
        for (s, coeff) in &c.scalar_terms {
            if *s >= self.scalar_names.len() {
                return Err(SdpError::UnknownIndex { name: name(), index: *s });
            }
            if !coeff.is_finite() {
                return Err(SdpError::NonFinite { name: name() });
            }
            if core::mem::replace(&mut seen_scalars[*s], true) {
                return Err(SdpError::RepeatedTerm { name: name() });
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        if self.block_dims.is_empty() && self.scalar_names.is_empty() {
            return Err(SdpError::NoVariables);
        }
        if !self.obj_block_weights.iter().chain(&self.obj_scalar_weights).all(|w| w.is_finite()) {
            return Err(SdpError::NonFiniteObjective);
        }
        for c in &self.constraints {
            self.check_constraint(c)?;
        }
        Ok(())
    }

    pub fn n_blocks(&self) -> usize {
        self.block_dims.len()
    }

    pub fn n_scalars(&self) -> usize {
        self.scalar_names.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn block_dim(&self, b: usize) -> usize {
        self.block_dims[b]
    }

    pub fn block_name(&self, b: usize) -> &str {
        &self.block_names[b]
    }

    pub fn scalar_name(&self, s: usize) -> &str {
        &self.scalar_names[s]
    }

    pub fn block_weight(&self, b: usize) -> f64 {
        self.obj_block_weights[b]
    }

    pub fn scalar_weight(&self, s: usize) -> f64 {
        self.obj_scalar_weights[s]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint_index(&self, name: &str) -> Option<usize> {
        self.constraints.iter().position(|c| c.name == name)
    }

    /// Objective at a candidate point.
    pub fn objective_value(&self, blocks: &[HermitianMatrix], scalars: &[f64]) -> f64 {
        let block_part: f64 = self
            .obj_block_weights
            .iter()
            .zip(blocks)
            .map(|(w, x)| w * x.trace())
            .sum();
        let scalar_part: f64 = self
            .obj_scalar_weights
            .iter()
            .zip(scalars)
            .map(|(w, u)| w * u)
            .sum();
        block_part + scalar_part
    }

    /// Left-hand side of constraint `i` at a candidate point.
    pub fn constraint_value(
        &self,
        i: usize,
        blocks: &[HermitianMatrix],
        scalars: &[f64],
    ) -> f64 {
        let c = &self.constraints[i];
        let mut acc = 0.0;
        for (b, coeff) in &c.block_terms {
            acc += frob_inner(coeff, &blocks[*b]).expect("dimensions validated at construction");
        }
        for (s, coeff) in &c.scalar_terms {
            acc += coeff * scalars[*s];
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Feasible and converged: residual and gap tolerances all met.
    Optimal,
    /// A certificate of primal infeasibility was detected.
    Infeasible,
    /// A certificate of dual infeasibility (unbounded objective) was detected.
    Unbounded,
    /// Iteration limit or numerical breakdown before any of the above.
    NumericalFailure,
}

/// Solver tolerances. `feas_tol` bounds primal/dual residuals (relative, and
/// the harness feeds normalized data so the scale is near one); `gap_tol`
/// bounds the relative duality gap. The solver keeps polishing past these
/// once met, so reported gaps are usually far smaller.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub max_iterations: usize,
    pub feas_tol: f64,
    pub gap_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { max_iterations: 200, feas_tol: 1e-8, gap_tol: 1e-7 }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SolveStatus,
    /// Objective value; NaN unless `status == Optimal`.
    pub objective: f64,
    pub blocks: Vec<HermitianMatrix>,
    pub scalars: Vec<f64>,
    /// Sign-normalized constraint multipliers (see module docs).
    pub duals: Vec<f64>,
    /// Dual slack certificate per block.
    pub dual_blocks: Vec<HermitianMatrix>,
    pub iterations: usize,
    pub residuals: ResidualReport,
}

/// Figures of merit recomputed from first principles by [`residual_report`].
#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// Worst relative constraint violation, `violation / (1 + |rhs|)`.
    pub max_primal_violation: f64,
    pub per_constraint_violation: Vec<f64>,
    /// Most negative eigenvalue across blocks (and scalar values), each
    /// scaled by `max(1, spectral peak)` of its block.
    pub min_block_eig: f64,
    /// `|primal - dual| / (1 + |primal| + |dual|)`.
    pub duality_gap: f64,
    /// Worst `|dual_i * slack_i|` over inequality constraints.
    pub max_complementarity: f64,
}

fn sense_sign(sense: Sense) -> f64 {
    match sense {
        Sense::Le => -1.0,
        Sense::Eq | Sense::Ge => 1.0,
    }
}

/// Recomputes all residuals of `sol` against `p` from scratch.
pub fn residual_report(p: &SdpProblem, sol: &SdpSolution) -> ResidualReport {
    let mut per = Vec::with_capacity(p.n_constraints());
    let mut max_comp = 0.0f64;
    for (i, c) in p.constraints().iter().enumerate() {
        let lhs = p.constraint_value(i, &sol.blocks, &sol.scalars);
        let raw = match c.sense {
            Sense::Ge => (c.rhs - lhs).max(0.0),
            Sense::Le => (lhs - c.rhs).max(0.0),
            Sense::Eq => (lhs - c.rhs).abs(),
        };
        per.push(raw / (1.0 + c.rhs.abs()));
        if c.sense != Sense::Eq {
            max_comp = max_comp.max((sol.duals[i] * (lhs - c.rhs)).abs());
        }
    }
    let max_primal_violation = per.iter().copied().fold(0.0, f64::max);

    let mut min_block_eig = f64::INFINITY;
    for x in &sol.blocks {
        let vals = x.eigenvalues();
        let peak = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let min = vals.last().copied().unwrap_or(0.0);
        min_block_eig = min_block_eig.min(min / peak.max(1.0));
    }
    for u in &sol.scalars {
        min_block_eig = min_block_eig.min(u / u.abs().max(1.0));
    }
    if sol.blocks.is_empty() && sol.scalars.is_empty() {
        min_block_eig = 0.0;
    }

    let pobj = p.objective_value(&sol.blocks, &sol.scalars);
    let dobj: f64 = p
        .constraints()
        .iter()
        .enumerate()
        .map(|(i, c)| sense_sign(c.sense) * sol.duals[i] * c.rhs)
        .sum();
    let duality_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());

    ResidualReport {
        max_primal_violation,
        per_constraint_violation: per,
        min_block_eig,
        duality_gap,
        max_complementarity: max_comp,
    }
}

/// Solves `p`. `Err` is reserved for malformed problems; numerical outcomes
/// land in [`SdpSolution::status`].
pub fn solve(p: &SdpProblem, opts: SolveOptions) -> Result<SdpSolution, SdpError> {
    p.validate()?;
    let form = embed::RealForm::build(p);
    let raw = solver::run(&form, &opts);
    Ok(embed::assemble(p, &form, raw))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;
    use alloc::string::ToString;
    use alloc::vec;
    use alloc::vec::Vec;
    use approx::assert_relative_eq;

    fn ge(name: &str, rhs: f64, blocks: Vec<(usize, HermitianMatrix)>) -> Constraint {
        Constraint { name: name.to_string(), sense: Sense::Ge, rhs, block_terms: blocks, scalar_terms: vec![] }
    }

    fn solve_default(p: &SdpProblem) -> SdpSolution {
        solve(p, SolveOptions::default()).expect("well-formed problem")
    }

    fn assert_clean_optimum(sol: &SdpSolution) {
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(sol.residuals.max_primal_violation <= 1e-7, "primal violation {}", sol.residuals.max_primal_violation);
        assert!(sol.residuals.duality_gap <= 1e-7, "gap {}", sol.residuals.duality_gap);
        assert!(sol.residuals.min_block_eig >= -1e-7, "min eig {}", sol.residuals.min_block_eig);
    }

    #[test]
    fn trace_floor_on_complex_block() {
        let mut p = SdpProblem::new();
        let x = p.add_block("X", 2, 1.0);
        p.add_constraint(ge("floor", 1.0, vec![(x, HermitianMatrix::identity(2))])).unwrap();
        let sol = solve_default(&p);
        assert_clean_optimum(&sol);
        assert_relative_eq!(sol.objective, 1.0, max_relative = 1e-7);
        assert_relative_eq!(sol.duals[0], 1.0, max_relative = 1e-6);
        // Dual slack at the optimum: S = I - y*I = 0, and Tr(S X) ~ 0.
        assert!(frob_inner(&sol.dual_blocks[0], &sol.blocks[0]).unwrap().abs() <= 1e-6);
    }

    #[test]
    fn weighted_trace_floor_picks_cheap_direction() {
        let mut p = SdpProblem::new();
        let x = p.add_block("X", 2, 1.0);
        let a = HermitianMatrix::from_real_diag(&[1.0, 2.0]);
        p.add_constraint(ge("floor", 1.0, vec![(x, a)])).unwrap();
        let sol = solve_default(&p);
        assert_clean_optimum(&sol);
        assert_relative_eq!(sol.objective, 0.5, max_relative = 1e-7);
        assert_relative_eq!(sol.duals[0], 0.5, max_relative = 1e-6);
        // All mass sits on the second diagonal entry.
        assert!(sol.blocks[0].get(0, 0).re.abs() <= 1e-6);
        assert_relative_eq!(sol.blocks[0].get(1, 1).re, 0.5, max_relative = 1e-5);
    }

    #[test]
    fn conflicting_scalar_bounds_are_infeasible() {
        let mut p = SdpProblem::new();
        let u = p.add_scalar("u", 1.0);
        p.add_constraint(Constraint {
            name: "lower".to_string(),
            sense: Sense::Ge,
            rhs: 1.0,
            block_terms: vec![],
            scalar_terms: vec![(u, 1.0)],
        })
        .unwrap();
        p.add_constraint(Constraint {
            name: "upper".to_string(),
            sense: Sense::Le,
            rhs: 0.0,
            block_terms: vec![],
            scalar_terms: vec![(u, 1.0)],
        })
        .unwrap();
        let sol = solve_default(&p);
        assert_eq!(sol.status, SolveStatus::Infeasible);
        assert!(sol.objective.is_nan());
    }

    #[test]
    fn maximizing_trace_is_unbounded() {
        let mut p = SdpProblem::new();
        let x = p.add_block("X", 2, -1.0);
        p.add_constraint(ge("floor", 1.0, vec![(x, HermitianMatrix::identity(2))])).unwrap();
        let sol = solve_default(&p);
        assert_eq!(sol.status, SolveStatus::Unbounded);
    }

    #[test]
    fn trace_minimization_lands_on_dominant_eigenvector() {
        // min Tr X s.t. Tr(A X) >= 1 has optimum 1/lambda_max(A), attained by
        // the rank-one matrix u1 u1^H / lambda_max.
        let a = HermitianMatrix::new(
            2,
            vec![
                C64::new(2.0, 0.0),
                C64::new(1.0, -1.0),
                C64::new(1.0, 1.0),
                C64::new(3.0, 0.0),
            ],
        )
        .unwrap();
        let mut p = SdpProblem::new();
        let x = p.add_block("X", 2, 1.0);
        p.add_constraint(ge("floor", 1.0, vec![(x, a.clone())])).unwrap();
        let sol = solve_default(&p);
        assert_clean_optimum(&sol);
        // Eigenvalues of A are 4 and 1.
        assert_relative_eq!(sol.objective, 0.25, max_relative = 1e-7);
        assert_eq!(sol.blocks[0].numerical_rank(1e-6), 1);
        let (lead, u) = sol.blocks[0].dominant_component().unwrap();
        let (_, u_ref) = a.dominant_component().unwrap();
        assert_relative_eq!(lead, 0.25, max_relative = 1e-5);
        for (got, want) in u.iter().zip(&u_ref) {
            assert!((got - want).norm() <= 1e-5, "eigenvector mismatch: {got} vs {want}");
        }
    }

    #[test]
    fn imaginary_parts_change_the_optimum() {
        // A = [[1, i], [-i, 1]] has eigenvalues {2, 0}; its real part alone is
        // the identity (eigenvalues {1, 1}). The optimum 0.5 is only reachable
        // when the imaginary coupling is honored.
        let a = HermitianMatrix::new(
            2,
            vec![
                C64::new(1.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, -1.0),
                C64::new(1.0, 0.0),
            ],
        )
        .unwrap();
        let mut p = SdpProblem::new();
        let x = p.add_block("X", 2, 1.0);
        p.add_constraint(ge("floor", 1.0, vec![(x, a)])).unwrap();
        let sol = solve_default(&p);
        assert_clean_optimum(&sol);
        assert_relative_eq!(sol.objective, 0.5, max_relative = 1e-6);
    }

    #[test]
    fn equality_rows_are_honored() {
        let mut p = SdpProblem::new();
        let x = p.add_block("X", 2, 1.0);
        p.add_constraint(Constraint {
            name: "pin".to_string(),
            sense: Sense::Eq,
            rhs: 3.0,
            block_terms: vec![(x, HermitianMatrix::identity(2))],
            scalar_terms: vec![],
        })
        .unwrap();
        let sol = solve_default(&p);
        assert_clean_optimum(&sol);
        assert_relative_eq!(sol.objective, 3.0, max_relative = 1e-7);
    }

    #[test]
    fn blocks_and_scalars_mix_with_both_senses() {
        // min 2 Tr X + u  s.t.  Tr X + u >= 2,  u <= 0.5.
        // The scalar is the cheap direction, so u saturates at 0.5.
        let mut p = SdpProblem::new();
        let x = p.add_block("X", 2, 2.0);
        let u = p.add_scalar("u", 1.0);
        p.add_constraint(Constraint {
            name: "floor".to_string(),
            sense: Sense::Ge,
            rhs: 2.0,
            block_terms: vec![(x, HermitianMatrix::identity(2))],
            scalar_terms: vec![(u, 1.0)],
        })
        .unwrap();
        p.add_constraint(Constraint {
            name: "cap".to_string(),
            sense: Sense::Le,
            rhs: 0.5,
            block_terms: vec![],
            scalar_terms: vec![(u, 1.0)],
        })
        .unwrap();
        let sol = solve_default(&p);
        assert_clean_optimum(&sol);
        assert_relative_eq!(sol.objective, 3.5, max_relative = 1e-6);
        assert_relative_eq!(sol.scalars[0], 0.5, max_relative = 1e-5);
        // The cap's multiplier is sign-normalized: nonnegative for <=.
        assert!(sol.duals[1] >= -1e-9);
        assert!(sol.residuals.max_complementarity <= 1e-6);
    }

    #[test]
    fn row_scaling_is_transparent() {
        // The same geometry stated at wildly different magnitudes must give
        // the same optimum and correctly unscaled duals.
        let a = HermitianMatrix::from_real_diag(&[1.0, 2.0]);
        let mut small = SdpProblem::new();
        let xs = small.add_block("X", 2, 1.0);
        small.add_constraint(ge("floor", 1.0, vec![(xs, a.clone())])).unwrap();

        let mut big = SdpProblem::new();
        let xb = big.add_block("X", 2, 1.0);
        big.add_constraint(ge("floor", 1e6, vec![(xb, a.scaled(1e6))])).unwrap();

        let s_small = solve_default(&small);
        let s_big = solve_default(&big);
        assert_clean_optimum(&s_small);
        assert_clean_optimum(&s_big);
        assert_relative_eq!(s_small.objective, s_big.objective, max_relative = 1e-6);
        // Shadow price scales inversely with the constraint's magnitude.
        assert_relative_eq!(s_small.duals[0], s_big.duals[0] * 1e6, max_relative = 1e-5);
    }

    #[test]
    fn residual_report_is_an_independent_audit() {
        // Hand-crafted (deliberately non-optimal) candidate: every figure in
        // the report is checkable by hand.
        let mut p = SdpProblem::new();
        let x = p.add_block("X", 2, 1.0);
        p.add_constraint(ge("floor", 3.0, vec![(x, HermitianMatrix::identity(2))])).unwrap();
        let sol = SdpSolution {
            status: SolveStatus::Optimal,
            objective: 2.0,
            blocks: vec![HermitianMatrix::identity(2)],
            scalars: vec![],
            duals: vec![0.7],
            dual_blocks: vec![HermitianMatrix::identity(2)],
            iterations: 0,
            residuals: ResidualReport {
                max_primal_violation: 0.0,
                per_constraint_violation: vec![],
                min_block_eig: 0.0,
                duality_gap: 0.0,
                max_complementarity: 0.0,
            },
        };
        let rep = residual_report(&p, &sol);
        // lhs = Tr I = 2, shortfall 1, relative to 1 + |rhs| = 4.
        assert_relative_eq!(rep.max_primal_violation, 0.25, max_relative = 1e-12);
        // pobj = 2, dobj = 0.7 * 3 = 2.1.
        assert_relative_eq!(rep.duality_gap, 0.1 / (1.0 + 2.0 + 2.1), max_relative = 1e-12);
        assert_relative_eq!(rep.max_complementarity, 0.7, max_relative = 1e-12);
        assert!(rep.min_block_eig >= 0.0);
    }

    #[test]
    fn malformed_problems_are_rejected() {
        let p = SdpProblem::new();
        assert_eq!(solve(&p, SolveOptions::default()).unwrap_err(), SdpError::NoVariables);

        let mut p = SdpProblem::new();
        let x = p.add_block("X", 2, 1.0);
        let err = p
            .add_constraint(ge("bad-dim", 1.0, vec![(x, HermitianMatrix::identity(3))]))
            .unwrap_err();
        assert!(matches!(err, SdpError::BlockDimMismatch { want: 2, got: 3, .. }));

        let err = p.add_constraint(ge("empty", 1.0, vec![])).unwrap_err();
        assert!(matches!(err, SdpError::EmptyConstraint { .. }));

        let err = p
            .add_constraint(ge(
                "twice",
                1.0,
                vec![(x, HermitianMatrix::identity(2)), (x, HermitianMatrix::identity(2))],
            ))
            .unwrap_err();
        assert!(matches!(err, SdpError::RepeatedTerm { .. }));

        let err = p.add_constraint(ge("unknown", 1.0, vec![(7, HermitianMatrix::identity(2))])).unwrap_err();
        assert!(matches!(err, SdpError::UnknownIndex { index: 7, .. }));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            /// min Tr X s.t. Tr(D X) >= r with diagonal D > 0 has the closed
            /// form r / max(D); the solver must find it and certify it.
            #[test]
            fn diagonal_trace_floor_matches_closed_form(
                d in proptest::collection::vec(0.1f64..10.0, 1..4),
                r in 0.5f64..20.0,
            ) {
                let n = d.len();
                let mut p = SdpProblem::new();
                let x = p.add_block("X", n, 1.0);
                p.add_constraint(ge("floor", r, vec![(x, HermitianMatrix::from_real_diag(&d))])).unwrap();
                let sol = solve_default(&p);
                prop_assert_eq!(sol.status, SolveStatus::Optimal);
                let want = r / d.iter().cloned().fold(f64::MIN, f64::max);
                prop_assert!((sol.objective - want).abs() <= 1e-6 * want.max(1.0),
                    "objective {} vs closed form {}", sol.objective, want);
                prop_assert!(sol.residuals.duality_gap <= 1e-7);
                prop_assert!(sol.residuals.max_primal_violation <= 1e-7);
                prop_assert!(sol.residuals.min_block_eig >= -1e-7);
                prop_assert!(sol.residuals.max_complementarity <= 1e-5 * (1.0 + sol.objective.abs()));
            }
        }
    }
}
