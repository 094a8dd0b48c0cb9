//! Builders that turn a channel realization plus system parameters into
//! solver-ready conic problems.
//!
//! Four problem families share one skeleton: minimize total transmit power
//! `sum_i Tr(W_i) + Tr(V)` subject to
//!
//! * per-layer SINR floors at the user (`>=` rows, one per layer),
//! * per-eavesdropper SINR caps on the base layer (`<=` rows),
//! * per-antenna power caps (`<=` rows),
//!
//! with every SINR fraction cleared to a linear trace form (both sides
//! multiplied by the positive denominator) and the noise constant moved to
//! the right-hand side. The variants:
//!
//! * [`build_relaxed`]: the rank-relaxed problem; its optimum lower-bounds
//!   every scheme and is itself attained by rank-one blocks in the regimes
//!   covered by the certificate checks.
//! * [`build_suboptimal1`]: drops the higher-layer interference terms from
//!   the eavesdropper rows, which shrinks the feasible set but guarantees
//!   rank-one solutions.
//! * [`build_baseline_single`]: single-layer transmission at the combined
//!   target [`gamma_single`].
//! * [`build_baseline_mrt`]: fixes every information beam along the matched
//!   direction `h/||h||`, leaving scalar layer powers and a full artificial
//!   noise block as the only variables.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::{gram, ChannelError, Scenario, SystemSpec};
use crate::linalg::HermitianMatrix;
use crate::sdp::{Constraint, SdpProblem, Sense};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    Relaxed,
    Suboptimal1,
    BaselineSingleLayer,
    BaselineMrt,
}

/// How the per-layer transmit covariances appear among the problem variables.
#[derive(Debug, Clone)]
pub enum LayerVariables {
    /// One Hermitian block per layer (indices into the problem's blocks).
    Blocks(Vec<usize>),
    /// One nonnegative power scalar per layer along a fixed unit direction;
    /// layer covariances reconstruct as `u_i * d d^H`.
    FixedDirection { scalars: Vec<usize>, direction: Vec<C64> },
}

impl LayerVariables {
    pub fn n_layers(&self) -> usize {
        match self {
            LayerVariables::Blocks(b) => b.len(),
            LayerVariables::FixedDirection { scalars, .. } => scalars.len(),
        }
    }
}

/// A solver-ready problem plus the index map back to its physical variables.
#[derive(Debug, Clone)]
pub struct BuiltProblem {
    pub kind: ProblemKind,
    pub sdp: SdpProblem,
    pub layers: LayerVariables,
    /// Block index of the artificial-noise covariance V.
    pub an_block: usize,
    /// Constraint indices of the user SINR rows, one per layer.
    pub c1_rows: Vec<usize>,
    /// Constraint indices of the eavesdropper rows, one per eavesdropper.
    pub c2_rows: Vec<usize>,
    /// Constraint indices of the per-antenna power rows.
    pub c3_rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("channel has {got} entries but the system uses {want} antennas")]
    ChannelDims { want: usize, got: usize },
    #[error("scenario carries {got} eavesdropper channels but the system expects {want}")]
    EveDims { want: usize, got: usize },
    #[error("channel vector is numerically zero")]
    ZeroChannel,
    #[error("scenario contains non-finite channel data")]
    NonFiniteChannel,
}

fn validate_pair(s: &Scenario, spec: &SystemSpec) -> Result<(), ProblemError> {
    spec.validate()?;
    if s.h.len() != spec.n_tx {
        return Err(ProblemError::ChannelDims { want: spec.n_tx, got: s.h.len() });
    }
    if s.g.len() != spec.n_eves() {
        return Err(ProblemError::EveDims { want: spec.n_eves(), got: s.g.len() });
    }
    for g in &s.g {
        if g.len() != spec.n_tx {
            return Err(ProblemError::ChannelDims { want: spec.n_tx, got: g.len() });
        }
    }
    let finite = s
        .h
        .iter()
        .chain(s.g.iter().flatten())
        .all(|z| z.re.is_finite() && z.im.is_finite())
        && s.noise_power.is_finite()
        && s.noise_power > 0.0;
    if !finite {
        return Err(ProblemError::NonFiniteChannel);
    }
    Ok(())
}

/// Combined SINR target equivalent to decoding all layers as one stream:
/// `prod_i (1 + gamma_req_i) - 1`.
pub fn gamma_single(spec: &SystemSpec) -> f64 {
    spec.gamma_req.iter().map(|g| 1.0 + g).product::<f64>() - 1.0
}

/// Shared skeleton for the three block-variable problems. `gammas` carries
/// one SINR floor per layer block; `keep_eve_interference` controls whether
/// higher layers appear in the eavesdropper rows.
fn build_layered(
    s: &Scenario,
    spec: &SystemSpec,
    kind: ProblemKind,
    gammas: &[f64],
    keep_eve_interference: bool,
) -> Result<BuiltProblem, ProblemError> {
    validate_pair(s, spec)?;
    let n = spec.n_tx;
    let l = gammas.len();
    let sigma2 = s.noise_power;
    let h_mat = gram(&s.h);
    let g_mats: Vec<HermitianMatrix> = s.g.iter().map(|g| gram(g)).collect();

    let mut p = SdpProblem::new();
    let layer_blocks: Vec<usize> = (0..l)
        .map(|i| p.add_block(&format!("W{}", i + 1), n, 1.0))
        .collect();
    let an_block = p.add_block("V", n, 1.0);

    let mut c1_rows = Vec::with_capacity(l);
    for i in 0..l {
        let gamma = gammas[i];
        let mut block_terms = Vec::with_capacity(l - i + 1);
        block_terms.push((layer_blocks[i], h_mat.clone()));
        for j in (i + 1)..l {
            block_terms.push((layer_blocks[j], h_mat.scaled(-gamma)));
        }
        block_terms.push((an_block, h_mat.scaled(-gamma)));
        let row = p
            .add_constraint(Constraint {
                name: format!("c1-layer{}", i + 1),
                sense: Sense::Ge,
                rhs: gamma * sigma2,
                block_terms,
                scalar_terms: Vec::new(),
            })
            .expect("layer rows are well-formed by construction");
        c1_rows.push(row);
    }

    let mut c2_rows = Vec::with_capacity(g_mats.len());
    for (k, g_mat) in g_mats.iter().enumerate() {
        let cap = spec.gamma_tol[k];
        let mut block_terms = Vec::with_capacity(l + 1);
        block_terms.push((layer_blocks[0], g_mat.clone()));
        if keep_eve_interference {
            for j in 1..l {
                block_terms.push((layer_blocks[j], g_mat.scaled(-cap)));
            }
        }
        block_terms.push((an_block, g_mat.scaled(-cap)));
        let row = p
            .add_constraint(Constraint {
                name: format!("c2-eve{}", k + 1),
                sense: Sense::Le,
                rhs: cap * sigma2,
                block_terms,
                scalar_terms: Vec::new(),
            })
            .expect("eavesdropper rows are well-formed by construction");
        c2_rows.push(row);
    }

    let mut c3_rows = Vec::with_capacity(n);
    for ant in 0..n {
        let basis = HermitianMatrix::basis(n, ant);
        let mut block_terms: Vec<(usize, HermitianMatrix)> = layer_blocks
            .iter()
            .map(|&b| (b, basis.clone()))
            .collect();
        block_terms.push((an_block, basis));
        let row = p
            .add_constraint(Constraint {
                name: format!("c3-ant{}", ant + 1),
                sense: Sense::Le,
                rhs: spec.p_max[ant],
                block_terms,
                scalar_terms: Vec::new(),
            })
            .expect("antenna rows are well-formed by construction");
        c3_rows.push(row);
    }

    Ok(BuiltProblem {
        kind,
        sdp: p,
        layers: LayerVariables::Blocks(layer_blocks),
        an_block,
        c1_rows,
        c2_rows,
        c3_rows,
    })
}

/// Rank-relaxed power minimization: full interference structure in every row.
pub fn build_relaxed(s: &Scenario, spec: &SystemSpec) -> Result<BuiltProblem, ProblemError> {
    build_layered(s, spec, ProblemKind::Relaxed, &spec.gamma_req, true)
}

/// Conservative variant: eavesdropper rows ignore the higher layers'
/// interference (only the artificial noise shields the base layer), which
/// shrinks the feasible set and in exchange guarantees rank-one optima.
pub fn build_suboptimal1(s: &Scenario, spec: &SystemSpec) -> Result<BuiltProblem, ProblemError> {
    build_layered(s, spec, ProblemKind::Suboptimal1, &spec.gamma_req, false)
}

/// Single-layer transmission at the combined target [`gamma_single`]; the
/// eavesdropper caps are reused unchanged.
pub fn build_baseline_single(
    s: &Scenario,
    spec: &SystemSpec,
) -> Result<BuiltProblem, ProblemError> {
    let gammas = [gamma_single(spec)];
    build_layered(s, spec, ProblemKind::BaselineSingleLayer, &gammas, true)
}

/// Matched-direction transmission: every layer's beam is fixed along
/// `h/||h||`, so the layer variables collapse to nonnegative power scalars;
/// the artificial noise keeps its full Hermitian block.
pub fn build_baseline_mrt(s: &Scenario, spec: &SystemSpec) -> Result<BuiltProblem, ProblemError> {
    validate_pair(s, spec)?;
    let n = spec.n_tx;
    let l = spec.n_layers;
    let sigma2 = s.noise_power;
    let h_mat = gram(&s.h);
    let (_, direction) = h_mat
        .dominant_component()
        .map_err(|_| ProblemError::ZeroChannel)?;

    // For any coefficient A, Tr(A u_i d d^H) = u_i * (d^H A d).
    let quad = |a: &HermitianMatrix| -> f64 {
        a.quad_form(&direction).expect("direction has the block dimension")
    };
    let qh = quad(&h_mat);
    let g_mats: Vec<HermitianMatrix> = s.g.iter().map(|g| gram(g)).collect();
    let qg: Vec<f64> = g_mats.iter().map(|g| quad(g)).collect();

    let mut p = SdpProblem::new();
    let scalars: Vec<usize> = (0..l)
        .map(|i| p.add_scalar(&format!("u{}", i + 1), 1.0))
        .collect();
    let an_block = p.add_block("V", n, 1.0);

    let mut c1_rows = Vec::with_capacity(l);
    for i in 0..l {
        let gamma = spec.gamma_req[i];
        let mut scalar_terms = Vec::with_capacity(l - i);
        scalar_terms.push((scalars[i], qh));
        for j in (i + 1)..l {
            scalar_terms.push((scalars[j], -gamma * qh));
        }
        let row = p
            .add_constraint(Constraint {
                name: format!("c1-layer{}", i + 1),
                sense: Sense::Ge,
                rhs: gamma * sigma2,
                block_terms: alloc::vec![(an_block, h_mat.scaled(-gamma))],
                scalar_terms,
            })
            .expect("layer rows are well-formed by construction");
        c1_rows.push(row);
    }

    let mut c2_rows = Vec::with_capacity(qg.len());
    for (k, &q) in qg.iter().enumerate() {
        let cap = spec.gamma_tol[k];
        let mut scalar_terms = Vec::with_capacity(l);
        scalar_terms.push((scalars[0], q));
        for j in 1..l {
            scalar_terms.push((scalars[j], -cap * q));
        }
        let row = p
            .add_constraint(Constraint {
                name: format!("c2-eve{}", k + 1),
                sense: Sense::Le,
                rhs: cap * sigma2,
                block_terms: alloc::vec![(an_block, g_mats[k].scaled(-cap))],
                scalar_terms,
            })
            .expect("eavesdropper rows are well-formed by construction");
        c2_rows.push(row);
    }

    let mut c3_rows = Vec::with_capacity(n);
    for ant in 0..n {
        let gain = direction[ant].norm_sqr();
        let scalar_terms: Vec<(usize, f64)> = scalars.iter().map(|&u| (u, gain)).collect();
        let row = p
            .add_constraint(Constraint {
                name: format!("c3-ant{}", ant + 1),
                sense: Sense::Le,
                rhs: spec.p_max[ant],
                block_terms: alloc::vec![(an_block, HermitianMatrix::basis(n, ant))],
                scalar_terms,
            })
            .expect("antenna rows are well-formed by construction");
        c3_rows.push(row);
    }

    Ok(BuiltProblem {
        kind: ProblemKind::BaselineMrt,
        sdp: p,
        layers: LayerVariables::FixedDirection { scalars, direction },
        an_block,
        c1_rows,
        c2_rows,
        c3_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{normalize_scenario, sample_scenario};
    use crate::sdp::{solve, SolveOptions, SolveStatus};
    use alloc::vec;
    use approx::assert_relative_eq;

    fn spec(n_tx: usize, gamma_req: Vec<f64>, gamma_tol: Vec<f64>) -> SystemSpec {
        SystemSpec {
            n_tx,
            n_layers: gamma_req.len(),
            gamma_req,
            gamma_tol,
            p_max: vec![1e6; n_tx],
            noise_power: 1.0,
            user_distance_m: 50.0,
            eve_distance_m: 30.0,
        }
    }

    fn scenario(h: Vec<C64>, g: Vec<Vec<C64>>) -> Scenario {
        Scenario { h, g, noise_power: 1.0 }
    }

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn relaxed_problem_has_expected_shape() {
        let sp = spec(4, vec![2.0, 3.0, 4.0], vec![0.1, 0.1]);
        let s = scenario(
            vec![re(1.0), re(0.5), re(0.25), re(0.125)],
            vec![vec![re(0.1); 4], vec![re(0.2); 4]],
        );
        let built = build_relaxed(&s, &sp).unwrap();
        assert_eq!(built.sdp.n_blocks(), 4); // three layers + artificial noise
        assert_eq!(built.sdp.n_constraints(), 3 + 2 + 4);
        assert_eq!(built.c1_rows.len(), 3);
        assert_eq!(built.c2_rows.len(), 2);
        assert_eq!(built.c3_rows.len(), 4);
        assert_eq!(built.sdp.constraint_index("c1-layer1"), Some(built.c1_rows[0]));
        assert_eq!(built.sdp.constraint_index("c3-ant4"), Some(built.c3_rows[3]));

        // The last layer sees no interference from other layers: its row
        // touches only W_L and V.
        let last = &built.sdp.constraints()[built.c1_rows[2]];
        assert_eq!(last.block_terms.len(), 2);

        // No eavesdroppers means no cap rows.
        let sp0 = spec(4, vec![2.0, 3.0, 4.0], vec![]);
        let s0 = scenario(vec![re(1.0), re(0.5), re(0.25), re(0.125)], vec![]);
        let built0 = build_relaxed(&s0, &sp0).unwrap();
        assert!(built0.c2_rows.is_empty());
        assert_eq!(built0.sdp.n_constraints(), 3 + 4);
    }

    #[test]
    fn suboptimal_rows_drop_higher_layers_only() {
        let sp = spec(2, vec![2.0, 3.0], vec![0.1]);
        let s = scenario(vec![re(1.0), re(0.5)], vec![vec![re(0.3), re(0.4)]]);
        let built = build_suboptimal1(&s, &sp).unwrap();
        let row = &built.sdp.constraints()[built.c2_rows[0]];
        // Only W_1 and V appear; W_2's coefficient is dropped entirely.
        let touched: Vec<usize> = row.block_terms.iter().map(|(b, _)| *b).collect();
        assert_eq!(touched, vec![0, built.an_block]);

        // The full variant keeps W_2 with a negative-scaled coefficient.
        let full = build_relaxed(&s, &sp).unwrap();
        let frow = &full.sdp.constraints()[full.c2_rows[0]];
        assert_eq!(frow.block_terms.len(), 3);
    }

    #[test]
    fn dropping_interference_only_tightens_eve_rows() {
        // For PSD candidate points, the conservative row's left side dominates
        // the full row's, so satisfying it implies satisfying the original.
        let sp = spec(2, vec![2.0, 3.0], vec![0.1]);
        let s = scenario(
            vec![re(1.0), C64::new(0.2, 0.7)],
            vec![vec![C64::new(0.3, -0.1), re(0.4)]],
        );
        let full = build_relaxed(&s, &sp).unwrap();
        let tight = build_suboptimal1(&s, &sp).unwrap();
        let candidates = [
            vec![re(1.0), re(0.0)],
            vec![re(0.3), C64::new(0.1, 0.4)],
            vec![C64::new(0.0, 1.0), re(2.0)],
        ];
        for v in &candidates {
            let blocks = vec![
                gram(v),
                gram(&[v[1], v[0]]),
                HermitianMatrix::identity(2).scaled(0.25),
            ];
            let lhs_full = full.sdp.constraint_value(full.c2_rows[0], &blocks, &[]);
            let lhs_tight = tight.sdp.constraint_value(tight.c2_rows[0], &blocks, &[]);
            assert!(
                lhs_full <= lhs_tight + 1e-12,
                "full {lhs_full} should not exceed tightened {lhs_tight}"
            );
        }
    }

    #[test]
    fn combined_single_layer_target() {
        let one = spec(2, vec![5.0], vec![]);
        assert_relative_eq!(gamma_single(&one), 5.0, max_relative = 1e-15);

        let two = spec(2, vec![1.0, 1.0], vec![]);
        assert_relative_eq!(gamma_single(&two), 3.0, max_relative = 1e-15);

        // 6, 9, 12 dB floors combine to ~28.7 dB.
        let table = spec(
            4,
            vec![10f64.powf(0.6), 10f64.powf(0.9), 10f64.powf(1.2)],
            vec![0.1; 3],
        );
        assert_relative_eq!(gamma_single(&table), 749.571571833781, max_relative = 1e-12);
    }

    #[test]
    fn single_layer_problem_shape_and_scalar_closed_form() {
        let sp = spec(1, vec![1.0, 1.0], vec![]);
        let s = scenario(vec![re(2.0)], vec![]);
        let built = build_baseline_single(&s, &sp).unwrap();
        assert_eq!(built.sdp.n_blocks(), 2); // W_1 + V regardless of n_layers
        assert_eq!(built.layers.n_layers(), 1);

        // One antenna, no eavesdroppers: power = gamma_single * sigma^2 / |h|^2.
        let sol = solve(&built.sdp, SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_relative_eq!(sol.objective, 3.0 / 4.0, max_relative = 1e-6);
    }

    #[test]
    fn matched_direction_rows_use_channel_gain() {
        let sp = spec(2, vec![2.0, 3.0], vec![0.1]);
        let s = scenario(vec![re(3.0), re(4.0)], vec![vec![re(0.3), re(0.4)]]);
        let built = build_baseline_mrt(&s, &sp).unwrap();
        assert_eq!(built.sdp.n_blocks(), 1); // only V
        assert_eq!(built.sdp.n_scalars(), 2);

        // The user rows see the full channel gain ||h||^2 = 25 on the layer's
        // own power scalar.
        let row = &built.sdp.constraints()[built.c1_rows[0]];
        let own = row.scalar_terms.iter().find(|(s, _)| *s == 0).unwrap().1;
        assert_relative_eq!(own, 25.0, max_relative = 1e-12);
        let other = row.scalar_terms.iter().find(|(s, _)| *s == 1).unwrap().1;
        assert_relative_eq!(other, -2.0 * 25.0, max_relative = 1e-12);

        let zero = scenario(vec![re(0.0), re(0.0)], vec![vec![re(0.3), re(0.4)]]);
        assert_eq!(build_baseline_mrt(&zero, &sp).unwrap_err(), ProblemError::ZeroChannel);
    }

    #[test]
    fn matched_direction_is_optimal_without_eavesdroppers() {
        let sp = spec(3, vec![2.0, 1.0], vec![]);
        let s = scenario(vec![re(1.0), C64::new(0.0, 1.5), re(0.5)], vec![]);
        let relaxed = build_relaxed(&s, &sp).unwrap();
        let mrt = build_baseline_mrt(&s, &sp).unwrap();
        let sol_r = solve(&relaxed.sdp, SolveOptions::default()).unwrap();
        let sol_m = solve(&mrt.sdp, SolveOptions::default()).unwrap();
        assert_eq!(sol_r.status, SolveStatus::Optimal);
        assert_eq!(sol_m.status, SolveStatus::Optimal);
        assert_relative_eq!(sol_r.objective, sol_m.objective, max_relative = 1e-5);
    }

    #[test]
    fn tightened_problem_never_beats_the_relaxation() {
        // Realistic scale: channels drawn at path-loss magnitudes need the
        // matching thermal noise for the SINR floors to be reachable.
        let mut sp = spec(3, vec![3.0, 2.0], vec![0.2]);
        sp.noise_power = 3.1622776601683794e-13;
        let s = sample_scenario(7, &sp, 1).unwrap();
        let s = normalize_scenario(&s);
        let relaxed = solve(&build_relaxed(&s, &sp).unwrap().sdp, SolveOptions::default()).unwrap();
        let tight = solve(&build_suboptimal1(&s, &sp).unwrap().sdp, SolveOptions::default()).unwrap();
        assert_eq!(relaxed.status, SolveStatus::Optimal);
        assert_eq!(tight.status, SolveStatus::Optimal);
        assert!(
            tight.objective >= relaxed.objective - 1e-6 * (1.0 + relaxed.objective.abs()),
            "tightened {} vs relaxed {}",
            tight.objective,
            relaxed.objective
        );
    }

    #[test]
    fn objective_is_invariant_under_noise_normalization() {
        let sp = SystemSpec {
            n_tx: 2,
            n_layers: 2,
            gamma_req: vec![2.0, 1.0],
            gamma_tol: vec![0.1],
            p_max: vec![1e3, 1e3],
            noise_power: 0.5,
            user_distance_m: 50.0,
            eve_distance_m: 30.0,
        };
        let raw = Scenario {
            h: vec![re(1.2), C64::new(0.3, -0.8)],
            g: vec![vec![C64::new(0.05, 0.1), re(0.2)]],
            noise_power: 0.5,
        };
        let normed = normalize_scenario(&raw);
        let sol_raw = solve(&build_relaxed(&raw, &sp).unwrap().sdp, SolveOptions::default()).unwrap();
        let sol_norm =
            solve(&build_relaxed(&normed, &sp).unwrap().sdp, SolveOptions::default()).unwrap();
        assert_eq!(sol_raw.status, SolveStatus::Optimal);
        assert_eq!(sol_norm.status, SolveStatus::Optimal);
        assert_relative_eq!(sol_raw.objective, sol_norm.objective, max_relative = 1e-6);
    }

    #[test]
    fn dimension_mismatches_are_rejected() {
        let sp = spec(4, vec![2.0], vec![0.1]);
        let short = scenario(vec![re(1.0)], vec![vec![re(0.1); 4]]);
        assert!(matches!(
            build_relaxed(&short, &sp),
            Err(ProblemError::ChannelDims { want: 4, got: 1 })
        ));
        let wrong_eves = scenario(vec![re(1.0); 4], vec![]);
        assert!(matches!(
            build_relaxed(&wrong_eves, &sp),
            Err(ProblemError::EveDims { want: 1, got: 0 })
        ));
    }
}
