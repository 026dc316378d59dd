//! The max-min exploration program.
//!
//! Over the probability simplex, maximize the smallest neighborhood mass
//! `min_j Σ_{l ∈ N_j} s_l`. The optimum value is the reciprocal of the price
//! of exploration: mixing `s` into the play distribution guarantees every
//! action's estimate denominator a floor proportional to it.
//!
//! Solved by the dense simplex in [`crate::simplex`] through an equivalent
//! packing form (see [`solve_max_min_exploration`]). The solution carries an
//! optimality certificate: a distribution `y` over the neighborhood
//! constraints upper-bounds the optimum by `max_i Σ_{j : i ∈ N_j} y_j`.

use thiserror::Error;

use crate::graph::{ActionId, FeedbackGraph};
use crate::simplex::{self, Constraint, Problem, Rel, SimplexError};

/// Tolerance for primal feasibility (simplex sums, nonnegativity).
pub const FEASIBILITY_TOL: f64 = 1e-12;
/// Tolerance for the certified duality gap.
pub const GAP_TOL: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("exploration LP failed: {0}")]
    Simplex(#[from] SimplexError),
    #[error("witness actions {0} and {1} are linked; set is not independent")]
    WitnessNotIndependent(ActionId, ActionId),
    #[error("witness set is not maximal: action {0} has zero neighborhood mass")]
    WitnessNotMaximal(ActionId),
    #[error("witness action {index} out of range for k = {k}")]
    WitnessOutOfRange { index: usize, k: usize },
    #[error("empty witness set")]
    EmptyWitness,
    #[error("LP solution violates {what} (detail: {detail})")]
    Contract { what: &'static str, detail: String },
}

/// A simplex vector together with its min-neighborhood-mass objective.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplorationDistribution {
    s: Vec<f64>,
    value: f64,
}

impl ExplorationDistribution {
    /// Wraps a simplex vector, recomputing its objective value on the graph.
    pub fn from_weights(g: &FeedbackGraph, s: Vec<f64>) -> Self {
        let value = min_neighborhood_mass(g, &s);
        ExplorationDistribution { s, value }
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

/// `min_j Σ_{l ∈ N_j} s_l`.
pub fn min_neighborhood_mass(g: &FeedbackGraph, s: &[f64]) -> f64 {
    (0..g.k())
        .map(|j| g.neighborhood_mass(j, s))
        .fold(f64::INFINITY, f64::min)
}

/// Exploration distribution plus the dual certificate produced by the solver.
#[derive(Clone, Debug)]
pub struct MaxMinSolution {
    pub dist: ExplorationDistribution,
    /// Distribution over neighborhood constraints certifying near-optimality.
    pub dual: Vec<f64>,
    /// `max_i Σ_{j : i ∈ N_j} dual_j  −  value`; at most [`GAP_TOL`].
    pub gap: f64,
    pub pivots: usize,
}

/// Solves the max-min exploration program exactly.
///
/// The program is scale-invariant, so instead of the degenerate epigraph
/// form it is solved as the equivalent packing program
/// `max Σ_j y_j  s.t.  Σ_{j : i ∈ N_j} y_j ≤ 1 ∀i,  y ≥ 0`,
/// whose all-slack start is feasible and non-degenerate. Its optimum equals
/// the covering optimum `min Σ x` over `Σ_{l∈N_j} x_l ≥ 1`, which is the
/// reciprocal of the max-min value; the packing duals recover `x` and thus
/// `s = x / Σx`, while the normalized packing variables certify optimality.
///
/// The returned solution is primal feasible to [`FEASIBILITY_TOL`] and
/// carries a dual-feasible certificate with gap at most [`GAP_TOL`]; both are
/// enforced here, not just promised.
pub fn solve_max_min_exploration(g: &FeedbackGraph) -> Result<MaxMinSolution, LpError> {
    let k = g.k();
    let constraints = (0..k)
        .map(|i| {
            let mut coeffs = vec![0.0; k];
            for j in g.revealed_by(i).iter() {
                coeffs[j] = 1.0;
            }
            Constraint {
                coeffs,
                rel: Rel::Le,
                rhs: 1.0,
            }
        })
        .collect();
    let solution = simplex::solve(&Problem {
        objective: vec![1.0; k],
        constraints,
    })?;
    let packing_total = solution.objective;
    if !packing_total.is_finite() || packing_total < 1.0 - 1e-9 {
        return Err(LpError::Contract {
            what: "packing objective",
            detail: format!("total = {packing_total}, expected at least 1"),
        });
    }

    // covering solution from the duals -> exploration distribution
    let mut s: Vec<f64> = Vec::with_capacity(k);
    let mut total = 0.0;
    for (i, &x) in solution.duals.iter().enumerate() {
        if x < -1e-9 {
            return Err(LpError::Contract {
                what: "covering nonnegativity",
                detail: format!("x[{i}] = {x}"),
            });
        }
        let x = x.max(0.0);
        s.push(x);
        total += x;
    }
    if (total - packing_total).abs() > 1e-7 * packing_total.max(1.0) {
        return Err(LpError::Contract {
            what: "strong duality",
            detail: format!("covering total {total} vs packing total {packing_total}"),
        });
    }
    for si in &mut s {
        *si /= total;
    }
    let check: f64 = s.iter().sum();
    if (check - 1.0).abs() > FEASIBILITY_TOL {
        return Err(LpError::Contract {
            what: "simplex sum",
            detail: format!("sum(s) = {check} after normalization"),
        });
    }

    let dist = ExplorationDistribution::from_weights(g, s);
    if (dist.value - 1.0 / packing_total).abs() > 1e-9 {
        return Err(LpError::Contract {
            what: "objective consistency",
            detail: format!(
                "recomputed min mass {} vs packing reciprocal {}",
                dist.value,
                1.0 / packing_total
            ),
        });
    }

    // Certificate: normalized packing variables form a distribution over the
    // neighborhood constraints whose implied upper bound matches the value.
    let mut dual: Vec<f64> = solution.x.iter().map(|&y| y.max(0.0)).collect();
    let mass: f64 = dual.iter().sum();
    if mass > 0.0 {
        for y in &mut dual {
            *y /= mass;
        }
    } else {
        dual = vec![1.0 / k as f64; k];
    }
    let upper = (0..k)
        .map(|i| g.revealed_by(i).weighted_sum(&dual))
        .fold(f64::NEG_INFINITY, f64::max);
    let gap = upper - dist.value;
    if !(-1e-9..=GAP_TOL).contains(&gap) {
        return Err(LpError::Contract {
            what: "duality gap",
            detail: format!("gap = {gap}"),
        });
    }

    Ok(MaxMinSolution {
        dist,
        dual,
        gap,
        pivots: solution.pivots,
    })
}

/// Uniform distribution on a maximal independent set.
///
/// Cross-checks the LP: by maximality every neighborhood intersects the set,
/// so the value is at least `1 / |set|`. A zero-mass neighborhood flags a
/// non-maximal input.
pub fn independent_set_witness(
    g: &FeedbackGraph,
    indep_set: &[ActionId],
) -> Result<ExplorationDistribution, LpError> {
    if indep_set.is_empty() {
        return Err(LpError::EmptyWitness);
    }
    for &i in indep_set {
        if i >= g.k() {
            return Err(LpError::WitnessOutOfRange { index: i, k: g.k() });
        }
        for &j in indep_set {
            if i != j && g.linked(i, j) {
                return Err(LpError::WitnessNotIndependent(i.min(j), i.max(j)));
            }
        }
    }
    let mut s = vec![0.0; g.k()];
    let share = 1.0 / indep_set.len() as f64;
    for &i in indep_set {
        s[i] = share;
    }
    for j in 0..g.k() {
        if g.neighborhood_mass(j, &s) == 0.0 {
            return Err(LpError::WitnessNotMaximal(j));
        }
    }
    Ok(ExplorationDistribution::from_weights(g, s))
}
