//! Instance-complexity quantities. Both headline numbers are covering LPs
//! over closed neighborhoods: `c_star` prices out the asymptotic regime,
//! `d_star` takes the worst phase of the finite-time profile `D(s)`.

use serde::{Deserialize, Serialize};

use crate::env::Instance;
use crate::error::{Error, Result};
use crate::graph::{self, FeedbackGraph, MisResult};
use crate::lp::{solve_covering_lp, CoverRow, CoveringLp, LpSolution, LpStatus, DEFAULT_TOL};

/// Gap scale of phase `s`.
pub fn delta_s(s: u32) -> f64 {
    0.5f64.powi(s as i32)
}

/// Gaps clipped from below at the phase scale: `max(delta_s, gap_i)`.
pub fn clipped_gaps(inst: &Instance, s: u32) -> Vec<f64> {
    let d = delta_s(s);
    inst.gaps().iter().map(|g| g.max(d)).collect()
}

/// Arms not yet separable from optimal at phase `s`: gap at most `2*delta_s`.
pub fn gamma_s(inst: &Instance, s: u32) -> Vec<usize> {
    let bound = 2.0 * delta_s(s);
    (0..inst.arm_count())
        .filter(|&i| inst.gaps()[i] <= bound)
        .collect()
}

/// The phase grid induced by a horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub horizon: u64,
    pub num_phases: u32,
}

impl PhaseSchedule {
    pub fn new(horizon: u64) -> Result<Self> {
        if horizon < 1 {
            return Err(Error::parameter("horizon", "must be at least 1"));
        }
        let num_phases = (horizon as f64).log2().ceil().max(1.0) as u32;
        Ok(PhaseSchedule {
            horizon,
            num_phases,
        })
    }

    /// Phases 1..=num_phases; the gap scale halves each step.
    pub fn phases(&self) -> std::ops::RangeInclusive<u32> {
        1..=self.num_phases
    }
}

/// Solves the asymptotic covering LP: minimize `<gaps, x>` subject to
/// `sum_{j in N_i} x_j >= 1/gap_i^2` for every suboptimal arm `i`.
pub fn c_star(g: &FeedbackGraph, inst: &Instance) -> Result<LpSolution> {
    check_dims(g, inst)?;
    let rows: Vec<CoverRow> = (0..inst.arm_count())
        .filter(|&i| !inst.is_optimal(i))
        .map(|i| CoverRow {
            support: g.neighbors(i).to_vec(),
            threshold: 1.0 / (inst.gaps()[i] * inst.gaps()[i]),
        })
        .collect();
    if rows.is_empty() {
        return Ok(zero_solution(inst.arm_count()));
    }
    let lp = CoveringLp::new(inst.gaps().to_vec(), rows)?;
    solve_covering_lp(&lp, DEFAULT_TOL)
}

/// Solves the phase-`s` LP: minimize `<clipped gaps, x>` subject to
/// `sum_{j in N_i} x_j >= 1/delta_s^2` for every arm of `gamma_s`.
pub fn d_lp2(g: &FeedbackGraph, inst: &Instance, s: u32) -> Result<LpSolution> {
    check_dims(g, inst)?;
    if s < 1 {
        return Err(Error::parameter("s", "phase index starts at 1"));
    }
    let d = delta_s(s);
    let threshold = 1.0 / (d * d);
    let rows: Vec<CoverRow> = gamma_s(inst, s)
        .into_iter()
        .map(|i| CoverRow {
            support: g.neighbors(i).to_vec(),
            threshold,
        })
        .collect();
    let lp = CoveringLp::new(clipped_gaps(inst, s), rows)?;
    solve_covering_lp(&lp, DEFAULT_TOL)
}

/// The per-phase profile and its maximum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DStarReport {
    /// `profile[s-1]` is the value of the phase-`s` LP.
    pub profile: Vec<f64>,
    pub d_star: f64,
    pub argmax_s: u32,
    pub duality_gaps: Vec<f64>,
}

/// Evaluates the phase LP for `s = 1..=floor(log2(|opt|/delta_min))`, forced
/// to include at least `s = 1`, and takes the maximum. All-optimal instances
/// have an empty profile and `d_star = 0`.
pub fn d_star(g: &FeedbackGraph, inst: &Instance) -> Result<DStarReport> {
    check_dims(g, inst)?;
    let Some(delta_min) = inst.delta_min() else {
        return Ok(DStarReport {
            profile: Vec::new(),
            d_star: 0.0,
            argmax_s: 0,
            duality_gaps: Vec::new(),
        });
    };
    let ratio = inst.optimal_set().len() as f64 / delta_min;
    let s_max = (ratio.log2().floor() as i64).max(1) as u32;
    let mut profile = Vec::new();
    let mut duality_gaps = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let mut argmax_s = 1;
    for s in 1..=s_max {
        let sol = d_lp2(g, inst, s)?;
        if sol.value > best {
            best = sol.value;
            argmax_s = s;
        }
        duality_gaps.push(sol.value - sol.dual_value);
        profile.push(sol.value);
    }
    Ok(DStarReport {
        profile,
        d_star: best,
        argmax_s,
        duality_gaps,
    })
}

/// Upper bound on `d_star`: the maximum over independent sets of the summed
/// inverse gaps of their suboptimal members. Optimal arms get weight zero.
/// `exact` is false when the graph exceeded the branch-and-bound limit.
pub fn independent_set_bound(g: &FeedbackGraph, inst: &Instance) -> Result<MisResult> {
    check_dims(g, inst)?;
    let weights: Vec<f64> = inst
        .gaps()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 0.0 })
        .collect();
    graph::max_weight_independent_set(g, &weights)
}

/// The phase-LP value read as the minimax regret floor over the confusing
/// perturbation class at phase `s`; the hypothesis requires every optimal
/// mean to leave room for a `2*delta_s` lift.
pub fn confusing_value(g: &FeedbackGraph, inst: &Instance, s: u32) -> Result<f64> {
    let d = delta_s(s);
    for &i in inst.optimal_set() {
        if inst.means()[i] > 1.0 - 2.0 * d {
            return Err(Error::Precondition(format!(
                "optimal arm {i} has mean {} > 1 - 2*{d}",
                inst.means()[i]
            )));
        }
    }
    Ok(d_lp2(g, inst, s)?.value)
}

/// Closed-form expected regrets of the two base strategies on the two cube
/// environments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubeTable {
    pub a_env_a: f64,
    pub a_env_b: f64,
    pub b_env_a: f64,
    pub b_env_b: f64,
}

pub fn cube_scenario_table(n: usize, delta: f64, epsilon: f64) -> Result<CubeTable> {
    if n < 1 {
        return Err(Error::parameter("n", "must be at least 1"));
    }
    if !(delta > 0.0 && delta < 0.25) {
        return Err(Error::parameter("delta", "must lie in (0, 1/4)"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::parameter("epsilon", "must lie in (0,1)"));
    }
    let nf = n as f64;
    Ok(CubeTable {
        a_env_a: nf / (3.0 * delta),
        a_env_b: nf / ((1.0 + epsilon) * delta),
        b_env_a: 4.0 * nf / (9.0 * delta),
        b_env_b: 4.0 * nf * epsilon / ((1.0 + epsilon) * (1.0 + epsilon) * delta),
    })
}

/// Rounds a positive gap down to the nearest power of two; zero stays zero.
pub fn clip_gap(delta: f64) -> f64 {
    if delta <= 0.0 {
        0.0
    } else {
        2.0f64.powi(delta.log2().floor() as i32)
    }
}

/// Rebuilds the instance with every gap rounded down to a power of two
/// (means move up toward the best mean accordingly).
pub fn clipped_instance(inst: &Instance) -> Result<Instance> {
    let best = inst.best_mean();
    let means: Vec<f64> = inst.gaps().iter().map(|&d| best - clip_gap(d)).collect();
    Instance::with_sigma(means, inst.sigma())
}

/// Everything `analyze` knows about a (graph, instance) pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub c_star: f64,
    /// Indexed by phase: `d_profile[s-1]` is the phase-`s` LP value.
    pub d_profile: Vec<f64>,
    pub d_star: f64,
    pub argmax_s: u32,
    pub is_bound: f64,
    pub star_condition: bool,
    /// Primal-minus-dual gap of the `c_star` LP followed by each phase LP.
    pub duality_gaps: Vec<f64>,
}

pub fn analyze(g: &FeedbackGraph, inst: &Instance) -> Result<ComplexityReport> {
    let c = c_star(g, inst)?;
    let d = d_star(g, inst)?;
    let bound = independent_set_bound(g, inst)?;
    let mut duality_gaps = vec![c.value - c.dual_value];
    duality_gaps.extend(d.duality_gaps.iter());
    Ok(ComplexityReport {
        c_star: c.value,
        d_profile: d.profile,
        d_star: d.d_star,
        argmax_s: d.argmax_s,
        is_bound: bound.weight,
        star_condition: graph::check_dstar_condition(g),
        duality_gaps,
    })
}

fn check_dims(g: &FeedbackGraph, inst: &Instance) -> Result<()> {
    if g.vertex_count() != inst.arm_count() {
        return Err(Error::parameter(
            "instance",
            format!(
                "graph has {} vertices but instance has {} arms",
                g.vertex_count(),
                inst.arm_count()
            ),
        ));
    }
    Ok(())
}

fn zero_solution(_k: usize) -> LpSolution {
    LpSolution {
        primal: vec![0.0; _k],
        value: 0.0,
        dual: Vec::new(),
        dual_value: 0.0,
        status: LpStatus::Optimal,
    }
}
