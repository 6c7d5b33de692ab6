//! The phased LP learner and a UCB-N baseline.
//!
//! The learner runs in doubling phases targeting gap scale `2^-s`. Early
//! phases play a greedy dominating set on a fixed schedule; afterwards each
//! phase solves an empirical covering LP over the current gap estimates and
//! executes its (rounded) solution. Fractional LP mass is carried across
//! phases in a per-arm buffer so that long-run play counts track the LP.
//!
//! Plays are executed in blocks: a block of `c` pulls of one arm draws a
//! single Gaussian per revealed neighbor with the distribution of the
//! `c`-round sum, which keeps horizons like 10^10 tractable without changing
//! the statistics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::complexity::{clip_gap, delta_s};
use crate::env::{sample_block_sums, Instance};
use crate::error::{Error, Result};
use crate::graph::{greedy_dominating_set, FeedbackGraph};
use crate::lp::{solve_covering_lp, CoverRow, CoveringLp, DEFAULT_TOL};

/// Learner parameters. `paper` uses the constants the regret analysis needs;
/// `demo` shrinks them to values that behave at desk scale (no theoretical
/// guarantees attached).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgoConfig {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub horizon: u64,
    pub lp_tol: f64,
    pub clip_gaps: bool,
}

impl AlgoConfig {
    pub fn paper(horizon: u64) -> Self {
        AlgoConfig {
            alpha: 4.0,
            alpha_prime: 3072.0,
            horizon,
            lp_tol: DEFAULT_TOL,
            clip_gaps: false,
        }
    }

    pub fn demo(horizon: u64) -> Self {
        AlgoConfig {
            alpha: 1.5,
            alpha_prime: 8.0,
            horizon,
            lp_tol: DEFAULT_TOL,
            clip_gaps: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0) {
            return Err(Error::parameter("alpha", "must exceed 1"));
        }
        if self.alpha_prime < self.alpha {
            return Err(Error::parameter("alpha_prime", "must be at least alpha"));
        }
        if self.horizon < 1 {
            return Err(Error::parameter("horizon", "must be at least 1"));
        }
        if !(self.lp_tol > 0.0 && self.lp_tol < 1.0) {
            return Err(Error::parameter("lp_tol", "must lie in (0,1)"));
        }
        Ok(())
    }
}

/// Confidence half-width after `n` observations in phase `s`:
/// `sqrt(3 * alpha * ln(k / 2^-(s+1)) / n)`.
pub fn confidence_bonus(n: u64, s: u32, k: usize, alpha: f64) -> f64 {
    debug_assert!(n >= 1, "bonus undefined before the first observation");
    let log_term = (k as f64 / delta_s(s + 1)).ln();
    (3.0 * alpha * log_term / n as f64).sqrt()
}

/// Empirical gaps at phase `s`, clipped from below at the phase scale:
/// `max(delta_s, max_j(r_j - b_j) - r_i - b_i)`.
pub fn empirical_gaps(r_hat: &[f64], bonus: &[f64], s: u32) -> Vec<f64> {
    let d = delta_s(s);
    let pivot = r_hat
        .iter()
        .zip(bonus)
        .map(|(r, b)| r - b)
        .fold(f64::NEG_INFINITY, f64::max);
    r_hat
        .iter()
        .zip(bonus)
        .map(|(r, b)| (pivot - r - b).max(d))
        .collect()
}

/// Arms whose previous-phase gap estimate still allows them to be within
/// `2 * delta_s` of optimal.
pub fn active_set(prev_gaps: &[f64], s: u32) -> Vec<bool> {
    let bound = 2.0 * delta_s(s);
    prev_gaps.iter().map(|g| *g <= bound).collect()
}

/// The phase-`s` empirical LP: costs are the previous phase's gap estimates;
/// active arms get the full exploration threshold, eliminated arms only what
/// their estimated gap warrants.
pub fn build_lp3(
    g: &FeedbackGraph,
    prev_gaps: &[f64],
    active: &[bool],
    s: u32,
    alpha_prime: f64,
) -> Result<CoveringLp> {
    let k = g.vertex_count();
    if prev_gaps.len() != k || active.len() != k {
        return Err(Error::parameter("prev_gaps", "length must match the graph"));
    }
    let d = delta_s(s);
    let log_term = (k as f64 / delta_s(s + 1)).ln();
    let rows: Vec<CoverRow> = (0..k)
        .map(|i| CoverRow {
            support: g.neighbors(i).to_vec(),
            threshold: if active[i] {
                alpha_prime * log_term / (d * d)
            } else {
                alpha_prime / (prev_gaps[i] * prev_gaps[i])
            },
        })
        .collect();
    CoveringLp::new(prev_gaps.to_vec(), rows)
}

/// Rounds an LP solution to integer play counts. Mass of at least one is
/// played under a ceiling; fractional mass accumulates in `buffer`, with a
/// play exactly when the arm is fresh (`buffer == 0`) or the accumulated
/// mass crosses an integer boundary.
pub fn phase_plan(x: &[f64], buffer: &mut [f64]) -> Result<Vec<u64>> {
    if x.len() != buffer.len() {
        return Err(Error::parameter("buffer", "length must match the solution"));
    }
    if x.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::parameter("x", "entries must be finite nonnegative"));
    }
    let plays = x
        .iter()
        .zip(buffer.iter_mut())
        .map(|(&xi, b)| {
            if xi >= 1.0 {
                xi.ceil() as u64
            } else if xi > 0.0 {
                let play = if *b == 0.0 || (*b + xi).floor() > b.floor() {
                    1
                } else {
                    0
                };
                *b += xi;
                play
            } else {
                0
            }
        })
        .collect();
    Ok(plays)
}

/// A maximal run of consecutive pulls of one arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlayBlock {
    pub arm: usize,
    pub plays: u64,
    /// Round count after the block.
    pub t_end: u64,
    /// Cumulative pseudo-regret after the block.
    pub regret_end: f64,
    /// True gap of `arm`; regret grows linearly with this slope inside the
    /// block.
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    Init,
    Lp,
}

/// Per-phase bookkeeping: scheduling target, LP certificate, and where the
/// phase ended.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub s: u32,
    pub kind: PhaseKind,
    pub t_end: u64,
    pub regret_end: f64,
    pub lp_value: Option<f64>,
    pub duality_gap: Option<f64>,
    /// Gap estimates the phase was planned with (LP phases only); for the
    /// phase indexed `s` these are the estimates at scale `s - 1`.
    pub emp_gaps: Option<Vec<f64>>,
    pub truncated: bool,
}

/// Full record of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegretTrace {
    pub seed: u64,
    pub horizon: u64,
    pub blocks: Vec<PlayBlock>,
    pub phases: Vec<PhaseRecord>,
    pub final_regret: f64,
    pub total_plays: Vec<u64>,
    /// Per-arm scheduling mass: initialization targets plus LP mass, before
    /// rounding. Rounded play counts stay within a small factor of this.
    pub total_lp_mass: Vec<f64>,
}

impl RegretTrace {
    /// Cumulative pseudo-regret after round `t` (exact: regret is linear in
    /// `t` inside each block).
    pub fn regret_at(&self, t: u64) -> f64 {
        let t = t.min(self.horizon);
        let idx = self.blocks.partition_point(|b| b.t_end < t);
        match self.blocks.get(idx) {
            None => self.final_regret,
            Some(b) => b.regret_end - (b.t_end - t) as f64 * b.gap,
        }
    }
}

/// Accumulates blocks, merging consecutive pulls of the same arm.
struct TraceBuilder {
    blocks: Vec<PlayBlock>,
    t: u64,
    regret: f64,
    total_plays: Vec<u64>,
}

impl TraceBuilder {
    fn new(k: usize) -> Self {
        TraceBuilder {
            blocks: Vec::new(),
            t: 0,
            regret: 0.0,
            total_plays: vec![0; k],
        }
    }

    fn push(&mut self, arm: usize, plays: u64, gap: f64) {
        if plays == 0 {
            return;
        }
        self.t += plays;
        self.regret += plays as f64 * gap;
        self.total_plays[arm] += plays;
        match self.blocks.last_mut() {
            Some(last) if last.arm == arm => {
                last.plays += plays;
                last.t_end = self.t;
                last.regret_end = self.regret;
            }
            _ => self.blocks.push(PlayBlock {
                arm,
                plays,
                t_end: self.t,
                regret_end: self.regret,
                gap,
            }),
        }
    }
}

struct ArmStats {
    counts: Vec<u64>,
    sums: Vec<f64>,
}

impl ArmStats {
    fn new(k: usize) -> Self {
        ArmStats {
            counts: vec![0; k],
            sums: vec![0.0; k],
        }
    }

    fn absorb(&mut self, obs: &[crate::env::Observation], plays: u64) {
        for o in obs {
            self.counts[o.arm] += plays;
            self.sums[o.arm] += o.reward;
        }
    }

    fn means(&self) -> Result<Vec<f64>> {
        self.counts
            .iter()
            .zip(&self.sums)
            .enumerate()
            .map(|(i, (&n, &s))| {
                if n == 0 {
                    Err(Error::State(format!("arm {i} never observed")))
                } else {
                    Ok(s / n as f64)
                }
            })
            .collect()
    }
}

/// Runs the phased LP learner for exactly `config.horizon` rounds.
pub fn run_algorithm(
    g: &FeedbackGraph,
    inst: &Instance,
    config: &AlgoConfig,
    seed: u64,
) -> Result<RegretTrace> {
    config.validate()?;
    let k = g.vertex_count();
    if inst.arm_count() != k {
        return Err(Error::parameter("instance", "arm count must match graph"));
    }
    let horizon = config.horizon;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tb = TraceBuilder::new(k);
    let mut stats = ArmStats::new(k);
    let mut phases: Vec<PhaseRecord> = Vec::new();
    let mut total_lp_mass = vec![0.0f64; k];
    let gaps = inst.gaps();

    // Initialization: phases 0..=ceil(log2 K), greedy dominating set on a
    // fixed per-phase schedule.
    let dom = greedy_dominating_set(g);
    let init_last = (k as f64).log2().ceil() as u32;
    let mut s = 0u32;
    'init: while s <= init_last {
        let d = delta_s(s);
        let log_term = (k as f64 / delta_s(s + 1)).ln();
        let target = config.alpha_prime * log_term / (d * d);
        for &arm in &dom {
            total_lp_mass[arm] += target;
            let want = target.ceil().min((horizon - tb.t) as f64) as u64;
            let obs = sample_block_sums(g, inst, arm, want, &mut rng)?;
            stats.absorb(&obs, want);
            tb.push(arm, want, gaps[arm]);
            if tb.t >= horizon {
                phases.push(PhaseRecord {
                    s,
                    kind: PhaseKind::Init,
                    t_end: tb.t,
                    regret_end: tb.regret,
                    lp_value: None,
                    duality_gap: None,
                    emp_gaps: None,
                    truncated: true,
                });
                break 'init;
            }
        }
        phases.push(PhaseRecord {
            s,
            kind: PhaseKind::Init,
            t_end: tb.t,
            regret_end: tb.regret,
            lp_value: None,
            duality_gap: None,
            emp_gaps: None,
            truncated: false,
        });
        s += 1;
    }

    // LP phases: pick up where initialization stopped.
    let mut buffer = vec![0.0f64; k];
    let mut s = init_last + 1;
    while tb.t < horizon {
        let r_hat = stats.means()?;
        let bonus: Vec<f64> = stats
            .counts
            .iter()
            .map(|&n| confidence_bonus(n, s - 1, k, config.alpha))
            .collect();
        let mut prev_gaps = empirical_gaps(&r_hat, &bonus, s - 1);
        if config.clip_gaps {
            let d = delta_s(s - 1);
            for gp in &mut prev_gaps {
                *gp = clip_gap(*gp).max(clip_gap(d));
            }
        }
        let active = active_set(&prev_gaps, s);
        let lp = build_lp3(g, &prev_gaps, &active, s, config.alpha_prime)?;
        let sol = solve_covering_lp(&lp, config.lp_tol)?;
        for (m, x) in total_lp_mass.iter_mut().zip(&sol.primal) {
            *m += x;
        }
        let plays = phase_plan(&sol.primal, &mut buffer)?;
        let mut truncated = false;
        for (arm, &n) in plays.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let n = n.min(horizon - tb.t);
            let obs = sample_block_sums(g, inst, arm, n, &mut rng)?;
            stats.absorb(&obs, n);
            tb.push(arm, n, gaps[arm]);
            if tb.t >= horizon {
                truncated = arm + 1 < plays.len() || n < plays[arm];
                break;
            }
        }
        phases.push(PhaseRecord {
            s,
            kind: PhaseKind::Lp,
            t_end: tb.t,
            regret_end: tb.regret,
            lp_value: Some(sol.value),
            duality_gap: Some(sol.value - sol.dual_value),
            emp_gaps: Some(prev_gaps),
            truncated,
        });
        s += 1;
    }

    Ok(RegretTrace {
        seed,
        horizon,
        blocks: tb.blocks,
        phases,
        final_regret: tb.regret,
        total_plays: tb.total_plays,
        total_lp_mass,
    })
}

/// UCB-N baseline: plays the arm with the highest index
/// `mean + sqrt(2 ln t / n)`, unobserved arms first, and updates every
/// revealed neighbor.
pub fn run_ucbn(g: &FeedbackGraph, inst: &Instance, horizon: u64, seed: u64) -> Result<RegretTrace> {
    let k = g.vertex_count();
    if inst.arm_count() != k {
        return Err(Error::parameter("instance", "arm count must match graph"));
    }
    if horizon < 1 {
        return Err(Error::parameter("horizon", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tb = TraceBuilder::new(k);
    let mut stats = ArmStats::new(k);
    let gaps = inst.gaps();

    for t in 1..=horizon {
        let arm = match stats.counts.iter().position(|&n| n == 0) {
            Some(unseen) => unseen,
            None => {
                let log_t = (t as f64).ln();
                let mut best = 0usize;
                let mut best_idx = f64::NEG_INFINITY;
                for i in 0..k {
                    let n = stats.counts[i] as f64;
                    let idx = stats.sums[i] / n + (2.0 * log_t / n).sqrt();
                    if idx > best_idx {
                        best_idx = idx;
                        best = i;
                    }
                }
                best
            }
        };
        let obs = sample_block_sums(g, inst, arm, 1, &mut rng)?;
        stats.absorb(&obs, 1);
        tb.push(arm, 1, gaps[arm]);
    }

    Ok(RegretTrace {
        seed,
        horizon,
        blocks: tb.blocks,
        phases: Vec::new(),
        final_regret: tb.regret,
        total_plays: tb.total_plays,
        total_lp_mass: Vec::new(),
    })
}
