//! Gaussian reward environments: instances with derived gap structure,
//! graph-revealed sampling, seed derivation, and the named hard-instance
//! environments used by the scenario presets.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FeedbackGraph, GraphSpec, CUBE_SIDE_ONE, CUBE_SIDE_TWO};

/// Default noise standard deviation: variance 1/sqrt(2).
pub fn default_sigma() -> f64 {
    (1.0 / std::f64::consts::SQRT_2).sqrt()
}

/// Tolerance for deciding that an arm's mean ties the best mean.
const OPT_TOL: f64 = 1e-12;

/// A reward environment: means in [0,1] plus a shared Gaussian noise scale.
/// Gap structure (gaps, optimal set, extreme gaps) is derived on
/// construction and immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    means: Vec<f64>,
    sigma: f64,
    gaps: Vec<f64>,
    optimal: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct InstanceFile {
    means: Vec<f64>,
    sigma: f64,
}

impl Instance {
    pub fn new(means: Vec<f64>) -> Result<Self> {
        Self::with_sigma(means, default_sigma())
    }

    pub fn with_sigma(means: Vec<f64>, sigma: f64) -> Result<Self> {
        if means.is_empty() {
            return Err(Error::parameter("means", "must be nonempty"));
        }
        if means.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return Err(Error::parameter("means", "must lie in [0,1]"));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::parameter("sigma", "must be finite and nonnegative"));
        }
        let best = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let gaps: Vec<f64> = means.iter().map(|m| (best - m).max(0.0)).collect();
        let optimal: Vec<usize> = (0..means.len()).filter(|&i| gaps[i] <= OPT_TOL).collect();
        let gaps = gaps
            .iter()
            .map(|&g| if g <= OPT_TOL { 0.0 } else { g })
            .collect();
        Ok(Instance {
            means,
            sigma,
            gaps,
            optimal,
        })
    }

    pub fn arm_count(&self) -> usize {
        self.means.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn best_mean(&self) -> f64 {
        self.means[self.optimal[0]]
    }

    /// Gap vector; exactly 0.0 on optimal arms.
    pub fn gaps(&self) -> &[f64] {
        &self.gaps
    }

    /// Indices of optimal arms (ties within 1e-12), ascending; never empty.
    pub fn optimal_set(&self) -> &[usize] {
        &self.optimal
    }

    pub fn is_optimal(&self, i: usize) -> bool {
        self.gaps[i] == 0.0
    }

    /// Smallest gap over suboptimal arms; None when every arm is optimal.
    pub fn delta_min(&self) -> Option<f64> {
        self.gaps
            .iter()
            .filter(|g| **g > 0.0)
            .cloned()
            .reduce(f64::min)
    }

    pub fn delta_max(&self) -> Option<f64> {
        self.gaps
            .iter()
            .filter(|g| **g > 0.0)
            .cloned()
            .reduce(f64::max)
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            means: self.means.clone(),
            sigma: self.sigma,
        };
        serde_json::to_string(&file).expect("instance serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        Instance::with_sigma(file.means, file.sigma)
    }
}

/// One revealed reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub arm: usize,
    pub reward: f64,
}

/// Plays `played` once: draws one Gaussian reward per arm in its closed
/// neighborhood, in ascending arm order.
pub fn sample_round(
    g: &FeedbackGraph,
    inst: &Instance,
    played: usize,
    rng: &mut impl Rng,
) -> Result<Vec<Observation>> {
    if played >= inst.arm_count() {
        return Err(Error::parameter("played", "arm index out of range"));
    }
    let noise = normal(inst.sigma());
    Ok(g.neighbors(played)
        .iter()
        .map(|&j| Observation {
            arm: j,
            reward: inst.means[j] + draw(&noise, rng),
        })
        .collect())
}

/// Plays `played` for `count` consecutive rounds and returns, per revealed
/// arm, the sum of its `count` rewards. A sum of `count` independent
/// N(mu, sigma^2) draws is N(count*mu, count*sigma^2), so one draw per arm
/// reproduces the statistics of the whole block.
pub fn sample_block_sums(
    g: &FeedbackGraph,
    inst: &Instance,
    played: usize,
    count: u64,
    rng: &mut impl Rng,
) -> Result<Vec<Observation>> {
    if played >= inst.arm_count() {
        return Err(Error::parameter("played", "arm index out of range"));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let c = count as f64;
    let noise = normal(inst.sigma() * c.sqrt());
    Ok(g.neighbors(played)
        .iter()
        .map(|&j| Observation {
            arm: j,
            reward: c * inst.means[j] + draw(&noise, rng),
        })
        .collect())
}

fn normal(sigma: f64) -> Option<Normal<f64>> {
    if sigma > 0.0 {
        Some(Normal::new(0.0, sigma).expect("positive sigma"))
    } else {
        None
    }
}

fn draw(noise: &Option<Normal<f64>>, rng: &mut impl Rng) -> f64 {
    match noise {
        Some(n) => n.sample(rng),
        None => 0.0,
    }
}

/// Raises `target`'s mean by exactly `2 * 2^-s`, producing the confusing
/// perturbation of the instance at phase scale `s`.
pub fn make_confusing_instance(inst: &Instance, s: u32, target: usize) -> Result<Instance> {
    if target >= inst.arm_count() {
        return Err(Error::parameter("target", "arm index out of range"));
    }
    let delta_s = 0.5f64.powi(s as i32);
    for &i in inst.optimal_set() {
        if inst.means[i] > 1.0 - 2.0 * delta_s {
            return Err(Error::Precondition(format!(
                "optimal arm {i} has mean {} > 1 - 2*{delta_s}",
                inst.means[i]
            )));
        }
    }
    let raised = inst.means[target] + 2.0 * delta_s;
    if raised > 1.0 {
        return Err(Error::parameter(
            "target",
            format!("raised mean {raised} leaves [0,1]"),
        ));
    }
    let mut means = inst.means.clone();
    means[target] = raised;
    Instance::with_sigma(means, inst.sigma())
}

/// Named environments paired with their graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum PaperInstance {
    /// Star graph; every arm has gap `delta` except one leaf, chosen by
    /// `seed`, which is optimal at mean 0.6.
    Example1Star { k: usize, delta: f64, seed: u64 },
    /// Star-like graph where vertex 1 reveals all but the last leaf; vertex 1
    /// has gap `delta_max`, every other suboptimal arm gap `delta_min`, and
    /// the unseen leaf is optimal.
    Example2StarLike {
        k: usize,
        delta_min: f64,
        delta_max: f64,
    },
    /// Reinforced wheel base environment: spoke arms at `nu - delta`, rim
    /// arms at `nu - k^(1/4) * delta`, hub at `nu - sqrt(k) * delta`.
    ReinforcedWheelBase { k: usize, nu: f64, delta: f64 },
    /// Cube copies, environment A: one side at 1/2, the other at 1/2 - delta,
    /// one seeded arm of the low side raised to 1/2 + 2*delta.
    CubeEnvA { n: usize, delta: f64, seed: u64 },
    /// Environment B: as A but the raised arm sits at 1/2 + epsilon*delta.
    CubeEnvB {
        n: usize,
        delta: f64,
        epsilon: f64,
        seed: u64,
    },
}

/// Builds the named construction.
pub fn paper_instance(which: &PaperInstance) -> Result<(GraphSpec, Instance)> {
    match *which {
        PaperInstance::Example1Star { k, delta, seed } => {
            if k < 2 {
                return Err(Error::parameter("k", "example1_star requires k >= 2"));
            }
            check_gap(delta, 0.6)?;
            let mu_star = 0.6;
            let winner = 1 + (seed as usize % (k - 1));
            let means: Vec<f64> = (0..k)
                .map(|i| if i == winner { mu_star } else { mu_star - delta })
                .collect();
            Ok((GraphSpec::Star { k }, Instance::new(means)?))
        }
        PaperInstance::Example2StarLike {
            k,
            delta_min,
            delta_max,
        } => {
            if k < 4 {
                return Err(Error::parameter("k", "example2_starlike requires k >= 4"));
            }
            check_gap(delta_min, 0.6)?;
            check_gap(delta_max, 0.6)?;
            if delta_min > delta_max {
                return Err(Error::parameter("delta_min", "must not exceed delta_max"));
            }
            let mu_star = 0.6;
            let means: Vec<f64> = (0..k)
                .map(|i| {
                    if i == k - 1 {
                        mu_star
                    } else if i == 1 {
                        mu_star - delta_max
                    } else {
                        mu_star - delta_min
                    }
                })
                .collect();
            Ok((GraphSpec::StarLikeEx2 { k }, Instance::new(means)?))
        }
        PaperInstance::ReinforcedWheelBase { k, nu, delta } => {
            if k < 2 {
                return Err(Error::parameter("k", "reinforced_wheel requires k >= 2"));
            }
            let kf = k as f64;
            let hub_gap = kf.sqrt() * delta;
            if !(0.0..=1.0).contains(&nu) || nu - hub_gap < 0.0 {
                return Err(Error::parameter(
                    "nu",
                    "means must stay in [0,1]; reduce delta or raise nu",
                ));
            }
            let rim_gap = kf.powf(0.25) * delta;
            let means: Vec<f64> = (0..2 * k + 1)
                .map(|v| {
                    if v == 0 {
                        nu - hub_gap
                    } else if v % 2 == 0 {
                        nu - delta
                    } else {
                        nu - rim_gap
                    }
                })
                .collect();
            Ok((GraphSpec::ReinforcedWheel { k }, Instance::new(means)?))
        }
        PaperInstance::CubeEnvA { n, delta, seed } => cube_env(n, delta, 2.0 * delta, seed),
        PaperInstance::CubeEnvB {
            n,
            delta,
            epsilon,
            seed,
        } => {
            if !(0.0..1.0).contains(&epsilon) {
                return Err(Error::parameter("epsilon", "must lie in (0,1)"));
            }
            cube_env(n, delta, epsilon * delta, seed)
        }
    }
}

fn check_gap(delta: f64, mu_star: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= mu_star) {
        return Err(Error::parameter(
            "delta",
            format!("must lie in (0, {mu_star}]"),
        ));
    }
    Ok(())
}

fn cube_env(n: usize, delta: f64, lift: f64, seed: u64) -> Result<(GraphSpec, Instance)> {
    if n < 1 {
        return Err(Error::parameter("n", "cube environment requires n >= 1"));
    }
    if !(delta > 0.0 && delta < 0.25) {
        return Err(Error::parameter("delta", "must lie in (0, 1/4)"));
    }
    let mut means = vec![0.0f64; 8 * n];
    for c in 0..n {
        for &v in CUBE_SIDE_TWO.iter() {
            means[8 * c + v] = 0.5;
        }
        for &v in CUBE_SIDE_ONE.iter() {
            means[8 * c + v] = 0.5 - delta;
        }
    }
    // The optimal arm is one seeded low-side vertex, raised above 1/2.
    let pick = derive_seed(seed, 0, 0) as usize % (4 * n);
    let (copy, side) = (pick / 4, pick % 4);
    means[8 * copy + CUBE_SIDE_ONE[side]] = 0.5 + lift;
    Ok((GraphSpec::CubeCopies { n }, Instance::new(means)?))
}

/// Derives the seed for replicate `replicate` of experiment `experiment`
/// from a master seed, via two rounds of the splitmix64 finalizer. Distinct
/// (experiment, replicate) pairs get statistically independent streams.
pub fn derive_seed(master: u64, experiment: u64, replicate: u64) -> u64 {
    let a = splitmix(master ^ experiment.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    splitmix(a ^ replicate.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gap_structure() {
        let inst = Instance::new(vec![0.5, 0.25, 0.5, 0.1]).unwrap();
        assert_eq!(inst.optimal_set(), &[0, 2]);
        assert_eq!(inst.gaps(), &[0.0, 0.25, 0.0, 0.4]);
        assert_eq!(inst.delta_min(), Some(0.25));
        assert_eq!(inst.delta_max(), Some(0.4));
        assert!((inst.sigma() - (1.0f64 / std::f64::consts::SQRT_2).sqrt()).abs() < 1e-15);

        let flat = Instance::new(vec![0.3, 0.3]).unwrap();
        assert_eq!(flat.optimal_set(), &[0, 1]);
        assert_eq!(flat.delta_min(), None);
    }

    #[test]
    fn invalid_means_rejected() {
        assert!(Instance::new(vec![]).is_err());
        assert!(Instance::new(vec![1.2]).is_err());
        assert!(Instance::new(vec![-0.1]).is_err());
        assert!(Instance::with_sigma(vec![0.5], -1.0).is_err());
    }

    #[test]
    fn zero_noise_returns_means() {
        let g = generate(&GraphSpec::Star { k: 4 }).unwrap();
        let inst = Instance::with_sigma(vec![0.5, 0.2, 0.9, 0.4], 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let obs = sample_round(&g, &inst, 0, &mut rng).unwrap();
        assert_eq!(obs.len(), 4);
        for o in obs {
            assert_eq!(o.reward, inst.means()[o.arm]);
        }
    }

    #[test]
    fn bandit_reveals_only_played_arm() {
        let g = generate(&GraphSpec::Bandit { k: 3 }).unwrap();
        let inst = Instance::new(vec![0.1, 0.2, 0.3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let obs = sample_round(&g, &inst, 2, &mut rng).unwrap();
        assert_eq!(obs.len(), 1);
        assert_eq!(obs[0].arm, 2);
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = generate(&GraphSpec::Complete { k: 5 }).unwrap();
        let inst = Instance::new(vec![0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        let a = sample_round(&g, &inst, 1, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_round(&g, &inst, 1, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn block_sums_match_expectation_shape() {
        let g = generate(&GraphSpec::Bandit { k: 2 }).unwrap();
        let inst = Instance::with_sigma(vec![0.25, 0.5], 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let obs = sample_block_sums(&g, &inst, 1, 100, &mut rng).unwrap();
        assert_eq!(obs.len(), 1);
        assert_eq!(obs[0].reward, 50.0);
        assert!(sample_block_sums(&g, &inst, 0, 0, &mut rng)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn confusing_instance_examples() {
        // delta_s = 0.1 is not a power of two; use s such that 2^-s = 0.125.
        let inst = Instance::new(vec![0.5, 0.3]).unwrap();
        let out = make_confusing_instance(&inst, 3, 1).unwrap();
        assert_eq!(out.means(), &[0.5, 0.55]);
        assert_eq!(out.optimal_set(), &[1]);
        // Exactly one coordinate moved, by exactly 2 * 2^-3.
        assert_eq!(out.means()[0], inst.means()[0]);
        assert!((out.means()[1] - inst.means()[1] - 0.25).abs() < 1e-15);

        // Hypothesis violation: optimal mean too close to 1.
        let high = Instance::new(vec![0.95, 0.3]).unwrap();
        assert!(make_confusing_instance(&high, 2, 1).is_err());

        // Raised mean would exceed 1.
        let edge = Instance::new(vec![0.5, 0.49]).unwrap();
        assert!(make_confusing_instance(&edge, 1, 1).is_err());
    }

    #[test]
    fn example1_star_means() {
        let (spec, inst) = paper_instance(&PaperInstance::Example1Star {
            k: 5,
            delta: 0.1,
            seed: 2,
        })
        .unwrap();
        assert_eq!(spec, GraphSpec::Star { k: 5 });
        let winner = inst.optimal_set()[0];
        assert!(winner >= 1);
        assert_eq!(inst.means()[winner], 0.6);
        for i in 0..5 {
            if i != winner {
                assert!((inst.means()[i] - 0.5).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn example2_starlike_means() {
        let (spec, inst) = paper_instance(&PaperInstance::Example2StarLike {
            k: 6,
            delta_min: 0.05,
            delta_max: 0.3,
        })
        .unwrap();
        assert_eq!(spec, GraphSpec::StarLikeEx2 { k: 6 });
        assert_eq!(inst.optimal_set(), &[5]);
        assert!((inst.means()[1] - 0.3).abs() < 1e-15);
        assert!((inst.means()[0] - 0.55).abs() < 1e-15);
    }

    #[test]
    fn reinforced_wheel_base_means() {
        let (spec, inst) = paper_instance(&PaperInstance::ReinforcedWheelBase {
            k: 16,
            nu: 0.9,
            delta: 0.05,
        })
        .unwrap();
        assert_eq!(spec, GraphSpec::ReinforcedWheel { k: 16 });
        assert_eq!(inst.arm_count(), 33);
        // 16^(1/4) = 2, sqrt(16) = 4.
        assert!((inst.means()[0] - 0.7).abs() < 1e-12);
        assert!((inst.means()[2] - 0.85).abs() < 1e-12);
        assert!((inst.means()[1] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn cube_env_means() {
        let (spec, inst) = paper_instance(&PaperInstance::CubeEnvA {
            n: 2,
            delta: 0.1,
            seed: 5,
        })
        .unwrap();
        assert_eq!(spec, GraphSpec::CubeCopies { n: 2 });
        assert_eq!(inst.arm_count(), 16);
        let mut half = 0;
        let mut low = 0;
        let mut high = 0;
        for &m in inst.means() {
            if (m - 0.5).abs() < 1e-12 {
                half += 1;
            } else if (m - 0.4).abs() < 1e-12 {
                low += 1;
            } else if (m - 0.7).abs() < 1e-12 {
                high += 1;
            }
        }
        assert_eq!((half, low, high), (8, 7, 1));

        let (_, b) = paper_instance(&PaperInstance::CubeEnvB {
            n: 1,
            delta: 0.1,
            epsilon: 0.1,
            seed: 5,
        })
        .unwrap();
        assert!((b.best_mean() - 0.51).abs() < 1e-12);
    }

    #[test]
    fn derive_seed_spreads() {
        let s = derive_seed(42, 0, 0);
        assert_ne!(s, derive_seed(42, 0, 1));
        assert_ne!(s, derive_seed(42, 1, 0));
        assert_ne!(s, derive_seed(43, 0, 0));
        assert_eq!(s, derive_seed(42, 0, 0));
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = Instance::new(vec![0.1, 0.9]).unwrap();
        let back = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
        assert!(Instance::from_json(r#"{"means":[2.0],"sigma":0.5}"#).is_err());
    }
}
