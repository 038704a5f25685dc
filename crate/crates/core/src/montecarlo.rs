//! Monte Carlo oracle: sample production failures, propagate demand and
//! supply through a layered network, price each tier at the market-clearing
//! level and average the realized payoffs.
//!
//! Sample `k` draws from a ChaCha8 stream selected by `(seed, k)`, so every
//! estimate depends only on the seed and sample count, never on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, ScnError};
use crate::model::{HeteroParams, ModelParams, Network};

const CHUNK: u64 = 1024;

/// Per-agent success probabilities and congestion coefficients, indexed by
/// tier then agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRates {
    pub demand: f64,
    pub c: f64,
    pub lambda: Vec<Vec<f64>>,
    /// Congestion coefficient charged to buyers of each agent; unused for
    /// the first tier.
    pub gamma: Vec<Vec<f64>>,
}

impl AgentRates {
    fn check(&self, net: &Network) -> Result<()> {
        let sizes: Vec<usize> = self.lambda.iter().map(Vec::len).collect();
        if sizes != net.tiers() || self.gamma.iter().map(Vec::len).ne(sizes.iter().copied()) {
            return Err(ScnError::DimensionMismatch {
                required: format!("tiers {:?}", net.tiers()),
                actual: format!("rates for tiers {sizes:?}"),
            });
        }
        Ok(())
    }
}

/// Anything that yields per-agent rates for a network.
pub trait Rates {
    fn agent_rates(&self, net: &Network) -> Result<AgentRates>;
}

impl Rates for AgentRates {
    fn agent_rates(&self, net: &Network) -> Result<AgentRates> {
        self.check(net)?;
        Ok(self.clone())
    }
}

impl Rates for ModelParams {
    fn agent_rates(&self, net: &Network) -> Result<AgentRates> {
        self.validate()?;
        if self.tier_sizes() != net.tiers() {
            return Err(ScnError::DimensionMismatch {
                required: format!("tiers {:?}", self.tier_sizes()),
                actual: format!("network tiers {:?}", net.tiers()),
            });
        }
        Ok(AgentRates {
            demand: self.demand,
            c: self.c,
            lambda: net.tiers().iter().map(|&k| vec![self.lambda; k]).collect(),
            gamma: net.tiers().iter().map(|&k| vec![self.gamma; k]).collect(),
        })
    }
}

impl Rates for HeteroParams {
    fn agent_rates(&self, net: &Network) -> Result<AgentRates> {
        self.validate()?;
        if net.tiers() != [self.n, self.m] {
            return Err(ScnError::DimensionMismatch {
                required: format!("{}x{} two-tier network", self.n, self.m),
                actual: format!("tiers {:?}", net.tiers()),
            });
        }
        Ok(AgentRates {
            demand: self.demand,
            c: self.c,
            lambda: vec![vec![self.lambda_r; self.n], self.lambda_sup.clone()],
            gamma: vec![vec![0.0; self.n], self.gamma_sup.clone()],
        })
    }
}

/// One sampled outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub omega: Vec<Vec<bool>>,
    pub demand: Vec<Vec<f64>>,
    pub realized: Vec<Vec<f64>>,
    pub supply: Vec<Vec<f64>>,
    /// Σᵢ S_{t,i} per tier.
    pub tier_supply: Vec<f64>,
    /// Market-clearing prices p_t = Δ − S_t, plus the raw-material price
    /// Δ − Σ R of the top tier as the last entry.
    pub prices: Vec<f64>,
    pub payoff: Vec<Vec<f64>>,
}

impl Realization {
    /// Largest |Σⱼ S_{t+1,j} − Σᵢ R_{t,i}| over adjacent tier pairs.
    pub fn clearing_residual(&self) -> f64 {
        (0..self.supply.len() - 1)
            .map(|t| {
                let up: f64 = self.supply[t + 1].iter().sum();
                let down: f64 = self.realized[t].iter().sum();
                (up - down).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Buffers for one realization, reused across samples.
struct Workspace {
    omega: Vec<Vec<bool>>,
    demand: Vec<Vec<f64>>,
    realized: Vec<Vec<f64>>,
    supply: Vec<Vec<f64>>,
    prices: Vec<f64>,
    payoff: Vec<Vec<f64>>,
}

impl Workspace {
    fn new(net: &Network, rates: &AgentRates) -> Self {
        let zeros = |k: &usize| vec![0.0; *k];
        let mut ws = Self {
            omega: net.tiers().iter().map(|&k| vec![false; k]).collect(),
            demand: net.tiers().iter().map(zeros).collect(),
            realized: net.tiers().iter().map(zeros).collect(),
            supply: net.tiers().iter().map(zeros).collect(),
            prices: vec![0.0; net.tier_count() + 1],
            payoff: net.tiers().iter().map(zeros).collect(),
        };
        // demand does not depend on ω
        ws.demand[0].fill(rates.demand);
        for t in 0..net.tier_count() - 1 {
            let (lower, upper) = ws.demand.split_at_mut(t + 1);
            upper[0].fill(0.0);
            for (i, set) in net.layer(t).iter().enumerate() {
                for &j in set {
                    upper[0][j] += lower[t][i] / set.len() as f64;
                }
            }
        }
        ws
    }

    fn draw(&mut self, rates: &AgentRates, rng: &mut ChaCha8Rng) {
        for (omega, lambda) in self.omega.iter_mut().zip(&rates.lambda) {
            for (w, &l) in omega.iter_mut().zip(lambda) {
                *w = rng.gen::<f64>() < l;
            }
        }
    }

    fn propagate(&mut self, net: &Network, rates: &AgentRates) {
        let top = net.tier_count() - 1;
        let delta = net.n() as f64 * rates.demand;

        self.realized[top].copy_from_slice(&self.demand[top]);
        for t in (0..=top).rev() {
            if t < top {
                for (i, set) in net.layer(t).iter().enumerate() {
                    // agents without demand order nothing, even when linked
                    self.realized[t][i] = if set.is_empty() || self.demand[t][i] == 0.0 {
                        0.0
                    } else {
                        let share: f64 = set.iter().map(|&j| self.supply[t + 1][j] / self.demand[t + 1][j]).sum();
                        self.demand[t][i] * share / set.len() as f64
                    };
                }
            }
            for i in 0..self.realized[t].len() {
                self.supply[t][i] = if self.omega[t][i] { self.realized[t][i] } else { 0.0 };
            }
            self.prices[t] = delta - self.supply[t].iter().sum::<f64>();
        }
        self.prices[top + 1] = delta - self.realized[top].iter().sum::<f64>();

        for t in 0..=top {
            for i in 0..self.payoff[t].len() {
                self.payoff[t][i] = if self.demand[t][i] == 0.0 {
                    0.0
                } else {
                    let trade = self.supply[t][i] * self.prices[t] - self.realized[t][i] * self.prices[t + 1];
                    if t == top {
                        trade
                    } else {
                        let set = &net.layer(t)[i];
                        if set.is_empty() {
                            0.0
                        } else {
                            let d = set.len() as f64;
                            let penalty: f64 = set
                                .iter()
                                .map(|&j| 0.5 * rates.gamma[t + 1][j] * self.supply[t + 1][j].powi(2))
                                .sum();
                            trade - rates.c * d - penalty / d
                        }
                    }
                };
            }
        }
    }

    fn snapshot(&self) -> Realization {
        Realization {
            omega: self.omega.clone(),
            demand: self.demand.clone(),
            realized: self.realized.clone(),
            supply: self.supply.clone(),
            tier_supply: self.supply.iter().map(|s| s.iter().sum()).collect(),
            prices: self.prices.clone(),
            payoff: self.payoff.clone(),
        }
    }
}

/// RNG for sample `index` under `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws ω from `rng` and propagates one realization.
pub fn realize<P: Rates + ?Sized>(net: &Network, p: &P, rng: &mut ChaCha8Rng) -> Result<Realization> {
    let rates = p.agent_rates(net)?;
    let mut ws = Workspace::new(net, &rates);
    ws.draw(&rates, rng);
    ws.propagate(net, &rates);
    Ok(ws.snapshot())
}

/// Propagates one realization with the given success indicators.
pub fn realize_with<P: Rates + ?Sized>(net: &Network, p: &P, omega: &[Vec<bool>]) -> Result<Realization> {
    let rates = p.agent_rates(net)?;
    if omega.iter().map(Vec::len).ne(net.tiers().iter().copied()) {
        return Err(ScnError::DimensionMismatch {
            required: format!("omega for tiers {:?}", net.tiers()),
            actual: format!("{:?}", omega.iter().map(Vec::len).collect::<Vec<_>>()),
        });
    }
    let mut ws = Workspace::new(net, &rates);
    ws.omega = omega.to_vec();
    ws.propagate(net, &rates);
    Ok(ws.snapshot())
}

/// Sample mean and standard error of every agent's realized payoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffEstimate {
    pub mean: Vec<Vec<f64>>,
    pub std_error: Vec<Vec<f64>>,
    pub samples: u64,
    pub seed: u64,
}

impl PayoffEstimate {
    pub fn retailer(&self, i: usize) -> (f64, f64) {
        (self.mean[0][i], self.std_error[0][i])
    }

    /// Agent `j` of the top tier.
    pub fn supplier(&self, j: usize) -> (f64, f64) {
        let top = self.mean.len() - 1;
        (self.mean[top][j], self.std_error[top][j])
    }
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 += other.m2 + delta * delta * (self.count as f64 * other.count as f64) / total as f64;
        self.count = total;
    }

    fn std_error(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let var = self.m2 / (self.count - 1) as f64;
        (var.max(0.0) / self.count as f64).sqrt()
    }
}

fn run_chunk(net: &Network, rates: &AgentRates, seed: u64, range: std::ops::Range<u64>) -> Vec<Vec<Moments>> {
    let mut ws = Workspace::new(net, rates);
    let mut acc: Vec<Vec<Moments>> = net.tiers().iter().map(|&k| vec![Moments::default(); k]).collect();
    let base = ChaCha8Rng::seed_from_u64(seed);
    for k in range {
        let mut rng = base.clone();
        rng.set_stream(k);
        ws.draw(rates, &mut rng);
        ws.propagate(net, rates);
        for (tier_acc, tier_payoff) in acc.iter_mut().zip(&ws.payoff) {
            for (a, &x) in tier_acc.iter_mut().zip(tier_payoff) {
                a.push(x);
            }
        }
    }
    acc
}

/// Estimates every agent's expected payoff from `samples` independent
/// realizations. `jobs` caps the worker threads (`None` uses the global
/// pool); the result is identical for any job count.
pub fn estimate_payoffs<P: Rates + ?Sized + Sync>(
    net: &Network,
    p: &P,
    samples: u64,
    seed: u64,
    jobs: Option<usize>,
) -> Result<PayoffEstimate> {
    if samples == 0 {
        return Err(invalid("samples", "must be at least 1"));
    }
    let rates = p.agent_rates(net)?;
    let chunks: Vec<std::ops::Range<u64>> = (0..samples.div_ceil(CHUNK))
        .map(|k| k * CHUNK..((k + 1) * CHUNK).min(samples))
        .collect();
    let work = || -> Vec<Vec<Vec<Moments>>> {
        chunks
            .par_iter()
            .map(|r| run_chunk(net, &rates, seed, r.clone()))
            .collect()
    };
    let parts = match jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| ScnError::Malformed(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let mut total: Vec<Vec<Moments>> = net.tiers().iter().map(|&k| vec![Moments::default(); k]).collect();
    for part in &parts {
        for (t_acc, t_part) in total.iter_mut().zip(part) {
            for (a, b) in t_acc.iter_mut().zip(t_part) {
                a.merge(b);
            }
        }
    }
    Ok(PayoffEstimate {
        mean: total.iter().map(|t| t.iter().map(|m| m.mean).collect()).collect(),
        std_error: total
            .iter()
            .map(|t| t.iter().map(Moments::std_error).collect())
            .collect(),
        samples,
        seed,
    })
}

/// Exact expected payoffs by enumerating every failure pattern. Feasible
/// for at most 24 agents in total.
pub fn exact_expectation<P: Rates + ?Sized>(net: &Network, p: &P) -> Result<Vec<Vec<f64>>> {
    let rates = p.agent_rates(net)?;
    let agents: usize = net.tiers().iter().sum();
    if agents > 24 {
        return Err(ScnError::TooLarge {
            what: format!("{agents} agents give 2^{agents} failure patterns"),
        });
    }
    let flat: Vec<(usize, usize)> = net
        .tiers()
        .iter()
        .enumerate()
        .flat_map(|(t, &k)| (0..k).map(move |i| (t, i)))
        .collect();
    let mut ws = Workspace::new(net, &rates);
    let mut expected: Vec<Vec<f64>> = net.tiers().iter().map(|&k| vec![0.0; k]).collect();
    for mask in 0u64..(1 << agents) {
        let mut prob = 1.0;
        for (bit, &(t, i)) in flat.iter().enumerate() {
            let up = mask >> bit & 1 == 1;
            ws.omega[t][i] = up;
            let l = rates.lambda[t][i];
            prob *= if up { l } else { 1.0 - l };
        }
        if prob == 0.0 {
            continue;
        }
        ws.propagate(net, &rates);
        for (e, x) in expected.iter_mut().zip(&ws.payoff) {
            for (ei, &xi) in e.iter_mut().zip(x) {
                *ei += prob * xi;
            }
        }
    }
    Ok(expected)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(lambda: f64, gamma: f64, c: f64) -> ModelParams {
        ModelParams::new(2, 2, 1.0, lambda, c, gamma).unwrap()
    }

    #[test]
    fn cone_single_success() {
        let cone = Network::new(2, 2, vec![vec![0], vec![0]]).unwrap();
        let r = realize_with(&cone, &params(0.8, 0.0, 0.0), &[vec![true, false], vec![true, false]]).unwrap();
        assert_eq!(r.prices[0], 1.0);
        assert_eq!(r.prices[1], 0.0);
        assert_eq!(r.payoff[0][0], 1.0);
        assert_eq!(r.clearing_residual(), 0.0);
    }

    #[test]
    fn parallel_failed_retailer_pays() {
        let par = Network::new(2, 2, vec![vec![0], vec![1]]).unwrap();
        let r = realize_with(&par, &params(0.8, 0.0, 0.0), &[vec![false, true], vec![true, false]]).unwrap();
        assert_eq!(r.payoff[0][0], -1.0);
    }

    #[test]
    fn all_success_costs_only_links() {
        let full = Network::new(2, 2, vec![vec![0, 1], vec![0, 1]]).unwrap();
        let r = realize_with(&full, &params(0.8, 0.0, 0.03), &[vec![true; 2], vec![true; 2]]).unwrap();
        assert_eq!(r.prices[0], 0.0);
        assert_eq!(r.prices[1], 0.0);
        assert_eq!(r.payoff[0], vec![-0.06, -0.06]);
    }

    #[test]
    fn zero_samples_rejected() {
        let cone = Network::new(2, 2, vec![vec![0], vec![0]]).unwrap();
        assert!(estimate_payoffs(&cone, &params(0.8, 0.0, 0.0), 0, 1, None).is_err());
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..100).map(|k| ((k * 37) % 11) as f64 * 0.3).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..33].iter().for_each(|&x| a.push(x));
        xs[33..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean - whole.mean).abs() < 1e-12);
        assert!((a.m2 - whole.m2).abs() < 1e-9);
    }

    #[test]
    fn rates_dimension_checked() {
        let cone = Network::new(2, 2, vec![vec![0], vec![0]]).unwrap();
        let p = ModelParams::new(2, 3, 1.0, 0.8, 0.0, 0.0).unwrap();
        assert!(matches!(p.agent_rates(&cone), Err(ScnError::DimensionMismatch { .. })));
    }
}
