//! Best responses, pure-strategy Nash checks, exhaustive equilibrium
//! enumeration and best-response dynamics for the two-tier game.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{payoff_congestion, payoff_hetero_retailer};
use crate::error::{Result, ScnError};
use crate::model::{classify, HeteroParams, ModelParams, Network, NetworkClass};

/// A deviation counts only when it gains more than this.
pub const GAIN_TOL: f64 = 1e-12;
/// Largest supplier count for exhaustive best responses.
pub const MAX_SUPPLIERS: usize = 20;
/// Largest n·m for exhaustive profile enumeration.
pub const MAX_PROFILE_BITS: usize = 16;

/// Expected retailer payoff driving the game.
pub trait RetailerPayoff: Sync {
    /// `(n, m)` of the game.
    fn dims(&self) -> (usize, usize);
    fn retailer_payoff(&self, net: &Network, i: usize) -> f64;
}

impl RetailerPayoff for ModelParams {
    fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    fn retailer_payoff(&self, net: &Network, i: usize) -> f64 {
        payoff_congestion(net, self, i)
    }
}

impl RetailerPayoff for HeteroParams {
    fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    fn retailer_payoff(&self, net: &Network, i: usize) -> f64 {
        payoff_hetero_retailer(net, self, i)
    }
}

fn check_game<P: RetailerPayoff + ?Sized>(net: &Network, p: &P) -> Result<()> {
    let (n, m) = p.dims();
    if !net.is_two_tier() || net.n() != n || net.m() != m {
        return Err(ScnError::DimensionMismatch {
            required: format!("{n}x{m} two-tier network"),
            actual: format!("tiers {:?}", net.tiers()),
        });
    }
    if m > MAX_SUPPLIERS {
        return Err(ScnError::TooLarge {
            what: format!("2^{m} supplier subsets; use best-response dynamics instead"),
        });
    }
    Ok(())
}

fn subset(mask: u64, m: usize) -> Vec<usize> {
    (0..m).filter(|&j| mask >> j & 1 == 1).collect()
}

/// Payoff of retailer `i` after switching to each of the 2^m subsets.
fn deviation_payoffs<P: RetailerPayoff + ?Sized>(net: &Network, p: &P, i: usize) -> Vec<(Vec<usize>, f64)> {
    let m = net.m();
    (0..1u64 << m)
        .map(|mask| {
            let set = subset(mask, m);
            let dev = net
                .with_neighborhood(i, set.clone())
                .expect("subsets of valid suppliers are valid");
            let value = p.retailer_payoff(&dev, i);
            (set, value)
        })
        .collect()
}

/// Best value for retailer `i` and all subsets attaining it within
/// [`GAIN_TOL`], in lexicographic order.
fn best_of(options: Vec<(Vec<usize>, f64)>) -> (f64, Vec<Vec<usize>>) {
    let best = options.iter().map(|o| o.1).fold(f64::NEG_INFINITY, f64::max);
    let mut sets: Vec<Vec<usize>> = options
        .into_iter()
        .filter(|o| o.1 >= best - GAIN_TOL)
        .map(|o| o.0)
        .collect();
    sets.sort();
    (best, sets)
}

/// All payoff-maximising supplier sets of retailer `i` with the other
/// retailers held fixed, in lexicographic order.
pub fn best_responses<P: RetailerPayoff + ?Sized>(i: usize, net: &Network, p: &P) -> Result<Vec<Vec<usize>>> {
    check_game(net, p)?;
    if i >= net.n() {
        return Err(crate::error::invalid("retailer", format!("index {i} out of range")));
    }
    Ok(best_of(deviation_payoffs(net, p, i)).1)
}

/// A strictly improving unilateral deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationCertificate {
    pub retailer: usize,
    pub original: Vec<usize>,
    pub improving: Vec<usize>,
    pub gain: f64,
}

/// Outcome of a Nash check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashVerdict {
    pub is_nash: bool,
    /// The largest-gain deviation when the network is not an equilibrium.
    pub certificate: Option<DeviationCertificate>,
}

fn find_deviation<P: RetailerPayoff + ?Sized>(net: &Network, p: &P, first_only: bool) -> Option<DeviationCertificate> {
    let mut best: Option<DeviationCertificate> = None;
    for i in 0..net.n() {
        let current = p.retailer_payoff(net, i);
        let options = deviation_payoffs(net, p, i);
        let (value, sets) = best_of(options);
        let gain = value - current;
        if gain > GAIN_TOL && best.as_ref().is_none_or(|b| gain > b.gain) {
            best = Some(DeviationCertificate {
                retailer: i,
                original: net.neighborhood(i).to_vec(),
                improving: sets[0].clone(),
                gain,
            });
            if first_only {
                break;
            }
        }
    }
    best
}

/// Whether no retailer can gain more than [`GAIN_TOL`] by switching
/// suppliers; otherwise the maximal-gain deviation.
pub fn nash_check<P: RetailerPayoff + ?Sized>(net: &Network, p: &P) -> Result<NashVerdict> {
    check_game(net, p)?;
    let certificate = find_deviation(net, p, false);
    Ok(NashVerdict {
        is_nash: certificate.is_none(),
        certificate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EnumerateOptions {
    /// Report one network per class of supplier relabelings.
    pub canonical: bool,
    /// Record a deviation certificate for every rejected profile.
    pub keep_certificates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    /// 0-based supplier set of each retailer.
    pub links: Vec<Vec<usize>>,
    pub class: NetworkClass,
    pub payoffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub links: Vec<Vec<usize>>,
    pub certificate: DeviationCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub n: usize,
    pub m: usize,
    pub profiles_examined: u64,
    pub equilibria: Vec<Equilibrium>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rejections: Vec<Rejection>,
}

impl EquilibriumReport {
    /// Sorted, de-duplicated class labels of the equilibria.
    pub fn class_set(&self) -> std::collections::BTreeSet<crate::model::ClassLabel> {
        self.equilibria.iter().map(|e| e.class.label).collect()
    }
}

/// Decodes profile `k`: retailer `i` holds bits `i·m .. (i+1)·m`.
pub fn profile_network(n: usize, m: usize, k: u64) -> Network {
    let full = (1u64 << m) - 1;
    let links = (0..n).map(|i| subset(k >> (i * m) & full, m)).collect();
    Network::new(n, m, links).expect("decoded profiles are valid")
}

/// Representative of a profile under supplier relabeling: supplier columns
/// (as retailer bitmasks) sorted in descending order.
pub fn canonical_links(net: &Network) -> Vec<Vec<usize>> {
    let (n, m) = (net.n(), net.m());
    let mut columns: Vec<u64> = (0..m)
        .map(|j| net.in_neighbors(j).iter().fold(0u64, |acc, &i| acc | 1 << i))
        .collect();
    columns.sort_unstable_by(|a, b| b.cmp(a));
    (0..n)
        .map(|i| (0..m).filter(|&j| columns[j] >> i & 1 == 1).collect())
        .collect()
}

/// Every pure Nash profile of the n×m game, in profile order.
pub fn enumerate_equilibria<P: RetailerPayoff + ?Sized>(p: &P, opts: EnumerateOptions) -> Result<EquilibriumReport> {
    let (n, m) = p.dims();
    if n * m > MAX_PROFILE_BITS {
        return Err(ScnError::TooLarge {
            what: format!(
                "2^{} profiles for n={n}, m={m} (limit n·m <= {MAX_PROFILE_BITS})",
                n * m
            ),
        });
    }
    let total = 1u64 << (n * m);
    let outcomes: Vec<std::result::Result<Equilibrium, Option<Rejection>>> = (0..total)
        .into_par_iter()
        .map(|k| {
            let net = profile_network(n, m, k);
            match find_deviation(&net, p, !opts.keep_certificates) {
                None => Ok(Equilibrium {
                    links: net.neighborhoods().to_vec(),
                    class: classify(&net),
                    payoffs: (0..n).map(|i| p.retailer_payoff(&net, i)).collect(),
                }),
                Some(certificate) => Err(opts.keep_certificates.then(|| Rejection {
                    links: net.neighborhoods().to_vec(),
                    certificate,
                })),
            }
        })
        .collect();

    let mut equilibria = Vec::new();
    let mut rejections = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for outcome in outcomes {
        match outcome {
            Ok(eq) => {
                if opts.canonical {
                    let net = Network::new(n, m, eq.links.clone()).expect("valid");
                    if !seen.insert(canonical_links(&net)) {
                        continue;
                    }
                }
                equilibria.push(eq);
            }
            Err(Some(r)) => rejections.push(r),
            Err(None) => {}
        }
    }
    Ok(EquilibriumReport {
        n,
        m,
        profiles_examined: total,
        equilibria,
        rejections,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Start network followed by the network after every strict update.
    pub networks: Vec<Network>,
    pub rounds: usize,
    pub converged: bool,
}

impl Trajectory {
    pub fn last(&self) -> &Network {
        self.networks.last().expect("trajectory holds the start")
    }
}

/// Round-robin best-response dynamics. In each round every retailer in turn
/// switches to its lexicographically first best response if that gains more
/// than [`GAIN_TOL`]; stops after a round without moves or `max_rounds`.
pub fn br_dynamics<P: RetailerPayoff + ?Sized>(start: &Network, p: &P, max_rounds: usize) -> Result<Trajectory> {
    check_game(start, p)?;
    let mut networks = vec![start.clone()];
    let mut current = start.clone();
    for round in 1..=max_rounds {
        let mut moved = false;
        for i in 0..current.n() {
            let now = p.retailer_payoff(&current, i);
            let (value, sets) = best_of(deviation_payoffs(&current, p, i));
            if value - now > GAIN_TOL {
                current = current.with_neighborhood(i, sets[0].clone())?;
                networks.push(current.clone());
                moved = true;
            }
        }
        if !moved {
            return Ok(Trajectory {
                networks,
                rounds: round,
                converged: true,
            });
        }
    }
    Ok(Trajectory {
        networks,
        rounds: max_rounds,
        converged: false,
    })
}
