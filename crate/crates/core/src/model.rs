//! Domain types: game parameters, validated supply networks and the
//! canonical 2×2 network taxonomy.
//!
//! Indices are 0-based everywhere in the Rust API. The 1-based convention of
//! the network file format is handled by [`build_network`] and the `io` module.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, ScnError};

/// Scalar parameters of the homogeneous game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Number of retailers (tier 1).
    pub n: usize,
    /// Number of suppliers (tier 2, or the top tier when `tiers` is set).
    pub m: usize,
    /// Tier sizes `[n, n_2, ..., m]` for chains with more than two tiers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tiers: Option<Vec<usize>>,
    /// Consumer demand per retailer.
    #[serde(rename = "d")]
    pub demand: f64,
    /// Production success probability.
    pub lambda: f64,
    /// Cost per link.
    pub c: f64,
    /// Congestion cost coefficient.
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(n: usize, m: usize, demand: f64, lambda: f64, c: f64, gamma: f64) -> Result<Self> {
        let p = Self {
            n,
            m,
            tiers: None,
            demand,
            lambda,
            c,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    /// Checks every invariant. `lambda == 1` is admitted for the
    /// failure-free degenerate game.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "need at least one retailer"));
        }
        if self.m == 0 {
            return Err(invalid("m", "need at least one supplier"));
        }
        check_positive("d", self.demand)?;
        check_probability("lambda", self.lambda, true)?;
        check_nonnegative("c", self.c)?;
        check_nonnegative("gamma", self.gamma)?;
        if let Some(tiers) = &self.tiers {
            if tiers.len() < 2 {
                return Err(invalid("tiers", "a chain has at least two tiers"));
            }
            if tiers.contains(&0) {
                return Err(invalid("tiers", "every tier needs at least one agent"));
            }
            if tiers[0] != self.n || *tiers.last().unwrap() != self.m {
                return Err(invalid(
                    "tiers",
                    format!("first and last tier sizes must equal n={} and m={}", self.n, self.m),
                ));
            }
        }
        Ok(())
    }

    /// Tier sizes of the chain, `[n, m]` for the two-tier game.
    pub fn tier_sizes(&self) -> Vec<usize> {
        self.tiers.clone().unwrap_or_else(|| vec![self.n, self.m])
    }

    /// Total consumer demand Δ = nD.
    pub fn total_demand(&self) -> f64 {
        self.n as f64 * self.demand
    }
}

/// Parameters of the two-tier game with heterogeneous suppliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeteroParams {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "d")]
    pub demand: f64,
    pub c: f64,
    /// Success probability shared by all retailers.
    pub lambda_r: f64,
    /// Success probability of each supplier.
    pub lambda_sup: Vec<f64>,
    /// Congestion coefficient of each supplier.
    pub gamma_sup: Vec<f64>,
}

impl HeteroParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "need at least one retailer"));
        }
        if self.m == 0 {
            return Err(invalid("m", "need at least one supplier"));
        }
        check_positive("d", self.demand)?;
        check_nonnegative("c", self.c)?;
        check_probability("lambda_r", self.lambda_r, false)?;
        if self.lambda_sup.len() != self.m {
            return Err(invalid(
                "lambda_sup",
                format!("expected {} entries, got {}", self.m, self.lambda_sup.len()),
            ));
        }
        if self.gamma_sup.len() != self.m {
            return Err(invalid(
                "gamma_sup",
                format!("expected {} entries, got {}", self.m, self.gamma_sup.len()),
            ));
        }
        for &l in &self.lambda_sup {
            check_probability("lambda_sup", l, false)?;
        }
        for &g in &self.gamma_sup {
            check_nonnegative("gamma_sup", g)?;
        }
        Ok(())
    }

    /// Every supplier and retailer shares the homogeneous parameters.
    pub fn from_homogeneous(p: &ModelParams) -> Self {
        Self {
            n: p.n,
            m: p.m,
            demand: p.demand,
            c: p.c,
            lambda_r: p.lambda,
            lambda_sup: vec![p.lambda; p.m],
            gamma_sup: vec![p.gamma; p.m],
        }
    }

    pub fn total_demand(&self) -> f64 {
        self.n as f64 * self.demand
    }
}

fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(invalid(name, format!("must be finite and > 0, got {x}")));
    }
    Ok(())
}

fn check_nonnegative(name: &'static str, x: f64) -> Result<()> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(invalid(name, format!("must be finite and >= 0, got {x}")));
    }
    Ok(())
}

fn check_probability(name: &'static str, x: f64, allow_one: bool) -> Result<()> {
    let ok = x > 0.0 && (x < 1.0 || (allow_one && x == 1.0));
    if !ok {
        let range = if allow_one { "(0, 1]" } else { "(0, 1)" };
        return Err(invalid(name, format!("must lie in {range}, got {x}")));
    }
    Ok(())
}

/// A validated layered network. Tier `t` agents (0-based, `t < T-1`) hold
/// sorted out-neighborhoods into tier `t + 1`; the last tier links to raw
/// materials and the first tier to consumers implicitly.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Network {
    tiers: Vec<usize>,
    links: Vec<Vec<Vec<usize>>>,
    in_links: Vec<Vec<Vec<usize>>>,
}

impl Network {
    /// Two-tier network from 0-based supplier sets, one per retailer.
    pub fn new(n: usize, m: usize, links: Vec<Vec<usize>>) -> Result<Self> {
        Self::multi_tier(vec![n, m], vec![links])
    }

    pub fn empty(n: usize, m: usize) -> Self {
        Self::new(n, m, vec![Vec::new(); n]).expect("empty network is valid")
    }

    /// Layered network; `links[t][i]` is the 0-based out-neighborhood of
    /// agent `i` of tier `t` into tier `t + 1`.
    pub fn multi_tier(tiers: Vec<usize>, links: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        if tiers.len() < 2 {
            return Err(invalid("tiers", "a chain has at least two tiers"));
        }
        if tiers.contains(&0) {
            return Err(invalid("tiers", "every tier needs at least one agent"));
        }
        if links.len() != tiers.len() - 1 {
            return Err(ScnError::Malformed(format!(
                "{} tiers need {} link layers, got {}",
                tiers.len(),
                tiers.len() - 1,
                links.len()
            )));
        }
        let mut sorted = Vec::with_capacity(links.len());
        let mut in_links = Vec::with_capacity(links.len());
        for (t, layer) in links.into_iter().enumerate() {
            if layer.len() != tiers[t] {
                return Err(ScnError::WrongAgentCount {
                    tier: t + 1,
                    expected: tiers[t],
                    actual: layer.len(),
                });
            }
            let bound = tiers[t + 1];
            let mut incoming = vec![Vec::new(); bound];
            let mut out_layer = Vec::with_capacity(layer.len());
            for (i, mut set) in layer.into_iter().enumerate() {
                set.sort_unstable();
                for w in set.windows(2) {
                    if w[0] == w[1] {
                        return Err(ScnError::DuplicateLink {
                            tier: t + 1,
                            agent: i + 1,
                            index: w[0] + 1,
                        });
                    }
                }
                for &j in &set {
                    if j >= bound {
                        return Err(ScnError::IndexOutOfRange {
                            tier: t + 1,
                            agent: i + 1,
                            index: j + 1,
                            bound,
                        });
                    }
                    incoming[j].push(i);
                }
                out_layer.push(set);
            }
            sorted.push(out_layer);
            in_links.push(incoming);
        }
        Ok(Self {
            tiers,
            links: sorted,
            in_links,
        })
    }

    pub fn tiers(&self) -> &[usize] {
        &self.tiers
    }

    /// Number of tiers T (consumers and raw materials excluded).
    pub fn tier_count(&self) -> usize {
        self.tiers.len()
    }

    pub fn is_two_tier(&self) -> bool {
        self.tiers.len() == 2
    }

    /// Number of retailers.
    pub fn n(&self) -> usize {
        self.tiers[0]
    }

    /// Number of suppliers in tier 2.
    pub fn m(&self) -> usize {
        self.tiers[1]
    }

    /// Out-neighborhood of agent `i` in layer `t` (0-based tier).
    pub fn tier_neighborhood(&self, t: usize, i: usize) -> &[usize] {
        &self.links[t][i]
    }

    /// Agents of tier `t` that link to agent `j` of tier `t + 1`.
    pub fn tier_in_neighbors(&self, t: usize, j: usize) -> &[usize] {
        &self.in_links[t][j]
    }

    pub fn layer(&self, t: usize) -> &[Vec<usize>] {
        &self.links[t]
    }

    /// Supplier set of retailer `i`.
    pub fn neighborhood(&self, i: usize) -> &[usize] {
        &self.links[0][i]
    }

    pub fn neighborhoods(&self) -> &[Vec<usize>] {
        &self.links[0]
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.links[0][i].len()
    }

    /// Retailers linked to supplier `j`.
    pub fn in_neighbors(&self, j: usize) -> &[usize] {
        &self.in_links[0][j]
    }

    pub fn in_degree(&self, j: usize) -> usize {
        self.in_links[0][j].len()
    }

    /// |N⁺ᵢ ∩ N⁺ᵢ'| for two retailers.
    pub fn overlap(&self, i: usize, other: usize) -> usize {
        sorted_intersection_len(&self.links[0][i], &self.links[0][other])
    }

    /// Every supplier has raw-material access, so a retailer is active iff it
    /// has at least one link.
    pub fn is_active(&self, i: usize) -> bool {
        !self.links[0][i].is_empty()
    }

    pub fn active_retailers(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&i| self.is_active(i))
    }

    pub fn active_count(&self) -> usize {
        self.active_retailers().count()
    }

    pub fn link_count(&self) -> usize {
        self.links[0].iter().map(Vec::len).sum()
    }

    /// Copy of this network with retailer `i` switched to `set`.
    pub fn with_neighborhood(&self, i: usize, set: Vec<usize>) -> Result<Self> {
        let mut layers = self.links.clone();
        layers[0][i] = set;
        Self::multi_tier(self.tiers.clone(), layers)
    }

    /// Retailer neighborhoods with 1-based supplier indices.
    pub fn to_one_based(&self) -> Vec<Vec<Vec<usize>>> {
        self.links
            .iter()
            .map(|layer| layer.iter().map(|set| set.iter().map(|j| j + 1).collect()).collect())
            .collect()
    }
}

pub(crate) fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut x, mut y, mut count) = (0, 0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                x += 1;
                y += 1;
            }
        }
    }
    count
}

/// Builds a two-tier (or, when `params.tiers` is set, layered) network from
/// 1-based supplier indices, as used in network files.
pub fn build_network(params: &ModelParams, links: &[Vec<usize>]) -> Result<Network> {
    if params.tiers.as_ref().is_some_and(|t| t.len() > 2) {
        return Err(ScnError::DimensionMismatch {
            required: "two-tier link list".into(),
            actual: format!("{}-tier parameters", params.tier_sizes().len()),
        });
    }
    if links.len() != params.n {
        return Err(ScnError::WrongAgentCount {
            tier: 1,
            expected: params.n,
            actual: links.len(),
        });
    }
    let zero_based = links
        .iter()
        .enumerate()
        .map(|(i, set)| to_zero_based(0, i, set, params.m))
        .collect::<Result<Vec<_>>>()?;
    Network::new(params.n, params.m, zero_based)
}

pub(crate) fn to_zero_based(tier: usize, agent: usize, set: &[usize], bound: usize) -> Result<Vec<usize>> {
    set.iter()
        .map(|&j| {
            if j == 0 || j > bound {
                Err(ScnError::IndexOutOfRange {
                    tier: tier + 1,
                    agent: agent + 1,
                    index: j,
                    bound,
                })
            } else {
                Ok(j - 1)
            }
        })
        .collect()
}

/// Candidate labels of the 2×2 game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassLabel {
    Empty,
    Cone,
    Parallel,
    Zee,
    Full,
    Other,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 6] = [
        ClassLabel::Empty,
        ClassLabel::Cone,
        ClassLabel::Parallel,
        ClassLabel::Zee,
        ClassLabel::Full,
        ClassLabel::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Empty => "empty",
            ClassLabel::Cone => "cone",
            ClassLabel::Parallel => "parallel",
            ClassLabel::Zee => "zee",
            ClassLabel::Full => "full",
            ClassLabel::Other => "other",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ClassLabel {
    type Err = ScnError;

    fn from_str(s: &str) -> Result<Self> {
        ClassLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| ScnError::Malformed(format!("unknown network class `{s}`")))
    }
}

/// `+`-joined labels in canonical order, e.g. `empty+cone+full`.
pub fn format_class_set(set: &BTreeSet<ClassLabel>) -> String {
    set.iter().map(|l| l.as_str()).collect::<Vec<_>>().join("+")
}

pub fn parse_class_set(s: &str) -> Result<BTreeSet<ClassLabel>> {
    if s.is_empty() {
        return Ok(BTreeSet::new());
    }
    s.split('+').map(str::parse).collect()
}

/// Result of classifying a network against the candidate taxonomy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkClass {
    pub label: ClassLabel,
    /// `witness[j]` is the canonical (0-based) index of supplier `j`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<usize>>,
    /// For zee networks, the retailer holding the single link.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub single_link_retailer: Option<usize>,
}

impl NetworkClass {
    fn new(label: ClassLabel, witness: Option<Vec<usize>>) -> Self {
        Self {
            label,
            witness,
            single_link_retailer: None,
        }
    }
}

/// Supplier relabeling sending `front` to position 0 in a two-supplier game.
fn swap_witness(front: usize) -> Vec<usize> {
    if front == 0 {
        vec![0, 1]
    } else {
        vec![1, 0]
    }
}

/// Classifies a 2×2 network as empty, cone, parallel, zee, full or other.
pub fn classify_2x2(net: &Network) -> Result<NetworkClass> {
    if !net.is_two_tier() || net.n() != 2 || net.m() != 2 {
        return Err(ScnError::DimensionMismatch {
            required: "2x2".into(),
            actual: format!("{:?}", net.tiers()),
        });
    }
    let a = net.neighborhood(0);
    let b = net.neighborhood(1);
    let class = match (a.len(), b.len()) {
        (0, 0) => NetworkClass::new(ClassLabel::Empty, None),
        (1, 1) if a == b => NetworkClass::new(ClassLabel::Cone, Some(swap_witness(a[0]))),
        (1, 1) => NetworkClass::new(ClassLabel::Parallel, Some(swap_witness(a[0]))),
        (1, 2) | (2, 1) => {
            let single = if a.len() == 1 { 0 } else { 1 };
            let s = net.neighborhood(single)[0];
            NetworkClass {
                label: ClassLabel::Zee,
                witness: Some(swap_witness(s)),
                single_link_retailer: Some(single),
            }
        }
        (2, 2) => NetworkClass::new(ClassLabel::Full, Some(vec![0, 1])),
        _ => NetworkClass::new(ClassLabel::Other, None),
    };
    Ok(class)
}

/// Taxonomy label for any two-tier network. The 2×2 case defers to
/// [`classify_2x2`]; otherwise cone, parallel and full keep their
/// meaning and everything else is `Other`.
pub fn classify(net: &Network) -> NetworkClass {
    if net.is_two_tier() && net.n() == 2 && net.m() == 2 {
        return classify_2x2(net).expect("dimensions checked");
    }
    let sets = net.neighborhoods();
    if net.link_count() == 0 {
        return NetworkClass::new(ClassLabel::Empty, None);
    }
    if !net.is_two_tier() {
        return NetworkClass::new(ClassLabel::Other, None);
    }
    let m = net.m();
    let relabel_front = |front: &[usize]| {
        // listed suppliers first, in the given order, then the rest
        let mut witness = vec![usize::MAX; m];
        let mut next = 0;
        for j in front.iter().copied().chain(0..m) {
            if witness[j] == usize::MAX {
                witness[j] = next;
                next += 1;
            }
        }
        witness
    };
    if sets.iter().all(|s| s.len() == 1) {
        let firsts: Vec<usize> = sets.iter().map(|s| s[0]).collect();
        if firsts.iter().all(|&s| s == firsts[0]) {
            return NetworkClass::new(ClassLabel::Cone, Some(relabel_front(&firsts[..1])));
        }
        let distinct: BTreeSet<usize> = firsts.iter().copied().collect();
        if distinct.len() == firsts.len() {
            return NetworkClass::new(ClassLabel::Parallel, Some(relabel_front(&firsts)));
        }
    }
    if sets.iter().all(|s| s.len() == m) {
        return NetworkClass::new(ClassLabel::Full, Some((0..m).collect()));
    }
    NetworkClass::new(ClassLabel::Other, None)
}
