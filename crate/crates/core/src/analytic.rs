//! Closed-form quantities of the two-tier game: overlap and congestion
//! statistics, expected payoffs, candidate-network bounds, preference
//! thresholds and regime quantities.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, ScnError};
use crate::model::{HeteroParams, ModelParams, Network};
use crate::roots::{bisect, bracket_and_bisect};

/// Aggregate relative overlap of retailer `i` with its active peers:
/// Σ over active i' ≠ i of |N⁺ᵢ ∩ N⁺ᵢ'| / d⁺ᵢ'.
pub fn rho(net: &Network, i: usize) -> f64 {
    net.active_retailers()
        .filter(|&k| k != i)
        .map(|k| net.overlap(i, k) as f64 / net.out_degree(k) as f64)
        .sum()
}

/// Scaled congestion at supplier `j`: Σ over linked retailers of 1/d⁺,
/// optionally leaving out one retailer.
pub fn congestion(net: &Network, j: usize, exclude: Option<usize>) -> f64 {
    net.in_neighbors(j)
        .iter()
        .filter(|&&k| Some(k) != exclude)
        .map(|&k| 1.0 / net.out_degree(k) as f64)
        .sum()
}

/// Expected retailer payoff without congestion. Zero for inactive retailers.
pub fn payoff_no_congestion(net: &Network, p: &ModelParams, i: usize) -> f64 {
    if !net.is_active(i) {
        return 0.0;
    }
    let lambda = p.lambda;
    let d = p.demand;
    let degree = net.out_degree(i) as f64;
    let active = net.active_count() as f64;
    let market = lambda * (1.0 - lambda) * d * (lambda * d * ((1.0 + lambda) * active - lambda) - p.total_demand());
    let sourcing = lambda * (1.0 - lambda).powi(2) * d * d * (1.0 + (1.0 + lambda) * rho(net, i)) / degree;
    market + sourcing - p.c * degree
}

/// Expected retailer payoff with the quadratic congestion penalty.
///
/// Evaluated as the no-congestion payoff minus the expected penalty
/// (λD²γ / 2d)·[1/d + 2ρ/d + Σⱼ (F⁻ⁱⱼ)²], which is the congested closed form
/// rearranged through ρᵢ = Σⱼ F⁻ⁱⱼ. With γ = 0 it equals
/// [`payoff_no_congestion`] bit for bit.
pub fn payoff_congestion(net: &Network, p: &ModelParams, i: usize) -> f64 {
    if !net.is_active(i) {
        return 0.0;
    }
    let degree = net.out_degree(i) as f64;
    let foreign_sq: f64 = net
        .neighborhood(i)
        .iter()
        .map(|&j| congestion(net, j, Some(i)).powi(2))
        .sum();
    let bracket = 1.0 / degree + 2.0 * rho(net, i) / degree + foreign_sq;
    let penalty = p.gamma * p.lambda * p.demand * p.demand / (2.0 * degree) * bracket;
    payoff_no_congestion(net, p, i) - penalty
}

/// Congested payoff written term by term with the foreign congestion sum,
/// kept as an independent route for cross-checks.
pub fn payoff_congestion_foreign_form(net: &Network, p: &ModelParams, i: usize) -> f64 {
    if !net.is_active(i) {
        return 0.0;
    }
    let (lambda, d, gamma) = (p.lambda, p.demand, p.gamma);
    let degree = net.out_degree(i) as f64;
    let active = net.active_count() as f64;
    let market = lambda * (1.0 - lambda) * d * (lambda * d * ((1.0 + lambda) * active - lambda) - p.total_demand());
    let scale = lambda * d * d / degree;
    let own = scale * ((1.0 - lambda).powi(2) - gamma / (2.0 * degree));
    let foreign: f64 = net
        .neighborhood(i)
        .iter()
        .map(|&j| {
            let f = congestion(net, j, Some(i));
            f * ((1.0 - lambda) * (1.0 - lambda * lambda) - gamma / degree - 0.5 * gamma * f)
        })
        .sum();
    market + own - p.c * degree + scale * foreign
}

/// Expected retailer payoff with heterogeneous suppliers.
///
/// The own-retailer term of the overlap sum carries the factor (1 − λ_r),
/// since E[ωᵢ²] = λ_r; peers carry (1 − λ_r²).
pub fn payoff_hetero_retailer(net: &Network, h: &HeteroParams, i: usize) -> f64 {
    if !net.is_active(i) {
        return 0.0;
    }
    let d = h.demand;
    let lr = h.lambda_r;
    let degree_i = net.out_degree(i) as f64;
    let mean_reliability = |k: usize| -> f64 {
        let set = net.neighborhood(k);
        set.iter().map(|&j| h.lambda_sup[j]).sum::<f64>() / set.len() as f64
    };
    let lbar_i = mean_reliability(i);

    let mut overlap_sum = 0.0;
    for k in net.active_retailers() {
        let shared_variance: f64 = shared(net.neighborhood(i), net.neighborhood(k))
            .map(|j| h.lambda_sup[j] * (1.0 - h.lambda_sup[j]))
            .sum();
        let sigma = shared_variance / (degree_i * net.out_degree(k) as f64);
        let weight = if k == i { 1.0 - lr } else { 1.0 - lr * lr };
        overlap_sum += weight * (lbar_i * mean_reliability(k) + sigma);
    }

    let penalty: f64 = net
        .neighborhood(i)
        .iter()
        .map(|&j| h.gamma_sup[j] * h.lambda_sup[j] * congestion(net, j, None).powi(2))
        .sum::<f64>()
        * d
        * d
        / (2.0 * degree_i);

    d * d * overlap_sum - h.total_demand() * (1.0 - lr) * d * lbar_i - h.c * degree_i - penalty
}

fn shared<'a>(a: &'a [usize], b: &'a [usize]) -> impl Iterator<Item = usize> + 'a {
    a.iter().copied().filter(move |j| b.binary_search(j).is_ok())
}

/// Expected payoff of supplier `j` (suppliers pay no linking or congestion
/// costs). Zero for a supplier without demand.
pub fn payoff_hetero_supplier(net: &Network, h: &HeteroParams, j: usize) -> f64 {
    let d = h.demand;
    let own = d * congestion(net, j, None);
    if own == 0.0 {
        return 0.0;
    }
    let delta = h.total_demand();
    let rivals: f64 = (0..net.m())
        .filter(|&k| k != j)
        .map(|k| h.lambda_sup[k] * d * congestion(net, k, None))
        .sum();
    let raw_gap = delta - net.active_count() as f64 * d;
    own * (h.lambda_sup[j] * (delta - own - rivals) - raw_gap)
}

/// Homogeneous supplier payoff.
pub fn payoff_supplier(net: &Network, p: &ModelParams, j: usize) -> f64 {
    payoff_hetero_supplier(net, &HeteroParams::from_homogeneous(p), j)
}

/// Largest linking cost for which the parallel network keeps retailers
/// profitable without congestion: λ(1−λ)(n−1)(λ²+λ−1)D².
pub fn parallel_cost_bound(lambda: f64, n: usize, demand: f64) -> f64 {
    lambda * (1.0 - lambda) * (n as f64 - 1.0) * (lambda * lambda + lambda - 1.0) * demand * demand
}

/// Lower reliability bound for the parallel network, (√5 − 1)/2.
pub fn parallel_lambda_bound() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// A candidate network of the 2×2 game seen from one retailer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Candidate {
    Cone,
    Parallel,
    /// Zee network, single-link retailer.
    Zee1,
    /// Zee network, two-link retailer.
    Zee2,
    Full,
}

impl Candidate {
    pub const ALL: [Candidate; 5] = [
        Candidate::Cone,
        Candidate::Parallel,
        Candidate::Zee1,
        Candidate::Zee2,
        Candidate::Full,
    ];

    /// Canonical network: cone on supplier 0, retailer 0 → 0 and 1 → 1 for
    /// parallel, zee with retailer 0 holding the single link.
    pub fn network(self) -> Network {
        let links = match self {
            Candidate::Cone => vec![vec![0], vec![0]],
            Candidate::Parallel => vec![vec![0], vec![1]],
            Candidate::Zee1 | Candidate::Zee2 => vec![vec![0], vec![0, 1]],
            Candidate::Full => vec![vec![0, 1], vec![0, 1]],
        };
        Network::new(2, 2, links).expect("canonical networks are valid")
    }

    /// Retailer whose payoff this candidate describes.
    pub fn retailer(self) -> usize {
        match self {
            Candidate::Zee2 => 1,
            _ => 0,
        }
    }

    pub fn links(self) -> usize {
        match self {
            Candidate::Zee2 | Candidate::Full => 2,
            _ => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Candidate::Cone => "cone",
            Candidate::Parallel => "parallel",
            Candidate::Zee1 => "zee1",
            Candidate::Zee2 => "zee2",
            Candidate::Full => "full",
        }
    }
}

/// Expected payoff of the candidate's retailer, evaluated from the general
/// congested formula on the canonical network.
pub fn candidate_payoff(cand: Candidate, lambda: f64, gamma: f64, c: f64, demand: f64) -> f64 {
    let p = ModelParams {
        n: 2,
        m: 2,
        tiers: None,
        demand,
        lambda,
        c,
        gamma,
    };
    payoff_congestion(canonical(cand), &p, cand.retailer())
}

fn canonical(cand: Candidate) -> &'static Network {
    static NETWORKS: OnceLock<Vec<Network>> = OnceLock::new();
    let all = NETWORKS.get_or_init(|| Candidate::ALL.iter().map(|c| c.network()).collect());
    &all[Candidate::ALL.iter().position(|&c| c == cand).expect("listed")]
}

/// One value per candidate network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerCandidate<T> {
    pub cone: T,
    pub parallel: T,
    pub zee1: T,
    pub zee2: T,
    pub full: T,
}

impl<T: Copy> PerCandidate<T> {
    pub fn from_fn(mut f: impl FnMut(Candidate) -> T) -> Self {
        Self {
            cone: f(Candidate::Cone),
            parallel: f(Candidate::Parallel),
            zee1: f(Candidate::Zee1),
            zee2: f(Candidate::Zee2),
            full: f(Candidate::Full),
        }
    }

    pub fn get(&self, cand: Candidate) -> T {
        match cand {
            Candidate::Cone => self.cone,
            Candidate::Parallel => self.parallel,
            Candidate::Zee1 => self.zee1,
            Candidate::Zee2 => self.zee2,
            Candidate::Full => self.full,
        }
    }
}

/// The four preference thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaHat {
    /// full vs zee (single-link retailer)
    Fz1,
    /// zee (two-link retailer) vs cone
    Z2c,
    /// parallel vs cone
    Pc,
    /// parallel vs zee (two-link retailer)
    Pz2,
}

impl GammaHat {
    pub const ALL: [GammaHat; 4] = [GammaHat::Fz1, GammaHat::Z2c, GammaHat::Pc, GammaHat::Pz2];

    /// `(a, b)` such that the threshold is the root of payoff(a) − payoff(b).
    pub fn pair(self) -> (Candidate, Candidate) {
        match self {
            GammaHat::Fz1 => (Candidate::Full, Candidate::Zee1),
            GammaHat::Z2c => (Candidate::Zee2, Candidate::Cone),
            GammaHat::Pc => (Candidate::Parallel, Candidate::Cone),
            GammaHat::Pz2 => (Candidate::Parallel, Candidate::Zee2),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GammaHat::Fz1 => "fz1",
            GammaHat::Z2c => "z2c",
            GammaHat::Pc => "pc",
            GammaHat::Pz2 => "pz2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaHats<T> {
    pub fz1: T,
    pub z2c: T,
    pub pc: T,
    pub pz2: T,
}

impl<T: Copy> GammaHats<T> {
    pub fn from_fn(mut f: impl FnMut(GammaHat) -> T) -> Self {
        Self {
            fz1: f(GammaHat::Fz1),
            z2c: f(GammaHat::Z2c),
            pc: f(GammaHat::Pc),
            pz2: f(GammaHat::Pz2),
        }
    }

    pub fn get(&self, which: GammaHat) -> T {
        match which {
            GammaHat::Fz1 => self.fz1,
            GammaHat::Z2c => self.z2c,
            GammaHat::Pc => self.pc,
            GammaHat::Pz2 => self.pz2,
        }
    }
}

/// Root of a payoff difference `payoff(a) − payoff(b)` in γ, together with
/// the direction in which the difference grows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolvedThreshold {
    pub gamma: f64,
    /// True when the difference increases with γ.
    pub increasing: bool,
}

impl SolvedThreshold {
    /// Whether payoff(a) ≥ payoff(b) at `gamma`.
    pub fn a_at_least_b(&self, gamma: f64) -> bool {
        if self.increasing {
            gamma >= self.gamma
        } else {
            gamma <= self.gamma
        }
    }

    /// Whether payoff(a) ≤ payoff(b) at `gamma`.
    pub fn a_at_most_b(&self, gamma: f64) -> bool {
        if self.increasing {
            gamma <= self.gamma
        } else {
            gamma >= self.gamma
        }
    }
}

/// A printed closed form that disagrees with the value solved from payoffs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub quantity: String,
    pub printed: f64,
    pub solved: f64,
}

/// Values of the published closed forms, kept next to the solved ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrintedValues {
    pub gamma_max: PerCandidate<f64>,
    pub lambda_min: PerCandidate<f64>,
    pub gamma_hat: GammaHats<f64>,
}

/// Feasibility bounds and preference thresholds of the 2×2 game at one
/// `(λ, c, D)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds2x2 {
    pub lambda: f64,
    pub c: f64,
    pub demand: f64,
    /// Upper γ bound for a positive payoff coefficient (c = 0).
    pub gamma_max: PerCandidate<f64>,
    /// Largest γ at which the candidate's retailer breaks even at this `c`.
    pub gamma_max_at_c: PerCandidate<f64>,
    /// Lowest λ for which the candidate can be profitable.
    pub lambda_min: PerCandidate<f64>,
    /// Thresholds solved from the payoff equalities at this `c`.
    pub gamma_hat: GammaHats<SolvedThreshold>,
    pub printed: PrintedValues,
    pub discrepancies: Vec<Discrepancy>,
}

impl Thresholds2x2 {
    /// Largest linking cost keeping the candidate's retailer at a
    /// non-negative payoff at congestion `gamma`.
    pub fn c_max(&self, cand: Candidate, gamma: f64) -> f64 {
        candidate_payoff(cand, self.lambda, gamma, 0.0, self.demand) / cand.links() as f64
    }

    pub fn has_discrepancy(&self, quantity: &str) -> bool {
        self.discrepancies.iter().any(|d| d.quantity == quantity)
    }
}

const ROOT_TOL: f64 = 1e-15;
const DISCREPANCY_TOL: f64 = 1e-9;

fn solve_gamma_hat(which: GammaHat, lambda: f64, c: f64, demand: f64, hi: f64) -> SolvedThreshold {
    let (a, b) = which.pair();
    let diff = |g: f64| candidate_payoff(a, lambda, g, c, demand) - candidate_payoff(b, lambda, g, c, demand);
    match bracket_and_bisect(diff, 0.0, hi, ROOT_TOL, 1e6) {
        Some(root) => SolvedThreshold {
            gamma: root,
            increasing: diff(root + 1.0) > diff(root - 1.0),
        },
        // no crossing: the sign is the same for every γ
        None => SolvedThreshold {
            gamma: if diff(0.0) >= 0.0 {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            },
            increasing: true,
        },
    }
}

fn solve_gamma_max(cand: Candidate, lambda: f64, c: f64, demand: f64) -> f64 {
    let payoff = |g: f64| candidate_payoff(cand, lambda, g, c, demand);
    if payoff(0.0) < 0.0 {
        return 0.0;
    }
    bracket_and_bisect(payoff, 0.0, 1.0, ROOT_TOL, 1e6).unwrap_or(f64::INFINITY)
}

fn solve_lambda_min(cand: Candidate) -> f64 {
    let payoff = |l: f64| candidate_payoff(cand, l, 0.0, 0.0, 1.0);
    let lo = 1e-9;
    if payoff(lo) > 0.0 {
        return 0.0;
    }
    bisect(payoff, lo, 1.0 - 1e-9, ROOT_TOL).unwrap_or(1.0)
}

/// Feasibility bounds and preference thresholds of the 2×2 game.
///
/// Thresholds are roots of candidate-payoff equalities found by bisection;
/// the published closed forms are returned alongside in `printed`, and any
/// disagreement beyond 1e-9 is listed in `discrepancies`.
pub fn thresholds_2x2(lambda: f64, c: f64, demand: f64) -> Result<Thresholds2x2> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(invalid("lambda", format!("must lie in (0, 1), got {lambda}")));
    }
    if !(c.is_finite() && c >= 0.0) {
        return Err(invalid("c", format!("must be finite and >= 0, got {c}")));
    }
    if !(demand.is_finite() && demand > 0.0) {
        return Err(invalid("d", format!("must be finite and > 0, got {demand}")));
    }

    let gamma_max = PerCandidate::from_fn(|cand| solve_gamma_max(cand, lambda, 0.0, demand));
    let gamma_max_at_c = PerCandidate::from_fn(|cand| solve_gamma_max(cand, lambda, c, demand));
    let lambda_min = PerCandidate::from_fn(solve_lambda_min);
    let hi = if gamma_max.parallel > 0.0 {
        gamma_max.parallel
    } else {
        1.0
    };
    let gamma_hat = GammaHats::from_fn(|which| solve_gamma_hat(which, lambda, c, demand, hi));

    let printed = PrintedValues {
        gamma_max: PerCandidate::from_fn(|cand| printed::gamma_max(cand, lambda)),
        lambda_min: PerCandidate::from_fn(printed::lambda_min),
        gamma_hat: GammaHats::from_fn(|which| printed::gamma_hat(which, lambda)),
    };

    let mut discrepancies = Vec::new();
    let mut check = |quantity: String, printed: f64, solved: f64| {
        if (printed - solved).abs() > DISCREPANCY_TOL {
            discrepancies.push(Discrepancy {
                quantity,
                printed,
                solved,
            });
        }
    };
    // the published thresholds assume c = 0
    if c == 0.0 {
        for which in GammaHat::ALL {
            check(
                format!("gamma_hat_{}", which.as_str()),
                printed.gamma_hat.get(which),
                gamma_hat.get(which).gamma,
            );
        }
    }
    for cand in Candidate::ALL {
        check(
            format!("gamma_max_{}", cand.as_str()),
            printed.gamma_max.get(cand),
            gamma_max.get(cand),
        );
        check(
            format!("lambda_min_{}", cand.as_str()),
            printed.lambda_min.get(cand),
            lambda_min.get(cand),
        );
    }

    Ok(Thresholds2x2 {
        lambda,
        c,
        demand,
        gamma_max,
        gamma_max_at_c,
        lambda_min,
        gamma_hat,
        printed,
        discrepancies,
    })
}

/// Point where the solved fz1 and pz2 curves cross at linking cost `c`,
/// with the spread of all four thresholds there. `None` if they do not
/// cross on (λ_min(parallel), 1).
pub fn gamma_hat_intersection(c: f64, demand: f64) -> Option<(f64, f64, f64)> {
    let gap = |l: f64| -> Option<f64> {
        let t = thresholds_2x2(l, c, demand).ok()?;
        Some(t.gamma_hat.fz1.gamma - t.gamma_hat.pz2.gamma)
    };
    let lo = parallel_lambda_bound() + 1e-6;
    let hi = 1.0 - 1e-6;
    let steps = 400;
    let mut prev = (lo, gap(lo)?);
    for k in 1..=steps {
        let l = lo + (hi - lo) * k as f64 / steps as f64;
        let g = gap(l)?;
        if g.signum() != prev.1.signum() {
            let root = bisect(|x| gap(x).unwrap_or(f64::NAN), prev.0, l, 1e-13)?;
            let t = thresholds_2x2(root, c, demand).ok()?;
            let values = GammaHat::ALL.map(|w| t.gamma_hat.get(w).gamma);
            let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            return Some((root, 0.5 * (min + max), max - min));
        }
        prev = (l, g);
    }
    None
}

/// Published closed forms for the 2×2 game, reproduced verbatim for
/// reconciliation against the solved values.
pub mod printed {
    use super::{Candidate, GammaHat};

    fn golden() -> (f64, f64) {
        let s5 = 5f64.sqrt();
        ((s5 + 1.0) / 2.0, (s5 - 1.0) / 2.0)
    }

    fn seventeen() -> (f64, f64) {
        let s17 = 17f64.sqrt();
        ((s17 + 3.0) / 2.0, (s17 - 3.0) / 2.0)
    }

    /// Candidate payoffs as listed for the 2×2 game.
    pub fn candidate_payoff(cand: Candidate, l: f64, g: f64, c: f64, d: f64) -> f64 {
        let d2 = d * d;
        match cand {
            Candidate::Cone => l * (l.powi(3) - 2.0 * l * l + 1.0 - 3.5 * g) * d2 - c,
            Candidate::Parallel => l * (-l.powi(3) + 2.0 * l - 1.0 - 0.5 * g) * d2 - c,
            Candidate::Zee1 => 0.5 * l * (-l.powi(3) - l * l + 3.0 * l - 1.0 - 2.25 * g) * d2 - c,
            Candidate::Zee2 => 0.5 * l * (-l.powi(3) - 2.0 * l * l + 5.0 * l - 2.0 - 1.25 * g) * d2 - 2.0 * c,
            Candidate::Full => 0.5 * l * (-l.powi(3) - 2.0 * l * l + 5.0 * l - 2.0 - g) * d2 - 2.0 * c,
        }
    }

    pub fn gamma_max(cand: Candidate, l: f64) -> f64 {
        let (phi, phi_inv) = golden();
        let (s_hi, s_lo) = seventeen();
        let r2 = 2f64.sqrt();
        match cand {
            Candidate::Cone => 2.0 / 7.0 * (1.0 - l) * (phi - l) * (phi_inv + l),
            Candidate::Parallel => 2.0 * (1.0 - l) * (l + phi) * (l - phi_inv),
            Candidate::Zee1 => 4.0 / 9.0 * (1.0 - l) * (l + r2 + 1.0) * (l - (r2 - 1.0)),
            Candidate::Zee2 => 0.8 * (1.0 - l) * (l + s_hi) * (l - s_lo),
            Candidate::Full => (1.0 - l) * (l + s_hi) * (l - s_lo),
        }
    }

    pub fn lambda_min(cand: Candidate) -> f64 {
        match cand {
            Candidate::Cone => 0.0,
            Candidate::Parallel => golden().1,
            Candidate::Zee1 => 2f64.sqrt() - 1.0,
            Candidate::Zee2 | Candidate::Full => seventeen().1,
        }
    }

    /// Linking-cost bounds as listed. The parallel entry keeps its
    /// published coefficients (−λ³ + 2λ² − 1).
    pub fn c_max(cand: Candidate, l: f64, g: f64, d: f64) -> f64 {
        let d2 = d * d;
        match cand {
            Candidate::Cone => l * (l.powi(3) - 2.0 * l * l + 1.0 - 3.5 * g) * d2,
            Candidate::Parallel => l * (-l.powi(3) + 2.0 * l * l - 1.0 - 0.5 * g) * d2,
            Candidate::Zee1 => 0.5 * l * (-l.powi(3) - l * l + 3.0 * l - 1.0 - 2.25 * g) * d2,
            Candidate::Zee2 => 0.25 * l * (-l.powi(3) - 2.0 * l * l + 5.0 * l - 2.0 - 1.25 * g) * d2,
            Candidate::Full => 0.25 * l * (-l.powi(3) - 2.0 * l * l + 5.0 * l - 2.0 - g) * d2,
        }
    }

    pub fn gamma_hat(which: GammaHat, l: f64) -> f64 {
        let q = (1.0 - l).powi(2);
        match which {
            GammaHat::Fz1 => 0.8 * q,
            GammaHat::Z2c => 4.0 / 23.0 * q * (3.0 * l + 4.0),
            GammaHat::Pc => 2.0 / 3.0 * q * (l + 1.0),
            GammaHat::Pz2 => l * q,
        }
    }
}

/// Quantities characterising the general game's congestion regimes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeQuantities {
    pub lambda: f64,
    pub gamma: f64,
    /// Optimal out-degree λ(1−λ)D/√c; `None` when c = 0.
    pub d_hat: Option<f64>,
    /// γ below which congestion never changes best responses:
    /// (1−λ)(1−λ²)/n.
    pub low_gamma_threshold: f64,
}

impl RegimeQuantities {
    /// Optimal foreign congestion for a retailer with out-degree `d`.
    pub fn f_hat(&self, d: f64) -> Result<f64> {
        optimal_foreign_congestion(self.lambda, self.gamma, d)
    }
}

pub fn regime_quantities(p: &ModelParams) -> RegimeQuantities {
    let l = p.lambda;
    RegimeQuantities {
        lambda: l,
        gamma: p.gamma,
        d_hat: optimal_out_degree(l, p.demand, p.c).ok(),
        low_gamma_threshold: (1.0 - l) * (1.0 - l * l) / p.n as f64,
    }
}

pub fn optimal_out_degree(lambda: f64, demand: f64, c: f64) -> Result<f64> {
    if c <= 0.0 {
        return Err(ScnError::UndefinedRegime("optimal out-degree needs c > 0"));
    }
    Ok(lambda * (1.0 - lambda) * demand / c.sqrt())
}

/// max{0, (1−λ)(1−λ²)/γ − 1/d}.
pub fn optimal_foreign_congestion(lambda: f64, gamma: f64, d: f64) -> Result<f64> {
    if gamma <= 0.0 {
        return Err(ScnError::UndefinedRegime("optimal congestion needs gamma > 0"));
    }
    if d <= 0.0 {
        return Err(invalid("d", "out-degree must be positive"));
    }
    Ok(((1.0 - lambda) * (1.0 - lambda * lambda) / gamma - 1.0 / d).max(0.0))
}

/// Own-supplier reliability maximising a parallel-network retailer's payoff
/// as published: λ₁ + λ₂ + 1 − 2/(1+λ_r) − γ/(2(1−λ_r²)).
pub fn lambda_hat(lambda_1: f64, lambda_2: f64, lambda_r: f64, gamma: f64) -> f64 {
    lambda_1 + lambda_2 + 1.0 - 2.0 / (1.0 + lambda_r) - gamma / (2.0 * (1.0 - lambda_r * lambda_r))
}
