use std::path::Path;

use scn_core::analytic::{gamma_hat_intersection, lambda_hat, payoff_supplier, printed, PerCandidate};
use scn_core::equilibrium::{Equilibrium, RetailerPayoff};
use scn_core::io::{network_to_json, parse_network, ConfigFile};
use scn_core::model::format_class_set;
use scn_core::montecarlo::Rates;
use scn_core::phase::write_csv;
use scn_core::{
    br_dynamics, classify, enumerate_equilibria, estimate_payoffs, nash_check, payoff_congestion,
    payoff_hetero_retailer, payoff_hetero_supplier, reconcile, regime_quantities, thresholds_2x2, DeviationCertificate,
    EnumerateOptions, GammaAxis, GridSpec, HeteroParams, ModelParams, Network,
};
use serde_json::{json, Value};

use crate::args::{
    EquilibriaArgs, EquilibriumMode, Format, HeteroArgs, HeteroFlags, ParamArgs, PayoffArgs, SimulateArgs, SweepArgs,
    ThresholdArgs,
};
use crate::{emit_json, emit_text, read_file, write_file, CliResult, Failure};

fn config(params: &ParamArgs, hetero: Option<&HeteroFlags>) -> CliResult<ConfigFile> {
    let base = match &params.config {
        Some(path) => ConfigFile::parse(&read_file(path)?)?,
        None => ConfigFile::default(),
    };
    let flags = ConfigFile {
        n: params.n,
        m: params.m,
        d: params.d,
        lambda: params.lambda,
        c: params.c,
        gamma: params.gamma,
        lambda_r: hetero.and_then(|h| h.lambda_r),
        lambda_sup: hetero.and_then(|h| h.lambda_sup.clone()),
        gamma_sup: hetero.and_then(|h| h.gamma_sup.clone()),
        ..ConfigFile::default()
    };
    Ok(base.overlay(flags))
}

fn is_hetero(cfg: &ConfigFile) -> bool {
    cfg.lambda_r.is_some() || cfg.lambda_sup.is_some() || cfg.gamma_sup.is_some()
}

/// Takes missing dimensions from the network.
fn fill_dims(cfg: &mut ConfigFile, net: &Network) {
    let tiers = net.tiers();
    cfg.n.get_or_insert(tiers[0]);
    cfg.m.get_or_insert(*tiers.last().expect("at least two tiers"));
    if cfg.tiers.is_none() && !net.is_two_tier() {
        cfg.tiers = Some(tiers.to_vec());
    }
}

fn load_network(path: &Path) -> CliResult<Network> {
    Ok(parse_network(&read_file(path)?)?)
}

fn require_two_tier(net: &Network, n: usize, m: usize) -> CliResult<()> {
    if net.tiers() != [n, m] {
        return Err(Failure::Invalid(format!(
            "parameters describe a {n}x{m} two-tier game but the network has tiers {:?}",
            net.tiers()
        )));
    }
    Ok(())
}

fn one_based(sets: &[Vec<usize>]) -> Vec<Vec<usize>> {
    sets.iter().map(|s| s.iter().map(|j| j + 1).collect()).collect()
}

/// The two parameterisations of the game, dispatched once.
enum Game {
    Homogeneous(ModelParams),
    Heterogeneous(HeteroParams),
}

impl Game {
    fn from_config(cfg: &ConfigFile) -> CliResult<Self> {
        Ok(if is_hetero(cfg) {
            Game::Heterogeneous(cfg.hetero_params()?)
        } else {
            Game::Homogeneous(cfg.model_params()?)
        })
    }

    fn kind(&self) -> &'static str {
        match self {
            Game::Homogeneous(_) => "homogeneous",
            Game::Heterogeneous(_) => "heterogeneous",
        }
    }

    fn dims(&self) -> (usize, usize) {
        match self {
            Game::Homogeneous(p) => RetailerPayoff::dims(p),
            Game::Heterogeneous(h) => RetailerPayoff::dims(h),
        }
    }

    fn retailer(&self, net: &Network, i: usize) -> f64 {
        match self {
            Game::Homogeneous(p) => payoff_congestion(net, p, i),
            Game::Heterogeneous(h) => payoff_hetero_retailer(net, h, i),
        }
    }

    fn supplier(&self, net: &Network, j: usize) -> f64 {
        match self {
            Game::Homogeneous(p) => payoff_supplier(net, p, j),
            Game::Heterogeneous(h) => payoff_hetero_supplier(net, h, j),
        }
    }
}

fn closed_form(game: &Game, net: &Network) -> Value {
    json!({
        "retailers": (0..net.n()).map(|i| game.retailer(net, i)).collect::<Vec<_>>(),
        "suppliers": (0..net.m()).map(|j| game.supplier(net, j)).collect::<Vec<_>>(),
    })
}

pub fn payoff(a: PayoffArgs) -> CliResult<()> {
    let net = load_network(&a.net)?;
    let mut cfg = config(&a.params, None)?;
    fill_dims(&mut cfg, &net);
    let game = Game::from_config(&cfg)?;
    let (n, m) = game.dims();
    require_two_tier(&net, n, m)?;
    let mut out = closed_form(&game, &net);
    out["model"] = json!(game.kind());
    out["class"] = json!(classify(&net).label.as_str());
    out["network"] = network_to_json(&net);
    emit_json(out, a.output.out.as_deref())
}

pub fn simulate(a: SimulateArgs) -> CliResult<()> {
    let net = load_network(&a.net)?;
    let mut cfg = config(&a.params, Some(&a.hetero))?;
    fill_dims(&mut cfg, &net);
    let game = Game::from_config(&cfg)?;
    check_jobs(a.jobs)?;
    let est = match &game {
        Game::Homogeneous(p) => estimate(&net, p, &a)?,
        Game::Heterogeneous(h) => estimate(&net, h, &a)?,
    };
    let analytic = match &game {
        Game::Homogeneous(p) if p.tiers.is_none() => Some(closed_form(&game, &net)),
        Game::Heterogeneous(_) => Some(closed_form(&game, &net)),
        _ => None,
    };
    let out = json!({
        "model": game.kind(),
        "samples": est.samples,
        "seed": est.seed,
        "tiers": net.tiers(),
        "mean": est.mean,
        "std_error": est.std_error,
        "analytic": analytic,
    });
    emit_json(out, a.output.out.as_deref())
}

fn estimate<P: Rates + Sync>(net: &Network, p: &P, a: &SimulateArgs) -> CliResult<scn_core::PayoffEstimate> {
    Ok(estimate_payoffs(net, p, a.samples, a.seed, a.jobs)?)
}

fn check_jobs(jobs: Option<usize>) -> CliResult<()> {
    if jobs == Some(0) {
        return Err(Failure::Invalid("--jobs must be at least 1".into()));
    }
    Ok(())
}

/// Runs `f` on a pool of `jobs` threads, or on the global pool.
fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    check_jobs(jobs)?;
    match jobs {
        None => Ok(f()),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Failure::Internal(format!("thread pool: {e}"))),
    }
}

fn certificate_json(c: &DeviationCertificate) -> Value {
    json!({
        "retailer": c.retailer + 1,
        "original": c.original.iter().map(|j| j + 1).collect::<Vec<_>>(),
        "improving": c.improving.iter().map(|j| j + 1).collect::<Vec<_>>(),
        "gain": c.gain,
    })
}

fn equilibrium_json(e: &Equilibrium) -> Value {
    json!({
        "links": one_based(&e.links),
        "class": e.class.label.as_str(),
        "payoffs": e.payoffs,
    })
}

pub fn equilibria(a: EquilibriaArgs) -> CliResult<()> {
    let net = a.net.as_deref().map(load_network).transpose()?;
    let mut cfg = config(&a.params, Some(&a.hetero))?;
    if let Some(net) = &net {
        fill_dims(&mut cfg, net);
    }
    let out = match Game::from_config(&cfg)? {
        Game::Homogeneous(p) => run_equilibria(&a, &p, net)?,
        Game::Heterogeneous(h) => run_equilibria(&a, &h, net)?,
    };
    emit_json(out, a.output.out.as_deref())
}

fn run_equilibria<P: RetailerPayoff>(a: &EquilibriaArgs, p: &P, net: Option<Network>) -> CliResult<Value> {
    let (n, m) = p.dims();
    if let Some(net) = &net {
        require_two_tier(net, n, m)?;
    }
    let payoffs = |net: &Network| (0..n).map(|i| p.retailer_payoff(net, i)).collect::<Vec<_>>();
    let value = match a.mode {
        EquilibriumMode::Enumerate => {
            let opts = EnumerateOptions {
                canonical: a.canonical,
                keep_certificates: a.certificates,
            };
            let report = with_jobs(a.jobs, || enumerate_equilibria(p, opts))??;
            let mut v = json!({
                "n": n,
                "m": m,
                "profiles_examined": report.profiles_examined,
                "classes": report.class_set().iter().map(|l| l.as_str()).collect::<Vec<_>>(),
                "equilibria": report.equilibria.iter().map(equilibrium_json).collect::<Vec<_>>(),
            });
            if a.certificates {
                v["rejections"] = report
                    .rejections
                    .iter()
                    .map(|r| json!({ "links": one_based(&r.links), "certificate": certificate_json(&r.certificate) }))
                    .collect();
            }
            v
        }
        EquilibriumMode::NashCheck => {
            let net = net.ok_or_else(|| Failure::Invalid("--mode nash-check needs --net".into()))?;
            let verdict = nash_check(&net, p)?;
            json!({
                "network": network_to_json(&net),
                "class": classify(&net).label.as_str(),
                "payoffs": payoffs(&net),
                "is_nash": verdict.is_nash,
                "certificate": verdict.certificate.as_ref().map(certificate_json),
            })
        }
        EquilibriumMode::BrDynamics => {
            let start = net.unwrap_or_else(|| Network::empty(n, m));
            let t = br_dynamics(&start, p, a.max_rounds)?;
            let last = t.last();
            json!({
                "converged": t.converged,
                "rounds": t.rounds,
                "final": network_to_json(last),
                "class": classify(last).label.as_str(),
                "payoffs": payoffs(last),
                "trajectory": t.networks.iter().map(|x| one_based(x.neighborhoods())).collect::<Vec<_>>(),
            })
        }
    };
    Ok(value)
}

pub fn thresholds(a: ThresholdArgs) -> CliResult<()> {
    let cfg = config(&a.params, None)?;
    let lambda = cfg
        .lambda
        .ok_or_else(|| Failure::Invalid("missing parameter `lambda`".into()))?;
    let (c, d, gamma) = (cfg.c.unwrap_or(0.0), cfg.d.unwrap_or(1.0), cfg.gamma.unwrap_or(0.0));
    let t = thresholds_2x2(lambda, c, d)?;
    let p = ModelParams::new(cfg.n.unwrap_or(2), cfg.m.unwrap_or(2), d, lambda, c, gamma)?;
    let regime = regime_quantities(&p);
    let degree = match a.degree {
        Some(x) => x,
        None => regime.d_hat.map_or(1.0, |x| x.round().max(1.0)),
    };
    let f_hat = if gamma > 0.0 { Some(regime.f_hat(degree)?) } else { None };
    let (l1, l2, lr) = (
        a.lambda_1.unwrap_or(lambda),
        a.lambda_2.unwrap_or(lambda),
        a.lambda_r.unwrap_or(lambda),
    );
    let intersection =
        gamma_hat_intersection(c, d).map(|(l, g, spread)| json!({ "lambda": l, "gamma": g, "spread": spread }));

    let out = json!({
        "lambda": lambda,
        "c": c,
        "d": d,
        "gamma": gamma,
        "gamma_hat": t.gamma_hat,
        "gamma_max": t.gamma_max,
        "gamma_max_at_c": t.gamma_max_at_c,
        "lambda_min": t.lambda_min,
        "c_max": PerCandidate::from_fn(|cand| t.c_max(cand, gamma)),
        "candidate_payoffs": PerCandidate::from_fn(|cand| scn_core::candidate_payoff(cand, lambda, gamma, c, d)),
        "printed": {
            "gamma_hat": t.printed.gamma_hat,
            "gamma_max": t.printed.gamma_max,
            "lambda_min": t.printed.lambda_min,
            "c_max": PerCandidate::from_fn(|cand| printed::c_max(cand, lambda, gamma, d)),
            "candidate_payoffs": PerCandidate::from_fn(|cand| printed::candidate_payoff(cand, lambda, gamma, c, d)),
        },
        "discrepancies": t.discrepancies,
        "regime": {
            "n": p.n,
            "d_hat": regime.d_hat,
            "degree": degree,
            "f_hat": f_hat,
            "low_gamma_threshold": regime.low_gamma_threshold,
        },
        "lambda_hat": {
            "lambda_1": l1,
            "lambda_2": l2,
            "lambda_r": lr,
            "value": lambda_hat(l1, l2, lr, gamma),
        },
        "intersection": intersection,
    });
    emit_json(out, a.output.out.as_deref())
}

pub fn sweep(a: SweepArgs) -> CliResult<()> {
    let gamma = match (a.gamma_lo, a.gamma_hi) {
        (Some(lo), Some(hi)) => GammaAxis::Range { lo, hi },
        _ => GammaAxis::BelowParallelMax,
    };
    let spec = GridSpec {
        lambda_lo: a.lambda_lo,
        lambda_hi: a.lambda_hi,
        lambda_count: a.lambda_count,
        gamma,
        gamma_count: a.gamma_count,
        c_values: a.c.clone(),
        demand: a.d,
        boundary_steps: a.boundary_steps,
    };
    let (cells, report) = with_jobs(a.jobs, || -> scn_core::Result<_> {
        let cells = scn_core::sweep(&spec)?;
        let report = reconcile(&cells, spec.demand)?;
        Ok((cells, report))
    })??;

    let report_json = || serde_json::to_value(&report).map_err(|e| Failure::Internal(e.to_string()));
    if let Some(path) = &a.report {
        let mut v = report_json()?;
        crate::round_numbers(&mut v);
        let text = serde_json::to_string_pretty(&v).map_err(|e| Failure::Internal(e.to_string()))? + "\n";
        write_file(path, &text)?;
    }
    match a.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&cells, &mut buf)?;
            emit_text(&String::from_utf8_lossy(&buf), a.output.out.as_deref())
        }
        Format::Json => {
            let cells: Vec<Value> = cells
                .iter()
                .map(|c| {
                    json!({
                        "lambda": c.lambda,
                        "gamma": c.gamma,
                        "c": c.c,
                        "predicted": format_class_set(&c.predicted),
                        "enumerated": format_class_set(&c.enumerated),
                        "agree": c.agree,
                        "indeterminate": c.indeterminate,
                    })
                })
                .collect();
            let out = json!({ "grid": spec, "cells": cells, "reconcile": report_json()? });
            emit_json(out, a.output.out.as_deref())
        }
    }
}

/// "increasing", "decreasing", "constant" or "non-monotone".
fn trend(values: &[f64]) -> &'static str {
    const TOL: f64 = 1e-12;
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    if diffs.iter().all(|d| d.abs() <= TOL) {
        "constant"
    } else if diffs.iter().all(|&d| d >= -TOL) {
        "increasing"
    } else if diffs.iter().all(|&d| d <= TOL) {
        "decreasing"
    } else {
        "non-monotone"
    }
}

/// Payoff trends of every agent as one supplier parameter varies.
fn scan(
    net: &Network,
    h: &HeteroParams,
    j: usize,
    parameter: &str,
    grid: &[f64],
    set: impl Fn(&mut HeteroParams, f64),
) -> Value {
    let game_at = |x: f64| {
        let mut g = h.clone();
        set(&mut g, x);
        g
    };
    let series = |f: &dyn Fn(&HeteroParams) -> f64| grid.iter().map(|&x| f(&game_at(x))).collect::<Vec<_>>();
    let retailers: Vec<&str> = (0..net.n())
        .map(|i| trend(&series(&|g| payoff_hetero_retailer(net, g, i))))
        .collect();
    let suppliers: Vec<&str> = (0..net.m())
        .map(|k| trend(&series(&|g| payoff_hetero_supplier(net, g, k))))
        .collect();
    json!({
        "supplier": j + 1,
        "parameter": parameter,
        "range": [grid[0], grid[grid.len() - 1]],
        "retailers": retailers,
        "suppliers": suppliers,
    })
}

pub fn hetero(a: HeteroArgs) -> CliResult<()> {
    if a.scan_points < 2 {
        return Err(Failure::Invalid("--scan-points must be at least 2".into()));
    }
    let net = load_network(&a.net)?;
    let mut cfg = config(&a.params, Some(&a.hetero))?;
    fill_dims(&mut cfg, &net);
    let h = cfg.hetero_params()?;
    require_two_tier(&net, h.n, h.m)?;
    let game = Game::Heterogeneous(h.clone());

    // optimal own-supplier reliability for single-sourcing retailers of a
    // two-supplier game, next to the payoff's actual slope in that parameter
    let reliability: Vec<Value> = (0..net.n())
        .map(|i| match net.neighborhood(i) {
            [s] if h.m == 2 => {
                let s = *s;
                let other = 1 - s;
                let step = 1e-6;
                let at = |x: f64| {
                    let mut g = h.clone();
                    g.lambda_sup[s] = x;
                    payoff_hetero_retailer(&net, &g, i)
                };
                let l = h.lambda_sup[s];
                let (lo, hi) = ((l - step).max(0.0), (l + step).min(1.0));
                json!({
                    "retailer": i + 1,
                    "supplier": s + 1,
                    "lambda_hat": lambda_hat(l, h.lambda_sup[other], h.lambda_r, h.gamma_sup[s]),
                    "payoff_slope": (at(hi) - at(lo)) / (hi - lo),
                })
            }
            _ => Value::Null,
        })
        .collect();

    let k = a.scan_points;
    let lambda_grid: Vec<f64> = (1..=k).map(|x| x as f64 / (k + 1) as f64).collect();
    let gamma_top = h.gamma_sup.iter().cloned().fold(0.1, f64::max) * 2.0;
    let gamma_grid: Vec<f64> = (0..k).map(|x| gamma_top * x as f64 / (k - 1) as f64).collect();
    let mut scans = Vec::new();
    for j in 0..h.m {
        scans.push(scan(&net, &h, j, "lambda", &lambda_grid, |g, x| g.lambda_sup[j] = x));
        scans.push(scan(&net, &h, j, "gamma", &gamma_grid, |g, x| g.gamma_sup[j] = x));
    }

    let mut out = closed_form(&game, &net);
    out["class"] = json!(classify(&net).label.as_str());
    out["reliability"] = json!(reliability);
    out["scans"] = json!(scans);
    if let Some(samples) = a.samples {
        let est = estimate_payoffs(&net, &h, samples, a.seed, None)?;
        out["simulation"] = json!({
            "samples": samples,
            "seed": a.seed,
            "mean": est.mean,
            "std_error": est.std_error,
        });
    }
    emit_json(out, a.output.out.as_deref())
}

#[cfg(test)]
mod tests {
    use super::trend;

    #[test]
    fn trends() {
        assert_eq!(trend(&[1.0, 2.0, 2.0]), "increasing");
        assert_eq!(trend(&[3.0, 2.0]), "decreasing");
        assert_eq!(trend(&[1.0, 1.0]), "constant");
        assert_eq!(trend(&[1.0, 2.0, 1.0]), "non-monotone");
    }
}
