use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scn_core::montecarlo::{exact_expectation, realize_with, sample_rng};
use scn_core::{
    estimate_payoffs, payoff_congestion, payoff_hetero_supplier, realize, HeteroParams, ModelParams, Network,
};

/// Tier-by-tier propagation written with explicit index loops.
fn reference(
    tiers: &[usize],
    links: &[Vec<Vec<usize>>],
    omega: &[Vec<bool>],
    demand: f64,
    c: f64,
    gamma: f64,
) -> Vec<Vec<f64>> {
    let t_count = tiers.len();
    let delta = tiers[0] as f64 * demand;
    let mut d = vec![vec![0.0; 0]; t_count];
    d[0] = vec![demand; tiers[0]];
    for t in 1..t_count {
        d[t] = vec![0.0; tiers[t]];
        for i in 0..tiers[t - 1] {
            let deg = links[t - 1][i].len();
            for k in 0..deg {
                let j = links[t - 1][i][k];
                d[t][j] += d[t - 1][i] / deg as f64;
            }
        }
    }
    let mut r = vec![vec![0.0; 0]; t_count];
    let mut s = vec![vec![0.0; 0]; t_count];
    r[t_count - 1] = d[t_count - 1].clone();
    s[t_count - 1] = (0..tiers[t_count - 1])
        .map(|j| if omega[t_count - 1][j] { r[t_count - 1][j] } else { 0.0 })
        .collect();
    for t in (0..t_count - 1).rev() {
        r[t] = vec![0.0; tiers[t]];
        s[t] = vec![0.0; tiers[t]];
        for i in 0..tiers[t] {
            let deg = links[t][i].len();
            if d[t][i] == 0.0 {
                continue;
            }
            let mut got = 0.0;
            for k in 0..deg {
                let j = links[t][i][k];
                // proportional share of j's delivered quantity
                got += s[t + 1][j] * (d[t][i] / deg as f64) / d[t + 1][j];
            }
            r[t][i] = got;
            s[t][i] = if omega[t][i] { got } else { 0.0 };
        }
    }
    let mut price = vec![0.0; t_count + 1];
    for t in 0..t_count {
        price[t] = delta - s[t].iter().sum::<f64>();
    }
    price[t_count] = delta - r[t_count - 1].iter().sum::<f64>();
    let mut pay = vec![vec![0.0; 0]; t_count];
    for t in 0..t_count {
        pay[t] = vec![0.0; tiers[t]];
        for i in 0..tiers[t] {
            if d[t][i] == 0.0 {
                continue;
            }
            let mut value = s[t][i] * price[t] - r[t][i] * price[t + 1];
            if t < t_count - 1 {
                let deg = links[t][i].len();
                if deg == 0 {
                    continue;
                }
                let mut l = 0.0;
                for k in 0..deg {
                    let j = links[t][i][k];
                    l += gamma / 2.0 * s[t + 1][j] * s[t + 1][j];
                }
                value -= c * deg as f64 + l / deg as f64;
            }
            pay[t][i] = value;
        }
    }
    pay
}

fn random_layered(rng: &mut ChaCha8Rng, tiers: &[usize]) -> Vec<Vec<Vec<usize>>> {
    (0..tiers.len() - 1)
        .map(|t| {
            (0..tiers[t])
                .map(|_| (0..tiers[t + 1]).filter(|_| rng.gen_bool(0.6)).collect())
                .collect()
        })
        .collect()
}

#[test]
fn three_tier_realizations_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let tiers = vec![rng.gen_range(1..=4), rng.gen_range(1..=4), rng.gen_range(1..=3)];
        let links = random_layered(&mut rng, &tiers);
        let net = Network::multi_tier(tiers.clone(), links.clone()).unwrap();
        let mut p = ModelParams::new(tiers[0], tiers[2], 1.3, 0.7, 0.01, 0.04).unwrap();
        p.tiers = Some(tiers.clone());
        let omega: Vec<Vec<bool>> = tiers
            .iter()
            .map(|&k| (0..k).map(|_| rng.gen_bool(0.7)).collect())
            .collect();
        let fast = realize_with(&net, &p, &omega).unwrap();
        let slow = reference(&tiers, &links, &omega, 1.3, 0.01, 0.04);
        for t in 0..3 {
            for i in 0..tiers[t] {
                assert!(
                    (fast.payoff[t][i] - slow[t][i]).abs() < 1e-12,
                    "{tiers:?} {links:?} {omega:?} {t} {i} {} {}",
                    fast.payoff[t][i],
                    slow[t][i]
                );
            }
        }
        assert!(fast.clearing_residual() < 1e-12);
    }
}

#[test]
fn chain_has_single_supply_path() {
    // one active supplier per tier: each retailer's realized demand is D
    // times the product of upstream successes
    let tiers = vec![2, 1, 1];
    let net = Network::multi_tier(tiers.clone(), vec![vec![vec![0], vec![0]], vec![vec![0]]]).unwrap();
    let mut p = ModelParams::new(2, 1, 1.0, 0.8, 0.0, 0.0).unwrap();
    p.tiers = Some(tiers);
    let r = realize_with(&net, &p, &[vec![true, true], vec![true], vec![false]]).unwrap();
    assert_eq!(r.realized[0], vec![0.0, 0.0]);
    let r = realize_with(&net, &p, &[vec![true, false], vec![true], vec![true]]).unwrap();
    assert_eq!(r.realized[0], vec![1.0, 1.0]);
    assert_eq!(r.supply[0], vec![1.0, 0.0]);
}

#[test]
fn estimate_is_reproducible_and_job_independent() {
    let net = Network::new(2, 2, vec![vec![0], vec![0, 1]]).unwrap();
    let p = ModelParams::new(2, 2, 1.0, 0.8, 0.01, 0.02).unwrap();
    let a = estimate_payoffs(&net, &p, 5000, 9, Some(1)).unwrap();
    let b = estimate_payoffs(&net, &p, 5000, 9, Some(4)).unwrap();
    let c = estimate_payoffs(&net, &p, 5000, 9, None).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    let other = estimate_payoffs(&net, &p, 5000, 10, None).unwrap();
    assert_ne!(a.mean, other.mean);
}

#[test]
fn sample_stream_is_fixed_by_seed_and_index() {
    let net = Network::new(2, 2, vec![vec![0], vec![1]]).unwrap();
    let p = ModelParams::new(2, 2, 1.0, 0.5, 0.0, 0.0).unwrap();
    let a = realize(&net, &p, &mut sample_rng(4, 17)).unwrap();
    let b = realize(&net, &p, &mut sample_rng(4, 17)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn cone_estimate_within_four_standard_errors() {
    let cone = Network::new(2, 2, vec![vec![0], vec![0]]).unwrap();
    let p = ModelParams::new(2, 2, 1.0, 0.8, 0.0, 0.0).unwrap();
    let est = estimate_payoffs(&cone, &p, 1_000_000, 7, None).unwrap();
    for i in 0..2 {
        let (mean, se) = est.retailer(i);
        assert!((mean - 0.128).abs() <= 4.0 * se, "{mean} ± {se}");
    }
}

#[test]
fn failure_free_estimate_has_no_variance() {
    let net = Network::new(3, 2, vec![vec![0, 1], vec![0], vec![]]).unwrap();
    let p = ModelParams::new(3, 2, 1.0, 1.0, 0.02, 0.1).unwrap();
    let est = estimate_payoffs(&net, &p, 2000, 1, None).unwrap();
    for i in 0..3 {
        let (mean, se) = est.retailer(i);
        assert_eq!(se, 0.0);
        assert!((mean - payoff_congestion(&net, &p, i)).abs() < 1e-12);
    }
}

#[test]
fn failure_free_without_congestion_costs_only_links() {
    let net = Network::new(3, 2, vec![vec![0, 1], vec![0], vec![]]).unwrap();
    let p = ModelParams::new(3, 2, 1.0, 1.0, 0.02, 0.0).unwrap();
    let est = estimate_payoffs(&net, &p, 1000, 1, None).unwrap();
    for i in 0..3 {
        assert_eq!(est.retailer(i), (-0.02 * net.out_degree(i) as f64, 0.0));
    }
}

#[test]
fn supplier_estimates_match_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut misses = 0;
    let mut checks = 0;
    for trial in 0..10 {
        let n = rng.gen_range(2..=3);
        let m = rng.gen_range(2..=3);
        let links = (0..n).map(|_| (0..m).filter(|_| rng.gen_bool(0.5)).collect()).collect();
        let net = Network::new(n, m, links).unwrap();
        let h = HeteroParams {
            n,
            m,
            demand: 1.0,
            c: 0.0,
            lambda_r: rng.gen_range(0.5..0.95),
            lambda_sup: (0..m).map(|_| rng.gen_range(0.5..0.95)).collect(),
            gamma_sup: vec![0.0; m],
        };
        let est = estimate_payoffs(&net, &h, 100_000, 100 + trial, None).unwrap();
        let exact = exact_expectation(&net, &h).unwrap();
        for j in 0..m {
            let closed = payoff_hetero_supplier(&net, &h, j);
            assert!((closed - exact[1][j]).abs() < 1e-10);
            let (mean, se) = est.supplier(j);
            checks += 1;
            if (mean - closed).abs() > 4.0 * se + 1e-12 {
                misses += 1;
            }
        }
    }
    assert!(misses <= 1, "{misses} of {checks} outside 4 standard errors");
}
