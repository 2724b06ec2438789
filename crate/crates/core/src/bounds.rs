//! Sample-count formulas and the lower/upper bound functions behind the
//! adaptive stopping rule.

use crate::error::{Error, Result};
use crate::estimator::SeedStats;
use crate::graph::{Graph, GraphConstants};

/// 1 - 1/sqrt(e), the coverage-greedy guarantee.
pub fn approx_ratio() -> f64 {
    1.0 - (-0.5f64).exp()
}

/// Accuracy/confidence parameters plus the feasible-set counting terms.
#[derive(Debug, Clone)]
pub struct BoundParams {
    pub eps: f64,
    pub delta: f64,
    /// Largest cardinality of any feasible set.
    pub k_max: usize,
    /// argmax over k <= k_max of C(n, k).
    pub k0: usize,
    /// ln(k_max) + ln C(n, k0), kept in log domain.
    pub ln_m: f64,
}

impl BoundParams {
    pub fn new(g: &Graph, budget: f64, eps: f64, delta: f64) -> Result<BoundParams> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::domain(format!("eps {eps} outside (0,1)")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::domain(format!("delta {delta} outside (0,1)")));
        }
        let mut costs: Vec<f64> = g.costs().to_vec();
        costs.sort_by(f64::total_cmp);
        let mut spent = 0.0;
        let mut k_max = 0usize;
        for c in costs {
            if spent + c <= budget {
                spent += c;
                k_max += 1;
            } else {
                break;
            }
        }
        let n = g.n();
        let k0 = k_max.min(n / 2);
        let ln_m = if k_max >= 1 {
            (k_max as f64).ln() + ln_binomial(n as u64, k0 as u64)
        } else {
            0.0
        };
        Ok(BoundParams {
            eps,
            delta,
            k_max,
            k0,
            ln_m,
        })
    }
}

/// ln(n!) with an exact sum for small n and a Stirling series above.
fn ln_factorial(n: u64) -> f64 {
    if n < 32 {
        return (2..=n).map(|i| (i as f64).ln()).sum();
    }
    let x = n as f64;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
}

pub fn ln_binomial(n: u64, k: u64) -> f64 {
    assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// alpha(delta) = (1 - 1/sqrt(e)) sqrt(ln(2/delta)).
pub fn alpha(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta {delta} outside (0,1)")));
    }
    Ok(approx_ratio() * (2.0 / delta).ln().sqrt())
}

/// beta(delta) = (1 - 1/sqrt(e)) sqrt(ln(2 k_max C(n,k0) / delta)).
pub fn beta(delta: f64, params: &BoundParams) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta {delta} outside (0,1)")));
    }
    Ok(approx_ratio() * ((2.0 / delta).ln() + params.ln_m).sqrt())
}

/// Greedy feasible lower bound on OPT: scan nodes in descending benefit
/// (ties by id) and take everything that still fits.
pub fn lopt(g: &Graph, budget: f64) -> f64 {
    lopt_set(g, budget).1
}

pub fn lopt_set(g: &Graph, budget: f64) -> (Vec<u32>, f64) {
    let mut order: Vec<u32> = (0..g.n() as u32).collect();
    order.sort_by(|&a, &b| g.benefit(b).total_cmp(&g.benefit(a)).then(a.cmp(&b)));
    let mut set = Vec::new();
    let mut spent = 0.0;
    let mut value = 0.0;
    for u in order {
        if spent + g.cost(u) <= budget {
            spent += g.cost(u);
            value += g.benefit(u);
            set.push(u);
        }
    }
    (set, value)
}

/// Worst-case pool size: the theoretical sample count with OPT replaced by
/// its computable lower bound, at confidence delta/3.
pub fn sample_bound(params: &BoundParams, consts: &GraphConstants, opt_lb: f64) -> Result<u64> {
    if opt_lb <= 0.0 {
        return Err(Error::domain("sample bound requires a positive OPT lower bound"));
    }
    let d3 = params.delta / 3.0;
    let ab = alpha(d3)? + beta(d3, params)?;
    let raw = 2.0 * consts.rho * consts.big_gamma * ab * ab / (params.eps * params.eps * opt_lb);
    Ok(raw.ceil() as u64)
}

/// High-probability lower bound on B(S) given its pool estimate, clamped to
/// [0, B_hat]. The second branch is the printed formula even when
/// `rho c / 3 - c p` goes negative; the square root dominates there.
pub fn lower_bound(
    pool_size: usize,
    delta: f64,
    b_hat: f64,
    stats: &SeedStats,
    consts: &GraphConstants,
) -> f64 {
    let t = pool_size as f64;
    let c = (1.0 / delta).ln();
    let rho = consts.rho;
    let p = stats.p;
    let branch1 = b_hat - rho * c * consts.big_gamma / (3.0 * t);
    let a = rho * c / 3.0 - c * p;
    let branch2 = b_hat
        - consts.big_gamma / t
            * (a + (a * a + 2.0 * t * p * c * b_hat / consts.big_gamma).sqrt());
    branch1.min(branch2).clamp(0.0, b_hat)
}

/// High-probability upper bound on OPT given the greedy candidate's estimate.
pub fn upper_bound(
    pool_size: usize,
    delta: f64,
    b_hat_greedy: f64,
    stats: &SeedStats,
    consts: &GraphConstants,
) -> f64 {
    let t = pool_size as f64;
    let c = (1.0 / delta).ln();
    let p = stats.p;
    let base = b_hat_greedy / approx_ratio();
    base + consts.big_gamma / t
        * (-c * p + (c * c * p * p + 2.0 * t * c * p * base / consts.big_gamma).sqrt())
}

/// Analytic tail bounds for `sum Z_j - T mu`: the Bernstein-style upper-tail
/// bound and the sub-Gaussian lower-tail bound. Test support.
pub fn concentration_tail(pool_size: usize, lambda: f64, mu: f64, stats: &SeedStats) -> (f64, f64) {
    assert!(lambda > 0.0);
    let t = pool_size as f64;
    let range = stats.mu_max - stats.mu_min;
    let denom_upper = 2.0 / 3.0 * range * lambda + 2.0 * stats.p * mu * t;
    let upper = if denom_upper > 0.0 {
        (-lambda * lambda / denom_upper).exp()
    } else {
        0.0
    };
    let denom_lower = 2.0 * stats.p * mu * t;
    let lower = if denom_lower > 0.0 {
        (-lambda * lambda / denom_lower).exp()
    } else {
        0.0
    };
    (upper, lower)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphBuilder;
    use crate::oracle::exact_opt;

    fn graph(edges: &[(u64, u64, f64)]) -> Graph {
        let triples: Vec<(u64, u64, Option<f64>)> =
            edges.iter().map(|&(u, v, p)| (u, v, Some(p))).collect();
        GraphBuilder::from_edges(&triples, true).unwrap().build().unwrap()
    }

    fn stats(mu_min: f64, rho: f64) -> SeedStats {
        let mu_max = rho + mu_min;
        SeedStats {
            mu_min,
            mu_max,
            rho,
            p: rho.min((mu_max.sqrt() - mu_min.sqrt()).powi(2)),
        }
    }

    #[test]
    fn lopt_takes_top_benefits() {
        let mut g = graph(&[(0, 1, 0.5), (1, 2, 0.5)]);
        g.set_benefits(vec![5.0, 3.0, 2.0]).unwrap();
        g.set_costs(vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(lopt(&g, 2.0), 8.0);
        assert_eq!(lopt(&g, 0.0), 0.0);
        let (set, value) = lopt_set(&g, 2.0);
        assert_eq!(set, vec![0, 1]);
        assert!(g.total_cost(&set) <= 2.0);
        assert_eq!(value, 8.0);
    }

    #[test]
    fn lopt_skips_and_continues() {
        let mut g = graph(&[(0, 1, 0.5), (1, 2, 0.5)]);
        g.set_benefits(vec![5.0, 3.0, 2.0]).unwrap();
        g.set_costs(vec![10.0, 1.0, 1.0]).unwrap();
        // Best node does not fit; the scan keeps going.
        assert_eq!(lopt(&g, 2.0), 5.0);
    }

    #[test]
    fn lopt_never_exceeds_exact_opt() {
        for (edges, costs, budget) in [
            (vec![(0u64, 1u64, 0.5), (1, 2, 0.5)], vec![1.0, 2.0, 1.0], 2.0),
            (vec![(0, 1, 0.9), (2, 1, 0.8), (2, 0, 0.2)], vec![1.0, 1.0, 1.0], 1.0),
        ] {
            let mut g = graph(&edges);
            g.set_costs(costs).unwrap();
            let (_, opt) = exact_opt(&g, budget).unwrap();
            assert!(lopt(&g, budget) <= opt + 1e-12);
        }
    }

    #[test]
    fn alpha_unit_log() {
        let delta = 2.0 / std::f64::consts::E;
        assert!((alpha(delta).unwrap() - approx_ratio()).abs() < 1e-12);
        assert!(alpha(1.5).is_err());
    }

    #[test]
    fn beta_dominates_alpha() {
        let mut g = graph(&[(0, 1, 0.5), (1, 2, 0.5), (2, 3, 0.5)]);
        g.set_costs(vec![1.0; 4]).unwrap();
        let params = BoundParams::new(&g, 2.0, 0.1, 0.05).unwrap();
        for delta in [0.01, 0.1, 0.4, 0.9] {
            assert!(beta(delta, &params).unwrap() >= alpha(delta).unwrap());
        }
    }

    #[test]
    fn ln_binomial_matches_exact_integer_binomial() {
        // Exact binomials via u128 product, no floating intermediate.
        fn exact(n: u64, k: u64) -> u128 {
            let mut num: u128 = 1;
            for i in 0..k {
                num = num * (n - i) as u128 / (i + 1) as u128;
            }
            num
        }
        for (n, k) in [(100, 10), (30, 15), (50, 25), (12, 6), (40, 3)] {
            let expect = (exact(n, k) as f64).ln();
            let got = ln_binomial(n, k);
            assert!(
                (got - expect).abs() < 1e-6 * expect.max(1.0),
                "C({n},{k}): {got} vs {expect}"
            );
        }
        assert_eq!(ln_binomial(7, 0), 0.0);
    }

    #[test]
    fn k_max_counts_cheapest_feasible_set() {
        let mut g = graph(&[(0, 1, 0.5), (1, 2, 0.5), (2, 3, 0.5)]);
        g.set_costs(vec![0.0, 1.0, 2.0, 5.0]).unwrap();
        let params = BoundParams::new(&g, 3.0, 0.1, 0.1).unwrap();
        assert_eq!(params.k_max, 3); // costs 0 + 1 + 2 fit in 3
        assert_eq!(params.k0, 2); // min(k_max, n/2)
    }

    #[test]
    fn sample_bound_scalings() {
        let mut g = graph(&[(0, 1, 0.5), (1, 2, 0.5), (2, 0, 0.5)]);
        g.set_costs(vec![1.0; 3]).unwrap();
        let consts = g.compute_constants();
        let p1 = BoundParams::new(&g, 2.0, 0.1, 0.1).unwrap();
        let p2 = BoundParams::new(&g, 2.0, 0.05, 0.1).unwrap();
        let n1 = sample_bound(&p1, &consts, 10.0).unwrap();
        // Doubling the OPT lower bound halves the bound (up to ceiling).
        let half = sample_bound(&p1, &consts, 20.0).unwrap();
        assert!((n1 as f64 / half as f64 - 2.0).abs() < 0.01);
        // Halving eps quadruples it.
        let quad = sample_bound(&p2, &consts, 10.0).unwrap();
        assert!((quad as f64 / n1 as f64 - 4.0).abs() < 0.01);
        assert!(sample_bound(&p1, &consts, 0.0).is_err());
    }

    #[test]
    fn sample_bound_matches_direct_evaluation() {
        // rho = 0.4, Gamma = 100, eps = 0.1, delta = 1/n with n = 100,
        // k_max = 5, opt_lb = 20; recompute every factor independently.
        let consts = GraphConstants {
            gamma: vec![],
            big_gamma: 100.0,
            phi: 40.0,
            rho: 0.4,
        };
        let params = BoundParams {
            eps: 0.1,
            delta: 0.01,
            k_max: 5,
            k0: 5,
            ln_m: (5f64).ln() + ln_binomial(100, 5),
        };
        let got = sample_bound(&params, &consts, 20.0).unwrap();
        let d3: f64 = 0.01 / 3.0;
        let factor = 1.0 - 1.0 / std::f64::consts::E.sqrt();
        let a = factor * (2.0 / d3).ln().sqrt();
        let b = factor * ((2.0 * 5.0 / d3).ln() + ln_binomial(100, 5)).sqrt();
        let expect = (2.0 * 0.4 * 100.0 * (a + b).powi(2) / (0.01 * 20.0)).ceil() as u64;
        assert_eq!(got, expect);
    }

    #[test]
    fn sample_bound_invariant_under_benefit_rescaling() {
        let consts = GraphConstants {
            gamma: vec![],
            big_gamma: 50.0,
            phi: 20.0,
            rho: 0.4,
        };
        let scaled = GraphConstants {
            gamma: vec![],
            big_gamma: 500.0,
            phi: 200.0,
            rho: 0.4,
        };
        let mut g = graph(&[(0, 1, 0.5)]);
        g.set_costs(vec![1.0, 1.0]).unwrap();
        let params = BoundParams::new(&g, 1.0, 0.2, 0.1).unwrap();
        assert_eq!(
            sample_bound(&params, &consts, 7.0).unwrap(),
            sample_bound(&params, &scaled, 70.0).unwrap()
        );
    }

    #[test]
    fn lower_bound_zero_penalty_limit() {
        let consts = GraphConstants {
            gamma: vec![],
            big_gamma: 10.0,
            phi: 4.0,
            rho: 0.4,
        };
        let s = stats(0.05, 0.4);
        // delta -> 1 means c = 0: no penalty.
        let fl = lower_bound(100, 1.0 - 1e-15, 3.0, &s, &consts);
        assert!((fl - 3.0).abs() < 1e-6);
        for delta in [0.01, 0.1, 0.5] {
            for t in [10usize, 100, 1000] {
                let fl = lower_bound(t, delta, 3.0, &s, &consts);
                assert!(fl <= 3.0 && fl >= 0.0);
            }
        }
    }

    #[test]
    fn lower_bound_monotone_in_pool_size() {
        let consts = GraphConstants {
            gamma: vec![],
            big_gamma: 10.0,
            phi: 4.0,
            rho: 0.4,
        };
        let s = stats(0.02, 0.4);
        let mut prev = 0.0;
        for t in [10usize, 30, 100, 300, 1000, 10_000] {
            let fl = lower_bound(t, 0.1, 3.0, &s, &consts);
            assert!(fl >= prev - 1e-12, "t={t}");
            prev = fl;
        }
    }

    #[test]
    fn upper_bound_floor_and_shrinking_slack() {
        let consts = GraphConstants {
            gamma: vec![],
            big_gamma: 10.0,
            phi: 4.0,
            rho: 0.4,
        };
        let s = stats(0.02, 0.4);
        let base = 3.0 / approx_ratio();
        let fu_inf = upper_bound(1000, 1.0 - 1e-15, 3.0, &s, &consts);
        assert!((fu_inf - base).abs() < 1e-6);
        let mut prev_slack = f64::INFINITY;
        for t in [10usize, 100, 1000, 10_000] {
            let fu = upper_bound(t, 0.1, 3.0, &s, &consts);
            assert!(fu >= base);
            let slack = fu - base;
            assert!(slack <= prev_slack + 1e-12);
            prev_slack = slack;
        }
    }

    #[test]
    fn tail_bounds_shrink_and_stay_in_unit_interval() {
        let s = stats(0.02, 0.4);
        let mu = 0.2;
        let mut prev = (1.0, 1.0);
        for lam in [0.5, 1.0, 2.0, 5.0, 20.0] {
            let (hi, lo) = concentration_tail(100, lam, mu, &s);
            assert!(hi > 0.0 && hi <= 1.0);
            assert!(lo > 0.0 && lo <= 1.0);
            assert!(hi <= prev.0 && lo <= prev.1);
            prev = (hi, lo);
        }
        let (hi, lo) = concentration_tail(100, 1e9, mu, &s);
        assert!(hi < 1e-100 && lo < 1e-100);
    }
}
