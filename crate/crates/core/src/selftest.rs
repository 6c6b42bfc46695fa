//! Oracle suites runnable from the command line (`secrecy-sim selftest`).
//!
//! Each suite checks a solver against an independent reference on a few
//! hundred seeded random instances: exhaustive search for the assignment
//! solvers, a dense grid for the jammer power, and closed-form identities
//! for the receiver and the power rule.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::algebra::{sq_norm, ComplexVector};
use crate::algorithms::{phi_table, rb_assignment};
use crate::assignment::{hungarian, Matrix};
use crate::model::{sample_scenario, RandomStream, SystemConfig};
use crate::power_control::{cu_power_rule, optimal_jammer_power, JammerConstants};
use crate::rates::{mmse_filter, mmse_of_link, sinr_bs, LinkChannels};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Worst observed deviation, in the suite's own unit.
    pub worst: f64,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn cn_vector(rng: &mut impl Rng, len: usize, scale: f64) -> ComplexVector {
    let s = (scale / 2.0).sqrt();
    ComplexVector::new(
        (0..len)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(s * re, s * im)
            })
            .collect(),
    )
}

fn min_over_permutations(cost: &Matrix) -> f64 {
    fn go(c: &Matrix, row: usize, used: &mut [bool], acc: f64, best: &mut f64) {
        if row == c.rows() {
            *best = best.min(acc);
            return;
        }
        for col in 0..c.cols() {
            if !used[col] {
                used[col] = true;
                go(c, row + 1, used, acc + c.get(row, col), best);
                used[col] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(cost, 0, &mut vec![false; cost.cols()], 0.0, &mut best);
    best
}

fn suite_hungarian(rng: &mut RandomStream, cases: usize) -> SuiteOutcome {
    let mut out = SuiteOutcome { name: "hungarian_vs_exhaustive", cases, failures: 0, worst: 0.0 };
    for _ in 0..cases {
        let n = rng.random_range(1..=6);
        let cost = Matrix::from_fn(n, n, |_, _| rng.random_range(-10.0..10.0));
        let got = hungarian(&cost).map(|a| a.total).unwrap_or(f64::NAN);
        let dev = (got - min_over_permutations(&cost)).abs();
        out.worst = out.worst.max(dev);
        if !(dev <= 1e-9) {
            out.failures += 1;
        }
    }
    out
}

fn suite_jammer_grid(rng: &mut RandomStream, cases: usize) -> SuiteOutcome {
    let mut out = SuiteOutcome { name: "jammer_power_vs_grid", cases, failures: 0, worst: 0.0 };
    let mut log_uniform = |lo: f64, hi: f64| 10f64.powf(rng.random_range(lo..hi));
    for _ in 0..cases {
        let c = JammerConstants {
            eps: log_uniform(-2.0, 0.0),
            delta: log_uniform(-2.0, 1.0),
            vareps: log_uniform(-1.0, 3.0),
            zeta: log_uniform(-2.0, 1.0),
            kappa: log_uniform(-2.0, 1.0),
        };
        let q_cap = log_uniform(-1.0, 1.0);
        let Ok(sol) = optimal_jammer_power(&c, q_cap) else {
            out.failures += 1;
            continue;
        };
        let grid_best = (0..=10_000)
            .map(|i| c.chi_tilde(q_cap * i as f64 / 10_000.0))
            .fold(f64::NEG_INFINITY, f64::max);
        let shortfall = (grid_best - c.chi_tilde(sol.q_star)).max(0.0);
        out.worst = out.worst.max(shortfall);
        if shortfall > 1e-6 || !(0.0..=q_cap).contains(&sol.q_star) {
            out.failures += 1;
        }
    }
    out
}

fn suite_mmse_identity(rng: &mut RandomStream, cases: usize) -> SuiteOutcome {
    let mut out = SuiteOutcome { name: "mmse_sinr_identity", cases, failures: 0, worst: 0.0 };
    for i in 0..cases {
        let b = [1, 2, 4, 8][i % 4];
        let g = cn_vector(rng, b, 1.0);
        let h = cn_vector(rng, b, 1.0);
        let (p, q, n0) = (rng.random_range(0.1..10.0), rng.random_range(0.0..10.0), rng.random_range(0.01..1.0));
        let dev = mmse_filter(&g, Some(&h), p, q, n0)
            .and_then(|w| Ok(mmse_of_link(&w, &g, Some(&h), p, q, n0) * (1.0 + sinr_bs(&w, &g, Some(&h), p, q, n0)?)))
            .map_or(f64::INFINITY, |v| (v - 1.0).abs());
        out.worst = out.worst.max(dev);
        if !(dev <= 1e-9) {
            out.failures += 1;
        }
    }
    out
}

fn suite_power_rule(rng: &mut RandomStream, cases: usize) -> SuiteOutcome {
    let mut out = SuiteOutcome { name: "cu_power_rule_sign", cases, failures: 0, worst: 0.0 };
    for _ in 0..cases {
        let g_mb = cn_vector(rng, 4, 1.0);
        let g_me = cn_vector(rng, 4, 1.0);
        let n0 = 0.1;
        let ok = LinkChannels::new(&g_mb, &g_me, None).and_then(|link| {
            let w = mmse_filter(&g_mb, None, 1.0, 0.0, n0)?;
            cu_power_rule(&w, &link, 0.0, n0, 1.0)
        });
        let expected = if sq_norm(&g_mb) > sq_norm(&g_me) { 1.0 } else { 0.0 };
        if ok.ok() != Some(expected) {
            out.failures += 1;
        }
    }
    out
}

fn suite_rb_assignment(rng: &mut RandomStream, cases: usize) -> SuiteOutcome {
    let mut out = SuiteOutcome { name: "rb_assignment_vs_exhaustive", cases, failures: 0, worst: 0.0 };
    for _ in 0..cases {
        let m = rng.random_range(1..=5);
        let cfg = match SystemConfig::default().with_num_cus(m) {
            Ok(c) => c,
            Err(_) => {
                out.failures += 1;
                continue;
            }
        };
        let dev = sample_scenario(&cfg, rng.random()).and_then(|s| {
            let phi = phi_table(&cfg, &s.channels);
            let neg = Matrix::from_fn(m, m, |r, c| -phi.get(r, c));
            Ok((rb_assignment(&cfg, &s.channels)?.total + min_over_permutations(&neg)).abs())
        });
        let dev = dev.unwrap_or(f64::INFINITY);
        out.worst = out.worst.max(dev);
        if !(dev <= 1e-9) {
            out.failures += 1;
        }
    }
    out
}

/// Runs every suite with `cases` instances each.
pub fn run_all(seed: u64, cases: usize) -> Vec<SuiteOutcome> {
    let root = RandomStream::new(seed);
    vec![
        suite_hungarian(&mut root.child(&[1]), cases),
        suite_jammer_grid(&mut root.child(&[2]), cases),
        suite_mmse_identity(&mut root.child(&[3]), cases),
        suite_power_rule(&mut root.child(&[4]), cases),
        suite_rb_assignment(&mut root.child(&[5]), cases.div_ceil(4)),
    ]
}
