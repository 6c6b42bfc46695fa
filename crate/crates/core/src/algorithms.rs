//! End-to-end allocation schemes.
//!
//! * [`pac_no_d2d`]: optimal RB assignment without D2D pairs (Hungarian over
//!   the per-RB secrecy rates), binary CU power.
//! * [`pac_d2d`]: keeps that RB assignment, optimizes every CU–D2D pair by
//!   alternating filter/jammer-power updates, then matches CUs to D2D pairs
//!   with the Hungarian algorithm on the zero-padded profit matrix.
//! * [`baseline_random_rb`]: uniformly random RB assignment, no D2D.
//! * [`baseline_greedy`]: CUs in index order each grab their best free RB and
//!   then their best free D2D pair. This mirrors the greedy RB assignment and
//!   CU–D2D matching structure of earlier single-antenna work, evaluated with
//!   the same multi-antenna rate machinery as the other schemes; it does not
//!   reproduce that work's single-antenna power formulas.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::assignment::{hungarian, pad_to_square, solve_matching, Assignment, Matrix};
use crate::error::{Error, Result};
use crate::exec::{map_indices, Execution};
use crate::model::{ChannelSet, SystemConfig};
use crate::power_control::{cu_power_rule, optimize_pair, IterationSettings, PairEvaluation};
use crate::rates::{link_rates, mmse_filter, phi_no_d2d, JammerChannels, LinkChannels, ReceiveFilter};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    PacD2d,
    PacNoD2d,
    RandomRb,
    Greedy,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::PacD2d, Scheme::PacNoD2d, Scheme::RandomRb, Scheme::Greedy];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::PacD2d => "pac_d2d",
            Scheme::PacNoD2d => "pac_no_d2d",
            Scheme::RandomRb => "random_rb",
            Scheme::Greedy => "greedy",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.name() == norm)
            .ok_or_else(|| Error::Parse(format!("unknown scheme '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverOptions {
    pub iteration: IterationSettings,
    /// How the CU x D2D pair table is evaluated.
    pub execution: Execution,
}

/// A complete allocation: RB assignment, CU–D2D matching, powers, filters and
/// the resulting secrecy rates.
#[derive(Debug, Clone, PartialEq)]
pub struct PacSolution {
    pub scheme: Scheme,
    pub rb_of_cu: Vec<usize>,
    pub d2d_of_cu: Vec<Option<usize>>,
    pub cu_power: Vec<f64>,
    pub d2d_power: Vec<f64>,
    pub filters: Vec<ReceiveFilter>,
    pub per_cu_sr: Vec<f64>,
    pub sum_sr: f64,
    /// Iteration counts of every pair optimization run by the scheme.
    pub pair_iterations: Vec<usize>,
}

impl PacSolution {
    pub fn mean_iterations(&self) -> f64 {
        if self.pair_iterations.is_empty() {
            0.0
        } else {
            self.pair_iterations.iter().sum::<usize>() as f64 / self.pair_iterations.len() as f64
        }
    }

    /// Structural check of every allocation constraint.
    pub fn check_constraints(&self, cfg: &SystemConfig) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        let m = cfg.num_cus;
        if self.rb_of_cu.len() != m
            || self.d2d_of_cu.len() != m
            || self.cu_power.len() != m
            || self.filters.len() != m
            || self.per_cu_sr.len() != m
            || self.d2d_power.len() != cfg.num_d2d
        {
            return fail("solution dimensions do not match the configuration".into());
        }
        let mut rb_used = vec![false; cfg.num_rbs];
        for &k in &self.rb_of_cu {
            if k >= cfg.num_rbs || std::mem::replace(&mut rb_used[k], true) {
                return fail(format!("RB {k} is out of range or assigned twice"));
            }
        }
        let mut d2d_used = vec![false; cfg.num_d2d];
        for &n in self.d2d_of_cu.iter().flatten() {
            if n >= cfg.num_d2d || std::mem::replace(&mut d2d_used[n], true) {
                return fail(format!("D2D pair {n} is out of range or matched twice"));
            }
        }
        for (i, &p) in self.cu_power.iter().enumerate() {
            if p != 0.0 && p != cfg.cu_power_cap[i] {
                return fail(format!("CU {i} power {p} is neither 0 nor its cap"));
            }
        }
        for (n, &q) in self.d2d_power.iter().enumerate() {
            if !(0.0..=cfg.d2d_power_cap[n]).contains(&q) || (!d2d_used[n] && q != 0.0) {
                return fail(format!("D2D pair {n} power {q} is infeasible"));
            }
        }
        if self.filters.iter().any(|w| w.len() != cfg.bs_antennas) {
            return fail("filter length differs from the BS antenna count".into());
        }
        if self.per_cu_sr.iter().any(|&r| !(r >= 0.0)) {
            return fail("negative per-CU secrecy rate".into());
        }
        let total: f64 = self.per_cu_sr.iter().sum();
        if (total - self.sum_sr).abs() > 1e-12 * total.abs().max(1.0) {
            return fail("sum_sr differs from the per-CU total".into());
        }
        Ok(())
    }

    /// Re-evaluates every CU's secrecy rate from the stored filters and powers
    /// and returns the sum.
    pub fn recompute_sum_sr(&self, cfg: &SystemConfig, chans: &ChannelSet) -> Result<f64> {
        (0..cfg.num_cus)
            .map(|m| {
                let k = self.rb_of_cu[m];
                let jammer = self.d2d_of_cu[m].map(|n| JammerChannels {
                    h_nb: chans.h_nb(n, k),
                    h_ne: chans.h_ne(n, k),
                });
                let q = self.d2d_of_cu[m].map_or(0.0, |n| self.d2d_power[n]);
                let link = LinkChannels::new(chans.g_mb(m, k), chans.g_me(m, k), jammer)?;
                let rates = link_rates(
                    &self.filters[m],
                    &link,
                    self.cu_power[m],
                    q,
                    cfg.noise_power,
                    cfg.bandwidth,
                    cfg.num_rbs,
                )?;
                Ok(rates.secrecy_rate)
            })
            .sum()
    }
}

fn check_inputs(cfg: &SystemConfig, chans: &ChannelSet) -> Result<()> {
    cfg.validate()?;
    if chans.num_cus() != cfg.num_cus
        || chans.num_d2d() != cfg.num_d2d
        || chans.num_rbs() != cfg.num_rbs
        || chans.bs_antennas() != cfg.bs_antennas
        || chans.eve_antennas() != cfg.eve_antennas
    {
        return Err(Error::InvalidConfig(
            "channel set dimensions do not match the configuration".into(),
        ));
    }
    Ok(())
}

/// Jammer-free secrecy rate of every CU on every RB (`M x K`).
pub fn phi_table(cfg: &SystemConfig, chans: &ChannelSet) -> Matrix {
    Matrix::from_fn(cfg.num_cus, cfg.num_rbs, |m, k| {
        phi_no_d2d(
            chans.g_mb(m, k),
            chans.g_me(m, k),
            cfg.cu_power_cap[m],
            cfg.noise_power,
            cfg.bandwidth,
            cfg.num_rbs,
        )
    })
}

/// Optimal RB assignment for the jammer-free rates; `total` is the negated
/// Hungarian cost, i.e. the summed rate.
pub fn rb_assignment(cfg: &SystemConfig, chans: &ChannelSet) -> Result<Assignment> {
    check_inputs(cfg, chans)?;
    let phi = phi_table(cfg, chans);
    let mut a = hungarian(&pad_to_square(&phi))?;
    a.total = -a.total;
    Ok(a)
}

/// Operating point of one CU before the power rule is applied.
struct CuPlan {
    rb: usize,
    d2d: Option<usize>,
    q: f64,
    filter: ReceiveFilter,
    /// Secrecy rate the CU gets if it transmits.
    rate_if_active: f64,
}

fn jammer_free_plan(cfg: &SystemConfig, chans: &ChannelSet, phi: &Matrix, m: usize, k: usize) -> Result<CuPlan> {
    Ok(CuPlan {
        rb: k,
        d2d: None,
        q: 0.0,
        filter: mmse_filter(chans.g_mb(m, k), None, cfg.cu_power_cap[m], 0.0, cfg.noise_power)?,
        rate_if_active: phi.get(m, k),
    })
}

fn paired_plan(eval: PairEvaluation) -> CuPlan {
    CuPlan {
        rb: eval.rb,
        d2d: Some(eval.d2d),
        q: eval.q,
        filter: eval.filter,
        rate_if_active: eval.psi,
    }
}

/// Applies the binary power rule to every CU and assembles the solution.
fn finalize(
    cfg: &SystemConfig,
    chans: &ChannelSet,
    scheme: Scheme,
    plans: Vec<CuPlan>,
    pair_iterations: Vec<usize>,
) -> Result<PacSolution> {
    let mut sol = PacSolution {
        scheme,
        rb_of_cu: Vec::with_capacity(plans.len()),
        d2d_of_cu: Vec::with_capacity(plans.len()),
        cu_power: Vec::with_capacity(plans.len()),
        d2d_power: vec![0.0; cfg.num_d2d],
        filters: Vec::with_capacity(plans.len()),
        per_cu_sr: Vec::with_capacity(plans.len()),
        sum_sr: 0.0,
        pair_iterations,
    };
    for (m, plan) in plans.into_iter().enumerate() {
        let jammer = plan.d2d.map(|n| JammerChannels {
            h_nb: chans.h_nb(n, plan.rb),
            h_ne: chans.h_ne(n, plan.rb),
        });
        let link = LinkChannels::new(chans.g_mb(m, plan.rb), chans.g_me(m, plan.rb), jammer)?;
        let p = cu_power_rule(&plan.filter, &link, plan.q, cfg.noise_power, cfg.cu_power_cap[m])?;
        if let Some(n) = plan.d2d {
            sol.d2d_power[n] = plan.q;
        }
        sol.rb_of_cu.push(plan.rb);
        sol.d2d_of_cu.push(plan.d2d);
        sol.cu_power.push(p);
        sol.filters.push(plan.filter);
        sol.per_cu_sr.push(if p > 0.0 { plan.rate_if_active } else { 0.0 });
    }
    sol.sum_sr = sol.per_cu_sr.iter().sum();
    Ok(sol)
}

fn jammer_free_solution(
    cfg: &SystemConfig,
    chans: &ChannelSet,
    scheme: Scheme,
    rb_of_cu: &[usize],
) -> Result<PacSolution> {
    let phi = phi_table(cfg, chans);
    let plans = rb_of_cu
        .iter()
        .enumerate()
        .map(|(m, &k)| jammer_free_plan(cfg, chans, &phi, m, k))
        .collect::<Result<Vec<_>>>()?;
    finalize(cfg, chans, scheme, plans, Vec::new())
}

/// Optimal power and RB allocation without D2D pairs.
pub fn pac_no_d2d(cfg: &SystemConfig, chans: &ChannelSet) -> Result<PacSolution> {
    let assignment = rb_assignment(cfg, chans)?;
    let rb_of_cu: Vec<usize> = assignment
        .row_to_col
        .iter()
        .map(|c| c.expect("square assignment is perfect"))
        .collect();
    jammer_free_solution(cfg, chans, Scheme::PacNoD2d, &rb_of_cu)
}

/// Pair evaluations for every CU (on its RB from `rb_of_cu`) and every D2D
/// pair, returned as the `M x N` profit matrix of `psi` values plus the
/// evaluations in row-major order.
pub fn psi_table(
    cfg: &SystemConfig,
    chans: &ChannelSet,
    rb_of_cu: &[usize],
    opts: &SolverOptions,
) -> Result<(Matrix, Vec<PairEvaluation>)> {
    let (m_count, n_count) = (cfg.num_cus, cfg.num_d2d);
    let evals = map_indices(m_count * n_count, opts.execution, |idx| {
        let (m, n) = (idx / n_count, idx % n_count);
        optimize_pair(chans, m, n, rb_of_cu[m], cfg, &opts.iteration)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let psi = Matrix::from_fn(m_count, n_count, |m, n| evals[m * n_count + n].psi);
    Ok((psi, evals))
}

/// RB assignment from [`pac_no_d2d`], then jammer optimization and optimal
/// CU–D2D matching. With `N = 0` this is [`pac_no_d2d`].
pub fn pac_d2d(cfg: &SystemConfig, chans: &ChannelSet, opts: &SolverOptions) -> Result<PacSolution> {
    let base = pac_no_d2d(cfg, chans)?;
    if cfg.num_d2d == 0 {
        return Ok(PacSolution {
            scheme: Scheme::PacD2d,
            ..base
        });
    }
    let (psi, evals) = psi_table(cfg, chans, &base.rb_of_cu, opts)?;
    let matching = solve_matching(&psi)?;
    let pair_iterations = evals.iter().map(|e| e.iterations).collect();

    let phi = phi_table(cfg, chans);
    let n_count = cfg.num_d2d;
    let mut evals: Vec<Option<PairEvaluation>> = evals.into_iter().map(Some).collect();
    let plans = (0..cfg.num_cus)
        .map(|m| match matching.row_to_col[m] {
            Some(n) => Ok(paired_plan(evals[m * n_count + n].take().expect("used once"))),
            None => jammer_free_plan(cfg, chans, &phi, m, base.rb_of_cu[m]),
        })
        .collect::<Result<Vec<_>>>()?;
    finalize(cfg, chans, Scheme::PacD2d, plans, pair_iterations)
}

/// Uniformly random RB assignment without D2D pairs.
pub fn baseline_random_rb(cfg: &SystemConfig, chans: &ChannelSet, rng: &mut impl Rng) -> Result<PacSolution> {
    check_inputs(cfg, chans)?;
    let mut rb_of_cu: Vec<usize> = (0..cfg.num_rbs).collect();
    rb_of_cu.shuffle(rng);
    jammer_free_solution(cfg, chans, Scheme::RandomRb, &rb_of_cu)
}

/// Greedy RB assignment and CU–D2D matching in CU index order.
pub fn baseline_greedy(cfg: &SystemConfig, chans: &ChannelSet, opts: &SolverOptions) -> Result<PacSolution> {
    check_inputs(cfg, chans)?;
    let phi = phi_table(cfg, chans);
    let mut rb_free = vec![true; cfg.num_rbs];
    let mut d2d_free = vec![true; cfg.num_d2d];
    let mut plans = Vec::with_capacity(cfg.num_cus);
    let mut pair_iterations = Vec::new();

    for m in 0..cfg.num_cus {
        let k = (0..cfg.num_rbs)
            .filter(|&k| rb_free[k])
            .fold(None, |best: Option<usize>, k| match best {
                Some(b) if phi.get(m, b) >= phi.get(m, k) => Some(b),
                _ => Some(k),
            })
            .expect("K = M leaves a free RB for every CU");
        rb_free[k] = false;

        let candidates: Vec<usize> = (0..cfg.num_d2d).filter(|&n| d2d_free[n]).collect();
        let evals = map_indices(candidates.len(), opts.execution, |i| {
            optimize_pair(chans, m, candidates[i], k, cfg, &opts.iteration)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        pair_iterations.extend(evals.iter().map(|e| e.iterations));

        let best = evals.into_iter().fold(None, |best: Option<PairEvaluation>, e| match best {
            Some(b) if b.psi >= e.psi => Some(b),
            _ => Some(e),
        });
        match best {
            Some(e) if e.psi > phi.get(m, k) => {
                d2d_free[e.d2d] = false;
                plans.push(paired_plan(e));
            }
            _ => plans.push(jammer_free_plan(cfg, chans, &phi, m, k)?),
        }
    }
    finalize(cfg, chans, Scheme::Greedy, plans, pair_iterations)
}

/// Runs one scheme. `rng` is only consumed by [`Scheme::RandomRb`].
pub fn run_scheme(
    scheme: Scheme,
    cfg: &SystemConfig,
    chans: &ChannelSet,
    opts: &SolverOptions,
    rng: &mut impl Rng,
) -> Result<PacSolution> {
    match scheme {
        Scheme::PacD2d => pac_d2d(cfg, chans, opts),
        Scheme::PacNoD2d => pac_no_d2d(cfg, chans),
        Scheme::RandomRb => baseline_random_rb(cfg, chans, rng),
        Scheme::Greedy => baseline_greedy(cfg, chans, opts),
    }
}
