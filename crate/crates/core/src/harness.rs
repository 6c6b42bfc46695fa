//! Monte Carlo driver and parameter sweeps.
//!
//! Topology `t` of a run draws its channels from a seed derived from
//! `(master_seed, t)` alone, so every scheme and every sweep value sees the
//! same fading and geometry for a given `t`. Sweeps therefore compare paired
//! samples, and the per-entity streams in [`crate::model`] keep the shared
//! part of a scenario identical when `M` or `N` grows.
//!
//! Topologies are evaluated through [`crate::exec::map_indices`] and reduced
//! in index order, so results do not depend on the execution mode.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::{pac_no_d2d, run_scheme, Scheme, SolverOptions};
use crate::error::{Error, Result};
use crate::exec::{map_indices, Execution};
use crate::model::{sample_scenario, RandomStream, SystemConfig};
use crate::power_control::optimize_pair;

const LABEL_TOPOLOGY_SEED: u64 = 100;
const LABEL_SCHEME_RNG: u64 = 101;
const LABEL_CONVERGENCE: u64 = 102;

/// Default power grid in dBm. The figure it mirrors does not list its
/// points; this is a chosen grid.
pub const DEFAULT_POWER_GRID_DBM: [f64; 8] = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0];
pub const DEFAULT_CU_GRID: [f64; 9] = [2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
pub const DEFAULT_D2D_GRID: [f64; 5] = [2.0, 4.0, 6.0, 8.0, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    PowerDbm,
    NumCus,
    NumD2d,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::PowerDbm => "power_dbm",
            SweepParam::NumCus => "num_cus",
            SweepParam::NumD2d => "num_d2d",
        }
    }

    pub fn default_values(self) -> Vec<f64> {
        match self {
            SweepParam::PowerDbm => DEFAULT_POWER_GRID_DBM.to_vec(),
            SweepParam::NumCus => DEFAULT_CU_GRID.to_vec(),
            SweepParam::NumD2d => DEFAULT_D2D_GRID.to_vec(),
        }
    }

    /// The configuration for one sweep value.
    pub fn apply(self, base: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let count = || {
            if value.fract() == 0.0 && value >= 0.0 && value <= u32::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(Error::InvalidConfig(format!(
                    "{} sweep value {value} is not a nonnegative integer",
                    self.name()
                )))
            }
        };
        let cfg = match self {
            SweepParam::PowerDbm if value.is_finite() => base.with_power_dbm(value),
            SweepParam::PowerDbm => {
                return Err(Error::InvalidConfig(format!("power sweep value {value} is not finite")))
            }
            SweepParam::NumCus => base.with_num_cus(count()?)?,
            SweepParam::NumD2d => base.with_num_d2d(count()?)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [SweepParam::PowerDbm, SweepParam::NumCus, SweepParam::NumD2d]
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| Error::Parse(format!("unknown sweep parameter '{s}'")))
    }
}

/// Sweep label and configuration of one cell of a run.
pub type SweepCell = (Option<(SweepParam, f64)>, SystemConfig);

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub base: SystemConfig,
    pub schemes: Vec<Scheme>,
    pub num_topologies: usize,
    pub master_seed: u64,
    pub sweep: Option<Sweep>,
    pub solver: SolverOptions,
}

impl RunSpec {
    pub fn new(base: SystemConfig, schemes: Vec<Scheme>, num_topologies: usize, master_seed: u64) -> Self {
        Self {
            base,
            schemes,
            num_topologies,
            master_seed,
            sweep: None,
            solver: SolverOptions::default(),
        }
    }

    pub fn with_sweep(mut self, param: SweepParam, values: Vec<f64>) -> Self {
        self.sweep = Some(Sweep { param, values });
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.solver.execution = execution;
        self
    }

    /// The `(sweep label, configuration)` of every sweep cell, validated.
    pub fn cells(&self) -> Result<Vec<SweepCell>> {
        if self.num_topologies == 0 {
            return Err(Error::InvalidConfig("num_topologies must be at least 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("at least one scheme is required".into()));
        }
        self.solver.iteration.validate()?;
        match &self.sweep {
            None => {
                self.base.validate()?;
                Ok(vec![(None, self.base.clone())])
            }
            Some(sweep) if sweep.values.is_empty() => {
                Err(Error::InvalidConfig("sweep has no values".into()))
            }
            Some(sweep) => sweep
                .values
                .iter()
                .map(|&v| Ok((Some((sweep.param, v)), sweep.param.apply(&self.base, v)?)))
                .collect(),
        }
    }
}

/// Seed of topology `t`; independent of the sweep value so that sweeps
/// compare paired samples.
pub fn topology_seed(master_seed: u64, t: usize) -> u64 {
    RandomStream::new(master_seed)
        .child(&[LABEL_TOPOLOGY_SEED, t as u64])
        .key()
}

/// Per-topology values of one scheme in one sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSamples {
    pub scheme: Scheme,
    pub sum_sr: Vec<f64>,
    pub mean_iterations: Vec<f64>,
}

/// Raw Monte Carlo output of one sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSamples {
    pub sweep: Option<(SweepParam, f64)>,
    pub schemes: Vec<SchemeSamples>,
    pub wall_time_s: f64,
}

/// Aggregated result of one scheme in one sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    /// Swept parameter name, or `none` for a single-configuration run.
    pub sweep_param: String,
    pub sweep_value: f64,
    pub scheme: String,
    pub mean_sum_sr: f64,
    pub std_err: f64,
    pub mean_iterations: f64,
    pub num_topologies: usize,
    pub master_seed: u64,
    pub wall_time_s: f64,
}

/// Sample mean and standard error of the mean, summed in index order.
pub fn mean_and_std_err(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Solves one topology with every scheme.
fn evaluate_topology(
    cfg: &SystemConfig,
    schemes: &[Scheme],
    seed: u64,
    solver: &SolverOptions,
) -> Result<Vec<(f64, f64)>> {
    let scenario = sample_scenario(cfg, seed)?;
    let scheme_rng = RandomStream::new(seed).child(&[LABEL_SCHEME_RNG]);
    schemes
        .iter()
        .map(|&scheme| {
            let mut rng = scheme_rng.clone();
            let sol = run_scheme(scheme, cfg, &scenario.channels, solver, &mut rng)?;
            Ok((sol.sum_sr, sol.mean_iterations()))
        })
        .collect()
}

/// Runs every sweep cell and keeps the per-topology values.
pub fn run_monte_carlo_detailed(spec: &RunSpec) -> Result<Vec<CellSamples>> {
    let cells = spec.cells()?;
    // Parallelism lives at the topology level; the pair table inside each
    // topology then runs sequentially.
    let inner = SolverOptions {
        execution: Execution::Sequential,
        ..spec.solver
    };
    cells
        .into_iter()
        .map(|(sweep, cfg)| {
            let start = Instant::now();
            let per_topology = map_indices(spec.num_topologies, spec.solver.execution, |t| {
                evaluate_topology(&cfg, &spec.schemes, topology_seed(spec.master_seed, t), &inner)
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
            let schemes = spec
                .schemes
                .iter()
                .enumerate()
                .map(|(i, &scheme)| SchemeSamples {
                    scheme,
                    sum_sr: per_topology.iter().map(|row| row[i].0).collect(),
                    mean_iterations: per_topology.iter().map(|row| row[i].1).collect(),
                })
                .collect();
            Ok(CellSamples {
                sweep,
                schemes,
                wall_time_s: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

/// Collapses per-topology values into one record per (cell, scheme).
pub fn aggregate(spec: &RunSpec, cells: &[CellSamples]) -> Vec<ResultRecord> {
    cells
        .iter()
        .flat_map(|cell| {
            cell.schemes.iter().map(move |s| {
                let (mean, se) = mean_and_std_err(&s.sum_sr);
                let (iters, _) = mean_and_std_err(&s.mean_iterations);
                ResultRecord {
                    sweep_param: cell.sweep.map_or("none", |(p, _)| p.name()).to_string(),
                    sweep_value: cell.sweep.map_or(0.0, |(_, v)| v),
                    scheme: s.scheme.name().to_string(),
                    mean_sum_sr: mean,
                    std_err: se,
                    mean_iterations: iters,
                    num_topologies: s.sum_sr.len(),
                    master_seed: spec.master_seed,
                    wall_time_s: cell.wall_time_s,
                }
            })
        })
        .collect()
}

pub fn run_monte_carlo(spec: &RunSpec) -> Result<Vec<ResultRecord>> {
    let cells = run_monte_carlo_detailed(spec)?;
    Ok(aggregate(spec, &cells))
}

/// Objective trace of one sampled CU–D2D pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTrace {
    pub sample: usize,
    pub topology: usize,
    pub cu: usize,
    pub d2d: usize,
    pub rb: usize,
    pub iterations: usize,
    /// Objective at the start point followed by its value after each
    /// iteration.
    pub values: Vec<f64>,
}

impl ConvergenceTrace {
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0] - slack)
    }
}

/// Runs the alternating optimization on `pair_samples` randomly drawn
/// (topology, CU, D2D pair) triples of the base configuration. Each CU is
/// placed on the RB the jammer-free assignment gives it.
pub fn sweep_convergence(spec: &RunSpec, pair_samples: usize) -> Result<Vec<ConvergenceTrace>> {
    let cfg = &spec.base;
    cfg.validate()?;
    spec.solver.iteration.validate()?;
    if cfg.num_d2d == 0 {
        return Err(Error::InvalidConfig("convergence traces need at least one D2D pair".into()));
    }
    if spec.num_topologies == 0 {
        return Err(Error::InvalidConfig("num_topologies must be at least 1".into()));
    }
    let sampler = RandomStream::new(spec.master_seed).child(&[LABEL_CONVERGENCE]);
    map_indices(pair_samples, spec.solver.execution, |s| {
        let mut rng = sampler.child(&[s as u64]);
        let topology = rng.random_range(0..spec.num_topologies);
        let cu = rng.random_range(0..cfg.num_cus);
        let d2d = rng.random_range(0..cfg.num_d2d);
        let scenario = sample_scenario(cfg, topology_seed(spec.master_seed, topology))?;
        let rb = pac_no_d2d(cfg, &scenario.channels)?.rb_of_cu[cu];
        let eval = optimize_pair(&scenario.channels, cu, d2d, rb, cfg, &spec.solver.iteration)?;
        Ok(ConvergenceTrace {
            sample: s,
            topology,
            cu,
            d2d,
            rb,
            iterations: eval.iterations,
            values: std::iter::once(eval.initial_chi_tilde).chain(eval.trace).collect(),
        })
    })
    .into_iter()
    .collect()
}

/// Median of the iteration counts.
pub fn median_iterations(traces: &[ConvergenceTrace]) -> f64 {
    let mut its: Vec<usize> = traces.iter().map(|t| t.iterations).collect();
    its.sort_unstable();
    match its.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => its[n / 2] as f64,
        n => (its[n / 2 - 1] + its[n / 2]) as f64 / 2.0,
    }
}
