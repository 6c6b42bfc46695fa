//! Scheme-level properties checked over many seeded topologies.

use d2d_secrecy::algorithms::{baseline_greedy, baseline_random_rb, pac_d2d, pac_no_d2d, SolverOptions};
use d2d_secrecy::harness::topology_seed;
use d2d_secrecy::model::{sample_scenario, RandomStream, SystemConfig};

#[test]
fn random_rb_is_dominated_on_average_per_topology() {
    // For fixed channels, averaging the random baseline over many seeds
    // cannot beat the optimal assignment.
    let cfg = SystemConfig::default();
    for t in 0..5 {
        let s = sample_scenario(&cfg, topology_seed(11, t)).unwrap();
        let optimal = pac_no_d2d(&cfg, &s.channels).unwrap().sum_sr;
        let mean = (0..1000)
            .map(|seed| {
                let sol = baseline_random_rb(&cfg, &s.channels, &mut RandomStream::new(seed)).unwrap();
                assert!(sol.sum_sr <= optimal + 1e-12);
                sol.sum_sr
            })
            .sum::<f64>()
            / 1000.0;
        assert!(mean <= optimal);
    }
}

#[test]
fn greedy_without_d2d_never_beats_optimal_assignment() {
    let cfg = SystemConfig::default().with_num_d2d(0).unwrap();
    let opts = SolverOptions::default();
    for t in 0..1000 {
        let s = sample_scenario(&cfg, topology_seed(12, t)).unwrap();
        let greedy = baseline_greedy(&cfg, &s.channels, &opts).unwrap();
        let optimal = pac_no_d2d(&cfg, &s.channels).unwrap();
        assert!(greedy.sum_sr <= optimal.sum_sr + 1e-12, "topology {t}");
        assert!(greedy.d2d_of_cu.iter().all(Option::is_none));
    }
}

#[test]
fn every_solution_is_feasible_and_self_consistent() {
    let opts = SolverOptions::default();
    for (m, n) in [(6, 10), (6, 3), (2, 1), (4, 4)] {
        let cfg = SystemConfig::default().with_num_cus(m).unwrap().with_num_d2d(n).unwrap();
        for t in 0..50 {
            let s = sample_scenario(&cfg, topology_seed(13, t)).unwrap();
            for sol in [
                pac_d2d(&cfg, &s.channels, &opts).unwrap(),
                pac_no_d2d(&cfg, &s.channels).unwrap(),
                baseline_greedy(&cfg, &s.channels, &opts).unwrap(),
                baseline_random_rb(&cfg, &s.channels, &mut RandomStream::new(t as u64)).unwrap(),
            ] {
                sol.check_constraints(&cfg).unwrap();
                let again = sol.recompute_sum_sr(&cfg, &s.channels).unwrap();
                assert!((again - sol.sum_sr).abs() <= 1e-9, "{:?}: {again} vs {}", sol.scheme, sol.sum_sr);
                for (m, &p) in sol.cu_power.iter().enumerate() {
                    assert!(p == 0.0 || p == cfg.cu_power_cap[m]);
                }
            }
        }
    }
}

#[test]
fn pac_d2d_never_loses_to_the_jammer_free_solution() {
    let opts = SolverOptions::default();
    for dbm in [0.0, 20.0, 35.0] {
        let cfg = SystemConfig::default().with_power_dbm(dbm);
        for t in 0..200 {
            let s = sample_scenario(&cfg, topology_seed(14, t)).unwrap();
            let with = pac_d2d(&cfg, &s.channels, &opts).unwrap().sum_sr;
            let without = pac_no_d2d(&cfg, &s.channels).unwrap().sum_sr;
            assert!(with >= without - 1e-9, "{dbm} dBm topology {t}");
        }
    }
}
