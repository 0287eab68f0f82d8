#![allow(clippy::needless_range_loop)]

use contagion::engine::{run, Simulation, SimulationConfig};
use contagion::interventions::{
    detect_overall, diagnose_passive, trace_contacts, InterventionPolicy, Masks, OverallDetection,
    PassiveDiagnosis, Vaccination,
};
use contagion::io::{format_significant, parse_timeseries, render_summary, render_timeseries};
use contagion::model::{
    classify, generate, CommunitySpec, DiseaseProfile, HealthLedger, HealthState, NetworkSpec,
};
use contagion::seed::rng_from_seed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn flat(population: usize) -> NetworkSpec {
    NetworkSpec {
        population,
        ..NetworkSpec::default()
    }
}

/// Box-Muller normal truncated to positive values, drawn from an unrelated
/// generator.
fn truncated_normal_mean(mean: f64, sd: f64, samples: usize) -> f64 {
    let mut rng = ChaCha20Rng::seed_from_u64(0x5eed);
    let mut total = 0.0;
    let mut kept = 0;
    while kept < samples {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        let w = mean + sd * z;
        if w > 0.0 {
            total += w;
            kept += 1;
        }
    }
    total / samples as f64
}

#[test]
fn flat_network_degree_and_coefficient_statistics() {
    let spec = flat(1000);
    let m = generate(&spec, &DiseaseProfile::MODERATE, &mut rng_from_seed(11)).unwrap();
    let dense = m.to_dense();
    let mut degree_total = 0usize;
    let mut weights = Vec::new();
    for (i, row) in dense.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            if i != j && w > 0.0 {
                degree_total += 1;
                if j > i {
                    weights.push(w);
                }
            }
        }
    }
    let mean_degree = degree_total as f64 / 1000.0;
    assert!(
        (mean_degree - 4.0).abs() <= 0.3,
        "mean degree {mean_degree}"
    );

    let oracle = truncated_normal_mean(0.13, spec.exposure_coeff_std_dev(), 1_000_000);
    let observed = weights.iter().sum::<f64>() / weights.len() as f64;
    assert!(
        (observed - oracle).abs() <= 0.1 * oracle,
        "coefficient mean {observed} vs oracle {oracle}"
    );
}

#[test]
fn community_cross_edges_by_block_scan() {
    let spec = NetworkSpec {
        community: Some(CommunitySpec {
            community_size: 100,
            inter_community_links: 5,
        }),
        ..flat(200)
    };
    for seed in 0..5 {
        let m = generate(&spec, &DiseaseProfile::MODERATE, &mut rng_from_seed(seed)).unwrap();
        let dense = m.to_dense();
        let cross = (0..100)
            .flat_map(|i| (100..200).map(move |j| (i, j)))
            .filter(|&(i, j)| dense[i][j] != 0.0)
            .count();
        assert_eq!(cross, 5);
        for i in 100..200 {
            for j in 0..100 {
                assert_eq!(dense[i][j], dense[j][i]);
            }
        }
    }
}

#[test]
fn isolated_communities_stay_separate() {
    let config = SimulationConfig {
        network: NetworkSpec {
            community: Some(CommunitySpec {
                community_size: 50,
                inter_community_links: 0,
            }),
            contact_count_mean: 6.0,
            exposure_coeff_mean: 0.2,
            ..flat(200)
        },
        ..SimulationConfig::default()
    };
    for seed in 0..5 {
        let mut sim = Simulation::new(SimulationConfig {
            master_seed: seed,
            ..config.clone()
        })
        .unwrap();
        let zero = sim.exposure().iter().position(|&x| x > 0.0).unwrap();
        let block = zero / 50;
        while !sim.is_terminated() {
            sim.step().unwrap();
        }
        for i in 0..200 {
            if i / 50 != block {
                assert_eq!(sim.exposure()[i], 0.0);
                assert!(!sim.ledger().was_ever_infected(i));
            }
        }
    }
}

#[test]
fn tracing_matches_row_scan() {
    let m = generate(&flat(300), &DiseaseProfile::MODERATE, &mut rng_from_seed(5)).unwrap();
    let dense = m.to_dense();
    let mut ledger = HealthLedger::new(300);
    let mut x = vec![0.0; 300];
    for i in (0..300).step_by(7) {
        x[i] = 100.0;
    }
    classify(&x, &mut ledger, &DiseaseProfile::MODERATE, 1).unwrap();
    for i in 0..300 {
        let expected: Vec<usize> = (0..300)
            .filter(|&j| j != i && dense[i][j] > 0.0 && ledger.state(j) != HealthState::Dead)
            .collect();
        assert_eq!(trace_contacts(&m, &ledger, i).unwrap(), expected);
    }
    assert!(trace_contacts(&m, &ledger, 300).is_err());
}

#[test]
fn max_row_sum_matches_brute_scan() {
    for seed in 0..10 {
        let m = generate(
            &flat(150),
            &DiseaseProfile::GENERAL,
            &mut rng_from_seed(seed),
        )
        .unwrap();
        let brute = m
            .to_dense()
            .iter()
            .map(|row| row.iter().map(|w| w.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        assert!((m.max_row_sum() - brute).abs() <= 1e-12 * brute);
    }
}

fn all_infected(n: usize) -> HealthLedger {
    let mut l = HealthLedger::new(n);
    classify(&vec![1.0; n], &mut l, &DiseaseProfile::MODERATE, 0).unwrap();
    l
}

/// Count over `trials` draws stays within 5 binomial standard deviations.
fn check_binomial(counts: &[usize], n: usize, p: f64) {
    let trials = counts.len() as f64;
    let total: usize = counts.iter().sum();
    let expected = trials * n as f64 * p;
    let sd = (trials * n as f64 * p * (1.0 - p)).sqrt();
    assert!(
        (total as f64 - expected).abs() <= 5.0 * sd,
        "{total} vs {expected} ± {sd}"
    );
}

#[test]
fn diagnosis_counts_are_binomial() {
    let ledger = all_infected(500);
    for p in [0.1, 0.3, 0.9] {
        let policy = InterventionPolicy {
            passive_diagnosis: Some(PassiveDiagnosis { probability: p }),
            ..InterventionPolicy::default()
        };
        let counts: Vec<usize> = (0..200)
            .map(|s| diagnose_passive(&ledger, &policy, &mut rng_from_seed(s)).len())
            .collect();
        check_binomial(&counts, 500, p);
    }
}

#[test]
fn detection_counts_are_binomial_on_period() {
    let ledger = all_infected(500);
    let policy = InterventionPolicy {
        overall_detection: Some(OverallDetection {
            period: 5,
            recall: 0.8,
        }),
        ..InterventionPolicy::default()
    };
    let counts: Vec<usize> = (0..200)
        .map(|s| detect_overall(&ledger, 10, &policy, &mut rng_from_seed(s)).len())
        .collect();
    check_binomial(&counts, 500, 0.8);
    for round in [1, 4, 6, 9] {
        assert!(detect_overall(&ledger, round, &policy, &mut rng_from_seed(0)).is_empty());
    }
}

/// Plain dense re-implementation of one run without per-round interventions.
fn dense_reference(
    mut a: Vec<Vec<f64>>,
    mut x: Vec<f64>,
    disease: &DiseaseProfile,
    rounds: usize,
) -> Vec<(Vec<f64>, Vec<bool>)> {
    let n = x.len();
    let mut dead: Vec<bool> = x.iter().map(|&v| v >= disease.lethal_threshold).collect();
    let cut = |a: &mut Vec<Vec<f64>>, dead: &[bool]| {
        for i in 0..n {
            if dead[i] {
                for j in 0..n {
                    a[i][j] = 0.0;
                    a[j][i] = 0.0;
                }
            }
        }
    };
    cut(&mut a, &dead);
    let mut out = Vec::new();
    for _ in 0..rounds {
        let mut next = vec![0.0; n];
        for i in 0..n {
            if dead[i] {
                next[i] = x[i];
                continue;
            }
            next[i] = (0..n).map(|j| a[i][j] * x[j]).sum();
        }
        x = next;
        for i in 0..n {
            if x[i] >= disease.lethal_threshold {
                dead[i] = true;
            }
        }
        cut(&mut a, &dead);
        out.push((x.clone(), dead.clone()));
    }
    out
}

#[test]
fn engine_matches_dense_reference() {
    for seed in 0..200u64 {
        let n = 2 + (seed % 9) as usize;
        let config = SimulationConfig {
            disease: DiseaseProfile::new(0.3, 1.5, 0.9),
            network: NetworkSpec {
                contact_count_mean: (n - 1).min(3) as f64,
                exposure_coeff_mean: 0.6,
                ..flat(n)
            },
            policy: InterventionPolicy {
                masks: (seed % 3 == 0).then_some(Masks {
                    edge_factor: 0.9,
                    per_endpoint: false,
                }),
                vaccination: (seed % 4 == 0).then_some(Vaccination {
                    coverage: 0.5,
                    recover_factor: 0.5,
                }),
                ..InterventionPolicy::default()
            },
            patient_zero_count: 1 + (seed % 2) as usize,
            initial_exposure: 1.2,
            max_rounds: 5,
            master_seed: seed,
            ..SimulationConfig::default()
        };
        let mut sim = Simulation::new(config.clone()).unwrap();
        let reference = dense_reference(
            sim.contacts().to_dense(),
            sim.exposure().to_vec(),
            &config.disease,
            5,
        );
        for (x_ref, dead_ref) in reference {
            if sim.is_terminated() {
                break;
            }
            sim.step().unwrap();
            for i in 0..n {
                let x = sim.exposure()[i];
                assert!(
                    (x - x_ref[i]).abs() <= 1e-10 * x_ref[i].abs().max(1.0),
                    "seed {seed} individual {i}: {x} vs {}",
                    x_ref[i]
                );
                assert_eq!(
                    sim.ledger().is_dead(i),
                    dead_ref[i],
                    "seed {seed} individual {i}"
                );
            }
        }
    }
}

#[test]
fn timeseries_reparses_at_printed_precision() {
    let config = SimulationConfig {
        master_seed: 3,
        ..SimulationConfig::default()
    };
    let result = run(config).unwrap();
    let text = render_timeseries(&result.records);
    assert!(text.ends_with('\n') && !text.contains('\r'));
    let parsed = parse_timeseries(&text).unwrap();
    assert_eq!(parsed.len(), result.records.len());
    for (p, r) in parsed.iter().zip(&result.records) {
        assert_eq!(
            (
                p.round,
                p.susceptible,
                p.infected,
                p.recovered,
                p.dead,
                p.quarantined
            ),
            (
                r.round,
                r.susceptible,
                r.infected,
                r.recovered,
                r.dead,
                r.quarantined
            )
        );
        assert_eq!(p.cumulative_unique_infected, r.cumulative_unique_infected);
        assert_eq!(
            p.max_exposure,
            format_significant(r.max_exposure, 6)
                .parse::<f64>()
                .unwrap()
        );
        assert_eq!(
            p.total_exposure,
            format_significant(r.total_exposure, 6)
                .parse::<f64>()
                .unwrap()
        );
        assert_eq!(p.susceptible + p.infected + p.recovered + p.dead, 100);
    }
    assert_eq!(render_timeseries(&parsed), text);
}

#[test]
fn summaries_are_byte_identical_across_runs() {
    let config = SimulationConfig {
        master_seed: 8,
        ..SimulationConfig::default()
    };
    let a = render_summary(&run(config.clone()).unwrap().summary);
    let b = render_summary(&run(config).unwrap().summary);
    assert_eq!(a, b);
}
