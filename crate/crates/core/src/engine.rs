//! A single simulation run.
//!
//! Each round runs a fixed pipeline:
//!
//! 1. propagate exposure through the current matrix;
//! 2. classify and update the ledger;
//! 3. cut newly dead individuals out of the matrix;
//! 4. passive diagnosis;
//! 5. overall detection, on scheduled rounds;
//! 6. trace close contacts of the newly found (green code);
//! 7. quarantine everyone found or traced;
//! 8. release whoever is due;
//! 9. emit a [`RoundRecord`].

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::interventions::{self, InterventionPolicy, QuarantineReason, QuarantineRegistry};
use crate::model::{
    self, classify, ContactMatrix, DiseaseProfile, HealthLedger, HealthState, NetworkSpec,
};
use crate::seed::{rng_from_seed, SimRng};
use crate::{Error, Result};

/// Fraction of the population that must be infected for a run to count as
/// an outbreak (strictly exceeded).
pub const OUTBREAK_FRACTION: f64 = 0.7;

/// Default extinction level relative to the pathogenic threshold.
pub const DEFAULT_EXTINCTION_RATIO: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub disease: DiseaseProfile,
    pub network: NetworkSpec,
    pub policy: InterventionPolicy,
    pub patient_zero_count: usize,
    pub initial_exposure: f64,
    pub max_rounds: u32,
    /// Living exposure below which an infection-free run is extinct.
    /// `None` means the pathogenic threshold times
    /// [`DEFAULT_EXTINCTION_RATIO`].
    pub extinction_epsilon: Option<f64>,
    pub master_seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            disease: DiseaseProfile::default(),
            network: NetworkSpec::default(),
            policy: InterventionPolicy::default(),
            patient_zero_count: 1,
            initial_exposure: 1.0,
            max_rounds: 1000,
            extinction_epsilon: None,
            master_seed: 0,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        self.disease.validate("disease.")?;
        self.network.validate("network.")?;
        self.policy.validate("policy.")?;
        if self.patient_zero_count == 0 || self.patient_zero_count > self.network.population {
            return Err(Error::parameter(
                "patient_zero_count",
                "must lie between 1 and the population",
            ));
        }
        if !(self.initial_exposure > 0.0 && self.initial_exposure.is_finite()) {
            return Err(Error::parameter("initial_exposure", "must be positive"));
        }
        if self.max_rounds == 0 {
            return Err(Error::parameter("max_rounds", "must be at least 1"));
        }
        if let Some(eps) = self.extinction_epsilon {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::parameter("extinction_epsilon", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn extinction_level(&self) -> f64 {
        self.extinction_epsilon
            .unwrap_or(self.disease.pathogenic_threshold * DEFAULT_EXTINCTION_RATIO)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u32,
    pub susceptible: usize,
    pub infected: usize,
    pub recovered: usize,
    pub dead: usize,
    pub quarantined: usize,
    pub cumulative_unique_infected: usize,
    /// Largest exposure among the living.
    pub max_exposure: f64,
    /// Total exposure of the living.
    pub total_exposure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub population: usize,
    pub infected: usize,
    pub dead: usize,
    pub infection_rate: f64,
    pub death_rate: f64,
    pub rounds_elapsed: u32,
    pub outbreak: bool,
    pub peak_infected: usize,
    pub seed: u64,
}

pub fn is_outbreak(summary: &RunSummary) -> bool {
    summary.infection_rate > OUTBREAK_FRACTION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    /// State after initialization, before the first round.
    pub initial: RoundRecord,
    pub records: Vec<RoundRecord>,
    pub summary: RunSummary,
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimulationConfig,
    rng: SimRng,
    contacts: ContactMatrix,
    effective: ContactMatrix,
    exposure: Vec<f64>,
    ledger: HealthLedger,
    registry: QuarantineRegistry,
    round: u32,
    peak_infected: usize,
    terminated: bool,
}

impl Simulation {
    /// Generates the network, applies the one-time interventions (masks, then
    /// vaccination, then asymptomatic designation) and seeds patient zero.
    pub fn new(config: SimulationConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = rng_from_seed(config.master_seed);
        let n = config.network.population;
        let mut matrix = model::generate(&config.network, &config.disease, &mut rng)?;
        let mut ledger = HealthLedger::new(n);

        interventions::apply_masks(&mut matrix, &config.policy);
        interventions::apply_vaccination(&mut matrix, &mut ledger, &config.policy, &mut rng);
        interventions::assign_asymptomatic(
            &mut ledger,
            config.policy.asymptomatic_fraction,
            &mut rng,
        );

        let mut exposure = vec![0.0; n];
        for i in index::sample(&mut rng, n, config.patient_zero_count) {
            exposure[i] = config.initial_exposure;
        }

        let contacts = matrix.clone();
        let transitions = classify(&exposure, &mut ledger, &config.disease, 0)?;
        interventions::remove_dead(&mut matrix, &transitions.newly_dead);
        let peak_infected = ledger.count(HealthState::Infected);

        Ok(Self {
            config,
            rng,
            contacts,
            effective: matrix,
            exposure,
            ledger,
            registry: QuarantineRegistry::new(),
            round: 0,
            peak_infected,
            terminated: false,
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.config
    }

    /// Contact structure after the one-time interventions, before any
    /// quarantine or death. Used for contact tracing.
    pub fn contacts(&self) -> &ContactMatrix {
        &self.contacts
    }

    pub fn matrix(&self) -> &ContactMatrix {
        &self.effective
    }

    pub fn exposure(&self) -> &[f64] {
        &self.exposure
    }

    pub fn ledger(&self) -> &HealthLedger {
        &self.ledger
    }

    pub fn registry(&self) -> &QuarantineRegistry {
        &self.registry
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    pub fn record(&self) -> RoundRecord {
        let living = || {
            self.exposure
                .iter()
                .zip(self.ledger.states())
                .filter(|(_, &s)| s != HealthState::Dead)
                .map(|(&x, _)| x)
        };
        RoundRecord {
            round: self.round,
            susceptible: self.ledger.count(HealthState::Susceptible),
            infected: self.ledger.count(HealthState::Infected),
            recovered: self.ledger.count(HealthState::Recovered),
            dead: self.ledger.count(HealthState::Dead),
            quarantined: self.ledger.quarantined_count(),
            cumulative_unique_infected: self.ledger.cumulative_unique_infected(),
            max_exposure: living().fold(0.0, f64::max),
            total_exposure: living().sum(),
        }
    }

    pub fn step(&mut self) -> Result<RoundRecord> {
        if self.terminated {
            return Err(Error::Terminated);
        }
        self.round += 1;
        let round = self.round;
        let policy = &self.config.policy;

        let mut x = self.effective.propagate(&self.exposure)?;
        self.ledger.freeze_dead(&mut x);
        self.exposure = x;

        let transitions = classify(
            &self.exposure,
            &mut self.ledger,
            &self.config.disease,
            round,
        )?;
        interventions::remove_dead(&mut self.effective, &transitions.newly_dead);

        let diagnosed = interventions::diagnose_passive(&self.ledger, policy, &mut self.rng);
        let detected = interventions::detect_overall(&self.ledger, round, policy, &mut self.rng);

        let mut found: Vec<usize> = diagnosed.iter().chain(&detected).copied().collect();
        found.sort_unstable();
        found.dedup();

        let mut traced = Vec::new();
        if policy.green_code {
            let sources = if policy.trace_detected {
                &found
            } else {
                &diagnosed
            };
            for &i in sources {
                traced.extend(interventions::trace_contacts(
                    &self.contacts,
                    &self.ledger,
                    i,
                )?);
            }
            traced.sort_unstable();
            traced.dedup();
            traced.retain(|j| found.binary_search(j).is_err() && !self.ledger.is_quarantined(*j));
        }

        interventions::quarantine(
            &mut self.effective,
            &mut self.registry,
            &mut self.ledger,
            &found,
            QuarantineReason::Diagnosed,
            round,
        );
        interventions::quarantine(
            &mut self.effective,
            &mut self.registry,
            &mut self.ledger,
            &traced,
            QuarantineReason::Traced,
            round,
        );
        interventions::release(
            &mut self.effective,
            &mut self.registry,
            &mut self.ledger,
            round,
            policy.release_rules(),
        );

        self.ledger.set_rounds_elapsed(round);
        let record = self.record();
        self.peak_infected = self.peak_infected.max(record.infected);
        if (record.infected == 0 && record.max_exposure < self.config.extinction_level())
            || round >= self.config.max_rounds
        {
            self.terminated = true;
        }
        Ok(record)
    }

    pub fn summary(&self) -> RunSummary {
        let n = self.ledger.population();
        let infected = self.ledger.cumulative_unique_infected();
        let dead = self.ledger.count(HealthState::Dead);
        let infection_rate = infected as f64 / n as f64;
        let mut summary = RunSummary {
            population: n,
            infected,
            dead,
            infection_rate,
            death_rate: dead as f64 / n as f64,
            rounds_elapsed: self.round,
            outbreak: false,
            peak_infected: self.peak_infected,
            seed: self.config.master_seed,
        };
        summary.outbreak = is_outbreak(&summary);
        summary
    }
}

pub fn init_run(config: SimulationConfig) -> Result<Simulation> {
    Simulation::new(config)
}

pub fn step_round(state: &mut Simulation) -> Result<RoundRecord> {
    state.step()
}

/// Steps until extinction or `max_rounds`.
pub fn run(config: SimulationConfig) -> Result<RunResult> {
    let mut sim = Simulation::new(config)?;
    let initial = sim.record();
    let mut records = Vec::new();
    while !sim.is_terminated() {
        records.push(sim.step()?);
    }
    Ok(RunResult {
        initial,
        records,
        summary: sim.summary(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interventions::PassiveDiagnosis;

    fn summary_with_rate(rate: f64) -> RunSummary {
        RunSummary {
            population: 100,
            infected: (rate * 100.0) as usize,
            dead: 0,
            infection_rate: rate,
            death_rate: 0.0,
            rounds_elapsed: 1,
            outbreak: false,
            peak_infected: 0,
            seed: 0,
        }
    }

    #[test]
    fn outbreak_is_strict() {
        assert!(is_outbreak(&summary_with_rate(0.71)));
        assert!(!is_outbreak(&summary_with_rate(0.70)));
        assert!(!is_outbreak(&summary_with_rate(0.0)));
    }

    #[test]
    fn patient_zero_is_infected() {
        let sim = Simulation::new(SimulationConfig::default()).unwrap();
        let r = sim.record();
        assert_eq!(r.infected, 1);
        assert_eq!(r.cumulative_unique_infected, 1);
        assert_eq!(r.susceptible, 99);
    }

    #[test]
    fn lethal_initial_exposure() {
        let config = SimulationConfig {
            initial_exposure: 10.0,
            ..Default::default()
        };
        let sim = Simulation::new(config.clone()).unwrap();
        assert_eq!(sim.record().dead, 1);
        let result = run(config).unwrap();
        assert_eq!(result.summary.infected, 1);
        assert_eq!(result.summary.dead, 1);
        assert_eq!(result.records.len(), 1);
    }

    #[test]
    fn same_seed_same_initial_state() {
        let a = Simulation::new(SimulationConfig::default()).unwrap();
        let b = Simulation::new(SimulationConfig::default()).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        assert_eq!(a.ledger(), b.ledger());
        let bits = |s: &Simulation| s.exposure().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn one_round_limit() {
        let config = SimulationConfig {
            max_rounds: 1,
            ..Default::default()
        };
        assert_eq!(run(config).unwrap().records.len(), 1);
    }

    #[test]
    fn zero_rounds_rejected() {
        let config = SimulationConfig {
            max_rounds: 0,
            ..Default::default()
        };
        assert!(
            matches!(run(config), Err(Error::Parameter { field, .. }) if field == "max_rounds")
        );
    }

    #[test]
    fn stepping_after_termination_fails() {
        let mut sim = Simulation::new(SimulationConfig {
            max_rounds: 1,
            ..Default::default()
        })
        .unwrap();
        sim.step().unwrap();
        assert!(matches!(sim.step(), Err(Error::Terminated)));
    }

    #[test]
    fn no_contacts_no_spread() {
        let config = SimulationConfig {
            network: NetworkSpec {
                contact_count_mean: 0.0,
                ..Default::default()
            },
            patient_zero_count: 3,
            ..Default::default()
        };
        let s = run(config).unwrap().summary;
        assert_eq!(s.infected, 3);
        assert_eq!(s.infection_rate, 0.03);
        assert_eq!(s.death_rate, 0.0);
    }

    #[test]
    fn isolated_patient_zero_recovers() {
        // patient zero decays below the pathogenic threshold in isolation
        let mut sim = Simulation::new(SimulationConfig {
            network: NetworkSpec {
                contact_count_mean: 0.0,
                ..Default::default()
            },
            ..Default::default()
        })
        .unwrap();
        // 1.0 -> 0.7 (still infected) -> 0.49
        assert_eq!(sim.step().unwrap().infected, 1);
        let r = sim.step().unwrap();
        assert_eq!(r.infected, 0);
        assert_eq!(r.recovered, 1);
    }

    #[test]
    fn diagnosed_are_quarantined() {
        let config = SimulationConfig {
            policy: InterventionPolicy {
                passive_diagnosis: Some(PassiveDiagnosis { probability: 1.0 }),
                ..Default::default()
            },
            initial_exposure: 2.0,
            ..Default::default()
        };
        let mut sim = Simulation::new(config).unwrap();
        let r = sim.step().unwrap();
        assert!(r.quarantined >= 1);
        for i in sim.registry().members() {
            assert_eq!(sim.matrix().degree(i), 0);
        }
    }
}
