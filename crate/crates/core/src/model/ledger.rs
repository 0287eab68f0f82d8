use serde::{Deserialize, Serialize};

use super::DiseaseProfile;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HealthState {
    Susceptible,
    Infected,
    Recovered,
    Dead,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Death {
    pub round: u32,
    /// Exposure at the round the lethal threshold was crossed; it stays fixed.
    pub exposure: f64,
}

/// Per-individual health record plus run-wide counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HealthLedger {
    states: Vec<HealthState>,
    ever_infected: Vec<bool>,
    deaths: Vec<Option<Death>>,
    pub(crate) quarantined: Vec<bool>,
    pub(crate) asymptomatic: Vec<bool>,
    pub(crate) vaccinated: Vec<bool>,
    cumulative_unique_infected: usize,
    rounds_elapsed: u32,
}

/// Transitions produced by one call to [`classify`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transitions {
    pub newly_dead: Vec<usize>,
    pub newly_infected: Vec<usize>,
    pub recovered: Vec<usize>,
}

impl HealthLedger {
    pub fn new(population: usize) -> Self {
        Self {
            states: vec![HealthState::Susceptible; population],
            ever_infected: vec![false; population],
            deaths: vec![None; population],
            quarantined: vec![false; population],
            asymptomatic: vec![false; population],
            vaccinated: vec![false; population],
            cumulative_unique_infected: 0,
            rounds_elapsed: 0,
        }
    }

    pub fn population(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, i: usize) -> HealthState {
        self.states[i]
    }

    pub fn states(&self) -> &[HealthState] {
        &self.states
    }

    pub fn is_dead(&self, i: usize) -> bool {
        self.states[i] == HealthState::Dead
    }

    pub fn was_ever_infected(&self, i: usize) -> bool {
        self.ever_infected[i]
    }

    pub fn death(&self, i: usize) -> Option<Death> {
        self.deaths[i]
    }

    pub fn is_quarantined(&self, i: usize) -> bool {
        self.quarantined[i]
    }

    pub fn is_asymptomatic(&self, i: usize) -> bool {
        self.asymptomatic[i]
    }

    pub fn is_vaccinated(&self, i: usize) -> bool {
        self.vaccinated[i]
    }

    pub fn cumulative_unique_infected(&self) -> usize {
        self.cumulative_unique_infected
    }

    pub fn rounds_elapsed(&self) -> u32 {
        self.rounds_elapsed
    }

    pub(crate) fn set_rounds_elapsed(&mut self, rounds: u32) {
        self.rounds_elapsed = rounds;
    }

    pub fn count(&self, state: HealthState) -> usize {
        self.states.iter().filter(|&&s| s == state).count()
    }

    pub fn quarantined_count(&self) -> usize {
        self.quarantined.iter().filter(|&&q| q).count()
    }

    /// Indices currently in `state`, ascending.
    pub fn indices(&self, state: HealthState) -> impl Iterator<Item = usize> + '_ {
        self.states
            .iter()
            .enumerate()
            .filter(move |&(_, &s)| s == state)
            .map(|(i, _)| i)
    }

    /// Overwrites the exposure of every dead individual with its value at death.
    pub fn freeze_dead(&self, x: &mut [f64]) {
        for (xi, death) in x.iter_mut().zip(&self.deaths) {
            if let Some(d) = death {
                *xi = d.exposure;
            }
        }
    }

    fn mark_infected(&mut self, i: usize) -> bool {
        if self.ever_infected[i] {
            return false;
        }
        self.ever_infected[i] = true;
        self.cumulative_unique_infected += 1;
        true
    }
}

/// Updates the ledger from the exposure vector.
///
/// Thresholds are inclusive. Death is absorbing and counts as an infection
/// if the individual had never been classified infected before.
pub fn classify(
    x: &[f64],
    ledger: &mut HealthLedger,
    disease: &DiseaseProfile,
    round: u32,
) -> Result<Transitions> {
    if x.len() != ledger.population() {
        return Err(Error::Dimension {
            expected: ledger.population(),
            actual: x.len(),
        });
    }
    let mut out = Transitions::default();
    for (i, &xi) in x.iter().enumerate() {
        let before = ledger.states[i];
        if before == HealthState::Dead {
            continue;
        }
        let after = if xi >= disease.lethal_threshold {
            ledger.mark_infected(i);
            ledger.deaths[i] = Some(Death {
                round,
                exposure: xi,
            });
            out.newly_dead.push(i);
            HealthState::Dead
        } else if xi >= disease.pathogenic_threshold {
            if ledger.mark_infected(i) {
                out.newly_infected.push(i);
            }
            HealthState::Infected
        } else if ledger.ever_infected[i] {
            if before == HealthState::Infected {
                out.recovered.push(i);
            }
            HealthState::Recovered
        } else {
            HealthState::Susceptible
        };
        ledger.states[i] = after;
    }
    Ok(out)
}
