//! Intervention mechanisms.
//!
//! One-time setup edits (masks, vaccination, asymptomatic designation) run once
//! when a simulation starts. Diagnosis, detection, tracing, quarantine and
//! release run every round, in the order fixed by [`crate::engine`].

mod quarantine;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{ContactMatrix, HealthLedger, HealthState};
use crate::{Error, Result};

pub use quarantine::{
    quarantine, release, QuarantineEntry, QuarantineReason, QuarantineRegistry, QuarantineWarning,
    ReleaseRules,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassiveDiagnosis {
    /// Chance that an infected individual is diagnosed in a given round.
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverallDetection {
    pub period: u32,
    pub recall: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vaccination {
    pub coverage: f64,
    pub recover_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Masks {
    pub edge_factor: f64,
    /// Apply the factor once per wearer, so an edge between two wearers is
    /// scaled by `edge_factor²`.
    #[serde(default)]
    pub per_endpoint: bool,
}

impl Masks {
    pub const MEDICAL: f64 = 0.9;
    pub const GENERAL: f64 = 0.95;

    fn effective_factor(&self) -> f64 {
        if self.per_endpoint {
            self.edge_factor * self.edge_factor
        } else {
            self.edge_factor
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterventionPolicy {
    pub passive_diagnosis: Option<PassiveDiagnosis>,
    pub overall_detection: Option<OverallDetection>,
    /// Quarantine the direct contacts of everyone diagnosed.
    pub green_code: bool,
    /// Also trace the contacts of individuals found by overall detection.
    pub trace_detected: bool,
    pub contact_quarantine_duration: u32,
    /// Return diagnosed individuals to circulation once they recover.
    pub release_diagnosed_on_recovery: bool,
    pub vaccination: Option<Vaccination>,
    pub masks: Option<Masks>,
    pub asymptomatic_fraction: f64,
}

impl Default for InterventionPolicy {
    fn default() -> Self {
        Self {
            passive_diagnosis: None,
            overall_detection: None,
            green_code: false,
            trace_detected: true,
            contact_quarantine_duration: 14,
            release_diagnosed_on_recovery: false,
            vaccination: None,
            masks: None,
            asymptomatic_fraction: 0.0,
        }
    }
}

fn unit(field: String, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::parameter(field, "must lie in [0, 1]"))
    }
}

fn factor(field: String, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::parameter(field, "must lie in (0, 1]"))
    }
}

impl InterventionPolicy {
    pub fn release_rules(&self) -> ReleaseRules {
        ReleaseRules {
            contact_duration: self.contact_quarantine_duration,
            diagnosed_on_recovery: self.release_diagnosed_on_recovery,
        }
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        let f = |name: &str| format!("{prefix}{name}");
        if let Some(p) = &self.passive_diagnosis {
            unit(f("passive_diagnosis.probability"), p.probability)?;
        }
        if let Some(d) = &self.overall_detection {
            if d.period == 0 {
                return Err(Error::parameter(
                    f("overall_detection.period"),
                    "must be at least 1",
                ));
            }
            unit(f("overall_detection.recall"), d.recall)?;
        }
        if self.contact_quarantine_duration == 0 {
            return Err(Error::parameter(
                f("contact_quarantine_duration"),
                "must be at least 1",
            ));
        }
        if let Some(v) = &self.vaccination {
            unit(f("vaccination.coverage"), v.coverage)?;
            factor(f("vaccination.recover_factor"), v.recover_factor)?;
        }
        if let Some(m) = &self.masks {
            factor(f("masks.edge_factor"), m.edge_factor)?;
        }
        unit(f("asymptomatic_fraction"), self.asymptomatic_fraction)
    }
}

/// Infected individuals a diagnosis or detection can reach.
fn visible_infected(ledger: &HealthLedger) -> impl Iterator<Item = usize> + '_ {
    ledger
        .indices(HealthState::Infected)
        .filter(|&i| !ledger.is_asymptomatic(i) && !ledger.is_quarantined(i))
}

fn bernoulli_subset<R: Rng + ?Sized>(
    candidates: impl Iterator<Item = usize>,
    p: f64,
    rng: &mut R,
) -> Vec<usize> {
    candidates.filter(|_| rng.random_bool(p)).collect()
}

/// Symptomatic infected individuals who get diagnosed this round.
pub fn diagnose_passive<R: Rng + ?Sized>(
    ledger: &HealthLedger,
    policy: &InterventionPolicy,
    rng: &mut R,
) -> Vec<usize> {
    match policy.passive_diagnosis {
        Some(p) => bernoulli_subset(visible_infected(ledger), p.probability, rng),
        None => Vec::new(),
    }
}

/// Whole-population test; only fires on multiples of the period.
pub fn detect_overall<R: Rng + ?Sized>(
    ledger: &HealthLedger,
    round: u32,
    policy: &InterventionPolicy,
    rng: &mut R,
) -> Vec<usize> {
    match policy.overall_detection {
        Some(d) if round.is_multiple_of(d.period) => {
            bernoulli_subset(visible_infected(ledger), d.recall, rng)
        }
        _ => Vec::new(),
    }
}

/// Living direct contacts of `individual` in the unquarantined matrix.
pub fn trace_contacts(
    original: &ContactMatrix,
    ledger: &HealthLedger,
    individual: usize,
) -> Result<Vec<usize>> {
    if individual >= original.order() {
        return Err(Error::Index {
            index: individual,
            population: original.order(),
        });
    }
    Ok(original
        .contacts(individual)
        .map(|(j, _)| j)
        .filter(|&j| !ledger.is_dead(j))
        .collect())
}

fn choose_fraction<R: Rng + ?Sized>(n: usize, fraction: f64, rng: &mut R) -> Vec<usize> {
    let k = ((fraction * n as f64).round() as usize).min(n);
    let mut chosen = index::sample(rng, n, k).into_vec();
    chosen.sort_unstable();
    chosen
}

/// Flags a random `coverage` share of the population as vaccinated and
/// scales their recover coefficient. Thresholds are untouched.
pub fn apply_vaccination<R: Rng + ?Sized>(
    matrix: &mut ContactMatrix,
    ledger: &mut HealthLedger,
    policy: &InterventionPolicy,
    rng: &mut R,
) -> Vec<usize> {
    let Some(v) = policy.vaccination else {
        return Vec::new();
    };
    let chosen = choose_fraction(matrix.order(), v.coverage, rng);
    for &i in &chosen {
        ledger.vaccinated[i] = true;
        matrix.set_diagonal(i, matrix.diagonal(i) * v.recover_factor);
    }
    chosen
}

/// Universal masking: scales every off-diagonal entry.
pub fn apply_masks(matrix: &mut ContactMatrix, policy: &InterventionPolicy) {
    if let Some(m) = &policy.masks {
        matrix.scale_off_diagonal(m.effective_factor());
    }
}

pub fn assign_asymptomatic<R: Rng + ?Sized>(
    ledger: &mut HealthLedger,
    fraction: f64,
    rng: &mut R,
) -> Vec<usize> {
    let chosen = choose_fraction(ledger.population(), fraction, rng);
    for &i in &chosen {
        ledger.asymptomatic[i] = true;
    }
    chosen
}

/// Cuts the dead out of the network, diagonal included.
pub fn remove_dead(matrix: &mut ContactMatrix, newly_dead: &[usize]) {
    for &i in newly_dead {
        matrix.isolate(i);
        matrix.set_diagonal(i, 0.0);
    }
}
