use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{ContactMatrix, HealthLedger, HealthState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuarantineReason {
    /// Diagnosed or detected; stays isolated unless
    /// [`ReleaseRules::diagnosed_on_recovery`] is set.
    Diagnosed,
    /// Close contact; released after the configured duration, or on recovery
    /// if infected while isolated.
    Traced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuarantineEntry {
    pub reason: QuarantineReason,
    pub since_round: u32,
    /// Pre-quarantine weights of every stored slot in the individual's row.
    saved: Vec<(usize, f64)>,
    became_infected: bool,
}

impl QuarantineEntry {
    fn saved_weight(&self, j: usize) -> Option<f64> {
        self.saved
            .binary_search_by_key(&j, |&(c, _)| c)
            .ok()
            .map(|k| self.saved[k].1)
    }

    fn release_due(&self, state: HealthState, round: u32, rules: ReleaseRules) -> bool {
        match self.reason {
            QuarantineReason::Diagnosed => {
                rules.diagnosed_on_recovery && state == HealthState::Recovered
            }
            QuarantineReason::Traced if self.became_infected => state == HealthState::Recovered,
            QuarantineReason::Traced => {
                round >= self.since_round.saturating_add(rules.contact_duration)
            }
        }
    }
}

/// When isolated individuals go back into circulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReleaseRules {
    /// Rounds a traced contact stays isolated.
    pub contact_duration: u32,
    pub diagnosed_on_recovery: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuarantineWarning {
    Dead(usize),
    AlreadyQuarantined(usize),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuarantineRegistry {
    entries: BTreeMap<usize, QuarantineEntry>,
}

impl QuarantineRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.entries.contains_key(&i)
    }

    pub fn entry(&self, i: usize) -> Option<&QuarantineEntry> {
        self.entries.get(&i)
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    /// Weight `(i, j)` had before either endpoint was isolated.
    fn true_weight(&self, i: usize, j: usize, current: f64) -> f64 {
        self.entries
            .get(&j)
            .and_then(|e| e.saved_weight(i))
            .unwrap_or(current)
    }

    /// Lifts the isolation of `i`, restoring edges toward counterparts that
    /// are neither isolated nor dead.
    pub fn release_individual(
        &mut self,
        matrix: &mut ContactMatrix,
        ledger: &mut HealthLedger,
        i: usize,
    ) -> bool {
        match self.entries.remove(&i) {
            Some(entry) => self.restore(matrix, ledger, i, entry),
            None => false,
        }
    }

    fn restore(
        &self,
        matrix: &mut ContactMatrix,
        ledger: &mut HealthLedger,
        i: usize,
        entry: QuarantineEntry,
    ) -> bool {
        ledger.quarantined[i] = false;
        if ledger.is_dead(i) {
            return false;
        }
        for (j, w) in entry.saved {
            if !self.entries.contains_key(&j) && !ledger.is_dead(j) {
                matrix.set_symmetric(i, j, w);
            }
        }
        true
    }
}

/// Isolates each listed individual: their off-diagonal row and column are
/// saved and zeroed, the diagonal is kept.
pub fn quarantine(
    matrix: &mut ContactMatrix,
    registry: &mut QuarantineRegistry,
    ledger: &mut HealthLedger,
    individuals: &[usize],
    reason: QuarantineReason,
    round: u32,
) -> Vec<QuarantineWarning> {
    let mut warnings = Vec::new();
    for &i in individuals {
        if ledger.is_dead(i) {
            warnings.push(QuarantineWarning::Dead(i));
            continue;
        }
        if registry.contains(i) {
            warnings.push(QuarantineWarning::AlreadyQuarantined(i));
            continue;
        }
        let saved: Vec<(usize, f64)> = matrix
            .row_slots(i)
            .iter()
            .map(|&(j, w)| (j, registry.true_weight(i, j, w)))
            .collect();
        matrix.isolate(i);
        ledger.quarantined[i] = true;
        registry.entries.insert(
            i,
            QuarantineEntry {
                reason,
                since_round: round,
                saved,
                became_infected: false,
            },
        );
    }
    warnings
}

/// Releases everyone whose release condition holds at `round` and drops
/// entries of the dead. Returns the released individuals.
pub fn release(
    matrix: &mut ContactMatrix,
    registry: &mut QuarantineRegistry,
    ledger: &mut HealthLedger,
    round: u32,
    rules: ReleaseRules,
) -> Vec<usize> {
    let mut due = Vec::new();
    let mut dead = Vec::new();
    for (&i, entry) in registry.entries.iter_mut() {
        let state = ledger.state(i);
        if state == HealthState::Dead {
            dead.push(i);
            continue;
        }
        if state == HealthState::Infected {
            entry.became_infected = true;
        }
        if entry.release_due(state, round, rules) {
            due.push(i);
        }
    }
    for i in dead {
        registry.release_individual(matrix, ledger, i);
    }
    // Everyone due leaves the registry before any edge is restored, so edges
    // between two individuals released together come back in either order.
    let entries: Vec<(usize, QuarantineEntry)> = due
        .iter()
        .filter_map(|&i| registry.entries.remove(&i).map(|e| (i, e)))
        .collect();
    for (i, entry) in entries {
        registry.restore(matrix, ledger, i, entry);
    }
    due
}
