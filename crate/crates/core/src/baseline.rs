//! Comparison decision functions: closed attestation against a one-time
//! admission snapshot, and the same check extended with a lagging oracle
//! channel.
//!
//! Both halt only on something provably wrong. Undefined entries and absent
//! components never trigger a halt.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gate::{ActionClass, ReasonCode};
use crate::state::{ComponentId, ProvableState, Status};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BaselineError {
    #[error("oracle channel may not carry hidden component `{0}`")]
    HiddenComponent(ComponentId),
    #[error("oracle view carries `{0}` which is outside the channel's extra_visible set")]
    OutOfScope(ComponentId),
}

/// Provable state and class captured once at admission. Never refreshed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissionSnapshot {
    pub proven_at_admission: ProvableState,
    pub admitted_class: ActionClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleChannel {
    extra_visible: BTreeSet<ComponentId>,
    propagation_lag: u64,
}

impl OracleChannel {
    /// `hidden` lists components no channel may carry.
    pub fn new(
        extra_visible: BTreeSet<ComponentId>,
        propagation_lag: u64,
        hidden: &BTreeSet<ComponentId>,
    ) -> Result<Self, BaselineError> {
        if let Some(h) = extra_visible.intersection(hidden).next() {
            return Err(BaselineError::HiddenComponent(h.clone()));
        }
        Ok(Self {
            extra_visible,
            propagation_lag,
        })
    }

    pub fn extra_visible(&self) -> &BTreeSet<ComponentId> {
        &self.extra_visible
    }

    pub fn propagation_lag(&self) -> u64 {
        self.propagation_lag
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "decision", content = "reason", rename_all = "snake_case")]
pub enum BaselineDecision {
    Proceed,
    Halt(ReasonCode),
}

impl BaselineDecision {
    pub fn proceeds(self) -> bool {
        matches!(self, BaselineDecision::Proceed)
    }

    pub fn reason_code(self) -> ReasonCode {
        match self {
            BaselineDecision::Proceed => ReasonCode::NoMismatchDetected,
            BaselineDecision::Halt(r) => r,
        }
    }
}

fn mismatch(
    admitted: &BTreeMap<ComponentId, Status>,
    current: &BTreeMap<ComponentId, Status>,
) -> BaselineDecision {
    let differs = current.iter().any(|(id, now)| {
        admitted
            .get(id)
            .is_some_and(|then| then.is_definite() && now.is_definite() && then != now)
    });
    if differs {
        return BaselineDecision::Halt(ReasonCode::AdmissionMismatch);
    }
    let invalid = admitted
        .values()
        .chain(current.values())
        .any(|s| *s == Status::Invalid);
    if invalid {
        return BaselineDecision::Halt(ReasonCode::ProvablyInvalid);
    }
    BaselineDecision::Proceed
}

/// Closed attestation: halt on a definite mismatch against the admission
/// snapshot or on any definitively invalid entry.
pub fn decide_attestation(snapshot: &AdmissionSnapshot, current: &ProvableState) -> BaselineDecision {
    if !current.verify() {
        return BaselineDecision::Halt(ReasonCode::AttestationFailure);
    }
    mismatch(snapshot.proven_at_admission.entries(), current.entries())
}

/// Attestation over the union of the attested channel and the oracle view.
///
/// On overlap the oracle entry replaces the attested one, except that an
/// attested `Invalid` is never overwritten: the oracle only adds
/// information.
pub fn decide_oracle(
    snapshot: &AdmissionSnapshot,
    current: &ProvableState,
    oracle: &OracleChannel,
    oracle_view: &ProvableState,
) -> Result<BaselineDecision, BaselineError> {
    if let Some(id) = oracle_view
        .entries()
        .keys()
        .find(|id| !oracle.extra_visible.contains(*id))
    {
        return Err(BaselineError::OutOfScope(id.clone()));
    }
    if !current.verify() || !oracle_view.verify() {
        return Ok(BaselineDecision::Halt(ReasonCode::AttestationFailure));
    }
    Ok(mismatch(
        snapshot.proven_at_admission.entries(),
        &merged_view(current, oracle_view),
    ))
}

/// Union of the attested entries and the oracle view as seen by
/// [`decide_oracle`].
pub fn merged_view(current: &ProvableState, oracle_view: &ProvableState) -> BTreeMap<ComponentId, Status> {
    let mut merged = current.entries().clone();
    for (id, status) in oracle_view.entries() {
        let slot = merged.entry(id.clone()).or_insert(*status);
        if *slot != Status::Invalid {
            *slot = *status;
        }
    }
    merged
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> ComponentId {
        ComponentId::new(s)
    }

    fn state(at: u64, pairs: &[(&str, Status)]) -> ProvableState {
        ProvableState::capture(at, pairs.iter().map(|(n, s)| (id(n), *s)).collect())
    }

    fn snapshot() -> AdmissionSnapshot {
        AdmissionSnapshot {
            proven_at_admission: state(
                0,
                &[
                    ("I", Status::Valid),
                    ("B", Status::Valid),
                    ("R", Status::Valid),
                    ("C", Status::Valid),
                ],
            ),
            admitted_class: ActionClass::single("transfer", ["I", "B", "R", "C", "E"]).unwrap(),
        }
    }

    fn oracle(extra: &[&str], lag: u64) -> OracleChannel {
        OracleChannel::new(extra.iter().map(|n| id(n)).collect(), lag, &BTreeSet::from([id("E")]))
            .unwrap()
    }

    #[test]
    fn observable_drift_halts() {
        let now = state(1, &[("I", Status::Invalid), ("B", Status::Valid)]);
        assert_eq!(
            decide_attestation(&snapshot(), &now),
            BaselineDecision::Halt(ReasonCode::AdmissionMismatch)
        );
    }

    #[test]
    fn hidden_drift_proceeds() {
        // E is absent from both maps.
        let now = state(1, &[("I", Status::Valid), ("B", Status::Valid), ("R", Status::Valid), ("C", Status::Valid)]);
        assert_eq!(decide_attestation(&snapshot(), &now), BaselineDecision::Proceed);
    }

    #[test]
    fn undefined_entry_proceeds() {
        let now = state(1, &[("B", Status::Undefined)]);
        assert_eq!(decide_attestation(&snapshot(), &now), BaselineDecision::Proceed);
    }

    #[test]
    fn invalid_entry_without_snapshot_counterpart_halts() {
        let now = state(1, &[("X", Status::Invalid)]);
        assert_eq!(
            decide_attestation(&snapshot(), &now),
            BaselineDecision::Halt(ReasonCode::ProvablyInvalid)
        );
    }

    #[test]
    fn tampered_current_halts() {
        let now = state(1, &[("I", Status::Valid)]).forge_entry(id("I"), Status::Undefined);
        assert_eq!(
            decide_attestation(&snapshot(), &now),
            BaselineDecision::Halt(ReasonCode::AttestationFailure)
        );
    }

    #[test]
    fn stale_oracle_then_propagated_oracle() {
        // R drifts at step 5; the oracle lags two steps.
        let ch = oracle(&["R"], 2);
        let attested = state(5, &[("I", Status::Valid)]);
        let at_t = state(5, &[("R", Status::Valid)]);
        assert_eq!(decide_oracle(&snapshot(), &attested, &ch, &at_t).unwrap(), BaselineDecision::Proceed);
        let at_t2 = state(7, &[("R", Status::Invalid)]);
        assert!(!decide_oracle(&snapshot(), &attested, &ch, &at_t2).unwrap().proceeds());
    }

    #[test]
    fn oracle_never_overwrites_attested_invalid() {
        let ch = oracle(&["I"], 2);
        let attested = state(3, &[("I", Status::Invalid)]);
        let lagging = state(3, &[("I", Status::Valid)]);
        assert!(!decide_oracle(&snapshot(), &attested, &ch, &lagging).unwrap().proceeds());
    }

    #[test]
    fn oracle_view_must_stay_in_scope() {
        let ch = oracle(&["R"], 0);
        let view = state(1, &[("C", Status::Valid)]);
        assert_eq!(
            decide_oracle(&snapshot(), &state(1, &[]), &ch, &view).unwrap_err(),
            BaselineError::OutOfScope(id("C"))
        );
    }

    #[test]
    fn oracle_channel_rejects_hidden_components() {
        let err = OracleChannel::new(BTreeSet::from([id("E")]), 2, &BTreeSet::from([id("E")])).unwrap_err();
        assert_eq!(err, BaselineError::HiddenComponent(id("E")));
    }
}
