//! Reconstruction gate.
//!
//! Authority is never stored. Each call builds it from the coverage envelope
//! handed in, routing to one of four outcomes: full execution, execution
//! with a narrowed privilege set, definitive refusal, or a halt because the
//! envelope does not carry enough information to decide.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::{ComponentId, CoverageEnvelope, ObservedStatus, ProvableState, Status};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GateError {
    #[error("attestation failure: observed state does not match its integrity tag")]
    AttestationFailure,
    #[error("requirement references unregistered component `{0}`")]
    UnknownComponent(ComponentId),
    #[error("privilege `{0}` has no requirements")]
    EmptyRequirements(String),
    #[error("action class has no privileges")]
    EmptyClass,
    #[error("privilege `{0}` declared twice")]
    DuplicatePrivilege(String),
}

/// Reason codes written to the audit log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasonCode {
    AuthorityEstablished,
    AuthorityNarrowed,
    AuthorityNotConstructible,
    AttestationFailure,
    /// Baselines: nothing provably wrong in the channel.
    NoMismatchDetected,
    /// Baselines: a definite status differs from the admission snapshot.
    AdmissionMismatch,
    /// Baselines: some channel entry is definitively invalid.
    ProvablyInvalid,
}

impl ReasonCode {
    pub const ALL: [ReasonCode; 7] = [
        ReasonCode::AuthorityEstablished,
        ReasonCode::AuthorityNarrowed,
        ReasonCode::AuthorityNotConstructible,
        ReasonCode::AttestationFailure,
        ReasonCode::NoMismatchDetected,
        ReasonCode::AdmissionMismatch,
        ReasonCode::ProvablyInvalid,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReasonCode::AuthorityEstablished => "authority_established",
            ReasonCode::AuthorityNarrowed => "authority_narrowed",
            ReasonCode::AuthorityNotConstructible => "authority_not_constructible",
            ReasonCode::AttestationFailure => "attestation_failure",
            ReasonCode::NoMismatchDetected => "no_mismatch_detected",
            ReasonCode::AdmissionMismatch => "admission_mismatch",
            ReasonCode::ProvablyInvalid => "provably_invalid",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

impl fmt::Display for ReasonCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An atomic privilege and the components that must be proven valid for it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Privilege {
    name: String,
    requires: BTreeSet<ComponentId>,
}

impl Privilege {
    pub fn new<I, T>(name: impl Into<String>, requires: I) -> Result<Self, GateError>
    where
        I: IntoIterator<Item = T>,
        T: Into<ComponentId>,
    {
        let name = name.into();
        let requires: BTreeSet<ComponentId> = requires.into_iter().map(Into::into).collect();
        if requires.is_empty() {
            return Err(GateError::EmptyRequirements(name));
        }
        Ok(Self { name, requires })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn requires(&self) -> &BTreeSet<ComponentId> {
        &self.requires
    }
}

/// A non-empty set of privileges, keyed by name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Privilege>", into = "Vec<Privilege>")]
pub struct ActionClass {
    privileges: BTreeMap<String, Privilege>,
}

impl ActionClass {
    pub fn new(privileges: impl IntoIterator<Item = Privilege>) -> Result<Self, GateError> {
        let mut map = BTreeMap::new();
        for p in privileges {
            if map.contains_key(p.name()) {
                return Err(GateError::DuplicatePrivilege(p.name.clone()));
            }
            map.insert(p.name.clone(), p);
        }
        if map.is_empty() {
            return Err(GateError::EmptyClass);
        }
        Ok(Self { privileges: map })
    }

    /// Single privilege `name` requiring every id in `requires`.
    pub fn single<I, T>(name: &str, requires: I) -> Result<Self, GateError>
    where
        I: IntoIterator<Item = T>,
        T: Into<ComponentId>,
    {
        Self::new([Privilege::new(name, requires)?])
    }

    pub fn privileges(&self) -> impl Iterator<Item = &Privilege> {
        self.privileges.values()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.privileges.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.privileges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.privileges.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.privileges.contains_key(name)
    }

    pub fn required_components(&self) -> BTreeSet<ComponentId> {
        self.privileges()
            .flat_map(|p| p.requires.iter().cloned())
            .collect()
    }

    pub fn is_strict_subset_of(&self, other: &ActionClass) -> bool {
        self.len() < other.len()
            && self
                .privileges
                .iter()
                .all(|(k, v)| other.privileges.get(k) == Some(v))
    }

    fn restricted_to(&self, keep: &BTreeSet<&str>) -> Option<Self> {
        let privileges: BTreeMap<_, _> = self
            .privileges
            .iter()
            .filter(|(k, _)| keep.contains(k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        (!privileges.is_empty()).then_some(Self { privileges })
    }
}

impl TryFrom<Vec<Privilege>> for ActionClass {
    type Error = GateError;

    fn try_from(v: Vec<Privilege>) -> Result<Self, Self::Error> {
        ActionClass::new(v)
    }
}

impl From<ActionClass> for Vec<Privilege> {
    fn from(c: ActionClass) -> Self {
        c.privileges.into_values().collect()
    }
}

/// Per-privilege explanation attached to every outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PrivilegeReason {
    Granted,
    /// Some required component is proven invalid.
    Refused { by: BTreeSet<ComponentId> },
    /// Nothing is proven invalid, but some requirement is undefined or in the
    /// residual.
    Undetermined { by: BTreeSet<ComponentId> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "class", rename_all = "snake_case")]
pub enum Verdict {
    Execute(ActionClass),
    Narrow(ActionClass),
    RefuseDefinitive,
    HaltInsufficient,
}

impl Verdict {
    pub fn kind(&self) -> VerdictKind {
        match self {
            Verdict::Execute(_) => VerdictKind::Execute,
            Verdict::Narrow(_) => VerdictKind::Narrow,
            Verdict::RefuseDefinitive => VerdictKind::RefuseDefinitive,
            Verdict::HaltInsufficient => VerdictKind::HaltInsufficient,
        }
    }

    /// The class to execute, if any.
    pub fn granted(&self) -> Option<&ActionClass> {
        match self {
            Verdict::Execute(c) | Verdict::Narrow(c) => Some(c),
            _ => None,
        }
    }

    pub fn reason_code(&self) -> ReasonCode {
        match self {
            Verdict::Execute(_) => ReasonCode::AuthorityEstablished,
            Verdict::Narrow(_) => ReasonCode::AuthorityNarrowed,
            Verdict::RefuseDefinitive | Verdict::HaltInsufficient => {
                ReasonCode::AuthorityNotConstructible
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Execute,
    Narrow,
    RefuseDefinitive,
    HaltInsufficient,
}

impl VerdictKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictKind::Execute => "execute",
            VerdictKind::Narrow => "narrow",
            VerdictKind::RefuseDefinitive => "refuse_definitive",
            VerdictKind::HaltInsufficient => "halt_insufficient",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateOutcome {
    pub verdict: Verdict,
    pub reasons: BTreeMap<String, PrivilegeReason>,
    /// Undetermined privileges whose every undetermined requirement is
    /// covered by a declared `Valid` assumption. Audit only; assumptions
    /// never change the verdict.
    pub lifted_by_assumptions: BTreeSet<String>,
}

impl GateOutcome {
    pub fn granted_names(&self) -> BTreeSet<&str> {
        self.reasons
            .iter()
            .filter(|(_, r)| matches!(r, PrivilegeReason::Granted))
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

/// Constructs authority for `requested` from `envelope`.
///
/// Privileges are judged independently: granted iff every requirement is
/// proven `Valid`, refused iff some requirement is proven `Invalid`,
/// undetermined otherwise.
pub fn evaluate_gate(
    envelope: &CoverageEnvelope,
    requested: &ActionClass,
) -> Result<GateOutcome, GateError> {
    let proven = envelope.proven();
    for id in requested.required_components() {
        if proven.get(&id).is_none() && !envelope.residual().contains(&id) {
            return Err(GateError::UnknownComponent(id));
        }
    }

    let mut reasons = BTreeMap::new();
    let mut lifted = BTreeSet::new();
    for p in requested.privileges() {
        let mut refused_by = BTreeSet::new();
        let mut undetermined_by = BTreeSet::new();
        for id in p.requires() {
            match proven.get(id) {
                Some(Status::Valid) => {}
                Some(Status::Invalid) => {
                    refused_by.insert(id.clone());
                }
                Some(Status::Undefined) | None => {
                    undetermined_by.insert(id.clone());
                }
            }
        }
        let reason = if !refused_by.is_empty() {
            PrivilegeReason::Refused { by: refused_by }
        } else if !undetermined_by.is_empty() {
            let covered = undetermined_by
                .iter()
                .all(|id| envelope.assumptions().get(id) == Some(&Status::Valid));
            if covered {
                lifted.insert(p.name().to_owned());
            }
            PrivilegeReason::Undetermined {
                by: undetermined_by,
            }
        } else {
            PrivilegeReason::Granted
        };
        reasons.insert(p.name().to_owned(), reason);
    }

    let granted: BTreeSet<&str> = reasons
        .iter()
        .filter(|(_, r)| matches!(r, PrivilegeReason::Granted))
        .map(|(k, _)| k.as_str())
        .collect();
    let verdict = if granted.len() == requested.len() {
        Verdict::Execute(requested.clone())
    } else if let Some(narrowed) = requested.restricted_to(&granted) {
        Verdict::Narrow(narrowed)
    } else if reasons
        .values()
        .all(|r| matches!(r, PrivilegeReason::Refused { .. }))
    {
        Verdict::RefuseDefinitive
    } else {
        Verdict::HaltInsufficient
    };

    Ok(GateOutcome {
        verdict,
        reasons,
        lifted_by_assumptions: lifted,
    })
}

/// One pass of the execution loop: observe, attest, construct.
///
/// `observe` and `attest` are invoked exactly once, inside this call. No
/// outcome from an earlier call is consulted.
pub fn gate_step<O, A>(observe: O, attest: A, requested: &ActionClass) -> Result<GateOutcome, GateError>
where
    O: FnOnce() -> CoverageEnvelope,
    A: FnOnce(&ProvableState) -> bool,
{
    let envelope = observe();
    if !attest(envelope.proven()) {
        return Err(GateError::AttestationFailure);
    }
    evaluate_gate(&envelope, requested)
}

/// Three-valued authority result of [`construct_authority`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Authority {
    True,
    False,
    Undefined,
}

impl Authority {
    pub fn reason_code(self) -> ReasonCode {
        match self {
            Authority::True => ReasonCode::AuthorityEstablished,
            Authority::False | Authority::Undefined => ReasonCode::AuthorityNotConstructible,
        }
    }
}

pub const IDENTITY_CONSISTENCY: &str = "identity_consistency";
pub const BEHAVIOR_STABILITY: &str = "behavior_stability";
pub const REGULATORY_COMPLIANCE: &str = "regulatory_compliance";
pub const CONTEXT_INTEGRITY: &str = "context_integrity";

/// Required components of the four-condition constructor, in evaluation order.
pub const FOUR_CONDITIONS: [&str; 4] = [
    IDENTITY_CONSISTENCY,
    BEHAVIOR_STABILITY,
    REGULATORY_COMPLIANCE,
    CONTEXT_INTEGRITY,
];

/// Which clause of the four-condition constructor decided the result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    Missing(ComponentId),
    IdentityRefused,
    BehaviorUncertain,
    RegulatoryRefused,
    ContextUncertain,
    /// Identity or regulatory entry present but unclassifiable.
    Undetermined(ComponentId),
    Established,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructedAuthority {
    pub authority: Authority,
    pub clause: Clause,
}

/// Four-condition authority constructor over
/// `{identity_consistency, behavior_stability, regulatory_compliance, context_integrity}`.
///
/// Clause order: missing or unobservable requirement, identity invalid
/// (false), behavior invalid or undefined (undefined), regulatory invalid
/// (false), context invalid or undefined (undefined). An undefined identity
/// or regulatory entry that survives every clause yields undefined rather
/// than true.
pub fn construct_authority(state: &BTreeMap<ComponentId, ObservedStatus>) -> ConstructedAuthority {
    let done = |authority, clause| ConstructedAuthority { authority, clause };
    let get = |name: &str| {
        state
            .get(&ComponentId::new(name))
            .copied()
            .unwrap_or(ObservedStatus::Unobservable)
    };

    for name in FOUR_CONDITIONS {
        if get(name) == ObservedStatus::Unobservable {
            return done(Authority::Undefined, Clause::Missing(ComponentId::new(name)));
        }
    }
    if get(IDENTITY_CONSISTENCY) == ObservedStatus::Invalid {
        return done(Authority::False, Clause::IdentityRefused);
    }
    if get(BEHAVIOR_STABILITY) != ObservedStatus::Valid {
        return done(Authority::Undefined, Clause::BehaviorUncertain);
    }
    if get(REGULATORY_COMPLIANCE) == ObservedStatus::Invalid {
        return done(Authority::False, Clause::RegulatoryRefused);
    }
    if get(CONTEXT_INTEGRITY) != ObservedStatus::Valid {
        return done(Authority::Undefined, Clause::ContextUncertain);
    }
    for name in [IDENTITY_CONSISTENCY, REGULATORY_COMPLIANCE] {
        if get(name) == ObservedStatus::Undefined {
            return done(Authority::Undefined, Clause::Undetermined(ComponentId::new(name)));
        }
    }
    done(Authority::True, Clause::Established)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{build_envelope, project, RealState, Universe};

    fn id(s: &str) -> ComponentId {
        ComponentId::new(s)
    }

    fn envelope(pairs: &[(&str, Status)], universe: &[&str]) -> CoverageEnvelope {
        let u = Universe::new(universe.iter().copied()).unwrap();
        let entries = pairs.iter().map(|(n, s)| (id(n), *s)).collect();
        build_envelope(&u, ProvableState::capture(0, entries), BTreeMap::new()).unwrap()
    }

    fn four(pairs: &[(&str, ObservedStatus)]) -> BTreeMap<ComponentId, ObservedStatus> {
        pairs.iter().map(|(n, s)| (id(n), *s)).collect()
    }

    #[test]
    fn all_four_valid_establishes_authority() {
        let s = four(&FOUR_CONDITIONS.map(|n| (n, ObservedStatus::Valid)));
        let r = construct_authority(&s);
        assert_eq!(r.authority, Authority::True);
        assert_eq!(r.authority.reason_code().as_str(), "authority_established");
    }

    #[test]
    fn regulatory_invalid_is_definite_refusal() {
        let mut s = four(&FOUR_CONDITIONS.map(|n| (n, ObservedStatus::Valid)));
        s.insert(id(REGULATORY_COMPLIANCE), ObservedStatus::Invalid);
        let r = construct_authority(&s);
        assert_eq!(r.authority, Authority::False);
        assert_eq!(r.clause, Clause::RegulatoryRefused);
    }

    #[test]
    fn missing_behavior_is_undefined() {
        let mut s = four(&FOUR_CONDITIONS.map(|n| (n, ObservedStatus::Valid)));
        s.remove(&id(BEHAVIOR_STABILITY));
        let r = construct_authority(&s);
        assert_eq!(r.authority, Authority::Undefined);
        assert_eq!(r.clause, Clause::Missing(id(BEHAVIOR_STABILITY)));
        assert_eq!(r.authority.reason_code().as_str(), "authority_not_constructible");
    }

    #[test]
    fn first_triggering_clause_wins() {
        // Missing check runs before the identity clause.
        let s = four(&[
            (IDENTITY_CONSISTENCY, ObservedStatus::Invalid),
            (BEHAVIOR_STABILITY, ObservedStatus::Valid),
            (REGULATORY_COMPLIANCE, ObservedStatus::Valid),
        ]);
        assert_eq!(construct_authority(&s).clause, Clause::Missing(id(CONTEXT_INTEGRITY)));

        // Behavior uncertainty preempts the later regulatory refusal.
        let s = four(&[
            (IDENTITY_CONSISTENCY, ObservedStatus::Valid),
            (BEHAVIOR_STABILITY, ObservedStatus::Invalid),
            (REGULATORY_COMPLIANCE, ObservedStatus::Invalid),
            (CONTEXT_INTEGRITY, ObservedStatus::Valid),
        ]);
        let r = construct_authority(&s);
        assert_eq!((r.authority, r.clause), (Authority::Undefined, Clause::BehaviorUncertain));
    }

    #[test]
    fn undefined_identity_never_establishes() {
        let mut s = four(&FOUR_CONDITIONS.map(|n| (n, ObservedStatus::Valid)));
        s.insert(id(IDENTITY_CONSISTENCY), ObservedStatus::Undefined);
        let r = construct_authority(&s);
        assert_eq!(r.authority, Authority::Undefined);
        assert_eq!(r.clause, Clause::Undetermined(id(IDENTITY_CONSISTENCY)));
    }

    #[test]
    fn full_coverage_full_grant() {
        let env = envelope(&[("I", Status::Valid), ("R", Status::Valid)], &["I", "R"]);
        let class = ActionClass::single("transfer", ["I", "R"]).unwrap();
        let out = evaluate_gate(&env, &class).unwrap();
        assert_eq!(out.verdict, Verdict::Execute(class));
    }

    #[test]
    fn residual_requirement_narrows() {
        let env = envelope(&[("I", Status::Valid)], &["I", "R"]);
        let class = ActionClass::new([
            Privilege::new("read", ["I"]).unwrap(),
            Privilege::new("transfer", ["I", "R"]).unwrap(),
        ])
        .unwrap();
        let out = evaluate_gate(&env, &class).unwrap();
        let expected = ActionClass::single("read", ["I"]).unwrap();
        assert_eq!(out.verdict, Verdict::Narrow(expected.clone()));
        assert!(expected.is_strict_subset_of(&class));
        assert_eq!(
            out.reasons["transfer"],
            PrivilegeReason::Undetermined { by: BTreeSet::from([id("R")]) }
        );
    }

    #[test]
    fn undefined_requirement_halts() {
        let env = envelope(&[("C", Status::Undefined)], &["C"]);
        let class = ActionClass::single("act", ["C"]).unwrap();
        let out = evaluate_gate(&env, &class).unwrap();
        assert_eq!(out.verdict, Verdict::HaltInsufficient);
        assert_eq!(out.verdict.reason_code(), ReasonCode::AuthorityNotConstructible);
    }

    #[test]
    fn all_refused_is_definitive() {
        let env = envelope(&[("I", Status::Invalid), ("R", Status::Undefined)], &["I", "R"]);
        let class = ActionClass::new([
            Privilege::new("a", ["I"]).unwrap(),
            Privilege::new("b", ["I", "R"]).unwrap(),
        ])
        .unwrap();
        assert_eq!(evaluate_gate(&env, &class).unwrap().verdict, Verdict::RefuseDefinitive);
    }

    #[test]
    fn mixed_refused_and_undetermined_halts() {
        let env = envelope(&[("I", Status::Invalid), ("R", Status::Undefined)], &["I", "R"]);
        let class = ActionClass::new([
            Privilege::new("a", ["I"]).unwrap(),
            Privilege::new("b", ["R"]).unwrap(),
        ])
        .unwrap();
        assert_eq!(evaluate_gate(&env, &class).unwrap().verdict, Verdict::HaltInsufficient);
    }

    #[test]
    fn unregistered_requirement_is_rejected() {
        let env = envelope(&[("I", Status::Valid)], &["I"]);
        let class = ActionClass::single("a", ["Z"]).unwrap();
        assert_eq!(evaluate_gate(&env, &class).unwrap_err(), GateError::UnknownComponent(id("Z")));
    }

    #[test]
    fn assumptions_are_audited_but_do_not_grant() {
        let u = Universe::five_component();
        let p = ProvableState::capture(0, BTreeMap::from([(id("I"), Status::Valid)]));
        let env = build_envelope(&u, p, BTreeMap::from([(id("E"), Status::Valid)])).unwrap();
        let class = ActionClass::single("a", ["I", "E"]).unwrap();
        let out = evaluate_gate(&env, &class).unwrap();
        assert_eq!(out.verdict, Verdict::HaltInsufficient);
        assert_eq!(out.lifted_by_assumptions, BTreeSet::from(["a".to_owned()]));
    }

    #[test]
    fn tampered_input_is_attestation_failure() {
        let u = Universe::five_component();
        let real = RealState::all_valid(&u, 0);
        let proven = project(&u, &real, u.ids(), &BTreeMap::new()).unwrap();
        let forged = proven.forge_entry(id("R"), Status::Valid).forge_removal(&id("E"));
        let class = ActionClass::single("a", ["I"]).unwrap();
        let err = gate_step(
            || build_envelope(&u, forged, BTreeMap::new()).unwrap(),
            ProvableState::verify,
            &class,
        )
        .unwrap_err();
        assert_eq!(err, GateError::AttestationFailure);
    }

    #[test]
    fn authority_is_recomputed_each_step() {
        let u = Universe::five_component();
        let class = ActionClass::single("transfer", ["I", "R"]).unwrap();
        let observe_at = |real: &RealState| {
            let p = project(&u, real, u.ids(), &BTreeMap::new()).unwrap();
            build_envelope(&u, p, BTreeMap::new()).unwrap()
        };

        let t0 = RealState::all_valid(&u, 0);
        let first = gate_step(|| observe_at(&t0), ProvableState::verify, &class).unwrap();
        assert_eq!(first.verdict, Verdict::Execute(class.clone()));

        let t1 = t0.with_status(&id("R"), Status::Invalid).unwrap().at_tick(1);
        let second = gate_step(|| observe_at(&t1), ProvableState::verify, &class).unwrap();
        assert_eq!(second.verdict, Verdict::RefuseDefinitive);
    }

    #[test]
    fn identical_envelope_gives_identical_outcome() {
        let env = envelope(&[("I", Status::Valid), ("R", Status::Undefined)], &["I", "R", "E"]);
        let class = ActionClass::new([
            Privilege::new("a", ["I"]).unwrap(),
            Privilege::new("b", ["R", "E"]).unwrap(),
        ])
        .unwrap();
        assert_eq!(evaluate_gate(&env, &class), evaluate_gate(&env, &class));
    }

    #[test]
    fn class_validation() {
        assert_eq!(
            Privilege::new("p", Vec::<&str>::new()).unwrap_err(),
            GateError::EmptyRequirements("p".into())
        );
        assert_eq!(ActionClass::new([]).unwrap_err(), GateError::EmptyClass);
        let p = Privilege::new("p", ["I"]).unwrap();
        assert_eq!(
            ActionClass::new([p.clone(), p]).unwrap_err(),
            GateError::DuplicatePrivilege("p".into())
        );
    }

    #[test]
    fn reason_codes_round_trip() {
        for r in ReasonCode::ALL {
            assert_eq!(ReasonCode::parse(r.as_str()), Some(r));
        }
        assert_eq!(ReasonCode::parse("nope"), None);
    }
}
