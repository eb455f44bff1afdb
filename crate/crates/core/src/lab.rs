//! Exhaustive search for coverage-gap witnesses on small finite instances.
//!
//! A witness is a real state `s_r*`, its restriction `s_p` to the visible
//! components, and a hidden execution-critical component `delta_star` whose
//! non-valid status makes the action unauthorized while admission over `s_p`
//! still passes.
//!
//! Assignments are enumerated in lexicographic order: the first universe
//! component is most significant and statuses order `Valid < Invalid <
//! Undefined`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{self, Schedule};
use crate::gate::{evaluate_gate, ActionClass, VerdictKind};
use crate::state::{build_envelope, ComponentId, ProvableState, Status, Universe};

pub const MAX_UNIVERSE: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabError {
    #[error("universe of {0} components exceeds the enumeration limit of {MAX_UNIVERSE}")]
    Size(usize),
    #[error("universe is empty")]
    EmptyUniverse,
    #[error("component `{0}` listed twice")]
    Duplicate(ComponentId),
    #[error("component `{0}` is not in the universe")]
    Unknown(ComponentId),
    #[error("authority requirements are empty")]
    EmptyRequirements,
}

/// Admission predicate `G`, evaluated over the provable state only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "components", rename_all = "snake_case")]
pub enum AdmissionRule {
    /// Admit unless some visible entry is `Invalid`.
    NotProvablyFalse,
    /// Admit iff every listed component is visible and `Valid`.
    RequireValid(BTreeSet<ComponentId>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteInstance {
    /// Enumeration order; first is most significant.
    pub universe: Vec<ComponentId>,
    pub visible: BTreeSet<ComponentId>,
    /// `F(s)` holds iff every listed component is `Valid`.
    pub authority_requirements: BTreeSet<ComponentId>,
    pub admission_rule: AdmissionRule,
}

impl FiniteInstance {
    pub fn validate(&self) -> Result<(), LabError> {
        let n = self.universe.len();
        if n == 0 {
            return Err(LabError::EmptyUniverse);
        }
        if n > MAX_UNIVERSE {
            return Err(LabError::Size(n));
        }
        let mut seen = BTreeSet::new();
        for id in &self.universe {
            if !seen.insert(id) {
                return Err(LabError::Duplicate(id.clone()));
            }
        }
        if self.authority_requirements.is_empty() {
            return Err(LabError::EmptyRequirements);
        }
        let listed = self
            .visible
            .iter()
            .chain(&self.authority_requirements)
            .chain(match &self.admission_rule {
                AdmissionRule::NotProvablyFalse => None,
                AdmissionRule::RequireValid(s) => Some(s),
            }
            .into_iter()
            .flatten());
        for id in listed {
            if !seen.contains(id) {
                return Err(LabError::Unknown(id.clone()));
            }
        }
        Ok(())
    }

    pub fn assignments(&self) -> u64 {
        3u64.pow(self.universe.len() as u32)
    }

    pub fn decode(&self, index: u64) -> BTreeMap<ComponentId, Status> {
        let n = self.universe.len();
        let mut rest = index;
        let mut digits = vec![Status::Valid; n];
        for slot in digits.iter_mut().rev() {
            *slot = Status::ALL[(rest % 3) as usize];
            rest /= 3;
        }
        self.universe.iter().cloned().zip(digits).collect()
    }

    pub fn restrict(&self, s_r: &BTreeMap<ComponentId, Status>) -> BTreeMap<ComponentId, Status> {
        s_r.iter()
            .filter(|(id, _)| self.visible.contains(*id))
            .map(|(id, s)| (id.clone(), *s))
            .collect()
    }

    /// `F` over a total state.
    pub fn authority(&self, s_r: &BTreeMap<ComponentId, Status>) -> bool {
        self.authority_requirements
            .iter()
            .all(|id| s_r.get(id) == Some(&Status::Valid))
    }

    /// `F` judged from `s_p` alone: no visible requirement is non-valid.
    pub fn authority_over_provable(&self, s_p: &BTreeMap<ComponentId, Status>) -> bool {
        self.authority_requirements
            .iter()
            .all(|id| s_p.get(id).is_none_or(|s| *s == Status::Valid))
    }

    /// `G` over a provable state.
    pub fn admits(&self, s_p: &BTreeMap<ComponentId, Status>) -> bool {
        match &self.admission_rule {
            AdmissionRule::NotProvablyFalse => s_p.values().all(|s| *s != Status::Invalid),
            AdmissionRule::RequireValid(req) => req.iter().all(|id| s_p.get(id) == Some(&Status::Valid)),
        }
    }

    fn critical_hidden<'a>(&'a self, s_r: &'a BTreeMap<ComponentId, Status>) -> impl Iterator<Item = &'a ComponentId> {
        self.universe.iter().filter(move |id| {
            !self.visible.contains(*id)
                && self.authority_requirements.contains(*id)
                && s_r.get(*id) != Some(&Status::Valid)
        })
    }

    fn is_gap_state(&self, s_r: &BTreeMap<ComponentId, Status>) -> bool {
        let s_p = self.restrict(s_r);
        self.admits(&s_p) && !self.authority(s_r) && self.authority_over_provable(&s_p)
    }

    /// The reconstruction gate's class for this instance.
    pub fn action_class(&self) -> ActionClass {
        ActionClass::single("act", &self.authority_requirements)
            .expect("validated instance has requirements")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub s_p: ProvableState,
    pub s_r_star: BTreeMap<ComponentId, Status>,
    pub delta_star: ComponentId,
}

/// First witness in enumeration order, or `None` if the instance has no
/// gap-sensitive state.
pub fn find_witness(instance: &FiniteInstance, schedule: Schedule) -> Result<Option<Witness>, LabError> {
    instance.validate()?;
    let hit = exec::find_first(schedule, 0..instance.assignments(), |i| {
        let s_r = instance.decode(i);
        instance.is_gap_state(&s_r) && instance.critical_hidden(&s_r).next().is_some()
    });
    Ok(hit.map(|i| {
        let s_r_star = instance.decode(i);
        let delta_star = instance
            .critical_hidden(&s_r_star)
            .next()
            .expect("found index has a critical hidden component")
            .clone();
        Witness {
            s_p: ProvableState::capture(0, instance.restrict(&s_r_star)),
            s_r_star,
            delta_star,
        }
    }))
}

/// Number of `(s_r*, delta_star)` pairs satisfying every witness condition.
pub fn count_witnesses(instance: &FiniteInstance, schedule: Schedule) -> Result<u64, LabError> {
    instance.validate()?;
    Ok(exec::map_reduce(
        schedule,
        0..instance.assignments(),
        0u64,
        |i| {
            let s_r = instance.decode(i);
            if instance.is_gap_state(&s_r) {
                instance.critical_hidden(&s_r).count() as u64
            } else {
                0
            }
        },
        |a, b| a + b,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessCheck {
    pub admitted: bool,
    pub unauthorized: bool,
    pub authorized_over_provable: bool,
    pub consistent_restriction: bool,
    pub delta_hidden: bool,
    pub delta_critical: bool,
    pub integrity: bool,
}

impl WitnessCheck {
    pub fn holds(&self) -> bool {
        self.admitted
            && self.unauthorized
            && self.authorized_over_provable
            && self.consistent_restriction
            && self.delta_hidden
            && self.delta_critical
            && self.integrity
    }
}

pub fn verify_witness(instance: &FiniteInstance, w: &Witness) -> WitnessCheck {
    let universe: BTreeSet<&ComponentId> = instance.universe.iter().collect();
    let total = w.s_r_star.len() == universe.len() && w.s_r_star.keys().all(|id| universe.contains(id));
    let s_p = w.s_p.entries();
    WitnessCheck {
        admitted: instance.admits(s_p),
        unauthorized: total && !instance.authority(&w.s_r_star),
        authorized_over_provable: instance.authority_over_provable(s_p),
        consistent_restriction: total && *s_p == instance.restrict(&w.s_r_star),
        delta_hidden: universe.contains(&w.delta_star) && !instance.visible.contains(&w.delta_star),
        delta_critical: instance.authority_requirements.contains(&w.delta_star)
            && w.s_r_star.get(&w.delta_star).is_some_and(|s| *s != Status::Valid),
        integrity: w.s_p.verify(),
    }
}

/// Exhaustive comparison of the reconstruction gate and admission-only
/// authorization over every assignment of an instance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NecessityReport {
    pub assignments: u64,
    pub authority_true: u64,
    pub ram_executions: u64,
    /// Executions where `F` is false. Must be zero.
    pub ram_invalid_executions: u64,
    /// Halts or refusals where `F` is true: the price of fail-closed.
    pub ram_halts_on_authority_true: u64,
    pub admission_executions: u64,
    pub admission_invalid_executions: u64,
}

impl NecessityReport {
    fn merge(self, o: Self) -> Self {
        Self {
            assignments: self.assignments + o.assignments,
            authority_true: self.authority_true + o.authority_true,
            ram_executions: self.ram_executions + o.ram_executions,
            ram_invalid_executions: self.ram_invalid_executions + o.ram_invalid_executions,
            ram_halts_on_authority_true: self.ram_halts_on_authority_true + o.ram_halts_on_authority_true,
            admission_executions: self.admission_executions + o.admission_executions,
            admission_invalid_executions: self.admission_invalid_executions + o.admission_invalid_executions,
        }
    }
}

/// The gate sees the visible restriction as its proven state and every
/// hidden component as residual.
pub fn necessity_scan(instance: &FiniteInstance, schedule: Schedule) -> Result<NecessityReport, LabError> {
    instance.validate()?;
    let universe = Universe::new(&instance.universe)
        .expect("validated universe");
    let class = instance.action_class();
    Ok(exec::map_reduce(
        schedule,
        0..instance.assignments(),
        NecessityReport::default(),
        |i| {
            let s_r = instance.decode(i);
            let s_p = instance.restrict(&s_r);
            let f = instance.authority(&s_r);
            let envelope = build_envelope(&universe, ProvableState::capture(0, s_p.clone()), BTreeMap::new())
                .expect("restriction is drawn from the universe");
            let verdict = evaluate_gate(&envelope, &class)
                .expect("requirements are in the universe")
                .verdict
                .kind();
            let ram = verdict == VerdictKind::Execute;
            let admitted = instance.admits(&s_p);
            NecessityReport {
                assignments: 1,
                authority_true: f as u64,
                ram_executions: ram as u64,
                ram_invalid_executions: (ram && !f) as u64,
                ram_halts_on_authority_true: (!ram && f) as u64,
                admission_executions: admitted as u64,
                admission_invalid_executions: (admitted && !f) as u64,
            }
        },
        NecessityReport::merge,
    ))
}
