#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use ramgate::gate::{ActionClass, Privilege};
use ramgate::state::build_envelope;
use ramgate::{ComponentId, CoverageEnvelope, ProvableState, Status, Universe};

pub fn name(i: usize) -> String {
    format!("c{i}")
}

pub fn status() -> impl Strategy<Value = Status> {
    prop_oneof![Just(Status::Valid), Just(Status::Invalid), Just(Status::Undefined)]
}

/// `None` means the component is in the residual.
pub fn entry() -> impl Strategy<Value = Option<Status>> {
    prop_oneof![1 => Just(None), 3 => status().prop_map(Some)]
}

#[derive(Debug, Clone)]
pub struct Case {
    pub n: usize,
    pub entries: Vec<Option<Status>>,
    /// Privilege requirement sets, as component indices.
    pub privileges: Vec<BTreeSet<usize>>,
    /// Declared assumption per component, only where nothing definite is proven.
    pub assumptions: Vec<Option<Status>>,
}

pub fn case() -> impl Strategy<Value = Case> {
    (1usize..=6).prop_flat_map(|n| {
        let entries = proptest::collection::vec(entry(), n);
        let privileges = proptest::collection::vec(
            proptest::collection::btree_set(0..n, 1..=n),
            1..=4,
        );
        let assumptions = proptest::collection::vec(proptest::option::of(status()), n);
        (Just(n), entries, privileges, assumptions).prop_map(|(n, entries, privileges, assumptions)| {
            let assumptions = assumptions
                .into_iter()
                .zip(&entries)
                .map(|(a, e)| match e {
                    Some(s) if s.is_definite() => None,
                    _ => a,
                })
                .collect();
            Case {
                n,
                entries,
                privileges,
                assumptions,
            }
        })
    })
}

impl Case {
    pub fn universe(&self) -> Universe {
        Universe::new((0..self.n).map(name)).unwrap()
    }

    pub fn proven(&self) -> BTreeMap<ComponentId, Status> {
        self.entries
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.map(|s| (ComponentId::new(name(i)), s)))
            .collect()
    }

    pub fn envelope(&self) -> CoverageEnvelope {
        self.envelope_with(true)
    }

    pub fn envelope_with(&self, assumptions: bool) -> CoverageEnvelope {
        let h = if assumptions {
            self.assumptions
                .iter()
                .enumerate()
                .filter_map(|(i, a)| a.map(|s| (ComponentId::new(name(i)), s)))
                .collect()
        } else {
            BTreeMap::new()
        };
        build_envelope(&self.universe(), ProvableState::capture(0, self.proven()), h).unwrap()
    }

    pub fn privilege_name(k: usize) -> String {
        format!("p{k}")
    }

    pub fn class(&self) -> ActionClass {
        ActionClass::new(self.privileges.iter().enumerate().map(|(k, req)| {
            Privilege::new(Self::privilege_name(k), req.iter().map(|i| name(*i))).unwrap()
        }))
        .unwrap()
    }
}

/// Per-privilege judgement computed directly from the entry vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Judgement {
    Granted,
    Refused,
    Undetermined,
}

pub fn judge(entries: &[Option<Status>], req: &BTreeSet<usize>) -> Judgement {
    let seen: Vec<Option<Status>> = req.iter().map(|i| entries[*i]).collect();
    if seen.contains(&Some(Status::Invalid)) {
        Judgement::Refused
    } else if seen.iter().all(|s| *s == Some(Status::Valid)) {
        Judgement::Granted
    } else {
        Judgement::Undetermined
    }
}
