//! State ontology: the real execution-relevant state, its provable
//! projection, the gap between the two, and the coverage envelope that
//! authority is constructed over.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Logical step index. Unitless.
pub type Tick = u64;

/// Names of the five-component universe used by the simulation.
pub mod components {
    /// Identity consistency.
    pub const I: &str = "I";
    /// Behavioral patterns.
    pub const B: &str = "B";
    /// Regulatory compliance.
    pub const R: &str = "R";
    /// Transactional context.
    pub const C: &str = "C";
    /// Emergent factors; never carried by a provable channel.
    pub const E: &str = "E";

    pub const ALL: [&str; 5] = [I, B, R, C, E];
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StateError {
    #[error("component `{0}` is not registered in the universe")]
    UnknownComponent(ComponentId),
    #[error("component `{0}` registered twice")]
    DuplicateComponent(ComponentId),
    #[error("component names must be non-empty")]
    EmptyName,
    #[error("universe must contain at least one component")]
    EmptyUniverse,
    #[error("real state is missing component `{0}`")]
    NotTotal(ComponentId),
    #[error("distortion on `{0}` which is not in the visible set")]
    DistortionNotVisible(ComponentId),
    #[error("assumption {id}={assumed} contradicts proven {id}={proven}")]
    AssumptionConflict {
        id: ComponentId,
        assumed: Status,
        proven: Status,
    },
}

/// Symbolic component name. Cheap to clone; compared by name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComponentId(Arc<str>);

impl ComponentId {
    pub fn new(name: impl AsRef<str>) -> Self {
        Self(Arc::from(name.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ComponentId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

impl From<String> for ComponentId {
    fn from(s: String) -> Self {
        Self::new(s)
    }
}

impl From<&ComponentId> for ComponentId {
    fn from(id: &ComponentId) -> Self {
        id.clone()
    }
}

/// Status of a component as it exists in reality or in a captured entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Valid,
    Invalid,
    /// A value exists but cannot be classified.
    Undefined,
}

impl Status {
    pub const ALL: [Status; 3] = [Status::Valid, Status::Invalid, Status::Undefined];

    pub fn is_definite(self) -> bool {
        !matches!(self, Status::Undefined)
    }

    fn tag_byte(self) -> u8 {
        match self {
            Status::Valid => 1,
            Status::Invalid => 2,
            Status::Undefined => 3,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Valid => "valid",
            Status::Invalid => "invalid",
            Status::Undefined => "undefined",
        })
    }
}

/// Status of a component as seen through an observation channel.
///
/// `Unobservable` means the channel has no entry at all; `Undefined` means
/// it carries an entry whose value could not be classified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservedStatus {
    Valid,
    Invalid,
    Undefined,
    Unobservable,
}

impl From<Status> for ObservedStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Valid => ObservedStatus::Valid,
            Status::Invalid => ObservedStatus::Invalid,
            Status::Undefined => ObservedStatus::Undefined,
        }
    }
}

impl ObservedStatus {
    /// The channel-level view of an optional entry.
    pub fn from_entry(entry: Option<Status>) -> Self {
        entry.map_or(ObservedStatus::Unobservable, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentObservation {
    pub id: ComponentId,
    pub status: ObservedStatus,
}

/// The registered set of component names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ComponentId>", into = "Vec<ComponentId>")]
pub struct Universe {
    ids: BTreeSet<ComponentId>,
}

impl Universe {
    pub fn new<I, T>(names: I) -> Result<Self, StateError>
    where
        I: IntoIterator<Item = T>,
        T: Into<ComponentId>,
    {
        let mut ids = BTreeSet::new();
        for name in names {
            let id = name.into();
            if id.as_str().is_empty() {
                return Err(StateError::EmptyName);
            }
            if !ids.insert(id.clone()) {
                return Err(StateError::DuplicateComponent(id));
            }
        }
        if ids.is_empty() {
            return Err(StateError::EmptyUniverse);
        }
        Ok(Self { ids })
    }

    /// `{I, B, R, C, E}`.
    pub fn five_component() -> Self {
        Self::new(components::ALL).expect("static universe is well formed")
    }

    pub fn contains(&self, id: &ComponentId) -> bool {
        self.ids.contains(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ComponentId> {
        self.ids.iter()
    }

    pub fn ids(&self) -> &BTreeSet<ComponentId> {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Returns the registered id with the given name.
    pub fn id(&self, name: &str) -> Result<ComponentId, StateError> {
        let probe = ComponentId::new(name);
        if self.ids.contains(&probe) {
            Ok(probe)
        } else {
            Err(StateError::UnknownComponent(probe))
        }
    }

    pub fn check<'a>(&self, ids: impl IntoIterator<Item = &'a ComponentId>) -> Result<(), StateError> {
        for id in ids {
            if !self.contains(id) {
                return Err(StateError::UnknownComponent(id.clone()));
            }
        }
        Ok(())
    }
}

impl TryFrom<Vec<ComponentId>> for Universe {
    type Error = StateError;

    fn try_from(v: Vec<ComponentId>) -> Result<Self, Self::Error> {
        Universe::new(v)
    }
}

impl From<Universe> for Vec<ComponentId> {
    fn from(u: Universe) -> Self {
        u.ids.into_iter().collect()
    }
}

/// Ground truth at one step. Total over the universe it was built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealState {
    at: Tick,
    components: BTreeMap<ComponentId, Status>,
}

impl RealState {
    pub fn new(
        universe: &Universe,
        at: Tick,
        components: BTreeMap<ComponentId, Status>,
    ) -> Result<Self, StateError> {
        universe.check(components.keys())?;
        if let Some(missing) = universe.iter().find(|id| !components.contains_key(*id)) {
            return Err(StateError::NotTotal(missing.clone()));
        }
        Ok(Self { at, components })
    }

    pub fn all_valid(universe: &Universe, at: Tick) -> Self {
        Self {
            at,
            components: universe.iter().map(|id| (id.clone(), Status::Valid)).collect(),
        }
    }

    pub fn at(&self) -> Tick {
        self.at
    }

    pub fn components(&self) -> &BTreeMap<ComponentId, Status> {
        &self.components
    }

    pub fn get(&self, id: &ComponentId) -> Option<Status> {
        self.components.get(id).copied()
    }

    /// Copy of this state with one component replaced.
    pub fn with_status(&self, id: &ComponentId, status: Status) -> Result<Self, StateError> {
        if !self.components.contains_key(id) {
            return Err(StateError::UnknownComponent(id.clone()));
        }
        let mut next = self.clone();
        next.components.insert(id.clone(), status);
        Ok(next)
    }

    pub fn at_tick(&self, at: Tick) -> Self {
        Self {
            at,
            components: self.components.clone(),
        }
    }

    pub fn all_components_valid(&self) -> bool {
        self.components.values().all(|s| *s == Status::Valid)
    }
}

/// Deterministic SHA-256 checksum over a captured state.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntegrityTag([u8; 32]);

impl IntegrityTag {
    fn compute(at: Tick, entries: &BTreeMap<ComponentId, Status>) -> Self {
        let mut h = Sha256::new();
        h.update(at.to_le_bytes());
        for (id, status) in entries {
            let name = id.as_str().as_bytes();
            h.update((name.len() as u64).to_le_bytes());
            h.update(name);
            h.update([status.tag_byte()]);
        }
        let digest = h.finalize();
        let mut out = [0u8; 32];
        out.copy_from_slice(&digest);
        Self(out)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for IntegrityTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntegrityTag({})", &self.to_hex()[..12])
    }
}

impl Serialize for IntegrityTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for IntegrityTag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let mut out = [0u8; 32];
        hex::decode_to_slice(&s, &mut out).map_err(serde::de::Error::custom)?;
        Ok(Self(out))
    }
}

/// The portion of state carried by an attestable channel at one step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvableState {
    at: Tick,
    entries: BTreeMap<ComponentId, Status>,
    integrity_tag: IntegrityTag,
}

impl ProvableState {
    /// Seals `entries` with a fresh integrity tag.
    pub fn capture(at: Tick, entries: BTreeMap<ComponentId, Status>) -> Self {
        let integrity_tag = IntegrityTag::compute(at, &entries);
        Self {
            at,
            entries,
            integrity_tag,
        }
    }

    pub fn empty(at: Tick) -> Self {
        Self::capture(at, BTreeMap::new())
    }

    pub fn at(&self) -> Tick {
        self.at
    }

    pub fn entries(&self) -> &BTreeMap<ComponentId, Status> {
        &self.entries
    }

    pub fn get(&self, id: &ComponentId) -> Option<Status> {
        self.entries.get(id).copied()
    }

    pub fn integrity_tag(&self) -> IntegrityTag {
        self.integrity_tag
    }

    /// True iff the entries are unchanged since capture.
    pub fn verify(&self) -> bool {
        IntegrityTag::compute(self.at, &self.entries) == self.integrity_tag
    }

    /// Overwrites one entry without resealing. Models a tampered input.
    pub fn forge_entry(&self, id: ComponentId, status: Status) -> Self {
        let mut forged = self.clone();
        forged.entries.insert(id, status);
        forged
    }

    /// Removes one entry without resealing.
    pub fn forge_removal(&self, id: &ComponentId) -> Self {
        let mut forged = self.clone();
        forged.entries.remove(id);
        forged
    }
}

/// How a channel misreports a visible component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distortion {
    /// The channel still carries an earlier status.
    Stale(Status),
    /// The channel carries an entry it cannot classify.
    Masked,
}

/// Restricts `real` to `visible`, applying per-component distortions, and
/// seals the result.
pub fn project(
    universe: &Universe,
    real: &RealState,
    visible: &BTreeSet<ComponentId>,
    distortions: &BTreeMap<ComponentId, Distortion>,
) -> Result<ProvableState, StateError> {
    universe.check(visible)?;
    universe.check(distortions.keys())?;
    if let Some(id) = distortions.keys().find(|id| !visible.contains(*id)) {
        return Err(StateError::DistortionNotVisible(id.clone()));
    }
    let mut entries = BTreeMap::new();
    for id in visible {
        let truth = real.get(id).ok_or_else(|| StateError::NotTotal(id.clone()))?;
        let shown = match distortions.get(id) {
            None => truth,
            Some(Distortion::Stale(previous)) => *previous,
            Some(Distortion::Masked) => Status::Undefined,
        };
        entries.insert(id.clone(), shown);
    }
    Ok(ProvableState::capture(real.at(), entries))
}

/// Components of `real` that are absent from `proven` or carried there with
/// a different status.
pub fn gap(real: &RealState, proven: &ProvableState) -> BTreeSet<ComponentId> {
    real.components()
        .iter()
        .filter(|(id, status)| proven.get(id) != Some(**status))
        .map(|(id, _)| id.clone())
        .collect()
}

/// Proven state, declared assumptions, and the acknowledged residual.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageEnvelope {
    proven: ProvableState,
    assumptions: BTreeMap<ComponentId, Status>,
    residual: BTreeSet<ComponentId>,
}

impl CoverageEnvelope {
    pub fn proven(&self) -> &ProvableState {
        &self.proven
    }

    pub fn assumptions(&self) -> &BTreeMap<ComponentId, Status> {
        &self.assumptions
    }

    /// `universe \ domain(proven)`, fixed at build time.
    pub fn residual(&self) -> &BTreeSet<ComponentId> {
        &self.residual
    }
}

/// Builds an envelope, recomputing the residual from the universe.
pub fn build_envelope(
    universe: &Universe,
    proven: ProvableState,
    assumptions: BTreeMap<ComponentId, Status>,
) -> Result<CoverageEnvelope, StateError> {
    universe.check(proven.entries().keys())?;
    universe.check(assumptions.keys())?;
    for (id, assumed) in &assumptions {
        if let Some(p) = proven.get(id) {
            if p.is_definite() && p != *assumed {
                return Err(StateError::AssumptionConflict {
                    id: id.clone(),
                    assumed: *assumed,
                    proven: p,
                });
            }
        }
    }
    let residual = universe
        .iter()
        .filter(|id| !proven.entries().contains_key(*id))
        .cloned()
        .collect();
    Ok(CoverageEnvelope {
        proven,
        assumptions,
        residual,
    })
}
