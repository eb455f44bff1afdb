//! Seeded drift injection.
//!
//! Four drift kinds, each bound to a fixed component of the five-component
//! universe:
//!
//! | kind       | target | reality   | provable channels                   |
//! |------------|--------|-----------|-------------------------------------|
//! | Observable | I or C | Invalid   | current value, if covered           |
//! | Delayed    | R      | Invalid   | stale `Valid` until the lag expires |
//! | Hidden     | E      | Invalid   | never carried                       |
//! | Ambiguous  | B      | Undefined | `Undefined`, if covered             |
//!
//! Effects persist until the end of the episode.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::{
    components, project, ComponentId, Distortion, ProvableState, RealState, Status, Tick, Universe,
};

pub const DEFAULT_MIX: [f64; 4] = [0.30, 0.25, 0.25, 0.20];
pub const DEFAULT_P_DRIFT: f64 = 0.5;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DriftError {
    #[error("p_drift must lie in [0, 1], got {0}")]
    PDrift(f64),
    #[error("coverage must lie in [0, 1], got {0}")]
    Coverage(f64),
    #[error("mix weights must be non-negative and finite, got {0:?}")]
    MixWeight([f64; 4]),
    #[error("mix must sum to 1 within 1e-12, sums to {0}")]
    MixSum(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftKind {
    None,
    Observable,
    Delayed,
    Hidden,
    Ambiguous,
}

impl DriftKind {
    /// The four drifting kinds in mix order.
    pub const DRIFTING: [DriftKind; 4] = [
        DriftKind::Observable,
        DriftKind::Delayed,
        DriftKind::Hidden,
        DriftKind::Ambiguous,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DriftKind::None => "none",
            DriftKind::Observable => "observable",
            DriftKind::Delayed => "delayed",
            DriftKind::Hidden => "hidden",
            DriftKind::Ambiguous => "ambiguous",
        }
    }

    /// Components this kind may target.
    pub fn targets(self) -> &'static [&'static str] {
        match self {
            DriftKind::None => &[],
            DriftKind::Observable => &[components::I, components::C],
            DriftKind::Delayed => &[components::R],
            DriftKind::Hidden => &[components::E],
            DriftKind::Ambiguous => &[components::B],
        }
    }

    /// Status the target takes in reality.
    pub fn real_effect(self) -> Option<Status> {
        match self {
            DriftKind::None => None,
            DriftKind::Ambiguous => Some(Status::Undefined),
            _ => Some(Status::Invalid),
        }
    }
}

/// Components no provable channel ever carries.
pub fn hidden_components() -> BTreeSet<ComponentId> {
    DriftKind::Hidden.targets().iter().map(ComponentId::new).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriftEvent {
    pub step: Tick,
    pub kind: DriftKind,
    pub target: Option<ComponentId>,
}

impl DriftEvent {
    pub fn none(step: Tick) -> Self {
        Self {
            step,
            kind: DriftKind::None,
            target: None,
        }
    }

    /// Builds an event, checking the target against the kind's table entry.
    pub fn new(step: Tick, kind: DriftKind, target: &str) -> Option<Self> {
        kind.targets().contains(&target).then(|| Self {
            step,
            kind,
            target: Some(ComponentId::new(target)),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftConfig {
    pub p_drift: f64,
    /// Weights over (observable, delayed, hidden, ambiguous).
    pub mix: [f64; 4],
    pub seed: u64,
    /// Probability that a covered-kind event reaches the provable channel.
    pub coverage: f64,
}

impl Default for DriftConfig {
    fn default() -> Self {
        Self {
            p_drift: DEFAULT_P_DRIFT,
            mix: DEFAULT_MIX,
            seed: DEFAULT_SEED,
            coverage: 1.0,
        }
    }
}

impl DriftConfig {
    pub fn validate(&self) -> Result<(), DriftError> {
        if !(0.0..=1.0).contains(&self.p_drift) {
            return Err(DriftError::PDrift(self.p_drift));
        }
        if !(0.0..=1.0).contains(&self.coverage) {
            return Err(DriftError::Coverage(self.coverage));
        }
        if self.mix.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(DriftError::MixWeight(self.mix));
        }
        let sum: f64 = self.mix.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(DriftError::MixSum(sum));
        }
        Ok(())
    }
}

/// Seeded generator for one independent stream.
///
/// Streams are addressed by `(seed, stream)`, so any partition of work that
/// derives the stream id from the work item (not the worker) reproduces the
/// same draws.
#[derive(Debug, Clone)]
pub struct DriftRng(ChaCha8Rng);

impl DriftRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self(rng)
    }

    /// Stream id for episode `episode` of grid point `point`.
    pub fn stream_id(point: u32, episode: u64) -> u64 {
        (u64::from(point) << 40) | (episode & ((1 << 40) - 1))
    }
}

/// Draws the drift event for `step`.
pub fn sample_step(config: &DriftConfig, rng: &mut DriftRng, step: Tick) -> DriftEvent {
    if !rng.0.gen_bool(config.p_drift) {
        return DriftEvent::none(step);
    }
    let u: f64 = rng.0.gen();
    // Rounding can leave `u` above the final cumulative weight; fall back to
    // the last kind that can actually occur.
    let mut kind = DriftKind::DRIFTING
        .into_iter()
        .zip(config.mix)
        .rfind(|(_, w)| *w > 0.0)
        .map_or(DriftKind::Ambiguous, |(k, _)| k);
    let mut acc = 0.0;
    for (k, w) in DriftKind::DRIFTING.into_iter().zip(config.mix) {
        acc += w;
        if u < acc {
            kind = k;
            break;
        }
    }
    let targets = kind.targets();
    let target = if targets.len() == 1 {
        targets[0]
    } else {
        targets[rng.0.gen_range(0..targets.len())]
    };
    DriftEvent {
        step,
        kind,
        target: Some(ComponentId::new(target)),
    }
}

/// Whether the event reaches the provable channel at `coverage`. Hidden
/// events never do; `None` events have nothing to carry.
pub fn sample_inclusion(event: &DriftEvent, coverage: f64, rng: &mut DriftRng) -> bool {
    match event.kind {
        DriftKind::None | DriftKind::Hidden => false,
        _ => rng.0.gen_bool(coverage),
    }
}

/// What a drift event does to a provable channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelChange {
    /// Carry the current true value from now on.
    Reveal,
    /// Carry the current true value once the channel lag has elapsed.
    Delay,
    /// The change happened outside the channel's coverage.
    Drop,
    /// Permanently withheld from the channel.
    Mask,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelEffect {
    pub target: ComponentId,
    pub change: ChannelChange,
    pub step: Tick,
    /// True status of the target just before the event.
    pub prior: Status,
}

/// Applies `event` to ground truth and reports its effect on provable
/// channels. `included` is the event's coverage draw.
pub fn apply_drift(
    event: &DriftEvent,
    included: bool,
    real: &RealState,
) -> (RealState, Option<ChannelEffect>) {
    let (Some(target), Some(status)) = (&event.target, event.kind.real_effect()) else {
        return (real.at_tick(event.step), None);
    };
    let prior = real.get(target).unwrap_or(Status::Valid);
    let next = real
        .with_status(target, status)
        .unwrap_or_else(|_| real.clone())
        .at_tick(event.step);
    let change = match (event.kind, included) {
        (DriftKind::Hidden, _) => ChannelChange::Mask,
        (DriftKind::Delayed, true) => ChannelChange::Delay,
        (_, true) => ChannelChange::Reveal,
        (_, false) => ChannelChange::Drop,
    };
    let effect = ChannelEffect {
        target: target.clone(),
        change,
        step: event.step,
        prior,
    };
    (next, Some(effect))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum View {
    Current,
    /// Shows `shown` (or nothing) until `until`, then the current value.
    Lagging { shown: Option<Status>, until: Tick },
    Dropped,
}

/// One attestable observation channel and its per-component lag state.
#[derive(Debug, Clone)]
pub struct ProvableChannel {
    universe: Universe,
    lag: u64,
    views: BTreeMap<ComponentId, View>,
    masked: BTreeSet<ComponentId>,
}

impl ProvableChannel {
    /// Channel over every component of `universe` except the hidden ones.
    pub fn new(universe: &Universe, lag: u64) -> Self {
        let hidden = hidden_components();
        let views = universe
            .iter()
            .filter(|id| !hidden.contains(*id))
            .map(|id| (id.clone(), View::Current))
            .collect();
        Self {
            universe: universe.clone(),
            lag,
            views,
            masked: BTreeSet::new(),
        }
    }

    pub fn apply(&mut self, effect: &ChannelEffect) {
        let id = &effect.target;
        if effect.change == ChannelChange::Mask {
            self.masked.insert(id.clone());
            self.views.remove(id);
            return;
        }
        if self.masked.contains(id) {
            return;
        }
        let Some(view) = self.views.get_mut(id) else {
            return;
        };
        let already_shown = *view == View::Current && effect.prior != Status::Valid;
        let ready = effect.step + self.lag;
        *view = match (effect.change, *view) {
            (ChannelChange::Reveal, _) => View::Current,
            (ChannelChange::Delay, _) if already_shown => View::Current,
            (ChannelChange::Delay, View::Lagging { shown, until }) => View::Lagging {
                shown,
                until: until.min(ready),
            },
            (ChannelChange::Delay, View::Current) => View::Lagging {
                shown: Some(effect.prior),
                until: ready,
            },
            (ChannelChange::Delay, View::Dropped) => View::Lagging {
                shown: None,
                until: ready,
            },
            (ChannelChange::Drop, View::Current) if !already_shown => View::Dropped,
            (ChannelChange::Drop, v) => v,
            (ChannelChange::Mask, _) => unreachable!("handled above"),
        };
    }

    /// What the channel carries at `real.at()`.
    pub fn observe(&self, real: &RealState) -> ProvableState {
        let now = real.at();
        let mut visible = BTreeSet::new();
        let mut distortions = BTreeMap::new();
        for (id, view) in &self.views {
            match *view {
                View::Current => {
                    visible.insert(id.clone());
                }
                View::Lagging { until, .. } if now >= until => {
                    visible.insert(id.clone());
                }
                View::Lagging { shown: Some(s), .. } => {
                    visible.insert(id.clone());
                    distortions.insert(id.clone(), Distortion::Stale(s));
                }
                View::Lagging { shown: None, .. } | View::Dropped => {}
            }
        }
        project(&self.universe, real, &visible, &distortions)
            .expect("channel components are drawn from the universe")
    }

    pub fn masked(&self) -> &BTreeSet<ComponentId> {
        &self.masked
    }
}

/// Fresh observation available to the reconstruction gate.
///
/// Every component is read at its current true value, except components
/// that a hidden drift has touched, which read as `Undefined`.
pub fn ram_observe(real: &RealState, history: &[DriftEvent]) -> BTreeMap<ComponentId, Status> {
    let unresolved: BTreeSet<&ComponentId> = history
        .iter()
        .filter(|e| e.kind == DriftKind::Hidden && e.step <= real.at())
        .filter_map(|e| e.target.as_ref())
        .collect();
    real.components()
        .iter()
        .map(|(id, s)| {
            let seen = if unresolved.contains(id) { Status::Undefined } else { *s };
            (id.clone(), seen)
        })
        .collect()
}

/// [`ram_observe`] sealed as a provable state.
pub fn ram_observation(universe: &Universe, real: &RealState, history: &[DriftEvent]) -> ProvableState {
    let distortions: BTreeMap<ComponentId, Distortion> = history
        .iter()
        .filter(|e| e.kind == DriftKind::Hidden && e.step <= real.at())
        .filter_map(|e| e.target.clone())
        .map(|id| (id, Distortion::Masked))
        .collect();
    project(universe, real, universe.ids(), &distortions)
        .expect("hidden targets are drawn from the universe")
}
