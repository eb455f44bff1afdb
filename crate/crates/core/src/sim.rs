//! Paired simulation of the attestation, oracle-extended and reconstruction
//! models over identical drift traces, with IER/SHR/OCR metrics and a
//! coverage sweep.
//!
//! Steps are grouped into episodes. Each episode starts from an all-valid
//! world, takes the admission snapshot, then drifts for `episode_length`
//! steps without recovery.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baseline::{
    decide_attestation, decide_oracle, merged_view, AdmissionSnapshot, BaselineDecision, BaselineError,
    OracleChannel,
};
use crate::drift::{
    apply_drift, hidden_components, ram_observation, sample_inclusion, sample_step, DriftConfig,
    DriftError, DriftEvent, DriftRng, ProvableChannel,
};
use crate::exec::{map_range, map_reduce, Schedule};
use crate::gate::{gate_step, ActionClass, GateError, ReasonCode};
use crate::state::{
    build_envelope, components, project, ComponentId, CoverageEnvelope, ProvableState, RealState,
    StateError, Status, Tick, Universe,
};

pub const DEFAULT_EPISODE_LENGTH: u64 = 4;
pub const DEFAULT_LAG: u64 = 2;
pub const DEFAULT_STEPS: u64 = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Drift(#[from] DriftError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("episode length must be at least 1")]
    EpisodeLength,
    #[error("step count must be at least 1")]
    Steps,
    #[error("coverage grid must be non-empty, strictly increasing and within [0, 1]")]
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Attestation,
    Oracle,
    Ram,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Attestation, ModelKind::Oracle, ModelKind::Ram];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Attestation => "attestation",
            ModelKind::Oracle => "oracle",
            ModelKind::Ram => "ram",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSet {
    pub attestation: bool,
    pub oracle: bool,
    pub ram: bool,
}

impl Default for ModelSet {
    fn default() -> Self {
        Self {
            attestation: true,
            oracle: true,
            ram: true,
        }
    }
}

impl ModelSet {
    pub fn contains(&self, m: ModelKind) -> bool {
        match m {
            ModelKind::Attestation => self.attestation,
            ModelKind::Oracle => self.oracle,
            ModelKind::Ram => self.ram,
        }
    }

    pub fn enabled(&self) -> impl Iterator<Item = ModelKind> + '_ {
        ModelKind::ALL.into_iter().filter(|m| self.contains(*m))
    }
}

/// What one model did at one step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum Decision {
    Executed { privileges: Vec<String> },
    Halted { reason: ReasonCode },
}

impl Decision {
    pub fn executed(&self) -> bool {
        matches!(self, Decision::Executed { .. })
    }

    pub fn label(&self) -> String {
        match self {
            Decision::Executed { privileges } => format!("executed:{}", privileges.join("+")),
            Decision::Halted { reason } => format!("halted:{reason}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: Tick,
    pub episode: u64,
    pub event: DriftEvent,
    /// Ground-truth authority: every component valid.
    pub a_r: bool,
    pub decisions: [Option<Decision>; 3],
}

impl StepRecord {
    pub fn decision(&self, m: ModelKind) -> Option<&Decision> {
        self.decisions[m.index()].as_ref()
    }
}

/// Envelope content as written to the audit log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvelopeSummary {
    pub proven: BTreeMap<ComponentId, Status>,
    pub residual: BTreeSet<ComponentId>,
    pub assumptions: BTreeMap<ComponentId, Status>,
}

impl EnvelopeSummary {
    pub fn of(envelope: &CoverageEnvelope) -> Self {
        Self {
            proven: envelope.proven().entries().clone(),
            residual: envelope.residual().clone(),
            assumptions: envelope.assumptions().clone(),
        }
    }

    fn of_entries(universe: &Universe, entries: &BTreeMap<ComponentId, Status>) -> Self {
        Self {
            proven: entries.clone(),
            residual: universe
                .iter()
                .filter(|id| !entries.contains_key(*id))
                .cloned()
                .collect(),
            assumptions: BTreeMap::new(),
        }
    }

    /// Rebuilds a sealed envelope from the summary.
    pub fn to_envelope(&self, universe: &Universe, at: Tick) -> Result<CoverageEnvelope, StateError> {
        build_envelope(
            universe,
            ProvableState::capture(at, self.proven.clone()),
            self.assumptions.clone(),
        )
    }
}

/// One audit log line. Written after the decision; never read back by the
/// decision path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub step: Tick,
    pub model: ModelKind,
    /// `execute`, `narrow`, `refuse_definitive`, `halt_insufficient` or
    /// `attestation_failure` for the gate; `proceed` or `halt` for baselines.
    pub verdict: String,
    pub reason: ReasonCode,
    pub envelope: EnvelopeSummary,
}

/// Validated simulation setup.
#[derive(Debug, Clone)]
pub struct Scenario {
    universe: Universe,
    drift: DriftConfig,
    models: ModelSet,
    ram_class: ActionClass,
    oracle: OracleChannel,
    episode_length: u64,
}

impl Scenario {
    pub fn new(
        universe: Universe,
        drift: DriftConfig,
        models: ModelSet,
        ram_class: ActionClass,
        oracle: OracleChannel,
        episode_length: u64,
    ) -> Result<Self, SimError> {
        drift.validate()?;
        for name in components::ALL {
            universe.id(name)?;
        }
        for id in ram_class.required_components() {
            universe.id(id.as_str())?;
        }
        universe.check(oracle.extra_visible())?;
        if episode_length == 0 {
            return Err(SimError::EpisodeLength);
        }
        Ok(Self {
            universe,
            drift,
            models,
            ram_class,
            oracle,
            episode_length,
        })
    }

    /// Five-component universe, one privilege requiring all five, oracle over
    /// `{C, R}` with lag 2, episodes of four steps.
    pub fn standard(drift: DriftConfig) -> Result<Self, SimError> {
        let universe = Universe::five_component();
        let class = ActionClass::single("execute", components::ALL)?;
        let oracle = OracleChannel::new(
            [components::C, components::R].into_iter().map(ComponentId::new).collect(),
            DEFAULT_LAG,
            &hidden_components(),
        )?;
        Self::new(universe, drift, ModelSet::default(), class, oracle, DEFAULT_EPISODE_LENGTH)
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn drift(&self) -> &DriftConfig {
        &self.drift
    }

    pub fn models(&self) -> ModelSet {
        self.models
    }

    pub fn ram_class(&self) -> &ActionClass {
        &self.ram_class
    }

    pub fn oracle(&self) -> &OracleChannel {
        &self.oracle
    }

    pub fn episode_length(&self) -> u64 {
        self.episode_length
    }

    pub fn with_coverage(&self, coverage: f64) -> Result<Self, SimError> {
        let mut next = self.clone();
        next.drift.coverage = coverage;
        next.drift.validate()?;
        Ok(next)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        let mut next = self.clone();
        next.drift.seed = seed;
        next
    }

    pub fn with_models(&self, models: ModelSet) -> Self {
        let mut next = self.clone();
        next.models = models;
        next
    }

    /// True when the gate's class requires every component of the universe,
    /// the condition under which it can never execute an invalid step.
    pub fn ram_class_is_complete(&self) -> bool {
        self.ram_class.privileges().all(|p| p.requires() == self.universe.ids())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EpisodeOutput {
    pub records: Vec<StepRecord>,
    pub audit: Vec<AuditRecord>,
}

fn baseline_decision(d: BaselineDecision, class: &ActionClass) -> Decision {
    match d {
        BaselineDecision::Proceed => Decision::Executed {
            privileges: class.names().map(str::to_owned).collect(),
        },
        BaselineDecision::Halt(reason) => Decision::Halted { reason },
    }
}

fn baseline_verdict(d: BaselineDecision) -> &'static str {
    if d.proceeds() {
        "proceed"
    } else {
        "halt"
    }
}

/// Runs one episode of `length` steps starting at global step `start`.
///
/// The drift stream is `(seed, stream_id(point, episode))`, so the trace
/// depends only on those coordinates.
pub fn run_episode(
    scenario: &Scenario,
    point: u32,
    episode: u64,
    start: Tick,
    length: u64,
    audit: bool,
) -> Result<EpisodeOutput, SimError> {
    let universe = &scenario.universe;
    let cfg = &scenario.drift;
    let class = &scenario.ram_class;
    let lag = scenario.oracle.propagation_lag();
    let mut rng = DriftRng::new(cfg.seed, DriftRng::stream_id(point, episode));

    let mut real = RealState::all_valid(universe, start);
    let mut channel = ProvableChannel::new(universe, lag);
    let snapshot = AdmissionSnapshot {
        proven_at_admission: channel.observe(&real),
        admitted_class: class.clone(),
    };
    let admission_real = real.clone();
    let mut lagged: VecDeque<RealState> = VecDeque::with_capacity(lag as usize + 1);
    let mut events: Vec<DriftEvent> = Vec::with_capacity(length as usize);
    let mut out = EpisodeOutput {
        records: Vec::with_capacity(length as usize),
        audit: Vec::new(),
    };

    for k in 0..length {
        let t = start + k;
        let event = sample_step(cfg, &mut rng, t);
        let included = sample_inclusion(&event, cfg.coverage, &mut rng);
        let (next, effect) = apply_drift(&event, included, &real);
        real = next;
        if let Some(e) = &effect {
            channel.apply(e);
        }
        events.push(event.clone());
        lagged.push_back(real.clone());
        if lagged.len() > lag as usize + 1 {
            lagged.pop_front();
        }

        let a_r = real.all_components_valid();
        let mut decisions: [Option<Decision>; 3] = [None, None, None];

        let current = if scenario.models.attestation || scenario.models.oracle {
            Some(channel.observe(&real))
        } else {
            None
        };

        if scenario.models.attestation {
            let current = current.as_ref().expect("observed above");
            let d = decide_attestation(&snapshot, current);
            decisions[ModelKind::Attestation.index()] = Some(baseline_decision(d, class));
            if audit {
                out.audit.push(AuditRecord {
                    step: t,
                    model: ModelKind::Attestation,
                    verdict: baseline_verdict(d).into(),
                    reason: d.reason_code(),
                    envelope: EnvelopeSummary::of_entries(universe, current.entries()),
                });
            }
        }

        if scenario.models.oracle {
            let current = current.as_ref().expect("observed above");
            // State as of `t - lag`; the admission state before the episode.
            let source = if k >= lag {
                &lagged[lagged.len() - 1 - lag as usize]
            } else {
                &admission_real
            };
            let view = project(universe, source, scenario.oracle.extra_visible(), &BTreeMap::new())?;
            let d = decide_oracle(&snapshot, current, &scenario.oracle, &view)?;
            decisions[ModelKind::Oracle.index()] = Some(baseline_decision(d, class));
            if audit {
                let merged = merged_view(current, &view);
                out.audit.push(AuditRecord {
                    step: t,
                    model: ModelKind::Oracle,
                    verdict: baseline_verdict(d).into(),
                    reason: d.reason_code(),
                    envelope: EnvelopeSummary::of_entries(universe, &merged),
                });
            }
        }

        if scenario.models.ram {
            let mut seen: Option<CoverageEnvelope> = None;
            let result = gate_step(
                || {
                    let proven = ram_observation(universe, &real, &events);
                    let env = build_envelope(universe, proven, BTreeMap::new())
                        .expect("gate observation is drawn from the universe");
                    seen = Some(env.clone());
                    env
                },
                ProvableState::verify,
                class,
            );
            let (decision, verdict, reason) = match result {
                Ok(outcome) => {
                    let reason = outcome.verdict.reason_code();
                    let verdict = outcome.verdict.kind().as_str();
                    let d = match outcome.verdict.granted() {
                        Some(c) => Decision::Executed {
                            privileges: c.names().map(str::to_owned).collect(),
                        },
                        None => Decision::Halted { reason },
                    };
                    (d, verdict, reason)
                }
                Err(GateError::AttestationFailure) => (
                    Decision::Halted {
                        reason: ReasonCode::AttestationFailure,
                    },
                    "attestation_failure",
                    ReasonCode::AttestationFailure,
                ),
                Err(e) => return Err(e.into()),
            };
            decisions[ModelKind::Ram.index()] = Some(decision);
            if audit {
                let env = seen.expect("observe runs inside gate_step");
                out.audit.push(AuditRecord {
                    step: t,
                    model: ModelKind::Ram,
                    verdict: verdict.into(),
                    reason,
                    envelope: EnvelopeSummary::of(&env),
                });
            }
        }

        out.records.push(StepRecord {
            step: t,
            episode,
            event,
            a_r,
            decisions,
        });
    }
    Ok(out)
}

fn episode_bounds(scenario: &Scenario, n: u64) -> (u64, impl Fn(u64) -> (Tick, u64) + Sync + Send) {
    let len = scenario.episode_length;
    let episodes = n.div_ceil(len);
    (episodes, move |e| {
        let start = e * len;
        (start, len.min(n - start))
    })
}

/// Runs `n` steps at the scenario's coverage as grid point `point`.
pub fn simulate(
    scenario: &Scenario,
    n: u64,
    point: u32,
    schedule: Schedule,
    audit: bool,
) -> Result<EpisodeOutput, SimError> {
    if n == 0 {
        return Err(SimError::Steps);
    }
    let (episodes, bounds) = episode_bounds(scenario, n);
    let parts = map_range(schedule, 0..episodes, |e| {
        let (start, len) = bounds(e);
        run_episode(scenario, point, e, start, len, audit)
    });
    let mut out = EpisodeOutput::default();
    for part in parts {
        let part = part?;
        out.records.extend(part.records);
        out.audit.extend(part.audit);
    }
    Ok(out)
}

/// An exact rate `num / den`. `den == 0` is the undefined marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rate {
    pub num: u64,
    pub den: u64,
}

impl Rate {
    pub fn value(self) -> Option<f64> {
        (self.den > 0).then(|| self.num as f64 / self.den as f64)
    }

    pub fn is_undefined(self) -> bool {
        self.den == 0
    }
}

impl Serialize for Rate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.value().serialize(s)
    }
}

/// Raw counts for one model. Additive across episodes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Counts {
    pub steps: u64,
    pub executions: u64,
    pub halts: u64,
    pub invalid_executions: u64,
    pub halts_on_false: u64,
    pub halts_on_true: u64,
    pub a_r_false: u64,
    pub a_r_true: u64,
}

impl Counts {
    pub fn record(&mut self, a_r: bool, executed: bool) {
        self.steps += 1;
        if a_r {
            self.a_r_true += 1;
        } else {
            self.a_r_false += 1;
        }
        match (executed, a_r) {
            (true, true) => self.executions += 1,
            (true, false) => {
                self.executions += 1;
                self.invalid_executions += 1;
            }
            (false, true) => {
                self.halts += 1;
                self.halts_on_true += 1;
            }
            (false, false) => {
                self.halts += 1;
                self.halts_on_false += 1;
            }
        }
    }

    pub fn merge(mut self, o: Counts) -> Counts {
        self.steps += o.steps;
        self.executions += o.executions;
        self.halts += o.halts;
        self.invalid_executions += o.invalid_executions;
        self.halts_on_false += o.halts_on_false;
        self.halts_on_true += o.halts_on_true;
        self.a_r_false += o.a_r_false;
        self.a_r_true += o.a_r_true;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Metrics {
    pub ier: Rate,
    pub shr: Rate,
    pub ocr: Rate,
    pub counts: Counts,
}

impl From<Counts> for Metrics {
    fn from(c: Counts) -> Self {
        Self {
            ier: Rate {
                num: c.invalid_executions,
                den: c.executions,
            },
            shr: Rate {
                num: c.halts_on_false,
                den: c.a_r_false,
            },
            ocr: Rate {
                num: c.halts_on_true,
                den: c.a_r_true,
            },
            counts: c,
        }
    }
}

fn tally(records: &[StepRecord], model: ModelKind) -> Counts {
    let mut c = Counts::default();
    for r in records {
        if let Some(d) = r.decision(model) {
            c.record(r.a_r, d.executed());
        }
    }
    c
}

/// IER, SHR and OCR for `model` over `records`. Steps where the model was
/// disabled are skipped.
pub fn compute_metrics(records: &[StepRecord], model: ModelKind) -> Metrics {
    tally(records, model).into()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub coverage: f64,
    pub metrics: BTreeMap<ModelKind, Metrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub grid: Vec<f64>,
    pub points: Vec<SweepPoint>,
    pub n: u64,
    pub seed: u64,
}

/// `0.1, 0.2, …, 1.0`.
pub fn default_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

pub fn validate_grid(grid: &[f64]) -> Result<(), SimError> {
    let in_range = grid.iter().all(|c| (0.0..=1.0).contains(c));
    let increasing = grid.windows(2).all(|w| w[0] < w[1]);
    if grid.is_empty() || !in_range || !increasing {
        return Err(SimError::Grid);
    }
    Ok(())
}

/// Metrics for the scenario at coverage `grid[point]`, streamed without
/// retaining step records.
pub fn sweep_point(
    scenario: &Scenario,
    point: u32,
    n: u64,
    schedule: Schedule,
) -> Result<[Counts; 3], SimError> {
    if n == 0 {
        return Err(SimError::Steps);
    }
    let (episodes, bounds) = episode_bounds(scenario, n);
    map_reduce(
        schedule,
        0..episodes,
        Ok([Counts::default(); 3]),
        |e| {
            let (start, len) = bounds(e);
            let out = run_episode(scenario, point, e, start, len, false)?;
            Ok(ModelKind::ALL.map(|m| tally(&out.records, m)))
        },
        |a: Result<[Counts; 3], SimError>, b| {
            let (a, b) = (a?, b?);
            Ok([a[0].merge(b[0]), a[1].merge(b[1]), a[2].merge(b[2])])
        },
    )
}

/// Runs `n` steps at each coverage in `grid`. Each grid point draws from its
/// own streams; models are paired within a point.
pub fn coverage_sweep(
    scenario: &Scenario,
    grid: &[f64],
    n: u64,
    schedule: Schedule,
) -> Result<SweepResult, SimError> {
    validate_grid(grid)?;
    if n == 0 {
        return Err(SimError::Steps);
    }
    let per_point = map_range(schedule, 0..grid.len() as u64, |i| {
        let sc = scenario.with_coverage(grid[i as usize])?;
        sweep_point(&sc, i as u32, n, schedule)
    });
    let mut points = Vec::with_capacity(grid.len());
    for (coverage, counts) in grid.iter().zip(per_point) {
        let counts = counts?;
        let metrics = scenario
            .models
            .enabled()
            .map(|m| (m, Metrics::from(counts[m.index()])))
            .collect();
        points.push(SweepPoint {
            coverage: *coverage,
            metrics,
        });
    }
    Ok(SweepResult {
        grid: grid.to_vec(),
        points,
        n,
        seed: scenario.drift.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::DriftKind;

    fn scenario(p_drift: f64, coverage: f64) -> Scenario {
        Scenario::standard(DriftConfig {
            p_drift,
            coverage,
            ..Default::default()
        })
        .unwrap()
    }

    fn halted(reason: ReasonCode) -> Decision {
        Decision::Halted { reason }
    }

    fn exec() -> Decision {
        Decision::Executed {
            privileges: vec!["execute".into()],
        }
    }

    fn rec(step: Tick, a_r: bool, d: Decision) -> StepRecord {
        StepRecord {
            step,
            episode: 0,
            event: DriftEvent::none(step),
            a_r,
            decisions: [Some(d), None, None],
        }
    }

    #[test]
    fn no_drift_everyone_executes() {
        let sc = scenario(0.0, 0.5);
        let out = simulate(&sc, 200, 0, Schedule::Sequential, false).unwrap();
        assert_eq!(out.records.len(), 200);
        for r in &out.records {
            assert!(r.a_r);
            for m in ModelKind::ALL {
                assert!(r.decision(m).unwrap().executed(), "{m} halted at {}", r.step);
            }
        }
    }

    #[test]
    fn hand_trace_metrics() {
        // 10 steps: 3 invalid executions, 1 valid execution, 2 halts on
        // a_r=false, 4 halts on a_r=true.
        let mut records = Vec::new();
        let h = halted(ReasonCode::AdmissionMismatch);
        for (i, (a_r, d)) in [
            (false, exec()),
            (false, exec()),
            (false, exec()),
            (true, exec()),
            (false, h.clone()),
            (false, h.clone()),
            (true, h.clone()),
            (true, h.clone()),
            (true, h.clone()),
            (true, h),
        ]
        .into_iter()
        .enumerate()
        {
            records.push(rec(i as Tick, a_r, d));
        }
        let m = compute_metrics(&records, ModelKind::Attestation);
        assert_eq!(m.ier, Rate { num: 3, den: 4 });
        assert_eq!(m.ier.value(), Some(0.75));
        assert_eq!(m.shr, Rate { num: 2, den: 5 });
        assert_eq!(m.shr.value(), Some(0.4));
        assert_eq!(m.ocr.value(), Some(0.8));
        assert_eq!(m.counts.executions, 4);
        assert_eq!(m.counts.halts, 6);
    }

    #[test]
    fn empty_denominators_are_undefined() {
        let records = vec![rec(0, true, exec()), rec(1, true, exec())];
        let m = compute_metrics(&records, ModelKind::Attestation);
        assert!(m.shr.is_undefined());
        assert_eq!(m.shr.value(), None);
        assert_eq!(m.ier.value(), Some(0.0));
        // Disabled model: nothing counted at all.
        assert!(compute_metrics(&records, ModelKind::Ram).ier.is_undefined());
    }

    #[test]
    fn ram_is_never_wrong_under_the_ground_truth_rule() {
        let sc = scenario(0.5, 0.3);
        let out = simulate(&sc, 4000, 0, Schedule::Sequential, false).unwrap();
        let m = compute_metrics(&out.records, ModelKind::Ram);
        assert_eq!(m.ier.num, 0);
        assert_eq!(m.shr.num, m.shr.den);
        assert_eq!(m.ocr.num, 0);
    }

    #[test]
    fn single_hidden_event_fools_attestation_only() {
        let sc = scenario(0.0, 1.0);
        // Drive one episode by hand through the same primitives.
        let u = sc.universe().clone();
        let real = RealState::all_valid(&u, 0);
        let mut ch = ProvableChannel::new(&u, 2);
        let snap = AdmissionSnapshot {
            proven_at_admission: ch.observe(&real),
            admitted_class: sc.ram_class().clone(),
        };
        let e = DriftEvent::new(1, DriftKind::Hidden, "E").unwrap();
        let (next, eff) = apply_drift(&e, false, &real);
        ch.apply(&eff.unwrap());
        assert!(!next.all_components_valid());
        assert!(decide_attestation(&snap, &ch.observe(&next)).proceeds());
        let env = build_envelope(&u, ram_observation(&u, &next, &[e]), BTreeMap::new()).unwrap();
        let out = crate::gate::evaluate_gate(&env, sc.ram_class()).unwrap();
        assert_eq!(out.verdict, crate::gate::Verdict::HaltInsufficient);
        assert_eq!(out.verdict.reason_code().as_str(), "authority_not_constructible");
    }

    #[test]
    fn observable_event_at_full_coverage_halts_everyone() {
        let sc = scenario(1.0, 1.0);
        let sc = Scenario::new(
            sc.universe().clone(),
            DriftConfig {
                p_drift: 1.0,
                mix: [1.0, 0.0, 0.0, 0.0],
                coverage: 1.0,
                seed: 3,
            },
            ModelSet::default(),
            sc.ram_class().clone(),
            sc.oracle().clone(),
            1,
        )
        .unwrap();
        let out = simulate(&sc, 50, 0, Schedule::Sequential, false).unwrap();
        for r in &out.records {
            assert_eq!(r.event.kind, DriftKind::Observable);
            for m in ModelKind::ALL {
                assert!(!r.decision(m).unwrap().executed());
            }
        }
    }

    #[test]
    fn oracle_never_executes_more_invalid_steps() {
        for c in [0.1, 0.5, 0.9] {
            let sc = scenario(0.5, c);
            let out = simulate(&sc, 5000, 0, Schedule::Sequential, false).unwrap();
            for r in &out.records {
                if r.decision(ModelKind::Oracle).unwrap().executed() {
                    assert!(r.decision(ModelKind::Attestation).unwrap().executed());
                }
            }
        }
    }

    #[test]
    fn audit_replay_reproduces_gate_verdicts() {
        let sc = scenario(0.6, 0.4);
        let out = simulate(&sc, 400, 0, Schedule::Sequential, true).unwrap();
        let ram: Vec<_> = out.audit.iter().filter(|a| a.model == ModelKind::Ram).collect();
        assert_eq!(ram.len(), 400);
        for a in ram {
            let env = a.envelope.to_envelope(sc.universe(), a.step).unwrap();
            let replay = crate::gate::evaluate_gate(&env, sc.ram_class()).unwrap();
            assert_eq!(replay.verdict.kind().as_str(), a.verdict);
            assert_eq!(replay.verdict.reason_code(), a.reason);
        }
    }

    #[test]
    fn truncated_final_episode() {
        let sc = scenario(0.5, 0.5);
        let out = simulate(&sc, 10, 0, Schedule::Parallel, false).unwrap();
        let steps: Vec<Tick> = out.records.iter().map(|r| r.step).collect();
        assert_eq!(steps, (0..10).collect::<Vec<_>>());
        assert_eq!(out.records.last().unwrap().episode, 2);
    }

    #[test]
    fn sweep_matches_materialized_records() {
        let sc = scenario(0.5, 0.7);
        let counts = sweep_point(&sc, 0, 999, Schedule::Parallel).unwrap();
        let out = simulate(&sc, 999, 0, Schedule::Sequential, false).unwrap();
        for m in ModelKind::ALL {
            assert_eq!(counts[m as usize], compute_metrics(&out.records, m).counts);
        }
    }

    #[test]
    fn grid_validation() {
        assert!(validate_grid(&default_grid()).is_ok());
        assert!(validate_grid(&[]).is_err());
        assert!(validate_grid(&[0.2, 0.2]).is_err());
        assert!(validate_grid(&[0.5, 1.2]).is_err());
    }

    #[test]
    fn zero_steps_rejected() {
        let sc = scenario(0.5, 0.5);
        assert_eq!(simulate(&sc, 0, 0, Schedule::Sequential, false).unwrap_err(), SimError::Steps);
    }

    #[test]
    fn scenario_requires_the_drift_targets() {
        let sc = scenario(0.5, 0.5);
        let err = Scenario::new(
            Universe::new(["I", "B", "R", "C"]).unwrap(),
            DriftConfig::default(),
            ModelSet::default(),
            ActionClass::single("x", ["I"]).unwrap(),
            sc.oracle().clone(),
            4,
        )
        .unwrap_err();
        assert!(matches!(err, SimError::State(StateError::UnknownComponent(_))));
    }
}
