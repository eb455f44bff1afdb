//! Scripted transfer scenario: a transfer admitted at `t0`, drift before
//! execution at `t1`, and the three models' decisions.
//!
//! Component mapping: `I` identity (IP / geolocation), `B` behavior, `R`
//! regulatory status, `C` transactional context, `E` emergent cross-session
//! signals.
//!
//! Case B is run as several variants because the oracle's outcome depends on
//! whether the signal is inside its model and whether it has propagated.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::baseline::{decide_attestation, decide_oracle, AdmissionSnapshot, OracleChannel};
use crate::drift::{
    hidden_components, ram_observation, ChannelChange, ChannelEffect, DriftEvent, DriftKind,
    ProvableChannel,
};
use crate::gate::{gate_step, ActionClass, VerdictKind};
use crate::sim::{ModelKind, DEFAULT_LAG};
use crate::state::{
    build_envelope, components, project, ComponentId, ProvableState, RealState, Status, Tick,
    Universe,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseId {
    /// IP change inside the provable channel.
    CaseA,
    /// Drift outside the provable channel.
    CaseB,
    /// IP change that is legitimate; nothing is actually wrong.
    EdgeLegitimate,
}

impl CaseId {
    pub fn title(self) -> &'static str {
        match self {
            CaseId::CaseA => "Case A (observable drift)",
            CaseId::CaseB => "Case B (hidden drift)",
            CaseId::EdgeLegitimate => "Edge case (legitimate change)",
        }
    }
}

struct Injection {
    target: &'static str,
    status: Status,
    change: ChannelChange,
}

struct Script {
    name: &'static str,
    injections: Vec<Injection>,
    oracle_extra: &'static [&'static str],
    decide_at: Tick,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelDecision {
    pub model: ModelKind,
    pub executes: bool,
    /// Gate verdict or baseline decision.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VariantReport {
    pub name: String,
    pub a_r: bool,
    pub decisions: Vec<ModelDecision>,
}

impl VariantReport {
    pub fn decision(&self, m: ModelKind) -> &ModelDecision {
        self.decisions
            .iter()
            .find(|d| d.model == m)
            .expect("every variant records all three models")
    }
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub case: CaseId,
    pub model: ModelKind,
    /// `Yes`, `No`, or `Yes (in many cases)` when only some variants execute.
    pub executes: String,
    /// `Yes` iff every variant's execute/halt matches ground truth.
    pub correct: String,
    pub failure_mode: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseReport {
    pub case: CaseId,
    pub variants: Vec<VariantReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseStudyReport {
    pub cases: Vec<CaseReport>,
    pub table: Vec<TableRow>,
}

impl CaseStudyReport {
    pub fn row(&self, case: CaseId, model: ModelKind) -> Option<&TableRow> {
        self.table.iter().find(|r| r.case == case && r.model == model)
    }
}

fn scripts(case: CaseId) -> Vec<Script> {
    use components::{E, I, R};
    match case {
        CaseId::CaseA => vec![Script {
            name: "ip_change_in_provable_state",
            injections: vec![Injection {
                target: I,
                status: Status::Invalid,
                change: ChannelChange::Reveal,
            }],
            oracle_extra: &[components::C, R],
            decide_at: 1,
        }],
        CaseId::CaseB => vec![
            Script {
                name: "cross_session_signal_and_pending_alert",
                injections: vec![
                    Injection {
                        target: E,
                        status: Status::Invalid,
                        change: ChannelChange::Mask,
                    },
                    // An alert of a possible restriction: present, not classifiable.
                    Injection {
                        target: R,
                        status: Status::Undefined,
                        change: ChannelChange::Drop,
                    },
                ],
                oracle_extra: &[components::C, R],
                decide_at: 1,
            },
            Script {
                name: "cross_session_signal_only",
                injections: vec![Injection {
                    target: E,
                    status: Status::Invalid,
                    change: ChannelChange::Mask,
                }],
                oracle_extra: &[components::C, R],
                decide_at: 1,
            },
            Script {
                name: "restriction_outside_oracle_model",
                injections: vec![Injection {
                    target: R,
                    status: Status::Invalid,
                    change: ChannelChange::Drop,
                }],
                oracle_extra: &[components::C],
                decide_at: 1,
            },
            Script {
                name: "restriction_propagated_to_oracle",
                injections: vec![Injection {
                    target: R,
                    status: Status::Invalid,
                    change: ChannelChange::Drop,
                }],
                oracle_extra: &[components::C, R],
                decide_at: 1 + DEFAULT_LAG,
            },
        ],
        CaseId::EdgeLegitimate => vec![Script {
            name: "legitimate_ip_change",
            injections: vec![Injection {
                target: I,
                status: Status::Valid,
                change: ChannelChange::Reveal,
            }],
            oracle_extra: &[components::C, R],
            decide_at: 1,
        }],
    }
}

fn run_script(script: &Script) -> VariantReport {
    let universe = Universe::five_component();
    let class = ActionClass::single("transfer_10000", components::ALL).expect("static class");
    let oracle = OracleChannel::new(
        script.oracle_extra.iter().map(ComponentId::new).collect(),
        DEFAULT_LAG,
        &hidden_components(),
    )
    .expect("oracle never carries hidden components");

    let admitted = RealState::all_valid(&universe, 0);
    let mut channel = ProvableChannel::new(&universe, DEFAULT_LAG);
    let snapshot = AdmissionSnapshot {
        proven_at_admission: channel.observe(&admitted),
        admitted_class: class.clone(),
    };

    // Drift lands at step 1 and persists.
    let mut drifted = admitted.at_tick(1);
    let mut events = Vec::new();
    for inj in &script.injections {
        let id = ComponentId::new(inj.target);
        let prior = drifted.get(&id).expect("universe component");
        drifted = drifted.with_status(&id, inj.status).expect("universe component");
        channel.apply(&ChannelEffect {
            target: id,
            change: inj.change,
            step: 1,
            prior,
        });
        if inj.change == ChannelChange::Mask {
            events.extend(DriftEvent::new(1, DriftKind::Hidden, inj.target));
        }
    }
    let now = drifted.at_tick(script.decide_at);
    let a_r = now.all_components_valid();

    let current = channel.observe(&now);
    let att = decide_attestation(&snapshot, &current);

    let source = if script.decide_at > DEFAULT_LAG { &now } else { &admitted };
    let view = project(&universe, source, oracle.extra_visible(), &BTreeMap::new())
        .expect("oracle components are registered");
    let ora = decide_oracle(&snapshot, &current, &oracle, &view).expect("view within scope");

    let ram = gate_step(
        || {
            build_envelope(&universe, ram_observation(&universe, &now, &events), BTreeMap::new())
                .expect("observation is drawn from the universe")
        },
        ProvableState::verify,
        &class,
    );
    let (ram_exec, ram_detail) = match ram {
        Ok(o) => (o.verdict.granted().is_some(), o.verdict.kind().as_str().to_owned()),
        Err(e) => (false, e.to_string()),
    };

    VariantReport {
        name: script.name.to_owned(),
        a_r,
        decisions: vec![
            ModelDecision {
                model: ModelKind::Attestation,
                executes: att.proceeds(),
                detail: att.reason_code().as_str().to_owned(),
            },
            ModelDecision {
                model: ModelKind::Oracle,
                executes: ora.proceeds(),
                detail: ora.reason_code().as_str().to_owned(),
            },
            ModelDecision {
                model: ModelKind::Ram,
                executes: ram_exec,
                detail: ram_detail,
            },
        ],
    }
}

fn summarize(case: CaseId, variants: &[VariantReport], model: ModelKind) -> TableRow {
    let total = variants.len();
    let executing = variants.iter().filter(|v| v.decision(model).executes).count();
    let wrong: Vec<&str> = variants
        .iter()
        .filter(|v| v.decision(model).executes != v.a_r)
        .map(|v| v.name.as_str())
        .collect();
    let executes = match executing {
        0 => "No".to_owned(),
        n if n == total => "Yes".to_owned(),
        _ => "Yes (in many cases)".to_owned(),
    };
    let correct = if wrong.is_empty() { "Yes" } else { "No" }.to_owned();
    let failure_mode = if wrong.is_empty() {
        "none".to_owned()
    } else {
        format!("wrong in {}/{}: {}", wrong.len(), total, wrong.join(", "))
    };
    TableRow {
        case,
        model,
        executes,
        correct,
        failure_mode,
    }
}

pub fn run_case_study() -> CaseStudyReport {
    let mut cases = Vec::new();
    let mut table = Vec::new();
    for case in [CaseId::CaseA, CaseId::CaseB, CaseId::EdgeLegitimate] {
        let variants: Vec<_> = scripts(case).iter().map(run_script).collect();
        for m in ModelKind::ALL {
            table.push(summarize(case, &variants, m));
        }
        cases.push(CaseReport { case, variants });
    }
    CaseStudyReport { cases, table }
}

/// The gate's verdict for the primary Case B variant.
pub fn case_b_gate_verdict(report: &CaseStudyReport) -> Option<VerdictKind> {
    let detail = &report
        .cases
        .iter()
        .find(|c| c.case == CaseId::CaseB)?
        .variants
        .first()?
        .decision(ModelKind::Ram)
        .detail;
    [VerdictKind::Execute, VerdictKind::Narrow, VerdictKind::RefuseDefinitive, VerdictKind::HaltInsufficient]
        .into_iter()
        .find(|k| k.as_str() == detail)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(r: &CaseStudyReport, case: CaseId, m: ModelKind) -> (String, String) {
        let row = r.row(case, m).unwrap();
        (row.executes.clone(), row.correct.clone())
    }

    #[test]
    fn case_b_rows() {
        let r = run_case_study();
        assert_eq!(cell(&r, CaseId::CaseB, ModelKind::Attestation), ("Yes".into(), "No".into()));
        assert_eq!(
            cell(&r, CaseId::CaseB, ModelKind::Oracle),
            ("Yes (in many cases)".into(), "No".into())
        );
        assert_eq!(cell(&r, CaseId::CaseB, ModelKind::Ram), ("No".into(), "Yes".into()));
        assert_eq!(case_b_gate_verdict(&r), Some(VerdictKind::HaltInsufficient));
    }

    #[test]
    fn case_a_everyone_halts() {
        let r = run_case_study();
        for m in ModelKind::ALL {
            assert_eq!(cell(&r, CaseId::CaseA, m), ("No".into(), "Yes".into()), "{m}");
        }
    }

    #[test]
    fn legitimate_change_everyone_executes() {
        let r = run_case_study();
        for m in ModelKind::ALL {
            assert_eq!(cell(&r, CaseId::EdgeLegitimate, m), ("Yes".into(), "Yes".into()), "{m}");
        }
    }

    #[test]
    fn definitive_restriction_is_refused_not_halted() {
        let r = run_case_study();
        let b = r.cases.iter().find(|c| c.case == CaseId::CaseB).unwrap();
        let v = b.variants.iter().find(|v| v.name == "restriction_outside_oracle_model").unwrap();
        assert_eq!(v.decision(ModelKind::Ram).detail, "refuse_definitive");
    }
}
