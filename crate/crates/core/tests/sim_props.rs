use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ramgate::drift::{hidden_components, DriftConfig, DriftEvent, DriftKind};
use ramgate::gate::{evaluate_gate, ReasonCode};
use ramgate::sim::{
    compute_metrics, coverage_sweep, default_grid, simulate, Decision, ModelKind, ModelSet, Rate, Scenario,
    StepRecord,
};
use ramgate::Schedule;

fn scenario(coverage: f64, seed: u64) -> Scenario {
    Scenario::standard(DriftConfig { coverage, seed, ..DriftConfig::default() }).unwrap()
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Reduced fraction, `None` for an empty denominator.
fn reduced(num: u64, den: u64) -> Option<(u64, u64)> {
    (den > 0).then(|| {
        let g = gcd(num, den).max(1);
        (num / g, den / g)
    })
}

fn random_trace(seed: u64, len: usize) -> Vec<StepRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p_true: f64 = rng.gen();
    let p_exec: f64 = rng.gen();
    (0..len)
        .map(|i| {
            let a_r = rng.gen_bool(p_true);
            let decisions = [(); 3].map(|_| match rng.gen_range(0..10) {
                0 => None,
                _ if rng.gen_bool(p_exec) => Some(Decision::Executed { privileges: vec!["execute".into()] }),
                _ => Some(Decision::Halted { reason: ReasonCode::AdmissionMismatch }),
            });
            StepRecord {
                step: i as u64,
                episode: i as u64 / 4,
                event: DriftEvent::none(i as u64),
                a_r,
                decisions,
            }
        })
        .collect()
}

#[test]
fn metrics_match_brute_force_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for t in 0..1_000u64 {
        let len = if t < 5 { t as usize } else { rng.gen_range(1..=10_000) };
        let trace = random_trace(t, len);
        for m in ModelKind::ALL {
            let idx = ModelKind::ALL.iter().position(|x| *x == m).unwrap();
            let (mut ex, mut bad, mut f, mut hf, mut tr, mut ht) = (0, 0, 0, 0, 0, 0);
            for r in &trace {
                let Some(d) = &r.decisions[idx] else { continue };
                let executed = matches!(d, Decision::Executed { .. });
                ex += executed as u64;
                bad += (executed && !r.a_r) as u64;
                f += !r.a_r as u64;
                hf += (!executed && !r.a_r) as u64;
                tr += r.a_r as u64;
                ht += (!executed && r.a_r) as u64;
            }
            let got = compute_metrics(&trace, m);
            let as_frac = |r: Rate| reduced(r.num, r.den);
            assert_eq!(as_frac(got.ier), reduced(bad, ex), "trace {t} {m} ier");
            assert_eq!(as_frac(got.shr), reduced(hf, f), "trace {t} {m} shr");
            assert_eq!(as_frac(got.ocr), reduced(ht, tr), "trace {t} {m} ocr");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stepwise_model_relations(seed in any::<u64>(), cov in 0usize..=10, n in 1u64..400) {
        let coverage = cov as f64 / 10.0;
        let out = simulate(&scenario(coverage, seed), n, 0, Schedule::Sequential, false).unwrap();
        prop_assert_eq!(out.records.len() as u64, n);
        for r in &out.records {
            let ex = |m| r.decision(m).unwrap().executed();
            // The gate only executes what is actually authorized.
            prop_assert!(!ex(ModelKind::Ram) || r.a_r);
            // The oracle only adds reasons to halt.
            prop_assert!(!ex(ModelKind::Oracle) || ex(ModelKind::Attestation));
            if cov == 10 {
                prop_assert_eq!(ex(ModelKind::Oracle), ex(ModelKind::Attestation));
            }
        }
    }

    #[test]
    fn hidden_drift_never_reaches_baseline_envelopes(seed in any::<u64>(), cov in 0usize..=10) {
        let out = simulate(&scenario(cov as f64 / 10.0, seed), 80, 0, Schedule::Sequential, true).unwrap();
        let hidden = hidden_components();
        for a in out.audit.iter().filter(|a| a.model != ModelKind::Ram) {
            prop_assert!(a.envelope.proven.keys().all(|id| !hidden.contains(id)));
        }
    }
}

#[test]
fn parallel_and_sequential_agree() {
    let sc = scenario(0.4, 99);
    let a = simulate(&sc, 3_001, 2, Schedule::Sequential, true).unwrap();
    let b = simulate(&sc, 3_001, 2, Schedule::Parallel, true).unwrap();
    assert_eq!(a, b);
    let grid = [0.0, 0.5, 1.0];
    let s = coverage_sweep(&sc, &grid, 2_000, Schedule::Sequential).unwrap();
    let p = coverage_sweep(&sc, &grid, 2_000, Schedule::Parallel).unwrap();
    assert_eq!(s, p);
}

#[test]
fn audit_log_replays_gate_verdicts() {
    let sc = scenario(0.6, 3);
    let out = simulate(&sc, 400, 0, Schedule::Parallel, true).unwrap();
    let mut replayed = 0;
    for a in out.audit.iter().filter(|a| a.model == ModelKind::Ram) {
        let env = a.envelope.to_envelope(sc.universe(), a.step).unwrap();
        let verdict = evaluate_gate(&env, sc.ram_class()).unwrap().verdict;
        assert_eq!(verdict.kind().as_str(), a.verdict);
        assert_eq!(verdict.reason_code(), a.reason);
        replayed += 1;
    }
    assert_eq!(replayed, 400);
}

#[test]
fn disabled_models_are_skipped() {
    let sc = scenario(0.5, 1).with_models(ModelSet { attestation: false, oracle: true, ram: true });
    let out = simulate(&sc, 50, 0, Schedule::Sequential, false).unwrap();
    assert!(out.records.iter().all(|r| r.decision(ModelKind::Attestation).is_none()));
    assert!(compute_metrics(&out.records, ModelKind::Attestation).ier.is_undefined());
    let sweep = coverage_sweep(&sc, &default_grid(), 40, Schedule::Sequential).unwrap();
    let models: BTreeSet<ModelKind> = sweep.points[0].metrics.keys().copied().collect();
    assert_eq!(models, BTreeSet::from([ModelKind::Oracle, ModelKind::Ram]));
}

#[test]
fn drift_event_targets_follow_the_kind_table() {
    let out = simulate(&scenario(0.5, 11), 4_000, 0, Schedule::Parallel, false).unwrap();
    for r in &out.records {
        let t = r.event.target.as_ref().map(|t| t.as_str());
        match r.event.kind {
            DriftKind::None => assert_eq!(t, None),
            DriftKind::Observable => assert!(matches!(t, Some("I" | "C"))),
            DriftKind::Delayed => assert_eq!(t, Some("R")),
            DriftKind::Hidden => assert_eq!(t, Some("E")),
            DriftKind::Ambiguous => assert_eq!(t, Some("B")),
        }
    }
}
