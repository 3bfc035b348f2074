use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tvc_core::verify::{self, random_case, VerifyConfig};
use tvc_core::*;

/// Forgets to shift conversions past inserts.
struct NoShift;

impl Rules for NoShift {
    fn project(&self, pre: &Edit, diff: &Edit) -> Result<TransformOutcome> {
        match (pre, diff) {
            (Edit::Conv { .. }, Edit::Ins { .. }) => Ok(TransformOutcome::Defined {
                result: pre.clone(),
                adjusted: diff.clone(),
                grounded: false,
            }),
            _ => project(pre, diff),
        }
    }

    fn retract(&self, post: &Edit, diff: &Edit) -> Result<TransformOutcome> {
        retract(post, diff)
    }
}

fn small() -> VerifyConfig {
    VerifyConfig {
        cases: 40,
        sweep_arity: 2,
        ..VerifyConfig::default()
    }
}

#[test]
fn sweep_covers_every_small_document() {
    assert_eq!(verify::sweep_documents(3).len(), 1 + 4 + 16 + 64);
    let report = verify::sweep(&StandardRules, 3, true);
    assert_eq!(report.documents, 85);
    assert!(report.commutativity.passed(), "{}", report.commutativity);
    assert!(report.commutativity.checks > 10_000);
}

#[test]
fn injected_rule_bug_yields_a_counterexample() {
    let report = verify::run_with(&NoShift, &small());
    assert!(!report.passed());
    let comm = report.get("commutativity").unwrap();
    assert!(!comm.passed());
    let text = report.to_string();
    assert!(text.contains("counterexample"), "{text}");
    assert!(text.contains("project(conv"), "{text}");
    assert!(text.contains("properties failed"), "{text}");
}

#[test]
fn shrunk_counterexamples_replay() {
    let report = verify::run_with(&NoShift, &small());
    let failing: Vec<_> = report.results.iter().filter(|r| !r.passed()).collect();
    assert!(!failing.is_empty());
    for r in failing {
        assert!(r.counterexample.is_some(), "{}", r.name);
    }
}

#[test]
fn same_seed_same_cases() {
    let draw = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..20).map(|_| random_case(&mut rng, 12, 4)).collect::<Vec<_>>()
    };
    assert_eq!(draw(5), draw(5));
    assert_ne!(draw(5), draw(6));
    let config = small();
    assert_eq!(verify::run(&config), verify::run(&config));
}

#[test]
fn generated_cases_replay_from_their_ancestor() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let case = random_case(&mut rng, 12, 4);
        assert!(case.history_a.len() <= 12 && case.history_b.len() <= 12);
        assert!(case.ancestor.arity() <= 4);
        replay(&case.ancestor, &case.history_a).unwrap();
        replay(&case.ancestor, &case.history_b).unwrap();
        rebuild(&case.ancestor, &case.history_a, &case.history_b).unwrap().check().unwrap();
    }
}

#[test]
fn convergence_holds_under_every_order() {
    let report = verify::check_convergence(&StandardRules, &small());
    assert!(report.passed(), "{report}");
}
