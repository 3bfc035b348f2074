//! Batch oracle for the edit algebra and the difference engine.
//!
//! The harness runs an exhaustive sweep over every document of small arity and
//! every valid edit pair, then seeded random checks over generated histories.
//! Every check takes the rule table as a parameter so broken tables can be fed
//! in to confirm the harness notices.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::document::{AtomType, Document, Slot, Value};
use crate::edit::{all_valid_edits, apply_edit, replay, validate_edit, Edit, EditId};
use crate::error::Error;
use crate::migration::{
    merge_all_with, migrate_with_dependencies_with, MergePolicy, MigrationReport,
};
use crate::transform::{Rules, StandardRules, TransformOutcome};
use crate::variance::{rebuild_with, record_edit_with, Side, VariantPair};

type Doc = Document<f64>;
type Pair = VariantPair<f64>;

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    pub cases: usize,
    pub max_history: usize,
    pub max_arity: usize,
    pub sweep_arity: usize,
    pub interleavings: usize,
    /// Treat every round-trip exception as a failure, including the
    /// documented move/move collisions.
    pub strict_round_trip: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 0,
            cases: 1000,
            max_history: 12,
            max_arity: 4,
            sweep_arity: 3,
            interleavings: 5,
            strict_round_trip: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub checks: u64,
    pub failures: u64,
    /// Known exceptions that do not count as failures in this run.
    pub exceptions: u64,
    pub counterexample: Option<String>,
}

impl PropertyResult {
    fn new(name: &'static str) -> Self {
        PropertyResult {
            name,
            checks: 0,
            failures: 0,
            exceptions: 0,
            counterexample: None,
        }
    }

    fn fail(&mut self, why: impl FnOnce() -> String) {
        self.failures += 1;
        if self.counterexample.is_none() {
            self.counterexample = Some(why());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "ok  " } else { "FAIL" };
        write!(f, "{status} {:<22} {} checks", self.name, self.checks)?;
        if self.failures > 0 {
            write!(f, ", {} failures", self.failures)?;
        }
        if self.exceptions > 0 {
            write!(f, ", {} known move/move exceptions", self.exceptions)?;
        }
        if let Some(c) = &self.counterexample {
            write!(f, "\n     counterexample:\n")?;
            for line in c.lines() {
                writeln!(f, "       {line}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub results: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(PropertyResult::passed)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyResult> {
        self.results.iter().find(|r| r.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            writeln!(f, "{r}")?;
        }
        let total: u64 = self.results.iter().map(|r| r.checks).sum();
        if self.passed() {
            write!(f, "all properties hold ({total} checks)")
        } else {
            let failed = self.results.iter().filter(|r| !r.passed()).count();
            write!(f, "{failed} of {} properties failed ({total} checks)", self.results.len())
        }
    }
}

pub fn run(config: &VerifyConfig) -> VerifyReport {
    run_with(&StandardRules, config)
}

pub fn run_with(rules: &dyn Rules, config: &VerifyConfig) -> VerifyReport {
    let sweep = sweep(rules, config.sweep_arity, config.strict_round_trip);
    let mut results = vec![sweep.commutativity, sweep.round_trip];
    results.push(check_interleaving(rules, config));
    results.push(check_convergence(rules, config));
    results.push(check_conflict_symmetry(rules, config));
    results.push(check_coherence(rules, config));
    VerifyReport { results }
}

// ---------------------------------------------------------------------------
// Exhaustive sweep

pub struct SweepReport {
    pub commutativity: PropertyResult,
    pub round_trip: PropertyResult,
    pub documents: usize,
}

/// Stored value for slot `k` of a sweep document; distinct across slots.
fn sample_value(k: usize, ty: AtomType) -> Value<f64> {
    match ty {
        AtomType::Num => Value::Number(k as f64 + 1.0),
        _ => Value::Text(format!("v{}", k + 1)),
    }
}

/// Every document of arity `0..=max_arity` over the four types, one distinct
/// stored value per slot.
pub fn sweep_documents(max_arity: usize) -> Vec<Doc> {
    let mut out = vec![Doc::empty()];
    let mut layer: Vec<Vec<AtomType>> = vec![vec![]];
    for _ in 0..max_arity {
        layer = layer
            .iter()
            .flat_map(|tys| {
                AtomType::ALL.iter().map(move |&t| {
                    let mut next = tys.clone();
                    next.push(t);
                    next
                })
            })
            .collect();
        out.extend(layer.iter().map(|tys| {
            Doc::from_slots(
                tys.iter()
                    .enumerate()
                    .map(|(k, &t)| Slot::new(sample_value(k, t), t))
                    .collect(),
            )
        }));
    }
    out
}

fn apply2(first: &Edit, second: &Edit, doc: &Doc) -> Option<Doc> {
    apply_edit(first, doc).and_then(|d| apply_edit(second, &d)).ok()
}

/// Round-trip exceptions that follow from two moves colliding on a slot.
fn is_move_collision(a: &Edit, b: &Edit) -> bool {
    matches!((a, b), (Edit::Move { .. }, Edit::Move { .. }))
}

pub fn sweep(rules: &dyn Rules, max_arity: usize, strict_round_trip: bool) -> SweepReport {
    let mut comm = PropertyResult::new("commutativity");
    let mut round = PropertyResult::new("round-trip");
    let docs = sweep_documents(max_arity);
    let pre_id = EditId::new("P", 1);
    let diff_id = EditId::new("D", 1);

    for doc in &docs {
        let n = doc.arity();
        let pres = all_valid_edits(n, &pre_id);
        let diffs = all_valid_edits(n, &diff_id);
        for pre in &pres {
            let mut candidates: Vec<&Edit> = diffs.iter().collect();
            if matches!(pre, Edit::Ins { .. }) {
                candidates.push(pre);
            }
            for diff in candidates {
                check_project(rules, doc, pre, diff, &mut comm, &mut round, strict_round_trip);
            }
        }
        // retraction: diff valid on doc, post valid after it
        for diff in &diffs {
            let after = apply_edit(diff, doc).expect("valid diff applies");
            // an insert id never recurs after its own insert, so no same-id posts
            for post in &all_valid_edits(after.arity(), &pre_id) {
                check_retract(rules, doc, post, diff, &mut comm, &mut round, strict_round_trip);
            }
        }
    }
    SweepReport {
        commutativity: comm,
        round_trip: round,
        documents: docs.len(),
    }
}

fn square(label: &str, a: &Edit, b: &Edit, doc: &Doc, detail: String) -> String {
    format!("{label}({a}, {b}) on {doc}: {detail}")
}

#[allow(clippy::too_many_arguments)]
fn check_project(
    rules: &dyn Rules,
    doc: &Doc,
    pre: &Edit,
    diff: &Edit,
    comm: &mut PropertyResult,
    round: &mut PropertyResult,
    strict: bool,
) {
    comm.checks += 1;
    let outcome = match rules.project(pre, diff) {
        Ok(o) => o,
        Err(e) => return comm.fail(|| square("project", pre, diff, doc, e.to_string())),
    };
    let (post, adjust) = match &outcome {
        TransformOutcome::Defined {
            result, adjusted, ..
        } => (result.clone(), adjusted.clone()),
        TransformOutcome::Undefined(why) => {
            return comm.fail(|| square("project", pre, diff, doc, format!("undefined ({why})")))
        }
    };
    let left = apply2(diff, &post, doc);
    let right = apply2(pre, &adjust, doc);
    match (&left, &right) {
        (Some(l), Some(r)) if l == r => {}
        _ => comm.fail(|| {
            square(
                "project",
                pre,
                diff,
                doc,
                format!(
                    "post={post} adjust={adjust}; post.diff={} adjust.pre={}",
                    show(&left),
                    show(&right)
                ),
            )
        }),
    }

    round.checks += 1;
    if pre.is_id() {
        let expect = TransformOutcome::Defined {
            result: Edit::Id,
            adjusted: diff.clone(),
            grounded: false,
        };
        if outcome != expect {
            round.fail(|| square("project", pre, diff, doc, format!("id fixpoint broken: {outcome:?}")));
        }
        match rules.retract(pre, diff) {
            Ok(o) if o == expect => {}
            other => round.fail(|| square("retract", pre, diff, doc, format!("id fixpoint broken: {other:?}"))),
        }
    } else if !post.is_id() {
        match rules.retract(&post, diff) {
            Ok(TransformOutcome::Defined {
                result, adjusted, ..
            }) if result == *pre && adjusted == adjust => {}
            other => {
                let why = || {
                    square(
                        "project",
                        pre,
                        diff,
                        doc,
                        format!("gives ({post}, {adjust}) but retract({post}, {diff}) gives {other:?}"),
                    )
                };
                if !strict && is_move_collision(pre, diff) {
                    round.exceptions += 1;
                } else {
                    round.fail(why);
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn check_retract(
    rules: &dyn Rules,
    doc: &Doc,
    post: &Edit,
    diff: &Edit,
    comm: &mut PropertyResult,
    round: &mut PropertyResult,
    strict: bool,
) {
    comm.checks += 1;
    let outcome = match rules.retract(post, diff) {
        Ok(o) => o,
        Err(e) => return comm.fail(|| square("retract", post, diff, doc, e.to_string())),
    };
    let (pre, adjust) = match &outcome {
        TransformOutcome::Defined {
            result, adjusted, ..
        } => (result.clone(), adjusted.clone()),
        TransformOutcome::Undefined(_) => return,
    };
    let left = apply2(diff, post, doc);
    let right = apply2(&pre, &adjust, doc);
    match (&left, &right) {
        (Some(l), Some(r)) if l == r => {}
        _ => comm.fail(|| {
            square(
                "retract",
                post,
                diff,
                doc,
                format!(
                    "pre={pre} adjust={adjust}; post.diff={} adjust.pre={}",
                    show(&left),
                    show(&right)
                ),
            )
        }),
    }

    if post.is_id() || pre.is_id() {
        return;
    }
    round.checks += 1;
    match rules.project(&pre, diff) {
        Ok(TransformOutcome::Defined {
            result, adjusted, ..
        }) if result == *post && adjusted == adjust => {}
        other => {
            let why = || {
                square(
                    "retract",
                    post,
                    diff,
                    doc,
                    format!("gives ({pre}, {adjust}) but project({pre}, {diff}) gives {other:?}"),
                )
            };
            if !strict && is_move_collision(post, diff) {
                round.exceptions += 1;
            } else {
                round.fail(why);
            }
        }
    }
}

fn show(d: &Option<Doc>) -> String {
    d.as_ref().map_or_else(|| "invalid".to_string(), |d| d.to_string())
}

// ---------------------------------------------------------------------------
// Random cases

/// A common ancestor and two histories from it. `seed` drives any further
/// randomness a property needs, so a shrunk case replays identically.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub ancestor: Doc,
    pub history_a: Vec<Edit>,
    pub history_b: Vec<Edit>,
    pub seed: u64,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |h: &[Edit]| h.iter().map(Edit::to_string).collect::<Vec<_>>().join("; ");
        writeln!(f, "ancestor  {}", self.ancestor)?;
        writeln!(f, "history A [{}]", list(&self.history_a))?;
        write!(f, "history B [{}]", list(&self.history_b))
    }
}

impl Case {
    fn replays(&self) -> bool {
        replay(&self.ancestor, &self.history_a).is_ok() && replay(&self.ancestor, &self.history_b).is_ok()
    }

    fn history_mut(&mut self, side: Side) -> &mut Vec<Edit> {
        match side {
            Side::A => &mut self.history_a,
            Side::B => &mut self.history_b,
        }
    }
}

struct Minter {
    replica: &'static str,
    counter: u64,
}

impl Minter {
    fn next(&mut self) -> EditId {
        self.counter += 1;
        EditId::new(self.replica, self.counter)
    }
}

fn random_ancestor(rng: &mut ChaCha8Rng, max_arity: usize) -> Doc {
    let n = rng.gen_range(0..=max_arity);
    Doc::from_slots(
        (0..n)
            .map(|k| {
                let ty = *AtomType::ALL.choose(rng).unwrap();
                let value = match ty {
                    AtomType::Num => Value::Number(k as f64 + 1.0),
                    AtomType::Str => Value::Text(format!("v{}", k + 1)),
                    AtomType::Bool => Value::Truth(rng.gen()),
                    AtomType::Del => Value::Null,
                };
                Slot::new(value, ty)
            })
            .collect(),
    )
}

fn random_edit(rng: &mut ChaCha8Rng, doc: &Doc, max_arity: usize, ids: &mut Minter) -> Edit {
    let n = doc.arity();
    let mut kinds = Vec::new();
    if n < max_arity {
        kinds.extend([0, 0]);
    }
    if n >= 1 {
        kinds.extend([1, 1, 1]);
    }
    if n >= 2 {
        kinds.extend([2, 2]);
    }
    let ty = *AtomType::ALL.choose(rng).unwrap();
    match kinds.choose(rng) {
        Some(1) => Edit::conv(rng.gen_range(1..=n), ty),
        Some(2) => {
            let target = rng.gen_range(1..=n);
            let mut source = rng.gen_range(1..n);
            if source >= target {
                source += 1;
            }
            Edit::mv(target, source)
        }
        _ => Edit::ins(rng.gen_range(1..=n + 1), ty, ids.next()),
    }
}

/// Generates two histories by simulating both replicas: random local edits,
/// repeated edits copied from the other side, and real migrations whose
/// results enter the receiving history with their original insert ids.
pub fn random_case(rng: &mut ChaCha8Rng, max_history: usize, max_arity: usize) -> Case {
    let ancestor = random_ancestor(rng, max_arity);
    let seed = rng.gen();
    let mut case = Case {
        ancestor: ancestor.clone(),
        history_a: vec![],
        history_b: vec![],
        seed,
    };
    let mut want = [rng.gen_range(0..=max_history), rng.gen_range(0..=max_history)];
    let mut ids = [
        Minter {
            replica: "A",
            counter: 0,
        },
        Minter {
            replica: "B",
            counter: 0,
        },
    ];
    let mut pair = Pair::new(ancestor);
    let slot = |s: Side| if s == Side::A { 0 } else { 1 };
    let mut guard = 0;
    while case.history_a.len() < want[0] || case.history_b.len() < want[1] {
        guard += 1;
        if guard > 200 {
            break;
        }
        let side = if case.history_b.len() >= want[1]
            || (case.history_a.len() < want[0] && rng.gen_bool(0.5))
        {
            Side::A
        } else {
            Side::B
        };
        let doc = pair.document(side).expect("generated pair replays");
        let roll: f64 = rng.gen();

        if roll < 0.2 && !pair.diffs(side.other()).is_empty() {
            // pull a difference over from the other side
            let from = side.other();
            let index = rng.gen_range(1..=pair.diffs(from).len());
            if let Ok(report) = migrate_with_dependencies_with(&StandardRules, &pair, from, index) {
                let room = want[slot(side)] - case.history_mut(side).len();
                if report.applied.len() <= room {
                    case.history_mut(side).extend(report.applied.iter().cloned());
                    pair = report.pair;
                    continue;
                }
            }
        }
        let other_history = match side {
            Side::A => &case.history_b,
            Side::B => &case.history_a,
        };
        let copy = if roll < 0.35 {
            other_history
                .iter()
                .filter(|e| !matches!(e, Edit::Ins { .. }) && validate_edit(e, doc.arity()))
                .cloned()
                .collect::<Vec<_>>()
                .choose(rng)
                .cloned()
        } else {
            None
        };
        let edit = copy.unwrap_or_else(|| random_edit(rng, &doc, max_arity, &mut ids[slot(side)]));
        match record_edit_with(&StandardRules, &pair, side, &edit) {
            Ok(next) => {
                pair = next;
                case.history_mut(side).push(edit);
            }
            Err(_) => {
                // the generator only relies on the standard table; stop short
                want = [case.history_a.len(), case.history_b.len()];
            }
        }
    }
    case
}

/// Kind of a failure message: the text before its first `:`.
fn failure_kind(message: &str) -> &str {
    message.split(':').next().unwrap_or(message)
}

/// Greedily drops history entries while the case still fails the same way.
pub fn shrink(case: &Case, fails: impl Fn(&Case) -> Option<String>) -> (Case, String) {
    let mut best = case.clone();
    let mut why = fails(&best).unwrap_or_default();
    let kind = failure_kind(&why).to_string();
    loop {
        let mut improved = false;
        'outer: for side in [Side::A, Side::B] {
            let len = best.clone().history_mut(side).len();
            for k in (0..len).rev() {
                let mut candidate = best.clone();
                candidate.history_mut(side).remove(k);
                if !candidate.replays() {
                    continue;
                }
                if let Some(w) = fails(&candidate).filter(|w| failure_kind(w) == kind) {
                    best = candidate;
                    why = w;
                    improved = true;
                    break 'outer;
                }
            }
        }
        if !improved {
            return (best, why);
        }
    }
}

fn cases(config: &VerifyConfig, salt: u64) -> impl Iterator<Item = Case> + '_ {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    (0..config.cases).map(move |_| random_case(&mut rng, config.max_history, config.max_arity))
}

/// Runs `check` over fresh cases, shrinking the first failure.
fn property(
    name: &'static str,
    config: &VerifyConfig,
    salt: u64,
    check: impl Fn(&Case, &mut u64) -> Option<String>,
) -> PropertyResult {
    let mut result = PropertyResult::new(name);
    for case in cases(config, salt) {
        let mut checks = 0;
        if let Some(first) = check(&case, &mut checks) {
            result.failures += 1;
            if result.counterexample.is_none() {
                let (small, why) = shrink(&case, |c| check(c, &mut 0));
                let why = if why.is_empty() { first } else { why };
                result.counterexample = Some(format!("{small}\n{why}"));
            }
        }
        result.checks += checks.max(1);
    }
    result
}

fn rebuild_case(rules: &dyn Rules, case: &Case) -> Result<Pair, Error> {
    rebuild_with(rules, &case.ancestor, &case.history_a, &case.history_b)
}

/// One pair rebuilt from scratch and several rebuilt by recording the two
/// histories in random interleavings must all be identical.
pub fn interleaving_failure(rules: &dyn Rules, case: &Case, interleavings: usize, checks: &mut u64) -> Option<String> {
    let reference = match rebuild_case(rules, case) {
        Ok(p) => p,
        Err(e) => return Some(format!("rebuild failed: {e}")),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(case.seed);
    for _ in 0..interleavings {
        *checks += 1;
        let mut order: Vec<Side> = std::iter::repeat(Side::A)
            .take(case.history_a.len())
            .chain(std::iter::repeat(Side::B).take(case.history_b.len()))
            .collect();
        order.shuffle(&mut rng);
        let mut pair = Pair::new(case.ancestor.clone());
        let (mut ia, mut ib) = (0, 0);
        for side in &order {
            let edit = match side {
                Side::A => {
                    ia += 1;
                    &case.history_a[ia - 1]
                }
                Side::B => {
                    ib += 1;
                    &case.history_b[ib - 1]
                }
            };
            pair = match record_edit_with(rules, &pair, *side, edit) {
                Ok(p) => p,
                Err(e) => return Some(format!("recording failed: {side} `{edit}`: {e}")),
            };
        }
        if pair != reference {
            let order: String = order.iter().map(Side::to_string).collect();
            return Some(format!(
                "interleaving differs from rebuild: order {order} gives\n{}\nrebuild gives\n{}",
                show_pair(&pair),
                show_pair(&reference)
            ));
        }
    }
    None
}

pub fn show_pair(pair: &Pair) -> String {
    let list = |h: &[Edit]| h.iter().map(Edit::to_string).collect::<Vec<_>>().join("; ");
    format!(
        "agreement {} A [{}] B [{}]",
        pair.agreement,
        list(&pair.diffs_a),
        list(&pair.diffs_b)
    )
}

pub fn check_interleaving(rules: &dyn Rules, config: &VerifyConfig) -> PropertyResult {
    property("interleaving", config, 4, |case, checks| {
        interleaving_failure(rules, case, config.interleavings, checks)
    })
}

/// How a convergence run picks differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergeOrder {
    /// Merge everything from A in historical order, then everything from B.
    Historical,
    /// Merge everything from B newest first, then A newest first.
    Reverse,
    /// Pick a random side and difference at each step.
    Random(u64),
}

#[derive(Debug, Clone)]
pub struct ConvergeRun {
    pub pair: Pair,
    pub migrations: usize,
    /// Per step: the side migrated from and the report.
    pub steps: Vec<MigrationReport<f64>>,
}

/// Migrates differences until both sides are empty.
pub fn converge(rules: &dyn Rules, pair: &Pair, order: ConvergeOrder) -> Result<ConvergeRun, Error> {
    let mut steps = Vec::new();
    let mut current = pair.clone();
    match order {
        ConvergeOrder::Historical | ConvergeOrder::Reverse => {
            let (sides, policy) = if order == ConvergeOrder::Historical {
                ([Side::A, Side::B], MergePolicy::Historical)
            } else {
                ([Side::B, Side::A], MergePolicy::Reverse)
            };
            for side in sides {
                let report = merge_all_with(rules, &current, side, policy)?;
                current = report.pair.clone();
                steps.push(report);
            }
        }
        ConvergeOrder::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let limit = pair.diffs_a.len() + pair.diffs_b.len();
            while !current.is_converged() {
                let sides: Vec<Side> = [Side::A, Side::B]
                    .into_iter()
                    .filter(|s| !current.diffs(*s).is_empty())
                    .collect();
                let side = *sides.choose(&mut rng).unwrap();
                let index = rng.gen_range(1..=current.diffs(side).len());
                let report = migrate_with_dependencies_with(rules, &current, side, index)?;
                current = report.pair.clone();
                steps.push(report);
                if steps.len() > limit {
                    break;
                }
            }
        }
    }
    let migrations = steps.iter().map(|s| s.migrated_indexes.len()).sum();
    Ok(ConvergeRun {
        pair: current,
        migrations,
        steps,
    })
}

pub fn convergence_failure(rules: &dyn Rules, case: &Case, checks: &mut u64) -> Option<String> {
    let pair = match rebuild_case(rules, case) {
        Ok(p) => p,
        Err(e) => return Some(format!("rebuild failed: {e}")),
    };
    let budget = pair.diffs_a.len() + pair.diffs_b.len();
    let orders = [
        ConvergeOrder::Historical,
        ConvergeOrder::Reverse,
        ConvergeOrder::Random(case.seed),
    ];
    for order in orders {
        *checks += 1;
        let run = match converge(rules, &pair, order) {
            Ok(r) => r,
            Err(e) => return Some(format!("migration failed ({order:?}): {e}")),
        };
        if !run.pair.is_converged() {
            return Some(format!("differences left ({order:?}): {}", show_pair(&run.pair)));
        }
        if run.migrations > budget {
            return Some(format!("too many migrations ({order:?}): {} for {budget} differences", run.migrations));
        }
        let (a, b) = match (run.pair.document(Side::A), run.pair.document(Side::B)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return Some(format!("converged pair does not replay ({order:?})")),
        };
        if a.types() != b.types() || a.conform() != b.conform() {
            return Some(format!("documents differ ({order:?}): {a} vs {b}"));
        }
    }
    None
}

pub fn check_convergence(rules: &dyn Rules, config: &VerifyConfig) -> PropertyResult {
    property("convergence", config, 5, |case, checks| convergence_failure(rules, case, checks))
}

/// Differences on the opposite side that migrating `side`/`index` conflicts with.
fn conflict_partners(rules: &dyn Rules, pair: &Pair, side: Side, index: usize) -> Result<Vec<usize>, Error> {
    let report = migrate_with_dependencies_with(rules, pair, side, index)?;
    let mut out: Vec<usize> = report
        .conflicts
        .iter()
        .filter(|c| c.involves(side, index))
        .map(|c| {
            if c.overridden_side == side {
                c.winning_index
            } else {
                c.overridden_index
            }
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn symmetry_failure(rules: &dyn Rules, case: &Case, checks: &mut u64) -> Option<String> {
    let pair = match rebuild_case(rules, case) {
        Ok(p) => p,
        Err(e) => return Some(format!("rebuild failed: {e}")),
    };
    let mut partners = [Vec::new(), Vec::new()];
    for (k, side) in [Side::A, Side::B].into_iter().enumerate() {
        for i in 1..=pair.diffs(side).len() {
            match conflict_partners(rules, &pair, side, i) {
                Ok(p) => partners[k].push(p),
                Err(e) => return Some(format!("migration failed: {side}{i}: {e}")),
            }
        }
    }
    for i in 1..=pair.diffs_a.len() {
        for j in 1..=pair.diffs_b.len() {
            let ab = partners[0][i - 1].contains(&j);
            let ba = partners[1][j - 1].contains(&i);
            if ab || ba {
                *checks += 1;
            }
            if ab != ba {
                return Some(format!(
                    "asymmetric conflict: {} A{i} `{}` conflicts with B{j} `{}` from one side only (from A: {ab}, from B: {ba})",
                    show_pair(&pair),
                    pair.diffs_a[i - 1],
                    pair.diffs_b[j - 1]
                ));
            }
        }
    }
    None
}

pub fn check_conflict_symmetry(rules: &dyn Rules, config: &VerifyConfig) -> PropertyResult {
    property("conflict-symmetry", config, 6, |case, checks| symmetry_failure(rules, case, checks))
}

/// After every migration the maintained pair must equal a rebuild over the
/// updated histories, and the migrated-from side's document must not change.
pub fn coherence_failure(rules: &dyn Rules, case: &Case, checks: &mut u64) -> Option<String> {
    let mut pair = match rebuild_case(rules, case) {
        Ok(p) => p,
        Err(e) => return Some(format!("rebuild failed: {e}")),
    };
    let mut histories = case.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(case.seed.rotate_left(17));
    let limit = pair.diffs_a.len() + pair.diffs_b.len();
    for _ in 0..limit {
        if pair.is_converged() {
            break;
        }
        *checks += 1;
        let sides: Vec<Side> = [Side::A, Side::B]
            .into_iter()
            .filter(|s| !pair.diffs(*s).is_empty())
            .collect();
        let side = *sides.choose(&mut rng).unwrap();
        let index = rng.gen_range(1..=pair.diffs(side).len());
        let before_own = pair.document(side).ok();
        let before_other = pair.document(side.other()).ok();
        let report = match migrate_with_dependencies_with(rules, &pair, side, index) {
            Ok(r) => r,
            Err(e) => return Some(format!("migration failed: {side}{index}: {e}")),
        };
        let label = format!("after migrating {side}{index} (`{}`)", pair.diffs(side)[index - 1]);
        if report.pair.document(side).ok() != before_own {
            return Some(format!("migrated-from document changed: {label}"));
        }
        let replayed = before_other.and_then(|d| replay(&d, &report.applied).ok());
        if report.pair.document(side.other()).ok() != replayed {
            return Some(format!("applied edits do not reproduce the other side: {label}"));
        }
        histories.history_mut(side.other()).extend(report.applied.iter().cloned());
        let rebuilt = match rebuild_case(rules, &histories) {
            Ok(p) => p,
            Err(e) => return Some(format!("rebuild failed: {label}: {e}")),
        };
        if rebuilt != report.pair {
            return Some(format!(
                "pair differs from rebuild: {label}\nmaintained {}\nrebuilt    {}",
                show_pair(&report.pair),
                show_pair(&rebuilt)
            ));
        }
        pair = report.pair;
    }
    None
}

pub fn check_coherence(rules: &dyn Rules, config: &VerifyConfig) -> PropertyResult {
    property("migration-coherence", config, 7, |case, checks| coherence_failure(rules, case, checks))
}
