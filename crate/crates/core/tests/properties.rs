use proptest::prelude::*;
use tvc_core::edit::all_valid_edits;
use tvc_core::image::ImageFile;
use tvc_core::syntax;
use tvc_core::*;

const TYPES: [AtomType; 4] = [AtomType::Num, AtomType::Str, AtomType::Bool, AtomType::Del];

fn value() -> impl Strategy<Value = Value> {
    prop_oneof![
        (-1000i32..1000).prop_map(|n| Value::Number(f64::from(n) / 4.0)),
        prop_oneof![
            Just("true".to_string()),
            Just("12.5".to_string()),
            "[a-z]{0,3}",
        ]
        .prop_map(Value::Text),
        any::<bool>().prop_map(Value::Truth),
        Just(Value::Null),
    ]
}

fn slot() -> impl Strategy<Value = Slot<f64>> {
    (value(), 0..4usize).prop_map(|(v, t)| Slot::new(v, TYPES[t]))
}

fn document(max: usize) -> impl Strategy<Value = Document> {
    prop::collection::vec(slot(), 0..=max).prop_map(Document::from_slots)
}

/// Picks one of the valid edits for `arity` by a random selector.
fn pick(arity: usize, selector: usize, id: EditId) -> Edit {
    let edits = all_valid_edits(arity, &id);
    edits[selector % edits.len()].clone()
}

/// Selects non-Id edits only.
fn pick_change(arity: usize, selector: usize, id: EditId) -> Edit {
    let edits: Vec<Edit> = all_valid_edits(arity, &id).into_iter().filter(|e| !e.is_id()).collect();
    edits[selector % edits.len()].clone()
}

fn doc_and_edit() -> impl Strategy<Value = (Document, Edit)> {
    (document(5), any::<usize>()).prop_map(|(d, s)| {
        let e = pick(d.arity(), s, EditId::new("A", 1));
        (d, e)
    })
}

fn stored(d: &Document) -> Vec<Value> {
    d.slots().iter().map(|s| s.value.clone()).collect()
}

proptest! {
    #[test]
    fn conv_keeps_stored_values((d, s, t) in (document(5).prop_filter("non-empty", |d| d.arity() > 0), any::<usize>(), 0..4usize)) {
        let i = s % d.arity() + 1;
        let after = apply_edit(&Edit::conv(i, TYPES[t]), &d).unwrap();
        prop_assert_eq!(stored(&after), stored(&d));
    }

    #[test]
    fn conv_round_trip_restores_display((d, s, t) in (document(5).prop_filter("non-empty", |d| d.arity() > 0), any::<usize>(), 0..4usize)) {
        let i = s % d.arity() + 1;
        let original = d.get(i).unwrap().ty;
        let there = apply_edit(&Edit::conv(i, TYPES[t]), &d).unwrap();
        let back = apply_edit(&Edit::conv(i, original), &there).unwrap();
        prop_assert_eq!(back.conform(), d.conform());
    }

    #[test]
    fn arity_follows_the_edit((d, e) in doc_and_edit()) {
        prop_assert!(validate_edit(&e, d.arity()));
        let after = apply_edit(&e, &d).unwrap();
        let expect = match e {
            Edit::Ins { .. } => d.arity() + 1,
            _ => d.arity(),
        };
        prop_assert_eq!(after.arity(), expect);
        if e.is_id() {
            prop_assert_eq!(after, d);
        }
    }

    #[test]
    fn invalid_edits_are_rejected((d, i) in (document(3), 0..8usize)) {
        let e = Edit::conv(i + d.arity() + 1, AtomType::Num);
        prop_assert!(!validate_edit(&e, d.arity()));
        let is_invalid = matches!(apply_edit(&e, &d), Err(Error::InvalidEdit { .. }));
        prop_assert!(is_invalid);
    }

    #[test]
    fn conform_is_idempotent(d in document(6)) {
        let once = d.conform();
        prop_assert_eq!(once.to_document().conform(), once.clone());
        for s in &once.slots {
            if s.ty == AtomType::Del {
                prop_assert_eq!(&s.display, &tvc_core::document::Conformed::Value(Value::Null));
            }
        }
    }

    #[test]
    fn squares_commute_beyond_the_sweep((d, s1, s2) in (document(5), any::<usize>(), any::<usize>())) {
        let pre = pick(d.arity(), s1, EditId::new("P", 1));
        let diff = pick(d.arity(), s2, EditId::new("D", 1));
        if let TransformOutcome::Defined { result, adjusted, .. } = project(&pre, &diff).unwrap() {
            let left = apply_edit(&result, &apply_edit(&diff, &d).unwrap()).unwrap();
            let right = apply_edit(&adjusted, &apply_edit(&pre, &d).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }
        let after = apply_edit(&diff, &d).unwrap();
        let post = pick(after.arity(), s1, EditId::new("P", 1));
        if let TransformOutcome::Defined { result, adjusted, .. } = retract(&post, &diff).unwrap() {
            let left = apply_edit(&post, &after).unwrap();
            let right = apply_edit(&adjusted, &apply_edit(&result, &d).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }
    }

    #[test]
    fn grounded_means_id((s1, s2, n) in (any::<usize>(), any::<usize>(), 1..5usize)) {
        let pre = pick(n, s1, EditId::new("P", 1));
        let diff = pick(n, s2, EditId::new("D", 1));
        if let TransformOutcome::Defined { result, grounded, .. } = project(&pre, &diff).unwrap() {
            prop_assert_eq!(grounded, result.is_id() && !pre.is_id());
        }
    }

    #[test]
    fn same_insert_cancels((i, t) in (1..6usize, 0..4usize)) {
        let e = Edit::ins(i, TYPES[t], EditId::new("R", 9));
        prop_assert_eq!(
            project(&e, &e).unwrap(),
            TransformOutcome::Defined { result: Edit::Id, adjusted: Edit::Id, grounded: true }
        );
    }

    #[test]
    fn recording_tracks_both_documents((ancestor, steps) in (document(4), prop::collection::vec((any::<bool>(), any::<usize>()), 0..16))) {
        let mut pair = VariantPair::new(ancestor.clone());
        let mut truth = [ancestor.clone(), ancestor];
        for (k, (on_a, selector)) in steps.into_iter().enumerate() {
            let (side, slot) = if on_a { (Side::A, 0) } else { (Side::B, 1) };
            let edit = pick_change(truth[slot].arity(), selector, EditId::new(side.to_string(), k as u64 + 1));
            let other_before = pair.document(side.other()).unwrap();
            let diffs_before = pair.diffs(side.other()).len();
            let next = pair.record_edit(side, &edit).unwrap();
            truth[slot] = apply_edit(&edit, &truth[slot]).unwrap();
            prop_assert_eq!(next.document(side).unwrap(), truth[slot].clone());
            prop_assert_eq!(next.document(side.other()).unwrap(), other_before);
            prop_assert!(next.diffs(side).iter().chain(next.diffs(side.other())).all(|e| !e.is_id()));
            if next.agreement != pair.agreement {
                // absorbed: the other side never gains differences
                prop_assert!(next.diffs(side.other()).len() <= diffs_before);
            }
            next.check().unwrap();
            pair = next;
        }
    }

    #[test]
    fn migration_leaves_its_source_alone((ancestor, steps, pick_index) in (document(3), prop::collection::vec((any::<bool>(), any::<usize>()), 1..10), any::<usize>())) {
        let mut pair = VariantPair::new(ancestor);
        for (k, (on_a, selector)) in steps.into_iter().enumerate() {
            let side = if on_a { Side::A } else { Side::B };
            let arity = pair.document(side).unwrap().arity();
            let edit = pick_change(arity, selector, EditId::new(side.to_string(), k as u64 + 1));
            pair = pair.record_edit(side, &edit).unwrap();
        }
        for side in [Side::A, Side::B] {
            let n = pair.diffs(side).len();
            if n == 0 {
                continue;
            }
            let index = pick_index % n + 1;
            let report = migrate_with_dependencies(&pair, side, index).unwrap();
            prop_assert_eq!(report.pair.document(side).unwrap(), pair.document(side).unwrap());
            let target = replay(&pair.document(side.other()).unwrap(), &report.applied).unwrap();
            prop_assert_eq!(report.pair.document(side.other()).unwrap(), target);
            prop_assert!(report.migrated_indexes.contains(&index));
            report.pair.check().unwrap();
        }
    }

    #[test]
    fn syntax_round_trips((n, s) in (0..6usize, any::<usize>())) {
        let e = pick(n, s, EditId::new("Q", 3));
        let parsed = syntax::parse(&syntax::print(&e)).unwrap().into_edit(|| EditId::new("Z", 1));
        prop_assert_eq!(parsed, e);
    }

    #[test]
    fn images_round_trip(selectors in prop::collection::vec(any::<usize>(), 0..10)) {
        let mut image = ImageFile::new("A").unwrap();
        let mut doc = Document::empty();
        for s in selectors {
            let id = image.next_id();
            let edit = pick_change(doc.arity(), s, id);
            if matches!(edit, Edit::Ins { .. }) {
                image.fresh_id();
            }
            doc = apply_edit(&edit, &doc).unwrap();
            image.history.push(edit);
        }
        let text = image.to_canonical_json();
        let back = ImageFile::from_json(&text).unwrap();
        prop_assert_eq!(back.to_canonical_json(), text);
        prop_assert_eq!(back.document::<f64>().unwrap(), doc);
        prop_assert_eq!(back, image);
    }
}
