use multiexec::labeled::{LabeledSet, LabeledValue};
use multiexec::lattice::{Label, PrincipalUniverse};
use proptest::prelude::*;

fn universe() -> PrincipalUniverse {
    PrincipalUniverse::new(["A", "B", "C"]).unwrap()
}

fn label() -> impl Strategy<Value = Label> {
    (0u64..8).prop_map(Label::from_bits)
}

fn labeled_set() -> impl Strategy<Value = LabeledSet> {
    prop::collection::vec((0u64..3, label()), 0..6).prop_map(|v| {
        v.into_iter()
            .map(|(a, l)| LabeledValue::new(a, l))
            .collect()
    })
}

proptest! {
    #[test]
    fn projection_is_idempotent_and_monotone(x in labeled_set(), l in label(), m in label()) {
        let p = x.project(l);
        prop_assert_eq!(p.project(l), p.clone());
        prop_assert!(p.is_subset(&x));
        prop_assert!(p.iter().all(|v| v.label.leq(l)));
        if l.leq(m) {
            prop_assert!(p.is_subset(&x.project(m)));
        }
        // Projecting twice projects to the meet.
        prop_assert_eq!(p.project(m), x.project(Label::from_bits(l.bits() & m.bits())));
    }

    #[test]
    fn equivalence_is_an_equivalence(x in labeled_set(), y in labeled_set(), z in labeled_set(), l in label()) {
        prop_assert!(x.equiv(&x, l));
        prop_assert_eq!(x.equiv(&y, l), y.equiv(&x, l));
        if x.equiv(&y, l) && y.equiv(&z, l) {
            prop_assert!(x.equiv(&z, l));
        }
        prop_assert!(x.equiv(&x.project(l), l));
    }

    #[test]
    fn finer_equivalence_implies_coarser(x in labeled_set(), y in labeled_set(), l in label(), m in label()) {
        if l.leq(m) && x.equiv(&y, m) {
            prop_assert!(x.equiv(&y, l));
        }
    }

    #[test]
    fn selection_partitions_by_label(x in labeled_set()) {
        let u = universe();
        let mut total = LabeledSet::new();
        for l in u.all_labels() {
            let s = x.select(l);
            prop_assert!(s.iter().all(|v| v.label == l));
            total.extend_from(&s);
        }
        prop_assert_eq!(total, x.clone());
        prop_assert_eq!(Label::join_all(x.labels()), x.label_join());
    }

    #[test]
    fn literal_and_json_read_back(x in labeled_set()) {
        let u = universe();
        prop_assert_eq!(LabeledSet::parse_literal(&x.display(&u), &u).unwrap(), x.clone());
        prop_assert_eq!(LabeledSet::from_json(&x.to_json(&u), &u).unwrap(), x);
    }
}

#[test]
fn literal_errors_point_at_the_problem() {
    let u = universe();
    let err = LabeledSet::parse_literal("{1^{A}, 2^{Z}}", &u).unwrap_err();
    assert!(
        matches!(
            err,
            multiexec::Error::Syntax {
                line: 1,
                column: 12,
                ..
            }
        ),
        "{err:?}"
    );
    assert!(LabeledSet::parse_literal("{1^{A}", &u).is_err());
}
