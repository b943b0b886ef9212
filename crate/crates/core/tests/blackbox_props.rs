use multiexec::blackbox::{
    attack, budgeted_mechanism, consistent, shipped_mechanisms, unbudgeted_me, AttackVerdict,
    BudgetedBase,
};
use multiexec::dsl::{catalog, Evaluator};
use multiexec::enforce::{me, mef};
use multiexec::labeled::{to_input, LabeledSet, LabeledValue};
use multiexec::lattice::{Closure, Label, PrincipalUniverse};
use multiexec::oracle::{classify, Security, TerminationClass, UniverseSpec};
use proptest::prelude::*;

const N: usize = 4;

fn universe() -> PrincipalUniverse {
    PrincipalUniverse::numbered(N).unwrap()
}

fn input() -> impl Strategy<Value = LabeledSet> {
    prop::collection::vec(0u64..1 << N, 0..4).prop_map(|ls| {
        ls.into_iter()
            .map(|l| LabeledValue::new(1, Label::from_bits(l)))
            .collect()
    })
}

fn program() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["id", "combineAll", "leakAll", "empty"])
}

proptest! {
    #[test]
    fn traces_respect_the_budget(x in input(), name in program(), k in 1usize..20, seed in any::<u64>()) {
        let u = universe();
        let p = catalog::program(name, &u).unwrap();
        let ev = Evaluator::new(&p, 1_000);
        for m in shipped_mechanisms(k, seed, &u).unwrap() {
            let run = m.run(&ev, &x).unwrap();
            prop_assert!(run.trace.len() <= k);
        }
    }

    #[test]
    fn sequences_are_faithful_when_the_budget_suffices(x in input(), name in program()) {
        let u = universe();
        let p = catalog::program(name, &u).unwrap();
        let ev = Evaluator::new(&p, 1_000);
        let closure = Closure::new(x.labels()).len();
        for k in [closure, closure + 3] {
            let run = budgeted_mechanism(BudgetedBase::Mef, k, &u).unwrap().run(&ev, &x).unwrap();
            prop_assert_eq!(run.outcome, mef(&ev, &x).outcome);
        }
        let run = unbudgeted_me(&u).run(&ev, &x).unwrap();
        prop_assert_eq!(run.outcome, me(&ev, &x, &u).outcome);
    }
}

#[test]
fn attack_dilemma_for_every_shipped_mechanism() {
    for n in 3..=6 {
        let u = PrincipalUniverse::numbered(n).unwrap();
        let max = (1usize << n) - 3;
        for k in [1, 2, 5, 8, max] {
            if k > max {
                continue;
            }
            for m in shipped_mechanisms(k, 11, &u).unwrap() {
                let r = attack(&m, n, 1_000).unwrap();
                assert!(
                    matches!(
                        r.verdict,
                        AttackVerdict::SecurityViolation | AttackVerdict::TransparencyDefect
                    ),
                    "{} n={n} k={k}: {:?}",
                    m.name,
                    r.verdict
                );
            }
        }
    }
}

#[test]
fn black_box_equalities_hold_for_prefix_mechanisms() {
    let u = PrincipalUniverse::numbered(5).unwrap();
    for base in [BudgetedBase::Me, BudgetedBase::Mef] {
        let m = budgeted_mechanism(base, 8, &u).unwrap();
        let r = attack(&m, 5, 1_000).unwrap();
        assert_eq!(r.verdict, AttackVerdict::SecurityViolation);
        assert_eq!(r.black_box_equalities(), Some((true, true)));
    }
}

#[test]
fn attack_programs_classify_as_claimed() {
    let u = universe();
    let spec = UniverseSpec::new(u.clone(), vec![1], 1_000).unwrap();
    let s_prime = u.label(["1", "4"]).unwrap();
    let run = |p: &multiexec::dsl::Program| {
        classify(&p.name, &Evaluator::new(p, spec.fuel), &spec).unwrap()
    };
    assert_eq!(
        run(&catalog::program("empty", &u).unwrap()).security,
        Security::Secure(TerminationClass::Total)
    );
    assert_eq!(
        run(&catalog::greater(s_prime)).security,
        Security::Secure(TerminationClass::Total)
    );
    let equal = run(&catalog::equal(s_prime));
    assert!(!equal.ni);
    assert_eq!(equal.termination, TerminationClass::Total);
}

#[test]
fn mef_traces_are_not_consistent_from_nothing() {
    // Testing x↓ℓ directly uses labels of x that no output has revealed.
    let u = universe();
    let p = catalog::program("empty", &u).unwrap();
    let m = budgeted_mechanism(BudgetedBase::Mef, 4, &u).unwrap();
    let run = m.run(&Evaluator::new(&p, 100), &to_input(u.top())).unwrap();
    assert!(!consistent(&Default::default(), &run.trace));
    assert!(consistent(&to_input(u.top()).labels(), &run.trace));
}
