//! Black-box enforcement as test sequences, and the counting attack that
//! defeats any budget smaller than the number of candidate label sets.
//!
//! A black-box mechanism maps an input to a [`TestSequence`]: a chain of
//! program tests, each followed by a continuation that sees only the tested
//! output. Executing the sequence against a program gives the enforced
//! output; the tests and their outputs form the trace.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{DefaultHasher, Hash, Hasher};
use std::rc::Rc;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::dsl::{catalog, Behaviour, Evaluator, Outcome, Program};
use crate::error::{Error, Result};
use crate::labeled::{to_input, LabeledSet, LabeledValue};
use crate::lattice::{Closure, Label, PrincipalUniverse};

/// Largest principal count the attack accepts.
pub const MAX_ATTACK_PRINCIPALS: usize = 16;

pub type Continuation = Box<dyn FnOnce(LabeledSet) -> TestSequence>;

pub enum TestSequence {
    Finished(LabeledSet),
    Test(LabeledSet, Continuation),
}

impl fmt::Debug for TestSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestSequence::Finished(z) => f.debug_tuple("Finished").field(z).finish(),
            TestSequence::Test(y, _) => f.debug_tuple("Test").field(y).finish_non_exhaustive(),
        }
    }
}

/// A tested input and the output the program produced on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub input: LabeledSet,
    pub output: LabeledSet,
}

pub type Trace = Vec<TraceEntry>;

/// The result of folding a test sequence against a program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution {
    pub outcome: Outcome,
    /// Completed tests, in execution order. A test whose run did not
    /// terminate ends the sequence and is not recorded.
    pub trace: Trace,
}

/// Runs the sequence, failing once more than `budget` tests are requested.
pub fn run_sequence(
    p: &dyn Behaviour,
    mut t: TestSequence,
    budget: Option<usize>,
) -> Result<Execution> {
    let mut trace = Vec::new();
    loop {
        match t {
            TestSequence::Finished(z) => {
                return Ok(Execution {
                    outcome: Outcome::Terminated(z),
                    trace,
                })
            }
            TestSequence::Test(y, c) => {
                if let Some(budget) = budget {
                    if trace.len() >= budget {
                        return Err(Error::BudgetExceeded { budget });
                    }
                }
                match p.run(&y) {
                    Outcome::Terminated(z) => {
                        trace.push(TraceEntry {
                            input: y,
                            output: z.clone(),
                        });
                        t = c(z);
                    }
                    other => {
                        return Ok(Execution {
                            outcome: other,
                            trace,
                        })
                    }
                }
            }
        }
    }
}

/// `Exec(p, t)`.
pub fn exec(p: &dyn Behaviour, t: TestSequence, budget: Option<usize>) -> Result<Outcome> {
    Ok(run_sequence(p, t, budget)?.outcome)
}

/// `Trace(p, t)`, defined when `Exec(p, t)` terminates.
pub fn trace(p: &dyn Behaviour, t: TestSequence, budget: Option<usize>) -> Result<Outcome<Trace>> {
    let run = run_sequence(p, t, budget)?;
    Ok(run.outcome.map(|_| run.trace))
}

/// `Consistent(S0, t)`: every tested input only uses labels in the closure
/// of the labels known so far, and each output adds its labels to what is known.
pub fn consistent(initial: &BTreeSet<Label>, trace: &[TraceEntry]) -> bool {
    let mut known = initial.clone();
    for entry in trace {
        let closure = Closure::new(known.iter().copied());
        if !entry.input.labels().iter().all(|&l| closure.contains(l)) {
            return false;
        }
        known.extend(entry.output.labels());
    }
    true
}

type Keep = Rc<dyn Fn(Label, &LabeledValue) -> bool>;

/// Tests `x↓ℓ` for each level in order and finishes with the union of the
/// kept outputs.
fn projection_tests(
    x: Rc<LabeledSet>,
    levels: Rc<Vec<Label>>,
    i: usize,
    acc: LabeledSet,
    keep: Keep,
) -> TestSequence {
    let Some(&level) = levels.get(i) else {
        return TestSequence::Finished(acc);
    };
    let test = x.project(level);
    TestSequence::Test(
        test,
        Box::new(move |out| {
            let mut acc = acc;
            acc.extend_from(&out.filter(|v| keep(level, v)));
            projection_tests(x, levels, i + 1, acc, keep)
        }),
    )
}

/// Which outputs of the `x↓ℓ` run a mechanism keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selection {
    /// Exactly the outputs labeled `ℓ`.
    Exact,
    /// The outputs in `ℓ↑C(L(x))`.
    UpNeighborhood,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// `C(L(x))` in canonical order, then the rest of the lattice.
    ClosureThenLattice,
    /// `C(L(x))` in canonical order.
    Closure,
    /// A seeded random subset of `C(L(x))`, chosen as a function of `x`.
    RandomClosureSubset { seed: u64 },
}

/// A black-box mechanism with a hard bound on the number of tests it makes.
#[derive(Clone)]
pub struct BlackBoxMechanism {
    pub name: String,
    pub budget: usize,
    schedule: Schedule,
    selection: Selection,
    universe: Arc<PrincipalUniverse>,
}

impl fmt::Debug for BlackBoxMechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlackBoxMechanism")
            .field("name", &self.name)
            .field("budget", &self.budget)
            .field("schedule", &self.schedule)
            .field("selection", &self.selection)
            .finish()
    }
}

impl BlackBoxMechanism {
    fn levels(&self, x: &LabeledSet) -> Vec<Label> {
        let closure = Closure::new(x.labels());
        let mut levels: Vec<Label> = closure.labels().iter().copied().collect();
        match self.schedule {
            Schedule::ClosureThenLattice => {
                levels.extend(
                    self.universe
                        .all_labels()
                        .into_iter()
                        .filter(|l| !closure.contains(*l)),
                );
            }
            Schedule::Closure => {}
            Schedule::RandomClosureSubset { seed } => {
                let mut h = DefaultHasher::new();
                x.hash(&mut h);
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ h.finish());
                let k = self.budget.min(levels.len());
                let mut picked = sample(&mut rng, levels.len(), k).into_vec();
                picked.sort_unstable();
                levels = picked.into_iter().map(|i| levels[i]).collect();
            }
        }
        levels.truncate(self.budget);
        levels
    }

    /// `e(x)`: the test sequence this mechanism runs on input `x`.
    pub fn sequence(&self, x: &LabeledSet) -> TestSequence {
        let closure = Closure::new(x.labels());
        let keep: Keep = match self.selection {
            Selection::Exact => Rc::new(|level, v| v.label == level),
            Selection::UpNeighborhood => Rc::new(move |level, v| closure.owner(v.label) == level),
        };
        projection_tests(
            Rc::new(x.clone()),
            Rc::new(self.levels(x)),
            0,
            LabeledSet::new(),
            keep,
        )
    }

    /// `E[p](x)`, with the budget enforced.
    pub fn run(&self, p: &dyn Behaviour, x: &LabeledSet) -> Result<Execution> {
        run_sequence(p, self.sequence(x), Some(self.budget))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BudgetedBase {
    Me,
    Mef,
}

/// `base` restricted to its first `k` projection levels.
///
/// The budgeted MEF tests a canonical-order prefix of `C(L(x))`. The budgeted
/// ME tests `C(L(x))` first and then the rest of the lattice, so that with a
/// budget of at least `|L|` it coincides with ME.
pub fn budgeted_mechanism(
    base: BudgetedBase,
    k: usize,
    universe: &PrincipalUniverse,
) -> Result<BlackBoxMechanism> {
    if k == 0 {
        return Err(Error::Precondition("the budget must be at least 1".into()));
    }
    let (name, schedule, selection) = match base {
        BudgetedBase::Me => ("prefix-me", Schedule::ClosureThenLattice, Selection::Exact),
        BudgetedBase::Mef => ("prefix-mef", Schedule::Closure, Selection::UpNeighborhood),
    };
    Ok(BlackBoxMechanism {
        name: name.into(),
        budget: k,
        schedule,
        selection,
        universe: Arc::new(universe.clone()),
    })
}

/// MEF over a seeded random `k`-subset of `C(L(x))`.
pub fn random_subset_mef(
    k: usize,
    seed: u64,
    universe: &PrincipalUniverse,
) -> Result<BlackBoxMechanism> {
    let mut m = budgeted_mechanism(BudgetedBase::Mef, k, universe)?;
    m.name = "random-mef".into();
    m.schedule = Schedule::RandomClosureSubset { seed };
    Ok(m)
}

/// ME as a test sequence, with a budget of `|L|` tests.
pub fn unbudgeted_me(universe: &PrincipalUniverse) -> BlackBoxMechanism {
    let budget = universe.all_labels().len();
    let mut m =
        budgeted_mechanism(BudgetedBase::Me, budget, universe).expect("lattices are non-empty");
    m.name = "me".into();
    m
}

/// The budgeted mechanisms the attack is demonstrated against.
pub fn shipped_mechanisms(
    k: usize,
    seed: u64,
    universe: &PrincipalUniverse,
) -> Result<Vec<BlackBoxMechanism>> {
    Ok(vec![
        budgeted_mechanism(BudgetedBase::Me, k, universe)?,
        budgeted_mechanism(BudgetedBase::Mef, k, universe)?,
        random_subset_mef(k, seed, universe)?,
    ])
}

/// Resolves `prefix-me`, `prefix-mef`, `random-mef` or `me` (aliases `me`/`mef`
/// for the prefix mechanisms are accepted when a budget is given).
pub fn mechanism_by_name(
    name: &str,
    k: Option<usize>,
    seed: u64,
    universe: &PrincipalUniverse,
) -> Result<BlackBoxMechanism> {
    match (name, k) {
        ("me", None) => Ok(unbudgeted_me(universe)),
        ("prefix-me" | "me", Some(k)) => budgeted_mechanism(BudgetedBase::Me, k, universe),
        ("prefix-mef" | "mef", Some(k)) => budgeted_mechanism(BudgetedBase::Mef, k, universe),
        ("random-mef", Some(k)) => random_subset_mef(k, seed, universe),
        ("prefix-me" | "prefix-mef" | "mef" | "random-mef", None) => Err(Error::Precondition(
            format!("mechanism `{name}` needs a budget"),
        )),
        _ => Err(Error::Unknown {
            kind: "black-box mechanism",
            name: name.to_string(),
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttackVerdict {
    SecurityViolation,
    TransparencyDefect,
    Inapplicable,
}

impl AttackVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            AttackVerdict::SecurityViolation => "security-violation",
            AttackVerdict::TransparencyDefect => "transparency-defect",
            AttackVerdict::Inapplicable => "inapplicable",
        }
    }
}

/// The four enforced runs the verdict is read from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evidence {
    /// `E[equal](toInput(S))`.
    pub equal_s: Execution,
    /// `E[empty](toInput(S))`.
    pub empty_s: Execution,
    /// `E[equal](toInput(S′))`.
    pub equal_s_prime: Execution,
    /// `E[greater](toInput(S′))`.
    pub greater_s_prime: Execution,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttackReport {
    pub mechanism: String,
    pub n: usize,
    pub budget: usize,
    pub universe: PrincipalUniverse,
    /// Number of distinct tests `E[empty]` made on `toInput(S)`.
    pub tests: usize,
    pub s_prime: Option<Label>,
    pub verdict: AttackVerdict,
    pub evidence: Option<Evidence>,
}

impl AttackReport {
    /// `E[equal](toInput(S)) = E[empty](toInput(S))` and
    /// `E[equal](toInput(S′)) = E[greater](toInput(S′))`.
    pub fn black_box_equalities(&self) -> Option<(bool, bool)> {
        self.evidence.as_ref().map(|e| {
            (
                e.equal_s.outcome == e.empty_s.outcome,
                e.equal_s_prime.outcome == e.greater_s_prime.outcome,
            )
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let u = &self.universe;
        let run = |e: &Execution| {
            let mut v = e.outcome.to_json(u);
            v["tests"] = json!(e.trace.len());
            v["consistent"] = json!(consistent(&BTreeSet::new(), &e.trace));
            v
        };
        json!({
            "mechanism": self.mechanism,
            "n": self.n,
            "budget": self.budget,
            "tests": self.tests,
            "s_prime": self.s_prime.map(|l| u.label_to_json(l)),
            "verdict": self.verdict.as_str(),
            "evidence": self.evidence.as_ref().map(|e| json!({
                "equal_s": run(&e.equal_s),
                "empty_s": run(&e.empty_s),
                "equal_s_prime": run(&e.equal_s_prime),
                "greater_s_prime": run(&e.greater_s_prime),
            })),
            "black_box_equalities": self.black_box_equalities().map(|(a, b)| json!([a, b])),
        })
    }
}

/// The first nonempty proper `S′ ⊂ S` (canonical label order) such that no
/// tested input contains `toInput(S′)` while having label join exactly `S′`.
pub fn uncovered_subset(universe: &PrincipalUniverse, tests: &[LabeledSet]) -> Option<Label> {
    let top = universe.top();
    universe
        .all_labels()
        .into_iter()
        .filter(|&s| !s.is_bottom() && s != top)
        .find(|&s| {
            let needle = to_input(s);
            !tests
                .iter()
                .any(|x| needle.is_subset(x) && x.label_join() == s)
        })
}

/// Runs the construction against `mechanism` over principals `1..n` with the
/// single value `1`.
pub fn attack(mechanism: &BlackBoxMechanism, n: usize, fuel: u64) -> Result<AttackReport> {
    if n == 0 || n > MAX_ATTACK_PRINCIPALS {
        return Err(Error::Precondition(format!(
            "n must lie in 1..={MAX_ATTACK_PRINCIPALS}, got {n}"
        )));
    }
    let universe = PrincipalUniverse::numbered(n)?;
    if mechanism.universe.len() != n {
        return Err(Error::UniverseMismatch);
    }
    let mut report = AttackReport {
        mechanism: mechanism.name.clone(),
        n,
        budget: mechanism.budget,
        universe: universe.clone(),
        tests: 0,
        s_prime: None,
        verdict: AttackVerdict::Inapplicable,
        evidence: None,
    };
    if (1usize << n) - 2 <= mechanism.budget {
        return Ok(report);
    }

    let s = universe.top();
    let x_s = to_input(s);
    let empty = catalog::program("empty", &universe)?;
    let empty_s = mechanism.run(&Evaluator::new(&empty, fuel), &x_s)?;
    let tested: Vec<LabeledSet> = empty_s
        .trace
        .iter()
        .map(|t| t.input.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    report.tests = tested.len();
    let s_prime = uncovered_subset(&universe, &tested).ok_or_else(|| {
        Error::Precondition(format!(
            "{} covered every candidate S′ within its budget",
            mechanism.name
        ))
    })?;
    report.s_prime = Some(s_prime);

    let x_s_prime = to_input(s_prime);
    let equal = catalog::equal(s_prime);
    let greater = catalog::greater(s_prime);
    let run = |p: &Program, x: &LabeledSet| mechanism.run(&Evaluator::new(p, fuel), x);
    let evidence = Evidence {
        equal_s: run(&equal, &x_s)?,
        empty_s,
        equal_s_prime: run(&equal, &x_s_prime)?,
        greater_s_prime: run(&greater, &x_s_prime)?,
    };

    let leak = match (&evidence.equal_s.outcome, &evidence.equal_s_prime.outcome) {
        (Outcome::Terminated(a), Outcome::Terminated(b)) => !a.equiv(b, s_prime),
        _ => false,
    };
    let defect = evidence.empty_s.outcome != Outcome::Terminated(LabeledSet::new())
        || evidence.greater_s_prime.outcome
            != Outcome::Terminated(LabeledSet::singleton(1, s_prime));
    report.verdict = if leak {
        AttackVerdict::SecurityViolation
    } else if defect {
        AttackVerdict::TransparencyDefect
    } else {
        return Err(Error::Precondition(format!(
            "{} is neither insecure on equal nor opaque on empty/greater; it cannot be black-box",
            mechanism.name
        )));
    };
    report.evidence = Some(evidence);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enforce::{me, mef};

    fn h() -> PrincipalUniverse {
        PrincipalUniverse::two_point()
    }

    #[test]
    fn finished_and_divergent_sequences() {
        let u = h();
        let z = LabeledSet::singleton(3, u.top());
        let id = catalog::program("id", &u).unwrap();
        let ev = Evaluator::new(&id, 100);
        assert_eq!(
            exec(&ev, TestSequence::Finished(z.clone()), None).unwrap(),
            Outcome::Terminated(z.clone())
        );
        assert_eq!(
            trace(&ev, TestSequence::Finished(z), None).unwrap(),
            Outcome::Terminated(vec![])
        );

        let absent = catalog::program("divergeIfHAbsent", &u).unwrap();
        let t = TestSequence::Test(LabeledSet::new(), Box::new(TestSequence::Finished));
        assert_eq!(
            exec(&Evaluator::new(&absent, 100), t, None).unwrap(),
            Outcome::Diverged
        );
    }

    #[test]
    fn budget_is_enforced() {
        let u = h();
        let id = catalog::program("id", &u).unwrap();
        let t = TestSequence::Test(
            LabeledSet::new(),
            Box::new(|_| TestSequence::Test(LabeledSet::new(), Box::new(TestSequence::Finished))),
        );
        assert_eq!(
            exec(&Evaluator::new(&id, 100), t, Some(1)),
            Err(Error::BudgetExceeded { budget: 1 })
        );
    }

    #[test]
    fn mef_as_sequence_on_leak_bit() {
        let u = h();
        let leak = catalog::program("leakBit", &u).unwrap();
        let ev = Evaluator::new(&leak, 100);
        let x = LabeledSet::singleton(1, u.top());
        let m = budgeted_mechanism(BudgetedBase::Mef, 8, &u).unwrap();
        let run = m.run(&ev, &x).unwrap();
        assert_eq!(run.outcome, mef(&ev, &x).outcome);
        assert_eq!(
            run.outcome,
            Outcome::Terminated(LabeledSet::singleton(0, Label::BOTTOM))
        );
        assert_eq!(run.trace.len(), 2);
        for entry in &run.trace {
            assert_eq!(
                crate::dsl::eval(&leak, &entry.input, 100),
                Outcome::Terminated(entry.output.clone())
            );
        }
    }

    #[test]
    fn prefix_and_full_budgets() {
        let u = PrincipalUniverse::numbered(3).unwrap();
        let id = catalog::program("id", &u).unwrap();
        let ev = Evaluator::new(&id, 100);
        let x = to_input(u.top());
        let one = budgeted_mechanism(BudgetedBase::Mef, 1, &u).unwrap();
        let run = one.run(&ev, &x).unwrap();
        assert_eq!(run.trace.len(), 1);
        assert_eq!(run.trace[0].input, LabeledSet::new());

        let full = budgeted_mechanism(BudgetedBase::Me, 8, &u).unwrap();
        assert_eq!(full.run(&ev, &x).unwrap().outcome, me(&ev, &x, &u).outcome);
        assert_eq!(unbudgeted_me(&u).budget, 8);
    }

    #[test]
    fn consistency_examples() {
        let u = PrincipalUniverse::new(["Alice"]).unwrap();
        let alice = u.top();
        assert!(consistent(&BTreeSet::new(), &[]));
        let t = vec![TraceEntry {
            input: LabeledSet::singleton(1, alice),
            output: LabeledSet::new(),
        }];
        assert!(!consistent(&BTreeSet::new(), &t));
        assert!(consistent(&BTreeSet::from([alice]), &t));
        // Labels learned from an output become usable afterwards.
        let learn = vec![
            TraceEntry {
                input: LabeledSet::new(),
                output: LabeledSet::singleton(0, alice),
            },
            TraceEntry {
                input: LabeledSet::singleton(1, alice),
                output: LabeledSet::new(),
            },
        ];
        assert!(consistent(&BTreeSet::new(), &learn));
    }

    #[test]
    fn attack_on_prefix_mef() {
        let u = PrincipalUniverse::numbered(4).unwrap();
        let m = budgeted_mechanism(BudgetedBase::Mef, 8, &u).unwrap();
        let r = attack(&m, 4, 1000).unwrap();
        assert_eq!(r.verdict, AttackVerdict::SecurityViolation);
        assert_eq!(r.s_prime, Some(u.label(["1", "4"]).unwrap()));
        let e = r.evidence.as_ref().unwrap();
        assert_eq!(e.equal_s.outcome, Outcome::Terminated(LabeledSet::new()));
        assert_eq!(
            e.equal_s_prime.outcome,
            Outcome::Terminated(LabeledSet::singleton(1, r.s_prime.unwrap()))
        );
        assert_eq!(r.black_box_equalities(), Some((true, true)));
        let json = r.to_json();
        assert_eq!(json["verdict"], "security-violation");
        assert_eq!(json["s_prime"], json!(["1", "4"]));
    }

    #[test]
    fn attack_is_inapplicable_with_a_large_budget() {
        let u = PrincipalUniverse::numbered(4).unwrap();
        let m = budgeted_mechanism(BudgetedBase::Mef, 32, &u).unwrap();
        assert_eq!(
            attack(&m, 4, 1000).unwrap().verdict,
            AttackVerdict::Inapplicable
        );
        assert_eq!(
            attack(&unbudgeted_me(&u), 4, 1000).unwrap().verdict,
            AttackVerdict::Inapplicable
        );
        assert!(attack(&m, 0, 1000).is_err());
        assert_eq!(attack(&m, 3, 1000), Err(Error::UniverseMismatch));
    }

    #[test]
    fn mechanism_names() {
        let u = PrincipalUniverse::numbered(2).unwrap();
        assert_eq!(
            mechanism_by_name("mef", Some(2), 0, &u).unwrap().name,
            "prefix-mef"
        );
        assert_eq!(mechanism_by_name("me", None, 0, &u).unwrap().budget, 4);
        assert!(mechanism_by_name("random-mef", None, 0, &u).is_err());
        assert!(mechanism_by_name("sme", Some(2), 0, &u).is_err());
        assert!(budgeted_mechanism(BudgetedBase::Me, 0, &u).is_err());
    }
}
