//! Multi-execution enforcement: ME, MEF, MEST and level-assignment driven ME_L.
//!
//! ME, MEF and MEST see the program only as a [`Behaviour`]: they choose
//! derived inputs, run the program on them and recombine the outputs. Sub-runs
//! execute sequentially in canonical label order; the first divergence makes
//! the whole run diverge.

mod assignment;
mod check;

pub use assignment::{
    assignment_by_name, assignment_catalog, ConstLevels, EmptyNonpointwise, FromEnforcer, Full,
    HAbsent, LabelIntersect, LevelAssignment, OutputLabels,
};
pub use check::{check_assignment, la_compare, AssignmentReport, CompareReport, ProgramCheck};

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde_json::json;

use crate::dsl::{Behaviour, Evaluator, Outcome, Program};
use crate::error::{Error, Result};
use crate::labeled::{LabeledSet, LabeledValue};
use crate::lattice::{Closure, Label, PrincipalUniverse};
use crate::oracle::{canonical_subsets, UniverseSpec, MAX_ELEMENTS};

/// One execution of the underlying program on a derived input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubRun {
    pub level: Label,
    pub input: LabeledSet,
    pub outcome: Outcome,
}

/// The outcome of an enforced run together with the sub-runs it performed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enforcement {
    pub outcome: Outcome,
    pub sub_runs: Vec<SubRun>,
}

impl Enforcement {
    /// `{"kind", "output"}`, plus `"trace"` when `with_trace` is set.
    pub fn to_json(&self, u: &PrincipalUniverse, with_trace: bool) -> serde_json::Value {
        let mut out = self.outcome.to_json(u);
        if with_trace {
            out["trace"] = self
                .sub_runs
                .iter()
                .map(|r| {
                    json!({
                        "label": u.label_to_json(r.level),
                        "input": r.input.to_json(u),
                        "outcome": r.outcome.to_json(u),
                    })
                })
                .collect();
        }
        out
    }
}

/// Accumulates the union of filtered sub-run outputs.
struct MultiRun {
    acc: LabeledSet,
    sub_runs: Vec<SubRun>,
    exhausted: bool,
}

impl MultiRun {
    fn new() -> Self {
        MultiRun {
            acc: LabeledSet::new(),
            sub_runs: Vec::new(),
            exhausted: false,
        }
    }

    /// Records a sub-run. Returns `false` once the run has diverged.
    fn record(
        &mut self,
        level: Label,
        input: LabeledSet,
        outcome: Outcome,
        keep: impl Fn(&LabeledValue) -> bool,
    ) -> bool {
        match &outcome {
            Outcome::Terminated(out) => self.acc.extend_from(&out.filter(keep)),
            Outcome::Diverged => {
                self.sub_runs.push(SubRun {
                    level,
                    input,
                    outcome,
                });
                return false;
            }
            // Keep scanning: a later divergence still has to win.
            Outcome::FuelExhausted => self.exhausted = true,
        }
        self.sub_runs.push(SubRun {
            level,
            input,
            outcome,
        });
        true
    }

    fn finish(self, diverged: bool) -> Enforcement {
        let outcome = if diverged {
            Outcome::Diverged
        } else if self.exhausted {
            Outcome::FuelExhausted
        } else {
            Outcome::Terminated(self.acc)
        };
        Enforcement {
            outcome,
            sub_runs: self.sub_runs,
        }
    }
}

/// Runs `p` on `x↓ℓ` for each level and keeps the outputs selected by `keep(ℓ, ·)`.
fn multi_execute<I>(
    p: &dyn Behaviour,
    x: &LabeledSet,
    levels: I,
    keep: impl Fn(Label, &LabeledValue) -> bool,
) -> Enforcement
where
    I: IntoIterator<Item = Label>,
{
    let mut run = MultiRun::new();
    for level in levels {
        let input = x.project(level);
        let outcome = p.run(&input);
        if !run.record(level, input, outcome, |v| keep(level, v)) {
            return run.finish(true);
        }
    }
    run.finish(false)
}

/// `ME[p](x) = ⋃ { p(x↓ℓ)@ℓ | ℓ ∈ L }`, one sub-run per lattice element.
pub fn me(p: &dyn Behaviour, x: &LabeledSet, u: &PrincipalUniverse) -> Enforcement {
    multi_execute(p, x, u.all_labels(), |level, v| v.label == level)
}

/// `MEF[p](x) = ⋃ { p(x↓ℓ)@(ℓ↑C(L(x))) | ℓ ∈ C(L(x)) }`.
///
/// Only the closure of the labels present in `x` is visited, so the lattice
/// itself is never enumerated.
pub fn mef(p: &dyn Behaviour, x: &LabeledSet) -> Enforcement {
    let closure = Closure::new(x.labels());
    multi_execute(p, x, closure.labels().iter().copied(), |level, v| {
        closure.owner(v.label) == level
    })
}

/// MEF with ME's exact-level selection in place of up-neighbourhoods.
///
/// This is not a sound implementation of MEF: it drops outputs written above
/// every projection level. It exists so equivalence sweeps can be shown to
/// catch the mistake.
pub fn mef_exact_selection(p: &dyn Behaviour, x: &LabeledSet) -> Enforcement {
    let closure = Closure::new(x.labels());
    multi_execute(p, x, closure.labels().iter().copied(), |level, v| {
        v.label == level
    })
}

/// A terminating representative found by the dovetail search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub input: LabeledSet,
    pub output: LabeledSet,
    /// Candidates examined before this one was accepted, including itself.
    pub examined: usize,
}

/// The candidate inputs `y ∼ℓ x`: `x↓ℓ` plus each subset of the elements of
/// `A × L` whose labels are not below `ℓ`, smallest additions first.
struct Candidates {
    base: LabeledSet,
    pool: Vec<LabeledValue>,
}

impl Candidates {
    fn new(x: &LabeledSet, level: Label, spec: &UniverseSpec) -> Result<Self> {
        spec.check_input(x)?;
        let pool: Vec<LabeledValue> = spec
            .elements()
            .into_iter()
            .filter(|e| !e.label.leq(level))
            .collect();
        if pool.len() > MAX_ELEMENTS {
            return Err(Error::UniverseTooLarge {
                elements: pool.len(),
                limit: MAX_ELEMENTS,
            });
        }
        Ok(Candidates {
            base: x.project(level),
            pool,
        })
    }

    fn iter(&self) -> impl Iterator<Item = LabeledSet> + '_ {
        canonical_subsets(self.pool.len()).map(|idx| {
            let mut y = self.base.clone();
            for i in idx {
                y.insert(self.pool[i].value, self.pool[i].label);
            }
            y
        })
    }
}

/// The first `y ∼ℓ x` (in canonical candidate order) on which `p` terminates.
///
/// Program definedness is decidable in this setting, so the dovetail reduces
/// to a linear scan. The result depends on `x` only through `x↓ℓ`.
pub fn dovetail_first(
    p: &dyn Behaviour,
    x: &LabeledSet,
    level: Label,
    spec: &UniverseSpec,
) -> Result<Outcome<Candidate>> {
    let candidates = Candidates::new(x, level, spec)?;
    let mut exhausted = false;
    for (i, y) in candidates.iter().enumerate() {
        match p.run(&y) {
            Outcome::Terminated(output) => {
                return Ok(Outcome::Terminated(Candidate {
                    input: y,
                    output,
                    examined: i + 1,
                }));
            }
            Outcome::Diverged => {}
            Outcome::FuelExhausted => exhausted = true,
        }
    }
    if exhausted {
        return Ok(Outcome::FuelExhausted);
    }
    Err(Error::NoCandidate {
        level: spec.principals.display(level),
    })
}

/// Dovetail search by fuel rounds: round `k` runs the first `k` live
/// candidates with `k * slice` fuel (capped at the universe fuel) and
/// accepts the earliest one that terminates.
///
/// Unlike [`dovetail_first`], a later candidate that terminates quickly can
/// win over an earlier slow one.
pub fn dovetail_interleaved(
    p: &Program,
    x: &LabeledSet,
    level: Label,
    spec: &UniverseSpec,
    slice: u64,
) -> Result<Outcome<Candidate>> {
    if slice == 0 {
        return Err(Error::Precondition(
            "the fuel slice must be at least 1".into(),
        ));
    }
    let candidates: Vec<LabeledSet> = Candidates::new(x, level, spec)?.iter().collect();
    let mut diverged = vec![false; candidates.len()];
    let mut examined = 0;
    for round in 1u64.. {
        let fuel = round.saturating_mul(slice).min(spec.fuel);
        let width = (round as usize).min(candidates.len());
        for (i, y) in candidates.iter().enumerate().take(width) {
            if diverged[i] {
                continue;
            }
            examined += 1;
            match crate::dsl::eval(p, y, fuel) {
                Outcome::Terminated(output) => {
                    return Ok(Outcome::Terminated(Candidate {
                        input: y.clone(),
                        output,
                        examined,
                    }));
                }
                Outcome::Diverged => diverged[i] = true,
                Outcome::FuelExhausted => {}
            }
        }
        if width == candidates.len() && fuel == spec.fuel {
            break;
        }
    }
    if diverged.iter().all(|&d| d) {
        Err(Error::NoCandidate {
            level: spec.principals.display(level),
        })
    } else {
        Ok(Outcome::FuelExhausted)
    }
}

/// MEST: diverges exactly when `p(x)` does; otherwise multi-executes over
/// `C(L(x))`, replacing each projection `x↓ℓ` by the dovetailed terminating
/// representative of its class.
pub fn mest(p: &dyn Behaviour, x: &LabeledSet, spec: &UniverseSpec) -> Result<Enforcement> {
    spec.check_input(x)?;
    let mut run = MultiRun::new();
    // The raw run is recorded at ⊤, since x = x↓⊤.
    let direct = p.run(x);
    run.sub_runs.push(SubRun {
        level: spec.principals.top(),
        input: x.clone(),
        outcome: direct.clone(),
    });
    match direct {
        Outcome::Terminated(_) => {}
        Outcome::Diverged => return Ok(run.finish(true)),
        Outcome::FuelExhausted => {
            run.exhausted = true;
            return Ok(run.finish(false));
        }
    }
    let closure = Closure::new(x.labels());
    for &level in closure.labels() {
        match dovetail_first(p, x, level, spec)? {
            Outcome::Terminated(c) => {
                run.record(level, c.input, Outcome::Terminated(c.output), |v| {
                    closure.owner(v.label) == level
                });
            }
            _ => {
                run.exhausted = true;
            }
        }
    }
    Ok(run.finish(false))
}

/// `ME_L[p](x) = ⋃ { p(x↓ℓ)@ℓ | ℓ ∈ L(p, x) }`.
pub fn me_l(
    assignment: &dyn LevelAssignment,
    p: &Program,
    x: &LabeledSet,
    spec: &UniverseSpec,
) -> Enforcement {
    let levels = match assignment.assign(p, x, spec) {
        Outcome::Terminated(levels) => levels,
        Outcome::Diverged => {
            return Enforcement {
                outcome: Outcome::Diverged,
                sub_runs: Vec::new(),
            }
        }
        Outcome::FuelExhausted => {
            return Enforcement {
                outcome: Outcome::FuelExhausted,
                sub_runs: Vec::new(),
            }
        }
    };
    multi_execute(&Evaluator::new(p, spec.fuel), x, levels, |level, v| {
        v.label == level
    })
}

/// The black-box mechanisms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BaseMechanism {
    Me,
    Mef,
    Mest,
}

impl BaseMechanism {
    pub const ALL: [BaseMechanism; 3] =
        [BaseMechanism::Me, BaseMechanism::Mef, BaseMechanism::Mest];

    pub fn name(self) -> &'static str {
        match self {
            BaseMechanism::Me => "me",
            BaseMechanism::Mef => "mef",
            BaseMechanism::Mest => "mest",
        }
    }

    pub fn enforce(
        self,
        p: &dyn Behaviour,
        x: &LabeledSet,
        spec: &UniverseSpec,
    ) -> Result<Enforcement> {
        match self {
            BaseMechanism::Me => Ok(me(p, x, &spec.principals)),
            BaseMechanism::Mef => Ok(mef(p, x)),
            BaseMechanism::Mest => mest(p, x, spec),
        }
    }
}

/// A mechanism selector: `me`, `mef`, `mest` or `mel:<assignment>`.
#[derive(Clone)]
pub enum Mechanism {
    Base(BaseMechanism),
    MeL(Arc<dyn LevelAssignment>),
}

impl Mechanism {
    pub fn parse(selector: &str, spec: &UniverseSpec) -> Result<Mechanism> {
        match selector {
            "me" => Ok(Mechanism::Base(BaseMechanism::Me)),
            "mef" => Ok(Mechanism::Base(BaseMechanism::Mef)),
            "mest" => Ok(Mechanism::Base(BaseMechanism::Mest)),
            _ => match selector.strip_prefix("mel:") {
                Some(name) => Ok(Mechanism::MeL(assignment_by_name(name, spec)?.into())),
                None => Err(Error::Unknown {
                    kind: "mechanism",
                    name: selector.to_string(),
                }),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            Mechanism::Base(b) => b.name().to_string(),
            Mechanism::MeL(a) => format!("mel:{}", a.name()),
        }
    }

    pub fn enforce(&self, p: &Program, x: &LabeledSet, spec: &UniverseSpec) -> Result<Enforcement> {
        match self {
            Mechanism::Base(b) => b.enforce(&Evaluator::new(p, spec.fuel), x, spec),
            Mechanism::MeL(a) => Ok(me_l(a.as_ref(), p, x, spec)),
        }
    }
}

impl fmt::Debug for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// `E[p]` for a fixed mechanism, program and universe.
#[derive(Clone, Debug)]
pub struct EnforcedProgram {
    pub mechanism: Mechanism,
    pub program: Program,
    pub spec: UniverseSpec,
}

impl EnforcedProgram {
    pub fn new(mechanism: Mechanism, program: Program, spec: UniverseSpec) -> Self {
        EnforcedProgram {
            mechanism,
            program,
            spec,
        }
    }

    pub fn enforce(&self, x: &LabeledSet) -> Result<Enforcement> {
        self.mechanism.enforce(&self.program, x, &self.spec)
    }
}

impl Behaviour for EnforcedProgram {
    /// # Panics
    ///
    /// Panics if MEST is given an input outside the universe.
    fn run(&self, input: &LabeledSet) -> Outcome {
        self.enforce(input)
            .expect("input lies in the enforcement universe")
            .outcome
    }
}

/// Labels of an enforced run, for use as a level assignment.
pub(crate) fn output_labels(outcome: Outcome) -> Outcome<BTreeSet<Label>> {
    outcome.map(|out| out.labels())
}
