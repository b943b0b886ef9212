//! Brute-force ground truth for noninterference and the termination criteria.
//!
//! Every subset of `A × L` is enumerated in canonical order (by cardinality,
//! then lexicographically on the sorted elements). The subject is run once
//! per input and the outputs are kept for all checks, so a full
//! classification costs `2^|A×L|` runs.

use std::fmt;

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dsl::{Behaviour, Outcome, DEFAULT_FUEL};
use crate::error::{Error, Result};
use crate::labeled::{LabeledSet, LabeledValue};
use crate::lattice::{Label, PrincipalUniverse};

/// Largest `|A × L|` the oracle will enumerate.
pub const MAX_ELEMENTS: usize = 20;

/// The finite world a program is judged in: principals, values and fuel.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniverseSpec {
    #[serde(flatten)]
    pub principals: PrincipalUniverse,
    #[serde(default = "default_values")]
    pub values: Vec<u64>,
    #[serde(default = "default_fuel")]
    pub fuel: u64,
}

fn default_values() -> Vec<u64> {
    vec![0, 1]
}

fn default_fuel() -> u64 {
    DEFAULT_FUEL
}

impl UniverseSpec {
    pub fn new(principals: PrincipalUniverse, values: Vec<u64>, fuel: u64) -> Result<Self> {
        let spec = UniverseSpec {
            principals,
            values,
            fuel,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The given principals with values `{0, 1}` and the default fuel.
    pub fn with_principals(principals: PrincipalUniverse) -> Self {
        UniverseSpec {
            principals,
            values: default_values(),
            fuel: DEFAULT_FUEL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidUniverse(
                "the value universe must not be empty".into(),
            ));
        }
        if self.values.iter().duplicates().next().is_some() {
            return Err(Error::InvalidUniverse("duplicate values".into()));
        }
        if self.fuel == 0 {
            return Err(Error::InvalidUniverse("fuel must be at least 1".into()));
        }
        Ok(())
    }

    pub fn lattice(&self) -> &PrincipalUniverse {
        &self.principals
    }

    /// `|A × L|`, saturating for absurdly large universes.
    pub fn element_count(&self) -> usize {
        let labels = 1usize
            .checked_shl(self.principals.len() as u32)
            .unwrap_or(usize::MAX);
        self.values.len().saturating_mul(labels)
    }

    /// Every element of `A × L` in canonical order.
    pub fn elements(&self) -> Vec<LabeledValue> {
        let mut values = self.values.clone();
        values.sort_unstable();
        let labels = self.principals.all_labels();
        values
            .into_iter()
            .flat_map(|v| labels.iter().map(move |&l| LabeledValue::new(v, l)))
            .collect()
    }

    pub fn check_input(&self, x: &LabeledSet) -> Result<()> {
        x.check_universe(&self.principals)?;
        match x.iter().find(|e| !self.values.contains(&e.value)) {
            Some(e) => Err(Error::ValueOutsideUniverse(e.value)),
            None => Ok(()),
        }
    }
}

/// Index sets of `0..n` in canonical order: by size, then lexicographically.
pub fn canonical_subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..=n).flat_map(move |k| (0..n).combinations(k))
}

/// The enumerated input space of a [`UniverseSpec`].
#[derive(Clone, Debug)]
pub struct InputSpace {
    elements: Vec<LabeledValue>,
    labels: Vec<Label>,
    /// Inputs as element bitmasks, in canonical order.
    masks: Vec<u32>,
    /// Position of each mask within `masks`.
    position: Vec<u32>,
    /// Per label (same order as `labels`): the elements visible at it.
    visible: Vec<u32>,
}

impl InputSpace {
    pub fn new(spec: &UniverseSpec) -> Result<Self> {
        spec.validate()?;
        let m = spec.element_count();
        if m > MAX_ELEMENTS {
            return Err(Error::UniverseTooLarge {
                elements: m,
                limit: MAX_ELEMENTS,
            });
        }
        let elements = spec.elements();
        let labels = spec.principals.all_labels();
        let masks: Vec<u32> = canonical_subsets(m)
            .map(|idx| idx.into_iter().fold(0u32, |acc, i| acc | (1 << i)))
            .collect();
        let mut position = vec![0u32; masks.len()];
        for (i, &mask) in masks.iter().enumerate() {
            position[mask as usize] = i as u32;
        }
        let visible = labels
            .iter()
            .map(|&l| {
                elements
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e.label.leq(l))
                    .fold(0u32, |acc, (i, _)| acc | (1 << i))
            })
            .collect();
        Ok(InputSpace {
            elements,
            labels,
            masks,
            position,
            visible,
        })
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// The `i`-th input in canonical order.
    pub fn input(&self, i: usize) -> LabeledSet {
        self.set_of(self.masks[i])
    }

    pub fn inputs(&self) -> impl Iterator<Item = LabeledSet> + '_ {
        self.masks.iter().map(|&m| self.set_of(m))
    }

    fn set_of(&self, mask: u32) -> LabeledSet {
        (0..self.elements.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| self.elements[i])
            .collect()
    }

    /// Index of `x↓ℓ` where `x` is input `i` and `ℓ` is `labels()[label]`.
    fn projection(&self, i: usize, label: usize) -> usize {
        self.position[(self.masks[i] & self.visible[label]) as usize] as usize
    }
}

/// Every input of a universe paired with the subject's outcome on it.
#[derive(Clone, Debug)]
pub struct Observations {
    pub space: InputSpace,
    pub outcomes: Vec<Outcome>,
}

impl Observations {
    /// Runs `subject` on every input. Fails with [`Error::Inconclusive`] at
    /// the first input (canonical order) whose run exhausted its fuel.
    pub fn collect(subject: &dyn Behaviour, spec: &UniverseSpec) -> Result<Self> {
        let space = InputSpace::new(spec)?;
        let outcomes: Vec<Outcome> = (0..space.len())
            .into_par_iter()
            .map(|i| subject.run(&space.input(i)))
            .collect();
        if let Some(i) = outcomes.iter().position(|o| *o == Outcome::FuelExhausted) {
            return Err(Error::Inconclusive {
                input: space.input(i).display(&spec.principals),
            });
        }
        Ok(Observations { space, outcomes })
    }

    fn defined(&self, i: usize) -> bool {
        self.outcomes[i].is_terminated()
    }

    fn output(&self, i: usize) -> &LabeledSet {
        self.outcomes[i]
            .terminated()
            .expect("caller checked definedness")
    }

    /// Noninterference: at each level, every defined member of an
    /// equivalence class is compared against the first defined member.
    pub fn check_ni(&self) -> Verdict<NiWitness> {
        let mut rep = vec![u32::MAX; self.space.len()];
        for (li, &level) in self.space.labels().iter().enumerate() {
            rep.fill(u32::MAX);
            for i in 0..self.space.len() {
                if !self.defined(i) {
                    continue;
                }
                let class = self.space.projection(i, li);
                let r = rep[class];
                if r == u32::MAX {
                    rep[class] = i as u32;
                    continue;
                }
                let r = r as usize;
                if !self.output(r).equiv(self.output(i), level) {
                    return Verdict::Fails(NiWitness {
                        level,
                        x: self.space.input(r),
                        y: self.space.input(i),
                        out_x: self.output(r).clone(),
                        out_y: self.output(i).clone(),
                    });
                }
            }
        }
        Verdict::Holds
    }

    pub fn check_total(&self) -> Verdict<LabeledSet> {
        match (0..self.space.len()).find(|&i| !self.defined(i)) {
            Some(i) => Verdict::Fails(self.space.input(i)),
            None => Verdict::Holds,
        }
    }

    /// Termination sensitivity: definedness is constant on each class.
    pub fn check_ts(&self) -> Verdict<TsWitness> {
        let mut rep = vec![u32::MAX; self.space.len()];
        for (li, &level) in self.space.labels().iter().enumerate() {
            rep.fill(u32::MAX);
            for i in 0..self.space.len() {
                let class = self.space.projection(i, li);
                let r = rep[class];
                if r == u32::MAX {
                    rep[class] = i as u32;
                    continue;
                }
                let r = r as usize;
                if self.defined(r) != self.defined(i) {
                    return Verdict::Fails(TsWitness {
                        level,
                        x: self.space.input(r),
                        y: self.space.input(i),
                        x_defined: self.defined(r),
                    });
                }
            }
        }
        Verdict::Holds
    }

    /// Monotone termination: a defined run stays defined under every projection.
    pub fn check_mt(&self) -> Verdict<MtWitness> {
        for i in 0..self.space.len() {
            if !self.defined(i) {
                continue;
            }
            for (li, &level) in self.space.labels().iter().enumerate() {
                let j = self.space.projection(i, li);
                if !self.defined(j) {
                    return Verdict::Fails(MtWitness {
                        input: self.space.input(i),
                        level,
                        projected: self.space.input(j),
                    });
                }
            }
        }
        Verdict::Holds
    }

    pub fn classify(&self, program: &str) -> ClassificationReport {
        let ni = self.check_ni();
        let total = self.check_total();
        let ts = self.check_ts();
        let mt = self.check_mt();
        let termination = if total.holds() {
            TerminationClass::Total
        } else if ts.holds() {
            TerminationClass::TS
        } else if mt.holds() {
            TerminationClass::MT
        } else {
            TerminationClass::TI
        };
        let security = if ni.holds() {
            Security::Secure(termination)
        } else {
            Security::Insecure
        };
        ClassificationReport {
            program: program.to_string(),
            ni: ni.holds(),
            ni_witness: ni.witness(),
            termination,
            total_witness: total.witness(),
            ts_witness: ts.witness(),
            mt_witness: mt.witness(),
            security,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<W> {
    Holds,
    Fails(W),
}

impl<W> Verdict<W> {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(self) -> Option<W> {
        match self {
            Verdict::Holds => None,
            Verdict::Fails(w) => Some(w),
        }
    }
}

/// `x ∼ℓ y`, both defined, yet `p(x) ≁ℓ p(y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NiWitness {
    pub level: Label,
    pub x: LabeledSet,
    pub y: LabeledSet,
    pub out_x: LabeledSet,
    pub out_y: LabeledSet,
}

/// `x ∼ℓ y` yet exactly one of the runs is defined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TsWitness {
    pub level: Label,
    pub x: LabeledSet,
    pub y: LabeledSet,
    pub x_defined: bool,
}

/// `p(input)` is defined but `p(input↓level)` is not.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MtWitness {
    pub input: LabeledSet,
    pub level: Label,
    pub projected: LabeledSet,
}

/// Strongest termination criterion a program satisfies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TerminationClass {
    Total,
    TS,
    MT,
    TI,
}

impl TerminationClass {
    /// Whether `self` implies `other` (`Total ⟹ TS ⟹ MT ⟹ TI`).
    pub fn implies(self, other: TerminationClass) -> bool {
        self <= other
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TerminationClass::Total => "Total",
            TerminationClass::TS => "TS",
            TerminationClass::MT => "MT",
            TerminationClass::TI => "TI",
        }
    }
}

impl fmt::Display for TerminationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Security {
    Secure(TerminationClass),
    Insecure,
}

impl Security {
    /// Whether a program with this classification is `τ`-secure.
    pub fn is_secure_for(self, tau: TerminationClass) -> bool {
        matches!(self, Security::Secure(c) if c.implies(tau))
    }
}

impl fmt::Display for Security {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Security::Secure(c) => write!(f, "{c}-secure"),
            Security::Insecure => f.write_str("insecure"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationReport {
    pub program: String,
    pub ni: bool,
    pub ni_witness: Option<NiWitness>,
    pub termination: TerminationClass,
    pub total_witness: Option<LabeledSet>,
    pub ts_witness: Option<TsWitness>,
    pub mt_witness: Option<MtWitness>,
    pub security: Security,
}

impl ClassificationReport {
    pub fn to_json(&self, u: &PrincipalUniverse) -> serde_json::Value {
        let set = |s: &LabeledSet| s.to_json(u);
        json!({
            "program": self.program,
            "ni": self.ni,
            "witness": self.ni_witness.as_ref().map(|w| json!({
                "level": u.label_to_json(w.level),
                "x": set(&w.x),
                "y": set(&w.y),
                "output_x": set(&w.out_x),
                "output_y": set(&w.out_y),
            })),
            "termination": self.termination.as_str(),
            "security": self.security.to_string(),
            "termination_witnesses": {
                "total": self.total_witness.as_ref().map(set),
                "ts": self.ts_witness.as_ref().map(|w| json!({
                    "level": u.label_to_json(w.level),
                    "x": set(&w.x),
                    "y": set(&w.y),
                    "x_defined": w.x_defined,
                })),
                "mt": self.mt_witness.as_ref().map(|w| json!({
                    "input": set(&w.input),
                    "level": u.label_to_json(w.level),
                    "projected": set(&w.projected),
                })),
            },
        })
    }
}

pub fn check_ni(subject: &dyn Behaviour, spec: &UniverseSpec) -> Result<Verdict<NiWitness>> {
    Ok(Observations::collect(subject, spec)?.check_ni())
}

pub fn check_total(subject: &dyn Behaviour, spec: &UniverseSpec) -> Result<Verdict<LabeledSet>> {
    Ok(Observations::collect(subject, spec)?.check_total())
}

pub fn check_ts(subject: &dyn Behaviour, spec: &UniverseSpec) -> Result<Verdict<TsWitness>> {
    Ok(Observations::collect(subject, spec)?.check_ts())
}

pub fn check_mt(subject: &dyn Behaviour, spec: &UniverseSpec) -> Result<Verdict<MtWitness>> {
    Ok(Observations::collect(subject, spec)?.check_mt())
}

pub fn classify(
    name: &str,
    subject: &dyn Behaviour,
    spec: &UniverseSpec,
) -> Result<ClassificationReport> {
    Ok(Observations::collect(subject, spec)?.classify(name))
}
