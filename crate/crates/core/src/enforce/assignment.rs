use std::collections::BTreeSet;
use std::hash::{DefaultHasher, Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{output_labels, BaseMechanism};
use crate::dsl::{eval, Evaluator, Outcome, Program, SetExpr};
use crate::error::{Error, Result};
use crate::labeled::LabeledSet;
use crate::lattice::{Closure, Label};
use crate::oracle::UniverseSpec;

/// A partial map from a program and an input to the levels at which to
/// multi-execute. Must be deterministic.
pub trait LevelAssignment: Send + Sync {
    fn name(&self) -> String;
    fn assign(&self, p: &Program, x: &LabeledSet, spec: &UniverseSpec) -> Outcome<BTreeSet<Label>>;
}

/// `L(p, x) = L(p(x))`.
#[derive(Clone, Copy, Debug, Default)]
pub struct OutputLabels;

impl LevelAssignment for OutputLabels {
    fn name(&self) -> String {
        "output-labels".into()
    }

    fn assign(&self, p: &Program, x: &LabeledSet, spec: &UniverseSpec) -> Outcome<BTreeSet<Label>> {
        output_labels(eval(p, x, spec.fuel))
    }
}

/// `L(p, x) = C(L(x)) ∩ L′(p)` for a total, input-independent `L′`.
#[derive(Clone, Debug)]
pub enum LabelIntersect {
    /// `L′(p)` is the whole lattice.
    Full,
    /// `L′(p)` is a pseudo-random set of labels drawn from `seed` and the
    /// program's code.
    Random { seed: u64 },
}

impl LabelIntersect {
    /// `L′(p)`.
    pub fn chosen(&self, p: &Program, spec: &UniverseSpec) -> BTreeSet<Label> {
        let all = spec.principals.all_labels();
        match self {
            LabelIntersect::Full => all.into_iter().collect(),
            LabelIntersect::Random { seed } => {
                let mut h = DefaultHasher::new();
                p.body.hash(&mut h);
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ h.finish());
                all.into_iter().filter(|_| rng.gen_bool(0.5)).collect()
            }
        }
    }
}

impl LevelAssignment for LabelIntersect {
    fn name(&self) -> String {
        match self {
            LabelIntersect::Full => "label-intersect".into(),
            LabelIntersect::Random { seed } => format!("label-intersect:{seed}"),
        }
    }

    fn assign(&self, p: &Program, x: &LabeledSet, spec: &UniverseSpec) -> Outcome<BTreeSet<Label>> {
        let chosen = self.chosen(p, spec);
        Outcome::Terminated(
            Closure::new(x.labels())
                .into_labels()
                .intersection(&chosen)
                .copied()
                .collect(),
        )
    }
}

/// MT-secure without `λx. L(p, x)` being secure: for the program `empty`,
/// `∅` if `level ∈ L(x)` and `{⊥}` otherwise; `∅` for every other program.
#[derive(Clone, Copy, Debug)]
pub struct EmptyNonpointwise {
    pub level: Label,
}

impl LevelAssignment for EmptyNonpointwise {
    fn name(&self) -> String {
        "empty-nonpointwise".into()
    }

    fn assign(
        &self,
        p: &Program,
        x: &LabeledSet,
        _spec: &UniverseSpec,
    ) -> Outcome<BTreeSet<Label>> {
        let levels = if p.body == SetExpr::Empty && !x.labels().contains(&self.level) {
            BTreeSet::from([Label::BOTTOM])
        } else {
            BTreeSet::new()
        };
        Outcome::Terminated(levels)
    }
}

/// `L(p, x) = { H | H ∉ L(x) }`.
#[derive(Clone, Copy, Debug)]
pub struct HAbsent {
    pub high: Label,
}

impl LevelAssignment for HAbsent {
    fn name(&self) -> String {
        "h-absent".into()
    }

    fn assign(
        &self,
        _p: &Program,
        x: &LabeledSet,
        _spec: &UniverseSpec,
    ) -> Outcome<BTreeSet<Label>> {
        let levels = if x.labels().contains(&self.high) {
            BTreeSet::new()
        } else {
            BTreeSet::from([self.high])
        };
        Outcome::Terminated(levels)
    }
}

/// `L_E(p, x) = L(E[p](x))`.
#[derive(Clone, Copy, Debug)]
pub struct FromEnforcer(pub BaseMechanism);

impl LevelAssignment for FromEnforcer {
    fn name(&self) -> String {
        format!("from-enforcer:{}", self.0.name())
    }

    fn assign(&self, p: &Program, x: &LabeledSet, spec: &UniverseSpec) -> Outcome<BTreeSet<Label>> {
        match self.0.enforce(&Evaluator::new(p, spec.fuel), x, spec) {
            Ok(e) => output_labels(e.outcome),
            // Only reachable for inputs outside the universe, which have no
            // terminating representative to multi-execute.
            Err(_) => Outcome::Diverged,
        }
    }
}

/// Every label of the lattice; `ME_L` then coincides with ME.
#[derive(Clone, Copy, Debug, Default)]
pub struct Full;

impl LevelAssignment for Full {
    fn name(&self) -> String {
        "full".into()
    }

    fn assign(
        &self,
        _p: &Program,
        _x: &LabeledSet,
        spec: &UniverseSpec,
    ) -> Outcome<BTreeSet<Label>> {
        Outcome::Terminated(spec.principals.all_labels().into_iter().collect())
    }
}

/// A fixed set of levels regardless of program and input.
#[derive(Clone, Debug, Default)]
pub struct ConstLevels(pub BTreeSet<Label>);

impl LevelAssignment for ConstLevels {
    fn name(&self) -> String {
        if self.0.is_empty() {
            "const-empty".into()
        } else {
            let bits: Vec<String> = self.0.iter().map(|l| l.bits().to_string()).collect();
            format!("const:{}", bits.join("+"))
        }
    }

    fn assign(
        &self,
        _p: &Program,
        _x: &LabeledSet,
        _spec: &UniverseSpec,
    ) -> Outcome<BTreeSet<Label>> {
        Outcome::Terminated(self.0.clone())
    }
}

/// Resolves an assignment name as printed by [`LevelAssignment::name`].
///
/// `empty-nonpointwise` and `h-absent` use the top of the lattice as their
/// distinguished level.
pub fn assignment_by_name(name: &str, spec: &UniverseSpec) -> Result<Box<dyn LevelAssignment>> {
    let top = spec.principals.top();
    let unknown = || Error::Unknown {
        kind: "level assignment",
        name: name.to_string(),
    };
    Ok(match name {
        "output-labels" => Box::new(OutputLabels),
        "label-intersect" => Box::new(LabelIntersect::Full),
        "empty-nonpointwise" => Box::new(EmptyNonpointwise { level: top }),
        "h-absent" => Box::new(HAbsent { high: top }),
        "full" => Box::new(Full),
        "const-empty" => Box::new(ConstLevels::default()),
        _ => {
            if let Some(seed) = name.strip_prefix("label-intersect:") {
                Box::new(LabelIntersect::Random {
                    seed: seed.parse().map_err(|_| unknown())?,
                })
            } else if let Some(mech) = name.strip_prefix("from-enforcer:") {
                let base = BaseMechanism::ALL
                    .into_iter()
                    .find(|b| b.name() == mech)
                    .ok_or_else(unknown)?;
                Box::new(FromEnforcer(base))
            } else {
                return Err(unknown());
            }
        }
    })
}

/// The assignments discussed alongside `ME_L`, instantiated for `spec`.
pub fn assignment_catalog(spec: &UniverseSpec) -> Vec<Box<dyn LevelAssignment>> {
    let top = spec.principals.top();
    vec![
        Box::new(OutputLabels),
        Box::new(LabelIntersect::Full),
        Box::new(EmptyNonpointwise { level: top }),
        Box::new(HAbsent { high: top }),
        Box::new(FromEnforcer(BaseMechanism::Me)),
        Box::new(FromEnforcer(BaseMechanism::Mef)),
        Box::new(FromEnforcer(BaseMechanism::Mest)),
        Box::new(Full),
        Box::new(ConstLevels::default()),
    ]
}
