use super::ast::{BoolExpr, LabelExpr, NatExpr, Program, SetExpr};
use super::Outcome;
use crate::labeled::LabeledSet;
use crate::lattice::Label;

/// Why a sub-evaluation stopped without a value.
enum Halt {
    Diverged,
    FuelExhausted,
}

type Step<T> = Result<T, Halt>;

struct Machine<'a> {
    input: &'a LabeledSet,
    fuel: u64,
}

/// Runs `program` on `input`, charging one unit of fuel per AST node visited.
pub fn eval(program: &Program, input: &LabeledSet, fuel: u64) -> Outcome {
    let mut m = Machine { input, fuel };
    match m.set(&program.body) {
        Ok(out) => Outcome::Terminated(out),
        Err(Halt::Diverged) => Outcome::Diverged,
        Err(Halt::FuelExhausted) => Outcome::FuelExhausted,
    }
}

impl Machine<'_> {
    fn tick(&mut self) -> Step<()> {
        if self.fuel == 0 {
            return Err(Halt::FuelExhausted);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn set(&mut self, e: &SetExpr) -> Step<LabeledSet> {
        self.tick()?;
        Ok(match e {
            SetExpr::Input => self.input.clone(),
            SetExpr::Empty => LabeledSet::new(),
            SetExpr::Singleton(n, l) => {
                let n = self.nat(n)?;
                LabeledSet::singleton(n, self.label(l)?)
            }
            SetExpr::Union(a, b) => {
                let a = self.set(a)?;
                a.union(&self.set(b)?)
            }
            SetExpr::Project(s, l) => {
                let s = self.set(s)?;
                s.project(self.label(l)?)
            }
            SetExpr::SelectAt(s, l) => {
                let s = self.set(s)?;
                s.select(self.label(l)?)
            }
            SetExpr::Relabel(s, l) => {
                let s = self.set(s)?;
                s.relabel(self.label(l)?)
            }
            SetExpr::If(c, t, f) => {
                if self.boolean(c)? {
                    self.set(t)?
                } else {
                    self.set(f)?
                }
            }
            SetExpr::Diverge => return Err(Halt::Diverged),
        })
    }

    fn nat(&mut self, e: &NatExpr) -> Step<u64> {
        self.tick()?;
        Ok(match e {
            NatExpr::Lit(n) => *n,
            NatExpr::Size(s) => self.set(s)?.len() as u64,
            NatExpr::Add(a, b) => {
                let a = self.nat(a)?;
                a.saturating_add(self.nat(b)?)
            }
        })
    }

    fn label(&mut self, e: &LabelExpr) -> Step<Label> {
        self.tick()?;
        Ok(match e {
            LabelExpr::Lit(l) => *l,
            LabelExpr::JoinLabels(s) => self.set(s)?.label_join(),
            LabelExpr::Join(a, b) => {
                let a = self.label(a)?;
                a.join(self.label(b)?)
            }
        })
    }

    fn boolean(&mut self, e: &BoolExpr) -> Step<bool> {
        self.tick()?;
        Ok(match e {
            BoolExpr::Member(n, l, s) => {
                let n = self.nat(n)?;
                let l = self.label(l)?;
                self.set(s)?.contains(n, l)
            }
            BoolExpr::Subseteq(a, b) => {
                let a = self.set(a)?;
                a.is_subset(&self.set(b)?)
            }
            BoolExpr::IsEmpty(s) => self.set(s)?.is_empty(),
            BoolExpr::EqLabel(a, b) => {
                let a = self.label(a)?;
                a == self.label(b)?
            }
            BoolExpr::And(a, b) => self.boolean(a)? && self.boolean(b)?,
            BoolExpr::Or(a, b) => self.boolean(a)? || self.boolean(b)?,
            BoolExpr::Not(b) => !self.boolean(b)?,
        })
    }
}
