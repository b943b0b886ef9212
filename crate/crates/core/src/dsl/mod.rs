//! A small deterministic language for programs over labeled sets.
//!
//! Programs have the shape `fun(x) -> expr`. Divergence is an explicit
//! primitive, so whether a run terminates is decided by evaluation itself;
//! the fuel budget only guards against runaway evaluation and its exhaustion
//! is reported separately from divergence.

mod ast;
pub mod catalog;
mod eval;
mod parser;

pub use ast::{BoolExpr, LabelExpr, NatExpr, Program, SetExpr};
pub use eval::eval;

use crate::error::Result;
use crate::labeled::LabeledSet;
use crate::lattice::PrincipalUniverse;

/// Default step budget for a single run.
pub const DEFAULT_FUEL: u64 = 10_000;

/// The result of running a (possibly partial) computation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Outcome<T = LabeledSet> {
    Terminated(T),
    Diverged,
    /// The step budget ran out; says nothing about definedness.
    FuelExhausted,
}

impl<T> Outcome<T> {
    pub fn is_terminated(&self) -> bool {
        matches!(self, Outcome::Terminated(_))
    }

    pub fn terminated(&self) -> Option<&T> {
        match self {
            Outcome::Terminated(t) => Some(t),
            _ => None,
        }
    }

    pub fn into_terminated(self) -> Option<T> {
        match self {
            Outcome::Terminated(t) => Some(t),
            _ => None,
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Outcome<U> {
        match self {
            Outcome::Terminated(t) => Outcome::Terminated(f(t)),
            Outcome::Diverged => Outcome::Diverged,
            Outcome::FuelExhausted => Outcome::FuelExhausted,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Outcome::Terminated(_) => "terminated",
            Outcome::Diverged => "diverged",
            Outcome::FuelExhausted => "fuel-exhausted",
        }
    }
}

impl Outcome {
    /// `{"kind": "...", "output": [...] | null}`.
    pub fn to_json(&self, universe: &PrincipalUniverse) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind(),
            "output": self.terminated().map(|s| s.to_json(universe)),
        })
    }

    pub fn display(&self, universe: &PrincipalUniverse) -> String {
        match self {
            Outcome::Terminated(s) => s.display(universe),
            other => other.kind().to_string(),
        }
    }
}

/// Anything that maps an input set to an outcome: a program under a fuel
/// budget, an enforced program, a level assignment viewed as a program.
///
/// Enforcement mechanisms interact with programs only through this trait.
pub trait Behaviour: Sync {
    fn run(&self, input: &LabeledSet) -> Outcome;
}

impl<F> Behaviour for F
where
    F: Fn(&LabeledSet) -> Outcome + Sync,
{
    fn run(&self, input: &LabeledSet) -> Outcome {
        self(input)
    }
}

/// A program together with the fuel each run may spend.
#[derive(Clone, Copy, Debug)]
pub struct Evaluator<'a> {
    pub program: &'a Program,
    pub fuel: u64,
}

impl<'a> Evaluator<'a> {
    pub fn new(program: &'a Program, fuel: u64) -> Self {
        Evaluator { program, fuel }
    }
}

impl Behaviour for Evaluator<'_> {
    fn run(&self, input: &LabeledSet) -> Outcome {
        eval(self.program, input, self.fuel)
    }
}

/// Parses `fun(x) -> expr`, resolving label literals against `universe`.
pub fn parse(text: &str, universe: &PrincipalUniverse) -> Result<Program> {
    parse_named("main", text, universe)
}

pub fn parse_named(name: &str, text: &str, universe: &PrincipalUniverse) -> Result<Program> {
    parser::Parser::new(text, universe)?.program(name)
}

/// 1-based line and column of a byte offset.
pub(crate) fn line_col(src: &str, pos: usize) -> (usize, usize) {
    let before = &src[..pos.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}
