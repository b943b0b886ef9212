//! The standard example programs, written in the program language, plus the
//! `greater`/`equal` generators used by the black-box attack.

use super::ast::{BoolExpr, LabelExpr, NatExpr, Program, SetExpr};
use super::parse_named;
use crate::error::{Error, Result};
use crate::lattice::{Label, PrincipalUniverse};

#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub source: &'static str,
    /// The smallest universe the program is meant to run over.
    pub principals: &'static [&'static str],
}

impl CatalogEntry {
    pub fn universe(&self) -> PrincipalUniverse {
        PrincipalUniverse::new(self.principals.iter().copied())
            .expect("catalog universes are valid")
    }

    pub fn program(&self, universe: &PrincipalUniverse) -> Result<Program> {
        parse_named(self.name, self.source, universe)
    }
}

const H: &[&str] = &["H"];
const ABC: &[&str] = &["Alice", "Bob", "Charlie"];

const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        name: "id",
        source: "fun(x) -> x",
        principals: H,
    },
    CatalogEntry {
        name: "combine",
        source: "fun(x) -> {add(size(at(x, {Alice})), size(at(x, {Bob})))^{Alice,Bob,Charlie}}",
        principals: ABC,
    },
    CatalogEntry {
        name: "combineAll",
        source: "fun(x) -> {size(x)^joinlabels(x)}",
        principals: ABC,
    },
    CatalogEntry {
        name: "leakBit",
        source: "fun(x) -> if member(1, {H}, x) then {1^{}} else {0^{}}",
        principals: H,
    },
    CatalogEntry {
        name: "leakAll",
        source: "fun(x) -> relabel(x, {})",
        principals: H,
    },
    CatalogEntry {
        name: "termLeak",
        source: "fun(x) -> if member(1, {H}, x) then {} else diverge",
        principals: H,
    },
    CatalogEntry {
        name: "divergeIfLPresent",
        source: "fun(x) -> if member(1, {}, x) then x else diverge",
        principals: H,
    },
    CatalogEntry {
        name: "divergeIfHPresent",
        source: "fun(x) -> if member(1, {H}, x) then diverge else {}",
        principals: H,
    },
    CatalogEntry {
        name: "divergeIfHAbsent",
        source: "fun(x) -> if !member(1, {H}, x) then diverge else {}",
        principals: H,
    },
    CatalogEntry {
        name: "leakLevel",
        source: "fun(x) -> if isempty(at(x, {H})) then {0^{}} else {}",
        principals: H,
    },
    CatalogEntry {
        name: "empty",
        source: "fun(x) -> {}",
        principals: H,
    },
];

/// The nine programs of the classification table, in table order.
pub const TABLE_PROGRAMS: [&str; 9] = [
    "id",
    "combine",
    "combineAll",
    "leakBit",
    "leakAll",
    "termLeak",
    "divergeIfLPresent",
    "divergeIfHPresent",
    "divergeIfHAbsent",
];

pub fn entries() -> &'static [CatalogEntry] {
    ENTRIES
}

pub fn entry(name: &str) -> Result<&'static CatalogEntry> {
    ENTRIES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Unknown {
            kind: "catalog program",
            name: name.to_string(),
        })
}

/// Parses a catalog program against `universe`.
pub fn program(name: &str, universe: &PrincipalUniverse) -> Result<Program> {
    entry(name)?.program(universe)
}

/// Catalog programs that can be expressed over `universe`.
pub fn programs_for(universe: &PrincipalUniverse) -> Vec<Program> {
    ENTRIES
        .iter()
        .filter_map(|e| e.program(universe).ok())
        .collect()
}

/// The set expression `{1^{n} | n ∈ S}` as a union of singletons.
pub fn to_input_expr(principals: Label) -> SetExpr {
    principals
        .members()
        .map(|i| {
            SetExpr::Singleton(
                Box::new(NatExpr::Lit(1)),
                Box::new(LabelExpr::Lit(Label::singleton(i))),
            )
        })
        .reduce(|acc, s| SetExpr::Union(Box::new(acc), Box::new(s)))
        .unwrap_or(SetExpr::Empty)
}

fn contains_to_input(s_prime: Label) -> BoolExpr {
    BoolExpr::Subseteq(Box::new(to_input_expr(s_prime)), Box::new(SetExpr::Input))
}

fn output_one_at(s_prime: Label) -> SetExpr {
    SetExpr::Singleton(Box::new(NatExpr::Lit(1)), Box::new(LabelExpr::Lit(s_prime)))
}

/// `greater(x) = if toInput(S') ⊆ x then {1^{S'}} else ∅`.
pub fn greater(s_prime: Label) -> Program {
    Program::new(
        "greater",
        SetExpr::If(
            Box::new(contains_to_input(s_prime)),
            Box::new(output_one_at(s_prime)),
            Box::new(SetExpr::Empty),
        ),
    )
}

/// `equal(x) = if toInput(S') ⊆ x ∧ ⊔L(x) = S' then {1^{S'}} else ∅`.
pub fn equal(s_prime: Label) -> Program {
    let cond = BoolExpr::And(
        Box::new(contains_to_input(s_prime)),
        Box::new(BoolExpr::EqLabel(
            Box::new(LabelExpr::JoinLabels(Box::new(SetExpr::Input))),
            Box::new(LabelExpr::Lit(s_prime)),
        )),
    );
    Program::new(
        "equal",
        SetExpr::If(
            Box::new(cond),
            Box::new(output_one_at(s_prime)),
            Box::new(SetExpr::Empty),
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{eval, parse, Outcome, DEFAULT_FUEL};
    use crate::labeled::{to_input, LabeledSet};

    #[test]
    fn every_entry_parses_in_its_universe() {
        for e in entries() {
            let u = e.universe();
            let p = e.program(&u).unwrap();
            assert_eq!(p.name, e.name);
            // Printing and re-parsing is the identity on the AST.
            assert_eq!(
                parse(&p.to_source(&u), &u).unwrap().body,
                p.body,
                "{}",
                e.name
            );
        }
    }

    #[test]
    fn unknown_program() {
        assert!(program("nope", &PrincipalUniverse::two_point()).is_err());
    }

    #[test]
    fn combine_needs_its_principals() {
        assert!(program("combine", &PrincipalUniverse::two_point()).is_err());
        assert_eq!(
            programs_for(&PrincipalUniverse::two_point()).len(),
            ENTRIES.len() - 1
        );
    }

    #[test]
    fn equal_and_greater_on_to_input() {
        let u = PrincipalUniverse::numbered(4).unwrap();
        let s = u.top();
        let s_prime = u.label(["1", "3"]).unwrap();
        let one_at = LabeledSet::singleton(1, s_prime);
        let run = |p: &Program, x: &LabeledSet| eval(p, x, DEFAULT_FUEL);

        assert_eq!(
            run(&equal(s_prime), &to_input(s_prime)),
            Outcome::Terminated(one_at.clone())
        );
        assert_eq!(
            run(&equal(s_prime), &to_input(s)),
            Outcome::Terminated(LabeledSet::new())
        );
        assert_eq!(
            run(&greater(s_prime), &to_input(s)),
            Outcome::Terminated(one_at.clone())
        );
        assert_eq!(
            run(&greater(s_prime), &to_input(s_prime)),
            Outcome::Terminated(one_at)
        );
        assert_eq!(
            run(&greater(s_prime), &to_input(u.label(["1"]).unwrap())),
            Outcome::Terminated(LabeledSet::new())
        );
    }

    #[test]
    fn to_input_expansion() {
        let u = PrincipalUniverse::numbered(2).unwrap();
        let both = u.top();
        let x = to_input(both);
        assert_eq!(x.display(&u), "{1^{1}, 1^{2}}");
        let p = Program::new("t", to_input_expr(both));
        assert_eq!(
            eval(&p, &LabeledSet::new(), DEFAULT_FUEL),
            Outcome::Terminated(x)
        );
        assert_eq!(to_input_expr(Label::BOTTOM), SetExpr::Empty);
    }
}
