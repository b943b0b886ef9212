//! Random programs and inputs over the principals `A`, `B`.
#![allow(dead_code)]

use multiexec::dsl::{BoolExpr, LabelExpr, NatExpr, SetExpr};
use multiexec::labeled::{LabeledSet, LabeledValue};
use multiexec::lattice::{Label, PrincipalUniverse};
use proptest::prelude::*;

pub fn universe() -> PrincipalUniverse {
    PrincipalUniverse::new(["A", "B"]).unwrap()
}

fn b<T>(t: T) -> Box<T> {
    Box::new(t)
}

pub fn label_lit() -> BoxedStrategy<Label> {
    (0u64..4).prop_map(Label::from_bits).boxed()
}

pub fn set_expr(depth: u32) -> BoxedStrategy<SetExpr> {
    let leaf = prop_oneof![
        Just(SetExpr::Input),
        Just(SetExpr::Empty),
        Just(SetExpr::Diverge)
    ];
    if depth == 0 {
        return leaf.boxed();
    }
    let d = depth - 1;
    prop_oneof![
        2 => leaf,
        1 => (nat_expr(d), label_expr(d)).prop_map(|(n, l)| SetExpr::Singleton(b(n), b(l))),
        1 => (set_expr(d), set_expr(d)).prop_map(|(x, y)| SetExpr::Union(b(x), b(y))),
        1 => (set_expr(d), label_expr(d)).prop_map(|(x, l)| SetExpr::Project(b(x), b(l))),
        1 => (set_expr(d), label_expr(d)).prop_map(|(x, l)| SetExpr::SelectAt(b(x), b(l))),
        1 => (set_expr(d), label_expr(d)).prop_map(|(x, l)| SetExpr::Relabel(b(x), b(l))),
        1 => (bool_expr(d), set_expr(d), set_expr(d)).prop_map(|(c, t, e)| SetExpr::If(b(c), b(t), b(e))),
    ]
    .boxed()
}

fn nat_expr(depth: u32) -> BoxedStrategy<NatExpr> {
    let leaf = (0u64..5).prop_map(NatExpr::Lit);
    if depth == 0 {
        return leaf.boxed();
    }
    let d = depth - 1;
    prop_oneof![
        2 => leaf,
        1 => set_expr(d).prop_map(|s| NatExpr::Size(b(s))),
        1 => (nat_expr(d), nat_expr(d)).prop_map(|(x, y)| NatExpr::Add(b(x), b(y))),
    ]
    .boxed()
}

fn label_expr(depth: u32) -> BoxedStrategy<LabelExpr> {
    let leaf = label_lit().prop_map(LabelExpr::Lit);
    if depth == 0 {
        return leaf.boxed();
    }
    let d = depth - 1;
    prop_oneof![
        2 => leaf,
        1 => set_expr(d).prop_map(|s| LabelExpr::JoinLabels(b(s))),
        1 => (label_expr(d), label_expr(d)).prop_map(|(x, y)| LabelExpr::Join(b(x), b(y))),
    ]
    .boxed()
}

fn bool_expr(depth: u32) -> BoxedStrategy<BoolExpr> {
    let d = depth.saturating_sub(1);
    let atoms = prop_oneof![
        (nat_expr(d), label_expr(d), set_expr(d)).prop_map(|(n, l, s)| BoolExpr::Member(
            b(n),
            b(l),
            b(s)
        )),
        (set_expr(d), set_expr(d)).prop_map(|(x, y)| BoolExpr::Subseteq(b(x), b(y))),
        set_expr(d).prop_map(|s| BoolExpr::IsEmpty(b(s))),
        (label_expr(d), label_expr(d)).prop_map(|(x, y)| BoolExpr::EqLabel(b(x), b(y))),
    ];
    if depth == 0 {
        return atoms.boxed();
    }
    prop_oneof![
        3 => atoms,
        1 => (bool_expr(d), bool_expr(d)).prop_map(|(x, y)| BoolExpr::And(b(x), b(y))),
        1 => (bool_expr(d), bool_expr(d)).prop_map(|(x, y)| BoolExpr::Or(b(x), b(y))),
        1 => bool_expr(d).prop_map(|x| BoolExpr::Not(b(x))),
    ]
    .boxed()
}

pub fn input() -> impl Strategy<Value = LabeledSet> {
    prop::collection::vec((0u64..3, label_lit()), 0..5).prop_map(|v| {
        v.into_iter()
            .map(|(a, l)| LabeledValue::new(a, l))
            .collect()
    })
}
