//! Finite sets of labeled values and the operations programs are judged by:
//! projection, selection, label collection and ℓ-equivalence.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Label, PrincipalUniverse};

/// A value paired with its security label, written `a^ℓ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledValue {
    pub value: u64,
    pub label: Label,
}

impl LabeledValue {
    pub fn new(value: u64, label: Label) -> Self {
        LabeledValue { value, label }
    }
}

/// A finite set of labeled values, kept in canonical `(value, label)` order.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledSet {
    elements: BTreeSet<LabeledValue>,
}

impl LabeledSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(value: u64, label: Label) -> Self {
        [LabeledValue::new(value, label)].into_iter().collect()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LabeledValue> {
        self.elements.iter()
    }

    pub fn contains(&self, value: u64, label: Label) -> bool {
        self.elements.contains(&LabeledValue::new(value, label))
    }

    pub fn insert(&mut self, value: u64, label: Label) -> bool {
        self.elements.insert(LabeledValue::new(value, label))
    }

    pub fn union(&self, other: &LabeledSet) -> LabeledSet {
        self.elements.union(&other.elements).copied().collect()
    }

    pub fn extend_from(&mut self, other: &LabeledSet) {
        self.elements.extend(other.elements.iter().copied());
    }

    pub fn is_subset(&self, other: &LabeledSet) -> bool {
        self.elements.is_subset(&other.elements)
    }

    /// `x↓ℓ`: the elements whose label flows to `l`.
    pub fn project(&self, l: Label) -> LabeledSet {
        self.filter(|e| e.label.leq(l))
    }

    /// `L(x)`: the labels occurring in the set.
    pub fn labels(&self) -> BTreeSet<Label> {
        self.elements.iter().map(|e| e.label).collect()
    }

    /// `⊔L(x)`.
    pub fn label_join(&self) -> Label {
        Label::join_all(self.elements.iter().map(|e| e.label))
    }

    /// `x@ℓ`: the elements labeled exactly `l`.
    pub fn select(&self, l: Label) -> LabeledSet {
        self.filter(|e| e.label == l)
    }

    /// `x@S`: the elements whose label is a member of `s`.
    pub fn select_set(&self, s: &BTreeSet<Label>) -> LabeledSet {
        self.filter(|e| s.contains(&e.label))
    }

    /// `x ∼ℓ y`.
    pub fn equiv(&self, other: &LabeledSet, l: Label) -> bool {
        self.iter()
            .filter(|e| e.label.leq(l))
            .eq(other.iter().filter(|e| e.label.leq(l)))
    }

    /// Every element relabeled to `l`.
    pub fn relabel(&self, l: Label) -> LabeledSet {
        self.elements
            .iter()
            .map(|e| LabeledValue::new(e.value, l))
            .collect()
    }

    pub fn filter(&self, mut keep: impl FnMut(&LabeledValue) -> bool) -> LabeledSet {
        self.elements.iter().filter(|e| keep(e)).copied().collect()
    }

    pub fn check_universe(&self, universe: &PrincipalUniverse) -> Result<()> {
        self.elements
            .iter()
            .try_for_each(|e| universe.check(e.label))
    }

    /// Renders the set in the inline literal syntax, e.g. `{0^{}, 1^{H}}`.
    pub fn display(&self, universe: &PrincipalUniverse) -> String {
        let parts: Vec<String> = self
            .elements
            .iter()
            .map(|e| format!("{}^{}", e.value, universe.display(e.label)))
            .collect();
        format!("{{{}}}", parts.join(", "))
    }

    /// Parses the inline literal syntax `{v^{P,...}, ...}`.
    pub fn parse_literal(text: &str, universe: &PrincipalUniverse) -> Result<LabeledSet> {
        LiteralParser {
            src: text,
            pos: 0,
            universe,
        }
        .parse()
    }

    pub fn to_json(&self, universe: &PrincipalUniverse) -> serde_json::Value {
        let reprs: Vec<LabeledValueRepr> = self
            .elements
            .iter()
            .map(|e| LabeledValueRepr {
                value: e.value.to_string(),
                label: universe
                    .names(e.label)
                    .into_iter()
                    .map(str::to_string)
                    .collect(),
            })
            .collect();
        serde_json::to_value(reprs).expect("labeled values always serialize")
    }

    pub fn from_json(
        value: &serde_json::Value,
        universe: &PrincipalUniverse,
    ) -> Result<LabeledSet> {
        let reprs: Vec<LabeledValueRepr> =
            serde_json::from_value(value.clone()).map_err(|e| Error::Json(e.to_string()))?;
        let mut set = LabeledSet::new();
        for r in reprs {
            let value = r
                .value
                .parse::<u64>()
                .map_err(|_| Error::Json(format!("value {:?} is not a natural number", r.value)))?;
            set.insert(value, universe.label(&r.label)?);
        }
        Ok(set)
    }
}

impl FromIterator<LabeledValue> for LabeledSet {
    fn from_iter<I: IntoIterator<Item = LabeledValue>>(iter: I) -> Self {
        LabeledSet {
            elements: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a LabeledSet {
    type Item = &'a LabeledValue;
    type IntoIter = std::collections::btree_set::Iter<'a, LabeledValue>;

    fn into_iter(self) -> Self::IntoIter {
        self.elements.iter()
    }
}

#[derive(Serialize, Deserialize)]
struct LabeledValueRepr {
    value: String,
    label: Vec<String>,
}

/// `toInput(S) = {1^{n} | n ∈ S}` for a set of principals given as a label.
pub fn to_input(principals: Label) -> LabeledSet {
    principals
        .members()
        .map(|i| LabeledValue::new(1, Label::singleton(i)))
        .collect()
}

struct LiteralParser<'a> {
    src: &'a str,
    pos: usize,
    universe: &'a PrincipalUniverse,
}

impl LiteralParser<'_> {
    fn parse(mut self) -> Result<LabeledSet> {
        let mut set = LabeledSet::new();
        self.expect('{')?;
        if self.eat('}') {
            return self.finish(set);
        }
        loop {
            let value = self.number()?;
            self.expect('^')?;
            let label = self.label()?;
            set.insert(value, label);
            if self.eat('}') {
                return self.finish(set);
            }
            self.expect(',')?;
        }
    }

    fn finish(mut self, set: LabeledSet) -> Result<LabeledSet> {
        self.skip_ws();
        if self.pos != self.src.len() {
            return Err(self.error("trailing input after labeled set"));
        }
        Ok(set)
    }

    fn label(&mut self) -> Result<Label> {
        self.expect('{')?;
        let mut label = Label::BOTTOM;
        if !self.eat('}') {
            loop {
                self.skip_ws();
                let start = self.pos;
                let name = self.name()?;
                let index = self
                    .universe
                    .index_of(&name)
                    .ok_or_else(|| self.error_at(start, &format!("unknown principal `{name}`")))?;
                label = label.join(Label::singleton(index));
                if self.eat('}') {
                    break;
                }
                self.expect(',')?;
            }
        }
        Ok(label)
    }

    fn name(&mut self) -> Result<String> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(rest.len());
        if len == 0 {
            return Err(self.error("expected a principal name"));
        }
        self.pos += len;
        Ok(rest[..len].to_string())
    }

    fn number(&mut self) -> Result<u64> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .find(|c: char| !c.is_ascii_digit())
            .unwrap_or(rest.len());
        let n = rest[..len]
            .parse()
            .map_err(|_| self.error("expected a natural number"))?;
        self.pos += len;
        Ok(n)
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{c}'")))
        }
    }

    fn error(&self, message: &str) -> Error {
        self.error_at(self.pos, message)
    }

    fn error_at(&self, pos: usize, message: &str) -> Error {
        let (line, column) = crate::dsl::line_col(self.src, pos);
        Error::Syntax {
            line,
            column,
            message: message.to_string(),
        }
    }
}
