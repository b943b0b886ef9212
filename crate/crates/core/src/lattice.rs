//! Powerset security lattices over a declared set of principals.
//!
//! A [`Label`] is a subset of the principals of a [`PrincipalUniverse`]. The
//! flow order is subset inclusion, join is union and bottom is the empty set.
//! The two-point lattice `L ⊑ H` is the universe over the single principal
//! `H`, with `L = {}` and `H = {H}`.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the number of principals; labels are stored as `u64` bitsets.
pub const MAX_PRINCIPALS: usize = 64;

/// The ordered, duplicate-free list of principals a lattice is built over.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "UniverseRepr", into = "UniverseRepr")]
pub struct PrincipalUniverse {
    principals: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct UniverseRepr {
    principals: Vec<String>,
}

impl TryFrom<UniverseRepr> for PrincipalUniverse {
    type Error = Error;

    fn try_from(repr: UniverseRepr) -> Result<Self> {
        PrincipalUniverse::new(repr.principals)
    }
}

impl From<PrincipalUniverse> for UniverseRepr {
    fn from(u: PrincipalUniverse) -> Self {
        UniverseRepr {
            principals: u.principals,
        }
    }
}

impl PrincipalUniverse {
    pub fn new<I, S>(principals: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let principals: Vec<String> = principals.into_iter().map(Into::into).collect();
        if principals.is_empty() {
            return Err(Error::InvalidUniverse(
                "at least one principal is required".into(),
            ));
        }
        if principals.len() > MAX_PRINCIPALS {
            return Err(Error::InvalidUniverse(format!(
                "{} principals exceeds the limit of {MAX_PRINCIPALS}",
                principals.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for name in &principals {
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::InvalidUniverse(format!(
                    "invalid principal name {name:?}"
                )));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidUniverse(format!(
                    "duplicate principal {name:?}"
                )));
            }
        }
        Ok(PrincipalUniverse { principals })
    }

    /// The two-point lattice `{L, H}`.
    pub fn two_point() -> Self {
        PrincipalUniverse {
            principals: vec!["H".into()],
        }
    }

    /// Principals named `"1"` through `"n"`.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| i.to_string()))
    }

    pub fn principals(&self) -> &[String] {
        &self.principals
    }

    pub fn len(&self) -> usize {
        self.principals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.principals.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.principals.iter().position(|p| p == name)
    }

    /// The label whose members are the named principals.
    pub fn label<I, S>(&self, names: I) -> Result<Label>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut label = Label::BOTTOM;
        for name in names {
            let name = name.as_ref();
            let idx = self
                .index_of(name)
                .ok_or_else(|| Error::UnknownPrincipal(name.to_string()))?;
            label = label.join(Label::singleton(idx));
        }
        Ok(label)
    }

    /// The label containing every principal.
    pub fn top(&self) -> Label {
        Label::from_bits(full_mask(self.len()))
    }

    /// Fails if the label mentions principals outside this universe.
    pub fn check(&self, label: Label) -> Result<()> {
        if label.bits() & !full_mask(self.len()) != 0 {
            Err(Error::UniverseMismatch)
        } else {
            Ok(())
        }
    }

    pub fn contains(&self, label: Label) -> bool {
        self.check(label).is_ok()
    }

    pub fn leq(&self, l1: Label, l2: Label) -> Result<bool> {
        self.check(l1)?;
        self.check(l2)?;
        Ok(l1.leq(l2))
    }

    pub fn join(&self, l1: Label, l2: Label) -> Result<Label> {
        self.check(l1)?;
        self.check(l2)?;
        Ok(l1.join(l2))
    }

    /// Every label of the lattice, in canonical order.
    ///
    /// Only use this on small universes; the result has `2^n` entries.
    pub fn all_labels(&self) -> Vec<Label> {
        assert!(
            self.len() < 32,
            "refusing to enumerate a lattice over {} principals",
            self.len()
        );
        let mut labels: Vec<Label> = (0..(1u64 << self.len())).map(Label::from_bits).collect();
        labels.sort();
        labels
    }

    pub fn names(&self, label: Label) -> Vec<&str> {
        label
            .members()
            .map(|i| self.principals[i].as_str())
            .collect()
    }

    /// Renders a label as `{A,B}`.
    pub fn display(&self, label: Label) -> String {
        format!("{{{}}}", self.names(label).join(","))
    }

    pub fn label_to_json(&self, label: Label) -> serde_json::Value {
        serde_json::Value::Array(
            self.names(label)
                .into_iter()
                .map(|n| serde_json::Value::String(n.to_string()))
                .collect(),
        )
    }

    pub fn label_from_json(&self, value: &serde_json::Value) -> Result<Label> {
        let names: Vec<String> = serde_json::from_value(value.clone())
            .map_err(|e| Error::Json(format!("label must be an array of principal names: {e}")))?;
        self.label(names)
    }
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// An element of a powerset lattice: a set of principal indices.
///
/// Ordering is lexicographic on the ascending member indices, so `⊥` sorts
/// first and `{0} < {0,1} < {0,1,2} < {0,2} < {1}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Label(u64);

impl Label {
    pub const BOTTOM: Label = Label(0);

    pub const fn from_bits(bits: u64) -> Self {
        Label(bits)
    }

    pub fn singleton(index: usize) -> Self {
        assert!(index < MAX_PRINCIPALS);
        Label(1 << index)
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub fn is_bottom(self) -> bool {
        self.0 == 0
    }

    pub fn leq(self, other: Label) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn join(self, other: Label) -> Label {
        Label(self.0 | other.0)
    }

    /// Number of principals in the label.
    pub fn cardinality(self) -> u32 {
        self.0.count_ones()
    }

    /// Member indices in ascending order.
    pub fn members(self) -> impl Iterator<Item = usize> + Clone {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// Join of an arbitrary collection; `⊥` for an empty one.
    pub fn join_all<I: IntoIterator<Item = Label>>(labels: I) -> Label {
        labels.into_iter().fold(Label::BOTTOM, Label::join)
    }
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        self.members()
            .cmp(other.members())
            .then_with(|| self.cardinality().cmp(&other.cardinality()))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, i) in self.members().enumerate() {
            if n > 0 {
                f.write_str(",")?;
            }
            write!(f, "#{i}")?;
        }
        f.write_str("}")
    }
}

/// `C(S)`: the joins of every subset of `S`, including `⊥` and `⊔S`.
///
/// Built incrementally from the generators, so only labels reachable by
/// joining members of `S` are ever touched.
pub fn closure_set<'a, I>(labels: I) -> BTreeSet<Label>
where
    I: IntoIterator<Item = &'a Label>,
{
    Closure::new(labels.into_iter().copied()).into_labels()
}

/// A closure set together with the generators it was built from.
#[derive(Clone, Debug)]
pub struct Closure {
    generators: BTreeSet<Label>,
    labels: BTreeSet<Label>,
}

impl Closure {
    pub fn new<I: IntoIterator<Item = Label>>(generators: I) -> Self {
        let generators: BTreeSet<Label> = generators.into_iter().collect();
        let mut labels = BTreeSet::from([Label::BOTTOM]);
        // Each round joins every known label with one more generator until
        // nothing new appears.
        loop {
            let mut fresh = Vec::new();
            for &g in &generators {
                for &l in &labels {
                    let j = l.join(g);
                    if !labels.contains(&j) {
                        fresh.push(j);
                    }
                }
            }
            if fresh.is_empty() {
                break;
            }
            labels.extend(fresh);
        }
        Closure { generators, labels }
    }

    pub fn labels(&self) -> &BTreeSet<Label> {
        &self.labels
    }

    pub fn into_labels(self) -> BTreeSet<Label> {
        self.labels
    }

    pub fn contains(&self, label: Label) -> bool {
        self.labels.contains(&label)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// The greatest member of the closure below `j`, i.e. the unique `l`
    /// with `j ∈ l↑C(S)`.
    pub fn owner(&self, j: Label) -> Label {
        Label::join_all(self.generators.iter().copied().filter(|g| g.leq(j)))
    }
}

/// Whether `j` lies in the upward neighbourhood `l↑S`: `l ⊑ j` and every
/// member of `S` below `j` is also below `l`.
pub fn in_up_neighborhood(j: Label, l: Label, s: &BTreeSet<Label>) -> Result<bool> {
    if !s.contains(&l) {
        return Err(Error::NotInSet);
    }
    Ok(l.leq(j) && s.iter().all(|&k| !k.leq(j) || k.leq(l)))
}

/// Result of checking that the upward neighbourhoods of `C(S)` partition a
/// set of probe labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionCheck {
    pub holds: bool,
    /// First probe that lies in zero or several neighbourhoods, with the
    /// owners it was found in.
    pub counterexample: Option<(Label, Vec<Label>)>,
}

pub fn partition_check<'a, I>(s: I, probes: &[Label]) -> PartitionCheck
where
    I: IntoIterator<Item = &'a Label>,
{
    let closure = closure_set(s);
    for &probe in probes {
        let owners: Vec<Label> = closure
            .iter()
            .copied()
            .filter(|&l| in_up_neighborhood(probe, l, &closure).unwrap_or(false))
            .collect();
        if owners.len() != 1 {
            return PartitionCheck {
                holds: false,
                counterexample: Some((probe, owners)),
            };
        }
    }
    PartitionCheck {
        holds: true,
        counterexample: None,
    }
}
