use std::collections::BTreeSet;

use serde_json::json;

use super::{me_l, LevelAssignment};
use crate::dsl::{Evaluator, Outcome, Program};
use crate::error::Result;
use crate::labeled::LabeledSet;
use crate::lattice::Label;
use crate::oracle::{
    ClassificationReport, InputSpace, Observations, Security, TerminationClass, UniverseSpec,
};

/// `λx. L(p, x)` as a program into `{0} × L`.
fn as_program<'a>(
    a: &'a dyn LevelAssignment,
    p: &'a Program,
    spec: &'a UniverseSpec,
) -> impl Fn(&LabeledSet) -> Outcome + Sync + 'a {
    move |x| {
        a.assign(p, x, spec).map(|levels| {
            levels
                .into_iter()
                .map(|l| crate::labeled::LabeledValue::new(0, l))
                .collect()
        })
    }
}

/// Results of judging one corpus program under a level assignment.
#[derive(Clone, Debug)]
pub struct ProgramCheck {
    pub program: String,
    /// Classification of `p` itself.
    pub original: Security,
    /// Classification of `ME_L[p]`.
    pub enforced: ClassificationReport,
    /// Classification of `λx. L(p, x)`; the sufficient condition for
    /// TI-security is that this is noninterfering.
    pub assignment: ClassificationReport,
    /// For MT-secure `p`: `p(x)✓ ⟺ L(p, x)✓` and `L(p, x) = L(p(x))` on
    /// every input, the sufficient condition for MT-transparency.
    pub transparency_condition: Option<bool>,
    /// For MT-secure `p`: `ME_L[p](x) = p(x)` on every input.
    pub transparent: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct AssignmentReport {
    pub assignment: String,
    pub programs: Vec<ProgramCheck>,
}

impl AssignmentReport {
    /// Whether `ME_L[p]` is `tau`-secure for every corpus program.
    pub fn secure_for(&self, tau: TerminationClass) -> bool {
        self.programs
            .iter()
            .all(|c| c.enforced.security.is_secure_for(tau))
    }

    /// Whether `ME_L` preserved every MT-secure corpus program.
    pub fn mt_transparent(&self) -> bool {
        self.programs.iter().all(|c| c.transparent != Some(false))
    }

    pub fn security_condition_holds(&self) -> bool {
        self.programs.iter().all(|c| c.assignment.ni)
    }

    pub fn transparency_condition_holds(&self) -> bool {
        self.programs
            .iter()
            .all(|c| c.transparency_condition != Some(false))
    }

    pub fn program(&self, name: &str) -> Option<&ProgramCheck> {
        self.programs.iter().find(|c| c.program == name)
    }

    pub fn to_json(&self, spec: &UniverseSpec) -> serde_json::Value {
        let u = &spec.principals;
        json!({
            "assignment": self.assignment,
            "mt_secure": self.secure_for(TerminationClass::MT),
            "ti_secure": self.secure_for(TerminationClass::TI),
            "mt_transparent": self.mt_transparent(),
            "security_condition": self.security_condition_holds(),
            "transparency_condition": self.transparency_condition_holds(),
            "programs": self.programs.iter().map(|c| json!({
                "program": c.program,
                "original": c.original.to_string(),
                "enforced": c.enforced.to_json(u),
                "assignment": c.assignment.to_json(u),
                "transparency_condition": c.transparency_condition,
                "transparent": c.transparent,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Classifies `ME_L[p]` for every corpus program and evaluates the two
/// pointwise sufficient conditions on the corpus.
pub fn check_assignment(
    a: &dyn LevelAssignment,
    corpus: &[Program],
    spec: &UniverseSpec,
) -> Result<AssignmentReport> {
    let mut programs = Vec::with_capacity(corpus.len());
    for p in corpus {
        let plain = Observations::collect(&Evaluator::new(p, spec.fuel), spec)?;
        let original = plain.classify(&p.name);
        let enforced_fn = |x: &LabeledSet| me_l(a, p, x, spec).outcome;
        let enforced = Observations::collect(&enforced_fn, spec)?;
        let levels = Observations::collect(&as_program(a, p, spec), spec)?;

        let (transparency_condition, transparent) = if original
            .security
            .is_secure_for(TerminationClass::MT)
        {
            let condition = plain
                .outcomes
                .iter()
                .zip(&levels.outcomes)
                .all(|(out, lv)| match (out, lv) {
                    (Outcome::Terminated(o), Outcome::Terminated(l)) => o.labels() == l.labels(),
                    (Outcome::Terminated(_), _) | (_, Outcome::Terminated(_)) => false,
                    _ => true,
                });
            (Some(condition), Some(plain.outcomes == enforced.outcomes))
        } else {
            (None, None)
        };

        programs.push(ProgramCheck {
            program: p.name.clone(),
            original: original.security,
            enforced: enforced.classify(&format!("ME_L[{}]", p.name)),
            assignment: levels.classify(&format!("L({}, -)", p.name)),
            transparency_condition,
            transparent,
        });
    }
    Ok(AssignmentReport {
        assignment: a.name(),
        programs,
    })
}

/// `Σ |L(p, x)|` over the inputs where the assignment terminates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SizeCell {
    pub total: usize,
    pub undefined: usize,
}

#[derive(Clone, Debug)]
pub struct CompareReport {
    pub assignments: Vec<String>,
    pub programs: Vec<String>,
    /// `sizes[a][p]`.
    pub sizes: Vec<Vec<SizeCell>>,
    /// Whether each assignment is pointwise no larger than every other
    /// wherever both terminate.
    pub minimal: Vec<bool>,
}

impl CompareReport {
    pub fn verdict(&self) -> String {
        let names: Vec<&str> = self
            .assignments
            .iter()
            .zip(&self.minimal)
            .filter(|(_, &m)| m)
            .map(|(n, _)| n.as_str())
            .collect();
        if names.is_empty() {
            "no assignment is minimal within the family on this corpus".into()
        } else {
            format!("minimal within family on this corpus: {}", names.join(", "))
        }
    }

    /// Assignments that failed to terminate somewhere on the corpus.
    pub fn divergent(&self) -> Vec<&str> {
        self.assignments
            .iter()
            .zip(&self.sizes)
            .filter(|(_, row)| row.iter().any(|c| c.undefined > 0))
            .map(|(n, _)| n.as_str())
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "assignments": self.assignments,
            "programs": self.programs,
            "sizes": self.sizes.iter().map(|row| row.iter().map(|c| json!({
                "total": c.total,
                "undefined": c.undefined,
            })).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "minimal": self.minimal,
            "divergent": self.divergent(),
            "verdict": self.verdict(),
        })
    }
}

/// Compares `|L(p, x)|` pointwise across a family of assignments.
pub fn la_compare(
    family: &[&dyn LevelAssignment],
    corpus: &[Program],
    spec: &UniverseSpec,
) -> Result<CompareReport> {
    let inputs: Vec<LabeledSet> = InputSpace::new(spec)?.inputs().collect();
    // points[a][p][i] = |L_a(p, x_i)| when defined.
    let points: Vec<Vec<Vec<Option<usize>>>> = family
        .iter()
        .map(|a| {
            corpus
                .iter()
                .map(|p| {
                    inputs
                        .iter()
                        .map(|x| {
                            a.assign(p, x, spec)
                                .into_terminated()
                                .map(|s: BTreeSet<Label>| s.len())
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let sizes = points
        .iter()
        .map(|row| {
            row.iter()
                .map(|cells| SizeCell {
                    total: cells.iter().flatten().sum(),
                    undefined: cells.iter().filter(|c| c.is_none()).count(),
                })
                .collect()
        })
        .collect();
    let minimal = (0..family.len())
        .map(|a| {
            (0..family.len()).filter(|&b| b != a).all(|b| {
                points[a]
                    .iter()
                    .flatten()
                    .zip(points[b].iter().flatten())
                    .all(|pair| match pair {
                        (Some(x), Some(y)) => x <= y,
                        _ => true,
                    })
            })
        })
        .collect();
    Ok(CompareReport {
        assignments: family.iter().map(|a| a.name()).collect(),
        programs: corpus.iter().map(|p| p.name.clone()).collect(),
        sizes,
        minimal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::catalog;
    use crate::enforce::{ConstLevels, Full, HAbsent, LabelIntersect, OutputLabels};
    use crate::lattice::PrincipalUniverse;

    fn h_spec() -> UniverseSpec {
        UniverseSpec::with_principals(PrincipalUniverse::two_point())
    }

    #[test]
    fn output_labels_is_insecure_on_leak_level() {
        let spec = h_spec();
        let corpus = catalog::programs_for(&spec.principals);
        let report = check_assignment(&OutputLabels, &corpus, &spec).unwrap();
        assert!(!report.secure_for(TerminationClass::TI));
        let leak = report.program("leakLevel").unwrap();
        let w = leak.enforced.ni_witness.as_ref().unwrap();
        assert_eq!(
            (w.x.clone(), w.y.clone()),
            (
                LabeledSet::new(),
                LabeledSet::singleton(0, spec.principals.top())
            )
        );
        assert_eq!(w.out_x, LabeledSet::singleton(0, Label::BOTTOM));
        assert_eq!(w.out_y, LabeledSet::new());
    }

    #[test]
    fn label_intersect_full_is_mt_secure() {
        let spec = h_spec();
        let corpus = catalog::programs_for(&spec.principals);
        let report = check_assignment(&LabelIntersect::Full, &corpus, &spec).unwrap();
        assert!(report.secure_for(TerminationClass::MT));
        assert!(report.security_condition_holds());
    }

    #[test]
    fn h_absent_condition_without_mt_security() {
        let spec = h_spec();
        let high = spec.principals.top();
        let corpus = catalog::programs_for(&spec.principals);
        let report = check_assignment(&HAbsent { high }, &corpus, &spec).unwrap();
        assert!(report
            .programs
            .iter()
            .all(|c| c.assignment.security.is_secure_for(TerminationClass::MT)));
        let absent = report.program("divergeIfHAbsent").unwrap();
        assert!(absent.enforced.ni);
        assert!(!absent.enforced.security.is_secure_for(TerminationClass::MT));
        let w = absent.enforced.mt_witness.as_ref().unwrap();
        assert_eq!(w.input.label_join(), high);
        assert_eq!(w.projected, LabeledSet::new());
        // The pair from the worked example: defined on {1^H}, undefined on its projection.
        let p = catalog::program("divergeIfHAbsent", &spec.principals).unwrap();
        let a = HAbsent { high };
        assert!(me_l(&a, &p, &LabeledSet::singleton(1, high), &spec)
            .outcome
            .is_terminated());
        assert_eq!(
            me_l(&a, &p, &LabeledSet::new(), &spec).outcome,
            Outcome::Diverged
        );
    }

    #[test]
    fn compare_examples() {
        let spec = h_spec();
        let corpus = catalog::programs_for(&spec.principals);
        let full = Full;
        let none = ConstLevels::default();
        let r = la_compare(&[&full, &none], &corpus, &spec).unwrap();
        assert_eq!(r.minimal, vec![false, true]);
        assert!(r.verdict().ends_with("const-empty"));

        let total: Vec<Program> = ["id", "leakBit", "leakAll", "empty"]
            .iter()
            .map(|n| catalog::program(n, &spec.principals).unwrap())
            .collect();
        let out = OutputLabels;
        let r = la_compare(&[&out, &full], &total, &spec).unwrap();
        assert_eq!(r.minimal, vec![true, false]);
        assert!(r.divergent().is_empty());

        let r = la_compare(&[&out], &corpus, &spec).unwrap();
        assert_eq!(r.minimal, vec![true]);
        assert_eq!(r.divergent(), vec!["output-labels"]);
        assert_eq!(r.to_json()["assignments"], json!(["output-labels"]));
    }
}
