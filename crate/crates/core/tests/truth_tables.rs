//! The catalog programs against direct Rust transcriptions of their
//! definitions, exhaustively over the two-point universe.

use multiexec::dsl::{catalog, eval, Outcome, DEFAULT_FUEL};
use multiexec::labeled::LabeledSet;
use multiexec::lattice::{Label, PrincipalUniverse};
use multiexec::oracle::{InputSpace, UniverseSpec};

const L: Label = Label::BOTTOM;

fn high() -> Label {
    Label::singleton(0)
}

fn set(elems: &[(u64, Label)]) -> LabeledSet {
    let mut s = LabeledSet::new();
    for &(a, l) in elems {
        s.insert(a, l);
    }
    s
}

fn reference(name: &str, x: &LabeledSet) -> Outcome {
    let h = high();
    let done = Outcome::Terminated;
    match name {
        "id" => done(x.clone()),
        "combineAll" => done(set(&[(x.len() as u64, x.label_join())])),
        "leakBit" => done(set(&[(if x.contains(1, h) { 1 } else { 0 }, L)])),
        "leakAll" => done(x.iter().map(|v| (v.value, L)).fold(
            LabeledSet::new(),
            |mut s, (a, l)| {
                s.insert(a, l);
                s
            },
        )),
        "termLeak" if x.contains(1, h) => done(LabeledSet::new()),
        "termLeak" => Outcome::Diverged,
        "divergeIfLPresent" if x.contains(1, L) => done(x.clone()),
        "divergeIfLPresent" => Outcome::Diverged,
        "divergeIfHPresent" if x.contains(1, h) => Outcome::Diverged,
        "divergeIfHPresent" => done(LabeledSet::new()),
        "divergeIfHAbsent" if !x.contains(1, h) => Outcome::Diverged,
        "divergeIfHAbsent" => done(LabeledSet::new()),
        "leakLevel" if x.select(h).is_empty() => done(set(&[(0, L)])),
        "leakLevel" => done(LabeledSet::new()),
        "empty" => done(LabeledSet::new()),
        other => panic!("no reference for {other}"),
    }
}

#[test]
fn two_point_programs_match_their_definitions() {
    let spec = UniverseSpec::with_principals(PrincipalUniverse::two_point());
    let space = InputSpace::new(&spec).unwrap();
    let mut checked = 0;
    for p in catalog::programs_for(&spec.principals) {
        for x in space.inputs() {
            assert_eq!(
                eval(&p, &x, DEFAULT_FUEL),
                reference(&p.name, &x),
                "{} on {x:?}",
                p.name
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 10 * 16);
}

#[test]
fn combine_matches_its_definition() {
    let u = catalog::entry("combine").unwrap().universe();
    let (alice, bob) = (u.label(["Alice"]).unwrap(), u.label(["Bob"]).unwrap());
    let p = catalog::program("combine", &u).unwrap();
    let spec = UniverseSpec::with_principals(u.clone());
    for x in InputSpace::new(&spec)
        .unwrap()
        .inputs()
        .filter(|x| x.len() <= 4)
    {
        let expected = set(&[(
            (x.select(alice).len() + x.select(bob).len()) as u64,
            u.top(),
        )]);
        assert_eq!(eval(&p, &x, DEFAULT_FUEL), Outcome::Terminated(expected));
    }
}

#[test]
fn worked_rows() {
    let u = PrincipalUniverse::two_point();
    let h = high();
    let run =
        |name: &str, x: &LabeledSet| eval(&catalog::program(name, &u).unwrap(), x, DEFAULT_FUEL);
    assert_eq!(
        run("combineAll", &LabeledSet::new()),
        Outcome::Terminated(set(&[(0, L)]))
    );
    assert_eq!(
        run("combineAll", &set(&[(0, h)])),
        Outcome::Terminated(set(&[(1, h)]))
    );
    assert_eq!(
        run("leakAll", &set(&[(0, h), (1, h)])),
        Outcome::Terminated(set(&[(0, L), (1, L)]))
    );
    assert_eq!(
        run("leakLevel", &set(&[(0, h)])),
        Outcome::Terminated(LabeledSet::new())
    );
    assert_eq!(run("termLeak", &LabeledSet::new()), Outcome::Diverged);
}
