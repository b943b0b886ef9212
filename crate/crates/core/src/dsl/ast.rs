use crate::lattice::{Label, PrincipalUniverse};

/// Set-sorted expressions. Every program body is one of these.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SetExpr {
    /// The program's input variable.
    Input,
    Empty,
    Singleton(Box<NatExpr>, Box<LabelExpr>),
    Union(Box<SetExpr>, Box<SetExpr>),
    Project(Box<SetExpr>, Box<LabelExpr>),
    /// Elements labeled exactly the given label.
    SelectAt(Box<SetExpr>, Box<LabelExpr>),
    /// Every element relabeled to the given label.
    Relabel(Box<SetExpr>, Box<LabelExpr>),
    If(Box<BoolExpr>, Box<SetExpr>, Box<SetExpr>),
    Diverge,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NatExpr {
    Lit(u64),
    Size(Box<SetExpr>),
    Add(Box<NatExpr>, Box<NatExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LabelExpr {
    /// A literal label; `{}` is bottom.
    Lit(Label),
    /// Join of the labels occurring in a set.
    JoinLabels(Box<SetExpr>),
    Join(Box<LabelExpr>, Box<LabelExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    Member(Box<NatExpr>, Box<LabelExpr>, Box<SetExpr>),
    Subseteq(Box<SetExpr>, Box<SetExpr>),
    IsEmpty(Box<SetExpr>),
    EqLabel(Box<LabelExpr>, Box<LabelExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    Not(Box<BoolExpr>),
}

/// A named single-argument program.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Program {
    pub name: String,
    pub body: SetExpr,
}

impl Program {
    pub fn new(name: impl Into<String>, body: SetExpr) -> Self {
        Program {
            name: name.into(),
            body,
        }
    }

    /// Structural equality of the code, ignoring the name.
    pub fn same_code(&self, other: &Program) -> bool {
        self.body == other.body
    }

    /// Number of AST nodes; the size `|p|`.
    pub fn size(&self) -> usize {
        self.body.size()
    }

    /// Source text in the concrete grammar. Parsing it yields the same AST.
    pub fn to_source(&self, universe: &PrincipalUniverse) -> String {
        let mut out = String::from("fun(x) -> ");
        print_set(&self.body, universe, &mut out);
        out
    }
}

impl SetExpr {
    pub fn size(&self) -> usize {
        1 + match self {
            SetExpr::Input | SetExpr::Empty | SetExpr::Diverge => 0,
            SetExpr::Singleton(n, l) => n.size() + l.size(),
            SetExpr::Union(a, b) => a.size() + b.size(),
            SetExpr::Project(s, l) | SetExpr::SelectAt(s, l) | SetExpr::Relabel(s, l) => {
                s.size() + l.size()
            }
            SetExpr::If(c, t, e) => c.size() + t.size() + e.size(),
        }
    }
}

impl NatExpr {
    pub fn size(&self) -> usize {
        1 + match self {
            NatExpr::Lit(_) => 0,
            NatExpr::Size(s) => s.size(),
            NatExpr::Add(a, b) => a.size() + b.size(),
        }
    }
}

impl LabelExpr {
    pub fn size(&self) -> usize {
        1 + match self {
            LabelExpr::Lit(_) => 0,
            LabelExpr::JoinLabels(s) => s.size(),
            LabelExpr::Join(a, b) => a.size() + b.size(),
        }
    }
}

impl BoolExpr {
    pub fn size(&self) -> usize {
        1 + match self {
            BoolExpr::Member(n, l, s) => n.size() + l.size() + s.size(),
            BoolExpr::Subseteq(a, b) => a.size() + b.size(),
            BoolExpr::IsEmpty(s) => s.size(),
            BoolExpr::EqLabel(a, b) => a.size() + b.size(),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) => a.size() + b.size(),
            BoolExpr::Not(b) => b.size(),
        }
    }
}

fn print_set(e: &SetExpr, u: &PrincipalUniverse, out: &mut String) {
    match e {
        SetExpr::Input => out.push('x'),
        SetExpr::Empty => out.push_str("{}"),
        SetExpr::Singleton(n, l) => {
            out.push('{');
            print_nat(n, u, out);
            out.push('^');
            print_label(l, u, out);
            out.push('}');
        }
        SetExpr::Union(a, b) => {
            out.push_str("union(");
            print_set(a, u, out);
            out.push_str(", ");
            print_set(b, u, out);
            out.push(')');
        }
        SetExpr::Project(s, l) => print_set_label("project", s, l, u, out),
        SetExpr::SelectAt(s, l) => print_set_label("at", s, l, u, out),
        SetExpr::Relabel(s, l) => print_set_label("relabel", s, l, u, out),
        SetExpr::If(c, t, f) => {
            out.push_str("if ");
            print_bool(c, u, out);
            out.push_str(" then ");
            print_set(t, u, out);
            out.push_str(" else ");
            print_set(f, u, out);
        }
        SetExpr::Diverge => out.push_str("diverge"),
    }
}

fn print_set_label(op: &str, s: &SetExpr, l: &LabelExpr, u: &PrincipalUniverse, out: &mut String) {
    out.push_str(op);
    out.push('(');
    print_set(s, u, out);
    out.push_str(", ");
    print_label(l, u, out);
    out.push(')');
}

fn print_nat(e: &NatExpr, u: &PrincipalUniverse, out: &mut String) {
    match e {
        NatExpr::Lit(n) => out.push_str(&n.to_string()),
        NatExpr::Size(s) => {
            out.push_str("size(");
            print_set(s, u, out);
            out.push(')');
        }
        NatExpr::Add(a, b) => {
            out.push_str("add(");
            print_nat(a, u, out);
            out.push_str(", ");
            print_nat(b, u, out);
            out.push(')');
        }
    }
}

fn print_label(e: &LabelExpr, u: &PrincipalUniverse, out: &mut String) {
    match e {
        LabelExpr::Lit(l) => out.push_str(&u.display(*l)),
        LabelExpr::JoinLabels(s) => {
            out.push_str("joinlabels(");
            print_set(s, u, out);
            out.push(')');
        }
        LabelExpr::Join(a, b) => {
            out.push_str("join(");
            print_label(a, u, out);
            out.push_str(", ");
            print_label(b, u, out);
            out.push(')');
        }
    }
}

fn print_bool(e: &BoolExpr, u: &PrincipalUniverse, out: &mut String) {
    match e {
        BoolExpr::Member(n, l, s) => {
            out.push_str("member(");
            print_nat(n, u, out);
            out.push_str(", ");
            print_label(l, u, out);
            out.push_str(", ");
            print_set(s, u, out);
            out.push(')');
        }
        BoolExpr::Subseteq(a, b) => {
            out.push_str("subseteq(");
            print_set(a, u, out);
            out.push_str(", ");
            print_set(b, u, out);
            out.push(')');
        }
        BoolExpr::IsEmpty(s) => {
            out.push_str("isempty(");
            print_set(s, u, out);
            out.push(')');
        }
        BoolExpr::EqLabel(a, b) => {
            out.push_str("eqlabel(");
            print_label(a, u, out);
            out.push_str(", ");
            print_label(b, u, out);
            out.push(')');
        }
        BoolExpr::And(a, b) => print_binary(a, " && ", b, u, out),
        BoolExpr::Or(a, b) => print_binary(a, " || ", b, u, out),
        BoolExpr::Not(b) => {
            out.push('!');
            print_bool(b, u, out);
        }
    }
}

fn print_binary(a: &BoolExpr, op: &str, b: &BoolExpr, u: &PrincipalUniverse, out: &mut String) {
    out.push('(');
    print_bool(a, u, out);
    out.push_str(op);
    print_bool(b, u, out);
    out.push(')');
}
