//! Recursive-descent parser for `fun(x) -> expr` program text.
//!
//! The grammar is sorted: each position expects a set, natural, label or
//! boolean expression, which is what disambiguates `{}` (empty set) from
//! `{}` (bottom label).

use super::ast::{BoolExpr, LabelExpr, NatExpr, Program, SetExpr};
use super::line_col;
use crate::error::{Error, Result};
use crate::lattice::PrincipalUniverse;

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    Sym(&'static str),
    Eof,
}

struct Token {
    tok: Tok,
    pos: usize,
}

const SYMBOLS: [&str; 10] = ["->", "&&", "||", "(", ")", "{", "}", ",", "^", "!"];

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    'outer: while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            tokens.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                pos: start,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            tokens.push(Token {
                tok: Tok::Number(src[start..i].to_string()),
                pos: start,
            });
            continue;
        }
        for sym in SYMBOLS {
            if src[i..].starts_with(sym) {
                tokens.push(Token {
                    tok: Tok::Sym(sym),
                    pos: i,
                });
                i += sym.len();
                continue 'outer;
            }
        }
        let (line, column) = line_col(src, i);
        return Err(Error::Syntax {
            line,
            column,
            message: format!("unexpected character {c:?}"),
        });
    }
    tokens.push(Token {
        tok: Tok::Eof,
        pos: src.len(),
    });
    Ok(tokens)
}

pub(super) struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    at: usize,
    last: usize,
    universe: &'a PrincipalUniverse,
    var: String,
}

impl<'a> Parser<'a> {
    pub(super) fn new(src: &'a str, universe: &'a PrincipalUniverse) -> Result<Self> {
        Ok(Parser {
            src,
            tokens: tokenize(src)?,
            at: 0,
            last: 0,
            universe,
            var: String::new(),
        })
    }

    pub(super) fn program(mut self, name: &str) -> Result<Program> {
        self.keyword("fun")?;
        self.sym("(")?;
        self.var = match self.next() {
            Tok::Ident(v) => v,
            _ => return Err(self.error_prev("expected the input variable name")),
        };
        self.sym(")")?;
        self.sym("->")?;
        let body = self.set()?;
        if self.peek() != &Tok::Eof {
            return Err(self.error("unexpected trailing input"));
        }
        Ok(Program::new(name, body))
    }

    fn set(&mut self) -> Result<SetExpr> {
        match self.peek().clone() {
            Tok::Sym("{") => {
                self.bump();
                if self.eat_sym("}") {
                    return Ok(SetExpr::Empty);
                }
                let n = self.nat()?;
                self.sym("^")?;
                let l = self.label()?;
                self.sym("}")?;
                Ok(SetExpr::Singleton(Box::new(n), Box::new(l)))
            }
            Tok::Ident(id) => {
                self.bump();
                match id.as_str() {
                    _ if id == self.var => Ok(SetExpr::Input),
                    "diverge" => Ok(SetExpr::Diverge),
                    "if" => {
                        let c = self.boolean()?;
                        self.keyword("then")?;
                        let t = self.set()?;
                        self.keyword("else")?;
                        let e = self.set()?;
                        Ok(SetExpr::If(Box::new(c), Box::new(t), Box::new(e)))
                    }
                    "union" => {
                        self.sym("(")?;
                        let a = self.set()?;
                        self.sym(",")?;
                        let b = self.set()?;
                        self.sym(")")?;
                        Ok(SetExpr::Union(Box::new(a), Box::new(b)))
                    }
                    "project" | "at" | "relabel" => {
                        self.sym("(")?;
                        let s = Box::new(self.set()?);
                        self.sym(",")?;
                        let l = Box::new(self.label()?);
                        self.sym(")")?;
                        Ok(match id.as_str() {
                            "project" => SetExpr::Project(s, l),
                            "at" => SetExpr::SelectAt(s, l),
                            _ => SetExpr::Relabel(s, l),
                        })
                    }
                    _ => Err(self.error_prev(&format!("expected a set expression, found `{id}`"))),
                }
            }
            _ => Err(self.error("expected a set expression")),
        }
    }

    fn nat(&mut self) -> Result<NatExpr> {
        match self.next() {
            Tok::Number(digits) => digits
                .parse()
                .map(NatExpr::Lit)
                .map_err(|_| self.error_prev(&format!("invalid natural number `{digits}`"))),
            Tok::Ident(id) if id == "size" => {
                self.sym("(")?;
                let s = self.set()?;
                self.sym(")")?;
                Ok(NatExpr::Size(Box::new(s)))
            }
            Tok::Ident(id) if id == "add" => {
                self.sym("(")?;
                let a = self.nat()?;
                self.sym(",")?;
                let b = self.nat()?;
                self.sym(")")?;
                Ok(NatExpr::Add(Box::new(a), Box::new(b)))
            }
            _ => Err(self.error_prev("expected a natural-number expression")),
        }
    }

    fn label(&mut self) -> Result<LabelExpr> {
        match self.next() {
            Tok::Sym("{") => {
                let mut names = Vec::new();
                if !self.eat_sym("}") {
                    loop {
                        match self.next() {
                            Tok::Ident(n) | Tok::Number(n) => {
                                names.push((n, self.tokens[self.last].pos))
                            }
                            _ => return Err(self.error_prev("expected a principal name")),
                        }
                        if self.eat_sym("}") {
                            break;
                        }
                        self.sym(",")?;
                    }
                }
                let mut label = crate::lattice::Label::BOTTOM;
                for (name, pos) in names {
                    let idx = self.universe.index_of(&name).ok_or_else(|| {
                        let (line, column) = line_col(self.src, pos);
                        Error::Syntax {
                            line,
                            column,
                            message: format!("unknown principal `{name}`"),
                        }
                    })?;
                    label = label.join(crate::lattice::Label::singleton(idx));
                }
                Ok(LabelExpr::Lit(label))
            }
            Tok::Ident(id) if id == "joinlabels" => {
                self.sym("(")?;
                let s = self.set()?;
                self.sym(")")?;
                Ok(LabelExpr::JoinLabels(Box::new(s)))
            }
            Tok::Ident(id) if id == "join" => {
                self.sym("(")?;
                let a = self.label()?;
                self.sym(",")?;
                let b = self.label()?;
                self.sym(")")?;
                Ok(LabelExpr::Join(Box::new(a), Box::new(b)))
            }
            _ => Err(self.error_prev("expected a label expression")),
        }
    }

    fn boolean(&mut self) -> Result<BoolExpr> {
        let mut lhs = self.conjunction()?;
        while self.eat_sym("||") {
            let rhs = self.conjunction()?;
            lhs = BoolExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<BoolExpr> {
        let mut lhs = self.unary()?;
        while self.eat_sym("&&") {
            let rhs = self.unary()?;
            lhs = BoolExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<BoolExpr> {
        if self.eat_sym("!") {
            return Ok(BoolExpr::Not(Box::new(self.unary()?)));
        }
        if self.eat_sym("(") {
            let b = self.boolean()?;
            self.sym(")")?;
            return Ok(b);
        }
        match self.next() {
            Tok::Ident(id) => match id.as_str() {
                "member" => {
                    self.sym("(")?;
                    let n = self.nat()?;
                    self.sym(",")?;
                    let l = self.label()?;
                    self.sym(",")?;
                    let s = self.set()?;
                    self.sym(")")?;
                    Ok(BoolExpr::Member(Box::new(n), Box::new(l), Box::new(s)))
                }
                "subseteq" => {
                    self.sym("(")?;
                    let a = self.set()?;
                    self.sym(",")?;
                    let b = self.set()?;
                    self.sym(")")?;
                    Ok(BoolExpr::Subseteq(Box::new(a), Box::new(b)))
                }
                "isempty" => {
                    self.sym("(")?;
                    let s = self.set()?;
                    self.sym(")")?;
                    Ok(BoolExpr::IsEmpty(Box::new(s)))
                }
                "eqlabel" => {
                    self.sym("(")?;
                    let a = self.label()?;
                    self.sym(",")?;
                    let b = self.label()?;
                    self.sym(")")?;
                    Ok(BoolExpr::EqLabel(Box::new(a), Box::new(b)))
                }
                _ => Err(self.error_prev(&format!("expected a boolean expression, found `{id}`"))),
            },
            _ => Err(self.error_prev("expected a boolean expression")),
        }
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn bump(&mut self) {
        self.last = self.at;
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
    }

    fn next(&mut self) -> Tok {
        let t = self.peek().clone();
        self.bump();
        t
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(s) if *s == sym) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn sym(&mut self, sym: &str) -> Result<()> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{sym}`")))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        if matches!(self.peek(), Tok::Ident(s) if s == kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("expected `{kw}`")))
        }
    }

    fn error_at(&self, index: usize, message: &str) -> Error {
        let (line, column) = line_col(self.src, self.tokens[index].pos);
        Error::Syntax {
            line,
            column,
            message: message.to_string(),
        }
    }

    fn error(&self, message: &str) -> Error {
        let found = match self.peek() {
            Tok::Eof => "end of input".to_string(),
            Tok::Ident(s) | Tok::Number(s) => format!("`{s}`"),
            Tok::Sym(s) => format!("`{s}`"),
        };
        self.error_at(self.at, &format!("{message}, found {found}"))
    }

    fn error_prev(&self, message: &str) -> Error {
        self.error_at(self.last, message)
    }
}
