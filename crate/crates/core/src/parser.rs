//! Line-oriented text format for rules, constraints, keys, queries and facts.
//!
//! ```text
//! % comment
//! s1: stock_portf(X,Y,Z) -> company(X,V,W).
//! d1: legal_person(X), fin_ins(X) -> false.
//! key(r) = [1].
//! q(A) :- r(A,B), s(B).
//! r(a,'New York').
//! ```

use std::collections::BTreeSet;

use crate::chase::{Instance, NEQ};
use crate::error::{Error, Result};
use crate::model::{Atom, ConjunctiveQuery, Schema, Term};
use crate::rules::{KeyDependency, NegativeConstraint, Tgd};

#[derive(Clone, Debug, Default)]
pub struct Program {
    pub schema: Schema,
    pub tgds: Vec<Tgd>,
    pub ncs: Vec<NegativeConstraint>,
    pub kds: Vec<KeyDependency>,
    pub queries: Vec<ConjunctiveQuery>,
    pub facts: Instance,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Quoted(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Colon,
    If,
    Arrow,
    Equals,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Quoted(s) => format!("'{s}'"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Colon => "`:`".into(),
            Tok::If => "`:-`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Equals => "`=`".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let chars: Vec<char> = raw.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            let single = |tok| Spanned { tok, line, column };
            match c {
                '%' => break,
                c if c.is_whitespace() => i += 1,
                '(' => {
                    out.push(single(Tok::LParen));
                    i += 1;
                }
                ')' => {
                    out.push(single(Tok::RParen));
                    i += 1;
                }
                '[' => {
                    out.push(single(Tok::LBracket));
                    i += 1;
                }
                ']' => {
                    out.push(single(Tok::RBracket));
                    i += 1;
                }
                ',' => {
                    out.push(single(Tok::Comma));
                    i += 1;
                }
                '.' => {
                    out.push(single(Tok::Dot));
                    i += 1;
                }
                '=' => {
                    out.push(single(Tok::Equals));
                    i += 1;
                }
                ':' if chars.get(i + 1) == Some(&'-') => {
                    out.push(single(Tok::If));
                    i += 2;
                }
                ':' => {
                    out.push(single(Tok::Colon));
                    i += 1;
                }
                '-' if chars.get(i + 1) == Some(&'>') => {
                    out.push(single(Tok::Arrow));
                    i += 2;
                }
                '\'' => {
                    let mut s = String::new();
                    i += 1;
                    loop {
                        match chars.get(i) {
                            None => return Err(syntax(line, column, "unterminated quoted constant")),
                            Some('\'') if chars.get(i + 1) == Some(&'\'') => {
                                s.push('\'');
                                i += 2;
                            }
                            Some('\'') => {
                                i += 1;
                                break;
                            }
                            Some(&ch) => {
                                s.push(ch);
                                i += 1;
                            }
                        }
                    }
                    out.push(single(Tok::Quoted(s)));
                }
                c if c.is_alphanumeric() || c == '_' => {
                    let start = i;
                    while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    out.push(single(Tok::Ident(chars[start..i].iter().collect())));
                }
                other => return Err(syntax(line, column, format!("unexpected character `{other}`"))),
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.pos + offset).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|s| (s.line, s.column)).unwrap_or(self.end)
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let (line, column) = self.here();
        syntax(line, column, message)
    }

    fn unexpected(&self, wanted: &str) -> Error {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {}", t.describe())),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    fn expect(&mut self, tok: Tok, wanted: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(wanted))
        }
    }

    fn ident(&mut self, wanted: &str) -> Result<(String, usize, usize)> {
        let (line, column) = self.here();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, line, column))
            }
            _ => Err(self.unexpected(wanted)),
        }
    }

    fn term(&mut self) -> Result<Term> {
        let (line, column) = self.here();
        match self.peek().cloned() {
            Some(Tok::Quoted(s)) => {
                self.pos += 1;
                Ok(Term::constant(&s))
            }
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                let first = s.chars().next().unwrap_or('_');
                if first == '_' {
                    Err(Error::Reserved {
                        line,
                        column,
                        symbol: s,
                        reason: "a leading underscore is reserved for generated symbols",
                    })
                } else if first.is_uppercase() {
                    Ok(Term::var(&s))
                } else {
                    Ok(Term::constant(&s))
                }
            }
            _ => Err(self.unexpected("a term")),
        }
    }

    fn atom(&mut self) -> Result<Atom> {
        let (name, line, column) = self.ident("a predicate")?;
        let reason = if name.starts_with('_') {
            Some("a leading underscore is reserved for auxiliary predicates")
        } else if name == NEQ {
            Some("`neq` is an engine-internal predicate")
        } else if name == "false" {
            Some("`false` only appears as a constraint head")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(Error::Reserved {
                line,
                column,
                symbol: name,
                reason,
            });
        }
        self.expect(Tok::LParen, "`(`")?;
        let mut args = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            loop {
                args.push(self.term()?);
                if self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "`,` or `)`")?;
        Ok(Atom::new(&name, args))
    }

    fn atoms(&mut self) -> Result<Vec<Atom>> {
        let mut out = vec![self.atom()?];
        while self.peek() == Some(&Tok::Comma) {
            self.pos += 1;
            out.push(self.atom()?);
        }
        Ok(out)
    }

    fn is_key_statement(&self) -> bool {
        matches!(self.peek(), Some(Tok::Ident(k)) if k == "key")
            && self.peek_at(1) == Some(&Tok::LParen)
            && matches!(self.peek_at(2), Some(Tok::Ident(_)))
            && self.peek_at(3) == Some(&Tok::RParen)
            && self.peek_at(4) == Some(&Tok::Equals)
    }

    fn key(&mut self) -> Result<(KeyDependency, (usize, usize))> {
        let at = self.here();
        self.pos += 2;
        let (predicate, _, _) = self.ident("a predicate")?;
        self.pos += 2;
        self.expect(Tok::LBracket, "`[`")?;
        let mut positions = Vec::new();
        loop {
            let (n, line, column) = self.ident("a position")?;
            let index: usize = n
                .parse()
                .map_err(|_| syntax(line, column, format!("`{n}` is not a position")))?;
            if index == 0 {
                return Err(syntax(line, column, "positions start at 1"));
            }
            positions.push(index);
            if self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.expect(Tok::RBracket, "`,` or `]`")?;
        self.expect(Tok::Dot, "`.`")?;
        positions.sort_unstable();
        positions.dedup();
        Ok((KeyDependency::new(&predicate, positions), at))
    }
}

/// Parses a whole program. Rules without a label are named `s1, s2, ...`
/// and constraints `nc1, nc2, ...`, counted per kind.
pub fn parse_program(text: &str) -> Result<Program> {
    let toks = tokenize(text)?;
    let end = toks.last().map(|s| (s.line, s.column + 1)).unwrap_or((1, 1));
    let mut p = Parser { toks, pos: 0, end };
    let mut program = Program::default();
    let mut keys = Vec::new();
    while p.peek().is_some() {
        if p.is_key_statement() {
            keys.push(p.key()?);
            continue;
        }
        let label = match (p.peek(), p.peek_at(1)) {
            (Some(Tok::Ident(name)), Some(Tok::Colon)) => {
                let name = name.clone();
                p.pos += 2;
                Some(name)
            }
            _ => None,
        };
        let start = p.here();
        let first = p.atoms()?;
        match p.peek() {
            Some(Tok::If) => {
                if label.is_some() {
                    return Err(syntax(start.0, start.1, "queries take no label"));
                }
                if first.len() != 1 {
                    return Err(syntax(start.0, start.1, "a query has a single head atom"));
                }
                p.pos += 1;
                let body = p.atoms()?;
                p.expect(Tok::Dot, "`,` or `.`")?;
                let head = first.into_iter().next().expect("one head atom");
                program.schema.declare_atoms(&body)?;
                let q = ConjunctiveQuery::new(&head.predicate, head.args, body);
                if let Some(v) = q.unsafe_variable() {
                    return Err(Error::UnsafeQuery {
                        query: head.predicate.to_string(),
                        variable: v.to_string(),
                    });
                }
                program.queries.push(q);
            }
            Some(Tok::Arrow) => {
                p.pos += 1;
                let is_false =
                    matches!(p.peek(), Some(Tok::Ident(f)) if f == "false") && p.peek_at(1) != Some(&Tok::LParen);
                program.schema.declare_atoms(&first)?;
                if is_false {
                    p.pos += 1;
                    p.expect(Tok::Dot, "`.`")?;
                    let name = label.unwrap_or_else(|| format!("nc{}", program.ncs.len() + 1));
                    program.ncs.push(NegativeConstraint::new(&name, first));
                } else {
                    let head = p.atoms()?;
                    p.expect(Tok::Dot, "`,` or `.`")?;
                    program.schema.declare_atoms(&head)?;
                    let name = label.unwrap_or_else(|| format!("s{}", program.tgds.len() + 1));
                    program.tgds.push(Tgd::new(&name, first, head));
                }
            }
            Some(Tok::Dot) => {
                p.pos += 1;
                if label.is_some() || first.len() != 1 {
                    return Err(syntax(start.0, start.1, "a fact is a single ground atom"));
                }
                let atom = first.into_iter().next().expect("one atom");
                if !atom.is_ground() {
                    return Err(syntax(start.0, start.1, format!("fact `{atom}` contains variables")));
                }
                program.schema.declare(&atom.predicate, atom.arity())?;
                program.facts.insert(atom);
            }
            _ => return Err(p.unexpected("`:-`, `->` or `.`")),
        }
    }
    for (kd, (line, column)) in keys {
        let Some(arity) = program.schema.arity(&kd.predicate) else {
            return Err(syntax(
                line,
                column,
                format!("key on unknown predicate `{}`", kd.predicate),
            ));
        };
        if let Some(bad) = kd.key_positions.iter().find(|&&i| i > arity) {
            return Err(syntax(
                line,
                column,
                format!("position {bad} exceeds the arity {arity} of `{}`", kd.predicate),
            ));
        }
        program.kds.push(kd);
    }
    Ok(program)
}

impl Program {
    /// The single query of a query file.
    pub fn query(&self) -> Result<&ConjunctiveQuery> {
        match self.queries.as_slice() {
            [q] => Ok(q),
            qs => Err(syntax(1, 1, format!("expected exactly one query, found {}", qs.len()))),
        }
    }

    /// Predicates used anywhere in the program.
    pub fn predicates(&self) -> BTreeSet<String> {
        self.schema.predicates().map(|(p, _)| p.to_string()).collect()
    }
}
