use std::collections::BTreeSet;
use std::fmt;

use super::{ActExpr, Arg, Formula, Term};

const KEYWORDS: &[&str] = &[
    "and", "or", "not", "exists", "forall", "iota", "true", "false",
];
const MODALS: &[&str] = &["Bel", "Int", "MB", "CollInt", "CollAcc", "Done", "Possible"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub expected: BTreeSet<String>,
    pub found: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let expected: Vec<&str> = self.expected.iter().map(String::as_str).collect();
        write!(
            f,
            "syntax error at {}:{}: found {}, expected one of: {}",
            self.line,
            self.column,
            self.found,
            expected.join(", ")
        )
    }
}

impl std::error::Error for SyntaxError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Eq,
    Arrow,
    Pipe,
    Semi,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Var(s) => format!("`?{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Arrow => "`=>`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<Spanned>, SyntaxError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let (start_line, start_col) = (line, col);
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '|' => Tok::Pipe,
            ';' => Tok::Semi,
            '=' => {
                if chars.get(i + 1) == Some(&'>') {
                    i += 1;
                    col += 1;
                    Tok::Arrow
                } else {
                    Tok::Eq
                }
            }
            '?' => {
                let mut j = i + 1;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                if j == i + 1 || !is_ident_start(chars[i + 1]) {
                    return Err(SyntaxError {
                        line,
                        column: col,
                        expected: ["variable name".to_string()].into(),
                        found: "`?`".into(),
                    });
                }
                let name: String = chars[i + 1..j].iter().collect();
                col += j - i;
                i = j;
                out.push(Spanned {
                    tok: Tok::Var(name),
                    line: start_line,
                    column: start_col,
                });
                continue;
            }
            c if is_ident_start(c) => {
                let mut j = i;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                let name: String = chars[i..j].iter().collect();
                col += j - i;
                i = j;
                out.push(Spanned {
                    tok: Tok::Ident(name),
                    line: start_line,
                    column: start_col,
                });
                continue;
            }
            other => {
                return Err(SyntaxError {
                    line,
                    column: col,
                    expected: ["token".to_string()].into(),
                    found: format!("character `{other}`"),
                })
            }
        };
        out.push(Spanned {
            tok,
            line: start_line,
            column: start_col,
        });
        i += 1;
        col += 1;
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

// Parsed operand: a formula, or a bare term that may still become an atom.
enum Node {
    F(Formula),
    T(Term),
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl Parser {
    fn new(text: &str) -> PResult<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> SyntaxError {
        let s = &self.toks[self.pos];
        SyntaxError {
            line: s.line,
            column: s.column,
            expected: expected.iter().map(|e| e.to_string()).collect(),
            found: s.tok.describe(),
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&tok.describe()]))
        }
    }

    fn expect_eof(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error(&["`and`", "`or`", "`=>`", "end of input"]))
        }
    }

    fn name(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) && !MODALS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(&[what])),
        }
    }

    fn var(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.bump();
                Ok(v)
            }
            _ => Err(self.error(&["variable"])),
        }
    }

    fn to_formula(&self, node: Node, at: usize) -> PResult<Formula> {
        match node {
            Node::F(f) => Ok(f),
            Node::T(Term::Const(c)) => Ok(Formula::Atom(c, vec![])),
            Node::T(Term::App(n, args)) => Ok(Formula::Atom(n, args)),
            Node::T(_) => {
                let s = &self.toks[at];
                Err(SyntaxError {
                    line: s.line,
                    column: s.column,
                    expected: ["formula".to_string()].into(),
                    found: "term".into(),
                })
            }
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        let at = self.pos;
        let n = self.implies()?;
        self.to_formula(n, at)
    }

    fn implies(&mut self) -> PResult<Node> {
        let at = self.pos;
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let lhs = self.to_formula(lhs, at)?;
            let rat = self.pos;
            let rhs = self.implies()?;
            let rhs = self.to_formula(rhs, rat)?;
            return Ok(Node::F(Formula::Implies(Box::new(lhs), Box::new(rhs))));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<Node> {
        self.chain("or", Self::and, Formula::Or)
    }

    fn and(&mut self) -> PResult<Node> {
        self.chain("and", Self::unary, Formula::And)
    }

    fn chain(
        &mut self,
        kw: &str,
        next: fn(&mut Self) -> PResult<Node>,
        build: fn(Vec<Formula>) -> Formula,
    ) -> PResult<Node> {
        let at = self.pos;
        let first = next(self)?;
        if !self.is_kw(kw) {
            return Ok(first);
        }
        let mut items = vec![self.to_formula(first, at)?];
        while self.is_kw(kw) {
            self.bump();
            let at = self.pos;
            let n = next(self)?;
            items.push(self.to_formula(n, at)?);
        }
        Ok(Node::F(build(items)))
    }

    fn unary(&mut self) -> PResult<Node> {
        if self.is_kw("not") {
            self.bump();
            let at = self.pos;
            let inner = self.unary()?;
            return Ok(Node::F(Formula::Not(Box::new(self.to_formula(inner, at)?))));
        }
        if self.is_kw("exists") || self.is_kw("forall") {
            let exists = self.is_kw("exists");
            self.bump();
            let v = self.var()?;
            self.expect(Tok::Dot)?;
            let body = Box::new(self.formula()?);
            return Ok(Node::F(if exists {
                Formula::Exists(v, body)
            } else {
                Formula::Forall(v, body)
            }));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Node> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let inner = self.implies()?;
                self.expect(Tok::RParen)?;
                match inner {
                    Node::T(t) if *self.peek() == Tok::Eq => {
                        self.bump();
                        let rhs = self.term()?;
                        Ok(Node::F(Formula::Equals(t, rhs)))
                    }
                    other => Ok(other),
                }
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Node::F(Formula::True))
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Node::F(Formula::False))
            }
            Tok::Ident(s) if MODALS.contains(&s.as_str()) => self.modal(&s).map(Node::F),
            Tok::Ident(_) | Tok::Var(_) => {
                let t = self.term()?;
                if *self.peek() == Tok::Eq {
                    self.bump();
                    let rhs = self.term()?;
                    return Ok(Node::F(Formula::Equals(t, rhs)));
                }
                Ok(Node::T(t))
            }
            _ => Err(self.error(&["formula"])),
        }
    }

    fn modal(&mut self, op: &str) -> PResult<Formula> {
        self.bump();
        self.expect(Tok::LParen)?;
        let f = match op {
            "Bel" | "Int" => {
                let a = self.name("agent")?;
                self.expect(Tok::Comma)?;
                let body = Box::new(self.formula()?);
                if op == "Bel" {
                    Formula::Bel(a, body)
                } else {
                    Formula::Int(a, body)
                }
            }
            "MB" | "CollInt" | "CollAcc" => {
                let a = self.name("agent")?;
                self.expect(Tok::Comma)?;
                let b = self.name("agent")?;
                self.expect(Tok::Comma)?;
                let body = Box::new(self.formula()?);
                match op {
                    "MB" => Formula::MB(a, b, body),
                    "CollInt" => Formula::CollInt(a, b, body),
                    _ => Formula::CollAcc(a, b, body),
                }
            }
            "Done" => {
                let act = self.act()?;
                let pre = if *self.peek() == Tok::Comma {
                    self.bump();
                    self.formula()?
                } else {
                    Formula::True
                };
                Formula::Done(Box::new(act), Box::new(pre))
            }
            _ => Formula::Possible(Box::new(self.formula()?)),
        };
        self.expect(Tok::RParen)?;
        Ok(f)
    }

    fn term(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Var(v) => {
                self.bump();
                Ok(Term::Var(v))
            }
            Tok::Ident(s) if s == "iota" => {
                self.bump();
                let v = self.var()?;
                self.expect(Tok::Dot)?;
                let at = self.pos;
                let body = self.unary()?;
                let body = self.to_formula(body, at)?;
                Ok(Term::Descr(v, Box::new(body)))
            }
            Tok::Ident(_) => {
                let n = self.name("term")?;
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let mut args = vec![self.term()?];
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen)?;
                    Ok(Term::App(n, args))
                } else {
                    Ok(Term::Const(n))
                }
            }
            _ => Err(self.error(&["term"])),
        }
    }

    fn act(&mut self) -> PResult<ActExpr> {
        let mut lhs = self.act_seq()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let rhs = self.act_seq()?;
            lhs = ActExpr::Choice(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn act_seq(&mut self) -> PResult<ActExpr> {
        let mut lhs = self.act_primary()?;
        while *self.peek() == Tok::Semi {
            self.bump();
            let rhs = self.act_primary()?;
            lhs = ActExpr::Seq(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn act_primary(&mut self) -> PResult<ActExpr> {
        if *self.peek() == Tok::LParen {
            self.bump();
            let a = self.act()?;
            self.expect(Tok::RParen)?;
            return Ok(a);
        }
        let act = self.name("action name")?;
        self.expect(Tok::LParen)?;
        let actor = match self.peek().clone() {
            Tok::Var(v) => {
                self.bump();
                Term::Var(v)
            }
            _ => Term::Const(self.name("actor")?),
        };
        let mut args = Vec::new();
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.arg()?);
        }
        self.expect(Tok::RParen)?;
        Ok(ActExpr::Atomic { act, actor, args })
    }

    fn arg(&mut self) -> PResult<Arg> {
        Ok(match self.implies()? {
            Node::T(Term::App(n, args)) => Arg::Formula(Formula::Atom(n, args)),
            Node::T(t) => Arg::Term(t),
            Node::F(Formula::Atom(n, args)) if args.is_empty() => Arg::Term(Term::Const(n)),
            Node::F(f) => Arg::Formula(f),
        })
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    let mut p = Parser::new(text)?;
    let f = p.formula()?;
    p.expect_eof()?;
    Ok(f)
}

pub fn parse_term(text: &str) -> Result<Term, SyntaxError> {
    let mut p = Parser::new(text)?;
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}

pub fn parse_act(text: &str) -> Result<ActExpr, SyntaxError> {
    let mut p = Parser::new(text)?;
    let a = p.act()?;
    p.expect_eof()?;
    Ok(a)
}
