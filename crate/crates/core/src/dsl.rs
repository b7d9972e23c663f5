//! Text syntax for sequences, unions, piecewise functions, prefixes and
//! generator sets.
//!
//! ```text
//! seq     := "seq" "{" entry (";" entry)* [";"] "}"
//! entry   := family "x" count
//! family  := NAT | "aleph" NAT | "ap" "(" NAT "," NAT ")"
//! count   := NAT | "inf"
//!
//! union   := "union" "{" comp (";" comp)* [";"] "}"
//! comp    := kind "x" count
//! kind    := "full" "(" card ")" | "kgraph" "(" card ")" | "ordinal" "(" card ")"
//!          | "chain" "(" NAME "," card ")" | "a2chain" "(" card ")"
//! card    := family
//!
//! pieces  := "pieces" "{" piece (";" piece)* [";"] "}"
//! piece   := domain "->" rule
//! domain  := "ap" "(" NAT "," NAT ")" | "{" NAT ("," NAT)* "}"
//! rule    := "const" NAT | "affine" "(" NAT "," NAT ")"
//!
//! prefix  := "prefix" "{" [NAT "->" NAT (";" NAT "->" NAT)* [";"]] "}"
//! genset  := "{" [NAT ("," NAT)*] "}"
//! ```
//!
//! Whitespace is insignificant and `#` comments run to the end of the line.
//! Numbers above 2⁶³ are rejected.

use std::collections::BTreeMap;

use crate::baire::{BaireFunc, Domain, Piece, PieceRule};
use crate::error::{Error, Result};
use crate::semigroup::GeneratorSet;
use crate::sequence::{Cardinal, CardinalSpec, Count, Entry, ValueFamily};
use crate::structures::{ComponentKind, UnionComponent, UnionSpec};

const MAX_NAT: u64 = 1 << 63;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Nat(u64),
    Word(String),
    Sym(&'static str),
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Nat(n) => format!("number {n}"),
        Tok::Word(w) => format!("`{w}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::End => "end of input".into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let advance = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            advance(1, &mut i, &mut col);
        } else if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i, &mut col);
            }
        } else if c.is_ascii_digit() {
            let mut n: u64 = 0;
            while i < chars.len() && chars[i].is_ascii_digit() {
                n = n
                    .checked_mul(10)
                    .and_then(|n| n.checked_add(chars[i].to_digit(10).unwrap() as u64))
                    .filter(|&n| n <= MAX_NAT)
                    .ok_or(Error::Overflow)?;
                advance(1, &mut i, &mut col);
            }
            out.push(Token {
                tok: Tok::Nat(n),
                line: l0,
                col: c0,
            });
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() {
                let d = chars[i];
                let arrow = d == '-' && chars.get(i + 1) == Some(&'>');
                if !(d.is_alphanumeric() || d == '_' || d == '.' || (d == '-' && !arrow)) {
                    break;
                }
                advance(1, &mut i, &mut col);
            }
            out.push(Token {
                tok: Tok::Word(chars[start..i].iter().collect()),
                line: l0,
                col: c0,
            });
        } else {
            let sym = match c {
                '{' => "{",
                '}' => "}",
                '(' => "(",
                ')' => ")",
                ';' => ";",
                ',' => ",",
                '[' => "[",
                ']' => "]",
                '-' if chars.get(i + 1) == Some(&'>') => "->",
                _ => {
                    return Err(Error::Parse {
                        line,
                        col,
                        msg: format!("unexpected character `{c}`"),
                    })
                }
            };
            advance(sym.len(), &mut i, &mut col);
            out.push(Token {
                tok: Tok::Sym(sym),
                line: l0,
                col: c0,
            });
        }
    }
    out.push(Token {
        tok: Tok::End,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Self {
            toks: lex(text)?,
            pos: 0,
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, t: &Token, expected: &str) -> Result<T> {
        Err(Error::Parse {
            line: t.line,
            col: t.col,
            msg: format!("expected {expected}, found {}", describe(&t.tok)),
        })
    }

    fn sym(&mut self, s: &'static str) -> Result<()> {
        let t = self.next();
        if t.tok == Tok::Sym(s) {
            Ok(())
        } else {
            self.fail(&t, &format!("`{s}`"))
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Sym(x) if *x == s)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(&self.peek().tok, Tok::Word(x) if x == w)
    }

    fn word(&mut self, w: &str) -> Result<()> {
        let t = self.next();
        match &t.tok {
            Tok::Word(x) if x == w => Ok(()),
            _ => self.fail(&t, &format!("`{w}`")),
        }
    }

    fn name(&mut self) -> Result<String> {
        let t = self.next();
        match t.tok {
            Tok::Word(w) => Ok(w),
            Tok::Nat(n) => Ok(n.to_string()),
            _ => self.fail(&t, "a name"),
        }
    }

    fn nat(&mut self) -> Result<u64> {
        let t = self.next();
        match t.tok {
            Tok::Nat(n) => Ok(n),
            _ => self.fail(&t, "a number"),
        }
    }

    fn positive(&mut self) -> Result<u64> {
        let t = self.peek().clone();
        match self.nat()? {
            0 => Err(Error::ZeroValue {
                line: t.line,
                col: t.col,
            }),
            n => Ok(n),
        }
    }

    fn end(&mut self) -> Result<()> {
        let t = self.next();
        if t.tok == Tok::End {
            Ok(())
        } else {
            self.fail(&t, "end of input")
        }
    }

    /// `item (";" item)* [";"]` up to the closing brace.
    fn block<T>(
        &mut self,
        allow_empty: bool,
        mut item: impl FnMut(&mut Self) -> Result<T>,
    ) -> Result<Vec<T>> {
        self.sym("{")?;
        let mut out = Vec::new();
        if allow_empty && self.is_sym("}") {
            self.next();
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.is_sym(";") {
                self.next();
                if self.is_sym("}") {
                    self.next();
                    return Ok(out);
                }
            } else {
                self.sym("}")?;
                return Ok(out);
            }
        }
    }

    fn pair(&mut self, first_positive: bool) -> Result<(u64, u64)> {
        self.sym("(")?;
        let a = if first_positive {
            self.positive()?
        } else {
            self.nat()?
        };
        self.sym(",")?;
        let b = self.positive()?;
        self.sym(")")?;
        Ok((a, b))
    }

    fn family(&mut self) -> Result<ValueFamily> {
        if self.is_word("aleph") {
            self.next();
            let t = self.peek().clone();
            let k = self.nat()?;
            let k = u32::try_from(k).map_err(|_| Error::Parse {
                line: t.line,
                col: t.col,
                msg: "aleph index too large".into(),
            })?;
            return Ok(ValueFamily::Single(Cardinal::Aleph(k)));
        }
        if self.is_word("ap") {
            self.next();
            let (first, step) = self.pair(true)?;
            return Ok(ValueFamily::Ap { first, step });
        }
        if matches!(self.peek().tok, Tok::Nat(_)) {
            return Ok(ValueFamily::Single(Cardinal::Fin(self.positive()?)));
        }
        let t = self.peek().clone();
        self.fail(&t, "a value (`NAT`, `aleph NAT` or `ap(a,b)`)")
    }

    fn count(&mut self) -> Result<Count> {
        if self.is_word("inf") {
            self.next();
            return Ok(Count::Inf);
        }
        Ok(Count::Fin(self.positive()?))
    }

    fn kind(&mut self) -> Result<ComponentKind> {
        let t = self.next();
        let Tok::Word(w) = &t.tok else {
            return self.fail(&t, "a component kind");
        };
        let w = w.clone();
        self.sym("(")?;
        let kind = match w.as_str() {
            "full" => ComponentKind::FullRelation {
                size: self.family()?,
            },
            "kgraph" => ComponentKind::CompleteGraph {
                size: self.family()?,
            },
            "ordinal" => ComponentKind::Ordinal {
                size: self.family()?,
            },
            "a2chain" => ComponentKind::AntichainPlusChain {
                chain: self.family()?,
            },
            "chain" => {
                let tag = self.name()?;
                self.sym(",")?;
                ComponentKind::LinearOrder {
                    tag,
                    size: self.family()?,
                }
            }
            _ => return self.fail(&t, "one of `full`, `kgraph`, `ordinal`, `chain`, `a2chain`"),
        };
        self.sym(")")?;
        kind.validate()?;
        Ok(kind)
    }

    fn domain(&mut self) -> Result<Domain> {
        if self.is_word("ap") {
            self.next();
            let (first, step) = self.pair(false)?;
            return Ok(Domain::Ap { first, step });
        }
        let t = self.peek().clone();
        let mut idx = Vec::new();
        self.sym("{")?;
        loop {
            idx.push(self.nat()?);
            if self.is_sym(",") {
                self.next();
            } else {
                self.sym("}")?;
                break;
            }
        }
        let domain = Domain::finite(idx.iter().copied());
        if matches!(&domain, Domain::Finite(v) if v.len() != idx.len()) {
            return Err(Error::Parse {
                line: t.line,
                col: t.col,
                msg: "repeated index".into(),
            });
        }
        Ok(domain)
    }

    fn rule(&mut self) -> Result<PieceRule> {
        if self.is_word("const") {
            self.next();
            return Ok(PieceRule::Const(self.positive()?));
        }
        let t = self.peek().clone();
        if self.is_word("affine") {
            self.next();
            self.sym("(")?;
            let a = self.positive()?;
            self.sym(",")?;
            let b = self.nat()?;
            self.sym(")")?;
            return Ok(PieceRule::Affine { a, b });
        }
        self.fail(&t, "`const` or `affine`")
    }
}

/// Parses and normalizes a sequence description.
pub fn parse_seq(text: &str) -> Result<CardinalSpec> {
    parse_seq_raw(text)?.normalize()
}

/// Parses a sequence description keeping the entries as written.
pub fn parse_seq_raw(text: &str) -> Result<CardinalSpec> {
    let mut p = Parser::new(text)?;
    p.word("seq")?;
    let entries = p.block(false, |p| {
        let family = p.family()?;
        p.word("x")?;
        Ok(Entry::new(family, p.count()?))
    })?;
    p.end()?;
    CardinalSpec::new(entries)
}

pub fn parse_union(text: &str) -> Result<UnionSpec> {
    let mut p = Parser::new(text)?;
    p.word("union")?;
    let comps = p.block(false, |p| {
        let kind = p.kind()?;
        p.word("x")?;
        Ok(UnionComponent {
            kind,
            mult: p.count()?,
        })
    })?;
    p.end()?;
    UnionSpec::new(comps)
}

pub fn parse_pieces(text: &str) -> Result<BaireFunc> {
    let mut p = Parser::new(text)?;
    p.word("pieces")?;
    let pieces = p.block(false, |p| {
        let domain = p.domain()?;
        p.sym("->")?;
        Ok(Piece::new(domain, p.rule()?))
    })?;
    p.end()?;
    BaireFunc::new(pieces)
}

pub fn parse_prefix(text: &str) -> Result<BTreeMap<u64, u64>> {
    let mut p = Parser::new(text)?;
    p.word("prefix")?;
    let pairs = p.block(true, |p| {
        let t = p.peek().clone();
        let i = p.nat()?;
        p.sym("->")?;
        Ok((t, i, p.positive()?))
    })?;
    p.end()?;
    let mut out = BTreeMap::new();
    for (t, i, v) in pairs {
        if out.insert(i, v).is_some() {
            return Err(Error::Parse {
                line: t.line,
                col: t.col,
                msg: format!("index {i} assigned twice"),
            });
        }
    }
    Ok(out)
}

pub fn parse_generators(text: &str) -> Result<GeneratorSet> {
    let mut p = Parser::new(text)?;
    let mut gens = Vec::new();
    p.sym("{")?;
    if p.is_sym("}") {
        p.next();
    } else {
        loop {
            gens.push(p.positive()?);
            if p.is_sym(",") {
                p.next();
            } else {
                p.sym("}")?;
                break;
            }
        }
    }
    p.end()?;
    GeneratorSet::new(gens)
}

/// A comma-separated list of naturals, optionally in braces, brackets or
/// parens.
pub fn parse_nat_list(text: &str) -> Result<Vec<u64>> {
    let mut p = Parser::new(text)?;
    let close = [("(", ")"), ("[", "]"), ("{", "}")]
        .into_iter()
        .find(|(open, _)| p.is_sym(open))
        .map(|(_, close)| close);
    if close.is_some() {
        p.next();
    }
    let mut out = Vec::new();
    let done = |p: &Parser| match close {
        Some(c) => p.is_sym(c),
        None => matches!(p.peek().tok, Tok::End),
    };
    if !done(&p) {
        loop {
            out.push(p.positive()?);
            if p.is_sym(",") {
                p.next();
            } else {
                break;
            }
        }
    }
    if let Some(c) = close {
        p.sym(c)?;
    }
    p.end()?;
    Ok(out)
}

/// `ap(a,b)` with `a, b ≥ 1`.
pub fn parse_ap(text: &str) -> Result<(u64, u64)> {
    let mut p = Parser::new(text)?;
    p.word("ap")?;
    let pair = p.pair(true)?;
    p.end()?;
    Ok(pair)
}
