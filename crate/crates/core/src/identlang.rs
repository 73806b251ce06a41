//! A small equational language for identity systems.
//!
//! ```text
//! ops: t/3, f/2
//! idempotent: t
//! t(y,x,x) = x      # one identity per line, or separated by `;`
//! ```
//!
//! Identifiers that are not declared operation symbols are variables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::freecons::FiniteAlgebra;
use crate::homsearch::OperationTable;
use crate::semilat::{fmt_coords, Coords};
use crate::structures::advance;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn app(symbol: &str, args: Vec<Term>) -> Term {
        Term::App(symbol.to_string(), args)
    }

    /// `symbol(v1, ..., vn)` with variable arguments.
    pub fn flat(symbol: &str, vars: &[&str]) -> Term {
        Term::app(symbol, vars.iter().map(|v| Term::var(v)).collect())
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Term::Var(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    fn is_flat(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::App(_, args) => args.iter().all(|a| matches!(a, Term::Var(_))),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::App(s, args) => {
                write!(f, "{s}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Identity {
    pub lhs: Term,
    pub rhs: Term,
}

impl Identity {
    pub fn new(lhs: Term, rhs: Term) -> Self {
        Identity { lhs, rhs }
    }

    /// Variables in order of first occurrence, left side first.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.lhs.collect_vars(&mut out);
        self.rhs.collect_vars(&mut out);
        out
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermSystem {
    pub declarations: BTreeMap<String, usize>,
    pub identities: Vec<Identity>,
    pub idempotent: BTreeSet<String>,
}

impl TermSystem {
    /// Checks that every application uses a declared symbol with the right
    /// number of arguments and that idempotent symbols are declared.
    pub fn validate(&self) -> Result<()> {
        fn check(t: &Term, decls: &BTreeMap<String, usize>) -> Result<()> {
            if let Term::App(s, args) = t {
                match decls.get(s) {
                    None => return Err(Error::Ident(format!("undeclared symbol `{s}`"))),
                    Some(&n) if n != args.len() => {
                        return Err(Error::Ident(format!(
                            "arity mismatch: `{s}` expects {n} arguments, found {}",
                            args.len()
                        )))
                    }
                    _ => {}
                }
                for a in args {
                    check(a, decls)?;
                }
            }
            Ok(())
        }
        for (s, &n) in &self.declarations {
            if n == 0 {
                return Err(Error::Ident(format!("symbol `{s}` has arity 0")));
            }
        }
        for s in &self.idempotent {
            if !self.declarations.contains_key(s) {
                return Err(Error::Ident(format!("idempotent symbol `{s}` is not declared")));
            }
        }
        for i in &self.identities {
            check(&i.lhs, &self.declarations)?;
            check(&i.rhs, &self.declarations)?;
        }
        Ok(())
    }
}

impl fmt::Display for TermSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let decls: Vec<String> = self.declarations.iter().map(|(s, n)| format!("{s}/{n}")).collect();
        writeln!(f, "ops: {}", decls.join(", "))?;
        if !self.idempotent.is_empty() {
            let names: Vec<&str> = self.idempotent.iter().map(String::as_str).collect();
            writeln!(f, "idempotent: {}", names.join(", "))?;
        }
        for i in &self.identities {
            writeln!(f, "{i}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(usize),
    LParen,
    RParen,
    Comma,
    Eq,
    Colon,
    Slash,
    Sep,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<(Vec<Token>, (usize, usize)), ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (l, k) = (line, col);
        let mut push = |tok| out.push(Token { tok, line: l, col: k });
        if c == '\n' || c == ';' {
            push(Tok::Sep);
            chars.next();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            continue;
        }
        if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                chars.next();
            }
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c.is_ascii_alphanumeric() || c == '_' {
            let mut word = String::new();
            while let Some(&c) = chars.peek().filter(|c| c.is_ascii_alphanumeric() || **c == '_') {
                word.push(c);
                chars.next();
                col += 1;
            }
            if word.chars().all(|c| c.is_ascii_digit()) {
                let n = word.parse().map_err(|_| ParseError {
                    line: l,
                    col: k,
                    msg: format!("number `{word}` is too large"),
                })?;
                push(Tok::Num(n));
            } else if word.starts_with(|c: char| c.is_ascii_digit()) {
                return Err(ParseError {
                    line: l,
                    col: k,
                    msg: format!("identifier `{word}` starts with a digit"),
                });
            } else {
                push(Tok::Ident(word));
            }
            continue;
        }
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '=' => Tok::Eq,
            ':' => Tok::Colon,
            '/' => Tok::Slash,
            _ => {
                return Err(ParseError {
                    line,
                    col,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        };
        push(tok);
        chars.next();
        col += 1;
    }
    Ok((out, (line, col)))
}

struct Stmt<'a> {
    toks: &'a [Token],
    pos: usize,
    end: (usize, usize),
}

impl<'a> Stmt<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.end, |t| (t.line, t.col))
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn next(&mut self) -> Option<&'a Tok> {
        let t = self.peek();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            _ => self.err(format!("expected {what}")),
        }
    }

    fn done(&self) -> Result<(), ParseError> {
        if self.pos < self.toks.len() {
            return self.err("unexpected trailing input");
        }
        Ok(())
    }

    fn is_header(&self, word: &str) -> bool {
        matches!(self.toks.first(), Some(Token { tok: Tok::Ident(w), .. }) if w == word)
            && matches!(self.toks.get(1), Some(Token { tok: Tok::Colon, .. }))
    }

    fn term(&mut self, decls: &BTreeMap<String, usize>) -> Result<Term, ParseError> {
        let at = self.pos;
        let name = self.ident("a term")?;
        if self.peek() != Some(&Tok::LParen) {
            if decls.contains_key(&name) {
                self.pos = at;
                return self.err(format!("symbol `{name}` used without arguments"));
            }
            return Ok(Term::Var(name));
        }
        let Some(&arity) = decls.get(&name) else {
            self.pos = at;
            return self.err(format!("undeclared symbol `{name}`"));
        };
        self.pos += 1;
        let mut args = vec![self.term(decls)?];
        loop {
            match self.next() {
                Some(Tok::Comma) => args.push(self.term(decls)?),
                Some(Tok::RParen) => break,
                _ => {
                    self.pos -= 1;
                    return self.err("expected `,` or `)`");
                }
            }
        }
        if args.len() != arity {
            self.pos = at;
            return self.err(format!(
                "arity mismatch: `{name}` expects {arity} arguments, found {}",
                args.len()
            ));
        }
        Ok(Term::App(name, args))
    }
}

pub fn parse(text: &str) -> Result<TermSystem, ParseError> {
    let (tokens, eof) = lex(text)?;
    let mut stmts = Vec::new();
    for chunk in tokens.split(|t| t.tok == Tok::Sep) {
        if !chunk.is_empty() {
            let end = tokens
                .iter()
                .find(|t| {
                    t.tok == Tok::Sep && (t.line, t.col) > (chunk[chunk.len() - 1].line, chunk[chunk.len() - 1].col)
                })
                .map_or(eof, |t| (t.line, t.col));
            stmts.push(Stmt {
                toks: chunk,
                pos: 0,
                end,
            });
        }
    }
    let mut stmts = stmts.into_iter();
    let mut sys = TermSystem::default();
    match stmts.next() {
        Some(mut s) if s.is_header("ops") => {
            s.pos = 2;
            if s.peek().is_some() {
                loop {
                    let at = s.pos;
                    let name = s.ident("an operation symbol")?;
                    s.expect(Tok::Slash, "`/`")?;
                    let arity = match s.next() {
                        Some(Tok::Num(n)) if *n > 0 => *n,
                        _ => {
                            s.pos -= 1;
                            return s.err("expected a positive arity");
                        }
                    };
                    if sys.declarations.insert(name.clone(), arity).is_some() {
                        s.pos = at;
                        return s.err(format!("symbol `{name}` declared twice"));
                    }
                    if s.peek().is_none() {
                        break;
                    }
                    s.expect(Tok::Comma, "`,`")?;
                }
            }
        }
        Some(s) => return s.err("expected `ops:` header"),
        None => {
            return Err(ParseError {
                line: eof.0,
                col: eof.1,
                msg: "expected `ops:` header".into(),
            })
        }
    }
    for mut s in stmts {
        if s.is_header("idempotent") {
            s.pos = 2;
            loop {
                let at = s.pos;
                let name = s.ident("an operation symbol")?;
                if !sys.declarations.contains_key(&name) {
                    s.pos = at;
                    return s.err(format!("undeclared symbol `{name}`"));
                }
                sys.idempotent.insert(name);
                if s.peek().is_none() {
                    break;
                }
                s.expect(Tok::Comma, "`,`")?;
            }
            continue;
        }
        let lhs = s.term(&sys.declarations)?;
        s.expect(Tok::Eq, "`=`")?;
        let rhs = s.term(&sys.declarations)?;
        s.done()?;
        sys.identities.push(Identity { lhs, rhs });
    }
    Ok(sys)
}

/// Each side is a variable or one application to variables.
pub fn is_linear(i: &Identity) -> bool {
    i.lhs.is_flat() && i.rhs.is_flat()
}

/// The linear identities of `sys` in at most two variables.
pub fn linear_two_variable_fragment(sys: &TermSystem) -> TermSystem {
    TermSystem {
        declarations: sys.declarations.clone(),
        identities: sys
            .identities
            .iter()
            .filter(|i| is_linear(i) && i.variables().len() <= 2)
            .cloned()
            .collect(),
        idempotent: sys.idempotent.clone(),
    }
}

const MAX_SIDES: usize = 1 << 20;

/// Sides of linear identities in the variables `x`, `y`: ids 0 and 1 are
/// the variables, then one block of `2^n` per symbol, indexed by the mask of
/// positions holding `y`.
struct Sides {
    symbols: Vec<(String, usize)>,
    offsets: Vec<usize>,
    total: usize,
}

impl Sides {
    fn new(sys: &TermSystem) -> Result<Self> {
        let mut offsets = Vec::new();
        let mut total = 2usize;
        for (s, &n) in &sys.declarations {
            offsets.push(total);
            let block = u32::try_from(n)
                .ok()
                .and_then(|n| 1usize.checked_shl(n))
                .filter(|&b| total + b <= MAX_SIDES)
                .ok_or_else(|| Error::SizeBound {
                    what: format!("identity sides for `{s}`"),
                    needed: format!("2^{n}"),
                    bound: MAX_SIDES,
                })?;
            total += block;
        }
        Ok(Sides {
            symbols: sys.declarations.iter().map(|(s, &n)| (s.clone(), n)).collect(),
            offsets,
            total,
        })
    }

    fn symbol_index(&self, s: &str) -> usize {
        self.symbols
            .binary_search_by(|(t, _)| t.as_str().cmp(s))
            .expect("declared")
    }

    fn app(&self, sym: usize, mask: usize) -> usize {
        self.offsets[sym] + mask
    }

    /// `(symbol index, mask)` or `None` for a variable.
    fn decode(&self, id: usize) -> Option<(usize, usize)> {
        if id < 2 {
            return None;
        }
        let sym = self.offsets.partition_point(|&o| o <= id) - 1;
        Some((sym, id - self.offsets[sym]))
    }

    fn encode(&self, t: &Term, rename: &dyn Fn(&str) -> usize) -> usize {
        match t {
            Term::Var(v) => rename(v),
            Term::App(s, args) => {
                let sym = self.symbol_index(s);
                let mask = args.iter().enumerate().fold(0, |m, (i, a)| match a {
                    Term::Var(v) => m | (rename(v) << i),
                    Term::App(..) => unreachable!("linear"),
                });
                self.app(sym, mask)
            }
        }
    }

    fn term(&self, id: usize) -> Term {
        let name = |bit: usize| if bit == 0 { "x" } else { "y" };
        match self.decode(id) {
            None => Term::var(name(id)),
            Some((sym, mask)) => {
                let (s, n) = &self.symbols[sym];
                Term::app(s, (0..*n).map(|i| Term::var(name((mask >> i) & 1))).collect())
            }
        }
    }

    /// 0: swap x and y; 1: y ↦ x; 2: x ↦ y.
    fn substitute(&self, id: usize, kind: usize) -> usize {
        match self.decode(id) {
            None => [1 - id, 0, 1][kind],
            Some((sym, mask)) => {
                let full = (1usize << self.symbols[sym].1) - 1;
                self.app(sym, [!mask & full, 0, full][kind])
            }
        }
    }
}

/// The equivalence on sides generated by a linear two-variable system.
struct Saturation {
    sides: Sides,
    class: Vec<usize>,
}

impl Saturation {
    fn new(sys: &TermSystem) -> Result<Self> {
        sys.validate()?;
        let sides = Sides::new(sys)?;
        let mut uf = UnionFind::<usize>::new(sides.total);
        for i in &sys.identities {
            if !is_linear(i) {
                return Err(Error::Ident(format!("identity `{i}` is not linear")));
            }
            let vars = i.variables();
            if vars.len() > 2 {
                return Err(Error::Ident(format!("identity `{i}` has more than two variables")));
            }
            let rename = |v: &str| vars.iter().position(|w| *w == v).expect("collected");
            uf.union(sides.encode(&i.lhs, &rename), sides.encode(&i.rhs, &rename));
        }
        for s in &sys.idempotent {
            uf.union(sides.app(sides.symbol_index(s), 0), 0);
        }
        loop {
            let mut changed = false;
            for id in 0..sides.total {
                let root = uf.find(id);
                if root == id {
                    continue;
                }
                for kind in 0..3 {
                    changed |= uf.union(sides.substitute(id, kind), sides.substitute(root, kind));
                }
            }
            if !changed {
                break;
            }
        }
        let class = (0..sides.total).map(|i| uf.find(i)).collect();
        Ok(Saturation { sides, class })
    }

    fn same(&self, a: usize, b: usize) -> bool {
        self.class[a] == self.class[b]
    }

    fn members(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut m: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (id, &c) in self.class.iter().enumerate() {
            m.entry(c).or_default().push(id);
        }
        m
    }
}

/// Closes a linear system in at most two variables under renaming, swapping
/// the variables, symmetry, transitivity, identifying the variables, and
/// idempotency of declared symbols. The result lists every derived identity
/// `s = t` with `s ≠ t` over the variables `x`, `y`, sorted.
pub fn saturate(sys: &TermSystem) -> Result<TermSystem> {
    let sat = Saturation::new(sys)?;
    let mut identities = Vec::new();
    for members in sat.members().values() {
        for &a in members {
            for &b in members {
                if a != b {
                    identities.push(Identity::new(sat.sides.term(a), sat.sides.term(b)));
                }
            }
        }
    }
    identities.sort();
    Ok(TermSystem {
        declarations: sys.declarations.clone(),
        identities,
        idempotent: sys.idempotent.clone(),
    })
}

/// All non-empty subsets of `{1..n}`, ordered lexicographically as sorted
/// sequences.
pub fn nonempty_subsets(n: usize) -> Vec<Coords> {
    let mut out: Vec<Coords> = (1usize..1 << n)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).map(|i| i + 1).collect())
        .collect();
    out.sort();
    out
}

fn mask_of(c: &Coords) -> usize {
    c.iter().fold(0, |m, &i| m | 1 << (i - 1))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HmCheck {
    /// One witness `t(u) = t(v)` per non-empty coordinate set.
    Pass(BTreeMap<Coords, Identity>),
    Fail {
        missing: Coords,
    },
}

impl HmCheck {
    pub fn passed(&self) -> bool {
        matches!(self, HmCheck::Pass(_))
    }
}

const MAX_HM_ARITY: usize = 10;

/// For every non-empty `I ⊆ {1..n}`, looks in the saturation of `sys` for
/// `t(u) = t(v)` with `u_i = x` for all `i ∈ I` and `v_i = y` for some
/// `i ∈ I`. Reports the least such identity per `I`.
pub fn hm_term_check(sys: &TermSystem, t: &str) -> Result<HmCheck> {
    let n = *sys
        .declarations
        .get(t)
        .ok_or_else(|| Error::Ident(format!("undeclared symbol `{t}`")))?;
    if n > MAX_HM_ARITY {
        return Err(Error::SizeBound {
            what: format!("subset scan for `{t}`"),
            needed: format!("arity {n}"),
            bound: MAX_HM_ARITY,
        });
    }
    let sat = Saturation::new(sys)?;
    let sym = sat.sides.symbol_index(t);
    if !sat.same(sat.sides.app(sym, 0), 0) {
        return Err(Error::NotIdempotent(t.to_string()));
    }
    let mut witnesses = BTreeMap::new();
    for set in nonempty_subsets(n) {
        let m = mask_of(&set);
        let mut best: Option<Identity> = None;
        for u in (0..1usize << n).filter(|u| u & m == 0) {
            for v in (0..1usize << n).filter(|v| v & m != 0) {
                let (a, b) = (sat.sides.app(sym, u), sat.sides.app(sym, v));
                if sat.same(a, b) {
                    let cand = Identity::new(sat.sides.term(a), sat.sides.term(b));
                    if best.as_ref().is_none_or(|w| cand < *w) {
                        best = Some(cand);
                    }
                }
            }
        }
        match best {
            Some(w) => {
                witnesses.insert(set, w);
            }
            None => return Ok(HmCheck::Fail { missing: set }),
        }
    }
    Ok(HmCheck::Pass(witnesses))
}

/// An assignment of a non-empty coordinate set to every symbol, read as the
/// semilattice term `⋀_{i ∈ σ(f)} x_i`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SlLabeling {
    pub sigma: BTreeMap<String, Coords>,
}

impl SlLabeling {
    pub fn validate(&self, declarations: &BTreeMap<String, usize>) -> Result<()> {
        for (s, c) in &self.sigma {
            let n = declarations
                .get(s)
                .ok_or_else(|| Error::Ident(format!("labeling names undeclared symbol `{s}`")))?;
            if c.is_empty() || c.iter().any(|&i| i == 0 || i > *n) {
                return Err(Error::Ident(format!(
                    "label {} of `{s}` is not within 1..{n}",
                    fmt_coords(c)
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for SlLabeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .sigma
            .iter()
            .map(|(s, c)| format!("{s}:{}", fmt_coords(c)))
            .collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// Variables of the semilattice term `t` becomes under `sigma`.
pub fn varset<'a>(t: &'a Term, sigma: &SlLabeling) -> BTreeSet<&'a str> {
    match t {
        Term::Var(v) => std::iter::once(v.as_str()).collect(),
        Term::App(s, args) => {
            let coords = &sigma.sigma[s];
            coords.iter().flat_map(|&i| varset(&args[i - 1], sigma)).collect()
        }
    }
}

pub fn satisfies(sigma: &SlLabeling, i: &Identity) -> bool {
    varset(&i.lhs, sigma) == varset(&i.rhs, sigma)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refutation {
    pub labeling: SlLabeling,
    /// Index into the system's identity list.
    pub index: usize,
    pub identity: Identity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlVerdict {
    Labeling(SlLabeling),
    /// One violated identity for every labeling, in labeling order.
    Unsat(Vec<Refutation>),
}

impl SlVerdict {
    pub fn is_unsat(&self) -> bool {
        matches!(self, SlVerdict::Unsat(_))
    }
}

pub const MAX_LABELINGS: usize = 1 << 20;

/// All labelings of `declarations` in lexicographic order: each symbol's
/// subsets ordered as sorted sequences, symbols by name, first symbol most
/// significant.
pub fn labelings(declarations: &BTreeMap<String, usize>) -> Result<Vec<SlLabeling>> {
    let choices: Vec<(String, Vec<Coords>)> = declarations
        .iter()
        .map(|(s, &n)| {
            if n > 20 {
                return Err(Error::SizeBound {
                    what: "labelings".into(),
                    needed: format!("2^{n} subsets for `{s}`"),
                    bound: MAX_LABELINGS,
                });
            }
            Ok((s.clone(), nonempty_subsets(n)))
        })
        .collect::<Result<_>>()?;
    let total = choices
        .iter()
        .try_fold(1usize, |acc, (_, c)| acc.checked_mul(c.len()))
        .filter(|&t| t <= MAX_LABELINGS)
        .ok_or_else(|| Error::SizeBound {
            what: "labelings".into(),
            needed: "more".into(),
            bound: MAX_LABELINGS,
        })?;
    let mut out = Vec::with_capacity(total);
    let mut pick = vec![0; choices.len()];
    loop {
        out.push(SlLabeling {
            sigma: choices
                .iter()
                .zip(&pick)
                .map(|((s, c), &k)| (s.clone(), c[k].clone()))
                .collect(),
        });
        if !advance(&mut pick, |k| choices[k].1.len()) {
            break;
        }
    }
    Ok(out)
}

/// Finds the first labeling under which every identity of `sys` holds in
/// semilattices, or refutes every labeling.
pub fn sl_interp_search(sys: &TermSystem) -> Result<SlVerdict> {
    sys.validate()?;
    let mut refutations = Vec::new();
    for labeling in labelings(&sys.declarations)? {
        match sys.identities.iter().position(|i| !satisfies(&labeling, i)) {
            None => return Ok(SlVerdict::Labeling(labeling)),
            Some(index) => refutations.push(Refutation {
                identity: sys.identities[index].clone(),
                labeling,
                index,
            }),
        }
    }
    Ok(SlVerdict::Unsat(refutations))
}

fn eval(t: &Term, vars: &[&str], values: &[usize], interp: &BTreeMap<String, OperationTable>) -> usize {
    match t {
        Term::Var(v) => values[vars.iter().position(|w| w == v).expect("collected")],
        Term::App(s, args) => {
            let a: Vec<usize> = args.iter().map(|a| eval(a, vars, values, interp)).collect();
            interp[s].apply(&a)
        }
    }
}

fn check_interp(size: usize, i: &Identity, interp: &BTreeMap<String, OperationTable>) -> Result<()> {
    fn walk(t: &Term, size: usize, interp: &BTreeMap<String, OperationTable>) -> Result<()> {
        if let Term::App(s, args) = t {
            let table = interp
                .get(s)
                .ok_or_else(|| Error::Ident(format!("no interpretation for `{s}`")))?;
            if table.arity != args.len() || table.size != size {
                return Err(Error::Ident(format!(
                    "arity mismatch: `{s}` applied to {} arguments, table has arity {} over {} elements",
                    args.len(),
                    table.arity,
                    table.size
                )));
            }
            for a in args {
                walk(a, size, interp)?;
            }
        }
        Ok(())
    }
    walk(&i.lhs, size, interp)?;
    walk(&i.rhs, size, interp)
}

/// An assignment of elements to the identity's variables (in order of first
/// occurrence) on which the two sides differ.
pub fn counterexample(
    a: &FiniteAlgebra,
    i: &Identity,
    interp: &BTreeMap<String, OperationTable>,
) -> Result<Option<Vec<usize>>> {
    check_interp(a.size(), i, interp)?;
    let vars = i.variables();
    let mut values = vec![0; vars.len()];
    if a.size() == 0 {
        return Ok(None);
    }
    loop {
        if eval(&i.lhs, &vars, &values, interp) != eval(&i.rhs, &vars, &values, interp) {
            return Ok(Some(values));
        }
        if !advance(&mut values, |_| a.size()) {
            return Ok(None);
        }
    }
}

pub fn holds_in(a: &FiniteAlgebra, i: &Identity, interp: &BTreeMap<String, OperationTable>) -> Result<bool> {
    Ok(counterexample(a, i, interp)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MAJORITY: &str = "ops: t/3\nidempotent: t\nt(y,x,x) = x\nt(x,y,x) = x\nt(x,x,y) = x\n";
    const MALTSEV: &str = "ops: p/3\nidempotent: p\np(x,y,y) = x; p(y,y,x) = x";
    const SEMILATTICE: &str = "ops: f/2\nf(x,y) = f(y,x)\nf(x,x) = x\nf(f(x,y),z) = f(x,f(y,z))";

    #[test]
    fn parses_examples() {
        let s = parse("ops: t/3 ; t(y,x,x) = x").unwrap();
        assert_eq!(s.declarations["t"], 3);
        assert_eq!(s.identities.len(), 1);
        assert_eq!(s.identities[0].to_string(), "t(y,x,x) = x");
        let s = parse("ops: f/2 ; f(x,y) = f(y,x) ; f(x,x) = x").unwrap();
        assert_eq!(s.identities.len(), 2);
        let e = parse("ops: t/3 ; t(x,y) = x").unwrap_err();
        assert!(e.msg.contains("arity mismatch"), "{e}");
        assert_eq!((e.line, e.col), (1, 12));
    }

    #[test]
    fn parse_errors_have_positions() {
        let e = parse("ops: f/2\n\nf(x, y) = g(x)").unwrap_err();
        assert_eq!((e.line, e.col), (3, 11));
        assert!(e.msg.contains("undeclared"));
        let e = parse("t(x) = x").unwrap_err();
        assert!(e.msg.contains("ops:"));
        let e = parse("ops: f/2\nf(x,y) = ").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse("ops: f/0").unwrap_err();
        assert!(e.msg.contains("positive"));
        let e = parse("ops: f/1\nf = x").unwrap_err();
        assert!(e.msg.contains("without arguments"));
        let e = parse("ops: f/1\nf(x) = x $").unwrap_err();
        assert_eq!((e.line, e.col), (2, 10));
        assert!(parse("ops: f/1, f/2").is_err());
        assert!(parse("ops: f/1\nidempotent: g").is_err());
    }

    #[test]
    fn comments_and_blank_lines() {
        let s = parse("# header\nops: f/1   # unary\n\nf(x) = x # idem\n").unwrap();
        assert_eq!(s.identities.len(), 1);
        assert!(parse("ops:").unwrap().declarations.is_empty());
    }

    #[test]
    fn linearity() {
        let s = parse("ops: t/3\nt(y,x,x) = x\nt(x,x,y) = t(x,y,x)\nt(t(x,x,x),y,y) = x").unwrap();
        let flags: Vec<bool> = s.identities.iter().map(is_linear).collect();
        assert_eq!(flags, [true, true, false]);
    }

    #[test]
    fn saturation_of_majority() {
        let sat = saturate(&parse(MAJORITY).unwrap()).unwrap();
        let lines: BTreeSet<String> = sat.identities.iter().map(ToString::to_string).collect();
        assert!(lines.contains("t(y,x,x) = t(x,y,x)"));
        assert!(lines.contains("t(x,x,x) = t(y,x,x)"));
        // two classes of five sides each
        assert_eq!(sat.identities.len(), 40);
        assert_eq!(saturate(&sat).unwrap(), sat);
    }

    #[test]
    fn saturation_small_cases() {
        let comm = parse("ops: f/2\nf(x,y) = f(y,x)").unwrap();
        let sat = saturate(&comm).unwrap();
        let lines: Vec<String> = sat.identities.iter().map(ToString::to_string).collect();
        assert_eq!(lines, ["f(x,y) = f(y,x)", "f(y,x) = f(x,y)"]);
        let empty = parse("ops:").unwrap();
        assert!(saturate(&empty).unwrap().identities.is_empty());
        assert!(saturate(&parse(SEMILATTICE).unwrap()).is_err());
        assert!(saturate(&parse("ops: f/3\nf(x,y,z) = x").unwrap()).is_err());
    }

    #[test]
    fn hm_checks() {
        let maj = parse(MAJORITY).unwrap();
        let HmCheck::Pass(w) = hm_term_check(&maj, "t").unwrap() else {
            panic!("majority passes");
        };
        assert_eq!(w.len(), 7);
        assert_eq!(w[&Coords::from([1, 2, 3])].to_string(), "t(x,x,x) = t(x,x,y)");

        let mal = parse(MALTSEV).unwrap();
        assert!(hm_term_check(&mal, "p").unwrap().passed());

        let sl = linear_two_variable_fragment(&parse(SEMILATTICE).unwrap());
        assert_eq!(
            hm_term_check(&sl, "f").unwrap(),
            HmCheck::Fail { missing: [1, 2].into() }
        );

        let not_idem = parse("ops: t/3\nt(x,y,y) = t(y,x,x)").unwrap();
        assert!(matches!(hm_term_check(&not_idem, "t"), Err(Error::NotIdempotent(_))));
    }

    #[test]
    fn sl_interpretations() {
        let SlVerdict::Unsat(r) = sl_interp_search(&parse(MAJORITY).unwrap()).unwrap() else {
            panic!("majority is unsat");
        };
        assert_eq!(r.len(), 7);
        assert!(sl_interp_search(&parse(MALTSEV).unwrap()).unwrap().is_unsat());
        let SlVerdict::Labeling(l) = sl_interp_search(&parse(SEMILATTICE).unwrap()).unwrap() else {
            panic!("semilattice is satisfiable");
        };
        assert_eq!(l.sigma["f"], Coords::from([1, 2]));
    }

    #[test]
    fn flattening_under_full_labels() {
        let sys = parse(SEMILATTICE).unwrap();
        let sigma = SlLabeling {
            sigma: [("f".to_string(), Coords::from([1, 2]))].into(),
        };
        let assoc = &sys.identities[2];
        let flat: BTreeSet<&str> = ["x", "y", "z"].into();
        assert_eq!(varset(&assoc.lhs, &sigma), flat);
        assert_eq!(varset(&assoc.rhs, &sigma), flat);
    }

    fn two_element(ops: &[(&str, OperationTable)]) -> (FiniteAlgebra, BTreeMap<String, OperationTable>) {
        let interp: BTreeMap<String, OperationTable> = ops.iter().map(|(s, t)| (s.to_string(), t.clone())).collect();
        (FiniteAlgebra::new(2, interp.clone()).unwrap(), interp)
    }

    #[test]
    fn holds_in_examples() {
        let meet = OperationTable::new(2, 2, vec![0, 0, 0, 1]).unwrap();
        let (a, interp) = two_element(&[("f", meet)]);
        let sys = parse("ops: f/2\nf(x,y) = f(y,x)\nf(x,y) = x").unwrap();
        assert!(holds_in(&a, &sys.identities[0], &interp).unwrap());
        assert!(!holds_in(&a, &sys.identities[1], &interp).unwrap());
        assert_eq!(
            counterexample(&a, &sys.identities[1], &interp).unwrap(),
            Some(vec![1, 0])
        );

        let maj = OperationTable::from_fn(3, 2, |a| usize::from(a.iter().sum::<usize>() >= 2)).unwrap();
        let (a, interp) = two_element(&[("t", maj)]);
        let sys = parse(MAJORITY).unwrap();
        assert!(sys.identities.iter().all(|i| holds_in(&a, i, &interp).unwrap()));

        let (a, interp) = two_element(&[("t", OperationTable::new(1, 2, vec![0, 1]).unwrap())]);
        assert!(holds_in(&a, &sys.identities[0], &interp).is_err());
    }

    #[test]
    fn labeling_order() {
        let decls: BTreeMap<String, usize> = [("f".to_string(), 2), ("g".to_string(), 1)].into();
        let all = labelings(&decls).unwrap();
        let shown: Vec<String> = all.iter().map(ToString::to_string).collect();
        assert_eq!(shown, ["[f:{1} g:{1}]", "[f:{1,2} g:{1}]", "[f:{2} g:{1}]"]);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    fn arb_system() -> impl Strategy<Value = TermSystem> {
        let decls: BTreeMap<String, usize> = [("f".to_string(), 1), ("g".to_string(), 2), ("h".to_string(), 3)].into();
        let leaf = prop::sample::select(vec!["x", "y", "z", "w1"]).prop_map(Term::var);
        let term = leaf.prop_recursive(3, 16, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Term::app("f", vec![a])),
                prop::collection::vec(inner.clone(), 2).prop_map(|a| Term::app("g", a)),
                prop::collection::vec(inner, 3).prop_map(|a| Term::app("h", a)),
            ]
        });
        let identity = (term.clone(), term).prop_map(|(l, r)| Identity::new(l, r));
        (
            prop::collection::vec(identity, 0..5),
            prop::collection::btree_set(prop::sample::select(vec!["f", "g", "h"]), 0..3),
        )
            .prop_map(move |(identities, idem)| TermSystem {
                declarations: decls.clone(),
                identities,
                idempotent: idem.into_iter().map(String::from).collect(),
            })
    }

    fn arb_linear_system() -> impl Strategy<Value = TermSystem> {
        let side = prop_oneof![
            prop::sample::select(vec!["x", "y"]).prop_map(Term::var),
            prop::collection::vec(prop::sample::select(vec!["x", "y"]), 2).prop_map(|v| Term::flat("g", &v)),
            prop::collection::vec(prop::sample::select(vec!["u", "v"]), 3).prop_map(|v| Term::flat("h", &v)),
        ];
        (prop::collection::vec((side.clone(), side), 0..4), prop::bool::ANY).prop_map(|(pairs, idem)| TermSystem {
            declarations: [("g".to_string(), 2), ("h".to_string(), 3)].into(),
            identities: pairs
                .into_iter()
                .map(|(l, r)| Identity::new(l, r))
                .filter(|i| i.variables().len() <= 2)
                .collect(),
            idempotent: if idem {
                ["h".to_string()].into()
            } else {
                BTreeSet::new()
            },
        })
    }

    proptest! {
        #[test]
        fn print_then_parse_round_trips(sys in arb_system()) {
            let text = sys.to_string();
            prop_assert_eq!(parse(&text).unwrap(), sys);
        }

        #[test]
        fn saturation_is_idempotent(sys in arb_linear_system()) {
            let once = saturate(&sys).unwrap();
            prop_assert_eq!(saturate(&once).unwrap(), once);
        }

        #[test]
        fn subset_pass_implies_unsat(sys in arb_linear_system()) {
            let sat = saturate(&sys).unwrap();
            if let Ok(HmCheck::Pass(w)) = hm_term_check(&sat, "h") {
                prop_assert!(sl_interp_search(&sat).unwrap().is_unsat());
                // the witness for I = σ(h) refutes σ directly
                for sigma in labelings(&sat.declarations).unwrap() {
                    prop_assert!(!satisfies(&sigma, &w[&sigma.sigma["h"]]));
                }
            }
        }
    }
}
