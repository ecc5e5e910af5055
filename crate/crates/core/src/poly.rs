//! Sparse multivariate polynomials with arbitrary-precision integer
//! coefficients.
//!
//! A [`Polynomial`] lives in an ambient ring named by an ordered list of
//! symbols. Terms are kept in a `BTreeMap` keyed by exponent vectors, so the
//! representation is canonical: no zero coefficients are stored and equal
//! polynomials serialize identically.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::algebra::Algebra;
use crate::{Error, Result};

/// Exponent vector of a monomial `x1^e1 ... xk^ek`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(k: usize) -> Self {
        MultiIndex(vec![0; k])
    }

    pub fn unit(k: usize, i: usize) -> Self {
        let mut e = vec![0; k];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

/// Polynomial in `Z[s1, ..., sk]` where `s1..sk` are the ambient symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    symbols: Vec<String>,
    terms: BTreeMap<MultiIndex, BigInt>,
}

impl Polynomial {
    pub fn zero(symbols: &[String]) -> Self {
        Polynomial {
            symbols: symbols.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(symbols: &[String], c: impl Into<BigInt>) -> Self {
        Self::monomial(symbols, MultiIndex::zero(symbols.len()), c)
    }

    pub fn var(symbols: &[String], i: usize) -> Self {
        Self::monomial(symbols, MultiIndex::unit(symbols.len(), i), 1)
    }

    pub fn monomial(symbols: &[String], exps: MultiIndex, c: impl Into<BigInt>) -> Self {
        assert_eq!(exps.len(), symbols.len(), "exponent vector length");
        let mut p = Self::zero(symbols);
        let c = c.into();
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, summing
    /// duplicates and dropping zeros.
    pub fn from_terms<I>(symbols: &[String], terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, BigInt)>,
    {
        let mut p = Self::zero(symbols);
        for (e, c) in terms {
            assert_eq!(e.len(), symbols.len(), "exponent vector length");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: MultiIndex, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn nvars(&self) -> usize {
        self.symbols.len()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&MultiIndex, &BigInt)> + '_ {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &MultiIndex) -> BigInt {
        self.terms.get(e).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> BigInt {
        self.coeff(&MultiIndex::zero(self.nvars()))
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::total_degree).max()
    }

    /// Degree in the symbols at `indices` jointly.
    pub fn degree_in(&self, indices: &[usize]) -> u32 {
        self.terms
            .keys()
            .map(|e| indices.iter().map(|&i| e.0[i]).sum())
            .max()
            .unwrap_or(0)
    }

    fn check_ambient(&self, other: &Polynomial) -> Result<()> {
        if self.symbols != other.symbols {
            return Err(Error::AmbientMismatch(
                self.symbols.clone(),
                other.symbols.clone(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_ambient(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_ambient(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_ambient(other)?;
        let mut out = Polynomial::zero(&self.symbols);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.add(eb), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            symbols: self.symbols.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> Polynomial {
        if k.is_zero() {
            return Polynomial::zero(&self.symbols);
        }
        Polynomial {
            symbols: self.symbols.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Polynomial {
        let mut acc = Polynomial::constant(&self.symbols, 1);
        for _ in 0..n {
            acc = acc.mul(self).expect("same ambient");
        }
        acc
    }

    /// Formal partial derivative with respect to symbol `i`.
    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero(&self.symbols);
        for (e, c) in &self.terms {
            let k = e.0[i];
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2.0[i] -= 1;
            out.add_term(e2, c * BigInt::from(k));
        }
        out
    }

    /// Reduces every coefficient into `[0, p)`.
    pub fn reduce_mod_p(&self, p: &BigInt) -> Result<Polynomial> {
        if *p < BigInt::from(2) {
            return Err(Error::BadModulus(p.to_string()));
        }
        let mut out = Polynomial::zero(&self.symbols);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.mod_floor(p));
        }
        Ok(out)
    }

    /// Keeps the terms for which `keep` returns true.
    pub fn filter_terms(&self, mut keep: impl FnMut(&MultiIndex) -> bool) -> Polynomial {
        Polynomial {
            symbols: self.symbols.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| keep(e))
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Re-expresses this polynomial over a larger ambient that contains every
    /// current symbol (matched by name).
    pub fn embed(&self, symbols: &[String]) -> Result<Polynomial> {
        let map: Vec<usize> = self
            .symbols
            .iter()
            .map(|s| {
                symbols
                    .iter()
                    .position(|t| t == s)
                    .ok_or_else(|| Error::UnknownSymbol(s.clone()))
            })
            .collect::<Result<_>>()?;
        let mut out = Polynomial::zero(symbols);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; symbols.len()];
            for (i, &k) in e.0.iter().enumerate() {
                e2[map[i]] += k;
            }
            out.add_term(MultiIndex(e2), c.clone());
        }
        Ok(out)
    }

    /// Views `self` as a polynomial in the symbols `outer` whose coefficients
    /// are polynomials in the remaining symbols. Keys are exponent vectors
    /// over `outer` (in the given order); values keep the full ambient with
    /// the `outer` exponents zeroed.
    pub fn coefficients_in(&self, outer: &[usize]) -> BTreeMap<MultiIndex, Polynomial> {
        let mut out: BTreeMap<MultiIndex, Polynomial> = BTreeMap::new();
        for (e, c) in &self.terms {
            let key = MultiIndex(outer.iter().map(|&i| e.0[i]).collect());
            let mut inner = e.clone();
            for &i in outer {
                inner.0[i] = 0;
            }
            out.entry(key)
                .or_insert_with(|| Polynomial::zero(&self.symbols))
                .add_term(inner, c.clone());
        }
        out
    }

    /// Evaluates the polynomial in `alg` at `values` (one per symbol).
    pub fn evaluate<A: Algebra>(&self, alg: &A, values: &[A::Elem]) -> A::Elem {
        assert_eq!(values.len(), self.nvars(), "one value per symbol");
        let mut max_exp = vec![0u32; self.nvars()];
        for e in self.terms.keys() {
            for (m, &k) in max_exp.iter_mut().zip(&e.0) {
                *m = (*m).max(k);
            }
        }
        let powers: Vec<Vec<A::Elem>> = values
            .iter()
            .zip(&max_exp)
            .map(|(v, &m)| {
                let mut ps = Vec::with_capacity(m as usize + 1);
                ps.push(alg.one());
                for j in 1..=m as usize {
                    let next = alg.mul(&ps[j - 1], v);
                    ps.push(next);
                }
                ps
            })
            .collect();
        let mut acc = alg.zero();
        for (e, c) in &self.terms {
            let mut t = alg.from_int(c);
            for (i, &k) in e.0.iter().enumerate() {
                if k > 0 {
                    t = alg.mul(&t, &powers[i][k as usize]);
                }
            }
            acc = alg.add(&acc, &t);
        }
        acc
    }

    /// Parses a polynomial expression over `symbols`. Accepts `+ - * ^`,
    /// parentheses and integer literals.
    pub fn parse(text: &str, symbols: &[String]) -> Result<Polynomial> {
        parse_expr(text, symbols, 1, 1)
    }
}

impl fmt::Display for Polynomial {
    /// Terms in descending lexicographic order of their exponent vectors,
    /// each as `coeff*s1^e1*...`; unit coefficients are omitted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || e.is_constant() {
                factors.push(mag.to_string());
            }
            for (s, &k) in self.symbols.iter().zip(&e.0) {
                match k {
                    0 => {}
                    1 => factors.push(s.clone()),
                    _ => factors.push(format!("{s}^{k}")),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// Ring of polynomials over a fixed ambient.
#[derive(Debug, Clone)]
pub struct PolyRing {
    symbols: Vec<String>,
}

impl PolyRing {
    pub fn new(symbols: &[String]) -> Self {
        PolyRing {
            symbols: symbols.to_vec(),
        }
    }

    pub fn var(&self, i: usize) -> Polynomial {
        Polynomial::var(&self.symbols, i)
    }
}

impl Algebra for PolyRing {
    type Elem = Polynomial;

    fn zero(&self) -> Polynomial {
        Polynomial::zero(&self.symbols)
    }
    fn one(&self) -> Polynomial {
        Polynomial::constant(&self.symbols, 1)
    }
    fn from_int(&self, c: &BigInt) -> Polynomial {
        Polynomial::constant(&self.symbols, c.clone())
    }
    fn add(&self, a: &Polynomial, b: &Polynomial) -> Polynomial {
        a.add(b).expect("PolyRing elements share the ambient")
    }
    fn sub(&self, a: &Polynomial, b: &Polynomial) -> Polynomial {
        a.sub(b).expect("PolyRing elements share the ambient")
    }
    fn mul(&self, a: &Polynomial, b: &Polynomial) -> Polynomial {
        a.mul(b).expect("PolyRing elements share the ambient")
    }
}

// ---------------------------------------------------------------------------
// Expression parser

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

struct Lexed {
    toks: Vec<(Tok, usize)>,
    end_col: usize,
}

fn lex(text: &str, line: usize, col0: usize) -> Result<Lexed> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = simple {
            toks.push((t, col));
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            toks.push((Tok::Int(s.parse().expect("digits")), col));
        } else if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            toks.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else {
            return Err(Error::Parse {
                line,
                column: col,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(Lexed {
        toks,
        end_col: col0 + chars.len(),
    })
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '.'
}

struct ExprParser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    end_col: usize,
    line: usize,
    symbols: &'a [String],
}

impl ExprParser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        let column = self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.end_col);
        Err(Error::Parse {
            line: self.line,
            column,
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.add(&t)?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = acc.sub(&t)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        while let Some(Tok::Star) = self.peek() {
            self.pos += 1;
            let t = self.unary()?;
            acc = acc.mul(&t)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial> {
        if let Some(Tok::Minus) = self.peek() {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Int(n)) => {
                    self.pos += 1;
                    let Some(n) = n.to_u32() else {
                        return self.err("exponent too large");
                    };
                    return Ok(base.pow(n));
                }
                _ => return self.err("expected integer exponent after `^`"),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Polynomial::constant(self.symbols, n))
            }
            Some(Tok::Ident(name)) => match self.symbols.iter().position(|s| *s == name) {
                Some(i) => {
                    self.pos += 1;
                    Ok(Polynomial::var(self.symbols, i))
                }
                None => self.err(format!("unknown symbol `{name}`")),
            },
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(_) => self.err("unexpected token"),
            None => self.err("unexpected end of expression"),
        }
    }
}

/// Parses `text` (which starts at `line`, column `col0`) as a polynomial.
pub(crate) fn parse_expr(
    text: &str,
    symbols: &[String],
    line: usize,
    col0: usize,
) -> Result<Polynomial> {
    let lexed = lex(text, line, col0)?;
    let mut p = ExprParser {
        toks: &lexed.toks,
        pos: 0,
        end_col: lexed.end_col,
        line,
        symbols,
    };
    let e = p.expr()?;
    if p.pos != lexed.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Owned symbol list from string slices.
pub fn syms(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}
