//! Proper context-free grammars with derivation multiplicities.
//!
//! A grammar is proper when no right-hand side is empty or a single
//! nonterminal. Every derivation then produces a nonempty word and every
//! word has finitely many derivations, so `[[N]]_w`, the number of leftmost
//! derivations of `w` from `N`, is well defined. Rules carry a positive
//! integer weight; a rule of weight `k` counts like `k` copies of itself.
//!
//! Terminal `i` (declaration order) corresponds to indeterminate `x{i+1}` of
//! the census system, and nonterminal `N` to the variable `f_N`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::poly::{is_ident_char, is_ident_start, MultiIndex, Polynomial};
use crate::polysys::PolySystem;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sym {
    T(usize),
    N(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub lhs: usize,
    pub rhs: Vec<Sym>,
    pub weight: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    terminals: Vec<String>,
    nonterminals: Vec<String>,
    start: Option<usize>,
    rules: Vec<Rule>,
}

fn check_name(name: &str) -> Result<()> {
    let mut cs = name.chars();
    match cs.next() {
        Some(c) if is_ident_start(c) && cs.all(is_ident_char) => Ok(()),
        _ => Err(Error::Invalid(format!("`{name}` is not a valid symbol name"))),
    }
}

impl Grammar {
    /// Validates names, indices and properness.
    pub fn new(
        terminals: Vec<String>,
        nonterminals: Vec<String>,
        start: Option<usize>,
        rules: Vec<Rule>,
    ) -> Result<Grammar> {
        let mut seen = HashSet::new();
        for n in terminals.iter().chain(&nonterminals) {
            check_name(n)?;
            if !seen.insert(n.as_str()) {
                return Err(Error::Invalid(format!("symbol `{n}` declared twice")));
            }
        }
        let g = Grammar {
            terminals,
            nonterminals,
            start,
            rules,
        };
        if let Some(s) = start {
            if s >= g.nonterminals.len() {
                return Err(Error::Invalid(format!("start index {s} out of range")));
            }
        }
        let mut bad = Vec::new();
        for (i, r) in g.rules.iter().enumerate() {
            let in_range = r.lhs < g.nonterminals.len()
                && r.rhs.iter().all(|s| match *s {
                    Sym::T(t) => t < g.terminals.len(),
                    Sym::N(n) => n < g.nonterminals.len(),
                });
            if !in_range {
                return Err(Error::Invalid(format!("rule {i} refers to an unknown symbol")));
            }
            if let Some(why) = improper(r) {
                bad.push(format!("rule {}: {} ({why})", i + 1, g.rule_text(r)));
            }
        }
        if !bad.is_empty() {
            return Err(Error::ImproperGrammar(bad.join("; ")));
        }
        Ok(g)
    }

    pub fn terminals(&self) -> &[String] {
        &self.terminals
    }

    pub fn nonterminals(&self) -> &[String] {
        &self.nonterminals
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn start(&self) -> Option<&str> {
        self.start.map(|s| self.nonterminals[s].as_str())
    }

    pub fn with_start(mut self, name: &str) -> Result<Grammar> {
        self.start = Some(self.nonterminal(name)?);
        Ok(self)
    }

    pub fn nonterminal(&self, name: &str) -> Result<usize> {
        self.nonterminals
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    pub fn terminal(&self, name: &str) -> Result<usize> {
        self.terminals
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownSymbol(name.to_string()))
    }

    /// Parses a word: whitespace-separated terminal names, or, when every
    /// terminal is a single character, a plain string of letters.
    pub fn word(&self, text: &str) -> Result<Vec<usize>> {
        let text = text.trim();
        if text.contains(char::is_whitespace) {
            return text.split_whitespace().map(|t| self.terminal(t)).collect();
        }
        if let Ok(t) = self.terminal(text) {
            return Ok(vec![t]);
        }
        if self.terminals.iter().all(|t| t.chars().count() == 1) {
            return text.chars().map(|c| self.terminal(&c.to_string())).collect();
        }
        Err(Error::UnknownSymbol(text.to_string()))
    }

    pub fn word_text(&self, w: &[usize]) -> String {
        let single = self.terminals.iter().all(|t| t.chars().count() == 1);
        let parts: Vec<&str> = w.iter().map(|&t| self.terminals[t].as_str()).collect();
        parts.join(if single { "" } else { " " })
    }

    fn sym_name(&self, s: Sym) -> &str {
        match s {
            Sym::T(t) => &self.terminals[t],
            Sym::N(n) => &self.nonterminals[n],
        }
    }

    fn alt_text(&self, r: &Rule) -> String {
        let mut s: Vec<&str> = r.rhs.iter().map(|&x| self.sym_name(x)).collect();
        let w;
        if r.weight != 1 {
            w = format!("[weight={}]", r.weight);
            s.push(&w);
        }
        s.join(" ")
    }

    fn rule_text(&self, r: &Rule) -> String {
        format!("{} -> {}", self.nonterminals[r.lhs], self.alt_text(r))
    }

    pub fn parse(text: &str) -> Result<Grammar> {
        parse_grammar(text)
    }

    // -----------------------------------------------------------------------
    // Structure

    /// Nonterminals deriving at least one word.
    pub fn productive(&self) -> Vec<bool> {
        let mut prod = vec![false; self.nonterminals.len()];
        loop {
            let mut changed = false;
            for r in &self.rules {
                if !prod[r.lhs]
                    && r.rhs.iter().all(|s| match *s {
                        Sym::T(_) => true,
                        Sym::N(n) => prod[n],
                    })
                {
                    prod[r.lhs] = true;
                    changed = true;
                }
            }
            if !changed {
                return prod;
            }
        }
    }

    /// Whether `L(N)` is empty.
    pub fn is_empty(&self, n: &str) -> Result<bool> {
        Ok(!self.productive()[self.nonterminal(n)?])
    }

    /// Restriction to productive nonterminals reachable from `roots`, keeping
    /// declaration order. Roots are kept even when unproductive.
    pub fn trim(&self, roots: &[&str]) -> Result<Grammar> {
        let prod = self.productive();
        let ok_rule = |r: &Rule| {
            r.rhs.iter().all(|s| match *s {
                Sym::T(_) => true,
                Sym::N(n) => prod[n],
            })
        };
        let mut reach = vec![false; self.nonterminals.len()];
        let mut stack = Vec::new();
        for r in roots {
            let i = self.nonterminal(r)?;
            if !reach[i] {
                reach[i] = true;
                stack.push(i);
            }
        }
        let mut by_lhs: Vec<Vec<usize>> = vec![Vec::new(); self.nonterminals.len()];
        for (i, r) in self.rules.iter().enumerate() {
            by_lhs[r.lhs].push(i);
        }
        while let Some(n) = stack.pop() {
            for &ri in &by_lhs[n] {
                let r = &self.rules[ri];
                if !ok_rule(r) {
                    continue;
                }
                for s in &r.rhs {
                    if let Sym::N(m) = *s {
                        if !reach[m] {
                            reach[m] = true;
                            stack.push(m);
                        }
                    }
                }
            }
        }
        let mut map = vec![usize::MAX; self.nonterminals.len()];
        let mut names = Vec::new();
        for (i, n) in self.nonterminals.iter().enumerate() {
            if reach[i] {
                map[i] = names.len();
                names.push(n.clone());
            }
        }
        let rules = self
            .rules
            .iter()
            .filter(|r| reach[r.lhs] && ok_rule(r))
            .map(|r| Rule {
                lhs: map[r.lhs],
                rhs: r
                    .rhs
                    .iter()
                    .map(|s| match *s {
                        Sym::N(n) => Sym::N(map[n]),
                        t => t,
                    })
                    .collect(),
                weight: r.weight,
            })
            .collect();
        let start = self.start.and_then(|s| reach[s].then_some(map[s]));
        Grammar::new(self.terminals.clone(), names, start, rules)
    }

    /// Both grammars side by side over the union of their terminals (this
    /// grammar's terminals first), with nonterminals renamed by prefix.
    pub fn disjoint_union(&self, other: &Grammar, left: &str, right: &str) -> Result<Grammar> {
        let mut terminals = self.terminals.clone();
        for t in &other.terminals {
            if !terminals.contains(t) {
                terminals.push(t.clone());
            }
        }
        let tmap: Vec<usize> = other
            .terminals
            .iter()
            .map(|t| terminals.iter().position(|u| u == t).expect("merged"))
            .collect();
        let off = self.nonterminals.len();
        let mut names: Vec<String> = self.nonterminals.iter().map(|n| format!("{left}{n}")).collect();
        names.extend(other.nonterminals.iter().map(|n| format!("{right}{n}")));
        let mut rules = self.rules.clone();
        rules.extend(other.rules.iter().map(|r| Rule {
            lhs: r.lhs + off,
            rhs: r
                .rhs
                .iter()
                .map(|s| match *s {
                    Sym::T(t) => Sym::T(tmap[t]),
                    Sym::N(n) => Sym::N(n + off),
                })
                .collect(),
            weight: r.weight,
        }));
        Grammar::new(terminals, names, self.start, rules)
    }

    // -----------------------------------------------------------------------
    // Census generating functions

    /// Census system: `f_N = sum over rules N -> w of weight * x^c(w) * f^w`.
    pub fn census_system(&self) -> Result<PolySystem> {
        let k = self.terminals.len();
        let indets: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
        let vars: Vec<String> = self.nonterminals.iter().map(|n| format!("f_{n}")).collect();
        let amb: Vec<String> = indets.iter().chain(&vars).cloned().collect();
        let mut terms: Vec<Vec<(MultiIndex, BigInt)>> = vec![Vec::new(); vars.len()];
        for r in &self.rules {
            let mut e = vec![0u32; amb.len()];
            for s in &r.rhs {
                match *s {
                    Sym::T(t) => e[t] += 1,
                    Sym::N(n) => e[k + n] += 1,
                }
            }
            terms[r.lhs].push((MultiIndex(e), BigInt::from(r.weight)));
        }
        let rhs = terms
            .into_iter()
            .map(|t| Polynomial::from_terms(&amb, t))
            .collect();
        PolySystem::new(indets, vars, rhs)
    }

    /// `[[N]]_w` by memoized splitting of `w` across right-hand sides.
    pub fn count_derivations(&self, n: &str, w: &[usize]) -> Result<BigUint> {
        let n = self.nonterminal(n)?;
        if let Some(&t) = w.iter().find(|&&t| t >= self.terminals.len()) {
            return Err(Error::Invalid(format!("terminal index {t} out of range")));
        }
        if w.is_empty() {
            return Ok(BigUint::zero());
        }
        let mut c = Counter {
            g: self,
            w,
            by_lhs: self.by_lhs(),
            nt: HashMap::new(),
            seq: HashMap::new(),
        };
        Ok(c.nonterminal(n, 0, w.len()))
    }

    /// `a_v(N)`: total multiplicity of words with Parikh vector `v`.
    pub fn census_count(&self, n: &str, v: &MultiIndex) -> Result<BigUint> {
        let n = self.nonterminal(n)?;
        if v.len() != self.terminals.len() {
            return Err(Error::Invalid(format!(
                "Parikh vector has {} entries, grammar has {} terminals",
                v.len(),
                self.terminals.len()
            )));
        }
        let mut c = Census {
            g: self,
            by_lhs: self.by_lhs(),
            nt: HashMap::new(),
            seq: HashMap::new(),
        };
        Ok(c.nonterminal(n, &v.0))
    }

    fn by_lhs(&self) -> Vec<Vec<usize>> {
        let mut by = vec![Vec::new(); self.nonterminals.len()];
        for (i, r) in self.rules.iter().enumerate() {
            by[r.lhs].push(i);
        }
        by
    }

    /// Equivalent grammar with right-hand sides of length at most two:
    /// `N -> s1 s2 ... sm` becomes `N -> s1 N'`, `N' -> s2 N''`, ...,
    /// with fresh nonterminals. Multiplicities are unchanged because each
    /// chain has a single derivation shape.
    pub fn binarize(&self) -> Result<Grammar> {
        let mut names = self.nonterminals.clone();
        let taken = |n: &str, names: &[String]| {
            names.iter().chain(&self.terminals).any(|x| x == n)
        };
        let mut rules = Vec::new();
        for (ri, r) in self.rules.iter().enumerate() {
            if r.rhs.len() <= 2 {
                rules.push(r.clone());
                continue;
            }
            let mut lhs = r.lhs;
            let mut weight = r.weight;
            for pos in 0..r.rhs.len() - 2 {
                let mut name = format!("{}_r{}_{}", self.nonterminals[r.lhs], ri, pos + 1);
                while taken(&name, &names) {
                    name.push('\'');
                }
                let fresh = names.len();
                names.push(name);
                rules.push(Rule {
                    lhs,
                    rhs: vec![r.rhs[pos], Sym::N(fresh)],
                    weight,
                });
                lhs = fresh;
                weight = 1;
            }
            rules.push(Rule {
                lhs,
                rhs: r.rhs[r.rhs.len() - 2..].to_vec(),
                weight,
            });
        }
        Grammar::new(self.terminals.clone(), names, self.start, rules)
    }

    /// All words of length `1..=max_len` over the terminals, shortest first.
    pub fn words_up_to(&self, max_len: usize) -> Vec<Vec<usize>> {
        let k = self.terminals.len();
        let mut out = Vec::new();
        let mut layer: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::with_capacity(layer.len() * k);
            for w in &layer {
                for t in 0..k {
                    let mut u = w.clone();
                    u.push(t);
                    next.push(u);
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

fn improper(r: &Rule) -> Option<&'static str> {
    if r.rhs.is_empty() {
        Some("empty right-hand side")
    } else if r.rhs.len() == 1 && matches!(r.rhs[0], Sym::N(_)) {
        Some("single nonterminal")
    } else if r.weight == 0 {
        Some("weight must be positive")
    } else {
        None
    }
}

struct Counter<'a> {
    g: &'a Grammar,
    w: &'a [usize],
    by_lhs: Vec<Vec<usize>>,
    nt: HashMap<(usize, usize, usize), BigUint>,
    seq: HashMap<(usize, usize, usize, usize), BigUint>,
}

impl Counter<'_> {
    fn nonterminal(&mut self, n: usize, i: usize, j: usize) -> BigUint {
        if let Some(v) = self.nt.get(&(n, i, j)) {
            return v.clone();
        }
        let mut total = BigUint::zero();
        for ri in self.by_lhs[n].clone() {
            let c = self.seq(ri, 0, i, j);
            if !c.is_zero() {
                total += c * self.g.rules[ri].weight;
            }
        }
        self.nt.insert((n, i, j), total.clone());
        total
    }

    /// Derivations of `w[i..j]` from `rhs[pos..]` of rule `ri`.
    fn seq(&mut self, ri: usize, pos: usize, i: usize, j: usize) -> BigUint {
        let rhs_len = self.g.rules[ri].rhs.len();
        let left = rhs_len - pos;
        if j - i < left {
            return BigUint::zero();
        }
        if let Some(v) = self.seq.get(&(ri, pos, i, j)) {
            return v.clone();
        }
        let sym = self.g.rules[ri].rhs[pos];
        let mut total = BigUint::zero();
        if left == 1 {
            total = self.symbol(sym, i, j);
        } else {
            for m in i + 1..=j - (left - 1) {
                let a = self.symbol(sym, i, m);
                if a.is_zero() {
                    continue;
                }
                let b = self.seq(ri, pos + 1, m, j);
                if !b.is_zero() {
                    total += a * b;
                }
            }
        }
        self.seq.insert((ri, pos, i, j), total.clone());
        total
    }

    fn symbol(&mut self, s: Sym, i: usize, j: usize) -> BigUint {
        match s {
            Sym::T(t) => {
                if j == i + 1 && self.w[i] == t {
                    BigUint::one()
                } else {
                    BigUint::zero()
                }
            }
            Sym::N(n) => self.nonterminal(n, i, j),
        }
    }
}

struct Census<'a> {
    g: &'a Grammar,
    by_lhs: Vec<Vec<usize>>,
    nt: HashMap<(usize, Vec<u32>), BigUint>,
    seq: HashMap<(usize, usize, Vec<u32>), BigUint>,
}

impl Census<'_> {
    fn nonterminal(&mut self, n: usize, v: &[u32]) -> BigUint {
        if v.iter().all(|&x| x == 0) {
            return BigUint::zero();
        }
        let key = (n, v.to_vec());
        if let Some(c) = self.nt.get(&key) {
            return c.clone();
        }
        let mut total = BigUint::zero();
        for ri in self.by_lhs[n].clone() {
            let c = self.seq(ri, 0, v);
            if !c.is_zero() {
                total += c * self.g.rules[ri].weight;
            }
        }
        self.nt.insert(key, total.clone());
        total
    }

    fn seq(&mut self, ri: usize, pos: usize, v: &[u32]) -> BigUint {
        let rhs = &self.g.rules[ri].rhs;
        let left = (rhs.len() - pos) as u32;
        let size: u32 = v.iter().sum();
        if size < left {
            return BigUint::zero();
        }
        let sym = rhs[pos];
        if left == 1 {
            return self.symbol(sym, v);
        }
        let key = (ri, pos, v.to_vec());
        if let Some(c) = self.seq.get(&key) {
            return c.clone();
        }
        let mut total = BigUint::zero();
        match sym {
            Sym::T(t) => {
                if v[t] > 0 {
                    let mut rest = v.to_vec();
                    rest[t] -= 1;
                    total = self.seq(ri, pos + 1, &rest);
                }
            }
            Sym::N(n) => {
                // every split u + (v - u) with |u| >= 1 and |v - u| >= left - 1
                let mut u = vec![0u32; v.len()];
                loop {
                    let su: u32 = u.iter().sum();
                    if su >= 1 && size - su >= left - 1 {
                        let a = self.nonterminal(n, &u);
                        if !a.is_zero() {
                            let rest: Vec<u32> = v.iter().zip(&u).map(|(x, y)| x - y).collect();
                            let b = self.seq(ri, pos + 1, &rest);
                            if !b.is_zero() {
                                total += a * b;
                            }
                        }
                    }
                    let mut i = 0;
                    while i < u.len() && u[i] == v[i] {
                        u[i] = 0;
                        i += 1;
                    }
                    if i == u.len() {
                        break;
                    }
                    u[i] += 1;
                }
            }
        }
        self.seq.insert(key, total.clone());
        total
    }

    fn symbol(&mut self, s: Sym, v: &[u32]) -> BigUint {
        match s {
            Sym::T(t) => {
                let unit = v.iter().enumerate().all(|(i, &x)| x == u32::from(i == t));
                if unit {
                    BigUint::one()
                } else {
                    BigUint::zero()
                }
            }
            Sym::N(n) => self.nonterminal(n, v),
        }
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "terminals: {}", self.terminals.join(" "))?;
        writeln!(f, "nonterminals: {}", self.nonterminals.join(" "))?;
        if let Some(s) = self.start {
            writeln!(f, "start: {}", self.nonterminals[s])?;
        }
        let mut i = 0;
        while i < self.rules.len() {
            let lhs = self.rules[i].lhs;
            let mut alts = vec![self.alt_text(&self.rules[i])];
            i += 1;
            while i < self.rules.len() && self.rules[i].lhs == lhs {
                alts.push(self.alt_text(&self.rules[i]));
                i += 1;
            }
            writeln!(f, "{} -> {}", self.nonterminals[lhs], alts.join(" | "))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Text format

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated tokens with 1-based columns.
fn tokens(s: &str, col0: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        if c.is_whitespace() {
            if let Some(b) = start.take() {
                out.push((col0 + s[..b].chars().count(), &s[b..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(b) = start {
        out.push((col0 + s[..b].chars().count(), &s[b..]));
    }
    out
}

/// Parses the grammar text format:
///
/// ```text
/// terminals: a b c d
/// nonterminals: X Y
/// start: X
/// X -> a b | a X X b | c Y d
/// Y -> c d | c Y Y d [weight=2]
/// ```
pub fn parse_grammar(text: &str) -> Result<Grammar> {
    let mut terminals: Option<Vec<String>> = None;
    let mut nonterminals: Option<Vec<String>> = None;
    let mut start: Option<(usize, usize, String)> = None;
    let mut rules: Vec<(usize, Rule)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let header = ["terminals:", "nonterminals:", "start:"]
            .into_iter()
            .find(|h| body.trim_start().starts_with(h));
        if let Some(h) = header {
            let lead = body.len() - body.trim_start().len();
            let rest = &body[lead + h.len()..];
            let col0 = lead + h.len() + 1;
            let names: Vec<(usize, &str)> = tokens(rest, col0);
            for &(c, n) in &names {
                check_name(n).map_err(|_| perr(line, c, format!("invalid symbol name `{n}`")))?;
            }
            let list: Vec<String> = names.iter().map(|(_, n)| n.to_string()).collect();
            match h {
                "terminals:" if terminals.is_none() => terminals = Some(list),
                "nonterminals:" if nonterminals.is_none() => nonterminals = Some(list),
                "start:" if start.is_none() => {
                    if names.len() != 1 {
                        return Err(perr(line, col0, "expected one start symbol"));
                    }
                    start = Some((line, names[0].0, list[0].clone()));
                }
                _ => return Err(perr(line, lead + 1, format!("duplicate `{h}` line"))),
            }
            continue;
        }
        let (ts, ns) = match (&terminals, &nonterminals) {
            (Some(t), Some(n)) => (t, n),
            _ => {
                return Err(perr(
                    line,
                    1,
                    "rules must follow the `terminals:` and `nonterminals:` lines",
                ))
            }
        };
        let arrow = body
            .find("->")
            .ok_or_else(|| perr(line, 1, "expected `->`"))?;
        let lhs_toks = tokens(&body[..arrow], 1);
        let (lc, lhs_name) = match lhs_toks.as_slice() {
            [(c, n)] => (*c, *n),
            _ => return Err(perr(line, 1, "expected one nonterminal before `->`")),
        };
        let lhs = ns
            .iter()
            .position(|n| n == lhs_name)
            .ok_or_else(|| perr(line, lc, format!("`{lhs_name}` is not a declared nonterminal")))?;
        let mut offset = arrow + 2;
        for alt in body[arrow + 2..].split('|') {
            let col0 = body[..offset].chars().count() + 1;
            let mut rhs = Vec::new();
            let mut weight = 1u64;
            let toks = tokens(alt, col0);
            for (ti, &(c, tok)) in toks.iter().enumerate() {
                if let Some(w) = tok.strip_prefix("[weight=").and_then(|w| w.strip_suffix(']')) {
                    if ti + 1 != toks.len() {
                        return Err(perr(line, c, "weight must end the alternative"));
                    }
                    weight = w
                        .parse()
                        .ok()
                        .filter(|&w: &u64| w >= 1)
                        .ok_or_else(|| perr(line, c, format!("bad weight `{w}`")))?;
                } else if let Some(t) = ts.iter().position(|t| t == tok) {
                    rhs.push(Sym::T(t));
                } else if let Some(n) = ns.iter().position(|n| n == tok) {
                    rhs.push(Sym::N(n));
                } else {
                    return Err(perr(line, c, format!("undeclared symbol `{tok}`")));
                }
            }
            rules.push((line, Rule { lhs, rhs, weight }));
            offset += alt.len() + 1;
        }
    }
    let terminals = terminals.ok_or_else(|| perr(1, 1, "missing `terminals:` line"))?;
    let nonterminals = nonterminals.ok_or_else(|| perr(1, 1, "missing `nonterminals:` line"))?;
    let start = match start {
        None => None,
        Some((line, col, name)) => Some(
            nonterminals
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| perr(line, col, format!("`{name}` is not a declared nonterminal")))?,
        ),
    };
    // properness diagnostics carry source lines
    let tmp = Grammar {
        terminals: terminals.clone(),
        nonterminals: nonterminals.clone(),
        start,
        rules: Vec::new(),
    };
    let bad: Vec<String> = rules
        .iter()
        .filter_map(|(line, r)| {
            improper(r).map(|why| format!("line {line}: {} ({why})", tmp.rule_text(r)))
        })
        .collect();
    if !bad.is_empty() {
        return Err(Error::ImproperGrammar(bad.join("; ")));
    }
    Grammar::new(terminals, nonterminals, start, rules.into_iter().map(|(_, r)| r).collect())
}

// ---------------------------------------------------------------------------
// Finite automata

/// Complete deterministic automaton over a grammar's terminals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Vec<String>,
    start: usize,
    accepting: Vec<bool>,
    /// `delta[q][a]`.
    delta: Vec<Vec<usize>>,
}

impl Dfa {
    pub fn new(
        alphabet: Vec<String>,
        start: usize,
        accepting: Vec<bool>,
        delta: Vec<Vec<usize>>,
    ) -> Result<Dfa> {
        let n = delta.len();
        if n == 0 || start >= n || accepting.len() != n {
            return Err(Error::BadAutomaton("state count mismatch".into()));
        }
        for (q, row) in delta.iter().enumerate() {
            if row.len() != alphabet.len() {
                return Err(Error::BadAutomaton(format!(
                    "state {q} has {} transitions, expected {} (one per letter)",
                    row.len(),
                    alphabet.len()
                )));
            }
            if let Some(&t) = row.iter().find(|&&t| t >= n) {
                return Err(Error::BadAutomaton(format!("state {q} moves to unknown state {t}")));
            }
        }
        Ok(Dfa {
            alphabet,
            start,
            accepting,
            delta,
        })
    }

    /// One accepting state looping on every letter.
    pub fn universal(alphabet: &[String]) -> Dfa {
        Dfa {
            alphabet: alphabet.to_vec(),
            start: 0,
            accepting: vec![true],
            delta: vec![vec![0; alphabet.len()]],
        }
    }

    /// `order[0]* order[1]* ... order[m-1]*`: states `0..m` for the current
    /// block plus a rejecting sink `m`. Letters outside `order` go to the sink.
    pub fn letter_blocks(alphabet: &[String], order: &[usize]) -> Dfa {
        let m = order.len();
        let mut delta = vec![vec![m; alphabet.len()]; m + 1];
        for (q, row) in delta.iter_mut().enumerate().take(m) {
            for (j, &a) in order.iter().enumerate().skip(q) {
                row[a] = j;
            }
        }
        let mut accepting = vec![true; m + 1];
        accepting[m] = false;
        Dfa {
            alphabet: alphabet.to_vec(),
            start: 0,
            accepting,
            delta,
        }
    }

    /// Words containing `a` somewhere before `b`.
    pub fn precedes(alphabet: &[String], a: usize, b: usize) -> Dfa {
        let k = alphabet.len();
        let mut delta = vec![vec![0; k], vec![1; k], vec![2; k]];
        delta[0][a] = 1;
        delta[1][b] = 2;
        Dfa {
            alphabet: alphabet.to_vec(),
            start: 0,
            accepting: vec![false, false, true],
            delta,
        }
    }

    pub fn complement(&self) -> Dfa {
        let mut d = self.clone();
        for a in &mut d.accepting {
            *a = !*a;
        }
        d
    }

    pub fn states(&self) -> usize {
        self.delta.len()
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn accepts(&self, w: &[usize]) -> bool {
        let q = w.iter().fold(self.start, |q, &a| self.delta[q][a]);
        self.accepting[q]
    }
}

/// Grammar for `L(N)` restricted to `L(a)`, with multiplicities: nonterminals
/// `(q, M, r)` derive the words of `M` that drive `a` from `q` to `r`. The
/// start nonterminal `start` collects `(q0, N, f)` over accepting `f`.
/// Unproductive and unreachable nonterminals are removed.
pub fn dfa_product(g: &Grammar, n: &str, a: &Dfa) -> Result<Grammar> {
    if a.alphabet != g.terminals {
        return Err(Error::BadAutomaton(format!(
            "alphabet {:?} differs from the grammar terminals {:?}",
            a.alphabet, g.terminals
        )));
    }
    let n = g.nonterminal(n)?;
    let qn = a.states();
    let nn = g.nonterminals.len();
    let triple = |q: usize, m: usize, r: usize| 1 + (q * nn + m) * qn + r;
    let mut names = vec!["start".to_string()];
    for q in 0..qn {
        for m in 0..nn {
            for r in 0..qn {
                names.push(format!("p{q}_{r}_{}", g.nonterminals[m]));
            }
        }
    }
    let mut rules = Vec::new();
    for rule in &g.rules {
        for q in 0..qn {
            // states after each symbol; terminals are forced, nonterminals branch
            let mut partial: Vec<(Vec<Sym>, usize)> = vec![(Vec::new(), q)];
            for &s in &rule.rhs {
                let mut next = Vec::new();
                for (rhs, cur) in partial {
                    match s {
                        Sym::T(t) => {
                            let mut r2 = rhs;
                            r2.push(Sym::T(t));
                            next.push((r2, a.delta[cur][t]));
                        }
                        Sym::N(m) => {
                            for r in 0..qn {
                                let mut r2 = rhs.clone();
                                r2.push(Sym::N(triple(cur, m, r)));
                                next.push((r2, r));
                            }
                        }
                    }
                }
                partial = next;
            }
            for (rhs, r) in partial {
                let lhs = triple(q, rule.lhs, r);
                if rule.lhs == n && q == a.start && a.accepting[r] {
                    rules.push(Rule {
                        lhs: 0,
                        rhs: rhs.clone(),
                        weight: rule.weight,
                    });
                }
                rules.push(Rule {
                    lhs,
                    rhs,
                    weight: rule.weight,
                });
            }
        }
    }
    let full = Grammar::new(g.terminals.clone(), names, Some(0), rules)?;
    full.trim(&["start"])
}
