//! Letter-bounded languages and multiplicity equivalence.
//!
//! A language is letter-bounded for an order `s1, ..., sk` of its letters if
//! it is contained in `s1* s2* ... sk*`. On such a language the Parikh map is
//! injective, so two nonterminals have equal multiplicities iff their census
//! series agree. Bounded restrictions `w1* ... wk*` are reduced to that case
//! by an inverse homomorphism through pushdown automata.
//!
//! The pushdown automata here are built only by [`cfg_to_pda`] and
//! [`pda_inverse_hom`]; run counting relies on their shape.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::Serialize;

use crate::decide::{eq_alg_with, BoundConfig, Engine};
use crate::grammar::{dfa_product, Dfa, Grammar, Rule, Sym};
use crate::poly::MultiIndex;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Letter-boundedness

fn check_order(g: &Grammar, order: &[usize]) -> Result<()> {
    let k = g.terminals().len();
    let mut seen = vec![false; k];
    if order.len() != k {
        return Err(Error::BadOrder(format!(
            "expected a permutation of {k} letters, got {}",
            order.len()
        )));
    }
    for &a in order {
        if a >= k || seen[a] {
            return Err(Error::BadOrder(format!("letter index {a} repeated or out of range")));
        }
        seen[a] = true;
    }
    Ok(())
}

/// Letter indices from names.
pub fn parse_order(g: &Grammar, names: &[&str]) -> Result<Vec<usize>> {
    let order = names
        .iter()
        .map(|n| g.terminal(n).map_err(|_| Error::BadOrder(format!("unknown letter `{n}`"))))
        .collect::<Result<Vec<_>>>()?;
    check_order(g, &order)?;
    Ok(order)
}

/// Whether `L(N)` is contained in `order[0]* ... order[k-1]*`. Exact: the
/// intersection with the complement is tested for emptiness.
pub fn check_letter_bounded(g: &Grammar, n: &str, order: &[usize]) -> Result<bool> {
    check_order(g, order)?;
    let bad = Dfa::letter_blocks(g.terminals(), order).complement();
    let p = dfa_product(g, n, &bad)?;
    p.is_empty("start")
}

/// Pairs `(a, b)` such that some word of some `L(N)` has `a` before `b`.
fn precedence(g: &Grammar, ns: &[&str]) -> Result<Vec<Vec<bool>>> {
    let k = g.terminals().len();
    let mut before = vec![vec![false; k]; k];
    for n in ns {
        let t = g.trim(&[n])?;
        // letters that never occur cannot take part in a violation
        let used = used_letters(&t);
        for a in (0..k).filter(|&a| used[a]) {
            for b in (0..k).filter(|&b| b != a && used[b]) {
                if !before[a][b] {
                    let p = dfa_product(&t, n, &Dfa::precedes(t.terminals(), a, b))?;
                    before[a][b] = !p.is_empty("start")?;
                }
            }
        }
    }
    Ok(before)
}

fn used_letters(g: &Grammar) -> Vec<bool> {
    let mut used = vec![false; g.terminals().len()];
    for r in g.rules() {
        for s in &r.rhs {
            if let Sym::T(t) = *s {
                used[t] = true;
            }
        }
    }
    used
}

/// An order witnessing that every `L(N)` is letter-bounded, or `None`.
///
/// A word leaves `s1* ... sk*` exactly when it has letters `a` before `b`
/// with `b` earlier in the order, so an order exists iff the relation "some
/// word has `a` before `b`" is acyclic; any topological order then works.
/// Ties go to declaration order, so unconstrained letters keep their places.
pub fn letter_order(g: &Grammar, ns: &[&str]) -> Result<Option<Vec<usize>>> {
    let k = g.terminals().len();
    let before = precedence(g, ns)?;
    let mut indeg: Vec<usize> = (0..k).map(|b| (0..k).filter(|&a| before[a][b]).count()).collect();
    let mut done = vec![false; k];
    let mut order = Vec::with_capacity(k);
    while order.len() < k {
        let Some(a) = (0..k).find(|&a| !done[a] && indeg[a] == 0) else {
            return Ok(None);
        };
        done[a] = true;
        order.push(a);
        for b in 0..k {
            if before[a][b] {
                indeg[b] -= 1;
            }
        }
    }
    for n in ns {
        debug_assert!(check_letter_bounded(g, n, &order)?);
    }
    Ok(Some(order))
}

pub fn find_letter_bounded_order(g: &Grammar, n: &str) -> Result<Option<Vec<usize>>> {
    letter_order(g, &[n])
}

// ---------------------------------------------------------------------------
// Pushdown automata

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdaRule {
    pub from: usize,
    pub top: usize,
    pub input: Option<usize>,
    pub to: usize,
    /// Replaces `top`; `push[0]` ends up on top.
    pub push: Vec<usize>,
    pub weight: u64,
}

/// Pushdown automaton accepting by empty stack in an accepting location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pda {
    input: Vec<String>,
    stack: Vec<String>,
    locations: usize,
    initial: usize,
    bottom: usize,
    accepting: Vec<bool>,
    rules: Vec<PdaRule>,
    // run-length bound: stack symbol s needs at least min_yield[s] letters
    // of the underlying word; location q holds supply[q] of them buffered,
    // and each input letter provides at most `scale`
    min_yield: Vec<u32>,
    supply: Vec<u32>,
    scale: u32,
}

impl Pda {
    pub fn input(&self) -> &[String] {
        &self.input
    }

    pub fn stack_symbols(&self) -> &[String] {
        &self.stack
    }

    pub fn locations(&self) -> usize {
        self.locations
    }

    pub fn rules(&self) -> &[PdaRule] {
        &self.rules
    }

    /// Weighted number of accepting runs on `w`.
    pub fn count_runs(&self, w: &[usize]) -> Result<BigUint> {
        let mut by_state: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (i, r) in self.rules.iter().enumerate() {
            by_state.entry((r.from, r.top)).or_default().push(i);
        }
        let mut runs = Runs {
            p: self,
            w,
            by_state,
            memo: HashMap::new(),
            active: std::collections::HashSet::new(),
        };
        runs.count(self.initial, vec![self.bottom], 0)
    }
}

struct Runs<'a> {
    p: &'a Pda,
    w: &'a [usize],
    by_state: HashMap<(usize, usize), Vec<usize>>,
    memo: HashMap<(usize, Vec<usize>, usize), BigUint>,
    active: std::collections::HashSet<(usize, Vec<usize>, usize)>,
}

impl Runs<'_> {
    /// `stack` has its top at the end.
    fn count(&mut self, loc: usize, stack: Vec<usize>, pos: usize) -> Result<BigUint> {
        let p = self.p;
        let rest = (self.w.len() - pos) as u64;
        let need: u64 = stack.iter().map(|&s| u64::from(p.min_yield[s])).sum();
        if need > u64::from(p.supply[loc]) + rest * u64::from(p.scale) {
            return Ok(BigUint::zero());
        }
        let Some(&top) = stack.last() else {
            let ok = pos == self.w.len() && p.accepting[loc];
            return Ok(BigUint::from(u32::from(ok)));
        };
        let key = (loc, stack, pos);
        if let Some(c) = self.memo.get(&key) {
            return Ok(c.clone());
        }
        if !self.active.insert(key.clone()) {
            return Err(Error::BadAutomaton("epsilon cycle while counting runs".into()));
        }
        let mut total = BigUint::zero();
        let rules = self.by_state.get(&(loc, top)).cloned().unwrap_or_default();
        for ri in rules {
            let r = &p.rules[ri];
            let next = match r.input {
                None => pos,
                Some(a) if pos < self.w.len() && self.w[pos] == a => pos + 1,
                Some(_) => continue,
            };
            let mut st = key.1.clone();
            st.pop();
            st.extend(r.push.iter().rev());
            let c = self.count(r.to, st, next)?;
            if !c.is_zero() {
                total += c * r.weight;
            }
        }
        self.active.remove(&key);
        self.memo.insert(key, total.clone());
        Ok(total)
    }
}

/// Expanding automaton for `N`: location 0 replaces the bottom symbol by
/// `N`, location 1 expands the top nonterminal by a rule or matches the top
/// terminal against the input. Accepting runs correspond to leftmost
/// derivations.
pub fn cfg_to_pda(g: &Grammar, n: &str) -> Result<Pda> {
    let n = g.nonterminal(n)?;
    let nn = g.nonterminals().len();
    let nt = g.terminals().len();
    let sym = |s: Sym| match s {
        Sym::N(m) => m,
        Sym::T(t) => nn + t,
    };
    let bottom = nn + nt;
    let mut stack: Vec<String> = g.nonterminals().iter().map(|s| format!("N:{s}")).collect();
    stack.extend(g.terminals().iter().map(|s| format!("T:{s}")));
    stack.push("bottom".into());
    let mut rules = vec![PdaRule {
        from: 0,
        top: bottom,
        input: None,
        to: 1,
        push: vec![n],
        weight: 1,
    }];
    for r in g.rules() {
        rules.push(PdaRule {
            from: 1,
            top: r.lhs,
            input: None,
            to: 1,
            push: r.rhs.iter().map(|&s| sym(s)).collect(),
            weight: r.weight,
        });
    }
    for t in 0..nt {
        rules.push(PdaRule {
            from: 1,
            top: nn + t,
            input: Some(t),
            to: 1,
            push: vec![],
            weight: 1,
        });
    }
    let mut min_yield = vec![1; nn + nt];
    min_yield.push(0);
    Ok(Pda {
        input: g.terminals().to_vec(),
        stack,
        locations: 2,
        initial: 0,
        bottom,
        accepting: vec![false, true],
        rules,
        min_yield,
        supply: vec![0, 0],
        scale: 1,
    })
}

/// `h(a_i) = w_i`, each image a nonempty word over the target alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homomorphism {
    source: Vec<String>,
    images: Vec<Vec<usize>>,
}

impl Homomorphism {
    pub fn new(source: Vec<String>, images: Vec<Vec<usize>>) -> Result<Homomorphism> {
        if source.len() != images.len() {
            return Err(Error::Invalid("one image per source letter".into()));
        }
        if let Some(i) = images.iter().position(|w| w.is_empty()) {
            return Err(Error::Invalid(format!("image of `{}` is empty", source[i])));
        }
        Ok(Homomorphism { source, images })
    }

    /// Source letters `a1, ..., ak`.
    pub fn from_words(images: Vec<Vec<usize>>) -> Result<Homomorphism> {
        let source = (1..=images.len()).map(|i| format!("a{i}")).collect();
        Homomorphism::new(source, images)
    }

    pub fn source(&self) -> &[String] {
        &self.source
    }

    pub fn images(&self) -> &[Vec<usize>] {
        &self.images
    }

    pub fn apply(&self, w: &[usize]) -> Vec<usize> {
        w.iter().flat_map(|&a| self.images[a].iter().copied()).collect()
    }
}

/// Automaton on source letters whose runs on `w` correspond to the runs of
/// `p` on `h(w)`. Locations pair a location of `p` with a buffer holding a
/// suffix of some image; reading `a_i` fills the empty buffer with `w_i`, and
/// `p` moves, on input or not, only while the buffer is nonempty.
///
/// This is a bijection on runs because in the automata built here every
/// silent move precedes some input letter.
pub fn pda_inverse_hom(p: &Pda, h: &Homomorphism) -> Result<Pda> {
    if let Some(&t) = h.images.iter().flatten().find(|&&t| t >= p.input.len()) {
        return Err(Error::Invalid(format!("image letter {t} is not in the automaton alphabet")));
    }
    // buffer 0 is empty; then (i, offset) for offset < |w_i|
    let mut first = Vec::new(); // first letter of each buffer
    let mut next = Vec::new(); // buffer after consuming it
    let mut len = Vec::new();
    let mut start = Vec::new();
    first.push(usize::MAX);
    next.push(0);
    len.push(0u32);
    for w in &h.images {
        let base = first.len();
        start.push(base);
        for (off, &a) in w.iter().enumerate() {
            first.push(a);
            next.push(if off + 1 == w.len() { 0 } else { base + off + 1 });
            len.push((w.len() - off) as u32);
        }
    }
    let nb = first.len();
    let loc = |q: usize, b: usize| q * nb + b;
    let mut rules = Vec::new();
    for r in &p.rules {
        for b in 1..nb {
            match r.input {
                None => rules.push(PdaRule {
                    from: loc(r.from, b),
                    to: loc(r.to, b),
                    input: None,
                    ..r.clone()
                }),
                Some(a) if a == first[b] => rules.push(PdaRule {
                    from: loc(r.from, b),
                    to: loc(r.to, next[b]),
                    input: None,
                    ..r.clone()
                }),
                Some(_) => {}
            }
        }
    }
    for q in 0..p.locations {
        for x in 0..p.stack.len() {
            for (i, &s) in start.iter().enumerate() {
                rules.push(PdaRule {
                    from: loc(q, 0),
                    top: x,
                    input: Some(i),
                    to: loc(q, s),
                    push: vec![x],
                    weight: 1,
                });
            }
        }
    }
    let max_image = h.images.iter().map(Vec::len).max().unwrap_or(1) as u32;
    let mut accepting = vec![false; p.locations * nb];
    let mut supply = vec![0; p.locations * nb];
    for q in 0..p.locations {
        accepting[loc(q, 0)] = p.accepting[q];
        for b in 0..nb {
            supply[loc(q, b)] = p.supply[q] + len[b] * p.scale;
        }
    }
    Ok(Pda {
        input: h.source.clone(),
        stack: p.stack.clone(),
        locations: p.locations * nb,
        initial: loc(p.initial, 0),
        bottom: p.bottom,
        accepting,
        rules,
        min_yield: p.min_yield.clone(),
        supply,
        scale: p.scale * max_image,
    })
}

type RawRules = HashMap<(usize, Vec<Sym>), u64>;

fn add_rule(rules: &mut RawRules, lhs: usize, rhs: Vec<Sym>, w: u64) -> Result<()> {
    let e = rules.entry((lhs, rhs)).or_insert(0);
    *e = e.checked_add(w).ok_or_else(overflow)?;
    Ok(())
}

fn overflow() -> Error {
    Error::Invalid("rule weight overflows 64 bits".into())
}

/// Grammar with the same multiplicities as `p`, and its start nonterminal.
///
/// Triples `[q X r]` derive the inputs that take `p` from `q` with `X` on
/// top to `r` with `X` popped. Empty and unit rules from silent moves are
/// then removed with their multiplicities folded into the remaining rules,
/// which needs every nonterminal to have finitely many empty and unit
/// derivations (true for the automata built here; otherwise an error).
pub fn pda_to_cfg(p: &Pda) -> Result<(Grammar, String)> {
    let l = p.locations;
    let xs = p.stack.len();
    let triple = |q: usize, x: usize, r: usize| 1 + (q * xs + x) * l + r;
    let n_total = 1 + l * xs * l;
    let mut by_state: HashMap<(usize, usize), Vec<&PdaRule>> = HashMap::new();
    for r in &p.rules {
        by_state.entry((r.from, r.top)).or_default().push(r);
    }
    let mut raw: RawRules = HashMap::new();
    let mut seen = vec![false; n_total];
    let mut work = Vec::new();
    for f in (0..l).filter(|&f| p.accepting[f]) {
        let t = triple(p.initial, p.bottom, f);
        add_rule(&mut raw, 0, vec![Sym::N(t)], 1)?;
        if !seen[t] {
            seen[t] = true;
            work.push((p.initial, p.bottom, f));
        }
    }
    while let Some((q, x, r)) = work.pop() {
        let lhs = triple(q, x, r);
        for rule in by_state.get(&(q, x)).map(Vec::as_slice).unwrap_or(&[]) {
            let head: Vec<Sym> = rule.input.map(Sym::T).into_iter().collect();
            let m = rule.push.len();
            if m == 0 {
                if rule.to == r {
                    add_rule(&mut raw, lhs, head, rule.weight)?;
                }
                continue;
            }
            // intermediate locations s_1 .. s_{m-1}
            let mut mids = vec![0usize; m - 1];
            loop {
                let mut rhs = head.clone();
                let mut cur = rule.to;
                for (j, &y) in rule.push.iter().enumerate() {
                    let nxt = if j + 1 == m { r } else { mids[j] };
                    let t = triple(cur, y, nxt);
                    if !seen[t] {
                        seen[t] = true;
                        work.push((cur, y, nxt));
                    }
                    rhs.push(Sym::N(t));
                    cur = nxt;
                }
                add_rule(&mut raw, lhs, rhs, rule.weight)?;
                let mut i = 0;
                while i < mids.len() && mids[i] + 1 == l {
                    mids[i] = 0;
                    i += 1;
                }
                if i == mids.len() {
                    break;
                }
                mids[i] += 1;
            }
        }
    }
    let raw = drop_unproductive(raw, n_total);
    let raw = eliminate_empty(raw, n_total)?;
    let raw = eliminate_units(raw, n_total)?;

    let mut prefix = "n".to_string();
    while p.input.iter().any(|t| t.starts_with(&prefix)) {
        prefix.push('_');
    }
    let start_name = format!("{prefix}start");
    let mut names = vec![start_name.clone()];
    for q in 0..l {
        for x in 0..xs {
            for r in 0..l {
                names.push(format!("{prefix}{q}_{x}_{r}"));
            }
        }
    }
    let mut rules: Vec<Rule> = raw
        .into_iter()
        .map(|((lhs, rhs), weight)| Rule { lhs, rhs, weight })
        .collect();
    rules.sort_by(|a, b| (a.lhs, &a.rhs).cmp(&(b.lhs, &b.rhs)));
    let g = Grammar::new(p.input.clone(), names, Some(0), rules)?;
    let g = g.trim(&[&start_name])?;
    Ok((g, start_name))
}

fn drop_unproductive(raw: RawRules, n: usize) -> RawRules {
    let mut prod = vec![false; n];
    loop {
        let mut changed = false;
        for (lhs, rhs) in raw.keys() {
            if !prod[*lhs]
                && rhs.iter().all(|s| match *s {
                    Sym::T(_) => true,
                    Sym::N(m) => prod[m],
                })
            {
                prod[*lhs] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    raw.into_iter()
        .filter(|((lhs, rhs), _)| {
            prod[*lhs]
                && rhs.iter().all(|s| match *s {
                    Sym::T(_) => true,
                    Sym::N(m) => prod[m],
                })
        })
        .collect()
}

/// Number of derivations of the empty word from each nonterminal.
fn empty_counts(raw: &RawRules, n: usize) -> Result<Vec<u64>> {
    let mut nullable = vec![false; n];
    loop {
        let mut changed = false;
        for (lhs, rhs) in raw.keys() {
            if !nullable[*lhs] && rhs.iter().all(|s| matches!(*s, Sym::N(m) if nullable[m])) {
                nullable[*lhs] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut by_lhs: HashMap<usize, Vec<(&Vec<Sym>, u64)>> = HashMap::new();
    for ((lhs, rhs), &w) in raw {
        if nullable[*lhs] && rhs.iter().all(|s| matches!(*s, Sym::N(m) if nullable[m])) {
            by_lhs.entry(*lhs).or_default().push((rhs, w));
        }
    }
    // 0 = unvisited, 1 = in progress, 2 = done
    let mut state = vec![0u8; n];
    let mut count = vec![0u64; n];
    fn visit(
        a: usize,
        by_lhs: &HashMap<usize, Vec<(&Vec<Sym>, u64)>>,
        state: &mut [u8],
        count: &mut [u64],
    ) -> Result<()> {
        match state[a] {
            2 => return Ok(()),
            1 => {
                return Err(Error::Invalid(
                    "infinitely many derivations of the empty word".into(),
                ))
            }
            _ => {}
        }
        state[a] = 1;
        let mut total = 0u64;
        for (rhs, w) in by_lhs.get(&a).map(Vec::as_slice).unwrap_or(&[]) {
            let mut c = *w;
            for s in rhs.iter() {
                let Sym::N(m) = *s else { unreachable!() };
                visit(m, by_lhs, state, count)?;
                c = c.checked_mul(count[m]).ok_or_else(overflow)?;
            }
            total = total.checked_add(c).ok_or_else(overflow)?;
        }
        count[a] = total;
        state[a] = 2;
        Ok(())
    }
    for a in 0..n {
        if nullable[a] {
            visit(a, &by_lhs, &mut state, &mut count)?;
        }
    }
    Ok(count)
}

/// Drops empty rules; each rule is replaced by its variants with some
/// nullable occurrences erased, weighted by their empty-derivation counts.
fn eliminate_empty(raw: RawRules, n: usize) -> Result<RawRules> {
    let null = empty_counts(&raw, n)?;
    let mut out: RawRules = HashMap::new();
    for ((lhs, rhs), w) in raw {
        let pos: Vec<usize> = (0..rhs.len())
            .filter(|&i| matches!(rhs[i], Sym::N(m) if null[m] > 0))
            .collect();
        for mask in 0u64..(1u64 << pos.len()) {
            let mut weight = w;
            let mut dropped = vec![false; rhs.len()];
            for (j, &i) in pos.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    let Sym::N(m) = rhs[i] else { unreachable!() };
                    weight = weight.checked_mul(null[m]).ok_or_else(overflow)?;
                    dropped[i] = true;
                }
            }
            let kept: Vec<Sym> = rhs
                .iter()
                .zip(&dropped)
                .filter(|(_, &d)| !d)
                .map(|(s, _)| *s)
                .collect();
            if !kept.is_empty() {
                add_rule(&mut out, lhs, kept, weight)?;
            }
        }
    }
    Ok(out)
}

/// Replaces unit rules `A -> B` by `A -> alpha` for the non-unit rules
/// `B -> alpha`, weighted by the number of unit chains from `A` to `B`.
fn eliminate_units(raw: RawRules, n: usize) -> Result<RawRules> {
    let mut units: HashMap<usize, Vec<(usize, u64)>> = HashMap::new();
    let mut proper: HashMap<usize, Vec<(Vec<Sym>, u64)>> = HashMap::new();
    for ((lhs, rhs), w) in raw {
        match rhs.as_slice() {
            [Sym::N(m)] => units.entry(lhs).or_default().push((*m, w)),
            _ => proper.entry(lhs).or_default().push((rhs, w)),
        }
    }
    // chains[a]: (b, number of unit chains a ->* b), computed depth first
    let mut chains: Vec<Option<HashMap<usize, u64>>> = vec![None; n];
    let mut active = vec![false; n];
    fn visit(
        a: usize,
        units: &HashMap<usize, Vec<(usize, u64)>>,
        chains: &mut Vec<Option<HashMap<usize, u64>>>,
        active: &mut [bool],
    ) -> Result<()> {
        if chains[a].is_some() {
            return Ok(());
        }
        if active[a] {
            return Err(Error::Invalid("cycle of unit rules".into()));
        }
        active[a] = true;
        let mut map: HashMap<usize, u64> = HashMap::from([(a, 1)]);
        for &(b, w) in units.get(&a).map(Vec::as_slice).unwrap_or(&[]) {
            visit(b, units, chains, active)?;
            for (&c, &k) in chains[b].as_ref().expect("visited") {
                let add = w.checked_mul(k).ok_or_else(overflow)?;
                let e = map.entry(c).or_insert(0);
                *e = e.checked_add(add).ok_or_else(overflow)?;
            }
        }
        active[a] = false;
        chains[a] = Some(map);
        Ok(())
    }
    let mut out: RawRules = HashMap::new();
    let lhss: Vec<usize> = units.keys().chain(proper.keys()).copied().collect();
    for a in lhss {
        visit(a, &units, &mut chains, &mut active)?;
    }
    for (a, map) in chains.iter().enumerate() {
        let Some(map) = map else { continue };
        for (&b, &k) in map {
            for (rhs, w) in proper.get(&b).map(Vec::as_slice).unwrap_or(&[]) {
                add_rule(&mut out, a, rhs.clone(), k.checked_mul(*w).ok_or_else(overflow)?)?;
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Equivalence

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// Letter counts in terminal declaration order.
    pub parikh: MultiIndex,
    pub word: String,
    pub count1: String,
    pub count2: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceVerdict {
    pub equivalent: bool,
    pub scope: Scope,
    pub bound: u64,
    /// Equivalence is shown only through the degree bound.
    pub conditional: bool,
    pub heuristic_bound: bool,
    pub engine: Engine,
    pub order: Vec<String>,
    pub witness: Option<Witness>,
    pub trace: Vec<String>,
}

/// What an `equivalent` verdict covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    /// Equal multiplicities on every word.
    Multiplicity,
    /// Equal multiplicities on every word of the bounded restriction.
    Restricted,
    /// Equal census series only: the languages are not letter-bounded, so
    /// words with the same Parikh vector may still differ.
    ParikhImage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EquivOptions {
    pub bounds: BoundConfig,
    /// `None` picks Hensel for small systems and Kleene otherwise.
    pub engine: Option<Engine>,
}

/// Census systems with more variables than this use the Kleene engine
/// unless an engine is requested.
pub const HENSEL_MAX_VARS: usize = 6;

fn stage<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ Error::Stage { .. } => e,
        e => Error::Stage {
            stage: name.into(),
            message: e.to_string(),
        },
    })
}

/// `[[N1]] = [[N2]]` for nonterminals whose languages are letter-bounded for
/// `order` (found automatically when `None`).
pub fn multiplicity_equiv_letter_bounded(
    g: &Grammar,
    n1: &str,
    n2: &str,
    order: Option<&[usize]>,
    opts: &EquivOptions,
) -> Result<EquivalenceVerdict> {
    let mut trace = Vec::new();
    let mode = match order {
        Some(o) => OrderMode::Given(o),
        None => OrderMode::Required,
    };
    let mut v = equiv_census(g, n1, n2, mode, opts, &mut trace)?;
    v.trace = trace;
    Ok(v)
}

/// Compares census series without requiring letter-boundedness.
///
/// A difference always yields a word with differing counts, found among the
/// words of the witness Parikh vector. Equality means multiplicity
/// equivalence when a letter order bounds both languages
/// ([`Scope::Multiplicity`]) and only equal Parikh images otherwise
/// ([`Scope::ParikhImage`]).
pub fn census_equivalence(
    g: &Grammar,
    n1: &str,
    n2: &str,
    opts: &EquivOptions,
) -> Result<EquivalenceVerdict> {
    let mut trace = Vec::new();
    let mut v = equiv_census(g, n1, n2, OrderMode::Optional, opts, &mut trace)?;
    v.trace = trace;
    Ok(v)
}

/// How the letter order of an equivalence query is obtained.
#[derive(Clone, Copy)]
enum OrderMode<'a> {
    Given(&'a [usize]),
    /// Search; refuse if there is none.
    Required,
    /// Search; fall back to comparing Parikh images.
    Optional,
}

fn equiv_census(
    g: &Grammar,
    n1: &str,
    n2: &str,
    mode: OrderMode<'_>,
    opts: &EquivOptions,
    trace: &mut Vec<String>,
) -> Result<EquivalenceVerdict> {
    let order = match mode {
        OrderMode::Given(o) => {
            for n in [n1, n2] {
                if !check_letter_bounded(g, n, o)? {
                    return Err(Error::NotLetterBounded(format!(
                        "L({n}) is not contained in {}",
                        o.iter()
                            .map(|&a| format!("{}*", g.terminals()[a]))
                            .collect::<Vec<_>>()
                            .join(" ")
                    )));
                }
            }
            Some(o.to_vec())
        }
        OrderMode::Required => Some(letter_order(g, &[n1, n2])?.ok_or_else(|| {
            Error::NotLetterBounded(format!("no letter order bounds both L({n1}) and L({n2})"))
        })?),
        OrderMode::Optional => letter_order(g, &[n1, n2])?,
    };
    let names: Vec<String> = order
        .iter()
        .flatten()
        .map(|&a| g.terminals()[a].clone())
        .collect();
    let scope = match &order {
        Some(_) => {
            trace.push(format!("letter-bounded: {}", names.join(" ")));
            Scope::Multiplicity
        }
        None => {
            trace.push("not letter-bounded: comparing Parikh images".into());
            Scope::ParikhImage
        }
    };

    let t = g.trim(&[n1, n2])?;
    let sys = t.census_system()?;
    let (i1, i2) = (t.nonterminal(n1)?, t.nonterminal(n2)?);
    let diff = sys.with_difference(i1, i2, "d")?;
    trace.push(format!("census: {} equations", sys.l()));
    let engine = opts.engine.unwrap_or(if diff.l() <= HENSEL_MAX_VARS {
        Engine::Hensel
    } else {
        Engine::Kleene
    });
    let z = stage("eq_alg", eq_alg_with(&diff, &opts.bounds, engine))?;
    trace.push(format!("eq_alg: engine {engine}, bound {}", z.bound));
    let witness = match &z.witness {
        None => None,
        Some(v) => {
            let expected: BigInt = z
                .witness_coefficient
                .as_deref()
                .and_then(|s| s.parse().ok())
                .unwrap_or_default();
            let found = match &order {
                Some(o) => {
                    let w = bounded_word(o, v);
                    let c1 = g.count_derivations(n1, &w)?;
                    let c2 = g.count_derivations(n2, &w)?;
                    if BigInt::from(c1.clone()) - BigInt::from(c2.clone()) != expected {
                        return Err(Error::Stage {
                            stage: "witness".into(),
                            message: format!(
                                "counts {c1} and {c2} do not confirm the census difference {expected}"
                            ),
                        });
                    }
                    (w, c1, c2)
                }
                None => differing_word(g, n1, n2, v)?,
            };
            let (w, c1, c2) = found;
            trace.push(format!("witness {} confirmed by derivation counting", g.word_text(&w)));
            Some(Witness {
                parikh: v.clone(),
                word: g.word_text(&w),
                count1: c1.to_string(),
                count2: c2.to_string(),
            })
        }
    };
    Ok(EquivalenceVerdict {
        equivalent: z.zero,
        scope,
        bound: z.bound,
        conditional: z.zero,
        heuristic_bound: z.heuristic_bound,
        engine,
        order: names,
        witness,
        trace: Vec::new(),
    })
}

/// Largest number of words with one Parikh vector searched for a witness.
pub const MAX_WITNESS_SEARCH: u64 = 1 << 20;

/// A word with Parikh vector `v` on which the counts differ. One exists
/// whenever the census coefficients at `v` differ.
fn differing_word(
    g: &Grammar,
    n1: &str,
    n2: &str,
    v: &MultiIndex,
) -> Result<(Vec<usize>, BigUint, BigUint)> {
    let mut w: Vec<usize> = Vec::new();
    for (a, &e) in v.0.iter().enumerate() {
        w.extend(std::iter::repeat_n(a, e as usize));
    }
    let mut tried = 0u64;
    // multiset permutations in lexicographic order
    loop {
        let c1 = g.count_derivations(n1, &w)?;
        let c2 = g.count_derivations(n2, &w)?;
        if c1 != c2 {
            return Ok((w, c1, c2));
        }
        tried += 1;
        if tried >= MAX_WITNESS_SEARCH {
            break;
        }
        let Some(i) = (1..w.len()).rev().find(|&i| w[i - 1] < w[i]) else {
            break;
        };
        let j = (i..w.len()).rev().find(|&j| w[j] > w[i - 1]).expect("successor");
        w.swap(i - 1, j);
        w[i..].reverse();
    }
    Err(Error::Stage {
        stage: "witness".into(),
        message: format!("no word with Parikh vector {:?} separates the counts", v.0),
    })
}

/// The unique word of `order[0]* ... order[k-1]*` with Parikh vector `v`.
fn bounded_word(order: &[usize], v: &MultiIndex) -> Vec<usize> {
    let mut w = Vec::new();
    for &a in order {
        w.extend(std::iter::repeat_n(a, v.0[a] as usize));
    }
    w
}

/// `[[N1]]_w = [[N2]]_w` for all `w` in `w1* ... wk*`.
///
/// Each side goes through [`cfg_to_pda`], [`pda_inverse_hom`] for
/// `a_i -> w_i`, [`pda_to_cfg`] and a product with `a1* ... ak*`; the two
/// results are compared by census. A witness `a1^e1 ... ak^ek` is mapped to
/// `w1^e1 ... wk^ek` and confirmed on the original grammar.
pub fn multiplicity_equiv_bounded(
    g: &Grammar,
    n1: &str,
    n2: &str,
    words: &[Vec<usize>],
    opts: &EquivOptions,
) -> Result<EquivalenceVerdict> {
    let h = stage("homomorphism", Homomorphism::from_words(words.to_vec()))?;
    let identity: Vec<usize> = (0..h.source().len()).collect();
    let mut trace = Vec::new();
    // short right-hand sides keep the triple construction small
    let bin = stage("binarize", g.binarize())?;
    let mut sides = Vec::new();
    for n in [n1, n2] {
        let pda = stage("cfg_to_pda", cfg_to_pda(&bin, n))?;
        let inv = stage("pda_inverse_hom", pda_inverse_hom(&pda, &h))?;
        trace.push(format!(
            "pda_inverse_hom({n}): {} locations, {} rules",
            inv.locations(),
            inv.rules().len()
        ));
        let (cfg, start) = stage("pda_to_cfg", pda_to_cfg(&inv))?;
        trace.push(format!(
            "pda_to_cfg({n}): {} nonterminals, {} rules",
            cfg.nonterminals().len(),
            cfg.rules().len()
        ));
        let blocks = Dfa::letter_blocks(cfg.terminals(), &identity);
        let prod = stage("dfa_product", dfa_product(&cfg, &start, &blocks))?;
        trace.push(format!(
            "dfa_product({n}): {} nonterminals, {} rules",
            prod.nonterminals().len(),
            prod.rules().len()
        ));
        sides.push(prod);
    }
    let merged = stage("merge", sides[0].disjoint_union(&sides[1], "l_", "r_"))?;
    let mut v = equiv_census(
        &merged,
        "l_start",
        "r_start",
        OrderMode::Given(&identity),
        opts,
        &mut trace,
    )?;
    v.scope = Scope::Restricted;
    if let Some(wit) = v.witness.as_mut() {
        let image = h.apply(&bounded_word(&identity, &wit.parikh));
        let c1 = g.count_derivations(n1, &image)?;
        let c2 = g.count_derivations(n2, &image)?;
        if c1.to_string() != wit.count1 || c2.to_string() != wit.count2 {
            return Err(Error::Stage {
                stage: "witness".into(),
                message: format!(
                    "restricted counts {}/{} differ from original counts {c1}/{c2}",
                    wit.count1, wit.count2
                ),
            });
        }
        wit.word = g.word_text(&image);
        trace.push(format!("witness {} confirmed on the original grammar", wit.word));
    }
    v.trace = trace;
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::tests::{DYCK, EXAMPLE};
    use proptest::prelude::*;

    fn g(text: &str) -> Grammar {
        Grammar::parse(text).unwrap()
    }

    fn opts(d: u64) -> EquivOptions {
        EquivOptions {
            bounds: BoundConfig::Explicit { d },
            engine: None,
        }
    }

    const ANBN: &str = "terminals: a b\nnonterminals: S\nS -> a b | a S b\n";

    fn permutations(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(k - 1) {
            for i in 0..=p.len() {
                let mut q = p.clone();
                q.insert(i, k - 1);
                out.push(q);
            }
        }
        out
    }

    /// Membership of every word up to `len` in `order[0]* ... order[k-1]*`.
    fn bounded_by_enumeration(g: &Grammar, n: &str, order: &[usize], len: usize) -> bool {
        let blocks = Dfa::letter_blocks(g.terminals(), order);
        g.words_up_to(len)
            .iter()
            .all(|w| blocks.accepts(w) || g.count_derivations(n, w).unwrap().is_zero())
    }

    #[test]
    fn letter_bounded_checks() {
        let ex = g(EXAMPLE);
        let (c, d) = (2, 3);
        assert!(!check_letter_bounded(&ex, "Y", &[c, d, 0, 1]).unwrap());
        assert!(!bounded_by_enumeration(&ex, "Y", &[c, d, 0, 1], 6));
        let anbn = g(ANBN);
        assert!(check_letter_bounded(&anbn, "S", &[0, 1]).unwrap());
        assert!(bounded_by_enumeration(&anbn, "S", &[0, 1], 8));
        assert!(!check_letter_bounded(&anbn, "S", &[1, 0]).unwrap());
        let empty = g("terminals: a b\nnonterminals: S E\nS -> a\nE -> b E\n");
        for o in permutations(2) {
            assert!(check_letter_bounded(&empty, "E", &o).unwrap());
        }
        assert!(matches!(check_letter_bounded(&anbn, "S", &[0, 0]), Err(Error::BadOrder(_))));
        assert!(matches!(parse_order(&anbn, &["a"]), Err(Error::BadOrder(_))));
    }

    #[test]
    fn order_search() {
        assert_eq!(find_letter_bounded_order(&g(ANBN), "S").unwrap(), Some(vec![0, 1]));
        let swap = g("terminals: a b\nnonterminals: S\nS -> a b | b a\n");
        assert_eq!(find_letter_bounded_order(&swap, "S").unwrap(), None);
        let unary = g("terminals: a\nnonterminals: S\nS -> a | a S\n");
        assert_eq!(find_letter_bounded_order(&unary, "S").unwrap(), Some(vec![0]));
        let rev = g("terminals: a b c\nnonterminals: S\nS -> c b | c S b\n");
        assert_eq!(find_letter_bounded_order(&rev, "S").unwrap(), Some(vec![0, 2, 1]));
    }

    fn arb_grammar() -> impl Strategy<Value = Grammar> {
        // nonterminals S T over {a, b, c}; right-hand sides of length 1..=3
        let sym = prop_oneof![
            3 => (0usize..3).prop_map(Sym::T),
            1 => (0usize..2).prop_map(Sym::N),
        ];
        let rule = (0usize..2, prop::collection::vec(sym, 1..=3));
        prop::collection::vec(rule, 1..6).prop_map(|rs| {
            let mut rules: Vec<Rule> = rs
                .into_iter()
                .filter(|(_, rhs)| !(rhs.len() == 1 && matches!(rhs[0], Sym::N(_))))
                .map(|(lhs, rhs)| Rule { lhs, rhs, weight: 1 })
                .collect();
            rules.push(Rule { lhs: 1, rhs: vec![Sym::T(2)], weight: 1 });
            Grammar::new(
                vec!["a".into(), "b".into(), "c".into()],
                vec!["S".into(), "T".into()],
                Some(0),
                rules,
            )
            .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn order_search_is_exact(gr in arb_grammar()) {
            let found = find_letter_bounded_order(&gr, "S").unwrap();
            let any = permutations(3).into_iter().any(|o| check_letter_bounded(&gr, "S", &o).unwrap());
            prop_assert_eq!(found.is_some(), any);
            if let Some(o) = found {
                prop_assert!(check_letter_bounded(&gr, "S", &o).unwrap());
                prop_assert!(bounded_by_enumeration(&gr, "S", &o, 6));
            }
        }

        #[test]
        fn pda_round_trip(gr in arb_grammar()) {
            let pda = cfg_to_pda(&gr, "S").unwrap();
            let (back, start) = pda_to_cfg(&pda).unwrap();
            for w in gr.words_up_to(5) {
                let want = gr.count_derivations("S", &w).unwrap();
                prop_assert_eq!(pda.count_runs(&w).unwrap(), want.clone());
                prop_assert_eq!(back.count_derivations(&start, &w).unwrap(), want);
            }
        }
    }

    #[test]
    fn pda_counts() {
        for text in [EXAMPLE, DYCK] {
            let gr = g(text);
            for n in gr.nonterminals() {
                let pda = cfg_to_pda(&gr, n).unwrap();
                let (back, start) = pda_to_cfg(&pda).unwrap();
                for w in gr.words_up_to(6) {
                    let want = gr.count_derivations(n, &w).unwrap();
                    assert_eq!(pda.count_runs(&w).unwrap(), want, "{n} {}", gr.word_text(&w));
                    assert_eq!(back.count_derivations(&start, &w).unwrap(), want);
                }
            }
        }
        let single = g("terminals: a b\nnonterminals: S\nS -> a\n");
        let pda = cfg_to_pda(&single, "S").unwrap();
        assert_eq!(pda.count_runs(&[0]).unwrap(), BigUint::from(1u32));
        assert!(pda.count_runs(&[0, 0]).unwrap().is_zero());
        assert!(pda.count_runs(&[1]).unwrap().is_zero());
        assert!(pda.count_runs(&[]).unwrap().is_zero());
        let dyck = g(DYCK);
        let p = cfg_to_pda(&dyck, "S").unwrap();
        assert_eq!(p.count_runs(&dyck.word("aabb").unwrap()).unwrap(), BigUint::from(1u32));
    }

    #[test]
    fn inverse_homomorphism() {
        let dyck = g(DYCK);
        let pda = cfg_to_pda(&dyck, "S").unwrap();
        let id = Homomorphism::new(dyck.terminals().to_vec(), vec![vec![0], vec![1]]).unwrap();
        let inv = pda_inverse_hom(&pda, &id).unwrap();
        for w in dyck.words_up_to(4) {
            assert_eq!(inv.count_runs(&w).unwrap(), pda.count_runs(&w).unwrap());
        }
        let ab = Homomorphism::from_words(vec![dyck.word("ab").unwrap()]).unwrap();
        let inv = pda_inverse_hom(&pda, &ab).unwrap();
        assert_eq!(inv.count_runs(&[0]).unwrap(), BigUint::from(1u32));
        let ba = Homomorphism::from_words(vec![dyck.word("ba").unwrap()]).unwrap();
        let never = pda_inverse_hom(&pda, &ba).unwrap();
        let ex = g(EXAMPLE);
        let h = Homomorphism::from_words(vec![ex.word("ab").unwrap(), ex.word("cd").unwrap(), ex.word("a").unwrap()]).unwrap();
        let exp = cfg_to_pda(&ex, "X").unwrap();
        let exinv = pda_inverse_hom(&exp, &h).unwrap();
        let src = Grammar::new(h.source().to_vec(), vec!["S".into()], None, vec![]).unwrap();
        for w in src.words_up_to(4) {
            assert!(never.count_runs(&vec![0; w.len()]).unwrap().is_zero());
            assert_eq!(
                exinv.count_runs(&w).unwrap(),
                ex.count_derivations("X", &h.apply(&w)).unwrap(),
            );
        }
        assert!(Homomorphism::from_words(vec![vec![]]).is_err());
    }

    /// All four stages against direct counting on `a1* ... ak*`.
    #[test]
    fn pipeline_preserves_multiplicities() {
        let ex = g(EXAMPLE);
        let words = vec![ex.word("a").unwrap(), ex.word("cd").unwrap(), ex.word("b").unwrap()];
        let h = Homomorphism::from_words(words).unwrap();
        let bin = ex.binarize().unwrap();
        for n in ["X", "Y"] {
            let inv = pda_inverse_hom(&cfg_to_pda(&bin, n).unwrap(), &h).unwrap();
            let (cfg, start) = pda_to_cfg(&inv).unwrap();
            let prod = dfa_product(&cfg, &start, &Dfa::letter_blocks(cfg.terminals(), &[0, 1, 2])).unwrap();
            assert!(check_letter_bounded(&prod, "start", &[0, 1, 2]).unwrap());
            for w in prod.words_up_to(4) {
                let want = if Dfa::letter_blocks(prod.terminals(), &[0, 1, 2]).accepts(&w) {
                    ex.count_derivations(n, &h.apply(&w)).unwrap()
                } else {
                    BigUint::zero()
                };
                assert_eq!(prod.count_derivations("start", &w).unwrap(), want, "{n} {w:?}");
            }
        }
    }

    #[test]
    fn letter_bounded_equivalence() {
        let two = g("terminals: a b\nnonterminals: S T\nS -> a b | a S b\nT -> a b | a T b\n");
        let v = multiplicity_equiv_letter_bounded(&two, "S", "T", None, &opts(6)).unwrap();
        assert!(v.equivalent && v.conditional && v.witness.is_none());
        assert_eq!(v.order, ["a", "b"]);
        let diff = g("terminals: a b\nnonterminals: S T\nS -> a b | a S b\nT -> a b | a T b | a a b b\n");
        let v = multiplicity_equiv_letter_bounded(&diff, "S", "T", Some(&[0, 1]), &opts(6)).unwrap();
        let w = v.witness.unwrap();
        assert!(!v.equivalent);
        assert_eq!((w.word.as_str(), w.count1.as_str(), w.count2.as_str()), ("aabb", "1", "2"));
        let ex = g(EXAMPLE);
        assert!(matches!(
            multiplicity_equiv_letter_bounded(&ex, "X", "Y", None, &opts(4)),
            Err(Error::NotLetterBounded(_))
        ));
    }

    #[test]
    fn census_level_equivalence() {
        let ex = g(EXAMPLE);
        let v = census_equivalence(&ex, "X", "Y", &opts(4)).unwrap();
        assert!(!v.equivalent);
        let w = v.witness.unwrap();
        assert_eq!(w.parikh.total_degree(), 2);
        assert_eq!((w.word.as_str(), w.count1.as_str(), w.count2.as_str()), ("cd", "0", "1"));
        let pair = g("terminals: a b\nnonterminals: S T\nS -> a b | a S b | a S b S\nT -> a S b S | a b | a T b\n");
        let v = census_equivalence(&pair, "S", "T", &opts(8)).unwrap();
        assert!(v.equivalent);
        assert_eq!(v.scope, Scope::ParikhImage);
        let two = g("terminals: a b\nnonterminals: S T\nS -> a b | a S b\nT -> a T b | a b\n");
        assert_eq!(census_equivalence(&two, "S", "T", &opts(8)).unwrap().scope, Scope::Multiplicity);
        // same census, different words: a b vs b a
        let swap = g("terminals: a b\nnonterminals: S T\nS -> a b\nT -> b a\n");
        let v = census_equivalence(&swap, "S", "T", &opts(4)).unwrap();
        assert!(v.equivalent && v.scope == Scope::ParikhImage);
    }

    #[test]
    fn bounded_equivalence() {
        let ex = g(EXAMPLE);
        let letters: Vec<Vec<usize>> = (0..4).map(|t| vec![t]).collect();
        let v = multiplicity_equiv_bounded(&ex, "X", "Y", &letters, &opts(3)).unwrap();
        assert!(!v.equivalent);
        let w = v.witness.unwrap();
        assert_eq!((w.word.as_str(), w.count1.as_str(), w.count2.as_str()), ("cd", "0", "1"));
        assert!(v.trace.iter().any(|t| t.starts_with("pda_to_cfg")));

        let same = multiplicity_equiv_bounded(&ex, "Y", "Y", &letters, &opts(3)).unwrap();
        assert!(same.equivalent);

        // Dyck grammar and a variant: equal on a*b*, different on (aabb)*(ab)*
        let pair = g("terminals: a b\nnonterminals: S T\nS -> a b | a S b | a S b S\nT -> a b | a T b | a T T b\n");
        let ab = vec![vec![0], vec![1]];
        assert!(multiplicity_equiv_bounded(&pair, "S", "T", &ab, &opts(6)).unwrap().equivalent);
        let oracle_differs = pair.words_up_to(8).iter().any(|w| {
            pair.count_derivations("S", w).unwrap() != pair.count_derivations("T", w).unwrap()
        });
        assert!(oracle_differs);
        let split = vec![pair.word("aabb").unwrap(), pair.word("ab").unwrap()];
        let v = multiplicity_equiv_bounded(&pair, "S", "T", &split, &opts(2)).unwrap();
        assert!(!v.equivalent);
        let w = v.witness.unwrap();
        assert_eq!(w.word, "aabbab");
        assert_ne!(w.count1, w.count2);
    }

    #[test]
    fn unary_pipeline_matches_census() {
        let gr = g("terminals: a\nnonterminals: S T U\nS -> a | a S S\nT -> a | a T T\nU -> a a | a U\n");
        let a = vec![vec![0]];
        for (x, y) in [("S", "T"), ("S", "U"), ("T", "U")] {
            let direct = multiplicity_equiv_letter_bounded(&gr, x, y, None, &opts(6)).unwrap();
            let piped = multiplicity_equiv_bounded(&gr, x, y, &a, &opts(6)).unwrap();
            assert_eq!(direct.equivalent, piped.equivalent, "{x} {y}");
            assert_eq!(direct.witness.map(|w| w.word), piped.witness.map(|w| w.word));
        }
    }
}
