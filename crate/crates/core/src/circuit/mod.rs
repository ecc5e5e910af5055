//! Arithmetic circuits (straight-line programs) over the integers.
//!
//! A [`Circuit`] is an append-only list of gates in topological order with a
//! designated output. Circuits are built through [`CircuitBuilder`], which
//! shares input and constant gates and folds trivial operations (`x + 0`,
//! `x * 1`, `x * 0`, constant arithmetic).

mod gadgets;
mod reverse;

pub use gadgets::{
    adjugate_circuits, balance_alternate, determinant_circuit, geometric_sum_circuit,
    is_balanced_alternating,
};
pub use reverse::{degree_probe, degree_reversal_circuit, DegreeProbe};

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::algebra::{Algebra, ModRing};
use crate::poly::{is_ident_char, is_ident_start, MultiIndex, PolyRing, Polynomial};
use crate::series::{BigCoeffs, CoeffRing, I128Coeffs, Layout, ModCoeffs, SeriesRing, TruncatedSeries};
use crate::{Error, Result};

/// One gate. Operands index strictly earlier gates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Gate {
    Input(usize),
    Const(BigInt),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
}

impl Gate {
    pub fn operands(&self) -> Option<(usize, usize)> {
        match *self {
            Gate::Add(a, b) | Gate::Sub(a, b) | Gate::Mul(a, b) => Some((a, b)),
            Gate::Input(_) | Gate::Const(_) => None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.operands().is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    vars: Vec<String>,
    gates: Vec<Gate>,
    output: usize,
}

impl Circuit {
    /// Checks topological order, input indices and the output index.
    pub fn new(vars: Vec<String>, gates: Vec<Gate>, output: usize) -> Result<Circuit> {
        for (i, g) in gates.iter().enumerate() {
            match g {
                Gate::Input(v) if *v >= vars.len() => {
                    return Err(Error::Invalid(format!("gate {i} reads unknown input {v}")))
                }
                Gate::Add(a, b) | Gate::Sub(a, b) | Gate::Mul(a, b) if *a >= i || *b >= i => {
                    return Err(Error::Invalid(format!(
                        "gate {i} uses a later or equal gate"
                    )))
                }
                _ => {}
            }
        }
        if output >= gates.len() {
            return Err(Error::Invalid(format!("output g{output} does not exist")));
        }
        Ok(Circuit {
            vars,
            gates,
            output,
        })
    }

    /// The circuit for the constant `c`.
    pub fn constant(vars: &[String], c: impl Into<BigInt>) -> Circuit {
        Circuit {
            vars: vars.to_vec(),
            gates: vec![Gate::Const(c.into())],
            output: 0,
        }
    }

    /// The circuit for the indeterminate `vars[i]`.
    pub fn input(vars: &[String], i: usize) -> Circuit {
        assert!(i < vars.len());
        Circuit {
            vars: vars.to_vec(),
            gates: vec![Gate::Input(i)],
            output: 0,
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn output(&self) -> usize {
        self.output
    }

    /// Number of gates.
    pub fn size(&self) -> usize {
        self.gates.len()
    }

    /// Drops gates the output does not depend on.
    pub fn prune(&self) -> Circuit {
        let live = reachable(&self.gates, &[self.output]);
        let mut remap = vec![usize::MAX; self.gates.len()];
        let mut gates = Vec::new();
        for (i, g) in self.gates.iter().enumerate() {
            if !live[i] {
                continue;
            }
            remap[i] = gates.len();
            gates.push(match g {
                Gate::Add(a, b) => Gate::Add(remap[*a], remap[*b]),
                Gate::Sub(a, b) => Gate::Sub(remap[*a], remap[*b]),
                Gate::Mul(a, b) => Gate::Mul(remap[*a], remap[*b]),
                leaf => leaf.clone(),
            });
        }
        Circuit {
            vars: self.vars.clone(),
            gates,
            output: remap[self.output],
        }
    }

    /// Evaluates in `alg` with one value per variable.
    pub fn evaluate<A: Algebra>(&self, alg: &A, inputs: &[A::Elem]) -> A::Elem {
        evaluate_outputs(&self.gates, &[self.output], alg, inputs)
            .pop()
            .expect("one output")
    }

    /// Formal degree: inputs count 1, constants 0, products add, sums take
    /// the maximum. Bounds both the total degree and every per-variable degree.
    pub fn formal_degree(&self) -> BigUint {
        formal_degrees(&self.gates)[self.output].clone()
    }

    /// Expands the represented polynomial exactly. Exponential in the
    /// multiplicative depth; intended for small circuits.
    pub fn to_polynomial(&self) -> Polynomial {
        let ring = PolyRing::new(&self.vars);
        let inputs: Vec<Polynomial> = (0..self.vars.len()).map(|i| ring.var(i)).collect();
        self.evaluate(&ring, &inputs)
    }

    /// Re-expresses the circuit over a larger variable list.
    pub fn embed(&self, vars: &[String]) -> Result<Circuit> {
        let map = self
            .vars
            .iter()
            .map(|v| {
                vars.iter()
                    .position(|w| w == v)
                    .ok_or_else(|| Error::MissingVariable(v.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        let gates = self
            .gates
            .iter()
            .map(|g| match g {
                Gate::Input(i) => Gate::Input(map[*i]),
                other => other.clone(),
            })
            .collect();
        Ok(Circuit {
            vars: vars.to_vec(),
            gates,
            output: self.output,
        })
    }

    /// Parses the line-oriented text format.
    pub fn parse(text: &str) -> Result<Circuit> {
        parse_circuit(text)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vars:")?;
        for v in &self.vars {
            write!(f, " {v}")?;
        }
        writeln!(f)?;
        for (i, g) in self.gates.iter().enumerate() {
            match g {
                Gate::Input(v) => writeln!(f, "g{i} = input {}", self.vars[*v])?,
                Gate::Const(c) => writeln!(f, "g{i} = const {c}")?,
                Gate::Add(a, b) => writeln!(f, "g{i} = add g{a} g{b}")?,
                Gate::Sub(a, b) => writeln!(f, "g{i} = sub g{a} g{b}")?,
                Gate::Mul(a, b) => writeln!(f, "g{i} = mul g{a} g{b}")?,
            }
        }
        writeln!(f, "output g{}", self.output)
    }
}

pub(crate) fn reachable(gates: &[Gate], outputs: &[usize]) -> Vec<bool> {
    let mut live = vec![false; gates.len()];
    for &o in outputs {
        live[o] = true;
    }
    for i in (0..gates.len()).rev() {
        if live[i] {
            if let Some((a, b)) = gates[i].operands() {
                live[a] = true;
                live[b] = true;
            }
        }
    }
    live
}

pub(crate) fn formal_degrees(gates: &[Gate]) -> Vec<BigUint> {
    let mut deg: Vec<BigUint> = Vec::with_capacity(gates.len());
    for g in gates {
        let d = match g {
            Gate::Input(_) => BigUint::one(),
            Gate::Const(_) => BigUint::zero(),
            Gate::Add(a, b) | Gate::Sub(a, b) => deg[*a].clone().max(deg[*b].clone()),
            Gate::Mul(a, b) => &deg[*a] + &deg[*b],
        };
        deg.push(d);
    }
    deg
}

/// Evaluates several outputs of one gate list in a single pass, skipping
/// unreachable gates and releasing values after their last use.
pub fn evaluate_outputs<A: Algebra>(
    gates: &[Gate],
    outputs: &[usize],
    alg: &A,
    inputs: &[A::Elem],
) -> Vec<A::Elem> {
    let live = reachable(gates, outputs);
    let mut last_use = vec![0usize; gates.len()];
    for (i, g) in gates.iter().enumerate() {
        if live[i] {
            if let Some((a, b)) = g.operands() {
                last_use[a] = i;
                last_use[b] = i;
            }
        }
    }
    for &o in outputs {
        last_use[o] = usize::MAX;
    }
    let mut vals: Vec<Option<A::Elem>> = vec![None; gates.len()];
    for (i, g) in gates.iter().enumerate() {
        if !live[i] {
            continue;
        }
        let v = match g {
            Gate::Input(k) => inputs[*k].clone(),
            Gate::Const(c) => alg.from_int(c),
            Gate::Add(a, b) => alg.add(val(&vals, *a), val(&vals, *b)),
            Gate::Sub(a, b) => alg.sub(val(&vals, *a), val(&vals, *b)),
            Gate::Mul(a, b) => alg.mul(val(&vals, *a), val(&vals, *b)),
        };
        vals[i] = Some(v);
        if let Some((a, b)) = g.operands() {
            if last_use[a] == i {
                vals[a] = None;
            }
            if last_use[b] == i {
                vals[b] = None;
            }
        }
    }
    outputs
        .iter()
        .map(|&o| vals[o].clone().expect("output evaluated"))
        .collect()
}

fn val<E>(vals: &[Option<E>], i: usize) -> &E {
    vals[i].as_ref().expect("operand evaluated before use")
}

// ---------------------------------------------------------------------------
// Builder

/// Incremental circuit construction with sharing and peephole folding.
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    vars: Vec<String>,
    gates: Vec<Gate>,
    consts: HashMap<BigInt, usize>,
    inputs: HashMap<usize, usize>,
}

impl CircuitBuilder {
    pub fn new(vars: &[String]) -> Self {
        CircuitBuilder {
            vars: vars.to_vec(),
            gates: Vec::new(),
            consts: HashMap::new(),
            inputs: HashMap::new(),
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends a gate verbatim (no sharing, no folding).
    pub fn push_raw(&mut self, g: Gate) -> usize {
        if let Some((a, b)) = g.operands() {
            assert!(a < self.gates.len() && b < self.gates.len(), "operand out of range");
        }
        self.gates.push(g);
        self.gates.len() - 1
    }

    pub fn input(&mut self, i: usize) -> usize {
        assert!(i < self.vars.len(), "input index out of range");
        if let Some(&g) = self.inputs.get(&i) {
            return g;
        }
        let g = self.push_raw(Gate::Input(i));
        self.inputs.insert(i, g);
        g
    }

    pub fn constant(&mut self, c: impl Into<BigInt>) -> usize {
        let c = c.into();
        if let Some(&g) = self.consts.get(&c) {
            return g;
        }
        let g = self.push_raw(Gate::Const(c.clone()));
        self.consts.insert(c, g);
        g
    }

    pub fn zero(&mut self) -> usize {
        self.constant(0)
    }

    pub fn one(&mut self) -> usize {
        self.constant(1)
    }

    pub fn as_const(&self, g: usize) -> Option<&BigInt> {
        match &self.gates[g] {
            Gate::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn add(&mut self, a: usize, b: usize) -> usize {
        match (self.as_const(a).cloned(), self.as_const(b).cloned()) {
            (Some(x), Some(y)) => self.constant(x + y),
            (Some(x), _) if x.is_zero() => b,
            (_, Some(y)) if y.is_zero() => a,
            _ => self.push_raw(Gate::Add(a, b)),
        }
    }

    pub fn sub(&mut self, a: usize, b: usize) -> usize {
        match (self.as_const(a).cloned(), self.as_const(b).cloned()) {
            (Some(x), Some(y)) => self.constant(x - y),
            (_, Some(y)) if y.is_zero() => a,
            _ => self.push_raw(Gate::Sub(a, b)),
        }
    }

    pub fn neg(&mut self, a: usize) -> usize {
        let z = self.zero();
        self.sub(z, a)
    }

    pub fn mul(&mut self, a: usize, b: usize) -> usize {
        match (self.as_const(a).cloned(), self.as_const(b).cloned()) {
            (Some(x), Some(y)) => self.constant(x * y),
            (Some(x), _) | (_, Some(x)) if x.is_zero() => self.zero(),
            (Some(x), _) if x.is_one() => b,
            (_, Some(y)) if y.is_one() => a,
            _ => self.push_raw(Gate::Mul(a, b)),
        }
    }

    /// `c * a` for an integer constant `c`.
    pub fn scale(&mut self, c: &BigInt, a: usize) -> usize {
        let k = self.constant(c.clone());
        self.mul(k, a)
    }

    pub fn sum(&mut self, terms: &[usize]) -> usize {
        let mut acc = self.zero();
        for &t in terms {
            acc = self.add(acc, t);
        }
        acc
    }

    pub fn product(&mut self, factors: &[usize]) -> usize {
        let mut acc = self.one();
        for &f in factors {
            acc = self.mul(acc, f);
        }
        acc
    }

    /// `a^e` by repeated squaring.
    pub fn pow(&mut self, a: usize, e: &BigUint) -> usize {
        let mut acc = self.one();
        let bits = e.bits();
        for i in (0..bits).rev() {
            acc = self.mul(acc, acc);
            if e.bit(i) {
                acc = self.mul(acc, a);
            }
        }
        acc
    }

    /// Copies `c` into this builder, matching variables by name. Returns the
    /// index of the copied output.
    pub fn append(&mut self, c: &Circuit) -> Result<usize> {
        let var_map = c
            .vars
            .iter()
            .map(|v| {
                self.vars
                    .iter()
                    .position(|w| w == v)
                    .ok_or_else(|| Error::MissingVariable(v.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        let live = reachable(&c.gates, &[c.output]);
        let mut remap = vec![usize::MAX; c.gates.len()];
        for (i, g) in c.gates.iter().enumerate() {
            if !live[i] {
                continue;
            }
            remap[i] = match g {
                Gate::Input(v) => self.input(var_map[*v]),
                Gate::Const(k) => self.constant(k.clone()),
                Gate::Add(a, b) => self.add(remap[*a], remap[*b]),
                Gate::Sub(a, b) => self.sub(remap[*a], remap[*b]),
                Gate::Mul(a, b) => self.mul(remap[*a], remap[*b]),
            };
        }
        Ok(remap[c.output])
    }

    /// Extracts the sub-circuit computing `output`, dropping unused gates.
    pub fn circuit(&self, output: usize) -> Circuit {
        Circuit {
            vars: self.vars.clone(),
            gates: self.gates.clone(),
            output,
        }
        .prune()
    }

    /// Finishes without pruning.
    pub fn finish_raw(self, output: usize) -> Circuit {
        Circuit {
            vars: self.vars,
            gates: self.gates,
            output,
        }
    }
}

// ---------------------------------------------------------------------------
// Evaluators

/// Value of the circuit at a point, modulo `p`.
pub fn eval_mod_p(c: &Circuit, assignment: &HashMap<String, u64>, p: u64) -> Result<u64> {
    let ring = ModRing::new(p)?;
    let inputs = c
        .vars
        .iter()
        .map(|v| {
            assignment
                .get(v)
                .map(|&x| x % p)
                .ok_or_else(|| Error::MissingVariable(v.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(c.evaluate(&ring, &inputs))
}

/// Image of the circuit after substituting truncated series for its
/// variables, exact through total degree `n` (coefficients reduced into
/// `[0, p)` when `p` is given).
pub fn eval_series(
    c: &Circuit,
    assignment: &HashMap<String, TruncatedSeries>,
    n: u32,
    p: Option<u64>,
) -> Result<TruncatedSeries> {
    let mut ambient: Option<Vec<String>> = None;
    let mut inputs = Vec::with_capacity(c.vars.len());
    for v in &c.vars {
        let s = assignment
            .get(v)
            .ok_or_else(|| Error::MissingVariable(v.clone()))?;
        if s.order_bound() < n {
            return Err(Error::InsufficientPrecision {
                requested: n,
                available: s.order_bound(),
            });
        }
        match &ambient {
            None => ambient = Some(s.symbols().to_vec()),
            Some(a) if a.as_slice() != s.symbols() => {
                return Err(Error::AmbientMismatch(a.clone(), s.symbols().to_vec()))
            }
            _ => {}
        }
        inputs.push(s.body().clone());
    }
    let ambient = ambient
        .or_else(|| assignment.values().next().map(|s| s.symbols().to_vec()))
        .unwrap_or_default();
    let layout = Layout::simplex(ambient.len(), n)?;
    let outs = eval_dense_outputs(c.gates(), &[c.output], &layout, &ambient, &inputs, p)?;
    Ok(TruncatedSeries::new(outs.into_iter().next().expect("one"), n))
}

/// Expands the circuit over its own variables through total degree `n`.
pub fn expand(c: &Circuit, n: u32, p: Option<u64>) -> Result<TruncatedSeries> {
    let layout = Layout::simplex(c.vars.len(), n)?;
    let inputs: Vec<Polynomial> = (0..c.vars.len())
        .map(|i| Polynomial::var(&c.vars, i))
        .collect();
    let outs = eval_dense_outputs(c.gates(), &[c.output], &layout, &c.vars, &inputs, p)?;
    Ok(TruncatedSeries::new(outs.into_iter().next().expect("one"), n))
}

/// Coefficient of `X^v` in the circuit's polynomial, optionally mod `p`.
/// Only monomials dividing `X^v` are tracked.
pub fn coefficient(c: &Circuit, v: &MultiIndex, p: Option<u64>) -> Result<BigInt> {
    if v.len() != c.vars.len() {
        return Err(Error::Invalid(format!(
            "multi-index has {} entries, circuit has {} variables",
            v.len(),
            c.vars.len()
        )));
    }
    let layout = Layout::boxed(v.0.clone(), v.total_degree())?;
    let inputs: Vec<Polynomial> = (0..c.vars.len())
        .map(|i| Polynomial::var(&c.vars, i))
        .collect();
    let outs = eval_dense_outputs(c.gates(), &[c.output], &layout, &c.vars, &inputs, p)?;
    Ok(outs[0].coeff(v))
}

/// Shared dense evaluation: inputs are polynomials over `symbols`, projected
/// into `layout`. Without a modulus the machine-word engine is tried first and
/// the exact engine is used if it overflows.
pub fn eval_dense_outputs(
    gates: &[Gate],
    outputs: &[usize],
    layout: &std::sync::Arc<Layout>,
    symbols: &[String],
    inputs: &[Polynomial],
    p: Option<u64>,
) -> Result<Vec<Polynomial>> {
    match p {
        Some(p) => {
            let ring = SeriesRing::new(layout.clone(), ModCoeffs::new(p)?);
            Ok(run_dense(&ring, gates, outputs, symbols, inputs))
        }
        None => {
            let ring = SeriesRing::new(layout.clone(), I128Coeffs::default());
            let out = run_dense(&ring, gates, outputs, symbols, inputs);
            if !ring.coeffs().overflowed() {
                return Ok(out);
            }
            let ring = SeriesRing::new(layout.clone(), BigCoeffs);
            Ok(run_dense(&ring, gates, outputs, symbols, inputs))
        }
    }
}

fn run_dense<R: CoeffRing>(
    ring: &SeriesRing<R>,
    gates: &[Gate],
    outputs: &[usize],
    symbols: &[String],
    inputs: &[Polynomial],
) -> Vec<Polynomial> {
    let dense: Vec<_> = inputs.iter().map(|p| ring.from_polynomial(p)).collect();
    evaluate_outputs(gates, outputs, ring, &dense)
        .iter()
        .map(|v| ring.to_polynomial(v, symbols))
        .collect()
}

// ---------------------------------------------------------------------------
// Text format

fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut vars: Vec<String> = Vec::new();
    let mut declared = false;
    let mut gates = Vec::new();
    let mut output = None;
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let col_of = |s: &str| s.as_ptr() as usize - raw.as_ptr() as usize + 1;
        let perr = |col: usize, msg: String| Error::Parse {
            line: line_no,
            column: col,
            message: msg,
        };
        if output.is_some() {
            return Err(perr(col_of(trimmed), "content after `output` line".into()));
        }
        if let Some(rest) = trimmed.strip_prefix("vars:") {
            if declared || !gates.is_empty() {
                return Err(perr(col_of(trimmed), "`vars:` must come first".into()));
            }
            declared = true;
            for name in rest.split_whitespace() {
                if !valid_ident(name) || vars.iter().any(|v| v == name) {
                    return Err(perr(col_of(name), format!("bad variable name `{name}`")));
                }
                vars.push(name.to_string());
            }
            continue;
        }
        let words: Vec<&str> = trimmed.split_whitespace().collect();
        if words[0] == "output" {
            if words.len() != 2 {
                return Err(perr(col_of(trimmed), "expected `output g<i>`".into()));
            }
            let o = gate_ref(words[1], gates.len()).ok_or_else(|| {
                perr(col_of(words[1]), format!("bad gate reference `{}`", words[1]))
            })?;
            output = Some(o);
            continue;
        }
        if words.len() < 3 || words[1] != "=" {
            return Err(perr(col_of(trimmed), "expected `g<i> = ...`".into()));
        }
        let expected = format!("g{}", gates.len());
        if words[0] != expected {
            return Err(perr(col_of(words[0]), format!("expected gate name `{expected}`")));
        }
        let arity = |n: usize| -> Result<()> {
            if words.len() != 3 + n {
                Err(perr(
                    col_of(words[2]),
                    format!("`{}` takes {n} operand(s)", words[2]),
                ))
            } else {
                Ok(())
            }
        };
        let gate = match words[2] {
            "input" => {
                arity(1)?;
                let name = words[3];
                let idx = match vars.iter().position(|v| v == name) {
                    Some(i) => i,
                    None if !declared && valid_ident(name) => {
                        vars.push(name.to_string());
                        vars.len() - 1
                    }
                    None => {
                        return Err(perr(col_of(name), format!("unknown variable `{name}`")))
                    }
                };
                Gate::Input(idx)
            }
            "const" => {
                arity(1)?;
                let c: BigInt = words[3]
                    .parse()
                    .map_err(|_| perr(col_of(words[3]), format!("bad integer `{}`", words[3])))?;
                Gate::Const(c)
            }
            op @ ("add" | "sub" | "mul") => {
                arity(2)?;
                let a = gate_ref(words[3], gates.len())
                    .ok_or_else(|| perr(col_of(words[3]), "bad operand".into()))?;
                let b = gate_ref(words[4], gates.len())
                    .ok_or_else(|| perr(col_of(words[4]), "bad operand".into()))?;
                match op {
                    "add" => Gate::Add(a, b),
                    "sub" => Gate::Sub(a, b),
                    _ => Gate::Mul(a, b),
                }
            }
            other => return Err(perr(col_of(words[2]), format!("unknown gate kind `{other}`"))),
        };
        gates.push(gate);
    }
    let output = output.ok_or(Error::Parse {
        line: text.lines().count().max(1),
        column: 1,
        message: "missing `output` line".into(),
    })?;
    Circuit::new(vars, gates, output)
}

fn gate_ref(s: &str, limit: usize) -> Option<usize> {
    let i: usize = s.strip_prefix('g')?.parse().ok()?;
    (i < limit).then_some(i)
}

fn valid_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if is_ident_start(c)) && cs.all(is_ident_char)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::syms;
    use proptest::prelude::*;

    fn x() -> Vec<String> {
        syms(&["x"])
    }

    #[test]
    fn mod_p_examples() {
        let zero = Circuit::constant(&x(), 0);
        let mut pt = HashMap::new();
        pt.insert("x".to_string(), 12345u64);
        assert_eq!(eval_mod_p(&zero, &pt, 101).unwrap(), 0);
        let mut b = CircuitBuilder::new(&x());
        let xi = b.input(0);
        let sq = b.mul(xi, xi);
        let c = b.circuit(sq);
        pt.insert("x".to_string(), 5);
        assert_eq!(eval_mod_p(&c, &pt, 7).unwrap(), 4);
        assert!(matches!(eval_mod_p(&c, &pt, 1), Err(Error::BadModulus(_))));
        assert!(matches!(
            eval_mod_p(&c, &HashMap::new(), 7),
            Err(Error::MissingVariable(_))
        ));
    }

    #[test]
    fn folding() {
        let mut b = CircuitBuilder::new(&x());
        let xi = b.input(0);
        let z = b.zero();
        let o = b.one();
        assert_eq!(b.add(xi, z), xi);
        assert_eq!(b.mul(o, xi), xi);
        assert_eq!(b.mul(xi, z), z);
        let two = b.constant(2);
        let six = b.constant(6);
        let eight = b.add(two, six);
        assert_eq!(b.as_const(eight), Some(&BigInt::from(8)));
        assert_eq!(b.input(0), xi);
    }

    #[test]
    fn text_round_trip() {
        let text = "vars: x y\ng0 = input x\ng1 = input y\ng2 = const -3\ng3 = mul g0 g1\ng4 = sub g3 g2\noutput g4\n";
        let c = Circuit::parse(text).unwrap();
        assert_eq!(c.to_string(), text);
        assert_eq!(
            c.to_polynomial(),
            Polynomial::parse("x*y + 3", &syms(&["x", "y"])).unwrap()
        );
    }

    #[test]
    fn text_without_header_collects_vars() {
        let c = Circuit::parse("g0 = input t\ng1 = add g0 g0\noutput g1").unwrap();
        assert_eq!(c.vars(), &["t".to_string()]);
    }

    #[test]
    fn text_errors() {
        let e = Circuit::parse("g0 = input x\ng1 = mul g0 g5\noutput g1").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, column: 13, .. }), "{e:?}");
        let e = Circuit::parse("g1 = input x\noutput g1").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, column: 1, .. }));
        assert!(Circuit::parse("g0 = input x").is_err());
        let e = Circuit::parse("vars: x\ng0 = input y\noutput g0").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, column: 12, .. }), "{e:?}");
    }

    #[test]
    fn series_of_zero_inputs() {
        let mut b = CircuitBuilder::new(&x());
        let xi = b.input(0);
        let s = b.add(xi, xi);
        let m = b.mul(s, xi);
        let c = b.circuit(m);
        let mut asg = HashMap::new();
        asg.insert("x".to_string(), TruncatedSeries::zero(&x(), 6));
        assert!(eval_series(&c, &asg, 6, None).unwrap().is_zero());
        assert!(matches!(
            eval_series(&c, &asg, 7, None),
            Err(Error::InsufficientPrecision { .. })
        ));
    }

    #[test]
    fn coefficient_in_box() {
        let v = syms(&["x", "y"]);
        let c = Circuit::parse("vars: x y\ng0 = input x\ng1 = input y\ng2 = const 1\ng3 = add g0 g1\ng4 = add g3 g2\ng5 = mul g4 g4\ng6 = mul g5 g5\noutput g6")
            .unwrap();
        // (1 + x + y)^4: coefficient of x y^2 is 4!/(1!2!1!) = 12
        assert_eq!(coefficient(&c, &MultiIndex(vec![1, 2]), None).unwrap(), BigInt::from(12));
        assert_eq!(coefficient(&c, &MultiIndex(vec![1, 2]), Some(5)).unwrap(), BigInt::from(2));
        let full = c.to_polynomial();
        assert_eq!(full.coeff(&MultiIndex(vec![2, 2])), BigInt::from(6));
        assert_eq!(v.len(), 2);
    }

    /// Random circuits over `k` variables with small constants.
    pub(crate) fn random_circuit(k: usize) -> impl Strategy<Value = Circuit> {
        let ops = prop::collection::vec((0u8..5, any::<prop::sample::Index>(), any::<prop::sample::Index>(), -3i64..4), 1..12);
        ops.prop_map(move |ops| {
            let names: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
            let mut gates: Vec<Gate> = (0..k).map(Gate::Input).collect();
            for (kind, a, b, c) in ops {
                let n = gates.len();
                gates.push(match kind {
                    0 => Gate::Const(BigInt::from(c)),
                    1 => Gate::Add(a.index(n), b.index(n)),
                    2 => Gate::Sub(a.index(n), b.index(n)),
                    _ => Gate::Mul(a.index(n), b.index(n)),
                });
            }
            let out = gates.len() - 1;
            Circuit::new(names, gates, out).unwrap()
        })
    }

    proptest! {
        #[test]
        fn series_and_point_evaluation_agree(
            c in random_circuit(2),
            pts in prop::collection::vec(0u64..1_000_000, 2),
        ) {
            let p = 1_000_003u64;
            let deg = c.formal_degree();
            let n: u32 = deg.try_into().unwrap_or(u32::MAX).min(40);
            prop_assume!(BigUint::from(n) == c.formal_degree());
            let full = expand(&c, n, Some(p)).unwrap();
            let ring = ModRing::new(p).unwrap();
            let from_series = full.body().evaluate(&ring, &pts);
            let mut asg = HashMap::new();
            asg.insert("x1".to_string(), pts[0]);
            asg.insert("x2".to_string(), pts[1]);
            prop_assert_eq!(from_series, eval_mod_p(&c, &asg, p).unwrap());
        }

        #[test]
        fn text_format_round_trips(c in random_circuit(3)) {
            let again = Circuit::parse(&c.to_string()).unwrap();
            prop_assert_eq!(&again, &c);
            prop_assert_eq!(again.to_string(), c.to_string());
        }

        #[test]
        fn prune_preserves_value(c in random_circuit(2)) {
            let p = c.prune();
            prop_assert!(p.size() <= c.size());
            prop_assert_eq!(p.to_polynomial(), c.to_polynomial());
        }
    }
}
