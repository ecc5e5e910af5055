//! Proper polynomial systems `y_i = P_i(X, Y)` and their quasiregular
//! solution.
//!
//! Two engines compute the solution. [`kleene_solve`] iterates
//! `A <- P(A)` in truncated arithmetic and serves as the reference.
//! [`hensel_step`] performs Newton iteration symbolically, producing circuits
//! for a numerator vector `g` and a shared denominator `q` with `a = g / q`;
//! [`polynomial_approximant`] turns those into division-free circuits `E_n`
//! agreeing with the solution below degree `2^n`.
//!
//! ## Iteration counts
//!
//! For a proper system the coefficient of degree `j` in `P(A)` depends only
//! on the coefficients of `A` below degree `j`: monomials of `Y`-degree at
//! most one carry a coefficient without constant term, and every other
//! monomial multiplies at least two quasiregular factors. Starting from zero,
//! iterate `t` is therefore exact below degree `t`, and `n + 1` iterations
//! determine everything through degree `n`.
//!
//! ## Newton step
//!
//! With `d` the largest `Y`-degree, `F = q^d f(g/q)` and
//! `M = q^(d-1) Df(g/q)` are polynomial in `g, q`, and
//! `a' = (g det M - adj(M) F) / (q det M)`. The new denominator keeps
//! constant term 1 because `Df(0) = I` for proper systems.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand::Rng;

use crate::algebra::{Algebra, Integers};
use crate::circuit::{eval_dense_outputs, evaluate_outputs, Circuit, CircuitBuilder};
use crate::poly::{is_ident_char, is_ident_start, parse_expr, MultiIndex, Polynomial};
use crate::series::{BigCoeffs, CoeffRing, I128Coeffs, Layout, ModCoeffs, SeriesRing, TruncatedSeries};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolySystem {
    indets: Vec<String>,
    vars: Vec<String>,
    /// `P_i` over the ambient `indets ++ vars`.
    rhs: Vec<Polynomial>,
}

/// A `(equation, Y-monomial)` pair breaking properness.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Violation {
    pub equation: usize,
    pub var: String,
    /// The offending `Y`-monomial, `1` for the constant part.
    pub monomial: String,
    /// Constant term of its coefficient.
    pub constant: String,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct ProperReport {
    pub violations: Vec<Violation>,
}

impl ProperReport {
    pub fn is_proper(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ProperReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_proper() {
            return write!(f, "proper");
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| {
                format!(
                    "equation {} ({}): monomial {} has coefficient with constant term {}",
                    v.equation + 1,
                    v.var,
                    v.monomial,
                    v.constant
                )
            })
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

impl PolySystem {
    /// `rhs[i]` must live over `indets ++ vars`.
    pub fn new(indets: Vec<String>, vars: Vec<String>, rhs: Vec<Polynomial>) -> Result<Self> {
        let ambient: Vec<String> = indets.iter().chain(&vars).cloned().collect();
        for (i, n) in ambient.iter().enumerate() {
            if ambient[..i].contains(n) {
                return Err(Error::Invalid(format!("symbol `{n}` declared twice")));
            }
        }
        if rhs.len() != vars.len() {
            return Err(Error::Invalid(format!(
                "{} variables but {} equations",
                vars.len(),
                rhs.len()
            )));
        }
        for p in &rhs {
            if p.symbols() != ambient.as_slice() {
                return Err(Error::AmbientMismatch(p.symbols().to_vec(), ambient));
            }
        }
        Ok(PolySystem { indets, vars, rhs })
    }

    pub fn indets(&self) -> &[String] {
        &self.indets
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn rhs(&self) -> &[Polynomial] {
        &self.rhs
    }

    pub fn ambient(&self) -> Vec<String> {
        self.indets.iter().chain(&self.vars).cloned().collect()
    }

    /// Number of indeterminates `k`.
    pub fn k(&self) -> usize {
        self.indets.len()
    }

    /// Number of variables (equations) `l`.
    pub fn l(&self) -> usize {
        self.vars.len()
    }

    /// Largest total degree over `X` and `Y` jointly (at least 1).
    pub fn degree(&self) -> u32 {
        self.rhs
            .iter()
            .filter_map(|p| p.total_degree())
            .max()
            .unwrap_or(0)
            .max(1)
    }

    /// Largest degree in the variables `Y` alone.
    pub fn y_degree(&self) -> u32 {
        let ys = self.y_indices();
        self.rhs.iter().map(|p| p.degree_in(&ys)).max().unwrap_or(0)
    }

    /// Total number of terms.
    pub fn size(&self) -> usize {
        self.rhs.iter().map(|p| p.num_terms()).sum()
    }

    fn y_indices(&self) -> Vec<usize> {
        (self.k()..self.k() + self.l()).collect()
    }

    pub fn validate_proper(&self) -> ProperReport {
        let ys = self.y_indices();
        let mut violations = Vec::new();
        for (i, p) in self.rhs.iter().enumerate() {
            for (v, coeff) in p.coefficients_in(&ys) {
                if v.total_degree() > 1 {
                    continue;
                }
                let c = coeff.constant_term();
                if !c.is_zero() {
                    let monomial = match v.0.iter().position(|&e| e == 1) {
                        Some(j) => self.vars[j].clone(),
                        None => "1".to_string(),
                    };
                    violations.push(Violation {
                        equation: i,
                        var: self.vars[i].clone(),
                        monomial,
                        constant: c.to_string(),
                    });
                }
            }
        }
        ProperReport { violations }
    }

    pub fn require_proper(&self) -> Result<()> {
        let r = self.validate_proper();
        if r.is_proper() {
            Ok(())
        } else {
            Err(Error::NotProper(r.to_string()))
        }
    }

    /// `(i, j) -> d f_i / d y_j` with `f_i = y_i - P_i`.
    pub fn derivative_matrix(&self) -> Vec<Vec<Polynomial>> {
        let amb = self.ambient();
        (0..self.l())
            .map(|i| {
                (0..self.l())
                    .map(|j| {
                        let d = self.rhs[i].derivative(self.k() + j).neg();
                        if i == j {
                            d.add(&Polynomial::constant(&amb, 1)).expect("same ambient")
                        } else {
                            d
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// Parses the system text format.
    pub fn parse(text: &str) -> Result<PolySystem> {
        parse_system(text)
    }

    /// A new system whose first variable `name` equals `P_a - P_b` for
    /// variables `a` and `b`; the other equations are kept.
    pub fn with_difference(&self, a: usize, b: usize, name: &str) -> Result<PolySystem> {
        if self.vars.iter().chain(&self.indets).any(|v| v == name) {
            return Err(Error::Invalid(format!("name `{name}` already used")));
        }
        let mut vars = vec![name.to_string()];
        vars.extend(self.vars.iter().cloned());
        let amb: Vec<String> = self.indets.iter().chain(&vars).cloned().collect();
        let mut rhs = Vec::with_capacity(vars.len());
        rhs.push(self.rhs[a].sub(&self.rhs[b])?.embed(&amb)?);
        for p in &self.rhs {
            rhs.push(p.embed(&amb)?);
        }
        PolySystem::new(self.indets.clone(), vars, rhs)
    }

    /// The same system with variable `i` moved to the front.
    pub fn with_first(&self, i: usize) -> PolySystem {
        let mut order: Vec<usize> = (0..self.l()).collect();
        order.remove(i);
        order.insert(0, i);
        let vars: Vec<String> = order.iter().map(|&j| self.vars[j].clone()).collect();
        let amb: Vec<String> = self.indets.iter().chain(&vars).cloned().collect();
        let rhs = order
            .iter()
            .map(|&j| self.rhs[j].embed(&amb).expect("permuted ambient"))
            .collect();
        PolySystem {
            indets: self.indets.clone(),
            vars,
            rhs,
        }
    }
}

impl fmt::Display for PolySystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vars: {}", self.vars.join(" "))?;
        writeln!(f, "indets: {}", self.indets.join(" "))?;
        for (v, p) in self.vars.iter().zip(&self.rhs) {
            writeln!(f, "{v} = {p}")?;
        }
        Ok(())
    }
}

fn parse_system(text: &str) -> Result<PolySystem> {
    let mut vars: Option<Vec<String>> = None;
    let mut indets: Option<Vec<String>> = None;
    let mut eqs: Vec<(usize, usize, usize, &str)> = Vec::new();
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
        for (key, slot) in [("vars:", &mut vars), ("indets:", &mut indets)] {
            if let Some(rest) = trimmed.strip_prefix(key) {
                if slot.is_some() {
                    return Err(perr(col_of(trimmed), format!("duplicate `{key}` header")));
                }
                let mut names = Vec::new();
                for name in rest.split_whitespace() {
                    let mut cs = name.chars();
                    let ok = matches!(cs.next(), Some(c) if is_ident_start(c)) && cs.all(is_ident_char);
                    if !ok {
                        return Err(perr(col_of(name), format!("bad name `{name}`")));
                    }
                    names.push(name.to_string());
                }
                *slot = Some(names);
            }
        }
        if trimmed.starts_with("vars:") || trimmed.starts_with("indets:") {
            continue;
        }
        let Some(eq) = trimmed.find('=') else {
            return Err(perr(col_of(trimmed), "expected `y = expression`".into()));
        };
        let lhs = trimmed[..eq].trim();
        let rhs = &trimmed[eq + 1..];
        eqs.push((line_no, col_of(lhs), col_of(rhs), lhs));
    }
    let vars = vars.ok_or(Error::Parse {
        line: 1,
        column: 1,
        message: "missing `vars:` header".into(),
    })?;
    let indets = indets.unwrap_or_default();
    let ambient: Vec<String> = indets.iter().chain(&vars).cloned().collect();
    let mut rhs: Vec<Option<Polynomial>> = vec![None; vars.len()];
    let lines: Vec<&str> = text.lines().collect();
    for (line_no, lhs_col, rhs_col, lhs) in eqs {
        let perr = |col: usize, msg: String| Error::Parse {
            line: line_no,
            column: col,
            message: msg,
        };
        let idx = vars
            .iter()
            .position(|v| v == lhs)
            .ok_or_else(|| perr(lhs_col, format!("`{lhs}` is not a declared variable")))?;
        if rhs[idx].is_some() {
            return Err(perr(lhs_col, format!("second equation for `{lhs}`")));
        }
        let raw = lines[line_no - 1];
        let body = raw[rhs_col - 1..].split('#').next().unwrap_or("");
        rhs[idx] = Some(parse_expr(body, &ambient, line_no, rhs_col)?);
    }
    let rhs = rhs
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            p.ok_or_else(|| Error::Parse {
                line: lines.len().max(1),
                column: 1,
                message: format!("no equation for `{}`", vars[i]),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PolySystem::new(indets, vars, rhs)
}

// ---------------------------------------------------------------------------
// Kleene iteration

/// Truncations to degree `n` of the quasiregular solution, by `n + 1`
/// rounds of `A <- P(A)` starting from zero.
pub fn kleene_solve(s: &PolySystem, n: u32) -> Result<Vec<TruncatedSeries>> {
    kleene_iterate(s, n, n as usize + 1)
}

/// `rounds` iterations of `A <- P(A)` truncated at degree `n`. Round `t`
/// only multiplies through degree `min(t, n)`, which is all that can be
/// correct at that point.
pub fn kleene_iterate(s: &PolySystem, n: u32, rounds: usize) -> Result<Vec<TruncatedSeries>> {
    s.require_proper()?;
    let layout = Layout::simplex(s.k(), n)?;
    let ring = SeriesRing::new(layout.clone(), I128Coeffs::default());
    let out = kleene_dense(s, &ring, n, rounds);
    if !ring.coeffs().overflowed() {
        return Ok(out);
    }
    let ring = SeriesRing::new(layout, BigCoeffs);
    Ok(kleene_dense(s, &ring, n, rounds))
}

/// Same iteration with coefficients reduced mod `p`.
pub fn kleene_solve_mod(s: &PolySystem, n: u32, p: u64) -> Result<Vec<TruncatedSeries>> {
    s.require_proper()?;
    let layout = Layout::simplex(s.k(), n)?;
    let ring = SeriesRing::new(layout, ModCoeffs::new(p)?);
    Ok(kleene_dense(s, &ring, n, n as usize + 1))
}

/// Coefficient of `X^v` in the first component, tracking only monomials that
/// divide `X^v`.
pub fn kleene_coefficient(s: &PolySystem, v: &MultiIndex, p: Option<u64>) -> Result<BigInt> {
    s.require_proper()?;
    check_index(s, v)?;
    let n = v.total_degree();
    let layout = Layout::boxed(v.0.clone(), n)?;
    let rounds = n as usize + 1;
    let out = match p {
        Some(p) => {
            let ring = SeriesRing::new(layout, ModCoeffs::new(p)?);
            kleene_dense(s, &ring, n, rounds)
        }
        None => {
            let ring = SeriesRing::new(layout.clone(), I128Coeffs::default());
            let out = kleene_dense(s, &ring, n, rounds);
            if ring.coeffs().overflowed() {
                let ring = SeriesRing::new(layout, BigCoeffs);
                kleene_dense(s, &ring, n, rounds)
            } else {
                out
            }
        }
    };
    Ok(out[0].coeff(v))
}

fn check_index(s: &PolySystem, v: &MultiIndex) -> Result<()> {
    if v.len() != s.k() {
        return Err(Error::Invalid(format!(
            "multi-index has {} entries, system has {} indeterminates",
            v.len(),
            s.k()
        )));
    }
    Ok(())
}

struct Working<'a, R: CoeffRing> {
    ring: &'a SeriesRing<R>,
    limit: u32,
}

impl<R: CoeffRing> Algebra for Working<'_, R> {
    type Elem = Vec<R::C>;
    fn zero(&self) -> Self::Elem {
        self.ring.zero()
    }
    fn one(&self) -> Self::Elem {
        self.ring.one()
    }
    fn from_int(&self, c: &BigInt) -> Self::Elem {
        self.ring.from_int(c)
    }
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.ring.add(a, b)
    }
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.ring.sub(a, b)
    }
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.ring.mul_limited(a, b, self.limit)
    }
}

fn kleene_dense<R: CoeffRing>(
    s: &PolySystem,
    ring: &SeriesRing<R>,
    n: u32,
    rounds: usize,
) -> Vec<TruncatedSeries> {
    let xs: Vec<Vec<R::C>> = (0..s.k()).map(|t| ring.variable(t)).collect();
    let mut a: Vec<Vec<R::C>> = vec![ring.zero(); s.l()];
    for t in 1..=rounds {
        let w = Working {
            ring,
            limit: (t as u32).min(n),
        };
        let mut inputs = xs.clone();
        inputs.extend(a.iter().cloned());
        a = s.rhs.iter().map(|p| p.evaluate(&w, &inputs)).collect();
    }
    a.iter()
        .map(|v| TruncatedSeries::new(ring.to_polynomial(v, &s.indets), n))
        .collect()
}

// ---------------------------------------------------------------------------
// Hensel iteration

/// `a_i = g_i / q` as circuits over the indeterminates, sharing one gate list.
/// The tails `h_i = 1 - q` all coincide.
#[derive(Debug, Clone)]
pub struct RationalApproximant {
    builder: CircuitBuilder,
    numerators: Vec<usize>,
    denominator: usize,
    stage: usize,
}

impl RationalApproximant {
    /// Stage 0: `a_0 = 0`.
    pub fn initial(s: &PolySystem) -> Self {
        let mut builder = CircuitBuilder::new(&s.indets);
        let zero = builder.zero();
        let one = builder.one();
        RationalApproximant {
            builder,
            numerators: vec![zero; s.l()],
            denominator: one,
            stage: 0,
        }
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn builder(&self) -> &CircuitBuilder {
        &self.builder
    }

    pub fn numerator_gates(&self) -> &[usize] {
        &self.numerators
    }

    pub fn denominator_gate(&self) -> usize {
        self.denominator
    }

    pub fn numerator(&self, i: usize) -> Circuit {
        self.builder.circuit(self.numerators[i])
    }

    pub fn denominator(&self) -> Circuit {
        self.builder.circuit(self.denominator)
    }

    /// Circuit for `h_i = 1 - q`.
    pub fn denominator_tail(&self, _i: usize) -> Circuit {
        let mut b = self.builder.clone();
        let one = b.one();
        let h = b.sub(one, self.denominator);
        b.circuit(h)
    }

    /// Number of gates shared by all components.
    pub fn size(&self) -> usize {
        self.builder.len()
    }

    /// Numerators and the denominator expanded through degree `n`.
    pub fn expand(&self, n: u32, p: Option<u64>) -> Result<(Vec<TruncatedSeries>, TruncatedSeries)> {
        let mut outs = self.numerators.clone();
        outs.push(self.denominator);
        let polys = expand_outputs(&self.builder, &outs, n, p)?;
        let mut series: Vec<TruncatedSeries> =
            polys.into_iter().map(|b| TruncatedSeries::new(b, n)).collect();
        let q = series.pop().expect("denominator");
        Ok((series, q))
    }

    /// The approximant `g_i / q` through degree `n`, by series inversion.
    pub fn expand_quotients(&self, n: u32) -> Result<Vec<TruncatedSeries>> {
        let (g, q) = self.expand(n, None)?;
        let inv = q.invert_unit(n)?;
        g.iter().map(|gi| gi.trunc_mul(&inv, n)).collect()
    }
}

fn expand_outputs(b: &CircuitBuilder, outs: &[usize], n: u32, p: Option<u64>) -> Result<Vec<Polynomial>> {
    let layout = Layout::simplex(b.vars().len(), n)?;
    let inputs: Vec<Polynomial> = (0..b.vars().len())
        .map(|i| Polynomial::var(b.vars(), i))
        .collect();
    eval_dense_outputs(b.gates(), outs, &layout, b.vars(), &inputs, p)
}

/// `P` split by `Y`-monomial: `(v, [(x exponents, coefficient)])`.
type Split = Vec<(MultiIndex, Vec<(MultiIndex, BigInt)>)>;

fn split_by_y(s: &PolySystem, p: &Polynomial) -> Split {
    let ys: Vec<usize> = s.y_indices();
    p.coefficients_in(&ys)
        .into_iter()
        .map(|(v, c)| {
            let terms = c
                .terms()
                .map(|(e, k)| (MultiIndex(e.0[..s.k()].to_vec()), k.clone()))
                .collect();
            (v, terms)
        })
        .collect()
}

struct StepCtx {
    b: CircuitBuilder,
    xpow: HashMap<(usize, u32), usize>,
    gpow: HashMap<(usize, u32), usize>,
    qpow: HashMap<u32, usize>,
    g: Vec<usize>,
    q: usize,
}

impl StepCtx {
    fn xpow(&mut self, t: usize, e: u32) -> usize {
        if let Some(&h) = self.xpow.get(&(t, e)) {
            return h;
        }
        let x = self.b.input(t);
        let h = self.b.pow(x, &BigUint::from(e));
        self.xpow.insert((t, e), h);
        h
    }

    fn gpow(&mut self, j: usize, e: u32) -> usize {
        if let Some(&h) = self.gpow.get(&(j, e)) {
            return h;
        }
        let h = if e == 0 {
            self.b.one()
        } else {
            let prev = self.gpow(j, e - 1);
            self.b.mul(prev, self.g[j])
        };
        self.gpow.insert((j, e), h);
        h
    }

    fn qpow(&mut self, e: u32) -> usize {
        if let Some(&h) = self.qpow.get(&e) {
            return h;
        }
        let h = if e == 0 {
            self.b.one()
        } else {
            let prev = self.qpow(e - 1);
            self.b.mul(prev, self.q)
        };
        self.qpow.insert(e, h);
        h
    }

    fn x_poly(&mut self, terms: &[(MultiIndex, BigInt)]) -> usize {
        let mut parts = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            let mut factors = vec![self.b.constant(c.clone())];
            for (t, &k) in e.0.iter().enumerate() {
                if k > 0 {
                    factors.push(self.xpow(t, k));
                }
            }
            parts.push(self.b.product(&factors));
        }
        self.b.sum(&parts)
    }

    /// `q^hom * sum_v c_v (g/q)^v`, homogenized to degree `hom`.
    fn homogenize(&mut self, split: &Split, hom: u32) -> usize {
        let mut parts = Vec::with_capacity(split.len());
        for (v, terms) in split {
            let c = self.x_poly(terms);
            let mut factors = vec![c];
            for (j, &e) in v.0.iter().enumerate() {
                if e > 0 {
                    factors.push(self.gpow(j, e));
                }
            }
            factors.push(self.qpow(hom - v.total_degree()));
            parts.push(self.b.product(&factors));
        }
        self.b.sum(&parts)
    }
}

/// One Newton step on the rational approximant.
pub fn hensel_step(s: &PolySystem, cur: &RationalApproximant) -> Result<RationalApproximant> {
    let l = s.l();
    let d = s.y_degree().max(1);
    let mut ctx = StepCtx {
        b: cur.builder.clone(),
        xpow: HashMap::new(),
        gpow: HashMap::new(),
        qpow: HashMap::new(),
        g: cur.numerators.clone(),
        q: cur.denominator,
    };
    // F_i = q^d (g_i / q - P_i(g / q))
    let mut f = Vec::with_capacity(l);
    for i in 0..l {
        let split = split_by_y(s, &s.rhs[i]);
        let p_h = ctx.homogenize(&split, d);
        let qd1 = ctx.qpow(d - 1);
        let gi = ctx.b.mul(ctx.g[i], qd1);
        f.push(ctx.b.sub(gi, p_h));
    }
    // M_ij = q^(d-1) (delta_ij - dP_i/dy_j (g / q))
    let mut m = vec![vec![0usize; l]; l];
    for i in 0..l {
        for j in 0..l {
            let dp = s.rhs[i].derivative(s.k() + j);
            let split = split_by_y(s, &dp);
            let h = ctx.homogenize(&split, d - 1);
            m[i][j] = if i == j {
                let qd1 = ctx.qpow(d - 1);
                ctx.b.sub(qd1, h)
            } else {
                ctx.b.neg(h)
            };
        }
    }
    let (adj, det) = ctx.b.adjugate(&m);
    let mut g_new = Vec::with_capacity(l);
    for i in 0..l {
        let gd = ctx.b.mul(ctx.g[i], det);
        let terms: Vec<usize> = (0..l).map(|j| ctx.b.mul(adj[i][j], f[j])).collect();
        let corr = ctx.b.sum(&terms);
        g_new.push(ctx.b.sub(gd, corr));
    }
    let q_new = ctx.b.mul(ctx.q, det);
    let stage = cur.stage + 1;
    // unit check: q_new(0) = 1
    let zeros = vec![BigInt::zero(); s.k()];
    let at0 = evaluate_outputs(ctx.b.gates(), &[q_new], &Integers, &zeros);
    if !at0[0].is_one() {
        return Err(Error::JacobianNotUnit(stage));
    }
    Ok(RationalApproximant {
        builder: ctx.b,
        numerators: g_new,
        denominator: q_new,
        stage,
    })
}

/// Stage `n` rational approximant, from `a_0 = 0`.
pub fn hensel_approximant(s: &PolySystem, n: usize) -> Result<RationalApproximant> {
    s.require_proper()?;
    let mut a = RationalApproximant::initial(s);
    for _ in 0..n {
        a = hensel_step(s, &a)?;
    }
    Ok(a)
}

/// Smallest `n` with `2^n >= degree + 1`.
pub fn stage_for_degree(degree: u64) -> usize {
    let target = degree as u128 + 1;
    (128 - (target - 1).leading_zeros()) as usize
}

/// Division-free circuits `E_n,i = g_i * (1 + h + ... + h^(2^n - 1))`,
/// `h = 1 - q`, for all components, sharing one gate list.
#[derive(Debug, Clone)]
pub struct PolynomialApproximants {
    builder: CircuitBuilder,
    outputs: Vec<usize>,
    stage: usize,
}

impl PolynomialApproximants {
    pub fn build(s: &PolySystem, n: usize) -> Result<Self> {
        let approx = hensel_approximant(s, n)?;
        let mut b = approx.builder.clone();
        let outputs = if n == 0 {
            vec![b.zero(); s.l()]
        } else {
            let one = b.one();
            let h = b.sub(one, approx.denominator);
            let m = (1u64 << n.min(63)) - 1;
            let geo = b.geometric_sum(h, m);
            approx.numerators.iter().map(|&g| b.mul(g, geo)).collect()
        };
        Ok(PolynomialApproximants {
            builder: b,
            outputs,
            stage: n,
        })
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn circuit(&self, i: usize) -> Circuit {
        self.builder.circuit(self.outputs[i])
    }

    /// Gates in the shared list.
    pub fn size(&self) -> usize {
        self.builder.len()
    }

    /// All components expanded through degree `n`, optionally mod `p`.
    pub fn expand(&self, n: u32, p: Option<u64>) -> Result<Vec<TruncatedSeries>> {
        Ok(expand_outputs(&self.builder, &self.outputs, n, p)?
            .into_iter()
            .map(|b| TruncatedSeries::new(b, n))
            .collect())
    }
}

/// Circuit `E_n` for component `i`.
pub fn polynomial_approximant(s: &PolySystem, n: usize, i: usize) -> Result<Circuit> {
    if i >= s.l() {
        return Err(Error::Invalid(format!("component {i} out of range")));
    }
    Ok(PolynomialApproximants::build(s, n)?.circuit(i))
}

/// Solution through degree `n` by the Hensel engine.
pub fn hensel_solve(s: &PolySystem, n: u32, p: Option<u64>) -> Result<Vec<TruncatedSeries>> {
    PolynomialApproximants::build(s, stage_for_degree(n as u64))?.expand(n, p)
}

/// Coefficient of `X^v` in the first component via `E_n`, `2^n > |v|`.
pub fn hensel_coefficient(s: &PolySystem, v: &MultiIndex, p: Option<u64>) -> Result<BigInt> {
    check_index(s, v)?;
    let e = PolynomialApproximants::build(s, stage_for_degree(v.total_degree() as u64))?;
    crate::circuit::coefficient(&e.circuit(0), v, p)
}

// ---------------------------------------------------------------------------
// Evaluating f and its Jacobian at a point

/// `f(a) = a - P(a)` for quasiregular truncated `a`.
pub fn f_at(s: &PolySystem, a: &[TruncatedSeries], n: u32) -> Result<Vec<TruncatedSeries>> {
    let (ring, inputs) = point_inputs(s, a, n)?;
    Ok(s.rhs
        .iter()
        .zip(a)
        .map(|(p, ai)| {
            let v = p.evaluate(&ring, &inputs);
            let body = ring.to_polynomial(&v, &s.indets);
            TruncatedSeries::new(ai.body().sub(&body).expect("same ambient"), n)
        })
        .collect())
}

/// `det Df(a)` through degree `n`.
pub fn jacobian_at(s: &PolySystem, a: &[TruncatedSeries], n: u32) -> Result<TruncatedSeries> {
    let (ring, inputs) = point_inputs(s, a, n)?;
    let l = s.l();
    let names: Vec<String> = (0..l * l).map(|i| format!("m{i}")).collect();
    let mut b = CircuitBuilder::new(&names);
    let m: Vec<Vec<usize>> = (0..l).map(|i| (0..l).map(|j| b.input(i * l + j)).collect()).collect();
    let det = b.determinant(&m);
    let vals: Vec<_> = s
        .derivative_matrix()
        .iter()
        .flatten()
        .map(|p| p.evaluate(&ring, &inputs))
        .collect();
    let out = evaluate_outputs(b.gates(), &[det], &ring, &vals);
    Ok(TruncatedSeries::new(ring.to_polynomial(&out[0], &s.indets), n))
}

fn point_inputs(
    s: &PolySystem,
    a: &[TruncatedSeries],
    n: u32,
) -> Result<(SeriesRing<BigCoeffs>, Vec<Vec<BigInt>>)> {
    if a.len() != s.l() {
        return Err(Error::Invalid(format!("expected {} components", s.l())));
    }
    let ring = SeriesRing::new(Layout::simplex(s.k(), n)?, BigCoeffs);
    let mut inputs: Vec<Vec<BigInt>> = (0..s.k()).map(|t| ring.variable(t)).collect();
    for ai in a {
        if ai.symbols() != s.indets.as_slice() {
            return Err(Error::AmbientMismatch(ai.symbols().to_vec(), s.indets.clone()));
        }
        inputs.push(ring.from_polynomial(ai.body()));
    }
    Ok((ring, inputs))
}

/// Random proper system: each equation gets up to `terms` monomials of total
/// degree at most `d`, coefficients in `[-c, c]`; monomials of `Y`-degree at
/// most one always carry an indeterminate.
pub fn random_proper_system<R: Rng>(rng: &mut R, k: usize, l: usize, d: u32, c: i64, terms: usize) -> PolySystem {
    let indets: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
    let vars: Vec<String> = (1..=l).map(|i| format!("y{i}")).collect();
    let amb: Vec<String> = indets.iter().chain(&vars).cloned().collect();
    let rhs = (0..l)
        .map(|_| {
            let mut ts = Vec::new();
            for _ in 0..terms {
                let deg = rng.gen_range(1..=d);
                let mut e = vec![0u32; k + l];
                for _ in 0..deg {
                    e[rng.gen_range(0..k + l)] += 1;
                }
                let ydeg: u32 = e[k..].iter().sum();
                if ydeg <= 1 && e[..k].iter().sum::<u32>() == 0 {
                    e[rng.gen_range(0..k)] += 1;
                }
                let coeff = rng.gen_range(-c..=c);
                ts.push((MultiIndex(e), BigInt::from(coeff)));
            }
            Polynomial::from_terms(&amb, ts)
        })
        .collect();
    PolySystem::new(indets, vars, rhs).expect("well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::syms;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn example1() -> PolySystem {
        PolySystem::parse("vars: y\nindets: x\ny = x + x^2 - 2*x*y + y^2\n").unwrap()
    }

    pub(crate) fn catalan() -> PolySystem {
        PolySystem::parse("vars: y\nindets: x\ny = x + 2*x*y + x*y^2\n").unwrap()
    }

    /// C_0..C_n from (n+2) C_{n+1} = 2 (2n+1) C_n.
    pub(crate) fn catalan_numbers(n: usize) -> Vec<BigInt> {
        let mut c = vec![BigInt::one()];
        for i in 0..n {
            let next = &c[i] * BigInt::from(2 * (2 * i + 1)) / BigInt::from(i + 2);
            c.push(next);
        }
        c
    }

    fn x() -> Vec<String> {
        syms(&["x"])
    }

    fn ser(text: &str, n: u32) -> TruncatedSeries {
        TruncatedSeries::new(Polynomial::parse(text, &x()).unwrap(), n)
    }

    #[test]
    fn properness_examples() {
        assert!(example1().validate_proper().is_proper());
        assert!(catalan().validate_proper().is_proper());
        let bad = PolySystem::parse("vars: y\nindets: x\ny = 1 + x*y^2").unwrap();
        let r = bad.validate_proper();
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].monomial, "1");
        let bad2 = PolySystem::parse("vars: y z\nindets: x\ny = z + x\nz = 2*y + x*z").unwrap();
        let r2 = bad2.validate_proper();
        assert_eq!(r2.violations.len(), 2);
        assert!(matches!(kleene_solve(&bad, 3), Err(Error::NotProper(_))));
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let text = "vars: fX fY\nindets: x1 x2 x3 x4\nfX = x1*x2*fX^2 + x1*x2 + x3*x4*fY\nfY = x3*x4*fY^2 + x3*x4\n";
        let s = PolySystem::parse(text).unwrap();
        assert_eq!(s.to_string(), text);
        assert_eq!(PolySystem::parse(&s.to_string()).unwrap(), s);
        let e = PolySystem::parse("vars: y\nindets: x\ny = x + z").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, column: 9, .. }), "{e:?}");
        let e = PolySystem::parse("vars: y\nindets: x\nw = x").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, column: 1, .. }), "{e:?}");
        assert!(PolySystem::parse("vars: y z\nindets: x\ny = x").is_err());
    }

    #[test]
    fn kleene_examples() {
        let a = kleene_solve(&example1(), 10).unwrap();
        assert_eq!(a[0], ser("x", 10));
        let c = kleene_solve(&catalan(), 4).unwrap();
        assert_eq!(c[0], ser("x + 2*x^2 + 5*x^3 + 14*x^4", 4));
        let z = kleene_solve(&catalan(), 0).unwrap();
        assert!(z[0].is_zero());
        let cat = catalan_numbers(20);
        let big = kleene_solve(&catalan(), 20).unwrap();
        for n in 1..=20u32 {
            assert_eq!(big[0].coeff(&MultiIndex(vec![n])), cat[n as usize], "C_{n}");
        }
    }

    #[test]
    fn kleene_rounds_suffice() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..8 {
            let s = random_proper_system(&mut rng, 2, 2, 3, 3, 5);
            for n in [0u32, 1, 4, 7] {
                let a = kleene_solve(&s, n).unwrap();
                let b = kleene_iterate(&s, n, n as usize + 3).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn derivative_examples() {
        let df = example1().derivative_matrix();
        let amb = syms(&["x", "y"]);
        assert_eq!(df[0][0], Polynomial::parse("1 + 2*x - 2*y", &amb).unwrap());
        let free = PolySystem::parse("vars: a b\nindets: x\na = x\nb = x^2").unwrap();
        let m = free.derivative_matrix();
        let amb = free.ambient();
        assert_eq!(m[0][0], Polynomial::constant(&amb, 1));
        assert!(m[0][1].is_zero());
        let census = PolySystem::parse(
            "vars: fX fY\nindets: x1 x2 x3 x4\nfX = x1*x2 + x1*x2*fX^2 + x3*x4*fY\nfY = x3*x4 + x3*x4*fY^2",
        )
        .unwrap();
        let m = census.derivative_matrix();
        assert_eq!(m[0][1], Polynomial::parse("-x3*x4", &census.ambient()).unwrap());
    }

    #[test]
    fn first_newton_step_example1() {
        let a1 = hensel_approximant(&example1(), 1).unwrap();
        // a_1 = x - x^2 / (2x + 1)
        let q = a1.denominator().to_polynomial();
        assert_eq!(q, Polynomial::parse("2*x + 1", &x()).unwrap());
        let g = a1.numerator(0).to_polynomial();
        assert_eq!(g, Polynomial::parse("x^2 + x", &x()).unwrap());
        let tail = a1.denominator_tail(0).to_polynomial();
        assert_eq!(tail.constant_term(), BigInt::zero());
    }

    fn closed_form(n: u32, trunc: u32) -> TruncatedSeries {
        let m = 1u32 << n;
        let num = ser(&format!("x^{m}"), trunc);
        let den = TruncatedSeries::new(
            Polynomial::parse(&format!("(x+1)^{m} - x^{m}"), &x()).unwrap(),
            trunc,
        );
        let q = num.trunc_mul(&den.invert_unit(trunc).unwrap(), trunc).unwrap();
        ser("x", trunc).sub(&q).unwrap()
    }

    #[test]
    fn hensel_matches_closed_form() {
        for n in 1..=3u32 {
            let trunc = 1 << (n + 1);
            let a = hensel_approximant(&example1(), n as usize).unwrap();
            let got = a.expand_quotients(trunc).unwrap();
            assert_eq!(got[0], closed_form(n, trunc), "stage {n}");
            let err = got[0].sub(&ser("x", trunc)).unwrap();
            assert_eq!(err.ord(), crate::series::Valuation::Finite(1 << n));
        }
    }

    #[test]
    fn linear_system_is_fixed_immediately() {
        let s = PolySystem::parse("vars: y\nindets: x\ny = x").unwrap();
        let a = hensel_approximant(&s, 1).unwrap();
        assert_eq!(a.expand_quotients(5).unwrap()[0], ser("x", 5));
    }

    #[test]
    fn polynomial_approximant_examples() {
        let e3 = polynomial_approximant(&example1(), 3, 0).unwrap();
        assert_eq!(crate::circuit::expand(&e3, 7, None).unwrap(), ser("x", 7));
        let c3 = PolynomialApproximants::build(&catalan(), 3).unwrap();
        let cat = catalan_numbers(8);
        let got = c3.expand(7, None).unwrap();
        for n in 1..=7u32 {
            assert_eq!(got[0].coeff(&MultiIndex(vec![n])), cat[n as usize]);
        }
        let e0 = polynomial_approximant(&catalan(), 0, 0).unwrap();
        assert!(e0.to_polynomial().is_zero());
    }

    #[test]
    fn stage_ceiling() {
        assert_eq!(stage_for_degree(0), 0);
        assert_eq!(stage_for_degree(1), 1);
        assert_eq!(stage_for_degree(3), 2);
        assert_eq!(stage_for_degree(4), 3);
        assert_eq!(stage_for_degree(7), 3);
        assert_eq!(stage_for_degree(8), 4);
    }

    #[test]
    fn hensel_agrees_with_kleene_on_random_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..6 {
            let k = rng.gen_range(1..=2);
            let l = rng.gen_range(1..=2);
            let s = random_proper_system(&mut rng, k, l, 3, 3, 4);
            for n in 0..=3usize {
                let deg = (1u32 << n) - 1;
                let e = PolynomialApproximants::build(&s, n).unwrap();
                let got = e.expand(deg, None).unwrap();
                let want = kleene_solve(&s, deg).unwrap();
                assert_eq!(got, want, "system\n{s}stage {n}");
            }
        }
    }

    #[test]
    fn jacobian_and_norm_claims() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_proper_system(&mut rng, 2, 3, 3, 3, 5);
        for _ in 0..5 {
            let a: Vec<TruncatedSeries> = (0..3)
                .map(|_| {
                    let terms = (0..4).map(|_| {
                        let e = MultiIndex(vec![rng.gen_range(0..3), rng.gen_range(1..3)]);
                        (e, BigInt::from(rng.gen_range(-3..4)))
                    });
                    TruncatedSeries::new(Polynomial::from_terms(s.indets(), terms), 6)
                })
                .collect();
            let j = jacobian_at(&s, &a, 6).unwrap();
            assert_eq!(j.body().constant_term(), BigInt::one());
            for fi in f_at(&s, &a, 6).unwrap() {
                assert!(fi.body().constant_term().is_zero());
            }
        }
    }

    #[test]
    fn difference_system() {
        let s = catalan();
        let d = s.with_difference(0, 0, "z").unwrap();
        assert!(d.validate_proper().is_proper());
        let sol = kleene_solve(&d, 6).unwrap();
        assert!(sol[0].is_zero());
    }
}
