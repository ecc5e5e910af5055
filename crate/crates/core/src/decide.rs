//! Coefficient extraction, zeroness and finite-support tests for the first
//! solution component of a proper system, and the two circuit reductions.
//!
//! Zeroness and finiteness are exact relative to a degree bound `D`: if the
//! solution is nonzero its order is at most `D`, and if its support is finite
//! its degree is at most `D`. The bound is either supplied by the caller or
//! computed as `d^(c l^2)` for a caller-chosen `c`. The constant in that
//! formula is not known, so formula mode is reported as heuristic.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::circuit::{
    balance_alternate, degree_probe, degree_reversal_circuit, Circuit, DegreeProbe, Gate,
};
use crate::poly::{MultiIndex, Polynomial};
use crate::polysys::{
    hensel_coefficient, hensel_solve, kleene_coefficient, kleene_solve, stage_for_degree, PolySystem,
    PolynomialApproximants,
};
use crate::series::TruncatedSeries;
use crate::{Error, Result};

/// Default prime for degree probes: the largest prime below `2^62`.
pub const PROBE_PRIME: u64 = 4_611_686_018_427_387_847;

/// How the degree bound `D` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum BoundConfig {
    Explicit { d: u64 },
    /// `D = d^(c l^2)` with `d` the system degree and `l` its size.
    Formula { c: u32 },
}

/// A resolved bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bound {
    pub d: u64,
    /// Derived from the formula with an assumed constant.
    pub heuristic: bool,
}

impl Bound {
    /// Top of the finiteness window, `D^2 + D`.
    pub fn window_top(&self) -> Option<u64> {
        self.d.checked_mul(self.d)?.checked_add(self.d)
    }
}

impl BoundConfig {
    pub fn resolve(&self, s: &PolySystem) -> Result<Bound> {
        match *self {
            BoundConfig::Explicit { d } => {
                if d < 1 {
                    return Err(Error::BadBound("D must be at least 1".into()));
                }
                Ok(Bound { d, heuristic: false })
            }
            BoundConfig::Formula { c } => {
                if c < 1 {
                    return Err(Error::BadBound("c must be at least 1".into()));
                }
                let l = s.l() as u32;
                let exp = c
                    .checked_mul(l)
                    .and_then(|x| x.checked_mul(l))
                    .ok_or_else(|| Error::BadBound("exponent overflows".into()))?;
                let d = (s.degree() as u64)
                    .checked_pow(exp)
                    .ok_or_else(|| Error::BadBound(format!("{}^{exp} overflows", s.degree())))?;
                Ok(Bound {
                    d: d.max(1),
                    heuristic: true,
                })
            }
        }
    }
}

impl FromStr for BoundConfig {
    type Err = Error;

    /// `D` (a number), `explicit:D` or `formula:c`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadBound(format!("cannot parse bound `{s}`"));
        if let Some(c) = s.strip_prefix("formula:") {
            return Ok(BoundConfig::Formula {
                c: c.parse().map_err(|_| bad())?,
            });
        }
        let d = s.strip_prefix("explicit:").unwrap_or(s);
        Ok(BoundConfig::Explicit {
            d: d.parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Hensel,
    Kleene,
}

impl FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hensel" => Ok(Engine::Hensel),
            "kleene" => Ok(Engine::Kleene),
            _ => Err(Error::Invalid(format!("unknown engine `{s}`"))),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Hensel => "hensel",
            Engine::Kleene => "kleene",
        })
    }
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &BASES {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Coefficient query: monomial `X^v` modulo `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffQuery {
    pub v: MultiIndex,
    pub p: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoeffResult {
    pub residue: u64,
    pub engine: Engine,
    /// `false` when `p` failed the primality test; the residue is still
    /// correct, but the modulus is composite.
    pub prime: bool,
}

/// Residue mod `p` of the coefficient of `X^v` in the first component.
pub fn coeff_alg(s: &PolySystem, q: &CoeffQuery, engine: Engine) -> Result<CoeffResult> {
    s.require_proper()?;
    if q.p < 2 {
        return Err(Error::BadModulus(q.p.to_string()));
    }
    let c = match engine {
        Engine::Hensel => hensel_coefficient(s, &q.v, Some(q.p))?,
        Engine::Kleene => kleene_coefficient(s, &q.v, Some(q.p))?,
    };
    Ok(CoeffResult {
        residue: c.to_u64().expect("reduced residue"),
        engine,
        prime: is_prime_u64(q.p),
    })
}

/// Series through degree `n` from the chosen engine.
fn solve_first(s: &PolySystem, n: u32, engine: Engine) -> Result<TruncatedSeries> {
    match engine {
        Engine::Hensel => Ok(hensel_solve(s, n, None)?.swap_remove(0)),
        Engine::Kleene => Ok(kleene_solve(s, n)?.swap_remove(0)),
    }
}

fn checked_degree(d: u64, k: usize) -> Result<u32> {
    if d <= max_feasible(k).min(u32::MAX as u64) {
        Ok(d as u32)
    } else {
        Err(Error::BoundInfeasible {
            requested: d,
            max_feasible: max_feasible(k),
        })
    }
}

/// Largest total degree whose dense truncation fits the engine's cap.
pub fn max_feasible(k: usize) -> u64 {
    crate::series::max_feasible_total(k)
}

/// Smallest nonzero monomial: lowest total degree, then lexicographically
/// smallest exponent vector.
fn graded_min(p: &Polynomial, lo: u32, hi: u32) -> Option<(MultiIndex, BigInt)> {
    p.terms()
        .filter(|(e, _)| (lo..=hi).contains(&e.total_degree()))
        .min_by(|(a, _), (b, _)| {
            a.total_degree()
                .cmp(&b.total_degree())
                .then_with(|| a.cmp(b))
        })
        .map(|(e, c)| (e.clone(), c.clone()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZeroVerdict {
    pub zero: bool,
    pub witness: Option<MultiIndex>,
    pub witness_coefficient: Option<String>,
    pub bound: u64,
    /// Correct only if the true order bound is at most `bound`.
    pub conditional: bool,
    pub heuristic_bound: bool,
    pub engine: Engine,
}

/// Decides whether the first component vanishes through degree `D`.
pub fn eq_alg(s: &PolySystem, bounds: &BoundConfig) -> Result<ZeroVerdict> {
    eq_alg_with(s, bounds, Engine::Hensel)
}

pub fn eq_alg_with(s: &PolySystem, bounds: &BoundConfig, engine: Engine) -> Result<ZeroVerdict> {
    s.require_proper()?;
    let b = bounds.resolve(s)?;
    let n = checked_degree(b.d, s.k())?;
    let a = solve_first(s, n, engine)?;
    let w = graded_min(a.body(), 0, n);
    Ok(ZeroVerdict {
        zero: w.is_none(),
        witness: w.as_ref().map(|(e, _)| e.clone()),
        witness_coefficient: w.map(|(_, c)| c.to_string()),
        bound: b.d,
        conditional: true,
        heuristic_bound: b.heuristic,
        engine,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiniteVerdict {
    pub finite: bool,
    /// Degree of the solution when finite (0 for the zero series).
    pub degree: Option<u32>,
    pub witness: Option<MultiIndex>,
    pub window: (u64, u64),
    pub bound: u64,
    pub conditional: bool,
    pub heuristic_bound: bool,
    pub engine: Engine,
}

/// Finite support test: the solution has infinite support iff it has a
/// nonzero monomial with total degree in `[D + 1, D^2 + D]`.
pub fn fin_alg(s: &PolySystem, bounds: &BoundConfig) -> Result<FiniteVerdict> {
    fin_alg_with(s, bounds, Engine::Hensel)
}

pub fn fin_alg_with(s: &PolySystem, bounds: &BoundConfig, engine: Engine) -> Result<FiniteVerdict> {
    s.require_proper()?;
    let b = bounds.resolve(s)?;
    let top = b.window_top().ok_or_else(|| Error::BoundInfeasible {
        requested: u64::MAX,
        max_feasible: max_feasible(s.k()),
    })?;
    let n = checked_degree(top, s.k())?;
    let a = solve_first(s, n, engine)?;
    let lo = b.d as u32 + 1;
    let w = graded_min(a.body(), lo, n);
    let degree = if w.is_none() {
        Some(a.body().total_degree().unwrap_or(0))
    } else {
        None
    };
    Ok(FiniteVerdict {
        finite: w.is_none(),
        degree,
        witness: w.map(|(e, _)| e),
        window: (lo as u64, top),
        bound: b.d,
        conditional: true,
        heuristic_bound: b.heuristic,
        engine,
    })
}

// ---------------------------------------------------------------------------
// Reduction to a degree question

/// Choice of the per-variable degree bound `D'` used for reversal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReversalBound {
    /// Formal degree of the circuit.
    Formal,
    /// `2^size`.
    SizeExponent,
}

#[derive(Debug, Clone)]
pub struct Reduction {
    /// Reversal `f` of the approximant.
    pub circuit: Circuit,
    pub d_prime: BigUint,
    /// The solution vanishes through degree `D` iff `deg f < threshold`.
    pub threshold: BigUint,
    pub bound: Bound,
}

/// Reversal circuit of the stage-`n` approximant (`2^n > D`) and the degree
/// threshold `k D' - D`.
pub fn eq_alg_reduction_circuit(
    s: &PolySystem,
    bounds: &BoundConfig,
    d_prime: ReversalBound,
) -> Result<Reduction> {
    s.require_proper()?;
    let b = bounds.resolve(s)?;
    let e = PolynomialApproximants::build(s, stage_for_degree(b.d))?;
    let a = e.circuit(0);
    let dp = match d_prime {
        ReversalBound::Formal => a.formal_degree(),
        ReversalBound::SizeExponent => BigUint::from(1u32) << a.size(),
    };
    let f = degree_reversal_circuit(&a, &dp)?;
    let kd = &dp * BigUint::from(s.k());
    let d = BigUint::from(b.d);
    let threshold = if kd >= d { kd - d } else { BigUint::zero() };
    Ok(Reduction {
        circuit: f,
        d_prime: dp,
        threshold,
        bound: b,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeVerdict {
    pub zero: bool,
    pub probe: DegreeProbe,
    pub bound: u64,
    pub heuristic_bound: bool,
    /// Always true: a "zero" answer may be wrong with probability at most
    /// `probe.failure_bound`.
    pub probabilistic: bool,
}

/// Zeroness through the reduction and a Monte-Carlo degree probe.
pub fn eq_alg_probe(s: &PolySystem, bounds: &BoundConfig, p: u64, seed: u64) -> Result<ProbeVerdict> {
    let r = eq_alg_reduction_circuit(s, bounds, ReversalBound::Formal)?;
    let probe = degree_probe(&r.circuit, &r.threshold, p, seed)?;
    Ok(ProbeVerdict {
        zero: !probe.at_least,
        probe,
        bound: r.bound.d,
        heuristic_bound: r.bound.heuristic,
        probabilistic: true,
    })
}

// ---------------------------------------------------------------------------
// Circuits to systems

/// Output of [`slp_to_system`].
#[derive(Debug, Clone)]
pub struct SlpSystem {
    pub system: PolySystem,
    /// The first component equals `shift^alpha` times the circuit polynomial.
    pub alpha: u64,
    /// Name of the extra indeterminate (last in the indeterminate list).
    pub shift: String,
}

impl SlpSystem {
    /// Coefficient index in the system for monomial `X^v` of the circuit.
    pub fn shifted_index(&self, v: &MultiIndex) -> MultiIndex {
        let mut e = v.0.clone();
        e.push(self.alpha as u32);
        MultiIndex(e)
    }
}

/// Proper system whose first component is `xt^alpha * c(X)`.
///
/// The circuit is balanced into alternating layers first. Every leaf `m`
/// becomes `m * xt`; every product gate `g = a * b` becomes a variable with
/// `w_g = F_a F_b`, where `F` is the leaf term or the `+/-` combination of
/// variables directly below. Sums keep the `xt` exponent and products double
/// it, so a product at level `2j - 1` carries `xt^(2^j)`. A sum at the output
/// is closed off by one extra factor `xt`.
pub fn slp_to_system(c: &Circuit) -> Result<SlpSystem> {
    let c = c.prune();
    let mut shift = "xt".to_string();
    while c.vars().contains(&shift) {
        shift.push('\'');
    }
    let mut indets = c.vars().to_vec();
    indets.push(shift.clone());
    let k = c.vars().len();

    if c.gates()[c.output()].is_leaf() {
        let vars = vec!["y".to_string()];
        let amb: Vec<String> = indets.iter().chain(&vars).cloned().collect();
        let leaf = leaf_poly(&c.gates()[c.output()], &amb, k);
        let sys = PolySystem::new(indets, vars, vec![leaf])?;
        return Ok(SlpSystem {
            system: sys,
            alpha: 1,
            shift,
        });
    }

    let bal = balance_alternate(&c);
    let gates = bal.gates();
    let mut level = vec![0usize; gates.len()];
    for (i, g) in gates.iter().enumerate() {
        if let Some((a, _)) = g.operands() {
            level[i] = level[a] + 1;
        }
    }
    let out = bal.output();
    let muls: Vec<usize> = (0..gates.len())
        .filter(|&i| matches!(gates[i], Gate::Mul(..)))
        .collect();
    let out_is_mul = matches!(gates[out], Gate::Mul(..));
    let mut order: Vec<usize> = Vec::new();
    if out_is_mul {
        order.push(out);
    }
    order.extend(muls.iter().copied().filter(|&g| g != out));

    let taken = |n: &str| indets.iter().any(|v| v == n);
    let mut vars: Vec<String> = Vec::new();
    if !out_is_mul {
        let mut y = "y".to_string();
        while taken(&y) {
            y.push('\'');
        }
        vars.push(y);
    }
    let mut var_of = std::collections::HashMap::new();
    for &g in &order {
        let mut name = if g == out { "y".to_string() } else { format!("w{g}") };
        while taken(&name) || vars.contains(&name) {
            name.push('\'');
        }
        var_of.insert(g, vars.len());
        vars.push(name);
    }
    let amb: Vec<String> = indets.iter().chain(&vars).cloned().collect();
    let kk = indets.len();
    let yvar = |i: usize| Polynomial::var(&amb, kk + i);
    // F for a gate one level below a product, or below the output
    let form = |g: usize| -> Polynomial {
        match &gates[g] {
            leaf @ (Gate::Input(_) | Gate::Const(_)) => leaf_poly(leaf, &amb, k),
            Gate::Add(a, b) => yvar(var_of[a]).add(&yvar(var_of[b])).expect("ambient"),
            Gate::Sub(a, b) => yvar(var_of[a]).sub(&yvar(var_of[b])).expect("ambient"),
            Gate::Mul(..) => yvar(var_of[&g]),
        }
    };
    let mut rhs: Vec<Polynomial> = Vec::with_capacity(vars.len());
    if !out_is_mul {
        let xt = Polynomial::var(&amb, k);
        rhs.push(xt.mul(&form(out))?);
    }
    for &g in &order {
        let (a, b) = gates[g].operands().expect("product gate");
        rhs.push(form(a).mul(&form(b))?);
    }
    let top = level[out];
    let alpha_exp = if out_is_mul { top.div_ceil(2) } else { top / 2 };
    if alpha_exp >= 63 {
        return Err(Error::Invalid(format!(
            "multiplicative depth {alpha_exp} too large for the shift exponent"
        )));
    }
    let alpha = (1u64 << alpha_exp) + u64::from(!out_is_mul);
    let system = PolySystem::new(indets, vars, rhs)?;
    Ok(SlpSystem {
        system,
        alpha,
        shift,
    })
}

fn leaf_poly(g: &Gate, amb: &[String], k: usize) -> Polynomial {
    let xt = Polynomial::var(amb, k);
    match g {
        Gate::Input(i) => Polynomial::var(amb, *i).mul(&xt).expect("ambient"),
        Gate::Const(c) => xt.scale(c),
        _ => unreachable!("leaf"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{coefficient, geometric_sum_circuit};
    use crate::poly::syms;

    fn example1() -> PolySystem {
        PolySystem::parse("vars: y\nindets: x\ny = x + x^2 - 2*x*y + y^2\n").unwrap()
    }

    fn catalan() -> PolySystem {
        PolySystem::parse("vars: y\nindets: x\ny = x + 2*x*y + x*y^2\n").unwrap()
    }

    fn q(v: &[u32], p: u64) -> CoeffQuery {
        CoeffQuery {
            v: MultiIndex(v.to_vec()),
            p,
        }
    }

    #[test]
    fn primality() {
        let primes = [2u64, 3, 10007, 65537, 2_147_483_647, PROBE_PRIME, 18_446_744_073_709_551_557];
        for p in primes {
            assert!(is_prime_u64(p), "{p}");
        }
        for c in [0u64, 1, 4, 561, 3_215_031_751, 10007 * 65537, u64::MAX] {
            assert!(!is_prime_u64(c), "{c}");
        }
    }

    #[test]
    fn coeff_examples() {
        for engine in [Engine::Hensel, Engine::Kleene] {
            let r = coeff_alg(&catalan(), &q(&[10], 10007), engine).unwrap();
            assert_eq!(r.residue, 16796 % 10007);
            assert_eq!(r.residue, 6789);
            assert!(r.prime);
            assert_eq!(coeff_alg(&example1(), &q(&[7], 101), engine).unwrap().residue, 0);
            assert_eq!(coeff_alg(&catalan(), &q(&[0], 13), engine).unwrap().residue, 0);
            assert!(!coeff_alg(&catalan(), &q(&[3], 15), engine).unwrap().prime);
        }
        assert!(matches!(
            coeff_alg(&catalan(), &q(&[3], 1), Engine::Kleene),
            Err(Error::BadModulus(_))
        ));
        let bad = PolySystem::parse("vars: y\nindets: x\ny = 1 + x*y^2").unwrap();
        assert!(matches!(
            coeff_alg(&bad, &q(&[3], 7), Engine::Hensel),
            Err(Error::NotProper(_))
        ));
    }

    #[test]
    fn bound_config() {
        let s = catalan();
        assert_eq!(
            BoundConfig::Formula { c: 1 }.resolve(&s).unwrap(),
            Bound { d: 3, heuristic: true }
        );
        assert_eq!("7".parse::<BoundConfig>().unwrap(), BoundConfig::Explicit { d: 7 });
        assert_eq!("formula:2".parse::<BoundConfig>().unwrap(), BoundConfig::Formula { c: 2 });
        assert!(BoundConfig::Explicit { d: 0 }.resolve(&s).is_err());
        assert!("x".parse::<BoundConfig>().is_err());
    }

    #[test]
    fn zeroness() {
        let v = eq_alg(&example1(), &BoundConfig::Explicit { d: 4 }).unwrap();
        assert!(!v.zero);
        assert_eq!(v.witness, Some(MultiIndex(vec![1])));
        let diff = catalan().with_difference(0, 0, "z").unwrap();
        for engine in [Engine::Hensel, Engine::Kleene] {
            let v = eq_alg_with(&diff, &BoundConfig::Explicit { d: 6 }, engine).unwrap();
            assert!(v.zero);
            let f = fin_alg_with(&diff, &BoundConfig::Explicit { d: 2 }, engine).unwrap();
            assert!(f.finite);
            assert_eq!(f.degree, Some(0));
        }
    }

    #[test]
    fn finiteness() {
        let f = fin_alg(&example1(), &BoundConfig::Explicit { d: 4 }).unwrap();
        assert!(f.finite);
        assert_eq!(f.degree, Some(1));
        assert_eq!(f.window, (5, 20));
        let g = fin_alg(&catalan(), &BoundConfig::Explicit { d: 2 }).unwrap();
        assert!(!g.finite);
        assert_eq!(g.witness, Some(MultiIndex(vec![3])));
        assert_eq!(g.window, (3, 6));
    }

    #[test]
    fn infeasible_bound() {
        let s = PolySystem::parse("vars: y\nindets: a b c d e f\ny = a + b*y^2").unwrap();
        assert!(matches!(
            eq_alg(&s, &BoundConfig::Explicit { d: 10_000 }),
            Err(Error::BoundInfeasible { .. })
        ));
    }

    #[test]
    fn reduction_probe() {
        let v = eq_alg_probe(&example1(), &BoundConfig::Explicit { d: 4 }, PROBE_PRIME, 1).unwrap();
        assert!(!v.zero);
        let diff = catalan().with_difference(0, 0, "z").unwrap();
        let v = eq_alg_probe(&diff, &BoundConfig::Explicit { d: 4 }, PROBE_PRIME, 1).unwrap();
        assert!(v.zero);
        assert!(v.probe.failure_bound < 1e-9);
        // monomial sanity: a = x, D' = 2 reverses to x, degree 1 = k D' - D for D = 1
        let x = syms(&["x"]);
        let f = degree_reversal_circuit(&Circuit::input(&x, 0), &BigUint::from(2u32)).unwrap();
        assert_eq!(f.to_polynomial(), Polynomial::var(&x, 0));
        let r = eq_alg_reduction_circuit(&example1(), &BoundConfig::Explicit { d: 4 }, ReversalBound::SizeExponent)
            .unwrap();
        assert!(r.d_prime.bits() > 10);
    }

    #[test]
    fn slp_single_input_and_zero() {
        let x = syms(&["x"]);
        let r = slp_to_system(&Circuit::input(&x, 0)).unwrap();
        assert_eq!(r.alpha, 1);
        assert_eq!(r.system.to_string(), "vars: y\nindets: x xt\ny = x*xt\n");
        let z = slp_to_system(&Circuit::constant(&x, 0)).unwrap();
        assert!(kleene_solve(&z.system, 4).unwrap()[0].is_zero());
    }

    #[test]
    fn slp_geometric_sum() {
        let x = syms(&["x"]);
        let c = geometric_sum_circuit(&Circuit::input(&x, 0), 4);
        let r = slp_to_system(&c).unwrap();
        assert!(r.system.validate_proper().is_proper());
        for e in 0..=4u32 {
            let v = MultiIndex(vec![e]);
            let want = coefficient(&c, &v, None).unwrap();
            let idx = r.shifted_index(&v);
            assert_eq!(kleene_coefficient(&r.system, &idx, None).unwrap(), want, "x^{e}");
        }
        let idx = r.shifted_index(&MultiIndex(vec![2]));
        assert_eq!(
            coeff_alg(&r.system, &CoeffQuery { v: idx, p: 10007 }, Engine::Hensel).unwrap().residue,
            1
        );
    }
}
