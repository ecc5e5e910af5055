//! Degree reversal `f = (x1...xk)^D' * g(1/x1, ..., 1/xk)` and a Monte-Carlo
//! test for "total degree at least T".

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{expand, Circuit, CircuitBuilder, Gate};
use crate::poly::syms;
use crate::{Error, Result};

struct Reverser {
    b: CircuitBuilder,
    prod: usize,
    powers: HashMap<BigUint, usize>,
}

impl Reverser {
    fn power(&mut self, e: &BigUint) -> usize {
        if let Some(&g) = self.powers.get(e) {
            return g;
        }
        let g = self.b.pow(self.prod, e);
        self.powers.insert(e.clone(), g);
        g
    }

    fn shift(&mut self, n: usize, by: &BigUint) -> usize {
        if by.is_zero() {
            return n;
        }
        let p = self.power(by);
        self.b.mul(n, p)
    }
}

/// Division-free circuit for `(x1...xk)^d_prime * g(1/x)`, where `g` is the
/// polynomial of `c`. Each gate is rewritten to a pair (numerator, exponent)
/// with `g_gate(1/x) = numerator / (x1...xk)^exponent`; the exponent is the
/// gate's formal degree. Fails if that degree at the output exceeds `d_prime`.
pub fn degree_reversal_circuit(c: &Circuit, d_prime: &BigUint) -> Result<Circuit> {
    let c = c.prune();
    let k = c.vars().len();
    let mut b = CircuitBuilder::new(c.vars());
    let inputs: Vec<usize> = (0..k).map(|i| b.input(i)).collect();
    let prod = b.product(&inputs);
    let mut r = Reverser {
        b,
        prod,
        powers: HashMap::new(),
    };
    let mut num: Vec<usize> = Vec::with_capacity(c.size());
    let mut exp: Vec<BigUint> = Vec::with_capacity(c.size());
    for g in c.gates() {
        let (n, e) = match g {
            Gate::Input(i) => {
                let others: Vec<usize> = (0..k).filter(|j| j != i).map(|j| inputs[j]).collect();
                (r.b.product(&others), BigUint::from(1u32))
            }
            Gate::Const(v) => (r.b.constant(v.clone()), BigUint::zero()),
            Gate::Mul(a, bb) => (r.b.mul(num[*a], num[*bb]), &exp[*a] + &exp[*bb]),
            Gate::Add(a, bb) | Gate::Sub(a, bb) => {
                let e = exp[*a].clone().max(exp[*bb].clone());
                let na = r.shift(num[*a], &(&e - &exp[*a]));
                let nb = r.shift(num[*bb], &(&e - &exp[*bb]));
                let n = if matches!(g, Gate::Add(..)) {
                    r.b.add(na, nb)
                } else {
                    r.b.sub(na, nb)
                };
                (n, e)
            }
        };
        num.push(n);
        exp.push(e);
    }
    let e_out = &exp[c.output()];
    if e_out > d_prime {
        return Err(Error::DegreeBoundTooSmall {
            bound: d_prime.to_string(),
            needed: e_out.to_string(),
        });
    }
    let out = r.shift(num[c.output()], &(d_prime - e_out));
    Ok(r.b.circuit(out))
}

/// Outcome of [`degree_probe`].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DegreeProbe {
    /// A nonzero coefficient of degree `>= threshold` was observed. This
    /// direction is certain.
    pub at_least: bool,
    pub threshold: String,
    /// Formal degree of the circuit (an upper bound on its degree).
    pub formal_degree: String,
    pub prime: u64,
    /// Probability bound that `at_least == false` is wrong:
    /// formal degree divided by the prime.
    pub failure_bound: f64,
}

/// Largest gap between formal degree and threshold the probe will expand.
pub const MAX_PROBE_GAP: u64 = 1 << 20;

/// Tests whether the total degree of `c` is at least `threshold`.
///
/// Substitutes `x_i -> r_i t` with random `r_i` mod `p`, reverses the
/// resulting univariate circuit against its formal degree `E`, and looks for
/// a nonzero coefficient of degree at most `E - threshold`. A homogeneous
/// component of degree `j` that vanishes at the random point is missed with
/// probability at most `j / p` when `p` is prime.
pub fn degree_probe(c: &Circuit, threshold: &BigUint, p: u64, seed: u64) -> Result<DegreeProbe> {
    let c = c.prune();
    let formal = c.formal_degree();
    let mut report = DegreeProbe {
        at_least: false,
        threshold: threshold.to_string(),
        formal_degree: formal.to_string(),
        prime: p,
        failure_bound: 0.0,
    };
    if &formal < threshold {
        return Ok(report);
    }
    let gap = (&formal - threshold)
        .to_u64()
        .filter(|&g| g <= MAX_PROBE_GAP)
        .ok_or(Error::BoundInfeasible {
            requested: (&formal - threshold).to_u64().unwrap_or(u64::MAX),
            max_feasible: MAX_PROBE_GAP,
        })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = syms(&["t"]);
    let mut b = CircuitBuilder::new(&t);
    let tg = b.input(0);
    let mut map = Vec::with_capacity(c.size());
    for g in c.gates() {
        let h = match g {
            Gate::Input(_) => {
                let r = b.constant(rng.gen_range(1..p));
                b.push_raw(Gate::Mul(r, tg))
            }
            Gate::Const(v) => b.constant(v.clone()),
            Gate::Add(x, y) => b.push_raw(Gate::Add(map[*x], map[*y])),
            Gate::Sub(x, y) => b.push_raw(Gate::Sub(map[*x], map[*y])),
            Gate::Mul(x, y) => b.push_raw(Gate::Mul(map[*x], map[*y])),
        };
        map.push(h);
    }
    let uni = b.circuit(map[c.output()]);
    let rev = degree_reversal_circuit(&uni, &formal)?;
    let low = expand(&rev, gap as u32, Some(p))?;
    report.at_least = !low.is_zero();
    report.failure_bound = formal.to_f64().unwrap_or(f64::INFINITY) / p as f64;
    Ok(report)
}
