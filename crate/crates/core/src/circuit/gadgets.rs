//! Circuit constructions: logarithmic geometric sums, division-free
//! determinants and adjugates, and balancing into alternating layers.

use std::collections::HashMap;

use num_bigint::BigInt;

use super::{reachable, Circuit, CircuitBuilder, Gate};
use crate::{Error, Result};

/// Circuit for `1 + b + b^2 + ... + b^m` where `b` is the polynomial of `base`.
///
/// Keeps the pair `(b^j, 1 + ... + b^(j-1))` and walks the bits of `m + 1`
/// from the top: doubling `j` costs three gates, incrementing it three more.
/// The result has at most `size(base) + 6 * floor(log2(m + 1)) + 1` gates.
pub fn geometric_sum_circuit(base: &Circuit, m: u64) -> Circuit {
    let mut b = CircuitBuilder::new(base.vars());
    let x = b.append(base).expect("same variables");
    let out = b.geometric_sum(x, m);
    b.circuit(out)
}

impl CircuitBuilder {
    /// Gate computing `1 + x + ... + x^m`.
    pub fn geometric_sum(&mut self, x: usize, m: u64) -> usize {
        let target = m as u128 + 1;
        let bits = 128 - target.leading_zeros();
        let mut sum = self.one();
        let mut pow = x;
        for i in (0..bits - 1).rev() {
            let inc = self.one();
            let p1 = self.add(pow, inc);
            sum = self.mul(sum, p1);
            pow = self.mul(pow, pow);
            if (target >> i) & 1 == 1 {
                let shifted = self.mul(x, sum);
                let one = self.one();
                sum = self.add(shifted, one);
                pow = self.mul(pow, x);
            }
        }
        sum
    }

    /// Coefficients `c_0 = 1, c_1, ..., c_n` of `det(t I - M)` by Berkowitz's
    /// division-free algorithm.
    pub fn charpoly(&mut self, m: &[Vec<usize>]) -> Vec<usize> {
        let n = m.len();
        if n == 0 {
            return vec![self.one()];
        }
        let one = self.one();
        let last = self.neg(m[n - 1][n - 1]);
        let mut vec = vec![one, last];
        for k in (0..n - 1).rev() {
            let s = n - k - 1;
            // Toeplitz column: 1, -a, -R C, -R M C, ..., -R M^(s-1) C
            let mut col = vec![self.one(), self.neg(m[k][k])];
            let mut v: Vec<usize> = (k + 1..n).map(|i| m[i][k]).collect();
            for j in 0..s {
                if j > 0 {
                    v = (k + 1..n)
                        .map(|i| {
                            let terms: Vec<usize> = (k + 1..n)
                                .zip(&v)
                                .map(|(l, &vl)| self.mul(m[i][l], vl))
                                .collect();
                            self.sum(&terms)
                        })
                        .collect();
                }
                let terms: Vec<usize> = (k + 1..n)
                    .zip(&v)
                    .map(|(l, &vl)| self.mul(m[k][l], vl))
                    .collect();
                let rc = self.sum(&terms);
                col.push(self.neg(rc));
            }
            let next: Vec<usize> = (0..s + 2)
                .map(|i| {
                    let terms: Vec<usize> = (0..=i.min(s))
                        .map(|j| self.mul(col[i - j], vec[j]))
                        .collect();
                    self.sum(&terms)
                })
                .collect();
            vec = next;
        }
        vec
    }

    /// Determinant of a square matrix of gates.
    pub fn determinant(&mut self, m: &[Vec<usize>]) -> usize {
        let n = m.len();
        let c = self.charpoly(m);
        if n.is_multiple_of(2) {
            c[n]
        } else {
            self.neg(c[n])
        }
    }

    /// Adjugate and determinant via Cayley-Hamilton:
    /// `adj(M) = (-1)^(n+1) (M^(n-1) + c_1 M^(n-2) + ... + c_(n-1) I)`.
    pub fn adjugate(&mut self, m: &[Vec<usize>]) -> (Vec<Vec<usize>>, usize) {
        let n = m.len();
        let c = self.charpoly(m);
        let det = if n.is_multiple_of(2) { c[n] } else { self.neg(c[n]) };
        let zero = self.zero();
        // Horner: B = I; B = B M + c_j I for j = 1..n-1
        let mut b: Vec<Vec<usize>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { c[0] } else { zero }).collect())
            .collect();
        for cj in c.iter().take(n).skip(1) {
            let mut next = vec![vec![zero; n]; n];
            for i in 0..n {
                for j in 0..n {
                    let terms: Vec<usize> = (0..n).map(|l| self.mul(b[i][l], m[l][j])).collect();
                    let mut e = self.sum(&terms);
                    if i == j {
                        e = self.add(e, *cj);
                    }
                    next[i][j] = e;
                }
            }
            b = next;
        }
        if n.is_multiple_of(2) {
            for row in b.iter_mut() {
                for e in row.iter_mut() {
                    *e = self.neg(*e);
                }
            }
        }
        (b, det)
    }
}

fn check_square(entries: &[Vec<Circuit>]) -> Result<()> {
    for row in entries {
        if row.len() != entries.len() {
            return Err(Error::NotSquare {
                rows: entries.len(),
                cols: row.len(),
            });
        }
    }
    if entries.is_empty() {
        return Err(Error::NotSquare { rows: 0, cols: 0 });
    }
    Ok(())
}

fn load_matrix(entries: &[Vec<Circuit>]) -> Result<(CircuitBuilder, Vec<Vec<usize>>)> {
    check_square(entries)?;
    let mut vars: Vec<String> = Vec::new();
    for c in entries.iter().flatten() {
        for v in c.vars() {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
    }
    let mut b = CircuitBuilder::new(&vars);
    let m = entries
        .iter()
        .map(|row| row.iter().map(|c| b.append(c)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok((b, m))
}

/// Determinant of a matrix whose entries are circuits. Variables are merged
/// by name in order of first appearance.
pub fn determinant_circuit(entries: &[Vec<Circuit>]) -> Result<Circuit> {
    let (mut b, m) = load_matrix(entries)?;
    let d = b.determinant(&m);
    Ok(b.circuit(d))
}

/// Adjugate matrix: entry `(i, j)` is the `(j, i)` cofactor.
pub fn adjugate_circuits(entries: &[Vec<Circuit>]) -> Result<Vec<Vec<Circuit>>> {
    let (mut b, m) = load_matrix(entries)?;
    let (adj, _) = b.adjugate(&m);
    Ok(adj
        .iter()
        .map(|row| row.iter().map(|&g| b.circuit(g)).collect())
        .collect())
}

// ---------------------------------------------------------------------------
// Balancing

/// Equivalent circuit in layers: leaves at level 0, products at odd levels,
/// sums and differences at even levels >= 2, and every operand exactly one
/// level below its gate. Gaps are bridged with `* 1` and `+ 0` gates whose
/// constants are themselves built up level by level, so every leaf-to-output
/// path has the same length. A leaf output is padded to level 2.
pub fn balance_alternate(c: &Circuit) -> Circuit {
    let c = c.prune();
    let gates = c.gates();
    let mut level = vec![0usize; gates.len()];
    for (i, g) in gates.iter().enumerate() {
        level[i] = match g {
            Gate::Input(_) | Gate::Const(_) => 0,
            Gate::Mul(a, b) => {
                let m = level[*a].max(level[*b]);
                if m.is_multiple_of(2) { m + 1 } else { m + 2 }
            }
            Gate::Add(a, b) | Gate::Sub(a, b) => {
                let m = level[*a].max(level[*b]);
                if m % 2 == 1 { m + 1 } else { m + 2 }
            }
        };
    }
    let mut bal = Balancer {
        out: Vec::new(),
        ones: Vec::new(),
        zeros: Vec::new(),
        lifted: HashMap::new(),
    };
    let mut at = vec![0usize; gates.len()];
    for (i, g) in gates.iter().enumerate() {
        at[i] = match g {
            Gate::Input(_) | Gate::Const(_) => bal.push(g.clone()),
            Gate::Add(a, b) | Gate::Sub(a, b) | Gate::Mul(a, b) => {
                let la = bal.lift(at[*a], level[*a], level[i] - 1);
                let lb = bal.lift(at[*b], level[*b], level[i] - 1);
                bal.push(match g {
                    Gate::Add(..) => Gate::Add(la, lb),
                    Gate::Sub(..) => Gate::Sub(la, lb),
                    _ => Gate::Mul(la, lb),
                })
            }
        };
    }
    let mut out = at[c.output()];
    if level[c.output()] == 0 {
        out = bal.lift(out, 0, 2);
    }
    Circuit::new(c.vars().to_vec(), bal.out, out).expect("balanced circuit is well formed")
}

struct Balancer {
    out: Vec<Gate>,
    ones: Vec<usize>,
    zeros: Vec<usize>,
    lifted: HashMap<(usize, usize), usize>,
}

impl Balancer {
    fn push(&mut self, g: Gate) -> usize {
        self.out.push(g);
        self.out.len() - 1
    }

    fn ensure_consts(&mut self, level: usize) {
        while self.ones.len() <= level {
            let l = self.ones.len();
            if l == 0 {
                let o = self.push(Gate::Const(BigInt::from(1)));
                let z = self.push(Gate::Const(BigInt::from(0)));
                self.ones.push(o);
                self.zeros.push(z);
            } else {
                let (o, z) = (self.ones[l - 1], self.zeros[l - 1]);
                let (no, nz) = if l % 2 == 1 {
                    (self.push(Gate::Mul(o, o)), self.push(Gate::Mul(z, o)))
                } else {
                    (self.push(Gate::Add(o, z)), self.push(Gate::Add(z, z)))
                };
                self.ones.push(no);
                self.zeros.push(nz);
            }
        }
    }

    /// Carries gate `g` (at level `from`) up to level `to`.
    fn lift(&mut self, g: usize, from: usize, to: usize) -> usize {
        let mut cur = g;
        for l in from..to {
            if let Some(&h) = self.lifted.get(&(g, l + 1)) {
                cur = h;
                continue;
            }
            self.ensure_consts(l);
            cur = if (l + 1) % 2 == 1 {
                let one = self.ones[l];
                self.push(Gate::Mul(cur, one))
            } else {
                let zero = self.zeros[l];
                self.push(Gate::Add(cur, zero))
            };
            self.lifted.insert((g, l + 1), cur);
        }
        cur
    }
}

/// True when every reachable gate sits exactly one level above both operands
/// and levels alternate as produced by [`balance_alternate`].
pub fn is_balanced_alternating(c: &Circuit) -> bool {
    let gates = c.gates();
    let live = reachable(gates, &[c.output()]);
    let mut level = vec![0usize; gates.len()];
    for (i, g) in gates.iter().enumerate() {
        if !live[i] {
            continue;
        }
        if let Some((a, b)) = g.operands() {
            if level[a] != level[b] {
                return false;
            }
            level[i] = level[a] + 1;
            let odd = level[i] % 2 == 1;
            if odd != matches!(g, Gate::Mul(..)) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{eval_mod_p, expand};
    use crate::poly::{syms, Polynomial};
    use num_traits::ToPrimitive;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P64: u64 = 18_446_744_073_709_551_557; // largest prime below 2^64

    fn x() -> Vec<String> {
        syms(&["x"])
    }

    fn xc() -> Circuit {
        Circuit::input(&x(), 0)
    }

    #[test]
    fn geometric_small_cases() {
        let c0 = geometric_sum_circuit(&xc(), 0);
        assert_eq!(c0.to_polynomial(), Polynomial::constant(&x(), 1));
        let c3 = geometric_sum_circuit(&xc(), 3);
        assert_eq!(
            expand(&c3, 3, None).unwrap().into_body(),
            Polynomial::parse("1 + x + x^2 + x^3", &x()).unwrap()
        );
        let c4 = geometric_sum_circuit(&xc(), 4);
        assert_eq!(
            expand(&c4, 4, None).unwrap().into_body(),
            Polynomial::parse("1 + x + x^2 + x^3 + x^4", &x()).unwrap()
        );
        let c8 = geometric_sum_circuit(&xc(), 8);
        let mut pt = HashMap::new();
        pt.insert("x".to_string(), 1);
        assert_eq!(eval_mod_p(&c8, &pt, 101).unwrap(), 9);
    }

    #[test]
    fn geometric_exact_for_all_small_m() {
        for m in 0..40u64 {
            let c = geometric_sum_circuit(&xc(), m);
            let expect = Polynomial::from_terms(
                &x(),
                (0..=m as u32).map(|i| (vec![i].into(), BigInt::from(1))),
            );
            assert_eq!(c.to_polynomial(), expect, "m = {m}");
            let bound = 1 + 6 * (64 - (m + 1).leading_zeros() as usize - 1) + 1;
            assert!(c.size() <= bound, "m = {m}: {} > {bound}", c.size());
        }
    }

    #[test]
    fn geometric_size_is_logarithmic() {
        let mut pt = HashMap::new();
        pt.insert("x".to_string(), 1);
        for e in (4..=20).step_by(4) {
            let m = 1u64 << e;
            let c = geometric_sum_circuit(&xc(), m);
            assert!(c.size() <= 1 + 6 * e + 1, "2^{e}: {}", c.size());
            assert_eq!(eval_mod_p(&c, &pt, 1_000_000_007).unwrap(), m + 1);
        }
    }

    fn var_matrix(n: usize) -> (Vec<String>, Vec<Vec<Circuit>>) {
        let names: Vec<String> = (0..n * n).map(|i| format!("m{i}")).collect();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| Circuit::input(&names, i * n + j)).collect())
            .collect();
        (names, entries)
    }

    /// Leibniz expansion over all permutations.
    fn leibniz(vals: &[Vec<i64>]) -> i64 {
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    out.push(q);
                }
            }
            out
        }
        let n = vals.len();
        perms(n)
            .into_iter()
            .map(|p| {
                let inv = (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| p[i] > p[j])
                    .count();
                let sign = if inv % 2 == 0 { 1 } else { -1 };
                sign * (0..n).map(|i| vals[i][p[i]]).product::<i64>()
            })
            .sum()
    }

    #[test]
    fn determinant_small() {
        let (_, e1) = var_matrix(1);
        let d1 = determinant_circuit(&e1).unwrap();
        assert_eq!(d1.to_polynomial(), e1[0][0].to_polynomial());
        let (names, e2) = var_matrix(2);
        let d2 = determinant_circuit(&e2).unwrap();
        assert_eq!(
            d2.to_polynomial().embed(&names).unwrap(),
            Polynomial::parse("m0*m3 - m1*m2", &names).unwrap()
        );
        let adj = adjugate_circuits(&e2).unwrap();
        let expect = [["m3", "-m1"], ["-m2", "m0"]];
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(
                    adj[i][j].to_polynomial().embed(&names).unwrap(),
                    Polynomial::parse(expect[i][j], &names).unwrap()
                );
            }
        }
        let adj1 = adjugate_circuits(&e1).unwrap();
        assert_eq!(adj1[0][0].to_polynomial().constant_term(), BigInt::from(1));
        assert!(matches!(
            determinant_circuit(&[vec![xc(), xc()]]),
            Err(Error::NotSquare { .. })
        ));
    }

    #[test]
    fn determinant_matches_leibniz() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=4 {
            let (names, e) = var_matrix(n);
            let d = determinant_circuit(&e).unwrap();
            for _ in 0..10 {
                let vals: Vec<Vec<i64>> =
                    (0..n).map(|_| (0..n).map(|_| rng.gen_range(-9..10)).collect()).collect();
                let pt: HashMap<String, u64> = names
                    .iter()
                    .enumerate()
                    .map(|(k, v)| (v.clone(), vals[k / n][k % n].rem_euclid(1_000_003) as u64))
                    .collect();
                let got = eval_mod_p(&d, &pt, 1_000_003).unwrap();
                assert_eq!(got, leibniz(&vals).rem_euclid(1_000_003) as u64);
            }
        }
        // exact 6-term expansion for 3x3
        let (names, e) = var_matrix(3);
        let d = determinant_circuit(&e).unwrap();
        let six = "m0*m4*m8 - m0*m5*m7 - m1*m3*m8 + m1*m5*m6 + m2*m3*m7 - m2*m4*m6";
        let exp = expand(&d, 3, None).unwrap().into_body().embed(&names).unwrap();
        assert_eq!(exp, Polynomial::parse(six, &names).unwrap());
    }

    #[test]
    fn adjugate_identity_mod_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = P64;
        let ring = crate::algebra::ModRing::new(p).unwrap();
        use crate::algebra::Algebra;
        for n in 1..=5 {
            let (names, e) = var_matrix(n);
            let mut b = CircuitBuilder::new(&names);
            let m: Vec<Vec<usize>> = (0..n)
                .map(|i| (0..n).map(|j| b.input(i * n + j)).collect())
                .collect();
            let (adj, det) = b.adjugate(&m);
            drop(e);
            for _ in 0..10 {
                let pt: Vec<u64> = (0..n * n).map(|_| rng.gen_range(0..p)).collect();
                let mut outs: Vec<usize> = adj.iter().flatten().copied().collect();
                outs.push(det);
                let vals = super::super::evaluate_outputs(b.gates(), &outs, &ring, &pt);
                let dv = vals[n * n];
                for i in 0..n {
                    for j in 0..n {
                        let mut acc = 0u64;
                        for l in 0..n {
                            acc = ring.add(&acc, &ring.mul(&pt[i * n + l], &vals[l * n + j]));
                        }
                        assert_eq!(acc, if i == j { dv } else { 0 }, "n = {n}");
                    }
                }
            }
        }
    }

    fn agree_at_random_points(a: &Circuit, b: &Circuit, rng: &mut ChaCha8Rng, k: usize) -> bool {
        (0..k).all(|_| {
            let pt: HashMap<String, u64> =
                a.vars().iter().map(|v| (v.clone(), rng.gen_range(0..P64))).collect();
            eval_mod_p(a, &pt, P64).unwrap() == eval_mod_p(b, &pt, P64).unwrap()
        })
    }

    #[test]
    fn balance_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let single = balance_alternate(&xc());
        assert!(is_balanced_alternating(&single));
        assert_eq!(single.to_polynomial(), xc().to_polynomial());
        let c = Circuit::parse("g0 = input x\ng1 = mul g0 g0\ng2 = add g0 g1\noutput g2").unwrap();
        let bc = balance_alternate(&c);
        assert!(is_balanced_alternating(&bc));
        assert!(!is_balanced_alternating(&c));
        assert!(agree_at_random_points(&c, &bc, &mut rng, 5));
        let fig = geometric_sum_circuit(&xc(), 8);
        let bf = balance_alternate(&fig);
        assert!(is_balanced_alternating(&bf));
        assert!(agree_at_random_points(&fig, &bf, &mut rng, 10));
        let again = balance_alternate(&bf);
        assert!(is_balanced_alternating(&again));
        assert_eq!(again.to_polynomial(), fig.to_polynomial());
    }

    proptest::proptest! {
        #[test]
        fn balance_preserves_polynomial(c in crate::circuit::tests::random_circuit(3), seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let bc = balance_alternate(&c);
            proptest::prop_assert!(is_balanced_alternating(&bc));
            proptest::prop_assert!(agree_at_random_points(&c, &bc, &mut rng, 10));
            let depth = bc.size().to_f64().unwrap();
            proptest::prop_assert!(depth > 0.0);
        }
    }
}
