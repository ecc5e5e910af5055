use algseries::decide::{
    coeff_alg, eq_alg, eq_alg_probe, fin_alg, BoundConfig, CoeffQuery, Engine, PROBE_PRIME,
};
use algseries::grammar::{Grammar, Rule, Sym};
use algseries::poly::MultiIndex;
use algseries::polysys::{kleene_solve, random_proper_system, PolySystem};
use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn catalan() -> PolySystem {
    PolySystem::parse("vars: y\nindets: x\ny = x + 2*x*y + x*y^2\n").unwrap()
}

fn example1() -> PolySystem {
    PolySystem::parse("vars: y\nindets: x\ny = x + x^2 - 2*x*y + y^2\n").unwrap()
}

#[test]
fn engines_agree_on_univariate_systems() {
    let mut systems = vec![catalan(), example1()];
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    systems.extend((0..2).map(|_| random_proper_system(&mut rng, 1, 2, 2, 3, 3)));
    for s in &systems {
        for p in [10007u64, 65537, 2_147_483_647] {
            for n in 0..=32u32 {
                let q = CoeffQuery { v: MultiIndex(vec![n]), p };
                let h = coeff_alg(s, &q, Engine::Hensel).unwrap();
                let k = coeff_alg(s, &q, Engine::Kleene).unwrap();
                assert_eq!(h.residue, k.residue, "n = {n}, p = {p}\n{s}");
            }
        }
    }
}

#[test]
fn catalan_order_within_bound() {
    let s = catalan();
    let n = 12u32;
    let sol = kleene_solve(&s, n).unwrap();
    // C = 1 + y satisfies 1 - C + x C^2 = 0
    let mut c: Vec<BigInt> = (0..=n).map(|e| sol[0].coeff(&MultiIndex(vec![e]))).collect();
    c[0] += 1;
    for e in 0..=n as usize {
        let sq: BigInt = (0..e).map(|i| &c[i] * &c[e - 1 - i]).sum();
        let lhs = BigInt::from(u8::from(e == 0)) - &c[e] + sq;
        assert!(lhs.is_zero(), "degree {e}");
    }
    let bound = u64::from(s.degree()).pow((s.l() * s.l()) as u32);
    let ord = u64::from(sol[0].ord().lower_bound());
    assert!(ord == 1 && ord <= bound);
}

#[test]
fn probe_agrees_with_eq_alg() {
    let zero = PolySystem::parse("vars: y z\nindets: x\ny = x*z - x^2\nz = x\n").unwrap();
    for (s, expect_zero) in [(example1(), false), (zero, true), (catalan(), false)] {
        let b = BoundConfig::Explicit { d: 3 };
        let exact = eq_alg(&s, &b).unwrap();
        assert_eq!(exact.zero, expect_zero);
        for seed in 0..3 {
            let probe = eq_alg_probe(&s, &b, PROBE_PRIME, seed).unwrap();
            assert_eq!(probe.zero, exact.zero, "seed {seed}\n{s}");
        }
    }
}

#[test]
fn unary_census_is_word_sum() {
    let g = Grammar::parse("terminals: a\nnonterminals: S T\nS -> a | a S T\nT -> a a | S T\n").unwrap();
    for name in ["S", "T"] {
        for n in 1..=8u32 {
            let w = vec![0usize; n as usize];
            assert_eq!(
                g.census_count(name, &MultiIndex(vec![n])).unwrap(),
                g.count_derivations(name, &w).unwrap(),
                "{name} at {n}"
            );
        }
    }
}

/// Random proper grammars over `a b` with nonterminals `A B C`.
fn arb_grammar() -> impl Strategy<Value = Grammar> {
    let sym = prop_oneof![(0usize..2).prop_map(Sym::T), (0usize..3).prop_map(Sym::N)];
    let rhs = prop::collection::vec(sym, 1..4).prop_filter("no unit rules", |r| {
        !(r.len() == 1 && matches!(r[0], Sym::N(_)))
    });
    prop::collection::vec((0usize..3, rhs, 1u64..3), 1..7).prop_map(|rules| {
        let rules = rules
            .into_iter()
            .map(|(lhs, rhs, weight)| Rule { lhs, rhs, weight })
            .collect();
        Grammar::new(
            vec!["a".into(), "b".into()],
            vec!["A".into(), "B".into(), "C".into()],
            None,
            rules,
        )
        .unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 48,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn zero_implies_finite_degree_zero(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_proper_system(&mut rng, 1, 2, 2, 2, 3);
        // y_1 - y_1 is the zero series
        let diff = s.with_difference(0, 0, "d").unwrap();
        let b = BoundConfig::Explicit { d: 3 };
        for sys in [&s, &diff] {
            let z = eq_alg(sys, &b).unwrap();
            let f = fin_alg(sys, &b).unwrap();
            if !z.zero {
                continue;
            }
            if f.finite {
                prop_assert_eq!(f.degree, Some(0));
            } else {
                // only possible when D is too small: the series starts above D
                let w = f.witness.unwrap();
                prop_assert!(w.total_degree() > 3);
                let exact = kleene_solve(sys, w.total_degree()).unwrap();
                prop_assert!(!exact[0].coeff(&w).is_zero());
                prop_assert_eq!(exact[0].ord().lower_bound(), w.total_degree());
            }
        }
        let f = fin_alg(&diff, &b).unwrap();
        prop_assert!(f.finite);
        prop_assert_eq!(f.degree, Some(0));
    }

    #[test]
    fn census_systems_are_proper_and_match(g in arb_grammar()) {
        let s = g.census_system().unwrap();
        prop_assert!(s.validate_proper().is_proper());
        let sol = kleene_solve(&s, 5).unwrap();
        for (i, name) in g.nonterminals().iter().enumerate() {
            for w in g.words_up_to(5) {
                let mut v = vec![0u32; 2];
                for &t in &w {
                    v[t] += 1;
                }
                let census = g.census_count(name, &MultiIndex(v.clone())).unwrap();
                prop_assert_eq!(BigUint::try_from(sol[i].coeff(&MultiIndex(v))).unwrap(), census);
            }
        }
    }
}
