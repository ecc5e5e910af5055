//! Commutative rings that polynomials and circuits can be evaluated in.

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// A commutative ring with unity, given as a context object so that elements
/// can carry shared state (a modulus, a truncation layout) implicitly.
pub trait Algebra {
    type Elem: Clone;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_int(&self, c: &BigInt) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        self.sub(&self.zero(), a)
    }

    fn pow(&self, base: &Self::Elem, mut exp: u64) -> Self::Elem {
        let mut acc = self.one();
        let mut sq = base.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &sq);
            }
            exp >>= 1;
            if exp > 0 {
                sq = self.mul(&sq, &sq);
            }
        }
        acc
    }
}

/// The integers.
#[derive(Debug, Clone, Copy, Default)]
pub struct Integers;

impl Algebra for Integers {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn from_int(&self, c: &BigInt) -> BigInt {
        c.clone()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
}

/// Residues modulo `p` (any `p >= 2`, prime or not), stored in `[0, p)`.
#[derive(Debug, Clone, Copy)]
pub struct ModRing {
    p: u64,
}

impl ModRing {
    pub fn new(p: u64) -> crate::Result<Self> {
        if p < 2 {
            return Err(crate::Error::BadModulus(p.to_string()));
        }
        Ok(ModRing { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn reduce(&self, c: &BigInt) -> u64 {
        let r = c % BigInt::from(self.p);
        let r = if r < BigInt::zero() { r + BigInt::from(self.p) } else { r };
        u64::try_from(r).expect("residue fits in u64")
    }
}

impl Algebra for ModRing {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn from_int(&self, c: &BigInt) -> u64 {
        self.reduce(c)
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 + *b as u128) % self.p as u128) as u64
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 + self.p as u128 - *b as u128) % self.p as u128) as u64
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }
}
