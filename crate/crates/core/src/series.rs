//! Truncated multivariate power series over the integers.
//!
//! [`TruncatedSeries`] is the user-facing value: a polynomial body together
//! with the total degree `N` up to which its coefficients are known. Zero is
//! only ever "zero through degree `N`", which [`TruncatedSeries::ord`] reports
//! as [`Valuation::AtLeast`].
//!
//! [`SeriesRing`] is the dense engine used for bulk work (circuit evaluation,
//! fixed-point iteration). Coefficients live in a flat array indexed in mixed
//! radix, so multiplying monomials is adding indices; the per-variable bounds
//! guarantee no carries for simplex layouts.

use std::cell::Cell;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, ToPrimitive, Zero};

use crate::algebra::Algebra;
use crate::poly::{MultiIndex, Polynomial};
use crate::{Error, Result};

/// Order of a series: exact, or a lower bound when the known part vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Valuation {
    Finite(u32),
    /// The series is zero through degree `n - 1`; its order is at least `n`.
    AtLeast(u32),
}

impl Valuation {
    pub fn is_finite(&self) -> bool {
        matches!(self, Valuation::Finite(_))
    }

    /// A lower bound on the order that always holds.
    pub fn lower_bound(&self) -> u32 {
        match *self {
            Valuation::Finite(n) | Valuation::AtLeast(n) => n,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(n) => write!(f, "{n}"),
            Valuation::AtLeast(n) => write!(f, ">= {n}"),
        }
    }
}

/// An element of `Z[[X]]` known modulo monomials of total degree `> order_bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruncatedSeries {
    body: Polynomial,
    order_bound: u32,
}

impl TruncatedSeries {
    /// Wraps `body`, dropping every monomial of total degree above `order_bound`.
    pub fn new(body: Polynomial, order_bound: u32) -> Self {
        let body = body.filter_terms(|e| e.total_degree() <= order_bound);
        TruncatedSeries { body, order_bound }
    }

    pub fn zero(symbols: &[String], order_bound: u32) -> Self {
        Self::new(Polynomial::zero(symbols), order_bound)
    }

    pub fn var(symbols: &[String], i: usize, order_bound: u32) -> Self {
        Self::new(Polynomial::var(symbols, i), order_bound)
    }

    pub fn body(&self) -> &Polynomial {
        &self.body
    }

    pub fn into_body(self) -> Polynomial {
        self.body
    }

    pub fn order_bound(&self) -> u32 {
        self.order_bound
    }

    pub fn symbols(&self) -> &[String] {
        self.body.symbols()
    }

    pub fn coeff(&self, e: &MultiIndex) -> BigInt {
        self.body.coeff(e)
    }

    pub fn is_zero(&self) -> bool {
        self.body.is_zero()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self::new(
            self.body.add(&other.body)?,
            self.order_bound.min(other.order_bound),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self::new(
            self.body.sub(&other.body)?,
            self.order_bound.min(other.order_bound),
        ))
    }

    pub fn truncate(&self, n: u32) -> Result<Self> {
        if n > self.order_bound {
            return Err(Error::InsufficientPrecision {
                requested: n,
                available: self.order_bound,
            });
        }
        Ok(Self::new(self.body.clone(), n))
    }

    /// Product known through degree `n`.
    pub fn trunc_mul(&self, other: &Self, n: u32) -> Result<Self> {
        let available = self.order_bound.min(other.order_bound);
        if n > available {
            return Err(Error::InsufficientPrecision {
                requested: n,
                available,
            });
        }
        if self.symbols() != other.symbols() {
            return Err(Error::AmbientMismatch(
                self.symbols().to_vec(),
                other.symbols().to_vec(),
            ));
        }
        let mut terms = Vec::new();
        for (ea, ca) in self.body.terms() {
            let da = ea.total_degree();
            for (eb, cb) in other.body.terms() {
                if da + eb.total_degree() <= n {
                    terms.push((ea.add(eb), ca * cb));
                }
            }
        }
        Ok(Self::new(Polynomial::from_terms(self.symbols(), terms), n))
    }

    /// Inverse of a unit `±1 + f` with `f` quasiregular, through degree `n`.
    pub fn invert_unit(&self, n: u32) -> Result<Self> {
        let c0 = self.body.constant_term();
        if !(c0.is_one() || (-&c0).is_one()) {
            return Err(Error::NotAUnit(c0.to_string()));
        }
        if n > self.order_bound {
            return Err(Error::InsufficientPrecision {
                requested: n,
                available: self.order_bound,
            });
        }
        let syms = self.symbols().to_vec();
        // u = c0 (1 + g) with g = c0 u - 1, so u^{-1} = c0 * sum (-g)^j.
        let g = self.body.scale(&c0).sub(&Polynomial::constant(&syms, 1))?;
        let minus_g = Self::new(g.neg(), n);
        let mut acc = Self::new(Polynomial::constant(&syms, 1), n);
        let mut power = acc.clone();
        for _ in 0..n {
            power = power.trunc_mul(&minus_g, n)?;
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power)?;
        }
        Ok(Self::new(acc.body.scale(&c0), n))
    }

    /// Least total degree of a nonzero term.
    pub fn ord(&self) -> Valuation {
        match self.body.total_degree() {
            None => Valuation::AtLeast(self.order_bound + 1),
            Some(_) => Valuation::Finite(
                self.body
                    .terms()
                    .map(|(e, _)| e.total_degree())
                    .min()
                    .expect("nonzero"),
            ),
        }
    }

    /// Drops every term of total degree at most `d`.
    pub fn tail(&self, d: u32) -> Result<Self> {
        if d > self.order_bound {
            return Err(Error::InsufficientPrecision {
                requested: d,
                available: self.order_bound,
            });
        }
        Ok(TruncatedSeries {
            body: self.body.filter_terms(|e| e.total_degree() > d),
            order_bound: self.order_bound,
        })
    }

    pub fn reduce_mod_p(&self, p: &BigInt) -> Result<Self> {
        Ok(TruncatedSeries {
            body: self.body.reduce_mod_p(p)?,
            order_bound: self.order_bound,
        })
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O(deg {})", self.body, self.order_bound + 1)
    }
}

// ---------------------------------------------------------------------------
// Dense engine

/// Largest dense table the engine will allocate.
pub const MAX_DENSE_LEN: usize = 1 << 24;

/// Monomials `X^e` with `e_t <= bounds[t]` and `|e| <= total`, laid out in a
/// flat mixed-radix array.
#[derive(Debug)]
pub struct Layout {
    bounds: Vec<u32>,
    total: u32,
    strides: Vec<usize>,
    len: usize,
    degree: Vec<u32>,
    /// Valid indices sorted by total degree.
    valid: Vec<u32>,
    simplex: bool,
}

impl Layout {
    /// All monomials of total degree at most `total` in `k` indeterminates.
    pub fn simplex(k: usize, total: u32) -> Result<Arc<Layout>> {
        Self::boxed(vec![total; k], total)
    }

    /// Monomials inside the box `bounds` with total degree at most `total`.
    pub fn boxed(bounds: Vec<u32>, total: u32) -> Result<Arc<Layout>> {
        let mut strides = Vec::with_capacity(bounds.len());
        let mut len: usize = 1;
        for &b in &bounds {
            strides.push(len);
            len = len
                .checked_mul(b as usize + 1)
                .filter(|&l| l <= MAX_DENSE_LEN)
                .ok_or_else(|| Error::BoundInfeasible {
                    requested: total as u64,
                    max_feasible: max_feasible_total(bounds.len()),
                })?;
        }
        let mut degree = vec![0u32; len];
        for (idx, d) in degree.iter_mut().enumerate() {
            let mut rest = idx;
            let mut s = 0;
            for &b in &bounds {
                s += (rest % (b as usize + 1)) as u32;
                rest /= b as usize + 1;
            }
            *d = s;
        }
        let mut valid: Vec<u32> = (0..len as u32)
            .filter(|&i| degree[i as usize] <= total)
            .collect();
        valid.sort_by_key(|&i| degree[i as usize]);
        let simplex = bounds.iter().all(|&b| b >= total);
        Ok(Arc::new(Layout {
            bounds,
            total,
            strides,
            len,
            degree,
            valid,
            simplex,
        }))
    }

    pub fn nvars(&self) -> usize {
        self.bounds.len()
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, e: &[u32]) -> bool {
        e.len() == self.bounds.len()
            && e.iter().zip(&self.bounds).all(|(a, b)| a <= b)
            && e.iter().sum::<u32>() <= self.total
    }

    pub fn index_of(&self, e: &[u32]) -> Option<usize> {
        if !self.contains(e) {
            return None;
        }
        Some(e.iter().zip(&self.strides).map(|(&a, &s)| a as usize * s).sum())
    }

    pub fn exponents(&self, idx: usize) -> MultiIndex {
        let mut rest = idx;
        MultiIndex(
            self.bounds
                .iter()
                .map(|&b| {
                    let d = (rest % (b as usize + 1)) as u32;
                    rest /= b as usize + 1;
                    d
                })
                .collect(),
        )
    }

    pub fn degree(&self, idx: usize) -> u32 {
        self.degree[idx]
    }

    /// Valid indices ordered by total degree.
    pub fn valid(&self) -> &[u32] {
        &self.valid
    }

    fn no_carry(&self, i: usize, j: usize) -> bool {
        let (mut a, mut b) = (i, j);
        for &bound in &self.bounds {
            let r = bound as usize + 1;
            if a % r + b % r > bound as usize {
                return false;
            }
            a /= r;
            b /= r;
        }
        true
    }
}

/// Largest total degree whose simplex layout fits in `k` indeterminates.
pub fn max_feasible_total(k: usize) -> u64 {
    if k == 0 {
        return u64::MAX;
    }
    // largest n with (n + 1)^k <= MAX_DENSE_LEN
    let root = (MAX_DENSE_LEN as u64).nth_root(k as u32);
    root.saturating_sub(1)
}

/// Coefficient arithmetic for the dense engine.
pub trait CoeffRing {
    type C: Clone + PartialEq + fmt::Debug;

    fn zero(&self) -> Self::C;
    fn is_zero(&self, c: &Self::C) -> bool;
    fn from_big(&self, c: &BigInt) -> Self::C;
    fn to_big(&self, c: &Self::C) -> BigInt;
    fn add(&self, a: &Self::C, b: &Self::C) -> Self::C;
    fn sub(&self, a: &Self::C, b: &Self::C) -> Self::C;
    /// `acc += a * b`
    fn mul_acc(&self, acc: &mut Self::C, a: &Self::C, b: &Self::C);

    /// Set once results can no longer be trusted; further products are skipped.
    fn poisoned(&self) -> bool {
        false
    }
}

/// Exact coefficients.
#[derive(Debug, Clone, Copy, Default)]
pub struct BigCoeffs;

impl CoeffRing for BigCoeffs {
    type C = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn is_zero(&self, c: &BigInt) -> bool {
        c.is_zero()
    }
    fn from_big(&self, c: &BigInt) -> BigInt {
        c.clone()
    }
    fn to_big(&self, c: &BigInt) -> BigInt {
        c.clone()
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
    fn mul_acc(&self, acc: &mut BigInt, a: &BigInt, b: &BigInt) {
        *acc += a * b;
    }
}

/// Machine-word coefficients that record overflow instead of wrapping. A
/// computation whose flag is set afterwards must be redone with [`BigCoeffs`].
#[derive(Debug, Default)]
pub struct I128Coeffs {
    overflow: Cell<bool>,
}

impl I128Coeffs {
    pub fn overflowed(&self) -> bool {
        self.overflow.get()
    }

    fn check(&self, r: Option<i128>) -> i128 {
        r.unwrap_or_else(|| {
            self.overflow.set(true);
            0
        })
    }
}

impl CoeffRing for I128Coeffs {
    type C = i128;

    fn zero(&self) -> i128 {
        0
    }
    fn is_zero(&self, c: &i128) -> bool {
        *c == 0
    }
    fn from_big(&self, c: &BigInt) -> i128 {
        self.check(c.to_i128())
    }
    fn to_big(&self, c: &i128) -> BigInt {
        BigInt::from(*c)
    }
    fn add(&self, a: &i128, b: &i128) -> i128 {
        self.check(a.checked_add(*b))
    }
    fn sub(&self, a: &i128, b: &i128) -> i128 {
        self.check(a.checked_sub(*b))
    }
    fn mul_acc(&self, acc: &mut i128, a: &i128, b: &i128) {
        let r = a.checked_mul(*b).and_then(|m| acc.checked_add(m));
        *acc = self.check(r);
    }
    fn poisoned(&self) -> bool {
        self.overflow.get()
    }
}

/// Coefficients modulo `p < 2^63`.
#[derive(Debug, Clone, Copy)]
pub struct ModCoeffs {
    p: u64,
}

impl ModCoeffs {
    pub fn new(p: u64) -> Result<Self> {
        if p < 2 {
            return Err(Error::BadModulus(p.to_string()));
        }
        Ok(ModCoeffs { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }
}

impl CoeffRing for ModCoeffs {
    type C = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn is_zero(&self, c: &u64) -> bool {
        *c == 0
    }
    fn from_big(&self, c: &BigInt) -> u64 {
        c.mod_floor(&BigInt::from(self.p)).to_u64().expect("reduced")
    }
    fn to_big(&self, c: &u64) -> BigInt {
        BigInt::from(*c)
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 + *b as u128) % self.p as u128) as u64
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 + self.p as u128 - *b as u128) % self.p as u128) as u64
    }
    fn mul_acc(&self, acc: &mut u64, a: &u64, b: &u64) {
        *acc = ((*acc as u128 + (*a as u128 * *b as u128)) % self.p as u128) as u64;
    }
}

/// Truncated series over a [`Layout`] with coefficients in `R`.
#[derive(Debug)]
pub struct SeriesRing<R: CoeffRing> {
    layout: Arc<Layout>,
    ring: R,
}

impl<R: CoeffRing> SeriesRing<R> {
    pub fn new(layout: Arc<Layout>, ring: R) -> Self {
        SeriesRing { layout, ring }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn coeffs(&self) -> &R {
        &self.ring
    }

    /// The indeterminate `x_t` (zero if it falls outside the layout).
    pub fn variable(&self, t: usize) -> Vec<R::C> {
        let mut out = vec![self.ring.zero(); self.layout.len];
        let e = MultiIndex::unit(self.layout.nvars(), t);
        if let Some(i) = self.layout.index_of(&e.0) {
            out[i] = self.ring.from_big(&BigInt::one());
        }
        out
    }

    /// Projects a polynomial over the layout's indeterminates.
    pub fn from_polynomial(&self, p: &Polynomial) -> Vec<R::C> {
        let mut out = vec![self.ring.zero(); self.layout.len];
        for (e, c) in p.terms() {
            if let Some(i) = self.layout.index_of(&e.0) {
                out[i] = self.ring.from_big(c);
            }
        }
        out
    }

    pub fn to_polynomial(&self, v: &[R::C], symbols: &[String]) -> Polynomial {
        let terms = self
            .layout
            .valid
            .iter()
            .map(|&i| i as usize)
            .filter(|&i| !self.ring.is_zero(&v[i]))
            .map(|i| (self.layout.exponents(i), self.ring.to_big(&v[i])));
        Polynomial::from_terms(symbols, terms)
    }

    pub fn is_zero_elem(&self, v: &[R::C]) -> bool {
        self.layout.valid.iter().all(|&i| self.ring.is_zero(&v[i as usize]))
    }

    fn nonzero(&self, v: &[R::C]) -> Vec<(usize, u32)> {
        self.layout
            .valid
            .iter()
            .map(|&i| i as usize)
            .filter(|&i| !self.ring.is_zero(&v[i]))
            .map(|i| (i, self.layout.degree[i]))
            .collect()
    }
}

impl<R: CoeffRing> Algebra for SeriesRing<R> {
    type Elem = Vec<R::C>;

    fn zero(&self) -> Vec<R::C> {
        vec![self.ring.zero(); self.layout.len]
    }

    fn one(&self) -> Vec<R::C> {
        self.from_int(&BigInt::one())
    }

    fn from_int(&self, c: &BigInt) -> Vec<R::C> {
        let mut out = self.zero();
        if !out.is_empty() {
            out[0] = self.ring.from_big(c);
        }
        out
    }

    fn add(&self, a: &Vec<R::C>, b: &Vec<R::C>) -> Vec<R::C> {
        a.iter().zip(b).map(|(x, y)| self.ring.add(x, y)).collect()
    }

    fn sub(&self, a: &Vec<R::C>, b: &Vec<R::C>) -> Vec<R::C> {
        a.iter().zip(b).map(|(x, y)| self.ring.sub(x, y)).collect()
    }

    fn mul(&self, a: &Vec<R::C>, b: &Vec<R::C>) -> Vec<R::C> {
        self.mul_limited(a, b, self.layout.total)
    }
}

impl<R: CoeffRing> SeriesRing<R> {
    /// Product keeping only terms of total degree at most `limit`.
    pub fn mul_limited(&self, a: &[R::C], b: &[R::C], limit: u32) -> Vec<R::C> {
        let total = limit.min(self.layout.total);
        if self.ring.poisoned() {
            return self.zero();
        }
        let na = self.nonzero(a);
        let nb = self.nonzero(b);
        let mut out = self.zero();
        if na.is_empty() || nb.is_empty() {
            return out;
        }
        for &(i, di) in &na {
            if di > total {
                break;
            }
            let limit = total - di;
            for &(j, dj) in &nb {
                if dj > limit {
                    break;
                }
                if !self.layout.simplex && !self.layout.no_carry(i, j) {
                    continue;
                }
                self.ring.mul_acc(&mut out[i + j], &a[i], &b[j]);
            }
        }
        out
    }
}
