//! Truncated graded-commutative rings of cycle classes with exact rational
//! coefficients.
//!
//! A [`RingContext`] fixes the generating symbols, their codimensions, a
//! global truncation bound `T` (classes of codimension `> T` vanish) and an
//! optional pullback bound `m`: a monomial whose pullback-flagged factors
//! have combined codimension above `m` vanishes, since `pi^*` of a class of
//! codimension `> dim X` is zero. Every [`ClassPoly`] is kept reduced with
//! respect to both rules.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num::{BigRational, One, Zero};
use thiserror::Error;

use crate::expr::{self, ExprAlgebra, ParseError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("a ring needs at least one symbol")]
    NoSymbols,
    #[error("duplicate symbol '{0}'")]
    DuplicateSymbol(String),
    #[error("symbol '{0}' must have positive codimension")]
    NonPositiveCodim(String),
    #[error("operands live in different ring contexts")]
    ContextMismatch,
    #[error("constant term is {0}, expected 1")]
    NotAUnit(String),
    #[error("no image given for symbol '{0}'")]
    MissingImage(String),
    #[error("image of '{symbol}' must be homogeneous of codimension {expected}")]
    GradingMismatch { symbol: String, expected: u32 },
    #[error("divisor is not monic of positive degree in '{0}'")]
    NotMonic(String),
    #[error("unknown symbol '{0}'")]
    UnknownSymbol(String),
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolSpec {
    pub name: String,
    pub codim: u32,
    /// Set for classes pulled back from the base variety.
    pub pullback: bool,
}

impl SymbolSpec {
    pub fn new(name: impl Into<String>, codim: u32) -> Self {
        SymbolSpec {
            name: name.into(),
            codim,
            pullback: false,
        }
    }

    pub fn pulled_back(name: impl Into<String>, codim: u32) -> Self {
        SymbolSpec {
            name: name.into(),
            codim,
            pullback: true,
        }
    }
}

#[derive(Debug, PartialEq, Eq)]
struct ContextInner {
    symbols: Vec<SymbolSpec>,
    truncation: u32,
    pullback_bound: Option<u32>,
}

/// Shared, immutable description of a truncated ring.
#[derive(Debug, Clone)]
pub struct RingContext(Arc<ContextInner>);

impl PartialEq for RingContext {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for RingContext {}

impl RingContext {
    pub fn declare(
        symbols: Vec<SymbolSpec>,
        truncation: u32,
        pullback_bound: Option<u32>,
    ) -> Result<Self, RingError> {
        if symbols.is_empty() {
            return Err(RingError::NoSymbols);
        }
        for (i, s) in symbols.iter().enumerate() {
            if s.codim == 0 {
                return Err(RingError::NonPositiveCodim(s.name.clone()));
            }
            if symbols[..i].iter().any(|t| t.name == s.name) {
                return Err(RingError::DuplicateSymbol(s.name.clone()));
            }
        }
        Ok(RingContext(Arc::new(ContextInner {
            symbols,
            truncation,
            pullback_bound,
        })))
    }

    pub fn symbols(&self) -> &[SymbolSpec] {
        &self.0.symbols
    }

    pub fn truncation(&self) -> u32 {
        self.0.truncation
    }

    pub fn pullback_bound(&self) -> Option<u32> {
        self.0.pullback_bound
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.symbols.iter().position(|s| s.name == name)
    }

    fn codim_of(&self, exps: &[u32]) -> u32 {
        exps.iter()
            .zip(&self.0.symbols)
            .map(|(e, s)| e * s.codim)
            .sum()
    }

    /// Whether a monomial of the given exponents survives the truncation and
    /// nilpotency rules.
    fn survives(&self, exps: &[u32], codim: u32) -> bool {
        if codim > self.0.truncation {
            return false;
        }
        if let Some(bound) = self.0.pullback_bound {
            let pulled: u32 = exps
                .iter()
                .zip(&self.0.symbols)
                .filter(|(_, s)| s.pullback)
                .map(|(e, s)| e * s.codim)
                .sum();
            if pulled > bound {
                return false;
            }
        }
        true
    }

    pub fn zero(&self) -> ClassPoly {
        ClassPoly {
            ctx: self.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(&self) -> ClassPoly {
        self.constant(BigRational::one())
    }

    pub fn constant(&self, value: BigRational) -> ClassPoly {
        let mut p = self.zero();
        p.insert(Monomial::unit(self.0.symbols.len()), value);
        p
    }

    pub fn int(&self, value: i64) -> ClassPoly {
        self.constant(BigRational::from_integer(value.into()))
    }

    /// The generator with the given name, as a polynomial.
    pub fn symbol(&self, name: &str) -> Result<ClassPoly, RingError> {
        let idx = self
            .index_of(name)
            .ok_or_else(|| RingError::UnknownSymbol(name.into()))?;
        let mut exps = vec![0; self.0.symbols.len()];
        exps[idx] = 1;
        Ok(self.monomial(exps, BigRational::one()))
    }

    /// `coef * prod(symbol_i ^ exps_i)`, reduced.
    pub fn monomial(&self, exps: Vec<u32>, coef: BigRational) -> ClassPoly {
        assert_eq!(exps.len(), self.0.symbols.len(), "exponent vector length");
        let mut p = self.zero();
        let codim = self.codim_of(&exps);
        if self.survives(&exps, codim) {
            p.insert(Monomial { codim, exps }, coef);
        }
        p
    }

    pub fn from_terms<I>(&self, terms: I) -> ClassPoly
    where
        I: IntoIterator<Item = (Vec<u32>, BigRational)>,
    {
        let mut p = self.zero();
        for (exps, coef) in terms {
            assert_eq!(exps.len(), self.0.symbols.len(), "exponent vector length");
            let codim = self.codim_of(&exps);
            if self.survives(&exps, codim) {
                p.insert(Monomial { codim, exps }, coef);
            }
        }
        p
    }

    /// Parses the textual form produced by `Display`.
    pub fn parse(&self, src: &str) -> Result<ClassPoly, RingError> {
        let e = expr::parse_expr(src, 1)?;
        e.eval(&self.zero(), 1)
    }
}

/// Exponent vector keyed by weighted codimension.
///
/// Ordering is ascending codimension, then graded reverse lexicographic
/// (larger monomials first) within a codimension, which is also the printing
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    codim: u32,
    exps: Vec<u32>,
}

impl Monomial {
    fn unit(nvars: usize) -> Self {
        Monomial {
            codim: 0,
            exps: vec![0; nvars],
        }
    }

    pub fn codim(&self) -> u32 {
        self.codim
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.codim.cmp(&other.codim).then_with(|| {
            for (a, b) in self.exps.iter().zip(&other.exps).rev() {
                if a != b {
                    return a.cmp(b);
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// An element of a truncated class ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassPoly {
    ctx: RingContext,
    terms: BTreeMap<Monomial, BigRational>,
}

impl ClassPoly {
    pub fn context(&self) -> &RingContext {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    fn insert(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn constant_term(&self) -> BigRational {
        self.terms
            .get(&Monomial::unit(self.ctx.symbols().len()))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Highest codimension among the terms, `None` for zero.
    pub fn top_codim(&self) -> Option<u32> {
        self.terms.keys().next_back().map(|m| m.codim)
    }

    pub fn is_homogeneous_of(&self, codim: u32) -> bool {
        self.terms.keys().all(|m| m.codim == codim)
    }

    pub fn has_integer_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    fn check_ctx(&self, other: &ClassPoly) -> Result<(), RingError> {
        if self.ctx == other.ctx {
            Ok(())
        } else {
            Err(RingError::ContextMismatch)
        }
    }

    pub fn checked_add(&self, other: &ClassPoly) -> Result<ClassPoly, RingError> {
        self.check_ctx(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &ClassPoly) -> Result<ClassPoly, RingError> {
        self.check_ctx(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.insert(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &ClassPoly) -> Result<ClassPoly, RingError> {
        self.check_ctx(other)?;
        let mut acc: HashMap<Vec<u32>, (u32, BigRational)> = HashMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let codim = ma.codim + mb.codim;
                if codim > self.ctx.truncation() {
                    // both maps iterate in ascending codim
                    break;
                }
                let exps: Vec<u32> = ma.exps.iter().zip(&mb.exps).map(|(a, b)| a + b).collect();
                if !self.ctx.survives(&exps, codim) {
                    continue;
                }
                let prod = ca * cb;
                acc.entry(exps)
                    .and_modify(|e| e.1 += &prod)
                    .or_insert((codim, prod));
            }
        }
        let mut out = self.ctx.zero();
        for (exps, (codim, c)) in acc {
            if !c.is_zero() {
                out.terms.insert(Monomial { codim, exps }, c);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, k: &BigRational) -> ClassPoly {
        if k.is_zero() {
            return self.ctx.zero();
        }
        ClassPoly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> ClassPoly {
        let mut result = self.ctx.one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Multiplicative inverse of a class with constant term 1, by the
    /// truncated geometric series in `self - 1`.
    pub fn invert_unit(&self) -> Result<ClassPoly, RingError> {
        let c0 = self.constant_term();
        if !c0.is_one() {
            return Err(RingError::NotAUnit(expr::fmt_rational(&c0)));
        }
        let delta = self - &self.ctx.one();
        let one = self.ctx.one();
        // Horner: r <- 1 - delta * r, T times.
        let mut r = one.clone();
        for _ in 0..self.ctx.truncation() {
            r = &one - &(&delta * &r);
        }
        Ok(r)
    }

    /// Homogeneous piece of codimension exactly `k`.
    pub fn graded_piece(&self, k: u32) -> ClassPoly {
        ClassPoly {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.codim == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Extends a symbol map to a ring homomorphism into `target`.
    ///
    /// Every symbol occurring in `self` needs an image homogeneous of the
    /// symbol's codimension (the zero class is accepted).
    pub fn substitute(
        &self,
        images: &HashMap<String, ClassPoly>,
        target: &RingContext,
    ) -> Result<ClassPoly, RingError> {
        let symbols = self.ctx.symbols();
        let mut used = vec![0u32; symbols.len()];
        for m in self.terms.keys() {
            for (u, e) in used.iter_mut().zip(&m.exps) {
                *u = (*u).max(*e);
            }
        }
        // powers[i][e] = image_i ^ e
        let mut powers: Vec<Vec<ClassPoly>> = Vec::with_capacity(symbols.len());
        for (s, &max_e) in symbols.iter().zip(&used) {
            if max_e == 0 {
                powers.push(Vec::new());
                continue;
            }
            let img = images
                .get(&s.name)
                .ok_or_else(|| RingError::MissingImage(s.name.clone()))?;
            if img.ctx != *target {
                return Err(RingError::ContextMismatch);
            }
            if !img.is_homogeneous_of(s.codim) {
                return Err(RingError::GradingMismatch {
                    symbol: s.name.clone(),
                    expected: s.codim,
                });
            }
            let mut pw = vec![target.one()];
            for e in 1..=max_e as usize {
                let next = &pw[e - 1] * img;
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut out = target.zero();
        for (m, c) in &self.terms {
            let mut t = target.constant(c.clone());
            for (i, &e) in m.exps.iter().enumerate() {
                if e > 0 {
                    t = &t * &powers[i][e as usize];
                    if t.is_zero() {
                        break;
                    }
                }
            }
            for (tm, tc) in t.terms {
                out.insert(tm, tc);
            }
        }
        Ok(out)
    }

    /// Degree of `self` in the given symbol (0 for the zero class).
    pub fn degree_in(&self, pivot: usize) -> u32 {
        self.terms.keys().map(|m| m.exps[pivot]).max().unwrap_or(0)
    }

    /// Coefficient of `pivot^e`, as a pivot-free class.
    pub fn coefficient_in(&self, pivot: usize, e: u32) -> ClassPoly {
        let mut out = self.ctx.zero();
        for (m, c) in &self.terms {
            if m.exps[pivot] == e {
                let mut exps = m.exps.clone();
                exps[pivot] = 0;
                let codim = m.codim - e * self.ctx.symbols()[pivot].codim;
                out.terms.insert(Monomial { codim, exps }, c.clone());
            }
        }
        out
    }

    /// Division by a divisor that is monic in `pivot`:
    /// returns `(q, r)` with `self = q * divisor + r` and `deg_pivot r < deg_pivot divisor`.
    pub fn divide_monic(
        &self,
        divisor: &ClassPoly,
        pivot: &str,
    ) -> Result<(ClassPoly, ClassPoly), RingError> {
        self.check_ctx(divisor)?;
        let p = self
            .ctx
            .index_of(pivot)
            .ok_or_else(|| RingError::UnknownSymbol(pivot.into()))?;
        let deg_r = divisor.degree_in(p);
        if deg_r == 0 || divisor.coefficient_in(p, deg_r) != self.ctx.one() {
            return Err(RingError::NotMonic(pivot.into()));
        }
        let pivot_class = self.ctx.symbol(pivot)?;
        let mut quotient = self.ctx.zero();
        let mut rem = self.clone();
        loop {
            let e = rem.degree_in(p);
            if rem.is_zero() || e < deg_r {
                break;
            }
            let lead = rem.coefficient_in(p, e);
            let t = &lead * &pivot_class.pow(e - deg_r);
            quotient = &quotient + &t;
            rem = &rem - &(&t * divisor);
            debug_assert!(rem.degree_in(p) < e || rem.coefficient_in(p, e).is_zero());
        }
        Ok((quotient, rem))
    }
}

macro_rules! forward_op {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&ClassPoly> for &ClassPoly {
            type Output = ClassPoly;
            /// Panics on a context mismatch; use the `checked_*` form for fallible code.
            fn $method(self, rhs: &ClassPoly) -> ClassPoly {
                self.$checked(rhs).expect("ring context mismatch")
            }
        }
        impl $trait<ClassPoly> for ClassPoly {
            type Output = ClassPoly;
            fn $method(self, rhs: ClassPoly) -> ClassPoly {
                (&self).$checked(&rhs).expect("ring context mismatch")
            }
        }
    };
}

forward_op!(Add, add, checked_add);
forward_op!(Sub, sub, checked_sub);
forward_op!(Mul, mul, checked_mul);

impl Neg for &ClassPoly {
    type Output = ClassPoly;
    fn neg(self) -> ClassPoly {
        self.scale(&-BigRational::one())
    }
}

impl Neg for ClassPoly {
    type Output = ClassPoly;
    fn neg(self) -> ClassPoly {
        (&self).neg()
    }
}

impl fmt::Display for ClassPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let symbols = self.ctx.symbols();
        let mut out = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let mono: Vec<String> = m
                .exps
                .iter()
                .zip(symbols)
                .filter(|(e, _)| **e > 0)
                .map(|(e, s)| {
                    if *e == 1 {
                        s.name.clone()
                    } else {
                        format!("{}^{}", s.name, e)
                    }
                })
                .collect();
            expr::write_term(&mut out, c, &mono.join("*"), i == 0);
        }
        f.write_str(&out)
    }
}

impl ExprAlgebra for ClassPoly {
    type Error = RingError;

    fn constant(&self, value: BigRational) -> Self {
        self.ctx.constant(value)
    }

    fn variable(&self, name: &str, _line: usize, _column: usize) -> Result<Self, RingError> {
        self.ctx.symbol(name)
    }

    fn sum(self, rhs: Self) -> Result<Self, RingError> {
        self.checked_add(&rhs)
    }

    fn product(self, rhs: Self) -> Result<Self, RingError> {
        self.checked_mul(&rhs)
    }

    fn negated(self) -> Self {
        -self
    }

    fn power(self, exp: u32) -> Result<Self, RingError> {
        Ok(ClassPoly::pow(&self, exp))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    fn curve_ring() -> RingContext {
        RingContext::declare(vec![SymbolSpec::new("h", 1)], 1, None).unwrap()
    }

    fn conormal_curve_p3() -> RingContext {
        RingContext::declare(
            vec![
                SymbolSpec::new("xi", 1),
                SymbolSpec::pulled_back("h", 1),
                SymbolSpec::pulled_back("c1", 1),
            ],
            2,
            Some(1),
        )
        .unwrap()
    }

    #[test]
    fn declare_rejects_bad_symbols() {
        assert_eq!(
            RingContext::declare(vec![], 1, None),
            Err(RingError::NoSymbols)
        );
        let dup = RingContext::declare(
            vec![SymbolSpec::new("h", 1), SymbolSpec::new("h", 2)],
            2,
            None,
        );
        assert_eq!(dup, Err(RingError::DuplicateSymbol("h".into())));
        let zero = RingContext::declare(vec![SymbolSpec::new("h", 0)], 2, None);
        assert_eq!(zero, Err(RingError::NonPositiveCodim("h".into())));
    }

    #[test]
    fn surviving_monomials_of_curve_conormal_ring() {
        // hand count: 1, xi, h, c1, xi^2, xi*h, xi*c1
        let ctx = conormal_curve_p3();
        let mut survivors = Vec::new();
        for a in 0..3u32 {
            for b in 0..3u32 {
                for c in 0..3u32 {
                    let m = ctx.monomial(vec![a, b, c], q(1));
                    if !m.is_zero() {
                        survivors.push(m.to_string());
                    }
                }
            }
        }
        survivors.sort();
        assert_eq!(
            survivors,
            vec!["1", "c1", "h", "xi", "xi*c1", "xi*h", "xi^2"]
        );
    }

    #[test]
    fn truncation_and_nilpotency() {
        let ctx = curve_ring();
        let h = ctx.symbol("h").unwrap();
        let one = ctx.one();
        assert_eq!(&(&one + &h) * &(&one - &h), one);

        let ctx = RingContext::declare(vec![SymbolSpec::pulled_back("h", 1)], 5, Some(2)).unwrap();
        assert!(ctx.symbol("h").unwrap().pow(3).is_zero());

        let ctx = RingContext::declare(vec![SymbolSpec::new("h", 1)], 2, None).unwrap();
        let p = (&ctx.one() + &ctx.symbol("h").unwrap()).pow(2);
        assert_eq!(p.to_string(), "1 + 2*h + h^2");
    }

    #[test]
    fn grassmannian_ring_for_n3() {
        let ctx = RingContext::declare(
            vec![SymbolSpec::new("e1", 1), SymbolSpec::new("e2", 2)],
            4,
            None,
        )
        .unwrap();
        assert_eq!(ctx.truncation(), 4);
        assert!(ctx.symbol("e2").unwrap().pow(2).top_codim() == Some(4));
        assert!(ctx.symbol("e2").unwrap().pow(3).is_zero());
    }

    #[test]
    fn invert_examples() {
        let ctx = RingContext::declare(vec![SymbolSpec::new("h", 1)], 2, None).unwrap();
        let a = ctx.parse("1 + h").unwrap();
        assert_eq!(a.invert_unit().unwrap().to_string(), "1 - h + h^2");
        let b = ctx.parse("1 + 2*h + 2*h^2").unwrap();
        let inv = b.invert_unit().unwrap();
        assert_eq!(inv.to_string(), "1 - 2*h + 2*h^2");
        assert_eq!(&b * &inv, ctx.one());
        assert_eq!(ctx.one().invert_unit().unwrap(), ctx.one());
        assert!(matches!(
            ctx.parse("2 + h").unwrap().invert_unit(),
            Err(RingError::NotAUnit(_))
        ));
    }

    #[test]
    fn graded_piece_examples() {
        let ctx = RingContext::declare(vec![SymbolSpec::new("h", 1)], 2, None).unwrap();
        let p = ctx.parse("1 + 2*h + h^2").unwrap();
        assert_eq!(p.graded_piece(1).to_string(), "2*h");
        assert_eq!(ctx.int(5).graded_piece(0).to_string(), "5");
        assert!(p.graded_piece(7).is_zero());
    }

    #[test]
    fn substitute_examples() {
        let g = RingContext::declare(
            vec![SymbolSpec::new("e1", 1), SymbolSpec::new("e2", 2)],
            4,
            None,
        )
        .unwrap();
        let cx = RingContext::declare(
            vec![SymbolSpec::new("xi", 1), SymbolSpec::new("h", 1)],
            4,
            None,
        )
        .unwrap();
        let mut images = HashMap::new();
        images.insert("e1".to_string(), cx.parse("xi").unwrap());
        images.insert("e2".to_string(), cx.parse("h*xi - h^2").unwrap());
        let s = g.parse("e1").unwrap().substitute(&images, &cx).unwrap();
        assert_eq!(s.to_string(), "xi");
        let s = g
            .parse("e1^2 - e2")
            .unwrap()
            .substitute(&images, &cx)
            .unwrap();
        assert_eq!(s, cx.parse("xi^2 - h*xi + h^2").unwrap());
        assert!(g.zero().substitute(&HashMap::new(), &cx).unwrap().is_zero());

        let mut bad = images.clone();
        bad.insert("e2".into(), cx.parse("xi").unwrap());
        assert!(matches!(
            g.parse("e2").unwrap().substitute(&bad, &cx),
            Err(RingError::GradingMismatch { .. })
        ));
        images.remove("e2");
        assert_eq!(
            g.parse("e2").unwrap().substitute(&images, &cx),
            Err(RingError::MissingImage("e2".into()))
        );
    }

    #[test]
    fn divide_monic_examples() {
        let ctx = conormal_curve_p3();
        let xi2 = ctx.parse("xi^2").unwrap();
        // xi^2 - c1(N) xi + c2(N) with c2(N) = 0 on a curve
        let r = ctx.parse("xi^2 - (4*h - c1)*xi").unwrap();
        let (quot, rem) = xi2.divide_monic(&r, "xi").unwrap();
        assert_eq!(quot, ctx.one());
        assert_eq!(rem, ctx.parse("(4*h - c1)*xi").unwrap());
        assert_eq!(&(&quot * &r) + &rem, xi2);

        let xi = ctx.parse("xi").unwrap();
        let (quot, rem) = xi.divide_monic(&xi2, "xi").unwrap();
        assert_eq!(rem, xi);
        let lin = ctx.parse("xi - (4*h - c1)").unwrap();
        let (quot2, rem2) = xi2.divide_monic(&lin, "xi").unwrap();
        // (4h - c1)^2 is a pulled-back codim-2 class on a curve
        assert!(rem2.is_zero());
        assert_eq!(&quot2 * &lin, xi2);
        assert!(quot.is_zero());
        assert_eq!(rem, xi);

        let (quot, rem) = r.divide_monic(&r, "xi").unwrap();
        assert_eq!(quot, ctx.one());
        assert!(rem.is_zero());

        let not_monic = ctx.parse("2*xi - h").unwrap();
        assert!(matches!(
            xi2.divide_monic(&not_monic, "xi"),
            Err(RingError::NotMonic(_))
        ));
        assert!(matches!(
            xi2.divide_monic(&ctx.parse("h").unwrap(), "xi"),
            Err(RingError::NotMonic(_))
        ));
    }

    #[test]
    fn context_mismatch_is_an_error() {
        let a = curve_ring().one();
        let b = conormal_curve_p3().one();
        assert_eq!(a.checked_add(&b), Err(RingError::ContextMismatch));
        assert_eq!(a.checked_mul(&b), Err(RingError::ContextMismatch));
    }

    #[test]
    fn display_and_parse_roundtrip() {
        let ctx = RingContext::declare(
            vec![
                SymbolSpec::new("h", 1),
                SymbolSpec::new("p1", 1),
                SymbolSpec::new("p2", 2),
            ],
            2,
            None,
        )
        .unwrap();
        let p = ctx.parse("p2 + 12*p1^2 + 3*h^2 + 6*h*p1").unwrap();
        assert_eq!(p.to_string(), "3*h^2 + 6*h*p1 + 12*p1^2 + p2");
        let r = ctx.parse("-1/2*h + 3/4 - p1").unwrap();
        assert_eq!(r.to_string(), "3/4 - 1/2*h - p1");
        assert_eq!(ctx.parse(&r.to_string()).unwrap(), r);
        assert!(matches!(ctx.parse("q1"), Err(RingError::UnknownSymbol(_))));
        assert_eq!(ctx.zero().to_string(), "0");
    }

    fn small_poly() -> impl Strategy<Value = Vec<(Vec<u32>, i64)>> {
        prop::collection::vec((prop::collection::vec(0u32..3, 3), -5i64..6), 0..6)
    }

    fn test_ctx() -> RingContext {
        RingContext::declare(
            vec![
                SymbolSpec::new("xi", 1),
                SymbolSpec::pulled_back("h", 1),
                SymbolSpec::pulled_back("c2", 2),
            ],
            4,
            Some(2),
        )
        .unwrap()
    }

    fn build(ctx: &RingContext, t: Vec<(Vec<u32>, i64)>) -> ClassPoly {
        ctx.from_terms(t.into_iter().map(|(e, c)| (e, q(c))))
    }

    proptest! {
        #[test]
        fn ring_laws(a in small_poly(), b in small_poly(), c in small_poly()) {
            let ctx = test_ctx();
            let (a, b, c) = (build(&ctx, a), build(&ctx, b), build(&ctx, c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        }

        #[test]
        fn product_grading(a in small_poly(), b in small_poly(), k in 0u32..5) {
            let ctx = test_ctx();
            let (a, b) = (build(&ctx, a), build(&ctx, b));
            let ab = &a * &b;
            prop_assert!(ab.top_codim().is_none_or(|t| t <= ctx.truncation()));
            let mut sum = ctx.zero();
            for j in 0..=k {
                sum = &sum + &(&a.graded_piece(j) * &b.graded_piece(k - j));
            }
            prop_assert_eq!(ab.graded_piece(k), sum);
        }

        #[test]
        fn invert_roundtrip(a in small_poly()) {
            let ctx = test_ctx();
            let a = build(&ctx, a);
            let unit = &(&a - &a.graded_piece(0)) + &ctx.one();
            let inv = unit.invert_unit().unwrap();
            prop_assert_eq!(&unit * &inv, ctx.one());
        }

        #[test]
        fn divide_reconstructs(a in small_poly(), lower in small_poly()) {
            let ctx = test_ctx();
            let a = build(&ctx, a);
            // monic quadratic in xi with pivot-free lower coefficients
            let lower = build(&ctx, lower);
            let lower = lower.coefficient_in(0, 0);
            let xi = ctx.symbol("xi").unwrap();
            let r = &(&xi * &xi) + &(&xi * &lower.graded_piece(1)) ;
            let r = &r + &lower.graded_piece(2);
            let (quot, rem) = a.divide_monic(&r, "xi").unwrap();
            prop_assert_eq!(&(&quot * &r) + &rem, a);
            prop_assert!(rem.degree_in(0) < 2);
        }

        #[test]
        fn text_roundtrip(a in small_poly()) {
            let ctx = test_ctx();
            let a = build(&ctx, a);
            prop_assert_eq!(ctx.parse(&a.to_string()).unwrap(), a);
        }
    }
}
