//! Bottleneck degree from polar classes.
//!
//! `compute_b` runs the symbolic pipeline on the conormal variety with free
//! Chern symbols and returns the correction polynomial `B_{m,n}` in `h` and
//! the polar classes. `bnd_projective` then evaluates
//! `sum eps_i^2 - deg B_{m,n}` on a numeric profile.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num::{BigInt, BigRational, One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::profiles::{ci_profile, hyperplane_section, PolarProfile, ProfileError, VarietySpec};
use crate::ring::{ClassPoly, RingContext, RingError, SymbolSpec};
use crate::schubert::{
    chern_tangent_grassmannian, pullback_f, schubert_pullback_direct, SchubertError, SchubertIndex,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BndError {
    #[error("need 0 < m < n, got m={m}, n={n}")]
    InvalidDimensions { m: u32, n: u32 },
    #[error("expected {expected} polar degrees, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("profile has dimension {profile}, formula expects {formula}")]
    DimensionMismatch { profile: u32, formula: u32 },
    #[error("pipeline assertion failed: {0}")]
    Pipeline(String),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Schubert(#[from] SchubertError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BFormula {
    pub m: u32,
    pub n: u32,
    pub poly: ClassPoly,
}

impl fmt::Display for BFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.poly)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsilonVector {
    pub values: Vec<BigInt>,
}

impl EpsilonVector {
    pub fn sum_of_squares(&self) -> BigInt {
        self.values.iter().map(|e| e * e).sum()
    }
}

fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn check_dims(m: u32, n: u32) -> Result<(), BndError> {
    if m == 0 || m >= n {
        return Err(BndError::InvalidDimensions { m, n });
    }
    Ok(())
}

/// Ring `h, p1..pm` in which `B_{m,n}` is expressed.
pub fn polar_ring(m: u32) -> Result<RingContext, RingError> {
    let mut symbols = vec![SymbolSpec::new("h", 1)];
    symbols.extend((1..=m).map(|j| SymbolSpec::new(format!("p{j}"), j)));
    RingContext::declare(symbols, m, None)
}

fn conormal_ring(m: u32, n: u32) -> Result<RingContext, RingError> {
    let mut symbols = vec![SymbolSpec::new("xi", 1), SymbolSpec::pulled_back("h", 1)];
    symbols.extend((1..=m).map(|i| SymbolSpec::pulled_back(format!("c{i}"), i)));
    RingContext::declare(symbols, n - 1, Some(m))
}

/// `sum_j (-1)^j c_j xi^{rank-j}` for a total Chern class `c`.
fn alternating_relation(c: &ClassPoly, xi: &ClassPoly, rank: u32) -> ClassPoly {
    let mut r = c.context().zero();
    for j in 0..=rank {
        let t = &c.graded_piece(j) * &xi.pow(rank - j);
        r = if j % 2 == 0 { &r + &t } else { &r - &t };
    }
    r
}

/// `sum_j c_j xi^{rank-j}`.
fn plain_relation(c: &ClassPoly, xi: &ClassPoly, rank: u32) -> ClassPoly {
    let mut r = c.context().zero();
    for j in 0..=rank {
        r = &r + &(&c.graded_piece(j) * &xi.pow(rank - j));
    }
    r
}

/// Flips the sign of every odd-codimension piece: `c(E) -> c(E^dual)`.
fn dualize(c: &ClassPoly) -> ClassPoly {
    c.context().from_terms(c.terms().map(|(mono, coef)| {
        let v = if mono.codim() % 2 == 0 {
            coef.clone()
        } else {
            -coef.clone()
        };
        (mono.exps().to_vec(), v)
    }))
}

/// Relation on the conormal variety of a variety with tangent Chern class `c_tangent`.
///
/// Built twice, from `c(N)` with alternating signs and from `c(N^dual)`
/// computed independently, and the two must agree.
fn relation(
    c_tangent: &ClassPoly,
    h: &ClassPoly,
    xi: &ClassPoly,
    n: u32,
    m: u32,
) -> Result<(ClassPoly, ClassPoly), BndError> {
    let ctx = c_tangent.context();
    let one = ctx.one();
    let c_normal = &(&one + h).pow(n + 1) * &c_tangent.invert_unit()?;
    let r = alternating_relation(&c_normal, xi, n - m);
    let c_normal_dual = &(&one - h).pow(n + 1) * &dualize(c_tangent).invert_unit()?;
    let r_dual = plain_relation(&c_normal_dual, xi, n - m);
    if r != r_dual {
        return Err(BndError::Pipeline(format!(
            "relation mismatch: {r} vs {r_dual}"
        )));
    }
    Ok((c_normal, r))
}

/// Reduces a codim `n-1` class modulo `r` and returns `alpha` with
/// `class = xi^{n-m-1} * alpha (mod r)`.
fn reduce_to_base(class: &ClassPoly, r: &ClassPoly, n: u32, m: u32) -> Result<ClassPoly, BndError> {
    let (_, rem) = class.divide_monic(r, "xi")?;
    let xi_idx = class
        .context()
        .index_of("xi")
        .expect("conormal ring has xi");
    if let Some((mono, _)) = rem
        .terms()
        .find(|(mono, _)| mono.exps()[xi_idx] != n - m - 1)
    {
        return Err(BndError::Pipeline(format!(
            "remainder term with xi^{} (expected xi^{})",
            mono.exps()[xi_idx],
            n - m - 1
        )));
    }
    Ok(rem.coefficient_in(xi_idx, n - m - 1))
}

/// `B_{m,n}` as a polynomial in `h, p1..pm`.
pub fn compute_b(m: u32, n: u32) -> Result<BFormula, BndError> {
    check_dims(m, n)?;
    let ctx = conormal_ring(m, n)?;
    let one = ctx.one();
    let xi = ctx.symbol("xi")?;
    let h = ctx.symbol("h")?;

    let mut c_tangent = one.clone();
    for i in 1..=m {
        c_tangent = &c_tangent + &ctx.symbol(&format!("c{i}"))?;
    }
    let (c_normal, r) = relation(&c_tangent, &h, &xi, n, m)?;

    // c(N^dual (x) O(1)) on the projectivised conormal bundle, rank n-m
    let mut twist = ctx.zero();
    for j in 0..=(n - m) {
        let t = &c_normal.graded_piece(j) * &(&one + &xi).pow(n - m - j);
        twist = if j % 2 == 0 { &twist + &t } else { &twist - &t };
    }
    let c_conormal = &c_tangent * &twist;
    let inv = c_conormal.invert_unit()?;
    let grassmann = pullback_f(&chern_tangent_grassmannian(n)?, &ctx)?;
    let top = (&inv * &grassmann).graded_piece(n - 1);

    let alpha = reduce_to_base(&top, &r, n, m)?;

    let target = polar_ring(m)?;
    let th = target.symbol("h")?;
    let mut images = HashMap::new();
    images.insert("h".to_string(), th.clone());
    let mut polar = vec![target.one()];
    for j in 1..=m {
        polar.push(target.symbol(&format!("p{j}"))?);
    }
    for j in 1..=m as i64 {
        let mut cj = target.zero();
        for i in 0..=j {
            let k = BigRational::from_integer(binomial(m as i64 - i + 1, j - i));
            let t = (&th.pow((j - i) as u32) * &polar[i as usize]).scale(&k);
            cj = if i % 2 == 0 { &cj + &t } else { &cj - &t };
        }
        images.insert(format!("c{j}"), cj);
    }
    let poly = alpha.substitute(&images, &target)?;
    if !poly.is_homogeneous_of(m) {
        return Err(BndError::Pipeline(format!(
            "B_{{{m},{n}}} = {poly} is not of codim {m}"
        )));
    }
    if !poly.has_integer_coefficients() {
        return Err(BndError::Pipeline(format!(
            "B_{{{m},{n}}} = {poly} has fractional coefficients"
        )));
    }
    Ok(BFormula { m, n, poly })
}

/// `k = min(floor((n-1)/2), m)`.
pub fn epsilon_len(m: u32, n: u32) -> u32 {
    ((n - 1) / 2).min(m)
}

/// `eps_i = sum_{j=r_i}^{m-i} deg p_j` with `r_i = max(0, m-n+1+i)`.
pub fn epsilon_terms(m: u32, n: u32, polar_degrees: &[BigInt]) -> Result<EpsilonVector, BndError> {
    check_dims(m, n)?;
    if polar_degrees.len() != m as usize + 1 {
        return Err(BndError::LengthMismatch {
            expected: m as usize + 1,
            got: polar_degrees.len(),
        });
    }
    let values = (0..=epsilon_len(m, n))
        .map(|i| {
            let r = (m as i64 - n as i64 + 1 + i as i64).max(0) as usize;
            (r..=(m - i) as usize).map(|j| &polar_degrees[j]).sum()
        })
        .collect();
    Ok(EpsilonVector { values })
}

/// Recomputes `eps_i` as the degree of the pulled back Schubert class
/// `sigma_{n-1-i,i}` on the conormal variety of the profile.
pub fn epsilon_oracle(m: u32, n: u32, profile: &PolarProfile) -> Result<EpsilonVector, BndError> {
    check_dims(m, n)?;
    if profile.m != m {
        return Err(BndError::DimensionMismatch {
            profile: profile.m,
            formula: m,
        });
    }
    let ctx = RingContext::declare(
        vec![SymbolSpec::new("xi", 1), SymbolSpec::pulled_back("h", 1)],
        n - 1,
        Some(m),
    )?;
    let xi = ctx.symbol("xi")?;
    let h = ctx.symbol("h")?;
    let mut c_tangent = ctx.zero();
    for (i, g) in profile.chern_coeffs.iter().enumerate() {
        c_tangent = &c_tangent + &h.pow(i as u32).scale(g);
    }
    let (_, r) = relation(&c_tangent, &h, &xi, n, m)?;
    let h_idx = ctx.index_of("h").expect("declared");
    let d = BigRational::from_integer(profile.fundamental_degree.clone());
    let mut values = Vec::new();
    for i in 0..=epsilon_len(m, n) {
        let sigma = schubert_pullback_direct(SchubertIndex::new(n - 1 - i, i, n)?, &ctx)?;
        let alpha = reduce_to_base(&sigma, &r, n, m)?;
        let coef = alpha.coefficient_in(h_idx, m).constant_term();
        if alpha.len() > 1 || !(&coef * &d).is_integer() {
            return Err(BndError::Pipeline(format!("unexpected base class {alpha}")));
        }
        values.push((coef * &d).to_integer());
    }
    Ok(EpsilonVector { values })
}

/// `BND(X) = sum eps_i^2 - deg B_{m,n}(X)`.
pub fn bnd_projective(formula: &BFormula, profile: &PolarProfile) -> Result<BigInt, BndError> {
    if profile.m != formula.m {
        return Err(BndError::DimensionMismatch {
            profile: profile.m,
            formula: formula.m,
        });
    }
    let eps = epsilon_terms(formula.m, formula.n, &profile.polar_degrees()?)?;
    Ok(eps.sum_of_squares() - profile.evaluate_class(&formula.poly)?)
}

/// Projective bottleneck degree of a complete intersection.
pub fn bnd_of_spec(spec: &VarietySpec) -> Result<BigInt, BndError> {
    let m = spec.dim();
    if m == 0 {
        return Ok(point_set_bnd(&spec.degree()));
    }
    let formula = cached_b(m, spec.ambient)?;
    bnd_projective(&formula, &ci_profile(spec)?)
}

/// Extraneous pairs among `d` points: `d(d-1)`.
pub fn point_set_bnd(d: &BigInt) -> BigInt {
    d * (d - BigInt::one())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineBnd {
    pub closure: BigInt,
    pub at_infinity: BigInt,
    /// The section at infinity is a finite point set and `d(d-1)` was used.
    pub point_section: bool,
    pub value: BigInt,
}

/// `BND(X) = BND(closure) - BND(section at infinity)`.
pub fn bnd_affine(spec: &VarietySpec) -> Result<AffineBnd, BndError> {
    let closure = bnd_of_spec(spec)?;
    let section = hyperplane_section(spec)?;
    let at_infinity = bnd_of_spec(&section)?;
    Ok(AffineBnd {
        value: &closure - &at_infinity,
        closure,
        at_infinity,
        point_section: section.dim() == 0,
    })
}

/// `(deg p_m, ..., deg p_0)`, the coefficients of the conormal class in
/// `alpha^{n-i} beta^{1+i}` order.
pub fn conormal_class_coeffs(profile: &PolarProfile) -> Result<Vec<BigInt>, BndError> {
    let mut v = profile.polar_degrees()?;
    v.reverse();
    Ok(v)
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub m: u32,
    pub formulas: Vec<BFormula>,
    pub stable: bool,
}

impl StabilityReport {
    /// Ambient dimensions whose formula differs from the one at the largest `n`.
    pub fn outliers(&self) -> Vec<u32> {
        match self.formulas.last() {
            None => Vec::new(),
            Some(first) => self
                .formulas
                .iter()
                .filter(|f| f.poly != first.poly)
                .map(|f| f.n)
                .collect(),
        }
    }
}

/// Computes `B_{m,n}` across a range of `n` and reports whether they coincide.
pub fn ambient_stability(
    m: u32,
    ns: impl IntoIterator<Item = u32>,
) -> Result<StabilityReport, BndError> {
    let ns: Vec<u32> = ns.into_iter().collect();
    let formulas: Vec<BFormula> = ns
        .par_iter()
        .map(|&n| cached_b(m, n).map(|f| (*f).clone()))
        .collect::<Result<_, _>>()?;
    let stable = formulas.windows(2).all(|w| w[0].poly == w[1].poly);
    Ok(StabilityReport {
        m,
        formulas,
        stable,
    })
}

/// Read-mostly table of computed formulas.
#[derive(Default)]
pub struct FormulaCache {
    table: RwLock<HashMap<(u32, u32), Arc<BFormula>>>,
}

impl FormulaCache {
    pub fn get(&self, m: u32, n: u32) -> Result<Arc<BFormula>, BndError> {
        if let Some(f) = self.table.read().expect("cache lock").get(&(m, n)) {
            return Ok(f.clone());
        }
        let f = Arc::new(compute_b(m, n)?);
        let mut table = self.table.write().expect("cache lock");
        Ok(table.entry((m, n)).or_insert(f).clone())
    }
}

/// Process-wide cache behind `compute_b`.
pub fn cached_b(m: u32, n: u32) -> Result<Arc<BFormula>, BndError> {
    static CACHE: OnceLock<FormulaCache> = OnceLock::new();
    CACHE.get_or_init(FormulaCache::default).get(m, n)
}

/// `true` when every epsilon entry is nonnegative.
pub fn epsilon_nonnegative(e: &EpsilonVector) -> bool {
    e.values.iter().all(|v| !v.is_negative())
}
