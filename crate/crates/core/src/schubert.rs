//! Chern class of the Grassmannian of lines and pullback of Schubert
//! classes to the conormal ring.
//!
//! Classes on `G = Gr(2, n+1)` are represented as polynomials in
//! `e1 = sigma_1` and `e2 = sigma_{1,1}` (the Chern classes of the dual
//! tautological subbundle). Representatives are never reduced modulo the
//! relations of `A(G)`: the normal-line map `f` pulls back into a ring of
//! dimension `n - 1`, where every relation of `A(G)` already vanishes.

use std::collections::HashMap;

use num::{BigRational, One, Zero};
use thiserror::Error;

use crate::ring::{ClassPoly, RingContext, RingError, SymbolSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchubertError {
    #[error("Grassmannian of lines needs n >= 2, got {0}")]
    AmbientTooSmall(u32),
    #[error("invalid Schubert index ({a},{b}) for n = {n}")]
    InvalidIndex { a: u32, b: u32, n: u32 },
    #[error("conormal ring lacks symbol '{0}'")]
    MissingSymbol(&'static str),
    #[error("symmetric reduction left a non-symmetric remainder: {0}")]
    NotSymmetric(String),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// Index of `sigma_{a,b}` on `Gr(2, n+1)`: `n-1 >= a >= b >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchubertIndex {
    a: u32,
    b: u32,
}

impl SchubertIndex {
    pub fn new(a: u32, b: u32, n: u32) -> Result<Self, SchubertError> {
        if n < 2 || a >= n || b > a {
            return Err(SchubertError::InvalidIndex { a, b, n });
        }
        Ok(SchubertIndex { a, b })
    }

    pub fn a(&self) -> u32 {
        self.a
    }

    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn codim(&self) -> u32 {
        self.a + self.b
    }
}

impl std::fmt::Display for SchubertIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.b == 0 {
            write!(f, "sigma_{}", self.a)
        } else {
            write!(f, "sigma_{{{},{}}}", self.a, self.b)
        }
    }
}

/// `Q[e1, e2]` truncated at `dim G = 2(n-1)`.
pub fn grassmannian_ring(n: u32) -> Result<RingContext, SchubertError> {
    if n < 2 {
        return Err(SchubertError::AmbientTooSmall(n));
    }
    Ok(RingContext::declare(
        vec![SymbolSpec::new("e1", 1), SymbolSpec::new("e2", 2)],
        2 * (n - 1),
        None,
    )?)
}

/// Rewrites a symmetric polynomial in formal roots `x1, x2` as a polynomial in
/// `e1 = x1 + x2`, `e2 = x1 x2`.
///
/// `x2` is eliminated by `x2 -> e1 - x1`, then `x1` by division against the
/// monic relation `x1^2 - e1 x1 + e2`. A symmetric input leaves no `x1` in
/// the remainder.
fn symmetric_reduce(
    p: &ClassPoly,
    roots_ctx: &RingContext,
    target: &RingContext,
) -> Result<ClassPoly, SchubertError> {
    let x1 = roots_ctx.symbol("x1")?;
    let e1 = roots_ctx.symbol("e1")?;
    let e2 = roots_ctx.symbol("e2")?;
    let mut images = HashMap::new();
    images.insert("x1".to_string(), x1.clone());
    images.insert("x2".to_string(), &e1 - &x1);
    images.insert("e1".to_string(), e1.clone());
    images.insert("e2".to_string(), e2.clone());
    let no_x2 = p.substitute(&images, roots_ctx)?;
    let relation = &(&(&x1 * &x1) - &(&e1 * &x1)) + &e2;
    let (_, rem) = no_x2.divide_monic(&relation, "x1")?;
    let x1_idx = roots_ctx.index_of("x1").expect("x1 declared");
    if rem.degree_in(x1_idx) > 0 {
        return Err(SchubertError::NotSymmetric(rem.to_string()));
    }
    let e1_idx = roots_ctx.index_of("e1").expect("e1 declared");
    let e2_idx = roots_ctx.index_of("e2").expect("e2 declared");
    Ok(target.from_terms(
        rem.terms()
            .map(|(m, c)| (vec![m.exps()[e1_idx], m.exps()[e2_idx]], c.clone())),
    ))
}

/// A polynomial representative of `c(T_G)` for `G = Gr(2, n+1)`, from
/// `T_G = S^dual (x) Q`.
pub fn chern_tangent_grassmannian(n: u32) -> Result<ClassPoly, SchubertError> {
    let g = grassmannian_ring(n)?;
    let trunc = g.truncation();
    let roots = RingContext::declare(
        vec![
            SymbolSpec::new("x1", 1),
            SymbolSpec::new("x2", 1),
            SymbolSpec::new("e1", 1),
            SymbolSpec::new("e2", 2),
        ],
        trunc,
        None,
    )?;
    let one = roots.one();
    let e1 = roots.symbol("e1")?;
    let e2 = roots.symbol("e2")?;
    // c(S) = 1 - e1 + e2, c(Q) = c(S)^{-1}
    let c_q = (&(&one - &e1) + &e2).invert_unit()?;
    let rank_q = n - 1;
    let mut total = one.clone();
    for root in ["x1", "x2"] {
        let x = roots.symbol(root)?;
        let one_plus_x = &one + &x;
        // c(L (x) Q) = sum_j c_j(Q) (1 + c_1(L))^{rank - j}
        let mut factor = roots.zero();
        for j in 0..=rank_q {
            let cj = c_q.graded_piece(j);
            if cj.is_zero() {
                continue;
            }
            factor = &factor + &(&cj * &one_plus_x.pow(rank_q - j));
        }
        total = &total * &factor;
    }
    symmetric_reduce(&total, &roots, &g)
}

/// Complete homogeneous polynomials `s_0..=s_c` in two variables, written
/// in `e1, e2`: `s_c = e1 s_{c-1} - e2 s_{c-2}`.
fn complete_homogeneous(ctx: &RingContext, upto: u32) -> Result<Vec<ClassPoly>, SchubertError> {
    let e1 = ctx.symbol("e1")?;
    let e2 = ctx.symbol("e2")?;
    let mut s = vec![ctx.one()];
    if upto >= 1 {
        s.push(e1.clone());
    }
    for c in 2..=upto as usize {
        let next = &(&e1 * &s[c - 1]) - &(&e2 * &s[c - 2]);
        s.push(next);
    }
    Ok(s)
}

/// Giambelli representative `sigma_{a,b} = e2^b * s_{a-b}` in the ring of `G = Gr(2, n+1)`.
pub fn schubert_representative(idx: SchubertIndex, n: u32) -> Result<ClassPoly, SchubertError> {
    if idx.a >= n {
        return Err(SchubertError::InvalidIndex {
            a: idx.a,
            b: idx.b,
            n,
        });
    }
    let g = grassmannian_ring(n)?;
    let s = complete_homogeneous(&g, idx.a - idx.b)?;
    Ok(&g.symbol("e2")?.pow(idx.b) * &s[(idx.a - idx.b) as usize])
}

fn conormal_symbols(ctx: &RingContext) -> Result<(ClassPoly, ClassPoly), SchubertError> {
    let xi = ctx
        .symbol("xi")
        .map_err(|_| SchubertError::MissingSymbol("xi"))?;
    let h = ctx
        .symbol("h")
        .map_err(|_| SchubertError::MissingSymbol("h"))?;
    Ok((xi, h))
}

/// `f^*` on a Schubert expression: `e1 -> xi`, `e2 -> h xi - h^2`.
pub fn pullback_f(p: &ClassPoly, conormal: &RingContext) -> Result<ClassPoly, SchubertError> {
    let (xi, h) = conormal_symbols(conormal)?;
    let mut images = HashMap::new();
    images.insert("e1".to_string(), xi.clone());
    images.insert("e2".to_string(), &(&h * &xi) - &(&h * &h));
    Ok(p.substitute(&images, conormal)?)
}

/// Closed form `f^* sigma_{a,b} = sum_{i=0}^{a-b} h^{b+i} (xi - h)^{a-i}`.
pub fn schubert_pullback_direct(
    idx: SchubertIndex,
    conormal: &RingContext,
) -> Result<ClassPoly, SchubertError> {
    let (xi, h) = conormal_symbols(conormal)?;
    let xi_minus_h = &xi - &h;
    let mut out = conormal.zero();
    for i in 0..=(idx.a - idx.b) {
        out = &out + &(&h.pow(idx.b + i) * &xi_minus_h.pow(idx.a - i));
    }
    Ok(out)
}

/// Free ring in `xi, h` used when no variety data is involved.
pub fn generic_conormal_ring(truncation: u32) -> RingContext {
    RingContext::declare(
        vec![SymbolSpec::new("xi", 1), SymbolSpec::new("h", 1)],
        truncation,
        None,
    )
    .expect("static symbols")
}

/// Coefficient of `e1^i e2^j` in a Grassmannian class (test and report helper).
pub fn coefficient(p: &ClassPoly, e1_exp: u32, e2_exp: u32) -> BigRational {
    p.terms()
        .find(|(m, _)| m.exps() == [e1_exp, e2_exp])
        .map(|(_, c)| c.clone())
        .unwrap_or_else(BigRational::zero)
}

/// Checks the constant term of a total Chern class.
pub fn is_unit_class(p: &ClassPoly) -> bool {
    p.constant_term().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn projective_plane_case() {
        // G(2,3) is the dual plane, T = (1+H)^3 with sigma_1 <-> H and e1^2 = e2 = point.
        let c = chern_tangent_grassmannian(2).unwrap();
        assert_eq!(c.graded_piece(1).to_string(), "3*e1");
        let top = c.graded_piece(2);
        // collapse e1^2 -> e2 (sigma_2 = 0 on G(2,3))
        let collapsed = coefficient(&top, 2, 0) + coefficient(&top, 0, 1);
        assert_eq!(collapsed, q(3));
    }

    #[test]
    fn lines_in_p3() {
        let c = chern_tangent_grassmannian(3).unwrap();
        assert_eq!(c.graded_piece(1).to_string(), "4*e1");
        // 7 sigma_2 + 7 sigma_{1,1} = 7 e1^2
        assert_eq!(c.graded_piece(2).to_string(), "7*e1^2");
    }

    #[test]
    fn total_chern_class_is_a_unit() {
        for n in 2..=12 {
            let c = chern_tangent_grassmannian(n).unwrap();
            assert!(is_unit_class(&c));
            assert!(c.top_codim().unwrap() <= 2 * (n - 1));
        }
        assert_eq!(
            chern_tangent_grassmannian(1),
            Err(SchubertError::AmbientTooSmall(1))
        );
    }

    #[test]
    fn first_chern_class_is_n_plus_one_sigma_1() {
        // c_1(T_G) = (n+1) sigma_1 for Gr(2, n+1)
        for n in 2..=10 {
            let c = chern_tangent_grassmannian(n).unwrap();
            assert_eq!(coefficient(&c, 1, 0), q(n as i64 + 1));
        }
    }

    #[test]
    fn representatives() {
        let s = |a, b| schubert_representative(SchubertIndex::new(a, b, 5).unwrap(), 5).unwrap();
        assert_eq!(s(1, 0).to_string(), "e1");
        assert_eq!(s(2, 0).to_string(), "e1^2 - e2");
        assert_eq!(s(2, 1).to_string(), "e1*e2");
        assert_eq!(s(0, 0).to_string(), "1");
        assert!(SchubertIndex::new(5, 0, 5).is_err());
        assert!(SchubertIndex::new(1, 2, 5).is_err());
    }

    #[test]
    fn pullback_examples() {
        let cx = generic_conormal_ring(8);
        let g = grassmannian_ring(5).unwrap();
        assert_eq!(
            pullback_f(&g.symbol("e1").unwrap(), &cx)
                .unwrap()
                .to_string(),
            "xi"
        );
        assert_eq!(
            pullback_f(&g.symbol("e2").unwrap(), &cx).unwrap(),
            cx.parse("h*xi - h^2").unwrap()
        );
        let idx = SchubertIndex::new(3, 1, 5).unwrap();
        let expected = cx.parse("h*(xi-h)^3 + h^2*(xi-h)^2 + h^3*(xi-h)").unwrap();
        assert_eq!(
            pullback_f(&schubert_representative(idx, 5).unwrap(), &cx).unwrap(),
            expected
        );
        assert_eq!(schubert_pullback_direct(idx, &cx).unwrap(), expected);
    }

    #[test]
    fn direct_closed_form_examples() {
        let cx = generic_conormal_ring(8);
        let d = |a, b| schubert_pullback_direct(SchubertIndex::new(a, b, 6).unwrap(), &cx).unwrap();
        assert_eq!(d(1, 0).to_string(), "xi");
        assert_eq!(d(2, 2), cx.parse("h^2*(xi-h)^2").unwrap());
        assert_eq!(d(2, 0), cx.parse("xi^2 - h*xi + h^2").unwrap());
    }

    #[test]
    fn missing_conormal_symbols() {
        let bad = RingContext::declare(vec![SymbolSpec::new("h", 1)], 3, None).unwrap();
        let g = grassmannian_ring(3).unwrap();
        assert_eq!(
            pullback_f(&g.one(), &bad),
            Err(SchubertError::MissingSymbol("xi"))
        );
    }
}
