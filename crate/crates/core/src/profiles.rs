//! Numeric invariants of the varieties the formulas are evaluated on.
//!
//! Every class is modelled as a rational multiple of a power of the
//! hyperplane class: `c_i(T_X) = gamma_i h^i` and `p_j = q_j h^j`. This is
//! exact for complete intersections; manually entered profiles inherit the
//! assumption.

use num::{BigInt, BigRational, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ring::{ClassPoly, RingContext, RingError, SymbolSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProfileError {
    #[error("complete intersection needs at least one equation")]
    NoEquations,
    #[error("degrees must be >= 1")]
    ZeroDegree,
    #[error("{k} equations in P^{n} leave dimension < 0")]
    Overdetermined { k: usize, n: u32 },
    #[error("dimension {0} is too small for a polar profile (need m >= 1)")]
    DimensionTooSmall(u32),
    #[error("class is not homogeneous of codimension {0}")]
    NotHomogeneous(u32),
    #[error("formula symbol '{0}' is not h or p1..pm")]
    UnknownSymbol(String),
    #[error("degree {0} is not an integer")]
    NonIntegral(String),
    #[error("expected {expected} polar degrees, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fundamental degree must be positive")]
    NonPositiveDegree,
    #[error("value does not fit in a 64-bit integer")]
    Overflow,
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// How a complete intersection should be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpretation {
    /// A smooth complete intersection in `P^n`.
    Projective,
    /// The closure in `P^n` of a smooth affine complete intersection in `C^n`.
    AffineClosure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarietySpec {
    pub ambient: u32,
    pub degrees: Vec<u32>,
    pub interpretation: Interpretation,
}

impl VarietySpec {
    pub fn new(
        ambient: u32,
        degrees: Vec<u32>,
        interpretation: Interpretation,
    ) -> Result<Self, ProfileError> {
        if degrees.is_empty() {
            return Err(ProfileError::NoEquations);
        }
        if degrees.contains(&0) {
            return Err(ProfileError::ZeroDegree);
        }
        if degrees.len() as u32 > ambient {
            return Err(ProfileError::Overdetermined {
                k: degrees.len(),
                n: ambient,
            });
        }
        Ok(VarietySpec {
            ambient,
            degrees,
            interpretation,
        })
    }

    pub fn projective(ambient: u32, degrees: &[u32]) -> Result<Self, ProfileError> {
        Self::new(ambient, degrees.to_vec(), Interpretation::Projective)
    }

    pub fn affine(ambient: u32, degrees: &[u32]) -> Result<Self, ProfileError> {
        Self::new(ambient, degrees.to_vec(), Interpretation::AffineClosure)
    }

    pub fn dim(&self) -> u32 {
        self.ambient - self.degrees.len() as u32
    }

    /// `deg X = prod d_i`.
    pub fn degree(&self) -> BigInt {
        self.degrees.iter().map(|&d| BigInt::from(d)).product()
    }
}

/// Numeric invariants of a smooth `m`-dimensional variety.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolarProfile {
    pub m: u32,
    /// `deg h^m`, the degree of the variety.
    pub fundamental_degree: BigInt,
    /// `gamma_0..=gamma_m` with `c_i(T_X) = gamma_i h^i`.
    pub chern_coeffs: Vec<BigRational>,
    /// `q_0..=q_m` with `p_j = q_j h^j`.
    pub polar_coeffs: Vec<BigRational>,
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

/// `p_j = sum_i (-1)^i C(m-i+1, j-i) h^{j-i} c_i` on hyperplane multiples.
pub fn polar_from_chern(m: u32, chern: &[BigRational]) -> Vec<BigRational> {
    convert(m, chern)
}

/// `c_j = sum_i (-1)^i C(m-i+1, j-i) h^{j-i} p_i` on hyperplane multiples.
pub fn chern_from_polar(m: u32, polar: &[BigRational]) -> Vec<BigRational> {
    convert(m, polar)
}

// The two relations have the same shape, so one routine serves both.
fn convert(m: u32, from: &[BigRational]) -> Vec<BigRational> {
    let m = m as i64;
    (0..=m)
        .map(|j| {
            (0..=j).fold(BigRational::zero(), |acc, i| {
                let term =
                    BigRational::from_integer(binomial(m - i + 1, j - i)) * &from[i as usize];
                if i % 2 == 0 {
                    acc + term
                } else {
                    acc - term
                }
            })
        })
        .collect()
}

/// Invariants of a complete intersection by adjunction:
/// `c(T_X) = (1+h)^{n+1} / prod (1 + d_i h)`.
pub fn ci_profile(spec: &VarietySpec) -> Result<PolarProfile, ProfileError> {
    let m = spec.dim();
    if m < 1 {
        return Err(ProfileError::DimensionTooSmall(m));
    }
    let ring = RingContext::declare(vec![SymbolSpec::new("h", 1)], m, None)?;
    let one = ring.one();
    let h = ring.symbol("h")?;
    let ambient = (&one + &h).pow(spec.ambient + 1);
    let mut normal = one.clone();
    for &d in &spec.degrees {
        normal = &normal * &(&one + &h.scale(&BigRational::from_integer(d.into())));
    }
    let tangent = &ambient * &normal.invert_unit()?;
    let chern_coeffs: Vec<BigRational> = (0..=m)
        .map(|i| coefficient_of_h_power(&tangent, i))
        .collect();
    let polar_coeffs = polar_from_chern(m, &chern_coeffs);
    Ok(PolarProfile {
        m,
        fundamental_degree: spec.degree(),
        chern_coeffs,
        polar_coeffs,
    })
}

fn coefficient_of_h_power(p: &ClassPoly, i: u32) -> BigRational {
    p.terms()
        .find(|(mono, _)| mono.codim() == i)
        .map(|(_, c)| c.clone())
        .unwrap_or_else(BigRational::zero)
}

fn integral(q: BigRational) -> Result<BigInt, ProfileError> {
    if q.is_integer() {
        Ok(q.to_integer())
    } else {
        Err(ProfileError::NonIntegral(crate::expr::fmt_rational(&q)))
    }
}

impl PolarProfile {
    /// A profile entered by hand from its polar degrees `deg p_0..=deg p_m`.
    pub fn from_polar_degrees(m: u32, polar_degrees: &[BigInt]) -> Result<Self, ProfileError> {
        if m < 1 {
            return Err(ProfileError::DimensionTooSmall(m));
        }
        if polar_degrees.len() != m as usize + 1 {
            return Err(ProfileError::LengthMismatch {
                expected: m as usize + 1,
                got: polar_degrees.len(),
            });
        }
        let d = polar_degrees[0].clone();
        if d <= BigInt::zero() {
            return Err(ProfileError::NonPositiveDegree);
        }
        let polar_coeffs: Vec<BigRational> = polar_degrees
            .iter()
            .map(|p| BigRational::new(p.clone(), d.clone()))
            .collect();
        let chern_coeffs = chern_from_polar(m, &polar_coeffs);
        Ok(PolarProfile {
            m,
            fundamental_degree: d,
            chern_coeffs,
            polar_coeffs,
        })
    }

    /// `deg p_j = q_j * deg X` for `j = 0..=m`.
    pub fn polar_degrees(&self) -> Result<Vec<BigInt>, ProfileError> {
        self.polar_coeffs
            .iter()
            .map(|q| integral(q * BigRational::from_integer(self.fundamental_degree.clone())))
            .collect()
    }

    /// `deg c_i(T_X)` for `i = 0..=m`.
    pub fn chern_degrees(&self) -> Result<Vec<BigInt>, ProfileError> {
        self.chern_coeffs
            .iter()
            .map(|g| integral(g * BigRational::from_integer(self.fundamental_degree.clone())))
            .collect()
    }

    /// Degree of a codim-`m` class written in `h, p1..pm`.
    pub fn evaluate_class(&self, formula: &ClassPoly) -> Result<BigInt, ProfileError> {
        if !formula.is_homogeneous_of(self.m) {
            return Err(ProfileError::NotHomogeneous(self.m));
        }
        let symbols = formula.context().symbols();
        // value of each symbol as a multiple of the matching power of h
        let mut values = Vec::with_capacity(symbols.len());
        for s in symbols {
            let v = if s.name == "h" {
                BigRational::one()
            } else if let Some(j) = s
                .name
                .strip_prefix('p')
                .and_then(|j| j.parse::<usize>().ok())
            {
                if j == 0 || j > self.m as usize || s.codim as usize != j {
                    return Err(ProfileError::UnknownSymbol(s.name.clone()));
                }
                self.polar_coeffs[j].clone()
            } else {
                return Err(ProfileError::UnknownSymbol(s.name.clone()));
            };
            values.push(v);
        }
        let mut total = BigRational::zero();
        for (mono, c) in formula.terms() {
            let mut t = c.clone();
            for (v, &e) in values.iter().zip(mono.exps()) {
                for _ in 0..e {
                    t *= v;
                }
            }
            total += t;
        }
        integral(total * BigRational::from_integer(self.fundamental_degree.clone()))
    }

    /// Degree of the monomial `prod p_j^{a_j}` (index 0 of `exponents` is `p_1`),
    /// capped by `h` up to dimension `m`.
    pub fn polar_number(&self, exponents: &[u32]) -> Result<BigInt, ProfileError> {
        let mut t = BigRational::from_integer(self.fundamental_degree.clone());
        for (j, &a) in exponents.iter().enumerate() {
            for _ in 0..a {
                t *= &self.polar_coeffs[j + 1];
            }
        }
        integral(t)
    }
}

/// Hyperplane section of a complete intersection: same multidegree, one
/// ambient dimension less. A zero-dimensional result is the terminal
/// point-set case.
pub fn hyperplane_section(spec: &VarietySpec) -> Result<VarietySpec, ProfileError> {
    if spec.dim() < 1 {
        return Err(ProfileError::DimensionTooSmall(spec.dim()));
    }
    Ok(VarietySpec {
        ambient: spec.ambient - 1,
        degrees: spec.degrees.clone(),
        interpretation: Interpretation::Projective,
    })
}

/// JSON form `{ambient, degrees, m, fundamental_degree, polar_degrees}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub ambient: u32,
    #[serde(default)]
    pub degrees: Option<Vec<u32>>,
    pub m: u32,
    pub fundamental_degree: i64,
    pub polar_degrees: Vec<i64>,
}

fn to_i64(v: &BigInt) -> Result<i64, ProfileError> {
    v.to_i64().ok_or(ProfileError::Overflow)
}

impl ProfileRecord {
    pub fn from_spec(spec: &VarietySpec) -> Result<Self, ProfileError> {
        let profile = ci_profile(spec)?;
        Ok(ProfileRecord {
            ambient: spec.ambient,
            degrees: Some(spec.degrees.clone()),
            m: profile.m,
            fundamental_degree: to_i64(&profile.fundamental_degree)?,
            polar_degrees: profile
                .polar_degrees()?
                .iter()
                .map(to_i64)
                .collect::<Result<_, _>>()?,
        })
    }

    pub fn to_profile(&self) -> Result<PolarProfile, ProfileError> {
        let degrees: Vec<BigInt> = self
            .polar_degrees
            .iter()
            .map(|&d| BigInt::from(d))
            .collect();
        if degrees
            .first()
            .map(|d| d != &BigInt::from(self.fundamental_degree))
            .unwrap_or(false)
        {
            return Err(ProfileError::LengthMismatch {
                expected: self.m as usize + 1,
                got: degrees.len(),
            });
        }
        PolarProfile::from_polar_degrees(self.m, &degrees)
    }
}
