//! Bottleneck equations for explicitly given varieties and their text format.
//!
//! ```text
//! vars: x1 x2 y1 y2
//! # n: 2
//! # k: 1
//! # m: 1
//! # formulation: minor
//! x1^4 + ...
//! ```
//!
//! The first non-blank, non-comment line declares the variables. Every
//! further non-blank line holds one polynomial; `#` starts a comment.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{parse_expr, ExprAlgebra, ParseError};
use crate::poly::{determinant, Poly};

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("need m < n, got m={m}, n={n}")]
    DimensionTooLarge { m: usize, n: usize },
    #[error("{k} equations cannot cut out codimension {codim}")]
    TooFewEquations { k: usize, codim: usize },
    #[error("no equations given")]
    Empty,
    #[error("polynomial {index} uses {got} variables, expected {expected}")]
    VariableCount {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("start system needs {expected} polynomials, got {got}")]
    StartLength { expected: usize, got: usize },
    #[error("start polynomial {index} has degree {got}, target has degree {expected}")]
    StartDegree {
        index: usize,
        got: u32,
        expected: u32,
    },
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    Minor,
    Lagrange,
    Homotopy,
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::Minor => "minor",
            Formulation::Lagrange => "lagrange",
            Formulation::Homotopy => "homotopy",
        })
    }
}

impl FromStr for Formulation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "minor" => Ok(Formulation::Minor),
            "lagrange" => Ok(Formulation::Lagrange),
            "homotopy" => Ok(Formulation::Homotopy),
            other => Err(format!("unknown formulation '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemMeta {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub formulation: Formulation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolySystem {
    pub variables: Vec<String>,
    pub polynomials: Vec<Poly>,
    pub meta: Option<SystemMeta>,
}

fn names(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}{i}"))
}

fn check_input(fs: &[Poly], m: usize) -> Result<usize, SystemError> {
    let n = fs.first().ok_or(SystemError::Empty)?.nvars();
    for (index, f) in fs.iter().enumerate() {
        if f.nvars() != n {
            return Err(SystemError::VariableCount {
                index,
                got: f.nvars(),
                expected: n,
            });
        }
    }
    if m >= n {
        return Err(SystemError::DimensionTooLarge { m, n });
    }
    if fs.len() < n - m {
        return Err(SystemError::TooFewEquations {
            k: fs.len(),
            codim: n - m,
        });
    }
    Ok(n)
}

/// All `size`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(size);
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < size - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    rec(0, n, size, &mut cur, &mut out);
    out
}

/// Number of minors per augmented Jacobian: `C(k+1, n-m+1) * C(n, n-m+1)`.
pub fn minor_count(n: usize, k: usize, m: usize) -> usize {
    combinations(k + 1, n - m + 1).len() * combinations(n, n - m + 1).len()
}

/// Minors of the augmented Jacobian with rows `(q - p, grad f_1(p), ...)`;
/// the coordinates of `p` are variables `offset..offset+n`.
fn augmented_minors(
    fs_at_p: &[Poly],
    p: &[Poly],
    q: &[Poly],
    offset: usize,
    size: usize,
    nvars: usize,
) -> Vec<Poly> {
    let n = p.len();
    let mut rows: Vec<Vec<Poly>> = vec![(0..n).map(|i| &q[i] - &p[i]).collect()];
    for f in fs_at_p {
        rows.push((0..n).map(|i| f.derivative(offset + i)).collect());
    }
    let mut out = Vec::new();
    for rsel in combinations(rows.len(), size) {
        for csel in combinations(n, size) {
            let sub: Vec<Vec<Poly>> = rsel
                .iter()
                .map(|&r| csel.iter().map(|&c| rows[r][c].clone()).collect())
                .collect();
            out.push(determinant(&sub, nvars));
        }
    }
    out
}

/// Minor formulation: `f(x)`, `f(y)`, then the minors of `J(x,y)` and of `J(y,x)`.
pub fn build_minor_system(fs: &[Poly], m: usize) -> Result<PolySystem, SystemError> {
    let n = check_input(fs, m)?;
    let nv = 2 * n;
    let to_x: Vec<usize> = (0..n).collect();
    let to_y: Vec<usize> = (n..2 * n).collect();
    let fx: Vec<Poly> = fs.iter().map(|f| f.remap(&to_x, nv)).collect();
    let fy: Vec<Poly> = fs.iter().map(|f| f.remap(&to_y, nv)).collect();
    let xs: Vec<Poly> = (0..n).map(|i| Poly::var(nv, i)).collect();
    let ys: Vec<Poly> = (n..2 * n).map(|i| Poly::var(nv, i)).collect();
    let size = n - m + 1;
    let mut polys: Vec<Poly> = fx.iter().chain(&fy).cloned().collect();
    polys.extend(augmented_minors(&fx, &xs, &ys, 0, size, nv));
    polys.extend(augmented_minors(&fy, &ys, &xs, n, size, nv));
    let variables = names("x", n).chain(names("y", n)).collect();
    Ok(PolySystem {
        variables,
        polynomials: polys,
        meta: Some(SystemMeta {
            n,
            k: fs.len(),
            m,
            formulation: Formulation::Minor,
        }),
    })
}

/// Start system and blending constant for the parameter homotopy.
#[derive(Debug, Clone)]
pub struct Homotopy {
    pub start: Vec<Poly>,
    pub gamma: BigRational,
}

/// A reproducible real blending constant in `[1/2, 2)` with denominator 1000.
pub fn random_gamma(seed: u64) -> BigRational {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BigRational::new(rng.gen_range(500..2000).into(), 1000.into())
}

/// Square Lagrange formulation in `x, y, lam, mu` (and `t` when blending):
/// `h(x)`, `h(y)`, `y - x - sum lam_i grad h_i(x)`, `y - x - sum mu_i grad h_i(y)`.
pub fn build_lagrange_system(
    fs: &[Poly],
    m: usize,
    homotopy: Option<&Homotopy>,
) -> Result<PolySystem, SystemError> {
    let n = check_input(fs, m)?;
    let k = fs.len();
    if let Some(hom) = homotopy {
        if hom.start.len() != k {
            return Err(SystemError::StartLength {
                expected: k,
                got: hom.start.len(),
            });
        }
        for (index, (g, f)) in hom.start.iter().zip(fs).enumerate() {
            if g.nvars() != n {
                return Err(SystemError::VariableCount {
                    index,
                    got: g.nvars(),
                    expected: n,
                });
            }
            if g.total_degree() != f.total_degree() {
                return Err(SystemError::StartDegree {
                    index,
                    got: g.total_degree(),
                    expected: f.total_degree(),
                });
            }
        }
    }
    let nv = 2 * n + 2 * k + usize::from(homotopy.is_some());
    let hs: Vec<Poly> = match homotopy {
        None => fs
            .iter()
            .map(|f| f.remap(&(0..n).collect::<Vec<_>>(), nv))
            .collect(),
        Some(hom) => {
            // h = (1 - t) f + gamma t g, with f and g living on x1..xn
            let t = Poly::var(nv, nv - 1);
            let one_minus_t = &Poly::one(nv) - &t;
            let gt = t.scale(&hom.gamma);
            let ident: Vec<usize> = (0..n).collect();
            fs.iter()
                .zip(&hom.start)
                .map(|(f, g)| {
                    &(&one_minus_t * &f.remap(&ident, nv)) + &(&gt * &g.remap(&ident, nv))
                })
                .collect()
        }
    };
    let xs: Vec<Poly> = (0..n).map(|i| Poly::var(nv, i)).collect();
    let ys: Vec<Poly> = (n..2 * n).map(|i| Poly::var(nv, i)).collect();
    let swap_xy: Vec<usize> = (0..nv)
        .map(|i| {
            if i < n {
                i + n
            } else if i < 2 * n {
                i - n
            } else {
                i
            }
        })
        .collect();
    let hy: Vec<Poly> = hs.iter().map(|h| h.remap(&swap_xy, nv)).collect();
    let lam: Vec<Poly> = (0..k).map(|i| Poly::var(nv, 2 * n + i)).collect();
    let mu: Vec<Poly> = (0..k).map(|i| Poly::var(nv, 2 * n + k + i)).collect();

    let mut polys: Vec<Poly> = hs.iter().chain(&hy).cloned().collect();
    for (hset, mult, offset) in [(&hs, &lam, 0), (&hy, &mu, n)] {
        for i in 0..n {
            let mut e = &ys[i] - &xs[i];
            for (h, l) in hset.iter().zip(mult.iter()) {
                e = &e - &(l * &h.derivative(offset + i));
            }
            polys.push(e);
        }
    }
    let mut variables: Vec<String> = names("x", n)
        .chain(names("y", n))
        .chain(names("lam", k))
        .chain(names("mu", k))
        .collect();
    let formulation = if homotopy.is_some() {
        variables.push("t".into());
        Formulation::Homotopy
    } else {
        Formulation::Lagrange
    };
    Ok(PolySystem {
        variables,
        polynomials: polys,
        meta: Some(SystemMeta {
            n,
            k,
            m,
            formulation,
        }),
    })
}

/// Parsing target: a polynomial together with the declared names.
struct Named<'a> {
    names: &'a [String],
    poly: Poly,
}

impl<'a> ExprAlgebra for Named<'a> {
    type Error = ParseError;

    fn constant(&self, value: BigRational) -> Self {
        Named {
            names: self.names,
            poly: Poly::constant(self.names.len(), value),
        }
    }

    fn variable(&self, name: &str, line: usize, column: usize) -> Result<Self, ParseError> {
        match self.names.iter().position(|n| n == name) {
            Some(i) => Ok(Named {
                names: self.names,
                poly: Poly::var(self.names.len(), i),
            }),
            None => Err(ParseError {
                line,
                column,
                message: format!("undeclared variable '{name}'"),
            }),
        }
    }

    fn sum(self, rhs: Self) -> Result<Self, ParseError> {
        Ok(Named {
            names: self.names,
            poly: &self.poly + &rhs.poly,
        })
    }

    fn product(self, rhs: Self) -> Result<Self, ParseError> {
        Ok(Named {
            names: self.names,
            poly: &self.poly * &rhs.poly,
        })
    }

    fn negated(self) -> Self {
        Named {
            names: self.names,
            poly: -&self.poly,
        }
    }

    fn power(self, exp: u32) -> Result<Self, ParseError> {
        Ok(Named {
            names: self.names,
            poly: self.poly.pow(exp),
        })
    }
}

/// Parses one polynomial in the given variables.
pub fn parse_poly(src: &str, names: &[String], line: usize) -> Result<Poly, ParseError> {
    let e = parse_expr(src, line)?;
    let seed = Named {
        names,
        poly: Poly::zero(names.len()),
    };
    Ok(e.eval(&seed, line)?.poly)
}

impl PolySystem {
    pub fn nvars(&self) -> usize {
        self.variables.len()
    }

    pub fn emit(&self) -> String {
        let mut out = format!("vars: {}\n", self.variables.join(" "));
        if let Some(meta) = &self.meta {
            out.push_str(&format!(
                "# n: {}\n# k: {}\n# m: {}\n# formulation: {}\n",
                meta.n, meta.k, meta.m, meta.formulation
            ));
        }
        for p in &self.polynomials {
            out.push_str(&p.to_text(&self.variables));
            out.push('\n');
        }
        out
    }

    pub fn parse(src: &str) -> Result<Self, SystemError> {
        let mut variables: Option<Vec<String>> = None;
        let mut polynomials = Vec::new();
        let (mut n, mut k, mut m, mut formulation) = (None, None, None, None);
        let err = |line: usize, column: usize, message: String| ParseError {
            line,
            column,
            message,
        };
        for (idx, raw) in src.lines().enumerate() {
            let line = idx + 1;
            let (body, comment) = match raw.find('#') {
                Some(i) => (&raw[..i], Some(&raw[i + 1..])),
                None => (raw, None),
            };
            if let Some(c) = comment {
                if let Some((key, value)) = c.split_once(':') {
                    let value = value.trim();
                    let column = raw.find('#').unwrap_or(0) + 1;
                    let number = || {
                        value
                            .parse::<usize>()
                            .map_err(|_| err(line, column, format!("bad {}", key.trim())))
                    };
                    match key.trim() {
                        "n" => n = Some(number()?),
                        "k" => k = Some(number()?),
                        "m" => m = Some(number()?),
                        "formulation" => {
                            formulation = Some(
                                value
                                    .parse::<Formulation>()
                                    .map_err(|e| err(line, column, e))?,
                            )
                        }
                        _ => {}
                    }
                }
            }
            if body.trim().is_empty() {
                continue;
            }
            match &variables {
                None => {
                    let rest = body
                        .trim_start()
                        .strip_prefix("vars:")
                        .ok_or_else(|| err(line, 1, "expected 'vars:' declaration".into()))?;
                    let mut seen = HashSet::new();
                    let mut names = Vec::new();
                    let offset = body.len() - rest.len();
                    let mut pos = 0;
                    for name in rest.split_whitespace() {
                        let at = rest[pos..].find(name).unwrap_or(0) + pos;
                        pos = at + name.len();
                        let column = offset + at + 1;
                        let valid = name
                            .chars()
                            .next()
                            .is_some_and(|c| c.is_alphabetic() || c == '_')
                            && name.chars().all(|c| c.is_alphanumeric() || c == '_');
                        if !valid {
                            return Err(err(
                                line,
                                column,
                                format!("invalid variable name '{name}'"),
                            )
                            .into());
                        }
                        if !seen.insert(name) {
                            return Err(
                                err(line, column, format!("duplicate variable '{name}'")).into()
                            );
                        }
                        names.push(name.to_string());
                    }
                    if names.is_empty() {
                        return Err(
                            err(line, body.len() + 1, "no variables declared".into()).into()
                        );
                    }
                    variables = Some(names);
                }
                Some(names) => polynomials.push(parse_poly(body, names, line)?),
            }
        }
        let variables = variables.ok_or_else(|| err(1, 1, "missing 'vars:' declaration".into()))?;
        let meta = match (n, k, m, formulation) {
            (Some(n), Some(k), Some(m), Some(formulation)) => Some(SystemMeta {
                n,
                k,
                m,
                formulation,
            }),
            _ => None,
        };
        Ok(PolySystem {
            variables,
            polynomials,
            meta,
        })
    }

    pub fn write_to(&self, path: &Path) -> Result<(), SystemError> {
        std::fs::write(path, self.emit())?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self, SystemError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// `(h(x), h(y))` evaluated at float points for every polynomial.
    pub fn residuals(&self, point: &[f64]) -> Vec<f64> {
        self.polynomials.iter().map(|p| p.eval(point)).collect()
    }
}

/// Exchanges the `x` and `y` blocks of a `2n`-variable polynomial.
pub fn swap_points(p: &Poly, n: usize) -> Poly {
    let nv = p.nvars();
    let map: Vec<usize> = (0..nv)
        .map(|i| {
            if i < n {
                i + n
            } else if i < 2 * n {
                i - n
            } else {
                i
            }
        })
        .collect();
    p.remap(&map, nv)
}

/// Integer scaling that clears denominators (used when comparing systems up to a unit).
pub fn normalize_sign(p: &Poly) -> Poly {
    match p.terms().next() {
        Some((_, c)) if c < &BigRational::from_integer(0.into()) => -p,
        _ => p.clone(),
    }
}

/// `true` when `a = c * b` for a nonzero rational `c`.
pub fn proportional(a: &Poly, b: &Poly) -> bool {
    match (a.terms().next(), b.terms().next()) {
        (None, None) => true,
        (Some((ea, ca)), Some((eb, cb))) if ea == eb => {
            let ratio = ca / cb;
            a == &b.scale(&ratio)
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::{One, Zero};

    fn vars(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn trott() -> Poly {
        parse_poly(
            "144(x1^4+x2^4)-225(x1^2+x2^2)+350x1^2x2^2+81",
            &vars(&["x1", "x2"]),
            1,
        )
        .unwrap()
    }

    #[test]
    fn trott_matches_displayed_equations() {
        let sys = build_minor_system(&[trott()], 1).unwrap();
        let v = vars(&["x1", "x2", "y1", "y2"]);
        let expected = [
            "144(x1^4+x2^4)-225(x1^2+x2^2)+350x1^2x2^2+81",
            "144(y1^4+y2^4)-225(y1^2+y2^2)+350y1^2y2^2+81",
            "x1(-576x1^2-700x2^2+450)(y2-x2) - x2(576x2^2+700x1^2-450)(x1-y1)",
            "y1(-576y1^2-700y2^2+450)(x2-y2) - y2(576y2^2+700y1^2-450)(y1-x1)",
        ];
        assert_eq!(sys.polynomials.len(), 4);
        for (got, want) in sys.polynomials.iter().zip(expected) {
            let want = parse_poly(want, &v, 1).unwrap();
            assert!(
                proportional(got, &want),
                "{} vs {}",
                got.to_text(&v),
                want.to_text(&v)
            );
        }
    }

    #[test]
    fn minor_counts() {
        for (n, k, m) in [(2, 1, 1), (3, 1, 2), (3, 2, 1), (4, 2, 2), (4, 3, 1)] {
            let fs: Vec<Poly> = (0..k)
                .map(|i| &Poly::var(n, i).pow(2) - &Poly::one(n))
                .collect();
            let sys = build_minor_system(&fs, m).unwrap();
            assert_eq!(sys.polynomials.len(), 2 * k + 2 * minor_count(n, k, m));
        }
        assert_eq!(minor_count(3, 1, 2), 3);
        assert!(matches!(
            build_minor_system(&[Poly::var(2, 0)], 2),
            Err(SystemError::DimensionTooLarge { .. })
        ));
        let f = Poly::var(3, 0);
        assert!(matches!(
            build_minor_system(&[f], 1),
            Err(SystemError::TooFewEquations { .. })
        ));
    }

    #[test]
    fn symmetric_under_swap() {
        let v = vars(&["x", "y", "z"]);
        let fs = vec![
            parse_poly("x^3-3x*y^2-z", &v, 1).unwrap(),
            parse_poly("x^2+y^2+3z^2-1", &v, 2).unwrap(),
        ];
        let sys = build_minor_system(&fs, 1).unwrap();
        let set: HashSet<Poly> = sys.polynomials.iter().map(normalize_sign).collect();
        let swapped: HashSet<Poly> = sys
            .polynomials
            .iter()
            .map(|p| normalize_sign(&swap_points(p, 3)))
            .collect();
        assert_eq!(set, swapped);
    }

    #[test]
    fn ellipse_solutions() {
        let v = vars(&["x1", "x2"]);
        let f = parse_poly("x1^2 + x2^2/2 - 1", &v, 1).unwrap();
        let sys = build_minor_system(std::slice::from_ref(&f), 1).unwrap();
        let q = |a: i64| BigRational::from_integer(a.into());
        let pt = [q(1), q(0), q(-1), q(0)];
        assert!(sys.polynomials.iter().all(|p| p.eval_exact(&pt).is_zero()));
        let s = 2f64.sqrt();
        let pt = [0.0, s, 0.0, -s];
        assert!(sys.residuals(&pt).iter().all(|r| r.abs() < 1e-12));

        let lag = build_lagrange_system(&[f], 1, None).unwrap();
        assert_eq!(lag.polynomials.len(), 6);
        assert_eq!(
            lag.variables,
            vars(&["x1", "x2", "y1", "y2", "lam1", "mu1"])
        );
        // x-axis pair: y - x = lam grad f(x) with grad f = (2x1, x2)
        let pt = [1.0, 0.0, -1.0, 0.0, -1.0, 1.0];
        assert!(lag.residuals(&pt).iter().all(|r| r.abs() < 1e-15));
        let pt = [0.0, s, 0.0, -s, -2.0, 2.0];
        assert!(lag.residuals(&pt).iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn hyperplane_has_no_offdiagonal_solutions() {
        let f = Poly::var(2, 0);
        let sys = build_minor_system(&[f], 1).unwrap();
        let v = sys.variables.clone();
        // x1 = y1 = 0 and the minors force y2 = x2
        let texts: Vec<String> = sys.polynomials.iter().map(|p| p.to_text(&v)).collect();
        assert_eq!(texts, vec!["x1", "y1", "x2 - y2", "-x2 + y2"]);
    }

    #[test]
    fn lagrange_shapes() {
        let v = vars(&["x", "y", "z"]);
        let f = parse_poly("x^4 + y^4 + z^4 - 1", &v, 1).unwrap();
        let sys = build_lagrange_system(std::slice::from_ref(&f), 2, None).unwrap();
        assert_eq!((sys.polynomials.len(), sys.nvars()), (8, 8));
        let g = parse_poly("x^4 - 1", &v, 1).unwrap();
        let hom = Homotopy {
            start: vec![g],
            gamma: random_gamma(7),
        };
        let sys = build_lagrange_system(std::slice::from_ref(&f), 2, Some(&hom)).unwrap();
        assert_eq!((sys.polynomials.len(), sys.nvars()), (8, 9));
        assert_eq!(sys.meta.unwrap().formulation, Formulation::Homotopy);
        let bad = Homotopy {
            start: vec![parse_poly("x^3", &v, 1).unwrap()],
            gamma: BigRational::one(),
        };
        assert!(matches!(
            build_lagrange_system(&[f], 2, Some(&bad)),
            Err(SystemError::StartDegree { .. })
        ));
        let degenerate = build_lagrange_system(&[Poly::one(2)], 1, None).unwrap();
        assert_eq!(degenerate.polynomials.len(), 6);
    }

    #[test]
    fn roundtrip() {
        let sys = build_minor_system(&[trott()], 1).unwrap();
        let text = sys.emit();
        let back = PolySystem::parse(&text).unwrap();
        assert_eq!(back, sys);
        assert_eq!(back.emit(), text);
        let lag = build_lagrange_system(&[trott()], 1, None).unwrap();
        assert_eq!(PolySystem::parse(&lag.emit()).unwrap(), lag);
    }

    #[test]
    fn parse_errors_and_decimals() {
        let e = PolySystem::parse("vars: x y\nx + z\n").unwrap_err();
        match e {
            SystemError::Parse(p) => assert_eq!((p.line, p.column), (2, 5)),
            other => panic!("{other}"),
        }
        let s = PolySystem::parse("# a comment\nvars: x\n0.3x^2 - 1 # trailing\n").unwrap();
        assert_eq!(s.polynomials[0].to_text(&s.variables), "3/10*x^2 - 1");
        assert!(s.meta.is_none());
        assert!(PolySystem::parse("x + 1\n").is_err());
        assert!(PolySystem::parse("vars: x x\n").is_err());
    }
}
