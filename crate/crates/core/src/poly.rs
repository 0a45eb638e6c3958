//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Variables are positional; names live with the owning system.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigRational, One, Signed, ToPrimitive, Zero};

use crate::expr::write_term;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: BigRational) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, BigRational::one())
    }

    pub fn int(nvars: usize, c: i64) -> Self {
        Self::constant(nvars, BigRational::from_integer(c.into()))
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index {i} out of range");
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(e, BigRational::one());
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<u32>, BigRational)>>(
        nvars: usize,
        terms: I,
    ) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent length");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
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

    pub fn nvars(&self) -> usize {
        self.nvars
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

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &BigRational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Variables that occur with a positive exponent.
    pub fn support(&self) -> Vec<usize> {
        (0..self.nvars)
            .filter(|&i| self.terms.keys().any(|e| e[i] > 0))
            .collect()
    }

    pub fn scale(&self, k: &BigRational) -> Self {
        if k.is_zero() {
            return Self::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] > 0 {
                let mut d = e.clone();
                d[i] -= 1;
                out.add_term(d, c * BigRational::from_integer(e[i].into()));
            }
        }
        out
    }

    pub fn gradient(&self) -> Vec<Poly> {
        (0..self.nvars).map(|i| self.derivative(i)).collect()
    }

    /// Re-indexes into `target_nvars` variables; variable `i` becomes `map[i]`.
    pub fn remap(&self, map: &[usize], target_nvars: usize) -> Self {
        assert_eq!(map.len(), self.nvars, "remap length");
        let mut out = Self::zero(target_nvars);
        for (e, c) in &self.terms {
            let mut t = vec![0; target_nvars];
            for (i, &k) in e.iter().enumerate() {
                t[map[i]] += k;
            }
            out.add_term(t, c.clone());
        }
        out
    }

    /// Replaces variable `i` by `images[i]` (all in a common ring).
    pub fn compose(&self, images: &[Poly]) -> Self {
        assert_eq!(images.len(), self.nvars, "compose length");
        let target = images.first().map_or(0, |p| p.nvars);
        let mut out = Self::zero(target);
        for (e, c) in &self.terms {
            let mut t = Self::constant(target, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = &t * &images[i].pow(k);
                }
            }
            out = &out + &t;
        }
        out
    }

    pub fn eval_exact(&self, x: &[BigRational]) -> BigRational {
        let mut s = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t *= xi;
                }
            }
            s += t;
        }
        s
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (xi, &k) in x.iter().zip(e) {
                    if k > 0 {
                        t *= xi.powi(k as i32);
                    }
                }
                t
            })
            .sum()
    }

    /// Largest absolute coefficient, as a float (used for residual scaling).
    pub fn coefficient_scale(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }

    /// Canonical text: total degree descending, then exponent vector descending.
    pub fn to_text(&self, names: &[String]) -> String {
        assert_eq!(names.len(), self.nvars, "names length");
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut order: Vec<(&Vec<u32>, &BigRational)> = self.terms.iter().collect();
        order.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        let mut out = String::new();
        for (i, (e, c)) in order.into_iter().enumerate() {
            let mut mono = String::new();
            for (name, &k) in names.iter().zip(e.iter()) {
                if k == 0 {
                    continue;
                }
                if !mono.is_empty() {
                    mono.push('*');
                }
                mono.push_str(name);
                if k > 1 {
                    let _ = write!(mono, "^{k}");
                }
            }
            write_term(&mut out, c, &mono, i == 0);
        }
        out
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

/// Determinant by cofactor expansion along the first row.
pub fn determinant(rows: &[Vec<Poly>], nvars: usize) -> Poly {
    let n = rows.len();
    match n {
        0 => Poly::one(nvars),
        1 => rows[0][0].clone(),
        2 => &(&rows[0][0] * &rows[1][1]) - &(&rows[0][1] * &rows[1][0]),
        _ => {
            let mut acc = Poly::zero(nvars);
            for j in 0..n {
                if rows[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Poly>> = rows[1..]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != j)
                            .map(|(_, p)| p.clone())
                            .collect()
                    })
                    .collect();
                let t = &rows[0][j] * &determinant(&minor, nvars);
                acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            acc
        }
    }
}

/// Float evaluation form of a polynomial: flat term list.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    pub fn new(p: &Poly) -> Self {
        let terms = p
            .terms
            .iter()
            .map(|(e, c)| {
                let factors = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| (i, k as i32))
                    .collect();
                (c.to_f64().unwrap_or(f64::NAN), factors)
            })
            .collect();
        CompiledPoly { terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, fs)| fs.iter().fold(*c, |t, &(i, k)| t * x[i].powi(k)))
            .sum()
    }

    /// Value together with the sum of absolute term values.
    pub fn eval_with_scale(&self, x: &[f64]) -> (f64, f64) {
        self.terms.iter().fold((0.0, 0.0), |(v, s), (c, fs)| {
            let t = fs.iter().fold(*c, |t, &(i, k)| t * x[i].powi(k));
            (v + t, s + t.abs())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn arithmetic_and_text() {
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let p = &(&x + &y).pow(2) - &Poly::int(2, 1);
        assert_eq!(p.to_text(&names(&["x", "y"])), "x^2 + 2*x*y + y^2 - 1");
        assert_eq!(p.derivative(0).to_text(&names(&["x", "y"])), "2*x + 2*y");
        assert_eq!(p.total_degree(), 2);
        assert_eq!(Poly::zero(2).to_text(&names(&["x", "y"])), "0");
        let half = p.scale(&BigRational::new((-3).into(), 10.into()));
        assert_eq!(
            half.to_text(&names(&["x", "y"])),
            "-3/10*x^2 - 3/5*x*y - 3/10*y^2 + 3/10"
        );
    }

    #[test]
    fn remap_and_compose() {
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let p = &(&x * &x) + &y;
        let swapped = p.remap(&[1, 0], 2);
        assert_eq!(swapped, &(&y * &y) + &x);
        let composed = p.compose(&[y.clone(), x.clone()]);
        assert_eq!(composed, swapped);
        assert_eq!(p.eval(&[2.0, 3.0]), 7.0);
        assert_eq!(CompiledPoly::new(&p).eval(&[2.0, 3.0]), 7.0);
    }

    #[test]
    fn determinants() {
        let v: Vec<Poly> = (0..4).map(|i| Poly::var(4, i)).collect();
        let m = vec![
            vec![v[0].clone(), v[1].clone()],
            vec![v[2].clone(), v[3].clone()],
        ];
        assert_eq!(determinant(&m, 4), &(&v[0] * &v[3]) - &(&v[1] * &v[2]));
        let one = Poly::one(4);
        let zero = Poly::zero(4);
        let id = vec![
            vec![one.clone(), zero.clone(), zero.clone()],
            vec![zero.clone(), one.clone(), zero.clone()],
            vec![zero.clone(), zero.clone(), v[0].clone()],
        ];
        assert_eq!(determinant(&id, 4), v[0]);
    }
}
