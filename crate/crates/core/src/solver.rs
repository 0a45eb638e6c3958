//! Multistart Newton search for real bottleneck pairs.
//!
//! Start pairs come from points sampled on the variety. Newton runs on the
//! square Lagrange system and every converged pair is checked against the
//! minor system. Nothing here is certified; a report always carries
//! `possibly_incomplete`.

use std::cmp::Ordering;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::poly::{CompiledPoly, Poly};
use crate::system::{build_lagrange_system, build_minor_system, SystemError};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver config: {0}")]
    Config(String),
    #[error("only hypersurfaces and codimension-2 complete intersections are supported (got {0} equations)")]
    Unsupported(usize),
    #[error("no isolated bottleneck pairs")]
    NoPairs,
    #[error(transparent)]
    System(#[from] SystemError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverConfig {
    /// Search box, one interval per coordinate.
    pub bounds: Vec<(f64, f64)>,
    /// Grid nodes per axis.
    pub density: usize,
    pub max_iterations: usize,
    pub tau_res: f64,
    pub tau_cluster: f64,
    pub tau_sep: f64,
    pub seed: u64,
    /// Upper bound on sample points; the thinning radius grows until it holds.
    pub max_samples: usize,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl SolverConfig {
    pub fn new(bounds: Vec<(f64, f64)>) -> Self {
        SolverConfig {
            bounds,
            density: 20,
            max_iterations: 100,
            tau_res: 1e-10,
            tau_cluster: 1e-6,
            tau_sep: 1e-4,
            seed: 0,
            max_samples: 150,
            threads: threads_from_env(),
        }
    }

    /// The cube `[-r, r]^n`.
    pub fn cube(n: usize, r: f64) -> Self {
        Self::new(vec![(-r, r); n])
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::Config(m.to_string()));
        if self.bounds.is_empty() {
            return bad("empty search box");
        }
        if self
            .bounds
            .iter()
            .any(|(lo, hi)| lo >= hi || !lo.is_finite() || !hi.is_finite())
        {
            return bad("every interval needs lo < hi");
        }
        if self.max_samples < 2 {
            return bad("max_samples must be >= 2");
        }
        if self.density < 2 {
            return bad("density must be >= 2");
        }
        if !(self.tau_cluster > 0.0 && self.tau_sep > self.tau_cluster) {
            return bad("need tau_sep > tau_cluster > 0");
        }
        if self.tau_res.is_nan() || self.tau_res <= 0.0 {
            return bad("tau_res must be positive");
        }
        Ok(())
    }

    fn cell(&self) -> f64 {
        self.bounds
            .iter()
            .map(|(lo, hi)| (hi - lo) / (self.density - 1) as f64)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Thread cap from `BND_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("BND_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&t| t > 0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BottleneckPair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub separation: f64,
    /// Largest relative residual over the Lagrange and minor systems.
    pub residual: f64,
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub isolated: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub samples: usize,
    pub starts: usize,
    pub converged: usize,
    pub diagonal: usize,
    pub diverged: usize,
    pub singular_steps: usize,
    pub rejected_by_minors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub pairs: Vec<BottleneckPair>,
    pub stats: SolveStats,
    /// Multistart search is heuristic and never proves completeness.
    pub possibly_incomplete: bool,
}

impl SolveReport {
    pub fn isolated(&self) -> impl Iterator<Item = &BottleneckPair> {
        self.pairs.iter().filter(|p| p.isolated)
    }
}

/// Polynomial with value and term-magnitude evaluation.
struct Residual {
    poly: CompiledPoly,
    grad: Vec<CompiledPoly>,
}

impl Residual {
    fn new(p: &Poly) -> Self {
        Residual {
            poly: CompiledPoly::new(p),
            grad: p.gradient().iter().map(CompiledPoly::new).collect(),
        }
    }
}

/// `|p(z)| / (1 + sum_t |c_t z^t|)`.
fn relative(p: &CompiledPoly, z: &[f64]) -> f64 {
    let (v, s) = p.eval_with_scale(z);
    v.abs() / (1.0 + s)
}

struct Square {
    eqs: Vec<Residual>,
}

impl Square {
    fn new(system: &[Poly]) -> Self {
        Square {
            eqs: system.iter().map(Residual::new).collect(),
        }
    }

    fn values(&self, z: &[f64]) -> DVector<f64> {
        DVector::from_iterator(self.eqs.len(), self.eqs.iter().map(|e| e.poly.eval(z)))
    }

    fn jacobian(&self, z: &[f64]) -> DMatrix<f64> {
        let rows = self.eqs.len();
        let cols = z.len();
        DMatrix::from_fn(rows, cols, |i, j| self.eqs[i].grad[j].eval(z))
    }

    fn relative_residual(&self, z: &[f64]) -> f64 {
        self.eqs
            .iter()
            .map(|e| relative(&e.poly, z))
            .fold(0.0, f64::max)
    }
}

/// Least-squares solve through the SVD (minimum-norm for rank-deficient `a`).
fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    svd.solve(b, smax * 1e-12).ok()
}

/// Points on `{f = 0}` from Newton projection of jittered grid nodes.
pub fn sample_variety(fs: &[Poly], config: &SolverConfig) -> Result<Vec<Vec<f64>>, SolverError> {
    config.validate()?;
    let n = config.bounds.len();
    if fs.iter().any(|f| f.nvars() != n) {
        return Err(SolverError::Config(format!(
            "box has {n} coordinates but the equations do not"
        )));
    }
    let eqs = Square::new(fs);
    let d = config.density;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let total = d.pow(n as u32);
    let mut nodes = Vec::with_capacity(total);
    for idx in 0..total {
        let mut rest = idx;
        let mut p = Vec::with_capacity(n);
        for &(lo, hi) in &config.bounds {
            let step = (hi - lo) / (d - 1) as f64;
            let jitter: f64 = rng.gen_range(-0.3..0.3);
            p.push(lo + ((rest % d) as f64 + jitter) * step);
            rest /= d;
        }
        nodes.push(p);
    }
    let projected: Vec<Option<Vec<f64>>> = install(config, || {
        nodes.par_iter().map(|p| project(&eqs, p, config)).collect()
    });
    let on_variety: Vec<Vec<f64>> = projected.into_iter().flatten().collect();
    let mut radius = 0.5 * config.cell();
    loop {
        let kept = thin(&on_variety, radius);
        if kept.len() <= config.max_samples {
            return Ok(kept);
        }
        radius *= 1.25;
    }
}

fn thin(points: &[Vec<f64>], radius: f64) -> Vec<Vec<f64>> {
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for p in points {
        if kept.iter().all(|q| dist(q, p) > radius) {
            kept.push(p.clone());
        }
    }
    kept
}

fn project(eqs: &Square, start: &[f64], config: &SolverConfig) -> Option<Vec<f64>> {
    let mut z = DVector::from_column_slice(start);
    let span = config
        .bounds
        .iter()
        .map(|(lo, hi)| hi - lo)
        .fold(0.0, f64::max);
    for _ in 0..50 {
        let zs = z.as_slice();
        if eqs.relative_residual(zs) < config.tau_res * 1e-2 {
            break;
        }
        let step = lstsq(&eqs.jacobian(zs), &eqs.values(zs))?;
        z -= &step;
        if !z.iter().all(|v| v.is_finite()) || dist(z.as_slice(), start) > span {
            return None;
        }
    }
    let zs = z.as_slice().to_vec();
    let inside = zs
        .iter()
        .zip(&config.bounds)
        .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi);
    (inside && eqs.relative_residual(&zs) < config.tau_res).then_some(zs)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt()
}

fn install<T: Send>(config: &SolverConfig, job: impl FnOnce() -> T + Send) -> T {
    match config
        .threads
        .and_then(|t| rayon::ThreadPoolBuilder::new().num_threads(t).build().ok())
    {
        Some(pool) => pool.install(job),
        None => job(),
    }
}

enum Outcome {
    Converged(Vec<f64>, usize),
    Diverged(usize),
}

/// Damped Newton: LU step with SVD fallback, step halving on residual increase.
fn newton(sys: &Square, start: Vec<f64>, config: &SolverConfig) -> Outcome {
    let mut z = DVector::from_vec(start);
    let mut singular = 0;
    let mut f = sys.values(z.as_slice());
    let mut norm = f.norm();
    for _ in 0..config.max_iterations {
        if sys.relative_residual(z.as_slice()) < config.tau_res * 1e-3 {
            break;
        }
        let jac = sys.jacobian(z.as_slice());
        let step = match jac.clone().lu().solve(&f) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => {
                singular += 1;
                match lstsq(&jac, &f) {
                    Some(s) => s,
                    None => return Outcome::Diverged(singular),
                }
            }
        };
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=30 {
            let trial = &z - &step * alpha;
            let ft = sys.values(trial.as_slice());
            let nt = ft.norm();
            if nt.is_finite() && nt < norm {
                z = trial;
                f = ft;
                norm = nt;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
        if step.norm() * alpha < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    if sys.relative_residual(z.as_slice()) < config.tau_res {
        Outcome::Converged(z.as_slice().to_vec(), singular)
    } else {
        Outcome::Diverged(singular)
    }
}

/// Isolation test: smallest singular value at least `1e-8` times the largest.
pub fn classify_isolation(jacobian: &DMatrix<f64>) -> bool {
    let sv = jacobian.singular_values();
    let (smin, smax) = (sv.min(), sv.max());
    smax > 0.0 && smin >= 1e-8 * smax
}

/// Lexicographic comparison treating coordinates within `tol` as equal.
fn lex_le(a: &[f64], b: &[f64], tol: f64) -> bool {
    for (u, v) in a.iter().zip(b) {
        if (u - v).abs() > tol {
            return u < v;
        }
    }
    true
}

fn pair_distance(a: &BottleneckPair, b: &BottleneckPair) -> f64 {
    let same = (dist(&a.x, &b.x).powi(2) + dist(&a.y, &b.y).powi(2)).sqrt();
    let swapped = (dist(&a.x, &b.y).powi(2) + dist(&a.y, &b.x).powi(2)).sqrt();
    same.min(swapped)
}

fn canonical_order(a: &BottleneckPair, b: &BottleneckPair) -> Ordering {
    a.separation
        .total_cmp(&b.separation)
        .then_with(|| cmp_slices(&a.x, &b.x))
        .then_with(|| cmp_slices(&a.y, &b.y))
}

fn cmp_slices(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(u, v)| u.total_cmp(v))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Real bottleneck pairs of `{f_1 = ... = f_k = 0}` for `k` in `{1, 2}`.
pub fn find_bottlenecks(fs: &[Poly], config: &SolverConfig) -> Result<SolveReport, SolverError> {
    config.validate()?;
    let k = fs.len();
    if !(1..=2).contains(&k) {
        return Err(SolverError::Unsupported(k));
    }
    let n = config.bounds.len();
    if n <= k {
        return Err(SolverError::Config(format!(
            "{k} equations in {n} variables leave nothing to search"
        )));
    }
    let m = n - k;
    let lagrange = build_lagrange_system(fs, m, None)?;
    let minors = build_minor_system(fs, m)?;
    let square = Square::new(&lagrange.polynomials);
    let minor_eqs: Vec<CompiledPoly> = minors.polynomials.iter().map(CompiledPoly::new).collect();
    let grads: Vec<Vec<CompiledPoly>> = fs
        .iter()
        .map(|f| f.gradient().iter().map(CompiledPoly::new).collect())
        .collect();

    let samples = sample_variety(fs, config)?;
    let mut starts = Vec::new();
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            if dist(&samples[i], &samples[j]) > 2.0 * config.tau_sep {
                starts.push((i, j));
            }
        }
    }

    // y - x = sum lam_i grad f_i(x), solved in the least-squares sense
    let multipliers = |p: &[f64], q: &[f64]| -> Vec<f64> {
        let a = DMatrix::from_fn(n, k, |r, c| grads[c][r].eval(p));
        let b = DVector::from_iterator(n, q.iter().zip(p).map(|(u, v)| u - v));
        lstsq(&a, &b)
            .map(|v| v.as_slice().to_vec())
            .unwrap_or_else(|| vec![0.0; k])
    };

    let outcomes: Vec<Outcome> = install(config, || {
        starts
            .par_iter()
            .map(|&(i, j)| {
                let (p, q) = (&samples[i], &samples[j]);
                let mut z = Vec::with_capacity(2 * n + 2 * k);
                z.extend_from_slice(p);
                z.extend_from_slice(q);
                z.extend(multipliers(p, q));
                z.extend(multipliers(q, p));
                newton(&square, z, config)
            })
            .collect()
    });

    let mut stats = SolveStats {
        samples: samples.len(),
        starts: starts.len(),
        ..SolveStats::default()
    };
    let mut found = Vec::new();
    for outcome in outcomes {
        match outcome {
            Outcome::Diverged(s) => {
                stats.diverged += 1;
                stats.singular_steps += s;
            }
            Outcome::Converged(z, s) => {
                stats.converged += 1;
                stats.singular_steps += s;
                let (x, y) = (&z[..n], &z[n..2 * n]);
                let separation = dist(x, y);
                if separation <= config.tau_sep {
                    stats.diagonal += 1;
                    continue;
                }
                let point: Vec<f64> = x.iter().chain(y).copied().collect();
                let minor_res = minor_eqs
                    .iter()
                    .map(|p| relative(p, &point))
                    .fold(0.0, f64::max);
                if minor_res >= config.tau_res {
                    stats.rejected_by_minors += 1;
                    continue;
                }
                let residual = square.relative_residual(&z).max(minor_res);
                let isolated = classify_isolation(&square.jacobian(&z));
                let (lam, mu) = (z[2 * n..2 * n + k].to_vec(), z[2 * n + k..].to_vec());
                let pair = if lex_le(x, y, config.tau_cluster) {
                    BottleneckPair {
                        x: x.to_vec(),
                        y: y.to_vec(),
                        separation,
                        residual,
                        lambda: lam,
                        mu,
                        isolated,
                    }
                } else {
                    BottleneckPair {
                        x: y.to_vec(),
                        y: x.to_vec(),
                        separation,
                        residual,
                        lambda: mu,
                        mu: lam,
                        isolated,
                    }
                };
                found.push(pair);
            }
        }
    }
    found.sort_by(canonical_order);
    let mut pairs: Vec<BottleneckPair> = Vec::new();
    for p in found {
        if pairs
            .iter()
            .all(|q| pair_distance(q, &p) > config.tau_cluster)
        {
            pairs.push(p);
        }
    }
    Ok(SolveReport {
        pairs,
        stats,
        possibly_incomplete: true,
    })
}

/// Minimum-separation isolated pair and the bound `b = separation / 2`.
pub fn narrowest_bottleneck(
    pairs: &[BottleneckPair],
) -> Result<(&BottleneckPair, f64), SolverError> {
    pairs
        .iter()
        .filter(|p| p.isolated)
        .min_by(|a, b| canonical_order(a, b))
        .map(|p| (p, p.separation / 2.0))
        .ok_or(SolverError::NoPairs)
}

fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|v| format!("{v:.10}")).collect();
    format!("({})", parts.join(", "))
}

/// Plain-text table, one pair per line.
pub fn format_table(report: &SolveReport) -> String {
    let mut out = String::from("#  separation      residual  isolated  x  y\n");
    for (i, p) in report.pairs.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:<2} {:<14.10} {:<9.2e} {:<9} {}  {}",
            i + 1,
            p.separation,
            p.residual,
            if p.isolated { "yes" } else { "no" },
            fmt_point(&p.x),
            fmt_point(&p.y)
        );
    }
    out
}

/// Plot data for external tools: sample points, then one segment per pair.
pub fn plot_data(samples: &[Vec<f64>], report: &SolveReport) -> String {
    let mut out = String::from("# points\n");
    for p in samples {
        let coords: Vec<String> = p.iter().map(|v| format!("{v:.12}")).collect();
        out.push_str(&coords.join(" "));
        out.push('\n');
    }
    out.push_str("# segments\n");
    for pair in &report.pairs {
        let coords: Vec<String> = pair
            .x
            .iter()
            .chain(&pair.y)
            .map(|v| format!("{v:.12}"))
            .collect();
        out.push_str(&coords.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::parse_poly;

    fn polys(vars: &[&str], src: &[&str]) -> Vec<Poly> {
        let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        src.iter()
            .enumerate()
            .map(|(i, s)| parse_poly(s, &names, i + 1).unwrap())
            .collect()
    }

    #[test]
    fn config_validation() {
        let mut c = SolverConfig::cube(2, 1.0);
        assert!(c.validate().is_ok());
        c.density = 1;
        assert!(c.validate().is_err());
        let mut c = SolverConfig::cube(2, 1.0);
        c.tau_sep = c.tau_cluster;
        assert!(c.validate().is_err());
        assert!(SolverConfig::new(vec![(1.0, 1.0)]).validate().is_err());
    }

    #[test]
    fn samples() {
        let ellipse = polys(&["x", "y"], &["x^2 + y^2/2 - 1"]);
        let pts = sample_variety(&ellipse, &SolverConfig::cube(2, 2.0)).unwrap();
        assert!(pts.len() >= 40, "{}", pts.len());
        assert!(pts.iter().all(|p| ellipse[0].eval(p).abs() < 1e-9));
        let empty = polys(&["x", "y"], &["x^2 + y^2 + 1"]);
        assert!(sample_variety(&empty, &SolverConfig::cube(2, 2.0))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn ellipse_pairs() {
        let f = polys(&["x", "y"], &["x^2 + y^2/2 - 1"]);
        let report = find_bottlenecks(&f, &SolverConfig::cube(2, 2.0)).unwrap();
        assert!(report.possibly_incomplete);
        assert_eq!(report.pairs.len(), 2, "{}", format_table(&report));
        assert!(report.pairs.iter().all(|p| p.isolated));
        let (narrow, b) = narrowest_bottleneck(&report.pairs).unwrap();
        assert!((narrow.separation - 2.0).abs() < 1e-9 && (b - 1.0).abs() < 1e-9);
        assert!((narrow.x[0] + 1.0).abs() < 1e-8 && (narrow.y[0] - 1.0).abs() < 1e-8);
        let again = find_bottlenecks(&f, &SolverConfig::cube(2, 2.0)).unwrap();
        assert_eq!(report, again);
    }

    #[test]
    fn no_pairs_error() {
        assert!(matches!(
            narrowest_bottleneck(&[]),
            Err(SolverError::NoPairs)
        ));
    }
}
