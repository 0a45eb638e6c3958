//! Reference-value table: the acceptance criteria as runnable rows.
//!
//! Each row compares the engine against an independent closed form, a
//! printed value, or a second computation path.

use num::BigInt;
use serde::Serialize;

use crate::bnd::{
    ambient_stability, bnd_affine, bnd_of_spec, cached_b, epsilon_oracle, epsilon_terms,
};
use crate::poly::Poly;
use crate::profiles::{ci_profile, VarietySpec};
use crate::ring::ClassPoly;
use crate::schubert::{
    generic_conormal_ring, pullback_f, schubert_pullback_direct, schubert_representative,
    SchubertIndex,
};
use crate::solver::{find_bottlenecks, BottleneckPair, SolveReport, SolverConfig};
use crate::system::{build_minor_system, parse_poly, proportional, PolySystem};

#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// `(id, name, uses the numeric solver)`.
pub const CRITERIA: [(u8, &str, bool); 10] = [
    (1, "formula regression", false),
    (2, "ambient stability", false),
    (3, "plane curves", false),
    (4, "complete-intersection curves", false),
    (5, "surfaces in C^3", false),
    (6, "epsilon oracle", false),
    (7, "schubert oracle", false),
    (8, "solver analytic anchors", true),
    (9, "solver reference anchors", true),
    (10, "system generator fidelity", false),
];

pub fn run_criterion(id: u8) -> CheckRow {
    let name = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map_or("unknown", |c| c.1);
    let result = match id {
        1 => formulas(),
        2 => stability(),
        3 => plane_curves(),
        4 => ci_curves(),
        5 => surfaces(),
        6 => epsilon_oracle_rows(),
        7 => schubert_oracle(),
        8 => analytic_anchors(),
        9 => reference_anchors(),
        10 => system_fidelity(),
        _ => Err(format!("no criterion {id}")),
    };
    match result {
        Ok(detail) => CheckRow {
            id,
            name,
            passed: true,
            detail,
        },
        Err(detail) => CheckRow {
            id,
            name,
            passed: false,
            detail,
        },
    }
}

/// All rows in order; `fast` skips the solver rows.
pub fn run_all(fast: bool) -> Vec<CheckRow> {
    CRITERIA
        .iter()
        .filter(|c| !(fast && c.2))
        .map(|c| run_criterion(c.0))
        .collect()
}

type RowResult = Result<String, String>;

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

fn formulas() -> RowResult {
    let expected = [
        (1, 3, "2*h + 5*p1"),
        (2, 5, "3*h^2 + 6*h*p1 + 12*p1^2 + p2"),
        (
            3,
            7,
            "4*h^3 + 11*h^2*p1 + 4*h*p1^2 + 24*p1^3 + 2*h*p2 - 12*p1*p2 + 17*p3",
        ),
    ];
    for (m, n, want) in expected {
        let got = cached_b(m, n).map_err(e)?.to_string();
        if got != want {
            return Err(format!("B_{{{m},{n}}} = {got}, expected {want}"));
        }
    }
    Ok("B_{1,3}, B_{2,5}, B_{3,7} verbatim".into())
}

fn stability() -> RowResult {
    let mut notes = Vec::new();
    let mut failed = false;
    for (m, lo, hi) in [(1u32, 3u32, 12u32), (2, 4, 12), (3, 5, 10)] {
        let report = ambient_stability(m, lo..=hi).map_err(e)?;
        if report.stable {
            notes.push(format!("B_{{{m},n}} identical for n={lo}..{hi}"));
            continue;
        }
        failed = true;
        // the bottleneck degree itself, compared on sample profiles against n = 2m+1
        let reference = cached_b(m, 2 * m + 1).map_err(e)?;
        let mut values_agree = true;
        for n in lo..=hi {
            for d in 2..=4u32 {
                let degrees = vec![d; (n - m) as usize];
                let profile =
                    ci_profile(&VarietySpec::projective(n, &degrees).map_err(e)?).map_err(e)?;
                let own =
                    bnd_of_spec(&VarietySpec::projective(n, &degrees).map_err(e)?).map_err(e)?;
                let via_reference = {
                    let eps = epsilon_terms(m, reference.n, &profile.polar_degrees().map_err(e)?)
                        .map_err(e)?;
                    eps.sum_of_squares() - profile.evaluate_class(&reference.poly).map_err(e)?
                };
                values_agree &= own == via_reference;
            }
        }
        let outliers: Vec<String> = report
            .formulas
            .iter()
            .filter(|f| report.outliers().contains(&f.n))
            .map(|f| format!("B_{{{m},{}}} = {f}", f.n))
            .collect();
        notes.push(format!(
            "B_{{{m},n}} not constant on n={lo}..{hi}: {} differ from {reference}; constant from n={}; bottleneck degrees on CI profiles {}",
            outliers.join(", "),
            2 * m + 1,
            if values_agree { "agree" } else { "DISAGREE" }
        ));
    }
    let detail = notes.join("; ");
    if failed {
        Err(detail)
    } else {
        Ok(detail)
    }
}

fn plane_curves() -> RowResult {
    for d in 2..=12i64 {
        let proj = bnd_of_spec(&VarietySpec::projective(2, &[d as u32]).map_err(e)?).map_err(e)?;
        let aff = bnd_affine(&VarietySpec::affine(2, &[d as u32]).map_err(e)?)
            .map_err(e)?
            .value;
        let want_proj = big(d.pow(4) - 4 * d * d + 3 * d);
        let want_aff = big(d.pow(4) - 5 * d * d + 4 * d);
        if proj != want_proj || aff != want_aff {
            return Err(format!(
                "d={d}: projective {proj} (want {want_proj}), affine {aff} (want {want_aff})"
            ));
        }
    }
    Ok("d=2..12 closed forms; conic 4, Trott quartic 192".into())
}

fn ci_curve_closed_form(a: i64, b: i64) -> BigInt {
    let p = |x: i64, k: u32| x.pow(k);
    big(
        p(a, 4) * p(b, 2) + 2 * p(a, 3) * p(b, 3) + p(a, 2) * p(b, 4)
            - 2 * p(a, 3) * p(b, 2)
            - 2 * p(a, 2) * p(b, 3)
            + p(a, 2) * p(b, 2)
            - 5 * p(a, 2) * b
            - 5 * a * p(b, 2)
            + 9 * a * b,
    )
}

fn ci_curves() -> RowResult {
    for a in 2..=5u32 {
        for b in 2..=5u32 {
            let got = bnd_affine(&VarietySpec::affine(3, &[a, b]).map_err(e)?)
                .map_err(e)?
                .value;
            let want = ci_curve_closed_form(a as i64, b as i64);
            if got != want {
                return Err(format!("({a},{b}): {got}, closed form {want}"));
            }
        }
    }
    let anchor = bnd_affine(&VarietySpec::affine(3, &[2, 3]).map_err(e)?)
        .map_err(e)?
        .value;
    if anchor != big(480) {
        return Err(format!("(2,3) gives {anchor}, expected 480"));
    }
    Ok("2 <= d1,d2 <= 5 closed form; (2,3) -> 480".into())
}

fn surfaces() -> RowResult {
    for d in 2..=8i64 {
        let got = bnd_affine(&VarietySpec::affine(3, &[d as u32]).map_err(e)?)
            .map_err(e)?
            .value;
        let want =
            big(d.pow(6) - 2 * d.pow(5) + 3 * d.pow(4) - 15 * d.pow(3) + 26 * d * d - 13 * d);
        if got != want {
            return Err(format!("d={d}: {got}, closed form {want}"));
        }
    }
    Ok("d=2..8 closed form; quadric 6, quartic 2220".into())
}

fn epsilon_oracle_rows() -> RowResult {
    let mut specs = Vec::new();
    for d in 2..=12 {
        specs.push((2u32, vec![d]));
    }
    for a in 2..=5 {
        for b in 2..=5 {
            specs.push((3, vec![a, b]));
        }
    }
    for d in 2..=8 {
        specs.push((3, vec![d]));
    }
    let count = specs.len();
    for (n, degrees) in specs {
        let profile = ci_profile(&VarietySpec::projective(n, &degrees).map_err(e)?).map_err(e)?;
        let terms = epsilon_terms(profile.m, n, &profile.polar_degrees().map_err(e)?).map_err(e)?;
        let oracle = epsilon_oracle(profile.m, n, &profile).map_err(e)?;
        if terms != oracle {
            return Err(format!(
                "P^{n} {degrees:?}: combinatorial {:?}, conormal {:?}",
                terms.values, oracle.values
            ));
        }
    }
    Ok(format!("{count} profiles agree"))
}

fn schubert_oracle() -> RowResult {
    let mut checked = 0;
    for n in 3..=12u32 {
        let cx = generic_conormal_ring(2 * (n - 1));
        for a in 0..=10.min(n - 1) {
            for b in 0..=a {
                let idx = SchubertIndex::new(a, b, n).map_err(e)?;
                let via_ring: ClassPoly =
                    pullback_f(&schubert_representative(idx, n).map_err(e)?, &cx).map_err(e)?;
                let direct = schubert_pullback_direct(idx, &cx).map_err(e)?;
                if via_ring != direct {
                    return Err(format!(
                        "sigma_{idx} in Gr(2,{}): {via_ring} vs {direct}",
                        n + 1
                    ));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} classes agree"))
}

fn polys(vars: &[&str], src: &[&str]) -> Result<Vec<Poly>, String> {
    let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    src.iter()
        .enumerate()
        .map(|(i, s)| parse_poly(s, &names, i + 1).map_err(e))
        .collect()
}

fn near(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(u, v)| (u - v).abs() <= tol)
}

/// Pair matches `{p, q}` as an unordered pair.
fn matches_pair(pair: &BottleneckPair, p: &[f64], q: &[f64], tol: f64) -> bool {
    (near(&pair.x, p, tol) && near(&pair.y, q, tol))
        || (near(&pair.x, q, tol) && near(&pair.y, p, tol))
}

fn check_count_bound(report: &SolveReport, n: u32, degrees: &[u32]) -> Result<(), String> {
    let bound = bnd_affine(&VarietySpec::affine(n, degrees).map_err(e)?)
        .map_err(e)?
        .value
        / big(2);
    if BigInt::from(report.pairs.len()) > bound {
        return Err(format!(
            "{} real pairs exceed the complex bound {bound}",
            report.pairs.len()
        ));
    }
    Ok(())
}

fn analytic_anchors() -> RowResult {
    let s2 = 2f64.sqrt();
    let ellipse = polys(&["x", "y"], &["x^2 + y^2/2 - 1"])?;
    let r = find_bottlenecks(&ellipse, &SolverConfig::cube(2, 2.0)).map_err(e)?;
    let expected: [(&[f64], &[f64]); 2] = [(&[1.0, 0.0], &[-1.0, 0.0]), (&[0.0, s2], &[0.0, -s2])];
    if r.pairs.len() != 2
        || !expected.iter().all(|(p, q)| {
            r.pairs
                .iter()
                .any(|x| x.isolated && matches_pair(x, p, q, 1e-8))
        })
    {
        return Err(format!(
            "ellipse: {} pairs, expected the two axis pairs",
            r.pairs.len()
        ));
    }
    check_count_bound(&r, 2, &[2])?;

    let ellipsoid = polys(&["x", "y", "z"], &["36x^2 + 9y^2 + 4z^2 - 36"])?;
    let r = find_bottlenecks(&ellipsoid, &SolverConfig::cube(3, 3.5)).map_err(e)?;
    let axes: [(&[f64], &[f64]); 3] = [
        (&[1.0, 0.0, 0.0], &[-1.0, 0.0, 0.0]),
        (&[0.0, 2.0, 0.0], &[0.0, -2.0, 0.0]),
        (&[0.0, 0.0, 3.0], &[0.0, 0.0, -3.0]),
    ];
    if r.pairs.len() != 3
        || !axes.iter().all(|(p, q)| {
            r.pairs
                .iter()
                .any(|x| x.isolated && matches_pair(x, p, q, 1e-8))
        })
    {
        return Err(format!(
            "ellipsoid: {} pairs, expected the three axis pairs",
            r.pairs.len()
        ));
    }
    check_count_bound(&r, 3, &[2])?;

    let spheroid = polys(&["x", "y", "z"], &["4x^2 + y^2 + z^2 - 4"])?;
    let r = find_bottlenecks(&spheroid, &SolverConfig::cube(3, 2.5)).map_err(e)?;
    let isolated: Vec<&BottleneckPair> = r.isolated().collect();
    let flagged = r.pairs.len() - isolated.len();
    if isolated.len() != 1
        || !matches_pair(isolated[0], &[1.0, 0.0, 0.0], &[-1.0, 0.0, 0.0], 1e-8)
        || flagged == 0
    {
        return Err(format!(
            "spheroid: {} isolated, {flagged} non-isolated",
            isolated.len()
        ));
    }
    Ok(format!(
        "ellipse 2, ellipsoid 3, spheroid 1 isolated + {flagged} flagged"
    ))
}

/// Runs the solver, raising the density while fewer than `target` pairs are found.
fn solve_escalating(
    fs: &[Poly],
    base: SolverConfig,
    target: usize,
) -> Result<(SolveReport, usize), String> {
    let mut last = None;
    for density in [base.density, base.density * 3 / 2, base.density * 2] {
        let mut config = base.clone();
        config.density = density;
        config.max_samples = base.max_samples * density / base.density;
        let r = find_bottlenecks(fs, &config).map_err(e)?;
        if r.pairs.len() >= target {
            return Ok((r, density));
        }
        last = Some((r, density));
    }
    Ok(last.expect("at least one run"))
}

fn reference_anchors() -> RowResult {
    let quartic = polys(
        &["x", "y"],
        &["x^4 + y^4 + 1 - 4y - x^2y^2 - 4x^2 - x - 2y^2"],
    )?;
    let (r, dq) = solve_escalating(&quartic, SolverConfig::cube(2, 3.5), 22)?;
    check_count_bound(&r, 2, &[4])?;
    if r.pairs.len() != 22 {
        return Err(format!(
            "quartic curve: {} pairs at density {dq}, expected 22",
            r.pairs.len()
        ));
    }

    let space = polys(
        &["x", "y", "z"],
        &["x^3 - 3x*y^2 - z", "x^2 + y^2 + 3z^2 - 1"],
    )?;
    let (r, ds) = solve_escalating(&space, SolverConfig::cube(3, 1.2), 24)?;
    check_count_bound(&r, 3, &[3, 2])?;
    if r.pairs.len() != 24 {
        return Err(format!(
            "space curve: {} pairs at density {ds}, expected 24",
            r.pairs.len()
        ));
    }

    let trott = polys(
        &["x", "y"],
        &["144(x^4 + y^4) - 225(x^2 + y^2) + 350x^2y^2 + 81"],
    )?;
    let r = find_bottlenecks(&trott, &SolverConfig::cube(2, 1.2)).map_err(e)?;
    check_count_bound(&r, 2, &[4])?;
    let roots = [-1.0, -0.75, 0.75, 1.0];
    let mut missing = 0;
    for (i, &a) in roots.iter().enumerate() {
        for &b in &roots[i + 1..] {
            let on_x = r
                .pairs
                .iter()
                .any(|p| matches_pair(p, &[a, 0.0], &[b, 0.0], 1e-8));
            let on_y = r
                .pairs
                .iter()
                .any(|p| matches_pair(p, &[0.0, a], &[0.0, b], 1e-8));
            missing += usize::from(!on_x) + usize::from(!on_y);
        }
    }
    if missing > 0 || r.pairs.len() > 96 {
        return Err(format!(
            "Trott: {missing} axis pairs missing, {} total",
            r.pairs.len()
        ));
    }
    Ok(format!(
        "quartic 22 (density {dq}), space curve 24 (density {ds}), Trott 12 axis pairs of {}",
        r.pairs.len()
    ))
}

fn system_fidelity() -> RowResult {
    let trott = polys(
        &["x1", "x2"],
        &["144(x1^4+x2^4)-225(x1^2+x2^2)+350x1^2x2^2+81"],
    )?;
    let sys = build_minor_system(&trott, 1).map_err(e)?;
    let displayed = polys(
        &["x1", "x2", "y1", "y2"],
        &[
            "144(x1^4+x2^4)-225(x1^2+x2^2)+350x1^2x2^2+81",
            "144(y1^4+y2^4)-225(y1^2+y2^2)+350y1^2y2^2+81",
            "x1(-576x1^2-700x2^2+450)(y2-x2) - x2(576x2^2+700x1^2-450)(x1-y1)",
            "y1(-576y1^2-700y2^2+450)(x2-y2) - y2(576y2^2+700y1^2-450)(y1-x1)",
        ],
    )?;
    if sys.polynomials.len() != displayed.len() {
        return Err(format!("{} equations, expected 4", sys.polynomials.len()));
    }
    for (i, want) in displayed.iter().enumerate() {
        if !sys.polynomials.iter().any(|p| proportional(p, want)) {
            return Err(format!("displayed equation {} not produced", i + 1));
        }
    }
    let text = sys.emit();
    let back = PolySystem::parse(&text).map_err(e)?;
    if back != sys || back.emit() != text {
        return Err("emit/parse roundtrip is not the identity".into());
    }
    Ok("Trott minor system = displayed equations; roundtrip identical".into())
}
