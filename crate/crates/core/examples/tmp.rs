use bottleneck::{poly::Poly, solver::*, system::parse_poly};
fn polys(vars: &[&str], src: &[&str]) -> Vec<Poly> {
    let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    src.iter()
        .enumerate()
        .map(|(i, s)| parse_poly(s, &names, i + 1).unwrap())
        .collect()
}
fn run(name: &str, f: &[Poly], c: SolverConfig) {
    let t = std::time::Instant::now();
    let r = find_bottlenecks(f, &c).unwrap();
    let iso = r.isolated().count();
    println!(
        "{name}: pairs={} isolated={} stats={:?} [{:?}]",
        r.pairs.len(),
        iso,
        r.stats,
        t.elapsed()
    );
    if r.pairs.len() < 30 {
        print!("{}", format_table(&r));
    }
}
fn main() {
    let d: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse().unwrap())
        .unwrap_or(20);
    let mk = |n, r: f64| {
        let mut c = SolverConfig::cube(n, r);
        c.density = d;
        c
    };
    run(
        "ellipsoid",
        &polys(&["x", "y", "z"], &["36x^2+9y^2+4z^2-36"]),
        mk(3, 3.5),
    );
    run(
        "spheroid",
        &polys(&["x", "y", "z"], &["4x^2+y^2+z^2-4"]),
        mk(3, 2.5),
    );
    run(
        "quartic",
        &polys(&["x", "y"], &["x^4+y^4+1-4y-x^2y^2-4x^2-x-2y^2"]),
        mk(2, 3.5),
    );
    run(
        "space",
        &polys(&["x", "y", "z"], &["x^3-3x*y^2-z", "x^2+y^2+3z^2-1"]),
        mk(3, 1.2),
    );
    run(
        "trott",
        &polys(&["x", "y"], &["144(x^4+y^4)-225(x^2+y^2)+350x^2y^2+81"]),
        mk(2, 1.2),
    );
}
