use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use bottleneck::bnd::{ambient_stability, bnd_affine, bnd_projective, cached_b, epsilon_terms};
use bottleneck::poly::Poly;
use bottleneck::profiles::{ci_profile, ProfileRecord, VarietySpec};
use bottleneck::regression::run_all;
use bottleneck::solver::{
    find_bottlenecks, format_table, narrowest_bottleneck, plot_data, sample_variety, SolverConfig,
};
use bottleneck::system::{
    build_lagrange_system, build_minor_system, random_gamma, Homotopy, PolySystem,
};
use clap::{Parser, Subcommand, ValueEnum};
use num::{BigInt, ToPrimitive};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "bnd",
    version,
    about = "Bottleneck degrees and real bottlenecks of algebraic varieties"
)]
struct Cli {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the correction polynomial B_{m,n} in h and the polar classes.
    Formula {
        #[arg(long)]
        dim: u32,
        #[arg(long)]
        ambient: u32,
        /// Also compare B_{m,n'} for n' from m+1 up to this ambient dimension.
        #[arg(long)]
        stability: Option<u32>,
    },
    /// Bottleneck degree of a complete intersection (or of a manual profile).
    Bnd {
        #[arg(long)]
        ambient: Option<u32>,
        #[arg(long, value_delimiter = ',')]
        degrees: Vec<u32>,
        /// Count bottlenecks of the affine variety in C^n instead of its closure.
        #[arg(long)]
        affine: bool,
        /// Assert the variety is smooth and in general position (echoed, not checked).
        #[arg(long)]
        general: bool,
        /// JSON profile {ambient, degrees, m, fundamental_degree, polar_degrees}.
        #[arg(long, conflicts_with_all = ["degrees", "affine"])]
        profile: Option<PathBuf>,
    },
    /// Euclidean distance degree (eps_0) of a complete intersection.
    Edd {
        #[arg(long)]
        ambient: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        degrees: Vec<u32>,
    },
    /// Write the bottleneck system of the equations in a file.
    System {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "minor")]
        form: Form,
        /// Dimension of the variety (default: variables minus equations).
        #[arg(long)]
        dim: Option<usize>,
        /// Start system for a parameter homotopy (lagrange form only).
        #[arg(long)]
        start: Option<PathBuf>,
        /// Blending constant, e.g. 0.731; drawn from --seed when absent.
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Search for real bottleneck pairs by multistart Newton iteration.
    Solve {
        #[arg(long)]
        input: PathBuf,
        /// Search box half-width (cube [-r, r]^n).
        #[arg(long, default_value_t = 2.0)]
        r#box: f64,
        /// Explicit box, e.g. -2:2,-1:3.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            conflicts_with = "box"
        )]
        bounds: Vec<String>,
        #[arg(long, default_value_t = 20)]
        density: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 150)]
        max_samples: usize,
        /// Write sample points and pair segments for external plotting.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Run the reference-value table.
    Check {
        /// Skip the numeric solver rows.
        #[arg(long)]
        fast: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Minor,
    Lagrange,
}

enum Failure {
    Usage(String),
    Compute(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Compute(e)
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn int_value(v: &BigInt) -> Value {
    match v.to_i64() {
        Some(i) => json!(i),
        None => json!(v.to_string()),
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("json"));
}

fn spec_from(ambient: Option<u32>, degrees: &[u32], affine: bool) -> Result<VarietySpec, Failure> {
    let Some(ambient) = ambient else {
        return usage("--ambient is required");
    };
    if degrees.is_empty() {
        return usage("--degrees is required");
    }
    let spec = if affine {
        VarietySpec::affine(ambient, degrees)
    } else {
        VarietySpec::projective(ambient, degrees)
    };
    match spec {
        Ok(s) if s.dim() >= 1 => Ok(s),
        Ok(s) => usage(format!(
            "{} equations in dimension {ambient} leave a variety of dimension {}",
            degrees.len(),
            s.dim()
        )),
        Err(e) => usage(e.to_string()),
    }
}

fn read_equations(path: &Path) -> Result<PolySystem, Failure> {
    let sys = PolySystem::read_from(path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    if sys.meta.is_some() {
        return usage(format!(
            "{} is a generated system; pass the defining equations",
            path.display()
        ));
    }
    if sys.polynomials.is_empty() {
        return usage(format!("{} has no equations", path.display()));
    }
    Ok(sys)
}

fn formula(dim: u32, ambient: u32, stability: Option<u32>, json: bool) -> Result<(), Failure> {
    if dim == 0 || dim >= ambient {
        return usage(format!(
            "need 0 < dim < ambient, got dim={dim}, ambient={ambient}"
        ));
    }
    let b = cached_b(dim, ambient).context("formula pipeline")?;
    let report = match stability {
        Some(top) if top <= dim => return usage("--stability must exceed --dim"),
        Some(top) => Some(ambient_stability(dim, (dim + 1)..=top).context("stability")?),
        None => None,
    };
    if json {
        let mut v = json!({ "m": dim, "n": ambient, "formula": b.to_string() });
        if let Some(r) = &report {
            v["stability"] = json!({
                "stable": r.stable,
                "formulas": r.formulas.iter().map(|f| json!({"n": f.n, "formula": f.to_string()})).collect::<Vec<_>>(),
            });
        }
        print_json(&v);
    } else {
        println!("{b}");
        if let Some(r) = &report {
            for f in &r.formulas {
                println!("n={:<3} {f}", f.n);
            }
            println!(
                "{}",
                if r.stable {
                    "stable across range"
                } else {
                    "not constant across range"
                }
            );
        }
    }
    Ok(())
}

fn bnd(
    ambient: Option<u32>,
    degrees: &[u32],
    affine: bool,
    general: bool,
    profile: Option<&Path>,
    json: bool,
) -> Result<(), Failure> {
    let assumption = if general {
        "asserted by user: smooth and in general position"
    } else {
        "not asserted: the count is exact only for smooth varieties in general position"
    };
    if let Some(path) = profile {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let record: ProfileRecord = serde_json::from_str(&text)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let p = record
            .to_profile()
            .map_err(|e| Failure::Usage(e.to_string()))?;
        if p.m == 0 || p.m >= record.ambient {
            return usage("profile needs 0 < m < ambient");
        }
        let b = cached_b(p.m, record.ambient).context("formula pipeline")?;
        let value = bnd_projective(&b, &p).context("evaluation")?;
        if json {
            print_json(
                &json!({ "bnd": int_value(&value), "m": p.m, "n": record.ambient, "general_position": assumption }),
            );
        } else {
            println!("{value}");
            eprintln!("general position: {assumption}");
        }
        return Ok(());
    }
    let spec = spec_from(ambient, degrees, affine)?;
    if affine {
        let r = bnd_affine(&spec).context("affine bottleneck degree")?;
        if json {
            print_json(&json!({
                "bnd": int_value(&r.value),
                "closure": int_value(&r.closure),
                "at_infinity": int_value(&r.at_infinity),
                "point_section": r.point_section,
                "general_position": assumption,
            }));
        } else {
            println!("{}", r.value);
            eprintln!(
                "closure {} minus section at infinity {}{}",
                r.closure,
                r.at_infinity,
                if r.point_section {
                    " (finite point set, d(d-1))"
                } else {
                    ""
                }
            );
            eprintln!("general position: {assumption}");
        }
    } else {
        let p = ci_profile(&spec).context("profile")?;
        let b = cached_b(p.m, spec.ambient).context("formula pipeline")?;
        let value = bnd_projective(&b, &p).context("evaluation")?;
        if json {
            print_json(&json!({ "bnd": int_value(&value), "general_position": assumption }));
        } else {
            println!("{value}");
            eprintln!("general position: {assumption}");
        }
    }
    Ok(())
}

fn edd(ambient: u32, degrees: &[u32], json: bool) -> Result<(), Failure> {
    let spec = spec_from(Some(ambient), degrees, false)?;
    let p = ci_profile(&spec).context("profile")?;
    let eps = epsilon_terms(p.m, ambient, &p.polar_degrees().context("polar degrees")?)
        .context("epsilon")?;
    let value = &eps.values[0];
    if json {
        print_json(&json!({ "edd": int_value(value) }));
    } else {
        println!("{value}");
    }
    Ok(())
}

fn parse_gamma(src: &str) -> Result<num::BigRational, Failure> {
    let names: Vec<String> = Vec::new();
    let p = bottleneck::system::parse_poly(src, &names, 1)
        .map_err(|e| Failure::Usage(format!("--gamma: {e}")))?;
    let c = p.terms().next().map(|(_, c)| c.clone()).unwrap_or_default();
    Ok(c)
}

#[allow(clippy::too_many_arguments)]
fn system(
    input: &Path,
    form: Form,
    dim: Option<usize>,
    start: Option<&Path>,
    gamma: Option<&str>,
    seed: u64,
    output: Option<&Path>,
    json: bool,
) -> Result<(), Failure> {
    let sys = read_equations(input)?;
    let n = sys.nvars();
    let k = sys.polynomials.len();
    if k > n {
        return usage(format!("{k} equations in {n} variables"));
    }
    let m = dim.unwrap_or(n - k);
    if m == 0 || m >= n {
        return usage(format!("need 0 < dim < {n}, got {m}"));
    }
    let built = match form {
        Form::Minor => {
            if start.is_some() {
                return usage("--start applies to the lagrange form");
            }
            build_minor_system(&sys.polynomials, m)
        }
        Form::Lagrange => {
            let homotopy = match start {
                None => None,
                Some(path) => {
                    let g = read_equations(path)?;
                    if g.variables != sys.variables {
                        return usage("start system must declare the same variables");
                    }
                    let gamma = match gamma {
                        Some(s) => parse_gamma(s)?,
                        None => random_gamma(seed),
                    };
                    Some(Homotopy {
                        start: g.polynomials,
                        gamma,
                    })
                }
            };
            build_lagrange_system(&sys.polynomials, m, homotopy.as_ref())
        }
    }
    .map_err(|e| Failure::Usage(e.to_string()))?;
    let text = built.emit();
    match output {
        Some(path) => {
            std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            if json {
                print_json(&json!({
                    "output": path.display().to_string(),
                    "variables": built.variables,
                    "equations": built.polynomials.len(),
                }));
            } else {
                println!(
                    "wrote {} equations in {} variables to {}",
                    built.polynomials.len(),
                    built.nvars(),
                    path.display()
                );
            }
        }
        None if json => {
            let eqs: Vec<String> = built
                .polynomials
                .iter()
                .map(|p| p.to_text(&built.variables))
                .collect();
            print_json(&json!({ "variables": built.variables, "equations": eqs }));
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_bounds(specs: &[String]) -> Result<Vec<(f64, f64)>, Failure> {
    specs
        .iter()
        .map(|s| {
            let (lo, hi) = s
                .split_once(':')
                .ok_or_else(|| Failure::Usage(format!("bad interval '{s}', expected lo:hi")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Failure::Usage(format!("bad number in '{s}'")))
            };
            Ok((parse(lo)?, parse(hi)?))
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn solve(
    input: &Path,
    half_width: f64,
    bounds: &[String],
    density: usize,
    seed: u64,
    max_samples: usize,
    plot: Option<&Path>,
    json: bool,
) -> Result<(), Failure> {
    let sys = read_equations(input)?;
    let n = sys.nvars();
    let mut config = if bounds.is_empty() {
        SolverConfig::cube(n, half_width)
    } else {
        let b = parse_bounds(bounds)?;
        if b.len() != n {
            return usage(format!(
                "--bounds has {} intervals for {n} variables",
                b.len()
            ));
        }
        SolverConfig::new(b)
    };
    config.density = density;
    config.seed = seed;
    config.max_samples = max_samples;
    config
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let k = sys.polynomials.len();
    if !(1..=2).contains(&k) || k >= n {
        return usage(format!(
            "solve supports 1 or 2 equations in more variables (got {k} in {n})"
        ));
    }
    let report = find_bottlenecks(&sys.polynomials, &config).context("solver")?;
    let bound = complex_bound(&sys.polynomials, n);
    let narrow = narrowest_bottleneck(&report.pairs).ok();
    if let Some(path) = plot {
        let samples = sample_variety(&sys.polynomials, &config).context("sampling")?;
        std::fs::write(path, plot_data(&samples, &report))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if json {
        let pairs: Vec<Value> = report
            .pairs
            .iter()
            .map(|p| json!({ "x": p.x, "y": p.y, "separation": p.separation, "residual": p.residual, "isolated": p.isolated }))
            .collect();
        print_json(&json!({
            "variables": sys.variables,
            "pairs": pairs,
            "narrowest": narrow.map(|(p, b)| json!({ "x": p.x, "y": p.y, "separation": p.separation, "b": b })),
            "complex_bound": bound.as_ref().map(int_value),
            "stats": report.stats,
            "possibly_incomplete": report.possibly_incomplete,
        }));
    } else {
        print!("{}", format_table(&report));
        println!(
            "{} pairs ({} isolated) from {} starts; search is heuristic and may be incomplete",
            report.pairs.len(),
            report.isolated().count(),
            report.stats.starts
        );
        if let Some(b) = &bound {
            println!("complex bound for a general variety of these degrees: {b} pairs");
        }
        if let Some((p, b)) = narrow {
            println!(
                "narrowest isolated bottleneck: separation {:.10}, b = {:.10}",
                p.separation, b
            );
        }
    }
    Ok(())
}

/// Half the affine bottleneck degree of a general complete intersection with the same degrees.
fn complex_bound(fs: &[Poly], n: usize) -> Option<BigInt> {
    let degrees: Vec<u32> = fs.iter().map(|f| f.total_degree()).collect();
    let spec = VarietySpec::affine(n as u32, &degrees).ok()?;
    (spec.dim() >= 1).then_some(())?;
    bnd_affine(&spec).ok().map(|r| r.value / BigInt::from(2))
}

fn check(fast: bool, json: bool) -> Result<bool, Failure> {
    let rows = run_all(fast);
    let ok = rows.iter().all(|r| r.passed);
    if json {
        print_json(&json!({ "passed": ok, "rows": rows }));
    } else {
        for r in &rows {
            println!(
                "{:>2} {:<30} {}  {}",
                r.id,
                r.name,
                if r.passed { "PASS" } else { "FAIL" },
                r.detail
            );
        }
        if fast {
            println!("solver rows skipped (--fast)");
        }
    }
    Ok(ok)
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let json = cli.json;
    match cli.command {
        Command::Formula {
            dim,
            ambient,
            stability,
        } => formula(dim, ambient, stability, json)?,
        Command::Bnd {
            ambient,
            degrees,
            affine,
            general,
            profile,
        } => bnd(ambient, &degrees, affine, general, profile.as_deref(), json)?,
        Command::Edd { ambient, degrees } => edd(ambient, &degrees, json)?,
        Command::System {
            input,
            form,
            dim,
            start,
            gamma,
            seed,
            output,
        } => system(
            &input,
            form,
            dim,
            start.as_deref(),
            gamma.as_deref(),
            seed,
            output.as_deref(),
            json,
        )?,
        Command::Solve {
            input,
            r#box,
            bounds,
            density,
            seed,
            max_samples,
            plot,
        } => solve(
            &input,
            r#box,
            &bounds,
            density,
            seed,
            max_samples,
            plot.as_deref(),
            json,
        )?,
        Command::Check { fast } => return check(fast, json),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
