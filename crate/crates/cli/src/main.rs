//! Command-line interface: algebra/metric file IO, the example catalog, and
//! the classify → decide → construct → certify pipelines.
//!
//! Exit codes: 0 success / existence certified, 2 nonexistence certified,
//! 3 unknown, 4 input error.

mod format;
mod pipeline;

use clap::{Parser, Subcommand, ValueEnum};
use negricci::algebra::LieAlgebra;
use negricci::catalog;
use negricci::decide::Verdict;
use negricci::optimize::{optimize_metric, OptimizerConfig};
use negricci::ricci::{self, MetricLieAlgebra};
use pipeline::{PipelineMode, PipelineReport};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_OK: u8 = 0;
const EXIT_NOT_EXISTS: u8 = 2;
const EXIT_UNKNOWN: u8 = 3;
const EXIT_INPUT: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Parser)]
#[command(
    name = "negricci",
    about = "Ricci curvature of solvable Lie algebras: decide and construct metrics of negative Ricci curvature",
    version
)]
struct Cli {
    /// Output mode; `structured` emits JSON and is the stable interface.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for randomized subroutines.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an algebra and report dims, Jacobi defect, solvability,
    /// unimodularity and the nilradical classification.
    Check {
        /// Algebra file path, or a catalog name such as `heisenberg:2`.
        input: String,
    },
    /// Ricci operator of an algebra with a metric: matrix, eigenvalues,
    /// scalar curvature and definiteness.
    Ricci {
        /// Algebra file path or catalog name.
        algebra: String,
        /// Metric file path; defaults to the identity metric.
        metric: Option<PathBuf>,
    },
    /// Decide whether a metric of negative Ricci curvature exists.
    Decide {
        input: String,
    },
    /// Decide and, when a metric exists, construct and verify a certificate.
    Construct {
        input: String,
        /// Write the certificate document to this path (stdout otherwise).
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Upper bound on the pullback parameter sweep.
        #[arg(long, default_value_t = 96)]
        smax: usize,
    },
    /// Numerically minimize the largest Ricci eigenvalue over inner products.
    Optimize {
        input: String,
        /// Total objective-evaluation budget.
        #[arg(long, default_value_t = 20_000)]
        budget: usize,
        /// Number of seeded restarts.
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        /// Certification threshold on the best objective.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// List the built-in example catalog.
    Catalog,
    /// Run every catalog entry through the pipeline and compare against the
    /// expected verdicts.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn load_algebra(input: &str) -> Result<LieAlgebra, String> {
    let path = PathBuf::from(input);
    if path.exists() {
        let src = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        return format::parse_algebra(&src).map_err(|e| format!("{}: {e}", path.display()));
    }
    catalog::build(input).map_err(|e| {
        format!("`{input}` is neither an existing file nor a catalog name ({e})")
    })
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Check { input } => cmd_check(&input, cli.format),
        Command::Ricci { algebra, metric } => cmd_ricci(&algebra, metric.as_deref(), cli.format),
        Command::Decide { input } => cmd_decide(&input, cli.format),
        Command::Construct { input, out, smax } => {
            cmd_construct(&input, out.as_deref(), smax, cli.format)
        }
        Command::Optimize { input, budget, restarts, tol } => {
            cmd_optimize(&input, budget, restarts, tol, cli.seed, cli.format)
        }
        Command::Catalog => cmd_catalog(cli.format),
        Command::Selftest => cmd_selftest(cli.format),
    }
}

fn cmd_check(input: &str, fmt: Format) -> Result<u8, String> {
    let alg = load_algebra(input)?;
    let jacobi = alg.jacobi_defect();
    let solvable = alg.is_solvable();
    let unimodular = alg.is_unimodular();
    let (nil_dim, class) = if solvable {
        let nil = alg.nilradical().map_err(|e| e.to_string())?;
        let (sub, _) = alg.subalgebra(&nil).map_err(|e| e.to_string())?;
        let cls = negricci::classify::classify_nilradical(&sub).map_err(|e| e.to_string())?;
        (nil.dim(), cls.describe())
    } else {
        (0, "not solvable".to_string())
    };
    match fmt {
        Format::Structured => println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "dim": alg.dim(),
                "jacobi_defect": jacobi,
                "solvable": solvable,
                "unimodular": unimodular,
                "nilradical_dim": nil_dim,
                "nilradical_class": class,
                "canonical": format::write_algebra(&alg),
            }))
            .unwrap()
        ),
        Format::Text => {
            println!("dim:              {}", alg.dim());
            println!("jacobi defect:    {jacobi:.3e}");
            println!("solvable:         {solvable}");
            println!("unimodular:       {unimodular}");
            println!("nilradical dim:   {nil_dim}");
            println!("nilradical class: {class}");
        }
    }
    if !solvable {
        return Ok(EXIT_UNKNOWN);
    }
    Ok(EXIT_OK)
}

fn cmd_ricci(algebra: &str, metric: Option<&std::path::Path>, fmt: Format) -> Result<u8, String> {
    let alg = load_algebra(algebra)?;
    let metric = match metric {
        Some(path) => {
            let src =
                std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            format::parse_metric(&src).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => ricci::InnerProduct::identity(alg.dim()),
    };
    if metric.dim() != alg.dim() {
        return Err(format!(
            "dimension mismatch: algebra dim {}, metric dim {}",
            alg.dim(),
            metric.dim()
        ));
    }
    let m = MetricLieAlgebra::new(alg, metric).map_err(|e| e.to_string())?;
    let ric = m.ricci_operator().map_err(|e| e.to_string())?;
    let eigs = negricci::linalg::symmetric_eigenvalues(&ric);
    let scalar = ric.trace();
    let def = ricci::definiteness(&ric, ricci::default_definiteness_tol(&ric));
    match fmt {
        Format::Structured => {
            let rows: Vec<Vec<f64>> = (0..ric.nrows())
                .map(|r| (0..ric.ncols()).map(|c| ric[(r, c)]).collect())
                .collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "ricci": rows,
                    "eigenvalues": eigs,
                    "scalar_curvature": scalar,
                    "definiteness": def.to_string(),
                }))
                .unwrap()
            );
        }
        Format::Text => {
            println!("ricci operator (orthonormal frame):");
            println!("{ric:.6}");
            println!("eigenvalues:      {eigs:?}");
            println!("scalar curvature: {scalar:.6}");
            println!("definiteness:     {def}");
        }
    }
    Ok(EXIT_OK)
}

fn render_report(rep: &PipelineReport, fmt: Format) {
    match fmt {
        Format::Structured => {
            println!("{}", serde_json::to_string_pretty(&pipeline::report_json(rep)).unwrap())
        }
        Format::Text => {
            println!("verdict:          {}", rep.verdict);
            println!("theorem:          {}", rep.theorem);
            println!("nilradical class: {}", rep.class);
            if let Some(margin) = rep.margin {
                println!("margin:           {margin:.6e}");
            }
            if let Some(w) = &rep.witness {
                println!("witness:          {w:?}");
            }
            for d in &rep.detail {
                println!("note: {d}");
            }
            if let Some(cert) = &rep.certificate {
                println!("certificate:      max Ricci eigenvalue {:.6e}", cert.max_eigenvalue);
                println!("provenance:       {}", cert.provenance);
            }
        }
    }
}

fn verdict_exit(verdict: Verdict) -> u8 {
    match verdict {
        Verdict::Exists => EXIT_OK,
        Verdict::NotExists => EXIT_NOT_EXISTS,
        Verdict::Unknown => EXIT_UNKNOWN,
    }
}

fn cmd_decide(input: &str, fmt: Format) -> Result<u8, String> {
    let alg = load_algebra(input)?;
    let rep = pipeline::run(&alg, PipelineMode::DecideOnly)?;
    render_report(&rep, fmt);
    Ok(verdict_exit(rep.verdict))
}

fn cmd_construct(
    input: &str,
    out: Option<&std::path::Path>,
    smax: usize,
    fmt: Format,
) -> Result<u8, String> {
    let alg = load_algebra(input)?;
    let rep = pipeline::run(&alg, PipelineMode::Construct { s_max: smax })?;
    if let Some(cert) = &rep.certificate {
        let doc = serde_json::to_string_pretty(&pipeline::certificate_json(cert)).unwrap();
        match out {
            Some(path) => {
                std::fs::write(path, doc).map_err(|e| format!("{}: {e}", path.display()))?;
                if fmt == Format::Text {
                    println!("certificate written to {}", path.display());
                }
            }
            None => println!("{doc}"),
        }
    }
    render_report(&rep, fmt);
    Ok(verdict_exit(rep.verdict))
}

fn cmd_optimize(
    input: &str,
    budget: usize,
    restarts: usize,
    tol: f64,
    seed: u64,
    fmt: Format,
) -> Result<u8, String> {
    let alg = load_algebra(input)?;
    if !alg.is_solvable() {
        return Err("the algebra is not solvable".into());
    }
    let cfg = OptimizerConfig {
        budget,
        restarts,
        seed,
        certify_tol: tol,
        ..Default::default()
    };
    let out = optimize_metric(&alg, &cfg);
    match fmt {
        Format::Structured => {
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "certified": out.certified,
                    "best_objective": out.best_objective,
                    "evaluations": out.evaluations,
                    "metric": pipeline::metric_json(&out.metric),
                    "certificate": out.certificate.as_ref().map(pipeline::certificate_json),
                }))
                .unwrap()
            );
        }
        Format::Text => {
            println!("certified:      {}", out.certified);
            println!("best objective: {:.6e}", out.best_objective);
            println!("evaluations:    {}", out.evaluations);
            if out.certified {
                println!("best metric (canonical form):");
                print!("{}", format::write_metric(&out.metric));
            }
            println!("note: failure to certify proves nothing; only the decision procedures do");
        }
    }
    Ok(if out.certified { EXIT_OK } else { EXIT_UNKNOWN })
}

fn cmd_catalog(fmt: Format) -> Result<u8, String> {
    let entries = catalog::catalog();
    match fmt {
        Format::Structured => {
            let list: Vec<_> = entries
                .iter()
                .map(|e| {
                    json!({
                        "name": e.name,
                        "description": e.description,
                        "dim": e.algebra.dim(),
                        "unimodular": e.unimodular,
                        "expected_verdict": e.expected_verdict.to_string(),
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&list).unwrap());
        }
        Format::Text => {
            for e in &entries {
                println!(
                    "{:28} dim {:2}  expect {:10}  {}",
                    e.name,
                    e.algebra.dim(),
                    e.expected_verdict.to_string(),
                    e.description
                );
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_selftest(fmt: Format) -> Result<u8, String> {
    let mut failures = Vec::new();
    for e in catalog::catalog() {
        let rep = pipeline::run(&e.algebra, PipelineMode::Construct { s_max: 96 })?;
        let ok = rep.verdict == e.expected_verdict
            && (rep.verdict != Verdict::Exists || rep.certificate.is_some());
        if fmt == Format::Text {
            println!(
                "{:28} expected {:10} got {:10} {}",
                e.name,
                e.expected_verdict.to_string(),
                rep.verdict.to_string(),
                if ok { "ok" } else { "MISMATCH" }
            );
        }
        if !ok {
            failures.push(e.name.clone());
        }
    }
    if fmt == Format::Structured {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "failures": failures,
                "passed": failures.is_empty(),
            }))
            .unwrap()
        );
    }
    if failures.is_empty() {
        Ok(EXIT_OK)
    } else {
        Err(format!("self-test failures: {}", failures.join(", ")))
    }
}
