use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use aperylim::apery::{limit_report, AperyProblem, LimitReport};
use aperylim::catalog::{run_pipeline, Catalog, CatalogEntry, CatalogFilter};
use aperylim::exact::rational::{format_rational, parse_rational};
use aperylim::guess::{guess_recurrence, SequencePrefix};
use aperylim::hyperterm::ProperTerm;
use aperylim::identify::{constant, find_relation, RelationOutcome, DEFAULT_BASIS};
use aperylim::miracle::TheoremOneSpec;
use aperylim::telescope::{check_certificate, zeilberger, DEFAULT_MAX_ORDER};
use aperylim::{BigFloat, Error, Rational, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

#[derive(Parser)]
#[command(name = "aperylim", version, about = "Apéry limits of hypergeometric binomial sums")]
struct Cli {
    /// Print intermediate values and stage timings to stderr.
    #[arg(long, global = true)]
    trace: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recurrence, miracle check, limit and identification for (s, r, a).
    Pipeline(PipelineArgs),
    /// The classical ζ(3) problem.
    BenchZeta3 {
        #[arg(long = "N", default_value_t = 30)]
        n: usize,
        #[arg(long, default_value_t = 60)]
        digits: u32,
    },
    /// Print the t-transformed row sum as a truncated power series.
    Transform {
        #[command(flatten)]
        term: TermArgs,
        #[arg(long = "N")]
        n: i64,
        #[arg(long, default_value_t = 3)]
        order: usize,
    },
    /// Guess a recurrence from sequence terms.
    Guess {
        /// Comma-separated terms (integers, p/q or decimals).
        #[arg(long, conflicts_with = "file")]
        values: Option<String>,
        /// JSON file `{"values": [...]}`.
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, default_value_t = 4)]
        degree: usize,
    },
    /// Creative telescoping for the row sums of a term.
    Zeilberger {
        #[command(flatten)]
        term: TermArgs,
        #[arg(long, default_value_t = DEFAULT_MAX_ORDER)]
        order: usize,
        /// Check the certificate for n up to this bound.
        #[arg(long, default_value_t = 20)]
        check: i64,
    },
    /// Search for an integer relation between a value and basis constants.
    Identify {
        /// Decimal value; its precision is the number of digits given.
        #[arg(long)]
        value: String,
        /// Comma-separated basis names.
        #[arg(long)]
        basis: Option<String>,
        #[arg(long, default_value_t = 40)]
        digits: u32,
    },
    /// Query a catalog file.
    Catalog {
        #[arg(long, default_value = "catalog.jsonl")]
        catalog: PathBuf,
        #[arg(long)]
        s: Option<u32>,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        constant: Option<String>,
        #[arg(long)]
        hash: Option<String>,
    },
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long, default_value_t = 3)]
    s: u32,
    #[arg(long, default_value_t = 2)]
    r: u32,
    #[arg(long, default_value = "1")]
    a: String,
    /// Sweep, e.g. "s=3..5 r=1..4"; invalid (s, r) pairs are skipped.
    #[arg(long)]
    grid: Option<String>,
    /// Allow (s, r) outside the proven range.
    #[arg(long)]
    experimental: bool,
    #[arg(long = "N", default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 80)]
    digits: u32,
    #[arg(long, default_value = "catalog.jsonl")]
    catalog: PathBuf,
}

#[derive(Args)]
struct TermArgs {
    /// Term as JSON `{"P": ..., "num": ..., "den": ..., "x": ...}`.
    #[arg(long, conflicts_with = "franel")]
    term: Option<String>,
    /// Use the Franel term with this exponent.
    #[arg(long)]
    franel: Option<u32>,
    /// Weight `x` for the Franel term.
    #[arg(long, default_value = "1")]
    x: String,
}

impl TermArgs {
    fn build(&self) -> Result<ProperTerm> {
        match (&self.term, self.franel) {
            (Some(json), _) => serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string())),
            (None, Some(s)) => Ok(ProperTerm::franel(s, parse_rational(&self.x)?)),
            (None, None) => Err(Error::Parse("give --term or --franel".into())),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) => 2,
        Error::MiracleViolated { .. } => 3,
        Error::NonConvergent(_) => 4,
        Error::InsufficientPrecision { .. } => 5,
        _ => 1,
    }
}

fn report_json(r: &LimitReport, digits: u32) -> serde_json::Value {
    json!({
        "n_used": r.n_used,
        "limit": r.limit.to_decimal(digits),
        "alpha_estimate": r.alpha_estimate.as_ref().map(|a| a.to_decimal(6)),
        "delta_estimate": r.delta_estimate.as_ref().map(|d| d.to_decimal(6)),
        "digits_stable": r.digits_stable,
        "convergence": r.convergence,
        "diagnostic": r.diagnostic,
    })
}

/// `(lo, hi)` from `name=lo..hi` or `name=v`.
fn grid_range(grid: &str, name: &str) -> Result<Option<(u32, u32)>> {
    let bad = || Error::Parse(format!("bad grid {grid:?}; expected e.g. \"s=3..5 r=1..4\""));
    for part in grid.split_whitespace() {
        let (k, v) = part.split_once('=').ok_or_else(bad)?;
        if k != name {
            continue;
        }
        let (lo, hi) = match v.split_once("..") {
            Some((lo, hi)) => (lo.parse().map_err(|_| bad())?, hi.trim_start_matches('=').parse().map_err(|_| bad())?),
            None => {
                let x = v.parse().map_err(|_| bad())?;
                (x, x)
            }
        };
        return Ok(Some((lo, hi)));
    }
    Ok(None)
}

fn make_spec(s: u32, r: u32, a: &Rational, experimental: bool) -> Result<TheoremOneSpec> {
    let spec = if experimental {
        TheoremOneSpec::experimental(s, r, a.clone())
    } else {
        TheoremOneSpec::new(s, r, a.clone())
    };
    // an out-of-range spec is an input error
    spec.map_err(|e| match e {
        Error::InvalidArgument(m) => Error::Parse(m),
        other => other,
    })
}

fn pipeline(args: &PipelineArgs, trace: bool) -> Result<Option<Error>> {
    let a = parse_rational(&args.a)?;
    let specs = match &args.grid {
        None => vec![make_spec(args.s, args.r, &a, args.experimental)?],
        Some(g) => {
            let (s_lo, s_hi) = grid_range(g, "s")?.unwrap_or((args.s, args.s));
            let (r_lo, r_hi) = grid_range(g, "r")?.unwrap_or((args.r, args.r));
            (s_lo..=s_hi)
                .flat_map(|s| (r_lo..=r_hi).map(move |r| (s, r)))
                .filter_map(|(s, r)| make_spec(s, r, &a, args.experimental).ok())
                .collect()
        }
    };
    let results: Vec<(CatalogEntry, Option<Error>, f64)> = specs
        .par_iter()
        .map(|spec| {
            let t = Instant::now();
            let (entry, err) = run_pipeline(spec, args.n, args.digits);
            (entry, err, t.elapsed().as_secs_f64())
        })
        .collect();
    let catalog = Catalog::open(&args.catalog);
    let mut first_err = None;
    for (entry, err, secs) in results {
        if trace {
            let spec = entry.theorem_spec().unwrap();
            eprintln!("s={} r={} a={}: {secs:.2}s", spec.s, spec.r, format_rational(&spec.a));
        }
        let written = catalog.append(&entry)?;
        if trace && !written {
            eprintln!("already catalogued: {}", entry.hash);
        }
        println!("{}", serde_json::to_string(&entry)?);
        if first_err.is_none() {
            first_err = err;
        }
    }
    Ok(first_err)
}

fn bench_zeta3(n: usize, digits: u32, trace: bool) -> Result<()> {
    let t = Instant::now();
    let p = AperyProblem::zeta3();
    if trace {
        let a = p.run_a(n)?;
        let b = p.run_b(n)?;
        for i in 0..=n {
            eprintln!("n={i} A={} B={}", format_rational(&a.values[i]), format_rational(&b.values[i]));
        }
    }
    let r = limit_report(&p, n, digits)?;
    let z = constant("zeta3", digits)?;
    let mut out = report_json(&r, digits);
    out["zeta3_agreeing_digits"] = json!(r.limit.agreeing_digits(&z));
    out["seconds"] = json!(format!("{:.3}", t.elapsed().as_secs_f64()));
    println!("{out}");
    Ok(())
}

fn run(cli: Cli) -> Result<Option<Error>> {
    match cli.command {
        Command::Pipeline(args) => return pipeline(&args, cli.trace),
        Command::BenchZeta3 { n, digits } => bench_zeta3(n, digits, cli.trace)?,
        Command::Transform { term, n, order } => {
            let j = term.build()?.row_sum_jet(n, order)?;
            let coeffs: Vec<String> = j.coeffs().iter().map(format_rational).collect();
            println!("{}", json!({ "n": n, "order": order, "coeffs": coeffs }));
        }
        Command::Guess { values, file, order, degree } => {
            let seq = match (values, file) {
                (Some(v), _) => SequencePrefix::new(v.split(',').map(parse_rational).collect::<Result<_>>()?),
                (None, Some(f)) => serde_json::from_str(&std::fs::read_to_string(f)?)?,
                (None, None) => return Err(Error::Parse("give --values or --file".into())),
            };
            match guess_recurrence(&seq, order, degree)? {
                Some(r) => println!("{}", serde_json::to_string(&r)?),
                None => println!("null"),
            }
        }
        Command::Zeilberger { term, order, check } => {
            let t = term.build()?;
            let (rec, cert) = zeilberger(&t, order)?;
            let verified = check_certificate(&t, &rec, &cert, check)?;
            println!(
                "{}",
                json!({ "recurrence": rec, "certificate": cert.to_string(), "verified": verified })
            );
        }
        Command::Identify { value, basis, digits } => {
            let precision = value.split(['e', 'E']).next().unwrap().chars().filter(char::is_ascii_digit).count() as u32;
            let v = BigFloat::parse(&value, precision.max(1))?;
            let names: Vec<String> = match basis {
                Some(b) => b.split(',').map(|s| s.trim().to_string()).collect(),
                None => DEFAULT_BASIS.iter().map(|s| s.to_string()).collect(),
            };
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            match find_relation(&v, &names, digits)? {
                RelationOutcome::Match(m) => {
                    let mut out = serde_json::to_value(&m)?;
                    out["value"] = json!(m.expression());
                    println!("{out}");
                }
                RelationOutcome::Withdrawn { coeffs, .. } => {
                    let coeffs: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                    println!("{}", json!({ "withdrawn": coeffs }));
                }
                RelationOutcome::NoRelation => println!("null"),
            }
        }
        Command::Catalog { catalog, s, a, constant, hash } => {
            let filter = CatalogFilter { s, a: a.as_deref().map(parse_rational).transpose()?, constant, hash };
            for e in Catalog::open(catalog).query(&filter)? {
                println!("{}", serde_json::to_string(&e)?);
            }
        }
    }
    Ok(None)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(e)) | Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
