use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use kappa_core::exactalg::{fmt_rational, fmt_rational_strict};
use kappa_core::intersect::{cache, tau};
use kappa_core::kapparing::{asymptotic_formula, genus1_rank_formula, rank_kappa_c};
use kappa_core::partitions::enumerate;
use kappa_core::pushforward::{bracket, evaluate_formal};
use kappa_core::strata::{enum_q, pair_formal};
use kappa_core::verify::{run_suite, Case, Suite};
use kappa_core::{Basis, FormalExpr, KappaPoly, Partition, ThetaMultiset};

#[derive(Parser)]
#[command(
    name = "kappa",
    version,
    about = "Exact computations in the kappa ring of M_{g,n}"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Emit JSON; rationals are written as "num/den" strings.
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit CSV with a header row.
    #[arg(long, global = true)]
    csv: bool,
    /// Directory for the intersection-number cache.
    #[arg(long, global = true, value_name = "DIR")]
    cache_dir: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Rank of the degree-d combinatorial kappa ring against the closed formula.
    Rank {
        #[arg(long)]
        g: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        d: u32,
    },
    /// Pair a class with the stratum of a weight multiset.
    Pair {
        #[arg(long)]
        g: u32,
        #[arg(long)]
        n: u32,
        /// Partition indexing the class, e.g. "2,1".
        #[arg(long, value_name = "PARTITION")]
        psi: Partition,
        /// Weight multiset, e.g. "(1,1)|(0,3)".
        #[arg(long, value_name = "MULTISET")]
        q: ThetaMultiset,
        #[arg(long, default_value = "psi")]
        basis: Basis,
    },
    /// Witten-Kontsevich intersection number.
    Intersect {
        #[arg(long)]
        g: u32,
        /// Comma-separated ψ exponents.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        exps: Vec<u32>,
    },
    /// Expand a class in κ-monomials.
    Expand {
        #[arg(long)]
        g: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, value_name = "PARTITION")]
        psi: Partition,
        #[arg(long, default_value = "psi")]
        basis: Basis,
        /// Degree of the bracket class (defaults to the partition's sum).
        #[arg(long)]
        d: Option<u32>,
    },
    /// List P(d), or Q(d; g, n) when --g and --n are given.
    Enumerate {
        #[arg(long)]
        d: u32,
        #[arg(long, requires = "n")]
        g: Option<u32>,
        #[arg(long, requires = "g")]
        n: Option<u32>,
    },
    /// Run a verification suite; exits 1 if any case fails.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 4)]
        max_d: u32,
        #[arg(long, default_value_t = 7)]
        max_n: u32,
    },
    /// Leading-order rank estimate C(n+e,e) C(g+e,e) / (e+1)!.
    Asymptotic {
        #[arg(long)]
        g: u32,
        #[arg(long)]
        e: u32,
        #[arg(long)]
        n: u32,
    },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

fn default_cache_dir() -> Option<PathBuf> {
    if let Some(dir) = std::env::var_os("KAPPA_CACHE_DIR") {
        return Some(PathBuf::from(dir));
    }
    if let Some(xdg) = std::env::var_os("XDG_CACHE_HOME") {
        return Some(PathBuf::from(xdg).join("kappa"));
    }
    std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache").join("kappa"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let format = if cli.global.json {
        Format::Json
    } else if cli.global.csv {
        Format::Csv
    } else {
        Format::Text
    };
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let cache_dir = cli.global.cache_dir.clone().or_else(default_cache_dir);
    if let Some(dir) = &cache_dir {
        if let Err(e) = cache().load(dir) {
            eprintln!("warning: ignoring cache in {}: {e}", dir.display());
            cache().clear();
        }
    }
    let outcome = run(cli.command, format);
    if let Some(dir) = &cache_dir {
        if !cache().is_empty() {
            if let Err(e) = cache().save(dir) {
                eprintln!("warning: could not write cache to {}: {e}", dir.display());
            }
        }
    }
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}")?;
    Ok(())
}

fn emit_json(v: &Value) -> Result<()> {
    emit(&serde_json::to_string(v)?)
}

fn emit_csv(header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn kappa_json(k: &KappaPoly) -> Value {
    let terms: Vec<Value> = k
        .terms()
        .iter()
        .map(|(m, c)| json!({"monomial": m.to_string(), "coeff": fmt_rational_strict(c)}))
        .collect();
    json!({"g": k.genus(), "n": k.markings(), "terms": terms})
}

/// Returns `Ok(false)` when a verification case failed.
fn run(command: Command, format: Format) -> Result<bool> {
    match command {
        Command::Rank { g, n, d } => {
            let r = rank_kappa_c(d, g, n)?;
            match format {
                Format::Json => emit(&serde_json::to_string(&r)?)?,
                Format::Csv => emit_csv(
                    &["d", "g", "n", "rank", "formula", "agrees"],
                    &[vec![
                        d.to_string(),
                        g.to_string(),
                        n.to_string(),
                        r.matrix_rank.to_string(),
                        r.formula_value.map_or(String::new(), |f| f.to_string()),
                        r.agrees().to_string(),
                    ]],
                )?,
                Format::Text => {
                    let formula = r
                        .formula_value
                        .map_or("none".to_string(), |f| f.to_string());
                    emit(&format!(
                        "rank {} (formula {formula}, agrees {})",
                        r.matrix_rank,
                        r.agrees()
                    ))?;
                    if g >= 2 {
                        emit("note: this is the rank of the combinatorial kappa ring")?;
                    }
                }
            }
        }
        Command::Pair {
            g,
            n,
            psi,
            q,
            basis,
        } => {
            let v = pair_formal(&FormalExpr::unit(psi.clone()), basis, &q, g, n)?;
            match format {
                Format::Json => emit_json(&json!({
                    "g": g, "n": n, "class": psi.to_string(), "q": q.to_string(),
                    "value": fmt_rational_strict(&v),
                }))?,
                Format::Csv => emit_csv(
                    &["g", "n", "class", "q", "value"],
                    &[vec![
                        g.to_string(),
                        n.to_string(),
                        psi.to_string(),
                        q.to_string(),
                        fmt_rational_strict(&v),
                    ]],
                )?,
                Format::Text => emit(&fmt_rational(&v))?,
            }
        }
        Command::Intersect { g, exps } => {
            let v = tau(g, &exps)?;
            match format {
                Format::Json => {
                    emit_json(&json!({"g": g, "exps": exps, "value": fmt_rational_strict(&v)}))?
                }
                Format::Csv => emit_csv(
                    &["g", "exps", "value"],
                    &[vec![
                        g.to_string(),
                        exps.iter()
                            .map(u32::to_string)
                            .collect::<Vec<_>>()
                            .join(" "),
                        fmt_rational_strict(&v),
                    ]],
                )?,
                Format::Text => emit(&fmt_rational(&v))?,
            }
        }
        Command::Expand {
            g,
            n,
            psi,
            basis,
            d,
        } => {
            let k = match (basis, d) {
                (Basis::Bracket, Some(j)) => bracket(&psi, j as i64, g, n)?,
                (_, Some(_)) => bail!("--d only applies to --basis bracket"),
                _ => evaluate_formal(&FormalExpr::unit(psi), basis, g, n)?,
            };
            match format {
                Format::Json => emit_json(&kappa_json(&k))?,
                Format::Csv => {
                    let rows: Vec<Vec<String>> = k
                        .terms()
                        .iter()
                        .map(|(m, c)| vec![m.to_string(), fmt_rational_strict(c)])
                        .collect();
                    emit_csv(&["monomial", "coeff"], &rows)?
                }
                Format::Text => emit(&k.to_string())?,
            }
        }
        Command::Enumerate { d, g, n } => {
            let items: Vec<String> = match (g, n) {
                (Some(g), Some(n)) => enum_q(d, g, n)?.iter().map(|q| q.to_string()).collect(),
                _ => enumerate(d).iter().map(|p| p.to_string()).collect(),
            };
            match format {
                Format::Json => emit_json(&json!(items))?,
                Format::Csv => {
                    let rows: Vec<Vec<String>> = items.into_iter().map(|s| vec![s]).collect();
                    emit_csv(&["item"], &rows)?
                }
                Format::Text => {
                    for s in items {
                        emit(&s)?;
                    }
                }
            }
        }
        Command::Verify {
            suite,
            max_d,
            max_n,
        } => {
            let suites: Vec<Suite> = if suite == "all" {
                Suite::ALL.to_vec()
            } else {
                vec![suite.parse().with_context(|| {
                    let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
                    format!("expected one of: all, {}", names.join(", "))
                })?]
            };
            let mut cases: Vec<Case> = Vec::new();
            for s in suites {
                cases.extend(run_suite(s, max_d, max_n)?);
            }
            let ok = cases.iter().all(|c| c.pass);
            match format {
                Format::Csv => {
                    let rows: Vec<Vec<String>> = cases
                        .iter()
                        .map(|c| {
                            vec![
                                c.case.clone(),
                                c.expected.clone(),
                                c.got.clone(),
                                c.pass.to_string(),
                            ]
                        })
                        .collect();
                    emit_csv(&["case", "expected", "got", "pass"], &rows)?
                }
                Format::Json => emit(&serde_json::to_string_pretty(&cases)?)?,
                Format::Text => {
                    let mut lines: Vec<String> = cases
                        .iter()
                        .map(|c| {
                            let verdict = if c.pass { "PASS" } else { "FAIL" };
                            format!(
                                "{verdict} {} (expected {}, got {})",
                                c.case, c.expected, c.got
                            )
                        })
                        .collect();
                    let passed = cases.iter().filter(|c| c.pass).count();
                    lines.push(format!("{passed}/{} cases passed", cases.len()));
                    emit(&lines.join("\n"))?
                }
            }
            return Ok(ok);
        }
        Command::Asymptotic { g, e, n } => {
            let a = asymptotic_formula(g, e, n);
            let exact = (g == 1 && e <= n)
                .then(|| genus1_rank_formula(n - e, n))
                .transpose()?;
            let ratio = exact.map(|r| kappa_core::Rational::from_integer(r.into()) / &a);
            match format {
                Format::Json => emit_json(&json!({
                    "g": g, "e": e, "n": n,
                    "value": fmt_rational_strict(&a),
                    "rank": exact,
                    "ratio": ratio.as_ref().map(fmt_rational_strict),
                }))?,
                Format::Csv => emit_csv(
                    &["g", "e", "n", "value", "rank", "ratio"],
                    &[vec![
                        g.to_string(),
                        e.to_string(),
                        n.to_string(),
                        fmt_rational_strict(&a),
                        exact.map_or(String::new(), |r| r.to_string()),
                        ratio.as_ref().map_or(String::new(), fmt_rational_strict),
                    ]],
                )?,
                Format::Text => {
                    emit(&fmt_rational(&a))?;
                    if let (Some(r), Some(q)) = (exact, &ratio) {
                        emit(&format!("genus-1 rank {r}, ratio {}", fmt_rational(q)))?;
                    }
                }
            }
        }
    }
    Ok(true)
}
