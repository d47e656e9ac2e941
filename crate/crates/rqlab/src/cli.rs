//! Command-line front end.
//!
//! Exit codes: 0 success, 1 invalid usage or input, 2 out-of-scope D
//! (record still printed), 3 verification failure or internal
//! inconsistency during a scan.

use clap::{Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;

use crate::bi;
use crate::cache::{cache_get, cache_put, CacheEntry};
use crate::pell::{continued_fraction_sqrt, fundamental_unit};
use crate::scan::{render_csv, render_json, run_scan, CaseFilter, ReportFormat, ScanSpec};
use crate::suites::run_suite;
use crate::verdict::{evaluate, InvariantRecord, Verdict};

#[derive(Parser)]
#[command(
    name = "rqlab",
    version,
    about = "Exact 2-class-group invariants of real quadratic fields and verdicts on the limit of their 2-class tower"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one D: all invariants plus the verdict.
    Analyze {
        d: u64,
        /// Emit the record and verdict as JSON instead of text.
        #[arg(long)]
        json: bool,
        /// Cache file to consult and update (default: $RQLAB_CACHE).
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Enumerate a family of D and evaluate each member.
    Scan {
        #[arg(long)]
        case: String,
        #[arg(long = "max-d")]
        max_d: u64,
        #[arg(long = "max-prime")]
        max_prime: Option<u64>,
        /// Report file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: String,
        /// Worker count for the evaluation pool.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Run a named verification suite.
    Verify {
        #[arg(long)]
        suite: String,
    },
    /// Print the fundamental unit and continued fraction of sqrt(d).
    Unit { d: u64 },
}

fn default_cache(cli_value: Option<PathBuf>) -> Option<PathBuf> {
    cli_value.or_else(|| std::env::var_os("RQLAB_CACHE").map(PathBuf::from))
}

fn print_record_text(rec: &InvariantRecord, verdict: &Verdict) {
    let primes: Vec<String> =
        rec.primes.iter().map(|i| format!("{} ({} mod 8)", i.p, i.mod8)).collect();
    println!("D = {} = {}  (case {})", rec.d, primes.join(" * "), rec.case);
    let show = |label: &str, v: &Option<i8>| {
        if let Some(x) = v {
            println!("  {label} = {x:+}");
        }
    };
    show("N(eps_D)", &rec.norm_eps_d);
    show("N(eps_2D)", &rec.norm_eps_2d);
    if let (Some(h2), Some(h2n)) = (&rec.h2, &rec.h2_narrow) {
        println!(
            "  A0: |A0| = {h2}, narrow 2-part {h2n} {:?}",
            rec.narrow_structure.as_deref().unwrap_or(&[])
        );
    }
    if let (Some(h2), Some(h2n)) = (&rec.h2_2d, &rec.h2_2d_narrow) {
        println!(
            "  A0' (over 2D): |A0'| = {h2}, narrow 2-part {h2n} {:?}",
            rec.narrow_structure_2d.as_deref().unwrap_or(&[])
        );
    }
    if let (Some(r4), Some(r42)) = (rec.redei_r4, rec.redei_r4_2d) {
        println!("  4-rank: {r4} (D), {r42} (2D)");
    }
    show("(p/q)", &rec.legendre_pq);
    show("(p/q)_4", &rec.quartic_pq);
    show("(q/p)_4", &rec.quartic_qp);
    show("(2/q)_4", &rec.quartic_2_q);
    show("(2p/q)_4", &rec.quartic_2p_q);
    show("symbol criterion", &rec.azizi);
    if let Some(b) = rec.sqrt_dd2_in_k1 {
        println!("  sqrt(e_D e_2D) in K1: {b}");
    }
    if let Some(b) = rec.sqrt_dd2_pell {
        println!("  p(r+1) square criterion: {b}");
    }
    if let Some(b) = rec.sqrt_dd2e_in_k1 {
        println!("  sqrt(e_D e_2D e_2) in K1: {b}");
    }
    if let (Some(c), Some(q)) = (rec.fsu_case, rec.hasse_q) {
        println!("  unit index: case {c}, Q = {q}");
    }
    if let Some(a1) = rec.a1 {
        println!("  |A1| = {a1}");
    }
    if let Some(b) = rec.ideal_q_in_k_principal {
        println!("  ideal over q principal in K: {b}");
    }
    if let Some(b) = rec.ideal_q_in_kprime_principal {
        println!("  ideal over q principal in K': {b}");
    }
    for a in &rec.annotations {
        println!("  note: {a}");
    }
    let conf = format!("{:?}", verdict.confidence).to_lowercase();
    println!("  verdict: {} [{}; {}]", verdict.summary, conf, verdict.theorem);
}

fn cmd_analyze(d: u64, json: bool, cache: Option<PathBuf>) -> i32 {
    let cache = default_cache(cache);
    let cached = cache.as_deref().and_then(|p| cache_get(p, d).ok().flatten());
    let (rec, verdict) = match cached {
        Some(e) => (e.record, e.verdict),
        None => match evaluate(&bi(d as i64)) {
            Ok(rv) => {
                if let Some(p) = cache.as_deref() {
                    let _ = cache_put(p, CacheEntry::new(rv.0.clone(), rv.1.clone()));
                }
                rv
            }
            Err(e) => {
                eprintln!("error: {e}");
                return 1;
            }
        },
    };
    if json {
        let payload = serde_json::json!({ "record": rec, "verdict": verdict });
        println!("{}", serde_json::to_string_pretty(&payload).expect("serializable"));
    } else {
        print_record_text(&rec, &verdict);
    }
    if rec.case == "out-of-scope" {
        2
    } else {
        0
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_scan(
    case: String,
    max_d: u64,
    max_prime: Option<u64>,
    out: Option<PathBuf>,
    format: String,
    jobs: usize,
    cache: Option<PathBuf>,
) -> i32 {
    let spec = match (case.parse::<CaseFilter>(), format.parse::<ReportFormat>()) {
        (Ok(case), Ok(format)) => {
            ScanSpec { case, max_d, max_prime, format, jobs, cache_path: default_cache(cache) }
        }
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let output = match run_scan(&spec) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let rendered = match spec.format {
        ReportFormat::Csv => render_csv(&output.rows),
        ReportFormat::Json => render_json(&output.rows),
    };
    let rendered = match rendered {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if let Some(path) = out {
        if let Err(e) = std::fs::write(&path, rendered) {
            eprintln!("error writing {}: {e}", path.display());
            return 1;
        }
    } else {
        print!("{rendered}");
        let _ = std::io::stdout().flush();
    }
    if output.errors.is_empty() {
        0
    } else {
        for e in &output.errors {
            eprintln!("inconsistency: {e}");
        }
        3
    }
}

fn cmd_verify(suite: String) -> i32 {
    match run_suite(&suite) {
        Ok(reports) => {
            let mut ok = true;
            for r in &reports {
                println!("{}", r.summary_line());
                ok &= r.passed();
            }
            if ok {
                0
            } else {
                3
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn cmd_unit(d: u64) -> i32 {
    let d = bi(d as i64);
    match (fundamental_unit(&d), continued_fraction_sqrt(&d)) {
        (Ok(u), Ok((a0, period))) => {
            println!("d = {d}");
            println!("eps = {} + {} * sqrt({d})", u.x, u.y);
            println!("norm = {:+}", u.norm);
            let terms: Vec<String> = period.iter().map(|t| t.to_string()).collect();
            println!("sqrt({d}) = [{a0}; ({})]", terms.join(", "));
            0
        }
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze { d, json, cache } => cmd_analyze(d, json, cache),
        Command::Scan { case, max_d, max_prime, out, format, jobs, cache } => {
            cmd_scan(case, max_d, max_prime, out, format, jobs, cache)
        }
        Command::Verify { suite } => cmd_verify(suite),
        Command::Unit { d } => cmd_unit(d),
    }
}
