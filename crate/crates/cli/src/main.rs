use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rsess::arith::{decide_closed, Solver};
use rsess::ast::{EqDecl, Signature};
use rsess::equality::{Checker, EngineConfig, Verdict};
use rsess::naming::internalize;
use rsess::oracle::bisim_bounded;
use rsess::syntax::{
    parse_prop, parse_query, parse_signature, print_signature, Diagnostics, Query, SourceFile,
};
use rsess::tcm::{encode, run, Machine, RunResult};
use rsess::validity::{check_signature, check_type, ValidityReport};

/// Arithmetically refined session types.
#[derive(Parser)]
#[command(name = "rsess", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check that a signature is valid.
    Validate { file: PathBuf },
    /// Print the signature with every continuation given an internal name.
    Internalize { file: PathBuf },
    /// Decide a type equality query such as "bin[0] == zero".
    Eq {
        file: PathBuf,
        query: String,
        /// Print the derivation or the distinguishing trace.
        #[arg(long)]
        trace: bool,
        /// Start without the eqtype declarations of the file.
        #[arg(long)]
        no_seeds: bool,
        #[arg(long, value_name = "N")]
        max_goals: Option<usize>,
    },
    /// Check every eqtype declaration of a file.
    Check {
        file: PathBuf,
        /// One tab-separated line per declaration.
        #[arg(long)]
        machine: bool,
        /// Leave timings out so that output is reproducible.
        #[arg(long)]
        stable: bool,
        #[arg(long, value_name = "N")]
        max_goals: Option<usize>,
    },
    /// Search for a difference between two closed types up to a bound.
    Oracle {
        file: PathBuf,
        query: String,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = 8)]
        numerals: u64,
    },
    /// Arithmetic utilities.
    #[command(subcommand)]
    Arith(ArithCmd),
    /// Two-counter machines.
    #[command(subcommand)]
    Tcm(TcmCmd),
}

#[derive(Subcommand)]
enum ArithCmd {
    /// Decide a closed formula; free variables are read universally.
    Decide { formula: String },
}

#[derive(Subcommand)]
enum TcmCmd {
    /// Encode a machine as a pair of types.
    Encode {
        machine: PathBuf,
        /// Mark every unfolding with an explicit message.
        #[arg(long)]
        isorec: bool,
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Simulate a machine.
    Run {
        machine: PathBuf,
        #[arg(long, default_value_t = 0)]
        c1: u64,
        #[arg(long, default_value_t = 0)]
        c2: u64,
        #[arg(long, default_value_t = 10_000)]
        max_steps: u64,
    },
}

/// How a command ends when it cannot produce its result.
enum Fail {
    /// Usage or I/O problem: exit 3.
    Usage(String),
    /// Reported problem with the input and the exit code it maps to.
    Input(String, u8),
}

type Out = Result<u8, Fail>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(Fail::Usage(msg)) => {
            eprintln!("rsess: {msg}");
            ExitCode::from(3)
        }
        Err(Fail::Input(msg, code)) => {
            eprintln!("{msg}");
            ExitCode::from(code)
        }
    }
}

fn dispatch(cmd: Cmd) -> Out {
    match cmd {
        Cmd::Validate { file } => validate(&file),
        Cmd::Internalize { file } => {
            let src = load(&file)?;
            print!(
                "{}",
                print_signature(&internalize(&src.signature).signature)
            );
            Ok(0)
        }
        Cmd::Eq {
            file,
            query,
            trace,
            no_seeds,
            max_goals,
        } => eq(&file, &query, trace, !no_seeds, max_goals),
        Cmd::Check {
            file,
            machine,
            stable,
            max_goals,
        } => check(&file, machine, stable, max_goals),
        Cmd::Oracle {
            file,
            query,
            depth,
            numerals,
        } => oracle(&file, &query, depth, numerals),
        Cmd::Arith(ArithCmd::Decide { formula }) => {
            let p = parse_prop(&formula).map_err(|d| diagnostics(None, &d))?;
            match decide_closed(&p) {
                Ok(b) => {
                    println!("{b}");
                    Ok(0)
                }
                Err(e) => {
                    println!("unknown");
                    eprintln!("{e}");
                    Ok(2)
                }
            }
        }
        Cmd::Tcm(TcmCmd::Encode {
            machine,
            isorec,
            output,
        }) => {
            let m = load_machine(&machine)?;
            let enc = encode(&m, isorec);
            let mut text = String::new();
            let _ = writeln!(text, "% {} == {}", enc.root_decl().lhs, enc.root_decl().rhs);
            text.push_str(&print_signature(&enc.signature));
            match output {
                Some(p) => std::fs::write(&p, text)
                    .map_err(|e| Fail::Usage(format!("cannot write {}: {e}", p.display())))?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Cmd::Tcm(TcmCmd::Run {
            machine,
            c1,
            c2,
            max_steps,
        }) => {
            let m = load_machine(&machine)?;
            match run(&m, c1, c2, max_steps) {
                RunResult::HaltedAt(k) => println!("halted after {k} steps"),
                RunResult::StillRunning => println!("running after {max_steps} steps"),
            }
            Ok(0)
        }
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path)
        .map_err(|e| Fail::Usage(format!("cannot read {}: {e}", path.display())))
}

fn diagnostics(path: Option<&Path>, d: &Diagnostics) -> Fail {
    let prefix = path
        .map(|p| format!("{}:", p.display()))
        .unwrap_or_default();
    let msg: Vec<String> = d.0.iter().map(|x| format!("{prefix}{x}")).collect();
    Fail::Input(msg.join("\n"), 1)
}

fn load(path: &Path) -> Result<SourceFile, Fail> {
    let text = read(path)?;
    let mut src = parse_signature(&text).map_err(|d| diagnostics(Some(path), &d))?;
    src.path = Some(path.to_path_buf());
    Ok(src)
}

fn load_machine(path: &Path) -> Result<Machine, Fail> {
    read(path)?
        .parse()
        .map_err(|e| Fail::Input(format!("{}: {e}", path.display()), 1))
}

fn render(path: &Path, src: &SourceFile, report: &ValidityReport) -> String {
    report
        .render(src)
        .lines()
        .map(|l| format!("{}:{l}", path.display()))
        .collect::<Vec<_>>()
        .join("\n")
}

fn validate(path: &Path) -> Out {
    let src = load(path)?;
    let report = check_signature(&src.signature, &Solver::default());
    if report.is_accepted() {
        println!(
            "accepted: {} obligations discharged",
            report.discharged.len()
        );
    } else {
        println!("{}", render(path, &src, &report));
    }
    Ok(report.exit_code() as u8)
}

/// Loads and validates a signature, reporting violations on stderr.
fn load_valid(path: &Path) -> Result<SourceFile, Fail> {
    let src = load(path)?;
    let report = check_signature(&src.signature, &Solver::default());
    if !report.is_accepted() {
        return Err(Fail::Input(
            render(path, &src, &report),
            report.exit_code() as u8,
        ));
    }
    Ok(src)
}

fn load_query(sig: &Signature, text: &str) -> Result<Query, Fail> {
    let q = parse_query(text).map_err(|d| diagnostics(None, &d))?;
    let solver = Solver::default();
    for t in [&q.lhs, &q.rhs] {
        let report = check_type(&q.vars, &q.constraint, t, sig, &solver);
        if !report.is_accepted() {
            let msg: Vec<String> = report
                .violations
                .iter()
                .map(|v| format!("query: {v}"))
                .collect();
            return Err(Fail::Input(msg.join("\n"), report.exit_code() as u8));
        }
    }
    Ok(q)
}

fn engine_config(max_goals: Option<usize>) -> EngineConfig {
    let mut c = EngineConfig::from_env();
    if let Some(n) = max_goals {
        c.max_goals = n;
    }
    c
}

fn eq(path: &Path, query: &str, trace: bool, seeds: bool, max_goals: Option<usize>) -> Out {
    let src = load_valid(path)?;
    let q = load_query(&src.signature, query)?;
    let checker = Checker::new(&src.signature, engine_config(max_goals));
    let out = checker.query(&q, seeds);
    println!("{}", out.verdict.word());
    match &out.verdict {
        Verdict::Equal(p) if trace => print!("{}", p.derivation),
        Verdict::NotEqual(c) if trace => println!("{c}"),
        Verdict::Unknown(u) => {
            eprintln!("reason: {}", u.reason);
            if trace {
                println!("reason: {}\nfrontier: {}", u.reason, u.frontier);
            }
        }
        _ => {}
    }
    Ok(out.verdict.exit_code() as u8)
}

fn decl_text(d: &EqDecl) -> String {
    let ctx = rsess::syntax::Context(&d.vars, &d.constraint);
    if d.vars.is_empty() && d.constraint == rsess::ast::ArithProp::True {
        format!("{} == {}", d.lhs, d.rhs)
    } else {
        format!("{ctx} {} == {}", d.lhs, d.rhs)
    }
}

fn check(path: &Path, machine: bool, stable: bool, max_goals: Option<usize>) -> Out {
    let src = load_valid(path)?;
    let checker = Checker::new(&src.signature, engine_config(max_goals));
    let decls = src.signature.eq_decls();
    let mut worst = 0u8;
    for r in &checker.decls {
        let v = &r.outcome.verdict;
        worst = worst.max(v.exit_code() as u8);
        let ms = if stable {
            "-".to_string()
        } else {
            format!("{:.3}", r.elapsed.as_secs_f64() * 1000.0)
        };
        let text = decl_text(&decls[r.index]);
        if machine {
            println!("{}\t{text}\t{}\t{ms}", r.index, v.word());
        } else {
            let mut line = format!(
                "{}: eqtype {text}: {} ({} goals, {} expansions",
                r.index,
                v.word(),
                r.outcome.stats.goals,
                r.outcome.stats.expansions
            );
            if let Verdict::Unknown(u) = v {
                let _ = write!(line, ", {}", u.reason);
            }
            line.push(')');
            if !stable {
                let _ = write!(line, " {ms} ms");
            }
            println!("{line}");
            if let Verdict::NotEqual(c) = v {
                for l in c.to_string().lines() {
                    println!("    {l}");
                }
            }
        }
    }
    Ok(worst)
}

fn oracle(path: &Path, query: &str, depth: usize, numerals: u64) -> Out {
    let src = load_valid(path)?;
    let q = load_query(&src.signature, query)?;
    if !q.vars.is_empty() {
        return Err(Fail::Usage("oracle queries must be closed".to_string()));
    }
    match bisim_bounded(&src.signature, &q.lhs, &q.rhs, depth, numerals) {
        None => {
            println!("none");
            Ok(0)
        }
        Some(t) => {
            println!("{t}");
            Ok(1)
        }
    }
}
