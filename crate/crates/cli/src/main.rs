use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bjy::concolic::{explain, Report, SearchConfig, SearchStats, Verdict, NO_ERRORS};
use bjy::corpus::{check_entry, load_corpus, EntryResult};
use bjy::instrument::{InstrumentConfig, Program};
use bjy::interp::{replay, Feed, Outcome};
use bjy::oracle::{exhaustive_refute, fuzz_refute, EnumBounds, EnumVerdict, FuzzVerdict};
use bjy::solver::{SolverChoice, SOLVER_ENV};

/// Finds inputs that make a program violate its declared types.
#[derive(Parser)]
#[command(name = "bjy", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Search a program for a type error.
    Check {
        file: PathBuf,
        #[command(flatten)]
        opts: RunOptions,
        /// Write the witness feed of a found error here.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Run a program on a recorded feed and print the outcome.
    Replay {
        file: PathBuf,
        feed: PathBuf,
        #[arg(long)]
        no_wrap: bool,
        #[arg(long, default_value_t = 50_000)]
        max_step: u64,
        /// Exit 1 unless the run ends in ERROR.
        #[arg(long)]
        expect_error: bool,
    },
    /// Print the instrumented core program.
    Dump {
        file: PathBuf,
        #[arg(long)]
        no_wrap: bool,
    },
    /// Check every `.bjy` file of a directory against its `.expect` file.
    Bench {
        dir: PathBuf,
        #[command(flatten)]
        opts: RunOptions,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Concolic,
    Exhaustive,
    Fuzz,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Structured,
}

#[derive(Args)]
struct RunOptions {
    #[arg(long, value_enum, default_value_t = Backend::Concolic)]
    backend: Backend,
    /// Check declarations only where they are defined, not where they are used.
    #[arg(long)]
    no_wrap: bool,
    /// Steps allowed per run.
    #[arg(long, default_value_t = 50_000)]
    max_step: u64,
    /// Most symbolic branches per path.
    #[arg(long, default_value_t = 60)]
    max_depth: usize,
    /// Steps by which the depth cap rises to --max-depth.
    #[arg(long, default_value_t = 6)]
    depth_increments: usize,
    #[arg(long, default_value_t = 90.0)]
    timeout_s: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// SMT-LIB2 solver executable.
    #[arg(long, env = SOLVER_ENV)]
    solver: Option<PathBuf>,
    /// Which constraint backend answers queries: smt, enum or hybrid.
    #[arg(long, default_value = "hybrid")]
    solver_mode: SolverChoice,
    /// Runs for the fuzz backend.
    #[arg(long, default_value_t = 10_000)]
    fuzz_runs: u64,
    /// Integer bound for the exhaustive backend: picks range over [-N, N].
    #[arg(long, default_value_t = 16)]
    enum_int: i64,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Print the instrumented program to stderr before searching.
    #[arg(long)]
    dump_core: bool,
}

impl RunOptions {
    fn instrument(&self) -> InstrumentConfig {
        InstrumentConfig {
            wrap_enabled: !self.no_wrap,
            ..InstrumentConfig::default()
        }
    }

    fn search(&self) -> Result<SearchConfig> {
        anyhow::ensure!(
            self.timeout_s.is_finite() && self.timeout_s > 0.0,
            "--timeout-s must be positive"
        );
        Ok(SearchConfig {
            max_step: self.max_step,
            max_tree_depth: self.max_depth,
            depth_increments: self.depth_increments,
            timeout: Duration::from_secs_f64(self.timeout_s),
            seed: self.seed,
            solver: self.solver_mode,
            solver_path: self.solver.clone(),
            ..SearchConfig::default()
        })
    }
}

/// Failures that are the user's to fix: exit status 2.
struct Usage(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Check { file, opts, witness } => cmd_check(&file, &opts, witness.as_deref()),
        Cmd::Replay {
            file,
            feed,
            no_wrap,
            max_step,
            expect_error,
        } => cmd_replay(&file, &feed, no_wrap, max_step, expect_error),
        Cmd::Dump { file, no_wrap } => cmd_dump(&file, no_wrap),
        Cmd::Bench { dir, opts } => cmd_bench(&dir, &opts),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Usage(e)) => {
            eprintln!("bjy: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(file: &Path, cfg: &InstrumentConfig) -> Result<Program> {
    let src = fs::read_to_string(file).with_context(|| format!("cannot read {}", file.display()))?;
    Program::from_source(&src, cfg).with_context(|| file.display().to_string())
}

/// The outcome of any backend, ready to print.
enum Checked {
    Concolic(Report),
    /// A non-concolic backend found nothing; the note says within what.
    Clean {
        label: &'static str,
        note: String,
        stats: SearchStats,
    },
}

fn run_backend(p: &Program, opts: &RunOptions) -> Result<Checked> {
    let scfg = opts.search()?;
    let started = std::time::Instant::now();
    let found = |feed: Feed, runs: u64| -> Result<Checked> {
        let r = explain(p, feed, opts.max_step).context("witness did not replay to ERROR")?;
        let stats = SearchStats {
            runs,
            elapsed: started.elapsed(),
            ..SearchStats::default()
        };
        Ok(Checked::Concolic(Report {
            verdict: Verdict::ErrorFound(Box::new(r)),
            stats,
            incomplete: Vec::new(),
        }))
    };
    match opts.backend {
        Backend::Concolic => Ok(Checked::Concolic(bjy::concolic::search(p, &scfg)?)),
        Backend::Exhaustive => {
            let b = EnumBounds {
                int_range: (-opts.enum_int, opts.enum_int),
                step_budget: opts.max_step,
                ..EnumBounds::default()
            };
            let stats = |runs| SearchStats {
                runs,
                elapsed: started.elapsed(),
                ..SearchStats::default()
            };
            match exhaustive_refute(&p.expr, &b) {
                EnumVerdict::Refuted(feed) => found(feed, 0),
                EnumVerdict::NoErrorWithinBounds { runs, complete } => Ok(Checked::Clean {
                    label: if complete {
                        "no-error-within-bounds"
                    } else {
                        "no-error-cut-off"
                    },
                    note: format!(
                        "(enumerated {runs} feeds with integers in [-{n}, {n}]{})",
                        if complete { "" } else { "; some runs were cut off" },
                        n = opts.enum_int
                    ),
                    stats: stats(runs),
                }),
                EnumVerdict::BudgetExceeded { runs } => Ok(Checked::Clean {
                    label: "budget-exceeded",
                    note: format!("(stopped after {runs} feeds; enumeration incomplete)"),
                    stats: stats(runs),
                }),
            }
        }
        Backend::Fuzz => match fuzz_refute(&p.expr, opts.seed, opts.fuzz_runs, opts.max_step) {
            FuzzVerdict::Refuted { feed, run } => found(feed, run),
            FuzzVerdict::NotFound { runs } => Ok(Checked::Clean {
                label: "not-found",
                note: format!("({runs} random runs)"),
                stats: SearchStats {
                    runs,
                    elapsed: started.elapsed(),
                    ..SearchStats::default()
                },
            }),
        },
    }
}

fn cmd_check(file: &Path, opts: &RunOptions, witness: Option<&Path>) -> Result<u8, Usage> {
    let p = load(file, &opts.instrument())?;
    if opts.dump_core {
        eprintln!("{}", p.dump());
    }
    let checked = run_backend(&p, opts)?;
    let mut out = String::new();
    let code = match &checked {
        Checked::Concolic(r) => {
            if let (Some(path), Some(refutation)) = (witness, r.refutation()) {
                fs::write(path, refutation.witness.to_text())
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
            out.push_str(&match opts.format {
                Format::Human => r.human(),
                Format::Structured => r.structured(witness),
            });
            u8::from(r.found_error())
        }
        Checked::Clean { label, note, stats } => {
            out.push_str(&match opts.format {
                Format::Human => format!("{NO_ERRORS}\n{note}\n"),
                Format::Structured => format!(
                    "verdict={label}\nruns={}\nwall_ms={}\n",
                    stats.runs,
                    stats.elapsed.as_millis()
                ),
            });
            0
        }
    };
    print!("{out}");
    Ok(code)
}

fn cmd_replay(file: &Path, feed: &Path, no_wrap: bool, max_step: u64, expect_error: bool) -> Result<u8, Usage> {
    let cfg = InstrumentConfig {
        wrap_enabled: !no_wrap,
        ..InstrumentConfig::default()
    };
    let p = load(file, &cfg)?;
    let text = fs::read_to_string(feed).with_context(|| format!("cannot read {}", feed.display()))?;
    let feed = Feed::parse(&text).with_context(|| feed.display().to_string())?;
    let (outcome, _) = replay(&p.expr, &feed, max_step)?;
    println!("{outcome}");
    Ok(u8::from(expect_error && !matches!(outcome, Outcome::Error)))
}

fn cmd_dump(file: &Path, no_wrap: bool) -> Result<u8, Usage> {
    let cfg = InstrumentConfig {
        wrap_enabled: !no_wrap,
        ..InstrumentConfig::default()
    };
    println!("{}", load(file, &cfg)?.dump());
    Ok(0)
}

fn ms(d: Duration) -> String {
    format!("{:.0}", d.as_secs_f64() * 1000.0)
}

fn cmd_bench(dir: &Path, opts: &RunOptions) -> Result<u8, Usage> {
    let entries = load_corpus(dir)?;
    let (icfg, scfg) = (opts.instrument(), opts.search()?);
    let structured = opts.format == Format::Structured;
    let mut stdout = std::io::stdout().lock();
    if structured {
        writeln!(
            stdout,
            "name\texpected\tverdict\tmatch\trun_ms\ttransl_ms\ttotal_ms\tloc"
        )?;
    } else {
        writeln!(
            stdout,
            "{:<28} {:>9} {:>19} {:>5} {:>8} {:>8} {:>8} {:>5}",
            "test", "expected", "verdict", "ok", "run", "transl", "total", "loc"
        )?;
    }
    let mut results: Vec<EntryResult> = Vec::new();
    for e in &entries {
        let r = check_entry(e, &icfg, &scfg);
        let ok = if r.matched() { "yes" } else { "NO" };
        let (run, tr) = (ms(r.search), ms(r.translate));
        let total = ms(r.search + r.translate);
        if structured {
            writeln!(
                stdout,
                "{}\t{}\t{}\t{ok}\t{run}\t{tr}\t{total}\t{}",
                r.name,
                r.expected.label(),
                r.verdict(),
                r.loc
            )?;
        } else {
            writeln!(
                stdout,
                "{:<28} {:>9} {:>19} {ok:>5} {run:>8} {tr:>8} {total:>8} {:>5}",
                r.name,
                r.expected.label(),
                r.verdict(),
                r.loc
            )?;
        }
        if let Err(msg) = &r.outcome {
            eprintln!("{}: {msg}", r.name);
        }
        results.push(r);
    }
    let matched = results.iter().filter(|r| r.matched()).count();
    let run: Duration = results.iter().map(|r| r.search).sum();
    let tr: Duration = results.iter().map(|r| r.translate).sum();
    let loc: usize = results.iter().map(|r| r.loc).sum();
    let summary = format!("{matched}/{}", results.len());
    if structured {
        writeln!(
            stdout,
            "TOTAL\t-\t-\t{summary}\t{}\t{}\t{}\t{loc}",
            ms(run),
            ms(tr),
            ms(run + tr)
        )?;
    } else {
        writeln!(
            stdout,
            "{:<28} {:>9} {:>19} {summary:>5} {:>8} {:>8} {:>8} {loc:>5}",
            "total",
            "",
            "",
            ms(run),
            ms(tr),
            ms(run + tr)
        )?;
    }
    Ok(u8::from(matched != results.len()))
}
