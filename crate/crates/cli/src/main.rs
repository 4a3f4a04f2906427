use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wg_biot::analysis::StudyReport;
use wg_biot::checks;
use wg_biot::forms::build_all_forms;
use wg_biot::stepper::TimeGrid;
use wg_biot::study::{run_study, spread_summary, StudyConfig};
use wg_biot::system::assemble;
use wg_biot::weakops::build_element_ops;
use wg_biot::weakspace::build_spaces;
use wg_biot::WgError;

#[derive(Parser)]
#[command(name = "wg-biot", version, about = "Weak Galerkin Biot convergence and locking studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence study and write the error table as CSV.
    Convergence(StudyArgs),
    /// Sweep lambda on the locking problem; one CSV per lambda plus a spread summary.
    Locking(StudyArgs),
    /// Run the self-check gates.
    Check(CheckArgs),
    /// Assemble the step matrix of the first level and export it.
    DumpSystem(StudyArgs),
}

#[derive(Args)]
struct StudyArgs {
    /// `key = value` file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// poly | locking
    #[arg(long)]
    problem: Option<String>,
    /// triangular | rectangular | hybrid | file:<path>
    #[arg(long)]
    mesh: Option<String>,
    /// Comma-separated refinement levels.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    degree: Option<String>,
    /// Comma-separated lambda values.
    #[arg(long)]
    lambdas: Option<String>,
    /// h2 | fixed:<value>
    #[arg(long)]
    tau: Option<String>,
    #[arg(long)]
    final_time: Option<String>,
    /// sqrt-area | diameter
    #[arg(long)]
    stabilizer: Option<String>,
    /// Output file (convergence), directory (locking) or path prefix (dump-system).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print per-step residuals to stderr.
    #[arg(long)]
    verbose: bool,
    /// Worker threads; 1 runs sequentially. Falls back to WG_BIOT_THREADS.
    #[arg(long)]
    threads: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    threads: Option<String>,
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<WgError> for Failure {
    fn from(e: WgError) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numerical(format!("output: {e}"))
    }
}

type CliResult = Result<(), Failure>;

fn env_threads() -> Option<String> {
    std::env::var("WG_BIOT_THREADS").ok().filter(|s| !s.trim().is_empty())
}

impl StudyArgs {
    fn resolve(&self, mut cfg: StudyConfig) -> Result<StudyConfig, Failure> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            cfg.apply_text(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        }
        let config_sets_threads = cfg.threads != 0;
        let flags = [
            ("problem", &self.problem),
            ("mesh", &self.mesh),
            ("levels", &self.levels),
            ("degree", &self.degree),
            ("lambdas", &self.lambdas),
            ("tau", &self.tau),
            ("final_time", &self.final_time),
            ("stabilizer", &self.stabilizer),
            ("threads", &self.threads),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v).map_err(|e| Failure::Config(format!("--{}: {e}", key.replace('_', "-"))))?;
            }
        }
        if self.threads.is_none() && !config_sets_threads {
            if let Some(v) = env_threads() {
                cfg.set("threads", &v).map_err(|e| Failure::Config(format!("WG_BIOT_THREADS: {e}")))?;
            }
        }
        if let Some(out) = &self.out {
            cfg.out = Some(out.clone());
        }
        cfg.verbose |= self.verbose;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_or_print(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text)
        }
        None => io::stdout().write_all(text.as_bytes()),
    }
}

fn convergence(args: &StudyArgs) -> CliResult {
    let cfg = args.resolve(StudyConfig::default())?;
    let reports = run_study(&cfg)?;
    let csv: String = reports.iter().map(StudyReport::to_csv).collect::<Vec<_>>().join("\n");
    let plot: String = reports.iter().map(StudyReport::plot_data).collect();
    write_or_print(cfg.out.as_deref(), &csv)?;
    if let Some(out) = &cfg.out {
        fs::write(out.with_extension("dat"), plot)?;
    }
    Ok(())
}

fn lambda_tag(lambda: f64) -> String {
    format!("{lambda:e}").replace('.', "p")
}

fn locking(args: &StudyArgs) -> CliResult {
    let defaults = StudyConfig {
        problem: wg_biot::study::ProblemKind::Locking,
        levels: vec![4, 8, 16],
        lambdas: vec![1.0, 1e4, 1e8],
        ..Default::default()
    };
    let cfg = args.resolve(defaults)?;
    let reports = run_study(&cfg)?;
    let summary = spread_summary(&reports);
    match &cfg.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            for r in &reports {
                let tag = lambda_tag(r.lambda);
                fs::write(dir.join(format!("lambda_{tag}.csv")), r.to_csv())?;
                fs::write(dir.join(format!("lambda_{tag}.dat")), r.plot_data())?;
            }
            fs::write(dir.join("spread.csv"), &summary)?;
        }
        None => {
            let mut out = io::stdout().lock();
            for r in &reports {
                writeln!(out, "# lambda = {:e}", r.lambda)?;
                out.write_all(r.to_csv().as_bytes())?;
                writeln!(out)?;
            }
            writeln!(out, "# spread across lambda (max / min)")?;
            out.write_all(summary.as_bytes())?;
        }
    }
    Ok(())
}

fn check(args: &CheckArgs) -> CliResult {
    let threads = match args.threads.clone().or_else(env_threads) {
        Some(t) => t
            .trim()
            .parse::<usize>()
            .map_err(|_| Failure::Config(format!("bad thread count '{t}'")))?,
        None => 0,
    };
    let par = wg_biot::parallel::Parallelism::from_threads(threads);
    let outcomes = wg_biot::parallel::with_threads(threads, || checks::run_all(par))?;
    let mut failed = Vec::new();
    for o in &outcomes {
        let status = if o.passed() { "ok" } else { "FAILED" };
        println!("{status:<6} {:<40} {:.3e} (< {:.0e})", o.name, o.value, o.tolerance);
        if !o.passed() {
            failed.push(o.name.clone());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Numerical(format!("failing gate: {}", failed.join(", "))))
    }
}

fn dump_system(args: &StudyArgs) -> CliResult {
    let cfg = args.resolve(StudyConfig::default())?;
    let (_, label, mesh) = cfg
        .meshes()?
        .into_iter()
        .next()
        .ok_or_else(|| Failure::Config("no mesh level to export".into()))?;
    let par = cfg.parallelism();
    let coeffs = cfg.coefficients(cfg.lambdas[0]);
    let disc = build_spaces(&mesh, cfg.degree, par)?;
    let ops = build_element_ops(&disc, par)?;
    let forms = build_all_forms(&ops, &coeffs, par)?;
    let tau = TimeGrid::with_step(cfg.final_time, cfg.tau.tau(label))?.tau();
    let sys = assemble(&disc, &forms, &coeffs, tau, par)?;
    match &cfg.out {
        Some(prefix) => {
            if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            let mut m = io::BufWriter::new(fs::File::create(prefix.with_extension("mtx"))?);
            let mut s = io::BufWriter::new(fs::File::create(prefix.with_extension("meta"))?);
            sys.dump(&mut m, &mut s)?;
            m.flush()?;
            s.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            let mut meta = Vec::new();
            sys.dump(&mut out, &mut meta)?;
            io::stderr().write_all(&meta)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Convergence(a) => convergence(a),
        Command::Locking(a) => locking(a),
        Command::Check(a) => check(a),
        Command::DumpSystem(a) => dump_system(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}\n\nRun `wg-biot --help` for usage.");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
