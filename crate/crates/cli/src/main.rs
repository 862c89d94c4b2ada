use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use blowup_core::compactify::build_normalized;
use blowup_core::integrator::write_steps_csv;
use blowup_core::pipeline::{builtin_problem, validate_blowup, BlowUpCertificate, KindChoice, Problem};
use blowup_core::problem_file::parse_problem;
use blowup_core::report::{intersects, published_enclosure, table, Report};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Computer-assisted proofs of finite-time blow-up for polynomial ODEs.
#[derive(Parser, Debug)]
#[command(name = "blowup", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate one problem (`builtin:NAME` or a JSON problem file).
    Run(RunArgs),
    /// Run the benchmark suite against published enclosures.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Auto,
    Poincare,
    Parabolic,
}

impl From<Kind> for KindChoice {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Auto => KindChoice::Auto,
            Kind::Poincare => KindChoice::Poincare,
            Kind::Parabolic => KindChoice::Parabolic,
        }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    problem: String,
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    #[arg(long)]
    tau_budget: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Write the JSON report here (`-` for stdout instead of the text table).
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    steps_csv: Option<PathBuf>,
    /// Comma-separated initial guess for the direction of blow-up.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    seed_direction: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long)]
    n: Option<String>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Extra heat-equation sizes on top of 4 and 6.
    #[arg(long, value_delimiter = ',')]
    heat_n: Vec<usize>,
    /// Restrict to these problems (ex1, ex2, ex3, riccati, heat3, heat2).
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<String>>,
    #[arg(long)]
    json: Option<PathBuf>,
}

struct Usage(String);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::{DisplayHelp, DisplayVersion};
            let code = if matches!(e.kind(), DisplayHelp | DisplayVersion) { 0 } else { 1 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Bench(args) => bench(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn load(args: &RunArgs) -> Result<Problem, Usage> {
    let params: Vec<(&str, &str)> = [("a", &args.a), ("b", &args.b), ("c", &args.c), ("n", &args.n)]
        .into_iter()
        .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
        .collect();
    let mut p = match args.problem.strip_prefix("builtin:") {
        Some(name) => builtin_problem(name, &params).map_err(|e| Usage(e.to_string()))?,
        None => {
            if !params.is_empty() {
                return Err(Usage("--a/--b/--c/--n only apply to builtin problems".into()));
            }
            parse_problem(&args.problem).map_err(|e| Usage(e.to_string()))?
        }
    };
    if let Some(k) = args.kind {
        p.kind = k.into();
    }
    let c = &mut p.controls;
    if let Some(t) = args.tau_budget {
        positive("--tau-budget", t)?;
        c.tau_budget = t;
    }
    if let Some(e) = args.epsilon {
        positive("--epsilon", e)?;
        c.epsilon = Some(e);
    }
    if let Some(o) = args.order {
        if !(2..=60).contains(&o) {
            return Err(Usage(format!("--order {o} outside 2..=60")));
        }
        c.integrator.order = o;
    }
    if let Some(t) = args.tol {
        positive("--tol", t)?;
        c.integrator.tol = t;
    }
    if let Some(s) = &args.seed_direction {
        if s.len() != p.field.dim() {
            return Err(Usage(format!("--seed-direction needs {} entries", p.field.dim())));
        }
        c.seed_direction = Some(s.clone());
    }
    Ok(p)
}

fn positive(flag: &str, v: f64) -> Result<(), Usage> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Usage(format!("{flag} must be positive")))
    }
}

fn run(args: RunArgs) -> Result<u8, Usage> {
    let p = load(&args)?;
    let cert = validate_blowup(&p);
    let report = Report::from_certificate(&cert);
    match args.json.as_deref() {
        Some(path) if path.as_os_str() == "-" => println!("{}", report.to_json()),
        Some(path) => {
            std::fs::write(path, report.to_json() + "\n").map_err(|e| Usage(format!("{}: {e}", path.display())))?;
            print!("{}", report.to_text());
        }
        None => print!("{}", report.to_text()),
    }
    if let Some(path) = &args.steps_csv {
        write_csv(&p, &cert, path)?;
    }
    Ok(if cert.verdict.is_validated() { 0 } else { 2 })
}

fn write_csv(p: &Problem, cert: &BlowUpCertificate, path: &PathBuf) -> Result<(), Usage> {
    let (Some(kind), Some(traj)) = (cert.kind, cert.trajectory.as_ref()) else {
        eprintln!("note: no trajectory to write");
        return Ok(());
    };
    let sys = build_normalized(&p.field, kind).map_err(|e| Usage(e.to_string()))?;
    let file = File::create(path).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
    write_steps_csv(&sys, traj, BufWriter::new(file)).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

const SUITE: [&str; 6] = ["ex1", "ex2", "ex3", "riccati", "heat3", "heat2"];

fn bench(args: BenchArgs) -> Result<u8, Usage> {
    let only = match &args.only {
        Some(list) => {
            let list: Vec<&str> = list.iter().map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
            if list.is_empty() {
                return Err(Usage("empty suite selection".into()));
            }
            if let Some(bad) = list.iter().find(|s| !SUITE.contains(s)) {
                return Err(Usage(format!("unknown suite entry `{bad}`")));
            }
            list
        }
        None => SUITE.to_vec(),
    };
    let mut sizes = vec![4, 6];
    for &n in &args.heat_n {
        if n < 2 {
            return Err(Usage(format!("--heat-n {n} must be at least 2")));
        }
        if !sizes.contains(&n) {
            sizes.push(n);
        }
    }
    let mut rows = Vec::new();
    for name in SUITE.iter().filter(|s| only.contains(s)) {
        if name.starts_with("heat") {
            for n in &sizes {
                rows.push(builtin_problem(name, &[("n", &n.to_string())]).expect("builtin"));
            }
        } else {
            rows.push(builtin_problem(name, &[]).expect("builtin"));
        }
    }
    let mut reports = Vec::new();
    let mut cells = Vec::new();
    let mut all_ok = true;
    for p in &rows {
        let cert = validate_blowup(p);
        let reference = published_enclosure(&p.name);
        let check = match (&reference, cert.t_max) {
            (Some(r), Some(t)) => intersects(r, t),
            _ => false,
        };
        all_ok &= check;
        let report = Report::from_certificate(&cert);
        cells.push(vec![
            p.name.clone(),
            report.kind.clone().unwrap_or_else(|| "-".into()),
            report.stage.as_ref().map_or_else(|| report.verdict.clone(), |s| format!("Failed({s})")),
            report.t_max.as_ref().map_or_else(|| "-".into(), |e| format!("[{}, {}]", e[0], e[1])),
            report.t_max_width.map_or_else(|| "-".into(), |w| format!("{w:.2e}")),
            reference.as_ref().map_or_else(|| "-".into(), |e| format!("[{}, {}]", e[0], e[1])),
            if check { "yes".into() } else { "no".into() },
            format!("{:.2}s", report.timings.total_s),
        ]);
        eprintln!("{} done in {:.2}s", p.name, report.timings.total_s);
        reports.push(report);
    }
    print!(
        "{}",
        table(&["problem", "kind", "verdict", "t_max", "width", "published", "intersects", "time"], &cells)
    );
    if let Some(path) = &args.json {
        let text = serde_json::to_string_pretty(&reports).expect("reports serialize");
        std::fs::write(path, text + "\n").map_err(|e| Usage(format!("{}: {e}", path.display())))?;
    }
    Ok(if all_ok { 0 } else { 2 })
}
