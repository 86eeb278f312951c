//! Command-line surface for the mixed-ancilla error-correction study.
//!
//! Subcommands emit the per-code fidelity coefficient tables (JSON),
//! tolerable-initialization-noise curves (CSV), a property-suite verification
//! report, encoder-extension optimization reports, and a one-shot `report`
//! that reproduces every table and curve into a directory.
//!
//! Exit codes: 0 success, 1 validation error, 2 property-suite failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use augqec::analysis::{linear_grid, CodeFidelity};
use augqec::codes::{all_code_labels, code_by_label, CodeSpec};
use augqec::optimize;
use augqec::verify;

#[derive(Parser)]
#[command(
    name = "augqec",
    about = "Channel-fidelity analysis of error-correcting codes with imperfectly initialized ancillas",
    version
)]
struct Cli {
    /// Worker threads for enumeration and sweeps (default: all cores).
    /// Results are bit-identical regardless of this setting.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the fidelity coefficients c_k(q) of a code.
    Coeffs(CoeffsArgs),
    /// Sweep the largest tolerable initialization parameter q*(p) over a
    /// p-grid.
    #[command(name = "tolerable-q")]
    TolerableQ(TolerableQArgs),
    /// Run the property suites (oracle equivalence, dominance, constant-term
    /// and purity checks) and report pass/fail per property.
    Verify(VerifyArgs),
    /// Optimize the pattern-controlled encoder extension and compare with
    /// the augmented code.
    Optimize(OptimizeArgs),
    /// Write every coefficient table and tolerable-q curve into a directory.
    Report(ReportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AugmentChoice {
    None,
    On,
    Top,
    Full,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct CodeSelect {
    /// Code label: rep3, rep5, rep7, rep9, perfect5, concat3 (or a full
    /// label like rep3+aug, concat3-top).
    #[arg(long)]
    code: String,

    /// Augmentation: none, on (single-level codes), top or full (concat3).
    #[arg(long, value_enum)]
    augment: Option<AugmentChoice>,
}

impl CodeSelect {
    fn resolve(&self) -> Result<CodeSpec, String> {
        let label = match (self.code.as_str(), self.augment) {
            ("concat3", choice) => match choice.unwrap_or(AugmentChoice::None) {
                AugmentChoice::None => "concat3-unaug".to_string(),
                AugmentChoice::Top => "concat3-top".to_string(),
                AugmentChoice::Full => "concat3-full".to_string(),
                AugmentChoice::On => {
                    return Err("concat3 takes --augment top or full".into());
                }
            },
            (base, None) | (base, Some(AugmentChoice::None)) => base.to_string(),
            (base, Some(AugmentChoice::On)) => format!("{base}+aug"),
            (base, Some(_)) => {
                return Err(format!("--augment top/full only applies to concat3, not {base}"));
            }
        };
        code_by_label(&label).map_err(|e| {
            format!("{e}; known labels: {}", all_code_labels().join(", "))
        })
    }
}

#[derive(Args)]
struct CoeffsArgs {
    #[command(flatten)]
    select: CodeSelect,

    /// Highest coefficient order to emit (defaults to the code's p-degree).
    #[arg(long)]
    max_order: Option<u32>,

    #[arg(long, value_enum, default_value = "json")]
    format: Format,

    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TolerableQArgs {
    #[command(flatten)]
    select: CodeSelect,

    /// Grid specification start:stop:count with 0 < start ≤ stop ≤ 1.
    #[arg(long)]
    p_grid: String,

    #[arg(long, value_enum, default_value = "csv")]
    format: Format,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Restrict the suite to a comma-separated list of code labels.
    #[arg(long, value_delimiter = ',')]
    codes: Vec<String>,

    /// Test hook: swap in a deliberately corrupted code; the suite must fail.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    select: CodeSelect,

    #[arg(long)]
    p: f64,

    #[arg(long)]
    q: f64,

    /// Seeded random restarts run in addition to the identity and
    /// inverse-recovery starting points.
    #[arg(long, default_value_t = 8)]
    restarts: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Directory for the emitted tables and curves.
    #[arg(long)]
    out_dir: PathBuf,

    /// Points in each tolerable-q curve over (1e-4, 0.3].
    #[arg(long, default_value_t = 50)]
    grid_points: usize,
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid {spec:?} is not start:stop:count"));
    }
    let start: f64 = parts[0].parse().map_err(|_| "bad grid start".to_string())?;
    let stop: f64 = parts[1].parse().map_err(|_| "bad grid stop".to_string())?;
    let count: usize = parts[2].parse().map_err(|_| "bad grid count".to_string())?;
    if !(start > 0.0 && start <= stop && stop <= 1.0) {
        return Err(format!("grid bounds must satisfy 0 < start ≤ stop ≤ 1, got {spec:?}"));
    }
    if count == 0 {
        return Err("grid count must be positive".into());
    }
    Ok(linear_grid(start, stop, count))
}

fn write_output(out: Option<&Path>, contents: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, contents)
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            std::io::stdout()
                .write_all(contents.as_bytes())
                .map_err(|e| format!("stdout: {e}"))
        }
    }
}

fn cmd_coeffs(args: &CoeffsArgs) -> Result<(), String> {
    let code = args.select.resolve()?;
    let cf = CodeFidelity::new(code).map_err(|e| e.to_string())?;
    let max_order = args
        .max_order
        .unwrap_or_else(|| cf.poly().degree_p());
    let table = cf.coefficient_table(max_order).map_err(|e| e.to_string())?;
    let rendered = match args.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&table.to_json())
                .map_err(|e| e.to_string())?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("k,q_pow,coeff,code\n");
            for (k, ck) in &table.rows {
                for term in ck.canonical_terms() {
                    s.push_str(&format!("{k},{},{},{}\n", term.q_pow, term.coeff, table.code));
                }
            }
            s
        }
    };
    write_output(args.out.as_deref(), &rendered)
}

fn cmd_tolerable_q(args: &TolerableQArgs) -> Result<(), String> {
    let grid = parse_grid(&args.p_grid)?;
    let code = args.select.resolve()?;
    let cf = CodeFidelity::new(code).map_err(|e| e.to_string())?;
    let curve = cf.curve_sweep(&grid).map_err(|e| e.to_string())?;
    let rendered = match args.format {
        Format::Csv => curve.to_csv(),
        Format::Json => {
            let samples: Vec<serde_json::Value> = curve
                .samples
                .iter()
                .map(|&(p, qs)| serde_json::json!({"p": p, "q_star": qs}))
                .collect();
            let mut s = serde_json::to_string_pretty(&serde_json::json!({
                "code": curve.code,
                "resolution": curve.resolution,
                "samples": samples,
            }))
            .map_err(|e| e.to_string())?;
            s.push('\n');
            s
        }
    };
    write_output(args.out.as_deref(), &rendered)
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool, String> {
    let report = verify::run_suite(&args.codes, args.inject_fault).map_err(|e| e.to_string())?;
    print!("{}", report.render());
    Ok(report.all_passed())
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<(), String> {
    if args.restarts == 0 {
        return Err("--restarts must be at least 1".into());
    }
    let code = args.select.resolve()?;
    if code.is_augmented() {
        return Err("optimize expects an unaugmented code (the search covers the augmentation slot)".into());
    }
    let augmented = augqec::codes::augment(&code).map_err(|e| e.to_string())?;
    let augmented_fidelity = augqec::engine::fidelity_polynomial(&augmented)
        .map_err(|e| e.to_string())?
        .eval(args.p, args.q);
    let outcome = optimize::optimize(&code, args.p, args.q, args.restarts, args.seed)
        .map_err(|e| e.to_string())?;
    let angles: Vec<serde_json::Value> = outcome
        .family
        .angles()
        .iter()
        .enumerate()
        .map(|(s, &[alpha, beta, gamma])| {
            serde_json::json!({
                "syndrome": format!("{s:0width$b}", width = code.n_ancillas()),
                "alpha": alpha,
                "beta": beta,
                "gamma": gamma,
            })
        })
        .collect();
    let mut rendered = serde_json::to_string_pretty(&serde_json::json!({
        "code": code.label(),
        "p": args.p,
        "q": args.q,
        "seed": args.seed,
        "restarts": args.restarts,
        "best_fidelity": outcome.fidelity,
        "augmented_fidelity": augmented_fidelity,
        "gap_to_augmented": augmented_fidelity - outcome.fidelity,
        "per_start_fidelity": outcome.per_start,
        "evaluations": outcome.evaluations,
        "best_angles": angles,
    }))
    .map_err(|e| e.to_string())?;
    rendered.push('\n');
    write_output(args.out.as_deref(), &rendered)
}

fn cmd_report(args: &ReportArgs) -> Result<(), String> {
    if args.grid_points == 0 {
        return Err("--grid-points must be positive".into());
    }
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| format!("cannot create {}: {e}", args.out_dir.display()))?;

    let tables: [(&str, &[&str]); 3] = [
        (
            "table_repetition.json",
            &["rep3", "rep3+aug", "rep5", "rep5+aug", "rep7", "rep7+aug", "rep9", "rep9+aug"],
        ),
        ("table_perfect.json", &["perfect5", "perfect5+aug"]),
        (
            "table_concatenated.json",
            &["concat3-unaug", "concat3-top", "concat3-full"],
        ),
    ];
    let curves: [(&str, &[&str]); 3] = [
        (
            "curves_repetition.csv",
            &["rep3", "rep3+aug", "rep5", "rep5+aug", "rep7", "rep7+aug", "rep9", "rep9+aug"],
        ),
        ("curves_perfect.csv", &["perfect5", "perfect5+aug"]),
        (
            "curves_concatenated.csv",
            &["concat3-unaug", "concat3-top", "concat3-full"],
        ),
    ];
    let grid = linear_grid(1e-4, 0.3, args.grid_points);

    for (file, labels) in tables {
        let mut entries = Vec::new();
        for label in labels {
            let cf = CodeFidelity::new(code_by_label(label).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let table = cf
                .coefficient_table(cf.poly().degree_p().min(1))
                .map_err(|e| e.to_string())?;
            entries.push(table.to_json());
        }
        let mut rendered =
            serde_json::to_string_pretty(&serde_json::Value::Array(entries))
                .map_err(|e| e.to_string())?;
        rendered.push('\n');
        write_output(Some(&args.out_dir.join(file)), &rendered)?;
        println!("wrote {file}");
    }
    for (file, labels) in curves {
        let mut csv = String::from("p,q_star,code\n");
        for label in labels {
            let cf = CodeFidelity::new(code_by_label(label).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let curve = cf.curve_sweep(&grid).map_err(|e| e.to_string())?;
            for (p, qs) in &curve.samples {
                csv.push_str(&format!("{p},{qs},{}\n", curve.code));
            }
        }
        write_output(Some(&args.out_dir.join(file)), &csv)?;
        println!("wrote {file}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not errors.
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = err.print();
                return ExitCode::SUCCESS;
            }
            let _ = err.print();
            return ExitCode::from(1);
        }
    };

    if let Some(workers) = cli.workers {
        if workers == 0 {
            eprintln!("--workers must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            eprintln!("cannot configure {workers} workers: {e}");
            return ExitCode::from(1);
        }
    }

    let result = match &cli.command {
        Command::Coeffs(args) => cmd_coeffs(args),
        Command::TolerableQ(args) => cmd_tolerable_q(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Report(args) => cmd_report(args),
        Command::Verify(args) => {
            return match cmd_verify(args) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(2),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
