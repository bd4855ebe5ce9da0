use btzone::asymptotics::FitMode;
use btzone_pipeline::analysis::{constant_check, correlation, extrapolability, stability, CoefficientFile, Loaded, COEFFICIENTS_FILE};
use btzone_pipeline::dataset::DATASET_FILE;
use btzone_pipeline::report::{extrapolability_csv, report, stability_csv, write_section};
use btzone_pipeline::scan::scan_widths;
use btzone_pipeline::{Method, PipelineError, ScanConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "btzone", version, about = "Homoclinic-zone widths near Bogdanov-Takens points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute widths on a node grid and append them to DIR/widths.csv.
    Scan(ScanArgs),
    /// Interpolate the dataset and write DIR/coefficients.txt.
    Fit(FitArgs),
    /// Run one validation protocol on the dataset.
    Validate(ValidateArgs),
    /// Write the coefficient table, method comparison and report.json.
    Report {
        #[arg(long, default_value = "run")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ScanArgs {
    /// TOML file with any of the flag names as keys (dashes become underscores).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    /// Scan-coordinate range `c:d`.
    #[arg(long)]
    range: Option<String>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Complex-approach strip offset as a fraction of the strip half-width.
    #[arg(long)]
    delta_policy: Option<f64>,
    #[arg(long)]
    digits_target: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    resume: bool,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ScanArgs {
    fn config(self) -> Result<ScanConfig, PipelineError> {
        let mut c = match &self.config {
            Some(p) => ScanConfig::load(p)?,
            None => ScanConfig::default(),
        };
        if let Some(f) = self.family {
            if f.eq_ignore_ascii_case("henon") {
                c.gamma = None;
            }
            c.family = f;
        }
        if self.gamma.is_some() {
            c.gamma = self.gamma;
        }
        c.range = self.range.unwrap_or(c.range);
        c.nodes = self.nodes.unwrap_or(c.nodes);
        c.method = self.method.unwrap_or(c.method);
        c.delta_policy = self.delta_policy.unwrap_or(c.delta_policy);
        c.digits_target = self.digits_target.unwrap_or(c.digits_target);
        c.out = self.out.unwrap_or(c.out);
        c.resume |= self.resume;
        c.workers = self.workers.unwrap_or(c.workers);
        c.seed = self.seed.unwrap_or(c.seed);
        Ok(c)
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, default_value = "run")]
    out: PathBuf,
    /// Truncation order; the basis has 3 ell / 2 + 1 (Dulac) or ell + 1 terms.
    /// Defaults to one term per node.
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    least_squares: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Protocol {
    Extrapolability,
    Stability,
    Constant,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value = "run")]
    out: PathBuf,
    #[arg(long, value_enum)]
    protocol: Protocol,
    #[arg(long)]
    ell: Option<usize>,
    /// Extrapolability: nodes in the fit window (default: half).
    #[arg(long)]
    fit_nodes: Option<usize>,
    /// Extrapolability: number of kept terms.
    #[arg(long)]
    truncation: Option<usize>,
    /// Stability: perturbation exponents N.
    #[arg(long, value_delimiter = ',', default_value = "20,40,60")]
    digits: Vec<u32>,
    #[arg(long, default_value_t = 8)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Constant: reference value of the splitting constant.
    #[arg(long)]
    reference: Option<String>,
}

fn fit_cmd(a: FitArgs) -> Result<(), PipelineError> {
    let loaded = Loaded::open(&a.out.join(DATASET_FILE))?;
    let mode = if a.least_squares { FitMode::LeastSquares } else { FitMode::Interpolate };
    let basis = loaded.basis(a.ell)?;
    let coeffs = loaded.fit(basis, mode)?;
    let file = CoefficientFile::from_fit(&loaded, &coeffs, mode);
    file.store(&a.out.join(COEFFICIENTS_FILE))?;
    print!("{}", file.table());
    eprintln!(
        "{} terms, max node residual {:.3e}, log10 condition {:.1}",
        coeffs.alpha.len(),
        coeffs.max_residual.to_f64(),
        coeffs.log10_condition
    );
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<(), PipelineError> {
    std::fs::write(path, text).map_err(|source| PipelineError::Io { path: path.into(), source })
}

fn validate_cmd(a: ValidateArgs) -> Result<(), PipelineError> {
    let loaded = Loaded::open(&a.out.join(DATASET_FILE))?;
    match a.protocol {
        Protocol::Extrapolability => {
            let n = loaded.data.nodes.len();
            let fit_nodes = a.fit_nodes.unwrap_or(n / 2);
            let truncation = a.truncation.unwrap_or(fit_nodes / 2);
            let sec = extrapolability(&loaded, fit_nodes, truncation)?;
            write(&a.out.join("extrapolability.csv"), &extrapolability_csv(&sec))?;
            println!(
                "slope {:.3} vs {:.3} expected from the omitted {} term ({:.1}% off)",
                sec.slope,
                sec.expected,
                sec.omitted,
                100.0 * sec.relative_error
            );
            write_section(&a.out, "extrapolability", &sec)
        }
        Protocol::Stability => {
            let basis = loaded.basis(a.ell)?;
            let sec = stability(&loaded, basis, &a.digits, a.trials, a.seed)?;
            write(&a.out.join("stability.csv"), &stability_csv(&sec))?;
            let mid = basis / 2;
            let series = sec.series(mid);
            for (n, d) in &series {
                println!("N={n:.0}: {} matched digits {d:.1}", loaded.sequence.coefficient_name(mid));
            }
            if series.len() > 1 {
                println!("correlation {:.4}", correlation(&series));
            }
            write_section(&a.out, "stability", &sec)
        }
        Protocol::Constant => {
            let reference = a
                .reference
                .ok_or_else(|| PipelineError::Config("--reference is required for the constant check".into()))?;
            let sec = constant_check(&loaded, loaded.basis(a.ell)?, &reference)?;
            println!("constant term {} matches {} to {:.2} digits", sec.fitted, sec.reference, sec.matched_digits);
            if let Some((fit, exact, d)) = &sec.first_log {
                println!("first log coefficient {fit} vs closed form {exact}: {d:.2} digits");
            }
            write_section(&a.out, "constant", &sec)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, PipelineError> {
    match cli.command {
        Command::Scan(a) => {
            let cfg = a.config()?;
            let s = scan_widths(&cfg)?;
            eprintln!(
                "{} nodes computed, {} failed, {} already present; {} rows in {}",
                s.records.len(),
                s.failed,
                s.skipped,
                s.dataset.rows.len(),
                cfg.out.join(DATASET_FILE).display()
            );
            Ok(if s.failed > 0 { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
        Command::Fit(a) => fit_cmd(a).map(|_| ExitCode::SUCCESS),
        Command::Validate(a) => validate_cmd(a).map(|_| ExitCode::SUCCESS),
        Command::Report { out } => {
            let r = report(&out)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
            Ok(if r.nodes_failed > 0 { ExitCode::from(1) } else { ExitCode::SUCCESS })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("btzone: {e}");
            ExitCode::from(2)
        }
    }
}
