use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use superres_cli::figures::{run_figure, FigureOptions};
use superres_cli::scenario::load_scenario;
use superres_cli::simulate::run_simulate;
use superres_cli::validate::{run_validate, Fault, Preset};
use superres_cli::{CliError, CliResult};
use superres_core::bounds::{in_figure_units, van_trees_parts};
use superres_core::{Frame, OpticalConfig, Param, ParamPoint};

#[derive(Parser)]
#[command(
    name = "superres",
    version,
    about = "Precision limits for two partially coherent point sources"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the dataset behind one figure as CSV.
    Figure {
        /// fig1 .. fig8
        id: String,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        /// Grid points along the swept axis.
        #[arg(long)]
        points: Option<usize>,
        /// Coherence values for the legend, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        gammas: Option<Vec<f64>>,
        /// Fixed separation in units of σ, where the figure holds it fixed.
        #[arg(long)]
        s: Option<f64>,
        /// Fixed relative intensity, where the figure holds it fixed.
        #[arg(long)]
        q: Option<f64>,
        /// Write to this file instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Cross-check closed forms against the oracle; exit 1 on any failure.
    Validate {
        #[arg(long, default_value = "default")]
        preset: String,
        /// Where to write the per-entry report.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
    /// Sample detection records for a scenario and fit them.
    Simulate {
        scenario: PathBuf,
        /// Write the records here; the summary then goes to stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Print the van Trees information matrix at one point.
    Bound {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        gr: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        gi: f64,
        /// geometric, centroid or a number in [0, 1].
        #[arg(long, default_value = "geometric")]
        alpha: String,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
    },
}

fn emit(text: &str, output: Option<&PathBuf>) -> CliResult<()> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn bound(p: ParamPoint, frame: Frame, cfg: OpticalConfig) -> CliResult<String> {
    let cfg = cfg.with_frame(frame, &p);
    let parts = van_trees_parts(&p, &cfg)?;
    let mut out = format!(
        "# version: {}\n# point: {p}\n# alpha: {frame} ({})\n# delta: {}\n# sigma: {}\n",
        superres_cli::VERSION,
        cfg.alpha,
        cfg.delta,
        cfg.sigma
    );
    out.push_str("row,col,quantum,classical,total,total_units\n");
    for a in Param::ALL {
        for b in Param::ALL {
            let (i, j) = (a.index(), b.index());
            let total = parts.total.entries[(i, j)];
            out.push_str(&format!(
                "{},{},{:e},{:e},{:e},{:e}\n",
                a.name(),
                b.name(),
                parts.quantum[(i, j)],
                parts.classical[(i, j)],
                total,
                in_figure_units(total, &cfg)
            ));
        }
    }
    Ok(out)
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::Figure {
            id,
            delta,
            sigma,
            points,
            gammas,
            s,
            q,
            output,
        } => {
            let opts = FigureOptions {
                delta,
                sigma,
                points,
                gammas,
                s,
                q,
            };
            let ds = run_figure(&id, &opts)?;
            for row in ds.rows.iter().filter(|r| r.values.is_none()) {
                eprintln!("{id}: {:?} {}", row.key, row.note);
            }
            emit(&ds.to_csv(), output.as_ref())?;
        }
        Command::Validate {
            preset,
            report,
            inject_fault,
        } => {
            let fault = inject_fault.as_deref().map(Fault::parse).transpose()?;
            let rep = run_validate(Preset::parse(&preset)?, fault)?;
            if let Some(path) = &report {
                std::fs::write(path, rep.to_csv())?;
            }
            for c in &rep.checks {
                println!("{} {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
            }
            println!("{} report rows", rep.rows.len());
            if !rep.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Simulate { scenario, output } => {
            let sc = load_scenario(&scenario)?;
            let out = run_simulate(&sc)?;
            match output {
                Some(path) => {
                    std::fs::write(&path, out.records_csv(&sc))?;
                    print!("{}", out.summary_text());
                }
                None => {
                    print!("{}", out.records_csv(&sc));
                    eprint!("{}", out.summary_text());
                }
            }
        }
        Command::Bound {
            s,
            q,
            gr,
            gi,
            alpha,
            delta,
            sigma,
        } => {
            let frame = Frame::parse(&alpha).ok_or_else(|| {
                CliError::Usage(format!(
                    "--alpha: expected geometric, centroid or a number, got '{alpha}'"
                ))
            })?;
            let std = OpticalConfig::standard();
            let cfg = OpticalConfig::new(sigma.unwrap_or(std.sigma), delta.unwrap_or(std.delta), 0.5)?;
            let p = ParamPoint::new(s, q, gr, gi).map_err(|e| CliError::Usage(e.to_string()))?;
            print!("{}", bound(p, frame, cfg)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
