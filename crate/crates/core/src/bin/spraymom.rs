use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use spraymom::io::{config_to_string, format_summary, parse_config, write_run};
use spraymom::simulator::{compare_models_2d, convergence_study, run_case, CaseConfig, ErrorReport};
use spraymom::transport::Order;
use spraymom::Error;

/// Environment variable that overrides the output directory of a case file.
const OUT_ENV: &str = "SPRAYMOM_OUT";

#[derive(Parser)]
#[command(name = "spraymom", version, about = "Fractional size-moment spray simulations")]
struct Cli {
    /// Log progress (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunOpts {
    config: PathBuf,
    /// Output directory; overrides SPRAYMOM_OUT and the case file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for cell and sweep parallelism; 1 gives the reference ordering.
    #[arg(long)]
    threads: Option<usize>,
    /// Recorded in the summary; the cases themselves are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Run a case and write its snapshots and summary.
    Run(RunOpts),
    /// Fit L1 convergence orders of the 1D transport case for both scheme orders.
    Convergence {
        #[command(flatten)]
        opts: RunOpts,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256,512")]
        grids: Vec<usize>,
    },
    /// Compare fractional and integer-moment volume fractions on the 2D case.
    Compare2d(RunOpts),
    /// Validate a case file and print it with all defaults filled in.
    Check { config: PathBuf },
}

fn out_dir(opts: &RunOpts, cfg: &CaseConfig) -> PathBuf {
    opts.out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(&cfg.output.directory))
}

fn setup(opts: &RunOpts) -> Result<CaseConfig, Error> {
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidArgument(format!("cannot start {n} threads: {e}")))?;
    }
    parse_config(&opts.config)
}

fn write_summary(dir: &Path, report: &ErrorReport, header: Vec<(String, String)>) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    let text = format_summary(report, &header);
    std::fs::write(dir.join("summary.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Check { config } => {
            let cfg = parse_config(&config)?;
            print!("{}", config_to_string(&cfg)?);
        }
        Command::Run(opts) => {
            let cfg = setup(&opts)?;
            let dir = out_dir(&opts, &cfg);
            let out = run_case(&cfg)?;
            write_run(&out, &dir)?;
            let mut text = std::fs::read_to_string(dir.join("summary.txt"))?;
            text.push_str(&format!("seed = {}\n", opts.seed));
            std::fs::write(dir.join("summary.txt"), &text)?;
            print!("{text}");
        }
        Command::Convergence { opts, grids } => {
            let cfg = setup(&opts)?;
            let dir = out_dir(&opts, &cfg);
            let mut report = ErrorReport::default();
            let mut header = vec![("case_id".to_string(), cfg.case_id.name().to_string())];
            for order in [Order::First, Order::Second] {
                let mut c = cfg.clone();
                c.schemes.transport_order = order;
                let r = convergence_study(&c, &grids)?;
                let tag = u8::from(order);
                for (nx, e) in &r.l1_errors {
                    report.scalars.push((format!("l1_error_order{tag}_nx{nx}"), *e));
                }
                if let Some(p) = r.fitted_order {
                    report.scalars.push((format!("fitted_order_{tag}"), p));
                }
            }
            header.push(("grids".into(), format!("{grids:?}")));
            header.push(("seed".into(), opts.seed.to_string()));
            write_summary(&dir, &report, header)?;
        }
        Command::Compare2d(opts) => {
            let cfg = setup(&opts)?;
            let dir = out_dir(&opts, &cfg);
            let cmp = compare_models_2d(&cfg)?;
            write_run(&cmp.fractional, &dir.join("fractional"))?;
            write_run(&cmp.integer, &dir.join("integer"))?;
            let mut report = ErrorReport::default();
            report.scalars.push(("relative_l1_alpha_difference".into(), cmp.relative_l1_difference));
            for (name, out) in [("fractional", &cmp.fractional), ("integer", &cmp.integer)] {
                for (k, v) in &out.report.scalars {
                    if k != "relative_l1_alpha_difference" {
                        report.scalars.push((format!("{name}_{k}"), *v));
                    }
                }
            }
            let header = vec![
                ("case_id".to_string(), cfg.case_id.name().to_string()),
                ("dt".to_string(), format!("{:.16e}", cmp.fractional.dt)),
                ("seed".to_string(), opts.seed.to_string()),
            ];
            write_summary(&dir, &report, header)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e.root() {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
