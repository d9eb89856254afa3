use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use weingarten::cli::{self, SweepAxis};
use weingarten::config::RunConfig;
use weingarten::error::{exit, Error};
use weingarten::solver::JacobianMode;

const EXIT_CODES: &str = "\
Exit codes:
   0  success (verify: every check passed; sweep: >= 1 run succeeded, no invariant failed)
   1  verify or sweep checks failed
   2  usage or configuration error (including a missing config file)
   3  prescription violates an existence hypothesis (named in the message)
   4  gauge function not decreasing
   5  barrier bisection found no sign change
   6  height outside the profile domain or invalid warping profile
   7  output could not be written
  10  Newton stalled
  11  continuation stalled
  12  barrier violated by an accepted state
  13  principal curvatures left the admissible cone";

#[derive(Parser)]
#[command(name = "weingarten", version, about = "Prescribed Weingarten curvature graphs in warped products")]
#[command(after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Run configuration (TOML, or JSON by extension).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip validation of the prescription (manufactured solutions).
    #[arg(long = "unsafe")]
    unsafe_mode: bool,
    /// Seed for randomized checks.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    jacobian: Option<JacobianArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum JacobianArg {
    Analytic,
    Fd,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    #[value(name = "N")]
    N,
    Eps,
    R,
    STrace,
}

#[derive(Subcommand)]
enum Command {
    /// Validate, build the gauge and continue from s = 0 to s = 1.
    #[command(after_help = EXIT_CODES)]
    Solve(Common),
    /// Print the full pass/fail table of checks.
    #[command(after_help = EXIT_CODES)]
    Verify(Common),
    /// Repeat the solve along one axis and write sweep.csv.
    #[command(after_help = EXIT_CODES)]
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// Comma-separated axis values (ignored for s-trace).
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
}

fn load(c: &Common) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::parse_path(&c.config)?;
    if let Some(out) = &c.out {
        cfg.output = Some(out.clone());
    }
    if c.unsafe_mode {
        cfg.unsafe_mode = true;
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(j) = c.jacobian {
        cfg.solver.jacobian_mode = match j {
            JacobianArg::Analytic => JacobianMode::Analytic,
            JacobianArg::Fd => JacobianMode::FdColored,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Solve(c) => {
            let cfg = load(&c)?;
            let out = cli::cmd_solve(&cfg)?;
            cli::write_outputs(&out, &cfg.output_dir())?;
            println!("{}", out.summary);
            Ok(exit::OK)
        }
        Command::Verify(c) => {
            let cfg = load(&c)?;
            let table = cli::cmd_verify(&cfg)?;
            print!("{table}");
            if table.all_pass() {
                println!("verify: all {} checks passed", table.rows.len());
                Ok(exit::OK)
            } else {
                let names: Vec<&str> = table.failed().iter().map(|r| r.name.as_str()).collect();
                println!("verify: failed: {}", names.join("; "));
                Ok(exit::CHECKS_FAILED)
            }
        }
        Command::Sweep { common, axis, values } => {
            let cfg = load(&common)?;
            let axis = match axis {
                AxisArg::N => SweepAxis::N,
                AxisArg::Eps => SweepAxis::Eps,
                AxisArg::R => SweepAxis::R,
                AxisArg::STrace => SweepAxis::STrace,
            };
            let table = cli::cmd_sweep(&cfg, axis, &values)?;
            let dir = cfg.output_dir();
            std::fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
            let path = dir.join("sweep.csv");
            let file = File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            table.write_csv(&mut w)?;
            w.flush()?;
            table.write_csv(std::io::stdout().lock())?;
            for v in &table.violations {
                println!("invariant failed: {v}");
            }
            Ok(table.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
