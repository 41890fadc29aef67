use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use weighted_dvr::harness::{self, exit_code_for, load_config, Subcommand, EXIT_USAGE};

#[derive(Parser)]
#[command(
    name = "wdvr",
    version,
    about = "Validators and solvers for weighted power-series rings"
)]
struct Cli {
    /// validate-family | divide | dbar | psh-check | approx | suite
    subcommand: String,
    #[command(flatten)]
    flags: Flags,
}

/// Each flag maps to the config key of the same name.
#[derive(Args, Default)]
struct Flags {
    /// Flat key=value config file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    kexp: Option<String>,
    #[arg(long = "level-fn")]
    level_fn: Option<String>,
    #[arg(long = "level-scale")]
    level_scale: Option<String>,
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long = "J")]
    scan_bound: Option<String>,
    /// a,b,c,d
    #[arg(long, allow_hyphen_values = true)]
    block: Option<String>,
    #[arg(long = "grid-n")]
    grid_n: Option<String>,
    #[arg(long = "trunc-J")]
    trunc: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long = "max-iter")]
    max_iter: Option<String>,
    #[arg(long = "j-max")]
    j_max: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    blocks: Option<String>,
    #[arg(long = "block-step")]
    block_step: Option<String>,
    #[arg(long)]
    input: Option<String>,
    /// zero | one | path to a grid-field file (.bin for binary)
    #[arg(long)]
    omega: Option<String>,
    #[arg(long)]
    f: Option<String>,
    #[arg(long)]
    g: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long = "x-cap")]
    x_cap: Option<String>,
    #[arg(long = "t-cap")]
    t_cap: Option<String>,
    /// text | binary
    #[arg(long)]
    format: Option<String>,
    #[arg(long = "out-dir")]
    out_dir: Option<String>,
}

impl Flags {
    fn overrides(&self) -> Vec<(String, String)> {
        let pairs = [
            ("family", &self.family),
            ("gamma", &self.gamma),
            ("kexp", &self.kexp),
            ("level-fn", &self.level_fn),
            ("level-scale", &self.level_scale),
            ("h", &self.h),
            ("k", &self.k),
            ("J", &self.scan_bound),
            ("block", &self.block),
            ("grid-n", &self.grid_n),
            ("trunc-J", &self.trunc),
            ("tol", &self.tol),
            ("max-iter", &self.max_iter),
            ("j-max", &self.j_max),
            ("seed", &self.seed),
            ("m", &self.m),
            ("epsilon", &self.epsilon),
            ("blocks", &self.blocks),
            ("block-step", &self.block_step),
            ("input", &self.input),
            ("omega", &self.omega),
            ("f", &self.f),
            ("g", &self.g),
            ("rho", &self.rho),
            ("x-cap", &self.x_cap),
            ("t-cap", &self.t_cap),
            ("format", &self.format),
            ("out-dir", &self.out_dir),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli
        .subcommand
        .parse::<Subcommand>()
        .and_then(|sub| {
            let text = cli.flags.config.as_ref().map(std::fs::read_to_string).transpose()?;
            load_config(sub, text.as_deref(), &cli.flags.overrides())
        })
        .and_then(|config| harness::run(&config));
    match result {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            for row in &outcome.rows {
                // a closed pipe should not turn a finished run into a panic
                let _ = writeln!(
                    out,
                    "{:<32} {:<12} {:<40} {:e}",
                    row.check_id, row.verdict, row.witness, row.slack
                );
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("wdvr: {e}");
            let code = if matches!(e, weighted_dvr::Error::Io(_)) {
                EXIT_USAGE
            } else {
                exit_code_for(&e)
            };
            ExitCode::from(code as u8)
        }
    }
}
