use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use magbbm::experiment::{self, Command, Diagnostic, ExperimentConfig, EXIT_INVALID, EXIT_OK};
use magbbm::harness::FitModel;

#[derive(Parser, Debug)]
#[command(name = "magbbm", version, about = "Magnetic fractional energies and their s -> 1 limit")]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Sphere-rule seed in hex, e.g. 0x5eed.
    #[arg(long, global = true, value_parser = parse_hex)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Run the command named in the config.
    Run(Overrides),
    /// Check the config and list every problem.
    Validate(Overrides),
    Seminorm(Overrides),
    LocalEnergy(Overrides),
    Bv(Overrides),
    Perimeter(Overrides),
    BbmSweep(Overrides),
    QConstant(Overrides),
    KernelCheck(Overrides),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Fit {
    Auto,
    Affine,
    Quadratic,
}

#[derive(Args, Debug, Default)]
struct Overrides {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    /// Comma-separated s values.
    #[arg(long, value_delimiter = ',')]
    s_list: Option<Vec<f64>>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    r_omega: Option<f64>,
    /// Use the truncated kernel energy instead of (1-s)|x-y|^{-N-ps}.
    #[arg(long)]
    kernel_form: bool,
    #[arg(long, value_enum)]
    fit: Option<Fit>,
    /// Cells per axis, comma-separated; overrides the domain resolution.
    #[arg(long, value_delimiter = ',')]
    resolution: Option<Vec<usize>>,
    #[arg(long)]
    pair_rule_order: Option<usize>,
    #[arg(long)]
    diagonal_refinement: Option<usize>,
    #[arg(long)]
    target_rel_tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

fn parse_hex(s: &str) -> Result<u64, String> {
    let t = s.trim_start_matches("0x").trim_start_matches("0X");
    u64::from_str_radix(t, 16).map_err(|e| format!("invalid hex seed {s:?}: {e}"))
}

impl Overrides {
    fn apply(&self, c: &mut ExperimentConfig) {
        if self.p.is_some() {
            c.p = self.p;
        }
        if self.s.is_some() {
            c.s = self.s;
        }
        if self.s_list.is_some() {
            c.s_list = self.s_list.clone();
        }
        if self.dim.is_some() {
            c.dim = self.dim;
        }
        if self.r_omega.is_some() {
            c.r_omega = self.r_omega;
        }
        if self.kernel_form {
            c.kernel_form = true;
        }
        if let Some(f) = self.fit {
            c.fit = match f {
                Fit::Auto => FitModel::Auto,
                Fit::Affine => FitModel::Affine,
                Fit::Quadratic => FitModel::Quadratic,
            };
        }
        if let (Some(r), Some(d)) = (&self.resolution, c.domain.as_mut()) {
            d.resolution = r.clone();
        }
        if let Some(v) = self.pair_rule_order {
            c.quadrature.pair_rule_order = v;
        }
        if let Some(v) = self.diagonal_refinement {
            c.quadrature.diagonal_refinement = v;
        }
        if let Some(v) = self.target_rel_tol {
            c.quadrature.target_rel_tol = v;
        }
        if let Some(v) = self.max_iter {
            c.bv.max_iter = v;
        }
        if let Some(v) = self.tol {
            c.bv.tol = v;
        }
    }
}

fn report(diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("error: {d}");
    }
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("error: threads: {e}");
            return code(EXIT_INVALID);
        }
    }
    let (command, overrides, only_validate) = match &cli.command {
        Sub::Run(o) => (None, o, false),
        Sub::Validate(o) => (None, o, true),
        Sub::Seminorm(o) => (Some(Command::Seminorm), o, false),
        Sub::LocalEnergy(o) => (Some(Command::LocalEnergy), o, false),
        Sub::Bv(o) => (Some(Command::Bv), o, false),
        Sub::Perimeter(o) => (Some(Command::Perimeter), o, false),
        Sub::BbmSweep(o) => (Some(Command::BbmSweep), o, false),
        Sub::QConstant(o) => (Some(Command::QConstant), o, false),
        Sub::KernelCheck(o) => (Some(Command::KernelCheck), o, false),
    };
    let mut config = match (&cli.config, command) {
        (Some(path), _) => match experiment::load_config(path) {
            Ok(c) => c,
            Err(d) => {
                report(&d);
                return code(experiment::exit_for(&d));
            }
        },
        (None, Some(cmd)) => ExperimentConfig::new(cmd),
        (None, None) => {
            eprintln!("error: config: --config is required for this subcommand");
            return code(EXIT_INVALID);
        }
    };
    if let Some(cmd) = command {
        config.command = cmd;
    }
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    overrides.apply(&mut config);

    if only_validate {
        let d = experiment::validate(&config);
        if d.is_empty() {
            println!("valid");
            return code(EXIT_OK);
        }
        report(&d);
        return code(experiment::exit_for(&d));
    }
    let r = experiment::run(&config, cli.out.as_deref());
    for line in &r.summary {
        println!("{line}");
    }
    report(&r.diagnostics);
    code(r.exit_code)
}
