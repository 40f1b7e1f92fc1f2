use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use morse_lab::config::{self, Kind, ScenarioConfig};
use morse_lab::{run_all, LabError};

macro_rules! columns_help {
    () => {
        "\
CSV columns (report.csv), one row per check and parameter point:
  scenario    scenario id from the config
  check       name of the check
  k, l        scaling pair, empty when the check has none
  index       degree q, derivative order, spectrum or complex number
  param       polynomial degree, radius, truncation level mu or grid size
  measured    computed value
  reference   value it is compared with, empty if the check is monotonicity
  tolerance   allowed deviation (relative for kernels and quadrature)
  pass        true or false
  warning     non-fatal diagnostic; --strict turns it into a failure
  provenance  theorem, trivial or derived
Floats carry 17 significant digits. Rows are sorted by scenario, check,
k, l, index, param."
    };
}

const MODEL_HELP: &str = concat!(
    columns_help!(),
    "\n\n\
Checks: kernel_identity, extremal_identity (B and S of the Galerkin
harmonic space against the closed form), off_leading_components, sandwich,
test_form_norm, test_form_harmonic. index is the spectrum number, param
the polynomial degree."
);

const LOCALIZE_HELP: &str = concat!(
    columns_help!(),
    "\n\n\
Checks: deviation_sup, metric_deviation_sup (index is the derivative
order, param the radius, reference the value at the previous sweep point),
deviation_limit, metric_deviation_limit, volume_identity."
);

const TORUS_HELP: &str = concat!(
    columns_help!(),
    "\n\n\
Checks: morse_weak, morse_strong (index q), bergman_ratio (unperturbed),
chern_weil (perturbed), truncated_kernel (param is mu), truncation_settles
(measured is the first m from which every row passes), theta_integral and
theta_constancy (k is the tensor power, param the grid)."
);

const HODGE_HELP: &str = concat!(
    columns_help!(),
    "\n\n\
Checks: truncation_inequality (measured is the number of violations over
all q and mu), alternating_sum, composition. index is the complex number,
param its number of spaces."
);

#[derive(Parser)]
#[command(
    name = "morse-lab",
    version,
    about = "Numerical checks of Bergman kernels and holomorphic Morse inequalities"
)]
#[command(after_help = "Exit status: 0 when every check passes, 1 when one fails, 2 when the config is invalid.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Flat model: Galerkin kernels, the kernel sandwich and the test form.
    #[command(after_help = MODEL_HELP)]
    Model(Common),
    /// Rescaled weights and metrics along a sweep.
    #[command(after_help = LOCALIZE_HELP)]
    Localize(Common),
    /// Products of elliptic curves: Morse inequalities and Bergman constants.
    #[command(after_help = TORUS_HELP)]
    Torus(Common),
    /// Random finite complexes and truncated Hodge numbers.
    #[command(after_help = HODGE_HELP)]
    Hodge(Common),
    /// Every kind; a config file may hold a list of scenarios.
    #[command(after_help = columns_help!())]
    All(Common),
}

#[derive(Args)]
struct Common {
    /// JSON scenario (or list of scenarios); built-in defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for report.csv and summary.json.
    #[arg(long, default_value = "morse-report")]
    out: PathBuf,
    /// Overrides the seed of every scenario.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 for one per core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Treat warnings as failures.
    #[arg(long)]
    strict: bool,
}

fn configs(kind: Option<Kind>, common: &Common) -> Result<Vec<ScenarioConfig>, LabError> {
    let mut list = match &common.config {
        Some(path) => config::load(path)?,
        None => match kind {
            Some(k) => config::defaults(k),
            None => {
                [Kind::Model, Kind::Localize, Kind::Torus, Kind::Hodge].into_iter().flat_map(config::defaults).collect()
            }
        },
    };
    if let Some(k) = kind {
        if let Some(c) = list.iter().find(|c| c.kind() != k) {
            return Err(LabError::ConfigInvalid(format!(
                "{} is a {} scenario, expected {}",
                c.id(),
                c.kind().name(),
                k.name()
            )));
        }
    }
    if let Some(seed) = common.seed {
        list.iter_mut().for_each(|c| c.set_seed(seed));
    }
    Ok(list)
}

fn execute(kind: Option<Kind>, common: &Common) -> Result<bool, LabError> {
    let list = configs(kind, common)?;
    let report = run_all(&list, common.jobs)?;
    report.write(&common.out, common.strict)?;
    let s = report.summary(common.strict);
    println!(
        "{} rows, {} passed, {} failed, {} warnings -> {}",
        s.rows,
        s.passed,
        s.failed,
        s.warnings,
        common.out.display()
    );
    for (check, counts) in s.checks.iter().filter(|(_, c)| c.failed > 0) {
        println!("  FAIL {check}: {}/{} rows", counts.failed, counts.rows);
    }
    Ok(report.all_passed(common.strict))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match &cli.command {
        Command::Model(c) => (Some(Kind::Model), c),
        Command::Localize(c) => (Some(Kind::Localize), c),
        Command::Torus(c) => (Some(Kind::Torus), c),
        Command::Hodge(c) => (Some(Kind::Hodge), c),
        Command::All(c) => (None, c),
    };
    match execute(kind, common) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
