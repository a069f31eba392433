//! `gray-holonomy`: axiom suites, holonomy and theorem checks from the
//! command line.

mod checks;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use checks::{CheckResult, Context, CHECKS};
use config::{GroupDesc, InstanceDesc, ScenarioConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or scenario; exit code 2.
    Config(String),
    /// A numerical routine failed; exit code 1.
    Run(anyhow::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Run(e) => write!(f, "{e:#}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "gray-holonomy", version, about = "Higher gauge theory checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Where to write the JSON report.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Tolerance for every check (minimum order for `convergence`).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// `N` or `N_t,N_s,N_x`.
    #[arg(long, global = true)]
    resolution: Option<String>,
}

#[derive(Args, Clone, Default)]
struct InstanceArgs {
    /// `adjoint` or `chain`; overrides the config instance.
    #[arg(long)]
    instance: Option<String>,
    /// Matrix size of the adjoint instance.
    #[arg(long)]
    n: Option<usize>,
    /// `GL` or `SO`.
    #[arg(long)]
    group: Option<String>,
    /// Chain complex dimensions, comma separated.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Number of random samples for axiom suites.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks listed in the config.
    Run,
    /// 2-crossed module identities.
    CheckAxioms(InstanceArgs),
    /// Gray 3-groupoid axioms.
    CheckGray(InstanceArgs),
    /// Differential 2-crossed module identities.
    CheckDifferential {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Use the automorphism 2-crossed module of the group's Lie algebra.
        #[arg(long)]
        automorphism: bool,
    },
    /// Holonomy of the config cube (path, surface or volume).
    Holonomy(InstanceArgs),
    /// Non-abelian Green theorem on a 2-path.
    Green(InstanceArgs),
    /// Non-abelian Stokes theorem on a 3-path.
    Stokes(InstanceArgs),
    /// Volume holonomy of the interchange cube against the interchange cell.
    Interchange(InstanceArgs),
    /// Wilson observable of a 3-sphere.
    Wilson(InstanceArgs),
    /// Invariance under thin homotopy.
    Invariance {
        #[command(flatten)]
        inst: InstanceArgs,
        /// `rank1`, `laminated` or `rank3`.
        #[arg(long)]
        kind: Option<String>,
    },
    /// Exterior derivative of the twisted integral.
    BaezSchreiber {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long)]
        fd_step: Option<f64>,
    },
    /// Error against resolution and the fitted order.
    Convergence {
        #[command(flatten)]
        inst: InstanceArgs,
        /// `path`, `green` or `stokes`.
        #[arg(long)]
        op: Option<String>,
        /// Problem family; `const-exp` for paths.
        #[arg(long)]
        family: Option<String>,
        /// Resolutions, comma separated.
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<usize>>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::CheckAxioms(_) => "check-axioms",
            Command::CheckGray(_) => "check-gray",
            Command::CheckDifferential { .. } => "check-differential",
            Command::Holonomy(_) => "holonomy",
            Command::Green(_) => "green",
            Command::Stokes(_) => "stokes",
            Command::Interchange(_) => "interchange",
            Command::Wilson(_) => "wilson",
            Command::Invariance { .. } => "invariance",
            Command::BaezSchreiber { .. } => "baez-schreiber",
            Command::Convergence { .. } => "convergence",
        }
    }

    fn instance_args(&self) -> Option<&InstanceArgs> {
        match self {
            Command::Run => None,
            Command::CheckAxioms(a)
            | Command::CheckGray(a)
            | Command::Holonomy(a)
            | Command::Green(a)
            | Command::Stokes(a)
            | Command::Interchange(a)
            | Command::Wilson(a) => Some(a),
            Command::CheckDifferential { inst, .. }
            | Command::Invariance { inst, .. }
            | Command::BaezSchreiber { inst, .. }
            | Command::Convergence { inst, .. } => Some(inst),
        }
    }
}

fn parse_resolution(s: &str) -> Result<config::ResolutionDesc, CliError> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::config(format!("bad --resolution {s:?}; expected N or N_t,N_s,N_x")))?;
    match parts[..] {
        [n] if n > 0 => Ok(config::ResolutionDesc { nt: n, ns: None, nx: None }),
        [t, s, x] if t > 0 && s > 0 && x > 0 => Ok(config::ResolutionDesc {
            nt: t,
            ns: Some(s),
            nx: Some(x),
        }),
        _ => Err(CliError::config(format!(
            "bad --resolution {s:?}; expected N or N_t,N_s,N_x with positive entries"
        ))),
    }
}

fn apply_instance_args(cfg: &mut ScenarioConfig, a: &InstanceArgs) -> Result<(), CliError> {
    if let Some(s) = a.samples {
        cfg.samples = Some(s);
    }
    let kind = match a.instance.as_deref() {
        Some(k) => k,
        None if a.n.is_some() || a.group.is_some() => "adjoint",
        None if a.dims.is_some() => "chain",
        None => return Ok(()),
    };
    cfg.instance = Some(match kind {
        "adjoint" => InstanceDesc::Adjoint {
            group: GroupDesc {
                kind: a.group.clone().unwrap_or_else(|| "GL".into()),
                n: a.n.unwrap_or(2),
            },
        },
        "chain" => InstanceDesc::Chain {
            dims: a.dims.clone().unwrap_or_else(|| vec![2, 3, 2]),
            boundaries: None,
            seed: None,
        },
        other => {
            return Err(CliError::config(format!(
                "unknown instance {other:?}; expected adjoint or chain"
            )))
        }
    });
    Ok(())
}

fn execute(cli: &Cli) -> Result<(ScenarioConfig, u64, Vec<CheckResult>), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => config::load(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(r) = &cli.resolution {
        cfg.resolution = Some(parse_resolution(r)?);
    }
    if let Some(a) = cli.command.instance_args() {
        apply_instance_args(&mut cfg, a)?;
    }
    if let Command::BaezSchreiber {
        fd_step: Some(h), ..
    } = &cli.command
    {
        cfg.fd_step = Some(*h);
    }
    let seed = cli.seed.or(cfg.seed).unwrap_or(1);
    let cx = Context {
        cfg: &cfg,
        seed,
        tol: cli.tol,
    };
    let results = match &cli.command {
        Command::Run => {
            let names = cfg
                .checks
                .clone()
                .ok_or_else(|| CliError::config("`run` needs a config with a \"checks\" list"))?;
            if let Some(bad) = names.iter().find(|n| !CHECKS.contains(&n.as_str())) {
                return Err(CliError::config(format!(
                    "unknown check {bad:?}; valid checks: {}",
                    CHECKS.join(", ")
                )));
            }
            // one thread per check, results kept in config order
            std::thread::scope(|scope| {
                let handles: Vec<_> = names
                    .iter()
                    .map(|n| scope.spawn(|| checks::by_name(&cx, n)))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("check thread panicked"))
                    .collect::<Result<Vec<_>, _>>()
            })?
        }
        Command::CheckAxioms(_) => vec![checks::axioms(&cx)?],
        Command::CheckGray(_) => vec![checks::gray(&cx)?],
        Command::CheckDifferential { automorphism, .. } => {
            vec![checks::differential(&cx, *automorphism)?]
        }
        Command::Holonomy(_) => vec![checks::holonomy(&cx)?],
        Command::Green(_) => vec![checks::green_check(&cx)?],
        Command::Stokes(_) => vec![checks::stokes_check(&cx)?],
        Command::Interchange(_) => vec![checks::interchange_check(&cx)?],
        Command::Wilson(_) => vec![checks::wilson(&cx)?],
        Command::Invariance { kind, .. } => vec![checks::invariance(&cx, kind.as_deref())?],
        Command::BaezSchreiber { .. } => vec![checks::baez_schreiber(&cx)?],
        Command::Convergence { op, family, ns, .. } => vec![checks::convergence_check(
            &cx,
            op.as_deref(),
            family.as_deref(),
            ns.clone(),
        )?],
    };
    Ok((cfg, seed, results))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (cfg, seed, results) = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                CliError::Config(_) => 2,
                CliError::Run(_) => 1,
            });
        }
    };
    let rep = report::Report::new(cli.command.name(), seed, cfg.factor(), results);
    print!("{}", rep.table());
    for line in rep.failure_lines() {
        eprintln!("{line}");
    }
    if let Some(path) = &cli.out {
        if let Err(e) = rep.write(path) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(if rep.pass { 0 } else { 1 })
}
