use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use z2lgt::circuit::{schedule, trotter_step, Mode};
use z2lgt::config::{ExperimentConfig, Format, LatticeSize, Method, Observable, PvqdSettings};
use z2lgt::error::Error;
use z2lgt::experiment::{run_evolution, run_pvqd_report, Report};
use z2lgt::hamiltonians::{build, Part, Theory};
use z2lgt::pvqd::PartOrder;
use z2lgt::verify::{run_checks, VerifyOptions};

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SIZE: u8 = 3;
const EXIT_NONCONVERGED: u8 = 4;

#[derive(Parser)]
#[command(name = "z2lgt", version, about = "Z2 lattice gauge theory: Hamiltonians, Trotter circuits and pVQD")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Hamiltonian as Pauli-sum text.
    Hamiltonian {
        #[command(flatten)]
        common: Common,
        /// Only this part (H_E, H_B, H_M, H_H or H_V).
        #[arg(long)]
        part: Option<String>,
    },
    /// Print one compiled Trotter step as circuit text.
    Circuit {
        #[command(flatten)]
        common: Common,
    },
    /// Count the CX gates of one Trotter step.
    Gatecount {
        #[command(flatten)]
        common: Common,
    },
    /// Evolve |0...0> and record observables per step.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run pVQD and record the optimized parameters per step.
    Pvqd {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        /// product or listed.
        #[arg(long)]
        order: Option<PartOrder>,
    },
    /// Run the self-check suite.
    Verify {
        /// Compile the eliminated theory with a vertex order that cancels fewer CX.
        #[arg(long, hide = true)]
        corrupt_schedule: bool,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// pure, full (eliminated) or vc. Without --config, full and vc start
    /// from couplings (λ_E, λ_B, ε, M) = (1, 1, 0.2, 1).
    #[arg(long)]
    theory: Option<Theory>,
    /// naive or optimized.
    #[arg(long)]
    mode: Option<Mode>,
    /// MxN, e.g. 2x2.
    #[arg(long)]
    lattice: Option<LatticeSize>,
    /// Sets λ_E = g²/2 and λ_B = 1/(2g²).
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    lambda_e: Option<f64>,
    #[arg(long)]
    lambda_b: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    mass: Option<f64>,
    /// Time step, absolute units.
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    steps: Option<usize>,
    /// trotter, exact or pvqd.
    #[arg(long)]
    method: Option<Method>,
    /// Comma-separated, e.g. "plaquette(0,0),gauss_min,energy".
    #[arg(long)]
    observables: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<Format>,
    /// Exit 0 even if some pVQD step missed its tolerance.
    #[arg(long)]
    allow_nonconverged: bool,
}

enum Failure {
    Config(String),
    Run(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn load(common: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &common.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
            ExperimentConfig::from_toml(&text).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(t) = common.theory {
        cfg.theory = t;
        if common.config.is_none() && t != Theory::Pure {
            cfg.couplings = z2lgt::hamiltonians::Couplings::default();
        }
    }
    if let Some(m) = common.mode {
        cfg.mode = m;
    }
    if let Some(l) = common.lattice {
        cfg.lattice = l;
    }
    if let Some(g) = common.g {
        let c = z2lgt::hamiltonians::Couplings::from_g(g);
        cfg.couplings.lambda_e = c.lambda_e;
        cfg.couplings.lambda_b = c.lambda_b;
    }
    let c = &mut cfg.couplings;
    for (flag, slot) in [
        (common.lambda_e, &mut c.lambda_e),
        (common.lambda_b, &mut c.lambda_b),
        (common.eps, &mut c.eps),
        (common.mass, &mut c.mass),
    ] {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    if let Some(d) = common.delta {
        cfg.evolution.delta = d;
    }
    Ok(cfg)
}

fn apply_run(cfg: &mut ExperimentConfig, run: &RunArgs) -> Result<(), Failure> {
    if let Some(s) = run.steps {
        cfg.evolution.n_steps = s;
    }
    if let Some(m) = run.method {
        cfg.evolution.method = m;
        if m == Method::Pvqd && cfg.pvqd.is_none() {
            cfg.pvqd = Some(PvqdSettings::default());
        }
    }
    if let Some(obs) = &run.observables {
        cfg.observables = split_observables(obs)
            .iter()
            .map(|s| s.parse::<Observable>())
            .collect::<Result<_, _>>()
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    if let Some(s) = run.seed {
        cfg.seed = s;
    }
    if let Some(p) = &run.output {
        cfg.output.path = Some(p.display().to_string());
    }
    if let Some(f) = run.format {
        cfg.output.format = f;
    }
    cfg.validate().map_err(|e| Failure::Config(e.to_string()))
}

/// Splits on commas that are not inside parentheses.
fn split_observables(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() {
        out.push(cur);
    }
    out
}

fn emit(report: &Report, allow_nonconverged: bool) -> Result<ExitCode, Failure> {
    let text = report.render(report.config.output.format)?;
    match &report.config.output.path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    if !report.all_converged() {
        eprintln!("warning: some pVQD steps did not reach the tolerance");
        if !allow_nonconverged {
            return Ok(ExitCode::from(EXIT_NONCONVERGED));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.cmd {
        Command::Hamiltonian { common, part } => {
            let cfg = load(&common)?;
            let geom = cfg.geometry()?;
            let split = build(cfg.theory, &geom, &cfg.couplings);
            let sum = match part {
                None => split.total()?,
                Some(name) => {
                    let p = parse_part(&name).ok_or_else(|| Failure::Config(format!("unknown part '{name}'")))?;
                    split
                        .part(p)
                        .cloned()
                        .ok_or_else(|| Failure::Config(format!("{name} is not part of this theory")))?
                }
            };
            print!("{}", sum.to_text());
            Ok(ExitCode::SUCCESS)
        }
        Command::Circuit { common } => {
            let cfg = load(&common)?;
            let geom = cfg.geometry()?;
            print!("{}", trotter_step(cfg.theory, &geom, &cfg.couplings, cfg.evolution.delta, cfg.mode).to_text());
            Ok(ExitCode::SUCCESS)
        }
        Command::Gatecount { common } => {
            let cfg = load(&common)?;
            let geom = cfg.geometry()?;
            let step = schedule(cfg.theory, &geom, &cfg.couplings).compile(cfg.evolution.delta, cfg.mode);
            let counts = z2lgt::circuit::cx_count(&step.circuit);
            let l = geom.num_links();
            println!("theory: {:?}, lattice: {}x{}, mode: {:?}", cfg.theory, geom.m(), geom.n(), cfg.mode);
            for (part, cx) in step.cx_by_part() {
                println!("  {}: {cx}", part.label());
            }
            println!("single-qubit: {}", counts.single);
            println!("CX: {} ({:.1} per link)", counts.cx, counts.cx as f64 / l as f64);
            Ok(ExitCode::SUCCESS)
        }
        Command::Evolve { common, run } => {
            let mut cfg = load(&common)?;
            apply_run(&mut cfg, &run)?;
            emit(&run_evolution(&cfg)?, run.allow_nonconverged)
        }
        Command::Pvqd { common, run, k, tol, max_iters, order } => {
            let mut cfg = load(&common)?;
            let mut p = cfg.pvqd.unwrap_or_default();
            if let Some(k) = k {
                p.k = k;
            }
            if let Some(t) = tol {
                p.tol = t;
            }
            if let Some(m) = max_iters {
                p.max_iters = m;
            }
            if let Some(o) = order {
                p.order = o;
            }
            cfg.pvqd = Some(p);
            cfg.evolution.method = Method::Pvqd;
            apply_run(&mut cfg, &run)?;
            emit(&run_pvqd_report(&cfg)?, run.allow_nonconverged)
        }
        Command::Verify { corrupt_schedule } => {
            let t0 = std::time::Instant::now();
            let res = run_checks(VerifyOptions { corrupt_schedule });
            let failed: Vec<_> = res.iter().filter(|r| !r.passed).collect();
            for r in &res {
                let tag = if r.passed { "ok  " } else { "FAIL" };
                println!("{tag} {} ({}) [{:.2}s]", r.name, r.detail, r.elapsed.as_secs_f64());
            }
            println!("{} checks, {} failed, {:.1}s", res.len(), failed.len(), t0.elapsed().as_secs_f64());
            if failed.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                println!("failed checks:");
                for r in failed {
                    println!("  {}: {}", r.name, r.detail);
                }
                Ok(ExitCode::from(EXIT_FAILURE))
            }
        }
    }
}

fn parse_part(s: &str) -> Option<Part> {
    [Part::Electric, Part::Magnetic, Part::Mass, Part::HopH, Part::HopV]
        .into_iter()
        .find(|p| p.label().eq_ignore_ascii_case(s) || format!("{p:?}").eq_ignore_ascii_case(s))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::TooManyQubits { .. } => EXIT_SIZE,
                Error::Parse { .. }
                | Error::InvalidArgument(_)
                | Error::OddDimension { .. }
                | Error::TooSmall { .. } => EXIT_CONFIG,
                _ => EXIT_FAILURE,
            })
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
