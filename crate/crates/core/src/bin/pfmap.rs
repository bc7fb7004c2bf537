//! `pfmap` command-line front end.
//!
//! Exit status: 0 success, 1 usage error, 2 data error, 3 verification failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pfmap::ga::{evolve, Arrest, GaConfig};
use pfmap::instance_io::{self, GeneratorConfig};
use pfmap::milp::{conditioning_report, export_lp};
use pfmap::model::{verify, Dimensions, Instance, Objective};
use pfmap::oracle::{brute_force_optimum, search_space_size, DEFAULT_MAX_ENUMERATION};
use pfmap::plan::PlanFile;

#[derive(Parser)]
#[command(
    name = "pfmap",
    version,
    about = "Power, frequency and modulation assignment for wireless networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic instance in WND1 format.
    Generate(GenerateArgs),
    /// Run the genetic algorithm and write the best coverage plan.
    Solve(SolveArgs),
    /// Exhaustive search for the optimal coverage (small instances only).
    Oracle(OracleArgs),
    /// Export the big-M formulation as an LP file.
    ExportLp(ExportArgs),
    /// Check a saved coverage plan against an instance.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Reference dimensions preset (S1..S7, R1..R4, Q1..Q4).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, conflicts_with = "preset", requires_all = ["receivers", "frequencies", "burst_profiles"])]
    transmitters: Option<usize>,
    #[arg(long, conflicts_with = "preset")]
    receivers: Option<usize>,
    #[arg(long, conflicts_with = "preset")]
    frequencies: Option<usize>,
    #[arg(long, conflicts_with = "preset")]
    burst_profiles: Option<usize>,
    /// Number of power levels, including switched off.
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    max_power: Option<f64>,
    /// Ratio between consecutive non-zero power levels.
    #[arg(long)]
    level_ratio: Option<f64>,
    /// Side of the square deployment area in meters.
    #[arg(long)]
    area_side: Option<f64>,
    #[arg(long)]
    pathloss_exponent: Option<f64>,
    #[arg(long)]
    reference_distance: Option<f64>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long)]
    demand_min: Option<f64>,
    #[arg(long)]
    demand_max: Option<f64>,
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Coverage,
    Revenue,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long)]
    generations: Option<u64>,
    #[arg(long)]
    time_limit_s: Option<f64>,
    /// Stop after this many generations without improvement.
    #[arg(long)]
    stagnation: Option<u64>,
    /// Independent runs; run i uses seed + i.
    #[arg(long, default_value_t = 1)]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    k: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 8)]
    m: usize,
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Coverage)]
    objective: ObjectiveArg,
    /// Where to write the best coverage plan.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Where to write the per-generation log of the best run.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Add wall-clock times to the log (makes it non-reproducible).
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    /// Refuse instances with more power vectors than this.
    #[arg(long, default_value_t = DEFAULT_MAX_ENUMERATION)]
    max_enum: u64,
    /// Where to write the optimal coverage plan.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    instance: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    instance: PathBuf,
    plan: PathBuf,
}

enum Failure {
    Usage(String),
    Data(String),
    Verification(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Verification(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Verification(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn data<E: std::fmt::Display>(context: &Path) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Data(format!("{}: {e}", context.display()))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path).map_err(data(path))?;
    instance_io::parse(&text).map_err(data(path))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, text).map_err(data(p)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn generate(args: GenerateArgs) -> Outcome {
    let dims = match (&args.preset, args.transmitters) {
        (Some(name), _) => instance_io::preset(name).ok_or_else(|| {
            let names: Vec<&str> = instance_io::PRESETS.iter().map(|(n, _)| *n).collect();
            Failure::Usage(format!(
                "unknown preset '{name}'; expected one of {}",
                names.join(", ")
            ))
        })?,
        (None, Some(b)) => Dimensions::new(
            b,
            args.receivers.unwrap_or_default(),
            args.frequencies.unwrap_or_default(),
            args.burst_profiles.unwrap_or_default(),
        ),
        (None, None) => return Err(Failure::Usage(
            "give --preset or all of --transmitters, --receivers, --frequencies, --burst-profiles"
                .into(),
        )),
    };
    let mut config = GeneratorConfig::with_dims(dims, args.seed);
    macro_rules! override_with {
        ($($field:ident <- $arg:ident),*) => {
            $(if let Some(v) = args.$arg { config.$field = v; })*
        };
    }
    override_with!(
        power_levels <- levels,
        max_power <- max_power,
        level_ratio <- level_ratio,
        area_side <- area_side,
        pathloss_exponent <- pathloss_exponent,
        reference_distance <- reference_distance,
        noise <- noise,
        bandwidth <- bandwidth,
        demand_min <- demand_min,
        demand_max <- demand_max
    );
    let instance = instance_io::generate(&config).map_err(|e| Failure::Usage(e.to_string()))?;
    write_or_print(args.output.as_deref(), &instance_io::serialize(&instance))
}

fn solve(args: SolveArgs) -> Outcome {
    let instance = load_instance(&args.instance)?;
    if args.runs == 0 {
        return Err(Failure::Usage("--runs must be at least 1".into()));
    }
    let mut arrest = Arrest {
        max_generations: args.generations,
        wall_clock: None,
        stagnation: args.stagnation,
    };
    if let Some(s) = args.time_limit_s {
        let limit = Duration::try_from_secs_f64(s)
            .map_err(|_| Failure::Usage(format!("invalid --time-limit-s {s}")))?;
        arrest.wall_clock = Some(limit);
    }
    if arrest == Arrest::default() {
        arrest = GaConfig::default().arrest;
    }
    let base = GaConfig {
        k: args.k,
        alpha: args.alpha,
        m: args.m,
        gamma: args.gamma,
        arrest,
        seed: args.seed,
        objective: match args.objective {
            ObjectiveArg::Coverage => Objective::Coverage,
            ObjectiveArg::Revenue => Objective::Revenue,
        },
    };
    base.validate().map_err(|e| Failure::Usage(e.to_string()))?;

    println!("run,seed,covered,revenue,generations");
    let mut best_run = None;
    let mut covered = Vec::new();
    for i in 0..args.runs {
        let config = GaConfig {
            seed: args.seed.wrapping_add(i),
            ..base.clone()
        };
        let run = evolve(&instance, &config).map_err(|e| Failure::Usage(e.to_string()))?;
        let violations = verify(&instance, &run.best.genome, &run.report.assignment);
        if !violations.is_empty() {
            let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(Failure::Verification(format!(
                "run {} produced an invalid plan:\n{}",
                i + 1,
                list.join("\n")
            )));
        }
        println!(
            "{},{},{},{},{}",
            i + 1,
            config.seed,
            run.report.covered_count,
            run.report.covered_revenue,
            run.generations
        );
        covered.push(run.report.covered_count);
        let better = match &best_run {
            None => true,
            Some((_, b)) => {
                let b: &pfmap::Evolution = b;
                run.best.fitness > b.best.fitness
            }
        };
        if better {
            best_run = Some((i, run));
        }
    }
    let best = covered.iter().max().copied().unwrap_or_default();
    let worst = covered.iter().min().copied().unwrap_or_default();
    let mean = covered.iter().sum::<usize>() as f64 / covered.len() as f64;
    println!("best,{best}");
    println!("mean,{mean}");
    println!("worst,{worst}");

    let (_, run) = best_run.expect("at least one run");
    if let Some(path) = &args.output {
        let plan = PlanFile::from_report(&instance, &run.best.genome, &run.report);
        fs::write(path, plan.to_text()).map_err(data(path))?;
    }
    if let Some(path) = &args.log {
        fs::write(path, run.log.to_csv(args.timings)).map_err(data(path))?;
    }
    Ok(())
}

fn oracle(args: OracleArgs) -> Outcome {
    let instance = load_instance(&args.instance)?;
    let optimum = brute_force_optimum(&instance, args.max_enum).map_err(|e| {
        let size = search_space_size(&instance)
            .map(|n| n.to_string())
            .unwrap_or_else(|| "more than 2^64".into());
        Failure::Data(format!("refusing to enumerate {size} power vectors: {e}"))
    })?;
    println!("optimum {}", optimum.report.covered_count);
    println!("revenue {}", optimum.report.covered_revenue);
    println!("enumerated {}", optimum.enumerated);
    let levels: Vec<String> = optimum
        .genome
        .levels()
        .iter()
        .map(|l| (l + 1).to_string())
        .collect();
    println!("genome {}", levels.join(" "));
    if let Some(path) = &args.output {
        let plan = PlanFile::from_report(&instance, &optimum.genome, &optimum.report);
        fs::write(path, plan.to_text()).map_err(data(path))?;
    }
    Ok(())
}

fn export(args: ExportArgs) -> Outcome {
    let instance = load_instance(&args.instance)?;
    let summary = export_lp(&instance, &args.output).map_err(|e| Failure::Data(e.to_string()))?;
    println!("{summary}");
    println!("{}", conditioning_report(&instance));
    Ok(())
}

fn verify_plan(args: VerifyArgs) -> Outcome {
    let instance = load_instance(&args.instance)?;
    let text = fs::read_to_string(&args.plan).map_err(data(&args.plan))?;
    let plan = PlanFile::parse(&text).map_err(data(&args.plan))?;
    let violations = plan.verify(&instance).map_err(data(&args.plan))?;
    if violations.is_empty() {
        println!(
            "ok: {} receivers served, no violations",
            plan.services.len()
        );
        return Ok(());
    }
    for v in &violations {
        println!("{v}");
    }
    Err(Failure::Verification(format!(
        "{} violation(s)",
        violations.len()
    )))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Oracle(a) => oracle(a),
        Command::ExportLp(a) => export(a),
        Command::Verify(a) => verify_plan(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            if let Failure::Usage(_) = f {
                eprintln!("run 'pfmap --help' for usage");
            }
            ExitCode::from(f.exit_code())
        }
    }
}
