//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use pfmap::ga::{evolve_with, initial_population, Arrest, Evolution, GaConfig};
use pfmap::instance_io::{generate, preset, serialize, GeneratorConfig};
use pfmap::milp::{export_lp, MilpModel, RowKind};
use pfmap::model::{big_m, evaluate, verify, Dimensions, Instance, Objective};
use pfmap::oracle::{brute_force_optimum, DEFAULT_MAX_ENUMERATION};
use pfmap::plan::PlanFile;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Every GA run in the suite goes through here so that criterion 3 sees all
/// of them.
#[derive(Default)]
struct Runs {
    total: usize,
    violations: Vec<String>,
}

impl Runs {
    fn check(&mut self, label: &str, instance: &Instance, run: &Evolution) {
        self.total += 1;
        let direct = verify(instance, &run.best.genome, &run.report.assignment);
        let text = PlanFile::from_report(instance, &run.best.genome, &run.report).to_text();
        let replayed = PlanFile::parse(&text)
            .expect("plan text parses")
            .verify(instance)
            .expect("plan dims match");
        for v in direct.iter().chain(&replayed) {
            self.violations.push(format!("{label}: {v}"));
        }
    }
}

fn s1_instance(seed: u64) -> Instance {
    generate(&GeneratorConfig::with_dims(
        Dimensions::new(12, 100, 1, 1),
        seed,
    ))
    .expect("generator")
}

/// Desk-scale family: 20 receivers, three power levels, two burst profiles,
/// six loci laid out as 3x2 or 6x1.
fn desk_instance(seed: u64) -> Instance {
    let (b, f) = if seed.is_multiple_of(2) {
        (3, 2)
    } else {
        (6, 1)
    };
    let config = GeneratorConfig {
        area_side: 1000.0,
        power_levels: 3,
        ..GeneratorConfig::with_dims(Dimensions::new(b, 20, f, 2), seed)
    };
    generate(&config).expect("generator")
}

fn generations(n: u64, seed: u64) -> GaConfig {
    GaConfig {
        arrest: Arrest::generations(n),
        seed,
        ..GaConfig::default()
    }
}

fn presets() -> Outcome {
    let dim_line = |name: &str| {
        let dims = preset(name).expect("preset exists");
        let inst = generate(&GeneratorConfig::with_dims(dims, 0)).expect("generator");
        serialize(&inst)
            .lines()
            .nth(1)
            .unwrap_or_default()
            .to_string()
    };
    let s1 = dim_line("S1");
    let q4 = dim_line("Q4");
    outcome(
        s1 == "DIM 12 100 1 1" && q4 == "DIM 36 529 1 4",
        format!("S1 -> '{s1}', Q4 -> '{q4}'"),
    )
}

fn oracle_equivalence(runs: &mut Runs) -> Outcome {
    let mut hits = 0;
    let mut slowest = Duration::ZERO;
    let mut misses = Vec::new();
    for seed in 0..20 {
        let inst = desk_instance(seed);
        let opt = brute_force_optimum(&inst, DEFAULT_MAX_ENUMERATION).expect("space fits");
        let start = Instant::now();
        let run = evolve_with(&inst, &generations(200, seed), |_, _| {}).expect("ga");
        slowest = slowest.max(start.elapsed());
        runs.check(&format!("desk seed {seed}"), &inst, &run);
        if run.report.covered_count == opt.report.covered_count {
            hits += 1;
        } else {
            misses.push(format!(
                "seed {seed}: {} < {}",
                run.report.covered_count, opt.report.covered_count
            ));
        }
    }
    outcome(
        hits >= 18 && slowest < Duration::from_secs(10),
        format!(
            "{hits}/20 runs reach the optimum, slowest run {:.2}s{}{}",
            slowest.as_secs_f64(),
            if misses.is_empty() { "" } else { "; " },
            misses.join(", ")
        ),
    )
}

fn verified_coverage(runs: &Runs) -> Outcome {
    outcome(
        runs.violations.is_empty() && runs.total > 0,
        if runs.violations.is_empty() {
            format!("{} plans, zero violations", runs.total)
        } else {
            format!(
                "{} violations: {}",
                runs.violations.len(),
                runs.violations.join("; ")
            )
        },
    )
}

fn monotone_best(runs: &mut Runs) -> Outcome {
    let inst = s1_instance(4);
    let run = evolve_with(&inst, &generations(100, 4), |_, _| {}).expect("ga");
    runs.check("monotone", &inst, &run);
    let best: Vec<f64> = run.log.best_fitness().collect();
    let drops = best.windows(2).filter(|w| w[1] < w[0]).count();
    outcome(
        drops == 0 && best.len() == 101,
        format!(
            "{} logged generations, best {} -> {}, {drops} decreases",
            best.len(),
            best[0],
            best[best.len() - 1]
        ),
    )
}

fn population_conservation(runs: &mut Runs) -> Outcome {
    let inst = s1_instance(5);
    let mut sizes = Vec::new();
    let mut stale = 0;
    let run = evolve_with(&inst, &generations(50, 5), |_, pop| {
        sizes.push(pop.len());
        stale += pop
            .members
            .iter()
            .filter(|i| evaluate(&inst, &i.genome).covered_count != i.covered)
            .count();
    })
    .expect("ga");
    runs.check("conservation", &inst, &run);
    let wrong = sizes.iter().filter(|&&s| s != 60).count();
    outcome(
        wrong == 0 && sizes.len() == 51 && stale == 0,
        format!(
            "{} snapshots, {wrong} with |P| != 60, {stale} stale fitness values",
            sizes.len()
        ),
    )
}

fn initial_count() -> Outcome {
    let inst = s1_instance(6);
    let pop = initial_population(&inst, Objective::Coverage);
    outcome(pop.len() == 60, format!("{} individuals", pop.len()))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let instance = dir.path().join("s1.wnd");
    std::fs::write(&instance, serialize(&s1_instance(7))).expect("write instance");
    let solve = |tag: &str| {
        let plan = dir.path().join(format!("plan_{tag}.txt"));
        let log = dir.path().join(format!("log_{tag}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_pfmap"))
            .arg("solve")
            .arg(&instance)
            .args(["--generations", "40", "--seed", "11", "-o"])
            .arg(&plan)
            .arg("--log")
            .arg(&log)
            .output()
            .expect("run pfmap");
        assert!(
            status.status.success(),
            "{}",
            String::from_utf8_lossy(&status.stderr)
        );
        (
            std::fs::read(plan).expect("plan"),
            std::fs::read(log).expect("log"),
            status.stdout,
        )
    };
    let a = solve("a");
    let b = solve("b");
    outcome(
        a == b && !a.0.is_empty() && !a.1.is_empty(),
        format!(
            "plan {} bytes, log {} bytes, identical: plan {}, log {}, stdout {}",
            a.0.len(),
            a.1.len(),
            a.0 == b.0,
            a.1 == b.1,
            a.2 == b.2
        ),
    )
}

fn big_m_redundancy() -> Outcome {
    let inst = generate(&GeneratorConfig {
        area_side: 800.0,
        ..GeneratorConfig::with_dims(Dimensions::new(6, 30, 2, 3), 8)
    })
    .expect("generator");
    let model = MilpModel::build(&inst);
    let d = inst.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p_max = inst.max_power();
    let mut checked = 0usize;
    let mut failed = 0usize;
    let mut m_mismatch = 0usize;
    for _ in 0..1000 {
        let mut values = vec![0.0; model.variables.len()];
        for b in 0..d.transmitters {
            for f in 0..d.frequencies {
                values[model.p(b, f)] = rng.random_range(0.0..=p_max);
            }
        }
        for row in model.rows.iter().filter(|r| r.kind == RowKind::Sir) {
            checked += 1;
            if !row.holds(&values, 0.0) {
                failed += 1;
            }
        }
    }
    for t in 0..d.receivers {
        for b in 0..d.transmitters {
            for f in 0..d.frequencies {
                for h in 0..d.burst_profiles {
                    let row = model
                        .rows
                        .iter()
                        .find(|r| r.name == format!("sir_{}_{}_{}_{}", t + 1, b + 1, f + 1, h + 1))
                        .expect("row exists");
                    let x = model.x(t, b, f, h);
                    if row.terms.iter().find(|&&(v, _)| v == x).map(|&(_, c)| -c)
                        != Some(big_m(&inst, t, b, h))
                    {
                        m_mismatch += 1;
                    }
                }
            }
        }
    }
    outcome(
        failed == 0 && m_mismatch == 0,
        format!("{checked} row checks over 1000 vectors, {failed} violated, {m_mismatch} rows with a different M"),
    )
}

fn lp_counts() -> Outcome {
    let inst =
        generate(&GeneratorConfig::with_dims(Dimensions::new(3, 10, 2, 2), 9)).expect("generator");
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("model.lp");
    export_lp(&inst, &path).expect("export");
    let text = std::fs::read_to_string(&path).expect("read lp");

    let mut section = "";
    let (mut sir, mut assign, mut cap, mut continuous, mut binary) = (0, 0, 0, 0, 0);
    for line in text.lines() {
        match line {
            "Maximize" | "Subject To" | "Bounds" | "Binaries" | "End" => {
                section = line;
                continue;
            }
            _ => {}
        }
        let name = line.trim_start().split(':').next().unwrap_or("");
        match section {
            "Subject To" if line.starts_with(' ') && !line.starts_with("  ") => {
                if name.starts_with("sir_") {
                    sir += 1;
                } else if name.starts_with("assign_") {
                    assign += 1;
                } else if name.starts_with("cap_") {
                    cap += 1;
                }
            }
            "Bounds" => continuous += 1,
            "Binaries" => binary += 1,
            _ => {}
        }
    }
    let counts = (sir, assign, cap, continuous, binary);
    outcome(
        counts == (120, 10, 6, 6, 120),
        format!("{sir} SIR, {assign} assignment, {cap} capacity rows; {continuous} continuous, {binary} binary variables"),
    )
}

fn beats_baseline(runs: &mut Runs) -> Outcome {
    let mut better = 0;
    let mut worse = 0;
    for seed in 0..20 {
        let inst = s1_instance(100 + seed);
        let run = evolve_with(&inst, &generations(100, seed), |_, _| {}).expect("ga");
        runs.check(&format!("baseline seed {seed}"), &inst, &run);
        let final_fitness = run.report.covered_count as f64;
        if final_fitness > run.initial_best {
            better += 1;
        } else if final_fitness < run.initial_best {
            worse += 1;
        }
    }
    outcome(
        worse == 0 && better >= 14,
        format!(
            "{better}/20 strictly better than the best single-transmitter vector, {worse} worse"
        ),
    )
}

fn main() -> ExitCode {
    let mut runs = Runs::default();
    let results = [
        (1, "reference presets", presets()),
        (
            2,
            "oracle equivalence at desk scale",
            oracle_equivalence(&mut runs),
        ),
        (4, "monotone best-ever fitness", monotone_best(&mut runs)),
        (
            5,
            "population conservation",
            population_conservation(&mut runs),
        ),
        (6, "initial population count", initial_count()),
        (7, "deterministic solve output", determinism()),
        (8, "big-M redundancy", big_m_redundancy()),
        (9, "LP export counts", lp_counts()),
        (
            10,
            "GA beats single-transmitter baseline",
            beats_baseline(&mut runs),
        ),
    ];
    let verified = verified_coverage(&runs);

    let mut lines: Vec<(u32, &str, Outcome)> = results.into_iter().collect();
    lines.push((3, "verified coverage", verified));
    lines.sort_by_key(|(n, _, _)| *n);

    let mut failures = 0;
    for (n, name, o) in &lines {
        if !o.pass {
            failures += 1;
        }
        println!(
            "criterion {n:>2} {}: {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        lines.len() - failures,
        lines.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
