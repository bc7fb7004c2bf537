//! Genetic algorithm over discrete power vectors.
//!
//! One generation: tournament selection, random pairing, coverage-greedy
//! crossover, mutation of a random subset, then death of the weakest so the
//! population size stays constant.
//!
//! Every random draw comes from one ChaCha8 stream seeded by
//! [`GaConfig::seed`], consumed in this order per generation: the `k`
//! tournament groups, the pairing permutation, the mutation targets, then
//! one transmitter per frequency for each target. Fitness evaluation never
//! touches the stream, so parallel evaluation cannot change results.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{evaluate, CoverageReport, Instance, Objective, PowerVector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("population is empty")]
    EmptyPopulation,
}

/// When to stop evolving. The first condition that triggers wins.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Arrest {
    pub max_generations: Option<u64>,
    pub wall_clock: Option<Duration>,
    /// Generations without improvement of the best-ever fitness.
    pub stagnation: Option<u64>,
}

impl Arrest {
    pub fn generations(n: u64) -> Self {
        Self {
            max_generations: Some(n),
            ..Self::default()
        }
    }

    pub fn wall_clock(limit: Duration) -> Self {
        Self {
            wall_clock: Some(limit),
            ..Self::default()
        }
    }

    fn is_unbounded(&self) -> bool {
        self.max_generations.is_none() && self.wall_clock.is_none() && self.stagnation.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    /// Number of tournament groups.
    pub k: usize,
    /// Group size as a fraction of the population.
    pub alpha: f64,
    /// Winners taken from each group.
    pub m: usize,
    /// Fraction of the population mutated each generation.
    pub gamma: f64,
    pub arrest: Arrest,
    pub seed: u64,
    pub objective: Objective,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            k: 20,
            alpha: 0.05,
            m: 8,
            gamma: 0.1,
            arrest: Arrest::wall_clock(Duration::from_secs(3600)),
            seed: 0,
            objective: Objective::Coverage,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<(), GaError> {
        if self.k == 0 {
            return Err(GaError::Config("k must be at least 1".into()));
        }
        if self.m == 0 {
            return Err(GaError::Config("m must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(GaError::Config(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(GaError::Config(format!(
                "gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        if self.arrest.is_unbounded() {
            return Err(GaError::Config("no arrest condition set".into()));
        }
        Ok(())
    }

    /// Tournament group size for a population of `size`, never below one.
    pub fn group_size(&self, size: usize) -> usize {
        ((self.alpha * size as f64).floor() as usize).max(1)
    }

    /// Winners per group after clamping `m` to the group size.
    pub fn winners_per_group(&self, size: usize) -> usize {
        self.m.min(self.group_size(size))
    }

    /// Offspring produced (and individuals culled) per generation.
    pub fn offspring_per_generation(&self, size: usize) -> usize {
        2 * (self.k * self.winners_per_group(size) / 2)
    }

    /// Individuals mutated per generation.
    pub fn mutations_per_generation(&self, size: usize) -> usize {
        (self.gamma * size as f64).floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genome: PowerVector,
    pub fitness: f64,
    pub covered: usize,
    pub birth_order: u64,
}

impl Individual {
    fn evaluated(
        instance: &Instance,
        genome: PowerVector,
        objective: Objective,
        birth_order: u64,
    ) -> Self {
        let report = evaluate(instance, &genome);
        Self {
            fitness: report.objective_value(objective),
            covered: report.covered_count,
            genome,
            birth_order,
        }
    }

    fn refresh(&mut self, instance: &Instance, objective: Objective) {
        let report = evaluate(instance, &self.genome);
        self.fitness = report.objective_value(objective);
        self.covered = report.covered_count;
    }
}

/// Better-first order: higher fitness, then older.
fn rank(a: &Individual, b: &Individual) -> Ordering {
    b.fitness
        .total_cmp(&a.fitness)
        .then(a.birth_order.cmp(&b.birth_order))
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Population {
    pub members: Vec<Individual>,
    next_birth: u64,
}

impl Population {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Appends genomes in order, evaluating them in parallel.
    pub fn extend_evaluated(
        &mut self,
        instance: &Instance,
        genomes: Vec<PowerVector>,
        objective: Objective,
    ) {
        let first = self.next_birth;
        let born: Vec<Individual> = genomes
            .into_par_iter()
            .enumerate()
            .map(|(i, g)| Individual::evaluated(instance, g, objective, first + i as u64))
            .collect();
        self.next_birth += born.len() as u64;
        self.members.extend(born);
    }

    pub fn best(&self) -> Option<&Individual> {
        self.members.iter().min_by(|a, b| rank(a, b))
    }

    pub fn mean_fitness(&self) -> f64 {
        if self.members.is_empty() {
            return 0.0;
        }
        self.members.iter().map(|i| i.fitness).sum::<f64>() / self.members.len() as f64
    }
}

/// Every single-transmitter, single-frequency vector at every non-zero
/// level, in (transmitter, frequency, level) order.
pub fn initial_population(instance: &Instance, objective: Objective) -> Population {
    let dims = instance.dims();
    let mut genomes = Vec::with_capacity(dims.loci() * (instance.num_power_levels() - 1));
    for b in 0..dims.transmitters {
        for f in 0..dims.frequencies {
            for level in 1..instance.num_power_levels() {
                let mut g = PowerVector::zeros(instance);
                g.set_level(b, f, level as u32);
                genomes.push(g);
            }
        }
    }
    let mut population = Population::default();
    population.extend_evaluated(instance, genomes, objective);
    population
}

/// Change in covered receivers when locus `(b, f)` of `p` is set to `level`.
pub fn delta_cov(instance: &Instance, p: &PowerVector, b: usize, f: usize, level: u32) -> i64 {
    let before = evaluate(instance, p).covered_count as i64;
    let mut changed = p.clone();
    changed.set_level(b, f, level);
    evaluate(instance, &changed).covered_count as i64 - before
}

/// Draws `k` groups of `group_size` distinct members and returns the indices
/// of the best `min(m, group_size)` of each, concatenated in group order.
pub fn tournament_select<R: Rng + ?Sized>(
    population: &Population,
    config: &GaConfig,
    rng: &mut R,
) -> Result<Vec<usize>, GaError> {
    if population.is_empty() {
        return Err(GaError::EmptyPopulation);
    }
    let size = population.len();
    let group_size = config.group_size(size).min(size);
    let winners = config.m.min(group_size);
    let mut parents = Vec::with_capacity(config.k * winners);
    for _ in 0..config.k {
        let mut group = index::sample(rng, size, group_size).into_vec();
        group.sort_by(|&a, &b| rank(&population.members[a], &population.members[b]));
        parents.extend_from_slice(&group[..winners]);
    }
    Ok(parents)
}

/// Coverage-greedy crossover. Both children start switched off; loci are
/// filled in transmitter-major order, and at each locus the first child
/// takes whichever parent's level gives it the larger coverage gain (ties
/// to the first parent) while the second child takes the other one.
pub fn crossover_pair(
    instance: &Instance,
    p1: &PowerVector,
    p2: &PowerVector,
) -> (PowerVector, PowerVector) {
    crossover_pair_with(instance, p1, p2, Objective::Coverage)
}

/// [`crossover_pair`] with gains measured on `objective`.
pub fn crossover_pair_with(
    instance: &Instance,
    p1: &PowerVector,
    p2: &PowerVector,
    objective: Objective,
) -> (PowerVector, PowerVector) {
    assert_eq!(p1.len(), p2.len(), "parents differ in length");
    let mut greedy = PowerVector::zeros(instance);
    let mut other = PowerVector::zeros(instance);
    // Comparing the gains g1 >= g2 against a common base is the same as
    // comparing the objective after each candidate change.
    let mut current = evaluate(instance, &greedy).objective_value(objective);
    let score = |g: &PowerVector| evaluate(instance, g).objective_value(objective);
    for locus in 0..p1.len() {
        let (l1, l2) = (p1.levels()[locus], p2.levels()[locus]);
        if l1 == l2 {
            greedy.levels_mut()[locus] = l1;
            other.levels_mut()[locus] = l1;
            if l1 != 0 {
                current = score(&greedy);
            }
            continue;
        }
        let mut with = |level: u32, current: f64| {
            if level == 0 {
                current
            } else {
                greedy.levels_mut()[locus] = level;
                let s = score(&greedy);
                greedy.levels_mut()[locus] = 0;
                s
            }
        };
        let s1 = with(l1, current);
        let s2 = with(l2, current);
        if s1 >= s2 {
            greedy.levels_mut()[locus] = l1;
            other.levels_mut()[locus] = l2;
            current = s1;
        } else {
            greedy.levels_mut()[locus] = l2;
            other.levels_mut()[locus] = l1;
            current = s2;
        }
    }
    (greedy, other)
}

/// Lowers one randomly chosen transmitter per frequency by one power level
/// (a switched-off locus stays off), then refreshes the cached fitness.
pub fn mutate<R: Rng + ?Sized>(
    instance: &Instance,
    individual: &mut Individual,
    rng: &mut R,
    objective: Objective,
) {
    lower_random_loci(instance, &mut individual.genome, rng);
    individual.refresh(instance, objective);
}

fn lower_random_loci<R: Rng + ?Sized>(instance: &Instance, genome: &mut PowerVector, rng: &mut R) {
    for f in 0..instance.num_frequencies() {
        let b = rng.random_range(0..instance.num_transmitters());
        let level = genome.level(b, f);
        genome.set_level(b, f, level.saturating_sub(1));
    }
}

/// Removes the `n` worst members (lowest fitness, newest first among equals).
/// Survivors keep their relative order.
pub fn cull(population: &mut Population, n: usize) {
    let n = n.min(population.len());
    if n == 0 {
        return;
    }
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| rank(&population.members[a], &population.members[b]));
    let mut dead = vec![false; population.len()];
    for &i in &order[order.len() - n..] {
        dead[i] = true;
    }
    let mut i = 0;
    population.members.retain(|_| {
        let keep = !dead[i];
        i += 1;
        keep
    });
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationRecord {
    pub generation: u64,
    /// Best fitness seen so far in the run.
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunLog {
    pub records: Vec<GenerationRecord>,
}

impl RunLog {
    /// Comma-separated rows with a header. Wall time is non-deterministic,
    /// so the `elapsed_ms` column is only written when asked for.
    pub fn to_csv(&self, with_timing: bool) -> String {
        let mut out = String::from("generation,best_fitness,mean_fitness");
        out.push_str(if with_timing { ",elapsed_ms\n" } else { "\n" });
        for r in &self.records {
            let _ = write!(
                out,
                "{},{},{}",
                r.generation, r.best_fitness, r.mean_fitness
            );
            if with_timing {
                let _ = write!(out, ",{}", r.elapsed.as_millis());
            }
            out.push('\n');
        }
        out
    }

    pub fn best_fitness(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.best_fitness)
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub best: Individual,
    pub report: CoverageReport,
    pub log: RunLog,
    pub generations: u64,
    /// Best fitness in the initial population.
    pub initial_best: f64,
}

/// Runs the genetic algorithm until the arrest condition triggers.
pub fn evolve(instance: &Instance, config: &GaConfig) -> Result<Evolution, GaError> {
    evolve_with(instance, config, |_, _| {})
}

/// [`evolve`], calling `observe(generation, population)` after initialization
/// (generation 0) and after every completed generation.
pub fn evolve_with<F>(
    instance: &Instance,
    config: &GaConfig,
    mut observe: F,
) -> Result<Evolution, GaError>
where
    F: FnMut(u64, &Population),
{
    config.validate()?;
    let start = Instant::now();
    let objective = config.objective;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut population = initial_population(instance, objective);
    let mut best = population.best().ok_or(GaError::EmptyPopulation)?.clone();
    let initial_best = best.fitness;
    let size = population.len();
    let offspring_count = config.offspring_per_generation(size);
    let mutation_count = config.mutations_per_generation(size);

    let mut log = RunLog::default();
    log.records.push(GenerationRecord {
        generation: 0,
        best_fitness: best.fitness,
        mean_fitness: population.mean_fitness(),
        elapsed: start.elapsed(),
    });
    observe(0, &population);

    let mut generation = 0u64;
    let mut last_improvement = 0u64;
    loop {
        let arrest = &config.arrest;
        if arrest.max_generations.is_some_and(|n| generation >= n)
            || arrest
                .wall_clock
                .is_some_and(|limit| start.elapsed() >= limit)
            || arrest
                .stagnation
                .is_some_and(|n| generation - last_improvement >= n)
        {
            break;
        }
        generation += 1;

        let mut parents = tournament_select(&population, config, &mut rng)?;
        parents.shuffle(&mut rng);
        let couples: Vec<(usize, usize)> = parents.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        debug_assert_eq!(couples.len() * 2, offspring_count);
        let children: Vec<PowerVector> = couples
            .par_iter()
            .flat_map_iter(|&(a, b)| {
                let (c, d) = crossover_pair_with(
                    instance,
                    &population.members[a].genome,
                    &population.members[b].genome,
                    objective,
                );
                [c, d]
            })
            .collect();
        let first_child = population.len();
        population.extend_evaluated(instance, children, objective);

        let targets = index::sample(
            &mut rng,
            population.len(),
            mutation_count.min(population.len()),
        )
        .into_vec();
        for &i in &targets {
            lower_random_loci(instance, &mut population.members[i].genome, &mut rng);
        }
        let refreshed: Vec<(f64, usize)> = targets
            .par_iter()
            .map(|&i| {
                let report = evaluate(instance, &population.members[i].genome);
                (report.objective_value(objective), report.covered_count)
            })
            .collect();
        for (&i, (fitness, covered)) in targets.iter().zip(refreshed) {
            population.members[i].fitness = fitness;
            population.members[i].covered = covered;
        }

        let candidates = population.members[first_child..]
            .iter()
            .chain(targets.iter().map(|&i| &population.members[i]));
        for ind in candidates {
            if ind.fitness > best.fitness {
                best = ind.clone();
                last_improvement = generation;
            }
        }

        cull(&mut population, offspring_count);
        log.records.push(GenerationRecord {
            generation,
            best_fitness: best.fitness,
            mean_fitness: population.mean_fitness(),
            elapsed: start.elapsed(),
        });
        observe(generation, &population);
    }

    let report = evaluate(instance, &best.genome);
    Ok(Evolution {
        best,
        report,
        log,
        generations: generation,
        initial_best,
    })
}
