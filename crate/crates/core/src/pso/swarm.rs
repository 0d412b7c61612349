//! Swarm initialization and the main search loop.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eat::{self, ScheduleError};
use crate::model::{ProblemInstance, Schedule, Seconds, TaskId};

use super::repair::{repair, RepairError};
use super::rules::priority_orderings;
use super::swaps::{apply_swaps, SwapError, SwapPairList};
use super::velocity::update_velocity;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum PsoError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Repair(#[from] RepairError),
    #[error(transparent)]
    Swap(#[from] SwapError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsoConfig {
    pub c1: f64,
    pub c2: f64,
    pub swarm_size: usize,
    pub max_iterations: usize,
    pub convergence_window: usize,
    /// Cap on initial velocity pairs; `None` picks by task count.
    pub initial_velocity_pairs: Option<usize>,
    pub seed: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            c1: 1.0,
            c2: 2.0,
            swarm_size: 40,
            max_iterations: 40,
            convergence_window: 10,
            initial_velocity_pairs: None,
            seed: 0,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<(), PsoError> {
        if !(self.c1 > 0.0 && self.c1.is_finite()) || !(self.c2 > 0.0 && self.c2.is_finite()) {
            return Err(PsoError::Config(format!("c1 and c2 must be positive, got {} and {}", self.c1, self.c2)));
        }
        if self.swarm_size < RULE_COUNT {
            return Err(PsoError::Config(format!("swarm size must be at least {RULE_COUNT}, got {}", self.swarm_size)));
        }
        if self.convergence_window == 0 {
            return Err(PsoError::Config("convergence window must be at least 1".into()));
        }
        Ok(())
    }
}

const RULE_COUNT: usize = 8;

/// Maximum initial velocity pairs by task count.
pub fn velocity_band(n_tasks: usize) -> usize {
    match n_tasks {
        0..=20 => 2,
        21..=50 => 10,
        _ => 30,
    }
}

/// Rule particles first, then precedence-preserving random swap mutations of
/// them (particle `k` mutates rule `k % 8`).
pub fn generate_initial_swarm<R: Rng + ?Sized>(
    instance: &ProblemInstance,
    swarm_size: usize,
    rng: &mut R,
) -> Result<Vec<Vec<TaskId>>, RepairError> {
    let rules: Vec<Vec<TaskId>> = priority_orderings(instance)?.into_iter().map(|(_, s)| s).collect();
    let n = instance.tasks().len();
    let graph = instance.graph();
    let mut swarm = Vec::with_capacity(swarm_size);
    for k in 0..swarm_size {
        let mut seq = rules[k % rules.len()].clone();
        if k >= rules.len() && n >= 2 {
            for _ in 0..n {
                let i = rng.gen_range(0..n);
                let j = rng.gen_range(0..n);
                if i == j {
                    continue;
                }
                seq.swap(i, j);
                if !graph.is_feasible(&seq) {
                    seq.swap(i, j);
                }
            }
        }
        swarm.push(seq);
    }
    Ok(swarm)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub iteration: usize,
    pub best: Seconds,
    pub mean: f64,
}

#[derive(Clone, Debug)]
pub struct Particle {
    pub position: Vec<TaskId>,
    pub velocity: SwapPairList,
    pub fitness: Seconds,
    pub local_best: Vec<TaskId>,
    pub local_best_fitness: Seconds,
    rng: ChaCha8Rng,
}

/// Full search state; [`SwarmState::step`] advances one iteration.
#[derive(Clone, Debug)]
pub struct SwarmState<'a> {
    instance: &'a ProblemInstance,
    config: PsoConfig,
    pub particles: Vec<Particle>,
    pub global_best: Vec<TaskId>,
    pub global_best_fitness: Seconds,
    pub iteration: usize,
    pub stagnation: usize,
    pub last_improvement: usize,
    pub history: Vec<HistoryPoint>,
}

fn particle_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

fn mean(values: impl Iterator<Item = Seconds>, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        values.map(|v| v as f64).sum::<f64>() / n as f64
    }
}

impl<'a> SwarmState<'a> {
    pub fn new(instance: &'a ProblemInstance, config: &PsoConfig) -> Result<Self, PsoError> {
        config.validate()?;
        let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
        let positions = generate_initial_swarm(instance, config.swarm_size, &mut init_rng)?;
        let n = instance.tasks().len();
        let band = config.initial_velocity_pairs.unwrap_or_else(|| velocity_band(n));
        let fits: Vec<Seconds> =
            positions.par_iter().map(|p| eat::fitness(p, instance)).collect::<Result<_, _>>()?;
        let particles: Vec<Particle> = positions
            .into_iter()
            .zip(fits)
            .enumerate()
            .map(|(i, (position, fitness))| {
                let mut rng = particle_rng(config.seed, i);
                let velocity = SwapPairList::random(n, band, &mut rng);
                Particle { local_best: position.clone(), local_best_fitness: fitness, position, velocity, fitness, rng }
            })
            .collect();
        let best = (0..particles.len()).min_by_key(|&i| (particles[i].fitness, i)).expect("swarm is non-empty");
        let global_best_fitness = particles[best].fitness;
        let history = vec![HistoryPoint {
            iteration: 0,
            best: global_best_fitness,
            mean: mean(particles.iter().map(|p| p.fitness), particles.len()),
        }];
        Ok(Self {
            instance,
            config: config.clone(),
            global_best: particles[best].position.clone(),
            global_best_fitness,
            particles,
            iteration: 0,
            stagnation: 0,
            last_improvement: 0,
            history,
        })
    }

    pub fn converged(&self) -> bool {
        self.stagnation >= self.config.convergence_window
    }

    pub fn finished(&self) -> bool {
        self.converged() || self.iteration >= self.config.max_iterations
    }

    /// One iteration: velocity update, move, repair, evaluate, then best updates.
    pub fn step(&mut self) -> Result<(), PsoError> {
        let instance = self.instance;
        let (c1, c2) = (self.config.c1, self.config.c2);
        let global = &self.global_best;
        self.particles.par_iter_mut().try_for_each(|p| -> Result<(), PsoError> {
            let v = update_velocity(&p.velocity, &p.position, &p.local_best, global, c1, c2, &mut p.rng)?;
            let moved = apply_swaps(&p.position, &v)?;
            p.position = repair(&moved, instance.graph())?;
            p.velocity = v;
            p.fitness = eat::fitness(&p.position, instance)?;
            Ok(())
        })?;

        self.iteration += 1;
        for p in &mut self.particles {
            if p.fitness < p.local_best_fitness {
                p.local_best_fitness = p.fitness;
                p.local_best = p.position.clone();
            }
        }
        let best = (0..self.particles.len())
            .filter(|&i| self.particles[i].fitness < self.global_best_fitness)
            .min_by_key(|&i| (self.particles[i].fitness, i));
        match best {
            Some(i) => {
                self.global_best_fitness = self.particles[i].fitness;
                self.global_best = self.particles[i].position.clone();
                self.stagnation = 0;
                self.last_improvement = self.iteration;
            }
            None => self.stagnation += 1,
        }
        self.history.push(HistoryPoint {
            iteration: self.iteration,
            best: self.global_best_fitness,
            mean: mean(self.particles.iter().map(|p| p.fitness), self.particles.len()),
        });
        Ok(())
    }
}

/// Outcome of one search. `best_schedule` and `wall_clock_ms` are left out of
/// serialized reports; the schedule is exported separately and timings vary.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub config: PsoConfig,
    pub n_tasks: usize,
    pub best_sequence: Vec<TaskId>,
    pub best_makespan: Seconds,
    pub initial_best_makespan: Seconds,
    /// Iteration of the last global-best improvement (0 if none).
    pub convergence_iteration: usize,
    /// The stagnation window was reached before the iteration limit ran out.
    pub converged: bool,
    pub iterations: usize,
    pub history: Vec<HistoryPoint>,
    #[serde(skip)]
    pub best_schedule: Schedule,
    #[serde(skip)]
    pub wall_clock_ms: f64,
}

pub fn run_pso(instance: &ProblemInstance, config: &PsoConfig) -> Result<RunReport, PsoError> {
    let started = Instant::now();
    let mut state = SwarmState::new(instance, config)?;
    let initial_best_makespan = state.global_best_fitness;
    while !state.finished() {
        state.step()?;
    }
    let best_schedule = eat::build_schedule(&state.global_best, instance)?;
    Ok(RunReport {
        config: config.clone(),
        n_tasks: instance.tasks().len(),
        best_makespan: state.global_best_fitness,
        best_sequence: state.global_best,
        initial_best_makespan,
        convergence_iteration: state.last_improvement,
        converged: state.stagnation >= config.convergence_window,
        iterations: state.iteration,
        history: state.history,
        best_schedule,
        wall_clock_ms: started.elapsed().as_secs_f64() * 1000.0,
    })
}
