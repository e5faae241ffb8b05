use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};

use crossbeam_channel::{unbounded, Receiver, Sender};
use rand::seq::SliceRandom;
use rand::Rng;

use super::{crossover, seed_genome, EvoConfig, Population, Result};
use crate::market_data::{Series, StockDataset};
use crate::rnn::{bptt_train, evaluate_validation, Genome, TrainConfig};

pub const LOG_HEADER: &str = "evaluation_index,island_id,operator,parent_ids,fitness,global_best_fitness";

/// One line of the evolution log. `fitness` is `None` for a child whose
/// training failed twice.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionRecord {
    pub evaluation_index: usize,
    pub island_id: usize,
    pub operator: String,
    pub parent_ids: Vec<u64>,
    pub fitness: Option<f64>,
    pub global_best_fitness: f64,
}

impl fmt::Display for EvolutionRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parents: Vec<String> = self.parent_ids.iter().map(u64::to_string).collect();
        let fit = self.fitness.map_or_else(String::new, |x| x.to_string());
        write!(
            f,
            "{},{},{},{},{},{}",
            self.evaluation_index,
            self.island_id,
            self.operator,
            parents.join(";"),
            fit,
            self.global_best_fitness
        )
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub best: Genome,
    /// The seed genome after training, with its validation fitness.
    pub seed: Genome,
    pub log: Vec<EvolutionRecord>,
    pub population: Population,
}

impl EvolutionResult {
    /// The log as text, header first.
    pub fn log_csv(&self) -> String {
        let mut s = String::from(LOG_HEADER);
        s.push('\n');
        for r in &self.log {
            s.push_str(&r.to_string());
            s.push('\n');
        }
        s
    }
}

/// Evolves forecasters for one dataset's train and validation splits.
pub fn evolve(
    dataset: &StockDataset,
    config: &EvoConfig,
    train_config: &TrainConfig,
    workers: usize,
) -> Result<EvolutionResult> {
    evolve_series(&dataset.train_series(), &dataset.valid_series(), config, train_config, workers)
}

struct Task {
    genome: Genome,
    retry: bool,
}

struct Outcome {
    task: Task,
    result: std::result::Result<Genome, String>,
}

fn train_and_score(genome: &Genome, train: &Series, valid: &Series, cfg: &TrainConfig) -> std::result::Result<Genome, String> {
    let run = || -> crate::rnn::Result<Genome> {
        let (mut g, _) = bptt_train(genome, train, cfg)?;
        evaluate_validation(&mut g, valid)?;
        Ok(g)
    };
    match catch_unwind(AssertUnwindSafe(run)) {
        Ok(Ok(g)) if g.fitness.is_some_and(f64::is_finite) => Ok(g),
        Ok(Ok(_)) => Err("validation loss is not finite".into()),
        Ok(Err(e)) => Err(e.to_string()),
        Err(_) => Err("worker panicked".into()),
    }
}

fn worker(tasks: Receiver<Task>, results: Sender<Outcome>, train: &Series, valid: &Series, cfg: &TrainConfig) {
    for task in tasks {
        let result = train_and_score(&task.genome, train, valid, cfg);
        if results.send(Outcome { task, result }).is_err() {
            break;
        }
    }
}

/// Steady-state island evolution.
///
/// The seed is trained once and copied onto every island; it is evaluation 0
/// and does not count against `config.budget`. The coordinator then keeps up
/// to `workers` children in flight, inserting each as soon as it returns. A
/// child whose training fails is retried once, then logged without a fitness
/// and skipped. With one worker the run is fully determined by
/// `config.seed`.
pub fn evolve_series(
    train: &Series,
    valid: &Series,
    config: &EvoConfig,
    train_config: &TrainConfig,
    workers: usize,
) -> Result<EvolutionResult> {
    train_config.validate()?;
    let mut pop = Population::new(config.clone())?;
    let workers = workers.max(1);

    let seed = seed_genome(&mut pop, train.width);
    let (mut seed, _) = bptt_train(&seed, train, train_config)?;
    evaluate_validation(&mut seed, valid)?;
    for island in 0..config.n_islands {
        let mut copy = seed.clone();
        copy.id = pop.next_genome_id();
        copy.island = island;
        copy.lineage.parents = vec![seed.id];
        pop.insert(copy)?;
    }
    let mut log = vec![EvolutionRecord {
        evaluation_index: 0,
        island_id: 0,
        operator: "seed".into(),
        parent_ids: Vec::new(),
        fitness: seed.fitness,
        global_best_fitness: pop.global_best_fitness(),
    }];

    std::thread::scope(|scope| -> Result<()> {
        let (task_tx, task_rx) = unbounded::<Task>();
        let (out_tx, out_rx) = unbounded::<Outcome>();
        for _ in 0..workers {
            let (rx, tx) = (task_rx.clone(), out_tx.clone());
            scope.spawn(move || worker(rx, tx, train, valid, train_config));
        }
        drop(out_tx);

        let mut issued = 0;
        let mut in_flight = 0;
        let dispatch = |pop: &mut Population, issued: &mut usize, in_flight: &mut usize| {
            while *in_flight < workers && *issued < config.budget {
                let genome = breed(pop);
                task_tx.send(Task { genome, retry: false }).expect("workers alive");
                *issued += 1;
                *in_flight += 1;
            }
        };
        dispatch(&mut pop, &mut issued, &mut in_flight);

        while in_flight > 0 {
            let Outcome { task, result } = out_rx.recv().expect("workers alive");
            in_flight -= 1;
            if result.is_err() && !task.retry {
                task_tx
                    .send(Task { genome: task.genome, retry: true })
                    .expect("workers alive");
                in_flight += 1;
                continue;
            }

            pop.evaluations_total += 1;
            let child = task.genome;
            let fit = match result {
                Ok(trained) => {
                    let f = trained.fitness;
                    pop.insert(trained)?;
                    f
                }
                Err(_) => None,
            };
            log.push(EvolutionRecord {
                evaluation_index: pop.evaluations_total,
                island_id: child.island,
                operator: child.lineage.operator.clone(),
                parent_ids: child.lineage.parents.clone(),
                fitness: fit,
                global_best_fitness: pop.global_best_fitness(),
            });
            if pop.evaluations_total % config.repopulation_period == 0 {
                pop.repopulate_worst_island(valid)?;
            }
            dispatch(&mut pop, &mut issued, &mut in_flight);
        }
        // closing the queue lets the workers exit before the scope joins them
        drop(task_tx);
        Ok(())
    })?;

    let best = pop.global_best.clone().expect("seed was inserted");
    Ok(EvolutionResult {
        best,
        seed,
        log,
        population: pop,
    })
}

/// Picks an island and produces one untrained child for it.
fn breed(pop: &mut Population) -> Genome {
    let n_islands = pop.islands.len();
    let island = pop.rng.gen_range(0..n_islands);
    let mut child = if pop.rng.gen::<f64>() < pop.config.mutation_rate {
        mutate_member(pop, island)
    } else {
        let inter = n_islands > 1 && pop.rng.gen::<f64>() < pop.config.inter_island_share;
        let parents = if inter {
            let mut other = pop.rng.gen_range(0..n_islands - 1);
            if other >= island {
                other += 1;
            }
            let a = pop.islands[island].members.choose(&mut pop.rng).cloned();
            let b = pop.islands[other].best().cloned();
            a.zip(b)
        } else {
            let picked: Vec<Genome> = pop.islands[island]
                .members
                .choose_multiple(&mut pop.rng, 2)
                .cloned()
                .collect();
            (picked.len() == 2).then(|| (picked[0].clone(), picked[1].clone()))
        };
        match parents {
            Some((mut a, b)) => {
                a.island = island;
                crossover(&a, &b, pop).unwrap_or_else(|_| mutate_member(pop, island))
            }
            None => mutate_member(pop, island),
        }
    };
    child.island = island;
    child
}

fn mutate_member(pop: &mut Population, island: usize) -> Genome {
    let parent = pop.islands[island]
        .members
        .choose(&mut pop.rng)
        .cloned()
        .or_else(|| pop.global_best.clone())
        .expect("population is seeded");
    let kind = pop.random_mutation_kind();
    pop.mutate(&parent, kind).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::population::fitness;

    fn ar2(len: usize) -> (Series, Series) {
        let mut y = vec![0.1, -0.05];
        let mut noise = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        use rand::SeedableRng;
        for t in 2..len + 10 {
            let e: f64 = noise.gen_range(-0.05..0.05);
            y.push(0.6 * y[t - 1] - 0.3 * y[t - 2] + e);
        }
        let rows: Vec<Vec<f64>> = (3..len + 3).map(|t| vec![y[t - 1], y[t - 2]]).collect();
        let targets: Vec<f64> = (3..len + 3).map(|t| y[t]).collect();
        let cut = len * 3 / 4;
        (
            Series::from_rows(&rows[..cut], targets[..cut].to_vec()),
            Series::from_rows(&rows[cut..], targets[cut..].to_vec()),
        )
    }

    fn small(budget: usize) -> EvoConfig {
        EvoConfig {
            n_islands: 3,
            capacity: 4,
            budget,
            repopulation_period: 10,
            seed: 7,
            ..EvoConfig::default()
        }
    }

    #[test]
    fn zero_budget_returns_trained_seed() {
        let (train, valid) = ar2(120);
        let r = evolve_series(&train, &valid, &small(0), &TrainConfig::default(), 1).unwrap();
        assert_eq!(r.log.len(), 1);
        assert_eq!(r.best.fitness, r.seed.fitness);
        assert_eq!(r.best.edges, r.seed.edges);
    }

    #[test]
    fn single_worker_runs_repeat_exactly() {
        let (train, valid) = ar2(120);
        let a = evolve_series(&train, &valid, &small(40), &TrainConfig::default(), 1).unwrap();
        let b = evolve_series(&train, &valid, &small(40), &TrainConfig::default(), 1).unwrap();
        assert_eq!(a.log_csv(), b.log_csv());
        assert_eq!(a.best, b.best);
        assert_eq!(a.log.len(), 41);
    }

    #[test]
    fn log_is_monotone_and_islands_bounded() {
        let (train, valid) = ar2(120);
        let r = evolve_series(&train, &valid, &small(60), &TrainConfig::default(), 3).unwrap();
        assert_eq!(r.log.len(), 61);
        for w in r.log.windows(2) {
            assert!(w[1].global_best_fitness <= w[0].global_best_fitness);
        }
        assert!(r.population.islands.iter().all(|i| i.members.len() <= 4));
        assert_eq!(fitness(&r.best), r.log.last().unwrap().global_best_fitness);
        r.best.validate().unwrap();
    }

    #[test]
    fn record_formatting() {
        let rec = EvolutionRecord {
            evaluation_index: 12,
            island_id: 3,
            operator: "intra_crossover".into(),
            parent_ids: vec![4, 9],
            fitness: Some(0.25),
            global_best_fitness: 0.125,
        };
        assert_eq!(rec.to_string(), "12,3,intra_crossover,4;9,0.25,0.125");
    }
}
