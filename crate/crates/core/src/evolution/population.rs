use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EvoConfig, EvoError, MutationKind, Result};
use crate::market_data::Series;
use crate::rnn::{evaluate, EdgeGene, Genome, Lineage, NodeGene};

#[derive(Debug, Clone)]
pub struct Island {
    pub island_id: usize,
    /// Sorted by fitness, best first; ties by genome id.
    pub members: Vec<Genome>,
    pub best_fitness_seen: f64,
    pub evaluations_since_improvement: usize,
}

impl Island {
    fn new(island_id: usize) -> Self {
        Self {
            island_id,
            members: Vec::new(),
            best_fitness_seen: f64::INFINITY,
            evaluations_since_improvement: 0,
        }
    }

    pub fn best(&self) -> Option<&Genome> {
        self.members.first()
    }

    pub fn worst(&self) -> Option<&Genome> {
        self.members.last()
    }

    fn sort(&mut self) {
        self.members
            .sort_by(|a, b| fitness(a).total_cmp(&fitness(b)).then(a.id.cmp(&b.id)));
    }
}

pub(crate) fn fitness(g: &Genome) -> f64 {
    g.fitness.unwrap_or(f64::INFINITY)
}

/// Islands plus every piece of state needed to breed reproducibly.
#[derive(Debug, Clone)]
pub struct Population {
    pub config: EvoConfig,
    pub islands: Vec<Island>,
    pub rng: ChaCha8Rng,
    /// Next unused node id / edge innovation. Never reused.
    pub innovation_counter: u64,
    pub next_genome_id: u64,
    pub evaluations_total: usize,
    pub global_best: Option<Genome>,
}

impl Population {
    pub fn new(config: EvoConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            islands: (0..config.n_islands).map(Island::new).collect(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            innovation_counter: 0,
            next_genome_id: 0,
            evaluations_total: 0,
            global_best: None,
            config,
        })
    }

    pub fn next_innovation(&mut self) -> u64 {
        self.innovation_counter += 1;
        self.innovation_counter - 1
    }

    pub fn next_genome_id(&mut self) -> u64 {
        self.next_genome_id += 1;
        self.next_genome_id - 1
    }

    /// Moves the innovation counter past every id used by `genome`.
    pub fn reserve_innovations(&mut self, genome: &Genome) {
        self.innovation_counter = self.innovation_counter.max(genome.max_innovation() + 1);
    }

    pub(crate) fn new_weight(&mut self) -> f64 {
        let r = self.config.new_weight_range;
        self.rng.gen_range(-r..r)
    }

    pub fn global_best_fitness(&self) -> f64 {
        self.global_best.as_ref().map_or(f64::INFINITY, fitness)
    }

    /// Offers an evaluated genome to the island it came from. A full island
    /// rejects anything not strictly better than its worst member.
    pub fn insert(&mut self, genome: Genome) -> Result<bool> {
        let Some(f) = genome.fitness else {
            return Err(EvoError::Unevaluated(genome.id));
        };
        let capacity = self.config.capacity;
        let best_so_far = self.global_best_fitness();
        let island = self
            .islands
            .get_mut(genome.island)
            .ok_or(EvoError::UnknownIsland(genome.island))?;

        if f < island.best_fitness_seen {
            island.best_fitness_seen = f;
            island.evaluations_since_improvement = 0;
        } else {
            island.evaluations_since_improvement += 1;
        }

        if island.members.len() >= capacity && island.worst().is_some_and(|w| f >= fitness(w)) {
            return Ok(false);
        }
        island.members.push(genome);
        island.sort();
        island.members.truncate(capacity);
        if f < best_so_far {
            self.global_best = island.best().cloned();
        }
        Ok(true)
    }

    fn island_of_global_best(&self) -> Option<usize> {
        let best = self.global_best.as_ref()?;
        self.islands
            .iter()
            .position(|i| i.members.iter().any(|m| m.id == best.id))
    }

    /// The island with the worst best member, skipping the island that holds
    /// the global best. Empty islands count as worst; ties go to the lowest id.
    pub fn worst_island(&self) -> Option<usize> {
        let exempt = self.island_of_global_best();
        let mut worst: Option<(usize, f64)> = None;
        for island in &self.islands {
            if Some(island.island_id) == exempt {
                continue;
            }
            let f = island.best().map_or(f64::INFINITY, fitness);
            if worst.is_none_or(|(_, w)| f > w) {
                worst = Some((island.island_id, f));
            }
        }
        worst.map(|(id, _)| id)
    }

    /// Clears the worst island and refills it with single mutations of the
    /// global best. Refills are scored on `valid` without retraining. Returns
    /// the island id, or `None` if no island is eligible.
    pub fn repopulate_worst_island(&mut self, valid: &Series) -> Result<Option<usize>> {
        let Some(best) = self.global_best.clone() else {
            return Ok(None);
        };
        let Some(target) = self.worst_island() else {
            return Ok(None);
        };
        let mut members = Vec::with_capacity(self.config.capacity);
        for _ in 0..self.config.capacity {
            let kind = self.random_mutation_kind();
            let (mut child, _) = self.mutate(&best, kind);
            child.island = target;
            child.lineage.parents = vec![best.id];
            child.fitness = Some(evaluate(&child, valid).unwrap_or(f64::INFINITY));
            members.push(child);
        }
        let island = &mut self.islands[target];
        island.members = members;
        island.sort();
        island.best_fitness_seen = island.best().map_or(f64::INFINITY, fitness);
        island.evaluations_since_improvement = 0;
        Ok(Some(target))
    }

    pub fn random_mutation_kind(&mut self) -> MutationKind {
        use rand::distributions::{Distribution, WeightedIndex};
        let weights = MutationKind::ALL.map(|k| self.config.mutation_weights.weight(k));
        let dist = WeightedIndex::new(weights).expect("validated mutation weights");
        MutationKind::ALL[dist.sample(&mut self.rng)]
    }
}

/// Minimal starting network: every input wired straight to the output with
/// weights from `U(-r, r)`, no hidden nodes and no recurrent edges.
pub fn seed_genome(population: &mut Population, n_inputs: usize) -> Genome {
    let mut nodes: Vec<NodeGene> = (0..n_inputs)
        .map(|_| NodeGene::input(population.next_innovation()))
        .collect();
    let output = NodeGene::output(population.next_innovation());
    let out_id = output.id;
    nodes.push(output);
    let edges = (0..n_inputs)
        .map(|i| EdgeGene {
            innovation: population.next_innovation(),
            source: nodes[i].id,
            target: out_id,
            weight: population.new_weight(),
            enabled: true,
        })
        .collect();
    Genome {
        id: population.next_genome_id(),
        nodes,
        edges,
        recurrent_edges: Vec::new(),
        island: 0,
        fitness: None,
        lineage: Lineage {
            operator: "seed".into(),
            parents: Vec::new(),
        },
    }
}
