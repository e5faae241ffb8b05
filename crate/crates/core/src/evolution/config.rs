use serde::{Deserialize, Serialize};

use super::{EvoError, MutationKind, Result};
use crate::rnn::{CellKind, MAX_TIME_SKIP};

/// Relative selection weight of each mutation kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MutationWeights {
    pub clone: f64,
    pub add_edge: f64,
    pub add_recurrent_edge: f64,
    pub enable_edge: f64,
    pub disable_edge: f64,
    pub split_edge: f64,
    pub add_node: f64,
    pub enable_node: f64,
    pub disable_node: f64,
    pub split_node: f64,
    pub merge_node: f64,
}

impl Default for MutationWeights {
    fn default() -> Self {
        Self {
            clone: 1.0,
            add_edge: 1.0,
            add_recurrent_edge: 1.0,
            enable_edge: 1.0,
            disable_edge: 1.0,
            split_edge: 1.0,
            add_node: 1.0,
            enable_node: 1.0,
            disable_node: 1.0,
            split_node: 1.0,
            merge_node: 1.0,
        }
    }
}

impl MutationWeights {
    pub fn weight(&self, kind: MutationKind) -> f64 {
        match kind {
            MutationKind::Clone => self.clone,
            MutationKind::AddEdge => self.add_edge,
            MutationKind::AddRecurrentEdge => self.add_recurrent_edge,
            MutationKind::EnableEdge => self.enable_edge,
            MutationKind::DisableEdge => self.disable_edge,
            MutationKind::SplitEdge => self.split_edge,
            MutationKind::AddNode => self.add_node,
            MutationKind::EnableNode => self.enable_node,
            MutationKind::DisableNode => self.disable_node,
            MutationKind::SplitNode => self.split_node,
            MutationKind::MergeNode => self.merge_node,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvoConfig {
    pub n_islands: usize,
    /// Maximum members per island.
    pub capacity: usize,
    /// Number of trained and evaluated children, not counting the seed.
    pub budget: usize,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    /// Share of crossovers whose second parent is another island's best.
    pub inter_island_share: f64,
    pub mutation_weights: MutationWeights,
    pub time_skip_max: u32,
    /// Evaluations between repopulations of the worst island.
    pub repopulation_period: usize,
    /// New weights and cell parameters are drawn from `U(-r, r)`.
    pub new_weight_range: f64,
    /// Cell kinds a newly created hidden node may take.
    pub node_kinds: Vec<CellKind>,
    pub seed: u64,
}

impl Default for EvoConfig {
    fn default() -> Self {
        Self {
            n_islands: 10,
            capacity: 10,
            budget: 2000,
            mutation_rate: 0.7,
            crossover_rate: 0.3,
            inter_island_share: 1.0 / 3.0,
            mutation_weights: MutationWeights::default(),
            time_skip_max: MAX_TIME_SKIP,
            repopulation_period: 400,
            new_weight_range: 0.5,
            node_kinds: CellKind::ALL.to_vec(),
            seed: 0,
        }
    }
}

impl EvoConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(EvoError::Config(m));
        if self.n_islands == 0 || self.capacity == 0 {
            return err("n_islands and capacity must be positive".into());
        }
        let rates = [self.mutation_rate, self.crossover_rate];
        if rates.iter().any(|r| !(0.0..=1.0).contains(r)) || (rates[0] + rates[1] - 1.0).abs() > 1e-9 {
            return err(format!(
                "mutation_rate {} and crossover_rate {} must be in [0, 1] and sum to 1",
                self.mutation_rate, self.crossover_rate
            ));
        }
        if !(0.0..=1.0).contains(&self.inter_island_share) {
            return err("inter_island_share must be in [0, 1]".into());
        }
        let weights: Vec<f64> = MutationKind::ALL
            .iter()
            .map(|&k| self.mutation_weights.weight(k))
            .collect();
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) || weights.iter().sum::<f64>() <= 0.0 {
            return err("mutation weights must be non-negative with a positive sum".into());
        }
        if !(1..=MAX_TIME_SKIP).contains(&self.time_skip_max) {
            return err(format!("time_skip_max must be in 1..={MAX_TIME_SKIP}"));
        }
        if !(self.new_weight_range > 0.0 && self.new_weight_range.is_finite()) {
            return err("new_weight_range must be positive".into());
        }
        if self.node_kinds.is_empty() {
            return err("node_kinds is empty".into());
        }
        if self.repopulation_period == 0 {
            return err("repopulation_period must be positive".into());
        }
        Ok(())
    }
}
