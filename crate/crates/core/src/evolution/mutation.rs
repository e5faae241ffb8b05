use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{EvoError, Population};
use crate::rnn::{EdgeGene, Genome, Lineage, NodeGene, NodeKind, RecurrentEdgeGene};

/// Attempts per structural mutation before falling back to a clone.
const MAX_ATTEMPTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationKind {
    Clone,
    AddEdge,
    AddRecurrentEdge,
    EnableEdge,
    DisableEdge,
    SplitEdge,
    AddNode,
    EnableNode,
    DisableNode,
    SplitNode,
    MergeNode,
}

impl MutationKind {
    pub const ALL: [MutationKind; 11] = [
        MutationKind::Clone,
        MutationKind::AddEdge,
        MutationKind::AddRecurrentEdge,
        MutationKind::EnableEdge,
        MutationKind::DisableEdge,
        MutationKind::SplitEdge,
        MutationKind::AddNode,
        MutationKind::EnableNode,
        MutationKind::DisableNode,
        MutationKind::SplitNode,
        MutationKind::MergeNode,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MutationKind::Clone => "clone",
            MutationKind::AddEdge => "add_edge",
            MutationKind::AddRecurrentEdge => "add_recurrent_edge",
            MutationKind::EnableEdge => "enable_edge",
            MutationKind::DisableEdge => "disable_edge",
            MutationKind::SplitEdge => "split_edge",
            MutationKind::AddNode => "add_node",
            MutationKind::EnableNode => "enable_node",
            MutationKind::DisableNode => "disable_node",
            MutationKind::SplitNode => "split_node",
            MutationKind::MergeNode => "merge_node",
        }
    }
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MutationKind {
    type Err = EvoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MutationKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| EvoError::Config(format!("unknown mutation `{s}`")))
    }
}

/// Edge endpoints that are live: enabled edges between enabled nodes.
fn enabled_ids(g: &Genome) -> HashSet<u64> {
    g.nodes.iter().filter(|n| n.enabled).map(|n| n.id).collect()
}

fn depth_of(g: &Genome, id: u64) -> f64 {
    g.node(id).map_or(f64::NAN, |n| n.depth)
}

impl Population {
    /// Applies one mutation of `kind` to a copy of `parent`. Returns the child
    /// and the operator actually applied: a kind that finds nothing valid to
    /// do falls back to [`MutationKind::Clone`].
    ///
    /// Every gene the mutation does not touch keeps the parent's values bit
    /// for bit; new genes get fresh innovations and weights from
    /// `U(-r, r)`.
    pub fn mutate(&mut self, parent: &Genome, kind: MutationKind) -> (Genome, MutationKind) {
        let mut applied = MutationKind::Clone;
        let mut child = parent.clone();
        if kind != MutationKind::Clone {
            for _ in 0..MAX_ATTEMPTS {
                let saved = self.innovation_counter;
                let mut trial = parent.clone();
                if self.apply(&mut trial, kind) && trial.validate().is_ok() {
                    child = trial;
                    applied = kind;
                    break;
                }
                // failed attempts give back the ids they took
                self.innovation_counter = saved;
            }
        }
        child.id = self.next_genome_id();
        child.fitness = None;
        child.lineage = Lineage {
            operator: applied.name().to_string(),
            parents: vec![parent.id],
        };
        (child, applied)
    }

    fn apply(&mut self, g: &mut Genome, kind: MutationKind) -> bool {
        match kind {
            MutationKind::Clone => true,
            MutationKind::AddEdge => self.add_edge(g),
            MutationKind::AddRecurrentEdge => self.add_recurrent_edge(g),
            MutationKind::EnableEdge => self.toggle_edge(g, true),
            MutationKind::DisableEdge => self.toggle_edge(g, false),
            MutationKind::SplitEdge => self.split_edge(g),
            MutationKind::AddNode => self.add_node(g),
            MutationKind::EnableNode => self.toggle_node(g, true),
            MutationKind::DisableNode => self.toggle_node(g, false),
            MutationKind::SplitNode => self.split_node(g),
            MutationKind::MergeNode => self.merge_node(g),
        }
    }

    fn new_params(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.new_weight()).collect()
    }

    fn new_hidden(&mut self, depth: f64) -> NodeGene {
        let cell = *self.config.node_kinds.choose(&mut self.rng).expect("node kinds validated");
        let id = self.next_innovation();
        let params = self.new_params(cell.param_count());
        NodeGene::hidden(id, cell, depth, params)
    }

    fn new_edge(&mut self, source: u64, target: u64) -> EdgeGene {
        EdgeGene {
            innovation: self.next_innovation(),
            source,
            target,
            weight: self.new_weight(),
            enabled: true,
        }
    }

    fn new_recurrent(&mut self, source: u64, target: u64) -> RecurrentEdgeGene {
        RecurrentEdgeGene {
            innovation: self.next_innovation(),
            source,
            target,
            weight: self.new_weight(),
            enabled: true,
            time_skip: self.rng.gen_range(1..=self.config.time_skip_max),
        }
    }

    fn add_edge(&mut self, g: &mut Genome) -> bool {
        let existing: HashSet<(u64, u64)> = g.edges.iter().map(|e| (e.source, e.target)).collect();
        let live: Vec<&NodeGene> = g.nodes.iter().filter(|n| n.enabled).collect();
        let mut pairs = Vec::new();
        for s in &live {
            for t in &live {
                if s.depth < t.depth && !existing.contains(&(s.id, t.id)) {
                    pairs.push((s.id, t.id));
                }
            }
        }
        let Some(&(s, t)) = pairs.choose(&mut self.rng) else {
            return false;
        };
        let e = self.new_edge(s, t);
        g.edges.push(e);
        true
    }

    fn add_recurrent_edge(&mut self, g: &mut Genome) -> bool {
        let live: Vec<&NodeGene> = g.nodes.iter().filter(|n| n.enabled).collect();
        let targets: Vec<u64> = live.iter().filter(|n| n.kind != NodeKind::Input).map(|n| n.id).collect();
        let (Some(s), Some(&t)) = (live.choose(&mut self.rng).map(|n| n.id), targets.choose(&mut self.rng)) else {
            return false;
        };
        let e = self.new_recurrent(s, t);
        if g
            .recurrent_edges
            .iter()
            .any(|r| r.source == s && r.target == t && r.time_skip == e.time_skip)
        {
            return false;
        }
        g.recurrent_edges.push(e);
        true
    }

    /// Flips one edge (feed-forward or recurrent) whose `enabled` flag is
    /// `!enable`.
    fn toggle_edge(&mut self, g: &mut Genome, enable: bool) -> bool {
        let n_ff = g.edges.len();
        let candidates: Vec<usize> = g
            .edges
            .iter()
            .map(|e| e.enabled)
            .chain(g.recurrent_edges.iter().map(|e| e.enabled))
            .enumerate()
            .filter(|&(_, on)| on != enable)
            .map(|(i, _)| i)
            .collect();
        let Some(&k) = candidates.choose(&mut self.rng) else {
            return false;
        };
        if k < n_ff {
            g.edges[k].enabled = enable;
        } else {
            g.recurrent_edges[k - n_ff].enabled = enable;
        }
        true
    }

    fn split_edge(&mut self, g: &mut Genome) -> bool {
        let live = enabled_ids(g);
        let candidates: Vec<usize> = (0..g.edges.len())
            .filter(|&i| g.edges[i].enabled && live.contains(&g.edges[i].source) && live.contains(&g.edges[i].target))
            .collect();
        let Some(&k) = candidates.choose(&mut self.rng) else {
            return false;
        };
        let (s, t) = (g.edges[k].source, g.edges[k].target);
        let depth = (depth_of(g, s) + depth_of(g, t)) / 2.0;
        g.edges[k].enabled = false;
        let node = self.new_hidden(depth);
        let id = node.id;
        g.nodes.push(node);
        let a = self.new_edge(s, id);
        let b = self.new_edge(id, t);
        g.edges.extend([a, b]);
        true
    }

    /// Adds a node at a random depth fed by 1 to 3 shallower live nodes and
    /// feeding 1 to 3 deeper ones.
    fn add_node(&mut self, g: &mut Genome) -> bool {
        let depth = self.rng.gen_range(0.0..1.0);
        if depth <= 0.0 {
            return false;
        }
        let live: Vec<&NodeGene> = g.nodes.iter().filter(|n| n.enabled).collect();
        let below: Vec<u64> = live.iter().filter(|n| n.depth < depth).map(|n| n.id).collect();
        let above: Vec<u64> = live.iter().filter(|n| n.depth > depth).map(|n| n.id).collect();
        if below.is_empty() || above.is_empty() {
            return false;
        }
        let node = self.new_hidden(depth);
        let id = node.id;
        g.nodes.push(node);
        let n_in = self.rng.gen_range(1..=below.len().min(3));
        for &s in below.choose_multiple(&mut self.rng, n_in).collect::<Vec<_>>() {
            let e = self.new_edge(s, id);
            g.edges.push(e);
        }
        let n_out = self.rng.gen_range(1..=above.len().min(3));
        for &t in above.choose_multiple(&mut self.rng, n_out).collect::<Vec<_>>() {
            let e = self.new_edge(id, t);
            g.edges.push(e);
        }
        true
    }

    fn toggle_node(&mut self, g: &mut Genome, enable: bool) -> bool {
        let candidates: Vec<usize> = (0..g.nodes.len())
            .filter(|&i| g.nodes[i].kind == NodeKind::Hidden && g.nodes[i].enabled != enable)
            .collect();
        let Some(&k) = candidates.choose(&mut self.rng) else {
            return false;
        };
        g.nodes[k].enabled = enable;
        if !enable {
            g.disable_unreachable();
        }
        true
    }

    /// Replaces a live hidden node by two at the same depth. Its incoming and
    /// outgoing links are dealt between the two, each new node keeping at
    /// least one of each.
    fn split_node(&mut self, g: &mut Genome) -> bool {
        let live = enabled_ids(g);
        let candidates: Vec<u64> = g
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Hidden && n.enabled)
            .map(|n| n.id)
            .collect();
        let Some(&old) = candidates.choose(&mut self.rng) else {
            return false;
        };
        let ins: Vec<u64> = live_ff(g, &live).filter(|e| e.target == old).map(|e| e.source).collect();
        let outs: Vec<u64> = live_ff(g, &live).filter(|e| e.source == old).map(|e| e.target).collect();
        if ins.is_empty() || outs.is_empty() {
            return false;
        }
        let old_node = g.node(old).expect("candidate exists").clone();
        let ins = self.deal(&ins);
        let outs = self.deal(&outs);
        let rec: Vec<(u64, u64)> = g
            .recurrent_edges
            .iter()
            .filter(|e| e.enabled && (e.source == old || e.target == old))
            .map(|e| (e.source, e.target))
            .collect();

        disable_node_and_links(g, old);
        let mut halves = Vec::new();
        for side in 0..2 {
            let id = self.next_innovation();
            let params = self.new_params(old_node.cell.param_count());
            g.nodes.push(NodeGene::hidden(id, old_node.cell, old_node.depth, params));
            for &s in &ins[side] {
                let e = self.new_edge(s, id);
                g.edges.push(e);
            }
            for &t in &outs[side] {
                let e = self.new_edge(id, t);
                g.edges.push(e);
            }
            halves.push(id);
        }
        for (s, t) in rec {
            let pick = halves[self.rng.gen_range(0..2)];
            let (s, t) = (if s == old { pick } else { s }, if t == old { pick } else { t });
            let e = self.new_recurrent(s, t);
            g.recurrent_edges.push(e);
        }
        true
    }

    /// Splits `items` into two non-empty groups; with a single item both
    /// groups share it.
    fn deal(&mut self, items: &[u64]) -> [Vec<u64>; 2] {
        if items.len() == 1 {
            return [items.to_vec(), items.to_vec()];
        }
        loop {
            let mut groups = [Vec::new(), Vec::new()];
            for &x in items {
                groups[self.rng.gen_range(0..2)].push(x);
            }
            if !groups[0].is_empty() && !groups[1].is_empty() {
                return groups;
            }
        }
    }

    /// Fuses two live hidden nodes into one at their mean depth. Links that
    /// would break depth order at the new depth are dropped.
    fn merge_node(&mut self, g: &mut Genome) -> bool {
        let candidates: Vec<&NodeGene> = g
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Hidden && n.enabled)
            .collect();
        if candidates.len() < 2 {
            return false;
        }
        let pair: Vec<NodeGene> = candidates.choose_multiple(&mut self.rng, 2).map(|n| (*n).clone()).collect();
        let (a, b) = (pair[0].id, pair[1].id);
        let depth = (pair[0].depth + pair[1].depth) / 2.0;
        let merged_pair = |id: u64| id == a || id == b;

        let live = enabled_ids(g);
        let mut ins = Vec::new();
        let mut outs = Vec::new();
        for e in live_ff(g, &live) {
            if merged_pair(e.target) && !merged_pair(e.source) && depth_of(g, e.source) < depth {
                ins.push(e.source);
            }
            if merged_pair(e.source) && !merged_pair(e.target) && depth_of(g, e.target) > depth {
                outs.push(e.target);
            }
        }
        dedup_keep_order(&mut ins);
        dedup_keep_order(&mut outs);
        if ins.is_empty() || outs.is_empty() {
            return false;
        }
        let rec: Vec<(u64, u64)> = g
            .recurrent_edges
            .iter()
            .filter(|e| e.enabled && (merged_pair(e.source) || merged_pair(e.target)))
            .map(|e| (e.source, e.target))
            .collect();

        disable_node_and_links(g, a);
        disable_node_and_links(g, b);
        let node = self.new_hidden(depth);
        let id = node.id;
        g.nodes.push(node);
        for s in ins {
            let e = self.new_edge(s, id);
            g.edges.push(e);
        }
        for t in outs {
            let e = self.new_edge(id, t);
            g.edges.push(e);
        }
        let mut seen = HashSet::new();
        for (s, t) in rec {
            let s = if merged_pair(s) { id } else { s };
            let t = if merged_pair(t) { id } else { t };
            if seen.insert((s, t)) {
                let e = self.new_recurrent(s, t);
                g.recurrent_edges.push(e);
            }
        }
        g.disable_unreachable();
        true
    }
}

fn live_ff<'a>(g: &'a Genome, live: &'a HashSet<u64>) -> impl Iterator<Item = &'a EdgeGene> {
    g.edges
        .iter()
        .filter(move |e| e.enabled && live.contains(&e.source) && live.contains(&e.target))
}

fn disable_node_and_links(g: &mut Genome, id: u64) {
    if let Some(n) = g.nodes.iter_mut().find(|n| n.id == id) {
        n.enabled = false;
    }
    for e in g.edges.iter_mut().filter(|e| e.source == id || e.target == id) {
        e.enabled = false;
    }
    for e in g.recurrent_edges.iter_mut().filter(|e| e.source == id || e.target == id) {
        e.enabled = false;
    }
}

fn dedup_keep_order(v: &mut Vec<u64>) {
    let mut seen = HashSet::new();
    v.retain(|x| seen.insert(*x));
}
