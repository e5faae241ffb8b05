use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Result, RnnError};

/// Largest time skip a recurrent edge may span.
pub const MAX_TIME_SKIP: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Input,
    Output,
    Hidden,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Simple,
    Lstm,
    Gru,
    Mgu,
}

impl CellKind {
    pub const ALL: [CellKind; 4] = [CellKind::Simple, CellKind::Lstm, CellKind::Gru, CellKind::Mgu];

    pub fn param_count(self) -> usize {
        match self {
            CellKind::Simple => 1,
            CellKind::Lstm => 12,
            CellKind::Gru => 9,
            CellKind::Mgu => 6,
        }
    }

    pub fn is_memory_cell(self) -> bool {
        self != CellKind::Simple
    }

    pub fn name(self) -> &'static str {
        match self {
            CellKind::Simple => "simple",
            CellKind::Lstm => "lstm",
            CellKind::Gru => "gru",
            CellKind::Mgu => "mgu",
        }
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CellKind {
    type Err = RnnError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "simple" => Ok(CellKind::Simple),
            "lstm" => Ok(CellKind::Lstm),
            "gru" => Ok(CellKind::Gru),
            "mgu" => Ok(CellKind::Mgu),
            _ => Err(RnnError::UnsupportedCell(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeGene {
    pub id: u64,
    pub kind: NodeKind,
    pub cell: CellKind,
    pub depth: f64,
    pub enabled: bool,
    pub params: Vec<f64>,
}

impl NodeGene {
    pub fn input(id: u64) -> Self {
        Self {
            id,
            kind: NodeKind::Input,
            cell: CellKind::Simple,
            depth: 0.0,
            enabled: true,
            params: Vec::new(),
        }
    }

    /// Output node with a zero bias.
    pub fn output(id: u64) -> Self {
        Self {
            id,
            kind: NodeKind::Output,
            cell: CellKind::Simple,
            depth: 1.0,
            enabled: true,
            params: vec![0.0],
        }
    }

    pub fn hidden(id: u64, cell: CellKind, depth: f64, params: Vec<f64>) -> Self {
        Self {
            id,
            kind: NodeKind::Hidden,
            cell,
            depth,
            enabled: true,
            params,
        }
    }

    pub fn expected_params(&self) -> usize {
        match self.kind {
            NodeKind::Input => 0,
            NodeKind::Output => 1,
            NodeKind::Hidden => self.cell.param_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeGene {
    pub innovation: u64,
    pub source: u64,
    pub target: u64,
    pub weight: f64,
    pub enabled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrentEdgeGene {
    pub innovation: u64,
    pub source: u64,
    pub target: u64,
    pub weight: f64,
    pub enabled: bool,
    pub time_skip: u32,
}

/// How a genome came to be; kept for the evolution log.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lineage {
    pub operator: String,
    pub parents: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    pub id: u64,
    pub nodes: Vec<NodeGene>,
    pub edges: Vec<EdgeGene>,
    pub recurrent_edges: Vec<RecurrentEdgeGene>,
    pub island: usize,
    /// Validation MSE; `None` until evaluated.
    pub fitness: Option<f64>,
    pub lineage: Lineage,
}

impl Genome {
    pub fn node(&self, id: u64) -> Option<&NodeGene> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub(crate) fn node_index(&self) -> HashMap<u64, usize> {
        self.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect()
    }

    /// Input node ids in feature-column order (ascending id).
    pub fn input_ids(&self) -> Vec<u64> {
        let mut ids: Vec<u64> = self
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Input)
            .map(|n| n.id)
            .collect();
        ids.sort_unstable();
        ids
    }

    pub fn n_inputs(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Input).count()
    }

    pub fn output_id(&self) -> Option<u64> {
        self.nodes
            .iter()
            .find(|n| n.kind == NodeKind::Output)
            .map(|n| n.id)
    }

    pub fn hidden_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Hidden).count()
    }

    pub fn enabled_hidden_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Hidden && n.enabled)
            .count()
    }

    /// Largest innovation number used by any gene.
    pub fn max_innovation(&self) -> u64 {
        let n = self.nodes.iter().map(|n| n.id);
        let e = self.edges.iter().map(|e| e.innovation);
        let r = self.recurrent_edges.iter().map(|e| e.innovation);
        n.chain(e).chain(r).max().unwrap_or(0)
    }

    /// Number of trainable scalars; see [`Genome::parameters`].
    pub fn parameter_count(&self) -> usize {
        self.edges.len() + self.recurrent_edges.len() + self.nodes.iter().map(|n| n.params.len()).sum::<usize>()
    }

    /// All trainable scalars in storage order: feed-forward weights, then
    /// recurrent weights, then each node's cell parameters. Disabled genes are
    /// included; they simply receive zero gradient.
    pub fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        out.extend(self.edges.iter().map(|e| e.weight));
        out.extend(self.recurrent_edges.iter().map(|e| e.weight));
        for n in &self.nodes {
            out.extend_from_slice(&n.params);
        }
        out
    }

    pub fn set_parameters(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.parameter_count(), "parameter vector length");
        let mut it = values.iter().copied();
        for e in &mut self.edges {
            e.weight = it.next().unwrap();
        }
        for e in &mut self.recurrent_edges {
            e.weight = it.next().unwrap();
        }
        for n in &mut self.nodes {
            for p in &mut n.params {
                *p = it.next().unwrap();
            }
        }
    }

    /// Human-readable name of each entry of [`Genome::parameters`].
    pub fn parameter_labels(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.parameter_count());
        out.extend(self.edges.iter().map(|e| format!("edge#{} {}->{}", e.innovation, e.source, e.target)));
        out.extend(
            self.recurrent_edges
                .iter()
                .map(|e| format!("rec#{} {}->{} skip {}", e.innovation, e.source, e.target, e.time_skip)),
        );
        for n in &self.nodes {
            out.extend((0..n.params.len()).map(|k| format!("node#{} {} p{k}", n.id, n.cell)));
        }
        out
    }

    /// Enabled edges between enabled nodes, as `(source, target)` pairs,
    /// feed-forward and recurrent alike.
    fn live_links(&self) -> Vec<(u64, u64)> {
        let enabled: HashSet<u64> = self.nodes.iter().filter(|n| n.enabled).map(|n| n.id).collect();
        let ff = self.edges.iter().filter(|e| e.enabled).map(|e| (e.source, e.target));
        let rec = self
            .recurrent_edges
            .iter()
            .filter(|e| e.enabled)
            .map(|e| (e.source, e.target));
        ff.chain(rec)
            .filter(|(s, t)| enabled.contains(s) && enabled.contains(t))
            .collect()
    }

    fn closure(start: impl IntoIterator<Item = u64>, links: &[(u64, u64)], forward: bool) -> HashSet<u64> {
        let mut adj: HashMap<u64, Vec<u64>> = HashMap::new();
        for &(s, t) in links {
            let (a, b) = if forward { (s, t) } else { (t, s) };
            adj.entry(a).or_default().push(b);
        }
        let mut seen: HashSet<u64> = HashSet::new();
        let mut stack: Vec<u64> = start.into_iter().collect();
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                if let Some(next) = adj.get(&n) {
                    stack.extend(next.iter().copied());
                }
            }
        }
        seen
    }

    /// Enabled nodes reachable from some input along enabled edges.
    pub fn input_reachable(&self) -> HashSet<u64> {
        Self::closure(self.input_ids(), &self.live_links(), true)
    }

    /// Enabled nodes from which the output can be reached along enabled edges.
    pub fn output_reaching(&self) -> HashSet<u64> {
        Self::closure(self.output_id(), &self.live_links(), false)
    }

    /// Enabled hidden nodes with no enabled path to the output. They are
    /// skipped by the forward pass and never receive gradient.
    pub fn dormant_nodes(&self) -> Vec<u64> {
        let reach = self.output_reaching();
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Hidden && n.enabled && !reach.contains(&n.id))
            .map(|n| n.id)
            .collect()
    }

    /// Disables every enabled hidden node that no input can reach. Returns the
    /// number of nodes disabled.
    pub fn disable_unreachable(&mut self) -> usize {
        let reach = self.input_reachable();
        let mut count = 0;
        for n in &mut self.nodes {
            if n.kind == NodeKind::Hidden && n.enabled && !reach.contains(&n.id) {
                n.enabled = false;
                count += 1;
            }
        }
        count
    }

    /// Orders genes by id so that storage order never matters.
    pub fn canonicalize(&mut self) {
        self.nodes.sort_by_key(|n| n.id);
        self.edges.sort_by_key(|e| e.innovation);
        self.recurrent_edges.sort_by_key(|e| e.innovation);
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(RnnError::Invalid(msg));

        let outputs = self.nodes.iter().filter(|n| n.kind == NodeKind::Output).count();
        if outputs != 1 {
            return bad(format!("expected exactly one output node, found {outputs}"));
        }
        if self.n_inputs() == 0 {
            return bad("genome has no input nodes".into());
        }

        let mut ids = HashSet::new();
        let all_ids = self
            .nodes
            .iter()
            .map(|n| n.id)
            .chain(self.edges.iter().map(|e| e.innovation))
            .chain(self.recurrent_edges.iter().map(|e| e.innovation));
        for id in all_ids {
            if !ids.insert(id) {
                return bad(format!("innovation {id} used twice"));
            }
        }

        for n in &self.nodes {
            let depth_ok = match n.kind {
                NodeKind::Input => n.depth == 0.0,
                NodeKind::Output => n.depth == 1.0,
                NodeKind::Hidden => n.depth > 0.0 && n.depth < 1.0,
            };
            if !depth_ok {
                return bad(format!("node {} ({:?}) has depth {}", n.id, n.kind, n.depth));
            }
            if n.kind != NodeKind::Hidden && !n.enabled {
                return bad(format!("{:?} node {} is disabled", n.kind, n.id));
            }
            if n.params.len() != n.expected_params() {
                return bad(format!(
                    "node {} ({}) has {} params, expected {}",
                    n.id,
                    n.cell,
                    n.params.len(),
                    n.expected_params()
                ));
            }
            if n.params.iter().any(|p| !p.is_finite()) {
                return bad(format!("node {} has a non-finite parameter", n.id));
            }
        }

        let index = self.node_index();
        let depth = |id: u64| index.get(&id).map(|&i| &self.nodes[i]);
        for e in &self.edges {
            let (Some(s), Some(t)) = (depth(e.source), depth(e.target)) else {
                return bad(format!("edge {} references a missing node", e.innovation));
            };
            if s.depth >= t.depth {
                return bad(format!(
                    "edge {} runs from depth {} to depth {}",
                    e.innovation, s.depth, t.depth
                ));
            }
            if !e.weight.is_finite() {
                return bad(format!("edge {} has a non-finite weight", e.innovation));
            }
        }
        for e in &self.recurrent_edges {
            let (Some(_), Some(t)) = (depth(e.source), depth(e.target)) else {
                return bad(format!("recurrent edge {} references a missing node", e.innovation));
            };
            if t.kind == NodeKind::Input {
                return bad(format!("recurrent edge {} targets an input", e.innovation));
            }
            if !(1..=MAX_TIME_SKIP).contains(&e.time_skip) {
                return bad(format!(
                    "recurrent edge {} has time skip {}",
                    e.innovation, e.time_skip
                ));
            }
            if !e.weight.is_finite() {
                return bad(format!("recurrent edge {} has a non-finite weight", e.innovation));
            }
        }

        let reach = self.input_reachable();
        for n in &self.nodes {
            if n.enabled && n.kind != NodeKind::Input && !reach.contains(&n.id) {
                return bad(format!("{:?} node {} is not reachable from any input", n.kind, n.id));
            }
        }
        Ok(())
    }
}
