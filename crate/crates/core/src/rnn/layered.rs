use rand::Rng;

use super::{CellKind, EdgeGene, Genome, Lineage, NodeGene, RecurrentEdgeGene, Result, RnnError};

/// Glorot/Xavier uniform bound `sqrt(6 / (fan_in + fan_out))`.
pub fn xavier_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Builds a fully connected stack of `layers` memory-cell layers of
/// `layer_width` cells each: inputs → L1 → … → output, with a `time_skip = 1`
/// self loop on every hidden cell.
///
/// Hidden layer `k` sits at depth `k / (layers + 1)`. Edge weights entering a
/// layer and the input/recurrent weights inside its cells are drawn from the
/// Xavier range of that layer; biases start at zero.
pub fn build_layered<R: Rng + ?Sized>(
    cell: CellKind,
    inputs: usize,
    layer_width: usize,
    layers: usize,
    rng: &mut R,
) -> Result<Genome> {
    if !cell.is_memory_cell() {
        return Err(RnnError::UnsupportedCell(cell.to_string()));
    }
    if inputs == 0 || layer_width == 0 || layers == 0 {
        return Err(RnnError::Invalid("layered network needs inputs, width and layers".into()));
    }

    let mut next_id = 0u64;
    let mut fresh = || {
        next_id += 1;
        next_id - 1
    };

    let mut nodes: Vec<NodeGene> = (0..inputs).map(|_| NodeGene::input(fresh())).collect();
    let output = NodeGene::output(fresh());
    let output_id = output.id;
    nodes.push(output);

    let mut prev_layer: Vec<u64> = nodes[..inputs].iter().map(|n| n.id).collect();
    let mut edges = Vec::new();
    let mut recurrent_edges = Vec::new();

    let mut connect = |from: &[u64], to: &[u64], bound: f64, rng: &mut R, fresh: &mut dyn FnMut() -> u64| {
        for &t in to {
            for &s in from {
                edges.push(EdgeGene {
                    innovation: fresh(),
                    source: s,
                    target: t,
                    weight: rng.gen_range(-bound..bound),
                    enabled: true,
                });
            }
        }
    };

    for layer in 1..=layers {
        let depth = layer as f64 / (layers + 1) as f64;
        let next_size = if layer == layers { 1 } else { layer_width };
        let bound = xavier_bound(prev_layer.len(), layer_width);
        let cell_bound = xavier_bound(prev_layer.len(), next_size);
        let mut ids = Vec::with_capacity(layer_width);
        for _ in 0..layer_width {
            let params = (0..cell.param_count())
                .map(|k| if k % 3 == 2 { 0.0 } else { rng.gen_range(-cell_bound..cell_bound) })
                .collect();
            let node = NodeGene::hidden(fresh(), cell, depth, params);
            ids.push(node.id);
            nodes.push(node);
        }
        connect(&prev_layer, &ids, bound, rng, &mut fresh);
        for &id in &ids {
            recurrent_edges.push(RecurrentEdgeGene {
                innovation: fresh(),
                source: id,
                target: id,
                weight: rng.gen_range(-bound..bound),
                enabled: true,
                time_skip: 1,
            });
        }
        prev_layer = ids;
    }
    connect(&prev_layer, &[output_id], xavier_bound(prev_layer.len(), 1), rng, &mut fresh);

    let genome = Genome {
        id: 0,
        nodes,
        edges,
        recurrent_edges,
        island: 0,
        fitness: None,
        lineage: Lineage {
            operator: format!("layered_{cell}"),
            parents: Vec::new(),
        },
    };
    genome.validate()?;
    Ok(genome)
}
