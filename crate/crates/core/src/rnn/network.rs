//! A genome compiled into an evaluation plan over a flat parameter vector.

use std::cmp::Ordering;

use super::cell::Unit;
use super::{Genome, NodeKind, Result, RnnError};
use crate::market_data::Series;

#[derive(Debug, Clone)]
struct Slot {
    node_id: u64,
    /// `None` for inputs, which copy their feature column.
    unit: Option<Unit>,
    column: usize,
    param_offset: usize,
    cache_offset: usize,
    /// `(source slot, parameter index)`, ordered by innovation.
    ff_in: Vec<(usize, usize)>,
    /// `(source slot, time skip, parameter index)`, ordered by innovation.
    rec_in: Vec<(usize, usize, usize)>,
}

/// Evaluation plan for one genome.
///
/// Nodes are evaluated in `(depth, id)` order at every timestep; incoming
/// edges are summed in innovation order, so the result never depends on how
/// the genome stores its genes. Dormant nodes and disabled genes are left out.
#[derive(Debug, Clone)]
pub struct Network {
    slots: Vec<Slot>,
    width: usize,
    cache_width: usize,
    output_slot: usize,
    param_count: usize,
}

/// Forward-pass state kept for the backward pass.
struct Trace {
    values: Vec<f64>,
    cache: Vec<f64>,
}

impl Network {
    pub fn compile(genome: &Genome) -> Result<Network> {
        genome.validate()?;
        let n_edges = genome.edges.len();
        let n_rec = genome.recurrent_edges.len();

        let mut node_offsets = Vec::with_capacity(genome.nodes.len());
        let mut off = n_edges + n_rec;
        for n in &genome.nodes {
            node_offsets.push(off);
            off += n.params.len();
        }
        let param_count = off;

        let reaching = genome.output_reaching();
        let inputs = genome.input_ids();
        let mut order: Vec<usize> = (0..genome.nodes.len())
            .filter(|&i| {
                let n = &genome.nodes[i];
                n.kind == NodeKind::Input || (n.enabled && reaching.contains(&n.id))
            })
            .collect();
        order.sort_by(|&a, &b| {
            let (x, y) = (&genome.nodes[a], &genome.nodes[b]);
            x.depth
                .partial_cmp(&y.depth)
                .unwrap_or(Ordering::Equal)
                .then(x.id.cmp(&y.id))
        });

        let mut slot_of = std::collections::HashMap::new();
        let mut slots = Vec::with_capacity(order.len());
        let mut cache_width = 0;
        for (slot, &i) in order.iter().enumerate() {
            let n = &genome.nodes[i];
            slot_of.insert(n.id, slot);
            let unit = Unit::of(n.kind, n.cell);
            let column = inputs.iter().position(|&id| id == n.id).unwrap_or(0);
            slots.push(Slot {
                node_id: n.id,
                unit,
                column,
                param_offset: node_offsets[i],
                cache_offset: cache_width,
                ff_in: Vec::new(),
                rec_in: Vec::new(),
            });
            cache_width += unit.map_or(0, Unit::cache_width);
        }

        let mut ff: Vec<(u64, usize, usize, usize)> = Vec::new();
        for (k, e) in genome.edges.iter().enumerate() {
            if let (true, Some(&s), Some(&t)) = (e.enabled, slot_of.get(&e.source), slot_of.get(&e.target)) {
                ff.push((e.innovation, t, s, k));
            }
        }
        ff.sort_unstable();
        for (_, t, s, k) in ff {
            slots[t].ff_in.push((s, k));
        }
        let mut rec: Vec<(u64, usize, usize, usize, usize)> = Vec::new();
        for (k, e) in genome.recurrent_edges.iter().enumerate() {
            if let (true, Some(&s), Some(&t)) = (e.enabled, slot_of.get(&e.source), slot_of.get(&e.target)) {
                rec.push((e.innovation, t, s, e.time_skip as usize, n_edges + k));
            }
        }
        rec.sort_unstable();
        for (_, t, s, skip, k) in rec {
            slots[t].rec_in.push((s, skip, k));
        }

        let output_id = genome.output_id().expect("validated genome has an output");
        Ok(Network {
            output_slot: slot_of[&output_id],
            slots,
            width: inputs.len(),
            cache_width,
            param_count,
        })
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    fn check_inputs(&self, inputs: &[f64], width: usize) -> Result<usize> {
        if width != self.width {
            return Err(RnnError::WidthMismatch {
                expected: self.width,
                found: width,
            });
        }
        Ok(if width == 0 { 0 } else { inputs.len() / width })
    }

    fn run(&self, params: &[f64], inputs: &[f64], steps: usize) -> Result<Trace> {
        let n = self.slots.len();
        let cw = self.cache_width;
        let mut values = vec![0.0; steps * n];
        let mut cache = vec![0.0; steps * cw];
        for t in 0..steps {
            let x = &inputs[t * self.width..(t + 1) * self.width];
            for (k, slot) in self.slots.iter().enumerate() {
                let Some(unit) = slot.unit else {
                    values[t * n + k] = x[slot.column];
                    continue;
                };
                let mut s = 0.0;
                for &(src, p) in &slot.ff_in {
                    s += params[p] * values[t * n + src];
                }
                for &(src, skip, p) in &slot.rec_in {
                    if t >= skip {
                        s += params[p] * values[(t - skip) * n + src];
                    }
                }
                let (h_prev, c_prev) = if t > 0 {
                    let prev = &cache[(t - 1) * cw + slot.cache_offset..];
                    (values[(t - 1) * n + k], unit.prev_cell_state(Some(prev)))
                } else {
                    (0.0, 0.0)
                };
                let p = &params[slot.param_offset..];
                let row = &mut cache[t * cw + slot.cache_offset..t * cw + slot.cache_offset + unit.cache_width()];
                let h = unit.forward(p, s, h_prev, c_prev, row);
                if !h.is_finite() {
                    return Err(RnnError::NonFinite {
                        node: slot.node_id,
                        t,
                    });
                }
                values[t * n + k] = h;
            }
        }
        Ok(Trace { values, cache })
    }

    /// Output value at every timestep.
    pub fn forward(&self, params: &[f64], inputs: &[f64], width: usize) -> Result<Vec<f64>> {
        let steps = self.check_inputs(inputs, width)?;
        let trace = self.run(params, inputs, steps)?;
        let n = self.slots.len();
        Ok((0..steps).map(|t| trace.values[t * n + self.output_slot]).collect())
    }

    /// Mean squared error over the series and its gradient with respect to
    /// every entry of `params`.
    pub fn loss_and_gradient(&self, params: &[f64], series: &Series) -> Result<(f64, Vec<f64>)> {
        let steps = self.check_inputs(&series.inputs, series.width)?;
        if steps == 0 {
            return Err(RnnError::EmptySeries);
        }
        let trace = self.run(params, &series.inputs, steps)?;
        let n = self.slots.len();
        let cw = self.cache_width;
        let scale = 1.0 / steps as f64;

        let mut loss = 0.0;
        let mut dv = vec![0.0; steps * n];
        for t in 0..steps {
            let err = trace.values[t * n + self.output_slot] - series.targets[t];
            loss += err * err;
            dv[t * n + self.output_slot] = 2.0 * err * scale;
        }
        loss *= scale;

        let mut grad = vec![0.0; self.param_count];
        let mut dc_carry = vec![0.0; n];
        for t in (0..steps).rev() {
            for (k, slot) in self.slots.iter().enumerate().rev() {
                let Some(unit) = slot.unit else { continue };
                let dh = dv[t * n + k];
                let (h_prev, c_prev) = if t > 0 {
                    let prev = &trace.cache[(t - 1) * cw + slot.cache_offset..];
                    (trace.values[(t - 1) * n + k], unit.prev_cell_state(Some(prev)))
                } else {
                    (0.0, 0.0)
                };
                let row = &trace.cache[t * cw + slot.cache_offset..t * cw + slot.cache_offset + unit.cache_width()];
                let np = unit_param_len(unit);
                let (ds, dh_prev, dc_prev) = unit.backward(
                    &params[slot.param_offset..slot.param_offset + np],
                    row,
                    trace.values[t * n + k],
                    h_prev,
                    c_prev,
                    dh,
                    dc_carry[k],
                    &mut grad[slot.param_offset..slot.param_offset + np],
                );
                dc_carry[k] = dc_prev;
                if t > 0 {
                    dv[(t - 1) * n + k] += dh_prev;
                }
                for &(src, p) in &slot.ff_in {
                    grad[p] += ds * trace.values[t * n + src];
                    dv[t * n + src] += ds * params[p];
                }
                for &(src, skip, p) in &slot.rec_in {
                    if t >= skip {
                        grad[p] += ds * trace.values[(t - skip) * n + src];
                        dv[(t - skip) * n + src] += ds * params[p];
                    }
                }
            }
        }
        Ok((loss, grad))
    }
}

fn unit_param_len(unit: Unit) -> usize {
    match unit {
        Unit::Identity | Unit::Tanh => 1,
        Unit::Lstm => 12,
        Unit::Gru => 9,
        Unit::Mgu => 6,
    }
}

/// Runs the genome over a row-major `T × width` input matrix and returns the
/// output node's value at every timestep.
pub fn forward_pass(genome: &Genome, inputs: &[f64], width: usize) -> Result<Vec<f64>> {
    Network::compile(genome)?.forward(&genome.parameters(), inputs, width)
}

/// MSE of the genome on `series` and its gradient, in [`Genome::parameters`] order.
pub fn loss_and_gradient(genome: &Genome, series: &Series) -> Result<(f64, Vec<f64>)> {
    Network::compile(genome)?.loss_and_gradient(&genome.parameters(), series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rnn::genome::tests::linear_genome;
    use crate::rnn::{CellKind, EdgeGene, NodeGene, RecurrentEdgeGene};

    #[test]
    fn zero_weights_give_zero_output() {
        let g = linear_genome(&[0.0; 7]);
        let xs: Vec<f64> = (0..70).map(|i| (i as f64).cos()).collect();
        assert!(forward_pass(&g, &xs, 7).unwrap().iter().all(|&y| y == 0.0));
    }

    #[test]
    fn single_edge_is_linear() {
        let g = linear_genome(&[0.75]);
        let xs = [1.0, -2.0, 0.5, 4.0];
        let ys = forward_pass(&g, &xs, 1).unwrap();
        assert_eq!(ys, xs.iter().map(|x| 0.75 * x).collect::<Vec<_>>());
    }

    #[test]
    fn width_mismatch_rejected() {
        let g = linear_genome(&[0.1, 0.2]);
        assert!(matches!(
            forward_pass(&g, &[1.0, 2.0, 3.0], 3),
            Err(RnnError::WidthMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn recurrent_edge_reads_the_past() {
        let mut g = linear_genome(&[1.0]);
        g.recurrent_edges.push(RecurrentEdgeGene {
            innovation: 10,
            source: 0,
            target: 1,
            weight: 0.5,
            enabled: true,
            time_skip: 2,
        });
        let ys = forward_pass(&g, &[1.0, 2.0, 3.0, 4.0], 1).unwrap();
        assert_eq!(ys, vec![1.0, 2.0, 3.5, 5.0]);
    }

    #[test]
    fn exploding_output_reports_node_and_step() {
        let mut g = linear_genome(&[1.0]);
        g.recurrent_edges.push(RecurrentEdgeGene {
            innovation: 10,
            source: 1,
            target: 1,
            weight: 1e200,
            enabled: true,
            time_skip: 1,
        });
        let err = forward_pass(&g, &[1.0, 1.0, 1.0, 1.0], 1).unwrap_err();
        assert!(matches!(err, RnnError::NonFinite { node: 1, t: 2 }), "{err:?}");
    }

    #[test]
    fn disabled_node_contributes_nothing() {
        let mut g = linear_genome(&[0.5]);
        g.nodes.push(NodeGene::hidden(10, CellKind::Simple, 0.5, vec![0.9]));
        for (inn, s, t) in [(11, 0, 10), (12, 10, 1)] {
            g.edges.push(EdgeGene {
                innovation: inn,
                source: s,
                target: t,
                weight: 2.0,
                enabled: true,
            });
        }
        let xs = [0.3, -0.1];
        let with = forward_pass(&g, &xs, 1).unwrap();
        g.nodes[2].enabled = false;
        let without = forward_pass(&g, &xs, 1).unwrap();
        assert_eq!(without, vec![0.15, -0.05]);
        assert_ne!(with, without);
    }
}
