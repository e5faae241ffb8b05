use std::collections::BTreeMap;

use super::population::fitness;
use super::{EvoError, Population, Result};
use crate::rnn::{Genome, Lineage};

/// Merges two parents gene by gene, matching genes by innovation.
///
/// Genes both parents carry take the fitter parent's values, including the
/// enabled flag; genes only one parent carries come over unchanged. Hidden
/// nodes left unreachable from the inputs are disabled. The child belongs to
/// `a`'s island.
pub fn crossover(a: &Genome, b: &Genome, population: &mut Population) -> Result<Genome> {
    let a_first = fitness(a) <= fitness(b);
    let (fit, other) = if a_first { (a, b) } else { (b, a) };

    let mut aligned = 0usize;
    let nodes = union(&fit.nodes, &other.nodes, |n| n.id, &mut aligned);
    let edges = union(&fit.edges, &other.edges, |e| e.innovation, &mut aligned);
    let recurrent_edges = union(&fit.recurrent_edges, &other.recurrent_edges, |e| e.innovation, &mut aligned);
    if aligned == 0 {
        return Err(EvoError::NoAlignedGenes(a.id, b.id));
    }

    let mut child = Genome {
        id: population.next_genome_id(),
        nodes,
        edges,
        recurrent_edges,
        island: a.island,
        fitness: None,
        lineage: Lineage {
            operator: if a.island == b.island { "intra_crossover" } else { "inter_crossover" }.into(),
            parents: vec![a.id, b.id],
        },
    };
    child.disable_unreachable();
    child.validate()?;
    Ok(child)
}

fn union<T: Clone>(fit: &[T], other: &[T], key: impl Fn(&T) -> u64, aligned: &mut usize) -> Vec<T> {
    let mut genes: BTreeMap<u64, T> = other.iter().map(|g| (key(g), g.clone())).collect();
    for g in fit {
        if genes.insert(key(g), g.clone()).is_some() {
            *aligned += 1;
        }
    }
    genes.into_values().collect()
}
