//! Versioned JSON encoding of genomes. Floats are written in shortest
//! round-trip form and parsed exactly, so save/load is bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EdgeGene, Genome, Lineage, NodeGene, RecurrentEdgeGene, Result, RnnError};

pub const GENOME_FORMAT: &str = "neurotrade-genome";
pub const GENOME_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct GenomeFile {
    format: String,
    version: u32,
    id: u64,
    island: usize,
    fitness: Option<f64>,
    lineage: Lineage,
    nodes: Vec<NodeGene>,
    edges: Vec<EdgeGene>,
    recurrent_edges: Vec<RecurrentEdgeGene>,
}

impl Genome {
    pub fn to_json(&self) -> String {
        let file = GenomeFile {
            format: GENOME_FORMAT.to_string(),
            version: GENOME_FORMAT_VERSION,
            id: self.id,
            island: self.island,
            fitness: self.fitness.filter(|f| f.is_finite()),
            lineage: self.lineage.clone(),
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
            recurrent_edges: self.recurrent_edges.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("genome serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Genome> {
        let f: GenomeFile = serde_json::from_str(text).map_err(|e| RnnError::Format(e.to_string()))?;
        if f.format != GENOME_FORMAT {
            return Err(RnnError::Format(format!("unknown format `{}`", f.format)));
        }
        if f.version != GENOME_FORMAT_VERSION {
            return Err(RnnError::Format(format!("unsupported version {}", f.version)));
        }
        let g = Genome {
            id: f.id,
            nodes: f.nodes,
            edges: f.edges,
            recurrent_edges: f.recurrent_edges,
            island: f.island,
            fitness: f.fitness,
            lineage: f.lineage,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        crate::io::write_atomic(path, self.to_json().as_bytes()).map_err(|source| RnnError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Genome> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| RnnError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Genome::from_json(&text)
    }
}
