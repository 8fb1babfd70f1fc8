//! Topology-and-weight evolving networks: genomes with innovation-tagged
//! connections, a compiled tanh evaluator, variation operators and a
//! generational loop with adaptive mutation controllers.

mod evolve;
mod genome;
mod network;

pub use evolve::{
    evolve, evolve_with, history_csv, Controllers, Evolution, EvolutionConfig, GenerationStats,
    DISTANCE_COEFFICIENTS, HISTORY_HEADER,
};
pub use genome::{ConnectionGene, Genome, InnovationRegistry, NodeGene, NodeRole};
pub use network::Network;

use thiserror::Error;

use crate::sim::Policy;

#[derive(Debug, Error)]
pub enum NeuroError {
    #[error("network structure: {0}")]
    Structure(String),
    #[error("network expects {expected} inputs, got {found}")]
    InputWidth { expected: usize, found: usize },
    #[error("evolution config {0}")]
    Config(String),
    #[error("genome json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Genome {
    pub fn to_json(&self) -> Result<String, NeuroError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parse and check a genome: known node references and acyclicity.
    pub fn from_json(text: &str) -> Result<Self, NeuroError> {
        let g: Genome = serde_json::from_str(text)?;
        g.validate()?;
        Ok(g)
    }

    /// Check a deserialized genome: one bias node, known references, no cycles.
    pub fn validate(&self) -> Result<(), NeuroError> {
        if self.nodes.iter().filter(|n| n.role == NodeRole::Bias).count() != 1 {
            return Err(NeuroError::Structure("exactly one bias node required".into()));
        }
        self.topological_order(false)?;
        Ok(())
    }
}

impl Policy for Network {
    fn output_width(&self) -> usize {
        Network::output_width(self)
    }

    /// Panics only if the observation width disagrees with the network.
    fn act(&self, observation: &[f64]) -> Vec<f64> {
        self.forward(observation).expect("observation width matches network inputs")
    }
}
