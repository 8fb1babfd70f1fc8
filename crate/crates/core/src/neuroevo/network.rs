use std::collections::HashMap;

use super::genome::{Genome, NodeRole};
use super::NeuroError;

/// A genome compiled to an evaluation schedule.
#[derive(Debug, Clone)]
pub struct Network {
    inputs: usize,
    outputs: usize,
    slots: usize,
    bias: usize,
    /// `(slot, incoming (source slot, weight))` in topological order,
    /// hidden and output nodes only.
    schedule: Vec<(usize, Vec<(usize, f64)>)>,
    output_slots: Vec<usize>,
    input_slots: Vec<usize>,
}

impl Network {
    pub fn compile(genome: &Genome) -> Result<Self, NeuroError> {
        let order = genome.topological_order(true)?;
        let slot: HashMap<usize, usize> = genome.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); genome.nodes.len()];
        for c in genome.connections.iter().filter(|c| c.enabled) {
            incoming[slot[&c.to]].push((slot[&c.from], c.weight));
        }
        let mut schedule = Vec::new();
        for id in order {
            let s = slot[&id];
            if matches!(genome.nodes[s].role, NodeRole::Hidden | NodeRole::Output) {
                schedule.push((s, std::mem::take(&mut incoming[s])));
            }
        }
        Ok(Self {
            inputs: genome.inputs,
            outputs: genome.outputs,
            slots: genome.nodes.len(),
            bias: slot[&genome.bias_id()],
            schedule,
            output_slots: genome.output_ids().map(|id| slot[&id]).collect(),
            input_slots: (0..genome.inputs).map(|id| slot[&id]).collect(),
        })
    }

    pub fn input_width(&self) -> usize {
        self.inputs
    }

    pub fn output_width(&self) -> usize {
        self.outputs
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, NeuroError> {
        if input.len() != self.inputs {
            return Err(NeuroError::InputWidth { expected: self.inputs, found: input.len() });
        }
        let mut values = vec![0.0; self.slots];
        for (&s, &x) in self.input_slots.iter().zip(input) {
            values[s] = x;
        }
        values[self.bias] = 1.0;
        for (s, incoming) in &self.schedule {
            let sum: f64 = incoming.iter().map(|&(src, w)| w * values[src]).sum();
            values[*s] = sum.tanh();
        }
        Ok(self.output_slots.iter().map(|&s| values[s]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuroevo::InnovationRegistry;

    #[test]
    fn zero_weights_give_zero_outputs() {
        let mut reg = InnovationRegistry::new(3, 2);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
        let mut g = Genome::minimal(3, 2, 1.0, &mut reg, &mut rng);
        for c in &mut g.connections {
            c.weight = 0.0;
        }
        assert_eq!(Network::compile(&g).unwrap().forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn single_connection_is_tanh() {
        let mut reg = InnovationRegistry::new(1, 1);
        let mut g = Genome::bare(1, 1);
        g.connections.push(crate::neuroevo::ConnectionGene {
            innovation: reg.innovation(0, 2),
            from: 0,
            to: 2,
            weight: 0.7,
            enabled: true,
        });
        let out = Network::compile(&g).unwrap().forward(&[1.3]).unwrap();
        assert_eq!(out, vec![(0.7f64 * 1.3).tanh()]);
    }

    #[test]
    fn wrong_width_is_rejected() {
        let net = Network::compile(&Genome::bare(2, 1)).unwrap();
        assert!(net.forward(&[1.0]).is_err());
    }
}
