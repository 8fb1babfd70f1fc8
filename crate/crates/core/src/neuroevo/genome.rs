use std::collections::{BTreeSet, HashMap};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::NeuroError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Input,
    Bias,
    Hidden,
    Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeGene {
    pub id: usize,
    pub role: NodeRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionGene {
    pub innovation: u64,
    pub from: usize,
    pub to: usize,
    pub weight: f64,
    pub enabled: bool,
}

/// Hands out innovation numbers per `(from, to)` signature and hidden-node
/// ids per split connection, so identical mutations share ids across genomes.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct InnovationRegistry {
    next_innovation: u64,
    next_node: usize,
    connections: HashMap<(usize, usize), u64>,
    splits: HashMap<(usize, usize), Vec<usize>>,
}

impl InnovationRegistry {
    /// Registry for networks with `inputs` inputs and `outputs` outputs; the
    /// first free node id follows inputs, bias and outputs.
    pub fn new(inputs: usize, outputs: usize) -> Self {
        Self {
            next_node: inputs + 1 + outputs,
            ..Self::default()
        }
    }

    pub fn innovation(&mut self, from: usize, to: usize) -> u64 {
        let next = &mut self.next_innovation;
        *self.connections.entry((from, to)).or_insert_with(|| {
            let id = *next;
            *next += 1;
            id
        })
    }

    /// Hidden node id for splitting `(from, to)`, reusing an id unless the
    /// genome already contains it.
    fn split_node(&mut self, from: usize, to: usize, genome: &Genome) -> usize {
        let ids = self.splits.entry((from, to)).or_default();
        if let Some(&id) = ids.iter().find(|&&id| !genome.has_node(id)) {
            return id;
        }
        let id = self.next_node;
        self.next_node += 1;
        ids.push(id);
        id
    }

    pub fn innovation_count(&self) -> u64 {
        self.next_innovation
    }
}

/// A directed acyclic network: inputs, one bias node fixed at 1, outputs and
/// hidden nodes, connected by innovation-tagged genes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Genome {
    pub inputs: usize,
    pub outputs: usize,
    /// Sorted by id.
    pub nodes: Vec<NodeGene>,
    /// Sorted by innovation.
    pub connections: Vec<ConnectionGene>,
}

impl Genome {
    pub fn bias_id(&self) -> usize {
        self.inputs
    }

    pub fn output_ids(&self) -> std::ops::Range<usize> {
        self.inputs + 1..self.inputs + 1 + self.outputs
    }

    /// Inputs, bias and outputs with no connections.
    pub fn bare(inputs: usize, outputs: usize) -> Self {
        let mut nodes: Vec<NodeGene> = (0..inputs).map(|id| NodeGene { id, role: NodeRole::Input }).collect();
        nodes.push(NodeGene { id: inputs, role: NodeRole::Bias });
        nodes.extend((0..outputs).map(|k| NodeGene { id: inputs + 1 + k, role: NodeRole::Output }));
        Self { inputs, outputs, nodes, connections: Vec::new() }
    }

    /// Sparse direct input-to-output start: each input (and bias) feeds each
    /// output with probability `density`, weights ~ N(0, 1), and every output
    /// gets at least one connection.
    pub fn minimal<R: Rng + ?Sized>(
        inputs: usize,
        outputs: usize,
        density: f64,
        registry: &mut InnovationRegistry,
        rng: &mut R,
    ) -> Self {
        let mut g = Self::bare(inputs, outputs);
        for to in g.output_ids() {
            let mut any = false;
            for from in 0..=inputs {
                if rng.random::<f64>() < density {
                    g.push_connection(registry, from, to, rng.sample(StandardNormal));
                    any = true;
                }
            }
            if !any {
                let from = rng.random_range(0..=inputs);
                g.push_connection(registry, from, to, rng.sample(StandardNormal));
            }
        }
        g.sort_genes();
        g
    }

    fn sort_genes(&mut self) {
        self.nodes.sort_by_key(|n| n.id);
        self.connections.sort_by_key(|c| c.innovation);
    }

    fn push_connection(&mut self, registry: &mut InnovationRegistry, from: usize, to: usize, weight: f64) {
        self.connections.push(ConnectionGene {
            innovation: registry.innovation(from, to),
            from,
            to,
            weight,
            enabled: true,
        });
    }

    pub fn has_node(&self, id: usize) -> bool {
        self.nodes.binary_search_by_key(&id, |n| n.id).is_ok()
    }

    pub fn role(&self, id: usize) -> Option<NodeRole> {
        self.nodes.binary_search_by_key(&id, |n| n.id).ok().map(|i| self.nodes[i].role)
    }

    pub fn hidden_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.role == NodeRole::Hidden).count()
    }

    pub fn enabled_count(&self) -> usize {
        self.connections.iter().filter(|c| c.enabled).count()
    }

    fn has_pair(&self, from: usize, to: usize) -> bool {
        self.connections.iter().any(|c| c.from == from && c.to == to)
    }

    /// Whether `to` can reach `from` through any gene, enabled or not.
    fn reaches(&self, start: usize, goal: usize) -> bool {
        let mut stack = vec![start];
        let mut seen = BTreeSet::new();
        while let Some(n) = stack.pop() {
            if n == goal {
                return true;
            }
            if seen.insert(n) {
                stack.extend(self.connections.iter().filter(|c| c.from == n).map(|c| c.to));
            }
        }
        false
    }

    /// True when every gene (enabled or not) respects a topological order.
    pub fn is_acyclic(&self) -> bool {
        self.topological_order(false).is_ok()
    }

    /// Kahn ordering of all nodes over enabled genes (or all genes).
    pub fn topological_order(&self, enabled_only: bool) -> Result<Vec<usize>, NeuroError> {
        let index: HashMap<usize, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let mut indegree = vec![0usize; self.nodes.len()];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        for c in self.connections.iter().filter(|c| c.enabled || !enabled_only) {
            let (Some(&a), Some(&b)) = (index.get(&c.from), index.get(&c.to)) else {
                return Err(NeuroError::Structure(format!("gene {} references a missing node", c.innovation)));
            };
            indegree[b] += 1;
            out[a].push(b);
        }
        let mut ready: std::collections::BTreeSet<usize> = (0..self.nodes.len()).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(self.nodes.len());
        while let Some(i) = ready.pop_first() {
            order.push(self.nodes[i].id);
            for &j in &out[i] {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.insert(j);
                }
            }
        }
        if order.len() != self.nodes.len() {
            return Err(NeuroError::Structure("cycle detected".into()));
        }
        Ok(order)
    }

    /// Nodes reachable from an input or the bias over enabled genes.
    fn fed_nodes(&self) -> BTreeSet<usize> {
        let mut fed: BTreeSet<usize> = self
            .nodes
            .iter()
            .filter(|n| matches!(n.role, NodeRole::Input | NodeRole::Bias))
            .map(|n| n.id)
            .collect();
        let mut changed = true;
        while changed {
            changed = false;
            for c in self.connections.iter().filter(|c| c.enabled) {
                if fed.contains(&c.from) && fed.insert(c.to) {
                    changed = true;
                }
            }
        }
        fed
    }

    /// Every output has at least one path from an input or the bias.
    pub fn outputs_connected(&self) -> bool {
        let fed = self.fed_nodes();
        self.output_ids().all(|o| fed.contains(&o))
    }

    /// Perturb each weight with probability `rate` by `N(0, sigma)`.
    pub fn mutate_weights<R: Rng + ?Sized>(&mut self, rate: f64, sigma: f64, rng: &mut R) {
        for c in &mut self.connections {
            if rng.random::<f64>() < rate {
                let z: f64 = rng.sample(StandardNormal);
                c.weight += sigma * z;
            }
        }
    }

    /// Add a random new acyclic connection; returns false when none is legal.
    pub fn mutate_add_connection<R: Rng + ?Sized>(
        &mut self,
        registry: &mut InnovationRegistry,
        sigma: f64,
        rng: &mut R,
    ) -> bool {
        let sources: Vec<usize> = self
            .nodes
            .iter()
            .filter(|n| n.role != NodeRole::Output)
            .map(|n| n.id)
            .collect();
        let targets: Vec<usize> = self
            .nodes
            .iter()
            .filter(|n| matches!(n.role, NodeRole::Hidden | NodeRole::Output))
            .map(|n| n.id)
            .collect();
        // Random probes first, then an exhaustive scan for small genomes.
        for _ in 0..64 {
            let (&from, &to) = (sources.choose(rng).expect("bias exists"), targets.choose(rng).expect("outputs exist"));
            if self.legal_new_edge(from, to) {
                self.add_connection(registry, from, to, sigma, rng);
                return true;
            }
        }
        let mut pairs: Vec<(usize, usize)> = sources
            .iter()
            .flat_map(|&f| targets.iter().map(move |&t| (f, t)))
            .filter(|&(f, t)| self.legal_new_edge(f, t))
            .collect();
        pairs.shuffle(rng);
        match pairs.first() {
            Some(&(from, to)) => {
                self.add_connection(registry, from, to, sigma, rng);
                true
            }
            None => false,
        }
    }

    fn legal_new_edge(&self, from: usize, to: usize) -> bool {
        from != to && !self.has_pair(from, to) && !self.reaches(to, from)
    }

    fn add_connection<R: Rng + ?Sized>(&mut self, registry: &mut InnovationRegistry, from: usize, to: usize, sigma: f64, rng: &mut R) {
        let z: f64 = rng.sample(StandardNormal);
        self.push_connection(registry, from, to, sigma * z);
        self.sort_genes();
    }

    /// Split a random enabled connection with a new hidden node: the old gene
    /// is disabled, `from -> new` keeps its weight and `new -> to` gets 1.
    pub fn mutate_add_node<R: Rng + ?Sized>(&mut self, registry: &mut InnovationRegistry, rng: &mut R) -> bool {
        let enabled: Vec<usize> = (0..self.connections.len()).filter(|&i| self.connections[i].enabled).collect();
        let Some(&i) = enabled.choose(rng) else {
            return false;
        };
        let ConnectionGene { from, to, weight, .. } = self.connections[i];
        self.connections[i].enabled = false;
        let node = registry.split_node(from, to, self);
        self.nodes.push(NodeGene { id: node, role: NodeRole::Hidden });
        self.push_connection(registry, from, node, weight);
        self.push_connection(registry, node, to, 1.0);
        self.sort_genes();
        true
    }

    /// Remove an isolated hidden node, or disable a random enabled connection
    /// whose loss leaves every output fed. Returns false when nothing changed.
    pub fn mutate_prune<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        let isolated: Vec<usize> = self
            .nodes
            .iter()
            .filter(|n| n.role == NodeRole::Hidden)
            .filter(|n| !self.connections.iter().any(|c| c.enabled && (c.from == n.id || c.to == n.id)))
            .map(|n| n.id)
            .collect();
        if let Some(&id) = isolated.choose(rng) {
            if rng.random::<bool>() {
                self.nodes.retain(|n| n.id != id);
                self.connections.retain(|c| c.from != id && c.to != id);
                return true;
            }
        }
        let mut enabled: Vec<usize> = (0..self.connections.len()).filter(|&i| self.connections[i].enabled).collect();
        enabled.shuffle(rng);
        for i in enabled {
            self.connections[i].enabled = false;
            if self.outputs_connected() {
                return true;
            }
            self.connections[i].enabled = true;
        }
        false
    }

    /// NEAT-style crossover. `fitter` supplies the structure (all its genes,
    /// so the child stays acyclic); matching genes take either parent's weight.
    /// A gene disabled in either parent stays disabled with probability 0.75,
    /// then disabled genes are re-enabled until every output is fed.
    pub fn crossover<R: Rng + ?Sized>(fitter: &Genome, other: &Genome, rng: &mut R) -> Genome {
        let by_innovation: HashMap<u64, &ConnectionGene> = other.connections.iter().map(|c| (c.innovation, c)).collect();
        let mut child = fitter.clone();
        for c in &mut child.connections {
            if let Some(o) = by_innovation.get(&c.innovation) {
                if rng.random::<bool>() {
                    c.weight = o.weight;
                }
                let either_disabled = !c.enabled || !o.enabled;
                c.enabled = !(either_disabled && rng.random::<f64>() < 0.75);
            }
        }
        for i in 0..child.connections.len() {
            if child.outputs_connected() {
                break;
            }
            child.connections[i].enabled = true;
        }
        child
    }

    /// `(c1 * excess + c2 * disjoint) / n + c3 * mean |weight difference|`.
    pub fn distance(&self, other: &Genome, c1: f64, c2: f64, c3: f64) -> f64 {
        let a: HashMap<u64, f64> = self.connections.iter().map(|c| (c.innovation, c.weight)).collect();
        let b: HashMap<u64, f64> = other.connections.iter().map(|c| (c.innovation, c.weight)).collect();
        let max_a = self.connections.last().map_or(0, |c| c.innovation);
        let max_b = other.connections.last().map_or(0, |c| c.innovation);
        let cutoff = max_a.min(max_b);
        let (mut excess, mut disjoint, mut matched, mut diff) = (0usize, 0usize, 0usize, 0.0);
        for (k, wa) in &a {
            match b.get(k) {
                Some(wb) => {
                    matched += 1;
                    diff += (wa - wb).abs();
                }
                None if *k > cutoff => excess += 1,
                None => disjoint += 1,
            }
        }
        for k in b.keys().filter(|k| !a.contains_key(k)) {
            if *k > cutoff {
                excess += 1;
            } else {
                disjoint += 1;
            }
        }
        let n = a.len().max(b.len()).max(1) as f64;
        let w = if matched > 0 { diff / matched as f64 } else { 0.0 };
        (c1 * excess as f64 + c2 * disjoint as f64) / n + c3 * w
    }
}
