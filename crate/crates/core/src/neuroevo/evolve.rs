use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::genome::{Genome, InnovationRegistry};
use super::network::Network;
use super::NeuroError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub population: usize,
    pub generations: usize,
    /// Per-gene probability of a weight perturbation.
    pub weight_rate: f64,
    pub add_connection_rate: f64,
    pub add_node_rate: f64,
    pub prune_rate: f64,
    pub crossover_rate: f64,
    pub sigma: f64,
    pub sigma_cap: f64,
    /// Ceiling for the adapted add-node and add-connection rates.
    pub structural_cap: f64,
    pub tournament: usize,
    pub elites: usize,
    pub stagnation_window: usize,
    /// Mean pairwise genome distance below which structural rates rise.
    pub diversity_floor: f64,
    pub initial_density: f64,
    pub seed: u64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population: 36,
            generations: 10,
            weight_rate: 0.3,
            add_connection_rate: 0.15,
            add_node_rate: 0.05,
            prune_rate: 0.05,
            crossover_rate: 0.5,
            sigma: 0.3,
            sigma_cap: 1.0,
            structural_cap: 0.5,
            tournament: 3,
            elites: 2,
            stagnation_window: 3,
            diversity_floor: 0.3,
            initial_density: 0.1,
            seed: 0,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<(), NeuroError> {
        let bad = |field: &str, why: &str| Err(NeuroError::Config(format!("{field}: {why}")));
        if self.population < 2 {
            return bad("population", "must be at least 2");
        }
        for (name, r) in [
            ("weight_rate", self.weight_rate),
            ("add_connection_rate", self.add_connection_rate),
            ("add_node_rate", self.add_node_rate),
            ("prune_rate", self.prune_rate),
            ("crossover_rate", self.crossover_rate),
            ("structural_cap", self.structural_cap),
            ("initial_density", self.initial_density),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return bad(name, "must lie in [0, 1]");
            }
        }
        if !(self.sigma >= 0.0) || self.sigma_cap < self.sigma {
            return bad("sigma", "must be non-negative and at most sigma_cap");
        }
        if self.tournament == 0 {
            return bad("tournament", "must be at least 1");
        }
        if self.elites > self.population {
            return bad("elites", "cannot exceed the population");
        }
        Ok(())
    }
}

/// Mutation strength and structural rates, adapted between generations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Controllers {
    pub sigma: f64,
    pub add_connection_rate: f64,
    pub add_node_rate: f64,
}

impl Controllers {
    pub fn base(cfg: &EvolutionConfig) -> Self {
        Self {
            sigma: cfg.sigma,
            add_connection_rate: cfg.add_connection_rate,
            add_node_rate: cfg.add_node_rate,
        }
    }

    /// Raise sigma when the best fitness has stalled for the stagnation
    /// window and raise structural rates when diversity is under the floor.
    /// Each drifts back toward its base once the condition clears.
    pub fn adapt(&mut self, history: &[GenerationStats], cfg: &EvolutionConfig) {
        let Some(last) = history.last() else {
            return;
        };
        let w = cfg.stagnation_window.max(1);
        let stalled = history.len() > w && last.best_so_far <= history[history.len() - 1 - w].best_so_far;
        self.sigma = if stalled {
            (self.sigma * 1.5).min(cfg.sigma_cap)
        } else {
            (self.sigma / 1.5).max(cfg.sigma)
        };
        let (conn, node) = if last.diversity < cfg.diversity_floor {
            (
                (self.add_connection_rate * 1.25).min(cfg.structural_cap.max(cfg.add_connection_rate)),
                (self.add_node_rate * 1.25).min(cfg.structural_cap.max(cfg.add_node_rate)),
            )
        } else {
            (
                (self.add_connection_rate / 1.25).max(cfg.add_connection_rate),
                (self.add_node_rate / 1.25).max(cfg.add_node_rate),
            )
        };
        self.add_connection_rate = conn;
        self.add_node_rate = node;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub best_so_far: f64,
    pub mean: f64,
    pub std: f64,
    pub nodes_best: usize,
    pub edges_best: usize,
    pub edges_total_best: usize,
    pub diversity: f64,
    pub controllers: Controllers,
}

pub const HISTORY_HEADER: &str = "generation,best,mean,std,nodes_best,edges_best,edges_total_best";

pub fn history_csv(history: &[GenerationStats]) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for s in history {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            s.generation, s.best, s.mean, s.std, s.nodes_best, s.edges_best, s.edges_total_best
        ));
    }
    out
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub best: Genome,
    pub best_fitness: f64,
    pub history: Vec<GenerationStats>,
    pub population: Vec<Genome>,
    pub registry: InnovationRegistry,
}

pub const DISTANCE_COEFFICIENTS: (f64, f64, f64) = (1.0, 1.0, 0.4);

fn mean_pairwise_distance(population: &[Genome]) -> f64 {
    let (c1, c2, c3) = DISTANCE_COEFFICIENTS;
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..population.len() {
        for j in i + 1..population.len() {
            sum += population[i].distance(&population[j], c1, c2, c3);
            pairs += 1;
        }
    }
    if pairs == 0 {
        0.0
    } else {
        sum / pairs as f64
    }
}

fn tournament<R: Rng + ?Sized>(fitness: &[f64], size: usize, rng: &mut R) -> usize {
    let mut best = rng.random_range(0..fitness.len());
    for _ in 1..size {
        let c = rng.random_range(0..fitness.len());
        if fitness[c] > fitness[best] || (fitness[c] == fitness[best] && c < best) {
            best = c;
        }
    }
    best
}

/// Rank indices by fitness descending, ties to the lower index.
fn ranked(fitness: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fitness.len()).collect();
    order.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
    order
}

/// Run the generational loop with a random minimal initial population.
pub fn evolve<F>(cfg: &EvolutionConfig, inputs: usize, outputs: usize, fitness: F) -> Result<Evolution, NeuroError>
where
    F: Fn(&Network) -> f64 + Sync,
{
    evolve_with(cfg, inputs, outputs, fitness, |_, _| {})
}

/// As [`evolve`], calling `observer` after every evaluated generation with
/// its statistics and the best genome so far.
pub fn evolve_with<F, O>(
    cfg: &EvolutionConfig,
    inputs: usize,
    outputs: usize,
    fitness: F,
    mut observer: O,
) -> Result<Evolution, NeuroError>
where
    F: Fn(&Network) -> f64 + Sync,
    O: FnMut(&GenerationStats, &Genome),
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut registry = InnovationRegistry::new(inputs, outputs);
    let mut population: Vec<Genome> = (0..cfg.population)
        .map(|_| Genome::minimal(inputs, outputs, cfg.initial_density, &mut registry, &mut rng))
        .collect();
    let mut cached: Vec<Option<f64>> = vec![None; cfg.population];
    let mut controllers = Controllers::base(cfg);
    let mut history: Vec<GenerationStats> = Vec::new();
    let mut best: Option<(Genome, f64)> = None;

    for generation in 0..cfg.generations.max(1) {
        let scores: Vec<f64> = population
            .par_iter()
            .zip(cached.par_iter())
            .map(|(g, c)| match c {
                Some(f) => Ok(*f),
                None => Network::compile(g).map(|n| fitness(&n)),
            })
            .collect::<Result<_, _>>()?;
        let order = ranked(&scores);
        let top = order[0];
        if best.as_ref().map_or(true, |(_, f)| scores[top] > *f) {
            best = Some((population[top].clone(), scores[top]));
        }
        let n = scores.len() as f64;
        let mean = scores.iter().sum::<f64>() / n;
        let std = (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n).sqrt();
        let champion = &population[top];
        let stats = GenerationStats {
            generation,
            best: scores[top],
            best_so_far: best.as_ref().map_or(scores[top], |(_, f)| *f),
            mean,
            std,
            nodes_best: champion.nodes.len(),
            edges_best: champion.enabled_count(),
            edges_total_best: champion.connections.len(),
            diversity: mean_pairwise_distance(&population),
            controllers,
        };
        history.push(stats);
        observer(history.last().expect("pushed"), &best.as_ref().expect("set").0);
        if generation + 1 >= cfg.generations {
            break;
        }
        controllers.adapt(&history, cfg);

        let mut elites: Vec<usize> = order[..cfg.elites].to_vec();
        elites.sort_unstable();
        let mut next: Vec<Genome> = elites.iter().map(|&i| population[i].clone()).collect();
        let mut next_cached: Vec<Option<f64>> = elites.iter().map(|&i| Some(scores[i])).collect();
        while next.len() < cfg.population {
            let a = tournament(&scores, cfg.tournament, &mut rng);
            let mut child = if rng.random::<f64>() < cfg.crossover_rate {
                let b = tournament(&scores, cfg.tournament, &mut rng);
                let (fit, other) = if scores[b] > scores[a] || (scores[b] == scores[a] && b < a) { (b, a) } else { (a, b) };
                Genome::crossover(&population[fit], &population[other], &mut rng)
            } else {
                population[a].clone()
            };
            child.mutate_weights(cfg.weight_rate, controllers.sigma, &mut rng);
            if rng.random::<f64>() < controllers.add_connection_rate {
                child.mutate_add_connection(&mut registry, controllers.sigma, &mut rng);
            }
            if rng.random::<f64>() < controllers.add_node_rate {
                child.mutate_add_node(&mut registry, &mut rng);
            }
            if rng.random::<f64>() < cfg.prune_rate {
                child.mutate_prune(&mut rng);
            }
            next.push(child);
            next_cached.push(None);
        }
        population = next;
        cached = next_cached;
    }

    let (best, best_fitness) = best.expect("at least one generation");
    Ok(Evolution { best, best_fitness, history, population, registry })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(best_so_far: f64, diversity: f64) -> GenerationStats {
        GenerationStats {
            generation: 0,
            best: best_so_far,
            best_so_far,
            mean: 0.0,
            std: 0.0,
            nodes_best: 0,
            edges_best: 0,
            edges_total_best: 0,
            diversity,
            controllers: Controllers { sigma: 0.0, add_connection_rate: 0.0, add_node_rate: 0.0 },
        }
    }

    #[test]
    fn improving_diverse_run_stays_at_base() {
        let cfg = EvolutionConfig::default();
        let mut c = Controllers::base(&cfg);
        let mut h = Vec::new();
        for g in 0..20 {
            h.push(stats(g as f64, 10.0));
            c.adapt(&h, &cfg);
            assert_eq!(c, Controllers::base(&cfg));
        }
    }

    #[test]
    fn flat_fitness_raises_sigma() {
        let cfg = EvolutionConfig::default();
        let mut c = Controllers::base(&cfg);
        let h: Vec<_> = (0..=cfg.stagnation_window).map(|_| stats(1.0, 10.0)).collect();
        c.adapt(&h, &cfg);
        assert!(c.sigma > cfg.sigma);
    }

    #[test]
    fn rates_respect_caps() {
        let cfg = EvolutionConfig::default();
        let mut c = Controllers::base(&cfg);
        let h: Vec<_> = (0..10).map(|_| stats(1.0, 0.0)).collect();
        for _ in 0..10_000 {
            c.adapt(&h, &cfg);
            assert!(c.sigma <= cfg.sigma_cap);
            assert!(c.add_node_rate <= cfg.structural_cap && c.add_connection_rate <= cfg.structural_cap);
        }
        assert_eq!(c.sigma, cfg.sigma_cap);
    }

    #[test]
    fn history_csv_has_header() {
        let csv = history_csv(&[stats(0.5, 1.0)]);
        assert!(csv.starts_with("generation,best,mean,std,nodes_best,edges_best,edges_total_best\n0,0.5,"));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = EvolutionConfig { population: 1, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = EvolutionConfig { add_node_rate: 1.5, ..Default::default() };
        assert!(cfg.validate().is_err());
    }
}
