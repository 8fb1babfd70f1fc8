use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use swarm_tactics::a2c::PolicyParams;
use swarm_tactics::encoding::EncodingMode;
use swarm_tactics::harness::eval::{read_results, run_eval, write_results, EvalMode, EvalRow, EvalSetup};
use swarm_tactics::harness::experiment::{
    load_scenarios, run_eval_spec, run_training, ExperimentSpec, RunMode, HISTORY_FILE, MANIFEST_FILE, POLICY_FILE, RESULTS_FILE,
};
use swarm_tactics::harness::policy::{LoadedPolicy, PolicyFile, StoredModel};
use swarm_tactics::harness::pool::{generate_pool, write_pool, PoolSpec};
use swarm_tactics::harness::report::report;
use swarm_tactics::harness::scenario::{load_scenario, save_scenario, ScenarioConfig, StaticAdversaryConfig};
use swarm_tactics::neuroevo::{Genome, InnovationRegistry};
use swarm_tactics::reward::RewardConfig;
use swarm_tactics::sim::{observation_width, RuntimeConfig, SimParams};

fn genome_policy(encoding: EncodingMode, seed: u64) -> PolicyFile {
    let runtime = RuntimeConfig { encoding, ..RuntimeConfig::default() };
    let inputs = observation_width(3, &runtime);
    let mut reg = InnovationRegistry::new(inputs, 27);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let genome = Genome::minimal(inputs, 27, 0.1, &mut reg, &mut rng);
    PolicyFile { encoding, raw_slots: runtime.raw_slots, goals: 3, c_s: 0.0, model: StoredModel::Genome(genome) }
}

fn pool_dir(root: &Path, spec: &PoolSpec, name: &str) -> std::path::PathBuf {
    let dir = root.join(name);
    write_pool(&generate_pool(spec), &dir, name).unwrap();
    dir
}

#[test]
fn fleet_counts_survive_save_and_load() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = generate_pool(&PoolSpec::adversary_free(1, 4)).remove(0);
    for (ugv, uav) in [(24, 36), (6, 12), (36, 24)] {
        config.robots.ugv = ugv;
        config.robots.uav_a = uav;
        config.robots.uav_b = uav / 2;
        let path = dir.path().join("s.json");
        save_scenario(&config, &path).unwrap();
        let loaded = load_scenario(&path).unwrap();
        assert_eq!(loaded.config, config);
        assert_eq!(loaded.mission.robots.as_array(), [ugv, uav, uav / 2]);
    }
}

#[test]
fn independent_eval_uses_configured_fleets() {
    let dir = tempfile::tempdir().unwrap();
    let scen = load_scenarios(&[pool_dir(dir.path(), &PoolSpec::dynamic_threat(4, 2), "dyn")]).unwrap();
    let policy = LoadedPolicy::from_file(&genome_policy(EncodingMode::Both, 1)).unwrap();
    let params = SimParams::default();
    let setup = EvalSetup { params: &params, runtime: policy.runtime(), reward: RewardConfig::new(1.0).unwrap(), mode: EvalMode::Independent };
    let records = run_eval(&scen, &policy, &setup).unwrap();
    for (r, s) in records.iter().zip(&scen) {
        assert_eq!(r.initial, s.mission.robots);
        assert_eq!(r.row.scenario_id, s.id);
        assert_eq!(r.row.c_s, 1.0);
    }
}

#[test]
fn continuation_carries_survivors() {
    let dir = tempfile::tempdir().unwrap();
    let scen = load_scenarios(&[pool_dir(dir.path(), &PoolSpec::dynamic_threat(6, 5), "dyn")]).unwrap();
    let policy = LoadedPolicy::from_file(&genome_policy(EncodingMode::Both, 2)).unwrap();
    let params = SimParams::default();
    let setup = EvalSetup { params: &params, runtime: policy.runtime(), reward: RewardConfig::new(0.0).unwrap(), mode: EvalMode::Continuation };
    let records = run_eval(&scen, &policy, &setup).unwrap();
    assert_eq!(records[0].initial, scen[0].mission.robots);
    let mut losses = 0;
    for i in 1..records.len() {
        let prev = &records[i - 1];
        assert_eq!(records[i].initial, scen[i].mission.robots.min(&prev.survivors));
        for t in 0..3 {
            assert!(records[i].initial.as_array()[t] <= prev.survivors.as_array()[t]);
        }
        losses += usize::from(prev.survivors != prev.initial);
    }
    assert!(losses > 0, "dynamic adversaries should disable someone");
}

#[test]
fn continuation_runs_after_total_loss() {
    let dir = tempfile::tempdir().unwrap();
    let mut configs = generate_pool(&PoolSpec::adversary_free(2, 9));
    let spawn = configs[0].robots.spawn;
    configs[0].static_adversaries.push(StaticAdversaryConfig { x: spawn[0] + spawn[2] / 2.0, y: spawn[1] + spawn[3] / 2.0, kill_radius: 30.0 });
    let paths: Vec<_> = configs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let p = dir.path().join(format!("s{i}.json"));
            save_scenario(c, &p).unwrap();
            p
        })
        .collect();
    let scen = load_scenarios(&paths).unwrap();
    let policy = LoadedPolicy::from_file(&genome_policy(EncodingMode::Both, 3)).unwrap();
    let params = SimParams::default();
    let setup = EvalSetup { params: &params, runtime: policy.runtime(), reward: RewardConfig::new(0.0).unwrap(), mode: EvalMode::Continuation };
    let records = run_eval(&scen, &policy, &setup).unwrap();
    assert_eq!(records[0].survivors.total(), 0);
    assert_eq!(records[1].initial.total(), 0);
    assert!(!records[1].row.success);
    assert_eq!(records[1].row.rescue_time_s, configs[1].t_f * 60.0);
}

#[test]
fn eval_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let pool = pool_dir(dir.path(), &PoolSpec::exp2(4, 3), "mixed");
    let policy_path = dir.path().join("policy.json");
    genome_policy(EncodingMode::Both, 4).save(&policy_path).unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let mut spec = ExperimentSpec::new(RunMode::Eval, vec![pool.clone()]);
        spec.policy = Some(policy_path.clone());
        spec.eval_mode = EvalMode::Continuation;
        spec.output_dir = run.into();
        let spec = spec.resolved(dir.path()).unwrap();
        run_eval_spec(&spec).unwrap();
        assert!(spec.output_dir.join(MANIFEST_FILE).exists());
        outputs.push(std::fs::read(spec.output_dir.join(RESULTS_FILE)).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let rows = read_results(&dir.path().join("a").join(RESULTS_FILE)).unwrap();
    assert_eq!(rows.len(), 4);
}

#[test]
fn report_matches_hand_computed_summary() {
    let dir = tempfile::tempdir().unwrap();
    let row = |success, minutes: f64, survival, encoding| EvalRow {
        scenario_id: "s".into(),
        seed: 0,
        success,
        rescue_time_s: minutes * 60.0,
        survival_rate: survival,
        reward: 0.0,
        encoding,
        c_s: 1.0,
    };
    let both = EncodingMode::Both;
    let rows = vec![
        row(true, 10.0, 1.0, both),
        row(true, 20.0, 0.5, both),
        row(false, 40.0, 0.25, both),
        row(true, 15.0, 0.75, both),
        row(false, 40.0, 0.0, both),
        row(true, 30.0, 0.8, EncodingMode::None),
    ];
    write_results(&dir.path().join("results.csv"), &rows).unwrap();
    std::fs::write(dir.path().join("notes.csv"), "a,b\n1,2\n").unwrap();
    let s = report(dir.path()).unwrap();
    assert_eq!(s.len(), 2);
    let b = &s[0];
    assert_eq!((b.condition.as_str(), b.encoding, b.runs, b.censored), ("results", both, 5, 2));
    // Rescue minutes 10, 20, 40, 15, 40: mean 25, squared deviations sum 800.
    assert!((b.rescue_time_min_mean - 25.0).abs() < 1e-12);
    assert!((b.rescue_time_min_std - 200f64.sqrt()).abs() < 1e-12);
    // Survival 1, .5, .25, .75, 0: mean .5, squared deviations sum .625.
    assert!((b.survival_rate_mean - 0.5).abs() < 1e-12);
    assert!((b.survival_rate_std - (0.625f64 / 4.0).sqrt()).abs() < 1e-12);
    assert!((b.success_rate - 0.6).abs() < 1e-12);
    assert_eq!((s[1].encoding, s[1].runs, s[1].rescue_time_min_mean), (EncodingMode::None, 1, 30.0));
}

#[test]
fn report_rejects_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    assert!(report(dir.path()).is_err());
}

#[test]
fn raw_encoding_training_wires_raw_observations() {
    let dir = tempfile::tempdir().unwrap();
    let pool = pool_dir(dir.path(), &PoolSpec::adversary_free(2, 1), "pool");
    let mut spec = ExperimentSpec::new(RunMode::TrainNeuro, vec![pool]);
    spec.encoding = EncodingMode::None;
    spec.neuro.population = 4;
    spec.neuro.generations = 1;
    spec.seed = 5;
    spec.output_dir = "run".into();
    let spec = spec.resolved(dir.path()).unwrap();
    let outcome = run_training(&spec).unwrap();
    let policy = LoadedPolicy::load(&spec.output_dir.join(POLICY_FILE)).unwrap();
    assert_eq!(policy.encoding, EncodingMode::None);
    assert_ne!(policy.input_width(), 148);
    assert_eq!(policy.input_width(), observation_width(3, &policy.runtime()));
    assert_eq!(std::fs::read_to_string(spec.output_dir.join(HISTORY_FILE)).unwrap(), outcome.log);
}

#[test]
fn manifest_rerun_reproduces_history() {
    let dir = tempfile::tempdir().unwrap();
    let pool = pool_dir(dir.path(), &PoolSpec::adversary_free(2, 2), "pool");
    let mut spec = ExperimentSpec::new(RunMode::TrainNeuro, vec![pool]);
    spec.neuro.population = 4;
    spec.neuro.generations = 2;
    spec.seed = 17;
    spec.c_s = 1.0;
    spec.output_dir = "first".into();
    let first = run_training(&spec.resolved(dir.path()).unwrap()).unwrap();
    let manifest = ExperimentSpec::load(&first.output_dir.join(MANIFEST_FILE)).unwrap();
    assert_eq!(manifest.seed, 17);
    assert_eq!(manifest.neuro.seed, 17);
    assert_eq!(manifest.c_s, 1.0);
    let mut again = manifest.clone();
    again.output_dir = dir.path().join("second");
    let second = run_training(&again).unwrap();
    assert_eq!(first.log, second.log);
    assert_eq!(
        std::fs::read(first.output_dir.join(POLICY_FILE)).unwrap(),
        std::fs::read(second.output_dir.join(POLICY_FILE)).unwrap()
    );
}

#[test]
fn checkpoints_round_trip_and_check_widths() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let file = genome_policy(EncodingMode::Input, 6);
    file.save(&path).unwrap();
    let loaded = LoadedPolicy::load(&path).unwrap();
    assert_eq!(loaded.input_width(), 148);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let params = PolicyParams::init(148, 27, [8, 8], &mut rng);
    let mlp = PolicyFile { encoding: EncodingMode::Both, raw_slots: 40, goals: 3, c_s: 1.0, model: StoredModel::Mlp(params.clone()) };
    mlp.save(&path).unwrap();
    match PolicyFile::load(&path).unwrap().model {
        StoredModel::Mlp(p) => assert_eq!(p.data, params.data),
        StoredModel::Genome(_) => panic!("kind changed"),
    }

    let wrong = PolicyFile { encoding: EncodingMode::None, ..mlp };
    assert!(LoadedPolicy::from_file(&wrong).is_err());
}

#[test]
fn scenario_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut config: ScenarioConfig = generate_pool(&PoolSpec::adversary_free(1, 0)).remove(0);
    config.true_target = "nowhere".into();
    let path = dir.path().join("bad.json");
    save_scenario(&config, &path).unwrap();
    let msg = load_scenario(&path).unwrap_err().to_string();
    assert!(msg.contains("true_target"), "{msg}");
}
