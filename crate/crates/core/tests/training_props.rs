use dcliques::data::{node_distributions, partition_shards, synthetic_dataset, Dataset, Partition};
use dcliques::mixing::MixingMatrix;
use dcliques::seed::{derive_rng, purpose};
use dcliques::topology::{
    baseline_full, baseline_ring, dcliques, greedy_swap, remove_intra_edges, CliqueAssignment, InterScheme, Topology,
};
use dcliques::training::{
    checkpoint_text, local_gradient, parse_checkpoint, run_experiment, scaled_batch_size, ExperimentSetup, Model,
    NodeState, Simulation, SoftmaxRegression, TrainConfig, TrainError,
};
use proptest::prelude::*;

struct Fixture {
    data: Dataset,
    partition: Partition,
    model: SoftmaxRegression,
}

fn fixture(nodes: usize, seed: u64) -> Fixture {
    let data = synthetic_dataset(4, 40, 6, 3.0, seed).unwrap();
    let partition = partition_shards(data.labels(), nodes, 2, seed).unwrap();
    let model = SoftmaxRegression::for_dataset(&data);
    Fixture { data, partition, model }
}

fn config(batch: usize) -> TrainConfig {
    TrainConfig { learning_rate: 0.1, batch_size: batch, epochs: 3, ..TrainConfig::default() }
}

fn cliques_for(f: &Fixture, size: usize, seed: u64) -> CliqueAssignment {
    let dists = node_distributions(&f.partition, &f.data).unwrap();
    greedy_swap(&dists, size, 100, seed).unwrap()
}

fn params(sim: &Simulation<'_, SoftmaxRegression>) -> Vec<Vec<f64>> {
    sim.states().iter().map(|s| s.params.clone()).collect()
}

fn bits(v: &[Vec<f64>]) -> Vec<Vec<u64>> {
    v.iter().map(|r| r.iter().map(|x| x.to_bits()).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gradient_matches_finite_differences(
        seed in any::<u64>(),
        scale in 0.0f64..2.0,
        batch_len in 1usize..20,
    ) {
        use rand::{Rng, SeedableRng};
        let data = synthetic_dataset(5, 10, 7, 2.0, seed).unwrap();
        let model = SoftmaxRegression::for_dataset(&data);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let params: Vec<f64> = (0..model.num_params()).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
        let batch: Vec<usize> = (0..batch_len).map(|_| rng.random_range(0..data.len())).collect();
        let grad = local_gradient(&model, &params, &data, &batch).unwrap();
        let h = 1e-5;
        for _ in 0..20 {
            let k = rng.random_range(0..params.len());
            let mut plus = params.clone();
            plus[k] += h;
            let mut minus = params.clone();
            minus[k] -= h;
            let fd = (model.loss(&plus, &data, &batch) - model.loss(&minus, &data, &batch)) / (2.0 * h);
            // Relative error, with a floor so that vanishing components are
            // compared in absolute terms.
            let scale = grad[k].abs().max(fd.abs()).max(1e-3);
            prop_assert!((grad[k] - fd).abs() <= 1e-5 * scale, "coordinate {}: {} vs {}", k, grad[k], fd);
        }
    }

    #[test]
    fn averaging_step_preserves_mean(seed in any::<u64>(), scheme in 0usize..4, clique_averaging: bool) {
        let f = fixture(16, seed);
        let a = cliques_for(&f, 4, seed);
        let scheme = [InterScheme::Ring, InterScheme::Fractal, InterScheme::SmallWorld { ns: 2 }, InterScheme::Fully]
            [scheme];
        let t = dcliques(&a, scheme);
        let w = MixingMatrix::metropolis_hastings(&t);
        let cfg = TrainConfig { check_invariants: true, clique_averaging, momentum: 0.5, ..config(4) };
        let mut sim = Simulation::new(&f.model, &f.data, &f.partition, &t, &w, cfg, seed).unwrap()
            .with_cliques(&a, &t).unwrap();
        for _ in 0..15 {
            let report = sim.step().unwrap();
            prop_assert!(report.mean_error.unwrap() <= 1e-9);
        }
    }
}

#[test]
fn deterministic_across_thread_counts() {
    let f = fixture(24, 11);
    let a = cliques_for(&f, 6, 11);
    let t = dcliques(&a, InterScheme::SmallWorld { ns: 2 });
    let w = MixingMatrix::metropolis_hastings(&t);
    for (clique_averaging, momentum) in [(false, 0.0), (true, 0.9)] {
        let mut outcomes = Vec::new();
        for threads in [1, 2, 3, 8] {
            let cfg = TrainConfig { threads, clique_averaging, momentum, eval_every: 1, ..config(5) };
            let setup = ExperimentSetup {
                model: &f.model,
                train: &f.data,
                test: &f.data,
                partition: &f.partition,
                topology: &t,
                mixing: &w,
                cliques: Some(&a),
            };
            let trace = run_experiment(&setup, &cfg, 5).unwrap();
            let mut sim = Simulation::new(&f.model, &f.data, &f.partition, &t, &w, cfg, 5)
                .unwrap()
                .with_cliques(&a, &t)
                .unwrap();
            for _ in 0..20 {
                sim.step().unwrap();
            }
            outcomes.push((trace, bits(&params(&sim))));
        }
        for other in &outcomes[1..] {
            assert_eq!(other.0, outcomes[0].0);
            assert_eq!(other.1, outcomes[0].1);
        }
    }
}

#[test]
fn singleton_cliques_match_plain_dsgd() {
    let f = fixture(12, 3);
    let t = baseline_ring(12).unwrap();
    let w = MixingMatrix::metropolis_hastings(&t);
    let singles = CliqueAssignment::singletons(12);
    let mut plain = Simulation::new(&f.model, &f.data, &f.partition, &t, &w, config(3), 9).unwrap();
    let mut averaged = Simulation::new(&f.model, &f.data, &f.partition, &t, &w, config(3), 9)
        .unwrap()
        .with_cliques(&singles, &t)
        .unwrap();
    for _ in 0..40 {
        plain.dsgd_round().unwrap();
        averaged.clique_avg_round().unwrap();
        assert_eq!(bits(&params(&plain)), bits(&params(&averaged)));
    }
}

#[test]
fn identity_mixing_is_local_sgd() {
    let f = fixture(6, 8);
    let t = Topology::new(6);
    let w = MixingMatrix::identity(6);
    let cfg = config(7);
    let mut sim = Simulation::new(&f.model, &f.data, &f.partition, &t, &w, cfg.clone(), 21).unwrap();
    let mut local: Vec<(NodeState, Vec<f64>)> = (0..6)
        .map(|i| {
            let rng = derive_rng(21, purpose::BATCH, i as u64);
            let init = f.model.init_params();
            (NodeState::new(init.clone(), f.partition.node(i), rng), init)
        })
        .collect();
    for _ in 0..30 {
        sim.dsgd_round().unwrap();
        for (state, params) in &mut local {
            let batch = state.next_batch(cfg.batch_size);
            let g = local_gradient(&f.model, params, &f.data, &batch).unwrap();
            for (p, g) in params.iter_mut().zip(g) {
                *p -= cfg.learning_rate * g;
            }
        }
        for (i, (_, expected)) in local.iter().enumerate() {
            assert_eq!(sim.states()[i].params, *expected);
        }
    }
}

#[test]
fn full_topology_keeps_nodes_identical() {
    let f = fixture(8, 2);
    let t = baseline_full(8).unwrap();
    let w = MixingMatrix::metropolis_hastings(&t);
    let mut sim = Simulation::new(&f.model, &f.data, &f.partition, &t, &w, config(5), 2).unwrap();
    for _ in 0..25 {
        sim.dsgd_round().unwrap();
        let p = params(&sim);
        for other in &p[1..] {
            for (a, b) in other.iter().zip(&p[0]) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn one_clique_complete_graph_agrees_after_first_round() {
    let f = fixture(8, 4);
    let a = CliqueAssignment::new(vec![(0..8).collect()], 8, 8).unwrap();
    let t = dcliques(&a, InterScheme::Fully);
    let w = MixingMatrix::metropolis_hastings(&t);
    let cfg = TrainConfig { clique_averaging: true, ..config(5) };
    let mut sim = Simulation::new(&f.model, &f.data, &f.partition, &t, &w, cfg, 4).unwrap().with_cliques(&a, &t).unwrap();
    sim.step().unwrap();
    let p = params(&sim);
    for other in &p[1..] {
        for (x, y) in other.iter().zip(&p[0]) {
            assert!((x - y).abs() <= 1e-12);
        }
    }
}

#[test]
fn clique_members_share_gradient() {
    let f = fixture(20, 6);
    let a = cliques_for(&f, 5, 6);
    let full = dcliques(&a, InterScheme::Ring);
    let pruned = remove_intra_edges(&full, &a, 2, 1).unwrap();
    for t in [full, pruned] {
        let w = MixingMatrix::metropolis_hastings(&t);
        // With zero initial buffers, v after the first round is the gradient.
        let cfg = TrainConfig { clique_averaging: true, momentum: 0.5, ..config(4) };
        let mut sim =
            Simulation::new(&f.model, &f.data, &f.partition, &t, &w, cfg, 6).unwrap().with_cliques(&a, &t).unwrap();
        sim.step().unwrap();
        let v: Vec<&Vec<f64>> = sim.states().iter().map(|s| &s.momentum).collect();
        for members in a.cliques() {
            for &i in members {
                for &j in members {
                    // Members that lost their mutual edge average over different sets.
                    let same_group = members.iter().all(|&k| (k == i || t.has_edge(i, k)) == (k == j || t.has_edge(j, k)));
                    if same_group && (i == j || t.has_edge(i, j)) {
                        assert_eq!(v[i], v[j], "nodes {i} and {j}");
                    }
                }
            }
        }
    }
}

/// Reference Clique Averaging with momentum, written against the public
/// building blocks.
#[test]
fn momentum_recursion() {
    let f = fixture(10, 12);
    let a = CliqueAssignment::new(vec![(0..5).collect(), (5..10).collect()], 10, 5).unwrap();
    let t = dcliques(&a, InterScheme::Ring);
    let w = MixingMatrix::metropolis_hastings(&t);
    let m = 0.9;
    let cfg = TrainConfig { clique_averaging: true, momentum: m, ..config(4) };
    let lr = cfg.learning_rate;
    let mut sim = Simulation::new(&f.model, &f.data, &f.partition, &t, &w, cfg, 12).unwrap().with_cliques(&a, &t).unwrap();
    let columns = w.columns();
    for _ in 0..10 {
        let before: Vec<NodeState> = sim.states().to_vec();
        let grads: Vec<Vec<f64>> = before
            .iter()
            .map(|s| {
                let mut probe = s.clone();
                let batch = probe.next_batch(4);
                local_gradient(&f.model, &s.params, &f.data, &batch).unwrap()
            })
            .collect();
        let mut halves = Vec::new();
        let mut velocities = Vec::new();
        for (i, s) in before.iter().enumerate() {
            let members = a.clique(a.clique_of(i));
            let mut g = grads[members[0]].clone();
            for &j in &members[1..] {
                for (x, y) in g.iter_mut().zip(&grads[j]) {
                    *x += y;
                }
            }
            g.iter_mut().for_each(|x| *x /= members.len() as f64);
            let v: Vec<f64> = s.momentum.iter().zip(&g).map(|(v, g)| m * v + g).collect();
            halves.push(s.params.iter().zip(&v).map(|(p, v)| p - lr * v).collect::<Vec<f64>>());
            velocities.push(v);
        }
        sim.step().unwrap();
        for (i, s) in sim.states().iter().enumerate() {
            assert_eq!(s.momentum, velocities[i]);
            let mut expected = vec![0.0; halves[i].len()];
            for &(j, wji) in &columns[i] {
                for (e, h) in expected.iter_mut().zip(&halves[j]) {
                    *e += wji * h;
                }
            }
            assert_eq!(s.params, expected);
        }
    }
}

#[test]
fn zero_momentum_leaves_buffers_empty() {
    let f = fixture(10, 1);
    let a = cliques_for(&f, 5, 1);
    let t = dcliques(&a, InterScheme::Fully);
    let w = MixingMatrix::metropolis_hastings(&t);
    let cfg = TrainConfig { clique_averaging: true, ..config(4) };
    let mut sim = Simulation::new(&f.model, &f.data, &f.partition, &t, &w, cfg, 1).unwrap().with_cliques(&a, &t).unwrap();
    for _ in 0..10 {
        sim.step().unwrap();
    }
    assert!(sim.states().iter().all(|s| s.momentum.iter().all(|&v| v == 0.0)));
}

#[test]
fn divergence_aborts_with_node_and_round() {
    let f = fixture(6, 5);
    let t = baseline_ring(6).unwrap();
    let w = MixingMatrix::metropolis_hastings(&t);
    let mut sim = Simulation::new(&f.model, &f.data, &f.partition, &t, &w, config(4), 5).unwrap();
    sim.step().unwrap();
    sim.states_mut()[4].params[0] = f64::NAN;
    assert_eq!(sim.step(), Err(TrainError::Divergence { round: 2, node: 4 }));

    let cfg = TrainConfig { learning_rate: 1e308, ..config(4) };
    let mut sim = Simulation::new(&f.model, &f.data, &f.partition, &t, &w, cfg, 5).unwrap();
    let err = (0..50).find_map(|_| sim.step().err());
    assert!(matches!(err, Some(TrainError::Divergence { .. })), "{err:?}");
}

#[test]
fn message_accounting() {
    let f = fixture(20, 7);
    let a = cliques_for(&f, 5, 7);
    let t = dcliques(&a, InterScheme::Fractal);
    let w = MixingMatrix::metropolis_hastings(&t);
    let degree_sum: usize = t.degrees().iter().sum();
    for clique_averaging in [false, true] {
        let cfg = TrainConfig { clique_averaging, ..config(4) };
        let mut sim =
            Simulation::new(&f.model, &f.data, &f.partition, &t, &w, cfg, 7).unwrap().with_cliques(&a, &t).unwrap();
        let report = sim.step().unwrap();
        let factor = if clique_averaging { 2 } else { 1 };
        assert_eq!(report.messages, factor * degree_sum);
        assert_eq!(report.examples, 20 * 4);
    }
}

#[test]
fn epoch_budget_and_trace_rows() {
    let f = fixture(10, 3);
    let t = baseline_ring(10).unwrap();
    let w = MixingMatrix::metropolis_hastings(&t);
    let setup = ExperimentSetup {
        model: &f.model,
        train: &f.data,
        test: &f.data,
        partition: &f.partition,
        topology: &t,
        mixing: &w,
        cliques: None,
    };
    let zero = run_experiment(&setup, &TrainConfig { epochs: 0, ..config(4) }, 3).unwrap();
    assert_eq!(zero.rows.len(), 1);
    assert_eq!(zero.rows[0].epoch, 0.0);
    assert!(zero.rows[0].accuracies.iter().all(|a| (0.0..=1.0).contains(a)));

    let trace = run_experiment(&setup, &TrainConfig { epochs: 5, eval_every: 2, ..config(4) }, 3).unwrap();
    let epochs: Vec<f64> = trace.rows.iter().map(|r| r.epoch).collect();
    assert_eq!(epochs, [0.0, 2.0, 4.0, 5.0]);
    for row in &trace.rows {
        assert!(row.min <= row.mean && row.mean <= row.max);
    }

    let err = run_experiment(&setup, &TrainConfig { clique_averaging: true, ..config(4) }, 3);
    assert!(matches!(err, Err(TrainError::Config(_))));
}

#[test]
fn batch_scaling_keeps_updates_per_epoch() {
    assert_eq!(scaled_batch_size(128, 100, 1000), 13);
    assert_eq!(scaled_batch_size(128, 100, 100), 128);
    assert_eq!(scaled_batch_size(128, 100, 1_000_000), 1);
    let per_node_100: f64 = 50_000.0 / 100.0;
    let per_node_1000: f64 = 50_000.0 / 1000.0;
    let updates_100 = per_node_100 / 128.0;
    let updates_1000 = per_node_1000 / 13.0;
    assert!((updates_1000 / updates_100 - 1.0).abs() <= 0.02);
}

#[test]
fn checkpoint_round_trip() {
    let f = fixture(4, 9);
    let t = baseline_full(4).unwrap();
    let w = MixingMatrix::metropolis_hastings(&t);
    let mut sim = Simulation::new(&f.model, &f.data, &f.partition, &t, &w, config(4), 9).unwrap();
    for _ in 0..5 {
        sim.step().unwrap();
    }
    let parsed = parse_checkpoint(&checkpoint_text(sim.states())).unwrap();
    assert_eq!(bits(&parsed), bits(&params(&sim)));
}
