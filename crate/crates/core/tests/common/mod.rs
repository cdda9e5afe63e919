#![allow(dead_code)]

use std::path::Path;

use std::collections::BTreeMap;

use gridfault::dataset::enumerate_scenarios;
use gridfault::experiment::ExperimentConfig;
use gridfault::grid::NetworkGraph;
use gridfault::sim::{solve_phasors, FaultSpec, LoadScenario, PhasorSolution};
use num_complex::Complex64;
use gridfault::grid::{AdjacencyMatrix, AdjacencyMode, SquareMatrix};
use gridfault::layers::{pool_nodes, pool_nodes_backward, Conv1dPool, Dense, Gcn, GruCell, LstmCell, NodePooling};
use gridfault::layers::propagation_tensor;
use gridfault::nn::ops::{concat_cols, concat_cols_backward};
use gridfault::nn::{check_layer, grad_check, random_tensor, Activation, ParamStore, Tensor};
use gridfault::train::{bce_with_logits, softmax_cross_entropy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random connected graph on `n` nodes: a random spanning tree plus `extra`
/// chords.
pub fn random_graph(n: usize, extra: usize, rng: &mut impl Rng) -> AdjacencyMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    for i in 1..n {
        let j = rng.random_range(0..i);
        rows[i][j] = 1.0;
        rows[j][i] = 1.0;
    }
    for _ in 0..extra {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        if i != j {
            rows[i][j] = 1.0;
            rows[j][i] = 1.0;
        }
    }
    AdjacencyMatrix::from_matrix(SquareMatrix::from_rows(&rows).unwrap(), AdjacencyMode::Binary).unwrap()
}

pub fn random_permutation(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    perm
}

/// Moves node block `i` of every `[B, N*w]` row to position `perm[i]`.
pub fn permute_blocks(x: &Tensor, n: usize, perm: &[usize]) -> Tensor {
    let w = x.cols() / n;
    let mut out = Tensor::zeros(x.shape());
    for s in 0..x.rows() {
        for i in 0..n {
            let dst = s * n * w + perm[i] * w;
            out.data_mut()[dst..dst + w].copy_from_slice(&x.row(s)[i * w..(i + 1) * w]);
        }
    }
    out
}

/// Worst relative finite-difference error of each layer over `seeds`.
pub fn layer_gradient_errors(seeds: std::ops::Range<u64>) -> Vec<(&'static str, f64)> {
    let mut worst: Vec<(&'static str, f64)> = Vec::new();
    let mut record = |name: &'static str, e: f64| match worst.iter_mut().find(|(n, _)| *n == name) {
        Some(slot) => slot.1 = slot.1.max(e),
        None => worst.push((name, e)),
    };
    for seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);

        for (name, act) in [
            ("dense/relu", Activation::Relu),
            ("dense/tanh", Activation::Tanh),
            ("dense/sigmoid", Activation::Sigmoid),
        ] {
            let mut store = ParamStore::new();
            let d = Dense::new(&mut store, "d", 5, 4, act, &mut rng).unwrap();
            let e = check_layer(&store, seed, &[3, 5], |s, x| d.forward(s, x), |s, c, dy, g| d.backward(s, c, dy, g));
            record(name, e.unwrap());
        }

        let graph = random_graph(5, 2, &mut rng);
        let mut store = ParamStore::new();
        let gcn = Gcn::new(&mut store, "g", 4, 3, Activation::Relu, propagation_tensor(&graph).unwrap(), &mut rng).unwrap();
        let e = check_layer(&store, seed, &[10, 4], |s, x| gcn.forward(s, x), |s, c, dy, g| gcn.backward(s, c, dy, g));
        record("gcn", e.unwrap());

        let mut store = ParamStore::new();
        let lstm = LstmCell::new(&mut store, "l", 3, 4, &mut rng).unwrap();
        let e = check_layer(
            &store,
            seed,
            &[2, 11],
            |s, v| {
                let parts = concat_cols_backward(v, &[3, 4, 4])?;
                let (h, c, cache) = lstm.step(s, &parts[0], &parts[1], &parts[2])?;
                Ok((concat_cols(&[&h, &c])?, cache))
            },
            |s, cache, dy, g| {
                let d = concat_cols_backward(dy, &[4, 4])?;
                let (dx, dh, dc) = lstm.step_backward(s, cache, &d[0], &d[1], g)?;
                concat_cols(&[&dx, &dh, &dc])
            },
        );
        record("lstm step", e.unwrap());

        let mut store = ParamStore::new();
        let gru = GruCell::new(&mut store, "r", 3, 4, &mut rng).unwrap();
        let e = check_layer(
            &store,
            seed,
            &[2, 7],
            |s, v| {
                let parts = concat_cols_backward(v, &[3, 4])?;
                gru.step(s, &parts[0], &parts[1])
            },
            |s, cache, dy, g| {
                let (dx, dh) = gru.step_backward(s, cache, dy, g)?;
                concat_cols(&[&dx, &dh])
            },
        );
        record("gru step", e.unwrap());

        let mut store = ParamStore::new();
        let conv = Conv1dPool::new(&mut store, "c", 3, 4, 3, 2, 9, &mut rng).unwrap();
        store.get_mut(store.id("c.b").unwrap()).value.fill(0.3);
        let e = check_layer(&store, seed, &[18, 3], |s, x| conv.forward(s, x), |s, c, dy, g| conv.backward(s, c, dy, g));
        record("conv1d+pool", e.unwrap());

        for (name, mode) in [("pool/mean", NodePooling::Mean), ("pool/max", NodePooling::Max)] {
            let x = random_tensor(&[8, 3], &mut rng);
            let w = random_tensor(&[2, 3], &mut rng);
            let e = grad_check(
                |v| {
                    let h = Tensor::new(&[8, 3], v.to_vec())?;
                    let (y, cache) = pool_nodes(&h, 4, mode)?;
                    let value = y.data().iter().zip(w.data()).map(|(a, b)| a * b).sum();
                    Ok((value, pool_nodes_backward(&cache, &w)?.into_data()))
                },
                x.data(),
                1e-6,
            );
            record(name, e.unwrap());
        }

        let logits = random_tensor(&[4, 6], &mut rng).map(|v| 3.0 * v);
        let targets: Vec<Option<usize>> = (0..4).map(|_| Some(rng.random_range(0..6))).collect();
        let e = grad_check(
            |v| {
                let l = softmax_cross_entropy(&Tensor::new(&[4, 6], v.to_vec())?, &targets)?;
                Ok((l.sum, l.grad.into_data()))
            },
            logits.data(),
            1e-6,
        );
        record("softmax cross-entropy", e.unwrap());

        let logits = random_tensor(&[5, 1], &mut rng).map(|v| 3.0 * v);
        let targets: Vec<Option<usize>> = (0..5).map(|_| Some(rng.random_range(0..2))).collect();
        let e = grad_check(
            |v| {
                let l = bce_with_logits(&Tensor::new(&[5, 1], v.to_vec())?, &targets)?;
                Ok((l.sum, l.grad.into_data()))
            },
            logits.data(),
            1e-6,
        );
        record("binary cross-entropy", e.unwrap());
    }
    worst
}

/// The desk preset cut down to a few hundred windows for fast end-to-end
/// runs.
pub fn tiny_config(out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset("potsdam-desk").unwrap();
    cfg.grid.resistances = vec![0.1, 10.0];
    cfg.grid.load_scenarios = 1;
    cfg.grid.load_changes = 60;
    cfg.split.train_fault = 230;
    cfg.split.test_fault = 56;
    cfg.split.train_nf = 48;
    cfg.split.test_nf = 12;
    cfg.train.epochs = 4;
    cfg.train.batch_size = 50;
    cfg.transfer.trigger = 0.5;
    cfg.transfer.head_epochs = 2;
    cfg.transfer.fine_tune_epochs = 2;
    cfg.sweep.epochs = Some(2);
    cfg.out = out.to_path_buf();
    cfg
}

/// Current balance recomputed branch by branch from the solved voltages:
/// `|| sum of element currents leaving each node || / || source currents ||`.
pub fn kcl_residual(g: &NetworkGraph, scenario: &LoadScenario, fault: Option<&FaultSpec>, sol: &PhasorSolution) -> f64 {
    let v = &sol.voltages;
    let mut out = vec![[Complex64::new(0.0, 0.0); 3]; g.n_buses()];
    for line in g.lines() {
        for p in 0..3 {
            let i = (v[line.from][p] - v[line.to][p]) / line.impedance;
            out[line.from][p] += i;
            out[line.to][p] -= i;
        }
    }
    for (load, m) in g.loads().iter().zip(&scenario.multipliers) {
        let y = g.load_admittance(load);
        for p in 0..3 {
            out[load.bus][p] += y[p] * m[p] * v[load.bus][p];
        }
    }
    let mut scale = 0.0;
    for src in g.sources() {
        for p in 0..3 {
            out[src.bus][p] += (v[src.bus][p] - src.phasors[p]) / src.impedance;
            scale += (src.phasors[p] / src.impedance).norm_sqr();
        }
    }
    if let Some(f) = fault {
        let b = f.bus;
        for &p in f.category.ground_phases() {
            out[b][p] += v[b][p] / f.resistance;
        }
        for &(p, q) in f.category.phase_pairs() {
            let i = (v[b][p] - v[b][q]) / f.resistance;
            out[b][p] += i;
            out[b][q] -= i;
        }
    }
    let mismatch: f64 = out.iter().flatten().map(|c| c.norm_sqr()).sum();
    (mismatch / scale).sqrt()
}

/// Worst KCL residual over every operating point the config's scenario grid
/// produces (pre-fault, faulted, and both sides of each load change).
pub fn worst_kcl_residual(cfg: &ExperimentConfig) -> (f64, usize) {
    let g = cfg.network().unwrap();
    let grid = cfg.scenario_grid(&g).unwrap();
    let sc = enumerate_scenarios(&grid, cfg.dataset.seed).unwrap();
    let n_loads = g.loads().len();
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut check = |scenario: &LoadScenario, fault: Option<&FaultSpec>| {
        let sol = solve_phasors(&g, scenario, fault).unwrap();
        worst = worst.max(kcl_residual(&g, scenario, fault, &sol));
        count += 1;
    };
    let mut seen = std::collections::BTreeSet::new();
    for case in &sc.faults {
        let scenario = case.load_scenario(n_loads);
        if seen.insert(case.load_index) {
            check(&scenario, None);
        }
        let spec = case.fault_spec(&cfg.dataset.waveform, cfg.dataset.onset_range);
        check(&scenario, Some(&spec));
    }
    for case in &sc.load_changes {
        check(&LoadScenario::random(case.before_seed, n_loads), None);
        check(&LoadScenario::random(case.after_seed, n_loads), None);
    }
    (worst, count)
}

/// Fault configurations where lowering the fault resistance raised a
/// voltage across the fault path at the fault bus, and the number of
/// configurations checked.
pub fn severity_violations(cfg: &ExperimentConfig) -> (Vec<String>, usize) {
    let g = cfg.network().unwrap();
    let grid = cfg.scenario_grid(&g).unwrap();
    let sc = enumerate_scenarios(&grid, cfg.dataset.seed).unwrap();
    let n_loads = g.loads().len();
    // (category, bus, load) -> [(resistance, fault path voltages)]
    let mut groups: BTreeMap<(String, usize, usize), Vec<(f64, Vec<f64>)>> = BTreeMap::new();
    for case in &sc.faults {
        let spec = case.fault_spec(&cfg.dataset.waveform, cfg.dataset.onset_range);
        let sol = solve_phasors(&g, &case.load_scenario(n_loads), Some(&spec)).unwrap();
        let mags = sol.fault_path_voltages(&spec);
        groups
            .entry((case.category.name().to_string(), case.bus, case.load_index))
            .or_default()
            .push((case.resistance, mags));
    }
    let mut bad = Vec::new();
    for (key, mut runs) in groups.iter().map(|(k, v)| (k, v.clone())) {
        runs.sort_by(|a, b| b.0.total_cmp(&a.0));
        for w in runs.windows(2) {
            for (hi_r, lo_r) in w[0].1.iter().zip(&w[1].1) {
                if lo_r > hi_r {
                    bad.push(format!("{key:?}: R {} -> {} raised {hi_r} to {lo_r}", w[0].0, w[1].0));
                }
            }
        }
    }
    (bad, groups.len())
}

/// Every file under `dir` with its bytes, keyed by relative path.
pub fn snapshot(dir: &Path) -> BTreeMap<std::path::PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// generate, train (event), transfer, evaluate and an SNR sweep.
pub fn run_all(cfg: &ExperimentConfig) {
    use gridfault::dataset::Task;
    use gridfault::experiment::{run_evaluate, run_generate, run_sweep, run_train, run_transfer, SweepAxis};
    run_generate(cfg).unwrap();
    run_train(cfg).unwrap();
    run_transfer(cfg).unwrap();
    run_evaluate(cfg, &Task::ALL).unwrap();
    run_sweep(cfg, &SweepAxis::parse("snr=inf,20").unwrap()).unwrap();
    run_sweep(cfg, &SweepAxis::parse("measured=all;1,5,9").unwrap()).unwrap();
}

/// Trunk parameters of two checkpoint files compared bit for bit.
pub fn trunks_bitwise_equal(a: &Path, b: &Path) -> bool {
    use gridfault::nn::load_checkpoint;
    let trunk = |p: &Path| -> Vec<_> {
        load_checkpoint(p).unwrap().into_iter().filter(|e| e.name.starts_with("trunk.")).collect()
    };
    let (ta, tb) = (trunk(a), trunk(b));
    !ta.is_empty()
        && ta.len() == tb.len()
        && ta.iter().zip(&tb).all(|(x, y)| {
            x.name == y.name
                && x.value.shape() == y.value.shape()
                && x.value.data().iter().zip(y.value.data()).all(|(p, q)| p.to_bits() == q.to_bits())
        })
}
