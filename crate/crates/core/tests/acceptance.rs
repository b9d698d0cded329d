//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits nonzero if any failed.
//!
//! `cargo test --release --test acceptance`

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use goalrec::dataset::{self, make_shots, Example};
use goalrec::encoder::{encode, TrailBitmap};
use goalrec::harness::{
    base_datasets, base_scenario, run_base, sweep_frozen, sweep_lr, sweep_shots, transfer_scenarios, transfer_tasks,
    BaseRun, RunConfig, SweepReport,
};
use goalrec::nn::{
    batchnorm_backward, batchnorm_forward, conv2d_backward, conv2d_forward, dense_softmax_xent, load_tensors,
    softmax_cross_entropy, BatchNorm, Dense, Mode, Tensor,
};
use goalrec::planner::{astar_noisy, truncate, NoisyHeuristicParams};
use goalrec::recognizer::Network;
use goalrec::{Cell, GOAL_COUNT, OBSERVABILITIES};
use rand::seq::SliceRandom;
use rand::Rng;

use common::{
    bfs_distance, numeric_grad, random_scenario, random_tensor, relative_error, rng, rule_channel, valid_path,
    weighted_sum,
};

/// Outcome of one criterion: pass flag plus a one-line summary.
type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

const GRAD_TOL: f64 = 1e-4;
const GRAD_SHAPES: usize = 20;

fn worst(errors: impl IntoIterator<Item = f64>) -> f64 {
    errors.into_iter().fold(0.0, f64::max)
}

fn gradient_conv() -> f64 {
    let mut r = rng(101);
    worst((0..GRAD_SHAPES).map(|_| {
        let (b, ci, co) = (r.gen_range(1..=3), r.gen_range(1..=4), r.gen_range(1..=4));
        let side = r.gen_range(3..=8);
        let stride = r.gen_range(1..=2);
        let x = random_tensor(&[b, ci, side, side], &mut r);
        let k = random_tensor(&[co, ci, 3, 3], &mut r);
        let bias = random_tensor(&[co], &mut r);
        let y = conv2d_forward(&x, &k, &bias, stride).unwrap();
        let w = random_tensor(y.shape(), &mut r);
        let g = conv2d_backward(&w, &x, &k, stride, true).unwrap();
        let nx = numeric_grad(&x, |x| weighted_sum(&conv2d_forward(x, &k, &bias, stride).unwrap(), &w));
        let nk = numeric_grad(&k, |k| weighted_sum(&conv2d_forward(&x, k, &bias, stride).unwrap(), &w));
        let nb = numeric_grad(&bias, |b| weighted_sum(&conv2d_forward(&x, &k, b, stride).unwrap(), &w));
        worst([
            relative_error(g.input.unwrap().values(), &nx),
            relative_error(g.kernels.values(), &nk),
            relative_error(g.bias.values(), &nb),
        ])
    }))
}

fn gradient_batchnorm() -> f64 {
    let mut r = rng(202);
    worst((0..GRAD_SHAPES).map(|_| {
        let (b, c, side) = (r.gen_range(2..=4), r.gen_range(1..=4), r.gen_range(1..=4));
        let x = random_tensor(&[b, c, side, side], &mut r);
        let mut bn = BatchNorm::new(c);
        bn.gamma = random_tensor(&[c], &mut r);
        bn.beta = random_tensor(&[c], &mut r);
        let (y, cache) = batchnorm_forward(&x, &mut bn.clone(), Mode::Train).unwrap();
        let w = random_tensor(y.shape(), &mut r);
        let (gx, gg, gb) = batchnorm_backward(&w, &cache, &bn).unwrap();
        let run = |x: &Tensor, bn: &BatchNorm| {
            weighted_sum(&batchnorm_forward(x, &mut bn.clone(), Mode::Train).unwrap().0, &w)
        };
        let nx = numeric_grad(&x, |x| run(x, &bn));
        let ng = numeric_grad(&bn.gamma, |g| {
            run(
                &x,
                &BatchNorm {
                    gamma: g.clone(),
                    ..bn.clone()
                },
            )
        });
        let nb = numeric_grad(&bn.beta, |be| {
            run(
                &x,
                &BatchNorm {
                    beta: be.clone(),
                    ..bn.clone()
                },
            )
        });
        worst([
            relative_error(gx.values(), &nx),
            relative_error(gg.values(), &ng),
            relative_error(gb.values(), &nb),
        ])
    }))
}

fn gradient_dense() -> f64 {
    let mut r = rng(303);
    worst((0..GRAD_SHAPES).map(|_| {
        let (b, i, o) = (r.gen_range(1..=4), r.gen_range(1..=12), r.gen_range(2..=10));
        let x = random_tensor(&[b, i], &mut r);
        let dense = Dense {
            weights: random_tensor(&[o, i], &mut r),
            bias: random_tensor(&[o], &mut r),
        };
        let labels: Vec<usize> = (0..b).map(|_| r.gen_range(0..o)).collect();
        let g = dense_softmax_xent(&x, &dense, &labels).unwrap();
        let loss = |x: &Tensor, d: &Dense| dense_softmax_xent(x, d, &labels).unwrap().loss;
        let nx = numeric_grad(&x, |x| loss(x, &dense));
        let nw = numeric_grad(&dense.weights, |w| {
            loss(
                &x,
                &Dense {
                    weights: w.clone(),
                    bias: dense.bias.clone(),
                },
            )
        });
        let nb = numeric_grad(&dense.bias, |bi| {
            loss(
                &x,
                &Dense {
                    weights: dense.weights.clone(),
                    bias: bi.clone(),
                },
            )
        });
        worst([
            relative_error(g.grad_features.values(), &nx),
            relative_error(g.grad_weights.values(), &nw),
            relative_error(g.grad_bias.values(), &nb),
        ])
    }))
}

fn gradient_xent() -> f64 {
    let mut r = rng(404);
    worst((0..GRAD_SHAPES).map(|_| {
        let (b, k) = (r.gen_range(1..=6), r.gen_range(2..=10));
        let mut logits = random_tensor(&[b, k], &mut r);
        logits.scale(3.0);
        let labels: Vec<usize> = (0..b).map(|_| r.gen_range(0..k)).collect();
        let g = softmax_cross_entropy(&logits, &labels).unwrap();
        let n = numeric_grad(&logits, |l| softmax_cross_entropy(l, &labels).unwrap().loss);
        relative_error(g.grad_logits.values(), &n)
    }))
}

fn criterion_1() -> Outcome {
    let errs = [
        ("conv", gradient_conv()),
        ("batchnorm", gradient_batchnorm()),
        ("dense", gradient_dense()),
        ("xent", gradient_xent()),
    ];
    let ok = errs.iter().all(|(_, e)| *e < GRAD_TOL);
    let detail = errs
        .iter()
        .map(|(n, e)| format!("{n}={e:.2e}"))
        .collect::<Vec<_>>()
        .join(" ");
    (
        ok,
        format!("worst relative error over {GRAD_SHAPES} shapes each: {detail} (tol {GRAD_TOL:e})"),
    )
}

fn criterion_2() -> Outcome {
    let mut exact_mismatch = 0;
    for s in 0..100 {
        let sc = random_scenario(16, s);
        let goal = sc.goals()[sc.true_goal()];
        let path = astar_noisy(sc.map(), sc.start(), goal, &NoisyHeuristicParams::exact(s)).unwrap();
        if Some(path.cost()) != bfs_distance(sc.map(), sc.start(), goal) {
            exact_mismatch += 1;
        }
    }
    let (mut invalid, mut below) = (0, 0);
    let (mut noisy_sum, mut opt_sum) = (0usize, 0usize);
    for s in 0..200 {
        let sc = random_scenario(16, 10_000 + s);
        let goal = sc.goals()[sc.true_goal()];
        let opt = bfs_distance(sc.map(), sc.start(), goal).unwrap();
        let path = astar_noisy(
            sc.map(),
            sc.start(),
            goal,
            &NoisyHeuristicParams::new(0.2, 10, s).unwrap(),
        )
        .unwrap();
        if !valid_path(sc.map(), path.cells(), sc.start(), goal) {
            invalid += 1;
        }
        if path.cost() < opt {
            below += 1;
        }
        noisy_sum += path.cost();
        opt_sum += opt;
    }
    let ok = exact_mismatch == 0 && invalid == 0 && below == 0 && noisy_sum > opt_sum;
    (
        ok,
        format!(
            "eps=0 mismatches {exact_mismatch}/100; eps=0.2 invalid {invalid}, below-optimal {below}, mean cost {:.3} vs optimal {:.3}",
            noisy_sum as f64 / 200.0,
            opt_sum as f64 / 200.0
        ),
    )
}

/// Observation set for example `i`: a truncated noisy path, or for odd `i`
/// an arbitrary subset of free cells.
fn random_observations(sc: &goalrec::Scenario, i: u64) -> Vec<Cell> {
    let mut r = rng(i);
    if i.is_multiple_of(2) {
        let goal = sc.goals()[r.gen_range(0..GOAL_COUNT)];
        let path = astar_noisy(sc.map(), sc.start(), goal, &NoisyHeuristicParams::standard(i)).unwrap();
        truncate(&path, *OBSERVABILITIES.choose(&mut r).unwrap() as f64).unwrap()
    } else {
        let free = sc.map().largest_component();
        let k = r.gen_range(0..free.len().min(40));
        free.choose_multiple(&mut r, k).copied().collect()
    }
}

fn criterion_3() -> Outcome {
    let mut onehot_bad = 0;
    let mut oracle_bad = 0;
    for i in 0..1000u64 {
        let size = [8, 16, 32][(i % 3) as usize];
        let sc = random_scenario(size, 50_000 + i);
        let obs = random_observations(&sc, i);
        let bm = encode(&sc, &obs).unwrap();
        let planes = bm.planes();
        let n2 = size * size;
        let onehot = (0..n2).all(|p| {
            let col: Vec<f64> = (0..5).map(|c| planes[c * n2 + p]).collect();
            col.iter().all(|&v| v == 0.0 || v == 1.0) && col.iter().sum::<f64>() == 1.0
        });
        if !onehot {
            onehot_bad += 1;
        }
        if i < 100 {
            let agree = (0..n2).all(|p| {
                let cell = Cell::new(p % size, p / size);
                bm.channel_at(cell) as u8 == rule_channel(&sc, &obs, cell)
            });
            if !agree {
                oracle_bad += 1;
            }
        }
    }
    (
        onehot_bad == 0 && oracle_bad == 0,
        format!("one-hot violations {onehot_bad}/1000, oracle disagreements {oracle_bad}/100"),
    )
}

fn pair_counts(examples: &[Example]) -> BTreeMap<(u8, u8), usize> {
    let mut m = BTreeMap::new();
    for e in examples {
        *m.entry((e.label, e.observability)).or_insert(0) += 1;
    }
    m
}

fn criterion_4() -> Outcome {
    let sc = random_scenario(32, 7);
    let mut bad = Vec::new();
    for n in 0..=10usize {
        let shots = make_shots(&sc, n, &NoisyHeuristicParams::standard(0), 900 + n as u64).unwrap();
        let pairs = pair_counts(&shots);
        let balanced = n == 0 || (pairs.len() == 40 && pairs.values().all(|&c| c == n));
        if shots.len() != 4 * n * GOAL_COUNT || !balanced {
            bad.push(format!("n={n}: {}", shots.len()));
        }
    }
    let cfg = RunConfig::default();
    let (train, test) = base_datasets(&cfg, &base_scenario(&cfg).unwrap()).unwrap();
    let balanced = |set: &[Example], per_goal: usize| {
        let pairs = pair_counts(set);
        pairs.len() == 40 && pairs.values().all(|&c| c == per_goal)
    };
    let base_ok = train.len() == 2000
        && test.len() == 800
        && balanced(&train, cfg.base_train_paths_per_goal)
        && balanced(&test, cfg.base_test_paths_per_goal);
    (
        bad.is_empty() && base_ok,
        format!(
            "transfer sizes 4n|G| for n=0..10: {}; base train {} / test {} goal-balanced: {base_ok}",
            if bad.is_empty() {
                "all match".to_string()
            } else {
                bad.join(", ")
            },
            train.len(),
            test.len()
        ),
    )
}

/// Base run plus the three sweeps at the default desk configuration.
struct Desk {
    base: BaseRun,
    frozen: SweepReport,
    shots: SweepReport,
    lr: SweepReport,
}

fn desk() -> &'static Desk {
    static DESK: OnceLock<Desk> = OnceLock::new();
    DESK.get_or_init(|| {
        let cfg = RunConfig::default();
        let t = Instant::now();
        let base = run_base(&cfg).unwrap();
        eprintln!("  base network trained in {:.0?}", t.elapsed());
        let tasks = transfer_tasks(&cfg, &transfer_scenarios(&cfg).unwrap()).unwrap();
        let baseline = Some(base.baseline_curve());
        let t = Instant::now();
        let frozen = sweep_frozen(&base.network, &tasks, &cfg, baseline.clone()).unwrap();
        let shots = sweep_shots(&base.network, &tasks, &cfg, baseline.clone()).unwrap();
        let lr = sweep_lr(&base.network, &tasks, &cfg, baseline).unwrap();
        eprintln!("  sweeps finished in {:.0?}", t.elapsed());
        Desk {
            base,
            frozen,
            shots,
            lr,
        }
    })
}

fn criterion_5() -> Outcome {
    let b = &desk().base.baseline;
    let (full, quarter) = (b.accuracy_at(100).unwrap(), b.accuracy_at(25).unwrap());
    (
        full >= 0.80 && full > quarter,
        format!("baseline accuracy at 100% {full:.3}, at 25% {quarter:.3} (need >= 0.80 and > 25%)"),
    )
}

fn criterion_6() -> Outcome {
    let s = &desk().shots;
    let zero = s.mean_overall(s.value_index(0.0).unwrap());
    (
        zero <= 0.15,
        format!("zero-shot mean accuracy over 5 maps {zero:.3} (need <= 0.15)"),
    )
}

fn criterion_7() -> Outcome {
    let d = desk();
    let s = &d.shots;
    let zero = s.mean_at(s.value_index(0.0).unwrap(), 100).unwrap();
    let five = s.mean_at(s.value_index(5.0).unwrap(), 100).unwrap();
    let baseline = d.base.baseline.accuracy_at(100).unwrap();
    let gain = five - zero >= 0.20;
    let close = five >= baseline - 0.10;
    (
        gain && close,
        format!(
            "at 100%: 5-shot {five:.3}, zero-shot {zero:.3} (gain >= 0.20: {gain}), baseline {baseline:.3} (within 0.10: {close})"
        ),
    )
}

fn criterion_8() -> Outcome {
    let d = desk();
    let at = |r: &SweepReport, v: f64| r.mean_overall(r.value_index(v).unwrap());
    let high = (at(&d.frozen, 4.0) + at(&d.frozen, 5.0)) / 2.0;
    let low = (at(&d.frozen, 0.0) + at(&d.frozen, 1.0)) / 2.0;
    let frozen_ok = high >= low;
    let (s1, s5, s10) = (at(&d.shots, 1.0), at(&d.shots, 5.0), at(&d.shots, 10.0));
    let rise = s5 >= s1 + 0.10;
    let plateau = s10 <= s5 + 0.02;
    let lr_means: Vec<f64> = (0..d.lr.values.len()).map(|i| d.lr.mean_overall(i)).collect();
    let best = d.lr.values[lr_means
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap()];
    let argmax = best == 0.01;
    let collapse = at(&d.lr, 1.0) <= 0.2;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(",");
    let frozen_all: Vec<f64> = (0..d.frozen.values.len()).map(|i| d.frozen.mean_overall(i)).collect();
    let shots_all: Vec<f64> = (0..d.shots.values.len()).map(|i| d.shots.mean_overall(i)).collect();
    (
        frozen_ok && rise && plateau && argmax && collapse,
        format!(
            "frozen{{4,5}} {high:.3} >= frozen{{0,1}} {low:.3}: {frozen_ok}; shots5 {s5:.3} >= shots1 {s1:.3}+0.10: {rise}; \
             shots10 {s10:.3} <= shots5+0.02: {plateau}; lr argmax {best}: {argmax}; lr=1 {:.3} <= 0.2: {collapse} \
             | frozen [{}] shots [{}] lr [{}]",
            at(&d.lr, 1.0),
            fmt(&frozen_all),
            fmt(&shots_all),
            fmt(&lr_means)
        ),
    )
}

const TINY_CONFIG: &str = "grid_size=16
base_train_paths_per_goal=4
base_test_paths_per_goal=2
transfer_test_paths_per_goal=2
validation_paths_per_goal=2
epochs=2
frozen_values=3,5
shots_values=0,2
lr_values=0.01,0.1
";

fn cli_run(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, TINY_CONFIG).unwrap();
    let out = dir.join("out");
    let steps: [&[&str]; 4] = [
        &["gen-data"],
        &["train-base"],
        &["sweep", "frozen", "--checkpoint", "out/base.nnw"],
        &["adapt", "--checkpoint", "out/base.nnw", "--map", "1"],
    ];
    for args in steps {
        let status = Command::new(env!("CARGO_BIN_EXE_goalrec"))
            .current_dir(dir)
            .args(["--seed", "17", "--config", "run.cfg", "--out", "out"])
            .args(args)
            .output()
            .unwrap();
        assert!(
            status.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&status.stderr)
        );
    }
    std::fs::read_dir(&out)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect()
}

fn criterion_9() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (fa, fb) = (cli_run(a.path()), cli_run(b.path()));
    let kinds = ["grd", "nnw", "csv"];
    let counted = fa.keys().filter(|k| kinds.iter().any(|x| k.ends_with(x))).count();
    let differing: Vec<&String> = fa.keys().filter(|k| fb.get(*k) != fa.get(*k)).collect();
    let ok = fa.len() == fb.len() && differing.is_empty() && counted >= 18;
    (
        ok,
        format!(
            "{} files from two runs ({counted} datasets/checkpoints/CSVs), differing: {differing:?}",
            fa.len()
        ),
    )
}

fn random_examples(r: &mut impl Rng, n: usize, count: usize) -> Vec<Example> {
    (0..count)
        .map(|_| Example {
            bitmap: TrailBitmap::from_indices(n, (0..n * n).map(|_| r.gen_range(0..5)).collect()).unwrap(),
            label: r.gen_range(0..GOAL_COUNT as u8),
            observability: *OBSERVABILITIES.choose(r).unwrap(),
            path_id: r.gen(),
        })
        .collect()
}

/// Closed-form checkpoint size: magic and tensor count, then per tensor a
/// name length, name, rank, dims and f64 values.
fn nnw_size(tensors: &[(String, Tensor)]) -> usize {
    8 + tensors
        .iter()
        .map(|(name, t)| 4 + name.len() + 4 + 4 * t.shape().len() + 8 * t.len())
        .sum::<usize>()
}

fn criterion_10() -> Outcome {
    let mut r = rng(1010);
    let mut grd_bad = 0;
    for _ in 0..50 {
        let n = [2, 4, 8, 16, 32][r.gen_range(0..5)];
        let count = r.gen_range(0..40);
        let examples = random_examples(&mut r, n, count);
        let bytes = dataset::save(&examples).unwrap();
        let size_ok = bytes.len() == 11 + examples.len() * (6 + n * n);
        if !size_ok || dataset::load(&bytes).unwrap() != examples {
            grd_bad += 1;
        }
    }
    let mut nnw_bad = 0;
    for i in 0..12u64 {
        let grid = [8, 16, 32][(i % 3) as usize];
        let mut net = if i % 4 == 3 {
            Network::plain(grid, i)
        } else {
            Network::new(grid, i)
        }
        .unwrap();
        for b in net.blocks_mut() {
            if let Some(bn) = &mut b.bn {
                bn.running_mean = random_tensor(bn.running_mean.shape(), &mut r);
                bn.running_var = random_tensor(bn.running_var.shape(), &mut r);
            }
        }
        let bytes = net.save();
        let tensors = load_tensors(&bytes).unwrap();
        let back = Network::load(&bytes).unwrap();
        if bytes.len() != nnw_size(&tensors) || back.to_tensors() != net.to_tensors() || back.save() != bytes {
            nnw_bad += 1;
        }
    }
    (
        grd_bad == 0 && nnw_bad == 0,
        format!("GRD1 failures {grd_bad}/50, NNW1 failures {nnw_bad}/12 (round trip and closed-form size)"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("gradient oracle", criterion_1),
        ("planner oracle", criterion_2),
        ("encoding invariants", criterion_3),
        ("protocol arithmetic", criterion_4),
        ("baseline learnability", criterion_5),
        ("zero-shot failure", criterion_6),
        ("few-shot transfer", criterion_7),
        ("sweep ordinal shape", criterion_8),
        ("determinism", criterion_9),
        ("format round trips", criterion_10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = format!("criterion_{:02}", i + 1);
        if !filter.is_empty()
            && !filter
                .iter()
                .any(|f| id.contains(f.as_str()) || name.contains(f.as_str()))
        {
            continue;
        }
        let t = Instant::now();
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(run)) {
            Ok(o) => o,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {id} {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
