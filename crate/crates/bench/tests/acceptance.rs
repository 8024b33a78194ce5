//! Acceptance checks. Each criterion prints one `PASS` or `FAIL` line with
//! its measurements; the process exits non-zero if any criterion fails.
//!
//! `cargo test -p blockfactor-bench --test acceptance -- 4 8` runs only the
//! listed criteria.

use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blockfactor::graph::Graph;
use blockfactor::metrics::{misclustering_rate, nmi_with, NmiVariant};
use blockfactor::nmf::{osntf, snmf, SolverConfig};
use blockfactor::spectral::{kmeans, nmf_init_from_partition};
use blockfactor::{BlockModel, DcsbmParams, DenseSymMatrix, Partition, SbmParams};
use blockfactor_bench::methods::{Method, MethodOptions, MethodRunner};
use blockfactor_bench::realdata::{load_benchmark, run_benchmark, Dataset, RealDataRow};
use blockfactor_bench::simulate::{mean_by_cell, run_experiment, RunOptions};
use blockfactor_bench::{data_dir, ExperimentSpec, HarnessError};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct Criterion {
    id: &'static str,
    name: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

const SEEDS: std::ops::Range<u64> = 0..10;

/// Rows for every seed in [`SEEDS`], or the reason the dataset is unavailable.
fn realdata_runs(dataset: Dataset, methods: &[Method]) -> Result<Vec<Vec<RealDataRow>>, HarnessError> {
    let bench = load_benchmark(dataset, &data_dir())?;
    SEEDS
        .map(|seed| {
            let opts = MethodOptions {
                seed,
                ..MethodOptions::default()
            };
            run_benchmark(&bench, methods, &opts)
        })
        .collect()
}

fn median_count(runs: &[Vec<RealDataRow>], method: Method) -> f64 {
    median(
        runs.iter()
            .map(|rows| rows.iter().find(|r| r.method == method).unwrap().evaluation.misclustered as f64)
            .collect(),
    )
}

fn karate_exact_recovery() -> Outcome {
    let methods = [Method::Snmf, Method::Osntf, Method::Spectral, Method::RegSpectral];
    let bench = match load_benchmark(Dataset::Karate, &data_dir()) {
        Ok(b) => b,
        Err(e) => return outcome(false, e.to_string()),
    };
    let rows = run_benchmark(&bench, &methods, &MethodOptions::default()).unwrap();
    let pass = rows.iter().all(|r| r.evaluation.misclustered == 0);
    let detail = rows
        .iter()
        .map(|r| {
            format!(
                "{} {} [{}]",
                r.method.title(),
                r.evaluation.misclustered,
                r.misfits.join(" ")
            )
        })
        .collect::<Vec<_>>()
        .join(", ");
    outcome(pass, format!("misclustered (want 0 each): {detail}"))
}

fn dolphins() -> Outcome {
    let methods = [Method::Snmf, Method::Osntf, Method::Spectral, Method::RegSpectral];
    let runs = match realdata_runs(Dataset::Dolphins, &methods) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut pass = true;
    let mut detail = Vec::new();
    for m in [Method::Snmf, Method::Osntf] {
        let count = median_count(&runs, m);
        let sn89 = runs
            .iter()
            .flatten()
            .filter(|r| r.method == m && r.evaluation.misclustered == 1)
            .all(|r| r.misfits == ["SN89"]);
        pass &= count == 1.0 && sn89;
        detail.push(format!("{} median {count} (misfit SN89 in every 1-miss run: {sn89})", m.title()));
    }
    let reg = median_count(&runs, Method::RegSpectral);
    let plain = median_count(&runs, Method::Spectral);
    pass &= reg <= 3.0 && plain >= 8.0;
    detail.push(format!("Reg. Spectral median {reg} (want <= 3)"));
    detail.push(format!("Spectral median {plain} (want >= 8)"));
    outcome(pass, detail.join("; "))
}

fn polblogs() -> Outcome {
    let methods = [Method::Snmf, Method::Osntf, Method::Spectral, Method::RegSpectral];
    let runs = match realdata_runs(Dataset::Polblogs, &methods) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let nodes = runs[0][0].evaluation.evaluated;
    let mut pass = true;
    let mut detail = vec![format!("{nodes} nodes")];
    for m in [Method::Snmf, Method::Osntf] {
        let count = median_count(&runs, m);
        let (variant, nmi) = NmiVariant::ALL
            .iter()
            .map(|&v| {
                let values = runs
                    .iter()
                    .map(|rows| rows.iter().find(|r| r.method == m).unwrap().evaluation.nmi(v))
                    .collect();
                (v, median(values))
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        pass &= count <= 70.0 && nmi >= 0.70;
        detail.push(format!(
            "{} median {count} (want <= 70), NMI {nmi:.4} [{}] (want >= 0.70)",
            m.title(),
            variant.name()
        ));
    }
    let reg = median_count(&runs, Method::RegSpectral);
    let plain = median_count(&runs, Method::Spectral);
    pass &= reg <= 90.0 && plain >= 400.0;
    detail.push(format!("Reg. Spectral median {reg} (want <= 90)"));
    detail.push(format!("Spectral median {plain} (want >= 400)"));
    outcome(pass, detail.join("; "))
}

fn random_memberships(rng: &mut ChaCha8Rng, n: usize, k: usize, min_size: usize) -> Vec<usize> {
    loop {
        let z: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let mut sizes = vec![0; k];
        for &q in &z {
            sizes[q] += 1;
        }
        if sizes.iter().all(|&s| s >= min_size) {
            return z;
        }
    }
}

fn random_full_rank_connectivity(rng: &mut ChaCha8Rng, k: usize) -> DMatrix<f64> {
    loop {
        let mut b = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = rng.gen_range(0.05..0.95);
                b[(i, j)] = v;
                b[(j, i)] = v;
            }
        }
        let sv = b.singular_values();
        if sv.min() > 0.05 * sv.max() {
            return b;
        }
    }
}

/// k-means on the eigenvectors of the `k` eigenvalues largest in magnitude.
/// A rank-`k` population matrix is spanned by exactly these, whatever the
/// signs of its eigenvalues.
fn dominant_subspace_partition(m: &DenseSymMatrix, k: usize, seed: u64) -> Partition {
    let eig = m.as_matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..m.n()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));
    let u = DMatrix::from_fn(m.n(), k, |i, j| eig.eigenvectors[(i, order[j])]);
    kmeans(&u, k, seed, 10).unwrap().partition
}

fn population_recovery() -> Outcome {
    let (n, k) = (60, 3);
    let cfg = SolverConfig {
        max_iters: 50_000,
        target_rel_residual: Some(1e-6),
        ..SolverConfig::default()
    };
    let mut failures = Vec::new();
    let mut worst_residual: f64 = 0.0;
    for case in 0..40u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE + case);
        let z = random_memberships(&mut rng, n, k, 5);
        let b = random_full_rank_connectivity(&mut rng, k);
        let model: BlockModel = if case < 20 {
            SbmParams::new(z.clone(), b).unwrap().into()
        } else {
            let mut theta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
            let mut sums = vec![0.0; k];
            for (&q, &t) in z.iter().zip(&theta) {
                sums[q] += t;
            }
            for (t, &q) in theta.iter_mut().zip(&z) {
                *t /= sums[q];
            }
            DcsbmParams::new(z.clone(), b, theta).unwrap().into()
        };
        let l = model.population_laplacian().unwrap();
        let start = dominant_subspace_partition(&l, k, case);
        let h0 = nmf_init_from_partition(&start, k, cfg.init_offset);
        let f = osntf(&l, k, &h0, &cfg).unwrap();
        let found = blockfactor::nmf::assign_communities(&f.h).unwrap();
        let missed = misclustering_rate(&Partition::new(z), &found).unwrap().count;
        let residual = blockfactor::nmf::exactness_diagnostics(&l, &f).relative_residual;
        worst_residual = worst_residual.max(residual);
        if missed > 0 || !(residual < 1e-6) {
            let kind = if case < 20 { "sbm" } else { "dcsbm" };
            failures.push(format!("{kind} case {case}: {missed} misclustered, residual {residual:.2e}"));
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{} of 40 population Laplacians recovered exactly, worst relative residual {worst_residual:.2e}{}",
            40 - failures.len(),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; {}", failures.join("; "))
            }
        ),
    )
}

/// Disjoint connected components on shuffled node ids, with their labels.
fn random_component_graph(rng: &mut ChaCha8Rng, k: usize) -> (Graph, Vec<usize>) {
    let sizes: Vec<usize> = (0..k).map(|_| rng.gen_range(5..16)).collect();
    let n: usize = sizes.iter().sum();
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    let mut labels = vec![0; n];
    let mut edges = Vec::new();
    let mut offset = 0;
    for (c, &size) in sizes.iter().enumerate() {
        let members = &ids[offset..offset + size];
        for (i, &u) in members.iter().enumerate() {
            labels[u] = c;
            if i > 0 {
                edges.push((u, members[rng.gen_range(0..i)]));
            }
            for &v in &members[..i] {
                if rng.gen_bool(0.3) {
                    edges.push((u, v));
                }
            }
        }
        offset += size;
    }
    (Graph::new(n, edges).unwrap(), labels)
}

fn block_diagonal_exactness() -> Outcome {
    let mut failures = Vec::new();
    for case in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xB10C + case);
        let k = rng.gen_range(2..=4);
        let (g, labels) = random_component_graph(&mut rng, k);
        assert_eq!(g.connected_components().len(), k);
        let opts = MethodOptions {
            seed: case,
            ..MethodOptions::default()
        };
        let runner = MethodRunner::new(&g, k, &opts);
        for m in [Method::Snmf, Method::Osntf] {
            let found = runner.run(m).unwrap().partition;
            let missed = misclustering_rate(&Partition::new(labels.clone()), &found).unwrap().count;
            if missed > 0 {
                failures.push(format!("case {case} (K={k}) {}: {missed} misclustered", m.title()));
            }
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "20 of 20 graphs split into their components by SNMF and OSNTF".to_string()
        } else {
            failures.join("; ")
        },
    )
}

fn monotonicity() -> Outcome {
    let mut snmf_bad = 0;
    let mut osntf_bad = 0;
    let mut snmf_worst: f64 = 0.0;
    let mut osntf_worst: f64 = 0.0;
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EED + trial);
        let n = rng.gen_range(5..=40);
        let k = rng.gen_range(1..=5);
        let x = DenseSymMatrix::from_upper_fn(n, |_, _| rng.gen_range(0.0..1.0));
        let h0 = DMatrix::from_fn(n, k, |_, _| rng.gen_range(0.1..1.1));
        let cfg = SolverConfig {
            max_iters: 300,
            ..SolverConfig::default()
        };
        let a = snmf(&x, k, &h0, &cfg).unwrap().max_relative_increase();
        let b = osntf(&x, k, &h0, &cfg).unwrap().max_relative_increase();
        snmf_worst = snmf_worst.max(a);
        osntf_worst = osntf_worst.max(b);
        snmf_bad += usize::from(a > 1e-10);
        osntf_bad += usize::from(b > 1e-10);
    }
    outcome(
        snmf_bad == 0 && osntf_bad == 0,
        format!(
            "runs with an increase above 1e-10: SNMF {snmf_bad}/100 (worst {snmf_worst:.2e}), \
             OSNTF {osntf_bad}/100 (worst {osntf_worst:.2e})"
        ),
    )
}

fn cell_mean(means: &[(f64, Method, f64)], sweep: f64, method: Method) -> f64 {
    means.iter().find(|c| c.0 == sweep && c.1 == method).unwrap().2
}

fn simulation_trends() -> Outcome {
    let experiments = repo_root().join("experiments");
    let mut degree = ExperimentSpec::load(&experiments.join("sbm_degree.toml")).unwrap();
    degree.methods = vec![Method::Osntf, Method::Spectral];
    degree.sweep.values = vec![10.0, 30.0];
    let rows = run_experiment(&degree, RunOptions::default()).unwrap();
    let means = mean_by_cell(&rows, |r| r.nmi);
    let dense = cell_mean(&means, 30.0, Method::Osntf);
    let sparse_osntf = cell_mean(&means, 10.0, Method::Osntf);
    let sparse_spectral = cell_mean(&means, 10.0, Method::Spectral);
    let pass_a = dense >= 0.8 && sparse_osntf >= sparse_spectral;

    let mut dcsbm = ExperimentSpec::load(&experiments.join("dcsbm_powerlaw.toml")).unwrap();
    dcsbm.methods = vec![Method::Osntf, Method::Spectral, Method::RegSpectral];
    dcsbm.sweep.values = vec![2.1];
    let rows = run_experiment(&dcsbm, RunOptions::default()).unwrap();
    let means = mean_by_cell(&rows, |r| r.nmi);
    let osntf_c = cell_mean(&means, 2.1, Method::Osntf);
    let plain_c = cell_mean(&means, 2.1, Method::Spectral);
    let reg_c = cell_mean(&means, 2.1, Method::RegSpectral);
    let pass_c = plain_c <= 0.3 && osntf_c >= plain_c + 0.3 && osntf_c >= reg_c - 0.02;

    outcome(
        pass_a && pass_c,
        format!(
            "(a) {}: OSNTF at degree 30 {dense:.4} (want >= 0.8), at degree 10 OSNTF {sparse_osntf:.4} vs \
             Spectral {sparse_spectral:.4}; (c) {}: Spectral {plain_c:.4} (want <= 0.3), OSNTF {osntf_c:.4} \
             (want >= Spectral + 0.3), Reg. Spectral {reg_c:.4} (want OSNTF >= Reg. Spectral - 0.02)",
            if pass_a { "pass" } else { "fail" },
            if pass_c { "pass" } else { "fail" },
        ),
    )
}

/// Brute-force minimum Hamming distance over every bijection of three labels.
fn brute_force_misclustered(truth: &[usize], cand: &[usize]) -> usize {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS
        .iter()
        .map(|p| truth.iter().zip(cand).filter(|(&t, &c)| p[c] != t).count())
        .min()
        .unwrap()
}

fn labelings(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0..k.pow(n as u32))
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let l = code % k;
                    code /= k;
                    l
                })
                .collect()
        })
        .collect()
}

/// One representative per partition: labels appear in order of first use.
fn is_canonical(labels: &[usize]) -> bool {
    let mut next = 0;
    for &l in labels {
        if l > next {
            return false;
        }
        if l == next {
            next += 1;
        }
    }
    true
}

fn metric_oracles() -> Outcome {
    // Every truth partition (one labeling per partition; the rate is
    // invariant under relabeling the truth) against every candidate labeling.
    let mut pairs = 0usize;
    let mut mismatches = 0usize;
    for n in 1..=8 {
        let all = labelings(n, 3);
        let truths: Vec<&Vec<usize>> = all.iter().filter(|l| is_canonical(l)).collect();
        let cand_partitions: Vec<Partition> = all.iter().map(|c| Partition::new(c.clone())).collect();
        for truth in truths {
            let t = Partition::new(truth.clone());
            for (cand, c) in all.iter().zip(&cand_partitions) {
                let got = misclustering_rate(&t, c).unwrap();
                let want = brute_force_misclustered(truth, cand);
                pairs += 1;
                if got.count != want || (got.rate - want as f64 / n as f64).abs() > 1e-15 {
                    mismatches += 1;
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x4E41);
    let mut nmi_violations = 0usize;
    for _ in 0..1000 {
        let n = rng.gen_range(1..60);
        let ka = rng.gen_range(1..7);
        let kb = rng.gen_range(1..7);
        let a: Vec<usize> = (0..n).map(|_| rng.gen_range(0..ka)).collect();
        let b: Vec<usize> = (0..n).map(|_| rng.gen_range(0..kb)).collect();
        let mut perm: Vec<usize> = (0..ka).collect();
        perm.shuffle(&mut rng);
        let a_perm: Vec<usize> = a.iter().map(|&l| perm[l]).collect();
        let (a, b, a_perm) = (Partition::new(a), Partition::new(b), Partition::new(a_perm));
        for v in NmiVariant::ALL {
            let ab = nmi_with(&a, &b, v).unwrap();
            let ok = (nmi_with(&a, &a, v).unwrap() - 1.0).abs() < 1e-12
                && (ab - nmi_with(&b, &a, v).unwrap()).abs() < 1e-12
                && (ab - nmi_with(&a_perm, &b, v).unwrap()).abs() < 1e-12
                && (-1e-12..=1.0 + 1e-12).contains(&ab);
            nmi_violations += usize::from(!ok);
        }
    }
    outcome(
        mismatches == 0 && nmi_violations == 0,
        format!(
            "misclustering vs brute force: {mismatches} mismatches in {pairs} pairs (N <= 8, K <= 3); \
             NMI identity violations: {nmi_violations} in 1000 pairs x 4 variants"
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut detail = Vec::new();
    let mut pass = true;
    for spec in ["sbm_degree", "sbm_size", "dcsbm_powerlaw"] {
        let path = repo_root().join("experiments").join(format!("{spec}.toml"));
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{spec}-{run}.csv"));
            let status = Command::new(env!("CARGO_BIN_EXE_blockfactor"))
                .args(["simulate", path.to_str().unwrap(), "--replicates", "1", "--out"])
                .arg(&out)
                .output()
                .unwrap();
            assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
            outputs.push(std::fs::read(&out).unwrap());
        }
        let same = outputs[0] == outputs[1];
        pass &= same;
        detail.push(format!(
            "{spec} {} ({} bytes)",
            if same { "identical" } else { "differs" },
            outputs[0].len()
        ));
    }
    outcome(pass, detail.join(", "))
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: "1",
        name: "karate exact recovery",
        budget: Duration::from_secs(5),
        check: karate_exact_recovery,
    },
    Criterion {
        id: "2",
        name: "dolphins",
        budget: Duration::from_secs(10),
        check: dolphins,
    },
    Criterion {
        id: "3",
        name: "political blogs",
        budget: Duration::from_secs(180),
        check: polblogs,
    },
    Criterion {
        id: "4",
        name: "population recovery",
        budget: Duration::from_secs(30),
        check: population_recovery,
    },
    Criterion {
        id: "5",
        name: "block-diagonal exactness",
        budget: Duration::from_secs(30),
        check: block_diagonal_exactness,
    },
    Criterion {
        id: "6",
        name: "update-rule monotonicity",
        budget: Duration::from_secs(60),
        check: monotonicity,
    },
    Criterion {
        id: "7",
        name: "simulation trends",
        budget: Duration::from_secs(900),
        check: simulation_trends,
    },
    Criterion {
        id: "8",
        name: "metric oracles",
        budget: Duration::from_secs(30),
        check: metric_oracles,
    },
    Criterion {
        id: "9",
        name: "determinism",
        budget: Duration::from_secs(600),
        check: determinism,
    },
];

fn main() -> ExitCode {
    let selected: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for c in CRITERIA {
        if !selected.is_empty() && !selected.iter().any(|s| s == c.id) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(c.check));
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass && elapsed <= c.budget, o.detail),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        failed += usize::from(!pass);
        println!(
            "{} criterion {} ({}): {detail} [{:.1}s, budget {}s]",
            if pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
