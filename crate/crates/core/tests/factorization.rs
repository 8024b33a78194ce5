use std::path::PathBuf;

use blockfactor::block_models::{BlockModel, SbmParams};
use blockfactor::graph::{normalized_laplacian, Graph};
use blockfactor::io::{load_graph, GraphFormat};
use blockfactor::matrix::DenseSymMatrix;
use blockfactor::metrics::{misclustered_count, misclustering_rate};
use blockfactor::nmf::{
    assign_communities, exactness_diagnostics, osntf, osntf_objective, snmf, Factorization, SolverConfig,
};
use blockfactor::partition::Partition;
use blockfactor::spectral::{nmf_init_from_partition, spectral_clustering, SpectralOptions, SpectralVariant};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_positive(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(0.1..1.0))
}

fn gram_schmidt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut q = m.clone();
    for j in 0..q.ncols() {
        for p in 0..j {
            let proj = q.column(p).dot(&q.column(j));
            let prev = q.column(p).into_owned();
            let mut col = q.column_mut(j);
            col -= prev * proj;
        }
        let norm = q.column(j).norm();
        let mut col = q.column_mut(j);
        col /= norm;
    }
    q
}

#[test]
fn snmf_recovers_exact_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h_true = random_positive(&mut rng, 6, 2);
    let x = DenseSymMatrix::from_matrix(&h_true * h_true.transpose(), 1e-12).unwrap();
    let h0 = random_positive(&mut rng, 6, 2);
    let cfg = SolverConfig {
        max_iters: 20_000,
        rel_tol: 1e-14,
        ..Default::default()
    };
    let f = snmf(&x, 2, &h0, &cfg).unwrap();
    assert!(f.final_objective() < 1e-4, "residual {}", f.final_objective());
}

#[test]
fn snmf_is_permutation_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 12;
    let x = DenseSymMatrix::from_upper_fn(n, |_, _| rng.gen_range(0.0..1.0));
    let h0 = random_positive(&mut rng, n, 3);
    let perm: Vec<usize> = vec![5, 2, 11, 0, 7, 1, 9, 3, 10, 4, 8, 6];
    let mut h0_perm = DMatrix::zeros(n, 3);
    for i in 0..n {
        h0_perm.set_row(perm[i], &h0.row(i));
    }
    let cfg = SolverConfig {
        max_iters: 50,
        rel_tol: 1e-15,
        ..Default::default()
    };
    let f = snmf(&x, 3, &h0, &cfg).unwrap();
    let fp = snmf(&x.permuted(&perm), 3, &h0_perm, &cfg).unwrap();
    for i in 0..n {
        for j in 0..3 {
            assert!((f.h[(i, j)] - fp.h[(perm[i], j)]).abs() < 1e-10);
        }
    }
}

#[test]
fn pythagorean_identity_for_orthonormal_factors() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let n = rng.gen_range(5..30);
        let k = rng.gen_range(1..5);
        let x = DenseSymMatrix::from_upper_fn(n, |_, _| rng.gen_range(0.0..1.0));
        let h = gram_schmidt(&DMatrix::from_fn(n, k, |_, _| rng.gen_range(-1.0..1.0)));
        let s = h.transpose() * x.as_matrix() * &h;
        let residual = (x.as_matrix() - &h * s * h.transpose()).norm_squared();
        let objective = osntf_objective(&x, &h).unwrap();
        let lhs = residual + objective * objective;
        let rhs = x.frobenius_norm().powi(2);
        assert!((lhs - rhs).abs() < 1e-10 * rhs.max(1.0));
    }
}

fn three_block_sbm() -> BlockModel {
    let b = DMatrix::from_row_slice(3, 3, &[0.7, 0.1, 0.2, 0.1, 0.5, 0.05, 0.2, 0.05, 0.6]);
    let z: Vec<usize> = (0..30).map(|i| (i * 7) % 3).collect();
    BlockModel::from(SbmParams::new(z, b).unwrap())
}

// Z Q^{-1/2}: the indicator matrix with columns scaled to unit norm.
fn scaled_indicator(z: &[usize], k: usize) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(z.len(), k);
    let mut sizes = vec![0.0; k];
    for &q in z {
        sizes[q] += 1.0;
    }
    for (i, &q) in z.iter().enumerate() {
        h[(i, q)] = 1.0 / f64::sqrt(sizes[q]);
    }
    h
}

#[test]
fn population_objective_at_scaled_indicator() {
    let model = three_block_sbm();
    let h = scaled_indicator(model.memberships(), 3);
    let a = model.population_adjacency();
    let objective = osntf_objective(&a, &h).unwrap();
    assert!((objective - a.frobenius_norm()).abs() < 1e-10);
    assert_eq!(assign_communities(&h).unwrap().labels(), model.memberships());
}

#[test]
fn scaled_indicator_is_exact_for_population_laplacian() {
    let model = three_block_sbm();
    let l = model.population_laplacian().unwrap();
    let h = scaled_indicator(model.memberships(), 3);
    let s = h.transpose() * l.as_matrix() * &h;
    let f = Factorization {
        h,
        s: Some(s),
        objective_trace: vec![0.0],
        iterations: 0,
        orthogonality_drift: None,
        converged: true,
    };
    let report = exactness_diagnostics(&l, &f);
    assert!(report.row_sparsity >= 0.99);
    assert!(report.relative_residual < 1e-12);
    assert!(report.orthogonality_drift < 1e-12);
}

#[test]
fn noisy_input_diagnostics() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x = DenseSymMatrix::from_upper_fn(15, |_, _| rng.gen_range(0.0..1.0));
    let h0 = random_positive(&mut rng, 15, 3);
    let f = osntf(&x, 3, &h0, &SolverConfig::default()).unwrap();
    let report = exactness_diagnostics(&x, &f);
    assert!(report.residual > 0.0);
    assert!((0.0..=1.0).contains(&report.row_sparsity));
    assert!(f.h.iter().all(|&v| v >= 0.0));
    let s = f.s.unwrap();
    assert!(s.iter().all(|&v| v >= 0.0));
    assert!((&s - s.transpose()).amax() < 1e-10);
}

fn clique_union(sizes: &[usize]) -> (Graph, Vec<usize>) {
    let mut edges = Vec::new();
    let mut truth = Vec::new();
    let mut start = 0;
    for (q, &s) in sizes.iter().enumerate() {
        for i in 0..s {
            truth.push(q);
            for j in (i + 1)..s {
                edges.push((start + i, start + j));
            }
        }
        start += s;
    }
    (Graph::new(start, edges).unwrap(), truth)
}

#[test]
fn disjoint_cliques_recovered_by_both_solvers() {
    let (g, truth) = clique_union(&[6, 9]);
    let l = normalized_laplacian(&g).unwrap();
    let init = spectral_clustering(&g, 2, SpectralVariant::Plain, &SpectralOptions::default()).unwrap();
    let h0 = nmf_init_from_partition(&init, 2, 0.2);
    let truth = Partition::new(truth);
    for f in [
        snmf(&l, 2, &h0, &SolverConfig::default()).unwrap(),
        osntf(&l, 2, &h0, &SolverConfig::default()).unwrap(),
    ] {
        assert_eq!(misclustered_count(&truth, &assign_communities(&f.h).unwrap()).unwrap(), 0);
    }
}

// Members 3 and 9 (indices 2 and 8) sit between the two factions; every
// method here puts member 3 with the officer's side.
#[test]
fn karate_split_differs_only_at_boundary_members() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/karate.gml");
    let loaded = load_graph(&path, GraphFormat::Gml).unwrap();
    let truth = Partition::new(loaded.labels.unwrap().into_iter().map(Option::unwrap).collect());
    let l = normalized_laplacian(&loaded.graph).unwrap();
    let init = spectral_clustering(&loaded.graph, 2, SpectralVariant::Plain, &SpectralOptions::default()).unwrap();
    let h0 = nmf_init_from_partition(&init, 2, 0.2);
    for f in [
        snmf(&l, 2, &h0, &SolverConfig::default()).unwrap(),
        osntf(&l, 2, &h0, &SolverConfig::default()).unwrap(),
    ] {
        let cand = assign_communities(&f.h).unwrap();
        let m = misclustering_rate(&truth, &cand).unwrap();
        assert!(m.misfits(&truth, &cand).iter().all(|i| [2, 8].contains(i)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn factors_stay_nonnegative_and_finite(seed in any::<u64>(), n in 3usize..20, k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DenseSymMatrix::from_upper_fn(n, |_, _| rng.gen_range(0.0..1.0));
        let h0 = random_positive(&mut rng, n, k.min(n));
        let cfg = SolverConfig { max_iters: 30, ..Default::default() };
        let f = osntf(&x, k.min(n), &h0, &cfg).unwrap();
        prop_assert!(f.h.iter().all(|&v| v >= 0.0));
        prop_assert!(f.objective_trace.iter().all(|v| v.is_finite()));
        let g = snmf(&x, k.min(n), &h0, &cfg).unwrap();
        prop_assert!(g.h.iter().all(|&v| v >= 0.0));
        prop_assert!(g.final_objective() <= g.objective_trace[0] * (1.0 + 1e-10));
    }
}
