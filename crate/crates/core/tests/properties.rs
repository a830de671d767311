mod common;

use nonlocal_core::commsim::{chromatic_number, coloring_protocol, ChromaticConfig};
use nonlocal_core::format::{read_game, read_graph, write_game, write_graph};
use nonlocal_core::games::{classical_value, Graph, NonlocalGame, SearchConfig};
use nonlocal_core::linalg::{
    bipartite_expectation, hermitian_eigen, partial_trace_a, partial_trace_b, schmidt_decompose, svd, unvec, vec_map,
    ComplexMatrix,
};
use nonlocal_core::strategies::{block_direct_sum_strategy, embed_deterministic, winning_probability};
use proptest::prelude::*;

use common::*;

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Game with small random label sets, a random distribution (some zeros) and random predicate.
fn random_game(seed: u64) -> NonlocalGame {
    let mut r = rng(seed);
    let (ns, nt, na, nb) = (
        1 + below(&mut r, 3),
        1 + below(&mut r, 3),
        1 + below(&mut r, 3),
        1 + below(&mut r, 3),
    );
    let mut weights: Vec<f64> = (0..ns * nt)
        .map(|_| {
            if below(&mut r, 4) == 0 {
                0.0
            } else {
                uniform(&mut r) + 0.01
            }
        })
        .collect();
    if weights.iter().all(|&w| w == 0.0) {
        weights[0] = 1.0;
    }
    let total: f64 = weights.iter().sum();
    let accept: Vec<bool> = (0..ns * nt * na * nb).map(|_| below(&mut r, 2) == 0).collect();
    NonlocalGame::new(
        labels("s", ns),
        labels("t", nt),
        labels("a", na),
        labels("b", nb),
        weights.iter().map(|w| w / total).collect(),
        accept,
    )
    .unwrap()
}

fn all_assignments(questions: usize, answers: usize) -> Vec<Vec<usize>> {
    let count = answers.pow(questions as u32);
    (0..count)
        .map(|mut code| {
            (0..questions)
                .map(|_| {
                    let a = code % answers;
                    code /= answers;
                    a
                })
                .collect()
        })
        .collect()
}

fn random_graph(seed: u64, n: usize) -> Graph {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if below(&mut r, 2) == 0 {
                edges.push((u, v));
            }
        }
    }
    Graph::new(labels("v", n), &edges).unwrap()
}

fn brute_chromatic(g: &Graph) -> usize {
    let n = g.vertex_count();
    (1..=n.max(1))
        .find(|&c| {
            all_assignments(n, c)
                .iter()
                .any(|col| g.is_proper_coloring(col).is_ok())
        })
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vec_roundtrip_and_kron_action(seed in any::<u64>(), da in 1usize..5, db in 1usize..5) {
        let mut r = rng(seed);
        let x = random_matrix(&mut r, da, db);
        prop_assert_eq!(unvec(&vec_map(&x), da, db).unwrap(), x.clone());
        let a = random_matrix(&mut r, da, da);
        let b = random_matrix(&mut r, db, db);
        let lhs = vec_map(&(&(&a * &x) * &b.transpose()));
        let rhs = &a.kron(&b) * &vec_map(&x);
        prop_assert!((&lhs - &rhs).frobenius_norm() <= 1e-10);
    }

    #[test]
    fn expectation_matches_kronecker(seed in any::<u64>(), da in 1usize..5, db in 1usize..5) {
        let mut r = rng(seed);
        let a = random_matrix(&mut r, da, da);
        let b = random_matrix(&mut r, db, db);
        let psi = random_unit_vector(&mut r, da * db);
        let fast = bipartite_expectation(&a, &b, &psi).unwrap();
        prop_assert!((fast - naive_expectation(&a, &b, &psi)).norm() <= 1e-10);
    }

    #[test]
    fn schmidt_reconstructs_and_reduced_spectra_agree(seed in any::<u64>(), da in 1usize..5, db in 1usize..5) {
        let mut r = rng(seed);
        let psi = random_unit_vector(&mut r, da * db);
        let sd = schmidt_decompose(&psi, da, db, 1e-12).unwrap();
        prop_assert!((&sd.reconstruct() - &psi).frobenius_norm() <= 1e-10);
        let (mut ea, _) = hermitian_eigen(&partial_trace_b(&psi, da, db).unwrap());
        let (mut eb, _) = hermitian_eigen(&partial_trace_a(&psi, da, db).unwrap());
        ea.sort_by(|x, y| y.total_cmp(x));
        eb.sort_by(|x, y| y.total_cmp(x));
        let k = da.min(db);
        for i in 0..k {
            prop_assert!((ea[i] - eb[i]).abs() <= 1e-10);
        }
        for &rest in ea[k..].iter().chain(&eb[k..]) {
            prop_assert!(rest.abs() <= 1e-10);
        }
    }

    #[test]
    fn svd_reconstructs(seed in any::<u64>(), rows in 1usize..6, cols in 1usize..6, rank in 0usize..6) {
        let mut r = rng(seed);
        let rank = rank.min(rows).min(cols);
        let m = if rank == 0 {
            ComplexMatrix::zeros(rows, cols)
        } else {
            &random_matrix(&mut r, rows, rank) * &random_matrix(&mut r, rank, cols)
        };
        let (u, s, v) = svd(&m);
        prop_assert!(s.windows(2).all(|w| w[0] >= w[1]));
        let back = &(&u * &ComplexMatrix::diagonal(&s)) * &v.adjoint();
        prop_assert!((&back - &m).frobenius_norm() <= 1e-10 * (1.0 + m.frobenius_norm()));
        let k = s.len();
        prop_assert!((&(&u.adjoint() * &u) - &ComplexMatrix::identity(k)).frobenius_norm() <= 1e-10);
        prop_assert!((&(&v.adjoint() * &v) - &ComplexMatrix::identity(k)).frobenius_norm() <= 1e-10);
    }

    #[test]
    fn classical_value_matches_brute_force(seed in any::<u64>()) {
        let g = random_game(seed);
        let (ns, nt) = (g.alice_questions().len(), g.bob_questions().len());
        let (na, nb) = (g.alice_answers().len(), g.bob_answers().len());
        let mut best: f64 = 0.0;
        for alice in all_assignments(ns, na) {
            for bob in all_assignments(nt, nb) {
                best = best.max(g.deterministic_value(&alice, &bob));
            }
        }
        let v = classical_value(&g, &SearchConfig::default()).unwrap();
        prop_assert!((v.value - best).abs() <= 1e-12);
        prop_assert!((g.deterministic_value(&v.alice, &v.bob) - v.value).abs() <= 1e-12);
    }

    #[test]
    fn embedded_deterministic_strategy_wins_as_often(seed in any::<u64>(), p in 0.05f64..0.95) {
        let g = random_game(seed);
        let mut r = rng(seed ^ 0x5eed);
        let alice: Vec<usize> = (0..g.alice_questions().len()).map(|_| below(&mut r, g.alice_answers().len())).collect();
        let bob: Vec<usize> = (0..g.bob_questions().len()).map(|_| below(&mut r, g.bob_answers().len())).collect();
        let st = embed_deterministic(&g, &alice, &bob);
        let expected = g.deterministic_value(&alice, &bob);
        prop_assert!((winning_probability(&g, &st).unwrap() - expected).abs() <= 1e-12);
        let sum = block_direct_sum_strategy(&st, p).unwrap();
        prop_assert!((winning_probability(&g, &sum).unwrap() - expected).abs() <= 1e-12);
    }

    #[test]
    fn game_json_roundtrip(seed in any::<u64>()) {
        let g = random_game(seed);
        let text = write_game(&g);
        let back = read_game(&text).unwrap();
        prop_assert_eq!(write_game(&back), text);
        prop_assert_eq!(back, g);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chromatic_number_matches_brute_force(seed in any::<u64>(), n in 1usize..8) {
        let g = random_graph(seed, n);
        let chi = brute_chromatic(&g);
        prop_assume!(chi <= 4);
        let found = chromatic_number(&g, &ChromaticConfig::default()).unwrap();
        prop_assert_eq!(found.chromatic_number, chi);
        prop_assert!(g.is_proper_coloring(&found.coloring).is_ok());
        prop_assert!(found.clique_lower_bound <= chi);
        let (_, report, _) = coloring_protocol(&g, &found.coloring).unwrap();
        prop_assert_eq!(report.correct, report.pairs_checked);
    }

    #[test]
    fn graph_json_roundtrip(seed in any::<u64>(), n in 1usize..9) {
        let g = random_graph(seed, n);
        let text = write_graph(&g);
        prop_assert_eq!(write_graph(&read_graph(&text).unwrap()), text);
    }
}
