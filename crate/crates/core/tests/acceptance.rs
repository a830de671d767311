//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nonlocal_core::commsim::{
    chromatic_number, coloring_protocol, cost_bounds, orthogonal_representation_hadamard, representation_residual,
    simulate_protocol, strategy_to_protocol, ChromaticConfig,
};
use nonlocal_core::games::{
    chsh_game, classical_value, hadamard_graph, magic_square_constraints, make_bcs_game, make_coloring_game,
    tilde_transform, weak_projection_witness, Party, SearchConfig,
};
use nonlocal_core::linalg::{bipartite_expectation, ComplexMatrix, C64};
use nonlocal_core::strategies::{
    block_direct_sum_strategy, fourier_strategy_hadamard, is_perfect, lift_strategy_tilde, magic_square_strategy,
    restrict_tilde_strategy, structure_report, substitute_max_entangled, verify_corollary1, verify_lemma2,
    SubstitutionOptions,
};

use common::*;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, format!("took {took:.2?}, limit {limit:?}"))?;
    Ok(took)
}

fn c1_expectation_identity() -> Check {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let da = 2 + below(&mut r, 3);
        let db = 2 + below(&mut r, 3);
        let a = random_matrix(&mut r, da, da);
        let b = random_matrix(&mut r, db, db);
        let psi = random_unit_vector(&mut r, da * db);
        let fast = bipartite_expectation(&a, &b, &psi).map_err(|e| e.to_string())?;
        worst = worst.max((fast - naive_expectation(&a, &b, &psi)).norm());
    }
    ensure(worst <= 1e-10, format!("max deviation {worst:e}"))?;
    let took = within(Duration::from_secs(5), start)?;
    Ok(format!("1000 triples, max deviation {worst:.2e}, {took:.2?}"))
}

/// Magic square value from Bob's 2^9 assignments with Alice best-responding
/// per constraint among satisfying answers.
fn magic_square_oracle() -> f64 {
    let constraints = magic_square_constraints();
    let mut best: f64 = 0.0;
    for x in 0u32..512 {
        let mut agree = 0usize;
        for c in &constraints {
            let mut top = 0;
            for m in 0u32..8 {
                if (m.count_ones() % 2) as u8 != c.parity {
                    continue;
                }
                let hits = c
                    .vars
                    .iter()
                    .enumerate()
                    .filter(|&(j, &v)| (m >> j) & 1 == (x >> v) & 1)
                    .count();
                top = top.max(hits);
            }
            agree += top;
        }
        best = best.max(agree as f64 / 18.0);
    }
    best
}

fn c2_classical_values() -> Check {
    let start = Instant::now();
    let chsh = classical_value(&chsh_game(), &SearchConfig::default()).map_err(|e| e.to_string())?;
    ensure(chsh.value == 0.75, format!("CHSH value {}", chsh.value))?;
    // all 16 deterministic pairs by hand
    let mut brute: f64 = 0.0;
    for fa in 0..4usize {
        for fb in 0..4usize {
            let wins = (0..4)
                .filter(|&q| {
                    let (s, t) = (q >> 1, q & 1);
                    ((fa >> s) & 1) ^ ((fb >> t) & 1) == s & t
                })
                .count();
            brute = brute.max(wins as f64 / 4.0);
        }
    }
    ensure(brute == 0.75, format!("CHSH brute force {brute}"))?;

    let ms = make_bcs_game(&magic_square_constraints()).map_err(|e| e.to_string())?;
    let v = classical_value(&ms, &SearchConfig::default()).map_err(|e| e.to_string())?;
    let oracle = magic_square_oracle();
    ensure((oracle - 17.0 / 18.0).abs() <= 1e-12, format!("oracle gives {oracle}"))?;
    ensure(
        (v.value - 17.0 / 18.0).abs() <= 1e-12,
        format!("magic square value {}", v.value),
    )?;
    let took = within(Duration::from_secs(120), start)?;
    Ok(format!("CHSH 0.75, magic square {:.15} (17/18), {took:.2?}", v.value))
}

fn c3_magic_square_quantum() -> Check {
    let ms = make_bcs_game(&magic_square_constraints()).map_err(|e| e.to_string())?;
    let st = magic_square_strategy();
    st.validate(1e-9).map_err(|e| e.to_string())?;
    let r = is_perfect(&ms, &st, 1e-9).map_err(|e| e.to_string())?;
    ensure(r.perfect, format!("{} violations", r.violations.len()))?;
    Ok(format!("perfect at 1e-9, win probability {:.12}", r.win_probability))
}

fn c4_substitution() -> Check {
    let start = Instant::now();
    let eps = 1e-8;
    let g = make_coloring_game(&hadamard_graph(4).map_err(|e| e.to_string())?, 4);
    let base = fourier_strategy_hadamard(4).map_err(|e| e.to_string())?;
    let st = block_direct_sum_strategy(&base, 0.3).map_err(|e| e.to_string())?;
    ensure(
        is_perfect(&g, &st, 1e-9).map_err(|e| e.to_string())?.perfect,
        "block sum not perfect",
    )?;
    let schmidt = st.schmidt(1e-9).map_err(|e| e.to_string())?;
    let classes = schmidt.coefficient_classes(1e-9);
    ensure(classes.len() == 2, format!("{} Schmidt classes", classes.len()))?;

    let psi = st.state();
    let witness = weak_projection_witness(&g, Party::Bob, true).ok_or("no witness")?;
    let mut worst: f64 = 0.0;
    for link in &witness.links {
        let e = st
            .measurement(Party::Alice, &g.alice_questions()[link.partner_question])
            .ok_or("missing")?;
        let f = st
            .measurement(Party::Bob, &g.bob_questions()[link.question])
            .ok_or("missing")?;
        let l2 = verify_lemma2(e, f, psi, 1e-9).map_err(|e| e.to_string())?;
        let c1 = verify_corollary1(e, f, &link.total_map(), psi, 1e-9).map_err(|e| e.to_string())?;
        for rep in [&l2, &c1] {
            worst = worst
                .max(rep.max_projector_residual())
                .max(rep.max_commutator_residual());
        }
    }
    ensure(worst <= eps, format!("residual {worst:e}"))?;
    let report = structure_report(&g, &st, 1e-9).map_err(|e| e.to_string())?;
    ensure(report.within(eps), report.summary())?;

    let sub = substitute_max_entangled(
        &g,
        &st,
        SubstitutionOptions {
            eps: 1e-9,
            restrict_support: false,
        },
    )
    .map_err(|e| e.to_string())?;
    ensure(sub.strategy.local_dims() == (8, 8), "wrong dimension")?;
    let after = sub.strategy.schmidt(1e-9).map_err(|e| e.to_string())?;
    let flat = after
        .coefficients
        .iter()
        .all(|&l| (l - 8f64.sqrt().recip()).abs() <= 1e-12);
    ensure(flat && after.rank == 8, "substituted state is not maximally entangled")?;
    ensure(
        is_perfect(&g, &sub.strategy, eps).map_err(|e| e.to_string())?.perfect,
        "substituted strategy not perfect",
    )?;
    let took = within(Duration::from_secs(30), start)?;
    Ok(format!(
        "2 Schmidt classes, max residual {worst:.1e}, perfect on |Ψ_8⟩, {took:.2?}"
    ))
}

fn c5_fourier() -> Check {
    let start = Instant::now();
    let mut parts = Vec::new();
    for n in [4, 8] {
        let g = make_coloring_game(&hadamard_graph(n).map_err(|e| e.to_string())?, n);
        let st = fourier_strategy_hadamard(n).map_err(|e| e.to_string())?;
        let r = is_perfect(&g, &st, 1e-9).map_err(|e| e.to_string())?;
        ensure(r.perfect, format!("n={n}: {} violations", r.violations.len()))?;
        ensure(
            (r.win_probability - 1.0).abs() <= 1e-9,
            format!("n={n}: win {}", r.win_probability),
        )?;
        parts.push(format!("n={n} over {} pairs", g.support().count()));
    }
    let took = within(Duration::from_secs(120), start)?;
    Ok(format!("{}, {took:.2?}", parts.join(", ")))
}

fn c6_tilde() -> Check {
    let g = make_coloring_game(&hadamard_graph(4).map_err(|e| e.to_string())?, 4);
    let st = fourier_strategy_hadamard(4).map_err(|e| e.to_string())?;
    let tg = tilde_transform(&g, Party::Bob);
    let lifted = lift_strategy_tilde(&g, &st, Party::Bob, 1e-9).map_err(|e| e.to_string())?;
    ensure(
        is_perfect(&tg, &lifted, 1e-9).map_err(|e| e.to_string())?.perfect,
        "lift not perfect",
    )?;
    let back = restrict_tilde_strategy(&g, &lifted, Party::Bob).map_err(|e| e.to_string())?;
    ensure(
        is_perfect(&g, &back, 1e-9).map_err(|e| e.to_string())?.perfect,
        "restriction not perfect",
    )?;
    Ok(format!(
        "lift perfect on {} questions, restriction perfect",
        tg.alice_questions().len()
    ))
}

fn c7_protocol() -> Check {
    let h4 = hadamard_graph(4).map_err(|e| e.to_string())?;
    let st = fourier_strategy_hadamard(4).map_err(|e| e.to_string())?;
    let protocol = strategy_to_protocol(&h4, &st, 1e-9).map_err(|e| e.to_string())?;
    let sim = simulate_protocol(&protocol, &h4, 1e-9).map_err(|e| e.to_string())?;
    let r = sim.report;
    ensure(
        r.correct == r.pairs_checked,
        format!("{}/{} correct", r.correct, r.pairs_checked),
    )?;
    ensure(
        (r.classical_bits, r.qubits) == (2, 2),
        format!("cost {} + {}", r.classical_bits, r.qubits),
    )?;
    let chi = chromatic_number(&h4, &ChromaticConfig::default()).map_err(|e| e.to_string())?;
    let (_, rep, cost) = coloring_protocol(&h4, &chi.coloring).map_err(|e| e.to_string())?;
    ensure(rep.correct == rep.pairs_checked, "coloring protocol wrong")?;
    ensure(
        cost.classical_bits == 2,
        format!("coloring protocol costs {}", cost.classical_bits),
    )?;
    Ok(format!(
        "{}/{} pairs, 2 bits + 2 qubits; coloring protocol 2 bits",
        r.correct, r.pairs_checked
    ))
}

fn c8_chromatic_and_representation() -> Check {
    let start = Instant::now();
    let chi = chromatic_number(
        &hadamard_graph(4).map_err(|e| e.to_string())?,
        &ChromaticConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    ensure(chi.chromatic_number == 4, format!("χ(H_4) = {}", chi.chromatic_number))?;
    let mut worst: f64 = 0.0;
    for n in [4, 8, 12] {
        let vectors = orthogonal_representation_hadamard(n).map_err(|e| e.to_string())?;
        let r = representation_residual(&hadamard_graph(n).map_err(|e| e.to_string())?, &vectors)
            .map_err(|e| e.to_string())?;
        worst = worst.max(r.orthogonality).max(r.normalization);
    }
    ensure(worst <= 1e-12, format!("residual {worst:e}"))?;
    let took = within(Duration::from_secs(10), start)?;
    Ok(format!(
        "χ(H_4) = 4, representation residual {worst:.1e} for n = 4, 8, 12, {took:.2?}"
    ))
}

/// Block-diagonal instance in a Schmidt basis, rotated by random local unitaries.
struct ZeroPatternInstance {
    psi: ComplexMatrix,
    alice: Vec<ComplexMatrix>,
    bob: Vec<ComplexMatrix>,
}

fn zero_pattern_instance(r: &mut rand_chacha::ChaCha8Rng) -> ZeroPatternInstance {
    let d = 2 + below(r, 7);
    // consecutive blocks, each with its own Schmidt coefficient
    let mut block_of = Vec::with_capacity(d);
    let mut block = 0;
    for i in 0..d {
        if i > 0 && below(r, 2) == 0 {
            block += 1;
        }
        block_of.push(block);
    }
    let levels: Vec<f64> = (0..=block).map(|_| 0.2 + 0.8 * uniform(r)).collect();
    let mut psi = ComplexMatrix::zeros(d * d, 1);
    for i in 0..d {
        psi[(i * d + i, 0)] = C64::new(levels[block_of[i]], 0.0);
    }
    let psi = psi.scale_real(1.0 / psi.frobenius_norm());

    let u = random_unitary(r, d);
    let v = random_unitary(r, d);
    let per_block = |r: &mut rand_chacha::ChaCha8Rng, n_out: usize| -> Vec<ComplexMatrix> {
        // each basis vector spreads over a random nonempty set of outcomes with weights > 0.08
        let mut weights = vec![vec![0.0; d]; n_out];
        #[allow(clippy::needless_range_loop)]
        for x in 0..d {
            let support: Vec<usize> = (0..n_out).filter(|_| below(r, 3) == 0).collect();
            let support = if support.is_empty() {
                vec![below(r, n_out)]
            } else {
                support
            };
            let raw: Vec<f64> = support.iter().map(|_| 0.5 + uniform(r)).collect();
            let total: f64 = raw.iter().sum();
            for (&o, w) in support.iter().zip(raw) {
                weights[o][x] = w / total;
            }
        }
        weights.iter().map(|w| ComplexMatrix::diagonal(w)).collect()
    };
    let n_a = 2 + below(r, 3);
    let n_b = 2 + below(r, 3);
    let rotate = |m: &ComplexMatrix, w: &ComplexMatrix| &(w * m) * &w.adjoint();
    let alice = per_block(r, n_a).iter().map(|m| rotate(m, &u)).collect();
    // Bob's side is diagonal in the conjugate basis so that Fᵀ shares Alice's eigenbasis
    let bob = per_block(r, n_b).iter().map(|m| rotate(m, &v.conjugate())).collect();
    let rotated = &u.kron(&v.conjugate()) * &psi;
    ZeroPatternInstance {
        psi: rotated,
        alice,
        bob,
    }
}

fn c9_zero_pattern() -> Check {
    let eps = 1e-9;
    let mut r = rng(9);
    let mut mismatches = 0;
    let mut entries = 0;
    let mut zeros = 0;
    for _ in 0..200 {
        let inst = zero_pattern_instance(&mut r);
        let d = inst.alice[0].rows();
        let schmidt = nonlocal_core::linalg::schmidt_decompose(&inst.psi, d, d, eps).map_err(|e| e.to_string())?;
        ensure(schmidt.full_schmidt_rank(), "instance is not full rank")?;
        let me = schmidt.maximally_entangled();
        for e in &inst.alice {
            for f in &inst.bob {
                let on_psi = bipartite_expectation(e, f, &inst.psi)
                    .map_err(|e| e.to_string())?
                    .norm()
                    <= eps;
                let on_me = bipartite_expectation(e, f, &me).map_err(|e| e.to_string())?.norm() <= eps;
                entries += 1;
                zeros += usize::from(on_psi);
                mismatches += usize::from(on_psi != on_me);
            }
        }
    }
    ensure(mismatches == 0, format!("{mismatches} mismatches"))?;
    ensure(zeros > 0 && zeros < entries, "degenerate instances")?;
    Ok(format!("200 instances, {entries} pairs ({zeros} zero), 0 mismatches"))
}

fn c10_cost_bounds() -> Check {
    let b = cost_bounds(2, 1);
    let exact = 9.0 + 4.0 * 2f64.sqrt();
    ensure(
        (b.per_part_chromatic_bound - exact).abs() <= 1e-12,
        format!("got {}", b.per_part_chromatic_bound),
    )?;
    ensure(
        b.exceeds_simplified && b.simplified_bound == 14.0,
        "discrepancy not flagged",
    )?;
    Ok(format!("(1+2√2)² = {:.12} > 14 flagged", b.per_part_chromatic_bound))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("expectation identity", c1_expectation_identity),
        ("classical values", c2_classical_values),
        ("magic square quantum strategy", c3_magic_square_quantum),
        ("maximally entangled substitution", c4_substitution),
        ("Fourier strategies", c5_fourier),
        ("tilde lift and restriction", c6_tilde),
        ("one-way protocol", c7_protocol),
        (
            "chromatic number and orthogonal representation",
            c8_chromatic_and_representation,
        ),
        ("zero pattern", c9_zero_pattern),
        ("cost bounds", c10_cost_bounds),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
