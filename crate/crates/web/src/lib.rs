//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string; errors surface as JS exceptions.

use std::f64::consts::PI;

use serde::Serialize;
use wasm_bindgen::prelude::*;

use nonlocal_core::commsim::{orthogonal_representation_hadamard, representation_residual};
use nonlocal_core::games::{chsh_game, hadamard_graph, make_coloring_game};
use nonlocal_core::strategies::{
    block_direct_sum_strategy, chsh_strategy_with_angles, fourier_strategy_hadamard, is_perfect,
    substitute_max_entangled, winning_probability, SubstitutionOptions,
};

const EPS: f64 = 1e-9;
/// Largest `n` whose `2^n × 2^n` Gram matrix is still cheap to ship to the page.
pub const MAX_GRAM_N: usize = 8;

#[derive(Debug, Serialize)]
pub struct ChshCurve {
    pub theta: Vec<f64>,
    pub win: Vec<f64>,
    pub classical: f64,
    pub best: f64,
}

/// Winning probability when Bob measures at `±θ` and Alice at `0, π/4`.
pub fn chsh_curve_data(samples: usize) -> ChshCurve {
    let game = chsh_game();
    let samples = samples.max(2);
    let theta: Vec<f64> = (0..samples)
        .map(|i| -PI / 2.0 + PI * i as f64 / (samples - 1) as f64)
        .collect();
    let win = theta
        .iter()
        .map(|&th| {
            let st = chsh_strategy_with_angles([0.0, PI / 4.0], [th, -th]);
            winning_probability(&game, &st).expect("CHSH strategy matches CHSH game")
        })
        .collect();
    ChshCurve {
        theta,
        win,
        classical: 0.75,
        best: (PI / 8.0).cos().powi(2),
    }
}

#[derive(Debug, Serialize)]
pub struct SpectraComparison {
    pub p: f64,
    pub before: Vec<f64>,
    pub after: Vec<f64>,
    pub win_before: f64,
    pub win_after: f64,
    pub perfect_after: bool,
}

/// Schmidt coefficients of the block sum `√p·Ψ ⊕ √(1−p)·Ψ` of the `H_4` Fourier
/// strategy, before and after swapping in the maximally entangled state.
pub fn substitution_spectra_data(p: f64) -> Result<SpectraComparison, String> {
    let err = |e: &dyn std::fmt::Display| e.to_string();
    let game = make_coloring_game(&hadamard_graph(4).map_err(|e| err(&e))?, 4);
    let base = fourier_strategy_hadamard(4).map_err(|e| err(&e))?;
    let st = block_direct_sum_strategy(&base, p).map_err(|e| err(&e))?;
    let sub = substitute_max_entangled(&game, &st, SubstitutionOptions::default()).map_err(|e| err(&e))?;
    Ok(SpectraComparison {
        p,
        before: st.schmidt(EPS).map_err(|e| err(&e))?.coefficients,
        after: sub.strategy.schmidt(EPS).map_err(|e| err(&e))?.coefficients,
        win_before: winning_probability(&game, &st).map_err(|e| err(&e))?,
        win_after: winning_probability(&game, &sub.strategy).map_err(|e| err(&e))?,
        perfect_after: is_perfect(&game, &sub.strategy, EPS).map_err(|e| err(&e))?.perfect,
    })
}

#[derive(Debug, Serialize)]
pub struct GramData {
    pub n: usize,
    pub vertices: usize,
    pub edges: usize,
    /// Row-major `|⟨u_x, u_y⟩|²`.
    pub overlaps: Vec<f64>,
    /// `1` where `x` and `y` are adjacent.
    pub adjacency: Vec<u8>,
    pub orthogonality_residual: f64,
    pub normalization_residual: f64,
}

/// Overlaps of the `±1/√n` vectors representing `H_n`, with adjacency for comparison.
pub fn hadamard_gram_data(n: usize) -> Result<GramData, String> {
    if n > MAX_GRAM_N {
        return Err(format!("n = {n} exceeds {MAX_GRAM_N}"));
    }
    let graph = hadamard_graph(n).map_err(|e| e.to_string())?;
    let vectors = orthogonal_representation_hadamard(n).map_err(|e| e.to_string())?;
    let residual = representation_residual(&graph, &vectors).map_err(|e| e.to_string())?;
    let count = vectors.len();
    let mut overlaps = Vec::with_capacity(count * count);
    let mut adjacency = Vec::with_capacity(count * count);
    for x in 0..count {
        for y in 0..count {
            overlaps.push(vectors[x].inner(&vectors[y]).norm_sqr());
            adjacency.push(u8::from(graph.adjacent(x, y)));
        }
    }
    Ok(GramData {
        n,
        vertices: count,
        edges: graph.edge_count(),
        overlaps,
        adjacency,
        orthogonality_residual: residual.orthogonality,
        normalization_residual: residual.normalization,
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

#[wasm_bindgen]
pub fn chsh_curve(samples: usize) -> String {
    to_json(&chsh_curve_data(samples))
}

#[wasm_bindgen]
pub fn substitution_spectra(p: f64) -> Result<String, JsError> {
    substitution_spectra_data(p)
        .map(|d| to_json(&d))
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn hadamard_gram(n: usize) -> Result<String, JsError> {
    hadamard_gram_data(n).map(|d| to_json(&d)).map_err(|e| JsError::new(&e))
}
