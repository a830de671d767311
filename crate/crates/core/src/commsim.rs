//! One-way protocols for the promise equality problem on a graph.
//!
//! Alice holds `s`, Bob holds `t`, and the promise is `s = t` or `s ~ t`.
//! From a perfect coloring-game strategy, Alice measures her half of `|ψ⟩`
//! with `E^s`, sends the outcome `a` together with the other register, and
//! Bob answers "equal" iff his outcome under `F^t` is `a`. All quantum
//! messages are simulated with exact state vectors.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::games::{make_coloring_game, GameError, Graph, Party};
use crate::linalg::{bipartite_expectation, psd_sqrt, unvec, vec_map, ComplexMatrix, LinalgError};
use crate::strategies::{is_perfect, Measurement, QuantumStrategy, StrategyError};

/// Default vertex limit for [`chromatic_number`].
pub const DEFAULT_CHROMATIC_BUDGET: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CommError {
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("strategy is not perfect for the coloring game (loss {loss:e})")]
    NotPerfect { loss: f64 },
    #[error("Bob's answer on ({s}, {t}) after message {message} is wrong with probability {mass:e}")]
    NondeterministicAnswer {
        s: String,
        t: String,
        message: usize,
        mass: f64,
    },
    #[error("coloring is not proper: {u} and {v} share a color")]
    ImproperColoring { u: String, v: String },
    #[error("coloring has {got} entries for {expected} vertices")]
    ColoringSize { got: usize, expected: usize },
    #[error("graph has {vertices} vertices, search budget is {budget}")]
    BudgetExceeded { vertices: usize, budget: usize },
    #[error("n must be a positive multiple of 4 (at most 20), got {0}")]
    BadN(usize),
    #[error("strategy does not fit the graph: {0}")]
    ShapeMismatch(String),
}

fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub classical_bits: u32,
    pub qubits: u32,
    /// `⌈log₂ χ⌉` when a chromatic number is known.
    pub deterministic_bits: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTranscript {
    pub s: String,
    pub t: String,
    /// Alice's classical message.
    pub message: usize,
    /// Probability that Alice sends this message.
    pub probability: f64,
    /// Dimension of the register sent along with the message.
    pub quantum_dimension: usize,
    pub answered_equal: bool,
    pub correct: bool,
    /// Probability that Bob's answer is wrong given this message.
    pub deviation: f64,
}

/// Summary in the CLI report layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub pairs_checked: usize,
    pub correct: usize,
    pub max_deviation: f64,
    pub classical_bits: u32,
    pub qubits: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub transcripts: Vec<ProtocolTranscript>,
    pub report: SimulationReport,
}

/// Entanglement-assisted one-way protocol for promise equality on a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct OneWayProtocol {
    strategy: QuantumStrategy,
    /// Measurement index per vertex, Alice then Bob.
    alice: Vec<usize>,
    bob: Vec<usize>,
    outcomes: usize,
}

impl OneWayProtocol {
    /// Wraps a strategy without checking that it wins the coloring game.
    pub fn new_unchecked(graph: &Graph, strategy: QuantumStrategy) -> Result<Self, CommError> {
        let index = |party: Party| -> Result<Vec<usize>, CommError> {
            let lookup: HashMap<&str, usize> = strategy
                .measurements(party)
                .iter()
                .enumerate()
                .map(|(i, (q, _))| (q.as_str(), i))
                .collect();
            graph
                .vertices()
                .iter()
                .map(|v| {
                    lookup
                        .get(v.as_str())
                        .copied()
                        .ok_or_else(|| CommError::ShapeMismatch(format!("{party} has no measurement for vertex {v:?}")))
                })
                .collect()
        };
        let alice = index(Party::Alice)?;
        let bob = index(Party::Bob)?;
        let outcomes = strategy.measurements(Party::Alice).first().map_or(0, |(_, m)| m.len());
        let uniform = [Party::Alice, Party::Bob]
            .iter()
            .all(|&p| strategy.measurements(p).iter().all(|(_, m)| m.len() == outcomes));
        if outcomes == 0 || !uniform {
            return Err(CommError::ShapeMismatch(
                "measurements must share one outcome count".into(),
            ));
        }
        Ok(Self {
            strategy,
            alice,
            bob,
            outcomes,
        })
    }

    pub fn strategy(&self) -> &QuantumStrategy {
        &self.strategy
    }

    pub fn cost(&self) -> CostReport {
        CostReport {
            classical_bits: ceil_log2(self.outcomes),
            qubits: ceil_log2(self.strategy.local_dims().1),
            deterministic_bits: None,
        }
    }

    fn measurement(&self, party: Party, vertex: usize) -> &Measurement {
        let (list, idx) = match party {
            Party::Alice => (self.strategy.measurements(Party::Alice), self.alice[vertex]),
            Party::Bob => (self.strategy.measurements(Party::Bob), self.bob[vertex]),
        };
        &list[idx].1
    }
}

/// Protocol from a perfect strategy for the coloring game of `graph` with as
/// many colors as the strategy has outcomes.
pub fn strategy_to_protocol(graph: &Graph, strategy: &QuantumStrategy, eps: f64) -> Result<OneWayProtocol, CommError> {
    let protocol = OneWayProtocol::new_unchecked(graph, strategy.clone())?;
    let game = make_coloring_game(graph, protocol.outcomes);
    let report = is_perfect(&game, strategy, eps)?;
    if !report.perfect {
        return Err(CommError::NotPerfect {
            loss: report.total_loss,
        });
    }
    Ok(protocol)
}

/// Runs the protocol on every promise pair and every message sent with
/// probability above `eps`, and fails if Bob's answer is wrong with
/// probability above `eps` on any of them.
pub fn simulate_protocol(protocol: &OneWayProtocol, graph: &Graph, eps: f64) -> Result<Simulation, CommError> {
    if protocol.alice.len() != graph.vertex_count() {
        return Err(CommError::ShapeMismatch("protocol was built for another graph".into()));
    }
    let (d_a, d_b) = protocol.strategy.local_dims();
    let psi = protocol.strategy.state();
    let root = unvec(psi, d_a, d_b)?;
    let id_a = ComplexMatrix::identity(d_a);
    let id_b = ComplexMatrix::identity(d_b);

    // Post-measurement states depend only on (s, a).
    let posts: Vec<Vec<Option<(f64, ComplexMatrix)>>> = (0..graph.vertex_count())
        .map(|s| {
            protocol
                .measurement(Party::Alice, s)
                .outcomes()
                .iter()
                .map(|e| -> Result<_, CommError> {
                    let p = bipartite_expectation(e, &id_b, psi)?.re;
                    if p <= eps {
                        return Ok(None);
                    }
                    let collapsed = &psd_sqrt(e, eps)? * &root;
                    Ok(Some((p, vec_map(&collapsed).scale_real(1.0 / p.sqrt()))))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;

    let pairs: Vec<(usize, usize)> = graph.promise_pairs().collect();
    let run = |&(s, t): &(usize, usize)| -> Result<Vec<ProtocolTranscript>, CommError> {
        let f = protocol.measurement(Party::Bob, t);
        let mut out = Vec::new();
        for (a, post) in posts[s].iter().enumerate() {
            let Some((p, phi)) = post else { continue };
            let agree = bipartite_expectation(&id_a, &f.outcomes()[a], phi)?.re;
            let answered_equal = agree > 0.5;
            let deviation = if s == t { 1.0 - agree } else { agree }.max(0.0);
            out.push(ProtocolTranscript {
                s: graph.vertices()[s].clone(),
                t: graph.vertices()[t].clone(),
                message: a,
                probability: *p,
                quantum_dimension: d_b,
                answered_equal,
                correct: answered_equal == (s == t),
                deviation,
            });
        }
        Ok(out)
    };
    let per_pair = crate::par_map(&pairs, run);

    let mut transcripts = Vec::new();
    let mut correct = 0;
    let mut max_deviation: f64 = 0.0;
    for result in per_pair {
        let rows = result?;
        if let Some(bad) = rows.iter().find(|r| r.deviation > eps) {
            return Err(CommError::NondeterministicAnswer {
                s: bad.s.clone(),
                t: bad.t.clone(),
                message: bad.message,
                mass: bad.deviation,
            });
        }
        if rows.iter().all(|r| r.correct) {
            correct += 1;
        }
        max_deviation = rows.iter().map(|r| r.deviation).fold(max_deviation, f64::max);
        transcripts.extend(rows);
    }
    let cost = protocol.cost();
    Ok(Simulation {
        transcripts,
        report: SimulationReport {
            pairs_checked: pairs.len(),
            correct,
            max_deviation,
            classical_bits: cost.classical_bits,
            qubits: cost.qubits,
        },
    })
}

/// Deterministic protocol: Alice sends the color of `s`, Bob compares it with the color of `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringProtocol {
    pub colors: Vec<usize>,
}

impl ColoringProtocol {
    pub fn message(&self, s: usize) -> usize {
        self.colors[s]
    }

    pub fn answer(&self, t: usize, message: usize) -> bool {
        self.colors[t] == message
    }

    pub fn distinct_colors(&self) -> usize {
        let mut seen = self.colors.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }
}

/// Builds the coloring protocol and checks it on every promise pair.
pub fn coloring_protocol(
    graph: &Graph,
    coloring: &[usize],
) -> Result<(ColoringProtocol, SimulationReport, CostReport), CommError> {
    if coloring.len() != graph.vertex_count() {
        return Err(CommError::ColoringSize {
            got: coloring.len(),
            expected: graph.vertex_count(),
        });
    }
    graph
        .is_proper_coloring(coloring)
        .map_err(|(u, v)| CommError::ImproperColoring {
            u: graph.vertices()[u].clone(),
            v: graph.vertices()[v].clone(),
        })?;
    let protocol = ColoringProtocol {
        colors: coloring.to_vec(),
    };
    let mut pairs_checked = 0;
    let mut correct = 0;
    for (s, t) in graph.promise_pairs() {
        pairs_checked += 1;
        if protocol.answer(t, protocol.message(s)) == (s == t) {
            correct += 1;
        }
    }
    let bits = ceil_log2(protocol.distinct_colors());
    let report = SimulationReport {
        pairs_checked,
        correct,
        max_deviation: 0.0,
        classical_bits: bits,
        qubits: 0,
    };
    let cost = CostReport {
        classical_bits: bits,
        qubits: 0,
        deterministic_bits: Some(bits),
    };
    Ok((protocol, report, cost))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChromaticResult {
    pub chromatic_number: usize,
    pub coloring: Vec<usize>,
    pub clique_lower_bound: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChromaticConfig {
    /// Largest vertex count searched.
    pub budget: usize,
    /// Test all candidate color counts concurrently.
    pub parallel: bool,
}

impl Default for ChromaticConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_CHROMATIC_BUDGET,
            parallel: false,
        }
    }
}

fn degree_order(graph: &Graph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..graph.vertex_count()).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(graph.degree(v)));
    order
}

fn greedy_clique(graph: &Graph, order: &[usize]) -> usize {
    let mut best = 0;
    for &start in order {
        let mut clique = vec![start];
        for &v in order {
            if clique.iter().all(|&u| graph.adjacent(u, v)) {
                clique.push(v);
            }
        }
        best = best.max(clique.len());
    }
    best
}

fn greedy_coloring(graph: &Graph, order: &[usize]) -> Vec<usize> {
    let mut colors = vec![usize::MAX; graph.vertex_count()];
    for &v in order {
        let mut c = 0;
        while graph.neighbors(v).iter().any(|&u| colors[u] == c) {
            c += 1;
        }
        colors[v] = c;
    }
    colors
}

/// Backtracking `k`-coloring, picking the uncolored vertex with the most
/// distinct neighbor colors (ties by degree, then index).
fn color_with(graph: &Graph, k: usize) -> Option<Vec<usize>> {
    fn extend(graph: &Graph, k: usize, colors: &mut Vec<usize>, used: usize, remaining: usize) -> bool {
        if remaining == 0 {
            return true;
        }
        let saturation = |v: usize| {
            let mut seen = 0u64;
            for &u in graph.neighbors(v) {
                if colors[u] != usize::MAX {
                    seen |= 1 << colors[u];
                }
            }
            seen
        };
        let v = (0..graph.vertex_count())
            .filter(|&v| colors[v] == usize::MAX)
            .max_by_key(|&v| (saturation(v).count_ones(), graph.degree(v), std::cmp::Reverse(v)))
            .expect("an uncolored vertex remains");
        let blocked = saturation(v);
        // a fresh color is interchangeable with any other fresh color
        for c in 0..k.min(used + 1) {
            if blocked & (1 << c) != 0 {
                continue;
            }
            colors[v] = c;
            if extend(graph, k, colors, used.max(c + 1), remaining - 1) {
                return true;
            }
        }
        colors[v] = usize::MAX;
        false
    }
    let mut colors = vec![usize::MAX; graph.vertex_count()];
    extend(graph, k, &mut colors, 0, graph.vertex_count()).then_some(colors)
}

/// Exact chromatic number with a witness coloring.
pub fn chromatic_number(graph: &Graph, config: &ChromaticConfig) -> Result<ChromaticResult, CommError> {
    let n = graph.vertex_count();
    if n > config.budget || n > 64 {
        return Err(CommError::BudgetExceeded {
            vertices: n,
            budget: config.budget.min(64),
        });
    }
    if n == 0 {
        return Ok(ChromaticResult {
            chromatic_number: 0,
            coloring: Vec::new(),
            clique_lower_bound: 0,
        });
    }
    let order = degree_order(graph);
    let lower = greedy_clique(graph, &order);
    let mut best = greedy_coloring(graph, &order);
    let upper = best.iter().max().map_or(0, |&c| c + 1);
    let candidates: Vec<usize> = (lower..upper).collect();
    let found = if config.parallel {
        crate::par_map(&candidates, |&k| color_with(graph, k))
            .into_iter()
            .find_map(|c| c)
    } else {
        candidates.iter().find_map(|&k| color_with(graph, k))
    };
    if let Some(coloring) = found {
        best = coloring;
    }
    Ok(ChromaticResult {
        chromatic_number: best.iter().max().map_or(0, |&c| c + 1),
        coloring: best,
        clique_lower_bound: lower,
    })
}

/// Unit vectors `v_s = (1/√n) Σ_i (−1)^{s_i} |i⟩`, one per vertex of `H_n`
/// in vertex order; adjacent vertices get orthogonal vectors.
pub fn orthogonal_representation_hadamard(n: usize) -> Result<Vec<ComplexMatrix>, CommError> {
    if n == 0 || !n.is_multiple_of(4) || n > 20 {
        return Err(CommError::BadN(n));
    }
    let norm = 1.0 / (n as f64).sqrt();
    Ok((0..1usize << n)
        .map(|s| {
            let entries = (0..n)
                .map(|i| if (s >> i) & 1 == 1 { -norm } else { norm })
                .map(|x| crate::linalg::C64::new(x, 0.0))
                .collect();
            ComplexMatrix::column(entries)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepresentationResidual {
    /// Largest `|⟨v_s|v_t⟩|` over edges.
    pub orthogonality: f64,
    /// Largest `|‖v_s‖ − 1|`.
    pub normalization: f64,
}

pub fn representation_residual(graph: &Graph, vectors: &[ComplexMatrix]) -> Result<RepresentationResidual, CommError> {
    if vectors.len() != graph.vertex_count() {
        return Err(CommError::ShapeMismatch(format!(
            "{} vectors for {} vertices",
            vectors.len(),
            graph.vertex_count()
        )));
    }
    let orthogonality = graph
        .edges()
        .map(|(u, v)| vectors[u].inner(&vectors[v]).norm())
        .fold(0.0, f64::max);
    let normalization = vectors
        .iter()
        .map(|v| (v.frobenius_norm() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(RepresentationResidual {
        orthogonality,
        normalization,
    })
}

/// Cost arithmetic for splitting equality on `n`-bit inputs into parts answered with local dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostBounds {
    pub n: u64,
    pub d: u64,
    /// `(1 + 2√2)^{2d}`.
    pub per_part_chromatic_bound: f64,
    /// `14^d`.
    pub simplified_bound: f64,
    /// Whether the first quantity exceeds the second.
    pub exceeds_simplified: bool,
    /// `log₂ n + 3d`.
    pub composed_deterministic_bits: f64,
    /// `log₂ n + 2d·log₂(1 + 2√2)`, the composed cost using the unsimplified bound.
    pub composed_bits_unsimplified: f64,
    /// `log₂ n`.
    pub quantum_floor_qubits: f64,
}

pub fn cost_bounds(n: u64, d: u64) -> CostBounds {
    let base = 1.0 + 2.0 * std::f64::consts::SQRT_2;
    let per_part = base.powf(2.0 * d as f64);
    let simplified = 14f64.powf(d as f64);
    let log_n = (n as f64).log2();
    CostBounds {
        n,
        d,
        per_part_chromatic_bound: per_part,
        simplified_bound: simplified,
        exceeds_simplified: per_part > simplified,
        composed_deterministic_bits: log_n + 3.0 * d as f64,
        composed_bits_unsimplified: log_n + 2.0 * d as f64 * base.log2(),
        quantum_floor_qubits: log_n,
    }
}
