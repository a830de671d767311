//! Quantum strategies: a shared state plus one measurement per question.

mod constructions;
mod structure;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::games::{GameError, NonlocalGame, Party};
use crate::linalg::{self, ComplexMatrix, LinalgError, C64};

pub use constructions::{
    block_direct_sum_strategy, chsh_strategy, chsh_strategy_with_angles, embed_deterministic,
    fourier_strategy_hadamard, lift_strategy_tilde, magic_square_strategy, perturb_measurement,
    restrict_tilde_strategy, restrict_to_support, substitute_max_entangled, Substitution, SubstitutionOptions,
    MAX_FOURIER_N,
};
pub use structure::{
    structure_report, verify_corollary1, verify_lemma2, OperatorResidual, SchmidtClass, StructureReport,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StrategyError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("strategy does not match game: {0}")]
    ShapeMismatch(String),
    #[error("invalid measurement for {party} question {question:?}: {reason}")]
    InvalidMeasurement {
        party: Party,
        question: String,
        reason: String,
    },
    #[error("state has Schmidt rank {rank}, full rank needs {dim}")]
    NotFullSchmidtRank { rank: usize, dim: usize },
    #[error("orthogonality hypothesis fails at outcomes ({i}, {j}): expectation {value:e}")]
    HypothesisViolated { i: usize, j: usize, value: f64 },
    #[error("outcome map is not a function into the partner's outcomes: {0}")]
    NotAFunction(String),
    #[error("game is not weakly projective on its supported question pairs")]
    NotWeaklyProjective,
    #[error("strategy is not perfect (loss {loss:e})")]
    NotPerfect { loss: f64 },
    #[error("postcondition failed: {0}")]
    PostconditionFailed(String),
    #[error("block weight must lie strictly between 0 and 1, got {0}")]
    InvalidWeight(f64),
    #[error("n must be a positive multiple of 4 (at most {max}), got {n}")]
    BadN { n: usize, max: usize },
    #[error("unsupported game shape: {0}")]
    UnsupportedGameShape(String),
}

/// POVM: PSD operators on one local space summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    outcomes: Vec<ComplexMatrix>,
}

impl Measurement {
    /// Wraps operators without checking positivity or completeness.
    pub fn new(outcomes: Vec<ComplexMatrix>) -> Self {
        assert!(!outcomes.is_empty(), "measurement needs at least one outcome");
        Self { outcomes }
    }

    pub fn outcomes(&self) -> &[ComplexMatrix] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.outcomes[0].rows()
    }

    pub fn sum(&self) -> ComplexMatrix {
        let d = self.dim();
        self.outcomes.iter().fold(ComplexMatrix::zeros(d, d), |acc, m| &acc + m)
    }

    /// `‖Σ_i M_i − I‖_F`.
    pub fn completeness_residual(&self) -> f64 {
        (&self.sum() - &ComplexMatrix::identity(self.dim())).frobenius_norm()
    }

    pub fn max_projector_residual(&self) -> f64 {
        self.outcomes
            .iter()
            .map(ComplexMatrix::idempotence_residual)
            .fold(0.0, f64::max)
    }

    /// Coarse-grains outcomes: `M'_j = Σ_{i : map(i) = j} M_i`.
    pub fn grouped(&self, map: &[usize], groups: usize) -> Self {
        let d = self.dim();
        let mut out = vec![ComplexMatrix::zeros(d, d); groups];
        for (i, m) in self.outcomes.iter().enumerate() {
            out[map[i]] = &out[map[i]] + m;
        }
        Self { outcomes: out }
    }

    /// Checks shapes, positivity and completeness.
    pub fn validate(&self, dim: usize, eps: f64) -> Result<(), String> {
        for (i, m) in self.outcomes.iter().enumerate() {
            if m.shape() != (dim, dim) {
                return Err(format!("outcome {i} has shape {:?}, expected {dim}x{dim}", m.shape()));
            }
            if !m.is_psd(eps) {
                return Err(format!("outcome {i} is not positive semidefinite"));
            }
        }
        let residual = self.completeness_residual();
        if residual > eps {
            return Err(format!("outcomes sum to identity only up to {residual:e}"));
        }
        Ok(())
    }
}

/// Shared state `ψ ∈ C^dA ⊗ C^dB` with labeled measurements for each party.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumStrategy {
    d_a: usize,
    d_b: usize,
    psi: ComplexMatrix,
    alice: Vec<(String, Measurement)>,
    bob: Vec<(String, Measurement)>,
}

impl QuantumStrategy {
    pub fn new(
        d_a: usize,
        d_b: usize,
        psi: ComplexMatrix,
        alice: Vec<(String, Measurement)>,
        bob: Vec<(String, Measurement)>,
        eps: f64,
    ) -> Result<Self, StrategyError> {
        let st = Self::new_unchecked(d_a, d_b, psi, alice, bob)?;
        st.validate(eps)?;
        Ok(st)
    }

    /// Checks only the shape of `ψ`; measurements are taken as given.
    pub fn new_unchecked(
        d_a: usize,
        d_b: usize,
        psi: ComplexMatrix,
        alice: Vec<(String, Measurement)>,
        bob: Vec<(String, Measurement)>,
    ) -> Result<Self, StrategyError> {
        if psi.shape() != (d_a * d_b, 1) {
            return Err(StrategyError::ShapeMismatch(format!(
                "state has shape {:?}, expected {}x1",
                psi.shape(),
                d_a * d_b
            )));
        }
        Ok(Self {
            d_a,
            d_b,
            psi,
            alice,
            bob,
        })
    }

    pub fn validate(&self, eps: f64) -> Result<(), StrategyError> {
        if !self.psi.is_unit_vector(eps) {
            return Err(LinalgError::NotUnitVector {
                norm: self.psi.frobenius_norm(),
            }
            .into());
        }
        for (party, dim, list) in [(Party::Alice, self.d_a, &self.alice), (Party::Bob, self.d_b, &self.bob)] {
            let labels: Vec<String> = list.iter().map(|(l, _)| l.clone()).collect();
            crate::games::check_unique(if party == Party::Alice { "alice" } else { "bob" }, &labels)?;
            for (q, m) in list {
                m.validate(dim, eps)
                    .map_err(|reason| StrategyError::InvalidMeasurement {
                        party,
                        question: q.clone(),
                        reason,
                    })?;
            }
        }
        Ok(())
    }

    pub fn local_dims(&self) -> (usize, usize) {
        (self.d_a, self.d_b)
    }

    pub fn state(&self) -> &ComplexMatrix {
        &self.psi
    }

    pub fn measurements(&self, party: Party) -> &[(String, Measurement)] {
        match party {
            Party::Alice => &self.alice,
            Party::Bob => &self.bob,
        }
    }

    pub fn measurement(&self, party: Party, label: &str) -> Option<&Measurement> {
        self.measurements(party)
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, m)| m)
    }

    /// Same measurements on a different state of the same shape.
    pub fn with_state(&self, psi: ComplexMatrix) -> Result<Self, StrategyError> {
        Self::new_unchecked(self.d_a, self.d_b, psi, self.alice.clone(), self.bob.clone())
    }

    pub fn schmidt(&self, eps: f64) -> Result<linalg::SchmidtDecomposition, StrategyError> {
        Ok(linalg::schmidt_decompose(&self.psi, self.d_a, self.d_b, eps)?)
    }

    /// Measurements ordered by the game's question lists, after checking labels and outcome counts.
    pub fn align<'a>(&'a self, game: &NonlocalGame) -> Result<AlignedStrategy<'a>, StrategyError> {
        let pick = |party: Party| -> Result<Vec<&'a Measurement>, StrategyError> {
            let list = self.measurements(party);
            let questions = game.questions(party);
            if list.len() != questions.len() {
                return Err(StrategyError::ShapeMismatch(format!(
                    "{party} has {} measurements, game has {} questions",
                    list.len(),
                    questions.len()
                )));
            }
            let by_label: HashMap<&str, &Measurement> = list.iter().map(|(l, m)| (l.as_str(), m)).collect();
            let n_answers = game.answers(party).len();
            questions
                .iter()
                .map(|q| {
                    let m = by_label.get(q.as_str()).ok_or_else(|| {
                        StrategyError::ShapeMismatch(format!("{party} has no measurement for question {q:?}"))
                    })?;
                    if m.len() != n_answers {
                        return Err(StrategyError::ShapeMismatch(format!(
                            "{party} measurement for {q:?} has {} outcomes, game has {n_answers} answers",
                            m.len()
                        )));
                    }
                    Ok(*m)
                })
                .collect()
        };
        Ok(AlignedStrategy {
            strategy: self,
            alice: pick(Party::Alice)?,
            bob: pick(Party::Bob)?,
        })
    }
}

/// A strategy whose measurements are indexed like a particular game's questions.
pub struct AlignedStrategy<'a> {
    pub strategy: &'a QuantumStrategy,
    pub alice: Vec<&'a Measurement>,
    pub bob: Vec<&'a Measurement>,
}

impl AlignedStrategy<'_> {
    pub fn measurement(&self, party: Party, q: usize) -> &Measurement {
        match party {
            Party::Alice => self.alice[q],
            Party::Bob => self.bob[q],
        }
    }
}

/// Joint outcome probabilities `⟨ψ|E^s_a ⊗ F^t_b|ψ⟩`, evaluated as
/// `Σ_ij (D†E^s_a D)_ij (F^t_b)_ij` with the Alice-side products cached.
struct CorrelationTable<'a> {
    aligned: &'a AlignedStrategy<'a>,
    left: Vec<Vec<ComplexMatrix>>,
}

impl<'a> CorrelationTable<'a> {
    fn new(aligned: &'a AlignedStrategy<'a>) -> Result<Self, StrategyError> {
        let st = aligned.strategy;
        let d = linalg::unvec(&st.psi, st.d_a, st.d_b)?;
        let d_adj = d.adjoint();
        let left = aligned
            .alice
            .iter()
            .map(|m| m.outcomes().iter().map(|e| &(&d_adj * e) * &d).collect())
            .collect();
        Ok(Self { aligned, left })
    }

    fn expectation(&self, s: usize, a: usize, t: usize, b: usize) -> C64 {
        self.left[s][a].bilinear_pairing(&self.aligned.bob[t].outcomes()[b])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub alice_question: String,
    pub bob_question: String,
    pub alice_answer: String,
    pub bob_answer: String,
    /// Probability of this losing answer pair given the questions.
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfectionReport {
    pub perfect: bool,
    pub eps: f64,
    pub win_probability: f64,
    /// `Σ π(s,t)·P(a,b|s,t)` over losing tuples.
    pub total_loss: f64,
    pub max_violation: f64,
    pub violations: Vec<Violation>,
}

struct PairOutcome {
    win: f64,
    loss: f64,
    violations: Vec<(usize, usize, f64)>,
}

fn evaluate_pairs(
    game: &NonlocalGame,
    st: &QuantumStrategy,
    eps: f64,
) -> Result<Vec<(usize, usize, f64, PairOutcome)>, StrategyError> {
    let aligned = st.align(game)?;
    let table = CorrelationTable::new(&aligned)?;
    let (na, nb) = (game.alice_answers().len(), game.bob_answers().len());
    let pairs: Vec<(usize, usize, f64)> = game.support().collect();
    let eval = |&(s, t, p): &(usize, usize, f64)| {
        let mut out = PairOutcome {
            win: 0.0,
            loss: 0.0,
            violations: Vec::new(),
        };
        for a in 0..na {
            for b in 0..nb {
                let e = table.expectation(s, a, t, b).re;
                if game.accepts(s, t, a, b) {
                    out.win += e;
                } else {
                    out.loss += e;
                    if e > eps {
                        out.violations.push((a, b, e));
                    }
                }
            }
        }
        (s, t, p, out)
    };
    Ok(crate::par_map(&pairs, eval))
}

/// `Σ_{s,t} π(s,t) Σ_{V(a,b|s,t)=1} ⟨ψ|E^s_a ⊗ F^t_b|ψ⟩`, unclipped.
pub fn winning_probability(game: &NonlocalGame, st: &QuantumStrategy) -> Result<f64, StrategyError> {
    Ok(evaluate_pairs(game, st, f64::INFINITY)?
        .iter()
        .map(|(_, _, p, o)| p * o.win)
        .sum())
}

/// Perfection check: every losing tuple on a supported question pair has probability at most `eps`.
pub fn is_perfect(game: &NonlocalGame, st: &QuantumStrategy, eps: f64) -> Result<PerfectionReport, StrategyError> {
    let results = evaluate_pairs(game, st, eps)?;
    let mut report = PerfectionReport {
        perfect: true,
        eps,
        win_probability: 0.0,
        total_loss: 0.0,
        max_violation: 0.0,
        violations: Vec::new(),
    };
    for (s, t, p, o) in results {
        report.win_probability += p * o.win;
        report.total_loss += p * o.loss;
        for (a, b, mass) in o.violations {
            report.perfect = false;
            report.max_violation = report.max_violation.max(mass);
            report.violations.push(Violation {
                alice_question: game.alice_questions()[s].clone(),
                bob_question: game.bob_questions()[t].clone(),
                alice_answer: game.alice_answers()[a].clone(),
                bob_answer: game.bob_answers()[b].clone(),
                mass,
            });
        }
    }
    Ok(report)
}
