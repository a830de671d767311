//! Two-party one-round nonlocal games `G = (S, T, A, B, V, π)`.

mod classical;
mod generators;
mod graph;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use classical::{classical_value, ClassicalValue, SearchConfig, DEFAULT_BUDGET};
pub use generators::{
    chsh_game, magic_square_constraints, make_bcs_game, make_coloring_game, make_homomorphism_game, ParityConstraint,
};
pub use graph::{bit_label, complete_graph, cycle_graph, hadamard_graph, Graph};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("label set {0} is empty")]
    EmptyLabelSet(&'static str),
    #[error("duplicate label {label:?} in {set}")]
    DuplicateLabel { set: &'static str, label: String },
    #[error("unknown label {0:?}")]
    UnknownLabel(String),
    #[error("table {table} has {got} entries, expected {expected}")]
    TableSize {
        table: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("question distribution has a negative or non-finite entry {0}")]
    NegativeProbability(f64),
    #[error("question distribution sums to {0}, not 1")]
    InvalidDistribution(f64),
    #[error("question distribution has empty support")]
    EmptySupport,
    #[error("exhaustive search needs {required} evaluations, budget is {budget}")]
    BudgetExceeded { required: f64, budget: u64 },
    #[error("Hadamard graphs need an even positive n, got {0}")]
    OddN(usize),
    #[error("constraint system is empty")]
    EmptyConstraintSystem,
    #[error("invalid constraint: {0}")]
    InvalidConstraint(String),
    #[error("variable x{0} occurs in no constraint")]
    UncoveredVariable(usize),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Alice => write!(f, "alice"),
            Party::Bob => write!(f, "bob"),
        }
    }
}

pub(crate) fn check_unique(set: &'static str, labels: &[String]) -> Result<(), GameError> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(GameError::DuplicateLabel { set, label: l.clone() });
        }
    }
    Ok(())
}

/// A nonlocal game with dense `π` and verification tables.
///
/// `π` is indexed `[s][t]`; the verification table `[s][t][a][b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlocalGame {
    alice_questions: Vec<String>,
    bob_questions: Vec<String>,
    alice_answers: Vec<String>,
    bob_answers: Vec<String>,
    pi: Vec<f64>,
    accept: Vec<bool>,
}

impl NonlocalGame {
    pub fn new(
        alice_questions: Vec<String>,
        bob_questions: Vec<String>,
        alice_answers: Vec<String>,
        bob_answers: Vec<String>,
        pi: Vec<f64>,
        accept: Vec<bool>,
    ) -> Result<Self, GameError> {
        for (name, set) in [
            ("S", &alice_questions),
            ("T", &bob_questions),
            ("A", &alice_answers),
            ("B", &bob_answers),
        ] {
            if set.is_empty() {
                return Err(GameError::EmptyLabelSet(name));
            }
            check_unique(name, set)?;
        }
        let pairs = alice_questions.len() * bob_questions.len();
        if pi.len() != pairs {
            return Err(GameError::TableSize {
                table: "pi",
                got: pi.len(),
                expected: pairs,
            });
        }
        let tuples = pairs * alice_answers.len() * bob_answers.len();
        if accept.len() != tuples {
            return Err(GameError::TableSize {
                table: "V",
                got: accept.len(),
                expected: tuples,
            });
        }
        if let Some(&p) = pi.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(GameError::NegativeProbability(p));
        }
        let total: f64 = pi.iter().sum();
        if (total - 1.0).abs() > crate::linalg::DEFAULT_EPS {
            return Err(GameError::InvalidDistribution(total));
        }
        if pi.iter().all(|&p| p == 0.0) {
            return Err(GameError::EmptySupport);
        }
        Ok(Self {
            alice_questions,
            bob_questions,
            alice_answers,
            bob_answers,
            pi,
            accept,
        })
    }

    /// Builds the tables from closures over indices `(s, t)` and `(s, t, a, b)`.
    pub fn from_fn(
        alice_questions: Vec<String>,
        bob_questions: Vec<String>,
        alice_answers: Vec<String>,
        bob_answers: Vec<String>,
        pi: impl Fn(usize, usize) -> f64,
        verify: impl Fn(usize, usize, usize, usize) -> bool,
    ) -> Result<Self, GameError> {
        let (ns, nt, na, nb) = (
            alice_questions.len(),
            bob_questions.len(),
            alice_answers.len(),
            bob_answers.len(),
        );
        let mut pis = Vec::with_capacity(ns * nt);
        let mut accept = Vec::with_capacity(ns * nt * na * nb);
        for s in 0..ns {
            for t in 0..nt {
                pis.push(pi(s, t));
                for a in 0..na {
                    for b in 0..nb {
                        accept.push(verify(s, t, a, b));
                    }
                }
            }
        }
        Self::new(alice_questions, bob_questions, alice_answers, bob_answers, pis, accept)
    }

    pub fn alice_questions(&self) -> &[String] {
        &self.alice_questions
    }

    pub fn bob_questions(&self) -> &[String] {
        &self.bob_questions
    }

    pub fn alice_answers(&self) -> &[String] {
        &self.alice_answers
    }

    pub fn bob_answers(&self) -> &[String] {
        &self.bob_answers
    }

    pub fn questions(&self, party: Party) -> &[String] {
        match party {
            Party::Alice => &self.alice_questions,
            Party::Bob => &self.bob_questions,
        }
    }

    pub fn answers(&self, party: Party) -> &[String] {
        match party {
            Party::Alice => &self.alice_answers,
            Party::Bob => &self.bob_answers,
        }
    }

    pub fn prob(&self, s: usize, t: usize) -> f64 {
        self.pi[s * self.bob_questions.len() + t]
    }

    pub fn accepts(&self, s: usize, t: usize, a: usize, b: usize) -> bool {
        let (nt, na, nb) = (
            self.bob_questions.len(),
            self.alice_answers.len(),
            self.bob_answers.len(),
        );
        self.accept[((s * nt + t) * na + a) * nb + b]
    }

    /// `(s, t, π(s,t))` for every pair with positive probability.
    pub fn support(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let nt = self.bob_questions.len();
        self.pi
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(move |(i, &p)| (i / nt, i % nt, p))
    }

    /// Winning probability of a deterministic strategy pair, `Σ π(s,t)·V(g(s), h(t) | s, t)`.
    pub fn deterministic_value(&self, alice: &[usize], bob: &[usize]) -> f64 {
        self.support()
            .filter(|&(s, t, _)| self.accepts(s, t, alice[s], bob[t]))
            .map(|(_, _, p)| p)
            .sum()
    }

    /// Accepting tuples seen from `party`: returns `V` with the roles swapped for Alice.
    fn accepts_oriented(
        &self,
        party: Party,
        mine: usize,
        theirs: usize,
        my_answer: usize,
        their_answer: usize,
    ) -> bool {
        match party {
            Party::Bob => self.accepts(theirs, mine, their_answer, my_answer),
            Party::Alice => self.accepts(mine, theirs, my_answer, their_answer),
        }
    }

    fn prob_oriented(&self, party: Party, mine: usize, theirs: usize) -> f64 {
        match party {
            Party::Bob => self.prob(theirs, mine),
            Party::Alice => self.prob(mine, theirs),
        }
    }

    /// For fixed `(partner_q, q)`, the map partner answer → unique accepted answer of `party`,
    /// or `None` if some partner answer admits two or more accepted answers.
    fn function_row(&self, party: Party, q: usize, partner_q: usize) -> Option<Vec<Option<usize>>> {
        let partner = party.other();
        let mut map = Vec::with_capacity(self.answers(partner).len());
        for pa in 0..self.answers(partner).len() {
            let mut hit = None;
            for my in 0..self.answers(party).len() {
                if self.accepts_oriented(party, q, partner_q, my, pa) {
                    if hit.is_some() {
                        return None;
                    }
                    hit = Some(my);
                }
            }
            map.push(hit);
        }
        Some(map)
    }
}

/// One `t ↦ (s(t), f_{s(t),t})` entry of a weak-projection witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionLink {
    /// Question index of the projective party.
    pub question: usize,
    /// Question index of the partner chosen for it.
    pub partner_question: usize,
    /// Partner answer → the single accepted answer; `None` marks partner answers
    /// that lose against every answer (their operators vanish in any perfect
    /// strategy on a full-rank state).
    pub map: Vec<Option<usize>>,
}

impl ProjectionLink {
    /// Total version of `map`, sending losing answers to answer 0.
    pub fn total_map(&self) -> Vec<usize> {
        self.map.iter().map(|m| m.unwrap_or(0)).collect()
    }
}

/// Evidence that a game is weakly projective for `party`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakProjectionWitness {
    pub party: Party,
    pub links: Vec<ProjectionLink>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionAnalysis {
    pub bob: Option<WeakProjectionWitness>,
    pub alice: Option<WeakProjectionWitness>,
    /// Every question pair has a functional acceptance relation.
    pub projection_game: bool,
}

impl ProjectionAnalysis {
    pub fn witnesses(&self) -> Vec<&WeakProjectionWitness> {
        self.bob.iter().chain(self.alice.iter()).collect()
    }

    pub fn witness(&self, party: Party) -> Option<&WeakProjectionWitness> {
        match party {
            Party::Alice => self.alice.as_ref(),
            Party::Bob => self.bob.as_ref(),
        }
    }
}

/// Weak-projection witness for `party`, if one exists.
///
/// For each question `q` of `party`, the partner question is the one with the
/// same label when that works, otherwise the lowest index that works. With
/// `strict_support` only pairs of positive probability are considered.
pub fn weak_projection_witness(
    game: &NonlocalGame,
    party: Party,
    strict_support: bool,
) -> Option<WeakProjectionWitness> {
    let partner = party.other();
    let mut links = Vec::with_capacity(game.questions(party).len());
    for q in 0..game.questions(party).len() {
        let label = &game.questions(party)[q];
        let same = game.questions(partner).iter().position(|l| l == label);
        let candidates = same.into_iter().chain(0..game.questions(partner).len());
        let link = candidates
            .filter(|&pq| !strict_support || game.prob_oriented(party, q, pq) > 0.0)
            .find_map(|pq| {
                game.function_row(party, q, pq).map(|map| ProjectionLink {
                    question: q,
                    partner_question: pq,
                    map,
                })
            })?;
        links.push(link);
    }
    Some(WeakProjectionWitness { party, links })
}

pub fn detect_weak_projection(game: &NonlocalGame, strict_support: bool) -> ProjectionAnalysis {
    let projection_game = (0..game.alice_questions.len())
        .all(|s| (0..game.bob_questions.len()).all(|t| game.function_row(Party::Bob, t, s).is_some()));
    ProjectionAnalysis {
        bob: weak_projection_witness(game, Party::Bob, strict_support),
        alice: weak_projection_witness(game, Party::Alice, strict_support),
        projection_game,
    }
}

/// Label of question `q` of `origin` inside a tilde game (`"(q,0)"` / `"(q,1)"`).
pub fn tilde_question_label(q: &str, consistency: bool) -> String {
    format!("({},{})", q, if consistency { 1 } else { 0 })
}

/// Tagged answer label inside a tilde game's merged answer set.
pub fn tilde_answer_label(party: Party, a: &str) -> String {
    match party {
        Party::Alice => format!("A:{a}"),
        Party::Bob => format!("B:{a}"),
    }
}

/// Adds consistency-check questions for `party`'s partner.
///
/// For `Party::Bob` this builds `G̃_B`: Alice is asked either `(s,0)` for an
/// original question or `(t,1)` for one of Bob's questions, answers from the
/// tagged union `A ∪ B`, and on `(t,1)` must reproduce Bob's answer. With
/// probability 1/2 the pair `((s,0), t)` is drawn from `π`, otherwise
/// `((t,1), t)` with `t` from the `T`-marginal of `π`.
pub fn tilde_transform(game: &NonlocalGame, party: Party) -> NonlocalGame {
    match party {
        Party::Bob => tilde_for_bob(game, Party::Alice, Party::Bob),
        Party::Alice => swap_roles(&tilde_for_bob(&swap_roles(game), Party::Bob, Party::Alice)),
    }
}

/// `G̃_B` of `game`, tagging its Alice answers with `first_tag` and its Bob answers with `second_tag`.
fn tilde_for_bob(game: &NonlocalGame, first_tag: Party, second_tag: Party) -> NonlocalGame {
    let (ns, nt, na) = (
        game.alice_questions.len(),
        game.bob_questions.len(),
        game.alice_answers.len(),
    );
    let questions: Vec<String> = game
        .alice_questions
        .iter()
        .map(|s| tilde_question_label(s, false))
        .chain(game.bob_questions.iter().map(|t| tilde_question_label(t, true)))
        .collect();
    let answers: Vec<String> = game
        .alice_answers
        .iter()
        .map(|a| tilde_answer_label(first_tag, a))
        .chain(game.bob_answers.iter().map(|b| tilde_answer_label(second_tag, b)))
        .collect();
    let marginal: Vec<f64> = (0..nt).map(|t| (0..ns).map(|s| game.prob(s, t)).sum()).collect();
    NonlocalGame::from_fn(
        questions,
        game.bob_questions.clone(),
        answers,
        game.bob_answers.clone(),
        |s, t| {
            if s < ns {
                0.5 * game.prob(s, t)
            } else if s - ns == t {
                0.5 * marginal[t]
            } else {
                0.0
            }
        },
        |s, t, a, b| {
            if s < ns {
                a < na && game.accepts(s, t, a, b)
            } else {
                a >= na && a - na == b
            }
        },
    )
    .expect("tilde game of a valid game is valid")
}

/// Exchanges the roles of Alice and Bob.
pub fn swap_roles(game: &NonlocalGame) -> NonlocalGame {
    NonlocalGame::from_fn(
        game.bob_questions.clone(),
        game.alice_questions.clone(),
        game.bob_answers.clone(),
        game.alice_answers.clone(),
        |t, s| game.prob(s, t),
        |t, s, b, a| game.accepts(s, t, a, b),
    )
    .expect("swapped game of a valid game is valid")
}
