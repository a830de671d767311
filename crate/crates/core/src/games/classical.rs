//! Exact classical value by exhaustive search over deterministic strategies.
//!
//! Shared randomness is a convex combination of deterministic strategies, so
//! the maximum over deterministic pairs is the classical value. The search
//! enumerates the party with fewer strategies and lets the other party best
//! respond question by question, which is exact. Before enumerating, answers
//! whose accepting set (over supported pairs) is contained in another
//! answer's are dropped; that never lowers the maximum.

use serde::{Deserialize, Serialize};

use super::{GameError, NonlocalGame, Party};

pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Upper bound on strategy-answer evaluations.
    pub budget: u64,
    /// Worker threads; `1` runs on the calling thread.
    pub jobs: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalValue {
    pub value: f64,
    /// Alice's answer index per question.
    pub alice: Vec<usize>,
    /// Bob's answer index per question.
    pub bob: Vec<usize>,
    pub enumerated: Party,
    pub evaluations: f64,
}

/// Per-question answers that survive the dominance filter, in index order.
fn undominated_answers(game: &NonlocalGame, party: Party) -> Vec<Vec<usize>> {
    let partner = party.other();
    let n_partner_q = game.questions(partner).len();
    let n_partner_a = game.answers(partner).len();
    (0..game.questions(party).len())
        .map(|q| {
            let supported: Vec<usize> = (0..n_partner_q)
                .filter(|&pq| game.prob_oriented(party, q, pq) > 0.0)
                .collect();
            let pattern = |a: usize| -> Vec<bool> {
                supported
                    .iter()
                    .flat_map(|&pq| (0..n_partner_a).map(move |pa| (pq, pa)))
                    .map(|(pq, pa)| game.accepts_oriented(party, q, pq, a, pa))
                    .collect()
            };
            let patterns: Vec<Vec<bool>> = (0..game.answers(party).len()).map(pattern).collect();
            let subset = |x: &[bool], y: &[bool]| x.iter().zip(y).all(|(&u, &v)| !u || v);
            (0..patterns.len())
                .filter(|&a| {
                    !(0..patterns.len()).any(|other| {
                        other != a
                            && subset(&patterns[a], &patterns[other])
                            && (patterns[a] != patterns[other] || other < a)
                    })
                })
                .collect()
        })
        .collect()
}

struct Search<'g> {
    game: &'g NonlocalGame,
    enumerated: Party,
    /// Candidate answers per enumerated question.
    choices: Vec<Vec<usize>>,
    /// Candidate answers per responder question.
    responses: Vec<Vec<usize>>,
    /// Supported enumerated questions with probability, per responder question.
    columns: Vec<Vec<(usize, f64)>>,
}

impl Search<'_> {
    fn decode(&self, mut index: u64) -> Vec<usize> {
        self.choices
            .iter()
            .map(|c| {
                let k = c.len() as u64;
                let pick = c[(index % k) as usize];
                index /= k;
                pick
            })
            .collect()
    }

    /// Value of the best response to `strategy`, and that response.
    fn best_response(&self, strategy: &[usize]) -> (f64, Vec<usize>) {
        let responder = self.enumerated.other();
        let mut total = 0.0;
        let mut reply = Vec::with_capacity(self.responses.len());
        for (r, cands) in self.responses.iter().enumerate() {
            let mut best = (f64::NEG_INFINITY, 0);
            for &b in cands {
                let score: f64 = self.columns[r]
                    .iter()
                    .filter(|&&(e, _)| self.game.accepts_oriented(responder, r, e, b, strategy[e]))
                    .map(|&(_, p)| p)
                    .sum();
                if score > best.0 {
                    best = (score, b);
                }
            }
            total += best.0;
            reply.push(best.1);
        }
        (total, reply)
    }

    fn best_in_range(&self, range: std::ops::Range<u64>) -> Option<(f64, u64)> {
        let mut best: Option<(f64, u64)> = None;
        for idx in range {
            let (v, _) = self.best_response(&self.decode(idx));
            if best.is_none_or(|(bv, _)| v > bv) {
                best = Some((v, idx));
            }
        }
        best
    }
}

fn strategy_count(choices: &[Vec<usize>]) -> f64 {
    choices.iter().map(|c| c.len() as f64).product()
}

pub fn classical_value(game: &NonlocalGame, config: &SearchConfig) -> Result<ClassicalValue, GameError> {
    let alice_choices = undominated_answers(game, Party::Alice);
    let bob_choices = undominated_answers(game, Party::Bob);
    let alice_count = strategy_count(&alice_choices);
    let bob_count = strategy_count(&bob_choices);
    let (enumerated, choices, responses, count) = if alice_count <= bob_count {
        (Party::Alice, alice_choices, bob_choices, alice_count)
    } else {
        (Party::Bob, bob_choices, alice_choices, bob_count)
    };
    let response_width: usize = responses.iter().map(Vec::len).sum();
    let evaluations = count * response_width as f64;
    if evaluations > config.budget as f64 {
        return Err(GameError::BudgetExceeded {
            required: evaluations,
            budget: config.budget,
        });
    }

    let responder = enumerated.other();
    let columns = (0..game.questions(responder).len())
        .map(|r| {
            (0..game.questions(enumerated).len())
                .filter_map(|e| {
                    let p = game.prob_oriented(responder, r, e);
                    (p > 0.0).then_some((e, p))
                })
                .collect()
        })
        .collect();
    let search = Search {
        game,
        enumerated,
        choices,
        responses,
        columns,
    };

    let total = count as u64;
    let (_, best_idx) = run_search(&search, total, config.jobs).expect("at least one strategy");
    let strategy = search.decode(best_idx);
    let (_, reply) = search.best_response(&strategy);
    let (alice, bob) = match enumerated {
        Party::Alice => (strategy, reply),
        Party::Bob => (reply, strategy),
    };
    Ok(ClassicalValue {
        value: game.deterministic_value(&alice, &bob),
        alice,
        bob,
        enumerated,
        evaluations,
    })
}

#[cfg(feature = "parallel")]
fn run_search(search: &Search<'_>, total: u64, jobs: usize) -> Option<(f64, u64)> {
    use rayon::prelude::*;
    if jobs <= 1 || total < 1024 {
        return search.best_in_range(0..total);
    }
    let chunks = (jobs as u64 * 8).min(total);
    let step = total.div_ceil(chunks);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().ok()?;
    pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .filter_map(|c| search.best_in_range(c * step..((c + 1) * step).min(total)))
            .reduce_with(|x, y| {
                // higher value wins, ties go to the lexicographically first strategy
                if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                    y
                } else {
                    x
                }
            })
    })
}

#[cfg(not(feature = "parallel"))]
fn run_search(search: &Search<'_>, total: u64, _jobs: usize) -> Option<(f64, u64)> {
    search.best_in_range(0..total)
}
