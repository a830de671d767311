//! Standard game families.

use serde::{Deserialize, Serialize};

use super::{GameError, Graph, NonlocalGame};

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// CHSH: uniform bits, win iff `a ⊕ b = s ∧ t`.
pub fn chsh_game() -> NonlocalGame {
    NonlocalGame::from_fn(
        labels(2),
        labels(2),
        labels(2),
        labels(2),
        |_, _| 0.25,
        |s, t, a, b| (a ^ b) == (s & t),
    )
    .expect("valid CHSH game")
}

/// Homomorphism game `X → Y`.
///
/// Both players get vertices of `X`, answer with vertices of `Y`; the pair
/// `(s, t)` is uniform over `s = t` or `s ~ t`. Equal questions need equal
/// answers and adjacent questions need adjacent answers.
pub fn make_homomorphism_game(from: &Graph, to: &Graph) -> NonlocalGame {
    let pairs = (from.vertex_count() + 2 * from.edge_count()) as f64;
    NonlocalGame::from_fn(
        from.vertices().to_vec(),
        from.vertices().to_vec(),
        to.vertices().to_vec(),
        to.vertices().to_vec(),
        |s, t| {
            if s == t || from.adjacent(s, t) {
                1.0 / pairs
            } else {
                0.0
            }
        },
        |s, t, a, b| (s != t || a == b) && (!from.adjacent(s, t) || to.adjacent(a, b)),
    )
    .expect("valid homomorphism game")
}

/// The `c`-coloring game of `graph`; the homomorphism game into `K_c` with answers `0..c`.
pub fn make_coloring_game(graph: &Graph, colors: usize) -> NonlocalGame {
    assert!(colors >= 1, "need at least one color");
    let pairs = (graph.vertex_count() + 2 * graph.edge_count()) as f64;
    NonlocalGame::from_fn(
        graph.vertices().to_vec(),
        graph.vertices().to_vec(),
        labels(colors),
        labels(colors),
        |s, t| {
            if s == t || graph.adjacent(s, t) {
                1.0 / pairs
            } else {
                0.0
            }
        },
        |s, t, a, b| (s != t || a == b) && (!graph.adjacent(s, t) || a != b),
    )
    .expect("valid coloring game")
}

/// `Σ_{v ∈ vars} x_v ≡ parity (mod 2)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityConstraint {
    pub vars: Vec<usize>,
    pub parity: u8,
}

impl ParityConstraint {
    pub fn new(vars: Vec<usize>, parity: u8) -> Self {
        Self { vars, parity }
    }

    pub fn is_satisfied_by(&self, bits: &[u8]) -> bool {
        bits.iter().map(|&b| b as u32).sum::<u32>() % 2 == self.parity as u32 % 2
    }
}

/// Mermin–Peres square over `x0..x8` (row-major): rows sum to 0, columns to 1.
pub fn magic_square_constraints() -> Vec<ParityConstraint> {
    let rows = (0..3).map(|r| ParityConstraint::new(vec![3 * r, 3 * r + 1, 3 * r + 2], 0));
    let cols = (0..3).map(|c| ParityConstraint::new(vec![c, c + 3, c + 6], 1));
    rows.chain(cols).collect()
}

fn bits_of(label: &str) -> Vec<u8> {
    label.bytes().map(|b| b - b'0').collect()
}

/// Binary constraint system game.
///
/// Alice gets a constraint `c_s` and answers a bit string assigning its
/// variables in listed order; Bob gets a variable and answers one bit. The
/// answer set is every bit string whose length is some constraint's arity;
/// strings of the wrong length for the asked constraint always lose. The
/// pair is uniform over `(c_s, x_t)` with `x_t` occurring in `c_s`.
pub fn make_bcs_game(constraints: &[ParityConstraint]) -> Result<NonlocalGame, GameError> {
    if constraints.is_empty() {
        return Err(GameError::EmptyConstraintSystem);
    }
    for (i, c) in constraints.iter().enumerate() {
        if c.vars.is_empty() || c.vars.len() > 16 {
            return Err(GameError::InvalidConstraint(format!(
                "constraint {i} has arity {}",
                c.vars.len()
            )));
        }
        let mut sorted = c.vars.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(GameError::InvalidConstraint(format!(
                "constraint {i} repeats a variable"
            )));
        }
        if c.parity > 1 {
            return Err(GameError::InvalidConstraint(format!(
                "constraint {i} has parity {}",
                c.parity
            )));
        }
    }
    let num_vars = constraints
        .iter()
        .flat_map(|c| c.vars.iter())
        .max()
        .map_or(0, |&m| m + 1);
    if let Some(v) = (0..num_vars).find(|v| !constraints.iter().any(|c| c.vars.contains(v))) {
        return Err(GameError::UncoveredVariable(v));
    }

    let mut arities: Vec<usize> = constraints.iter().map(|c| c.vars.len()).collect();
    arities.sort_unstable();
    arities.dedup();
    let answers: Vec<String> = arities
        .iter()
        .flat_map(|&k| {
            (0..1usize << k).map(move |m| (0..k).map(|j| if (m >> j) & 1 == 1 { '1' } else { '0' }).collect())
        })
        .collect();
    let answer_bits: Vec<Vec<u8>> = answers.iter().map(|a| bits_of(a)).collect();
    let pairs: usize = constraints.iter().map(|c| c.vars.len()).sum();

    NonlocalGame::from_fn(
        (0..constraints.len()).map(|i| format!("c{i}")).collect(),
        (0..num_vars).map(|v| format!("x{v}")).collect(),
        answers,
        labels(2),
        |s, t| {
            if constraints[s].vars.contains(&t) {
                1.0 / pairs as f64
            } else {
                0.0
            }
        },
        |s, t, a, b| {
            let c = &constraints[s];
            let bits = &answer_bits[a];
            if bits.len() != c.vars.len() || !c.is_satisfied_by(bits) {
                return false;
            }
            match c.vars.iter().position(|&v| v == t) {
                Some(j) => bits[j] as usize == b,
                None => true,
            }
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{classical_value, complete_graph, cycle_graph, SearchConfig};

    #[test]
    fn homomorphism_to_complete_graph_is_coloring() {
        let x = cycle_graph(5);
        let hom = make_homomorphism_game(&x, &complete_graph(3));
        let col = make_coloring_game(&x, 3);
        assert_eq!(hom, col);
    }

    #[test]
    fn homomorphism_values() {
        let k2 = complete_graph(2);
        let g = make_homomorphism_game(&k2, &k2);
        assert_eq!(classical_value(&g, &SearchConfig::default()).unwrap().value, 1.0);
        let c5 = make_homomorphism_game(&cycle_graph(5), &k2);
        assert!(classical_value(&c5, &SearchConfig::default()).unwrap().value < 1.0);
    }

    #[test]
    fn bcs_small_systems() {
        let single = make_bcs_game(&[ParityConstraint::new(vec![0], 0)]).unwrap();
        assert_eq!(classical_value(&single, &SearchConfig::default()).unwrap().value, 1.0);

        let inconsistent =
            make_bcs_game(&[ParityConstraint::new(vec![0], 0), ParityConstraint::new(vec![0], 1)]).unwrap();
        assert!(classical_value(&inconsistent, &SearchConfig::default()).unwrap().value < 1.0);
    }

    #[test]
    fn bcs_errors() {
        assert_eq!(make_bcs_game(&[]), Err(GameError::EmptyConstraintSystem));
        assert_eq!(
            make_bcs_game(&[ParityConstraint::new(vec![0, 2], 0)]),
            Err(GameError::UncoveredVariable(1))
        );
        assert!(matches!(
            make_bcs_game(&[ParityConstraint::new(vec![0, 0], 0)]),
            Err(GameError::InvalidConstraint(_))
        ));
    }

    #[test]
    fn magic_square_shape() {
        let g = make_bcs_game(&magic_square_constraints()).unwrap();
        assert_eq!(g.alice_questions().len(), 6);
        assert_eq!(g.bob_questions().len(), 9);
        assert_eq!(g.alice_answers().len(), 8);
        assert_eq!(g.support().count(), 18);
        for (_, _, p) in g.support() {
            assert!((p - 1.0 / 18.0).abs() < 1e-15);
        }
    }
}
