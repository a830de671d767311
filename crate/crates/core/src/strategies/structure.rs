//! Structural checks on perfectly correlated measurements.
//!
//! When two measurements on a full-Schmidt-rank state never produce
//! mismatched outcomes, both are projective and commute with the reduced
//! state root `D`. Consequently every operator is block diagonal across the
//! classes of equal Schmidt coefficients. The functions here measure how far
//! a concrete pair of measurements is from that structure.

use serde::{Deserialize, Serialize};

use super::{is_perfect, Measurement, QuantumStrategy, StrategyError};
use crate::games::{weak_projection_witness, NonlocalGame, Party};
use crate::linalg::{self, commutator_norm, ComplexMatrix, SchmidtDecomposition};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorResidual {
    pub party: Party,
    pub question: String,
    pub outcome: String,
    /// `‖M² − M‖_F`.
    pub projector_residual: f64,
    /// `‖[D, M]‖_F` with `D` the reduced-state root on this party's space.
    pub commutator_residual: f64,
    /// Frobenius norm of the part of `M` coupling different Schmidt classes.
    pub off_block_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtClass {
    pub coefficient: f64,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    pub schmidt_coefficients: Vec<f64>,
    pub classes: Vec<SchmidtClass>,
    pub operators: Vec<OperatorResidual>,
    /// Winning probability, present when the report was taken against a game.
    pub win_probability: Option<f64>,
    pub perfect: Option<bool>,
}

impl StructureReport {
    fn max_of(&self, f: impl Fn(&OperatorResidual) -> f64) -> f64 {
        self.operators.iter().map(f).fold(0.0, f64::max)
    }

    pub fn max_projector_residual(&self) -> f64 {
        self.max_of(|o| o.projector_residual)
    }

    pub fn max_commutator_residual(&self) -> f64 {
        self.max_of(|o| o.commutator_residual)
    }

    pub fn max_off_block_mass(&self) -> f64 {
        self.max_of(|o| o.off_block_mass)
    }

    /// Whether every residual is at most `tol`.
    pub fn within(&self, tol: f64) -> bool {
        self.max_projector_residual() <= tol
            && self.max_commutator_residual() <= tol
            && self.max_off_block_mass() <= tol
    }

    pub fn summary(&self) -> String {
        let classes: Vec<String> = self
            .classes
            .iter()
            .map(|c| format!("{:.6}x{}", c.coefficient, c.indices.len()))
            .collect();
        let mut s = format!(
            "Schmidt classes [{}]; {} operators; max projector residual {:.3e}; max commutator residual {:.3e}; max off-block mass {:.3e}",
            classes.join(", "),
            self.operators.len(),
            self.max_projector_residual(),
            self.max_commutator_residual(),
            self.max_off_block_mass()
        );
        if let (Some(p), Some(perfect)) = (self.win_probability, self.perfect) {
            s.push_str(&format!(
                "; win probability {p:.12} ({})",
                if perfect { "perfect" } else { "not perfect" }
            ));
        }
        s
    }
}

/// Reduced root, class projectors and class summary for one side of a Schmidt decomposition.
struct SideGeometry {
    root: ComplexMatrix,
    projectors: Vec<ComplexMatrix>,
}

impl SideGeometry {
    fn new(schmidt: &SchmidtDecomposition, classes: &[Vec<usize>], party: Party) -> Self {
        let (root, basis) = match party {
            Party::Alice => (schmidt.reduced_root_a(), &schmidt.left_basis),
            Party::Bob => (schmidt.reduced_root_b(), &schmidt.right_basis),
        };
        let dim = basis.rows();
        let projectors = classes
            .iter()
            .map(|class| {
                class.iter().fold(ComplexMatrix::zeros(dim, dim), |acc, &i| {
                    let v = basis.column_at(i);
                    &acc + &v.outer(&v)
                })
            })
            .collect();
        Self { root, projectors }
    }

    fn off_block_mass(&self, m: &ComplexMatrix) -> f64 {
        let diag = self
            .projectors
            .iter()
            .fold(ComplexMatrix::zeros(m.rows(), m.cols()), |acc, p| {
                &acc + &(&(p * m) * p)
            });
        (m - &diag).frobenius_norm()
    }

    fn residual(
        &self,
        party: Party,
        question: &str,
        outcome: String,
        m: &ComplexMatrix,
    ) -> Result<OperatorResidual, StrategyError> {
        Ok(OperatorResidual {
            party,
            question: question.to_string(),
            outcome,
            projector_residual: m.idempotence_residual(),
            commutator_residual: commutator_norm(&self.root, m)?,
            off_block_mass: self.off_block_mass(m),
        })
    }
}

fn full_rank_schmidt(psi: &ComplexMatrix, d: usize, eps: f64) -> Result<SchmidtDecomposition, StrategyError> {
    let schmidt = linalg::schmidt_decompose(psi, d, d, eps)?;
    if !schmidt.full_schmidt_rank() {
        return Err(StrategyError::NotFullSchmidtRank {
            rank: schmidt.rank,
            dim: d,
        });
    }
    Ok(schmidt)
}

fn classes_of(schmidt: &SchmidtDecomposition, eps: f64) -> (Vec<Vec<usize>>, Vec<SchmidtClass>) {
    let raw = schmidt.coefficient_classes(eps);
    let summary = raw
        .iter()
        .map(|c| SchmidtClass {
            coefficient: schmidt.coefficients[c[0]],
            indices: c.clone(),
        })
        .collect();
    (raw, summary)
}

fn check_pair_dims(e: &Measurement, f: &Measurement, psi: &ComplexMatrix) -> Result<usize, StrategyError> {
    let d = e.dim();
    if f.dim() != d || psi.shape() != (d * d, 1) {
        return Err(StrategyError::ShapeMismatch(format!(
            "measurements act on dimensions {} and {}, state has {} entries",
            d,
            f.dim(),
            psi.rows()
        )));
    }
    Ok(d)
}

fn pair_report(
    e: &Measurement,
    f: &Measurement,
    schmidt: &SchmidtDecomposition,
    eps: f64,
) -> Result<StructureReport, StrategyError> {
    let (raw, classes) = classes_of(schmidt, eps);
    let alice = SideGeometry::new(schmidt, &raw, Party::Alice);
    let bob = SideGeometry::new(schmidt, &raw, Party::Bob);
    let mut operators = Vec::with_capacity(e.len() + f.len());
    for (i, m) in e.outcomes().iter().enumerate() {
        operators.push(alice.residual(Party::Alice, "", i.to_string(), m)?);
    }
    for (j, m) in f.outcomes().iter().enumerate() {
        operators.push(bob.residual(Party::Bob, "", j.to_string(), m)?);
    }
    Ok(StructureReport {
        schmidt_coefficients: schmidt.coefficients.clone(),
        classes,
        operators,
        win_probability: None,
        perfect: None,
    })
}

/// Checks the orthogonality hypothesis `⟨ψ|E_i ⊗ F_j|ψ⟩ = 0` for `i ≠ j` and
/// reports projectivity and commutation residuals of both measurements.
///
/// The residuals are measured, not asserted; callers compare them against
/// their own tolerance.
pub fn verify_lemma2(
    e: &Measurement,
    f: &Measurement,
    psi: &ComplexMatrix,
    eps: f64,
) -> Result<StructureReport, StrategyError> {
    let d = check_pair_dims(e, f, psi)?;
    if e.len() != f.len() {
        return Err(StrategyError::ShapeMismatch(format!(
            "measurements have {} and {} outcomes",
            e.len(),
            f.len()
        )));
    }
    let schmidt = full_rank_schmidt(psi, d, eps)?;
    for (i, ei) in e.outcomes().iter().enumerate() {
        for (j, fj) in f.outcomes().iter().enumerate() {
            if i == j {
                continue;
            }
            let value = linalg::bipartite_expectation(ei, fj, psi)?.norm();
            if value > eps {
                return Err(StrategyError::HypothesisViolated { i, j, value });
            }
        }
    }
    pair_report(e, f, &schmidt, eps)
}

/// Same as [`verify_lemma2`] for measurements with different outcome counts
/// related by `f: [n] → [m]`: checks `⟨ψ|E_i ⊗ F_j|ψ⟩ = 0` for `j ≠ f(i)`,
/// then reports on the grouped operators `E'_j = Σ_{f(i)=j} E_i` and `F_j`.
pub fn verify_corollary1(
    e: &Measurement,
    f: &Measurement,
    map: &[usize],
    psi: &ComplexMatrix,
    eps: f64,
) -> Result<StructureReport, StrategyError> {
    let d = check_pair_dims(e, f, psi)?;
    if map.len() != e.len() {
        return Err(StrategyError::NotAFunction(format!(
            "map has {} entries for {} outcomes",
            map.len(),
            e.len()
        )));
    }
    if let Some((i, &j)) = map.iter().enumerate().find(|(_, &j)| j >= f.len()) {
        return Err(StrategyError::NotAFunction(format!(
            "outcome {i} maps to {j}, partner has {} outcomes",
            f.len()
        )));
    }
    let schmidt = full_rank_schmidt(psi, d, eps)?;
    for (i, ei) in e.outcomes().iter().enumerate() {
        for (j, fj) in f.outcomes().iter().enumerate() {
            if j == map[i] {
                continue;
            }
            let value = linalg::bipartite_expectation(ei, fj, psi)?.norm();
            if value > eps {
                return Err(StrategyError::HypothesisViolated { i, j, value });
            }
        }
    }
    pair_report(&e.grouped(map, f.len()), f, &schmidt, eps)
}

/// Block structure of a strategy for a weak-projection game.
///
/// The projective party's operators are reported as they are; the partner's
/// operators are grouped through the witness map of each linked question.
/// Perfection is reported rather than required, so perturbed strategies can
/// be inspected.
pub fn structure_report(game: &NonlocalGame, st: &QuantumStrategy, eps: f64) -> Result<StructureReport, StrategyError> {
    let aligned = st.align(game)?;
    let witness = weak_projection_witness(game, Party::Bob, true)
        .or_else(|| weak_projection_witness(game, Party::Alice, true))
        .ok_or(StrategyError::NotWeaklyProjective)?;
    let (d_a, d_b) = st.local_dims();
    if d_a != d_b {
        return Err(StrategyError::NotFullSchmidtRank {
            rank: d_a.min(d_b),
            dim: d_a.max(d_b),
        });
    }
    let schmidt = full_rank_schmidt(st.state(), d_a, eps)?;
    let (raw, classes) = classes_of(&schmidt, eps);

    let projective = witness.party;
    let partner = projective.other();
    let own = SideGeometry::new(&schmidt, &raw, projective);
    let other = SideGeometry::new(&schmidt, &raw, partner);
    let mut operators = Vec::new();
    for (q, label) in game.questions(projective).iter().enumerate() {
        for (b, m) in aligned.measurement(projective, q).outcomes().iter().enumerate() {
            operators.push(own.residual(projective, label, game.answers(projective)[b].clone(), m)?);
        }
    }
    for link in &witness.links {
        let pq = link.partner_question;
        let grouped = aligned
            .measurement(partner, pq)
            .grouped(&link.total_map(), game.answers(projective).len());
        let label = format!(
            "{}|{}",
            game.questions(partner)[pq],
            game.questions(projective)[link.question]
        );
        for (j, m) in grouped.outcomes().iter().enumerate() {
            operators.push(other.residual(partner, &label, game.answers(projective)[j].clone(), m)?);
        }
    }
    let perfection = is_perfect(game, st, eps)?;
    Ok(StructureReport {
        schmidt_coefficients: schmidt.coefficients.clone(),
        classes,
        operators,
        win_probability: Some(perfection.win_probability),
        perfect: Some(perfection.perfect),
    })
}
