//! Strategy fixtures and transformations.

use std::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::{is_perfect, Measurement, QuantumStrategy, StrategyError};
use crate::games::{
    bit_label, magic_square_constraints, tilde_question_label, weak_projection_witness, NonlocalGame, Party,
    WeakProjectionWitness,
};
use crate::linalg::{self, hermitian_eigen, max_entangled_state, ComplexMatrix, C64};

/// Largest `n` accepted by [`fourier_strategy_hadamard`].
pub const MAX_FOURIER_N: usize = 12;

fn projector(v: &ComplexMatrix) -> ComplexMatrix {
    v.outer(v)
}

/// Deterministic strategy as a one-dimensional quantum strategy: outcome
/// `g(s)` gets the `1×1` identity, all others zero.
pub fn embed_deterministic(game: &NonlocalGame, alice: &[usize], bob: &[usize]) -> QuantumStrategy {
    let one = ComplexMatrix::identity(1);
    let zero = ComplexMatrix::zeros(1, 1);
    let build = |questions: &[String], n_answers: usize, choice: &[usize]| -> Vec<(String, Measurement)> {
        questions
            .iter()
            .zip(choice)
            .map(|(q, &c)| {
                let ops = (0..n_answers)
                    .map(|a| if a == c { one.clone() } else { zero.clone() })
                    .collect();
                (q.clone(), Measurement::new(ops))
            })
            .collect()
    };
    QuantumStrategy::new_unchecked(
        1,
        1,
        ComplexMatrix::identity(1),
        build(game.alice_questions(), game.alice_answers().len(), alice),
        build(game.bob_questions(), game.bob_answers().len(), bob),
    )
    .expect("1x1 state")
}

fn real_basis_measurement(theta: f64) -> Measurement {
    let v0 = ComplexMatrix::column(vec![C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0)]);
    let v1 = ComplexMatrix::column(vec![C64::new(-theta.sin(), 0.0), C64::new(theta.cos(), 0.0)]);
    Measurement::new(vec![projector(&v0), projector(&v1)])
}

/// CHSH strategy on one ebit with measurement angles `0, π/4` (Alice) and `±π/8` (Bob).
pub fn chsh_strategy() -> QuantumStrategy {
    chsh_strategy_with_angles([0.0, PI / 4.0], [PI / 8.0, -PI / 8.0])
}

/// One-ebit strategy measuring real bases at the given angles.
pub fn chsh_strategy_with_angles(alice: [f64; 2], bob: [f64; 2]) -> QuantumStrategy {
    let labels = ["0", "1"];
    QuantumStrategy::new_unchecked(
        2,
        2,
        max_entangled_state(2),
        labels
            .iter()
            .zip(alice)
            .map(|(l, th)| (l.to_string(), real_basis_measurement(th)))
            .collect(),
        labels
            .iter()
            .zip(bob)
            .map(|(l, th)| (l.to_string(), real_basis_measurement(th)))
            .collect(),
    )
    .expect("valid shapes")
}

/// Perfect strategy for the `n`-coloring game of `H_n` on `|Ψ_n⟩`.
///
/// Color `a` at vertex `s` is the rank-one projector onto
/// `u_{s,a} = (1/√n) Σ_i (−1)^{s_i} ω^{a·i} |i⟩`, `ω = e^{2πi/n}`; Bob uses
/// the entrywise conjugates.
pub fn fourier_strategy_hadamard(n: usize) -> Result<QuantumStrategy, StrategyError> {
    if n == 0 || !n.is_multiple_of(4) || n > MAX_FOURIER_N {
        return Err(StrategyError::BadN { n, max: MAX_FOURIER_N });
    }
    let norm = 1.0 / (n as f64).sqrt();
    let mut alice = Vec::with_capacity(1 << n);
    let mut bob = Vec::with_capacity(1 << n);
    for s in 0..1usize << n {
        let ops: Vec<ComplexMatrix> = (0..n)
            .map(|a| {
                let u = ComplexMatrix::column(
                    (0..n)
                        .map(|i| {
                            let sign = if (s >> i) & 1 == 1 { -1.0 } else { 1.0 };
                            C64::from_polar(sign * norm, 2.0 * PI * (a * i) as f64 / n as f64)
                        })
                        .collect(),
                );
                projector(&u)
            })
            .collect();
        let conj = ops.iter().map(ComplexMatrix::conjugate).collect();
        let label = bit_label(s, n);
        alice.push((label.clone(), Measurement::new(ops)));
        bob.push((label, Measurement::new(conj)));
    }
    QuantumStrategy::new_unchecked(n, n, max_entangled_state(n), alice, bob)
}

fn pauli(name: char) -> ComplexMatrix {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let entries = match name {
        'I' => vec![one, z, z, one],
        'X' => vec![z, one, one, z],
        'Y' => vec![z, -i, i, z],
        'Z' => vec![one, z, z, -one],
        _ => unreachable!("unknown Pauli {name}"),
    };
    ComplexMatrix::new(2, 2, entries).expect("2x2")
}

/// Two-qubit observable for each cell of the Mermin–Peres square, row-major.
fn magic_square_observables() -> Vec<ComplexMatrix> {
    let p = |a: char, b: char, sign: f64| pauli(a).kron(&pauli(b)).scale_real(sign);
    vec![
        p('X', 'I', 1.0),
        p('I', 'X', 1.0),
        p('X', 'X', 1.0),
        p('I', 'Z', 1.0),
        p('Z', 'I', 1.0),
        p('Z', 'Z', 1.0),
        p('X', 'Z', -1.0),
        p('Z', 'X', -1.0),
        p('Y', 'Y', 1.0),
    ]
}

/// Eigenprojector `(I + (−1)^bit O)/2` of a ±1-valued observable.
fn spectral_projector(observable: &ComplexMatrix, bit: u8) -> ComplexMatrix {
    let sign = if bit == 0 { 1.0 } else { -1.0 };
    let id = ComplexMatrix::identity(observable.rows());
    (&id + &observable.scale_real(sign)).scale_real(0.5)
}

/// Two-ebit strategy for the magic square game built by
/// [`make_bcs_game`](crate::games::make_bcs_game) over
/// [`magic_square_constraints`].
///
/// Bit value 0 corresponds to eigenvalue +1. Alice projects onto the joint
/// eigenspace of the three commuting observables of her row or column;
/// Bob measures the conjugate of his cell's observable.
pub fn magic_square_strategy() -> QuantumStrategy {
    let obs = magic_square_observables();
    let constraints = magic_square_constraints();
    let alice = constraints
        .iter()
        .enumerate()
        .map(|(s, c)| {
            let ops = (0..8usize)
                .map(|m| {
                    c.vars
                        .iter()
                        .enumerate()
                        .fold(ComplexMatrix::identity(4), |acc, (j, &v)| {
                            &acc * &spectral_projector(&obs[v], ((m >> j) & 1) as u8)
                        })
                })
                .collect();
            (format!("c{s}"), Measurement::new(ops))
        })
        .collect();
    let bob = obs
        .iter()
        .enumerate()
        .map(|(t, o)| {
            let ops = (0..2).map(|b| spectral_projector(o, b).conjugate()).collect();
            (format!("x{t}"), Measurement::new(ops))
        })
        .collect();
    QuantumStrategy::new_unchecked(4, 4, max_entangled_state(4), alice, bob).expect("valid shapes")
}

/// Doubles the local dimension: `√p·|ψ⟩ ⊕ √(1−p)·|ψ⟩` with every operator `M ⊕ M`.
pub fn block_direct_sum_strategy(st: &QuantumStrategy, p: f64) -> Result<QuantumStrategy, StrategyError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(StrategyError::InvalidWeight(p));
    }
    let (d_a, d_b) = st.local_dims();
    let mut psi = ComplexMatrix::zeros(4 * d_a * d_b, 1);
    let (wa, wb) = (p.sqrt(), (1.0 - p).sqrt());
    for i in 0..d_a {
        for j in 0..d_b {
            let amp = st.state()[(i * d_b + j, 0)];
            psi[(i * 2 * d_b + j, 0)] = amp * wa;
            psi[((d_a + i) * 2 * d_b + d_b + j, 0)] = amp * wb;
        }
    }
    let double = |list: &[(String, Measurement)]| -> Vec<(String, Measurement)> {
        list.iter()
            .map(|(q, m)| {
                (
                    q.clone(),
                    Measurement::new(m.outcomes().iter().map(|o| o.direct_sum(o)).collect()),
                )
            })
            .collect()
    };
    QuantumStrategy::new_unchecked(
        2 * d_a,
        2 * d_b,
        psi,
        double(st.measurements(Party::Alice)),
        double(st.measurements(Party::Bob)),
    )
}

/// Compresses both local spaces onto the Schmidt support of the state.
///
/// The result is expressed in the Schmidt bases: its state is `Σ λ_i |ii⟩`
/// over the nonzero coefficients and each operator `M` becomes `V†MV`.
pub fn restrict_to_support(st: &QuantumStrategy, eps: f64) -> Result<QuantumStrategy, StrategyError> {
    let schmidt = st.schmidt(eps)?;
    let r = schmidt.rank.max(1);
    let (d_a, d_b) = st.local_dims();
    let va = ComplexMatrix::from_fn(d_a, r, |row, c| schmidt.left_basis[(row, c)]);
    let vb = ComplexMatrix::from_fn(d_b, r, |row, c| schmidt.right_basis[(row, c)]);
    let mut psi = ComplexMatrix::zeros(r * r, 1);
    for i in 0..r {
        psi[(i * r + i, 0)] = C64::new(schmidt.coefficients[i], 0.0);
    }
    let psi = psi.scale_real(1.0 / psi.frobenius_norm());
    let compress = |list: &[(String, Measurement)], v: &ComplexMatrix| -> Vec<(String, Measurement)> {
        let v_adj = v.adjoint();
        list.iter()
            .map(|(q, m)| {
                (
                    q.clone(),
                    Measurement::new(m.outcomes().iter().map(|o| &(&v_adj * o) * v).collect()),
                )
            })
            .collect()
    };
    QuantumStrategy::new_unchecked(
        r,
        r,
        psi,
        compress(st.measurements(Party::Alice), &va),
        compress(st.measurements(Party::Bob), &vb),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubstitutionOptions {
    pub eps: f64,
    /// Compress onto the Schmidt support first instead of rejecting rank-deficient states.
    pub restrict_support: bool,
}

impl Default for SubstitutionOptions {
    fn default() -> Self {
        Self {
            eps: linalg::DEFAULT_EPS,
            restrict_support: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Substitution {
    pub strategy: QuantumStrategy,
    pub witness: WeakProjectionWitness,
    /// Largest `‖M² − M‖_F` over the projective party's operators.
    pub projector_residual: f64,
    /// Total loss of the new strategy.
    pub loss: f64,
}

/// Replaces the shared state of a perfect strategy for a weak-projection game
/// by the maximally entangled state in the same Schmidt basis.
///
/// Preconditions are checked at `eps`; the postconditions (projective
/// operators for the projective party, perfection of the result) at `10·eps`.
pub fn substitute_max_entangled(
    game: &NonlocalGame,
    st: &QuantumStrategy,
    options: SubstitutionOptions,
) -> Result<Substitution, StrategyError> {
    let eps = options.eps;
    st.align(game)?;
    let witness = weak_projection_witness(game, Party::Bob, true)
        .or_else(|| weak_projection_witness(game, Party::Alice, true))
        .ok_or(StrategyError::NotWeaklyProjective)?;
    let before = is_perfect(game, st, eps)?;
    if !before.perfect {
        return Err(StrategyError::NotPerfect {
            loss: before.total_loss,
        });
    }
    let base = if options.restrict_support {
        restrict_to_support(st, eps)?
    } else {
        st.clone()
    };
    let schmidt = base.schmidt(eps)?;
    if !schmidt.full_schmidt_rank() {
        let (d_a, d_b) = base.local_dims();
        return Err(StrategyError::NotFullSchmidtRank {
            rank: schmidt.rank,
            dim: d_a.max(d_b),
        });
    }
    let substituted = base.with_state(schmidt.maximally_entangled())?;

    let tol = 10.0 * eps;
    let projector_residual = substituted
        .measurements(witness.party)
        .iter()
        .map(|(_, m)| m.max_projector_residual())
        .fold(0.0, f64::max);
    if projector_residual > tol {
        return Err(StrategyError::PostconditionFailed(format!(
            "{} operators are projectors only up to {projector_residual:e}",
            witness.party
        )));
    }
    let after = is_perfect(game, &substituted, tol)?;
    if !after.perfect {
        return Err(StrategyError::PostconditionFailed(format!(
            "substituted strategy loses {:e}",
            after.total_loss
        )));
    }
    Ok(Substitution {
        strategy: substituted,
        witness,
        projector_residual,
        loss: after.total_loss,
    })
}

/// Perfect strategy for `tilde_transform(game, party)` from a perfect strategy for `game`.
///
/// For `Party::Bob`, Alice answers `(s,0)` with her original measurement and
/// answers the consistency question `(t,1)` by measuring at the partner
/// question `s(t)` of a weak-projection witness for Bob and reporting
/// `f_{s(t),t}` of her outcome. For coloring and homomorphism games
/// `s(t) = t`; for constraint system games `s(t)` is the lowest-index
/// constraint containing `x_t`. `Party::Alice` is the mirror image.
pub fn lift_strategy_tilde(
    game: &NonlocalGame,
    st: &QuantumStrategy,
    party: Party,
    eps: f64,
) -> Result<QuantumStrategy, StrategyError> {
    let aligned = st.align(game)?;
    let witness = weak_projection_witness(game, party, true).ok_or_else(|| {
        StrategyError::UnsupportedGameShape(format!(
            "no supported question pairs make {party}'s answer a function of the partner's"
        ))
    })?;
    let report = is_perfect(game, st, eps)?;
    if !report.perfect {
        return Err(StrategyError::NotPerfect {
            loss: report.total_loss,
        });
    }

    let asker = party.other();
    let dim = match asker {
        Party::Alice => st.local_dims().0,
        Party::Bob => st.local_dims().1,
    };
    let n_own = game.answers(asker).len();
    let n_checked = game.answers(party).len();
    let zeros = |k: usize| vec![ComplexMatrix::zeros(dim, dim); k];

    let mut lifted = Vec::with_capacity(game.questions(asker).len() + game.questions(party).len());
    for (q, label) in game.questions(asker).iter().enumerate() {
        let mut ops = aligned.measurement(asker, q).outcomes().to_vec();
        ops.extend(zeros(n_checked));
        lifted.push((tilde_question_label(label, false), Measurement::new(ops)));
    }
    for link in &witness.links {
        let grouped = aligned
            .measurement(asker, link.partner_question)
            .grouped(&link.total_map(), n_checked);
        let mut ops = zeros(n_own);
        ops.extend(grouped.outcomes().iter().cloned());
        lifted.push((
            tilde_question_label(&game.questions(party)[link.question], true),
            Measurement::new(ops),
        ));
    }
    let (d_a, d_b) = st.local_dims();
    let untouched = st.measurements(party).to_vec();
    let (alice, bob) = match asker {
        Party::Alice => (lifted, untouched),
        Party::Bob => (untouched, lifted),
    };
    QuantumStrategy::new_unchecked(d_a, d_b, st.state().clone(), alice, bob)
}

/// Strategy for `game` obtained from one for `tilde_transform(game, party)` by
/// dropping the consistency questions. Outcomes outside the original answer
/// set are folded into the first answer so every measurement stays complete.
pub fn restrict_tilde_strategy(
    game: &NonlocalGame,
    tilde_st: &QuantumStrategy,
    party: Party,
) -> Result<QuantumStrategy, StrategyError> {
    let asker = party.other();
    let n_own = game.answers(asker).len();
    let mut restricted = Vec::with_capacity(game.questions(asker).len());
    for label in game.questions(asker) {
        let key = tilde_question_label(label, false);
        let m = tilde_st
            .measurement(asker, &key)
            .ok_or_else(|| StrategyError::ShapeMismatch(format!("tilde strategy has no measurement for {key:?}")))?;
        if m.len() != n_own + game.answers(party).len() {
            return Err(StrategyError::ShapeMismatch(format!(
                "measurement for {key:?} has {} outcomes",
                m.len()
            )));
        }
        let mut ops = m.outcomes()[..n_own].to_vec();
        for extra in &m.outcomes()[n_own..] {
            ops[0] = &ops[0] + extra;
        }
        restricted.push((label.clone(), Measurement::new(ops)));
    }
    let (d_a, d_b) = tilde_st.local_dims();
    let untouched = tilde_st.measurements(party).to_vec();
    let (alice, bob) = match asker {
        Party::Alice => (restricted, untouched),
        Party::Bob => (untouched, restricted),
    };
    QuantumStrategy::new_unchecked(d_a, d_b, tilde_st.state().clone(), alice, bob)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
    let u2 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Random POVM with `k` outcomes on `C^d`: `S^{-1/2} G_i G_i† S^{-1/2}` for Ginibre `G_i`.
fn random_povm(d: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<ComplexMatrix> {
    let raw: Vec<ComplexMatrix> = (0..k)
        .map(|_| {
            let g = ComplexMatrix::from_fn(d, d, |_, _| C64::new(gaussian(rng), gaussian(rng)));
            &g * &g.adjoint()
        })
        .collect();
    let total = raw.iter().fold(ComplexMatrix::zeros(d, d), |acc, m| &acc + m);
    let (values, vectors) = hermitian_eigen(&total);
    let mut inv_sqrt = ComplexMatrix::zeros(d, d);
    for (i, &l) in values.iter().enumerate() {
        let v = vectors.column_at(i);
        inv_sqrt = &inv_sqrt + &v.outer(&v).scale_real(1.0 / l.sqrt());
    }
    raw.iter().map(|m| &(&inv_sqrt * m) * &inv_sqrt).collect()
}

/// Mixes one measurement with a seeded random POVM: `(1 − δ)·M_i + δ·R_i`.
///
/// The result is again a valid POVM for every `δ ∈ [0, 1]`.
pub fn perturb_measurement(
    st: &QuantumStrategy,
    party: Party,
    question: &str,
    magnitude: f64,
    seed: u64,
) -> Result<QuantumStrategy, StrategyError> {
    if !(0.0..=1.0).contains(&magnitude) {
        return Err(StrategyError::InvalidWeight(magnitude));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lists = [
        st.measurements(Party::Alice).to_vec(),
        st.measurements(Party::Bob).to_vec(),
    ];
    let list = &mut lists[if party == Party::Alice { 0 } else { 1 }];
    let slot = list
        .iter_mut()
        .find(|(q, _)| q == question)
        .ok_or_else(|| StrategyError::ShapeMismatch(format!("{party} has no question {question:?}")))?;
    let m = &slot.1;
    let noise = random_povm(m.dim(), m.len(), &mut rng);
    let mixed = m
        .outcomes()
        .iter()
        .zip(&noise)
        .map(|(o, r)| &o.scale_real(1.0 - magnitude) + &r.scale_real(magnitude))
        .collect();
    slot.1 = Measurement::new(mixed);
    let [alice, bob] = lists;
    let (d_a, d_b) = st.local_dims();
    QuantumStrategy::new_unchecked(d_a, d_b, st.state().clone(), alice, bob)
}
