//! Analysis of two-party one-round nonlocal games.
//!
//! * [`linalg`]: dense complex matrices, Schmidt decomposition and the
//!   bipartite expectation identity `⟨ψ|A⊗B|ψ⟩ = tr(D†ADBᵀ)`.
//! * [`games`]: the game model, exact classical values, weak-projection
//!   detection, consistency-check transforms and standard game families.
//! * [`strategies`]: quantum strategies, perfection checks, structure reports
//!   and the substitution of a maximally entangled state.
//! * [`commsim`]: exact one-way protocols for promise equality built from
//!   coloring-game strategies, chromatic numbers and cost arithmetic.
//! * [`format`]: the JSON interchange formats.

pub mod commsim;
pub mod format;
pub mod games;
pub mod linalg;
pub mod strategies;

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    items.iter().map(f).collect()
}
