//! Small channels used by tests, examples and the CLI defaults.

use super::RandomParameterChannel;
use crate::qcore::CMatrix;
use crate::quantum::{KrausChannel, PureState};

pub fn pauli_x() -> CMatrix {
    CMatrix::from_real(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_real(&[&[1.0, 0.0], &[0.0, -1.0]])
}

/// Identity with probability `1 − p_flip`, conjugation by Z otherwise.
pub fn dephasing_flip(p_flip: f64) -> RandomParameterChannel {
    RandomParameterChannel::unlabelled(
        "dephasing",
        vec![1.0 - p_flip, p_flip],
        vec![KrausChannel::identity(2), KrausChannel::unitary(pauli_z()).expect("unitary")],
    )
    .expect("valid channel")
}

/// Qubit memory cell stuck at `|0⟩` or `|1⟩` (each with prob. `α/2`) or
/// transparent (prob. `1 − α`).
pub fn stuck_at(alpha: f64) -> RandomParameterChannel {
    let zero = PureState::basis(2, 0).density();
    let one = PureState::basis(2, 1).density();
    RandomParameterChannel::unlabelled(
        "stuck-at",
        vec![alpha / 2.0, alpha / 2.0, 1.0 - alpha],
        vec![
            KrausChannel::replacer(2, &zero).expect("valid replacer"),
            KrausChannel::replacer(2, &one).expect("valid replacer"),
            KrausChannel::identity(2),
        ],
    )
    .expect("valid channel")
}

/// The same channel for every parameter value.
pub fn state_independent(ch: KrausChannel, probs: Vec<f64>) -> RandomParameterChannel {
    let branches = vec![ch; probs.len()];
    RandomParameterChannel::unlabelled("state-independent", probs, branches).expect("valid channel")
}

pub fn identity_qubit() -> RandomParameterChannel {
    state_independent(KrausChannel::identity(2), vec![1.0])
}

pub fn depolarizing_qubit() -> RandomParameterChannel {
    state_independent(KrausChannel::completely_depolarizing(2), vec![1.0])
}
