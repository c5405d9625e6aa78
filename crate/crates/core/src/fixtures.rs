//! Named reference states used by tests, benches and the CLI.

use crate::state::{DensityMatrix, PartySystem, PureState};
use crate::tensor::{C64, ZERO};

fn qubit_superposition(n: usize, basis: &[usize]) -> PureState {
    let mut data = vec![ZERO; 1 << n];
    for &k in basis {
        data[k] = C64::new(1.0, 0.0);
    }
    PureState::normalized(PartySystem::qubits(n), data).expect("non-empty superposition")
}

/// `(|0..0⟩ + |1..1⟩)/√2` on `n` qubits.
pub fn ghz(n: usize) -> PureState {
    qubit_superposition(n, &[0, (1 << n) - 1])
}

/// Uniform superposition of the `n` single-excitation basis states.
pub fn w(n: usize) -> PureState {
    let basis: Vec<usize> = (0..n).map(|k| 1 << k).collect();
    qubit_superposition(n, &basis)
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn bell() -> PureState {
    ghz(2)
}

/// `|0..0⟩` on `n` qubits.
pub fn zeros(n: usize) -> PureState {
    qubit_superposition(n, &[0])
}

/// `(|000⟩ + |011⟩)/√2`: a Bell pair on the last two qubits, first qubit apart.
pub fn pair_bc() -> PureState {
    qubit_superposition(3, &[0b000, 0b011])
}

/// `½(|01⟩⟨01| + |10⟩⟨10|)`, separable yet purifying to an entangled state.
pub fn separable_mixed() -> DensityMatrix {
    let sys = PartySystem::qubits(2);
    let a = PureState::basis(sys.clone(), &[0, 1]).unwrap();
    let b = PureState::basis(sys, &[1, 0]).unwrap();
    DensityMatrix::mixture(&[(0.5, &a), (0.5, &b)]).unwrap()
}

/// `(|001⟩ + |110⟩)/√2`, the pure entangled counterpart of
/// [`separable_mixed`].
pub fn purified_pair() -> PureState {
    qubit_superposition(3, &[0b001, 0b110])
}

/// `½|GHZ⟩⟨GHZ| + ½|W⟩⟨W|` on three qubits.
pub fn ghz_w_mixture() -> DensityMatrix {
    DensityMatrix::mixture(&[(0.5, &ghz(3)), (0.5, &w(3))]).unwrap()
}
