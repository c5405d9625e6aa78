//! Standard entanglement detectors: negativity, two-qubit concurrence and
//! the three-qubit tangle.

use crate::error::{Error, Result};
use crate::state::{DensityMatrix, PureState};
use crate::tensor::{eigh, partial_transpose, CMatrix, C64};

/// Sum of the moduli of the negative eigenvalues of the partial transpose
/// over `party_a`.
pub fn negativity(rho: &DensityMatrix, party_a: &[usize]) -> Result<f64> {
    let n = rho.system().parties();
    let mut set = party_a.to_vec();
    set.sort_unstable();
    set.dedup();
    if set.is_empty() || set.len() >= n || set.iter().any(|&p| p >= n) {
        return Err(Error::arg(format!("{party_a:?} is not one side of a bipartition of {n} parties")));
    }
    let pt = partial_transpose(rho.matrix(), rho.system().dims(), &set)?;
    let spec = eigh(&pt)?;
    Ok(spec.eigenvalues.iter().filter(|&&l| l < 0.0).map(|l| -l).sum())
}

fn sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    let mut spec = eigh(m)?;
    for l in &mut spec.eigenvalues {
        *l = l.max(0.0).sqrt();
    }
    Ok(spec.reconstruct())
}

/// Two-qubit concurrence `max(0, s1 - s2 - s3 - s4)`, where `s_i` are the
/// descending square roots of the eigenvalues of `√ρ ρ̃ √ρ` and
/// `ρ̃ = (Y⊗Y) ρ* (Y⊗Y)`.
pub fn concurrence2q(rho: &DensityMatrix) -> Result<f64> {
    if rho.system().dims() != [2, 2] {
        return Err(Error::arg(format!("concurrence needs two qubits, got {}", rho.system())));
    }
    rho.ensure_valid()?;
    let m = rho.matrix();
    // Y⊗Y is real and antidiagonal with signs (-1, 1, 1, -1)
    let sign = [1.0, -1.0, -1.0, 1.0];
    let flipped = CMatrix::from_fn(4, 4, |i, j| m[(3 - i, 3 - j)].conj() * sign[i] * sign[j]);
    let root = sqrt_psd(m)?;
    let product = &root * flipped * &root;
    // symmetrize against rounding before the Hermitian solver
    let product = (&product + product.adjoint()).map(|z| z * 0.5);
    let s: Vec<f64> = eigh(&product)?.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    Ok((s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0))
}

/// Three-tangle `4 |Det a|` from the Cayley hyperdeterminant of the
/// amplitude tensor.
pub fn three_tangle(psi: &PureState) -> Result<f64> {
    if psi.system().dims() != [2, 2, 2] {
        return Err(Error::arg(format!("three-tangle needs three qubits, got {}", psi.system())));
    }
    psi.ensure_valid()?;
    let a = |i: usize, j: usize, k: usize| -> C64 { psi.data()[4 * i + 2 * j + k] };
    let d1 = a(0, 0, 0).powi(2) * a(1, 1, 1).powi(2)
        + a(0, 0, 1).powi(2) * a(1, 1, 0).powi(2)
        + a(0, 1, 0).powi(2) * a(1, 0, 1).powi(2)
        + a(1, 0, 0).powi(2) * a(0, 1, 1).powi(2);
    let d2 = a(0, 0, 0) * a(1, 1, 1) * a(0, 1, 1) * a(1, 0, 0)
        + a(0, 0, 0) * a(1, 1, 1) * a(1, 0, 1) * a(0, 1, 0)
        + a(0, 0, 0) * a(1, 1, 1) * a(1, 1, 0) * a(0, 0, 1)
        + a(0, 1, 1) * a(1, 0, 0) * a(1, 0, 1) * a(0, 1, 0)
        + a(0, 1, 1) * a(1, 0, 0) * a(1, 1, 0) * a(0, 0, 1)
        + a(1, 0, 1) * a(0, 1, 0) * a(1, 1, 0) * a(0, 0, 1);
    let d3 = a(0, 0, 0) * a(1, 1, 0) * a(1, 0, 1) * a(0, 1, 1) + a(1, 1, 1) * a(0, 0, 1) * a(0, 1, 0) * a(1, 0, 0);
    Ok((4.0 * (d1 - 2.0 * d2 + 4.0 * d3).norm()).min(1.0))
}
