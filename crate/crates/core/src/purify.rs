//! Purification of an n-party mixed state with one ancilla per party.
//!
//! For `ρ = Σ_i λ_i |ψ_i⟩⟨ψ_i|` the output is
//!
//! ```text
//! |Ψ⟩ = Σ_i √λ_i |ψ_i⟩ ⊗ |0⟩_1 ⊗ .. ⊗ |0⟩_{n-1} ⊗ |i⟩_n
//! ```
//!
//! Each ancilla is merged into its party: party `r` of the result has local
//! index `s * a_r + k` for system digit `s` and ancilla digit `k`, with
//! `a_r = 2` for `r < n` and `a_n = max(rank, 2)`.

use crate::error::Result;
use crate::state::{DensityMatrix, PartySystem, PureState};
use crate::tensor::{ComplexTensor, C64, ZERO};

/// A purified state together with its ancilla layout.
#[derive(Clone, Debug)]
pub struct Purification {
    pub state: PureState,
    /// Ancilla dimension attached to each party.
    pub ancilla_dims: Vec<usize>,
    /// Numerical rank of the source density matrix.
    pub source_rank: usize,
    /// Dimensions of the source parties.
    pub source_dims: Vec<usize>,
}

impl Purification {
    /// Partial trace over every ancilla factor, recovering the source state.
    pub fn trace_out_ancillas(&self) -> Result<DensityMatrix> {
        // split each merged party into (system, ancilla) factors
        let mut dims = Vec::with_capacity(2 * self.source_dims.len());
        for (&d, &a) in self.source_dims.iter().zip(&self.ancilla_dims) {
            dims.push(d);
            dims.push(a);
        }
        let split = ComplexTensor::new(dims.clone(), self.state.data().to_vec())?;
        let rho = crate::tensor::projector(split.data());
        let keep: Vec<usize> = (0..self.source_dims.len()).map(|r| 2 * r).collect();
        let (m, _) = crate::tensor::partial_trace(&rho, &dims, &keep)?;
        DensityMatrix::new(PartySystem::new(self.source_dims.clone())?, m)
    }

    /// Zero-pads the last party's ancilla up to `ancilla` dimensions.
    pub fn padded(&self, ancilla: usize) -> Result<Purification> {
        let n = self.source_dims.len();
        let old = self.ancilla_dims[n - 1];
        if ancilla <= old {
            return Ok(self.clone());
        }
        let d = self.source_dims[n - 1];
        let outer = self.state.data().len() / (d * old);
        let mut data = vec![ZERO; outer * d * ancilla];
        for o in 0..outer {
            for s in 0..d {
                for k in 0..old {
                    data[(o * d + s) * ancilla + k] = self.state.data()[(o * d + s) * old + k];
                }
            }
        }
        let mut ancilla_dims = self.ancilla_dims.clone();
        ancilla_dims[n - 1] = ancilla;
        let dims: Vec<usize> = self.source_dims.iter().zip(&ancilla_dims).map(|(d, a)| d * a).collect();
        Ok(Purification {
            state: PureState::new(PartySystem::new(dims)?, data)?,
            ancilla_dims,
            source_rank: self.source_rank,
            source_dims: self.source_dims.clone(),
        })
    }
}

/// Builds the generic purification of `rho`.
pub fn purify(rho: &DensityMatrix) -> Result<Purification> {
    rho.ensure_valid()?;
    let components = rho.spectral_components()?;
    let rank = components.len();
    let source_dims = rho.system().dims().to_vec();
    let n = source_dims.len();
    let mut ancilla_dims = vec![2; n];
    ancilla_dims[n - 1] = rank.max(2);
    let dims: Vec<usize> = source_dims.iter().zip(&ancilla_dims).map(|(d, a)| d * a).collect();

    let mut out = ComplexTensor::zeros(dims.clone())?;
    let mut digits = vec![0usize; n];
    for (i, (lam, psi)) in components.iter().enumerate() {
        let weight = lam.sqrt();
        for (flat, &amp) in psi.data().iter().enumerate() {
            if amp == ZERO {
                continue;
            }
            let mut x = flat;
            for r in (0..n).rev() {
                digits[r] = x % source_dims[r];
                x /= source_dims[r];
            }
            let mut k = 0;
            for r in 0..n {
                let ancilla_digit = if r == n - 1 { i } else { 0 };
                k = k * dims[r] + digits[r] * ancilla_dims[r] + ancilla_digit;
            }
            out.data_mut()[k] += C64::new(weight, 0.0) * amp;
        }
    }
    Ok(Purification {
        state: PureState::new(PartySystem::new(dims)?, out.into_data())?,
        ancilla_dims,
        source_rank: rank,
        source_dims,
    })
}
