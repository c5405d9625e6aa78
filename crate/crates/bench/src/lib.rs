//! Shared inputs for the criterion benchmarks in `benches/`.

use multient::{random_density, random_pure, DensityMatrix, PartySystem, PureState};

pub fn pure_inputs(dims: &[usize], count: usize, seed: u64) -> Vec<PureState> {
    let system = PartySystem::new(dims.to_vec()).expect("bench dims are valid");
    (0..count as u64).map(|k| random_pure(&system, seed + k)).collect()
}

/// Full-rank density matrices over `dims`.
pub fn density_inputs(dims: &[usize], count: usize, seed: u64) -> Vec<DensityMatrix> {
    let system = PartySystem::new(dims.to_vec()).expect("bench dims are valid");
    let rank = system.total_dim();
    (0..count as u64).map(|k| random_density(&system, rank, seed + k).expect("rank within dimension")).collect()
}
