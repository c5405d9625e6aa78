//! Multipartite entanglement toolkit.
//!
//! - [`tensor`]: composite-index linear algebra (partial trace, eigh, kron)
//! - [`state`] and [`io`]: pure states, density matrices, JSON state files
//! - [`purify`]: one-ancilla-per-party purification of mixed states
//! - [`gsd`]: generalized Schmidt decomposition by entropy minimization
//! - [`measures`]: the purification measure, the spectral-component measure,
//!   and the negativity / concurrence / 3-tangle detectors
//! - [`classify`]: entanglement-structure enumeration and classification

pub mod classify;
pub mod error;
pub mod fixtures;
pub mod gsd;
pub mod io;
pub mod measures;
pub mod purify;
pub mod state;
pub mod tensor;

pub use error::{Error, Result};
pub use gsd::{apply_local_unitaries, gsd, GsdConfig, SchmidtForm};
pub use purify::{purify, Purification};
pub use state::{random_density, random_pure, DensityMatrix, PartySystem, PureState, State, ValidationReport};
pub use tensor::{ComplexTensor, HermitianSpectrum, C64, CMatrix, DEFAULT_SIZE_CAP};
pub use classify::{classify3q, enumerate_structures, is_fully_entangled, structure_report, EntanglementStructure, StructureReport};
pub use measures::{measure, measure_m1, measure_m2, M2Variant, MeasureConfig, MeasureResult, Method};
