//! State data model: party layouts, pure states and density matrices.

use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensor::{self, checked_volume, CMatrix, ComplexTensor, HermitianSpectrum, C64};

/// Tolerance used for in-memory state invariants.
pub const STATE_TOLERANCE: f64 = 1e-10;

/// Looser tolerance applied to states loaded from files.
pub const FILE_TOLERANCE: f64 = 1e-8;

/// Ordered local dimensions, one per party.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PartySystem(Vec<usize>);

impl PartySystem {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::arg("a party system needs at least one party"));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::arg(format!("party dimension {d} is below 2 in {dims:?}")));
        }
        checked_volume(&dims).ok_or_else(|| Error::arg(format!("dims {dims:?} overflow")))?;
        Ok(Self(dims))
    }

    /// `n` qubits.
    pub fn qubits(n: usize) -> Self {
        Self(vec![2; n.max(1)])
    }

    pub fn dims(&self) -> &[usize] {
        &self.0
    }

    pub fn parties(&self) -> usize {
        self.0.len()
    }

    /// Dimension of the composite space.
    pub fn total_dim(&self) -> usize {
        self.0.iter().product()
    }

    /// Concatenation of both party lists.
    pub fn concat(&self, other: &PartySystem) -> PartySystem {
        let mut dims = self.0.clone();
        dims.extend_from_slice(&other.0);
        PartySystem(dims)
    }

    pub fn is_qubits(&self) -> bool {
        self.0.iter().all(|&d| d == 2)
    }
}

impl fmt::Display for PartySystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// A pure state over a [`PartySystem`].
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    system: PartySystem,
    amplitudes: ComplexTensor,
}

/// A density matrix over a [`PartySystem`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    system: PartySystem,
    matrix: CMatrix,
}

/// Either kind of state, as stored in state files.
#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Pure(PureState),
    Density(DensityMatrix),
}

/// One violated invariant and how far off it is.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Violation {
    pub invariant: &'static str,
    pub residual: f64,
}

/// Result of [`PureState::validate`] / [`DensityMatrix::validate`]; empty
/// means valid.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, invariant: &'static str, residual: f64) {
        self.violations.push(Violation { invariant, residual });
    }

    pub(crate) fn into_result(self, what: &str) -> Result<()> {
        if self.is_valid() {
            return Ok(());
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{} (residual {:e})", v.invariant, v.residual))
            .collect();
        Err(Error::invalid(format!("{what}: {}", parts.join("; "))))
    }
}

impl PureState {
    /// Builds a state from amplitudes; only the shape is checked here, use
    /// [`PureState::validate`] for the normalization invariant.
    pub fn new(system: PartySystem, data: Vec<C64>) -> Result<Self> {
        let amplitudes = ComplexTensor::new(system.dims().to_vec(), data)?;
        Ok(Self { system, amplitudes })
    }

    /// Builds a state from unnormalized amplitudes.
    pub fn normalized(system: PartySystem, mut data: Vec<C64>) -> Result<Self> {
        let norm = data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::arg("cannot normalize a zero or non-finite vector"));
        }
        data.iter_mut().for_each(|c| *c /= norm);
        Self::new(system, data)
    }

    /// Computational basis state `|digits⟩`.
    pub fn basis(system: PartySystem, digits: &[usize]) -> Result<Self> {
        if digits.len() != system.parties() || digits.iter().zip(system.dims()).any(|(&i, &d)| i >= d) {
            return Err(Error::arg(format!("basis digits {digits:?} do not fit {system}")));
        }
        let mut t = ComplexTensor::zeros(system.dims().to_vec())?;
        let k = t.flat_index(digits);
        t.data_mut()[k] = tensor::ONE;
        Ok(Self { system, amplitudes: t })
    }

    pub fn system(&self) -> &PartySystem {
        &self.system
    }

    pub fn amplitudes(&self) -> &ComplexTensor {
        &self.amplitudes
    }

    pub fn data(&self) -> &[C64] {
        self.amplitudes.data()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_sqr()
    }

    pub fn validate(&self) -> ValidationReport {
        self.validate_with(STATE_TOLERANCE)
    }

    pub fn validate_with(&self, tol: f64) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.data().iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            report.push("finite amplitudes", f64::INFINITY);
            return report;
        }
        let residual = (self.norm_sqr() - 1.0).abs();
        if residual > tol {
            report.push("normalization", residual);
        }
        report
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        self.validate().into_result("invalid pure state")
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.system != other.system {
            return Err(Error::arg(format!("inner product between {} and {}", self.system, other.system)));
        }
        Ok(self.data().iter().zip(other.data()).map(|(a, b)| a.conj() * b).sum())
    }

    /// Tensor product with the parties of `other` appended.
    pub fn tensor(&self, other: &PureState, cap: usize) -> Result<PureState> {
        let amplitudes = self.amplitudes.kron_capped(&other.amplitudes, cap)?;
        Ok(PureState { system: self.system.concat(&other.system), amplitudes })
    }

    /// Reorders parties: party `r` of the result is party `order[r]` of `self`.
    pub fn permute_parties(&self, order: &[usize]) -> Result<PureState> {
        let n = self.system.parties();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::arg(format!("{order:?} is not a permutation of {n} parties")));
        }
        let old = self.system.dims();
        let new_dims: Vec<usize> = order.iter().map(|&p| old[p]).collect();
        let mut out = vec![tensor::ZERO; self.data().len()];
        let mut digits = vec![0usize; n];
        for (flat, &amp) in self.data().iter().enumerate() {
            let mut x = flat;
            for r in (0..n).rev() {
                digits[r] = x % old[r];
                x /= old[r];
            }
            let k = order.iter().zip(&new_dims).fold(0, |acc, (&p, &d)| acc * d + digits[p]);
            out[k] = amp;
        }
        PureState::new(PartySystem::new(new_dims)?, out)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { system: self.system.clone(), matrix: tensor::projector(self.data()) }
    }
}

impl DensityMatrix {
    /// Builds a density matrix; only the shape is checked here.
    pub fn new(system: PartySystem, matrix: CMatrix) -> Result<Self> {
        let side = system.total_dim();
        if matrix.nrows() != side || matrix.ncols() != side {
            return Err(Error::arg(format!(
                "{system} needs a {side}x{side} matrix, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { system, matrix })
    }

    /// Matrix from row-major entries.
    pub fn from_row_major(system: PartySystem, data: &[C64]) -> Result<Self> {
        let side = system.total_dim();
        if data.len() != side * side {
            return Err(Error::arg(format!("{system} needs {} entries, got {}", side * side, data.len())));
        }
        Self::new(system, DMatrix::from_row_slice(side, side, data))
    }

    /// Convex mixture `Σ w_i |ψ_i⟩⟨ψ_i|`.
    pub fn mixture(components: &[(f64, &PureState)]) -> Result<Self> {
        let first = components.first().ok_or_else(|| Error::arg("empty mixture"))?;
        let system = first.1.system().clone();
        let side = system.total_dim();
        let mut m = CMatrix::zeros(side, side);
        for (w, psi) in components {
            if psi.system() != &system {
                return Err(Error::arg("mixture components live on different systems"));
            }
            m += tensor::projector(psi.data()).scale(*w);
        }
        Self::new(system, m)
    }

    /// The maximally mixed state `I / N`.
    pub fn maximally_mixed(system: PartySystem) -> Self {
        let n = system.total_dim();
        let matrix = CMatrix::identity(n, n).scale(1.0 / n as f64);
        Self { system, matrix }
    }

    pub fn system(&self) -> &PartySystem {
        &self.system
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn side(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Row-major entries.
    pub fn row_major(&self) -> Vec<C64> {
        let n = self.side();
        (0..n * n).map(|k| self.matrix[(k / n, k % n)]).collect()
    }

    pub fn validate(&self) -> ValidationReport {
        self.validate_with(STATE_TOLERANCE)
    }

    pub fn validate_with(&self, tol: f64) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.matrix.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            report.push("finite entries", f64::INFINITY);
            return report;
        }
        let herm = tensor::hermiticity_residual(&self.matrix);
        if herm > tol {
            report.push("hermiticity", herm);
        }
        let tr = self.trace();
        let trace_residual = (tr - tensor::ONE).norm();
        if trace_residual > tol {
            report.push("unit trace", trace_residual);
        }
        // spectrum of the Hermitian part, so PSD is reported even when
        // the Hermiticity check already failed
        let sym = (&self.matrix + self.matrix.adjoint()).scale(0.5);
        if let Ok(spec) = tensor::eigh(&sym) {
            let min = spec.eigenvalues.last().copied().unwrap_or(0.0);
            if min < -tol {
                report.push("positive semidefinite", -min);
            }
        }
        report
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        self.validate().into_result("invalid density matrix")
    }

    /// Spectrum with eigenvalues already within 1e-10 of 0 or 1 clamped
    /// onto that boundary.
    pub fn eigh(&self) -> Result<HermitianSpectrum> {
        let mut spec = tensor::eigh(&self.matrix)?;
        for lam in &mut spec.eigenvalues {
            if *lam < 0.0 && *lam > -STATE_TOLERANCE {
                *lam = 0.0;
            } else if *lam > 1.0 && *lam < 1.0 + STATE_TOLERANCE {
                *lam = 1.0;
            }
        }
        Ok(spec)
    }

    /// Eigenpairs with eigenvalue at or above the rank tolerance, as
    /// `(weight, component)`.
    pub fn spectral_components(&self) -> Result<Vec<(f64, PureState)>> {
        let spec = self.eigh()?;
        let mut out = Vec::new();
        for (j, &lam) in spec.eigenvalues.iter().enumerate() {
            if lam < tensor::RANK_TOLERANCE {
                continue;
            }
            let v: Vec<C64> = spec.eigenvectors.column(j).iter().copied().collect();
            out.push((lam, PureState::new(self.system.clone(), v)?));
        }
        Ok(out)
    }

    /// Reduced state on `keep` (ascending party order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let (m, dims) = tensor::partial_trace(&self.matrix, self.system.dims(), keep)?;
        Ok(DensityMatrix { system: PartySystem::new(dims)?, matrix: m })
    }

    /// `ρ ⊗ σ` with the parties of `other` appended.
    pub fn tensor(&self, other: &DensityMatrix, cap: usize) -> Result<DensityMatrix> {
        let matrix = tensor::matrix_kron(&self.matrix, &other.matrix, cap)?;
        Ok(DensityMatrix { system: self.system.concat(&other.system), matrix })
    }

    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.system != other.system {
            return Err(Error::arg(format!("trace distance between {} and {}", self.system, other.system)));
        }
        tensor::trace_distance(&self.matrix, &other.matrix)
    }

    /// `(1 - t) self + t other`.
    pub fn mix_with(&self, other: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        if self.system != other.system {
            return Err(Error::arg("mixing states on different systems"));
        }
        let matrix = self.matrix.scale(1.0 - t) + other.matrix.scale(t);
        Ok(DensityMatrix { system: self.system.clone(), matrix })
    }
}

impl State {
    pub fn system(&self) -> &PartySystem {
        match self {
            State::Pure(p) => p.system(),
            State::Density(d) => d.system(),
        }
    }

    pub fn validate(&self) -> ValidationReport {
        match self {
            State::Pure(p) => p.validate(),
            State::Density(d) => d.validate(),
        }
    }

    /// Density matrix view; pure states become rank-one projectors.
    pub fn to_density(&self) -> DensityMatrix {
        match self {
            State::Pure(p) => p.to_density(),
            State::Density(d) => d.clone(),
        }
    }
}

/// Deterministic generator used for all seeded sampling.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Haar-random unitary via phase-corrected QR of a Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| gaussian_complex(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        if n > 0.0 {
            let phase = rjj / n;
            q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
        }
    }
    q
}

/// Haar-distributed pure state, deterministic in `seed`.
pub fn random_pure(system: &PartySystem, seed: u64) -> PureState {
    let mut rng = seeded_rng(seed, 0);
    let data = (0..system.total_dim()).map(|_| gaussian_complex(&mut rng)).collect();
    PureState::normalized(system.clone(), data).expect("Gaussian vector is almost surely nonzero")
}

/// Random density matrix of the given rank, `G G† / tr(G G†)` with `G` a
/// `N x rank` complex Gaussian matrix.
pub fn random_density(system: &PartySystem, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let n = system.total_dim();
    if rank == 0 || rank > n {
        return Err(Error::arg(format!("rank {rank} outside 1..={n} for {system}")));
    }
    let mut rng = seeded_rng(seed, 1);
    let g = CMatrix::from_fn(n, rank, |_, _| gaussian_complex(&mut rng));
    let mut m = &g * g.adjoint();
    let tr = m.trace().re;
    m.unscale_mut(tr);
    // exact Hermiticity for downstream checks
    let m = (&m + m.adjoint()).scale(0.5);
    DensityMatrix::new(system.clone(), m)
}
