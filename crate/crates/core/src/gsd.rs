//! Generalized Schmidt decomposition by entropy minimization over local
//! unitaries.
//!
//! The canonical form of a pure state `|ψ⟩` is the point of its
//! local-unitary orbit `(U_1 ⊗ .. ⊗ U_n)|ψ⟩` whose coefficient tensor `C`
//! has the smallest Shannon entropy of `|C|²` (in bits). For two parties
//! this is exactly the Schmidt form.
//!
//! The search alternates over parties. For party `r` it takes the
//! Riemannian gradient `Ω_r` of the smoothed entropy on `U(d_r)` and
//! backtracks along the geodesic `exp(-tΩ_r) U_r`. Restart 0 starts from
//! the eigenbases of the single-party marginals; the others start from
//! Haar-random unitaries drawn from per-restart streams of the seed.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::{haar_unitary, seeded_rng, PartySystem, PureState};
use crate::tensor::{self, apply_axis_into, CMatrix, ComplexTensor, C64, ZERO};

/// Smoothing added inside the logarithm of the optimized objective.
pub const LOG_SMOOTHING: f64 = 1e-12;

/// Coefficients below this modulus are zeroed after convergence.
pub const COEFFICIENT_CUTOFF: f64 = 1e-9;

/// Objectives closer than this are considered tied between restarts.
const TIE_TOLERANCE: f64 = 1e-14;
const MODULUS_TIE: f64 = 1e-12;

/// Convergence also requires every party gradient norm below this.
const GRADIENT_TOLERANCE: f64 = 1e-7;

const ARMIJO: f64 = 1e-4;
const ROUNDING_FLOOR: f64 = 8.0 * f64::EPSILON;
const MAX_BACKTRACKS: usize = 60;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GsdConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for GsdConfig {
    fn default() -> Self {
        Self { restarts: 16, max_iterations: 2000, tolerance: 1e-10, seed: 0 }
    }
}

impl GsdConfig {
    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn check(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::arg("gsd needs at least one restart"));
        }
        if self.max_iterations == 0 {
            return Err(Error::arg("gsd needs max_iterations >= 1"));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::arg("gsd tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RestartSummary {
    pub restart: usize,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct GsdDiagnostics {
    pub restarts: usize,
    pub best_restart: usize,
    /// Sweeps used by the winning restart.
    pub iterations: usize,
    /// False only when no restart converged.
    pub converged: bool,
    /// Smoothed objective after each sweep of the winning restart.
    pub history: Vec<f64>,
    pub per_restart: Vec<RestartSummary>,
}

/// Canonical coefficients, the local unitaries reaching them, and the
/// optimizer record.
#[derive(Clone, Debug)]
pub struct SchmidtForm {
    pub coefficients: ComplexTensor,
    pub local_unitaries: Vec<CMatrix>,
    /// IU entropy of `|C|²` in bits.
    pub objective: f64,
    pub diagnostics: GsdDiagnostics,
}

impl SchmidtForm {
    /// Number of nonzero coefficients.
    pub fn term_count(&self) -> usize {
        self.coefficients.data().iter().filter(|c| **c != ZERO).count()
    }

    /// Coefficient moduli sorted descending, zeros dropped.
    pub fn sorted_moduli(&self) -> Vec<f64> {
        let mut m: Vec<f64> = self.coefficients.data().iter().map(|c| c.norm()).filter(|&x| x > 0.0).collect();
        m.sort_by(|a, b| b.total_cmp(a));
        m
    }

    /// The decomposed state `(⊗U_r)|ψ⟩` after coefficient cleanup.
    pub fn decomposed_state(&self) -> PureState {
        let system = PartySystem::new(self.coefficients.dims().to_vec()).expect("coefficients carry a valid system");
        PureState::new(system, self.coefficients.data().to_vec()).expect("shape matches")
    }
}

/// Applies `U_1 ⊗ .. ⊗ U_n` to `psi`.
pub fn apply_local_unitaries(psi: &PureState, unitaries: &[CMatrix]) -> Result<PureState> {
    let dims = psi.system().dims();
    if unitaries.len() != dims.len() {
        return Err(Error::arg(format!("{} unitaries for {} parties", unitaries.len(), dims.len())));
    }
    let mut t = psi.amplitudes().clone();
    for (r, u) in unitaries.iter().enumerate() {
        t = t.apply_on_axis(r, u)?;
    }
    PureState::new(psi.system().clone(), t.into_data())
}

/// Exact IU entropy of a probability vector in bits, `0 log 0 = 0`.
pub(crate) fn shannon_bits(probs: impl IntoIterator<Item = f64>) -> f64 {
    let h: f64 = probs.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.log2()).sum();
    h.max(0.0)
}

fn smoothed_objective(c: &[C64]) -> f64 {
    c.iter()
        .map(|z| {
            let p = z.norm_sqr();
            -p * (p + LOG_SMOOTHING).log2()
        })
        .sum()
}

/// `d/dp [-p log2(p + ε)]`.
fn smoothed_derivative(p: f64) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    -(p + LOG_SMOOTHING).log2() - p / ((p + LOG_SMOOTHING) * ln2)
}

/// Riemannian gradient of the smoothed objective with respect to the
/// left action `exp(A) U_r` on party `r`, as a skew-Hermitian matrix `Ω`.
/// The directional derivative along skew-Hermitian `A` is `2 Re tr(Ω† A)`.
pub(crate) fn party_gradient(c: &[C64], dims: &[usize], r: usize) -> CMatrix {
    let d = dims[r];
    let inner: usize = dims[r + 1..].iter().product();
    let outer: usize = dims[..r].iter().product();
    let block = d * inner;
    let mut z = CMatrix::zeros(d, d);
    for o in 0..outer {
        let chunk = &c[o * block..(o + 1) * block];
        for k in 0..d {
            let row_k = &chunk[k * inner..(k + 1) * inner];
            for l in 0..d {
                let row_l = &chunk[l * inner..(l + 1) * inner];
                let mut acc = ZERO;
                for (a, b) in row_k.iter().zip(row_l) {
                    acc += *a * smoothed_derivative(a.norm_sqr()) * b.conj();
                }
                z[(k, l)] += acc;
            }
        }
    }
    (&z - z.adjoint()).scale(0.5)
}

fn marginal(c: &[C64], dims: &[usize], r: usize) -> CMatrix {
    let d = dims[r];
    let inner: usize = dims[r + 1..].iter().product();
    let outer: usize = dims[..r].iter().product();
    let block = d * inner;
    let mut m = CMatrix::zeros(d, d);
    for o in 0..outer {
        let chunk = &c[o * block..(o + 1) * block];
        for k in 0..d {
            for l in 0..d {
                let acc: C64 = chunk[k * inner..(k + 1) * inner]
                    .iter()
                    .zip(&chunk[l * inner..(l + 1) * inner])
                    .map(|(a, b)| a * b.conj())
                    .sum();
                m[(k, l)] += acc;
            }
        }
    }
    m
}

/// Marginal eigenbases: `U_r = V_r†` where `V_r` diagonalizes `ρ_r`.
fn marginal_bases(psi: &PureState) -> Result<Vec<CMatrix>> {
    let dims = psi.system().dims();
    (0..dims.len())
        .map(|r| Ok(tensor::eigh(&marginal(psi.data(), dims, r))?.eigenvectors.adjoint()))
        .collect()
}

struct Outcome {
    unitaries: Vec<CMatrix>,
    history: Vec<f64>,
    iterations: usize,
    converged: bool,
}

/// Alternating geodesic descent from `unitaries`.
fn descend(psi: &PureState, mut unitaries: Vec<CMatrix>, config: &GsdConfig) -> Result<Outcome> {
    let dims = psi.system().dims().to_vec();
    let n = dims.len();
    let mut c = apply_local_unitaries(psi, &unitaries)?.data().to_vec();
    let mut trial = vec![ZERO; c.len()];
    let mut f = smoothed_objective(&c);
    let mut steps = vec![f64::NAN; n];
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..config.max_iterations {
        iterations += 1;
        let f_start = f;
        let mut worst_gradient = 0.0f64;
        let mut accepted_any = false;
        for r in 0..n {
            let omega = party_gradient(&c, &dims, r);
            let gnorm2 = omega.norm_squared();
            worst_gradient = worst_gradient.max(gnorm2.sqrt());
            if gnorm2 == 0.0 {
                continue;
            }
            // Ω = -iH with H Hermitian; exp(-tΩ) = exp(itH)
            let h = omega.map(|z| C64::new(-z.im, z.re));
            let spec = tensor::eigh(&h)?;
            let mut accepted = false;
            let mut t = if steps[r].is_nan() { 0.5 / gnorm2.sqrt().max(1e-3) } else { steps[r] };
            for _ in 0..MAX_BACKTRACKS {
                let e = tensor::unitary_from_spectrum(&spec, t);
                apply_axis_into(&c, &dims, r, &e, &mut trial);
                let f_new = smoothed_objective(&trial);
                // decreases below the rounding floor of f are noise, and the
                // log term amplifies the perturbation they leave behind
                let decrease = f - f_new;
                if decrease >= ARMIJO * t * 2.0 * gnorm2 && decrease > ROUNDING_FLOOR * f.abs().max(1.0) {
                    std::mem::swap(&mut c, &mut trial);
                    unitaries[r] = &e * &unitaries[r];
                    f = f_new;
                    steps[r] = (2.0 * t).min(1e6);
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if accepted {
                accepted_any = true;
            } else {
                steps[r] = f64::NAN;
            }
        }
        history.push(f);
        let decrease = f_start - f;
        if decrease <= config.tolerance && worst_gradient <= GRADIENT_TOLERANCE {
            converged = true;
            break;
        }
        if !accepted_any {
            // line search exhausted at the rounding floor
            converged = worst_gradient <= GRADIENT_TOLERANCE.sqrt();
            break;
        }
    }
    Ok(Outcome { unitaries, history, iterations, converged })
}

struct Candidate {
    form: SchmidtForm,
    summary: RestartSummary,
    history: Vec<f64>,
}

/// Nearest unitary (polar factor), removing drift accumulated by repeated
/// geodesic updates.
fn reunitarize(u: &CMatrix) -> CMatrix {
    let svd = u.clone().svd(true, true);
    match (svd.u, svd.v_t) {
        (Some(w), Some(v_t)) => w * v_t,
        _ => u.clone(),
    }
}

fn finish(psi: &PureState, mut outcome: Outcome, restart: usize) -> Result<Candidate> {
    outcome.unitaries = outcome.unitaries.iter().map(reunitarize).collect();
    let mut coefficients = apply_local_unitaries(psi, &outcome.unitaries)?.amplitudes().clone();
    for z in coefficients.data_mut() {
        if z.norm() < COEFFICIENT_CUTOFF {
            *z = ZERO;
        }
    }
    let norm = coefficients.norm_sqr().sqrt();
    if norm > 0.0 {
        coefficients.data_mut().iter_mut().for_each(|z| *z /= norm);
    }
    let objective = shannon_bits(coefficients.data().iter().map(|z| z.norm_sqr()));
    let summary = RestartSummary {
        restart,
        objective,
        iterations: outcome.iterations,
        converged: outcome.converged,
    };
    let diagnostics = GsdDiagnostics {
        restarts: 1,
        best_restart: restart,
        iterations: outcome.iterations,
        converged: outcome.converged,
        history: outcome.history.clone(),
        per_restart: vec![summary.clone()],
    };
    Ok(Candidate {
        form: SchmidtForm { coefficients, local_unitaries: outcome.unitaries, objective, diagnostics },
        summary,
        history: outcome.history,
    })
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    let (fa, fb) = (a.form.objective, b.form.objective);
    if (fa - fb).abs() > TIE_TOLERANCE {
        return fa < fb;
    }
    // lexicographically larger sorted moduli wins, then fewer terms
    let (ma, mb) = (a.form.sorted_moduli(), b.form.sorted_moduli());
    for (x, y) in ma.iter().zip(&mb) {
        if (x - y).abs() > MODULUS_TIE {
            return x > y;
        }
    }
    ma.len() < mb.len()
}

fn initial_unitaries(psi: &PureState, config: &GsdConfig, restart: usize) -> Result<Vec<CMatrix>> {
    if restart == 0 {
        return marginal_bases(psi);
    }
    let mut rng = seeded_rng(config.seed, 1000 + restart as u64);
    Ok(psi.system().dims().iter().map(|&d| haar_unitary(d, &mut rng)).collect())
}

fn select(candidates: Vec<Candidate>) -> SchmidtForm {
    let per_restart: Vec<RestartSummary> = candidates.iter().map(|c| c.summary.clone()).collect();
    let any_converged = per_restart.iter().any(|s| s.converged);
    let total = candidates.len();
    let mut best: Option<Candidate> = None;
    for cand in candidates {
        best = match best {
            Some(b) if !better(&cand, &b) => Some(b),
            _ => Some(cand),
        };
    }
    let best = best.expect("at least one restart");
    let mut form = best.form;
    form.diagnostics = GsdDiagnostics {
        restarts: total,
        best_restart: best.summary.restart,
        iterations: best.summary.iterations,
        converged: any_converged,
        history: best.history,
        per_restart,
    };
    form
}

/// Generalized Schmidt decomposition of `psi`.
pub fn gsd(psi: &PureState, config: &GsdConfig) -> Result<SchmidtForm> {
    config.check()?;
    psi.ensure_valid()?;
    let candidates: Result<Vec<Candidate>> = (0..config.restarts)
        .into_par_iter()
        .map(|restart| {
            let init = initial_unitaries(psi, config, restart)?;
            finish(psi, descend(psi, init, config)?, restart)
        })
        .collect();
    Ok(select(candidates?))
}

/// Single descent from the given unitaries, without restarts.
pub fn refine(psi: &PureState, initial: Vec<CMatrix>, config: &GsdConfig) -> Result<SchmidtForm> {
    config.check()?;
    psi.ensure_valid()?;
    let dims = psi.system().dims();
    if initial.len() != dims.len() || initial.iter().zip(dims).any(|(u, &d)| u.nrows() != d || u.ncols() != d) {
        return Err(Error::arg("initial unitaries do not match the party dimensions"));
    }
    Ok(select(vec![finish(psi, descend(psi, initial, config)?, 0)?]))
}
