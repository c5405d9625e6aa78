//! Entropy-based entanglement measures.
//!
//! `M1` purifies the input and takes the IU entropy of the canonical GSD
//! coefficients. `M2` decomposes the input into spectral components and
//! averages their GSD entropies; the `joint` variant also adds the Shannon
//! entropy of the spectrum.

mod checks;
mod detectors;

use serde::Serialize;

pub use checks::{
    additivity_suite, check_additivity, check_continuity, continuity_suite, AdditivityCase, AdditivityCheck,
    ContinuityCase, ContinuityCheck, ContinuitySuite, EpsilonSource,
};
pub use detectors::{concurrence2q, negativity, three_tangle};

use crate::error::{Error, Result};
use crate::gsd::{gsd, shannon_bits, GsdConfig, GsdDiagnostics, SchmidtForm};
use crate::purify::{purify, Purification};
use crate::state::DensityMatrix;
use crate::tensor::{checked_volume, C64, DEFAULT_SIZE_CAP};

const NORMALIZATION_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "M1")]
    M1,
    #[serde(rename = "M2-average")]
    M2Average,
    #[serde(rename = "M2-joint")]
    M2Joint,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::M1 => "M1",
            Method::M2Average => "M2-average",
            Method::M2Joint => "M2-joint",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum M2Variant {
    #[default]
    Average,
    Joint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureConfig {
    pub gsd: GsdConfig,
    /// Largest composite dimension any intermediate state may have.
    pub size_cap: usize,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self { gsd: GsdConfig::default(), size_cap: DEFAULT_SIZE_CAP }
    }
}

impl MeasureConfig {
    pub fn with_gsd(gsd: GsdConfig) -> Self {
        Self { gsd, ..Self::default() }
    }
}

/// One GSD run inside a measure: the purification for `M1`, or one
/// spectral component for `M2`.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ComponentReport {
    pub weight: f64,
    pub dims: Vec<usize>,
    pub objective: f64,
    pub term_count: usize,
    pub gsd: GsdDiagnostics,
}

impl ComponentReport {
    fn new(weight: f64, form: &SchmidtForm) -> Self {
        Self {
            weight,
            dims: form.coefficients.dims().to_vec(),
            objective: form.objective,
            term_count: form.term_count(),
            gsd: form.diagnostics.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MeasureResult {
    /// Bits.
    pub value: f64,
    pub method: Method,
    /// Nonzero canonical coefficients, summed over components for `M2`.
    pub schmidt_term_count: usize,
    pub diagnostics: Vec<ComponentReport>,
}

impl MeasureResult {
    /// True when every GSD run converged.
    pub fn converged(&self) -> bool {
        self.diagnostics.iter().all(|c| c.gsd.converged)
    }
}

/// `-Σ |c|² log2 |c|²` of a normalized coefficient list.
pub fn iu_entropy(coeffs: &[C64]) -> Result<f64> {
    let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::invalid(format!("coefficients have squared norm {norm}, expected 1")));
    }
    Ok(shannon_bits(coeffs.iter().map(|c| c.norm_sqr())))
}

fn check_cap(dims: &[usize], cap: usize) -> Result<()> {
    match checked_volume(dims) {
        Some(v) if v <= cap => Ok(()),
        Some(v) => Err(Error::SizeLimit { requested: v, cap }),
        None => Err(Error::SizeLimit { requested: usize::MAX, cap }),
    }
}

/// Purification and canonical form behind an `M1` value.
pub(crate) fn m1_form(rho: &DensityMatrix, config: &MeasureConfig) -> Result<(Purification, SchmidtForm)> {
    rho.ensure_valid()?;
    let rank = rho.eigh()?.numerical_rank();
    let mut dims: Vec<usize> = rho.system().dims().iter().map(|d| 2 * d).collect();
    let last = dims.len() - 1;
    dims[last] = rho.system().dims()[last] * rank.max(2);
    check_cap(&dims, config.size_cap)?;
    let p = purify(rho)?;
    let form = gsd(&p.state, &config.gsd)?;
    Ok((p, form))
}

pub fn measure_m1(rho: &DensityMatrix, config: &MeasureConfig) -> Result<MeasureResult> {
    let (_, form) = m1_form(rho, config)?;
    if !form.diagnostics.converged {
        log::warn!("M1: no GSD restart converged (objective {})", form.objective);
    }
    Ok(MeasureResult {
        value: form.objective.max(0.0),
        method: Method::M1,
        schmidt_term_count: form.term_count(),
        diagnostics: vec![ComponentReport::new(1.0, &form)],
    })
}

pub fn measure_m2(rho: &DensityMatrix, variant: M2Variant, config: &MeasureConfig) -> Result<MeasureResult> {
    rho.ensure_valid()?;
    check_cap(rho.system().dims(), config.size_cap)?;
    let components = rho.spectral_components()?;
    let total: f64 = components.iter().map(|(p, _)| p).sum();
    let mut average = 0.0;
    let mut terms = 0;
    let mut diagnostics = Vec::with_capacity(components.len());
    for (p, psi) in &components {
        let weight = p / total;
        let form = gsd(psi, &config.gsd)?;
        average += weight * form.objective;
        terms += form.term_count();
        diagnostics.push(ComponentReport::new(weight, &form));
    }
    let (value, method) = match variant {
        M2Variant::Average => (average, Method::M2Average),
        M2Variant::Joint => (average + shannon_bits(diagnostics.iter().map(|c| c.weight)), Method::M2Joint),
    };
    Ok(MeasureResult { value: value.max(0.0), method, schmidt_term_count: terms, diagnostics })
}

pub fn measure(rho: &DensityMatrix, method: Method, config: &MeasureConfig) -> Result<MeasureResult> {
    match method {
        Method::M1 => measure_m1(rho, config),
        Method::M2Average => measure_m2(rho, M2Variant::Average, config),
        Method::M2Joint => measure_m2(rho, M2Variant::Joint, config),
    }
}
