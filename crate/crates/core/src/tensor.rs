//! Dense complex linear algebra over multipartite index structures.
//!
//! Every composite index in this crate is row-major with party 0 as the
//! most significant digit: for dims `[d0, d1, .., dn-1]` the flat index of
//! `(i0, .., in-1)` is `((i0 * d1 + i1) * d2 + i2) ...`. Density matrices use
//! the same convention on both their row and column index.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Default upper bound on the number of complex entries a tensor may hold.
pub const DEFAULT_SIZE_CAP: usize = 1 << 20;

/// Eigenvalues below this are treated as exact zeros when counting rank.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Tolerance for the Hermiticity check performed before diagonalization.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// A dense complex tensor over a list of factor dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexTensor {
    dims: Vec<usize>,
    data: Vec<C64>,
}

/// Product of dimensions, or `None` on overflow.
pub fn checked_volume(dims: &[usize]) -> Option<usize> {
    dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d))
}

fn check_cap(requested: Option<usize>, cap: usize) -> Result<usize> {
    match requested {
        Some(n) if n <= cap => Ok(n),
        Some(n) => Err(Error::SizeLimit { requested: n, cap }),
        None => Err(Error::SizeLimit { requested: usize::MAX, cap }),
    }
}

impl ComplexTensor {
    pub fn new(dims: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::arg("tensor needs at least one factor"));
        }
        if dims.contains(&0) {
            return Err(Error::arg(format!("tensor dims must be positive, got {dims:?}")));
        }
        let volume = checked_volume(&dims)
            .ok_or_else(|| Error::arg(format!("tensor dims {dims:?} overflow")))?;
        if volume != data.len() {
            return Err(Error::arg(format!(
                "tensor dims {dims:?} need {volume} entries, got {}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let volume = checked_volume(&dims).unwrap_or(0);
        Self::new(dims, vec![ZERO; volume])
    }

    /// The rank-one, single-factor tensor `[c]`.
    pub fn scalar(c: C64) -> Self {
        Self { dims: vec![1], data: vec![c] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Flat position of a multi-index.
    pub fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims.len());
        index
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    /// Tensor product `self ⊗ other` using [`DEFAULT_SIZE_CAP`].
    pub fn kron(&self, other: &ComplexTensor) -> Result<ComplexTensor> {
        self.kron_capped(other, DEFAULT_SIZE_CAP)
    }

    pub fn kron_capped(&self, other: &ComplexTensor, cap: usize) -> Result<ComplexTensor> {
        check_cap(self.len().checked_mul(other.len()), cap)?;
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let data = self
            .data
            .iter()
            .flat_map(|&a| other.data.iter().map(move |&b| a * b))
            .collect();
        Ok(ComplexTensor { dims, data })
    }

    /// Applies the square matrix `m` to factor `axis`:
    /// `out[.., k, ..] = sum_l m[k, l] * self[.., l, ..]`.
    pub fn apply_on_axis(&self, axis: usize, m: &CMatrix) -> Result<ComplexTensor> {
        let d = *self
            .dims
            .get(axis)
            .ok_or_else(|| Error::arg(format!("axis {axis} out of range")))?;
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::arg(format!(
                "matrix of shape {}x{} cannot act on factor of dimension {d}",
                m.nrows(),
                m.ncols()
            )));
        }
        let mut out = vec![ZERO; self.data.len()];
        apply_axis_into(&self.data, &self.dims, axis, m, &mut out);
        Ok(ComplexTensor { dims: self.dims.clone(), data: out })
    }
}

/// Low-level kernel behind [`ComplexTensor::apply_on_axis`]; `out` must be
/// pre-sized and is overwritten.
pub(crate) fn apply_axis_into(data: &[C64], dims: &[usize], axis: usize, m: &CMatrix, out: &mut [C64]) {
    let d = dims[axis];
    let inner: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    let block = d * inner;
    out.iter_mut().for_each(|c| *c = ZERO);
    for o in 0..outer {
        let src = &data[o * block..(o + 1) * block];
        let dst = &mut out[o * block..(o + 1) * block];
        for k in 0..d {
            let row = &mut dst[k * inner..(k + 1) * inner];
            for l in 0..d {
                let coeff = m[(k, l)];
                if coeff == ZERO {
                    continue;
                }
                let col = &src[l * inner..(l + 1) * inner];
                for (r, &c) in row.iter_mut().zip(col) {
                    *r += coeff * c;
                }
            }
        }
    }
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for r in (0..dims.len().saturating_sub(1)).rev() {
        s[r] = s[r + 1] * dims[r + 1];
    }
    s
}

/// Flat offsets of every multi-index over `parties` (in the given order),
/// with all other digits zero.
fn offsets(dims: &[usize], parties: &[usize]) -> Vec<usize> {
    let st = strides(dims);
    let mut out = vec![0usize];
    for &p in parties {
        let mut next = Vec::with_capacity(out.len() * dims[p]);
        for &base in &out {
            for i in 0..dims[p] {
                next.push(base + i * st[p]);
            }
        }
        out = next;
    }
    out
}

fn normalize_party_set(n: usize, parties: &[usize]) -> Result<Vec<usize>> {
    let mut set: Vec<usize> = parties.to_vec();
    set.sort_unstable();
    set.dedup();
    if let Some(&p) = set.iter().find(|&&p| p >= n) {
        return Err(Error::arg(format!("party {p} out of range for {n} parties")));
    }
    Ok(set)
}

fn complement(n: usize, set: &[usize]) -> Vec<usize> {
    (0..n).filter(|p| !set.contains(p)).collect()
}

fn check_square(m: &CMatrix, dims: &[usize]) -> Result<()> {
    let side = checked_volume(dims).ok_or_else(|| Error::arg("dims overflow"))?;
    if m.nrows() != side || m.ncols() != side {
        return Err(Error::arg(format!(
            "matrix is {}x{} but dims {dims:?} need side {side}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Partial trace of a matrix over composite `dims`, keeping `keep`.
/// Returns the reduced matrix and its dims (kept parties in ascending order).
pub fn partial_trace(rho: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<(CMatrix, Vec<usize>)> {
    check_square(rho, dims)?;
    let keep = normalize_party_set(dims.len(), keep)?;
    if keep.is_empty() {
        return Err(Error::arg("partial trace needs at least one kept party"));
    }
    let traced = complement(dims.len(), &keep);
    let kept_off = offsets(dims, &keep);
    let traced_off = offsets(dims, &traced);
    let side = kept_off.len();
    let mut out = CMatrix::zeros(side, side);
    for (a, &ka) in kept_off.iter().enumerate() {
        for (b, &kb) in kept_off.iter().enumerate() {
            out[(a, b)] = traced_off.iter().map(|&t| rho[(ka + t, kb + t)]).sum();
        }
    }
    let kept_dims = keep.iter().map(|&p| dims[p]).collect();
    Ok((out, kept_dims))
}

/// Partial transpose over the parties in `parties`.
pub fn partial_transpose(rho: &CMatrix, dims: &[usize], parties: &[usize]) -> Result<CMatrix> {
    check_square(rho, dims)?;
    let set = normalize_party_set(dims.len(), parties)?;
    let rest = complement(dims.len(), &set);
    let p_off = offsets(dims, &set);
    let q_off = offsets(dims, &rest);
    let side = rho.nrows();
    let mut out = CMatrix::zeros(side, side);
    for &pi in &p_off {
        for &pj in &p_off {
            for &qi in &q_off {
                for &qj in &q_off {
                    out[(pi + qi, pj + qj)] = rho[(pj + qi, pi + qj)];
                }
            }
        }
    }
    Ok(out)
}

/// Kronecker product of two matrices, capped on the number of entries.
pub fn matrix_kron(a: &CMatrix, b: &CMatrix, cap: usize) -> Result<CMatrix> {
    let side = a.nrows().checked_mul(b.nrows());
    check_cap(side.and_then(|s| s.checked_mul(s)), cap)?;
    Ok(a.kronecker(b))
}

/// Largest entry of `m - m†` in modulus.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted descending; eigenvalues that agree to within
/// [`RANK_TOLERANCE`] are further ordered by the position of their
/// eigenvector's dominant component. Each eigenvector is rotated so that its
/// first component of largest modulus is real and positive.
#[derive(Clone, Debug)]
pub struct HermitianSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, paired with `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl HermitianSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn reconstruct(&self) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(lam);
        }
        scaled * v.adjoint()
    }

    /// Number of eigenvalues at or above [`RANK_TOLERANCE`].
    pub fn numerical_rank(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l >= RANK_TOLERANCE).count()
    }
}

fn dominant_index(col: &[C64]) -> usize {
    let max = col.iter().map(|c| c.norm()).fold(0.0, f64::max);
    col.iter().position(|c| c.norm() >= max - 1e-12).unwrap_or(0)
}

/// Diagonalizes a Hermitian matrix. Fails when `m` is not Hermitian within
/// [`HERMITIAN_TOLERANCE`].
pub fn eigh(m: &CMatrix) -> Result<HermitianSpectrum> {
    if m.nrows() != m.ncols() {
        return Err(Error::arg("eigh needs a square matrix"));
    }
    let residual = hermiticity_residual(m);
    if residual > HERMITIAN_TOLERANCE {
        return Err(Error::invalid(format!("matrix is not Hermitian (residual {residual:e})")));
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let n = sym.nrows();
    let decomposition = sym.symmetric_eigen();

    let mut cols: Vec<(f64, usize, Vec<C64>)> = (0..n)
        .map(|j| {
            let mut col: Vec<C64> = decomposition.eigenvectors.column(j).iter().copied().collect();
            let k = dominant_index(&col);
            let phase = col[k].conj() / col[k].norm();
            col.iter_mut().for_each(|c| *c *= phase);
            col[k] = C64::new(col[k].re, 0.0);
            (decomposition.eigenvalues[j], k, col)
        })
        .collect();
    cols.sort_by(|a, b| b.0.total_cmp(&a.0));
    // stable-order degenerate clusters by dominant component
    let mut start = 0;
    while start < cols.len() {
        let mut end = start + 1;
        while end < cols.len() && cols[start].0 - cols[end].0 <= RANK_TOLERANCE {
            end += 1;
        }
        cols[start..end].sort_by_key(|c| c.1);
        start = end;
    }

    let eigenvalues = cols.iter().map(|c| c.0).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, j| cols[j].2[i]);
    Ok(HermitianSpectrum { eigenvalues, eigenvectors })
}

/// Sum of singular values. For Hermitian input this is the sum of absolute
/// eigenvalues.
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    Ok(eigh(m)?.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// `½ ||a - b||_1` for two Hermitian matrices of equal shape.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::arg(format!(
            "trace distance between shapes {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(0.5 * trace_norm(&(a - b))?)
}

/// Outer product `|v⟩⟨v|`.
pub fn projector(v: &[C64]) -> CMatrix {
    let n = v.len();
    CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj())
}

/// `exp(i t H)` for Hermitian `H` given its spectrum.
pub(crate) fn unitary_from_spectrum(spec: &HermitianSpectrum, t: f64) -> CMatrix {
    let v = &spec.eigenvectors;
    let mut scaled = v.clone();
    for (j, &lam) in spec.eigenvalues.iter().enumerate() {
        let phase = C64::from_polar(1.0, t * lam);
        scaled.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    scaled * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn naive_partial_trace(rho: &CMatrix, dims: &[usize], keep: &[usize]) -> CMatrix {
        // digit-by-digit definition
        let n = dims.len();
        let total: usize = dims.iter().product();
        let digits = |mut x: usize| {
            let mut d = vec![0; n];
            for r in (0..n).rev() {
                d[r] = x % dims[r];
                x /= dims[r];
            }
            d
        };
        let side: usize = keep.iter().map(|&p| dims[p]).product();
        let mut out = CMatrix::zeros(side, side);
        for i in 0..total {
            for j in 0..total {
                let di = digits(i);
                let dj = digits(j);
                let traced_equal = (0..n).filter(|p| !keep.contains(p)).all(|p| di[p] == dj[p]);
                if !traced_equal {
                    continue;
                }
                let a = keep.iter().fold(0, |acc, &p| acc * dims[p] + di[p]);
                let b = keep.iter().fold(0, |acc, &p| acc * dims[p] + dj[p]);
                out[(a, b)] += rho[(i, j)];
            }
        }
        out
    }

    fn bell() -> Vec<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![c(s), c(0.0), c(0.0), c(s)]
    }

    #[test]
    fn kron_with_scalar_is_identity() {
        let x = ComplexTensor::new(vec![2, 3], (0..6).map(|i| C64::new(i as f64, 1.0)).collect()).unwrap();
        let k = ComplexTensor::scalar(ONE).kron(&x).unwrap();
        assert_eq!(k.dims(), &[1, 2, 3]);
        assert_eq!(k.data(), x.data());
    }

    #[test]
    fn kron_of_basis_vectors() {
        let zero = ComplexTensor::new(vec![2], vec![ONE, ZERO]).unwrap();
        let one = ComplexTensor::new(vec![2], vec![ZERO, ONE]).unwrap();
        let k = zero.kron(&one).unwrap();
        assert_eq!(k.dims(), &[2, 2]);
        assert_eq!(k.data(), &[ZERO, ONE, ZERO, ZERO]);
    }

    #[test]
    fn kron_respects_size_cap() {
        let a = ComplexTensor::zeros(vec![4, 4]).unwrap();
        let err = a.kron_capped(&a, 100).unwrap_err();
        assert!(matches!(err, Error::SizeLimit { requested: 256, cap: 100 }));
    }

    #[test]
    fn bell_kron_bell_traces_back() {
        let b = ComplexTensor::new(vec![2, 2], bell()).unwrap();
        let bb = b.kron(&b).unwrap();
        let rho = projector(bb.data());
        let (left, dims) = partial_trace(&rho, bb.dims(), &[0, 1]).unwrap();
        assert_eq!(dims, vec![2, 2]);
        let expected = projector(&bell());
        assert!((left - &expected).norm() < 1e-12);
        let (right, _) = partial_trace(&rho, bb.dims(), &[2, 3]).unwrap();
        assert!((right - expected).norm() < 1e-12);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let rho = projector(&bell());
        let (m, _) = partial_trace(&rho, &[2, 2], &[0]).unwrap();
        assert!((m - CMatrix::identity(2, 2).scale(0.5)).norm() < 1e-12);
    }

    #[test]
    fn ghz_two_party_marginal() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut ghz = vec![ZERO; 8];
        ghz[0] = c(s);
        ghz[7] = c(s);
        let rho = projector(&ghz);
        let (m, _) = partial_trace(&rho, &[2, 2, 2], &[0, 1]).unwrap();
        assert!((&m - naive_partial_trace(&rho, &[2, 2, 2], &[0, 1])).norm() < 1e-14);
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 0)] = c(0.5);
        expected[(3, 3)] = c(0.5);
        assert!((m - expected).norm() < 1e-12);
    }

    #[test]
    fn empty_keep_is_rejected() {
        let rho = CMatrix::identity(4, 4);
        assert!(matches!(partial_trace(&rho, &[2, 2], &[]), Err(Error::Argument(_))));
    }

    #[test]
    fn partial_trace_matches_naive_on_mixed_dims() {
        let dims = [2, 3, 2];
        let n = 12;
        let rho = CMatrix::from_fn(n, n, |i, j| C64::new((i * 7 + j) as f64, (i as f64) - (j as f64)));
        for keep in [vec![0], vec![1], vec![2], vec![0, 2], vec![1, 2], vec![0, 1, 2]] {
            let (fast, _) = partial_trace(&rho, &dims, &keep).unwrap();
            assert!((fast - naive_partial_trace(&rho, &dims, &keep)).norm() < 1e-9);
        }
    }

    #[test]
    fn eigh_maximally_mixed() {
        let s = eigh(&CMatrix::identity(2, 2).scale(0.5)).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(s.eigenvalues[1], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn eigh_pure_state() {
        let s = eigh(&projector(&bell())).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], 1.0, epsilon = 1e-12);
        assert!(s.eigenvalues[1..].iter().all(|l| l.abs() < 1e-12));
        assert_eq!(s.numerical_rank(), 1);
    }

    #[test]
    fn eigh_separable_mixed_state() {
        let mut rho = CMatrix::zeros(4, 4);
        rho[(1, 1)] = c(0.5);
        rho[(2, 2)] = c(0.5);
        let s = eigh(&rho).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(s.eigenvalues[1], 0.5, epsilon = 1e-14);
        // |01⟩ then |10⟩
        assert_abs_diff_eq!(s.eigenvectors[(1, 0)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eigenvectors[(2, 1)].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = c(1.0);
        assert!(matches!(eigh(&m), Err(Error::Validation(_))));
    }

    #[test]
    fn eigh_phase_convention() {
        let h = CMatrix::from_row_slice(2, 2, &[c(1.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), c(1.0)]);
        let s = eigh(&h).unwrap();
        for j in 0..2 {
            let col: Vec<C64> = s.eigenvectors.column(j).iter().copied().collect();
            let k = dominant_index(&col);
            assert!(col[k].re > 0.0 && col[k].im == 0.0);
        }
        assert!((s.reconstruct() - h).norm() < 1e-12);
    }

    #[test]
    fn trace_distance_examples() {
        let zero = projector(&[ONE, ZERO]);
        let one = projector(&[ZERO, ONE]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = projector(&[c(s), c(s)]);
        assert_abs_diff_eq!(trace_distance(&zero, &zero).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trace_distance(&zero, &one).unwrap(), 1.0, epsilon = 1e-12);
        // oracle: |0⟩⟨0| - |+⟩⟨+| = [[1/2, -1/2], [-1/2, -1/2]] has eigenvalues ±1/√2
        let oracle = {
            let (a, b, d) = (0.5f64, -0.5f64, -0.5f64);
            let disc = (((a - d) / 2.0).powi(2) + b * b).sqrt();
            0.5 * (((a + d) / 2.0 + disc).abs() + ((a + d) / 2.0 - disc).abs())
        };
        assert_abs_diff_eq!(oracle, 0.5 * 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(trace_distance(&zero, &plus).unwrap(), oracle, epsilon = 1e-12);
        assert!(trace_distance(&zero, &CMatrix::identity(4, 4)).is_err());
    }

    #[test]
    fn partial_transpose_of_bell() {
        let pt = partial_transpose(&projector(&bell()), &[2, 2], &[1]).unwrap();
        let s = eigh(&pt).unwrap();
        assert_abs_diff_eq!(s.eigenvalues[3], -0.5, epsilon = 1e-12);
        // transposing twice is the identity
        let back = partial_transpose(&pt, &[2, 2], &[1]).unwrap();
        assert!((back - projector(&bell())).norm() < 1e-15);
    }

    #[test]
    fn apply_on_axis_hadamard() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = CMatrix::from_row_slice(2, 2, &[c(s), c(s), c(s), c(-s)]);
        let t = ComplexTensor::new(vec![2, 2], vec![ONE, ZERO, ZERO, ZERO]).unwrap();
        let out = t.apply_on_axis(0, &h).unwrap();
        assert_abs_diff_eq!(out.data()[0].re, s, epsilon = 1e-15);
        assert_abs_diff_eq!(out.data()[2].re, s, epsilon = 1e-15);
        assert!(t.apply_on_axis(0, &CMatrix::identity(3, 3)).is_err());
    }
}
