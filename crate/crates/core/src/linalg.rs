//! Dense complex linear algebra on tensor-product spaces.
//!
//! Factor ordering is fixed across the crate: factor 0 is the most
//! significant index of the row-major tensor product, so a full index is
//! `sum_k digit_k * stride_k` with `stride_k = prod_{l > k} dims_l`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Relative tolerance used for Hermiticity checks on dense inputs.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues of a state may dip this far below zero.
pub const POSITIVITY_TOL: f64 = 1e-10;
/// Allowed deviation of a state's trace from one.
pub const TRACE_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

/// Matrix unit `|i><j|` of dimension `d`.
pub fn matrix_unit(d: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    m[(i, j)] = ONE;
    m
}

pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Frobenius norm of `m - m^dagger`, relative to the Frobenius norm of `m`.
pub fn hermitian_deviation(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let diff = (m - m.adjoint()).norm();
    let scale = m.norm();
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

pub fn ensure_hermitian(m: &CMat, rel_tol: f64) -> Result<()> {
    let dev = hermitian_deviation(m);
    if dev > rel_tol {
        Err(Error::NotHermitian(dev))
    } else {
        Ok(())
    }
}

/// Eigendecomposition of the Hermitian part of `m`, eigenvalues ascending.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let herm = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    eigh(m).0
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_map(m: &CMat, f: impl Fn(f64) -> C64) -> CMat {
    let (vals, vecs) = eigh(m);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for k in 0..n {
        let fk = f(vals[k]);
        for r in 0..n {
            scaled[(r, k)] *= fk;
        }
    }
    scaled * vecs.adjoint()
}

/// Singular values in nonincreasing order.
///
/// Computed from the Hermitian dilation `[[0, A], [A^dagger, 0]]`, whose
/// spectrum is `±sigma_i` padded with zeros.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let (r, cdim) = m.shape();
    let k = r.min(cdim);
    if k == 0 {
        return Vec::new();
    }
    if r == cdim && hermitian_deviation(m) <= 1e-15 {
        let mut s: Vec<f64> = eigvalsh(m).into_iter().map(f64::abs).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        return s;
    }
    let n = r + cdim;
    let mut dil = CMat::zeros(n, n);
    dil.view_mut((0, r), (r, cdim)).copy_from(m);
    dil.view_mut((r, 0), (cdim, r)).copy_from(&m.adjoint());
    let vals = eigvalsh(&dil);
    vals.iter().rev().take(k).map(|v| v.max(0.0)).collect()
}

pub fn spectral_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn nuclear_norm(m: &CMat) -> f64 {
    singular_values(m).iter().sum()
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// For every full index, the pair (index within `targets` taken in the given
/// order, index within the remaining factors in ascending order).
pub(crate) struct FactorSplit {
    pub pairs: Vec<(usize, usize)>,
    pub sub_dim: usize,
    pub rest_dim: usize,
}

pub(crate) fn factor_split(dims: &[usize], targets: &[usize]) -> Result<FactorSplit> {
    let nf = dims.len();
    let mut is_target = vec![false; nf];
    for &t in targets {
        if t >= nf {
            return Err(Error::InvalidFactor { index: t, count: nf });
        }
        if is_target[t] {
            return Err(Error::DimensionMismatch(format!("factor {t} listed twice")));
        }
        is_target[t] = true;
    }
    let rest: Vec<usize> = (0..nf).filter(|&k| !is_target[k]).collect();
    let full_strides = strides(dims);
    let sub_dims: Vec<usize> = targets.iter().map(|&t| dims[t]).collect();
    let rest_dims: Vec<usize> = rest.iter().map(|&t| dims[t]).collect();
    let sub_strides = strides(&sub_dims);
    let rest_strides = strides(&rest_dims);
    let total: usize = dims.iter().product();
    let mut pairs = Vec::with_capacity(total);
    for i in 0..total {
        let digit = |k: usize| (i / full_strides[k]) % dims[k];
        let s: usize = targets.iter().zip(&sub_strides).map(|(&t, &st)| digit(t) * st).sum();
        let r: usize = rest.iter().zip(&rest_strides).map(|(&t, &st)| digit(t) * st).sum();
        pairs.push((s, r));
    }
    Ok(FactorSplit {
        pairs,
        sub_dim: sub_dims.iter().product(),
        rest_dim: rest_dims.iter().product(),
    })
}

/// Builds `local ⊗ rest` with `local` placed on `targets` (in the given
/// order) and `rest` on the remaining factors in ascending order.
pub fn tensor_on_factors(local: &CMat, rest: &CMat, dims: &[usize], targets: &[usize]) -> Result<CMat> {
    let split = factor_split(dims, targets)?;
    if local.shape() != (split.sub_dim, split.sub_dim) || rest.shape() != (split.rest_dim, split.rest_dim) {
        return Err(Error::DimensionMismatch(format!(
            "local {:?} / rest {:?} do not match factor dimensions {} / {}",
            local.shape(),
            rest.shape(),
            split.sub_dim,
            split.rest_dim
        )));
    }
    let total = split.pairs.len();
    let mut out = CMat::zeros(total, total);
    for (i, &(si, ri)) in split.pairs.iter().enumerate() {
        for (j, &(sj, rj)) in split.pairs.iter().enumerate() {
            let r = rest[(ri, rj)];
            if r != ZERO {
                out[(i, j)] = local[(si, sj)] * r;
            }
        }
    }
    Ok(out)
}

/// Embeds an operator on `targets` into the full space, identity elsewhere.
pub fn embed_operator(op: &CMat, dims: &[usize], targets: &[usize]) -> Result<CMat> {
    let split = factor_split(dims, targets)?;
    if op.shape() != (split.sub_dim, split.sub_dim) {
        return Err(Error::DimensionMismatch(format!(
            "operator {:?} on factors {:?} needs dimension {}",
            op.shape(),
            targets,
            split.sub_dim
        )));
    }
    let total = split.pairs.len();
    let mut out = CMat::zeros(total, total);
    let mut by_rest: Vec<Vec<(usize, usize)>> = vec![Vec::new(); split.rest_dim];
    for (i, &(s, r)) in split.pairs.iter().enumerate() {
        by_rest[r].push((i, s));
    }
    for group in &by_rest {
        for &(i, si) in group {
            for &(j, sj) in group {
                out[(i, j)] = op[(si, sj)];
            }
        }
    }
    Ok(out)
}

/// Partial trace keeping the factors in `keep` (output ordered as given).
pub fn partial_trace_matrix(m: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    let total: usize = dims.iter().product();
    if m.shape() != (total, total) {
        return Err(Error::DimensionMismatch(format!(
            "matrix {:?} vs factor dimensions {:?}",
            m.shape(),
            dims
        )));
    }
    let split = factor_split(dims, keep)?;
    let mut by_rest: Vec<Vec<(usize, usize)>> = vec![Vec::new(); split.rest_dim];
    for (i, &(s, r)) in split.pairs.iter().enumerate() {
        by_rest[r].push((i, s));
    }
    let mut out = CMat::zeros(split.sub_dim, split.sub_dim);
    for group in &by_rest {
        for &(i, si) in group {
            for &(j, sj) in group {
                out[(si, sj)] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Density matrix together with its tensor-factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMat,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity (eigenvalues >= -1e-10) and unit trace.
    pub fn new(matrix: CMat, dims: Vec<usize>) -> Result<Self> {
        check_dims(&matrix, &dims)?;
        ensure_hermitian(&matrix, 1e-10)?;
        let tr = trace(&matrix);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = eigvalsh(&matrix).first().copied().unwrap_or(0.0);
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { matrix, dims })
    }

    pub(crate) fn from_parts_unchecked(matrix: CMat, dims: Vec<usize>) -> Self {
        Self { matrix, dims }
    }

    pub fn pure(psi: &CVec, dims: Vec<usize>) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("state vector has norm {norm}")));
        }
        Self::new(outer(psi), dims)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self {
            matrix: identity(d) / c(d as f64, 0.0),
            dims,
        }
    }

    /// Product state `rho_0 ⊗ rho_1 ⊗ ...`.
    pub fn product(factors: &[DensityMatrix]) -> Self {
        let mut matrix = CMat::identity(1, 1);
        let mut dims = Vec::new();
        for f in factors {
            matrix = kron(&matrix, &f.matrix);
            dims.extend_from_slice(&f.dims);
        }
        Self { matrix, dims }
    }

    /// Rescales to unit trace and symmetrizes. Only on explicit request.
    pub fn renormalized(&self) -> Self {
        let herm = (&self.matrix + self.matrix.adjoint()) * c(0.5, 0.0);
        let tr = trace(&herm).re;
        Self {
            matrix: herm / c(tr, 0.0),
            dims: self.dims.clone(),
        }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }
}

/// Operator together with its tensor-factor dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    matrix: CMat,
    dims: Vec<usize>,
}

impl OperatorMatrix {
    pub fn new(matrix: CMat, dims: Vec<usize>) -> Result<Self> {
        check_dims(&matrix, &dims)?;
        Ok(Self { matrix, dims })
    }

    /// Single-factor operator.
    pub fn single(matrix: CMat) -> Self {
        let d = matrix.nrows();
        Self { matrix, dims: vec![d] }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
}

fn check_dims(m: &CMat, dims: &[usize]) -> Result<()> {
    let d: usize = dims.iter().product();
    if !m.is_square() || m.nrows() != d {
        return Err(Error::DimensionMismatch(format!(
            "matrix {:?} does not match factor dimensions {:?}",
            m.shape(),
            dims
        )));
    }
    Ok(())
}

/// Reduced state on the factors in `keep`, preserving their order.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    let matrix = partial_trace_matrix(&rho.matrix, &rho.dims, &keep)?;
    let dims = keep.iter().map(|&k| rho.dims[k]).collect();
    Ok(DensityMatrix::from_parts_unchecked(matrix, dims))
}

pub fn operator_norm(a: &OperatorMatrix) -> f64 {
    spectral_norm(&a.matrix)
}

pub fn trace_norm(a: &OperatorMatrix) -> f64 {
    nuclear_norm(&a.matrix)
}

/// Half the trace norm of the difference.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.matrix.shape() != sigma.matrix.shape() {
        return Err(Error::DimensionMismatch(format!(
            "states of dimension {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    Ok(0.5 * nuclear_norm(&(&rho.matrix - &sigma.matrix)))
}

/// Schmidt decomposition `psi = sum_k s_k |l_k> ⊗ |r_k>`.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// Nonincreasing, strictly positive.
    pub coefficients: Vec<f64>,
    pub left: Vec<CVec>,
    pub right: Vec<CVec>,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }
}

/// Splits `psi` across the cut `left | rest`; both sides keep ascending factor order.
pub fn schmidt_decompose(psi: &CVec, dims: &[usize], left: &[usize]) -> Result<SchmidtDecomposition> {
    let total: usize = dims.iter().product();
    if psi.len() != total {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} vs factor dimensions {:?}",
            psi.len(),
            dims
        )));
    }
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("state vector has norm {norm}")));
    }
    let mut left = left.to_vec();
    left.sort_unstable();
    let split = factor_split(dims, &left)?;
    let mut m = CMat::zeros(split.sub_dim, split.rest_dim);
    for (i, &(s, r)) in split.pairs.iter().enumerate() {
        m[(s, r)] = psi[i];
    }
    let svd = SVD::new(m, true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^dagger");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut out = SchmidtDecomposition {
        coefficients: Vec::new(),
        left: Vec::new(),
        right: Vec::new(),
    };
    for k in order {
        let s = svd.singular_values[k];
        if s <= 1e-12 {
            continue;
        }
        out.coefficients.push(s);
        out.left.push(u.column(k).into_owned());
        out.right.push(v_t.row(k).transpose());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ket(v: &[f64]) -> CVec {
        CVec::from_iterator(v.len(), v.iter().map(|&x| c(x, 0.0)))
    }

    #[test]
    fn partial_trace_of_product_basis_state() {
        let psi = ket(&[1.0, 0.0, 0.0, 0.0]);
        let rho = DensityMatrix::pure(&psi, vec![2, 2]).unwrap();
        let red = partial_trace(&rho, &[0]).unwrap();
        assert!((red.matrix() - matrix_unit(2, 0, 0)).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let rho = DensityMatrix::pure(&ket(&[h, 0.0, 0.0, h]), vec![2, 2]).unwrap();
        let red = partial_trace(&rho, &[0]).unwrap();
        assert!((red.matrix() - identity(2) * c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_over_nothing_is_identity_map() {
        let rho = DensityMatrix::maximally_mixed(vec![2, 3]);
        let red = partial_trace(&rho, &[0, 1]).unwrap();
        assert_eq!(red.matrix(), rho.matrix());
    }

    #[test]
    fn partial_trace_rejects_bad_factor() {
        let rho = DensityMatrix::maximally_mixed(vec![2, 2]);
        assert!(matches!(partial_trace(&rho, &[2]), Err(Error::InvalidFactor { .. })));
    }

    #[test]
    fn embedding_puts_factor_zero_most_significant() {
        let z0 = embed_operator(&pauli_z(), &[2, 2], &[0]).unwrap();
        let diag: Vec<f64> = z0.diagonal().iter().map(|v| v.re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
        let z1 = embed_operator(&pauli_z(), &[2, 2], &[1]).unwrap();
        let diag: Vec<f64> = z1.diagonal().iter().map(|v| v.re).collect();
        assert_eq!(diag, vec![1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn embedding_respects_target_order() {
        let xz = kron(&pauli_x(), &pauli_z());
        let swapped = embed_operator(&xz, &[2, 2], &[1, 0]).unwrap();
        assert!((swapped - kron(&pauli_z(), &pauli_x())).norm() < 1e-15);
    }

    #[test]
    fn tensor_on_factors_matches_kron() {
        let a = pauli_x();
        let b = kron(&pauli_y(), &pauli_z());
        let placed = tensor_on_factors(&a, &b, &[2, 2, 2], &[1]).unwrap();
        let expected = kron(&pauli_y(), &kron(&pauli_x(), &pauli_z()));
        assert!((placed - expected).norm() < 1e-15);
    }

    #[test]
    fn norms_of_simple_operators() {
        assert!((operator_norm(&OperatorMatrix::single(identity(3))) - 1.0).abs() < 1e-14);
        assert!((operator_norm(&OperatorMatrix::single(pauli_x())) - 1.0).abs() < 1e-14);
        let p = matrix_unit(2, 0, 0) * c(2.0, 0.0);
        assert!((operator_norm(&OperatorMatrix::single(p)) - 2.0).abs() < 1e-14);
        assert!((trace_norm(&OperatorMatrix::single(identity(4))) - 4.0).abs() < 1e-14);
        assert!((trace_norm(&OperatorMatrix::single(matrix_unit(3, 1, 1))) - 1.0).abs() < 1e-14);
        assert_eq!(trace_norm(&OperatorMatrix::single(CMat::zeros(3, 3))), 0.0);
    }

    #[test]
    fn singular_values_of_non_hermitian_matrix() {
        // |0><1| has a single unit singular value.
        let s = singular_values(&matrix_unit(2, 0, 1));
        assert!((s[0] - 1.0).abs() < 1e-14 && s[1].abs() < 1e-14);
        let m = CMat::from_row_slice(2, 2, &[c(3.0, 0.0), ZERO, ZERO, c(0.0, -4.0)]);
        let s = singular_values(&m);
        assert!((s[0] - 4.0).abs() < 1e-13 && (s[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn trace_distance_examples() {
        let zero = DensityMatrix::new(matrix_unit(2, 0, 0), vec![2]).unwrap();
        let one = DensityMatrix::new(matrix_unit(2, 1, 1), vec![2]).unwrap();
        let mixed = DensityMatrix::maximally_mixed(vec![2]);
        assert_eq!(trace_distance(&zero, &zero).unwrap(), 0.0);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-14);
        assert!((trace_distance(&zero, &mixed).unwrap() - 0.5).abs() < 1e-14);
        let three = DensityMatrix::maximally_mixed(vec![3]);
        assert!(trace_distance(&zero, &three).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(identity(2), vec![2]).is_err());
        let neg = CMat::from_row_slice(2, 2, &[c(1.5, 0.0), ZERO, ZERO, c(-0.5, 0.0)]);
        assert!(DensityMatrix::new(neg, vec![2]).is_err());
        assert!(DensityMatrix::new(matrix_unit(2, 0, 1), vec![2]).is_err());
        assert!(DensityMatrix::new(identity(4) / c(4.0, 0.0), vec![2, 3]).is_err());
    }

    #[test]
    fn schmidt_examples() {
        let prod = ket(&[0.6, 0.0, 0.8, 0.0]);
        let s = schmidt_decompose(&prod, &[2, 2], &[0]).unwrap();
        assert_eq!(s.rank(), 1);
        assert!((s.coefficients[0] - 1.0).abs() < 1e-14);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = ket(&[h, 0.0, 0.0, h]);
        let s = schmidt_decompose(&bell, &[2, 2], &[1]).unwrap();
        assert_eq!(s.rank(), 2);
        for k in 0..2 {
            assert!((s.coefficients[k] - h).abs() < 1e-14);
        }
        assert!(schmidt_decompose(&ket(&[1.0, 1.0, 0.0, 0.0]), &[2, 2], &[0]).is_err());
    }

    #[test]
    fn schmidt_reconstructs_state() {
        let v: Vec<C64> = (0..12).map(|k| c((k as f64).sin(), (k as f64 * 0.7).cos())).collect();
        let mut psi = CVec::from_vec(v);
        psi /= c(psi.norm(), 0.0);
        let dims = [2, 3, 2];
        let s = schmidt_decompose(&psi, &dims, &[0, 2]).unwrap();
        assert!(s.rank() <= 4);
        let sq: f64 = s.coefficients.iter().map(|x| x * x).sum();
        assert!((sq - 1.0).abs() < 1e-12);
        // left lives on factors {0, 2}, right on {1}
        let mut recon = CVec::zeros(12);
        for k in 0..s.rank() {
            let l = &s.left[k];
            let r = &s.right[k];
            for a in 0..2 {
                for b in 0..3 {
                    for cc in 0..2 {
                        let full = a * 6 + b * 2 + cc;
                        recon[full] += c(s.coefficients[k], 0.0) * l[a * 2 + cc] * r[b];
                    }
                }
            }
        }
        assert!((recon - psi).norm() < 1e-12);
    }
}
