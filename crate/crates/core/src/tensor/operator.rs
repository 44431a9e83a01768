use std::collections::BTreeSet;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{Real, Tolerances, C};
use crate::tensor::decomp::{eigh, singular_values, HermitianEigen};
use crate::tensor::ComplexMatrix;

/// Splits a row-major multi-index into per-subsystem digits (first subsystem
/// most significant).
#[inline]
pub(crate) fn decode(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
}

#[inline]
pub(crate) fn encode(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

fn validate_dims(dims: &[usize], size: usize, min_dim: usize) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::Argument("subsystem dimension list is empty".into()));
    }
    if let Some(d) = dims.iter().find(|&&d| d < min_dim) {
        return Err(Error::Argument(format!(
            "subsystem dimension {d} is below {min_dim}"
        )));
    }
    let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
    if total != Some(size) {
        return Err(Error::Shape(format!(
            "dims {dims:?} do not multiply to matrix size {size}"
        )));
    }
    Ok(())
}

/// Validates a subsystem index set against `n` parts, returning it sorted and
/// deduplicated.
pub(crate) fn subsystem_set(subsystems: &[usize], n: usize) -> Result<Vec<usize>> {
    let set: BTreeSet<usize> = subsystems.iter().copied().collect();
    if let Some(&s) = set.iter().find(|&&s| s >= n) {
        return Err(Error::Argument(format!(
            "subsystem index {s} out of range for {n} parts"
        )));
    }
    Ok(set.into_iter().collect())
}

/// Hermitian operator on a multipartite space, with no trace or positivity
/// constraint. Houses witnesses, reductions and Choi matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T> {
    dims: Vec<usize>,
    mat: ComplexMatrix<T>,
}

impl<T: Real> HermitianOperator<T> {
    /// Validates shape, dims and Hermiticity (within the default tolerance).
    pub fn new(dims: Vec<usize>, mat: ComplexMatrix<T>) -> Result<Self> {
        Self::with_tolerances(dims, mat, &T::tolerances())
    }

    pub fn with_tolerances(
        dims: Vec<usize>,
        mat: ComplexMatrix<T>,
        tol: &Tolerances<T>,
    ) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::Shape(format!(
                "operator must be square, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        validate_dims(&dims, mat.rows(), 1)?;
        let dev = mat.hermitian_deviation();
        if dev > tol.herm {
            return Err(Error::NotHermitian(dev.as_f64()));
        }
        Ok(Self { dims, mat })
    }

    /// Skips the Hermiticity check; dims must still match the shape.
    pub fn new_unchecked(dims: Vec<usize>, mat: ComplexMatrix<T>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), mat.rows());
        debug_assert!(mat.is_square());
        Self { dims, mat }
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Self {
            dims,
            mat: ComplexMatrix::identity(n),
        }
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn n_parts(&self) -> usize {
        self.dims.len()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.mat
    }

    /// Real part of the trace.
    pub fn trace(&self) -> T {
        self.mat.trace().re
    }

    pub fn eigh(&self) -> Result<HermitianEigen<T>> {
        eigh(&self.mat)
    }

    pub fn trace_norm(&self) -> Result<T> {
        trace_norm(&self.mat)
    }
}

/// Unit-trace, positive semidefinite Hermitian operator with a subsystem
/// signature. Row/column multi-indices are row-major over `dims`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    op: HermitianOperator<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(dims: Vec<usize>, mat: ComplexMatrix<T>) -> Result<Self> {
        Self::with_tolerances(dims, mat, &T::tolerances())
    }

    pub fn with_tolerances(
        dims: Vec<usize>,
        mat: ComplexMatrix<T>,
        tol: &Tolerances<T>,
    ) -> Result<Self> {
        if mat.is_square() {
            validate_dims(&dims, mat.rows(), 2)?;
        }
        let op = HermitianOperator::with_tolerances(dims, mat, tol)?;
        let tr = op.trace();
        if (tr - T::one()).abs() > tol.trace {
            return Err(Error::Trace(tr.as_f64()));
        }
        let lam_min = op.eigh()?.min();
        if lam_min < -tol.psd {
            return Err(Error::NotPsd(lam_min.as_f64()));
        }
        Ok(Self { op })
    }

    /// Promotes an operator after validating the density-matrix invariants.
    pub fn from_operator(op: HermitianOperator<T>) -> Result<Self> {
        Self::new(op.dims, op.mat)
    }

    /// Projector onto a (normalized on the fly) pure state.
    pub fn from_pure(dims: Vec<usize>, psi: &[C<T>]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm == T::zero() || !norm.is_finite() {
            return Err(Error::Argument(
                "pure state vector has zero or non-finite norm".into(),
            ));
        }
        let unit: Vec<C<T>> = psi.iter().map(|z| *z / norm).collect();
        Self::new(dims, ComplexMatrix::projector(&unit))
    }

    pub(crate) fn new_unchecked(dims: Vec<usize>, mat: ComplexMatrix<T>) -> Self {
        Self {
            op: HermitianOperator::new_unchecked(dims, mat),
        }
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        self.op.dims()
    }

    #[inline]
    pub fn n_parts(&self) -> usize {
        self.op.n_parts()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix<T> {
        self.op.matrix()
    }

    #[inline]
    pub fn as_operator(&self) -> &HermitianOperator<T> {
        &self.op
    }

    pub fn into_operator(self) -> HermitianOperator<T> {
        self.op
    }

    /// `(U₁⊗…⊗Uₙ) ρ (U₁⊗…⊗Uₙ)†` for a full-space unitary `u`.
    pub fn conjugate_by(&self, u: &ComplexMatrix<T>) -> Result<Self> {
        let m = u.matmul(self.matrix())?.matmul(&u.adjoint())?;
        Ok(Self::new_unchecked(
            self.dims().to_vec(),
            m.hermitian_part(),
        ))
    }
}

/// Sum of singular values; rectangular input allowed.
pub fn trace_norm<T: Real>(m: &ComplexMatrix<T>) -> Result<T> {
    Ok(singular_values(m)?.into_iter().sum())
}

/// `√Σ|m_ij|²`.
pub fn frobenius_norm<T: Real>(m: &ComplexMatrix<T>) -> T {
    m.frobenius_norm()
}

/// Traces out every subsystem not listed in `keep`.
pub fn partial_trace<T: Real>(
    op: &HermitianOperator<T>,
    keep: &[usize],
) -> Result<HermitianOperator<T>> {
    let dims = op.dims();
    let n = dims.len();
    if keep.is_empty() {
        return Err(Error::Argument(
            "partial trace needs a nonempty keep set".into(),
        ));
    }
    let keep = subsystem_set(keep, n)?;
    let traced: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&s| dims[s]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&s| dims[s]).collect();
    let d_keep: usize = keep_dims.iter().product();
    let d_traced: usize = traced_dims.iter().product();

    let mut rk = vec![0; keep.len()];
    let mut ck = vec![0; keep.len()];
    let mut tk = vec![0; traced.len()];
    let mut full_r = vec![0; n];
    let mut full_c = vec![0; n];
    let m = op.matrix();
    let mut out = ComplexMatrix::zeros(d_keep, d_keep);
    for r in 0..d_keep {
        decode(r, &keep_dims, &mut rk);
        for c in 0..d_keep {
            decode(c, &keep_dims, &mut ck);
            let mut acc = C::zero();
            for t in 0..d_traced {
                decode(t, &traced_dims, &mut tk);
                for (i, &s) in keep.iter().enumerate() {
                    full_r[s] = rk[i];
                    full_c[s] = ck[i];
                }
                for (i, &s) in traced.iter().enumerate() {
                    full_r[s] = tk[i];
                    full_c[s] = tk[i];
                }
                acc += m[(encode(&full_r, dims), encode(&full_c, dims))];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(HermitianOperator::new_unchecked(keep_dims, out))
}

/// Transposes the ket/bra indices of each listed subsystem.
pub fn partial_transpose_op<T: Real>(
    op: &HermitianOperator<T>,
    subsystems: &[usize],
) -> Result<HermitianOperator<T>> {
    let dims = op.dims();
    let set = subsystem_set(subsystems, dims.len())?;
    let d = op.dim();
    let m = op.matrix();
    let mut ri = vec![0; dims.len()];
    let mut ci = vec![0; dims.len()];
    let mut out = ComplexMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            decode(r, dims, &mut ri);
            decode(c, dims, &mut ci);
            for &s in &set {
                std::mem::swap(&mut ri[s], &mut ci[s]);
            }
            out[(encode(&ri, dims), encode(&ci, dims))] = m[(r, c)];
        }
    }
    Ok(HermitianOperator::new_unchecked(dims.to_vec(), out))
}

/// Partial transpose of a state on the listed subsystems (0-based).
pub fn partial_transpose<T: Real>(
    rho: &DensityMatrix<T>,
    subsystems: &[usize],
) -> Result<HermitianOperator<T>> {
    partial_transpose_op(rho.as_operator(), subsystems)
}

fn psd_spectrum<T: Real>(
    op: &HermitianOperator<T>,
    tol: &Tolerances<T>,
) -> Result<HermitianEigen<T>> {
    let eig = op.eigh()?;
    let lam_max = eig.max().abs().max(T::one());
    if eig.min() < -tol.psd * lam_max {
        return Err(Error::NotPsd(eig.min().as_f64()));
    }
    Ok(eig)
}

#[inline]
fn cutoff<T: Real>(eig: &HermitianEigen<T>, rank_tol: T) -> T {
    rank_tol * eig.max().max(T::zero())
}

/// Orthogonal projector onto eigenvectors with eigenvalue above
/// `rank_tol · λ_max`.
pub fn support_projector<T: Real>(
    op: &HermitianOperator<T>,
    rank_tol: T,
) -> Result<HermitianOperator<T>> {
    let eig = psd_spectrum(op, &T::tolerances())?;
    let cut = cutoff(&eig, rank_tol);
    let p = eig.map_spectrum(|l| {
        if l > cut && l > T::zero() {
            T::one()
        } else {
            T::zero()
        }
    });
    Ok(HermitianOperator::new_unchecked(op.dims().to_vec(), p))
}

/// `λ ↦ λ^{-1/2}` on the support, zero elsewhere.
pub fn inv_sqrt_on_support<T: Real>(
    op: &HermitianOperator<T>,
    rank_tol: T,
) -> Result<HermitianOperator<T>> {
    let eig = psd_spectrum(op, &T::tolerances())?;
    let cut = cutoff(&eig, rank_tol);
    let s = eig.map_spectrum(|l| {
        if l > cut && l > T::zero() {
            T::one() / l.sqrt()
        } else {
            T::zero()
        }
    });
    Ok(HermitianOperator::new_unchecked(op.dims().to_vec(), s))
}

/// Principal square root of a PSD operator; eigenvalues within the PSD
/// tolerance below zero are clamped.
pub fn sqrt_psd<T: Real>(op: &HermitianOperator<T>) -> Result<HermitianOperator<T>> {
    let eig = psd_spectrum(op, &T::tolerances())?;
    let s = eig.map_spectrum(|l| l.max(T::zero()).sqrt());
    Ok(HermitianOperator::new_unchecked(op.dims().to_vec(), s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::kron;

    type M = ComplexMatrix<f64>;
    type H = HermitianOperator<f64>;

    fn re(x: f64) -> C<f64> {
        C::new(x, 0.0)
    }

    fn max_entangled(d: usize) -> DensityMatrix<f64> {
        let mut psi = vec![re(0.0); d * d];
        for i in 0..d {
            psi[i * d + i] = re(1.0);
        }
        DensityMatrix::from_pure(vec![d, d], &psi).unwrap()
    }

    #[test]
    fn multi_index_round_trip() {
        let dims = [2, 3, 4];
        let mut digits = [0; 3];
        for k in 0..24 {
            decode(k, &dims, &mut digits);
            assert_eq!(encode(&digits, &dims), k);
        }
        decode(23, &dims, &mut digits);
        assert_eq!(digits, [1, 2, 3]);
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&M::identity(2)).unwrap() - 2.0).abs() < 1e-14);
        assert!((trace_norm(&M::from_diag(&[1.0, -1.0])).unwrap() - 2.0).abs() < 1e-14);
        let s = 0.5f64.sqrt();
        let u = [re(s), C::new(0.0, s)];
        let v = [re(0.6), re(0.0), re(0.8)];
        assert!((trace_norm(&M::outer(&u, &v)).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let a = M::from_diag(&[0.25, 0.75]);
        let b = M::new(
            2,
            2,
            vec![re(0.5), C::new(0.1, 0.2), C::new(0.1, -0.2), re(0.5)],
        )
        .unwrap();
        let ab = H::new(vec![2, 2], kron(&a, &b).unwrap()).unwrap();
        let rb = partial_trace(&ab, &[1]).unwrap();
        assert!(rb.matrix().max_abs_diff(&b) < 1e-15);
        assert_eq!(rb.dims(), &[2]);
        let ra = partial_trace(&ab, &[0]).unwrap();
        assert!(ra.matrix().max_abs_diff(&a) < 1e-15);
    }

    #[test]
    fn partial_trace_of_max_entangled_is_maximally_mixed() {
        let p = max_entangled(3);
        let rb = partial_trace(p.as_operator(), &[1]).unwrap();
        assert!(rb.matrix().max_abs_diff(&M::identity(3).scale(1.0 / 3.0)) < 1e-15);
    }

    #[test]
    fn partial_trace_of_reduction_witness() {
        // entrywise oracle: Tr_A(I/2) = I, Tr_A(P_+) = I/2, so Tr_A(I/2 - P_+) = I/2
        let w = &M::identity(4).scale(0.5) - max_entangled(2).matrix();
        let w = H::new(vec![2, 2], w).unwrap();
        let wb = partial_trace(&w, &[1]).unwrap();
        let mut oracle = M::zeros(2, 2);
        for b1 in 0..2 {
            for b2 in 0..2 {
                for a in 0..2 {
                    oracle[(b1, b2)] += w.matrix()[(a * 2 + b1, a * 2 + b2)];
                }
            }
        }
        assert!(wb.matrix().max_abs_diff(&oracle) < 1e-15);
        assert!(wb.matrix().max_abs_diff(&M::identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_argument_errors() {
        let op = H::identity(vec![2, 2]);
        assert!(matches!(partial_trace(&op, &[]), Err(Error::Argument(_))));
        assert!(matches!(partial_trace(&op, &[2]), Err(Error::Argument(_))));
    }

    #[test]
    fn partial_trace_composes() {
        let g = M::from_fn(12, 12, |r, c| {
            C::new(((r * 7 + c * 3) % 5) as f64, ((r + 2 * c) % 3) as f64 - 1.0)
        });
        let h = H::new(vec![2, 3, 2], (&g + &g.adjoint()).scale(0.5)).unwrap();
        let step = partial_trace(&partial_trace(&h, &[1, 2]).unwrap(), &[0]).unwrap();
        let once = partial_trace(&h, &[1]).unwrap();
        assert!(step.matrix().max_abs_diff(once.matrix()) < 1e-12);
        assert!((once.trace() - h.trace()).abs() < 1e-12);
    }

    #[test]
    fn partial_transpose_of_max_entangled() {
        let p = max_entangled(2);
        let pt = partial_transpose(&p, &[1]).unwrap();
        let eig = pt.eigh().unwrap();
        let expect = [-0.5, 0.5, 0.5, 0.5];
        for (l, e) in eig.values.iter().zip(expect) {
            assert!((l - e).abs() < 1e-12);
        }
        assert!((pt.trace_norm().unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn partial_transpose_is_an_involution_and_keeps_product_states_psd() {
        let a = M::from_diag(&[0.3, 0.7]);
        let b = M::new(
            2,
            2,
            vec![re(0.5), C::new(0.0, 0.4), C::new(0.0, -0.4), re(0.5)],
        )
        .unwrap();
        let rho = DensityMatrix::new(vec![2, 2], kron(&a, &b).unwrap()).unwrap();
        let pt = partial_transpose(&rho, &[1]).unwrap();
        assert!(pt.matrix().max_abs_diff(&kron(&a, &b.transpose()).unwrap()) < 1e-15);
        assert!(pt.eigh().unwrap().min() > -1e-12);
        assert!((pt.trace_norm().unwrap() - 1.0).abs() < 1e-12);
        let back = partial_transpose_op(&pt, &[1]).unwrap();
        assert_eq!(back.matrix(), rho.matrix());
        assert!(matches!(
            partial_transpose(&rho, &[5]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn support_projector_examples() {
        let id = H::identity(vec![3]);
        assert!(
            support_projector(&id, 1e-10)
                .unwrap()
                .matrix()
                .max_abs_diff(&M::identity(3))
                < 1e-15
        );
        let p = H::new(vec![2], M::from_diag(&[1.0, 0.0])).unwrap();
        assert!(
            support_projector(&p, 1e-10)
                .unwrap()
                .matrix()
                .max_abs_diff(&M::from_diag(&[1.0, 0.0]))
                < 1e-15
        );
        let tiny = H::new(vec![2], M::from_diag(&[1.0, 1e-15])).unwrap();
        assert!(
            support_projector(&tiny, 1e-10)
                .unwrap()
                .matrix()
                .max_abs_diff(&M::from_diag(&[1.0, 0.0]))
                < 1e-15
        );
        let neg = H::new(vec![2], M::from_diag(&[1.0, -0.1])).unwrap();
        assert!(matches!(
            support_projector(&neg, 1e-10),
            Err(Error::NotPsd(_))
        ));
    }

    #[test]
    fn inv_sqrt_examples() {
        let id = H::identity(vec![2]);
        assert!(
            inv_sqrt_on_support(&id, 1e-10)
                .unwrap()
                .matrix()
                .max_abs_diff(&M::identity(2))
                < 1e-15
        );
        let m = H::new(vec![2], M::from_diag(&[4.0, 0.0])).unwrap();
        let s = inv_sqrt_on_support(&m, 1e-10).unwrap();
        assert!(s.matrix().max_abs_diff(&M::from_diag(&[0.5, 0.0])) < 1e-15);
    }

    #[test]
    fn density_matrix_validation() {
        assert!(matches!(
            DensityMatrix::new(vec![2], M::from_diag(&[0.5, 0.6])),
            Err(Error::Trace(_))
        ));
        assert!(matches!(
            DensityMatrix::new(vec![2], M::from_diag(&[1.5, -0.5])),
            Err(Error::NotPsd(_))
        ));
        let nonherm = M::new(2, 2, vec![re(0.5), re(0.1), re(0.0), re(0.5)]).unwrap();
        assert!(matches!(
            DensityMatrix::new(vec![2], nonherm),
            Err(Error::NotHermitian(_))
        ));
        assert!(matches!(
            DensityMatrix::new(vec![2, 3], M::identity(4).scale(0.25)),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            DensityMatrix::new(vec![1, 4], M::identity(4).scale(0.25)),
            Err(Error::Argument(_))
        ));
        assert!(DensityMatrix::new(vec![2, 2], M::identity(4).scale(0.25)).is_ok());
    }
}
