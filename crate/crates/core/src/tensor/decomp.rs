//! Jacobi-type spectral routines for dense complex matrices.
//!
//! * [`eigh`] diagonalizes a Hermitian matrix with cyclic two-sided complex
//!   Jacobi rotations.
//! * [`singular_values`] uses one-sided (Hestenes) Jacobi orthogonalization,
//!   which keeps small singular values accurate relative to the column norms.
//!   Trace norms of rank-deficient permuted operators depend on that: a zero
//!   singular value must come out as O(ε), not O(√ε).

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{Real, C};
use crate::tensor::ComplexMatrix;

const MAX_SWEEPS: usize = 80;

/// Eigen-decomposition `A = V · diag(values) · V†` of a Hermitian matrix.
///
/// Eigenvalues are sorted ascending; column `k` of `vectors` belongs to
/// `values[k]`.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn min(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }

    pub fn max(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::zero)
    }

    /// Rebuilds `V · diag(f(λ)) · V†`.
    pub fn map_spectrum(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let n = self.values.len();
        let mapped: Vec<T> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        ComplexMatrix::from_fn(n, n, |r, c| {
            let mut acc = C::zero();
            for (k, &m) in mapped.iter().enumerate() {
                if m != T::zero() {
                    acc += v[(r, k)] * v[(c, k)].conj() * m;
                }
            }
            acc
        })
    }
}

fn fingerprint<T: Real>(m: &ComplexMatrix<T>) -> String {
    format!(
        "{}x{} matrix, ||M||_F = {:e}, max|m_ij| = {:e}",
        m.rows(),
        m.cols(),
        m.frobenius_norm().as_f64(),
        m.max_abs().as_f64()
    )
}

/// Rotation parameters `(c, s, phase)` annihilating the off-diagonal entry of
/// the Hermitian 2x2 block `[[a, b], [b*, d]]`.
///
/// The unitary is `G = [[c, s], [-s·e^{-iφ}, c·e^{-iφ}]]` with `b = |b| e^{iφ}`,
/// and `G† [[a, b], [b*, d]] G` is diagonal.
#[inline]
fn jacobi_rotation<T: Real>(a: T, d: T, b: C<T>) -> (T, T, C<T>) {
    let abs_b = b.norm();
    let phase = b / abs_b;
    let tau = (d - a) / (abs_b + abs_b);
    let t = if tau >= T::zero() {
        T::one() / (tau + (T::one() + tau * tau).sqrt())
    } else {
        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
    };
    let c = T::one() / (T::one() + t * t).sqrt();
    (c, t * c, phase.conj())
}

/// Diagonalizes a Hermitian matrix. Only the Hermitian part of the input is
/// used; callers validate Hermiticity beforehand.
pub fn eigh<T: Real>(m: &ComplexMatrix<T>) -> Result<HermitianEigen<T>> {
    if !m.is_square() {
        return Err(Error::Shape(format!(
            "eigh needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::<T>::identity(n);
    let eps = T::epsilon();
    let scale = a.frobenius_norm();

    let mut converged = n < 2 || scale == T::zero();
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= eps * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = a[(p, q)];
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                if b.norm()
                    <= eps * T::lit(0.01) * (app.abs() + aqq.abs()).max(T::min_positive_value())
                {
                    a[(p, q)] = C::zero();
                    a[(q, p)] = C::zero();
                    continue;
                }
                let (c, s, ph) = jacobi_rotation(app, aqq, b);
                // G = [[c, s], [-s·ph, c·ph]] on columns (p, q)
                let g_pp = C::new(c, T::zero());
                let g_pq = C::new(s, T::zero());
                let g_qp = ph * (-s);
                let g_qq = ph * c;
                // A ← A·G
                for r in 0..n {
                    let x = a[(r, p)];
                    let y = a[(r, q)];
                    a[(r, p)] = x * g_pp + y * g_qp;
                    a[(r, q)] = x * g_pq + y * g_qq;
                }
                // A ← G†·A
                for col in 0..n {
                    let x = a[(p, col)];
                    let y = a[(q, col)];
                    a[(p, col)] = g_pp.conj() * x + g_qp.conj() * y;
                    a[(q, col)] = g_pq.conj() * x + g_qq.conj() * y;
                }
                a[(p, q)] = C::zero();
                a[(q, p)] = C::zero();
                a[(p, p)] = C::new(a[(p, p)].re, T::zero());
                a[(q, q)] = C::new(a[(q, q)].re, T::zero());
                for r in 0..n {
                    let x = v[(r, p)];
                    let y = v[(r, q)];
                    v[(r, p)] = x * g_pp + y * g_qp;
                    v[(r, q)] = x * g_pq + y * g_qq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Hermitian Jacobi did not converge on {}",
            fingerprint(m)
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(i, i)]
            .re
            .partial_cmp(&a[(j, j)].re)
            .expect("finite eigenvalues")
    });
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Singular values of an arbitrary (possibly rectangular) matrix, descending.
pub fn singular_values<T: Real>(m: &ComplexMatrix<T>) -> Result<Vec<T>> {
    // Orthogonalize the columns of whichever orientation has fewer columns.
    let work = if m.rows() >= m.cols() {
        m.clone()
    } else {
        m.adjoint()
    };
    let (rows, cols) = work.shape();
    // column-major copy so rotations touch contiguous memory
    let mut u: Vec<Vec<C<T>>> = (0..cols).map(|c| work.column(c)).collect();
    let eps = T::epsilon() * T::lit(rows.max(1) as f64).sqrt();

    let dot = |x: &[C<T>], y: &[C<T>]| -> C<T> {
        x.iter()
            .zip(y)
            .fold(C::zero(), |acc, (a, b)| acc + a.conj() * *b)
    };
    let nrm2 = |x: &[C<T>]| -> T { x.iter().map(|z| z.norm_sqr()).sum::<T>() };

    // columns at roundoff level relative to the whole matrix count as zero
    let negligible = {
        let total: T = u.iter().map(|col| nrm2(col)).sum();
        total * T::epsilon() * T::epsilon()
    };

    let mut converged = cols < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = nrm2(&u[p]);
                let beta = nrm2(&u[q]);
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma = dot(&u[p], &u[q]);
                if gamma.norm() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let (c, s, ph) = jacobi_rotation(alpha, beta, gamma);
                let g_pp = C::new(c, T::zero());
                let g_pq = C::new(s, T::zero());
                let g_qp = ph * (-s);
                let g_qq = ph * c;
                let (left, right) = u.split_at_mut(q);
                let (up, uq) = (&mut left[p], &mut right[0]);
                for (x, y) in up.iter_mut().zip(uq.iter_mut()) {
                    let (xv, yv) = (*x, *y);
                    *x = xv * g_pp + yv * g_qp;
                    *y = xv * g_pq + yv * g_qq;
                }
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "one-sided Jacobi SVD did not converge on {}",
            fingerprint(m)
        )));
    }
    let mut sv: Vec<T> = u.iter().map(|col| nrm2(col).sqrt()).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    Ok(sv)
}
