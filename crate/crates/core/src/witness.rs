//! Compiles an entanglement witness into a trace-preserving positive map
//! `Λ: M_{d_B} → M_{d_A} ⊗ M_2` whose partial application breaks positivity
//! (and hence the unit trace-norm bound) on every state the witness detects.
//!
//! Pipeline for a witness `W` on `A ⊗ B`:
//!
//! 1. rescale `W` so the largest eigenvalue of `W_B = Tr_A W` is at most one;
//! 2. `P_B` = support projector of `W_B`, `P⊥ = I − P_B`;
//! 3. `W′ = W + I ⊗ P⊥`, whose reduction `W′_B` has full rank;
//! 4. `W″ = (I ⊗ W′_B^{-1/2}) W′ (I ⊗ W′_B^{-1/2})`, with `Tr_A W″ = I`;
//! 5. `Γ` is the map with Choi matrix `W″` (unital), `Γ†` its trace-preserving dual;
//! 6. local filter `V = √W′_B · P_B` and its complement `V′ = √(I − V†V)`;
//! 7. `Λ(X) = Γ†(V X V†) ⊗ |0⟩⟨0| + Γ†(V′ X V′†) ⊗ |1⟩⟨1|`.
//!
//! Choi matrices use the input factor first: `choi = Σᵢⱼ |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)`.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, C};
use crate::states::{random_pure_product, random_pure_vector, seeded_rng};
use crate::tensor::{
    eigh, inv_sqrt_on_support, kron, partial_trace, sqrt_psd, support_projector, trace_norm,
    ComplexMatrix, DensityMatrix, HermitianOperator,
};

const SPOT_CHECK_SEED: u64 = 0x005e_ed0f_c0de;
const SPOT_CHECK_SAMPLES: usize = 32;

/// Hermitian operator on `A ⊗ B` used as an entanglement witness. Nonnegativity
/// on product states is only spot-checked during compilation.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness<T> {
    op: HermitianOperator<T>,
}

impl<T: Real> Witness<T> {
    pub fn new(op: HermitianOperator<T>) -> Result<Self> {
        if op.n_parts() != 2 {
            return Err(Error::Argument(format!(
                "a witness acts on two subsystems, got dims {:?}",
                op.dims()
            )));
        }
        Ok(Self { op })
    }

    pub fn operator(&self) -> &HermitianOperator<T> {
        &self.op
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.op.dims()[0], self.op.dims()[1])
    }
}

/// `Tr(W ρ)`.
pub fn witness_expectation<T: Real>(w: &Witness<T>, rho: &DensityMatrix<T>) -> Result<T> {
    if w.op.dims() != rho.dims() {
        return Err(Error::Shape(format!(
            "witness dims {:?} vs state dims {:?}",
            w.op.dims(),
            rho.dims()
        )));
    }
    let z = w.op.matrix().trace_product(rho.matrix())?;
    let scale = w.op.matrix().frobenius_norm().max(T::one());
    if z.im.abs() > T::tolerances().imag * scale {
        return Err(Error::NotHermitian(z.im.as_f64()));
    }
    Ok(z.re)
}

/// `Λ(X) = Tr_in[(Xᵀ ⊗ I_out) · choi]`.
pub fn apply_choi<T: Real>(
    choi: &ComplexMatrix<T>,
    x: &ComplexMatrix<T>,
    d_in: usize,
    d_out: usize,
) -> Result<ComplexMatrix<T>> {
    if choi.shape() != (d_in * d_out, d_in * d_out) {
        return Err(Error::Shape(format!(
            "Choi matrix is {}x{}, expected {n}x{n}",
            choi.rows(),
            choi.cols(),
            n = d_in * d_out
        )));
    }
    if x.shape() != (d_in, d_in) {
        return Err(Error::Shape(format!(
            "map input is {}x{}, expected {d_in}x{d_in}",
            x.rows(),
            x.cols()
        )));
    }
    let mut y = ComplexMatrix::zeros(d_out, d_out);
    for i in 0..d_in {
        for j in 0..d_in {
            let xij = x[(i, j)];
            if xij.is_zero() {
                continue;
            }
            for r in 0..d_out {
                for c in 0..d_out {
                    y[(r, c)] += xij * choi[(i * d_out + r, j * d_out + c)];
                }
            }
        }
    }
    Ok(y)
}

/// Choi matrix `Σᵢⱼ |i⟩⟨j| ⊗ f(|i⟩⟨j|)` of a linear map given as a closure.
pub fn choi_of<T: Real>(
    d_in: usize,
    d_out: usize,
    f: impl Fn(&ComplexMatrix<T>) -> Result<ComplexMatrix<T>>,
) -> Result<ComplexMatrix<T>> {
    let n = d_in * d_out;
    let mut choi = ComplexMatrix::zeros(n, n);
    for i in 0..d_in {
        for j in 0..d_in {
            let mut e = ComplexMatrix::zeros(d_in, d_in);
            e[(i, j)] = C::one();
            let y = f(&e)?;
            if y.shape() != (d_out, d_out) {
                return Err(Error::Shape(format!(
                    "map output is {}x{}, expected {d_out}x{d_out}",
                    y.rows(),
                    y.cols()
                )));
            }
            for r in 0..d_out {
                for c in 0..d_out {
                    choi[(i * d_out + r, j * d_out + c)] = y[(r, c)];
                }
            }
        }
    }
    Ok(choi)
}

/// Choi matrix (input `d_out`, output `d_in`) of the dual map, defined by
/// `Tr[Γ(X) Y] = Tr[X Γ†(Y)]`.
pub fn dual_map<T: Real>(
    choi: &ComplexMatrix<T>,
    d_in: usize,
    d_out: usize,
) -> Result<ComplexMatrix<T>> {
    let n = d_in * d_out;
    if choi.shape() != (n, n) {
        return Err(Error::Shape(format!(
            "Choi matrix is {}x{}, expected {n}x{n}",
            choi.rows(),
            choi.cols()
        )));
    }
    // dual[(k,i),(l,j)] = choi[(j,l),(i,k)]
    Ok(ComplexMatrix::from_fn(n, n, |r, c| {
        let (k, i) = (r / d_in, r % d_in);
        let (l, j) = (c / d_in, c % d_in);
        choi[(j * d_out + l, i * d_out + k)]
    }))
}

/// `(id_A ⊗ Λ)(ρ)` for `ρ` on `A ⊗ B`, with `Λ` given by its Choi matrix.
pub fn apply_on_second<T: Real>(
    choi: &ComplexMatrix<T>,
    rho: &ComplexMatrix<T>,
    d_a: usize,
    d_in: usize,
    d_out: usize,
) -> Result<ComplexMatrix<T>> {
    if rho.shape() != (d_a * d_in, d_a * d_in) {
        return Err(Error::Shape(format!(
            "operator is {}x{}, expected {n}x{n}",
            rho.rows(),
            rho.cols(),
            n = d_a * d_in
        )));
    }
    let n = d_a * d_out;
    let mut out = ComplexMatrix::zeros(n, n);
    for a in 0..d_a {
        for b in 0..d_a {
            let block =
                ComplexMatrix::from_fn(d_in, d_in, |k, l| rho[(a * d_in + k, b * d_in + l)]);
            let y = apply_choi(choi, &block, d_in, d_out)?;
            for r in 0..d_out {
                for c in 0..d_out {
                    out[(a * d_out + r, b * d_out + c)] = y[(r, c)];
                }
            }
        }
    }
    Ok(out)
}

/// Operators produced along the compilation pipeline, kept for auditing.
#[derive(Clone, Debug, PartialEq)]
pub struct Intermediates<T> {
    /// Positive factor applied to the input witness.
    pub scale: T,
    /// `Tr_A W` after rescaling.
    pub w_b: ComplexMatrix<T>,
    pub p_b: ComplexMatrix<T>,
    pub w_prime: ComplexMatrix<T>,
    pub w_double_prime: ComplexMatrix<T>,
    pub v: ComplexMatrix<T>,
    pub v_prime: ComplexMatrix<T>,
    /// Choi matrix of the unital map `Γ` (equal to `W″`).
    pub gamma_choi: ComplexMatrix<T>,
    /// Choi matrix of the trace-preserving dual `Γ†`.
    pub gamma_dual_choi: ComplexMatrix<T>,
}

/// Choi representation of the compiled map together with its certificates.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledMap<T> {
    pub choi: HermitianOperator<T>,
    pub d_in: usize,
    pub d_out: usize,
    /// Output dimension of the system factor; `d_out = 2 · d_sys`.
    pub d_sys: usize,
    /// `max_X |Tr Λ(X) − Tr X|` over the matrix-unit basis.
    pub trace_preserving_residual: T,
    /// `max |Tr_A W″ − I|`.
    pub reduction_residual: T,
    /// `max |V†V + V′†V′ − I|`.
    pub completeness_residual: T,
    /// Smallest output eigenvalue over the sampled pure-state inputs.
    pub positivity_min_eigenvalue: T,
    /// Smallest `Tr(W σ)` over the sampled pure product states (rescaled `W`).
    pub product_min_expectation: T,
    pub support_rank: usize,
    pub intermediates: Intermediates<T>,
    pub warnings: Vec<String>,
}

/// Expectation of `P_+ ⊗ |0⟩⟨0|` and trace norm of `(id ⊗ Λ)ρ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Detection<T> {
    pub expectation: T,
    pub norm: T,
    pub detected: bool,
}

fn construction_error(stage: &str, e: Error) -> Error {
    match e {
        Error::NotPsd(l) => Error::Construction(format!(
            "{stage} is not positive semidefinite (min eigenvalue {l:e})"
        )),
        other => other,
    }
}

impl<T: Real> CompiledMap<T> {
    /// `Λ(X)` for a `d_in × d_in` input.
    pub fn apply(&self, x: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        apply_choi(self.choi.matrix(), x, self.d_in, self.d_out)
    }

    /// `(id ⊗ Λ)ρ` as an operator on `A ⊗ A′ ⊗ flag`.
    pub fn apply_to_state(&self, rho: &DensityMatrix<T>) -> Result<HermitianOperator<T>> {
        let dims = rho.dims();
        if dims.len() != 2 || dims[1] != self.d_in || dims[0] != self.d_sys {
            return Err(Error::Shape(format!(
                "compiled map expects a state on {}⊗{}, got dims {dims:?}",
                self.d_sys, self.d_in
            )));
        }
        let out = apply_on_second(
            self.choi.matrix(),
            rho.matrix(),
            dims[0],
            self.d_in,
            self.d_out,
        )?;
        Ok(HermitianOperator::new_unchecked(
            vec![dims[0], self.d_sys, 2],
            out.hermitian_part(),
        ))
    }
}

/// Builds the trace-preserving positive map associated with `w`.
pub fn compile<T: Real>(w: &Witness<T>, rank_tol: T) -> Result<CompiledMap<T>> {
    let (d_a, d_b) = w.dims();
    let tol = T::tolerances();
    let mut warnings = Vec::new();

    // (1) rescale so that λ_max(Tr_A W) ≤ 1
    let w_b_raw = partial_trace(&w.op, &[1])?;
    let lam_max = eigh(w_b_raw.matrix())?.max();
    let scale = if lam_max > T::one() {
        T::one() / lam_max
    } else {
        T::one()
    };
    let w_mat = w.op.matrix().scale(scale);
    let w_op = HermitianOperator::new_unchecked(vec![d_a, d_b], w_mat.clone());

    // (2) support of the reduction
    let w_b = partial_trace(&w_op, &[1])?;
    let p_b =
        support_projector(&w_b, rank_tol).map_err(|e| construction_error("reduction Tr_A W", e))?;
    let support_rank = p_b.trace().round().to_usize().unwrap_or(0);
    let p_perp = &ComplexMatrix::identity(d_b) - p_b.matrix();

    // (3) W′ = W + I ⊗ P⊥
    let w_prime = &w_mat + &kron(&ComplexMatrix::identity(d_a), &p_perp)?;
    let w_prime_op = HermitianOperator::new_unchecked(vec![d_a, d_b], w_prime.clone());

    // (4)-(6) normalize the reduction to the identity
    let w_prime_b = partial_trace(&w_prime_op, &[1])?;
    let full = support_projector(&w_prime_b, rank_tol)
        .map_err(|e| construction_error("reduction Tr_A W′", e))?;
    if full.matrix().max_abs_diff(&ComplexMatrix::identity(d_b)) > T::lit(1e-6).max(tol.herm) {
        return Err(Error::Numerical("reduction of W′ is rank deficient".into()));
    }
    let s = inv_sqrt_on_support(&w_prime_b, rank_tol)?;
    let lift = kron(&ComplexMatrix::identity(d_a), s.matrix())?;
    let w_double_prime = (&(&lift * &w_prime) * &lift).hermitian_part();
    let reduction = partial_trace(
        &HermitianOperator::new_unchecked(vec![d_a, d_b], w_double_prime.clone()),
        &[1],
    )?;
    let reduction_residual = reduction
        .matrix()
        .max_abs_diff(&ComplexMatrix::identity(d_b));
    if reduction_residual > T::lit(1e-8).max(tol.herm) {
        return Err(Error::Numerical(format!(
            "Tr_A W″ deviates from the identity by {:e}",
            reduction_residual.as_f64()
        )));
    }

    // (7)-(8) Γ has Choi matrix W″ (input A, output B); Γ† maps B to A
    let gamma_choi = w_double_prime.clone();
    let gamma_dual_choi = dual_map(&gamma_choi, d_a, d_b)?;

    // (9) local filter and its completion
    let sqrt_wb = sqrt_psd(&w_prime_b)?;
    let v = sqrt_wb.matrix() * p_b.matrix();
    let vdv = &v.adjoint() * &v;
    let comp = HermitianOperator::new_unchecked(
        vec![d_b],
        (&ComplexMatrix::identity(d_b) - &vdv).hermitian_part(),
    );
    let v_prime = sqrt_psd(&comp)
        .map_err(|e| construction_error("I − V†V", e))?
        .into_matrix();
    let completeness_residual =
        (&vdv + &(&v_prime.adjoint() * &v_prime)).max_abs_diff(&ComplexMatrix::identity(d_b));

    // (10)-(11) Λ(X) = Γ†(V X V†) ⊗ |0⟩⟨0| + Γ†(V′ X V′†) ⊗ |1⟩⟨1|
    let flag0 = ComplexMatrix::from_diag(&[T::one(), T::zero()]);
    let flag1 = ComplexMatrix::from_diag(&[T::zero(), T::one()]);
    let d_out = 2 * d_a;
    let branch = |k: &ComplexMatrix<T>, x: &ComplexMatrix<T>| -> Result<ComplexMatrix<T>> {
        let filtered = &(k * x) * &k.adjoint();
        apply_choi(&gamma_dual_choi, &filtered, d_b, d_a)
    };
    let choi = choi_of(d_b, d_out, |x| {
        let y0 = kron(&branch(&v, x)?, &flag0)?;
        let y1 = kron(&branch(&v_prime, x)?, &flag1)?;
        Ok(&y0 + &y1)
    })?;
    let choi = HermitianOperator::new_unchecked(vec![d_b, d_a, 2], choi.hermitian_part());

    let mut map = CompiledMap {
        choi,
        d_in: d_b,
        d_out,
        d_sys: d_a,
        trace_preserving_residual: T::zero(),
        reduction_residual,
        completeness_residual,
        positivity_min_eigenvalue: T::zero(),
        product_min_expectation: T::zero(),
        support_rank,
        intermediates: Intermediates {
            scale,
            w_b: w_b.into_matrix(),
            p_b: p_b.into_matrix(),
            w_prime,
            w_double_prime,
            v,
            v_prime,
            gamma_choi,
            gamma_dual_choi,
        },
        warnings: Vec::new(),
    };

    // certificates
    let mut tp = T::zero();
    for i in 0..d_b {
        for j in 0..d_b {
            let mut e = ComplexMatrix::zeros(d_b, d_b);
            e[(i, j)] = C::one();
            let expect = if i == j { C::one() } else { C::zero() };
            tp = tp.max((map.apply(&e)?.trace() - expect).norm());
        }
    }
    map.trace_preserving_residual = tp;
    if tp > T::lit(1e-8).max(tol.herm) {
        warnings.push(format!(
            "trace-preservation residual {:e} above 1e-8",
            tp.as_f64()
        ));
    }

    let mut rng = seeded_rng(SPOT_CHECK_SEED);
    let mut pos_min = T::infinity();
    let mut prod_min = T::infinity();
    for _ in 0..SPOT_CHECK_SAMPLES {
        let psi: Vec<C<T>> = random_pure_vector(d_b, &mut rng);
        let out = map.apply(&ComplexMatrix::projector(&psi))?;
        pos_min = pos_min.min(eigh(&out)?.min());
        let sigma = random_pure_product::<T, _>(&[d_a, d_b], &mut rng)?;
        prod_min = prod_min.min(w_mat.trace_product(sigma.matrix())?.re);
    }
    map.positivity_min_eigenvalue = pos_min;
    map.product_min_expectation = prod_min;
    if prod_min < -tol.psd {
        warnings.push(format!(
            "witness is negative on a sampled product state (Tr(Wσ) = {:e}); it is not a valid witness",
            prod_min.as_f64()
        ));
    }
    if pos_min < -T::lit(1e-8).max(tol.psd) {
        warnings.push(format!(
            "compiled map produced a negative eigenvalue {:e} on a sampled pure input",
            pos_min.as_f64()
        ));
    }
    map.warnings = warnings;
    Ok(map)
}

/// Applies `id ⊗ Λ` and reports the `P_+ ⊗ |0⟩⟨0|` expectation and the
/// output trace norm.
pub fn detect<T: Real>(map: &CompiledMap<T>, rho: &DensityMatrix<T>) -> Result<Detection<T>> {
    let out = map.apply_to_state(rho)?;
    let d = map.d_sys;
    let m = out.matrix();
    let mut acc = C::<T>::zero();
    for i in 0..d {
        for j in 0..d {
            acc += m[(i * 2 * d + i * 2, j * 2 * d + j * 2)];
        }
    }
    let expectation = acc.re / T::lit(d as f64);
    let norm = trace_norm(m)?;
    Ok(Detection {
        expectation,
        norm,
        detected: norm > T::one() + T::tolerances().detect,
    })
}
