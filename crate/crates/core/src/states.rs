//! Named states and random ensembles.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, C};
use crate::tensor::{kron, kron_vec, ComplexMatrix, DensityMatrix};

/// Deterministic RNG used by every seeded constructor.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> C<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C::new(T::lit(re), T::lit(im))
}

fn normalized<T: Real>(v: &[C<T>]) -> Vec<C<T>> {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    v.iter().map(|z| *z / n).collect()
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d < 2) {
        return Err(Error::Argument(format!(
            "every subsystem dimension must be at least 2, got {dims:?}"
        )));
    }
    Ok(())
}

/// Uniformly random unit vector in `C^d`.
pub fn random_pure_vector<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C<T>> {
    let v: Vec<C<T>> = (0..d).map(|_| gaussian(rng)).collect();
    normalized(&v)
}

/// Haar-random unitary (Gram-Schmidt on a complex Ginibre matrix).
pub fn haar_unitary<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix<T> {
    let mut cols: Vec<Vec<C<T>>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<C<T>> = (0..d).map(|_| gaussian(rng)).collect();
        for q in &cols {
            let proj = q
                .iter()
                .zip(&v)
                .fold(C::zero(), |acc, (a, b)| acc + a.conj() * *b);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= *y * proj;
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if n > T::lit(1e-6) {
            cols.push(v.iter().map(|z| *z / n).collect());
        }
    }
    ComplexMatrix::from_fn(d, d, |r, c| cols[c][r])
}

/// `|ψ₁⟩⊗…⊗|ψₙ⟩⟨…|`; each factor is normalized.
pub fn pure_product<T: Real>(factors: &[Vec<C<T>>]) -> Result<DensityMatrix<T>> {
    if factors.is_empty() {
        return Err(Error::Argument(
            "product state needs at least one factor".into(),
        ));
    }
    let dims: Vec<usize> = factors.iter().map(Vec::len).collect();
    check_dims(&dims)?;
    let psi = factors
        .iter()
        .skip(1)
        .fold(normalized(&factors[0]), |acc, f| {
            kron_vec(&acc, &normalized(f))
        });
    DensityMatrix::from_pure(dims, &psi)
}

/// Product of independent random pure states.
pub fn random_pure_product<T: Real, R: Rng + ?Sized>(
    dims: &[usize],
    rng: &mut R,
) -> Result<DensityMatrix<T>> {
    check_dims(dims)?;
    let factors: Vec<Vec<C<T>>> = dims.iter().map(|&d| random_pure_vector(d, rng)).collect();
    pure_product(&factors)
}

/// Product of independent random mixed states (each a Ginibre state).
pub fn random_mixed_product<T: Real, R: Rng + ?Sized>(
    dims: &[usize],
    rng: &mut R,
) -> Result<DensityMatrix<T>> {
    check_dims(dims)?;
    let mut m = ComplexMatrix::<T>::identity(1);
    for &d in dims {
        m = kron(&m, &ginibre_matrix(d, rng))?;
    }
    DensityMatrix::new(dims.to_vec(), m)
}

/// `P_+ = |ψ₊⟩⟨ψ₊|` with `ψ₊ = d^{-1/2} Σᵢ |i⟩⊗|i⟩`.
pub fn max_entangled<T: Real>(d: usize) -> Result<DensityMatrix<T>> {
    if d < 2 {
        return Err(Error::Argument(format!(
            "maximally entangled state needs d >= 2, got {d}"
        )));
    }
    let mut psi = vec![C::zero(); d * d];
    for i in 0..d {
        psi[i * d + i] = C::one();
    }
    DensityMatrix::from_pure(vec![d, d], &psi)
}

/// `I/D` on the given subsystems.
pub fn maximally_mixed<T: Real>(dims: &[usize]) -> Result<DensityMatrix<T>> {
    check_dims(dims)?;
    let d: usize = dims.iter().product();
    DensityMatrix::new(
        dims.to_vec(),
        ComplexMatrix::identity(d).scale(T::one() / T::lit(d as f64)),
    )
}

/// `p·P_+ + (1-p)·I/d²`.
pub fn isotropic<T: Real>(d: usize, p: T) -> Result<DensityMatrix<T>> {
    if !(T::zero()..=T::one()).contains(&p) {
        return Err(Error::Argument(format!("mixing weight {p} outside [0, 1]")));
    }
    convex_mixture(
        &[max_entangled(d)?, maximally_mixed(&[d, d])?],
        &[p, T::one() - p],
    )
}

/// The four product vectors of the three-qubit "Shifts" unextendible product
/// basis: `|0,1,+⟩, |1,+,0⟩, |+,0,1⟩, |−,−,−⟩`.
pub fn upb_shifts_vectors<T: Real>() -> [Vec<C<T>>; 4] {
    let h = T::FRAC_1_SQRT_2();
    let zero = vec![C::one(), C::zero()];
    let one = vec![C::zero(), C::one()];
    let plus = vec![C::new(h, T::zero()), C::new(h, T::zero())];
    let minus = vec![C::new(h, T::zero()), C::new(-h, T::zero())];
    let triple = |a: &[C<T>], b: &[C<T>], c: &[C<T>]| kron_vec(&kron_vec(a, b), c);
    [
        triple(&zero, &one, &plus),
        triple(&one, &plus, &zero),
        triple(&plus, &zero, &one),
        triple(&minus, &minus, &minus),
    ]
}

/// `(I − Σᵢ |ψᵢ⟩⟨ψᵢ|) · scale` on three qubits, without validation.
pub fn upb_complement<T: Real>(scale: T) -> ComplexMatrix<T> {
    let mut m = ComplexMatrix::<T>::identity(8);
    for v in upb_shifts_vectors::<T>() {
        m = &m - &ComplexMatrix::projector(&v);
    }
    m.scale(scale)
}

/// Normalized projector onto the complement of the Shifts UPB: a biseparable,
/// bound-entangled three-qubit state of rank 4.
pub fn upb_shifts3<T: Real>() -> DensityMatrix<T> {
    DensityMatrix::new(vec![2, 2, 2], upb_complement(T::lit(0.25)))
        .expect("UPB complement is a valid state")
}

fn ginibre_matrix<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix<T> {
    let g = ComplexMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let m = (&g * &g.adjoint()).hermitian_part();
    let tr = m.trace().re;
    m.scale(T::one() / tr)
}

/// `G·G† / Tr(G·G†)` with i.i.d. standard complex Gaussian `G`, seeded.
pub fn ginibre_random<T: Real>(dims: &[usize], seed: u64) -> Result<DensityMatrix<T>> {
    ginibre_random_with(dims, &mut seeded_rng(seed))
}

pub fn ginibre_random_with<T: Real, R: Rng + ?Sized>(
    dims: &[usize],
    rng: &mut R,
) -> Result<DensityMatrix<T>> {
    check_dims(dims)?;
    let d: usize = dims.iter().product();
    DensityMatrix::new(dims.to_vec(), ginibre_matrix(d, rng))
}

/// `Σ pᵢ ρᵢ`.
pub fn convex_mixture<T: Real>(
    states: &[DensityMatrix<T>],
    weights: &[T],
) -> Result<DensityMatrix<T>> {
    if states.is_empty() || states.len() != weights.len() {
        return Err(Error::Argument(format!(
            "{} states but {} weights",
            states.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|&w| w < T::zero() || !w.is_finite()) {
        return Err(Error::Argument(
            "mixture weights must be finite and nonnegative".into(),
        ));
    }
    let total: T = weights.iter().copied().sum();
    if (total - T::one()).abs() > T::tolerances().trace {
        return Err(Error::Argument(format!(
            "mixture weights sum to {total}, not 1"
        )));
    }
    let dims = states[0].dims();
    if let Some(bad) = states.iter().find(|s| s.dims() != dims) {
        return Err(Error::Shape(format!(
            "mixture components have dims {dims:?} and {:?}",
            bad.dims()
        )));
    }
    let mut m = ComplexMatrix::zeros(states[0].dim(), states[0].dim());
    for (s, &w) in states.iter().zip(weights) {
        m = &m + &s.matrix().scale(w);
    }
    DensityMatrix::new(dims.to_vec(), m)
}

/// Random separable state: a mixture of up to `max_terms` random product
/// states (pure or mixed factors) with Dirichlet-like weights.
pub fn random_separable<T: Real, R: Rng + ?Sized>(
    dims: &[usize],
    max_terms: usize,
    rng: &mut R,
) -> Result<DensityMatrix<T>> {
    let terms = rng.random_range(1..=max_terms.max(1));
    let mut states = Vec::with_capacity(terms);
    let mut raw = Vec::with_capacity(terms);
    for _ in 0..terms {
        states.push(if rng.random_bool(0.5) {
            random_pure_product(dims, rng)?
        } else {
            random_mixed_product(dims, rng)?
        });
        raw.push(-rng.random_range(1e-9f64..1.0).ln());
    }
    let total: f64 = raw.iter().sum();
    let weights: Vec<T> = raw.iter().map(|w| T::lit(w / total)).collect();
    let total_t: T = weights.iter().copied().sum();
    let weights: Vec<T> = weights.into_iter().map(|w| w / total_t).collect();
    convex_mixture(&states, &weights)
}

/// Declarative description of a state, parsable from JSON or the CLI's
/// `NAME[:params]` syntax.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    /// Random pure product (seeded) unless explicit vectors are given as
    /// `[re, im]` pairs.
    PureProduct {
        dims: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        vectors: Option<Vec<Vec<[f64; 2]>>>,
        #[serde(default)]
        seed: u64,
    },
    MaxEntangled {
        d: usize,
    },
    UpbShifts3,
    GinibreRandom {
        dims: Vec<usize>,
        seed: u64,
    },
    MaximallyMixed {
        dims: Vec<usize>,
    },
    Isotropic {
        d: usize,
        p: f64,
    },
    ConvexMixture {
        components: Vec<StateSpec>,
        weights: Vec<f64>,
    },
}

impl StateSpec {
    /// Parses `upb3`, `maxent:D`, `product:D1,D2,…`, `ginibre:D1,D2,…`,
    /// `mixed:D1,…` or `isotropic:D,P`. `seed` feeds the random kinds.
    pub fn parse_builtin(spec: &str, seed: u64) -> Result<Self> {
        let (name, params) = match spec.split_once(':') {
            Some((n, p)) => (n.trim(), p.trim()),
            None => (spec.trim(), ""),
        };
        let list = |p: &str| -> Result<Vec<usize>> {
            p.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Argument(format!("bad dimension '{t}' in '{spec}'")))
                })
                .collect()
        };
        let need_params = |p: &str| -> Result<()> {
            if p.is_empty() {
                Err(Error::Argument(format!(
                    "builtin '{name}' needs parameters, e.g. '{name}:2,2'"
                )))
            } else {
                Ok(())
            }
        };
        match name {
            "upb3" | "upb_shifts3" => Ok(Self::UpbShifts3),
            "maxent" | "max_entangled" => {
                let d = if params.is_empty() {
                    2
                } else {
                    list(params)?[0]
                };
                Ok(Self::MaxEntangled { d })
            }
            "product" => {
                need_params(params)?;
                Ok(Self::PureProduct {
                    dims: list(params)?,
                    vectors: None,
                    seed,
                })
            }
            "ginibre" => {
                need_params(params)?;
                Ok(Self::GinibreRandom {
                    dims: list(params)?,
                    seed,
                })
            }
            "mixed" => {
                need_params(params)?;
                Ok(Self::MaximallyMixed {
                    dims: list(params)?,
                })
            }
            "isotropic" => {
                let (d, p) = params.split_once(',').ok_or_else(|| {
                    Error::Argument(format!("isotropic needs 'isotropic:D,P', got '{spec}'"))
                })?;
                let d = d
                    .trim()
                    .parse()
                    .map_err(|_| Error::Argument(format!("bad dimension in '{spec}'")))?;
                let p = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::Argument(format!("bad weight in '{spec}'")))?;
                Ok(Self::Isotropic { d, p })
            }
            _ => Err(Error::Argument(format!("unknown builtin state '{name}'"))),
        }
    }

    /// Short human label.
    pub fn label(&self) -> String {
        let join = |d: &[usize]| {
            d.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            Self::PureProduct { dims, .. } => format!("product:{}", join(dims)),
            Self::MaxEntangled { d } => format!("maxent:{d}"),
            Self::UpbShifts3 => "upb3".into(),
            Self::GinibreRandom { dims, seed } => format!("ginibre:{}@{seed}", join(dims)),
            Self::MaximallyMixed { dims } => format!("mixed:{}", join(dims)),
            Self::Isotropic { d, p } => format!("isotropic:{d},{p}"),
            Self::ConvexMixture { components, .. } => format!("mixture[{}]", components.len()),
        }
    }

    pub fn build<T: Real>(&self) -> Result<DensityMatrix<T>> {
        match self {
            Self::PureProduct {
                dims,
                vectors: None,
                seed,
            } => random_pure_product(dims, &mut seeded_rng(*seed)),
            Self::PureProduct {
                dims,
                vectors: Some(vs),
                ..
            } => {
                if vs.iter().map(Vec::len).ne(dims.iter().copied()) {
                    return Err(Error::Shape(format!(
                        "product vectors do not match dims {dims:?}"
                    )));
                }
                let factors: Vec<Vec<C<T>>> = vs
                    .iter()
                    .map(|v| {
                        v.iter()
                            .map(|[re, im]| C::new(T::lit(*re), T::lit(*im)))
                            .collect()
                    })
                    .collect();
                pure_product(&factors)
            }
            Self::MaxEntangled { d } => max_entangled(*d),
            Self::UpbShifts3 => Ok(upb_shifts3()),
            Self::GinibreRandom { dims, seed } => ginibre_random(dims, *seed),
            Self::MaximallyMixed { dims } => maximally_mixed(dims),
            Self::Isotropic { d, p } => isotropic(*d, T::lit(*p)),
            Self::ConvexMixture {
                components,
                weights,
            } => {
                let states = components
                    .iter()
                    .map(|c| c.build())
                    .collect::<Result<Vec<_>>>()?;
                let w: Vec<T> = weights.iter().map(|&x| T::lit(x)).collect();
                convex_mixture(&states, &w)
            }
        }
    }
}
