//! Empirical equivalence classes of permutation criteria.
//!
//! Two permutations are treated as equivalent when their trace norms agree on
//! every probe state within the match tolerance.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::SweepOptions;
use crate::error::{Error, Result};
use crate::perm::{apply_permutation, IndexPermutation};
use crate::scalar::{Real, C};
use crate::states::{ginibre_random_with, random_pure_product, seeded_rng};
use crate::tensor::{trace_norm, DensityMatrix};

/// Fewest probes `classify` accepts.
pub const MIN_PROBES: usize = 8;

/// Trace norms of one permutation on a fixed probe list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Fingerprint<T> {
    pub tau: IndexPermutation,
    pub norms: Vec<T>,
}

impl<T: Real> Fingerprint<T> {
    pub fn max_diff(&self, other: &Self) -> T {
        self.norms
            .iter()
            .zip(&other.norms)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PermClass<T> {
    /// Lexicographically smallest member.
    pub representative: IndexPermutation,
    pub members: Vec<IndexPermutation>,
    /// Fingerprint of the representative.
    pub norms: Vec<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EquivalenceClasses<T> {
    pub dims: Vec<usize>,
    pub classes: Vec<PermClass<T>>,
    pub probe_count: usize,
    pub tolerance: T,
    pub seed: u64,
}

impl<T: Real> EquivalenceClasses<T> {
    /// Class index containing `tau`.
    pub fn class_of(&self, tau: &IndexPermutation) -> Option<usize> {
        self.classes.iter().position(|c| c.members.contains(tau))
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// `norms[i] = ||L_τ(probes[i])||₁`.
pub fn fingerprint<T: Real>(
    tau: &IndexPermutation,
    probes: &[DensityMatrix<T>],
) -> Result<Fingerprint<T>> {
    let norms = probes
        .iter()
        .map(|rho| {
            if tau.n_parts() != rho.n_parts() {
                return Err(Error::Argument(format!(
                    "permutation {tau} acts on {} parts but probe has dims {:?}",
                    tau.n_parts(),
                    rho.dims()
                )));
            }
            trace_norm(&apply_permutation(rho, tau)?.mat)
        })
        .collect::<Result<_>>()?;
    Ok(Fingerprint {
        tau: tau.clone(),
        norms,
    })
}

/// Probe ensemble: one maximally entangled pair (with `|0⟩` elsewhere) per
/// subsystem pair of equal dimension, one random pure product, and Ginibre
/// states for the remainder.
pub fn probe_states<T: Real>(
    dims: &[usize],
    probe_count: usize,
    seed: u64,
) -> Result<Vec<DensityMatrix<T>>> {
    let mut rng = seeded_rng(seed);
    let n = dims.len();
    let mut probes = Vec::with_capacity(probe_count);
    'pairs: for s in 0..n {
        for t in (s + 1)..n {
            if probes.len() + 2 > probe_count {
                break 'pairs;
            }
            if dims[s] == dims[t] {
                probes.push(entangled_pair(dims, s, t)?);
            }
        }
    }
    if probes.len() < probe_count {
        probes.push(random_pure_product(dims, &mut rng)?);
    }
    while probes.len() < probe_count {
        let sub_seed: u64 = rng.random();
        probes.push(ginibre_random_with(dims, &mut seeded_rng(sub_seed))?);
    }
    Ok(probes)
}

fn entangled_pair<T: Real>(dims: &[usize], s: usize, t: usize) -> Result<DensityMatrix<T>> {
    let d: usize = dims.iter().product();
    let mut psi = vec![C::new(T::zero(), T::zero()); d];
    let mut digits = vec![0; dims.len()];
    for k in 0..dims[s] {
        digits[s] = k;
        digits[t] = k;
        psi[crate::tensor::encode(&digits, dims)] = C::new(T::one(), T::zero());
    }
    DensityMatrix::from_pure(dims.to_vec(), &psi)
}

/// Partitions all `(2n)!` slot permutations into classes of equal
/// fingerprints. Permutations are visited in lexicographic order and join the
/// first class whose representative matches within `1e-8`, so each
/// representative is the smallest member of its class.
pub fn classify<T: Real>(
    dims: &[usize],
    probe_count: usize,
    seed: u64,
    opts: &SweepOptions<T>,
) -> Result<EquivalenceClasses<T>> {
    if probe_count < MIN_PROBES {
        return Err(Error::Argument(format!(
            "classification needs at least {MIN_PROBES} probes, got {probe_count}"
        )));
    }
    let n = dims.len();
    if n == 0 {
        return Err(Error::Argument(
            "classification needs at least one subsystem".into(),
        ));
    }
    opts.check_budget(n)?;
    let tolerance = T::lit(1e-8).max(T::tolerances().detect);
    let probes = probe_states::<T>(dims, probe_count, seed)?;
    let prints: Vec<Fingerprint<T>> = IndexPermutation::all(n)
        .par_iter()
        .map(|tau| fingerprint(tau, &probes))
        .collect::<Result<_>>()?;

    let mut classes: Vec<PermClass<T>> = Vec::new();
    let mut reps: Vec<&Fingerprint<T>> = Vec::new();
    for fp in &prints {
        match reps.iter().position(|r| r.max_diff(fp) <= tolerance) {
            Some(k) => classes[k].members.push(fp.tau.clone()),
            None => {
                reps.push(fp);
                classes.push(PermClass {
                    representative: fp.tau.clone(),
                    members: vec![fp.tau.clone()],
                    norms: fp.norms.clone(),
                });
            }
        }
    }
    Ok(EquivalenceClasses {
        dims: dims.to_vec(),
        classes,
        probe_count,
        tolerance,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::ginibre_random;

    fn tau(s: &str) -> IndexPermutation {
        IndexPermutation::from_one_line(s).unwrap()
    }

    #[test]
    fn identity_fingerprint_is_all_ones() {
        let probes: Vec<_> = (0..5)
            .map(|k| ginibre_random::<f64>(&[2, 2], k).unwrap())
            .collect();
        let fp = fingerprint(&IndexPermutation::identity(2), &probes).unwrap();
        assert!(fp.norms.iter().all(|&x| (x - 1.0).abs() < 1e-12));
        assert!(fingerprint(&IndexPermutation::identity(3), &probes).is_err());
    }

    #[test]
    fn transposing_either_side_gives_the_same_fingerprint() {
        let probes: Vec<_> = (0..6)
            .map(|k| ginibre_random::<f64>(&[2, 2], 100 + k).unwrap())
            .collect();
        let a = fingerprint(&tau("1243"), &probes).unwrap();
        let b = fingerprint(&tau("2134"), &probes).unwrap();
        assert!(a.max_diff(&b) < 1e-12);
        let r = fingerprint(&tau("2413"), &probes).unwrap();
        let s = fingerprint(&tau("1324"), &probes).unwrap();
        assert!(r.max_diff(&s) < 1e-12);
        assert!(a.max_diff(&r) > 1e-3);
    }

    #[test]
    fn classify_two_qubits() {
        let classes = classify::<f64>(&[2, 2], 16, 3, &SweepOptions::default()).unwrap();
        assert_eq!(classes.len(), 3);
        let total: usize = classes.classes.iter().map(|c| c.members.len()).sum();
        assert_eq!(total, 24);
        assert_eq!(
            classes.classes[0].representative,
            IndexPermutation::identity(2)
        );
        let id = classes.class_of(&IndexPermutation::identity(2));
        assert_eq!(classes.class_of(&IndexPermutation::full_transpose(2)), id);
        assert_eq!(
            classes.class_of(&IndexPermutation::subsystem_swap(2, 0, 1)),
            id
        );
        assert_ne!(
            classes.class_of(&tau("1243")),
            classes.class_of(&tau("2413"))
        );
    }

    #[test]
    fn classify_argument_checks() {
        let opts = SweepOptions::<f64>::default();
        assert!(matches!(
            classify(&[2, 2], 4, 0, &opts),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            classify(&[2, 2, 2, 2], 8, 0, &opts),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn classification_is_reproducible() {
        let opts = SweepOptions::<f64>::default();
        let a = classify(&[2, 2], 8, 42, &opts).unwrap();
        let b = classify(&[2, 2], 8, 42, &opts).unwrap();
        assert_eq!(a, b);
    }
}
