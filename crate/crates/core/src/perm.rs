//! Index-permutation maps on multipartite operators.
//!
//! An `n`-partite operator is viewed as a tensor with `2n` slots: slot `2s-1`
//! carries the ket index of subsystem `s`, slot `2s` its bra index (1-based).
//! A permutation `τ` moves the value at input slot `s` to output slot `τ(s)`.
//! The output matrix takes the odd output slots as its row multi-index and the
//! even output slots as its column multi-index, both row-major.
//!
//! With this convention `τ = (34)` is the partial transpose of the second
//! subsystem and `τ = 2413` maps `ρ[(i,k),(j,l)]` to `R[(k,l),(i,j)]`, a
//! realignment. Unequal subsystem dimensions yield rectangular outputs.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tensor::{decode, encode, trace_norm, ComplexMatrix, DensityMatrix, HermitianOperator};

/// A permutation of the `2n` tensor slots of an `n`-partite operator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexPermutation {
    // 0-based images: slot s moves to map[s]
    map: Vec<usize>,
}

impl IndexPermutation {
    /// From 1-based images `τ(1), …, τ(2n)`.
    pub fn new(one_based: &[usize]) -> Result<Self> {
        if one_based.is_empty() || !one_based.len().is_multiple_of(2) {
            return Err(Error::Argument(format!(
                "permutation must act on an even, nonzero number of slots (got {})",
                one_based.len()
            )));
        }
        let len = one_based.len();
        let mut seen = vec![false; len];
        for &t in one_based {
            if t == 0 || t > len || std::mem::replace(&mut seen[t - 1], true) {
                return Err(Error::Argument(format!(
                    "{one_based:?} is not a bijection on 1..={len}"
                )));
            }
        }
        Ok(Self {
            map: one_based.iter().map(|t| t - 1).collect(),
        })
    }

    pub fn identity(n_parts: usize) -> Self {
        Self {
            map: (0..2 * n_parts).collect(),
        }
    }

    /// Swaps ket and bra slots of every listed subsystem (0-based indices).
    pub fn partial_transpose(n_parts: usize, subsystems: &[usize]) -> Result<Self> {
        let set = crate::tensor::subsystem_set(subsystems, n_parts)?;
        let mut map: Vec<usize> = (0..2 * n_parts).collect();
        for s in set {
            map.swap(2 * s, 2 * s + 1);
        }
        Ok(Self { map })
    }

    /// Transposes every subsystem.
    pub fn full_transpose(n_parts: usize) -> Self {
        Self::partial_transpose(n_parts, &(0..n_parts).collect::<Vec<_>>())
            .expect("valid subsystems")
    }

    /// Realigns subsystems `s` and `t` (0-based), fixing every other slot: the
    /// four slots `(ket s, bra s, ket t, bra t)` move like `2413`.
    pub fn realignment(n_parts: usize, s: usize, t: usize) -> Result<Self> {
        if s == t {
            return Err(Error::Argument(format!(
                "realignment needs two distinct subsystems, got {s} twice"
            )));
        }
        if s >= n_parts || t >= n_parts {
            return Err(Error::Argument(format!(
                "subsystem pair ({s}, {t}) out of range for {n_parts} parts"
            )));
        }
        let mut map: Vec<usize> = (0..2 * n_parts).collect();
        let (ks, bs, kt, bt) = (2 * s, 2 * s + 1, 2 * t, 2 * t + 1);
        map[ks] = bs;
        map[bs] = bt;
        map[kt] = ks;
        map[bt] = kt;
        Ok(Self { map })
    }

    /// Exchanges subsystems `s` and `t` as a whole.
    pub fn subsystem_swap(n_parts: usize, s: usize, t: usize) -> Self {
        let mut map: Vec<usize> = (0..2 * n_parts).collect();
        map.swap(2 * s, 2 * t);
        map.swap(2 * s + 1, 2 * t + 1);
        Self { map }
    }

    /// Every permutation of `2n` slots in lexicographic order of one-line
    /// notation.
    pub fn all(n_parts: usize) -> Vec<Self> {
        (0..2 * n_parts)
            .permutations(2 * n_parts)
            .map(|map| Self { map })
            .collect()
    }

    /// Parses one-line (`2413`, `2,4,1,3`) or cycle (`(34)`, `(1 2)(3 4)`)
    /// notation. Cycle notation needs the part count.
    pub fn parse(s: &str, n_parts: usize) -> Result<Self> {
        let s = s.trim();
        let tau = if s.starts_with('(') {
            Self::from_cycles(s, n_parts)?
        } else {
            Self::from_one_line(s)?
        };
        if tau.n_parts() != n_parts {
            return Err(Error::Argument(format!(
                "permutation {tau} acts on {} parts, expected {n_parts}",
                tau.n_parts()
            )));
        }
        Ok(tau)
    }

    /// One-line notation: digits when every image is a single digit,
    /// otherwise comma-separated.
    pub fn from_one_line(s: &str) -> Result<Self> {
        let s = s.trim();
        let images: Vec<usize> = if s.contains(',') || s.contains(' ') {
            s.split([',', ' '])
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<usize>()
                        .map_err(|_| Error::Argument(format!("bad slot '{t}' in '{s}'")))
                })
                .collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|ch| {
                    ch.to_digit(10).map(|d| d as usize).ok_or_else(|| {
                        Error::Argument(format!("bad character '{ch}' in permutation '{s}'"))
                    })
                })
                .collect::<Result<_>>()?
        };
        Self::new(&images)
    }

    /// Cycle notation on `2n` slots; unlisted slots are fixed. `()` is the
    /// identity.
    pub fn from_cycles(s: &str, n_parts: usize) -> Result<Self> {
        let len = 2 * n_parts;
        let mut map: Vec<usize> = (0..len).collect();
        let mut touched = vec![false; len];
        let mut rest = s.trim();
        while !rest.is_empty() {
            let body_end = rest
                .strip_prefix('(')
                .and_then(|r| r.find(')'))
                .ok_or_else(|| Error::Argument(format!("malformed cycle notation '{s}'")))?;
            let body = &rest[1..=body_end];
            rest = rest[body_end + 2..].trim_start();
            let elems: Vec<usize> = if body.contains(',') || body.contains(' ') {
                body.split([',', ' '])
                    .filter(|t| !t.is_empty())
                    .map(|t| {
                        t.parse::<usize>()
                            .map_err(|_| Error::Argument(format!("bad slot '{t}' in '{s}'")))
                    })
                    .collect::<Result<_>>()?
            } else {
                body.chars()
                    .map(|ch| {
                        ch.to_digit(10).map(|d| d as usize).ok_or_else(|| {
                            Error::Argument(format!("bad character '{ch}' in '{s}'"))
                        })
                    })
                    .collect::<Result<_>>()?
            };
            for &e in &elems {
                if e == 0 || e > len || std::mem::replace(&mut touched[e - 1], true) {
                    return Err(Error::Argument(format!(
                        "slot {e} invalid or repeated in '{s}' ({len} slots)"
                    )));
                }
            }
            for (k, &e) in elems.iter().enumerate() {
                map[e - 1] = elems[(k + 1) % elems.len()] - 1;
            }
        }
        Ok(Self { map })
    }

    #[inline]
    pub fn n_parts(&self) -> usize {
        self.map.len() / 2
    }

    #[inline]
    pub fn n_slots(&self) -> usize {
        self.map.len()
    }

    /// 1-based image of 1-based slot `s`.
    pub fn image(&self, s: usize) -> usize {
        self.map[s - 1] + 1
    }

    /// 1-based images in slot order.
    pub fn one_based(&self) -> Vec<usize> {
        self.map.iter().map(|t| t + 1).collect()
    }

    pub(crate) fn zero_based(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(s, &t)| s == t)
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Self) -> Result<Self> {
        if self.map.len() != first.map.len() {
            return Err(Error::Argument(
                "cannot compose permutations of different sizes".into(),
            ));
        }
        Ok(Self {
            map: first.map.iter().map(|&s| self.map[s]).collect(),
        })
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (s, &t) in self.map.iter().enumerate() {
            inv[t] = s;
        }
        Self { map: inv }
    }

    pub fn one_line(&self) -> String {
        if self.map.len() <= 9 {
            self.map
                .iter()
                .map(|t| char::from(b'1' + *t as u8))
                .collect()
        } else {
            self.map.iter().map(|t| (t + 1).to_string()).join(",")
        }
    }
}

impl fmt::Display for IndexPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.one_line())
    }
}

impl FromStr for IndexPermutation {
    type Err = Error;

    /// One-line notation only; cycle notation needs [`IndexPermutation::parse`].
    fn from_str(s: &str) -> Result<Self> {
        Self::from_one_line(s)
    }
}

impl Serialize for IndexPermutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.one_line())
    }
}

impl<'de> Deserialize<'de> for IndexPermutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Self::from_one_line(&s).map_err(serde::de::Error::custom)
    }
}

/// For each slot, whether `τ(s)` has a different parity than `s`, i.e. whether
/// the vector carried by that slot ends up complex-conjugated.
pub fn conjugation_parity(tau: &IndexPermutation) -> Vec<bool> {
    tau.map
        .iter()
        .enumerate()
        .map(|(s, &t)| (s % 2) != (t % 2))
        .collect()
}

/// Result of a slot permutation: a possibly rectangular matrix whose rows are
/// indexed by the odd output slots and columns by the even ones.
#[derive(Clone, Debug, PartialEq)]
pub struct PermutedOperator<T> {
    pub row_dims: Vec<usize>,
    pub col_dims: Vec<usize>,
    pub mat: ComplexMatrix<T>,
}

impl<T: Real> PermutedOperator<T> {
    /// Views a square multipartite operator as a slot tensor.
    pub fn from_operator(op: &HermitianOperator<T>) -> Self {
        Self {
            row_dims: op.dims().to_vec(),
            col_dims: op.dims().to_vec(),
            mat: op.matrix().clone(),
        }
    }

    /// Dimensions of slots `1..=2n`, interleaving rows and columns.
    pub fn slot_dims(&self) -> Vec<usize> {
        self.row_dims
            .iter()
            .zip(&self.col_dims)
            .flat_map(|(&r, &c)| [r, c])
            .collect()
    }

    pub fn n_parts(&self) -> usize {
        self.row_dims.len()
    }

    /// Applies a further permutation; `a.permute(τ₁).permute(τ₂)` equals
    /// `a.permute(τ₂ ∘ τ₁)`.
    pub fn permute(&self, tau: &IndexPermutation) -> Result<Self> {
        if tau.n_parts() != self.n_parts() {
            return Err(Error::Argument(format!(
                "permutation acts on {} parts but operator has {}",
                tau.n_parts(),
                self.n_parts()
            )));
        }
        let n = self.n_parts();
        let in_slot_dims = self.slot_dims();
        let mut out_slot_dims = vec![0; 2 * n];
        for (s, &t) in tau.zero_based().iter().enumerate() {
            out_slot_dims[t] = in_slot_dims[s];
        }
        let row_dims: Vec<usize> = out_slot_dims.iter().step_by(2).copied().collect();
        let col_dims: Vec<usize> = out_slot_dims.iter().skip(1).step_by(2).copied().collect();
        let rows: usize = row_dims.iter().product();
        let cols: usize = col_dims.iter().product();
        let mut out = ComplexMatrix::zeros(rows, cols);

        let mut ri = vec![0; n];
        let mut ci = vec![0; n];
        let mut a = vec![0; 2 * n];
        let mut b = vec![0; 2 * n];
        let mut ro = vec![0; n];
        let mut co = vec![0; n];
        for r in 0..self.mat.rows() {
            decode(r, &self.row_dims, &mut ri);
            for c in 0..self.mat.cols() {
                decode(c, &self.col_dims, &mut ci);
                for k in 0..n {
                    a[2 * k] = ri[k];
                    a[2 * k + 1] = ci[k];
                }
                for (s, &t) in tau.zero_based().iter().enumerate() {
                    b[t] = a[s];
                }
                for k in 0..n {
                    ro[k] = b[2 * k];
                    co[k] = b[2 * k + 1];
                }
                out[(encode(&ro, &row_dims), encode(&co, &col_dims))] = self.mat[(r, c)];
            }
        }
        Ok(Self {
            row_dims,
            col_dims,
            mat: out,
        })
    }

    pub fn trace_norm(&self) -> Result<T> {
        trace_norm(&self.mat)
    }
}

/// `L_τ(ρ)` for any operator with a subsystem signature.
pub fn permute_operator<T: Real>(
    op: &HermitianOperator<T>,
    tau: &IndexPermutation,
) -> Result<PermutedOperator<T>> {
    PermutedOperator::from_operator(op).permute(tau)
}

/// `L_τ(ρ)`.
pub fn apply_permutation<T: Real>(
    rho: &DensityMatrix<T>,
    tau: &IndexPermutation,
) -> Result<PermutedOperator<T>> {
    permute_operator(rho.as_operator(), tau)
}

/// Realignment of subsystems `s`, `t` (0-based), identity on the rest.
pub fn realign_pair<T: Real>(
    rho: &DensityMatrix<T>,
    s: usize,
    t: usize,
) -> Result<PermutedOperator<T>> {
    apply_permutation(rho, &IndexPermutation::realignment(rho.n_parts(), s, t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::C;
    use crate::tensor::partial_transpose;

    fn tau(s: &str) -> IndexPermutation {
        IndexPermutation::from_one_line(s).unwrap()
    }

    fn test_state() -> DensityMatrix<f64> {
        // fixed full-rank 2⊗3 state with complex off-diagonals
        let d = 6;
        let g = ComplexMatrix::from_fn(d, d, |r, c| {
            C::new(
                ((r * 5 + c * 3) % 7) as f64 - 3.0,
                ((r + c * 2) % 5) as f64 - 2.0,
            )
        });
        let m = &g * &g.adjoint();
        let tr = m.trace().re;
        DensityMatrix::new(vec![2, 3], m.scale(1.0 / tr)).unwrap()
    }

    #[test]
    fn parsing_and_notation() {
        assert_eq!(tau("2413").one_based(), vec![2, 4, 1, 3]);
        assert_eq!(tau("2,4,1,3"), tau("2413"));
        // partially specified shorthand is not completed
        assert!(IndexPermutation::parse("1*2***", 3).is_err());
        assert_eq!(IndexPermutation::parse("(34)", 2).unwrap(), tau("1243"));
        assert_eq!(
            IndexPermutation::parse("(1 2)(3 4)", 2).unwrap(),
            tau("2143")
        );
        assert_eq!(IndexPermutation::parse("(132)", 2).unwrap(), tau("3124"));
        assert_eq!(
            IndexPermutation::parse("()", 3).unwrap(),
            IndexPermutation::identity(3)
        );
        assert!(IndexPermutation::from_one_line("2213").is_err());
        assert!(IndexPermutation::from_one_line("123").is_err());
        assert!(IndexPermutation::parse("(35)", 2).is_err());
        assert!(IndexPermutation::parse("(33)", 2).is_err());
        assert!(IndexPermutation::parse("2413", 3).is_err());
        let long = IndexPermutation::identity(5);
        assert_eq!(long.one_line(), "1,2,3,4,5,6,7,8,9,10");
        assert_eq!(
            IndexPermutation::from_one_line(&long.one_line()).unwrap(),
            long
        );
    }

    #[test]
    fn named_constructors() {
        assert_eq!(
            IndexPermutation::partial_transpose(2, &[1]).unwrap(),
            tau("1243")
        );
        assert_eq!(IndexPermutation::realignment(2, 0, 1).unwrap(), tau("2413"));
        assert_eq!(
            IndexPermutation::realignment(3, 1, 2).unwrap(),
            tau("124635")
        );
        assert_eq!(IndexPermutation::full_transpose(2), tau("2143"));
        assert_eq!(IndexPermutation::subsystem_swap(2, 0, 1), tau("3412"));
        assert!(IndexPermutation::realignment(2, 1, 1).is_err());
        assert_eq!(IndexPermutation::all(2).len(), 24);
        assert_eq!(IndexPermutation::all(2)[0], IndexPermutation::identity(2));
        assert_eq!(IndexPermutation::all(2)[23], tau("4321"));
    }

    #[test]
    fn compose_and_inverse() {
        let a = tau("2413");
        let b = tau("1243");
        let ab = a.compose(&b).unwrap();
        for s in 1..=4 {
            assert_eq!(ab.image(s), a.image(b.image(s)));
        }
        assert!(a.compose(&a.inverse()).unwrap().is_identity());
    }

    #[test]
    fn conjugation_parity_examples() {
        assert_eq!(
            conjugation_parity(&IndexPermutation::identity(2)),
            vec![false; 4]
        );
        assert_eq!(
            conjugation_parity(&tau("1243")),
            vec![false, false, true, true]
        );
        // direct evaluation: 1→2 flips, 2→4 keeps, 3→1 keeps, 4→3 flips
        assert_eq!(
            conjugation_parity(&tau("2413")),
            vec![true, false, false, true]
        );
    }

    #[test]
    fn identity_permutation_is_a_no_op() {
        let rho = test_state();
        let out = apply_permutation(&rho, &IndexPermutation::identity(2)).unwrap();
        assert_eq!(&out.mat, rho.matrix());
        assert_eq!(out.row_dims, vec![2, 3]);
    }

    #[test]
    fn swap_of_slots_three_and_four_is_partial_transpose() {
        let rho = test_state();
        let out = apply_permutation(&rho, &tau("1243")).unwrap();
        let pt = partial_transpose(&rho, &[1]).unwrap();
        assert_eq!(&out.mat, pt.matrix());
    }

    #[test]
    fn realignment_layout_on_unequal_dims() {
        let rho = test_state();
        let (da, db) = (2, 3);
        let out = apply_permutation(&rho, &tau("2413")).unwrap();
        assert_eq!(out.mat.shape(), (db * db, da * da));
        for i in 0..da {
            for j in 0..da {
                for k in 0..db {
                    for l in 0..db {
                        assert_eq!(
                            out.mat[(k * db + l, i * da + j)],
                            rho.matrix()[(i * db + k, j * db + l)]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn realign_pair_matches_named_permutation() {
        let rho = test_state();
        let a = realign_pair(&rho, 0, 1).unwrap();
        let b = apply_permutation(&rho, &tau("2413")).unwrap();
        assert_eq!(a, b);
        assert!(realign_pair(&rho, 0, 0).is_err());
        assert!(matches!(
            apply_permutation(&rho, &IndexPermutation::identity(3)),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn sequential_application_equals_composition() {
        let rho = test_state();
        let t1 = tau("3142");
        let t2 = tau("2341");
        let seq = apply_permutation(&rho, &t1).unwrap().permute(&t2).unwrap();
        let once = apply_permutation(&rho, &t2.compose(&t1).unwrap()).unwrap();
        assert_eq!(seq, once);
    }

    #[test]
    fn serde_uses_one_line_strings() {
        let t = tau("2413");
        let js = serde_json::to_string(&t).unwrap();
        assert_eq!(js, "\"2413\"");
        assert_eq!(serde_json::from_str::<IndexPermutation>(&js).unwrap(), t);
    }
}
