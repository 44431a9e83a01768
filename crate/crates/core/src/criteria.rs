//! Contraction criteria: a state is flagged entangled as soon as some map
//! that is a trace-norm contraction on product states pushes its trace norm
//! above one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{apply_permutation, IndexPermutation};
use crate::scalar::Real;
use crate::tensor::{partial_transpose, subsystem_set, trace_norm, DensityMatrix};

/// Outcome of one criterion on one state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CriterionResult<T> {
    pub name: String,
    pub norm: T,
    pub threshold: T,
    pub detected: bool,
}

impl<T: Real> CriterionResult<T> {
    pub fn new(name: String, norm: T, detect_tol: T) -> Self {
        let threshold = T::one() + detect_tol;
        Self {
            name,
            norm,
            threshold,
            detected: norm > threshold,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Entangled,
    Undetected,
}

/// All criteria evaluated on one state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct AnalysisReport<T> {
    pub label: String,
    pub dims: Vec<usize>,
    pub criteria: Vec<CriterionResult<T>>,
    /// Largest norm among the evaluated permutation criteria; equals `E` when
    /// the full permutation family was run, a lower bound otherwise.
    pub e_value: T,
    pub verdict: Verdict,
}

impl<T: Real> AnalysisReport<T> {
    /// Sorts criteria by name and derives `e_value` and the verdict.
    pub fn assemble(
        label: String,
        dims: Vec<usize>,
        mut criteria: Vec<CriterionResult<T>>,
    ) -> Self {
        criteria.sort_by(|a, b| a.name.cmp(&b.name));
        criteria.dedup_by(|a, b| a.name == b.name);
        let e_value = criteria.iter().map(|c| c.norm).fold(T::zero(), T::max);
        let verdict = if criteria.iter().any(|c| c.detected) {
            Verdict::Entangled
        } else {
            Verdict::Undetected
        };
        Self {
            label,
            dims,
            criteria,
            e_value,
            verdict,
        }
    }

    pub fn get(&self, name: &str) -> Option<&CriterionResult<T>> {
        self.criteria.iter().find(|c| c.name == name)
    }
}

/// Which criteria a sweep evaluates.
#[derive(Clone, Debug, PartialEq)]
pub enum CriterionFamily {
    /// Partial transpose on every bipartite cut, one side per cut.
    PptAllCuts,
    /// Realignment of every unordered subsystem pair.
    RealignAllPairs,
    /// Every slot permutation in `S_{2n}`.
    AllPermutations,
    Custom(Vec<IndexPermutation>),
}

#[derive(Clone, Copy, Debug)]
pub struct SweepOptions<T> {
    /// A criterion fires when its norm exceeds `1 + detect_tol`.
    pub detect_tol: T,
    /// Largest part count for which all `(2n)!` permutations run unforced.
    pub max_perm_parts: usize,
    pub force: bool,
}

impl<T: Real> Default for SweepOptions<T> {
    fn default() -> Self {
        Self {
            detect_tol: T::tolerances().detect,
            max_perm_parts: 3,
            force: false,
        }
    }
}

impl<T: Real> SweepOptions<T> {
    pub(crate) fn check_budget(&self, n_parts: usize) -> Result<()> {
        if n_parts > self.max_perm_parts && !self.force {
            let count: u128 = (1..=(2 * n_parts) as u128).product();
            return Err(Error::Budget(format!(
                "{count} permutations for {n_parts} parts exceeds the cap ({} parts); pass force to run anyway",
                self.max_perm_parts
            )));
        }
        Ok(())
    }
}

fn set_label(subsystems: &[usize]) -> String {
    let parts: Vec<String> = subsystems.iter().map(|s| (s + 1).to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// Trace norm of the partial transpose on the listed (0-based) subsystems.
pub fn evaluate_ppt<T: Real>(
    rho: &DensityMatrix<T>,
    subsystems: &[usize],
    detect_tol: T,
) -> Result<CriterionResult<T>> {
    let set = subsystem_set(subsystems, rho.n_parts())?;
    let norm = partial_transpose(rho, &set)?.trace_norm()?;
    Ok(CriterionResult::new(
        format!("PPT@{}", set_label(&set)),
        norm,
        detect_tol,
    ))
}

/// Trace norm of `L_τ(ρ)`.
pub fn evaluate_permutation<T: Real>(
    rho: &DensityMatrix<T>,
    tau: &IndexPermutation,
    detect_tol: T,
) -> Result<CriterionResult<T>> {
    let norm = trace_norm(&apply_permutation(rho, tau)?.mat)?;
    Ok(CriterionResult::new(
        format!("perm@{tau}"),
        norm,
        detect_tol,
    ))
}

/// Realignment of subsystems `s`, `t` (0-based) with the others untouched.
pub fn evaluate_realignment<T: Real>(
    rho: &DensityMatrix<T>,
    s: usize,
    t: usize,
    detect_tol: T,
) -> Result<CriterionResult<T>> {
    let tau = IndexPermutation::realignment(rho.n_parts(), s, t)?;
    let norm = trace_norm(&apply_permutation(rho, &tau)?.mat)?;
    Ok(CriterionResult::new(
        format!("realign@{}", set_label(&[s, t])),
        norm,
        detect_tol,
    ))
}

/// One representative per bipartite cut: the smaller side, or on ties the
/// side that excludes the first subsystem.
pub fn ppt_cuts(n_parts: usize) -> Vec<Vec<usize>> {
    let mut cuts = Vec::new();
    for mask in 1u64..(1u64 << n_parts) - 1 {
        let side: Vec<usize> = (0..n_parts).filter(|s| mask >> s & 1 == 1).collect();
        let k = side.len();
        let keep = 2 * k < n_parts || (2 * k == n_parts && mask & 1 == 0);
        if keep {
            cuts.push(side);
        }
    }
    cuts.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    cuts
}

fn permutation_results<T: Real>(
    rho: &DensityMatrix<T>,
    perms: &[IndexPermutation],
    detect_tol: T,
) -> Result<Vec<CriterionResult<T>>> {
    perms
        .par_iter()
        .map(|tau| evaluate_permutation(rho, tau, detect_tol))
        .collect()
}

/// Runs every requested criterion family and assembles a report.
pub fn sweep_multipartite<T: Real>(
    rho: &DensityMatrix<T>,
    label: &str,
    families: &[CriterionFamily],
    opts: &SweepOptions<T>,
) -> Result<AnalysisReport<T>> {
    if families.is_empty() {
        return Err(Error::Argument("no criterion family selected".into()));
    }
    let n = rho.n_parts();
    let tol = opts.detect_tol;
    let mut results = Vec::new();
    for family in families {
        match family {
            CriterionFamily::PptAllCuts => {
                for cut in ppt_cuts(n) {
                    results.push(evaluate_ppt(rho, &cut, tol)?);
                }
            }
            CriterionFamily::RealignAllPairs => {
                for s in 0..n {
                    for t in (s + 1)..n {
                        results.push(evaluate_realignment(rho, s, t, tol)?);
                    }
                }
            }
            CriterionFamily::AllPermutations => {
                opts.check_budget(n)?;
                results.extend(permutation_results(rho, &IndexPermutation::all(n), tol)?);
            }
            CriterionFamily::Custom(perms) => {
                if perms.is_empty() {
                    return Err(Error::Argument("custom criterion list is empty".into()));
                }
                results.extend(permutation_results(rho, perms, tol)?);
            }
        }
    }
    Ok(AnalysisReport::assemble(
        label.to_string(),
        rho.dims().to_vec(),
        results,
    ))
}

/// `E = max_τ ||L_τ(ρ)||₁` over all slot permutations.
pub fn e_value<T: Real>(rho: &DensityMatrix<T>, opts: &SweepOptions<T>) -> Result<T> {
    let n = rho.n_parts();
    opts.check_budget(n)?;
    let norms: Vec<T> = IndexPermutation::all(n)
        .par_iter()
        .map(|tau| trace_norm(&apply_permutation(rho, tau)?.mat))
        .collect::<Result<_>>()?;
    Ok(norms.into_iter().fold(T::zero(), T::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::C;
    use crate::states::{
        convex_mixture, max_entangled, maximally_mixed, pure_product, upb_shifts3,
    };
    use crate::tensor::{kron, ComplexMatrix};

    const TOL: f64 = 1e-8;

    fn ket(bits: &[usize]) -> Vec<Vec<C<f64>>> {
        bits.iter()
            .map(|&b| {
                if b == 0 {
                    vec![C::new(1.0, 0.0), C::new(0.0, 0.0)]
                } else {
                    vec![C::new(0.0, 0.0), C::new(1.0, 0.0)]
                }
            })
            .collect()
    }

    #[test]
    fn ppt_examples() {
        let sep = convex_mixture(
            &[
                pure_product(&ket(&[0, 0])).unwrap(),
                pure_product(&ket(&[1, 1])).unwrap(),
            ],
            &[0.5, 0.5],
        )
        .unwrap();
        let r = evaluate_ppt(&sep, &[1], TOL).unwrap();
        assert!((r.norm - 1.0).abs() < 1e-12 && !r.detected);
        assert_eq!(r.name, "PPT@{2}");

        let r = evaluate_ppt(&max_entangled::<f64>(3).unwrap(), &[1], TOL).unwrap();
        assert!((r.norm - 3.0).abs() < 1e-9 && r.detected);

        let upb = upb_shifts3::<f64>();
        for s in 0..3 {
            let r = evaluate_ppt(&upb, &[s], TOL).unwrap();
            assert!((r.norm - 1.0).abs() < 1e-9, "{}: {}", r.name, r.norm);
            assert!(!r.detected);
        }
    }

    #[test]
    fn permutation_examples() {
        let p = max_entangled::<f64>(2).unwrap();
        let id = evaluate_permutation(&p, &IndexPermutation::identity(2), TOL).unwrap();
        assert!((id.norm - 1.0).abs() < 1e-12 && !id.detected);

        // explicit 4x4 reshuffle oracle: R[(k,l),(i,j)] = ρ[(i,k),(j,l)]
        let mut r = ComplexMatrix::<f64>::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        r[(k * 2 + l, i * 2 + j)] = p.matrix()[(i * 2 + k, j * 2 + l)];
                    }
                }
            }
        }
        // R = (1/2)·I_4 here, whose trace norm is 2
        assert!(r.max_abs_diff(&ComplexMatrix::identity(4).scale(0.5)) < 1e-15);
        let re = evaluate_permutation(&p, &IndexPermutation::from_one_line("2413").unwrap(), TOL)
            .unwrap();
        assert!((re.norm - 2.0).abs() < 1e-12 && re.detected);
        assert_eq!(re.name, "perm@2413");

        let mm = maximally_mixed::<f64>(&[2, 2]).unwrap();
        let re = evaluate_permutation(&mm, &IndexPermutation::from_one_line("2413").unwrap(), TOL)
            .unwrap();
        assert!((re.norm - 0.5).abs() < 1e-12 && !re.detected);
    }

    #[test]
    fn ppt_cut_enumeration() {
        assert_eq!(ppt_cuts(2), vec![vec![1]]);
        assert_eq!(ppt_cuts(3), vec![vec![0], vec![1], vec![2]]);
        let four = ppt_cuts(4);
        assert_eq!(four.len(), 7);
        assert!(four.contains(&vec![2, 3]) && !four.contains(&vec![0, 1]));
    }

    #[test]
    fn upb_realignment_sweep() {
        let upb = upb_shifts3::<f64>();
        let rep = sweep_multipartite(
            &upb,
            "upb3",
            &[CriterionFamily::RealignAllPairs],
            &SweepOptions::default(),
        )
        .unwrap();
        let bc = rep.get("realign@{2,3}").unwrap();
        assert!((bc.norm - 1.08649).abs() < 5e-4, "{}", bc.norm);
        assert!(bc.detected);
        assert_eq!(rep.verdict, Verdict::Entangled);
    }

    #[test]
    fn ppt_sweep_on_entangled_pair_times_qubit() {
        let p = max_entangled::<f64>(2).unwrap();
        let zero = ComplexMatrix::from_diag(&[1.0, 0.0]);
        let rho = DensityMatrix::new(vec![2, 2, 2], kron(p.matrix(), &zero).unwrap()).unwrap();
        let rep = sweep_multipartite(
            &rho,
            "p+ x 0",
            &[CriterionFamily::PptAllCuts],
            &SweepOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.criteria.len(), 3);
        for name in ["PPT@{1}", "PPT@{2}"] {
            let r = rep.get(name).unwrap();
            assert!((r.norm - 2.0).abs() < 1e-9 && r.detected, "{name}");
        }
        let c = rep.get("PPT@{3}").unwrap();
        assert!((c.norm - 1.0).abs() < 1e-9 && !c.detected);
    }

    #[test]
    fn all_permutations_on_product_state() {
        let rho = pure_product(&ket(&[0, 1, 0])).unwrap();
        let rep = sweep_multipartite(
            &rho,
            "prod",
            &[CriterionFamily::AllPermutations],
            &SweepOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.criteria.len(), 720);
        assert!(rep.criteria.iter().all(|c| (c.norm - 1.0).abs() < 1e-10));
        assert_eq!(rep.verdict, Verdict::Undetected);
    }

    #[test]
    fn budget_is_enforced() {
        let rho = maximally_mixed::<f64>(&[2, 2, 2, 2]).unwrap();
        let err = e_value(&rho, &SweepOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Budget(_)));
        let err = sweep_multipartite(
            &rho,
            "x",
            &[CriterionFamily::AllPermutations],
            &SweepOptions::default(),
        );
        assert!(matches!(err, Err(Error::Budget(_))));
        // the realignment family never needs the budget
        assert!(sweep_multipartite(
            &rho,
            "x",
            &[CriterionFamily::RealignAllPairs],
            &SweepOptions::default()
        )
        .is_ok());
    }

    #[test]
    fn e_value_examples() {
        let opts = SweepOptions::default();
        let p = max_entangled::<f64>(2).unwrap();
        // exhaustive oracle over the 24 permutations, computed without e_value
        let brute = IndexPermutation::all(2)
            .iter()
            .map(|t| evaluate_permutation(&p, t, TOL).unwrap().norm)
            .fold(0.0f64, f64::max);
        assert!((brute - 2.0).abs() < 1e-9);
        assert!((e_value(&p, &opts).unwrap() - 2.0).abs() < 1e-9);
        let prod = pure_product(&ket(&[1, 0])).unwrap();
        assert!((e_value(&prod, &opts).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn report_serializes() {
        let p = max_entangled::<f64>(2).unwrap();
        let rep = sweep_multipartite(
            &p,
            "maxent:2",
            &[CriterionFamily::PptAllCuts],
            &SweepOptions::default(),
        )
        .unwrap();
        let js = serde_json::to_string(&rep).unwrap();
        assert!(js.contains("\"verdict\":\"entangled\""));
        let back: AnalysisReport<f64> = serde_json::from_str(&js).unwrap();
        assert_eq!(back, rep);
    }
}
