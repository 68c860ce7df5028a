//! Decomposability of nonnegative r-potent operators.
//!
//! On a support-disjoint nonnegative range basis `e_1..e_N` the operator maps
//! each `e_i` onto a positive multiple of a single `e_sigma(i)`, and `sigma`
//! is a permutation whose cycles have lengths dividing `r - 1`. The support of
//! `e + Ae + ... + A^(r-2) e` is then the union of the supports along the
//! cycle through `e`, and `L^2(U)` is invariant whenever that union is not the
//! whole space.

use itertools::Itertools;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forge::{orthogonalize, BasisSet, ForgeOptions, ForgeTrace};
use crate::io::{one_based, one_based_opt};
use crate::measure_space::{support, AtomSet, MeasurableFunction, ToleranceConfig};
use crate::operator::{
    kernel_nonnegative_witness, kernel_witness_oracle, minimal_potency, NonnegativeOperator,
};

/// Largest atom count for which the kernel LP is cross-checked by enumeration.
pub const KERNEL_ORACLE_LIMIT: usize = 12;

/// `A e_i = lambda_i e_sigma(i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionStructure {
    #[serde(with = "one_based")]
    pub sigma: Vec<usize>,
    pub scalars: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl TransitionStructure {
    /// Cycles of `sigma`, each starting at its smallest index, ordered by
    /// that index.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.sigma.len()];
        let mut cycles = Vec::new();
        for start in 0..self.sigma.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i);
                i = self.sigma[i];
            }
            cycles.push(cycle);
        }
        cycles
    }

    /// Product of the scalars along each cycle.
    pub fn cycle_products(&self) -> Vec<f64> {
        self.cycles()
            .iter()
            .map(|c| c.iter().map(|&i| self.scalars[i]).product())
            .collect()
    }

    /// Sorted cycle lengths, for comparison up to relabeling.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut lengths: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        lengths.sort_unstable();
        lengths
    }

    /// `sigma^k = id`.
    pub fn power_is_identity(&self, k: u64) -> bool {
        (0..self.sigma.len()).all(|start| {
            let mut i = start;
            for _ in 0..k {
                i = self.sigma[i];
            }
            i == start
        })
    }
}

/// Expands each `A e_i` in the basis and reads off `sigma` and `lambda`.
pub fn transition_structure(
    op: &NonnegativeOperator,
    basis: &BasisSet,
    cfg: &ToleranceConfig,
) -> Result<TransitionStructure> {
    let space = op.space();
    let fs = basis.functions();
    let sq_norms: Vec<f64> = fs
        .iter()
        .map(|e| space.inner_product(e, e))
        .collect::<Result<_>>()?;
    let mut sigma = Vec::with_capacity(fs.len());
    let mut scalars = Vec::with_capacity(fs.len());
    let mut residuals = Vec::with_capacity(fs.len());
    for (i, e) in fs.iter().enumerate() {
        let image = op.apply(e)?;
        let image_norm = space.norm(&image)?;
        if image_norm <= cfg.tol_potency * sq_norms[i].sqrt() {
            return Err(Error::KernelRoute { index: i });
        }
        let mut significant = Vec::new();
        for (j, b) in fs.iter().enumerate() {
            let alpha = space.inner_product(&image, b)? / sq_norms[j];
            if alpha.abs() * sq_norms[j].sqrt() > cfg.tol_orth * image_norm {
                if alpha < 0.0 {
                    return Err(Error::Precondition(format!(
                        "image of basis function {i} has a negative coefficient on {j}"
                    )));
                }
                significant.push((j, alpha));
            }
        }
        match significant.as_slice() {
            [] => return Err(Error::KernelRoute { index: i }),
            &[(j, alpha)] => {
                residuals.push(space.norm(&image.sub_scaled(alpha, &fs[j]))?);
                sigma.push(j);
                scalars.push(alpha);
            }
            _ => {
                return Err(Error::SingleImageViolation {
                    index: i,
                    significant: significant.len(),
                })
            }
        }
    }
    let mut hit = vec![false; sigma.len()];
    for &j in &sigma {
        if std::mem::replace(&mut hit[j], true) {
            return Err(Error::PotencyStructure(format!(
                "two basis images land on function {j}; sigma is not a permutation"
            )));
        }
    }
    Ok(TransitionStructure {
        sigma,
        scalars,
        residuals,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleReport {
    pub lengths: Vec<usize>,
    pub lcm: usize,
    /// Some cycle has length exactly `r - 1`.
    pub full_cycle: bool,
    /// The lcm equals `r - 1`, so `r` is the minimal potency.
    pub exact_period: bool,
}

pub fn cycle_analysis(t: &TransitionStructure, r: u32) -> Result<CycleReport> {
    let lengths: Vec<usize> = t.cycles().iter().map(Vec::len).collect();
    let lcm = lengths.iter().fold(1usize, |acc, &l| acc.lcm(&l));
    let period = r.saturating_sub(1) as usize;
    if period == 0 || !period.is_multiple_of(lcm) {
        return Err(Error::PotencyStructure(format!(
            "cycle lengths {lengths:?} have lcm {lcm}, which does not divide r - 1 = {period}"
        )));
    }
    Ok(CycleReport {
        full_cycle: lengths.contains(&period),
        exact_period: lcm == period,
        lengths,
        lcm,
    })
}

/// `Supp(e + Ae + ... + A^(r-2) e)`.
pub fn construct_decomposing_set(
    op: &NonnegativeOperator,
    e: &MeasurableFunction,
    cfg: &ToleranceConfig,
) -> Result<AtomSet> {
    op.space().check(e)?;
    let mut sum = e.clone();
    let mut term = e.clone();
    for _ in 0..op.potency().saturating_sub(2) {
        term = op.apply(&term)?;
        sum = sum.sub_scaled(-1.0, &term);
    }
    let u = support(&sum, cfg);
    if u.is_empty() {
        return Err(Error::DegenerateSet("the orbit sum vanishes".into()));
    }
    if u.len() == op.dim() {
        return Err(Error::DegenerateSet("the orbit covers every atom".into()));
    }
    Ok(u)
}

/// `|<A chi_U, chi_U^c>|`.
pub fn verify_decomposition(op: &NonnegativeOperator, u: &AtomSet) -> Result<f64> {
    let n = op.dim();
    if u.is_empty() || u.len() >= n || u.iter().any(|i| i >= n) {
        return Err(Error::Precondition(format!(
            "decomposing set {u} must be a nonempty proper subset of {n} atoms"
        )));
    }
    let mask: Vec<bool> = (0..n).map(|i| u.contains(i)).collect();
    Ok(cross_flow(op, &mask))
}

fn cross_flow(op: &NonnegativeOperator, in_u: &[bool]) -> f64 {
    let a = op.matrix();
    let w = op.space().weights();
    let mut total = 0.0;
    for (i, &wi) in w.iter().enumerate() {
        if in_u[i] {
            continue;
        }
        let row: f64 = (0..in_u.len())
            .filter(|&j| in_u[j])
            .map(|j| a[(i, j)])
            .sum();
        total += wi * row;
    }
    total.abs()
}

/// Residual bound below which a set counts as decomposing:
/// `tol_orth * ||A||_F * mean weight`. The weight factor keeps verdicts
/// unchanged when all weights are rescaled together.
pub fn decomposition_threshold(op: &NonnegativeOperator, cfg: &ToleranceConfig) -> f64 {
    let space = op.space();
    cfg.tol_orth * op.frobenius_norm() * space.total_measure() / space.atom_count() as f64
}

/// Tries every nontrivial subset by increasing size, then lexicographically,
/// and returns the first one passing [`decomposition_threshold`].
pub fn brute_force_decomposable(
    op: &NonnegativeOperator,
    cfg: &ToleranceConfig,
    limit: usize,
) -> Result<Option<AtomSet>> {
    let n = op.dim();
    if n > limit {
        return Err(Error::OracleRefused { n, limit });
    }
    let threshold = decomposition_threshold(op, cfg);
    let mut mask = vec![false; n];
    for size in 1..n {
        for combo in (0..n).combinations(size) {
            mask.iter_mut().for_each(|m| *m = false);
            for &i in &combo {
                mask[i] = true;
            }
            if cross_flow(op, &mask) <= threshold {
                return Ok(Some(combo.into_iter().collect()));
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    DecomposableByKernel,
    DecomposableByU,
    NotDecomposable,
    Unknown,
}

impl Verdict {
    pub fn is_decomposable(self) -> bool {
        matches!(
            self,
            Verdict::DecomposableByKernel | Verdict::DecomposableByU
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    KernelWitness,
    Constructive,
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub n: usize,
    #[serde(rename = "N")]
    pub range_dim: usize,
    pub r: u32,
    pub minimal_potency: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    #[serde(with = "one_based_opt")]
    pub witness: Option<AtomSet>,
    pub subsets: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionCertificate {
    pub verdict: Verdict,
    #[serde(rename = "witness_U", with = "one_based_opt")]
    pub witness_u: Option<AtomSet>,
    pub residual: Option<f64>,
    pub method: Method,
    pub dims: Dims,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_witness: Option<MeasurableFunction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle_lengths: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<ForgeTrace>,
}

#[derive(Clone, Debug)]
pub struct DecideOptions {
    /// Largest atom count for the subset oracle.
    pub oracle_limit: usize,
    /// Run the oracle next to a constructive verdict, not only as a fallback.
    pub cross_check: bool,
    pub forge: ForgeOptions,
}

impl Default for DecideOptions {
    fn default() -> Self {
        Self {
            oracle_limit: 16,
            cross_check: true,
            forge: ForgeOptions::default(),
        }
    }
}

/// Kernel witness first, then the constructive route on the forge output,
/// then the oracle. The constructive route reports the smallest verified set,
/// ordered like the oracle's enumeration. `NotDecomposable` is only reported after the oracle has
/// exhausted every subset.
pub fn decide_decomposability(
    op: &NonnegativeOperator,
    cfg: &ToleranceConfig,
    opts: &DecideOptions,
) -> Result<DecompositionCertificate> {
    let report = op.ensure_potent(cfg)?;
    let n = op.dim();
    let r = op.potency();
    let dims = Dims {
        n,
        range_dim: report.rank,
        r,
        minimal_potency: minimal_potency(op, r, cfg),
    };
    let oracle_available = n <= opts.oracle_limit;
    let run_oracle = || -> Result<OracleReport> {
        Ok(OracleReport {
            witness: brute_force_decomposable(op, cfg, opts.oracle_limit)?,
            subsets: (1u64 << n) - 2,
        })
    };
    let mut notes = Vec::new();
    if report.rank + 1 == r as usize {
        notes.push(format!(
            "boundary case N = r - 1 = {}: the constructive route needs N > r - 1",
            report.rank
        ));
    }

    let witness = kernel_nonnegative_witness(op, cfg)?;
    if opts.cross_check && n <= KERNEL_ORACLE_LIMIT {
        let enumerated = kernel_witness_oracle(op, cfg, KERNEL_ORACLE_LIMIT)?;
        if enumerated.is_some() != witness.is_some() {
            return Err(Error::ConsistencyFault(format!(
                "kernel LP found {} but support enumeration found {}",
                describe(witness.as_ref().map(|h| support(h, cfg))),
                describe(enumerated)
            )));
        }
    }
    if let Some(h) = witness {
        let supp = support(&h, cfg);
        let u = if supp.len() < n {
            Some(supp)
        } else if n >= 2 {
            Some(AtomSet::from_iter([0]))
        } else {
            notes.push("single atom space: no proper decomposing set exists".into());
            None
        };
        let residual = u
            .as_ref()
            .map(|u| verify_decomposition(op, u))
            .transpose()?;
        let oracle = if opts.cross_check && oracle_available && n >= 2 {
            let o = run_oracle()?;
            if o.witness.is_none() {
                return Err(Error::ConsistencyFault(
                    "nonnegative kernel element found but the oracle rejects every subset".into(),
                ));
            }
            Some(o)
        } else {
            None
        };
        notes.push("decomposing set taken from the support of a nonnegative kernel element".into());
        return Ok(DecompositionCertificate {
            verdict: Verdict::DecomposableByKernel,
            witness_u: u,
            residual,
            method: Method::KernelWitness,
            dims,
            kernel_witness: Some(h),
            cycle_lengths: None,
            oracle,
            notes,
            trace: None,
        });
    }

    let (basis, trace) = orthogonalize(op, cfg, &opts.forge)?;
    let transitions = transition_structure(op, &basis, cfg)?;
    let cycles = cycle_analysis(&transitions, r)?;
    let threshold = decomposition_threshold(op, cfg);
    let mut found = None;
    for e in basis.functions() {
        match construct_decomposing_set(op, e, cfg) {
            Ok(u) => {
                let residual = verify_decomposition(op, &u)?;
                let smaller = found
                    .as_ref()
                    .is_none_or(|(best, _): &(AtomSet, f64)| (u.len(), &u) < (best.len(), best));
                if residual <= threshold && smaller {
                    found = Some((u, residual));
                }
            }
            Err(Error::DegenerateSet(_)) => continue,
            Err(e) => return Err(e),
        }
    }

    let oracle = if oracle_available && (found.is_none() || opts.cross_check) {
        Some(run_oracle()?)
    } else {
        None
    };
    let oracle_witness = oracle.as_ref().map(|o| o.witness.clone());
    let (verdict, method, witness_u, residual) = match (found, oracle_witness) {
        (Some((u, res)), None | Some(Some(_))) => (
            Verdict::DecomposableByU,
            Method::Constructive,
            Some(u),
            Some(res),
        ),
        (Some((u, _)), Some(None)) => {
            return Err(Error::ConsistencyFault(format!(
                "constructive set {u} verifies but the oracle rejects every subset"
            )))
        }
        (None, Some(Some(u))) => {
            return Err(Error::ConsistencyFault(format!(
                "oracle found decomposing set {u} but every cycle covers all atoms"
            )))
        }
        (None, Some(None)) => (Verdict::NotDecomposable, Method::Oracle, None, None),
        (None, None) => {
            notes.push(format!(
                "every cycle covers all atoms and n = {n} exceeds the oracle limit {}",
                opts.oracle_limit
            ));
            (Verdict::Unknown, Method::Constructive, None, None)
        }
    };
    Ok(DecompositionCertificate {
        verdict,
        witness_u,
        residual,
        method,
        dims,
        kernel_witness: None,
        cycle_lengths: Some(cycles.lengths),
        oracle,
        notes,
        trace: Some(trace),
    })
}

fn describe(set: Option<AtomSet>) -> String {
    set.map_or_else(|| "nothing".to_string(), |u| format!("support {u}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure_space::DiscreteMeasureSpace;
    use approx::assert_abs_diff_eq;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn op_w(weights: &[f64], rows: &[&[f64]], r: u32) -> NonnegativeOperator {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        NonnegativeOperator::from_rows(weights.to_vec(), &rows, r, &cfg()).unwrap()
    }

    fn op(rows: &[&[f64]], r: u32) -> NonnegativeOperator {
        op_w(&vec![1.0; rows.len()], rows, r)
    }

    fn swap_plus_fixed() -> NonnegativeOperator {
        op(&[&[0., 1., 0.], &[1., 0., 0.], &[0., 0., 1.]], 3)
    }

    fn atoms(n: usize) -> BasisSet {
        let fs = (0..n)
            .map(|i| {
                let mut v = vec![0.0; n];
                v[i] = 1.0;
                MeasurableFunction::new(v)
            })
            .collect();
        BasisSet::from_functions(fs, &cfg())
    }

    fn set(v: &[usize]) -> AtomSet {
        v.iter().copied().collect()
    }

    #[test]
    fn transition_examples() {
        let t = transition_structure(&swap_plus_fixed(), &atoms(3), &cfg()).unwrap();
        assert_eq!(t.sigma, vec![1, 0, 2]);
        assert_eq!(t.scalars, vec![1.0, 1.0, 1.0]);

        let id = op(&[&[1., 0.], &[0., 1.]], 2);
        let t = transition_structure(&id, &atoms(2), &cfg()).unwrap();
        assert_eq!(t.sigma, vec![0, 1]);

        // A e_1 = 2 e_2, A e_2 = 0.5 e_1.
        let scaled = op(&[&[0., 0.5], &[2., 0.]], 3);
        let t = transition_structure(&scaled, &atoms(2), &cfg()).unwrap();
        assert_eq!(t.sigma, vec![1, 0]);
        assert_eq!(t.scalars, vec![2.0, 0.5]);
        assert_abs_diff_eq!(t.cycle_products()[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn transition_errors() {
        let a = op(&[&[1., 1.], &[1., 1.]], 2);
        assert!(matches!(
            transition_structure(&a, &atoms(2), &cfg()),
            Err(Error::SingleImageViolation {
                index: 0,
                significant: 2
            })
        ));
        let b = op(&[&[1., 0.], &[0., 0.]], 2);
        assert!(matches!(
            transition_structure(&b, &atoms(2), &cfg()),
            Err(Error::KernelRoute { index: 1 })
        ));
    }

    #[test]
    fn cycle_analysis_examples() {
        let t = |sigma: Vec<usize>| TransitionStructure {
            scalars: vec![1.0; sigma.len()],
            residuals: vec![0.0; sigma.len()],
            sigma,
        };
        let rep = cycle_analysis(&t(vec![1, 0, 2]), 3).unwrap();
        assert_eq!(rep.lengths, vec![2, 1]);
        assert_eq!(rep.lcm, 2);
        assert!(rep.full_cycle);

        let rep = cycle_analysis(&t(vec![0, 1, 2]), 2).unwrap();
        assert_eq!(rep.lengths, vec![1, 1, 1]);

        let rep = cycle_analysis(&t(vec![1, 2, 0, 4, 3, 5]), 7).unwrap();
        assert_eq!(rep.lengths, vec![3, 2, 1]);
        assert_eq!(rep.lcm, 6);
        assert!(!rep.full_cycle);
        assert!(rep.exact_period);

        assert!(matches!(
            cycle_analysis(&t(vec![1, 2, 0]), 3),
            Err(Error::PotencyStructure(_))
        ));
    }

    #[test]
    fn decomposing_set_examples() {
        let a = swap_plus_fixed();
        let e3 = MeasurableFunction::new(vec![0., 0., 1.]);
        assert_eq!(
            construct_decomposing_set(&a, &e3, &cfg()).unwrap(),
            set(&[2])
        );
        let e1 = MeasurableFunction::new(vec![1., 0., 0.]);
        assert_eq!(
            construct_decomposing_set(&a, &e1, &cfg()).unwrap(),
            set(&[0, 1])
        );
        let id = op(&[&[1., 0., 0.], &[0., 1., 0.], &[0., 0., 1.]], 2);
        assert_eq!(
            construct_decomposing_set(&id, &e1, &cfg()).unwrap(),
            set(&[0])
        );

        let swap = op(&[&[0., 1.], &[1., 0.]], 3);
        assert!(matches!(
            construct_decomposing_set(&swap, &MeasurableFunction::new(vec![1., 0.]), &cfg()),
            Err(Error::DegenerateSet(_))
        ));
    }

    #[test]
    fn verify_examples() {
        let a = swap_plus_fixed();
        assert_eq!(verify_decomposition(&a, &set(&[2])).unwrap(), 0.0);
        assert_eq!(verify_decomposition(&a, &set(&[0])).unwrap(), 1.0);
        let into_u = op(&[&[1., 1., 0.], &[0., 0., 0.], &[0., 0., 0.]], 2);
        assert_eq!(verify_decomposition(&into_u, &set(&[0])).unwrap(), 0.0);
        assert!(verify_decomposition(&a, &set(&[])).is_err());
        assert!(verify_decomposition(&a, &set(&[0, 1, 2])).is_err());
    }

    #[test]
    fn oracle_examples() {
        let c = cfg();
        let swap = op(&[&[0., 1.], &[1., 0.]], 3);
        assert_eq!(brute_force_decomposable(&swap, &c, 16).unwrap(), None);
        assert_eq!(
            brute_force_decomposable(&swap_plus_fixed(), &c, 16).unwrap(),
            Some(set(&[2]))
        );
        let diag = op(&[&[1., 0.], &[0., 1.]], 2);
        assert_eq!(
            brute_force_decomposable(&diag, &c, 16).unwrap(),
            Some(set(&[0]))
        );
        assert!(matches!(
            brute_force_decomposable(&diag, &c, 1),
            Err(Error::OracleRefused { n: 2, limit: 1 })
        ));
    }

    #[test]
    fn decide_examples() {
        let c = cfg();
        let opts = DecideOptions::default();

        let swap = op(&[&[0., 1.], &[1., 0.]], 3);
        let cert = decide_decomposability(&swap, &c, &opts).unwrap();
        assert_eq!(cert.verdict, Verdict::NotDecomposable);
        assert_eq!(cert.method, Method::Oracle);
        assert!(!cert.notes.is_empty());

        let cert = decide_decomposability(&swap_plus_fixed(), &c, &opts).unwrap();
        assert_eq!(cert.verdict, Verdict::DecomposableByU);
        assert_eq!(cert.witness_u, Some(set(&[2])));
        assert_eq!(cert.residual, Some(0.0));
        assert_eq!(cert.dims.range_dim, 3);

        let kernel = op(&[&[1., 0.], &[0., 0.]], 2);
        let cert = decide_decomposability(&kernel, &c, &opts).unwrap();
        assert_eq!(cert.verdict, Verdict::DecomposableByKernel);
        assert_eq!(cert.witness_u, Some(set(&[1])));
        assert_eq!(cert.residual, Some(0.0));
    }

    #[test]
    fn decide_rejects_non_potent_input() {
        let nil = op(&[&[0., 1.], &[0., 0.]], 3);
        assert!(matches!(
            decide_decomposability(&nil, &cfg(), &DecideOptions::default()),
            Err(Error::NotPotent { .. })
        ));
    }

    #[test]
    fn decide_beyond_oracle_limit_is_unknown() {
        let swap = op(&[&[0., 1.], &[1., 0.]], 3);
        let opts = DecideOptions {
            oracle_limit: 1,
            ..Default::default()
        };
        let cert = decide_decomposability(&swap, &cfg(), &opts).unwrap();
        assert_eq!(cert.verdict, Verdict::Unknown);
    }

    #[test]
    fn verdict_survives_weight_rescaling() {
        let a = op_w(
            &[0.5, 2.0, 1.0],
            &[&[0., 1., 0.], &[1., 0., 0.], &[0., 0., 1.]],
            3,
        );
        let scaled = a
            .with_space(DiscreteMeasureSpace::new(vec![5e3, 2e4, 1e4]).unwrap())
            .unwrap();
        let opts = DecideOptions::default();
        let x = decide_decomposability(&a, &cfg(), &opts).unwrap();
        let y = decide_decomposability(&scaled, &cfg(), &opts).unwrap();
        assert_eq!(x.verdict, y.verdict);
        assert_eq!(x.witness_u, y.witness_u);
    }
}
