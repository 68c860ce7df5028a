//! End-to-end checks over generated cases, grouped into invariant families.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decomposer::{
    brute_force_decomposable, cycle_analysis, decide_decomposability, transition_structure,
    DecideOptions, Method, Verdict,
};
use crate::error::{Error, Result};
use crate::forge::{orthogonalize_basis, span_residual, BasisSet, ForgeOptions};
use crate::generator::{generate_suite, ExpectedVerdict, SuiteCase, SuiteGrid};
use crate::measure_space::ToleranceConfig;

/// Oracle comparisons run for cases with at most this many atoms.
pub const ORACLE_CHECK_LIMIT: usize = 12;

/// Invariant families reported by the suite.
pub const FAMILIES: [&str; 6] = [
    "potency",
    "forge",
    "transition",
    "oracle_agreement",
    "dimension_law",
    "expected_verdict",
];

pub type CheckResult = std::result::Result<(), String>;

/// Relative potency residual at most `1e-10`.
pub fn check_potency(case: &SuiteCase, cfg: &ToleranceConfig) -> CheckResult {
    let op = &case.generated.operator;
    let report = op.validate(cfg);
    let relative = report.potency_residual / report.frobenius_norm.max(f64::MIN_POSITIVE);
    if !report.passed() {
        return Err(format!("validation failed: {report:?}"));
    }
    if relative > 1e-10 {
        return Err(format!("relative residual {relative:e} exceeds 1e-10"));
    }
    Ok(())
}

/// Runs the forge on the scrambled basis and checks every output property,
/// returning the output basis on success.
pub fn check_forge(
    case: &SuiteCase,
    cfg: &ToleranceConfig,
    opts: &ForgeOptions,
) -> std::result::Result<BasisSet, String> {
    let op = &case.generated.operator;
    let space = op.space();
    let start = &case.scrambled.basis;
    let (out, trace) = orthogonalize_basis(op, start, cfg, opts).map_err(|e| e.to_string())?;
    let expected_n = case.config.range_dim;
    if out.len() != expected_n {
        return Err(format!("{} functions, expected {expected_n}", out.len()));
    }
    let fs = out.functions();
    for (i, f) in fs.iter().enumerate() {
        let sup = f.sup_norm();
        if f.coords().iter().any(|&x| x < -1e-9 * sup) {
            return Err(format!("function {i} is not nonnegative"));
        }
        let norm = space.norm(f).map_err(|e| e.to_string())?;
        let residual = op.range_residual(f).map_err(|e| e.to_string())?;
        if residual > 1e-8 * norm {
            return Err(format!("function {i} range residual {residual:e}"));
        }
        for (j, g) in fs.iter().enumerate().skip(i + 1) {
            let ip = space.inner_product(f, g).map_err(|e| e.to_string())?;
            let bound = 1e-9 * norm * space.norm(g).map_err(|e| e.to_string())?;
            if ip.abs() > bound {
                return Err(format!("functions {i}, {j} have inner product {ip:e}"));
            }
        }
    }
    if !out.is_support_disjoint() {
        return Err("supports overlap".into());
    }
    for (k, f) in start.functions().iter().enumerate() {
        let residual = span_residual(space, fs, f);
        if residual > 1e-8 {
            return Err(format!("start function {k} leaves the span ({residual:e})"));
        }
    }
    let mut truth = case.generated.blocks.clone();
    truth.sort();
    if out.support_partition() != truth {
        return Err("support partition differs from the generated blocks".into());
    }
    let orth: Vec<usize> = trace.counter_history.iter().map(|c| c.0).collect();
    if orth.windows(2).any(|w| w[1] <= w[0]) {
        return Err("orthogonal counter did not grow on every draw".into());
    }
    Ok(out)
}

/// Single image per basis function, fit residual, cycle structure and
/// cycle products, and cycle type equal to the generator's.
pub fn check_transition(case: &SuiteCase, basis: &BasisSet, cfg: &ToleranceConfig) -> CheckResult {
    let op = &case.generated.operator;
    let r = op.potency();
    let t = transition_structure(op, basis, cfg).map_err(|e| e.to_string())?;
    for (i, e) in basis.functions().iter().enumerate() {
        let image = op.apply(e).map_err(|e| e.to_string())?;
        let norm = op.space().norm(&image).map_err(|e| e.to_string())?;
        if t.residuals[i] > 1e-8 * norm {
            return Err(format!(
                "fit residual {:e} for function {i}",
                t.residuals[i]
            ));
        }
    }
    if !t.power_is_identity((r - 1) as u64) {
        return Err("sigma^(r-1) is not the identity".into());
    }
    let cycles = cycle_analysis(&t, r).map_err(|e| e.to_string())?;
    if cycles
        .lengths
        .iter()
        .any(|&l| !(r as usize - 1).is_multiple_of(l))
    {
        return Err(format!("cycle lengths {:?}", cycles.lengths));
    }
    for p in t.cycle_products() {
        if (p - 1.0).abs() > 1e-8 {
            return Err(format!("cycle product {p}"));
        }
    }
    if t.cycle_type() != case.generated.truth.cycle_type() {
        return Err(format!(
            "cycle type {:?}, generator used {:?}",
            t.cycle_type(),
            case.generated.truth.cycle_type()
        ));
    }
    Ok(())
}

/// Outcome of the decomposability checks on one case.
#[derive(Clone, Debug)]
pub struct DecisionChecks {
    pub verdict: Option<Verdict>,
    pub oracle_agreement: Option<CheckResult>,
    pub dimension_law: Option<CheckResult>,
    pub expected: CheckResult,
    pub consistency_fault: bool,
}

pub fn check_decision(
    case: &SuiteCase,
    cfg: &ToleranceConfig,
    opts: &DecideOptions,
) -> DecisionChecks {
    let op = &case.generated.operator;
    let n = op.dim();
    let period = op.potency() as usize - 1;
    let cert = match decide_decomposability(op, cfg, opts) {
        Ok(c) => c,
        Err(e) => {
            let fault = matches!(e, Error::ConsistencyFault(_));
            let msg = Err(e.to_string());
            return DecisionChecks {
                verdict: None,
                oracle_agreement: (n <= ORACLE_CHECK_LIMIT).then(|| msg.clone()),
                dimension_law: None,
                expected: msg,
                consistency_fault: fault,
            };
        }
    };
    let threshold = 1e-9 * op.frobenius_norm();
    let witness_ok = || -> CheckResult {
        if cert.verdict == Verdict::DecomposableByU {
            match cert.residual {
                Some(res) if res <= threshold => {}
                other => return Err(format!("certificate residual {other:?}")),
            }
        }
        Ok(())
    };

    let oracle_agreement = (n <= ORACLE_CHECK_LIMIT).then(|| {
        let oracle =
            brute_force_decomposable(op, cfg, ORACLE_CHECK_LIMIT).map_err(|e| e.to_string())?;
        if oracle.is_some() != cert.verdict.is_decomposable() {
            return Err(format!(
                "verdict {:?} but oracle found {oracle:?}",
                cert.verdict
            ));
        }
        witness_ok()
    });

    let structural = case.config.exact_potency && case.config.leftover == 0;
    let dimension_law = if case.boundary {
        Some(if cert.verdict == Verdict::NotDecomposable {
            Ok(())
        } else {
            Err(format!("boundary case certified {:?}", cert.verdict))
        })
    } else if structural && case.config.range_dim > period {
        Some(
            if cert.verdict == Verdict::DecomposableByU && cert.method == Method::Constructive {
                witness_ok()
            } else {
                Err(format!("N > r - 1 but verdict {:?}", cert.verdict))
            },
        )
    } else {
        None
    };

    let expected = match case.expected {
        ExpectedVerdict::Decomposable if !cert.verdict.is_decomposable() => {
            Err(format!("expected decomposable, got {:?}", cert.verdict))
        }
        ExpectedVerdict::NotDecomposable if cert.verdict != Verdict::NotDecomposable => {
            Err(format!("expected not decomposable, got {:?}", cert.verdict))
        }
        _ => witness_ok(),
    };

    DecisionChecks {
        verdict: Some(cert.verdict),
        oracle_agreement,
        dimension_law,
        expected,
        consistency_fault: false,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub case: usize,
    pub family: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictCounts {
    pub decomposable_by_kernel: usize,
    pub decomposable_by_u: usize,
    pub not_decomposable: usize,
    pub unknown: usize,
    pub error: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryCounts {
    pub cases: usize,
    pub not_decomposable: usize,
}

/// Deterministic summary: no timings, families in a fixed order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub seed: u64,
    pub count: usize,
    pub grid: SuiteGrid,
    pub families: BTreeMap<String, Tally>,
    pub verdicts: VerdictCounts,
    pub boundary: BoundaryCounts,
    pub consistency_faults: usize,
    pub failures: Vec<Failure>,
    pub all_pass: bool,
}

pub fn run_suite(
    count: usize,
    grid: &SuiteGrid,
    seed: u64,
    cfg: &ToleranceConfig,
) -> Result<SuiteSummary> {
    let cases = generate_suite(count, grid, seed)?;
    Ok(summarize(&cases, grid, seed, cfg))
}

pub fn summarize(
    cases: &[SuiteCase],
    grid: &SuiteGrid,
    seed: u64,
    cfg: &ToleranceConfig,
) -> SuiteSummary {
    let mut families: BTreeMap<String, Tally> = FAMILIES
        .iter()
        .map(|f| (f.to_string(), Tally::default()))
        .collect();
    let mut failures = Vec::new();
    let mut verdicts = VerdictCounts::default();
    let mut boundary = BoundaryCounts::default();
    let mut faults = 0;
    let decide = DecideOptions {
        cross_check: false,
        ..DecideOptions::default()
    };
    let forge_opts = ForgeOptions::default();

    for case in cases {
        let mut record = |family: &str, result: &CheckResult| {
            let tally = families.get_mut(family).expect("known family");
            match result {
                Ok(()) => tally.pass += 1,
                Err(detail) => {
                    tally.fail += 1;
                    failures.push(Failure {
                        case: case.index,
                        family: family.to_string(),
                        detail: detail.clone(),
                    });
                }
            }
        };
        record("potency", &check_potency(case, cfg));
        match check_forge(case, cfg, &forge_opts) {
            Ok(basis) => {
                record("forge", &Ok(()));
                record("transition", &check_transition(case, &basis, cfg));
            }
            Err(e) => {
                record("forge", &Err(e.clone()));
                record("transition", &Err(format!("no forge output: {e}")));
            }
        }
        let d = check_decision(case, cfg, &decide);
        if let Some(r) = &d.oracle_agreement {
            record("oracle_agreement", r);
        }
        if let Some(r) = &d.dimension_law {
            record("dimension_law", r);
        }
        record("expected_verdict", &d.expected);
        faults += usize::from(d.consistency_fault);
        match d.verdict {
            Some(Verdict::DecomposableByKernel) => verdicts.decomposable_by_kernel += 1,
            Some(Verdict::DecomposableByU) => verdicts.decomposable_by_u += 1,
            Some(Verdict::NotDecomposable) => verdicts.not_decomposable += 1,
            Some(Verdict::Unknown) => verdicts.unknown += 1,
            None => verdicts.error += 1,
        }
        if case.boundary {
            boundary.cases += 1;
            boundary.not_decomposable += usize::from(d.verdict == Some(Verdict::NotDecomposable));
        }
    }
    let all_pass = failures.is_empty() && faults == 0;
    SuiteSummary {
        seed,
        count: cases.len(),
        grid: grid.clone(),
        families,
        verdicts,
        boundary,
        consistency_faults: faults,
        failures,
        all_pass,
    }
}
