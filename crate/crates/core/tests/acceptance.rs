//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints its own PASS/FAIL line; exits non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rpotent::decomposer::{
    brute_force_decomposable, construct_decomposing_set, cycle_analysis, decide_decomposability,
    transition_structure, verify_decomposition, DecideOptions, Method, Verdict,
};
use rpotent::error::Error;
use rpotent::forge::{
    construct_mixed, orthogonalize, orthogonalize_basis, span_residual, split_mixed_in_range,
    BasisSet, ForgeOptions,
};
use rpotent::generator::{generate_suite, SuiteCase, SuiteGrid};
use rpotent::measure_space::{is_mixed, MeasurableFunction, ToleranceConfig};
use rpotent::operator::{zero_image_check, NonnegativeOperator};

const SEED: u64 = 1;
const CASES: usize = 240;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: &[String], detail: String) -> Outcome {
    match failures.first() {
        None => Outcome { pass: true, detail },
        Some(first) => Outcome {
            pass: false,
            detail: format!("{detail}; {} failures, first: {first}", failures.len()),
        },
    }
}

fn cfg() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn forge(case: &SuiteCase) -> rpotent::Result<BasisSet> {
    orthogonalize_basis(
        &case.generated.operator,
        &case.scrambled.basis,
        &cfg(),
        &ForgeOptions::default(),
    )
    .map(|(b, _)| b)
}

fn potency_soundness(cases: &[SuiteCase]) -> Outcome {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for case in cases {
        let report = case.generated.operator.validate(&cfg());
        worst = worst.max(report.relative_residual);
        if !report.passed() || report.relative_residual > 1e-10 {
            failures.push(format!("case {}: {report:?}", case.index));
        }
    }
    let random = cases
        .iter()
        .filter(|c| c.config.weight_mode == rpotent::generator::WeightMode::Random)
        .count();
    outcome(
        &failures,
        format!(
            "{} cases ({random} with random weights), worst relative residual {worst:.1e}",
            cases.len()
        ),
    )
}

fn forge_reproduction(cases: &[SuiteCase]) -> Outcome {
    let mut failures = Vec::new();
    for case in cases {
        let op = &case.generated.operator;
        let space = op.space();
        let basis = match forge(case) {
            Ok(b) => b,
            Err(e) => {
                failures.push(format!("case {}: {e}", case.index));
                continue;
            }
        };
        let fs = basis.functions();
        let mut bad = Vec::new();
        if fs.len() != case.config.range_dim {
            bad.push(format!(
                "{} functions for N = {}",
                fs.len(),
                case.config.range_dim
            ));
        }
        for (i, f) in fs.iter().enumerate() {
            let norm = space.norm(f).unwrap();
            if f.coords().iter().any(|&x| x < -1e-9 * f.sup_norm()) {
                bad.push(format!("function {i} negative"));
            }
            if op.range_residual(f).unwrap() > 1e-8 * norm {
                bad.push(format!("function {i} outside the range"));
            }
            for (j, g) in fs.iter().enumerate().skip(i + 1) {
                let ip = space.inner_product(f, g).unwrap();
                if ip.abs() > 1e-9 * norm * space.norm(g).unwrap() {
                    bad.push(format!("functions {i}, {j} not orthogonal"));
                }
            }
        }
        if !basis.is_support_disjoint() {
            bad.push("supports overlap".into());
        }
        for f in case.scrambled.basis.functions() {
            if span_residual(space, fs, f) > 1e-8 {
                bad.push("span lost".into());
            }
        }
        let mut truth = case.generated.blocks.clone();
        truth.sort();
        if basis.support_partition() != truth {
            bad.push("partition differs from ground truth".into());
        }
        if let Some(b) = bad.first() {
            failures.push(format!("case {}: {b}", case.index));
        }
    }
    outcome(&failures, format!("{} scrambled cases", cases.len()))
}

fn single_image(cases: &[SuiteCase]) -> Outcome {
    let c = cfg();
    let mut failures = Vec::new();
    let mut worst_fit: f64 = 0.0;
    for case in cases {
        let op = &case.generated.operator;
        let r = op.potency();
        let mut check = || -> Result<(), String> {
            let basis = forge(case).map_err(|e| e.to_string())?;
            let t = transition_structure(op, &basis, &c).map_err(|e| e.to_string())?;
            for (i, e) in basis.functions().iter().enumerate() {
                let scale = op.space().norm(&op.apply(e).unwrap()).unwrap();
                worst_fit = worst_fit.max(t.residuals[i] / scale);
                if t.residuals[i] > 1e-8 * scale {
                    return Err(format!("fit residual {:e}", t.residuals[i]));
                }
            }
            if !t.power_is_identity(u64::from(r - 1)) {
                return Err("sigma^(r-1) is not the identity".into());
            }
            let report = cycle_analysis(&t, r).map_err(|e| e.to_string())?;
            if report
                .lengths
                .iter()
                .any(|&l| !(r as usize - 1).is_multiple_of(l))
            {
                return Err(format!("cycle lengths {:?}", report.lengths));
            }
            if let Some(p) = t
                .cycle_products()
                .into_iter()
                .find(|p| (p - 1.0).abs() > 1e-8)
            {
                return Err(format!("cycle product {p}"));
            }
            Ok(())
        };
        if let Err(e) = check() {
            failures.push(format!("case {}: {e}", case.index));
        }
    }
    outcome(
        &failures,
        format!(
            "{} forge outputs, worst relative fit {worst_fit:.1e}",
            cases.len()
        ),
    )
}

fn oracle_agreement(cases: &[SuiteCase], small: &[SuiteCase]) -> Outcome {
    let c = cfg();
    let opts = DecideOptions::default();
    let mut failures = Vec::new();
    let (mut compared, mut certified) = (0, 0);
    for case in cases.iter().chain(small).filter(|c| c.config.n <= 12) {
        let op = &case.generated.operator;
        compared += 1;
        let cert = match decide_decomposability(op, &c, &opts) {
            Ok(cert) => cert,
            Err(e) => {
                failures.push(format!("case {}: {e}", case.index));
                continue;
            }
        };
        let oracle = brute_force_decomposable(op, &c, 12).unwrap();
        if cert.verdict.is_decomposable() != oracle.is_some() || cert.verdict == Verdict::Unknown {
            failures.push(format!(
                "case {}: verdict {:?}, oracle {:?}",
                case.index, cert.verdict, oracle
            ));
        }
        if cert.verdict == Verdict::DecomposableByU {
            certified += 1;
            let u = cert.witness_u.as_ref().expect("witness set");
            let residual = verify_decomposition(op, u).unwrap();
            if residual > 1e-9 * op.frobenius_norm() {
                failures.push(format!(
                    "case {}: U = {u} residual {residual:e}",
                    case.index
                ));
            }
        }
    }
    outcome(
        &failures,
        format!("{compared} cases with n <= 12, {certified} constructive certificates verified"),
    )
}

fn dimension_law(cases: &[SuiteCase], boundary: &[SuiteCase]) -> Outcome {
    let c = cfg();
    let mut failures = Vec::new();
    let mut law_cases = 0;
    for case in cases
        .iter()
        .filter(|c| c.config.exact_potency && c.config.range_dim > c.config.r as usize - 1)
    {
        law_cases += 1;
        let op = &case.generated.operator;
        let check = || -> Result<(), String> {
            // the constructive route on its own, independent of any kernel witness
            let (basis, _) =
                orthogonalize(op, &c, &ForgeOptions::default()).map_err(|e| e.to_string())?;
            let verified = basis.functions().iter().any(|e| {
                construct_decomposing_set(op, e, &c)
                    .ok()
                    .and_then(|u| verify_decomposition(op, &u).ok())
                    .is_some_and(|res| res <= 1e-9 * op.frobenius_norm())
            });
            if !verified {
                return Err("no basis function gives a verified decomposing set".into());
            }
            let opts = DecideOptions {
                cross_check: false,
                ..DecideOptions::default()
            };
            let cert = decide_decomposability(op, &c, &opts).map_err(|e| e.to_string())?;
            if !cert.verdict.is_decomposable()
                || cert.method == Method::Oracle
                || cert.oracle.is_some()
            {
                return Err(format!("verdict {:?} by {:?}", cert.verdict, cert.method));
            }
            Ok(())
        };
        if let Err(e) = check() {
            failures.push(format!("case {}: {e}", case.index));
        }
    }
    for case in boundary {
        let op = &case.generated.operator;
        let covered = case.generated.leftover.is_empty()
            && case.config.cycles == vec![case.config.r as usize - 1];
        match decide_decomposability(op, &c, &DecideOptions::default()) {
            Ok(cert)
                if covered
                    && cert.verdict == Verdict::NotDecomposable
                    && cert.method == Method::Oracle => {}
            Ok(cert) => failures.push(format!(
                "boundary case {}: {:?} by {:?}",
                case.index, cert.verdict, cert.method
            )),
            Err(e) => failures.push(format!("boundary case {}: {e}", case.index)),
        }
    }
    outcome(
        &failures,
        format!(
            "{law_cases} cases with N > r-1 constructive, {} boundary cases (r in 3..=5) oracle-certified",
            boundary.len()
        ),
    )
}

fn unit_properties(cases: &[SuiteCase]) -> Outcome {
    let c = cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failures = Vec::new();

    let mut splits = 0;
    let mut attempts = 0;
    while splits < 500 && attempts < 50_000 {
        attempts += 1;
        let case = &cases[rng.random_range(0..cases.len())];
        let op = &case.generated.operator;
        let mut f = MeasurableFunction::zeros(op.dim());
        for e in case.scrambled.basis.functions() {
            f = f.sub_scaled(rng.random_range(-1.0..1.0), e);
        }
        if !is_mixed(&f, &c) {
            continue;
        }
        splits += 1;
        match split_mixed_in_range(op, &f, &c) {
            Ok((plus, minus)) => {
                let bound = 1e-8 * op.space().norm(&f).unwrap();
                for part in [&plus, &minus] {
                    if op.range_residual(part).unwrap() > bound {
                        failures.push(format!("case {}: part leaves the range", case.index));
                    }
                }
            }
            Err(e) => failures.push(format!("case {}: split failed: {e}", case.index)),
        }
    }
    if splits < 500 {
        failures.push(format!("only {splits} mixed range elements drawn"));
    }

    let mut pairs = 0;
    while pairs < 500 {
        let n = rng.random_range(2..=12);
        let mut draw = || -> MeasurableFunction {
            MeasurableFunction::new(
                (0..n)
                    .map(|_| {
                        if rng.random_bool(0.3) {
                            0.0
                        } else {
                            rng.random_range(0.1..2.0)
                        }
                    })
                    .collect(),
            )
        };
        let (f, g) = (draw(), draw());
        if f.is_zero(&c) || g.is_zero(&c) {
            continue;
        }
        // independent: not proportional
        let k = f
            .coords()
            .iter()
            .zip(g.coords())
            .find(|(_, &y)| y > 0.0)
            .map(|(x, y)| x / y);
        if k.is_some_and(|k| f.sub_scaled(k, &g).sup_norm() < 1e-9) {
            continue;
        }
        pairs += 1;
        match construct_mixed(&f, &g, &c) {
            Ok(m) => {
                let u = f.sub_scaled(m.p, &g);
                let disjoint = m
                    .u_plus
                    .coords()
                    .iter()
                    .zip(m.u_minus.coords())
                    .all(|(a, b)| a * b == 0.0);
                if !(m.p > 0.0 && is_mixed(&u, &c) && disjoint) {
                    failures.push(format!("pair {pairs}: p = {} not genuinely mixing", m.p));
                }
            }
            Err(e) => failures.push(format!("pair {pairs}: {e}")),
        }
    }

    let mut zero_checks = 0;
    let zero =
        NonnegativeOperator::from_rows(vec![1.0, 2.0], &[vec![0.0, 0.0], vec![0.0, 0.0]], 3, &c)
            .unwrap();
    let operators = cases
        .iter()
        .map(|c| &c.generated.operator)
        .chain(std::iter::once(&zero));
    for op in operators {
        for _ in 0..3 {
            let f = MeasurableFunction::new(
                (0..op.dim()).map(|_| rng.random_range(0.1..2.0)).collect(),
            );
            zero_checks += 1;
            if let Err(e @ Error::ZeroCheckViolation { .. }) = zero_image_check(op, &f, &c) {
                failures.push(format!("zero-image check fired: {e}"));
            }
        }
    }
    outcome(
        &failures,
        format!("{splits} splits, {pairs} mixed constructions, {zero_checks} zero-image checks"),
    )
}

fn determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_rpotent"))
            .args(["suite", "--seed", "7", "--count", "200"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let mut failures = Vec::new();
    if a.status.code() != Some(0) || b.status.code() != Some(0) {
        failures.push(format!(
            "exit codes {:?}, {:?}",
            a.status.code(),
            b.status.code()
        ));
    }
    if a.stdout != b.stdout {
        failures.push("summaries differ".into());
    }
    outcome(
        &failures,
        format!("two runs, {} identical bytes", a.stdout.len()),
    )
}

fn main() -> ExitCode {
    let cases = generate_suite(CASES, &SuiteGrid::default(), SEED).expect("suite generates");
    let small = generate_suite(CASES, &SuiteGrid::small(), SEED).expect("small suite generates");
    let boundary =
        generate_suite(60, &SuiteGrid::boundary(), SEED).expect("boundary suite generates");

    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(&str, Option<Duration>, Check)> = vec![
        (
            "potency soundness",
            Some(Duration::from_secs(10)),
            Box::new(|| potency_soundness(&cases)),
        ),
        (
            "support-disjoint range basis",
            Some(Duration::from_secs(30)),
            Box::new(|| forge_reproduction(&cases)),
        ),
        (
            "single-image transition structure",
            None,
            Box::new(|| single_image(&cases)),
        ),
        (
            "decomposability vs oracle",
            None,
            Box::new(|| oracle_agreement(&cases, &small)),
        ),
        (
            "dimension law",
            None,
            Box::new(|| dimension_law(&cases, &boundary)),
        ),
        (
            "split, mixing and zero-image properties",
            Some(Duration::from_secs(10)),
            Box::new(|| unit_properties(&cases)),
        ),
        ("determinism", None, Box::new(determinism)),
    ];

    let mut all = true;
    for (k, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut result = check();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed > *limit {
                result.pass = false;
                result.detail.push_str(&format!("; exceeded {limit:?}"));
            }
        }
        all &= result.pass;
        println!(
            "criterion {}: {} {name} ({:.2?}): {}",
            k + 1,
            if result.pass { "PASS" } else { "FAIL" },
            elapsed,
            result.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
