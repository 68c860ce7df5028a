//! Nonnegative r-potent operators on a discrete weighted space.
//!
//! On a space with strictly positive atom weights an operator maps nonnegative
//! functions to nonnegative functions exactly when its matrix is entrywise
//! nonnegative, so that is the test applied at construction.

use itertools::Itertools;
use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::measure_space::{
    support, AtomSet, DiscreteMeasureSpace, MeasurableFunction, ToleranceConfig,
};

/// Entrywise nonnegative square matrix acting on a weighted space, together
/// with its declared potency `r` (`A^r = A`).
#[derive(Clone, Debug)]
pub struct NonnegativeOperator {
    space: DiscreteMeasureSpace,
    matrix: DMatrix<f64>,
    potency: u32,
    /// `A^(r-1)`, the identity on the range when the operator is r-potent.
    cycle_power: DMatrix<f64>,
}

impl NonnegativeOperator {
    /// Negative entries above `-tol_support * max(1, max|a_ij|)` are rounding
    /// dust and are clamped to zero; anything more negative is rejected.
    pub fn new(
        space: DiscreteMeasureSpace,
        mut matrix: DMatrix<f64>,
        potency: u32,
        cfg: &ToleranceConfig,
    ) -> Result<Self> {
        let n = space.atom_count();
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::InvalidOperator(format!(
                "matrix is {}x{}, not square",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows(),
            });
        }
        if potency < 2 {
            return Err(Error::InvalidOperator(format!(
                "potency r = {potency} must be at least 2"
            )));
        }
        if let Some(bad) = matrix.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidOperator(format!("non-finite entry {bad}")));
        }
        let floor = -cfg.tol_support * matrix.amax().max(1.0);
        for j in 0..n {
            for i in 0..n {
                let v = matrix[(i, j)];
                if v < floor {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                if v < 0.0 {
                    matrix[(i, j)] = 0.0;
                }
            }
        }
        let cycle_power = linalg::matrix_power(&matrix, potency - 1);
        Ok(Self {
            space,
            matrix,
            potency,
            cycle_power,
        })
    }

    /// Builds from row-major nested vectors (`rows[i][j] = A_ij`).
    pub fn from_rows(
        weights: Vec<f64>,
        rows: &[Vec<f64>],
        potency: u32,
        cfg: &ToleranceConfig,
    ) -> Result<Self> {
        let space = DiscreteMeasureSpace::new(weights)?;
        let matrix = matrix_from_rows(rows, space.atom_count())?;
        Self::new(space, matrix, potency, cfg)
    }

    pub fn space(&self) -> &DiscreteMeasureSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn potency(&self) -> u32 {
        self.potency
    }

    pub fn dim(&self) -> usize {
        self.space.atom_count()
    }

    pub fn frobenius_norm(&self) -> f64 {
        linalg::frobenius(&self.matrix)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.matrix.row(i).iter().copied().collect())
            .collect()
    }

    pub fn apply(&self, f: &MeasurableFunction) -> Result<MeasurableFunction> {
        self.space.check(f)?;
        Ok(linalg::apply(&self.matrix, f))
    }

    /// `A^k f`.
    pub fn apply_power(&self, k: u32, f: &MeasurableFunction) -> Result<MeasurableFunction> {
        self.space.check(f)?;
        let mut g = f.clone();
        for _ in 0..k {
            g = linalg::apply(&self.matrix, &g);
        }
        Ok(g)
    }

    /// `||A^(r-1) f - f||` in the weighted norm.
    pub fn range_residual(&self, f: &MeasurableFunction) -> Result<f64> {
        self.space.check(f)?;
        let g = linalg::apply(&self.cycle_power, f);
        self.space.norm(&g.sub_scaled(1.0, f))
    }

    /// `f` is fixed by `A^(r-1)` up to `tol_potency * ||f||`.
    pub fn is_range_member(&self, f: &MeasurableFunction, cfg: &ToleranceConfig) -> Result<bool> {
        Ok(self.range_residual(f)? <= cfg.tol_potency * self.space.norm(f)?)
    }

    /// Same matrix and potency with the atom weights replaced.
    pub fn with_space(&self, space: DiscreteMeasureSpace) -> Result<Self> {
        if space.atom_count() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: space.atom_count(),
            });
        }
        Ok(Self {
            space,
            ..self.clone()
        })
    }

    pub fn validate(&self, cfg: &ToleranceConfig) -> ValidationReport {
        inspect_matrix(&self.matrix, self.potency, cfg)
    }

    /// Errors unless the potency residual is within bounds.
    pub fn ensure_potent(&self, cfg: &ToleranceConfig) -> Result<ValidationReport> {
        let report = self.validate(cfg);
        if !report.potent {
            return Err(Error::NotPotent {
                r: self.potency,
                residual: report.potency_residual,
                bound: cfg.tol_potency * report.frobenius_norm.max(1.0),
            });
        }
        Ok(report)
    }
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>> {
    if rows.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rows.len(),
        });
    }
    for row in rows {
        if row.len() != n {
            return Err(Error::InvalidOperator(format!(
                "row of length {} in a {n}x{n} matrix",
                row.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Outcome of checking nonnegativity and r-potency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub nonnegative: bool,
    pub min_entry: f64,
    /// `||A^r - A||_F`.
    pub potency_residual: f64,
    /// `||A^r - A||_F / max(1, ||A||_F)`.
    pub relative_residual: f64,
    pub potent: bool,
    pub rank: usize,
    pub frobenius_norm: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.nonnegative && self.potent
    }
}

/// Validation of a raw matrix, which may still carry negative entries.
pub fn inspect_matrix(matrix: &DMatrix<f64>, r: u32, cfg: &ToleranceConfig) -> ValidationReport {
    let norm = linalg::frobenius(matrix);
    let min_entry = matrix.iter().copied().fold(f64::INFINITY, f64::min);
    let min_entry = if min_entry.is_finite() {
        min_entry
    } else {
        0.0
    };
    let nonnegative = min_entry >= -cfg.tol_support * matrix.amax().max(1.0);
    let residual = if r >= 1 {
        linalg::frobenius(&(linalg::matrix_power(matrix, r) - matrix))
    } else {
        f64::INFINITY
    };
    let scale = norm.max(1.0);
    ValidationReport {
        nonnegative,
        min_entry,
        potency_residual: residual,
        relative_residual: residual / scale,
        potent: r >= 2 && residual <= cfg.tol_potency * scale,
        rank: linalg::numerical_rank(matrix, cfg.tol_rank),
        frobenius_norm: norm,
    }
}

/// Smallest `s` in `[2, r_max]` with `A^s = A` at `tol_potency`.
pub fn minimal_potency(op: &NonnegativeOperator, r_max: u32, cfg: &ToleranceConfig) -> Option<u32> {
    let a = op.matrix();
    let bound = cfg.tol_potency * op.frobenius_norm().max(1.0);
    let mut power = a.clone();
    for s in 2..=r_max {
        power = &power * a;
        if linalg::frobenius(&(&power - a)) <= bound {
            return Some(s);
        }
    }
    None
}

/// Spanning list of the range `R(A)`.
#[derive(Clone, Debug)]
pub struct RangeBasis {
    pub functions: Vec<MeasurableFunction>,
}

impl RangeBasis {
    pub fn dimension(&self) -> usize {
        self.functions.len()
    }
}

/// Orthonormal basis of the column space found by pivoted Gram-Schmidt with
/// cutoff `tol_rank`. These are generally mixed functions; the forge makes
/// them nonnegative.
pub fn range_basis(op: &NonnegativeOperator, cfg: &ToleranceConfig) -> Result<RangeBasis> {
    let mut functions = Vec::new();
    for (k, q) in linalg::column_space(op.matrix(), cfg.tol_rank)
        .iter()
        .enumerate()
    {
        let f = op
            .space()
            .normalized(&MeasurableFunction::new(q.iter().copied().collect()))?;
        if !op.is_range_member(&f, cfg)? {
            return Err(Error::Precondition(format!(
                "range vector {k} is not fixed by A^(r-1); operator is not {}-potent",
                op.potency()
            )));
        }
        functions.push(f);
    }
    Ok(RangeBasis { functions })
}

/// `A* f` for the weighted inner product: `(A* f)_j = (1/mu_j) sum_i A_ij mu_i f_i`.
pub fn apply_adjoint(
    op: &NonnegativeOperator,
    f: &MeasurableFunction,
) -> Result<MeasurableFunction> {
    op.space().check(f)?;
    let w = op.space().weights();
    let a = op.matrix();
    let n = op.dim();
    let coords = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| a[(i, j)] * w[i] * f.coords()[i])
                .sum::<f64>()
                / w[j]
        })
        .collect();
    Ok(MeasurableFunction::new(coords))
}

/// Searches the numerical null space for a nonzero nonnegative function.
///
/// Solves `max sum_i f_i` subject to `0 <= f_i <= 1` and `f` orthogonal to
/// an orthonormal basis of the row space. A positive
/// optimum yields the witness; it is then cleaned and re-verified against
/// `||Af|| <= tol_potency * ||f||`.
pub fn kernel_nonnegative_witness(
    op: &NonnegativeOperator,
    cfg: &ToleranceConfig,
) -> Result<Option<MeasurableFunction>> {
    let n = op.dim();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..n).map(|_| lp.add_var(1.0, (0.0, 1.0))).collect();
    for row in linalg::column_space(&op.matrix().transpose(), cfg.tol_rank) {
        let expr: Vec<_> = vars.iter().zip(row.iter()).map(|(&v, &c)| (v, c)).collect();
        lp.add_constraint(expr.as_slice(), ComparisonOp::Eq, 0.0);
    }
    let solution = lp
        .solve()
        .map_err(|e| Error::LinearProgram(e.to_string()))?;
    if solution.objective() <= cfg.tol_support {
        return Ok(None);
    }
    let raw = MeasurableFunction::new(vars.iter().map(|&v| solution[v]).collect());
    let sup = raw.sup_norm();
    if raw
        .coords()
        .iter()
        .any(|&x| x < -cfg.tol_support.sqrt() * sup)
    {
        return Ok(None);
    }
    let witness = MeasurableFunction::new(raw.coords().iter().map(|&x| x.max(0.0) / sup).collect())
        .cleaned(cfg);
    let image = op.apply(&witness)?;
    if op.space().norm(&image)? <= cfg.tol_potency * op.space().norm(&witness)? {
        Ok(Some(witness))
    } else {
        Ok(None)
    }
}

/// Enumeration cross-check for [`kernel_nonnegative_witness`].
///
/// For an entrywise nonnegative matrix, `Af = 0` with `f >= 0` forces every
/// column in `Supp f` to vanish, so a nonnegative kernel element with support
/// `S` exists iff `A chi_S = 0`. All nonempty patterns `S` are tried and the
/// largest annihilated one is returned.
pub fn kernel_witness_oracle(
    op: &NonnegativeOperator,
    cfg: &ToleranceConfig,
    limit: usize,
) -> Result<Option<AtomSet>> {
    let n = op.dim();
    if n > limit {
        return Err(Error::OracleRefused { n, limit });
    }
    let space = op.space();
    for size in (1..=n).rev() {
        for combo in (0..n).combinations(size) {
            let set: AtomSet = combo.into_iter().collect();
            let chi = space.indicator(&set);
            let image = op.apply(&chi)?;
            if space.norm(&image)? <= cfg.tol_potency * space.norm(&chi)? {
                return Ok(Some(set));
            }
        }
    }
    Ok(None)
}

/// Consistency check of the zero-image property of nonnegative operators:
/// `Af = 0` for a strictly positive `f` forces `A = 0`.
///
/// Returns `Ok(false)` when `Af` is not negligible. When it is negligible the
/// entrywise bound `A_ij <= (Af)_i / f_j` gives
/// `||A||_F <= sqrt(n) ||Af|| / min_j f_j`; exceeding that bound is reported
/// as [`Error::ZeroCheckViolation`]. Returns `Ok(true)` otherwise.
pub fn zero_image_check(
    op: &NonnegativeOperator,
    f: &MeasurableFunction,
    cfg: &ToleranceConfig,
) -> Result<bool> {
    op.space().check(f)?;
    if !f.is_strictly_positive(cfg) {
        return Err(Error::Precondition(
            "zero-image check needs a strictly positive function".into(),
        ));
    }
    let image = op.apply(f)?;
    let euclid = |g: &MeasurableFunction| g.coords().iter().map(|x| x * x).sum::<f64>().sqrt();
    let image_norm = euclid(&image);
    if image_norm > cfg.tol_potency * euclid(f) {
        return Ok(false);
    }
    let f_min = f.coords().iter().copied().fold(f64::INFINITY, f64::min);
    let bound = (op.dim() as f64).sqrt() * image_norm / f_min * (1.0 + 1e-9);
    let norm = op.frobenius_norm();
    if norm > bound {
        return Err(Error::ZeroCheckViolation { norm, bound });
    }
    Ok(true)
}

/// Support of `f` as an atom set, convenience for witness reporting.
pub fn witness_support(f: &MeasurableFunction, cfg: &ToleranceConfig) -> AtomSet {
    support(f, cfg)
}
