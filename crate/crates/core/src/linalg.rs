//! Dense helpers shared by the operator, forge and decomposer modules.

use nalgebra::{DMatrix, DVector};

use crate::measure_space::{DiscreteMeasureSpace, MeasurableFunction};

/// Singular values in decreasing order.
pub(crate) fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Rank as the size of the pivoted Gram-Schmidt basis with cutoff `tol`.
pub(crate) fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    column_space(m, tol).len()
}

/// `a^k` by repeated squaring; `a^0` is the identity.
pub(crate) fn matrix_power(a: &DMatrix<f64>, mut k: u32) -> DMatrix<f64> {
    let n = a.nrows();
    let mut result = DMatrix::identity(n, n);
    let mut base = a.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

pub(crate) fn apply(a: &DMatrix<f64>, f: &MeasurableFunction) -> MeasurableFunction {
    let v = DVector::from_column_slice(f.coords());
    MeasurableFunction::new((a * v).iter().copied().collect())
}

/// Columns `sqrt(mu) * f / ||f||`: the weighted geometry becomes Euclidean and
/// every column has unit length, so rank thresholds are scale free.
pub(crate) fn weighted_unit_columns(
    space: &DiscreteMeasureSpace,
    functions: &[&MeasurableFunction],
) -> DMatrix<f64> {
    let n = space.atom_count();
    let mut m = DMatrix::zeros(n, functions.len());
    for (j, f) in functions.iter().enumerate() {
        let mut col: Vec<f64> = f
            .coords()
            .iter()
            .zip(space.weights())
            .map(|(x, w)| x * w.sqrt())
            .collect();
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            col.iter_mut().for_each(|x| *x /= norm);
        }
        m.set_column(j, &DVector::from_vec(col));
    }
    m
}

/// Numerical rank of a list of functions in the weighted geometry.
pub(crate) fn function_rank(
    space: &DiscreteMeasureSpace,
    functions: &[&MeasurableFunction],
    tol: f64,
) -> usize {
    if functions.is_empty() {
        return 0;
    }
    numerical_rank(&weighted_unit_columns(space, functions), tol)
}

/// Orthonormal basis of the column space by Gram-Schmidt with column
/// pivoting. Stops once every remaining residual is at most `tol` times the
/// largest column norm.
pub(crate) fn column_space(m: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let mut cols: Vec<DVector<f64>> = m.column_iter().map(|c| c.into_owned()).collect();
    let scale = cols.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    while scale > 0.0 && basis.len() < m.nrows() {
        let Some((k, best)) = cols
            .iter()
            .map(|c| c.norm())
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(&b.1))
        else {
            break;
        };
        if best <= tol * scale {
            break;
        }
        let mut q = cols.swap_remove(k);
        for b in &basis {
            let c = b.dot(&q);
            q.axpy(-c, b, 1.0);
        }
        let norm = q.norm();
        if norm <= tol * scale {
            break;
        }
        q /= norm;
        for c in cols.iter_mut() {
            let d = q.dot(c);
            c.axpy(-d, &q, 1.0);
        }
        basis.push(q);
    }
    basis
}

/// Incremental orthonormal basis used for greedy independence tests.
pub(crate) struct SpanBuilder {
    basis: Vec<DVector<f64>>,
    sqrt_weights: DVector<f64>,
    tol: f64,
}

impl SpanBuilder {
    pub(crate) fn new(space: &DiscreteMeasureSpace, tol: f64) -> Self {
        Self {
            basis: Vec::new(),
            sqrt_weights: DVector::from_iterator(
                space.atom_count(),
                space.weights().iter().map(|w| w.sqrt()),
            ),
            tol,
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.basis.len()
    }

    fn residual(&self, f: &MeasurableFunction) -> Option<DVector<f64>> {
        let mut v = DVector::from_column_slice(f.coords()).component_mul(&self.sqrt_weights);
        let norm = v.norm();
        if norm == 0.0 {
            return None;
        }
        v /= norm;
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for q in &self.basis {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        Some(v)
    }

    /// Sine of the angle between `f` and the current span.
    pub(crate) fn distance(&self, f: &MeasurableFunction) -> f64 {
        self.residual(f).map_or(0.0, |v| v.norm())
    }

    /// Adds `f` if it is independent of the current span; reports whether it was.
    pub(crate) fn try_push(&mut self, f: &MeasurableFunction) -> bool {
        match self.residual(f) {
            Some(v) => {
                let r = v.norm();
                if r > self.tol {
                    self.basis.push(v / r);
                    true
                } else {
                    false
                }
            }
            None => false,
        }
    }
}

pub(crate) fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.norm()
}
