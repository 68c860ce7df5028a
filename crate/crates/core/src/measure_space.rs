//! Finite weighted measure spaces and real functions on them.
//!
//! A [`DiscreteMeasureSpace`] is a finite set of atoms with strictly positive
//! weights. Functions are coordinate vectors over the atoms and the inner
//! product is `<f, g> = sum_i f_i g_i mu_i`. Supports are decided with a
//! threshold relative to the sup-norm of the function, so they do not change
//! when a function is rescaled.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Functions whose sup-norm is at or below this value are the zero function,
/// regardless of the relative support threshold.
pub const ZERO_FLOOR: f64 = 1e-12;

/// Numerical thresholds used throughout the crate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    /// Relative threshold (to the sup-norm) below which a coordinate is zero.
    pub tol_support: f64,
    /// Residual bound for `A^r = A` and range membership.
    pub tol_potency: f64,
    /// Relative singular value / residual threshold for rank decisions.
    pub tol_rank: f64,
    /// Relative inner-product bound for declared orthogonality.
    pub tol_orth: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            tol_support: 1e-9,
            tol_potency: 1e-8,
            tol_rank: 1e-10,
            tol_orth: 1e-9,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("tol_support", self.tol_support),
            ("tol_potency", self.tol_potency),
            ("tol_rank", self.tol_rank),
            ("tol_orth", self.tol_orth),
        ] {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} = {value} must lie in (0, 1)"
                )));
            }
        }
        Ok(())
    }
}

/// Finite atom set with strictly positive weights.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasureSpace {
    weights: Vec<f64>,
}

impl DiscreteMeasureSpace {
    /// Zero-measure atoms are rejected rather than silently dropped, so every
    /// almost-everywhere statement on the space is pointwise.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidSpace("space needs at least one atom".into()));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidSpace(format!(
                    "atom {i} has weight {w}; weights must be finite and positive"
                )));
            }
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0; n])
    }

    pub fn atom_count(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn measure(&self, set: &AtomSet) -> f64 {
        set.iter().map(|i| self.weights[i]).sum()
    }

    /// Same atoms with every weight multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.weights.iter().map(|w| w * factor).collect())
    }

    pub fn check(&self, f: &MeasurableFunction) -> Result<()> {
        if f.len() != self.atom_count() {
            return Err(Error::DimensionMismatch {
                expected: self.atom_count(),
                found: f.len(),
            });
        }
        Ok(())
    }

    pub fn inner_product(&self, f: &MeasurableFunction, g: &MeasurableFunction) -> Result<f64> {
        self.check(f)?;
        self.check(g)?;
        Ok(f.coords
            .iter()
            .zip(&g.coords)
            .zip(&self.weights)
            .map(|((a, b), w)| a * b * w)
            .sum())
    }

    /// Weighted L2 norm.
    pub fn norm(&self, f: &MeasurableFunction) -> Result<f64> {
        Ok(self.inner_product(f, f)?.sqrt())
    }

    /// `f / ||f||`, or an error for the zero function.
    pub fn normalized(&self, f: &MeasurableFunction) -> Result<MeasurableFunction> {
        let norm = self.norm(f)?;
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::DegenerateInput(
                "cannot normalize the zero function".into(),
            ));
        }
        Ok(f.scaled(1.0 / norm))
    }

    /// Indicator function of `set`.
    pub fn indicator(&self, set: &AtomSet) -> MeasurableFunction {
        let mut coords = vec![0.0; self.atom_count()];
        for i in set.iter() {
            coords[i] = 1.0;
        }
        MeasurableFunction::new(coords)
    }

    pub fn full_set(&self) -> AtomSet {
        AtomSet::from_iter(0..self.atom_count())
    }

    pub fn complement(&self, set: &AtomSet) -> AtomSet {
        AtomSet::from_iter((0..self.atom_count()).filter(|i| !set.contains(*i)))
    }

    /// Pairwise orthogonality under the weighted inner product, relative to
    /// the product of norms.
    pub fn are_orthogonal(
        &self,
        f: &MeasurableFunction,
        g: &MeasurableFunction,
        cfg: &ToleranceConfig,
    ) -> Result<bool> {
        let ip = self.inner_product(f, g)?;
        Ok(ip.abs() <= cfg.tol_orth * self.norm(f)? * self.norm(g)?)
    }
}

/// Real coordinate vector over the atoms of a space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeasurableFunction {
    coords: Vec<f64>,
}

impl MeasurableFunction {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(vec![0.0; n])
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.coords.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.coords.iter().map(|x| x * factor).collect())
    }

    /// `self - factor * other`.
    pub fn sub_scaled(&self, factor: f64, other: &Self) -> Self {
        Self::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - factor * b)
                .collect(),
        )
    }

    /// Copy of `self` that vanishes off `set`.
    pub fn restrict(&self, set: &AtomSet) -> Self {
        Self::new(
            self.coords
                .iter()
                .enumerate()
                .map(|(i, &x)| if set.contains(i) { x } else { 0.0 })
                .collect(),
        )
    }

    /// Coordinates below the support threshold are set to exactly zero.
    pub fn cleaned(&self, cfg: &ToleranceConfig) -> Self {
        let supp = support(self, cfg);
        self.restrict(&supp)
    }

    /// Every coordinate at least `-tol_support * ||f||_inf`.
    pub fn is_nonnegative(&self, cfg: &ToleranceConfig) -> bool {
        let floor = -cfg.tol_support * self.sup_norm();
        self.coords.iter().all(|&x| x >= floor)
    }

    /// Every coordinate at most `tol_support * ||f||_inf`.
    pub fn is_nonpositive(&self, cfg: &ToleranceConfig) -> bool {
        let ceil = cfg.tol_support * self.sup_norm();
        self.coords.iter().all(|&x| x <= ceil)
    }

    /// Strict positivity on every atom, relative to the sup-norm.
    pub fn is_strictly_positive(&self, cfg: &ToleranceConfig) -> bool {
        let sup = self.sup_norm();
        sup > ZERO_FLOOR && self.coords.iter().all(|&x| x > cfg.tol_support * sup)
    }

    pub fn is_zero(&self, cfg: &ToleranceConfig) -> bool {
        support(self, cfg).is_empty()
    }
}

impl From<Vec<f64>> for MeasurableFunction {
    fn from(coords: Vec<f64>) -> Self {
        Self::new(coords)
    }
}

/// Subset of atom indices (zero-based).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomSet {
    members: BTreeSet<usize>,
}

impl AtomSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(&i)
    }

    pub fn insert(&mut self, i: usize) -> bool {
        self.members.insert(i)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self {
            members: self.members.intersection(&other.members).copied().collect(),
        }
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self {
            members: self.members.difference(&other.members).copied().collect(),
        }
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            members: self.members.union(&other.members).copied().collect(),
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.members.is_subset(&other.members)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.members.is_disjoint(&other.members)
    }

    /// Zero-based members in increasing order.
    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// One-based member list, the convention used in files and reports.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }

    pub fn from_one_based(indices: &[usize]) -> Result<Self> {
        indices
            .iter()
            .map(|&i| {
                i.checked_sub(1)
                    .ok_or_else(|| Error::Config("atom indices are one-based".into()))
            })
            .collect()
    }
}

impl FromIterator<usize> for AtomSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self {
            members: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for AtomSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

/// How the supports of two nonzero functions sit relative to each other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OverlapClass {
    Disjoint,
    Equal,
    FirstInsideSecond,
    SecondInsideFirst,
    /// Common part, first-only part and second-only part are all nonempty.
    Partial,
}

impl OverlapClass {
    pub fn swapped(self) -> Self {
        match self {
            OverlapClass::FirstInsideSecond => OverlapClass::SecondInsideFirst,
            OverlapClass::SecondInsideFirst => OverlapClass::FirstInsideSecond,
            other => other,
        }
    }
}

/// `{ i : |f_i| > tol_support * ||f||_inf }`; empty for the numerically zero
/// function.
pub fn support(f: &MeasurableFunction, cfg: &ToleranceConfig) -> AtomSet {
    let sup = f.sup_norm();
    if sup <= ZERO_FLOOR {
        return AtomSet::new();
    }
    let threshold = cfg.tol_support * sup;
    f.coords()
        .iter()
        .enumerate()
        .filter(|(_, x)| x.abs() > threshold)
        .map(|(i, _)| i)
        .collect()
}

/// `(f+, f-)` with `f = f+ - f-`; the two parts never share an atom.
pub fn positive_negative_parts(f: &MeasurableFunction) -> (MeasurableFunction, MeasurableFunction) {
    let plus = f.coords().iter().map(|&x| x.max(0.0)).collect();
    let minus = f.coords().iter().map(|&x| (-x).max(0.0)).collect();
    (
        MeasurableFunction::new(plus),
        MeasurableFunction::new(minus),
    )
}

/// Both parts have nonempty support. Thresholds are taken relative to the
/// whole function so that rounding dust on one side does not count.
pub fn is_mixed(f: &MeasurableFunction, cfg: &ToleranceConfig) -> bool {
    let supp = support(f, cfg);
    let mut pos = false;
    let mut neg = false;
    for i in supp.iter() {
        if f.coords()[i] > 0.0 {
            pos = true;
        } else {
            neg = true;
        }
    }
    pos && neg
}

pub fn overlap_class(
    f: &MeasurableFunction,
    g: &MeasurableFunction,
    cfg: &ToleranceConfig,
) -> Result<OverlapClass> {
    if f.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: f.len(),
            found: g.len(),
        });
    }
    let sf = support(f, cfg);
    let sg = support(g, cfg);
    classify_supports(&sf, &sg)
}

/// Classification on already computed supports.
pub fn classify_supports(sf: &AtomSet, sg: &AtomSet) -> Result<OverlapClass> {
    if sf.is_empty() || sg.is_empty() {
        return Err(Error::DegenerateInput(
            "overlap class needs two nonzero functions".into(),
        ));
    }
    let common = sf.intersection(sg);
    Ok(if common.is_empty() {
        OverlapClass::Disjoint
    } else if sf == sg {
        OverlapClass::Equal
    } else if sf.is_subset(sg) {
        OverlapClass::FirstInsideSecond
    } else if sg.is_subset(sf) {
        OverlapClass::SecondInsideFirst
    } else {
        OverlapClass::Partial
    })
}
