//! Conversion of an arbitrary range basis into a nonnegative basis with
//! pairwise disjoint supports.
//!
//! The forge keeps two pools, `orth` (pairwise disjoint nonnegative functions)
//! and `non` (the rest). Each drawn function is resolved against every `orth`
//! member it overlaps. A resolution replaces the `orth` member by pieces lying
//! inside its support and leaves a remainder outside it, which is carried on
//! to the next `orth` member. Every piece is a restriction of the inputs to a
//! set on which they are range functions, and is checked for range membership.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, SpanBuilder};
use crate::measure_space::{
    classify_supports, is_mixed, positive_negative_parts, support, AtomSet, DiscreteMeasureSpace,
    MeasurableFunction, OverlapClass, ToleranceConfig,
};
use crate::operator::{range_basis, NonnegativeOperator};

/// How a basis function came about.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    Original,
    SplitPositive,
    SplitNegative,
    OverlapResolved,
}

/// Ordered functions with cached supports and origin tags.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisSet {
    functions: Vec<MeasurableFunction>,
    supports: Vec<AtomSet>,
    origins: Vec<Origin>,
}

impl BasisSet {
    pub fn from_functions(functions: Vec<MeasurableFunction>, cfg: &ToleranceConfig) -> Self {
        let origins = vec![Origin::Original; functions.len()];
        Self::with_origins(functions, origins, cfg)
    }

    pub fn with_origins(
        functions: Vec<MeasurableFunction>,
        origins: Vec<Origin>,
        cfg: &ToleranceConfig,
    ) -> Self {
        assert_eq!(functions.len(), origins.len(), "one origin per function");
        let supports = functions.iter().map(|f| support(f, cfg)).collect();
        Self {
            functions,
            supports,
            origins,
        }
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn functions(&self) -> &[MeasurableFunction] {
        &self.functions
    }

    pub fn supports(&self) -> &[AtomSet] {
        &self.supports
    }

    pub fn origins(&self) -> &[Origin] {
        &self.origins
    }

    pub fn into_functions(self) -> Vec<MeasurableFunction> {
        self.functions
    }

    /// Pairwise overlap classes; entry `(i, j)` classifies `(f_i, f_j)`.
    pub fn overlap_classes(&self) -> Result<Vec<Vec<OverlapClass>>> {
        self.supports
            .iter()
            .map(|a| {
                self.supports
                    .iter()
                    .map(|b| classify_supports(a, b))
                    .collect()
            })
            .collect()
    }

    pub fn rank(&self, space: &DiscreteMeasureSpace, cfg: &ToleranceConfig) -> usize {
        let refs: Vec<&MeasurableFunction> = self.functions.iter().collect();
        linalg::function_rank(space, &refs, cfg.tol_rank)
    }

    pub fn is_support_disjoint(&self) -> bool {
        self.supports
            .iter()
            .enumerate()
            .all(|(i, a)| self.supports[i + 1..].iter().all(|b| a.is_disjoint(b)))
    }

    /// Supports sorted by smallest atom, for comparing partitions.
    pub fn support_partition(&self) -> Vec<AtomSet> {
        let mut parts = self.supports.clone();
        parts.sort();
        parts
    }
}

/// Relative distance from `f` to the span of `basis` in the weighted norm.
pub fn span_residual(
    space: &DiscreteMeasureSpace,
    basis: &[MeasurableFunction],
    f: &MeasurableFunction,
) -> f64 {
    let mut span = SpanBuilder::new(space, 0.0);
    for b in basis {
        span.try_push(b);
    }
    span.distance(f)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    SplitMixed,
    IdenticalSupports,
    NestedSupports,
    PartialDependent,
    PartialIndependent,
    Prune,
}

/// One rule application. Indices are function ids: the input basis holds ids
/// `0..len`, and each produced function receives a fresh id.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForgeStep {
    pub rule: Rule,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub produced: Vec<MeasurableFunction>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dropped: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ForgeTrace {
    pub steps: Vec<ForgeStep>,
    /// `(orth_count, nonorth_count)` after initialization and after each draw.
    pub counter_history: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl ForgeTrace {
    pub fn count(&self, rule: Rule) -> usize {
        self.steps.iter().filter(|s| s.rule == rule).count()
    }

    /// Overlap resolutions, i.e. every step except splits and prunes.
    pub fn resolutions(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| !matches!(s.rule, Rule::SplitMixed | Rule::Prune))
            .count()
    }
}

#[derive(Clone, Debug, Default)]
pub struct ForgeOptions {
    /// Rule applications allowed before giving up; `None` means `50 N^2`.
    pub budget: Option<usize>,
    /// Shuffle the draw order with this seed instead of drawing by index.
    pub shuffle_seed: Option<u64>,
}

/// Splits a mixed range function into its positive and negative parts and
/// checks that both parts are still fixed by `A^(r-1)`.
pub fn split_mixed_in_range(
    op: &NonnegativeOperator,
    f: &MeasurableFunction,
    cfg: &ToleranceConfig,
) -> Result<(MeasurableFunction, MeasurableFunction)> {
    let norm = op.space().norm(f)?;
    let bound = cfg.tol_potency * norm;
    if op.range_residual(f)? > bound {
        return Err(Error::Precondition(
            "function to split is not in the range of the operator".into(),
        ));
    }
    if !is_mixed(f, cfg) {
        return Err(Error::Precondition("function to split is not mixed".into()));
    }
    let (plus, minus) = positive_negative_parts(&f.cleaned(cfg));
    for part in [&plus, &minus] {
        let residual = op.range_residual(part)?;
        if residual > bound {
            return Err(Error::RangeSplitViolation { residual, bound });
        }
    }
    Ok((plus, minus))
}

/// Result of [`construct_mixed`]: `f - p g = u_plus - u_minus`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedConstruction {
    pub p: f64,
    pub u_plus: MeasurableFunction,
    pub u_minus: MeasurableFunction,
}

/// Picks `p > 0` so that `f - p g` is mixed.
///
/// On the common support `C` the ratios `f_i / g_i` are sorted and `p` is the
/// midpoint of the widest gap between consecutive ratios. When the two
/// functions are proportional on `C`, `p = max + 1` if `f` lives outside `g`,
/// otherwise `p = min / 2` if `g` lives outside `f`. Disjoint supports take
/// `p = 1`.
pub fn construct_mixed(
    f: &MeasurableFunction,
    g: &MeasurableFunction,
    cfg: &ToleranceConfig,
) -> Result<MixedConstruction> {
    if f.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: f.len(),
            found: g.len(),
        });
    }
    for h in [f, g] {
        if h.is_zero(cfg) {
            return Err(Error::DegenerateInput(
                "construct_mixed needs nonzero inputs".into(),
            ));
        }
        if !h.is_nonnegative(cfg) {
            return Err(Error::Precondition(
                "construct_mixed needs nonnegative inputs".into(),
            ));
        }
    }
    let (f, g) = (f.cleaned(cfg), g.cleaned(cfg));
    let p = mixing_scalar(&f, &g, cfg)?;
    let u = f.sub_scaled(p, &g);
    let (u_plus, u_minus) = positive_negative_parts(&u);
    if !is_mixed(&u, cfg) {
        return Err(Error::Dependence(format!(
            "f - {p} g is not mixed; inputs are numerically dependent"
        )));
    }
    Ok(MixedConstruction { p, u_plus, u_minus })
}

/// The scalar rule of [`construct_mixed`] on cleaned nonnegative inputs.
fn mixing_scalar(
    f: &MeasurableFunction,
    g: &MeasurableFunction,
    cfg: &ToleranceConfig,
) -> Result<f64> {
    let (sf, sg) = (support(f, cfg), support(g, cfg));
    let common = sf.intersection(&sg);
    if common.is_empty() {
        return Ok(1.0);
    }
    let mut ratios: Vec<f64> = common
        .iter()
        .map(|i| f.coords()[i] / g.coords()[i])
        .collect();
    ratios.sort_by(f64::total_cmp);
    let (min, max) = (ratios[0], ratios[ratios.len() - 1]);
    if !proportional(&f.restrict(&common), &g.restrict(&common), cfg.tol_rank) {
        Ok(widest_gap_midpoint(&ratios))
    } else if !sf.is_subset(&sg) {
        Ok(max + 1.0)
    } else if !sg.is_subset(&sf) {
        Ok(min / 2.0)
    } else {
        Err(Error::Dependence(
            "inputs are proportional on a common support".into(),
        ))
    }
}

fn widest_gap_midpoint(sorted: &[f64]) -> f64 {
    let (k, _) = sorted
        .windows(2)
        .enumerate()
        .map(|(k, w)| (k, w[1] - w[0]))
        .fold((0, f64::NEG_INFINITY), |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        });
    0.5 * (sorted[k] + sorted[k + 1])
}

/// Sine of the angle between `x` and `y` is at most `tol` (Euclidean; a
/// proportionality test does not depend on the weights).
fn proportional(x: &MeasurableFunction, y: &MeasurableFunction, tol: f64) -> bool {
    let xx: f64 = x.coords().iter().map(|a| a * a).sum();
    let yy: f64 = y.coords().iter().map(|a| a * a).sum();
    if xx == 0.0 || yy == 0.0 {
        return true;
    }
    let c = x
        .coords()
        .iter()
        .zip(y.coords())
        .map(|(a, b)| a * b)
        .sum::<f64>()
        / xx;
    let r: f64 = x
        .coords()
        .iter()
        .zip(y.coords())
        .map(|(a, b)| (b - c * a).powi(2))
        .sum();
    (r / yy).sqrt() <= tol
}

/// Partitions the common support of two nonnegative functions with equal
/// supports into classes on which they are proportional, and returns `x`
/// restricted to each class.
///
/// Each round applies the [`construct_mixed`] scalar rule to the current pair and splits the
/// class by the sign of `x - p y`; the positive and negative parts of that
/// difference are themselves range functions, so every class is too.
pub fn split_equal_support(
    x: &MeasurableFunction,
    y: &MeasurableFunction,
    cfg: &ToleranceConfig,
) -> Result<Vec<MeasurableFunction>> {
    let sx = support(x, cfg);
    if sx != support(y, cfg) {
        return Err(Error::Precondition(
            "split_equal_support needs equal supports".into(),
        ));
    }
    let mut classes = Vec::new();
    let mut pending = vec![sx];
    while let Some(set) = pending.pop() {
        let (xs, ys) = (x.restrict(&set), y.restrict(&set));
        if set.len() < 2 || proportional(&xs, &ys, cfg.tol_rank) {
            classes.push(set);
            continue;
        }
        let p = mixing_scalar(&xs, &ys, cfg)?;
        let (above, below): (Vec<usize>, Vec<usize>) =
            set.iter().partition(|&i| x.coords()[i] > p * y.coords()[i]);
        if above.is_empty() || below.is_empty() {
            classes.push(set);
            continue;
        }
        pending.push(below.into_iter().collect());
        pending.push(above.into_iter().collect());
    }
    classes.sort();
    Ok(classes.iter().map(|c| x.restrict(c)).collect())
}

/// Pieces produced by resolving an overlapping pair `(h, w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairResolution {
    pub rule: Rule,
    /// Pairwise disjoint functions inside `Supp h`.
    pub inside: Vec<MeasurableFunction>,
    /// `w` restricted to `Supp w \ Supp h`, when nonempty.
    pub remainder: Option<MeasurableFunction>,
}

/// Resolves one overlapping pair of nonnegative functions.
///
/// * Equal supports: the ratio-class split of the pair.
/// * Nested supports: the outer function restricted to the difference
///   (the positive part of `outer - p inner` with `p` above every ratio),
///   plus the ratio-class split of the inner function against the negative
///   part; the split is trivial when the restrictions are proportional.
/// * Partial overlap: the parts of `h - a w` and `w - a' h` outside the
///   common support, with `a`, `a'` half the smallest ratio on it, plus the
///   ratio-class split on the common support (a single piece when the
///   restrictions there are proportional).
pub fn resolve_pair(
    h: &MeasurableFunction,
    w: &MeasurableFunction,
    cfg: &ToleranceConfig,
) -> Result<PairResolution> {
    let (h, w) = (h.cleaned(cfg), w.cleaned(cfg));
    let (s, t) = (support(&h, cfg), support(&w, cfg));
    match classify_supports(&s, &t)? {
        OverlapClass::Disjoint => Err(Error::Precondition(
            "resolve_pair needs overlapping supports".into(),
        )),
        OverlapClass::Equal => {
            let inside = if proportional(&h, &w, cfg.tol_rank) {
                vec![h]
            } else {
                split_equal_support(&h, &w, cfg)?
            };
            Ok(PairResolution {
                rule: Rule::IdenticalSupports,
                inside,
                remainder: None,
            })
        }
        OverlapClass::FirstInsideSecond => {
            let (outer_only, inner) = nested(&h, &w, &s, &t, cfg)?;
            Ok(PairResolution {
                rule: Rule::NestedSupports,
                inside: inner,
                remainder: Some(outer_only),
            })
        }
        OverlapClass::SecondInsideFirst => {
            let (outer_only, inner) = nested(&w, &h, &t, &s, cfg)?;
            let mut inside = vec![outer_only];
            inside.extend(inner);
            Ok(PairResolution {
                rule: Rule::NestedSupports,
                inside,
                remainder: None,
            })
        }
        OverlapClass::Partial => {
            let common = s.intersection(&t);
            let (hr, hs) = (h.restrict(&common), w.restrict(&common));
            let f_r = h.restrict(&s.difference(&t));
            let f_s = w.restrict(&t.difference(&s));
            let (rule, mut inside) = if proportional(&hr, &hs, cfg.tol_rank) {
                (Rule::PartialDependent, vec![hr])
            } else {
                (
                    Rule::PartialIndependent,
                    split_equal_support(&hr, &hs, cfg)?,
                )
            };
            inside.insert(0, f_r);
            Ok(PairResolution {
                rule,
                inside,
                remainder: Some(f_s),
            })
        }
    }
}

/// `(outer | D, pieces of inner)` for `Supp inner = C` strictly inside
/// `Supp outer`, `D` the difference.
fn nested(
    inner: &MeasurableFunction,
    outer: &MeasurableFunction,
    c: &AtomSet,
    t: &AtomSet,
    cfg: &ToleranceConfig,
) -> Result<(MeasurableFunction, Vec<MeasurableFunction>)> {
    let d = t.difference(c);
    let outer_only = outer.restrict(&d);
    let g = outer.restrict(c);
    if proportional(inner, &g, cfg.tol_rank) {
        return Ok((outer_only, vec![inner.clone()]));
    }
    let p = 2.0
        * c.iter()
            .map(|i| outer.coords()[i] / inner.coords()[i])
            .fold(0.0, f64::max);
    let (_, minus) = positive_negative_parts(&outer.sub_scaled(p, inner));
    let minus = minus.restrict(c);
    Ok((outer_only, split_equal_support(inner, &minus, cfg)?))
}

/// Keeps `target` functions of full rank, preferring overlap-resolved
/// functions, then those overlapping the fewest other candidates, then larger
/// norms. The survivors keep their relative order; the dropped indices are
/// returned alongside.
pub fn prune_to_basis(
    space: &DiscreteMeasureSpace,
    candidates: &BasisSet,
    target: usize,
    cfg: &ToleranceConfig,
) -> Result<(BasisSet, Vec<usize>)> {
    let order = priority_order(space, candidates)?;
    let keep = greedy_independent(space, candidates.functions(), &order, target, cfg)?;
    let mut kept = Vec::new();
    let mut origins = Vec::new();
    let mut dropped = Vec::new();
    for (i, &k) in keep.iter().enumerate() {
        if k {
            kept.push(candidates.functions[i].clone());
            origins.push(candidates.origins[i]);
        } else {
            dropped.push(i);
        }
    }
    Ok((BasisSet::with_origins(kept, origins, cfg), dropped))
}

fn priority_order(space: &DiscreteMeasureSpace, set: &BasisSet) -> Result<Vec<usize>> {
    let mut keys = Vec::with_capacity(set.len());
    for (i, f) in set.functions.iter().enumerate() {
        let overlaps = set
            .supports
            .iter()
            .enumerate()
            .filter(|&(j, s)| j != i && !s.is_disjoint(&set.supports[i]))
            .count();
        let resolved = set.origins[i] == Origin::OverlapResolved;
        keys.push((!resolved, overlaps, -space.norm(f)?, i));
    }
    keys.sort_by(|a, b| {
        (a.0, a.1)
            .cmp(&(b.0, b.1))
            .then(a.2.total_cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });
    Ok(keys.into_iter().map(|k| k.3).collect())
}

fn greedy_independent(
    space: &DiscreteMeasureSpace,
    functions: &[MeasurableFunction],
    order: &[usize],
    target: usize,
    cfg: &ToleranceConfig,
) -> Result<Vec<bool>> {
    let mut span = SpanBuilder::new(space, cfg.tol_rank);
    let mut keep = vec![false; functions.len()];
    for &i in order {
        if span.dim() == target {
            break;
        }
        if span.try_push(&functions[i]) {
            keep[i] = true;
        }
    }
    if span.dim() < target {
        return Err(Error::BasisLoss {
            rank: span.dim(),
            target,
        });
    }
    Ok(keep)
}

/// Replaces every mixed member by its two parts, flips nonpositive members,
/// and prunes back to a basis of the same span.
pub fn nonnegative_basis(
    op: &NonnegativeOperator,
    basis: &BasisSet,
    cfg: &ToleranceConfig,
) -> Result<BasisSet> {
    let mut forge = Forge::new(op, cfg, usize::MAX);
    let members = forge.import(basis)?;
    let target = forge.rank_of(&members);
    let members = forge.nonnegative(members, target)?;
    Ok(Forge::to_basis(members, cfg))
}

/// Resolves the overlap between members `i` and `j` and prunes the result
/// back to the original size.
pub fn resolve_overlap(
    op: &NonnegativeOperator,
    basis: &BasisSet,
    i: usize,
    j: usize,
    cfg: &ToleranceConfig,
) -> Result<BasisSet> {
    if i >= basis.len() || j >= basis.len() || i == j {
        return Err(Error::Precondition(format!(
            "indices {i}, {j} do not name two members of a basis of size {}",
            basis.len()
        )));
    }
    let mut forge = Forge::new(op, cfg, usize::MAX);
    let mut members = forge.import(basis)?;
    let target = forge.rank_of(&members);
    let (inside, remainder) = forge.resolve(&members[i], &members[j])?;
    let mut replacements = inside;
    replacements.extend(remainder);
    let (lo, hi) = (i.min(j), i.max(j));
    members.remove(hi);
    members.splice(lo..lo + 1, replacements);
    let members = forge.prune(members, target, true)?;
    Ok(Forge::to_basis(members, cfg))
}

/// Nonnegative, support-disjoint basis of `R(A)` starting from
/// [`range_basis`].
pub fn orthogonalize(
    op: &NonnegativeOperator,
    cfg: &ToleranceConfig,
    opts: &ForgeOptions,
) -> Result<(BasisSet, ForgeTrace)> {
    let start = range_basis(op, cfg)?;
    let basis = BasisSet::from_functions(start.functions, cfg);
    orthogonalize_basis(op, &basis, cfg, opts)
}

/// Same as [`orthogonalize`] from a caller supplied basis of `R(A)`.
pub fn orthogonalize_basis(
    op: &NonnegativeOperator,
    basis: &BasisSet,
    cfg: &ToleranceConfig,
    opts: &ForgeOptions,
) -> Result<(BasisSet, ForgeTrace)> {
    let n_range = crate::linalg::numerical_rank(op.matrix(), cfg.tol_rank);
    let budget = opts.budget.unwrap_or(50 * n_range * n_range);
    let mut forge = Forge::new(op, cfg, budget);
    let members = forge.import(basis)?;
    for m in &members {
        if !op.is_range_member(&m.f, cfg)? {
            return Err(Error::Precondition(format!(
                "basis function {} is not in the range",
                m.id
            )));
        }
    }
    let target = forge.rank_of(&members);
    if target != n_range {
        return Err(Error::Precondition(format!(
            "basis spans dimension {target}, range has dimension {n_range}"
        )));
    }
    let members = forge.nonnegative(members, target)?;
    let mut draws: Vec<Member> = members;
    if let Some(seed) = opts.shuffle_seed {
        draws.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut non: VecDeque<Member> = draws.into();
    let mut orth: Vec<Member> = Vec::new();
    if let Some(first) = non.pop_front() {
        orth.push(first);
        forge.trace.counter_history.push((orth.len(), non.len()));
    }
    while let Some(g) = non.pop_front() {
        let before = orth.len();
        let mut work = Some(g);
        let mut idx = 0;
        while idx < orth.len() {
            let Some(w) = work.as_ref() else { break };
            if orth[idx].supp.is_disjoint(&w.supp) {
                idx += 1;
                continue;
            }
            let h = orth.remove(idx);
            let (inside, remainder) = forge.resolve(&h, w)?;
            let k = inside.len();
            orth.splice(idx..idx, inside);
            idx += k;
            work = remainder;
        }
        orth.extend(work);
        let n_orth = orth.len();
        let mut pool = orth;
        pool.extend(non);
        let mut kept = forge.prune(pool, target, false)?;
        non = kept.split_off(n_orth.min(kept.len())).into();
        orth = kept;
        if orth.len() != n_orth {
            return Err(Error::ConsistencyFault(
                "prune discarded a support-disjoint function".into(),
            ));
        }
        if orth.len() <= before {
            return Err(Error::ConsistencyFault(format!(
                "draw did not enlarge the orthogonal pool ({before} -> {})",
                orth.len()
            )));
        }
        forge.trace.counter_history.push((orth.len(), non.len()));
    }
    let result = Forge::to_basis(orth, cfg);
    if !result.is_support_disjoint() {
        forge
            .trace
            .diagnostics
            .push("residual overlap between output functions".into());
    }
    Ok((result, forge.trace))
}

struct Member {
    id: usize,
    f: MeasurableFunction,
    supp: AtomSet,
    origin: Origin,
}

struct Forge<'a> {
    op: &'a NonnegativeOperator,
    cfg: &'a ToleranceConfig,
    trace: ForgeTrace,
    next_id: usize,
    budget: usize,
    applied: usize,
}

impl<'a> Forge<'a> {
    fn new(op: &'a NonnegativeOperator, cfg: &'a ToleranceConfig, budget: usize) -> Self {
        Self {
            op,
            cfg,
            trace: ForgeTrace::default(),
            next_id: 0,
            budget,
            applied: 0,
        }
    }

    fn member(&mut self, f: &MeasurableFunction, origin: Origin) -> Result<Member> {
        let f = self.op.space().normalized(f)?.cleaned(self.cfg);
        let supp = support(&f, self.cfg);
        let id = self.next_id;
        self.next_id += 1;
        Ok(Member {
            id,
            f,
            supp,
            origin,
        })
    }

    /// Zero functions keep their id but are dropped.
    fn import(&mut self, basis: &BasisSet) -> Result<Vec<Member>> {
        let mut out = Vec::new();
        for (f, &origin) in basis.functions.iter().zip(&basis.origins) {
            self.op.space().check(f)?;
            if f.is_zero(self.cfg) {
                self.next_id += 1;
                continue;
            }
            out.push(self.member(f, origin)?);
        }
        Ok(out)
    }

    fn rank_of(&self, members: &[Member]) -> usize {
        let refs: Vec<&MeasurableFunction> = members.iter().map(|m| &m.f).collect();
        linalg::function_rank(self.op.space(), &refs, self.cfg.tol_rank)
    }

    fn record(
        &mut self,
        rule: Rule,
        inputs: Vec<usize>,
        outputs: &[&Member],
        dropped: Vec<usize>,
    ) -> Result<()> {
        self.trace.steps.push(ForgeStep {
            rule,
            inputs,
            outputs: outputs.iter().map(|m| m.id).collect(),
            produced: outputs.iter().map(|m| m.f.clone()).collect(),
            dropped,
        });
        if rule != Rule::Prune {
            self.applied += 1;
            if self.applied > self.budget {
                return Err(Error::BudgetExceeded {
                    budget: self.budget,
                    trace: Box::new(self.trace.clone()),
                });
            }
        }
        Ok(())
    }

    fn nonnegative(&mut self, members: Vec<Member>, target: usize) -> Result<Vec<Member>> {
        let mut out = Vec::new();
        for m in members {
            if is_mixed(&m.f, self.cfg) {
                let (plus, minus) = split_mixed_in_range(self.op, &m.f, self.cfg)?;
                let p = self.member(&plus, Origin::SplitPositive)?;
                let n = self.member(&minus, Origin::SplitNegative)?;
                self.record(Rule::SplitMixed, vec![m.id], &[&p, &n], Vec::new())?;
                out.push(p);
                out.push(n);
            } else if m.f.is_nonpositive(self.cfg) {
                out.push(Member {
                    f: m.f.scaled(-1.0),
                    ..m
                });
            } else {
                out.push(m);
            }
        }
        self.prune(out, target, true)
    }

    /// With `prioritize` false the members are taken in the given order.
    fn prune(
        &mut self,
        members: Vec<Member>,
        target: usize,
        prioritize: bool,
    ) -> Result<Vec<Member>> {
        let functions: Vec<MeasurableFunction> = members.iter().map(|m| m.f.clone()).collect();
        let order: Vec<usize> = if prioritize {
            let set = BasisSet {
                functions: functions.clone(),
                supports: members.iter().map(|m| m.supp.clone()).collect(),
                origins: members.iter().map(|m| m.origin).collect(),
            };
            priority_order(self.op.space(), &set)?
        } else {
            (0..members.len()).collect()
        };
        let keep = greedy_independent(self.op.space(), &functions, &order, target, self.cfg)?;
        let (kept, dropped): (Vec<_>, Vec<_>) =
            members.into_iter().zip(keep).partition(|(_, k)| *k);
        if !dropped.is_empty() {
            let ids = dropped.iter().map(|(m, _)| m.id).collect();
            self.record(Rule::Prune, Vec::new(), &[], ids)?;
        }
        Ok(kept.into_iter().map(|(m, _)| m).collect())
    }

    fn resolve(&mut self, h: &Member, w: &Member) -> Result<(Vec<Member>, Option<Member>)> {
        let res = resolve_pair(&h.f, &w.f, self.cfg)?;
        let mut inside = Vec::with_capacity(res.inside.len());
        for f in res.inside.iter().chain(res.remainder.iter()) {
            let norm = self.op.space().norm(f)?;
            let residual = self.op.range_residual(f)?;
            let bound = self.cfg.tol_potency * norm;
            if residual > bound {
                return Err(Error::RangeSplitViolation { residual, bound });
            }
        }
        for f in &res.inside {
            inside.push(self.member(f, Origin::OverlapResolved)?);
        }
        let remainder = match &res.remainder {
            Some(f) => Some(self.member(f, Origin::OverlapResolved)?),
            None => None,
        };
        let outputs: Vec<&Member> = inside.iter().chain(remainder.iter()).collect();
        self.record(res.rule, vec![h.id, w.id], &outputs, Vec::new())?;
        Ok((inside, remainder))
    }

    fn to_basis(members: Vec<Member>, cfg: &ToleranceConfig) -> BasisSet {
        let origins = members.iter().map(|m| m.origin).collect();
        let functions = members.into_iter().map(|m| m.f).collect();
        BasisSet::with_origins(functions, origins, cfg)
    }
}
