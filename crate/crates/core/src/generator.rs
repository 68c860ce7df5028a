//! Random nonnegative r-potent operators with known structure.
//!
//! Atoms are split into `N` disjoint blocks (plus optional leftover atoms).
//! Block `i` carries a nonnegative function `e_i`, and
//! `A = sum_i lambda_i e_sigma(i) <., e_i> / <e_i, e_i>`, where the cycles of
//! `sigma` have lengths dividing `r - 1` and the scalars multiply to one along
//! every cycle. Leftover atoms are annihilated, so they produce a nonnegative
//! kernel element.

use nalgebra::DMatrix;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decomposer::TransitionStructure;
use crate::error::{Error, Result};
use crate::forge::BasisSet;
use crate::io::{one_based, one_based_sets};
use crate::linalg;
use crate::measure_space::{
    is_mixed, support, AtomSet, DiscreteMeasureSpace, MeasurableFunction, ToleranceConfig,
};
use crate::operator::NonnegativeOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarMode {
    Unit,
    /// `lambda_i` in `[0.5, 2]` with product one along each cycle.
    RandomCycleProductOne,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    Uniform,
    /// Weights uniform in `[0.5, 2]`.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueMode {
    /// Block functions are indicators.
    Unit,
    /// Block function values uniform in `[0.5, 1.5]`.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    #[serde(rename = "N")]
    pub range_dim: usize,
    pub r: u32,
    /// Cycle lengths of `sigma`, laid out on consecutive basis indices.
    pub cycles: Vec<usize>,
    pub scalar_mode: ScalarMode,
    pub weight_mode: WeightMode,
    pub value_mode: ValueMode,
    /// Atoms outside every block.
    pub leftover: usize,
    /// Require a cycle of length exactly `r - 1`.
    pub exact_potency: bool,
    /// Assign atoms to blocks in random order instead of contiguously.
    pub shuffle_atoms: bool,
    pub seed: u64,
}

impl GeneratorConfig {
    /// Unit scalars, uniform weights, indicator blocks, contiguous layout.
    pub fn simple(n: usize, range_dim: usize, r: u32, cycles: Vec<usize>, seed: u64) -> Self {
        Self {
            n,
            range_dim,
            r,
            cycles,
            scalar_mode: ScalarMode::Unit,
            weight_mode: WeightMode::Uniform,
            value_mode: ValueMode::Unit,
            leftover: 0,
            exact_potency: false,
            shuffle_atoms: false,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r < 2 {
            return Err(Error::Config(format!("r = {} must be at least 2", self.r)));
        }
        if self.range_dim > self.n {
            return Err(Error::Config(format!(
                "N = {} exceeds n = {}",
                self.range_dim, self.n
            )));
        }
        if self.range_dim + self.leftover > self.n {
            return Err(Error::Config(format!(
                "N = {} blocks and {} leftover atoms need more than n = {} atoms",
                self.range_dim, self.leftover, self.n
            )));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.range_dim == 0 && self.leftover < self.n {
            return Err(Error::Config("N = 0 leaves atoms in an empty block".into()));
        }
        let period = (self.r - 1) as usize;
        if let Some(&bad) = self
            .cycles
            .iter()
            .find(|&&l| l == 0 || !period.is_multiple_of(l))
        {
            return Err(Error::Config(format!(
                "cycle length {bad} does not divide r - 1 = {period}"
            )));
        }
        let total: usize = self.cycles.iter().sum();
        if total != self.range_dim {
            return Err(Error::Config(format!(
                "cycle lengths sum to {total}, expected N = {}",
                self.range_dim
            )));
        }
        if self.exact_potency && !self.cycles.contains(&period) {
            return Err(Error::Config(format!(
                "exact potency needs a cycle of length r - 1 = {period}"
            )));
        }
        Ok(())
    }
}

/// What the generator knows about an operator it produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    #[serde(with = "one_based_sets")]
    pub blocks: Vec<AtomSet>,
    #[serde(with = "one_based")]
    pub leftover: Vec<usize>,
    pub cycles: Vec<usize>,
    pub transition: TransitionStructure,
    pub basis: Vec<MeasurableFunction>,
}

#[derive(Clone, Debug)]
pub struct GeneratedOperator {
    pub operator: NonnegativeOperator,
    pub truth: TransitionStructure,
    pub basis: BasisSet,
    pub blocks: Vec<AtomSet>,
    pub leftover: AtomSet,
}

impl GeneratedOperator {
    pub fn ground_truth(&self, cycles: &[usize]) -> GroundTruth {
        GroundTruth {
            blocks: self.blocks.clone(),
            leftover: self.leftover.to_vec(),
            cycles: cycles.to_vec(),
            transition: self.truth.clone(),
            basis: self.basis.functions().to_vec(),
        }
    }
}

/// `sigma` with the given cycle lengths on consecutive indices.
pub fn permutation_from_cycles(cycles: &[usize]) -> Vec<usize> {
    let mut sigma = Vec::new();
    let mut start = 0;
    for &len in cycles {
        for k in 0..len {
            sigma.push(start + (k + 1) % len);
        }
        start += len;
    }
    sigma
}

pub fn random_rpotent(cfg: &GeneratorConfig) -> Result<GeneratedOperator> {
    cfg.validate()?;
    let tol = ToleranceConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n;
    let big_n = cfg.range_dim;

    let weights: Vec<f64> = match cfg.weight_mode {
        WeightMode::Uniform => vec![1.0; n],
        WeightMode::Random => (0..n).map(|_| rng.random_range(0.5..=2.0)).collect(),
    };
    let space = DiscreteMeasureSpace::new(weights)?;

    let mut atoms: Vec<usize> = (0..n).collect();
    if cfg.shuffle_atoms {
        atoms.shuffle(&mut rng);
    }
    let sizes = random_composition(n - cfg.leftover, big_n, &mut rng);
    let mut blocks = Vec::with_capacity(big_n);
    let mut next = 0;
    for &size in &sizes {
        blocks.push(
            atoms[next..next + size]
                .iter()
                .copied()
                .collect::<AtomSet>(),
        );
        next += size;
    }
    let leftover: AtomSet = atoms[next..].iter().copied().collect();

    let basis: Vec<MeasurableFunction> = blocks
        .iter()
        .map(|block| {
            let mut v = vec![0.0; n];
            for i in block.iter() {
                v[i] = match cfg.value_mode {
                    ValueMode::Unit => 1.0,
                    ValueMode::Random => rng.random_range(0.5..=1.5),
                };
            }
            MeasurableFunction::new(v)
        })
        .collect();

    let sigma = permutation_from_cycles(&cfg.cycles);
    let scalars = cycle_scalars(&cfg.cycles, cfg.scalar_mode, &mut rng);

    let mut matrix = DMatrix::zeros(n, n);
    let w = space.weights();
    for (i, e) in basis.iter().enumerate() {
        let target = &basis[sigma[i]];
        let norm_sq = space.inner_product(e, e)?;
        for a in blocks[sigma[i]].iter() {
            for b in blocks[i].iter() {
                matrix[(a, b)] += scalars[i] * target.coords()[a] * e.coords()[b] * w[b] / norm_sq;
            }
        }
    }
    let operator = NonnegativeOperator::new(space, matrix, cfg.r, &tol)?;
    let truth = TransitionStructure {
        sigma,
        scalars,
        residuals: vec![0.0; big_n],
    };
    Ok(GeneratedOperator {
        operator,
        truth,
        basis: BasisSet::from_functions(basis, &tol),
        blocks,
        leftover,
    })
}

/// `total` split into `parts` positive sizes, uniformly over compositions.
fn random_composition(total: usize, parts: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if parts == 0 {
        return Vec::new();
    }
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, total - 1, parts - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(total)) {
        sizes.push(c - prev);
        prev = c;
    }
    sizes
}

/// `lambda_i = exp(t_i - mean_cycle(t))` with `t_i` uniform in
/// `[-ln 2 / 2, ln 2 / 2]`, which keeps every scalar in `[0.5, 2]`.
fn cycle_scalars(cycles: &[usize], mode: ScalarMode, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut scalars = Vec::new();
    for &len in cycles {
        match mode {
            ScalarMode::Unit => scalars.extend(std::iter::repeat_n(1.0, len)),
            ScalarMode::RandomCycleProductOne => {
                let half = std::f64::consts::LN_2 / 2.0;
                let t: Vec<f64> = (0..len).map(|_| rng.random_range(-half..=half)).collect();
                let mean = t.iter().sum::<f64>() / len as f64;
                scalars.extend(t.iter().map(|x| (x - mean).exp()));
            }
        }
    }
    scalars
}

#[derive(Clone, Debug)]
pub struct ScrambledBasis {
    pub basis: BasisSet,
    /// False when no scramble was possible and the input came back unchanged.
    pub scrambled: bool,
}

/// `M truth` for a random `M` with entries in `[-1, 1]` and condition number
/// at most `1e3`, resampled until the result has a mixed function and an
/// overlapping pair.
pub fn scramble_basis(truth: &BasisSet, seed: u64, cfg: &ToleranceConfig) -> ScrambledBasis {
    const MAX_TRIES: usize = 100;
    let k = truth.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if k >= 2 {
        for _ in 0..MAX_TRIES {
            let m = DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..=1.0));
            let sv = linalg::singular_values(&m);
            if sv[k - 1] <= 0.0 || sv[0] / sv[k - 1] > 1e3 {
                continue;
            }
            let functions = combine(&m, truth.functions());
            let mixed = functions.iter().any(|f| is_mixed(f, cfg));
            let supports: Vec<AtomSet> = functions.iter().map(|f| support(f, cfg)).collect();
            let overlap =
                (0..k).any(|i| (i + 1..k).any(|j| !supports[i].is_disjoint(&supports[j])));
            if mixed && overlap {
                return ScrambledBasis {
                    basis: BasisSet::from_functions(functions, cfg),
                    scrambled: true,
                };
            }
        }
    }
    ScrambledBasis {
        basis: truth.clone(),
        scrambled: false,
    }
}

/// Rows of `m` applied as combinations of `functions`.
pub fn combine(m: &DMatrix<f64>, functions: &[MeasurableFunction]) -> Vec<MeasurableFunction> {
    let n = functions.first().map_or(0, MeasurableFunction::len);
    (0..m.nrows())
        .map(|row| {
            let mut v = vec![0.0; n];
            for (j, f) in functions.iter().enumerate() {
                for (x, y) in v.iter_mut().zip(f.coords()) {
                    *x += m[(row, j)] * y;
                }
            }
            MeasurableFunction::new(v)
        })
        .collect()
}

/// Answer a suite case is expected to produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectedVerdict {
    /// `N > r - 1`.
    Decomposable,
    /// A single `(r-1)`-cycle with `N = r - 1` whose blocks cover every atom.
    NotDecomposable,
    OracleDecided,
}

/// Parameter ranges for [`generate_suite`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteGrid {
    pub n_max: usize,
    #[serde(rename = "N_max")]
    pub range_dim_max: usize,
    pub r_values: Vec<u32>,
    /// Share of cases drawn from the `N = r - 1` single-cycle family.
    pub boundary_fraction: f64,
    /// Largest `n` for boundary cases, so the oracle can certify them.
    pub boundary_n_max: usize,
    pub leftover_probability: f64,
    pub exact_probability: f64,
}

impl Default for SuiteGrid {
    fn default() -> Self {
        Self {
            n_max: 24,
            range_dim_max: 8,
            r_values: (2..=7).collect(),
            boundary_fraction: 0.2,
            boundary_n_max: 12,
            leftover_probability: 0.15,
            exact_probability: 0.85,
        }
    }
}

impl SuiteGrid {
    /// Every case has `n <= 12`, so the oracle covers the whole suite.
    pub fn small() -> Self {
        Self {
            n_max: 12,
            ..Self::default()
        }
    }

    /// Only `N = r - 1` single-cycle cases with `r` in `{3, 4, 5}`.
    pub fn boundary() -> Self {
        Self {
            n_max: 12,
            r_values: vec![3, 4, 5],
            boundary_fraction: 1.0,
            ..Self::default()
        }
    }

    pub fn named(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(Self::default()),
            "small" => Ok(Self::small()),
            "boundary" => Ok(Self::boundary()),
            other => Err(Error::Config(format!(
                "unknown grid {other:?}; expected default, small or boundary"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r_values.is_empty() || self.r_values.iter().any(|&r| r < 2) {
            return Err(Error::Config("grid needs potencies r >= 2".into()));
        }
        let max_r = *self.r_values.iter().max().expect("nonempty");
        if (max_r - 1) as usize > self.range_dim_max || self.range_dim_max > self.n_max {
            return Err(Error::Config(
                "grid needs r - 1 <= N_max <= n_max for every r".into(),
            ));
        }
        if (max_r - 1) as usize > self.boundary_n_max.min(self.n_max) {
            return Err(Error::Config("boundary cases need n >= r - 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SuiteCase {
    pub index: usize,
    pub config: GeneratorConfig,
    pub generated: GeneratedOperator,
    pub scrambled: ScrambledBasis,
    pub expected: ExpectedVerdict,
    pub boundary: bool,
}

/// Deterministic per seed; case `i` draws from stream `i` of the seed, so
/// cases do not depend on each other.
pub fn generate_suite(count: usize, grid: &SuiteGrid, seed: u64) -> Result<Vec<SuiteCase>> {
    grid.validate()?;
    (0..count).map(|i| suite_case(i, grid, seed)).collect()
}

fn suite_case(index: usize, grid: &SuiteGrid, seed: u64) -> Result<SuiteCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let r = *grid.r_values.choose(&mut rng).expect("nonempty grid");
    let period = (r - 1) as usize;
    let boundary = rng.random_bool(grid.boundary_fraction);

    let (range_dim, cycles, leftover, exact) = if boundary {
        (period, vec![period], 0, true)
    } else {
        let exact = rng.random_bool(grid.exact_probability);
        let divisors: Vec<usize> = (1..=period).filter(|d| period.is_multiple_of(*d)).collect();
        let mut cycles = Vec::new();
        let range_dim = if exact {
            cycles.push(period);
            rng.random_range(period..=grid.range_dim_max)
        } else {
            rng.random_range(1..=grid.range_dim_max)
        };
        let mut remaining = range_dim - cycles.iter().sum::<usize>();
        while remaining > 0 {
            let fits: Vec<usize> = divisors
                .iter()
                .copied()
                .filter(|&d| d <= remaining)
                .collect();
            let d = *fits.choose(&mut rng).expect("1 always fits");
            cycles.push(d);
            remaining -= d;
        }
        cycles.shuffle(&mut rng);
        let leftover = if rng.random_bool(grid.leftover_probability) {
            rng.random_range(1..=3)
        } else {
            0
        };
        (range_dim, cycles, leftover, exact)
    };
    let n_cap = if boundary {
        grid.boundary_n_max.min(grid.n_max)
    } else {
        grid.n_max
    };
    let leftover = leftover.min(n_cap - range_dim);
    let n = rng.random_range(range_dim + leftover..=n_cap);

    let config = GeneratorConfig {
        n,
        range_dim,
        r,
        cycles,
        scalar_mode: if rng.random_bool(0.7) {
            ScalarMode::RandomCycleProductOne
        } else {
            ScalarMode::Unit
        },
        weight_mode: if rng.random_bool(0.7) {
            WeightMode::Random
        } else {
            WeightMode::Uniform
        },
        value_mode: if rng.random_bool(0.7) {
            ValueMode::Random
        } else {
            ValueMode::Unit
        },
        leftover,
        exact_potency: exact,
        shuffle_atoms: rng.random_bool(0.5),
        seed: rng.random(),
    };
    let generated = random_rpotent(&config)?;
    let scrambled = scramble_basis(&generated.basis, rng.random(), &ToleranceConfig::default());
    let expected = if boundary {
        ExpectedVerdict::NotDecomposable
    } else if range_dim > period {
        ExpectedVerdict::Decomposable
    } else {
        ExpectedVerdict::OracleDecided
    };
    Ok(SuiteCase {
        index,
        config,
        generated,
        scrambled,
        expected,
        boundary,
    })
}
