use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{warnock_l2_squared, DiscrepancyReport, Measure};
use crate::{seed, Error, PointSet, ProjectionIndexSet, Result, Scalar};

/// Largest dimension for which all `2^d - 1` projections are enumerated.
pub const EXHAUSTIVE_MAX_DIM: usize = 20;

const MAX_ENUMERATED: f64 = ((1u64 << EXHAUSTIVE_MAX_DIM) - 1) as f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMode {
    Exhaustive,
    Random,
    Explicit,
}

/// Which coordinate projections enter a projection-averaged discrepancy.
///
/// In random mode each of the `k_samples` draws first picks a projection
/// order from `order_weights` (uniform over `1..=max_order` when absent) and
/// then a uniformly random subset of that order. Repeated draws are allowed.
/// `max_order` restricts both exhaustive and random modes to low orders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionSpec {
    pub mode: ProjectionMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit_sets: Option<Vec<ProjectionIndexSet>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ProjectionSpec {
    pub fn exhaustive() -> Self {
        Self { mode: ProjectionMode::Exhaustive, k_samples: None, order_weights: None, explicit_sets: None, max_order: None, seed: None }
    }

    /// All projections of order at most `max_order`.
    pub fn up_to_order(max_order: usize) -> Self {
        Self { max_order: Some(max_order), ..Self::exhaustive() }
    }

    pub fn random(k_samples: usize, seed: u64) -> Self {
        Self { mode: ProjectionMode::Random, k_samples: Some(k_samples), seed: Some(seed), ..Self::exhaustive() }
    }

    pub fn explicit(sets: Vec<ProjectionIndexSet>) -> Self {
        Self { mode: ProjectionMode::Explicit, explicit_sets: Some(sets), ..Self::exhaustive() }
    }

    pub fn with_order_weights(mut self, weights: Vec<f64>) -> Self {
        self.order_weights = Some(weights);
        self
    }

    pub fn with_max_order(mut self, max_order: usize) -> Self {
        self.max_order = Some(max_order);
        self
    }

    fn effective_max_order(&self, d: usize) -> usize {
        self.max_order.unwrap_or(d).min(d)
    }

    /// Checks the spec against a point-set dimension.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self, d: usize) -> Result<()> {
        if self.max_order == Some(0) {
            return Err(Error::InvalidParameter("max_order must be at least 1".into()));
        }
        if let Some(w) = &self.order_weights {
            if w.is_empty() || w.len() > d {
                return Err(Error::InvalidParameter(format!(
                    "order_weights has {} entries for dimension {d}",
                    w.len()
                )));
            }
            if w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                return Err(Error::InvalidParameter("order_weights must be non-negative".into()));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!("order_weights sum to {total}, not 1")));
            }
        }
        match self.mode {
            ProjectionMode::Exhaustive => {
                let count = projection_count(d, self.effective_max_order(d));
                if self.max_order.is_none() && d > EXHAUSTIVE_MAX_DIM || count > MAX_ENUMERATED {
                    return Err(Error::ComplexityBudgetExceeded { required: count, budget: MAX_ENUMERATED });
                }
            }
            ProjectionMode::Random => {
                if self.k_samples.unwrap_or(0) == 0 {
                    return Err(Error::InvalidParameter("random mode needs k_samples >= 1".into()));
                }
            }
            ProjectionMode::Explicit => {
                let sets = self.explicit_sets.as_deref().unwrap_or(&[]);
                if sets.is_empty() {
                    return Err(Error::InvalidParameter("explicit mode needs explicit_sets".into()));
                }
                for s in sets {
                    s.check_against(d)?;
                }
            }
        }
        Ok(())
    }

    /// The projections this spec selects for dimension `d`, drawing random
    /// ones from the spec's own seed.
    pub fn subsets(&self, d: usize) -> Result<Vec<ProjectionIndexSet>> {
        self.validate(d)?;
        match self.mode {
            ProjectionMode::Exhaustive => Ok(enumerate_projections(d, self.effective_max_order(d))),
            ProjectionMode::Random => {
                let mut rng = seed::rng(self.seed.unwrap_or(0));
                Ok(sample_projections(self, d, &mut rng))
            }
            ProjectionMode::Explicit => Ok(self.explicit_sets.clone().unwrap_or_default()),
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of non-empty projections of order at most `max_order`.
pub fn projection_count(d: usize, max_order: usize) -> f64 {
    (1..=max_order.min(d)).map(|k| binomial(d, k)).sum::<f64>().round()
}

/// All non-empty subsets of `{0..d}` with at most `max_order` elements,
/// ordered by size and then lexicographically.
pub fn enumerate_projections(d: usize, max_order: usize) -> Vec<ProjectionIndexSet> {
    let mut out = Vec::new();
    for order in 1..=max_order.min(d) {
        let mut idx: Vec<usize> = (0..order).collect();
        loop {
            out.push(ProjectionIndexSet::new(idx.clone()).expect("combination is strictly increasing"));
            // advance to the next combination
            let mut i = order;
            while i > 0 && idx[i - 1] == d - order + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..order {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    out
}

/// Draws `spec.k_samples` projections: an order, then a uniform subset of it.
pub fn sample_projections<R: Rng>(spec: &ProjectionSpec, d: usize, rng: &mut R) -> Vec<ProjectionIndexSet> {
    let k = spec.k_samples.unwrap_or(1);
    let max_order = spec.effective_max_order(d);
    let mut pool: Vec<usize> = (0..d).collect();
    (0..k)
        .map(|_| {
            let order = match &spec.order_weights {
                Some(w) => {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut pick = w.iter().rposition(|&x| x > 0.0).unwrap_or(0) + 1;
                    for (o, &p) in w.iter().enumerate() {
                        acc += p;
                        if u < acc && p > 0.0 {
                            pick = o + 1;
                            break;
                        }
                    }
                    pick
                }
                None => rng.random_range(1..=max_order),
            };
            for i in 0..order {
                let j = rng.random_range(i..d);
                pool.swap(i, j);
            }
            ProjectionIndexSet::from_unsorted(pool[..order].to_vec()).expect("non-empty draw")
        })
        .collect()
}

/// `Σ_s L2²(P^s)` over the given projections.
pub fn hickernell_squared<T: Scalar>(points: &PointSet<T>, subsets: &[ProjectionIndexSet]) -> Result<T> {
    let mut total = T::zero();
    for s in subsets {
        total += warnock_l2_squared(&points.project(s)?)?;
    }
    Ok(total)
}

/// Projection-summed L2 discrepancy `(Σ_s L2²(P^s))^(1/2)` for the
/// projections selected by `spec`.
pub fn hickernell_p2<T: Scalar>(points: &PointSet<T>, spec: &ProjectionSpec) -> Result<DiscrepancyReport> {
    let subsets = spec.subsets(points.dim())?;
    let value = hickernell_squared(points, &subsets)?.sqrt().as_f64();
    let (measure, listed) = match spec.mode {
        ProjectionMode::Exhaustive => (Measure::HickernellP2, None),
        ProjectionMode::Random => (Measure::HickernellRandom, Some(subsets)),
        ProjectionMode::Explicit => (Measure::HickernellP2, Some(subsets)),
    };
    Ok(DiscrepancyReport { measure, value, witness: None, subsets: listed, exact: true })
}
