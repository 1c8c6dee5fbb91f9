//! Label-permutation significance testing for gene sets and for residual
//! subsets during reduction.
//!
//! Permutations are materialized once per plan and shared by every set and
//! every reduction step of a run, so all scores within a run face identical
//! label shuffles. For small samples the plan switches to exhaustive
//! enumeration of the distinct label assignments and records that it did.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connectivity::WeightVector;
use crate::data::{ExpressionDataset, GeneSetCollection};
use crate::error::{Error, Result};
use crate::num::{real_usize, Real};
use crate::sam::{compute_s0, d_from_moments, group_moments, S0Method};

/// Statistic configuration shared by observed and permuted computations.
///
/// `s0` is recomputed per permutation (pooled SDs depend on the grouping);
/// connectivity weights are label-free and stay fixed. `weights` must
/// already be normalized and must cover every dataset gene when
/// `weighted` is set.
#[derive(Debug, Clone)]
pub struct StatConfig<R: Real> {
    pub weighted: bool,
    pub weights: Option<WeightVector<R>>,
    pub s0: S0Method<R>,
    pub positive_class: String,
}

impl<R: Real> StatConfig<R> {
    pub fn unweighted(s0: S0Method<R>, positive_class: impl Into<String>) -> Self {
        Self {
            weighted: false,
            weights: None,
            s0,
            positive_class: positive_class.into(),
        }
    }

    pub fn weighted(
        weights: WeightVector<R>,
        s0: S0Method<R>,
        positive_class: impl Into<String>,
    ) -> Self {
        Self {
            weighted: true,
            weights: Some(weights),
            s0,
            positive_class: positive_class.into(),
        }
    }
}

/// Materialized list of label orderings: each permutation is a bijection
/// `perm` of sample indices, giving permuted labels `labels[perm[s]]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationPlan {
    perms: Vec<Vec<u32>>,
    seed: u64,
    requested_b: usize,
    exhaustive: bool,
}

impl PermutationPlan {
    pub fn b_used(&self) -> usize {
        self.perms.len()
    }

    pub fn requested_b(&self) -> usize {
        self.requested_b
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_exhaustive(&self) -> bool {
        self.exhaustive
    }

    pub fn permutations(&self) -> &[Vec<u32>] {
        &self.perms
    }
}

/// Derive an independent sub-seed from a master seed and a stream tag
/// (SplitMix64 finalizer). All randomness in a run flows from one master
/// seed through documented stream tags.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Number of distinct assignments of the label multiset, if it fits in u128.
fn distinct_assignments(labels: &[String]) -> Option<u128> {
    let mut counts: Vec<u128> = Vec::new();
    {
        use std::collections::HashMap;
        let mut map: HashMap<&str, u128> = HashMap::new();
        for l in labels {
            *map.entry(l.as_str()).or_insert(0) += 1;
        }
        counts.extend(map.values());
    }
    // multinomial coefficient n! / prod(n_c!) built up factor by factor
    let mut result: u128 = 1;
    let mut i: u128 = 1;
    for &c in &counts {
        for j in 1..=c {
            result = result.checked_mul(i)?;
            result /= j;
            i += 1;
        }
    }
    Some(result)
}

/// Enumerate all distinct label vectors of the multiset, in lexicographic
/// order of the sorted class names, each as a representative bijection.
fn exhaustive_bijections(labels: &[String]) -> Vec<Vec<u32>> {
    use std::collections::BTreeMap;
    let mut remaining: BTreeMap<&str, usize> = BTreeMap::new();
    for l in labels {
        *remaining.entry(l.as_str()).or_insert(0) += 1;
    }
    let classes: Vec<&str> = remaining.keys().copied().collect();
    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::with_capacity(labels.len());
    fn recurse<'a>(
        classes: &[&'a str],
        remaining: &mut BTreeMap<&'a str, usize>,
        current: &mut Vec<&'a str>,
        n: usize,
        out: &mut Vec<Vec<&'a str>>,
    ) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for &class in classes {
            let count = remaining[class];
            if count == 0 {
                continue;
            }
            *remaining.get_mut(class).unwrap() -= 1;
            current.push(class);
            recurse(classes, remaining, current, n, out);
            current.pop();
            *remaining.get_mut(class).unwrap() += 1;
        }
    }
    let mut vectors: Vec<Vec<&str>> = Vec::new();
    recurse(&classes, &mut remaining, &mut current, labels.len(), &mut vectors);

    // map each target label vector to a bijection: perm[s] is an original
    // index whose label equals the target label at position s
    for target in vectors {
        let mut queues: BTreeMap<&str, std::collections::VecDeque<u32>> = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            queues.entry(l.as_str()).or_default().push_back(i as u32);
        }
        let perm: Vec<u32> = target
            .iter()
            .map(|class| {
                queues
                    .get_mut(class)
                    .and_then(|q| q.pop_front())
                    .expect("target is a permutation of the label multiset")
            })
            .collect();
        out.push(perm);
    }
    out
}

/// Build a reproducible permutation plan: `B` uniform shuffles, or the full
/// set of distinct label assignments when that set is no larger than `B`.
pub fn build_plan(labels: &[String], b: usize, seed: u64) -> Result<PermutationPlan> {
    if b < 1 {
        return Err(Error::Config("permutation count B must be at least 1".into()));
    }
    if labels.is_empty() {
        return Err(Error::InvalidInput("cannot permute an empty label vector".into()));
    }
    if let Some(total) = distinct_assignments(labels) {
        if total <= b as u128 {
            return Ok(PermutationPlan {
                perms: exhaustive_bijections(labels),
                seed,
                requested_b: b,
                exhaustive: true,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: Vec<u32> = (0..labels.len() as u32).collect();
    let perms = (0..b)
        .map(|_| {
            let mut p = base.clone();
            p.shuffle(&mut rng);
            p
        })
        .collect();
    Ok(PermutationPlan {
        perms,
        seed,
        requested_b: b,
        exhaustive: false,
    })
}

/// Observed and per-permutation statistics for one (dataset, plan, config)
/// triple. Building the context is the expensive step; scoring any subset
/// against it is a cheap sum of squares.
pub struct PermutationContext<'a, R: Real> {
    dataset: &'a ExpressionDataset<R>,
    plan: &'a PermutationPlan,
    observed_d: Vec<R>,
    permuted_d: Vec<Vec<R>>,
}

impl<'a, R: Real> PermutationContext<'a, R> {
    pub fn new(
        dataset: &'a ExpressionDataset<R>,
        plan: &'a PermutationPlan,
        config: &StatConfig<R>,
    ) -> Result<Self> {
        let (pos, neg) = dataset.binary_groups(&config.positive_class)?;
        if config.weighted && config.weights.is_none() {
            return Err(Error::Config(
                "weighted statistics require a weight vector".into(),
            ));
        }
        for perm in plan.permutations() {
            if perm.len() != dataset.n_samples() {
                return Err(Error::InvalidInput(format!(
                    "plan permutes {} samples but dataset has {}",
                    perm.len(),
                    dataset.n_samples()
                )));
            }
        }
        // per-gene weight lookup aligned to dataset gene order
        let weight_by_row: Option<Vec<R>> = if config.weighted {
            let weights = config.weights.as_ref().expect("checked above");
            let mut aligned = Vec::with_capacity(dataset.n_genes());
            for g in dataset.gene_ids() {
                let w = weights
                    .get(g)
                    .ok_or_else(|| Error::InvalidInput(format!("no weight for gene '{g}'")))?;
                aligned.push(w);
            }
            Some(aligned)
        } else {
            None
        };

        let compute_d = |pos_idx: &[usize], neg_idx: &[usize]| -> Result<Vec<R>> {
            let moments = group_moments(dataset, pos_idx, neg_idx)?;
            let s0 = compute_s0(&moments.pooled_sd, config.s0)?;
            let mut d = d_from_moments(&moments, s0);
            if let Some(w) = &weight_by_row {
                for (value, wi) in d.iter_mut().zip(w) {
                    *value = *wi * *value;
                }
            }
            Ok(d)
        };

        let observed_d = compute_d(&pos, &neg)?;
        let labels = dataset.labels();
        let positive = config.positive_class.as_str();
        let permuted_d: Vec<Vec<R>> = plan
            .permutations()
            .par_iter()
            .map(|perm| {
                let mut pos_idx = Vec::with_capacity(pos.len());
                let mut neg_idx = Vec::with_capacity(neg.len());
                for (s, &src) in perm.iter().enumerate() {
                    if labels[src as usize] == positive {
                        pos_idx.push(s);
                    } else {
                        neg_idx.push(s);
                    }
                }
                compute_d(&pos_idx, &neg_idx)
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            dataset,
            plan,
            observed_d,
            permuted_d,
        })
    }

    pub fn plan(&self) -> &PermutationPlan {
        self.plan
    }

    pub fn observed_d(&self) -> &[R] {
        &self.observed_d
    }

    /// Map member genes to dataset rows; errors on the first unknown gene.
    pub fn member_rows(&self, set_name: &str, genes: &[String]) -> Result<Vec<usize>> {
        genes
            .iter()
            .map(|g| {
                self.dataset.gene_pos(g).ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "gene '{g}' of set '{set_name}' is not measured; restrict the collection first"
                    ))
                })
            })
            .collect()
    }

    /// Observed score and permutation p-value of the given rows, with the
    /// add-one estimator `(1 + #{b : score_b >= observed}) / (1 + B)`.
    /// Ties count toward the numerator.
    pub fn score_rows(&self, rows: &[usize]) -> (R, R) {
        let observed = sum_of_squares(&self.observed_d, rows);
        let mut count = 0usize;
        for d in &self.permuted_d {
            if sum_of_squares(d, rows) >= observed {
                count += 1;
            }
        }
        let p = real_usize::<R>(1 + count) / real_usize::<R>(1 + self.plan.b_used());
        (observed, p)
    }
}

#[inline]
fn sum_of_squares<R: Real>(d: &[R], rows: &[usize]) -> R {
    let mut sum = R::zero();
    for &r in rows {
        let v = d[r];
        sum += v * v;
    }
    sum
}

/// One gene set's observed score and permutation p-value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SetPValue<R: Real> {
    pub set_name: String,
    pub observed: R,
    pub p: R,
    pub b_used: usize,
}

/// Per-set significance results for a whole collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SetPValueTable<R: Real> {
    pub entries: Vec<SetPValue<R>>,
    pub exhaustive: bool,
}

impl<R: Real> SetPValueTable<R> {
    pub fn get(&self, set_name: &str) -> Option<&SetPValue<R>> {
        self.entries.iter().find(|e| e.set_name == set_name)
    }
}

/// Score every set of the collection against the plan.
pub fn set_pvalues<R: Real>(
    dataset: &ExpressionDataset<R>,
    collection: &GeneSetCollection,
    plan: &PermutationPlan,
    config: &StatConfig<R>,
) -> Result<SetPValueTable<R>> {
    let ctx = PermutationContext::new(dataset, plan, config)?;
    set_pvalues_with(&ctx, collection)
}

/// Same as [`set_pvalues`], reusing an existing context.
pub fn set_pvalues_with<R: Real>(
    ctx: &PermutationContext<'_, R>,
    collection: &GeneSetCollection,
) -> Result<SetPValueTable<R>> {
    let entries = collection
        .sets()
        .par_iter()
        .map(|set| {
            let rows = ctx.member_rows(&set.name, &set.genes)?;
            let (observed, p) = ctx.score_rows(&rows);
            Ok(SetPValue {
                set_name: set.name.clone(),
                observed,
                p,
                b_used: ctx.plan.b_used(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SetPValueTable {
        entries,
        exhaustive: ctx.plan.is_exhaustive(),
    })
}

/// Permutation p-value of a single gene subset under the same estimator
/// and the same materialized shuffles as [`set_pvalues`].
pub fn subset_pvalue<R: Real>(
    dataset: &ExpressionDataset<R>,
    gene_subset: &[String],
    plan: &PermutationPlan,
    config: &StatConfig<R>,
) -> Result<R> {
    if gene_subset.is_empty() {
        return Err(Error::InvalidInput(
            "cannot score an empty gene subset".into(),
        ));
    }
    let ctx = PermutationContext::new(dataset, plan, config)?;
    let rows = ctx.member_rows("<subset>", gene_subset)?;
    Ok(ctx.score_rows(&rows).1)
}
