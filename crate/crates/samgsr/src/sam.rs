//! Per-gene moderated statistics and gene-set functional scores.
//!
//! The per-gene statistic is the moderated mean difference
//! `d_i = (x̄_d(i) - x̄_c(i)) / (s(i) + s0)`, where `s(i)` is the two-group
//! pooled SD and `s0` a small positive offset that stabilizes low-variance
//! genes. A gene set's functional score is the sum of squared statistics
//! over its members. The connectivity-weighted variant substitutes
//! `d_i^w = w̃_i * d_i`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::connectivity::WeightVector;
use crate::data::ExpressionDataset;
use crate::error::{Error, Result};
use crate::num::{real, real_usize, Real};

/// How the `s0` offset is chosen from the per-gene pooled SDs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method", content = "value", bound = "")]
pub enum S0Method<R: Real> {
    /// Median of the positive pooled SDs.
    Median,
    /// A caller-supplied positive constant.
    Fixed(R),
    /// Nearest-rank q-th percentile (q in 0..=100) of the positive pooled SDs.
    Percentile(R),
}

/// Per-gene statistics aligned with a dataset's gene order.
#[derive(Debug, Clone, PartialEq)]
pub struct SamStatistics<R: Real> {
    gene_ids: Vec<String>,
    gene_index: HashMap<String, usize>,
    d: Vec<R>,
    s: Vec<R>,
    s0: R,
    weighted: bool,
    weights_used: Option<WeightVector<R>>,
}

impl<R: Real> SamStatistics<R> {
    pub fn gene_ids(&self) -> &[String] {
        &self.gene_ids
    }

    pub fn d(&self) -> &[R] {
        &self.d
    }

    pub fn s(&self) -> &[R] {
        &self.s
    }

    pub fn s0(&self) -> R {
        self.s0
    }

    pub fn is_weighted(&self) -> bool {
        self.weighted
    }

    pub fn weights_used(&self) -> Option<&WeightVector<R>> {
        self.weights_used.as_ref()
    }

    pub fn d_of(&self, gene: &str) -> Option<R> {
        self.gene_index.get(gene).map(|&i| self.d[i])
    }

    pub fn gene_pos(&self, gene: &str) -> Option<usize> {
        self.gene_index.get(gene).copied()
    }
}

/// Functional score of one gene set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SetScore<R: Real> {
    pub set_name: String,
    pub score: R,
    pub size: usize,
}

/// Group means and pooled SDs for a fixed binary split, one entry per gene.
/// This is the label-dependent kernel shared by the observed statistics and
/// every permutation replicate.
#[derive(Debug, Clone)]
pub(crate) struct GroupMoments<R: Real> {
    pub mean_diff: Vec<R>,
    pub pooled_sd: Vec<R>,
}

/// Compute mean differences and pooled SDs, `pos` minus `neg`, per gene.
/// Both groups need at least 2 members.
pub(crate) fn group_moments<R: Real>(
    dataset: &ExpressionDataset<R>,
    pos: &[usize],
    neg: &[usize],
) -> Result<GroupMoments<R>> {
    if pos.len() < 2 || neg.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "pooled SD needs at least 2 samples per group (got {} and {})",
            pos.len(),
            neg.len()
        )));
    }
    let n_pos = real_usize::<R>(pos.len());
    let n_neg = real_usize::<R>(neg.len());
    let dof = real_usize::<R>(pos.len() + neg.len() - 2);
    let g = dataset.n_genes();
    let mut mean_diff = Vec::with_capacity(g);
    let mut pooled_sd = Vec::with_capacity(g);
    for row_idx in 0..g {
        let row = dataset.row(row_idx);
        let mut sum_pos = R::zero();
        for &i in pos {
            sum_pos += row[i];
        }
        let mut sum_neg = R::zero();
        for &i in neg {
            sum_neg += row[i];
        }
        let m_pos = sum_pos / n_pos;
        let m_neg = sum_neg / n_neg;
        // per-group sums of squares are combined with a single commutative
        // addition, so swapping the group roles negates the mean difference
        // bitwise and leaves the pooled SD bitwise unchanged
        let mut ss_pos = R::zero();
        for &i in pos {
            let d = row[i] - m_pos;
            ss_pos += d * d;
        }
        let mut ss_neg = R::zero();
        for &i in neg {
            let d = row[i] - m_neg;
            ss_neg += d * d;
        }
        mean_diff.push(m_pos - m_neg);
        pooled_sd.push(((ss_pos + ss_neg) / dof).sqrt());
    }
    Ok(GroupMoments {
        mean_diff,
        pooled_sd,
    })
}

/// Two-group pooled SD of a single gene:
/// `sqrt((SS_d + SS_c) / (n_d + n_c - 2))`.
pub fn pooled_sd<R: Real>(
    dataset: &ExpressionDataset<R>,
    gene: &str,
    positive_class: &str,
) -> Result<R> {
    let (pos, neg) = dataset.binary_groups(positive_class)?;
    if dataset.gene_pos(gene).is_none() {
        return Err(Error::InvalidInput(format!("gene '{gene}' not in dataset")));
    }
    let single = dataset.select_genes(&[gene.to_string()])?;
    let moments = group_moments(&single, &pos, &neg)?;
    Ok(moments.pooled_sd[0])
}

/// Choose `s0` from the per-gene pooled SDs.
///
/// `Median` and `Percentile` consider positive SDs only and error when
/// there are none; `Fixed` passes its value through (must be positive).
pub fn compute_s0<R: Real>(all_s: &[R], method: S0Method<R>) -> Result<R> {
    if all_s.is_empty() {
        return Err(Error::InvalidInput("no pooled SDs supplied for s0".into()));
    }
    match method {
        S0Method::Fixed(v) => {
            if v > R::zero() {
                Ok(v)
            } else {
                Err(Error::Config(format!("fixed s0 must be positive, got {v}")))
            }
        }
        S0Method::Median => {
            let pos = positive_sorted(all_s)?;
            let m = pos.len();
            if m % 2 == 1 {
                Ok(pos[m / 2])
            } else {
                Ok((pos[m / 2 - 1] + pos[m / 2]) / real::<R>(2.0))
            }
        }
        S0Method::Percentile(q) => {
            if q < R::zero() || q > real::<R>(100.0) {
                return Err(Error::Config(format!(
                    "s0 percentile must be in 0..=100, got {q}"
                )));
            }
            let pos = positive_sorted(all_s)?;
            // nearest-rank: smallest value with at least q% of mass at or below
            let m = real_usize::<R>(pos.len());
            let rank = (q / real::<R>(100.0) * m).ceil();
            let idx = rank.to_usize().unwrap_or(0).saturating_sub(1).min(pos.len() - 1);
            Ok(pos[idx])
        }
    }
}

fn positive_sorted<R: Real>(all_s: &[R]) -> Result<Vec<R>> {
    let mut pos: Vec<R> = all_s.iter().copied().filter(|s| *s > R::zero()).collect();
    if pos.is_empty() {
        return Err(Error::InvalidInput(
            "all pooled SDs are zero; use a fixed s0 for degenerate data".into(),
        ));
    }
    pos.sort_by(|a, b| a.partial_cmp(b).expect("pooled SDs are not NaN"));
    Ok(pos)
}

/// Per-gene statistics for a binary dataset with a fixed `s0`. The group
/// designated positive contributes the minuend of the mean difference.
pub fn sam_statistic<R: Real>(
    dataset: &ExpressionDataset<R>,
    s0: R,
    positive_class: &str,
) -> Result<SamStatistics<R>> {
    // the negated form also rejects NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(s0 > R::zero()) {
        return Err(Error::Config(format!("s0 must be positive, got {s0}")));
    }
    let (pos, neg) = dataset.binary_groups(positive_class)?;
    let moments = group_moments(dataset, &pos, &neg)?;
    let d = d_from_moments(&moments, s0);
    let gene_ids = dataset.gene_ids().to_vec();
    let gene_index = gene_ids
        .iter()
        .enumerate()
        .map(|(i, g)| (g.clone(), i))
        .collect();
    Ok(SamStatistics {
        gene_ids,
        gene_index,
        d,
        s: moments.pooled_sd,
        s0,
        weighted: false,
        weights_used: None,
    })
}

#[inline]
pub(crate) fn d_from_moments<R: Real>(moments: &GroupMoments<R>, s0: R) -> Vec<R> {
    moments
        .mean_diff
        .iter()
        .zip(&moments.pooled_sd)
        .map(|(diff, s)| *diff / (*s + s0))
        .collect()
}

/// Multiply every statistic by its gene's normalized weight.
pub fn weighted_sam_statistic<R: Real>(
    stats: &SamStatistics<R>,
    weights: &WeightVector<R>,
) -> Result<SamStatistics<R>> {
    let mut d = Vec::with_capacity(stats.d.len());
    for (gene, value) in stats.gene_ids.iter().zip(&stats.d) {
        let w = weights
            .get(gene)
            .ok_or_else(|| Error::InvalidInput(format!("no weight for gene '{gene}'")))?;
        d.push(w * *value);
    }
    Ok(SamStatistics {
        gene_ids: stats.gene_ids.clone(),
        gene_index: stats.gene_index.clone(),
        d,
        s: stats.s.clone(),
        s0: stats.s0,
        weighted: true,
        weights_used: Some(weights.clone()),
    })
}

/// Sum of squared (possibly weighted) statistics over the set's members,
/// in member order.
pub fn samgs_score<R: Real>(
    stats: &SamStatistics<R>,
    set_name: &str,
    genes: &[String],
) -> Result<SetScore<R>> {
    let mut score = R::zero();
    for g in genes {
        let d = stats
            .d_of(g)
            .ok_or_else(|| Error::InvalidInput(format!("gene '{g}' of set '{set_name}' has no statistic; restrict the collection first")))?;
        score += d * d;
    }
    Ok(SetScore {
        set_name: set_name.to_string(),
        score,
        size: genes.len(),
    })
}
