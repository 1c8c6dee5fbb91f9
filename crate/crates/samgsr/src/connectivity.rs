//! Gene-gene interaction graph and the per-gene connectivity weights
//! derived from it.
//!
//! The graph is undirected and unweighted; self-loops are never stored.
//! A gene's connectivity weight is `1 + degree`, the row sum of the
//! adjacency matrix with a unit diagonal.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::GeneSetCollection;
use crate::error::{Error, Result};
use crate::num::{real_usize, Real};

/// Undirected gene-gene interaction structure over a fixed gene universe.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityGraph {
    gene_ids: Vec<String>,
    index: HashMap<String, usize>,
    neighbors: Vec<BTreeSet<usize>>,
    n_edges: usize,
}

/// Counts of input irregularities observed while building a graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphBuildReport {
    /// Edges dropped because an endpoint was outside the universe.
    pub dropped_edges: usize,
    /// Duplicate edges (including reversed duplicates) merged away.
    pub merged_duplicates: usize,
    /// Self-loop lines ignored (the unit diagonal is applied uniformly).
    pub self_loops: usize,
}

impl ConnectivityGraph {
    /// Build from an edge list, restricted to the given universe. Genes in
    /// the universe with no surviving edge remain as isolated nodes.
    pub fn build(
        edges: &[(String, String)],
        universe: &[String],
    ) -> Result<(Self, GraphBuildReport)> {
        let mut index = HashMap::with_capacity(universe.len());
        for (i, g) in universe.iter().enumerate() {
            if index.insert(g.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!(
                    "duplicate gene '{g}' in graph universe"
                )));
            }
        }
        let mut neighbors = vec![BTreeSet::new(); universe.len()];
        let mut report = GraphBuildReport::default();
        let mut n_edges = 0usize;
        for (a, b) in edges {
            if a == b {
                report.self_loops += 1;
                continue;
            }
            let (ia, ib) = match (index.get(a.as_str()), index.get(b.as_str())) {
                (Some(&ia), Some(&ib)) => (ia, ib),
                _ => {
                    report.dropped_edges += 1;
                    continue;
                }
            };
            if neighbors[ia].insert(ib) {
                neighbors[ib].insert(ia);
                n_edges += 1;
            } else {
                report.merged_duplicates += 1;
            }
        }
        Ok((
            Self {
                gene_ids: universe.to_vec(),
                index,
                neighbors,
                n_edges,
            },
            report,
        ))
    }

    pub fn gene_ids(&self) -> &[String] {
        &self.gene_ids
    }

    pub fn n_genes(&self) -> usize {
        self.gene_ids.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn contains(&self, gene: &str) -> bool {
        self.index.contains_key(gene)
    }

    pub fn degree(&self, gene: &str) -> Option<usize> {
        self.index.get(gene).map(|&i| self.neighbors[i].len())
    }

    fn degree_by_pos(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }
}

/// Positive per-gene weights, in the graph's gene order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<R: Real> {
    gene_ids: Vec<String>,
    index: HashMap<String, usize>,
    weights: Vec<R>,
}

impl<R: Real> WeightVector<R> {
    pub fn new(gene_ids: Vec<String>, weights: Vec<R>) -> Result<Self> {
        if gene_ids.len() != weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} gene ids for {} weights",
                gene_ids.len(),
                weights.len()
            )));
        }
        // the negated form also rejects NaN
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if let Some(i) = weights.iter().position(|w| !(*w > R::zero())) {
            return Err(Error::InvalidInput(format!(
                "weight of gene '{}' is not positive",
                gene_ids[i]
            )));
        }
        let mut index = HashMap::with_capacity(gene_ids.len());
        for (i, g) in gene_ids.iter().enumerate() {
            if index.insert(g.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!(
                    "duplicate gene '{g}' in weight vector"
                )));
            }
        }
        Ok(Self {
            gene_ids,
            index,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn gene_ids(&self) -> &[String] {
        &self.gene_ids
    }

    pub fn values(&self) -> &[R] {
        &self.weights
    }

    pub fn get(&self, gene: &str) -> Option<R> {
        self.index.get(gene).map(|&i| self.weights[i])
    }
}

/// `w_i = 1 + degree(i)` for every gene in the graph's universe.
pub fn connectivity_weights<R: Real>(graph: &ConnectivityGraph) -> WeightVector<R> {
    let weights = (0..graph.n_genes())
        .map(|i| real_usize::<R>(1 + graph.degree_by_pos(i)))
        .collect();
    WeightVector::new(graph.gene_ids().to_vec(), weights)
        .expect("degrees are nonnegative, so all weights are >= 1")
}

/// Rescaling applied to raw connectivity weights before they enter the
/// weighted statistic. All schemes are monotone, so the ordering of
/// weights is preserved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[derive(Default)]
pub enum WeightScheme {
    /// Divide by the mean weight; keeps the average weighted statistic on
    /// the same scale as the unweighted one.
    #[default]
    MeanOne,
    /// Divide by the maximum weight.
    MaxOne,
    /// Square root, then divide by the mean of the square roots.
    SqrtMeanOne,
}


impl fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WeightScheme::MeanOne => "mean-one",
            WeightScheme::MaxOne => "max-one",
            WeightScheme::SqrtMeanOne => "sqrt-mean-one",
        };
        f.write_str(s)
    }
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean-one" => Ok(WeightScheme::MeanOne),
            "max-one" => Ok(WeightScheme::MaxOne),
            "sqrt-mean-one" => Ok(WeightScheme::SqrtMeanOne),
            other => Err(Error::Config(format!(
                "unknown weight normalization '{other}' (expected mean-one, max-one, or sqrt-mean-one)"
            ))),
        }
    }
}

/// Rescale weights under the given scheme.
pub fn normalize_weights<R: Real>(
    weights: &WeightVector<R>,
    scheme: WeightScheme,
) -> Result<WeightVector<R>> {
    if weights.is_empty() {
        return Err(Error::InvalidInput("cannot normalize an empty weight vector".into()));
    }
    let n = real_usize::<R>(weights.len());
    let rescaled: Vec<R> = match scheme {
        WeightScheme::MeanOne => {
            let mut sum = R::zero();
            for w in weights.values() {
                sum += *w;
            }
            let mean = sum / n;
            weights.values().iter().map(|w| *w / mean).collect()
        }
        WeightScheme::MaxOne => {
            let max = weights
                .values()
                .iter()
                .fold(R::zero(), |acc, w| if *w > acc { *w } else { acc });
            weights.values().iter().map(|w| *w / max).collect()
        }
        WeightScheme::SqrtMeanOne => {
            let roots: Vec<R> = weights.values().iter().map(|w| w.sqrt()).collect();
            let mut sum = R::zero();
            for r in &roots {
                sum += *r;
            }
            let mean = sum / n;
            roots.iter().map(|r| *r / mean).collect()
        }
    };
    WeightVector::new(weights.gene_ids().to_vec(), rescaled)
}

/// Spearman correlation between each gene's set-membership count and its
/// connectivity weight, over genes common to the collection and the
/// weight vector. Needs at least 3 common genes.
pub fn setcount_vs_connectivity<R: Real>(
    collection: &GeneSetCollection,
    weights: &WeightVector<R>,
) -> Result<R> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for set in collection.sets() {
        for g in &set.genes {
            *counts.entry(g.as_str()).or_insert(0) += 1;
        }
    }
    let mut common: Vec<(&str, usize)> = counts
        .iter()
        .filter(|(g, _)| weights.get(g).is_some())
        .map(|(g, &c)| (*g, c))
        .collect();
    if common.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "only {} genes are shared between the gene sets and the weights; need at least 3",
            common.len()
        )));
    }
    common.sort_unstable_by(|a, b| a.0.cmp(b.0));
    let xs: Vec<R> = common.iter().map(|(_, c)| real_usize::<R>(*c)).collect();
    let ys: Vec<R> = common
        .iter()
        .map(|(g, _)| weights.get(g).expect("filtered to common genes"))
        .collect();
    Ok(spearman(&xs, &ys))
}

/// Average ranks (ties share the mean of their positions, 1-based).
fn average_ranks<R: Real>(values: &[R]) -> Vec<R> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("no NaN in rank input"));
    let mut ranks = vec![R::zero(); values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share rank mean of (i+1)..=(j+1)
        let two = real_usize::<R>(2);
        let avg = (real_usize::<R>(i + 1) + real_usize::<R>(j + 1)) / two;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman<R: Real>(x: &[R], y: &[R]) -> R {
    assert_eq!(x.len(), y.len());
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    pearson(&rx, &ry)
}

fn pearson<R: Real>(x: &[R], y: &[R]) -> R {
    let n = real_usize::<R>(x.len());
    let mut mx = R::zero();
    let mut my = R::zero();
    for (a, b) in x.iter().zip(y) {
        mx += *a;
        my += *b;
    }
    mx /= n;
    my /= n;
    let mut sxy = R::zero();
    let mut sxx = R::zero();
    let mut syy = R::zero();
    for (a, b) in x.iter().zip(y) {
        let dx = *a - mx;
        let dy = *b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == R::zero() || syy == R::zero() {
        return R::zero();
    }
    sxy / (sxx * syy).sqrt()
}
