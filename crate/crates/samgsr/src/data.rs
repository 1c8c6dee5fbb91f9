//! Core containers for expression data, class labels, gene sets, and
//! cross-validation folds, plus their normalization and alignment.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::{real_usize, Real};

/// Dense genes-by-samples matrix with row and column identifiers.
///
/// Rows are genes, columns are samples; values are real expression levels
/// (log2-scale by convention). Gene and sample identifiers are unique.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionMatrix<R: Real> {
    gene_ids: Vec<String>,
    sample_ids: Vec<String>,
    values: Vec<R>, // row-major, n_genes x n_samples
    gene_index: HashMap<String, usize>,
}

impl<R: Real> ExpressionMatrix<R> {
    pub fn new(gene_ids: Vec<String>, sample_ids: Vec<String>, values: Vec<R>) -> Result<Self> {
        if values.len() != gene_ids.len() * sample_ids.len() {
            return Err(Error::InvalidInput(format!(
                "matrix has {} values but {} genes x {} samples",
                values.len(),
                gene_ids.len(),
                sample_ids.len()
            )));
        }
        let mut gene_index = HashMap::with_capacity(gene_ids.len());
        for (i, g) in gene_ids.iter().enumerate() {
            if gene_index.insert(g.clone(), i).is_some() {
                return Err(Error::InvalidInput(format!("duplicate gene id '{g}'")));
            }
        }
        let mut seen = HashSet::with_capacity(sample_ids.len());
        for s in &sample_ids {
            if !seen.insert(s.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate sample id '{s}'")));
            }
        }
        Ok(Self {
            gene_ids,
            sample_ids,
            values,
            gene_index,
        })
    }

    pub fn n_genes(&self) -> usize {
        self.gene_ids.len()
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn gene_ids(&self) -> &[String] {
        &self.gene_ids
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn gene_pos(&self, gene: &str) -> Option<usize> {
        self.gene_index.get(gene).copied()
    }

    /// Expression values of one gene across all samples.
    pub fn row(&self, gene_row: usize) -> &[R] {
        let n = self.n_samples();
        &self.values[gene_row * n..(gene_row + 1) * n]
    }

    fn row_mut(&mut self, gene_row: usize) -> &mut [R] {
        let n = self.n_samples();
        &mut self.values[gene_row * n..(gene_row + 1) * n]
    }

    /// Center and scale every gene row to sample mean 0 and sample SD 1
    /// (denominator n-1). Fails on the first zero-variance gene, naming it.
    pub fn standardize(&self) -> Result<Self> {
        let mut out = self.clone();
        let n = real_usize::<R>(self.n_samples());
        for g in 0..self.n_genes() {
            let row = out.row_mut(g);
            let mut sum = R::zero();
            for v in row.iter() {
                sum += *v;
            }
            let mean = sum / n;
            let mut ss = R::zero();
            for v in row.iter() {
                let d = *v - mean;
                ss += d * d;
            }
            if ss == R::zero() {
                return Err(Error::ZeroVariance(self.gene_ids[g].clone()));
            }
            let sd = (ss / (n - R::one())).sqrt();
            for v in row.iter_mut() {
                *v = (*v - mean) / sd;
            }
        }
        Ok(out)
    }

    /// Drop genes whose values are constant across samples, returning the
    /// dropped names. Pre-filter for [`ExpressionMatrix::standardize`].
    pub fn drop_zero_variance(&self) -> (Self, Vec<String>) {
        let n = self.n_samples();
        let mut keep = Vec::new();
        let mut dropped = Vec::new();
        for g in 0..self.n_genes() {
            let row = self.row(g);
            let first = row[0];
            if row[1..n].iter().all(|v| *v == first) {
                dropped.push(self.gene_ids[g].clone());
            } else {
                keep.push(self.gene_ids[g].clone());
            }
        }
        let kept = self.select_genes(&keep).expect("kept genes exist in matrix");
        (kept, dropped)
    }

    /// New matrix containing only the given samples (all genes kept).
    pub fn select_samples(&self, sample_idx: &[usize]) -> Result<Self> {
        let n = self.n_samples();
        for &i in sample_idx {
            if i >= n {
                return Err(Error::InvalidInput(format!(
                    "sample index {i} out of range ({n} samples)"
                )));
            }
        }
        let mut values = Vec::with_capacity(self.n_genes() * sample_idx.len());
        for g in 0..self.n_genes() {
            let row = self.row(g);
            for &i in sample_idx {
                values.push(row[i]);
            }
        }
        let sample_ids = sample_idx
            .iter()
            .map(|&i| self.sample_ids[i].clone())
            .collect();
        Self::new(self.gene_ids.clone(), sample_ids, values)
    }

    /// Keep only the listed genes, in the given order.
    pub fn select_genes(&self, genes: &[String]) -> Result<Self> {
        let mut values = Vec::with_capacity(genes.len() * self.n_samples());
        for g in genes {
            let row = self
                .gene_pos(g)
                .ok_or_else(|| Error::InvalidInput(format!("gene '{g}' not in matrix")))?;
            values.extend_from_slice(self.row(row));
        }
        Self::new(genes.to_vec(), self.sample_ids.clone(), values)
    }
}

/// Expression matrix plus a class label for every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionDataset<R: Real> {
    matrix: ExpressionMatrix<R>,
    labels: Vec<String>,
}

impl<R: Real> ExpressionDataset<R> {
    /// Every class level must have at least 2 samples (pooled SD needs
    /// within-group variance on both sides).
    pub fn new(matrix: ExpressionMatrix<R>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != matrix.n_samples() {
            return Err(Error::InvalidInput(format!(
                "{} labels for {} samples",
                labels.len(),
                matrix.n_samples()
            )));
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for l in &labels {
            *counts.entry(l.as_str()).or_insert(0) += 1;
        }
        if counts.len() < 2 {
            return Err(Error::InvalidInput(
                "labels must have at least 2 class levels".into(),
            ));
        }
        for (class, c) in counts {
            if c < 2 {
                return Err(Error::InvalidInput(format!(
                    "class '{class}' has {c} sample(s); every class needs at least 2"
                )));
            }
        }
        Ok(Self { matrix, labels })
    }

    pub fn matrix(&self) -> &ExpressionMatrix<R> {
        &self.matrix
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_genes(&self) -> usize {
        self.matrix.n_genes()
    }

    pub fn n_samples(&self) -> usize {
        self.matrix.n_samples()
    }

    pub fn gene_ids(&self) -> &[String] {
        self.matrix.gene_ids()
    }

    pub fn sample_ids(&self) -> &[String] {
        self.matrix.sample_ids()
    }

    pub fn gene_pos(&self, gene: &str) -> Option<usize> {
        self.matrix.gene_pos(gene)
    }

    pub fn row(&self, gene_row: usize) -> &[R] {
        self.matrix.row(gene_row)
    }

    /// Distinct class labels in sorted order.
    pub fn classes(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.labels.iter().collect();
        set.into_iter().cloned().collect()
    }

    /// Sample indices of the positive class and of the rest, for a binary
    /// dataset. Errors when labels are not binary or the class is unknown.
    pub fn binary_groups(&self, positive_class: &str) -> Result<(Vec<usize>, Vec<usize>)> {
        let classes = self.classes();
        if classes.len() != 2 {
            return Err(Error::InvalidInput(format!(
                "expected binary labels, found {} classes: {}",
                classes.len(),
                classes.join(", ")
            )));
        }
        if !classes.iter().any(|c| c == positive_class) {
            return Err(Error::InvalidInput(format!(
                "positive class '{positive_class}' not among labels ({})",
                classes.join(", ")
            )));
        }
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (i, l) in self.labels.iter().enumerate() {
            if l == positive_class {
                pos.push(i);
            } else {
                neg.push(i);
            }
        }
        Ok((pos, neg))
    }

    /// Standardize every gene row; the label vector is unchanged.
    pub fn standardize(&self) -> Result<Self> {
        Ok(Self {
            matrix: self.matrix.standardize()?,
            labels: self.labels.clone(),
        })
    }

    /// Drop genes with zero variance across samples, returning their names.
    /// Intended as a pre-filter before [`ExpressionDataset::standardize`].
    pub fn drop_zero_variance(&self) -> (Self, Vec<String>) {
        let (matrix, dropped) = self.matrix.drop_zero_variance();
        (
            Self {
                matrix,
                labels: self.labels.clone(),
            },
            dropped,
        )
    }

    /// New dataset containing only the given samples (all genes kept).
    pub fn subset_samples(&self, sample_idx: &[usize]) -> Result<Self> {
        let n = self.n_samples();
        for &i in sample_idx {
            if i >= n {
                return Err(Error::InvalidInput(format!(
                    "sample index {i} out of range ({n} samples)"
                )));
            }
        }
        let mut values = Vec::with_capacity(self.n_genes() * sample_idx.len());
        for g in 0..self.n_genes() {
            let row = self.row(g);
            for &i in sample_idx {
                values.push(row[i]);
            }
        }
        let sample_ids = sample_idx
            .iter()
            .map(|&i| self.sample_ids()[i].clone())
            .collect();
        let labels = sample_idx.iter().map(|&i| self.labels[i].clone()).collect();
        let matrix = ExpressionMatrix::new(self.gene_ids().to_vec(), sample_ids, values)?;
        Self::new(matrix, labels)
    }

    /// Restrict to the listed genes, keeping labels.
    pub fn select_genes(&self, genes: &[String]) -> Result<Self> {
        Ok(Self {
            matrix: self.matrix.select_genes(genes)?,
            labels: self.labels.clone(),
        })
    }
}

/// One named gene set (pathway).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneSet {
    pub name: String,
    pub genes: Vec<String>,
}

/// Named gene sets with a free-text provenance tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneSetCollection {
    sets: Vec<GeneSet>,
    provenance: String,
}

impl GeneSetCollection {
    /// Set names must be unique, sets non-empty, members unique within a set.
    pub fn new(sets: Vec<GeneSet>, provenance: impl Into<String>) -> Result<Self> {
        let mut names = HashSet::new();
        for s in &sets {
            if !names.insert(s.name.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "duplicate gene set name '{}'",
                    s.name
                )));
            }
            if s.genes.is_empty() {
                return Err(Error::InvalidInput(format!("gene set '{}' is empty", s.name)));
            }
            let mut members = HashSet::new();
            for g in &s.genes {
                if !members.insert(g.as_str()) {
                    return Err(Error::InvalidInput(format!(
                        "gene '{g}' duplicated within set '{}'",
                        s.name
                    )));
                }
            }
        }
        Ok(Self {
            sets,
            provenance: provenance.into(),
        })
    }

    pub fn sets(&self) -> &[GeneSet] {
        &self.sets
    }

    pub fn get(&self, name: &str) -> Option<&GeneSet> {
        self.sets.iter().find(|s| s.name == name)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// All distinct member genes, sorted.
    pub fn universe(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.sets.iter().flat_map(|s| s.genes.iter()).collect();
        set.into_iter().cloned().collect()
    }

    /// Intersect every set with the measured genes; sets that become empty
    /// are dropped and their names returned. Errors if nothing survives.
    pub fn restrict_to<R: Real>(
        &self,
        dataset: &ExpressionDataset<R>,
    ) -> Result<(Self, Vec<String>)> {
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        for s in &self.sets {
            let genes: Vec<String> = s
                .genes
                .iter()
                .filter(|g| dataset.gene_pos(g).is_some())
                .cloned()
                .collect();
            if genes.is_empty() {
                dropped.push(s.name.clone());
            } else {
                kept.push(GeneSet {
                    name: s.name.clone(),
                    genes,
                });
            }
        }
        if kept.is_empty() {
            return Err(Error::InvalidInput(
                "no gene set overlaps the measured genes; collection and dataset do not match"
                    .into(),
            ));
        }
        Ok((
            Self {
                sets: kept,
                provenance: self.provenance.clone(),
            },
            dropped,
        ))
    }
}

/// Stratified assignment of samples to K cross-validation folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAssignment {
    fold_of_sample: Vec<usize>,
    k: usize,
}

impl FoldAssignment {
    /// Stratified K-fold split, deterministic given the seed.
    ///
    /// Per class, samples are shuffled and dealt cyclically; the dealing
    /// offset carries over between classes so overall fold sizes differ by
    /// at most one. Classes with fewer than K samples degrade to
    /// best-effort stratification and are reported in the warning list.
    pub fn stratified(labels: &[String], k: usize, seed: u64) -> Result<(Self, Vec<String>)> {
        if k < 2 {
            return Err(Error::Config(format!("fold count K={k} must be at least 2")));
        }
        if k > labels.len() {
            return Err(Error::Config(format!(
                "fold count K={k} exceeds sample count {}",
                labels.len()
            )));
        }
        let mut by_class: HashMap<&str, Vec<usize>> = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            by_class.entry(l.as_str()).or_default().push(i);
        }
        let mut classes: Vec<&str> = by_class.keys().copied().collect();
        classes.sort_unstable();

        let mut warnings = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fold_of_sample = vec![0usize; labels.len()];
        let mut offset = 0usize;
        for class in classes {
            let mut idx = by_class[class].clone();
            if idx.len() < k {
                warnings.push(format!(
                    "class '{class}' has {} samples for K={k}; stratification is best-effort",
                    idx.len()
                ));
            }
            idx.shuffle(&mut rng);
            for (j, &sample) in idx.iter().enumerate() {
                fold_of_sample[sample] = (offset + j) % k;
            }
            offset = (offset + idx.len()) % k;
        }
        Ok((Self { fold_of_sample, k }, warnings))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_of_sample(&self) -> &[usize] {
        &self.fold_of_sample
    }

    /// Samples held out in fold `f`.
    pub fn fold(&self, f: usize) -> Vec<usize> {
        self.fold_of_sample
            .iter()
            .enumerate()
            .filter(|(_, &x)| x == f)
            .map(|(i, _)| i)
            .collect()
    }

    /// Samples available for training when fold `f` is held out.
    pub fn train(&self, f: usize) -> Vec<usize> {
        self.fold_of_sample
            .iter()
            .enumerate()
            .filter(|(_, &x)| x != f)
            .map(|(i, _)| i)
            .collect()
    }

    /// Stable fingerprint of the assignment, for run reports.
    pub fn fingerprint(&self) -> String {
        let mut h = crate::report::Fnv1a::new();
        h.write_usize(self.k);
        for &f in &self.fold_of_sample {
            h.write_usize(f);
        }
        format!("{:016x}", h.finish())
    }
}

/// Sample mean and SD (denominator n-1) of one gene row.
pub fn row_moments<R: Real>(row: &[R]) -> (R, R) {
    let n = real_usize::<R>(row.len());
    let mut sum = R::zero();
    for v in row {
        sum += *v;
    }
    let mean = sum / n;
    let mut ss = R::zero();
    for v in row {
        let d = *v - mean;
        ss += d * d;
    }
    (mean, (ss / (n - R::one())).sqrt())
}
