//! Predictive performance metrics (error rate, generalized Brier score,
//! belief confusion, AUPR) and cross-run signature stability (mean pairwise
//! Jaccard, reported here as the Rand index over gene or pathway lists).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::classify::PosteriorMatrix;
use crate::error::{Error, Result};
use crate::num::{real, real_usize, Real};

/// Metric bundle for one evaluated run. All four values lie in [0, 1];
/// error rate and GBS are better low, BCM and AUPR better high.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EvalReport<R: Real> {
    pub error_rate: R,
    pub gbs: R,
    pub bcm: R,
    pub aupr: R,
    pub n_samples: usize,
    pub classes: Vec<String>,
    pub warnings: Vec<String>,
}

/// Signature stability across repeated runs, at gene and pathway level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct StabilityReport<R: Real> {
    pub rand_gene: R,
    pub rand_pathway: R,
    pub k: usize,
}

fn check_truth<R: Real>(posteriors: &PosteriorMatrix<R>, truth: &[String]) -> Result<()> {
    if truth.len() != posteriors.n_samples() {
        return Err(Error::InvalidInput(format!(
            "{} truth labels for {} posterior rows",
            truth.len(),
            posteriors.n_samples()
        )));
    }
    for t in truth {
        if !posteriors.classes().iter().any(|c| c == t) {
            return Err(Error::InvalidInput(format!(
                "true class '{t}' is not a posterior class"
            )));
        }
    }
    Ok(())
}

/// Fraction of samples whose argmax class differs from the truth. Argmax
/// ties go to the earlier class in class order.
pub fn error_rate<R: Real>(posteriors: &PosteriorMatrix<R>, truth: &[String]) -> Result<R> {
    check_truth(posteriors, truth)?;
    let wrong = truth
        .iter()
        .enumerate()
        .filter(|(i, t)| posteriors.argmax_class(*i) != t.as_str())
        .count();
    Ok(real_usize::<R>(wrong) / real_usize::<R>(truth.len()))
}

/// Generalized Brier score: `(1/(2N)) sum_samples sum_classes (p - t)^2`
/// with one-hot truth `t`; 0 for perfect one-hot predictions, 1 for
/// maximally wrong ones.
pub fn generalized_brier<R: Real>(posteriors: &PosteriorMatrix<R>, truth: &[String]) -> Result<R> {
    check_truth(posteriors, truth)?;
    let mut sum = R::zero();
    for (row, t) in posteriors.rows().iter().zip(truth) {
        for (p, class) in row.iter().zip(posteriors.classes()) {
            let target = if class == t { R::one() } else { R::zero() };
            let d = *p - target;
            sum += d * d;
        }
    }
    Ok(sum / (real::<R>(2.0) * real_usize::<R>(truth.len())))
}

/// Belief confusion: macro-average over classes of the mean probability
/// assigned to the true class among that class's samples; 1 when every
/// prediction puts all mass on the truth. Classes absent from the truth
/// are excluded and reported.
pub fn belief_confusion<R: Real>(
    posteriors: &PosteriorMatrix<R>,
    truth: &[String],
) -> Result<(R, Vec<String>)> {
    check_truth(posteriors, truth)?;
    let mut warnings = Vec::new();
    let mut acc = R::zero();
    let mut used = 0usize;
    for (j, class) in posteriors.classes().iter().enumerate() {
        let mut mass = R::zero();
        let mut count = 0usize;
        for (row, t) in posteriors.rows().iter().zip(truth) {
            if t == class {
                mass += row[j];
                count += 1;
            }
        }
        if count == 0 {
            warnings.push(format!("class '{class}' has no samples; excluded from BCM"));
        } else {
            acc += mass / real_usize::<R>(count);
            used += 1;
        }
    }
    if used == 0 {
        return Err(Error::InvalidInput("no class has any samples".into()));
    }
    Ok((acc / real_usize::<R>(used), warnings))
}

/// Area under the precision-recall curve by right-continuous step
/// integration over a descending-score threshold sweep; tied scores are
/// grouped at one threshold. Errors when there are no positive samples.
pub fn aupr_scores<R: Real>(scores: &[R], is_positive: &[bool]) -> Result<R> {
    if scores.len() != is_positive.len() {
        return Err(Error::InvalidInput(format!(
            "{} scores for {} truth flags",
            scores.len(),
            is_positive.len()
        )));
    }
    let total_pos = is_positive.iter().filter(|&&b| b).count();
    if total_pos == 0 {
        return Err(Error::InvalidInput("AUPR needs at least one positive sample".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores are not NaN")
    });

    let total_pos_r = real_usize::<R>(total_pos);
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut prev_recall = R::zero();
    let mut area = R::zero();
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        for &idx in &order[i..=j] {
            if is_positive[idx] {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        let precision = real_usize::<R>(tp) / real_usize::<R>(tp + fp);
        let recall = real_usize::<R>(tp) / total_pos_r;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j + 1;
    }
    Ok(area)
}

/// AUPR of a posterior matrix: one-vs-rest on the first class for a binary
/// task, macro-averaged one-vs-rest for more classes. Classes absent from
/// the truth are skipped (they have no positives to rank).
pub fn aupr<R: Real>(posteriors: &PosteriorMatrix<R>, truth: &[String]) -> Result<R> {
    check_truth(posteriors, truth)?;
    if posteriors.classes().len() == 2 {
        let positive = &posteriors.classes()[0];
        let scores: Vec<R> = posteriors.rows().iter().map(|r| r[0]).collect();
        let flags: Vec<bool> = truth.iter().map(|t| t == positive).collect();
        return aupr_scores(&scores, &flags);
    }
    let mut acc = R::zero();
    let mut used = 0usize;
    for (j, class) in posteriors.classes().iter().enumerate() {
        let flags: Vec<bool> = truth.iter().map(|t| t == class).collect();
        if !flags.iter().any(|&b| b) {
            continue;
        }
        let scores: Vec<R> = posteriors.rows().iter().map(|r| r[j]).collect();
        acc += aupr_scores(&scores, &flags)?;
        used += 1;
    }
    if used == 0 {
        return Err(Error::InvalidInput("AUPR needs at least one positive sample".into()));
    }
    Ok(acc / real_usize::<R>(used))
}

/// Mean pairwise Jaccard similarity over k lists (treated as sets):
/// `2/(k(k-1)) * sum_{i<j} |L_i ∩ L_j| / |L_i ∪ L_j|`.
/// Two empty lists count as identical (1); an empty against a non-empty
/// counts as disjoint (0).
///
/// ```
/// use samgsr::metrics::rand_index;
///
/// let runs = vec![
///     vec!["a".to_string(), "b".to_string()],
///     vec!["b".to_string(), "c".to_string()],
/// ];
/// let stability: f64 = rand_index(&runs).unwrap();
/// assert_eq!(stability, 1.0 / 3.0);
/// ```
pub fn rand_index<R: Real>(lists: &[Vec<String>]) -> Result<R> {
    if lists.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "Rand index needs at least 2 runs, got {}",
            lists.len()
        )));
    }
    let sets: Vec<BTreeSet<&str>> = lists
        .iter()
        .map(|l| l.iter().map(|s| s.as_str()).collect())
        .collect();
    let mut similarities = Vec::new();
    for i in 0..sets.len() {
        for j in (i + 1)..sets.len() {
            let a = &sets[i];
            let b = &sets[j];
            if a.is_empty() && b.is_empty() {
                similarities.push(R::one());
                continue;
            }
            let inter = a.intersection(b).count();
            let union = a.union(b).count();
            similarities.push(real_usize::<R>(inter) / real_usize::<R>(union));
        }
    }
    // summing in sorted order makes the mean exactly invariant to the
    // order the lists were supplied in
    similarities.sort_by(|a, b| a.partial_cmp(b).expect("similarities are not NaN"));
    let pairs = similarities.len();
    let mut sum = R::zero();
    for s in similarities {
        sum += s;
    }
    Ok(sum / real_usize::<R>(pairs))
}

/// All four predictive metrics for one posterior matrix.
pub fn evaluate_posteriors<R: Real>(
    posteriors: &PosteriorMatrix<R>,
    truth: &[String],
) -> Result<EvalReport<R>> {
    let error = error_rate(posteriors, truth)?;
    let gbs = generalized_brier(posteriors, truth)?;
    let (bcm, warnings) = belief_confusion(posteriors, truth)?;
    let aupr_value = aupr(posteriors, truth)?;
    Ok(EvalReport {
        error_rate: error,
        gbs,
        bcm,
        aupr: aupr_value,
        n_samples: truth.len(),
        classes: posteriors.classes().to_vec(),
        warnings,
    })
}

/// Gene- and pathway-level stability over k runs.
pub fn stability<R: Real>(
    gene_lists: &[Vec<String>],
    pathway_lists: &[Vec<String>],
) -> Result<StabilityReport<R>> {
    if gene_lists.len() != pathway_lists.len() {
        return Err(Error::InvalidInput(format!(
            "{} gene lists but {} pathway lists",
            gene_lists.len(),
            pathway_lists.len()
        )));
    }
    Ok(StabilityReport {
        rand_gene: rand_index(gene_lists)?,
        rand_pathway: rand_index(pathway_lists)?,
        k: gene_lists.len(),
    })
}
