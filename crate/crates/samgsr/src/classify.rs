//! Threshold tuning by cross-validation, a margin-based linear classifier
//! over signatures, calibrated posteriors, and composite multi-class
//! probabilities.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connectivity::ConnectivityGraph;
use crate::data::{ExpressionDataset, ExpressionMatrix, FoldAssignment, GeneSetCollection};
use crate::error::{Error, Result};
use crate::num::{real, real_usize, sigmoid, Real};
use crate::permutation::{build_plan, derive_seed, set_pvalues_with, PermutationContext};
use crate::reduction::{reduction_curve, screen_sets, stat_config_for, stop_from_curve, SamgsrConfig};

/// Hyperparameters of the squared-hinge linear fit and its calibration.
/// Everything is fixed up front so fits are deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FitConfig<R: Real> {
    /// L2 penalty on the coefficient vector (the intercept is not penalized).
    pub lambda: R,
    /// Full-batch gradient descent iteration cap.
    pub max_iters: usize,
    /// Early-exit threshold on the gradient norm.
    pub grad_tol: R,
    /// Newton iteration cap for the sigmoid calibration.
    pub calib_iters: usize,
}

impl<R: Real> Default for FitConfig<R> {
    fn default() -> Self {
        Self {
            lambda: real(1e-2),
            max_iters: 1000,
            grad_tol: real(1e-9),
            calib_iters: 100,
        }
    }
}

/// Linear decision function over signature genes, with a two-parameter
/// sigmoid mapping margins to positive-class probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LinearClassifier<R: Real> {
    pub genes: Vec<String>,
    pub coefficients: Vec<R>,
    pub intercept: R,
    /// Sigmoid slope; kept nonpositive so higher margins never get lower
    /// positive-class probability.
    pub calib_slope: R,
    pub calib_offset: R,
    pub positive_class: String,
    pub negative_class: String,
}

impl<R: Real> LinearClassifier<R> {
    /// Decision value of one sample (features in gene order).
    pub fn margin(&self, features: &[R]) -> R {
        let mut m = self.intercept;
        for (w, x) in self.coefficients.iter().zip(features) {
            m += *w * *x;
        }
        m
    }

    /// Positive-class probability of a margin through the calibration map.
    pub fn probability(&self, margin: R) -> R {
        sigmoid(-(self.calib_slope * margin + self.calib_offset))
    }
}

/// Per-sample class-probability rows; every row sums to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PosteriorMatrix<R: Real> {
    classes: Vec<String>,
    sample_ids: Vec<String>,
    rows: Vec<Vec<R>>,
}

impl<R: Real> PosteriorMatrix<R> {
    pub fn new(classes: Vec<String>, sample_ids: Vec<String>, rows: Vec<Vec<R>>) -> Result<Self> {
        if rows.len() != sample_ids.len() {
            return Err(Error::InvalidInput(format!(
                "{} posterior rows for {} samples",
                rows.len(),
                sample_ids.len()
            )));
        }
        let tol = real::<R>(1e-9);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != classes.len() {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries for {} classes",
                    row.len(),
                    classes.len()
                )));
            }
            let mut sum = R::zero();
            for p in row {
                if !(*p >= R::zero() && *p <= R::one()) {
                    return Err(Error::InvalidInput(format!(
                        "row {i} holds probability {p} outside [0, 1]"
                    )));
                }
                sum += *p;
            }
            if (sum - R::one()).abs() > tol {
                return Err(Error::InvalidInput(format!(
                    "row {i} sums to {sum}, not 1"
                )));
            }
        }
        Ok(Self {
            classes,
            sample_ids,
            rows,
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn rows(&self) -> &[Vec<R>] {
        &self.rows
    }

    pub fn n_samples(&self) -> usize {
        self.rows.len()
    }

    /// Index of the highest-probability class of one row; exact ties go to
    /// the earlier class in class order.
    pub fn argmax_class(&self, row: usize) -> &str {
        let r = &self.rows[row];
        let mut best = 0usize;
        for j in 1..r.len() {
            if r[j] > r[best] {
                best = j;
            }
        }
        &self.classes[best]
    }
}

/// Fit the margin-based linear model on the listed genes: regularized
/// squared-hinge loss minimized by deterministic full-batch gradient
/// descent with a fixed step rule, then a sigmoid calibration of the
/// training margins (slope initialized at -1, offset at 0).
pub fn fit_classifier<R: Real>(
    dataset: &ExpressionDataset<R>,
    genes: &[String],
    positive_class: &str,
    config: &FitConfig<R>,
) -> Result<LinearClassifier<R>> {
    if genes.is_empty() {
        return Err(Error::InvalidInput("cannot fit a classifier on an empty signature".into()));
    }
    let (pos, _neg) = dataset.binary_groups(positive_class)?;
    let classes = dataset.classes();
    let negative_class = classes
        .iter()
        .find(|c| *c != positive_class)
        .expect("binary dataset has a second class")
        .clone();

    let rows: Vec<usize> = genes
        .iter()
        .map(|g| {
            dataset
                .gene_pos(g)
                .ok_or_else(|| Error::InvalidInput(format!("signature gene '{g}' missing from dataset")))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = dataset.n_samples();
    let p = genes.len();
    let is_pos: Vec<bool> = {
        let mut v = vec![false; n];
        for &i in &pos {
            v[i] = true;
        }
        v
    };
    // features per sample, in gene order
    let x: Vec<Vec<R>> = (0..n)
        .map(|i| rows.iter().map(|&r| dataset.row(r)[i]).collect())
        .collect();
    let y: Vec<R> = is_pos
        .iter()
        .map(|&b| if b { R::one() } else { -R::one() })
        .collect();

    // fixed step 1/L from a Lipschitz bound on the gradient
    let n_r = real_usize::<R>(n);
    let two = real::<R>(2.0);
    let mut sq_sum = R::zero();
    for xi in &x {
        let mut s = R::one(); // bias column
        for v in xi {
            s += *v * *v;
        }
        sq_sum += s;
    }
    let lipschitz = config.lambda + two * sq_sum / n_r;
    let step = R::one() / lipschitz;

    let mut w = vec![R::zero(); p];
    let mut b = R::zero();
    for _ in 0..config.max_iters {
        let mut grad_w = vec![R::zero(); p];
        let mut grad_b = R::zero();
        for (xi, &yi) in x.iter().zip(&y) {
            let mut m = b;
            for (wj, xj) in w.iter().zip(xi) {
                m += *wj * *xj;
            }
            let f = yi * m;
            if f < R::one() {
                let coeff = two * (R::one() - f) * yi / n_r;
                for (g, xj) in grad_w.iter_mut().zip(xi) {
                    *g -= coeff * *xj;
                }
                grad_b -= coeff;
            }
        }
        let mut grad_sq = grad_b * grad_b;
        for (g, wj) in grad_w.iter_mut().zip(&w) {
            *g += config.lambda * *wj;
            grad_sq += *g * *g;
        }
        if grad_sq < config.grad_tol * config.grad_tol {
            break;
        }
        for (wj, g) in w.iter_mut().zip(&grad_w) {
            *wj -= step * *g;
        }
        b -= step * grad_b;
    }

    let margins: Vec<R> = x
        .iter()
        .map(|xi| {
            let mut m = b;
            for (wj, xj) in w.iter().zip(xi) {
                m += *wj * *xj;
            }
            m
        })
        .collect();
    let (slope, offset) = fit_sigmoid_calibration(&margins, &is_pos, config.calib_iters);

    Ok(LinearClassifier {
        genes: genes.to_vec(),
        coefficients: w,
        intercept: b,
        calib_slope: slope,
        calib_offset: offset,
        positive_class: positive_class.to_string(),
        negative_class,
    })
}

/// Two-parameter sigmoid fit of margins to the regularized class targets,
/// by damped Newton iterations from (slope, offset) = (-1, 0). The slope is
/// clamped to be nonpositive so calibration preserves margin ordering.
fn fit_sigmoid_calibration<R: Real>(margins: &[R], is_pos: &[bool], max_iters: usize) -> (R, R) {
    let n_pos = is_pos.iter().filter(|&&b| b).count();
    let n_neg = is_pos.len() - n_pos;
    let t_pos = real_usize::<R>(n_pos + 1) / real_usize::<R>(n_pos + 2);
    let t_neg = R::one() / real_usize::<R>(n_neg + 2);
    let targets: Vec<R> = is_pos
        .iter()
        .map(|&b| if b { t_pos } else { t_neg })
        .collect();

    let nll = |a: R, c: R| -> R {
        let mut f = R::zero();
        for (m, t) in margins.iter().zip(&targets) {
            let z = a * *m + c;
            // -[t ln p + (1-t) ln(1-p)] with p = sigmoid(-z), written to
            // avoid overflow: ln(1+e^-|z|) + max(z,0) terms
            let softplus = if z > R::zero() {
                z + (R::one() + (-z).exp()).ln()
            } else {
                (R::one() + z.exp()).ln()
            };
            f += *t * softplus + (R::one() - *t) * (softplus - z);
        }
        f
    };

    let mut a = -R::one();
    let mut c = R::zero();
    let ridge = real::<R>(1e-12);
    let mut f_cur = nll(a, c);
    for _ in 0..max_iters {
        let mut g_a = R::zero();
        let mut g_c = R::zero();
        let mut h_aa = ridge;
        let mut h_ac = R::zero();
        let mut h_cc = ridge;
        for (m, t) in margins.iter().zip(&targets) {
            let z = a * *m + c;
            let p = sigmoid(-z);
            // dF/dz = t - p; d2F/dz2 = p(1-p)
            let d1 = *t - p;
            let d2 = p * (R::one() - p);
            g_a += d1 * *m;
            g_c += d1;
            h_aa += d2 * *m * *m;
            h_ac += d2 * *m;
            h_cc += d2;
        }
        if (g_a * g_a + g_c * g_c).sqrt() < real::<R>(1e-10) {
            break;
        }
        let det = h_aa * h_cc - h_ac * h_ac;
        if det <= R::zero() {
            break;
        }
        let da = -(h_cc * g_a - h_ac * g_c) / det;
        let dc = -(h_aa * g_c - h_ac * g_a) / det;
        // backtracking on the Newton direction
        let mut scale = R::one();
        let mut improved = false;
        for _ in 0..30 {
            let f_new = nll(a + scale * da, c + scale * dc);
            if f_new < f_cur {
                a += scale * da;
                c += scale * dc;
                f_cur = f_new;
                improved = true;
                break;
            }
            scale /= real::<R>(2.0);
        }
        if !improved {
            break;
        }
    }
    if a > R::zero() {
        a = R::zero();
    }
    (a, c)
}

/// Two-class posteriors for every sample of the matrix; rows are
/// `[p_positive, 1 - p_positive]` in class order `[positive, negative]`.
pub fn predict<R: Real>(
    model: &LinearClassifier<R>,
    matrix: &ExpressionMatrix<R>,
) -> Result<PosteriorMatrix<R>> {
    let rows: Vec<usize> = model
        .genes
        .iter()
        .map(|g| {
            matrix
                .gene_pos(g)
                .ok_or_else(|| Error::InvalidInput(format!("model gene '{g}' missing from input")))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = matrix.n_samples();
    let posterior_rows: Vec<Vec<R>> = (0..n)
        .map(|i| {
            let mut m = model.intercept;
            for (w, &r) in model.coefficients.iter().zip(&rows) {
                m += *w * matrix.row(r)[i];
            }
            let p = model.probability(m);
            vec![p, R::one() - p]
        })
        .collect();
    PosteriorMatrix::new(
        vec![model.positive_class.clone(), model.negative_class.clone()],
        matrix.sample_ids().to_vec(),
        posterior_rows,
    )
}

/// Convenience wrapper over a labeled dataset.
pub fn predict_dataset<R: Real>(
    model: &LinearClassifier<R>,
    dataset: &ExpressionDataset<R>,
) -> Result<PosteriorMatrix<R>> {
    predict(model, dataset.matrix())
}

/// Four-class posteriors as the product of two binary posteriors over the
/// same samples. With row `(a, 1-a)` for the first factor and `(b, 1-b)`
/// for the second, the composite row is
/// `(a*b, a*(1-b), (1-a)*b, (1-a)*(1-b))`; the last entry is computed as
/// the remainder from 1 so every row sums to 1 exactly.
pub fn composite_four_class<R: Real>(
    first: &PosteriorMatrix<R>,
    second: &PosteriorMatrix<R>,
) -> Result<PosteriorMatrix<R>> {
    if first.classes().len() != 2 || second.classes().len() != 2 {
        return Err(Error::InvalidInput(
            "composite posteriors need two two-class inputs".into(),
        ));
    }
    if first.sample_ids() != second.sample_ids() {
        return Err(Error::InvalidInput(
            "posterior inputs cover different samples".into(),
        ));
    }
    let classes = vec![
        format!("{}-{}", first.classes()[0], second.classes()[0]),
        format!("{}-{}", first.classes()[0], second.classes()[1]),
        format!("{}-{}", first.classes()[1], second.classes()[0]),
        format!("{}-{}", first.classes()[1], second.classes()[1]),
    ];
    let rows: Vec<Vec<R>> = first
        .rows()
        .iter()
        .zip(second.rows())
        .map(|(f, s)| {
            let p11 = f[0] * s[0];
            let p12 = f[0] * s[1];
            let p21 = f[1] * s[0];
            // the last entry is the remainder from 1 of the same left-to-right
            // partial sum a checker recomputes, so the row total is exactly 1
            let partial = (p11 + p12) + p21;
            let p22 = (R::one() - partial).max(R::zero());
            vec![p11, p12, p21, p22]
        })
        .collect();
    PosteriorMatrix::new(classes, first.sample_ids().to_vec(), rows)
}

/// Grid search over the reduction threshold by stratified K-fold
/// cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TuningResult<R: Real> {
    /// Candidate thresholds, ascending.
    pub grid: Vec<R>,
    /// Pooled CV misclassification rate per candidate.
    pub cv_error: Vec<R>,
    /// Candidate attaining the minimum error; ties go to the smallest
    /// threshold (sparser models).
    pub chosen: R,
    pub fold_fingerprint: String,
    pub warnings: Vec<String>,
}

/// Evaluate every grid candidate on every fold: select on the training
/// partition, fit, and score the held-out fold. A fold whose signature
/// comes up empty scores as the training partition's majority class.
#[allow(clippy::too_many_arguments)]
pub fn tune_threshold<R: Real>(
    dataset: &ExpressionDataset<R>,
    collection: &GeneSetCollection,
    graph: Option<&ConnectivityGraph>,
    grid: &[R],
    k: usize,
    seed: u64,
    config: &SamgsrConfig<R>,
    fit: &FitConfig<R>,
) -> Result<TuningResult<R>> {
    if grid.is_empty() {
        return Err(Error::Config("tuning grid must be non-empty".into()));
    }
    for c in grid {
        if !(*c > R::zero() && *c < R::one()) {
            return Err(Error::Config(format!(
                "grid value {c} outside (0, 1)"
            )));
        }
    }
    let mut grid: Vec<R> = grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("grid values are not NaN"));
    grid.dedup();
    let cap = *grid.last().expect("grid non-empty");

    let (folds, mut warnings) = FoldAssignment::stratified(dataset.labels(), k, seed)?;
    let stat_config = stat_config_for(graph, config)?;

    struct FoldOutcome {
        misclassified: Vec<usize>,
        n_test: usize,
        warnings: Vec<String>,
    }

    let fold_outcomes: Vec<FoldOutcome> = (0..k)
        .into_par_iter()
        .map(|f| -> Result<FoldOutcome> {
            let train_idx = folds.train(f);
            let test_idx = folds.fold(f);
            let train = dataset.subset_samples(&train_idx)?;
            let test_matrix = dataset.matrix().select_samples(&test_idx)?;
            let test_labels: Vec<&String> =
                test_idx.iter().map(|&i| &dataset.labels()[i]).collect();

            let plan = build_plan(train.labels(), config.b, derive_seed(seed, 1 + f as u64))?;
            let ctx = PermutationContext::new(&train, &plan, &stat_config)?;
            let table = set_pvalues_with(&ctx, collection)?;
            let screened = screen_sets(&table, config.alpha)?;

            // one magnitude ordering and residual curve per screened set,
            // shared by every grid candidate
            let mut set_curves = Vec::with_capacity(screened.len());
            for hit in &screened {
                let set = collection
                    .get(&hit.set_name)
                    .expect("screened set exists in collection");
                let rows = ctx.member_rows(&set.name, &set.genes)?;
                let d = ctx.observed_d();
                let mut order: Vec<(String, usize)> = set
                    .genes
                    .iter()
                    .zip(&rows)
                    .map(|(g, &r)| (g.clone(), r))
                    .collect();
                order.sort_by(|a, b| {
                    d[b.1]
                        .abs()
                        .partial_cmp(&d[a.1].abs())
                        .expect("statistics are not NaN")
                        .then_with(|| a.0.cmp(&b.0))
                });
                let ordered_rows: Vec<usize> = order.iter().map(|e| e.1).collect();
                let curve = reduction_curve(&ctx, &ordered_rows, cap);
                let ordered_genes: Vec<String> = order.into_iter().map(|e| e.0).collect();
                set_curves.push((ordered_genes, curve));
            }

            let mut fold_warnings = Vec::new();
            let mut misclassified = Vec::with_capacity(grid.len());
            for &c_star in &grid {
                let mut genes: BTreeSet<String> = BTreeSet::new();
                for (ordered_genes, curve) in &set_curves {
                    let (stop_k, _) = stop_from_curve(curve, ordered_genes.len(), c_star);
                    for g in &ordered_genes[..stop_k] {
                        genes.insert(g.clone());
                    }
                }
                let wrong = if genes.is_empty() {
                    let majority = majority_class(train.labels());
                    fold_warnings.push(format!(
                        "fold {f}: empty signature at c_star = {c_star}; scored as majority class '{majority}'"
                    ));
                    test_labels.iter().filter(|l| l.as_str() != majority).count()
                } else {
                    let gene_list: Vec<String> = genes.into_iter().collect();
                    let model = fit_classifier(&train, &gene_list, &config.positive_class, fit)?;
                    let posteriors = predict(&model, &test_matrix)?;
                    test_labels
                        .iter()
                        .enumerate()
                        .filter(|(i, l)| posteriors.argmax_class(*i) != l.as_str())
                        .count()
                };
                misclassified.push(wrong);
            }
            Ok(FoldOutcome {
                misclassified,
                n_test: test_idx.len(),
                warnings: fold_warnings,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let total_test: usize = fold_outcomes.iter().map(|o| o.n_test).sum();
    let mut cv_error = Vec::with_capacity(grid.len());
    for (ci, _) in grid.iter().enumerate() {
        let wrong: usize = fold_outcomes.iter().map(|o| o.misclassified[ci]).sum();
        cv_error.push(real_usize::<R>(wrong) / real_usize::<R>(total_test));
    }
    for o in fold_outcomes {
        warnings.extend(o.warnings);
    }

    // argmin with ties to the smallest candidate: strict improvement only
    let mut best = 0usize;
    for i in 1..grid.len() {
        if cv_error[i] < cv_error[best] {
            best = i;
        }
    }
    Ok(TuningResult {
        chosen: grid[best],
        grid,
        cv_error,
        fold_fingerprint: folds.fingerprint(),
        warnings,
    })
}

/// Most frequent label; ties go to the lexicographically first.
fn majority_class(labels: &[String]) -> &str {
    use std::collections::BTreeMap;
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for l in labels {
        *counts.entry(l.as_str()).or_insert(0) += 1;
    }
    counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
        .map(|(l, _)| *l)
        .expect("labels non-empty")
}
