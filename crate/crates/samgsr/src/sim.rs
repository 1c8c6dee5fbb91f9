//! Synthetic-data generation and the replicate study comparing the
//! unweighted and connectivity-weighted selection pipelines.
//!
//! The default scenario plants two relevant genes in a 1000-gene universe:
//! a strong-signal gene of ordinary connectivity and a weak-signal hub.
//! Class labels are Bernoulli draws from a logistic model over the planted
//! genes' expression values.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{fit_classifier, predict, tune_threshold, FitConfig, PosteriorMatrix};
use crate::connectivity::ConnectivityGraph;
use crate::data::{ExpressionDataset, ExpressionMatrix, GeneSet, GeneSetCollection};
use crate::error::{Error, Result};
use crate::metrics::{evaluate_posteriors, EvalReport};
use crate::num::{real, real_usize, sigmoid, Real};
use crate::permutation::derive_seed;
use crate::reduction::{run_samgsr, SamgsrConfig};

// stream tags for seed derivation
const STREAM_GRAPH: u64 = 1;
const STREAM_SETS: u64 = 2;
const STREAM_TRAIN_X: u64 = 3;
const STREAM_TRAIN_Y: u64 = 4;
const STREAM_TEST_X: u64 = 5;
const STREAM_TEST_Y: u64 = 6;
const STREAM_REPLICATE: u64 = 1000;

/// A relevant gene: its logit coefficient, connectivity target, and which
/// synthetic sets contain it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PlantedGene<R: Real> {
    pub gene: String,
    pub coefficient: R,
    pub target_degree: usize,
    pub member_of_sets: Vec<usize>,
}

/// Scenario and sampling parameters for one synthetic study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SimConfig<R: Real> {
    pub n_train: usize,
    pub n_test: usize,
    pub n_genes: usize,
    pub planted: Vec<PlantedGene<R>>,
    /// Sizes of the synthetic gene sets; members are drawn at random, so
    /// sets overlap by chance on top of the planted memberships.
    pub set_sizes: Vec<usize>,
    /// Non-planted genes draw a degree uniformly from 1..=this.
    pub background_degree_max: usize,
    pub seed: u64,
    pub case_label: String,
    pub control_label: String,
}

impl<R: Real> SimConfig<R> {
    /// The default two-gene scenario: a weak-signal hub (coefficient 0.37,
    /// degree far above the background) and a strong-signal gene of
    /// ordinary connectivity (coefficient -0.86), in a 1000-gene universe
    /// with five overlapping sets.
    pub fn default_scenario(seed: u64) -> Self {
        Self {
            n_train: 60,
            n_test: 60,
            n_genes: 1000,
            planted: vec![
                PlantedGene {
                    gene: gene_name(1),
                    coefficient: real(0.37),
                    target_degree: 80,
                    member_of_sets: vec![2, 3],
                },
                PlantedGene {
                    gene: gene_name(2),
                    coefficient: real(-0.86),
                    target_degree: 3,
                    member_of_sets: vec![0, 1],
                },
            ],
            set_sizes: vec![20, 30, 150, 300, 500],
            background_degree_max: 4,
            seed,
            case_label: "case".into(),
            control_label: "control".into(),
        }
    }

    pub fn gene_names(&self) -> Vec<String> {
        (1..=self.n_genes).map(gene_name).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.planted.is_empty() {
            return Err(Error::Config("no planted genes configured".into()));
        }
        let names = self.gene_names();
        for p in &self.planted {
            if !names.contains(&p.gene) {
                return Err(Error::Config(format!(
                    "planted gene '{}' is outside the {}-gene universe",
                    p.gene, self.n_genes
                )));
            }
            let c = p.coefficient;
            if c == R::zero() || !c.is_finite() {
                return Err(Error::Config(format!(
                    "planted gene '{}' has coefficient {c}; must be finite and nonzero",
                    p.gene
                )));
            }
            for &s in &p.member_of_sets {
                if s >= self.set_sizes.len() {
                    return Err(Error::Config(format!(
                        "planted gene '{}' assigned to set index {s}, but only {} sets exist",
                        p.gene,
                        self.set_sizes.len()
                    )));
                }
            }
        }
        if self.case_label == self.control_label {
            return Err(Error::Config("case and control labels must differ".into()));
        }
        Ok(())
    }
}

pub fn gene_name(i: usize) -> String {
    format!("g{i:04}")
}

/// Linear logit over planted features, in planted order.
pub fn planted_logit<R: Real>(coefficients: &[R], features: &[R]) -> R {
    let mut z = R::zero();
    for (c, x) in coefficients.iter().zip(features) {
        z += *c * *x;
    }
    z
}

/// Build the synthetic gene sets and connectivity graph for a scenario.
/// Deterministic in the config seed; the expression draws use separate
/// streams, so the scenario is shared across replicates.
pub fn synthesize_scenario<R: Real>(
    config: &SimConfig<R>,
) -> Result<(GeneSetCollection, ConnectivityGraph)> {
    config.validate()?;
    let names = config.gene_names();
    let planted_names: Vec<&String> = config.planted.iter().map(|p| &p.gene).collect();

    // gene sets: planted members are fixed, the rest drawn without
    // replacement from the non-planted genes
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, STREAM_SETS));
    let background: Vec<&String> = names.iter().filter(|g| !planted_names.contains(g)).collect();
    let mut sets = Vec::with_capacity(config.set_sizes.len());
    for (si, &size) in config.set_sizes.iter().enumerate() {
        let mut members: Vec<String> = config
            .planted
            .iter()
            .filter(|p| p.member_of_sets.contains(&si))
            .map(|p| p.gene.clone())
            .collect();
        if size < members.len() {
            return Err(Error::Config(format!(
                "set {si} has size {size} but {} planted members",
                members.len()
            )));
        }
        let mut pool = background.clone();
        pool.shuffle(&mut rng);
        members.extend(pool.into_iter().take(size - members.len()).cloned());
        members.sort_unstable();
        sets.push(GeneSet {
            name: format!("set{si}"),
            genes: members,
        });
    }
    let collection = GeneSetCollection::new(sets, "synthetic scenario")?;

    // connectivity: random stub pairing against target degrees
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, STREAM_GRAPH));
    let mut target = vec![0usize; config.n_genes];
    for (i, name) in names.iter().enumerate() {
        target[i] = match config.planted.iter().find(|p| &p.gene == name) {
            Some(p) => p.target_degree,
            None => rng.random_range(1..=config.background_degree_max),
        };
    }
    let mut stubs = Vec::new();
    for (i, &t) in target.iter().enumerate() {
        for _ in 0..t {
            stubs.push(i);
        }
    }
    stubs.shuffle(&mut rng);
    let mut edges = Vec::with_capacity(stubs.len() / 2);
    for pair in stubs.chunks_exact(2) {
        edges.push((names[pair[0]].clone(), names[pair[1]].clone()));
    }
    // self-pairs and duplicates are dropped by the graph builder
    let (graph, _report) = ConnectivityGraph::build(&edges, &names)?;
    Ok((collection, graph))
}

fn draw_matrix<R: Real>(
    names: &[String],
    n_samples: usize,
    prefix: &str,
    seed: u64,
) -> ExpressionMatrix<R> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Vec::with_capacity(names.len() * n_samples);
    for _ in 0..names.len() * n_samples {
        let x: f64 = StandardNormal.sample(&mut rng);
        values.push(real::<R>(x));
    }
    let sample_ids = (0..n_samples).map(|i| format!("{prefix}{i:05}")).collect();
    ExpressionMatrix::new(names.to_vec(), sample_ids, values)
        .expect("generated matrix is well-formed")
}

/// Bernoulli labels from the logistic model over the planted rows.
/// Degenerate draws (a class with fewer than 2 samples) are redrawn from
/// the same stream, keeping the result deterministic in the seed.
fn draw_labels<R: Real>(
    matrix: &ExpressionMatrix<R>,
    planted: &[(usize, R)], // (row, coefficient)
    case: &str,
    control: &str,
    seed: u64,
) -> Result<Vec<String>> {
    let n = matrix.n_samples();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _attempt in 0..1000 {
        let mut labels = Vec::with_capacity(n);
        let mut n_case = 0usize;
        for s in 0..n {
            let mut z = R::zero();
            for &(row, coeff) in planted {
                z += coeff * matrix.row(row)[s];
            }
            let p = sigmoid(z);
            let u: f64 = rng.random();
            if real::<R>(u) < p {
                labels.push(case.to_string());
                n_case += 1;
            } else {
                labels.push(control.to_string());
            }
        }
        if n_case >= 2 && n - n_case >= 2 {
            return Ok(labels);
        }
    }
    Err(Error::InvalidInput(
        "label sampling kept producing a class with fewer than 2 samples".into(),
    ))
}

/// Independent train and test datasets under the scenario's generative
/// model: i.i.d. standard-normal features, logistic Bernoulli labels.
pub fn simulate_dataset<R: Real>(
    config: &SimConfig<R>,
) -> Result<(ExpressionDataset<R>, ExpressionDataset<R>)> {
    config.validate()?;
    let names = config.gene_names();
    let train_matrix = draw_matrix::<R>(
        &names,
        config.n_train,
        "tr",
        derive_seed(config.seed, STREAM_TRAIN_X),
    );
    let test_matrix = draw_matrix::<R>(
        &names,
        config.n_test,
        "te",
        derive_seed(config.seed, STREAM_TEST_X),
    );
    let planted: Vec<(usize, R)> = config
        .planted
        .iter()
        .map(|p| {
            (
                train_matrix.gene_pos(&p.gene).expect("validated planted gene"),
                p.coefficient,
            )
        })
        .collect();
    let train_labels = draw_labels(
        &train_matrix,
        &planted,
        &config.case_label,
        &config.control_label,
        derive_seed(config.seed, STREAM_TRAIN_Y),
    )?;
    let test_labels = draw_labels(
        &test_matrix,
        &planted,
        &config.case_label,
        &config.control_label,
        derive_seed(config.seed, STREAM_TEST_Y),
    )?;
    Ok((
        ExpressionDataset::new(train_matrix, train_labels)?,
        ExpressionDataset::new(test_matrix, test_labels)?,
    ))
}

/// Regenerate labels for real expression matrices: features are the
/// standardized observed values, labels come from the logistic model
/// applied to the standardized planted rows.
pub fn resimulate_from_real<R: Real>(
    train: &ExpressionMatrix<R>,
    test: &ExpressionMatrix<R>,
    planted: &[(String, R)],
    case_label: &str,
    control_label: &str,
    seed: u64,
) -> Result<(ExpressionDataset<R>, ExpressionDataset<R>)> {
    let prepare = |matrix: &ExpressionMatrix<R>, x_seed: u64| -> Result<ExpressionDataset<R>> {
        let standardized = matrix.standardize()?;
        let rows: Vec<(usize, R)> = planted
            .iter()
            .map(|(gene, coeff)| {
                standardized
                    .gene_pos(gene)
                    .map(|r| (r, *coeff))
                    .ok_or_else(|| {
                        Error::InvalidInput(format!("planted gene '{gene}' absent from the matrix"))
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        let labels = draw_labels(&standardized, &rows, case_label, control_label, x_seed)?;
        ExpressionDataset::new(standardized, labels)
    };
    Ok((
        prepare(train, derive_seed(seed, STREAM_TRAIN_Y))?,
        prepare(test, derive_seed(seed, STREAM_TEST_Y))?,
    ))
}

/// Which selection pipeline a study arm runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Samgsr,
    WeightedSamgsr,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Samgsr => "samgsr",
            Method::WeightedSamgsr => "weighted-samgsr",
        }
    }

    pub fn is_weighted(&self) -> bool {
        matches!(self, Method::WeightedSamgsr)
    }

    /// Seed-stream tag intrinsic to the method, independent of request order.
    fn stream_tag(&self) -> u64 {
        match self {
            Method::Samgsr => 0,
            Method::WeightedSamgsr => 1,
        }
    }
}

/// Pipeline settings the study applies to every replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct StudyPipeline<R: Real> {
    /// Candidate reduction thresholds for tuning.
    pub grid: Vec<R>,
    /// Cross-validation fold count.
    pub k: usize,
    /// Base selection config; `weighted`, `seed`, `c_star`, and
    /// `positive_class` are managed per replicate and per method.
    pub samgsr: SamgsrConfig<R>,
    pub fit: FitConfig<R>,
}

/// Selection frequency of one planted gene under one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PlantedFrequency<R: Real> {
    pub gene: String,
    pub selected_pct: R,
}

/// Aggregates for one study arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MethodSummary<R: Real> {
    pub method: String,
    pub mean_signature_size: R,
    pub planted: Vec<PlantedFrequency<R>>,
    pub mean_error: R,
    pub mean_gbs: R,
    pub mean_bcm: R,
    pub mean_aupr: R,
}

/// Study output: per-method aggregates over R replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ReplicateSummary<R: Real> {
    pub replicates: usize,
    pub methods: Vec<MethodSummary<R>>,
    pub warnings: Vec<String>,
}

struct ReplicateRecord<R: Real> {
    size: usize,
    planted_selected: Vec<bool>,
    eval: EvalReport<R>,
    warnings: Vec<String>,
}

/// Run the full pipeline (tune, select, fit, evaluate) for every method on
/// every replicate's freshly drawn data, under a fixed scenario.
pub fn replicate_study<R: Real>(
    config: &SimConfig<R>,
    methods: &[Method],
    replicates: usize,
    pipeline: &StudyPipeline<R>,
) -> Result<ReplicateSummary<R>> {
    let (collection, graph) = synthesize_scenario(config)?;
    let planted_genes: Vec<String> = config.planted.iter().map(|p| p.gene.clone()).collect();
    study_over(
        |rep_seed| {
            let mut rep_config = config.clone();
            rep_config.seed = rep_seed;
            simulate_dataset(&rep_config)
        },
        &collection,
        &graph,
        &planted_genes,
        &config.case_label,
        &config.control_label,
        methods,
        replicates,
        pipeline,
        config.seed,
    )
}

/// Same study over fixed real expression matrices: features stay the
/// supplied (standardized) values and only the labels are regenerated per
/// replicate from the logistic model on the planted rows.
#[allow(clippy::too_many_arguments)]
pub fn replicate_study_real<R: Real>(
    train: &ExpressionMatrix<R>,
    test: &ExpressionMatrix<R>,
    planted: &[(String, R)],
    collection: &GeneSetCollection,
    graph: &ConnectivityGraph,
    case_label: &str,
    control_label: &str,
    methods: &[Method],
    replicates: usize,
    pipeline: &StudyPipeline<R>,
    seed: u64,
) -> Result<ReplicateSummary<R>> {
    let train = train.standardize()?;
    let test = test.standardize()?;
    let planted_genes: Vec<String> = planted.iter().map(|(g, _)| g.clone()).collect();
    let rows_for = |matrix: &ExpressionMatrix<R>| -> Result<Vec<(usize, R)>> {
        planted
            .iter()
            .map(|(gene, coeff)| {
                matrix.gene_pos(gene).map(|r| (r, *coeff)).ok_or_else(|| {
                    Error::InvalidInput(format!("planted gene '{gene}' absent from the matrix"))
                })
            })
            .collect()
    };
    let train_rows = rows_for(&train)?;
    let test_rows = rows_for(&test)?;
    study_over(
        |rep_seed| {
            let train_labels = draw_labels(
                &train,
                &train_rows,
                case_label,
                control_label,
                derive_seed(rep_seed, STREAM_TRAIN_Y),
            )?;
            let test_labels = draw_labels(
                &test,
                &test_rows,
                case_label,
                control_label,
                derive_seed(rep_seed, STREAM_TEST_Y),
            )?;
            Ok((
                ExpressionDataset::new(train.clone(), train_labels)?,
                ExpressionDataset::new(test.clone(), test_labels)?,
            ))
        },
        collection,
        graph,
        &planted_genes,
        case_label,
        control_label,
        methods,
        replicates,
        pipeline,
        seed,
    )
}

#[allow(clippy::too_many_arguments)]
fn study_over<R, F>(
    data_for: F,
    collection: &GeneSetCollection,
    graph: &ConnectivityGraph,
    planted_genes: &[String],
    case_label: &str,
    control_label: &str,
    methods: &[Method],
    replicates: usize,
    pipeline: &StudyPipeline<R>,
    master_seed: u64,
) -> Result<ReplicateSummary<R>>
where
    R: Real,
    F: Fn(u64) -> Result<(ExpressionDataset<R>, ExpressionDataset<R>)> + Sync,
{
    if replicates < 1 {
        return Err(Error::Config("replicate count must be at least 1".into()));
    }
    if methods.is_empty() {
        return Err(Error::Config("no methods requested".into()));
    }

    let records: Vec<Vec<ReplicateRecord<R>>> = (0..replicates)
        .into_par_iter()
        .map(|rep| -> Result<Vec<ReplicateRecord<R>>> {
            let rep_seed = derive_seed(master_seed, STREAM_REPLICATE + rep as u64);
            let (train, test) = data_for(rep_seed)?;
            let (restricted, _) = collection.restrict_to(&train)?;
            methods
                .iter()
                .map(|method| {
                    // the arm seed keys on the method itself, so results do
                    // not depend on the order methods were requested in
                    run_one_arm(
                        &train,
                        &test,
                        &restricted,
                        graph,
                        *method,
                        planted_genes,
                        case_label,
                        control_label,
                        pipeline,
                        derive_seed(rep_seed, 7 + method.stream_tag()),
                    )
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    let r = real_usize::<R>(replicates);
    let hundred = real::<R>(100.0);
    let mut summaries = Vec::with_capacity(methods.len());
    let mut warnings = Vec::new();
    for (mi, method) in methods.iter().enumerate() {
        let arm: Vec<&ReplicateRecord<R>> = records.iter().map(|r| &r[mi]).collect();
        let mut size_sum = R::zero();
        let mut err = R::zero();
        let mut gbs = R::zero();
        let mut bcm = R::zero();
        let mut aupr = R::zero();
        let mut selected = vec![0usize; planted_genes.len()];
        for rec in &arm {
            size_sum += real_usize::<R>(rec.size);
            err += rec.eval.error_rate;
            gbs += rec.eval.gbs;
            bcm += rec.eval.bcm;
            aupr += rec.eval.aupr;
            for (i, &hit) in rec.planted_selected.iter().enumerate() {
                if hit {
                    selected[i] += 1;
                }
            }
            warnings.extend(rec.warnings.iter().cloned());
        }
        summaries.push(MethodSummary {
            method: method.as_str().to_string(),
            mean_signature_size: size_sum / r,
            planted: planted_genes
                .iter()
                .zip(&selected)
                .map(|(g, &count)| PlantedFrequency {
                    gene: g.clone(),
                    selected_pct: hundred * real_usize::<R>(count) / r,
                })
                .collect(),
            mean_error: err / r,
            mean_gbs: gbs / r,
            mean_bcm: bcm / r,
            mean_aupr: aupr / r,
        });
    }
    Ok(ReplicateSummary {
        replicates,
        methods: summaries,
        warnings,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_one_arm<R: Real>(
    train: &ExpressionDataset<R>,
    test: &ExpressionDataset<R>,
    collection: &GeneSetCollection,
    graph: &ConnectivityGraph,
    method: Method,
    planted_genes: &[String],
    case_label: &str,
    control_label: &str,
    pipeline: &StudyPipeline<R>,
    seed: u64,
) -> Result<ReplicateRecord<R>> {
    let mut cfg = pipeline.samgsr.clone();
    cfg.weighted = method.is_weighted();
    cfg.positive_class = case_label.to_string();
    cfg.seed = derive_seed(seed, 1);
    let graph_opt = if cfg.weighted { Some(graph) } else { None };

    let tuning = tune_threshold(
        train,
        collection,
        graph_opt,
        &pipeline.grid,
        pipeline.k,
        derive_seed(seed, 2),
        &cfg,
        &pipeline.fit,
    )?;
    cfg.c_star = tuning.chosen;
    let outcome = run_samgsr(train, collection, graph_opt, &cfg)?;
    let mut warnings = Vec::new();

    let eval = if outcome.signature.is_empty() {
        warnings.push(format!(
            "{}: empty signature; evaluated with the uninformative training-prevalence posterior",
            method.as_str()
        ));
        let case_frac = real_usize::<R>(
            train
                .labels()
                .iter()
                .filter(|l| l.as_str() == case_label)
                .count(),
        ) / real_usize::<R>(train.n_samples());
        let rows: Vec<Vec<R>> = (0..test.n_samples())
            .map(|_| vec![case_frac, R::one() - case_frac])
            .collect();
        let posteriors = PosteriorMatrix::new(
            vec![case_label.to_string(), control_label.to_string()],
            test.sample_ids().to_vec(),
            rows,
        )?;
        evaluate_posteriors(&posteriors, test.labels())?
    } else {
        let model = fit_classifier(
            train,
            &outcome.signature.gene_names(),
            case_label,
            &pipeline.fit,
        )?;
        let posteriors = predict(&model, test.matrix())?;
        evaluate_posteriors(&posteriors, test.labels())?
    };

    let planted_selected = planted_genes
        .iter()
        .map(|g| outcome.signature.contains(g))
        .collect();
    Ok(ReplicateRecord {
        size: outcome.signature.len(),
        planted_selected,
        eval,
        warnings,
    })
}
