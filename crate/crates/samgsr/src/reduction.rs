//! Gene-set screening and reduction: keep each significant set's top genes,
//! by magnitude of the (possibly weighted) statistic, until the residual
//! subset stops looking significant.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connectivity::{connectivity_weights, normalize_weights, ConnectivityGraph, WeightScheme};
use crate::data::{ExpressionDataset, GeneSet, GeneSetCollection};
use crate::error::{Error, Result};
use crate::num::Real;
use crate::permutation::{
    build_plan, set_pvalues_with, PermutationContext, PermutationPlan, SetPValue, SetPValueTable,
    StatConfig,
};
use crate::sam::S0Method;

/// Full configuration of one selection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SamgsrConfig<R: Real> {
    pub weighted: bool,
    /// Set-level significance threshold for screening.
    pub alpha: R,
    /// Reduction stopping threshold compared against the residual p-value.
    pub c_star: R,
    /// Permutation count (the plan may switch to exhaustive mode below it).
    pub b: usize,
    pub seed: u64,
    pub s0: S0Method<R>,
    pub normalization: WeightScheme,
    pub positive_class: String,
}

impl<R: Real> SamgsrConfig<R> {
    pub fn new(positive_class: impl Into<String>) -> Self {
        Self {
            weighted: false,
            alpha: crate::num::real(0.05),
            c_star: crate::num::real(0.5),
            b: 1000,
            seed: 1,
            s0: S0Method::Median,
            normalization: WeightScheme::MeanOne,
            positive_class: positive_class.into(),
        }
    }

    /// Stable hash of every parameter, recorded in signatures and reports.
    pub fn fingerprint(&self) -> String
    where
        R: Serialize,
    {
        let json = serde_json::to_string(self).expect("config serializes");
        crate::report::fnv1a_hex(json.as_bytes())
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha > R::zero() && self.alpha <= R::one()) {
            return Err(Error::Config(format!(
                "alpha must be in (0, 1], got {}",
                self.alpha
            )));
        }
        if !(self.c_star > R::zero() && self.c_star < R::one()) {
            return Err(Error::Config(format!(
                "c_star must be in (0, 1), got {}",
                self.c_star
            )));
        }
        if self.b < 1 {
            return Err(Error::Config("permutation count B must be at least 1".into()));
        }
        Ok(())
    }
}

/// Record of one set's reduction: the magnitude ordering, the residual
/// p-values seen, and where the stopping rule fired.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ReductionTrace<R: Real> {
    pub set_name: String,
    /// Genes sorted by decreasing magnitude of the (weighted) statistic;
    /// exact magnitude ties fall back to gene-name order.
    pub ordered_genes: Vec<String>,
    /// Statistic value per ordered gene.
    pub ordered_stats: Vec<R>,
    /// Residual p-values c_1, c_2, ... as far as the iteration went.
    pub c_values: Vec<R>,
    /// First k where c_k exceeded the threshold, or the set size if the
    /// rule never fired.
    pub stop_k: usize,
    /// True when the rule never fired and the whole set was kept.
    pub exhausted: bool,
    /// Genes involved in exact magnitude ties, if any.
    pub ties: Vec<String>,
}

impl<R: Real> ReductionTrace<R> {
    /// The selected core: the first `stop_k` genes of the ordering.
    pub fn core(&self) -> &[String] {
        &self.ordered_genes[..self.stop_k]
    }
}

/// Per-gene provenance inside a signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureSource {
    pub set_name: String,
    /// 1-based rank of the gene in that set's magnitude ordering.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SignatureGene<R: Real> {
    pub gene: String,
    /// The (weighted) statistic the ordering used.
    pub statistic: R,
    pub sources: Vec<SignatureSource>,
}

/// De-duplicated union of all core subsets, with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Signature<R: Real> {
    pub genes: Vec<SignatureGene<R>>,
    pub config_fingerprint: String,
}

impl<R: Real> Signature<R> {
    pub fn gene_names(&self) -> Vec<String> {
        self.genes.iter().map(|g| g.gene.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn contains(&self, gene: &str) -> bool {
        self.genes.iter().any(|g| g.gene == gene)
    }
}

/// Everything a selection run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SamgsrOutcome<R: Real> {
    pub signature: Signature<R>,
    pub traces: Vec<ReductionTrace<R>>,
    pub pvalues: SetPValueTable<R>,
    pub screened: Vec<SetPValue<R>>,
    pub warnings: Vec<String>,
}

/// Sets with p <= alpha, ordered by ascending p then by name.
pub fn screen_sets<R: Real>(table: &SetPValueTable<R>, alpha: R) -> Result<Vec<SetPValue<R>>> {
    if !(alpha > R::zero() && alpha <= R::one()) {
        return Err(Error::Config(format!("alpha must be in (0, 1], got {alpha}")));
    }
    let mut hits: Vec<SetPValue<R>> = table
        .entries
        .iter()
        .filter(|e| e.p <= alpha)
        .cloned()
        .collect();
    hits.sort_by(|a, b| {
        a.p.partial_cmp(&b.p)
            .expect("p-values are not NaN")
            .then_with(|| a.set_name.cmp(&b.set_name))
    });
    Ok(hits)
}

/// (gene, dataset row, statistic) triples in magnitude order.
type RankedGenes<R> = Vec<(String, usize, R)>;

/// Magnitude ordering of a set's member rows: decreasing |stat|, exact
/// ties broken by gene name. Also returns the genes involved in ties.
fn order_by_magnitude<R: Real>(
    ctx: &PermutationContext<'_, R>,
    set: &GeneSet,
) -> Result<(RankedGenes<R>, Vec<String>)> {
    let rows = ctx.member_rows(&set.name, &set.genes)?;
    let d = ctx.observed_d();
    let mut entries: Vec<(String, usize, R)> = set
        .genes
        .iter()
        .zip(&rows)
        .map(|(g, &r)| (g.clone(), r, d[r]))
        .collect();
    entries.sort_by(|a, b| {
        b.2.abs()
            .partial_cmp(&a.2.abs())
            .expect("statistics are not NaN")
            .then_with(|| a.0.cmp(&b.0))
    });
    let mut ties = Vec::new();
    for w in entries.windows(2) {
        if w[0].2.abs() == w[1].2.abs() {
            if ties.last() != Some(&w[0].0) {
                ties.push(w[0].0.clone());
            }
            ties.push(w[1].0.clone());
        }
    }
    Ok((entries, ties))
}

/// Residual p-values c_1, c_2, ... computed until the first value exceeds
/// `cap` or the residual empties. Each c_k is the p-value of the rows after
/// the first k, scored freshly in member order.
pub(crate) fn reduction_curve<R: Real>(
    ctx: &PermutationContext<'_, R>,
    ordered_rows: &[usize],
    cap: R,
) -> Vec<R> {
    let m = ordered_rows.len();
    let mut c_values = Vec::new();
    for k in 1..m {
        let (_, c_k) = ctx.score_rows(&ordered_rows[k..]);
        c_values.push(c_k);
        if c_k > cap {
            break;
        }
    }
    c_values
}

/// First k whose c_k strictly exceeds the threshold; the whole set when the
/// rule never fires.
pub(crate) fn stop_from_curve<R: Real>(c_values: &[R], set_size: usize, c_star: R) -> (usize, bool) {
    for (i, c) in c_values.iter().enumerate() {
        if *c > c_star {
            return (i + 1, false);
        }
    }
    (set_size, true)
}

fn reduce_with_context<R: Real>(
    ctx: &PermutationContext<'_, R>,
    set: &GeneSet,
    c_star: R,
) -> Result<ReductionTrace<R>> {
    if !(c_star > R::zero() && c_star < R::one()) {
        return Err(Error::Config(format!("c_star must be in (0, 1), got {c_star}")));
    }
    let (ordered, ties) = order_by_magnitude(ctx, set)?;
    let rows: Vec<usize> = ordered.iter().map(|e| e.1).collect();
    let c_values = reduction_curve(ctx, &rows, c_star);
    let (stop_k, exhausted) = stop_from_curve(&c_values, rows.len(), c_star);
    Ok(ReductionTrace {
        set_name: set.name.clone(),
        ordered_genes: ordered.iter().map(|e| e.0.clone()).collect(),
        ordered_stats: ordered.iter().map(|e| e.2).collect(),
        c_values,
        stop_k,
        exhausted,
        ties,
    })
}

/// Reduce one screened set to its core under the given threshold.
pub fn reduce_set<R: Real>(
    dataset: &ExpressionDataset<R>,
    set: &GeneSet,
    plan: &PermutationPlan,
    config: &StatConfig<R>,
    c_star: R,
) -> Result<ReductionTrace<R>> {
    let ctx = PermutationContext::new(dataset, plan, config)?;
    reduce_with_context(&ctx, set, c_star)
}

fn signature_from_traces<R: Real>(
    traces: &[ReductionTrace<R>],
    fingerprint: String,
) -> Signature<R> {
    let mut by_gene: BTreeMap<&str, (R, Vec<SignatureSource>)> = BTreeMap::new();
    for trace in traces {
        for (rank0, gene) in trace.core().iter().enumerate() {
            let stat = trace.ordered_stats[rank0];
            let entry = by_gene.entry(gene.as_str()).or_insert_with(|| (stat, Vec::new()));
            entry.1.push(SignatureSource {
                set_name: trace.set_name.clone(),
                rank: rank0 + 1,
            });
        }
    }
    let mut genes: Vec<SignatureGene<R>> = by_gene
        .into_iter()
        .map(|(gene, (statistic, mut sources))| {
            sources.sort_by(|a, b| a.set_name.cmp(&b.set_name));
            SignatureGene {
                gene: gene.to_string(),
                statistic,
                sources,
            }
        })
        .collect();
    genes.sort_by(|a, b| {
        b.statistic
            .abs()
            .partial_cmp(&a.statistic.abs())
            .expect("statistics are not NaN")
            .then_with(|| a.gene.cmp(&b.gene))
    });
    Signature {
        genes,
        config_fingerprint: fingerprint,
    }
}

/// The full selection pipeline: statistics, set p-values, screening,
/// per-set reduction, and the union signature. Deterministic under a fixed
/// config; the weighted variant requires a connectivity graph.
pub fn run_samgsr<R: Real>(
    dataset: &ExpressionDataset<R>,
    collection: &GeneSetCollection,
    graph: Option<&ConnectivityGraph>,
    config: &SamgsrConfig<R>,
) -> Result<SamgsrOutcome<R>> {
    config.validate()?;
    let stat_config = stat_config_for(graph, config)?;
    let plan = build_plan(dataset.labels(), config.b, config.seed)?;
    let ctx = PermutationContext::new(dataset, &plan, &stat_config)?;
    run_with_context(&ctx, collection, config, &plan)
}

/// Build the per-run statistic configuration, normalizing graph weights
/// when the weighted variant is requested.
pub fn stat_config_for<R: Real>(
    graph: Option<&ConnectivityGraph>,
    config: &SamgsrConfig<R>,
) -> Result<StatConfig<R>> {
    if config.weighted {
        let graph = graph.ok_or_else(|| {
            Error::Config("weighted run requested but no connectivity graph provided".into())
        })?;
        let weights = normalize_weights(&connectivity_weights(graph), config.normalization)?;
        Ok(StatConfig::weighted(
            weights,
            config.s0,
            config.positive_class.clone(),
        ))
    } else {
        Ok(StatConfig::unweighted(
            config.s0,
            config.positive_class.clone(),
        ))
    }
}

pub(crate) fn run_with_context<R: Real>(
    ctx: &PermutationContext<'_, R>,
    collection: &GeneSetCollection,
    config: &SamgsrConfig<R>,
    plan: &PermutationPlan,
) -> Result<SamgsrOutcome<R>> {
    let table = set_pvalues_with(ctx, collection)?;
    let screened = screen_sets(&table, config.alpha)?;
    let traces: Vec<ReductionTrace<R>> = screened
        .par_iter()
        .map(|hit| {
            let set = collection
                .get(&hit.set_name)
                .expect("screened set exists in collection");
            reduce_with_context(ctx, set, config.c_star)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut warnings = Vec::new();
    if plan.is_exhaustive() {
        warnings.push(format!(
            "permutation plan switched to exhaustive mode: {} distinct label assignments <= B = {}",
            plan.b_used(),
            plan.requested_b()
        ));
    }
    if screened.is_empty() {
        warnings.push(format!(
            "no gene set passed screening at alpha = {}; signature is empty",
            config.alpha
        ));
    }
    for t in &traces {
        if t.exhausted {
            warnings.push(format!(
                "reduction of set '{}' never exceeded c_star = {}; whole set kept as core",
                t.set_name, config.c_star
            ));
        }
        if !t.ties.is_empty() {
            warnings.push(format!(
                "set '{}' had exact statistic-magnitude ties ({}); gene-name order applied",
                t.set_name,
                t.ties.join(", ")
            ));
        }
    }

    let signature = signature_from_traces(&traces, config.fingerprint());
    Ok(SamgsrOutcome {
        signature,
        traces,
        pvalues: table,
        screened,
        warnings,
    })
}
