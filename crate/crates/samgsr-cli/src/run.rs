//! Subcommand orchestration: load inputs, call into the library, assemble
//! the run report, and write artifacts.

use std::fs;
use std::path::Path;

use samgsr::classify::{composite_four_class, fit_classifier, predict, tune_threshold, FitConfig};
use samgsr::connectivity::{
    connectivity_weights, setcount_vs_connectivity, ConnectivityGraph, WeightScheme,
};
use samgsr::data::GeneSetCollection;
use samgsr::error::{Error, Result};
use samgsr::io::{join_labels, parse_edges, parse_expression_matrix, parse_gmt, parse_labels};
use samgsr::metrics::{evaluate_posteriors, stability as stability_over_lists};
use samgsr::permutation::{build_plan, set_pvalues};
use samgsr::reduction::{run_samgsr, screen_sets, stat_config_for};
use samgsr::report::{GeneWeight, NamedEval, RunReport, WeightReport};
use samgsr::sam::S0Method;
use samgsr::sim::{
    replicate_study, replicate_study_real, Method, PlantedGene, SimConfig, StudyPipeline,
};
use samgsr::{Config, Dataset};

use crate::render;
use crate::{
    CvArgs, DataArgs, EvaluateArgs, ReduceArgs, ScreenArgs, SimulateArgs, StabilityArgs,
    StatArgs, WeightsArgs,
};

fn parse_s0(text: &str) -> Result<S0Method<f64>> {
    if text == "median" {
        return Ok(S0Method::Median);
    }
    if let Some(v) = text.strip_prefix("fixed:") {
        let v: f64 = v
            .parse()
            .map_err(|_| Error::Config(format!("bad fixed s0 value '{v}'")))?;
        return Ok(S0Method::Fixed(v));
    }
    if let Some(q) = text.strip_prefix("percentile:") {
        let q: f64 = q
            .parse()
            .map_err(|_| Error::Config(format!("bad s0 percentile '{q}'")))?;
        return Ok(S0Method::Percentile(q));
    }
    Err(Error::Config(format!(
        "unknown s0 method '{text}' (expected median, fixed:<value>, or percentile:<q>)"
    )))
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let lo: f64 = parts[0]
            .parse()
            .map_err(|_| Error::Config(format!("bad grid bound '{}'", parts[0])))?;
        let hi: f64 = parts[1]
            .parse()
            .map_err(|_| Error::Config(format!("bad grid bound '{}'", parts[1])))?;
        let step: f64 = parts[2]
            .parse()
            .map_err(|_| Error::Config(format!("bad grid step '{}'", parts[2])))?;
        if step <= 0.0 || hi < lo {
            return Err(Error::Config(format!("bad grid range '{text}'")));
        }
        let mut grid = Vec::new();
        let mut i = 0usize;
        loop {
            let v = lo + step * i as f64;
            if v > hi + 1e-12 {
                break;
            }
            grid.push(v);
            i += 1;
        }
        return Ok(grid);
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad grid value '{s}'")))
        })
        .collect()
}

fn parse_methods(text: &str) -> Result<Vec<Method>> {
    text.split(',')
        .map(|s| match s.trim() {
            "samgsr" => Ok(Method::Samgsr),
            "weighted-samgsr" => Ok(Method::WeightedSamgsr),
            other => Err(Error::Config(format!(
                "unknown method '{other}' (expected samgsr or weighted-samgsr)"
            ))),
        })
        .collect()
}

/// `gene=coef[:degree[:set/set...]]` entries, comma separated.
fn parse_planted(text: &str) -> Result<Vec<PlantedGene<f64>>> {
    let mut out = Vec::new();
    for entry in text.split(',') {
        let entry = entry.trim();
        let (gene, rest) = entry
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("bad planted entry '{entry}'")))?;
        let mut fields = rest.split(':');
        let coef_text = fields.next().unwrap_or_default();
        let coefficient: f64 = coef_text
            .parse()
            .map_err(|_| Error::Config(format!("bad planted coefficient '{coef_text}'")))?;
        let target_degree = match fields.next() {
            Some(d) => d
                .parse()
                .map_err(|_| Error::Config(format!("bad planted degree '{d}'")))?,
            None => 1,
        };
        let member_of_sets = match fields.next() {
            Some(sets) => sets
                .split('/')
                .map(|s| {
                    s.parse()
                        .map_err(|_| Error::Config(format!("bad set index '{s}'")))
                })
                .collect::<Result<Vec<usize>>>()?,
            None => Vec::new(),
        };
        out.push(PlantedGene {
            gene: gene.to_string(),
            coefficient,
            target_degree,
            member_of_sets,
        });
    }
    Ok(out)
}

fn config_from(stat: &StatArgs, c_star: f64) -> Result<Config> {
    let mut config = Config::new(stat.positive_class.clone());
    config.weighted = stat.weighted;
    config.alpha = stat.alpha;
    config.c_star = c_star;
    config.b = stat.b;
    config.seed = stat.seed;
    config.s0 = parse_s0(&stat.s0)?;
    config.normalization = stat.normalization.parse::<WeightScheme>()?;
    Ok(config)
}

struct LoadedInputs {
    dataset: Dataset,
    collection: GeneSetCollection,
    graph: Option<ConnectivityGraph>,
    warnings: Vec<String>,
}

fn load_inputs(data: &DataArgs) -> Result<LoadedInputs> {
    let mut warnings = Vec::new();
    let matrix = parse_expression_matrix(&data.expression)?;
    let labels = parse_labels(&data.labels)?;
    let mut dataset = join_labels(matrix, &labels)?;

    let (filtered, dropped) = dataset.drop_zero_variance();
    if !dropped.is_empty() {
        warnings.push(format!(
            "{} zero-variance gene(s) dropped: {}",
            dropped.len(),
            dropped.join(", ")
        ));
    }
    dataset = filtered;
    if !data.no_standardize {
        dataset = dataset.standardize()?;
    }

    let (gmt, gmt_warnings) = parse_gmt(&data.gmt)?;
    warnings.extend(gmt_warnings);
    let (collection, dropped_sets) = gmt.restrict_to(&dataset)?;
    if !dropped_sets.is_empty() {
        warnings.push(format!(
            "{} gene set(s) dropped after restriction to measured genes: {}",
            dropped_sets.len(),
            dropped_sets.join(", ")
        ));
    }

    let graph = match &data.ppi {
        Some(path) => {
            let (edges, edge_report) = parse_edges(path, data.ppi_header)?;
            if edge_report.self_loops > 0 {
                warnings.push(format!(
                    "{} self-loop edge line(s) ignored",
                    edge_report.self_loops
                ));
            }
            let (graph, build) = ConnectivityGraph::build(&edges, dataset.gene_ids())?;
            if build.dropped_edges > 0 {
                warnings.push(format!(
                    "{} edge(s) dropped (endpoint not among measured genes)",
                    build.dropped_edges
                ));
            }
            if build.merged_duplicates > 0 {
                warnings.push(format!(
                    "{} duplicate edge(s) merged",
                    build.merged_duplicates
                ));
            }
            Some(graph)
        }
        None => None,
    };

    Ok(LoadedInputs {
        dataset,
        collection,
        graph,
        warnings,
    })
}

fn data_config_value(data: &DataArgs) -> serde_json::Value {
    serde_json::json!({
        "expression": data.expression,
        "labels": data.labels,
        "gmt": data.gmt,
        "ppi": data.ppi,
        "ppi_header": data.ppi_header,
        "standardize": !data.no_standardize,
    })
}

fn stat_config_value(stat: &StatArgs) -> serde_json::Value {
    serde_json::json!({
        "weighted": stat.weighted,
        "alpha": stat.alpha,
        "b": stat.b,
        "seed": stat.seed,
        "s0": stat.s0,
        "normalization": stat.normalization,
        "positive_class": stat.positive_class,
    })
}

fn merge_values(parts: &[serde_json::Value]) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for part in parts {
        if let serde_json::Value::Object(obj) = part {
            for (k, v) in obj {
                map.insert(k.clone(), v.clone());
            }
        }
    }
    serde_json::Value::Object(map)
}

fn write_artifacts(out: &Path, report: &RunReport, text: &str) -> Result<()> {
    fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.display().to_string(),
        source,
    })?;
    let json_path = out.join("report.json");
    fs::write(&json_path, report.to_json()).map_err(|source| Error::Io {
        path: json_path.display().to_string(),
        source,
    })?;
    let text_path = out.join("report.txt");
    fs::write(&text_path, text).map_err(|source| Error::Io {
        path: text_path.display().to_string(),
        source,
    })?;
    print!("{text}");
    println!("report written to {}", json_path.display());
    Ok(())
}

fn require_ppi_for_weighted(weighted: bool, ppi: &Option<std::path::PathBuf>) -> Result<()> {
    if weighted && ppi.is_none() {
        return Err(Error::Config(
            "--weighted requires --ppi <edge list>".into(),
        ));
    }
    Ok(())
}

pub fn screen(args: ScreenArgs) -> Result<()> {
    require_ppi_for_weighted(args.stat.weighted, &args.data.ppi)?;
    let config = config_from(&args.stat, 0.5)?;
    let inputs = load_inputs(&args.data)?;

    let stat_config = stat_config_for(inputs.graph.as_ref(), &config)?;
    let plan = build_plan(inputs.dataset.labels(), config.b, config.seed)?;
    let table = set_pvalues(&inputs.dataset, &inputs.collection, &plan, &stat_config)?;
    let screened = screen_sets(&table, config.alpha)?;

    let config_value = merge_values(&[data_config_value(&args.data), stat_config_value(&args.stat)]);
    let mut report = RunReport::new("screen", config_value);
    report.warnings = inputs.warnings;
    if plan.is_exhaustive() {
        report.warnings.push(format!(
            "permutation plan switched to exhaustive mode ({} distinct assignments)",
            plan.b_used()
        ));
    }
    report.pvalues = Some(table);
    report.screened = Some(screened);
    let text = render::render(&report);
    write_artifacts(&args.out, &report, &text)
}

pub fn reduce(args: ReduceArgs) -> Result<()> {
    require_ppi_for_weighted(args.stat.weighted, &args.data.ppi)?;
    let config = config_from(&args.stat, args.c_star)?;
    let inputs = load_inputs(&args.data)?;

    let outcome = run_samgsr(
        &inputs.dataset,
        &inputs.collection,
        inputs.graph.as_ref(),
        &config,
    )?;

    let config_value = merge_values(&[
        data_config_value(&args.data),
        stat_config_value(&args.stat),
        serde_json::json!({"c_star": args.c_star, "fit": !args.no_fit}),
    ]);
    let mut report = RunReport::new("reduce", config_value);
    report.warnings = inputs.warnings;
    report.warnings.extend(outcome.warnings.clone());

    if !args.no_fit && !outcome.signature.is_empty() {
        let model = fit_classifier(
            &inputs.dataset,
            &outcome.signature.gene_names(),
            &args.stat.positive_class,
            &FitConfig::default(),
        )?;
        let posteriors = predict(&model, inputs.dataset.matrix())?;
        let eval = evaluate_posteriors(&posteriors, inputs.dataset.labels())?;
        report.model = Some(model);
        report.evals = Some(vec![NamedEval {
            name: "training".into(),
            eval,
        }]);
    }
    report.pvalues = Some(outcome.pvalues);
    report.screened = Some(outcome.screened);
    report.traces = Some(outcome.traces);
    report.signature = Some(outcome.signature);
    let text = render::render(&report);
    write_artifacts(&args.out, &report, &text)
}

pub fn cv(args: CvArgs) -> Result<()> {
    require_ppi_for_weighted(args.stat.weighted, &args.data.ppi)?;
    let config = config_from(&args.stat, 0.5)?;
    let grid = parse_grid(&args.grid)?;
    let inputs = load_inputs(&args.data)?;

    let tuning = tune_threshold(
        &inputs.dataset,
        &inputs.collection,
        inputs.graph.as_ref(),
        &grid,
        args.k,
        config.seed,
        &config,
        &FitConfig::default(),
    )?;

    let config_value = merge_values(&[
        data_config_value(&args.data),
        stat_config_value(&args.stat),
        serde_json::json!({"grid": args.grid, "k": args.k}),
    ]);
    let mut report = RunReport::new("cv", config_value);
    report.warnings = inputs.warnings;
    report.tuning = Some(tuning);
    let text = render::render(&report);
    write_artifacts(&args.out, &report, &text)
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let load_model = |path: &Path| -> Result<samgsr::Classifier> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let report = RunReport::from_json(&text)?;
        report.model.ok_or_else(|| {
            Error::Config(format!("report {} holds no fitted model", path.display()))
        })
    };
    let model = load_model(&args.report)?;

    let mut warnings = Vec::new();
    let matrix = parse_expression_matrix(&args.expression)?;
    let label_pairs = parse_labels(&args.labels)?;
    let (matrix, dropped) = matrix.drop_zero_variance();
    if !dropped.is_empty() {
        warnings.push(format!("{} zero-variance gene(s) dropped", dropped.len()));
    }
    let matrix = if args.no_standardize {
        matrix
    } else {
        matrix.standardize()?
    };
    // align truth labels with matrix sample order
    let truth: Vec<String> = {
        use std::collections::HashMap;
        let by_sample: HashMap<&str, &str> = label_pairs
            .iter()
            .map(|(s, c)| (s.as_str(), c.as_str()))
            .collect();
        matrix
            .sample_ids()
            .iter()
            .map(|s| {
                by_sample
                    .get(s.as_str())
                    .map(|c| c.to_string())
                    .ok_or_else(|| Error::InvalidInput(format!("sample '{s}' has no label")))
            })
            .collect::<Result<Vec<_>>>()?
    };

    let posteriors = predict(&model, &matrix)?;
    let evals = match &args.second_report {
        Some(path) => {
            let second = load_model(path)?;
            let second_posteriors = predict(&second, &matrix)?;
            let composite = composite_four_class(&posteriors, &second_posteriors)?;
            vec![NamedEval {
                name: "composite".into(),
                eval: evaluate_posteriors(&composite, &truth)?,
            }]
        }
        None => vec![NamedEval {
            name: "test".into(),
            eval: evaluate_posteriors(&posteriors, &truth)?,
        }],
    };

    let config_value = serde_json::json!({
        "report": args.report,
        "second_report": args.second_report,
        "expression": args.expression,
        "labels": args.labels,
        "standardize": !args.no_standardize,
    });
    let mut report = RunReport::new("evaluate", config_value);
    report.warnings = warnings;
    report.model = Some(model);
    report.evals = Some(evals);
    let text = render::render(&report);
    write_artifacts(&args.out, &report, &text)
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let methods = parse_methods(&args.methods)?;
    let grid = parse_grid(&args.grid)?;
    let planted = parse_planted(&args.planted)?;
    let mut samgsr_config = Config::new("case");
    samgsr_config.alpha = args.alpha;
    samgsr_config.b = args.b;
    samgsr_config.s0 = parse_s0(&args.s0)?;
    samgsr_config.normalization = args.normalization.parse::<WeightScheme>()?;
    let pipeline = StudyPipeline {
        grid: grid.clone(),
        k: args.k,
        samgsr: samgsr_config,
        fit: FitConfig::default(),
    };

    let mut warnings = Vec::new();
    let summary = match &args.real_train {
        Some(real_train) => {
            let real_test = args.real_test.as_ref().expect("clap enforces real-test");
            let gmt_path = args.gmt.as_ref().expect("clap enforces gmt");
            let ppi_path = args.ppi.as_ref().expect("clap enforces ppi");
            let (train, dropped_train) = parse_expression_matrix(real_train)?.drop_zero_variance();
            let (test, dropped_test) = parse_expression_matrix(real_test)?.drop_zero_variance();
            if !dropped_train.is_empty() || !dropped_test.is_empty() {
                warnings.push(format!(
                    "zero-variance genes dropped: {} train, {} test",
                    dropped_train.len(),
                    dropped_test.len()
                ));
            }
            let (gmt, gmt_warnings) = parse_gmt(gmt_path)?;
            warnings.extend(gmt_warnings);
            let (edges, edge_report) = parse_edges(ppi_path, args.ppi_header)?;
            if edge_report.self_loops > 0 {
                warnings.push(format!("{} self-loop edge line(s) ignored", edge_report.self_loops));
            }
            let (graph, _) = ConnectivityGraph::build(&edges, train.gene_ids())?;
            let planted_pairs: Vec<(String, f64)> = planted
                .iter()
                .map(|p| (p.gene.clone(), p.coefficient))
                .collect();
            replicate_study_real(
                &train,
                &test,
                &planted_pairs,
                &gmt,
                &graph,
                "case",
                "control",
                &methods,
                args.replicates,
                &pipeline,
                args.seed,
            )?
        }
        None => {
            let set_sizes: Vec<usize> = args
                .set_sizes
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("bad set size '{s}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            let config = SimConfig {
                n_train: args.n_train,
                n_test: args.n_test,
                n_genes: args.n_genes,
                planted,
                set_sizes,
                background_degree_max: args.background_degree_max,
                seed: args.seed,
                case_label: "case".into(),
                control_label: "control".into(),
            };
            replicate_study(&config, &methods, args.replicates, &pipeline)?
        }
    };

    let config_value = serde_json::json!({
        "replicates": args.replicates,
        "seed": args.seed,
        "methods": args.methods,
        "n_train": args.n_train,
        "n_test": args.n_test,
        "n_genes": args.n_genes,
        "set_sizes": args.set_sizes,
        "background_degree_max": args.background_degree_max,
        "planted": args.planted,
        "real_train": args.real_train,
        "real_test": args.real_test,
        "gmt": args.gmt,
        "ppi": args.ppi,
        "grid": args.grid,
        "k": args.k,
        "alpha": args.alpha,
        "b": args.b,
        "s0": args.s0,
        "normalization": args.normalization,
    });
    let mut report = RunReport::new("simulate", config_value);
    report.warnings = warnings;
    report.warnings.extend(summary.warnings.clone());
    report.replicates = Some(summary);
    let text = render::render(&report);
    write_artifacts(&args.out, &report, &text)
}

pub fn stability(args: StabilityArgs) -> Result<()> {
    let mut gene_lists = Vec::new();
    let mut pathway_lists = Vec::new();
    for path in &args.reports {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let report = RunReport::from_json(&text)?;
        let signature = report.signature.ok_or_else(|| {
            Error::Config(format!("report {} holds no signature", path.display()))
        })?;
        let screened = report.screened.ok_or_else(|| {
            Error::Config(format!("report {} holds no screened sets", path.display()))
        })?;
        gene_lists.push(signature.gene_names());
        pathway_lists.push(screened.iter().map(|e| e.set_name.clone()).collect());
    }
    let stability = stability_over_lists(&gene_lists, &pathway_lists)?;

    let config_value = serde_json::json!({"reports": args.reports});
    let mut report = RunReport::new("stability", config_value);
    report.stability = Some(stability);
    let text = render::render(&report);
    write_artifacts(&args.out, &report, &text)
}

pub fn weights(args: WeightsArgs) -> Result<()> {
    let mut warnings = Vec::new();
    let (edges, edge_report) = parse_edges(&args.ppi, args.ppi_header)?;
    if edge_report.self_loops > 0 {
        warnings.push(format!("{} self-loop edge line(s) ignored", edge_report.self_loops));
    }

    let gmt = match &args.gmt {
        Some(path) => {
            let (gmt, gmt_warnings) = parse_gmt(path)?;
            warnings.extend(gmt_warnings);
            Some(gmt)
        }
        None => None,
    };

    let universe: Vec<String> = if let Some(path) = &args.expression {
        parse_expression_matrix(path)?.gene_ids().to_vec()
    } else if let Some(gmt) = &gmt {
        gmt.universe()
    } else {
        let mut genes: Vec<String> = edges
            .iter()
            .flat_map(|(a, b)| [a.clone(), b.clone()])
            .collect();
        genes.sort_unstable();
        genes.dedup();
        genes
    };

    let (graph, build) = ConnectivityGraph::build(&edges, &universe)?;
    if build.dropped_edges > 0 {
        warnings.push(format!(
            "{} edge(s) dropped (endpoint outside the gene universe)",
            build.dropped_edges
        ));
    }
    if build.merged_duplicates > 0 {
        warnings.push(format!("{} duplicate edge(s) merged", build.merged_duplicates));
    }
    let weight_vector = connectivity_weights::<f64>(&graph);
    let spearman = match &gmt {
        Some(gmt) => Some(setcount_vs_connectivity(gmt, &weight_vector)?),
        None => None,
    };

    let weight_report = WeightReport {
        n_genes: graph.n_genes(),
        n_edges: graph.n_edges(),
        dropped_edges: build.dropped_edges,
        merged_duplicates: build.merged_duplicates,
        self_loops: edge_report.self_loops,
        setcount_spearman: spearman,
        weights: weight_vector
            .gene_ids()
            .iter()
            .zip(weight_vector.values())
            .map(|(gene, w)| GeneWeight {
                gene: gene.clone(),
                weight: *w,
            })
            .collect(),
    };

    let config_value = serde_json::json!({
        "ppi": args.ppi,
        "ppi_header": args.ppi_header,
        "gmt": args.gmt,
        "expression": args.expression,
    });
    let mut report = RunReport::new("weights", config_value);
    report.warnings = warnings;
    report.weights = Some(weight_report);
    let text = render::render(&report);
    write_artifacts(&args.out, &report, &text)
}
