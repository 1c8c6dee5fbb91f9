//! File-format parsers: GMT gene sets, TSV expression matrices and labels,
//! and two-column interaction edge lists. Every parser rejects malformed
//! input with a line-addressed error; nothing is silently coerced.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::data::{ExpressionDataset, ExpressionMatrix, GeneSet, GeneSetCollection};
use crate::error::{Error, Result};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Parse a GMT file: one set per line as
/// `name<TAB>description<TAB>gene1<TAB>gene2...`. The description is
/// ignored. Duplicate genes within a line are dropped with a warning;
/// duplicate set names are an error.
pub fn parse_gmt(path: impl AsRef<Path>) -> Result<(GeneSetCollection, Vec<String>)> {
    let path = path.as_ref();
    let content = read(path)?;
    let mut warnings = Vec::new();
    let mut sets = Vec::new();
    let mut names: HashSet<String> = HashSet::new();
    for (i, line) in content.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected name, description, and at least one gene; found {} field(s)", fields.len()),
            ));
        }
        let name = fields[0].to_string();
        if name.is_empty() {
            return Err(parse_err(path, lineno, "empty set name"));
        }
        if !names.insert(name.clone()) {
            return Err(parse_err(path, lineno, format!("duplicate set name '{name}'")));
        }
        let mut genes = Vec::new();
        let mut seen = HashSet::new();
        let mut dupes = 0usize;
        for g in &fields[2..] {
            if g.is_empty() {
                continue;
            }
            if seen.insert(*g) {
                genes.push(g.to_string());
            } else {
                dupes += 1;
            }
        }
        if genes.is_empty() {
            return Err(parse_err(path, lineno, format!("set '{name}' has no genes")));
        }
        if dupes > 0 {
            warnings.push(format!(
                "{}:{lineno}: {dupes} duplicate gene(s) in set '{name}' removed",
                path.display()
            ));
        }
        sets.push(GeneSet { name, genes });
    }
    if sets.is_empty() {
        warnings.push(format!("{}: no gene sets found", path.display()));
    }
    let collection = GeneSetCollection::new(sets, path.display().to_string())?;
    Ok((collection, warnings))
}

/// Parse an expression TSV: a header row of sample identifiers (first
/// column is the gene-id column name), then one row per gene. Missing or
/// non-numeric cells are parse errors with their coordinates.
pub fn parse_expression_matrix(path: impl AsRef<Path>) -> Result<ExpressionMatrix<f64>> {
    let path = path.as_ref();
    let content = read(path)?;
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty expression file"))?;
    let header_fields: Vec<&str> = header.split('\t').collect();
    if header_fields.len() < 2 {
        return Err(parse_err(path, 1, "header must list at least one sample"));
    }
    let sample_ids: Vec<String> = header_fields[1..].iter().map(|s| s.to_string()).collect();
    {
        let mut seen = HashSet::new();
        for s in &sample_ids {
            if !seen.insert(s.as_str()) {
                return Err(parse_err(path, 1, format!("duplicate sample id '{s}'")));
            }
        }
    }
    let mut gene_ids = Vec::new();
    let mut seen_genes: HashSet<String> = HashSet::new();
    let mut values = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != sample_ids.len() + 1 {
            return Err(parse_err(
                path,
                lineno,
                format!(
                    "expected {} columns, found {}",
                    sample_ids.len() + 1,
                    fields.len()
                ),
            ));
        }
        let gene = fields[0].to_string();
        if !seen_genes.insert(gene.clone()) {
            return Err(parse_err(path, lineno, format!("duplicate gene id '{gene}'")));
        }
        for (col, cell) in fields[1..].iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                parse_err(
                    path,
                    lineno,
                    format!(
                        "non-numeric value '{cell}' for gene '{gene}', sample '{}' (column {})",
                        sample_ids[col],
                        col + 2
                    ),
                )
            })?;
            if !v.is_finite() {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("non-finite value '{cell}' for gene '{gene}', sample '{}'", sample_ids[col]),
                ));
            }
            values.push(v);
        }
        gene_ids.push(gene);
    }
    if gene_ids.is_empty() {
        return Err(parse_err(path, 1, "expression file holds no gene rows"));
    }
    ExpressionMatrix::new(gene_ids, sample_ids, values)
}

/// Parse a two-column label TSV (`sample<TAB>class`).
pub fn parse_labels(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let content = read(path)?;
    let mut out = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    for (i, line) in content.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected 2 columns (sample, class), found {}", fields.len()),
            ));
        }
        let sample = fields[0].to_string();
        if !seen.insert(sample.clone()) {
            return Err(parse_err(path, lineno, format!("duplicate sample id '{sample}'")));
        }
        out.push((sample, fields[1].to_string()));
    }
    if out.is_empty() {
        return Err(parse_err(path, 1, "label file holds no rows"));
    }
    Ok(out)
}

/// Join an expression matrix with its label file on sample id. Samples
/// present in exactly one of the two files are an error naming them.
pub fn parse_expression(
    matrix_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<ExpressionDataset<f64>> {
    let matrix = parse_expression_matrix(matrix_path)?;
    let label_pairs = parse_labels(labels_path)?;
    join_labels(matrix, &label_pairs)
}

/// Align per-sample labels with a matrix's sample order.
pub fn join_labels(
    matrix: ExpressionMatrix<f64>,
    label_pairs: &[(String, String)],
) -> Result<ExpressionDataset<f64>> {
    let by_sample: HashMap<&str, &str> = label_pairs
        .iter()
        .map(|(s, c)| (s.as_str(), c.as_str()))
        .collect();
    let mut missing_labels = Vec::new();
    let mut labels = Vec::with_capacity(matrix.n_samples());
    for s in matrix.sample_ids() {
        match by_sample.get(s.as_str()) {
            Some(c) => labels.push(c.to_string()),
            None => missing_labels.push(s.clone()),
        }
    }
    let matrix_samples: HashSet<&str> = matrix.sample_ids().iter().map(|s| s.as_str()).collect();
    let extra_labels: Vec<String> = label_pairs
        .iter()
        .filter(|(s, _)| !matrix_samples.contains(s.as_str()))
        .map(|(s, _)| s.clone())
        .collect();
    if !missing_labels.is_empty() || !extra_labels.is_empty() {
        let mut parts = Vec::new();
        if !missing_labels.is_empty() {
            parts.push(format!("samples without labels: {}", missing_labels.join(", ")));
        }
        if !extra_labels.is_empty() {
            parts.push(format!("labeled samples not in the matrix: {}", extra_labels.join(", ")));
        }
        return Err(Error::InvalidInput(parts.join("; ")));
    }
    ExpressionDataset::new(matrix, labels)
}

/// Counts reported by the edge-list parser.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeFileReport {
    /// Self-loop lines dropped (the unit diagonal is applied at weight time).
    pub self_loops: usize,
}

/// Parse a two-column interaction edge list. Duplicate edges pass through
/// (the graph builder merges and counts them); self-loops are dropped here.
pub fn parse_edges(
    path: impl AsRef<Path>,
    has_header: bool,
) -> Result<(Vec<(String, String)>, EdgeFileReport)> {
    let path = path.as_ref();
    let content = read(path)?;
    let mut report = EdgeFileReport::default();
    let mut edges = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let lineno = i + 1;
        if has_header && lineno == 1 {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected 2 columns (geneA, geneB), found {}", fields.len()),
            ));
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(parse_err(path, lineno, "edge with an empty endpoint"));
        }
        if fields[0] == fields[1] {
            report.self_loops += 1;
            continue;
        }
        edges.push((fields[0].to_string(), fields[1].to_string()));
    }
    Ok((edges, report))
}
