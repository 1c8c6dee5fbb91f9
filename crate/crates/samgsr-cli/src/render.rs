//! Aligned plain-text tables for run reports.

use samgsr::report::RunReport;

fn table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            if cell.len() > widths[i] {
                widths[i] = cell.len();
            }
        }
    }
    let mut out = String::new();
    let render_row = |cells: &[String], widths: &[usize]| -> String {
        let mut line = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            line.push_str(cell);
            for _ in cell.len()..widths[i] {
                line.push(' ');
            }
        }
        line.trim_end().to_string()
    };
    let header_cells: Vec<String> = headers.iter().map(|h| h.to_string()).collect();
    out.push_str(&render_row(&header_cells, &widths));
    out.push('\n');
    let total: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    out.push_str(&"-".repeat(total));
    out.push('\n');
    for row in rows {
        out.push_str(&render_row(row, &widths));
        out.push('\n');
    }
    out
}

fn fmt(v: f64) -> String {
    format!("{v:.4}")
}

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

pub fn render(report: &RunReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "samgsr {} :: {} (config {})\n\n",
        report.software_version, report.command, report.config_fingerprint
    ));

    if let Some(pvalues) = &report.pvalues {
        out.push_str(&format!(
            "Gene-set permutation test ({} mode)\n",
            if pvalues.exhaustive { "exhaustive" } else { "sampled" }
        ));
        let rows: Vec<Vec<String>> = pvalues
            .entries
            .iter()
            .map(|e| {
                vec![
                    e.set_name.clone(),
                    format!("{:.6}", e.observed),
                    format!("{:.6}", e.p),
                    e.b_used.to_string(),
                ]
            })
            .collect();
        out.push_str(&table(&["SET", "OBSERVED", "P", "B"], &rows));
        out.push('\n');
    }

    if let Some(screened) = &report.screened {
        if screened.is_empty() {
            out.push_str("No gene set passed screening.\n\n");
        } else {
            out.push_str("Screened sets (ascending p)\n");
            let rows: Vec<Vec<String>> = screened
                .iter()
                .map(|e| vec![e.set_name.clone(), format!("{:.6}", e.p)])
                .collect();
            out.push_str(&table(&["SET", "P"], &rows));
            out.push('\n');
        }
    }

    if let Some(traces) = &report.traces {
        if !traces.is_empty() {
            out.push_str("Reductions\n");
            let rows: Vec<Vec<String>> = traces
                .iter()
                .map(|t| {
                    vec![
                        t.set_name.clone(),
                        t.ordered_genes.len().to_string(),
                        t.stop_k.to_string(),
                        if t.exhausted { "yes" } else { "no" }.to_string(),
                        t.core().join(","),
                    ]
                })
                .collect();
            out.push_str(&table(&["SET", "SIZE", "STOP_K", "EXHAUSTED", "CORE"], &rows));
            out.push('\n');
        }
    }

    if let Some(signature) = &report.signature {
        out.push_str(&format!("Signature ({} genes)\n", signature.genes.len()));
        if !signature.genes.is_empty() {
            let rows: Vec<Vec<String>> = signature
                .genes
                .iter()
                .map(|g| {
                    vec![
                        g.gene.clone(),
                        format!("{:+.5}", g.statistic),
                        g.sources
                            .iter()
                            .map(|s| format!("{}#{}", s.set_name, s.rank))
                            .collect::<Vec<_>>()
                            .join(","),
                    ]
                })
                .collect();
            out.push_str(&table(&["GENE", "STAT", "SOURCES"], &rows));
        }
        out.push('\n');
    }

    if let Some(tuning) = &report.tuning {
        out.push_str("Threshold tuning\n");
        let rows: Vec<Vec<String>> = tuning
            .grid
            .iter()
            .zip(&tuning.cv_error)
            .map(|(c, e)| {
                let marker = if *c == tuning.chosen { "*" } else { "" };
                vec![format!("{c:.3}{marker}"), pct(*e)]
            })
            .collect();
        out.push_str(&table(&["C_STAR", "CV ERROR(%)"], &rows));
        out.push_str(&format!("chosen c_star = {:.3}\n\n", tuning.chosen));
    }

    if let Some(evals) = &report.evals {
        out.push_str("Performance\n");
        let rows: Vec<Vec<String>> = evals
            .iter()
            .map(|e| {
                vec![
                    e.name.clone(),
                    e.eval.n_samples.to_string(),
                    pct(e.eval.error_rate),
                    fmt(e.eval.gbs),
                    fmt(e.eval.bcm),
                    fmt(e.eval.aupr),
                ]
            })
            .collect();
        out.push_str(&table(&["DATASET", "N", "ERROR(%)", "GBS", "BCM", "AUPR"], &rows));
        out.push('\n');
    }

    if let Some(stability) = &report.stability {
        out.push_str("Stability\n");
        let rows = vec![vec![
            stability.k.to_string(),
            fmt(stability.rand_gene),
            fmt(stability.rand_pathway),
        ]];
        out.push_str(&table(&["RUNS", "RAND(GENES)", "RAND(PATHWAYS)"], &rows));
        out.push('\n');
    }

    if let Some(summary) = &report.replicates {
        out.push_str(&format!("Replicate study (R = {})\n", summary.replicates));
        let mut headers: Vec<String> = vec!["METHOD (SIZE)".into()];
        if let Some(first) = summary.methods.first() {
            for p in &first.planted {
                headers.push(format!("{}(%)", p.gene));
            }
        }
        headers.extend(["ERROR(%)".to_string(), "GBS".into(), "BCM".into(), "AUPR".into()]);
        let header_refs: Vec<&str> = headers.iter().map(|h| h.as_str()).collect();
        let rows: Vec<Vec<String>> = summary
            .methods
            .iter()
            .map(|m| {
                let mut row = vec![format!("{} ({:.2})", m.method, m.mean_signature_size)];
                for p in &m.planted {
                    row.push(format!("{:.1}", p.selected_pct));
                }
                row.extend([
                    pct(m.mean_error),
                    fmt(m.mean_gbs),
                    fmt(m.mean_bcm),
                    fmt(m.mean_aupr),
                ]);
                row
            })
            .collect();
        out.push_str(&table(&header_refs, &rows));
        out.push('\n');
    }

    if let Some(weights) = &report.weights {
        out.push_str(&format!(
            "Connectivity weights: {} genes, {} edges\n",
            weights.n_genes, weights.n_edges
        ));
        if let Some(rho) = weights.setcount_spearman {
            out.push_str(&format!(
                "Spearman(set-membership count, weight) = {rho:.4}\n"
            ));
        }
        let mut top: Vec<_> = weights.weights.iter().collect();
        top.sort_by(|a, b| {
            b.weight
                .partial_cmp(&a.weight)
                .expect("weights are not NaN")
                .then_with(|| a.gene.cmp(&b.gene))
        });
        let rows: Vec<Vec<String>> = top
            .iter()
            .take(20)
            .map(|w| vec![w.gene.clone(), format!("{:.0}", w.weight)])
            .collect();
        out.push_str("Top weights\n");
        out.push_str(&table(&["GENE", "W"], &rows));
        out.push('\n');
    }

    if !report.warnings.is_empty() {
        out.push_str("Warnings\n");
        for w in &report.warnings {
            out.push_str(&format!("  - {w}\n"));
        }
        out.push('\n');
    }

    out
}
