use std::collections::BTreeMap;
use std::fmt::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{Federation, WorkloadQuery};
use crate::query::Query;

/// A named federation configuration under test.
pub struct Variant {
    pub name: String,
    pub federation: Federation,
}

/// One selection measured on one query.
#[derive(Debug, Clone, Serialize)]
pub struct QueryRow {
    pub variant: String,
    pub query: String,
    pub group: String,
    pub mean_ms: f64,
    pub stddev_ms: f64,
    /// Distinct sources selected for any pattern.
    pub selected: usize,
    /// Sources per pattern, by pattern position.
    pub per_pattern: Vec<Vec<String>>,
    /// Distinct sources the oracle finds relevant.
    pub optimal: usize,
    pub sound: bool,
    pub error: Option<String>,
}

/// Rows of one variant and one query group, aggregated.
#[derive(Debug, Clone, Serialize)]
pub struct TemplateRow {
    pub variant: String,
    pub group: String,
    pub instances: usize,
    pub mean_ms: f64,
    pub stddev_ms: f64,
    pub mean_selected: f64,
    pub min_selected: usize,
    pub max_selected: usize,
    pub mean_optimal: f64,
    pub all_sound: bool,
    pub errors: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub repetitions: usize,
    pub rows: Vec<QueryRow>,
    pub groups: Vec<TemplateRow>,
}

fn mean_stddev(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn measure(v: &Variant, name: &str, group: &str, q: &Query, repetitions: usize) -> QueryRow {
    let mut row = QueryRow {
        variant: v.name.clone(),
        query: name.to_string(),
        group: group.to_string(),
        mean_ms: 0.0,
        stddev_ms: 0.0,
        selected: 0,
        per_pattern: Vec::new(),
        optimal: 0,
        sound: false,
        error: None,
    };
    let mut times = Vec::with_capacity(repetitions);
    let mut sigma = None;
    for _ in 0..repetitions.max(1) {
        let start = Instant::now();
        let r = v.federation.select(q);
        times.push(start.elapsed().as_secs_f64() * 1e3);
        match r {
            Ok(s) => sigma = Some(s),
            Err(e) => {
                row.error = Some(e.to_string());
                return row;
            }
        }
    }
    let sigma = sigma.expect("at least one repetition");
    (row.mean_ms, row.stddev_ms) = mean_stddev(&times);
    row.selected = sigma.distinct_sources().len();
    row.per_pattern = sigma.sets().iter().map(|s| s.iter().cloned().collect()).collect();
    match v.federation.verdict(q, &sigma) {
        Ok(verdict) => {
            row.optimal = verdict.relevant.distinct_sources().len();
            row.sound = verdict.sound();
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Times selection for every variant and query, checks each selection
/// against the oracle and aggregates per query group. `jobs` caps the
/// worker threads; rows come back in variant-major, query order.
pub fn run_benchmark(variants: &[Variant], workload: &[WorkloadQuery], repetitions: usize, jobs: Option<usize>) -> BenchReport {
    let cells: Vec<(&Variant, &WorkloadQuery)> =
        variants.iter().flat_map(|v| workload.iter().map(move |q| (v, q))).collect();
    let run = || -> Vec<QueryRow> {
        cells
            .par_iter()
            .map(|(v, q)| {
                let group = q.template.map_or_else(|| "file".to_string(), |t| t.to_string());
                measure(v, &q.name, &group, &q.query, repetitions)
            })
            .collect()
    };
    let rows = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map(|pool| pool.install(run))
            .unwrap_or_else(|_| run()),
        None => run(),
    };
    let groups = aggregate(&rows, variants);
    BenchReport { repetitions: repetitions.max(1), rows, groups }
}

fn aggregate(rows: &[QueryRow], variants: &[Variant]) -> Vec<TemplateRow> {
    let mut by: BTreeMap<(usize, &str), Vec<&QueryRow>> = BTreeMap::new();
    for r in rows {
        let vi = variants.iter().position(|v| v.name == r.variant).unwrap_or(0);
        by.entry((vi, r.group.as_str())).or_default().push(r);
    }
    by.into_iter()
        .map(|((_, group), rs)| {
            let ok: Vec<&&QueryRow> = rs.iter().filter(|r| r.error.is_none()).collect();
            let means: Vec<f64> = ok.iter().map(|r| r.mean_ms).collect();
            let (mean_ms, stddev_ms) = mean_stddev(&means);
            let sel: Vec<usize> = ok.iter().map(|r| r.selected).collect();
            let n = ok.len().max(1) as f64;
            TemplateRow {
                variant: rs[0].variant.clone(),
                group: group.to_string(),
                instances: rs.len(),
                mean_ms,
                stddev_ms,
                mean_selected: sel.iter().sum::<usize>() as f64 / n,
                min_selected: sel.iter().copied().min().unwrap_or(0),
                max_selected: sel.iter().copied().max().unwrap_or(0),
                mean_optimal: ok.iter().map(|r| r.optimal).sum::<usize>() as f64 / n,
                all_sound: ok.len() == rs.len() && ok.iter().all(|r| r.sound),
                errors: rs.len() - ok.len(),
            }
        })
        .collect()
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned text table of the per-group aggregates.
    pub fn to_table(&self) -> String {
        let header = ["variant", "query", "n", "time ms", "selected", "min", "max", "optimal", "sound"];
        let mut lines: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        for g in &self.groups {
            lines.push(vec![
                g.variant.clone(),
                g.group.clone(),
                g.instances.to_string(),
                format!("{:.3} ± {:.3}", g.mean_ms, g.stddev_ms),
                format!("{:.2}", g.mean_selected),
                g.min_selected.to_string(),
                g.max_selected.to_string(),
                format!("{:.2}", g.mean_optimal),
                if g.all_sound { "yes".into() } else { format!("NO ({} errors)", g.errors) },
            ]);
        }
        let widths: Vec<usize> =
            (0..header.len()).map(|c| lines.iter().map(|l| l[c].chars().count()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for l in &lines {
            let cells: Vec<String> = l.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect();
            writeln!(out, "{}", cells.join("  ").trim_end()).unwrap();
        }
        out
    }
}
