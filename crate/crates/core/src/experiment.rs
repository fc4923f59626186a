//! Stabilization records and parameter sweeps.
//!
//! CSV column order is fixed:
//! `n,family,seed,variant,iterations,wl1_iterations,vertex_classes_final,edge_classes_final,log_ratio,class_bound_ratio,wall_time_ms`.
//! `log_ratio` is `iterations·log₂(n)/n²`; `class_bound_ratio` is
//! `iterations/(2ᵗ·n)` for bounded-class instances and empty otherwise.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{Family, FamilySpec};
use crate::graph::ColoredGraph;
use crate::refine::{stabilize, wl1_stabilize, RefinementVariant};

pub const CSV_HEADER: &str = "n,family,seed,variant,iterations,wl1_iterations,vertex_classes_final,edge_classes_final,log_ratio,class_bound_ratio,wall_time_ms";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    /// Family spec string, or the input file name.
    pub spec: String,
    pub family: String,
    pub seed: u64,
    pub variant: RefinementVariant,
    pub n: usize,
    pub iterations: usize,
    pub wl1_iterations: usize,
    pub vertex_classes_final: usize,
    pub edge_classes_final: usize,
    pub wall_time_ms: f64,
    pub log_ratio: f64,
    pub class_bound_ratio: Option<f64>,
}

impl ExperimentRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{:.6},{},{:.3}",
            self.n,
            self.family,
            self.seed,
            self.variant,
            self.iterations,
            self.wl1_iterations,
            self.vertex_classes_final,
            self.edge_classes_final,
            self.log_ratio,
            self.class_bound_ratio.map(|r| format!("{r:.6}")).unwrap_or_default(),
            self.wall_time_ms
        )
    }
}

pub fn log_ratio(iterations: usize, n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    iterations as f64 * (n as f64).log2() / (n * n) as f64
}

pub fn class_bound_ratio(iterations: usize, n: usize, t: usize) -> f64 {
    iterations as f64 / (2f64.powi(t as i32) * n.max(1) as f64)
}

/// Stabilizes `g` and measures it. `class_bound` is the `t` of bounded-class inputs.
pub fn measure(
    g: &ColoredGraph,
    spec: String,
    family: String,
    seed: u64,
    variant: RefinementVariant,
    class_bound: Option<usize>,
) -> Result<ExperimentRecord> {
    let n = g.n();
    let start = Instant::now();
    let result = stabilize(g, variant)?;
    let wall_time_ms = start.elapsed().as_secs_f64() * 1000.0;
    let wl1 = wl1_stabilize(g);
    let (vertex_classes_final, edge_classes_final) = result.stable().class_counts();
    let iterations = result.iterations;
    if iterations > (n * n).saturating_sub(1) {
        return Err(Error::Inconsistent(format!("{iterations} iterations on {n} vertices")));
    }
    Ok(ExperimentRecord {
        spec,
        family,
        seed,
        variant,
        n,
        iterations,
        wl1_iterations: wl1.iterations,
        vertex_classes_final,
        edge_classes_final,
        wall_time_ms,
        log_ratio: log_ratio(iterations, n),
        class_bound_ratio: class_bound.map(|t| class_bound_ratio(iterations, n, t)),
    })
}

pub fn measure_spec(spec: &FamilySpec, variant: RefinementVariant) -> Result<ExperimentRecord> {
    let g = spec.generate()?;
    let class_bound = match spec.family {
        Family::BoundedColorClass { t, .. } => Some(t),
        _ => None,
    };
    measure(&g, spec.to_string(), spec.name().to_string(), spec.seed, variant, class_bound)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Template; its size parameter is replaced by each entry of `ns`.
    pub family: Family,
    pub ns: Vec<usize>,
    pub variant: RefinementVariant,
    pub repetitions: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub n: usize,
    pub family: String,
    pub instances: usize,
    pub max_iterations: usize,
    pub mean_iterations: f64,
    pub mean_log_ratio: f64,
    pub mean_class_bound_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedInstance {
    pub spec: String,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub records: Vec<ExperimentRecord>,
    pub aggregates: Vec<AggregateRow>,
    pub skipped: Vec<SkippedInstance>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    fn aggregate(records: &[ExperimentRecord]) -> Vec<AggregateRow> {
        let mut rows: Vec<AggregateRow> = Vec::new();
        for group in records.chunk_by(|a, b| a.n == b.n && a.family == b.family) {
            let k = group.len() as f64;
            let bounded: Vec<f64> = group.iter().filter_map(|r| r.class_bound_ratio).collect();
            rows.push(AggregateRow {
                n: group[0].n,
                family: group[0].family.clone(),
                instances: group.len(),
                max_iterations: group.iter().map(|r| r.iterations).max().unwrap_or(0),
                mean_iterations: group.iter().map(|r| r.iterations as f64).sum::<f64>() / k,
                mean_log_ratio: group.iter().map(|r| r.log_ratio).sum::<f64>() / k,
                mean_class_bound_ratio: (!bounded.is_empty()).then(|| bounded.iter().sum::<f64>() / bounded.len() as f64),
            });
        }
        rows
    }
}

/// Instances are `(n, seed + repetition)` for every `n` and repetition,
/// evaluated in parallel and reported sorted by `(n, family, seed)`.
pub fn sweep(config: &SweepConfig) -> Result<SweepReport> {
    if config.ns.is_empty() || config.repetitions == 0 {
        return Err(Error::InvalidParameter("empty sweep range".into()));
    }
    let specs: Vec<FamilySpec> = config
        .ns
        .iter()
        .flat_map(|&n| {
            (0..config.repetitions as u64).map(move |rep| FamilySpec::new(config.family.with_n(n), config.seed + rep))
        })
        .collect();
    let outcomes: Vec<_> = specs
        .par_iter()
        .map(|spec| (spec, measure_spec(spec, config.variant)))
        .collect();
    let mut report = SweepReport::default();
    for (spec, outcome) in outcomes {
        match outcome {
            Ok(r) => report.records.push(r),
            Err(e) => report.skipped.push(SkippedInstance {
                spec: spec.to_string(),
                error: e.to_string(),
            }),
        }
    }
    report
        .records
        .sort_by(|a, b| (a.n, &a.family, a.seed).cmp(&(b.n, &b.family, b.seed)));
    report.aggregates = SweepReport::aggregate(&report.records);
    Ok(report)
}
