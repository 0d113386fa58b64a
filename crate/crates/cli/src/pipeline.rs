//! The three design stages as pure functions over code records.
//!
//! Every stage keeps its input order, so outputs depend only on the
//! configuration and never on the thread count.

use std::collections::{BTreeMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use cpc_core::cpc::{build_circuit, encoder_gates, EmissionOrder};
use cpc_core::native::{lower_routed, simplify, verify_native_equivalence, weighted_cost, CostWeights, GateSeq};
use cpc_core::route::{route_nearest_neighbor, Layout, RoutedCircuit, SwapPolicy};
use cpc_core::search::{
    enumerate_indices, random_search, records_for, summarize, CanonicalTable, CodeRecord, Histogram, Metric, SearchSpec,
    Summary,
};
use cpc_core::{AdjacencyTriple, ErrorSet, ValidityMode};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub k: usize,
    pub m: usize,
    pub errset: ErrorSet,
    pub mode: ValidityMode,
    pub order: EmissionOrder,
    pub layout: Layout,
    pub policy: SwapPolicy,
    pub weights: CostWeights,
    pub threads: Option<usize>,
    pub seed: u64,
    pub range: Option<(u64, u64)>,
}

impl PipelineConfig {
    pub fn new(n: usize, k: usize) -> CliResult<Self> {
        if k == 0 || k >= n || n > 64 {
            return Err(CliError::Config(format!("need 0 < k < n <= 64, got n={n}, k={k}")));
        }
        let m = n - k;
        Ok(Self {
            k,
            m,
            errset: ErrorSet::Xz,
            mode: ValidityMode::Correct,
            order: EmissionOrder::RowMajor,
            layout: Layout::identity(n),
            policy: SwapPolicy::Persistent,
            weights: CostWeights::unit(),
            threads: None,
            seed: 0,
            range: None,
        })
    }

    pub fn n(&self) -> usize {
        self.k + self.m
    }

    /// Runs `f` on a pool of the configured size.
    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> CliResult<T> {
        match self.threads {
            None => Ok(f()),
            Some(t) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build()
                    .map_err(|e| CliError::Config(format!("cannot start {t} threads: {e}")))?;
                Ok(pool.install(f))
            }
        }
    }

    fn check_shape(&self, r: &CodeRecord) -> CliResult<()> {
        if (r.code.k(), r.code.m()) != (self.k, self.m) {
            return Err(CliError::Data(format!(
                "record {} has shape ({},{}), expected ({},{})",
                r.index,
                r.code.k(),
                r.code.m(),
                self.k,
                self.m
            )));
        }
        Ok(())
    }
}

/// Parses `a:b` into a half-open range.
pub fn parse_range(s: &str) -> CliResult<(u64, u64)> {
    let bad = || CliError::Config(format!("range {s:?} is not of the form a:b"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if a > b {
        return Err(CliError::Config(format!("range {s:?} is reversed")));
    }
    Ok((a, b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutput {
    pub records: Vec<CodeRecord>,
    pub summary: Summary,
}

/// Exhaustive search over the configured range, or seeded random sampling
/// when `samples` is given.
pub fn search(cfg: &PipelineConfig, samples: Option<u64>) -> CliResult<SearchOutput> {
    cfg.install(|| {
        let (indices, checked) = match samples {
            Some(s) => {
                let mut idx = random_search(cfg.k, cfg.m, cfg.errset, cfg.mode, s, cfg.seed)?;
                idx.sort_unstable();
                idx.dedup();
                (idx, s)
            }
            None => {
                let mut spec = SearchSpec::full(cfg.k, cfg.m, cfg.errset, cfg.mode)?;
                if let Some((lo, hi)) = cfg.range {
                    if hi > spec.hi {
                        return Err(CliError::Config(format!("range end {hi} exceeds the index space {}", spec.hi)));
                    }
                    spec = spec.with_range(lo, hi);
                }
                (enumerate_indices(&spec)?, spec.hi - spec.lo)
            }
        };
        let records = records_for(cfg.k, cfg.m, &indices)?;
        let summary = summarize(checked, &records);
        Ok(SearchOutput { records, summary })
    })?
}

pub fn route_one(cfg: &PipelineConfig, code: &AdjacencyTriple) -> CliResult<RoutedCircuit> {
    Ok(route_nearest_neighbor(&encoder_gates(code, cfg.order), &cfg.layout, cfg.policy)?)
}

/// Routed, lowered and simplified forms of one code.
pub struct Compiled {
    pub routed: RoutedCircuit,
    pub lowered: GateSeq,
    pub simplified: GateSeq,
}

pub fn compile_one(cfg: &PipelineConfig, code: &AdjacencyTriple) -> CliResult<Compiled> {
    let routed = route_one(cfg, code)?;
    let lowered = lower_routed(&routed, &code.roles())?;
    let simplified = simplify(&lowered, cfg.errset, cfg.mode);
    Ok(Compiled { routed, lowered, simplified })
}

/// Fills `swap_count` on every record.
pub fn route_records(cfg: &PipelineConfig, records: &mut [CodeRecord]) -> CliResult<()> {
    records.iter().try_for_each(|r| cfg.check_shape(r))?;
    cfg.install(|| {
        records.par_iter_mut().try_for_each(|r| {
            r.swap_count = Some(route_one(cfg, &r.code)?.swap_count);
            Ok(())
        })
    })?
}

/// Fills `swap_count`, simplified `local_count`, `l_total` and `r_weighted`.
/// With `check`, also returns the indices that fail the equivalence check.
pub fn compile_records(cfg: &PipelineConfig, records: &mut [CodeRecord], check: bool) -> CliResult<Vec<u64>> {
    records.iter().try_for_each(|r| cfg.check_shape(r))?;
    let failures = cfg.install(|| {
        records
            .par_iter_mut()
            .map(|r| {
                let c = compile_one(cfg, &r.code)?;
                let s = &c.simplified;
                r.swap_count = Some(c.routed.swap_count);
                r.local_count = Some(s.local_gate_count());
                r.l_total = Some(s.total_length());
                r.r_weighted =
                    Some(weighted_cost((c.routed.cpc_count, c.routed.swap_count, s.local_gate_count()), &cfg.weights)?);
                let ok = !check
                    || verify_native_equivalence(&build_circuit(&r.code, cfg.order), s, cfg.errset, cfg.mode);
                Ok((!ok).then_some(r.index))
            })
            .collect::<CliResult<Vec<Option<u64>>>>()
    })??;
    Ok(failures.into_iter().flatten().collect())
}

/// Recomputes `r_weighted` from stored counts.
pub fn reweight(records: &mut [CodeRecord], w: &CostWeights) -> CliResult<()> {
    for r in records {
        if let (Some(swap), Some(local)) = (r.swap_count, r.local_count) {
            r.r_weighted = Some(weighted_cost((r.cpc_count, swap, local), w)?);
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub min: u32,
    pub count_at_min: u64,
    pub median: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub index: u64,
    pub code: AdjacencyTriple,
    pub cpc: u32,
    pub swap: u32,
    pub local: u32,
    pub l_total: u32,
    pub r_weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub records: usize,
    pub weights: CostWeights,
    pub layout: String,
    pub metrics: BTreeMap<String, MetricSummary>,
    pub classes: usize,
    pub classes_at_min_cpc: usize,
    pub optimum: Option<Optimum>,
}

pub fn metric_histogram(records: &[CodeRecord], metric: Metric) -> Option<Histogram> {
    let values: Option<Vec<u32>> = records.iter().map(|r| metric.of(r)).collect();
    values.filter(|v| !v.is_empty()).map(|v| Histogram::from_values(metric.name(), v))
}

/// Lowest `r_weighted`, ties to the smaller index.
pub fn optimum(records: &[CodeRecord]) -> Option<Optimum> {
    records
        .iter()
        .filter_map(|r| {
            Some(Optimum {
                index: r.index,
                code: r.code.clone(),
                cpc: r.cpc_count,
                swap: r.swap_count?,
                local: r.local_count?,
                l_total: r.l_total?,
                r_weighted: r.r_weighted?,
            })
        })
        .min_by(|a, b| a.r_weighted.total_cmp(&b.r_weighted).then(a.index.cmp(&b.index)))
}

pub fn report(cfg: &PipelineConfig, records: &[CodeRecord]) -> Report {
    let mut metrics = BTreeMap::new();
    for m in [Metric::CpcCount, Metric::SwapCount, Metric::TwoQubitCount, Metric::LocalCount, Metric::LTotal] {
        if let Some(h) = metric_histogram(records, m) {
            let min = h.min().expect("nonempty");
            metrics.insert(
                m.name().to_string(),
                MetricSummary { min, count_at_min: h.count_at(min), median: h.median().expect("nonempty") },
            );
        }
    }
    let min_cpc = records.iter().map(|r| r.cpc_count).min();
    let classes: HashSet<u64> = records.iter().map(|r| r.canonical_key).collect();
    let at_min: HashSet<u64> =
        records.iter().filter(|r| Some(r.cpc_count) == min_cpc).map(|r| r.canonical_key).collect();
    Report {
        records: records.len(),
        weights: cfg.weights,
        layout: cfg.layout.label(cfg.k),
        metrics,
        classes: classes.len(),
        classes_at_min_cpc: at_min.len(),
        optimum: optimum(records),
    }
}

/// Recomputed canonical keys; returns how many stored keys disagreed.
pub fn canonicalize(cfg: &PipelineConfig, records: &mut [CodeRecord]) -> CliResult<usize> {
    records.iter().try_for_each(|r| cfg.check_shape(r))?;
    let table = CanonicalTable::new(cfg.k, cfg.m);
    cfg.install(|| {
        records
            .par_iter_mut()
            .map(|r| {
                let key = table.key(r.code.to_index());
                let changed = usize::from(key != r.canonical_key);
                r.canonical_key = key;
                r.index = r.code.to_index();
                changed
            })
            .sum()
    })
}
