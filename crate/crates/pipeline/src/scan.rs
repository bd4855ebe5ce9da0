//! Parallel, resumable width scans.

use crate::config::{NodePlan, ScanConfig};
use crate::dataset::{append, DatasetFile, DatasetRow, DATASET_FILE};
use crate::error::{IoContext, PipelineError, Result};
use btzone::asymptotics::normalize_width;
use btzone::maps::MapFamily;
use btzone::numerics::{log10_abs, log10_abs_complex, BigReal};
use btzone::splitting::{Node, SplittingConfig, WidthEstimate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

pub const RECORDS_FILE: &str = "records.jsonl";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub width: String,
    pub log10_width: f64,
    pub error_exponent: f64,
    pub log10_first_harmonic: f64,
    pub log10_gain: f64,
    pub slope_spread: f64,
    pub secant_steps: usize,
}

impl Estimate {
    fn new(w: &WidthEstimate, digits: u32) -> Self {
        Self {
            width: w.value.to_string_radix(10, Some(digits as usize)),
            log10_width: log10_abs(&w.value),
            error_exponent: w.error_exponent,
            log10_first_harmonic: log10_abs_complex(w.harmonics.first()),
            log10_gain: w.log10_strip_gain,
            slope_spread: w.slope_spread,
            secant_steps: w.frame.steps.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    Ok {
        row: DatasetRow,
        /// Working digits minus `|log10 width|` fell below the target.
        flagged: bool,
        delta: Option<f64>,
        real: Option<Estimate>,
        complex: Option<Estimate>,
        /// `log10 |Z_r - Z_c|` when both estimators ran.
        log10_method_gap: Option<f64>,
    },
    Failed {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub index: usize,
    pub x: String,
    pub main: String,
    pub digits: u32,
    pub seconds: f64,
    pub outcome: Outcome,
}

impl NodeRecord {
    pub fn is_ok(&self) -> bool {
        matches!(self.outcome, Outcome::Ok { .. })
    }
}

#[derive(Debug)]
pub struct ScanSummary {
    pub dataset: DatasetFile,
    /// Records of the nodes computed by this run, in node order.
    pub records: Vec<NodeRecord>,
    pub failed: usize,
    pub skipped: usize,
}

/// Widths for one node; every failure becomes a record, never a panic.
pub fn compute_node(plan: &NodePlan, family: &MapFamily, cfg: &ScanConfig) -> NodeRecord {
    let t = Instant::now();
    let ctx = &plan.ctx;
    let outcome = match node_outcome(plan, family, cfg) {
        Ok(o) => o,
        Err(e) => Outcome::Failed { reason: e.to_string() },
    };
    NodeRecord {
        index: plan.index,
        x: ctx.format(&plan.x),
        main: ctx.format(&plan.main),
        digits: ctx.digits(),
        seconds: t.elapsed().as_secs_f64(),
        outcome,
    }
}

fn node_outcome(plan: &NodePlan, family: &MapFamily, cfg: &ScanConfig) -> btzone::Result<Outcome> {
    let ctx = &plan.ctx;
    let family = family.adopt(ctx);
    let node = Node::new(&family, &plan.main, &plan.seed, ctx, &SplittingConfig::default())?;
    let real = if cfg.method.runs_real() {
        let frame = node.find_primary_homoclinic(&plan.seed, None)?;
        Some(node.width_real(&frame)?)
    } else {
        None
    };
    let complex = match &plan.delta {
        Some(delta) if cfg.method.runs_complex() => Some(node.width_complex(&plan.seed, delta)?),
        _ => None,
    };
    let best = real.as_ref().or(complex.as_ref()).expect("method runs at least one estimator");
    let s = normalize_width(&family, &plan.main, &best.value)?;
    let log_s = BigReal::with_val(ctx.bits(), s.ln_ref());
    let log10_width = log10_abs(&best.value);
    let gap = match (&real, &complex) {
        (Some(r), Some(c)) => Some(log10_abs(&BigReal::with_val(ctx.bits(), &r.value - &c.value))),
        _ => None,
    };
    let digits = ctx.digits();
    Ok(Outcome::Ok {
        row: DatasetRow {
            x: ctx.format(&plan.x),
            log_s: log_s.to_string_radix(10, Some(digits as usize)),
            width: best.value.to_string_radix(10, Some(digits as usize)),
            error_exponent: format!("{:.3}", best.error_exponent),
        },
        flagged: f64::from(digits) - log10_width.abs() < f64::from(cfg.digits_target),
        delta: plan.delta.as_ref().map(|d| d.to_f64()),
        real: real.as_ref().map(|w| Estimate::new(w, digits)),
        complex: complex.as_ref().map(|w| Estimate::new(w, digits)),
        log10_method_gap: gap,
    })
}

pub fn header_for(cfg: &ScanConfig, plans: &[NodePlan]) -> Vec<(String, String)> {
    let mut meta = vec![("family".to_string(), cfg.family.to_ascii_lowercase())];
    if let Some(g) = &cfg.gamma {
        meta.push(("gamma".into(), g.clone()));
    }
    let digits = plans.iter().map(|p| p.ctx.digits()).min().unwrap_or(0);
    meta.extend([
        ("digits".to_string(), digits.to_string()),
        ("guard".to_string(), cfg.guard.to_string()),
        ("method".to_string(), cfg.method.name().to_string()),
        ("range".to_string(), cfg.range.clone()),
        ("nodes".to_string(), cfg.nodes.to_string()),
        ("created".to_string(), cfg.created()),
    ]);
    meta
}

/// Appends finished nodes in node order, holding back results that arrive early.
struct Writer<'a> {
    dataset: &'a Path,
    records: &'a Path,
    order: Vec<usize>,
    next: usize,
    done: BTreeMap<usize, NodeRecord>,
    written: Vec<NodeRecord>,
}

impl Writer<'_> {
    fn push(&mut self, rec: NodeRecord) -> Result<()> {
        self.done.insert(rec.index, rec);
        while self.next < self.order.len() {
            let Some(rec) = self.done.remove(&self.order[self.next]) else { break };
            self.emit(rec)?;
            self.next += 1;
        }
        Ok(())
    }

    fn emit(&mut self, rec: NodeRecord) -> Result<()> {
        if let Outcome::Ok { row, .. } = &rec.outcome {
            append(self.dataset, &row.line())?;
        }
        let mut line = serde_json::to_string(&rec)?;
        line.push('\n');
        append(self.records, &line)?;
        self.written.push(rec);
        Ok(())
    }

    /// Emits whatever is left after an abort, still in node order.
    fn drain(&mut self) -> Result<()> {
        let rest: Vec<NodeRecord> = std::mem::take(&mut self.done).into_values().collect();
        for rec in rest {
            self.emit(rec)?;
        }
        Ok(())
    }
}

pub fn scan_widths(cfg: &ScanConfig) -> Result<ScanSummary> {
    let plans = cfg.plan()?;
    let family = cfg.family_at(&plans[0].ctx)?;
    fs::create_dir_all(&cfg.out).at(&cfg.out)?;
    let data_path = cfg.out.join(DATASET_FILE);
    let rec_path = cfg.out.join(RECORDS_FILE);
    let meta = header_for(cfg, &plans);
    let existing = if data_path.exists() {
        if !cfg.resume {
            return Err(PipelineError::Config(format!(
                "{} exists; pass --resume to continue it",
                data_path.display()
            )));
        }
        let f = DatasetFile::load_for_resume(&data_path)?;
        if f.meta != meta {
            return Err(PipelineError::Config(format!(
                "{} was written by a different configuration",
                data_path.display()
            )));
        }
        f
    } else {
        let f = DatasetFile { meta, rows: Vec::new() };
        f.store(&data_path)?;
        f
    };
    let have: HashSet<&str> = existing.rows.iter().map(|r| r.x.as_str()).collect();
    let pending: Vec<&NodePlan> = plans.iter().filter(|p| !have.contains(p.ctx.format(&p.x).as_str())).collect();
    let skipped = plans.len() - pending.len();

    let writer = Mutex::new(Writer {
        dataset: &data_path,
        records: &rec_path,
        order: pending.iter().map(|p| p.index).collect(),
        next: 0,
        done: BTreeMap::new(),
        written: Vec::new(),
    });
    let failed = AtomicUsize::new(0);
    let limit = plans.len() / 4;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))?;
    let io: Result<()> = pool.install(|| {
        pending.par_iter().try_for_each(|plan| {
            if failed.load(Ordering::SeqCst) > limit {
                return Ok(());
            }
            let rec = compute_node(plan, &family, cfg);
            if !rec.is_ok() {
                failed.fetch_add(1, Ordering::SeqCst);
            }
            writer.lock().expect("writer lock").push(rec)
        })
    });
    io?;
    let mut w = writer.into_inner().expect("writer lock");
    w.drain()?;
    let failed = failed.into_inner();

    let mut dataset = DatasetFile::load(&data_path)?;
    let ctx = &plans[0].ctx;
    let key = |r: &DatasetRow| ctx.parse(&r.x).map(|v| v.to_f64()).unwrap_or(f64::NAN);
    if dataset.rows.windows(2).any(|p| key(&p[0]) >= key(&p[1])) {
        // a resumed run filled gaps left by failed nodes
        let order: BTreeMap<String, usize> = plans.iter().map(|p| (p.ctx.format(&p.x), p.index)).collect();
        dataset.rows.sort_by_key(|r| order.get(&r.x).copied().unwrap_or(usize::MAX));
        dataset.store(&data_path)?;
    }
    if failed > limit {
        return Err(PipelineError::Aborted { failed, total: plans.len() });
    }
    Ok(ScanSummary { dataset, records: w.written, failed, skipped })
}

/// Latest record per node index across every run in `dir`.
pub fn load_records(dir: &Path) -> Result<Vec<NodeRecord>> {
    let path = dir.join(RECORDS_FILE);
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(&path).at(&path)?;
    let mut latest = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: NodeRecord = serde_json::from_str(line).map_err(|e| PipelineError::Format {
            path: path.clone(),
            line: i + 1,
            msg: e.to_string(),
        })?;
        latest.insert(rec.index, rec);
    }
    Ok(latest.into_values().collect())
}
