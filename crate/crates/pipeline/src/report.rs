//! Run reports and plot-ready data files.

use crate::analysis::{CoefficientFile, ExtrapolabilitySection, StabilitySection, COEFFICIENTS_FILE};
use crate::dataset::{DatasetFile, DATASET_FILE};
use crate::error::{IoContext, Result};
use crate::scan::{load_records, NodeRecord, Outcome};
use btzone::asymptotics::AsymptoticSequence;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

pub const METHODS_FILE: &str = "methods.csv";
pub const TABLE_FILE: &str = "coefficients_table.txt";
pub const REPORT_FILE: &str = "report.json";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub family: Option<String>,
    pub nodes_ok: usize,
    pub nodes_failed: usize,
    pub flagged: Vec<usize>,
    pub failures: Vec<(usize, String)>,
    pub coefficients: usize,
    pub validations: Vec<String>,
}

/// `main, log10 Z_r, log10 |Z_r - Z_c|, log10 e^(2 pi delta)` per node with both estimates.
pub fn method_rows(records: &[NodeRecord]) -> Vec<(String, f64, f64, f64)> {
    records
        .iter()
        .filter_map(|r| match &r.outcome {
            Outcome::Ok { real: Some(re), complex: Some(c), log10_method_gap: Some(g), .. } => {
                Some((r.main.clone(), re.log10_width, *g, c.log10_gain))
            }
            _ => None,
        })
        .collect()
}

pub fn method_csv(records: &[NodeRecord]) -> String {
    let mut s = String::from("main,log10_Zr,log10_abs_Zr_minus_Zc,log10_gain\n");
    for (m, z, g, e) in method_rows(records) {
        s.push_str(&format!("{m},{z:.6},{g:.6},{e:.6}\n"));
    }
    s
}

pub fn extrapolability_csv(sec: &ExtrapolabilitySection) -> String {
    let mut s = String::from("log_main,log_residual\n");
    for (a, b) in &sec.pairs {
        s.push_str(&format!("{a:.12},{b:.12}\n"));
    }
    s
}

pub fn stability_csv(sec: &StabilitySection) -> String {
    let mut s = String::from("N,index,name,log10_rel_error,matched_digits\n");
    for r in &sec.rows {
        s.push_str(&format!("{},{},{},{:.6},{:.6}\n", r.digits, r.index, r.name, r.log10_rel_error, r.matched_digits));
    }
    s
}

pub fn write_section<T: Serialize>(dir: &Path, name: &str, section: &T) -> Result<()> {
    let path = dir.join(format!("validation-{name}.json"));
    fs::write(&path, serde_json::to_string_pretty(section)?).at(&path)
}

/// Summarizes everything found in `dir` and writes the table, method
/// comparison and report files.
pub fn report(dir: &Path) -> Result<RunReport> {
    let records = load_records(dir)?;
    let mut rep = RunReport::default();
    for r in &records {
        match &r.outcome {
            Outcome::Ok { flagged, .. } => {
                rep.nodes_ok += 1;
                if *flagged {
                    rep.flagged.push(r.index);
                }
            }
            Outcome::Failed { reason } => {
                rep.nodes_failed += 1;
                rep.failures.push((r.index, reason.clone()));
            }
        }
    }
    let data_path = dir.join(DATASET_FILE);
    let coeff_path = dir.join(COEFFICIENTS_FILE);
    let table_path = dir.join(TABLE_FILE);
    if data_path.exists() {
        let data = DatasetFile::load(&data_path)?;
        rep.family = data.get("family").map(str::to_string);
        if coeff_path.exists() {
            let seq = AsymptoticSequence::for_family(&data.family()?);
            let c = CoefficientFile::load(&coeff_path, &seq)?;
            rep.coefficients = c.lines.len();
            fs::write(&table_path, c.table()).at(&table_path)?;
        }
    }
    if !table_path.exists() {
        fs::write(&table_path, CoefficientFile::default().table()).at(&table_path)?;
    }
    let mut names: Vec<String> = fs::read_dir(dir)
        .at(dir)?
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().into_string().ok())
        .filter_map(|n| n.strip_prefix("validation-")?.strip_suffix(".json").map(str::to_string))
        .collect();
    names.sort();
    rep.validations = names;
    let fig = dir.join(METHODS_FILE);
    fs::write(&fig, method_csv(&records)).at(&fig)?;
    let out = dir.join(REPORT_FILE);
    fs::write(&out, serde_json::to_string_pretty(&rep)?).at(&out)?;
    Ok(rep)
}
