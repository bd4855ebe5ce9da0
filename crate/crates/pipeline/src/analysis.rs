//! Fitting and validation on stored datasets.

use crate::dataset::DatasetFile;
use crate::error::{IoContext, PipelineError, Result};
use btzone::asymptotics::{
    analytic_first_log_coefficient, extrapolability_test, fit, splitting_constant_check, stability_test,
    AsymptoticSequence, ExpansionCoefficients, ExtrapolabilityReport, FitMode, WidthDataset,
};
use btzone::maps::MapFamily;
use btzone::numerics::{log10_abs, BigReal, Precision};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

pub const COEFFICIENTS_FILE: &str = "coefficients.txt";

/// A dataset with its family, fitting precision and expansion.
pub struct Loaded {
    pub file: DatasetFile,
    pub family: MapFamily,
    pub ctx: Precision,
    pub sequence: AsymptoticSequence,
    pub data: WidthDataset,
}

impl Loaded {
    pub fn new(file: DatasetFile) -> Result<Self> {
        let ctx = file.precision()?;
        let family = file.family()?;
        let sequence = AsymptoticSequence::for_family(&family);
        let data = file.widths()?;
        Ok(Self { file, family, ctx, sequence, data })
    }

    pub fn open(path: &Path) -> Result<Self> {
        Self::new(DatasetFile::load(path)?)
    }

    /// Basis size for `ell`, or every node when `ell` is absent.
    pub fn basis(&self, ell: Option<usize>) -> Result<usize> {
        let n = match ell {
            Some(l) => self.sequence.basis_size_for_ell(l)?,
            None => self.data.nodes.len(),
        };
        if n > self.data.nodes.len() {
            return Err(PipelineError::Config(format!(
                "basis of size {n} needs more than the {} available nodes",
                self.data.nodes.len()
            )));
        }
        Ok(n)
    }

    pub fn fit(&self, basis: usize, mode: FitMode) -> Result<ExpansionCoefficients> {
        Ok(fit(&self.sequence, &self.data, basis, mode, &self.ctx)?)
    }
}

/// One line of the coefficients file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoefficientLine {
    pub index: usize,
    pub name: String,
    pub label: String,
    pub value: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoefficientFile {
    pub meta: Vec<(String, String)>,
    pub lines: Vec<CoefficientLine>,
}

impl CoefficientFile {
    pub fn from_fit(loaded: &Loaded, coeffs: &ExpansionCoefficients, mode: FitMode) -> Self {
        let digits = loaded.ctx.digits() as usize;
        let mut meta: Vec<(String, String)> = loaded
            .file
            .meta
            .iter()
            .filter(|(k, _)| matches!(k.as_str(), "family" | "gamma" | "created"))
            .cloned()
            .collect();
        meta.extend([
            ("basis".to_string(), format!("{:?}", coeffs.sequence.kind).to_lowercase()),
            ("terms".to_string(), coeffs.alpha.len().to_string()),
            ("nodes".to_string(), coeffs.nodes_used.to_string()),
            ("mode".to_string(), format!("{mode:?}").to_lowercase()),
            ("max_residual".to_string(), coeffs.max_residual.to_string_radix(10, Some(6))),
            ("log10_condition".to_string(), format!("{:.2}", coeffs.log10_condition)),
        ]);
        let lines = coeffs
            .entries()
            .into_iter()
            .map(|e| CoefficientLine {
                index: e.index,
                name: e.name,
                label: e.label,
                value: e.value.to_string_radix(10, Some(digits)),
            })
            .collect();
        Self { meta, lines }
    }

    /// `index, basis-label, value` records after `# key=value` lines.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.meta {
            s.push_str(&format!("# {k}={v}\n"));
        }
        for l in &self.lines {
            s.push_str(&format!("{}, {}, {}\n", l.index, l.label, l.value));
        }
        s
    }

    pub fn parse(text: &str, origin: &Path, sequence: &AsymptoticSequence) -> Result<Self> {
        let mut out = Self::default();
        for (i, line) in text.lines().enumerate() {
            let fail = |msg: &str| PipelineError::Format { path: origin.into(), line: i + 1, msg: msg.into() };
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest.trim().split_once('=').ok_or_else(|| fail("header line is not key=value"))?;
                out.meta.push((k.trim().into(), v.trim().into()));
                continue;
            }
            let mut parts = line.splitn(3, ", ");
            let (Some(idx), Some(label), Some(value)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(fail("expected index, basis-label, value"));
            };
            let index: usize = idx.parse().map_err(|_| fail("bad index"))?;
            out.lines.push(CoefficientLine {
                index,
                name: sequence.coefficient_name(index),
                label: label.into(),
                value: value.into(),
            });
        }
        Ok(out)
    }

    pub fn store(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render()).at(path)
    }

    pub fn load(path: &Path, sequence: &AsymptoticSequence) -> Result<Self> {
        let text = fs::read_to_string(path).at(path)?;
        Self::parse(&text, path, sequence)
    }

    /// Aligned table with coefficient names; values are copied verbatim.
    pub fn table(&self) -> String {
        let wn = self.lines.iter().map(|l| l.name.len()).max().unwrap_or(4).max(4);
        let wl = self.lines.iter().map(|l| l.label.len()).max().unwrap_or(5).max(5);
        let mut s = format!("{:>5}  {:<wn$}  {:<wl$}  value\n", "index", "name", "basis");
        for l in &self.lines {
            s.push_str(&format!("{:>5}  {:<wn$}  {:<wl$}  {}\n", l.index, l.name, l.label, l.value));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtrapolabilitySection {
    pub fit_nodes: usize,
    pub holdout_nodes: usize,
    pub truncation: usize,
    pub omitted: String,
    pub slope: f64,
    pub expected: f64,
    pub relative_error: f64,
    pub pairs: Vec<(f64, f64)>,
}

/// Interpolates the first `fit_nodes` nodes, keeps `truncation` terms and
/// measures the residual on the remaining nodes.
pub fn extrapolability(loaded: &Loaded, fit_nodes: usize, truncation: usize) -> Result<ExtrapolabilitySection> {
    let n = loaded.data.nodes.len();
    if fit_nodes < 2 || fit_nodes >= n {
        return Err(PipelineError::Config(format!("fit window of {fit_nodes} nodes must leave a holdout out of {n}")));
    }
    let coeffs = loaded.fit(fit_nodes, FitMode::Interpolate)?;
    let holdout = &loaded.data.nodes[fit_nodes..];
    let r: ExtrapolabilityReport = extrapolability_test(&coeffs, truncation, holdout)?;
    Ok(ExtrapolabilitySection {
        fit_nodes,
        holdout_nodes: holdout.len(),
        truncation,
        omitted: loaded.sequence.label(truncation),
        relative_error: r.relative_slope_error(),
        slope: r.slope,
        expected: r.expected,
        pairs: r.pairs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityRow {
    pub digits: u32,
    pub index: usize,
    pub name: String,
    pub log10_rel_error: f64,
    pub matched_digits: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilitySection {
    pub basis: usize,
    pub trials: usize,
    pub seed: u64,
    pub rows: Vec<StabilityRow>,
}

impl StabilitySection {
    /// `(N, matched digits)` of one coefficient.
    pub fn series(&self, index: usize) -> Vec<(f64, f64)> {
        self.rows.iter().filter(|r| r.index == index).map(|r| (f64::from(r.digits), r.matched_digits)).collect()
    }
}

pub fn stability(loaded: &Loaded, basis: usize, digits: &[u32], trials: usize, seed: u64) -> Result<StabilitySection> {
    let cap = f64::from(loaded.ctx.digits());
    let mut rows = Vec::new();
    for &n in digits {
        if n >= loaded.ctx.digits() {
            return Err(PipelineError::Config(format!(
                "perturbation 1e-{n} is below the dataset precision of {} digits",
                loaded.ctx.digits()
            )));
        }
        let r = stability_test(&loaded.sequence, &loaded.data, basis, n, trials, seed, &loaded.ctx)?;
        for i in 0..basis {
            rows.push(StabilityRow {
                digits: n,
                index: i,
                name: loaded.sequence.coefficient_name(i),
                log10_rel_error: r.log10_rel_error[i],
                matched_digits: r.matched_digits(i, cap),
            });
        }
    }
    Ok(StabilitySection { basis, trials, seed, rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantSection {
    pub basis: usize,
    pub reference: String,
    pub fitted: String,
    pub matched_digits: f64,
    /// Fitted and closed-form first log coefficient with matched digits.
    pub first_log: Option<(String, String, f64)>,
}

pub fn constant_check(loaded: &Loaded, basis: usize, reference: &str) -> Result<ConstantSection> {
    let coeffs = loaded.fit(basis, FitMode::Interpolate)?;
    let theta = loaded.ctx.parse(reference)?;
    let matched = splitting_constant_check(&coeffs, &theta);
    let first_log = match (coeffs.first_log_coefficient(), analytic_first_log_coefficient(&loaded.family)) {
        (Some(fitted), Ok(exact)) => Some((
            fitted.to_string_radix(10, Some(20)),
            exact.to_string_radix(10, Some(20)),
            -log10_abs(&(BigReal::with_val(loaded.ctx.bits(), fitted - &exact) / &exact)),
        )),
        _ => None,
    };
    Ok(ConstantSection {
        basis,
        reference: reference.to_string(),
        fitted: coeffs.constant_value().to_string_radix(10, Some(30)),
        matched_digits: matched,
        first_log,
    })
}

/// Pearson correlation.
pub fn correlation(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}
