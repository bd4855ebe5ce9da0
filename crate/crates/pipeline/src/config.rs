//! Scan configuration, node grid and precision schedule.

use crate::error::{IoContext, PipelineError, Result};
use btzone::maps::{MapFamily, ParamPoint};
use btzone::numerics::{log10_abs, BigReal, Precision};
use btzone::splitting::SplittingConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Real,
    Complex,
    Both,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Real => "real",
            Method::Complex => "complex",
            Method::Both => "both",
        }
    }

    pub fn runs_real(self) -> bool {
        self != Method::Complex
    }

    pub fn runs_complex(self) -> bool {
        self != Method::Real
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    pub family: String,
    pub gamma: Option<String>,
    /// `c:d` on the scan coordinate (`mu`, `a`, or `1 - a~`).
    pub range: String,
    pub nodes: usize,
    pub method: Method,
    /// Strip offset of the complex approach as a fraction of the strip half-width.
    pub delta_policy: f64,
    pub digits_target: u32,
    pub guard: u32,
    pub out: PathBuf,
    pub resume: bool,
    pub workers: usize,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            family: "bogdanov".into(),
            gamma: Some("3".into()),
            range: "0.0064:0.0256".into(),
            nodes: 24,
            method: Method::Real,
            delta_policy: 0.5,
            digits_target: 30,
            guard: 30,
            out: PathBuf::from("run"),
            resume: false,
            workers: 1,
            seed: 1,
        }
    }
}

/// One scan node before it is computed.
#[derive(Clone, Debug)]
pub struct NodePlan {
    pub index: usize,
    pub ctx: Precision,
    pub x: BigReal,
    pub main: BigReal,
    pub seed: BigReal,
    pub delta: Option<BigReal>,
}

impl ScanConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).at(path)?;
        toml::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
    }

    pub fn range_bounds(&self) -> Result<(String, String)> {
        let (c, d) = self
            .range
            .split_once(':')
            .ok_or_else(|| PipelineError::Config(format!("range {:?} is not of the form c:d", self.range)))?;
        Ok((c.trim().to_string(), d.trim().to_string()))
    }

    pub fn family_at(&self, ctx: &Precision) -> Result<MapFamily> {
        let gamma = self.gamma.as_deref().map(|g| ctx.parse(g)).transpose()?;
        Ok(MapFamily::from_name(&self.family, gamma)?)
    }

    pub fn validate(&self) -> Result<()> {
        let lo = Precision::with_digits(40)?;
        self.family_at(&lo)?;
        let (c, d) = self.range_bounds()?;
        let (c, d) = (lo.parse(&c)?, lo.parse(&d)?);
        if !(c.is_sign_positive() && !c.is_zero() && c < d) {
            return Err(PipelineError::Config("range must satisfy 0 < c < d".into()));
        }
        if self.nodes < 4 {
            return Err(PipelineError::Config("at least 4 nodes are needed".into()));
        }
        if !(self.delta_policy > 0.0 && self.delta_policy < 1.0) {
            return Err(PipelineError::Config("delta policy must lie in (0, 1)".into()));
        }
        if self.workers == 0 {
            return Err(PipelineError::Config("workers must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 over the fields that determine the dataset contents.
    pub fn fingerprint(&self) -> String {
        let canon = format!(
            "family={};gamma={};range={};nodes={};method={};delta={};digits_target={};guard={}",
            self.family.to_ascii_lowercase(),
            self.gamma.as_deref().unwrap_or(""),
            self.range,
            self.nodes,
            self.method.name(),
            self.delta_policy,
            self.digits_target,
            self.guard,
        );
        let digest = Sha256::digest(canon.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn created(&self) -> String {
        format!("btzone-pipeline {} config {}", env!("CARGO_PKG_VERSION"), &self.fingerprint()[..16])
    }

    /// Working digits `ceil |log10 W| + target + 50`, where `W` is `K` (real) or
    /// `K e^(2 pi delta)` (complex only).
    pub fn schedule_digits(&self, log10_k: f64, log10_gain: Option<f64>) -> u32 {
        let w = match (self.method, log10_gain) {
            (Method::Complex, Some(g)) => log10_k + g,
            _ => log10_k,
        };
        w.abs().ceil() as u32 + self.digits_target + 50
    }

    /// Nodes equally spaced in the expansion variable over `[c^(1/p), d^(1/p)]`.
    pub fn plan(&self) -> Result<Vec<NodePlan>> {
        self.validate()?;
        let lo = Precision::with_digits(40)?;
        let family_lo = self.family_at(&lo)?;
        let (c, d) = self.range_bounds()?;
        let mut out = Vec::with_capacity(self.nodes);
        for i in 0..self.nodes {
            let (_, main_lo) = grid_point(&family_lo, &c, &d, i, self.nodes, &lo)?;
            family_lo.check_admissible(&main_lo)?;
            let log10_k = log10_abs(&family_lo.leading_width(&main_lo)?);
            let seed_lo = family_lo.predicted_homoclinic_slave(&main_lo);
            let delta_lo = if self.method.runs_complex() {
                Some(strip_offset(&family_lo, &main_lo, &seed_lo, self.delta_policy, &lo)?)
            } else {
                None
            };
            let gain = delta_lo.as_ref().map(|d| 2.0 * std::f64::consts::PI * d.to_f64() / std::f64::consts::LN_10);
            let ctx = Precision::new(self.schedule_digits(log10_k, gain), self.guard)?;
            let family = self.family_at(&ctx)?;
            let (x, main) = grid_point(&family, &c, &d, i, self.nodes, &ctx)?;
            let seed = family.predicted_homoclinic_slave(&main);
            let delta = delta_lo.map(|d| ctx.adopt(&d));
            out.push(NodePlan { index: i, ctx, x, main, seed, delta });
        }
        Ok(out)
    }
}

fn grid_point(family: &MapFamily, c: &str, d: &str, i: usize, n: usize, ctx: &Precision) -> Result<(BigReal, BigReal)> {
    let p = family.scale_power();
    let mut xc = ctx.parse(c)?;
    xc.root_mut(p);
    let mut xd = ctx.parse(d)?;
    xd.root_mut(p);
    let step = (xd - &xc) / ctx.real((n - 1) as u32);
    let x = xc + step * ctx.real(i as u32);
    let main = family.main_from_expansion_variable(&x);
    Ok((x, main))
}

/// `delta = fraction * (1 - margin) pi / |log lambda1|` from a 40-digit saddle,
/// so that the offset does not depend on the working precision.
fn strip_offset(family: &MapFamily, main: &BigReal, seed: &BigReal, fraction: f64, lo: &Precision) -> Result<BigReal> {
    let family = family.adopt(lo);
    let p = ParamPoint::new(lo.adopt(main), lo.adopt(seed));
    let saddle = family.saddle(&p, lo)?;
    let margin = SplittingConfig::default().strip_margin;
    let ln_l1 = saddle.lambda1.ln().to_f64().abs();
    let rho = (1.0 - margin) * std::f64::consts::PI / ln_l1;
    // round to 12 significant digits so the value is exactly reproducible
    let v: f64 = format!("{:.11e}", fraction * rho).parse().unwrap_or(fraction * rho);
    Ok(lo.real(v))
}
